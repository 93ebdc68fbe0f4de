//! CSV and JSON emission for scenario results.
//!
//! CSV numbers use `{:.16e}` (17 significant digits, `.` separator) and rows
//! end in `\n`, so identical runs produce identical bytes.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::nogo::{ConservationReport, Verdict};
use crate::scenarios::{Check, ScenarioRecord, ScenarioResult};

pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_header(result: &ScenarioResult) -> String {
    let mut h = String::from("slice,t");
    for c in &result.columns {
        h.push(',');
        h.push_str(c);
    }
    h
}

pub fn write_csv<W: Write>(result: &ScenarioResult, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", csv_header(result))?;
    for r in &result.records {
        write!(w, "{},{}", r.slice, format_number(r.t))?;
        for v in &r.values {
            write!(w, ",{}", format_number(*v))?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn to_csv(result: &ScenarioResult) -> String {
    let mut buf = Vec::new();
    write_csv(result, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

/// Published JSON document for a scenario run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDocument {
    pub config: ScenarioConfig,
    pub columns: Vec<String>,
    pub records: Vec<ScenarioRecord>,
    pub report: ConservationReport,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
}

impl RunDocument {
    pub fn new(config: &ScenarioConfig, result: &ScenarioResult) -> Self {
        Self {
            config: config.clone(),
            columns: result.columns.clone(),
            records: result.records.clone(),
            report: result.report.clone(),
            checks: result.checks.clone(),
            verdict: result.verdict,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable document")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioKind;
    use crate::scenarios::run_scenario;

    #[test]
    fn number_format() {
        assert_eq!(format_number(1.0), "1.0000000000000000e0");
        assert_eq!(format_number(-0.1), "-1.0000000000000001e-1");
        assert_eq!(format_number(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn csv_shape_and_json_round_trip() {
        let cfg = ScenarioConfig::defaults(ScenarioKind::Cow);
        let result = run_scenario(&cfg).unwrap();
        let csv = to_csv(&result);
        let mut lines = csv.split('\n');
        assert_eq!(lines.next(), Some("slice,t,interference_probability,closed_form,exp_P_neutron"));
        assert_eq!(csv.lines().count(), result.records.len() + 1);
        assert!(!csv.contains('\r'));
        let doc = RunDocument::new(&cfg, &result);
        let back: RunDocument = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
    }
}
