mod common;

use common::{lattice_oracle, taylor_propagate, taylor_unitary, Dense};
use hybridlab::config::{ScenarioConfig, ScenarioKind};
use hybridlab::linalg::{pauli, tensor_product, unitary_from_generator, ComplexMatrix};
use hybridlab::nogo::{exchange_expectations, exchange_hamiltonian, random_hermitian};
use hybridlab::rng::stream;
use hybridlab::scenarios::run_scenario;
use num_complex::Complex64 as C;
use rand::Rng;

fn dense(m: &ComplexMatrix) -> Dense {
    let flat = m.to_row_major();
    flat.chunks(m.cols()).map(|r| r.to_vec()).collect()
}

#[test]
fn exponential_matches_taylor_series() {
    let mut r = stream(17);
    for _ in 0..60 {
        let d = r.random_range(1..=8);
        let h = random_hermitian(d, &mut r);
        let norm = dense(h.matrix())
            .iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let t = r.random_range(-1.0..1.0) / norm.max(1e-12);
        let u = unitary_from_generator(&h, t).unwrap();
        let oracle = taylor_unitary(&dense(h.matrix()), t, 50);
        for (row_u, row_o) in dense(&u).iter().zip(&oracle) {
            for (a, b) in row_u.iter().zip(row_o) {
                assert!((a - b).norm() <= 1e-10, "d={d} t={t}");
            }
        }
    }
}

#[test]
fn exchange_matches_cosine_and_series() {
    let h = dense(exchange_hamiltonian().matrix());
    let o1 = dense(&tensor_product(pauli::z().matrix(), &ComplexMatrix::identity(2)).unwrap());
    let mut psi0 = vec![C::new(0.0, 0.0); 4];
    psi0[1] = C::new(1.0, 0.0);
    for k in 0..50 {
        let t = std::f64::consts::PI * k as f64 / 49.0;
        let (a, b) = exchange_expectations(t).unwrap();
        assert!((a - (2.0 * t).cos()).abs() <= 1e-9);
        assert!((a + b).abs() <= 1e-12);
        let psi = taylor_propagate(&h, &psi0, t, 20, 30);
        let series: C = psi.iter().zip(common::matvec(&o1, &psi)).map(|(x, y)| x.conj() * y).sum();
        assert!((series.re - a).abs() <= 1e-9);
    }
}

#[test]
fn momentum_scenario_matches_plane_wave_oracle() {
    let cfg = ScenarioConfig::defaults(ScenarioKind::MomentumQuantum);
    let lat = &cfg.lattice;
    let oracle = lattice_oracle(lat.n_sites, [lat.hop_s, lat.hop_e, lat.hop_m], lat.g_se, lat.g_em, lat.range);
    let p = &cfg.packets;
    let psi0 = oracle.packet_state([p.x_s, p.x_e, p.x_m], p.width);
    let result = run_scenario(&cfg).unwrap();
    let dt = cfg.schedule.t_max / cfg.schedule.n_steps as f64;
    let mut psi = psi0.clone();
    let mut p_s0 = 0.0;
    for (k, rec) in result.records.iter().enumerate() {
        if k > 0 {
            psi = taylor_propagate(&oracle.h, &psi, dt, 4, 30);
        }
        let pm = oracle.momenta_of(&psi);
        if k == 0 {
            p_s0 = pm[0];
        }
        for (a, b) in rec.values[..3].iter().zip(pm) {
            assert!((a - b).abs() <= 1e-9, "slice {k}: {a} vs {b}");
        }
    }
    let p_final = oracle.momenta_of(&psi);
    let delta = (p_final[0] - p_s0).abs();
    let reference = cfg.expect.delta_p_s_reference.unwrap();
    assert!((delta - reference).abs() <= 1e-9, "oracle {delta:.17} vs recorded {reference:.17}");
    assert!(cfg.expect.min_delta_p_s.unwrap() < delta);
}
