//! Feasibility and homogeneity of the returned SDP iterates.

use nalgebra::DVector;

use risdoa::anm::{project_toeplitz_hermitian, solve_danm_with, solve_full_anm, FullAnmInput, Measurement, Mode, SolverConfig};
use risdoa::linalg::hermitian_eigen;
use risdoa::model::{build_code_schedule, synthesize_ideal, Noise};
use risdoa::{RisGeometry, SourceSet, C64};

struct Case {
    geom: RisGeometry,
    op: Measurement,
    z: DVector<C64>,
    noise: f64,
}

fn case(size: usize, seed: u64) -> Case {
    let geom = RisGeometry::square(size, 0.4).unwrap();
    let n = size * size;
    let sched = build_code_schedule(n, n, seed).unwrap();
    let src = SourceSet::unit(vec![35.0, 70.0], vec![-15.0, 20.0]).unwrap();
    let snap = synthesize_ideal(&geom, &sched, &src, Noise::SnrDb(20.0), seed).unwrap();
    let noise = snap.noise_power * n as f64;
    Case { op: Measurement::from_codes(sched.codes()).unwrap(), geom, z: snap.samples, noise }
}

fn config(noise: f64) -> SolverConfig {
    SolverConfig::default().with_tolerance(1e-6).with_mode(Mode::NoiseBall { noise_power: noise })
}

#[test]
fn decoupled_iterate_is_feasible() {
    let c = case(5, 3);
    let s = solve_danm_with(&c.op, &c.z, &c.geom, &config(c.noise)).unwrap();
    let w = s.vars.bordered();
    let scale = w.norm();
    let min_eig = hermitian_eigen(&w).unwrap().0.min();
    assert!(min_eig >= -1e-4 * scale, "min eigenvalue {min_eig}");
    for t in [&s.vars.tx, &s.vars.ty] {
        assert!((project_toeplitz_hermitian(t) - t).norm() <= 1e-9 * scale);
    }
    let misfit = (c.op.matrix() * s.vars.signal() - &c.z).norm();
    assert!(misfit <= c.noise.sqrt() * (1.0 + 1e-3), "{misfit} vs {}", c.noise.sqrt());
}

#[test]
fn full_iterate_is_feasible() {
    let c = case(3, 4);
    let s = solve_full_anm(FullAnmInput::Observed { z: &c.z, op: &c.op }, &c.geom, &config(c.noise)).unwrap();
    let w = s.vars.bordered();
    let min_eig = hermitian_eigen(&w).unwrap().0.min();
    assert!(min_eig >= -1e-4 * w.norm(), "min eigenvalue {min_eig}");
    let misfit = (c.op.matrix() * &s.vars.x - &c.z).norm();
    assert!(misfit <= c.noise.sqrt() * (1.0 + 1e-3));
}

#[test]
fn objective_scales_with_data() {
    let c = case(4, 5);
    let base = solve_danm_with(&c.op, &c.z, &c.geom, &config(c.noise)).unwrap().vars.objective();
    let gamma = 3.5;
    let scaled_z = &c.z * C64::new(gamma, 0.0);
    let scaled = solve_danm_with(&c.op, &scaled_z, &c.geom, &config(c.noise * gamma * gamma)).unwrap().vars.objective();
    assert!((scaled - gamma * base).abs() <= 1e-3 * gamma * base, "{scaled} vs {}", gamma * base);
}

#[test]
fn regularised_mode_shrinks_with_alpha() {
    let c = case(4, 6);
    let energy = |alpha: f64| {
        let cfg = SolverConfig::default().with_tolerance(1e-6).with_mode(Mode::Regularized { alpha });
        solve_danm_with(&c.op, &c.z, &c.geom, &cfg).unwrap().vars.objective()
    };
    let (small, large) = (energy(0.5), energy(50.0));
    assert!(large < small, "{large} !< {small}");
}
