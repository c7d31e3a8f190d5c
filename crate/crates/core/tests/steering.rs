mod common;

use std::f64::consts::PI;

use common::*;
use dispctl_core::dynamics::{duhamel, propagate, uniform_grid};
use dispctl_core::eigen::{DEFAULT_TOLERANCE, cluster_spectrum, controllability_time};
use dispctl_core::moment::{control_norm, moment_residuals, synthesize};
use dispctl_core::spectral::{FourierField, make_bump};
use dispctl_core::symbols::{DispersionSymbol, Parity};
use dispctl_core::{Complex64, Error, Exec};

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[test]
fn steers_every_controllable_preset_between_nonzero_states() {
    let n = 12;
    let shape = make_bump(PI, PI / 2.0, n, 4096).unwrap();
    for (i, (name, sym)) in presets().into_iter().enumerate() {
        let analysis = cluster_spectrum(&sym, n, DEFAULT_TOLERANCE).unwrap();
        // past 2π/γ the Gram matrix is well conditioned, so quadrature residuals stay small
        let horizon = (1.5 * controllability_time(&analysis).unwrap()).max(1.2 * 2.0 * PI / analysis.gamma);
        let u0 = random_field(n, 20 + i as u64);
        let mut u1 = random_mean_free(n, 40 + i as u64);
        u1.set(0, u0.mean());
        for s in [0.0, 1.0] {
            let h = synthesize(&u0, &u1, &analysis, &shape, horizon, s).unwrap();
            let end = duhamel(&u0, &sym, &shape, &h, &[horizon], Exec::default()).unwrap();
            let err = rel_err(&end[0], &u1, s);
            assert!(err < 1e-6, "{name} s={s}: steering error {err:e}");
            let res = max_norm(&moment_residuals(&h, &shape, &analysis, Exec::default()));
            assert!(res < 1e-8, "{name} s={s}: residual {res:e}");
            assert!(control_norm(&h).is_finite());
        }
    }
}

#[test]
fn duhamel_matches_rk4_at_fine_step() {
    // step 1e−4·min(1, 2π/max|λ|)
    let n = 8;
    let sym = DispersionSymbol::benjamin_ono();
    let shape = make_bump(PI, PI / 2.0, n, 4096).unwrap();
    let analysis = cluster_spectrum(&sym, n, DEFAULT_TOLERANCE).unwrap();
    let u0 = random_field(n, 3);
    let mut u1 = random_mean_free(n, 4);
    u1.set(0, u0.mean());
    let h = synthesize(&u0, &u1, &analysis, &shape, 1.0, 0.0).unwrap();
    let step = 1e-4 * (2.0 * PI / analysis.max_abs_lambda()).min(1.0);
    for t in [0.37, 1.0] {
        let closed = duhamel(&u0, &sym, &shape, &h, &[t], Exec::default()).unwrap();
        let rk = rk4_controlled(&u0, &sym, &shape, &h, t, step);
        assert!(rel_err(&closed[0], &rk, 0.0) < 1e-6, "t={t}");
    }
}

#[test]
fn zero_control_reduces_to_free_flow() {
    let n = 8;
    let sym = DispersionSymbol::smith();
    let shape = make_bump(PI, PI / 2.0, n, 4096).unwrap();
    let analysis = cluster_spectrum(&sym, n, DEFAULT_TOLERANCE).unwrap();
    let zero = FourierField::zeros(n);
    let h = synthesize(&zero, &zero, &analysis, &shape, 1.0, 0.0).unwrap();
    assert!(h.coeffs().iter().all(|c| *c == Complex64::new(0.0, 0.0)));
    let u0 = random_field(n, 9);
    let traj = duhamel(&u0, &sym, &shape, &h, &uniform_grid(1.0, 5), Exec::default()).unwrap();
    for (t, u) in uniform_grid(1.0, 5).iter().zip(&traj) {
        let free = propagate(&u0, &sym, *t).unwrap();
        assert!(u.max_abs_diff(&free).unwrap() < 1e-15);
    }
}

#[test]
fn mismatched_means_are_a_configuration_error() {
    let n = 8;
    let sym = DispersionSymbol::smith();
    let shape = make_bump(PI, PI / 2.0, n, 4096).unwrap();
    let analysis = cluster_spectrum(&sym, n, DEFAULT_TOLERANCE).unwrap();
    let u0 = FourierField::constant(n, Complex64::new(1.0, 0.0));
    let err = synthesize(&u0, &FourierField::zeros(n), &analysis, &shape, 1.0, 0.0).unwrap_err();
    assert!(matches!(err, Error::MeanMismatch { .. }));
    assert!(!err.is_hypothesis_violation());
}

#[test]
fn transport_spectrum_needs_a_horizon_above_two_pi() {
    let n = 8;
    let lambdas: Vec<f64> = (-(n as i64)..=n as i64).map(|k| k as f64).collect();
    let sym = DispersionSymbol::from_eigenvalues(&lambdas, 1.0, Parity::Even).unwrap();
    let shape = make_bump(PI, PI / 2.0, n, 4096).unwrap();
    let analysis = cluster_spectrum(&sym, n, DEFAULT_TOLERANCE).unwrap();
    let u1 = random_mean_free(n, 1);
    let zero = FourierField::zeros(n);
    let err = synthesize(&zero, &u1, &analysis, &shape, 1.0, 0.0).unwrap_err();
    assert!(matches!(err, Error::HorizonTooShort { required, .. } if (required - 2.0 * PI).abs() < 1e-12));

    let h = synthesize(&zero, &u1, &analysis, &shape, 8.0, 0.0).unwrap();
    let end = duhamel(&zero, &sym, &shape, &h, &[8.0], Exec::default()).unwrap();
    assert!(rel_err(&end[0], &u1, 0.0) < 1e-6);
}
