//! Independent oracles shared by the integration tests: random fields, an
//! integrating-factor RK4 integrator, all-pairs spectrum analysis, direct
//! quadrature of the moment matrix and time-domain observability quotients.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use dispctl_core::eigen::{Criterion, GapEntry};
use dispctl_core::moment::ControlSignal;
use dispctl_core::quadrature::GaussRule;
use dispctl_core::spectral::{ControlShape, FourierField, sobolev_weight};
use dispctl_core::symbols::DispersionSymbol;
use dispctl_core::{Complex64, slot, wavenumbers};
use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn presets() -> Vec<(&'static str, DispersionSymbol)> {
    vec![
        ("kdv", DispersionSymbol::kdv()),
        ("schrodinger", DispersionSymbol::schrodinger()),
        ("benjamin_ono", DispersionSymbol::benjamin_ono()),
        ("benjamin(1)", DispersionSymbol::benjamin(1.0).unwrap()),
        ("smith", DispersionSymbol::smith()),
        ("dgbo(1.5)", DispersionSymbol::dgbo(1.5).unwrap()),
        ("nls4(+1)", DispersionSymbol::fourth_order_nls(1.0).unwrap()),
        ("nls4(-1)", DispersionSymbol::fourth_order_nls(-1.0).unwrap()),
        (
            "higher_even(1,1)",
            DispersionSymbol::higher_order_even(vec![1.0, 1.0]).unwrap(),
        ),
        (
            "higher_odd(1,1,1,1)",
            DispersionSymbol::higher_order_odd(vec![1.0, 1.0, 1.0, 1.0]).unwrap(),
        ),
    ]
}

/// Coefficients uniform in `[−1, 1]²`.
pub fn random_field(n: usize, seed: u64) -> FourierField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FourierField::from_fn(n, |_| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_mean_free(n: usize, seed: u64) -> FourierField {
    random_field(n, seed).mean_free()
}

pub fn rel_err(a: &FourierField, b: &FourierField, s: f64) -> f64 {
    (a - b).sobolev_norm(s) / b.sobolev_norm(s)
}

/// RK4 step recommended for a spectrum: `min(1e−4, 0.02/max|λ|)`.
pub fn rk4_step(max_abs_lambda: f64) -> f64 {
    if max_abs_lambda > 0.0 {
        (0.02 / max_abs_lambda).min(1e-4)
    } else {
        1e-4
    }
}

/// Integrates `û' = iΛû + Ĝĥ(t)` with `ĥ` from `h.field_at`, by classical
/// RK4 applied to `v = e^{−iΛt}û`, on a uniform grid of roughly `step`.
pub fn rk4_controlled(
    u0: &FourierField,
    sym: &DispersionSymbol,
    shape: &ControlShape,
    h: &ControlSignal,
    t_end: f64,
    step: f64,
) -> FourierField {
    let n = u0.truncation();
    let lambdas = sym.eigenvalues(n).unwrap();
    let forcing = |t: f64| -> Vec<Complex64> {
        let gh = shape.apply(&h.field_at(t)).unwrap();
        wavenumbers(n)
            .map(|k| gh.coeff(k) * Complex64::from_polar(1.0, -lambdas[slot(n, k)] * t))
            .collect()
    };
    let steps = (t_end / step).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let mut v: Vec<Complex64> = u0.coeffs().to_vec();
    let mut f0 = forcing(0.0);
    for i in 0..steps {
        let t = i as f64 * dt;
        // v' depends on t only, so the two midpoint stages coincide
        let fm = forcing(t + dt / 2.0);
        let f1 = forcing(t + dt);
        for (idx, vi) in v.iter_mut().enumerate() {
            *vi += (f0[idx] + fm[idx] * 4.0 + f1[idx]) * (dt / 6.0);
        }
        f0 = f1;
    }
    FourierField::from_fn(n, |k| {
        v[slot(n, k)] * Complex64::from_polar(1.0, lambdas[slot(n, k)] * t_end)
    })
}

/// All-pairs spectrum analysis used as an oracle for the clustering code.
#[derive(Debug)]
pub struct BruteSpectrum {
    pub clusters: BTreeSet<Vec<i64>>,
    pub representatives: BTreeSet<i64>,
    pub criterion: Criterion,
    pub k1_star: usize,
    pub gamma: f64,
    pub profile: Vec<GapEntry>,
}

pub fn brute_spectrum(sym: &DispersionSymbol, n: usize, tol: f64) -> BruteSpectrum {
    let ks: Vec<i64> = wavenumbers(n).collect();
    let ls: Vec<f64> = ks.iter().map(|&k| sym.eigenvalue(k).unwrap()).collect();
    let mut label: Vec<usize> = (0..ks.len()).collect();
    // relabel to a fixed point: every pair within tolerance shares a label
    loop {
        let mut changed = false;
        for a in 0..ks.len() {
            for b in 0..ks.len() {
                let thr = tol * (1.0 + ls[a].abs().max(ls[b].abs()));
                if (ls[a] - ls[b]).abs() <= thr && label[b] < label[a] {
                    label[a] = label[b];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut clusters = BTreeSet::new();
    for l in BTreeSet::from_iter(label.iter().copied()) {
        let c: Vec<i64> = (0..ks.len()).filter(|&i| label[i] == l).map(|i| ks[i]).collect();
        clusters.insert(c);
    }
    let representatives: BTreeSet<i64> = clusters.iter().map(|c| *c.iter().max().unwrap()).collect();
    let lam = |k: i64| ls[(k + n as i64) as usize];

    let tail = |fits: &dyn Fn(&Vec<i64>) -> bool| {
        let mut start = 1usize;
        for c in &clusters {
            if !fits(c) {
                let reach = c.iter().map(|k| k.unsigned_abs() as usize).max().unwrap();
                start = start.max(reach + 1);
            }
        }
        start
    };
    let k_one = tail(&|c| c.len() == 1);
    let k_two = tail(&|c| (c.len() == 2 && c[0] == -c[1]) || *c == vec![0]);
    let (criterion, k1_star) = if k_one <= n / 2 {
        (Criterion::I, k_one)
    } else if k_two <= n / 2 {
        (Criterion::II, k_two)
    } else {
        (Criterion::Inapplicable, k_one.min(k_two))
    };

    let min_pair_gap = |set: &[i64]| -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, &a) in set.iter().enumerate() {
            for &b in &set[i + 1..] {
                let d = (lam(a) - lam(b)).abs();
                best = Some(best.map_or(d, |x: f64| x.min(d)));
            }
        }
        best
    };
    let reps: Vec<i64> = representatives.iter().copied().collect();
    let gamma = min_pair_gap(&reps).unwrap_or(0.0);
    let mut profile = Vec::new();
    for radius in 0..=n - 2 {
        let outer: Vec<i64> = reps
            .iter()
            .copied()
            .filter(|k| k.unsigned_abs() as usize > radius)
            .collect();
        match min_pair_gap(&outer) {
            Some(gap) => profile.push(GapEntry { radius, gap }),
            None => break,
        }
    }
    BruteSpectrum {
        clusters,
        representatives,
        criterion,
        k1_star,
        gamma,
        profile,
    }
}

/// `m_{j,k} = ∫ G(ψⱼ) conj(ψₖ) dx` by Gauss-Legendre quadrature of the
/// profile over its support.
pub struct MomentOracle {
    rule: GaussRule,
    profile: Vec<f64>,
}

impl MomentOracle {
    pub fn new(shape: &ControlShape) -> Self {
        let (c, d) = (shape.center(), shape.half_width());
        let rule = GaussRule::new(1500, c - d, c + d);
        let profile = rule.nodes.iter().map(|&x| shape.profile(x)).collect();
        MomentOracle { rule, profile }
    }

    /// `∫ g(x) e^{iqx} dx / (2π)^{p/2}`.
    fn weighted(&self, q: i64, p: i32) -> Complex64 {
        let scale = (2.0 * PI).powf(-p as f64 / 2.0);
        self.rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .zip(&self.profile)
            .map(|((&x, &w), &g)| Complex64::from_polar(w * g * scale, q as f64 * x))
            .sum()
    }

    pub fn entry(&self, j: i64, k: i64) -> Complex64 {
        self.weighted(j - k, 2) - self.weighted(j, 1) * self.weighted(-k, 1)
    }
}

/// Time-domain observability quotients
/// `∫₀ᵀ ‖G* e^{−t∂ₓ𝒜} φ‖²_{H^{−s}} dt / ‖φ‖²` for a batch of directions, each
/// given in dual weighted coordinates on the nonzero modes (`φ̂(k) = (1+|k|)^s pₖ`).
/// The time integral is sampled on a Gauss-Legendre grid resolving `2·max|λ|`.
pub fn observability_quotients(
    sym: &DispersionSymbol,
    shape: &ControlShape,
    s: f64,
    horizon: f64,
    directions: &[Vec<Complex64>],
) -> Vec<f64> {
    let n = shape.truncation();
    let lambdas = sym.eigenvalues(n).unwrap();
    let nonzero: Vec<i64> = wavenumbers(n).filter(|&k| k != 0).collect();
    let dim = 2 * n + 1;
    // columns: G applied to each weighted nonzero mode, rows reweighted by (1+|k|)^{−s}
    let mut c = DMatrix::<Complex64>::zeros(dim, nonzero.len());
    for (col, &k) in nonzero.iter().enumerate() {
        let g = shape
            .apply(&FourierField::psi(n, k).scaled(Complex64::new(sobolev_weight(k, s), 0.0)))
            .unwrap();
        for row in wavenumbers(n) {
            c[(slot(n, row), col)] = g.coeff(row) * sobolev_weight(row, -s) * (2.0 * PI).sqrt();
        }
    }
    let p = DMatrix::from_fn(nonzero.len(), directions.len(), |i, d| directions[d][i]);
    let max = lambdas.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let rule = GaussRule::new(((2.0 * max * horizon) as usize + 200).max(400), 0.0, horizon);
    let mut energy = vec![0.0; directions.len()];
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let mut rotated = p.clone();
        for (i, &k) in nonzero.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -lambdas[slot(n, k)] * t);
            for d in 0..directions.len() {
                rotated[(i, d)] *= phase;
            }
        }
        let y = &c * rotated;
        for (d, e) in energy.iter_mut().enumerate() {
            *e += w * y.column(d).norm_squared();
        }
    }
    energy
        .iter()
        .zip(directions)
        .map(|(e, v)| e / v.iter().map(|c| c.norm_sqr()).sum::<f64>())
        .collect()
}
