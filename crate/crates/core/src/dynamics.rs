//! Free propagation, Duhamel trajectories, feedback laws and observability.
//!
//! Feedback and observability work in weighted coordinates
//! `wₖ = √(2π)(1+|k|)^s û(k)`, where the `H^s` inner product is the standard
//! hermitian one and adjoints are conjugate transposes. In these coordinates
//! `G` becomes `B = W·Ĝ·W⁻¹` with `W = diag((1+|k|)^s)` and `Ĝₖⱼ = m_{j,k}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{Criterion, DEFAULT_TOLERANCE, cluster_spectrum, controllability_time};
use crate::moment::ControlSignal;
use crate::quadrature::{GaussRule, oscillatory_node_count};
use crate::spectral::{ControlShape, FourierField, sobolev_weight};
use crate::symbols::DispersionSymbol;
use crate::{Error, Exec, Result, mode_count, slot, wavenumber, wavenumbers};

const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_7;
/// Gramians with smallest eigenvalue below this fraction of `T·‖GG*‖` are
/// treated as unobservable.
pub const OBSERVABILITY_FLOOR: f64 = 1e-12;
/// Quadrature nodes per parallel chunk when assembling Gramians.
const NODE_CHUNK: usize = 256;

/// `U(t)u₀`: multiplies each mode by `e^{iλₖt}`.
pub fn propagate(u0: &FourierField, sym: &DispersionSymbol, t: f64) -> Result<FourierField> {
    let n = u0.truncation();
    let lambdas = sym.eigenvalues(n)?;
    Ok(FourierField::from_fn(n, |k| {
        u0.coeff(k) * Complex64::from_polar(1.0, lambdas[slot(n, k)] * t)
    }))
}

/// Controlled trajectory `U(t)u₀ + ∫₀ᵗ U(t−τ)Gh(τ) dτ` on `t_grid`, mode by mode:
///
/// `û(k,t) = e^{iλₖt}[û₀(k) + (2π)^{−1/2} Σⱼ m_{j,k} hⱼ ∫₀ᵗ conj(q_{r(j)}(τ)) e^{−iλₖτ} dτ]`,
///
/// with every time integral in closed form.
pub fn duhamel(
    u0: &FourierField,
    sym: &DispersionSymbol,
    shape: &ControlShape,
    h: &ControlSignal,
    t_grid: &[f64],
    exec: Exec,
) -> Result<Vec<FourierField>> {
    let n = u0.truncation();
    if shape.truncation() != n || h.truncation() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if shape.truncation() != n {
                shape.truncation()
            } else {
                h.truncation()
            },
        });
    }
    let horizon = h.horizon();
    if let Some(&bad) = t_grid.iter().find(|&&t| !(t >= 0.0 && t <= horizon * (1.0 + 1e-12))) {
        return Err(Error::invalid(
            "t_grid",
            format!("time {bad} lies outside [0, {horizon}]"),
        ));
    }
    let lambdas = sym.eigenvalues(n)?;
    let family = h.family();
    let active: Vec<i64> = wavenumbers(n)
        .filter(|&j| h.coeff(j) != Complex64::new(0.0, 0.0))
        .collect();
    let frames = exec.map_slice(t_grid, |&t| {
        let mut dual_cache: Vec<Option<Vec<Complex64>>> = vec![None; family.len()];
        let coeffs: Vec<Complex64> = wavenumbers(n)
            .map(|k| {
                let lk = lambdas[slot(n, k)];
                let mut forced = Complex64::new(0.0, 0.0);
                for &j in &active {
                    let r = h.dual_index(j);
                    let duals = dual_cache[r]
                        .get_or_insert_with(|| lambdas.iter().map(|&l| family.dual_integral(r, l, t)).collect());
                    forced += shape.moment_entry(j, k) * h.coeff(j) * duals[slot(n, k)];
                }
                Complex64::from_polar(1.0, lk * t) * (u0.coeff(k) + forced / SQRT_TWO_PI)
            })
            .collect();
        FourierField::from_coeffs(n, coeffs)
    });
    frames.into_iter().collect()
}

/// `(1+|k|)^s` for `k = −N..=N`.
pub fn weights(n: usize, s: f64) -> Vec<f64> {
    wavenumbers(n).map(|k| sobolev_weight(k, s)).collect()
}

/// `wₖ = √(2π)(1+|k|)^s û(k)`.
pub fn to_weighted(u: &FourierField, s: f64) -> DVector<Complex64> {
    let n = u.truncation();
    DVector::from_iterator(
        mode_count(n),
        wavenumbers(n).map(|k| u.coeff(k) * SQRT_TWO_PI * sobolev_weight(k, s)),
    )
}

pub fn from_weighted(w: &DVector<Complex64>, n: usize, s: f64) -> FourierField {
    FourierField::from_fn(n, |k| w[slot(n, k)] / (SQRT_TWO_PI * sobolev_weight(k, s)))
}

/// `B = W·Ĝ·W⁻¹`, the matrix of `G` in weighted coordinates.
pub fn weighted_control(shape: &ControlShape, s: f64) -> DMatrix<Complex64> {
    let n = shape.truncation();
    let w = weights(n, s);
    DMatrix::from_fn(mode_count(n), mode_count(n), |row, col| {
        shape.moment()[(col, row)] * (w[row] / w[col])
    })
}

/// `W⁻¹·Ĝ·W`, the matrix of `G` in dual weighted coordinates `(1+|k|)^{−s}`.
pub fn dual_control(shape: &ControlShape, s: f64) -> DMatrix<Complex64> {
    weighted_control(shape, -s)
}

fn nonzero_slots(n: usize) -> Vec<usize> {
    (0..mode_count(n)).filter(|&i| wavenumber(n, i) != 0).collect()
}

fn restrict(m: &DMatrix<Complex64>, idx: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

/// `Eⱼₖ = Σᵢ wᵢ e^{−2ρτᵢ} e^{i(λₖ−λⱼ)τᵢ}` over a Gauss-Legendre rule on `[0, T]`,
/// accumulated as `P·D·Pᴴ` with `Pⱼᵢ = e^{−iλⱼτᵢ}` in parallel node chunks.
fn phase_kernel(lambdas: &[f64], decay: f64, rule: &GaussRule, exec: Exec) -> DMatrix<Complex64> {
    let d = lambdas.len();
    let chunks = rule.len().div_ceil(NODE_CHUNK);
    exec.sum_range(chunks, DMatrix::zeros(d, d), |c| {
        let lo = c * NODE_CHUNK;
        let hi = (lo + NODE_CHUNK).min(rule.len());
        let p = DMatrix::from_fn(d, hi - lo, |j, i| {
            Complex64::from_polar(1.0, -lambdas[j] * rule.nodes[lo + i])
        });
        let pd = DMatrix::from_fn(d, hi - lo, |j, i| {
            let tau = rule.nodes[lo + i];
            p[(j, i)] * (rule.weights[lo + i] * (-2.0 * decay * tau).exp())
        });
        pd * p.adjoint()
    })
}

fn nonzero_lambdas(sym: &DispersionSymbol, n: usize) -> Result<Vec<f64>> {
    let all = sym.eigenvalues(n)?;
    Ok(nonzero_slots(n).into_iter().map(|i| all[i]).collect())
}

/// `L_{T,ρ} = ∫₀ᵀ e^{−2ρτ} U(−τ) B Bᴴ U(−τ)ᴴ dτ` on the nonzero modes,
/// assembled by Gauss-Legendre quadrature with `max(64, 8λ_max T/π)` nodes.
pub fn weighted_gramian(
    sym: &DispersionSymbol,
    shape: &ControlShape,
    s: f64,
    decay: f64,
    horizon: f64,
    exec: Exec,
) -> Result<DMatrix<Complex64>> {
    let n = shape.truncation();
    let lambdas = nonzero_lambdas(sym, n)?;
    let b = weighted_control(shape, s);
    let bbh = restrict(&(&b * b.adjoint()), &nonzero_slots(n));
    let max = lambdas.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let kernel = phase_kernel(&lambdas, decay, &GaussRule::oscillatory(max, horizon), exec);
    Ok(bbh.component_mul(&kernel))
}

/// Observability Gramian `∫₀ᵀ U(τ) Cᴴ C U(τ)ᴴ dτ` with `C = W⁻¹ĜW`, on the nonzero modes.
pub fn observability_gramian(
    sym: &DispersionSymbol,
    shape: &ControlShape,
    s: f64,
    horizon: f64,
    exec: Exec,
) -> Result<DMatrix<Complex64>> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::invalid("T", format!("horizon must be positive, got {horizon}")));
    }
    let n = shape.truncation();
    let lambdas = nonzero_lambdas(sym, n)?;
    let c = dual_control(shape, s);
    let chc = restrict(&(c.adjoint() * &c), &nonzero_slots(n));
    let max = lambdas.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let kernel = phase_kernel(&lambdas, 0.0, &GaussRule::oscillatory(max, horizon), exec);
    Ok(chc.component_mul(&kernel.conjugate()))
}

/// `δ²`, the smallest eigenvalue of the observability Gramian. Zero or
/// negative values mean the truncated system is not observable.
pub fn observability_constant(
    sym: &DispersionSymbol,
    shape: &ControlShape,
    s: f64,
    horizon: f64,
    exec: Exec,
) -> Result<f64> {
    let o = observability_gramian(sym, shape, s, horizon, exec)?;
    Ok(min_eigenvalue(&o))
}

pub(crate) fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn max_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeedbackKind {
    /// `K = −GG*`.
    GgStar,
    /// `K = −GG* L⁻¹_{T,λ}`, decay rate at least `λ`.
    GramianInverse { lambda: f64, horizon: f64 },
}

/// A feedback operator on the full weighted state; the zero mode is left untouched.
#[derive(Debug, Clone)]
pub struct FeedbackLaw {
    pub kind: Option<FeedbackKind>,
    pub n: usize,
    pub sobolev_index: f64,
    /// `K` in weighted coordinates, `(2N+1) × (2N+1)`.
    pub matrix: DMatrix<Complex64>,
    pub lambda_target: Option<f64>,
    /// Smallest eigenvalue of `L_{T,λ}` when applicable.
    pub gramian_min_eig: Option<f64>,
}

impl FeedbackLaw {
    /// `K = 0`: the open-loop unitary dynamics.
    pub fn zero(n: usize, s: f64) -> Self {
        FeedbackLaw {
            kind: None,
            n,
            sobolev_index: s,
            matrix: DMatrix::zeros(mode_count(n), mode_count(n)),
            lambda_target: None,
            gramian_min_eig: None,
        }
    }
}

/// Builds `K = −GG*` or `K = −GG*L⁻¹_{T,λ}` in weighted coordinates.
pub fn build_feedback(
    kind: FeedbackKind,
    sym: &DispersionSymbol,
    shape: &ControlShape,
    s: f64,
    exec: Exec,
) -> Result<FeedbackLaw> {
    let n = shape.truncation();
    let b = weighted_control(shape, s);
    let bbh = &b * b.adjoint();
    match kind {
        FeedbackKind::GgStar => Ok(FeedbackLaw {
            kind: Some(kind),
            n,
            sobolev_index: s,
            matrix: -bbh,
            lambda_target: None,
            gramian_min_eig: None,
        }),
        FeedbackKind::GramianInverse { lambda, horizon } => {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::invalid(
                    "lambda",
                    format!("decay rate must be positive, got {lambda}"),
                ));
            }
            if !(horizon > 0.0 && horizon.is_finite()) {
                return Err(Error::invalid("T", format!("horizon must be positive, got {horizon}")));
            }
            if n >= 4 {
                let analysis = cluster_spectrum(sym, n, DEFAULT_TOLERANCE)?;
                if analysis.criterion != Criterion::Inapplicable {
                    let required = controllability_time(&analysis)?;
                    if horizon <= required {
                        return Err(Error::HorizonTooShort { horizon, required });
                    }
                }
            }
            let l = weighted_gramian(sym, shape, s, lambda, horizon, exec)?;
            let eig = l.clone().symmetric_eigen();
            let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            let floor = OBSERVABILITY_FLOOR * horizon * max_eigenvalue(&bbh);
            if !(min > floor) {
                return Err(Error::Unobservable { min_eig: min, floor });
            }
            let idx = nonzero_slots(n);
            let v = &eig.eigenvectors;
            let l_inv = DMatrix::from_fn(idx.len(), idx.len(), |i, j| v[(i, j)] / eig.eigenvalues[j]) * v.adjoint();
            // K₁ = −B*L⁻¹ maps nonzero modes to controls; K = B K₁. B* is the
            // adjoint of B restricted to nonzero-mode rows.
            let b_star = DMatrix::from_fn(mode_count(n), idx.len(), |row, j| b[(idx[j], row)].conj());
            let k1 = -b_star * l_inv;
            let mut full = DMatrix::zeros(mode_count(n), mode_count(n));
            for (j, &col) in idx.iter().enumerate() {
                for row in 0..mode_count(n) {
                    full[(row, col)] = k1[(row, j)];
                }
            }
            Ok(FeedbackLaw {
                kind: Some(kind),
                n,
                sobolev_index: s,
                matrix: &b * full,
                lambda_target: Some(lambda),
                gramian_min_eig: Some(min),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub times: Vec<f64>,
    /// `‖u(t) − û₀(0)‖_{H^s}`.
    pub norms: Vec<f64>,
    /// `û(0, t)`.
    pub means: Vec<Complex64>,
    /// Least-squares slope of `ln‖u(t) − û₀(0)‖` over `[t_max/4, t_max]`.
    pub fitted_rate: f64,
    /// Root-mean-square residual of that fit.
    pub fit_residual: f64,
    pub mean_drift: f64,
}

impl TrajectoryReport {
    /// `−fitted_rate`.
    pub fn decay_rate(&self) -> f64 {
        -self.fitted_rate
    }
}

/// Integrates `ẇ = (iΛ + K)w` exactly by the matrix exponential of the
/// system matrix over steps of `dt_out`.
pub fn closed_loop(
    u0: &FourierField,
    sym: &DispersionSymbol,
    law: &FeedbackLaw,
    t_max: f64,
    dt_out: f64,
) -> Result<TrajectoryReport> {
    let n = u0.truncation();
    if law.n != n {
        return Err(Error::DimensionMismatch {
            expected: law.n,
            found: n,
        });
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::invalid("t_max", format!("must be positive, got {t_max}")));
    }
    if !(dt_out > 0.0 && dt_out <= t_max) {
        return Err(Error::invalid(
            "dt_out",
            format!("must lie in (0, t_max], got {dt_out}"),
        ));
    }
    let lambdas = sym.eigenvalues(n)?;
    let mut system = law.matrix.clone();
    for (i, &l) in lambdas.iter().enumerate() {
        system[(i, i)] += Complex64::new(0.0, l);
    }
    let step = (system * Complex64::new(dt_out, 0.0)).exp();
    let steps = ((t_max / dt_out).round() as usize).max(1);
    let zero = slot(n, 0);
    let s = law.sobolev_index;

    let mut w = to_weighted(u0, s);
    let mean0 = u0.mean();
    let mut times = Vec::with_capacity(steps + 1);
    let mut norms = Vec::with_capacity(steps + 1);
    let mut means = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        if i > 0 {
            w = &step * &w;
        }
        let t = i as f64 * dt_out;
        let norm = w
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != zero)
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if !norm.is_finite() {
            return Err(Error::NonFinite(t));
        }
        times.push(t);
        norms.push(norm);
        means.push(w[zero] / SQRT_TWO_PI);
    }
    let mean_drift = means.iter().map(|m| (m - mean0).norm()).fold(0.0, f64::max);
    let (fitted_rate, fit_residual) = fit_log_slope(&times, &norms, t_max / 4.0);
    Ok(TrajectoryReport {
        times,
        norms,
        means,
        fitted_rate,
        fit_residual,
        mean_drift,
    })
}

/// Least-squares line through `(t, ln y)` for `t ≥ t_start` and `y > 0`.
fn fit_log_slope(times: &[f64], values: &[f64], t_start: f64) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|&(&t, &y)| t >= t_start && y > 0.0)
        .map(|(&t, &y)| (t, y.ln()))
        .collect();
    if pts.len() < 2 {
        return (0.0, 0.0);
    }
    let m = pts.len() as f64;
    let (mt, my) = pts.iter().fold((0.0, 0.0), |(a, b), &(t, y)| (a + t / m, b + y / m));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(xy, xx), &(t, y)| {
        (xy + (t - mt) * (y - my), xx + (t - mt) * (t - mt))
    });
    let slope = sxy / sxx;
    let rms = (pts
        .iter()
        .map(|&(t, y)| (y - my - slope * (t - mt)).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    (slope, rms)
}

/// Exact oscillatory closed form of [`weighted_gramian`], for cross-checks.
pub fn weighted_gramian_closed_form(
    sym: &DispersionSymbol,
    shape: &ControlShape,
    s: f64,
    decay: f64,
    horizon: f64,
) -> Result<DMatrix<Complex64>> {
    let n = shape.truncation();
    let lambdas = nonzero_lambdas(sym, n)?;
    let b = weighted_control(shape, s);
    let bbh = restrict(&(&b * b.adjoint()), &nonzero_slots(n));
    Ok(DMatrix::from_fn(lambdas.len(), lambdas.len(), |j, k| {
        bbh[(j, k)] * crate::quadrature::damped_phase_integral(lambdas[k] - lambdas[j], 2.0 * decay, horizon)
    }))
}

/// Node count used for Gramian assembly at truncation `n`.
pub fn gramian_nodes(sym: &DispersionSymbol, n: usize, horizon: f64) -> Result<usize> {
    let max = sym.eigenvalues(n)?.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    Ok(oscillatory_node_count(max, horizon))
}

/// Sample grid `0, T/(m−1), …, T`.
pub fn uniform_grid(horizon: f64, samples: usize) -> Vec<f64> {
    let m = samples.max(2);
    (0..m).map(|i| horizon * i as f64 / (m - 1) as f64).collect()
}
