//! Gram matrices of `{e^{−iλₙt}}` on `[0, T]` and their biorthogonal duals.
//!
//! With `Gₖₙ = ∫₀ᵀ e^{i(λₙ−λₖ)t} dt` and `P = G⁻¹`, the dual functions
//! `qⱼ(t) = Σₙ conj(Pₙⱼ) e^{−iλₙt}` satisfy `∫₀ᵀ e^{−iλₖt} conj(qⱼ(t)) dt = δₖⱼ`.
//! They lie in the span of the family, so they are the minimal-norm duals.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::quadrature::{GaussRule, phase_integral};
use crate::{Error, Exec, Result};

/// Smallest admissible frame bound, relative to `T`.
pub const MIN_FRAME_BOUND: f64 = 1e-10;
/// Largest admissible condition number `B/A`.
pub const MAX_CONDITION: f64 = 1e12;

/// `Gₖₙ = ∫₀ᵀ e^{i(λₙ−λₖ)t} dt`.
pub fn gram_matrix(rep_lambdas: &[f64], horizon: f64) -> Result<DMatrix<Complex64>> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::invalid("T", format!("horizon must be positive, got {horizon}")));
    }
    check_distinct(rep_lambdas)?;
    let n = rep_lambdas.len();
    Ok(DMatrix::from_fn(n, n, |k, m| {
        if k == m {
            Complex64::new(horizon, 0.0)
        } else {
            phase_integral(rep_lambdas[m] - rep_lambdas[k], horizon)
        }
    }))
}

fn check_distinct(lambdas: &[f64]) -> Result<()> {
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    for w in sorted.windows(2) {
        if (w[1] - w[0]).abs() <= 1e-12 * (1.0 + w[0].abs()) {
            return Err(Error::DuplicateFrequency(w[0]));
        }
    }
    Ok(())
}

/// Extreme eigenvalues `(A, B)` of a hermitian Gram matrix.
pub fn frame_bounds(gram: &DMatrix<Complex64>) -> (f64, f64) {
    let eig = gram.clone().symmetric_eigenvalues();
    let a = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let b = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (a, b)
}

#[derive(Debug, Clone)]
pub struct BiorthogonalFamily {
    horizon: f64,
    rep_lambdas: Vec<f64>,
    gram: DMatrix<Complex64>,
    /// `G⁻¹`; the coefficient matrix of the duals is its conjugate.
    inverse: DMatrix<Complex64>,
    frame: (f64, f64),
}

impl BiorthogonalFamily {
    pub fn new(rep_lambdas: &[f64], horizon: f64) -> Result<Self> {
        let gram = gram_matrix(rep_lambdas, horizon)?;
        biorthogonalize(rep_lambdas, gram, horizon)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn rep_lambdas(&self) -> &[f64] {
        &self.rep_lambdas
    }

    pub fn len(&self) -> usize {
        self.rep_lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rep_lambdas.is_empty()
    }

    pub fn gram(&self) -> &DMatrix<Complex64> {
        &self.gram
    }

    /// `G⁻¹`.
    pub fn gram_inverse(&self) -> &DMatrix<Complex64> {
        &self.inverse
    }

    /// `Q` with `qⱼ(t) = Σₙ Qₙⱼ e^{−iλₙt}`.
    pub fn coeffs(&self) -> DMatrix<Complex64> {
        self.inverse.conjugate()
    }

    pub fn frame_bounds(&self) -> (f64, f64) {
        self.frame
    }

    pub fn condition(&self) -> f64 {
        self.frame.1 / self.frame.0
    }

    /// `qⱼ(t)`.
    pub fn eval(&self, j: usize, t: f64) -> Complex64 {
        self.rep_lambdas
            .iter()
            .enumerate()
            .map(|(n, &l)| self.inverse[(n, j)].conj() * Complex64::from_polar(1.0, -l * t))
            .sum()
    }

    /// `∫₀ᵀ |qⱼ|² dt = (G⁻¹)ⱼⱼ`.
    pub fn norm_sq(&self, j: usize) -> f64 {
        self.inverse[(j, j)].re
    }

    /// `∫₀ᵗ conj(qⱼ(τ)) e^{−iλτ} dτ` in closed form.
    pub fn dual_integral(&self, j: usize, lambda: f64, t: f64) -> Complex64 {
        self.rep_lambdas
            .iter()
            .enumerate()
            .map(|(n, &l)| self.inverse[(n, j)] * phase_integral(l - lambda, t))
            .sum()
    }

    /// Gauss-Legendre rule resolving every product of family members on `[0, T]`.
    pub fn rule(&self) -> GaussRule {
        let max = self.rep_lambdas.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        GaussRule::oscillatory(max, self.horizon)
    }

    /// `conj(qⱼ(tᵢ))` on the nodes of `rule`, one column per dual.
    pub fn sample_conj_duals(&self, rule: &GaussRule, exec: Exec) -> DMatrix<Complex64> {
        // conj(qⱼ(t)) = Σₙ Pₙⱼ e^{iλₙt}
        let phases = phase_matrix(&rule.nodes, &self.rep_lambdas, 1.0, None, exec);
        phases * &self.inverse
    }

    /// `max_{k,j} |∫₀ᵀ e^{−iλₖt} conj(qⱼ(t)) dt − δₖⱼ|` by Gauss-Legendre quadrature.
    pub fn residual(&self, exec: Exec) -> f64 {
        let rule = self.rule();
        let duals = self.sample_conj_duals(&rule, exec);
        let weighted = phase_matrix(&rule.nodes, &self.rep_lambdas, -1.0, Some(&rule.weights), exec);
        let moments = weighted.transpose() * duals;
        let mut worst: f64 = 0.0;
        for k in 0..self.len() {
            for j in 0..self.len() {
                let delta = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((moments[(k, j)] - delta).norm());
            }
        }
        worst
    }
}

/// `wᵢ e^{i·sign·λₙtᵢ}` with rows `i` over `times` and columns `n` over `lambdas`
/// (`wᵢ = 1` when no weights are given).
pub fn phase_matrix(
    times: &[f64],
    lambdas: &[f64],
    sign: f64,
    weights: Option<&[f64]>,
    exec: Exec,
) -> DMatrix<Complex64> {
    let rows = exec.map_range(times.len(), |i| {
        let w = weights.map_or(1.0, |w| w[i]);
        lambdas
            .iter()
            .map(|&l| Complex64::from_polar(w, sign * l * times[i]))
            .collect::<Vec<_>>()
    });
    DMatrix::from_fn(times.len(), lambdas.len(), |i, n| rows[i][n])
}

/// Inverts a Gram matrix by hermitian eigendecomposition, refusing when the
/// smallest eigenvalue falls below `1e−10·T` or the condition number exceeds `1e12`.
pub fn biorthogonalize(rep_lambdas: &[f64], gram: DMatrix<Complex64>, horizon: f64) -> Result<BiorthogonalFamily> {
    let n = rep_lambdas.len();
    if gram.nrows() != n || gram.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: gram.nrows(),
        });
    }
    let eig = gram.clone().symmetric_eigen();
    let a = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let b = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(a > MIN_FRAME_BOUND * horizon) || b / a > MAX_CONDITION {
        return Err(Error::IllConditionedGram {
            min_eig: a,
            condition: b / a,
            min_horizon: 2.0 * PI / min_gap(rep_lambdas),
        });
    }
    let v = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(n, n, |i, j| v[(i, j)] / eig.eigenvalues[j]);
    let inverse = &scaled * v.adjoint();
    Ok(BiorthogonalFamily {
        horizon,
        rep_lambdas: rep_lambdas.to_vec(),
        gram,
        inverse,
        frame: (a, b),
    })
}

fn min_gap(lambdas: &[f64]) -> f64 {
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}
