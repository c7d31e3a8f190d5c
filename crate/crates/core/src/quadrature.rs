//! Gauss-Legendre rules on `[a, b]` and closed-form oscillatory integrals.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

/// Minimum node count for any oscillatory rule.
pub const MIN_NODES: usize = 64;

/// Node-count rule for integrands oscillating up to `max_abs_lambda` on `[0, horizon]`:
/// `max(64, 1.5·λ_max·T + 32)`. Phase differences reach `2λ_max`, and an
/// `n`-point rule integrates `e^{iωt}` on `[0, T]` to rounding once
/// `n ≳ ωT/2 + 20`, so this leaves a 50% margin.
pub fn oscillatory_node_count(max_abs_lambda: f64, horizon: f64) -> usize {
    let wanted = (1.5 * max_abs_lambda.abs() * horizon + 32.0).ceil();
    if wanted.is_finite() && wanted > MIN_NODES as f64 {
        wanted as usize
    } else {
        MIN_NODES
    }
}

/// A Gauss-Legendre rule mapped onto `[a, b]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(count: usize, a: f64, b: f64) -> Self {
        let count = NonZeroUsize::new(count.max(1)).expect("count >= 1");
        let rule = GaussLegendre::new(count);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let (nodes, weights) = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (mid + half * x, half * w))
            .unzip();
        GaussRule { nodes, weights }
    }

    /// Rule on `[0, horizon]` sized by [`oscillatory_node_count`].
    pub fn oscillatory(max_abs_lambda: f64, horizon: f64) -> Self {
        Self::new(oscillatory_node_count(max_abs_lambda, horizon), 0.0, horizon)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    pub fn integrate_complex<F: FnMut(f64) -> Complex64>(&self, mut f: F) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| f(t) * w).sum()
    }
}

/// `∫₀ᵗ e^{iωτ} dτ`, evaluated as `e^{iωt/2}·t·sinc(ωt/2)` so it stays
/// accurate as `ω → 0`.
pub fn phase_integral(omega: f64, t: f64) -> Complex64 {
    let half = 0.5 * omega * t;
    Complex64::from_polar(1.0, half) * (t * sinc(half))
}

/// `∫₀ᵗ e^{(iω − ρ)τ} dτ` for a decay rate `ρ ≥ 0`.
pub fn damped_phase_integral(omega: f64, decay: f64, t: f64) -> Complex64 {
    let z = Complex64::new(-decay, omega);
    let zt = z * t;
    if zt.norm() < 1e-4 {
        // exp(zt) - 1 over z, series to fourth order
        let mut term = Complex64::new(t, 0.0);
        let mut sum = term;
        for n in 2..=6 {
            term *= zt / n as f64;
            sum += term;
        }
        sum
    } else {
        (zt.exp() - 1.0) / z
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}
