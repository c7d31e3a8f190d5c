//! Exact controls and stabilizing feedback for linear dispersive equations
//! `∂ₜu = ∂ₓ𝒜u + G h` on the torus, built on truncated Fourier spaces.
//!
//! The pipeline runs bottom-up:
//!
//! - [`symbols`]: dispersion symbols `a(k)` and eigenvalues `λₖ = k·a(k)`.
//! - [`eigen`]: multiplicity clusters, gap constants and the applicable criterion.
//! - [`spectral`]: Fourier fields, Sobolev norms, the bump profile and the control operator.
//! - [`biortho`]: Gram matrices of exponentials and their biorthogonal duals.
//! - [`moment`]: control synthesis by the moment method.
//! - [`dynamics`]: propagation, Duhamel trajectories, feedback laws, observability.
//! - [`scenario`]: declarative scenario files and field presets used by the CLI.
//!
//! Hot inner loops take an [`Exec`] so callers can pick the rayon path or the
//! sequential one; the `parallel` cargo feature gates rayon entirely.

// `!(x > 0.0)` is used on purpose so NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biortho;
pub mod dynamics;
pub mod eigen;
mod error;
pub mod moment;
mod par;
pub mod quadrature;
pub mod scenario;
pub mod spectral;
pub mod symbols;

pub use error::{Error, Result};
pub use par::Exec;

pub use num_complex::Complex64;

/// Number of modes `2N + 1` for truncation `N`.
#[inline]
pub fn mode_count(n: usize) -> usize {
    2 * n + 1
}

/// Storage slot of wavenumber `k` in a `-N..=N` array.
#[inline]
pub fn slot(n: usize, k: i64) -> usize {
    debug_assert!(k.unsigned_abs() as usize <= n);
    (k + n as i64) as usize
}

/// Wavenumber stored in `slot` of a `-N..=N` array.
#[inline]
pub fn wavenumber(n: usize, slot: usize) -> i64 {
    slot as i64 - n as i64
}

/// Iterator over `-N..=N`.
pub fn wavenumbers(n: usize) -> impl DoubleEndedIterator<Item = i64> + Clone {
    let n = n as i64;
    -n..=n
}
