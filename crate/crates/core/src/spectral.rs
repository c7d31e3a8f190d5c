//! Truncated Fourier fields, periodic Sobolev norms, the bump profile `g`
//! and the mean-free control operator `G(φ) = gφ − g⟨φ, g⟩`.
//!
//! Fields store `û(k)` for `k = −N..=N`; the orthonormal basis is
//! `ψₖ(x) = e^{ikx}/√(2π)`, so the `ψ`-coefficient of a field is `√(2π)·û(k)`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Exec, Result, mode_count, slot, wavenumbers};

const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_7;

/// A periodic field truncated to the modes `|k| ≤ N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl FourierField {
    pub fn zeros(n: usize) -> Self {
        FourierField {
            n,
            coeffs: vec![Complex64::new(0.0, 0.0); mode_count(n)],
        }
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != mode_count(n) {
            return Err(Error::invalid(
                "coeffs",
                format!("expected {} entries for N = {n}, got {}", mode_count(n), coeffs.len()),
            ));
        }
        Ok(FourierField { n, coeffs })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(i64) -> Complex64) -> Self {
        FourierField {
            n,
            coeffs: wavenumbers(n).map(&mut f).collect(),
        }
    }

    /// The basis function `ψₖ`.
    pub fn psi(n: usize, k: i64) -> Self {
        let mut field = Self::zeros(n);
        field.coeffs[slot(n, k)] = Complex64::new(1.0 / SQRT_TWO_PI, 0.0);
        field
    }

    pub fn constant(n: usize, value: Complex64) -> Self {
        let mut field = Self::zeros(n);
        field.coeffs[slot(n, 0)] = value;
        field
    }

    /// Builds a field from its `ψ`-expansion `Σ cₖ ψₖ`.
    pub fn from_psi_coeffs(n: usize, c: &[Complex64]) -> Result<Self> {
        Self::from_coeffs(n, c.iter().map(|&ck| ck / SQRT_TWO_PI).collect())
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// `û(k)`, zero outside the truncation.
    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.n {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[slot(self.n, k)]
        }
    }

    pub fn set(&mut self, k: i64, value: Complex64) {
        let s = slot(self.n, k);
        self.coeffs[s] = value;
    }

    /// `û(0)`.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[slot(self.n, 0)]
    }

    pub fn mean_free(&self) -> Self {
        let mut out = self.clone();
        out.set(0, Complex64::new(0.0, 0.0));
        out
    }

    /// `cₖ = √(2π)·û(k)`, the coefficients in the `ψ` basis.
    pub fn psi_coeffs(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c * SQRT_TWO_PI).collect()
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        sobolev_norm(self, s)
    }

    /// `(u, v)_{H^s} = 2π Σ (1+|k|)^{2s} û(k) conj(v̂(k))`.
    pub fn sobolev_inner(&self, other: &FourierField, s: f64) -> Result<Complex64> {
        self.check_same(other)?;
        let sum: Complex64 = wavenumbers(self.n)
            .zip(self.coeffs.iter().zip(&other.coeffs))
            .map(|(k, (a, b))| a * b.conj() * sobolev_weight(k, 2.0 * s))
            .sum();
        Ok(sum * (2.0 * PI))
    }

    /// Pointwise value `Σ û(k) e^{ikx}`.
    pub fn evaluate(&self, x: f64) -> Complex64 {
        wavenumbers(self.n)
            .zip(&self.coeffs)
            .map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * x))
            .sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        FourierField {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &FourierField) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_same(&self, other: &FourierField) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }
}

impl Add for &FourierField {
    type Output = FourierField;
    fn add(self, rhs: &FourierField) -> FourierField {
        assert_eq!(self.n, rhs.n, "truncation mismatch");
        FourierField {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &FourierField {
    type Output = FourierField;
    fn sub(self, rhs: &FourierField) -> FourierField {
        assert_eq!(self.n, rhs.n, "truncation mismatch");
        FourierField {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<f64> for &FourierField {
    type Output = FourierField;
    fn mul(self, rhs: f64) -> FourierField {
        self.scaled(Complex64::new(rhs, 0.0))
    }
}

/// `(1+|k|)^p`.
#[inline]
pub fn sobolev_weight(k: i64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        (1.0 + k.unsigned_abs() as f64).powf(p)
    }
}

/// `‖v‖_{H^s} = sqrt(2π Σ (1+|k|)^{2s} |v̂(k)|²)`.
pub fn sobolev_norm(v: &FourierField, s: f64) -> f64 {
    let sum: f64 = wavenumbers(v.n)
        .zip(&v.coeffs)
        .map(|(k, c)| c.norm_sqr() * sobolev_weight(k, 2.0 * s))
        .sum();
    (2.0 * PI * sum).sqrt()
}

/// Standard mollifier `exp(−1/(1−y²))` on `|y| < 1`.
fn mollifier(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - y * y)).exp()
    }
}

/// Signed distance from `center` to `x` on the circle, in `[−π, π)`.
fn circle_offset(x: f64, center: f64) -> f64 {
    (x - center + PI).rem_euclid(2.0 * PI) - PI
}

/// Serialized form of a [`ControlShape`]; the moment matrix is rebuilt on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeFile {
    pub center: f64,
    pub half_width: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub resolution: usize,
    /// `Re ĝ(k)` for `k = −2N..=2N`.
    pub ghat_re: Vec<f64>,
    pub ghat_im: Vec<f64>,
}

/// The bump profile `g` supported on `ω = (x₀ − δ, x₀ + δ)` together with its
/// Fourier data and the moment matrix `m_{j,k} = ∫ G(ψⱼ) conj(ψₖ) dx`.
#[derive(Debug, Clone)]
pub struct ControlShape {
    center: f64,
    half_width: f64,
    n: usize,
    resolution: usize,
    norm_const: f64,
    /// `ĝ(k)` for `k = −2N..=2N`.
    ghat: Vec<Complex64>,
    /// Fourier coefficients of `g²` for `k = −N..=N`.
    g2hat: Vec<Complex64>,
    /// Rows `j`, columns `k`, both `−N..=N`.
    moment: DMatrix<Complex64>,
    beta: f64,
    /// `d_k` for `k = 1..=N` (entry `k − 1`).
    pair_det: Vec<f64>,
}

/// Builds the bump and its moment matrix with the default execution strategy.
pub fn make_bump(center: f64, half_width: f64, n: usize, resolution: usize) -> Result<ControlShape> {
    ControlShape::build_with(center, half_width, n, resolution, Exec::default())
}

impl ControlShape {
    pub fn build_with(center: f64, half_width: f64, n: usize, resolution: usize, exec: Exec) -> Result<Self> {
        validate(center, half_width, n, resolution)?;
        let center = center.rem_euclid(2.0 * PI);
        let (norm_const, samples) = sample_profile(center, half_width, resolution)?;
        let ghat = transform(&samples, 2 * n, resolution, exec, |g| g);
        let g2hat = transform(&samples, n, resolution, exec, |g| g * g);
        Ok(Self::assemble(
            center, half_width, n, resolution, norm_const, ghat, g2hat,
        ))
    }

    /// Restores a shape from its file form. `ĝ` is taken from the file; the
    /// profile-derived data (normalization, `g²` coefficients) is resampled.
    pub fn from_file(file: &ShapeFile) -> Result<Self> {
        validate(file.center, file.half_width, file.n, file.resolution)?;
        let expected = 4 * file.n + 1;
        if file.ghat_re.len() != expected || file.ghat_im.len() != expected {
            return Err(Error::invalid(
                "ghat",
                format!("expected {expected} coefficients for N = {}", file.n),
            ));
        }
        let (norm_const, samples) = sample_profile(file.center, file.half_width, file.resolution)?;
        let ghat = file
            .ghat_re
            .iter()
            .zip(&file.ghat_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        let g2hat = transform(&samples, file.n, file.resolution, Exec::default(), |g| g * g);
        Ok(Self::assemble(
            file.center,
            file.half_width,
            file.n,
            file.resolution,
            norm_const,
            ghat,
            g2hat,
        ))
    }

    pub fn to_file(&self) -> ShapeFile {
        ShapeFile {
            center: self.center,
            half_width: self.half_width,
            n: self.n,
            resolution: self.resolution,
            ghat_re: self.ghat.iter().map(|c| c.re).collect(),
            ghat_im: self.ghat.iter().map(|c| c.im).collect(),
        }
    }

    fn assemble(
        center: f64,
        half_width: f64,
        n: usize,
        resolution: usize,
        norm_const: f64,
        ghat: Vec<Complex64>,
        g2hat: Vec<Complex64>,
    ) -> Self {
        let dim = mode_count(n);
        let gh = |k: i64| ghat[(k + 2 * n as i64) as usize];
        let moment = DMatrix::from_fn(dim, dim, |row, col| {
            let j = crate::wavenumber(n, row);
            let k = crate::wavenumber(n, col);
            gh(k - j) - gh(-j) * gh(k) * (2.0 * PI)
        });
        let beta = (1..=n as i64)
            .flat_map(|k| [k, -k])
            .map(|k| moment[(slot(n, k), slot(n, k))].re)
            .fold(f64::INFINITY, f64::min);
        let pair_det = (1..=n as i64)
            .map(|k| {
                let (p, m) = (slot(n, k), slot(n, -k));
                (moment[(p, p)] * moment[(m, m)] - moment[(p, m)] * moment[(m, p)]).re
            })
            .collect();
        ControlShape {
            center,
            half_width,
            n,
            resolution,
            norm_const,
            ghat,
            g2hat,
            moment,
            beta,
            pair_det,
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// `g(x)`.
    pub fn profile(&self, x: f64) -> f64 {
        self.norm_const * mollifier(circle_offset(x, self.center) / self.half_width)
    }

    /// `ĝ(k)` for `|k| ≤ 2N`.
    pub fn ghat(&self, k: i64) -> Complex64 {
        assert!(k.unsigned_abs() as usize <= 2 * self.n, "k outside 2N band");
        self.ghat[(k + 2 * self.n as i64) as usize]
    }

    /// `m_{j,k}` for `|j|, |k| ≤ N`.
    pub fn moment_entry(&self, j: i64, k: i64) -> Complex64 {
        self.moment[(slot(self.n, j), slot(self.n, k))]
    }

    /// The moment matrix, rows `j` and columns `k` over `−N..=N`.
    pub fn moment(&self) -> &DMatrix<Complex64> {
        &self.moment
    }

    /// Matrix of `G` acting on `û` coordinates: `Ĝφ(k) = Σⱼ m_{j,k} φ̂(j)`,
    /// i.e. the transpose of [`moment`](Self::moment).
    pub fn operator_matrix(&self) -> DMatrix<Complex64> {
        self.moment.transpose()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `d_k = m_{k,k}m_{−k,−k} − m_{k,−k}m_{−k,k}` for `1 ≤ k ≤ N`.
    pub fn pair_det(&self, k: i64) -> f64 {
        self.pair_det[(k.unsigned_abs() - 1) as usize]
    }

    pub fn pair_dets(&self) -> &[f64] {
        &self.pair_det
    }

    /// `δₖ = ‖G ψₖ‖²_{L²}`, evaluated from the Fourier data of `g` and `g²`
    /// (`G ψₖ = g·(ψₖ − √(2π)ĝ(−k))`).
    pub fn gpsi_norm_sq(&self, k: i64) -> f64 {
        let g2 = |q: i64| self.g2hat[slot(self.n, q)];
        let gk = self.ghat(k);
        g2(0).re * (1.0 + 4.0 * PI * PI * gk.norm_sqr()) - 4.0 * PI * (gk * g2(-k)).re
    }

    /// Applies `G` to a field.
    pub fn apply(&self, v: &FourierField) -> Result<FourierField> {
        if v.truncation() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: v.truncation(),
            });
        }
        let dim = mode_count(self.n);
        let coeffs = (0..dim)
            .map(|col| (0..dim).map(|row| self.moment[(row, col)] * v.coeffs()[row]).sum())
            .collect();
        FourierField::from_coeffs(self.n, coeffs)
    }

    /// `(β, δ)`: the smallest diagonal entry `m_{k,k}` and the smallest
    /// `‖Gψₖ‖²` over `k ≠ 0`.
    pub fn diag_lower_bound(&self) -> Result<(f64, f64)> {
        let delta = (1..=self.n as i64)
            .flat_map(|k| [k, -k])
            .map(|k| self.gpsi_norm_sq(k))
            .fold(f64::INFINITY, f64::min);
        if !(self.beta > 0.0) || !(delta > 0.0) {
            return Err(Error::DegenerateBump(format!(
                "non-positive lower bound (beta = {:.3e}, delta = {:.3e}); widen the bump or raise the resolution",
                self.beta, delta
            )));
        }
        Ok((self.beta, delta))
    }
}

/// Applies `G` to a field (free-function form of [`ControlShape::apply`]).
pub fn apply_g(shape: &ControlShape, v: &FourierField) -> Result<FourierField> {
    shape.apply(v)
}

fn validate(center: f64, half_width: f64, n: usize, resolution: usize) -> Result<()> {
    if !center.is_finite() {
        return Err(Error::invalid("center", "must be finite"));
    }
    if !(half_width > 0.0 && half_width < PI) {
        return Err(Error::invalid(
            "half_width",
            format!("must lie in (0, π), got {half_width}"),
        ));
    }
    if n == 0 {
        return Err(Error::invalid("N", "truncation must be positive"));
    }
    if resolution < 8 * n {
        return Err(Error::invalid(
            "resolution",
            format!("need at least 8N = {} samples, got {resolution}", 8 * n),
        ));
    }
    Ok(())
}

/// Samples `g` on the uniform grid `x_m = 2πm/M`; the normalization makes the
/// trapezoid rule give `∫g = 1` exactly.
fn sample_profile(center: f64, half_width: f64, resolution: usize) -> Result<(f64, Vec<(usize, f64)>)> {
    let raw: Vec<(usize, f64)> = (0..resolution)
        .filter_map(|m| {
            let x = 2.0 * PI * m as f64 / resolution as f64;
            let v = mollifier(circle_offset(x, center) / half_width);
            (v > 0.0).then_some((m, v))
        })
        .collect();
    let mass: f64 = raw.iter().map(|&(_, v)| v).sum::<f64>() * 2.0 * PI / resolution as f64;
    if raw.is_empty() || !(mass > 0.0) {
        return Err(Error::DegenerateBump(format!(
            "no grid point inside the support (half_width = {half_width}, M = {resolution})"
        )));
    }
    let c = 1.0 / mass;
    Ok((c, raw.into_iter().map(|(m, v)| (m, c * v)).collect()))
}

/// `(1/M) Σ_m f(g(x_m)) e^{−ik x_m}` for `|k| ≤ band`, angles reduced modulo `M`.
fn transform(
    samples: &[(usize, f64)],
    band: usize,
    resolution: usize,
    exec: Exec,
    f: impl Fn(f64) -> f64 + Sync + Send,
) -> Vec<Complex64> {
    let m_total = resolution as i64;
    let count = 2 * band + 1;
    let half: Vec<Complex64> = exec.map_range(band + 1, |kk| {
        let k = kk as i64;
        let sum: Complex64 = samples
            .iter()
            .map(|&(m, g)| {
                let phase = (k * m as i64).rem_euclid(m_total) as f64;
                Complex64::from_polar(f(g), -2.0 * PI * phase / resolution as f64)
            })
            .sum();
        sum / resolution as f64
    });
    // real profile: ĝ(−k) = conj(ĝ(k))
    (0..count)
        .map(|i| {
            let k = i as i64 - band as i64;
            if k >= 0 {
                half[k as usize]
            } else {
                half[(-k) as usize].conj()
            }
        })
        .collect()
}
