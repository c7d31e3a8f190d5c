//! Dispersion symbols `a(k)` and eigenvalues `λₖ = k·a(k)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Symmetry of `a` under `k ↦ −k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// `a(−k) = a(k)`, so `λ₋ₖ = −λₖ`.
    Even,
    /// `a(−k) = −a(k)`, so `λ₋ₖ = λₖ`.
    Odd,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `a(k) = k²`.
    Kdv,
    /// `a(k) = −k`.
    Schrodinger,
    /// `a(k) = |k|`.
    BenjaminOno,
    /// `a(k) = −k² + α|k|`.
    Benjamin { alpha: f64 },
    /// `a(k) = 2π(√(k²+1) − 1)`.
    Smith,
    /// `a(k) = −|k|^α`.
    Dgbo { alpha: f64 },
    /// `a(k) = −k + μk³`.
    FourthOrderNls { mu: f64 },
    /// `a(k) = Σᵢ (−1)^i α₂ᵢ k^{2i−1}` with coefficients `[α₂, α₄, …, α₂ₘ]`.
    HigherOrderEven { alphas: Vec<f64> },
    /// `a(k) = Σᵢ (−1)^i (α₂ᵢ k^{2i−1} + α₂ᵢ₊₁ k^{2i})` with coefficients
    /// `[α₂, α₃, …, α₂ₘ₊₁]`.
    HigherOrderOdd { alphas: Vec<f64> },
    /// Tabulated `a(k)` for `k = −K..=K`.
    CustomTable { values: Vec<f64> },
}

/// A dispersion symbol with its growth order `r` (`|a(k)| ≲ |k|^{r−1}`) and parity.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSymbol {
    family: Family,
    order: f64,
    parity: Parity,
}

impl DispersionSymbol {
    pub fn kdv() -> Self {
        Self::builtin(Family::Kdv, 3.0, Parity::Even)
    }

    pub fn schrodinger() -> Self {
        Self::builtin(Family::Schrodinger, 2.0, Parity::Odd)
    }

    pub fn benjamin_ono() -> Self {
        Self::builtin(Family::BenjaminOno, 2.0, Parity::Even)
    }

    pub fn benjamin(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("Benjamin needs α > 0, got {alpha}")));
        }
        Ok(Self::builtin(Family::Benjamin { alpha }, 3.0, Parity::Even))
    }

    pub fn smith() -> Self {
        Self::builtin(Family::Smith, 2.0, Parity::Even)
    }

    pub fn dgbo(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("DGBO needs α > 0, got {alpha}")));
        }
        Ok(Self::builtin(Family::Dgbo { alpha }, alpha + 1.0, Parity::Even))
    }

    pub fn fourth_order_nls(mu: f64) -> Result<Self> {
        if mu == 0.0 || !mu.is_finite() {
            return Err(Error::invalid("mu", format!("need a finite μ ≠ 0, got {mu}")));
        }
        Ok(Self::builtin(Family::FourthOrderNls { mu }, 4.0, Parity::Odd))
    }

    pub fn higher_order_even(alphas: Vec<f64>) -> Result<Self> {
        check_alphas(&alphas, 1)?;
        let order = 2.0 * alphas.len() as f64;
        Ok(Self::builtin(Family::HigherOrderEven { alphas }, order, Parity::Odd))
    }

    pub fn higher_order_odd(alphas: Vec<f64>) -> Result<Self> {
        check_alphas(&alphas, 2)?;
        let order = alphas.len() as f64 + 1.0;
        Ok(Self::builtin(Family::HigherOrderOdd { alphas }, order, Parity::None))
    }

    /// Tabulated symbol; `values[i]` is `a(i − K)` with `K = (len − 1)/2`.
    /// Order and parity are taken as declared.
    pub fn custom_table(values: Vec<f64>, order: f64, parity: Parity) -> Result<Self> {
        if values.len().is_multiple_of(2) {
            return Err(Error::invalid(
                "table",
                "needs an odd number of entries covering k = −K..=K",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("table", "entries must be finite"));
        }
        if !(order >= 1.0) {
            return Err(Error::invalid("order", format!("must be at least 1, got {order}")));
        }
        Ok(DispersionSymbol {
            family: Family::CustomTable { values },
            order,
            parity,
        })
    }

    /// Tabulates `a(k) = λₖ/k` from eigenvalues `λₖ`, `k = −K..=K` (`a(0) = 0`).
    pub fn from_eigenvalues(lambdas: &[f64], order: f64, parity: Parity) -> Result<Self> {
        let half = (lambdas.len() as i64 - 1) / 2;
        let values = lambdas
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let k = i as i64 - half;
                if k == 0 { 0.0 } else { l / k as f64 }
            })
            .collect();
        Self::custom_table(values, order, parity)
    }

    fn builtin(family: Family, order: f64, parity: Parity) -> Self {
        DispersionSymbol { family, order, parity }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::Kdv => "kdv",
            Family::Schrodinger => "schrodinger",
            Family::BenjaminOno => "benjamin_ono",
            Family::Benjamin { .. } => "benjamin",
            Family::Smith => "smith",
            Family::Dgbo { .. } => "dgbo",
            Family::FourthOrderNls { .. } => "fourth_order_nls",
            Family::HigherOrderEven { .. } => "higher_order_even",
            Family::HigherOrderOdd { .. } => "higher_order_odd",
            Family::CustomTable { .. } => "custom_table",
        }
    }

    /// `a(k)`.
    pub fn eval(&self, k: i64) -> Result<f64> {
        let x = k as f64;
        let ax = x.abs();
        Ok(match &self.family {
            Family::Kdv => x * x,
            Family::Schrodinger => -x,
            Family::BenjaminOno => ax,
            Family::Benjamin { alpha } => -x * x + alpha * ax,
            Family::Smith => 2.0 * PI * ((x * x + 1.0).sqrt() - 1.0),
            Family::Dgbo { alpha } => -ax.powf(*alpha),
            Family::FourthOrderNls { mu } => -x + mu * x * x * x,
            Family::HigherOrderEven { alphas } => alphas
                .iter()
                .enumerate()
                .map(|(idx, a)| {
                    let i = idx as i32 + 1;
                    sign(i) * a * x.powi(2 * i - 1)
                })
                .sum(),
            Family::HigherOrderOdd { alphas } => alphas
                .iter()
                .enumerate()
                .map(|(idx, a)| {
                    // alphas[idx] is α_{idx+2}; α_{2i} ↦ k^{2i−1}, α_{2i+1} ↦ k^{2i}
                    let j = idx as i32 + 2;
                    let i = j / 2;
                    sign(i) * a * x.powi(j - 1)
                })
                .sum(),
            Family::CustomTable { values } => {
                let half = (values.len() as i64 - 1) / 2;
                if k.abs() > half {
                    return Err(Error::TableOutOfRange { k, max: half });
                }
                values[(k + half) as usize]
            }
        })
    }

    /// `λₖ = k·a(k)`.
    pub fn eigenvalue(&self, k: i64) -> Result<f64> {
        if k == 0 {
            return Ok(0.0);
        }
        Ok(k as f64 * self.eval(k)?)
    }

    /// `λₖ` for `k = −N..=N`.
    pub fn eigenvalues(&self, n: usize) -> Result<Vec<f64>> {
        crate::wavenumbers(n).map(|k| self.eigenvalue(k)).collect()
    }

    /// Largest stored wavenumber for tables, `None` for closed-form families.
    pub fn table_range(&self) -> Option<i64> {
        match &self.family {
            Family::CustomTable { values } => Some((values.len() as i64 - 1) / 2),
            _ => None,
        }
    }

    /// `max |a(k)|/|k|^{r−1}` over `1 ≤ |k| ≤ k_max`.
    pub fn growth_constant(&self, k_max: i64) -> Result<f64> {
        let mut c: f64 = 0.0;
        for k in (1..=k_max).flat_map(|k| [k, -k]) {
            let bound = (k.abs() as f64).powf(self.order - 1.0);
            c = c.max(self.eval(k)?.abs() / bound);
        }
        Ok(c)
    }

    pub fn to_spec(&self) -> SymbolSpec {
        let mut params = SymbolParams::default();
        match &self.family {
            Family::Benjamin { alpha } | Family::Dgbo { alpha } => params.alpha = Some(*alpha),
            Family::FourthOrderNls { mu } => params.mu = Some(*mu),
            Family::HigherOrderEven { alphas } | Family::HigherOrderOdd { alphas } => {
                params.alpha_list = Some(alphas.clone())
            }
            Family::CustomTable { values } => params.table = Some(values.clone()),
            _ => {}
        }
        let custom = matches!(self.family, Family::CustomTable { .. });
        SymbolSpec {
            family: self.name().to_string(),
            params,
            order: custom.then_some(self.order),
            parity: custom.then_some(self.parity),
        }
    }
}

fn sign(i: i32) -> f64 {
    if i % 2 == 0 { 1.0 } else { -1.0 }
}

fn check_alphas(alphas: &[f64], multiple: usize) -> Result<()> {
    if alphas.is_empty() || !alphas.len().is_multiple_of(multiple) {
        return Err(Error::invalid(
            "alpha_list",
            format!("expected a non-empty list whose length is a multiple of {multiple}"),
        ));
    }
    if alphas.iter().any(|a| !a.is_finite()) {
        return Err(Error::invalid("alpha_list", "entries must be finite"));
    }
    if alphas[0] == 0.0 || *alphas.last().unwrap() == 0.0 {
        return Err(Error::invalid(
            "alpha_list",
            "leading and trailing coefficients must be non-zero",
        ));
    }
    Ok(())
}

/// `|λₖ₊₁ − λₖ|` for `k = 1..k_max−1`.
pub fn asymptotic_gap_divergence(sym: &DispersionSymbol, k_max: i64) -> Result<Vec<f64>> {
    if k_max < 2 {
        return Err(Error::invalid("k_max", "must be at least 2"));
    }
    (1..k_max)
        .map(|k| Ok((sym.eigenvalue(k + 1)? - sym.eigenvalue(k)?).abs()))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
}

/// Declarative symbol description used in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub family: String,
    #[serde(default)]
    pub params: SymbolParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<Parity>,
}

impl SymbolSpec {
    pub fn build(&self) -> Result<DispersionSymbol> {
        let need = |v: Option<f64>, name: &'static str| {
            v.ok_or_else(|| Error::invalid(name, format!("family `{}` needs params.{name}", self.family)))
        };
        let sym = match self.family.as_str() {
            "kdv" => DispersionSymbol::kdv(),
            "schrodinger" => DispersionSymbol::schrodinger(),
            "benjamin_ono" => DispersionSymbol::benjamin_ono(),
            "benjamin" => DispersionSymbol::benjamin(need(self.params.alpha, "alpha")?)?,
            "smith" => DispersionSymbol::smith(),
            "dgbo" => DispersionSymbol::dgbo(need(self.params.alpha, "alpha")?)?,
            "fourth_order_nls" => DispersionSymbol::fourth_order_nls(need(self.params.mu, "mu")?)?,
            "higher_order_even" | "higher_order_odd" => {
                let list = self.params.alpha_list.clone().ok_or_else(|| {
                    Error::invalid(
                        "alpha_list",
                        format!("family `{}` needs params.alpha_list", self.family),
                    )
                })?;
                if self.family == "higher_order_even" {
                    DispersionSymbol::higher_order_even(list)?
                } else {
                    DispersionSymbol::higher_order_odd(list)?
                }
            }
            "custom_table" => {
                let table = self
                    .params
                    .table
                    .clone()
                    .ok_or_else(|| Error::invalid("table", "family `custom_table` needs params.table"))?;
                let order = self
                    .order
                    .ok_or_else(|| Error::invalid("order", "custom tables must declare an order"))?;
                let parity = self
                    .parity
                    .ok_or_else(|| Error::invalid("parity", "custom tables must declare a parity"))?;
                return DispersionSymbol::custom_table(table, order, parity);
            }
            other => {
                return Err(Error::invalid(
                    "family",
                    format!(
                        "unknown family `{other}`; expected one of kdv, schrodinger, benjamin_ono, benjamin, smith, dgbo, fourth_order_nls, higher_order_even, higher_order_odd, custom_table"
                    ),
                ));
            }
        };
        Ok(sym)
    }
}
