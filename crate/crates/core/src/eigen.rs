//! Multiplicity clusters of `{λₖ}`, gap constants and criterion classification.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::symbols::{DispersionSymbol, Parity};
use crate::{Error, Result, slot, wavenumber};

/// Default relative clustering tolerance: `|λᵢ − λⱼ| ≤ tol·(1 + |λ|)`.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Residual gap above which the profile counts as divergent.
pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e3;
/// Ratio of the last profile entry to the middle one above which the profile
/// counts as growing without bound.
pub const DEFAULT_GROWTH_RATIO: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    /// Eventually simple eigenvalues.
    I,
    /// Eventually exact pairs `λₖ = λ₋ₖ`.
    II,
    #[serde(rename = "inapplicable")]
    Inapplicable,
}

/// Minimum gap among representatives with `|k| > radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub radius: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumAnalysis {
    pub n: usize,
    pub tolerance: f64,
    /// `λₖ` for `k = −N..=N`.
    pub lambdas: Vec<f64>,
    /// Index sets sharing one eigenvalue, ordered by increasing `λ`; each is sorted.
    pub clusters: Vec<Vec<i64>>,
    /// Largest cluster size.
    pub n0: usize,
    /// Start of the tail where every cluster matches the criterion's pattern.
    pub k1_star: usize,
    /// One index per cluster (its largest member), aligned with `clusters`.
    pub representatives: Vec<i64>,
    pub criterion: Criterion,
    /// Minimum gap between distinct representatives (0 with fewer than two).
    pub gamma: f64,
    pub gamma_prime_profile: Vec<GapEntry>,
    cluster_of: Vec<usize>,
}

impl SpectrumAnalysis {
    pub fn lambda(&self, k: i64) -> f64 {
        self.lambdas[slot(self.n, k)]
    }

    /// Position in `clusters` of the cluster containing `k`.
    pub fn cluster_index(&self, k: i64) -> usize {
        self.cluster_of[slot(self.n, k)]
    }

    pub fn cluster_of(&self, k: i64) -> &[i64] {
        &self.clusters[self.cluster_index(k)]
    }

    /// Representative of the cluster containing `k`.
    pub fn representative(&self, k: i64) -> i64 {
        self.representatives[self.cluster_index(k)]
    }

    /// `λ` of every representative, aligned with `representatives`.
    pub fn rep_lambdas(&self) -> Vec<f64> {
        self.representatives.iter().map(|&k| self.lambda(k)).collect()
    }

    pub fn max_abs_lambda(&self) -> f64 {
        self.lambdas.iter().fold(0.0, |m, l| m.max(l.abs()))
    }
}

/// Clusters `λₖ` for `|k| ≤ N` and classifies the spectrum.
///
/// Eigenvalues are grouped by chaining sorted values within the relative
/// tolerance; symbols with declared parity have `λ₋ₖ` set from `λₖ` first so
/// exact pairs never split. The grouping is recomputed at `tol/10` and any
/// difference is reported as ambiguous.
pub fn cluster_spectrum(sym: &DispersionSymbol, n: usize, tol: f64) -> Result<SpectrumAnalysis> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid("tol", format!("must be positive, got {tol}")));
    }
    if n < 4 {
        return Err(Error::invalid("N", format!("need N >= 4, got {n}")));
    }
    let mut lambdas = sym.eigenvalues(n)?;
    for k in 1..=n as i64 {
        let pos = lambdas[slot(n, k)];
        match sym.parity() {
            Parity::Odd => lambdas[slot(n, -k)] = pos,
            Parity::Even => lambdas[slot(n, -k)] = -pos,
            Parity::None => {}
        }
    }
    let coarse = group(&lambdas, tol);
    let fine = group(&lambdas, tol / 10.0);
    if coarse != fine {
        let split = coarse
            .iter()
            .find(|c| !fine.contains(c))
            .map(|c| c.iter().map(|&s| wavenumber(n, s)).collect::<Vec<_>>())
            .unwrap_or_default();
        return Err(Error::AmbiguousClustering(format!(
            "modes {split:?} group differently at tol = {tol:e} and tol/10"
        )));
    }

    let clusters: Vec<Vec<i64>> = coarse
        .iter()
        .map(|c| {
            let mut ks: Vec<i64> = c.iter().map(|&s| wavenumber(n, s)).collect();
            ks.sort_unstable();
            ks
        })
        .collect();
    let mut cluster_of = vec![0; lambdas.len()];
    for (ci, c) in clusters.iter().enumerate() {
        for &k in c {
            cluster_of[slot(n, k)] = ci;
        }
    }
    let representatives: Vec<i64> = clusters.iter().map(|c| *c.last().unwrap()).collect();
    let n0 = clusters.iter().map(Vec::len).max().unwrap_or(0);

    let (criterion, k1_star) = classify(&clusters, n);

    let mut analysis = SpectrumAnalysis {
        n,
        tolerance: tol,
        lambdas,
        clusters,
        n0,
        k1_star,
        representatives,
        criterion,
        gamma: 0.0,
        gamma_prime_profile: Vec::new(),
        cluster_of,
    };
    match gap_constants(&analysis) {
        Ok((gamma, profile)) => {
            analysis.gamma = gamma;
            analysis.gamma_prime_profile = profile;
        }
        Err(_) => analysis.criterion = Criterion::Inapplicable,
    }
    Ok(analysis)
}

/// Chains sorted slots whose consecutive values differ by at most
/// `tol·(1 + max|λ|)`. Clusters come out ordered by increasing `λ`.
fn group(lambdas: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[a].total_cmp(&lambdas[b]).then(a.cmp(&b)));
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut prev: Option<f64> = None;
    for s in order {
        let l = lambdas[s];
        match prev {
            Some(p) if l - p <= tol * (1.0 + l.abs().max(p.abs())) => out.last_mut().unwrap().push(s),
            _ => out.push(vec![s]),
        }
        prev = Some(l);
    }
    for c in &mut out {
        c.sort_unstable();
    }
    out
}

/// Tail starts: every cluster reaching `|k| ≥ K` is a singleton (I) or an
/// exact pair `{−k, k}` (II). The first criterion whose tail starts within
/// `N/2` wins, so at least half the modes witness the pattern.
fn classify(clusters: &[Vec<i64>], n: usize) -> (Criterion, usize) {
    let reach = |c: &Vec<i64>| c.iter().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0);
    let tail_start = |fits: &dyn Fn(&Vec<i64>) -> bool| {
        clusters
            .iter()
            .filter(|c| !fits(c))
            .map(|c| reach(c) + 1)
            .max()
            .unwrap_or(1)
            .max(1)
    };
    let k_simple = tail_start(&|c| c.len() == 1);
    let k_pair = tail_start(&|c| c.len() == 2 && c[0] == -c[1] && c[1] != 0 || c == &vec![0]);
    if k_simple <= n / 2 {
        (Criterion::I, k_simple)
    } else if k_pair <= n / 2 {
        (Criterion::II, k_pair)
    } else {
        (Criterion::Inapplicable, k_simple.min(k_pair))
    }
}

/// `γ` and the residual-gap profile: entry `R` is the minimum gap among
/// representatives with `|k| > R`, for `R = 0..=N−2` while at least two such
/// representatives exist.
pub fn gap_constants(analysis: &SpectrumAnalysis) -> Result<(f64, Vec<GapEntry>)> {
    let reps = &analysis.representatives;
    if reps.len() < 2 {
        return Err(Error::TooFewRepresentatives(reps.len()));
    }
    let min_gap = |radius: Option<usize>| {
        let mut ls: Vec<f64> = reps
            .iter()
            .filter(|k| radius.is_none_or(|r| k.unsigned_abs() as usize > r))
            .map(|&k| analysis.lambda(k))
            .collect();
        if ls.len() < 2 {
            return None;
        }
        ls.sort_by(f64::total_cmp);
        Some(ls.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min))
    };
    let gamma = min_gap(None).expect("at least two representatives");
    let profile = (0..=analysis.n.saturating_sub(2))
        .map_while(|r| min_gap(Some(r)).map(|gap| GapEntry { radius: r, gap }))
        .collect();
    Ok((gamma, profile))
}

/// `2π/γ′_N` where `γ′_N` is the last profile entry, or `0` when the profile
/// diverges (any positive horizon works).
pub fn controllability_time(analysis: &SpectrumAnalysis) -> Result<f64> {
    controllability_time_with(analysis, DEFAULT_DIVERGENCE_THRESHOLD, DEFAULT_GROWTH_RATIO)
}

/// As [`controllability_time`]; the profile diverges when its last entry
/// reaches `threshold` or exceeds the middle entry by `growth_ratio`.
pub fn controllability_time_with(analysis: &SpectrumAnalysis, threshold: f64, growth_ratio: f64) -> Result<f64> {
    if analysis.criterion == Criterion::Inapplicable {
        return Err(Error::CriterionInapplicable);
    }
    let profile = &analysis.gamma_prime_profile;
    let Some(last) = profile.last().map(|e| e.gap) else {
        return Err(Error::TooFewRepresentatives(analysis.representatives.len()));
    };
    if profile_diverges(profile, threshold, growth_ratio) {
        Ok(0.0)
    } else {
        Ok(2.0 * PI / last)
    }
}

pub fn profile_diverges(profile: &[GapEntry], threshold: f64, growth_ratio: f64) -> bool {
    let Some(last) = profile.last().map(|e| e.gap) else {
        return false;
    };
    if last >= threshold {
        return true;
    }
    let mid = profile[profile.len() / 2].gap;
    profile.len() >= 3 && mid > 0.0 && last / mid >= growth_ratio
}
