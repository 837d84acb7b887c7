//! Mean-field failures statistics.
//!
//! A first neighbour of the shocked bank fails exactly when its own degree is
//! subcritical, `l <= k1*`. With `q(k)` the probability that a neighbour of a
//! degree-`k` bank is subcritical, the number of failures is binomial given
//! the shocked bank's degree:
//!
//! ```text
//! P(F) = Σ_{k>=F} p(k) C(k, F) q(k)^F (1 - q(k))^(k-F)
//! <F>  = Σ_k k p(k) q(k)
//! ```
//!
//! Failures beyond the first neighbours are not included.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::ln_gamma;

use crate::netgen::DegreeDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureSource {
    MeanField,
    Empirical,
    PoissonClosedForm,
    ScalefreeAsymptotic,
}

/// Probability mass over the number of induced failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureDistribution {
    /// `P(F)` for `F = 0..mass.len()`.
    pub mass: Vec<f64>,
    /// `Σ F P(F)` over the listed support.
    pub mean: f64,
    pub source: FailureSource,
    /// `q(k)` indexed by the shocked bank's degree; empty when not applicable.
    pub q_values: Vec<f64>,
}

impl FailureDistribution {
    pub fn from_mass(mass: Vec<f64>, source: FailureSource, q_values: Vec<f64>) -> Self {
        let mean = mass.iter().enumerate().map(|(f, p)| f as f64 * p).sum();
        Self {
            mass,
            mean,
            source,
            q_values,
        }
    }

    pub fn prob(&self, failures: usize) -> f64 {
        self.mass.get(failures).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Total-variation distance `½ Σ |P - Q|`; mass missing from either
    /// support counts as zero.
    pub fn total_variation(&self, other: &FailureDistribution) -> f64 {
        let len = self.mass.len().max(other.mass.len());
        0.5 * (0..len).map(|f| (self.prob(f) - other.prob(f)).abs()).sum::<f64>()
    }
}

/// Whether a neighbour of degree `l` fails. Exact equality `l == k1*` counts
/// as failing, since a critical bank ends with zero net worth.
pub fn is_subcritical(l: usize, k1_star: f64) -> bool {
    l >= 1 && (l as f64) <= k1_star + 1e-9
}

/// `q(k) = Σ_{l <= k1*} p(l | k)`.
pub fn q_subcritical(k: usize, dist: &DegreeDistribution, k1_star: f64) -> f64 {
    if k1_star < 1.0 - 1e-9 {
        return 0.0;
    }
    let upper = (k1_star + 1e-9).floor() as usize;
    let lower = dist.min_degree().max(1);
    (lower..=upper)
        .filter(|&l| is_subcritical(l, k1_star))
        .map(|l| dist.conditional(l, k))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// `q(k)` for every degree `0..=k_max` of the distribution.
pub fn q_values(dist: &DegreeDistribution, k1_star: f64) -> Vec<f64> {
    (0..=dist.k_max())
        .map(|k| if k == 0 { 0.0 } else { q_subcritical(k, dist, k1_star) })
        .collect()
}

/// Mean-field expected number of failures `Σ_k k p(k) q(k)`.
pub fn mean_failures_mf(dist: &DegreeDistribution, k1_star: f64) -> f64 {
    q_values(dist, k1_star)
        .iter()
        .enumerate()
        .map(|(k, q)| k as f64 * dist.pmf(k) * q)
        .sum()
}

fn ln_binomial_pmf(k: usize, f: usize, q: f64) -> Option<f64> {
    if f > k {
        return None;
    }
    if q <= 0.0 {
        return (f == 0).then_some(0.0);
    }
    if q >= 1.0 {
        return (f == k).then_some(0.0);
    }
    Some(ln_binomial(k as u64, f as u64) + f as f64 * q.ln() + (k - f) as f64 * (1.0 - q).ln())
}

/// Mean-field `P(F)` for `F = 0..=f_max`, with binomial weights evaluated in
/// log space.
pub fn failures_dist_mf(dist: &DegreeDistribution, k1_star: f64, f_max: usize) -> FailureDistribution {
    failures_dist_with_q(dist, q_values(dist, k1_star), f_max)
}

/// `P(F)` for an explicit `q(k)`, indexed by degree; degrees past the end of
/// `q` reuse its last entry.
pub fn failures_dist_with_q(dist: &DegreeDistribution, q: Vec<f64>, f_max: usize) -> FailureDistribution {
    let q_at = |k: usize| q.get(k).or(q.last()).copied().unwrap_or(0.0);
    let mass = (0..=f_max)
        .map(|f| {
            (f..=dist.k_max())
                .filter_map(|k| {
                    let pk = dist.pmf(k);
                    if pk == 0.0 {
                        return None;
                    }
                    ln_binomial_pmf(k, f, q_at(k)).map(|lb| pk * lb.exp())
                })
                .sum()
        })
        .collect();
    FailureDistribution::from_mass(mass, FailureSource::MeanField, q)
}

/// Poisson law with mean `mean`, the resummed mean-field result for Poisson
/// networks with constant `q`.
pub fn poisson_failures(mean: f64, f_max: usize) -> FailureDistribution {
    let mass = (0..=f_max)
        .map(|f| {
            if mean == 0.0 {
                if f == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (f as f64 * mean.ln() - mean - ln_gamma(f as f64 + 1.0)).exp()
            }
        })
        .collect();
    FailureDistribution::from_mass(mass, FailureSource::PoissonClosedForm, Vec::new())
}

/// Unnormalised large-`F` asymptote `q^(γ-1) / F^γ` for degree laws with
/// tail exponent `γ`.
pub fn scalefree_tail(gamma: f64, q: f64, failures: f64) -> f64 {
    q.powf(gamma - 1.0) / failures.powf(gamma)
}
