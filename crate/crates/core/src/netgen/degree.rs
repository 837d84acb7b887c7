use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Family of an analytic or empirical degree distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DegreeKind {
    Poisson { z: f64 },
    BaScalefree { m: usize },
    Empirical,
}

/// Probability mass over degrees `0..=k_max`.
///
/// Analytic families are truncated at `k_max` without renormalisation; the
/// discarded mass is kept in `tail_mass` so that `sum(mass) + tail_mass == 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    pub kind: DegreeKind,
    mass: Vec<f64>,
    tail_mass: f64,
    mean_degree: f64,
}

pub(crate) fn poisson_pmf(z: f64, k: usize) -> f64 {
    if z == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * z.ln() - z - ln_gamma(k as f64 + 1.0)).exp()
}

pub(crate) fn ba_pmf(m: usize, k: usize) -> f64 {
    if k < m {
        return 0.0;
    }
    let (m, k) = (m as f64, k as f64);
    2.0 * m * (m + 1.0) / (k * (k + 1.0) * (k + 2.0))
}

impl DegreeDistribution {
    /// Poisson law with mean `z`, truncated at `k_max` (default `max(10 z, 30)`).
    pub fn poisson(z: f64, k_max: Option<usize>) -> Result<Self> {
        if !(z.is_finite() && z >= 0.0) {
            return Err(Error::domain(format!("Poisson mean must be >= 0, got {z}")));
        }
        let k_max = k_max.unwrap_or_else(|| ((10.0 * z).ceil() as usize).max(30));
        let mass: Vec<f64> = (0..=k_max).map(|k| poisson_pmf(z, k)).collect();
        let tail_mass = (1.0 - mass.iter().sum::<f64>()).max(0.0);
        Ok(Self {
            kind: DegreeKind::Poisson { z },
            mass,
            tail_mass,
            mean_degree: z,
        })
    }

    /// Barabási–Albert law `2m(m+1) / (k(k+1)(k+2))` for `k >= m`, truncated at
    /// `k_max` (default 1000). The mean of the untruncated law is `2m`.
    pub fn barabasi_albert(m: usize, k_max: Option<usize>) -> Result<Self> {
        if m < 1 {
            return Err(Error::domain("BA attachment count m must be >= 1"));
        }
        let k_max = k_max.unwrap_or(1000);
        if k_max < m {
            return Err(Error::domain(format!("k_max {k_max} below BA minimum degree {m}")));
        }
        let mass: Vec<f64> = (0..=k_max).map(|k| ba_pmf(m, k)).collect();
        // sum_{k > K} 1/(k(k+1)(k+2)) = 1 / (2 (K+1)(K+2))
        let (mf, kf) = (m as f64, k_max as f64);
        let tail_mass = mf * (mf + 1.0) / ((kf + 1.0) * (kf + 2.0));
        Ok(Self {
            kind: DegreeKind::BaScalefree { m },
            mass,
            tail_mass,
            mean_degree: 2.0 * mf,
        })
    }

    /// Normalised histogram of observed degrees.
    pub fn empirical(degrees: &[usize]) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::domain("empirical degree distribution needs at least one node"));
        }
        let k_max = degrees.iter().copied().max().unwrap_or(0);
        let mut mass = vec![0.0; k_max + 1];
        for &k in degrees {
            mass[k] += 1.0;
        }
        let n = degrees.len() as f64;
        mass.iter_mut().for_each(|p| *p /= n);
        let mean_degree = degrees.iter().sum::<usize>() as f64 / n;
        Ok(Self {
            kind: DegreeKind::Empirical,
            mass,
            tail_mass: 0.0,
            mean_degree,
        })
    }

    /// Arbitrary mass over `0..mass.len()`; mass missing from a total below
    /// one is recorded as tail. Neighbours are treated as uncorrelated.
    pub fn from_mass(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() || mass.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::domain("degree mass must be non-empty, finite and >= 0"));
        }
        let total: f64 = mass.iter().sum();
        if total > 1.0 + 1e-9 || total == 0.0 {
            return Err(Error::domain(format!("degree mass sums to {total}, expected (0, 1]")));
        }
        let mean_degree = mass.iter().enumerate().map(|(k, p)| k as f64 * p).sum::<f64>() / total;
        Ok(Self {
            kind: DegreeKind::Empirical,
            mass,
            tail_mass: (1.0 - total).max(0.0),
            mean_degree,
        })
    }

    /// `p(k)`; zero beyond the truncation point.
    pub fn pmf(&self, k: usize) -> f64 {
        self.mass.get(k).copied().unwrap_or(0.0)
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn k_max(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Mean degree `z` of the untruncated law.
    pub fn mean_degree(&self) -> f64 {
        self.mean_degree
    }

    /// Smallest degree with non-zero probability in the family.
    pub fn min_degree(&self) -> usize {
        match self.kind {
            DegreeKind::BaScalefree { m } => m,
            DegreeKind::Poisson { .. } => 0,
            DegreeKind::Empirical => self.mass.iter().position(|&p| p > 0.0).unwrap_or(0),
        }
    }

    /// Mass rescaled to sum to one over the retained support.
    pub fn renormalized(&self) -> Self {
        let total: f64 = self.mass.iter().sum();
        let mut out = self.clone();
        if total > 0.0 {
            out.mass.iter_mut().for_each(|p| *p /= total);
            out.tail_mass = 0.0;
        }
        out
    }

    /// Conditional degree distribution `p(l | k)`: the probability that a
    /// neighbour of a degree-`k` node has degree `l`.
    ///
    /// Poisson and empirical laws are treated as uncorrelated, `l p(l) / z`.
    /// The Barabási–Albert law uses the closed form for the grown network, with
    /// the mean degree `z = 2m` entering the upper binomial argument.
    /// Degrees outside the support give 0.
    pub fn conditional(&self, l: usize, k: usize) -> f64 {
        match self.kind {
            DegreeKind::Poisson { z } => {
                if z == 0.0 || l == 0 {
                    0.0
                } else {
                    l as f64 * poisson_pmf(z, l) / z
                }
            }
            DegreeKind::Empirical => {
                if self.mean_degree == 0.0 {
                    0.0
                } else {
                    l as f64 * self.pmf(l) / self.mean_degree
                }
            }
            DegreeKind::BaScalefree { m } => ba_conditional(m, l, k),
        }
    }
}

pub(crate) fn ba_conditional(m: usize, l: usize, k: usize) -> f64 {
    if l < m || k < m {
        return 0.0;
    }
    let z = 2 * m;
    let (mf, lf, kf) = (m as f64, l as f64, k as f64);
    let ln_ratio = ln_binomial((2 * m + 2) as u64, (m + 1) as u64)
        + ln_binomial((k + l - z) as u64, (l - m) as u64)
        - ln_binomial((k + l + 2) as u64, l as u64);
    let value = mf / (kf * lf) * ((kf + 2.0) / (lf + 1.0) - ln_ratio.exp());
    value.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn custom_mass() {
        let d = DegreeDistribution::from_mass(vec![0.0, 0.5, 0.25]).unwrap();
        assert!((d.tail_mass() - 0.25).abs() < 1e-15);
        assert!((d.mean_degree() - 1.0 / 0.75).abs() < 1e-12);
        assert_eq!(d.min_degree(), 1);
        assert!(DegreeDistribution::from_mass(vec![0.7, 0.7]).is_err());
        assert!(DegreeDistribution::from_mass(vec![-0.1]).is_err());
    }

    #[test]
    fn poisson_zero_mean_is_point_mass() {
        let d = DegreeDistribution::poisson(0.0, None).unwrap();
        assert_eq!(d.pmf(0), 1.0);
        assert_eq!(d.pmf(1), 0.0);
    }

    #[test]
    fn poisson_mean_identity() {
        let d = DegreeDistribution::poisson(8.0, Some(200)).unwrap();
        let mean: f64 = d.mass().iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        assert!((mean - 8.0).abs() < 1e-9);
        assert!((d.mass().iter().sum::<f64>() + d.tail_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ba_mass_at_minimum_degree() {
        let d = DegreeDistribution::barabasi_albert(4, None).unwrap();
        assert!((d.pmf(4) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.pmf(3), 0.0);
        assert!((d.mass().iter().sum::<f64>() + d.tail_mass() - 1.0).abs() < 1e-9);
        assert!(d.tail_mass() > 0.0 && d.tail_mass() < 1e-4);
        let r = d.renormalized();
        assert!((r.mass().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn er_conditional_is_uncorrelated_and_normalised() {
        let d = DegreeDistribution::poisson(8.0, None).unwrap();
        for l in 1..30 {
            let a = d.conditional(l, 3);
            assert_eq!(a, d.conditional(l, 40));
        }
        let total: f64 = (0..=200).map(|l| d.conditional(l, 5)).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ba_conditional_out_of_support() {
        assert_eq!(ba_conditional(4, 3, 10), 0.0);
        assert_eq!(ba_conditional(4, 10, 3), 0.0);
        for l in 4..300 {
            let p = ba_conditional(4, l, 50);
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn ba_conditional_normalisation() {
        // the leading term m(k+2)/(k l (l+1)) telescopes, so the tail beyond L
        // is m(k+2)/(k(L+1)) up to the fast-decaying binomial correction
        let (m, k, cutoff) = (4usize, 50usize, 200_000usize);
        let head: f64 = (m..=cutoff).map(|l| ba_conditional(m, l, k)).sum();
        let tail = m as f64 * (k as f64 + 2.0) / (k as f64 * (cutoff as f64 + 1.0));
        assert!((head + tail - 1.0).abs() < 1e-6, "{}", head + tail);
    }

    #[test]
    fn empirical_histogram() {
        let d = DegreeDistribution::empirical(&[1, 1, 2, 4]).unwrap();
        assert_eq!(d.pmf(1), 0.5);
        assert_eq!(d.pmf(3), 0.0);
        assert_eq!(d.mean_degree(), 2.0);
        assert_eq!(d.min_degree(), 1);
        assert!(DegreeDistribution::empirical(&[]).is_err());
    }
}
