use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::balance::FinancialParams;
use crate::error::{Error, Result};
use crate::netgen::GraphFamily;

/// How the shocked bank is chosen in each replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ShockRule {
    /// Uniform over banks with at least one counterparty.
    UniformRandom,
    /// Always the given bank.
    FixedNode(usize),
    /// Proportional to the number of counterparties.
    DegreeWeighted,
}

impl fmt::Display for ShockRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShockRule::UniformRandom => f.write_str("uniform-random"),
            ShockRule::FixedNode(id) => write!(f, "fixed-node:{id}"),
            ShockRule::DegreeWeighted => f.write_str("degree-weighted"),
        }
    }
}

impl FromStr for ShockRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-random" | "uniform" => Ok(ShockRule::UniformRandom),
            "degree-weighted" => Ok(ShockRule::DegreeWeighted),
            "fixed-node" => Ok(ShockRule::FixedNode(0)),
            other => match other.strip_prefix("fixed-node:") {
                Some(id) => id
                    .parse()
                    .map(ShockRule::FixedNode)
                    .map_err(|e| Error::domain(format!("bad fixed node `{id}`: {e}"))),
                None => Err(Error::domain(format!(
                    "unknown shock rule `{other}` (uniform-random, degree-weighted, fixed-node:<id>)"
                ))),
            },
        }
    }
}

impl TryFrom<String> for ShockRule {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ShockRule> for String {
    fn from(rule: ShockRule) -> String {
        rule.to_string()
    }
}

/// A Monte Carlo experiment: for every mean degree, `replicates` networks
/// are generated, one bank is shocked and the induced failures counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: GraphFamily,
    /// Number of banks (ignored for Cayley trees).
    pub n: usize,
    /// Mean degrees; for BA these are `2m`, for Cayley trees the degree `k`.
    pub z_values: Vec<f64>,
    pub replicates: usize,
    pub params: FinancialParams,
    pub shock_rule: ShockRule,
    pub master_seed: u64,
    pub directed: bool,
    /// Probability that a directed BA loan is reciprocated.
    pub reciprocity: f64,
    /// Depth of Cayley trees.
    pub depth: usize,
    /// Largest `F` listed in histograms and mean-field distributions.
    pub f_max: usize,
    /// Worker threads; `None` uses every core. Results do not depend on it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            family: GraphFamily::Er,
            n: 200,
            z_values: vec![8.0],
            replicates: 1000,
            params: FinancialParams::standard(),
            shock_rule: ShockRule::UniformRandom,
            master_seed: 7,
            directed: false,
            reciprocity: 1.0,
            depth: 3,
            f_max: 100,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.replicates == 0 {
            return Err(Error::domain("replicates must be >= 1"));
        }
        if self.z_values.is_empty() {
            return Err(Error::domain("at least one mean degree is required"));
        }
        if !(0.0..=1.0).contains(&self.reciprocity) {
            return Err(Error::domain("reciprocity must lie in [0, 1]"));
        }
        if self.threads == Some(0) {
            return Err(Error::domain("threads must be >= 1"));
        }
        for &z in &self.z_values {
            if !(z.is_finite() && z >= 0.0) {
                return Err(Error::domain(format!("mean degree {z} must be finite and >= 0")));
            }
            match self.family {
                GraphFamily::Er => {
                    if self.n < 2 || z > (self.n - 1) as f64 {
                        return Err(Error::domain(format!("ER needs n >= 2 and z <= n-1, got n={} z={z}", self.n)));
                    }
                }
                GraphFamily::Ba => {
                    let m = z / 2.0;
                    if m.fract() != 0.0 || m < 1.0 {
                        return Err(Error::domain(format!("BA mean degree must be an even integer >= 2, got {z}")));
                    }
                    if self.n <= m as usize {
                        return Err(Error::domain(format!("BA needs n > m, got n={} m={m}", self.n)));
                    }
                }
                GraphFamily::Cayley => {
                    if z.fract() != 0.0 || z < 2.0 {
                        return Err(Error::domain(format!("Cayley degree must be an integer >= 2, got {z}")));
                    }
                    if self.depth < 1 {
                        return Err(Error::domain("Cayley depth must be >= 1"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parses `a:b:step` (inclusive) or a comma-separated list of mean degrees.
pub fn parse_z_values(spec: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| Error::domain(format!("bad mean-degree list `{spec}`: {msg}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(e.to_string()));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step".into()));
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad("need step > 0 and stop >= start".into()));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    spec.split(',').map(num).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_ranges() {
        assert_eq!(parse_z_values("2:20:2").unwrap().len(), 10);
        assert_eq!(parse_z_values("8").unwrap(), vec![8.0]);
        assert_eq!(parse_z_values("8, 12,16").unwrap(), vec![8.0, 12.0, 16.0]);
        assert!(parse_z_values("1:2").is_err());
        assert!(parse_z_values("5:1:1").is_err());
        assert!(parse_z_values("a").is_err());
    }

    #[test]
    fn shock_rule_strings() {
        for s in ["uniform-random", "degree-weighted", "fixed-node:3"] {
            assert_eq!(s.parse::<ShockRule>().unwrap().to_string(), s);
        }
        assert!("nope".parse::<ShockRule>().is_err());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate().is_ok());
        c.family = GraphFamily::Ba;
        c.z_values = vec![7.0];
        assert!(c.validate().is_err());
        c.z_values = vec![8.0];
        assert!(c.validate().is_ok());
        c.replicates = 0;
        assert!(c.validate().is_err());
        c.replicates = 1;
        c.family = GraphFamily::Er;
        c.z_values = vec![250.0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig {
            shock_rule: ShockRule::FixedNode(4),
            threads: Some(2),
            ..ExperimentConfig::default()
        };
        let text = toml::to_string(&c).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
