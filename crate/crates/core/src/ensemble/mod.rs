//! Monte Carlo ensembles: many random networks, one shocked bank each.
//!
//! Every replicate draws its graph and its shocked bank from a seed derived
//! only from `(master_seed, z_index, replicate)`, so results are identical
//! for any thread count.

mod config;
mod output;
mod stats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{
    failures_dist_mf, mean_failures_mf, solve_cayley_shells, CriticalDegrees, FailureDistribution, FailureSource,
};
use crate::balance::{build_sheets, FinancialParams};
use crate::clearing::{BankStatus, ClearingProblem, ClearingResult, SolverOptions};
use crate::error::{Error, Result};
use crate::netgen::{gen_ba, gen_ba_directed, gen_cayley_tree, gen_er, DegreeDistribution, GraphFamily, NetworkGraph};

pub use config::{parse_z_values, ExperimentConfig, ShockRule};
pub use output::{write_hist_csv, write_sweep_csv, HIST_HEADER, SWEEP_HEADER};
pub use stats::{least_squares_slope, log_binned_density, mean_and_sem, tail_slope};

/// Replicates whose invariants are re-checked: one in this many.
const CHECK_EVERY: usize = 100;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one replicate: `splitmix64(splitmix64(master ⊕ splitmix64(z_index)) ⊕ replicate)`.
pub fn child_seed(master: u64, z_index: usize, replicate: usize) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(z_index as u64)) ^ replicate as u64)
}

/// What happened in one replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    pub seed: u64,
    pub shocked: usize,
    pub shocked_degree: usize,
    /// Induced failures; `None` if the solver did not converge.
    pub failures: Option<usize>,
    /// Failed banks at least two links from the shocked one.
    pub distant_failures: usize,
    pub iterations: usize,
    /// Set when the sampled invariant check ran and failed.
    pub invariant_violation: Option<String>,
}

/// Failure counts `0..=f_max` plus an overflow bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub overflow: u64,
    pub total: u64,
}

impl Histogram {
    pub fn from_values(values: &[usize], f_max: usize) -> Self {
        let mut counts = vec![0u64; f_max + 1];
        let mut overflow = 0;
        for &v in values {
            match counts.get_mut(v) {
                Some(c) => *c += 1,
                None => overflow += 1,
            }
        }
        Self {
            counts,
            overflow,
            total: values.len() as u64,
        }
    }

    pub fn f_max(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn prob(&self, f: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts.get(f).map_or(0.0, |&c| c as f64 / self.total as f64)
    }

    pub fn overflow_prob(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.overflow as f64 / self.total as f64
        }
    }

    pub fn to_distribution(&self) -> FailureDistribution {
        let mass = (0..=self.f_max()).map(|f| self.prob(f)).collect();
        FailureDistribution::from_mass(mass, FailureSource::Empirical, Vec::new())
    }
}

/// Aggregated results for one mean degree.
#[derive(Debug, Clone, Serialize)]
pub struct ZSummary {
    pub z: f64,
    pub converged: usize,
    /// Replicates dropped because the solver did not converge.
    pub excluded: usize,
    pub mean: f64,
    pub sem: f64,
    pub max: usize,
    /// Total failures beyond the first neighbours, summed over replicates.
    pub distant_failures: usize,
    pub invariant_violations: usize,
    pub mf_mean: f64,
    pub histogram: Histogram,
    #[serde(skip)]
    pub mf_distribution: Option<FailureDistribution>,
    #[serde(skip)]
    pub outcomes: Vec<ReplicateOutcome>,
}

impl ZSummary {
    /// Failure counts of the converged replicates, in replicate order.
    pub fn failures(&self) -> Vec<usize> {
        self.outcomes.iter().filter_map(|o| o.failures).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleResult {
    pub config: ExperimentConfig,
    pub critical: CriticalDegrees,
    pub per_z: Vec<ZSummary>,
}

/// Builds one replicate's network.
pub fn generate_network(cfg: &ExperimentConfig, z: f64, seed: u64) -> Result<NetworkGraph> {
    match cfg.family {
        GraphFamily::Er => gen_er(cfg.n, z, seed, cfg.directed),
        GraphFamily::Ba => {
            let m = (z / 2.0).round() as usize;
            if cfg.directed {
                gen_ba_directed(cfg.n, m, seed, cfg.reciprocity)
            } else {
                gen_ba(cfg.n, m, seed)
            }
        }
        GraphFamily::Cayley => gen_cayley_tree(z.round() as usize, cfg.depth),
    }
}

/// Chooses the shocked bank.
pub fn pick_shocked<R: Rng>(rule: ShockRule, graph: &NetworkGraph, rng: &mut R) -> Result<usize> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::domain("cannot shock an empty network"));
    }
    match rule {
        ShockRule::FixedNode(id) if id < n => Ok(id),
        ShockRule::FixedNode(id) => Err(Error::domain(format!("shocked bank {id} outside 0..{n}"))),
        ShockRule::UniformRandom => {
            let connected: Vec<usize> = graph
                .degrees()
                .iter()
                .enumerate()
                .filter(|&(_, &d)| d > 0)
                .map(|(i, _)| i)
                .collect();
            if connected.is_empty() {
                Ok(rng.random_range(0..n))
            } else {
                Ok(connected[rng.random_range(0..connected.len())])
            }
        }
        ShockRule::DegreeWeighted => {
            let edges = graph.edges();
            if edges.is_empty() {
                return Ok(rng.random_range(0..n));
            }
            let e = &edges[rng.random_range(0..edges.len())];
            // each loan end is equally likely, so banks are hit ∝ loan count
            Ok(if rng.random::<bool>() { e.lender } else { e.borrower })
        }
    }
}

/// Bounds, payment conservation and the fixed-point equation.
pub fn check_invariants(problem: &ClearingProblem, result: &ClearingResult, graph: &NetworkGraph) -> Option<String> {
    let tol = 1e-8;
    for (i, (&x, &ob)) in result.repayments.iter().zip(problem.obligations()).enumerate() {
        if x < -tol || x > ob + tol * ob.max(1.0) {
            return Some(format!("bank {i}: repayment {x} outside [0, {ob}]"));
        }
    }
    let mut paid = vec![0.0; graph.node_count()];
    for (debtor, _, amount) in result.pairwise(graph) {
        paid[debtor] += amount;
    }
    for (i, (&p, &x)) in paid.iter().zip(&result.repayments).enumerate() {
        if (p - x).abs() > tol * x.max(1.0) {
            return Some(format!("bank {i}: pays {p} on its loans but x = {x}"));
        }
    }
    let scale = problem.obligations().iter().fold(1.0f64, |a, &b| a.max(b));
    let res = problem.fixed_point_residual(&result.repayments);
    (res > tol * scale).then(|| format!("fixed-point residual {res:e}"))
}

/// Runs one replicate. Non-convergence is recorded, not returned as an error.
pub fn run_replicate(cfg: &ExperimentConfig, z: f64, z_index: usize, replicate: usize) -> Result<ReplicateOutcome> {
    let seed = child_seed(cfg.master_seed, z_index, replicate);
    let graph = generate_network(cfg, z, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    let shocked = pick_shocked(cfg.shock_rule, &graph, &mut rng)?;
    let sheets = build_sheets(&graph, &cfg.params)?;
    let problem = ClearingProblem::from_params(&graph, &sheets, &cfg.params, Some(shocked))?;
    let degrees = graph.degrees();
    let mut outcome = ReplicateOutcome {
        replicate,
        seed,
        shocked,
        shocked_degree: degrees[shocked],
        failures: None,
        distant_failures: 0,
        iterations: 0,
        invariant_violation: None,
    };
    let result = match problem.solve(&SolverOptions::default()) {
        Ok(r) => r,
        Err(Error::NonConvergence { iterations, .. }) => {
            outcome.iterations = iterations;
            return Ok(outcome);
        }
        Err(e) => return Err(e),
    };
    let dist = graph.distances_from(shocked);
    outcome.distant_failures = result
        .statuses
        .iter()
        .zip(&dist)
        .filter(|(s, d)| **s == BankStatus::Failed && d.is_none_or(|d| d >= 2))
        .count();
    outcome.failures = Some(result.induced_failures);
    outcome.iterations = result.iterations;
    if replicate.is_multiple_of(CHECK_EVERY) {
        outcome.invariant_violation = check_invariants(&problem, &result, &graph);
    }
    Ok(outcome)
}

/// Mean-field law of `F` for one family and mean degree. Cayley trees get a
/// point mass at the exact shell solution of the infinite tree.
pub fn mean_field_prediction(
    family: GraphFamily,
    z: f64,
    params: &FinancialParams,
    crit: &CriticalDegrees,
    f_max: usize,
) -> Result<(f64, Option<FailureDistribution>)> {
    let dist = match family {
        GraphFamily::Er => DegreeDistribution::poisson(z, None)?,
        GraphFamily::Ba => DegreeDistribution::barabasi_albert((z / 2.0).round() as usize, None)?,
        GraphFamily::Cayley => {
            return match solve_cayley_shells(z.round() as usize, params, 64) {
                Ok(sol) => {
                    let mut mass = vec![0.0; f_max + 1];
                    if let Some(m) = mass.get_mut(sol.failures as usize) {
                        *m = 1.0;
                    }
                    let mut d = FailureDistribution::from_mass(mass, FailureSource::MeanField, Vec::new());
                    d.mean = sol.failures as f64;
                    Ok((d.mean, Some(d)))
                }
                Err(_) => Ok((f64::NAN, None)),
            };
        }
    };
    let mean = mean_failures_mf(&dist, crit.k1_star);
    Ok((mean, Some(failures_dist_mf(&dist, crit.k1_star, f_max))))
}

fn summarize(cfg: &ExperimentConfig, crit: &CriticalDegrees, z: f64, outcomes: Vec<ReplicateOutcome>) -> Result<ZSummary> {
    let failures: Vec<usize> = outcomes.iter().filter_map(|o| o.failures).collect();
    let (mean, sem) = mean_and_sem(&failures);
    let (mf_mean, mf_distribution) = mean_field_prediction(cfg.family, z, &cfg.params, crit, cfg.f_max)?;
    Ok(ZSummary {
        z,
        converged: failures.len(),
        excluded: outcomes.len() - failures.len(),
        mean,
        sem,
        max: failures.iter().copied().max().unwrap_or(0),
        distant_failures: outcomes.iter().map(|o| o.distant_failures).sum(),
        invariant_violations: outcomes.iter().filter(|o| o.invariant_violation.is_some()).count(),
        mf_mean,
        histogram: Histogram::from_values(&failures, cfg.f_max),
        mf_distribution,
        outcomes,
    })
}

/// Runs every replicate of every mean degree in parallel.
pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleResult> {
    cfg.validate()?;
    let critical = CriticalDegrees::compute(&cfg.params)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker threads: {e}")))?;
    let tasks: Vec<(usize, usize)> = (0..cfg.z_values.len())
        .flat_map(|zi| (0..cfg.replicates).map(move |rep| (zi, rep)))
        .collect();
    let outcomes: Vec<ReplicateOutcome> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(zi, rep)| run_replicate(cfg, cfg.z_values[zi], zi, rep))
            .collect::<Result<_>>()
    })?;
    let mut per_z = Vec::with_capacity(cfg.z_values.len());
    let mut rest = outcomes.into_iter();
    for &z in &cfg.z_values {
        let chunk: Vec<_> = rest.by_ref().take(cfg.replicates).collect();
        per_z.push(summarize(cfg, &critical, z, chunk)?);
    }
    Ok(EnsembleResult {
        config: cfg.clone(),
        critical,
        per_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(family: GraphFamily, z: f64) -> ExperimentConfig {
        ExperimentConfig {
            family,
            n: 60,
            z_values: vec![z],
            replicates: 40,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = child_seed(1, 0, 0);
        assert_eq!(a, child_seed(1, 0, 0));
        assert_ne!(a, child_seed(1, 0, 1));
        assert_ne!(a, child_seed(1, 1, 0));
        assert_ne!(a, child_seed(2, 0, 0));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut cfg = small(GraphFamily::Er, 8.0);
        cfg.threads = Some(1);
        let one = run_ensemble(&cfg).unwrap();
        cfg.threads = Some(4);
        let four = run_ensemble(&cfg).unwrap();
        assert_eq!(one.per_z[0].outcomes, four.per_z[0].outcomes);
    }

    #[test]
    fn cayley_ensemble_matches_shells() {
        let mut cfg = small(GraphFamily::Cayley, 5.0);
        cfg.shock_rule = ShockRule::FixedNode(0);
        cfg.replicates = 3;
        let res = run_ensemble(&cfg).unwrap();
        let s = &res.per_z[0];
        assert_eq!(s.failures(), vec![5, 5, 5]);
        assert_eq!(s.mf_mean, 5.0);
        assert_eq!(s.sem, 0.0);
        assert_eq!(s.distant_failures, 0);
    }

    #[test]
    fn ba_ensemble_runs() {
        let res = run_ensemble(&small(GraphFamily::Ba, 4.0)).unwrap();
        let s = &res.per_z[0];
        assert_eq!(s.converged + s.excluded, 40);
        assert_eq!(s.invariant_violations, 0);
        assert_eq!(s.histogram.total as usize, s.converged);
        assert!(s.mf_mean > 0.0);
    }

    #[test]
    fn shock_rules() {
        let g = NetworkGraph::undirected_unit(4, &[(0, 1), (1, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            assert_ne!(pick_shocked(ShockRule::UniformRandom, &g, &mut rng).unwrap(), 3);
            assert_ne!(pick_shocked(ShockRule::DegreeWeighted, &g, &mut rng).unwrap(), 3);
        }
        assert_eq!(pick_shocked(ShockRule::FixedNode(3), &g, &mut rng).unwrap(), 3);
        assert!(pick_shocked(ShockRule::FixedNode(4), &g, &mut rng).is_err());
    }

    #[test]
    fn histogram_overflow() {
        let h = Histogram::from_values(&[0, 1, 1, 5, 9], 3);
        assert_eq!(h.counts, vec![1, 2, 0, 0]);
        assert_eq!(h.overflow, 2);
        assert!((h.prob(1) - 0.4).abs() < 1e-15);
        assert!((h.overflow_prob() - 0.4).abs() < 1e-15);
    }
}
