//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use contagion::analytics::{
    critical_degree_1, critical_degree_2, failures_dist_mf, failures_dist_with_q, mean_failures_mf,
    poisson_failures, q_values, CriticalDegrees,
};
use contagion::balance::{build_sheets, FinancialParams};
use contagion::clearing::{ClearingProblem, SolverOptions};
use contagion::ensemble::{run_ensemble, tail_slope, ExperimentConfig, ShockRule};
use contagion::netgen::{gen_cayley_tree, gen_er, DegreeDistribution, Edge, GraphFamily, NetworkGraph};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn std_params() -> FinancialParams {
    FinancialParams::standard()
}

fn critical_degree() -> Outcome {
    let k1 = critical_degree_1(&std_params()).unwrap();
    outcome((k1 - 10.22).abs() <= 0.01, format!("k1* = {k1:.4}, target 10.22 ± 0.01"))
}

fn limit_law() -> Outcome {
    let mut worst: f64 = 0.0;
    for big_r in [1.01, 1.02, 1.05] {
        let p = FinancialParams {
            external_rate: big_r,
            liquidity: 0.0,
            leverage: 0.0,
            ..std_params()
        };
        let k1 = critical_degree_1(&p).unwrap();
        worst = worst.max((k1 - 1.0 / (big_r - 1.0)).abs());
    }
    outcome(worst < 1e-9, format!("max |k1* - 1/(R-1)| = {worst:.2e} over R ∈ {{1.01, 1.02, 1.05}}, bound 1e-9"))
}

fn random_instance(rng: &mut ChaCha8Rng, idx: usize) -> NetworkGraph {
    let n = rng.random_range(2..=8usize);
    match idx % 5 {
        0 => gen_er(n, rng.random_range(0.5..(n - 1) as f64 + 0.01).min((n - 1) as f64), rng.random(), false).unwrap(),
        1 => {
            let pairs: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            NetworkGraph::undirected_unit(n, &pairs).unwrap()
        }
        2 => {
            let pairs: Vec<_> = (1..n).map(|j| (0, j)).collect();
            NetworkGraph::undirected_unit(n, &pairs).unwrap()
        }
        3 => {
            let pairs: Vec<_> = (1..n).map(|j| (j - 1, j)).collect();
            NetworkGraph::undirected_unit(n, &pairs).unwrap()
        }
        _ => {
            // directed loans with random sizes
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.random::<f64>() < 0.4 {
                        edges.push(Edge {
                            lender: i,
                            borrower: j,
                            weight: rng.random_range(0.2..3.0),
                        });
                    }
                }
            }
            NetworkGraph::from_edges(n, edges, true).unwrap()
        }
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for idx in 0..200 {
        let graph = random_instance(&mut rng, idx);
        let params = FinancialParams {
            external_rate: rng.random_range(1.0..1.1),
            interbank_rate: rng.random_range(1.001..1.05),
            liquidity: rng.random_range(0.0..0.9),
            leverage: rng.random_range(0.0..0.2),
            shocked_rate: 0.0,
        };
        let shocked = rng.random_range(0..graph.node_count());
        let sheets = build_sheets(&graph, &params).unwrap();
        let problem = ClearingProblem::from_params(&graph, &sheets, &params, Some(shocked)).unwrap();
        let opts = SolverOptions::default();
        match (problem.solve(&opts), problem.brute_force(&opts)) {
            (Ok(a), Ok(b)) => {
                let d = a
                    .repayments
                    .iter()
                    .zip(&b.repayments)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(d);
            }
            _ => errors += 1,
        }
    }
    outcome(
        worst <= 1e-8 && errors == 0,
        format!("200 instances (N <= 8): max sup-norm gap {worst:.2e}, bound 1e-8, solver errors {errors}"),
    )
}

fn cayley_step() -> Outcome {
    let params = std_params();
    let crit = CriticalDegrees::compute(&params).unwrap();
    let k1 = crit.k1_star;
    let k2 = crit.k2_star.expect("second critical degree applies at standard parameters");
    let mut checked = Vec::new();
    let mut skipped = Vec::new();
    let mut mismatches = Vec::new();
    for k in 2..=20usize {
        let kf = k as f64;
        if (kf - k1).abs() <= 0.5 || (kf - k2).abs() <= 0.5 {
            skipped.push(k);
            continue;
        }
        let graph = gen_cayley_tree(k, 3).unwrap();
        let sheets = build_sheets(&graph, &params).unwrap();
        let f = ClearingProblem::from_params(&graph, &sheets, &params, Some(0))
            .unwrap()
            .solve(&SolverOptions::default())
            .unwrap()
            .induced_failures;
        let ok = if kf > k1 {
            f == 0
        } else if kf > k2 {
            f == k
        } else {
            // below k2* the second shell falls as well
            f >= k + k * (k - 1)
        };
        checked.push(k);
        if !ok {
            mismatches.push(format!("k={k}: F={f}"));
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "k1*={k1:.3}, k2*={k2:.3}; checked k ∈ {:?}, excluded within 0.5 of a critical degree {:?}; mismatches {:?}",
            checked, skipped, mismatches
        ),
    )
}

fn ensemble(family: GraphFamily, n: usize, z: f64, replicates: usize, seed: u64) -> contagion::ensemble::ZSummary {
    let cfg = ExperimentConfig {
        family,
        n,
        z_values: vec![z],
        replicates,
        params: std_params(),
        shock_rule: ShockRule::UniformRandom,
        master_seed: seed,
        f_max: 200,
        ..ExperimentConfig::default()
    };
    run_ensemble(&cfg).unwrap().per_z.remove(0)
}

fn er_mean_failures() -> Outcome {
    let k1 = critical_degree_1(&std_params()).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for z in [8.0, 12.0, 16.0] {
        let s = ensemble(GraphFamily::Er, 200, z, 1000, 11);
        let zq = mean_failures_mf(&DegreeDistribution::poisson(z, None).unwrap(), k1);
        let rel = (s.mean - zq).abs() / zq;
        pass &= rel <= 0.15 && s.excluded == 0;
        parts.push(format!("z={z}: <F>={:.3} zq={zq:.3} rel={rel:.3} excl={}", s.mean, s.excluded));
    }
    outcome(pass, format!("{}; bound 0.15", parts.join(", ")))
}

struct TailRuns {
    er_max: usize,
    er_tv: f64,
    er_excluded: usize,
    ba_slope: Option<f64>,
    ba_max: usize,
    ba_excluded: usize,
}

fn tail_runs() -> TailRuns {
    let k1 = critical_degree_1(&std_params()).unwrap();
    let er = ensemble(GraphFamily::Er, 500, 8.0, 10_000, 21);
    let zq = mean_failures_mf(&DegreeDistribution::poisson(8.0, None).unwrap(), k1);
    let f_max = er.histogram.f_max();
    let poisson = poisson_failures(zq, f_max);
    let emp = er.histogram.to_distribution();
    let er_tv = emp.total_variation(&poisson)
        + 0.5 * (er.histogram.overflow_prob() - (1.0 - poisson.total()).max(0.0)).abs();
    let ba = ensemble(GraphFamily::Ba, 500, 8.0, 10_000, 21);
    TailRuns {
        er_max: er.max,
        er_tv,
        er_excluded: er.excluded,
        ba_slope: tail_slope(&ba.failures(), 10, 50, 8),
        ba_max: ba.max,
        ba_excluded: ba.excluded,
    }
}

fn poisson_law(t: &TailRuns) -> Outcome {
    outcome(
        t.er_tv <= 0.05 && t.er_excluded == 0,
        format!("ER n=500 z=8, 10^4 networks: TV(P̂, Poisson(zq)) = {:.4}, bound 0.05", t.er_tv),
    )
}

fn fat_tail(t: &TailRuns) -> Outcome {
    let slope_ok = t.ba_slope.is_some_and(|s| (s + 3.0).abs() <= 0.5);
    outcome(
        slope_ok && t.ba_max > t.er_max && t.ba_excluded == 0,
        format!(
            "BA n=500 z=8, 10^4 networks: log-binned slope over F ∈ [10, 50] = {}, target -3 ± 0.5; max F BA={} vs ER={}",
            t.ba_slope.map_or("n/a".into(), |s| format!("{s:.3}")),
            t.ba_max,
            t.er_max
        ),
    )
}

fn tail_asymptotics() -> Outcome {
    // p(k) = 4 / (k (k+1) (k+2)) for k >= 1, whose normalisation constant is 4
    let k_max = 20_000;
    let mass: Vec<f64> = (0..=k_max)
        .map(|k| if k == 0 { 0.0 } else { 4.0 / (k as f64 * (k + 1) as f64 * (k + 2) as f64) })
        .collect();
    let dist = DegreeDistribution::from_mass(mass).unwrap();
    let q = 0.5;
    let pf = failures_dist_with_q(&dist, vec![q], 200);
    let ratio = |f: usize| pf.prob(f) * (f as f64).powi(3) / (q * q);
    let constant = 4.0;
    let (lo, hi) = (50..=200)
        .map(|f| ratio(f) / constant)
        .fold((f64::MAX, f64::MIN), |(a, b), r| (a.min(r), b.max(r)));
    outcome(
        lo >= 0.9 && hi <= 1.1,
        format!("P(F) F^3 / q^2 over F ∈ [50, 200] lies in [{lo:.4}, {hi:.4}] × {constant}, bound [0.9, 1.1]"),
    )
}

fn newton_identity() -> Outcome {
    let k1 = critical_degree_1(&std_params()).unwrap();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, dist) in [
        ("ER z=8", DegreeDistribution::poisson(8.0, None).unwrap()),
        ("BA m=4", DegreeDistribution::barabasi_albert(4, None).unwrap()),
    ] {
        let direct: f64 = q_values(&dist, k1)
            .iter()
            .enumerate()
            .map(|(k, q)| k as f64 * dist.pmf(k) * q)
            .sum();
        let via_pf = failures_dist_mf(&dist, k1, dist.k_max()).mean;
        let gap = (direct - via_pf).abs();
        worst = worst.max(gap);
        parts.push(format!("{name}: {via_pf:.10} vs {direct:.10}"));
    }
    outcome(worst < 1e-9, format!("{}; max gap {worst:.2e}, bound 1e-9", parts.join(", ")))
}

fn monotone_surfaces() -> Outcome {
    let base = FinancialParams {
        external_rate: 1.05,
        interbank_rate: 1.01,
        ..std_params()
    };
    let fs: Vec<f64> = (0..20).map(|i| 0.95 * i as f64 / 19.0).collect();
    let ls: Vec<f64> = (0..20).map(|i| 0.2 * i as f64 / 19.0).collect();
    let at = |f: f64, l: f64| FinancialParams {
        liquidity: f,
        leverage: l,
        ..base
    };
    let k1: Vec<Vec<f64>> = fs.iter().map(|&f| ls.iter().map(|&l| critical_degree_1(&at(f, l)).unwrap()).collect()).collect();
    let k2: Vec<Vec<Option<f64>>> =
        fs.iter().map(|&f| ls.iter().map(|&l| critical_degree_2(&at(f, l)).ok()).collect()).collect();
    let tol = 1e-12;
    let mut violations = 0;
    let mut k2_cells = 0;
    for i in 0..20 {
        for j in 0..20 {
            k2_cells += k2[i][j].is_some() as usize;
            let neighbours = [(i + 1, j), (i, j + 1)];
            for (a, b) in neighbours {
                if a >= 20 || b >= 20 {
                    continue;
                }
                if k1[a][b] > k1[i][j] + tol {
                    violations += 1;
                }
                if let (Some(x), Some(y)) = (k2[i][j], k2[a][b]) {
                    if y > x + tol {
                        violations += 1;
                    }
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!(
            "20×20 grid f ∈ [0, 0.95], Λ ∈ [0, 0.2] at R=1.05 r=1.01: {violations} increases; k2* defined on {k2_cells}/400 cells"
        ),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, run: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name}: {} ({:.1}s)", o.detail, t.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
    };
    report(1, "critical degree", &critical_degree);
    report(2, "limit law", &limit_law);
    report(3, "oracle equivalence", &oracle_equivalence);
    report(4, "Cayley step function", &cayley_step);
    report(5, "ER mean failures", &er_mean_failures);
    let tails = tail_runs();
    report(6, "Poisson failures law", &|| poisson_law(&tails));
    report(7, "fat tail", &|| fat_tail(&tails));
    report(8, "tail asymptotics", &tail_asymptotics);
    report(9, "Newton-binomial identity", &newton_identity);
    report(10, "monotone critical degrees", &monotone_surfaces);
    if failed == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
