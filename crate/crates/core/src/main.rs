//! `contagion` command-line frontend.
//!
//! Every subcommand writes its artifacts to `--out-dir` together with a
//! `run_summary.json` manifest. Exit status: 0 success, 2 invalid input,
//! 3 solver non-convergence.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use contagion::analytics::{
    critical_degree_1, critical_degree_2, failures_dist_mf, mean_failures_mf, poisson_failures, solve_cayley_shells,
    CriticalDegrees,
};
use contagion::balance::{apply_overrides, build_sheets, parse_ratio, read_sheet_overrides, FinancialParams};
use contagion::clearing::{shock_rates, ClearingProblem, SolverOptions};
use contagion::ensemble::{
    parse_z_values, pick_shocked, run_ensemble, write_hist_csv, write_sweep_csv, ExperimentConfig, ShockRule,
};
use contagion::netgen::{
    gen_ba, gen_ba_directed, gen_cayley_tree, gen_er, read_edge_list, write_edge_list, DegreeDistribution,
    GraphFamily, NetworkGraph,
};
use contagion::{BankStatus, Error};

const EXIT_INVALID: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(name = "contagion", version, about = "Single-shock contagion in interbank lending networks")]
struct Cli {
    /// Directory for every output file.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores). Results never depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical degrees at one point, or a CSV table over an (f, Λ) or (R, r) grid.
    CriticalDegree(CriticalArgs),
    /// Clear a depth-limited Cayley tree shocked at its root.
    Tree(TreeArgs),
    /// Clear one network under a single shock.
    Simulate(SimulateArgs),
    /// Mean-field mean and distribution of induced failures.
    MfPredict(MfArgs),
    /// Ensemble mean failures as a function of mean degree.
    Sweep(EnsembleArgs),
    /// Ensemble failures histograms, one file per mean degree.
    Hist(EnsembleArgs),
    /// Generate a network and write it as an edge list.
    Generate(GenerateArgs),
}

fn ratio(s: &str) -> Result<f64, String> {
    parse_ratio(s).map_err(|e| e.to_string())
}

/// Financial parameters; ratios accept `0.5` or `50%`.
#[derive(Args, Clone, Default)]
struct FinArgs {
    /// Gross external return [default: 1.02]
    #[arg(long = "R", value_parser = ratio)]
    big_r: Option<f64>,
    /// Gross interbank rate [default: 1.01]
    #[arg(long = "r", value_parser = ratio)]
    small_r: Option<f64>,
    /// Liquidity ratio [default: 0.5]
    #[arg(long, value_parser = ratio)]
    f: Option<f64>,
    /// Leverage ratio [default: 0.03]
    #[arg(long, value_parser = ratio)]
    lambda: Option<f64>,
    /// Gross external return of the shocked bank [default: 0]
    #[arg(long, value_parser = ratio)]
    shocked_rate: Option<f64>,
}

impl FinArgs {
    fn resolve(&self, base: FinancialParams) -> Result<FinancialParams, Error> {
        let p = FinancialParams {
            external_rate: self.big_r.unwrap_or(base.external_rate),
            interbank_rate: self.small_r.unwrap_or(base.interbank_rate),
            liquidity: self.f.unwrap_or(base.liquidity),
            leverage: self.lambda.unwrap_or(base.leverage),
            shocked_rate: self.shocked_rate.unwrap_or(base.shocked_rate),
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum GridKind {
    /// Vary f and Λ at fixed R, r.
    #[value(name = "f-lambda")]
    FLambda,
    /// Vary R and r at fixed f, Λ.
    #[value(name = "R-r")]
    #[serde(rename = "R-r")]
    RR,
}

#[derive(Args)]
struct CriticalArgs {
    #[command(flatten)]
    fin: FinArgs,
    /// Write a grid table instead of printing one point.
    #[arg(long, value_enum)]
    grid: Option<GridKind>,
    /// Grid points per axis.
    #[arg(long, default_value_t = 20)]
    steps: usize,
    /// Range of the first grid axis as `lo:hi` [default: 0:0.95 for f, 1.005:1.1 for R]
    #[arg(long)]
    x_range: Option<String>,
    /// Range of the second grid axis as `lo:hi` [default: 0:0.3 for Λ, 1.001:1.05 for r]
    #[arg(long)]
    y_range: Option<String>,
}

#[derive(Args)]
struct TreeArgs {
    #[command(flatten)]
    fin: FinArgs,
    /// Degree of every internal node.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    depth: usize,
}

/// How to obtain a network.
#[derive(Args, Clone)]
struct NetArgs {
    #[arg(long, value_enum, default_value = "er")]
    family: FamilyArg,
    /// Number of banks (ER, BA).
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Mean degree; `2m` for BA, `k` for Cayley trees.
    #[arg(long, default_value_t = 8.0)]
    z: f64,
    /// Random seed [env: CONTAGION_SEED, default: 7]
    #[arg(long, env = "CONTAGION_SEED", default_value_t = 7)]
    seed: u64,
    /// Generate directed loans.
    #[arg(long)]
    directed: bool,
    /// Probability that a directed BA loan is reciprocated.
    #[arg(long, default_value_t = 1.0)]
    reciprocity: f64,
    /// Cayley tree depth.
    #[arg(long, default_value_t = 3)]
    depth: usize,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FamilyArg {
    Er,
    Ba,
    Cayley,
}

impl From<FamilyArg> for GraphFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Er => GraphFamily::Er,
            FamilyArg::Ba => GraphFamily::Ba,
            FamilyArg::Cayley => GraphFamily::Cayley,
        }
    }
}

impl NetArgs {
    fn generate(&self) -> Result<NetworkGraph, Error> {
        let family: GraphFamily = self.family.into();
        match family {
            GraphFamily::Er => gen_er(self.n, self.z, self.seed, self.directed),
            GraphFamily::Ba => {
                let m = self.z / 2.0;
                if m.fract() != 0.0 || m < 1.0 {
                    return Err(Error::Domain(format!("BA mean degree must be an even integer >= 2, got {}", self.z)));
                }
                if self.directed {
                    gen_ba_directed(self.n, m as usize, self.seed, self.reciprocity)
                } else {
                    gen_ba(self.n, m as usize, self.seed)
                }
            }
            GraphFamily::Cayley => {
                if self.z.fract() != 0.0 {
                    return Err(Error::Domain(format!("Cayley degree must be an integer, got {}", self.z)));
                }
                gen_cayley_tree(self.z as usize, self.depth)
            }
        }
    }

    fn describe(&self) -> Value {
        json!({
            "family": GraphFamily::from(self.family).to_string(),
            "n": self.n,
            "z": self.z,
            "seed": self.seed,
            "directed": self.directed,
            "reciprocity": self.reciprocity,
            "depth": self.depth,
        })
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    fin: FinArgs,
    /// Edge-list file; when absent a network is generated.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[command(flatten)]
    net: NetArgs,
    /// Sheet-override file with records `id liquid illiquid senior rate`.
    #[arg(long)]
    sheets: Option<PathBuf>,
    /// Shocked bank; default: uniform over banks with a counterparty, drawn from the seed.
    #[arg(long)]
    shock: Option<usize>,
}

#[derive(Args)]
struct MfArgs {
    #[command(flatten)]
    fin: FinArgs,
    /// `er` (Poisson degrees) or `ba` (scale-free, m = z/2).
    #[arg(long, value_enum, default_value = "er")]
    family: FamilyArg,
    #[arg(long, default_value_t = 8.0)]
    z: f64,
    /// Largest F listed.
    #[arg(long, default_value_t = 100)]
    f_max: usize,
    /// Degree truncation [default: max(10z, 30) for ER, 1000 for BA]
    #[arg(long)]
    k_max: Option<usize>,
}

#[derive(Args)]
struct EnsembleArgs {
    #[command(flatten)]
    fin: FinArgs,
    /// TOML experiment config; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Number of banks [default: 200; 100 for sweep and 500 for hist with --full-scale]
    #[arg(long)]
    n: Option<usize>,
    /// Mean degrees, `start:stop:step` or a comma list [default: 8]
    #[arg(long)]
    z: Option<String>,
    /// Networks per mean degree [default: 1000; 10000 with --full-scale]
    #[arg(long)]
    replicates: Option<usize>,
    /// Master seed [env: CONTAGION_SEED, default: 7]
    #[arg(long, env = "CONTAGION_SEED")]
    seed: Option<u64>,
    /// uniform-random, degree-weighted or fixed-node:<id> [default: uniform-random]
    #[arg(long)]
    shock_rule: Option<ShockRule>,
    #[arg(long)]
    directed: bool,
    #[arg(long)]
    reciprocity: Option<f64>,
    /// Cayley tree depth [default: 3]
    #[arg(long)]
    depth: Option<usize>,
    /// Largest F listed in histograms [default: 100]
    #[arg(long)]
    f_max: Option<usize>,
    /// Full-scale runs: 10⁴ networks per mean degree.
    #[arg(long)]
    full_scale: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    net: NetArgs,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "graph.edges")]
    out: String,
}

/// Provenance record written next to every set of artifacts.
#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    config: Value,
    master_seed: Option<u64>,
    artifacts: Vec<String>,
    wall_clock_seconds: f64,
    results: Value,
}

struct Output {
    dir: PathBuf,
    artifacts: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self, Error> {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, Error> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        self.artifacts.push(name.to_string());
        Ok(path)
    }

    fn finish(
        mut self,
        subcommand: &'static str,
        config: Value,
        master_seed: Option<u64>,
        started: Instant,
        results: Value,
    ) -> Result<(), Error> {
        let name = "run_summary.json";
        self.artifacts.push(name.to_string());
        let manifest = RunManifest {
            tool: "contagion",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            config,
            master_seed,
            artifacts: self.artifacts.clone(),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            results,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        let path = self.dir.join(name);
        fs::write(&path, text + "\n").map_err(|e| Error::Io { path, source: e })
    }
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<Vec<u8>, Error> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| Error::Domain(format!("csv output: {e}")))?;
    Ok(buf)
}

fn fmt_k2(k2: Option<f64>) -> String {
    k2.map_or_else(|| "NA".to_string(), |v| format!("{v:.2}"))
}

fn parse_range(spec: Option<&str>, default: (f64, f64)) -> Result<(f64, f64), Error> {
    let Some(spec) = spec else {
        return Ok(default);
    };
    let bad = || Error::Domain(format!("range `{spec}` must be `lo:hi` with lo <= hi"));
    let (a, b) = spec.split_once(':').ok_or_else(bad)?;
    let lo = parse_ratio(a).map_err(|_| bad())?;
    let hi = parse_ratio(b).map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
}

fn cmd_critical(args: &CriticalArgs, mut out: Output, started: Instant) -> Result<(), Error> {
    let base = args.fin.resolve(FinancialParams::standard())?;
    let Some(grid) = args.grid else {
        let crit = CriticalDegrees::compute(&base)?;
        println!("k1_star={:.2} k2_star={}", crit.k1_star, fmt_k2(crit.k2_star));
        return out.finish(
            "critical-degree",
            json!({ "params": base }),
            None,
            started,
            json!({ "k1_star": crit.k1_star, "k2_star": crit.k2_star }),
        );
    };
    if args.steps == 0 {
        return Err(Error::Domain("--steps must be >= 1".into()));
    }
    let (xd, yd) = match grid {
        GridKind::FLambda => ((0.0, 0.95), (0.0, 0.3)),
        GridKind::RR => ((1.005, 1.1), (1.001, 1.05)),
    };
    let xs = linspace_range(args.x_range.as_deref(), xd, args.steps)?;
    let ys = linspace_range(args.y_range.as_deref(), yd, args.steps)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut rows = 0usize;
    let mut skipped = 0usize;
    let csv_err = |e: csv::Error| Error::Domain(format!("csv output: {e}"));
    w.write_record(["f", "lambda", "R", "r", "k1_star", "k2_star"]).map_err(csv_err)?;
    for &x in &xs {
        for &y in &ys {
            let p = match grid {
                GridKind::FLambda => FinancialParams {
                    liquidity: x,
                    leverage: y,
                    ..base
                },
                GridKind::RR => FinancialParams {
                    external_rate: x,
                    interbank_rate: y,
                    ..base
                },
            };
            // points outside the model's domain (e.g. r <= 1) are left out
            let Ok(k1) = critical_degree_1(&p) else {
                skipped += 1;
                continue;
            };
            let k2 = critical_degree_2(&p).ok();
            w.write_record([
                p.liquidity.to_string(),
                p.leverage.to_string(),
                p.external_rate.to_string(),
                p.interbank_rate.to_string(),
                k1.to_string(),
                k2.map_or_else(String::new, |v| v.to_string()),
            ])
            .map_err(csv_err)?;
            rows += 1;
        }
    }
    let mut bytes = format!("# contagion {} format 1\n", env!("CARGO_PKG_VERSION")).into_bytes();
    bytes.extend(w.into_inner().map_err(|e| Error::Domain(format!("csv output: {e}")))?);
    let path = out.write("critical_degree.csv", &bytes)?;
    println!("wrote {} rows to {}", rows, path.display());
    out.finish(
        "critical-degree",
        json!({ "params": base, "grid": grid, "x": xs, "y": ys }),
        None,
        started,
        json!({ "rows": rows, "skipped_out_of_domain": skipped }),
    )
}

fn linspace_range(spec: Option<&str>, default: (f64, f64), steps: usize) -> Result<Vec<f64>, Error> {
    let (lo, hi) = parse_range(spec, default)?;
    Ok(linspace(lo, hi, steps))
}

fn cmd_tree(args: &TreeArgs, mut out: Output, started: Instant) -> Result<(), Error> {
    let params = args.fin.resolve(FinancialParams::standard())?;
    let graph = gen_cayley_tree(args.k, args.depth)?;
    let sheets = build_sheets(&graph, &params)?;
    let result = ClearingProblem::from_params(&graph, &sheets, &params, Some(0))?.solve(&SolverOptions::default())?;
    let dist = graph.distances_from(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Domain(format!("csv output: {e}"));
    w.write_record(["shell", "banks", "x", "K_prime", "failed"]).map_err(csv_err)?;
    let mut failed_shells = 0;
    for shell in 0..=args.depth {
        let members: Vec<usize> = (0..graph.node_count()).filter(|&i| dist[i] == Some(shell)).collect();
        // banks in one shell are interchangeable; report the first
        let i = members[0];
        let failed = members
            .iter()
            .filter(|&&j| matches!(result.statuses[j], BankStatus::Failed))
            .count();
        if shell > 0 && failed == members.len() && failed_shells == shell - 1 {
            failed_shells = shell;
        }
        w.write_record([
            shell.to_string(),
            members.len().to_string(),
            result.repayments[i].to_string(),
            result.net_worths[i].to_string(),
            failed.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.write("tree.csv", &w.into_inner().map_err(|e| Error::Domain(e.to_string()))?)?;
    let crit = CriticalDegrees::compute(&params)?;
    let infinite = solve_cayley_shells(args.k, &params, 64).ok();
    println!("F={} failed_shells={}", result.induced_failures, failed_shells);
    out.finish(
        "tree",
        json!({ "params": params, "k": args.k, "depth": args.depth }),
        None,
        started,
        json!({
            "F": result.induced_failures,
            "failed_shells": failed_shells,
            "iterations": result.iterations,
            "infinite_tree_failed_shells": infinite.as_ref().map(|s| s.failed_shells),
            "k1_star": crit.k1_star,
            "k2_star": crit.k2_star,
        }),
    )
}

fn cmd_simulate(args: &SimulateArgs, mut out: Output, started: Instant) -> Result<(), Error> {
    let params = args.fin.resolve(FinancialParams::standard())?;
    let graph = match &args.graph {
        Some(path) => read_edge_list(path)?,
        None => args.net.generate()?,
    };
    let shocked = match args.shock {
        Some(id) => pick_shocked(ShockRule::FixedNode(id), &graph, &mut ChaCha8Rng::seed_from_u64(args.net.seed))?,
        None => pick_shocked(ShockRule::UniformRandom, &graph, &mut ChaCha8Rng::seed_from_u64(args.net.seed))?,
    };
    let mut sheets = build_sheets(&graph, &params)?;
    let mut rates = shock_rates(graph.node_count(), &params, Some(shocked));
    if let Some(path) = &args.sheets {
        apply_overrides(&mut sheets, &mut rates, &read_sheet_overrides(path)?)?;
    }
    let problem = ClearingProblem::new(&graph, &sheets, &rates, params.interbank_rate, Some(shocked))?;
    let result = problem.solve(&SolverOptions::default())?;
    let degrees = graph.degrees();
    out.write("clearing.csv", &csv_bytes(|b| result.write_table(&degrees, b))?)?;
    out.write("clearing_summary.csv", &csv_bytes(|b| result.write_summary(b))?)?;
    if args.graph.is_none() {
        out.write("graph.edges", write_edge_list(&graph).as_bytes())?;
    }
    println!(
        "shocked={} F={} iterations={} residual={:e}",
        shocked, result.induced_failures, result.iterations, result.residual
    );
    let source = match &args.graph {
        Some(p) => json!({ "graph": p }),
        None => args.net.describe(),
    };
    out.finish(
        "simulate",
        json!({ "params": params, "network": source, "sheets": args.sheets, "shocked": shocked }),
        Some(args.net.seed),
        started,
        json!({ "F": result.induced_failures, "iterations": result.iterations, "residual": result.residual }),
    )
}

fn cmd_mf(args: &MfArgs, mut out: Output, started: Instant) -> Result<(), Error> {
    let params = args.fin.resolve(FinancialParams::standard())?;
    let crit = CriticalDegrees::compute(&params)?;
    let dist = match GraphFamily::from(args.family) {
        GraphFamily::Er => DegreeDistribution::poisson(args.z, args.k_max)?,
        GraphFamily::Ba => {
            let m = args.z / 2.0;
            if m.fract() != 0.0 || m < 1.0 {
                return Err(Error::Domain(format!("BA mean degree must be an even integer >= 2, got {}", args.z)));
            }
            DegreeDistribution::barabasi_albert(m as usize, args.k_max)?
        }
        GraphFamily::Cayley => return Err(Error::Domain("use `tree` for Cayley trees".into())),
    };
    let mean = mean_failures_mf(&dist, crit.k1_star);
    let mf = failures_dist_mf(&dist, crit.k1_star, args.f_max);
    let poisson = poisson_failures(mean, args.f_max);
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Domain(format!("csv output: {e}"));
    w.write_record(["F", "p_mf", "p_poisson_mean"]).map_err(csv_err)?;
    for f in 0..=args.f_max {
        w.write_record([f.to_string(), mf.prob(f).to_string(), poisson.prob(f).to_string()])
            .map_err(csv_err)?;
    }
    let mut bytes = format!("# contagion {} format 1\n", env!("CARGO_PKG_VERSION")).into_bytes();
    bytes.extend(w.into_inner().map_err(|e| Error::Domain(e.to_string()))?);
    out.write("mf_predict.csv", &bytes)?;
    println!("F_mean_mf={mean:.6} k1_star={:.4} tail_mass={:e}", crit.k1_star, dist.tail_mass());
    out.finish(
        "mf-predict",
        json!({ "params": params, "family": GraphFamily::from(args.family).to_string(), "z": args.z,
                "f_max": args.f_max, "k_max": dist.k_max() }),
        None,
        started,
        json!({ "F_mean_mf": mean, "listed_mass": mf.total(), "degree_tail_mass": dist.tail_mass() }),
    )
}

fn resolve_experiment(args: &EnsembleArgs, threads: Option<usize>, hist: bool) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            toml::from_str(&text).map_err(|e| Error::Parse {
                path: path.clone(),
                line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
                message: e.message().to_string(),
            })?
        }
        None => ExperimentConfig::default(),
    };
    if args.full_scale {
        cfg.replicates = 10_000;
        cfg.n = if hist { 500 } else { 100 };
    }
    cfg.params = args.fin.resolve(cfg.params)?;
    if let Some(f) = args.family {
        cfg.family = f.into();
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(z) = &args.z {
        cfg.z_values = parse_z_values(z)?;
    }
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(rule) = args.shock_rule {
        cfg.shock_rule = rule;
    }
    if args.directed {
        cfg.directed = true;
    }
    if let Some(rho) = args.reciprocity {
        cfg.reciprocity = rho;
    }
    if let Some(d) = args.depth {
        cfg.depth = d;
    }
    if let Some(f) = args.f_max {
        cfg.f_max = f;
    }
    if threads.is_some() {
        cfg.threads = threads;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn z_label(z: f64) -> String {
    format!("{z}")
}

fn cmd_ensemble(
    args: &EnsembleArgs,
    hist: bool,
    threads: Option<usize>,
    mut out: Output,
    started: Instant,
) -> Result<u8, Error> {
    let cfg = resolve_experiment(args, threads, hist)?;
    let result = run_ensemble(&cfg)?;
    if hist {
        for s in &result.per_z {
            let mut buf = Vec::new();
            write_hist_csv(s, &mut buf)?;
            out.write(&format!("hist_z{}.csv", z_label(s.z)), &buf)?;
        }
    } else {
        let mut buf = Vec::new();
        write_sweep_csv(&result, &mut buf)?;
        out.write("sweep.csv", &buf)?;
    }
    for s in &result.per_z {
        println!(
            "z={} F_mean_emp={:.4} F_sem={:.4} F_mean_mf={:.4} F_max={} excluded={}",
            z_label(s.z),
            s.mean,
            s.sem,
            s.mf_mean,
            s.max,
            s.excluded
        );
    }
    let excluded: usize = result.per_z.iter().map(|s| s.excluded).sum();
    let violations: usize = result.per_z.iter().map(|s| s.invariant_violations).sum();
    let mut cfg_echo = serde_json::to_value(&cfg).expect("config serializes");
    cfg_echo["child_seed_rule"] = json!("splitmix64(splitmix64(master ^ splitmix64(z_index)) ^ replicate)");
    out.finish(
        if hist { "hist" } else { "sweep" },
        cfg_echo,
        Some(cfg.master_seed),
        started,
        json!({
            "k1_star": result.critical.k1_star,
            "k2_star": result.critical.k2_star,
            "per_z": result.per_z,
            "excluded_replicates": excluded,
            "invariant_violations": violations,
        }),
    )?;
    if violations > 0 {
        return Err(Error::Domain(format!("{violations} sampled replicates violated clearing invariants")));
    }
    if excluded > 0 {
        eprintln!("contagion: error: {excluded} replicates did not converge and were excluded");
        return Ok(EXIT_NONCONVERGENCE);
    }
    Ok(0)
}

fn cmd_generate(args: &GenerateArgs, mut out: Output, started: Instant) -> Result<(), Error> {
    let graph = args.net.generate()?;
    let path = out.write(&args.out, write_edge_list(&graph).as_bytes())?;
    println!("nodes={} loans={} wrote {}", graph.node_count(), graph.loan_count(), path.display());
    out.finish(
        "generate",
        args.net.describe(),
        Some(args.net.seed),
        started,
        json!({ "nodes": graph.node_count(), "loans": graph.loan_count() }),
    )
}

fn run(cli: Cli) -> Result<u8, Error> {
    let started = Instant::now();
    let out = Output::new(&cli.out_dir)?;
    if cli.threads == Some(0) {
        return Err(Error::Domain("--threads must be >= 1".into()));
    }
    match &cli.command {
        Command::CriticalDegree(a) => cmd_critical(a, out, started).map(|_| 0),
        Command::Tree(a) => cmd_tree(a, out, started).map(|_| 0),
        Command::Simulate(a) => cmd_simulate(a, out, started).map(|_| 0),
        Command::MfPredict(a) => cmd_mf(a, out, started).map(|_| 0),
        Command::Sweep(a) => cmd_ensemble(a, false, cli.threads, out, started),
        Command::Hist(a) => cmd_ensemble(a, true, cli.threads, out, started),
        Command::Generate(a) => cmd_generate(a, out, started).map(|_| 0),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("contagion: error: {}", first.trim_start_matches("error: ").trim());
            return ExitCode::from(EXIT_INVALID);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("contagion: error: {e}");
            ExitCode::from(match e {
                Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
                _ => EXIT_INVALID,
            })
        }
    }
}
