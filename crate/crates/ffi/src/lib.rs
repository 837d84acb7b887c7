//! C ABI over the `contagion` library.
//!
//! Graphs and clearing results are opaque heap handles released with their
//! `_free` function. Every fallible call returns a [`ContagionStatus`]; on
//! failure [`contagion_last_error`] describes the problem. Panics never cross
//! the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use contagion::analytics::{failures_dist_mf, mean_failures_mf, solve_cayley_shells, CriticalDegrees};
use contagion::balance::build_sheets;
use contagion::clearing::{ClearingProblem, SolverOptions};
use contagion::netgen::{
    gen_ba, gen_ba_directed, gen_cayley_tree, gen_er, read_edge_list, DegreeDistribution, Edge,
};
use contagion::{BankStatus, ClearingResult, Error, FinancialParams, NetworkGraph};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContagionStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Inapplicable = 3,
    NonConvergence = 4,
    NonMonotone = 5,
    TooLarge = 6,
    Io = 7,
    Parse = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContagionBankStatus {
    Safe = 0,
    Critical = 1,
    Failed = 2,
    Shocked = 3,
    Isolated = 4,
}

/// Degree law used by the mean-field calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContagionFamily {
    /// Poisson degrees with mean `z`.
    Er = 0,
    /// Scale-free degrees with `m = z / 2`.
    Ba = 1,
}

/// Financial parameters. Ratios are fractions, not percentages.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContagionParams {
    pub external_rate: f64,
    pub interbank_rate: f64,
    pub liquidity: f64,
    pub leverage: f64,
    pub shocked_rate: f64,
}

impl From<ContagionParams> for FinancialParams {
    fn from(p: ContagionParams) -> Self {
        FinancialParams {
            external_rate: p.external_rate,
            interbank_rate: p.interbank_rate,
            liquidity: p.liquidity,
            leverage: p.leverage,
            shocked_rate: p.shocked_rate,
        }
    }
}

/// Opaque loan network.
pub struct ContagionGraph(NetworkGraph);

/// Opaque clearing outcome.
pub struct ContagionClearing(ClearingResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ContagionStatus {
    match e {
        Error::Domain(_) => ContagionStatus::Domain,
        Error::Inapplicable(_) => ContagionStatus::Inapplicable,
        Error::NonConvergence { .. } => ContagionStatus::NonConvergence,
        Error::NonMonotone { .. } => ContagionStatus::NonMonotone,
        Error::TooLarge { .. } => ContagionStatus::TooLarge,
        Error::Io { .. } => ContagionStatus::Io,
        Error::Parse { .. } => ContagionStatus::Parse,
    }
}

struct Failure(ContagionStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ContagionStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> ContagionStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ContagionStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ContagionStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    if len < src.len() {
        return Err(Failure(
            ContagionStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn contagion_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// `R = 1.02`, `r = 1.01`, `f = 0.5`, `Λ = 0.03`, shocked return 0.
#[no_mangle]
pub extern "C" fn contagion_params_standard() -> ContagionParams {
    let p = FinancialParams::standard();
    ContagionParams {
        external_rate: p.external_rate,
        interbank_rate: p.interbank_rate,
        liquidity: p.liquidity,
        leverage: p.leverage,
        shocked_rate: p.shocked_rate,
    }
}

/// First and second critical degrees. `*k2_defined` is false (and `*k2`
/// NaN) where the second-shell closed form does not apply.
///
/// # Safety
/// All pointers must be valid for the access they imply.
#[no_mangle]
pub unsafe extern "C" fn contagion_critical_degrees(
    params: *const ContagionParams,
    k1: *mut f64,
    k2: *mut f64,
    k2_defined: *mut bool,
) -> ContagionStatus {
    guard(|| {
        let p: FinancialParams = (*deref(params, "params")?).into();
        let crit = CriticalDegrees::compute(&p)?;
        write_out(k1, crit.k1_star, "k1")?;
        write_out(k2, crit.k2_star.unwrap_or(f64::NAN), "k2")?;
        write_out(k2_defined, crit.k2_star.is_some(), "k2_defined")
    })
}

unsafe fn emit_graph(out: *mut *mut ContagionGraph, g: NetworkGraph) -> Result<(), Failure> {
    write_out(out, Box::into_raw(Box::new(ContagionGraph(g))), "out")
}

/// Erdős–Rényi network with mean degree `z`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn contagion_graph_er(
    n: usize,
    z: f64,
    seed: u64,
    directed: bool,
    out: *mut *mut ContagionGraph,
) -> ContagionStatus {
    guard(|| emit_graph(out, gen_er(n, z, seed, directed)?))
}

/// Barabási–Albert network, `m` links per new node.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn contagion_graph_ba(n: usize, m: usize, seed: u64, out: *mut *mut ContagionGraph) -> ContagionStatus {
    guard(|| emit_graph(out, gen_ba(n, m, seed)?))
}

/// Directed Barabási–Albert network; each loan is reciprocated with
/// probability `reciprocity`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn contagion_graph_ba_directed(
    n: usize,
    m: usize,
    seed: u64,
    reciprocity: f64,
    out: *mut *mut ContagionGraph,
) -> ContagionStatus {
    guard(|| emit_graph(out, gen_ba_directed(n, m, seed, reciprocity)?))
}

/// Cayley tree of degree `k` and the given depth; node 0 is the root.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn contagion_graph_cayley(k: usize, depth: usize, out: *mut *mut ContagionGraph) -> ContagionStatus {
    guard(|| emit_graph(out, gen_cayley_tree(k, depth)?))
}

/// Network from `count` loans `lenders[i] -> borrowers[i]` of size `weights[i]`.
///
/// # Safety
/// The three arrays must hold `count` elements; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn contagion_graph_from_edges(
    node_count: usize,
    lenders: *const usize,
    borrowers: *const usize,
    weights: *const f64,
    count: usize,
    directed: bool,
    out: *mut *mut ContagionGraph,
) -> ContagionStatus {
    guard(|| {
        let mut edges = Vec::with_capacity(count);
        if count > 0 {
            if lenders.is_null() || borrowers.is_null() || weights.is_null() {
                return Err(null("edge array"));
            }
            let (l, b, w) = (
                std::slice::from_raw_parts(lenders, count),
                std::slice::from_raw_parts(borrowers, count),
                std::slice::from_raw_parts(weights, count),
            );
            for i in 0..count {
                edges.push(Edge {
                    lender: l[i],
                    borrower: b[i],
                    weight: w[i],
                });
            }
        }
        emit_graph(out, NetworkGraph::from_edges(node_count, edges, directed)?)
    })
}

/// Reads an edge-list file (`#nodes N directed {0,1}` header).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn contagion_graph_read(path: *const c_char, out: *mut *mut ContagionGraph) -> ContagionStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let p = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(ContagionStatus::Domain, "path is not UTF-8".into()))?;
        emit_graph(out, read_edge_list(Path::new(p))?)
    })
}

/// Number of banks; 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn contagion_graph_node_count(graph: *const ContagionGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.node_count())
}

/// Number of directed loans (an undirected link counts twice).
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn contagion_graph_loan_count(graph: *const ContagionGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.loan_count())
}

/// # Safety
/// `graph` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn contagion_graph_free(graph: *mut ContagionGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Shocks bank `shocked` and solves the clearing problem with standard
/// sheets built from the graph.
///
/// # Safety
/// `graph` and `params` must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn contagion_clear(
    graph: *const ContagionGraph,
    params: *const ContagionParams,
    shocked: usize,
    out: *mut *mut ContagionClearing,
) -> ContagionStatus {
    guard(|| {
        let g = &deref(graph, "graph")?.0;
        let p: FinancialParams = (*deref(params, "params")?).into();
        let sheets = build_sheets(g, &p)?;
        let result = ClearingProblem::from_params(g, &sheets, &p, Some(shocked))?.solve(&SolverOptions::default())?;
        write_out(out, Box::into_raw(Box::new(ContagionClearing(result))), "out")
    })
}

/// # Safety
/// `clearing` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn contagion_clearing_bank_count(clearing: *const ContagionClearing) -> usize {
    clearing.as_ref().map_or(0, |c| c.0.repayments.len())
}

/// Induced failures `F`, excluding the shocked bank.
///
/// # Safety
/// `clearing` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn contagion_clearing_failures(clearing: *const ContagionClearing) -> usize {
    clearing.as_ref().map_or(0, |c| c.0.induced_failures)
}

/// # Safety
/// `clearing` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn contagion_clearing_iterations(clearing: *const ContagionClearing) -> usize {
    clearing.as_ref().map_or(0, |c| c.0.iterations)
}

/// Copies the repayment vector `x` into `out[0..bank_count]`.
///
/// # Safety
/// `clearing` must be live and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn contagion_clearing_repayments(
    clearing: *const ContagionClearing,
    out: *mut f64,
    len: usize,
) -> ContagionStatus {
    guard(|| copy_out(&deref(clearing, "clearing")?.0.repayments, out, len))
}

/// Copies the updated net worths `K'` into `out[0..bank_count]`.
///
/// # Safety
/// `clearing` must be live and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn contagion_clearing_net_worths(
    clearing: *const ContagionClearing,
    out: *mut f64,
    len: usize,
) -> ContagionStatus {
    guard(|| copy_out(&deref(clearing, "clearing")?.0.net_worths, out, len))
}

/// Status of bank `bank`.
///
/// # Safety
/// `clearing` must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn contagion_clearing_status(
    clearing: *const ContagionClearing,
    bank: usize,
    out: *mut ContagionBankStatus,
) -> ContagionStatus {
    guard(|| {
        let c = &deref(clearing, "clearing")?.0;
        let s = c.statuses.get(bank).ok_or_else(|| {
            Failure(ContagionStatus::Domain, format!("bank {bank} outside 0..{}", c.statuses.len()))
        })?;
        let code = match s {
            BankStatus::Safe => ContagionBankStatus::Safe,
            BankStatus::Critical => ContagionBankStatus::Critical,
            BankStatus::Failed => ContagionBankStatus::Failed,
            BankStatus::Shocked => ContagionBankStatus::Shocked,
            BankStatus::Isolated => ContagionBankStatus::Isolated,
        };
        write_out(out, code, "out")
    })
}

/// # Safety
/// `clearing` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn contagion_clearing_free(clearing: *mut ContagionClearing) {
    if !clearing.is_null() {
        drop(Box::from_raw(clearing));
    }
}

/// Exact shell solution on the infinite Cayley tree of degree `k`: number of
/// failing shells and induced failures.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn contagion_tree_solve(
    k: usize,
    params: *const ContagionParams,
    max_depth: usize,
    failed_shells: *mut usize,
    failures: *mut u64,
) -> ContagionStatus {
    guard(|| {
        let p: FinancialParams = (*deref(params, "params")?).into();
        let sol = solve_cayley_shells(k, &p, max_depth)?;
        write_out(failed_shells, sol.failed_shells, "failed_shells")?;
        write_out(failures, sol.failures, "failures")
    })
}

fn degree_law(family: ContagionFamily, z: f64) -> Result<DegreeDistribution, Failure> {
    Ok(match family {
        ContagionFamily::Er => DegreeDistribution::poisson(z, None)?,
        ContagionFamily::Ba => {
            let m = z / 2.0;
            if m.fract() != 0.0 || m < 1.0 {
                return Err(Failure(
                    ContagionStatus::Domain,
                    format!("BA mean degree must be an even integer >= 2, got {z}"),
                ));
            }
            DegreeDistribution::barabasi_albert(m as usize, None)?
        }
    })
}

/// Mean-field expected number of failures.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn contagion_mf_mean(
    family: ContagionFamily,
    z: f64,
    params: *const ContagionParams,
    out: *mut f64,
) -> ContagionStatus {
    guard(|| {
        let p: FinancialParams = (*deref(params, "params")?).into();
        let crit = CriticalDegrees::compute(&p)?;
        write_out(out, mean_failures_mf(&degree_law(family, z)?, crit.k1_star), "out")
    })
}

/// Mean-field `P(F)` for `F = 0..len` written to `out`.
///
/// # Safety
/// `params` must be valid and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn contagion_mf_distribution(
    family: ContagionFamily,
    z: f64,
    params: *const ContagionParams,
    out: *mut f64,
    len: usize,
) -> ContagionStatus {
    guard(|| {
        if len == 0 {
            return Ok(());
        }
        let p: FinancialParams = (*deref(params, "params")?).into();
        let crit = CriticalDegrees::compute(&p)?;
        let d = failures_dist_mf(&degree_law(family, z)?, crit.k1_star, len - 1);
        copy_out(&d.mass, out, len)
    })
}
