//! Exact clearing on an infinite Cayley tree shocked at its root.
//!
//! All banks at distance `d` from the root pay the same amount `x_d`. With
//! `c = [(R-1)(1-Λ)+Λ]/(1-f)` and the analogous coefficient `a` for the
//! shocked root,
//!
//! ```text
//! x_0 = [min{a k + x_1, r k}]⁺
//! x_d = min{c k + x_{d-1}/k + (k-1) x_{d+1}/k, r k},   d >= 1
//! ```
//!
//! Trying q = 0, 1, 2, … defaulting shells with full repayment beyond shell
//! q turns the system into a finite tridiagonal one; the first q whose
//! solution reproduces its own assumptions is the answer.

use serde::Serialize;

use super::critical::CriticalDegrees;
use crate::balance::FinancialParams;
use crate::error::{Error, Result};

const CLASS_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellSolution {
    pub degree: usize,
    /// Number of failing shells around the shocked root.
    pub failed_shells: usize,
    /// `x_0 ..= x_{q+1}`; shells further out also pay `r k`.
    pub shell_repayments: Vec<f64>,
    /// `K'` of a bank in each listed shell; entry 0 is the shocked root.
    pub shell_net_worths: Vec<f64>,
    /// `Σ_{p=1}^{q} k (k-1)^{p-1}`.
    pub failures: u64,
}

#[derive(Clone, Copy, PartialEq)]
enum RootRegime {
    Zero,
    Partial,
    Full,
}

pub fn solve_cayley_shells(k: usize, params: &FinancialParams, max_depth: usize) -> Result<ShellSolution> {
    if k < 2 {
        return Err(Error::domain(format!("Cayley degree must be >= 2, got {k}")));
    }
    params.validate()?;
    let kf = k as f64;
    let full = params.interbank_rate * kf;
    let c = params.unit_surplus() * kf;
    let a = params.surplus_coefficient(params.shocked_rate) * kf;
    for q in 0..=max_depth {
        for regime in [RootRegime::Zero, RootRegime::Partial, RootRegime::Full] {
            let Some(x) = solve_trial(q, regime, kf, c, a, full) else {
                continue;
            };
            if consistent(&x, q, regime, kf, c, a, full) {
                let shell_net_worths = shell_net_worths(&x, kf, c, a, full);
                let failures = (1..=q)
                    .map(|p| (k as u64).saturating_mul((k as u64 - 1).saturating_pow(p as u32 - 1)))
                    .fold(0u64, u64::saturating_add);
                return Ok(ShellSolution {
                    degree: k,
                    failed_shells: q,
                    shell_repayments: x,
                    shell_net_worths,
                    failures,
                });
            }
        }
    }
    Err(Error::domain(format!(
        "contagion reaches beyond {max_depth} shells at degree {k}"
    )))
}

/// Solves for `x_0..=x_q` under the trial assumptions; returns `x_0..=x_{q+1}`.
fn solve_trial(q: usize, regime: RootRegime, k: f64, c: f64, a: f64, full: f64) -> Option<Vec<f64>> {
    let n = q + 1;
    // tridiagonal rows: lower * x_{d-1} + diag * x_d + upper * x_{d+1} = rhs
    let mut lower = vec![0.0; n];
    let diag = vec![1.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    match regime {
        RootRegime::Zero => rhs[0] = 0.0,
        RootRegime::Full => rhs[0] = full,
        RootRegime::Partial => {
            upper[0] = -1.0;
            rhs[0] = a;
        }
    }
    if q == 0 {
        // x_1 = r k is known
        rhs[0] -= upper[0] * full;
        upper[0] = 0.0;
    }
    for d in 1..n {
        lower[d] = -1.0 / k;
        rhs[d] = c;
        if d == q {
            rhs[d] += (k - 1.0) / k * full;
        } else {
            upper[d] = -(k - 1.0) / k;
        }
    }
    let mut x = thomas(&lower, &diag, &mut upper, &mut rhs)?;
    x.push(full);
    Some(x)
}

fn thomas(lower: &[f64], diag: &[f64], upper: &mut [f64], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    for i in 1..n {
        if d[i - 1].abs() < 1e-300 {
            return None;
        }
        let m = lower[i] / d[i - 1];
        d[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        if d[i].abs() < 1e-300 {
            return None;
        }
        let next = if i + 1 < n { upper[i] * x[i + 1] } else { 0.0 };
        x[i] = (rhs[i] - next) / d[i];
    }
    Some(x)
}

fn shell_resources(x: &[f64], d: usize, k: f64, c: f64, a: f64, full: f64) -> f64 {
    let outer = x.get(d + 1).copied().unwrap_or(full);
    if d == 0 {
        a + outer
    } else {
        c + x[d - 1] / k + (k - 1.0) * outer / k
    }
}

fn shell_net_worths(x: &[f64], k: f64, c: f64, a: f64, full: f64) -> Vec<f64> {
    (0..x.len())
        .map(|d| shell_resources(x, d, k, c, a, full) - x[d])
        .collect()
}

fn consistent(x: &[f64], q: usize, regime: RootRegime, k: f64, c: f64, a: f64, full: f64) -> bool {
    let tol = 1e-12 * (1.0 + full);
    let root = shell_resources(x, 0, k, c, a, full);
    let root_ok = match regime {
        RootRegime::Zero => root <= tol,
        RootRegime::Partial => root > -tol && root < full + tol,
        RootRegime::Full => root >= full - tol,
    };
    if !root_ok {
        return false;
    }
    // shells 1..=q default: they pay their resources, which fall short of r k
    for d in 1..=q {
        let res = shell_resources(x, d, k, c, a, full);
        if x[d] < -tol || res - full > CLASS_EPS {
            return false;
        }
    }
    // shell q+1 and beyond stay solvent
    shell_resources(x, q + 1, k, c, a, full) - full > CLASS_EPS
}

/// Failures predicted by the first two critical degrees: none above `k1*`,
/// the `k` first neighbours between `k2*` and `k1*`. `None` below `k2*` (or
/// when `k2*` is unavailable), where deeper critical degrees are needed.
pub fn cayley_step_prediction(k: usize, crit: &CriticalDegrees) -> Option<u64> {
    let kf = k as f64;
    if kf > crit.k1_star + 1e-9 {
        return Some(0);
    }
    match crit.k2_star {
        Some(k2) if kf > k2 + 1e-9 => Some(k as u64),
        _ => None,
    }
}
