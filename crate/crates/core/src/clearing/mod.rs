//! Interbank clearing: the repayment fixed point, updated net worths and the
//! classification of banks after a shock.
//!
//! A bank `i` owes `r b_i` in total and pays its creditors pro rata to their
//! loans. Writing `x_i` for the total it pays, the lender of a loan of weight
//! `w` to `j` receives `w x_j / b_j`. The clearing vector is the greatest
//! solution of
//!
//! ```text
//! x_i = [ min{ ρ_i + λ_i - s_i + Σ_j w_ij x_j / b_j , r b_i } ]⁺
//! ```
//!
//! reached by Jacobi descent from full repayment `x_i = r b_i`.

mod oracle;
mod table;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::balance::{profit, BalanceSheet, FinancialParams};
use crate::error::{Error, Result};
use crate::netgen::NetworkGraph;

pub use oracle::{brute_force_oracle, ORACLE_MAX_BANKS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once the sup-norm change between iterates drops below this.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Tolerance for classifying failed and critical banks.
    pub class_eps: f64,
    /// Refine the converged iterate by solving the piecewise-linear system
    /// exactly in the regimes it identifies.
    pub polish: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iter: 100_000,
            class_eps: 1e-8,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BankStatus {
    Safe,
    Critical,
    Failed,
    Shocked,
    /// No loans at all: outside the interbank network, never counted.
    Isolated,
}

impl fmt::Display for BankStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BankStatus::Safe => "safe",
            BankStatus::Critical => "critical",
            BankStatus::Failed => "failed",
            BankStatus::Shocked => "shocked",
            BankStatus::Isolated => "isolated",
        })
    }
}

/// Outcome of a clearing solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ClearingResult {
    /// Total interbank payment `x_i` of each bank.
    pub repayments: Vec<f64>,
    /// Updated net worth `K'_i`.
    pub net_worths: Vec<f64>,
    /// `ρ_i + λ_i - s_i` plus interbank receipts at the solution.
    pub resources: Vec<f64>,
    /// Full interbank obligation `r b_i`.
    pub obligations: Vec<f64>,
    pub statuses: Vec<BankStatus>,
    /// Banks whose resources equal their obligation within the
    /// classification tolerance. A critical bank has zero net worth and is
    /// therefore also failed unless it holds illiquid assets.
    pub critical: Vec<bool>,
    /// Banks with neither claims nor debts.
    pub isolated: Vec<bool>,
    pub shocked: Option<usize>,
    /// Failed banks other than the shocked one.
    pub induced_failures: usize,
    pub iterations: usize,
    /// Sup-norm fixed-point residual `|x - Φ(x)|`.
    pub residual: f64,
}

impl ClearingResult {
    /// Payment `(debtor, creditor, amount)` on every loan, where the debtor
    /// pays `w x_debtor / b_debtor` on a loan of weight `w`.
    pub fn pairwise(&self, graph: &NetworkGraph) -> Vec<(usize, usize, f64)> {
        let borrowed = graph.borrowed();
        graph
            .edges()
            .iter()
            .map(|e| {
                let b = borrowed[e.borrower];
                let paid = if b > 0.0 {
                    e.weight * self.repayments[e.borrower] / b
                } else {
                    0.0
                };
                (e.borrower, e.lender, paid)
            })
            .collect()
    }

    pub fn count(&self, status: BankStatus) -> usize {
        self.statuses.iter().filter(|&&s| s == status).count()
    }
}

/// A clearing instance with everything the map `Φ` needs precomputed.
#[derive(Debug, Clone)]
pub struct ClearingProblem {
    /// `ρ_i + λ_i - s_i`
    base: Vec<f64>,
    illiquid: Vec<f64>,
    obligation: Vec<f64>,
    has_debt: Vec<bool>,
    // claims held by each lender, CSR: (borrower, weight / b_borrower)
    claim_start: Vec<usize>,
    claim_borrower: Vec<usize>,
    claim_share: Vec<f64>,
    shocked: Option<usize>,
}

impl ClearingProblem {
    /// Builds a problem with an explicit external rate per bank.
    pub fn new(
        graph: &NetworkGraph,
        sheets: &[BalanceSheet],
        rates: &[f64],
        interbank_rate: f64,
        shocked: Option<usize>,
    ) -> Result<Self> {
        let n = graph.node_count();
        if sheets.len() != n || rates.len() != n {
            return Err(Error::domain(format!(
                "expected {n} sheets and rates, got {} and {}",
                sheets.len(),
                rates.len()
            )));
        }
        if !(interbank_rate.is_finite() && interbank_rate > 0.0) {
            return Err(Error::domain("interbank rate must be positive"));
        }
        if let Some(s) = shocked {
            if s >= n {
                return Err(Error::domain(format!("shocked bank {s} outside 0..{n}")));
            }
        }
        let borrowed = graph.borrowed();
        for (i, (s, &rate)) in sheets.iter().zip(rates).enumerate() {
            let vals = [s.liquid, s.illiquid, s.senior, s.interbank_borrowed, s.interbank_lent, s.net_worth, rate];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(format!("bank {i}: non-finite balance sheet entry")));
            }
            if s.liquid < 0.0 || s.illiquid < 0.0 || rate < 0.0 {
                return Err(Error::domain(format!("bank {i}: negative liquid, illiquid or rate")));
            }
            if (s.interbank_borrowed - borrowed[i]).abs() > 1e-9 * (1.0 + borrowed[i]) {
                return Err(Error::domain(format!(
                    "bank {i}: sheet borrowing {} disagrees with graph {}",
                    s.interbank_borrowed, borrowed[i]
                )));
            }
        }
        let base = sheets
            .iter()
            .zip(rates)
            .map(|(s, &rate)| profit(s, rate) + s.liquid - s.senior)
            .collect();
        let mut claim_start = vec![0usize; n + 1];
        for e in graph.edges() {
            claim_start[e.lender + 1] += 1;
        }
        for i in 0..n {
            claim_start[i + 1] += claim_start[i];
        }
        let mut fill = claim_start.clone();
        let mut claim_borrower = vec![0usize; graph.loan_count()];
        let mut claim_share = vec![0.0; graph.loan_count()];
        for e in graph.edges() {
            let slot = fill[e.lender];
            fill[e.lender] += 1;
            claim_borrower[slot] = e.borrower;
            claim_share[slot] = e.weight / borrowed[e.borrower];
        }
        Ok(Self {
            base,
            illiquid: sheets.iter().map(|s| s.illiquid).collect(),
            obligation: borrowed.iter().map(|b| interbank_rate * b).collect(),
            has_debt: borrowed.iter().map(|&b| b > 0.0).collect(),
            claim_start,
            claim_borrower,
            claim_share,
            shocked,
        })
    }

    /// Every bank earns `R` except the shocked one, which earns the shocked rate.
    pub fn from_params(
        graph: &NetworkGraph,
        sheets: &[BalanceSheet],
        params: &FinancialParams,
        shocked: Option<usize>,
    ) -> Result<Self> {
        params.validate()?;
        let rates = shock_rates(graph.node_count(), params, shocked);
        Self::new(graph, sheets, &rates, params.interbank_rate, shocked)
    }

    pub fn bank_count(&self) -> usize {
        self.base.len()
    }

    pub fn obligations(&self) -> &[f64] {
        &self.obligation
    }

    pub(crate) fn has_debt(&self, i: usize) -> bool {
        self.has_debt[i]
    }

    pub(crate) fn base(&self, i: usize) -> f64 {
        self.base[i]
    }

    pub(crate) fn claims(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.claim_start[i]..self.claim_start[i + 1];
        self.claim_borrower[range.clone()]
            .iter()
            .copied()
            .zip(self.claim_share[range].iter().copied())
    }

    /// Interbank receipts of bank `i` given payments `x`.
    pub fn incoming(&self, x: &[f64], i: usize) -> f64 {
        self.claims(i).map(|(j, share)| share * x[j]).sum()
    }

    /// Resources `ρ_i + λ_i - s_i + receipts` available to repay.
    pub fn resources(&self, x: &[f64]) -> Vec<f64> {
        (0..self.bank_count())
            .map(|i| self.base[i] + self.incoming(x, i))
            .collect()
    }

    /// One application of the clearing map.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = if self.has_debt[i] {
                (self.base[i] + self.incoming(x, i)).min(self.obligation[i]).max(0.0)
            } else {
                0.0
            };
        }
    }

    /// Sup-norm distance between `x` and its image.
    pub fn fixed_point_residual(&self, x: &[f64]) -> f64 {
        let mut image = vec![0.0; x.len()];
        self.apply(x, &mut image);
        x.iter()
            .zip(&image)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Greatest fixed point by monotone Jacobi descent from full repayment.
    pub fn solve(&self, opts: &SolverOptions) -> Result<ClearingResult> {
        let n = self.bank_count();
        let mut x: Vec<f64> = (0..n)
            .map(|i| if self.has_debt[i] { self.obligation[i] } else { 0.0 })
            .collect();
        let mut next = vec![0.0; n];
        let mut change = f64::INFINITY;
        let mut iterations = 0;
        while iterations < opts.max_iter {
            iterations += 1;
            self.apply(&x, &mut next);
            change = 0.0;
            for (i, (&new, &old)) in next.iter().zip(&x).enumerate() {
                if new > old {
                    return Err(Error::NonMonotone { bank: i, iteration: iterations });
                }
                change = f64::max(change, old - new);
            }
            std::mem::swap(&mut x, &mut next);
            if change < opts.tolerance {
                break;
            }
        }
        if change >= opts.tolerance {
            return Err(Error::NonConvergence {
                iterations,
                residual: change,
            });
        }
        if opts.polish {
            if let Some(exact) = self.polish(&x) {
                x = exact;
            }
        }
        let residual = self.fixed_point_residual(&x);
        Ok(self.evaluate(x, opts.class_eps, iterations, residual))
    }

    /// Solves the linear system for the regimes (full, partial, zero) that
    /// `x` exhibits and returns the solution if it reproduces those regimes.
    fn polish(&self, x: &[f64]) -> Option<Vec<f64>> {
        const MAX_PARTIAL: usize = 2000;
        let n = self.bank_count();
        let res = self.resources(x);
        let mut index = vec![usize::MAX; n];
        let mut partial = Vec::new();
        let mut candidate = vec![0.0; n];
        for i in 0..n {
            if !self.has_debt[i] {
                continue;
            }
            if res[i] >= self.obligation[i] {
                candidate[i] = self.obligation[i];
            } else if res[i] > 0.0 {
                index[i] = partial.len();
                partial.push(i);
            }
        }
        if partial.len() > MAX_PARTIAL {
            return None;
        }
        if !partial.is_empty() {
            let p = partial.len();
            let mut a = DMatrix::<f64>::identity(p, p);
            let mut rhs = DVector::<f64>::zeros(p);
            for (row, &i) in partial.iter().enumerate() {
                rhs[row] = self.base[i];
                for (j, share) in self.claims(i) {
                    if index[j] != usize::MAX {
                        a[(row, index[j])] -= share;
                    } else {
                        rhs[row] += share * candidate[j];
                    }
                }
            }
            let sol = a.lu().solve(&rhs)?;
            for (row, &i) in partial.iter().enumerate() {
                candidate[i] = sol[row];
            }
        }
        let scale = 1.0 + self.obligation.iter().fold(0.0, |m: f64, &v| m.max(v));
        let tol = 1e-9 * scale;
        let new_res = self.resources(&candidate);
        for i in 0..n {
            if !self.has_debt[i] {
                continue;
            }
            let ok = if index[i] != usize::MAX {
                candidate[i] >= -tol && candidate[i] <= self.obligation[i] + tol
            } else if candidate[i] > 0.0 {
                new_res[i] >= self.obligation[i] - tol
            } else {
                new_res[i] <= tol
            };
            if !ok || (candidate[i] - x[i]).abs() > 1e-6 * scale {
                return None;
            }
            candidate[i] = candidate[i].clamp(0.0, self.obligation[i]);
        }
        Some(candidate)
    }

    /// Net worths, statuses and failure count for a payment vector.
    pub fn evaluate(&self, x: Vec<f64>, class_eps: f64, iterations: usize, residual: f64) -> ClearingResult {
        let resources = self.resources(&x);
        let net_worths: Vec<f64> = (0..self.bank_count())
            .map(|i| resources[i] + self.illiquid[i] - x[i])
            .collect();
        let mut result = ClearingResult {
            repayments: x,
            net_worths,
            resources,
            obligations: self.obligation.clone(),
            statuses: Vec::new(),
            critical: Vec::new(),
            isolated: (0..self.bank_count())
                .map(|i| !self.has_debt[i] && self.claim_start[i] == self.claim_start[i + 1])
                .collect(),
            shocked: self.shocked,
            induced_failures: 0,
            iterations,
            residual,
        };
        let (statuses, critical) = classify_with_flags(&result, class_eps);
        result.statuses = statuses;
        result.critical = critical;
        result.induced_failures = count_failures(&result);
        result
    }
}

/// External rate of every bank: `R`, except the shocked rate for `shocked`.
pub fn shock_rates(n: usize, params: &FinancialParams, shocked: Option<usize>) -> Vec<f64> {
    let mut rates = vec![params.external_rate; n];
    if let Some(s) = shocked {
        if s < n {
            rates[s] = params.shocked_rate;
        }
    }
    rates
}

/// Clears the network after shocking `shocked_bank` under uniform parameters.
pub fn solve_repayments(
    graph: &NetworkGraph,
    sheets: &[BalanceSheet],
    params: &FinancialParams,
    shocked_bank: usize,
) -> Result<ClearingResult> {
    ClearingProblem::from_params(graph, sheets, params, Some(shocked_bank))?.solve(&SolverOptions::default())
}

fn classify_with_flags(result: &ClearingResult, eps: f64) -> (Vec<BankStatus>, Vec<bool>) {
    let n = result.repayments.len();
    let critical: Vec<bool> = (0..n)
        .map(|i| result.obligations[i] > 0.0 && (result.resources[i] - result.obligations[i]).abs() <= eps)
        .collect();
    let statuses = (0..n)
        .map(|i| {
            if result.shocked == Some(i) {
                BankStatus::Shocked
            } else if result.isolated.get(i).copied().unwrap_or(false) {
                BankStatus::Isolated
            } else if result.net_worths[i] <= eps {
                BankStatus::Failed
            } else if critical[i] {
                BankStatus::Critical
            } else {
                BankStatus::Safe
            }
        })
        .collect();
    (statuses, critical)
}

/// Status of every bank: the shocked bank first, then banks without loans,
/// then failure (`K' <= eps`), then criticality (resources within `eps` of
/// the obligation).
pub fn classify(result: &ClearingResult, eps: f64) -> Vec<BankStatus> {
    classify_with_flags(result, eps).0
}

/// Number of failed banks other than the shocked one.
pub fn count_failures(result: &ClearingResult) -> usize {
    result
        .statuses
        .iter()
        .enumerate()
        .filter(|&(i, &s)| s == BankStatus::Failed && result.shocked != Some(i))
        .count()
}
