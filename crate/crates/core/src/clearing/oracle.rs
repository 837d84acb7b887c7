//! Exhaustive regime enumeration for small networks.
//!
//! Each indebted bank is either paying in full, paying everything it has, or
//! paying nothing. For every one of the `3^N` assignments the partial payers
//! solve a linear system; assignments whose solution reproduces the assumed
//! regimes are fixed points, and the one with the largest total payment is the
//! greatest fixed point.

use super::{ClearingProblem, ClearingResult, SolverOptions};
use crate::balance::{BalanceSheet, FinancialParams};
use crate::error::{Error, Result};
use crate::netgen::NetworkGraph;

pub const ORACLE_MAX_BANKS: usize = 10;

#[derive(Clone, Copy, PartialEq)]
enum Regime {
    Full,
    Partial,
    Zero,
}

pub fn brute_force_oracle(
    graph: &NetworkGraph,
    sheets: &[BalanceSheet],
    params: &FinancialParams,
    shocked_bank: usize,
) -> Result<ClearingResult> {
    ClearingProblem::from_params(graph, sheets, params, Some(shocked_bank))?.brute_force(&SolverOptions::default())
}

impl ClearingProblem {
    /// Greatest fixed point by enumerating all payment regimes.
    pub fn brute_force(&self, opts: &SolverOptions) -> Result<ClearingResult> {
        let n = self.bank_count();
        if n > ORACLE_MAX_BANKS {
            return Err(Error::TooLarge {
                what: "oracle network",
                size: n,
                limit: ORACLE_MAX_BANKS,
            });
        }
        let debtors: Vec<usize> = (0..n).filter(|&i| self.has_debt(i)).collect();
        let scale = 1.0 + self.obligations().iter().fold(0.0, |m: f64, &v| m.max(v));
        let tol = 1e-10 * scale;
        let total = 3usize.pow(debtors.len() as u32);
        let mut regimes = vec![Regime::Zero; n];
        let mut best: Option<(f64, Vec<f64>)> = None;
        for code in 0..total {
            let mut c = code;
            for &i in &debtors {
                regimes[i] = match c % 3 {
                    0 => Regime::Full,
                    1 => Regime::Partial,
                    _ => Regime::Zero,
                };
                c /= 3;
            }
            let Some(x) = self.solve_regimes(&regimes) else {
                continue;
            };
            if !self.consistent(&x, &regimes, tol) {
                continue;
            }
            let sum: f64 = x.iter().sum();
            if best.as_ref().is_none_or(|(s, _)| sum > *s) {
                best = Some((sum, x));
            }
        }
        // a fixed point always exists; none found means a degenerate system
        let (_, x) = best.ok_or(Error::NonConvergence {
            iterations: total,
            residual: f64::NAN,
        })?;
        let residual = self.fixed_point_residual(&x);
        Ok(self.evaluate(x, opts.class_eps, 0, residual))
    }

    fn solve_regimes(&self, regimes: &[Regime]) -> Option<Vec<f64>> {
        let n = self.bank_count();
        let mut x = vec![0.0; n];
        let partial: Vec<usize> = (0..n)
            .filter(|&i| self.has_debt(i) && regimes[i] == Regime::Partial)
            .collect();
        for i in 0..n {
            if self.has_debt(i) && regimes[i] == Regime::Full {
                x[i] = self.obligations()[i];
            }
        }
        if partial.is_empty() {
            return Some(x);
        }
        let p = partial.len();
        let pos = |j: usize| partial.iter().position(|&q| q == j);
        // augmented matrix [A | b] for (I - M_PP) x_P = base_P + M_PF x_F
        let mut m = vec![vec![0.0; p + 1]; p];
        for (row, &i) in partial.iter().enumerate() {
            m[row][row] = 1.0;
            m[row][p] = self.base(i);
            for (j, share) in self.claims(i) {
                match pos(j) {
                    Some(col) => m[row][col] -= share,
                    None => m[row][p] += share * x[j],
                }
            }
        }
        let sol = gauss_solve(m)?;
        for (row, &i) in partial.iter().enumerate() {
            x[i] = sol[row];
        }
        Some(x)
    }

    fn consistent(&self, x: &[f64], regimes: &[Regime], tol: f64) -> bool {
        (0..self.bank_count()).all(|i| {
            if !self.has_debt(i) {
                return true;
            }
            let res = self.base(i) + self.incoming(x, i);
            let ob = self.obligations()[i];
            match regimes[i] {
                Regime::Full => res >= ob - tol,
                Regime::Zero => res <= tol,
                Regime::Partial => res > -tol && res < ob + tol && (x[i] - res).abs() <= tol,
            }
        })
    }
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn gauss_solve(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let p = m.len();
    for col in 0..p {
        let pivot = (col..p).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..p {
            let factor = m[row][col] / m[col][col];
            if factor != 0.0 {
                let (upper, lower) = m.split_at_mut(row);
                for (dst, src) in lower[0][col..=p].iter_mut().zip(&upper[col][col..=p]) {
                    *dst -= factor * src;
                }
            }
        }
    }
    let mut sol = vec![0.0; p];
    for row in (0..p).rev() {
        let tail: f64 = (row + 1..p).map(|k| m[row][k] * sol[k]).sum();
        sol[row] = (m[row][p] - tail) / m[row][row];
    }
    Some(sol)
}

#[cfg(test)]
mod tests {
    use super::gauss_solve;

    #[test]
    fn gauss_small_system() {
        let sol = gauss_solve(vec![vec![0.0, 2.0, 4.0], vec![1.0, 1.0, 3.0]]).unwrap();
        assert!((sol[0] - 1.0).abs() < 1e-14 && (sol[1] - 2.0).abs() < 1e-14);
        assert!(gauss_solve(vec![vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0]]).is_none());
    }
}
