//! Shock contagion in interbank lending networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`netgen`]: Cayley trees, Erdős–Rényi and Barabási–Albert loan networks,
//!   their analytic (conditional) degree distributions and the edge-list format.
//! - [`balance`]: financial parameters and per-bank balance sheets.
//! - [`clearing`]: the interbank repayment fixed point, net-worth update,
//!   classification of banks and a brute-force regime-enumeration oracle.
//! - [`analytics`]: critical degrees, the exact Cayley shell solution and the
//!   mean-field failures distribution.
//! - [`ensemble`]: seeded Monte Carlo ensembles compared against mean-field
//!   predictions.

pub mod analytics;
pub mod balance;
pub mod clearing;
pub mod ensemble;
pub mod error;
pub mod netgen;

pub use balance::{BalanceSheet, FinancialParams};
pub use clearing::{BankStatus, ClearingResult, SolverOptions};
pub use error::{Error, Result};
pub use netgen::{DegreeDistribution, NetworkGraph};
