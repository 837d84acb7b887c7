//! Financial parameters and per-bank balance sheets.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgen::NetworkGraph;

/// Model-wide financial parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinancialParams {
    /// Gross external return `R` of unshocked banks.
    #[serde(rename = "R")]
    pub external_rate: f64,
    /// Gross interbank rate `r`.
    #[serde(rename = "r")]
    pub interbank_rate: f64,
    /// Liquidity ratio `f`, liquid assets over total assets.
    #[serde(rename = "f", deserialize_with = "de_ratio")]
    pub liquidity: f64,
    /// Leverage ratio `Λ`, net worth over total assets.
    #[serde(rename = "lambda", deserialize_with = "de_ratio")]
    pub leverage: f64,
    /// Gross external return of the shocked bank.
    #[serde(default)]
    pub shocked_rate: f64,
}

impl Default for FinancialParams {
    fn default() -> Self {
        Self::standard()
    }
}

impl FinancialParams {
    /// `R = 1.02`, `r = 1.01`, `f = 50%`, `Λ = 3%`, shocked return 0.
    pub const fn standard() -> Self {
        Self {
            external_rate: 1.02,
            interbank_rate: 1.01,
            liquidity: 0.5,
            leverage: 0.03,
            shocked_rate: 0.0,
        }
    }

    pub fn new(external_rate: f64, interbank_rate: f64, liquidity: f64, leverage: f64) -> Result<Self> {
        let p = Self {
            external_rate,
            interbank_rate,
            liquidity,
            leverage,
            shocked_rate: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.external_rate,
            self.interbank_rate,
            self.liquidity,
            self.leverage,
            self.shocked_rate,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("financial parameters must be finite"));
        }
        if !(0.0..1.0).contains(&self.liquidity) {
            return Err(Error::domain(format!("liquidity ratio f must lie in [0, 1), got {}", self.liquidity)));
        }
        if !(0.0..1.0).contains(&self.leverage) {
            return Err(Error::domain(format!("leverage ratio must lie in [0, 1), got {}", self.leverage)));
        }
        if self.interbank_rate <= 1.0 {
            return Err(Error::domain(format!("interbank rate r must exceed 1, got {}", self.interbank_rate)));
        }
        if self.external_rate < 0.0 || self.shocked_rate < 0.0 {
            return Err(Error::domain("external rates must be >= 0"));
        }
        Ok(())
    }

    /// `[(R-1)(1-Λ) + Λ] / (1-f)`: net resources per unit degree of an
    /// unshocked bank on a regular graph, before interbank receipts.
    pub fn unit_surplus(&self) -> f64 {
        self.surplus_coefficient(self.external_rate)
    }

    pub(crate) fn surplus_coefficient(&self, rate: f64) -> f64 {
        ((rate - 1.0) * (1.0 - self.leverage) + self.leverage) / (1.0 - self.liquidity)
    }
}

/// Parses a ratio written either as a plain number (`0.03`) or a
/// percentage (`3%`).
pub fn parse_ratio(text: &str) -> Result<f64> {
    let t = text.trim();
    let (num, scale) = match t.strip_suffix('%') {
        Some(n) => (n.trim_end(), 0.01),
        None => (t, 1.0),
    };
    num.parse::<f64>()
        .map(|v| v * scale)
        .map_err(|_| Error::domain(format!("`{text}` is not a number or percentage")))
}

fn de_ratio<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Ratio {
        Num(f64),
        Text(String),
    }
    match Ratio::deserialize(d)? {
        Ratio::Num(v) => Ok(v),
        Ratio::Text(s) => parse_ratio(&s).map_err(serde::de::Error::custom),
    }
}

/// Balance sheet of one bank. Every field is in currency units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceSheet {
    pub liquid: f64,
    pub illiquid: f64,
    pub senior: f64,
    pub interbank_borrowed: f64,
    pub interbank_lent: f64,
    pub net_worth: f64,
}

impl BalanceSheet {
    pub fn total_assets(&self) -> f64 {
        self.interbank_lent + self.liquid + self.illiquid
    }

    /// `b + s`; net worth is not counted as a liability here.
    pub fn total_liabilities(&self) -> f64 {
        self.interbank_borrowed + self.senior
    }

    /// Residual of `l + λ + ι = b + s + K`.
    pub fn identity_residual(&self) -> f64 {
        self.total_assets() - self.total_liabilities() - self.net_worth
    }
}

/// Sheets implied by uniform ratios `(f, Λ)` and no illiquid assets.
///
/// Total assets are `A = l/(1-f)`, so `λ = f A`, `K = Λ A` and the senior
/// liabilities close the identity, `s = A - K - b`. On reciprocal unit-loan
/// graphs `l = b = k` and this gives `λ = f k/(1-f)`, `s = (f-Λ) k/(1-f)` and
/// `K = Λ k/(1-f)`.
pub fn build_sheets(graph: &NetworkGraph, params: &FinancialParams) -> Result<Vec<BalanceSheet>> {
    params.validate()?;
    let borrowed = graph.borrowed();
    let lent = graph.lent();
    let scale = 1.0 / (1.0 - params.liquidity);
    Ok(borrowed
        .iter()
        .zip(&lent)
        .map(|(&b, &l)| {
            let assets = l * scale;
            let liquid = params.liquidity * assets;
            let net_worth = params.leverage * assets;
            BalanceSheet {
                liquid,
                illiquid: 0.0,
                senior: assets - net_worth - b,
                interbank_borrowed: b,
                interbank_lent: l,
                net_worth,
            }
        })
        .collect())
}

/// Profit `ρ = (R_i - 1) max(b + s, b)` of an investment at gross rate `rate`.
pub fn profit(sheet: &BalanceSheet, rate: f64) -> f64 {
    (rate - 1.0) * (sheet.interbank_borrowed + sheet.senior.max(0.0))
}

/// One record of a sheet-override file: `id λ ι s R_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SheetOverride {
    pub bank: usize,
    pub liquid: f64,
    pub illiquid: f64,
    pub senior: f64,
    pub rate: f64,
}

pub fn parse_sheet_overrides(text: &str, path: &Path) -> Result<Vec<SheetOverride>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let perr = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(perr(format!("expected `id liquid illiquid senior rate`, got {} fields", fields.len())));
        }
        let bank = fields[0].parse::<usize>().map_err(|e| perr(format!("bad bank id: {e}")))?;
        let mut vals = [0.0; 4];
        for (v, f) in vals.iter_mut().zip(&fields[1..]) {
            *v = f.parse::<f64>().map_err(|e| perr(format!("bad number `{f}`: {e}")))?;
            if !v.is_finite() {
                return Err(perr(format!("non-finite value `{f}`")));
            }
        }
        if vals[0] < 0.0 || vals[1] < 0.0 || vals[3] < 0.0 {
            return Err(perr("liquid, illiquid and rate must be >= 0".into()));
        }
        out.push(SheetOverride {
            bank,
            liquid: vals[0],
            illiquid: vals[1],
            senior: vals[2],
            rate: vals[3],
        });
    }
    Ok(out)
}

pub fn read_sheet_overrides(path: &Path) -> Result<Vec<SheetOverride>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sheet_overrides(&text, path)
}

/// Replaces the asset/liability mix of the listed banks and sets their
/// external rate. Interbank positions still come from the graph and the net
/// worth is recomputed from the accounting identity.
pub fn apply_overrides(
    sheets: &mut [BalanceSheet],
    rates: &mut [f64],
    overrides: &[SheetOverride],
) -> Result<()> {
    for o in overrides {
        let sheet = sheets
            .get_mut(o.bank)
            .ok_or_else(|| Error::domain(format!("override for unknown bank {}", o.bank)))?;
        sheet.liquid = o.liquid;
        sheet.illiquid = o.illiquid;
        sheet.senior = o.senior;
        sheet.net_worth = sheet.interbank_lent + o.liquid + o.illiquid - sheet.interbank_borrowed - o.senior;
        rates[o.bank] = o.rate;
    }
    Ok(())
}
