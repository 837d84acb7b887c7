use serde::{Deserialize, Serialize};

use crate::balance::FinancialParams;
use crate::error::{Error, Result};

/// First and second critical degrees of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalDegrees {
    pub k1_star: f64,
    /// `None` where the closed form for the second shell does not apply.
    pub k2_star: Option<f64>,
    pub params: FinancialParams,
}

impl CriticalDegrees {
    pub fn compute(params: &FinancialParams) -> Result<Self> {
        let k1_star = critical_degree_1(params)?;
        let k2_star = match critical_degree_2(params) {
            Ok(v) => Some(v),
            Err(Error::Inapplicable(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            k1_star,
            k2_star,
            params: *params,
        })
    }
}

fn denominator(params: &FinancialParams) -> Result<f64> {
    params.validate()?;
    let d = (params.external_rate - 1.0) * (1.0 - params.leverage) + params.leverage;
    if d <= 0.0 {
        return Err(Error::domain(format!(
            "(R-1)(1-Λ)+Λ = {d} is not positive: no finite critical degree"
        )));
    }
    Ok(d)
}

/// Degree below which the first neighbours of a shocked bank fail:
///
/// ```text
/// k1* = ( r(1-f) - [r(1-f) + 2Λ - 1]⁺ ) / ( (R-1)(1-Λ) + Λ )
/// ```
pub fn critical_degree_1(params: &FinancialParams) -> Result<f64> {
    let d = denominator(params)?;
    let exposure = params.interbank_rate * (1.0 - params.liquidity);
    let recovered = (exposure + 2.0 * params.leverage - 1.0).max(0.0);
    Ok((exposure - recovered) / d)
}

/// `½ (√(1 + 4 r(1-f) / ((R-1)(1-Λ)+Λ)) - 1)` without checking that the
/// shocked bank repays nothing.
pub fn k2_closed_form(params: &FinancialParams) -> Result<f64> {
    let d = denominator(params)?;
    let exposure = params.interbank_rate * (1.0 - params.liquidity);
    Ok(0.5 * ((1.0 + 4.0 * exposure / d).sqrt() - 1.0))
}

/// Degree below which second neighbours fail as well. The closed form holds
/// when the shocked bank repays nothing, `r < (1-2Λ)/(1-f)`; otherwise use
/// [`solve_cayley_shells`](super::solve_cayley_shells).
pub fn critical_degree_2(params: &FinancialParams) -> Result<f64> {
    let bound = (1.0 - 2.0 * params.leverage) / (1.0 - params.liquidity);
    if params.interbank_rate >= bound {
        return Err(Error::Inapplicable(format!(
            "k2* closed form needs r < (1-2Λ)/(1-f) = {bound}; solve the Cayley shells instead"
        )));
    }
    k2_closed_form(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(big_r: f64, r: f64, f: f64, l: f64) -> FinancialParams {
        FinancialParams::new(big_r, r, f, l).unwrap()
    }

    #[test]
    fn standard_values() {
        let p = FinancialParams::standard();
        let k1 = critical_degree_1(&p).unwrap();
        assert!((k1 - 0.505 / 0.0494).abs() < 1e-12);
        assert!((k1 - 10.22).abs() < 0.01);
        let k2 = critical_degree_2(&p).unwrap();
        assert!((k2 - 0.5 * ((1.0 + 2.02 / 0.0494f64).sqrt() - 1.0)).abs() < 1e-12);
        assert!((k2 - 2.74).abs() < 0.005);
        assert!(k2 < 5.0);
        let both = CriticalDegrees::compute(&p).unwrap();
        assert!(both.k2_star.unwrap() < both.k1_star);
    }

    #[test]
    fn zero_ratio_limit() {
        for big_r in [1.01, 1.02, 1.05] {
            let k1 = critical_degree_1(&params(big_r, 1.01, 0.0, 0.0)).unwrap();
            assert!((k1 - 1.0 / (big_r - 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn leverage_ten_percent() {
        let k1 = critical_degree_1(&params(1.02, 1.01, 0.0, 0.1)).unwrap();
        assert!((k1 - 0.8 / 0.118).abs() < 1e-12);
        assert!((k1 - 6.7797).abs() < 1e-4);
    }

    #[test]
    fn k2_quadratic_identity() {
        let p = params(1.02, 1.01, 0.0, 0.0);
        let k2 = k2_closed_form(&p).unwrap();
        assert!((k2 - 6.63).abs() < 0.01);
        let k1 = critical_degree_1(&p).unwrap();
        assert!((k2 * k2 + k2 - p.interbank_rate * k1).abs() < 1e-9);
        assert!(matches!(critical_degree_2(&p), Err(Error::Inapplicable(_))));
        assert_eq!(CriticalDegrees::compute(&p).unwrap().k2_star, None);
    }

    #[test]
    fn non_positive_denominator() {
        let p = FinancialParams {
            external_rate: 0.5,
            leverage: 0.0,
            ..FinancialParams::standard()
        };
        assert!(matches!(critical_degree_1(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn decreasing_in_ratios_where_bracket_vanishes() {
        let step = 1e-4;
        for fi in 0..10 {
            for li in 0..10 {
                let f = 0.5 + 0.04 * fi as f64;
                let l = 0.01 * li as f64;
                let base = params(1.02, 1.01, f, l);
                assert!(base.interbank_rate * (1.0 - f) + 2.0 * l - 1.0 < 0.0);
                let k = critical_degree_1(&base).unwrap();
                let kf = critical_degree_1(&params(1.02, 1.01, f + step, l)).unwrap();
                let kl = critical_degree_1(&params(1.02, 1.01, f, l + step)).unwrap();
                assert!(kf < k && kl < k, "f={f} l={l}");
            }
        }
    }
}
