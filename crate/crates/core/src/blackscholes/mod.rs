//! Black-Scholes European analytics and the put-call symmetry transform.

pub mod faddeeva;
pub mod normal;

use crate::dual::Scalar;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub use faddeeva::{complex_cdf, complex_erfc, faddeeva_w};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    /// +1 for calls, -1 for puts.
    pub fn eta(self) -> f64 {
        match self {
            OptionKind::Call => 1.0,
            OptionKind::Put => -1.0,
        }
    }

    pub fn payoff(self, spot: f64, strike: f64) -> f64 {
        (self.eta() * (spot - strike)).max(0.0)
    }
}

/// Contract and model state. Rates and yields are continuously compounded
/// decimals and may take either sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub spot: f64,
    pub strike: f64,
    pub rate: f64,
    pub dividend: f64,
    pub vol: f64,
    pub maturity: f64,
    pub kind: OptionKind,
}

impl MarketParams {
    pub fn new(
        spot: f64,
        strike: f64,
        rate: f64,
        dividend: f64,
        vol: f64,
        maturity: f64,
        kind: OptionKind,
    ) -> Result<Self> {
        let p = Self { spot, strike, rate, dividend, vol, maturity, kind };
        p.validate()?;
        Ok(p)
    }

    pub fn put(spot: f64, strike: f64, rate: f64, dividend: f64, vol: f64, maturity: f64) -> Result<Self> {
        Self::new(spot, strike, rate, dividend, vol, maturity, OptionKind::Put)
    }

    pub fn call(spot: f64, strike: f64, rate: f64, dividend: f64, vol: f64, maturity: f64) -> Result<Self> {
        Self::new(spot, strike, rate, dividend, vol, maturity, OptionKind::Call)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("spot", self.spot),
            ("strike", self.strike),
            ("vol", self.vol),
            ("maturity", self.maturity),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and positive, got {v}")));
            }
        }
        if !self.rate.is_finite() || !self.dividend.is_finite() {
            return Err(Error::Domain("rate and dividend yield must be finite".into()));
        }
        Ok(())
    }

    pub fn with_spot(&self, spot: f64) -> Self {
        Self { spot, ..*self }
    }

    pub fn with_maturity(&self, maturity: f64) -> Self {
        Self { maturity, ..*self }
    }

    pub fn intrinsic(&self) -> f64 {
        self.kind.payoff(self.spot, self.strike)
    }
}

/// Standardized log-moneyness pair for spot `s`, level `b` and horizon `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D1D2 {
    pub d1: f64,
    pub d2: f64,
    pub tau: f64,
}

impl D1D2 {
    pub fn new(s: f64, b: f64, rate: f64, dividend: f64, vol: f64, tau: f64) -> Self {
        let sd = vol * tau.sqrt();
        let d1 = ((s / b).ln() + (rate - dividend + 0.5 * vol * vol) * tau) / sd;
        Self { d1, d2: d1 - sd, tau }
    }
}

/// European price for an arbitrary scalar type (derivatives or complex).
pub fn european_price_scalar<S: Scalar>(
    kind: OptionKind,
    s: S,
    strike: f64,
    rate: f64,
    dividend: f64,
    vol: f64,
    tau: f64,
) -> S {
    let sd = vol * tau.sqrt();
    let d1 = ((s.scale(1.0 / strike)).ln().shift((rate - dividend + 0.5 * vol * vol) * tau)).scale(1.0 / sd);
    let d2 = d1.shift(-sd);
    let df_r = (-rate * tau).exp();
    let df_q = (-dividend * tau).exp();
    match kind {
        OptionKind::Call => s * d1.ncdf().scale(df_q) - d2.ncdf().scale(strike * df_r),
        OptionKind::Put => (-d2).ncdf().scale(strike * df_r) - s * (-d1).ncdf().scale(df_q),
    }
}

/// Calendar-time derivative `dV/dt` (maturity fixed) for any scalar type.
pub fn european_theta_scalar<S: Scalar>(
    kind: OptionKind,
    s: S,
    strike: f64,
    rate: f64,
    dividend: f64,
    vol: f64,
    tau: f64,
) -> S {
    let sd = vol * tau.sqrt();
    let d1 = ((s.scale(1.0 / strike)).ln().shift((rate - dividend + 0.5 * vol * vol) * tau)).scale(1.0 / sd);
    let d2 = d1.shift(-sd);
    let df_r = (-rate * tau).exp();
    let df_q = (-dividend * tau).exp();
    let gamma_term = s * d1.npdf().scale(df_q * vol / (2.0 * tau.sqrt()));
    match kind {
        OptionKind::Call => {
            -gamma_term - d2.ncdf().scale(rate * strike * df_r) + s * d1.ncdf().scale(dividend * df_q)
        }
        OptionKind::Put => {
            -gamma_term + (-d2).ncdf().scale(rate * strike * df_r) - s * (-d1).ncdf().scale(dividend * df_q)
        }
    }
}

/// Black-Scholes European price.
pub fn european_price(p: &MarketParams) -> Result<f64> {
    p.validate()?;
    Ok(european_value(p.kind, p.spot, p.strike, p.rate, p.dividend, p.vol, p.maturity))
}

/// Unchecked European value with explicit time to maturity; `tau <= 0`
/// returns the payoff.
pub fn european_value(kind: OptionKind, s: f64, k: f64, r: f64, q: f64, vol: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return kind.payoff(s, k);
    }
    european_price_scalar(kind, s, k, r, q, vol, tau)
}

/// Calendar-time theta `dV/dt` of the European option, maturity held fixed.
/// Equals `-dV/dT`.
pub fn european_theta(p: &MarketParams) -> Result<f64> {
    p.validate()?;
    Ok(european_theta_scalar(p.kind, p.spot, p.strike, p.rate, p.dividend, p.vol, p.maturity))
}

pub fn european_delta(p: &MarketParams) -> Result<f64> {
    p.validate()?;
    let d = D1D2::new(p.spot, p.strike, p.rate, p.dividend, p.vol, p.maturity);
    let df_q = (-p.dividend * p.maturity).exp();
    Ok(match p.kind {
        OptionKind::Call => df_q * normal::cdf(d.d1),
        OptionKind::Put => -df_q * normal::cdf(-d.d1),
    })
}

/// Maps a call to the put with swapped spot/strike and rate/yield, whose
/// American value is identical.
pub fn symmetric_put_params(p: &MarketParams) -> Result<MarketParams> {
    if p.kind != OptionKind::Call {
        return Err(Error::Domain("put-call symmetry expects a call".into()));
    }
    p.validate()?;
    Ok(MarketParams {
        spot: p.strike,
        strike: p.spot,
        rate: p.dividend,
        dividend: p.rate,
        vol: p.vol,
        maturity: p.maturity,
        kind: OptionKind::Put,
    })
}
