//! Krawtchouk and Hermite polynomials, the binomial weight, and the
//! coordinates x̂ = Np + v = Np + √(2Npq)·x.

mod hermite;
mod krawtchouk;

pub use hermite::{hermite, hermite_conversions, hermite_explicit, hermite_real, hermite_small_x};
pub use krawtchouk::{
    krawtchouk_hypergeometric, krawtchouk_leibniz, krawtchouk_nonnormalized, krawtchouk_real,
    krawtchouk_rodrigues, orthogonality_norm, orthogonality_sum, self_duality_check, weight_rho,
    KrawtchoukParams,
};

use rug::{Float, Rational};

use crate::arith::{check_probability, rational_to_real, two_pq, Precision};
use crate::error::{ensure, Result};

/// A point given in one of the three coordinates x̂, v = x̂ − Np or
/// x = v/√(2Npq), with the other two derived. `v` stays exact whenever x̂ is.
#[derive(Clone, Debug)]
pub struct ScaledPoint {
    big_n: u64,
    p: Rational,
    exact_v: Option<Rational>,
    xhat: Float,
    v: Float,
    x: Float,
}

impl ScaledPoint {
    fn check(big_n: u64, p: &Rational) -> Result<()> {
        check_probability(p)?;
        ensure!(big_n >= 1, "N must be positive");
        Ok(())
    }

    fn scale(big_n: u64, p: &Rational, prec: Precision) -> Float {
        rational_to_real(&(two_pq(p) * Rational::from(big_n)), prec).sqrt()
    }

    pub fn from_v(big_n: u64, p: &Rational, v: Rational, prec: Precision) -> Result<Self> {
        Self::check(big_n, p)?;
        let xhat = Rational::from(big_n) * p + &v;
        let vf = rational_to_real(&v, prec);
        let x = Float::with_val(prec.bits(), &vf / Self::scale(big_n, p, prec));
        Ok(ScaledPoint {
            big_n,
            p: p.clone(),
            xhat: rational_to_real(&xhat, prec),
            v: vf,
            x,
            exact_v: Some(v),
        })
    }

    pub fn from_xhat(big_n: u64, p: &Rational, xhat: Rational, prec: Precision) -> Result<Self> {
        let v = xhat - Rational::from(big_n) * p;
        Self::from_v(big_n, p, v, prec)
    }

    pub fn from_x(big_n: u64, p: &Rational, x: Float, prec: Precision) -> Result<Self> {
        Self::check(big_n, p)?;
        let x = Float::with_val(prec.bits(), x);
        let v = Float::with_val(prec.bits(), &x * Self::scale(big_n, p, prec));
        let xhat = Float::with_val(
            prec.bits(),
            &v + rational_to_real(&(Rational::from(big_n) * p), prec),
        );
        Ok(ScaledPoint {
            big_n,
            p: p.clone(),
            exact_v: None,
            xhat,
            v,
            x,
        })
    }

    pub fn big_n(&self) -> u64 {
        self.big_n
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn xhat(&self) -> &Float {
        &self.xhat
    }

    pub fn v(&self) -> &Float {
        &self.v
    }

    pub fn x(&self) -> &Float {
        &self.x
    }

    pub fn v_exact(&self) -> Option<&Rational> {
        self.exact_v.as_ref()
    }

    pub fn xhat_exact(&self) -> Option<Rational> {
        self.exact_v
            .as_ref()
            .map(|v| Rational::from(self.big_n) * &self.p + v)
    }

    /// h = (2Npq)^{−1/2}, the x-step matching a unit step in x̂.
    pub fn h(&self) -> Float {
        let prec = Precision::new(self.x.prec()).expect("precision already validated");
        Self::scale(self.big_n, &self.p, prec).recip()
    }
}
