use std::collections::BTreeMap;
use std::fmt;

use rug::ops::Pow;
use rug::{Float, Rational};

use super::VPoly;
use crate::error::{Error, Result};

/// Element a + b·w of ℚ[v][w]/(w² − c), with c = `w_sq` a fixed rational
/// (2pq in practice). The reduction is applied eagerly, so no power of `w`
/// above one is ever stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadicalCoeff {
    rat: VPoly,
    rad: VPoly,
    w_sq: Rational,
}

impl RadicalCoeff {
    pub fn new(rat: VPoly, rad: VPoly, w_sq: Rational) -> Self {
        RadicalCoeff { rat, rad, w_sq }
    }

    pub fn zero(w_sq: &Rational) -> Self {
        Self::new(VPoly::zero(), VPoly::zero(), w_sq.clone())
    }

    pub fn one(w_sq: &Rational) -> Self {
        Self::from_poly(VPoly::one(), w_sq)
    }

    pub fn from_poly(p: VPoly, w_sq: &Rational) -> Self {
        Self::new(p, VPoly::zero(), w_sq.clone())
    }

    pub fn from_rational(c: Rational, w_sq: &Rational) -> Self {
        Self::from_poly(VPoly::constant(c), w_sq)
    }

    /// The formal radical itself.
    pub fn w(w_sq: &Rational) -> Self {
        Self::new(VPoly::zero(), VPoly::one(), w_sq.clone())
    }

    /// w^k reduced: w_sq^{⌊k/2⌋} times w when k is odd. Negative k is allowed
    /// (w is invertible because w_sq ≠ 0).
    pub fn w_pow(k: i32, w_sq: &Rational) -> Self {
        let half = k.div_euclid(2);
        let odd = k.rem_euclid(2) == 1;
        let factor = pow_i(w_sq, half);
        if odd {
            Self::new(VPoly::zero(), VPoly::constant(factor), w_sq.clone())
        } else {
            Self::from_rational(factor, w_sq)
        }
    }

    pub fn rational_part(&self) -> &VPoly {
        &self.rat
    }

    pub fn radical_part(&self) -> &VPoly {
        &self.rad
    }

    pub fn w_sq(&self) -> &Rational {
        &self.w_sq
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.rad.is_zero()
    }

    /// Both parts are constants.
    pub fn is_scalar(&self) -> bool {
        self.rat.is_constant() && self.rad.is_constant()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::new(
            &self.rat + &rhs.rat,
            &self.rad + &rhs.rad,
            self.w_sq.clone(),
        )
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self::new(
            &self.rat - &rhs.rat,
            &self.rad - &rhs.rad,
            self.w_sq.clone(),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(-&self.rat, -&self.rad, self.w_sq.clone())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        // (a + bw)(c + dw) = ac + bd·w² + (ad + bc)w
        let bd = &self.rad * &rhs.rad;
        let rat = &(&self.rat * &rhs.rat) + &bd.scale(&self.w_sq);
        let rad = &(&self.rat * &rhs.rad) + &(&self.rad * &rhs.rat);
        Self::new(rat, rad, self.w_sq.clone())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.rat.scale(c), self.rad.scale(c), self.w_sq.clone())
    }

    pub fn mul_poly(&self, p: &VPoly) -> Self {
        Self::new(&self.rat * p, &self.rad * p, self.w_sq.clone())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(&self.w_sq);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Inverse of a nonzero scalar element: (a − bw)/(a² − c b²).
    pub fn inverse_scalar(&self) -> Option<Self> {
        if !self.is_scalar() || self.is_zero() {
            return None;
        }
        let a = self.rat.coeff(0);
        let b = self.rad.coeff(0);
        let norm = Rational::from(&a * &a) - Rational::from(&b * &b) * &self.w_sq;
        if norm.cmp0().is_eq() {
            return None;
        }
        Some(Self::new(
            VPoly::constant(a / &norm),
            VPoly::constant(-b / norm),
            self.w_sq.clone(),
        ))
    }

    /// Numeric value with the formal variable at `var` and the radical at `w`.
    pub fn eval_real(&self, var: &Float, w: &Float) -> Float {
        let a = self.rat.eval_real(var);
        if self.rad.is_zero() {
            return a;
        }
        a + self.rad.eval_real(var) * w
    }

    pub fn display_with(&self, var: &str) -> String {
        match (self.rat.is_zero(), self.rad.is_zero()) {
            (true, true) => "0".to_string(),
            (false, true) => self.rat.display_with(var),
            (true, false) => format!("({})*w", self.rad.display_with(var)),
            (false, false) => format!(
                "{} + ({})*w",
                self.rat.display_with(var),
                self.rad.display_with(var)
            ),
        }
    }
}

impl fmt::Display for RadicalCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("v"))
    }
}

fn pow_i(base: &Rational, e: i32) -> Rational {
    let mag = Rational::from(base.pow(e.unsigned_abs()));
    if e < 0 {
        mag.recip()
    } else {
        mag
    }
}

fn opt_min(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Truncated Laurent series in ε = N^{−1/2} with [`RadicalCoeff`] coefficients.
///
/// `truncation` is the first exponent that is *not* known: the series stands
/// for Σ_{k < truncation} c_k ε^k + O(ε^truncation). `None` means the series
/// is exact (a Laurent polynomial).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsymptoticSeries {
    terms: BTreeMap<i32, RadicalCoeff>,
    truncation: Option<i32>,
    w_sq: Rational,
}

impl AsymptoticSeries {
    pub fn zero(w_sq: &Rational, truncation: Option<i32>) -> Self {
        AsymptoticSeries {
            terms: BTreeMap::new(),
            truncation,
            w_sq: w_sq.clone(),
        }
    }

    pub fn one(w_sq: &Rational, truncation: Option<i32>) -> Self {
        Self::monomial(0, RadicalCoeff::one(w_sq), truncation)
    }

    pub fn monomial(exp: i32, coeff: RadicalCoeff, truncation: Option<i32>) -> Self {
        let mut s = Self::zero(&coeff.w_sq().clone(), truncation);
        s.add_term(exp, coeff);
        s
    }

    pub fn from_terms(
        w_sq: &Rational,
        terms: impl IntoIterator<Item = (i32, RadicalCoeff)>,
        truncation: Option<i32>,
    ) -> Self {
        let mut s = Self::zero(w_sq, truncation);
        for (e, c) in terms {
            s.add_term(e, c);
        }
        s
    }

    /// Adds c·ε^exp, ignoring it when exp is past the truncation order.
    pub fn add_term(&mut self, exp: i32, coeff: RadicalCoeff) {
        if self.truncation.is_some_and(|t| exp >= t) || coeff.is_zero() {
            return;
        }
        let updated = match self.terms.get(&exp) {
            Some(existing) => existing.add(&coeff),
            None => coeff,
        };
        if updated.is_zero() {
            self.terms.remove(&exp);
        } else {
            self.terms.insert(exp, updated);
        }
    }

    pub fn truncation_order(&self) -> Option<i32> {
        self.truncation
    }

    pub fn w_sq(&self) -> &Rational {
        &self.w_sq
    }

    /// Lowest exponent carrying a nonzero coefficient.
    pub fn valuation(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &RadicalCoeff)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    /// Coefficient of ε^exp; errors when exp is not below the truncation order.
    pub fn coefficient(&self, exp: i32) -> Result<RadicalCoeff> {
        if let Some(t) = self.truncation {
            if exp >= t {
                return Err(Error::Truncation {
                    required: i64::from(exp),
                    available: i64::from(t),
                });
            }
        }
        Ok(self
            .terms
            .get(&exp)
            .cloned()
            .unwrap_or_else(|| RadicalCoeff::zero(&self.w_sq)))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn truncate(&self, order: i32) -> Self {
        let truncation = opt_min(self.truncation, Some(order));
        Self::from_terms(
            &self.w_sq,
            self.terms.iter().map(|(e, c)| (*e, c.clone())),
            truncation,
        )
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = Self::zero(&self.w_sq, opt_min(self.truncation, rhs.truncation));
        for (e, c) in self.terms.iter().chain(rhs.terms.iter()) {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self::from_terms(
            &self.w_sq,
            self.terms.iter().map(|(e, c)| (*e, c.neg())),
            self.truncation,
        )
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    /// Product with the usual truncation rule
    /// min(val(a) + trunc(b), val(b) + trunc(a)).
    pub fn mul(&self, rhs: &Self) -> Self {
        let lead = |s: &Self| s.valuation().or(s.truncation);
        let bound = |val: Option<i32>, trunc: Option<i32>| match (val, trunc) {
            (Some(v), Some(t)) => Some(v + t),
            _ => None,
        };
        let truncation = if (self.is_zero() && self.truncation.is_none())
            || (rhs.is_zero() && rhs.truncation.is_none())
        {
            None
        } else {
            opt_min(
                bound(lead(self), rhs.truncation),
                bound(lead(rhs), self.truncation),
            )
        };
        let mut out = Self::zero(&self.w_sq, truncation);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea + eb;
                if truncation.is_some_and(|t| e >= t) {
                    continue;
                }
                out.add_term(e, ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &RadicalCoeff) -> Self {
        Self::from_terms(
            &self.w_sq,
            self.terms.iter().map(|(e, a)| (*e, a.mul(c))),
            self.truncation,
        )
    }

    pub fn scale_rational(&self, c: &Rational) -> Self {
        Self::from_terms(
            &self.w_sq,
            self.terms.iter().map(|(e, a)| (*e, a.scale(c))),
            self.truncation,
        )
    }

    /// Multiplies by ε^k.
    pub fn shift(&self, k: i32) -> Self {
        Self::from_terms(
            &self.w_sq,
            self.terms.iter().map(|(e, a)| (e + k, a.clone())),
            self.truncation.map(|t| t + k),
        )
    }

    /// Formal inverse. The lowest coefficient must be an invertible scalar;
    /// the result is known to relative order trunc − val.
    pub fn inverse(&self) -> Result<Self> {
        let val = self
            .valuation()
            .ok_or_else(|| Error::Domain("cannot invert a zero series".into()))?;
        let Some(trunc) = self.truncation else {
            return Err(Error::Domain(
                "inverse of an exact series is not a finite Laurent polynomial; truncate first"
                    .into(),
            ));
        };
        let lead = &self.terms[&val];
        let lead_inv = lead.inverse_scalar().ok_or_else(|| {
            Error::Domain(format!(
                "leading coefficient {lead} is not an invertible scalar"
            ))
        })?;
        let rel = trunc - val;
        let unit: Vec<RadicalCoeff> = (0..rel)
            .map(|k| self.coefficient(val + k))
            .collect::<Result<_>>()?;
        let mut inv: Vec<RadicalCoeff> = Vec::with_capacity(rel as usize);
        for k in 0..rel as usize {
            if k == 0 {
                inv.push(lead_inv.clone());
                continue;
            }
            let mut acc = RadicalCoeff::zero(&self.w_sq);
            for j in 1..=k {
                if unit[j].is_zero() || inv[k - j].is_zero() {
                    continue;
                }
                acc = acc.add(&unit[j].mul(&inv[k - j]));
            }
            inv.push(acc.mul(&lead_inv).neg());
        }
        Ok(Self::from_terms(
            &self.w_sq,
            inv.into_iter()
                .enumerate()
                .map(|(k, c)| (k as i32 - val, c)),
            Some(rel - val),
        ))
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.mul(&rhs.inverse()?))
    }

    /// True when every odd ε-exponent has a zero coefficient.
    pub fn only_even_exponents(&self) -> bool {
        self.terms.keys().all(|e| e % 2 == 0)
    }

    /// True when no coefficient carries a `w` component.
    pub fn is_radical_free(&self) -> bool {
        self.terms.values().all(|c| c.radical_part().is_zero())
    }
}

impl fmt::Display for AsymptoticSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "[{}]·ε^{}", c, e)?;
        }
        if first {
            f.write_str("0")?;
        }
        if let Some(t) = self.truncation {
            write!(f, " + O(ε^{t})")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w_sq() -> Rational {
        // 2pq at p = 3/10
        Rational::from((21, 50))
    }

    #[test]
    fn w_times_w_is_two_pq() {
        let c = w_sq();
        let w = RadicalCoeff::w(&c);
        assert_eq!(w.mul(&w), RadicalCoeff::from_rational(c.clone(), &c));
        assert_eq!(RadicalCoeff::w_pow(3, &c), w.mul(&w).mul(&w));
        assert_eq!(RadicalCoeff::w_pow(-1, &c).mul(&w), RadicalCoeff::one(&c));
        assert_eq!(
            RadicalCoeff::w_pow(-2, &c).mul(&w.mul(&w)),
            RadicalCoeff::one(&c)
        );
    }

    #[test]
    fn scalar_inverse() {
        let c = w_sq();
        let x = RadicalCoeff::new(
            VPoly::constant(Rational::from(3)),
            VPoly::constant(Rational::from((-2, 7))),
            c.clone(),
        );
        assert_eq!(x.mul(&x.inverse_scalar().unwrap()), RadicalCoeff::one(&c));
        let v = RadicalCoeff::from_poly(VPoly::var(), &c);
        assert!(v.inverse_scalar().is_none());
    }

    #[test]
    fn product_truncation_follows_min_rule() {
        let c = w_sq();
        let a = AsymptoticSeries::from_terms(
            &c,
            [(-2, RadicalCoeff::one(&c)), (0, RadicalCoeff::w(&c))],
            Some(3),
        );
        let b = AsymptoticSeries::from_terms(&c, [(1, RadicalCoeff::one(&c))], Some(4));
        let prod = a.mul(&b);
        // min(-2 + 4, 1 + 3) = 2
        assert_eq!(prod.truncation_order(), Some(2));
        assert_eq!(prod.coefficient(-1).unwrap(), RadicalCoeff::one(&c));
        assert_eq!(prod.coefficient(1).unwrap(), RadicalCoeff::w(&c));
        assert!(prod.coefficient(2).is_err());
    }

    #[test]
    fn exact_series_multiply_exactly() {
        let c = w_sq();
        let a = AsymptoticSeries::from_terms(&c, [(-1, RadicalCoeff::one(&c))], None);
        let b = AsymptoticSeries::from_terms(&c, [(1, RadicalCoeff::one(&c))], None);
        let prod = a.mul(&b);
        assert_eq!(prod.truncation_order(), None);
        assert_eq!(prod, AsymptoticSeries::one(&c, None));
    }

    #[test]
    fn inverse_of_shifted_unit() {
        let c = w_sq();
        // ε^{-2}(1 + w ε) + O(ε^2)
        let a = AsymptoticSeries::from_terms(
            &c,
            [(-2, RadicalCoeff::one(&c)), (-1, RadicalCoeff::w(&c))],
            Some(2),
        );
        let inv = a.inverse().unwrap();
        assert_eq!(inv.valuation(), Some(2));
        let one = a.mul(&inv);
        assert_eq!(one.truncation_order(), Some(4));
        assert_eq!(one.truncate(4), AsymptoticSeries::one(&c, Some(4)));
    }

    fn small_coeff(c: &Rational) -> impl Strategy<Value = RadicalCoeff> {
        let c = c.clone();
        (
            proptest::collection::vec(-5i64..5, 0..3),
            proptest::collection::vec(-5i64..5, 0..3),
        )
            .prop_map(move |(a, b)| {
                RadicalCoeff::new(VPoly::from_i64(&a), VPoly::from_i64(&b), c.clone())
            })
    }

    proptest! {
        #[test]
        fn unit_series_times_inverse_is_one(
            tail in proptest::collection::vec(small_coeff(&w_sq()), 1..6),
            trunc in 2i32..7,
        ) {
            let c = w_sq();
            let mut a = AsymptoticSeries::one(&c, Some(trunc));
            for (k, coeff) in tail.into_iter().enumerate() {
                a.add_term(k as i32 + 1, coeff);
            }
            let prod = a.mul(&a.inverse().unwrap());
            prop_assert_eq!(prod.truncation_order(), Some(trunc));
            prop_assert_eq!(prod, AsymptoticSeries::one(&c, Some(trunc)));
        }
    }
}
