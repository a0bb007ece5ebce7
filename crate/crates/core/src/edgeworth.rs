//! Bernoulli cumulants and the Hermite-polynomial corrections of the local
//! limit theorem for the binomial law.
//!
//! With w = √(2pq), the coefficient attached to a weighted partition is
//! b_{ν,s} = 2^{−(ν/2+s)} Π_m (γ_{m+2}/((m+2)! σ^{m+2}))^{k_m}/k_m!
//!         = w^{−(ν+2s)} Π_m (γ_{m+2}/(m+2)!)^{k_m}/k_m!,
//! because Σ (m+2) k_m = ν + 2s. It is rational for even ν and a rational
//! multiple of w for odd ν.

use rug::{Float, Rational};

use crate::arith::{
    binomial, check_probability, complement, radical_w, two_pq, weighted_partitions, Precision,
    RadicalCoeff, WeightedPartition,
};
use crate::error::{ensure, Result};
use crate::orthopoly::hermite;

/// Cumulants γ_1 … γ_m of a single Bernoulli(p) trial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CumulantTable {
    p: Rational,
    entries: Vec<Rational>,
}

impl CumulantTable {
    pub fn p(&self) -> &Rational {
        &self.p
    }

    /// γ_k for 1 ≤ k ≤ len.
    pub fn gamma(&self, k: usize) -> &Rational {
        &self.entries[k - 1]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Moment–cumulant recursion κ_n = μ_n − Σ_{m<n} C(n−1, m−1) κ_m μ_{n−m}
/// with every raw moment μ_k equal to p.
pub fn bernoulli_cumulants(p: &Rational, m: usize) -> Result<CumulantTable> {
    check_probability(p)?;
    ensure!(m >= 2, "need at least two cumulants, got {m}");
    let mut entries: Vec<Rational> = Vec::with_capacity(m);
    for n in 1..=m {
        let mut k = p.clone();
        for (idx, km) in entries.iter().enumerate() {
            let mi = idx + 1;
            k -= Rational::from(binomial(n as u64 - 1, mi as i64 - 1)) * km * p;
        }
        entries.push(k);
    }
    Ok(CumulantTable {
        p: p.clone(),
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeworthSummand {
    pub partition: WeightedPartition,
    /// b_{ν,s}, a scalar of ℚ(w).
    pub coeff: RadicalCoeff,
    pub hermite_index: u32,
}

/// q̃_ν as its list of summands b_{ν,s} H_{ν+2s}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeworthTerm {
    pub nu: u32,
    pub summands: Vec<EdgeworthSummand>,
}

/// Summands of q̃_0 … q̃_{max_nu} for a fixed p. Build once and share.
#[derive(Clone, Debug)]
pub struct EdgeworthTable {
    p: Rational,
    w_sq: Rational,
    terms: Vec<EdgeworthTerm>,
}

impl EdgeworthTable {
    pub fn new(p: &Rational, max_nu: u32) -> Result<Self> {
        let cumulants = bernoulli_cumulants(p, max_nu as usize + 2)?;
        let w_sq = two_pq(p);
        let mut terms = Vec::with_capacity(max_nu as usize + 1);
        for nu in 0..=max_nu {
            let mut summands = Vec::new();
            for part in weighted_partitions(nu) {
                let mut c = Rational::from(1);
                for (idx, &k) in part.ks.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    let m = idx + 1;
                    let mut fact = Rational::from(1);
                    for i in 1..=(m + 2) {
                        fact *= i as u32;
                    }
                    let base = cumulants.gamma(m + 2) / fact;
                    for i in 1..=k {
                        c *= &base;
                        c /= i;
                    }
                }
                let index = nu + 2 * part.s;
                let coeff = RadicalCoeff::w_pow(-(index as i32), &w_sq).scale(&c);
                summands.push(EdgeworthSummand {
                    partition: part,
                    coeff,
                    hermite_index: index,
                });
            }
            terms.push(EdgeworthTerm { nu, summands });
        }
        Ok(EdgeworthTable {
            p: p.clone(),
            w_sq,
            terms,
        })
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn w_sq(&self) -> &Rational {
        &self.w_sq
    }

    pub fn max_nu(&self) -> u32 {
        self.terms.len() as u32 - 1
    }

    pub fn term(&self, nu: u32) -> Result<&EdgeworthTerm> {
        self.terms.get(nu as usize).ok_or_else(|| {
            crate::Error::Domain(format!(
                "q̃_{nu} requested but the table stops at ν = {}",
                self.max_nu()
            ))
        })
    }

    /// g̃_{ν,r}(x) = e^{x²} (d/dx)^r (e^{−x²} q̃_ν(x)) = (−1)^r Σ b_{ν,s} H_{ν+2s+r}(x),
    /// as a polynomial in x with coefficients in ℚ(w).
    pub fn g_tilde(&self, nu: u32, r: u32) -> Result<RadicalCoeff> {
        let term = self.term(nu)?;
        let mut acc = RadicalCoeff::zero(&self.w_sq);
        for s in &term.summands {
            acc = acc.add(&s.coeff.mul_poly(&hermite(s.hermite_index + r)));
        }
        Ok(if r % 2 == 1 { acc.neg() } else { acc })
    }

    pub fn q_tilde(&self, nu: u32) -> Result<RadicalCoeff> {
        self.g_tilde(nu, 0)
    }
}

pub fn q_tilde(nu: u32, p: &Rational) -> Result<RadicalCoeff> {
    EdgeworthTable::new(p, nu)?.q_tilde(nu)
}

pub fn g_tilde(nu: u32, r: u32, p: &Rational) -> Result<RadicalCoeff> {
    EdgeworthTable::new(p, nu)?.g_tilde(nu, r)
}

/// Real-coefficient copy of g̃_{0,r} … g̃_{M,r} for repeated evaluation of
/// (1/(√(2π)σ)) e^{−x²} Σ_ν g̃_{ν,r}(x) N^{−ν/2}.
#[derive(Clone, Debug)]
pub struct PetrovSeries {
    polys: Vec<Vec<Float>>,
    prefactor: Float,
    prec: Precision,
}

impl PetrovSeries {
    pub fn new(table: &EdgeworthTable, m: u32, r: u32, prec: Precision) -> Result<Self> {
        let w = radical_w(&table.p, prec);
        let mut polys = Vec::with_capacity(m as usize + 1);
        for nu in 0..=m {
            let g = table.g_tilde(nu, r)?;
            let len = g
                .rational_part()
                .coeffs()
                .len()
                .max(g.radical_part().coeffs().len());
            let coeffs = (0..len)
                .map(|d| {
                    let a = Float::with_val(prec.bits(), g.rational_part().coeff(d));
                    let b = Float::with_val(prec.bits(), g.radical_part().coeff(d));
                    a + b * &w
                })
                .collect();
            polys.push(coeffs);
        }
        let sigma = Float::with_val(prec.bits(), &table.p * complement(&table.p)).sqrt();
        let two_pi = Float::with_val(prec.bits(), rug::float::Constant::Pi) * 2u32;
        let prefactor = (two_pi.sqrt() * sigma).recip();
        Ok(PetrovSeries {
            polys,
            prefactor,
            prec,
        })
    }

    pub fn order(&self) -> u32 {
        self.polys.len() as u32 - 1
    }

    /// Σ_ν g̃_{ν,r}(x) N^{−ν/2}, without the Gaussian prefactor.
    pub fn bracket(&self, big_n: u64, x: &Float) -> Float {
        let bits = self.prec.bits();
        let eps = Float::with_val(bits, big_n).sqrt().recip();
        let mut sum = Float::new(bits);
        let mut scale = Float::with_val(bits, 1);
        for coeffs in &self.polys {
            let mut acc = Float::new(bits);
            for c in coeffs.iter().rev() {
                acc *= x;
                acc += c;
            }
            sum += Float::with_val(bits, &acc * &scale);
            scale *= &eps;
        }
        sum
    }

    /// (1/(√(2π)σ)) e^{−x²}.
    pub fn gaussian(&self, x: &Float) -> Float {
        let bits = self.prec.bits();
        let e = Float::with_val(bits, -Float::with_val(bits, x * x)).exp();
        e * &self.prefactor
    }

    pub fn eval(&self, big_n: u64, x: &Float) -> Float {
        self.gaussian(x) * self.bracket(big_n, x)
    }
}

/// φ^M(x) = (1/(√(2π)σ)) e^{−x²} Σ_{ν≤M} q̃_ν(x) N^{−ν/2}.
pub fn petrov_density(
    m: u32,
    big_n: u64,
    p: &Rational,
    x: &Float,
    prec: Precision,
) -> Result<Float> {
    petrov_density_derivative(m, big_n, p, 0, x, prec)
}

/// The r-th x-derivative of φ^M: same form with g̃_{ν,r} in place of q̃_ν.
pub fn petrov_density_derivative(
    m: u32,
    big_n: u64,
    p: &Rational,
    r: u32,
    x: &Float,
    prec: Precision,
) -> Result<Float> {
    let table = EdgeworthTable::new(p, m)?;
    Ok(PetrovSeries::new(&table, m, r, prec)?.eval(big_n, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::VPoly;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn cumulants_match_closed_forms() {
        for p in [rat(1, 2), rat(3, 10), rat(1, 3), rat(5, 7)] {
            let q = complement(&p);
            let pq = Rational::from(&p * &q);
            let t = bernoulli_cumulants(&p, 6).unwrap();
            assert_eq!(t.gamma(1), &p);
            assert_eq!(t.gamma(2), &pq);
            assert_eq!(*t.gamma(3), (&pq * (Rational::from(1) - rat(2, 1) * &p)));
            let six_pq = Rational::from(&pq * 6u32);
            assert_eq!(*t.gamma(4), (&pq * (Rational::from(1) - six_pq)));
        }
        assert_eq!(*bernoulli_cumulants(&rat(1, 2), 3).unwrap().gamma(3), 0);
        assert!(bernoulli_cumulants(&rat(1, 2), 1).is_err());
    }

    /// Cumulants of the Bernoulli law read off log(q + p e^t) by series
    /// arithmetic: log(1 + u) with u = p(e^t − 1).
    fn cumulants_via_log(p: &Rational, m: usize) -> Vec<Rational> {
        let mut fact = vec![Rational::from(1)];
        for i in 1..=m {
            let prev = fact[i - 1].clone();
            fact.push(prev * i as u32);
        }
        // u(t) coefficients
        let u: Vec<Rational> = (0..=m)
            .map(|i| {
                if i == 0 {
                    Rational::new()
                } else {
                    Rational::from(p / &fact[i])
                }
            })
            .collect();
        let mul = |a: &[Rational], b: &[Rational]| {
            let mut c = vec![Rational::new(); m + 1];
            for i in 0..=m {
                for j in 0..=(m - i) {
                    c[i + j] += Rational::from(&a[i] * &b[j]);
                }
            }
            c
        };
        let mut log = vec![Rational::new(); m + 1];
        let mut power = u.clone();
        for k in 1..=m {
            for i in 0..=m {
                let term = Rational::from(&power[i] / k as u32);
                if k % 2 == 1 {
                    log[i] += term;
                } else {
                    log[i] -= term;
                }
            }
            power = mul(&power, &u);
        }
        (1..=m)
            .map(|i| Rational::from(&log[i] * &fact[i]))
            .collect()
    }

    #[test]
    fn recursion_matches_log_series() {
        let p = rat(3, 10);
        let t = bernoulli_cumulants(&p, 8).unwrap();
        let oracle = cumulants_via_log(&p, 8);
        for k in 1..=8 {
            assert_eq!(t.gamma(k), &oracle[k - 1], "γ_{k}");
        }
    }

    #[test]
    fn q_tilde_low_orders() {
        let p = rat(3, 10);
        let table = EdgeworthTable::new(&p, 4).unwrap();
        let w_sq = table.w_sq().clone();
        assert_eq!(table.q_tilde(0).unwrap(), RadicalCoeff::one(&w_sq));
        let t0 = table.term(0).unwrap();
        assert_eq!(t0.summands.len(), 1);
        assert_eq!(t0.summands[0].coeff, RadicalCoeff::one(&w_sq));

        // q̃_1 = (1−2p)/(2^{3/2}(pq)^{1/2}) · (8x³ − 12x)/3!, and
        // 1/(2^{3/2}√(pq)) = w/(4pq).
        let q = complement(&p);
        let pq = Rational::from(&p * &q);
        let lead = (Rational::from(1) - Rational::from(&p * 2u32)) / (pq.clone() * 4u32) / 6u32;
        let expected = RadicalCoeff::new(
            VPoly::zero(),
            VPoly::from_i64(&[0, -12, 0, 8]).scale(&lead),
            w_sq.clone(),
        );
        assert_eq!(table.q_tilde(1).unwrap(), expected);

        // q̃_2 = (γ_4/σ⁴ H_4 + (1/3!)(γ_3/σ³)² H_6)/(4·4!)
        let cum = bernoulli_cumulants(&p, 4).unwrap();
        let sig4 = Rational::from(&pq * &pq);
        let sig6 = Rational::from(&sig4 * &pq);
        let c4 = Rational::from(cum.gamma(4) / &sig4) / 96u32;
        let c6 = Rational::from(cum.gamma(3) * cum.gamma(3)) / sig6 / 6u32 / 96u32;
        let expected = &hermite(4).scale(&c4) + &hermite(6).scale(&c6);
        let q2 = table.q_tilde(2).unwrap();
        assert!(q2.radical_part().is_zero());
        assert_eq!(q2.rational_part(), &expected);
    }

    #[test]
    fn summands_follow_partitions_and_parity() {
        let table = EdgeworthTable::new(&rat(3, 10), 6).unwrap();
        for nu in 0..=6 {
            let term = table.term(nu).unwrap();
            assert_eq!(term.summands.len(), weighted_partitions(nu).len());
            for s in &term.summands {
                assert_eq!(s.hermite_index % 2, nu % 2);
                // even ν: rational, odd ν: multiple of w
                if nu % 2 == 0 {
                    assert!(s.coeff.radical_part().is_zero());
                } else {
                    assert!(s.coeff.rational_part().is_zero());
                }
            }
            let q = table.q_tilde(nu).unwrap();
            assert!(q.rational_part().has_parity(nu as usize));
            assert!(q.radical_part().has_parity(nu as usize));
        }
    }

    #[test]
    fn symmetric_case_kills_odd_orders() {
        let table = EdgeworthTable::new(&rat(1, 2), 7).unwrap();
        for nu in [1, 3, 5, 7] {
            assert!(table.q_tilde(nu).unwrap().is_zero(), "q̃_{nu}");
        }
        assert!(!table.q_tilde(2).unwrap().is_zero());
    }

    #[test]
    fn g_tilde_reductions() {
        let p = rat(3, 10);
        let table = EdgeworthTable::new(&p, 4).unwrap();
        for nu in 0..=4 {
            assert_eq!(table.g_tilde(nu, 0).unwrap(), table.q_tilde(nu).unwrap());
        }
        let g01 = table.g_tilde(0, 1).unwrap();
        assert_eq!(g01.rational_part(), &VPoly::from_i64(&[0, -2]));
        assert!(g01.radical_part().is_zero());
    }

    #[test]
    fn hermite_derivative_identity() {
        // e^{x²} (d/dx)² (e^{−x²} H_3) = H_5 at x = 0.7, against a central
        // second difference at 512 bits.
        let bits = 512;
        let x = Float::with_val(bits, 0.7);
        let f = |t: &Float| {
            let h3 = hermite(3).eval_real(t);
            Float::with_val(bits, -Float::with_val(bits, t * t)).exp() * h3
        };
        let h = Float::with_val(bits, 1e-30);
        let xp = Float::with_val(bits, &x + &h);
        let xm = Float::with_val(bits, &x - &h);
        let second = (f(&xp) - Float::with_val(bits, f(&x) * 2u32) + f(&xm))
            / Float::with_val(bits, &h * &h);
        let lhs = second * Float::with_val(bits, Float::with_val(bits, &x * &x).exp());
        let rhs = hermite(5).eval_real(&x);
        assert!((lhs - rhs).abs() < 1e-40);
    }

    #[test]
    fn density_values() {
        let prec = Precision::DEFAULT;
        let zero = Float::with_val(prec.bits(), 0);
        let d = petrov_density(0, 1000, &rat(1, 2), &zero, prec).unwrap();
        let pi = Float::with_val(prec.bits(), rug::float::Constant::Pi);
        let expected = (Float::with_val(prec.bits(), 2u32) / pi).sqrt();
        assert!((d - expected).abs() < 1e-70);
        let d1 = petrov_density_derivative(0, 1000, &rat(1, 2), 1, &zero, prec).unwrap();
        assert!(d1.is_zero());
        let x = Float::with_val(prec.bits(), 0.4);
        let a = petrov_density_derivative(2, 4096, &rat(3, 10), 0, &x, prec).unwrap();
        let b = petrov_density(2, 4096, &rat(3, 10), &x, prec).unwrap();
        assert_eq!(a, b);
    }
}
