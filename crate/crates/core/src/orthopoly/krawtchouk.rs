use rug::{Float, Rational};

use crate::arith::{binomial, check_probability, complement, falling_factorial, Precision};
use crate::error::{ensure, Result};

/// Parameters (p, N, n) of k_n^{(p)}(·, N).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KrawtchoukParams {
    p: Rational,
    big_n: u64,
    n: u32,
}

impl KrawtchoukParams {
    pub fn new(p: Rational, big_n: u64, n: u32) -> Result<Self> {
        check_probability(&p)?;
        ensure!(big_n >= 1, "N must be positive");
        ensure!(u64::from(n) <= big_n, "degree n = {n} exceeds N = {big_n}");
        Ok(KrawtchoukParams { p, big_n, n })
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn q(&self) -> Rational {
        complement(&self.p)
    }

    pub fn big_n(&self) -> u64 {
        self.big_n
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn with_degree(&self, n: u32) -> Result<Self> {
        Self::new(self.p.clone(), self.big_n, n)
    }

    /// (−p)^n · C(N, n), the factor between K_n and k_n.
    pub fn normalization(&self) -> Rational {
        let sign_p = Rational::from(-&self.p);
        let mut acc = Rational::from(binomial(self.big_n, i64::from(self.n)));
        for _ in 0..self.n {
            acc *= &sign_p;
        }
        acc
    }
}

/// K_n(x, p, N) = 2F1(−x, −n; −N; 1/p), summed with the term ratio
/// t_{j+1}/t_j = (j − x)(j − n) / ((j − N)(j + 1) p).
pub fn krawtchouk_nonnormalized(params: &KrawtchoukParams, x: &Rational) -> Rational {
    let n = i64::from(params.n);
    let big_n = params.big_n as i64;
    let mut term = Rational::from(1);
    let mut sum = term.clone();
    for j in 0..n {
        let num = Rational::from(j - x) * (j - n);
        let den = Rational::from((j - big_n) * (j + 1)) * &params.p;
        term *= num / den;
        if term.cmp0().is_eq() {
            break;
        }
        sum += &term;
    }
    sum
}

/// Normalized k_n^{(p)}(x, N) = (−p)^n C(N, n) K_n(x, p, N). Polynomial in x,
/// so any rational x is accepted.
pub fn krawtchouk_hypergeometric(params: &KrawtchoukParams, x: &Rational) -> Rational {
    krawtchouk_nonnormalized(params, x) * params.normalization()
}

/// k_n at a real x̂: the float is converted to the rational it represents
/// exactly, evaluated exactly, and rounded once.
pub fn krawtchouk_real(params: &KrawtchoukParams, xhat: &Float, prec: Precision) -> Result<Float> {
    let x = xhat
        .to_rational()
        .ok_or_else(|| crate::Error::Domain(format!("x̂ = {xhat} is not finite")))?;
    Ok(Float::with_val(
        prec.bits(),
        krawtchouk_hypergeometric(params, &x),
    ))
}

/// ρ(x) = C(N, x) p^x q^{N−x} for integer 0 ≤ x ≤ N.
pub fn weight_rho(big_n: u64, p: &Rational, x: i64) -> Result<Rational> {
    check_probability(p)?;
    ensure!(
        x >= 0 && x as u64 <= big_n,
        "x̂ = {x} lies outside [0, {big_n}]"
    );
    let x = x as u64;
    let q = complement(p);
    let pp = rational_pow(p, x);
    let qq = rational_pow(&q, big_n - x);
    Ok(Rational::from(binomial(big_n, x as i64)) * pp * qq)
}

fn rational_pow(base: &Rational, e: u64) -> Rational {
    use rug::ops::Pow;
    match u32::try_from(e) {
        Ok(e) => Rational::from(base.pow(e)),
        Err(_) => {
            let mut acc = Rational::from(1);
            for _ in 0..e {
                acc *= base;
            }
            acc
        }
    }
}

/// Integer x̂ for which the n+1 weights ρ(x̂), …, ρ(x̂ + n) are all defined.
fn check_rodrigues_point(params: &KrawtchoukParams, x: &Rational) -> Result<i64> {
    ensure!(
        x.denom() == &1,
        "Rodrigues-type evaluation needs integer x̂, got {x}"
    );
    let xi = x
        .numer()
        .to_i64()
        .ok_or_else(|| crate::Error::Domain(format!("x̂ = {x} out of range")))?;
    let upper = params.big_n as i64;
    ensure!(
        xi >= 0 && xi <= upper,
        "x̂ = {xi} must satisfy 0 <= x̂ <= N = {upper}"
    );
    Ok(xi)
}

/// ρ extended by zero past N, as the forward differences near the right end
/// of the lattice require.
fn weight_rho_extended(big_n: u64, p: &Rational, x: i64) -> Result<Rational> {
    if x as u64 > big_n {
        return Ok(Rational::new());
    }
    weight_rho(big_n, p, x)
}

fn rodrigues_prefactor(params: &KrawtchoukParams) -> Rational {
    let mq = -params.q();
    let mut acc = Rational::from(1);
    for i in 1..=params.n {
        acc *= &mq;
        acc /= i;
    }
    acc
}

/// Unit forward difference Δ^s of a tabulated sequence at index 0.
fn delta_at_start(values: &[Rational], s: usize) -> Rational {
    let mut acc = Rational::new();
    for (j, f) in values.iter().take(s + 1).enumerate() {
        let c = Rational::from(binomial(s as u64, j as i64)) * f;
        if (s - j).is_multiple_of(2) {
            acc += c;
        } else {
            acc -= c;
        }
    }
    acc
}

/// k_n = (−q)^n/n! · Δ^n(ρ(x) x^{n̲}) / ρ(x), integer x̂ with 0 ≤ x̂ ≤ N.
pub fn krawtchouk_rodrigues(params: &KrawtchoukParams, x: &Rational) -> Result<Rational> {
    let xi = check_rodrigues_point(params, x)?;
    let n = params.n;
    let mut g = Vec::with_capacity(n as usize + 1);
    for j in 0..=i64::from(n) {
        let rho = weight_rho_extended(params.big_n, &params.p, xi + j)?;
        g.push(rho * falling_factorial(&Rational::from(xi + j), n));
    }
    let rho0 = weight_rho(params.big_n, &params.p, xi)?;
    Ok(rodrigues_prefactor(params) * delta_at_start(&g, n as usize) / rho0)
}

/// Discrete Leibniz form
/// k_n = (−q)^n/n! Σ_k C(n,k) n^{k̲} (x̂+n−k)^{(n−k)̲} Δ^{n−k}ρ(x̂) / ρ(x̂).
pub fn krawtchouk_leibniz(params: &KrawtchoukParams, x: &Rational) -> Result<Rational> {
    let xi = check_rodrigues_point(params, x)?;
    let n = params.n;
    let rho: Vec<Rational> = (0..=i64::from(n))
        .map(|j| weight_rho_extended(params.big_n, &params.p, xi + j))
        .collect::<Result<_>>()?;
    let mut sum = Rational::new();
    for k in 0..=n {
        let coeff = Rational::from(binomial(u64::from(n), i64::from(k)))
            * falling_factorial(&Rational::from(n), k)
            * falling_factorial(&Rational::from(xi + i64::from(n - k)), n - k);
        sum += coeff * delta_at_start(&rho, (n - k) as usize);
    }
    Ok(rodrigues_prefactor(params) * sum / &rho[0])
}

/// Σ_{x=0}^{N} k_i(x) k_j(x) ρ(x).
pub fn orthogonality_sum(big_n: u64, p: &Rational, i: u32, j: u32) -> Result<Rational> {
    let pi = KrawtchoukParams::new(p.clone(), big_n, i)?;
    let pj = pi.with_degree(j)?;
    let mut acc = Rational::new();
    for x in 0..=big_n as i64 {
        let xr = Rational::from(x);
        acc += krawtchouk_hypergeometric(&pi, &xr)
            * krawtchouk_hypergeometric(&pj, &xr)
            * weight_rho(big_n, p, x)?;
    }
    Ok(acc)
}

/// Expected value of [`orthogonality_sum`]: C(N, j)(pq)^j δ_ij.
pub fn orthogonality_norm(big_n: u64, p: &Rational, j: u32) -> Rational {
    let pq = p * complement(p);
    Rational::from(binomial(big_n, i64::from(j))) * rational_pow(&pq, u64::from(j))
}

/// K_n(x, p, N) = K_x(n, p, N) on the lattice: the left side is read off the
/// normalized polynomial k_n, the right side is the raw hypergeometric sum
/// with the roles of n and x swapped.
pub fn self_duality_check(big_n: u64, p: &Rational, n: u32, x: u32) -> Result<bool> {
    let pn = KrawtchoukParams::new(p.clone(), big_n, n)?;
    let px = pn.with_degree(x)?;
    let lhs = krawtchouk_hypergeometric(&pn, &Rational::from(x)) / pn.normalization();
    let rhs = krawtchouk_nonnormalized(&px, &Rational::from(n));
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: (i64, i64), big_n: u64, n: u32) -> KrawtchoukParams {
        KrawtchoukParams::new(Rational::from(p), big_n, n).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(KrawtchoukParams::new(Rational::from((1, 2)), 4, 5).is_err());
        assert!(KrawtchoukParams::new(Rational::from(1), 4, 2).is_err());
        assert!(KrawtchoukParams::new(Rational::from(0), 4, 2).is_err());
    }

    #[test]
    fn small_values() {
        let x = Rational::from(3);
        assert_eq!(krawtchouk_hypergeometric(&params((1, 2), 4, 0), &x), 1);
        // k_1 = x − Np
        assert_eq!(krawtchouk_hypergeometric(&params((1, 2), 4, 1), &x), 1);
        assert_eq!(
            krawtchouk_hypergeometric(&params((1, 2), 4, 2), &Rational::from(2)),
            Rational::from((-1, 2))
        );
        assert_eq!(
            krawtchouk_rodrigues(&params((1, 2), 4, 2), &Rational::from(2)).unwrap(),
            Rational::from((-1, 2))
        );
    }

    #[test]
    fn k2_closed_form() {
        // k_2(x) = ((x − Np)² − (q − p)(x − Np) − Npq)/2 by direct expansion
        // of the three-term sum.
        let pr = params((3, 10), 17, 2);
        let (p, q) = (pr.p().clone(), pr.q());
        for x in -3..20i64 {
            let v = Rational::from(x) - Rational::from(17) * &p;
            let expected = (Rational::from(&v * &v)
                - Rational::from(&q - &p) * &v
                - Rational::from(17) * &p * &q)
                / 2;
            assert_eq!(krawtchouk_hypergeometric(&pr, &Rational::from(x)), expected);
        }
    }

    #[test]
    fn leibniz_matches_hypergeometric() {
        let pr = params((1, 3), 6, 1);
        let x = Rational::from(2);
        assert_eq!(
            krawtchouk_leibniz(&pr, &x).unwrap(),
            krawtchouk_hypergeometric(&pr, &x)
        );
        let pr = params((3, 10), 12, 3);
        let x = Rational::from(4);
        assert_eq!(
            krawtchouk_leibniz(&pr, &x).unwrap(),
            krawtchouk_hypergeometric(&pr, &x)
        );
        assert_eq!(krawtchouk_leibniz(&params((3, 10), 12, 0), &x).unwrap(), 1);
    }

    #[test]
    fn difference_routes_cover_the_right_end() {
        let pr = params((1, 3), 7, 4);
        for x in 4..=7 {
            let x = Rational::from(x);
            let h = krawtchouk_hypergeometric(&pr, &x);
            assert_eq!(krawtchouk_rodrigues(&pr, &x).unwrap(), h);
            assert_eq!(krawtchouk_leibniz(&pr, &x).unwrap(), h);
        }
    }

    #[test]
    fn rodrigues_domain_errors() {
        let pr = params((1, 2), 6, 3);
        assert!(krawtchouk_rodrigues(&pr, &Rational::from(7)).is_err());
        assert!(krawtchouk_rodrigues(&pr, &Rational::from(-1)).is_err());
        assert!(krawtchouk_rodrigues(&pr, &Rational::from((1, 2))).is_err());
    }

    #[test]
    fn weight_values() {
        let p = Rational::from((1, 2));
        assert_eq!(weight_rho(4, &p, 2).unwrap(), Rational::from((3, 8)));
        assert_eq!(
            weight_rho(1, &Rational::from((1, 3)), 1).unwrap(),
            Rational::from((1, 3))
        );
        assert!(weight_rho(4, &p, 5).is_err());
        let third = Rational::from((1, 3));
        let total: Rational = (0..=20).map(|x| weight_rho(20, &third, x).unwrap()).sum();
        assert_eq!(total, 1);
    }

    #[test]
    fn orthogonality_examples() {
        let p = Rational::from((1, 3));
        assert_eq!(orthogonality_sum(6, &p, 2, 3).unwrap(), 0);
        assert_eq!(
            orthogonality_sum(6, &p, 2, 2).unwrap(),
            Rational::from((20, 27))
        );
        assert_eq!(orthogonality_norm(6, &p, 2), Rational::from((20, 27)));
        assert_eq!(orthogonality_sum(6, &p, 0, 0).unwrap(), 1);
    }

    #[test]
    fn self_duality_examples() {
        assert!(self_duality_check(8, &Rational::from((2, 5)), 3, 5).unwrap());
        assert!(self_duality_check(4, &Rational::from((1, 2)), 1, 4).unwrap());
        assert!(self_duality_check(7, &Rational::from((1, 3)), 4, 4).unwrap());
    }

    #[test]
    fn real_evaluation_is_exact_then_rounded() {
        let pr = params((3, 10), 1 << 20, 3);
        let prec = Precision::DEFAULT;
        let xhat = Float::with_val(prec.bits(), 314_573.25);
        let exact = krawtchouk_hypergeometric(&pr, &Rational::from((1_258_293, 4)));
        let approx = krawtchouk_real(&pr, &xhat, prec).unwrap();
        assert_eq!(approx, Float::with_val(prec.bits(), &exact));
    }
}
