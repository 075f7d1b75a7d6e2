//! Functions of `u` on the contour, represented as ratios of polynomials.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Smallest admissible `|den(z)|` for a point evaluation.
pub const EVAL_POLE_TOL: f64 = 1e-12;
/// Relative remainder below which one denominator is taken to divide another.
const DIVISIBILITY_TOL: f64 = 1e-13;

/// Dense polynomial, ascending coefficients. Trailing exact zeros are trimmed,
/// so the zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    /// `c · u^k`.
    pub fn monomial(k: usize, c: Complex64) -> Self {
        let mut coeffs = vec![ZERO; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let at = |p: &Self, i: usize| p.coeffs.get(i).copied().unwrap_or(ZERO);
        Self::new((0..len).map(|i| at(self, i) + at(other, i)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Long division: `self = q · divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Self) -> Option<(Self, Self)> {
        let lead = *divisor.coeffs.last()?;
        let dd = divisor.degree();
        if self.coeffs.len() <= dd {
            return Some((Self::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![ZERO; self.coeffs.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd] / lead;
            quot[k] = c;
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= c * d;
            }
        }
        rem.truncate(dd);
        Some((Self::new(quot), Self::new(rem)))
    }

    /// `Some(self / divisor)` when the division leaves a negligible remainder.
    fn exact_div(&self, divisor: &Self) -> Option<Self> {
        let lead = divisor.coeffs.last()?;
        if lead.norm() < 1e-12 * divisor.max_abs() || divisor.degree() > self.degree() {
            return None;
        }
        let (q, r) = self.div_rem(divisor)?;
        (r.max_abs() <= DIVISIBILITY_TOL * self.max_abs()).then_some(q)
    }
}

/// `num(u) / den(u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    /// Fails when every denominator coefficient is below `1e-12` in modulus.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.max_abs() < EVAL_POLE_TOL {
            return Err(Error::Domain("rational function with zero denominator".into()));
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Polynomial, den: Polynomial) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        RationalFunction { num, den }
    }

    pub fn from_coeffs(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        Self::new(Polynomial::new(num), Polynomial::new(den))
    }

    pub fn zero() -> Self {
        RationalFunction {
            num: Polynomial::zero(),
            den: Polynomial::one(),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::normalized(Polynomial::constant(c), Polynomial::one())
    }

    pub fn polynomial(p: Polynomial) -> Self {
        Self::normalized(p, Polynomial::one())
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let d = self.den.eval(z);
        if d.norm() <= EVAL_POLE_TOL {
            return Err(Error::PoleProximity { z });
        }
        Ok(self.num.eval(z) / d)
    }

    /// Evaluate at every point of `zs`.
    pub fn eval_many(&self, zs: &[Complex64]) -> Result<Vec<Complex64>> {
        zs.iter().map(|z| self.eval(*z)).collect()
    }

    /// Fail with the first probe point where `|den| < threshold`.
    pub fn check_poles(&self, probe: &[Complex64], threshold: f64) -> Result<()> {
        match probe.iter().find(|z| self.den.eval(**z).norm() < threshold) {
            Some(z) => Err(Error::PoleProximity { z: *z }),
            None => Ok(()),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::normalized(self.num.scale(c), self.den.clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::normalized(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    /// `Σ_k coeffs[k] · terms[k]` as a single rational function.
    ///
    /// Terms with a zero weight are skipped. Denominators are merged pairwise:
    /// equal or dividing denominators are reused, otherwise multiplied, so the
    /// result's denominator degree never exceeds the sum of the inputs'.
    pub fn lincomb(coeffs: &[Complex64], terms: &[RationalFunction]) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() != terms.len() {
            return Err(Error::Domain(format!(
                "linear combination needs equal positive lengths, got {} weights and {} terms",
                coeffs.len(),
                terms.len()
            )));
        }
        let mut num = Polynomial::zero();
        let mut den = Polynomial::one();
        for (c, t) in coeffs.iter().zip(terms) {
            if *c == ZERO || t.is_zero() {
                continue;
            }
            let tn = t.num.scale(*c);
            if t.den == den {
                num = num.add(&tn);
            } else if let Some(q) = den.exact_div(&t.den) {
                num = num.add(&tn.mul(&q));
            } else if let Some(q) = t.den.exact_div(&den) {
                num = num.mul(&q).add(&tn);
                den = t.den.clone();
            } else {
                num = num.mul(&t.den).add(&tn.mul(&den));
                den = den.mul(&t.den);
            }
        }
        Ok(Self::normalized(num, den))
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}) / ({:?})", self.num.coeffs(), self.den.coeffs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rf(num: &[(f64, f64)], den: &[(f64, f64)]) -> RationalFunction {
        let p = |v: &[(f64, f64)]| v.iter().map(|(a, b)| c(*a, *b)).collect();
        RationalFunction::from_coeffs(p(num), p(den)).unwrap()
    }

    // Oracle: Σ c_k z^k with explicit powers.
    fn monomial_sum(cs: &[Complex64], z: Complex64) -> Complex64 {
        cs.iter().enumerate().map(|(k, c)| c * z.powi(k as i32)).sum()
    }

    fn arb_c() -> impl Strategy<Value = Complex64> {
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b))
    }

    fn arb_rf() -> impl Strategy<Value = RationalFunction> {
        (prop::collection::vec(arb_c(), 1..4), arb_c(), 0.8f64..2.0).prop_map(|(num, z, s)| {
            // den = s·(u - z) keeps the pole inside |u| < 1.5
            RationalFunction::from_coeffs(num, vec![-z * s, c(s, 0.0)]).unwrap()
        })
    }

    fn probe_points() -> Vec<Complex64> {
        (0..32)
            .map(|k| Complex64::from_polar(2.0 + 0.03 * k as f64, 0.37 * k as f64))
            .collect()
    }

    #[test]
    fn eval_examples() {
        let r = rf(&[(1.0, 0.0), (1.0, 0.0)], &[(1.0, 0.0)]);
        assert_eq!(r.eval(c(0.0, 1.0)).unwrap(), c(1.0, 1.0));
        let r = rf(&[(1.0, 0.0)], &[(1.0, 0.0), (1.0, 0.0)]);
        assert_eq!(r.eval(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn eval_at_pole_reports_point() {
        let r = rf(&[(1.0, 0.0)], &[(1.0, 0.0), (1.0, 0.0)]);
        match r.eval(c(-1.0, 0.0)) {
            Err(Error::PoleProximity { z }) => assert_eq!(z, c(-1.0, 0.0)),
            other => panic!("expected pole error, got {other:?}"),
        }
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(RationalFunction::from_coeffs(vec![c(1.0, 0.0)], vec![c(1e-14, 0.0)]).is_err());
        assert!(RationalFunction::from_coeffs(vec![c(1.0, 0.0)], vec![]).is_err());
    }

    #[test]
    fn lincomb_cancellation() {
        let inv_u = rf(&[(1.0, 0.0)], &[(0.0, 0.0), (1.0, 0.0)]);
        let r = RationalFunction::lincomb(&[c(1.0, 0.0), c(1.0, 0.0)], &[inv_u.clone(), inv_u.scale(c(-1.0, 0.0))]).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn lincomb_polynomials() {
        let u = rf(&[(0.0, 0.0), (1.0, 0.0)], &[(1.0, 0.0)]);
        let one = RationalFunction::constant(c(1.0, 0.0));
        let r = RationalFunction::lincomb(&[c(2.0, 0.0), c(3.0, 0.0)], &[u, one]).unwrap();
        assert_eq!(r.num().coeffs(), &[c(3.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(r.den().coeffs(), &[c(1.0, 0.0)]);
    }

    #[test]
    fn lincomb_rejects_empty_and_mismatched() {
        assert!(RationalFunction::lincomb(&[], &[]).is_err());
        assert!(RationalFunction::lincomb(&[c(1.0, 0.0)], &[]).is_err());
    }

    #[test]
    fn lincomb_reuses_dividing_denominators() {
        // 1/u, 1/u², 1/u³ combine over u³, not u⁶.
        let terms: Vec<_> = (1..=3)
            .map(|k| RationalFunction::new(Polynomial::one(), Polynomial::monomial(k, c(1.0, 0.0))).unwrap())
            .collect();
        let r = RationalFunction::lincomb(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)], &terms).unwrap();
        assert_eq!(r.den().degree(), 3);
        let z = c(0.3, -0.8);
        let expect = 1.0 / z + 2.0 / (z * z) + 3.0 / (z * z * z);
        assert!((r.eval(z).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn mul_examples() {
        let u = rf(&[(0.0, 0.0), (1.0, 0.0)], &[(1.0, 0.0)]);
        let inv_u = rf(&[(1.0, 0.0)], &[(0.0, 0.0), (1.0, 0.0)]);
        let p = u.mul(&inv_u);
        for z in probe_points() {
            assert!((p.eval(z).unwrap() - 1.0).norm() < 1e-15);
        }
        assert!(u.mul(&RationalFunction::zero()).is_zero());
    }

    #[test]
    fn division_recovers_factor() {
        let a = Polynomial::new(vec![c(-0.5, 0.1), c(1.0, 0.0)]);
        let b = Polynomial::new(vec![c(2.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)]);
        let (q, r) = a.mul(&b).div_rem(&b).unwrap();
        assert!(r.max_abs() < 1e-15);
        for (x, y) in q.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn eval_matches_monomial_sum(num in prop::collection::vec(arb_c(), 1..6),
                                     den in prop::collection::vec(arb_c(), 1..4),
                                     z in arb_c()) {
            let r = RationalFunction::from_coeffs(num.clone(), den.clone());
            prop_assume!(r.is_ok());
            let r = r.unwrap();
            let d = monomial_sum(&den, z);
            prop_assume!(d.norm() > 1e-3);
            let expect = monomial_sum(&num, z) / d;
            prop_assert!((r.eval(z).unwrap() - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
        }

        #[test]
        fn lincomb_is_pointwise(ws in prop::collection::vec(arb_c(), 3), a in arb_rf(), b in arb_rf(), d in arb_rf()) {
            let terms = [a, b, d];
            let r = RationalFunction::lincomb(&ws, &terms).unwrap();
            let deg_sum: usize = terms.iter().map(|t| t.den().degree()).sum();
            prop_assert!(r.den().degree() <= deg_sum);
            for z in probe_points() {
                let expect: Complex64 = ws.iter().zip(&terms).map(|(w, t)| w * t.eval(z).unwrap()).sum();
                prop_assert!((r.eval(z).unwrap() - expect).norm() <= 1e-11 * expect.norm().max(1.0));
            }
        }

        #[test]
        fn mul_is_pointwise(a in arb_rf(), b in arb_rf()) {
            let p = a.mul(&b);
            prop_assert!(p.num().degree() <= a.num().degree() + b.num().degree());
            for z in probe_points() {
                let expect = a.eval(z).unwrap() * b.eval(z).unwrap();
                prop_assert!((p.eval(z).unwrap() - expect).norm() <= 1e-12 * expect.norm().max(1.0));
            }
        }
    }
}
