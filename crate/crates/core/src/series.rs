//! Truncated Laurent series in one complex variable.
//!
//! A [`LaurentSeries`] stores a finite principal part exactly and a regular
//! part up to a truncation order `trunc`. Coefficients of exponents above
//! `trunc` are *unknown*, not zero: asking for one is an error. Every
//! origin-centered contour integral `∮ h(v) dv/(2πi)` is the coefficient of
//! `v^-1` of `h`, so the whole residue calculus of the crate reduces to
//! coefficient reads on this type.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Guard terms added on top of `n + degree` when picking a truncation order.
pub const GUARD_TERMS: i32 = 8;

/// Truncation order used for an instance of size `n` whose polynomial inputs
/// have degree at most `max_degree`.
pub fn default_trunc(n: usize, max_degree: usize) -> i32 {
    (n + max_degree) as i32 + GUARD_TERMS
}

/// `Σ_{k=min_exp}^{trunc} c_k v^k`, with `coeffs[k - min_exp] = c_k`.
///
/// Invariants kept by every constructor:
/// - the stored coefficient run has nonzero first and last entries, or is
///   empty (the zero series, `min_exp == 0`);
/// - every stored exponent is `<= trunc`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries {
    min_exp: i32,
    coeffs: Vec<Complex64>,
    trunc: i32,
}

impl LaurentSeries {
    /// Build from raw coefficients starting at `min_exp`; terms above `trunc`
    /// are dropped and exact zeros at both ends are trimmed.
    pub fn new(min_exp: i32, coeffs: Vec<Complex64>, trunc: i32) -> Self {
        let mut s = LaurentSeries {
            min_exp,
            coeffs,
            trunc,
        };
        s.normalize();
        s
    }

    pub fn zero(trunc: i32) -> Self {
        LaurentSeries {
            min_exp: 0,
            coeffs: Vec::new(),
            trunc,
        }
    }

    pub fn one(trunc: i32) -> Self {
        Self::monomial(0, ONE, trunc)
    }

    /// `c · v^k`.
    pub fn monomial(k: i32, c: Complex64, trunc: i32) -> Self {
        Self::new(k, vec![c], trunc)
    }

    /// Polynomial with ascending coefficients `coeffs[d]` of `v^d`.
    pub fn polynomial(coeffs: &[Complex64], trunc: i32) -> Self {
        Self::new(0, coeffs.to_vec(), trunc)
    }

    fn normalize(&mut self) {
        let keep = (self.trunc as i64 - self.min_exp as i64 + 1).max(0) as usize;
        self.coeffs.truncate(keep);
        while self.coeffs.last() == Some(&ZERO) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| **c == ZERO).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.min_exp = 0;
        } else if lead > 0 {
            self.coeffs.drain(..lead);
            self.min_exp += lead as i32;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent carrying a nonzero coefficient (0 for the zero series).
    pub fn min_exp(&self) -> i32 {
        self.min_exp
    }

    /// Highest exponent whose coefficient is known.
    pub fn trunc(&self) -> i32 {
        self.trunc
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Lowest exponent at which the series may be nonzero. For the zero
    /// series this is the first unknown exponent.
    fn valuation(&self) -> i32 {
        if self.is_zero() {
            self.trunc + 1
        } else {
            self.min_exp
        }
    }

    /// Coefficient of `v^k`. Exponents below the stored range read as zero;
    /// exponents above `trunc` are an error.
    pub fn coeff(&self, k: i32) -> Result<Complex64> {
        if k > self.trunc {
            return Err(Error::TruncationExceeded { k, trunc: self.trunc });
        }
        Ok(self.raw(k))
    }

    /// Residue at the origin, i.e. `∮ self dv/(2πi)`.
    pub fn residue(&self) -> Result<Complex64> {
        self.coeff(-1)
    }

    fn raw(&self, k: i32) -> Complex64 {
        let idx = k as i64 - self.min_exp as i64;
        if idx < 0 {
            ZERO
        } else {
            self.coeffs.get(idx as usize).copied().unwrap_or(ZERO)
        }
    }

    /// Multiply by `v^k`.
    pub fn shift(&self, k: i32) -> Self {
        if self.is_zero() {
            return Self::zero(self.trunc + k);
        }
        LaurentSeries {
            min_exp: self.min_exp + k,
            coeffs: self.coeffs.clone(),
            trunc: self.trunc + k,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(
            self.min_exp,
            self.coeffs.iter().map(|x| x * c).collect(),
            self.trunc,
        )
    }

    /// Lower the truncation order to `trunc` (never raises it).
    pub fn truncate(&self, trunc: i32) -> Self {
        Self::new(self.min_exp, self.coeffs.clone(), trunc.min(self.trunc))
    }

    /// Evaluate the stored terms at `v`. Only meaningful when the series is
    /// exact (a Laurent polynomial).
    pub fn eval(&self, v: Complex64) -> Complex64 {
        let mut acc = ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * v + c;
        }
        acc * v.powi(self.min_exp)
    }

    /// Coefficientwise sum; known up to the smaller truncation order.
    pub fn add(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        if self.is_zero() && other.is_zero() {
            return Self::zero(trunc);
        }
        let lo = match (self.is_zero(), other.is_zero()) {
            (true, _) => other.min_exp,
            (_, true) => self.min_exp,
            _ => self.min_exp.min(other.min_exp),
        };
        if lo > trunc {
            return Self::zero(trunc);
        }
        let coeffs = (lo..=trunc).map(|k| self.raw(k) + other.raw(k)).collect();
        Self::new(lo, coeffs, trunc)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    /// Truncated Cauchy product. The product is known up to
    /// `min(a.trunc + val(b), b.trunc + val(a))`.
    pub fn mul(&self, other: &Self) -> Self {
        let trunc = (self.trunc + other.valuation()).min(other.trunc + self.valuation());
        if self.is_zero() || other.is_zero() {
            return Self::zero(trunc);
        }
        let lo = self.min_exp + other.min_exp;
        if lo > trunc {
            return Self::zero(trunc);
        }
        let len = (trunc - lo + 1) as usize;
        let mut out = vec![ZERO; len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                out[i + j] += a * b;
            }
        }
        Self::new(lo, out, trunc)
    }

    /// Multiplicative inverse. For `a = v^m (a_0 + a_1 v + …)` known up to
    /// `v^trunc`, the inverse starts at `v^-m` and is known up to
    /// `v^(trunc - 2m)`.
    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::SingularSeries);
        }
        let m = self.min_exp;
        let terms = (self.trunc - m + 1).max(0) as usize;
        let a0 = self.coeffs[0];
        let inv0 = a0.inv();
        let mut out: Vec<Complex64> = Vec::with_capacity(terms);
        for k in 0..terms {
            if k == 0 {
                out.push(inv0);
                continue;
            }
            let mut acc = ZERO;
            for j in 1..=k.min(self.coeffs.len() - 1) {
                acc += self.coeffs[j] * out[k - j];
            }
            out.push(-acc * inv0);
        }
        Ok(Self::new(-m, out, self.trunc - 2 * m))
    }

    /// One link of a nested contour integral: the function
    /// `w ↦ ∮ t(v) / (w - v) dv/(2πi)` for `|w| > |v|`.
    ///
    /// Expanding `1/(w - v) = Σ_k v^k / w^(k+1)` shows that the result is the
    /// principal part of `t`, re-read in the variable `w`; the regular part
    /// of `t` integrates to zero.
    pub fn chain_step(&self) -> Self {
        if self.is_zero() || self.min_exp >= 0 {
            return Self::zero(self.trunc);
        }
        let top = (-1).min(self.trunc);
        let coeffs = (self.min_exp..=top).map(|k| self.raw(k)).collect();
        Self::new(self.min_exp, coeffs, self.trunc)
    }

    /// Negative-exponent part, exact.
    pub fn principal_part(&self) -> Self {
        self.chain_step()
    }
}

impl Add for &LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, rhs: &LaurentSeries) -> LaurentSeries {
        LaurentSeries::add(self, rhs)
    }
}

impl Sub for &LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, rhs: &LaurentSeries) -> LaurentSeries {
        LaurentSeries::sub(self, rhs)
    }
}

impl Mul for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: &LaurentSeries) -> LaurentSeries {
        LaurentSeries::mul(self, rhs)
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        self.scale(-ONE)
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")?;
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})·v^{}", self.min_exp + i as i32)?;
        }
        write!(f, " + O(v^{})", self.trunc + 1)
    }
}
