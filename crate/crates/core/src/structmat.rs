//! The structured `n × n` matrices built from coefficient reads and contour
//! quadrature, plus dense complex determinants and triangular inverses.
//!
//! Indices are 0-based in code. A mathematical entry `X(i, j)` with
//! `1 <= i, j <= n` lives at `[(i - 1, j - 1)]`; the coefficient offsets such
//! as `j - i` are unchanged by the shift.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::contour::QuadratureRule;
use crate::error::{Error, Result};
use crate::funcs::RationalFunction;
use crate::series::LaurentSeries;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest `n` accepted without an explicit override.
pub const MAX_N: usize = 16;
/// Diagonal/sub-diagonal tolerance for the unit-triangular check.
const UNIT_TRIANGULAR_TOL: f64 = 1e-12;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        ComplexMatrix { rows, cols, data }
    }

    pub fn try_from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Result<Complex64>,
    ) -> Result<Self> {
        let data = (0..rows * cols)
            .map(|k| f(k / cols, k % cols))
            .collect::<Result<_>>()?;
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        ComplexMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// `max |self - other|` entrywise.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |self - I|` entrywise.
    pub fn identity_gap(&self) -> f64 {
        self.max_abs_diff(&Self::identity(self.rows))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|c| format!("{c:.6}")).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

fn check_unit_constant(name: &str, s: &[LaurentSeries]) -> Result<()> {
    for (i, x) in s.iter().enumerate() {
        let c0 = x.coeff(0)?;
        if c0 != ONE || x.min_exp() < 0 {
            return Err(Error::Invariant(format!(
                "{name}[{i}](0) = {c0}, expected exactly 1"
            )));
        }
    }
    Ok(())
}

/// `A(i,j) = ∮ v^{i-j-1} p_i(v) f_j(v) dv/(2πi)`, the coefficient of
/// `v^{j-i}` in `p_i f_j`. Unit upper triangular.
pub fn build_a(p: &[LaurentSeries], f: &[LaurentSeries]) -> Result<ComplexMatrix> {
    if p.len() != f.len() {
        return Err(Error::Domain(format!("p has {} entries, f has {}", p.len(), f.len())));
    }
    check_unit_constant("p", p)?;
    check_unit_constant("f", f)?;
    let n = p.len();
    ComplexMatrix::try_from_fn(n, n, |i, j| {
        if j < i {
            return Ok(ZERO);
        }
        p[i].mul(&f[j]).coeff((j - i) as i32)
    })
}

/// `B(i,j) = ∫_Γ q_i(u) g_j(u) du/(2πi)` by the quadrature rule.
pub fn build_b(q: &[RationalFunction], g: &[RationalFunction], rule: &QuadratureRule) -> Result<ComplexMatrix> {
    if q.len() != g.len() {
        return Err(Error::Domain(format!("q has {} entries, g has {}", q.len(), g.len())));
    }
    let n = q.len();
    let qs = sample_all(q, rule, "q")?;
    let gs = sample_all(g, rule, "g")?;
    ComplexMatrix::try_from_fn(n, n, |i, j| {
        let samples: Vec<_> = qs[i].iter().zip(&gs[j]).map(|(a, b)| a * b).collect();
        rule.integrate(&samples)
    })
}

/// Samples of every function at every node; errors name the function and node.
pub fn sample_all(fs: &[RationalFunction], rule: &QuadratureRule, name: &str) -> Result<Vec<Vec<Complex64>>> {
    fs.iter()
        .enumerate()
        .map(|(i, r)| {
            rule.nodes()
                .iter()
                .enumerate()
                .map(|(a, u)| r.eval(*u).map_err(|e| e.at(format!("{name}[{i}] at node {a}"))))
                .collect()
        })
        .collect()
}

/// `S(i,j) = ∮ v^{i-j-1} p_i(v) dv/(2πi)`, the coefficient of `v^{j-i}` in `p_i`.
pub fn build_s(p: &[LaurentSeries]) -> Result<ComplexMatrix> {
    check_unit_constant("p", p)?;
    let n = p.len();
    ComplexMatrix::try_from_fn(n, n, |i, j| if j < i { Ok(ZERO) } else { p[i].coeff((j - i) as i32) })
}

/// `R(i,j) = ∮ v^{i-j-1} f_j(v) dv/(2πi)`, the coefficient of `v^{j-i}` in `f_j`.
pub fn build_r(f: &[LaurentSeries]) -> Result<ComplexMatrix> {
    check_unit_constant("f", f)?;
    let n = f.len();
    ComplexMatrix::try_from_fn(n, n, |i, j| if j < i { Ok(ZERO) } else { f[j].coeff((j - i) as i32) })
}

/// The series `1/(v P_ℓ(v))` for `ℓ = 1..n`, where `P_1 = p_1` and
/// `P_ℓ = p_ℓ / p_{ℓ-1}`. These are the per-variable factors of every nested
/// integral over `|v_1| > |v_2| > …`.
pub fn chain_factors(p: &[LaurentSeries]) -> Result<Vec<LaurentSeries>> {
    check_unit_constant("p", p)?;
    let mut out = Vec::with_capacity(p.len());
    for (l, pl) in p.iter().enumerate() {
        let big_p = if l == 0 {
            pl.clone()
        } else {
            let prev = p[l - 1]
                .recip()
                .map_err(|e| Error::Invariant(format!("p[{}] is not invertible: {e}", l - 1)))?;
            pl.mul(&prev)
        };
        let factor = big_p
            .shift(1)
            .recip()
            .map_err(|e| Error::Invariant(format!("v·P[{l}] is not invertible: {e}")))?;
        out.push(factor);
    }
    Ok(out)
}

/// Collapse the nested integrals over `v_{top}, …, v_{bottom+1}` (0-based
/// factor indices, innermost first), leaving a Laurent series in the
/// outermost variable `v_{bottom}`:
///
/// `t ← factors[top]`, then `t ← chain_step(t) · factors[ℓ]` for
/// `ℓ = top-1, …, bottom`.
pub fn nested_chain(factors: &[LaurentSeries], top: usize, bottom: usize) -> LaurentSeries {
    assert!(bottom <= top && top < factors.len());
    let mut t = factors[top].clone();
    for l in (bottom..top).rev() {
        t = t.chain_step().mul(&factors[l]);
    }
    t
}

/// `W(i,j)` as the nested contour integral of `v_1^{i-1}` against the chain
/// `1 / (∏(v_ℓ - v_{ℓ+1}) ∏ v_ℓ P_ℓ(v_ℓ))`, evaluated in the series algebra
/// without any numeric inversion.
pub fn build_w(p: &[LaurentSeries]) -> Result<ComplexMatrix> {
    let factors = chain_factors(p)?;
    let n = p.len();
    let mut w = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let t = nested_chain(&factors, j, 0);
        for i in 0..n {
            // residue of v^{i} · t  (math index i+1 → v^{(i+1)-1})
            w[(i, j)] = t.coeff(-(i as i32) - 1)?;
        }
    }
    Ok(w)
}

/// Dual basis `α_i(v) = Σ_k R^{-1}(i,k) v^{k-1}`, returned as polynomials
/// known up to the truncation order of `f`.
pub fn alpha_polys(f: &[LaurentSeries]) -> Result<Vec<LaurentSeries>> {
    let r_inv = tri_inverse(&build_r(f)?)?;
    let trunc = f.iter().map(LaurentSeries::trunc).min().unwrap_or(0).max(f.len() as i32);
    Ok((0..f.len())
        .map(|i| LaurentSeries::polynomial(r_inv.row(i), trunc))
        .collect())
}

/// Coefficients `c_{ℓ,1..ℓ}` with
/// `1/(v^ℓ p_ℓ) = Σ_j c_{ℓ,j} f_j(v)/v^j + (analytic at 0)`.
///
/// `f_j/v^j` starts at `v^{-j}` with coefficient 1, so matching the principal
/// parts from `v^{-ℓ}` upward is a triangular solve.
pub fn expansion_coeffs(ell: usize, p_ell: &LaurentSeries, f: &[LaurentSeries]) -> Result<Vec<Complex64>> {
    if ell == 0 || ell > f.len() {
        return Err(Error::Domain(format!("ell = {ell} outside 1..={}", f.len())));
    }
    check_unit_constant("p", std::slice::from_ref(p_ell))?;
    check_unit_constant("f", &f[..ell])?;
    let target = p_ell.recip()?.shift(-(ell as i32));
    let mut c = vec![ZERO; ell];
    for e in (1..=ell).rev() {
        let mut acc = target.coeff(-(e as i32))?;
        for j in (e + 1)..=ell {
            acc -= c[j - 1] * f[j - 1].coeff((j - e) as i32)?;
        }
        c[e - 1] = acc;
    }
    Ok(c)
}

/// Determinant by LU factorization with partial pivoting on modulus.
/// A zero pivot column yields exactly 0.
pub fn lu_det(m: &ComplexMatrix) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::Domain(format!("determinant of a {}×{} matrix", m.rows(), m.cols())));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut det = ONE;
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 {
            return Ok(ZERO);
        }
        if piv != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = tmp;
            }
            det = -det;
        }
        let pivot = a[(k, k)];
        det *= pivot;
        for i in (k + 1)..n {
            let factor = a[(i, k)] / pivot;
            if factor == ZERO {
                continue;
            }
            for j in (k + 1)..n {
                let t = a[(k, j)];
                a[(i, j)] -= factor * t;
            }
        }
    }
    Ok(det)
}

/// Inverse of a unit upper triangular matrix by back substitution.
pub fn tri_inverse(t: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !t.is_square() {
        return Err(Error::Domain("triangular inverse of a non-square matrix".into()));
    }
    let n = t.rows();
    for i in 0..n {
        if (t[(i, i)] - ONE).norm() > UNIT_TRIANGULAR_TOL {
            return Err(Error::Domain(format!("diagonal entry ({i},{i}) = {} is not 1", t[(i, i)])));
        }
        for j in 0..i {
            if t[(i, j)].norm() > UNIT_TRIANGULAR_TOL {
                return Err(Error::Domain(format!("entry ({i},{j}) below the diagonal is nonzero")));
            }
        }
    }
    let mut inv = ComplexMatrix::identity(n);
    // Column j of the inverse solves T x = e_j; x is zero below row j.
    for j in 0..n {
        for i in (0..j).rev() {
            let mut acc = ZERO;
            for k in (i + 1)..=j {
                acc += t[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -acc;
        }
    }
    Ok(inv)
}
