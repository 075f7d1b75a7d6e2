//! The bridge function `H(v,u)`, the nested-contour factors `T_ℓ(u)`, the
//! kernel `K(u₁,u₂)` in its general, `p ≡ 1` and special-region forms, and the
//! splitting `L_ℓ = Σ_i L_ℓ^{(i)}` obtained by shrinking the `v` contours one
//! at a time.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::funcs::RationalFunction;
use crate::series::{LaurentSeries, GUARD_TERMS};
use crate::structmat::{alpha_polys, chain_factors, nested_chain, ComplexMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `H(v,u) = Σ_d vcoeffs[d](u) v^d`, a polynomial in `v` with rational
/// coefficients in `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgeH {
    pub vcoeffs: Vec<RationalFunction>,
}

impl BridgeH {
    pub fn new(vcoeffs: Vec<RationalFunction>) -> Self {
        BridgeH { vcoeffs }
    }

    /// Number of stored `v`-coefficients (degree + 1).
    pub fn len(&self) -> usize {
        self.vcoeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vcoeffs.is_empty()
    }

    /// `[H_0(u), H_1(u), …]`.
    pub fn eval_coeffs(&self, u: Complex64) -> Result<Vec<Complex64>> {
        self.vcoeffs.iter().map(|r| r.eval(u)).collect()
    }

    /// `H(·,u)` as an exact polynomial series in `v`.
    pub fn series_at(&self, u: Complex64, trunc: i32) -> Result<LaurentSeries> {
        Ok(LaurentSeries::polynomial(&self.eval_coeffs(u)?, trunc))
    }

    /// `Σ_d weights[d] · H_d(u)` as one rational function.
    pub fn weighted(&self, weights: &[Complex64]) -> Result<RationalFunction> {
        let len = weights.len().min(self.len());
        if len == 0 {
            return Ok(RationalFunction::zero());
        }
        RationalFunction::lincomb(&weights[..len], &self.vcoeffs[..len])
    }
}

/// Canonical bridge `H(v,u) = Σ_m g_m(u) α_m(v)`, the unique solution of
/// `∮ f_i(v) v^{-i} H(v,u) dv/(2πi) = g_i(u)` of degree `< n` in `v`.
pub fn construct_h(f: &[LaurentSeries], g: &[RationalFunction]) -> Result<BridgeH> {
    if f.len() != g.len() {
        return Err(Error::Domain(format!("f has {} entries, g has {}", f.len(), g.len())));
    }
    let n = f.len();
    let alpha = alpha_polys(f)?;
    let mut vcoeffs = Vec::with_capacity(n);
    for d in 0..n {
        let weights = alpha
            .iter()
            .map(|a| a.coeff(d as i32))
            .collect::<Result<Vec<_>>>()?;
        vcoeffs.push(RationalFunction::lincomb(&weights, g)?);
    }
    Ok(BridgeH::new(vcoeffs))
}

/// `g_i(u) = ∮ f_i(v) v^{-i} H(v,u) dv/(2πi) = Σ_{d<i} H_d(u) [v^{i-1-d}] f_i`.
pub fn derive_g(h: &BridgeH, f: &[LaurentSeries]) -> Result<Vec<RationalFunction>> {
    f.iter()
        .enumerate()
        .map(|(i0, fi)| {
            let i = i0 as i32 + 1;
            let weights = (0..h.len().min(i as usize))
                .map(|d| fi.coeff(i - 1 - d as i32))
                .collect::<Result<Vec<_>>>()?;
            h.weighted(&weights)
        })
        .collect()
}

/// Precomputed per-variable factors `1/(v P_ℓ(v))` and `1/p_ℓ(v)` for one
/// choice of `p`.
#[derive(Clone, Debug)]
pub struct ChainEngine {
    factors: Vec<LaurentSeries>,
    recip_p: Vec<LaurentSeries>,
}

impl ChainEngine {
    pub fn new(p: &[LaurentSeries]) -> Result<Self> {
        let factors = chain_factors(p)?;
        let recip_p = p.iter().map(LaurentSeries::recip).collect::<Result<_>>()?;
        Ok(ChainEngine { factors, recip_p })
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    fn check_ell(&self, ell: usize) -> Result<()> {
        if ell == 0 || ell > self.n() {
            return Err(Error::Domain(format!("ell = {ell} outside 1..={}", self.n())));
        }
        Ok(())
    }

    /// Weights `w_d` with `T_ℓ(u) = Σ_d w_d H_d(u)`: the residue of `v^d`
    /// against the ℓ-fold nested chain collapsed onto `v_1`.
    pub fn t_weights(&self, ell: usize, count: usize) -> Result<Vec<Complex64>> {
        self.check_ell(ell)?;
        let t = nested_chain(&self.factors, ell - 1, 0);
        (0..count).map(|d| t.coeff(-(d as i32) - 1)).collect()
    }

    /// `T_ℓ(u) = ∮…∮ H(v_1,u) / ([∏(v_i - v_{i+1})] [∏ v_i P_i(v_i)])`.
    pub fn t_chain(&self, ell: usize, h: &BridgeH) -> Result<RationalFunction> {
        h.weighted(&self.t_weights(ell, h.len())?)
    }

    /// `T_1, …, T_n`.
    pub fn t_all(&self, h: &BridgeH) -> Result<Vec<RationalFunction>> {
        (1..=self.n()).map(|ell| self.t_chain(ell, h)).collect()
    }

    /// Weights of `L_ℓ^{(1)}, …, L_ℓ^{(ℓ)}` over the `v`-coefficients of `H`.
    ///
    /// `L_ℓ^{(ℓ)} = ∮ H / (v^ℓ p_ℓ)`. For `i < ℓ` the variables
    /// `v_ℓ, …, v_{i+1}` collapse to a series `t(v_{i+1})`, and expanding
    /// `1/(v_i - v_{i+1}) = -Σ_k v_i^k / v_{i+1}^{k+1}` gives
    /// `L_ℓ^{(i)} = Σ_{k<i} C_k ∮ H v^{k-i} / p_i` with `C_k = -[v^k] t`.
    pub fn decompose_weights(&self, ell: usize, count: usize) -> Result<Vec<Vec<Complex64>>> {
        self.check_ell(ell)?;
        let mut out = Vec::with_capacity(ell);
        for i in 1..ell {
            let t = nested_chain(&self.factors, ell - 1, i);
            let consts = (0..i)
                .map(|k| t.coeff(k as i32).map(|c| -c))
                .collect::<Result<Vec<_>>>()?;
            let rp = &self.recip_p[i - 1];
            let weights = (0..count)
                .map(|d| {
                    consts.iter().enumerate().try_fold(ZERO, |acc, (k, ck)| {
                        Ok(acc + ck * rp.coeff(i as i32 - k as i32 - 1 - d as i32)?)
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(weights);
        }
        let rp = &self.recip_p[ell - 1];
        let last = (0..count)
            .map(|d| rp.coeff(ell as i32 - 1 - d as i32))
            .collect::<Result<Vec<_>>>()?;
        out.push(last);
        Ok(out)
    }

    /// `(L_ℓ^{(1)}, …, L_ℓ^{(ℓ)})` as rational functions of `u`.
    pub fn trace_decompose(&self, ell: usize, h: &BridgeH) -> Result<Vec<RationalFunction>> {
        self.decompose_weights(ell, h.len())?
            .iter()
            .map(|w| h.weighted(w))
            .collect()
    }
}

/// `T_ℓ` for a single `ℓ`, building the chain factors from `p`.
pub fn t_chain(ell: usize, h: &BridgeH, p: &[LaurentSeries]) -> Result<RationalFunction> {
    ChainEngine::new(p)?.t_chain(ell, h)
}

/// `(L_ℓ^{(1)}, …, L_ℓ^{(ℓ)})`, building the chain factors from `p`.
pub fn trace_decompose(ell: usize, h: &BridgeH, p: &[LaurentSeries]) -> Result<Vec<RationalFunction>> {
    ChainEngine::new(p)?.trace_decompose(ell, h)
}

/// The finite-rank kernel acting on `L²(Γ, du/2πi)`.
#[derive(Clone, Debug)]
pub enum KernelForm {
    /// `Σ_ℓ q_ℓ(u₁) T_ℓ(u₂)` with `T_ℓ` from the nested chain.
    General {
        q: Vec<RationalFunction>,
        t: Vec<RationalFunction>,
    },
    /// `p ≡ 1`: `∮ [Σ_ℓ q_ℓ(u₁) v^{-ℓ}] H(v,u₂) dv/(2πi)`.
    SimplifiedP1 { q: Vec<RationalFunction>, h: BridgeH },
    /// `q_ℓ = u^{ℓ-1}`, `p ≡ 1`: `∮ u₁ⁿ H(v,u₂) / (vⁿ (u₁ - v)) dv/(2πi)`,
    /// valid for `|u₁| >= epsilon`.
    Bll { h: BridgeH, n: usize, epsilon: f64 },
}

impl KernelForm {
    pub fn n(&self) -> usize {
        match self {
            KernelForm::General { q, .. } | KernelForm::SimplifiedP1 { q, .. } => q.len(),
            KernelForm::Bll { n, .. } => *n,
        }
    }

    pub fn eval(&self, u1: Complex64, u2: Complex64) -> Result<Complex64> {
        match self {
            KernelForm::General { q, t } => q.iter().zip(t).try_fold(ZERO, |acc, (qi, ti)| {
                Ok(acc + qi.eval(u1)? * ti.eval(u2)?)
            }),
            KernelForm::SimplifiedP1 { q, h } => {
                let qs = q.iter().map(|r| r.eval(u1)).collect::<Result<Vec<_>>>()?;
                simplified_residue(&qs, &h.eval_coeffs(u2)?)
            }
            KernelForm::Bll { h, n, epsilon } => bll_residue(*n, *epsilon, u1, &h.eval_coeffs(u2)?),
        }
    }

    /// `K(u_a, u_b)` for all node pairs, rows in parallel.
    pub fn sample(&self, nodes: &[Complex64]) -> Result<ComplexMatrix> {
        let m = nodes.len();
        let rows: Vec<Vec<Complex64>> = match self {
            KernelForm::General { q, t } => {
                let qs = sample_rows(q, nodes)?;
                let ts = sample_rows(t, nodes)?;
                (0..m)
                    .into_par_iter()
                    .map(|a| {
                        (0..m)
                            .map(|b| qs.iter().zip(&ts).map(|(qr, tr)| qr[a] * tr[b]).sum())
                            .collect()
                    })
                    .collect()
            }
            KernelForm::SimplifiedP1 { q, h } => {
                let hs = nodes.iter().map(|u| h.eval_coeffs(*u)).collect::<Result<Vec<_>>>()?;
                nodes
                    .par_iter()
                    .map(|u1| {
                        let qs = q.iter().map(|r| r.eval(*u1)).collect::<Result<Vec<_>>>()?;
                        hs.iter().map(|hv| simplified_residue(&qs, hv)).collect()
                    })
                    .collect::<Result<_>>()?
            }
            KernelForm::Bll { h, n, epsilon } => {
                let hs = nodes.iter().map(|u| h.eval_coeffs(*u)).collect::<Result<Vec<_>>>()?;
                nodes
                    .par_iter()
                    .map(|u1| hs.iter().map(|hv| bll_residue(*n, *epsilon, *u1, hv)).collect())
                    .collect::<Result<_>>()?
            }
        };
        Ok(ComplexMatrix::from_rows(&rows))
    }
}

fn sample_rows(fs: &[RationalFunction], nodes: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
    fs.iter().map(|r| r.eval_many(nodes)).collect()
}

fn series_trunc(n: usize, hlen: usize) -> i32 {
    (n + hlen) as i32 + GUARD_TERMS
}

/// `∮ [Σ_ℓ qs[ℓ-1] v^{-ℓ}] H(v) dv/(2πi)` for `H` given by its `v`-coefficients.
fn simplified_residue(qs: &[Complex64], hv: &[Complex64]) -> Result<Complex64> {
    let trunc = series_trunc(qs.len(), hv.len());
    let n = qs.len() as i32;
    // Σ_ℓ q_ℓ v^{-ℓ}: stored from v^{-n} up to v^{-1}
    let principal = LaurentSeries::new(-n, qs.iter().rev().copied().collect(), trunc);
    principal.mul(&LaurentSeries::polynomial(hv, trunc)).residue()
}

/// `geom(u1) = 1/(u1 - v) = Σ_j v^j / u1^{j+1}` up to `v^trunc`.
fn inverse_linear(u1: Complex64, trunc: i32) -> LaurentSeries {
    let inv = u1.inv();
    let mut coeffs = Vec::with_capacity(trunc.max(0) as usize + 1);
    let mut pow = inv;
    for _ in 0..=trunc.max(0) {
        coeffs.push(pow);
        pow *= inv;
    }
    LaurentSeries::new(0, coeffs, trunc)
}

fn check_bll_point(epsilon: f64, u1: Complex64) -> Result<()> {
    if u1.norm() < epsilon * (1.0 - 1e-12) {
        return Err(Error::Domain(format!(
            "special-region kernel evaluated at |u1| = {} < epsilon = {epsilon}",
            u1.norm()
        )));
    }
    Ok(())
}

/// Residue at `v = 0` of `u1ⁿ H(v) v^{-n} / (u1 - v)`.
fn bll_residue(n: usize, epsilon: f64, u1: Complex64, hv: &[Complex64]) -> Result<Complex64> {
    check_bll_point(epsilon, u1)?;
    let trunc = series_trunc(n, hv.len());
    let h = LaurentSeries::polynomial(hv, trunc).shift(-(n as i32));
    let r = h.mul(&inverse_linear(u1, trunc)).residue()?;
    Ok(r * u1.powi(n as i32))
}

/// `∮ H(v,u₂) / (u₁ - v) dv/(2πi)`: the term subtracted when the
/// `q_ℓ = u^{ℓ-1}` sum is summed geometrically. Zero whenever `H` is
/// analytic at `v = 0`.
pub fn bll_subtracted_term(h: &BridgeH, epsilon: f64, u1: Complex64, u2: Complex64) -> Result<Complex64> {
    check_bll_point(epsilon, u1)?;
    let hv = h.eval_coeffs(u2)?;
    let trunc = series_trunc(0, hv.len());
    LaurentSeries::polynomial(&hv, trunc)
        .mul(&inverse_linear(u1, trunc))
        .residue()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{ContourSpec, QuadratureRule};
    use crate::funcs::Polynomial;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn r(re: f64) -> Complex64 {
        c(re, 0.0)
    }

    fn pseudo_random(seed: u64, count: usize) -> Vec<Complex64> {
        let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        (0..count).map(|_| c(next(), next())).collect()
    }

    fn rand_poly_series(seed: u64, deg: usize, scale: f64, trunc: i32) -> LaurentSeries {
        let mut cs = vec![r(1.0)];
        cs.extend(pseudo_random(seed, deg).into_iter().map(|z| z * scale));
        LaurentSeries::polynomial(&cs, trunc)
    }

    fn rand_rational(seed: u64) -> RationalFunction {
        let v = pseudo_random(seed, 4);
        // pole at -1 + 0.25 v[3] (inside the standard circle) or pushed outside
        let pole = if seed.is_multiple_of(2) { r(-1.0) + v[3] * 0.2 } else { r(-1.0) + v[3] / v[3].norm() * 0.9 };
        RationalFunction::new(Polynomial::new(v[..3].to_vec()), Polynomial::new(vec![-pole, r(1.0)])).unwrap()
    }

    fn standard_rule() -> QuadratureRule {
        QuadratureRule::new(ContourSpec::standard(), 128).unwrap()
    }

    fn ones(n: usize, trunc: i32) -> Vec<LaurentSeries> {
        (0..n).map(|_| LaurentSeries::one(trunc)).collect()
    }

    #[test]
    fn construct_h_with_unit_f_is_g() {
        let g: Vec<_> = (0..3).map(rand_rational).collect();
        let h = construct_h(&ones(3, 12), &g).unwrap();
        assert_eq!(h.len(), 3);
        for (hd, gd) in h.vcoeffs.iter().zip(&g) {
            for u in standard_rule().nodes() {
                assert!((hd.eval(*u).unwrap() - gd.eval(*u).unwrap()).norm() < 1e-15);
            }
        }
        let h1 = construct_h(&[rand_poly_series(3, 2, 0.3, 12)], &g[..1]).unwrap();
        assert_eq!(h1.len(), 1);
        let u = standard_rule().nodes()[5];
        assert!((h1.vcoeffs[0].eval(u).unwrap() - g[0].eval(u).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn derive_g_examples() {
        let trunc = 12;
        // H = 1 → g_i = [v^{i-1}] f_i
        let h = BridgeH::new(vec![RationalFunction::constant(r(1.0))]);
        let f = vec![
            LaurentSeries::polynomial(&[r(1.0), r(5.0), r(10.0), r(10.0), r(5.0), r(1.0)], trunc);
            3
        ];
        let g = derive_g(&h, &f).unwrap();
        let u = c(0.3, 0.2);
        assert_eq!(g[0].eval(u).unwrap(), r(1.0));
        assert_eq!(g[2].eval(u).unwrap(), r(10.0));

        let h = BridgeH::new(vec![RationalFunction::zero(), RationalFunction::constant(r(1.0))]);
        let g = derive_g(&h, &ones(2, trunc)).unwrap();
        assert!(g[0].is_zero());
        assert_eq!(g[1].eval(u).unwrap(), r(1.0));
    }

    #[test]
    fn bridge_round_trip() {
        let n = 5;
        let trunc = crate::series::default_trunc(n, 3);
        let f: Vec<_> = (0..n).map(|i| rand_poly_series(40 + i as u64, 3, 0.25, trunc)).collect();
        let g: Vec<_> = (0..n).map(|i| rand_rational(60 + i as u64)).collect();
        let h = construct_h(&f, &g).unwrap();
        let g2 = derive_g(&h, &f).unwrap();
        for u in standard_rule().nodes() {
            for (a, b) in g.iter().zip(&g2) {
                assert!((a.eval(*u).unwrap() - b.eval(*u).unwrap()).norm() <= 1e-11);
            }
        }
    }

    #[test]
    fn t_chain_collapses_for_unit_p() {
        let n = 6;
        let engine = ChainEngine::new(&ones(n, 20)).unwrap();
        for ell in 1..=n {
            let w = engine.t_weights(ell, n + 2).unwrap();
            for (d, wd) in w.iter().enumerate() {
                let expect = if d == ell - 1 { 1.0 } else { 0.0 };
                assert!((wd - expect).norm() <= 1e-13, "ell {ell} d {d}");
            }
        }
    }

    #[test]
    fn t_chain_single_link() {
        let trunc = 14;
        let p: Vec<_> = (0..3).map(|i| rand_poly_series(i, 2, 0.4, trunc)).collect();
        let engine = ChainEngine::new(&p).unwrap();
        let w = engine.t_weights(1, 4).unwrap();
        let direct = p[0].shift(1).recip().unwrap();
        for (d, wd) in w.iter().enumerate() {
            assert_eq!(*wd, direct.coeff(-(d as i32) - 1).unwrap());
        }
        assert!(engine.t_weights(0, 2).is_err());
        assert!(engine.t_weights(4, 2).is_err());
    }

    #[test]
    fn kernel_trivial_cases() {
        let g1 = rand_rational(7);
        let h = BridgeH::new(vec![g1.clone()]);
        let t = ChainEngine::new(&ones(1, 10)).unwrap().t_all(&h).unwrap();
        let form = KernelForm::General { q: vec![RationalFunction::constant(r(1.0))], t };
        let (u1, u2) = (c(-0.6, 0.2), c(-1.3, -0.4));
        assert!((form.eval(u1, u2).unwrap() - g1.eval(u2).unwrap()).norm() < 1e-15);

        let zero_q = KernelForm::General {
            q: vec![RationalFunction::zero(); 2],
            t: vec![g1.clone(), g1],
        };
        assert_eq!(zero_q.eval(u1, u2).unwrap(), ZERO);
    }

    #[test]
    fn kernel_forms_agree_for_unit_p_and_power_q() {
        let n = 4;
        let g: Vec<_> = (0..n).map(|i| rand_rational(80 + i as u64)).collect();
        let f: Vec<_> = (0..n).map(|i| rand_poly_series(90 + i as u64, 2, 0.3, 16)).collect();
        let h = construct_h(&f, &g).unwrap();
        let q: Vec<_> = (0..n)
            .map(|l| RationalFunction::polynomial(Polynomial::monomial(l, r(1.0))))
            .collect();
        let t = ChainEngine::new(&ones(n, 16)).unwrap().t_all(&h).unwrap();
        let general = KernelForm::General { q: q.clone(), t };
        let simplified = KernelForm::SimplifiedP1 { q, h: h.clone() };
        let eps = ContourSpec::standard().bll_epsilon().unwrap();
        let bll = KernelForm::Bll { h: h.clone(), n, epsilon: eps };
        let nodes = QuadratureRule::new(ContourSpec::standard(), 32).unwrap().nodes().to_vec();
        let kg = general.sample(&nodes).unwrap();
        let ks = simplified.sample(&nodes).unwrap();
        let kb = bll.sample(&nodes).unwrap();
        assert!(kg.max_abs_diff(&ks) <= 1e-10);
        assert!(kg.max_abs_diff(&kb) <= 1e-10);
        for a in [0usize, 7, 19] {
            for b in [3usize, 30] {
                assert!((bll.eval(nodes[a], nodes[b]).unwrap() - kb[(a, b)]).norm() < 1e-15);
                assert_eq!(bll_subtracted_term(&h, eps, nodes[a], nodes[b]).unwrap(), ZERO);
            }
        }
    }

    #[test]
    fn bll_rejects_points_inside_epsilon() {
        let h = BridgeH::new(vec![RationalFunction::constant(r(1.0))]);
        let form = KernelForm::Bll { h, n: 1, epsilon: 0.5 };
        assert!(form.eval(c(0.1, 0.0), c(-1.0, 0.5)).is_err());
        assert!(form.eval(c(-0.5, 0.0), c(-1.0, 0.5)).is_ok());
    }

    #[test]
    fn decomposition_for_unit_p() {
        let n = 5;
        let h = BridgeH::new((0..n).map(|i| rand_rational(20 + i as u64)).collect());
        let engine = ChainEngine::new(&ones(n, 20)).unwrap();
        let nodes = standard_rule().nodes().to_vec();
        for ell in 1..=n {
            let parts = engine.trace_decompose(ell, &h).unwrap();
            assert_eq!(parts.len(), ell);
            let sum = RationalFunction::lincomb(&vec![r(1.0); ell], &parts).unwrap();
            for u in &nodes {
                let expect = h.vcoeffs[ell - 1].eval(*u).unwrap();
                assert!((sum.eval(*u).unwrap() - expect).norm() <= 1e-12);
            }
        }
        let one = engine.trace_decompose(1, &h).unwrap();
        let t1 = engine.t_chain(1, &h).unwrap();
        for u in &nodes {
            assert!((one[0].eval(*u).unwrap() - t1.eval(*u).unwrap()).norm() <= 1e-15);
        }
    }

    #[test]
    fn decomposition_sums_to_chain() {
        let n = 5;
        let trunc = crate::series::default_trunc(n, 3);
        let p: Vec<_> = (0..n).map(|i| rand_poly_series(300 + i as u64, 3, 0.27, trunc)).collect();
        let engine = ChainEngine::new(&p).unwrap();
        let count = n;
        for ell in 1..=n {
            let parts = engine.decompose_weights(ell, count).unwrap();
            let full = engine.t_weights(ell, count).unwrap();
            for d in 0..count {
                let s: Complex64 = parts.iter().map(|w| w[d]).sum();
                assert!((s - full[d]).norm() <= 1e-12, "ell {ell} d {d}: {s} vs {}", full[d]);
            }
        }
    }
}
