//! End-to-end check of `det(A + B) = det(I + K)` and of every intermediate
//! identity behind it.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use super::instance::{bridge_residual, Instance};
use crate::contour::{QuadratureRule, DEFAULT_NODES};
use crate::error::{Error, Result};
use crate::fredholm::{nystrom_det, rank_matrix};
use crate::funcs::RationalFunction;
use crate::kernel::{bll_subtracted_term, ChainEngine, KernelForm};
use crate::structmat::{
    alpha_polys, build_a, build_b, build_r, build_s, build_w, expansion_coeffs, lu_det, tri_inverse,
};

/// Thresholds applied to the report. Every gap is an absolute max-norm
/// except the two determinant differences, which are relative to
/// `max(1, |det_finite|)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub identity: f64,
    pub lemma: f64,
    pub sr: f64,
    pub inverse: f64,
    pub ortho: f64,
    pub bridge: f64,
    pub decomp: f64,
    pub expansion: f64,
    pub stability: f64,
    pub transpose: f64,
    pub variants: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-8,
            lemma: 1e-10,
            sr: 1e-12,
            inverse: 1e-10,
            ortho: 1e-12,
            bridge: 1e-10,
            decomp: 1e-9,
            expansion: 1e-10,
            stability: 1e-9,
            transpose: 1e-10,
            variants: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub nodes: usize,
    pub tol: Tolerances,
    /// Fail when the special-region kernel cannot be evaluated.
    pub require_bll: bool,
    pub allow_large_n: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            nodes: DEFAULT_NODES,
            tol: Tolerances::default(),
            require_bll: false,
            allow_large_n: false,
        }
    }
}

/// Node-wise maximum deviations between the kernel forms, over all pairs of
/// quadrature nodes. Only forms whose preconditions hold are filled.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VariantGaps {
    pub simplified_vs_general: Option<f64>,
    pub bll_vs_general: Option<f64>,
    pub bll_vs_simplified: Option<f64>,
    /// `max |∮ H(v,u₂)/(u₁ - v) dv/(2πi)|`, expected to vanish.
    pub bll_subtracted_term: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageFailure {
    pub stage: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub n: usize,
    pub nodes: usize,
    pub det_finite: Complex64,
    pub det_rank: Complex64,
    pub det_nystrom: Complex64,
    pub rel_diff_rank: f64,
    pub rel_diff_nystrom: f64,
    /// `|det_nystrom(m) - det_nystrom(2m)|`.
    pub stability_gap: f64,
    /// Nyström determinant of the transposed kernel minus the original.
    pub transpose_gap: f64,
    /// `max(|SW - I|, |WS - I|)`.
    pub lemma_gap: f64,
    /// `|SR - A|`.
    pub sr_gap: f64,
    /// `|A⁻¹ - R⁻¹W|`.
    pub inverse_gap: f64,
    pub ortho_gap: f64,
    pub bridge_gap: f64,
    /// `max_ℓ |Σ_i L_ℓ^{(i)} - T_ℓ|` over the nodes.
    pub decomp_gap: f64,
    /// `max_ℓ |L_ℓ^{(ℓ)} - Σ_j c_{ℓ,j} g_j|` over the nodes.
    pub expansion_gap: f64,
    pub decomp_by_ell: Vec<f64>,
    pub variants: VariantGaps,
    pub failed_checks: Vec<String>,
    pub stability_flag: bool,
    pub passed: bool,
    pub failure: Option<StageFailure>,
    pub timings: BTreeMap<String, f64>,
}

/// Process exit status for a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass = 0,
    IdentityFailure = 1,
    InputError = 2,
    Unstable = 3,
}

impl VerificationReport {
    fn empty(n: usize, nodes: usize) -> Self {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        VerificationReport {
            n,
            nodes,
            det_finite: nan,
            det_rank: nan,
            det_nystrom: nan,
            rel_diff_rank: f64::NAN,
            rel_diff_nystrom: f64::NAN,
            stability_gap: f64::NAN,
            transpose_gap: f64::NAN,
            lemma_gap: f64::NAN,
            sr_gap: f64::NAN,
            inverse_gap: f64::NAN,
            ortho_gap: f64::NAN,
            bridge_gap: f64::NAN,
            decomp_gap: f64::NAN,
            expansion_gap: f64::NAN,
            decomp_by_ell: Vec::new(),
            variants: VariantGaps::default(),
            failed_checks: Vec::new(),
            stability_flag: false,
            passed: false,
            failure: None,
            timings: BTreeMap::new(),
        }
    }

    pub fn outcome(&self) -> Outcome {
        if self.failure.is_some() {
            Outcome::InputError
        } else if self.failed_checks.iter().any(|c| c != "stability") {
            Outcome::IdentityFailure
        } else if self.stability_flag {
            Outcome::Unstable
        } else {
            Outcome::Pass
        }
    }

    /// JSON with the timings block removed, for reproducibility comparisons.
    pub fn to_json_without_timings(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("timings");
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn rel_diff(x: Complex64, reference: Complex64) -> f64 {
    (x - reference).norm() / reference.norm().max(1.0)
}

fn max_gap(a: &RationalFunction, b: &RationalFunction, nodes: &[Complex64]) -> Result<f64> {
    nodes.iter().try_fold(0.0f64, |acc, u| Ok(acc.max((a.eval(*u)? - b.eval(*u)?).norm())))
}

struct Stages<'a> {
    report: &'a mut VerificationReport,
    clock: Instant,
}

impl Stages<'_> {
    fn run<T>(&mut self, stage: &str, body: impl FnOnce(&mut VerificationReport) -> Result<T>) -> Result<T> {
        self.clock = Instant::now();
        let out = body(self.report);
        let ms = self.clock.elapsed().as_secs_f64() * 1e3;
        self.report.timings.insert(stage.to_string(), ms);
        out.inspect_err(|e| {
            self.report.failure = Some(StageFailure {
                stage: stage.to_string(),
                message: e.to_string(),
            });
        })
    }
}

/// Build every object of the identity from `inst`, evaluate both sides by
/// all routes and record each intermediate identity's residual.
///
/// Never panics on bad input; a failing stage is recorded in
/// `report.failure` and the remaining fields stay `NaN`.
pub fn verify_identity(inst: &Instance, cfg: &VerifyConfig) -> VerificationReport {
    let mut report = VerificationReport::empty(inst.n, cfg.nodes);
    let started = Instant::now();
    let _ = run_stages(inst, cfg, &mut report);
    report
        .timings
        .insert("total".into(), started.elapsed().as_secs_f64() * 1e3);
    finish(&mut report, &cfg.tol);
    report
}

fn run_stages(inst: &Instance, cfg: &VerifyConfig, report: &mut VerificationReport) -> Result<()> {
    let mut st = Stages {
        report,
        clock: Instant::now(),
    };

    let (p, f, rule, h, g) = st.run("setup", |_| {
        inst.validate(cfg.allow_large_n)?;
        let rule = QuadratureRule::new(inst.contour, cfg.nodes)?;
        let (h, g) = inst.bridge()?;
        Ok((inst.p_series(), inst.f_series(), rule, h, g))
    })?;
    let nodes = rule.nodes();

    let a = st.run("structure", |r| {
        let a = build_a(&p, &f)?;
        let s = build_s(&p)?;
        let rm = build_r(&f)?;
        let w = build_w(&p)?;
        r.lemma_gap = s.matmul(&w).identity_gap().max(w.matmul(&s).identity_gap());
        r.sr_gap = s.matmul(&rm).max_abs_diff(&a);
        r.inverse_gap = tri_inverse(&a)?.max_abs_diff(&tri_inverse(&rm)?.matmul(&w));
        let alpha = alpha_polys(&f)?;
        let mut ortho: f64 = 0.0;
        for (i, ai) in alpha.iter().enumerate() {
            for (j, fj) in f.iter().enumerate() {
                let val = ai.mul(fj).shift(-(j as i32) - 1).residue()?;
                let delta = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((val - delta).norm());
            }
        }
        r.ortho_gap = ortho;
        Ok(a)
    })?;

    st.run("bridge", |r| {
        r.bridge_gap = bridge_residual(&h, &g, &f, nodes)?;
        Ok(())
    })?;

    st.run("finite", |r| {
        let b = build_b(&inst.q, &g, &rule)?;
        r.det_finite = lu_det(&a.add(&b))?;
        Ok(())
    })?;

    let (engine, t) = st.run("chain", |_| {
        let engine = ChainEngine::new(&p)?;
        let t = engine.t_all(&h)?;
        Ok((engine, t))
    })?;

    st.run("rank", |r| {
        r.det_rank = lu_det(&rank_matrix(&inst.q, &t, &rule)?)?;
        r.rel_diff_rank = rel_diff(r.det_rank, r.det_finite);
        Ok(())
    })?;

    let general = KernelForm::General {
        q: inst.q.clone(),
        t: t.clone(),
    };
    let k_general = st.run("nystrom", |r| {
        let k = general.sample(nodes)?;
        r.det_nystrom = nystrom_det(&k, &rule)?;
        r.rel_diff_nystrom = rel_diff(r.det_nystrom, r.det_finite);
        r.transpose_gap = (nystrom_det(&k.transpose(), &rule)? - r.det_nystrom).norm();
        let fine = rule.refined();
        let fine_det = nystrom_det(&general.sample(fine.nodes())?, &fine)?;
        r.stability_gap = (fine_det - r.det_nystrom).norm();
        Ok(k)
    })?;

    st.run("trace", |r| {
        let mut by_ell = Vec::with_capacity(inst.n);
        let mut expansion: f64 = 0.0;
        for ell in 1..=inst.n {
            let parts = engine.trace_decompose(ell, &h)?;
            let sum = RationalFunction::lincomb(&vec![Complex64::new(1.0, 0.0); ell], &parts)?;
            by_ell.push(max_gap(&sum, &t[ell - 1], nodes)?);
            let c = expansion_coeffs(ell, &p[ell - 1], &f)?;
            let via_g = RationalFunction::lincomb(&c, &g[..ell])?;
            expansion = expansion.max(max_gap(&parts[ell - 1], &via_g, nodes)?);
        }
        r.decomp_gap = by_ell.iter().copied().fold(0.0, f64::max);
        r.decomp_by_ell = by_ell;
        r.expansion_gap = expansion;
        Ok(())
    })?;

    st.run("variants", |r| {
        if !inst.p_is_one() {
            if cfg.require_bll {
                return Err(Error::Domain("special-region kernel needs p ≡ 1".into()));
            }
            return Ok(());
        }
        let simplified = KernelForm::SimplifiedP1 {
            q: inst.q.clone(),
            h: h.clone(),
        };
        let k_simple = simplified.sample(nodes)?;
        r.variants.simplified_vs_general = Some(k_simple.max_abs_diff(&k_general));

        let powers = q_is_powers(&inst.q, &inst.contour.probe_points());
        match (inst.contour.bll_epsilon(), powers) {
            (Some(epsilon), true) => {
                let bll = KernelForm::Bll {
                    h: h.clone(),
                    n: inst.n,
                    epsilon,
                };
                let k_bll = bll.sample(nodes)?;
                r.variants.bll_vs_general = Some(k_bll.max_abs_diff(&k_general));
                r.variants.bll_vs_simplified = Some(k_bll.max_abs_diff(&k_simple));
                let mut sub: f64 = 0.0;
                for u1 in nodes {
                    for u2 in nodes {
                        sub = sub.max(bll_subtracted_term(&h, epsilon, *u1, *u2)?.norm());
                    }
                }
                r.variants.bll_subtracted_term = Some(sub);
            }
            _ if cfg.require_bll => {
                return Err(Error::Domain(
                    "special-region kernel needs q_ℓ = u^(ℓ-1) and a contour inside |u+1| < 1 away from 0".into(),
                ))
            }
            _ => {}
        }
        Ok(())
    })?;
    Ok(())
}

/// `q_ℓ(u) = u^{ℓ-1}` at every probe point.
fn q_is_powers(q: &[RationalFunction], probe: &[Complex64]) -> bool {
    q.iter().enumerate().all(|(l, r)| {
        probe.iter().all(|u| match r.eval(*u) {
            Ok(val) => {
                let expect = u.powi(l as i32);
                (val - expect).norm() <= 1e-14 * expect.norm().max(1.0)
            }
            Err(_) => false,
        })
    })
}

fn finish(report: &mut VerificationReport, tol: &Tolerances) {
    let mut checks: Vec<(&str, f64, f64)> = vec![
        ("rel_diff_rank", report.rel_diff_rank, tol.identity),
        ("rel_diff_nystrom", report.rel_diff_nystrom, tol.identity),
        ("lemma", report.lemma_gap, tol.lemma),
        ("sr", report.sr_gap, tol.sr),
        ("inverse", report.inverse_gap, tol.inverse),
        ("ortho", report.ortho_gap, tol.ortho),
        ("bridge", report.bridge_gap, tol.bridge),
        ("decomp", report.decomp_gap, tol.decomp),
        ("expansion", report.expansion_gap, tol.expansion),
        ("transpose", report.transpose_gap, tol.transpose),
    ];
    let v = &report.variants;
    for (name, gap) in [
        ("simplified_vs_general", v.simplified_vs_general),
        ("bll_vs_general", v.bll_vs_general),
        ("bll_vs_simplified", v.bll_vs_simplified),
        ("bll_subtracted_term", v.bll_subtracted_term),
    ] {
        if let Some(gap) = gap {
            checks.push((name, gap, tol.variants));
        }
    }
    // NaN (stage never reached) fails the comparison as well.
    let failed = |val: f64, limit: f64| val.is_nan() || val > limit;
    report.failed_checks = checks
        .iter()
        .filter(|(_, val, limit)| failed(*val, *limit))
        .map(|(name, _, _)| name.to_string())
        .collect();
    report.stability_flag = failed(report.stability_gap, tol.stability);
    if report.stability_flag {
        report.failed_checks.push("stability".into());
    }
    report.passed = report.failure.is_none() && report.failed_checks.is_empty();
}
