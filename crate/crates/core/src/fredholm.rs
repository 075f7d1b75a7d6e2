//! `det(I + K)` on `L²(Γ, du/2πi)` by two independent routes: the exact
//! `n × n` reduction of a rank-`n` kernel, and Nyström discretization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::QuadratureRule;
use crate::error::{Error, Result};
use crate::funcs::RationalFunction;
use crate::kernel::KernelForm;
use crate::structmat::{lu_det, sample_all, ComplexMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rank,
    Nystrom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FredholmResult {
    pub value: Complex64,
    pub method: Method,
    /// Node count of the primary Nyström evaluation.
    pub m_used: Option<usize>,
    /// `|det(m) - det(2m)|` for Nyström evaluations.
    pub stability_gap: Option<f64>,
}

/// For `K(u₁,u₂) = Σ_ℓ q_ℓ(u₁) T_ℓ(u₂)`, `det(I + K) = det(I_n + G)` with
/// `G(m,ℓ) = ∫_Γ q_m T_ℓ du/(2πi)`.
pub fn fred_det_rank(q: &[RationalFunction], t: &[RationalFunction], rule: &QuadratureRule) -> Result<FredholmResult> {
    Ok(FredholmResult {
        value: lu_det(&rank_matrix(q, t, rule)?)?,
        method: Method::Rank,
        m_used: None,
        stability_gap: None,
    })
}

/// `I_n + G` of the rank reduction.
pub fn rank_matrix(q: &[RationalFunction], t: &[RationalFunction], rule: &QuadratureRule) -> Result<ComplexMatrix> {
    if q.len() != t.len() {
        return Err(Error::Domain(format!("q has {} entries, T has {}", q.len(), t.len())));
    }
    let n = q.len();
    let qs = sample_all(q, rule, "q")?;
    let ts = sample_all(t, rule, "T")?;
    ComplexMatrix::try_from_fn(n, n, |m, l| {
        let samples: Vec<_> = qs[m].iter().zip(&ts[l]).map(|(a, b)| a * b).collect();
        let g = rule.integrate(&samples)?;
        Ok(if m == l { g + 1.0 } else { g })
    })
}

/// `det(δ_ab + K(u_a,u_b) w_b)` for kernel samples `K(u_a,u_b)` on the nodes
/// of `rule`.
pub fn nystrom_det(samples: &ComplexMatrix, rule: &QuadratureRule) -> Result<Complex64> {
    let m = rule.m();
    if samples.rows() != m || samples.cols() != m {
        return Err(Error::Domain(format!(
            "kernel samples are {}×{}, rule has {m} nodes",
            samples.rows(),
            samples.cols()
        )));
    }
    let w = rule.weights();
    let d = ComplexMatrix::from_fn(m, m, |a, b| {
        let k = samples[(a, b)] * w[b];
        if a == b {
            k + 1.0
        } else {
            k
        }
    });
    lu_det(&d)
}

/// Nyström determinant at the nodes of `rule`, repeated on the doubled rule
/// to record the stability gap.
pub fn fred_det_nystrom(form: &KernelForm, rule: &QuadratureRule) -> Result<FredholmResult> {
    let value = nystrom_det(&form.sample(rule.nodes())?, rule)?;
    let fine = rule.refined();
    let value_fine = nystrom_det(&form.sample(fine.nodes())?, &fine)?;
    Ok(FredholmResult {
        value,
        method: Method::Nystrom,
        m_used: Some(rule.m()),
        stability_gap: Some((value - value_fine).norm()),
    })
}
