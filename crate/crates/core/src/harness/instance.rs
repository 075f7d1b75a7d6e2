//! Problem instances and their JSON form.
//!
//! ```json
//! {"n": 2,
//!  "p": [[[1,0]], [[1,0],[0.1,0]]],
//!  "f": [[[1,0]], [[1,0]]],
//!  "q": [{"num": [[1,0]], "den": [[1,0]]}, …],
//!  "H": [{"num": …, "den": …}, …],      (optional)
//!  "g": [{"num": …, "den": …}, …],      (optional)
//!  "contour": {"kind": "circle", "center": [-1, 0], "radius": 0.5},
//!  "seed": 42}
//! ```
//!
//! Complex numbers are `[re, im]`, polynomial coefficients ascend.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{ContourSpec, QuadratureRule, DEFAULT_NODES, POLE_PROBE_TOL};
use crate::error::{Error, Result};
use crate::funcs::{Polynomial, RationalFunction};
use crate::kernel::{construct_h, derive_g, BridgeH};
use crate::series::{default_trunc, LaurentSeries};
use crate::structmat::MAX_N;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
/// Largest admissible `|∮ f_i v^{-i} H - g_i|` when both `H` and `g` are given.
pub const BRIDGE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub n: usize,
    /// `p_i(v)`, ascending coefficients.
    pub p: Vec<Polynomial>,
    /// `f_i(v)`, ascending coefficients.
    pub f: Vec<Polynomial>,
    pub q: Vec<RationalFunction>,
    pub h: Option<BridgeH>,
    pub g: Option<Vec<RationalFunction>>,
    pub contour: ContourSpec,
    pub seed: Option<u64>,
}

impl Instance {
    pub fn max_degree(&self) -> usize {
        let poly = self.p.iter().chain(&self.f).map(Polynomial::degree).max().unwrap_or(0);
        let hdeg = self.h.as_ref().map_or(0, |h| h.len().saturating_sub(1));
        poly.max(hdeg)
    }

    /// Truncation order for every series built from this instance.
    pub fn trunc(&self) -> i32 {
        default_trunc(self.n, self.max_degree())
    }

    pub fn p_series(&self) -> Vec<LaurentSeries> {
        let trunc = self.trunc();
        self.p.iter().map(|x| LaurentSeries::polynomial(x.coeffs(), trunc)).collect()
    }

    pub fn f_series(&self) -> Vec<LaurentSeries> {
        let trunc = self.trunc();
        self.f.iter().map(|x| LaurentSeries::polynomial(x.coeffs(), trunc)).collect()
    }

    /// `p_i ≡ 1` for every `i`.
    pub fn p_is_one(&self) -> bool {
        self.p.iter().all(|x| x.coeffs() == [ONE])
    }

    /// The bridge pair `(H, g)`, completing whichever side is absent.
    pub fn bridge(&self) -> Result<(BridgeH, Vec<RationalFunction>)> {
        match (&self.h, &self.g) {
            (Some(h), Some(g)) => Ok((h.clone(), g.clone())),
            (Some(h), None) => Ok((h.clone(), derive_g(h, &self.f_series())?)),
            (None, Some(g)) => Ok((construct_h(&self.f_series(), g)?, g.clone())),
            (None, None) => Err(Error::Invariant("instance has neither H nor g".into())),
        }
    }

    /// Check every hypothesis: sizes, unit constant terms, no poles on the
    /// contour and, when both `H` and `g` are given, the bridge relation.
    pub fn validate(&self, allow_large_n: bool) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Invariant("n must be at least 1".into()));
        }
        if n > MAX_N && !allow_large_n {
            return Err(Error::Invariant(format!("n = {n} exceeds {MAX_N} without an override")));
        }
        for (name, len) in [("p", self.p.len()), ("f", self.f.len()), ("q", self.q.len())] {
            if len != n {
                return Err(Error::Invariant(format!("{name} has {len} entries, expected n = {n}")));
            }
        }
        if let Some(g) = &self.g {
            if g.len() != n {
                return Err(Error::Invariant(format!("g has {} entries, expected n = {n}", g.len())));
            }
        }
        if self.h.is_none() && self.g.is_none() {
            return Err(Error::Invariant("at least one of H and g must be given".into()));
        }
        for (name, polys) in [("p", &self.p), ("f", &self.f)] {
            for (i, x) in polys.iter().enumerate() {
                let c0 = x.coeffs().first().copied().unwrap_or_default();
                if c0 != ONE {
                    return Err(Error::Invariant(format!(
                        "{name}[{i}](0) = {c0}, expected exactly 1"
                    )));
                }
            }
        }
        let probe = self.contour.probe_points();
        let mut named: Vec<(String, &RationalFunction)> = Vec::new();
        named.extend(self.q.iter().enumerate().map(|(i, r)| (format!("q[{i}]"), r)));
        if let Some(g) = &self.g {
            named.extend(g.iter().enumerate().map(|(i, r)| (format!("g[{i}]"), r)));
        }
        if let Some(h) = &self.h {
            named.extend(h.vcoeffs.iter().enumerate().map(|(d, r)| (format!("H[{d}]"), r)));
        }
        for (name, r) in named {
            if let Some((k, u)) = probe
                .iter()
                .enumerate()
                .find(|(_, u)| r.den().eval(**u).norm() < POLE_PROBE_TOL)
            {
                return Err(Error::Invariant(format!(
                    "{name} denominator vanishes on the contour at probe node {k}, u = {u}"
                )));
            }
        }
        if let (Some(h), Some(g)) = (&self.h, &self.g) {
            let rule = QuadratureRule::new(self.contour, DEFAULT_NODES)?;
            let gap = bridge_residual(h, g, &self.f_series(), rule.nodes())?;
            if gap > BRIDGE_TOL {
                return Err(Error::Invariant(format!(
                    "H and g are both given but violate the bridge relation by {gap:.3e}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes")
    }

    /// Parse and validate.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        let inst = file.into_instance()?;
        inst.validate(false)?;
        Ok(inst)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// `max_{i,a} |∮ f_i(v) v^{-i} H(v,u_a) dv/(2πi) - g_i(u_a)|`, each residue
/// read from the series product at the node.
pub fn bridge_residual(
    h: &BridgeH,
    g: &[RationalFunction],
    f: &[LaurentSeries],
    nodes: &[Complex64],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for u in nodes {
        let hs = h.series_at(*u, f.first().map_or(0, LaurentSeries::trunc))?;
        for (i, (fi, gi)) in f.iter().zip(g).enumerate() {
            let lhs = fi.mul(&hs).shift(-(i as i32) - 1).residue()?;
            worst = worst.max((lhs - gi.eval(*u)?).norm());
        }
    }
    Ok(worst)
}

type Cx = [f64; 2];

fn cx(c: &Complex64) -> Cx {
    [c.re, c.im]
}

fn from_cx(v: &[Cx]) -> Vec<Complex64> {
    v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RationalFile {
    num: Vec<Cx>,
    den: Vec<Cx>,
}

impl From<&RationalFunction> for RationalFile {
    fn from(r: &RationalFunction) -> Self {
        RationalFile {
            num: r.num().coeffs().iter().map(cx).collect(),
            den: r.den().coeffs().iter().map(cx).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContourFile {
    kind: String,
    center: Cx,
    radius: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    p: Vec<Vec<Cx>>,
    f: Vec<Vec<Cx>>,
    q: Vec<RationalFile>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    h: Option<Vec<RationalFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<Vec<RationalFile>>,
    contour: ContourFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        let polys = |v: &[Polynomial]| v.iter().map(|x| x.coeffs().iter().map(cx).collect()).collect();
        let rats = |v: &[RationalFunction]| v.iter().map(RationalFile::from).collect();
        InstanceFile {
            n: inst.n,
            p: polys(&inst.p),
            f: polys(&inst.f),
            q: rats(&inst.q),
            h: inst.h.as_ref().map(|h| rats(&h.vcoeffs)),
            g: inst.g.as_deref().map(rats),
            contour: ContourFile {
                kind: "circle".into(),
                center: cx(&inst.contour.center),
                radius: inst.contour.radius,
            },
            seed: inst.seed,
        }
    }
}

impl InstanceFile {
    fn into_instance(self) -> Result<Instance> {
        let rats = |name: &str, v: Vec<RationalFile>| -> Result<Vec<RationalFunction>> {
            v.into_iter()
                .enumerate()
                .map(|(i, r)| {
                    RationalFunction::from_coeffs(from_cx(&r.num), from_cx(&r.den)).map_err(|e| Error::Parse {
                        path: format!("{name}[{i}].den"),
                        message: e.to_string(),
                    })
                })
                .collect()
        };
        if self.contour.kind != "circle" {
            return Err(Error::Parse {
                path: "contour.kind".into(),
                message: format!("unsupported contour kind `{}`", self.contour.kind),
            });
        }
        let [re, im] = self.contour.center;
        let contour = ContourSpec::circle(Complex64::new(re, im), self.contour.radius).map_err(|e| Error::Parse {
            path: "contour.radius".into(),
            message: e.to_string(),
        })?;
        Ok(Instance {
            n: self.n,
            p: self.p.iter().map(|x| Polynomial::new(from_cx(x))).collect(),
            f: self.f.iter().map(|x| Polynomial::new(from_cx(x))).collect(),
            q: rats("q", self.q)?,
            h: self.h.map(|v| rats("H", v)).transpose()?.map(BridgeH::new),
            g: self.g.map(|v| rats("g", v)).transpose()?,
            contour,
            seed: self.seed,
        })
    }
}
