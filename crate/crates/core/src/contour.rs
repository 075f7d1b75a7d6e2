//! Circular contours and the trapezoidal rule for `∮_Γ h(u) du/(2πi)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 8;
pub const DEFAULT_NODES: usize = 128;
/// Number of sample points used to probe denominators on a contour.
pub const POLE_PROBE_POINTS: usize = 4096;
/// Smallest admissible `|den(u)|` over the probe.
pub const POLE_PROBE_TOL: f64 = 1e-8;

/// A counterclockwise circle `|u - center| = radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub center: Complex64,
    pub radius: f64,
}

impl ContourSpec {
    pub fn circle(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::Config(format!("circle radius must be positive and finite, got {radius}")));
        }
        Ok(ContourSpec { center, radius })
    }

    /// The circle `|u + 1| = 1/2` used by the generators.
    pub fn standard() -> Self {
        ContourSpec {
            center: Complex64::new(-1.0, 0.0),
            radius: 0.5,
        }
    }

    /// `min |u|` over the circle when the circle lies in
    /// `{|u + 1| < 1} \ {|u| < ε}` for some `ε > 0`; `None` otherwise.
    pub fn bll_epsilon(&self) -> Option<f64> {
        let eps = self.center.norm() - self.radius;
        let outer = (self.center + 1.0).norm() + self.radius;
        (eps > 0.0 && outer < 1.0).then_some(eps)
    }

    /// Distance from `z` to the circle.
    pub fn distance(&self, z: Complex64) -> f64 {
        ((z - self.center).norm() - self.radius).abs()
    }

    pub fn point(&self, theta: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, theta)
    }

    /// Equispaced points used for the pole probe.
    pub fn probe_points(&self) -> Vec<Complex64> {
        (0..POLE_PROBE_POINTS)
            .map(|a| self.point(TAU * a as f64 / POLE_PROBE_POINTS as f64))
            .collect()
    }
}

/// Nodes and complex weights with `∮_Γ h du/(2πi) ≈ Σ_a h(u_a) w_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    contour: ContourSpec,
    nodes: Vec<Complex64>,
    weights: Vec<Complex64>,
}

impl QuadratureRule {
    /// Trapezoidal rule in the angle: `u_a = c + r e^{2πi a/m}`,
    /// `w_a = (u_a - c)/m`.
    pub fn new(contour: ContourSpec, m: usize) -> Result<Self> {
        if m < MIN_NODES {
            return Err(Error::Config(format!("quadrature needs at least {MIN_NODES} nodes, got {m}")));
        }
        let (nodes, weights) = (0..m)
            .map(|a| {
                let offset = Complex64::from_polar(contour.radius, TAU * a as f64 / m as f64);
                (contour.center + offset, offset / m as f64)
            })
            .unzip();
        Ok(QuadratureRule {
            contour,
            nodes,
            weights,
        })
    }

    pub fn contour(&self) -> &ContourSpec {
        &self.contour
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn m(&self) -> usize {
        self.nodes.len()
    }

    /// Same contour with twice the nodes.
    pub fn refined(&self) -> Self {
        QuadratureRule::new(self.contour, 2 * self.m()).expect("doubling keeps m >= 8")
    }

    /// `Σ_a samples[a] · w_a`.
    pub fn integrate(&self, samples: &[Complex64]) -> Result<Complex64> {
        if samples.len() != self.m() {
            return Err(Error::Domain(format!(
                "expected {} samples, got {}",
                self.m(),
                samples.len()
            )));
        }
        Ok(samples.iter().zip(&self.weights).map(|(s, w)| s * w).sum())
    }

    pub fn integrate_fn<F>(&self, mut h: F) -> Result<Complex64>
    where
        F: FnMut(Complex64) -> Result<Complex64>,
    {
        let mut acc = Complex64::new(0.0, 0.0);
        for (u, w) in self.nodes.iter().zip(&self.weights) {
            acc += h(*u)? * w;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard(m: usize) -> QuadratureRule {
        QuadratureRule::new(ContourSpec::standard(), m).unwrap()
    }

    #[test]
    fn node_formula() {
        // m = 4 is below the minimum; its nodes are the even nodes of m = 8.
        assert!(matches!(QuadratureRule::new(ContourSpec::standard(), 4), Err(Error::Config(_))));
        let rule = standard(8);
        let expect = [
            Complex64::new(-0.5, 0.0),
            Complex64::new(-1.0, 0.5),
            Complex64::new(-1.5, 0.0),
            Complex64::new(-1.0, -0.5),
        ];
        for (k, e) in expect.iter().enumerate() {
            let u = rule.nodes()[2 * k];
            assert!((u - e).norm() < 1e-15, "{u} vs {e}");
            assert!((rule.weights()[2 * k] - (u + 1.0) / 8.0).norm() < 1e-15);
        }
    }

    #[test]
    fn weights_sum_to_zero() {
        for m in [8, 13, 64, 128] {
            let s: Complex64 = standard(m).weights().iter().sum();
            assert!(s.norm() < 1e-15, "m = {m}: {s}");
        }
    }

    #[test]
    fn residue_of_simple_pole_at_center() {
        for m in [8, 9, 32, 128] {
            let rule = standard(m);
            let s = rule.integrate_fn(|u| Ok(1.0 / (u + 1.0))).unwrap();
            assert!((s - 1.0).norm() < 1e-14, "m = {m}: {s}");
        }
    }

    #[test]
    fn integrate_examples() {
        let rule = standard(64);
        let ones = vec![Complex64::new(1.0, 0.0); 64];
        assert!(rule.integrate(&ones).unwrap().norm() < 1e-15);
        let s = rule.integrate_fn(|u| Ok(1.0 / (u + 1.0))).unwrap();
        assert!((s - 1.0).norm() < 1e-12);
        let s = rule.integrate_fn(|u| Ok(1.0 / ((u + 1.0) * (u + 1.0)))).unwrap();
        assert!(s.norm() < 1e-12);
    }

    #[test]
    fn integrate_length_mismatch() {
        let rule = standard(16);
        assert!(matches!(rule.integrate(&[Complex64::new(1.0, 0.0); 15]), Err(Error::Domain(_))));
    }

    #[test]
    fn converges_under_doubling() {
        // Pole off-center: geometric convergence in m.
        let h = |u: Complex64| Ok(1.0 / (u + 0.9));
        for m in [32, 64, 128] {
            let a = standard(m).integrate_fn(h).unwrap();
            let b = standard(2 * m).integrate_fn(h).unwrap();
            assert!((a - b).norm() <= 1e-12, "m = {m}");
            assert!((b - 1.0).norm() <= 1e-12);
        }
    }

    #[test]
    fn integrate_is_linear() {
        let rule = standard(32);
        let a: Vec<_> = rule.nodes().iter().map(|u| u.exp()).collect();
        let b: Vec<_> = rule.nodes().iter().map(|u| 1.0 / (u - 0.2)).collect();
        let alpha = Complex64::new(0.3, -1.7);
        let combo: Vec<_> = a.iter().zip(&b).map(|(x, y)| alpha * x + y).collect();
        let lhs = rule.integrate(&combo).unwrap();
        let rhs = alpha * rule.integrate(&a).unwrap() + rule.integrate(&b).unwrap();
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn bll_region() {
        assert_eq!(ContourSpec::standard().bll_epsilon(), Some(0.5));
        let around_origin = ContourSpec::circle(Complex64::new(0.0, 0.0), 0.5).unwrap();
        assert_eq!(around_origin.bll_epsilon(), None);
        let too_wide = ContourSpec::circle(Complex64::new(-1.0, 0.0), 0.99).unwrap();
        assert!(too_wide.bll_epsilon().is_some());
        let outside = ContourSpec::circle(Complex64::new(-1.6, 0.0), 0.5).unwrap();
        assert_eq!(outside.bll_epsilon(), None);
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(ContourSpec::circle(Complex64::new(0.0, 0.0), 0.0).is_err());
        assert!(ContourSpec::circle(Complex64::new(0.0, 0.0), -1.0).is_err());
    }
}
