//! Instance generators: seeded random instances and the TASEP family.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::instance::Instance;
use super::rng::InstanceRng;
use crate::contour::ContourSpec;
use crate::error::{Error, Result};
use crate::funcs::{Polynomial, RationalFunction};
use crate::kernel::{derive_g, BridgeH};
use crate::series::{default_trunc, LaurentSeries};
use crate::structmat::MAX_N;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub const MAX_RANDOM_DEGREE: usize = 6;
/// Minimum distance between any generated pole and the contour.
pub const POLE_MARGIN: f64 = 0.2;
const MAX_ATTEMPTS: usize = 32;

/// Random instance with `n` functions of degree `deg` on the circle
/// `|u + 1| = 1/2`, deterministic in `seed`.
///
/// - `p_i, f_i = 1 + Σ_{d=1}^{deg} c_d v^d`, `c_d` uniform in the disk of
///   radius `0.8/deg`;
/// - `q_i = (a + b u + c u²)/(u - z_i)`, numerator coefficients uniform in
///   the unit disk;
/// - `H_d(u) = (a_d + b_d u + c_d u²)/(u - z_H)` for `d < n`, one shared pole;
/// - `g = derive_g(H, f)`.
///
/// Poles are drawn inside the circle (radius `≤ r - 0.2` about the center)
/// or outside it (`r + 0.2 ≤ |z - c| ≤ r + 1`) with equal probability.
pub fn gen_random(n: usize, deg: usize, seed: u64) -> Result<Instance> {
    if n == 0 || n > MAX_N {
        return Err(Error::Config(format!("n = {n} outside 1..={MAX_N}")));
    }
    if deg > MAX_RANDOM_DEGREE {
        return Err(Error::Config(format!("deg = {deg} outside 0..={MAX_RANDOM_DEGREE}")));
    }
    let contour = ContourSpec::standard();
    let mut rng = InstanceRng::new(seed);
    let mut last_err = None;
    for _ in 0..MAX_ATTEMPTS {
        match draw_random(&mut rng, n, deg, contour, seed) {
            Ok(inst) => return Ok(inst),
            Err(e) => last_err = Some(e),
        }
    }
    Err(Error::Config(format!(
        "no admissible instance after {MAX_ATTEMPTS} attempts: {}",
        last_err.map_or_else(String::new, |e| e.to_string())
    )))
}

fn draw_random(rng: &mut InstanceRng, n: usize, deg: usize, contour: ContourSpec, seed: u64) -> Result<Instance> {
    let unit_poly = |rng: &mut InstanceRng| {
        let mut cs = vec![ONE];
        if deg > 0 {
            let radius = 0.8 / deg as f64;
            cs.extend((0..deg).map(|_| rng.disk(radius)));
        }
        Polynomial::new(cs)
    };
    let p: Vec<_> = (0..n).map(|_| unit_poly(rng)).collect();
    let f: Vec<_> = (0..n).map(|_| unit_poly(rng)).collect();

    let mut poles = Vec::with_capacity(n + 1);
    let mut q = Vec::with_capacity(n);
    for _ in 0..n {
        let num: Vec<_> = (0..3).map(|_| rng.disk(1.0)).collect();
        let z = draw_pole(rng, contour);
        poles.push(z);
        q.push(RationalFunction::from_coeffs(num, vec![-z, ONE])?);
    }
    let z_h = draw_pole(rng, contour);
    poles.push(z_h);
    let vcoeffs = (0..n)
        .map(|_| {
            let num: Vec<_> = (0..3).map(|_| rng.disk(1.0)).collect();
            RationalFunction::from_coeffs(num, vec![-z_h, ONE])
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some(z) = poles.iter().find(|z| contour.distance(**z) < POLE_MARGIN) {
        return Err(Error::Invariant(format!("pole {z} within {POLE_MARGIN} of the contour")));
    }

    let h = BridgeH::new(vcoeffs);
    let max_deg = deg.max(n - 1);
    let trunc = default_trunc(n, max_deg);
    let f_series: Vec<_> = f.iter().map(|x| LaurentSeries::polynomial(x.coeffs(), trunc)).collect();
    let g = derive_g(&h, &f_series)?;
    let inst = Instance {
        n,
        p,
        f,
        q,
        h: Some(h),
        g: Some(g),
        contour,
        seed: Some(seed),
    };
    inst.validate(false)?;
    Ok(inst)
}

fn draw_pole(rng: &mut InstanceRng, contour: ContourSpec) -> Complex64 {
    let inside = rng.uniform() < 0.5;
    let u = rng.uniform();
    let rho = if inside {
        (contour.radius - POLE_MARGIN) * u.sqrt()
    } else {
        contour.radius + POLE_MARGIN + u
    };
    let theta = TAU * rng.uniform();
    contour.center + Complex64::from_polar(rho, theta)
}

fn binomial_row(k: usize) -> Vec<Complex64> {
    let mut row = vec![1.0f64];
    for i in 0..k {
        let next = row[i] * (k - i) as f64 / (i + 1) as f64;
        row.push(next.round());
    }
    row.into_iter().map(|x| Complex64::new(x, 0.0)).collect()
}

/// TASEP instance for strictly decreasing integers `y_1 > … > y_n`:
/// `p_i = 1`, `f_i = (1+v)^{y_i+i}`, `g_i = -u^{-i}(1+u)^{y_i+i}`,
/// `q_i = u^{i-1}`, on the circle `|u + 1| = 1/2`. `H` is left to the
/// canonical construction.
pub fn gen_tasep(y: &[i64]) -> Result<Instance> {
    let n = y.len();
    if n == 0 || n > MAX_N {
        return Err(Error::Domain(format!("need 1..={MAX_N} positions, got {n}")));
    }
    if let Some(w) = y.windows(2).find(|w| w[0] <= w[1]) {
        return Err(Error::Domain(format!(
            "positions must be strictly decreasing, got {} then {}",
            w[0], w[1]
        )));
    }
    let mut f = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for (i0, yi) in y.iter().enumerate() {
        let i = i0 as i64 + 1;
        let e = yi + i;
        if e < 0 {
            return Err(Error::Domain(format!("y_{i} + {i} = {e} is negative")));
        }
        let row = binomial_row(e as usize);
        f.push(Polynomial::new(row.clone()));
        let num = Polynomial::new(row).scale(-ONE);
        g.push(RationalFunction::new(num, Polynomial::monomial(i0 + 1, ONE))?);
        q.push(RationalFunction::polynomial(Polynomial::monomial(i0, ONE)));
    }
    let inst = Instance {
        n,
        p: vec![Polynomial::one(); n],
        f,
        q,
        h: None,
        g: Some(g),
        contour: ContourSpec::standard(),
        seed: None,
    };
    inst.validate(false)?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn random_is_deterministic() {
        let a = gen_random(5, 3, 42).unwrap();
        let b = gen_random(5, 3, 42).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_ne!(a.to_json(), gen_random(5, 3, 43).unwrap().to_json());
    }

    #[test]
    fn random_respects_shape() {
        for seed in 0..20 {
            let inst = gen_random(4, 2, seed).unwrap();
            for x in inst.p.iter().chain(&inst.f) {
                assert_eq!(x.coeffs()[0], c(1.0));
                assert!(x.degree() <= 2);
                assert!(x.coeffs()[1..].iter().all(|z| z.norm() <= 0.4 + 1e-15));
            }
            for r in &inst.q {
                let z = -r.den().coeffs()[0];
                assert!(inst.contour.distance(z) >= POLE_MARGIN);
            }
            assert_eq!(inst.h.as_ref().unwrap().len(), 4);
        }
    }

    #[test]
    fn random_degree_zero_is_unit() {
        let inst = gen_random(1, 0, 9).unwrap();
        assert_eq!(inst.p, vec![Polynomial::one()]);
        assert_eq!(inst.f, vec![Polynomial::one()]);
    }

    #[test]
    fn random_rejects_bad_sizes() {
        assert!(gen_random(0, 1, 1).is_err());
        assert!(gen_random(17, 1, 1).is_err());
        assert!(gen_random(3, 7, 1).is_err());
    }

    #[test]
    fn tasep_single() {
        let inst = gen_tasep(&[0]).unwrap();
        assert_eq!(inst.n, 1);
        assert_eq!(inst.f[0].coeffs(), &[c(1.0), c(1.0)]);
        let g = &inst.g.as_ref().unwrap()[0];
        let u = Complex64::new(-0.8, 0.3);
        assert!((g.eval(u).unwrap() + (u + 1.0) / u).norm() < 1e-15);
        assert_eq!(inst.q[0].eval(u).unwrap(), c(1.0));
    }

    #[test]
    fn tasep_pair() {
        let inst = gen_tasep(&[1, 0]).unwrap();
        assert_eq!(inst.f[0].coeffs(), &[c(1.0), c(2.0), c(1.0)]);
        assert_eq!(inst.f[1].coeffs(), &[c(1.0), c(2.0), c(1.0)]);
        let g2 = &inst.g.as_ref().unwrap()[1];
        let u = Complex64::new(-1.2, -0.4);
        assert!((g2.eval(u).unwrap() + (u + 1.0).powi(2) / (u * u)).norm() < 1e-14);
        assert!(inst.p_is_one());
    }

    #[test]
    fn tasep_rejects_bad_positions() {
        assert!(gen_tasep(&[0, 0]).is_err());
        assert!(gen_tasep(&[0, 1]).is_err());
        assert!(gen_tasep(&[-2]).is_err());
        assert!(gen_tasep(&[]).is_err());
        gen_tasep(&[-1]).unwrap();
    }
}
