//! Complex polynomial root finding (Aberth–Ehrlich simultaneous iteration).
//!
//! Coefficient slices are ordered constant term first.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct AberthOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for AberthOptions {
    fn default() -> Self {
        AberthOptions {
            max_iterations: 2000,
            tolerance: 1e-15,
            restarts: 3,
            seed: 0x5eed,
        }
    }
}

pub fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

/// Value and first derivative.
pub fn horner2(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    c.iter().rev().fold((zero, zero), |(p, dp), a| (p * z + a, dp * z + p))
}

pub fn derivative(c: &[Complex64]) -> Vec<Complex64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| a * k as f64)
        .collect()
}

/// Removes trailing (leading-degree) exact zeros.
pub fn trim(c: &[Complex64]) -> &[Complex64] {
    let mut n = c.len();
    while n > 0 && c[n - 1] == Complex64::new(0.0, 0.0) {
        n -= 1;
    }
    &c[..n]
}

/// Divides by `(z - r)`, dropping the remainder.
pub fn deflate(c: &[Complex64], r: Complex64) -> Vec<Complex64> {
    let n = c.len();
    if n <= 1 {
        return Vec::new();
    }
    let mut q = vec![Complex64::new(0.0, 0.0); n - 1];
    let mut acc = c[n - 1];
    for k in (0..n - 1).rev() {
        q[k] = acc;
        acc = c[k] + acc * r;
    }
    q
}

/// `sum |a_k| |z|^k`, the natural scale for the residual at `z`.
pub fn abs_scale(c: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    c.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

/// Starting points on circles read off the Newton polygon of `|a_k|`.
pub fn initial_guesses(c: &[Complex64], rotation: f64) -> Vec<Complex64> {
    let n = c.len() - 1;
    // upper convex hull of (k, log|a_k|)
    let pts: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(k, a)| (k, a.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (k1, y1) = hull[hull.len() - 2];
            let (k2, y2) = hull[hull.len() - 1];
            let cross = (k2 as f64 - k1 as f64) * (p.1 - y1) - (y2 - y1) * (p.0 as f64 - k1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut guesses = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (k1, y1) = w[0];
        let (k2, y2) = w[1];
        let m = k2 - k1;
        let radius = ((y1 - y2) / m as f64).exp();
        for j in 0..m {
            let angle = 2.0 * std::f64::consts::PI * (j as f64 / m as f64) + rotation + 0.4 * k1 as f64;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}

/// Backward-error check: `|p(z)| <= tol * sum |a_k||z|^k`.
pub fn residual_ok(c: &[Complex64], z: Complex64, tol: f64) -> bool {
    horner(c, z).norm() <= tol * abs_scale(c, z).max(f64::MIN_POSITIVE)
}

/// All complex roots with multiplicity. Exact zero roots (vanishing low
/// coefficients) are returned exactly.
pub fn aberth(coeffs: &[Complex64], opts: &AberthOptions) -> Result<Vec<Complex64>> {
    let c = trim(coeffs);
    if c.is_empty() {
        return Err(Error::Precondition("zero polynomial has no isolated roots".into()));
    }
    let zeros = c.iter().take_while(|a| a.norm() == 0.0).count();
    let c = &c[zeros..];
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let n = c.len() - 1;
    if n == 0 {
        return Ok(roots);
    }
    if n == 1 {
        roots.push(-c[0] / c[1]);
        return Ok(roots);
    }
    let dc = derivative(c);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<Vec<Complex64>> = None;
    for attempt in 0..=opts.restarts {
        let rotation = if attempt == 0 { 0.7 } else { rng.gen_range(0.0..std::f64::consts::TAU) };
        let mut z = initial_guesses(c, rotation);
        let mut done = vec![false; n];
        for _ in 0..opts.max_iterations {
            let mut all_done = true;
            for i in 0..n {
                if done[i] {
                    continue;
                }
                let p = horner(c, z[i]);
                let dp = horner(&dc, z[i]);
                if p.norm() == 0.0 {
                    done[i] = true;
                    continue;
                }
                let ratio = p / dp;
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    if j != i {
                        s += (z[i] - z[j]).inv();
                    }
                }
                let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
                if !w.re.is_finite() || !w.im.is_finite() {
                    all_done = false;
                    break;
                }
                z[i] -= w;
                if w.norm() <= opts.tolerance * z[i].norm().max(f64::MIN_POSITIVE) {
                    done[i] = true;
                } else {
                    all_done = false;
                }
            }
            if all_done {
                break;
            }
        }
        let finite = z.iter().all(|r| r.re.is_finite() && r.im.is_finite());
        if finite && done.iter().all(|d| *d) {
            roots.extend(z);
            return Ok(roots);
        }
        // stagnation at multiple roots leaves a small backward error
        if finite && z.iter().all(|r| residual_ok(c, *r, 1e-9)) && best.is_none() {
            best = Some(z);
        }
    }
    match best {
        Some(z) => {
            roots.extend(z);
            Ok(roots)
        }
        None => Err(Error::RootFinderNonConvergence(opts.max_iterations)),
    }
}

/// Aberth iteration driven by an evaluator returning `(p(z), p'(z), scale)`,
/// for polynomials that are better evaluated than expanded. `init` fixes
/// the number of roots. Roots that stall are accepted when the backward
/// error `|p(z)| / scale` is below `1e-9`.
pub fn aberth_refine<F>(eval: F, init: Vec<Complex64>, opts: &AberthOptions) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> (Complex64, Complex64, f64),
{
    let n = init.len();
    let mut z = init;
    let mut done = vec![false; n];
    for _ in 0..opts.max_iterations {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp, _) = eval(z[i]);
            if p.norm() == 0.0 {
                done[i] = true;
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i && z[i] != z[j] {
                    s += (z[i] - z[j]).inv();
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if !w.re.is_finite() || !w.im.is_finite() {
                done[i] = true;
                continue;
            }
            z[i] -= w;
            if w.norm() <= opts.tolerance * z[i].norm().max(f64::MIN_POSITIVE) {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    let ok = z.iter().zip(&done).all(|(r, d)| {
        let (p, _, scale) = eval(*r);
        r.re.is_finite() && r.im.is_finite() && (*d || p.norm() <= 1e-9 * scale.max(f64::MIN_POSITIVE))
    });
    if ok {
        Ok(z)
    } else {
        Err(Error::RootFinderNonConvergence(opts.max_iterations))
    }
}

/// Newton polish of a simple root.
pub fn polish(c: &[Complex64], mut z: Complex64, steps: usize) -> Complex64 {
    for _ in 0..steps {
        let (p, dp) = horner2(c, z);
        if dp.norm() == 0.0 {
            break;
        }
        let w = p / dp;
        z -= w;
        if w.norm() <= 1e-16 * z.norm() {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn quadratic_roots() {
        // z^2 + 1
        let r = sorted(aberth(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], &Default::default()).unwrap());
        assert!((r[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((r[1] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_roots_split_exactly() {
        let r = aberth(&[c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)], &Default::default()).unwrap();
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 2);
        assert!(r.iter().any(|z| (z - c(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn wide_dynamic_range() {
        // (z - 1e-4)(z - 1e4)(z + 3)
        let roots = [c(1e-4, 0.0), c(1e4, 0.0), c(-3.0, 0.0)];
        let mut p = vec![c(1.0, 0.0)];
        for r in roots {
            let mut q = vec![c(0.0, 0.0); p.len() + 1];
            for (k, a) in p.iter().enumerate() {
                q[k + 1] += a;
                q[k] -= a * r;
            }
            p = q;
        }
        let found = aberth(&p, &Default::default()).unwrap();
        for r in roots {
            assert!(found.iter().any(|z| (z - r).norm() <= 1e-10 * r.norm()));
        }
    }

    #[test]
    fn multiple_root_has_small_backward_error() {
        // (z - 1)^4
        let p = [c(1.0, 0.0), c(-4.0, 0.0), c(6.0, 0.0), c(-4.0, 0.0), c(1.0, 0.0)];
        let r = aberth(&p, &Default::default()).unwrap();
        let centroid: Complex64 = r.iter().sum::<Complex64>() / 4.0;
        assert!((centroid - c(1.0, 0.0)).norm() < 1e-4);
    }

    #[test]
    fn deflation() {
        let p = [c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert_eq!(deflate(&p, c(1.0, 0.0)), vec![c(1.0, 0.0), c(1.0, 0.0)]);
    }
}
