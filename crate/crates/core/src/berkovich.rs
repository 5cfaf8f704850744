//! Type II points of the Berkovich line over the Puiseux field: reductions,
//! local degrees, images, distances and the ball audits around fixed points.
//!
//! A type II point `ζ(a, e^{-ρ})` is stored as the closed ball
//! `{z : val(z - a) ≥ ρ}`; every type II point of the projective line is such
//! a ball in the affine coordinate, so no chart at infinity is needed here.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::dynamics::{self, periodic_cycles, Mobius, RationalMapFamily, MATCH_TOL};
use crate::error::{Error, Result};
use crate::newton::{self, puiseux_roots_with, SolverOptions, ValFilter};
use crate::poly::Poly;
use crate::puiseux::{PuiseuxSeries, RatExp, Valuation};
use crate::roots::{self, AberthOptions};

pub const RAMIFICATION_CAP: i64 = 64;
const PROPORTIONAL_TOL: f64 = 1e-9;
const ROOT_MATCH_TOL: f64 = 1e-5;
const MAX_DESCENT: usize = 512;

#[derive(Clone, Debug)]
pub struct TypeIIPoint {
    center: PuiseuxSeries,
    rho: RatExp,
}

impl TypeIIPoint {
    /// The ball `val(z - center) ≥ rho`. Only the part of `center` below
    /// `rho` matters and is kept, as an exact series.
    pub fn new(center: PuiseuxSeries, rho: RatExp) -> Result<Self> {
        if let Some(o) = center.order() {
            if o < rho {
                return Err(Error::Precondition(format!(
                    "center is known only below t^{o}, the ball needs t^{rho}"
                )));
            }
        }
        Ok(TypeIIPoint {
            center: center.truncate(rho).as_exact(),
            rho,
        })
    }

    pub fn gauss() -> Self {
        TypeIIPoint {
            center: PuiseuxSeries::zero(),
            rho: RatExp::zero(),
        }
    }

    pub fn center(&self) -> &PuiseuxSeries {
        &self.center
    }

    pub fn rho(&self) -> RatExp {
        self.rho
    }

    pub fn is_gauss(&self) -> bool {
        *self == Self::gauss()
    }

    pub fn ball(&self) -> BallMembership {
        BallMembership {
            center: self.center.clone(),
            rho: self.rho,
        }
    }

    /// Smallest ball containing both points.
    pub fn join(&self, other: &Self) -> TypeIIPoint {
        let mut rho = self.rho.min(other.rho);
        if let Valuation::Finite(v) = self.center.agreement(&other.center, MATCH_TOL) {
            rho = rho.min(v);
        }
        TypeIIPoint {
            center: self.center.truncate(rho).as_exact(),
            rho,
        }
    }

    pub fn ramification(&self) -> i64 {
        num_integer::lcm(self.center.ramification(), self.rho.denom())
    }
}

impl PartialEq for TypeIIPoint {
    fn eq(&self, other: &Self) -> bool {
        self.rho == other.rho
            && match self.center.agreement(&other.center, MATCH_TOL) {
                Valuation::Infinite => true,
                Valuation::Finite(v) => v >= self.rho,
            }
    }
}

impl Serialize for TypeIIPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl std::fmt::Display for TypeIIPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ζ({}, e^({}))", self.center, -self.rho)
    }
}

/// Closed ball `{z : val(z - center) ≥ rho}`.
#[derive(Clone, Debug)]
pub struct BallMembership {
    pub center: PuiseuxSeries,
    pub rho: RatExp,
}

impl BallMembership {
    /// Decided by valuation comparison; a point whose distance to the center
    /// cannot be resolved against `rho` is a `BoundaryAmbiguity`.
    pub fn contains(&self, z: &PuiseuxSeries) -> Result<bool> {
        let cut = z.order();
        let decide = |v: Valuation| match v {
            Valuation::Finite(x) => Some(x >= self.rho),
            Valuation::Infinite => match cut {
                Some(c) if c < self.rho => None,
                _ => Some(true),
            },
        };
        let loose = decide(z.agreement(&self.center, MATCH_TOL));
        let strict = decide((z - &self.center).val());
        match (loose, strict) {
            (Some(a), Some(b)) if a == b => Ok(a),
            _ => Err(Error::BoundaryAmbiguity),
        }
    }
}

/// Reduction of a family at a type II point, as a complex rational map with
/// common factors removed. Degree 0 marks a constant reduction.
#[derive(Clone, Debug)]
pub struct ReducedMap {
    /// Constant term first.
    pub num: Vec<Complex64>,
    pub den: Vec<Complex64>,
    pub degree: usize,
}

impl ReducedMap {
    pub fn is_constant(&self) -> bool {
        self.degree == 0
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        roots::horner(&self.num, z) / roots::horner(&self.den, z)
    }
}

fn check_ramification(x: &TypeIIPoint) -> Result<()> {
    let q = x.ramification();
    if q > RAMIFICATION_CAP {
        return Err(Error::RamificationCapExceeded(q, RAMIFICATION_CAP));
    }
    Ok(())
}

/// `M⁻¹ ∘ f ∘ M` with `M(z) = a + t^ρ z`, so that `x` becomes the Gauss point.
pub fn conjugate_to_gauss(f: &RationalMapFamily, x: &TypeIIPoint) -> Result<RationalMapFamily> {
    check_ramification(x)?;
    if x.is_gauss() {
        return Ok(f.clone());
    }
    let m = Mobius::affine(x.center.clone(), x.rho);
    Ok(m.inverse().conjugate(f))
}

/// `(P(a + t^ρ z), Q(a + t^ρ z))`.
fn source_pair(f: &RationalMapFamily, x: &TypeIIPoint) -> Result<(Poly, Poly)> {
    check_ramification(x)?;
    let s = PuiseuxSeries::t_pow(x.rho);
    Ok((
        f.p().substitute_linear(&x.center, &s, None),
        f.q().substitute_linear(&x.center, &s, None),
    ))
}

/// Coefficients of `t^v` in each coefficient of `p`, where `v` is at most
/// the Gauss valuation of `p`.
fn leading_parts(p: &Poly, v: RatExp) -> Result<Vec<Complex64>> {
    p.coeffs()
        .iter()
        .map(|c| match c.order() {
            Some(o) if o <= v => Err(Error::TruncationExhausted),
            _ => Ok(c.coeff(v)),
        })
        .collect()
}

/// `Some(κ)` when `r = κ q` to tolerance.
fn proportional(r: &[Complex64], q: &[Complex64]) -> Option<Complex64> {
    let norm = |v: &[Complex64]| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let k = (0..q.len()).max_by(|i, j| q[*i].norm().total_cmp(&q[*j].norm()))?;
    let kappa = r.get(k).copied().unwrap_or_default() / q[k];
    let scale = norm(r).max(kappa.norm() * norm(q));
    let n = r.len().max(q.len());
    let resid = (0..n)
        .map(|i| {
            let a = r.get(i).copied().unwrap_or_default();
            let b = q.get(i).copied().unwrap_or_default();
            (a - kappa * b).norm()
        })
        .fold(0.0, f64::max);
    (resid <= PROPORTIONAL_TOL * scale).then_some(kappa)
}

/// Image of a type II point. After moving `x` to the Gauss point, the Gauss
/// norm `‖P − cQ‖/‖Q‖` is minimized over constants `c` by cancelling the
/// dominant constant component of the reduction until it is nonconstant;
/// the minimizer and minimum give the image ball.
pub fn image_point(f: &RationalMapFamily, x: &TypeIIPoint) -> Result<TypeIIPoint> {
    let (p, q) = source_pair(f, x)?;
    let vq = q.gauss_val().ok_or(Error::TruncationExhausted)?;
    let qbar = leading_parts(&q, vq)?;
    let mut c = PuiseuxSeries::zero();
    let mut r = p;
    for _ in 0..MAX_DESCENT {
        let vr = r.gauss_val().ok_or(Error::TruncationExhausted)?;
        let rbar = leading_parts(&r, vr)?;
        match proportional(&rbar, &qbar) {
            None => return TypeIIPoint::new(c, vr - vq),
            Some(kappa) => {
                let step = PuiseuxSeries::monomial(kappa, vr - vq);
                c = &c + &step;
                r = r.sub(&q.scale(&step));
            }
        }
    }
    Err(Error::TruncationExhausted)
}

/// Drops the common roots of `a` and `b`, matched to relative tolerance.
fn cancel_common(a: &[Complex64], b: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let a = roots::trim(a).to_vec();
    let b = roots::trim(b).to_vec();
    if a.len() <= 1 || b.len() <= 1 {
        return Ok((a, b));
    }
    let opts = AberthOptions::default();
    let ra = roots::aberth(&a, &opts)?;
    let mut rb: Vec<Option<Complex64>> = roots::aberth(&b, &opts)?.into_iter().map(Some).collect();
    let (mut na, mut nb) = (a, b);
    for r in ra {
        let hit = rb
            .iter()
            .enumerate()
            .filter_map(|(j, s)| s.map(|s| (j, (s - r).norm())))
            .filter(|(_, d)| *d <= ROOT_MATCH_TOL * r.norm().max(1.0))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        if let Some((j, _)) = hit {
            let s = rb[j].take().unwrap();
            na = roots::deflate(&na, r);
            nb = roots::deflate(&nb, s);
        }
    }
    Ok((na, nb))
}

/// Reduction at `x`: source moved to the Gauss point, target ball `f(x)`
/// moved to the Gauss point, pair normalized to Gauss norm 1, `t = 0`, and
/// common complex factors cancelled.
pub fn reduce_at(f: &RationalMapFamily, x: &TypeIIPoint) -> Result<ReducedMap> {
    let y = image_point(f, x)?;
    let (p, q) = source_pair(f, x)?;
    let num = p.sub(&q.scale(&y.center));
    let den = q.shift_t(y.rho);
    let v = match (num.gauss_val(), den.gauss_val()) {
        (Some(a), Some(b)) => a.min(b),
        (a, b) => a.or(b).ok_or(Error::TruncationExhausted)?,
    };
    let (n, d) = cancel_common(&leading_parts(&num, v)?, &leading_parts(&den, v)?)?;
    let scale = n.iter().chain(&d).map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::TruncationExhausted);
    }
    let n: Vec<Complex64> = n.iter().map(|c| c / scale).collect();
    let d: Vec<Complex64> = d.iter().map(|c| c / scale).collect();
    let degree = if d.is_empty() {
        0
    } else {
        (n.len().max(1) - 1).max(d.len() - 1)
    };
    Ok(ReducedMap { num: n, den: d, degree })
}

pub fn local_degree(f: &RationalMapFamily, x: &TypeIIPoint) -> Result<usize> {
    Ok(reduce_at(f, x)?.degree)
}

/// Gauss point totally invariant: fixed, with local degree `d`.
pub fn has_good_reduction(f: &RationalMapFamily) -> Result<bool> {
    let g = TypeIIPoint::gauss();
    Ok(image_point(f, &g)? == g && local_degree(f, &g)? == f.degree())
}

fn is_totally_invariant(f: &RationalMapFamily, x: &TypeIIPoint) -> Result<bool> {
    Ok(image_point(f, x)? == *x && local_degree(f, x)? == f.degree())
}

/// Outcome of the potential-good-reduction search.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PgrCertificate {
    /// A rigid cycle whose multiplier has negative valuation.
    NotPgr {
        period: usize,
        multiplier_valuation: RatExp,
        point: PuiseuxSeries,
    },
    /// A type II point fixed by `f` with local degree `d`.
    Pgr { point: TypeIIPoint },
    Inconclusive { examined: usize },
}

impl PgrCertificate {
    pub fn label(&self) -> &'static str {
        match self {
            PgrCertificate::NotPgr { .. } => "NOT-PGR",
            PgrCertificate::Pgr { .. } => "PGR",
            PgrCertificate::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Largest of the three pairwise joins, which is the tree median.
pub fn median(x: &TypeIIPoint, y: &TypeIIPoint, z: &TypeIIPoint) -> TypeIIPoint {
    [x.join(y), y.join(z), x.join(z)]
        .into_iter()
        .max_by(|a, b| a.rho.cmp(&b.rho))
        .unwrap()
}

/// Semi-decision for potential good reduction. Rigid cycles of period up to
/// `min(budget, 2)` are screened for a negative multiplier valuation first;
/// then the Gauss orbit (up to `budget` points), tree medians of orbit
/// triples, and for polynomials the fixed type II points on rays from
/// non-repelling fixed points are tested for total invariance.
pub fn potential_good_reduction_search(f: &RationalMapFamily, budget: usize) -> PgrCertificate {
    let mut fixed = Vec::new();
    for n in 1..=budget.clamp(1, 2) {
        let Ok(cycles) = periodic_cycles(f, n, RatExp::int(8)) else {
            continue;
        };
        for c in &cycles {
            if let Valuation::Finite(v) = c.multiplier_valuation {
                if v < RatExp::zero() {
                    let point = c.points[0].z().ok().flatten().unwrap_or_else(PuiseuxSeries::zero);
                    return PgrCertificate::NotPgr {
                        period: c.exact_period,
                        multiplier_valuation: v,
                        point,
                    };
                }
            }
            if n == 1 {
                fixed.extend(c.points.iter().filter_map(|p| p.z().ok().flatten()));
            }
        }
    }
    let mut examined = 0;
    let mut orbit = vec![TypeIIPoint::gauss()];
    let test = |x: &TypeIIPoint, examined: &mut usize| {
        *examined += 1;
        is_totally_invariant(f, x).unwrap_or(false)
    };
    while orbit.len() <= budget {
        let x = orbit.last().unwrap().clone();
        if test(&x, &mut examined) {
            return PgrCertificate::Pgr { point: x };
        }
        match image_point(f, &x) {
            Ok(y) if !orbit.contains(&y) => orbit.push(y),
            _ => break,
        }
    }
    for i in 0..orbit.len() {
        for j in i + 1..orbit.len() {
            for k in j + 1..orbit.len() {
                let m = median(&orbit[i], &orbit[j], &orbit[k]);
                if test(&m, &mut examined) {
                    return PgrCertificate::Pgr { point: m };
                }
            }
        }
    }
    if f.is_polynomial() {
        for x0 in &fixed {
            if let Ok(r) = fixed_type_ii_on_ray(f, x0) {
                if r.degree == f.degree() && test(&r.point, &mut examined) {
                    return PgrCertificate::Pgr { point: r.point };
                }
            }
        }
    }
    PgrCertificate::Inconclusive { examined }
}

/// First fixed type II point on the ray from a fixed point toward infinity,
/// with the local degree there.
#[derive(Clone, Debug, Serialize)]
pub struct RayFixedPoint {
    pub point: TypeIIPoint,
    pub degree: usize,
}

/// For a polynomial family and a non-repelling fixed point `x0` with Taylor
/// coefficients `c_k`, the ball `ζ(x0, e^{-ρ})` maps to the ball of radius
/// valuation `v(ρ) = min_k (val c_k + kρ)`. Balls are fixed for all
/// `ρ ≥ ρ* = max_{k≥2} (-val c_k)/(k-1)`, and `ρ*` is where a term of index
/// `≥ 2` first attains the minimum. The local degree there is the largest
/// index attaining it.
pub fn fixed_type_ii_on_ray(f: &RationalMapFamily, x0: &PuiseuxSeries) -> Result<RayFixedPoint> {
    if !f.is_polynomial() {
        return Err(Error::Precondition("ray search needs a polynomial family".into()));
    }
    let p = f.p().scale(&f.q().coeff(0).inv()?);
    let fx = p.eval(x0);
    if !fx.agreement(x0, MATCH_TOL).is_infinite() {
        return Err(Error::Precondition("x0 is not fixed to its precision".into()));
    }
    let c = p.taylor_shift(x0, None);
    let vals: Vec<Option<RatExp>> = c.coeffs().iter().map(|a| a.val().finite()).collect();
    match (vals.get(1).copied().flatten(), c.coeff(1).order()) {
        (Some(v), _) if v < RatExp::zero() => {
            return Err(Error::Precondition(format!("x0 is repelling (multiplier valuation {v})")))
        }
        (None, Some(o)) if o < RatExp::zero() => {
            return Err(Error::Precondition("multiplier at x0 is undetermined".into()))
        }
        _ => {}
    }
    let rho = vals
        .iter()
        .enumerate()
        .skip(2)
        .filter_map(|(k, v)| v.map(|v| -v / (k as i64 - 1)))
        .max()
        .ok_or(Error::NoBreakpoint)?;
    let degree = vals
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(k, v)| v.is_some_and(|v| v + rho * *k as i64 == rho))
        .map(|(k, _)| k)
        .max()
        .ok_or(Error::NoBreakpoint)?;
    Ok(RayFixedPoint {
        point: TypeIIPoint::new(x0.clone(), rho)?,
        degree,
    })
}

/// `(ρ_x − ρ_j) + (ρ_y − ρ_j)` with `ρ_j` the radius valuation of the join.
pub fn hyperbolic_distance(x: &TypeIIPoint, y: &TypeIIPoint) -> RatExp {
    let j = x.join(y).rho;
    (x.rho - j) + (y.rho - j)
}

fn ball_precision(x: &TypeIIPoint) -> RatExp {
    x.rho.max(RatExp::zero()) + RatExp::int(6)
}

fn count_roots_in_ball(p: &Poly, x: &TypeIIPoint) -> Result<usize> {
    let roots = puiseux_roots_with(p, ball_precision(x), ValFilter::All, &SolverOptions::default())?;
    let ball = x.ball();
    let mut count = 0;
    for r in &roots {
        if ball.contains(&r.series)? {
            count += r.multiplicity;
        }
    }
    Ok(count)
}

/// Roots of the period-`n` fixed equation inside the closed ball of `x`,
/// with multiplicity.
pub fn count_fixed_in_ball(f: &RationalMapFamily, x: &TypeIIPoint, n: usize) -> Result<usize> {
    count_roots_in_ball(&dynamics::fixed_equation(f, n)?, x)
}

/// Critical points (roots of `P'Q − PQ'`) inside the closed ball of `x`.
pub fn count_critical_in_ball(f: &RationalMapFamily, x: &TypeIIPoint) -> Result<usize> {
    count_roots_in_ball(&critical_polynomial(f), x)
}

pub fn critical_polynomial(f: &RationalMapFamily) -> Poly {
    let (p, q) = (f.p(), f.q());
    p.derivative().mul(q).sub(&p.mul(&q.derivative()))
}

/// Reconstruction check used by callers that audit a ball count.
pub fn roots_in_ball(p: &Poly, x: &TypeIIPoint) -> Result<Vec<newton::PuiseuxRoot>> {
    let roots = puiseux_roots_with(p, ball_precision(x), ValFilter::All, &SolverOptions::default())?;
    let ball = x.ball();
    let mut inside = Vec::new();
    for r in roots {
        if ball.contains(&r.series)? {
            inside.push(r);
        }
    }
    Ok(inside)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn laurent(terms: &[(i64, f64)]) -> PuiseuxSeries {
        PuiseuxSeries::from_terms(terms.iter().map(|(e, x)| (RatExp::int(*e), c(*x))), None)
    }

    fn poly(cs: &[&[(i64, f64)]]) -> Poly {
        Poly::new(cs.iter().map(|t| laurent(t)).collect())
    }

    fn fam(p: &[&[(i64, f64)]]) -> RationalMapFamily {
        RationalMapFamily::polynomial(poly(p)).unwrap()
    }

    fn ball(center: PuiseuxSeries, rho: RatExp) -> TypeIIPoint {
        TypeIIPoint::new(center, rho).unwrap()
    }

    #[test]
    fn gauss_images() {
        let g = TypeIIPoint::gauss();
        assert_eq!(image_point(&fam(&[&[(1, 1.0)], &[], &[(0, 1.0)]]), &g).unwrap(), g);
        let y = image_point(&fam(&[&[(-1, 1.0)], &[], &[(0, 1.0)]]), &g).unwrap();
        assert_eq!(y.rho(), RatExp::zero());
        assert_eq!(y.center().val(), Valuation::Finite(RatExp::int(-1)));
        let shift = fam(&[&[(0, 1.0)], &[(0, 1.0)]]);
        assert_eq!(image_point(&shift, &g).unwrap(), g);
    }

    #[test]
    fn reductions_at_gauss() {
        let g = TypeIIPoint::gauss();
        let r = reduce_at(&fam(&[&[(1, 1.0)], &[], &[(0, 1.0)]]), &g).unwrap();
        assert_eq!(r.degree, 2);
        assert!((r.eval(c(3.0)) - c(9.0)).norm() < 1e-12);
        let rat = RationalMapFamily::new(poly(&[&[(1, 1.0)], &[], &[(0, 1.0)]]), poly(&[&[(0, 1.0)], &[(1, 1.0)]])).unwrap();
        assert_eq!(local_degree(&rat, &g).unwrap(), 2);
        assert!(has_good_reduction(&rat).unwrap());
        let pole = fam(&[&[(-1, 1.0)], &[], &[(0, 1.0)]]);
        assert_eq!(local_degree(&pole, &g).unwrap(), 2);
        assert!(!has_good_reduction(&pole).unwrap());
    }

    #[test]
    fn cancellation_in_reduction() {
        // (z^2 + t)/z reduces to z^2/z = z
        let f = RationalMapFamily::new(poly(&[&[(1, 1.0)], &[], &[(0, 1.0)]]), poly(&[&[], &[(0, 1.0)]])).unwrap();
        assert_eq!(local_degree(&f, &TypeIIPoint::gauss()).unwrap(), 1);
    }

    #[test]
    fn conjugation_rescales() {
        let f = fam(&[&[(-1, 1.0)], &[], &[(0, 1.0)]]);
        let x = ball(PuiseuxSeries::zero(), RatExp::new(-1, 2));
        let g = conjugate_to_gauss(&f, &x).unwrap();
        // t^{1/2}(t^{-1} z^2 + t^{-1}) = t^{-1/2}(z^2 + 1), up to a common factor
        let (p, q) = (g.p(), g.q());
        let ratio = |k: usize| p.coeff(k).div(&q.coeff(0)).unwrap();
        assert_eq!(ratio(2).val(), Valuation::Finite(RatExp::new(-1, 2)));
        assert_eq!(ratio(0).val(), Valuation::Finite(RatExp::new(-1, 2)));
        assert!(ratio(1).is_zero());
        assert_eq!(conjugate_to_gauss(&f, &TypeIIPoint::gauss()).unwrap(), f);
    }

    #[test]
    fn distances() {
        let g = TypeIIPoint::gauss();
        assert_eq!(hyperbolic_distance(&g, &g), RatExp::zero());
        let small = ball(PuiseuxSeries::zero(), RatExp::int(2));
        assert_eq!(hyperbolic_distance(&g, &small), RatExp::int(2));
        let a = ball(PuiseuxSeries::zero(), RatExp::int(1));
        let b = ball(PuiseuxSeries::one(), RatExp::int(1));
        assert_eq!(hyperbolic_distance(&a, &b), RatExp::int(2));
        assert_eq!(median(&a, &b, &small), a);
    }

    #[test]
    fn membership() {
        let x = ball(PuiseuxSeries::zero(), RatExp::int(1));
        assert!(x.ball().contains(&laurent(&[(1, 2.0)])).unwrap());
        assert!(!x.ball().contains(&laurent(&[(0, 2.0)])).unwrap());
        let vague = PuiseuxSeries::zero_to(RatExp::new(1, 2));
        assert_eq!(x.ball().contains(&vague), Err(Error::BoundaryAmbiguity));
    }

    #[test]
    fn ray_points() {
        let sq = fam(&[&[], &[], &[(0, 1.0)]]);
        let r = fixed_type_ii_on_ray(&sq, &PuiseuxSeries::zero()).unwrap();
        assert!(r.point.is_gauss());
        assert_eq!(r.degree, 2);
        // z^3 + z^2/t at 0: c_2 = 1/t, c_3 = 1, so ρ* = 1 and degree 2
        let f = fam(&[&[], &[], &[(-1, 1.0)], &[(0, 1.0)]]);
        let r = fixed_type_ii_on_ray(&f, &PuiseuxSeries::zero()).unwrap();
        assert_eq!(r.point.rho(), RatExp::int(1));
        assert_eq!(r.degree, 2);
        let line = fam(&[&[], &[(1, 1.0)]]);
        assert_eq!(fixed_type_ii_on_ray(&line, &PuiseuxSeries::zero()).unwrap_err(), Error::NoBreakpoint);
        let rep = fam(&[&[], &[(-1, 1.0)], &[], &[(0, 1.0)]]);
        assert!(matches!(fixed_type_ii_on_ray(&rep, &PuiseuxSeries::zero()), Err(Error::Precondition(_))));
    }

    #[test]
    fn ball_counts() {
        let f = fam(&[&[(1, 1.0)], &[], &[(0, 1.0)]]);
        assert_eq!(count_fixed_in_ball(&f, &TypeIIPoint::gauss(), 1).unwrap(), 2);
        let cubic = fam(&[&[], &[(-1, 1.0)], &[], &[(0, 1.0)]]);
        let x = ball(PuiseuxSeries::zero(), RatExp::new(-1, 2));
        assert_eq!(count_critical_in_ball(&cubic, &x).unwrap(), 2);
        assert_eq!(local_degree(&cubic, &x).unwrap(), 3);
        let far = ball(laurent(&[(0, 5.0)]), RatExp::int(3));
        assert_eq!(count_fixed_in_ball(&f, &far, 1).unwrap(), 0);
    }

    #[test]
    fn pgr_search() {
        let pole = fam(&[&[(-1, 1.0)], &[], &[(0, 1.0)]]);
        match potential_good_reduction_search(&pole, 4) {
            PgrCertificate::NotPgr { period, multiplier_valuation, .. } => {
                assert_eq!(period, 1);
                assert_eq!(multiplier_valuation, RatExp::new(-1, 2));
            }
            other => panic!("{other:?}"),
        }
        let rat = RationalMapFamily::new(poly(&[&[(1, 1.0)], &[], &[(0, 1.0)]]), poly(&[&[(0, 1.0)], &[(1, 1.0)]])).unwrap();
        assert!(matches!(potential_good_reduction_search(&rat, 4), PgrCertificate::Pgr { point } if point.is_gauss()));
        // t z^2 is conjugate to z^2 by z -> t z; the invariant point is ζ(0, e^1)
        let scaled = fam(&[&[], &[], &[(1, 1.0)]]);
        match potential_good_reduction_search(&scaled, 4) {
            PgrCertificate::Pgr { point } => assert_eq!(point.rho(), RatExp::int(-1)),
            other => panic!("{other:?}"),
        }
    }
}
