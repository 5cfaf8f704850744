//! Newton–Puiseux root solving for polynomials with Puiseux coefficients.
//!
//! For every segment of the Newton polygon the polynomial is rescaled so the
//! roots on that segment have valuation zero. The complex characteristic
//! polynomial gives their leading coefficients; simple characteristic roots
//! are lifted by Newton iteration in series arithmetic, clustered ones by a
//! Taylor shift and a recursive solve.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::puiseux::{PuiseuxSeries, RatExp, Valuation, RAMIFICATION_CAP};
use crate::roots::{self, AberthOptions};

/// A polynomial in `z` over Puiseux series, as fed to the solver.
pub type PolyOverPuiseux = Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    /// Slope of the segment; its roots have valuation `-slope`.
    pub slope: RatExp,
    pub length: usize,
}

impl Segment {
    pub fn root_valuation(&self) -> RatExp {
        -self.slope
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewtonPolygon {
    pub vertices: Vec<(usize, RatExp)>,
    pub segments: Vec<Segment>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PuiseuxRoot {
    pub series: PuiseuxSeries,
    pub multiplicity: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Starting single-linkage radius for clustering characteristic roots
    /// (relative to `max(1, |root|)`); refined by factors of 100.
    pub cluster_radius: f64,
    /// Tolerance for certifying a cluster centre as a multiple root, and the
    /// smallest radius tried before giving up.
    pub eps_cluster: f64,
    pub ramification_cap: i64,
    pub aberth: AberthOptions,
    pub max_newton_steps: usize,
    /// Extra solves at a raised working order when clusters leave roots
    /// short of the requested precision.
    pub precision_retries: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            cluster_radius: 0.1,
            eps_cluster: 1e-8,
            ramification_cap: RAMIFICATION_CAP,
            aberth: AberthOptions::default(),
            max_newton_steps: 64,
            precision_retries: 3,
        }
    }
}

/// Which root valuations to return.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValFilter {
    All,
    AtLeast(RatExp),
    Above(RatExp),
}

impl ValFilter {
    fn accepts(&self, v: RatExp) -> bool {
        match self {
            ValFilter::All => true,
            ValFilter::AtLeast(x) => v >= *x,
            ValFilter::Above(x) => v > *x,
        }
    }
}

/// Lower convex hull of `(k, val a_k)` over coefficients that are nonzero to
/// truncation.
pub fn newton_polygon(p: &Poly) -> NewtonPolygon {
    let pts: Vec<(usize, RatExp)> = p
        .coeffs()
        .iter()
        .enumerate()
        .filter_map(|(k, c)| c.val().finite().map(|v| (k, v)))
        .collect();
    let mut hull: Vec<(usize, RatExp)> = Vec::new();
    for pt in pts {
        while hull.len() >= 2 {
            let (k1, v1) = hull[hull.len() - 2];
            let (k2, v2) = hull[hull.len() - 1];
            // drop the middle point when it is on or above the chord
            let lhs = (v2 - v1) * (pt.0 as i64 - k1 as i64);
            let rhs = (pt.1 - v1) * (k2 as i64 - k1 as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let segments = hull
        .windows(2)
        .map(|w| {
            let (k1, v1) = w[0];
            let (k2, v2) = w[1];
            Segment {
                start: k1,
                end: k2,
                slope: (v2 - v1) / (k2 - k1) as i64,
                length: k2 - k1,
            }
        })
        .collect();
    NewtonPolygon {
        vertices: hull,
        segments,
    }
}

pub fn cmp_series(a: &PuiseuxSeries, b: &PuiseuxSeries) -> Ordering {
    let key = |s: &PuiseuxSeries| -> Vec<(RatExp, f64, f64)> {
        s.terms().map(|(e, c)| (e, c.re, c.im)).collect()
    };
    a.val().cmp(&b.val()).then_with(|| {
        let (ka, kb) = (key(a), key(b));
        for (x, y) in ka.iter().zip(kb.iter()) {
            let o = x
                .0
                .cmp(&y.0)
                .then(x.1.total_cmp(&y.1))
                .then(x.2.total_cmp(&y.2));
            if o != Ordering::Equal {
                return o;
            }
        }
        ka.len().cmp(&kb.len())
    })
}

const POLISH_STEPS: usize = 2;

/// All roots with the default solver options, each accurate below the
/// absolute exponent `precision`.

pub fn puiseux_roots(p: &Poly, precision: RatExp) -> Result<Vec<PuiseuxRoot>> {
    puiseux_roots_with(p, precision, ValFilter::All, &SolverOptions::default())
}

pub fn puiseux_roots_with(
    p: &Poly,
    precision: RatExp,
    filter: ValFilter,
    opts: &SolverOptions,
) -> Result<Vec<PuiseuxRoot>> {
    match p.degree() {
        None | Some(0) => {
            return Err(Error::Precondition("polynomial must have degree at least 1".into()))
        }
        _ => {}
    }
    if p.coeffs().last().unwrap().val().is_infinite() {
        return Err(Error::Precondition("leading coefficient vanishes to truncation".into()));
    }
    // Clusters cost precision in the recursion; with exact coefficients the
    // working order can be raised until every root meets the target.
    let exact = p.coeffs().iter().all(|c| c.is_exact());
    let mut work = precision;
    let mut roots = solve(p, work, filter, opts)?;
    let mut prev: Option<RatExp> = None;
    for _ in 0..opts.precision_retries {
        let got = roots.iter().filter_map(|r| r.series.order()).min();
        match got {
            // a root held back by floating noise does not improve with more
            // working order
            Some(g) if exact && g < precision && prev.is_none_or(|p| g > p) => {
                prev = Some(g);
                let raised = solve(p, work + (precision - g), filter, opts)?;
                work = work + (precision - g);
                roots = raised;
            }
            _ => break,
        }
    }
    let roots_trunc: Vec<PuiseuxRoot> = roots
        .into_iter()
        .map(|r| PuiseuxRoot {
            series: match r.series.order() {
                Some(o) if o > precision => r.series.truncate(precision),
                _ => r.series,
            },
            multiplicity: r.multiplicity,
        })
        .collect();
    let mut roots = merge_equal_roots(roots_trunc);
    let dp = p.derivative();
    for r in roots.iter_mut().filter(|r| r.multiplicity == 1) {
        r.series = polish(p, &dp, &r.series);
    }
    for r in &roots {
        r.series.check_ramification(opts.ramification_cap)?;
    }
    roots.sort_by(|a, b| cmp_series(&a.series, &b.series));
    Ok(roots)
}

/// Series Newton steps on a simple root. The recursion accumulates floating
/// error in the high coefficients; one step brings them back to the level of
/// the residual evaluation. Only corrections below the root's own order are
/// applied, and a step is kept only if the residual shrinks.
fn polish(p: &Poly, dp: &Poly, x: &PuiseuxSeries) -> PuiseuxSeries {
    let Some(order) = x.order() else { return x.clone() };
    if x.is_zero() {
        return x.clone();
    }
    let residual = |y: &PuiseuxSeries| {
        let r = p.eval_sum(y, None);
        let cut = r.order();
        r.terms()
            .take_while(|(e, _)| cut.is_none_or(|c| *e < c))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    };
    let mut best = x.clone();
    let mut best_res = residual(x);
    for _ in 0..POLISH_STEPS {
        if best_res == 0.0 {
            break;
        }
        let d = dp.eval(&best);
        if d.val().is_infinite() {
            break;
        }
        let Ok(corr) = p.eval_sum(&best, None).div(&d) else { break };
        let step = PuiseuxSeries::from_terms(corr.terms().filter(|(e, _)| *e < order), None);
        let next = (&best - &step).truncate(order);
        let next_res = residual(&next);
        if next_res < best_res {
            best = next;
            best_res = next_res;
        } else {
            break;
        }
    }
    best
}

/// Roots that became indistinguishable after truncation are merged.
fn merge_equal_roots(roots: Vec<PuiseuxRoot>) -> Vec<PuiseuxRoot> {
    let mut out: Vec<PuiseuxRoot> = Vec::new();
    for r in roots {
        match out.iter_mut().find(|o| (&o.series - &r.series).is_zero()) {
            Some(o) => o.multiplicity += r.multiplicity,
            None => out.push(r),
        }
    }
    out
}

fn push_zero_roots(out: &mut Vec<PuiseuxRoot>, series: PuiseuxSeries, m: usize) {
    if m == 0 {
        return;
    }
    if let Some(r) = out.iter_mut().find(|r| r.series.is_zero()) {
        r.multiplicity += m;
        if r.series.is_exact() && !series.is_exact() {
            r.series = series;
        }
    } else {
        out.push(PuiseuxRoot {
            series,
            multiplicity: m,
        });
    }
}

fn solve(p: &Poly, prec: RatExp, filter: ValFilter, opts: &SolverOptions) -> Result<Vec<PuiseuxRoot>> {
    let mut out = Vec::new();
    let coeffs = p.coeffs();
    let k0 = coeffs.iter().take_while(|c| c.is_zero()).count();
    if k0 > 0 {
        let exact = coeffs[..k0].iter().all(|c| c.is_exact());
        let z = if exact {
            PuiseuxSeries::zero()
        } else {
            PuiseuxSeries::zero_to(prec)
        };
        push_zero_roots(&mut out, z, k0);
    }
    let rest = Poly::new(coeffs[k0..].to_vec());
    let polygon = newton_polygon(&rest);
    for seg in &polygon.segments {
        let mu = seg.root_valuation();
        if !filter.accepts(mu) {
            continue;
        }
        if mu >= prec {
            push_zero_roots(&mut out, PuiseuxSeries::zero_to(prec), seg.length);
            continue;
        }
        out.extend(solve_segment(&rest, seg, prec, opts)?);
    }
    Ok(out)
}

/// `t^{-v} P(t^mu y)` truncated at `cap`, where `v` is the segment height.
fn rescale_for_segment(p: &Poly, seg: &Segment, cap: RatExp) -> Poly {
    let mu = seg.root_valuation();
    let v = p.coeffs()[seg.start].val().finite().unwrap() + mu * seg.start as i64;
    let one = Complex64::new(1.0, 0.0);
    Poly::new(
        p.coeffs()
            .iter()
            .enumerate()
            .map(|(k, a)| a.mul_monomial(one, mu * k as i64 - v).truncate(cap))
            .collect(),
    )
}

fn solve_segment(p: &Poly, seg: &Segment, prec: RatExp, opts: &SolverOptions) -> Result<Vec<PuiseuxRoot>> {
    let mu = seg.root_valuation();
    let t_mu = PuiseuxSeries::t_pow(mu);
    t_mu.check_ramification(opts.ramification_cap)?;
    let cap = prec - mu;
    let r = rescale_for_segment(p, seg, cap);
    let chi: Vec<Complex64> = r.coeffs()[seg.start..=seg.end]
        .iter()
        .map(|c| c.constant_term())
        .collect();
    let raw = roots::aberth(&chi, &opts.aberth)?;
    let clusters = cluster_roots(&chi, &raw, opts.cluster_radius, opts)?;
    let mut out = Vec::new();
    for (c, m) in clusters {
        if m == 1 {
            let y = newton_lift(&r, c, cap, opts)?;
            out.push(PuiseuxRoot {
                series: y.mul_trunc(&t_mu, Some(prec)),
                multiplicity: 1,
            });
        } else {
            let shifted = r.taylor_shift(&PuiseuxSeries::constant(c), Some(cap));
            let sub = solve(&shifted, cap, ValFilter::Above(RatExp::zero()), opts)?;
            let found: usize = sub.iter().map(|s| s.multiplicity).sum();
            if found != m {
                return Err(Error::ClusterAmbiguity(format!(
                    "cluster of {m} characteristic roots near {c} resolved into {found} branches"
                )));
            }
            for s in sub {
                let y = &PuiseuxSeries::constant(c) + &s.series;
                out.push(PuiseuxRoot {
                    series: y.mul_trunc(&t_mu, Some(prec)),
                    multiplicity: s.multiplicity,
                });
            }
        }
    }
    Ok(out)
}

fn nth_derivative(c: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut d = c.to_vec();
    for _ in 0..n {
        d = roots::derivative(&d);
    }
    d
}

/// Checks that `c` is a root of multiplicity at least `m`.
fn is_multiple_root(chi: &[Complex64], c: Complex64, m: usize, tol: f64) -> bool {
    (0..m).all(|j| {
        let d = nth_derivative(chi, j);
        roots::residual_ok(&d, c, tol)
    })
}

fn single_linkage(points: &[Complex64], radius: f64) -> Vec<Vec<Complex64>> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = 1f64.max(points[i].norm()).max(points[j].norm());
            if (points[i] - points[j]).norm() <= radius * scale {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    let mut ids: Vec<usize> = Vec::new();
    for i in 0..n {
        let root = find(&mut label, i);
        match ids.iter().position(|x| *x == root) {
            Some(g) => groups[g].push(points[i]),
            None => {
                ids.push(root);
                groups.push(vec![points[i]]);
            }
        }
    }
    groups
}

/// Groups raw characteristic roots into distinct roots with multiplicity.
fn cluster_roots(
    chi: &[Complex64],
    raw: &[Complex64],
    radius: f64,
    opts: &SolverOptions,
) -> Result<Vec<(Complex64, usize)>> {
    let mut out = Vec::new();
    for g in single_linkage(raw, radius) {
        let m = g.len();
        if m == 1 {
            out.push((roots::polish(chi, g[0], 8), 1));
            continue;
        }
        let centroid = g.iter().sum::<Complex64>() / m as f64;
        let c = roots::polish(&nth_derivative(chi, m - 1), centroid, 8);
        if is_multiple_root(chi, c, m, opts.eps_cluster * 1e-2) {
            out.push((c, m));
        } else if radius * 1e-2 >= opts.eps_cluster {
            out.extend(cluster_roots(chi, &g, radius * 1e-2, opts)?);
        } else {
            return Err(Error::ClusterAmbiguity(format!(
                "{m} characteristic roots within {radius:e} of {centroid}"
            )));
        }
    }
    Ok(out)
}

const LIFT_NOISE: f64 = 1e-10;

/// Newton iteration for the simple root of `r` (coefficients of nonnegative
/// valuation) whose constant term is `c`, accurate below exponent `cap`.
///
/// Floating error grows with the exponent; once the residual stops gaining
/// valuation the root is returned truncated where it is still certified.
fn newton_lift(r: &Poly, c: Complex64, cap: RatExp, opts: &SolverOptions) -> Result<PuiseuxSeries> {
    let dr = r.derivative();
    let mut y = PuiseuxSeries::constant(c).truncate(cap);
    let mut best: Option<(RatExp, PuiseuxSeries)> = None;
    let mut stalls = 0;
    for _ in 0..opts.max_newton_steps {
        let num = r.eval_sum(&y, Some(cap));
        let nv = match num.val() {
            Valuation::Infinite => return Ok(y),
            Valuation::Finite(v) => v,
        };
        match &best {
            Some((bv, _)) if nv <= *bv => {
                stalls += 1;
                if stalls >= 2 {
                    let (bv, by) = best.unwrap();
                    return Ok(by.truncate(bv));
                }
            }
            _ => {
                stalls = 0;
                best = Some((nv, y.clone()));
            }
        }
        let den = dr.eval_trunc(&y, Some(cap));
        if den.val() != Valuation::Finite(RatExp::zero()) {
            return Err(Error::ClusterAmbiguity(format!(
                "derivative at characteristic root {c} has valuation {}",
                den.val()
            )));
        }
        let step = num.mul_trunc(&den.inv_to(cap)?, Some(cap));
        y = (&y - &step).truncate(cap);
        // corrections at rounding level: the characteristic root itself is
        // only known to floating precision
        if step.max_abs_coeff() <= LIFT_NOISE * y.max_abs_coeff().max(1.0) {
            return Ok(y);
        }
        y.check_ramification(opts.ramification_cap)?;
    }
    Err(Error::ClusterAmbiguity(format!(
        "Newton lift from {c} did not settle within {} steps",
        opts.max_newton_steps
    )))
}

/// Expands `lead * prod (z - r_i)^{m_i}`.
pub fn reconstruct(lead: &PuiseuxSeries, roots: &[PuiseuxRoot]) -> Poly {
    let mut acc = Poly::constant(lead.clone());
    let one = PuiseuxSeries::one();
    for r in roots {
        let lin = Poly::new(vec![-&r.series, one.clone()]);
        for _ in 0..r.multiplicity {
            acc = acc.mul(&lin);
        }
    }
    acc
}

/// Partitions `items` into cycles of the map `image`, matching each image
/// to the unique item that is strictly closest (by `closeness`, larger is
/// closer) and at least `precision_match` close.
pub fn separate_orbits_by<T, F, C>(
    items: &[T],
    image: F,
    closeness: C,
    precision_match: Option<RatExp>,
) -> Result<Vec<Vec<usize>>>
where
    F: Fn(&T) -> Result<T>,
    C: Fn(&T, &T) -> Valuation,
{
    let n = items.len();
    let mut next = vec![usize::MAX; n];
    for (i, item) in items.iter().enumerate() {
        let img = image(item)?;
        let mut scored: Vec<(Valuation, usize)> =
            items.iter().enumerate().map(|(j, r)| (closeness(&img, r), j)).collect();
        scored.sort_by(|a, b| b.0.cmp(&a.0));
        let (best, j) = scored[0];
        if scored.len() > 1 && scored[1].0 == best {
            return Err(Error::MatchAmbiguity(format!(
                "image of point {i} is equally close to points {j} and {} (closeness {best})",
                scored[1].1
            )));
        }
        if let (Some(pm), Valuation::Finite(v)) = (precision_match, best) {
            if v < pm {
                return Err(Error::MatchAmbiguity(format!(
                    "image of point {i} is only {v}-close to its best match"
                )));
            }
        }
        next[i] = j;
    }
    let mut seen = vec![false; n];
    let mut hit = vec![false; n];
    for j in &next {
        if hit[*j] {
            return Err(Error::MatchAmbiguity("step is not a permutation of the roots".into()));
        }
        hit[*j] = true;
    }
    let mut orbits = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            orbit.push(i);
            i = next[i];
        }
        orbits.push(orbit);
    }
    Ok(orbits)
}

/// Groups roots into cycles of `step`, matched by `val(step(r) - r')`.
pub fn separate_orbits<F>(
    roots: &[PuiseuxRoot],
    step: F,
    precision_match: Option<RatExp>,
) -> Result<Vec<Vec<usize>>>
where
    F: Fn(&PuiseuxSeries) -> Result<PuiseuxSeries>,
{
    separate_orbits_by(
        roots,
        |r| {
            Ok(PuiseuxRoot {
                series: step(&r.series)?,
                multiplicity: r.multiplicity,
            })
        },
        |a, b| (&a.series - &b.series).val(),
        precision_match,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn laurent(terms: &[(i64, f64)]) -> PuiseuxSeries {
        PuiseuxSeries::from_terms(terms.iter().map(|(e, x)| (RatExp::int(*e), c(*x, 0.0))), None)
    }

    fn poly(cs: &[&[(i64, f64)]]) -> Poly {
        Poly::new(cs.iter().map(|t| laurent(t)).collect())
    }

    #[test]
    fn polygon_examples() {
        let p = poly(&[&[(1, -1.0)], &[], &[(0, 1.0)]]);
        let np = newton_polygon(&p);
        assert_eq!(np.segments.len(), 1);
        assert_eq!(np.segments[0].slope, RatExp::new(-1, 2));
        assert_eq!(np.segments[0].length, 2);

        let q = poly(&[&[(-1, 1.0)], &[(0, -1.0)], &[(0, 1.0)]]);
        let nq = newton_polygon(&q);
        assert_eq!(nq.segments.len(), 1);
        assert_eq!(nq.segments[0].root_valuation(), RatExp::new(-1, 2));
        assert_eq!(nq.segments[0].length, 2);

        let lin = poly(&[&[(0, -1.0)], &[(0, 1.0)]]);
        let nl = newton_polygon(&lin);
        assert_eq!(nl.segments, vec![Segment { start: 0, end: 1, slope: RatExp::zero(), length: 1 }]);
    }

    #[test]
    fn square_root_of_t() {
        let p = poly(&[&[(1, -1.0)], &[], &[(0, 1.0)]]);
        let roots = puiseux_roots(&p, RatExp::int(5)).unwrap();
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert_eq!(r.multiplicity, 1);
            assert_eq!(r.series.num_terms(), 1);
            let (e, x) = r.series.leading().unwrap();
            assert_eq!(e, RatExp::new(1, 2));
            assert!((x.norm() - 1.0).abs() < 1e-14 && x.im.abs() < 1e-14);
        }
    }

    #[test]
    fn quadratic_with_pole() {
        // z^2 - z + 1/t: roots ±i t^{-1/2} + 1/2 + O(t^{1/2})
        let p = poly(&[&[(-1, 1.0)], &[(0, -1.0)], &[(0, 1.0)]]);
        let roots = puiseux_roots(&p, RatExp::int(4)).unwrap();
        assert_eq!(roots.len(), 2);
        let mut leads: Vec<f64> = roots
            .iter()
            .map(|r| {
                assert_eq!(r.series.val(), Valuation::Finite(RatExp::new(-1, 2)));
                assert!((r.series.constant_term() - c(0.5, 0.0)).norm() < 1e-13);
                r.series.coeff(RatExp::new(-1, 2)).im
            })
            .collect();
        leads.sort_by(f64::total_cmp);
        assert!((leads[0] + 1.0).abs() < 1e-13 && (leads[1] - 1.0).abs() < 1e-13);
        // closed form: sqrt(1 - t/4) expansion gives -i/8 t^{1/2} on the +i branch
        let plus = roots.iter().find(|r| r.series.coeff(RatExp::new(-1, 2)).im > 0.0).unwrap();
        assert!((plus.series.coeff(RatExp::new(1, 2)) - c(0.0, -0.125)).norm() < 1e-12);
    }

    #[test]
    fn triple_root() {
        let p = poly(&[&[(0, -1.0)], &[(0, 3.0)], &[(0, -3.0)], &[(0, 1.0)]]);
        let roots = puiseux_roots(&p, RatExp::int(5)).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 3);
        assert!((roots[0].series.constant_term() - c(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(roots[0].series.num_terms(), 1);
    }

    #[test]
    fn zero_root_split_off() {
        // z^3 - t z: roots 0, ±t^{1/2}
        let p = poly(&[&[], &[(1, -1.0)], &[], &[(0, 1.0)]]);
        let roots = puiseux_roots(&p, RatExp::int(3)).unwrap();
        assert_eq!(roots.iter().map(|r| r.multiplicity).sum::<usize>(), 3);
        assert!(roots.iter().any(|r| r.series.is_zero() && r.series.is_exact()));
    }

    #[test]
    fn reconstruction_of_mixed_polynomial() {
        // (z - t^{-1})(z - 1 - t)(z^2 - t^3)
        let p = poly(&[&[(-1, -1.0)], &[(0, 1.0)]])
            .mul(&poly(&[&[(0, -1.0), (1, -1.0)], &[(0, 1.0)]]))
            .mul(&poly(&[&[(3, -1.0)], &[], &[(0, 1.0)]]));
        let roots = puiseux_roots(&p, RatExp::int(12)).unwrap();
        let back = reconstruct(p.coeffs().last().unwrap(), &roots);
        for k in 0..=4 {
            assert!(back.coeff(k).max_coeff_diff(&p.coeff(k), RatExp::int(8)) < 1e-9);
        }
        let mass: RatExp = roots
            .iter()
            .map(|r| r.series.val().finite().unwrap() * r.multiplicity as i64)
            .fold(RatExp::zero(), |a, b| a + b);
        assert_eq!(mass, p.coeff(0).val().finite().unwrap() - p.coeff(4).val().finite().unwrap());
    }

    #[test]
    fn orbits_of_constant_quadratic() {
        // period-2 equation of z^2 - 1 is (z^2 - 1)^2 - 1 - z = z^4 - 2z^2 - z
        let p = poly(&[&[], &[(0, -1.0)], &[(0, -2.0)], &[], &[(0, 1.0)]]);
        let roots = puiseux_roots(&p, RatExp::int(3)).unwrap();
        let f = |z: &PuiseuxSeries| Ok(&(z * z) - &PuiseuxSeries::one());
        let orbits = separate_orbits(&roots, f, None).unwrap();
        let mut sizes: Vec<usize> = orbits.iter().map(|o| o.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 2]);
        let two = orbits.iter().find(|o| o.len() == 2).unwrap();
        let mut vals: Vec<f64> = two.iter().map(|i| roots[*i].series.constant_term().re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] + 1.0).abs() < 1e-12 && vals[1].abs() < 1e-12);
    }
}
