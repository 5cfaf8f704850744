//! Meromorphic families `f_t = P_t / Q_t`, iterates, periodic points over the
//! Puiseux field and their multipliers.
//!
//! Points of the projective line are kept in one of two charts: the affine
//! coordinate `z` when `val(z) >= 0`, and `w = 1/z` when `val(z) < 0`
//! (including `w = 0`, the point at infinity).

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::newton::{self, cmp_series, PuiseuxRoot, SolverOptions, ValFilter};
use crate::poly::{compose_homogeneous, Poly};
use crate::puiseux::{PuiseuxSeries, RatExp, Valuation};
use crate::roots;

pub const N_MAX: usize = 6;
pub const DEGREE_BUDGET: usize = 5000;
/// Distance from a primitive root of unity below which a multiplier counts
/// as that root.
pub const FORMAL_TOL: f64 = 1e-6;
/// Upper edge of the band in which the formal-cycle test is ambiguous.
pub const FORMAL_BAND: f64 = 1e-3;
/// Relative coefficient size below which two orbit points are considered to
/// agree at that exponent.
pub const MATCH_TOL: f64 = 1e-8;
const MATCH_RETRIES: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalMapFamily {
    p: Poly,
    q: Poly,
    degree: usize,
}

impl RationalMapFamily {
    /// `P/Q`, rejecting pairs with a common factor at a generic parameter.
    pub fn new(p: Poly, q: Poly) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::Precondition("denominator is zero".into()));
        }
        let degree = p.degree().unwrap_or(0).max(q.degree().unwrap());
        if degree == 0 {
            return Err(Error::Precondition("map is constant".into()));
        }
        let f = RationalMapFamily { p, q, degree };
        if f.shares_factor() {
            return Err(Error::Precondition("numerator and denominator share a factor".into()));
        }
        Ok(f)
    }

    pub fn polynomial(p: Poly) -> Result<Self> {
        Self::new(p, Poly::one())
    }

    /// Degree counted as a pair of formal degree `d` (no factor check).
    fn formal(p: Poly, q: Poly, degree: usize) -> Self {
        RationalMapFamily { p, q, degree }
    }

    pub fn p(&self) -> &Poly {
        &self.p
    }

    pub fn q(&self) -> &Poly {
        &self.q
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_polynomial(&self) -> bool {
        self.q.degree() == Some(0)
    }

    /// Complex coefficient vectors of `P` and `Q` at `t0`.
    pub fn eval_t(&self, t0: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
        (self.p.eval_t(t0), self.q.eval_t(t0))
    }

    fn shares_factor(&self) -> bool {
        let samples = [Complex64::new(0.3141, 0.2718), Complex64::new(-0.1732, 0.4142)];
        samples.iter().all(|t0| {
            let (pc, qc) = self.eval_t(*t0);
            let qc = roots::trim(&qc);
            let pc = roots::trim(&pc);
            if qc.len() <= 1 || pc.len() <= 1 {
                return false;
            }
            match roots::aberth(qc, &Default::default()) {
                Ok(rs) => rs.iter().any(|r| roots::residual_ok(pc, *r, 1e-9)),
                Err(_) => false,
            }
        })
    }

    /// `f(z) = P(z)/Q(z)` as a series.
    pub fn eval(&self, z: &PuiseuxSeries) -> Result<PuiseuxSeries> {
        self.p.eval(z).div(&self.q.eval(z))
    }

    /// `f ∘ g`, formal degree `deg f * deg g`.
    pub fn compose(&self, g: &RationalMapFamily) -> RationalMapFamily {
        let (p, q) = compose_homogeneous(&self.p, &self.q, self.degree, &g.p, &g.q);
        Self::formal(p, q, self.degree * g.degree)
    }

    /// Coordinates with every coefficient truncated at `order`.
    pub fn truncated(&self, order: RatExp) -> RationalMapFamily {
        Self::formal(self.p.truncate_coeffs(order), self.q.truncate_coeffs(order), self.degree)
    }
}

/// `(a z + b) / (c z + d)` with series coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Mobius {
    pub a: PuiseuxSeries,
    pub b: PuiseuxSeries,
    pub c: PuiseuxSeries,
    pub d: PuiseuxSeries,
}

impl Mobius {
    pub fn new(a: PuiseuxSeries, b: PuiseuxSeries, c: PuiseuxSeries, d: PuiseuxSeries) -> Result<Self> {
        let det = &(&a * &d) - &(&b * &c);
        if det.is_zero() {
            return Err(Error::Precondition("Möbius map is degenerate".into()));
        }
        Ok(Mobius { a, b, c, d })
    }

    /// `z ↦ a + t^rho z`.
    pub fn affine(center: PuiseuxSeries, rho: RatExp) -> Self {
        Mobius {
            a: PuiseuxSeries::t_pow(rho),
            b: center,
            c: PuiseuxSeries::zero(),
            d: PuiseuxSeries::one(),
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }

    pub fn as_family(&self) -> RationalMapFamily {
        RationalMapFamily::formal(
            Poly::new(vec![self.b.clone(), self.a.clone()]),
            Poly::new(vec![self.d.clone(), self.c.clone()]),
            1,
        )
    }

    /// Image of a finite point; `None` when it lands on infinity.
    pub fn apply(&self, z: &PuiseuxSeries) -> Result<Option<PuiseuxSeries>> {
        let num = &(&self.a * z) + &self.b;
        let den = &(&self.c * z) + &self.d;
        if den.is_zero() {
            return Ok(None);
        }
        Ok(Some(num.div(&den)?))
    }

    /// `M ∘ f ∘ M⁻¹`.
    pub fn conjugate(&self, f: &RationalMapFamily) -> RationalMapFamily {
        self.as_family().compose(&f.compose(&self.inverse().as_family()))
    }
}

/// `(P_n, Q_n)` with `f^n = P_n/Q_n`, of formal degree `d^n`, composed
/// homogeneously without cancelling common factors.
pub fn iterate(f: &RationalMapFamily, n: usize) -> Result<(Poly, Poly)> {
    iterate_with_budget(f, n, DEGREE_BUDGET)
}

pub fn iterate_with_budget(f: &RationalMapFamily, n: usize, budget: usize) -> Result<(Poly, Poly)> {
    if n == 0 {
        return Err(Error::Precondition("period must be positive".into()));
    }
    let size = (f.degree as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > budget as u128 {
        return Err(Error::SizeBudgetExceeded(format!(
            "degree {}^{n} exceeds the budget {budget}",
            f.degree
        )));
    }
    let (mut pn, mut qn) = (f.p.clone(), f.q.clone());
    for _ in 1..n {
        let (a, b) = compose_homogeneous(&f.p, &f.q, f.degree, &pn, &qn);
        pn = a;
        qn = b;
    }
    Ok((pn, qn))
}

/// `P_n(z) - z Q_n(z)`; its roots on the projective line number `d^n + 1`.
pub fn fixed_equation(f: &RationalMapFamily, n: usize) -> Result<Poly> {
    let (pn, qn) = iterate(f, n)?;
    Ok(pn.sub(&qn.mul(&Poly::z())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Affine,
    Flipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CyclePoint {
    pub chart: Chart,
    /// `z` in the affine chart, `w = 1/z` in the flipped chart.
    pub coord: PuiseuxSeries,
    pub multiplicity: usize,
}

impl CyclePoint {
    pub fn is_infinity(&self) -> bool {
        self.chart == Chart::Flipped && self.coord.is_zero()
    }

    /// Affine coordinate, `None` at infinity.
    pub fn z(&self) -> Result<Option<PuiseuxSeries>> {
        match self.chart {
            Chart::Affine => Ok(Some(self.coord.clone())),
            Chart::Flipped if self.coord.is_zero() => Ok(None),
            Chart::Flipped => Ok(Some(self.coord.inv()?)),
        }
    }

    /// Places a finite point in its chart.
    pub fn from_z(z: &PuiseuxSeries) -> Result<Self> {
        match z.val() {
            Valuation::Finite(v) if v < RatExp::zero() => Ok(CyclePoint {
                chart: Chart::Flipped,
                coord: z.inv()?,
                multiplicity: 1,
            }),
            _ => Ok(CyclePoint {
                chart: Chart::Affine,
                coord: z.clone(),
                multiplicity: 1,
            }),
        }
    }

    pub fn infinity() -> Self {
        CyclePoint {
            chart: Chart::Flipped,
            coord: PuiseuxSeries::zero(),
            multiplicity: 1,
        }
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        self.chart
            .cmp(&other.chart)
            .then_with(|| cmp_series(&self.coord, &other.coord))
    }
}

/// The map written in both charts, with derivatives.
pub struct ChartMaps {
    p: Poly,
    q: Poly,
    pr: Poly,
    qr: Poly,
    dp: Poly,
    dq: Poly,
    dpr: Poly,
    dqr: Poly,
}

impl ChartMaps {
    pub fn new(f: &RationalMapFamily) -> Self {
        let pr = f.p.reversed(f.degree);
        let qr = f.q.reversed(f.degree);
        ChartMaps {
            dp: f.p.derivative(),
            dq: f.q.derivative(),
            dpr: pr.derivative(),
            dqr: qr.derivative(),
            p: f.p.clone(),
            q: f.q.clone(),
            pr,
            qr,
        }
    }

    fn pair(&self, src: Chart) -> (&Poly, &Poly, &Poly, &Poly) {
        match src {
            Chart::Affine => (&self.p, &self.q, &self.dp, &self.dq),
            Chart::Flipped => (&self.pr, &self.qr, &self.dpr, &self.dqr),
        }
    }

    /// Image of a point, placed in the chart where it has nonnegative
    /// valuation.
    pub fn image(&self, src: Chart, x: &PuiseuxSeries) -> Result<(Chart, PuiseuxSeries)> {
        let (p, q, _, _) = self.pair(src);
        let num = p.eval(x);
        let den = q.eval(x);
        match (num.val(), den.val()) {
            (Valuation::Infinite, Valuation::Infinite) => Err(Error::ChartFailure(
                "numerator and denominator both vanish to truncation".into(),
            )),
            (Valuation::Finite(vn), Valuation::Infinite) => Ok((Chart::Flipped, vanishing_quotient(&den, vn))),
            (Valuation::Infinite, Valuation::Finite(vd)) => Ok((Chart::Affine, vanishing_quotient(&num, vd))),
            (Valuation::Finite(vn), Valuation::Finite(vd)) => {
                if vn >= vd {
                    Ok((Chart::Affine, num.div(&den)?))
                } else {
                    Ok((Chart::Flipped, den.div(&num)?))
                }
            }
        }
    }

    /// Derivative of the chart expression of `f` from chart `src` at `x`
    /// into chart `dst`.
    pub fn local_derivative(&self, src: Chart, x: &PuiseuxSeries, dst: Chart) -> Result<PuiseuxSeries> {
        let (p, q, dp, dq) = self.pair(src);
        let (n, d, dn, dd) = match dst {
            Chart::Affine => (p, q, dp, dq),
            Chart::Flipped => (q, p, dq, dp),
        };
        let dv = d.eval(x);
        if dv.is_zero() {
            return Err(Error::ChartFailure("denominator vanishes at the point".into()));
        }
        // (n' - y d') / d with y = n / d; the quotient-rule numerator cancels
        // at leading order and loses accuracy when divided by d^2
        let y = n.eval(x).div(&dv)?;
        (&dn.eval(x) - &(&y * &dd.eval(x))).div(&dv)
    }
}

/// `a / b` for `a` vanishing to truncation and `val b = vb`.
fn vanishing_quotient(a: &PuiseuxSeries, vb: RatExp) -> PuiseuxSeries {
    match a.order() {
        None => PuiseuxSeries::zero(),
        Some(o) => PuiseuxSeries::zero_to(o - vb),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleClass {
    Repelling,
    Indifferent,
    Attracting,
}

impl CycleClass {
    pub fn from_valuation(v: Valuation) -> Self {
        match v {
            Valuation::Finite(x) if x < RatExp::zero() => CycleClass::Repelling,
            Valuation::Finite(x) if x == RatExp::zero() => CycleClass::Indifferent,
            _ => CycleClass::Attracting,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleRecord {
    pub period: usize,
    pub exact_period: usize,
    pub points: Vec<CyclePoint>,
    /// Multiplicity of each orbit point as a root of the period-`n` equation.
    pub multiplicity: usize,
    /// Derivative of `f^m` along the orbit, `m` the exact period.
    pub multiplier: PuiseuxSeries,
    pub multiplier_valuation: Valuation,
    pub class: CycleClass,
    pub formal_flag: bool,
}

impl CycleRecord {
    /// Multiplier of `f^n` at an orbit point, `n` the requested period.
    pub fn multiplier_n(&self) -> PuiseuxSeries {
        self.multiplier.pow((self.period / self.exact_period) as u32)
    }

    pub fn blow_up_exponent(&self) -> BlowUpExponent {
        blow_up_exponent(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlowUpExponent {
    pub value: RatExp,
}

/// `max(0, -val μ)/n`, with `μ` the multiplier of `f^n`.
pub fn blow_up_exponent(c: &CycleRecord) -> BlowUpExponent {
    let value = match c.multiplier_valuation {
        Valuation::Finite(v) if v < RatExp::zero() => -v / c.exact_period as i64,
        _ => RatExp::zero(),
    };
    BlowUpExponent { value }
}

#[derive(Clone, Copy, Debug)]
pub struct PeriodicOptions {
    /// Absolute precision of the periodic points in their chart.
    pub precision: RatExp,
    pub n_max: usize,
    pub degree_budget: usize,
    pub solver: SolverOptions,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        PeriodicOptions {
            precision: RatExp::int(8),
            n_max: N_MAX,
            degree_budget: DEGREE_BUDGET,
            solver: SolverOptions::default(),
        }
    }
}

/// Roots of the period-`n` equation in both charts; multiplicities total
/// `d^n + 1`.
pub fn periodic_points(f: &RationalMapFamily, n: usize, opts: &PeriodicOptions) -> Result<Vec<CyclePoint>> {
    if n > opts.n_max {
        return Err(Error::Precondition(format!("period {n} exceeds n_max = {}", opts.n_max)));
    }
    let (pn, qn) = iterate_with_budget(f, n, opts.degree_budget)?;
    let fe = pn.sub(&qn.mul(&Poly::z()));
    let big_d = f.degree.pow(n as u32) + 1;
    if fe.is_zero() {
        return Err(Error::Precondition(format!("f^{n} is the identity")));
    }
    let mut pts = Vec::new();
    if fe.degree().unwrap() > 0 {
        let affine = newton::puiseux_roots_with(&fe, opts.precision, ValFilter::AtLeast(RatExp::zero()), &opts.solver)?;
        pts.extend(affine.into_iter().map(|r| to_point(Chart::Affine, r)));
    }
    let flipped = newton::puiseux_roots_with(
        &fe.reversed(big_d),
        opts.precision,
        ValFilter::Above(RatExp::zero()),
        &opts.solver,
    )?;
    pts.extend(flipped.into_iter().map(|r| to_point(Chart::Flipped, r)));
    let total: usize = pts.iter().map(|p| p.multiplicity).sum();
    if total != big_d {
        return Err(Error::ClusterAmbiguity(format!(
            "found {total} periodic points with multiplicity, expected {big_d}"
        )));
    }
    Ok(pts)
}

fn to_point(chart: Chart, r: PuiseuxRoot) -> CyclePoint {
    CyclePoint {
        chart,
        coord: r.series,
        multiplicity: r.multiplicity,
    }
}

fn closeness(a: &CyclePoint, b: &CyclePoint) -> Valuation {
    if a.chart != b.chart {
        return Valuation::Finite(RatExp::int(-1_000_000));
    }
    a.coord.agreement(&b.coord, MATCH_TOL)
}

/// Groups points into cycles of `f`.
pub fn group_orbits(f: &RationalMapFamily, pts: &[CyclePoint]) -> Result<Vec<Vec<usize>>> {
    let maps = ChartMaps::new(f);
    newton::separate_orbits_by(
        pts,
        |p| {
            let (chart, coord) = maps.image(p.chart, &p.coord)?;
            Ok(CyclePoint {
                chart,
                coord,
                multiplicity: p.multiplicity,
            })
        },
        closeness,
        None,
    )
}

/// Multiplier of `f^m` along an orbit given in chart form, the orbit listed
/// in dynamical order.
pub fn orbit_multiplier(f: &RationalMapFamily, orbit: &[CyclePoint]) -> Result<PuiseuxSeries> {
    let maps = ChartMaps::new(f);
    let mut acc = PuiseuxSeries::one();
    for (i, p) in orbit.iter().enumerate() {
        let next = &orbit[(i + 1) % orbit.len()];
        let d = maps.local_derivative(p.chart, &p.coord, next.chart)?;
        acc = &acc * &d;
    }
    Ok(acc)
}

/// Multiplier along an orbit of finite points given by their `z` series.
pub fn multiplier(f: &RationalMapFamily, orbit: &[PuiseuxSeries]) -> Result<PuiseuxSeries> {
    let pts = orbit.iter().map(CyclePoint::from_z).collect::<Result<Vec<_>>>()?;
    orbit_multiplier(f, &pts)
}

/// Whether an `m`-cycle counts as a formal `n`-cycle: its multiplier is a
/// primitive `(n/m)`-th root of unity (to truncation).
fn formal_test(mult: &PuiseuxSeries, k: usize) -> Result<bool> {
    if k == 1 {
        return Ok(true);
    }
    if mult.val() != Valuation::Finite(RatExp::zero()) {
        return Ok(false);
    }
    let c = mult.constant_term();
    let (dist, zeta) = (1..k)
        .filter(|j| num_integer::gcd(*j, k) == 1)
        .map(|j| {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / k as f64);
            ((c - z).norm(), z)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    if dist <= FORMAL_TOL {
        let rest = mult - &PuiseuxSeries::constant(zeta);
        let tail_zero = rest
            .terms()
            .all(|(e, x)| e == RatExp::zero() && x.norm() <= FORMAL_TOL);
        Ok(tail_zero)
    } else if dist < FORMAL_BAND {
        Err(Error::FormalCycleAmbiguity(format!(
            "multiplier constant term {c} is {dist:e} from a primitive {k}-th root of unity"
        )))
    } else {
        Ok(false)
    }
}

/// Cycles whose period divides `n`, one record per orbit.
pub fn periodic_cycles(f: &RationalMapFamily, n: usize, precision: RatExp) -> Result<Vec<CycleRecord>> {
    periodic_cycles_with(
        f,
        n,
        &PeriodicOptions {
            precision,
            ..Default::default()
        },
    )
}

/// Orbit matching loses precision along expanding orbits; an ambiguous match
/// is retried at a raised precision before it is reported.
pub fn periodic_cycles_with(f: &RationalMapFamily, n: usize, opts: &PeriodicOptions) -> Result<Vec<CycleRecord>> {
    let mut last = None;
    for k in 1..=MATCH_RETRIES + 1 {
        let o = PeriodicOptions {
            precision: opts.precision * k as i64,
            ..*opts
        };
        match cycles_at(f, n, &o) {
            Err(e @ Error::MatchAmbiguity(_)) => last = Some(e),
            other => return other,
        }
    }
    Err(last.unwrap())
}

fn cycles_at(f: &RationalMapFamily, n: usize, opts: &PeriodicOptions) -> Result<Vec<CycleRecord>> {
    let pts = periodic_points(f, n, opts)?;
    let orbits = group_orbits(f, &pts)?;
    let mut out = Vec::new();
    for orbit in orbits {
        let m = orbit.len();
        if n % m != 0 {
            return Err(Error::MatchAmbiguity(format!(
                "orbit of length {m} among points of period {n}"
            )));
        }
        // start the orbit at its smallest point
        let start = (0..m)
            .min_by(|a, b| pts[orbit[*a]].cmp_key(&pts[orbit[*b]]))
            .unwrap();
        let points: Vec<CyclePoint> = (0..m).map(|i| pts[orbit[(start + i) % m]].clone()).collect();
        let multiplicity = points.iter().map(|p| p.multiplicity).max().unwrap();
        let mult = orbit_multiplier(f, &points)?;
        let v = mult.val();
        out.push(CycleRecord {
            period: n,
            exact_period: m,
            formal_flag: formal_test(&mult, n / m)?,
            multiplicity,
            class: CycleClass::from_valuation(v),
            multiplier_valuation: v,
            multiplier: mult,
            points,
        });
    }
    out.sort_by(|a, b| {
        a.exact_period
            .cmp(&b.exact_period)
            .then(a.multiplier_valuation.cmp(&b.multiplier_valuation))
            .then_with(|| a.points[0].cmp_key(&b.points[0]))
    });
    Ok(out)
}

/// Number of formal `n`-cycles: exact `n`-cycles with multiplicity plus
/// lower cycles flagged as formal.
pub fn formal_cycle_count(cycles: &[CycleRecord]) -> usize {
    cycles
        .iter()
        .filter(|c| c.formal_flag)
        .map(|c| if c.exact_period == c.period { c.multiplicity } else { 1 })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub period: usize,
    pub value: RatExp,
    pub caveat: &'static str,
}

/// `d^{-n} Σ max(0, -val μ_n)/n` over period-`n` points with multiplicity.
///
/// Works point by point: the image of each periodic point is snapped to the
/// nearest solved point and local derivatives are multiplied along `n` such
/// steps, so no cycle decomposition is needed. A point of exact period
/// `m | n` contributes `val(μ_m^{n/m})/n`, which equals the per-cycle term
/// `val(μ_m)/m`.
pub fn lyap_na_estimate(f: &RationalMapFamily, n: usize, opts: &PeriodicOptions) -> Result<LyapunovEstimate> {
    let mut sum = RatExp::zero();
    for (p, v) in point_multiplier_valuations(f, n, opts)? {
        sum = sum - v * p.multiplicity as i64 / n as i64;
    }
    Ok(LyapunovEstimate {
        period: n,
        value: sum / (f.degree as i64).pow(n as u32),
        caveat: "estimator, not certified limit",
    })
}

/// Every period-`n` point with `min(0, val μ)`, `μ` the multiplier of `f^n`
/// there.
pub fn point_multiplier_valuations(
    f: &RationalMapFamily,
    n: usize,
    opts: &PeriodicOptions,
) -> Result<Vec<(CyclePoint, RatExp)>> {
    let pts = periodic_points(f, n, opts)?;
    let maps = ChartMaps::new(f);
    let next = nearest_images(&maps, &pts)?;
    let vals = (0..pts.len())
        .map(|i| chain_multiplier_valuation(&maps, &pts, &next, i, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(pts.into_iter().zip(vals).collect())
}

/// Solved points nearest to each point's image; several when tied.
fn nearest_images(maps: &ChartMaps, pts: &[CyclePoint]) -> Result<Vec<Vec<usize>>> {
    let mut next = Vec::with_capacity(pts.len());
    for p in pts {
        let (chart, coord) = maps.image(p.chart, &p.coord)?;
        let img = CyclePoint {
            chart,
            coord,
            multiplicity: p.multiplicity,
        };
        let scored: Vec<Valuation> = pts.iter().map(|q| closeness(&img, q)).collect();
        let best = *scored.iter().max().unwrap();
        next.push((0..pts.len()).filter(|j| scored[*j] == best).collect());
    }
    Ok(next)
}

/// Valuation of the multiplier of `f^n` along snapped orbits from `start`,
/// clipped at zero; every branch through tied matches has to agree.
/// Valuations add along the chain, so branches are tracked as
/// (point, accumulated valuation) pairs.
fn chain_multiplier_valuation(
    maps: &ChartMaps,
    pts: &[CyclePoint],
    next: &[Vec<usize>],
    start: usize,
    n: usize,
) -> Result<RatExp> {
    let mut states: BTreeSet<(usize, Valuation)> = BTreeSet::from([(start, Valuation::Finite(RatExp::zero()))]);
    let mut cache: HashMap<(usize, usize), Valuation> = HashMap::new();
    for _ in 0..n {
        let mut grown = BTreeSet::new();
        for (i, acc) in states {
            for &j in &next[i] {
                let v = match cache.get(&(i, j)) {
                    Some(v) => *v,
                    None => {
                        let d = maps.local_derivative(pts[i].chart, &pts[i].coord, pts[j].chart)?;
                        let v = match (d.val(), d.order()) {
                            (Valuation::Infinite, Some(o)) if o < RatExp::zero() => {
                                return Err(Error::Precondition(format!(
                                    "local derivative is undetermined below t^{o}; raise precision"
                                )))
                            }
                            (v, _) => v,
                        };
                        cache.insert((i, j), v);
                        v
                    }
                };
                let sum = match (acc, v) {
                    (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
                    _ => Valuation::Infinite,
                };
                grown.insert((j, sum));
            }
        }
        states = grown;
    }
    let clip = |v: Valuation| match v {
        Valuation::Finite(x) => x.min(RatExp::zero()),
        Valuation::Infinite => RatExp::zero(),
    };
    let vals: BTreeSet<RatExp> = states.iter().map(|(_, v)| clip(*v)).collect();
    if vals.len() > 1 {
        return Err(Error::MatchAmbiguity(format!(
            "tied orbit matches from point {start} give different multiplier valuations"
        )));
    }
    Ok(vals.into_iter().next().unwrap_or_else(RatExp::zero))
}

pub fn lyap_from_cycles(d: usize, n: usize, cycles: &[CycleRecord]) -> LyapunovEstimate {
    let mut sum = RatExp::zero();
    for c in cycles {
        let points: i64 = c.points.iter().map(|p| p.multiplicity as i64).sum();
        sum = sum + blow_up_exponent(c).value * points;
    }
    LyapunovEstimate {
        period: n,
        value: sum / (d as i64).pow(n as u32),
        caveat: "estimator, not certified limit",
    }
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

    fn quad_pole() -> RationalMapFamily {
        RationalMapFamily::polynomial(poly(&[&[(-1, 1.0)], &[], &[(0, 1.0)]])).unwrap()
    }

    #[test]
    fn iterate_examples() {
        let sq = RationalMapFamily::polynomial(poly(&[&[], &[], &[(0, 1.0)]])).unwrap();
        let (p2, q2) = iterate(&sq, 2).unwrap();
        assert_eq!(p2, Poly::monomial(PuiseuxSeries::one(), 4));
        assert_eq!(q2, Poly::one());

        let f = quad_pole();
        let (p2, _) = iterate(&f, 2).unwrap();
        let inner = f.p().clone();
        let expect = inner.mul(&inner).add(&Poly::constant(laurent(&[(-1, 1.0)])));
        assert_eq!(p2, expect);
    }

    #[test]
    fn budget_is_enforced() {
        let f = quad_pole();
        assert!(matches!(iterate_with_budget(&f, 5, 16), Err(Error::SizeBudgetExceeded(_))));
    }

    #[test]
    fn common_factor_rejected() {
        let p = poly(&[&[(0, -1.0)], &[], &[(0, 1.0)]]);
        let q = poly(&[&[(0, -1.0)], &[(0, 1.0)]]);
        assert!(RationalMapFamily::new(p, q).is_err());
    }

    #[test]
    fn fixed_points_of_quadratic_with_pole() {
        let f = quad_pole();
        let cycles = periodic_cycles(&f, 1, RatExp::int(6)).unwrap();
        assert_eq!(cycles.len(), 3);
        let rep: Vec<_> = cycles.iter().filter(|c| c.class == CycleClass::Repelling).collect();
        assert_eq!(rep.len(), 2);
        for c in &rep {
            assert_eq!(c.multiplier_valuation, Valuation::Finite(RatExp::new(-1, 2)));
            assert_eq!(c.blow_up_exponent().value, RatExp::new(1, 2));
        }
        let inf = cycles.iter().find(|c| c.points[0].is_infinity()).unwrap();
        assert!(inf.multiplier.is_zero());
        assert_eq!(formal_cycle_count(&cycles), 3);
    }

    #[test]
    fn constant_period_two() {
        let f = RationalMapFamily::polynomial(poly(&[&[(0, -1.0)], &[], &[(0, 1.0)]])).unwrap();
        let cycles = periodic_cycles(&f, 2, RatExp::int(4)).unwrap();
        let two: Vec<_> = cycles.iter().filter(|c| c.exact_period == 2).collect();
        assert_eq!(two.len(), 1);
        // 4 z0 z1 with z0 = 0: the cycle is superattracting
        assert!(two[0].multiplier.is_zero());
        assert_eq!(two[0].class, CycleClass::Attracting);
        assert_eq!(formal_cycle_count(&cycles), 1);
    }

    #[test]
    fn parabolic_fixed_point_is_formal_two_cycle() {
        // z^2 - 3/4 has a fixed point with multiplier -1
        let f = RationalMapFamily::polynomial(poly(&[&[(0, -0.75)], &[], &[(0, 1.0)]])).unwrap();
        let cycles = periodic_cycles(&f, 2, RatExp::int(4)).unwrap();
        assert_eq!(formal_cycle_count(&cycles), 1);
        assert!(cycles.iter().all(|c| c.exact_period == 1));
    }

    #[test]
    fn lyapunov_estimator() {
        let f = quad_pole();
        let opts = PeriodicOptions::default();
        assert_eq!(lyap_na_estimate(&f, 1, &opts).unwrap().value, RatExp::new(1, 2));
        assert_eq!(lyap_na_estimate(&f, 2, &opts).unwrap().value, RatExp::new(1, 2));
        let good = RationalMapFamily::polynomial(poly(&[&[(1, 1.0)], &[], &[(0, 1.0)]])).unwrap();
        assert_eq!(lyap_na_estimate(&good, 2, &opts).unwrap().value, RatExp::zero());
    }

    #[test]
    fn multiplier_at_infinity_of_polynomial() {
        let f = quad_pole();
        let m = orbit_multiplier(&f, &[CyclePoint::infinity()]).unwrap();
        assert!(m.is_zero());
    }

    #[test]
    fn cubic_fixed_point_at_zero() {
        // z^3 + z/t: df(0) = 1/t
        let f = RationalMapFamily::polynomial(poly(&[&[], &[(-1, 1.0)], &[], &[(0, 1.0)]])).unwrap();
        let m = multiplier(&f, &[PuiseuxSeries::zero()]).unwrap();
        assert_eq!(m, laurent(&[(-1, 1.0)]));
    }

    #[test]
    fn mobius_conjugation_preserves_fixed_multipliers() {
        let f = quad_pole();
        let m = Mobius::new(laurent(&[(0, 2.0)]), laurent(&[(1, 1.0)]), laurent(&[(0, 0.5)]), laurent(&[(0, 1.0)]))
            .unwrap();
        let g = m.conjugate(&f);
        assert_eq!(g.degree(), 2);
        let mut a: Vec<Valuation> = periodic_cycles(&f, 1, RatExp::int(6)).unwrap().iter().map(|c| c.multiplier_valuation).collect();
        let mut b: Vec<Valuation> = periodic_cycles(&g, 1, RatExp::int(6)).unwrap().iter().map(|c| c.multiplier_valuation).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }
}
