//! Multiplier spectra, blow-up detection and executable checks of the
//! degeneration theorems.

use crate::berkovich::{
    count_critical_in_ball, count_fixed_in_ball, fixed_type_ii_on_ray, image_point, local_degree,
    potential_good_reduction_search, PgrCertificate, TypeIIPoint,
};
use crate::dynamics::{
    iterate, lyap_na_estimate, periodic_cycles_with, point_multiplier_valuations, CycleRecord, PeriodicOptions,
    RationalMapFamily,
};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::puiseux::{PuiseuxSeries, RatExp, Valuation};

/// Coefficient tolerance of the Milnor plane relation.
pub const MILNOR_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub period: usize,
    /// One multiplier of `f^n` per formal `n`-cycle, with multiplicity.
    pub multipliers: Vec<PuiseuxSeries>,
    /// Elementary symmetric functions `σ_1, …, σ_k` of the multipliers.
    pub symmetric_functions: Vec<PuiseuxSeries>,
    pub pole_flags: Vec<bool>,
}

/// `σ_1, …, σ_k` of `xs`.
pub fn elementary_symmetric(xs: &[PuiseuxSeries]) -> Vec<PuiseuxSeries> {
    let mut e = vec![PuiseuxSeries::one()];
    for x in xs {
        let mut next = e.clone();
        next.push(PuiseuxSeries::zero());
        for k in 1..next.len() {
            next[k] = &e.get(k).cloned().unwrap_or_else(PuiseuxSeries::zero) + &(&e[k - 1] * x);
        }
        e = next;
    }
    e.remove(0);
    e
}

/// `Λ_n`: multipliers of the formal `n`-cycles. With `exclude_infinity` (for
/// polynomial fixed-point spectra `Λ'_1`) the superattracting point at
/// infinity is left out.
pub fn lambda_spectrum(
    f: &RationalMapFamily,
    n: usize,
    exclude_infinity: bool,
    opts: &PeriodicOptions,
) -> Result<SpectrumReport> {
    let cycles = periodic_cycles_with(f, n, opts)?;
    let mut multipliers = Vec::new();
    for c in cycles.iter().filter(|c| c.formal_flag) {
        if exclude_infinity && c.points.iter().any(|p| p.is_infinity()) {
            continue;
        }
        let copies = if c.exact_period == c.period { c.multiplicity } else { 1 };
        let mu = c.multiplier_n();
        multipliers.extend(std::iter::repeat(mu).take(copies));
    }
    let pole_flags = multipliers
        .iter()
        .map(|m| matches!(m.val(), Valuation::Finite(v) if v < RatExp::zero()))
        .collect();
    Ok(SpectrumReport {
        period: n,
        symmetric_functions: elementary_symmetric(&multipliers),
        multipliers,
        pole_flags,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowUp {
    pub period: usize,
    pub cycle: CycleRecord,
}

/// Smallest period in `1..=n_max` carrying a cycle whose multiplier has a
/// pole at `t = 0`; the most negative valuation at that period is the witness.
pub fn detect_blow_up(f: &RationalMapFamily, n_max: usize, opts: &PeriodicOptions) -> Result<Option<BlowUp>> {
    for n in 1..=n_max {
        let cycles = periodic_cycles_with(f, n, opts)?;
        let worst = cycles
            .into_iter()
            .filter(|c| c.exact_period == n)
            .filter(|c| matches!(c.multiplier_valuation, Valuation::Finite(v) if v < RatExp::zero()))
            .min_by_key(|c| c.multiplier_valuation);
        if let Some(cycle) = worst {
            return Ok(Some(BlowUp { period: n, cycle }));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    Period2,
    Period3,
    Main2,
    Main5,
    Milnor,
    Dichotomy,
}

impl TheoremId {
    pub fn name(&self) -> &'static str {
        match self {
            TheoremId::Period2 => "period2",
            TheoremId::Period3 => "period3",
            TheoremId::Main2 => "main2",
            TheoremId::Main5 => "main5",
            TheoremId::Milnor => "milnor",
            TheoremId::Dichotomy => "dichotomy",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    CounterexampleCandidate,
    Inconclusive,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Verified => "verified",
            Verdict::CounterexampleCandidate => "counterexample-candidate",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Witness {
    Cycle(CycleRecord),
    TypeII(TypeIIPoint),
}

/// A fixed type II point with local degree at least 2 and its ball counts.
#[derive(Clone, Debug, Serialize)]
pub struct AuditBall {
    pub point: TypeIIPoint,
    pub delta: usize,
    pub fixed_in_ball: usize,
    pub critical_in_ball: usize,
}

/// Counting quantities of the period-2 argument: `δ_i` at fixed type II
/// points, `(μ_i^+, μ_i^-)` at type II 2-cycles, and the two inequalities
/// `Σ(μ⁺+μ⁻−2) ≤ n−1` and `Σ μ⁺μ⁻ ≥ 2n(n−1)` with `n` the number of
/// fixed type II points.
#[derive(Clone, Debug, Serialize)]
pub struct CountingAudit {
    pub fixed_points: Vec<AuditBall>,
    pub two_cycles: Vec<(TypeIIPoint, usize, usize)>,
    pub critical_sum: i64,
    pub critical_bound: i64,
    pub product_sum: i64,
    pub product_bound: i64,
}

impl CountingAudit {
    pub fn critical_inequality(&self) -> bool {
        self.critical_sum <= self.critical_bound
    }

    pub fn product_inequality(&self) -> bool {
        self.product_sum >= self.product_bound
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremCertificate {
    pub theorem: TheoremId,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub pgr: Option<PgrCertificate>,
    /// Human-readable log of the counts that led to the verdict.
    pub audit: Vec<String>,
    pub counting: Option<CountingAudit>,
}

/// Default budget of the potential-good-reduction search inside checkers.
const PGR_BUDGET: usize = 6;

fn repelling_witness(
    f: &RationalMapFamily,
    max_period: usize,
    opts: &PeriodicOptions,
    audit: &mut Vec<String>,
) -> Result<Option<CycleRecord>> {
    for n in 1..=max_period {
        let cycles = periodic_cycles_with(f, n, opts)?;
        let exact: Vec<&CycleRecord> = cycles.iter().filter(|c| c.exact_period == n).collect();
        let repelling: Vec<&&CycleRecord> = exact
            .iter()
            .filter(|c| matches!(c.multiplier_valuation, Valuation::Finite(v) if v < RatExp::zero()))
            .collect();
        audit.push(format!(
            "period {n}: {} cycles of exact period, {} repelling",
            exact.len(),
            repelling.len()
        ));
        if let Some(c) = repelling.into_iter().min_by_key(|c| c.multiplier_valuation) {
            return Ok(Some((*c).clone()));
        }
    }
    Ok(None)
}

/// Shared tail: with no repelling witness the theorem is vacuous exactly when
/// the family has potential good reduction.
fn certify(
    theorem: TheoremId,
    f: &RationalMapFamily,
    witness: Option<CycleRecord>,
    mut audit: Vec<String>,
    counting: Option<CountingAudit>,
) -> TheoremCertificate {
    if let Some(c) = witness {
        audit.push(format!(
            "witness: period {} with multiplier valuation {}",
            c.exact_period, c.multiplier_valuation
        ));
        return TheoremCertificate {
            theorem,
            verdict: Verdict::Verified,
            witness: Some(Witness::Cycle(c)),
            pgr: None,
            audit,
            counting,
        };
    }
    let pgr = potential_good_reduction_search(f, PGR_BUDGET);
    audit.push(format!("no repelling witness; potential good reduction search: {}", pgr.label()));
    let (verdict, witness) = match &pgr {
        PgrCertificate::Pgr { point } => (Verdict::Verified, Some(Witness::TypeII(point.clone()))),
        PgrCertificate::NotPgr { .. } => (Verdict::CounterexampleCandidate, None),
        PgrCertificate::Inconclusive { .. } => (Verdict::CounterexampleCandidate, None),
    };
    TheoremCertificate {
        theorem,
        verdict,
        witness,
        pgr: Some(pgr),
        audit,
        counting,
    }
}

/// A polynomial without potential good reduction has a repelling rigid point
/// of period at most 2, and a repelling fixed point when `d ∈ {2, 3}`.
pub fn check_period2(f: &RationalMapFamily, opts: &PeriodicOptions) -> Result<TheoremCertificate> {
    let d = f.degree();
    if !f.is_polynomial() || d < 2 {
        return Err(Error::Precondition("period-2 check needs a polynomial of degree at least 2".into()));
    }
    let mut audit = Vec::new();
    let max_period = if d <= 3 { 1 } else { 2 };
    let witness = repelling_witness(f, max_period, opts, &mut audit)?;
    let counting = match counting_audit(f, opts) {
        Ok(c) => c,
        Err(e) => {
            audit.push(format!("counting audit not computable: {e}"));
            None
        }
    };
    Ok(certify(TheoremId::Period2, f, witness, audit, counting))
}

/// Fixed type II points with local degree at least 2 reached from the
/// non-repelling rigid fixed points, and type II 2-cycles reached from the
/// non-repelling rigid 2-cycles.
pub fn counting_audit(f: &RationalMapFamily, opts: &PeriodicOptions) -> Result<Option<CountingAudit>> {
    let mut fixed_points: Vec<AuditBall> = Vec::new();
    for c in periodic_cycles_with(f, 1, opts)? {
        if c.class == crate::dynamics::CycleClass::Repelling {
            continue;
        }
        let Some(x0) = c.points[0].z()? else { continue };
        let ray = match fixed_type_ii_on_ray(f, &x0) {
            Ok(r) => r,
            Err(Error::NoBreakpoint) => continue,
            Err(e) => return Err(e),
        };
        if ray.degree < 2 || fixed_points.iter().any(|b| b.point == ray.point) {
            continue;
        }
        fixed_points.push(AuditBall {
            delta: local_degree(f, &ray.point)?,
            fixed_in_ball: count_fixed_in_ball(f, &ray.point, 1)?,
            critical_in_ball: count_critical_in_ball(f, &ray.point)?,
            point: ray.point,
        });
    }
    if fixed_points.is_empty() {
        return Ok(None);
    }
    let (p2, q2) = iterate(f, 2)?;
    let f2 = RationalMapFamily::new(p2, q2)?;
    let mut two_cycles: Vec<(TypeIIPoint, usize, usize)> = Vec::new();
    for c in periodic_cycles_with(f, 2, opts)? {
        if c.exact_period != 2 || c.class == crate::dynamics::CycleClass::Repelling {
            continue;
        }
        let Some(x0) = c.points[0].z()? else { continue };
        let Ok(ray) = fixed_type_ii_on_ray(&f2, &x0) else { continue };
        let z = ray.point;
        let fz = image_point(f, &z)?;
        if fz == z || two_cycles.iter().any(|(w, _, _)| *w == z || *w == fz) {
            continue;
        }
        let (a, b) = (local_degree(f, &z)?, local_degree(f, &fz)?);
        if a.max(b) >= 2 {
            let (hi, lo, base) = if a >= b { (a, b, z) } else { (b, a, fz) };
            two_cycles.push((base, hi, lo));
        }
    }
    let n = fixed_points.len() as i64;
    Ok(Some(CountingAudit {
        critical_sum: two_cycles.iter().map(|(_, a, b)| (*a + *b) as i64 - 2).sum(),
        critical_bound: n - 1,
        product_sum: two_cycles.iter().map(|(_, a, b)| (*a * *b) as i64).sum(),
        product_bound: 2 * n * (n - 1),
        fixed_points,
        two_cycles,
    }))
}

/// A cubic rational map without potential good reduction has a repelling
/// rigid cycle of period at most 3.
pub fn check_period3(f: &RationalMapFamily, opts: &PeriodicOptions) -> Result<TheoremCertificate> {
    if f.degree() != 3 {
        return Err(Error::Precondition("period-3 check needs a cubic map".into()));
    }
    let mut audit = Vec::new();
    let witness = repelling_witness(f, 3, opts, &mut audit)?;
    Ok(certify(TheoremId::Period3, f, witness, audit, None))
}

/// Largest period at which a blow-up is guaranteed for degenerating families
/// of this shape, when one is known.
pub fn main2_bound(f: &RationalMapFamily) -> Option<usize> {
    match (f.degree(), f.is_polynomial()) {
        (2, _) | (3, true) => Some(1),
        (_, true) => Some(2),
        (3, false) => Some(3),
        _ => None,
    }
}

/// Degenerating quadratic rational maps and cubic polynomials blow up at a
/// fixed point, polynomials at period at most 2, cubic rational maps at
/// period at most 3. Shapes without a known bound scan up to `n_max`.
pub fn check_main2(f: &RationalMapFamily, n_max: usize, opts: &PeriodicOptions) -> Result<TheoremCertificate> {
    let bound = main2_bound(f);
    let mut audit = vec![match bound {
        Some(b) => format!("prescribed blow-up period bound {b}"),
        None => format!("no prescribed bound for this shape; scanning to {n_max}"),
    }];
    let found = detect_blow_up(f, bound.unwrap_or(n_max), opts)?;
    if let Some(b) = &found {
        audit.push(format!("blow-up detected at period {}", b.period));
    }
    Ok(certify(TheoremId::Main2, f, found.map(|b| b.cycle), audit, None))
}

#[derive(Clone, Debug, Serialize)]
pub struct Main5Report {
    pub period: usize,
    pub lambda: RatExp,
    /// `nλ/2 + log A`, in valuation units.
    pub threshold: RatExp,
    pub qualifying: usize,
    pub total: usize,
    pub fraction: f64,
}

/// Fraction of period-`n` rigid points (with multiplicity, out of
/// `d^n + 1`) whose multiplier valuation satisfies `-v ≥ nλ/2 + log A`,
/// with `λ` the estimator at period `lambda_period`.
pub fn check_main5_fraction(
    f: &RationalMapFamily,
    n: usize,
    log_a: RatExp,
    lambda_period: usize,
    opts: &PeriodicOptions,
) -> Result<Main5Report> {
    let lambda = lyap_na_estimate(f, lambda_period, opts)?.value;
    if lambda <= RatExp::zero() {
        return Err(Error::Precondition(format!(
            "Lyapunov estimate at period {lambda_period} is {lambda}, the fraction needs a positive exponent"
        )));
    }
    let threshold = lambda * n as i64 / 2 + log_a;
    let vals = point_multiplier_valuations(f, n, opts)?;
    let total: usize = vals.iter().map(|(p, _)| p.multiplicity).sum();
    let qualifying: usize = vals.iter().filter(|(_, v)| -*v >= threshold).map(|(p, _)| p.multiplicity).sum();
    Ok(Main5Report {
        period: n,
        lambda,
        threshold,
        qualifying,
        total,
        fraction: qualifying as f64 / total as f64,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MilnorReport {
    /// `σ_1, σ_2, σ_3` of the three fixed-point multipliers.
    pub sigma: Vec<PuiseuxSeries>,
    /// Largest coefficient of `σ_3 − σ_1 + 2`.
    pub residual: f64,
    pub relation_holds: bool,
    pub degenerate: bool,
}

/// Milnor's relation `σ_3 = σ_1 − 2` for quadratic maps, with a degeneration
/// flag raised when some fixed multiplier has a pole.
pub fn milnor_quadratic_check(f: &RationalMapFamily, opts: &PeriodicOptions) -> Result<MilnorReport> {
    if f.degree() != 2 {
        return Err(Error::Precondition("Milnor check needs a quadratic map".into()));
    }
    let spec = lambda_spectrum(f, 1, false, opts)?;
    if spec.multipliers.len() != 3 {
        return Err(Error::Precondition(format!(
            "expected three fixed multipliers, found {}",
            spec.multipliers.len()
        )));
    }
    let sigma = spec.symmetric_functions.clone();
    let rel = &(&sigma[2] - &sigma[0]) + &PuiseuxSeries::real(2.0);
    let residual = rel.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    Ok(MilnorReport {
        residual,
        relation_holds: residual <= MILNOR_TOL * sigma[0].max_abs_coeff().max(1.0),
        degenerate: spec.pole_flags.iter().any(|p| *p),
        sigma,
    })
}

/// `detect_blow_up = none` for periods up to `n_max` exactly when the
/// Lyapunov estimator vanishes at each of those periods.
pub fn check_dichotomy(f: &RationalMapFamily, n_max: usize, opts: &PeriodicOptions) -> Result<TheoremCertificate> {
    let mut audit = Vec::new();
    let blow = detect_blow_up(f, n_max, opts)?;
    let mut all_zero = true;
    for n in 1..=n_max {
        let l = lyap_na_estimate(f, n, opts)?;
        audit.push(format!("period {n}: Lyapunov estimate {}", l.value));
        all_zero &= l.value == RatExp::zero();
    }
    audit.push(match &blow {
        Some(b) => format!("blow-up at period {}", b.period),
        None => format!("no blow-up up to period {n_max}"),
    });
    let consistent = blow.is_none() == all_zero;
    Ok(TheoremCertificate {
        theorem: TheoremId::Dichotomy,
        verdict: if consistent { Verdict::Verified } else { Verdict::CounterexampleCandidate },
        witness: blow.map(|b| Witness::Cycle(b.cycle)),
        pgr: None,
        audit,
        counting: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use num_complex::Complex64;

    fn laurent(terms: &[(i64, f64)]) -> PuiseuxSeries {
        PuiseuxSeries::from_terms(terms.iter().map(|(e, x)| (RatExp::int(*e), Complex64::new(*x, 0.0))), None)
    }

    fn poly(cs: &[&[(i64, f64)]]) -> Poly {
        Poly::new(cs.iter().map(|t| laurent(t)).collect())
    }

    fn fam(p: &[&[(i64, f64)]]) -> RationalMapFamily {
        RationalMapFamily::polynomial(poly(p)).unwrap()
    }

    fn opts() -> PeriodicOptions {
        PeriodicOptions::default()
    }

    #[test]
    fn symmetric_functions() {
        let xs = [PuiseuxSeries::real(1.0), PuiseuxSeries::real(2.0), PuiseuxSeries::real(3.0)];
        let e = elementary_symmetric(&xs);
        let vals: Vec<f64> = e.iter().map(|s| s.constant_term().re).collect();
        assert_eq!(vals, vec![6.0, 11.0, 6.0]);
    }

    #[test]
    fn spectrum_sizes() {
        let f = fam(&[&[(0, -0.3)], &[], &[(0, 1.0)]]);
        let sizes: Vec<usize> = (1..=3)
            .map(|n| lambda_spectrum(&f, n, false, &opts()).unwrap().multipliers.len())
            .collect();
        assert_eq!(sizes, vec![3, 1, 2]);
        assert_eq!(lambda_spectrum(&f, 1, true, &opts()).unwrap().multipliers.len(), 2);
        let pole = fam(&[&[(-1, 1.0)], &[], &[(0, 1.0)]]);
        let s = lambda_spectrum(&pole, 1, false, &opts()).unwrap();
        assert_eq!(s.pole_flags.iter().filter(|p| **p).count(), 2);
    }

    #[test]
    fn blow_up_detection() {
        let pole = fam(&[&[(-1, 1.0)], &[], &[(0, 1.0)]]);
        assert_eq!(detect_blow_up(&pole, 3, &opts()).unwrap().unwrap().period, 1);
        let good = fam(&[&[(1, 1.0)], &[], &[(0, 1.0)]]);
        assert!(detect_blow_up(&good, 3, &opts()).unwrap().is_none());
        let cubic = fam(&[&[], &[(-1, 1.0)], &[], &[(0, 1.0)]]);
        let b = detect_blow_up(&cubic, 2, &opts()).unwrap().unwrap();
        assert_eq!(b.period, 1);
        assert_eq!(b.cycle.multiplier_valuation, Valuation::Finite(RatExp::int(-1)));
    }

    #[test]
    fn period2_certificates() {
        let pole = fam(&[&[(-1, 1.0)], &[], &[(0, 1.0)]]);
        let c = check_period2(&pole, &opts()).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
        match c.witness {
            Some(Witness::Cycle(w)) => assert_eq!(w.multiplier_valuation, Valuation::Finite(RatExp::new(-1, 2))),
            other => panic!("{other:?}"),
        }
        let good = fam(&[&[(1, 1.0)], &[], &[], &[], &[(0, 1.0)]]);
        let c = check_period2(&good, &opts()).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
        assert!(matches!(c.witness, Some(Witness::TypeII(_))));
    }

    #[test]
    fn main5_fraction_for_pole_family() {
        let pole = fam(&[&[(-1, 1.0)], &[], &[(0, 1.0)]]);
        let r = check_main5_fraction(&pole, 2, RatExp::zero(), 2, &opts()).unwrap();
        assert_eq!(r.lambda, RatExp::new(1, 2));
        assert_eq!((r.qualifying, r.total), (4, 5));
        let good = fam(&[&[(1, 1.0)], &[], &[(0, 1.0)]]);
        assert!(matches!(check_main5_fraction(&good, 2, RatExp::zero(), 2, &opts()), Err(Error::Precondition(_))));
    }

    #[test]
    fn cubic_rational_families() {
        let num = poly(&[&[(-1, 1.0)], &[], &[], &[(0, 1.0)]]);
        let den = poly(&[&[], &[(0, 1.0)]]);
        let f = RationalMapFamily::new(num, den).unwrap();
        let c = check_period3(&f, &opts()).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
        assert!(matches!(c.witness, Some(Witness::Cycle(_))));
        assert!(detect_blow_up(&f, 3, &opts()).unwrap().is_some());

        let num = poly(&[&[(1, 1.0)], &[], &[], &[(0, 1.0)]]);
        let den = poly(&[&[(0, 1.0)], &[], &[], &[(1, 1.0)]]);
        let g = RationalMapFamily::new(num, den).unwrap();
        let c = check_period3(&g, &opts()).unwrap();
        assert_eq!(c.verdict, Verdict::Verified);
        assert!(matches!(c.witness, Some(Witness::TypeII(_))));
    }

    #[test]
    fn milnor_examples() {
        let sq = fam(&[&[], &[], &[(0, 1.0)]]);
        let r = milnor_quadratic_check(&sq, &opts()).unwrap();
        assert!(r.relation_holds);
        assert!((r.sigma[0].constant_term() - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        let pole = fam(&[&[(-1, 1.0)], &[], &[(0, 1.0)]]);
        let r = milnor_quadratic_check(&pole, &opts()).unwrap();
        assert!(r.relation_holds);
        assert!(r.degenerate);
    }
}
