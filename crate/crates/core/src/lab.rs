//! Floating-point sampling of `f_t` at small nonzero `t`: periodic points,
//! multipliers, slopes of `log⁺|μ|` against `log|t|⁻¹`, and cross-checks
//! against the series computations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{periodic_points, point_multiplier_valuations, Chart, PeriodicOptions, RationalMapFamily};
use crate::error::{Error, Result};
use crate::puiseux::RatExp;
use crate::roots::{self, AberthOptions};

/// Largest numeric degree `d^n + 1` handed to the root finder.
pub const LAB_DEGREE_BUDGET: usize = 1025;
/// Largest ratio between consecutive radii while following roots.
const CONTINUATION_STEP: f64 = 1.2;
/// Smallest relative radius step before continuation gives up.
const MIN_STEP: f64 = 1e-9;
/// Gaps below this are treated as repeated roots when sizing the
/// rejection radius.
const REPEATED_GAP: f64 = 1e-9;
/// Relative root-finder tolerance added to every truncation bound.
const ROOT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct SampleGrid {
    pub radii: Vec<f64>,
    pub angles_per_radius: usize,
    pub seed: u64,
}

impl SampleGrid {
    pub fn new(radii: Vec<f64>, angles_per_radius: usize, seed: u64) -> Result<Self> {
        if radii.is_empty() || angles_per_radius == 0 {
            return Err(Error::Precondition("grid needs at least one radius and one angle".into()));
        }
        if radii.iter().any(|r| !(*r > 0.0 && *r <= 0.5)) {
            return Err(Error::Precondition("radii must lie in (0, 1/2]".into()));
        }
        if radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Precondition("radii must be strictly decreasing".into()));
        }
        Ok(SampleGrid {
            radii,
            angles_per_radius,
            seed,
        })
    }

    /// Radii from `hi` down to `lo`, `per_decade` to a factor of ten.
    pub fn log_spaced(hi: f64, lo: f64, per_decade: usize, angles_per_radius: usize, seed: u64) -> Result<Self> {
        if !(lo > 0.0 && lo < hi) || per_decade == 0 {
            return Err(Error::Precondition("need 0 < lo < hi and a positive density".into()));
        }
        let steps = ((hi / lo).log10() * per_decade as f64).round().max(1.0) as usize;
        let radii = (0..=steps)
            .map(|k| hi * (lo / hi).powf(k as f64 / steps as f64))
            .collect();
        Self::new(radii, angles_per_radius, seed)
    }

    /// Seeded angles, evenly spaced after a random rotation.
    pub fn angles(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let shift: f64 = rng.gen_range(0.0..1.0);
        let a = self.angles_per_radius as f64;
        (0..self.angles_per_radius)
            .map(|j| std::f64::consts::TAU * (j as f64 + shift) / a)
            .collect()
    }

    /// All sample parameters in grid order (radius major).
    pub fn points(&self) -> Vec<Complex64> {
        let angles = self.angles();
        self.radii
            .iter()
            .flat_map(|r| angles.iter().map(move |a| Complex64::from_polar(*r, *a)))
            .collect()
    }

    pub fn decades(&self) -> f64 {
        (self.radii[0] / self.radii[self.radii.len() - 1]).log10()
    }
}

/// A point of the projective line: `None` is infinity.
pub type NumPoint = Option<Complex64>;

#[derive(Clone, Debug, Serialize)]
pub struct MultiplierSample {
    pub t0: Complex64,
    pub period: usize,
    pub points: Vec<NumPoint>,
    /// Multiplier of `f^n` at each point, in the order of `points`.
    pub multipliers: Vec<Complex64>,
    /// Max and median of `|μ|^{1/n}`.
    pub max_root: f64,
    pub median_root: f64,
}

fn cmul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn cadd_scaled(acc: &mut Vec<Complex64>, c: Complex64, p: &[Complex64]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), Complex64::new(0.0, 0.0));
    }
    for (a, x) in acc.iter_mut().zip(p) {
        *a += c * x;
    }
}

fn pad(mut c: Vec<Complex64>, len: usize) -> Vec<Complex64> {
    c.resize(len.max(c.len()), Complex64::new(0.0, 0.0));
    c
}

/// Numeric map at a fixed parameter, in the two charts of the projective
/// line: `z` when `|z| <= 1`, `w = 1/z` otherwise.
#[derive(Clone, Debug)]
pub struct NumericMap {
    p: Vec<Complex64>,
    q: Vec<Complex64>,
    degree: usize,
}

impl NumericMap {
    pub fn at(f: &RationalMapFamily, t0: Complex64) -> Self {
        let (p, q) = f.eval_t(t0);
        let d = f.degree();
        NumericMap {
            p: pad(p, d + 1),
            q: pad(q, d + 1),
            degree: d,
        }
    }

    /// `(P_n, Q_n)` composed homogeneously, padded to degree `d^n`.
    pub fn iterate(&self, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        let (mut pn, mut qn) = (self.p.clone(), self.q.clone());
        for _ in 1..n {
            let mut ppow = vec![vec![Complex64::new(1.0, 0.0)]];
            let mut qpow = vec![vec![Complex64::new(1.0, 0.0)]];
            for k in 1..=self.degree {
                ppow.push(cmul(&ppow[k - 1], &pn));
                qpow.push(cmul(&qpow[k - 1], &qn));
            }
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for k in 0..=self.degree {
                let term = cmul(&ppow[k], &qpow[self.degree - k]);
                cadd_scaled(&mut a, self.p[k], &term);
                cadd_scaled(&mut b, self.q[k], &term);
            }
            pn = a;
            qn = b;
        }
        (pn, qn)
    }

    /// Roots of `P_n - z Q_n` on the projective line, `d^n + 1` of them.
    pub fn periodic_points(&self, n: usize, aberth: &AberthOptions) -> Result<Vec<NumPoint>> {
        self.periodic_points_near(n, &[], aberth)
    }

    /// As `periodic_points`, starting the iteration from `guesses` when they
    /// hold exactly one finite point per finite root.
    pub fn periodic_points_near(&self, n: usize, guesses: &[NumPoint], aberth: &AberthOptions) -> Result<Vec<NumPoint>> {
        let big_d = self.degree.pow(n as u32) + 1;
        if big_d > LAB_DEGREE_BUDGET {
            return Err(Error::SizeBudgetExceeded(format!(
                "numeric degree {big_d} exceeds the budget {LAB_DEGREE_BUDGET}"
            )));
        }
        let (pn, qn) = self.iterate(n);
        let mut fe = pad(pn, big_d + 1);
        for (k, c) in qn.iter().enumerate() {
            fe[k + 1] -= c;
        }
        let fe = roots::trim(&fe);
        let warm: Vec<Complex64> = guesses.iter().flatten().copied().collect();
        let init = if !warm.is_empty() && warm.len() + 1 == fe.len() {
            warm
        } else {
            let zeros = fe.iter().take_while(|a| a.norm() == 0.0).count();
            match roots::aberth(fe, aberth) {
                Ok(r) => r,
                Err(_) => {
                    let mut g = vec![Complex64::new(0.0, 0.0); zeros];
                    g.extend(roots::initial_guesses(&fe[zeros..], 0.7));
                    g
                }
            }
        };
        let finite = roots::aberth_refine(|z| self.fixed_eval(z, n), init, aberth)?;
        let mut pts: Vec<NumPoint> = finite.into_iter().map(Some).collect();
        pts.resize(big_d, None);
        Ok(pts)
    }

    /// `P_n(z) - z Q_n(z)`, its derivative and its absolute scale, evaluated
    /// through the homogeneous recursion instead of expanded coefficients.
    fn fixed_eval(&self, z: Complex64, n: usize) -> (Complex64, Complex64, f64) {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let (mut x, mut y, mut dx, mut dy) = (z, one, one, zero);
        let (mut ax, mut ay) = (z.norm(), 1.0);
        let d = self.degree;
        for _ in 0..n {
            let mut xp = vec![one; d + 1];
            let mut yp = vec![one; d + 1];
            let mut axp = vec![1.0; d + 1];
            let mut ayp = vec![1.0; d + 1];
            for k in 1..=d {
                xp[k] = xp[k - 1] * x;
                yp[k] = yp[k - 1] * y;
                axp[k] = axp[k - 1] * ax;
                ayp[k] = ayp[k - 1] * ay;
            }
            let (mut nx, mut ny, mut ndx, mut ndy, mut nax, mut nay) = (zero, zero, zero, zero, 0.0, 0.0);
            for j in 0..=d {
                let term = xp[j] * yp[d - j];
                let mut dterm = zero;
                if j > 0 {
                    dterm += xp[j - 1] * yp[d - j] * dx * j as f64;
                }
                if j < d {
                    dterm += xp[j] * yp[d - j - 1] * dy * (d - j) as f64;
                }
                let aterm = axp[j] * ayp[d - j];
                nx += self.p[j] * term;
                ny += self.q[j] * term;
                ndx += self.p[j] * dterm;
                ndy += self.q[j] * dterm;
                nax += self.p[j].norm() * aterm;
                nay += self.q[j].norm() * aterm;
            }
            (x, y, dx, dy, ax, ay) = (nx, ny, ndx, ndy, nax, nay);
        }
        (x - z * y, dx - y - z * dy, ax + z.norm() * ay)
    }

    /// Value and derivative of a coefficient vector in the chart of `x`.
    fn chart_pair(&self, x: NumPoint) -> (Chart, Complex64, Complex64, Complex64, Complex64) {
        match x {
            Some(z) if z.norm() <= 1.0 => {
                let (a, da) = roots::horner2(&self.p, z);
                let (b, db) = roots::horner2(&self.q, z);
                (Chart::Affine, a, da, b, db)
            }
            _ => {
                let w = x.map_or(Complex64::new(0.0, 0.0), |z| z.inv());
                let pr: Vec<Complex64> = self.p.iter().rev().cloned().collect();
                let qr: Vec<Complex64> = self.q.iter().rev().cloned().collect();
                let (a, da) = roots::horner2(&pr, w);
                let (b, db) = roots::horner2(&qr, w);
                (Chart::Flipped, a, da, b, db)
            }
        }
    }

    /// Image of `x` and the derivative between the charts of `x` and its
    /// image.
    pub fn step(&self, x: NumPoint) -> (NumPoint, Complex64) {
        let (_, a, da, b, db) = self.chart_pair(x);
        if a.norm() <= b.norm() {
            let v = a / b;
            (Some(v), (da * b - a * db) / (b * b))
        } else {
            let w = b / a;
            let img = if w.norm() == 0.0 { None } else { Some(w.inv()) };
            (img, (db * a - b * da) / (a * a))
        }
    }

    /// Multiplier of `f^n` at `x`, by the chain rule along the orbit.
    pub fn multiplier(&self, x: NumPoint, n: usize) -> Complex64 {
        let mut mu = Complex64::new(1.0, 0.0);
        let mut y = x;
        for _ in 0..n {
            let (next, d) = self.step(y);
            mu *= d;
            y = next;
        }
        mu
    }
}

fn root_stats(mult: &[Complex64], n: usize) -> (f64, f64) {
    let mut r: Vec<f64> = mult.iter().map(|m| m.norm().powf(1.0 / n as f64)).collect();
    r.sort_by(|a, b| a.total_cmp(b));
    let max = r.last().copied().unwrap_or(0.0);
    let median = if r.is_empty() {
        0.0
    } else if r.len() % 2 == 1 {
        r[r.len() / 2]
    } else {
        0.5 * (r[r.len() / 2 - 1] + r[r.len() / 2])
    };
    (max, median)
}

pub fn sample_periodic(f: &RationalMapFamily, n: usize, t0: Complex64) -> Result<MultiplierSample> {
    sample_periodic_with(f, n, t0, &AberthOptions::default())
}

pub fn sample_periodic_with(
    f: &RationalMapFamily,
    n: usize,
    t0: Complex64,
    aberth: &AberthOptions,
) -> Result<MultiplierSample> {
    sample_near(f, n, t0, &[], aberth)
}

fn sample_near(
    f: &RationalMapFamily,
    n: usize,
    t0: Complex64,
    guesses: &[NumPoint],
    aberth: &AberthOptions,
) -> Result<MultiplierSample> {
    if t0.norm() == 0.0 {
        return Err(Error::Precondition("sampling needs t0 != 0".into()));
    }
    if n == 0 {
        return Err(Error::Precondition("period must be positive".into()));
    }
    let map = NumericMap::at(f, t0);
    let points = map.periodic_points_near(n, guesses, aberth)?;
    let multipliers: Vec<Complex64> = points.iter().map(|x| map.multiplier(*x, n)).collect();
    let (max_root, median_root) = root_stats(&multipliers, n);
    Ok(MultiplierSample {
        t0,
        period: n,
        points,
        multipliers,
        max_root,
        median_root,
    })
}

/// Samples at every grid parameter, in grid order.
pub fn sample_grid(f: &RationalMapFamily, n: usize, grid: &SampleGrid) -> Result<Vec<MultiplierSample>> {
    let aberth = AberthOptions {
        seed: grid.seed,
        ..Default::default()
    };
    grid.points()
        .par_iter()
        .map(|t0| sample_periodic_with(f, n, *t0, &aberth))
        .collect()
}

/// Largest `|μ|^{1/n}` over the grid and periods `1..=n_max`.
pub fn max_root_over_grid(f: &RationalMapFamily, n_max: usize, grid: &SampleGrid) -> Result<f64> {
    let mut best: f64 = 0.0;
    for n in 1..=n_max {
        for s in sample_grid(f, n, grid)? {
            best = best.max(s.max_root);
        }
    }
    Ok(best)
}

/// Chordal distance on the projective line.
pub fn chordal(a: NumPoint, b: NumPoint) -> f64 {
    match (a, b) {
        (None, None) => 0.0,
        (Some(z), None) | (None, Some(z)) => 1.0 / (1.0 + z.norm_sqr()).sqrt(),
        (Some(x), Some(y)) => (x - y).norm() / ((1.0 + x.norm_sqr()) * (1.0 + y.norm_sqr())).sqrt(),
    }
}

/// Half the smallest chordal gap between distinct points.
fn rejection_radius(pts: &[NumPoint]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let g = chordal(pts[i], pts[j]);
            if g > REPEATED_GAP {
                gap = gap.min(g);
            }
        }
    }
    if gap.is_finite() {
        0.5 * gap
    } else {
        1.0
    }
}

/// One-to-one nearest matching of `to` onto `from`, greedily by distance.
/// Returns `perm` with `to[perm[i]]` following `from[i]`, and the largest
/// matched distance.
fn match_points(from: &[NumPoint], to: &[NumPoint]) -> (Vec<usize>, f64) {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(from.len() * to.len());
    for (i, a) in from.iter().enumerate() {
        for (j, b) in to.iter().enumerate() {
            pairs.push((chordal(*a, *b), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut perm = vec![usize::MAX; from.len()];
    let mut used = vec![false; to.len()];
    let mut worst: f64 = 0.0;
    for (dist, i, j) in pairs {
        if perm[i] == usize::MAX && !used[j] {
            perm[i] = j;
            used[j] = true;
            worst = worst.max(dist);
        }
    }
    (perm, worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRow {
    pub t_re: f64,
    pub t_im: f64,
    pub period: usize,
    pub cycle_id: usize,
    pub root_modulus: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrackFit {
    pub angle_index: usize,
    pub track: usize,
    /// Numeric point at the smallest radius.
    pub endpoint: NumPoint,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// `max(0, -val μ)/n` of the nearest series point, when it could be
    /// computed.
    pub predicted: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingFit {
    pub period: usize,
    pub tracks: Vec<TrackFit>,
    pub rows: Vec<SampleRow>,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (slope, intercept, (rss / m).sqrt())
}

/// Follows every period-`n` point along one ray of the grid; returns the
/// points at each grid radius, in track order. The radius ratio per step
/// shrinks whenever a root moves further than the rejection radius.
fn follow_ray(
    f: &RationalMapFamily,
    n: usize,
    angle: f64,
    radii: &[f64],
    aberth: &AberthOptions,
) -> Result<Vec<MultiplierSample>> {
    let t_at = |r: f64| Complex64::from_polar(r, angle);
    let mut current = sample_periodic_with(f, n, t_at(radii[0]), aberth)?;
    let mut out = vec![current.clone()];
    let mut r = radii[0];
    let mut ratio = CONTINUATION_STEP;
    for &target in &radii[1..] {
        while r > target {
            let next_r = (r / ratio).max(target);
            let next = sample_near(f, n, t_at(next_r), &current.points, aberth)?;
            let limit = rejection_radius(&current.points);
            let (perm, worst) = match_points(&current.points, &next.points);
            if worst > limit {
                ratio = ratio.sqrt();
                if ratio - 1.0 < MIN_STEP {
                    return Err(Error::ContinuationLost(format!(
                        "at |t| = {next_r:.3e}: nearest root moved {worst:.3e}, rejection radius {limit:.3e}"
                    )));
                }
                continue;
            }
            current = MultiplierSample {
                points: perm.iter().map(|j| next.points[*j]).collect(),
                multipliers: perm.iter().map(|j| next.multipliers[*j]).collect(),
                ..next
            };
            r = next_r;
            ratio = (ratio * ratio).min(CONTINUATION_STEP);
        }
        out.push(current.clone());
    }
    Ok(out)
}

/// Blow-up exponents of the series periodic points, paired with their value
/// at `t0` in the affine coordinate.
fn predicted_exponents(
    f: &RationalMapFamily,
    n: usize,
    t0: Complex64,
    opts: &PeriodicOptions,
) -> Result<Vec<(NumPoint, f64)>> {
    let vals = point_multiplier_valuations(f, n, opts)?;
    Ok(vals
        .into_iter()
        .map(|(p, v)| {
            let (x, _) = p.coord.eval_complex(t0, 0);
            let z = match p.chart {
                Chart::Affine => Some(x),
                Chart::Flipped if x.norm() == 0.0 => None,
                Chart::Flipped => Some(x.inv()),
            };
            (z, (-v).max(RatExp::zero()).to_f64() / n as f64)
        })
        .collect())
}

/// Linear fit of `(1/n) log⁺|μ(t)|` against `log|t|⁻¹` along each ray of the
/// grid, one fit per numeric track. Each track is labelled with the blow-up
/// exponent of the nearest series periodic point at the smallest radius.
pub fn scaling_fit(f: &RationalMapFamily, n: usize, grid: &SampleGrid, opts: &PeriodicOptions) -> Result<ScalingFit> {
    if grid.decades() < 2.0 - 1e-9 {
        return Err(Error::Precondition("scaling fit needs radii spanning at least two decades".into()));
    }
    let aberth = AberthOptions {
        seed: grid.seed,
        ..Default::default()
    };
    let angles = grid.angles();
    let rays: Vec<Vec<MultiplierSample>> = angles
        .par_iter()
        .map(|a| follow_ray(f, n, *a, &grid.radii, &aberth))
        .collect::<Result<_>>()?;
    let x: Vec<f64> = grid.radii.iter().map(|r| -r.ln()).collect();
    let mut tracks = Vec::new();
    let mut rows = Vec::new();
    for (ai, ray) in rays.iter().enumerate() {
        let last = ray.last().unwrap();
        let predicted = predicted_exponents(f, n, last.t0, opts).ok();
        for k in 0..last.points.len() {
            let y: Vec<f64> = ray
                .iter()
                .map(|s| s.multipliers[k].norm().ln().max(0.0) / n as f64)
                .collect();
            let (slope, intercept, residual) = least_squares(&x, &y);
            let guess = predicted.as_ref().and_then(|pred| {
                pred.iter()
                    .min_by(|a, b| chordal(a.0, last.points[k]).total_cmp(&chordal(b.0, last.points[k])))
                    .map(|p| p.1)
            });
            tracks.push(TrackFit {
                angle_index: ai,
                track: k,
                endpoint: last.points[k],
                slope,
                intercept,
                residual,
                predicted: guess,
            });
            for s in ray {
                rows.push(SampleRow {
                    t_re: s.t0.re,
                    t_im: s.t0.im,
                    period: n,
                    cycle_id: k,
                    root_modulus: s.multipliers[k].norm().powf(1.0 / n as f64),
                });
            }
        }
    }
    Ok(ScalingFit { period: n, tracks, rows })
}

/// Fraction of period-`n` points, with multiplicity and normalized by `d^n`,
/// where `max(1, |μ|)^{1/n} >= C |t0|^{-λ}`; capped at 1.
pub fn fraction_exceeding(f: &RationalMapFamily, n: usize, t0: Complex64, c: f64, lambda: f64) -> Result<f64> {
    let s = sample_periodic(f, n, t0)?;
    let threshold = c * t0.norm().powf(-lambda);
    let hits = s
        .multipliers
        .iter()
        .filter(|m| m.norm().max(1.0).powf(1.0 / n as f64) >= threshold)
        .count();
    Ok((hits as f64 / f.degree().pow(n as u32) as f64).min(1.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapComplex {
    pub t0: Complex64,
    pub period: usize,
    /// `d^{-n} Σ (1/n) log⁺|μ|` over the period-`n` points.
    pub value: f64,
    /// `value / log|t0|⁻¹`.
    pub ratio: f64,
}

pub fn lyap_complex(f: &RationalMapFamily, t0: Complex64, n: usize) -> Result<LyapComplex> {
    let s = sample_periodic(f, n, t0)?;
    let sum: f64 = s.multipliers.iter().map(|m| m.norm().ln().max(0.0) / n as f64).sum();
    let value = sum / f.degree().pow(n as u32) as f64;
    Ok(LyapComplex {
        t0,
        period: n,
        value,
        ratio: value / -t0.norm().ln(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub t0: Complex64,
    pub period: usize,
    pub matched: usize,
    pub max_mismatch: f64,
    /// Largest ratio of mismatch to its truncation bound.
    pub worst_ratio: f64,
}

/// Truncation bound of a series evaluated at `t0`: twice the largest
/// coefficient times `|t0|^order`, plus root-finder noise.
fn truncation_bound(s: &crate::puiseux::PuiseuxSeries, t0: Complex64, value: Complex64) -> f64 {
    let (_, tail) = s.eval_complex(t0, 0);
    2.0 * s.max_abs_coeff().max(1.0) * tail + ROOT_TOL * value.norm().max(1.0)
}

/// Evaluates the series periodic points at `t0` and matches each to a
/// distinct numeric root, in the chart of the series point.
pub fn consistency_check(
    f: &RationalMapFamily,
    n: usize,
    t0: Complex64,
    opts: &PeriodicOptions,
) -> Result<ConsistencyReport> {
    let series = periodic_points(f, n, opts)?;
    let numeric = sample_periodic(f, n, t0)?.points;
    let mut used = vec![false; numeric.len()];
    let (mut matched, mut max_mismatch, mut worst_ratio) = (0, 0.0_f64, 0.0_f64);
    for p in &series {
        let (x, _) = p.coord.eval_complex(t0, 0);
        let bound = truncation_bound(&p.coord, t0, x);
        let in_chart = |z: NumPoint| -> Complex64 {
            match (p.chart, z) {
                (Chart::Affine, Some(z)) => z,
                (Chart::Affine, None) => Complex64::new(f64::INFINITY, 0.0),
                (Chart::Flipped, Some(z)) => z.inv(),
                (Chart::Flipped, None) => Complex64::new(0.0, 0.0),
            }
        };
        for _ in 0..p.multiplicity {
            let best = (0..numeric.len())
                .filter(|j| !used[*j])
                .map(|j| (j, (in_chart(numeric[j]) - x).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let Some((j, dist)) = best else {
                return Err(Error::NoMatch("more series points than numeric roots".into()));
            };
            if !(dist <= bound) {
                return Err(Error::NoMatch(format!(
                    "series point {x} at t0 = {t0} is {dist:.3e} from the nearest root, bound {bound:.3e}"
                )));
            }
            used[j] = true;
            matched += 1;
            max_mismatch = max_mismatch.max(dist);
            worst_ratio = worst_ratio.max(dist / bound);
        }
    }
    Ok(ConsistencyReport {
        t0,
        period: n,
        matched,
        max_mismatch,
        worst_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use crate::puiseux::PuiseuxSeries;

    fn laurent(terms: &[(i64, f64)]) -> PuiseuxSeries {
        PuiseuxSeries::from_terms(terms.iter().map(|(e, x)| (RatExp::int(*e), Complex64::new(*x, 0.0))), None)
    }

    fn fam(cs: &[&[(i64, f64)]]) -> RationalMapFamily {
        RationalMapFamily::polynomial(Poly::new(cs.iter().map(|t| laurent(t)).collect())).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn quadratic_pole_multipliers() {
        let f = fam(&[&[(-1, 1.0)], &[], &[(0, 1.0)]]);
        let t0 = c(1e-4);
        let s = sample_periodic(&f, 1, t0).unwrap();
        // closed form: fixed points (1 ± sqrt(1 - 4/t0))/2, multiplier 2z
        let disc = (c(1.0) - 4.0 / t0).sqrt();
        let mut oracle = [c(1.0) + disc, c(1.0) - disc];
        let mut got: Vec<Complex64> = s.multipliers.iter().filter(|m| m.norm() > 1.0).cloned().collect();
        assert_eq!(got.len(), 2);
        got.sort_by(|a, b| a.im.total_cmp(&b.im));
        oracle.sort_by(|a, b| a.im.total_cmp(&b.im));
        for (g, o) in got.iter().zip(&oracle) {
            assert!((g - o).norm() < 1e-8 * o.norm());
        }
        assert!((got[0].norm() - 200.0).abs() < 1.0);
        assert!(s.multipliers.iter().any(|m| m.norm() == 0.0));
    }

    #[test]
    fn constant_family() {
        let f = fam(&[&[], &[], &[(0, 1.0)]]);
        let s = sample_periodic(&f, 1, c(0.1)).unwrap();
        let mut m: Vec<f64> = s.multipliers.iter().map(|m| m.re).collect();
        m.sort_by(|a, b| a.total_cmp(b));
        assert!(m[0].abs() < 1e-12 && m[1].abs() < 1e-12 && (m[2] - 2.0).abs() < 1e-12);
        assert_eq!(sample_periodic(&f, 3, c(0.1)).unwrap().points.len(), 9);
    }

    #[test]
    fn grids() {
        assert!(SampleGrid::new(vec![0.6], 1, 0).is_err());
        assert!(SampleGrid::new(vec![1e-3, 1e-2], 1, 0).is_err());
        let g = SampleGrid::log_spaced(1e-2, 1e-6, 2, 3, 7).unwrap();
        assert_eq!(g.radii.len(), 9);
        assert_eq!(g.points().len(), 27);
        assert_eq!(g.angles(), SampleGrid::log_spaced(1e-2, 1e-6, 2, 3, 7).unwrap().angles());
    }

    #[test]
    fn slopes() {
        let g = SampleGrid::log_spaced(1e-2, 1e-6, 2, 2, 1).unwrap();
        let opts = PeriodicOptions::default();
        let f = fam(&[&[(-1, 1.0)], &[], &[(0, 1.0)]]);
        let fit = scaling_fit(&f, 1, &g, &opts).unwrap();
        let blown: Vec<&TrackFit> = fit.tracks.iter().filter(|t| t.predicted.unwrap() > 0.0).collect();
        assert_eq!(blown.len(), 4);
        for t in blown {
            assert!((t.slope - 0.5).abs() < 0.05, "{t:?}");
        }
        let g3 = fam(&[&[], &[(-1, 1.0)], &[], &[(0, 1.0)]]);
        let fit = scaling_fit(&g3, 1, &g, &opts).unwrap();
        let at_zero = fit.tracks.iter().find(|t| t.endpoint.unwrap().norm() < 1e-6).unwrap();
        assert!((at_zero.slope - 1.0).abs() < 0.02);
        let good = fam(&[&[(1, 1.0)], &[], &[(0, 1.0)]]);
        let fit = scaling_fit(&good, 2, &g, &opts).unwrap();
        assert!(fit.tracks.iter().all(|t| t.slope.abs() < 0.05));
    }

    #[test]
    fn fractions_and_lyap() {
        let f = fam(&[&[(-1, 1.0)], &[], &[(0, 1.0)]]);
        assert!(fraction_exceeding(&f, 2, c(1e-4), 0.5, 0.25).unwrap() >= 0.75);
        assert_eq!(fraction_exceeding(&f, 2, c(1e-4), 1e-3, 0.25).unwrap(), 1.0);
        let l = lyap_complex(&f, c(1e-6), 4).unwrap();
        assert!((l.ratio - 0.5).abs() < 0.1, "{l:?}");
        assert!(l.value >= 0.5 * 2f64.ln() - 0.05);
        let good = fam(&[&[(1, 1.0)], &[], &[(0, 1.0)]]);
        assert!(lyap_complex(&good, c(1e-6), 2).unwrap().ratio.abs() < 0.1);
    }

    #[test]
    fn consistency() {
        let opts = PeriodicOptions::default();
        let f = fam(&[&[(-1, 1.0)], &[], &[(0, 1.0)]]);
        let r = consistency_check(&f, 1, c(1e-6), &opts).unwrap();
        assert_eq!(r.matched, 3);
        assert!(r.max_mismatch < 1e-6);
        let coarse = PeriodicOptions {
            precision: RatExp::int(1),
            ..opts
        };
        let g = fam(&[&[(1, 20.0)], &[], &[(0, 1.0)]]);
        assert!(matches!(consistency_check(&g, 1, c(0.3), &coarse), Err(Error::NoMatch(_))));
    }
}
