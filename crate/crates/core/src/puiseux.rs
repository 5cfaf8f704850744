//! Truncated Puiseux series over the complex numbers.
//!
//! Exponents are exact rationals; coefficients are `f64` complex numbers with
//! a zero tolerance. Every series stores its own truncation order: terms with
//! exponent below the order are meaningful, everything at or above it is
//! unknown. An exact series (a Laurent polynomial in `t^(1/q)`) has no order.
//!
//! Internally the exponents are stored as integer numerators over a common
//! denominator `q`, the ramification of the series.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Coefficients with modulus at or below this are treated as zero.
pub const ZERO_TOL: f64 = 1e-12;
/// Relative working order (in units of the t-exponent) for inverses of
/// exact series.
pub const DEFAULT_ORDER: i64 = 20;
/// Largest admissible ramification `q`.
pub const RAMIFICATION_CAP: i64 = 64;

/// An exact rational exponent `p/q` in lowest terms, `q >= 1`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct RatExp(Rational64);

impl RatExp {
    pub fn new(numerator: i64, denominator: i64) -> Self {
        assert!(denominator != 0, "zero denominator in exponent");
        RatExp(Rational64::new(numerator, denominator))
    }

    pub fn int(n: i64) -> Self {
        RatExp(Rational64::from_integer(n))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.denom() == 1
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn floor(&self) -> i64 {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> i64 {
        self.0.ceil().to_integer()
    }

    pub fn abs(&self) -> Self {
        RatExp(num_traits_abs(self.0))
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }
}

fn num_traits_abs(r: Rational64) -> Rational64 {
    if r < Rational64::from_integer(0) {
        -r
    } else {
        r
    }
}

impl From<i64> for RatExp {
    fn from(n: i64) -> Self {
        RatExp::int(n)
    }
}

impl Add for RatExp {
    type Output = RatExp;
    fn add(self, rhs: RatExp) -> RatExp {
        RatExp(self.0 + rhs.0)
    }
}

impl Sub for RatExp {
    type Output = RatExp;
    fn sub(self, rhs: RatExp) -> RatExp {
        RatExp(self.0 - rhs.0)
    }
}

impl Neg for RatExp {
    type Output = RatExp;
    fn neg(self) -> RatExp {
        RatExp(-self.0)
    }
}

impl Mul for RatExp {
    type Output = RatExp;
    fn mul(self, rhs: RatExp) -> RatExp {
        RatExp(self.0 * rhs.0)
    }
}

impl Mul<i64> for RatExp {
    type Output = RatExp;
    fn mul(self, rhs: i64) -> RatExp {
        RatExp(self.0 * rhs)
    }
}

impl Div<i64> for RatExp {
    type Output = RatExp;
    fn div(self, rhs: i64) -> RatExp {
        RatExp(self.0 / rhs)
    }
}

impl Div for RatExp {
    type Output = RatExp;
    fn div(self, rhs: RatExp) -> RatExp {
        RatExp(self.0 / rhs.0)
    }
}

impl fmt::Display for RatExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl Serialize for RatExp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// t-adic valuation; `Infinite` stands for a series that is zero up to its
/// truncation order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Valuation {
    Finite(RatExp),
    Infinite,
}

impl Valuation {
    pub fn finite(&self) -> Option<RatExp> {
        match self {
            Valuation::Finite(v) => Some(*v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// The t-adic norm `e^{-v}`.
    pub fn norm(&self) -> f64 {
        match self {
            Valuation::Finite(v) => (-v.to_f64()).exp(),
            Valuation::Infinite => 0.0,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxSeries {
    den: i64,
    terms: Vec<(i64, Complex64)>,
    order: Option<i64>,
}

fn negligible(c: Complex64, absum: f64) -> bool {
    c.norm() <= ZERO_TOL * absum.max(1.0)
}

fn lcm(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

fn scale_to(num: i64, from: i64, to: i64) -> i64 {
    num * (to / from)
}

/// Converts an exponent into a numerator over `den`; `den` must be a
/// multiple of the exponent's denominator.
fn exp_num(e: RatExp, den: i64) -> i64 {
    e.numer() * (den / e.denom())
}

impl PuiseuxSeries {
    /// The exact zero series.
    pub fn zero() -> Self {
        PuiseuxSeries {
            den: 1,
            terms: Vec::new(),
            order: None,
        }
    }

    /// `O(t^order)`.
    pub fn zero_to(order: RatExp) -> Self {
        PuiseuxSeries {
            den: order.denom(),
            terms: Vec::new(),
            order: Some(order.numer()),
        }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(c, RatExp::zero())
    }

    pub fn real(x: f64) -> Self {
        Self::constant(Complex64::new(x, 0.0))
    }

    pub fn monomial(c: Complex64, e: RatExp) -> Self {
        Self::from_terms([(e, c)], None)
    }

    /// `t^e`.
    pub fn t_pow(e: RatExp) -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), e)
    }

    /// Builds a series from arbitrary (exponent, coefficient) pairs; equal
    /// exponents are summed and negligible coefficients dropped.
    pub fn from_terms<I>(terms: I, order: Option<RatExp>) -> Self
    where
        I: IntoIterator<Item = (RatExp, Complex64)>,
    {
        let terms: Vec<(RatExp, Complex64)> = terms.into_iter().collect();
        let mut den = order.map_or(1, |o| o.denom());
        for (e, _) in &terms {
            den = lcm(den, e.denom());
        }
        let raw = terms.iter().map(|(e, c)| (exp_num(*e, den), *c)).collect();
        Self::build(den, raw, order.map(|o| exp_num(o, den)))
    }

    fn build(den: i64, mut raw: Vec<(i64, Complex64)>, order: Option<i64>) -> Self {
        raw.sort_by_key(|(e, _)| *e);
        let mut terms: Vec<(i64, Complex64)> = Vec::with_capacity(raw.len());
        let mut absums: Vec<f64> = Vec::with_capacity(raw.len());
        for (e, c) in raw {
            if order.is_some_and(|o| e >= o) {
                continue;
            }
            match terms.last_mut() {
                Some((le, lc)) if *le == e => {
                    *lc += c;
                    *absums.last_mut().unwrap() += c.norm();
                }
                _ => {
                    terms.push((e, c));
                    absums.push(c.norm());
                }
            }
        }
        let terms = terms
            .into_iter()
            .zip(absums)
            .filter(|((_, c), a)| !negligible(*c, *a))
            .map(|(t, _)| t)
            .collect();
        let mut s = PuiseuxSeries { den, terms, order };
        s.reduce_den();
        s
    }

    fn reduce_den(&mut self) {
        // a real or imaginary part far below the modulus is rounding residue
        for (_, c) in &mut self.terms {
            let m = c.norm();
            if c.re.abs() <= ZERO_TOL * m {
                c.re = 0.0;
            }
            if c.im.abs() <= ZERO_TOL * m {
                c.im = 0.0;
            }
        }
        let mut g = self.den;
        for (e, _) in &self.terms {
            g = g.gcd(e);
        }
        if let Some(o) = self.order {
            g = g.gcd(&o);
        }
        if g > 1 {
            self.den /= g;
            for (e, _) in &mut self.terms {
                *e /= g;
            }
            if let Some(o) = &mut self.order {
                *o /= g;
            }
        }
    }

    fn rescaled(&self, den: i64) -> (Vec<(i64, Complex64)>, Option<i64>) {
        (
            self.terms
                .iter()
                .map(|(e, c)| (scale_to(*e, self.den, den), *c))
                .collect(),
            self.order.map(|o| scale_to(o, self.den, den)),
        )
    }

    /// Ramification `q`: every exponent lies in `(1/q)Z`.
    pub fn ramification(&self) -> i64 {
        self.den
    }

    pub fn check_ramification(&self, cap: i64) -> Result<()> {
        if self.den > cap {
            Err(Error::RamificationCapExceeded(self.den, cap))
        } else {
            Ok(())
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (RatExp, Complex64)> + '_ {
        self.terms
            .iter()
            .map(move |(e, c)| (RatExp::new(*e, self.den), *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn order(&self) -> Option<RatExp> {
        self.order.map(|o| RatExp::new(o, self.den))
    }

    pub fn is_exact(&self) -> bool {
        self.order.is_none()
    }

    /// No surviving terms (zero up to truncation).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn val(&self) -> Valuation {
        match self.terms.first() {
            Some((e, _)) => Valuation::Finite(RatExp::new(*e, self.den)),
            None => Valuation::Infinite,
        }
    }

    /// Exponent of the first term with modulus above `tol`; used where
    /// coefficients carry floating error well above the zero tolerance.
    pub fn val_tol(&self, tol: f64) -> Valuation {
        self.terms()
            .find(|(_, c)| c.norm() > tol)
            .map_or(Valuation::Infinite, |(e, _)| Valuation::Finite(e))
    }

    /// Valuation of `self - other` where coefficients count as equal when
    /// they agree to relative tolerance `tol` (absolute below modulus 1).
    pub fn agreement(&self, other: &Self, tol: f64) -> Valuation {
        let cut = match (self.order(), other.order()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let mut exps: Vec<RatExp> = self.terms().chain(other.terms()).map(|(e, _)| e).collect();
        exps.sort();
        exps.dedup();
        exps.into_iter()
            .take_while(|e| cut.map_or(true, |c| *e < c))
            .find(|e| {
                let (a, b) = (self.coeff(*e), other.coeff(*e));
                (a - b).norm() > tol * a.norm().max(b.norm()).max(1.0)
            })
            .map_or(Valuation::Infinite, Valuation::Finite)
    }

    /// Valuation, or the truncation order when the series vanishes to
    /// truncation. `None` only for the exact zero.
    pub fn val_lower_bound(&self) -> Option<RatExp> {
        self.val().finite().or(self.order())
    }

    pub fn leading(&self) -> Option<(RatExp, Complex64)> {
        self.terms().next()
    }

    pub fn coeff(&self, e: RatExp) -> Complex64 {
        if self.den % e.denom() != 0 {
            return Complex64::new(0.0, 0.0);
        }
        let n = exp_num(e, self.den);
        self.terms
            .binary_search_by_key(&n, |(k, _)| *k)
            .map(|i| self.terms[i].1)
            .unwrap_or_default()
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeff(RatExp::zero())
    }

    /// Drops every term at or above `order` and lowers the truncation order.
    pub fn truncate(&self, order: RatExp) -> Self {
        let new_order = match self.order() {
            Some(o) => o.min(order),
            None => order,
        };
        Self::from_terms(self.terms().filter(|(e, _)| *e < new_order), Some(new_order))
    }

    /// Forgets the truncation order, treating the stored terms as exact.
    pub fn as_exact(&self) -> Self {
        PuiseuxSeries {
            den: self.den,
            terms: self.terms.clone(),
            order: None,
        }
        .reduced()
    }

    fn reduced(mut self) -> Self {
        self.reduce_den();
        self
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c.norm() == 0.0 {
            return match self.order {
                None => Self::zero(),
                Some(_) => Self::zero_to(self.val_lower_bound().unwrap()),
            };
        }
        Self::build(
            self.den,
            self.terms.iter().map(|(e, x)| (*e, x * c)).collect(),
            self.order,
        )
    }

    /// Multiplies by `c * t^e`.
    pub fn mul_monomial(&self, c: Complex64, e: RatExp) -> Self {
        let den = lcm(self.den, e.denom());
        let shift = exp_num(e, den);
        let (terms, order) = self.rescaled(den);
        let scaled = PuiseuxSeries {
            den,
            terms: terms.into_iter().map(|(k, x)| (k + shift, x)).collect(),
            order: order.map(|o| o + shift),
        };
        if c == Complex64::new(1.0, 0.0) {
            scaled.reduced()
        } else {
            scaled.scale(c)
        }
    }

    /// Sum of `coef_i * s_i` with cancellation measured against the sum of
    /// absolute contributions.
    pub fn linear_combination(items: &[(Complex64, &PuiseuxSeries)]) -> Self {
        let mut den = 1;
        for (_, s) in items {
            den = lcm(den, s.den);
        }
        let mut order: Option<i64> = None;
        let mut acc: std::collections::BTreeMap<i64, (Complex64, f64)> = Default::default();
        for (k, s) in items {
            let (terms, ord) = s.rescaled(den);
            if let Some(o) = ord {
                order = Some(order.map_or(o, |x: i64| x.min(o)));
            }
            if k.norm() == 0.0 {
                continue;
            }
            for (e, c) in terms {
                let v = c * k;
                let slot = acc.entry(e).or_default();
                slot.0 += v;
                slot.1 += v.norm();
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(e, (c, a))| !negligible(*c, *a) && order.is_none_or(|o| *e < o))
            .map(|(e, (c, _))| (e, c))
            .collect();
        PuiseuxSeries { den, terms, order }.reduced()
    }

    /// Product, additionally truncated at `cap` when given.
    pub fn mul_trunc(&self, other: &Self, cap: Option<RatExp>) -> Self {
        let mut den = lcm(self.den, other.den);
        if let Some(c) = cap {
            den = lcm(den, c.denom());
        }
        let (a, oa) = self.rescaled(den);
        let (b, ob) = other.rescaled(den);
        let lva = a.first().map(|t| t.0).or(oa);
        let lvb = b.first().map(|t| t.0).or(ob);
        let (lva, lvb) = match (lva, lvb) {
            (Some(x), Some(y)) => (x, y),
            // one factor is the exact zero
            _ => return Self::zero(),
        };
        let mut order: Option<i64> = None;
        let mut tighten = |o: i64| order = Some(order.map_or(o, |x: i64| x.min(o)));
        if let Some(o) = oa {
            tighten(o + lvb);
        }
        if let Some(o) = ob {
            tighten(o + lva);
        }
        if let Some(c) = cap {
            tighten(exp_num(c, den));
        }
        if a.is_empty() || b.is_empty() {
            return PuiseuxSeries {
                den,
                terms: Vec::new(),
                order,
            }
            .reduced();
        }
        let lo = a[0].0 + b[0].0;
        let natural_hi = a.last().unwrap().0 + b.last().unwrap().0 + 1;
        let hi = order.map_or(natural_hi, |o| o.min(natural_hi));
        if hi <= lo {
            return PuiseuxSeries {
                den,
                terms: Vec::new(),
                order,
            }
            .reduced();
        }
        let size = (hi - lo) as usize;
        let mut sum = vec![Complex64::new(0.0, 0.0); size];
        let mut abs = vec![0.0f64; size];
        let bnorm: Vec<f64> = b.iter().map(|(_, c)| c.norm()).collect();
        for (ea, ca) in &a {
            let base = ea + b[0].0;
            if base >= hi {
                break;
            }
            let na = ca.norm();
            for ((eb, cb), nb) in b.iter().zip(&bnorm) {
                let e = ea + eb;
                if e >= hi {
                    break;
                }
                let i = (e - lo) as usize;
                sum[i] += ca * cb;
                abs[i] += na * nb;
            }
        }
        let terms = sum
            .into_iter()
            .zip(abs)
            .enumerate()
            .filter(|(_, (c, a))| *a > 0.0 && !negligible(*c, *a))
            .map(|(i, (c, _))| (lo + i as i64, c))
            .collect();
        PuiseuxSeries { den, terms, order }.reduced()
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul_trunc(&base, None);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_trunc(&base, None);
            }
        }
        result
    }

    /// Multiplicative inverse, with the same relative precision as the input
    /// (or [`DEFAULT_ORDER`] for exact inputs).
    pub fn inv(&self) -> Result<Self> {
        let (e0, _) = self.leading().ok_or(Error::ZeroDivision)?;
        if self.is_exact() && self.num_terms() == 1 {
            let (_, c) = self.leading().unwrap();
            return Ok(Self::monomial(c.inv(), -e0));
        }
        let rel = self.order().map_or(RatExp::int(DEFAULT_ORDER), |o| o - e0);
        self.inv_to(rel - e0)
    }

    /// Inverse truncated at the absolute exponent `order`.
    pub fn inv_to(&self, order: RatExp) -> Result<Self> {
        let (e0, c0) = self.leading().ok_or(Error::ZeroDivision)?;
        let mut target = order;
        if let Some(o) = self.order() {
            target = target.min(o - e0 - e0);
        }
        let den = lcm(self.den, target.denom());
        let (a, _) = self.rescaled(den);
        let base = a[0].0;
        let n = exp_num(target, den) + base;
        if n <= 0 {
            return Ok(Self::zero_to(target));
        }
        let n = n as usize;
        let inv_c0 = c0.inv();
        let u: Vec<(usize, Complex64)> = a
            .iter()
            .skip(1)
            .map(|(e, c)| ((e - base) as usize, c * inv_c0))
            .take_while(|(k, _)| *k < n)
            .collect();
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        let mut babs = vec![0.0f64; n];
        b[0] = Complex64::new(1.0, 0.0);
        babs[0] = 1.0;
        for m in 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut accabs = 0.0;
            for (k, uk) in &u {
                if *k > m {
                    break;
                }
                let bv = b[m - k];
                acc -= uk * bv;
                accabs += uk.norm() * babs[m - k];
            }
            if !negligible(acc, accabs) {
                b[m] = acc;
            }
            babs[m] = accabs;
        }
        let terms = b
            .into_iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(i, c)| (i as i64 - base, c * inv_c0))
            .collect();
        Ok(Self::build(den, terms, Some(exp_num(target, den))))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_trunc(&other.inv()?, None))
    }

    /// Numeric value at `t0`, taking the `branch`-th `q`-th root of `t0`
    /// (principal root times `e^{2 pi i branch / q}`). Also returns the size
    /// `|t0|^order` of the first omitted term, zero for exact series.
    pub fn eval_complex(&self, t0: Complex64, branch: u32) -> (Complex64, f64) {
        let q = self.den as f64;
        let root = (t0.ln() / q).exp()
            * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * branch as f64 / q);
        let value = self
            .terms
            .iter()
            .map(|(e, c)| c * root.powi(*e as i32))
            .sum();
        let bound = self
            .order()
            .map_or(0.0, |o| t0.norm().powf(o.to_f64()));
        (value, bound)
    }

    /// Largest coefficient difference over exponents below `below`.
    pub fn max_coeff_diff(&self, other: &Self, below: RatExp) -> f64 {
        let d = self - other;
        d.terms()
            .filter(|(e, _)| *e < below)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }
}

impl Default for PuiseuxSeries {
    fn default() -> Self {
        Self::zero()
    }
}

impl<'a> Add<&'a PuiseuxSeries> for &'a PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn add(self, rhs: &PuiseuxSeries) -> PuiseuxSeries {
        let one = Complex64::new(1.0, 0.0);
        PuiseuxSeries::linear_combination(&[(one, self), (one, rhs)])
    }
}

impl<'a> Sub<&'a PuiseuxSeries> for &'a PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn sub(self, rhs: &PuiseuxSeries) -> PuiseuxSeries {
        let one = Complex64::new(1.0, 0.0);
        PuiseuxSeries::linear_combination(&[(one, self), (-one, rhs)])
    }
}

impl<'a> Mul<&'a PuiseuxSeries> for &'a PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn mul(self, rhs: &PuiseuxSeries) -> PuiseuxSeries {
        self.mul_trunc(rhs, None)
    }
}

impl Neg for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn neg(self) -> PuiseuxSeries {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<PuiseuxSeries> for PuiseuxSeries {
            type Output = PuiseuxSeries;
            fn $m(self, rhs: PuiseuxSeries) -> PuiseuxSeries {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a PuiseuxSeries> for PuiseuxSeries {
            type Output = PuiseuxSeries;
            fn $m(self, rhs: &PuiseuxSeries) -> PuiseuxSeries {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn neg(self) -> PuiseuxSeries {
        -&self
    }
}

impl Mul<Complex64> for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn mul(self, rhs: Complex64) -> PuiseuxSeries {
        self.scale(rhs)
    }
}

/// Formats a complex coefficient so that the family parser reads it back
/// bit for bit.
pub fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        if c.re < 0.0 || c.re.is_sign_negative() {
            format!("({})", c.re)
        } else {
            format!("{}", c.re)
        }
    } else if c.re == 0.0 {
        format!("({}i)", c.im)
    } else {
        format!("({}{}{}i)", c.re, if c.im < 0.0 { "-" } else { "+" }, c.im.abs())
    }
}

pub fn fmt_t_power(e: RatExp) -> Option<String> {
    match e.cmp(&RatExp::zero()) {
        Ordering::Equal => None,
        _ if e == RatExp::int(1) => Some("t".to_string()),
        _ if e.is_integer() && e.numer() > 0 => Some(format!("t^{}", e.numer())),
        _ => Some(format!("t^({e})")),
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms()
            .map(|(e, c)| match fmt_t_power(e) {
                None => fmt_complex(c),
                Some(tp) => format!("{}*{}", fmt_complex(c), tp),
            })
            .collect();
        if let Some(o) = self.order() {
            parts.push(format!("O(t^({o}))"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl Serialize for PuiseuxSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn poly(terms: &[(i64, f64)]) -> PuiseuxSeries {
        PuiseuxSeries::from_terms(terms.iter().map(|(e, x)| (RatExp::int(*e), c(*x))), None)
    }

    #[test]
    fn valuation_examples() {
        let s = poly(&[(3, 1.0), (5, 2.0)]);
        assert_eq!(s.val(), Valuation::Finite(RatExp::int(3)));
        assert!((s.val().norm() - (-3.0f64).exp()).abs() < 1e-15);
        assert_eq!(PuiseuxSeries::zero().val(), Valuation::Infinite);
        let h = PuiseuxSeries::from_terms([(RatExp::new(-1, 2), c(1.0)), (RatExp::zero(), c(1.0))], None);
        assert_eq!(h.val(), Valuation::Finite(RatExp::new(-1, 2)));
        assert_eq!(h.ramification(), 2);
    }

    #[test]
    fn add_cancels_and_mul_expands() {
        let a = poly(&[(1, 1.0), (2, 1.0)]);
        let b = poly(&[(1, -1.0)]);
        assert_eq!(&a + &b, poly(&[(2, 1.0)]));
        let p = &poly(&[(0, 1.0), (1, 1.0)]) * &poly(&[(0, 1.0), (1, -1.0)]);
        assert_eq!(p, poly(&[(0, 1.0), (2, -1.0)]));
    }

    #[test]
    fn mul_propagates_truncation() {
        let a = PuiseuxSeries::from_terms([(RatExp::zero(), c(1.0))], Some(RatExp::int(3)));
        let p = &a * &poly(&[(2, 1.0)]);
        assert_eq!(p.order(), Some(RatExp::int(5)));
        assert_eq!(p.terms().collect::<Vec<_>>(), vec![(RatExp::int(2), c(1.0))]);
    }

    #[test]
    fn add_takes_min_order() {
        let a = PuiseuxSeries::zero_to(RatExp::int(3));
        let b = PuiseuxSeries::from_terms([(RatExp::int(1), c(1.0))], Some(RatExp::int(7)));
        assert_eq!((&a + &b).order(), Some(RatExp::int(3)));
    }

    #[test]
    fn inverse_examples() {
        let geo = poly(&[(0, 1.0), (1, -1.0)]).inv().unwrap();
        assert_eq!(geo.order(), Some(RatExp::int(DEFAULT_ORDER)));
        for (e, x) in geo.terms() {
            assert!(e.is_integer());
            assert!((x - c(1.0)).norm() < 1e-14);
        }
        assert_eq!(geo.num_terms(), DEFAULT_ORDER as usize);

        assert_eq!(poly(&[(2, 1.0)]).inv().unwrap(), poly(&[(-2, 1.0)]));

        let a = poly(&[(1, 2.0), (2, 1.0)]);
        let ia = a.inv().unwrap();
        assert!((ia.coeff(RatExp::int(-1)) - c(0.5)).norm() < 1e-15);
        assert!((ia.coeff(RatExp::int(0)) - c(-0.25)).norm() < 1e-15);
        let prod = &a * &ia;
        assert!((prod.constant_term() - c(1.0)).norm() < 1e-14);
        assert!(prod.terms().all(|(e, x)| e == RatExp::zero() || x.norm() < 1e-11));
        assert_eq!(PuiseuxSeries::zero().inv(), Err(Error::ZeroDivision));
        assert_eq!(PuiseuxSeries::zero_to(RatExp::int(4)).inv(), Err(Error::ZeroDivision));
    }

    #[test]
    fn eval_branches() {
        let s = PuiseuxSeries::t_pow(RatExp::new(1, 2));
        let t0 = c(0.04);
        assert!((s.eval_complex(t0, 0).0 - c(0.2)).norm() < 1e-15);
        assert!((s.eval_complex(t0, 1).0 - c(-0.2)).norm() < 1e-15);
        let lin = PuiseuxSeries::from_terms(
            [(RatExp::zero(), c(1.0)), (RatExp::int(1), c(1.0))],
            Some(RatExp::int(3)),
        );
        let (v, bound) = lin.eval_complex(c(0.01), 0);
        assert!((v - c(1.01)).norm() < 1e-15);
        assert!((bound - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn rendering() {
        let s = PuiseuxSeries::from_terms(
            [
                (RatExp::new(-1, 2), Complex64::new(0.0, 1.0)),
                (RatExp::zero(), c(0.5)),
                (RatExp::int(2), c(-3.0)),
            ],
            Some(RatExp::new(5, 2)),
        );
        assert_eq!(s.to_string(), "(1i)*t^(-1/2) + 0.5 + (-3)*t^2 + O(t^(5/2))");
        assert_eq!(PuiseuxSeries::zero().to_string(), "0");
    }

    #[test]
    fn truncation_drops_terms() {
        let s = poly(&[(0, 1.0), (1, 1.0), (2, 1.0)]).truncate(RatExp::int(2));
        assert_eq!(s.num_terms(), 2);
        assert_eq!(s.order(), Some(RatExp::int(2)));
        assert!(PuiseuxSeries::from_terms([(RatExp::zero(), c(1e-13))], None).is_zero());
    }
}
