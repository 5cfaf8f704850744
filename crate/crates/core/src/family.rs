//! Text form of a family: a rational expression in `z` whose coefficients
//! are Laurent polynomials in `t`, and the bundled example families.
//!
//! ```text
//! family   = expr ;
//! expr     = term , { ( "+" | "-" ) , term } ;
//! term     = unary , { [ "*" | "/" ] , unary } ;      (* juxtaposition multiplies *)
//! unary    = ( "+" | "-" ) , unary | power ;
//! power    = atom , [ "^" , exponent ] ;
//! exponent = [ "+" | "-" ] , integer | "(" , [ "+" | "-" ] , integer , ")" ;
//! atom     = number | "i" | "z" | "t" | "(" , expr , ")" ;
//! number   = digit , { digit } , [ "." , { digit } ] , [ ( "e" | "E" ) , [ "+" | "-" ] , digit , { digit } ] ;
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::dynamics::RationalMapFamily;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::puiseux::{PuiseuxSeries, RatExp};

/// Sparse Laurent polynomial in `z` and `t`, keyed by `(z exponent, t exponent)`.
#[derive(Clone, Debug, PartialEq, Default)]
struct Laurent2(BTreeMap<(i64, i64), Complex64>);

impl Laurent2 {
    fn constant(c: Complex64) -> Self {
        Self::monomial(c, 0, 0)
    }

    fn monomial(c: Complex64, z: i64, t: i64) -> Self {
        let mut m = BTreeMap::new();
        if c != Complex64::new(0.0, 0.0) {
            m.insert((z, t), c);
        }
        Laurent2(m)
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add(&self, other: &Self, sign: f64) -> Self {
        let mut m = self.0.clone();
        for (k, c) in &other.0 {
            let e = m.entry(*k).or_insert(Complex64::new(0.0, 0.0));
            *e += c * sign;
            if *e == Complex64::new(0.0, 0.0) {
                m.remove(k);
            }
        }
        Laurent2(m)
    }

    fn mul(&self, other: &Self) -> Self {
        let mut m: BTreeMap<(i64, i64), Complex64> = BTreeMap::new();
        for ((za, ta), a) in &self.0 {
            for ((zb, tb), b) in &other.0 {
                *m.entry((za + zb, ta + tb)).or_insert(Complex64::new(0.0, 0.0)) += a * b;
            }
        }
        m.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Laurent2(m)
    }

    fn shift_z(&self, k: i64) -> Self {
        Laurent2(self.0.iter().map(|((z, t), c)| ((z + k, *t), *c)).collect())
    }

    /// Divides by `c z^a t^b`.
    fn div_monomial(&self, c: Complex64, z: i64, t: i64) -> Self {
        Laurent2(self.0.iter().map(|((za, ta), x)| ((za - z, ta - t), x / c)).collect())
    }

    fn min_t(&self) -> Option<i64> {
        self.0.keys().map(|(_, t)| *t).min()
    }

    fn min_z(&self) -> Option<i64> {
        self.0.keys().map(|(z, _)| *z).min()
    }

    fn to_poly(&self) -> Poly {
        let deg = self.0.keys().map(|(z, _)| *z).max().unwrap_or(0).max(0) as usize;
        let mut coeffs = vec![Vec::new(); deg + 1];
        for ((z, t), c) in &self.0 {
            coeffs[*z as usize].push((RatExp::int(*t), *c));
        }
        Poly::new(
            coeffs
                .into_iter()
                .map(|terms| PuiseuxSeries::from_terms(terms, None))
                .collect(),
        )
    }
}

/// `num / den` during parsing.
#[derive(Clone, Debug)]
struct Frac {
    num: Laurent2,
    den: Laurent2,
}

impl Frac {
    fn of(num: Laurent2) -> Self {
        Frac {
            num,
            den: Laurent2::constant(Complex64::new(1.0, 0.0)),
        }
    }

    fn add(&self, other: &Self, sign: f64) -> Self {
        if self.den == other.den {
            return Frac {
                num: self.num.add(&other.num, sign),
                den: self.den.clone(),
            };
        }
        Frac {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den), sign),
            den: self.den.mul(&other.den),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        Frac {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    fn recip(&self) -> Option<Self> {
        if self.num.is_zero() {
            return None;
        }
        Some(Frac {
            num: self.den.clone(),
            den: self.num.clone(),
        })
    }

    fn pow(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = Frac::of(Laurent2::constant(Complex64::new(1.0, 0.0)));
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Some(acc)
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, at: usize, message: impl Into<String>) -> Result<T> {
        let before = &self.src[..at.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Err(Error::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => self.error(self.pos, format!("expected '{}', found '{}'", c as char, x as char)),
            None => self.error(self.pos, format!("expected '{}', found end of input", c as char)),
        }
    }

    fn expr(&mut self) -> Result<Frac> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = acc.add(&rhs, if c == b'+' { 1.0 } else { -1.0 });
        }
        Ok(acc)
    }

    fn starts_atom(c: u8) -> bool {
        c.is_ascii_digit() || matches!(c, b'.' | b'(' | b'z' | b't' | b'i')
    }

    fn term(&mut self) -> Result<Frac> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let rhs = self.unary()?;
                    match rhs.recip() {
                        Some(r) => acc = acc.mul(&r),
                        None => return self.error(at, "division by zero"),
                    }
                }
                Some(c) if Self::starts_atom(c) => acc = acc.mul(&self.power()?),
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Frac> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let v = self.unary()?;
                Ok(Frac {
                    num: Laurent2::default().add(&v.num, -1.0),
                    den: v.den,
                })
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Frac> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.pos;
        let paren = self.peek() == Some(b'(');
        if paren {
            self.pos += 1;
        }
        let sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error(self.pos, "expected an integer exponent");
        }
        let e: i64 = match self.src[start..self.pos].parse() {
            Ok(e) => e,
            Err(_) => return self.error(start, "exponent out of range"),
        };
        if paren {
            self.expect(b')')?;
        }
        match base.pow(sign * e) {
            Some(v) => Ok(v),
            None => self.error(at, "negative power of zero"),
        }
    }

    fn atom(&mut self) -> Result<Frac> {
        let at = self.pos;
        let one = Complex64::new(1.0, 0.0);
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(b')')?;
                Ok(v)
            }
            Some(b'z') => {
                self.pos += 1;
                Ok(Frac::of(Laurent2::monomial(one, 1, 0)))
            }
            Some(b't') => {
                self.pos += 1;
                Ok(Frac::of(Laurent2::monomial(one, 0, 1)))
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(Frac::of(Laurent2::constant(Complex64::new(0.0, 1.0))))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) => self.error(at, format!("unexpected '{}'", c as char)),
            None => self.error(at, "unexpected end of input"),
        }
    }

    fn number(&mut self) -> Result<Frac> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.bytes.len() && p.bytes[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.bytes.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.bytes.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if exp_start == self.pos {
                self.pos = mark;
            }
        }
        match self.src[start..self.pos].parse::<f64>() {
            Ok(x) => Ok(Frac::of(Laurent2::constant(Complex64::new(x, 0.0)))),
            Err(_) => self.error(start, format!("malformed number '{}'", &self.src[start..self.pos])),
        }
    }
}

/// A parsed family: `P/Q` with negative powers of `z` cleared and common
/// powers of `z` cancelled.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub source: String,
    pub p: Poly,
    pub q: Poly,
    pub degree: usize,
}

impl PartialEq for FamilySpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.q == other.q && self.degree == other.degree
    }
}

impl FamilySpec {
    pub fn family(&self) -> Result<RationalMapFamily> {
        RationalMapFamily::new(self.p.clone(), self.q.clone())
    }
}

pub fn parse_family(text: &str) -> Result<FamilySpec> {
    parse_family_with_degree(text, None)
}

/// Parses and, when `declared` is given, checks the degree.
pub fn parse_family_with_degree(text: &str, declared: Option<usize>) -> Result<FamilySpec> {
    let mut parser = Parser {
        src: text,
        bytes: text.as_bytes(),
        pos: 0,
    };
    let v = parser.expr()?;
    if let Some(c) = parser.peek() {
        return parser.error(parser.pos, format!("unexpected '{}'", c as char));
    }
    if v.num.is_zero() {
        return Err(Error::Precondition("the map is identically zero".into()));
    }
    // t is a unit: a monomial denominator folds into the numerator, and
    // otherwise the lowest power of t leaves the denominator
    let (c, a, b) = match v.den.0.iter().next() {
        Some((&(a, b), &c)) if v.den.0.len() == 1 => (c, a, b),
        _ => (Complex64::new(1.0, 0.0), 0, v.den.min_t().unwrap()),
    };
    let (num, den) = (v.num.div_monomial(c, a, b), v.den.div_monomial(c, a, b));
    let shift = -num.min_z().unwrap().min(den.min_z().unwrap());
    let (num, den) = (num.shift_z(shift), den.shift_z(shift));
    let (p, q) = (num.to_poly(), den.to_poly());
    let degree = p.degree().unwrap_or(0).max(q.degree().unwrap_or(0));
    if let Some(d) = declared {
        if d != degree {
            return Err(Error::DegreeMismatch {
                declared: d,
                computed: degree,
            });
        }
    }
    let spec = FamilySpec {
        source: text.to_string(),
        p,
        q,
        degree,
    };
    spec.family()?;
    Ok(spec)
}

fn fmt_real(x: f64) -> String {
    let s = format!("{x:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

fn fmt_coeff(c: Complex64) -> String {
    match (c.re, c.im) {
        (re, im) if im == 0.0 => fmt_real(re),
        (re, im) if re == 0.0 => format!("{}*i", fmt_real(im)),
        (re, im) => format!("({} + {}*i)", fmt_real(re), fmt_real(im)),
    }
}

fn fmt_series(s: &PuiseuxSeries) -> String {
    let parts: Vec<String> = s
        .terms()
        .map(|(e, c)| match e.numer() {
            0 => fmt_coeff(c),
            1 => format!("{}*t", fmt_coeff(c)),
            k => format!("{}*t^{}", fmt_coeff(c), k),
        })
        .collect();
    parts.join(" + ")
}

/// Canonical text: descending powers of `z`, each coefficient a
/// parenthesized Laurent polynomial in `t`.
pub fn fmt_poly(p: &Poly) -> String {
    let parts: Vec<String> = p
        .coeffs()
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| match k {
            0 => format!("({})", fmt_series(c)),
            1 => format!("({})*z", fmt_series(c)),
            _ => format!("({})*z^{k}", fmt_series(c)),
        })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == Poly::one() {
            write!(f, "{}", fmt_poly(&self.p))
        } else {
            write!(f, "({})/({})", fmt_poly(&self.p), fmt_poly(&self.q))
        }
    }
}

/// Named example families: `(name, text)`.
pub const BUNDLED: &[(&str, &str)] = &[
    ("quadratic-pole", "z^2 + t^-1"),
    ("quadratic-good", "z^2 + t"),
    ("quadratic-rational-good", "(z^2 + t)/(1 + t*z)"),
    ("cubic-pole", "z^3 + z*t^-1"),
    ("cubic-scaled", "t*z^3 + z^2"),
    ("cubic-quadratic-pole", "z^3 + z^2*t^-1"),
    ("quartic-quadratic-pole", "z^4 + z^2*t^-1"),
    ("mcmullen", "z^2 + t/z^2"),
    ("cubic-rational-pole", "(z^3 + t^-1)/z"),
    ("cubic-rational-odd", "(z^3 + z*t^-1)/(z^2 + 1)"),
    ("cubic-rational-good", "(z^3 + t)/(1 + t*z^3)"),
];

pub fn bundled(name: &str) -> Result<FamilySpec> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_family(text))
        .unwrap_or_else(|| Err(Error::Precondition(format!("no bundled family named '{name}'"))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn simple_families() {
        let s = parse_family("z^2 + t^-1").unwrap();
        assert_eq!(s.degree, 2);
        assert_eq!(s.q, Poly::one());
        assert_eq!(s.p.coeff(0), PuiseuxSeries::monomial(c(1.0), RatExp::int(-1)));
        let r = parse_family("(z^2 + t)/(1 + t*z)").unwrap();
        assert_eq!(r.degree, 2);
        assert_eq!(r.q.degree(), Some(1));
    }

    #[test]
    fn negative_z_powers_are_cleared() {
        let m = parse_family("z^2 + t/z^2").unwrap();
        assert_eq!(m.degree, 4);
        assert_eq!(m.q, Poly::monomial(PuiseuxSeries::one(), 2));
        assert_eq!(m.p.coeff(4), PuiseuxSeries::one());
        assert_eq!(m.p.coeff(0), PuiseuxSeries::t_pow(RatExp::int(1)));
        // common z powers cancel
        let c3 = parse_family("(z^4 + z)/z").unwrap();
        assert_eq!(c3.q, Poly::one());
        assert_eq!(c3.degree, 3);
    }

    #[test]
    fn juxtaposition_and_complex() {
        let a = parse_family("2i z^2 + 3t^-2").unwrap();
        assert_eq!(a.p.coeff(2), PuiseuxSeries::constant(Complex64::new(0.0, 2.0)));
        assert_eq!(a.p.coeff(0), PuiseuxSeries::monomial(c(3.0), RatExp::int(-2)));
        let b = parse_family("-(z - 1.5e-1)^2").unwrap();
        assert_eq!(b.p.coeff(1), PuiseuxSeries::real(0.3));
    }

    #[test]
    fn round_trips() {
        for (_, text) in BUNDLED {
            let s = parse_family(text).unwrap();
            let again = parse_family(&s.to_string()).unwrap();
            assert_eq!(s, again, "{text} -> {s}");
        }
    }

    #[test]
    fn errors() {
        match parse_family("z^2 +\n  t^x") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 5)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_family("z^2 + (t"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_family("z^2 $"), Err(Error::Syntax { line: 1, column: 5, .. })));
        assert!(matches!(parse_family("z/0"), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse_family_with_degree("z^3 + t", Some(2)),
            Err(Error::DegreeMismatch { declared: 2, computed: 3 })
        ));
        assert!(matches!(parse_family("(z^2 - 1)/(z - 1)"), Err(Error::Precondition(_))));
    }
}
