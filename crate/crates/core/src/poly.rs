//! Univariate polynomials in `z` with Puiseux-series coefficients.

use std::fmt;

use num_complex::Complex64;

use crate::puiseux::{fmt_complex, fmt_t_power, PuiseuxSeries, RatExp};

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<PuiseuxSeries>,
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl Poly {
    pub fn new(mut coeffs: Vec<PuiseuxSeries>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero() && c.is_exact()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: PuiseuxSeries) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(PuiseuxSeries::one())
    }

    /// The polynomial `z`.
    pub fn z() -> Self {
        Self::monomial(PuiseuxSeries::one(), 1)
    }

    pub fn monomial(c: PuiseuxSeries, k: usize) -> Self {
        let mut coeffs = vec![PuiseuxSeries::zero(); k];
        coeffs.push(c);
        Self::new(coeffs)
    }

    /// Builds from complex coefficients, constant term first.
    pub fn from_complex(cs: &[Complex64]) -> Self {
        Self::new(cs.iter().map(|c| PuiseuxSeries::constant(*c)).collect())
    }

    pub fn coeffs(&self) -> &[PuiseuxSeries] {
        &self.coeffs
    }

    /// Coefficient of `z^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> PuiseuxSeries {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Smallest valuation over all coefficients (Gauss valuation), `None`
    /// when every coefficient vanishes to truncation.
    pub fn gauss_val(&self) -> Option<RatExp> {
        self.coeffs.iter().filter_map(|c| c.val().finite()).min()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| &self.coeff(k) + &other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| &self.coeff(k) - &other.coeff(k)).collect())
    }

    pub fn scale(&self, c: &PuiseuxSeries) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn scale_complex(&self, c: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a.scale(c)).collect())
    }

    /// Multiplies every coefficient by `t^e`.
    pub fn shift_t(&self, e: RatExp) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a.mul_monomial(one(), e)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.mul_trunc(other, None)
    }

    /// Product with every coefficient truncated at `cap`.
    pub fn mul_trunc(&self, other: &Poly, cap: Option<RatExp>) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let lo = k.saturating_sub(other.coeffs.len() - 1);
            let hi = k.min(self.coeffs.len() - 1);
            let prods: Vec<PuiseuxSeries> = (lo..=hi)
                .map(|i| self.coeffs[i].mul_trunc(&other.coeffs[k - i], cap))
                .collect();
            let items: Vec<(Complex64, &PuiseuxSeries)> = prods.iter().map(|p| (one(), p)).collect();
            out.push(PuiseuxSeries::linear_combination(&items));
        }
        Poly::new(out)
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn truncate_coeffs(&self, order: RatExp) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c.truncate(order)).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.scale(Complex64::new(k as f64, 0.0)))
                .collect(),
        )
    }

    /// Horner evaluation, truncating intermediate products at `cap`.
    pub fn eval_trunc(&self, z: &PuiseuxSeries, cap: Option<RatExp>) -> PuiseuxSeries {
        let mut acc = PuiseuxSeries::zero();
        for c in self.coeffs.iter().rev() {
            acc = &acc.mul_trunc(z, cap) + c;
            if let Some(cap) = cap {
                acc = acc.truncate(cap);
            }
        }
        acc
    }

    /// Evaluation as one linear combination of `a_k z^k`, so cancellation in
    /// the result is judged against every contribution.
    pub fn eval_sum(&self, z: &PuiseuxSeries, cap: Option<RatExp>) -> PuiseuxSeries {
        if self.coeffs.is_empty() {
            return PuiseuxSeries::zero();
        }
        let mut terms = Vec::with_capacity(self.coeffs.len());
        let mut zk = PuiseuxSeries::one();
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                zk = zk.mul_trunc(z, cap);
            }
            terms.push(c.mul_trunc(&zk, cap));
        }
        let items: Vec<(Complex64, &PuiseuxSeries)> = terms.iter().map(|p| (one(), p)).collect();
        let out = PuiseuxSeries::linear_combination(&items);
        match cap {
            Some(c) => out.truncate(c),
            None => out,
        }
    }

    pub fn eval(&self, z: &PuiseuxSeries) -> PuiseuxSeries {
        self.eval_trunc(z, None)
    }

    /// `w^deg * P(1/w)` for a formal degree `deg >= degree`.
    pub fn reversed(&self, deg: usize) -> Poly {
        let mut c = vec![PuiseuxSeries::zero(); deg + 1];
        for (k, a) in self.coeffs.iter().enumerate() {
            c[deg - k] = a.clone();
        }
        Poly::new(c)
    }

    /// `P(a + b z)`, coefficients truncated at `cap` when given.
    pub fn substitute_linear(&self, a: &PuiseuxSeries, b: &PuiseuxSeries, cap: Option<RatExp>) -> Poly {
        let lin = Poly::new(vec![a.clone(), b.clone()]);
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_trunc(&lin, cap).add(&Poly::constant(c.clone()));
            if let Some(cap) = cap {
                acc = acc.truncate_coeffs(cap);
            }
        }
        acc
    }

    /// Taylor shift `P(c + z)` computed coefficientwise, so cancellation is
    /// judged against the size of every contribution.
    pub fn taylor_shift(&self, c: &PuiseuxSeries, cap: Option<RatExp>) -> Poly {
        let n = self.coeffs.len();
        if n == 0 {
            return Poly::zero();
        }
        let mut cpow = vec![PuiseuxSeries::one()];
        for k in 1..n {
            let next = cpow[k - 1].mul_trunc(c, cap);
            cpow.push(next);
        }
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let prods: Vec<PuiseuxSeries> = (j..n)
                .map(|k| {
                    let binom = binomial(k, j);
                    self.coeffs[k]
                        .mul_trunc(&cpow[k - j], cap)
                        .scale(Complex64::new(binom, 0.0))
                })
                .collect();
            let items: Vec<(Complex64, &PuiseuxSeries)> = prods.iter().map(|p| (one(), p)).collect();
            out.push(PuiseuxSeries::linear_combination(&items));
        }
        Poly::new(out)
    }

    /// Numeric coefficients at `t0` (branch 0 of every root of `t0`).
    pub fn eval_t(&self, t0: Complex64) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.eval_complex(t0, 0).0).collect()
    }

    /// Coefficients of `t^0` after the series are all truncated to complex
    /// numbers; used for reductions.
    pub fn constant_terms(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.constant_term()).collect()
    }

    pub fn ramification(&self) -> i64 {
        self.coeffs.iter().map(|c| c.ramification()).fold(1, num_integer::lcm)
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

/// Homogeneous composition: given `(P, Q)` of formal degree `d` and
/// `(A, B)` of formal degree `e`, returns the pair of formal degree `d*e`
/// representing `[P(A, B) : Q(A, B)]`.
pub fn compose_homogeneous(p: &Poly, q: &Poly, d: usize, a: &Poly, b: &Poly) -> (Poly, Poly) {
    let mut apow = vec![Poly::one()];
    let mut bpow = vec![Poly::one()];
    for k in 1..=d {
        apow.push(apow[k - 1].mul(a));
        bpow.push(bpow[k - 1].mul(b));
    }
    let mut mono: Vec<Option<Poly>> = vec![None; d + 1];
    let mut eval = |f: &Poly| {
        let mut acc = Poly::zero();
        for j in 0..=d {
            let c = f.coeff(j);
            if c.is_zero() && c.is_exact() {
                continue;
            }
            let m = mono[j].get_or_insert_with(|| apow[j].mul(&bpow[d - j]));
            acc = acc.add(&m.scale(&c));
        }
        acc
    };
    (eval(p), eval(q))
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            let zpart = match k {
                0 => None,
                1 => Some("z".to_string()),
                _ => Some(format!("z^{k}")),
            };
            for (e, x) in c.terms() {
                let mut factors = vec![fmt_complex(x)];
                factors.extend(fmt_t_power(e));
                factors.extend(zpart.clone());
                parts.push(factors.join("*"));
            }
            if let Some(o) = c.order() {
                let mut factors = vec![format!("O(t^({o}))")];
                factors.extend(zpart.clone());
                parts.push(factors.join("*"));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs(xs: &[f64]) -> Poly {
        Poly::from_complex(&xs.iter().map(|x| Complex64::new(*x, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn taylor_shift_matches_substitution() {
        let p = cs(&[1.0, -3.0, 3.0, -1.0]);
        let one = PuiseuxSeries::one();
        let shifted = p.taylor_shift(&one, None);
        // (1 - (1+z))^3 = -z^3
        assert_eq!(shifted, cs(&[0.0, 0.0, 0.0, -1.0]));
        assert_eq!(p.substitute_linear(&one, &one, None), shifted);
    }

    #[test]
    fn reversal_and_derivative() {
        let p = cs(&[2.0, 0.0, 1.0]);
        assert_eq!(p.reversed(3), cs(&[0.0, 1.0, 0.0, 2.0]));
        assert_eq!(p.derivative(), cs(&[0.0, 2.0]));
    }

    #[test]
    fn homogeneous_composition_of_inversion() {
        // f = 1/z: P = 1, Q = z, degree 1
        let (p2, q2) = compose_homogeneous(&Poly::one(), &Poly::z(), 1, &Poly::one(), &Poly::z());
        assert_eq!(p2, Poly::z());
        assert_eq!(q2, Poly::one());
    }
}
