use num_complex::Complex64;
use proptest::prelude::*;

use nadyn::dynamics::RationalMapFamily;
use nadyn::family::parse_family;
use nadyn::lab::sample_periodic;
use nadyn::newton::puiseux_roots;
use nadyn::poly::Poly;
use nadyn::spectra::elementary_symmetric;
use nadyn::{PuiseuxSeries, RatExp, Valuation};

fn coeff() -> impl Strategy<Value = Complex64> {
    (0.1f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

fn series() -> impl Strategy<Value = PuiseuxSeries> {
    (1i64..=3, prop::collection::vec((-6i64..=6, coeff()), 1..5)).prop_map(|(den, terms)| {
        PuiseuxSeries::from_terms(terms.into_iter().map(|(n, c)| (RatExp::new(n, den), c)), None)
    })
}

/// Leading coefficient dominating the rest, so the inverse is well
/// conditioned.
fn unit_series() -> impl Strategy<Value = PuiseuxSeries> {
    (
        1i64..=3,
        -6i64..=6,
        (0.5f64..1.0, 0.0f64..std::f64::consts::TAU),
        prop::collection::vec((1i64..=6, 0.05f64..0.25, 0.0f64..std::f64::consts::TAU), 0..4),
    )
        .prop_map(|(den, e0, (r0, a0), rest)| {
            let lead = (RatExp::new(e0, den), Complex64::from_polar(r0, a0));
            let tail = rest
                .into_iter()
                .map(|(k, r, a)| (RatExp::new(e0 + k, den), Complex64::from_polar(r, a)));
            PuiseuxSeries::from_terms(std::iter::once(lead).chain(tail), None)
        })
}

fn laurent() -> impl Strategy<Value = PuiseuxSeries> {
    prop::collection::vec((-2i64..=2, coeff()), 1..3)
        .prop_map(|terms| PuiseuxSeries::from_terms(terms.into_iter().map(|(n, c)| (RatExp::int(n), c)), None))
        .prop_filter("nonzero", |s| !s.is_zero())
}

fn finite(v: Valuation) -> RatExp {
    v.finite().expect("finite valuation")
}

proptest! {
    #[test]
    fn valuation_is_ultrametric(a in series(), b in series()) {
        let (va, vb) = (finite(a.val()), finite(b.val()));
        match (&a + &b).val() {
            Valuation::Finite(v) => {
                prop_assert!(v >= va.min(vb));
                if va != vb {
                    prop_assert_eq!(v, va.min(vb));
                }
            }
            Valuation::Infinite => prop_assert_eq!(va, vb),
        }
    }

    #[test]
    fn valuation_is_multiplicative(a in series(), b in series()) {
        prop_assert_eq!((&a * &b).val(), Valuation::Finite(finite(a.val()) + finite(b.val())));
    }

    #[test]
    fn product_commutes(a in series(), b in series()) {
        let (ab, ba) = (&a * &b, &b * &a);
        prop_assert!(ab.max_coeff_diff(&ba, RatExp::int(100)) <= 1e-12 * ab.max_abs_coeff().max(1.0));
    }

    #[test]
    fn division_undoes_multiplication(a in series(), b in unit_series()) {
        let q = (&a * &b).div(&b).unwrap();
        let below = q.order().unwrap_or(RatExp::int(100));
        prop_assert!(q.max_coeff_diff(&a, below) <= 1e-9);
    }

    #[test]
    fn negation_cancels(a in series()) {
        prop_assert!((&a - &a).is_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Sum of multiplicity times valuation over all roots is val(a_0) - val(a_D),
    /// and the multiplicities add up to the degree.
    #[test]
    fn newton_polygon_mass_balance(coeffs in prop::collection::vec(laurent(), 2..6)) {
        let d = coeffs.len() - 1;
        let a0 = finite(coeffs[0].val());
        let ad = finite(coeffs[d].val());
        let p = Poly::new(coeffs);
        let roots = puiseux_roots(&p, RatExp::int(10)).unwrap();
        let total: usize = roots.iter().map(|r| r.multiplicity).sum();
        prop_assert_eq!(total, d);
        let mass = roots
            .iter()
            .map(|r| finite(r.series.val()) * r.multiplicity as i64)
            .fold(RatExp::zero(), |a, b| a + b);
        prop_assert_eq!(mass, a0 - ad);
    }

    /// The elementary symmetric functions of constants match the coefficients
    /// of the expanded product `prod (1 + x_i s)`.
    #[test]
    fn symmetric_functions_match_expansion(xs in prop::collection::vec(coeff(), 1..6)) {
        let mut expanded = vec![Complex64::new(1.0, 0.0)];
        for x in &xs {
            let mut next = expanded.clone();
            next.push(Complex64::new(0.0, 0.0));
            for (k, c) in expanded.iter().enumerate() {
                next[k + 1] += c * x;
            }
            expanded = next;
        }
        let series: Vec<PuiseuxSeries> = xs.iter().map(|x| PuiseuxSeries::constant(*x)).collect();
        let e = elementary_symmetric(&series);
        prop_assert_eq!(e.len(), xs.len());
        for (s, c) in e.iter().zip(&expanded[1..]) {
            prop_assert!((s.constant_term() - c).norm() <= 1e-12);
        }
    }

    /// Printing a parsed family and parsing it again gives the same map.
    #[test]
    fn family_text_round_trips(
        terms in prop::collection::vec((1u32..9, 0usize..4, -3i64..=3), 1..5),
        den in prop::collection::vec((1u32..9, 0usize..3, -2i64..=2), 0..3),
    ) {
        let render = |ts: &[(u32, usize, i64)]| {
            ts.iter()
                .map(|(c, k, e)| format!("{c}*z^{k}*t^({e})"))
                .collect::<Vec<_>>()
                .join(" + ")
        };
        let text = if den.is_empty() {
            render(&terms)
        } else {
            format!("({}) / (1 + {})", render(&terms), render(&den))
        };
        if let Ok(spec) = parse_family(&text) {
            let again = parse_family(&spec.to_string()).unwrap();
            prop_assert_eq!(spec, again);
        }
    }

    /// Holomorphic index formula for the fixed points of a random constant
    /// rational map: the sum of 1 / (1 - mu) is 1.
    #[test]
    fn holomorphic_index(p in prop::collection::vec(coeff(), 3..5), q in prop::collection::vec(coeff(), 2..4)) {
        let to_poly = |cs: &[Complex64]| Poly::from_complex(cs);
        let Ok(f) = RationalMapFamily::new(to_poly(&p), to_poly(&q)) else { return Ok(()) };
        let Ok(sample) = sample_periodic(&f, 1, Complex64::new(0.5, 0.0)) else { return Ok(()) };
        let mus = &sample.multipliers;
        prop_assume!(mus.iter().all(|m| (1.0 - m).norm() > 1e-3));
        let sum: Complex64 = mus.iter().map(|m| (1.0 - m).inv()).sum();
        prop_assert!((sum - 1.0).norm() <= 1e-6, "index sum {sum}");
    }
}
