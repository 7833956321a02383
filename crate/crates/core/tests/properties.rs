mod common;

use limitlab::cli::{parse_grid, RunConfig};
use limitlab::fatou::{classify_point, Verdict};
use limitlab::limits::{covering_trivial, parse_word, winding_vector, ComponentGraph, LimitGroupElement, LocalizedInteger};
use limitlab::natural_extension::{continue_along_path, fiber, History};
use limitlab::poly::{format_complex, parse_complex, preimage_tolerance, preimages, residual_bound, roots_of};
use limitlab::solenoid::{Angle, SolenoidPoint};
use limitlab::{Complex64, ComplexPolynomial};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn complex(range: f64) -> impl Strategy<Value = Complex64> {
    (-range..range, -range..range).prop_map(|(re, im)| Complex64::new(re, im))
}

fn polynomial(max_degree: usize) -> impl Strategy<Value = ComplexPolynomial> {
    (2..=max_degree)
        .prop_flat_map(|d| (proptest::collection::vec(complex(2.0), d), complex(2.0)))
        .prop_filter_map("leading coefficient too small", |(mut low, lead)| {
            if lead.norm() < 0.1 {
                return None;
            }
            low.push(lead);
            ComplexPolynomial::new(low).ok()
        })
}

fn localized(base: u32) -> impl Strategy<Value = LocalizedInteger> {
    (any::<i64>(), 0u32..40).prop_map(move |(n, e)| LocalizedInteger::new(n, e, base).unwrap())
}

proptest! {
    #[test]
    fn complex_literal_round_trip(re in any::<f64>(), im in any::<f64>()) {
        prop_assume!(re.is_finite() && im.is_finite());
        let z = Complex64::new(re, im);
        let back = parse_complex(&format_complex(z)).unwrap();
        prop_assert_eq!(back.re.to_bits(), z.re.to_bits());
        prop_assert_eq!(back.im.to_bits(), z.im.to_bits());
    }

    #[test]
    fn polynomial_text_round_trip(p in polynomial(6)) {
        let back: ComplexPolynomial = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn preimages_invert_eval(p in polynomial(6), target in complex(3.0)) {
        let ws = preimages(&p, target).unwrap();
        prop_assert_eq!(ws.len(), p.degree());
        for w in ws {
            prop_assert!((p.eval(w) - target).norm() <= residual_bound(&p.minus_constant(target), w, preimage_tolerance(target)));
        }
    }

    #[test]
    fn critical_points_sum(p in polynomial(7)) {
        // Roots of p' sum to -(coefficient of z^{d-2} in p') / (leading of p').
        let dp = p.derivative();
        let cs = p.critical_points().unwrap();
        prop_assert_eq!(cs.len(), p.degree() - 1);
        let c = dp.coefficients();
        let d = c.len() - 1;
        let expected = if d == 0 { Complex64::new(0.0, 0.0) } else { -c[d - 1] / c[d] };
        let sum: Complex64 = cs.iter().sum();
        prop_assert!((sum - expected).norm() <= 1e-7 * (1.0 + expected.norm()));
        let brute = roots_of(&dp).unwrap();
        for z in cs {
            prop_assert!(brute.iter().any(|w| (w - z).norm() < 1e-6));
        }
    }

    #[test]
    fn escape_is_monotone_in_budget(c in complex(1.0), z in complex(2.0), n in 1usize..60) {
        let p = ComplexPolynomial::quadratic(c);
        let r = p.escape_radius();
        let short = classify_point(&p, z, r, n).unwrap();
        let long = classify_point(&p, z, r, 2 * n).unwrap();
        if let Verdict::Escaped(k) = short.verdict {
            prop_assert_eq!(long.verdict, Verdict::Escaped(k));
        }
    }

    #[test]
    fn fiber_cardinality(c in complex(0.5), z in complex(2.0), n in 0usize..7) {
        let p = ComplexPolynomial::quadratic(c);
        let f = fiber(&p, z, n).unwrap();
        prop_assert_eq!(f.count(), 1 << n);
        for e in &f.entries {
            prop_assert!(e.history.validate(&p).is_ok());
        }
    }

    #[test]
    fn continuation_composes_and_reverses(center_angle in 0.0..std::f64::consts::TAU, radius in 0.1f64..0.4) {
        let p = ComplexPolynomial::monomial(2);
        let h = fiber(&p, Complex64::new(1.0, 0.0), 4).unwrap().entries[5].history.clone();
        let mid = Complex64::new(1.0, 0.0) + Complex64::from_polar(radius, center_angle);
        let end = mid + Complex64::new(0.0, radius);
        let first: Vec<Complex64> = (0..=50).map(|j| h.head() + (mid - h.head()) * (j as f64 / 50.0)).collect();
        let second: Vec<Complex64> = (0..=50).map(|j| mid + (end - mid) * (j as f64 / 50.0)).collect();
        let whole: Vec<Complex64> = first.iter().chain(&second[1..]).copied().collect();
        let a = continue_along_path(&p, &h, &whole).unwrap();
        let b = continue_along_path(&p, &continue_along_path(&p, &h, &first).unwrap(), &second).unwrap();
        prop_assert!(a.distance(&b) <= 1e-8);
        let reversed: Vec<Complex64> = whole.iter().rev().copied().collect();
        prop_assert!(continue_along_path(&p, &a, &reversed).unwrap().distance(&h) <= 1e-8);
    }

    #[test]
    fn history_shift_unshift(c in complex(0.5), z in complex(1.5), n in 1usize..6, b in 0usize..2) {
        let p = ComplexPolynomial::quadratic(c);
        let f = fiber(&p, z, n).unwrap();
        let h = &f.entries[b * (f.entries.len() - 1)].history;
        prop_assert_eq!(&h.shift(&p).unshift(&p, None).unwrap(), h);
        let back = h.unshift(&p, Some(b)).unwrap().shift(&p);
        prop_assert_eq!(back.depth(), h.depth() + 1);
        prop_assert!(back.validate(&p).is_ok());
        prop_assert!(back.truncate(h.depth()).distance(h) <= 1e-9 * (1.0 + h.head().norm()));
        prop_assert_eq!(History::from_json(&h.to_json()).unwrap(), h.clone());
    }

    #[test]
    fn solenoid_shift_unshift(base in 2u32..5, num in 0i64..1000, den in 1i64..1000, digits in proptest::collection::vec(0u32..5, 0..8), k in 0u32..5) {
        prop_assume!(k < base);
        let digits: Vec<u32> = digits.into_iter().map(|d| d % base).collect();
        let s = SolenoidPoint::new(Angle::rational(num % den, den).unwrap(), digits.clone(), base).unwrap();
        prop_assert_eq!(s.unshift(k).unwrap().shift(), s.clone());
        if let Some(&last) = digits.last() {
            prop_assert_eq!(s.shift().unshift(last).unwrap(), s.clone());
        }
        prop_assert_eq!(SolenoidPoint::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn localized_group_laws(x in localized(2), y in localized(2), z in localized(2)) {
        prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
        prop_assert_eq!(x.add(&y).unwrap().add(&z).unwrap(), x.add(&y.add(&z).unwrap()).unwrap());
        prop_assert!(x.add(&x.neg()).unwrap().is_zero());
        prop_assert_eq!(x.add(&LocalizedInteger::zero(2)).unwrap(), x.clone());
        prop_assert_eq!(x.add(&y).unwrap().to_rational(), x.to_rational() + y.to_rational());
        prop_assert_eq!(x.scale(&y).unwrap().to_rational(), x.to_rational() * y.to_rational());
        // Normal form is unique: equal values have equal representations.
        let again = LocalizedInteger::new(x.numerator() * BigInt::from(8), x.exponent() + 3, 2).unwrap();
        prop_assert_eq!(again, x);
    }

    #[test]
    fn limit_equal_matches_rationals(l1 in 0u32..30, v1 in -1000i64..1000, l2 in 0u32..30, v2 in -1000i64..1000, m in 2u32..7) {
        let a = LimitGroupElement::new(l1, v1, m).unwrap();
        let b = LimitGroupElement::new(l2, v2, m).unwrap();
        let q = |l: u32, v: i64| BigRational::new(BigInt::from(v), BigInt::from(m).pow(l));
        prop_assert_eq!(a.limit_equal(&b), q(l1, v1) == q(l2, v2));
        prop_assert!(a.limit_equal(&a));
        prop_assert_eq!(a.limit_equal(&b), b.limit_equal(&a));
        prop_assert_eq!(a.to_localized().to_rational(), q(l1, v1));
        prop_assert!(LimitGroupElement::from_localized(&a.to_localized()).limit_equal(&a));
    }

    #[test]
    fn winding_is_a_homomorphism(u in proptest::collection::vec((1usize..5, any::<bool>()), 0..12), v in proptest::collection::vec((1usize..5, any::<bool>()), 0..12)) {
        let render = |w: &[(usize, bool)]| w.iter().map(|(i, inv)| if *inv { format!("e{i}^-1") } else { format!("e{i}") }).collect::<Vec<_>>().join(" ");
        let (su, sv) = (render(&u), render(&v));
        let wu = winding_vector(&parse_word(&su).unwrap(), 4).unwrap();
        let wv = winding_vector(&parse_word(&sv).unwrap(), 4).unwrap();
        let wuv = winding_vector(&parse_word(&format!("{su} {sv}")).unwrap(), 4).unwrap();
        let sum: Vec<i64> = wu.iter().zip(&wv).map(|(a, b)| a + b).collect();
        prop_assert_eq!(wuv, sum);
    }

    #[test]
    fn covering_matches_reachability_and_is_monotone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = common::random_graph(&mut rng, 30);
        let report = covering_trivial(&g).unwrap();
        let oracle = common::reachable(&g).iter().all(|&b| b);
        prop_assert_eq!(report.is_trivial(), oracle);
        for w in report.trace.iter().flatten() {
            let mut v = w.source;
            for _ in 0..w.k {
                v = g.map[v];
            }
            prop_assert_eq!(v, w.node);
            prop_assert!(g.small[w.source]);
        }
        prop_assert_eq!(ComponentGraph::from_json(&g.to_json()).unwrap(), g.clone());
        if report.is_trivial() {
            for i in 0..g.len() {
                g.small[i] = true;
                prop_assert!(covering_trivial(&g).unwrap().is_trivial());
            }
        }
    }

    #[test]
    fn config_echo(seed in any::<u64>(), depth in 0usize..20, rho in 1.0f64..3.0, a in complex(0.05), comment in "[a-z ]{0,12}", pad in " {0,2}") {
        let text = format!("# {comment}\ncommand{pad}={pad}fibers\nseed={seed}\n\ndepth={depth}\nrho={rho}\na={}\n", format_complex(a));
        let cfg = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(cfg.to_text(), text.clone());
        prop_assert_eq!(cfg.seed, Some(seed));
        prop_assert_eq!(cfg.rho, Some(rho));
        prop_assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn grid_spec_round_trip(nx in 1usize..500, ny in 1usize..500, x0 in -5.0f64..0.0, w in 0.1f64..5.0) {
        let g = parse_grid(&format!("{x0},{},{x0},{},{nx}x{ny}", x0 + w, x0 + w)).unwrap();
        prop_assert_eq!(g.bounds, Some([x0, x0 + w, x0, x0 + w]));
        prop_assert_eq!((g.nx, g.ny), (nx, ny));
    }
}
