use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stdsets::derived::{derived_once, derived_set_checked};
use stdsets::oracle::{enumerate, Source};
use stdsets::random::{random_atom, random_family, AtomShape, Signs};
use stdsets::setops::{clip, gamma_plus, min_positive_element, n0};
use stdsets::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn values(f: &SetFamily, w: &Interval, cap: u64) -> Vec<Rational> {
    enumerate(Source::Family(f), w, cap).values
}

fn window() -> Interval {
    Interval::new(int(-6), int(6)).unwrap()
}

fn fam(text: &str) -> SetFamily {
    stdsets::dsl::evaluate(text).unwrap().family().unwrap().clone()
}

fn is_in(f: &SetFamily, q: &Rational) -> bool {
    matches!(member(f, q, 10_000), Ok(Verdict::In(_)))
}

fn unit_dcc() -> AtomShape {
    AtomShape {
        max_params: 2,
        max_monomials: 2,
        numerator: 3,
        max_denominator: 1,
        signs: Signs::Negative,
        base: (1, 1),
        ..AtomShape::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn closure_is_idempotent(seed in any::<u64>()) {
        let f = random_family(&mut rng(seed), &AtomShape::default(), 2);
        let c = closure(&f);
        let cc = closure(&c);
        prop_assert_eq!(values(&cc, &window(), 15), values(&c, &window(), 15));
        for v in values(&f, &window(), 8) {
            prop_assert!(is_in(&c, &v));
        }
    }

    #[test]
    fn derived_levels_are_nested(seed in any::<u64>()) {
        let f = random_family(&mut rng(seed), &AtomShape::default(), 2);
        let mut prev = closure(&f);
        for k in 1..=3 {
            let d = derived_set_checked(&f, k);
            if !d.exact {
                break;
            }
            for p in values(&d.family, &window(), 6).into_iter().take(50) {
                prop_assert!(
                    !matches!(member(&prev, &p, 10_000), Ok(Verdict::Out)),
                    "level {} point {} outside level {}", k, p, k - 1
                );
            }
            prev = d.family;
        }
    }

    #[test]
    fn derived_points_are_limits(seed in any::<u64>()) {
        let a = random_atom(&mut rng(seed), &AtomShape { max_params: 2, ..AtomShape::default() });
        let f = SetFamily::single(a);
        let d = derived_once(&f);
        prop_assume!(d.exact);
        for p in values(&d.family, &window(), 6).into_iter().take(6) {
            let near = Interval::around(&p, &rat(1, 20));
            let others = values(&f, &near, 400).into_iter().filter(|v| *v != p).count();
            prop_assert!(others >= 2, "no points of F near {}", p);
        }
    }

    #[test]
    fn finite_sums_contain_the_family(seed in any::<u64>()) {
        let f = clip(&SetFamily::single(random_atom(&mut rng(seed), &unit_dcc())), &int(0), &int(1));
        let g = match min_positive_element(&f) {
            Ok(Some(g)) if g >= rat(1, 4) => g,
            _ => return Ok(()),
        };
        let plus = gamma_plus(&f).unwrap();
        let unit = Interval::new(int(0), int(1)).unwrap();
        prop_assert!(is_in(&plus, &int(0)));
        let vs = values(&f, &unit, 6);
        for x in &vs {
            prop_assert!(is_in(&plus, x));
            for y in &vs {
                let s = x + y;
                if s <= int(1) {
                    prop_assert!(is_in(&plus, &s), "{} + {} missing", x, y);
                }
            }
        }
        for v in values(&plus, &unit, 30) {
            prop_assert!(v >= int(0) && v <= int(1));
            prop_assert!(v == int(0) || v >= g);
        }
    }

    #[test]
    fn quotient_law_of_n0(seed in any::<u64>()) {
        let f = clip(&SetFamily::single(random_atom(&mut rng(seed), &unit_dcc())), &int(0), &int(1));
        if !matches!(min_positive_element(&f), Ok(Some(g)) if g >= rat(1, 4)) {
            return Ok(());
        }
        let plus = gamma_plus(&f).unwrap();
        let q = n0(&f).unwrap();
        let unit = Interval::new(int(0), int(1)).unwrap();
        prop_assert!(is_in(&q, &int(0)));
        for g in values(&plus, &unit, 6).into_iter().take(6) {
            for n in 1..=4 {
                let v = (int(1) - &g) / int(n);
                prop_assert!(is_in(&q, &v), "(1 - {})/{} missing", g, n);
            }
        }
    }
}

#[test]
fn derived_set_examples() {
    let f = fam("fam(0; 1/n[1] + 1/m[1])");
    let d1 = derived_set_checked(&f, 1);
    assert!(d1.exact);
    let w = Interval::new(rat(-1, 2), rat(5, 2)).unwrap();
    let mut want = vec![int(0)];
    want.extend((1..=30).map(|n| rat(1, n)));
    want.sort();
    assert_eq!(values(&d1.family, &w, 30), want);
    assert_eq!(derived_set(&f, 2).normalized(), SetFamily::finite([int(0)]));
    assert_eq!(derived_set(&f, 3).normalized(), SetFamily::empty());
    let fin = SetFamily::finite([int(1), rat(1, 2)]);
    assert_eq!(derived_set(&fin, 1).normalized(), SetFamily::empty());
    let c = certify(&fin);
    assert_eq!((c.verdict, c.depth), (CertVerdict::Standardized, 1));
}

#[test]
fn chain_condition_examples() {
    let below = fam("fam(1; -3/n[1])");
    assert_eq!(is_dcc(&below), Ok(true));
    assert_eq!(is_acc(&below), Ok(false));
    let h = fam("fam(0; 1/n[1])");
    assert_eq!(is_acc(&h), Ok(true));
    assert_eq!(is_dcc(&h), Ok(false));
    assert_eq!(is_acc(&fam("fam(0; 1/n[1] - 1/m[1])")), Ok(false));
    assert_eq!(is_dcc(&fam("fam(0; 1/n[1] - 1/m[1])")), Ok(false));
    assert_eq!(is_acc(&SetFamily::finite([int(3)])), Ok(true));
}

#[test]
fn second_order_limit_is_not_standardized_but_the_set_is() {
    let f = fam("fam(0; 1/n[1] + 1/m[1])");
    assert!(matches!(standardized_near(&f, &int(0)), Near::No(_)));
    assert!(matches!(standardized_near(&f, &rat(1, 3)), Near::Standardized(_)));
    let c = certify(&f);
    assert_eq!((c.verdict, c.depth), (CertVerdict::Standardized, 3));
}

#[test]
fn witness_covers_nearby_points() {
    let g = stdsets::geomsets::gamma16();
    let Near::Standardized(w) = standardized_near(&g, &rat(5, 6)) else { panic!() };
    let near = Interval::around(&rat(5, 6), &w.eps);
    for v in values(&g, &near, 500) {
        assert!(w.covers(&v), "{v}");
    }
}
