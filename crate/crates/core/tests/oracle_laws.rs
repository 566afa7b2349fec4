use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stdsets::oracle::*;
use stdsets::random::{random_atom, random_family, AtomShape};
use stdsets::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn window() -> Interval {
    Interval::new(int(-2), int(2)).unwrap()
}

fn fam(text: &str) -> SetFamily {
    stdsets::dsl::evaluate(text).unwrap().family().unwrap().clone()
}

fn sample(values: Vec<Rational>) -> Sample {
    let mut values = values;
    values.sort();
    values.dedup();
    Sample { values, window: Interval::new(int(-1), int(1)).unwrap(), cap: 200, exhaustive: false }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn enumeration_is_deterministic(seed in any::<u64>()) {
        let f = random_family(&mut rng(seed), &AtomShape::default(), 2);
        let a = enumerate(Source::Family(&f), &window(), 40);
        let b = enumerate(Source::Family(&f), &window(), 40);
        prop_assert_eq!(&a, &b);
        let res = default_resolution();
        prop_assert_eq!(detect_accumulation(&a, &res), detect_accumulation(&b, &res));
    }

    #[test]
    fn one_parameter_enumeration_matches_direct_evaluation(seed in any::<u64>()) {
        let shape = AtomShape { max_params: 1, ..AtomShape::default() };
        let a = random_atom(&mut rng(seed), &shape);
        let Atom::Poly(p) = &a else { return Ok(()) };
        let min = p.params()[0].min;
        let w = window();
        let mut direct: Vec<Rational> =
            (min..min + 50).map(|n| p.eval(&[n])).filter(|v| w.contains(v)).collect();
        direct.sort();
        direct.dedup();
        let got = enumerate(Source::Family(&SetFamily::single(a.clone())), &w, 50);
        prop_assert_eq!(got.values, direct);
    }

    #[test]
    fn enumeration_grows_with_cap(seed in any::<u64>()) {
        let f = random_family(&mut rng(seed), &AtomShape::default(), 2);
        let small = enumerate(Source::Family(&f), &window(), 10).values;
        let large = enumerate(Source::Family(&f), &window(), 30).values;
        prop_assert!(small.iter().all(|v| large.binary_search(v).is_ok()));
        prop_assert!(large.iter().all(|v| window().contains(v)));
    }
}

#[test]
fn harmonic_sample_fits() {
    let s = sample((1..=200).map(|n| rat(1, n)).collect());
    let r = fit_standardized(&s, &int(0), 1);
    match r.verdict {
        FitVerdict::Consistent { i, coeffs } => {
            assert_eq!(i, 1.into());
            assert_eq!(coeffs, vec![1.into()]);
        }
        v => panic!("{v:?}"),
    }
}

#[test]
fn quadratic_sample_does_not_fit() {
    let s = sample((1..=200).map(|n| rat(n, n * n + 1)).collect());
    let r = fit_standardized(&s, &int(0), 1);
    match r.verdict {
        FitVerdict::Inconsistent { evidence } => {
            assert!(evidence.numer() > &1.into());
            assert!(s.values.contains(&evidence));
        }
        v => panic!("{v:?}"),
    }
}

#[test]
fn sparse_sample_is_insufficient() {
    let s = sample(vec![rat(1, 2), rat(1, 3)]);
    assert_eq!(fit_standardized(&s, &int(0), 1).verdict, FitVerdict::Insufficient);
}

#[test]
fn harmonic_cluster_contains_the_limit() {
    let f = fam("fam(1/2; 1/n[1])");
    let s = enumerate(Source::Family(&f), &window(), 300);
    let cs = detect_accumulation(&s, &default_resolution());
    assert!(cs.iter().any(|c| c.interval.contains(&rat(1, 2))));
    let fin = enumerate(Source::Family(&SetFamily::finite([int(0), int(1)])), &window(), 300);
    assert!(detect_accumulation(&fin, &default_resolution()).is_empty());
}

#[test]
fn cross_check_examples() {
    let res = default_resolution();
    for text in ["fam(0; 1/n[1] + 1/m[1])", "fam(1; -1/n[1])", "diag(2)", "{1, 1/2}", "g16()"] {
        let r = cross_check_derived(&fam(text), &window(), 300, &res);
        assert!(r.exact, "{text}");
        assert!(r.agrees(), "{text}: {r:?}");
    }
    let r = cross_check_derived(&fam("fam(0; 1/n[1])"), &window(), 300, &res);
    assert_eq!(r.matched, vec![int(0)]);
}
