use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stdsets::oracle::{enumerate, Source};
use stdsets::random::{random_atom, random_family, random_rational, AtomShape};
use stdsets::setops::{clip, scale, sum, translate, union};
use stdsets::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn values(f: &SetFamily, w: &Interval, cap: u64) -> Vec<Rational> {
    enumerate(Source::Family(f), w, cap).values
}

fn window() -> Interval {
    Interval::new(int(-3), int(3)).unwrap()
}

fn two_params() -> AtomShape {
    AtomShape { max_params: 2, ..AtomShape::default() }
}

fn one_param() -> AtomShape {
    AtomShape { max_params: 1, max_monomials: 1, ..AtomShape::default() }
}

/// The same atom written with reversed monomials, one coefficient split in
/// two and an unused parameter.
fn rewritten(a: &Atom) -> Option<Atom> {
    let Atom::Poly(p) = a else { return None };
    let ids: Vec<String> = p.params().iter().map(|q| q.id.clone()).collect();
    let mut monos: Vec<(Rational, Vec<&str>)> = Vec::new();
    for m in p.monomials().iter().rev() {
        let sup: Vec<&str> = (0..ids.len()).filter(|j| m.support >> j & 1 == 1).map(|j| ids[j].as_str()).collect();
        let third = &m.coeff / int(3);
        monos.push((&m.coeff - &third, sup.clone()));
        monos.push((third, sup));
    }
    let mut params = p.params().to_vec();
    params.push(Parameter::natural("unused"));
    params.reverse();
    Some(PolyAtom::build(p.base().clone(), params, monos).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalize_is_idempotent(seed in any::<u64>()) {
        let a = random_atom(&mut rng(seed), &AtomShape::default());
        let n = normalize(&a);
        prop_assert_eq!(normalize(&n), n.clone());
        if let Atom::Poly(p) = &n {
            prop_assert!(p.monomials().iter().all(|m| m.coeff != int(0)));
            let mut sups: Vec<u64> = p.monomials().iter().map(|m| m.support).collect();
            sups.dedup();
            prop_assert_eq!(sups.len(), p.monomials().len());
            let used = p.monomials().iter().fold(0u64, |acc, m| acc | m.support);
            prop_assert_eq!(used.count_ones() as usize, p.params().len());
        }
    }

    #[test]
    fn normal_form_is_unique(seed in any::<u64>()) {
        let a = random_atom(&mut rng(seed), &two_params());
        if let Some(b) = rewritten(&a) {
            prop_assert_eq!(normalize(&a), normalize(&b));
            let (fa, fb) = (SetFamily::single(a), SetFamily::single(b));
            prop_assert_eq!(values(&fa, &window(), 200), values(&fb, &window(), 200));
        }
    }

    #[test]
    fn clip_restricts_values(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_family(&mut r, &two_params(), 2);
        let (x, y) = (random_rational(&mut r, 6, 3), random_rational(&mut r, 6, 3));
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let w = window();
        let inside: Vec<Rational> =
            values(&f, &w, 60).into_iter().filter(|v| lo <= *v && *v <= hi).collect();
        prop_assert_eq!(values(&clip(&f, &lo, &hi), &w, 60), inside);
        let (z, t) = (random_rational(&mut r, 6, 3), random_rational(&mut r, 6, 3));
        let (lo2, hi2) = if z <= t { (z, t) } else { (t, z) };
        let twice = clip(&clip(&f, &lo, &hi), &lo2, &hi2);
        let once = clip(&f, &lo.clone().max(lo2.clone()), &hi.clone().min(hi2.clone()));
        if lo.clone().max(lo2) <= hi.min(hi2) {
            prop_assert_eq!(values(&twice, &w, 60), values(&once, &w, 60));
        } else {
            prop_assert!(values(&twice, &w, 60).is_empty());
        }
    }

    #[test]
    fn translation_and_scaling_move_values(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_family(&mut r, &two_params(), 2);
        let a = random_rational(&mut r, 5, 4);
        let w = window();
        let moved: Vec<Rational> = values(&f, &w, 60).iter().map(|v| v + &a).collect();
        let wa = Interval::new(&w.lo + &a, &w.hi + &a).unwrap();
        prop_assert_eq!(values(&translate(&f, &a), &wa, 60), moved);
        let mut c = random_rational(&mut r, 5, 4);
        if c == int(0) {
            c = int(-2);
        }
        let (lo, hi) = (&w.lo * &c, &w.hi * &c);
        let wc = if lo <= hi { Interval::new(lo, hi) } else { Interval::new(hi, lo) }.unwrap();
        let mut scaled: Vec<Rational> = values(&f, &w, 60).iter().map(|v| v * &c).collect();
        scaled.sort();
        prop_assert_eq!(values(&scale(&f, &c).unwrap(), &wc, 60), scaled);
    }

    #[test]
    fn union_with_empty_is_identity(seed in any::<u64>()) {
        let f = random_family(&mut rng(seed), &AtomShape::default(), 3);
        let u = union(&SetFamily::empty(), &f).unwrap();
        prop_assert_eq!(u.normalized(), f.normalized());
        let v = union(&f, &SetFamily::empty()).unwrap();
        prop_assert_eq!(values(&v, &window(), 50), values(&f, &window(), 50));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn membership_is_exact_and_sound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_atom(&mut r, &two_params());
        let f = SetFamily::single(a.clone());
        let q = match (r.gen_range(0..3), &a) {
            (0, Atom::Poly(p)) => {
                let idx: Vec<u64> = p.params().iter().map(|par| par.min + r.gen_range(0..30)).collect();
                p.eval(&idx)
            }
            _ => random_rational(&mut r, 12, 12),
        };
        match member(&f, &q, 10_000).unwrap() {
            Verdict::In(w) => prop_assert_eq!(f.eval(&w), Some(q)),
            Verdict::Out => {
                if let Atom::Poly(p) = &a {
                    let k = p.params().len();
                    let top = if k == 1 { 5_000 } else { 80 };
                    let mut idx: Vec<u64> = p.params().iter().map(|par| par.min).collect();
                    loop {
                        prop_assert_ne!(p.eval(&idx), q.clone(), "missed at {:?}", idx);
                        let mut j = 0;
                        while j < k {
                            idx[j] += 1;
                            if idx[j] < p.params()[j].min + top {
                                break;
                            }
                            idx[j] = p.params()[j].min;
                            j += 1;
                        }
                        if j == k {
                            break;
                        }
                    }
                }
            }
            Verdict::Unknown(_) => {}
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sum_is_the_set_of_pairwise_sums(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_family(&mut r, &one_param(), 1);
        let g = random_family(&mut r, &one_param(), 1);
        let s = sum(&f, &g).unwrap();
        let wide = Interval::new(int(-40), int(40)).unwrap();
        let fv = values(&f, &wide, 8);
        let gv = values(&g, &wide, 40);
        for x in &fv {
            for y in gv.iter().take(8) {
                prop_assert!(matches!(member(&s, &(x + y), 10_000).unwrap(), Verdict::In(_)));
            }
        }
        for z in values(&s, &window(), 20) {
            let found = gv.iter().any(|y| matches!(member(&f, &(&z - y), 10_000), Ok(Verdict::In(_))));
            prop_assert!(found, "{} is not a pairwise sum", z);
        }
    }
}

#[test]
fn membership_examples() {
    let h =
        SetFamily::single(PolyAtom::build(int(0), vec![Parameter::natural("n")], vec![(int(1), vec!["n"])]).unwrap());
    assert!(matches!(member(&h, &rat(1, 2), 100).unwrap(), Verdict::In(w) if w.values == vec![("n".to_string(), 2)]));
    assert_eq!(member(&h, &rat(2, 5), 100).unwrap(), Verdict::Out);
    let g = stdsets::geomsets::gamma16();
    match member(&g, &rat(6, 7), 100).unwrap() {
        Verdict::In(w) => assert_eq!(g.eval(&w), Some(rat(6, 7))),
        v => panic!("{v:?}"),
    }
}

#[test]
fn cancelling_monomials_collapse() {
    let a = PolyAtom::build(int(0), vec![Parameter::natural("n")], vec![(int(1), vec!["n"]), (int(-1), vec!["n"])])
        .unwrap();
    assert_eq!(a, Atom::finite([int(0)]));
}
