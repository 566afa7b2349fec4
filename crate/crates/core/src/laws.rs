//! Structural laws of standardized sets as executable checks, and a seeded
//! suite running each law on random certified inputs.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::derived::{certify, closure, derived_set, is_acc, is_dcc, standardized_near, CertVerdict, Near};
use crate::oracle::{enumerate, Source};
use crate::random::{random_atom, random_family, random_rational, AtomShape, Signs};
use crate::setfam::{int, rat, Interval, Rational, SetFamily};
use crate::setops::{clip, dgamma, gamma_plus, min_positive_element, quotient_by_n, scale, sum, translate, union};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Fails(String),
    Unknown(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class {
    Yes,
    No,
    Unknown,
}

fn class(n: &Near) -> Class {
    match n {
        Near::Standardized(_) => Class::Yes,
        Near::No(_) => Class::No,
        Near::Unknown(_) => Class::Unknown,
    }
}

fn same(a: Class, b: Class, what: impl FnOnce() -> String) -> Outcome {
    match (a, b) {
        (Class::Unknown, _) | (_, Class::Unknown) => Outcome::Unknown(what()),
        _ if a == b => Outcome::Holds,
        _ => Outcome::Fails(format!("{}: {a:?} vs {b:?}", what())),
    }
}

/// Verdict near `g0` is unchanged by translating the family and the point by `a`.
pub fn translation_law(f: &SetFamily, g0: &Rational, a: &Rational) -> Outcome {
    let l = class(&standardized_near(f, g0));
    let r = class(&standardized_near(&translate(f, a), &(g0 + a)));
    same(l, r, || format!("translate by {a} near {g0}"))
}

/// Verdict near `g0` is unchanged by scaling the family and the point by `c != 0`.
pub fn scaling_law(f: &SetFamily, g0: &Rational, c: &Rational) -> Outcome {
    let g = match scale(f, c) {
        Ok(g) => g,
        Err(e) => return Outcome::Fails(e.to_string()),
    };
    let l = class(&standardized_near(f, g0));
    let r = class(&standardized_near(&g, &(g0 * c)));
    same(l, r, || format!("scale by {c} near {g0}"))
}

/// A union is standardized near `g0` exactly when both parts are.
pub fn union_law(f: &SetFamily, g: &SetFamily, g0: &Rational) -> Outcome {
    let u = match union(f, g) {
        Ok(u) => u,
        Err(e) => return Outcome::Unknown(e.to_string()),
    };
    let a = class(&standardized_near(f, g0));
    let b = class(&standardized_near(g, g0));
    let both = match (a, b) {
        (Class::Yes, Class::Yes) => Class::Yes,
        (Class::No, _) | (_, Class::No) => Class::No,
        _ => Class::Unknown,
    };
    same(class(&standardized_near(&u, g0)), both, || format!("union near {g0}"))
}

/// The verdict near `g0` is the same for a family and its closure.
pub fn closure_law(f: &SetFamily, g0: &Rational) -> Outcome {
    let l = class(&standardized_near(f, g0));
    let r = class(&standardized_near(&closure(f), g0));
    same(l, r, || format!("closure near {g0}"))
}

fn certifies(f: &SetFamily, what: &str) -> Outcome {
    match certify(f).verdict {
        CertVerdict::Standardized => Outcome::Holds,
        CertVerdict::NotStandardized { k, gamma0 } => Outcome::Fails(format!("{what}: level {k} fails near {gamma0}")),
        CertVerdict::Unknown(r) => Outcome::Unknown(format!("{what}: {r}")),
    }
}

fn built(r: Result<SetFamily, crate::setops::OpError>, what: &str) -> Result<SetFamily, Outcome> {
    r.map_err(|e| Outcome::Unknown(format!("{what}: {e}")))
}

/// The union of two standardized families is standardized.
pub fn union_certifies(f: &SetFamily, g: &SetFamily) -> Outcome {
    match built(union(f, g), "union") {
        Ok(u) => certifies(&u, "union"),
        Err(o) => o,
    }
}

/// The sum of two standardized DCC families is standardized.
pub fn sum_certifies(f: &SetFamily, g: &SetFamily) -> Outcome {
    match built(sum(f, g), "sum") {
        Ok(u) => certifies(&u, "sum"),
        Err(o) => o,
    }
}

/// `Γ₊` of a standardized DCC family in `[0, 1]` is standardized.
pub fn plus_certifies(f: &SetFamily) -> Outcome {
    match built(gamma_plus(f), "plus") {
        Ok(u) => certifies(&u, "plus"),
        Err(o) => o,
    }
}

/// `D(Γ)` of a standardized DCC family in `[0, 1]` is standardized.
pub fn dgamma_certifies(f: &SetFamily) -> Outcome {
    match built(dgamma(f), "D") {
        Ok(u) => certifies(&u, "D"),
        Err(o) => o,
    }
}

/// `{γ/n}` of a standardized ACC family in `[0, ∞)` is standardized.
pub fn quotient_certifies(f: &SetFamily) -> Outcome {
    match built(quotient_by_n(f), "quotient") {
        Ok(u) => certifies(&u, "quotient"),
        Err(o) => o,
    }
}

/// Counts for one law.
#[derive(Clone, Debug, Default)]
pub struct Tally {
    pub name: &'static str,
    pub holds: usize,
    pub unknown: usize,
    pub failures: Vec<String>,
    pub elapsed: Duration,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, ..Tally::default() }
    }

    fn timed(mut self, start: Instant) -> Self {
        self.elapsed = start.elapsed();
        self
    }

    fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Holds => self.holds += 1,
            Outcome::Unknown(_) => self.unknown += 1,
            Outcome::Fails(d) => self.failures.push(d),
        }
    }

    pub fn total(&self) -> usize {
        self.holds + self.unknown + self.failures.len()
    }

    pub fn unknown_rate(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            self.unknown as f64 / self.total() as f64
        }
    }
}

const ATTEMPTS: usize = 50;

fn is_standardized(f: &SetFamily) -> bool {
    certify(f).verdict == CertVerdict::Standardized
}

fn pick<R: Rng>(rng: &mut R, gen: impl Fn(&mut R) -> SetFamily, ok: impl Fn(&SetFamily) -> bool) -> Option<SetFamily> {
    (0..ATTEMPTS).map(|_| gen(rng)).find(|f| ok(f))
}

fn values_near(f: &SetFamily, cap: u64) -> Vec<Rational> {
    let w = Interval::new(int(-8), int(8)).expect("window");
    enumerate(Source::Family(f), &w, cap).values
}

/// Points where the verdict is interesting: limit points of the first two
/// levels, an element and an arbitrary rational.
fn probe<R: Rng>(rng: &mut R, f: &SetFamily) -> Rational {
    let mut pts = values_near(&derived_set(f, 2), 2);
    pts.extend(values_near(&derived_set(f, 1), 3));
    pts.extend(values_near(f, 2).into_iter().take(2));
    pts.push(random_rational(rng, 8, 6));
    pts.choose(rng).cloned().expect("nonempty")
}

fn nonzero<R: Rng>(rng: &mut R) -> Rational {
    loop {
        let c = random_rational(rng, 5, 4);
        if c != int(0) {
            return c;
        }
    }
}

/// Runs every law on `cases` random inputs each.
pub fn run_suite(seed: u64, cases: usize) -> Vec<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mixed = AtomShape::default();
    let dcc = AtomShape { signs: Signs::Negative, ..AtomShape::default() };
    let acc = AtomShape { signs: Signs::Positive, base: (0, 2), ..AtomShape::default() };
    let unit = AtomShape {
        max_params: 2,
        max_monomials: 2,
        numerator: 3,
        max_denominator: 1,
        signs: Signs::Negative,
        base: (1, 1),
        ..AtomShape::default()
    };
    let certified = |rng: &mut ChaCha8Rng| pick(rng, |r| random_family(r, &mixed, 2), is_standardized);
    let dcc_family = |rng: &mut ChaCha8Rng| {
        pick(rng, |r| random_family(r, &dcc, 2), |f| is_dcc(f) == Ok(true) && is_standardized(f))
    };
    let acc_family = |rng: &mut ChaCha8Rng| {
        pick(rng, |r| SetFamily::single(random_atom(r, &acc)), |f| is_acc(f) == Ok(true) && is_standardized(f))
    };
    let unit_family = |rng: &mut ChaCha8Rng| {
        pick(
            rng,
            |r| clip(&SetFamily::single(random_atom(r, &unit)), &int(0), &int(1)),
            |f| {
                matches!(min_positive_element(f), Ok(Some(g)) if g >= rat(1, 4))
                    && is_dcc(f) == Ok(true)
                    && is_standardized(f)
            },
        )
    };
    let missing = |t: &mut Tally| t.failures.push("no certified input found".into());

    let mut out = Vec::new();
    let start = Instant::now();
    let mut t = Tally::new("translation invariance");
    for _ in 0..cases {
        match certified(&mut rng) {
            Some(f) => {
                let g0 = probe(&mut rng, &f);
                let a = random_rational(&mut rng, 5, 4);
                t.add(translation_law(&f, &g0, &a));
            }
            None => missing(&mut t),
        }
    }
    out.push(t.timed(start));
    let start = Instant::now();
    let mut t = Tally::new("scale invariance");
    for _ in 0..cases {
        match certified(&mut rng) {
            Some(f) => {
                let g0 = probe(&mut rng, &f);
                let c = nonzero(&mut rng);
                t.add(scaling_law(&f, &g0, &c));
            }
            None => missing(&mut t),
        }
    }
    out.push(t.timed(start));
    let start = Instant::now();
    let mut t = Tally::new("union law");
    for _ in 0..cases {
        match (certified(&mut rng), certified(&mut rng)) {
            (Some(f), Some(g)) => {
                let g0 = if rng.gen_bool(0.5) { probe(&mut rng, &f) } else { probe(&mut rng, &g) };
                t.add(union_law(&f, &g, &g0));
            }
            _ => missing(&mut t),
        }
    }
    out.push(t.timed(start));
    let start = Instant::now();
    let mut t = Tally::new("closure law");
    for _ in 0..cases {
        match certified(&mut rng) {
            Some(f) => {
                let g0 = probe(&mut rng, &f);
                t.add(closure_law(&f, &g0));
            }
            None => missing(&mut t),
        }
    }
    out.push(t.timed(start));
    let start = Instant::now();
    let mut t = Tally::new("union certifies");
    for _ in 0..cases {
        match (certified(&mut rng), certified(&mut rng)) {
            (Some(f), Some(g)) => t.add(union_certifies(&f, &g)),
            _ => missing(&mut t),
        }
    }
    out.push(t.timed(start));
    let start = Instant::now();
    let mut t = Tally::new("sum of DCC certifies");
    for _ in 0..cases {
        match (dcc_family(&mut rng), dcc_family(&mut rng)) {
            (Some(f), Some(g)) => t.add(sum_certifies(&f, &g)),
            _ => missing(&mut t),
        }
    }
    out.push(t.timed(start));
    let start = Instant::now();
    let mut tp = Tally::new("plus certifies");
    let mut td = Tally::new("D certifies");
    for _ in 0..cases {
        match unit_family(&mut rng) {
            Some(f) => {
                tp.add(plus_certifies(&f));
                td.add(dgamma_certifies(&f));
            }
            None => {
                missing(&mut tp);
                missing(&mut td);
            }
        }
    }
    let both = start.elapsed() / 2;
    tp.elapsed = both;
    td.elapsed = both;
    out.push(tp);
    out.push(td);
    let start = Instant::now();
    let mut t = Tally::new("quotient of ACC certifies");
    for _ in 0..cases {
        match acc_family(&mut rng) {
            Some(f) => t.add(quotient_certifies(&f)),
            None => missing(&mut t),
        }
    }
    out.push(t.timed(start));
    out
}
