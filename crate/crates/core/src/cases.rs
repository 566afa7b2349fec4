//! Reproducible checks of the worked examples: exact identities, certificates
//! and oracle comparisons, grouped by the example they come from.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num::{BigInt, One, Zero};

use crate::derived::{certify, derived_set_checked, standardized_near, CertVerdict, Near};
use crate::geomsets::{self, ct3_branch, diag_lct, gamma16, ht2_branch, kmoduli_walls, Generator};
use crate::oracle::{
    cross_check_derived, detect_accumulation, enumerate, fit_standardized, Cluster, FitVerdict, Source,
    DEFAULT_NUMERATOR_BOUND,
};
use crate::setfam::{int, member, rat, Atom, Interval, Rational, SetFamily, Verdict};
use crate::setops::{dgamma, gamma_plus, hyperstandard, n0, quotient_by_n, standard_set, sum, union};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Case {
    Ex14,
    Ex15,
    Ex16,
    Lem28,
    Thm17,
    Walls,
}

impl Case {
    pub const ALL: [Case; 6] = [Case::Ex14, Case::Ex15, Case::Ex16, Case::Lem28, Case::Thm17, Case::Walls];

    pub fn name(self) -> &'static str {
        match self {
            Case::Ex14 => "ex14",
            Case::Ex15 => "ex15",
            Case::Ex16 => "ex16",
            Case::Lem28 => "lem28",
            Case::Thm17 => "thm17",
            Case::Walls => "walls",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Case::ALL.iter().copied().find(|c| c.name() == s).ok_or_else(|| format!("unknown case `{s}`"))
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct CaseReport {
    pub case: Case,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl CaseReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(name: &str, r: Result<String, String>) -> Check {
    match r {
        Ok(detail) => Check { name: name.into(), pass: true, detail },
        Err(detail) => Check { name: name.into(), pass: false, detail },
    }
}

fn is_in(f: &SetFamily, q: &Rational) -> bool {
    matches!(member(f, q, 10_000), Ok(Verdict::In(_)))
}

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

fn frac(n: u64, d: u64) -> Rational {
    Rational::new(big(n), big(d))
}

fn atom_at(f: &SetFamily, id: &str, n: u64) -> Option<Rational> {
    match &f.atoms[0] {
        Atom::Finite(v) => v.first().cloned(),
        a => a.eval_ids(&[(id.to_string(), n)]),
    }
}

/// `(5n+m)/(6n+m) = 5/6 + m/(36n+6m)` against the branch atoms of `gamma16`.
pub fn gamma16_identity(n_max: u64) -> Result<u64, String> {
    let g = gamma16();
    let five_sixths = rat(5, 6);
    let mut count = 0;
    for m in 1..=5u64 {
        let atom = &g.atoms[(m - 1) as usize];
        for n in 1..=n_max {
            let direct = frac(5 * n + m, 6 * n + m);
            let rewrite = &five_sixths + frac(m, 36 * n + 6 * m);
            let got = atom.eval_ids(&[("n".into(), n)]);
            if direct != rewrite || got.as_ref() != Some(&direct) {
                return Err(format!("m = {m}, n = {n}: {direct} vs {rewrite} vs {got:?}"));
            }
            count += 1;
        }
    }
    Ok(count)
}

/// `(c1+c2)/(c1c2 + a1c2 + a2c1) = 1/k + (c2(k−a1)/k)/(k c1 + a1 c2)` with `a2 = k − c2`.
pub fn ht2_branch_identity(k_max: u64, c1_max: u64) -> Result<u64, String> {
    let mut count = 0;
    for k in 1..=k_max {
        for a1 in 0..=k {
            for c2 in 0..=k {
                let a2 = k - c2;
                let fam = ht2_branch(a1, a2, c2).map_err(|e| e.to_string())?;
                let coeff = frac(c2 * (k - a1), k);
                for c1 in 1..=c1_max {
                    let direct = frac(c1 + c2, c1 * c2 + a1 * c2 + a2 * c1);
                    let rewrite = frac(1, k) + &coeff / Rational::from_integer(big(k * c1 + a1 * c2));
                    let got = atom_at(&fam, "c1", c1);
                    if direct != rewrite || got.as_ref() != Some(&direct) {
                        return Err(format!("k = {k}, a1 = {a1}, c2 = {c2}, c1 = {c1}: {direct} vs {rewrite}"));
                    }
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// `a/(ka − I') = 1/k + I'/(k(ka − I'))` against `ct3_branch`, for `ka − I' >= 1`.
pub fn ct3_identity(k_max: u64, i_max: u64, a_max: u64) -> Result<u64, String> {
    let mut count = 0;
    for k in 2..=k_max {
        for ip in 1..=i_max {
            let fam = ct3_branch(k, ip).map_err(|e| e.to_string())?;
            let par = match &fam.atoms[0] {
                Atom::Poly(p) => p.params()[0].clone(),
                Atom::Finite(_) => return Err(format!("k = {k}, I' = {ip}: finite branch")),
            };
            for a in 1..=a_max {
                if k * a < ip + 1 {
                    continue;
                }
                let den = k * a - ip;
                let direct = frac(a, den);
                let rewrite = frac(1, k) + frac(ip, k * den);
                let idx = par.index_of_value(&big(den));
                let got = idx.and_then(|n| fam.atoms[0].eval_ids(&[("a".into(), n)]));
                if direct != rewrite || got.as_ref() != Some(&direct) {
                    return Err(format!("k = {k}, I' = {ip}, a = {a}: {direct} vs {rewrite} vs {got:?}"));
                }
                count += 1;
            }
        }
    }
    Ok(count)
}

/// `∂ ct3_branch(k, I') = {1/k}` for all `2 <= k <= k_max`, `I' <= i_max`.
pub fn ct3_derived(k_max: u64, i_max: u64) -> Result<u64, String> {
    let mut count = 0;
    for k in 2..=k_max {
        for ip in 1..=i_max {
            let fam = ct3_branch(k, ip).map_err(|e| e.to_string())?;
            let d = derived_set_checked(&fam, 1);
            let want = SetFamily::finite([frac(1, k)]);
            if !d.exact || d.family.normalized() != want {
                return Err(format!("k = {k}, I' = {ip}: derived set {:?}", d.family));
            }
            count += 1;
        }
    }
    Ok(count)
}

/// Clusters of the plane lct set on `[1/5, 1]`, and whether each contains
/// exactly one of `1/2, 1/3, 1/4, 1/5` with every one of them covered.
pub fn ht2_clusters(cap: u64, resolution: &Rational) -> (Vec<Cluster>, Result<String, String>) {
    let w = Interval::new(rat(1, 5), int(1)).expect("window");
    let s = enumerate(Source::Generator(&Generator::Ht2), &w, cap);
    let clusters = detect_accumulation(&s, resolution);
    let targets: Vec<Rational> = (2..=5).map(|k| rat(1, k)).collect();
    let mut covered = vec![false; targets.len()];
    for c in &clusters {
        let inside: Vec<usize> = (0..targets.len()).filter(|&i| c.interval.contains(&targets[i])).collect();
        if inside.len() != 1 {
            return (clusters.clone(), Err(format!("cluster {} contains {} targets", c.interval, inside.len())));
        }
        covered[inside[0]] = true;
    }
    if let Some(i) = covered.iter().position(|c| !c) {
        return (clusters, Err(format!("{} not covered", targets[i])));
    }
    let detail = format!("{} values, {} clusters", s.values.len(), clusters.len());
    (clusters, Ok(detail))
}

fn depth_of(f: &SetFamily, want: usize) -> Result<String, String> {
    let c = certify(f);
    match c.verdict {
        CertVerdict::Standardized if c.depth == want => Ok(format!("standardized, depth {want}")),
        v => Err(format!("{v:?}, depth {}", c.depth)),
    }
}

fn standardized(f: &SetFamily) -> Result<String, String> {
    let c = certify(f);
    match c.verdict {
        CertVerdict::Standardized => Ok(format!("standardized, depth {}", c.depth)),
        v => Err(format!("{v:?}")),
    }
}

fn same_values(f: &SetFamily, g: &SetFamily, w: &Interval, cap: u64) -> Result<String, String> {
    let a = enumerate(Source::Family(f), w, cap).values;
    let b = enumerate(Source::Family(g), w, cap).values;
    if a == b {
        Ok(format!("{} values agree on {w}", a.len()))
    } else {
        let diff = a.iter().find(|x| !b.contains(x)).or_else(|| b.iter().find(|x| !a.contains(x)));
        Err(format!("differ at {diff:?}"))
    }
}

fn ok_if(cond: bool, yes: impl Into<String>, no: impl Into<String>) -> Result<String, String> {
    if cond {
        Ok(yes.into())
    } else {
        Err(no.into())
    }
}

fn ex14() -> Vec<Check> {
    let mut out = Vec::new();
    let d2 = diag_lct(2).expect("diag");
    out.push(check("5/6 in diag(2)", ok_if(is_in(&d2, &rat(5, 6)), "1/2 + 1/3", "not found")));
    let d1 = diag_lct(1).expect("diag");
    let w = Interval::new(rat(1, 50), int(1)).expect("window");
    out.push(check("diag(1) equals ht1 without 0", same_values(&d1, &geomsets::ht1(), &w, 100)));
    for d in 1..=3usize {
        let f = diag_lct(d).expect("diag");
        out.push(check(&format!("certify diag({d}) depth {}", d + 1), depth_of(&f, d + 1)));
    }
    let w = Interval::new(rat(1, 10), int(1)).expect("window");
    let r = cross_check_derived(&d2, &w, 300, &crate::oracle::default_resolution());
    out.push(check(
        "oracle agrees with the derived set of diag(2)",
        ok_if(r.agrees(), format!("{} limit points matched", r.matched.len()), format!("{r:?}")),
    ));
    out
}

fn ex15() -> Vec<Check> {
    let mut out = Vec::new();
    out.push(check(
        "plane formula at (0,0,2,3)",
        ok_if(geomsets::ht2_value(0, 0, 2, 3) == Some(rat(5, 6)), "5/6", "wrong value"),
    ));
    let w = Interval::new(rat(1, 2), int(1)).expect("window");
    let s = enumerate(Source::Generator(&Generator::Ht2), &w, 10);
    out.push(check(
        "enumeration contains 2/3 and 5/6",
        ok_if(s.values.contains(&rat(2, 3)) && s.values.contains(&rat(5, 6)), "both present", "missing"),
    ));
    out.push(check(
        "branch identity, k <= 6, c1 <= 10^4",
        ht2_branch_identity(6, 10_000).map(|n| format!("{n} cases")),
    ));
    out.push(check("accumulation points on [1/5, 1]", ht2_clusters(50, &crate::oracle::default_resolution()).1));
    let w = Interval::new(Rational::zero(), int(1)).expect("window");
    out.push(check("ht1 and ct2 agree", same_values(&geomsets::ht1(), &geomsets::ct2(), &w, 200)));
    let near = Interval::new(rat(10, 21), rat(11, 20)).expect("window");
    let s = enumerate(Source::Generator(&Generator::Ht2), &near, 40);
    let mut branches = Vec::new();
    for c2 in 0..=2 {
        for a1 in 0..=2 {
            if let Ok(b) = ht2_branch(a1, 2 - c2, c2) {
                branches.push(b);
            }
        }
    }
    let inner = s.values.iter().filter(|v| **v != near.lo && **v != near.hi);
    let uncovered = inner.clone().find(|v| !branches.iter().any(|b| is_in(b, v)));
    out.push(check(
        "values in (10/21, 11/20) lie on branches with k = 2",
        ok_if(uncovered.is_none(), format!("{} values covered", inner.count()), format!("{uncovered:?} uncovered")),
    ));
    out
}

fn ex16() -> Vec<Check> {
    let mut out = Vec::new();
    out.push(check("rewrite identity, n <= 10^5", gamma16_identity(100_000).map(|n| format!("{n} cases"))));
    let g = gamma16();
    out.push(check("6/7 is an element", ok_if(is_in(&g, &rat(6, 7)), "m = 1, n = 1", "not found")));
    let c = certify(&g);
    let d = derived_set_checked(&g, 1);
    out.push(check(
        "standardized with accumulation point 5/6 only",
        ok_if(
            c.verdict == CertVerdict::Standardized && d.family.normalized() == SetFamily::finite([rat(5, 6)]),
            format!("depth {}", c.depth),
            format!("{:?}", c.verdict),
        ),
    ));
    out.push(check(
        "standardized near 5/6",
        match standardized_near(&g, &rat(5, 6)) {
            Near::Standardized(w) => Ok(format!("{} coefficients, I = {}", w.coeffs.len(), w.i)),
            other => Err(format!("{other:?}")),
        },
    ));
    let w = Interval::new(rat(5, 6), int(1)).expect("window");
    let s = enumerate(Source::Family(&g), &w, 50);
    out.push(check(
        "fit near 5/6",
        match fit_standardized(&s, &rat(5, 6), DEFAULT_NUMERATOR_BOUND).verdict {
            FitVerdict::Consistent { i, .. } => Ok(format!("consistent, I = {i}")),
            v => Err(format!("{v:?}")),
        },
    ));
    out
}

fn lem28() -> Vec<Check> {
    let mut out = Vec::new();
    let unit = Interval::new(Rational::zero(), int(1)).expect("window");
    let third = SetFamily::finite([rat(1, 3)]);
    out.push(check(
        "finite sums of {1/3}",
        match gamma_plus(&third) {
            Ok(f) => ok_if(
                f.normalized() == SetFamily::finite([int(0), rat(1, 3), rat(2, 3), int(1)]).with_clip(unit.clone()),
                "{0, 1/3, 2/3, 1}",
                format!("{f:?}"),
            ),
            Err(e) => Err(e.to_string()),
        },
    ));
    let zero_one = SetFamily::finite([int(0), int(1)]);
    let w = Interval::new(rat(1, 100), int(1)).expect("window");
    out.push(check(
        "D({0, 1}) is the standard set",
        match dgamma(&zero_one) {
            Ok(f) => same_values(&f, &standard_set(), &w, 200),
            Err(e) => Err(e.to_string()),
        },
    ));
    out.push(check(
        "N0({0, 1}) is the lct set of the line",
        match n0(&zero_one) {
            Ok(f) => same_values(&f, &geomsets::ht1(), &unit, 200),
            Err(e) => Err(e.to_string()),
        },
    ));
    let half = SetFamily::finite([int(0), rat(1, 2), int(1)]);
    let inputs = [("{0, 1}", zero_one.clone()), ("{0, 1/2, 1}", half), ("standard set", standard_set())];
    for (name, f) in inputs.iter() {
        for (op, g) in
            [("plus", gamma_plus(f)), ("D", dgamma(f)), ("N0", n0(f)), ("quot", quotient_by_n(f)), ("sum", sum(f, f))]
        {
            let r = match g {
                Ok(g) => standardized(&g),
                Err(e) => Err(e.to_string()),
            };
            out.push(check(&format!("{op}({name}) standardized"), r));
        }
    }
    out
}

fn thm17() -> Vec<Check> {
    vec![
        check("branch identity, k, I' <= 10, a <= 10^4", ct3_identity(10, 10, 10_000).map(|n| format!("{n} cases"))),
        check("derived set of each branch is {1/k}", ct3_derived(10, 10).map(|n| format!("{n} branches"))),
        check(
            "branch (2, 1) at a = 3",
            ok_if(is_in(&ct3_branch(2, 1).expect("branch"), &rat(3, 5)), "3/5 = 1/2 + 1/10", "not found"),
        ),
        check(
            "union with ct(2) standardized",
            match union(&ct3_branch(2, 1).expect("branch"), &geomsets::ct2()) {
                Ok(f) => standardized(&f),
                Err(e) => Err(e.to_string()),
            },
        ),
    ]
}

fn walls() -> Vec<Check> {
    let w = kmoduli_walls();
    let vals: Vec<Rational> = match &w.atoms[0] {
        Atom::Finite(v) => v.clone(),
        Atom::Poly(_) => Vec::new(),
    };
    let h = hyperstandard(&[int(0), int(1), int(4)]).expect("hyperstandard");
    let outside = vals.iter().find(|v| !is_in(&h, v));
    vec![
        check(
            "nine walls, largest 9/11",
            ok_if(vals.len() == 9 && vals.last() == Some(&rat(9, 11)), "9 walls", format!("{vals:?}")),
        ),
        check(
            "walls lie in the hyperstandard set of {0, 1, 4}",
            ok_if(outside.is_none(), "all contained", format!("{outside:?} outside")),
        ),
        check("hyperstandard set of {0, 1, 4} has depth 2", depth_of(&h, 2)),
        check(
            "accumulates only at 1",
            ok_if(
                derived_set_checked(&h, 1).family.normalized()
                    == SetFamily::finite([Rational::one()])
                        .with_clip(Interval::new(Rational::zero(), Rational::one()).expect("unit")),
                "derived set {1}",
                "unexpected derived set",
            ),
        ),
    ]
}

/// Runs every check of one case.
pub fn run(case: Case) -> CaseReport {
    let t = Instant::now();
    let checks = match case {
        Case::Ex14 => ex14(),
        Case::Ex15 => ex15(),
        Case::Ex16 => ex16(),
        Case::Lem28 => lem28(),
        Case::Thm17 => thm17(),
        Case::Walls => walls(),
    };
    CaseReport { case, checks, elapsed: t.elapsed() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_on_small_ranges() {
        assert_eq!(gamma16_identity(20), Ok(100));
        assert!(ht2_branch_identity(3, 20).is_ok());
        assert!(ct3_identity(4, 4, 50).is_ok());
        assert!(ct3_derived(4, 3).is_ok());
    }

    #[test]
    fn names_round_trip() {
        for c in Case::ALL {
            assert_eq!(c.name().parse::<Case>(), Ok(c));
        }
        assert!("ex99".parse::<Case>().is_err());
    }
}
