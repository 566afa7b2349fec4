//! Derived sets, closures, ACC/DCC and standardization certificates.

use std::collections::HashSet;

use num::{BigInt, Integer, One, Signed, Zero};
use thiserror::Error;

use crate::scan::{touches, ScanError, Scanner};
use crate::setfam::{member, Atom, Interval, PolyAtom, Rational, SetFamily, Verdict};

/// Node budget of one local enumeration.
pub const SCAN_BUDGET: u64 = 200_000;
/// Largest number of pieces a degenerate atom may be split into.
const SPLIT_LIMIT: usize = 256;
/// Witness sample size per certificate level.
const LEVEL_SAMPLES: usize = 8;
/// Index offsets tried when searching an ACC/DCC counterexample under a clip.
const CHAIN_SEARCH: u64 = 6;
/// Window halvings tried when a local enumeration runs out of budget.
const SHRINK_RETRIES: usize = 2;
/// Node budget of one certificate witness.
const WITNESS_BUDGET: u64 = 10_000;
/// Unresolved witness points tolerated per level before sampling stops.
const WITNESS_MISSES: usize = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DerivedError {
    #[error("degenerate atom: {0}")]
    Degenerate(String),
    #[error("undecided: {0}")]
    Undecided(String),
}

/// Local description of a family near `gamma0`: inside `(gamma0 - eps,
/// gamma0 + eps)` every element is `gamma0 + b/n` for some listed `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub gamma0: Rational,
    pub eps: Rational,
    pub coeffs: Vec<Rational>,
    /// Common numerator: nearby elements lie in `{gamma0 + I/n}`.
    pub i: BigInt,
}

impl Witness {
    /// Whether `x` is covered by the witness (outside the neighbourhood
    /// everything is covered).
    pub fn covers(&self, x: &Rational) -> bool {
        if (x - &self.gamma0).abs() >= self.eps {
            return true;
        }
        let d = x - &self.gamma0;
        if d.is_zero() {
            return self.coeffs.iter().any(Zero::is_zero);
        }
        self.coeffs.iter().any(|b| {
            if b.is_zero() {
                return false;
            }
            let n = b / &d;
            n.is_integer() && n.is_positive()
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Near {
    Standardized(Witness),
    No(String),
    Unknown(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertVerdict {
    Standardized,
    NotStandardized { k: usize, gamma0: Rational },
    Unknown(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level {
    pub k: usize,
    pub family: SetFamily,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub verdict: CertVerdict,
    pub depth: usize,
    pub levels: Vec<Level>,
}

/// Exact when every atom was nondegenerate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derived {
    pub family: SetFamily,
    pub exact: bool,
}

fn zero_of(atom: &Atom) -> Result<Option<Vec<(String, u64)>>, DerivedError> {
    match atom {
        Atom::Finite(v) => Ok(v.iter().any(Zero::is_zero).then(Vec::new)),
        Atom::Poly(p) => {
            if !p.hull().meets(&Interval::point(Rational::zero())) {
                return Ok(None);
            }
            match Scanner::new(SCAN_BUDGET).scan(atom, &Interval::point(Rational::zero()), None) {
                Ok(out) => Ok(out.points.into_iter().next().map(|pt| pt.fixed)),
                Err(ScanError::Accumulation(_)) => Err(DerivedError::Degenerate(format!(
                    "coefficient of a parameter in `{atom}` vanishes infinitely often"
                ))),
                Err(ScanError::Budget) => Err(DerivedError::Degenerate(format!("zero search exhausted on `{p:?}`"))),
            }
        }
    }
}

/// Pieces covering `z` exactly once: the point itself and, for each fixed
/// coordinate in turn, the indices below and above it.
fn split_at(p: &PolyAtom, z: &[(String, u64)]) -> Vec<Atom> {
    let mut pieces = vec![p.fix_ids(z)];
    for (i, (id, n)) in z.iter().enumerate() {
        let prefix = &z[..i];
        let stem = match p.fix_ids(prefix) {
            Atom::Poly(s) => s,
            _ => continue,
        };
        let j = match stem.param_index(id) {
            Some(j) => j,
            None => continue,
        };
        for m in stem.params()[j].min..*n {
            pieces.push(stem.fix(j, m));
        }
        pieces.push(Atom::Poly(stem.raise_min(j, n + 1)));
    }
    pieces
}

/// Splits an atom into nondegenerate pieces with the same union.
pub fn split_nondegenerate(p: &PolyAtom) -> Result<Vec<Atom>, DerivedError> {
    let mut stack = vec![Atom::Poly(p.clone())];
    let mut done = Vec::new();
    let mut visited = 0usize;
    while let Some(a) = stack.pop() {
        visited += 1;
        if visited > SPLIT_LIMIT {
            return Err(DerivedError::Degenerate(format!("too many pieces splitting `{}`", Atom::Poly(p.clone()))));
        }
        let q = match &a {
            Atom::Poly(q) => q,
            Atom::Finite(_) => {
                done.push(a);
                continue;
            }
        };
        let mut zero = None;
        for j in 0..q.params().len() {
            if let Some(z) = zero_of(&q.coefficient(j))? {
                zero = Some(z);
                break;
            }
        }
        match zero {
            None => done.push(a),
            Some(z) => stack.extend(split_at(q, &z)),
        }
    }
    Ok(done)
}

fn limits_of(p: &PolyAtom, out: &mut Vec<Atom>, seen: &mut HashSet<Atom>) {
    let k = p.params().len();
    for t in 1u64..(1u64 << k) {
        let a = p.limit(t);
        if seen.insert(a.clone()) {
            out.push(a);
        }
    }
}

fn prune_outside(f: SetFamily) -> SetFamily {
    let clip = match &f.clip {
        Some(c) => c.clone(),
        None => return f,
    };
    let atoms = f.atoms.into_iter().filter(|a| a.hull().is_some_and(|h| h.meets(&clip))).collect();
    SetFamily { atoms, clip: Some(clip) }
}

/// One application of the limit construction.
pub fn derived_once(f: &SetFamily) -> Derived {
    let mut atoms = Vec::new();
    let mut seen = HashSet::new();
    let mut exact = true;
    for a in &f.atoms {
        if let Atom::Poly(p) = a {
            let pieces = match split_nondegenerate(p) {
                Ok(pieces) => pieces,
                Err(_) => {
                    exact = false;
                    vec![a.clone()]
                }
            };
            for piece in &pieces {
                if let Atom::Poly(q) = piece {
                    limits_of(q, &mut atoms, &mut seen);
                }
            }
        }
    }
    let family = prune_outside(SetFamily { atoms, clip: f.clip.clone() }.normalized());
    Derived { family, exact }
}

/// `k`-th derived set with exactness flag.
pub fn derived_set_checked(f: &SetFamily, k: usize) -> Derived {
    if k == 0 {
        return closure_checked(f);
    }
    let mut cur = Derived { family: f.clone(), exact: true };
    for _ in 0..k {
        let next = derived_once(&cur.family);
        cur = Derived { family: next.family, exact: cur.exact && next.exact };
    }
    cur
}

/// `k`-th derived set; a superset of the true one, exact for
/// nondegenerate atoms.
pub fn derived_set(f: &SetFamily, k: usize) -> SetFamily {
    derived_set_checked(f, k).family
}

fn closure_checked(f: &SetFamily) -> Derived {
    let d = derived_once(f);
    let mut atoms = f.atoms.clone();
    atoms.extend(d.family.atoms);
    Derived { family: prune_outside(SetFamily { atoms, clip: f.clip.clone() }.normalized()), exact: d.exact }
}

/// `F ∪ ∂F`.
pub fn closure(f: &SetFamily) -> SetFamily {
    closure_checked(f).family
}

/// Emptiness of `F ∩ clip`; `None` when undecided.
pub fn is_empty(f: &SetFamily) -> Option<bool> {
    let mut undecided = false;
    for a in &f.atoms {
        match (&f.clip, a) {
            (None, Atom::Finite(v)) if v.is_empty() => {}
            (None, _) => return Some(false),
            (Some(c), _) => match touches(a, c, SCAN_BUDGET) {
                Some(true) => return Some(false),
                Some(false) => {}
                None => undecided = true,
            },
        }
    }
    if undecided {
        None
    } else {
        Some(true)
    }
}

fn window_in(f: &SetFamily, w: Interval) -> Option<Interval> {
    match &f.clip {
        Some(c) => c.intersect(&w),
        None => Some(w),
    }
}

enum Local {
    Points(Vec<Rational>),
    Limit(Rational),
    Stuck(String),
}

fn local_points(f: &SetFamily, w: &Interval, budget: u64) -> Local {
    let mut vals = Vec::new();
    for a in &f.atoms {
        match Scanner::new(budget).scan(a, w, None) {
            Ok(out) => vals.extend(out.values()),
            Err(ScanError::Accumulation(c)) => return Local::Limit(c),
            Err(ScanError::Budget) => return Local::Stuck("local enumeration budget exhausted".into()),
        }
    }
    vals.sort();
    vals.dedup();
    Local::Points(vals)
}

fn lcm_numerators(coeffs: &[Rational]) -> BigInt {
    coeffs.iter().filter(|b| !b.is_zero()).fold(BigInt::one(), |acc, b| acc.lcm(&b.numer().abs()))
}

fn nearest_other(vals: &[Rational], g0: &Rational) -> Option<Rational> {
    vals.iter().filter(|v| *v != g0).map(|v| (v - g0).abs()).min()
}

fn scan_near(
    f: &SetFamily,
    win: &Interval,
    g0: &Rational,
    accumulates: bool,
    radius: &Rational,
    budget: u64,
) -> Result<(Rational, Vec<Rational>, bool), ScanError> {
    let mut eps = radius.clone();
    if let Some(c) = &f.clip {
        let d = c.distance(g0);
        if d.is_positive() {
            eps = eps.min(d);
        }
    }
    let mut coeffs = Vec::new();
    let mut hits = false;
    for a in &f.atoms {
        let out = Scanner::new(budget).scan(a, win, accumulates.then_some(g0))?;
        for p in &out.points {
            if &p.value == g0 {
                hits = true;
            } else {
                eps = eps.min((&p.value - g0).abs());
            }
        }
        coeffs.extend(out.tails.into_iter().map(|t| t.coeff));
    }
    Ok((eps, coeffs, hits))
}

/// Standardization test at `gamma0` given the first derived family `l`.
pub fn near_with(f: &SetFamily, l: &Derived, g0: &Rational) -> Near {
    near_budgeted(f, l, g0, SCAN_BUDGET, SHRINK_RETRIES)
}

fn near_budgeted(f: &SetFamily, l: &Derived, g0: &Rational, budget: u64, retries: usize) -> Near {
    let half = Rational::new(1.into(), 2.into());
    let on_clip_end = f.clip.as_ref().is_some_and(|c| &c.lo == g0 || &c.hi == g0);
    let mut w = Rational::one();
    let mut level1 = None;
    let mut stuck = 0;
    for _ in 0..128 {
        let win = match window_in(&l.family, Interval::around(g0, &w)) {
            Some(win) => win,
            None => {
                level1 = Some(Vec::new());
                break;
            }
        };
        match local_points(&l.family, &win, budget) {
            Local::Points(v) => {
                level1 = Some(v);
                break;
            }
            Local::Limit(c) if &c == g0 => {
                return if l.exact && !on_clip_end {
                    Near::No(format!("{g0} ∈ ∂²"))
                } else {
                    Near::Unknown(format!("{g0} lies in an over-approximated second derived set"))
                };
            }
            Local::Limit(c) => w = (&w * &half).min((&c - g0).abs() * &half),
            Local::Stuck(r) => {
                stuck += 1;
                if stuck > retries {
                    return Near::Unknown(r);
                }
                w = &w * &half;
            }
        }
    }
    let level1 = match level1 {
        Some(v) => v,
        None => return Near::Unknown("could not isolate the point from second-order limits".into()),
    };
    let mut radius = nearest_other(&level1, g0).map_or(w.clone(), |d| d.min(w.clone())) * &half;
    let accumulates = level1.contains(g0);
    let mut attempt = 0;
    let (eps, mut coeffs, hits) = loop {
        let win = match window_in(f, Interval::around(g0, &radius)) {
            Some(win) => win,
            None => {
                let d = f.clip.as_ref().map(|c| c.distance(g0)).unwrap_or_else(|| radius.clone());
                return Near::Standardized(Witness {
                    gamma0: g0.clone(),
                    eps: d.min(radius),
                    coeffs: vec![Rational::zero()],
                    i: BigInt::one(),
                });
            }
        };
        match scan_near(f, &win, g0, accumulates, &radius, budget) {
            Ok(found) => break found,
            Err(ScanError::Accumulation(c)) => {
                return Near::Unknown(format!("unexpected limit point {c} near {g0}"));
            }
            Err(ScanError::Budget) => {
                attempt += 1;
                if attempt > retries {
                    return Near::Unknown("local enumeration budget exhausted".into());
                }
                radius = &radius * &half;
            }
        }
    };
    if hits || coeffs.is_empty() {
        coeffs.push(Rational::zero());
    }
    coeffs.sort();
    coeffs.dedup();
    let i = lcm_numerators(&coeffs);
    Near::Standardized(Witness { gamma0: g0.clone(), eps, coeffs, i })
}

/// Definition-level test: is `F` standardized near `gamma0`?
pub fn standardized_near(f: &SetFamily, g0: &Rational) -> Near {
    let l = derived_once(f);
    near_with(f, &l, g0)
}

/// A few points of `f`, preferring small parameter indices.
fn sample_points(f: &SetFamily, max: usize) -> Vec<Rational> {
    let mut pts = Vec::new();
    for a in &f.atoms {
        match a {
            Atom::Finite(v) => pts.extend(v.iter().filter(|x| f.in_clip(x)).cloned()),
            Atom::Poly(p) => {
                let k = p.params().len().min(6);
                for bits in 0u64..(1 << k) {
                    let idx: Vec<u64> =
                        p.params().iter().enumerate().map(|(j, par)| par.min + (bits >> j & 1)).collect();
                    let v = p.eval(&idx);
                    if f.in_clip(&v) {
                        pts.push(v);
                    }
                }
            }
        }
    }
    let mut seen = HashSet::new();
    pts.retain(|x| seen.insert(x.clone()));
    pts.truncate(max * 4);
    pts
}

/// Iterates derived sets until one is empty, attaching witnesses at the
/// accumulation points of each level.
pub fn certify(f: &SetFamily) -> Certificate {
    let budget_levels = f.max_params() + 2;
    let mut levels = Vec::new();
    let mut cur = closure_checked(f);
    let mut next = derived_once(&cur.family);
    for k in 0..=budget_levels {
        match is_empty(&cur.family) {
            Some(true) => {
                return Certificate { verdict: CertVerdict::Standardized, depth: k, levels };
            }
            Some(false) => {}
            None => {
                return Certificate {
                    verdict: CertVerdict::Unknown(format!("emptiness of level {k} undecided")),
                    depth: k,
                    levels,
                }
            }
        }
        if !cur.exact || !next.exact {
            return Certificate {
                verdict: CertVerdict::Unknown(format!("degenerate atom at level {k}")),
                depth: k,
                levels,
            };
        }
        let after = derived_once(&next.family);
        let mut witnesses = Vec::new();
        let mut misses = 0;
        for p in sample_points(&next.family, LEVEL_SAMPLES) {
            if witnesses.len() >= LEVEL_SAMPLES {
                break;
            }
            if !matches!(member(&after.family, &p, 2_000), Ok(Verdict::Out)) {
                continue;
            }
            match near_budgeted(&cur.family, &next, &p, WITNESS_BUDGET, 0) {
                Near::Standardized(w) => witnesses.push(w),
                Near::No(_) => {
                    levels.push(Level { k, family: cur.family, witnesses });
                    return Certificate { verdict: CertVerdict::NotStandardized { k, gamma0: p }, depth: k, levels };
                }
                Near::Unknown(_) => {
                    misses += 1;
                    if misses >= WITNESS_MISSES {
                        break;
                    }
                }
            }
        }
        levels.push(Level { k, family: cur.family, witnesses });
        cur = next;
        next = after;
    }
    Certificate { verdict: CertVerdict::Unknown("derived chain did not terminate".into()), depth: levels.len(), levels }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Increasing,
    Decreasing,
}

fn chain_in_clip(p: &PolyAtom, j: usize, clip: &Interval, dir: Direction) -> bool {
    let d = p.coefficient(j);
    let b = p.limit(1 << j);
    let k = p.params().len();
    let mut idx: Vec<u64> = p.params().iter().map(|par| par.min).collect();
    let total = (CHAIN_SEARCH + 1).pow(k.min(6) as u32);
    for code in 0..total {
        let mut c = code;
        for (i, par) in p.params().iter().enumerate() {
            idx[i] = par.min + c % (CHAIN_SEARCH + 1);
            c /= CHAIN_SEARCH + 1;
        }
        let assign: Vec<(String, u64)> = p.params().iter().zip(&idx).map(|(par, n)| (par.id.clone(), *n)).collect();
        let dv = d.eval_ids(&assign).unwrap_or_else(Rational::zero);
        let bv = b.eval_ids(&assign).unwrap_or_else(Rational::zero);
        let ok = match dir {
            Direction::Increasing => dv.is_negative() && bv > clip.lo && bv <= clip.hi,
            Direction::Decreasing => dv.is_positive() && bv >= clip.lo && bv < clip.hi,
        };
        if ok {
            return true;
        }
    }
    false
}

fn chain_condition(f: &SetFamily, dir: Direction) -> Result<bool, DerivedError> {
    for a in &f.atoms {
        let p = match a {
            Atom::Poly(p) => p,
            Atom::Finite(_) => continue,
        };
        for j in 0..p.params().len() {
            let h = match p.coefficient(j).hull() {
                Some(h) => h,
                None => continue,
            };
            if !h.exact {
                return Err(DerivedError::Undecided("too many parameters for exact bounds".into()));
            }
            let bad = match dir {
                Direction::Increasing => h.inf.is_negative(),
                Direction::Decreasing => h.sup.is_positive(),
            };
            if !bad {
                continue;
            }
            match &f.clip {
                None => return Ok(false),
                Some(c) => {
                    if chain_in_clip(p, j, c, dir) {
                        return Ok(false);
                    }
                    return Err(DerivedError::Undecided(format!("monotone chains of `{a}` may leave the clip {c}")));
                }
            }
        }
    }
    Ok(true)
}

/// Ascending chain condition.
pub fn is_acc(f: &SetFamily) -> Result<bool, DerivedError> {
    chain_condition(f, Direction::Increasing)
}

/// Descending chain condition.
pub fn is_dcc(f: &SetFamily) -> Result<bool, DerivedError> {
    chain_condition(f, Direction::Decreasing)
}
