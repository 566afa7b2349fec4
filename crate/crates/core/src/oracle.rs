//! Brute-force ground truth: exact enumeration on windows, empirical
//! accumulation points and a numerator-based standardization fitter.

use std::collections::BTreeMap;

use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

use crate::derived::{derived_once, near_with, Derived, Near, SCAN_BUDGET};
use crate::geomsets::{dc_value, ht2_value, Generator};
use crate::scan::{touches, Scanner};
use crate::setfam::{rat, Atom, Interval, PolyAtom, Rational, SetFamily};

/// Points a window must hold to count as a cluster.
pub const DEFAULT_THRESHOLD: usize = 10;
pub const DEFAULT_NUMERATOR_BOUND: u64 = 64;
/// Fewer sampled values than this make a fit insufficient.
const MIN_FIT: usize = 5;
/// How far a cluster may be extended toward its extrapolated limit, in
/// multiples of its own width.
const GROW: i64 = 4;
/// Index offsets used to list points of the derived family.
const SYMBOLIC_OFFSETS: u64 = 12;

pub fn default_resolution() -> Rational {
    rat(1, 512)
}

/// What to enumerate.
#[derive(Clone, Copy, Debug)]
pub enum Source<'a> {
    Family(&'a SetFamily),
    Generator(&'a Generator),
}

impl<'a> From<&'a SetFamily> for Source<'a> {
    fn from(f: &'a SetFamily) -> Self {
        Source::Family(f)
    }
}

impl<'a> From<&'a Generator> for Source<'a> {
    fn from(g: &'a Generator) -> Self {
        Source::Generator(g)
    }
}

/// Sorted distinct values of a family inside a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub values: Vec<Rational>,
    pub window: Interval,
    pub cap: u64,
    /// No family element in the window is missing.
    pub exhaustive: bool,
}

/// Unreduced fraction with positive denominator, compared by cross
/// multiplication.
#[derive(Clone, Copy, Debug)]
pub struct Small {
    n: i128,
    d: i128,
}

impl Small {
    fn new(n: i128, d: i128) -> Small {
        if d < 0 {
            Small { n: -n, d: -d }
        } else {
            Small { n, d }
        }
    }

    fn big_cmp(&self, o: &Small) -> Ordering {
        (BigInt::from(self.n) * BigInt::from(o.d)).cmp(&(BigInt::from(o.n) * BigInt::from(self.d)))
    }
}

impl Ord for Small {
    fn cmp(&self, o: &Self) -> Ordering {
        match (self.n.checked_mul(o.d), o.n.checked_mul(self.d)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self.big_cmp(o),
        }
    }
}

impl PartialOrd for Small {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl PartialEq for Small {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Small {}

/// Exact values that allow cheap differences and comparisons.
pub trait Exact: Ord + Clone {
    /// `self - other`, `None` when the representation overflows.
    fn diff(&self, other: &Self) -> Option<Self>;
    fn to_big(&self) -> Rational;
    fn from_big(r: &Rational) -> Option<Self>;
}

impl Exact for Rational {
    fn diff(&self, other: &Self) -> Option<Self> {
        Some(self - other)
    }
    fn to_big(&self) -> Rational {
        self.clone()
    }
    fn from_big(r: &Rational) -> Option<Self> {
        Some(r.clone())
    }
}

impl Exact for Small {
    fn diff(&self, o: &Self) -> Option<Self> {
        let plain = || {
            Some(Small::new(self.n.checked_mul(o.d)?.checked_sub(o.n.checked_mul(self.d)?)?, self.d.checked_mul(o.d)?))
        };
        plain().or_else(|| {
            let g = self.d.gcd(&o.d);
            let (a, b) = (self.d / g, o.d / g);
            Some(Small::new(self.n.checked_mul(b)?.checked_sub(o.n.checked_mul(a)?)?, self.d.checked_mul(b)?))
        })
    }
    fn to_big(&self) -> Rational {
        Rational::new(BigInt::from(self.n), BigInt::from(self.d))
    }
    fn from_big(r: &Rational) -> Option<Self> {
        Some(Small::new(r.numer().to_i128()?, r.denom().to_i128()?))
    }
}

/// Calls `f` on every index tuple with `sum (n_j - min_j) <= cap - 1`.
fn simplex(mins: &[u64], cap: u64, f: &mut impl FnMut(&[u64]) -> bool) -> bool {
    fn walk(j: usize, left: u64, mins: &[u64], idx: &mut Vec<u64>, f: &mut impl FnMut(&[u64]) -> bool) -> bool {
        if j == mins.len() {
            return f(idx);
        }
        for o in 0..=left {
            idx.push(mins[j] + o);
            let ok = walk(j + 1, left - o, mins, idx, f);
            idx.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    if cap == 0 {
        return true;
    }
    walk(0, cap - 1, mins, &mut Vec::with_capacity(mins.len()), f)
}

struct CompactAtom {
    base: i128,
    den: i128,
    monomials: Vec<(i128, u64)>,
    q: Vec<i128>,
    r: Vec<i128>,
}

fn compact(p: &PolyAtom) -> Option<CompactAtom> {
    let mut den = p.base().denom().to_i128()?;
    for m in p.monomials() {
        den = den.lcm(&m.coeff.denom().to_i128()?);
    }
    let scaled = |c: &Rational| -> Option<i128> {
        let d = c.denom().to_i128()?;
        c.numer().to_i128()?.checked_mul(den / d)
    };
    Some(CompactAtom {
        base: scaled(p.base())?,
        den,
        monomials: p.monomials().iter().map(|m| Some((scaled(&m.coeff)?, m.support))).collect::<Option<_>>()?,
        q: p.params().iter().map(|x| x.q as i128).collect(),
        r: p.params().iter().map(|x| x.r as i128).collect(),
    })
}

impl CompactAtom {
    fn eval(&self, idx: &[u64], vs: &mut Vec<i128>) -> Option<Small> {
        vs.clear();
        let mut prod: i128 = 1;
        for (j, &n) in idx.iter().enumerate() {
            let v = self.q[j].checked_mul(n as i128)?.checked_add(self.r[j])?;
            vs.push(v);
            prod = prod.checked_mul(v)?;
        }
        let mut num = self.base.checked_mul(prod)?;
        for &(c, support) in &self.monomials {
            let mut t = c;
            for (j, v) in vs.iter().enumerate() {
                if support >> j & 1 == 0 {
                    t = t.checked_mul(*v)?;
                }
            }
            num = num.checked_add(t)?;
        }
        Some(Small::new(num, self.den.checked_mul(prod)?))
    }
}

fn atom_small(p: &PolyAtom, lo: &Small, hi: &Small, cap: u64) -> Option<Vec<Small>> {
    let c = compact(p)?;
    let mins: Vec<u64> = p.params().iter().map(|x| x.min).collect();
    let mut out = Vec::new();
    let mut vs = Vec::new();
    let mut failed = false;
    simplex(&mins, cap, &mut |idx| match c.eval(idx, &mut vs) {
        Some(v) => {
            if &v >= lo && &v <= hi {
                out.push(v);
            }
            true
        }
        None => {
            failed = true;
            false
        }
    });
    (!failed).then_some(out)
}

fn atom_big(p: &PolyAtom, w: &Interval, cap: u64) -> Vec<Rational> {
    let mins: Vec<u64> = p.params().iter().map(|x| x.min).collect();
    let mut out = Vec::new();
    simplex(&mins, cap, &mut |idx| {
        let v = p.eval(idx);
        if w.contains(&v) {
            out.push(v);
        }
        true
    });
    out
}

fn effective_window(f: &SetFamily, w: &Interval) -> Option<Interval> {
    match &f.clip {
        Some(c) => c.intersect(w),
        None => Some(w.clone()),
    }
}

/// Values of `f` in `w` as compact rationals, when they all fit.
fn family_small(f: &SetFamily, w: &Interval, cap: u64) -> Option<Vec<Small>> {
    let w = match effective_window(f, w) {
        Some(w) => w,
        None => return Some(Vec::new()),
    };
    let lo = Small::from_big(&w.lo)?;
    let hi = Small::from_big(&w.hi)?;
    let mut out = Vec::new();
    for a in &f.atoms {
        match a {
            Atom::Finite(v) => {
                for x in v.iter().filter(|x| w.contains(x)) {
                    out.push(Small::from_big(x)?);
                }
            }
            Atom::Poly(p) => out.extend(atom_small(p, &lo, &hi, cap)?),
        }
    }
    out.sort_unstable();
    out.dedup();
    Some(out)
}

fn family_big(f: &SetFamily, w: &Interval, cap: u64) -> Vec<Rational> {
    let w = match effective_window(f, w) {
        Some(w) => w,
        None => return Vec::new(),
    };
    let mut out = Vec::new();
    for a in &f.atoms {
        match a {
            Atom::Finite(v) => out.extend(v.iter().filter(|x| w.contains(x)).cloned()),
            Atom::Poly(p) => out.extend(atom_big(p, &w, cap)),
        }
    }
    out.sort();
    out.dedup();
    out
}

fn family_values(f: &SetFamily, w: &Interval, cap: u64) -> Vec<Rational> {
    match family_small(f, w, cap) {
        Some(v) => v.iter().map(Exact::to_big).collect(),
        None => family_big(f, w, cap),
    }
}

/// Every value of `f` in `w` is already present in `values`.
fn covers_window(f: &SetFamily, w: &Interval, values: &[Rational]) -> bool {
    let w = match effective_window(f, w) {
        Some(w) => w,
        None => return true,
    };
    f.atoms.iter().all(|a| match a {
        Atom::Finite(_) => true,
        Atom::Poly(_) => match Scanner::new(SCAN_BUDGET).scan(a, &w, None) {
            Ok(out) => out.values().iter().all(|v| values.binary_search(v).is_ok()),
            Err(_) => false,
        },
    })
}

fn ht2_values(w: &Interval, cap: u64) -> Vec<Rational> {
    let mut out: Vec<Small> = Vec::new();
    let lo = Small::from_big(&w.lo);
    let hi = Small::from_big(&w.hi);
    let (lo, hi) = match (lo, hi) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return ht2_values_big(w, cap),
    };
    for a1 in 0..=cap {
        for a2 in 0..=cap {
            for c2 in 0..=cap {
                let k = (a2 + c2) as i128;
                let falling = (a1 as i128) < k;
                for c1 in 0..=cap {
                    if a1 + c1 < 2.max(a2) || a2 + c2 < 2.max(a1) {
                        continue;
                    }
                    let den = (c1 * c2 + a1 * c2 + a2 * c1) as i128;
                    if den == 0 {
                        continue;
                    }
                    let v = Small::new((c1 + c2) as i128, den);
                    if v < lo {
                        if falling {
                            break;
                        }
                        continue;
                    }
                    if v <= hi {
                        out.push(v);
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out.iter().map(Exact::to_big).collect()
}

fn ht2_values_big(w: &Interval, cap: u64) -> Vec<Rational> {
    let mut out = Vec::new();
    for a1 in 0..=cap {
        for a2 in 0..=cap {
            for c2 in 0..=cap {
                for c1 in 0..=cap {
                    if let Some(v) = ht2_value(a1, a2, c1, c2) {
                        if w.contains(&v) {
                            out.push(v);
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn dc_values(plus: &SetFamily, c: &Rational, w: &Interval, cap: u64) -> Vec<Rational> {
    let unit = Interval { lo: Rational::zero(), hi: Rational::one() };
    let w = match w.intersect(&unit) {
        Some(w) => w,
        None => return Vec::new(),
    };
    let gammas = family_values(plus, &unit, cap);
    let mut out = Vec::new();
    for g in &gammas {
        for m in 1..=cap {
            for k in 1..=cap {
                let v = dc_value(g, c, m, k);
                if v > Rational::one() {
                    break;
                }
                if w.contains(&v) {
                    out.push(v);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Exact enumeration of a family or generator inside `window`; parameter
/// tuples are bounded by `sum (n_j - min_j) < cap`, generator variables by
/// `cap`.
pub fn enumerate(src: Source<'_>, window: &Interval, cap: u64) -> Sample {
    let (values, exhaustive) = if cap == 0 {
        (Vec::new(), false)
    } else {
        match src {
            Source::Family(f) => {
                let values = family_values(f, window, cap);
                let exhaustive = covers_window(f, window, &values);
                (values, exhaustive)
            }
            Source::Generator(Generator::Ht2) => (ht2_values(window, cap), false),
            Source::Generator(Generator::Dc { plus, c }) => (dc_values(plus, c, window, cap), false),
        }
    };
    Sample { values, window: window.clone(), cap, exhaustive }
}

/// Candidate accumulation region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub interval: Interval,
    /// Sample points in the dense part.
    pub count: usize,
    /// Extrapolated limit of the dense part, when it is one-sided.
    pub estimate: Option<Rational>,
}

fn extrapolate(x0: &Rational, xr: &Rational, x2r: &Rational) -> Rational {
    let den = xr * Rational::from_integer(2.into()) - x0 - x2r;
    if den.is_zero() {
        return x0.clone();
    }
    (xr * (x0 + x2r) - x0 * x2r * Rational::from_integer(2.into())) / den
}

/// Dense regions of sorted distinct values: `threshold` consecutive values
/// spanning at most `res`, extended toward the harmonic limit they approach.
pub fn detect_in<T: Exact>(vals: &[T], res: &Rational, threshold: usize) -> Vec<Cluster> {
    match detect_exact(vals, res, threshold) {
        Some(c) => c,
        None => {
            let big: Vec<Rational> = vals.iter().map(Exact::to_big).collect();
            detect_exact(&big, res, threshold).unwrap_or_default()
        }
    }
}

/// Drops values that split a gap of the run walking away from its densest
/// end, where gaps of a harmonic sequence only grow.
fn monotone_run<'a, T: Exact>(pts: impl Iterator<Item = &'a T>, max: usize) -> Option<Vec<&'a T>> {
    let mut run: Vec<&T> = Vec::new();
    let mut gap: Option<T> = None;
    for p in pts {
        if run.len() >= max {
            break;
        }
        let last = match run.last() {
            Some(l) => *l,
            None => {
                run.push(p);
                continue;
            }
        };
        let d = if p > last { p.diff(last)? } else { last.diff(p)? };
        if gap.as_ref().is_none_or(|g| &d >= g) {
            gap = Some(d);
            run.push(p);
        }
    }
    Some(run)
}

fn harmonic_limit<T: Exact>(pts: &[&T], r: usize) -> Rational {
    let last = pts.len() - 1;
    extrapolate(&pts[0].to_big(), &pts[r.min(last)].to_big(), &pts[(2 * r).min(last)].to_big())
}

/// Limit approached by `pts`, listed from the densest end outward, and
/// whether two independent extrapolations agree on it.
fn estimate_limit<T: Exact>(pts: &[&T], width: &Rational, res: &Rational) -> (Rational, bool) {
    let r = (pts.len() / 4).max(1);
    let est = harmonic_limit(pts, r);
    if r >= 2 && (harmonic_limit(pts, r / 2) - &est).abs() * Rational::from_integer(4.into()) <= *res {
        return (est, true);
    }
    let lim = width * Rational::from_integer(GROW.into()) + res;
    let x0 = pts[0].to_big();
    let est = if (&est - &x0).abs() > lim {
        if est > x0 {
            x0 + lim
        } else {
            x0 - lim
        }
    } else {
        est
    };
    (est, false)
}

fn detect_exact<T: Exact>(vals: &[T], res: &Rational, threshold: usize) -> Option<Vec<Cluster>> {
    let t = threshold.max(2);
    let n = vals.len();
    if n < t {
        return Some(Vec::new());
    }
    let res_t = T::from_big(res);
    let dense = |span: &T| match &res_t {
        Some(r) => span <= r,
        None => &span.to_big() <= res,
    };
    let spans: Vec<T> = (0..=n - t).map(|i| vals[i + t - 1].diff(&vals[i])).collect::<Option<_>>()?;
    let mut segs: Vec<(usize, usize)> = Vec::new();
    for (i, s) in spans.iter().enumerate() {
        if !dense(s) {
            continue;
        }
        match segs.last_mut() {
            Some(last) if last.1 >= i || dense(&vals[i].diff(&vals[last.1])?) => last.1 = i + t - 1,
            _ => segs.push((i, i + t - 1)),
        }
    }
    let half_res = res / Rational::from_integer(2.into());
    let mut out: Vec<Cluster> = Vec::new();
    for (a, b) in segs {
        let len = b - a + 1;
        let mut best = (a..=b + 1 - t).min_by(|&i, &j| spans[i].cmp(&spans[j])).unwrap_or(a);
        let slack = (len - t) / 8;
        let mut at_low = best - a <= slack;
        let mut at_high = (b + 1 - t) - best <= slack;
        if len < 2 * t {
            let g0 = vals[a + 1].diff(&vals[a])?;
            let g1 = vals[b].diff(&vals[b - 1])?;
            at_low = g0 < g1;
            at_high = g1 < g0;
            best = if at_low { a } else { b + 1 - t };
        }
        let width = vals[b].to_big() - vals[a].to_big();
        let mut lo = vals[a + t - 1].to_big() - res;
        let mut hi = vals[b + 1 - t].to_big() + res;
        let m = t.min(len - t);
        let reach = res.clone();
        let near_low = match T::from_big(&(vals[a].to_big() + &reach)) {
            Some(edge) => vals[a..=b + 1 - t].partition_point(|v| v <= &edge).max(1) - 1,
            None => 0,
        };
        let near_high = match T::from_big(&(vals[b].to_big() - &reach)) {
            Some(edge) => (b + 1 - t) - (a + vals[a..=b + 1 - t].partition_point(|v| v < &edge)).min(b + 1 - t),
            None => 0,
        };
        let low_side = if at_low && !at_high {
            Some(best)
        } else {
            let lb = (a..=a + near_low).min_by(|&i, &j| spans[i].cmp(&spans[j])).unwrap_or(a);
            (!at_low && lb + m <= b + 1 - t && spans[lb] < spans[lb + m]).then_some(lb)
        };
        let high_side = if at_high && !at_low {
            Some(best + t - 1)
        } else {
            let top = b + 1 - t;
            let hb = (top - near_high..=top).rev().min_by(|&i, &j| spans[i].cmp(&spans[j])).unwrap_or(top);
            (!at_high && hb >= a + m && spans[hb] < spans[hb - m]).then_some(hb + t - 1)
        };
        let mut estimate = None;
        let local = 4 * t + 1;
        let mut sides: Vec<Vec<&T>> = Vec::new();
        if let Some(s) = low_side {
            let keep = if at_low { len } else { local };
            sides.push(vals[s..=b].iter().take(keep).collect());
        }
        if let Some(s) = high_side {
            let keep = if at_high { len } else { local };
            sides.push(vals[a..=s].iter().rev().take(keep).collect());
        }
        let mut harmonic = false;
        for pts in sides {
            let run = monotone_run(pts.iter().copied(), pts.len())?;
            let (est, consistent) = match estimate_limit(&run, &width, res) {
                (est, true) => (est, true),
                _ => estimate_limit(&pts, &width, res),
            };
            harmonic |= consistent;
            lo = lo.clone().min(&est - &half_res);
            hi = hi.clone().max(&est + &half_res);
            estimate.get_or_insert(est);
        }
        if len < 2 * t && !harmonic {
            continue;
        }
        out.push(Cluster { interval: Interval { lo, hi }, count: len, estimate });
    }
    out.sort_by(|x, y| x.interval.lo.cmp(&y.interval.lo));
    let mut merged: Vec<Cluster> = Vec::new();
    for c in out {
        match merged.last_mut() {
            Some(m) if c.interval.lo <= m.interval.hi => {
                if c.interval.hi > m.interval.hi {
                    m.interval.hi = c.interval.hi;
                }
                m.count += c.count;
                if m.estimate.is_none() {
                    m.estimate = c.estimate;
                }
            }
            _ => merged.push(c),
        }
    }
    Some(merged)
}

/// Candidate cluster intervals of a sample at the default threshold.
pub fn detect_accumulation(s: &Sample, resolution: &Rational) -> Vec<Cluster> {
    detect_in(&s.values, resolution, DEFAULT_THRESHOLD)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FitVerdict {
    /// Every sampled `γ ≠ γ₀` is `γ₀ + p/n` with `p` in `coeffs`, and `i`
    /// is divisible by every such `p`.
    Consistent {
        i: BigInt,
        coeffs: Vec<BigInt>,
    },
    /// A sampled value whose numerator exceeds the bound.
    Inconsistent {
        evidence: Rational,
    },
    Insufficient,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FitReport {
    pub gamma0: Rational,
    /// Reduced numerators of `γ − γ₀`, sorted.
    pub numerators: Vec<BigInt>,
    pub verdict: FitVerdict,
}

/// Finite-scale test of harmonic structure near `gamma0`.
pub fn fit_standardized(s: &Sample, gamma0: &Rational, numerator_bound: u64) -> FitReport {
    let others: Vec<&Rational> = s.values.iter().filter(|v| *v != gamma0).collect();
    let mut numerators: Vec<BigInt> = others.iter().map(|v| (*v - gamma0).numer().clone()).collect();
    numerators.sort();
    let verdict = if others.len() < MIN_FIT {
        FitVerdict::Insufficient
    } else {
        let bound = BigInt::from(numerator_bound);
        let offending = others
            .iter()
            .filter(|v| (**v - gamma0).numer().abs() > bound)
            .min_by(|x, y| (**x - gamma0).abs().cmp(&(**y - gamma0).abs()));
        match offending {
            Some(v) => FitVerdict::Inconsistent { evidence: (*v).clone() },
            None => {
                let mut coeffs = numerators.clone();
                coeffs.dedup();
                let i = coeffs.iter().fold(BigInt::one(), |acc, p| acc.lcm(&p.abs()));
                let sound = others.iter().all(|v| {
                    let d = *v - gamma0;
                    coeffs.iter().any(|p| {
                        let n = Rational::from_integer(p.clone()) / &d;
                        n.is_integer() && n.is_positive()
                    })
                });
                if sound {
                    FitVerdict::Consistent { i, coeffs }
                } else {
                    FitVerdict::Insufficient
                }
            }
        }
    };
    FitReport { gamma0: gamma0.clone(), numerators, verdict }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Explanation {
    /// The sample has too few values near the point; `needed` estimates the
    /// parameter size that would populate it.
    CapTooSmall {
        needed: Option<u64>,
    },
    /// Nearby elements approach only from outside the window.
    OutsideWindow,
    Unexplained,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicOnly {
    pub point: Rational,
    pub reason: Explanation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossReport {
    pub matched: Vec<Rational>,
    pub symbolic_only: Vec<SymbolicOnly>,
    pub empirical_only: Vec<Interval>,
    /// Clusters whose relation to the derived family could not be decided.
    pub undecided: Vec<Interval>,
    pub clusters: Vec<Cluster>,
    /// The derived family was computed without over-approximation.
    pub exact: bool,
}

impl CrossReport {
    pub fn unexplained(&self) -> Vec<&Rational> {
        self.symbolic_only.iter().filter(|s| s.reason == Explanation::Unexplained).map(|s| &s.point).collect()
    }

    pub fn agrees(&self) -> bool {
        self.empirical_only.is_empty() && self.undecided.is_empty() && self.unexplained().is_empty()
    }
}

/// Points of the derived family reachable with small parameter offsets,
/// each with the smallest offset that produces it.
fn symbolic_points(l: &SetFamily, w: &Interval) -> BTreeMap<Rational, u64> {
    let mut pts = BTreeMap::new();
    let w = match effective_window(l, w) {
        Some(w) => w,
        None => return pts,
    };
    for a in &l.atoms {
        match a {
            Atom::Finite(v) => {
                for x in v.iter().filter(|x| w.contains(x)) {
                    pts.insert(x.clone(), 0);
                }
            }
            Atom::Poly(p) => {
                let mins: Vec<u64> = p.params().iter().map(|x| x.min).collect();
                simplex(&mins, SYMBOLIC_OFFSETS, &mut |idx| {
                    let v = p.eval(idx);
                    if w.contains(&v) {
                        let off: u64 = idx.iter().zip(&mins).map(|(n, m)| n - m).sum();
                        let e = pts.entry(v).or_insert(off);
                        *e = (*e).min(off);
                    }
                    true
                });
            }
        }
    }
    pts
}

fn isqrt_ceil(x: &Rational) -> u64 {
    let c = x.ceil().to_integer();
    let mut r = c.sqrt();
    if &r * &r < c {
        r += 1;
    }
    r.to_u64().unwrap_or(u64::MAX)
}

/// Parameter size needed before the tail `g + b/N` puts `t` values inside
/// `w` within `res` of each other.
fn tail_need(g: &Rational, b: &Rational, w: &Interval, res: &Rational, t: usize) -> Option<u64> {
    if b.is_zero() {
        return None;
    }
    let room = if b.is_positive() { &w.hi - g } else { g - &w.lo };
    if !room.is_positive() {
        return None;
    }
    let tt = Rational::from_integer(BigInt::from(t as u64 - 1));
    let dense = isqrt_ceil(&(b.abs() * tt / res));
    let inside = (b.abs() / room).ceil().to_integer().to_u64().unwrap_or(u64::MAX);
    Some(dense.max(inside).saturating_add(t as u64))
}

/// Whether `t` sample values and `g` fit in an interval of width `res`.
fn populated<T: Exact>(vals: &[T], g: &Rational, res: &Rational, t: usize) -> bool {
    let (lo, hi, gs) = match (T::from_big(&(g - res)), T::from_big(&(g + res)), T::from_big(g)) {
        (Some(lo), Some(hi), Some(gs)) => (lo, hi, gs),
        _ => return true,
    };
    let start = vals.partition_point(|v| v < &lo);
    let end = vals.partition_point(|v| v <= &hi);
    let near = &vals[start..end];
    if near.len() < t {
        return false;
    }
    near.windows(t).any(|win| {
        let a = if win[0] < gs { win[0].to_big() } else { g.clone() };
        let b = if win[t - 1] > gs { win[t - 1].to_big() } else { g.clone() };
        &(b - a) <= res
    })
}

struct CheckCtx<'a> {
    f: &'a SetFamily,
    l: &'a Derived,
    window: Option<Interval>,
    res: &'a Rational,
    cap: u64,
}

impl CheckCtx<'_> {
    fn explain<T: Exact>(&self, vals: &[T], g: &Rational, off: u64) -> Explanation {
        let t = DEFAULT_THRESHOLD;
        if populated(vals, g, self.res, t) {
            return Explanation::Unexplained;
        }
        let w = match &self.window {
            Some(w) => w,
            None => return Explanation::OutsideWindow,
        };
        match near_with(self.f, self.l, g) {
            Near::Standardized(wit) => {
                let needs: Vec<u64> = wit.coeffs.iter().filter_map(|b| tail_need(g, b, w, self.res, t)).collect();
                match needs.into_iter().min() {
                    Some(n) => Explanation::CapTooSmall { needed: Some(n.saturating_add(off).max(self.cap + 1)) },
                    None if wit.coeffs.iter().any(|b| !b.is_zero()) => Explanation::OutsideWindow,
                    None => Explanation::CapTooSmall { needed: None },
                }
            }
            _ => Explanation::CapTooSmall { needed: None },
        }
    }
}

fn cross_check_with<T: Exact>(ctx: &CheckCtx<'_>, vals: &[T], window: &Interval) -> CrossReport {
    let clusters = detect_in(vals, ctx.res, DEFAULT_THRESHOLD);
    let mut matched = Vec::new();
    let mut symbolic_only = Vec::new();
    for (g, off) in symbolic_points(&ctx.l.family, window) {
        if clusters.iter().any(|c| c.interval.contains(&g)) {
            matched.push(g);
        } else {
            let reason = ctx.explain(vals, &g, off);
            symbolic_only.push(SymbolicOnly { point: g, reason });
        }
    }
    let mut empirical_only = Vec::new();
    let mut undecided = Vec::new();
    for c in &clusters {
        if matched.iter().any(|g| c.interval.contains(g)) {
            continue;
        }
        let iv = match effective_window(&ctx.l.family, &c.interval) {
            Some(iv) => iv,
            None => {
                empirical_only.push(c.interval.clone());
                continue;
            }
        };
        let mut hit = Some(false);
        for a in &ctx.l.family.atoms {
            match touches(a, &iv, SCAN_BUDGET) {
                Some(true) => {
                    hit = Some(true);
                    break;
                }
                Some(false) => {}
                None => hit = None,
            }
        }
        match hit {
            Some(true) => {}
            Some(false) => empirical_only.push(c.interval.clone()),
            None => undecided.push(c.interval.clone()),
        }
    }
    CrossReport { matched, symbolic_only, empirical_only, undecided, clusters, exact: ctx.l.exact }
}

/// Compares the first derived family of `f` with empirical clusters of an
/// enumeration at `cap`.
pub fn cross_check_derived(f: &SetFamily, window: &Interval, cap: u64, resolution: &Rational) -> CrossReport {
    let l = derived_once(f);
    let ctx = CheckCtx { f, l: &l, window: effective_window(f, window), res: resolution, cap };
    match family_small(f, window, cap) {
        Some(v) => cross_check_with(&ctx, &v, window),
        None => cross_check_with(&ctx, &family_big(f, window, cap), window),
    }
}
