//! Exact local enumeration of an atom inside a closed window.
//!
//! The window must not contain accumulation points of the atom, except an
//! optional focus point whose approaching values are reported as harmonic
//! tails `focus + beta/N` instead of being listed.

use num::{Signed, ToPrimitive, Zero};

use crate::setfam::{recip, Atom, Interval, PolyAtom, Rational};

/// Upper bound on window shrink steps per node.
const MAX_SHRINK: usize = 96;
/// Index ranges at least this long are bisected before enumeration.
const BISECT_MIN: u64 = 8;

#[derive(Clone, Debug)]
pub(crate) struct Point {
    pub value: Rational,
    pub fixed: Vec<(String, u64)>,
}

/// Values `focus + coeff/N`, `N` a positive integer, all inside the window.
#[derive(Clone, Debug)]
pub(crate) struct Tail {
    pub coeff: Rational,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct ScanOut {
    pub points: Vec<Point>,
    pub tails: Vec<Tail>,
}

impl ScanOut {
    pub fn values(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.points.iter().map(|p| p.value.clone()).collect();
        v.sort();
        v.dedup();
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum ScanError {
    /// An accumulation point of the atom that the window cannot exclude.
    Accumulation(Rational),
    Budget,
}

pub(crate) struct Scanner {
    budget: u64,
}

fn extend(fixed: &[(String, u64)], more: &[(String, u64)]) -> Vec<(String, u64)> {
    let mut v = fixed.to_vec();
    v.extend_from_slice(more);
    v
}

impl Scanner {
    pub fn new(budget: u64) -> Self {
        Scanner { budget }
    }

    fn tick(&mut self) -> Result<(), ScanError> {
        if self.budget == 0 {
            return Err(ScanError::Budget);
        }
        self.budget -= 1;
        Ok(())
    }

    pub fn scan(&mut self, atom: &Atom, w: &Interval, focus: Option<&Rational>) -> Result<ScanOut, ScanError> {
        let mut out = ScanOut::default();
        self.go(atom, &[], w, focus, &mut out)?;
        Ok(out)
    }

    /// Indices `lo..=hi` of parameter `p`, bisected while the restricted
    /// value range misses the window.
    #[allow(clippy::too_many_arguments)]
    fn head(
        &mut self,
        a: &PolyAtom,
        p: usize,
        lo: u64,
        hi: u64,
        fixed: &[(String, u64)],
        w: &Interval,
        focus: Option<&Rational>,
        out: &mut ScanOut,
    ) -> Result<(), ScanError> {
        if hi - lo >= BISECT_MIN {
            self.tick()?;
            if let Some((inf, sup)) = a.range_bounds(p, lo, hi) {
                if sup < w.lo || inf > w.hi {
                    return Ok(());
                }
            }
            let mid = lo + (hi - lo) / 2;
            self.head(a, p, lo, mid, fixed, w, focus, out)?;
            return self.head(a, p, mid + 1, hi, fixed, w, focus, out);
        }
        let id = &a.params[p].id;
        for n in lo..=hi {
            let sub = a.fix(p, n);
            let f = extend(fixed, &[(id.clone(), n)]);
            self.go(&sub, &f, w, focus, out)?;
        }
        Ok(())
    }

    fn go(
        &mut self,
        atom: &Atom,
        fixed: &[(String, u64)],
        w: &Interval,
        focus: Option<&Rational>,
        out: &mut ScanOut,
    ) -> Result<(), ScanError> {
        self.tick()?;
        let a = match atom {
            Atom::Finite(vs) => {
                for v in vs.iter().filter(|v| w.contains(v)) {
                    out.points.push(Point { value: v.clone(), fixed: fixed.to_vec() });
                }
                return Ok(());
            }
            Atom::Poly(a) => a,
        };
        if !a.hull().meets(w) {
            return Ok(());
        }
        let p = pick(a);
        let par = a.params[p].clone();
        let rest = a.limit(1 << p);
        let m = a.coefficient(p).hull().map(|h| h.abs_sup()).unwrap_or_else(Rational::zero);
        let mut delta = &m * par.xmax();
        let mut rest_points = None;
        for _ in 0..MAX_SHRINK {
            let mut sub = ScanOut::default();
            match self.go(&rest, &[], &w.widen(&delta), None, &mut sub) {
                Ok(()) => {
                    rest_points = Some(sub.points);
                    break;
                }
                Err(ScanError::Accumulation(c)) => {
                    if w.contains(&c) {
                        return Err(ScanError::Accumulation(c));
                    }
                    let half = w.distance(&c) / Rational::from_integer(2.into());
                    delta = (&delta / Rational::from_integer(2.into())).min(half);
                }
                Err(e) => return Err(e),
            }
        }
        let rest_points = rest_points.ok_or(ScanError::Budget)?;

        let head_end = par.last_index_below(&(&m / &delta));
        if let Some(end) = head_end {
            self.head(a, p, par.min, end, fixed, w, focus, out)?;
        }
        let tail_min = head_end.map_or(par.min, |e| e + 1);
        for rp in rest_points {
            self.tick()?;
            let b = rp.value;
            let s = match a.fix_ids(&rp.fixed) {
                Atom::Poly(s) => match s.param_index(&par.id) {
                    Some(i) => Atom::Poly(s.raise_min(i, tail_min)),
                    None => Atom::Poly(s),
                },
                fin => fin,
            };
            let base_fixed = extend(fixed, &rp.fixed);
            if w.contains(&b) {
                match s.translate(&-&b) {
                    Atom::Finite(_) => out.points.push(Point { value: b, fixed: base_fixed }),
                    Atom::Poly(r) => {
                        if focus == Some(&b) && r.monomials.len() == 1 && r.base.is_zero() {
                            out.tails.push(Tail { coeff: r.monomials[0].coeff.clone() });
                        } else {
                            return Err(ScanError::Accumulation(b));
                        }
                    }
                }
                continue;
            }
            let s = match s {
                Atom::Poly(s) => s,
                Atom::Finite(_) => continue,
            };
            let i = match s.param_index(&par.id) {
                Some(i) => i,
                None => {
                    self.go(&Atom::Poly(s), &base_fixed, w, focus, out)?;
                    continue;
                }
            };
            if let Some((lo, hi)) = hit_range(&s, w) {
                let p0 = &s.params[0];
                for n in lo..=hi {
                    self.tick()?;
                    let mut f = base_fixed.clone();
                    f.push((p0.id.clone(), n));
                    let v = &s.base + &s.monomials[0].coeff * recip(&p0.value(n));
                    out.points.push(Point { value: v, fixed: f });
                }
                continue;
            }
            let d = w.distance(&b);
            if let Some(end) = par.last_index_below(&(&m / &d)) {
                for n in tail_min..=end {
                    self.tick()?;
                    let sub = s.fix(i, n);
                    let f = extend(&base_fixed, &[(par.id.clone(), n)]);
                    self.go(&sub, &f, w, focus, out)?;
                }
            }
        }
        Ok(())
    }
}

/// Index range of a one-term atom `base + c/(q*n + r)` whose values lie in
/// `w`, when `base` is outside `w`. `Some((1, 0))` is an empty range.
fn hit_range(s: &PolyAtom, w: &Interval) -> Option<(u64, u64)> {
    if s.params.len() != 1 || s.monomials.len() != 1 || w.contains(&s.base) {
        return None;
    }
    let p = &s.params[0];
    let c = &s.monomials[0].coeff;
    let lo = &w.lo - &s.base;
    let hi = &w.hi - &s.base;
    let (xlo, xhi) = if c.is_positive() && lo.is_positive() {
        (c / &hi, c / &lo)
    } else if c.is_negative() && hi.is_negative() {
        (c / &lo, c / &hi)
    } else {
        return Some((1, 0));
    };
    let r = Rational::from_integer(p.r.into());
    let q = Rational::from_integer(p.q.into());
    let first = ((xlo - &r) / &q).ceil().to_integer().max(p.min.into());
    let last = ((xhi - r) / q).floor().to_integer();
    let last = last.to_u64()?;
    match first.to_u64() {
        Some(a) if a <= last => Some((a, last)),
        _ => Some((1, 0)),
    }
}

/// Parameter whose removal is analysed first: the one with the largest
/// possible effect on the value.
fn pick(a: &PolyAtom) -> usize {
    let mut best = 0;
    let mut best_w: Option<Rational> = None;
    for j in 0..a.params.len() {
        let w: Rational =
            a.monomials.iter().filter(|m| m.support >> j & 1 == 1).map(|m| m.coeff.abs()).sum::<Rational>()
                * a.params[j].xmax();
        if best_w.as_ref().is_none_or(|b| &w > b) {
            best = j;
            best_w = Some(w);
        }
    }
    best
}

/// Whether the atom has a value in `w`, or a limit point in `w` (for closed
/// families the limit is itself a member).
pub(crate) fn touches(atom: &Atom, w: &Interval, budget: u64) -> Option<bool> {
    match Scanner::new(budget).scan(atom, w, None) {
        Ok(out) => Some(!out.points.is_empty()),
        Err(ScanError::Accumulation(c)) => Some(w.contains(&c)),
        Err(ScanError::Budget) => None,
    }
}
