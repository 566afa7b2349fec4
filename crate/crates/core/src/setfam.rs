//! Exact rational families: parameters, reciprocal-polynomial atoms, clipped
//! unions of atoms and three-valued membership.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::scan::{ScanError, Scanner};

/// Arbitrary precision rational, always kept in lowest terms.
pub type Rational = BigRational;

/// Largest number of parameters a single atom may carry.
pub const MAX_PARAMS: usize = 64;

/// Corner enumeration is exact up to this many parameters.
const EXACT_HULL_PARAMS: usize = 16;

/// Builds `n/d`. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// The integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q`, `p` or `-p/q`.
pub fn parse_rational(s: &str) -> Result<Rational, FamilyError> {
    s.trim().parse::<Rational>().map_err(|_| FamilyError::BadRational(s.to_string()))
}

/// Reciprocal `1/v` of a positive integer.
pub(crate) fn recip(v: &BigInt) -> Rational {
    Rational::new(BigInt::one(), v.clone())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("parameter `{0}` has modulus 0")]
    ZeroModulus(String),
    #[error("parameter `{0}` takes a value below 1")]
    NonPositive(String),
    #[error("duplicate parameter id `{0}`")]
    DuplicateParam(String),
    #[error("monomial refers to undeclared parameter `{0}`")]
    UndeclaredParam(String),
    #[error("monomial with empty support")]
    EmptySupport,
    #[error("an atom may have at most {MAX_PARAMS} parameters")]
    TooManyParams,
    #[error("search cap must be positive")]
    ZeroCap,
    #[error("empty interval [{}, {}]", .0.0, .0.1)]
    EmptyInterval(Box<(Rational, Rational)>),
    #[error("not a rational number: `{0}`")]
    BadRational(String),
}

/// Closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, FamilyError> {
        if lo > hi {
            return Err(FamilyError::EmptyInterval(Box::new((lo, hi))));
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(q: Rational) -> Self {
        Interval { lo: q.clone(), hi: q }
    }

    /// `[c - r, c + r]`.
    pub fn around(c: &Rational, r: &Rational) -> Self {
        Interval { lo: c - r, hi: c + r }
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn widen(&self, by: &Rational) -> Interval {
        Interval { lo: &self.lo - by, hi: &self.hi + by }
    }

    /// Distance from `q` to the interval, zero inside.
    pub fn distance(&self, q: &Rational) -> Rational {
        if q < &self.lo {
            &self.lo - q
        } else if q > &self.hi {
            q - &self.hi
        } else {
            Rational::zero()
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Integer parameter ranging over the progression `q*n + r`, `n >= min`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Parameter {
    pub id: String,
    pub min: u64,
    pub q: u64,
    pub r: u64,
}

impl Parameter {
    pub fn new(id: impl Into<String>, min: u64, q: u64, r: u64) -> Result<Self, FamilyError> {
        let id = id.into();
        if q == 0 {
            return Err(FamilyError::ZeroModulus(id));
        }
        let p = Parameter { id, min, q, r };
        if p.value(min) < BigInt::one() {
            return Err(FamilyError::NonPositive(p.id));
        }
        Ok(p)
    }

    /// Plain positive integer parameter `n >= 1`.
    pub fn natural(id: impl Into<String>) -> Self {
        Parameter { id: id.into(), min: 1, q: 1, r: 0 }
    }

    pub fn value(&self, n: u64) -> BigInt {
        BigInt::from(self.q) * BigInt::from(n) + BigInt::from(self.r)
    }

    pub fn first_value(&self) -> BigInt {
        self.value(self.min)
    }

    /// Largest reciprocal `1/(q*min + r)`.
    pub fn xmax(&self) -> Rational {
        recip(&self.first_value())
    }

    /// Largest index `n >= min` with `q*n + r <= bound`, if any.
    pub fn last_index_below(&self, bound: &Rational) -> Option<u64> {
        let top = bound.floor().to_integer() - BigInt::from(self.r);
        if top.is_negative() {
            return None;
        }
        let n = top / BigInt::from(self.q);
        let n = n.to_u64().unwrap_or(u64::MAX);
        (n >= self.min).then_some(n)
    }

    /// Index of the progression value `v`, when `v` belongs to it.
    pub fn index_of_value(&self, v: &BigInt) -> Option<u64> {
        let d = v - BigInt::from(self.r);
        if d.is_negative() {
            return None;
        }
        let q = BigInt::from(self.q);
        if !(&d % &q).is_zero() {
            return None;
        }
        let n = (d / q).to_u64()?;
        (n >= self.min).then_some(n)
    }

    pub(crate) fn with_min(&self, min: u64) -> Parameter {
        Parameter { min, ..self.clone() }
    }
}

/// Term `coeff * prod_{j in support} 1/v_j`; `support` is a bit mask over the
/// owning atom's parameter list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub coeff: Rational,
    pub support: u64,
}

/// `{ base + sum_i b_i * prod_{j in S_i} 1/v_j }` over independent parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyAtom {
    pub(crate) base: Rational,
    pub(crate) monomials: Vec<Monomial>,
    pub(crate) params: Vec<Parameter>,
}

/// Building block of a family.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Finite(Vec<Rational>),
    Poly(PolyAtom),
}

/// Exact bounds of an atom over its whole parameter grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hull {
    pub inf: Rational,
    pub inf_attained: bool,
    pub sup: Rational,
    pub sup_attained: bool,
    /// False when the bounds are only an enclosure.
    pub exact: bool,
}

impl Hull {
    /// Whether some value inside the hull can lie in `w`.
    pub fn meets(&self, w: &Interval) -> bool {
        let below = self.inf < w.hi || (self.inf == w.hi && self.inf_attained);
        let above = self.sup > w.lo || (self.sup == w.lo && self.sup_attained);
        below && above
    }

    pub fn within(&self, w: &Interval) -> bool {
        self.inf >= w.lo && self.sup <= w.hi
    }

    pub fn abs_sup(&self) -> Rational {
        self.inf.abs().max(self.sup.abs())
    }
}

fn mask_bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |j| mask >> j & 1 == 1)
}

impl PolyAtom {
    /// Builds and normalizes an atom from id-based monomials.
    pub fn build(
        base: Rational,
        params: Vec<Parameter>,
        monomials: Vec<(Rational, Vec<&str>)>,
    ) -> Result<Atom, FamilyError> {
        if params.len() > MAX_PARAMS {
            return Err(FamilyError::TooManyParams);
        }
        for (i, p) in params.iter().enumerate() {
            if p.q == 0 {
                return Err(FamilyError::ZeroModulus(p.id.clone()));
            }
            if p.first_value() < BigInt::one() {
                return Err(FamilyError::NonPositive(p.id.clone()));
            }
            if params[..i].iter().any(|o| o.id == p.id) {
                return Err(FamilyError::DuplicateParam(p.id.clone()));
            }
        }
        let mut out = Vec::with_capacity(monomials.len());
        for (coeff, ids) in monomials {
            if ids.is_empty() {
                return Err(FamilyError::EmptySupport);
            }
            let mut mask = 0u64;
            for id in ids {
                let j = params
                    .iter()
                    .position(|p| p.id == id)
                    .ok_or_else(|| FamilyError::UndeclaredParam(id.to_string()))?;
                mask |= 1 << j;
            }
            out.push(Monomial { coeff, support: mask });
        }
        Ok(PolyAtom { base, monomials: out, params }.normalize())
    }

    pub fn base(&self) -> &Rational {
        &self.base
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    /// Parameter ids of a support mask, in parameter order.
    pub fn support_ids(&self, mask: u64) -> Vec<&str> {
        mask_bits(mask).map(|j| self.params[j].id.as_str()).collect()
    }

    pub fn param_index(&self, id: &str) -> Option<usize> {
        self.params.iter().position(|p| p.id == id)
    }

    /// Canonical form: merged supports, no zero coefficients, no unused
    /// parameters, parameters sorted by id, monomials sorted by support.
    pub fn normalize(self) -> Atom {
        let PolyAtom { mut base, monomials, params } = self;
        let mut merged: BTreeMap<u64, Rational> = BTreeMap::new();
        for m in monomials {
            if m.support == 0 {
                base += m.coeff;
                continue;
            }
            *merged.entry(m.support).or_insert_with(Rational::zero) += m.coeff;
        }
        merged.retain(|_, c| !c.is_zero());
        if merged.is_empty() {
            return Atom::Finite(vec![base]);
        }
        let used = merged.keys().fold(0u64, |a, m| a | m);
        let mut kept: Vec<usize> = mask_bits(used).collect();
        kept.sort_by(|&a, &b| params[a].id.cmp(&params[b].id));
        let mut remap = [usize::MAX; 64];
        for (new, &old) in kept.iter().enumerate() {
            remap[old] = new;
        }
        let new_params: Vec<Parameter> = kept.iter().map(|&j| params[j].clone()).collect();
        let mut monos: Vec<(Vec<usize>, Monomial)> = merged
            .into_iter()
            .map(|(mask, coeff)| {
                let mut bits: Vec<usize> = mask_bits(mask).map(|j| remap[j]).collect();
                bits.sort_unstable();
                let support = bits.iter().fold(0u64, |a, &j| a | 1 << j);
                (bits, Monomial { coeff, support })
            })
            .collect();
        monos.sort_by(|a, b| a.0.cmp(&b.0));
        Atom::Poly(PolyAtom { base, monomials: monos.into_iter().map(|(_, m)| m).collect(), params: new_params })
    }

    /// Value at parameter indices given positionally.
    pub fn eval(&self, idx: &[u64]) -> Rational {
        let xs: Vec<Rational> = self.params.iter().zip(idx).map(|(p, &n)| recip(&p.value(n))).collect();
        self.eval_x(&xs)
    }

    /// Value at explicit reciprocals `x_j`.
    pub fn eval_x(&self, xs: &[Rational]) -> Rational {
        let mut v = self.base.clone();
        for m in &self.monomials {
            let mut t = m.coeff.clone();
            for j in mask_bits(m.support) {
                t *= &xs[j];
            }
            v += t;
        }
        v
    }

    /// Substitutes `n` for parameter `i`.
    pub fn fix(&self, i: usize, n: u64) -> Atom {
        let x = recip(&self.params[i].value(n));
        let bit = 1u64 << i;
        let monomials = self
            .monomials
            .iter()
            .map(|m| {
                if m.support & bit != 0 {
                    Monomial { coeff: &m.coeff * &x, support: m.support & !bit }
                } else {
                    m.clone()
                }
            })
            .collect();
        PolyAtom { base: self.base.clone(), monomials, params: self.params.clone() }.normalize()
    }

    /// Substitutes several parameters given by id; unknown ids are ignored.
    pub fn fix_ids(&self, fixed: &[(String, u64)]) -> Atom {
        let mut cur = Atom::Poly(self.clone());
        for (id, n) in fixed {
            if let Atom::Poly(p) = &cur {
                if let Some(i) = p.param_index(id) {
                    cur = p.fix(i, *n);
                }
            }
        }
        cur
    }

    /// Restricts parameter `i` to indices `>= min`.
    pub fn raise_min(&self, i: usize, min: u64) -> PolyAtom {
        let mut a = self.clone();
        if min > a.params[i].min {
            a.params[i] = a.params[i].with_min(min);
        }
        a
    }

    /// Limit family when every parameter in `tmask` tends to infinity.
    pub fn limit(&self, tmask: u64) -> Atom {
        let monomials = self.monomials.iter().filter(|m| m.support & tmask == 0).cloned().collect();
        PolyAtom { base: self.base.clone(), monomials, params: self.params.clone() }.normalize()
    }

    /// Coefficient of `x_j`: the family `sum_{i: j in S_i} b_i * x^{S_i \ j}`.
    pub fn coefficient(&self, j: usize) -> Atom {
        let bit = 1u64 << j;
        let monomials = self
            .monomials
            .iter()
            .filter(|m| m.support & bit != 0)
            .map(|m| Monomial { coeff: m.coeff.clone(), support: m.support & !bit })
            .collect();
        PolyAtom { base: Rational::zero(), monomials, params: self.params.clone() }.normalize()
    }

    pub fn translate(&self, a: &Rational) -> PolyAtom {
        PolyAtom { base: &self.base + a, ..self.clone() }
    }

    /// Bounds of the values with parameter `j` restricted to indices
    /// `lo..=hi`; `None` above the exact-hull parameter limit.
    pub fn range_bounds(&self, j: usize, lo: u64, hi: u64) -> Option<(Rational, Rational)> {
        let k = self.params.len();
        if k > EXACT_HULL_PARAMS {
            return None;
        }
        let pj = &self.params[j];
        let ends = [recip(&pj.value(lo)), recip(&pj.value(hi))];
        let xmax: Vec<Rational> = self.params.iter().map(Parameter::xmax).collect();
        let mut bounds: Option<(Rational, Rational)> = None;
        let mut xs = xmax.clone();
        for z in 0u64..(1u64 << k) {
            for (i, x) in xs.iter_mut().enumerate() {
                let up = z >> i & 1 == 1;
                *x = if i == j {
                    ends[usize::from(up)].clone()
                } else if up {
                    Rational::zero()
                } else {
                    xmax[i].clone()
                };
            }
            let v = self.eval_x(&xs);
            bounds = Some(match bounds {
                None => (v.clone(), v),
                Some((a, b)) => (a.min(v.clone()), b.max(v)),
            });
        }
        bounds
    }

    pub fn hull(&self) -> Hull {
        let k = self.params.len();
        let xmax: Vec<Rational> = self.params.iter().map(Parameter::xmax).collect();
        let full: Vec<Rational> =
            self.monomials.iter().map(|m| mask_bits(m.support).fold(m.coeff.clone(), |t, j| t * &xmax[j])).collect();
        if k > EXACT_HULL_PARAMS {
            let spread: Rational = full.iter().map(|t| t.abs()).sum();
            return Hull {
                inf: &self.base - &spread,
                inf_attained: false,
                sup: &self.base + spread,
                sup_attained: false,
                exact: false,
            };
        }
        let top = self.eval_x(&xmax);
        let mut inf = top.clone();
        let mut sup = top.clone();
        for z in 1u64..(1u64 << k) {
            let mut v = self.base.clone();
            for (m, t) in self.monomials.iter().zip(&full) {
                if m.support & z == 0 {
                    v += t;
                }
            }
            if v < inf {
                inf = v;
            } else if v > sup {
                sup = v;
            }
        }
        Hull { inf_attained: inf == top, sup_attained: sup == top, inf, sup, exact: true }
    }

    /// Union of the supports.
    pub fn used_mask(&self) -> u64 {
        self.monomials.iter().fold(0, |a, m| a | m.support)
    }
}

impl Atom {
    /// Sorted, deduplicated finite atom.
    pub fn finite(values: impl IntoIterator<Item = Rational>) -> Atom {
        let mut v: Vec<Rational> = values.into_iter().collect();
        v.sort();
        v.dedup();
        Atom::Finite(v)
    }

    pub fn param_count(&self) -> usize {
        match self {
            Atom::Finite(_) => 0,
            Atom::Poly(p) => p.params.len(),
        }
    }

    pub fn hull(&self) -> Option<Hull> {
        match self {
            Atom::Finite(v) => Some(Hull {
                inf: v.first()?.clone(),
                inf_attained: true,
                sup: v.last()?.clone(),
                sup_attained: true,
                exact: true,
            }),
            Atom::Poly(p) => Some(p.hull()),
        }
    }

    pub fn translate(&self, a: &Rational) -> Atom {
        match self {
            Atom::Finite(v) => Atom::finite(v.iter().map(|x| x + a)),
            Atom::Poly(p) => Atom::Poly(p.translate(a)),
        }
    }

    /// Evaluates at parameter indices keyed by id; missing parameters take
    /// their minimum.
    pub fn eval_ids(&self, assignment: &[(String, u64)]) -> Option<Rational> {
        match self {
            Atom::Finite(v) => v.first().cloned(),
            Atom::Poly(p) => {
                let idx: Vec<u64> = p
                    .params
                    .iter()
                    .map(|par| assignment.iter().find(|(id, _)| id == &par.id).map_or(par.min, |(_, n)| *n))
                    .collect();
                Some(p.eval(&idx))
            }
        }
    }
}

/// Canonical form of an atom; idempotent.
pub fn normalize(a: &Atom) -> Atom {
    match a {
        Atom::Finite(v) => Atom::finite(v.iter().cloned()),
        Atom::Poly(p) => p.clone().normalize(),
    }
}

/// `(union of atoms) ∩ clip`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SetFamily {
    pub atoms: Vec<Atom>,
    pub clip: Option<Interval>,
}

impl SetFamily {
    pub fn new(atoms: Vec<Atom>, clip: Option<Interval>) -> Self {
        SetFamily { atoms, clip }
    }

    pub fn empty() -> Self {
        SetFamily::default()
    }

    pub fn finite(values: impl IntoIterator<Item = Rational>) -> Self {
        SetFamily { atoms: vec![Atom::finite(values)], clip: None }
    }

    pub fn single(atom: Atom) -> Self {
        SetFamily { atoms: vec![atom], clip: None }
    }

    pub fn with_clip(mut self, clip: Interval) -> Self {
        self.clip = Some(match self.clip {
            Some(c) => match c.intersect(&clip) {
                Some(i) => i,
                None => return SetFamily::empty(),
            },
            None => clip,
        });
        self
    }

    pub fn max_params(&self) -> usize {
        self.atoms.iter().map(Atom::param_count).max().unwrap_or(0)
    }

    pub fn in_clip(&self, q: &Rational) -> bool {
        self.clip.as_ref().is_none_or(|c| c.contains(q))
    }

    /// Normalizes every atom, merges finite atoms and drops duplicates.
    pub fn normalized(&self) -> SetFamily {
        let mut finite: Vec<Rational> = Vec::new();
        let mut polys: Vec<Atom> = Vec::new();
        for a in &self.atoms {
            match normalize(a) {
                Atom::Finite(v) => finite.extend(v),
                p => {
                    if !polys.contains(&p) {
                        polys.push(p);
                    }
                }
            }
        }
        if let Some(c) = &self.clip {
            finite.retain(|q| c.contains(q));
        }
        let mut atoms = Vec::new();
        if !finite.is_empty() {
            atoms.push(Atom::finite(finite));
        }
        atoms.extend(polys);
        SetFamily { atoms, clip: self.clip.clone() }
    }

    /// Value of an assignment, if it lies in the family.
    pub fn eval(&self, a: &Assignment) -> Option<Rational> {
        let atom = self.atoms.get(a.atom)?;
        let v = match atom {
            Atom::Finite(vals) => vals.get(a.element).cloned()?,
            Atom::Poly(_) => atom.eval_ids(&a.values)?,
        };
        self.in_clip(&v).then_some(v)
    }
}

/// Parameter indices realizing a value (or the position in a finite atom).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub atom: usize,
    pub element: usize,
    pub values: Vec<(String, u64)>,
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.values.is_empty() {
            return write!(f, "atom {} element {}", self.atom, self.element);
        }
        let parts: Vec<String> = self.values.iter().map(|(id, n)| format!("{id}={n}")).collect();
        write!(f, "atom {}: {}", self.atom, parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    In(Assignment),
    Out,
    Unknown(String),
}

enum Search {
    Found(Vec<(String, u64)>),
    Exhausted,
    Absent,
}

fn solve_single(p: &PolyAtom, q: &Rational) -> Option<u64> {
    let m = &p.monomials[0];
    let x = (q - &p.base) / &m.coeff;
    if !x.is_positive() || !x.numer().is_one() {
        return None;
    }
    p.params[0].index_of_value(x.denom())
}

fn search(atom: &Atom, q: &Rational, budget: &mut u64, fixed: &mut Vec<(String, u64)>) -> Search {
    let p = match atom {
        Atom::Finite(v) => {
            return if v.contains(q) { Search::Found(fixed.clone()) } else { Search::Absent };
        }
        Atom::Poly(p) => p,
    };
    if !p.hull().meets(&Interval::point(q.clone())) {
        return Search::Absent;
    }
    if p.params.len() == 1 {
        return match solve_single(p, q) {
            Some(n) => {
                let mut f = fixed.clone();
                f.push((p.params[0].id.clone(), n));
                Search::Found(f)
            }
            None => Search::Absent,
        };
    }
    let id = p.params[0].id.clone();
    let mut n = p.params[0].min;
    loop {
        if *budget == 0 {
            return Search::Exhausted;
        }
        *budget -= 1;
        if !p.raise_min(0, n).hull().meets(&Interval::point(q.clone())) {
            return Search::Absent;
        }
        fixed.push((id.clone(), n));
        let r = search(&p.fix(0, n), q, budget, fixed);
        fixed.pop();
        match r {
            Search::Absent => {}
            other => return other,
        }
        n += 1;
    }
}

fn complete(atom: &Atom, idx: usize, mut values: Vec<(String, u64)>) -> Assignment {
    if let Atom::Poly(p) = atom {
        for par in &p.params {
            if !values.iter().any(|(id, _)| id == &par.id) {
                values.push((par.id.clone(), par.min));
            }
        }
        values.retain(|(id, _)| p.param_index(id).is_some());
        values.sort();
    }
    Assignment { atom: idx, element: 0, values }
}

/// Expansions of the depth-first search before the exact local enumeration.
const QUICK_SEARCH: u64 = 64;

/// Decides `q ∈ F`. Single-parameter atoms are solved directly; larger atoms
/// are searched depth first with exact hull pruning, then by an exact local
/// enumeration at `q` whose node budget grows with `cap`.
pub fn member(f: &SetFamily, q: &Rational, cap: u64) -> Result<Verdict, FamilyError> {
    if cap == 0 {
        return Err(FamilyError::ZeroCap);
    }
    if !f.in_clip(q) {
        return Ok(Verdict::Out);
    }
    let mut open = Vec::new();
    for (i, atom) in f.atoms.iter().enumerate() {
        if let Atom::Finite(v) = atom {
            if let Some(e) = v.iter().position(|x| x == q) {
                return Ok(Verdict::In(Assignment { atom: i, element: e, values: vec![] }));
            }
            continue;
        }
        let mut budget = cap.min(QUICK_SEARCH);
        match search(atom, q, &mut budget, &mut Vec::new()) {
            Search::Found(vals) => return Ok(Verdict::In(complete(atom, i, vals))),
            Search::Absent => {}
            Search::Exhausted => open.push(i),
        }
    }
    let mut undecided = None;
    for i in open {
        let atom = &f.atoms[i];
        let mut sc = Scanner::new(cap.saturating_mul(20).max(10_000));
        match sc.scan(atom, &Interval::point(q.clone()), Some(q)) {
            Ok(out) => {
                if let Some(pt) = out.points.into_iter().find(|p| &p.value == q) {
                    return Ok(Verdict::In(complete(atom, i, pt.fixed)));
                }
            }
            Err(ScanError::Accumulation(_)) => {
                undecided = Some(format!("{q} is a higher accumulation point of atom {i}"))
            }
            Err(ScanError::Budget) => undecided = Some(format!("search cap {cap} reached on atom {i}")),
        }
    }
    Ok(match undecided {
        Some(r) => Verdict::Unknown(r),
        None => Verdict::Out,
    })
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Finite(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
            Atom::Poly(p) => {
                write!(f, "{}", p.base)?;
                for m in &p.monomials {
                    let ids: Vec<String> = mask_bits(m.support)
                        .map(|j| {
                            let par = &p.params[j];
                            if par.q == 1 && par.r == 0 {
                                par.id.clone()
                            } else {
                                format!("({}*{}+{})", par.q, par.id, par.r)
                            }
                        })
                        .collect();
                    let sign = if m.coeff.is_negative() { "-" } else { "+" };
                    write!(f, " {sign} {}/{}", m.coeff.abs(), ids.join("*"))?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic() -> Atom {
        PolyAtom::build(int(0), vec![Parameter::natural("n")], vec![(int(1), vec!["n"])]).unwrap()
    }

    #[test]
    fn cancelling_monomials_collapse_to_finite() {
        let a = PolyAtom::build(int(0), vec![Parameter::natural("n")], vec![(int(1), vec!["n"]), (int(-1), vec!["n"])])
            .unwrap();
        assert_eq!(a, Atom::Finite(vec![int(0)]));
    }

    #[test]
    fn unused_parameter_is_dropped() {
        let a = PolyAtom::build(
            rat(1, 2),
            vec![Parameter::natural("m"), Parameter::natural("t")],
            vec![(int(3), vec!["m"])],
        )
        .unwrap();
        match a {
            Atom::Poly(p) => assert_eq!(p.params.len(), 1),
            _ => panic!(),
        }
    }

    #[test]
    fn direct_solve() {
        let f = SetFamily::single(harmonic());
        match member(&f, &rat(1, 2), 10).unwrap() {
            Verdict::In(a) => assert_eq!(a.values, vec![("n".to_string(), 2)]),
            v => panic!("{v:?}"),
        }
        assert_eq!(member(&f, &rat(2, 5), 10).unwrap(), Verdict::Out);
        assert_eq!(member(&f, &int(0), 10).unwrap(), Verdict::Out);
    }

    #[test]
    fn zero_cap_rejected() {
        let f = SetFamily::single(harmonic());
        assert_eq!(member(&f, &int(1), 0), Err(FamilyError::ZeroCap));
    }

    #[test]
    fn hull_of_difference() {
        let a = PolyAtom::build(
            int(0),
            vec![Parameter::natural("n"), Parameter::natural("m")],
            vec![(int(1), vec!["n"]), (int(-1), vec!["m"])],
        )
        .unwrap();
        let h = a.hull().unwrap();
        assert_eq!((h.inf.clone(), h.inf_attained), (int(-1), false));
        assert_eq!((h.sup.clone(), h.sup_attained), (int(1), false));
    }

    #[test]
    fn progression_parameter() {
        let p = Parameter::new("a", 0, 2, 1).unwrap();
        assert_eq!(p.first_value(), BigInt::from(1));
        assert_eq!(p.index_of_value(&BigInt::from(7)), Some(3));
        assert_eq!(p.index_of_value(&BigInt::from(8)), None);
        assert!(Parameter::new("b", 0, 2, 0).is_err());
        assert_eq!(p.last_index_below(&rat(15, 2)), Some(3));
    }

    #[test]
    fn clip_filters_membership() {
        let f = SetFamily::single(harmonic()).with_clip(Interval::new(rat(1, 3), int(1)).unwrap());
        assert_eq!(member(&f, &rat(1, 4), 10).unwrap(), Verdict::Out);
    }

    #[test]
    fn range_bounds_enclose_values() {
        let a = PolyAtom::build(
            int(1),
            vec![Parameter::natural("n"), Parameter::new("m", 1, 2, 1).unwrap()],
            vec![(int(-3), vec!["n"]), (rat(5, 2), vec!["n", "m"]), (int(1), vec!["m"])],
        )
        .unwrap();
        let Atom::Poly(p) = a else { panic!() };
        let j = p.param_index("n").unwrap();
        let (lo, hi) = p.range_bounds(j, 3, 9).unwrap();
        for n in 3..=9u64 {
            for m in 1..40u64 {
                let idx: Vec<u64> = p.params().iter().map(|q| if q.id == "n" { n } else { m }).collect();
                let v = p.eval(&idx);
                assert!(lo <= v && v <= hi);
            }
        }
    }
}
