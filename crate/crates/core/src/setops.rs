//! Set constructions: affine images, unions, clips, Minkowski sums, `Γ₊`,
//! `D(Γ)`, `N(0, Γ)` and the standard and hyperstandard sets.

use std::collections::HashSet;

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::derived::{is_dcc, DerivedError, SCAN_BUDGET};
use crate::scan::{ScanError, Scanner};
use crate::setfam::{Atom, Interval, Monomial, Parameter, PolyAtom, Rational, SetFamily, MAX_PARAMS};

/// Splits allowed while cutting an atom into pieces inside an interval.
const TRIM_LIMIT: usize = 4096;
/// Largest number of multiset sums built by `gamma_plus`.
const SUM_LIMIT: usize = 5000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OpError {
    #[error("scale factor must be nonzero")]
    ZeroScale,
    #[error("family is not contained in [0, 1]")]
    NotInUnit,
    #[error("family does not satisfy the descending chain condition")]
    NotDcc,
    #[error("cannot cut `{0}` into pieces inside {1}")]
    CannotTrim(String, Box<Interval>),
    #[error("minimal positive element could not be certified: {0}")]
    NoMinimum(String),
    #[error("too many finite sums ({0})")]
    TooLarge(usize),
    #[error("hyperstandard generators must contain 0 and 1")]
    MissingZeroOrOne,
    #[error("hyperstandard generators must be nonnegative")]
    NegativeGenerator,
    #[error("sum would exceed {MAX_PARAMS} parameters")]
    TooManyParams,
    #[error(transparent)]
    Derived(#[from] DerivedError),
}

fn map_values(f: &SetFamily, g: impl Fn(&Rational) -> Rational, coeff: impl Fn(&Rational) -> Rational) -> Vec<Atom> {
    f.atoms
        .iter()
        .map(|a| match a {
            Atom::Finite(v) => Atom::finite(v.iter().map(&g)),
            Atom::Poly(p) => {
                let monomials =
                    p.monomials.iter().map(|m| Monomial { coeff: coeff(&m.coeff), support: m.support }).collect();
                PolyAtom { base: g(&p.base), monomials, params: p.params.clone() }.normalize()
            }
        })
        .collect()
}

/// `{γ + a}`.
pub fn translate(f: &SetFamily, a: &Rational) -> SetFamily {
    let atoms = map_values(f, |x| x + a, Clone::clone);
    let clip = f.clip.as_ref().map(|c| Interval { lo: &c.lo + a, hi: &c.hi + a });
    SetFamily { atoms, clip }
}

/// `{c·γ}`, `c ≠ 0`.
pub fn scale(f: &SetFamily, c: &Rational) -> Result<SetFamily, OpError> {
    if c.is_zero() {
        return Err(OpError::ZeroScale);
    }
    let atoms = map_values(f, |x| x * c, |b| b * c);
    let clip = f.clip.as_ref().map(|i| {
        let (a, b) = (&i.lo * c, &i.hi * c);
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    });
    Ok(SetFamily { atoms, clip })
}

/// `F ∩ [lo, hi]`; an empty interval gives the empty family.
pub fn clip(f: &SetFamily, lo: &Rational, hi: &Rational) -> SetFamily {
    match Interval::new(lo.clone(), hi.clone()) {
        Ok(i) => f.clone().with_clip(i),
        Err(_) => SetFamily::empty(),
    }
}

fn trim_pick(p: &PolyAtom) -> usize {
    (0..p.params.len())
        .max_by(|&a, &b| {
            let wa = p.params[a].xmax();
            let wb = p.params[b].xmax();
            wa.cmp(&wb).then(b.cmp(&a))
        })
        .unwrap_or(0)
}

/// Cuts an atom into pieces whose values all lie in `iv`, dropping pieces
/// outside it.
pub fn trim(atom: &Atom, iv: &Interval) -> Result<Vec<Atom>, OpError> {
    let mut stack = vec![atom.clone()];
    let mut out = Vec::new();
    let mut steps = 0usize;
    while let Some(a) = stack.pop() {
        steps += 1;
        if steps > TRIM_LIMIT {
            return Err(OpError::CannotTrim(atom.to_string(), Box::new(iv.clone())));
        }
        match a {
            Atom::Finite(v) => {
                let v: Vec<Rational> = v.into_iter().filter(|x| iv.contains(x)).collect();
                if !v.is_empty() {
                    out.push(Atom::Finite(v));
                }
            }
            Atom::Poly(p) => {
                let h = p.hull();
                if !h.meets(iv) {
                    continue;
                }
                if h.within(iv) {
                    out.push(Atom::Poly(p));
                    continue;
                }
                let j = trim_pick(&p);
                let min = p.params[j].min;
                stack.push(Atom::Poly(p.raise_min(j, min + 1)));
                stack.push(p.fix(j, min));
            }
        }
    }
    Ok(out)
}

/// Atoms of `F ∩ clip` with the clip folded into the atoms.
pub fn unclipped_atoms(f: &SetFamily) -> Result<Vec<Atom>, OpError> {
    match &f.clip {
        None => Ok(f.atoms.clone()),
        Some(c) => {
            let mut out = Vec::new();
            for a in &f.atoms {
                out.extend(trim(a, c)?);
            }
            Ok(out)
        }
    }
}

/// `F ∪ G`. Families with different clips are first cut into pieces inside
/// their own clips.
pub fn union(f: &SetFamily, g: &SetFamily) -> Result<SetFamily, OpError> {
    if f.atoms.is_empty() {
        return Ok(g.clone());
    }
    if g.atoms.is_empty() {
        return Ok(f.clone());
    }
    if f.clip == g.clip {
        let mut atoms = f.atoms.clone();
        atoms.extend(g.atoms.iter().cloned());
        return Ok(SetFamily { atoms, clip: f.clip.clone() });
    }
    let mut atoms = unclipped_atoms(f)?;
    atoms.extend(unclipped_atoms(g)?);
    Ok(SetFamily { atoms, clip: None })
}

fn fresh_id(used: &HashSet<String>, stem: &str) -> String {
    if !used.contains(stem) {
        return stem.to_string();
    }
    (1..).map(|i| format!("{stem}{i}")).find(|c| !used.contains(c)).expect("unbounded counter")
}

/// Sum of two atoms with independent parameters.
pub fn atom_sum(a: &Atom, b: &Atom) -> Result<Vec<Atom>, OpError> {
    Ok(match (a, b) {
        (Atom::Finite(x), Atom::Finite(y)) => {
            vec![Atom::finite(x.iter().flat_map(|u| y.iter().map(move |v| u + v)))]
        }
        (Atom::Finite(x), p @ Atom::Poly(_)) | (p @ Atom::Poly(_), Atom::Finite(x)) => {
            x.iter().map(|u| p.translate(u)).collect()
        }
        (Atom::Poly(p), Atom::Poly(q)) => {
            if p.params.len() + q.params.len() > MAX_PARAMS {
                return Err(OpError::TooManyParams);
            }
            let mut used: HashSet<String> = p.params.iter().map(|x| x.id.clone()).collect();
            let mut params = p.params.clone();
            for par in &q.params {
                let id = fresh_id(&used, &par.id);
                used.insert(id.clone());
                params.push(Parameter { id, ..par.clone() });
            }
            let shift = p.params.len();
            let mut monomials = p.monomials.clone();
            monomials
                .extend(q.monomials.iter().map(|m| Monomial { coeff: m.coeff.clone(), support: m.support << shift }));
            vec![PolyAtom { base: &p.base + &q.base, monomials, params }.normalize()]
        }
    })
}

/// Minkowski sum `{γ + γ'}`; clips are folded into the atoms first.
pub fn sum(f: &SetFamily, g: &SetFamily) -> Result<SetFamily, OpError> {
    let fa = unclipped_atoms(f)?;
    let ga = unclipped_atoms(g)?;
    let mut atoms = Vec::new();
    for a in &fa {
        for b in &ga {
            atoms.extend(atom_sum(a, b)?);
        }
    }
    Ok(SetFamily { atoms, clip: None }.normalized())
}

fn unit() -> Interval {
    Interval { lo: Rational::zero(), hi: Rational::one() }
}

fn pieces_in_unit(f: &SetFamily) -> Result<Vec<Atom>, OpError> {
    let pieces = unclipped_atoms(f)?;
    for p in &pieces {
        if let Some(h) = p.hull() {
            if !h.within(&unit()) {
                return Err(OpError::NotInUnit);
            }
        }
    }
    Ok(pieces)
}

fn min_positive(a: &Atom) -> Result<Option<Rational>, OpError> {
    let h = match a.hull() {
        Some(h) => h,
        None => return Ok(None),
    };
    if let Atom::Finite(v) = a {
        return Ok(v.iter().filter(|x| x.is_positive()).min().cloned());
    }
    if h.inf.is_positive() {
        return if h.inf_attained { Ok(Some(h.inf)) } else { Err(OpError::NotDcc) };
    }
    let two = Rational::one() + Rational::one();
    let mut low = Rational::zero();
    let mut high: Option<Rational> = None;
    let mut t = h.sup.clone();
    for _ in 0..256 {
        let w = Interval { lo: Rational::zero(), hi: t.clone() };
        match Scanner::new(SCAN_BUDGET).scan(a, &w, None) {
            Ok(out) => {
                if let Some(m) = out.values().into_iter().find(|x| x.is_positive()) {
                    return Ok(Some(m));
                }
                match &high {
                    None => return Ok(None),
                    Some(c) => {
                        low = t;
                        t = (&low + c) / &two;
                    }
                }
            }
            Err(ScanError::Accumulation(c)) => {
                if !c.is_positive() {
                    return Err(OpError::NotDcc);
                }
                t = (&low + &c) / &two;
                high = Some(c);
            }
            Err(ScanError::Budget) => return Err(OpError::NoMinimum("local enumeration budget exhausted".into())),
        }
    }
    Err(OpError::NoMinimum("bisection did not converge".into()))
}

/// Smallest positive element of a DCC family inside `[0, 1]`, if any.
pub fn min_positive_element(f: &SetFamily) -> Result<Option<Rational>, OpError> {
    let pieces = pieces_in_unit(f)?;
    let mut best: Option<Rational> = None;
    for p in &pieces {
        if let Some(m) = min_positive(p)? {
            if best.as_ref().is_none_or(|b| &m < b) {
                best = Some(m);
            }
        }
    }
    Ok(best)
}

fn multisets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        multisets(n, k, i, cur, out);
        cur.pop();
    }
}

/// `Γ₊ = ({0} ∪ {finite sums}) ∩ [0, 1]` for a DCC family in `[0, 1]`.
pub fn gamma_plus(f: &SetFamily) -> Result<SetFamily, OpError> {
    let pieces = pieces_in_unit(f)?;
    if !is_dcc(&SetFamily { atoms: pieces.clone(), clip: None })? {
        return Err(OpError::NotDcc);
    }
    let gbar = min_positive_element(f)?;
    let mut atoms = vec![Atom::Finite(vec![Rational::zero()])];
    let gbar = match gbar {
        Some(g) => g,
        None => return Ok(SetFamily { atoms, clip: Some(unit()) }.normalized()),
    };
    let kmax = (Rational::one() / gbar).floor().to_integer();
    let kmax: usize = kmax.try_into().map_err(|_| OpError::TooLarge(usize::MAX))?;
    let n = pieces.len();
    let mut total = 0usize;
    for k in 1..=kmax {
        let mut combos = Vec::new();
        multisets(n, k, 0, &mut Vec::new(), &mut combos);
        total += combos.len();
        if total > SUM_LIMIT {
            return Err(OpError::TooLarge(total));
        }
        for combo in combos {
            let mut acc = vec![pieces[combo[0]].clone()];
            for &i in &combo[1..] {
                let mut next = Vec::new();
                for a in &acc {
                    next.extend(atom_sum(a, &pieces[i])?);
                }
                next.retain(|a| a.hull().is_some_and(|h| h.inf <= Rational::one()));
                acc = next;
            }
            for a in acc {
                match trim(&a, &unit()) {
                    Ok(pieces) => atoms.extend(pieces),
                    Err(_) => atoms.push(a),
                }
            }
        }
    }
    Ok(SetFamily { atoms, clip: Some(unit()) }.normalized())
}

fn with_fresh(p: &PolyAtom, stem: &str) -> (Vec<Parameter>, u64) {
    let used: HashSet<String> = p.params.iter().map(|x| x.id.clone()).collect();
    let mut params = p.params.clone();
    params.push(Parameter::natural(fresh_id(&used, stem)));
    (params, 1u64 << p.params.len())
}

/// Image of every atom under `γ ↦ u + v·γ/n` over a fresh parameter `n`.
fn over_fresh(atoms: &[Atom], stem: &str, u: &Rational, v: &Rational) -> Vec<Atom> {
    let mut out = Vec::new();
    for a in atoms {
        match a {
            Atom::Finite(vals) => {
                for g in vals {
                    let c = v * g;
                    if c.is_zero() {
                        out.push(Atom::Finite(vec![u.clone()]));
                    } else {
                        out.push(
                            PolyAtom {
                                base: u.clone(),
                                monomials: vec![Monomial { coeff: c, support: 1 }],
                                params: vec![Parameter::natural(stem)],
                            }
                            .normalize(),
                        );
                    }
                }
            }
            Atom::Poly(p) => {
                let (params, bit) = with_fresh(p, stem);
                let mut monomials = vec![Monomial { coeff: v * &p.base, support: bit }];
                monomials
                    .extend(p.monomials.iter().map(|m| Monomial { coeff: v * &m.coeff, support: m.support | bit }));
                out.push(PolyAtom { base: u.clone(), monomials, params }.normalize());
            }
        }
    }
    out
}

/// `D(Γ) = {(m − 1 + γ)/m : γ ∈ Γ₊}`.
pub fn dgamma(f: &SetFamily) -> Result<SetFamily, OpError> {
    let g = gamma_plus(f)?;
    let one = Rational::one();
    // 1 - (1 - γ)/m = 1 + (γ - 1)/m; shift by -1 first so the fresh
    // monomial carries γ - 1.
    let shifted: Vec<Atom> = g.atoms.iter().map(|a| a.translate(&-&one)).collect();
    let atoms = over_fresh(&shifted, "m", &one, &one);
    Ok(SetFamily { atoms, clip: Some(unit()) }.normalized())
}

/// `N(0, Γ) = {(1 − γ)/n : γ ∈ Γ₊} ∪ {0}`.
pub fn n0(f: &SetFamily) -> Result<SetFamily, OpError> {
    let g = gamma_plus(f)?;
    let one = Rational::one();
    let shifted: Vec<Atom> = g.atoms.iter().map(|a| a.translate(&-&one)).collect();
    let mut atoms = over_fresh(&shifted, "n", &Rational::zero(), &-one);
    atoms.push(Atom::Finite(vec![Rational::zero()]));
    Ok(SetFamily { atoms, clip: Some(unit()) }.normalized())
}

/// `{γ/n}` over a fresh parameter `n`.
pub fn quotient_by_n(f: &SetFamily) -> Result<SetFamily, OpError> {
    let atoms = unclipped_atoms(f)?;
    let out = over_fresh(&atoms, "n", &Rational::zero(), &Rational::one());
    Ok(SetFamily { atoms: out, clip: None }.normalized())
}

/// `{1 − 1/n} ∪ {1}`.
pub fn standard_set() -> SetFamily {
    let one = Rational::one();
    let atoms = over_fresh(&[Atom::Finite(vec![one.clone()])], "n", &one, &-one.clone());
    let mut atoms = atoms;
    atoms.push(Atom::Finite(vec![Rational::one()]));
    SetFamily { atoms, clip: None }.normalized()
}

/// `{1 − γ/n : γ ∈ G0} ∩ [0, 1]`.
pub fn hyperstandard(g0: &[Rational]) -> Result<SetFamily, OpError> {
    if !g0.iter().any(Zero::is_zero) || !g0.iter().any(One::is_one) {
        return Err(OpError::MissingZeroOrOne);
    }
    if g0.iter().any(Signed::is_negative) {
        return Err(OpError::NegativeGenerator);
    }
    let one = Rational::one();
    let atoms = over_fresh(&[Atom::finite(g0.iter().cloned())], "n", &one, &-one.clone());
    Ok(SetFamily { atoms, clip: Some(unit()) }.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfam::{int, member, rat, Verdict};

    fn harmonic(id: &str) -> SetFamily {
        SetFamily::single(PolyAtom::build(int(0), vec![Parameter::natural(id)], vec![(int(1), vec![id])]).unwrap())
    }

    fn is_in(f: &SetFamily, q: Rational) -> bool {
        matches!(member(f, &q, 1000), Ok(Verdict::In(_)))
    }

    #[test]
    fn gamma_plus_of_points() {
        let g = gamma_plus(&SetFamily::finite([rat(1, 2)])).unwrap();
        assert_eq!(g, SetFamily::finite([int(0), rat(1, 2), int(1)]).with_clip(unit()));
        let g = gamma_plus(&SetFamily::finite([rat(1, 3)])).unwrap();
        assert_eq!(g.atoms, vec![Atom::finite([int(0), rat(1, 3), rat(2, 3), int(1)])]);
    }

    #[test]
    fn standard_set_from_dgamma() {
        let d = dgamma(&SetFamily::finite([int(0), int(1)])).unwrap();
        for n in 1..30 {
            assert!(is_in(&d, int(1) - rat(1, n)));
        }
        assert!(is_in(&d, int(1)));
        assert!(!is_in(&d, rat(3, 5)));
    }

    #[test]
    fn n0_gives_harmonic_set() {
        let n = n0(&SetFamily::finite([int(0), int(1)])).unwrap();
        assert!(is_in(&n, int(0)));
        assert!(is_in(&n, rat(1, 7)));
        assert!(!is_in(&n, rat(2, 7)));
    }

    #[test]
    fn sum_renames_parameters() {
        let s = sum(&harmonic("n"), &harmonic("n")).unwrap();
        assert_eq!(s.max_params(), 2);
        assert!(is_in(&s, rat(5, 6)));
    }

    #[test]
    fn sum_with_point_is_translate() {
        let s = sum(&SetFamily::finite([rat(1, 3)]), &harmonic("n")).unwrap();
        assert_eq!(s, translate(&harmonic("n"), &rat(1, 3)));
    }

    #[test]
    fn scale_reverses_clip() {
        let f = harmonic("n").with_clip(Interval::new(rat(1, 3), int(1)).unwrap());
        let g = scale(&f, &int(-1)).unwrap();
        assert_eq!(g.clip, Some(Interval::new(int(-1), rat(-1, 3)).unwrap()));
        assert!(scale(&f, &int(0)).is_err());
    }

    #[test]
    fn trim_diagonal_into_unit() {
        let d = PolyAtom::build(
            int(0),
            vec![Parameter::natural("a"), Parameter::natural("b")],
            vec![(int(1), vec!["a"]), (int(1), vec!["b"])],
        )
        .unwrap();
        let pieces = trim(&d, &unit()).unwrap();
        let f = SetFamily { atoms: pieces, clip: None };
        assert!(is_in(&f, int(1)));
        assert!(is_in(&f, rat(5, 6)));
        assert!(!is_in(&f, rat(3, 2)));
    }

    #[test]
    fn hyperstandard_requires_endpoints() {
        assert_eq!(hyperstandard(&[int(0), int(4)]), Err(OpError::MissingZeroOrOne));
        let h = hyperstandard(&[int(0), int(1), int(4)]).unwrap();
        assert!(is_in(&h, rat(9, 11)));
        assert!(is_in(&h, int(1)));
        assert!(!is_in(&h, rat(-1, 3)));
    }

    #[test]
    fn quotient_of_one() {
        let q = quotient_by_n(&SetFamily::finite([int(1)])).unwrap();
        assert_eq!(q, harmonic("n"));
    }

    #[test]
    fn gamma_plus_rejects_increasing_families() {
        let f = translate(&scale(&harmonic("n"), &int(-1)).unwrap(), &int(1));
        assert!(gamma_plus(&f).is_ok());
        assert_eq!(gamma_plus(&harmonic("n")), Err(OpError::NotDcc));
    }
}
