//! Concrete threshold sets: diagonal lcts, the lct sets on the line and the
//! plane, canonical-threshold and mld branches, the K-moduli walls.

use num::{BigInt, One, Signed, Zero};
use thiserror::Error;

use crate::setfam::{int, rat, Atom, FamilyError, Interval, Monomial, Parameter, PolyAtom, Rational, SetFamily};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("branch needs a2 + c2 >= 1")]
    EmptyBranch,
    #[error("branch needs a1 <= a2 + c2 (got a1 = {a1}, k = {k})")]
    FirstExceedsK { a1: u64, k: u64 },
    #[error("k must be at least 2")]
    SmallK,
    #[error("I' must be positive")]
    NonPositiveShift,
    #[error("beta must be positive")]
    NonPositiveBeta,
    #[error("delta must be nonnegative")]
    NegativeDelta,
    #[error("gamma must be positive")]
    NonPositiveGamma,
    #[error("c must be positive")]
    NonPositiveStep,
    #[error("identity check failed: {0}")]
    Identity(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Families given only by an enumeration procedure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generator {
    /// lcts of plane curve germs: `(c1+c2)/(c1c2 + a1c2 + a2c1)`.
    Ht2,
    /// `{(m − 1 + γ + kc)/m : γ ∈ Γ₊}`; `plus` holds `Γ₊`.
    Dc { plus: Box<SetFamily>, c: Rational },
}

fn unit() -> Interval {
    Interval { lo: Rational::zero(), hi: Rational::one() }
}

fn one_param(base: Rational, coeff: Rational, par: Parameter) -> Atom {
    PolyAtom { base, monomials: vec![Monomial { coeff, support: 1 }], params: vec![par] }.normalize()
}

/// `{Σ 1/c_i} ∩ [0, 1]` over `d` independent positive integers.
pub fn diag_lct(d: usize) -> Result<SetFamily, GeomError> {
    if d == 0 {
        return Err(GeomError::ZeroDimension);
    }
    if d > crate::setfam::MAX_PARAMS {
        return Err(FamilyError::TooManyParams.into());
    }
    let width = d.to_string().len();
    let params: Vec<Parameter> = (1..=d).map(|i| Parameter::natural(format!("c{i:0width$}"))).collect();
    let monomials = (0..d).map(|j| Monomial { coeff: Rational::one(), support: 1 << j }).collect();
    let atom = PolyAtom { base: Rational::zero(), monomials, params }.normalize();
    Ok(SetFamily::new(vec![atom], Some(unit())))
}

/// `{1/n} ∪ {0}`, the lcts on the line.
pub fn ht1() -> SetFamily {
    SetFamily::new(
        vec![
            Atom::Finite(vec![Rational::zero()]),
            one_param(Rational::zero(), Rational::one(), Parameter::natural("n")),
        ],
        None,
    )
}

/// Canonical thresholds of surfaces, `{1/n} ∪ {0}`.
pub fn ct2() -> SetFamily {
    SetFamily::new(
        vec![
            one_param(Rational::zero(), Rational::one(), Parameter::natural("n")),
            Atom::Finite(vec![Rational::zero()]),
        ],
        None,
    )
    .normalized()
}

pub fn ht2() -> Generator {
    Generator::Ht2
}

/// Plane lct formula; `None` on a zero denominator or a violated constraint.
pub fn ht2_value(a1: u64, a2: u64, c1: u64, c2: u64) -> Option<Rational> {
    if a1 + c1 < 2.max(a2) || a2 + c2 < 2.max(a1) {
        return None;
    }
    ht2_formula(a1, a2, c1, c2)
}

fn ht2_formula(a1: u64, a2: u64, c1: u64, c2: u64) -> Option<Rational> {
    let den = c1 * c2 + a1 * c2 + a2 * c1;
    (den != 0).then(|| Rational::new(BigInt::from(c1 + c2), BigInt::from(den)))
}

/// `{1/k + (c2(k − a1)/k) / (k·c1 + a1·c2)}` over `c1 >= 1`, `k = a2 + c2`.
pub fn ht2_branch(a1: u64, a2: u64, c2: u64) -> Result<SetFamily, GeomError> {
    let k = a2 + c2;
    if k == 0 {
        return Err(GeomError::EmptyBranch);
    }
    if a1 > k {
        return Err(GeomError::FirstExceedsK { a1, k });
    }
    let ki = k as i64;
    let coeff = rat((c2 * (k - a1)) as i64, ki);
    let par = Parameter::new("c1", 1, k, a1 * c2)?;
    let atom = one_param(rat(1, ki), coeff, par);
    let fam = SetFamily::single(atom);
    for c1 in 1..=2 {
        if let Some(v) = ht2_formula(a1, a2, c1, c2) {
            let got = fam.atoms[0].eval_ids(&[("c1".into(), c1)]).expect("atom");
            if got != v {
                return Err(GeomError::Identity(format!("ht2 branch at c1 = {c1}: {got} != {v}")));
            }
        }
    }
    Ok(fam)
}

/// `{1/k + I'/(k(k·a − I'))}` over integers `a` with `k·a − I' >= 1`.
pub fn ct3_branch(k: u64, iprime: u64) -> Result<SetFamily, GeomError> {
    if k < 2 {
        return Err(GeomError::SmallK);
    }
    if iprime == 0 {
        return Err(GeomError::NonPositiveShift);
    }
    // k·a − I' = k·n + r with r = (−I') mod k.
    let r = (k - iprime % k) % k;
    let min = if r == 0 { 1 } else { 0 };
    let par = Parameter::new("a", min, k, r)?;
    let amin = (par.first_value() + BigInt::from(iprime)) / BigInt::from(k);
    let atom = one_param(rat(1, k as i64), Rational::new(BigInt::from(iprime), BigInt::from(k)), par);
    let fam = SetFamily::single(atom);
    let direct = Rational::new(amin.clone(), BigInt::from(k) * &amin - BigInt::from(iprime));
    let got = fam.atoms[0].eval_ids(&[("a".into(), min)]).expect("atom");
    if got != direct {
        return Err(GeomError::Identity(format!("ct3 branch at a = {amin}: {got} != {direct}")));
    }
    Ok(fam)
}

/// `{α + (β − αδ)/(A + δ)}` over integers `A >= 1`.
pub fn mld2_branch(alpha: &Rational, beta: &Rational, delta: &Rational) -> Result<SetFamily, GeomError> {
    if !beta.is_positive() {
        return Err(GeomError::NonPositiveBeta);
    }
    if delta.is_negative() {
        return Err(GeomError::NegativeDelta);
    }
    let q = delta.denom().clone();
    let p = delta.numer().clone();
    let to_u64 = |x: &BigInt| u64::try_from(x.clone()).map_err(|_| GeomError::Identity("delta too large".into()));
    let par = Parameter::new("A", 1, to_u64(&q)?, to_u64(&p)?)?;
    let coeff = (beta - alpha * delta) * Rational::from_integer(q);
    let atom = one_param(alpha.clone(), coeff, par);
    let fam = SetFamily::single(atom);
    let direct = (alpha + beta) / (Rational::one() + delta);
    let got = fam.atoms[0].eval_ids(&[("A".into(), 1)]).expect("atom");
    if got != direct {
        return Err(GeomError::Identity(format!("mld2 branch at A = 1: {got} != {direct}")));
    }
    Ok(fam)
}

/// `{1 + γ/I}` over integers `I >= 1`.
pub fn mld3_terminal_branch(gamma: &Rational) -> Result<SetFamily, GeomError> {
    if !gamma.is_positive() {
        return Err(GeomError::NonPositiveGamma);
    }
    Ok(SetFamily::single(one_param(Rational::one(), gamma.clone(), Parameter::natural("I"))))
}

/// `{1} ∪ {1 − γ : γ ∈ Γ}` for finite `Γ`.
pub fn mld1(gamma: &[Rational]) -> SetFamily {
    let mut v: Vec<Rational> = gamma.iter().map(|g| Rational::one() - g).collect();
    v.push(Rational::one());
    SetFamily::finite(v)
}

/// `{(5n+m)/(6n+m) : 1 <= m <= 5} ∪ {12/13}` written as `5/6 + (m/6)/(6n + m)`.
pub fn gamma16() -> SetFamily {
    let mut atoms: Vec<Atom> = (1..=5u64)
        .map(|m| {
            let par = Parameter { id: "n".into(), min: 1, q: 6, r: m };
            one_param(rat(5, 6), rat(m as i64, 6), par)
        })
        .collect();
    atoms.push(Atom::Finite(vec![rat(12, 13)]));
    SetFamily::new(atoms, None)
}

/// Walls `1 − 4/n` of the K-moduli of plane quartics.
pub fn kmoduli_walls() -> SetFamily {
    SetFamily::finite([6, 8, 10, 12, 13, 14, 16, 18, 22].iter().map(|&n| int(1) - rat(4, n)))
}

/// Generator for `D(Γ, c)`.
pub fn dc_generator(f: &SetFamily, c: &Rational) -> Result<Generator, GeomError> {
    if !c.is_positive() {
        return Err(GeomError::NonPositiveStep);
    }
    let plus = crate::setops::gamma_plus(f).map_err(|e| GeomError::Identity(e.to_string()))?;
    Ok(Generator::Dc { plus: Box::new(plus), c: c.clone() })
}

/// Value of the `D(Γ, c)` formula.
pub fn dc_value(gamma: &Rational, c: &Rational, m: u64, k: u64) -> Rational {
    let m = Rational::from_integer(BigInt::from(m));
    (&m - Rational::one() + gamma + Rational::from_integer(BigInt::from(k)) * c) / m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfam::{member, Verdict};

    fn is_in(f: &SetFamily, q: Rational) -> bool {
        matches!(member(f, &q, 1000), Ok(Verdict::In(_)))
    }

    #[test]
    fn plane_formula_examples() {
        assert_eq!(ht2_value(0, 0, 2, 3), Some(rat(5, 6)));
        assert_eq!(ht2_value(1, 1, 1, 1), Some(rat(2, 3)));
        assert_eq!(ht2_value(0, 0, 1, 1), None);
    }

    #[test]
    fn plane_branch_k2() {
        let b = ht2_branch(1, 1, 1).unwrap();
        for c1 in 1..200u64 {
            let v = b.atoms[0].eval_ids(&[("c1".into(), c1)]).unwrap();
            assert_eq!(v, rat(1, 2) + Rational::new(1.into(), (2 * (2 * c1 + 1)).into()));
        }
        assert!(ht2_branch(3, 1, 1).is_err());
    }

    #[test]
    fn ct3_example() {
        let b = ct3_branch(2, 1).unwrap();
        assert!(is_in(&b, rat(3, 5)));
        assert!(is_in(&b, int(1)));
        assert!(is_in(&b, rat(2, 3)));
        assert!(!is_in(&b, rat(5, 8)));
        assert!(!is_in(&b, rat(1, 2)));
    }

    #[test]
    fn mld2_plain() {
        let b = mld2_branch(&int(1), &int(1), &int(0)).unwrap();
        assert!(is_in(&b, int(2)));
        assert!(is_in(&b, rat(4, 3)));
        let b = mld2_branch(&rat(1, 2), &int(1), &rat(1, 3)).unwrap();
        let v = b.atoms[0].eval_ids(&[("A".into(), 2)]).unwrap();
        assert_eq!(v, (rat(1, 2) * int(2) + int(1)) / (int(2) + rat(1, 3)));
    }

    #[test]
    fn gamma16_members() {
        let g = gamma16();
        assert!(is_in(&g, rat(6, 7)));
        assert!(is_in(&g, rat(13, 15)));
        assert!(is_in(&g, rat(12, 13)));
        assert!(!is_in(&g, rat(5, 6)));
    }

    #[test]
    fn walls() {
        let w = kmoduli_walls();
        match &w.atoms[0] {
            Atom::Finite(v) => {
                assert_eq!(v.len(), 9);
                assert_eq!(v.last(), Some(&rat(9, 11)));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn diag_members() {
        let d = diag_lct(2).unwrap();
        assert!(is_in(&d, rat(5, 6)));
        assert!(!is_in(&d, rat(3, 2)));
    }
}
