//! Seeded random atoms and families for property tests and benchmarks.

use rand::Rng;

use crate::dsl::{family_expr, Expr, ExprKind, Program, Stmt};
use crate::setfam::{rat, Atom, Parameter, PolyAtom, Rational, SetFamily};

const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

/// Sign pattern of monomial coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signs {
    Mixed,
    Positive,
    Negative,
}

/// Ranges of a random reciprocal-polynomial atom.
#[derive(Clone, Debug)]
pub struct AtomShape {
    pub max_params: usize,
    pub max_monomials: usize,
    /// Largest absolute coefficient numerator.
    pub numerator: i64,
    pub max_denominator: i64,
    pub max_q: u64,
    pub max_r: u64,
    pub signs: Signs,
    /// Inclusive range of base numerators.
    pub base: (i64, i64),
}

impl Default for AtomShape {
    fn default() -> Self {
        AtomShape {
            max_params: 3,
            max_monomials: 3,
            numerator: 10,
            max_denominator: 3,
            max_q: 2,
            max_r: 1,
            signs: Signs::Mixed,
            base: (-4, 4),
        }
    }
}

/// Random atom with parameters `a, b, c, ...` and the given shape.
pub fn random_atom<R: Rng>(rng: &mut R, shape: &AtomShape) -> Atom {
    let k = rng.gen_range(1..=shape.max_params.min(NAMES.len()));
    let params: Vec<Parameter> = (0..k)
        .map(|i| {
            Parameter::new(NAMES[i], 1, rng.gen_range(1..=shape.max_q), rng.gen_range(0..=shape.max_r))
                .expect("positive progression")
        })
        .collect();
    let nm = rng.gen_range(1..=shape.max_monomials);
    let mut monos = Vec::with_capacity(nm);
    for _ in 0..nm {
        let mut s: Vec<&str> = (0..k).filter(|_| rng.gen_bool(0.5)).map(|i| NAMES[i]).collect();
        if s.is_empty() {
            s.push(NAMES[rng.gen_range(0..k)]);
        }
        let p = match shape.signs {
            Signs::Mixed => match rng.gen_range(-shape.numerator..=shape.numerator) {
                0 => 1,
                p => p,
            },
            Signs::Positive => rng.gen_range(1..=shape.numerator),
            Signs::Negative => -rng.gen_range(1..=shape.numerator),
        };
        monos.push((rat(p, rng.gen_range(1..=shape.max_denominator)), s));
    }
    let base = rat(rng.gen_range(shape.base.0..=shape.base.1), rng.gen_range(1..=shape.max_denominator));
    PolyAtom::build(base, params, monos).expect("valid atom")
}

/// Random rational `p/q` with `|p| <= num`, `1 <= q <= den`.
pub fn random_rational<R: Rng>(rng: &mut R, num: i64, den: i64) -> Rational {
    rat(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

/// Union of up to `max_atoms` random atoms, occasionally with a finite atom.
pub fn random_family<R: Rng>(rng: &mut R, shape: &AtomShape, max_atoms: usize) -> SetFamily {
    let n = rng.gen_range(1..=max_atoms);
    let mut atoms: Vec<Atom> = (0..n).map(|_| random_atom(rng, shape)).collect();
    if rng.gen_bool(0.25) {
        atoms.push(Atom::finite((0..rng.gen_range(1..=3)).map(|_| random_rational(rng, 8, 4))));
    }
    SetFamily::new(atoms, None).normalized()
}

fn nonzero_rational<R: Rng>(rng: &mut R) -> Rational {
    loop {
        let c = random_rational(rng, 5, 4);
        if c != rat(0, 1) {
            return c;
        }
    }
}

fn leaf<R: Rng>(rng: &mut R, names: &[String]) -> Expr {
    if !names.is_empty() && rng.gen_bool(0.3) {
        return Expr::new(ExprKind::Ident(names[rng.gen_range(0..names.len())].clone()));
    }
    let n = |v: i64| Expr::num(rat(v, 1));
    match rng.gen_range(0..10) {
        0 => Expr::call(["std", "ht1", "ct2", "g16", "walls"][rng.gen_range(0..5)], vec![]),
        1 => Expr::call("diag", vec![n(rng.gen_range(1..=3))]),
        2 => Expr::call("ct3", vec![n(rng.gen_range(2..=4)), n(rng.gen_range(1..=4))]),
        _ => family_expr(&random_family(rng, &AtomShape::default(), 2)),
    }
}

/// Random family expression of nesting depth at most `depth`, over
/// constructors, unions, translations, scalings, clips and the given names.
pub fn random_expr<R: Rng>(rng: &mut R, depth: usize, names: &[String]) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return leaf(rng, names);
    }
    let sub = |rng: &mut R| random_expr(rng, depth - 1, names);
    match rng.gen_range(0..4) {
        0 => {
            let k = rng.gen_range(2..=3);
            Expr::call("union", (0..k).map(|_| sub(rng)).collect())
        }
        1 => {
            let e = sub(rng);
            Expr::call("translate", vec![e, Expr::num(random_rational(rng, 5, 4))])
        }
        2 => {
            let e = sub(rng);
            Expr::call("scale", vec![e, Expr::num(nonzero_rational(rng))])
        }
        _ => {
            let e = sub(rng);
            let a = random_rational(rng, 8, 4);
            let b = random_rational(rng, 8, 4);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            Expr::call("clip", vec![e, Expr::num(lo), Expr::num(hi)])
        }
    }
}

/// Random program: up to two bindings followed by a result expression.
pub fn random_program<R: Rng>(rng: &mut R, depth: usize) -> Program {
    let mut names: Vec<String> = Vec::new();
    let mut stmts = Vec::new();
    for i in 0..rng.gen_range(0..=2) {
        let expr = random_expr(rng, depth, &names);
        let name = format!("s{i}");
        stmts.push(Stmt { name: name.clone(), expr, pos: Default::default() });
        names.push(name);
    }
    let result = Some(random_expr(rng, depth, &names));
    Program { stmts, result }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_and_signed() {
        let shape = AtomShape { signs: Signs::Negative, ..AtomShape::default() };
        let a: Vec<Atom> = (0..20).map(|_| random_atom(&mut ChaCha8Rng::seed_from_u64(3), &shape)).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            if let Atom::Poly(p) = random_atom(&mut rng, &shape) {
                assert!(p.monomials().iter().all(|m| m.coeff < Rational::from_integer(0.into())));
            }
        }
    }
}
