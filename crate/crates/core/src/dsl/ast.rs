//! Syntax tree and its canonical printed form. Equality ignores positions.

use std::fmt;

use super::lexer::{is_ident_char, is_ident_start};
use super::Pos;
use crate::setfam::{Atom, Rational, SetFamily};

/// Parameter occurrence `id[min]` or `id[min, q, r]` (values `q*n + r`, `n >= min`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Var {
    pub id: String,
    pub min: u64,
    pub q: u64,
    pub r: u64,
}

/// `coeff / v1 * v2 * ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mono {
    pub coeff: Rational,
    pub vars: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Set(Vec<Rational>),
    Fam { base: Rational, monos: Vec<Mono> },
    Call { name: String, args: Vec<Expr> },
    Ident(String),
    Num(Rational),
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr { kind, pos: Pos::default() }
    }

    pub fn call(name: &str, args: Vec<Expr>) -> Self {
        Expr::new(ExprKind::Call { name: name.to_string(), args })
    }

    pub fn num(q: Rational) -> Self {
        Expr::new(ExprKind::Num(q))
    }
}

#[derive(Clone, Debug)]
pub struct Stmt {
    pub name: String,
    pub expr: Expr,
    pub pos: Pos,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.expr == other.expr
    }
}

impl Eq for Stmt {}

/// Bindings followed by an optional result expression.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Program {
    pub stmts: Vec<Stmt>,
    pub result: Option<Expr>,
}

/// Whether `s` prints as a single identifier token.
pub fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(is_ident_start) && cs.all(is_ident_char)
}

fn join<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 1 && self.r == 0 {
            write!(f, "{}[{}]", self.id, self.min)
        } else {
            write!(f, "{}[{}, {}, {}]", self.id, self.min, self.q, self.r)
        }
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/", self.coeff)?;
        join(f, &self.vars, "*")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Set(v) => {
                f.write_str("{")?;
                join(f, v, ", ")?;
                f.write_str("}")
            }
            ExprKind::Fam { base, monos } => {
                write!(f, "fam({base}; ")?;
                join(f, monos, " + ")?;
                f.write_str(")")
            }
            ExprKind::Call { name, args } => {
                write!(f, "{name}(")?;
                join(f, args, ", ")?;
                f.write_str(")")
            }
            ExprKind::Ident(s) => f.write_str(s),
            ExprKind::Num(q) => write!(f, "{q}"),
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "set {} = {}", self.name, self.expr)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.stmts {
            writeln!(f, "{s}")?;
        }
        if let Some(e) = &self.result {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

fn atom_expr(a: &Atom) -> Expr {
    match a {
        Atom::Finite(v) => Expr::new(ExprKind::Set(v.clone())),
        Atom::Poly(p) => {
            let params = p.params();
            let monos = p
                .monomials()
                .iter()
                .map(|m| Mono {
                    coeff: m.coeff.clone(),
                    vars: (0..params.len())
                        .filter(|j| m.support >> j & 1 == 1)
                        .map(|j| {
                            let par = &params[j];
                            Var { id: par.id.clone(), min: par.min, q: par.q, r: par.r }
                        })
                        .collect(),
                })
                .collect();
            Expr::new(ExprKind::Fam { base: p.base().clone(), monos })
        }
    }
}

/// Expression denoting exactly the given family.
pub fn family_expr(f: &SetFamily) -> Expr {
    let mut parts: Vec<Expr> = f.atoms.iter().map(atom_expr).collect();
    let e = match parts.len() {
        0 => Expr::new(ExprKind::Set(Vec::new())),
        1 => parts.remove(0),
        _ => Expr::call("union", parts),
    };
    match &f.clip {
        Some(c) => Expr::call("clip", vec![e, Expr::num(c.lo.clone()), Expr::num(c.hi.clone())]),
        None => e,
    }
}

/// Plain parameter `id[1]`.
pub fn unit_var(id: &str) -> Var {
    Var { id: id.to_string(), min: 1, q: 1, r: 0 }
}
