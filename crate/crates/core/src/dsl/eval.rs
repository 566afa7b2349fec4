//! Name resolution, signature checking and evaluation.

use std::collections::HashMap;

use num::{Signed, ToPrimitive};

use super::ast::{Expr, ExprKind, Mono, Program};
use super::{DslError, ErrorKind, Pos};
use crate::geomsets::{self, Generator};
use crate::oracle::Source;
use crate::setfam::{Atom, Parameter, PolyAtom, Rational, SetFamily};
use crate::setops;

/// Result of evaluating an expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Family(SetFamily),
    Generator(Generator),
}

impl Value {
    pub fn family(&self) -> Option<&SetFamily> {
        match self {
            Value::Family(f) => Some(f),
            Value::Generator(_) => None,
        }
    }

    pub fn source(&self) -> Source<'_> {
        match self {
            Value::Family(f) => Source::Family(f),
            Value::Generator(g) => Source::Generator(g),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Family,
    Generator,
    Number,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Param {
    Fam,
    Rat,
    Nat,
}

/// Builtin signature; a variadic builtin repeats its last parameter.
#[derive(Clone, Copy, Debug)]
pub struct Signature {
    pub name: &'static str,
    pub params: &'static [Param],
    pub variadic: bool,
    pub ret: Kind,
}

use Param::{Fam, Nat, Rat};

const fn sig(name: &'static str, params: &'static [Param], ret: Kind) -> Signature {
    Signature { name, params, variadic: false, ret }
}

pub const BUILTINS: &[Signature] = &[
    sig("std", &[], Kind::Family),
    sig("hyper", &[Fam], Kind::Family),
    sig("ht1", &[], Kind::Family),
    sig("ht2", &[], Kind::Generator),
    sig("ht2b", &[Nat, Nat, Nat], Kind::Family),
    sig("ct2", &[], Kind::Family),
    sig("ct3", &[Nat, Nat], Kind::Family),
    sig("diag", &[Nat], Kind::Family),
    sig("mld1", &[Fam], Kind::Family),
    sig("mld2", &[Rat, Rat, Rat], Kind::Family),
    sig("mld3t", &[Rat], Kind::Family),
    sig("g16", &[], Kind::Family),
    sig("walls", &[], Kind::Family),
    sig("Dc", &[Fam, Rat], Kind::Generator),
    Signature { name: "union", params: &[Fam, Fam], variadic: true, ret: Kind::Family },
    sig("translate", &[Fam, Rat], Kind::Family),
    sig("scale", &[Fam, Rat], Kind::Family),
    sig("sum", &[Fam, Fam], Kind::Family),
    sig("plus", &[Fam], Kind::Family),
    sig("D", &[Fam], Kind::Family),
    sig("N0", &[Fam], Kind::Family),
    sig("quot", &[Fam], Kind::Family),
    sig("clip", &[Fam, Rat, Rat], Kind::Family),
];

pub fn signature(name: &str) -> Option<&'static Signature> {
    BUILTINS.iter().find(|s| s.name == name)
}

fn err(kind: ErrorKind, pos: Pos, token: impl Into<String>, msg: impl Into<String>) -> DslError {
    DslError::new(kind, pos, token, msg)
}

fn head(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Call { name, .. } => name.clone(),
        ExprKind::Fam { .. } => "fam".into(),
        ExprKind::Set(_) => "{".into(),
        ExprKind::Ident(s) => s.clone(),
        ExprKind::Num(q) => q.to_string(),
    }
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Family => "a family",
        Kind::Generator => "a generator",
        Kind::Number => "a number",
    }
}

fn check_fam(monos: &[Mono], pos: Pos) -> Result<(), DslError> {
    let mut seen: HashMap<&str, (u64, u64, u64)> = HashMap::new();
    for m in monos {
        for (i, v) in m.vars.iter().enumerate() {
            if m.vars[..i].iter().any(|w| w.id == v.id) {
                return Err(err(ErrorKind::Type, pos, &v.id, "parameter repeated in one monomial"));
            }
            let spec = (v.min, v.q, v.r);
            if let Some(prev) = seen.insert(&v.id, spec) {
                if prev != spec {
                    return Err(err(ErrorKind::Type, pos, &v.id, "parameter declared with different ranges"));
                }
            }
        }
    }
    Ok(())
}

fn check_expr(e: &Expr, env: &HashMap<String, Kind>) -> Result<Kind, DslError> {
    match &e.kind {
        ExprKind::Set(_) => Ok(Kind::Family),
        ExprKind::Num(_) => Ok(Kind::Number),
        ExprKind::Fam { monos, .. } => {
            check_fam(monos, e.pos)?;
            Ok(Kind::Family)
        }
        ExprKind::Ident(s) => {
            env.get(s).copied().ok_or_else(|| err(ErrorKind::Unbound, e.pos, s, "unbound identifier"))
        }
        ExprKind::Call { name, args } => {
            let sig = signature(name).ok_or_else(|| err(ErrorKind::Unbound, e.pos, name, "unknown function"))?;
            let n = sig.params.len();
            let ok = if sig.variadic { args.len() >= n } else { args.len() == n };
            if !ok {
                let want = if sig.variadic { format!("at least {n}") } else { n.to_string() };
                return Err(err(
                    ErrorKind::Arity,
                    e.pos,
                    name,
                    format!("`{name}` takes {want} arguments, got {}", args.len()),
                ));
            }
            for (i, a) in args.iter().enumerate() {
                let p = sig.params[i.min(n - 1)];
                let k = check_expr(a, env)?;
                match p {
                    Param::Fam if k != Kind::Family => {
                        return Err(err(
                            ErrorKind::Type,
                            a.pos,
                            head(a),
                            format!("argument {} of `{name}` must be a family, found {}", i + 1, kind_name(k)),
                        ))
                    }
                    Param::Rat | Param::Nat if k != Kind::Number => {
                        return Err(err(
                            ErrorKind::Type,
                            a.pos,
                            head(a),
                            format!("argument {} of `{name}` must be a number, found {}", i + 1, kind_name(k)),
                        ))
                    }
                    Param::Nat => {
                        if let ExprKind::Num(q) = &a.kind {
                            if !q.is_integer() || q.is_negative() || q.to_integer().to_u64().is_none() {
                                return Err(err(
                                    ErrorKind::Type,
                                    a.pos,
                                    head(a),
                                    format!("argument {} of `{name}` must be a nonnegative integer", i + 1),
                                ));
                            }
                        }
                    }
                    _ => {}
                }
            }
            Ok(sig.ret)
        }
    }
}

/// Resolves names and checks every call against its signature.
pub fn check(p: &Program) -> Result<Kind, DslError> {
    let mut env = HashMap::new();
    let mut last = None;
    for s in &p.stmts {
        let k = check_expr(&s.expr, &env)?;
        if k == Kind::Number {
            return Err(err(ErrorKind::Type, s.expr.pos, head(&s.expr), "a binding must be a family or generator"));
        }
        env.insert(s.name.clone(), k);
        last = Some(k);
    }
    if let Some(e) = &p.result {
        let k = check_expr(e, &env)?;
        if k == Kind::Number {
            return Err(err(ErrorKind::Type, e.pos, head(e), "result must be a family or generator"));
        }
        last = Some(k);
    }
    Ok(last.expect("parser rejects empty programs"))
}

struct Ctx<'a> {
    env: &'a HashMap<String, Value>,
}

fn domain(pos: Pos, name: &str, e: impl std::fmt::Display) -> DslError {
    err(ErrorKind::Domain, pos, name, e.to_string())
}

fn finite_values(f: &SetFamily, pos: Pos, name: &str) -> Result<Vec<Rational>, DslError> {
    let mut out = Vec::new();
    for a in &f.atoms {
        match a {
            Atom::Finite(v) => out.extend(v.iter().filter(|q| f.in_clip(q)).cloned()),
            Atom::Poly(_) => return Err(domain(pos, name, "expected a finite set")),
        }
    }
    Ok(out)
}

fn nat(q: &Rational) -> u64 {
    q.to_integer().to_u64().expect("checked nonnegative integer")
}

impl Ctx<'_> {
    fn fam(&self, e: &Expr) -> Result<SetFamily, DslError> {
        match self.eval(e)? {
            Value::Family(f) => Ok(f),
            Value::Generator(_) => Err(err(ErrorKind::Type, e.pos, head(e), "expected a family")),
        }
    }

    fn num(&self, e: &Expr) -> Result<Rational, DslError> {
        match &e.kind {
            ExprKind::Num(q) => Ok(q.clone()),
            _ => Err(err(ErrorKind::Type, e.pos, head(e), "expected a number")),
        }
    }

    fn eval(&self, e: &Expr) -> Result<Value, DslError> {
        match &e.kind {
            ExprKind::Set(v) => Ok(Value::Family(SetFamily::finite(v.iter().cloned()).normalized())),
            ExprKind::Num(_) => Err(err(ErrorKind::Type, e.pos, head(e), "a number is not a family")),
            ExprKind::Ident(s) => {
                self.env.get(s).cloned().ok_or_else(|| err(ErrorKind::Unbound, e.pos, s, "unbound identifier"))
            }
            ExprKind::Fam { base, monos } => {
                let mut params: Vec<Parameter> = Vec::new();
                let mut terms = Vec::new();
                for m in monos {
                    for v in &m.vars {
                        if !params.iter().any(|p| p.id == v.id) {
                            let p =
                                Parameter::new(v.id.clone(), v.min, v.q, v.r).map_err(|x| domain(e.pos, "fam", x))?;
                            params.push(p);
                        }
                    }
                    terms.push((m.coeff.clone(), m.vars.iter().map(|v| v.id.as_str()).collect()));
                }
                let atom = PolyAtom::build(base.clone(), params, terms).map_err(|x| domain(e.pos, "fam", x))?;
                Ok(Value::Family(SetFamily::single(atom).normalized()))
            }
            ExprKind::Call { name, args } => self.call(name, args, e.pos),
        }
    }

    fn call(&self, name: &str, args: &[Expr], pos: Pos) -> Result<Value, DslError> {
        let fam = |i: usize| self.fam(&args[i]);
        let num = |i: usize| self.num(&args[i]);
        let op = |r: Result<SetFamily, setops::OpError>| r.map(Value::Family).map_err(|x| domain(pos, name, x));
        let geo = |r: Result<SetFamily, geomsets::GeomError>| r.map(Value::Family).map_err(|x| domain(pos, name, x));
        match name {
            "std" => Ok(Value::Family(setops::standard_set())),
            "hyper" => op(setops::hyperstandard(&finite_values(&fam(0)?, pos, name)?)),
            "ht1" => Ok(Value::Family(geomsets::ht1())),
            "ht2" => Ok(Value::Generator(geomsets::ht2())),
            "ht2b" => geo(geomsets::ht2_branch(nat(&num(0)?), nat(&num(1)?), nat(&num(2)?))),
            "ct2" => Ok(Value::Family(geomsets::ct2())),
            "ct3" => geo(geomsets::ct3_branch(nat(&num(0)?), nat(&num(1)?))),
            "diag" => geo(geomsets::diag_lct(nat(&num(0)?) as usize)),
            "mld1" => Ok(Value::Family(geomsets::mld1(&finite_values(&fam(0)?, pos, name)?))),
            "mld2" => geo(geomsets::mld2_branch(&num(0)?, &num(1)?, &num(2)?)),
            "mld3t" => geo(geomsets::mld3_terminal_branch(&num(0)?)),
            "g16" => Ok(Value::Family(geomsets::gamma16())),
            "walls" => Ok(Value::Family(geomsets::kmoduli_walls())),
            "Dc" => geomsets::dc_generator(&fam(0)?, &num(1)?).map(Value::Generator).map_err(|x| domain(pos, name, x)),
            "union" => {
                let mut acc = fam(0)?;
                for i in 1..args.len() {
                    acc = setops::union(&acc, &fam(i)?).map_err(|x| domain(pos, name, x))?;
                }
                Ok(Value::Family(acc))
            }
            "translate" => Ok(Value::Family(setops::translate(&fam(0)?, &num(1)?))),
            "scale" => op(setops::scale(&fam(0)?, &num(1)?)),
            "sum" => op(setops::sum(&fam(0)?, &fam(1)?)),
            "plus" => op(setops::gamma_plus(&fam(0)?)),
            "D" => op(setops::dgamma(&fam(0)?)),
            "N0" => op(setops::n0(&fam(0)?)),
            "quot" => op(setops::quotient_by_n(&fam(0)?)),
            "clip" => Ok(Value::Family(setops::clip(&fam(0)?, &num(1)?, &num(2)?))),
            _ => Err(err(ErrorKind::Unbound, pos, name, "unknown function")),
        }
    }
}

/// Evaluates a checked program: the result expression, or the last binding.
pub fn eval(p: &Program) -> Result<Value, DslError> {
    let mut env = HashMap::new();
    let mut last = None;
    for s in &p.stmts {
        let v = Ctx { env: &env }.eval(&s.expr)?;
        env.insert(s.name.clone(), v.clone());
        last = Some(v);
    }
    if let Some(e) = &p.result {
        last = Some(Ctx { env: &env }.eval(e)?);
    }
    last.ok_or_else(|| err(ErrorKind::Syntax, Pos::default(), "", "empty program"))
}
