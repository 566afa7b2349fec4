//! Declarative language for families:
//!
//! ```text
//! program := stmt* expr?          stmt := 'set' IDENT '=' expr
//! expr    := '{' rat (',' rat)* '}' | 'fam' '(' rat ';' mono (('+'|'-') mono)* ')' | call | IDENT
//! mono    := rat '/' var ('*' var)*   var := IDENT '[' INT (',' INT ',' INT)? ']'
//! call    := NAME '(' (arg (',' arg)*)? ')'   arg := expr | rat
//! rat     := '-'? INT ('/' INT)?
//! ```

mod ast;
mod eval;
mod lexer;
mod parser;

use std::fmt;

use thiserror::Error;

pub use ast::{family_expr, is_ident, unit_var, Expr, ExprKind, Mono, Program, Stmt, Var};
pub use eval::{check, eval, signature, Kind, Param, Signature, Value, BUILTINS};
pub use parser::parse_syntax;

/// One-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    Syntax,
    Unbound,
    Arity,
    Type,
    Domain,
}

impl ErrorKind {
    /// Stable machine-readable code.
    pub fn code(self) -> &'static str {
        match self {
            ErrorKind::Syntax => "E001",
            ErrorKind::Unbound => "E002",
            ErrorKind::Arity => "E003",
            ErrorKind::Type => "E004",
            ErrorKind::Domain => "E005",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Syntax => "syntax",
            ErrorKind::Unbound => "unbound identifier",
            ErrorKind::Arity => "arity",
            ErrorKind::Type => "type",
            ErrorKind::Domain => "domain",
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{pos}: error[{}] {}: {message} (at `{token}`)", kind.code(), kind.name())]
pub struct DslError {
    pub kind: ErrorKind,
    pub pos: Pos,
    pub token: String,
    pub message: String,
}

impl DslError {
    pub fn new(kind: ErrorKind, pos: Pos, token: impl Into<String>, message: impl Into<String>) -> Self {
        DslError { kind, pos, token: token.into(), message: message.into() }
    }
}

/// Parses and checks a program.
pub fn parse(text: &str) -> Result<Program, DslError> {
    let p = parse_syntax(text)?;
    check(&p)?;
    Ok(p)
}

/// Parses, checks and evaluates a program.
pub fn evaluate(text: &str) -> Result<Value, DslError> {
    eval(&parse(text)?)
}
