//! Recursive descent parser.

use num::{BigInt, ToPrimitive, Zero};

use super::ast::{Expr, ExprKind, Mono, Program, Stmt, Var};
use super::lexer::{lex, Tok, Token};
use super::{DslError, ErrorKind, Pos};
use crate::setfam::Rational;

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

fn is_kw(t: &Tok, kw: &str) -> bool {
    matches!(t, Tok::Ident(s) if s == kw)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, DslError> {
        let t = &self.toks[self.at];
        Err(DslError::new(ErrorKind::Syntax, t.pos, t.tok.to_string(), msg))
    }

    fn expect(&mut self, want: Tok) -> Result<Token, DslError> {
        if *self.peek() == want {
            Ok(self.next())
        } else {
            self.fail(format!("expected `{want}`"))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), DslError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let p = self.pos();
                self.next();
                Ok((s, p))
            }
            _ => self.fail("expected identifier"),
        }
    }

    fn int(&mut self) -> Result<BigInt, DslError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(n)
            }
            _ => self.fail("expected integer"),
        }
    }

    fn small(&mut self) -> Result<u64, DslError> {
        let p = self.pos();
        let n = self.int()?;
        n.to_u64().ok_or_else(|| DslError::new(ErrorKind::Syntax, p, n.to_string(), "integer too large"))
    }

    /// `'-'? INT ('/' INT)?`; a `/` followed by anything but an integer is left unread.
    fn rat(&mut self) -> Result<Rational, DslError> {
        let neg = if *self.peek() == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        let n = self.int()?;
        let mut d = BigInt::from(1);
        if *self.peek() == Tok::Slash && matches!(self.peek2(), Tok::Int(_)) {
            self.next();
            let p = self.pos();
            d = self.int()?;
            if d.is_zero() {
                return Err(DslError::new(ErrorKind::Syntax, p, "0", "zero denominator"));
            }
        }
        let q = Rational::new(n, d);
        Ok(if neg { -q } else { q })
    }

    fn var(&mut self) -> Result<Var, DslError> {
        let (id, _) = self.ident()?;
        self.expect(Tok::LBracket)?;
        let min = self.small()?;
        let (mut q, mut r) = (1, 0);
        if *self.peek() == Tok::Comma {
            self.next();
            q = self.small()?;
            self.expect(Tok::Comma)?;
            r = self.small()?;
        }
        self.expect(Tok::RBracket)?;
        Ok(Var { id, min, q, r })
    }

    fn mono(&mut self, negate: bool) -> Result<Mono, DslError> {
        let c = self.rat()?;
        self.expect(Tok::Slash)?;
        let mut vars = vec![self.var()?];
        while *self.peek() == Tok::Star {
            self.next();
            vars.push(self.var()?);
        }
        Ok(Mono { coeff: if negate { -c } else { c }, vars })
    }

    fn fam(&mut self, pos: Pos) -> Result<Expr, DslError> {
        self.expect(Tok::LParen)?;
        let base = self.rat()?;
        self.expect(Tok::Semi)?;
        let mut monos = vec![self.mono(false)?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.next();
                    monos.push(self.mono(false)?);
                }
                Tok::Minus => {
                    self.next();
                    monos.push(self.mono(true)?);
                }
                _ => break,
            }
        }
        self.expect(Tok::RParen)?;
        Ok(Expr { kind: ExprKind::Fam { base, monos }, pos })
    }

    fn set(&mut self, pos: Pos) -> Result<Expr, DslError> {
        self.expect(Tok::LBrace)?;
        let mut v = Vec::new();
        if *self.peek() != Tok::RBrace {
            v.push(self.rat()?);
            while *self.peek() == Tok::Comma {
                self.next();
                v.push(self.rat()?);
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(Expr { kind: ExprKind::Set(v), pos })
    }

    fn arg(&mut self) -> Result<Expr, DslError> {
        match self.peek() {
            Tok::Minus | Tok::Int(_) => {
                let pos = self.pos();
                Ok(Expr { kind: ExprKind::Num(self.rat()?), pos })
            }
            _ => self.expr(),
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LBrace => self.set(pos),
            Tok::Ident(s) if s == "set" => self.fail("`set` is reserved"),
            Tok::Ident(s) if s == "fam" => {
                self.next();
                self.fam(pos)
            }
            Tok::Ident(name) => {
                self.next();
                if *self.peek() != Tok::LParen {
                    return Ok(Expr { kind: ExprKind::Ident(name), pos });
                }
                self.next();
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    args.push(self.arg()?);
                    while *self.peek() == Tok::Comma {
                        self.next();
                        args.push(self.arg()?);
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(Expr { kind: ExprKind::Call { name, args }, pos })
            }
            _ => self.fail("expected expression"),
        }
    }

    fn program(&mut self) -> Result<Program, DslError> {
        let mut prog = Program::default();
        while is_kw(self.peek(), "set") {
            let pos = self.pos();
            self.next();
            let (name, npos) = self.ident()?;
            if name == "set" || name == "fam" {
                return Err(DslError::new(ErrorKind::Syntax, npos, name, "reserved word"));
            }
            self.expect(Tok::Eq)?;
            let expr = self.expr()?;
            prog.stmts.push(Stmt { name, expr, pos });
        }
        if *self.peek() != Tok::Eof {
            prog.result = Some(self.expr()?);
        }
        if *self.peek() != Tok::Eof {
            return self.fail("expected end of input");
        }
        if prog.stmts.is_empty() && prog.result.is_none() {
            return self.fail("empty program");
        }
        Ok(prog)
    }
}

/// Parses the grammar without resolving names.
pub fn parse_syntax(text: &str) -> Result<Program, DslError> {
    Parser { toks: lex(text)?, at: 0 }.program()
}
