use super::{BinOp, Expr, Func};
use crate::error::{Error, Result};

/// Names an expression may refer to. Identifiers resolve against the
/// coordinates first, then the parameters.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    pub coords: Vec<String>,
    pub params: Vec<String>,
}

impl Scope {
    pub fn new(coords: &[&str], params: &[&str]) -> Scope {
        Scope {
            coords: coords.iter().map(|s| s.to_string()).collect(),
            params: params.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn resolves(&self, name: &str) -> bool {
        self.coords.iter().any(|c| c == name) || self.params.iter().any(|p| p == name)
    }

    fn is_coord(&self, name: &str) -> bool {
        self.coords.iter().any(|c| c == name)
    }
}

/// Parses `src` against the grammar
///
/// ```text
/// expr     := term (('+' | '-') term)*
/// term     := unary (('*' | '/') unary)*
/// unary    := '-' unary | factor
/// factor   := base ('^' exponent)?
/// exponent := '-'? base
/// base     := number | ident | '(' expr ')' | func '(' expr ')'
/// func     := sin | cos | exp | ln | sqrt | neg
/// ```
///
/// Exponents may mention parameters but never coordinates.
pub fn parse_expr(src: &str, scope: &Scope) -> Result<Expr> {
    let mut p = Parser {
        src,
        bytes: src.as_bytes(),
        pos: 0,
        scope,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    scope: &'a Scope,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::raw_binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::raw_binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(negate(inner));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let start = self.pos;
        let exp = if self.eat(b'-') {
            negate(self.base()?)
        } else {
            self.base()?
        };
        if let Some(c) = exp.symbols().into_iter().find(|s| self.scope.is_coord(s)) {
            return Err(Error::Parse {
                offset: start,
                message: format!("exponent must be constant, found coordinate `{c}`"),
            });
        }
        Ok(Expr::raw_pow(base, exp))
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(_) => self.ident_or_call(),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let b = self.bytes;
        let mut i = self.pos;
        while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
            i += 1;
        }
        if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
            let mut j = i + 1;
            if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                j += 1;
            }
            if j < b.len() && b[j].is_ascii_digit() {
                while j < b.len() && b[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = &self.src[start..i];
        let v: f64 = text.parse().map_err(|_| Error::Parse {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        self.pos = i;
        Ok(Expr::constant(v))
    }

    fn ident_or_call(&mut self) -> Result<Expr> {
        let start = self.pos;
        let rest = &self.src[start..];
        let len: usize = rest
            .char_indices()
            .take_while(|&(i, c)| c == '_' || c.is_alphabetic() || (i > 0 && c.is_alphanumeric()))
            .map(|(_, c)| c.len_utf8())
            .sum();
        if len == 0 {
            return Err(self.error("unexpected character"));
        }
        let name = &rest[..len];
        self.pos += len;
        if self.peek() == Some(b'(') {
            let func = Func::from_name(name).ok_or(Error::Parse {
                offset: start,
                message: format!("unknown function `{name}` (function-valued parameters are not supported)"),
            })?;
            self.pos += 1;
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(Expr::raw_unary(func, arg));
        }
        if !self.scope.resolves(name) {
            return Err(Error::UnknownIdentifier {
                name: name.to_string(),
                offset: start,
            });
        }
        Ok(Expr::sym(name))
    }
}

fn negate(e: Expr) -> Expr {
    match e.as_const() {
        Some(c) => Expr::constant(-c),
        None => Expr::raw_unary(Func::Neg, e),
    }
}
