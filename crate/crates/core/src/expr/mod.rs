//! Scalar expressions over chart coordinates and named parameters.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Subtrees are shared
//! freely, so cloning is cheap and the same node may appear in many
//! derivative expressions. Evaluation of many points should go through
//! [`Program`], which flattens a batch of expressions into a register tape.

mod parse;
mod program;

pub use parse::{parse_expr, Scope};
pub use program::Program;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Values for named real parameters (`a`, `m`, `alpha`, ...).
pub type ParamBinding = BTreeMap<String, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Neg,
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Neg => "neg",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "neg" => Func::Neg,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    /// Applies the function, returning `None` outside its domain.
    pub(crate) fn apply(self, v: f64) -> Option<f64> {
        let out = match self {
            Func::Neg => -v,
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Ln if v > 0.0 => v.ln(),
            Func::Sqrt if v >= 0.0 => v.sqrt(),
            Func::Ln | Func::Sqrt => return None,
        };
        out.is_finite().then_some(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }

    pub(crate) fn apply(self, a: f64, b: f64) -> Option<f64> {
        let out = match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div if b == 0.0 => return None,
            BinOp::Div => a / b,
        };
        out.is_finite().then_some(out)
    }
}

#[derive(Debug)]
pub enum Node {
    Const(f64),
    /// A coordinate or parameter; which one is decided when the expression
    /// is bound to a chart.
    Sym(Arc<str>),
    Unary(Func, Expr),
    Binary(BinOp, Expr, Expr),
    /// `base ^ exponent` where the exponent never mentions a coordinate.
    Pow(Expr, Expr),
}

#[derive(Clone, Debug)]
pub struct Expr(Arc<Node>);

/// `base^exp` with the power rules used everywhere in this crate: integral
/// exponents accept any base, other exponents need a positive base.
pub(crate) fn pow_value(base: f64, exp: f64) -> Option<f64> {
    let out = if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
        if base == 0.0 && exp < 0.0 {
            return None;
        }
        base.powi(exp as i32)
    } else if base > 0.0 {
        base.powf(exp)
    } else {
        return None;
    };
    out.is_finite().then_some(out)
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(v: f64) -> Expr {
        Expr(Arc::new(Node::Const(v)))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn sym(name: &str) -> Expr {
        Expr(Arc::new(Node::Sym(Arc::from(name))))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    // Raw constructors: no folding. Used by the parser so that `simplify`
    // has something to do and parse/render round trips keep the tree shape.

    pub fn raw_unary(f: Func, a: Expr) -> Expr {
        Expr(Arc::new(Node::Unary(f, a)))
    }

    pub fn raw_binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr(Arc::new(Node::Binary(op, a, b)))
    }

    pub fn raw_pow(base: Expr, exp: Expr) -> Expr {
        Expr(Arc::new(Node::Pow(base, exp)))
    }

    // Folding constructors.

    pub fn unary(f: Func, a: Expr) -> Expr {
        if let Some(c) = a.as_const() {
            if let Some(v) = f.apply(c) {
                return Expr::constant(v);
            }
        }
        if f == Func::Neg {
            if let Node::Unary(Func::Neg, inner) = a.node() {
                return inner.clone();
            }
        }
        Expr::raw_unary(f, a)
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(v) = op.apply(x, y) {
                return Expr::constant(v);
            }
        }
        match op {
            BinOp::Add if a.is_zero() => b,
            BinOp::Add | BinOp::Sub if b.is_zero() => a,
            BinOp::Sub if a.is_zero() => Expr::unary(Func::Neg, b),
            BinOp::Mul if a.is_zero() || b.is_zero() => Expr::zero(),
            BinOp::Mul if a.is_one() => b,
            BinOp::Mul | BinOp::Div if b.is_one() => a,
            BinOp::Div if a.is_zero() && b.as_const().is_some_and(|c| c != 0.0) => Expr::zero(),
            _ => Expr::raw_binary(op, a, b),
        }
    }

    pub fn pow(base: Expr, exp: Expr) -> Expr {
        match exp.as_const() {
            Some(e) if e == 0.0 => return Expr::one(),
            Some(e) if e == 1.0 => return base,
            Some(e) => {
                if let Some(v) = base.as_const().and_then(|b| pow_value(b, e)) {
                    return Expr::constant(v);
                }
            }
            None => {}
        }
        Expr::raw_pow(base, exp)
    }

    pub fn powi(&self, n: i32) -> Expr {
        Expr::pow(self.clone(), Expr::constant(n as f64))
    }

    pub fn powf(&self, e: f64) -> Expr {
        Expr::pow(self.clone(), Expr::constant(e))
    }

    pub fn sin(&self) -> Expr {
        Expr::unary(Func::Sin, self.clone())
    }

    pub fn cos(&self) -> Expr {
        Expr::unary(Func::Cos, self.clone())
    }

    pub fn exp(&self) -> Expr {
        Expr::unary(Func::Exp, self.clone())
    }

    pub fn ln(&self) -> Expr {
        Expr::unary(Func::Ln, self.clone())
    }

    pub fn sqrt(&self) -> Expr {
        Expr::unary(Func::Sqrt, self.clone())
    }

    /// Rebuilds the tree through the folding constructors.
    pub fn simplify(&self) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => self.clone(),
            Node::Unary(f, a) => Expr::unary(*f, a.simplify()),
            Node::Binary(op, a, b) => Expr::binary(*op, a.simplify(), b.simplify()),
            Node::Pow(b, e) => Expr::pow(b.simplify(), e.simplify()),
        }
    }

    /// Exact symbolic partial derivative with respect to the symbol `var`.
    /// Every other symbol is treated as a constant.
    pub fn differentiate(&self, var: &str) -> Expr {
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Sym(s) => {
                if &**s == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Unary(f, a) => {
                let da = a.differentiate(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                match f {
                    Func::Neg => -da,
                    Func::Sin => a.cos() * da,
                    Func::Cos => -(a.sin() * da),
                    Func::Exp => self.clone() * da,
                    Func::Ln => da / a.clone(),
                    Func::Sqrt => da / (Expr::constant(2.0) * self.clone()),
                }
            }
            Node::Binary(op, a, b) => {
                let da = a.differentiate(var);
                let db = b.differentiate(var);
                match op {
                    BinOp::Add => da + db,
                    BinOp::Sub => da - db,
                    BinOp::Mul => da * b.clone() + a.clone() * db,
                    BinOp::Div => {
                        if db.is_zero() {
                            da / b.clone()
                        } else {
                            (da * b.clone() - a.clone() * db) / b.powi(2)
                        }
                    }
                }
            }
            Node::Pow(base, e) => {
                let db = base.differentiate(var);
                if db.is_zero() {
                    return Expr::zero();
                }
                let lowered = match e.as_const() {
                    Some(c) => Expr::constant(c - 1.0),
                    None => e.clone() - Expr::one(),
                };
                e.clone() * Expr::pow(base.clone(), lowered) * db
            }
        }
    }

    /// Repeated differentiation along `vars` in order.
    pub fn derivative(&self, vars: &[&str]) -> Expr {
        vars.iter().fold(self.clone(), |e, v| e.differentiate(v))
    }

    /// Replaces every occurrence of symbol `name` by `with`, folding constants.
    pub fn substitute(&self, name: &str, with: &Expr) -> Expr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Sym(s) => {
                if &**s == name {
                    with.clone()
                } else {
                    self.clone()
                }
            }
            Node::Unary(f, a) => Expr::unary(*f, a.substitute(name, with)),
            Node::Binary(op, a, b) => {
                Expr::binary(*op, a.substitute(name, with), b.substitute(name, with))
            }
            Node::Pow(b, e) => Expr::pow(b.substitute(name, with), e.substitute(name, with)),
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Sym(s) => &**s == name,
            Node::Unary(_, a) => a.mentions(name),
            Node::Binary(_, a, b) | Node::Pow(a, b) => a.mentions(name) || b.mentions(name),
        }
    }

    /// Distinct symbols, sorted.
    pub fn symbols(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut std::collections::BTreeSet<String>) {
            match e.node() {
                Node::Const(_) => {}
                Node::Sym(s) => {
                    out.insert(s.to_string());
                }
                Node::Unary(_, a) => walk(a, out),
                Node::Binary(_, a, b) | Node::Pow(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut set = std::collections::BTreeSet::new();
        walk(self, &mut set);
        set.into_iter().collect()
    }

    /// Recursive evaluation. Coordinates are looked up first, then parameters.
    pub fn eval(&self, point: &[(&str, f64)], params: &ParamBinding) -> Result<f64> {
        self.eval_with(&|name| {
            point
                .iter()
                .find(|(n, _)| *n == name)
                .map(|&(_, v)| v)
                .or_else(|| params.get(name).copied())
        })
    }

    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
        let domain = |reason: &str| Error::Domain {
            expr: self.to_string(),
            reason: reason.to_string(),
        };
        match self.node() {
            Node::Const(c) => Ok(*c),
            Node::Sym(s) => lookup(s).ok_or_else(|| Error::UnboundSymbol(s.to_string())),
            Node::Unary(f, a) => {
                let v = a.eval_with(lookup)?;
                f.apply(v).ok_or_else(|| match f {
                    Func::Ln => domain("logarithm of a nonpositive value"),
                    Func::Sqrt => domain("square root of a negative value"),
                    _ => domain("non-finite result"),
                })
            }
            Node::Binary(op, a, b) => {
                let x = a.eval_with(lookup)?;
                let y = b.eval_with(lookup)?;
                op.apply(x, y).ok_or_else(|| {
                    if *op == BinOp::Div && y == 0.0 {
                        domain("division by zero")
                    } else {
                        domain("non-finite result")
                    }
                })
            }
            Node::Pow(b, e) => {
                let x = b.eval_with(lookup)?;
                let y = e.eval_with(lookup)?;
                pow_value(x, y).ok_or_else(|| domain("power outside its domain"))
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self.node() {
            // rendered as a prefix minus, which binds looser than `^`
            Node::Unary(Func::Neg, a) if a.as_const().is_none() => 3,
            Node::Const(_) | Node::Sym(_) | Node::Unary(..) => 5,
            Node::Pow(..) => 4,
            Node::Binary(op, ..) => op.precedence(),
        }
    }
}

fn fmt_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        f.write_str("(-")?;
        fmt_number(f, -c)?;
        f.write_str(")")
    } else if c.fract() == 0.0 && c < 1e15 {
        write!(f, "{c:.0}")
    } else {
        write!(f, "{c:?}")
    }
}

impl fmt::Display for Expr {
    /// Renders in the input grammar; the output parses back to an equal tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => fmt_number(f, *c),
            Node::Sym(s) => f.write_str(s),
            Node::Unary(Func::Neg, a) if a.as_const().is_none() => {
                if a.precedence() >= 4 {
                    write!(f, "-{a}")
                } else {
                    write!(f, "-({a})")
                }
            }
            Node::Unary(func, a) => write!(f, "{}({})", func.name(), a),
            Node::Binary(op, a, b) => {
                let p = op.precedence();
                if a.precedence() < p {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {} ", op.symbol())?;
                // left-associative: an equal-precedence right operand needs parens
                if b.precedence() <= p {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Node::Pow(b, e) => {
                if b.precedence() <= 4 {
                    write!(f, "({b})^")?;
                } else {
                    write!(f, "{b}^")?;
                }
                match e.node() {
                    Node::Unary(Func::Neg, _) => write!(f, "({e})"),
                    Node::Const(_) | Node::Sym(_) | Node::Unary(..) => write!(f, "{e}"),
                    _ => write!(f, "({e})"),
                }
            }
        }
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl std::ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
        impl std::ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self.clone(), rhs.clone())
            }
        }
        impl std::ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary($op, self, Expr::constant(rhs))
            }
        }
        impl std::ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, Expr::constant(self), rhs)
            }
        }
    };
}

impl_binop!(Add, add, BinOp::Add);
impl_binop!(Sub, sub, BinOp::Sub);
impl_binop!(Mul, mul, BinOp::Mul);
impl_binop!(Div, div, BinOp::Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(Func::Neg, self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(Func::Neg, self.clone())
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Expr {
        Expr::constant(v)
    }
}
