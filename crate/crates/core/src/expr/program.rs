use std::collections::HashMap;

use super::{pow_value, BinOp, Expr, Func, Node, ParamBinding};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Input(usize),
    Unary(Func, u32),
    Binary(BinOp, u32, u32),
    Pow(u32, f64),
}

/// A batch of expressions flattened into one register tape.
///
/// Shared subtrees (by pointer) are computed once, which matters for the
/// derivative tables of a metric: the product rule reuses the undifferentiated
/// factors across every partial.
#[derive(Clone, Debug)]
pub struct Program {
    ops: Vec<Op>,
    /// Source node of each register, kept for error reporting.
    sources: Vec<Expr>,
    outputs: Vec<u32>,
    n_inputs: usize,
}

impl Program {
    /// Compiles `exprs` with positional `inputs`; any other symbol must be a
    /// bound parameter and is frozen into a constant.
    pub fn compile(exprs: &[Expr], inputs: &[String], params: &ParamBinding) -> Result<Program> {
        let mut c = Compiler {
            inputs,
            params,
            ops: Vec::new(),
            sources: Vec::new(),
            memo: HashMap::new(),
        };
        let mut outputs = Vec::with_capacity(exprs.len());
        for e in exprs {
            outputs.push(c.emit(e)?);
        }
        Ok(Program {
            ops: c.ops,
            sources: c.sources,
            outputs,
            n_inputs: inputs.len(),
        })
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn tape_len(&self) -> usize {
        self.ops.len()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.outputs.len()];
        let mut regs = Vec::with_capacity(self.ops.len());
        self.eval_into(x, &mut regs, &mut out)?;
        Ok(out)
    }

    /// Evaluates into caller-provided buffers.
    pub fn eval_into(&self, x: &[f64], regs: &mut Vec<f64>, out: &mut [f64]) -> Result<()> {
        assert_eq!(x.len(), self.n_inputs, "program input arity");
        regs.clear();
        for (i, op) in self.ops.iter().enumerate() {
            let v = match *op {
                Op::Const(c) => Some(c),
                Op::Input(k) => Some(x[k]),
                Op::Unary(f, a) => f.apply(regs[a as usize]),
                Op::Binary(b, l, r) => b.apply(regs[l as usize], regs[r as usize]),
                Op::Pow(a, e) => pow_value(regs[a as usize], e),
            };
            match v {
                Some(v) => regs.push(v),
                None => return Err(self.domain_error(i, x)),
            }
        }
        for (o, &r) in out.iter_mut().zip(&self.outputs) {
            *o = regs[r as usize];
        }
        Ok(())
    }

    fn domain_error(&self, reg: usize, x: &[f64]) -> Error {
        let src = &self.sources[reg];
        let reason = match &self.ops[reg] {
            Op::Unary(Func::Ln, _) => "logarithm of a nonpositive value",
            Op::Unary(Func::Sqrt, _) => "square root of a negative value",
            Op::Binary(BinOp::Div, ..) => "division by zero or overflow",
            Op::Pow(..) => "power outside its domain",
            _ => "non-finite result",
        };
        Error::Domain {
            expr: src.to_string(),
            reason: format!("{reason} at input {x:?}"),
        }
    }
}

struct Compiler<'a> {
    inputs: &'a [String],
    params: &'a ParamBinding,
    ops: Vec<Op>,
    sources: Vec<Expr>,
    memo: HashMap<usize, u32>,
}

impl Compiler<'_> {
    fn push(&mut self, op: Op, src: &Expr) -> u32 {
        self.ops.push(op);
        self.sources.push(src.clone());
        (self.ops.len() - 1) as u32
    }

    fn emit(&mut self, e: &Expr) -> Result<u32> {
        if let Some(&r) = self.memo.get(&e.ptr_id()) {
            return Ok(r);
        }
        let op = match e.node() {
            Node::Const(c) => Op::Const(*c),
            Node::Sym(s) => match self.inputs.iter().position(|i| **i == **s) {
                Some(k) => Op::Input(k),
                None => Op::Const(
                    *self
                        .params
                        .get(&**s)
                        .ok_or_else(|| Error::UnboundSymbol(s.to_string()))?,
                ),
            },
            Node::Unary(f, a) => Op::Unary(*f, self.emit(a)?),
            Node::Binary(op, a, b) => {
                let l = self.emit(a)?;
                let r = self.emit(b)?;
                Op::Binary(*op, l, r)
            }
            Node::Pow(b, x) => {
                if let Some(s) = x.symbols().into_iter().find(|s| self.inputs.contains(s)) {
                    return Err(Error::InvalidInput(format!(
                        "exponent of `{e}` depends on input `{s}`"
                    )));
                }
                let params = self.params;
                let ev = x.eval_with(&|n| params.get(n).copied())?;
                Op::Pow(self.emit(b)?, ev)
            }
        };
        let r = self.push(op, e);
        // The memo key is the node address; holding `e` in `sources` keeps it alive.
        self.memo.insert(e.ptr_id(), r);
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, Scope};

    #[test]
    fn shared_subtrees_compile_once() {
        let x = Expr::sym("x");
        let s = x.sin();
        let e = &s * &s + s.clone();
        let p = Program::compile(&[e, s], &["x".into()], &ParamBinding::new()).unwrap();
        // x, sin(x), sin*sin, sum
        assert_eq!(p.tape_len(), 4);
        let v = p.eval(&[0.5]).unwrap();
        let s5 = 0.5f64.sin();
        assert!((v[0] - (s5 * s5 + s5)).abs() < 1e-16);
        assert_eq!(v[1], s5);
    }

    #[test]
    fn matches_tree_evaluation() {
        let scope = Scope::new(&["x", "y"], &["a"]);
        let e = parse_expr("a*exp(x)/(1+y^2) - sqrt(x*x+1)", &scope).unwrap();
        let params = ParamBinding::from([("a".to_string(), 1.5)]);
        let p = Program::compile(&[e.clone()], &["x".into(), "y".into()], &params).unwrap();
        for &(x, y) in &[(0.1, 0.2), (-1.0, 3.0), (2.0, -0.5)] {
            let a = p.eval(&[x, y]).unwrap()[0];
            let b = e.eval(&[("x", x), ("y", y)], &params).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn domain_error_names_subexpression() {
        let scope = Scope::new(&["t"], &[]);
        let e = parse_expr("1 + ln(t)", &scope).unwrap();
        let p = Program::compile(&[e], &["t".into()], &ParamBinding::new()).unwrap();
        match p.eval(&[-1.0]) {
            Err(Error::Domain { expr, .. }) => assert_eq!(expr, "ln(t)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unbound_parameter() {
        let e = Expr::sym("q") * Expr::sym("x");
        let err = Program::compile(&[e], &["x".into()], &ParamBinding::new()).unwrap_err();
        assert!(matches!(err, Error::UnboundSymbol(ref s) if s == "q"));
    }
}
