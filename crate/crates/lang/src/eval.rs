//! Evaluation of expressions and finite sets, and the built-in functions.

use std::collections::HashMap;
use std::sync::Arc;

use itree_core::optics::{Kind, StateSpace, Value};
use thiserror::Error;

use crate::ast::{BinOp, Expr, ExprKind, SetExpr, SetKind, Span, UnOp};

/// Largest set a range may denote.
pub const MAX_SET: i64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct EvalError {
    pub span: Span,
    pub message: String,
}

fn fail<T>(span: Span, message: impl Into<String>) -> Result<T, EvalError> {
    Err(EvalError {
        span,
        message: message.into(),
    })
}

/// Top-level names visible everywhere.
#[derive(Debug, Default, Clone)]
pub struct Globals {
    pub consts: HashMap<Arc<str>, Value>,
    pub sets: HashMap<Arc<str>, Vec<Value>>,
    /// Enumeration tags and the type that declares them.
    pub tags: HashMap<Arc<str>, Kind>,
}

/// Local variables: a persistent list, innermost binding first.
#[derive(Clone, Default)]
pub struct Env(Option<Arc<Frame>>);

struct Frame {
    name: Arc<str>,
    value: Value,
    next: Env,
}

impl Env {
    pub fn bind(&self, name: Arc<str>, value: Value) -> Env {
        Env(Some(Arc::new(Frame {
            name,
            value,
            next: self.clone(),
        })))
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        let mut cur = &self.0;
        while let Some(f) = cur {
            if &*f.name == name {
                return Some(&f.value);
            }
            cur = &f.next.0;
        }
        None
    }
}

pub struct Scope<'a> {
    pub globals: &'a Globals,
    pub env: &'a Env,
    pub state: Option<&'a StateSpace>,
}

impl Scope<'_> {
    pub fn eval(&self, e: &Expr) -> Result<Value, EvalError> {
        match &e.kind {
            ExprKind::Lit(v) => Ok(v.clone()),
            ExprKind::Var(x) => self.lookup(x, e.span),
            ExprKind::List(items) => Ok(Value::List(
                items.iter().map(|i| self.eval(i)).collect::<Result<_, _>>()?,
            )),
            ExprKind::Pair(a, b) => Ok(Value::pair(self.eval(a)?, self.eval(b)?)),
            ExprKind::Call(f, args) => {
                let vals = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?;
                apply_builtin(&f.name, &vals).or_else(|m| fail(e.span, m))
            }
            ExprKind::Unary(UnOp::Neg, a) => match self.eval(a)? {
                Value::Int(i) => i
                    .checked_neg()
                    .map(Value::Int)
                    .ok_or(())
                    .or_else(|_| fail(e.span, "overflow")),
                v => fail(e.span, format!("cannot negate {v}")),
            },
            ExprKind::Unary(UnOp::Not, a) => match self.eval(a)? {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                v => fail(e.span, format!("`not` applied to {v}")),
            },
            ExprKind::Binary(BinOp::And, a, b) => match self.eval(a)? {
                Value::Bool(false) => Ok(Value::Bool(false)),
                Value::Bool(true) => self.bool(b),
                v => fail(a.span, format!("expected a boolean, found {v}")),
            },
            ExprKind::Binary(BinOp::Or, a, b) => match self.eval(a)? {
                Value::Bool(true) => Ok(Value::Bool(true)),
                Value::Bool(false) => self.bool(b),
                v => fail(a.span, format!("expected a boolean, found {v}")),
            },
            ExprKind::Binary(op, a, b) => binary(*op, self.eval(a)?, self.eval(b)?).or_else(|m| fail(e.span, m)),
            ExprKind::If(c, a, b) => match self.eval(c)? {
                Value::Bool(true) => self.eval(a),
                Value::Bool(false) => self.eval(b),
                v => fail(c.span, format!("expected a boolean, found {v}")),
            },
        }
    }

    fn bool(&self, e: &Expr) -> Result<Value, EvalError> {
        match self.eval(e)? {
            v @ Value::Bool(_) => Ok(v),
            v => fail(e.span, format!("expected a boolean, found {v}")),
        }
    }

    fn lookup(&self, x: &str, span: Span) -> Result<Value, EvalError> {
        if let Some(v) = self.env.get(x) {
            return Ok(v.clone());
        }
        if let Some(s) = self.state {
            if s.schema().index_of(x).is_some() {
                return s.get(x).cloned().or_else(|e| fail(span, e.to_string()));
            }
        }
        if let Some(v) = self.globals.consts.get(x) {
            return Ok(v.clone());
        }
        if self.globals.tags.contains_key(x) {
            return Ok(Value::Enum(x.to_string()));
        }
        fail(span, format!("`{x}` is not defined"))
    }

    pub fn set(&self, s: &SetExpr) -> Result<Vec<Value>, EvalError> {
        match &s.kind {
            SetKind::Range(lo, hi) => match (self.eval(lo)?, self.eval(hi)?) {
                (Value::Int(a), Value::Int(b)) => {
                    if b.saturating_sub(a) >= MAX_SET {
                        return fail(s.span, format!("set {{{a}..{b}}} is too large"));
                    }
                    Ok((a..=b).map(Value::Int).collect())
                }
                (a, b) => fail(s.span, format!("range bounds must be integers, found {a} and {b}")),
            },
            SetKind::Enum(items) => {
                let mut out: Vec<Value> = Vec::new();
                for i in items {
                    let v = self.eval(i)?;
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
                Ok(out)
            }
            SetKind::Named(n) => match self.globals.sets.get(&n.name) {
                Some(vs) => Ok(vs.clone()),
                None => fail(n.span, format!("set `{n}` is not declared")),
            },
        }
    }
}

fn int_op(op: BinOp, a: i64, b: i64) -> Result<Value, String> {
    let r = match op {
        BinOp::Add => a.checked_add(b),
        BinOp::Sub => a.checked_sub(b),
        BinOp::Mul => a.checked_mul(b),
        BinOp::Div if b == 0 => return Err("division by zero".into()),
        BinOp::Mod if b == 0 => return Err("modulo by zero".into()),
        BinOp::Div => a.checked_div_euclid(b),
        BinOp::Mod => a.checked_rem_euclid(b),
        BinOp::Lt => return Ok(Value::Bool(a < b)),
        BinOp::Le => return Ok(Value::Bool(a <= b)),
        BinOp::Gt => return Ok(Value::Bool(a > b)),
        BinOp::Ge => return Ok(Value::Bool(a >= b)),
        _ => unreachable!("not an integer operator"),
    };
    r.map(Value::Int).ok_or_else(|| "integer overflow".into())
}

fn binary(op: BinOp, a: Value, b: Value) -> Result<Value, String> {
    match (op, a, b) {
        (BinOp::Eq, a, b) => Ok(Value::Bool(a == b)),
        (BinOp::Ne, a, b) => Ok(Value::Bool(a != b)),
        (BinOp::Concat, Value::List(mut xs), Value::List(ys)) => {
            xs.extend(ys);
            Ok(Value::List(xs))
        }
        (BinOp::Concat, Value::Str(x), Value::Str(y)) => Ok(Value::Str(x + &y)),
        (op, Value::Int(a), Value::Int(b)) if op != BinOp::Concat => int_op(op, a, b),
        (op, a, b) => Err(format!("`{}` is not defined on {a} and {b}", op.symbol())),
    }
}

/// Signature of a built-in: argument count and result type for the given
/// argument types, or a description of the mismatch.
pub fn builtin_type(name: &str, args: &[Kind]) -> Option<Result<Kind, String>> {
    let list_elem = |k: &Kind| match k {
        Kind::List(e) => Ok((**e).clone()),
        Kind::Any => Ok(Kind::Any),
        other => Err(format!("expected a list, found {other}")),
    };
    let int = |k: &Kind| match k {
        Kind::Int | Kind::Any => Ok(()),
        other => Err(format!("expected int, found {other}")),
    };
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("`{name}` takes {n} argument(s), given {}", args.len()))
        }
    };
    let r = match name {
        "len" => arity(1).and_then(|_| list_elem(&args[0])).map(|_| Kind::Int),
        "hd" | "last" => arity(1).and_then(|_| list_elem(&args[0])),
        "tl" | "front" | "reverse" => arity(1).and_then(|_| list_elem(&args[0])).map(|_| args[0].clone()),
        "nth" => arity(2).and_then(|_| int(&args[1])).and_then(|_| list_elem(&args[0])),
        "elem" => arity(2).and_then(|_| list_elem(&args[1])).map(|_| Kind::Bool),
        "take" | "drop" => arity(2)
            .and_then(|_| int(&args[0]))
            .and_then(|_| list_elem(&args[1]))
            .map(|_| args[1].clone()),
        "sum" => arity(1)
            .and_then(|_| list_elem(&args[0]))
            .and_then(|k| int(&k))
            .map(|_| Kind::Int),
        "abs" => arity(1).and_then(|_| int(&args[0])).map(|_| Kind::Int),
        "min" | "max" => arity(2)
            .and_then(|_| int(&args[0]))
            .and_then(|_| int(&args[1]))
            .map(|_| Kind::Int),
        "fst" | "snd" => arity(1).and_then(|_| match &args[0] {
            Kind::Pair(a, b) => Ok(if name == "fst" { (**a).clone() } else { (**b).clone() }),
            Kind::Any => Ok(Kind::Any),
            other => Err(format!("expected a pair, found {other}")),
        }),
        _ => return None,
    };
    Some(r)
}

pub fn apply_builtin(name: &str, args: &[Value]) -> Result<Value, String> {
    let list = |v: &Value| {
        v.as_list()
            .map(|l| l.to_vec())
            .ok_or_else(|| format!("expected a list, found {v}"))
    };
    let int = |v: &Value| v.as_int().ok_or_else(|| format!("expected an integer, found {v}"));
    let nonempty = |xs: Vec<Value>| {
        if xs.is_empty() {
            Err(format!("`{name}` of the empty list"))
        } else {
            Ok(xs)
        }
    };
    let count = |v: &Value| int(v).map(|n| n.max(0) as usize);
    match (name, args) {
        ("len", [xs]) => Ok(Value::Int(list(xs)?.len() as i64)),
        ("hd", [xs]) => Ok(nonempty(list(xs)?)?.swap_remove(0)),
        ("last", [xs]) => Ok(nonempty(list(xs)?)?.pop().expect("nonempty")),
        ("tl", [xs]) => Ok(Value::List(nonempty(list(xs)?)?.split_off(1))),
        ("front", [xs]) => {
            let mut xs = nonempty(list(xs)?)?;
            xs.pop();
            Ok(Value::List(xs))
        }
        ("reverse", [xs]) => Ok(Value::List(list(xs)?.into_iter().rev().collect())),
        ("nth", [xs, i]) => {
            let (xs, i) = (list(xs)?, int(i)?);
            usize::try_from(i)
                .ok()
                .and_then(|i| xs.get(i).cloned())
                .ok_or_else(|| format!("index {i} out of range"))
        }
        ("elem", [x, xs]) => Ok(Value::Bool(list(xs)?.contains(x))),
        ("take", [n, xs]) => Ok(Value::List(list(xs)?.into_iter().take(count(n)?).collect())),
        ("drop", [n, xs]) => Ok(Value::List(list(xs)?.into_iter().skip(count(n)?).collect())),
        ("sum", [xs]) => list(xs)?
            .iter()
            .try_fold(0i64, |acc, x| {
                int(x).and_then(|x| acc.checked_add(x).ok_or("integer overflow".into()))
            })
            .map(Value::Int),
        ("abs", [x]) => int(x)?
            .checked_abs()
            .map(Value::Int)
            .ok_or_else(|| "integer overflow".into()),
        ("min", [a, b]) => Ok(Value::Int(int(a)?.min(int(b)?))),
        ("max", [a, b]) => Ok(Value::Int(int(a)?.max(int(b)?))),
        ("fst", [Value::Pair(a, _)]) => Ok((**a).clone()),
        ("snd", [Value::Pair(_, b)]) => Ok((**b).clone()),
        _ => Err(format!("`{name}` cannot be applied to ({})", join(args))),
    }
}

fn join(vs: &[Value]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expr;

    fn ev(src: &str) -> Result<Value, EvalError> {
        let g = Globals::default();
        let env = Env::default().bind("s".into(), Value::ints([1, 2]));
        Scope {
            globals: &g,
            env: &env,
            state: None,
        }
        .eval(&parse_expr(src).unwrap())
    }

    #[test]
    fn list_operations() {
        assert_eq!(ev("s ++ [3]").unwrap(), Value::ints([1, 2, 3]));
        assert_eq!(ev("hd(s)").unwrap(), Value::Int(1));
        assert_eq!(ev("tl(s)").unwrap(), Value::ints([2]));
        assert_eq!(ev("len(s) > 0").unwrap(), Value::Bool(true));
        assert!(ev("hd([])").unwrap_err().message.contains("empty"));
    }

    #[test]
    fn arithmetic_is_checked() {
        assert_eq!(ev("(0 - 1) % 5").unwrap(), Value::Int(4));
        assert!(ev("1 / 0").is_err());
        assert!(ev("9223372036854775807 + 1").is_err());
    }

    #[test]
    fn short_circuit() {
        assert_eq!(ev("false and hd([]) == 1").unwrap(), Value::Bool(false));
        assert_eq!(ev("if len(s) == 2 then fst((1, 2)) else 0").unwrap(), Value::Int(1));
    }
}
