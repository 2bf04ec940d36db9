//! Printing ASTs back to source text. Parentheses are inserted only where the
//! grammar needs them, so `parse(print(ast)) == ast`.

use std::fmt::Write;

use itree_core::optics::{Kind, Value};

use crate::ast::*;

pub fn program(p: &Program) -> String {
    let mut out = String::new();
    for (i, d) in p.decls.iter().enumerate() {
        if i > 0 && matches!(d, Decl::Process(_)) {
            out.push('\n');
        }
        out.push_str(&decl(d));
        out.push('\n');
    }
    out
}

pub fn decl(d: &Decl) -> String {
    match d {
        Decl::Channel { names, ty } => {
            let names: Vec<&str> = names.iter().map(|n| &*n.name).collect();
            match ty {
                Some(t) => format!("channel {} : {}", names.join(", "), kind(&t.kind)),
                None => format!("channel {}", names.join(", ")),
            }
        }
        Decl::Const { name, value } => format!("const {name} = {}", expr(value)),
        Decl::Set { name, value } => format!("set {name} = {}", set(value)),
        Decl::Process(p) => process(p),
    }
}

pub fn process(p: &ProcDecl) -> String {
    let mut out = format!("process {}", p.name);
    if !p.params.is_empty() {
        let ps: Vec<String> = p
            .params
            .iter()
            .map(|p| format!("{} : {}", p.name, kind(&p.ty.kind)))
            .collect();
        write!(out, "({})", ps.join(", ")).unwrap();
    }
    match &p.body {
        ProcBody::Csp(body) => write!(out, " =\n  {}", proc(body)).unwrap(),
        ProcBody::Circus { fields, action } => {
            let fs: Vec<String> = fields
                .iter()
                .map(|f| match &f.init {
                    Some(e) => format!("{} : {} = {}", f.name, kind(&f.ty.kind), expr(e)),
                    None => format!("{} : {}", f.name, kind(&f.ty.kind)),
                })
                .collect();
            write!(
                out,
                " =\n  state {}\n  begin\n    {}\n  end",
                fs.join(", "),
                proc(action)
            )
            .unwrap();
        }
    }
    out
}

pub fn kind(k: &Kind) -> String {
    match k {
        Kind::List(k) => format!("[{}]", kind(k)),
        Kind::Pair(a, b) => format!("({}, {})", kind(a), kind(b)),
        Kind::Enum(tags) => format!("{{{}}}", tags.join(", ")),
        other => other.to_string(),
    }
}

const HIDE: u8 = 0;
const PAR: u8 = 1;
const CHOICE: u8 = 2;
const SEQ: u8 = 3;
const PREFIX: u8 = 4;
const PRIMARY: u8 = 5;

fn level(p: &Proc) -> u8 {
    match &p.kind {
        ProcKind::Hide(..) => HIDE,
        ProcKind::Par(..) | ProcKind::Interleave(..) | ProcKind::CircusPar { .. } => PAR,
        ProcKind::Choice(..) => CHOICE,
        ProcKind::Seq(..) => SEQ,
        ProcKind::Prefix { .. } | ProcKind::Guarded(..) | ProcKind::RepInterleave { .. } => PREFIX,
        _ => PRIMARY,
    }
}

pub fn proc(p: &Proc) -> String {
    let mut out = String::new();
    Printer { out: &mut out }.proc(p, HIDE, false);
    out
}

struct Printer<'a> {
    out: &'a mut String,
}

impl Printer<'_> {
    /// Prints `p` where the grammar expects a term of at least `min` level.
    /// Under `no_seq` (a do-statement) a bare `;` would end the statement.
    fn proc(&mut self, p: &Proc, min: u8, no_seq: bool) {
        if level(p) < min || (no_seq && contains_bare_seq(p)) {
            self.out.push('(');
            self.proc(p, HIDE, false);
            self.out.push(')');
            return;
        }
        match &p.kind {
            ProcKind::Skip => self.out.push_str("skip"),
            ProcKind::Stop => self.out.push_str("stop"),
            ProcKind::Div => self.out.push_str("div"),
            ProcKind::Return(e) => write!(self.out, "return {}", expr(e)).unwrap(),
            ProcKind::Call(name, args) => {
                self.out.push_str(&name.name);
                if !args.is_empty() {
                    write!(self.out, "({})", exprs(args)).unwrap();
                }
            }
            ProcKind::Prefix { event: ev, comm, body } => {
                self.out.push_str(&event(ev));
                match comm {
                    Comm::Sync => {}
                    Comm::Out(e) => write!(self.out, "!{}", atom(e)).unwrap(),
                    Comm::In { var, domain } => {
                        write!(self.out, "?{var}").unwrap();
                        if let Some(d) = domain {
                            write!(self.out, ":{}", set(d)).unwrap();
                        }
                    }
                }
                self.out.push_str(" -> ");
                self.proc(body, PREFIX, no_seq);
            }
            ProcKind::Inp(c, s) => write!(self.out, "inp({c}, {})", set(s)).unwrap(),
            ProcKind::Outp(c, e) => write!(self.out, "outp({c}, {})", expr(e)).unwrap(),
            ProcKind::GuardStmt(e) => write!(self.out, "guard({})", expr(e)).unwrap(),
            ProcKind::Guarded(cond, body) => {
                write!(self.out, "{} & ", expr(cond)).unwrap();
                self.proc(body, PREFIX, no_seq);
            }
            ProcKind::Choice(a, b) => self.infix(a, " [] ", b, CHOICE, no_seq),
            ProcKind::Seq(a, b) => self.infix(a, " ; ", b, SEQ, no_seq),
            ProcKind::Interleave(a, b) => self.infix(a, " ||| ", b, PAR, no_seq),
            ProcKind::Par(a, es, b) => {
                let op = format!(" [| {} |] ", event_set(es));
                self.infix(a, &op, b, PAR, no_seq)
            }
            ProcKind::CircusPar {
                left,
                ns1,
                sync,
                ns2,
                right,
            } => {
                let op = format!(" [| {} | {} | {} |] ", name_set(ns1), event_set(sync), name_set(ns2));
                self.infix(left, &op, right, PAR, no_seq)
            }
            ProcKind::Hide(a, es) => {
                self.proc(a, HIDE, no_seq);
                write!(self.out, " \\ {}", event_set(es)).unwrap();
            }
            ProcKind::Assign(xs, es) => {
                let xs: Vec<&str> = xs.iter().map(|x| &*x.name).collect();
                write!(self.out, "{} := {}", xs.join(", "), exprs(es)).unwrap();
            }
            ProcKind::Do(stmts) => {
                self.out.push_str("do { ");
                for (i, s) in stmts.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str("; ");
                    }
                    if let Some(b) = &s.binder {
                        write!(self.out, "{b} <- ").unwrap();
                    }
                    self.proc(&s.proc, HIDE, true);
                }
                self.out.push_str(" }");
            }
            ProcKind::Loop(body) => {
                self.out.push_str("loop ");
                self.proc(body, PRIMARY, false);
            }
            ProcKind::LoopFrom { var, body, init } => {
                write!(self.out, "loop (\\{var} -> ").unwrap();
                self.proc(body, HIDE, false);
                write!(self.out, ") {}", atom(init)).unwrap();
            }
            ProcKind::While(cond, body) => {
                write!(self.out, "while {} do ", expr(cond)).unwrap();
                self.proc(body, PRIMARY, false);
            }
            ProcKind::RepInterleave { var, set: s, body } => {
                write!(self.out, "||| {var} : {} @ ", set(s)).unwrap();
                self.proc(body, PREFIX, no_seq);
            }
        }
    }

    fn infix(&mut self, a: &Proc, op: &str, b: &Proc, lvl: u8, no_seq: bool) {
        self.proc(a, lvl, no_seq);
        self.out.push_str(op);
        self.proc(b, lvl + 1, no_seq);
    }
}

/// Whether printing `p` without parentheses would expose a `;`. Bodies of
/// prefix-level terms are parenthesised anyway when they are sequences.
fn contains_bare_seq(p: &Proc) -> bool {
    match &p.kind {
        ProcKind::Seq(..) => true,
        ProcKind::Choice(a, b)
        | ProcKind::Interleave(a, b)
        | ProcKind::Par(a, _, b)
        | ProcKind::CircusPar { left: a, right: b, .. } => contains_bare_seq(a) || contains_bare_seq(b),
        ProcKind::Hide(a, _) => contains_bare_seq(a),
        _ => false,
    }
}

fn name_set(ns: &[Ident]) -> String {
    let names: Vec<&str> = ns.iter().map(|n| &*n.name).collect();
    format!("{{{}}}", names.join(", "))
}

pub fn event(e: &EventExpr) -> String {
    let mut out = e.chan.name.to_string();
    for f in &e.fields {
        write!(out, ".{}", atom(f)).unwrap();
    }
    out
}

pub fn event_set(es: &EventSetExpr) -> String {
    match &es.kind {
        EventSetKind::Channels(cs) => {
            let names: Vec<&str> = cs.iter().map(|c| &*c.name).collect();
            if names.is_empty() {
                "{||}".into()
            } else {
                format!("{{| {} |}}", names.join(", "))
            }
        }
        EventSetKind::Events(evs) => {
            let evs: Vec<String> = evs.iter().map(event).collect();
            format!("{{{}}}", evs.join(", "))
        }
    }
}

pub fn set(s: &SetExpr) -> String {
    match &s.kind {
        SetKind::Range(lo, hi) => format!("{{{}..{}}}", expr(lo), expr(hi)),
        SetKind::Enum(items) => format!("{{{}}}", exprs(items)),
        SetKind::Named(n) => n.name.to_string(),
    }
}

const E_IF: u8 = 0;
const E_OR: u8 = 1;
const E_AND: u8 = 2;
const E_NOT: u8 = 3;
const E_CMP: u8 = 4;
const E_CONCAT: u8 = 5;
const E_ADD: u8 = 6;
const E_MUL: u8 = 7;
const E_UNARY: u8 = 8;
const E_ATOM: u8 = 9;

fn op_level(op: BinOp) -> u8 {
    match op {
        BinOp::Or => E_OR,
        BinOp::And => E_AND,
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => E_CMP,
        BinOp::Concat => E_CONCAT,
        BinOp::Add | BinOp::Sub => E_ADD,
        BinOp::Mul | BinOp::Div | BinOp::Mod => E_MUL,
    }
}

fn expr_level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::If(..) => E_IF,
        ExprKind::Binary(op, ..) => op_level(*op),
        ExprKind::Unary(UnOp::Not, _) => E_NOT,
        ExprKind::Unary(UnOp::Neg, _) => E_UNARY,
        ExprKind::Lit(Value::Int(i)) if *i < 0 => E_UNARY,
        _ => E_ATOM,
    }
}

pub fn expr(e: &Expr) -> String {
    expr_at(e, E_IF)
}

fn atom(e: &Expr) -> String {
    expr_at(e, E_ATOM)
}

fn exprs(es: &[Expr]) -> String {
    es.iter().map(expr).collect::<Vec<_>>().join(", ")
}

fn expr_at(e: &Expr, min: u8) -> String {
    if expr_level(e) < min {
        return format!("({})", expr(e));
    }
    match &e.kind {
        ExprKind::Lit(v) => v.to_string(),
        ExprKind::Var(x) => x.to_string(),
        ExprKind::List(items) => format!("[{}]", exprs(items)),
        ExprKind::Pair(a, b) => format!("({}, {})", expr(a), expr(b)),
        ExprKind::Call(f, args) => format!("{f}({})", exprs(args)),
        ExprKind::Unary(UnOp::Neg, a) => {
            // `--` would start a comment.
            let inner = expr_at(a, E_UNARY);
            let gap = if inner.starts_with('-') { " " } else { "" };
            format!("-{gap}{inner}")
        }
        ExprKind::Unary(UnOp::Not, a) => format!("not {}", expr_at(a, E_NOT)),
        ExprKind::Binary(op, a, b) => {
            let lvl = op_level(*op);
            let (l, r) = match op {
                BinOp::Concat => (lvl + 1, lvl),
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => (lvl + 1, lvl + 1),
                _ => (lvl, lvl + 1),
            };
            format!("{} {} {}", expr_at(a, l), op.symbol(), expr_at(b, r))
        }
        ExprKind::If(c, a, b) => format!("if {} then {} else {}", expr(c), expr(a), expr(b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, parse_proc};

    fn round(src: &str) -> String {
        proc(&parse_proc(src).unwrap())
    }

    #[test]
    fn minimal_parentheses() {
        assert_eq!(round("(a -> skip) [] (b -> stop)"), "a -> skip [] b -> stop");
        assert_eq!(round("a -> (skip [] stop)"), "a -> (skip [] stop)");
        assert_eq!(round("(P ; Q) ; R"), "P ; Q ; R");
        assert_eq!(round("P ; (Q ; R)"), "P ; (Q ; R)");
        assert_eq!(expr(&parse_expr("(1 + 2) * 3").unwrap()), "(1 + 2) * 3");
        assert_eq!(expr(&parse_expr("1 - (2 - 3)").unwrap()), "1 - (2 - 3)");
    }

    #[test]
    fn sequences_inside_do_are_parenthesised() {
        assert_eq!(
            round("do { (a -> skip ; b -> skip); return 1 }"),
            "do { (a -> skip ; b -> skip); return 1 }"
        );
        assert_eq!(round("do { a -> (P ; Q) }"), "do { a -> (P ; Q) }");
    }

    #[test]
    fn communications() {
        assert_eq!(
            round("c.(1 + 1)!(x - 1) -> d?y:{0..3} -> skip"),
            "c.(1 + 1)!(x - 1) -> d?y:{0..3} -> skip"
        );
    }
}
