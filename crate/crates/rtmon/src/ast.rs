//! Surface syntax tree for stream specifications, plus the canonical
//! pretty-printer used by the parse/print round-trip property.

use crate::time::{secs_to_ns, Rat, NS_PER_SEC};
use crate::value::ValueType;
use std::fmt;

/// Name of the implicitly defined timestamp input stream.
pub const TIME_STREAM: &str = "time";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggregation {
    Count,
    Sum,
    Avg,
    Min,
    Max,
    Integral,
}

impl Aggregation {
    pub fn name(&self) -> &'static str {
        match self {
            Aggregation::Count => "count",
            Aggregation::Sum => "sum",
            Aggregation::Avg => "avg",
            Aggregation::Min => "min",
            Aggregation::Max => "max",
            Aggregation::Integral => "integral",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "count" => Aggregation::Count,
            "sum" => Aggregation::Sum,
            "avg" => Aggregation::Avg,
            "min" => Aggregation::Min,
            "max" => Aggregation::Max,
            "integral" => Aggregation::Integral,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
    Abs,
    Isqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter. Unary operators sit above all
    /// of these.
    pub fn precedence(&self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i128),
    Bool(bool),
    /// Reference to a constant or a synchronous stream access.
    Ref(String),
    /// `target.offset(by:-back).defaults(to:default)`; `back == 0` is kept
    /// until analysis so rule 5 can reject zero self-offsets by name.
    Offset {
        target: String,
        back: u32,
        default: Box<Expr>,
    },
    /// `target.hold().defaults(to:default)`
    Hold {
        target: String,
        default: Box<Expr>,
    },
    /// `target.aggregate(over:<dur>, using:<agg>).defaults(to:default)`
    Window {
        target: String,
        duration: Rat,
        agg: Aggregation,
        default: Box<Expr>,
    },
    /// `delta(target)`, rewritten by desugaring.
    Delta(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Names of all streams/constants referenced by this expression.
    pub fn referenced_names(&self, out: &mut Vec<String>) {
        match self {
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Ref(n) | Expr::Delta(n) => out.push(n.clone()),
            Expr::Offset { target, default, .. } | Expr::Hold { target, default } => {
                out.push(target.clone());
                default.referenced_names(out);
            }
            Expr::Window { target, default, .. } => {
                out.push(target.clone());
                default.referenced_names(out);
            }
            Expr::Unary(_, e) => e.referenced_names(out),
            Expr::Binary(_, a, b) => {
                a.referenced_names(out);
                b.referenced_names(out);
            }
            Expr::Ite(c, t, e) => {
                c.referenced_names(out);
                t.referenced_names(out);
                e.referenced_names(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantDecl {
    pub name: String,
    pub ty: ValueType,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputDecl {
    pub name: String,
    pub ty: ValueType,
    /// True for the injected `time` stream; skipped by the pretty-printer.
    pub implicit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputDecl {
    pub name: String,
    pub ty: Option<ValueType>,
    /// Pacing annotation `@<f>Hz`, if present.
    pub frequency: Option<Rat>,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerDecl {
    pub frequency: Option<Rat>,
    pub expr: Expr,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Constant(ConstantDecl),
    Input(InputDecl),
    Output(OutputDecl),
    Trigger(TriggerDecl),
}

/// A parsed specification: declarations in source order (tuple inputs already
/// flattened, the implicit `time` input injected).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Spec {
    pub decls: Vec<Decl>,
}

impl Spec {
    pub fn constants(&self) -> impl Iterator<Item = &ConstantDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Constant(c) => Some(c),
            _ => None,
        })
    }

    /// Explicitly declared inputs, excluding the implicit `time` stream.
    pub fn inputs(&self) -> impl Iterator<Item = &InputDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Input(i) if !i.implicit => Some(i),
            _ => None,
        })
    }

    pub fn outputs(&self) -> impl Iterator<Item = &OutputDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Output(o) => Some(o),
            _ => None,
        })
    }

    pub fn triggers(&self) -> impl Iterator<Item = &TriggerDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Trigger(t) => Some(t),
            _ => None,
        })
    }
}

/// Renders a nonnegative rational as plain decimal text (`3`, `0.5`).
/// Only values on the nanosecond grid are produced by the parser, so this
/// never needs a fallback in round-trip use.
pub fn rat_decimal(r: Rat) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    match secs_to_ns(r) {
        Ok(ns) => {
            let whole = ns / NS_PER_SEC as u64;
            let mut digits = format!("{:09}", ns % NS_PER_SEC as u64);
            while digits.ends_with('0') {
                digits.pop();
            }
            format!("{whole}.{digits}")
        }
        Err(_) => format!("({r})"),
    }
}

fn fmt_expr(e: &Expr, parent_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Int(v) => write!(f, "{v}"),
        Expr::Bool(b) => write!(f, "{b}"),
        Expr::Ref(n) => write!(f, "{n}"),
        Expr::Offset { target, back, default } => {
            write!(f, "{target}.offset(by:-{back}).defaults(to:")?;
            fmt_expr(default, 0, f)?;
            write!(f, ")")
        }
        Expr::Hold { target, default } => {
            write!(f, "{target}.hold().defaults(to:")?;
            fmt_expr(default, 0, f)?;
            write!(f, ")")
        }
        Expr::Window { target, duration, agg, default } => {
            write!(
                f,
                "{target}.aggregate(over:{}s,using:{}).defaults(to:",
                rat_decimal(*duration),
                agg.name()
            )?;
            fmt_expr(default, 0, f)?;
            write!(f, ")")
        }
        Expr::Delta(n) => write!(f, "delta({n})"),
        Expr::Unary(op, inner) => {
            match op {
                UnOp::Not => write!(f, "!")?,
                UnOp::Neg => write!(f, "-")?,
                UnOp::Abs => {
                    write!(f, "abs(")?;
                    fmt_expr(inner, 0, f)?;
                    return write!(f, ")");
                }
                UnOp::Isqrt => {
                    write!(f, "isqrt(")?;
                    fmt_expr(inner, 0, f)?;
                    return write!(f, ")");
                }
            }
            // Operand of a prefix operator: parenthesize anything that is
            // not atomic to keep `- -x` and `!(a && b)` unambiguous.
            match inner.as_ref() {
                Expr::Binary(..) | Expr::Ite(..) | Expr::Unary(..) => {
                    write!(f, "(")?;
                    fmt_expr(inner, 0, f)?;
                    write!(f, ")")
                }
                _ => fmt_expr(inner, 9, f),
            }
        }
        Expr::Binary(op, a, b) => {
            let p = op.precedence();
            let need = p < parent_prec;
            if need {
                write!(f, "(")?;
            }
            fmt_expr(a, p, f)?;
            write!(f, " {} ", op.symbol())?;
            // Left-associative: right child needs parens at equal precedence.
            fmt_expr(b, p + 1, f)?;
            if need {
                write!(f, ")")?;
            }
            Ok(())
        }
        Expr::Ite(c, t, e) => {
            let need = parent_prec > 0;
            if need {
                write!(f, "(")?;
            }
            write!(f, "if ")?;
            fmt_expr(c, 0, f)?;
            write!(f, " then ")?;
            fmt_expr(t, 0, f)?;
            write!(f, " else ")?;
            fmt_expr(e, 1, f)?;
            if need {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, 0, f)
    }
}

impl fmt::Display for Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            match d {
                Decl::Constant(c) => writeln!(f, "constant {}: {} := {}", c.name, c.ty, c.value)?,
                Decl::Input(i) => {
                    if !i.implicit {
                        writeln!(f, "input {}: {}", i.name, i.ty)?;
                    }
                }
                Decl::Output(o) => {
                    write!(f, "output {}", o.name)?;
                    if let Some(ty) = &o.ty {
                        write!(f, ": {ty}")?;
                    }
                    if let Some(fr) = &o.frequency {
                        write!(f, " @{}Hz", rat_decimal(*fr))?;
                    }
                    writeln!(f, " := {}", o.expr)?;
                }
                Decl::Trigger(t) => {
                    write!(f, "trigger")?;
                    if let Some(fr) = &t.frequency {
                        write!(f, " @{}Hz", rat_decimal(*fr))?;
                    }
                    write!(f, " {}", t.expr)?;
                    if let Some(m) = &t.message {
                        write!(f, " \"{}\"", m.replace('\\', "\\\\").replace('"', "\\\""))?;
                    }
                    writeln!(f)?;
                }
            }
        }
        Ok(())
    }
}
