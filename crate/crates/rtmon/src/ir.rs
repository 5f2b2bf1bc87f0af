//! Lowered expression representation evaluated by the engine and the
//! reference interpreter: names resolved to stream indices, constants folded,
//! window accesses numbered.

use crate::ast::{Aggregation, BinOp, UnOp};
use crate::desugar::{Program, Slot};
use crate::time::Rat;
use crate::typing::{TypedExpr, TypedKind};
use crate::value::{Value, ValueType};

/// A runtime-addressable stream (constants are folded away).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamSlot {
    Input(usize),
    Output(usize),
    Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ir {
    Lit(Value),
    Sync(StreamSlot),
    Offset {
        slot: StreamSlot,
        back: u32,
        default: Box<Ir>,
    },
    Hold {
        slot: StreamSlot,
        default: Box<Ir>,
    },
    Window {
        idx: usize,
        default: Box<Ir>,
    },
    Unary(UnOp, Box<Ir>),
    Binary(BinOp, Box<Ir>, Box<Ir>),
    Ite(Box<Ir>, Box<Ir>, Box<Ir>),
}

/// Static description of one sliding-window instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowInfo {
    /// Output stream whose expression contains this window.
    pub owner: usize,
    pub target: StreamSlot,
    pub duration: Rat,
    pub agg: Aggregation,
    /// Type of the aggregated result (finalized value).
    pub result_ty: ValueType,
    /// Type of the values flowing into the window.
    pub target_ty: ValueType,
}

pub struct Lowered {
    pub exprs: Vec<Ir>,
    pub windows: Vec<WindowInfo>,
}

pub fn lower(program: &Program, typed: &[TypedExpr], output_types: &[ValueType]) -> Lowered {
    let mut windows = Vec::new();
    let exprs = typed
        .iter()
        .enumerate()
        .map(|(owner, te)| lower_expr(program, te, owner, output_types, &mut windows))
        .collect();
    Lowered { exprs, windows }
}

fn stream_slot(slot: Slot) -> StreamSlot {
    match slot {
        Slot::Input(i) => StreamSlot::Input(i),
        Slot::Output(o) => StreamSlot::Output(o),
        Slot::Time => StreamSlot::Time,
        Slot::Const(_) => unreachable!("constants are not streams"),
    }
}

fn lower_expr(
    program: &Program,
    te: &TypedExpr,
    owner: usize,
    output_types: &[ValueType],
    windows: &mut Vec<WindowInfo>,
) -> Ir {
    match &te.kind {
        TypedKind::Lit(v) => Ir::Lit(*v),
        TypedKind::Sync(Slot::Const(i)) => {
            let c = &program.constants[*i];
            let v = match &c.value {
                crate::ast::Expr::Int(n) => Value::int(c.ty, *n),
                crate::ast::Expr::Bool(b) => Value::bool(*b),
                other => unreachable!("constant literals only, got {other:?}"),
            };
            Ir::Lit(v)
        }
        TypedKind::Sync(slot) => Ir::Sync(stream_slot(*slot)),
        TypedKind::Offset { slot, back, default } => Ir::Offset {
            slot: stream_slot(*slot),
            back: *back,
            default: Box::new(lower_expr(program, default, owner, output_types, windows)),
        },
        TypedKind::Hold { slot, default } => Ir::Hold {
            slot: stream_slot(*slot),
            default: Box::new(lower_expr(program, default, owner, output_types, windows)),
        },
        TypedKind::Window { target, duration, agg, default } => {
            let target_ty = match target {
                Slot::Input(i) => program.inputs[*i].ty,
                Slot::Output(o) => output_types[*o],
                Slot::Time => ValueType::Unsigned(64),
                Slot::Const(_) => unreachable!("constants are not streams"),
            };
            let idx = windows.len();
            windows.push(WindowInfo {
                owner,
                target: stream_slot(*target),
                duration: *duration,
                agg: *agg,
                result_ty: te.ty,
                target_ty,
            });
            Ir::Window {
                idx,
                default: Box::new(lower_expr(program, default, owner, output_types, windows)),
            }
        }
        TypedKind::Unary(op, inner) => Ir::Unary(
            *op,
            Box::new(lower_expr(program, inner, owner, output_types, windows)),
        ),
        TypedKind::Binary(op, a, b) => Ir::Binary(
            *op,
            Box::new(lower_expr(program, a, owner, output_types, windows)),
            Box::new(lower_expr(program, b, owner, output_types, windows)),
        ),
        TypedKind::Ite(c, t, f) => Ir::Ite(
            Box::new(lower_expr(program, c, owner, output_types, windows)),
            Box::new(lower_expr(program, t, owner, output_types, windows)),
            Box::new(lower_expr(program, f, owner, output_types, windows)),
        ),
    }
}
