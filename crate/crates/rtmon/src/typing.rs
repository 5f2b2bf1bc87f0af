//! Combined type and pacing checking.
//!
//! Types are inferred by unification: declared stream types are fixed,
//! undeclared output types and integer literals are variables, and leftover
//! integer variables default to `Int32`.
//!
//! Pacing follows the stream access rules:
//! 1. event-based streams read periodic streams only via sample-and-hold;
//! 2. synchronous/offset reads among event-based streams tie the reader to
//!    the conjunction of the read streams' activations;
//! 3. periodic streams read event-based streams only via sample-and-hold;
//! 4. a periodic stream may synchronously read another periodic stream only
//!    when the target frequency is an integer multiple of its own;
//! 5. a stream must not access itself with offset 0.
//!
//! Outputs without a frequency annotation inherit pacing from their
//! synchronous accesses: the union of activations when all targets are
//! event-based, the greatest common frequency when all are periodic.

use crate::ast::{Aggregation, BinOp, Expr, UnOp};
use crate::desugar::{Program, Slot};
use crate::error::AnalysisError;
use crate::time::{is_integer_multiple, rat_gcd, Rat};
use crate::value::{Value, ValueType};
use std::collections::BTreeSet;

/// Input streams whose simultaneous presence extends an event-based stream.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActivationSet {
    pub inputs: BTreeSet<usize>,
    /// Set when the stream synchronously reads the implicit `time` stream;
    /// `time` is present on every event.
    pub time: bool,
}

impl ActivationSet {
    fn union(&mut self, other: &ActivationSet) {
        self.inputs.extend(other.inputs.iter().copied());
        self.time |= other.time;
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty() && !self.time
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pacing {
    Event(ActivationSet),
    Periodic(Rat),
}

impl Pacing {
    pub fn is_periodic(&self) -> bool {
        matches!(self, Pacing::Periodic(_))
    }
}

/// Expression tree with every node resolved to a concrete value type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedExpr {
    pub ty: ValueType,
    pub kind: TypedKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypedKind {
    Lit(Value),
    Sync(Slot),
    Offset {
        slot: Slot,
        back: u32,
        default: Box<TypedExpr>,
    },
    Hold {
        slot: Slot,
        default: Box<TypedExpr>,
    },
    Window {
        target: Slot,
        duration: Rat,
        agg: Aggregation,
        default: Box<TypedExpr>,
    },
    Unary(UnOp, Box<TypedExpr>),
    Binary(BinOp, Box<TypedExpr>, Box<TypedExpr>),
    Ite(Box<TypedExpr>, Box<TypedExpr>, Box<TypedExpr>),
}

/// One stream access, collected for pacing and later for memory analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    Sync,
    Offset(u32),
    Hold,
    Window,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Access {
    pub slot: Slot,
    pub kind: AccessKind,
}

#[derive(Debug)]
pub struct CheckedProgram {
    pub output_types: Vec<ValueType>,
    pub typed_exprs: Vec<TypedExpr>,
    pub pacing: Vec<Pacing>,
    /// Per output, every stream access in its expression (defaults included).
    pub accesses: Vec<Vec<Access>>,
}

pub fn check_types_and_pacing(program: &Program) -> Result<CheckedProgram, Vec<AnalysisError>> {
    let mut errors = Vec::new();

    let (typed, accesses) = match infer_types(program) {
        Ok(v) => v,
        Err(errs) => return Err(errs),
    };

    let pacing = match infer_pacing(program, &accesses) {
        Ok(p) => p,
        Err(errs) => {
            errors.extend(errs);
            return Err(errors);
        }
    };

    validate_rules(program, &accesses, &pacing, &mut errors);
    if !errors.is_empty() {
        return Err(errors);
    }

    let output_types = typed.iter().map(|t| t.ty).collect();
    Ok(CheckedProgram {
        output_types,
        typed_exprs: typed,
        pacing,
        accesses,
    })
}

// ---------------------------------------------------------------------------
// type inference

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Term {
    Known(ValueType),
    Var(u32),
}

struct Solver {
    parent: Vec<u32>,
    binding: Vec<Option<ValueType>>,
    int_only: Vec<bool>,
}

impl Solver {
    fn new() -> Self {
        Solver {
            parent: Vec::new(),
            binding: Vec::new(),
            int_only: Vec::new(),
        }
    }

    fn fresh(&mut self, int_only: bool) -> Term {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.binding.push(None);
        self.int_only.push(int_only);
        Term::Var(id)
    }

    fn find(&mut self, v: u32) -> u32 {
        let p = self.parent[v as usize];
        if p == v {
            return v;
        }
        let r = self.find(p);
        self.parent[v as usize] = r;
        r
    }

    fn bind(&mut self, v: u32, ty: ValueType) -> Result<(), String> {
        let r = self.find(v);
        if self.int_only[r as usize] && !ty.is_integer() {
            return Err(format!("expected an integer type, found {ty}"));
        }
        match self.binding[r as usize] {
            Some(existing) if existing != ty => {
                Err(format!("type mismatch: {existing} vs {ty}"))
            }
            _ => {
                self.binding[r as usize] = Some(ty);
                Ok(())
            }
        }
    }

    fn unify(&mut self, a: Term, b: Term) -> Result<Term, String> {
        match (a, b) {
            (Term::Known(x), Term::Known(y)) => {
                if x == y {
                    Ok(a)
                } else {
                    Err(format!("type mismatch: {x} vs {y}"))
                }
            }
            (Term::Var(v), Term::Known(t)) | (Term::Known(t), Term::Var(v)) => {
                self.bind(v, t)?;
                Ok(Term::Known(t))
            }
            (Term::Var(x), Term::Var(y)) => {
                let (rx, ry) = (self.find(x), self.find(y));
                if rx == ry {
                    return Ok(Term::Var(rx));
                }
                let merged_int = self.int_only[rx as usize] || self.int_only[ry as usize];
                let (bx, by) = (self.binding[rx as usize], self.binding[ry as usize]);
                self.parent[ry as usize] = rx;
                self.int_only[rx as usize] = merged_int;
                match (bx, by) {
                    (Some(tx), Some(ty)) if tx != ty => {
                        Err(format!("type mismatch: {tx} vs {ty}"))
                    }
                    (b, None) | (None, b) => {
                        if let Some(t) = b {
                            self.bind(rx, t)?;
                        }
                        Ok(Term::Var(rx))
                    }
                    (Some(t), Some(_)) => {
                        self.bind(rx, t)?;
                        Ok(Term::Var(rx))
                    }
                }
            }
        }
    }

    /// Integer variables left unconstrained default to Int32.
    fn resolve(&mut self, t: Term) -> ValueType {
        match t {
            Term::Known(ty) => ty,
            Term::Var(v) => {
                let r = self.find(v);
                self.binding[r as usize].unwrap_or(ValueType::Signed(32))
            }
        }
    }
}

/// Expression skeleton carrying unification terms before resolution.
struct Pre {
    term: Term,
    kind: PreKind,
}

enum PreKind {
    LitInt(i128),
    LitBool(bool),
    Sync(Slot),
    Offset(Slot, u32, Box<Pre>),
    Hold(Slot, Box<Pre>),
    Window(Slot, Rat, Aggregation, Box<Pre>),
    Unary(UnOp, Box<Pre>),
    Binary(BinOp, Box<Pre>, Box<Pre>),
    Ite(Box<Pre>, Box<Pre>, Box<Pre>),
}

struct TypeCx<'a> {
    program: &'a Program,
    solver: Solver,
    out_terms: Vec<Term>,
}

#[allow(clippy::type_complexity)]
fn infer_types(program: &Program) -> Result<(Vec<TypedExpr>, Vec<Vec<Access>>), Vec<AnalysisError>> {
    let mut errors = Vec::new();
    let mut cx = TypeCx {
        program,
        solver: Solver::new(),
        out_terms: Vec::new(),
    };
    for out in &program.outputs {
        let term = match out.ty {
            Some(t) => Term::Known(t),
            None => cx.solver.fresh(false),
        };
        cx.out_terms.push(term);
    }

    for c in &program.constants {
        let ok = match (&c.value, c.ty) {
            (Expr::Int(_), t) if t.is_integer() => true,
            (Expr::Bool(_), ValueType::Bool) => true,
            _ => false,
        };
        if !ok {
            errors.push(AnalysisError::UntypedExpression {
                stream: c.name.clone(),
                detail: format!("constant literal does not fit type {}", c.ty),
            });
        }
    }

    let mut pres = Vec::new();
    let mut accesses = Vec::new();
    for (idx, out) in program.outputs.iter().enumerate() {
        let mut acc = Vec::new();
        match cx.walk(&out.expr, idx, &mut acc) {
            Ok(pre) => {
                let out_term = cx.out_terms[idx];
                if let Err(msg) = cx.solver.unify(out_term, pre.term) {
                    errors.push(AnalysisError::UntypedExpression {
                        stream: out.name.clone(),
                        detail: msg,
                    });
                }
                pres.push(pre);
            }
            Err(msg) => {
                errors.push(AnalysisError::UntypedExpression {
                    stream: out.name.clone(),
                    detail: msg,
                });
                pres.push(Pre {
                    term: Term::Known(ValueType::Bool),
                    kind: PreKind::LitBool(false),
                });
            }
        }
        accesses.push(acc);
    }

    if !errors.is_empty() {
        return Err(errors);
    }

    let typed = pres
        .into_iter()
        .map(|p| finalize(&mut cx.solver, p))
        .collect();
    Ok((typed, accesses))
}

impl<'a> TypeCx<'a> {
    fn slot_term(&self, slot: Slot) -> Term {
        match slot {
            Slot::Const(i) => Term::Known(self.program.constants[i].ty),
            Slot::Input(i) => Term::Known(self.program.inputs[i].ty),
            Slot::Output(i) => self.out_terms[i],
            Slot::Time => Term::Known(ValueType::Unsigned(64)),
        }
    }

    fn walk(&mut self, e: &Expr, owner: usize, acc: &mut Vec<Access>) -> Result<Pre, String> {
        match e {
            Expr::Int(v) => {
                let term = self.solver.fresh(true);
                Ok(Pre {
                    term,
                    kind: PreKind::LitInt(*v),
                })
            }
            Expr::Bool(b) => Ok(Pre {
                term: Term::Known(ValueType::Bool),
                kind: PreKind::LitBool(*b),
            }),
            Expr::Ref(name) => {
                let slot = self.program.resolve(name).expect("checked by desugar");
                if !matches!(slot, Slot::Const(_)) {
                    acc.push(Access {
                        slot,
                        kind: AccessKind::Sync,
                    });
                }
                Ok(Pre {
                    term: self.slot_term(slot),
                    kind: PreKind::Sync(slot),
                })
            }
            Expr::Offset { target, back, default } => {
                let slot = self.program.resolve(target).expect("checked by desugar");
                acc.push(Access {
                    slot,
                    kind: AccessKind::Offset(*back),
                });
                let d = self.walk(default, owner, acc)?;
                let slot_term = self.slot_term(slot);
                let term = self.solver.unify(slot_term, d.term)?;
                Ok(Pre {
                    term,
                    kind: PreKind::Offset(slot, *back, Box::new(d)),
                })
            }
            Expr::Hold { target, default } => {
                let slot = self.program.resolve(target).expect("checked by desugar");
                acc.push(Access {
                    slot,
                    kind: AccessKind::Hold,
                });
                let d = self.walk(default, owner, acc)?;
                let slot_term = self.slot_term(slot);
                let term = self.solver.unify(slot_term, d.term)?;
                Ok(Pre {
                    term,
                    kind: PreKind::Hold(slot, Box::new(d)),
                })
            }
            Expr::Window { target, duration, agg, default } => {
                let slot = self.program.resolve(target).expect("checked by desugar");
                acc.push(Access {
                    slot,
                    kind: AccessKind::Window,
                });
                let d = self.walk(default, owner, acc)?;
                let target_term = self.slot_term(slot);
                let result = match agg {
                    Aggregation::Count => Term::Known(ValueType::Unsigned(32)),
                    _ => {
                        // Arithmetic aggregations operate on integer streams.
                        let int = self.solver.fresh(true);
                        self.solver.unify(target_term, int)?
                    }
                };
                let term = self.solver.unify(result, d.term)?;
                Ok(Pre {
                    term,
                    kind: PreKind::Window(slot, *duration, *agg, Box::new(d)),
                })
            }
            Expr::Delta(_) => unreachable!("delta removed by desugaring"),
            Expr::Unary(op, inner) => {
                let i = self.walk(inner, owner, acc)?;
                let term = match op {
                    UnOp::Not => self.solver.unify(i.term, Term::Known(ValueType::Bool))?,
                    UnOp::Neg | UnOp::Abs | UnOp::Isqrt => {
                        let int = self.solver.fresh(true);
                        self.solver.unify(i.term, int)?
                    }
                };
                Ok(Pre {
                    term,
                    kind: PreKind::Unary(*op, Box::new(i)),
                })
            }
            Expr::Binary(op, a, b) => {
                let pa = self.walk(a, owner, acc)?;
                let pb = self.walk(b, owner, acc)?;
                let operand = self.solver.unify(pa.term, pb.term)?;
                let term = match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        let int = self.solver.fresh(true);
                        self.solver.unify(operand, int)?
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        let int = self.solver.fresh(true);
                        self.solver.unify(operand, int)?;
                        Term::Known(ValueType::Bool)
                    }
                    BinOp::Eq | BinOp::Ne => Term::Known(ValueType::Bool),
                    BinOp::And | BinOp::Or => {
                        self.solver.unify(operand, Term::Known(ValueType::Bool))?
                    }
                };
                Ok(Pre {
                    term,
                    kind: PreKind::Binary(*op, Box::new(pa), Box::new(pb)),
                })
            }
            Expr::Ite(c, t, f) => {
                let pc = self.walk(c, owner, acc)?;
                self.solver.unify(pc.term, Term::Known(ValueType::Bool))?;
                let pt = self.walk(t, owner, acc)?;
                let pf = self.walk(f, owner, acc)?;
                let term = self.solver.unify(pt.term, pf.term)?;
                Ok(Pre {
                    term,
                    kind: PreKind::Ite(Box::new(pc), Box::new(pt), Box::new(pf)),
                })
            }
        }
    }
}

fn finalize(solver: &mut Solver, pre: Pre) -> TypedExpr {
    let ty = solver.resolve(pre.term);
    let kind = match pre.kind {
        PreKind::LitInt(v) => TypedKind::Lit(Value::int(ty, v)),
        PreKind::LitBool(b) => TypedKind::Lit(Value::bool(b)),
        PreKind::Sync(s) => TypedKind::Sync(s),
        PreKind::Offset(s, back, d) => TypedKind::Offset {
            slot: s,
            back,
            default: Box::new(finalize(solver, *d)),
        },
        PreKind::Hold(s, d) => TypedKind::Hold {
            slot: s,
            default: Box::new(finalize(solver, *d)),
        },
        PreKind::Window(s, dur, agg, d) => TypedKind::Window {
            target: s,
            duration: dur,
            agg,
            default: Box::new(finalize(solver, *d)),
        },
        PreKind::Unary(op, i) => TypedKind::Unary(op, Box::new(finalize(solver, *i))),
        PreKind::Binary(op, a, b) => TypedKind::Binary(
            op,
            Box::new(finalize(solver, *a)),
            Box::new(finalize(solver, *b)),
        ),
        PreKind::Ite(c, t, f) => TypedKind::Ite(
            Box::new(finalize(solver, *c)),
            Box::new(finalize(solver, *t)),
            Box::new(finalize(solver, *f)),
        ),
    };
    TypedExpr { ty, kind }
}

// ---------------------------------------------------------------------------
// pacing

fn infer_pacing(
    program: &Program,
    accesses: &[Vec<Access>],
) -> Result<Vec<Pacing>, Vec<AnalysisError>> {
    let n = program.outputs.len();
    let mut errors = Vec::new();

    // Pacing-relevant targets: synchronous and offset reads, self excluded.
    let tied: Vec<Vec<Slot>> = accesses
        .iter()
        .enumerate()
        .map(|(idx, acc)| {
            acc.iter()
                .filter(|a| matches!(a.kind, AccessKind::Sync | AccessKind::Offset(_)))
                .map(|a| a.slot)
                .filter(|s| *s != Slot::Output(idx))
                .collect()
        })
        .collect();

    // Least fixpoint of the "ground" sources each output is tied to:
    // inputs and `time` ground event-based pacing, annotated outputs ground
    // periodic pacing, and unannotated outputs forward their own grounds.
    // The closure converges through reference cycles as well.
    #[derive(Default, Clone, PartialEq)]
    struct Grounds {
        activation: ActivationSet,
        periodic: BTreeSet<usize>,
    }
    let mut grounds: Vec<Grounds> = vec![Grounds::default(); n];
    loop {
        let mut changed = false;
        for idx in 0..n {
            let mut g = grounds[idx].clone();
            for slot in &tied[idx] {
                match slot {
                    Slot::Const(_) => {}
                    Slot::Input(i) => {
                        g.activation.inputs.insert(*i);
                    }
                    Slot::Time => g.activation.time = true,
                    Slot::Output(o) => {
                        if program.outputs[*o].frequency.is_some() {
                            g.periodic.insert(*o);
                        } else {
                            let other = grounds[*o].clone();
                            g.activation.union(&other.activation);
                            g.periodic.extend(other.periodic.iter().copied());
                        }
                    }
                }
            }
            if g != grounds[idx] {
                grounds[idx] = g;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut table: Vec<Option<Pacing>> = Vec::with_capacity(n);
    for idx in 0..n {
        if let Some(f) = program.outputs[idx].frequency {
            table.push(Some(Pacing::Periodic(f)));
            continue;
        }
        let g = &grounds[idx];
        let has_event = !g.activation.is_empty();
        let has_periodic = !g.periodic.is_empty();
        let pacing = match (has_event, has_periodic) {
            (true, false) => Some(Pacing::Event(g.activation.clone())),
            (false, true) => {
                let freq = g
                    .periodic
                    .iter()
                    .map(|o| program.outputs[*o].frequency.expect("annotated"))
                    .reduce(rat_gcd)
                    .expect("nonempty");
                Some(Pacing::Periodic(freq))
            }
            (true, true) => {
                errors.push(AnalysisError::AccessRuleViolation {
                    rule: 1,
                    reader: program.outputs[idx].name.clone(),
                    target: program.outputs[*g.periodic.iter().next().expect("nonempty")]
                        .name
                        .clone(),
                });
                None
            }
            (false, false) => {
                errors.push(AnalysisError::PacingUnderconstrained(
                    program.outputs[idx].name.clone(),
                ));
                None
            }
        };
        table.push(pacing);
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(table.into_iter().map(|p| p.expect("resolved")).collect())
}

/// Pacing of an access target; inputs and `time` are event-based by
/// definition and report `None` here.
fn slot_pacing(pacing: &[Pacing], slot: Slot) -> Option<&Pacing> {
    match slot {
        Slot::Output(o) => Some(&pacing[o]),
        Slot::Input(_) | Slot::Time | Slot::Const(_) => None,
    }
}

fn validate_rules(
    program: &Program,
    accesses: &[Vec<Access>],
    pacing: &[Pacing],
    errors: &mut Vec<AnalysisError>,
) {
    for (idx, acc) in accesses.iter().enumerate() {
        let reader = &program.outputs[idx].name;
        for a in acc {
            let self_access = a.slot == Slot::Output(idx);
            match a.kind {
                AccessKind::Offset(0) if self_access => {
                    errors.push(AnalysisError::AccessRuleViolation {
                        rule: 5,
                        reader: reader.clone(),
                        target: reader.clone(),
                    });
                    continue;
                }
                AccessKind::Sync if self_access => {
                    errors.push(AnalysisError::AccessRuleViolation {
                        rule: 5,
                        reader: reader.clone(),
                        target: reader.clone(),
                    });
                    continue;
                }
                AccessKind::Hold | AccessKind::Window => continue,
                _ => {}
            }
            if self_access || matches!(a.slot, Slot::Const(_)) {
                continue;
            }
            let target_pacing = slot_pacing(pacing, a.slot);
            let target_is_periodic =
                matches!(target_pacing, Some(Pacing::Periodic(_)));
            match &pacing[idx] {
                Pacing::Event(_) => {
                    if target_is_periodic {
                        errors.push(AnalysisError::AccessRuleViolation {
                            rule: 1,
                            reader: reader.clone(),
                            target: program.slot_name(a.slot).to_string(),
                        });
                    }
                    // rule 2: event-based reading event-based is always valid.
                }
                Pacing::Periodic(f_reader) => match target_pacing {
                    Some(Pacing::Periodic(f_target)) => {
                        if !is_integer_multiple(*f_target, *f_reader) {
                            errors.push(AnalysisError::AccessRuleViolation {
                                rule: 4,
                                reader: reader.clone(),
                                target: program.slot_name(a.slot).to_string(),
                            });
                        }
                    }
                    // Inputs, `time`, and event-based outputs need a hold.
                    _ => {
                        errors.push(AnalysisError::AccessRuleViolation {
                            rule: 3,
                            reader: reader.clone(),
                            target: program.slot_name(a.slot).to_string(),
                        });
                    }
                },
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desugar::desugar;
    use crate::parser::parse;

    fn check(src: &str) -> Result<CheckedProgram, Vec<AnalysisError>> {
        let program = desugar(&parse(src).unwrap()).unwrap();
        check_types_and_pacing(&program)
    }

    #[test]
    fn event_based_reading_periodic_without_hold_is_rule_1() {
        let errs = check(
            "input a: Int32\n\
             output p @10Hz := a.hold().defaults(to:0)\n\
             output r := a + p.offset(by:-1).defaults(to:0)",
        )
        .unwrap_err();
        assert!(
            errs.iter().any(|e| matches!(
                e,
                AnalysisError::AccessRuleViolation { rule: 1, reader, target }
                    if reader == "r" && target == "p"
            )),
            "{errs:?}"
        );
    }

    #[test]
    fn periodic_reading_faster_multiple_is_accepted() {
        // 2 Hz reader of a 10 Hz stream: 10 = 5 * 2.
        let checked = check(
            "input a: Int32\n\
             output fast @10Hz := a.hold().defaults(to:0)\n\
             output slow @2Hz := fast.offset(by:-1).defaults(to:0)",
        )
        .unwrap();
        assert_eq!(checked.pacing[1], Pacing::Periodic(Rat::from_integer(2)));
        // Non-multiple: 2 Hz reading 3 Hz fails rule 4.
        let errs = check(
            "input a: Int32\n\
             output fast @3Hz := a.hold().defaults(to:0)\n\
             output slow @2Hz := fast.offset(by:-1).defaults(to:0)",
        )
        .unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, AnalysisError::AccessRuleViolation { rule: 4, .. })));
    }

    #[test]
    fn zero_self_offset_is_rule_5() {
        let errs = check("input v: Int32\noutput x := x.offset(by:0).defaults(to:0) + v").unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, AnalysisError::AccessRuleViolation { rule: 5, .. })));
    }

    #[test]
    fn periodic_reading_event_based_sync_is_rule_3() {
        let errs = check("input v: Int32\noutput x @1Hz := v + 1").unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, AnalysisError::AccessRuleViolation { rule: 3, .. })));
    }

    #[test]
    fn event_activation_is_union_of_accessed_streams() {
        let checked = check(
            "input a: Int32\ninput b: Int32\n\
             output x := a + 1\n\
             output y := x.offset(by:-1).defaults(to:0) + b",
        )
        .unwrap();
        match &checked.pacing[1] {
            Pacing::Event(set) => {
                assert_eq!(set.inputs.iter().copied().collect::<Vec<_>>(), vec![0, 1]);
            }
            other => panic!("expected event pacing, got {other:?}"),
        }
    }

    #[test]
    fn unannotated_output_inherits_periodic_pacing() {
        // A stream reading only a periodic stream runs at that frequency.
        let checked = check(
            "input v: Int32\n\
             output g @1Hz := v.aggregate(over:2s,using:count).defaults(to:10) < 10\n\
             output n := n.offset(by:-1).defaults(to:0) + (if g then 1 else 0)",
        )
        .unwrap();
        assert_eq!(checked.pacing[1], Pacing::Periodic(Rat::from_integer(1)));
        assert_eq!(checked.output_types[1], ValueType::Signed(32));
    }

    #[test]
    fn literal_width_defaults_to_int32_and_bools_check() {
        let checked = check("input v: Int32\noutput x := v * 2\noutput b := x > 10").unwrap();
        assert_eq!(checked.output_types[0], ValueType::Signed(32));
        assert_eq!(checked.output_types[1], ValueType::Bool);
        let errs = check("input v: Int32\noutput x := v && true").unwrap_err();
        assert!(matches!(errs[0], AnalysisError::UntypedExpression { .. }));
    }

    #[test]
    fn count_window_is_unsigned() {
        let checked = check(
            "input v: Int32\n\
             output g @1Hz := v.aggregate(over:2s,using:count).defaults(to:10) < 9",
        )
        .unwrap();
        assert_eq!(checked.output_types[0], ValueType::Bool);
    }

    #[test]
    fn output_with_no_stream_dependency_is_underconstrained() {
        let errs = check("output x := 5").unwrap_err();
        assert!(matches!(errs[0], AnalysisError::PacingUnderconstrained(_)));
    }
}
