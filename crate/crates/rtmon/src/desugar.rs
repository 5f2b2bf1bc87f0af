//! Desugaring and name resolution: rewrites `delta`, lowers triggers into
//! anonymous boolean output streams, normalizes zero offsets on foreign
//! streams into synchronous accesses, and checks that every referenced name
//! resolves to a declared constant, input, or output.

use crate::ast::*;
use crate::error::AnalysisError;
use crate::value::ValueType;
use std::collections::HashMap;

/// A resolved reference target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Const(usize),
    Input(usize),
    Output(usize),
    /// The implicit timestamp stream.
    Time,
}

/// An output stream after desugaring; trigger conditions become outputs too.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputStream {
    pub name: String,
    pub ty: Option<ValueType>,
    pub frequency: Option<crate::time::Rat>,
    pub expr: Expr,
    /// Index into [`Program::triggers`] when this output carries a trigger.
    pub trigger: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerRef {
    /// Index of the lowered output stream holding the condition.
    pub output: usize,
    pub message: String,
}

/// Desugared, name-checked program. Inputs keep declaration order and
/// exclude the implicit `time` stream, which is addressed via [`Slot::Time`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub constants: Vec<ConstantDecl>,
    pub inputs: Vec<InputDecl>,
    pub outputs: Vec<OutputStream>,
    pub triggers: Vec<TriggerRef>,
}

impl Program {
    pub fn resolve(&self, name: &str) -> Option<Slot> {
        if name == TIME_STREAM {
            return Some(Slot::Time);
        }
        if let Some(i) = self.constants.iter().position(|c| c.name == name) {
            return Some(Slot::Const(i));
        }
        if let Some(i) = self.inputs.iter().position(|c| c.name == name) {
            return Some(Slot::Input(i));
        }
        self.outputs
            .iter()
            .position(|c| c.name == name)
            .map(Slot::Output)
    }

    pub fn slot_name(&self, slot: Slot) -> &str {
        match slot {
            Slot::Const(i) => &self.constants[i].name,
            Slot::Input(i) => &self.inputs[i].name,
            Slot::Output(i) => &self.outputs[i].name,
            Slot::Time => TIME_STREAM,
        }
    }
}

pub fn desugar(spec: &Spec) -> Result<Program, AnalysisError> {
    let mut program = Program::default();
    let mut names: HashMap<String, ()> = HashMap::new();
    let mut claim = |name: &str| -> Result<(), AnalysisError> {
        if name == TIME_STREAM || names.insert(name.to_string(), ()).is_some() {
            Err(AnalysisError::DuplicateName(name.to_string()))
        } else {
            Ok(())
        }
    };

    for d in &spec.decls {
        match d {
            Decl::Constant(c) => {
                claim(&c.name)?;
                program.constants.push(c.clone());
            }
            Decl::Input(i) => {
                if i.implicit {
                    continue;
                }
                claim(&i.name)?;
                program.inputs.push(i.clone());
            }
            Decl::Output(o) => {
                claim(&o.name)?;
                program.outputs.push(OutputStream {
                    name: o.name.clone(),
                    ty: o.ty,
                    frequency: o.frequency,
                    expr: rewrite(&o.expr),
                    trigger: None,
                });
            }
            Decl::Trigger(t) => {
                let trig_idx = program.triggers.len();
                // `@` keeps the generated name out of the identifier space.
                let name = format!("@trigger{trig_idx}");
                program.outputs.push(OutputStream {
                    name,
                    ty: Some(ValueType::Bool),
                    frequency: t.frequency,
                    expr: rewrite(&t.expr),
                    trigger: Some(trig_idx),
                });
                program.triggers.push(TriggerRef {
                    output: program.outputs.len() - 1,
                    message: t.message.clone().unwrap_or_default(),
                });
            }
        }
    }

    check_references(&program)?;
    normalize_zero_offsets(&mut program);
    Ok(program)
}

/// `delta(s)` becomes `s - s.offset(by:-1).defaults(to:0)`.
fn rewrite(e: &Expr) -> Expr {
    match e {
        Expr::Delta(name) => Expr::Binary(
            BinOp::Sub,
            Box::new(Expr::Ref(name.clone())),
            Box::new(Expr::Offset {
                target: name.clone(),
                back: 1,
                default: Box::new(Expr::Int(0)),
            }),
        ),
        Expr::Int(_) | Expr::Bool(_) | Expr::Ref(_) => e.clone(),
        Expr::Offset { target, back, default } => Expr::Offset {
            target: target.clone(),
            back: *back,
            default: Box::new(rewrite(default)),
        },
        Expr::Hold { target, default } => Expr::Hold {
            target: target.clone(),
            default: Box::new(rewrite(default)),
        },
        Expr::Window { target, duration, agg, default } => Expr::Window {
            target: target.clone(),
            duration: *duration,
            agg: *agg,
            default: Box::new(rewrite(default)),
        },
        Expr::Unary(op, inner) => Expr::Unary(*op, Box::new(rewrite(inner))),
        Expr::Binary(op, a, b) => Expr::Binary(*op, Box::new(rewrite(a)), Box::new(rewrite(b))),
        Expr::Ite(c, t, f) => Expr::Ite(
            Box::new(rewrite(c)),
            Box::new(rewrite(t)),
            Box::new(rewrite(f)),
        ),
    }
}

fn check_references(program: &Program) -> Result<(), AnalysisError> {
    for (idx, out) in program.outputs.iter().enumerate() {
        check_expr(program, idx, &out.expr)?;
    }
    Ok(())
}

fn check_expr(program: &Program, owner: usize, e: &Expr) -> Result<(), AnalysisError> {
    let stream_target = |name: &String| -> Result<(), AnalysisError> {
        match program.resolve(name) {
            None => Err(AnalysisError::UnknownIdentifier(name.clone())),
            Some(Slot::Const(_)) => Err(AnalysisError::UntypedExpression {
                stream: program.outputs[owner].name.clone(),
                detail: format!("`{name}` is a constant, not a stream"),
            }),
            Some(_) => Ok(()),
        }
    };
    match e {
        Expr::Int(_) | Expr::Bool(_) => Ok(()),
        Expr::Delta(_) => unreachable!("delta is rewritten before reference checking"),
        Expr::Ref(name) => {
            if program.resolve(name).is_none() {
                return Err(AnalysisError::UnknownIdentifier(name.clone()));
            }
            Ok(())
        }
        Expr::Offset { target, default, .. } | Expr::Hold { target, default } => {
            stream_target(target)?;
            check_expr(program, owner, default)
        }
        Expr::Window { target, default, .. } => {
            stream_target(target)?;
            check_expr(program, owner, default)
        }
        Expr::Unary(_, inner) => check_expr(program, owner, inner),
        Expr::Binary(_, a, b) => {
            check_expr(program, owner, a)?;
            check_expr(program, owner, b)
        }
        Expr::Ite(c, t, f) => {
            check_expr(program, owner, c)?;
            check_expr(program, owner, t)?;
            check_expr(program, owner, f)
        }
    }
}

/// A zero offset on a foreign stream is a synchronous access; the default can
/// never apply because pacing ties the reader to the target. Zero offsets on
/// the owning stream itself are left for the rule-5 check.
fn normalize_zero_offsets(program: &mut Program) {
    for idx in 0..program.outputs.len() {
        let name = program.outputs[idx].name.clone();
        let expr = normalize_expr(&program.outputs[idx].expr, &name);
        program.outputs[idx].expr = expr;
    }
}

fn normalize_expr(e: &Expr, owner: &str) -> Expr {
    match e {
        Expr::Offset { target, back: 0, default } if target != owner => {
            let _ = default;
            Expr::Ref(target.clone())
        }
        Expr::Offset { target, back, default } => Expr::Offset {
            target: target.clone(),
            back: *back,
            default: Box::new(normalize_expr(default, owner)),
        },
        Expr::Hold { target, default } => Expr::Hold {
            target: target.clone(),
            default: Box::new(normalize_expr(default, owner)),
        },
        Expr::Window { target, duration, agg, default } => Expr::Window {
            target: target.clone(),
            duration: *duration,
            agg: *agg,
            default: Box::new(normalize_expr(default, owner)),
        },
        Expr::Unary(op, inner) => Expr::Unary(*op, Box::new(normalize_expr(inner, owner))),
        Expr::Binary(op, a, b) => Expr::Binary(
            *op,
            Box::new(normalize_expr(a, owner)),
            Box::new(normalize_expr(b, owner)),
        ),
        Expr::Ite(c, t, f) => Expr::Ite(
            Box::new(normalize_expr(c, owner)),
            Box::new(normalize_expr(t, owner)),
            Box::new(normalize_expr(f, owner)),
        ),
        _ => e.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn program(src: &str) -> Program {
        desugar(&parse(src).unwrap()).unwrap()
    }

    #[test]
    fn delta_rewrites_to_offset_difference() {
        let p = program("input lon: Int32\noutput d := delta(lon)");
        let expect = Expr::Binary(
            BinOp::Sub,
            Box::new(Expr::Ref("lon".into())),
            Box::new(Expr::Offset {
                target: "lon".into(),
                back: 1,
                default: Box::new(Expr::Int(0)),
            }),
        );
        assert_eq!(p.outputs[0].expr, expect);
    }

    #[test]
    fn trigger_lowered_to_anonymous_output() {
        let p = program("input v: Int32\noutput fast := v > 700\ntrigger fast \"too fast\"");
        assert_eq!(p.outputs.len(), 2);
        assert_eq!(p.outputs[1].name, "@trigger0");
        assert_eq!(p.outputs[1].ty, Some(ValueType::Bool));
        assert_eq!(p.outputs[1].trigger, Some(0));
        assert_eq!(p.triggers.len(), 1);
        assert_eq!(p.triggers[0].output, 1);
        assert_eq!(p.triggers[0].message, "too fast");
    }

    #[test]
    fn duplicate_names_rejected() {
        let spec = parse("input v: Int32\noutput v := 1").unwrap();
        assert_eq!(
            desugar(&spec),
            Err(AnalysisError::DuplicateName("v".into()))
        );
        let spec = parse("input time: UInt64").unwrap();
        assert!(matches!(
            desugar(&spec),
            Err(AnalysisError::DuplicateName(_))
        ));
    }

    #[test]
    fn unknown_identifier_rejected() {
        let spec = parse("output x := speed + 1").unwrap();
        assert_eq!(
            desugar(&spec),
            Err(AnalysisError::UnknownIdentifier("speed".into()))
        );
    }

    #[test]
    fn constant_cannot_be_offset_target() {
        let spec = parse("constant c: Int32 := 1\noutput x := c.offset(by:-1).defaults(to:0)").unwrap();
        assert!(matches!(
            desugar(&spec),
            Err(AnalysisError::UntypedExpression { .. })
        ));
    }

    #[test]
    fn zero_offset_on_foreign_stream_becomes_sync_access() {
        let p = program("input v: Int32\noutput x := v.offset(by:0).defaults(to:9)");
        assert_eq!(p.outputs[0].expr, Expr::Ref("v".into()));
        // Zero self-offsets survive for the rule-5 check.
        let p = program("input v: Int32\noutput x := x.offset(by:0).defaults(to:9) + v");
        assert!(matches!(
            &p.outputs[0].expr,
            Expr::Binary(_, lhs, _) if matches!(lhs.as_ref(), Expr::Offset { back: 0, .. })
        ));
    }

    #[test]
    fn desugaring_preserves_referenced_names() {
        let src = "input lon: Int32\ninput lat: Int32\n\
                   output d := isqrt(delta(lon)*delta(lon) + delta(lat)*delta(lat))\n\
                   trigger d > 10 \"far\"";
        let spec = parse(src).unwrap();
        let mut before: Vec<String> = Vec::new();
        for d in &spec.decls {
            match d {
                Decl::Output(o) => o.expr.referenced_names(&mut before),
                Decl::Trigger(t) => t.expr.referenced_names(&mut before),
                _ => {}
            }
        }
        let p = desugar(&spec).unwrap();
        let mut after: Vec<String> = Vec::new();
        for o in &p.outputs {
            o.expr.referenced_names(&mut after);
        }
        before.sort();
        before.dedup();
        after.sort();
        after.dedup();
        assert_eq!(before, after);
    }

    #[test]
    fn trigger_counts_after_desugar() {
        // Five named outputs plus four triggers lower to nine output streams.
        let src = "input a: Int32\n\
                   output o1 := a\noutput o2 := a\noutput o3 := a\noutput o4 := a\noutput o5 := a\n\
                   trigger a > 1\ntrigger a > 2\ntrigger a > 3\ntrigger a > 4";
        let p = program(src);
        assert_eq!(p.outputs.len(), 9);
        assert_eq!(p.triggers.len(), 4);
    }
}
