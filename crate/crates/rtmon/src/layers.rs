//! Evaluation-order layering.
//!
//! Zero-delay edges are synchronous same-timestamp reads of other output
//! streams. Negative offsets and sample-and-hold reads resolve against
//! persisted state and impose no ordering. Window reads are conservatively
//! ordered one layer above the window's target stream when the target is an
//! output, so a window is always requested after its target extended.

use crate::desugar::{Program, Slot};
use crate::error::AnalysisError;
use crate::typing::{Access, AccessKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layers {
    /// 1-based layer per output stream.
    pub assignment: Vec<u32>,
    /// Outputs grouped by layer; `layers[0]` evaluates first.
    pub layers: Vec<Vec<usize>>,
    /// Number of layers, the `l` of the evaluation controller.
    pub depth: usize,
}

pub fn compute_layers(program: &Program, accesses: &[Vec<Access>]) -> Result<Layers, AnalysisError> {
    let n = program.outputs.len();
    let mut deps: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (idx, acc) in accesses.iter().enumerate() {
        for a in acc {
            let zero_delay = matches!(a.kind, AccessKind::Sync | AccessKind::Window);
            if !zero_delay {
                continue;
            }
            if let Slot::Output(target) = a.slot {
                if target != idx && !deps[idx].contains(&target) {
                    deps[idx].push(target);
                }
            }
        }
    }

    let mut layer = vec![0u32; n];
    let mut state = vec![Visit::White; n];
    let mut stack = Vec::new();
    for idx in 0..n {
        visit(program, &deps, idx, &mut layer, &mut state, &mut stack)?;
    }

    let depth = layer.iter().copied().max().unwrap_or(0) as usize;
    let mut layers = vec![Vec::new(); depth];
    for (idx, l) in layer.iter().enumerate() {
        layers[*l as usize - 1].push(idx);
    }
    Ok(Layers {
        assignment: layer,
        layers,
        depth,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Visit {
    White,
    Gray,
    Black,
}

fn visit(
    program: &Program,
    deps: &[Vec<usize>],
    idx: usize,
    layer: &mut [u32],
    state: &mut [Visit],
    stack: &mut Vec<usize>,
) -> Result<(), AnalysisError> {
    match state[idx] {
        Visit::Black => return Ok(()),
        Visit::Gray => {
            let pos = stack.iter().position(|s| *s == idx).unwrap_or(0);
            let mut cycle: Vec<String> = stack[pos..]
                .iter()
                .map(|s| program.outputs[*s].name.clone())
                .collect();
            cycle.push(program.outputs[idx].name.clone());
            return Err(AnalysisError::CyclicDependency(cycle));
        }
        Visit::White => {}
    }
    state[idx] = Visit::Gray;
    stack.push(idx);
    let mut max_dep = 0;
    for d in &deps[idx] {
        visit(program, deps, *d, layer, state, stack)?;
        max_dep = max_dep.max(layer[*d]);
    }
    stack.pop();
    state[idx] = Visit::Black;
    layer[idx] = max_dep + 1;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desugar::desugar;
    use crate::parser::parse;
    use crate::typing::check_types_and_pacing;

    fn layers_of(src: &str) -> Layers {
        let p = desugar(&parse(src).unwrap()).unwrap();
        let checked = check_types_and_pacing(&p).unwrap();
        compute_layers(&p, &checked.accesses).unwrap()
    }

    #[test]
    fn offsets_do_not_constrain_layering() {
        let l = layers_of(
            "input velo: Int32\n\
             output slowing_down := velo - velo.offset(by:-1).defaults(to:0) < 0",
        );
        assert_eq!(l.depth, 1);
        assert_eq!(l.assignment, vec![1]);
    }

    #[test]
    fn synchronous_read_adds_a_layer() {
        let l = layers_of(
            "input v: Int32\n\
             output gps_glitch @1Hz := v.aggregate(over:2s,using:count).defaults(to:10) < 10\n\
             output num_glitches := num_glitches.offset(by:-1).defaults(to:0) + (if gps_glitch then 1 else 0)",
        );
        assert_eq!(l.assignment, vec![1, 2]);
        assert_eq!(l.depth, 2);
    }

    #[test]
    fn independent_outputs_share_one_layer() {
        // 512 outputs that only read inputs evaluate fully in parallel.
        let mut src = String::from("input cmd: Int16\ninput x: Int32\ninput y: Int32\n");
        for k in 0..512 {
            src.push_str(&format!("output crit_{k} := x > {k} || y < {k}\n"));
        }
        let l = layers_of(&src);
        assert_eq!(l.depth, 1);
        assert_eq!(l.layers[0].len(), 512);
    }

    #[test]
    fn chained_outputs_layer_linearly() {
        let mut src = String::from("input x: Int32\noutput c0 := x > 0\n");
        for k in 1..64 {
            src.push_str(&format!("output c{k} := c{} && x > {k}\n", k - 1));
        }
        let l = layers_of(&src);
        assert_eq!(l.depth, 64);
    }

    #[test]
    fn window_over_output_orders_reader_above_target() {
        let l = layers_of(
            "input v: Int32\n\
             output received := v + 1\n\
             output workload @1Hz := received.aggregate(over:1s,using:sum).defaults(to:0)",
        );
        assert_eq!(l.assignment, vec![1, 2]);
    }

    #[test]
    fn sync_cycle_is_rejected() {
        let p = desugar(
            &parse("input v: Int32\noutput a := b && v > 0\noutput b := a && v > 1").unwrap(),
        )
        .unwrap();
        let checked = check_types_and_pacing(&p).unwrap();
        let err = compute_layers(&p, &checked.accesses).unwrap_err();
        assert!(matches!(err, AnalysisError::CyclicDependency(_)));
    }
}
