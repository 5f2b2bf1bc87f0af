//! Per-stream memory analysis: offset capacities and window bucket plans.
//!
//! `capa(s)` is the greatest offset magnitude of any lookup targeting `s`
//! (minimum 1 so the current value is always storable). The register store of
//! a stream holds the current value plus one slot per reachable offset, so
//! its depth is `1 + max |offset|`.
//!
//! A window of duration `d` inside a stream of frequency `f` pre-aggregates
//! into `beta = d * f` buckets of one target-stream period each; `beta` must
//! be a positive integer, and windows may only occur in periodic streams.

use crate::desugar::Program;
use crate::error::AnalysisError;
use crate::ir::{StreamSlot, WindowInfo};
use crate::time::{period_of, Rat};
use crate::typing::{Access, AccessKind, Pacing};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryPlan {
    /// Greatest accessed offset per input stream (reported `capa`).
    pub capa_inputs: Vec<u32>,
    /// Greatest accessed offset per output stream.
    pub capa_outputs: Vec<u32>,
    pub capa_time: u32,
    /// Register depth per input stream (current value + history).
    pub depth_inputs: Vec<u32>,
    pub depth_outputs: Vec<u32>,
    pub depth_time: u32,
    pub windows: Vec<WindowPlan>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPlan {
    pub info: WindowInfo,
    /// Number of pre-aggregation buckets.
    pub beta: u32,
    /// Seconds covered by one bucket: the owner stream's period.
    pub bucket_period: Rat,
}

pub fn compute_memory(
    program: &Program,
    accesses: &[Vec<Access>],
    pacing: &[Pacing],
    windows: &[WindowInfo],
) -> Result<MemoryPlan, AnalysisError> {
    let mut max_off_inputs = vec![0u32; program.inputs.len()];
    let mut max_off_outputs = vec![0u32; program.outputs.len()];
    let mut max_off_time = 0u32;

    for acc in accesses {
        for a in acc {
            let back = match a.kind {
                AccessKind::Offset(k) => k,
                // Sync, hold, and window reads need only the current value.
                _ => 0,
            };
            match a.slot {
                crate::desugar::Slot::Input(i) => {
                    max_off_inputs[i] = max_off_inputs[i].max(back)
                }
                crate::desugar::Slot::Output(o) => {
                    max_off_outputs[o] = max_off_outputs[o].max(back)
                }
                crate::desugar::Slot::Time => max_off_time = max_off_time.max(back),
                crate::desugar::Slot::Const(_) => {}
            }
        }
    }

    let mut plans = Vec::with_capacity(windows.len());
    for info in windows {
        let owner = &program.outputs[info.owner];
        let freq = match &pacing[info.owner] {
            Pacing::Periodic(f) => *f,
            Pacing::Event(_) => {
                return Err(AnalysisError::WindowInEventBasedStream(owner.name.clone()))
            }
        };
        let beta_rat = info.duration * freq;
        if !beta_rat.is_integer() || beta_rat <= Rat::from_integer(0) {
            return Err(AnalysisError::FractionalBucketCount {
                duration: crate::ast::rat_decimal(info.duration),
                freq: crate::ast::rat_decimal(freq),
            });
        }
        plans.push(WindowPlan {
            info: info.clone(),
            beta: beta_rat.to_integer() as u32,
            bucket_period: period_of(freq),
        });
    }

    Ok(MemoryPlan {
        capa_inputs: max_off_inputs.iter().map(|m| (*m).max(1)).collect(),
        capa_outputs: max_off_outputs.iter().map(|m| (*m).max(1)).collect(),
        capa_time: max_off_time.max(1),
        depth_inputs: max_off_inputs.iter().map(|m| m + 1).collect(),
        depth_outputs: max_off_outputs.iter().map(|m| m + 1).collect(),
        depth_time: max_off_time + 1,
        windows: plans,
    })
}

impl MemoryPlan {
    pub fn depth_of(&self, slot: StreamSlot) -> u32 {
        match slot {
            StreamSlot::Input(i) => self.depth_inputs[i],
            StreamSlot::Output(o) => self.depth_outputs[o],
            StreamSlot::Time => self.depth_time,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desugar::desugar;
    use crate::ir::lower;
    use crate::parser::parse;
    use crate::typing::check_types_and_pacing;

    fn plan_of(src: &str) -> Result<MemoryPlan, AnalysisError> {
        let p = desugar(&parse(src).unwrap()).unwrap();
        let checked = check_types_and_pacing(&p).unwrap();
        let lowered = lower(&p, &checked.typed_exprs, &checked.output_types);
        compute_memory(&p, &checked.accesses, &checked.pacing, &lowered.windows)
    }

    #[test]
    fn three_second_window_at_one_hertz_has_three_buckets() {
        let plan = plan_of(
            "input velo: Int32\n\
             output avg_velo @1Hz := velo.aggregate(over:3s,using:avg).defaults(to:80)",
        )
        .unwrap();
        assert_eq!(plan.windows.len(), 1);
        assert_eq!(plan.windows[0].beta, 3);
        assert_eq!(plan.windows[0].bucket_period, Rat::from_integer(1));
    }

    #[test]
    fn two_second_window_at_one_hertz_has_two_buckets() {
        let plan = plan_of(
            "input gps: Int32\n\
             output glitch @1Hz := gps.aggregate(over:2s,using:count).defaults(to:10) < 10",
        )
        .unwrap();
        assert_eq!(plan.windows[0].beta, 2);
    }

    #[test]
    fn offsets_determine_store_depth() {
        // velo is read at offsets 0 and -1: capa 1, depth 2 (current + 1).
        let plan = plan_of(
            "input velo: Int32\n\
             output slowing := velo - velo.offset(by:-1).defaults(to:0) < 0",
        )
        .unwrap();
        assert_eq!(plan.capa_inputs[0], 1);
        assert_eq!(plan.depth_inputs[0], 2);
        // Only current-value access: capa stays 1, depth 1.
        let plan = plan_of("input velo: Int32\noutput x := velo + 1").unwrap();
        assert_eq!(plan.capa_inputs[0], 1);
        assert_eq!(plan.depth_inputs[0], 1);
        // Deeper history.
        let plan = plan_of(
            "input velo: Int32\noutput x := velo.offset(by:-3).defaults(to:0)",
        )
        .unwrap();
        assert_eq!(plan.capa_inputs[0], 3);
        assert_eq!(plan.depth_inputs[0], 4);
    }

    #[test]
    fn window_in_event_based_stream_is_rejected() {
        let err = plan_of(
            "input v: Int32\n\
             output bad := v.aggregate(over:2s,using:sum).defaults(to:0) + v",
        )
        .unwrap_err();
        assert!(matches!(err, AnalysisError::WindowInEventBasedStream(_)));
    }

    #[test]
    fn fractional_bucket_count_is_rejected() {
        let err = plan_of(
            "input v: Int32\n\
             output bad @1Hz := v.aggregate(over:0.5s,using:sum).defaults(to:0)",
        )
        .unwrap_err();
        assert!(matches!(err, AnalysisError::FractionalBucketCount { .. }));
    }
}
