//! Reference interpreter: a slow, obviously-correct evaluation of the
//! specification over a timed trace, used as the differential-testing ground
//! truth for the hardware-model pipeline.
//!
//! Streams keep their full value histories. Windows are computed by
//! filtering the target's complete history on the bucket grid (the same
//! grid the bucketed implementation uses), so results are comparable
//! exactly. Periodic instants are derived directly from each stream's
//! period rather than from the compiled deadline table, and event
//! affectedness directly from pacing rather than from the compiled
//! dependency masks, keeping this path independent of the compiled
//! artifacts it is meant to check.

use crate::analysis::AnalyzedSpec;
use crate::ast::Aggregation;
use crate::bits::Mask;
use crate::error::EngineError;
use crate::ir::{Ir, StreamSlot};
use crate::llc::{apply_binop, Verdict};
use crate::time::{period_of, secs_to_ns};
use crate::typing::Pacing;
use crate::value::{Value, ValueType};
use crate::window::Homomorphism;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Timestamps come from the trace; the schedule anchors at the first
    /// event and deadlines materialize only when a later event reveals them.
    Offline,
    /// The monitor clock drives the schedule from zero; deadlines strictly
    /// below the cutoff fire regardless of events.
    Online { its_cutoff: u64 },
}

#[derive(Debug, Clone)]
pub struct OracleOutput {
    /// One verdict per evaluation instant (events and deadlines).
    pub verdicts: Vec<Verdict>,
    /// Per output stream, its (timestamp, value) extension sequence.
    pub streams: Vec<Vec<(u64, Value)>>,
    pub events: u64,
    pub deadlines: u64,
}

struct WindowSpec {
    target: StreamSlot,
    hom: Homomorphism,
    beta: u64,
    bucket_period: u64,
}

struct Oracle<'a> {
    spec: &'a AnalyzedSpec,
    window_specs: Vec<WindowSpec>,
    inputs: Vec<Vec<(u64, Value)>>,
    outputs: Vec<Vec<(u64, Value)>>,
    time: Vec<(u64, Value)>,
    /// Streams extended at the instant being evaluated, and whether their
    /// new value is already in the history.
    extending_inputs: Mask,
    extending_outputs: Mask,
    time_extending: bool,
    committed: Vec<bool>,
    window_anchor: u64,
}

pub fn run_oracle(
    spec: &AnalyzedSpec,
    rows: &[(u64, Vec<Option<u64>>)],
    mode: OracleMode,
) -> Result<OracleOutput, EngineError> {
    let window_specs = spec
        .windows()
        .iter()
        .map(|w| -> Result<WindowSpec, EngineError> {
            Ok(WindowSpec {
                target: w.info.target,
                hom: Homomorphism {
                    agg: w.info.agg,
                    value_ty: w.info.target_ty,
                    result_ty: w.info.result_ty,
                },
                beta: w.beta as u64,
                bucket_period: secs_to_ns(w.bucket_period)
                    .map_err(|e| EngineError::Internal(e.to_string()))?,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    // Periodic outputs with their periods in nanoseconds.
    let mut periodic: Vec<(usize, u64)> = Vec::new();
    for (j, p) in spec.pacing.iter().enumerate() {
        if let Pacing::Periodic(f) = p {
            let period = secs_to_ns(period_of(*f)).map_err(|e| EngineError::Internal(e.to_string()))?;
            periodic.push((j, period));
        }
    }

    let anchor = match mode {
        OracleMode::Offline => match rows.first() {
            Some((ts, _)) => *ts,
            None => {
                // Empty offline trace: nothing ever happens.
                return Ok(OracleOutput {
                    verdicts: Vec::new(),
                    streams: vec![Vec::new(); spec.num_outputs()],
                    events: 0,
                    deadlines: 0,
                });
            }
        },
        OracleMode::Online { .. } => 0,
    };

    let mut o = Oracle {
        spec,
        window_specs,
        inputs: vec![Vec::new(); spec.num_inputs()],
        outputs: vec![Vec::new(); spec.num_outputs()],
        time: Vec::new(),
        extending_inputs: Mask::zeros(spec.num_inputs()),
        extending_outputs: Mask::zeros(spec.num_outputs()),
        time_extending: false,
        committed: vec![false; spec.num_outputs()],
        window_anchor: anchor,
    };

    let mut verdicts = Vec::new();
    let mut events = 0u64;
    let mut deadlines = 0u64;
    // Next due instant per periodic stream.
    let mut next_due: Vec<(usize, u64, u64)> =
        periodic.iter().map(|(j, p)| (*j, anchor + p, *p)).collect();

    fn fire_deadlines_below(
        o: &mut Oracle<'_>,
        next_due: &mut [(usize, u64, u64)],
        bound: u64,
        verdicts: &mut Vec<Verdict>,
        deadlines: &mut u64,
    ) -> Result<(), EngineError> {
        loop {
            let Some(min_due) = next_due.iter().map(|(_, due, _)| *due).min() else {
                return Ok(());
            };
            if min_due >= bound {
                return Ok(());
            }
            let mut streams = Mask::zeros(o.spec.num_outputs());
            for (j, due, period) in next_due.iter_mut() {
                if *due == min_due {
                    streams.set(*j);
                    *due += *period;
                }
            }
            verdicts.push(o.instant(min_due, None, &streams)?);
            *deadlines += 1;
        }
    }

    for (ts, payload) in rows {
        // Strictly-earlier deadlines first; a deadline at exactly this
        // timestamp stays pending and the event goes ahead (the scheduler's
        // progress comparison is strict).
        fire_deadlines_below(&mut o, &mut next_due, *ts, &mut verdicts, &mut deadlines)?;
        // A deadline exactly at the event timestamp stays pending: the
        // scheduler's strict progress comparison lets the event go first.
        debug_assert!(next_due.iter().all(|(_, due, _)| *due >= *ts));
        let mut present = Mask::zeros(spec.num_inputs());
        for (i, p) in payload.iter().enumerate() {
            if p.is_some() {
                present.set(i);
            }
        }
        let affected = event_affected_by_pacing(spec, &present);
        verdicts.push(o.instant(*ts, Some(payload), &affected)?);
        events += 1;
    }
    if let OracleMode::Online { its_cutoff } = mode {
        fire_deadlines_below(&mut o, &mut next_due, its_cutoff, &mut verdicts, &mut deadlines)?;
    }

    Ok(OracleOutput {
        verdicts,
        streams: o.outputs,
        events,
        deadlines,
    })
}

/// Event-based outputs extend when all streams of their activation set
/// receive values simultaneously (`time` is carried by every event).
fn event_affected_by_pacing(spec: &AnalyzedSpec, present: &Mask) -> Mask {
    let mut m = Mask::zeros(spec.num_outputs());
    for (j, pacing) in spec.pacing.iter().enumerate() {
        if let Pacing::Event(act) = pacing {
            let all_present = act.inputs.iter().all(|i| present.get(*i));
            if all_present {
                m.set(j);
            }
        }
    }
    m
}

impl<'a> Oracle<'a> {
    /// Evaluates one instant: `payload` is `Some` for events, `None` for
    /// deadlines; `affected` names the outputs that extend.
    fn instant(
        &mut self,
        now: u64,
        payload: Option<&Vec<Option<u64>>>,
        affected: &Mask,
    ) -> Result<Verdict, EngineError> {
        self.extending_inputs = Mask::zeros(self.spec.num_inputs());
        self.extending_outputs = affected.clone();
        self.time_extending = payload.is_some();
        self.committed = vec![false; self.spec.num_outputs()];

        if let Some(payload) = payload {
            for (i, p) in payload.iter().enumerate() {
                if let Some(raw) = p {
                    let v = Value::from_raw(self.spec.program.inputs[i].ty, *raw);
                    self.inputs[i].push((now, v));
                    self.extending_inputs.set(i);
                }
            }
            self.time
                .push((now, Value::from_raw(ValueType::Unsigned(64), now)));
        }

        for layer in &self.spec.layers.layers {
            let mut computed: Vec<(usize, Value)> = Vec::new();
            for j in layer.iter().copied() {
                if affected.get(j) {
                    let v = self.eval(&self.spec.exprs[j], now)?;
                    computed.push((j, v));
                }
            }
            for (j, v) in computed {
                self.outputs[j].push((now, v));
                self.committed[j] = true;
            }
        }

        let mut trig = Mask::zeros(self.spec.num_triggers());
        for (t, tr) in self.spec.program.triggers.iter().enumerate() {
            if affected.get(tr.output) {
                let (_, v) = self.outputs[tr.output].last().expect("just extended");
                if v.as_bool() {
                    trig.set(t);
                }
            }
        }
        Ok(Verdict { ts: now, trig })
    }

    fn history(&self, slot: StreamSlot) -> &[(u64, Value)] {
        match slot {
            StreamSlot::Input(i) => &self.inputs[i],
            StreamSlot::Output(o) => &self.outputs[o],
            StreamSlot::Time => &self.time,
        }
    }

    fn is_extending(&self, slot: StreamSlot) -> bool {
        match slot {
            StreamSlot::Input(i) => self.extending_inputs.get(i),
            StreamSlot::Output(o) => self.extending_outputs.get(o),
            StreamSlot::Time => self.time_extending,
        }
    }

    /// Whether this instant's value is already appended to the history.
    fn is_committed(&self, slot: StreamSlot) -> bool {
        match slot {
            StreamSlot::Input(_) | StreamSlot::Time => true,
            StreamSlot::Output(o) => self.committed[o],
        }
    }

    fn eval(&self, ir: &Ir, now: u64) -> Result<Value, EngineError> {
        match ir {
            Ir::Lit(v) => Ok(*v),
            Ir::Sync(slot) => {
                if !self.is_extending(*slot) || !self.is_committed(*slot) {
                    return Err(EngineError::EvaluationOfUnextendedDependency(format!(
                        "oracle: synchronous read of {slot:?}"
                    )));
                }
                Ok(self.history(*slot).last().expect("extended").1)
            }
            Ir::Offset { slot, back, default } => {
                debug_assert!(
                    self.is_extending(*slot),
                    "offset targets co-extend with their readers"
                );
                let hist = self.history(*slot);
                // Index of the value `back` extensions before this instant's.
                let virt_len = hist.len() + usize::from(!self.is_committed(*slot));
                match virt_len.checked_sub(*back as usize + 1) {
                    Some(idx) if idx < hist.len() => Ok(hist[idx].1),
                    _ => self.eval(default, now),
                }
            }
            Ir::Hold { slot, default } => match self.history(*slot).last() {
                Some((_, v)) => Ok(*v),
                None => self.eval(default, now),
            },
            Ir::Window { idx, default } => {
                match self.eval_window(&self.window_specs[*idx], now)? {
                    Some(v) => Ok(v),
                    None => self.eval(default, now),
                }
            }
            Ir::Unary(op, inner) => {
                let v = self.eval(inner, now)?;
                Ok(match op {
                    crate::ast::UnOp::Not => Value::bool(!v.as_bool()),
                    crate::ast::UnOp::Neg => v.wrapping_neg(),
                    crate::ast::UnOp::Abs => v.wrapping_abs(),
                    crate::ast::UnOp::Isqrt => v.isqrt(),
                })
            }
            Ir::Binary(op, a, b) => {
                let va = self.eval(a, now)?;
                let vb = self.eval(b, now)?;
                Ok(apply_binop(*op, va, vb))
            }
            Ir::Ite(c, t, f) => {
                if self.eval(c, now)?.as_bool() {
                    self.eval(t, now)
                } else {
                    self.eval(f, now)
                }
            }
        }
    }

    /// Full-history window evaluation on the bucket grid: sample at `ts`
    /// belongs to bucket `ceil((ts - anchor) / bucket_period)` (clamped to
    /// at least 1), and the live window at `now` covers bucket indices
    /// `(K - beta, K]` with `K = max(1, ceil((now - anchor) / period))`.
    fn eval_window(&self, w: &WindowSpec, now: u64) -> Result<Option<Value>, EngineError> {
        let anchor = self.window_anchor;
        let duration = w.beta * w.bucket_period;
        if now.saturating_sub(anchor) < duration {
            return Ok(None);
        }
        let bucket_of = |ts: u64| -> u64 { ts.saturating_sub(anchor).div_ceil(w.bucket_period).max(1) };
        let k_now = bucket_of(now);
        let mut acc = w.hom.neutral();
        for (ts, v) in self.history(w.target) {
            let k = bucket_of(*ts);
            if k + w.beta > k_now && k <= k_now {
                acc = w.hom.combine(&acc, &w.hom.map(*ts, *v));
            }
        }
        Ok(w.hom.finalize(&acc))
    }
}

/// Exact rational view of a window reduction, for rational-level test
/// comparisons of averages and integrals.
pub fn intermediate_as_rational(
    agg: Aggregation,
    inter: &crate::window::Intermediate,
) -> Option<num::BigRational> {
    use crate::window::Intermediate;
    use num::BigInt;
    match (agg, inter) {
        (Aggregation::Avg, Intermediate::Avg { count: 0, .. }) => None,
        (Aggregation::Avg, Intermediate::Avg { sum, count }) => Some(num::BigRational::new(
            BigInt::from(*sum),
            BigInt::from(*count),
        )),
        (Aggregation::Integral, Intermediate::Integral(None)) => {
            Some(num::BigRational::from_integer(BigInt::from(0)))
        }
        (Aggregation::Integral, Intermediate::Integral(Some(seg))) => Some(num::BigRational::new(
            BigInt::from(seg.area2),
            BigInt::from(2i64 * crate::time::NS_PER_SEC),
        )),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::parser::parse;
    use crate::time::NS_PER_SEC;

    const SEC: u64 = NS_PER_SEC as u64;

    #[test]
    fn sliding_average_golden_values() {
        let spec = analyze(
            &parse(
                "input velo: Int32\n\
                 output avg_velo @1Hz := velo.aggregate(over:3s,using:avg).defaults(to:80)",
            )
            .unwrap(),
        )
        .unwrap();
        let rows = vec![
            (0, vec![None]),
            (SEC / 2, vec![Some(100)]),
            (6 * SEC / 10, vec![Some(101)]),
            (22 * SEC / 10, vec![Some(99)]),
            (35 * SEC / 10, vec![None]),
        ];
        let out = run_oracle(&spec, &rows, OracleMode::Offline).unwrap();
        let avg: Vec<(u64, i128)> = out.streams[0]
            .iter()
            .map(|(ts, v)| (*ts, v.as_i128()))
            .collect();
        assert_eq!(avg, vec![(SEC, 80), (2 * SEC, 80), (3 * SEC, 100)]);
        assert_eq!(out.events, 5);
        assert_eq!(out.deadlines, 3);
    }

    #[test]
    fn empty_trace_produces_nothing() {
        let spec = analyze(
            &parse("input v: Int32\noutput x := v + 1").unwrap(),
        )
        .unwrap();
        let out = run_oracle(&spec, &[], OracleMode::Offline).unwrap();
        assert!(out.verdicts.is_empty());
        assert!(out.streams[0].is_empty());
    }

    #[test]
    fn deadlines_wait_for_a_revealing_event() {
        let spec = analyze(
            &parse(
                "input v: Int32\n\
                 output p @1Hz := v.hold().defaults(to:0)",
            )
            .unwrap(),
        )
        .unwrap();
        // Last event at 2.5 s: deadlines 1.0 and 2.0 fire, 3.0 never does.
        let rows = vec![(0, vec![Some(4)]), (5 * SEC / 2, vec![Some(6)])];
        let out = run_oracle(&spec, &rows, OracleMode::Offline).unwrap();
        let seq: Vec<(u64, i128)> = out.streams[0]
            .iter()
            .map(|(ts, v)| (*ts, v.as_i128()))
            .collect();
        assert_eq!(seq, vec![(SEC, 4), (2 * SEC, 4)]);
        // Event exactly on a deadline goes first: hold then sees the new value.
        let rows = vec![(0, vec![Some(4)]), (SEC, vec![Some(6)]), (3 * SEC, vec![Some(8)])];
        let out = run_oracle(&spec, &rows, OracleMode::Offline).unwrap();
        let seq: Vec<(u64, i128)> = out.streams[0]
            .iter()
            .map(|(ts, v)| (*ts, v.as_i128()))
            .collect();
        assert_eq!(seq, vec![(SEC, 6), (2 * SEC, 6)]);
    }

    #[test]
    fn online_mode_fires_deadlines_from_the_clock() {
        let spec = analyze(
            &parse(
                "input v: Int32\n\
                 output c @1Hz := v.aggregate(over:1s,using:count).defaults(to:0)",
            )
            .unwrap(),
        )
        .unwrap();
        let rows = vec![(SEC / 2, vec![Some(1)])];
        let out = run_oracle(
            &spec,
            &rows,
            OracleMode::Online {
                its_cutoff: 2 * SEC + 1,
            },
        )
        .unwrap();
        let seq: Vec<(u64, i128)> = out.streams[0]
            .iter()
            .map(|(ts, v)| (*ts, v.as_i128()))
            .collect();
        assert_eq!(seq, vec![(SEC, 1), (2 * SEC, 0)]);
    }

    #[test]
    fn num_glitches_counts_rises_of_periodic_condition() {
        let spec = analyze(
            &parse(
                "input v: Int32\n\
                 output few @1Hz := v.aggregate(over:1s,using:count).defaults(to:0) < 1\n\
                 output n := n.offset(by:-1).defaults(to:0) + (if few then 1 else 0)",
            )
            .unwrap(),
        )
        .unwrap();
        // Events only in the second second: `few` is true at 2s... no wait,
        // at 1 s zero events arrived in (0,1], so `few` holds; at 2 s one
        // arrived; at 3 s none again.
        let rows = vec![
            (0, vec![None]),
            (3 * SEC / 2, vec![Some(9)]),
            (7 * SEC / 2, vec![None]),
        ];
        let out = run_oracle(&spec, &rows, OracleMode::Offline).unwrap();
        let n_seq: Vec<i128> = out.streams[1].iter().map(|(_, v)| v.as_i128()).collect();
        assert_eq!(n_seq, vec![1, 1, 2]);
    }
}
