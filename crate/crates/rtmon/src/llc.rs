//! Cycle-level model of the low-level controller: pops queue entries, runs
//! the pseudo-extension phase and the layered evaluation phases, updates
//! windows, and raises trigger bits.
//!
//! The queue interface is a three-state machine (idle/pop/eval); the
//! evaluation controller walks phase 1 and then one state per evaluation
//! layer. In phase 1, inputs with a present bit shift in their new value,
//! every affected output is extended by a pseudo slot that never reaches a
//! computation, and all windows evict outdated buckets against the entry
//! timestamp. In state 2.x, every affected output of layer x evaluates its
//! expression against the stores and overwrites its pseudo slot; streams
//! within one layer all read the pre-state, so evaluation order inside a
//! layer is unobservable. Windows absorb a target's new value right after
//! the target's layer commits and before any higher layer reads them.

use crate::analysis::AnalyzedSpec;
use crate::ast::{BinOp, UnOp};
use crate::bits::Mask;
use crate::error::EngineError;
use crate::hlc::Mode;
use crate::ir::{Ir, StreamSlot};
use crate::queue::{EntryKind, EntrySource, QueueEntry};
use crate::time::secs_to_ns;
use crate::value::{Value, ValueType};
use crate::window::{Homomorphism, Intermediate, WindowState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Empty,
    Pseudo,
    Valid,
}

/// Shift-register store of one stream: `depth` slots, newest last.
#[derive(Debug, Clone)]
pub struct StreamStore {
    slots: Vec<(Tag, Value)>,
    ty: ValueType,
}

impl StreamStore {
    fn new(depth: u32, ty: ValueType) -> Self {
        StreamStore {
            slots: vec![(Tag::Empty, Value::zero(ty)); depth as usize],
            ty,
        }
    }

    fn shift_in(&mut self, v: Value) {
        self.slots.remove(0);
        self.slots.push((Tag::Valid, v));
    }

    fn pseudo_extend(&mut self) {
        self.slots.remove(0);
        self.slots.push((Tag::Pseudo, Value::zero(self.ty)));
    }

    fn write_newest(&mut self, v: Value) {
        let last = self.slots.last_mut().expect("depth > 0");
        debug_assert_eq!(last.0, Tag::Pseudo, "only pseudo slots are overwritten");
        *last = (Tag::Valid, v);
    }

    /// Slot `back` extensions before the newest one.
    pub fn read_offset(&self, back: u32) -> (Tag, Value) {
        let idx = self.slots.len() - 1 - back as usize;
        self.slots[idx]
    }

    /// Newest valid slot, scanning past pseudo entries.
    pub fn newest_valid(&self) -> Option<Value> {
        self.slots
            .iter()
            .rev()
            .find(|(tag, _)| *tag == Tag::Valid)
            .map(|(_, v)| *v)
    }

    pub fn newest(&self) -> (Tag, Value) {
        *self.slots.last().expect("depth > 0")
    }

    pub fn has_pseudo(&self) -> bool {
        self.slots.iter().any(|(tag, _)| *tag == Tag::Pseudo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlqState {
    Idle,
    Pop,
    Eval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcState {
    Idle,
    Phase1,
    /// 1-based evaluation layer, state "2.x".
    Layer(u32),
}

/// Trigger verdict of one evaluation cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub ts: u64,
    pub trig: Mask,
}

#[derive(Debug, Default, Clone)]
pub struct LlcStats {
    pub entries: u64,
    pub events: u64,
    pub deadlines: u64,
    /// sclk cycles spent from pop through evaluation completion.
    pub busy_cycles: u64,
}

impl LlcStats {
    pub fn avg_cycles_per_entry(&self) -> f64 {
        if self.entries == 0 {
            0.0
        } else {
            self.busy_cycles as f64 / self.entries as f64
        }
    }
}

/// Per-cycle and per-evaluation records for tests and the CLI dump.
#[derive(Debug, Default, Clone)]
pub struct LlcProbe {
    /// (tick, queue-interface state, controller state) per sclk step.
    pub cycles: Vec<(u64, LlqState, EcState)>,
    /// (entry sequence number, output index, layer, value) per evaluation.
    pub evaluations: Vec<(u64, usize, u32, Value)>,
    /// Bucket states of every window after each entry completes.
    pub window_snapshots: Vec<(u64, Vec<Vec<Intermediate>>)>,
}

#[derive(Debug)]
pub struct LlcState {
    exprs: Vec<Ir>,
    layers: Vec<Vec<usize>>,
    trigger_of_output: Vec<Option<usize>>,
    n_triggers: usize,
    input_types: Vec<ValueType>,
    expr_latency: u64,
    window_cfg: Vec<(StreamSlot, Homomorphism, u32, u64)>,

    llq: LlqState,
    ec: EcState,
    latency_left: u64,
    current: Option<QueueEntry>,
    extended_inputs: Mask,
    inputs: Vec<StreamStore>,
    outputs: Vec<StreamStore>,
    time: StreamStore,
    /// Created on the first entry offline (schedule anchor) or at tick 0
    /// online.
    windows: Option<Vec<WindowState>>,
    tick: u64,
    entry_seq: u64,
    entry_cycles: u64,
    pub stats: LlcStats,
    pub probe: Option<LlcProbe>,
}

impl LlcState {
    pub fn new(spec: &AnalyzedSpec, mode: Mode, expr_latency: u64) -> Self {
        let window_cfg = spec
            .windows()
            .iter()
            .map(|w| {
                let hom = Homomorphism {
                    agg: w.info.agg,
                    value_ty: w.info.target_ty,
                    result_ty: w.info.result_ty,
                };
                let bp = secs_to_ns(w.bucket_period).expect("validated by analysis");
                (w.info.target, hom, w.beta, bp)
            })
            .collect::<Vec<_>>();
        let mut trigger_of_output = vec![None; spec.num_outputs()];
        for (t, tr) in spec.program.triggers.iter().enumerate() {
            trigger_of_output[tr.output] = Some(t);
        }
        let windows = match mode {
            Mode::Online => Some(
                window_cfg
                    .iter()
                    .map(|(_, hom, beta, bp)| WindowState::new(*hom, *beta, *bp, 0))
                    .collect(),
            ),
            Mode::Offline => None,
        };
        LlcState {
            exprs: spec.exprs.clone(),
            layers: spec.layers.layers.clone(),
            trigger_of_output,
            n_triggers: spec.num_triggers(),
            input_types: spec.program.inputs.iter().map(|i| i.ty).collect(),
            expr_latency,
            window_cfg,
            llq: LlqState::Idle,
            ec: EcState::Idle,
            latency_left: 0,
            current: None,
            extended_inputs: Mask::zeros(spec.num_inputs()),
            inputs: (0..spec.num_inputs())
                .map(|i| StreamStore::new(spec.memory.depth_inputs[i], spec.program.inputs[i].ty))
                .collect(),
            outputs: (0..spec.num_outputs())
                .map(|j| StreamStore::new(spec.memory.depth_outputs[j], spec.output_types[j]))
                .collect(),
            time: StreamStore::new(spec.memory.depth_time, ValueType::Unsigned(64)),
            windows,
            tick: 0,
            entry_seq: 0,
            entry_cycles: 0,
            stats: LlcStats::default(),
            probe: None,
        }
    }

    pub fn enable_probe(&mut self) {
        self.probe = Some(LlcProbe::default());
    }

    pub fn llq_state(&self) -> LlqState {
        self.llq
    }

    pub fn ec_state(&self) -> EcState {
        self.ec
    }

    pub fn is_idle(&self) -> bool {
        self.llq == LlqState::Idle
    }

    pub fn window_states(&self) -> Option<&[WindowState]> {
        self.windows.as_deref()
    }

    pub fn output_store(&self, j: usize) -> &StreamStore {
        &self.outputs[j]
    }

    /// Advances one system-clock tick. Returns the trigger verdict when an
    /// evaluation cycle completes during this tick.
    pub fn step<Q: EntrySource>(&mut self, queue: &mut Q) -> Result<Option<Verdict>, EngineError> {
        if let Some(probe) = &mut self.probe {
            probe.cycles.push((self.tick, self.llq, self.ec));
        }
        self.tick += 1;
        let verdict = match self.llq {
            LlqState::Idle => {
                if queue.has_entries() {
                    self.llq = LlqState::Pop;
                }
                None
            }
            LlqState::Pop => {
                self.entry_cycles = 1;
                let entry = queue
                    .pop_entry()
                    .ok_or_else(|| EngineError::Internal("pop from empty queue".into()))?;
                if self.windows.is_none() {
                    // Offline: the first entry's timestamp anchors the
                    // bucket grids, matching the scheduler's start time.
                    let start = entry.ts;
                    self.windows = Some(
                        self.window_cfg
                            .iter()
                            .map(|(_, hom, beta, bp)| WindowState::new(*hom, *beta, *bp, start))
                            .collect(),
                    );
                }
                self.current = Some(entry);
                self.llq = LlqState::Eval;
                self.ec = EcState::Phase1;
                None
            }
            LlqState::Eval => self.step_eval(queue)?,
        };
        Ok(verdict)
    }

    fn step_eval<Q: EntrySource>(&mut self, queue: &mut Q) -> Result<Option<Verdict>, EngineError> {
        self.entry_cycles += 1;
        match self.ec {
            EcState::Idle => Err(EngineError::Internal(
                "evaluation controller idle while queue interface evaluates".into(),
            )),
            EcState::Phase1 => {
                self.phase1();
                if self.layers.is_empty() {
                    return Ok(Some(self.complete(queue)?));
                }
                self.enter_layer(1);
                Ok(None)
            }
            EcState::Layer(x) => {
                if self.latency_left > 0 {
                    self.latency_left -= 1;
                    return Ok(None);
                }
                self.commit_layer(x)?;
                if (x as usize) == self.layers.len() {
                    return Ok(Some(self.complete(queue)?));
                }
                self.enter_layer(x + 1);
                Ok(None)
            }
        }
    }

    fn enter_layer(&mut self, x: u32) {
        self.ec = EcState::Layer(x);
        let entry = self.current.as_ref().expect("entry during eval");
        let occupied = self.layers[x as usize - 1]
            .iter()
            .any(|j| entry.affected.get(*j));
        self.latency_left = if occupied { self.expr_latency } else { 0 };
    }

    fn phase1(&mut self) {
        let entry = self.current.as_ref().expect("entry during eval");
        let ts = entry.ts;
        self.extended_inputs = Mask::zeros(self.inputs.len());
        for (i, p) in entry.payload.iter().enumerate() {
            if let Some(raw) = p {
                let v = Value::from_raw(self.input_types[i], *raw);
                self.inputs[i].shift_in(v);
                self.extended_inputs.set(i);
            }
        }
        let time_extends = entry.kind == EntryKind::Event;
        if time_extends {
            self.time.shift_in(Value::from_raw(ValueType::Unsigned(64), ts));
        }
        for j in entry.affected.iter_ones() {
            self.outputs[j].pseudo_extend();
        }
        let windows = self.windows.as_mut().expect("anchored");
        for w in windows.iter_mut() {
            w.evict(ts);
        }
        // Windows over inputs (and over `time`) absorb the new sample now,
        // before any layer reads them.
        for (k, (target, ..)) in self.window_cfg.iter().enumerate() {
            let sample = match target {
                StreamSlot::Input(i) if self.extended_inputs.get(*i) => {
                    Some(self.inputs[*i].newest().1)
                }
                StreamSlot::Time if time_extends => Some(self.time.newest().1),
                _ => None,
            };
            if let Some(v) = sample {
                windows[k].add(ts, v);
            }
        }
    }

    fn commit_layer(&mut self, x: u32) -> Result<(), EngineError> {
        let entry = self.current.as_ref().expect("entry during eval");
        let ts = entry.ts;
        let layer = &self.layers[x as usize - 1];
        let mut computed: Vec<(usize, Value)> = Vec::new();
        for j in layer.iter().copied() {
            if !entry.affected.get(j) {
                continue;
            }
            let cx = EvalContext {
                inputs: &self.inputs,
                outputs: &self.outputs,
                time: &self.time,
                extended_inputs: &self.extended_inputs,
                affected: &entry.affected,
                time_extended: entry.kind == EntryKind::Event,
                windows: self.windows.as_deref(),
                now: ts,
            };
            computed.push((j, evaluate_expression(&self.exprs[j], &cx)?));
        }
        if let Some(probe) = &mut self.probe {
            for (j, v) in &computed {
                probe.evaluations.push((self.entry_seq, *j, x, *v));
            }
        }
        for (j, v) in &computed {
            self.outputs[*j].write_newest(*v);
        }
        // Windows over outputs extended in this layer absorb the new value
        // before any higher layer issues a window request.
        let windows = self.windows.as_mut().expect("anchored");
        for (k, (target, ..)) in self.window_cfg.iter().enumerate() {
            if let StreamSlot::Output(o) = target {
                if let Some((_, v)) = computed.iter().find(|(j, _)| j == o) {
                    windows[k].add(ts, *v);
                }
            }
        }
        Ok(())
    }

    fn complete<Q: EntrySource>(&mut self, queue: &mut Q) -> Result<Verdict, EngineError> {
        let entry = self.current.take().expect("entry during eval");
        // Pseudo hygiene: every pseudo-extended slot must have been
        // overwritten by its layer.
        for (j, store) in self.outputs.iter().enumerate() {
            if store.has_pseudo() {
                return Err(EngineError::EvaluationOfUnextendedDependency(format!(
                    "output {j} left pseudo after evaluation"
                )));
            }
        }
        let mut trig = Mask::zeros(self.n_triggers);
        for j in entry.affected.iter_ones() {
            if let Some(t) = self.trigger_of_output[j] {
                let (tag, v) = self.outputs[j].newest();
                debug_assert_eq!(tag, Tag::Valid);
                if v.as_bool() {
                    trig.set(t);
                }
            }
        }
        self.stats.entries += 1;
        match entry.kind {
            EntryKind::Event => self.stats.events += 1,
            EntryKind::Deadline => self.stats.deadlines += 1,
        }
        self.stats.busy_cycles += self.entry_cycles;
        if let Some(probe) = &mut self.probe {
            let snap = self
                .windows
                .as_ref()
                .expect("anchored")
                .iter()
                .map(|w| w.bucket_states())
                .collect();
            probe.window_snapshots.push((self.entry_seq, snap));
        }
        self.entry_seq += 1;
        self.ec = EcState::Idle;
        self.llq = if queue.has_entries() {
            LlqState::Pop
        } else {
            LlqState::Idle
        };
        Ok(Verdict { ts: entry.ts, trig })
    }
}

/// Read-only view of the stores during one layer's evaluation.
pub struct EvalContext<'a> {
    pub inputs: &'a [StreamStore],
    pub outputs: &'a [StreamStore],
    pub time: &'a StreamStore,
    pub extended_inputs: &'a Mask,
    pub affected: &'a Mask,
    pub time_extended: bool,
    pub windows: Option<&'a [WindowState]>,
    pub now: u64,
}

impl<'a> EvalContext<'a> {
    fn store(&self, slot: StreamSlot) -> &StreamStore {
        match slot {
            StreamSlot::Input(i) => &self.inputs[i],
            StreamSlot::Output(o) => &self.outputs[o],
            StreamSlot::Time => self.time,
        }
    }

    fn sync_extended(&self, slot: StreamSlot) -> bool {
        match slot {
            StreamSlot::Input(i) => self.extended_inputs.get(i),
            StreamSlot::Output(o) => self.affected.get(o),
            StreamSlot::Time => self.time_extended,
        }
    }
}

/// Strict evaluation with wrapping integer arithmetic. Offsets read the
/// shift-register slot `back` positions before the newest; empty and pseudo
/// slots yield the declared default. Hold scans for the newest valid slot.
/// Window reads aggregate at the entry timestamp, with the default covering
/// warm-up and empty aggregates.
pub fn evaluate_expression(ir: &Ir, cx: &EvalContext<'_>) -> Result<Value, EngineError> {
    match ir {
        Ir::Lit(v) => Ok(*v),
        Ir::Sync(slot) => {
            if !cx.sync_extended(*slot) {
                return Err(EngineError::EvaluationOfUnextendedDependency(format!(
                    "synchronous read of unextended {slot:?}"
                )));
            }
            let (tag, v) = cx.store(*slot).newest();
            if tag != Tag::Valid {
                return Err(EngineError::EvaluationOfUnextendedDependency(format!(
                    "synchronous read of {slot:?} found {tag:?}"
                )));
            }
            Ok(v)
        }
        Ir::Offset { slot, back, default } => {
            let (tag, v) = cx.store(*slot).read_offset(*back);
            match tag {
                Tag::Valid => Ok(v),
                Tag::Empty | Tag::Pseudo => evaluate_expression(default, cx),
            }
        }
        Ir::Hold { slot, default } => match cx.store(*slot).newest_valid() {
            Some(v) => Ok(v),
            None => evaluate_expression(default, cx),
        },
        Ir::Window { idx, default } => {
            let windows = cx.windows.expect("windows anchored before evaluation");
            match windows[*idx].aggregate(cx.now) {
                Some(v) => Ok(v),
                None => evaluate_expression(default, cx),
            }
        }
        Ir::Unary(op, inner) => {
            let v = evaluate_expression(inner, cx)?;
            Ok(match op {
                UnOp::Not => Value::bool(!v.as_bool()),
                UnOp::Neg => v.wrapping_neg(),
                UnOp::Abs => v.wrapping_abs(),
                UnOp::Isqrt => v.isqrt(),
            })
        }
        Ir::Binary(op, a, b) => {
            let va = evaluate_expression(a, cx)?;
            let vb = evaluate_expression(b, cx)?;
            Ok(apply_binop(*op, va, vb))
        }
        Ir::Ite(c, t, f) => {
            if evaluate_expression(c, cx)?.as_bool() {
                evaluate_expression(t, cx)
            } else {
                evaluate_expression(f, cx)
            }
        }
    }
}

pub fn apply_binop(op: BinOp, a: Value, b: Value) -> Value {
    match op {
        BinOp::Add => a.wrapping_add(&b),
        BinOp::Sub => a.wrapping_sub(&b),
        BinOp::Mul => a.wrapping_mul(&b),
        BinOp::Div => a.wrapping_div(&b),
        BinOp::Lt => Value::bool(a.cmp_lt(&b)),
        BinOp::Le => Value::bool(a.cmp_le(&b)),
        BinOp::Gt => Value::bool(b.cmp_lt(&a)),
        BinOp::Ge => Value::bool(b.cmp_le(&a)),
        BinOp::Eq => Value::bool(a == b),
        BinOp::Ne => Value::bool(a != b),
        BinOp::And => Value::bool(a.as_bool() && b.as_bool()),
        BinOp::Or => Value::bool(a.as_bool() || b.as_bool()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::parser::parse;
    use crate::queue::BoundedQueue;
    use crate::time::NS_PER_SEC;

    const SEC: u64 = NS_PER_SEC as u64;

    fn mask(width: usize, bits: &[usize]) -> Mask {
        let mut m = Mask::zeros(width);
        for b in bits {
            m.set(*b);
        }
        m
    }

    fn drive(
        spec: &AnalyzedSpec,
        entries: Vec<QueueEntry>,
    ) -> (LlcState, Vec<Verdict>) {
        let mut llc = LlcState::new(spec, Mode::Offline, 0);
        llc.enable_probe();
        let mut q = BoundedQueue::new(64);
        for e in entries {
            assert!(q.push(e));
        }
        let mut verdicts = Vec::new();
        let mut guard = 0;
        while !(q.is_empty() && llc.is_idle()) {
            if let Some(v) = llc.step(&mut q).unwrap() {
                verdicts.push(v);
            }
            guard += 1;
            assert!(guard < 100_000, "no progress");
        }
        (llc, verdicts)
    }

    fn event_entry(spec: &AnalyzedSpec, ts: u64, payload: Vec<Option<u64>>) -> QueueEntry {
        let mut present = Mask::zeros(spec.num_inputs());
        for (i, p) in payload.iter().enumerate() {
            if p.is_some() {
                present.set(i);
            }
        }
        QueueEntry {
            kind: EntryKind::Event,
            affected: spec.event_affected(&present),
            payload,
            ts,
        }
    }

    #[test]
    fn slowing_down_raises_trigger_on_second_event() {
        let spec = analyze(
            &parse(
                "input velo: Int32\n\
                 trigger velo - velo.offset(by:-1).defaults(to:0) < 0 \"slowing\"",
            )
            .unwrap(),
        )
        .unwrap();
        let entries = vec![
            event_entry(&spec, 0, vec![Some(5)]),
            event_entry(&spec, 1000, vec![Some(3)]),
        ];
        let (_, verdicts) = drive(&spec, entries);
        assert_eq!(verdicts.len(), 2);
        assert!(verdicts[0].trig.is_zero(), "5 - 0 is not negative");
        assert!(verdicts[1].trig.get(0), "3 - 5 < 0 must trigger");
    }

    #[test]
    fn sliding_average_values_over_deadline_sequence() {
        let spec = analyze(
            &parse(
                "input velo: Int32\n\
                 output avg_velo @1Hz := velo.aggregate(over:3s,using:avg).defaults(to:80)",
            )
            .unwrap(),
        )
        .unwrap();
        let dl = |ts: u64| QueueEntry::deadline(1, ts, mask(1, &[0]));
        let entries = vec![
            event_entry(&spec, 0, vec![None]), // anchor heartbeat
            event_entry(&spec, SEC / 2, vec![Some(100)]),
            event_entry(&spec, 6 * SEC / 10, vec![Some(101)]),
            dl(SEC),
            dl(2 * SEC),
            event_entry(&spec, 22 * SEC / 10, vec![Some(99)]),
            dl(3 * SEC),
        ];
        let (llc, verdicts) = drive(&spec, entries);
        assert_eq!(verdicts.len(), 7);
        let probe = llc.probe.as_ref().unwrap();
        let avg_values: Vec<i128> = probe
            .evaluations
            .iter()
            .filter(|(_, j, _, _)| *j == 0)
            .map(|(_, _, _, v)| v.as_i128())
            .collect();
        // Defaults during warm-up, then (100+101+99)/3 once the window fills.
        assert_eq!(avg_values, vec![80, 80, 100]);
        let w = &llc.window_states().unwrap()[0];
        assert_eq!(w.beta(), 3);
    }

    #[test]
    fn deadline_with_empty_mask_only_evicts_windows() {
        let spec = analyze(
            &parse(
                "input v: Int32\n\
                 output s @1Hz := v.aggregate(over:2s,using:sum).defaults(to:0)",
            )
            .unwrap(),
        )
        .unwrap();
        let entries = vec![
            event_entry(&spec, 0, vec![Some(7)]),
            QueueEntry::deadline(1, SEC, mask(1, &[])),
        ];
        let (llc, verdicts) = drive(&spec, entries);
        assert_eq!(verdicts.len(), 2);
        // The periodic stream was never affected, so its store is empty.
        assert!(llc.output_store(0).newest_valid().is_none());
        // But the window advanced its eviction grid.
        assert_eq!(llc.window_states().unwrap()[0].next_evict_ts(), SEC);
    }

    #[test]
    fn pseudo_extension_lets_self_offset_read_previous_value() {
        // During the stream's own evaluation, offset -1 sees the value it
        // computed in the previous cycle, not the pseudo slot.
        let spec = analyze(
            &parse(
                "input g: Bool\n\
                 output n := n.offset(by:-1).defaults(to:0) + (if g then 1 else 0)",
            )
            .unwrap(),
        )
        .unwrap();
        let entries = vec![
            event_entry(&spec, 0, vec![Some(1)]),
            event_entry(&spec, 10, vec![Some(0)]),
            event_entry(&spec, 20, vec![Some(1)]),
        ];
        let (llc, _) = drive(&spec, entries);
        assert_eq!(llc.output_store(0).newest_valid().unwrap().as_i128(), 2);
    }

    #[test]
    fn offset_on_never_extended_stream_yields_default() {
        let spec = analyze(
            &parse("input v: Int32\noutput x := v.offset(by:-1).defaults(to:42)").unwrap(),
        )
        .unwrap();
        let entries = vec![event_entry(&spec, 0, vec![Some(7)])];
        let (llc, _) = drive(&spec, entries);
        assert_eq!(llc.output_store(0).newest_valid().unwrap().as_i128(), 42);
    }

    #[test]
    fn layered_evaluation_in_distinct_controller_states() {
        let spec = analyze(
            &parse(
                "input v: Int32\n\
                 output a := v + 1\n\
                 output b := a * 2",
            )
            .unwrap(),
        )
        .unwrap();
        let entries = vec![event_entry(&spec, 0, vec![Some(10)])];
        let (llc, _) = drive(&spec, entries);
        assert_eq!(llc.output_store(1).newest_valid().unwrap().as_i128(), 22);
        let probe = llc.probe.as_ref().unwrap();
        let evals: Vec<(usize, u32)> =
            probe.evaluations.iter().map(|(_, j, x, _)| (*j, *x)).collect();
        assert_eq!(evals, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn expression_latency_adds_cycles_only() {
        let spec = analyze(
            &parse("input v: Int32\ntrigger v > 3 \"hi\"").unwrap(),
        )
        .unwrap();
        let run = |latency: u64| -> (u64, Vec<Verdict>) {
            let mut llc = LlcState::new(&spec, Mode::Offline, latency);
            let mut q = BoundedQueue::new(8);
            q.push(event_entry(&spec, 0, vec![Some(5)]));
            let mut verdicts = Vec::new();
            while !(q.is_empty() && llc.is_idle()) {
                if let Some(v) = llc.step(&mut q).unwrap() {
                    verdicts.push(v);
                }
            }
            (llc.stats.busy_cycles, verdicts)
        };
        let (fast, v1) = run(0);
        let (slow, v2) = run(3);
        assert_eq!(v1, v2, "latency must not change values");
        assert_eq!(slow, fast + 3);
    }
}
