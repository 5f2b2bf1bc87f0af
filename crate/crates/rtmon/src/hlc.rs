//! Cycle-level model of the high-level controller: receives external events
//! through a latch, tracks time, fires periodic deadlines, stalls and
//! buffers events while deadlines drain, and emits queue entries.
//!
//! Clocking: the system clock `sclk` ticks every `xi_ns` nanoseconds; the
//! controller-internal `hclk` ticks once every `prescale` sclk ticks; the
//! queue interface runs on a half-`hclk` grid, taking events on the even
//! phase (the hclk edge) and deadlines on the odd phase. Events therefore
//! take precedence over a deadline fired in the same hclk cycle, which
//! compensates the one-cycle event delay and keeps entries in timestamp
//! order, with ties resolved event-first: a deadline only fires when the
//! observed time stamp lies strictly beyond its due time.
//!
//! In offline mode the time source is the buffered event timestamp, so
//! deadlines drain only when a newer event reveals that time has passed; the
//! input buffer in front of the scheduler absorbs events arriving during
//! that stall. In online mode the time source is the internal clock, events
//! are stamped at the hclk edge that latches them, and no stalling occurs.

use crate::analysis::AnalyzedSpec;
use crate::bits::Mask;
use crate::error::{AnalysisError, EngineError};
use crate::queue::{EntryKind, QueueEntry};
use crate::time::secs_to_ns;
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Online,
    Offline,
}

#[derive(Debug, Clone)]
pub struct HlcConfig {
    pub mode: Mode,
    /// System clock period in nanoseconds per sclk tick.
    pub xi_ns: u64,
    /// sclk ticks per hclk tick; at least 2 so the queue-interface clock
    /// fits strictly between sclk and hclk.
    pub prescale: u64,
    /// Input buffer capacity (offline stall absorption).
    pub buffer_size: u64,
    /// Cumulative deadline offsets within one hyper-period, in ns, sorted.
    pub deadline_offsets: Vec<u64>,
    /// Hyper-period in ns; meaningless when there are no deadlines.
    pub hyper_period: u64,
    /// Affected-output mask per deadline.
    pub dltarget: Vec<Mask>,
    /// Conjunctive required-input mask per output (None for periodic).
    pub event_req: Vec<Option<Mask>>,
    pub n_inputs: usize,
    pub n_outputs: usize,
}

impl HlcConfig {
    pub fn from_spec(
        spec: &AnalyzedSpec,
        mode: Mode,
        xi_ns: u64,
        prescale: u64,
    ) -> Result<Self, AnalysisError> {
        assert!(xi_ns > 0, "system clock period must be positive");
        assert!(prescale >= 2, "queue clock must fit between sclk and hclk");
        let mut deadline_offsets = Vec::with_capacity(spec.schedule.deadlines.len());
        for d in &spec.schedule.deadlines {
            deadline_offsets.push(secs_to_ns(d.offset)?);
        }
        let hyper_period = match spec.hyper_period() {
            Some(pi) => secs_to_ns(pi)?,
            None => 0,
        };
        Ok(HlcConfig {
            mode,
            xi_ns,
            prescale,
            buffer_size: spec.buffer_size,
            deadline_offsets,
            hyper_period,
            dltarget: spec.dltarget.clone(),
            event_req: spec.event_req.clone(),
            n_inputs: spec.num_inputs(),
            n_outputs: spec.num_outputs(),
        })
    }

    fn affected_by_event(&self, present: &Mask) -> Mask {
        let mut m = Mask::zeros(self.n_outputs);
        for (j, req) in self.event_req.iter().enumerate() {
            if let Some(req) = req {
                if req.subset_of(present) {
                    m.set(j);
                }
            }
        }
        m
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct HlcStats {
    pub offered: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub deadlines_fired: u64,
    pub events_emitted: u64,
    pub buffer_overflows: u64,
    pub buffer_high_water: usize,
}

#[derive(Debug, Clone)]
struct RawEvent {
    payload: Vec<Option<u64>>,
    ext_ts: Option<u64>,
}

#[derive(Debug)]
pub struct HlcState {
    cfg: HlcConfig,
    tick: u64,
    /// Internal time stamp register; advances by xi every sclk tick online.
    reg_its: u64,
    /// External latch: `avail` is set while this holds an event.
    din: Option<RawEvent>,
    /// Offline input buffer in front of scheduler and event delay.
    buffer: VecDeque<(u64, Vec<Option<u64>>)>,
    /// Current deadline id, one-hot conceptually; `None` = uninitialized.
    did: Option<usize>,
    period: u64,
    /// Schedule anchor (initial period), kept for dld computations.
    anchor: Option<u64>,
    /// Event-delay pipeline registers.
    delay_data: Option<(u64, Vec<Option<u64>>)>,
    delay_stalled: Option<(u64, Vec<Option<u64>>)>,
    /// Deadline fired this hclk cycle, emitted on the next odd phase.
    pending_deadline: Option<QueueEntry>,
    last_offered_ts: Option<u64>,
    pub stats: HlcStats,
}

impl HlcState {
    pub fn new(cfg: HlcConfig) -> Self {
        HlcState {
            cfg,
            tick: 0,
            reg_its: 0,
            din: None,
            buffer: VecDeque::new(),
            did: None,
            period: 0,
            anchor: None,
            delay_data: None,
            delay_stalled: None,
            pending_deadline: None,
            last_offered_ts: None,
            stats: HlcStats::default(),
        }
    }

    pub fn config(&self) -> &HlcConfig {
        &self.cfg
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    /// Current internal timestamp (online mode).
    pub fn its(&self) -> u64 {
        self.reg_its
    }

    /// One-hot deadline register as bits, all-zero while uninitialized.
    pub fn did_bits(&self) -> Mask {
        let mut m = Mask::zeros(self.cfg.deadline_offsets.len());
        if let Some(d) = self.did {
            m.set(d);
        }
        m
    }

    /// Offers an event to the external latch. Returns false when the latch
    /// still holds the previous event (the source must retry).
    pub fn offer_event(
        &mut self,
        payload: Vec<Option<u64>>,
        ext_ts: Option<u64>,
    ) -> Result<bool, EngineError> {
        assert_eq!(payload.len(), self.cfg.n_inputs);
        self.stats.offered += 1;
        match self.cfg.mode {
            Mode::Offline => {
                let ts = ext_ts.ok_or_else(|| {
                    EngineError::Internal("offline events require a timestamp".into())
                })?;
                if let Some(prev) = self.last_offered_ts {
                    if ts < prev {
                        return Err(EngineError::Internal(format!(
                            "timestamps must be monotone: {ts} after {prev}"
                        )));
                    }
                }
                if self.din.is_some() {
                    self.stats.rejected += 1;
                    return Ok(false);
                }
                self.last_offered_ts = Some(ts);
                self.din = Some(RawEvent {
                    payload,
                    ext_ts: Some(ts),
                });
            }
            Mode::Online => {
                if self.din.is_some() {
                    self.stats.rejected += 1;
                    return Ok(false);
                }
                self.din = Some(RawEvent {
                    payload,
                    ext_ts: None,
                });
            }
        }
        self.stats.accepted += 1;
        Ok(true)
    }

    /// Advances one system-clock tick; returns the entries the queue
    /// interface pushes during this tick (at most one).
    pub fn step_sclk(&mut self) -> Vec<QueueEntry> {
        let mut out = Vec::new();
        let phase = self.tick % self.cfg.prescale;
        if phase == 0 {
            self.hclk_cycle(&mut out);
        } else if phase == self.cfg.prescale / 2 {
            // Odd queue phase: one deadline per hclk cycle at most.
            if let Some(dl) = self.pending_deadline.take() {
                out.push(dl);
            }
        }
        self.reg_its += self.cfg.xi_ns;
        self.tick += 1;
        out
    }

    fn hclk_cycle(&mut self, out: &mut Vec<QueueEntry>) {
        let arriving = self.din.take();
        match self.cfg.mode {
            Mode::Offline => self.hclk_offline(arriving, out),
            Mode::Online => self.hclk_online(arriving, out),
        }
    }

    fn fire_deadline(&mut self) {
        let did = self.did.expect("scheduler initialized");
        let nominal = self.period + self.cfg.deadline_offsets[did];
        self.pending_deadline = Some(QueueEntry::deadline(
            self.cfg.n_inputs,
            nominal,
            self.cfg.dltarget[did].clone(),
        ));
        self.stats.deadlines_fired += 1;
        if did + 1 == self.cfg.deadline_offsets.len() {
            self.period += self.cfg.hyper_period;
            self.did = Some(0);
        } else {
            self.did = Some(did + 1);
        }
    }

    fn emit_event(&mut self, ts: u64, payload: Vec<Option<u64>>, out: &mut Vec<QueueEntry>) {
        let mut present = Mask::zeros(self.cfg.n_inputs);
        for (i, p) in payload.iter().enumerate() {
            if p.is_some() {
                present.set(i);
            }
        }
        let affected = self.cfg.affected_by_event(&present);
        out.push(QueueEntry {
            kind: EntryKind::Event,
            payload,
            ts,
            affected,
        });
        self.stats.events_emitted += 1;
    }

    fn hclk_offline(&mut self, arriving: Option<RawEvent>, out: &mut Vec<QueueEntry>) {
        // Scheduler looks at the buffer front: in offline mode the internal
        // time stamp is the time carried by the oldest pending event.
        let front_ts = self.buffer.front().map(|(ts, _)| *ts);
        let has_deadlines = !self.cfg.deadline_offsets.is_empty();
        let mut hold = false;
        match (self.did, front_ts) {
            (None, Some(ts)) if has_deadlines => {
                // First valid timestamp initializes the schedule; no
                // progress check in the initialization cycle.
                self.did = Some(0);
                self.period = ts;
                self.anchor = Some(ts);
            }
            (Some(did), Some(its)) => {
                debug_assert!(its >= self.period, "time within hyper-period");
                if its - self.period > self.cfg.deadline_offsets[did] {
                    hold = true;
                    self.fire_deadline();
                }
            }
            _ => {}
        }

        // The hold stalls the buffer front (the event whose deadlines are
        // draining); events already consumed into the delay pipeline keep
        // moving and leave on the even phase, ahead of this cycle's
        // deadline. Every deadline still unfired is due at or after their
        // timestamps, so draining through preserves timestamp order and
        // resolves exact ties event-first.
        let consumed = if hold { None } else { self.buffer.pop_front() };
        self.delay_stalled = self.delay_data.take();
        self.delay_data = consumed;
        if let Some((ts, payload)) = self.delay_stalled.clone() {
            self.emit_event(ts, payload, out);
        }

        if let Some(ev) = arriving {
            if (self.buffer.len() as u64) < self.cfg.buffer_size {
                self.buffer
                    .push_back((ev.ext_ts.expect("offline events carry ts"), ev.payload));
                self.stats.buffer_high_water = self.stats.buffer_high_water.max(self.buffer.len());
            } else {
                self.stats.buffer_overflows += 1;
            }
        }
    }

    fn hclk_online(&mut self, arriving: Option<RawEvent>, out: &mut Vec<QueueEntry>) {
        let its = self.reg_its;
        let has_deadlines = !self.cfg.deadline_offsets.is_empty();
        if self.did.is_none() && has_deadlines {
            // Online initialization happens in the first cycle; the anchor
            // is the monitor start.
            self.did = Some(0);
            self.period = 0;
            self.anchor = Some(0);
        } else if let Some(did) = self.did {
            if its - self.period > self.cfg.deadline_offsets[did] {
                self.fire_deadline();
            }
        }

        // No stalling online: events flow straight through the delay
        // registers and are stamped with the latching cycle's time.
        self.delay_stalled = self.delay_data.take();
        self.delay_data = arriving.map(|ev| (its, ev.payload));
        if let Some((ts, payload)) = self.delay_stalled.clone() {
            self.emit_event(ts, payload, out);
        }
    }

    /// True when no event is latched, buffered, or in flight and no deadline
    /// awaits its odd phase.
    pub fn pipeline_empty(&self) -> bool {
        self.din.is_none()
            && self.buffer.is_empty()
            && self.delay_data.is_none()
            && self.delay_stalled.is_none()
            && self.pending_deadline.is_none()
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer.len()
    }

    /// Number of schedule instants in the half-open interval
    /// `(t_prev, t_next]`, relative to the initialized anchor.
    pub fn dld(&self, t_prev: u64, t_next: u64) -> u64 {
        debug_assert!(t_prev <= t_next);
        match self.anchor {
            Some(anchor) => dld_between(
                &self.cfg.deadline_offsets,
                self.cfg.hyper_period,
                anchor,
                t_prev,
                t_next,
            ),
            None => 0,
        }
    }
}

/// Deadline instants in `(t_prev, t_next]` for a schedule anchored at
/// `anchor` with cumulative `offsets` repeating every `hyper_period`.
pub fn dld_between(
    offsets: &[u64],
    hyper_period: u64,
    anchor: u64,
    t_prev: u64,
    t_next: u64,
) -> u64 {
    if offsets.is_empty() {
        return 0;
    }
    debug_assert!(hyper_period > 0);
    // Instants at or before x, per offset: anchor + k*hyper + o <= x.
    let count_upto = |x: u64| -> u64 {
        offsets
            .iter()
            .map(|o| {
                let first = anchor + o;
                if x < first {
                    0
                } else {
                    (x - first) / hyper_period + 1
                }
            })
            .sum()
    };
    count_upto(t_next) - count_upto(t_prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::parser::parse;
    use crate::time::NS_PER_SEC;

    const SEC: u64 = NS_PER_SEC as u64;

    fn spec_1hz() -> AnalyzedSpec {
        analyze(
            &parse(
                "input v: Int32\n\
                 output e := v + 1\n\
                 output p @1Hz := v.hold().defaults(to:0)",
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn offline_hlc(spec: &AnalyzedSpec) -> HlcState {
        let cfg = HlcConfig::from_spec(spec, Mode::Offline, 1_000_000, 2).unwrap();
        HlcState::new(cfg)
    }

    /// Feeds timestamped events as fast as the latch accepts and collects
    /// every pushed entry until the pipeline drains.
    fn run_offline(hlc: &mut HlcState, events: &[(u64, Vec<Option<u64>>)]) -> Vec<QueueEntry> {
        let mut out = Vec::new();
        let mut pending = events.iter();
        let mut next = pending.next();
        let mut idle = 0;
        while next.is_some() || !hlc.pipeline_empty() || idle < 8 {
            if let Some((ts, payload)) = next {
                if hlc.offer_event(payload.clone(), Some(*ts)).unwrap() {
                    next = pending.next();
                }
            }
            let pushed = hlc.step_sclk();
            if pushed.is_empty() && next.is_none() {
                idle += 1;
            } else if !pushed.is_empty() {
                idle = 0;
            }
            out.extend(pushed);
        }
        out
    }

    #[test]
    fn offer_accept_and_latch_rejection() {
        let spec = spec_1hz();
        let mut hlc = offline_hlc(&spec);
        assert!(hlc.offer_event(vec![Some(1)], Some(0)).unwrap());
        // Latch still occupied within the same hclk period.
        assert!(!hlc.offer_event(vec![Some(2)], Some(10)).unwrap());
        assert_eq!(hlc.stats.rejected, 1);
        hlc.step_sclk();
        assert!(hlc.offer_event(vec![Some(2)], Some(10)).unwrap());
    }

    #[test]
    fn offline_offer_without_timestamp_is_a_contract_error() {
        let spec = spec_1hz();
        let mut hlc = offline_hlc(&spec);
        assert!(hlc.offer_event(vec![Some(1)], None).is_err());
        // Monotonicity is part of the contract too.
        assert!(hlc.offer_event(vec![Some(1)], Some(100)).unwrap());
        hlc.step_sclk();
        assert!(hlc.offer_event(vec![Some(1)], Some(50)).is_err());
    }

    #[test]
    fn offline_deadlines_interleave_in_timestamp_order() {
        // Events at 0.0 s and 2.5 s with a 1 Hz schedule: the second event
        // reveals that deadlines 1.0 and 2.0 passed, and both must be
        // emitted before it.
        let spec = spec_1hz();
        let mut hlc = offline_hlc(&spec);
        let entries = run_offline(
            &mut hlc,
            &[(0, vec![Some(5)]), (5 * SEC / 2, vec![Some(7)])],
        );
        let summary: Vec<(EntryKind, u64)> = entries.iter().map(|e| (e.kind, e.ts)).collect();
        assert_eq!(
            summary,
            vec![
                (EntryKind::Event, 0),
                (EntryKind::Deadline, SEC),
                (EntryKind::Deadline, 2 * SEC),
                (EntryKind::Event, 5 * SEC / 2),
            ]
        );
        // Deadline mask selects the periodic output only.
        assert_eq!(format!("{:?}", entries[1].affected), "10");
        // Event mask selects the event-based output only.
        assert_eq!(format!("{:?}", entries[0].affected), "01");
    }

    #[test]
    fn event_exactly_on_deadline_is_processed_first() {
        let spec = spec_1hz();
        let mut hlc = offline_hlc(&spec);
        let entries = run_offline(
            &mut hlc,
            &[
                (0, vec![Some(1)]),
                (SEC, vec![Some(2)]),
                (2 * SEC + 1, vec![Some(3)]),
            ],
        );
        let summary: Vec<(EntryKind, u64)> = entries.iter().map(|e| (e.kind, e.ts)).collect();
        // The 1.0 s event precedes the 1.0 s deadline (strict progress
        // comparison); the deadline fires once 2.000000001 s is seen.
        assert_eq!(
            summary,
            vec![
                (EntryKind::Event, 0),
                (EntryKind::Event, SEC),
                (EntryKind::Deadline, SEC),
                (EntryKind::Deadline, 2 * SEC),
                (EntryKind::Event, 2 * SEC + 1),
            ]
        );
    }

    #[test]
    fn online_first_deadline_fires_on_first_odd_phase_after_due() {
        let spec = spec_1hz();
        // xi = 1 ms, prescale 4: hclk every 4 ticks, odd phase 2 ticks later.
        let cfg = HlcConfig::from_spec(&spec, Mode::Online, 1_000_000, 4).unwrap();
        let mut hlc = HlcState::new(cfg);
        let mut first_deadline_tick = None;
        for _ in 0..6000 {
            let tick = hlc.tick();
            for e in hlc.step_sclk() {
                if e.kind == EntryKind::Deadline && first_deadline_tick.is_none() {
                    first_deadline_tick = Some((tick, e.ts));
                }
            }
        }
        // its exceeds 1.0 s strictly at tick 1001; the first hclk edge at or
        // after that is tick 1004, whose odd phase is tick 1006. The entry
        // carries the nominal due time 1.0 s.
        assert_eq!(first_deadline_tick, Some((1006, SEC)));
    }

    #[test]
    fn online_event_timestamp_is_the_latching_edge() {
        let spec = spec_1hz();
        let cfg = HlcConfig::from_spec(&spec, Mode::Online, 1_000_000, 4).unwrap();
        let mut hlc = HlcState::new(cfg);
        let mut got = None;
        for _ in 0..3 {
            hlc.step_sclk();
        }
        // Offered before tick 3; the next hclk edge is tick 4.
        assert!(hlc.offer_event(vec![Some(9)], None).unwrap());
        for _ in 0..32 {
            for e in hlc.step_sclk() {
                if e.kind == EntryKind::Event && got.is_none() {
                    got = Some(e.ts);
                }
            }
        }
        assert_eq!(got, Some(4 * 1_000_000));
    }

    #[test]
    fn dld_counts_half_open_interval() {
        let spec = spec_1hz();
        let mut hlc = offline_hlc(&spec);
        // Anchor the schedule at 0.
        run_offline(&mut hlc, &[(0, vec![Some(1)])]);
        assert_eq!(hlc.dld(0, 5 * SEC / 2), 2); // 1.0 and 2.0
        assert_eq!(hlc.dld(SEC, SEC), 0); // empty interval
        assert_eq!(hlc.dld(0, SEC), 1); // right endpoint included
        // No schedule: always zero.
        let spec = analyze(&parse("input v: Int32\noutput e := v + 1").unwrap()).unwrap();
        let mut hlc = offline_hlc(&spec);
        run_offline(&mut hlc, &[(0, vec![Some(1)])]);
        assert_eq!(hlc.dld(0, 100 * SEC), 0);
    }

    #[test]
    fn did_stays_one_hot_and_cycles_in_schedule_order() {
        let spec = analyze(
            &parse(
                "input v: Int32\n\
                 output a @2Hz := v.hold().defaults(to:0)\n\
                 output b @5Hz := v.hold().defaults(to:0)",
            )
            .unwrap(),
        )
        .unwrap();
        assert_eq!(spec.schedule.deadlines.len(), 6);
        let cfg = HlcConfig::from_spec(&spec, Mode::Offline, 1_000_000, 2).unwrap();
        let mut hlc = HlcState::new(cfg);
        let entries = run_offline(
            &mut hlc,
            &[(0, vec![Some(1)]), (5 * SEC / 2 + 1, vec![Some(2)])],
        );
        assert!(hlc.did_bits().count_ones() == 1);
        let dl_ts: Vec<u64> = entries
            .iter()
            .filter(|e| e.kind == EntryKind::Deadline)
            .map(|e| e.ts)
            .collect();
        // Offsets 0.2 0.4 0.5 0.6 0.8 1.0 repeating over 2.5 hyper-periods.
        let expect: Vec<u64> = [2, 4, 5, 6, 8, 10, 12, 14, 15, 16, 18, 20, 22, 24, 25]
            .iter()
            .map(|d| d * SEC / 10)
            .collect();
        assert_eq!(dl_ts, expect);
    }
}
