//! Monitor driver: couples the high-level controller, the queue, and the
//! low-level controller on one deterministic stepping loop, plus an
//! optional two-thread variant where the controllers communicate only
//! through a shared queue.

use crate::analysis::AnalyzedSpec;
use crate::error::EngineError;
use crate::hlc::{HlcConfig, HlcState, Mode};
use crate::llc::{LlcProbe, LlcState, LlcStats, Verdict};
use crate::queue::{BoundedQueue, EntryKind, EntrySource, QueueEntry};
use crate::time::format_secs;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone)]
pub struct MonitorConfig {
    pub mode: Mode,
    /// System clock period in ns per sclk tick.
    pub xi_ns: u64,
    /// sclk ticks per hclk tick (at least 2).
    pub prescale: u64,
    pub queue_depth: usize,
    /// Extra evaluation cycles per occupied layer state.
    pub expr_latency: u64,
    /// Record per-cycle controller states and per-evaluation values.
    pub instrument: bool,
    /// Input buffer size; `None` uses the analyzed default.
    pub buffer_size: Option<u64>,
    /// Offline feeder pacing in hclk cycles between accepted offers;
    /// `None` uses the analyzed default. The buffer sizing assumes the
    /// source respects this spacing.
    pub delta_min: Option<u64>,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            mode: Mode::Offline,
            xi_ns: 1_000_000,
            prescale: 4,
            queue_depth: 64,
            expr_latency: 0,
            instrument: false,
            buffer_size: None,
            delta_min: None,
        }
    }
}

/// Worst per-event deadline load of a concrete trace: the maximum number of
/// schedule instants revealed by one event, anchored at the first row.
pub fn worst_trace_dld(spec: &AnalyzedSpec, rows: &[(u64, Vec<Option<u64>>)]) -> u64 {
    let Some((anchor, _)) = rows.first() else {
        return 0;
    };
    let offsets: Vec<u64> = spec
        .schedule
        .deadlines
        .iter()
        .filter_map(|d| crate::time::secs_to_ns(d.offset).ok())
        .collect();
    let hyper = spec
        .hyper_period()
        .and_then(|pi| crate::time::secs_to_ns(pi).ok())
        .unwrap_or(0);
    if offsets.is_empty() || hyper == 0 {
        return 0;
    }
    let mut worst = 0;
    let mut prev = *anchor;
    for (ts, _) in rows.iter().skip(1) {
        worst = worst.max(crate::hlc::dld_between(&offsets, hyper, *anchor, prev, *ts));
        prev = *ts;
    }
    worst
}

/// Buffer sizing adapted to a concrete offline trace: takes the larger of
/// the schedule-derived default bound and the trace's actual worst load,
/// with feeder pacing chosen so the backlog stays bounded. Replaying with
/// this sizing never overflows the input buffer.
pub fn offline_sizing(
    spec: &AnalyzedSpec,
    rows: &[(u64, Vec<Option<u64>>)],
) -> (u64, u64, u64) {
    let dld_bound = spec.dld_bound.max(worst_trace_dld(spec, rows));
    let delta_min = dld_bound + 2;
    let buffer = crate::sizing::compute_buffer_size(delta_min, dld_bound)
        .expect("delta_min - 1 >= dld_bound by construction");
    (delta_min, dld_bound, buffer)
}

impl MonitorConfig {
    /// Offline configuration sized for a specific trace.
    pub fn sized_for_trace(spec: &AnalyzedSpec, rows: &[(u64, Vec<Option<u64>>)]) -> Self {
        let (delta_min, _, buffer) = offline_sizing(spec, rows);
        MonitorConfig {
            buffer_size: Some(buffer),
            delta_min: Some(delta_min),
            ..Default::default()
        }
    }
}

/// Queue push observed by the instrumentation, in push order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushRecord {
    pub tick: u64,
    pub kind: EntryKind,
    pub ts: u64,
}

#[derive(Debug, Default, Clone)]
pub struct RunStats {
    pub offered: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub deadlines_fired: u64,
    pub entries_pushed: u64,
    pub queue_overflows: u64,
    pub queue_high_water: usize,
    pub buffer_overflows: u64,
    pub buffer_high_water: usize,
    pub total_ticks: u64,
    pub llc: LlcStats,
}

impl RunStats {
    pub fn render(&self) -> String {
        format!(
            "events: {} offered, {} accepted, {} rejected\n\
             deadlines fired: {}\n\
             entries pushed: {}\n\
             queue overflows: {} (high water {})\n\
             input buffer overflows: {} (high water {})\n\
             cycles: {} total, {:.2} avg per entry over {} entries\n",
            self.offered,
            self.accepted,
            self.rejected,
            self.deadlines_fired,
            self.entries_pushed,
            self.queue_overflows,
            self.queue_high_water,
            self.buffer_overflows,
            self.buffer_high_water,
            self.total_ticks,
            self.llc.avg_cycles_per_entry(),
            self.llc.entries,
        )
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub verdicts: Vec<Verdict>,
    pub stats: RunStats,
    /// Every queue push in order (events and deadlines).
    pub pushes: Vec<PushRecord>,
    pub probe: Option<LlcProbe>,
}

/// Runs a timestamped trace through the full pipeline in offline mode.
/// Events are offered as fast as the latch accepts them.
pub fn run_offline(
    spec: &AnalyzedSpec,
    rows: &[(u64, Vec<Option<u64>>)],
    cfg: &MonitorConfig,
) -> Result<RunOutput, EngineError> {
    let mut hlc_cfg = HlcConfig::from_spec(spec, Mode::Offline, cfg.xi_ns, cfg.prescale)
        .map_err(|e| EngineError::Internal(e.to_string()))?;
    if let Some(b) = cfg.buffer_size {
        hlc_cfg.buffer_size = b;
    }
    let spacing_ticks = cfg.delta_min.unwrap_or(spec.delta_min) * cfg.prescale;
    let mut hlc = HlcState::new(hlc_cfg);
    let mut llc = LlcState::new(spec, Mode::Offline, cfg.expr_latency);
    if cfg.instrument {
        llc.enable_probe();
    }
    let mut queue = BoundedQueue::new(cfg.queue_depth);
    let mut verdicts = Vec::new();
    let mut pushes = Vec::new();

    let mut pending = rows.iter();
    let mut next = pending.next();
    let mut next_offer_tick = 0u64;
    loop {
        if let Some((ts, payload)) = next {
            // The replayer respects the sizing assumption: accepted offers
            // arrive at least delta_min hclk cycles apart.
            if hlc.tick() >= next_offer_tick && hlc.offer_event(payload.clone(), Some(*ts))? {
                next = pending.next();
                next_offer_tick = hlc.tick() + spacing_ticks;
            }
        }
        let tick = hlc.tick();
        for entry in hlc.step_sclk() {
            pushes.push(PushRecord {
                tick,
                kind: entry.kind,
                ts: entry.ts,
            });
            queue.push(entry);
        }
        if let Some(v) = llc.step(&mut queue)? {
            verdicts.push(v);
        }
        if next.is_none() && hlc.pipeline_empty() && queue.is_empty() && llc.is_idle() {
            break;
        }
    }

    Ok(collect(hlc, llc, queue, verdicts, pushes))
}

/// Latch edges assigned to online offers made "after tick T_k", with the
/// retry protocol: each event is consumed at the first hclk edge strictly
/// after both its offer tick and the previous event's latch edge.
pub fn online_latch_ticks(offer_ticks: &[u64], prescale: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(offer_ticks.len());
    let mut prev_edge = 0u64;
    for (k, t) in offer_ticks.iter().enumerate() {
        let base = if k == 0 { *t } else { (*t).max(prev_edge) };
        let edge = (base / prescale + 1) * prescale;
        out.push(edge);
        prev_edge = edge;
    }
    out
}

/// Total sclk ticks for an online session: long enough to latch the last
/// offer, flush the pipeline, and run one extra hyper-period of deadlines;
/// rounded to whole hclk cycles so every fired deadline reaches its odd
/// phase.
pub fn online_run_ticks(last_offer_tick: u64, prescale: u64, xi_ns: u64, hyper_ns: u64) -> u64 {
    let pi_ticks = hyper_ns.div_ceil(xi_ns) + 1;
    let raw = last_offer_tick + 3 * prescale + pi_ticks;
    (raw / prescale + 2) * prescale
}

/// Largest internal timestamp the scheduler observes in a session of
/// `run_ticks` ticks: the time of the last hclk edge. Deadlines strictly
/// below this fire.
pub fn online_its_cutoff(run_ticks: u64, prescale: u64, xi_ns: u64) -> u64 {
    (run_ticks - prescale) * xi_ns
}

/// Runs an online session with the deterministic virtual clock: row `k` is
/// offered after tick `offer_ticks[k]` and retried until the latch takes it.
pub fn run_online(
    spec: &AnalyzedSpec,
    rows: &[(u64, Vec<Option<u64>>)],
    cfg: &MonitorConfig,
    run_ticks: Option<u64>,
) -> Result<RunOutput, EngineError> {
    let hlc_cfg = HlcConfig::from_spec(spec, Mode::Online, cfg.xi_ns, cfg.prescale)
        .map_err(|e| EngineError::Internal(e.to_string()))?;
    let hyper = hlc_cfg.hyper_period;
    let mut hlc = HlcState::new(hlc_cfg);
    let mut llc = LlcState::new(spec, Mode::Online, cfg.expr_latency);
    if cfg.instrument {
        llc.enable_probe();
    }
    let mut queue = BoundedQueue::new(cfg.queue_depth);
    let mut verdicts = Vec::new();
    let mut pushes = Vec::new();

    let last_offer = rows.last().map(|(t, _)| *t).unwrap_or(0);
    let total =
        run_ticks.unwrap_or_else(|| online_run_ticks(last_offer, cfg.prescale, cfg.xi_ns, hyper));

    let mut pending = rows.iter();
    let mut next = pending.next();
    for _ in 0..total {
        let tick = hlc.tick();
        for entry in hlc.step_sclk() {
            pushes.push(PushRecord {
                tick,
                kind: entry.kind,
                ts: entry.ts,
            });
            queue.push(entry);
        }
        if let Some(v) = llc.step(&mut queue)? {
            verdicts.push(v);
        }
        // Offer after stepping: the event is latched at the next hclk edge.
        if let Some((t, payload)) = next {
            if *t <= tick {
                if hlc.offer_event(payload.clone(), None)? {
                    next = pending.next();
                }
            }
        }
    }
    // Drain the evaluator without advancing monitor time.
    while !(queue.is_empty() && llc.is_idle()) {
        if let Some(v) = llc.step(&mut queue)? {
            verdicts.push(v);
        }
    }

    Ok(collect(hlc, llc, queue, verdicts, pushes))
}

fn collect(
    hlc: HlcState,
    llc: LlcState,
    queue: BoundedQueue,
    verdicts: Vec<Verdict>,
    pushes: Vec<PushRecord>,
) -> RunOutput {
    let stats = RunStats {
        offered: hlc.stats.offered,
        accepted: hlc.stats.accepted,
        rejected: hlc.stats.rejected,
        deadlines_fired: hlc.stats.deadlines_fired,
        entries_pushed: queue.pushed,
        queue_overflows: queue.overflows,
        queue_high_water: queue.high_water,
        buffer_overflows: hlc.stats.buffer_overflows,
        buffer_high_water: hlc.stats.buffer_high_water,
        total_ticks: hlc.tick(),
        llc: llc.stats.clone(),
    };
    RunOutput {
        verdicts,
        stats,
        pushes,
        probe: llc.probe,
    }
}

/// Shared queue for the two-context mode. The producer applies backpressure
/// instead of dropping: the hardware sizing assumptions guarantee the
/// consumer keeps up, and backpressure models that pacing so both setups
/// produce identical logs.
#[derive(Clone)]
pub struct SharedQueue {
    inner: Arc<Mutex<BoundedQueue>>,
    depth: usize,
}

impl SharedQueue {
    pub fn new(depth: usize) -> Self {
        SharedQueue {
            inner: Arc::new(Mutex::new(BoundedQueue::new(depth))),
            depth,
        }
    }

    pub fn push_blocking(&self, e: QueueEntry) {
        loop {
            {
                let mut q = self.inner.lock().expect("queue lock");
                if q.len() < self.depth {
                    q.push(e);
                    return;
                }
            }
            std::thread::yield_now();
        }
    }
}

impl EntrySource for SharedQueue {
    fn pop_entry(&mut self) -> Option<QueueEntry> {
        self.inner.lock().expect("queue lock").pop()
    }

    fn has_entries(&self) -> bool {
        !self.inner.lock().expect("queue lock").is_empty()
    }
}

/// Offline run with the high-level controller and the evaluator on separate
/// threads, interacting only through the shared queue. Trigger verdicts must
/// equal the single-context run.
pub fn run_offline_threaded(
    spec: &AnalyzedSpec,
    rows: &[(u64, Vec<Option<u64>>)],
    cfg: &MonitorConfig,
) -> Result<Vec<Verdict>, EngineError> {
    let mut hlc_cfg = HlcConfig::from_spec(spec, Mode::Offline, cfg.xi_ns, cfg.prescale)
        .map_err(|e| EngineError::Internal(e.to_string()))?;
    if let Some(b) = cfg.buffer_size {
        hlc_cfg.buffer_size = b;
    }
    let spacing_ticks = cfg.delta_min.unwrap_or(spec.delta_min) * cfg.prescale;
    let queue = SharedQueue::new(cfg.queue_depth);
    let done = Arc::new(AtomicBool::new(false));

    let producer_queue = queue.clone();
    let producer_done = done.clone();
    let rows_owned: Vec<(u64, Vec<Option<u64>>)> = rows.to_vec();
    let producer = std::thread::spawn(move || -> Result<(), EngineError> {
        let mut hlc = HlcState::new(hlc_cfg);
        let mut pending = rows_owned.iter();
        let mut next = pending.next();
        let mut next_offer_tick = 0u64;
        loop {
            if let Some((ts, payload)) = next {
                if hlc.tick() >= next_offer_tick && hlc.offer_event(payload.clone(), Some(*ts))? {
                    next = pending.next();
                    next_offer_tick = hlc.tick() + spacing_ticks;
                }
            }
            for entry in hlc.step_sclk() {
                producer_queue.push_blocking(entry);
            }
            if next.is_none() && hlc.pipeline_empty() {
                break;
            }
        }
        producer_done.store(true, Ordering::Release);
        Ok(())
    });

    let mut llc = LlcState::new(spec, Mode::Offline, cfg.expr_latency);
    let mut consumer_queue = queue.clone();
    let mut verdicts = Vec::new();
    loop {
        if let Some(v) = llc.step(&mut consumer_queue)? {
            verdicts.push(v);
        }
        if done.load(Ordering::Acquire) && !consumer_queue.has_entries() && llc.is_idle() {
            break;
        }
    }
    producer
        .join()
        .map_err(|_| EngineError::Internal("producer thread panicked".into()))??;
    Ok(verdicts)
}

/// Renders trigger verdicts as one log line per raised bit:
/// `ts=<seconds> trigger=<index> "<message>"`.
pub fn render_trigger_log(verdicts: &[Verdict], messages: &[String]) -> String {
    let mut out = String::new();
    for v in verdicts {
        for t in v.trig.iter_ones() {
            out.push_str(&format!(
                "ts={} trigger={} \"{}\"\n",
                format_secs(v.ts),
                t,
                messages.get(t).map(String::as_str).unwrap_or("")
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::oracle::{run_oracle, OracleMode};
    use crate::parser::parse;
    use crate::time::NS_PER_SEC;

    const SEC: u64 = NS_PER_SEC as u64;

    fn glitch_spec() -> AnalyzedSpec {
        analyze(
            &parse(
                "input velo: Int32\n\
                 output fast := velo > 700\n\
                 trigger fast.offset(by:-1).defaults(to:false) && !fast \"slowing down\"\n\
                 output cnt @1Hz := velo.aggregate(over:2s,using:count).defaults(to:10)\n\
                 trigger cnt < 2 \"few samples\"",
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn rows(data: &[(u64, i64)]) -> Vec<(u64, Vec<Option<u64>>)> {
        data.iter()
            .map(|(ts, v)| (*ts, vec![Some(*v as u64)]))
            .collect()
    }

    #[test]
    fn offline_pipeline_matches_oracle() {
        let spec = glitch_spec();
        let trace = rows(&[
            (0, 800),
            (SEC / 4, 900),
            (SEC / 2, 650),
            (2 * SEC + 1, 700),
            (4 * SEC, 710),
        ]);
        let cfg = MonitorConfig::sized_for_trace(&spec, &trace);
        let run = run_offline(&spec, &trace, &cfg).unwrap();
        assert_eq!(run.stats.buffer_overflows, 0);
        assert_eq!(run.stats.queue_overflows, 0);
        let oracle = run_oracle(&spec, &trace, OracleMode::Offline).unwrap();
        assert_eq!(run.verdicts, oracle.verdicts);
        // The slowing-down trigger fires at 0.5 s (900 -> 650).
        let log = render_trigger_log(
            &run.verdicts,
            &["slowing down".into(), "few samples".into()],
        );
        assert!(log.contains("ts=0.5 trigger=0 \"slowing down\""));
        assert!(log.contains("trigger=1 \"few samples\""));
    }

    #[test]
    fn online_run_matches_oracle_with_latch_timestamps() {
        let spec = glitch_spec();
        let cfg = MonitorConfig {
            mode: Mode::Online,
            prescale: 2,
            ..Default::default()
        };
        // Offers after ticks 100, 400, 2600 with xi = 1 ms.
        let offer_ticks = [100u64, 400, 2600];
        let payloads = [800i64, 650, 720];
        let trace: Vec<(u64, Vec<Option<u64>>)> = offer_ticks
            .iter()
            .zip(&payloads)
            .map(|(t, v)| (*t, vec![Some(*v as u64)]))
            .collect();
        let run = run_online(&spec, &trace, &cfg, None).unwrap();

        let latch = online_latch_ticks(&offer_ticks, cfg.prescale);
        let oracle_rows: Vec<(u64, Vec<Option<u64>>)> = latch
            .iter()
            .zip(&payloads)
            .map(|(e, v)| (e * cfg.xi_ns, vec![Some(*v as u64)]))
            .collect();
        let total = online_run_ticks(2600, cfg.prescale, cfg.xi_ns, SEC);
        let cutoff = online_its_cutoff(total, cfg.prescale, cfg.xi_ns);
        let oracle = run_oracle(&spec, &oracle_rows, OracleMode::Online { its_cutoff: cutoff }).unwrap();
        assert_eq!(run.verdicts, oracle.verdicts);
        assert!(run.stats.llc.deadlines > 0);
    }

    #[test]
    fn threaded_run_produces_identical_verdicts() {
        let spec = glitch_spec();
        let trace = rows(&[(0, 800), (SEC / 2, 650), (3 * SEC, 710), (9 * SEC / 2, 900)]);
        let cfg = MonitorConfig::sized_for_trace(&spec, &trace);
        let single = run_offline(&spec, &trace, &cfg).unwrap();
        for _ in 0..4 {
            let threaded = run_offline_threaded(&spec, &trace, &cfg).unwrap();
            assert_eq!(single.verdicts, threaded);
        }
    }

    #[test]
    fn deterministic_across_repeated_runs() {
        let spec = glitch_spec();
        let trace = rows(&[(0, 800), (SEC / 3 * 2, 650), (2 * SEC, 720)]);
        let cfg = MonitorConfig {
            instrument: true,
            ..MonitorConfig::sized_for_trace(&spec, &trace)
        };
        let a = run_offline(&spec, &trace, &cfg).unwrap();
        let b = run_offline(&spec, &trace, &cfg).unwrap();
        assert_eq!(a.verdicts, b.verdicts);
        assert_eq!(a.pushes, b.pushes);
        assert_eq!(a.stats.render(), b.stats.render());
    }

    #[test]
    fn empty_trace_runs_clean() {
        let spec = glitch_spec();
        let run = run_offline(&spec, &[], &MonitorConfig::default()).unwrap();
        assert!(run.verdicts.is_empty());
        assert_eq!(run.stats.llc.entries, 0);
    }
}
