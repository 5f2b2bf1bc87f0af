//! Input buffer sizing from the backlog recurrence, and a demonstration
//! that the bound is real: a burst trace overflows a buffer one slot
//! smaller than the computed size.
//!
//! ```bash
//! cargo run -p rtmon --example buffer_sizing
//! ```

use rtmon::engine::{run_offline, MonitorConfig};
use rtmon::sizing::{backlog_sequence, compute_buffer_size};

const SEC: u64 = 1_000_000_000;

fn main() {
    // Backlog evolution for an explicit deadline-load sequence.
    let delta_min = 3;
    let dlds = [0u64, 2, 1, 2, 0];
    println!(
        "delta_min={delta_min}, per-event deadline loads {dlds:?} -> backlogs {:?}",
        backlog_sequence(delta_min, &dlds)
    );

    for (delta_min, dld_bound) in [(3u64, 2u64), (5, 3), (10, 0), (2, 2)] {
        match compute_buffer_size(delta_min, dld_bound) {
            Ok(b) => println!("delta_min={delta_min} dld_bound={dld_bound} -> B={b}"),
            Err(e) => println!("delta_min={delta_min} dld_bound={dld_bound} -> {e}"),
        }
    }

    // Concretely: a 1 Hz schedule, events whose timestamps each release
    // three deadlines. Replayed at the assumed pacing, the computed size
    // never overflows; a burst replay (offers every hclk cycle, violating
    // the pacing assumption) overflows a buffer one slot smaller.
    let spec = rtmon::analyze(
        &rtmon::parse(
            "input v: Int32\noutput p @1Hz := v.hold().defaults(to:0)\noutput e := v + 1",
        )
        .unwrap(),
    )
    .unwrap();
    let (delta_min, dld_bound) = (5u64, 3u64);
    let b = compute_buffer_size(delta_min, dld_bound).unwrap();
    let rows: Vec<(u64, Vec<Option<u64>>)> = (0..6u64)
        .map(|k| (k * 3 * SEC + k + 1, vec![Some(k)]))
        .collect();
    let run_with = |buffer: u64, pacing: u64| {
        let cfg = MonitorConfig {
            buffer_size: Some(buffer),
            delta_min: Some(pacing),
            ..Default::default()
        };
        run_offline(&spec, &rows, &cfg).unwrap().stats.buffer_overflows
    };
    println!(
        "paced replay (every {delta_min} hclk): B={b} -> {} overflows",
        run_with(b, delta_min)
    );
    println!(
        "burst replay (every hclk): B-1={} -> {} overflows",
        b - 1,
        run_with(b - 1, 1)
    );
}
