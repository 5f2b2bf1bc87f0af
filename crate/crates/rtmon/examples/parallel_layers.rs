//! Parallel evaluation: a wide specification whose outputs depend only on
//! inputs evaluates every stream in one controller state, while a chained
//! variant needs one state per output. The simulated cycle counts show the
//! gap directly.
//!
//! ```bash
//! cargo run -p rtmon --example parallel_layers
//! ```

use rtmon::engine::{run_offline, MonitorConfig};
use rtmon::testgen::parallel_spec;

fn main() {
    for (label, chained) in [("wide", false), ("chained", true)] {
        let src = parallel_spec(512, chained);
        let spec = rtmon::analyze(&rtmon::parse(&src).unwrap()).unwrap();

        let rows: Vec<(u64, Vec<Option<u64>>)> = (0..8u64)
            .map(|k| {
                let ts = k * 1_000_000 + 1;
                (ts, vec![Some(k % 512), Some(350), Some(720), Some(200)])
            })
            .collect();
        let cfg = MonitorConfig {
            expr_latency: 1,
            queue_depth: 1024,
            ..MonitorConfig::sized_for_trace(&spec, &rows)
        };
        let out = run_offline(&spec, &rows, &cfg).unwrap();
        println!(
            "{label:>8}: 512 outputs in {} layers, {:.0} cycles per event",
            spec.layers.depth,
            out.stats.llc.avg_cycles_per_entry()
        );
    }
}
