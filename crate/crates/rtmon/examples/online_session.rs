//! Online monitoring with the deterministic virtual clock: events are
//! offered at system-clock ticks, latched at hclk edges, and periodic
//! deadlines fire from the monitor's own time.
//!
//! ```bash
//! cargo run -p rtmon --example online_session
//! ```

use rtmon::engine::{run_online, MonitorConfig};
use rtmon::hlc::Mode;
use rtmon::time::format_secs;

fn main() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let spec_src = std::fs::read_to_string(format!("{dir}/corpus/sliding_avg.lola")).unwrap();
    let spec = rtmon::analyze(&rtmon::parse(&spec_src).unwrap()).unwrap();

    // With xi = 1 ms and prescale 2, offers after ticks 498/598/2198 latch
    // at edges 500/600/2200, i.e. at 0.5 s, 0.6 s, and 2.2 s.
    let rows: Vec<(u64, Vec<Option<u64>>)> = vec![
        (498, vec![Some(100)]),
        (598, vec![Some(101)]),
        (2198, vec![Some(99)]),
    ];
    let cfg = MonitorConfig {
        mode: Mode::Online,
        prescale: 2,
        instrument: true,
        ..Default::default()
    };
    let out = run_online(&spec, &rows, &cfg, None).unwrap();

    println!("avg_velo evaluations:");
    for (_, output, _, value) in &out.probe.as_ref().unwrap().evaluations {
        if *output == 0 {
            println!("  value {value}");
        }
    }
    println!("queue pushes:");
    for p in &out.pushes {
        println!("  tick {:>5} {:?} ts={}", p.tick, p.kind, format_secs(p.ts));
    }
}
