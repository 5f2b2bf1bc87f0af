//! The controllers touch each other only through the queue, so they can run
//! on separate threads. This example runs the same trace single-context and
//! two-context and shows the verdicts coincide.
//!
//! ```bash
//! cargo run -p rtmon --example two_contexts
//! ```

use rtmon::engine::{run_offline, run_offline_threaded, MonitorConfig};
use rtmon::trace::parse_offline;

fn main() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let spec_src = std::fs::read_to_string(format!("{dir}/corpus/network.lola")).unwrap();
    let trace_src = std::fs::read_to_string(format!("{dir}/corpus/network.csv")).unwrap();
    let spec = rtmon::analyze(&rtmon::parse(&spec_src).unwrap()).unwrap();
    let trace = parse_offline(&trace_src, &spec).unwrap();
    let cfg = MonitorConfig::sized_for_trace(&spec, &trace.rows);

    let single = run_offline(&spec, &trace.rows, &cfg).unwrap();
    for round in 0..5 {
        let threaded = run_offline_threaded(&spec, &trace.rows, &cfg).unwrap();
        assert_eq!(single.verdicts, threaded, "round {round}");
    }
    println!(
        "single-context and two-context runs agree on {} verdicts over 5 rounds",
        single.verdicts.len()
    );
}
