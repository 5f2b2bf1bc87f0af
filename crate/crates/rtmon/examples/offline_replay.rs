//! Replay a recorded trace through the full pipeline: high-level controller,
//! queue, and evaluator, printing the trigger log and the run statistics.
//!
//! ```bash
//! cargo run -p rtmon --example offline_replay
//! ```

use rtmon::engine::{render_trigger_log, run_offline, MonitorConfig};
use rtmon::trace::parse_offline;

fn main() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let spec_src = std::fs::read_to_string(format!("{dir}/corpus/network.lola")).unwrap();
    let trace_src = std::fs::read_to_string(format!("{dir}/corpus/network_synflood.csv")).unwrap();

    let spec = rtmon::analyze(&rtmon::parse(&spec_src).unwrap()).unwrap();
    let trace = parse_offline(&trace_src, &spec).unwrap();

    // Sizing adapted to the trace: the input buffer is guaranteed not to
    // overflow for this replay.
    let cfg = MonitorConfig::sized_for_trace(&spec, &trace.rows);
    let out = run_offline(&spec, &trace.rows, &cfg).unwrap();

    let messages: Vec<String> = spec.program.triggers.iter().map(|t| t.message.clone()).collect();
    print!("{}", render_trigger_log(&out.verdicts, &messages));
    println!("---");
    print!("{}", out.stats.render());
}
