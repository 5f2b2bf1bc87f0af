//! Differential check: run randomly generated specifications and traces
//! through both the cycle-level pipeline and the reference interpreter and
//! compare the verdict sequences.
//!
//! ```bash
//! cargo run -p rtmon --example reference_check
//! ```

use rand::SeedableRng;
use rtmon::engine::{run_offline, MonitorConfig};
use rtmon::oracle::{run_oracle, OracleMode};
use rtmon::testgen::{random_spec, random_trace};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut runs = 0;
    for s in 0..10 {
        let src = random_spec(&mut rng);
        let spec = rtmon::analyze(&rtmon::parse(&src).unwrap()).unwrap();
        for _ in 0..5 {
            let trace = random_trace(&mut rng, &spec, 30);
            let cfg = MonitorConfig::sized_for_trace(&spec, &trace.rows);
            let run = run_offline(&spec, &trace.rows, &cfg).unwrap();
            let oracle = run_oracle(&spec, &trace.rows, OracleMode::Offline).unwrap();
            assert_eq!(
                run.verdicts, oracle.verdicts,
                "pipeline diverged from the reference on spec #{s}:\n{src}"
            );
            runs += 1;
        }
    }
    println!("pipeline and reference agree on {runs} random runs");
}
