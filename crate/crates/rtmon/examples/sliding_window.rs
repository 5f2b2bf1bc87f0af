//! Drive one sliding-window state directly through the bucket walkthrough:
//! samples reduce onto the newest bucket, evictions shift the ring, and the
//! aggregate is the finalized tree reduction of all buckets.
//!
//! ```bash
//! cargo run -p rtmon --example sliding_window
//! ```

use rtmon::ast::Aggregation;
use rtmon::value::{Value, ValueType};
use rtmon::window::{Homomorphism, WindowState};

const SEC: u64 = 1_000_000_000;

fn show(label: &str, w: &WindowState, now: u64) {
    let buckets: Vec<String> = w.bucket_states().iter().map(|b| format!("{b:?}")).collect();
    let agg = w
        .aggregate(now)
        .map(|v| v.to_string())
        .unwrap_or_else(|| "warm-up".into());
    println!("{label:>18}: [{}] -> {}", buckets.join(" | "), agg);
}

fn main() {
    let hom = Homomorphism {
        agg: Aggregation::Avg,
        value_ty: ValueType::Signed(32),
        result_ty: ValueType::Signed(32),
    };
    // Three-second average at 1 Hz: three one-second buckets.
    let mut w = WindowState::new(hom, 3, SEC, 0);
    let v = |x: i128| Value::int(ValueType::Signed(32), x);

    show("initial", &w, 0);
    w.evict(SEC / 2);
    w.add(SEC / 2, v(100));
    show("0.5s sample 100", &w, SEC / 2);
    w.evict(6 * SEC / 10);
    w.add(6 * SEC / 10, v(101));
    show("0.6s sample 101", &w, 6 * SEC / 10);
    w.evict(SEC);
    show("1.0s evaluate", &w, SEC);
    w.evict(2 * SEC);
    show("2.0s evaluate", &w, 2 * SEC);
    w.evict(22 * SEC / 10);
    w.add(22 * SEC / 10, v(99));
    show("2.2s sample 99", &w, 22 * SEC / 10);
    w.evict(3 * SEC);
    show("3.0s evaluate", &w, 3 * SEC);
}
