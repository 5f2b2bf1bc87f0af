//! Random specification and trace generators for differential testing.
//! Specifications are built to satisfy the access rules by construction;
//! traces avoid landing events exactly on deadline instants (where the
//! semantics deliberately order the event first), by salting timestamps off
//! the schedule grid.

use crate::analysis::AnalyzedSpec;
use crate::time::NS_PER_SEC;
use crate::trace::TimedTrace;
use rand::Rng;

const FREQS: [u32; 3] = [1, 2, 4];

/// Generates a random well-formed specification as source text, so the
/// differential harness exercises the whole front end too.
pub fn random_spec(rng: &mut impl Rng) -> String {
    let mut src = String::new();
    let n_int_inputs = rng.gen_range(1..=3usize);
    let has_bool_input = rng.gen_bool(0.5);

    for i in 0..n_int_inputs {
        src.push_str(&format!("input i{i}: Int32\n"));
    }
    if has_bool_input {
        src.push_str("input flag: Bool\n");
    }
    let has_const = rng.gen_bool(0.4);
    if has_const {
        src.push_str(&format!("constant lim: Int32 := {}\n", rng.gen_range(-20..80)));
    }

    // Event-based integer outputs over inputs, earlier outputs, and history.
    let n_event = rng.gen_range(1..=3usize);
    let mut event_outputs: Vec<String> = Vec::new();
    for k in 0..n_event {
        let name = format!("e{k}");
        let expr = int_event_expr(rng, n_int_inputs, &event_outputs, &name, has_const);
        src.push_str(&format!("output {name} := {expr}\n"));
        event_outputs.push(name);
    }
    // A boolean event output now and then.
    let bool_event = rng.gen_bool(0.6);
    if bool_event {
        let lhs = int_event_expr(rng, n_int_inputs, &event_outputs, "@b", has_const);
        let cmp = ["<", ">", "<=", ">=", "==", "!="][rng.gen_range(0..6)];
        let rhs = rng.gen_range(-50..50);
        let guard = if has_bool_input && rng.gen_bool(0.5) {
            " && flag"
        } else {
            ""
        };
        src.push_str(&format!("output b0 := ({lhs}) {cmp} {rhs}{guard}\n"));
    }

    // Periodic outputs with windows over inputs or event-based outputs.
    let n_periodic = rng.gen_range(0..=2usize);
    let mut periodic: Vec<(String, u32)> = Vec::new();
    for k in 0..n_periodic {
        let name = format!("p{k}");
        let freq = FREQS[rng.gen_range(0..FREQS.len())];
        let beta = rng.gen_range(1..=4u32);
        let agg = ["count", "sum", "avg", "min", "max", "integral"][rng.gen_range(0..6)];
        let target = if !event_outputs.is_empty() && rng.gen_bool(0.4) {
            event_outputs[rng.gen_range(0..event_outputs.len())].clone()
        } else {
            format!("i{}", rng.gen_range(0..n_int_inputs))
        };
        let dur = crate::ast::rat_decimal(crate::time::Rat::new(beta as i64, freq as i64));
        let dflt = rng.gen_range(-10..10);
        let mut expr = format!("{target}.aggregate(over:{dur}s,using:{agg}).defaults(to:{dflt})");
        // count yields an unsigned type; keep the arithmetic extras to the
        // Int32-valued aggregations.
        if agg != "count" && rng.gen_bool(0.3) {
            let held = format!("i{}", rng.gen_range(0..n_int_inputs));
            expr = format!("{expr} + {held}.hold().defaults(to:0)");
        }
        if agg != "count" && rng.gen_bool(0.3) {
            expr = format!("{expr} + {name}.offset(by:-1).defaults(to:0)");
        }
        src.push_str(&format!("output {name} @{freq}Hz := {expr}\n"));
        periodic.push((name, freq));
    }

    // Triggers: over the event-based world or over one periodic stream.
    let n_triggers = rng.gen_range(1..=2usize);
    for t in 0..n_triggers {
        if !periodic.is_empty() && rng.gen_bool(0.5) {
            let (p, _) = &periodic[rng.gen_range(0..periodic.len())];
            let cmp = ["<", ">"][rng.gen_range(0..2)];
            src.push_str(&format!(
                "trigger {p} {cmp} {} \"periodic condition {t}\"\n",
                rng.gen_range(-20..60)
            ));
        } else {
            let lhs = int_event_expr(rng, n_int_inputs, &event_outputs, "@t", has_const);
            src.push_str(&format!(
                "trigger ({lhs}) > {} \"event condition {t}\"\n",
                rng.gen_range(-20..60)
            ));
        }
    }
    src
}

fn int_event_expr(
    rng: &mut impl Rng,
    n_inputs: usize,
    prev: &[String],
    self_name: &str,
    has_const: bool,
) -> String {
    let atom = |rng: &mut dyn rand::RngCore| -> String {
        match rng.gen_range(0..10) {
            0..=3 => format!("i{}", rng.gen_range(0..n_inputs)),
            4 => rng.gen_range(-30..30i64).to_string(),
            5 if has_const => "lim".to_string(),
            5 => format!("i{}", rng.gen_range(0..n_inputs)),
            6 if !prev.is_empty() => prev[rng.gen_range(0..prev.len())].clone(),
            7 if !prev.is_empty() => {
                let p = &prev[rng.gen_range(0..prev.len())];
                format!(
                    "{p}.offset(by:-{}).defaults(to:{})",
                    rng.gen_range(1..3),
                    rng.gen_range(-5..5)
                )
            }
            8 if !self_name.starts_with('@') => format!(
                "{self_name}.offset(by:-{}).defaults(to:0)",
                rng.gen_range(1..3)
            ),
            _ => format!(
                "i{}.offset(by:-1).defaults(to:{})",
                rng.gen_range(0..n_inputs),
                rng.gen_range(-5..5)
            ),
        }
    };
    // The first operand is always an input reference so the expression has
    // a ground event dependency.
    let a = format!("i{}", rng.gen_range(0..n_inputs));
    let b = atom(rng);
    match rng.gen_range(0..7) {
        0 => format!("{a} + {b}"),
        1 => format!("{a} - {b}"),
        2 => format!("{a} * {b}"),
        3 => format!("{a} / {b}"),
        4 => format!("abs({a} - {b})"),
        5 => format!("isqrt(abs({a}))"),
        _ => format!("{a} + {b} - {}", atom(rng)),
    }
}

/// Random timed trace for a specification: the first row anchors at zero,
/// later rows advance by 1 ms..1.2 s with a sub-microsecond salt keeping
/// them off every deadline instant. Most rows carry all inputs so
/// conjunction-gated outputs extend often.
pub fn random_trace(rng: &mut impl Rng, spec: &AnalyzedSpec, events: usize) -> TimedTrace {
    let n = spec.num_inputs();
    let mut rows = Vec::with_capacity(events);
    let mut ts = 0u64;
    for k in 0..events {
        let full = rng.gen_bool(0.7);
        let mut payload: Vec<Option<u64>> = Vec::with_capacity(n);
        for i in 0..n {
            let present = full || rng.gen_bool(0.5);
            if present {
                let ty = spec.program.inputs[i].ty;
                let v: i128 = match ty {
                    crate::value::ValueType::Bool => rng.gen_range(0..2),
                    _ => rng.gen_range(-100..100),
                };
                payload.push(Some(crate::value::Value::int_or_bool(ty, v)));
            } else {
                payload.push(None);
            }
        }
        if k > 0 {
            ts += rng.gen_range(1..1200u64) * 1_000_000 + rng.gen_range(1..1000u64);
        }
        rows.push((ts, payload));
    }
    // Trailing heartbeat reveals deadlines shortly after the last event.
    ts += 2 * NS_PER_SEC as u64 + rng.gen_range(1..1000u64);
    rows.push((ts, vec![None; n]));
    TimedTrace { rows }
}

/// A wide specification: `n` outputs, each depending on inputs only, so
/// every output evaluates in the first controller state. The chained
/// variant threads each output through its predecessor, forcing one layer
/// per output.
pub fn parallel_spec(n: usize, chained: bool) -> String {
    let mut src = String::from("input cmd: Int16\ninput height, x, y: Int32\n");
    for k in 0..n {
        if chained && k > 0 {
            src.push_str(&format!(
                "output crit_{k} := crit_{} && (x > {k} || y < {k})\n",
                k - 1
            ));
        } else {
            src.push_str(&format!(
                "output crit_{k} := x > {k} || y < {k} && height > {}\n",
                k % 500
            ));
        }
    }
    src
}
