//! Structural VHDL-flavored text backend: one entity per monitor component,
//! with every port width taken from the analysis and the compiled constant
//! tables (dependency masks, deadline targets, deadline offsets) embedded.
//!
//! The output is validated structurally: entity headers re-parse and their
//! widths must match the analyzer exactly. Running vendor synthesis is out
//! of scope.

use crate::analysis::AnalyzedSpec;
use crate::ast::{BinOp, UnOp};
use crate::hlc::HlcConfig;
use crate::ir::{Ir, StreamSlot};
use crate::time::TS_BITS;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HdlError {
    #[error("no structural mapping for construct: {0}")]
    UnsupportedConstruct(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HdlUnit {
    /// File stem; written as `<name>.vhd`.
    pub name: String,
    pub text: String,
}

/// VHDL identifiers: alphanumerics and single underscores, starting with a
/// letter. Internal names such as `@trigger0` become `anon_trigger0`.
fn sanitize(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else if c == '@' {
            out.push_str("anon_");
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    let trimmed = out.trim_matches('_').to_string();
    if trimmed.chars().next().is_some_and(|c| c.is_ascii_digit()) {
        format!("s_{trimmed}")
    } else {
        trimmed
    }
}

fn vec_port(w: &mut String, name: &str, dir: &str, bits: usize) {
    let _ = writeln!(
        w,
        "    {name} : {dir} std_logic_vector({} downto 0);",
        bits.max(1) - 1
    );
}

fn bit_port(w: &mut String, name: &str, dir: &str) {
    let _ = writeln!(w, "    {name} : {dir} std_logic;");
}

struct EntityBuilder {
    name: String,
    generics: Vec<(String, u64)>,
    ports: String,
    body: String,
}

impl EntityBuilder {
    fn new(name: &str) -> Self {
        EntityBuilder {
            name: name.to_string(),
            generics: Vec::new(),
            ports: String::new(),
            body: String::new(),
        }
    }

    fn generic(&mut self, name: &str, value: u64) -> &mut Self {
        self.generics.push((name.to_string(), value));
        self
    }

    fn finish(self) -> HdlUnit {
        let mut text = String::new();
        let _ = writeln!(text, "library ieee;");
        let _ = writeln!(text, "use ieee.std_logic_1164.all;");
        let _ = writeln!(text, "use ieee.numeric_std.all;\n");
        let _ = writeln!(text, "entity {} is", self.name);
        if !self.generics.is_empty() {
            let _ = writeln!(text, "  generic (");
            for (i, (g, v)) in self.generics.iter().enumerate() {
                let sep = if i + 1 == self.generics.len() { "" } else { ";" };
                let _ = writeln!(text, "    {g} : integer := {v}{sep}");
            }
            let _ = writeln!(text, "  );");
        }
        let _ = writeln!(text, "  port (");
        let mut ports = self.ports.trim_end().to_string();
        if let Some(stripped) = ports.strip_suffix(';') {
            ports = stripped.to_string();
        }
        let _ = writeln!(text, "{ports}");
        let _ = writeln!(text, "  );");
        let _ = writeln!(text, "end entity {};\n", self.name);
        let _ = writeln!(text, "architecture rtl of {} is", self.name);
        let _ = write!(text, "{}", self.body);
        let _ = writeln!(text, "end architecture rtl;");
        HdlUnit {
            name: self.name,
            text,
        }
    }
}

/// Emits the full component set. Deterministic: identical inputs produce
/// byte-identical text.
pub fn emit(spec: &AnalyzedSpec, cfg: &HlcConfig) -> Result<Vec<HdlUnit>, HdlError> {
    let mut units = Vec::new();
    let s_ts = TS_BITS as usize;
    let s_ev = spec.s_ev();
    let payload_bits: usize = (0..spec.num_inputs())
        .map(|i| spec.input_bits(i) as usize + 1)
        .sum();
    let n_up = spec.num_outputs();
    let n_dl = spec.schedule.deadlines.len();
    let has_schedule = n_dl > 0;

    // PreScaler
    {
        let mut e = EntityBuilder::new("prescaler");
        e.generic("prescale", cfg.prescale);
        bit_port(&mut e.ports, "sclk", "in");
        bit_port(&mut e.ports, "hclk", "out");
        bit_port(&mut e.ports, "qclk", "out");
        e.body.push_str(
            "  -- divides sclk by the prescale factor; qclk ticks twice per hclk\n",
        );
        units.push(e.finish());
    }

    // ExtInterface
    {
        let mut e = EntityBuilder::new("ext_interface");
        bit_port(&mut e.ports, "hclk", "in");
        bit_port(&mut e.ports, "avail", "in");
        vec_port(&mut e.ports, "din", "in", s_ts + payload_bits);
        vec_port(&mut e.ports, "ev", "out", payload_bits);
        bit_port(&mut e.ports, "valid_ev", "out");
        vec_port(&mut e.ports, "ext_ts", "out", s_ts);
        bit_port(&mut e.ports, "valid_ext_ts", "out");
        bit_port(&mut e.ports, "clear_avail", "out");
        e.body
            .push_str("  -- forwards latched events and clears the avail latch\n");
        units.push(e.finish());
    }

    // TimeSelect
    {
        let mut e = EntityBuilder::new("time_select");
        e.generic("xi_ns", cfg.xi_ns);
        bit_port(&mut e.ports, "sclk", "in");
        vec_port(&mut e.ports, "ext_ts", "in", s_ts);
        bit_port(&mut e.ports, "valid_ext_ts", "in");
        vec_port(&mut e.ports, "its", "out", s_ts);
        bit_port(&mut e.ports, "valid_its", "out");
        e.body.push_str(
            "  -- online: reg_its accumulates xi_ns per sclk tick; offline: wires ext_ts through\n",
        );
        units.push(e.finish());
    }

    // Scheduler (only with periodic streams)
    if has_schedule {
        let mut e = EntityBuilder::new("scheduler");
        e.generic("num_deadlines", n_dl as u64);
        e.generic("hyper_period_ns", cfg.hyper_period);
        bit_port(&mut e.ports, "hclk", "in");
        vec_port(&mut e.ports, "its", "in", s_ts);
        bit_port(&mut e.ports, "valid_its", "in");
        vec_port(&mut e.ports, "dl", "out", s_ts + n_dl);
        bit_port(&mut e.ports, "valid_dl", "out");
        bit_port(&mut e.ports, "hold", "out");
        let _ = writeln!(e.body, "  -- deadline offsets within the hyper-period (ns)");
        let _ = writeln!(
            e.body,
            "  type offset_arr is array (0 to {}) of unsigned({} downto 0);",
            n_dl - 1,
            s_ts - 1
        );
        let _ = write!(e.body, "  constant DEADLINE_OFFSET : offset_arr := (");
        for (i, o) in cfg.deadline_offsets.iter().enumerate() {
            if i > 0 {
                e.body.push_str(", ");
            }
            let _ = write!(e.body, "to_unsigned({o}, {s_ts})");
        }
        e.body.push_str(");\n");
        let _ = writeln!(
            e.body,
            "  type dltarget_arr is array (0 to {}) of std_logic_vector({} downto 0);",
            n_dl - 1,
            n_up - 1
        );
        let _ = write!(e.body, "  constant DLTARGET : dltarget_arr := (");
        for (i, m) in spec.dltarget.iter().enumerate() {
            if i > 0 {
                e.body.push_str(", ");
            }
            let _ = write!(e.body, "\"{m:?}\"");
        }
        e.body.push_str(");\n");
        e.body
            .push_str("  -- did register is one-hot; period tracks the hyper-period base\n");
        units.push(e.finish());
    }

    // EventDelay
    {
        let mut e = EntityBuilder::new("event_delay");
        e.generic("buffer_size", cfg.buffer_size);
        bit_port(&mut e.ports, "hclk", "in");
        bit_port(&mut e.ports, "hold", "in");
        vec_port(&mut e.ports, "ev", "in", payload_bits);
        bit_port(&mut e.ports, "valid_ev", "in");
        vec_port(&mut e.ports, "its", "in", s_ts);
        vec_port(&mut e.ports, "tev", "out", s_ts + payload_bits);
        bit_port(&mut e.ports, "valid_tev", "out");
        e.body.push_str(
            "  -- input buffer plus data/stalled registers; hold stalls the buffer front\n",
        );
        units.push(e.finish());
    }

    // HLQInterface
    {
        let mut e = EntityBuilder::new("hlq_interface");
        bit_port(&mut e.ports, "qclk", "in");
        vec_port(&mut e.ports, "tev", "in", s_ts + payload_bits);
        bit_port(&mut e.ports, "valid_tev", "in");
        if has_schedule {
            vec_port(&mut e.ports, "dl", "in", s_ts + n_dl);
            bit_port(&mut e.ports, "valid_dl", "in");
        }
        bit_port(&mut e.ports, "push", "out");
        vec_port(&mut e.ports, "q_in", "out", s_ev);
        if has_schedule {
            e.body
                .push_str("  -- events on even phases, deadlines on odd phases\n");
        } else {
            e.body
                .push_str("  -- event-phase-only variant: no periodic deadlines exist\n");
        }
        let _ = writeln!(
            e.body,
            "  type dep_arr is array (0 to {}) of std_logic_vector({} downto 0);",
            spec.num_inputs().max(1) - 1,
            n_up.max(1) - 1
        );
        let _ = write!(e.body, "  constant DEP : dep_arr := (");
        for i in 0..spec.num_inputs() {
            if i > 0 {
                e.body.push_str(", ");
            }
            let _ = write!(e.body, "\"{:?}\"", spec.dep_row(i));
        }
        e.body.push_str(");\n");
        units.push(e.finish());
    }

    // Queue
    {
        let mut e = EntityBuilder::new("queue");
        e.generic("depth", 64);
        bit_port(&mut e.ports, "sclk", "in");
        bit_port(&mut e.ports, "push", "in");
        vec_port(&mut e.ports, "q_in", "in", s_ev);
        bit_port(&mut e.ports, "pop", "in");
        vec_port(&mut e.ports, "q_out", "out", s_ev);
        bit_port(&mut e.ports, "empty", "out");
        e.body.push_str("  -- bounded first-in first-out buffer\n");
        units.push(e.finish());
    }

    // LLQInterface
    {
        let mut e = EntityBuilder::new("llq_interface");
        bit_port(&mut e.ports, "sclk", "in");
        bit_port(&mut e.ports, "empty", "in");
        vec_port(&mut e.ports, "q_out", "in", s_ev);
        bit_port(&mut e.ports, "pop", "out");
        vec_port(&mut e.ports, "d_in", "out", s_ev);
        bit_port(&mut e.ports, "een", "out");
        e.body
            .push_str("  -- idle/pop/eval state machine driving the evaluation enable latch\n");
        units.push(e.finish());
    }

    // EvalController
    {
        let mut e = EntityBuilder::new("eval_controller");
        e.generic("num_layers", spec.layers.depth as u64);
        bit_port(&mut e.ports, "sclk", "in");
        bit_port(&mut e.ports, "een", "in");
        vec_port(&mut e.ports, "d_in", "in", s_ev);
        if spec.num_triggers() > 0 {
            vec_port(&mut e.ports, "trig", "out", spec.num_triggers());
        }
        bit_port(&mut e.ports, "done", "out");
        let _ = writeln!(
            e.body,
            "  -- states: idle, 1 (pseudo-extension), 2.1 .. 2.{}",
            spec.layers.depth
        );
        units.push(e.finish());
    }

    // One store per input stream plus the implicit time store.
    for (i, input) in spec.program.inputs.iter().enumerate() {
        let mut e = EntityBuilder::new(&format!("in_{}", sanitize(&input.name)));
        let s_i = spec.input_bits(i) as usize;
        e.generic("depth", spec.memory.depth_inputs[i] as u64);
        bit_port(&mut e.ports, "sclk", "in");
        bit_port(&mut e.ports, "upd", "in");
        vec_port(&mut e.ports, "d_in", "in", s_i);
        bit_port(&mut e.ports, "done", "out");
        vec_port(
            &mut e.ports,
            "d_out",
            "out",
            spec.memory.depth_inputs[i] as usize * (s_i + 1),
        );
        e.body
            .push_str("  -- shift-register store, newest value in the top slot\n");
        units.push(e.finish());
    }
    {
        let mut e = EntityBuilder::new("in_time");
        e.generic("depth", spec.memory.depth_time as u64);
        bit_port(&mut e.ports, "sclk", "in");
        bit_port(&mut e.ports, "upd", "in");
        vec_port(&mut e.ports, "d_in", "in", s_ts);
        bit_port(&mut e.ports, "done", "out");
        vec_port(
            &mut e.ports,
            "d_out",
            "out",
            spec.memory.depth_time as usize * (s_ts + 1),
        );
        e.body
            .push_str("  -- implicit timestamp stream, fed from the entry timestamp\n");
        units.push(e.finish());
    }

    // One component per output stream with its expression.
    for (j, out) in spec.program.outputs.iter().enumerate() {
        let mut e = EntityBuilder::new(&format!("out_{}", sanitize(&out.name)));
        let s_j = spec.output_types[j].bits() as usize;
        e.generic("depth", spec.memory.depth_outputs[j] as u64);
        e.generic("layer", spec.layers.assignment[j] as u64);
        bit_port(&mut e.ports, "sclk", "in");
        bit_port(&mut e.ports, "pe", "in");
        bit_port(&mut e.ports, "eval", "in");
        bit_port(&mut e.ports, "done", "out");
        vec_port(
            &mut e.ports,
            "d_out",
            "out",
            spec.memory.depth_outputs[j] as usize * (s_j + 1),
        );
        let expr_text = expr_to_vhdl(spec, &spec.exprs[j])?;
        let _ = writeln!(e.body, "  -- evalexpr: d_out <= {expr_text};");
        units.push(e.finish());
    }

    // One component per sliding window.
    for (k, w) in spec.windows().iter().enumerate() {
        let target = match w.info.target {
            StreamSlot::Input(i) => sanitize(&spec.program.inputs[i].name),
            StreamSlot::Output(o) => sanitize(&spec.program.outputs[o].name),
            StreamSlot::Time => "time".to_string(),
        };
        let mut e = EntityBuilder::new(&format!("w{k}_{}_{}", w.info.agg.name(), target));
        e.generic("beta", w.beta as u64);
        let s_in = w.info.target_ty.bits() as usize;
        let s_out = w.info.result_ty.bits() as usize;
        bit_port(&mut e.ports, "sclk", "in");
        bit_port(&mut e.ports, "evict", "in");
        bit_port(&mut e.ports, "upd", "in");
        bit_port(&mut e.ports, "req", "in");
        vec_port(&mut e.ports, "ts_in", "in", s_ts);
        vec_port(&mut e.ports, "d_in", "in", s_in);
        bit_port(&mut e.ports, "done", "out");
        vec_port(&mut e.ports, "d_out", "out", s_out);
        e.body.push_str(
            "  -- beta pre-aggregation buckets; register T holds the next eviction time\n",
        );
        units.push(e.finish());
    }

    // Top level wiring everything together.
    {
        let mut e = EntityBuilder::new("monitor_top");
        bit_port(&mut e.ports, "sclk", "in");
        bit_port(&mut e.ports, "avail", "in");
        vec_port(&mut e.ports, "event_in", "in", s_ts + payload_bits);
        if spec.num_triggers() > 0 {
            vec_port(&mut e.ports, "trig", "out", spec.num_triggers());
        }
        let _ = writeln!(e.body, "  -- instantiates: prescaler, ext_interface, time_select,");
        let _ = writeln!(
            e.body,
            "  --   {}event_delay, hlq_interface, queue, llq_interface, eval_controller,",
            if has_schedule { "scheduler, " } else { "" }
        );
        let _ = writeln!(
            e.body,
            "  --   {} input stores, {} output components, {} windows",
            spec.num_inputs() + 1,
            n_up,
            spec.num_windows()
        );
        units.push(e.finish());
    }

    Ok(units)
}

fn expr_to_vhdl(spec: &AnalyzedSpec, ir: &Ir) -> Result<String, HdlError> {
    Ok(match ir {
        Ir::Lit(v) => format!("{v}"),
        Ir::Sync(slot) => slot_signal(spec, *slot, 0),
        Ir::Offset { slot, back, default } => format!(
            "dflt({}, {})",
            slot_signal(spec, *slot, *back),
            expr_to_vhdl(spec, default)?
        ),
        Ir::Hold { slot, default } => format!(
            "hold({}, {})",
            slot_signal(spec, *slot, 0),
            expr_to_vhdl(spec, default)?
        ),
        Ir::Window { idx, default } => {
            format!("dflt(w{idx}_out, {})", expr_to_vhdl(spec, default)?)
        }
        Ir::Unary(op, inner) => {
            let i = expr_to_vhdl(spec, inner)?;
            match op {
                UnOp::Not => format!("not ({i})"),
                UnOp::Neg => format!("-({i})"),
                UnOp::Abs => format!("abs({i})"),
                UnOp::Isqrt => format!("isqrt({i})"),
            }
        }
        Ir::Binary(op, a, b) => {
            let a = expr_to_vhdl(spec, a)?;
            let b = expr_to_vhdl(spec, b)?;
            let sym = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::Lt => "<",
                BinOp::Le => "<=",
                BinOp::Gt => ">",
                BinOp::Ge => ">=",
                BinOp::Eq => "=",
                BinOp::Ne => "/=",
                BinOp::And => "and",
                BinOp::Or => "or",
            };
            format!("({a} {sym} {b})")
        }
        Ir::Ite(c, t, f) => format!(
            "sel({}, {}, {})",
            expr_to_vhdl(spec, c)?,
            expr_to_vhdl(spec, t)?,
            expr_to_vhdl(spec, f)?
        ),
    })
}

fn slot_signal(spec: &AnalyzedSpec, slot: StreamSlot, back: u32) -> String {
    let (name, depth) = match slot {
        StreamSlot::Input(i) => (
            format!("in_{}", sanitize(&spec.program.inputs[i].name)),
            spec.memory.depth_inputs[i],
        ),
        StreamSlot::Output(o) => (
            format!("out_{}", sanitize(&spec.program.outputs[o].name)),
            spec.memory.depth_outputs[o],
        ),
        StreamSlot::Time => ("in_time".to_string(), spec.memory.depth_time),
    };
    format!("{name}_r{}", depth - back)
}

/// A port or generic extracted from an emitted entity header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedHeader {
    /// (port name, bit width); plain `std_logic` ports have width 1.
    pub ports: Vec<(String, usize)>,
    pub generics: Vec<(String, u64)>,
}

/// Re-parses an emitted unit's entity header. The emitter's own output is
/// the only supported input; anything else may return garbage.
pub fn parse_header(text: &str) -> ParsedHeader {
    let mut ports = Vec::new();
    let mut generics = Vec::new();
    for line in text.lines() {
        let line = line.trim().trim_end_matches(';');
        if let Some((name, rest)) = line.split_once(':') {
            let name = name.trim().to_string();
            let rest = rest.trim();
            if let Some(rest) = rest.strip_prefix("integer :=") {
                if let Ok(v) = rest.trim().parse::<u64>() {
                    generics.push((name, v));
                }
            } else if rest.contains("std_logic_vector(") {
                if let Some(start) = rest.find("std_logic_vector(") {
                    let inner = &rest[start + "std_logic_vector(".len()..];
                    if let Some(end) = inner.find(" downto") {
                        if let Ok(hi) = inner[..end].trim().parse::<usize>() {
                            ports.push((name, hi + 1));
                        }
                    }
                }
            } else if rest.starts_with("in std_logic") || rest.starts_with("out std_logic") {
                ports.push((name, 1));
            }
        }
        if line.starts_with("architecture") {
            break;
        }
    }
    ParsedHeader { ports, generics }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::hlc::Mode;
    use crate::parser::parse;

    fn emit_for(src: &str) -> (AnalyzedSpec, Vec<HdlUnit>) {
        let spec = analyze(&parse(src).unwrap()).unwrap();
        let cfg = HlcConfig::from_spec(&spec, Mode::Offline, 1_000_000, 4).unwrap();
        let units = emit(&spec, &cfg).unwrap();
        (spec, units)
    }

    #[test]
    fn queue_port_width_matches_s_ev() {
        let (spec, units) = emit_for(
            "input v: Int32\ninput ok: Bool\n\
             output x := v + 1\n\
             output w @1Hz := v.aggregate(over:2s,using:sum).defaults(to:0)",
        );
        let queue = units.iter().find(|u| u.name == "queue").unwrap();
        let header = parse_header(&queue.text);
        let q_in = header.ports.iter().find(|(n, _)| n == "q_in").unwrap();
        assert_eq!(q_in.1, spec.s_ev());
    }

    #[test]
    fn no_scheduler_without_periodic_streams() {
        let (_, units) = emit_for("input v: Int32\noutput x := v + 1");
        assert!(!units.iter().any(|u| u.name == "scheduler"));
        let hlq = units.iter().find(|u| u.name == "hlq_interface").unwrap();
        assert!(hlq.text.contains("event-phase-only"));
        let (_, units) = emit_for(
            "input v: Int32\noutput w @1Hz := v.aggregate(over:1s,using:count).defaults(to:0)",
        );
        assert!(units.iter().any(|u| u.name == "scheduler"));
    }

    #[test]
    fn emission_is_deterministic() {
        let src = "input v: Int32\noutput w @2Hz := v.aggregate(over:1s,using:avg).defaults(to:0)\ntrigger w > 5 \"hi\"";
        let (_, a) = emit_for(src);
        let (_, b) = emit_for(src);
        assert_eq!(a, b);
    }

    #[test]
    fn window_beta_appears_as_generic() {
        let (spec, units) = emit_for(
            "input v: Int32\noutput w @1Hz := v.aggregate(over:3s,using:avg).defaults(to:80)",
        );
        let win = units.iter().find(|u| u.name.starts_with("w0_avg")).unwrap();
        let header = parse_header(&win.text);
        let beta = header.generics.iter().find(|(n, _)| n == "beta").unwrap();
        assert_eq!(beta.1, spec.windows()[0].beta as u64);
    }

    #[test]
    fn trigger_outputs_sanitize_into_valid_identifiers() {
        let (_, units) = emit_for("input v: Int32\ntrigger v > 0 \"x\"");
        assert!(units.iter().any(|u| u.name == "out_anon_trigger0"));
    }
}
