//! Analysis driver: runs every static pass and bundles the results into the
//! [`AnalyzedSpec`] consumed by the engines, the reference interpreter, and
//! the HDL emitter.

use crate::ast::{rat_decimal, Spec};
use crate::bits::Mask;
use crate::desugar::{desugar, Program};
use crate::error::AnalysisError;
use crate::ir::{lower, Ir, StreamSlot, WindowInfo};
use crate::layers::{compute_layers, Layers};
use crate::memory::{compute_memory, MemoryPlan, WindowPlan};
use crate::schedule::{compute_schedule, Schedule};
use crate::sizing::compute_buffer_size;
use crate::time::{format_rat_secs, Rat, TS_BITS};
use crate::typing::{check_types_and_pacing, Pacing};
use crate::value::ValueType;
use std::fmt;

#[derive(Debug, Clone)]
pub struct AnalyzedSpec {
    pub program: Program,
    pub exprs: Vec<Ir>,
    pub output_types: Vec<ValueType>,
    pub pacing: Vec<Pacing>,
    pub layers: Layers,
    pub schedule: Schedule,
    pub memory: MemoryPlan,
    /// Required-input mask per output; `None` for periodic outputs. An event
    /// extends output `j` exactly when every required input is present.
    pub event_req: Vec<Option<Mask>>,
    /// Affected-output mask per deadline, in schedule order.
    pub dltarget: Vec<Mask>,
    /// Input buffer size from the backlog bound.
    pub buffer_size: u64,
    /// Sizing inputs used for `buffer_size`.
    pub delta_min: u64,
    pub dld_bound: u64,
}

impl AnalyzedSpec {
    pub fn num_inputs(&self) -> usize {
        self.program.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.program.outputs.len()
    }

    pub fn num_triggers(&self) -> usize {
        self.program.triggers.len()
    }

    pub fn num_windows(&self) -> usize {
        self.memory.windows.len()
    }

    /// Bit width of input stream `i`'s value.
    pub fn input_bits(&self, i: usize) -> u32 {
        self.program.inputs[i].ty.bits()
    }

    /// Width of one queue entry:
    /// payload (value + present bit per input) + timestamp + affected mask.
    pub fn s_ev(&self) -> usize {
        let payload: u32 = (0..self.num_inputs()).map(|i| self.input_bits(i) + 1).sum();
        payload as usize + TS_BITS as usize + self.num_outputs()
    }

    /// Row `i` of the dependency matrix: outputs that require input `i`.
    pub fn dep_row(&self, input: usize) -> Mask {
        let mut m = Mask::zeros(self.num_outputs());
        for (j, req) in self.event_req.iter().enumerate() {
            if let Some(req) = req {
                if req.get(input) {
                    m.set(j);
                }
            }
        }
        m
    }

    /// Affected outputs for an event with the given present-input mask.
    pub fn event_affected(&self, present: &Mask) -> Mask {
        let mut m = Mask::zeros(self.num_outputs());
        for (j, req) in self.event_req.iter().enumerate() {
            if let Some(req) = req {
                if req.subset_of(present) {
                    m.set(j);
                }
            }
        }
        m
    }

    pub fn windows(&self) -> &[WindowPlan] {
        &self.memory.windows
    }

    pub fn window_infos(&self) -> Vec<&WindowInfo> {
        self.memory.windows.iter().map(|w| &w.info).collect()
    }

    pub fn hyper_period(&self) -> Option<Rat> {
        self.schedule.hyper_period
    }

    pub fn report(&self) -> Report<'_> {
        Report(self)
    }
}

pub fn analyze(spec: &Spec) -> Result<AnalyzedSpec, Vec<AnalysisError>> {
    let program = desugar(spec).map_err(|e| vec![e])?;
    analyze_program(program)
}

pub fn analyze_program(program: Program) -> Result<AnalyzedSpec, Vec<AnalysisError>> {
    let checked = check_types_and_pacing(&program)?;
    let layers = compute_layers(&program, &checked.accesses).map_err(|e| vec![e])?;
    let schedule = compute_schedule(&program, &checked.pacing);
    let lowered = lower(&program, &checked.typed_exprs, &checked.output_types);
    let memory = compute_memory(&program, &checked.accesses, &checked.pacing, &lowered.windows)
        .map_err(|e| vec![e])?;

    let n_up = program.outputs.len();
    let n_down = program.inputs.len();
    let event_req: Vec<Option<Mask>> = checked
        .pacing
        .iter()
        .map(|p| match p {
            Pacing::Event(act) => {
                let mut m = Mask::zeros(n_down);
                for i in &act.inputs {
                    m.set(*i);
                }
                Some(m)
            }
            Pacing::Periodic(_) => None,
        })
        .collect();

    let dltarget = schedule
        .deadlines
        .iter()
        .map(|d| {
            let mut m = Mask::zeros(n_up);
            for s in &d.streams {
                m.set(*s);
            }
            m
        })
        .collect();

    // Worst case used by the default sizing: an event may skip at most one
    // hyper-period's worth of deadlines, and the source is assumed to pace
    // itself just fast enough for that load to stay bounded.
    let dld_bound = schedule.deadlines.len() as u64;
    let delta_min = dld_bound + 2;
    let buffer_size = compute_buffer_size(delta_min, dld_bound).map_err(|e| vec![e])?;

    Ok(AnalyzedSpec {
        program,
        exprs: lowered.exprs,
        output_types: checked.output_types,
        pacing: checked.pacing,
        layers,
        schedule,
        memory,
        event_req,
        dltarget,
        buffer_size,
        delta_min,
        dld_bound,
    })
}

/// Human-readable analysis report, printed by the `analyze` CLI command.
pub struct Report<'a>(&'a AnalyzedSpec);

impl fmt::Display for Report<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0;
        let p = &a.program;
        writeln!(
            f,
            "streams: {} inputs, {} outputs, {} triggers, {} windows",
            a.num_inputs(),
            a.num_outputs(),
            a.num_triggers(),
            a.num_windows()
        )?;
        writeln!(f, "widths: s_ts={} s_ev={}", TS_BITS, a.s_ev())?;
        for (i, input) in p.inputs.iter().enumerate() {
            writeln!(
                f,
                "  input {}: {} (s_{}={}, capa={}, depth={})",
                input.name,
                input.ty,
                i + 1,
                input.ty.bits(),
                a.memory.capa_inputs[i],
                a.memory.depth_inputs[i]
            )?;
        }
        for (j, out) in p.outputs.iter().enumerate() {
            let pacing = match &a.pacing[j] {
                Pacing::Periodic(freq) => format!("@{}Hz", rat_decimal(*freq)),
                Pacing::Event(act) => {
                    let mut names: Vec<&str> =
                        act.inputs.iter().map(|i| p.inputs[*i].name.as_str()).collect();
                    if act.time {
                        names.push("time");
                    }
                    format!("event({})", names.join(","))
                }
            };
            writeln!(
                f,
                "  output {}: {} {} (layer {}, capa={}, depth={})",
                out.name,
                a.output_types[j],
                pacing,
                a.layers.assignment[j],
                a.memory.capa_outputs[j],
                a.memory.depth_outputs[j]
            )?;
        }
        writeln!(f, "layers: l={}", a.layers.depth)?;
        for (x, layer) in a.layers.layers.iter().enumerate() {
            let names: Vec<&str> = layer.iter().map(|j| p.outputs[*j].name.as_str()).collect();
            writeln!(f, "  2.{}: {}", x + 1, names.join(" "))?;
        }
        match a.hyper_period() {
            None => writeln!(f, "schedule: none (no periodic streams)")?,
            Some(pi) => {
                writeln!(
                    f,
                    "schedule: hyper-period {}s, {} deadlines",
                    rat_decimal(pi),
                    a.schedule.deadlines.len()
                )?;
                for (i, d) in a.schedule.deadlines.iter().enumerate() {
                    let names: Vec<&str> =
                        d.streams.iter().map(|j| p.outputs[*j].name.as_str()).collect();
                    writeln!(
                        f,
                        "  dl {}: +{} -> {{{}}}",
                        i + 1,
                        format_rat_secs(d.offset),
                        names.join(", ")
                    )?;
                }
            }
        }
        for (k, w) in a.windows().iter().enumerate() {
            let target = match w.info.target {
                StreamSlot::Input(i) => p.inputs[i].name.as_str(),
                StreamSlot::Output(o) => p.outputs[o].name.as_str(),
                StreamSlot::Time => "time",
            };
            writeln!(
                f,
                "window {}: {} over {} for {}s in {} (beta={}, bucket={}s)",
                k,
                w.info.agg.name(),
                target,
                rat_decimal(w.info.duration),
                p.outputs[w.info.owner].name,
                w.beta,
                rat_decimal(w.bucket_period),
            )?;
        }
        writeln!(
            f,
            "buffer: B={} (delta_min={}, dld_bound={})",
            a.buffer_size, a.delta_min, a.dld_bound
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    #[test]
    fn queue_width_formula() {
        // Six inputs: 32+32+1+1+1+32 value bits plus one present bit each,
        // a 64-bit timestamp, and one affected bit per output.
        let src = "constant server: Int32 := 42\n\
                   input src, dst: Int32\n\
                   input fin, push, syn: Bool\n\
                   input length: Int32\n\
                   output receiver: Int32 := if dst == server then 1 else 0\n\
                   output received := if (dst == server) && push then 0 else length\n\
                   output workload @1Hz := received.aggregate(over:1s,using:sum).defaults(to:0)\n\
                   trigger workload > 1000000 \"too high\"";
        let a = analyze(&parse(src).unwrap()).unwrap();
        assert_eq!(a.num_inputs(), 6);
        assert_eq!(a.num_outputs(), 4);
        let payload = (32 + 1) + (32 + 1) + (1 + 1) + (1 + 1) + (1 + 1) + (32 + 1);
        assert_eq!(a.s_ev(), payload + 64 + 4);
    }

    #[test]
    fn event_affection_is_conjunctive() {
        let src = "input a: Int32\ninput b: Int32\n\
                   output xa := a + 1\n\
                   output xab := a + b";
        let a = analyze(&parse(src).unwrap()).unwrap();
        let mut only_a = Mask::zeros(2);
        only_a.set(0);
        let affected = a.event_affected(&only_a);
        assert!(affected.get(0));
        assert!(!affected.get(1), "xab needs both inputs");
        let mut both = Mask::zeros(2);
        both.set(0);
        both.set(1);
        let affected = a.event_affected(&both);
        assert!(affected.get(0) && affected.get(1));
    }

    #[test]
    fn dep_rows_match_required_masks() {
        let src = "input a: Int32\ninput b: Int32\noutput x := a + b\noutput y := b * 2";
        let a = analyze(&parse(src).unwrap()).unwrap();
        assert_eq!(format!("{:?}", a.dep_row(0)), "01"); // only x needs a
        assert_eq!(format!("{:?}", a.dep_row(1)), "11"); // both need b
    }

    #[test]
    fn report_renders() {
        let src = "input velo: Int32\n\
                   output avg @1Hz := velo.aggregate(over:3s,using:avg).defaults(to:80)\n\
                   trigger avg < 1 \"slow\"";
        let a = analyze(&parse(src).unwrap()).unwrap();
        let text = a.report().to_string();
        assert!(text.contains("hyper-period 1s"));
        assert!(text.contains("beta=3"));
        assert!(text.contains("B="));
    }
}
