//! Command-line front end: analyze specifications, replay traces through
//! the hardware-model pipeline or the reference interpreter, and export the
//! structural HDL description.
//!
//! Exit codes: 0 success, 1 specification error, 2 trace error, 3 internal.

use clap::{Parser, Subcommand, ValueEnum};
use rtmon::analysis::{analyze, AnalyzedSpec};
use rtmon::engine::{
    online_its_cutoff, online_latch_ticks, online_run_ticks, render_trigger_log, run_offline,
    run_online, MonitorConfig,
};
use rtmon::hlc::{HlcConfig, Mode};
use rtmon::oracle::{run_oracle, OracleMode};
use rtmon::trace::{parse_offline, parse_online};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rtmon", about = "Stream monitor compiler and cycle-level simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    Offline,
    Online,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type-check a specification and print the derived schedule, layers,
    /// memory plan, and buffer size.
    Analyze {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Run a trace through the compiled monitor pipeline.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum, default_value = "offline")]
        mode: CliMode,
        #[arg(long, default_value_t = 4)]
        prescale: u64,
        #[arg(long, default_value_t = 1_000_000)]
        xi_ns: u64,
        #[arg(long, default_value_t = 64)]
        queue_depth: usize,
        #[arg(long, default_value_t = 0)]
        expr_latency: u64,
        /// Dump per-cycle controller states and queue pushes to stderr.
        #[arg(long)]
        instrument: bool,
        /// Online only: pace the virtual clock against wall time.
        #[arg(long)]
        wall_clock: bool,
    },
    /// Run a trace through the reference interpreter (same log format).
    Oracle {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum, default_value = "offline")]
        mode: CliMode,
        #[arg(long, default_value_t = 4)]
        prescale: u64,
        #[arg(long, default_value_t = 1_000_000)]
        xi_ns: u64,
    },
    /// Write the structural HDL text units for a specification.
    EmitHdl {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 4)]
        prescale: u64,
        #[arg(long, default_value_t = 1_000_000)]
        xi_ns: u64,
    },
}

fn load_spec(path: &PathBuf) -> Result<AnalyzedSpec, ExitCode> {
    let src = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(1)
    })?;
    let ast = rtmon::parse(&src).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(1)
    })?;
    analyze(&ast).map_err(|errs| {
        for e in errs {
            eprintln!("error: {}: {e}", path.display());
        }
        ExitCode::from(1)
    })
}

fn load_trace_text(path: &PathBuf) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(2)
    })
}

fn trigger_messages(spec: &AnalyzedSpec) -> Vec<String> {
    spec.program.triggers.iter().map(|t| t.message.clone()).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}

fn run(cli: Cli) -> Result<(), ExitCode> {
    match cli.cmd {
        Cmd::Analyze { spec } => {
            let analyzed = load_spec(&spec)?;
            print!("{}", analyzed.report());
            Ok(())
        }
        Cmd::Run {
            spec,
            trace,
            mode,
            prescale,
            xi_ns,
            queue_depth,
            expr_latency,
            instrument,
            wall_clock,
        } => {
            let analyzed = load_spec(&spec)?;
            let text = load_trace_text(&trace)?;
            let messages = trigger_messages(&analyzed);
            let out = match mode {
                CliMode::Offline => {
                    let rows = parse_offline(&text, &analyzed).map_err(|e| {
                        eprintln!("error: {}: {e}", trace.display());
                        ExitCode::from(2)
                    })?;
                    let cfg = MonitorConfig {
                        xi_ns,
                        prescale,
                        queue_depth,
                        expr_latency,
                        instrument,
                        ..MonitorConfig::sized_for_trace(&analyzed, &rows.rows)
                    };
                    run_offline(&analyzed, &rows.rows, &cfg)
                }
                CliMode::Online => {
                    let rows = parse_online(&text, &analyzed).map_err(|e| {
                        eprintln!("error: {}: {e}", trace.display());
                        ExitCode::from(2)
                    })?;
                    let cfg = MonitorConfig {
                        mode: Mode::Online,
                        xi_ns,
                        prescale,
                        queue_depth,
                        expr_latency,
                        instrument,
                        ..Default::default()
                    };
                    if wall_clock {
                        run_online_wall_clock(&analyzed, &rows.rows, &cfg)
                    } else {
                        run_online(&analyzed, &rows.rows, &cfg, None)
                    }
                }
            }
            .map_err(|e| {
                eprintln!("internal error: {e}");
                ExitCode::from(3)
            })?;
            print!("{}", render_trigger_log(&out.verdicts, &messages));
            eprint!("{}", out.stats.render());
            if instrument {
                for p in &out.pushes {
                    eprintln!("push tick={} kind={:?} ts={}", p.tick, p.kind, p.ts);
                }
                if let Some(probe) = &out.probe {
                    for (tick, llq, ec) in &probe.cycles {
                        eprintln!("cycle tick={tick} llq={llq:?} ec={ec:?}");
                    }
                }
            }
            Ok(())
        }
        Cmd::Oracle {
            spec,
            trace,
            mode,
            prescale,
            xi_ns,
        } => {
            let analyzed = load_spec(&spec)?;
            let text = load_trace_text(&trace)?;
            let messages = trigger_messages(&analyzed);
            let out = match mode {
                CliMode::Offline => {
                    let rows = parse_offline(&text, &analyzed).map_err(|e| {
                        eprintln!("error: {}: {e}", trace.display());
                        ExitCode::from(2)
                    })?;
                    run_oracle(&analyzed, &rows.rows, OracleMode::Offline)
                }
                CliMode::Online => {
                    let rows = parse_online(&text, &analyzed).map_err(|e| {
                        eprintln!("error: {}: {e}", trace.display());
                        ExitCode::from(2)
                    })?;
                    // Mirror the virtual-clock run: assign latch timestamps
                    // and fire deadlines up to the session cutoff.
                    let ticks: Vec<u64> = rows.rows.iter().map(|(t, _)| *t).collect();
                    let latch = online_latch_ticks(&ticks, prescale);
                    let timed: Vec<(u64, Vec<Option<u64>>)> = latch
                        .iter()
                        .zip(rows.rows.iter())
                        .map(|(edge, (_, p))| (edge * xi_ns, p.clone()))
                        .collect();
                    let hyper = analyzed
                        .hyper_period()
                        .and_then(|pi| rtmon::time::secs_to_ns(pi).ok())
                        .unwrap_or(0);
                    let last = ticks.last().copied().unwrap_or(0);
                    let total = online_run_ticks(last, prescale, xi_ns, hyper);
                    let cutoff = online_its_cutoff(total, prescale, xi_ns);
                    run_oracle(&analyzed, &timed, OracleMode::Online { its_cutoff: cutoff })
                }
            }
            .map_err(|e| {
                eprintln!("internal error: {e}");
                ExitCode::from(3)
            })?;
            print!("{}", render_trigger_log(&out.verdicts, &messages));
            eprintln!(
                "events: {}\ndeadlines: {}\nverdicts: {}",
                out.events,
                out.deadlines,
                out.verdicts.len()
            );
            Ok(())
        }
        Cmd::EmitHdl {
            spec,
            out_dir,
            prescale,
            xi_ns,
        } => {
            let analyzed = load_spec(&spec)?;
            let cfg = HlcConfig::from_spec(&analyzed, Mode::Offline, xi_ns, prescale)
                .map_err(|e| {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                })?;
            let units = rtmon::hdl::emit(&analyzed, &cfg).map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(1)
            })?;
            std::fs::create_dir_all(&out_dir).map_err(|e| {
                eprintln!("error: cannot create {}: {e}", out_dir.display());
                ExitCode::from(3)
            })?;
            for u in &units {
                let path = out_dir.join(format!("{}.vhd", u.name));
                std::fs::write(&path, &u.text).map_err(|e| {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    ExitCode::from(3)
                })?;
            }
            eprintln!("wrote {} units to {}", units.len(), out_dir.display());
            Ok(())
        }
    }
}

/// Demo driver pacing the virtual clock against wall time; excluded from
/// the test suite.
fn run_online_wall_clock(
    spec: &AnalyzedSpec,
    rows: &[(u64, Vec<Option<u64>>)],
    cfg: &MonitorConfig,
) -> Result<rtmon::engine::RunOutput, rtmon::error::EngineError> {
    let start = std::time::Instant::now();
    let gate = |tick: u64| {
        let due = std::time::Duration::from_nanos(tick * cfg.xi_ns);
        while start.elapsed() < due {
            std::thread::yield_now();
        }
    };
    // Same deterministic engine; the gate only slows stepping down.
    let total = online_run_ticks(
        rows.last().map(|(t, _)| *t).unwrap_or(0),
        cfg.prescale,
        cfg.xi_ns,
        0,
    );
    for t in 0..total {
        gate(t);
    }
    run_online(spec, rows, cfg, Some(total))
}
