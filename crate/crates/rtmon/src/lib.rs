//! Compiler and cycle-level execution engine for a real-time stream
//! specification language in the Lola family.
//!
//! A specification declares typed input streams, output streams (event-based
//! or periodic), and triggers. The compiler front end parses and desugars the
//! text into an AST, the static analyzer derives everything the runtime needs
//! (pacing, evaluation layers, deadline schedule, per-stream memory, window
//! bucket counts, input buffer size), and the engine executes the compiled
//! monitor as a faithful simulation of a two-controller hardware
//! architecture: a high-level controller that receives events and fires
//! periodic deadlines, a bounded FIFO queue, and a low-level controller that
//! evaluates stream expressions and raises triggers.
//!
//! A naive reference interpreter ([`oracle`]) serves as the correctness
//! ground truth for differential testing, and [`hdl`] emits a structural
//! VHDL-flavored description of the compiled monitor.
//!
//! See the `examples/` directory for runnable entry points covering each
//! capability; the `rtmon` binary exposes the same functionality as a small
//! CLI (`analyze`, `run`, `oracle`, `emit-hdl`).

pub mod analysis;
pub mod ast;
pub mod bits;
pub mod desugar;
pub mod engine;
pub mod error;
pub mod hdl;
pub mod hlc;
pub mod ir;
pub mod layers;
pub mod lexer;
pub mod llc;
pub mod memory;
pub mod oracle;
pub mod parser;
pub mod queue;
pub mod schedule;
pub mod sizing;
pub mod testgen;
pub mod time;
pub mod trace;
pub mod typing;
pub mod value;
pub mod window;

pub use analysis::{analyze, AnalyzedSpec};
pub use ast::Spec;
pub use error::{AnalysisError, EngineError, ParseError, TraceError};
pub use parser::parse;
