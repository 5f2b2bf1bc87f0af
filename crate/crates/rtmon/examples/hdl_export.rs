//! Emit the structural HDL description of a compiled monitor: one entity
//! per component, with port widths and constant tables from the analysis.
//!
//! ```bash
//! cargo run -p rtmon --example hdl_export
//! ```

use rtmon::hdl::{emit, parse_header};
use rtmon::hlc::{HlcConfig, Mode};

fn main() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let src = std::fs::read_to_string(format!("{dir}/corpus/network.lola")).unwrap();
    let spec = rtmon::analyze(&rtmon::parse(&src).unwrap()).unwrap();
    let cfg = HlcConfig::from_spec(&spec, Mode::Offline, 1_000_000, 4).unwrap();
    let units = emit(&spec, &cfg).unwrap();

    let out_dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../target/hdl-demo");
    std::fs::create_dir_all(&out_dir).unwrap();
    for u in &units {
        std::fs::write(out_dir.join(format!("{}.vhd", u.name)), &u.text).unwrap();
    }
    println!("wrote {} units to {}", units.len(), out_dir.display());

    // The headers re-parse, and the queue width matches the analyzer.
    let queue = units.iter().find(|u| u.name == "queue").unwrap();
    let header = parse_header(&queue.text);
    let (_, width) = header.ports.iter().find(|(n, _)| n == "q_in").unwrap();
    println!("queue entry width: {} bits (analyzer: {})", width, spec.s_ev());
    println!("--- queue.vhd ---\n{}", queue.text);
}
