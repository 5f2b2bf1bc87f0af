//! Parse and analyze a specification, printing the full compile-time
//! report: stream table, evaluation layers, deadline schedule, window
//! plans, bit widths, and the input buffer bound.
//!
//! ```bash
//! cargo run -p rtmon --example analyze_spec
//! ```

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/avionics.lola");
    let src = std::fs::read_to_string(path).expect("corpus spec");
    let ast = rtmon::parse(&src).expect("well-formed corpus spec");
    let analyzed = rtmon::analyze(&ast).expect("corpus spec analyzes");
    println!("{}", analyzed.report());

    // The same information is available programmatically.
    println!("queue entry width  : {} bits", analyzed.s_ev());
    println!("evaluation layers  : {}", analyzed.layers.depth);
    println!(
        "hyper-period       : {}",
        analyzed
            .hyper_period()
            .map(|pi| format!("{} s", rtmon::ast::rat_decimal(pi)))
            .unwrap_or_else(|| "none".into())
    );
}
