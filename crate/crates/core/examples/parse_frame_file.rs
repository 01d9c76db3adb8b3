//! Loads frames from expression files and runs them through the pipeline.
//!
//! `cargo run --example parse_frame_file -- path/to/frame` loads a custom file.

use paralex::algebra::{classify, structure_constants};
use paralex::curvature::{identity_suite, SuiteTolerances};
use paralex::domain::sample_points;
use paralex::frame::parse_frame_expr;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/frames");
    let paths: Vec<String> = match std::env::args().nth(1) {
        Some(p) => vec![p],
        None => vec![format!("{dir}/heisenberg.frame"), format!("{dir}/twisted.frame")],
    };
    for path in paths {
        let p = parse_frame_expr(&std::fs::read_to_string(&path)?)?;
        let s = sample_points(p.domain(), 6, 5);
        let suite = identity_suite(&p, &s, &SuiteTolerances::default())?;
        println!("{path}: dim {}, flat = {} ({:.2e})", p.dim(), suite.flatness.flat, suite.flatness.max_residual);
        if suite.flatness.flat {
            let c = structure_constants(&p, &s[0], &s[1..], suite.flatness.tol)?;
            println!("  {}", classify(&c).summary);
        }
    }
    Ok(())
}
