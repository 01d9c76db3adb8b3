//! Lists the built-in frames with their domains and the frame at the chart center.

use paralex::frame::{canonical_metric, catalog_lookup, evaluate_frame};

fn main() -> paralex::Result<()> {
    for name in ["euclidean-3", "heisenberg3", "affine2", "quaternion3", "rotor2"] {
        let p = catalog_lookup(name)?;
        let x = p.domain().center();
        let f = evaluate_frame(&p, &x)?;
        let g = canonical_metric(&p, &[0.5; 3][..p.dim()])?;
        println!("{name}: dim {} on {:?} .. {:?}", p.dim(), p.domain().lo, p.domain().hi);
        println!("  w at center{}", f.w);
        println!("  g at (0.5, ..): {:?}", g.g.entries());
    }
    Ok(())
}
