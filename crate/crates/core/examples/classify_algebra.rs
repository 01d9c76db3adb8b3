//! Structure constants, Killing form and classification of the flat catalog frames.

use paralex::algebra::{classify, curvature_cross_check, killing_form, structure_constants};
use paralex::domain::sample_points;
use paralex::frame::catalog_lookup;

fn main() -> paralex::Result<()> {
    for name in ["euclidean-3", "heisenberg3", "affine2", "quaternion3"] {
        let p = catalog_lookup(name)?;
        let s = sample_points(p.domain(), 8, 3);
        let c = structure_constants(&p, &s[0], &s[1..], 1e-6)?;
        let cl = classify(&c);
        println!("{name}: {}", cl.summary);
        println!("  derived {:?}, lower central {:?}", cl.series.derived, cl.series.lower_central);
        println!("  Killing form{}", killing_form(&c));
        let check = curvature_cross_check(&p, &s, 1e-6)?;
        println!("  curvature cross-check consistent: {}", check.consistent);
    }
    // rotor2 has no Lie algebra
    let rotor = catalog_lookup("rotor2")?;
    let s = sample_points(rotor.domain(), 4, 3);
    println!("rotor2: {}", structure_constants(&rotor, &s[0], &s[1..], 1e-6).unwrap_err());
    Ok(())
}
