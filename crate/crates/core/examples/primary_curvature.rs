//! Primary curvature 𝒮 with its Ricci, scalar and sectional contractions.

use paralex::curvature::{point_geometry, primary_curvature};
use paralex::frame::catalog_lookup;

fn main() -> paralex::Result<()> {
    for name in ["heisenberg3", "affine2", "quaternion3", "rotor2"] {
        let p = catalog_lookup(name)?;
        let x = p.domain().center();
        let geo = point_geometry(&p, &x)?;
        println!("{name} at center");
        println!("  max |𝒮| = {:.4}", primary_curvature(&p, &x)?.upper.max_abs());
        println!("  Ric(𝒮) = {:?}", geo.ricci.entries());
        println!("  K = {:.4}", geo.scalar);
        println!("  sectional{}", geo.sectional);
    }
    Ok(())
}
