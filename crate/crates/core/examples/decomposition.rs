//! Compares 𝔉 − 𝒮 with the Levi-Civita curvature of the canonical metric.

use paralex::curvature::{decomposition_report, levi_civita_sectional_matrix, sectional_matrix};
use paralex::domain::sample_points;
use paralex::frame::catalog_lookup;

fn main() -> paralex::Result<()> {
    for name in ["euclidean-3", "heisenberg3", "quaternion3", "rotor2"] {
        let p = catalog_lookup(name)?;
        let d = decomposition_report(&p, &sample_points(p.domain(), 5, 9))?;
        println!("{name}: best {:?}, worst residual {:.4}", d.convention, d.worst_residual);
        let x = p.domain().center();
        println!("  Levi-Civita sectional{}", levi_civita_sectional_matrix(&p, &x)?);
        println!("  primary sectional{}", sectional_matrix(&p, &x)?);
    }
    Ok(())
}
