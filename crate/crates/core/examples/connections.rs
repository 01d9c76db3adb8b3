//! The two canonical connections, the integrability object and flatness.

use paralex::connections::{covariant_derivative, gamma, integrability, is_flat, ConnectionKind};
use paralex::domain::sample_points;
use paralex::frame::{canonical_metric, catalog_lookup};

fn main() -> paralex::Result<()> {
    let p = catalog_lookup("affine2")?;
    let x = [0.2, -0.5];
    let g = gamma(&p, &x)?;
    println!("Γ entries {:?}", g.gamma.entries());
    println!("I entries {:?}", integrability(&p, &x)?.tensor.entries());

    let metric = |y: &[f64]| canonical_metric(&p, y).map(|m| m.g);
    let tilde = covariant_derivative(&p, ConnectionKind::FrameParallel, metric, &x, p.fd())?;
    let spencer = covariant_derivative(&p, ConnectionKind::Spencer, metric, &x, p.fd())?;
    println!("|∇̃g| = {:.2e}   |∇g| = {:.3}", tilde.max_abs(), spencer.max_abs());

    for name in ["affine2", "rotor2"] {
        let q = catalog_lookup(name)?;
        let f = is_flat(&q, &sample_points(q.domain(), 10, 1), 1e-6)?;
        println!("{name}: flat = {} (max |𝔉| = {:.3e})", f.flat, f.max_residual);
    }
    Ok(())
}
