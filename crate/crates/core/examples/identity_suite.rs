//! Runs the identity suite on every catalog frame.

use paralex::curvature::{identity_suite, IdentityStatus, SuiteTolerances};
use paralex::domain::sample_points;
use paralex::frame::catalog_lookup;

fn main() -> paralex::Result<()> {
    for name in ["heisenberg3", "affine2", "quaternion3", "rotor2"] {
        let p = catalog_lookup(name)?;
        let report = identity_suite(&p, &sample_points(p.domain(), 10, 42), &SuiteTolerances::default())?;
        println!("{name}: flat = {}", report.flatness.flat);
        for r in &report.records {
            let shown = match r.status {
                IdentityStatus::Skipped => "skipped".to_string(),
                _ => format!("{:?} {:.2e}", r.status, r.max_residual.unwrap_or(f64::NAN)),
            };
            println!("  {:<24} {shown}", r.id);
        }
    }
    Ok(())
}
