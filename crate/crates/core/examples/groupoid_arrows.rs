//! Arrows ε(x, y) = w(y) w̃(x) compose like a groupoid.

use nalgebra::DMatrix;
use paralex::frame::{catalog_lookup, groupoid_arrow};

fn main() -> paralex::Result<()> {
    let p = catalog_lookup("heisenberg3")?;
    let (x, y, z) = ([0.1, -0.3, 0.2], [0.5, 0.4, -0.1], [-0.6, 0.2, 0.7]);

    let exy = groupoid_arrow(&p, &x, &y)?;
    let eyz = groupoid_arrow(&p, &y, &z)?;
    let exz = groupoid_arrow(&p, &x, &z)?;
    println!("ε(x, y) ={exy}");
    println!("composition residual {:.2e}", (&eyz * &exy - &exz).amax());
    println!("inverse residual     {:.2e}", (groupoid_arrow(&p, &y, &x)? * &exy - DMatrix::identity(3, 3)).amax());

    // from the identity, the arrow is the frame itself
    println!("ε(0, y) = w(y): {}", groupoid_arrow(&p, &[0.0; 3], &y)? == p.raw(&y));
    Ok(())
}
