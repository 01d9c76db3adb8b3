//! Pre-1-parameter paths: velocity is the arrow transport of the initial velocity.

use paralex::connections::pre_one_parameter_flow;
use paralex::frame::catalog_lookup;

fn main() -> paralex::Result<()> {
    let p = catalog_lookup("heisenberg3")?;
    let v = [0.8, -0.6, 0.1];
    let path = pre_one_parameter_flow(&p, &[0.0; 3], &v, 1.0, 1e-3)?;
    let end = path.endpoint();
    println!("endpoint {end:?}");
    println!("closed form {:?}", [v[0], v[1], v[2] + v[0] * v[1] / 2.0]);

    let out = pre_one_parameter_flow(&p, &[0.5, 0.0, 0.0], &[1.0, 0.0, 0.0], 2.0, 1e-2)?;
    println!("leaving the chart: truncated = {}, last point {:?}", out.truncated, out.endpoint());
    print!("{}", pre_one_parameter_flow(&p, &[0.0; 3], &v, 0.05, 0.01)?.to_csv());
    Ok(())
}
