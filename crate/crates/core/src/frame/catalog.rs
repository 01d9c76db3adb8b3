use nalgebra::DMatrix;

use super::FrameProvider;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::tensor::{sig, TensorValue};

pub const CATALOG_NAMES: &[&str] = &["euclidean-n", "heisenberg3", "affine2", "quaternion3", "rotor2"];

/// Closed-form frames: one abelian, one 2-step nilpotent, one solvable,
/// one semisimple and one that is not a Lie group at all.
pub fn catalog_lookup(name: &str) -> Result<FrameProvider> {
    if let Some(n) = name.strip_prefix("euclidean-") {
        if let Ok(n) = n.parse::<usize>() {
            if n >= 1 {
                return Ok(euclidean(n).renamed(name));
            }
        }
    }
    match name {
        "heisenberg3" => Ok(heisenberg3()),
        "affine2" => Ok(affine2()),
        "quaternion3" => Ok(quaternion3()),
        "rotor2" => Ok(rotor2()),
        _ => Err(Error::UnknownFrame {
            name: name.to_string(),
            available: CATALOG_NAMES.join(", "),
        }),
    }
}

fn euclidean(n: usize) -> FrameProvider {
    FrameProvider::new("euclidean", Domain::cube(n, 2.0), move |_| DMatrix::identity(n, n))
        .with_jacobian(move |_| TensorValue::zeros(n, sig("ull")))
}

/// Left-invariant frame of `(a,b,c)·(x,y,z) = (a+x, b+y, c+z+a·y)`.
fn heisenberg3() -> FrameProvider {
    FrameProvider::new("heisenberg3", Domain::cube(3, 1.0), |x| {
        DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, x[0], 1.0])
    })
    .with_jacobian(|_| {
        let mut d = TensorValue::zeros(3, sig("ull"));
        d.set(&[2, 1, 0], 1.0);
        d
    })
}

/// Left-invariant frame of the `a·x + b` group.
fn affine2() -> FrameProvider {
    FrameProvider::new("affine2", Domain::cube(2, 1.0), |x| {
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, x[0].exp()])
    })
    .with_jacobian(|x| {
        let mut d = TensorValue::zeros(2, sig("ull"));
        d.set(&[1, 1, 0], x[0].exp());
        d
    })
}

fn skew(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0])
}

/// Unit quaternions in the vector-part chart; column `k` is the velocity of
/// `q · exp(t i_k)`, so `w = q0·1 + [v]×`.
fn quaternion3() -> FrameProvider {
    let q0 = |v: &[f64]| (1.0 - v.iter().map(|c| c * c).sum::<f64>()).sqrt();
    FrameProvider::new("quaternion3", Domain::cube(3, 0.5), move |v| {
        DMatrix::identity(3, 3) * q0(v) + skew(v)
    })
    .with_jacobian(move |v| {
        let s = q0(v);
        TensorValue::from_fn(3, sig("ull"), |ix| {
            let (i, a, j) = (ix[0], ix[1], ix[2]);
            let mut e = [0.0; 3];
            e[j] = 1.0;
            let diag = if i == a { -v[j] / s } else { 0.0 };
            diag + skew(&e)[(i, a)]
        })
    })
}

/// Rotation by `θ = x¹x²`: orthonormal everywhere, not a Lie group frame.
fn rotor2() -> FrameProvider {
    FrameProvider::new("rotor2", Domain::cube(2, 1.0), |x| {
        let (s, c) = (x[0] * x[1]).sin_cos();
        DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
    })
    .with_jacobian(|x| {
        let (s, c) = (x[0] * x[1]).sin_cos();
        let dtheta = [x[1], x[0]];
        let dw = [[-s, -c], [c, -s]];
        TensorValue::from_fn(2, sig("ull"), |ix| dtheta[ix[2]] * dw[ix[0]][ix[1]])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name_lists_catalog() {
        match catalog_lookup("nosuch") {
            Err(Error::UnknownFrame { available, .. }) => {
                for n in CATALOG_NAMES {
                    assert!(available.contains(n));
                }
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(catalog_lookup("euclidean-0").is_err());
        assert!(catalog_lookup("euclidean-x").is_err());
    }

    #[test]
    fn euclidean_box() {
        let p = catalog_lookup("euclidean-3").unwrap();
        assert_eq!(p.domain(), &Domain::cube(3, 2.0));
        assert_eq!(p.raw(&[1.0, 1.0, 1.0]), DMatrix::identity(3, 3));
        assert_eq!(p.name(), "euclidean-3");
    }

    #[test]
    fn heisenberg_columns() {
        let w = catalog_lookup("heisenberg3").unwrap().raw(&[0.7, 0.0, 0.0]);
        assert_eq!(w.column(0).as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(w.column(1).as_slice(), &[0.0, 1.0, 0.7]);
        assert_eq!(w.column(2).as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn affine_columns() {
        let w = catalog_lookup("affine2").unwrap().raw(&[0.4, 0.1]);
        assert_eq!(w.column(0).as_slice(), &[1.0, 0.0]);
        assert_eq!(w.column(1).as_slice(), &[0.0, 0.4_f64.exp()]);
    }

    #[test]
    fn quaternion_columns() {
        let v = [0.1, -0.2, 0.3];
        let q0 = (1.0_f64 - 0.14).sqrt();
        let w = catalog_lookup("quaternion3").unwrap().raw(&v);
        let cols = [[q0, v[2], -v[1]], [-v[2], q0, v[0]], [v[1], -v[0], q0]];
        for (k, col) in cols.iter().enumerate() {
            for i in 0..3 {
                assert!((w[(i, k)] - col[i]).abs() < 1e-15);
            }
        }
    }
}
