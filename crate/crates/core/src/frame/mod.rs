//! Frame fields `w^i_a(x)` on a single chart and the objects they induce
//! pointwise: the inverse coframe, groupoid arrows, the canonical metric and
//! the global frame vector fields.
//!
//! Matrices are indexed `w[(i, a)]` with `i` the coordinate component and `a`
//! the frame label, so the columns of `w(x)` are the frame vectors.

mod catalog;
mod expr;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::tensor::{fd_derivative, sig, FdConfig, TensorValue, Variance};

pub use catalog::{catalog_lookup, CATALOG_NAMES};
pub use expr::{parse_frame_expr, Expr};

/// Frames whose condition number exceeds this are rejected as singular.
pub const CONDITION_CAP: f64 = 1e8;

pub type FrameFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
/// Returns `∂_j w^i_a` with slots `[i, a, j]`.
pub type JacobianFn = Arc<dyn Fn(&[f64]) -> TensorValue + Send + Sync>;

/// A named frame field on a box-shaped chart.
#[derive(Clone)]
pub struct FrameProvider {
    name: String,
    domain: Domain,
    eval: FrameFn,
    jac: Option<JacobianFn>,
    fd: FdConfig,
}

impl fmt::Debug for FrameProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrameProvider")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("analytic_jacobian", &self.jac.is_some())
            .field("fd", &self.fd)
            .finish()
    }
}

impl FrameProvider {
    pub fn new(
        name: impl Into<String>,
        domain: Domain,
        eval: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            domain,
            eval: Arc::new(eval),
            jac: None,
            fd: FdConfig::default(),
        }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&[f64]) -> TensorValue + Send + Sync + 'static) -> Self {
        self.jac = Some(Arc::new(jac));
        self
    }

    pub fn without_jacobian(mut self) -> Self {
        self.jac = None;
        self
    }

    pub fn with_fd(mut self, fd: FdConfig) -> Self {
        self.fd = fd;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn fd(&self) -> &FdConfig {
        &self.fd
    }

    pub fn has_jacobian(&self) -> bool {
        self.jac.is_some()
    }

    /// Raw `w(x)` without domain or conditioning checks.
    pub fn raw(&self, x: &[f64]) -> DMatrix<f64> {
        (self.eval)(x)
    }

    /// `∂_j w^i_a(x)` with slots `[i, a, j]`, analytic when available.
    pub fn frame_derivative(&self, x: &[f64]) -> Result<TensorValue> {
        self.domain.check(x)?;
        match &self.jac {
            Some(jac) => Ok(jac(x)),
            None => self.fd_frame_derivative(x),
        }
    }

    /// Finite-difference `∂_j w^i_a(x)`, ignoring any analytic Jacobian.
    pub fn fd_frame_derivative(&self, x: &[f64]) -> Result<TensorValue> {
        let field = |y: &[f64]| TensorValue::from_matrix(&self.raw(y), sig("ul"));
        fd_derivative(field, x, &self.fd, Some(&self.domain))
    }
}

/// `w(x)` together with its inverse `w̃(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAtPoint {
    pub w: DMatrix<f64>,
    pub w_inv: DMatrix<f64>,
}

pub fn evaluate_frame(p: &FrameProvider, x: &[f64]) -> Result<FrameAtPoint> {
    p.domain.check(x)?;
    let w = p.raw(x);
    if w.nrows() != p.dim() || w.ncols() != p.dim() {
        return Err(Error::Shape(format!(
            "frame '{}' returned a {}x{} matrix in dimension {}",
            p.name,
            w.nrows(),
            w.ncols(),
            p.dim()
        )));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { point: x.to_vec() });
    }
    let condition = condition_number(&w);
    if !(condition <= CONDITION_CAP) {
        return Err(Error::SingularFrame { point: x.to_vec(), condition });
    }
    let w_inv = w
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::SingularFrame { point: x.to_vec(), condition })?;
    Ok(FrameAtPoint { w, w_inv })
}

pub(crate) fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `ε^i_j(x, y) = w^i_a(y) w̃^a_j(x)`, the arrow carrying the frame at `x` to the frame at `y`.
pub fn groupoid_arrow(p: &FrameProvider, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    let fx = evaluate_frame(p, x)?;
    let fy = evaluate_frame(p, y)?;
    Ok(&fy.w * &fx.w_inv)
}

/// The metric `g_ij = Σ_a w̃^a_i w̃^a_j` and its inverse `g^ij = Σ_a w^i_a w^j_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalMetric {
    pub g: TensorValue,
    pub ginv: TensorValue,
}

pub fn canonical_metric(p: &FrameProvider, x: &[f64]) -> Result<CanonicalMetric> {
    let f = evaluate_frame(p, x)?;
    Ok(metric_from_frame(&f))
}

pub(crate) fn metric_from_frame(f: &FrameAtPoint) -> CanonicalMetric {
    let g = f.w_inv.transpose() * &f.w_inv;
    let ginv = &f.w * f.w.transpose();
    CanonicalMetric {
        g: TensorValue::from_matrix(&g, sig("ll")).expect("square"),
        ginv: TensorValue::from_matrix(&ginv, sig("uu")).expect("square"),
    }
}

/// The frame vectors `w_(k)`, i.e. the columns of `w(x)`.
pub fn frame_fields(p: &FrameProvider, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let f = evaluate_frame(p, x)?;
    Ok(f.w.column_iter().map(|c| c.iter().copied().collect()).collect())
}

/// Components of a coordinate tensor in the frame basis: upper slots are
/// contracted with `w̃`, lower slots with `w`.
pub fn frame_components(t: &TensorValue, f: &FrameAtPoint) -> TensorValue {
    let n = t.dims();
    let mut out = t.clone();
    for (slot, variance) in t.signature().iter().enumerate() {
        let prev = out.clone();
        let mut src = vec![0; t.rank()];
        out = TensorValue::from_fn(n, t.signature().to_vec(), |ix| {
            src.copy_from_slice(ix);
            (0..n)
                .map(|c| {
                    src[slot] = c;
                    let m = match variance {
                        Variance::Upper => f.w_inv[(ix[slot], c)],
                        Variance::Lower => f.w[(c, ix[slot])],
                    };
                    m * prev.get(&src)
                })
                .sum()
        });
    }
    out
}

/// `(Aw)^i_j = A^a_j w^i_a`: mixes the frame labels by a constant matrix.
pub fn act_constant(p: &FrameProvider, a: &DMatrix<f64>) -> Result<FrameProvider> {
    let n = p.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Shape(format!("constant matrix must be {n}x{n}")));
    }
    if !(condition_number(a) <= CONDITION_CAP) {
        return Err(Error::SingularMatrix);
    }
    let eval = p.eval.clone();
    let a_eval = a.clone();
    let mut out = FrameProvider {
        name: format!("A*{}", p.name),
        domain: p.domain.clone(),
        eval: Arc::new(move |x| eval(x) * &a_eval),
        jac: None,
        fd: p.fd,
    };
    if let Some(jac) = p.jac.clone() {
        let a_jac = a.clone();
        out.jac = Some(Arc::new(move |x| {
            let d = jac(x);
            TensorValue::from_fn(n, sig("ull"), |ix| {
                (0..n).map(|b| d.get(&[ix[0], b, ix[2]]) * a_jac[(b, ix[1])]).sum()
            })
        }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heis() -> FrameProvider {
        catalog_lookup("heisenberg3").unwrap()
    }

    #[test]
    fn identity_frame_evaluates_to_delta() {
        let p = catalog_lookup("euclidean-3").unwrap();
        let f = evaluate_frame(&p, &[0.3, -1.0, 1.9]).unwrap();
        assert_eq!(f.w, DMatrix::identity(3, 3));
        assert_eq!(f.w_inv, DMatrix::identity(3, 3));
    }

    #[test]
    fn heisenberg_frame_and_inverse() {
        let f = evaluate_frame(&heis(), &[0.5, 0.2, -0.1]).unwrap();
        let w = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.5, 1.0]);
        let wi = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -0.5, 1.0]);
        assert!((f.w - w).amax() < 1e-15);
        assert!((f.w_inv - wi).amax() < 1e-15);
    }

    #[test]
    fn affine_at_origin_is_delta() {
        let f = evaluate_frame(&catalog_lookup("affine2").unwrap(), &[0.0, 0.0]).unwrap();
        assert_eq!(f.w, DMatrix::identity(2, 2));
    }

    #[test]
    fn outside_domain_and_singular() {
        assert!(matches!(evaluate_frame(&heis(), &[2.0, 0.0, 0.0]), Err(Error::OutsideDomain { .. })));
        let sing = FrameProvider::new("sing", Domain::cube(2, 1.0), |x| {
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, x[0]])
        });
        assert!(matches!(evaluate_frame(&sing, &[0.0, 0.0]), Err(Error::SingularFrame { .. })));
        assert!(matches!(evaluate_frame(&sing, &[1e-9, 0.0]), Err(Error::SingularFrame { .. })));
        assert!(evaluate_frame(&sing, &[0.5, 0.0]).is_ok());
    }

    #[test]
    fn heisenberg_arrow_from_origin_is_frame() {
        let y = [0.3, -0.7, 0.2];
        let e = groupoid_arrow(&heis(), &[0.0, 0.0, 0.0], &y).unwrap();
        assert!((e - heis().raw(&y)).amax() < 1e-15);
    }

    #[test]
    fn heisenberg_metric_closed_form() {
        let x1 = 0.5;
        let m = canonical_metric(&heis(), &[x1, 0.1, 0.1]).unwrap();
        let expect = [1.0, 0.0, 0.0, 0.0, 1.0 + x1 * x1, -x1, 0.0, -x1, 1.0];
        for (g, e) in m.g.entries().iter().zip(expect) {
            assert!((g - e).abs() < 1e-14);
        }
        let prod = m.g.to_matrix().unwrap() * m.ginv.to_matrix().unwrap();
        assert!((prod - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn rotor_metric_is_euclidean() {
        let p = catalog_lookup("rotor2").unwrap();
        for x in [[0.5, 0.5], [-0.9, 0.3], [0.0, 1.0]] {
            let m = canonical_metric(&p, &x).unwrap();
            assert!((m.g.to_matrix().unwrap() - DMatrix::identity(2, 2)).amax() < 1e-14);
        }
    }

    #[test]
    fn quaternion_fields_at_origin() {
        let f = frame_fields(&catalog_lookup("quaternion3").unwrap(), &[0.0; 3]).unwrap();
        assert_eq!(f, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
    }

    #[test]
    fn scaling_the_frame_scales_the_metric() {
        let x = [0.2, 0.4, -0.3];
        let scaled = act_constant(&heis(), &(DMatrix::identity(3, 3) * 2.0)).unwrap();
        let g0 = canonical_metric(&heis(), &x).unwrap().g;
        let g1 = canonical_metric(&scaled, &x).unwrap().g;
        assert!(g1.max_abs_diff(&g0.scaled(0.25)) < 1e-14);
    }

    #[test]
    fn act_constant_rejects_singular() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 4.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(act_constant(&heis(), &a), Err(Error::SingularMatrix)));
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        for name in ["euclidean-3", "heisenberg3", "affine2", "quaternion3", "rotor2"] {
            let p = catalog_lookup(name).unwrap();
            let x: Vec<f64> = (0..p.dim()).map(|i| 0.1 + 0.13 * i as f64).collect();
            let a = p.frame_derivative(&x).unwrap();
            let fd = p.fd_frame_derivative(&x).unwrap();
            assert!(a.max_abs_diff(&fd) < 1e-6, "{name}");
        }
    }
}
