//! The two canonical connections of a parallelism, its integrability object
//! and linear curvature, and pre-1-parameter flows.
//!
//! Slot conventions. With `Γ^i_{jk} = (∂_j w^i_a) w̃^a_k`:
//!
//! * `∇̃_r ξ^i = ∂_r ξ^i − Γ^i_{rk} ξ^k`, `∇̃_r η_j = ∂_r η_j + Γ^k_{rj} η_k`
//! * `∇_r ξ^i  = ∂_r ξ^i − Γ^i_{kr} ξ^k`, `∇_r η_j  = ∂_r η_j + Γ^k_{jr} η_k`
//!
//! so that the frame columns and the canonical metric are `∇̃`-parallel and
//! the torsion of `∇` is `+I`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{evaluate_frame, FrameProvider};
use crate::tensor::{fd_derivative, sig, FdConfig, TensorValue, Variance};

/// `Γ^i_{jk}` at a point, slots `[i, j, k]` with `j` the derivative index.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoefficients {
    pub gamma: TensorValue,
}

/// `I^i_{jk} = Γ^i_{jk} − Γ^i_{kj}`, slots `[i, j, k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityObject {
    pub tensor: TensorValue,
}

/// `𝔉^i_{kj,r} = ∇̃_r I^i_{kj}`, slots `[i, k, j, r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCurvature {
    pub tensor: TensorValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConnectionKind {
    /// `∇̃`, for which the frame is parallel.
    FrameParallel,
    /// `∇`, the companion with Γ's lower slots exchanged.
    Spencer,
}

pub fn gamma(p: &FrameProvider, x: &[f64]) -> Result<ConnectionCoefficients> {
    let f = evaluate_frame(p, x)?;
    let dw = p.frame_derivative(x)?;
    let n = p.dim();
    let gamma = TensorValue::from_fn(n, sig("ull"), |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        (0..n).map(|a| dw.get(&[i, a, j]) * f.w_inv[(a, k)]).sum()
    });
    Ok(ConnectionCoefficients { gamma })
}

impl ConnectionCoefficients {
    pub fn torsion(&self) -> IntegrabilityObject {
        let g = &self.gamma;
        let tensor = TensorValue::from_fn(g.dims(), sig("ull"), |ix| {
            g.get(&[ix[0], ix[1], ix[2]]) - g.get(&[ix[0], ix[2], ix[1]])
        });
        IntegrabilityObject { tensor }
    }

    /// Coefficient contracted against slot index `k` when differentiating
    /// along `r`, for the given connection.
    fn coeff(&self, kind: ConnectionKind, i: usize, r: usize, k: usize) -> f64 {
        match kind {
            ConnectionKind::FrameParallel => self.gamma.get(&[i, r, k]),
            ConnectionKind::Spencer => self.gamma.get(&[i, k, r]),
        }
    }
}

pub fn integrability(p: &FrameProvider, x: &[f64]) -> Result<IntegrabilityObject> {
    Ok(gamma(p, x)?.torsion())
}

/// Covariant derivative of a tensor field; the direction index is appended
/// as the last (lower) slot.
pub fn covariant_derivative<F>(
    p: &FrameProvider,
    kind: ConnectionKind,
    field: F,
    x: &[f64],
    cfg: &FdConfig,
) -> Result<TensorValue>
where
    F: Fn(&[f64]) -> Result<TensorValue>,
{
    let value = field(x)?;
    let partial = fd_derivative(&field, x, cfg, Some(p.domain()))?;
    let conn = gamma(p, x)?;
    let n = p.dim();
    let rank = value.rank();
    let signature = value.signature().to_vec();

    let mut out = partial;
    let mut src = vec![0; rank];
    for ix in out.indices().collect::<Vec<_>>() {
        let r = ix[rank];
        let mut corr = 0.0;
        for (s, variance) in signature.iter().enumerate() {
            src.copy_from_slice(&ix[..rank]);
            let own = ix[s];
            for k in 0..n {
                src[s] = k;
                let v = value.get(&src);
                corr += match variance {
                    Variance::Upper => -conn.coeff(kind, own, r, k) * v,
                    Variance::Lower => conn.coeff(kind, k, r, own) * v,
                };
            }
        }
        let o = out.offset(&ix);
        out.entries_mut()[o] += corr;
    }
    Ok(out)
}

/// `∇̃_r` of a tensor field at `x`.
pub fn nabla_tilde<F>(p: &FrameProvider, field: F, x: &[f64], r: usize) -> Result<TensorValue>
where
    F: Fn(&[f64]) -> Result<TensorValue>,
{
    check_direction(p, r)?;
    Ok(covariant_derivative(p, ConnectionKind::FrameParallel, field, x, p.fd())?.slice_last(r))
}

/// `∇_r` of a tensor field at `x`.
pub fn nabla<F>(p: &FrameProvider, field: F, x: &[f64], r: usize) -> Result<TensorValue>
where
    F: Fn(&[f64]) -> Result<TensorValue>,
{
    check_direction(p, r)?;
    Ok(covariant_derivative(p, ConnectionKind::Spencer, field, x, p.fd())?.slice_last(r))
}

fn check_direction(p: &FrameProvider, r: usize) -> Result<()> {
    if r >= p.dim() {
        return Err(Error::Invalid(format!("direction {r} out of range for dimension {}", p.dim())));
    }
    Ok(())
}

pub fn linear_curvature(p: &FrameProvider, x: &[f64]) -> Result<LinearCurvature> {
    let field = |y: &[f64]| integrability(p, y).map(|i| i.tensor);
    let tensor = covariant_derivative(p, ConnectionKind::FrameParallel, field, x, p.fd())?;
    Ok(LinearCurvature { tensor })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Flatness {
    pub flat: bool,
    pub max_residual: f64,
    pub tol: f64,
}

/// Default flatness tolerance: analytic Jacobians vs finite-difference frames.
pub fn default_flat_tol(p: &FrameProvider) -> f64 {
    if p.has_jacobian() {
        1e-6
    } else {
        1e-4
    }
}

pub fn is_flat(p: &FrameProvider, samples: &[Vec<f64>], tol: f64) -> Result<Flatness> {
    if samples.is_empty() {
        return Err(Error::Invalid("flatness test needs at least one sample".into()));
    }
    let residuals = crate::parallel::map_points(samples, |x| linear_curvature(p, x).map(|c| c.tensor.max_abs()));
    let mut max_residual = 0.0_f64;
    for r in residuals {
        max_residual = max_residual.max(r?);
    }
    Ok(Flatness { flat: max_residual <= tol, max_residual, tol })
}

/// A sampled pre-1-parameter path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowPath {
    pub points: Vec<(f64, Vec<f64>)>,
    /// Set when integration stopped because the path left the chart.
    pub truncated: bool,
}

impl FlowPath {
    pub fn endpoint(&self) -> &[f64] {
        &self.points.last().expect("path has its starting point").1
    }

    pub fn to_csv(&self) -> String {
        let n = self.points.first().map_or(0, |p| p.1.len());
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for (t, x) in &self.points {
            out.push_str(&t.to_string());
            for v in x {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Integrates `ċ(t) = w(c(t)) · w̃(x0) · v` with fixed-step classical RK4.
pub fn pre_one_parameter_flow(p: &FrameProvider, x0: &[f64], v: &[f64], t_end: f64, dt: f64) -> Result<FlowPath> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::Invalid("flow needs dt > 0 and t_end >= 0".into()));
    }
    if v.len() != p.dim() {
        return Err(Error::Shape(format!("direction has {} components, expected {}", v.len(), p.dim())));
    }
    let start = evaluate_frame(p, x0)?;
    let n = p.dim();
    let u: Vec<f64> = (0..n).map(|a| (0..n).map(|i| start.w_inv[(a, i)] * v[i]).sum()).collect();
    let velocity = |c: &[f64]| -> Option<Vec<f64>> {
        if !p.domain().contains_with_slack(c, 1e-9) {
            return None;
        }
        let w = p.raw(c);
        Some((0..n).map(|i| (0..n).map(|a| w[(i, a)] * u[a]).sum()).collect())
    };
    let axpy = |x: &[f64], h: f64, k: &[f64]| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + h * b).collect() };

    let steps = (t_end / dt).round().max(if t_end > 0.0 { 1.0 } else { 0.0 }) as usize;
    let h = if steps > 0 { t_end / steps as f64 } else { 0.0 };
    let mut points = vec![(0.0, x0.to_vec())];
    let mut c = x0.to_vec();
    for step in 0..steps {
        let stage = || -> Option<Vec<f64>> {
            let k1 = velocity(&c)?;
            let k2 = velocity(&axpy(&c, 0.5 * h, &k1))?;
            let k3 = velocity(&axpy(&c, 0.5 * h, &k2))?;
            let k4 = velocity(&axpy(&c, h, &k3))?;
            let next: Vec<f64> = (0..n)
                .map(|i| c[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect();
            p.domain().contains_with_slack(&next, 1e-9).then_some(next)
        };
        match stage() {
            Some(next) => {
                if next.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { point: next });
                }
                c = next;
                points.push(((step + 1) as f64 * h, c.clone()));
            }
            None => return Ok(FlowPath { points, truncated: true }),
        }
    }
    Ok(FlowPath { points, truncated: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::sample_points;
    use crate::frame::{canonical_metric, catalog_lookup};

    fn cat(name: &str) -> FrameProvider {
        catalog_lookup(name).unwrap()
    }

    #[test]
    fn euclidean_gamma_vanishes() {
        let g = gamma(&cat("euclidean-3"), &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(g.gamma.max_abs(), 0.0);
    }

    #[test]
    fn heisenberg_gamma_and_integrability() {
        for x in [[0.0, 0.0, 0.0], [0.7, -0.3, 0.5]] {
            let g = gamma(&cat("heisenberg3"), &x).unwrap().gamma;
            for ix in g.indices() {
                let expect = if ix == [2, 0, 1] { 1.0 } else { 0.0 };
                assert!((g.get(&ix) - expect).abs() < 1e-14, "{ix:?}");
            }
            let i = integrability(&cat("heisenberg3"), &x).unwrap().tensor;
            assert_eq!(i.get(&[2, 0, 1]), 1.0);
            assert_eq!(i.get(&[2, 1, 0]), -1.0);
            assert!(i.max_abs() == 1.0);
        }
    }

    #[test]
    fn affine_gamma() {
        let g = gamma(&cat("affine2"), &[0.4, -0.2]).unwrap().gamma;
        for ix in g.indices() {
            let expect = if ix == [1, 0, 1] { 1.0 } else { 0.0 };
            assert!((g.get(&ix) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn rotor_integrability_closed_form() {
        let (x1, x2) = (0.3, -0.6);
        let i = integrability(&cat("rotor2"), &[x1, x2]).unwrap().tensor;
        assert!((i.get(&[0, 0, 1]) + x2).abs() < 1e-14);
        assert!((i.get(&[1, 0, 1]) + x1).abs() < 1e-14);
    }

    #[test]
    fn torsion_is_antisymmetric_exactly() {
        let i = integrability(&cat("quaternion3"), &[0.1, 0.2, -0.3]).unwrap().tensor;
        for ix in i.indices() {
            assert_eq!(i.get(&ix), -i.get(&[ix[0], ix[2], ix[1]]));
        }
    }

    #[test]
    fn frame_and_metric_are_parallel_for_frame_connection() {
        for name in ["heisenberg3", "affine2", "quaternion3", "rotor2"] {
            let p = cat(name);
            for x in sample_points(p.domain(), 3, 5) {
                for col in 0..p.dim() {
                    let field = |y: &[f64]| {
                        let w = p.raw(y);
                        Ok(TensorValue::from_fn(p.dim(), sig("u"), |ix| w[(ix[0], col)]))
                    };
                    let d = covariant_derivative(&p, ConnectionKind::FrameParallel, field, &x, p.fd()).unwrap();
                    assert!(d.max_abs() < 1e-8, "{name}");
                }
                let metric = |y: &[f64]| canonical_metric(&p, y).map(|m| m.g);
                let d = covariant_derivative(&p, ConnectionKind::FrameParallel, metric, &x, p.fd()).unwrap();
                assert!(d.max_abs() < 1e-8, "{name}");
            }
        }
    }

    #[test]
    fn spencer_derivative_of_metric_is_torsion_term() {
        let p = cat("heisenberg3");
        let x = [0.3, 0.1, -0.2];
        let metric = |y: &[f64]| canonical_metric(&p, y).map(|m| m.g);
        let g = metric(&x).unwrap();
        let t = integrability(&p, &x).unwrap().tensor;
        for r in 0..3 {
            let d = nabla(&p, metric, &x, r).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let expect: f64 = (0..3)
                        .map(|a| t.get(&[a, i, r]) * g.get(&[a, j]) + t.get(&[a, j, r]) * g.get(&[a, i]))
                        .sum();
                    assert!((d.get(&[i, j]) - expect).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn connections_agree_on_constant_frame() {
        let p = cat("euclidean-2");
        let field = |y: &[f64]| Ok(TensorValue::from_fn(2, sig("ul"), |ix| y[0] * ix[0] as f64 + y[1] * ix[1] as f64));
        let a = nabla(&p, field, &[0.2, 0.1], 1).unwrap();
        let b = nabla_tilde(&p, field, &[0.2, 0.1], 1).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        let c = nabla_tilde(&p, |_: &[f64]| Ok(TensorValue::identity(2)), &[0.0, 0.0], 0).unwrap();
        assert_eq!(c.max_abs(), 0.0);
        assert!(nabla(&p, field, &[0.0, 0.0], 2).is_err());
    }

    #[test]
    fn quaternion_metric_is_spencer_parallel() {
        let p = cat("quaternion3");
        let metric = |y: &[f64]| canonical_metric(&p, y).map(|m| m.g);
        for x in sample_points(p.domain(), 4, 9) {
            let d = covariant_derivative(&p, ConnectionKind::Spencer, metric, &x, p.fd()).unwrap();
            assert!(d.max_abs() < 1e-8);
        }
    }

    #[test]
    fn flatness_of_catalog() {
        for name in ["euclidean-3", "heisenberg3", "affine2", "quaternion3"] {
            let p = cat(name);
            let s = sample_points(p.domain(), 20, 3);
            let f = is_flat(&p, &s, 1e-6).unwrap();
            assert!(f.flat, "{name}: {}", f.max_residual);
        }
        let rotor = cat("rotor2");
        let f = is_flat(&rotor, &[vec![0.5, 0.5]], 1e-6).unwrap();
        assert!(!f.flat && f.max_residual > 1e-3);
        assert!(is_flat(&rotor, &[], 1e-6).is_err());
    }

    #[test]
    fn flows() {
        let line = pre_one_parameter_flow(&cat("euclidean-2"), &[0.0, 0.0], &[1.0, 1.0], 1.0, 0.01).unwrap();
        assert!(!line.truncated);
        for (t, x) in &line.points {
            assert!((x[0] - t).abs() < 1e-12 && (x[1] - t).abs() < 1e-12);
        }
        let aff = pre_one_parameter_flow(&cat("affine2"), &[0.0, 0.0], &[1.0, 0.0], 0.5, 0.01).unwrap();
        assert!((aff.endpoint()[0] - 0.5).abs() < 1e-12 && aff.endpoint()[1].abs() < 1e-15);

        let out = pre_one_parameter_flow(&cat("heisenberg3"), &[0.0; 3], &[1.0, 0.0, 0.0], 3.0, 0.01).unwrap();
        assert!(out.truncated);
        assert!(out.endpoint()[0] <= 1.0 + 2e-9);
        let edge = pre_one_parameter_flow(&cat("heisenberg3"), &[0.0; 3], &[1.0, 1.0, 0.0], 1.0, 1e-3).unwrap();
        assert!(!edge.truncated);
        let e = edge.endpoint();
        assert!((e[0] - 1.0).abs() < 1e-6 && (e[1] - 1.0).abs() < 1e-6 && (e[2] - 0.5).abs() < 1e-6);
        assert!(pre_one_parameter_flow(&cat("heisenberg3"), &[0.0; 3], &[1.0, 0.0, 0.0], 1.0, 0.0).is_err());
        assert!(line.to_csv().starts_with("t,x1,x2\n0,0,0\n"));
    }
}
