//! The Lie algebra of a flat parallelism: structure constants in the frame
//! basis, the algebraic bracket, the Killing form, derived and lower central
//! series, and the classification cross-checked against `𝒮` and `Ric(𝒮)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::connections::{default_flat_tol, integrability, is_flat};
use crate::curvature::point_geometry;
use crate::error::{Error, Result};
use crate::frame::{evaluate_frame, frame_components, FrameProvider};
use crate::parallel::map_points;
use crate::tensor::{sig, TensorValue};

/// `c^k_{ij}` with slots `[k, i, j]`, `[e_i, e_j] = c^k_{ij} e_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureConstants {
    #[serde(serialize_with = "crate::report::structure_constant_block")]
    pub c: TensorValue,
    pub base_point: Vec<f64>,
    pub constancy_residual: f64,
    pub jacobi_residual: f64,
}

impl StructureConstants {
    /// Wraps a raw array, antisymmetrising it in `(i, j)`.
    pub fn from_tensor(c: &TensorValue) -> Result<Self> {
        if c.rank() != 3 {
            return Err(Error::Shape(format!("structure constants need rank 3, got {}", c.rank())));
        }
        let c = antisymmetrized(c);
        let jacobi_residual = jacobi_residual(&c);
        Ok(Self { c, base_point: Vec::new(), constancy_residual: 0.0, jacobi_residual })
    }

    pub fn dim(&self) -> usize {
        self.c.dims()
    }

    pub fn bracket(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        bracket_with(&self.c, u, v)
    }
}

fn antisymmetrized(c: &TensorValue) -> TensorValue {
    TensorValue::from_fn(c.dims(), sig("ull"), |ix| {
        let (k, i, j) = (ix[0], ix[1], ix[2]);
        match i.cmp(&j) {
            std::cmp::Ordering::Less => c.get(&[k, i, j]),
            std::cmp::Ordering::Greater => -c.get(&[k, j, i]),
            std::cmp::Ordering::Equal => 0.0,
        }
    })
}

fn bracket_with(c: &TensorValue, u: &[f64], v: &[f64]) -> Vec<f64> {
    let n = c.dims();
    (0..n)
        .map(|k| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += c.get(&[k, i, j]) * u[i] * v[j];
                }
            }
            s
        })
        .collect()
}

/// `max |Σ_cyc c^a_{ij} c^m_{ak}|`.
fn jacobi_residual(c: &TensorValue) -> f64 {
    let n = c.dims();
    let term = |i: usize, j: usize, k: usize, m: usize| -> f64 { (0..n).map(|a| c.get(&[a, i, j]) * c.get(&[m, a, k])).sum() };
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for m in 0..n {
                    worst = worst.max((term(i, j, k, m) + term(j, k, i, m) + term(k, i, j, m)).abs());
                }
            }
        }
    }
    worst
}

fn constants_at(p: &FrameProvider, x: &[f64]) -> Result<TensorValue> {
    let f = evaluate_frame(p, x)?;
    let i = integrability(p, x)?.tensor;
    Ok(antisymmetrized(&frame_components(&i, &f)))
}

/// `c^k_{ij} = w̃^k_c I^c_{ab} w^a_i w^b_j` at `base`, validated for constancy.
pub fn structure_constants(p: &FrameProvider, base: &[f64], validation: &[Vec<f64>], tol: f64) -> Result<StructureConstants> {
    let mut points = vec![base.to_vec()];
    points.extend(validation.iter().cloned());
    let flat = is_flat(p, &points, tol)?;
    if !flat.flat {
        return Err(Error::NotFlat { residual: flat.max_residual, tol });
    }
    let c = constants_at(p, base)?;
    let others: Vec<TensorValue> = map_points(validation, |x| constants_at(p, x)).into_iter().collect::<Result<_>>()?;
    let constancy_residual = others.iter().map(|o| o.max_abs_diff(&c)).fold(0.0, f64::max);
    if constancy_residual > tol {
        return Err(Error::NotConstant { residual: constancy_residual, tol });
    }
    let jacobi_residual = jacobi_residual(&c);
    Ok(StructureConstants { c, base_point: base.to_vec(), constancy_residual, jacobi_residual })
}

/// `{ξ, η}^i = I^i_{ab}(x) ξ^a η^b`.
pub fn algebraic_bracket(p: &FrameProvider, x: &[f64], xi: &[f64], eta: &[f64]) -> Result<Vec<f64>> {
    let n = p.dim();
    if xi.len() != n || eta.len() != n {
        return Err(Error::Shape(format!("bracket arguments must have {n} components")));
    }
    Ok(bracket_with(&integrability(p, x)?.tensor, xi, eta))
}

/// `ϰ_ij = Tr(ad e_i ∘ ad e_j) = c^b_{ai} c^a_{bj}`.
pub fn killing_form(c: &StructureConstants) -> DMatrix<f64> {
    let n = c.dim();
    let t = &c.c;
    let k = DMatrix::from_fn(n, n, |i, j| {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += t.get(&[b, a, i]) * t.get(&[a, b, j]);
            }
        }
        s
    });
    // exact symmetry
    DMatrix::from_fn(n, n, |i, j| if i <= j { k[(i, j)] } else { k[(j, i)] })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyOptions {
    /// Singular-value threshold for subspace ranks in the series.
    pub rank_threshold: f64,
    /// Threshold for Killing-form rank, signature and determinant tests.
    pub killing_threshold: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { rank_threshold: 1e-9, killing_threshold: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Series {
    pub derived: Vec<usize>,
    pub lower_central: Vec<usize>,
}

/// Orthonormal basis (as columns) of `span{[u, v] : u ∈ U, v ∈ V}`.
fn bracket_span(c: &TensorValue, u: &DMatrix<f64>, v: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let n = c.dims();
    let mut images = Vec::new();
    for a in u.column_iter() {
        for b in v.column_iter() {
            let a: Vec<f64> = a.iter().copied().collect();
            let b: Vec<f64> = b.iter().copied().collect();
            images.extend(bracket_with(c, &a, &b));
        }
    }
    if images.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    let m = DMatrix::from_column_slice(n, images.len() / n, &images);
    orthonormal_range(m, threshold)
}

fn orthonormal_range(m: DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > threshold)
        .map(|(i, _)| i)
        .collect();
    DMatrix::from_fn(n, keep.len(), |r, k| u[(r, keep[k])])
}

fn run_series(c: &TensorValue, threshold: f64, derived: bool) -> Vec<usize> {
    let n = c.dims();
    let whole = DMatrix::identity(n, n);
    let mut current = whole.clone();
    let mut dims = vec![n];
    loop {
        let next = if derived {
            bracket_span(c, &current, &current, threshold)
        } else {
            bracket_span(c, &whole, &current, threshold)
        };
        let d = next.ncols();
        let prev = *dims.last().expect("nonempty");
        dims.push(d);
        if d == 0 || d == prev {
            return dims;
        }
        current = next;
    }
}

/// Dimensions of the derived and lower central series, stopping at 0 or at
/// the first repeated dimension.
pub fn derived_and_central_series(c: &StructureConstants) -> Series {
    series_with(c, &ClassifyOptions::default())
}

pub fn series_with(c: &StructureConstants, opts: &ClassifyOptions) -> Series {
    Series {
        derived: run_series(&c.c, opts.rank_threshold, true),
        lower_central: run_series(&c.c, opts.rank_threshold, false),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub abelian: bool,
    pub two_step_nilpotent: bool,
    pub nilpotent: bool,
    pub solvable: bool,
    pub semisimple: bool,
    pub nilpotency_class: Option<usize>,
    pub derived_length: Option<usize>,
    pub killing_rank: usize,
    pub killing_signature: Signature,
    pub series: Series,
    pub summary: String,
}

pub fn classify(c: &StructureConstants) -> Classification {
    classify_with(c, &ClassifyOptions::default())
}

pub fn classify_with(c: &StructureConstants, opts: &ClassifyOptions) -> Classification {
    let n = c.dim();
    let series = series_with(c, opts);
    let ends_at_zero = |s: &[usize]| s.last() == Some(&0);
    let nilpotent = ends_at_zero(&series.lower_central);
    let solvable = ends_at_zero(&series.derived);
    let abelian = series.lower_central.get(1) == Some(&0);
    let two_step_nilpotent = nilpotent && series.lower_central.len() <= 3;

    let kf = killing_form(c);
    let killing_rank = kf.clone().svd(false, false).singular_values.iter().filter(|s| **s > opts.killing_threshold).count();
    let eig = SymmetricEigen::new(kf).eigenvalues;
    let killing_signature = Signature {
        positive: eig.iter().filter(|e| **e > opts.killing_threshold).count(),
        negative: eig.iter().filter(|e| **e < -opts.killing_threshold).count(),
        zero: eig.iter().filter(|e| e.abs() <= opts.killing_threshold).count(),
    };
    let semisimple = n > 0 && killing_rank == n;

    let nilpotency_class = nilpotent.then(|| series.lower_central.len() - 1);
    let derived_length = solvable.then(|| series.derived.len() - 1);
    let summary = if abelian {
        "abelian".to_string()
    } else if two_step_nilpotent {
        "2-step nilpotent".to_string()
    } else if nilpotent {
        format!("nilpotent (class {})", nilpotency_class.unwrap_or(0))
    } else if solvable {
        "solvable, not nilpotent".to_string()
    } else if semisimple {
        "semisimple".to_string()
    } else {
        "neither solvable nor semisimple".to_string()
    };

    Classification {
        abelian,
        two_step_nilpotent,
        nilpotent,
        solvable,
        semisimple,
        nilpotency_class,
        derived_length,
        killing_rank,
        killing_signature,
        series,
        summary,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseCheck {
    pub clause: &'static str,
    pub statement: &'static str,
    /// Curvature side of the equivalence/implication.
    pub curvature_side: bool,
    /// Algebra side (from the classifier).
    pub algebra_side: bool,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheckReport {
    pub frame: String,
    pub structure_constants: StructureConstants,
    pub classification: Classification,
    pub killing: Vec<Vec<f64>>,
    pub ricci_frame: Vec<Vec<f64>>,
    pub max_primary: f64,
    pub max_ricci: f64,
    pub ricci_determinant: f64,
    pub killing_ricci_residual: f64,
    pub tol: f64,
    pub clauses: Vec<ClauseCheck>,
    pub consistent: bool,
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Checks the three classification clauses against the curvature computed
/// at `samples`, plus Killing form = `Ric(𝒮)` in frame components.
pub fn curvature_cross_check(p: &FrameProvider, samples: &[Vec<f64>], tol: f64) -> Result<CrossCheckReport> {
    curvature_cross_check_with(p, samples, tol, &ClassifyOptions::default())
}

pub fn curvature_cross_check_with(
    p: &FrameProvider,
    samples: &[Vec<f64>],
    tol: f64,
    opts: &ClassifyOptions,
) -> Result<CrossCheckReport> {
    let Some((base, rest)) = samples.split_first() else {
        return Err(Error::Invalid("cross check needs at least one sample".into()));
    };
    let flat_tol = default_flat_tol(p);
    let sc = structure_constants(p, base, rest, flat_tol)?;
    let classification = classify_with(&sc, opts);
    let killing = killing_form(&sc);

    let geos = map_points(samples, |x| point_geometry(p, x)).into_iter().collect::<Result<Vec<_>>>()?;
    let mut max_primary = 0.0_f64;
    let mut max_ricci = 0.0_f64;
    let mut killing_ricci_residual = 0.0_f64;
    let n = p.dim();
    let ricci_frames: Vec<DMatrix<f64>> = geos
        .iter()
        .map(|g| frame_components(&g.ricci, &g.frame).to_matrix().expect("rank 2"))
        .collect();
    for (g, rf) in geos.iter().zip(&ricci_frames) {
        max_primary = max_primary.max(g.primary.upper.max_abs());
        max_ricci = max_ricci.max(g.ricci.max_abs());
        killing_ricci_residual = killing_ricci_residual.max((rf - &killing).amax());
    }
    let ricci_frame = ricci_frames[0].clone();
    let ricci_determinant = if n == 0 { 0.0 } else { ricci_frame.determinant() };

    let s_zero = max_primary <= tol;
    let ric_zero = max_ricci <= tol;
    let ric_nondegenerate = ricci_determinant.abs() > opts.killing_threshold;
    let clauses = vec![
        ClauseCheck {
            clause: "1",
            statement: "𝒮 = 0 iff 2-step nilpotent",
            curvature_side: s_zero,
            algebra_side: classification.two_step_nilpotent,
            consistent: s_zero == classification.two_step_nilpotent,
        },
        ClauseCheck {
            clause: "2",
            statement: "nilpotent implies Ric(𝒮) = 0",
            curvature_side: ric_zero,
            algebra_side: classification.nilpotent,
            consistent: !classification.nilpotent || ric_zero,
        },
        ClauseCheck {
            clause: "3",
            statement: "semisimple iff Ric(𝒮) nondegenerate",
            curvature_side: ric_nondegenerate,
            algebra_side: classification.semisimple,
            consistent: ric_nondegenerate == classification.semisimple,
        },
        ClauseCheck {
            clause: "killing",
            statement: "Killing form equals Ric(𝒮) in frame components",
            curvature_side: killing_ricci_residual <= tol,
            algebra_side: true,
            consistent: killing_ricci_residual <= tol,
        },
    ];
    let consistent = clauses.iter().all(|c| c.consistent);
    Ok(CrossCheckReport {
        frame: p.name().to_string(),
        structure_constants: sc,
        classification,
        killing: matrix_rows(&killing),
        ricci_frame: matrix_rows(&ricci_frame),
        max_primary,
        max_ricci,
        ricci_determinant,
        killing_ricci_residual,
        tol,
        clauses,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::sample_points;
    use crate::frame::catalog_lookup;

    fn constants(name: &str) -> StructureConstants {
        let p = catalog_lookup(name).unwrap();
        let s = sample_points(p.domain(), 6, 11);
        structure_constants(&p, &s[0], &s[1..], 1e-6).unwrap()
    }

    fn levi_civita_symbol(i: usize, j: usize, k: usize) -> f64 {
        ((j as i64 - i as i64) * (k as i64 - i as i64) * (k as i64 - j as i64)).signum() as f64
    }

    #[test]
    fn euclidean_constants_vanish() {
        assert_eq!(constants("euclidean-3").c.max_abs(), 0.0);
    }

    #[test]
    fn heisenberg_constants() {
        let c = constants("heisenberg3").c;
        for ix in c.indices() {
            let expect = match ix.as_slice() {
                [2, 0, 1] => 1.0,
                [2, 1, 0] => -1.0,
                _ => 0.0,
            };
            assert!((c.get(&ix) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn quaternion_constants_are_twice_epsilon() {
        let sc = constants("quaternion3");
        for ix in sc.c.indices() {
            let expect = 2.0 * levi_civita_symbol(ix[1], ix[2], ix[0]);
            assert!((sc.c.get(&ix) - expect).abs() < 1e-6, "{ix:?}");
        }
        assert!(sc.jacobi_residual < 1e-6);
    }

    #[test]
    fn rotor_is_rejected() {
        let p = catalog_lookup("rotor2").unwrap();
        let s = sample_points(p.domain(), 4, 2);
        assert!(matches!(structure_constants(&p, &s[0], &s[1..], 1e-6), Err(Error::NotFlat { .. })));
    }

    #[test]
    fn brackets_at_origin() {
        let h = catalog_lookup("heisenberg3").unwrap();
        assert_eq!(algebraic_bracket(&h, &[0.0; 3], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(), vec![0.0, 0.0, 1.0]);
        let a = catalog_lookup("affine2").unwrap();
        assert_eq!(algebraic_bracket(&a, &[0.0; 2], &[1.0, 0.0], &[0.0, 1.0]).unwrap(), vec![0.0, 1.0]);
        let v = [0.3, -0.2, 0.9];
        let zero = algebraic_bracket(&catalog_lookup("quaternion3").unwrap(), &[0.1, 0.1, 0.1], &v, &v).unwrap();
        assert!(zero.iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn killing_forms() {
        assert_eq!(killing_form(&constants("euclidean-2")).amax(), 0.0);
        let a = killing_form(&constants("affine2"));
        assert!((a - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).amax() < 1e-12);
        let q = killing_form(&constants("quaternion3"));
        assert!((q + DMatrix::identity(3, 3) * 8.0).amax() < 1e-5);
    }

    #[test]
    fn series_dims() {
        let e = derived_and_central_series(&constants("euclidean-3"));
        assert_eq!(e.derived, vec![3, 0]);
        let h = derived_and_central_series(&constants("heisenberg3"));
        assert_eq!(h.lower_central, vec![3, 1, 0]);
        assert_eq!(h.derived, vec![3, 1, 0]);
        let a = derived_and_central_series(&constants("affine2"));
        assert_eq!(a.derived, vec![2, 1, 0]);
        assert_eq!(a.lower_central, vec![2, 1, 1]);
        let q = derived_and_central_series(&constants("quaternion3"));
        assert_eq!(q.derived, vec![3, 3]);
    }

    #[test]
    fn classifications() {
        let e = classify(&constants("euclidean-3"));
        assert!(e.abelian && e.two_step_nilpotent && e.nilpotent && e.solvable && !e.semisimple);
        let h = classify(&constants("heisenberg3"));
        assert!(!h.abelian && h.two_step_nilpotent && !h.semisimple);
        assert_eq!(h.nilpotency_class, Some(2));
        assert_eq!(h.summary, "2-step nilpotent");
        let a = classify(&constants("affine2"));
        assert!(a.solvable && !a.nilpotent && !a.semisimple);
        assert_eq!(a.summary, "solvable, not nilpotent");
        let q = classify(&constants("quaternion3"));
        assert!(q.semisimple && !q.solvable);
        assert_eq!(q.killing_rank, 3);
        assert_eq!(q.killing_signature, Signature { positive: 0, negative: 3, zero: 0 });
    }

    #[test]
    fn three_step_nilpotent_is_not_two_step() {
        // filiform: [e1,e2]=e3, [e1,e3]=e4
        let mut c = TensorValue::zeros(4, sig("ull"));
        c.set(&[2, 0, 1], 1.0);
        c.set(&[3, 0, 2], 1.0);
        let sc = StructureConstants::from_tensor(&c).unwrap();
        let cl = classify(&sc);
        assert!(cl.nilpotent && !cl.two_step_nilpotent);
        assert_eq!(cl.nilpotency_class, Some(3));
        assert_eq!(cl.series.lower_central, vec![4, 2, 1, 0]);
        assert_eq!(cl.summary, "nilpotent (class 3)");
    }

    #[test]
    fn cross_check_consistent_on_flat_catalog() {
        for name in ["euclidean-3", "heisenberg3", "affine2", "quaternion3"] {
            let p = catalog_lookup(name).unwrap();
            let r = curvature_cross_check(&p, &sample_points(p.domain(), 6, 4), 1e-6).unwrap();
            assert!(r.consistent, "{name}: {:?}", r.clauses);
        }
    }

    #[test]
    fn constants_transform_under_constant_change_of_frame() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.0, -0.3, 2.0, 0.1, 0.2, 0.0, 0.7]);
        let ainv = a.clone().try_inverse().unwrap();
        for name in ["heisenberg3", "quaternion3"] {
            let p = catalog_lookup(name).unwrap();
            let q = crate::frame::act_constant(&p, &a).unwrap();
            let s = sample_points(p.domain(), 4, 9);
            let c = structure_constants(&p, &s[0], &s[1..], 1e-6).unwrap();
            let cq = structure_constants(&q, &s[0], &s[1..], 1e-6).unwrap();
            let expect = TensorValue::from_fn(3, sig("ull"), |ix| {
                let mut sum = 0.0;
                for m in 0..3 {
                    for x in 0..3 {
                        for y in 0..3 {
                            sum += ainv[(ix[0], m)] * c.c.get(&[m, x, y]) * a[(x, ix[1])] * a[(y, ix[2])];
                        }
                    }
                }
                sum
            });
            assert!(cq.c.max_abs_diff(&expect) < 1e-8, "{name}");
            let (l, r) = (classify(&c), classify(&cq));
            assert_eq!((l.abelian, l.nilpotent, l.solvable, l.semisimple), (r.abelian, r.nilpotent, r.solvable, r.semisimple));
        }
    }

    #[test]
    fn primary_curvature_is_the_double_bracket() {
        let p = catalog_lookup("affine2").unwrap();
        let x = [0.3, -0.4];
        let s = crate::curvature::primary_curvature(&p, &x).unwrap().upper;
        let (xi, eta, ga) = ([0.7, -1.2], [0.4, 0.9], [-0.5, 1.3]);
        let inner = algebraic_bracket(&p, &x, &xi, &eta).unwrap();
        let outer = algebraic_bracket(&p, &x, &inner, &ga).unwrap();
        for i in 0..2 {
            let mut v = 0.0;
            for k in 0..2 {
                for j in 0..2 {
                    for r in 0..2 {
                        v += s.get(&[i, k, j, r]) * xi[k] * eta[j] * ga[r];
                    }
                }
            }
            assert!((v - outer[i]).abs() < 1e-10);
        }
    }
}
