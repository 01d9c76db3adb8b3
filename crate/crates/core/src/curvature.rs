//! Primary curvature `𝒮^i_{kj,r} = I^a_{kj} I^i_{ar}` and its contractions,
//! the identity suite, the Levi-Civita curvature of the canonical metric and
//! the decomposition report comparing it with `𝔉 − 𝒮`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::connections::{covariant_derivative, gamma, integrability, linear_curvature, ConnectionKind, Flatness};
use crate::error::{Error, Result};
use crate::frame::{canonical_metric, evaluate_frame, frame_components, metric_from_frame, CanonicalMetric, FrameAtPoint, FrameProvider};
use crate::parallel::map_points;
use crate::tensor::{fd_derivative, raise_lower, sig, FdConfig, TensorValue};

/// `𝒮` with slots `[i, k, j, r]` and its lowered form `𝒮_{kj,ri}` with slots `[k, j, r, i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimaryCurvature {
    pub upper: TensorValue,
    pub lower: TensorValue,
}

impl PrimaryCurvature {
    fn from_integrability(i: &TensorValue, metric: &CanonicalMetric) -> Self {
        let n = i.dims();
        let upper = TensorValue::from_fn(n, sig("ulll"), |ix| {
            let (i_, k, j, r) = (ix[0], ix[1], ix[2], ix[3]);
            (0..n).map(|a| i.get(&[a, k, j]) * i.get(&[i_, a, r])).sum()
        });
        let lowered = raise_lower(&upper, 0, &metric.g, &metric.ginv).expect("canonical metric is SPD");
        let lower = lowered.permute(&[1, 2, 3, 0]).expect("valid permutation");
        Self { upper, lower }
    }

    /// `Ric(𝒮)_{kj} = 𝒮^a_{ak,j}`.
    pub fn ricci(&self) -> TensorValue {
        self.upper.contract(0, 1).expect("upper/lower pair")
    }
}

pub fn primary_curvature(p: &FrameProvider, x: &[f64]) -> Result<PrimaryCurvature> {
    let i = integrability(p, x)?.tensor;
    let metric = canonical_metric(p, x)?;
    Ok(PrimaryCurvature::from_integrability(&i, &metric))
}

pub fn ricci_s(p: &FrameProvider, x: &[f64]) -> Result<TensorValue> {
    Ok(primary_curvature(p, x)?.ricci())
}

fn scalar_from(ric: &TensorValue, ginv: &TensorValue) -> f64 {
    ric.entries().iter().zip(ginv.entries()).map(|(a, b)| a * b).sum()
}

/// `K = Ric(𝒮)_{ba} g^{ab}`.
pub fn scalar_k(p: &FrameProvider, x: &[f64]) -> Result<f64> {
    let metric = canonical_metric(p, x)?;
    Ok(scalar_from(&ricci_s(p, x)?, &metric.ginv))
}

fn sectional_from(lower: &TensorValue, f: &FrameAtPoint, k: usize, l: usize) -> f64 {
    let n = lower.dims();
    let (wk, wl) = (f.w.column(k), f.w.column(l));
    let mut s = 0.0;
    for ix in lower.indices() {
        s += lower.get(&ix) * wk[ix[0]] * wl[ix[1]] * wk[ix[2]] * wl[ix[3]];
    }
    debug_assert!(n == f.w.nrows());
    -s
}

/// `S_kl = −𝒮_{ab,cd} w_k^a w_l^b w_k^c w_l^d` for zero-based frame labels `k ≠ l`.
pub fn sectional(p: &FrameProvider, x: &[f64], k: usize, l: usize) -> Result<f64> {
    let n = p.dim();
    if k >= n || l >= n || k == l {
        return Err(Error::Invalid(format!("sectional needs distinct frame labels below {n}, got ({k}, {l})")));
    }
    let f = evaluate_frame(p, x)?;
    Ok(sectional_from(&primary_curvature(p, x)?.lower, &f, k, l))
}

/// All `S_kl`; the diagonal is zero.
pub fn sectional_matrix(p: &FrameProvider, x: &[f64]) -> Result<DMatrix<f64>> {
    let f = evaluate_frame(p, x)?;
    let s = primary_curvature(p, x)?;
    Ok(sectional_matrix_from(&s.lower, &f))
}

fn sectional_matrix_from(lower: &TensorValue, f: &FrameAtPoint) -> DMatrix<f64> {
    let n = lower.dims();
    DMatrix::from_fn(n, n, |k, l| if k == l { 0.0 } else { sectional_from(lower, f, k, l) })
}

/// Everything first-order computed at one point.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub x: Vec<f64>,
    pub frame: FrameAtPoint,
    pub metric: CanonicalMetric,
    pub gamma: TensorValue,
    pub integrability: TensorValue,
    pub frak_r: TensorValue,
    pub primary: PrimaryCurvature,
    pub ricci: TensorValue,
    pub scalar: f64,
    pub sectional: DMatrix<f64>,
}

pub fn point_geometry(p: &FrameProvider, x: &[f64]) -> Result<PointGeometry> {
    let frame = evaluate_frame(p, x)?;
    let metric = metric_from_frame(&frame);
    let conn = gamma(p, x)?;
    let integrability = conn.torsion().tensor;
    let frak_r = linear_curvature(p, x)?.tensor;
    let primary = PrimaryCurvature::from_integrability(&integrability, &metric);
    let ricci = primary.ricci();
    let scalar = scalar_from(&ricci, &metric.ginv);
    let sectional = sectional_matrix_from(&primary.lower, &frame);
    Ok(PointGeometry {
        x: x.to_vec(),
        frame,
        metric,
        gamma: conn.gamma,
        integrability,
        frak_r,
        primary,
        ricci,
        scalar,
        sectional,
    })
}

// ---------------------------------------------------------------------------
// Identity suite

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IdentityStatus {
    Pass,
    Fail,
    Skipped,
    /// A yes/no property rather than an identity.
    Property,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRecord {
    pub id: &'static str,
    pub description: &'static str,
    pub status: IdentityStatus,
    pub max_residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub frame: String,
    pub samples: usize,
    pub flatness: Flatness,
    pub records: Vec<IdentityRecord>,
}

impl IdentityReport {
    /// True when no evaluated identity failed.
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.status != IdentityStatus::Fail)
    }

    pub fn record(&self, id: &str) -> Option<&IdentityRecord> {
        self.records.iter().find(|r| r.id == id)
    }
}

/// Per-family tolerances of the identity suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteTolerances {
    /// Gate for the flat-only identities; `None` picks the frame's default.
    pub flatness: Option<f64>,
    pub bianchi: f64,
    pub nested_fd: f64,
    pub algebraic: f64,
    pub trace: f64,
    pub sum_rules: f64,
    pub constancy: f64,
    pub bi_invariance: f64,
}

impl Default for SuiteTolerances {
    fn default() -> Self {
        Self {
            flatness: None,
            bianchi: 1e-5,
            nested_fd: 1e-5,
            algebraic: 1e-7,
            trace: 1e-9,
            sum_rules: 1e-8,
            constancy: 1e-6,
            bi_invariance: 1e-7,
        }
    }
}

impl SuiteTolerances {
    /// One tolerance for every identity; the flatness gate keeps its default.
    pub fn uniform(tol: f64) -> Self {
        Self {
            flatness: None,
            bianchi: tol,
            nested_fd: tol,
            algebraic: tol,
            trace: tol,
            sum_rules: tol,
            constancy: tol,
            bi_invariance: tol,
        }
    }
}

fn max_over(t: &TensorValue, f: impl Fn(&[usize]) -> f64) -> f64 {
    t.indices().fold(0.0, |m, ix| m.max(f(&ix).abs()))
}

/// `|(∇_s∇_r − ∇_r∇_s) g_ij + T^a_{sr} ∇_a g_ij|` maximised over indices.
pub fn ricci_formula_residual(p: &FrameProvider, x: &[f64]) -> Result<f64> {
    let cfg = FdConfig::nested();
    let grad_g = |y: &[f64]| {
        covariant_derivative(p, ConnectionKind::Spencer, |z: &[f64]| canonical_metric(p, z).map(|m| m.g), y, &cfg)
    };
    let second = covariant_derivative(p, ConnectionKind::Spencer, grad_g, x, &cfg)?;
    let first = grad_g(x)?;
    let t = integrability(p, x)?.tensor;
    let n = p.dim();
    Ok(max_over(&second, |ix| {
        let (i, j, r, s) = (ix[0], ix[1], ix[2], ix[3]);
        let torsion: f64 = (0..n).map(|a| t.get(&[a, s, r]) * first.get(&[i, j, a])).sum();
        second.get(&[i, j, r, s]) - second.get(&[i, j, s, r]) + torsion
    }))
}

struct PointResiduals {
    bianchi: f64,
    first_pair: f64,
    cyclic: f64,
    last_pair: f64,
    symmetry_triple: f64,
    pair_exchange: f64,
    raised_antisym: f64,
    trace: f64,
    ricci_symmetry: f64,
    bi_invariance: f64,
    weak_bi_invariance: f64,
    row_sums: f64,
    total: f64,
}

fn point_residuals(geo: &PointGeometry) -> PointResiduals {
    let n = geo.frame.w.nrows();
    let s = &geo.primary.upper;
    let l = &geo.primary.lower;
    let fr = &geo.frak_r;
    let t = &geo.integrability;
    let g = &geo.metric.g;

    let bianchi = max_over(s, |ix| {
        let (i, k, j, r) = (ix[0], ix[1], ix[2], ix[3]);
        let lhs = fr.get(&[i, k, j, r]) + fr.get(&[i, j, r, k]) + fr.get(&[i, r, k, j]);
        let rhs = s.get(&[i, k, j, r]) + s.get(&[i, j, r, k]) + s.get(&[i, r, k, j]);
        lhs - rhs
    });
    let first_pair = max_over(s, |ix| s.get(ix) + s.get(&[ix[0], ix[2], ix[1], ix[3]]));
    let cyclic = max_over(s, |ix| {
        let (i, k, j, r) = (ix[0], ix[1], ix[2], ix[3]);
        s.get(&[i, k, j, r]) + s.get(&[i, j, r, k]) + s.get(&[i, r, k, j])
    });
    let last_pair = max_over(l, |ix| l.get(ix) + l.get(&[ix[0], ix[1], ix[3], ix[2]]));
    let symmetry_triple = max_over(l, |ix| {
        let (i, j, k, r) = (ix[0], ix[1], ix[2], ix[3]);
        let a = l.get(&[i, j, k, r]) + l.get(&[j, i, k, r]);
        let b = l.get(&[i, j, k, r]) + l.get(&[j, k, i, r]) + l.get(&[k, i, j, r]);
        let c = l.get(&[i, j, k, r]) + l.get(&[i, j, r, k]);
        a.abs().max(b.abs()).max(c.abs())
    });
    let pair_exchange = max_over(l, |ix| l.get(ix) - l.get(&[ix[2], ix[3], ix[0], ix[1]]));
    let sf = frame_components(s, &geo.frame);
    let raised_antisym = max_over(&sf, |ix| {
        let (r, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        sf.get(&[r, i, j, k]) + sf.get(&[k, i, j, r])
    });
    let trace = s.contract(0, 3).expect("upper/lower pair").max_abs();
    let ric = &geo.ricci;
    let ricci_symmetry = max_over(ric, |ix| ric.get(ix) - ric.get(&[ix[1], ix[0]]));
    let bi_invariance = max_over(t, |ix| {
        let (r, i, j) = (ix[0], ix[1], ix[2]);
        (0..n).map(|a| t.get(&[a, r, i]) * g.get(&[a, j]) + t.get(&[a, r, j]) * g.get(&[a, i])).sum()
    });
    let weak_bi_invariance = max_over(l, |ix| {
        let (sm, mm, i, j) = (ix[0], ix[1], ix[2], ix[3]);
        let term = |i: usize, j: usize| -> f64 {
            (0..n)
                .flat_map(|b| (0..n).map(move |a| (a, b)))
                .map(|(a, b)| t.get(&[b, sm, mm]) * t.get(&[a, b, i]) * g.get(&[a, j]))
                .sum()
        };
        term(i, j) + term(j, i)
    });
    let mut row_sums = 0.0_f64;
    for k in 0..n {
        let wk = geo.frame.w.column(k);
        let ric_kk: f64 = ric.indices().map(|ix| ric.get(&ix) * wk[ix[0]] * wk[ix[1]]).sum();
        row_sums = row_sums.max((geo.sectional.row(k).sum() - ric_kk).abs());
    }
    let total = (geo.sectional.sum() - geo.scalar).abs();
    PointResiduals {
        bianchi,
        first_pair,
        cyclic,
        last_pair,
        symmetry_triple,
        pair_exchange,
        raised_antisym,
        trace,
        ricci_symmetry,
        bi_invariance,
        weak_bi_invariance,
        row_sums,
        total,
    }
}

fn judged(id: &'static str, description: &'static str, residual: f64, tol: f64) -> IdentityRecord {
    let pass = residual <= tol;
    IdentityRecord {
        id,
        description,
        status: if pass { IdentityStatus::Pass } else { IdentityStatus::Fail },
        max_residual: Some(residual),
        tolerance: Some(tol),
        pass,
        value: None,
        note: None,
    }
}

fn skipped(id: &'static str, description: &'static str, tol: f64) -> IdentityRecord {
    IdentityRecord {
        id,
        description,
        status: IdentityStatus::Skipped,
        max_residual: None,
        tolerance: Some(tol),
        pass: false,
        value: None,
        note: Some("skipped (not flat)".into()),
    }
}

/// Evaluates every identity over `samples`. Identities that hold only on a
/// local Lie group are skipped unless the frame passes the flatness gate.
pub fn identity_suite(p: &FrameProvider, samples: &[Vec<f64>], tol: &SuiteTolerances) -> Result<IdentityReport> {
    if samples.is_empty() {
        return Err(Error::Invalid("identity suite needs at least one sample".into()));
    }
    let geos: Vec<PointGeometry> = map_points(samples, |x| point_geometry(p, x)).into_iter().collect::<Result<_>>()?;
    let flat_tol = tol.flatness.unwrap_or_else(|| crate::connections::default_flat_tol(p));
    let flat_residual = geos.iter().fold(0.0_f64, |m, g| m.max(g.frak_r.max_abs()));
    let flatness = Flatness { flat: flat_residual <= flat_tol, max_residual: flat_residual, tol: flat_tol };

    let per_point: Vec<PointResiduals> = geos.iter().map(point_residuals).collect();
    let worst = |f: fn(&PointResiduals) -> f64| per_point.iter().map(f).fold(0.0_f64, f64::max);

    let mut records = vec![
        judged("bianchi", "first Bianchi identity: cyclic 𝔉 equals cyclic 𝒮", worst(|r| r.bianchi), tol.bianchi),
        judged("first-pair-antisymmetry", "𝒮^i_{kj,r} = −𝒮^i_{jk,r}", worst(|r| r.first_pair), tol.algebraic),
    ];

    let bi_inv = worst(|r| r.bi_invariance);
    records.push(IdentityRecord {
        id: "bi-invariance",
        description: "∇g = 0, i.e. T^a_{ri}g_aj = −T^a_{rj}g_ai",
        status: IdentityStatus::Property,
        max_residual: Some(bi_inv),
        tolerance: Some(tol.bi_invariance),
        pass: true,
        value: Some(bi_inv <= tol.bi_invariance),
        note: Some(format!("bi-invariant: {}", if bi_inv <= tol.bi_invariance { "yes" } else { "no" })),
    });

    type Flat = (&'static str, &'static str, fn(&PointResiduals) -> f64, f64);
    let flat_only: [Flat; 10] = [
        ("cyclic", "cyclic sum of 𝒮 vanishes", |r| r.cyclic, tol.algebraic),
        ("last-pair-antisymmetry", "𝒮_{kj,ri} = −𝒮_{kj,ir}", |r| r.last_pair, tol.algebraic),
        ("symmetry-triple", "first-pair, cyclic and last-pair symmetries of lowered 𝒮", |r| r.symmetry_triple, tol.algebraic),
        ("pair-exchange", "𝒮_{ij,kr} = 𝒮_{kr,ij}", |r| r.pair_exchange, tol.algebraic),
        ("raised-antisymmetry", "𝒮^r_{ij,k} = −𝒮^k_{ij,r} (frame components)", |r| r.raised_antisym, tol.algebraic),
        ("trace", "𝒮^a_{ij,a} = 0", |r| r.trace, tol.trace),
        ("ricci-symmetry", "Ric(𝒮) is symmetric", |r| r.ricci_symmetry, tol.trace),
        ("weak-bi-invariance", "T^b_{sm}T^a_{bi}g_aj = −T^b_{sm}T^a_{bj}g_ai", |r| r.weak_bi_invariance, tol.algebraic),
        ("row-sums", "Σ_l S_kl = Ric(𝒮)(w_k, w_k)", |r| r.row_sums, tol.sum_rules),
        ("total-sum", "Σ_{k,l} S_kl = K", |r| r.total, tol.sum_rules),
    ];

    if flatness.flat {
        for (id, desc, f, t) in flat_only {
            records.push(judged(id, desc, worst(f), t));
        }
        let nested: Vec<f64> = map_points(samples, |x| ricci_formula_residual(p, x)).into_iter().collect::<Result<_>>()?;
        let nested = nested.into_iter().fold(0.0_f64, f64::max);
        records.push(judged("ricci-formula", "(∇_s∇_r − ∇_r∇_s)g_ij = −T^a_{sr}∇_a g_ij", nested, tol.nested_fd));
        let mut spread = 0.0_f64;
        for (i, a) in geos.iter().enumerate() {
            for b in &geos[i + 1..] {
                spread = spread.max((&a.sectional - &b.sectional).amax());
                spread = spread.max((a.scalar - b.scalar).abs());
            }
        }
        records.push(judged("sectional-constancy", "S_kl and K are constant on the chart", spread, tol.constancy));
    } else {
        for (id, desc, _, t) in flat_only {
            records.push(skipped(id, desc, t));
        }
        records.push(skipped("ricci-formula", "(∇_s∇_r − ∇_r∇_s)g_ij = −T^a_{sr}∇_a g_ij", tol.nested_fd));
        records.push(skipped("sectional-constancy", "S_kl and K are constant on the chart", tol.constancy));
    }

    Ok(IdentityReport { frame: p.name().to_string(), samples: samples.len(), flatness, records })
}

// ---------------------------------------------------------------------------
// Levi-Civita

/// Christoffel symbols `Γ̂^i_{kl}` (slots `[i, k, l]`) and Riemann tensor
/// `R^i_{jkl}` (slots `[i, j, k, l]`) of the canonical metric.
#[derive(Debug, Clone, PartialEq)]
pub struct LeviCivita {
    pub christoffel: TensorValue,
    pub riemann: TensorValue,
    /// `max |∇^LC g|`, a self-check of the Christoffel symbols.
    pub compatibility_residual: f64,
}

/// `∂_k g_ij` with slots `[i, j, k]`.
fn metric_derivative(p: &FrameProvider, y: &[f64]) -> Result<TensorValue> {
    if p.has_jacobian() {
        let f = evaluate_frame(p, y)?;
        let dw = p.frame_derivative(y)?;
        let n = p.dim();
        // ∂w̃ = −w̃ (∂w) w̃
        let dwinv: Vec<DMatrix<f64>> = (0..n)
            .map(|k| {
                let dk = DMatrix::from_fn(n, n, |i, a| dw.get(&[i, a, k]));
                -(&f.w_inv * dk * &f.w_inv)
            })
            .collect();
        Ok(TensorValue::from_fn(n, sig("lll"), |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            (0..n)
                .map(|a| dwinv[k][(a, i)] * f.w_inv[(a, j)] + f.w_inv[(a, i)] * dwinv[k][(a, j)])
                .sum()
        }))
    } else {
        fd_derivative(|z: &[f64]| canonical_metric(p, z).map(|m| m.g), y, &FdConfig::nested(), Some(p.domain()))
    }
}

fn christoffel_at(p: &FrameProvider, y: &[f64]) -> Result<TensorValue> {
    let metric = canonical_metric(p, y)?;
    let dg = metric_derivative(p, y)?;
    let n = p.dim();
    Ok(TensorValue::from_fn(n, sig("ull"), |ix| {
        let (i, k, l) = (ix[0], ix[1], ix[2]);
        0.5 * (0..n)
            .map(|m| metric.ginv.get(&[i, m]) * (dg.get(&[m, l, k]) + dg.get(&[m, k, l]) - dg.get(&[k, l, m])))
            .sum::<f64>()
    }))
}

pub fn levi_civita(p: &FrameProvider, x: &[f64]) -> Result<LeviCivita> {
    let metric = canonical_metric(p, x)?;
    let christoffel = christoffel_at(p, x)?;
    // dchr[i, l, j, k] = ∂_k Γ̂^i_{lj}
    let dchr = fd_derivative(|y: &[f64]| christoffel_at(p, y), x, &FdConfig::nested(), Some(p.domain()))?;
    let n = p.dim();
    let c = &christoffel;
    let riemann = TensorValue::from_fn(n, sig("ulll"), |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        let quad: f64 = (0..n)
            .map(|a| c.get(&[i, k, a]) * c.get(&[a, l, j]) - c.get(&[i, l, a]) * c.get(&[a, k, j]))
            .sum();
        dchr.get(&[i, l, j, k]) - dchr.get(&[i, k, j, l]) + quad
    });
    let dg = metric_derivative(p, x)?;
    let g = &metric.g;
    let compatibility_residual = max_over(&dg, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        let corr: f64 = (0..n).map(|a| c.get(&[a, k, i]) * g.get(&[a, j]) + c.get(&[a, k, j]) * g.get(&[i, a])).sum();
        dg.get(&[i, j, k]) - corr
    });
    Ok(LeviCivita { christoffel, riemann, compatibility_residual })
}

/// `g(R(w_k, w_l) w_l, w_k)` for the Levi-Civita curvature, over all frame pairs.
pub fn levi_civita_sectional_matrix(p: &FrameProvider, x: &[f64]) -> Result<DMatrix<f64>> {
    let lc = levi_civita(p, x)?;
    let f = evaluate_frame(p, x)?;
    let g = metric_from_frame(&f).g;
    let r = &lc.riemann;
    let n = p.dim();
    Ok(DMatrix::from_fn(n, n, |k, l| {
        if k == l {
            return 0.0;
        }
        let (wx, wy) = (f.w.column(k), f.w.column(l));
        r.indices()
            .map(|ix| {
                let (i, j, a, b) = (ix[0], ix[1], ix[2], ix[3]);
                let lowered: f64 = (0..n).map(|m| g.get(&[m, i]) * wx[m]).sum();
                lowered * r.get(&ix) * wy[j] * wx[a] * wy[b]
            })
            .sum()
    }))
}

// ---------------------------------------------------------------------------
// Decomposition report

/// One way of matching `𝔉 − 𝒮` against `R^i_{jkl}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Convention {
    pub sign: i8,
    /// Lower slot `m` of the candidate is lower slot `permutation[m]` of `𝔉 − 𝒮`.
    pub permutation: [usize; 3],
    /// Compare fully lowered tensors instead of mixed ones.
    pub lowered: bool,
}

impl Convention {
    pub fn all() -> Vec<Convention> {
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut out = Vec::with_capacity(24);
        for lowered in [false, true] {
            for sign in [1, -1] {
                for permutation in PERMS {
                    out.push(Convention { sign, permutation, lowered });
                }
            }
        }
        out
    }

    fn apply(&self, d: &TensorValue) -> TensorValue {
        let [a, b, c] = self.permutation;
        d.permute(&[0, 1 + a, 1 + b, 1 + c]).expect("valid permutation").scaled(self.sign as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionPoint {
    pub x: Vec<f64>,
    /// Residual under the chosen convention.
    pub residual: f64,
    pub norm_levi_civita: f64,
    pub norm_frak_minus_s: f64,
    pub norm_frak_r: f64,
    pub norm_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConventionResidual {
    pub convention: Convention,
    pub worst_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub frame: String,
    pub convention: Convention,
    pub worst_residual: f64,
    pub points: Vec<DecompositionPoint>,
    pub by_convention: Vec<ConventionResidual>,
}

struct DecompositionSample {
    x: Vec<f64>,
    frak_r: TensorValue,
    s: TensorValue,
    d: TensorValue,
    riemann: TensorValue,
    metric: CanonicalMetric,
}

/// Compares `𝔉 − 𝒮` with the Levi-Civita curvature of the canonical metric
/// under every convention and keeps the one with the smallest worst residual.
/// Nothing is judged: the report only states the numbers.
pub fn decomposition_report(p: &FrameProvider, samples: &[Vec<f64>]) -> Result<DecompositionReport> {
    if samples.is_empty() {
        return Err(Error::Invalid("decomposition needs at least one sample".into()));
    }
    let data: Vec<DecompositionSample> = map_points(samples, |x| -> Result<DecompositionSample> {
        let frak_r = linear_curvature(p, x)?.tensor;
        let s = primary_curvature(p, x)?.upper;
        let d = &frak_r - &s;
        let riemann = levi_civita(p, x)?.riemann;
        let metric = canonical_metric(p, x)?;
        Ok(DecompositionSample { x: x.to_vec(), frak_r, s, d, riemann, metric })
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let residual = |conv: &Convention, smp: &DecompositionSample| -> f64 {
        let cand = conv.apply(&smp.d);
        if conv.lowered {
            let m = &smp.metric;
            let a = raise_lower(&cand, 0, &m.g, &m.ginv).expect("SPD metric");
            let b = raise_lower(&smp.riemann, 0, &m.g, &m.ginv).expect("SPD metric");
            a.max_abs_diff(&b)
        } else {
            cand.max_abs_diff(&smp.riemann)
        }
    };

    let by_convention: Vec<ConventionResidual> = Convention::all()
        .into_iter()
        .map(|convention| ConventionResidual {
            convention,
            worst_residual: data.iter().map(|s| residual(&convention, s)).fold(0.0, f64::max),
        })
        .collect();
    let best = by_convention
        .iter()
        .min_by(|a, b| a.worst_residual.total_cmp(&b.worst_residual))
        .expect("convention set is nonempty")
        .clone();

    let points = data
        .iter()
        .map(|smp| DecompositionPoint {
            x: smp.x.clone(),
            residual: residual(&best.convention, smp),
            norm_levi_civita: smp.riemann.max_abs(),
            norm_frak_minus_s: smp.d.max_abs(),
            norm_frak_r: smp.frak_r.max_abs(),
            norm_s: smp.s.max_abs(),
        })
        .collect();

    Ok(DecompositionReport {
        frame: p.name().to_string(),
        convention: best.convention,
        worst_residual: best.worst_residual,
        points,
        by_convention,
    })
}
