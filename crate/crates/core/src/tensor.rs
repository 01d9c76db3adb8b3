//! Dense multi-index arrays at a point.
//!
//! Entries are stored row-major over the slot list, and slots are always
//! ordered left to right as the indices are written, e.g. `S^i_{kj,r}` lives
//! at `[i, k, j, r]`.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::domain::Domain;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Upper,
    Lower,
}

impl Variance {
    pub fn flipped(self) -> Self {
        match self {
            Variance::Upper => Variance::Lower,
            Variance::Lower => Variance::Upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorValue {
    dims: usize,
    signature: Vec<Variance>,
    entries: Vec<f64>,
}

/// Shorthand for building signatures: `sig("ull")` is upper, lower, lower.
pub fn sig(spec: &str) -> Vec<Variance> {
    spec.chars()
        .map(|c| match c {
            'u' | 'U' => Variance::Upper,
            'l' | 'L' => Variance::Lower,
            other => panic!("bad variance character {other:?}"),
        })
        .collect()
}

impl TensorValue {
    pub fn new(dims: usize, signature: Vec<Variance>, entries: Vec<f64>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::Shape("tensor dimension must be positive".into()));
        }
        let expected = dims.pow(signature.len() as u32);
        if entries.len() != expected {
            return Err(Error::Shape(format!(
                "expected {expected} entries for n={dims}, rank {}, got {}",
                signature.len(),
                entries.len()
            )));
        }
        Ok(Self { dims, signature, entries })
    }

    pub fn zeros(dims: usize, signature: Vec<Variance>) -> Self {
        let len = dims.pow(signature.len() as u32);
        Self { dims, signature, entries: vec![0.0; len] }
    }

    pub fn from_fn(dims: usize, signature: Vec<Variance>, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dims, signature);
        let mut idx = vec![0; t.rank()];
        for e in t.entries.iter_mut() {
            *e = f(&idx);
            increment(&mut idx, dims);
        }
        t
    }

    pub fn scalar(dims: usize, value: f64) -> Self {
        Self { dims, signature: Vec::new(), entries: vec![value] }
    }

    /// Kronecker delta `δ^i_j`.
    pub fn identity(dims: usize) -> Self {
        Self::from_fn(dims, sig("ul"), |ix| if ix[0] == ix[1] { 1.0 } else { 0.0 })
    }

    pub fn from_matrix(m: &DMatrix<f64>, signature: Vec<Variance>) -> Result<Self> {
        if m.nrows() != m.ncols() || signature.len() != 2 {
            return Err(Error::Shape("from_matrix needs a square matrix and a rank-2 signature".into()));
        }
        let n = m.nrows();
        Ok(Self::from_fn(n, signature, |ix| m[(ix[0], ix[1])]))
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.rank() != 2 {
            return Err(Error::Shape(format!("rank {} tensor is not a matrix", self.rank())));
        }
        let n = self.dims;
        Ok(DMatrix::from_fn(n, n, |i, j| self.get(&[i, j])))
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn rank(&self) -> usize {
        self.signature.len()
    }

    pub fn signature(&self) -> &[Variance] {
        &self.signature
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dims + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let o = self.offset(idx);
        self.entries[o] = value;
    }

    /// All multi-indices in storage order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> {
        let (n, rank) = (self.dims, self.rank());
        let mut idx = vec![0; rank];
        (0..self.entries.len()).map(move |_| {
            let out = idx.clone();
            increment(&mut idx, n);
            out
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &TensorValue) -> f64 {
        assert_eq!(self.entries.len(), other.entries.len(), "shape mismatch in max_abs_diff");
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    pub fn with_signature(mut self, signature: Vec<Variance>) -> Result<Self> {
        if signature.len() != self.rank() {
            return Err(Error::Shape("signature length must equal rank".into()));
        }
        self.signature = signature;
        Ok(self)
    }

    /// Reorders slots: slot `s` of the result is slot `perm[s]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let rank = self.rank();
        let mut seen = vec![false; rank];
        if perm.len() != rank || perm.iter().any(|&p| p >= rank || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Shape(format!("{perm:?} is not a permutation of {rank} slots")));
        }
        let signature = perm.iter().map(|&p| self.signature[p]).collect();
        let mut src = vec![0; rank];
        Ok(Self::from_fn(self.dims, signature, |ix| {
            for (s, &p) in perm.iter().enumerate() {
                src[p] = ix[s];
            }
            self.get(&src)
        }))
    }

    pub fn outer(&self, other: &TensorValue) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::Shape("outer product of tensors with different n".into()));
        }
        let mut signature = self.signature.clone();
        signature.extend_from_slice(&other.signature);
        let entries = self
            .entries
            .iter()
            .flat_map(|a| other.entries.iter().map(move |b| a * b))
            .collect();
        Ok(Self { dims: self.dims, signature, entries })
    }

    pub fn contract(&self, slot_a: usize, slot_b: usize) -> Result<Self> {
        contract(self, slot_a, slot_b)
    }

    /// Fixes the last slot at `index`, dropping it.
    pub fn slice_last(&self, index: usize) -> Self {
        let n = self.dims;
        let mut signature = self.signature.clone();
        signature.pop();
        let entries = self.entries.iter().skip(index).step_by(n).copied().collect();
        Self { dims: n, signature, entries }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.entries.iter_mut().for_each(|v| *v *= factor);
        out
    }

    fn zip_with(&self, other: &TensorValue, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(
            self.dims == other.dims && self.signature == other.signature,
            "tensor shape/signature mismatch"
        );
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| f(*a, *b)).collect();
        Self { dims: self.dims, signature: self.signature.clone(), entries }
    }
}

fn increment(idx: &mut [usize], n: usize) {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < n {
            return;
        }
        *slot = 0;
    }
}

impl Add for &TensorValue {
    type Output = TensorValue;
    fn add(self, rhs: &TensorValue) -> TensorValue {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &TensorValue {
    type Output = TensorValue;
    fn sub(self, rhs: &TensorValue) -> TensorValue {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &TensorValue {
    type Output = TensorValue;
    fn mul(self, rhs: f64) -> TensorValue {
        self.scaled(rhs)
    }
}

/// Sums over a paired upper/lower slot.
pub fn contract(t: &TensorValue, slot_a: usize, slot_b: usize) -> Result<TensorValue> {
    let rank = t.rank();
    for s in [slot_a, slot_b] {
        if s >= rank {
            return Err(Error::SlotOutOfRange { slot: s, rank });
        }
    }
    if slot_a == slot_b {
        return Err(Error::BadContraction { a: slot_a, b: slot_b, reason: "identical slots" });
    }
    if t.signature[slot_a] == t.signature[slot_b] {
        return Err(Error::BadContraction { a: slot_a, b: slot_b, reason: "both slots have the same variance" });
    }
    let signature: Vec<Variance> = t
        .signature
        .iter()
        .enumerate()
        .filter(|(s, _)| *s != slot_a && *s != slot_b)
        .map(|(_, v)| *v)
        .collect();
    let mut full = vec![0; rank];
    Ok(TensorValue::from_fn(t.dims, signature, |ix| {
        let mut rest = ix.iter();
        for (s, slot) in full.iter_mut().enumerate() {
            if s != slot_a && s != slot_b {
                *slot = *rest.next().unwrap();
            }
        }
        (0..t.dims)
            .map(|a| {
                full[slot_a] = a;
                full[slot_b] = a;
                t.get(&full)
            })
            .sum()
    }))
}

/// Validates that `g` is a symmetric positive definite lower-lower metric.
pub fn check_metric(g: &TensorValue) -> Result<()> {
    if g.rank() != 2 {
        return Err(Error::BadMetric(format!("rank {} instead of 2", g.rank())));
    }
    let m = g.to_matrix()?;
    let scale = m.amax().max(1.0);
    if (&m - m.transpose()).amax() > 1e-10 * scale {
        return Err(Error::BadMetric("not symmetric".into()));
    }
    if m.cholesky().is_none() {
        return Err(Error::BadMetric("not positive definite".into()));
    }
    Ok(())
}

/// Flips the variance of `slot`: a lower slot is raised with `ginv`,
/// an upper slot is lowered with `g`.
pub fn raise_lower(t: &TensorValue, slot: usize, g: &TensorValue, ginv: &TensorValue) -> Result<TensorValue> {
    if slot >= t.rank() {
        return Err(Error::SlotOutOfRange { slot, rank: t.rank() });
    }
    if g.dims() != t.dims() || ginv.dims() != t.dims() {
        return Err(Error::Shape("metric dimension differs from tensor dimension".into()));
    }
    check_metric(g)?;
    check_metric(ginv)?;
    let metric = match t.signature[slot] {
        Variance::Upper => g,
        Variance::Lower => ginv,
    };
    let mut signature = t.signature.clone();
    signature[slot] = signature[slot].flipped();
    let mut src = vec![0; t.rank()];
    Ok(TensorValue::from_fn(t.dims, signature, |ix| {
        src.copy_from_slice(ix);
        (0..t.dims)
            .map(|a| {
                src[slot] = a;
                metric.entries[a * t.dims + ix[slot]] * t.get(&src)
            })
            .sum()
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FdScheme {
    Central2,
    Central4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdConfig {
    /// Absolute step; `None` means `1e-5 * max(1, |x|_inf)`.
    pub step: Option<f64>,
    pub scheme: FdScheme,
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { step: None, scheme: FdScheme::Central2, richardson: false }
    }
}

impl FdConfig {
    /// Settings for pipelines that difference an already differenced field.
    pub fn nested() -> Self {
        Self { step: Some(1e-3), scheme: FdScheme::Central4, richardson: false }
    }

    pub fn step_at(&self, x: &[f64]) -> f64 {
        self.step.unwrap_or_else(|| {
            let norm = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            1e-5 * norm.max(1.0)
        })
    }

    /// Largest displacement along any axis the stencil uses.
    pub fn reach(&self, x: &[f64]) -> f64 {
        let h = self.step_at(x);
        match self.scheme {
            FdScheme::Central2 => h,
            FdScheme::Central4 => 2.0 * h,
        }
    }
}

/// Partial derivatives of a point-evaluated field; the derivative index is
/// appended as a new last lower slot.
pub fn fd_derivative<F>(field: F, x: &[f64], cfg: &FdConfig, domain: Option<&Domain>) -> Result<TensorValue>
where
    F: Fn(&[f64]) -> Result<TensorValue>,
{
    let h = cfg.step_at(x);
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Invalid(format!("finite-difference step must be positive, got {h}")));
    }
    let first = directional(&field, x, h, cfg.scheme, domain)?;
    let derivs = if cfg.richardson {
        let second = directional(&field, x, 0.5 * h, cfg.scheme, domain)?;
        let k = match cfg.scheme {
            FdScheme::Central2 => 4.0,
            FdScheme::Central4 => 16.0,
        };
        first
            .iter()
            .zip(&second)
            .map(|(coarse, fine)| &(fine * k) - coarse)
            .map(|t| t.scaled(1.0 / (k - 1.0)))
            .collect()
    } else {
        first
    };

    let n = x.len();
    let base = &derivs[0];
    if base.dims() != n {
        return Err(Error::Shape(format!("field has n={} but point has {} coordinates", base.dims(), n)));
    }
    let mut signature = base.signature().to_vec();
    signature.push(Variance::Lower);
    let mut entries = Vec::with_capacity(base.entries().len() * n);
    for e in 0..base.entries().len() {
        entries.extend(derivs.iter().map(|d| d.entries()[e]));
    }
    TensorValue::new(n, signature, entries)
}

fn directional<F>(field: &F, x: &[f64], h: f64, scheme: FdScheme, domain: Option<&Domain>) -> Result<Vec<TensorValue>>
where
    F: Fn(&[f64]) -> Result<TensorValue>,
{
    let offsets: &[(f64, f64)] = match scheme {
        FdScheme::Central2 => &[(1.0, 0.5), (-1.0, -0.5)],
        FdScheme::Central4 => &[(2.0, -1.0 / 12.0), (1.0, 8.0 / 12.0), (-1.0, -8.0 / 12.0), (-2.0, 1.0 / 12.0)],
    };
    let mut out = Vec::with_capacity(x.len());
    let mut y = x.to_vec();
    for j in 0..x.len() {
        let mut acc: Option<TensorValue> = None;
        for &(shift, weight) in offsets {
            y[j] = x[j] + shift * h;
            if let Some(d) = domain {
                if !d.contains(&y) {
                    return Err(Error::StencilOutOfDomain { point: y.clone() });
                }
            }
            let v = field(&y)?;
            if !v.is_finite() {
                return Err(Error::NonFinite { point: y.clone() });
            }
            let term = v.scaled(weight / h);
            acc = Some(match acc {
                Some(a) => &a + &term,
                None => term,
            });
        }
        y[j] = x[j];
        out.push(acc.expect("stencil is nonempty"));
    }
    Ok(out)
}
