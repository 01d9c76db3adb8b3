//! One JSON schema shared by every subcommand.
//!
//! Tensors are written as nested arrays in row-major multi-index order next
//! to a `slots` label such as `"i;k,j,r"` (upper slots before the semicolon).
//! Field order is fixed and per-point work is gathered in sample order, so a
//! given configuration always produces the same bytes.

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::algebra::CrossCheckReport;
use crate::connections::Flatness;
use crate::curvature::{point_geometry, DecompositionReport, IdentityReport, IdentityRecord, PointGeometry};
use crate::error::Result;
use crate::frame::FrameProvider;
use crate::parallel::map_points;
use crate::tensor::TensorValue;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    pub slots: String,
    pub values: Value,
}

fn nest(entries: &[f64], dims: usize, rank: usize) -> Value {
    if rank == 0 {
        return Value::from(entries[0]);
    }
    let stride = entries.len() / dims;
    Value::Array((0..dims).map(|i| nest(&entries[i * stride..(i + 1) * stride], dims, rank - 1)).collect())
}

impl Block {
    pub fn tensor(t: &TensorValue, slots: &str) -> Self {
        Self { slots: slots.to_string(), values: nest(t.entries(), t.dims(), t.rank()) }
    }

    pub fn matrix(m: &DMatrix<f64>, slots: &str) -> Self {
        let rows = m.row_iter().map(|r| Value::Array(r.iter().map(|v| Value::from(*v)).collect())).collect();
        Self { slots: slots.to_string(), values: Value::Array(rows) }
    }

    pub fn scalar(v: f64) -> Self {
        Self { slots: String::new(), values: Value::from(v) }
    }
}

pub(crate) fn structure_constant_block<S: Serializer>(c: &TensorValue, s: S) -> std::result::Result<S::Ok, S::Error> {
    Block::tensor(c, "k;i,j").serialize(s)
}

/// Per-point tensor blocks, each list in the same order as `points`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Blocks {
    pub w: Vec<Block>,
    pub w_inv: Vec<Block>,
    pub g: Vec<Block>,
    pub gamma: Vec<Block>,
    #[serde(rename = "I")]
    pub integrability: Vec<Block>,
    #[serde(rename = "frakR")]
    pub frak_r: Vec<Block>,
    #[serde(rename = "S")]
    pub primary: Vec<Block>,
    #[serde(rename = "ricS")]
    pub ricci: Vec<Block>,
    #[serde(rename = "K")]
    pub scalar: Vec<Block>,
    pub sectional: Vec<Block>,
}

impl Blocks {
    pub fn push(&mut self, geo: &PointGeometry) {
        self.w.push(Block::matrix(&geo.frame.w, "i;a"));
        self.w_inv.push(Block::matrix(&geo.frame.w_inv, "a;i"));
        self.g.push(Block::tensor(&geo.metric.g, ";i,j"));
        self.gamma.push(Block::tensor(&geo.gamma, "i;j,k"));
        self.integrability.push(Block::tensor(&geo.integrability, "i;j,k"));
        self.frak_r.push(Block::tensor(&geo.frak_r, "i;k,j,r"));
        self.primary.push(Block::tensor(&geo.primary.upper, "i;k,j,r"));
        self.ricci.push(Block::tensor(&geo.ricci, ";k,j"));
        self.scalar.push(Block::scalar(geo.scalar));
        self.sectional.push(Block::matrix(&geo.sectional, "k,l"));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub frame: String,
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Blocks>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flatness: Option<Flatness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identities: Option<Vec<IdentityRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<CrossCheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionReport>,
}

impl Report {
    pub fn new(p: &FrameProvider, points: &[Vec<f64>]) -> Self {
        Self {
            frame: p.name().to_string(),
            dim: p.dim(),
            points: points.to_vec(),
            blocks: None,
            flatness: None,
            identities: None,
            classification: None,
            decomposition: None,
        }
    }

    /// Evaluates every per-point block.
    pub fn geometry(p: &FrameProvider, points: &[Vec<f64>]) -> Result<Self> {
        let geos: Vec<PointGeometry> = map_points(points, |x| point_geometry(p, x)).into_iter().collect::<Result<_>>()?;
        let mut blocks = Blocks::default();
        for g in &geos {
            blocks.push(g);
        }
        Ok(Self { blocks: Some(blocks), ..Self::new(p, points) })
    }

    pub fn with_identities(mut self, r: IdentityReport) -> Self {
        self.flatness = Some(r.flatness);
        self.identities = Some(r.records);
        self
    }

    pub fn with_classification(mut self, r: CrossCheckReport) -> Self {
        self.classification = Some(r);
        self
    }

    pub fn with_decomposition(mut self, r: DecompositionReport) -> Self {
        self.decomposition = Some(r);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is always serializable");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::catalog_lookup;
    use crate::tensor::sig;

    #[test]
    fn nesting_is_row_major() {
        let t = TensorValue::from_fn(2, sig("ull"), |ix| (ix[0] * 4 + ix[1] * 2 + ix[2]) as f64);
        let b = Block::tensor(&t, "i;j,k");
        assert_eq!(b.values, serde_json::json!([[[0.0, 1.0], [2.0, 3.0]], [[4.0, 5.0], [6.0, 7.0]]]));
    }

    #[test]
    fn heisenberg_metric_block() {
        let p = catalog_lookup("heisenberg3").unwrap();
        let r = Report::geometry(&p, &[vec![0.5, 0.0, 0.0]]).unwrap();
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["blocks"]["g"][0]["values"], serde_json::json!([[1.0, 0.0, 0.0], [0.0, 1.25, -0.5], [0.0, -0.5, 1.0]]));
        assert_eq!(v["blocks"]["g"][0]["slots"], ";i,j");
        assert!(v.get("identities").is_none());
    }
}
