use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::instances::InstanceKind;
use crate::vecops::euclidean;

/// `(ℝ^d, +)` with every level identical; evolution is the running integral.
#[derive(Debug, Clone)]
pub struct AbelianChain {
    dim: usize,
}

impl AbelianChain {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams(
                "abelian dimension must be positive".into(),
            ));
        }
        Ok(AbelianChain { dim })
    }
}

impl Chain for AbelianChain {
    fn name(&self) -> String {
        format!("abelian:{}", self.dim)
    }
    fn kind(&self) -> InstanceKind {
        InstanceKind::Abelian { dim: self.dim }
    }
    fn top_level(&self) -> usize {
        4
    }
    fn loss(&self) -> usize {
        0
    }
    fn point_dim(&self) -> usize {
        self.dim
    }
    fn algebra_dim(&self) -> usize {
        self.dim
    }
    fn identity(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }
    fn norm(&self, _level: usize, x: &[f64]) -> f64 {
        euclidean(x)
    }
    fn algebra_norm(&self, _level: usize, v: &[f64]) -> f64 {
        euclidean(v)
    }
    fn multiply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        x.iter().zip(y).map(|(a, b)| a + b).collect()
    }
    fn field(&self, _x: &[f64], v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
    fn tangent_to_algebra(&self, w: &[f64]) -> Vec<f64> {
        w.to_vec()
    }
    fn invert(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(x.iter().map(|a| -a).collect())
    }
    fn exp(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(v.to_vec())
    }
    fn analytic_lipschitz(&self, _level: usize, _control_level: usize) -> Option<f64> {
        Some(0.0)
    }
    fn analytic_field_bound(&self, _: usize, _: usize, _: &[f64], _: f64) -> Option<f64> {
        Some(1.0)
    }
    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "name": self.name(), "dim": self.dim })
    }
}
