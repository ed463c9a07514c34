//! Concrete chains: abelian, matrix groups, a Sobolev loop chain and an
//! interval-diffeomorphism chain.

mod abelian;
mod diffeo;
pub mod interp;
mod loops;
mod matrix;

use serde::Serialize;

pub use abelian::AbelianChain;
pub use diffeo::DiffIntervalChain;
pub use loops::LoopChain;
pub use matrix::MatrixChain;

use crate::chain::{Chain, SampleRng};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InstanceKind {
    Abelian {
        dim: usize,
    },
    So3,
    Gl {
        dim: usize,
    },
    Loop {
        modes: usize,
        levels: usize,
    },
    DiffInterval {
        grid: usize,
        levels: usize,
    },
    /// Test hooks and user-provided chains.
    Other,
}

fn parse_usizes(spec: &str, expected: usize) -> Result<Vec<usize>> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != expected {
        return Err(Error::InvalidParams(format!(
            "expected {expected} comma-separated integers, got `{spec}`"
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| Error::InvalidParams(format!("`{p}` is not a positive integer")))
        })
        .collect()
}

/// Builds a chain from its registry string:
/// `abelian:d`, `so3`, `gl:d`, `loop:M,levels`, `diffint:grid,levels`.
pub fn make_instance(name: &str) -> Result<Box<dyn Chain>> {
    let (head, args) = match name.split_once(':') {
        Some((h, a)) => (h.trim(), Some(a)),
        None => (name.trim(), None),
    };
    match (head, args) {
        ("abelian", Some(a)) => {
            let d = parse_usizes(a, 1)?[0];
            Ok(Box::new(AbelianChain::new(d)?))
        }
        ("so3", None) => Ok(Box::new(MatrixChain::so3())),
        ("gl", Some(a)) => {
            let d = parse_usizes(a, 1)?[0];
            Ok(Box::new(MatrixChain::gl(d)?))
        }
        ("loop", Some(a)) => {
            let v = parse_usizes(a, 2)?;
            Ok(Box::new(LoopChain::new(v[0], v[1])?))
        }
        ("diffint", Some(a)) => {
            let v = parse_usizes(a, 2)?;
            Ok(Box::new(DiffIntervalChain::new(v[0], v[1])?))
        }
        ("abelian" | "gl" | "loop" | "diffint", None) => Err(Error::InvalidParams(format!(
            "instance `{head}` needs parameters"
        ))),
        _ => Err(Error::UnknownInstance(name.to_string())),
    }
}

/// Wraps a chain and perturbs its product; a negative control for validation.
#[derive(Debug)]
pub struct CorruptedChain {
    inner: Box<dyn Chain>,
    perturbation: f64,
}

impl CorruptedChain {
    pub fn new(inner: Box<dyn Chain>, perturbation: f64) -> Self {
        CorruptedChain {
            inner,
            perturbation,
        }
    }
}

impl Chain for CorruptedChain {
    fn name(&self) -> String {
        format!("corrupted({})", self.inner.name())
    }
    fn kind(&self) -> InstanceKind {
        InstanceKind::Other
    }
    fn top_level(&self) -> usize {
        self.inner.top_level()
    }
    fn loss(&self) -> usize {
        self.inner.loss()
    }
    fn point_dim(&self) -> usize {
        self.inner.point_dim()
    }
    fn algebra_dim(&self) -> usize {
        self.inner.algebra_dim()
    }
    fn identity(&self) -> Vec<f64> {
        self.inner.identity()
    }
    fn norm(&self, level: usize, x: &[f64]) -> f64 {
        self.inner.norm(level, x)
    }
    fn algebra_norm(&self, level: usize, v: &[f64]) -> f64 {
        self.inner.algebra_norm(level, v)
    }
    fn multiply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut p = self.inner.multiply(x, y);
        let mid = p.len() / 2;
        p[mid] += self.perturbation;
        p
    }
    fn field(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        self.inner.field(x, v)
    }
    fn tangent_to_algebra(&self, w: &[f64]) -> Vec<f64> {
        self.inner.tangent_to_algebra(w)
    }
    fn invert(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.inner.invert(x)
    }
    fn default_tolerance(&self) -> f64 {
        self.inner.default_tolerance()
    }
    fn sample_direction(&self, level: usize, rng: &mut SampleRng) -> Vec<f64> {
        self.inner.sample_direction(level, rng)
    }
    fn sample_algebra(&self, level: usize, rng: &mut SampleRng) -> Vec<f64> {
        self.inner.sample_algebra(level, rng)
    }
    fn sample_point(&self, level: usize, rng: &mut SampleRng, radius: f64) -> Vec<f64> {
        self.inner.sample_point(level, rng, radius)
    }
    fn chart_radius(&self, level: usize) -> f64 {
        self.inner.chart_radius(level)
    }
    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "name": self.name(), "perturbation": self.perturbation })
    }
}
