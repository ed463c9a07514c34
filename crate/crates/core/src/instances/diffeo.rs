//! Orientation-preserving diffeomorphisms of `[0, 1]` fixing both endpoints,
//! sampled on a uniform grid.
//!
//! A point is the grid function `φ(x_i)`; the product `φ·ψ = φ∘ψ` is formed
//! by monotone cubic interpolation of `φ` at the values of `ψ`. Level `n`
//! measures finite-difference derivatives up to order `n`, scaled by `π^k`
//! so that `sin(πx)` has norm about one at every level.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::chain::{sample_in_ball, Chain, FieldMap, SampleRng};
use crate::error::{Error, Result};
use crate::instances::interp::{CubicHermite, Slopes};
use crate::instances::InstanceKind;

const SAMPLE_MODES: usize = 6;
const CHART_RADIUS: f64 = 0.3;

#[derive(Debug, Clone)]
pub struct DiffIntervalChain {
    grid: usize,
    levels: usize,
    nodes: Vec<f64>,
}

impl DiffIntervalChain {
    pub fn new(grid: usize, levels: usize) -> Result<Self> {
        if grid < 9 {
            return Err(Error::InvalidParams(
                "diffeomorphism grid needs at least 9 points".into(),
            ));
        }
        if levels == 0 {
            return Err(Error::InvalidParams(
                "diffeomorphism chain needs at least one level".into(),
            ));
        }
        let h = 1.0 / (grid - 1) as f64;
        let mut nodes: Vec<f64> = (0..grid).map(|i| i as f64 * h).collect();
        nodes[grid - 1] = 1.0;
        Ok(DiffIntervalChain {
            grid,
            levels,
            nodes,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Grid samples of `Σ_k a_k sin(kπx)`.
    pub fn sine_series(&self, coefficients: &[f64]) -> Vec<f64> {
        let pi = std::f64::consts::PI;
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                if i == 0 || i == self.grid - 1 {
                    return 0.0;
                }
                coefficients
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a * ((k + 1) as f64 * pi * x).sin())
                    .sum()
            })
            .collect()
    }

    fn difference_norm(&self, level: usize, u: &[f64]) -> f64 {
        let scale = 1.0 / (std::f64::consts::PI / (self.grid - 1) as f64);
        let mut best = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut diff = u.to_vec();
        let mut weight = 1.0;
        for _ in 0..level.min(self.grid - 1) {
            diff = diff.windows(2).map(|w| w[1] - w[0]).collect();
            weight *= scale;
            let m = diff.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            best = best.max(weight * m);
        }
        best
    }

    /// Sine series with `a_k ~ N(0, 1)/k²` up to a random cutoff mode.
    fn random_field(&self, rng: &mut SampleRng) -> Vec<f64> {
        let cutoff = rng.random_range(1..=SAMPLE_MODES);
        let a: Vec<f64> = (1..=cutoff)
            .map(|k| rng.sample::<f64, _>(StandardNormal) / (k * k) as f64)
            .collect();
        self.sine_series(&a)
    }

    fn is_increasing(x: &[f64]) -> bool {
        x.windows(2).all(|w| w[1] > w[0])
    }
}

impl Chain for DiffIntervalChain {
    fn name(&self) -> String {
        format!("diffint:{},{}", self.grid, self.levels)
    }
    fn kind(&self) -> InstanceKind {
        InstanceKind::DiffInterval {
            grid: self.grid,
            levels: self.levels,
        }
    }
    fn top_level(&self) -> usize {
        self.levels
    }
    fn loss(&self) -> usize {
        1
    }
    fn point_dim(&self) -> usize {
        self.grid
    }
    fn algebra_dim(&self) -> usize {
        self.grid
    }
    fn identity(&self) -> Vec<f64> {
        self.nodes.clone()
    }
    fn norm(&self, level: usize, x: &[f64]) -> f64 {
        self.difference_norm(level, x)
    }
    fn algebra_norm(&self, level: usize, v: &[f64]) -> f64 {
        self.difference_norm(level, v)
    }
    fn multiply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let p = CubicHermite::new(&self.nodes, x, Slopes::Monotone);
        let mut out = p.eval_many(y);
        out[0] = x[0];
        out[self.grid - 1] = x[self.grid - 1];
        out
    }
    fn field(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        CubicHermite::new(&self.nodes, v, Slopes::Parabolic).eval_many(x)
    }
    fn field_map<'a>(&'a self, v: &'a [f64]) -> FieldMap<'a> {
        let p = CubicHermite::new(&self.nodes, v, Slopes::Parabolic);
        Box::new(move |x| p.eval_many(x))
    }
    fn tangent_to_algebra(&self, w: &[f64]) -> Vec<f64> {
        w.to_vec()
    }
    /// Monotone interpolation of the reflected graph, polished by Newton
    /// steps on the forward interpolant.
    fn invert(&self, x: &[f64]) -> Result<Vec<f64>> {
        if !Self::is_increasing(x) {
            return Err(Error::Contract(
                "grid function is not strictly increasing".into(),
            ));
        }
        let reflected = CubicHermite::new(x, &self.nodes, Slopes::Monotone);
        let forward = CubicHermite::new(&self.nodes, x, Slopes::Monotone);
        let mut out: Vec<f64> = self
            .nodes
            .iter()
            .map(|&s| forward.solve_increasing(s, reflected.eval(s)))
            .collect();
        out[0] = 0.0;
        out[self.grid - 1] = 1.0;
        Ok(out)
    }
    fn chart_radius(&self, _level: usize) -> f64 {
        CHART_RADIUS
    }
    fn default_tolerance(&self) -> f64 {
        1e-10
    }
    fn sample_direction(&self, _level: usize, rng: &mut SampleRng) -> Vec<f64> {
        self.random_field(rng)
    }
    fn sample_algebra(&self, _level: usize, rng: &mut SampleRng) -> Vec<f64> {
        self.random_field(rng)
    }
    fn sample_point(&self, level: usize, rng: &mut SampleRng, radius: f64) -> Vec<f64> {
        // level ≥ 1 norms bound |φ' − 1| by π·radius, and π·0.3 < 1 keeps φ increasing
        let e = self.identity();
        sample_in_ball(self, level.max(1), rng, &e, radius.min(CHART_RADIUS))
    }
    fn equal_level_products(&self) -> bool {
        false
    }
    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "name": self.name(), "grid": self.grid, "levels": self.levels })
    }
}
