//! Loops `S¹ → GL(2)` truncated to Fourier modes `|j| ≤ M`.
//!
//! Coordinates are real Fourier coefficients in the basis
//! `1, cos θ, sin θ, …, cos Mθ, sin Mθ`, each a row-major 2×2 block:
//! index `4·b + e` for basis function `b` and matrix entry `e`.
//! Level `n` carries the Sobolev norm `(Σ (1+j²)^n ‖c_j‖²)^{1/2}` over
//! complex coefficients `c_j`; all levels share coordinates.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::chain::{sample_in_ball, Chain, FieldMap, SampleRng};
use crate::error::{Error, Result};
use crate::instances::InstanceKind;

type Block = [f64; 4];

/// Spectrum decay of random samples; keeps samples smooth at every level.
const SAMPLE_DECAY: f64 = 0.6;
const MIN_SAMPLE_DECAY: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct LoopChain {
    modes: usize,
    levels: usize,
    /// Dense grid size `4M + 1`, exact for projecting products.
    grid: usize,
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
}

fn mat_mul(a: &Block, b: &Block) -> Block {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

impl LoopChain {
    pub fn new(modes: usize, levels: usize) -> Result<Self> {
        if modes < 2 {
            return Err(Error::InvalidParams("loop chain needs M >= 2".into()));
        }
        if levels == 0 {
            return Err(Error::InvalidParams(
                "loop chain needs at least one level".into(),
            ));
        }
        let grid = 4 * modes + 1;
        let theta = |p: usize| 2.0 * std::f64::consts::PI * p as f64 / grid as f64;
        // tables cover modes up to 2M for the untruncated products used by bounds
        let cos = (0..grid)
            .map(|p| {
                (0..=2 * modes)
                    .map(|j| (j as f64 * theta(p)).cos())
                    .collect()
            })
            .collect();
        let sin = (0..grid)
            .map(|p| {
                (0..=2 * modes)
                    .map(|j| (j as f64 * theta(p)).sin())
                    .collect()
            })
            .collect();
        Ok(LoopChain {
            modes,
            levels,
            grid,
            cos,
            sin,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    fn basis_count(modes: usize) -> usize {
        2 * modes + 1
    }

    /// Values on the dense grid of a coefficient vector holding modes `0..=modes`.
    fn eval_grid(&self, x: &[f64], modes: usize) -> Vec<Block> {
        (0..self.grid)
            .map(|p| {
                let mut v = [x[0], x[1], x[2], x[3]];
                for j in 1..=modes {
                    let (c, s) = (self.cos[p][j], self.sin[p][j]);
                    let a = &x[4 * (2 * j - 1)..4 * (2 * j - 1) + 4];
                    let b = &x[4 * (2 * j)..4 * (2 * j) + 4];
                    for e in 0..4 {
                        v[e] += c * a[e] + s * b[e];
                    }
                }
                v
            })
            .collect()
    }

    /// Projection of grid values onto modes `0..=modes`.
    fn project(&self, vals: &[Block], modes: usize) -> Vec<f64> {
        let mut out = vec![0.0; 4 * Self::basis_count(modes)];
        let inv = 1.0 / self.grid as f64;
        for (p, v) in vals.iter().enumerate() {
            for e in 0..4 {
                out[e] += inv * v[e];
            }
            for j in 1..=modes {
                let (c, s) = (2.0 * inv * self.cos[p][j], 2.0 * inv * self.sin[p][j]);
                for e in 0..4 {
                    out[4 * (2 * j - 1) + e] += c * v[e];
                    out[4 * (2 * j) + e] += s * v[e];
                }
            }
        }
        out
    }

    fn pointwise(&self, a: &[Block], b: &[Block]) -> Vec<Block> {
        a.iter().zip(b).map(|(x, y)| mat_mul(x, y)).collect()
    }

    /// Product of two truncated loops keeping all modes up to `2M`.
    fn full_product(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let p = self.pointwise(
            &self.eval_grid(x, self.modes),
            &self.eval_grid(y, self.modes),
        );
        self.project(&p, 2 * self.modes)
    }

    /// Wiener-algebra norm `Σ_j ‖c_j‖_F` over complex coefficients.
    fn wiener(x: &[f64]) -> f64 {
        let blocks = x.len() / 4;
        let fro = |b: usize| x[4 * b..4 * b + 4].iter().map(|v| v * v).sum::<f64>();
        let mut total = fro(0).sqrt();
        for j in 1..=(blocks - 1) / 2 {
            // c_{±j} = (a_j ∓ i b_j)/2, each with Frobenius norm sqrt(|a|²+|b|²)/2
            total += (fro(2 * j - 1) + fro(2 * j)).sqrt();
        }
        total
    }

    /// Coefficients above mode `M` of a `2M`-mode vector, padded with zeros below.
    fn tail(&self, full: &[f64]) -> Vec<f64> {
        let mut t = full.to_vec();
        for v in t.iter_mut().take(4 * Self::basis_count(self.modes)) {
            *v = 0.0;
        }
        t
    }

    fn sobolev(&self, level: usize, x: &[f64]) -> f64 {
        let fro = |b: usize| x[4 * b..4 * b + 4].iter().map(|v| v * v).sum::<f64>();
        let mut total = fro(0);
        for j in 1..=self.modes {
            let w = (1.0 + (j * j) as f64).powi(level as i32);
            total += 0.5 * w * (fro(2 * j - 1) + fro(2 * j));
        }
        total.sqrt()
    }

    /// Gaussian coefficients with a random geometric decay and a random mode
    /// cutoff, so that both smooth and rough loops are drawn.
    fn random_coefficients(&self, rng: &mut SampleRng) -> Vec<f64> {
        let decay = rng.random_range(MIN_SAMPLE_DECAY..=SAMPLE_DECAY);
        let cutoff = rng.random_range(0..=self.modes);
        let mut x = vec![0.0; self.point_dim()];
        for (b, chunk) in x.chunks_mut(4).enumerate() {
            let j = b.div_ceil(2);
            if j > cutoff {
                break;
            }
            let s = decay.powi(j as i32);
            for v in chunk {
                *v = s * rng.sample::<f64, _>(StandardNormal);
            }
        }
        x
    }
}

impl Chain for LoopChain {
    fn name(&self) -> String {
        format!("loop:{},{}", self.modes, self.levels)
    }
    fn kind(&self) -> InstanceKind {
        InstanceKind::Loop {
            modes: self.modes,
            levels: self.levels,
        }
    }
    fn top_level(&self) -> usize {
        self.levels
    }
    fn loss(&self) -> usize {
        0
    }
    fn point_dim(&self) -> usize {
        4 * Self::basis_count(self.modes)
    }
    fn algebra_dim(&self) -> usize {
        self.point_dim()
    }
    fn identity(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.point_dim()];
        e[0] = 1.0;
        e[3] = 1.0;
        e
    }
    fn norm(&self, level: usize, x: &[f64]) -> f64 {
        self.sobolev(level, x)
    }
    fn algebra_norm(&self, level: usize, v: &[f64]) -> f64 {
        self.sobolev(level, v)
    }
    fn multiply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let p = self.pointwise(
            &self.eval_grid(x, self.modes),
            &self.eval_grid(y, self.modes),
        );
        self.project(&p, self.modes)
    }
    fn field(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        self.multiply(v, x)
    }
    fn field_map<'a>(&'a self, v: &'a [f64]) -> FieldMap<'a> {
        let vg = self.eval_grid(v, self.modes);
        Box::new(move |x| {
            let xg = self.eval_grid(x, self.modes);
            self.project(&self.pointwise(&vg, &xg), self.modes)
        })
    }
    fn tangent_to_algebra(&self, w: &[f64]) -> Vec<f64> {
        w.to_vec()
    }
    /// Pointwise inversion on the dense grid, projected back to `M` modes.
    fn invert(&self, x: &[f64]) -> Result<Vec<f64>> {
        let g = self.eval_grid(x, self.modes);
        let mut inv = Vec::with_capacity(g.len());
        for b in &g {
            let det = b[0] * b[3] - b[1] * b[2];
            if det.abs() < 1e-300 {
                return Err(Error::Contract("loop value is singular on the grid".into()));
            }
            inv.push([b[3] / det, -b[1] / det, -b[2] / det, b[0] / det]);
        }
        Ok(self.project(&inv, self.modes))
    }
    fn default_tolerance(&self) -> f64 {
        1e-10
    }
    fn sample_direction(&self, _level: usize, rng: &mut SampleRng) -> Vec<f64> {
        self.random_coefficients(rng)
    }
    fn sample_algebra(&self, _level: usize, rng: &mut SampleRng) -> Vec<f64> {
        self.random_coefficients(rng)
    }
    fn sample_point(&self, level: usize, rng: &mut SampleRng, radius: f64) -> Vec<f64> {
        let e = self.identity();
        sample_in_ball(self, level, rng, &e, radius)
    }
    /// `(xy)z − x(yz) = P_M(x·Q_M(yz)) − P_M(Q_M(xy)·z)` with `Q_M` the modes above `M`;
    /// bounded through `‖P_M w‖_{H^n} ≤ (1+M²)^{n/2} ‖w‖_A` and submultiplicativity
    /// of the Wiener norm.
    fn associativity_bound(&self, level: usize, x: &[f64], y: &[f64], z: &[f64]) -> Option<f64> {
        let q_xy = self.tail(&self.full_product(x, y));
        let q_yz = self.tail(&self.full_product(y, z));
        let weight = (1.0 + (self.modes * self.modes) as f64).powf(level as f64 / 2.0);
        Some(
            weight
                * (Self::wiener(x) * Self::wiener(&q_yz) + Self::wiener(&q_xy) * Self::wiener(z)),
        )
    }
    fn params(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name(),
            "modes": self.modes,
            "levels": self.levels,
            "grid": self.grid,
        })
    }
}
