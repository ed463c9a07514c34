#![allow(dead_code)]

use ilb_evolve::chain::{Chain, SampleRng};
use ilb_evolve::ControlSignal;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> SampleRng {
    SampleRng::seed_from_u64(seed)
}

/// Random step control with at most `max_steps` steps, values drawn from the
/// chain's algebra sampler and rescaled to total mass `mass` in `norm`.
pub fn random_steps(
    chain: &dyn Chain,
    rng: &mut SampleRng,
    max_steps: usize,
    mass: f64,
    norm_level: usize,
) -> ControlSignal {
    let k = rng.random_range(1..=max_steps);
    let mut cuts: Vec<f64> = (0..k - 1).map(|_| rng.random_range(0.02..0.98)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let mut breakpoints = vec![0.0];
    breakpoints.extend(cuts);
    breakpoints.push(1.0);
    let values: Vec<Vec<f64>> = (0..breakpoints.len() - 1)
        .map(|_| chain.sample_algebra(norm_level, rng))
        .collect();
    let c = ControlSignal::step(breakpoints, values).unwrap();
    let total = c.l1_norm(&|v| chain.algebra_norm(norm_level, v));
    c.scale(mass / total)
}

/// Operator-norm distance of two row-major `d×d` matrices.
pub fn matrix_distance(chain: &dyn Chain, a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    chain.norm(1, &diff)
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
