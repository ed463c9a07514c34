use rand::SeedableRng;
use serde::Serialize;

use crate::chain::{sample_in_ball, RightInvariantField, SampleRng};
use crate::error::{Error, Result};
use crate::vecops::sub;

use super::SolverConfig;

/// Safety multiplier applied to sampled suprema.
pub const SAMPLED_SAFETY: f64 = 2.0;

/// Quantitative constants certifying a Picard solve on `B̄_R(start)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalBounds {
    /// Lipschitz constant of the field in its first argument.
    pub lipschitz: f64,
    /// `sup ‖f(y, ·)‖_op` over the trust ball.
    pub field_bound: f64,
    pub radius: f64,
    /// Admissible L¹ mass per piece; may be infinite.
    pub epsilon: f64,
    pub analytic: bool,
}

impl LocalBounds {
    pub fn from_constants(
        lipschitz: f64,
        field_bound: f64,
        radius: f64,
        safety: f64,
    ) -> Result<Self> {
        Self::assemble(lipschitz, field_bound, radius, safety, false)
    }

    fn assemble(l: f64, s: f64, radius: f64, safety: f64, analytic: bool) -> Result<Self> {
        if !(l.is_finite() && s.is_finite()) {
            return Err(Error::NonFinite(format!("bounds L = {l}, S = {s}")));
        }
        let by_l = if l > 0.0 { 1.0 / l } else { f64::INFINITY };
        let by_s = if s > 0.0 { radius / s } else { f64::INFINITY };
        Ok(LocalBounds {
            lipschitz: l,
            field_bound: s,
            radius,
            epsilon: safety * by_l.min(by_s),
            analytic,
        })
    }
}

fn unit_control(field: &RightInvariantField<'_>, rng: &mut SampleRng) -> Option<Vec<f64>> {
    let z = field.chain.sample_algebra(field.control_level, rng);
    let n = field.control_norm(&z);
    (n > 0.0 && n.is_finite()).then(|| z.iter().map(|x| x / n).collect())
}

/// Sampled best constant in `‖f(y₂,z) − f(y₁,z)‖ ≤ L ‖y₂ − y₁‖ ‖z‖`, times
/// [`SAMPLED_SAFETY`]; an instance's analytic constant takes precedence.
pub fn estimate_lipschitz(
    field: &RightInvariantField<'_>,
    center: &[f64],
    radius: f64,
    budget: usize,
    seed: u64,
) -> Result<f64> {
    if budget == 0 {
        return Err(Error::Contract("sampling budget must be positive".into()));
    }
    if let Some(l) = field
        .chain
        .analytic_lipschitz(field.level, field.control_level)
    {
        return Ok(l);
    }
    Ok(SAMPLED_SAFETY * sampled_lipschitz(field, center, radius, budget, seed))
}

/// Raw sampled maximum of the Lipschitz quotient, without safety factor.
pub fn sampled_lipschitz(
    field: &RightInvariantField<'_>,
    center: &[f64],
    radius: f64,
    budget: usize,
    seed: u64,
) -> f64 {
    let chain = field.chain;
    let mut rng = SampleRng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..budget {
        let y1 = sample_in_ball(chain, field.level, &mut rng, center, radius);
        let y2 = sample_in_ball(chain, field.level, &mut rng, center, radius);
        let Some(z) = unit_control(field, &mut rng) else {
            continue;
        };
        let dy = field.norm(&sub(&y2, &y1));
        if dy == 0.0 {
            continue;
        }
        let df = field.norm(&sub(&field.apply(&y2, &z), &field.apply(&y1, &z)));
        best = best.max(df / dy);
    }
    best
}

/// Sampled `sup{‖f(y, z)‖ : y ∈ B̄_R(center), ‖z‖ = 1}` without safety factor.
pub fn sampled_field_bound(
    field: &RightInvariantField<'_>,
    center: &[f64],
    radius: f64,
    budget: usize,
    seed: u64,
) -> f64 {
    let mut rng = SampleRng::seed_from_u64(seed ^ 0x5eed_f1e1d);
    let mut best = 0.0f64;
    for i in 0..budget {
        let y = if i == 0 {
            center.to_vec()
        } else {
            sample_in_ball(field.chain, field.level, &mut rng, center, radius)
        };
        let Some(z) = unit_control(field, &mut rng) else {
            continue;
        };
        best = best.max(field.norm(&field.apply(&y, &z)));
    }
    best
}

/// `L`, `S` on `B̄_R(start)` and `ε = safety · min(1/L, R/S)`, with `R` the
/// configured trust radius capped by the instance chart.
pub fn compute_bounds(
    field: &RightInvariantField<'_>,
    start: &[f64],
    config: &SolverConfig,
) -> Result<LocalBounds> {
    let radius = config
        .trust_radius
        .min(field.chain.chart_radius(field.level));
    bounds_on_ball(field, start, radius, config)
}

pub(crate) fn bounds_on_ball(
    field: &RightInvariantField<'_>,
    start: &[f64],
    radius: f64,
    config: &SolverConfig,
) -> Result<LocalBounds> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Contract(format!(
            "trust radius must be positive, got {radius}"
        )));
    }
    if config.sample_budget == 0 {
        return Err(Error::Contract("sampling budget must be positive".into()));
    }
    let chain = field.chain;
    let analytic_l = chain.analytic_lipschitz(field.level, field.control_level);
    let analytic_s = chain.analytic_field_bound(field.level, field.control_level, start, radius);
    let l = match analytic_l {
        Some(l) => l,
        None => {
            SAMPLED_SAFETY
                * sampled_lipschitz(field, start, radius, config.sample_budget, config.seed)
        }
    };
    let s = match analytic_s {
        Some(s) => s,
        None => {
            SAMPLED_SAFETY
                * sampled_field_bound(field, start, radius, config.sample_budget, config.seed)
        }
    };
    LocalBounds::assemble(
        l,
        s,
        radius,
        config.safety,
        analytic_l.is_some() && analytic_s.is_some(),
    )
}
