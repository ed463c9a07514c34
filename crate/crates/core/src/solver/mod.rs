//! Carathéodory evolution: bounds, Picard contraction per piece, L¹
//! subdivision and right-translation gluing.

mod bounds;
mod picard;
mod trajectory;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{right_translate, Chain, RightInvariantField};
use crate::controls::{choose_subdivision_count, ControlSignal};
use crate::error::{Error, Result};
use crate::vecops::{scaled, sub};

pub use bounds::{
    compute_bounds, estimate_lipschitz, sampled_field_bound, sampled_lipschitz, LocalBounds,
    SAMPLED_SAFETY,
};
pub use picard::{
    integral_residual, picard_solve, translated_residual, Cell, PicardOutcome, PieceGrid,
};
pub use trajectory::Trajectory;

const MAX_RETRIES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Sup-norm change between Picard iterates at which iteration stops.
    pub tol: f64,
    /// Uniform cells per unit piece time, before breakpoint refinement.
    pub grid_cells: usize,
    pub trust_radius: f64,
    pub safety: f64,
    pub forced_n: Option<usize>,
    pub seed: u64,
    /// Random pairs drawn per sampled estimate.
    pub sample_budget: usize,
    pub max_iterations: usize,
    /// Controls live `field_offset` levels above the solve level.
    pub field_offset: usize,
    pub threads: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-12,
            grid_cells: 256,
            trust_radius: 1.0,
            safety: 0.5,
            forced_n: None,
            seed: 0,
            sample_budget: 256,
            max_iterations: 200,
            field_offset: 3,
            threads: 1,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigPatch {
    tol: Option<f64>,
    grid_cells: Option<usize>,
    trust_radius: Option<f64>,
    safety: Option<f64>,
    forced_n: Option<usize>,
    seed: Option<u64>,
    sample_budget: Option<usize>,
    max_iterations: Option<usize>,
    field_offset: Option<usize>,
    threads: Option<usize>,
}

impl SolverConfig {
    /// Defaults with the instance's tolerance.
    pub fn for_chain(chain: &dyn Chain) -> Self {
        SolverConfig {
            tol: chain.default_tolerance(),
            ..SolverConfig::default()
        }
    }

    /// Overrides `self` with the keys of a flat `key = value` file.
    pub fn merge_toml(&self, text: &str) -> Result<Self> {
        let patch: ConfigPatch = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut c = self.clone();
        macro_rules! apply {
            ($($f:ident),*) => { $( if let Some(v) = patch.$f { c.$f = v; } )* };
        }
        apply!(
            tol,
            grid_cells,
            trust_radius,
            safety,
            seed,
            sample_budget,
            max_iterations,
            field_offset,
            threads
        );
        if patch.forced_n.is_some() {
            c.forced_n = patch.forced_n;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Contract(m.to_string()));
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol must be positive");
        }
        if self.grid_cells == 0 {
            return bad("grid_cells must be positive");
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return bad("safety must lie in (0, 1)");
        }
        if self.forced_n == Some(0) {
            return bad("forced_n must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if self.threads == 0 {
            return bad("threads must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PieceReport {
    pub index: usize,
    pub mass: f64,
    pub iterations: usize,
    pub contraction_ratios: Vec<f64>,
    pub residual: f64,
    pub translated_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionReport {
    pub instance: serde_json::Value,
    pub level: usize,
    pub solve_level: usize,
    pub control_level: usize,
    pub control_mass: f64,
    pub n: usize,
    pub bounds: Option<LocalBounds>,
    pub retries: usize,
    pub pieces: Vec<PieceReport>,
    pub total_iterations: usize,
    pub max_contraction_ratio: f64,
    pub residual: f64,
    pub translated_residual: f64,
    pub endpoint: Vec<f64>,
    pub config: SolverConfig,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

impl EvolutionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Largest `ratio − L·mass` over all pieces, or `−∞` without ratios.
    pub fn certificate_excess(&self) -> f64 {
        let l = self.bounds.map_or(0.0, |b| b.lipschitz);
        self.pieces
            .iter()
            .flat_map(|p| p.contraction_ratios.iter().map(move |r| r - l * p.mass))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_inputs(
    chain: &dyn Chain,
    level: usize,
    control: &ControlSignal,
    config: &SolverConfig,
) -> Result<()> {
    config.validate()?;
    if level == 0 || level > chain.top_level() {
        return Err(Error::Contract(format!(
            "level {level} outside 1..={}",
            chain.top_level()
        )));
    }
    if control.algebra_dim() != chain.algebra_dim() {
        return Err(Error::InvalidControl(format!(
            "control has dimension {}, instance `{}` expects {}",
            control.algebra_dim(),
            chain.name(),
            chain.algebra_dim()
        )));
    }
    Ok(())
}

fn solve_pieces(
    chain: &dyn Chain,
    field: &RightInvariantField<'_>,
    pieces: &[ControlSignal],
    bounds: &LocalBounds,
    config: &SolverConfig,
) -> Result<Vec<PicardOutcome>> {
    let e = chain.identity();
    let solve = |(k, piece): (usize, &ControlSignal)| {
        picard_solve(
            chain,
            field.level,
            field.control_level,
            piece,
            &e,
            bounds,
            config,
        )
        .map_err(|err| err.in_piece(k))
    };
    if config.threads <= 1 || pieces.len() == 1 {
        return pieces.iter().enumerate().map(solve).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Contract(format!("thread pool: {e}")))?;
    pool.install(|| pieces.par_iter().enumerate().map(solve).collect())
}

/// `Evol` at level `n`: solve every piece from `e` at level `n + 1` and glue
/// `ζ(t) = θ_k(Nt − k) · θ_{k−1}(1) ⋯ θ_0(1)` at level `n`.
pub fn evolve(
    chain: &dyn Chain,
    n: usize,
    control: &ControlSignal,
    config: &SolverConfig,
) -> Result<EvolutionReport> {
    check_inputs(chain, n, control, config)?;
    let solve_level = n + 1;
    let control_level = solve_level + config.field_offset;
    let norm = |v: &[f64]| chain.algebra_norm(control_level, v);
    let control_mass = control.l1_norm(&norm);
    let e = chain.identity();

    if control.is_zero() {
        return Ok(EvolutionReport {
            instance: chain.params(),
            level: n,
            solve_level,
            control_level,
            control_mass,
            n: 1,
            bounds: None,
            retries: 0,
            pieces: vec![PieceReport {
                index: 0,
                mass: 0.0,
                iterations: 0,
                contraction_ratios: vec![],
                residual: 0.0,
                translated_residual: 0.0,
            }],
            total_iterations: 0,
            max_contraction_ratio: 0.0,
            residual: 0.0,
            translated_residual: 0.0,
            endpoint: e.clone(),
            config: config.clone(),
            trajectory: Trajectory::constant(n, e),
        });
    }

    let field = RightInvariantField::new(chain, solve_level, control_level);
    let mut radius = config.trust_radius.min(chain.chart_radius(solve_level));
    let mut retries = 0;
    let (bounds, count, pieces, outcomes) = loop {
        let bounds = bounds::bounds_on_ball(&field, &e, radius, config)?;
        let count = match config.forced_n {
            Some(k) => k,
            None => choose_subdivision_count(control, bounds.epsilon, &norm)?,
        };
        let pieces = control.subdivide(count);
        match solve_pieces(chain, &field, &pieces, &bounds, config) {
            Ok(outcomes) => break (bounds, count, pieces, outcomes),
            Err(err)
                if matches!(err.root(), Error::TrustBallExit { .. }) && retries < MAX_RETRIES =>
            {
                retries += 1;
                radius *= 0.5;
            }
            Err(err) => return Err(err),
        }
    };

    let (trajectory, translated) = glue(chain, n, &pieces, &outcomes, config)?;
    let piece_reports: Vec<PieceReport> = outcomes
        .iter()
        .enumerate()
        .map(|(k, o)| PieceReport {
            index: k,
            mass: o.mass,
            iterations: o.iterations,
            contraction_ratios: o.ratios.clone(),
            residual: o.residual,
            translated_residual: translated[k],
        })
        .collect();
    Ok(EvolutionReport {
        instance: chain.params(),
        level: n,
        solve_level,
        control_level,
        control_mass,
        n: count,
        bounds: Some(bounds),
        retries,
        total_iterations: outcomes.iter().map(|o| o.iterations).sum(),
        max_contraction_ratio: outcomes
            .iter()
            .flat_map(|o| o.ratios.iter().copied())
            .fold(0.0, f64::max),
        residual: outcomes.iter().map(|o| o.residual).fold(0.0, f64::max),
        translated_residual: translated.iter().copied().fold(0.0, f64::max),
        endpoint: trajectory.endpoint().to_vec(),
        pieces: piece_reports,
        config: config.clone(),
        trajectory,
    })
}

/// Rescales and right-translates the piece solutions into one curve on
/// `[0, 1]`; also returns the residual of each translated piece at level `n`.
fn glue(
    chain: &dyn Chain,
    n: usize,
    pieces: &[ControlSignal],
    outcomes: &[PicardOutcome],
    config: &SolverConfig,
) -> Result<(Trajectory, Vec<f64>)> {
    let count = outcomes.len() as f64;
    let fine = n + 1;
    let mut times = Vec::new();
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut knots = Vec::new();
    let mut translated = Vec::with_capacity(outcomes.len());
    let mut prefix: Option<Vec<f64>> = None;
    for (k, outcome) in outcomes.iter().enumerate() {
        let theta = &outcome.trajectory;
        let zeta: Vec<Vec<f64>> = match &prefix {
            None => theta.points.clone(),
            Some(p) => theta
                .points
                .iter()
                .map(|x| right_translate(chain, n, fine, x, p))
                .collect::<Result<_>>()?,
        };
        let grid = PieceGrid::new(&pieces[k], config.grid_cells);
        translated.push(picard::translated_points_residual(chain, &grid, &zeta, n));

        let skip = usize::from(k > 0);
        let offset = points.len() - skip.min(points.len());
        for &c in &theta.knots[skip..] {
            knots.push(offset + c);
        }
        for (j, (t, z)) in theta.times.iter().zip(zeta).enumerate().skip(skip) {
            times.push((k as f64 + t) / count);
            if j + 1 == theta.times.len() && k + 1 < outcomes.len() {
                // θ_k(1) · P_k is the next prefix, stored once
                prefix = Some(z.clone());
            }
            points.push(z);
        }
    }
    if let Some(last) = times.last_mut() {
        *last = 1.0;
    }
    Ok((
        Trajectory {
            level: n,
            times,
            points,
            knots,
        },
        translated,
    ))
}

/// `‖include(m, n, η_m(t)) − η_n(t)‖_n` maximized over the samples of `η_n`.
#[derive(Debug, Clone, Serialize)]
pub struct LevelDeviation {
    pub fine: usize,
    pub coarse: usize,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FullEvolution {
    pub reports: Vec<EvolutionReport>,
    pub deviations: Vec<LevelDeviation>,
}

/// Independent solves at every requested level with cross-level deviations.
pub fn evol_full(
    chain: &dyn Chain,
    control: &ControlSignal,
    config: &SolverConfig,
    levels: &[usize],
) -> Result<FullEvolution> {
    let mut levels = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    if levels.is_empty() {
        return Err(Error::Contract("no levels requested".into()));
    }
    let reports = levels
        .iter()
        .map(|&n| evolve(chain, n, control, config))
        .collect::<Result<Vec<_>>>()?;
    let mut deviations = Vec::new();
    for (i, coarse) in reports.iter().enumerate() {
        for fine in &reports[i + 1..] {
            let deviation = coarse
                .trajectory
                .times
                .iter()
                .zip(&coarse.trajectory.points)
                .map(|(&t, p)| {
                    let q = crate::chain::include(
                        chain,
                        fine.level,
                        coarse.level,
                        &fine.trajectory.eval(t),
                    )?;
                    Ok(chain.norm(coarse.level, &sub(&q, p)))
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            deviations.push(LevelDeviation {
                fine: fine.level,
                coarse: coarse.level,
                deviation,
            });
        }
    }
    Ok(FullEvolution {
        reports,
        deviations,
    })
}

/// `δʳη(t) = η̇(t)·η(t)^{-1}` by central differences at samples farther than
/// `2h` from every breakpoint and from the interval ends.
pub fn right_log_derivative(
    trajectory: &Trajectory,
    chain: &dyn Chain,
    h: f64,
    breakpoints: &[f64],
) -> Result<Vec<(f64, Vec<f64>)>> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Contract("step must be positive".into()));
    }
    let (a, b) = trajectory.interval();
    let mut out = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (&t, p) in trajectory.times.iter().zip(&trajectory.points) {
        let clear = t - 2.0 * h > a
            && t + 2.0 * h < b
            && breakpoints.iter().all(|&s| (t - s).abs() > 2.0 * h);
        if !clear || t == last {
            continue;
        }
        last = t;
        let inv = chain.invert(p)?;
        let plus = chain.multiply(&trajectory.eval(t + h), &inv);
        let minus = chain.multiply(&trajectory.eval(t - h), &inv);
        let w = scaled(&sub(&plus, &minus), 0.5 / h);
        out.push((t, chain.tangent_to_algebra(&w)));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub scale: f64,
    pub distance: f64,
    pub n: usize,
}

/// `sup_t ‖Evol(s·γ)(t) − e‖_n` for each scale `s`.
pub fn continuity_probe(
    chain: &dyn Chain,
    n: usize,
    control: &ControlSignal,
    scales: &[f64],
    config: &SolverConfig,
) -> Result<Vec<ProbeRow>> {
    if scales.is_empty() || scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::Contract("scales must be positive and finite".into()));
    }
    if scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Contract("scales must be strictly decreasing".into()));
    }
    let e = chain.identity();
    scales
        .iter()
        .map(|&s| {
            let r = evolve(chain, n, &control.scale(s), config)?;
            let distance = r
                .trajectory
                .points
                .iter()
                .map(|p| chain.norm(n, &sub(p, &e)))
                .fold(0.0, f64::max);
            Ok(ProbeRow {
                scale: s,
                distance,
                n: r.n,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::make_instance;

    #[test]
    fn config_merge_and_reject_unknown_keys() {
        let base = SolverConfig::default();
        let c = base
            .merge_toml("tol = 1e-9\nforced_n = 4\nseed = 7\n")
            .unwrap();
        assert_eq!((c.tol, c.forced_n, c.seed), (1e-9, Some(4), 7));
        assert_eq!(c.grid_cells, 256);
        assert!(matches!(base.merge_toml("bogus = 1"), Err(Error::Parse(_))));
        assert!(matches!(
            base.merge_toml("tol = -1.0"),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn zero_control_short_circuits() {
        let s = make_instance("so3").unwrap();
        let r = evolve(
            s.as_ref(),
            1,
            &ControlSignal::zero(3),
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(r.n, 1);
        assert_eq!(r.total_iterations, 0);
        assert_eq!(r.endpoint, s.identity());
        assert!(r.trajectory.points.iter().all(|p| p == &s.identity()));
    }

    #[test]
    fn glue_keeps_exact_identity_start() {
        let s = make_instance("so3").unwrap();
        let c = ControlSignal::constant(vec![0.3, 0.2, -0.9]).unwrap();
        let cfg = SolverConfig {
            grid_cells: 16,
            ..SolverConfig::default()
        };
        let r = evolve(s.as_ref(), 1, &c, &cfg).unwrap();
        assert!(r.n > 1);
        assert_eq!(r.trajectory.start(), s.identity().as_slice());
        assert_eq!(r.trajectory.knots.len(), r.trajectory.cell_count() + 1);
        assert_eq!(
            *r.trajectory.knots.last().unwrap(),
            r.trajectory.times.len() - 1
        );
        assert!(r.trajectory.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn level_and_dimension_contracts() {
        let s = make_instance("so3").unwrap();
        let c = ControlSignal::constant(vec![0.1, 0.0, 0.0]).unwrap();
        let cfg = SolverConfig::default();
        assert!(matches!(
            evolve(s.as_ref(), 0, &c, &cfg),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            evolve(s.as_ref(), 5, &c, &cfg),
            Err(Error::Contract(_))
        ));
        let bad = ControlSignal::constant(vec![0.1, 0.0]).unwrap();
        assert!(matches!(
            evolve(s.as_ref(), 1, &bad, &cfg),
            Err(Error::InvalidControl(_))
        ));
    }

    #[test]
    fn forced_small_n_reports_piece() {
        let s = make_instance("so3").unwrap();
        let c = ControlSignal::constant(vec![0.0, 0.0, 2.0]).unwrap();
        let cfg = SolverConfig {
            forced_n: Some(2),
            ..SolverConfig::default()
        };
        let err = evolve(s.as_ref(), 1, &c, &cfg).unwrap_err();
        assert!(matches!(err, Error::Piece { index: 0, .. }));
        assert_eq!(err.kind(), "non_contraction");
    }

    #[test]
    fn probe_rejects_increasing_scales() {
        let s = make_instance("so3").unwrap();
        let c = ControlSignal::constant(vec![0.1, 0.0, 0.0]).unwrap();
        assert!(
            continuity_probe(s.as_ref(), 1, &c, &[0.5, 1.0], &SolverConfig::default()).is_err()
        );
    }
}
