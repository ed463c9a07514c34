use std::path::PathBuf;

use clap::{Args, ValueEnum};
use ilb_evolve::chain::{RightInvariantField, SampleRng};
use ilb_evolve::instances::CorruptedChain;
use ilb_evolve::solver::compute_bounds;
use ilb_evolve::{
    evolve, make_instance, validate_chain, Chain, ControlSignal, InstanceKind, SolverConfig,
};
use rand::{Rng, SeedableRng};

use crate::failure::{Failure, Outcome};
use crate::runspec::{load_config, load_instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Axioms,
    Solver,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub instance: String,
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Perturb the instance's product; the axiom checks must then fail.
    #[arg(long)]
    pub corrupt: bool,
}

struct Line {
    name: &'static str,
    value: f64,
    limit: f64,
    pass: bool,
    note: String,
}

impl Line {
    fn at_most(name: &'static str, value: f64, limit: f64) -> Line {
        Line {
            name,
            value,
            limit,
            pass: value <= limit,
            note: String::new(),
        }
    }

    fn note(mut self, note: String) -> Line {
        self.note = note;
        self
    }
}

/// Factor by which the top-level norm magnifies coordinate rounding.
fn roundoff_scale(kind: InstanceKind) -> f64 {
    match kind {
        InstanceKind::Loop { modes, levels } => {
            (1.0 + (modes * modes) as f64).powf(levels as f64 / 2.0)
        }
        InstanceKind::DiffInterval { grid, levels } => {
            ((grid - 1) as f64 / std::f64::consts::PI).powi(levels as i32)
        }
        _ => 1.0,
    }
}

fn refined(kind: InstanceKind) -> Option<String> {
    match kind {
        InstanceKind::Loop { modes, levels } => Some(format!("loop:{},{levels}", 2 * modes)),
        InstanceKind::DiffInterval { grid, levels } => {
            Some(format!("diffint:{},{levels}", 2 * grid - 1))
        }
        _ => None,
    }
}

fn axiom_checks(chain: &dyn Chain, kind: InstanceKind, samples: usize, seed: u64) -> Vec<Line> {
    let limit = 1e-10f64.max(1e-13 * roundoff_scale(kind));
    let rep = validate_chain(chain, samples, seed);
    let mut out = vec![
        Line::at_most("identity law", rep.identity_law, limit),
        Line::at_most("field linearity", rep.field_linearity, limit),
        Line::at_most("field at identity", rep.field_identity, 1e-12),
    ];
    match refined(kind) {
        None => out.push(Line::at_most("associativity", rep.associativity, limit)),
        Some(finer) => {
            if let (Some(bound), Some(within)) =
                (rep.associativity_bound, rep.associativity_within_bound)
            {
                let mut l = Line::at_most(
                    "associativity vs truncation bound",
                    rep.associativity,
                    bound,
                );
                l.pass = within;
                out.push(l);
            }
            let fine = validate_chain(
                make_instance(&finer).expect("refined instance").as_ref(),
                samples,
                seed,
            );
            out.push(
                Line::at_most(
                    "associativity under refinement",
                    fine.associativity,
                    0.5 * rep.associativity,
                )
                .note(format!("{finer} vs {:.3e}", rep.associativity)),
            );
        }
    }
    let again = validate_chain(chain, 2 * samples, seed.wrapping_add(1));
    let drift = rep
        .inclusion_constants
        .iter()
        .zip(&again.inclusion_constants)
        .map(|(a, b)| {
            if a.is_finite() && *a > 0.0 {
                (a - b).abs() / a
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max);
    out.push(
        Line::at_most("inclusion constant drift", drift, 0.1)
            .note(format!("C = {:?}", rep.inclusion_constants)),
    );
    out
}

fn sample_control(chain: &dyn Chain, control_level: usize, mass: f64, seed: u64) -> ControlSignal {
    let mut rng = SampleRng::seed_from_u64(seed);
    let cuts = [
        0.0,
        rng.random_range(0.2..0.45),
        rng.random_range(0.55..0.8),
        1.0,
    ];
    let values = (0..3)
        .map(|_| chain.sample_algebra(control_level, &mut rng))
        .collect();
    let c = ControlSignal::step(cuts.to_vec(), values).expect("valid steps");
    let total = c.l1_norm(&|v| chain.algebra_norm(control_level, v));
    c.scale(mass / total)
}

fn solver_checks(
    chain: &dyn Chain,
    kind: InstanceKind,
    config: &SolverConfig,
) -> Outcome<Vec<Line>> {
    let n = 1;
    let control_level = n + 1 + config.field_offset;
    let field = RightInvariantField::new(chain, n + 1, control_level);
    let bounds = compute_bounds(&field, &chain.identity(), config)?;
    let mass = if bounds.epsilon.is_finite() {
        2.5 * bounds.epsilon
    } else {
        1.0
    };
    let control = sample_control(chain, control_level, mass, config.seed);
    let tol = config.tol;

    let rep = evolve(chain, n, &control, config)?;
    let mut out = vec![
        Line::at_most("integral residual", rep.residual, 10.0 * tol).note(format!("N = {}", rep.n)),
        Line::at_most("translated residual", rep.translated_residual, 10.0 * tol),
        Line::at_most(
            "contraction certificate excess",
            rep.certificate_excess().max(0.0),
            0.05,
        ),
    ];
    let start_exact = rep.trajectory.points[0] == chain.identity();
    out.push(Line {
        name: "identity start",
        value: if start_exact { 0.0 } else { 1.0 },
        limit: 0.0,
        pass: start_exact,
        note: String::new(),
    });

    let mut forced = config.clone();
    forced.forced_n = Some(2 * rep.n);
    let twice = evolve(chain, n, &control, &forced)?;
    let mut gap = 0.0f64;
    for (t, p) in rep.trajectory.times.iter().zip(&rep.trajectory.points) {
        if let Some(j) = twice.trajectory.times.iter().position(|s| s == t) {
            let d: Vec<f64> = p
                .iter()
                .zip(&twice.trajectory.points[j])
                .map(|(a, b)| a - b)
                .collect();
            gap = gap.max(chain.norm(n, &d));
        }
    }
    out.push(
        Line::at_most("subdivision invariance", gap, 10.0 * tol).note(format!(
            "N = {} vs {}",
            rep.n,
            2 * rep.n
        )),
    );

    let repeat = evolve(chain, n, &control, config)?;
    let same = repeat.to_json() == rep.to_json() && repeat.trajectory == rep.trajectory;
    out.push(Line {
        name: "determinism",
        value: if same { 0.0 } else { 1.0 },
        limit: 0.0,
        pass: same,
        note: String::new(),
    });

    if matches!(
        kind,
        InstanceKind::Abelian { .. } | InstanceKind::So3 | InstanceKind::Gl { .. }
    ) {
        let back = evolve(chain, n, &control.time_reverse_negate(), config)?;
        let prod = chain.multiply(&back.endpoint, &rep.endpoint);
        let d: Vec<f64> = prod
            .iter()
            .zip(chain.identity())
            .map(|(a, b)| a - b)
            .collect();
        out.push(Line::at_most("inverse identity", chain.norm(n, &d), 1e-8));
    }
    Ok(out)
}

pub fn run(args: &CheckArgs) -> Outcome {
    let base = load_instance(&args.instance)?;
    let kind = base.kind();
    let config = load_config(base.as_ref(), args.config.as_deref(), args.seed, None)?;
    let chain: Box<dyn Chain> = if args.corrupt {
        Box::new(CorruptedChain::new(base, 1e-3))
    } else {
        base
    };

    let mut lines = Vec::new();
    if args.suite != Suite::Solver {
        lines.extend(axiom_checks(
            chain.as_ref(),
            kind,
            args.samples,
            config.seed,
        ));
    }
    if args.suite != Suite::Axioms {
        lines.extend(solver_checks(chain.as_ref(), kind, &config)?);
    }

    println!("check {}", chain.name());
    for l in &lines {
        let verdict = if l.pass { "PASS" } else { "FAIL" };
        let note = if l.note.is_empty() {
            String::new()
        } else {
            format!("  ({})", l.note)
        };
        println!(
            "{verdict}  {:<34} {:>11.3e}  limit {:.1e}{note}",
            l.name, l.value, l.limit
        );
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    if failed > 0 {
        return Err(Failure::ChecksFailed(failed));
    }
    Ok(())
}
