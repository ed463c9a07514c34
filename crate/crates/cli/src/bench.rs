use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use ilb_evolve::chain::SampleRng;
use ilb_evolve::{evolve, Chain, ControlSignal};
use rand::SeedableRng;

use crate::failure::{Failure, Outcome};
use crate::runspec::{load_config, load_control, load_instance, write_file};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// A fixed direction of unit control norm, scaled by `s`.
    Constant,
    /// A seeded four-step control of unit mass, scaled by `s`.
    Steps,
    Zero,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Repeat to compare instances.
    #[arg(long, required = true)]
    pub instance: Vec<String>,
    #[arg(long, value_enum, default_value = "constant")]
    pub family: Family,
    /// Base control replacing the family; scaled like it.
    #[arg(long)]
    pub control: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    pub scales: Vec<f64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "force-N", value_name = "N")]
    pub force_n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn family_control(
    chain: &dyn Chain,
    family: Family,
    control_level: usize,
    seed: u64,
) -> ControlSignal {
    let mut rng = SampleRng::seed_from_u64(seed);
    let norm = |v: &[f64]| chain.algebra_norm(control_level, v);
    match family {
        Family::Zero => ControlSignal::zero(chain.algebra_dim()),
        Family::Constant => {
            let v = chain.sample_algebra(control_level, &mut rng);
            let c = ControlSignal::constant(v).expect("finite sample");
            let m = c.l1_norm(&norm);
            c.scale(1.0 / m)
        }
        Family::Steps => {
            let values = (0..4)
                .map(|_| chain.sample_algebra(control_level, &mut rng))
                .collect();
            let c =
                ControlSignal::step(vec![0.0, 0.2, 0.45, 0.8, 1.0], values).expect("valid steps");
            let m = c.l1_norm(&norm);
            c.scale(1.0 / m)
        }
    }
}

pub fn run(args: &BenchArgs) -> Outcome {
    if args.scales.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Failure::Usage(
            "scales must be finite and nonnegative".into(),
        ));
    }
    let mut csv = String::from("instance,scale,mass,n,iterations,wall_seconds\n");
    let mut walls: Vec<(String, f64)> = Vec::new();
    for name in &args.instance {
        let chain = load_instance(name)?;
        let config = load_config(
            chain.as_ref(),
            args.config.as_deref(),
            args.seed,
            args.force_n,
        )?;
        let control_level = 2 + config.field_offset;
        let base = match &args.control {
            Some(spec) => load_control(spec, chain.as_ref())?,
            None => family_control(chain.as_ref(), args.family, control_level, config.seed),
        };
        let mut total = 0.0;
        for &s in &args.scales {
            let c = base.scale(s);
            let start = Instant::now();
            let rep = evolve(chain.as_ref(), 1, &c, &config)?;
            let wall = start.elapsed().as_secs_f64();
            total += wall;
            csv.push_str(&format!(
                "\"{}\",{s},{},{},{},{wall:.6}\n",
                chain.name(),
                rep.control_mass,
                rep.n,
                rep.total_iterations
            ));
        }
        walls.push((chain.name(), total));
    }
    match &args.out {
        Some(p) => write_file(p, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    for pair in walls.windows(2) {
        eprintln!(
            "wall-time ratio {} / {} = {:.3}",
            pair[1].0,
            pair[0].0,
            pair[1].1 / pair[0].1.max(f64::MIN_POSITIVE)
        );
    }
    Ok(())
}
