use std::fs;
use std::path::Path;

use ilb_evolve::{make_instance, Chain, ControlSignal, Generator, SolverConfig};

use crate::failure::{Failure, Outcome};

pub const THREADS_ENV: &str = "ILB_EVOLVE_THREADS";

pub fn load_instance(name: &str) -> Outcome<Box<dyn Chain>> {
    Ok(make_instance(name)?)
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_numbers(list: &str) -> Outcome<Vec<f64>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Parse(format!("`{s}` is not a number")))
        })
        .collect()
}

/// A control file path, or an inline spec: `zero`, `constant:v1,v2,…`,
/// `singular:<generator>:d1,d2,…`.
pub fn load_control(spec: &str, chain: &dyn Chain) -> Outcome<ControlSignal> {
    let control = if spec == "zero" {
        ControlSignal::zero(chain.algebra_dim())
    } else if let Some(values) = spec.strip_prefix("constant:") {
        ControlSignal::constant(parse_numbers(values)?)?
    } else if let Some(rest) = spec.strip_prefix("singular:") {
        let (generator, direction) = rest.split_once(':').ok_or_else(|| {
            Failure::Usage(format!(
                "expected singular:<generator>:<direction>, got `{spec}`"
            ))
        })?;
        ControlSignal::singular(Generator::from_name(generator)?, parse_numbers(direction)?)?
    } else {
        ControlSignal::from_json(&read(Path::new(spec))?)?
    };
    if control.algebra_dim() != chain.algebra_dim() {
        return Err(Failure::Usage(format!(
            "control has dimension {} but {} expects {}",
            control.algebra_dim(),
            chain.name(),
            chain.algebra_dim()
        )));
    }
    Ok(control)
}

/// Instance defaults, then the config file, then flags, then the thread cap.
pub fn load_config(
    chain: &dyn Chain,
    path: Option<&Path>,
    seed: Option<u64>,
    force_n: Option<usize>,
) -> Outcome<SolverConfig> {
    let mut config = SolverConfig::for_chain(chain);
    if let Some(p) = path {
        config = config.merge_toml(&read(p)?)?;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    if force_n.is_some() {
        config.forced_n = force_n;
    }
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let cap: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            Failure::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))
        })?;
        config.threads = cap;
    }
    config.validate()?;
    Ok(config)
}

pub fn parse_levels(spec: &str) -> Outcome<Vec<usize>> {
    let levels: Vec<usize> = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Failure::Usage(format!("`{s}` is not a level")))
        })
        .collect::<Outcome<_>>()?;
    if levels.is_empty() || levels.contains(&0) {
        return Err(Failure::Usage("levels must be positive".into()));
    }
    Ok(levels)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}
