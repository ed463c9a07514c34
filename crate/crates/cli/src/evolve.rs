use std::path::PathBuf;

use clap::Args;
use ilb_evolve::{evol_full, evolve};

use crate::failure::Outcome;
use crate::runspec::{load_config, load_control, load_instance, parse_levels, write_file};

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Registry name, e.g. `so3`, `gl:3`, `loop:16,4`, `diffint:257,3`.
    #[arg(long)]
    pub instance: String,
    /// Control JSON file, or `zero`, `constant:v1,…`, `singular:inverse_sqrt:d1,…`.
    #[arg(long)]
    pub control: String,
    /// Flat `key = value` solver config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output level, or a comma list for a cross-level run.
    #[arg(long, default_value = "1")]
    pub levels: String,
    /// Trajectory CSV of the lowest requested level; `-` for stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long = "force-N", value_name = "N")]
    pub force_n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn run(args: &EvolveArgs) -> Outcome {
    let chain = load_instance(&args.instance)?;
    let control = load_control(&args.control, chain.as_ref())?;
    let config = load_config(
        chain.as_ref(),
        args.config.as_deref(),
        args.seed,
        args.force_n,
    )?;
    let levels = parse_levels(&args.levels)?;

    let (trajectory, report_json, summary) = if levels.len() == 1 {
        let rep = evolve(chain.as_ref(), levels[0], &control, &config)?;
        let summary = format!(
            "{}: level {} N={} iterations={} residual={:.3e}",
            chain.name(),
            rep.level,
            rep.n,
            rep.total_iterations,
            rep.residual
        );
        (rep.trajectory.clone(), rep.to_json(), summary)
    } else {
        let full = evol_full(chain.as_ref(), &control, &config, &levels)?;
        let mut summary = format!("{}:", chain.name());
        for r in &full.reports {
            summary.push_str(&format!(" level {} N={};", r.level, r.n));
        }
        for d in &full.deviations {
            summary.push_str(&format!(
                " deviation {}→{} {:.3e};",
                d.fine, d.coarse, d.deviation
            ));
        }
        let json = serde_json::to_string_pretty(&full).expect("report serializes");
        (full.reports[0].trajectory.clone(), json, summary)
    };

    let mut csv = Vec::new();
    trajectory.write_csv(&mut csv).expect("writing to memory");
    match args.out.as_deref() {
        Some(p) if p.as_os_str() == "-" => print!("{}", String::from_utf8_lossy(&csv)),
        Some(p) => write_file(p, &csv)?,
        None => {}
    }
    if let Some(p) = &args.report {
        write_file(p, report_json.as_bytes())?;
    }
    eprintln!("{summary}");
    Ok(())
}
