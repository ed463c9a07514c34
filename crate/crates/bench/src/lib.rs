//! Workloads shared by the criterion benches.

use ilb_evolve::chain::SampleRng;
use ilb_evolve::{make_instance, Chain, ControlSignal, SolverConfig};
use rand::SeedableRng;

pub struct Workload {
    pub chain: Box<dyn Chain>,
    pub control: ControlSignal,
    pub config: SolverConfig,
}

/// A constant control in a seeded direction with the given control norm mass.
pub fn constant_workload(instance: &str, mass: f64, seed: u64) -> Workload {
    let chain = make_instance(instance).expect("registered instance");
    let config = SolverConfig::for_chain(chain.as_ref());
    let level = 2 + config.field_offset;
    let mut rng = SampleRng::seed_from_u64(seed);
    let v = chain.sample_algebra(level, &mut rng);
    let unit = ControlSignal::constant(v).expect("finite sample");
    let m = unit.l1_norm(&|x| chain.algebra_norm(level, x));
    let control = unit.scale(mass / m);
    Workload {
        chain,
        control,
        config,
    }
}

impl Workload {
    pub fn run(&self) -> usize {
        ilb_evolve::evolve(self.chain.as_ref(), 1, &self.control, &self.config)
            .expect("solve succeeds")
            .n
    }
}
