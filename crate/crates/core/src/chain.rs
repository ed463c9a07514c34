//! The projective-limit scaffold: a descending sequence of levels
//! `M_1 ⊇ M_2 ⊇ …` with inclusions, derivative-losing products and
//! right-invariant fields.
//!
//! All shipped instances model the levels on one shared coordinate space with
//! level-dependent norms, so the level indices on [`include`] and
//! [`right_translate`] only select norms and enforce the ordering contract
//! `μ_m^n: M_m × M_n → M_n`, `m > n`.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::InstanceKind;
use crate::vecops::{axpy, euclidean, scaled, sub};

pub type SampleRng = ChaCha8Rng;

/// A field specialized to one algebra direction.
pub type FieldMap<'a> = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync + 'a>;

/// A chain of Banach levels carrying a (partially defined) group product.
///
/// Points and tangent vectors are coordinate vectors of length
/// [`point_dim`](Chain::point_dim); algebra elements (control values) have
/// length [`algebra_dim`](Chain::algebra_dim).
pub trait Chain: Send + Sync + fmt::Debug {
    /// Registry string, e.g. `"loop:16,4"`.
    fn name(&self) -> String;
    fn kind(&self) -> InstanceKind;
    /// Highest declared level `n_max`; levels are `1..=n_max`.
    fn top_level(&self) -> usize;
    /// Derivatives lost per composition order (0 for constant chains).
    fn loss(&self) -> usize;
    fn point_dim(&self) -> usize;
    fn algebra_dim(&self) -> usize;
    fn identity(&self) -> Vec<f64>;
    /// Model-space norm `‖·‖_n` on point-coordinate vectors.
    fn norm(&self, level: usize, x: &[f64]) -> f64;
    /// Norm on `𝔪_n` in algebra coordinates.
    fn algebra_norm(&self, level: usize, v: &[f64]) -> f64;
    /// `x · y` in shared coordinates.
    fn multiply(&self, x: &[f64], y: &[f64]) -> Vec<f64>;
    /// Right-invariant field `f(x, v) = T R_x (v)` in point coordinates.
    fn field(&self, x: &[f64], v: &[f64]) -> Vec<f64>;
    /// Left inverse of `v ↦ field(e, v)`.
    fn tangent_to_algebra(&self, w: &[f64]) -> Vec<f64>;

    /// `x ↦ field(x, v)` for a fixed `v`; instances may precompute per direction.
    fn field_map<'a>(&'a self, v: &'a [f64]) -> FieldMap<'a> {
        Box::new(move |x| self.field(x, v))
    }

    fn invert(&self, _x: &[f64]) -> Result<Vec<f64>> {
        Err(Error::Unsupported {
            instance: self.name(),
            op: "invert",
        })
    }

    fn exp(&self, _v: &[f64]) -> Result<Vec<f64>> {
        Err(Error::Unsupported {
            instance: self.name(),
            op: "exp",
        })
    }

    /// Exact Lipschitz constant of the field in its first argument, if known.
    fn analytic_lipschitz(&self, _level: usize, _control_level: usize) -> Option<f64> {
        None
    }

    /// Exact `sup{‖f(y,·)‖_op : y ∈ B̄_R(center)}`, if known.
    fn analytic_field_bound(
        &self,
        _level: usize,
        _control_level: usize,
        _center: &[f64],
        _radius: f64,
    ) -> Option<f64> {
        None
    }

    /// Largest trust radius for which the global chart stays valid.
    fn chart_radius(&self, _level: usize) -> f64 {
        f64::INFINITY
    }

    fn default_tolerance(&self) -> f64 {
        1e-12
    }

    /// Random tangent direction (not normalized).
    fn sample_direction(&self, _level: usize, rng: &mut SampleRng) -> Vec<f64> {
        (0..self.point_dim())
            .map(|_| rng.sample(StandardNormal))
            .collect()
    }

    /// Random algebra element (not normalized).
    fn sample_algebra(&self, _level: usize, rng: &mut SampleRng) -> Vec<f64> {
        (0..self.algebra_dim())
            .map(|_| rng.sample(StandardNormal))
            .collect()
    }

    /// Random point at level-norm distance at most `radius` from the identity.
    fn sample_point(&self, level: usize, rng: &mut SampleRng, radius: f64) -> Vec<f64> {
        let e = self.identity();
        sample_in_ball(self, level, rng, &e, radius)
    }

    /// Instance-documented bound on the associativity defect of `(x, y, z)`.
    fn associativity_bound(
        &self,
        _level: usize,
        _x: &[f64],
        _y: &[f64],
        _z: &[f64],
    ) -> Option<f64> {
        None
    }

    /// Whether `μ_n^n` is defined (the abstract setting only requires `m > n`).
    fn equal_level_products(&self) -> bool {
        true
    }

    /// Instance parameters echoed into reports.
    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "name": self.name() })
    }
}

/// Uniform-in-radius sample `center + R·u·d` with `‖d‖_level = 1`.
pub fn sample_in_ball<C: Chain + ?Sized>(
    chain: &C,
    level: usize,
    rng: &mut SampleRng,
    center: &[f64],
    radius: f64,
) -> Vec<f64> {
    let d = chain.sample_direction(level, rng);
    let n = chain.norm(level, &d);
    let r: f64 = radius * rng.random::<f64>();
    let mut x = center.to_vec();
    if n > 0.0 {
        axpy(&mut x, r / n, &d);
    }
    x
}

fn check_level(level: usize) -> Result<()> {
    if level == 0 {
        Err(Error::Contract("levels are numbered from 1".into()))
    } else {
        Ok(())
    }
}

/// `λ_m^n`: inclusion of a level-`m` point into level `n ≤ m`.
pub fn include(chain: &dyn Chain, m: usize, n: usize, x: &[f64]) -> Result<Vec<f64>> {
    check_level(n)?;
    if m < n {
        return Err(Error::Contract(format!(
            "inclusion goes from a finer level to a coarser one, got {m} -> {n}"
        )));
    }
    if x.len() != chain.point_dim() {
        return Err(Error::Contract("point has wrong dimension".into()));
    }
    Ok(x.to_vec())
}

/// `R_g^{n,m}(x) = μ_m^n(x, g)` for `x ∈ M_m`, `g ∈ M_n`, `m > n`.
pub fn right_translate(
    chain: &dyn Chain,
    n: usize,
    m: usize,
    x: &[f64],
    g: &[f64],
) -> Result<Vec<f64>> {
    check_level(n)?;
    let ok = m > n || (m == n && chain.equal_level_products());
    if !ok {
        return Err(Error::Contract(format!(
            "product needs the left factor on a finer level: got m = {m}, n = {n}"
        )));
    }
    if x.len() != chain.point_dim() || g.len() != chain.point_dim() {
        return Err(Error::Contract("point has wrong dimension".into()));
    }
    Ok(chain.multiply(x, g))
}

/// `f_n(x, v) = T R_x^{n, n+offset}(v)`.
pub fn field_apply(chain: &dyn Chain, n: usize, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    check_level(n)?;
    if x.len() != chain.point_dim() || v.len() != chain.algebra_dim() {
        return Err(Error::Contract("shape mismatch in field_apply".into()));
    }
    Ok(chain.field(x, v))
}

/// The right-invariant field `f_n: M_n × 𝔪_{control_level} → TM_n`.
#[derive(Clone, Copy)]
pub struct RightInvariantField<'a> {
    pub chain: &'a dyn Chain,
    pub level: usize,
    pub control_level: usize,
}

impl fmt::Debug for RightInvariantField<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RightInvariantField")
            .field("chain", &self.chain.name())
            .field("level", &self.level)
            .field("control_level", &self.control_level)
            .finish()
    }
}

impl<'a> RightInvariantField<'a> {
    pub fn new(chain: &'a dyn Chain, level: usize, control_level: usize) -> Self {
        RightInvariantField {
            chain,
            level,
            control_level,
        }
    }

    pub fn apply(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        self.chain.field(x, v)
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.chain.norm(self.level, x)
    }

    pub fn control_norm(&self, v: &[f64]) -> f64 {
        self.chain.algebra_norm(self.control_level, v)
    }
}

/// Per-axiom maxima of the randomized chain checks.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub instance: String,
    pub sample_count: usize,
    pub seed: u64,
    /// `max ‖μ(e, h) − h‖_n` (axiom a3).
    pub identity_law: f64,
    /// `max ‖(xy)z − x(yz)‖_n` over level triples `ℓ > m > n` (axiom a4).
    /// This is also the defect of the right-translation composition law.
    pub associativity: f64,
    /// Largest per-sample documented truncation bound, when the instance has one.
    pub associativity_bound: Option<f64>,
    /// Whether every sample's defect stayed below its own bound.
    pub associativity_within_bound: Option<bool>,
    /// `C_n ≈ max ‖x‖_n / ‖x‖_{n+1}` for `n = 1..n_max-1` (axiom b).
    pub inclusion_constants: Vec<f64>,
    /// Linearity defect of `v ↦ f(x, v)`, relative to the input scale.
    pub field_linearity: f64,
    /// `max |tangent_to_algebra(f(e, v)) − v|`.
    pub field_identity: f64,
}

fn level_triples(top: usize) -> Vec<(usize, usize, usize)> {
    let top = top.max(3);
    let mut out = Vec::new();
    for l in 3..=top {
        for m in 2..l {
            for n in 1..m {
                out.push((l, m, n));
            }
        }
    }
    out
}

/// Randomized check of the chain axioms; violations are reported, never thrown.
pub fn validate_chain(chain: &dyn Chain, sample_count: usize, seed: u64) -> ValidationReport {
    let mut rng = SampleRng::seed_from_u64(seed);
    let top = chain.top_level().max(1);
    let e = chain.identity();
    let mut identity_law = 0.0f64;
    let mut associativity = 0.0f64;
    let mut bound: Option<f64> = None;
    let mut within: Option<bool> = None;
    let triples = level_triples(top);

    for i in 0..sample_count {
        let n = 1 + i % top;
        let m = n + rng.random_range(0..=1usize);
        let h = chain.sample_point(n, &mut rng, 0.5);
        if let Ok(eh) = right_translate(chain, n, m.max(n), &e, &h) {
            identity_law = identity_law.max(chain.norm(n, &sub(&eh, &h)));
        }

        let (l, m, n) = triples[i % triples.len()];
        let x = chain.sample_point(l, &mut rng, 0.5);
        let y = chain.sample_point(m, &mut rng, 0.5);
        let z = chain.sample_point(n, &mut rng, 0.5);
        let xy = chain.multiply(&x, &y);
        let left = chain.multiply(&xy, &z);
        let yz = chain.multiply(&y, &z);
        let right = chain.multiply(&x, &yz);
        let defect = chain.norm(n, &sub(&left, &right));
        associativity = associativity.max(defect);
        if let Some(b) = chain.associativity_bound(n, &x, &y, &z) {
            bound = Some(bound.map_or(b, |old: f64| old.max(b)));
            within = Some(within.unwrap_or(true) && defect <= b);
        }
    }

    let mut inclusion_constants = Vec::new();
    for n in 1..top.max(2) {
        let mut c = 0.0f64;
        for _ in 0..sample_count {
            let x = chain.sample_direction(n + 1, &mut rng);
            let fine = chain.norm(n + 1, &x);
            if fine > 0.0 {
                c = c.max(chain.norm(n, &x) / fine);
            }
        }
        inclusion_constants.push(c);
    }

    let mut field_linearity = 0.0f64;
    let mut field_identity = 0.0f64;
    for i in 0..sample_count {
        let n = 1 + i % top;
        let x = chain.sample_point(n, &mut rng, 0.5);
        let v = chain.sample_algebra(n + 3, &mut rng);
        let w = chain.sample_algebra(n + 3, &mut rng);
        let a: f64 = rng.random_range(-2.0..2.0);
        let b: f64 = rng.random_range(-2.0..2.0);
        let mut combo = scaled(&v, a);
        axpy(&mut combo, b, &w);
        let lhs = chain.field(&x, &combo);
        let mut rhs = scaled(&chain.field(&x, &v), a);
        axpy(&mut rhs, b, &chain.field(&x, &w));
        let scale = 1.0 + chain.norm(n, &rhs);
        field_linearity = field_linearity.max(chain.norm(n, &sub(&lhs, &rhs)) / scale);

        let back = chain.tangent_to_algebra(&chain.field(&e, &v));
        field_identity = field_identity.max(euclidean(&sub(&back, &v)) / (1.0 + euclidean(&v)));
    }

    ValidationReport {
        instance: chain.name(),
        sample_count,
        seed,
        identity_law,
        associativity,
        associativity_bound: bound,
        associativity_within_bound: within,
        inclusion_constants,
        field_linearity,
        field_identity,
    }
}
