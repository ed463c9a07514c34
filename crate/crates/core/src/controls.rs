//! L¹ control signals `γ: [0, 1] → 𝔤` in algebra coordinates.
//!
//! Two representations are supported: right-continuous step functions and
//! a small registry of integrable singular generators of the form
//! `t ↦ scale · g(offset + slope·t) · direction`. Both stay closed under the
//! subdivision calculus used by the evolution solver: piece `k` of `N` is
//! `t ↦ (1/N) · γ((k + t)/N)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Tolerance below which a subdivided segment is dropped as a sliver.
const SLIVER: f64 = 4.0 * f64::EPSILON;

/// Integrable scalar generators for singular controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// `u ↦ u^{-1/2}`, integrable at `u = 0` with `∫₀¹ = 2`.
    InverseSqrt,
}

impl Generator {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "inverse_sqrt" => Ok(Generator::InverseSqrt),
            other => Err(Error::InvalidControl(format!(
                "unknown singular generator `{other}`"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Generator::InverseSqrt => "inverse_sqrt",
        }
    }

    pub fn value(self, u: f64) -> f64 {
        match self {
            Generator::InverseSqrt => 1.0 / u.sqrt(),
        }
    }

    /// Antiderivative vanishing at 0.
    pub fn primitive(self, u: f64) -> f64 {
        match self {
            Generator::InverseSqrt => 2.0 * u.max(0.0).sqrt(),
        }
    }

    pub fn inverse_primitive(self, p: f64) -> f64 {
        match self {
            Generator::InverseSqrt => 0.25 * p.max(0.0) * p.max(0.0),
        }
    }
}

/// Quadrature grading used by [`ControlSignal::l1_norm`] for singular controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Grading {
    /// Cell boundaries `ratio^(cells - i)` clustered at the singular end.
    Geometric { ratio: f64, cells: usize },
    /// Cell boundaries `(i / cells)^exponent`.
    Power { exponent: f64, cells: usize },
}

impl Default for Grading {
    fn default() -> Self {
        Grading::Geometric {
            ratio: 0.5,
            cells: 64,
        }
    }
}

impl Grading {
    /// Cell boundaries on `[0, 1]` clustered toward 0.
    fn boundaries(self) -> Vec<f64> {
        match self {
            Grading::Geometric { ratio, cells } => {
                let mut b = Vec::with_capacity(cells + 1);
                b.push(0.0);
                for i in 1..=cells {
                    b.push(ratio.powi((cells - i) as i32));
                }
                b
            }
            Grading::Power { exponent, cells } => (0..=cells)
                .map(|i| (i as f64 / cells as f64).powf(exponent))
                .collect(),
        }
    }

    fn validate(self) -> Result<()> {
        let ok = match self {
            Grading::Geometric { ratio, cells } => ratio > 0.0 && ratio < 1.0 && cells >= 1,
            Grading::Power { exponent, cells } => exponent >= 1.0 && cells >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidControl(format!("invalid grading {self:?}")))
        }
    }
}

/// Piecewise-constant control; `values[k]` holds on `[breakpoints[k], breakpoints[k+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepControl {
    breakpoints: Vec<f64>,
    values: Vec<Vec<f64>>,
}

/// `t ↦ scale · g(offset + slope·t) · direction` with `scale ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularControl {
    pub generator: Generator,
    pub direction: Vec<f64>,
    pub scale: f64,
    pub offset: f64,
    pub slope: f64,
    pub grading: Grading,
}

impl SingularControl {
    fn argument(&self, t: f64) -> f64 {
        self.offset + self.slope * t
    }

    fn clock(&self) -> Clock {
        Clock::Singular {
            generator: self.generator,
            scale: self.scale,
            offset: self.offset,
            slope: self.slope,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlSignal {
    Step(StepControl),
    Singular(SingularControl),
}

/// Scalar weight `w ≥ 0` of a segment; the control equals `w(t) · direction`.
///
/// The clock `Ω(t) = ∫ w` is what the solver grids on: in clock time every
/// segment carries a constant direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Clock {
    Linear,
    Singular {
        generator: Generator,
        scale: f64,
        offset: f64,
        slope: f64,
    },
}

impl Clock {
    pub fn weight(&self, t: f64) -> f64 {
        match *self {
            Clock::Linear => 1.0,
            Clock::Singular {
                generator,
                scale,
                offset,
                slope,
            } => scale * generator.value(offset + slope * t),
        }
    }

    /// `∫_a^b w(t) dt`.
    pub fn elapsed(&self, a: f64, b: f64) -> f64 {
        match *self {
            Clock::Linear => b - a,
            Clock::Singular {
                generator,
                scale,
                offset,
                slope,
            } => {
                if scale == 0.0 {
                    return 0.0;
                }
                scale / slope
                    * (generator.primitive(offset + slope * b)
                        - generator.primitive(offset + slope * a))
            }
        }
    }

    /// The time `t ≥ a` with `elapsed(a, t) = omega`.
    pub fn time_at(&self, a: f64, omega: f64) -> f64 {
        match *self {
            Clock::Linear => a + omega,
            Clock::Singular {
                generator,
                scale,
                offset,
                slope,
            } => {
                let p = generator.primitive(offset + slope * a) + slope * omega / scale;
                (generator.inverse_primitive(p) - offset) / slope
            }
        }
    }
}

/// A maximal interval on which the control is `clock weight × direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub direction: Vec<f64>,
    pub clock: Clock,
}

impl ControlSignal {
    pub fn step(breakpoints: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidControl(
                "need at least two breakpoints".into(),
            ));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidControl(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if breakpoints
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::InvalidControl(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidControl(format!(
                "{} values for {} breakpoints",
                values.len(),
                breakpoints.len()
            )));
        }
        let dim = values[0].len();
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidControl(
                "values must share a positive algebra dimension".into(),
            ));
        }
        if values.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidControl("non-finite control value".into()));
        }
        Ok(ControlSignal::Step(StepControl {
            breakpoints,
            values,
        }))
    }

    pub fn constant(value: Vec<f64>) -> Result<Self> {
        Self::step(vec![0.0, 1.0], vec![value])
    }

    pub fn zero(algebra_dim: usize) -> Self {
        Self::constant(vec![0.0; algebra_dim.max(1)]).expect("zero control is valid")
    }

    /// `t ↦ g(t) · direction` on `[0, 1]`.
    pub fn singular(generator: Generator, direction: Vec<f64>) -> Result<Self> {
        Self::singular_affine(generator, direction, 1.0, 0.0, 1.0, Grading::default())
    }

    pub fn singular_affine(
        generator: Generator,
        direction: Vec<f64>,
        scale: f64,
        offset: f64,
        slope: f64,
        grading: Grading,
    ) -> Result<Self> {
        if direction.is_empty() || direction.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidControl("invalid singular direction".into()));
        }
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::InvalidControl(
                "scale must be finite and nonnegative".into(),
            ));
        }
        if !(slope != 0.0 && slope.is_finite() && offset.is_finite()) {
            return Err(Error::InvalidControl(
                "slope must be finite and nonzero".into(),
            ));
        }
        // the generator argument must stay in its integrable domain on [0, 1]
        if offset < 0.0 || offset + slope < 0.0 {
            return Err(Error::InvalidControl(
                "generator argument negative on [0, 1]".into(),
            ));
        }
        grading.validate()?;
        Ok(ControlSignal::Singular(SingularControl {
            generator,
            direction,
            scale,
            offset,
            slope,
            grading,
        }))
    }

    pub fn algebra_dim(&self) -> usize {
        match self {
            ControlSignal::Step(s) => s.values[0].len(),
            ControlSignal::Singular(s) => s.direction.len(),
        }
    }

    /// Interior discontinuities (step jumps, or a singular endpoint).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            ControlSignal::Step(s) => s.breakpoints.clone(),
            ControlSignal::Singular(s) => {
                let t = -s.offset / s.slope;
                if (0.0..=1.0).contains(&t) {
                    vec![t]
                } else {
                    vec![]
                }
            }
        }
    }

    pub fn as_step(&self) -> Option<&StepControl> {
        match self {
            ControlSignal::Step(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ControlSignal::Step(s) => s.values.iter().flatten().all(|x| *x == 0.0),
            ControlSignal::Singular(s) => s.scale == 0.0 || s.direction.iter().all(|x| *x == 0.0),
        }
    }

    /// Right-continuous evaluation; `t = 1` returns the last step value.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        match self {
            ControlSignal::Step(s) => s.values[s.index_at(t)].clone(),
            ControlSignal::Singular(s) => {
                let w = s.scale * s.generator.value(s.argument(t));
                s.direction.iter().map(|d| w * d).collect()
            }
        }
    }

    pub fn segments(&self) -> Vec<Segment> {
        match self {
            ControlSignal::Step(s) => s
                .breakpoints
                .windows(2)
                .zip(&s.values)
                .map(|(w, v)| Segment {
                    start: w[0],
                    end: w[1],
                    direction: v.clone(),
                    clock: Clock::Linear,
                })
                .collect(),
            ControlSignal::Singular(s) => vec![Segment {
                start: 0.0,
                end: 1.0,
                direction: s.direction.clone(),
                clock: s.clock(),
            }],
        }
    }

    /// `∫₀¹ ‖γ(t)‖ dt`: exact for steps, graded Gauss quadrature for singular controls.
    pub fn l1_norm(&self, norm: &dyn Fn(&[f64]) -> f64) -> f64 {
        match self {
            ControlSignal::Step(s) => s
                .breakpoints
                .windows(2)
                .zip(&s.values)
                .map(|(w, v)| (w[1] - w[0]) * norm(v))
                .sum(),
            ControlSignal::Singular(s) => {
                let dn = norm(&s.direction);
                if dn == 0.0 || s.scale == 0.0 {
                    return 0.0;
                }
                dn * graded_weight_integral(s)
            }
        }
    }

    /// `∫_a^b ‖γ(t)‖ dt` in closed form (singular controls use the generator primitive).
    pub fn mass_on(&self, a: f64, b: f64, norm: &dyn Fn(&[f64]) -> f64) -> f64 {
        match self {
            ControlSignal::Step(s) => {
                let mut total = 0.0;
                for (w, v) in s.breakpoints.windows(2).zip(&s.values) {
                    let lo = w[0].max(a);
                    let hi = w[1].min(b);
                    if hi > lo {
                        total += (hi - lo) * norm(v);
                    }
                }
                total
            }
            ControlSignal::Singular(s) => norm(&s.direction) * s.clock().elapsed(a, b),
        }
    }

    /// Piece `k` of `n`: `t ↦ (1/n) · γ((k + t)/n)` on `[0, 1]`.
    pub fn piece(&self, n: usize, k: usize) -> ControlSignal {
        assert!(n >= 1 && k < n, "piece index out of range");
        if n == 1 {
            return self.clone();
        }
        let nf = n as f64;
        let lo = k as f64 / nf;
        let hi = (k + 1) as f64 / nf;
        match self {
            ControlSignal::Step(s) => {
                let mut breakpoints = vec![0.0];
                for &b in &s.breakpoints {
                    if b <= lo || b >= hi {
                        continue;
                    }
                    let local = b * nf - k as f64;
                    if local > *breakpoints.last().unwrap() + SLIVER && local < 1.0 - SLIVER {
                        breakpoints.push(local);
                    }
                }
                breakpoints.push(1.0);
                let values = breakpoints
                    .windows(2)
                    .map(|w| {
                        let mid = (k as f64 + 0.5 * (w[0] + w[1])) / nf;
                        s.values[s.index_at(mid)].iter().map(|x| x / nf).collect()
                    })
                    .collect();
                ControlSignal::Step(StepControl {
                    breakpoints,
                    values,
                })
            }
            ControlSignal::Singular(s) => {
                // snap round-off so a singular end stays exactly at argument 0
                let snap = |u: f64| {
                    if u.abs() <= 1e-14 * (s.offset.abs() + s.slope.abs()) {
                        0.0
                    } else {
                        u
                    }
                };
                let a = snap(s.offset + s.slope * lo);
                let b = snap(s.offset + s.slope * hi);
                ControlSignal::Singular(SingularControl {
                    scale: s.scale / nf,
                    offset: a,
                    slope: b - a,
                    ..s.clone()
                })
            }
        }
    }

    pub fn subdivide(&self, n: usize) -> Vec<ControlSignal> {
        assert!(n >= 1, "subdivision count must be positive");
        (0..n).map(|k| self.piece(n, k)).collect()
    }

    /// `t ↦ s · γ(t)`.
    pub fn scale(&self, factor: f64) -> ControlSignal {
        match self {
            ControlSignal::Step(s) => ControlSignal::Step(StepControl {
                breakpoints: s.breakpoints.clone(),
                values: s
                    .values
                    .iter()
                    .map(|v| v.iter().map(|x| factor * x).collect())
                    .collect(),
            }),
            ControlSignal::Singular(s) => {
                let sign = if factor < 0.0 { -1.0 } else { 1.0 };
                ControlSignal::Singular(SingularControl {
                    scale: s.scale * factor.abs(),
                    direction: s.direction.iter().map(|x| sign * x).collect(),
                    ..s.clone()
                })
            }
        }
    }

    /// `t ↦ −γ(1 − t)`.
    pub fn time_reverse_negate(&self) -> ControlSignal {
        match self {
            ControlSignal::Step(s) => {
                let breakpoints = s.breakpoints.iter().rev().map(|t| 1.0 - t).collect();
                let values = s
                    .values
                    .iter()
                    .rev()
                    .map(|v| v.iter().map(|x| -x).collect())
                    .collect();
                ControlSignal::Step(StepControl {
                    breakpoints,
                    values,
                })
            }
            ControlSignal::Singular(s) => ControlSignal::Singular(SingularControl {
                direction: s.direction.iter().map(|x| -x).collect(),
                offset: s.offset + s.slope,
                slope: -s.slope,
                ..s.clone()
            }),
        }
    }

    /// Maps every algebra value through `f` (e.g. an algebra inclusion).
    pub fn map_values(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> ControlSignal {
        match self {
            ControlSignal::Step(s) => ControlSignal::Step(StepControl {
                breakpoints: s.breakpoints.clone(),
                values: s.values.iter().map(|v| f(v)).collect(),
            }),
            ControlSignal::Singular(s) => ControlSignal::Singular(SingularControl {
                direction: f(&s.direction),
                ..s.clone()
            }),
        }
    }

    /// Largest piece mass over the `n` pieces of [`subdivide`](Self::subdivide).
    pub fn max_piece_mass(&self, n: usize, norm: &dyn Fn(&[f64]) -> f64) -> f64 {
        let nf = n as f64;
        match self {
            ControlSignal::Step(s) => {
                let norms: Vec<f64> = s.values.iter().map(|v| norm(v)).collect();
                let mut best = 0.0f64;
                let mut seg = 0;
                for k in 0..n {
                    let lo = k as f64 / nf;
                    let hi = (k + 1) as f64 / nf;
                    while seg + 1 < norms.len() && s.breakpoints[seg + 1] <= lo {
                        seg += 1;
                    }
                    let mut mass = 0.0;
                    let mut j = seg;
                    while j < norms.len() && s.breakpoints[j] < hi {
                        let a = s.breakpoints[j].max(lo);
                        let b = s.breakpoints[j + 1].min(hi);
                        if b > a {
                            mass += (b - a) * norms[j];
                        }
                        j += 1;
                    }
                    best = best.max(mass);
                }
                best
            }
            ControlSignal::Singular(_) => (0..n)
                .map(|k| self.mass_on(k as f64 / nf, (k + 1) as f64 / nf, norm))
                .fold(0.0, f64::max),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ControlFile::from(self)).expect("control serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ControlFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.try_into()
    }
}

impl StepControl {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    fn index_at(&self, t: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= t);
        k.saturating_sub(1).min(self.values.len() - 1)
    }
}

fn graded_weight_integral(s: &SingularControl) -> f64 {
    // cluster toward the end where the generator argument is smallest
    let toward_right = s.slope < 0.0;
    let (nodes, weights) = gauss_legendre(8);
    let b = s.grading.boundaries();
    let mut total = 0.0;
    for w in b.windows(2) {
        let h = w[1] - w[0];
        if h <= 0.0 {
            continue;
        }
        for (x, wt) in nodes.iter().zip(&weights) {
            // r is the distance from the clustered end, kept exact near 0
            let r = w[0] + h * x;
            let u = if toward_right {
                (s.offset + s.slope).max(0.0) - s.slope * r
            } else {
                s.offset.max(0.0) + s.slope * r
            };
            total += h * wt * s.generator.value(u);
        }
    }
    s.scale * total
}

/// Smallest `N` with every piece of `subdivide(c, N)` of mass at most `epsilon`.
///
/// Doubling from the lower bound `⌊mass / ε⌋` brackets an admissible `N`,
/// bisection narrows it, and a final scan confirms minimality because the
/// largest piece mass need not decrease monotonically in `N`.
pub fn choose_subdivision_count(
    c: &ControlSignal,
    epsilon: f64,
    norm: &dyn Fn(&[f64]) -> f64,
) -> Result<usize> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Contract(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let admissible = |n: usize| c.max_piece_mass(n, norm) <= epsilon;
    let total = c.mass_on(0.0, 1.0, norm);
    if total <= epsilon || epsilon.is_infinite() {
        return Ok(1);
    }
    let lower = ((total / epsilon).floor() as usize).max(1);
    if admissible(lower) {
        return Ok(lower);
    }
    let mut lo = lower;
    let mut hi = lower.saturating_mul(2);
    while !admissible(hi) {
        lo = hi;
        hi = hi.checked_mul(2).ok_or_else(|| {
            Error::Contract("subdivision count overflow; control not integrable?".into())
        })?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if admissible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lower..hi).find(|&n| admissible(n)).unwrap_or(hi))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ControlFile {
    Step {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        algebra_dim: Option<usize>,
        breakpoints: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    Singular {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        algebra_dim: Option<usize>,
        generator: String,
        direction: Vec<f64>,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
        #[serde(default = "one")]
        slope: f64,
        #[serde(default)]
        grading: Option<Grading>,
    },
}

fn one() -> f64 {
    1.0
}

impl From<&ControlSignal> for ControlFile {
    fn from(c: &ControlSignal) -> Self {
        match c {
            ControlSignal::Step(s) => ControlFile::Step {
                algebra_dim: Some(c.algebra_dim()),
                breakpoints: s.breakpoints.clone(),
                values: s.values.clone(),
            },
            ControlSignal::Singular(s) => ControlFile::Singular {
                algebra_dim: Some(c.algebra_dim()),
                generator: s.generator.name().to_string(),
                direction: s.direction.clone(),
                scale: s.scale,
                offset: s.offset,
                slope: s.slope,
                grading: Some(s.grading),
            },
        }
    }
}

impl TryFrom<ControlFile> for ControlSignal {
    type Error = Error;

    fn try_from(file: ControlFile) -> Result<Self> {
        let (declared, control) = match file {
            ControlFile::Step {
                algebra_dim,
                breakpoints,
                values,
            } => (algebra_dim, ControlSignal::step(breakpoints, values)?),
            ControlFile::Singular {
                algebra_dim,
                generator,
                direction,
                scale,
                offset,
                slope,
                grading,
            } => (
                algebra_dim,
                ControlSignal::singular_affine(
                    Generator::from_name(&generator)?,
                    direction,
                    scale,
                    offset,
                    slope,
                    grading.unwrap_or_default(),
                )?,
            ),
        };
        if let Some(d) = declared {
            if d != control.algebra_dim() {
                return Err(Error::InvalidControl(format!(
                    "algebra_dim {d} does not match value length {}",
                    control.algebra_dim()
                )));
            }
        }
        Ok(control)
    }
}
