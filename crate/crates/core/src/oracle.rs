//! Reference computations with their own arithmetic: closed-form step
//! products, fixed-step RK4 and per-point flows of interval vector fields.

use serde::Serialize;

use crate::chain::Chain;
use crate::controls::ControlSignal;
use crate::error::{Error, Result};
use crate::instances::InstanceKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    StepProduct,
    DenseRk4,
    PointwiseFlow,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub method: OracleMethod,
    pub endpoint: Vec<f64>,
    /// `(t, point)` samples when the oracle produces a curve.
    #[serde(skip)]
    pub trajectory: Vec<(f64, Vec<f64>)>,
    pub error_estimate: f64,
}

/// Row-major `d×d` product.
pub fn mat_mul(d: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

fn identity(d: usize) -> Vec<f64> {
    let mut e = vec![0.0; d * d];
    for i in 0..d {
        e[i * d + i] = 1.0;
    }
    e
}

/// `exp(hat(ω))` by the Rodrigues formula, row-major.
pub fn rodrigues(w: &[f64]) -> Vec<f64> {
    let theta = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    let k = [0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0];
    let k2 = mat_mul(3, &k, &k);
    // sin θ/θ and (1 − cos θ)/θ² with series near zero
    let (a, b) = if theta < 1e-4 {
        let t2 = theta * theta;
        (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    let mut out = identity(3);
    for i in 0..9 {
        out[i] += a * k[i] + b * k2[i];
    }
    out
}

/// `exp(A)` for a row-major `d×d` matrix by scaling, 24-term Taylor, squaring.
pub fn taylor_exp(d: usize, a: &[f64]) -> Vec<f64> {
    let norm1 = (0..d)
        .map(|j| (0..d).map(|i| a[i * d + j].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm1 * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x: Vec<f64> = a.iter().map(|v| v * scale).collect();
    let mut term = identity(d);
    let mut sum = identity(d);
    for k in 1..=24 {
        term = mat_mul(d, &term, &x);
        for v in term.iter_mut() {
            *v /= k as f64;
        }
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += t;
        }
    }
    for _ in 0..squarings {
        sum = mat_mul(d, &sum, &sum);
    }
    sum
}

fn hat(w: &[f64]) -> Vec<f64> {
    vec![0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0]
}

/// `exp(Δ_{K−1} v_{K−1}) ⋯ exp(Δ₀ v₀)` for abelian and matrix instances.
pub fn step_product_endpoint(chain: &dyn Chain, control: &ControlSignal) -> Result<OracleResult> {
    let unsupported = || Error::Unsupported {
        instance: chain.name(),
        op: "step_product_endpoint",
    };
    let step = control.as_step().ok_or_else(|| {
        Error::InvalidControl("step product needs a piecewise-constant control".into())
    })?;
    let widths = step.breakpoints().windows(2).map(|w| w[1] - w[0]);
    let endpoint = match chain.kind() {
        InstanceKind::Abelian { dim } => {
            let mut sum = vec![0.0; dim];
            for (dt, v) in widths.zip(step.values()) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += dt * x;
                }
            }
            sum
        }
        InstanceKind::So3 => {
            let mut p = identity(3);
            for (dt, v) in widths.zip(step.values()) {
                let w: Vec<f64> = v.iter().map(|x| dt * x).collect();
                p = mat_mul(3, &rodrigues(&w), &p);
            }
            p
        }
        InstanceKind::Gl { dim } => {
            let mut p = identity(dim);
            for (dt, v) in widths.zip(step.values()) {
                let a: Vec<f64> = v.iter().map(|x| dt * x).collect();
                p = mat_mul(dim, &taylor_exp(dim, &a), &p);
            }
            p
        }
        _ => return Err(unsupported()),
    };
    Ok(OracleResult {
        method: OracleMethod::StepProduct,
        endpoint,
        trajectory: Vec::new(),
        error_estimate: 0.0,
    })
}

fn rk4_run(
    rhs: &dyn Fn(f64, &[f64]) -> Vec<f64>,
    y0: &[f64],
    t0: f64,
    t1: f64,
    steps: usize,
) -> Vec<(f64, Vec<f64>)> {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(steps + 1);
    out.push((t0, y.clone()));
    let shift = |y: &[f64], k: &[f64], a: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(p, q)| p + a * q).collect()
    };
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = rhs(t, &y);
        let k2 = rhs(t + 0.5 * h, &shift(&y, &k1, 0.5 * h));
        let k3 = rhs(t + 0.5 * h, &shift(&y, &k2, 0.5 * h));
        let k4 = rhs(t + h, &shift(&y, &k3, h));
        for j in 0..y.len() {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let t_next = if i + 1 == steps { t1 } else { t + h };
        out.push((t_next, y.clone()));
    }
    out
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Classical RK4 on `[0, 1]` with `steps` steps; the error estimate is the
/// endpoint change under step halving.
pub fn dense_rk4(
    rhs: &dyn Fn(f64, &[f64]) -> Vec<f64>,
    y0: &[f64],
    steps: usize,
) -> Result<OracleResult> {
    if steps == 0 {
        return Err(Error::Contract("RK4 needs at least one step".into()));
    }
    let coarse = rk4_run(rhs, y0, 0.0, 1.0, steps);
    let fine = rk4_run(rhs, y0, 0.0, 1.0, 2 * steps);
    let endpoint = fine.last().unwrap().1.clone();
    Ok(OracleResult {
        method: OracleMethod::DenseRk4,
        error_estimate: max_diff(&coarse.last().unwrap().1, &endpoint),
        endpoint,
        trajectory: fine,
    })
}

/// `Ẏ = Γ(t) Y` in row-major coordinates, for so3 (`rotations`) or `gl(d)`.
pub fn matrix_rhs(
    d: usize,
    rotations: bool,
    control: impl Fn(f64) -> Vec<f64> + 'static,
) -> impl Fn(f64, &[f64]) -> Vec<f64> {
    move |t, y| {
        let v = control(t);
        let a = if rotations { hat(&v) } else { v };
        mat_mul(d, &a, y)
    }
}

/// Cubic Lagrange interpolation of uniform-grid samples on `[0, 1]`.
fn lagrange4(values: &[f64], x: f64) -> f64 {
    let g = values.len();
    let h = 1.0 / (g - 1) as f64;
    let i = ((x / h).floor() as isize).clamp(0, g as isize - 2) as usize;
    let start = i.saturating_sub(1).min(g - 4);
    let mut sum = 0.0;
    for j in 0..4 {
        let xj = (start + j) as f64 * h;
        let mut w = 1.0;
        for m in 0..4 {
            if m != j {
                let xm = (start + m) as f64 * h;
                w *= (x - xm) / (xj - xm);
            }
        }
        sum += w * values[start + j];
    }
    sum
}

/// Flows every grid point of `[0, 1]` under the step-in-time field whose
/// values are uniform-grid samples; RK4 with `steps_per_unit` steps per unit
/// time, restarted at each breakpoint. Samples are the point positions.
pub fn pointwise_flow(
    grid: usize,
    control: &ControlSignal,
    steps_per_unit: usize,
) -> Result<OracleResult> {
    let step = control
        .as_step()
        .ok_or_else(|| Error::InvalidControl("pointwise flow needs a step-in-time field".into()))?;
    if grid < 4 || control.algebra_dim() != grid {
        return Err(Error::Contract("field samples must match the grid".into()));
    }
    if steps_per_unit == 0 {
        return Err(Error::Contract("need at least one step".into()));
    }
    let run = |per_unit: usize| -> Vec<(f64, Vec<f64>)> {
        let mut x: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
        let mut samples = vec![(0.0, x.clone())];
        for (w, v) in step.breakpoints().windows(2).zip(step.values()) {
            let n = ((w[1] - w[0]) * per_unit as f64).ceil().max(1.0) as usize;
            let rhs =
                |_t: f64, y: &[f64]| -> Vec<f64> { y.iter().map(|&p| lagrange4(v, p)).collect() };
            let interior: Vec<f64> = x[1..grid - 1].to_vec();
            let path = rk4_run(&rhs, &interior, w[0], w[1], n);
            for (t, y) in path.into_iter().skip(1) {
                x[1..grid - 1].copy_from_slice(&y);
                samples.push((t, x.clone()));
            }
        }
        samples
    };
    let coarse = run(steps_per_unit);
    let fine = run(2 * steps_per_unit);
    let endpoint = fine.last().unwrap().1.clone();
    Ok(OracleResult {
        method: OracleMethod::PointwiseFlow,
        error_estimate: max_diff(&coarse.last().unwrap().1, &endpoint),
        endpoint,
        trajectory: fine,
    })
}
