//! Piecewise cubic Hermite interpolation on sorted nodes.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slopes {
    /// Three-point parabolic slopes, no limiting.
    Parabolic,
    /// Parabolic slopes passed through the Fritsch–Carlson limiter; the
    /// interpolant is monotone wherever the data are.
    Monotone,
}

#[derive(Debug, Clone)]
pub struct CubicHermite {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

fn parabolic_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (h[i] * delta[i - 1] + h[i - 1] * delta[i]) / (h[i - 1] + h[i]);
    }
    d[0] = ((2.0 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1]);
    let m = n - 2;
    d[n - 1] = ((2.0 * h[m] + h[m - 1]) * delta[m] - h[m] * delta[m - 1]) / (h[m] + h[m - 1]);
    d
}

fn limit(xs: &[f64], ys: &[f64], d: &mut [f64]) {
    let n = xs.len();
    let delta: Vec<f64> = (0..n - 1)
        .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
        .collect();
    if d[0] * delta[0] <= 0.0 {
        d[0] = 0.0;
    }
    if d[n - 1] * delta[n - 2] <= 0.0 {
        d[n - 1] = 0.0;
    }
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        }
    }
    for (k, &dk) in delta.iter().enumerate() {
        if dk == 0.0 {
            d[k] = 0.0;
            d[k + 1] = 0.0;
            continue;
        }
        let a = d[k] / dk;
        let b = d[k + 1] / dk;
        let r2 = a * a + b * b;
        if r2 > 9.0 {
            let tau = 3.0 / r2.sqrt();
            d[k] = tau * a * dk;
            d[k + 1] = tau * b * dk;
        }
    }
}

impl CubicHermite {
    /// `xs` strictly increasing with at least two entries.
    pub fn new(xs: &[f64], ys: &[f64], slopes: Slopes) -> Self {
        assert!(
            xs.len() >= 2 && xs.len() == ys.len(),
            "need matching nodes and values"
        );
        let mut ds = parabolic_slopes(xs, ys);
        if slopes == Slopes::Monotone {
            limit(xs, ys, &mut ds);
        }
        CubicHermite {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            ds,
        }
    }

    /// Interval index `i` with `xs[i] ≤ x ≤ xs[i+1]`, clamped to the ends.
    pub fn interval(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&v| v <= x);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    fn on_interval(&self, i: usize, x: f64) -> (f64, f64) {
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = (self.ds[i] * h, self.ds[i + 1] * h);
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1;
        let slope = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * d1)
            / h;
        (value, slope)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.on_interval(self.interval(x), x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.on_interval(self.interval(x), x).1
    }

    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// Solves `p(x) = target` on the interval bracketing `target`, starting
    /// from `guess`; requires the interpolant to be increasing.
    pub fn solve_increasing(&self, target: f64, guess: f64) -> f64 {
        let n = self.ys.len();
        if target <= self.ys[0] {
            return self.xs[0];
        }
        if target >= self.ys[n - 1] {
            return self.xs[n - 1];
        }
        let i = self.ys.partition_point(|&v| v <= target).clamp(1, n - 1) - 1;
        let (mut lo, mut hi) = (self.xs[i], self.xs[i + 1]);
        let mut x = guess.clamp(lo, hi);
        for _ in 0..60 {
            let (v, d) = self.on_interval(i, x);
            let r = v - target;
            if r == 0.0 {
                return x;
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let newton = x - r / d;
            let next = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300)
                || hi - lo <= f64::EPSILON
            {
                return next;
            }
            x = next;
        }
        x
    }
}
