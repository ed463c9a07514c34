use std::io::{self, Write};

use crate::quadrature::lagrange_basis;

/// Samples of an absolutely continuous curve.
///
/// Samples come in cells of four nodes sharing end points; `knots[c]` is
/// the index of the first sample of cell `c`, and the last knot is the final
/// sample index. Control breakpoints always fall on knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub level: usize,
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub knots: Vec<usize>,
}

impl Trajectory {
    /// A curve constant at `point` on `[0, 1]`.
    pub fn constant(level: usize, point: Vec<f64>) -> Self {
        Trajectory {
            level,
            times: vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
            points: vec![point; 4],
            knots: vec![0, 3],
        }
    }

    pub fn start(&self) -> &[f64] {
        &self.points[0]
    }

    pub fn endpoint(&self) -> &[f64] {
        self.points.last().expect("trajectory is never empty")
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    pub fn cell_count(&self) -> usize {
        self.knots.len() - 1
    }

    /// Sample times on cell boundaries.
    pub fn knot_times(&self) -> Vec<f64> {
        self.knots.iter().map(|&k| self.times[k]).collect()
    }

    /// Cell-local cubic Lagrange interpolation; `t` is clamped to the interval.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let (a, b) = self.interval();
        let t = t.clamp(a, b);
        let c = self
            .knots
            .partition_point(|&k| self.times[k] <= t)
            .clamp(1, self.cell_count())
            - 1;
        let lo = self.knots[c];
        let hi = self.knots[c + 1];
        let ts = &self.times[lo..=hi];
        if let Some(j) = ts.iter().position(|&s| s == t) {
            return self.points[lo + j].clone();
        }
        let mut out = vec![0.0; self.points[lo].len()];
        for (j, p) in self.points[lo..=hi].iter().enumerate() {
            let w = lagrange_basis(ts, j, t);
            for (o, x) in out.iter_mut().zip(p) {
                *o += w * x;
            }
        }
        out
    }

    /// Header `t,x0,x1,…` then one row per sample.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let dim = self.points[0].len();
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((0..dim).map(|i| format!("x{i}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (t, p) in self.times.iter().zip(&self.points) {
            write!(w, "{t}")?;
            for x in p {
                write!(w, ",{x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
