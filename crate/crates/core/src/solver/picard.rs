use crate::chain::{Chain, FieldMap};
use crate::controls::{Clock, ControlSignal, Segment};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, lagrange_basis, Lobatto4};
use crate::vecops::{axpy, sub};

use super::{LocalBounds, SolverConfig, Trajectory};

/// Breakpoints closer than this to a uniform grid point are merged into it.
const SLIVER: f64 = 1e-12;

/// A cell `[t0, t1]` with one control direction and clock span `∫_{t0}^{t1} w`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub t0: f64,
    pub t1: f64,
    pub span: f64,
    pub segment: usize,
}

/// Time grid of one piece: uniform cells refined at every control breakpoint,
/// or clock-uniform cells on singular segments.
#[derive(Debug, Clone)]
pub struct PieceGrid {
    pub segments: Vec<Segment>,
    pub cells: Vec<Cell>,
    /// `3·cells + 1` node times; cell `c` owns indices `3c..=3c+3`.
    pub times: Vec<f64>,
}

impl PieceGrid {
    pub fn new(control: &ControlSignal, cells_per_unit: usize) -> Self {
        let rule = Lobatto4::new();
        let cells_per_unit = cells_per_unit.max(1);
        let segments = control.segments();
        let mut cells = Vec::new();
        for (si, seg) in segments.iter().enumerate() {
            match seg.clock {
                Clock::Linear => {
                    let mut bounds = vec![seg.start];
                    let first = (seg.start * cells_per_unit as f64).floor() as usize + 1;
                    for j in first..cells_per_unit {
                        let t = j as f64 / cells_per_unit as f64;
                        if t >= seg.end - SLIVER {
                            break;
                        }
                        if t > seg.start + SLIVER {
                            bounds.push(t);
                        }
                    }
                    bounds.push(seg.end);
                    for w in bounds.windows(2) {
                        cells.push(Cell {
                            t0: w[0],
                            t1: w[1],
                            span: w[1] - w[0],
                            segment: si,
                        });
                    }
                }
                clock @ Clock::Singular { .. } => {
                    let total = clock.elapsed(seg.start, seg.end);
                    let count = ((seg.end - seg.start) * cells_per_unit as f64)
                        .ceil()
                        .max(1.0) as usize;
                    let step = total / count as f64;
                    let mut t0 = seg.start;
                    for j in 1..=count {
                        let t1 = if j == count {
                            seg.end
                        } else {
                            clock.time_at(seg.start, j as f64 * step).min(seg.end)
                        };
                        cells.push(Cell {
                            t0,
                            t1,
                            span: clock.elapsed(t0, t1),
                            segment: si,
                        });
                        t0 = t1;
                    }
                }
            }
        }
        let mut times = Vec::with_capacity(3 * cells.len() + 1);
        times.push(cells[0].t0);
        for cell in &cells {
            let clock = segments[cell.segment].clock;
            for &s in &rule.nodes[1..3] {
                let t = match clock {
                    Clock::Linear => cell.t0 + s * (cell.t1 - cell.t0),
                    _ => clock.time_at(cell.t0, s * cell.span),
                };
                times.push(t);
            }
            times.push(cell.t1);
        }
        PieceGrid {
            segments,
            cells,
            times,
        }
    }

    pub fn node_count(&self) -> usize {
        self.times.len()
    }

    pub fn knots(&self) -> Vec<usize> {
        (0..=self.cells.len()).map(|c| 3 * c).collect()
    }
}

/// Diagnostics of one Picard solve.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardOutcome {
    pub trajectory: Trajectory,
    /// Number of applications of the Picard map.
    pub iterations: usize,
    /// `‖η_{j+1} − η_j‖ / ‖η_j − η_{j−1}‖` for `j ≥ 1`, while above round-off.
    pub ratios: Vec<f64>,
    pub last_change: f64,
    pub mass: f64,
    /// Integral-equation residual at cell ends, 5-point Gauss per cell.
    pub residual: f64,
}

fn field_maps<'a>(chain: &'a dyn Chain, grid: &'a PieceGrid) -> Vec<FieldMap<'a>> {
    grid.segments
        .iter()
        .map(|s| chain.field_map(&s.direction))
        .collect()
}

/// Field values at every (cell, node); shared end points are re-evaluated
/// only when the direction changes.
fn evaluate(grid: &PieceGrid, maps: &[FieldMap<'_>], eta: &[Vec<f64>]) -> Vec<[Vec<f64>; 4]> {
    let mut out: Vec<[Vec<f64>; 4]> = Vec::with_capacity(grid.cells.len());
    for (c, cell) in grid.cells.iter().enumerate() {
        let map = &maps[cell.segment];
        let first = match out.last() {
            Some(prev) if grid.cells[c - 1].segment == cell.segment => prev[3].clone(),
            _ => map(&eta[3 * c]),
        };
        out.push([
            first,
            map(&eta[3 * c + 1]),
            map(&eta[3 * c + 2]),
            map(&eta[3 * c + 3]),
        ]);
    }
    out
}

/// Fixed point of `Φ(η)(t) = y₀ + ∫₀ᵗ f(η(s), γ(s)) ds` on the piece grid,
/// iterated from the constant curve `y₀`.
pub fn picard_solve(
    chain: &dyn Chain,
    level: usize,
    control_level: usize,
    control: &ControlSignal,
    y0: &[f64],
    bounds: &LocalBounds,
    config: &SolverConfig,
) -> Result<PicardOutcome> {
    let norm = |v: &[f64]| chain.algebra_norm(control_level, v);
    let mass = control.l1_norm(&norm);
    if !mass.is_finite() {
        return Err(Error::NonFinite(format!("control mass {mass}")));
    }
    if mass > bounds.epsilon * (1.0 + 1e-9) {
        return Err(Error::NonContraction {
            mass,
            epsilon: bounds.epsilon,
        });
    }
    let rule = Lobatto4::new();
    let grid = PieceGrid::new(control, config.grid_cells);
    let maps = field_maps(chain, &grid);
    let nodes = grid.node_count();
    let level_norm = |v: &[f64]| chain.norm(level, v);
    let floor = 100.0 * f64::EPSILON * level_norm(y0).max(1.0);
    let limit = bounds.radius * (1.0 + 1e-12);

    let mut eta = vec![y0.to_vec(); nodes];
    let mut previous_change = f64::INFINITY;
    let mut ratios = Vec::new();
    for iteration in 1..=config.max_iterations {
        let f = evaluate(&grid, &maps, &eta);
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(nodes);
        next.push(y0.to_vec());
        for (c, cell) in grid.cells.iter().enumerate() {
            let base = next[3 * c].clone();
            for row in &rule.integration[1..] {
                let mut v = base.clone();
                for (a, fj) in row.iter().zip(&f[c]) {
                    axpy(&mut v, cell.span * a, fj);
                }
                next.push(v);
            }
        }
        let mut change = 0.0f64;
        let mut distance = 0.0f64;
        for (new, old) in next.iter().zip(&eta) {
            change = change.max(level_norm(&sub(new, old)));
            distance = distance.max(level_norm(&sub(new, y0)));
        }
        if !(change.is_finite() && distance.is_finite()) {
            return Err(Error::NonFinite(format!("Picard iterate {iteration}")));
        }
        if distance > limit {
            return Err(Error::TrustBallExit {
                iteration,
                distance,
                radius: bounds.radius,
            });
        }
        if iteration > 1 && previous_change > floor {
            ratios.push(change / previous_change);
        }
        eta = next;
        previous_change = change;
        if change <= config.tol {
            let trajectory = Trajectory {
                level,
                times: grid.times.clone(),
                points: eta,
                knots: grid.knots(),
            };
            let residual = integral_residual(chain, &grid, &maps, &trajectory.points, level);
            return Ok(PicardOutcome {
                trajectory,
                iterations: iteration,
                ratios,
                last_change: change,
                mass,
                residual,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: config.max_iterations,
        last_change: previous_change,
    })
}

/// `max_c ‖(η(t_c) − η(0)) − ∫₀^{t_c} f(p(s), γ(s)) ds‖` with `p` the cell-wise
/// cubic interpolant and 5-point Gauss quadrature in clock time.
pub fn integral_residual(
    chain: &dyn Chain,
    grid: &PieceGrid,
    maps: &[FieldMap<'_>],
    points: &[Vec<f64>],
    level: usize,
) -> f64 {
    let rule = Lobatto4::new();
    let (gn, gw) = gauss_legendre(5);
    let basis: Vec<[f64; 4]> = gn
        .iter()
        .map(|&s| std::array::from_fn(|j| lagrange_basis(&rule.nodes, j, s)))
        .collect();
    let y0 = &points[0];
    let mut acc = vec![0.0; y0.len()];
    let mut worst = 0.0f64;
    for (c, cell) in grid.cells.iter().enumerate() {
        for (b, w) in basis.iter().zip(&gw) {
            let mut p = vec![0.0; y0.len()];
            for (j, bj) in b.iter().enumerate() {
                axpy(&mut p, *bj, &points[3 * c + j]);
            }
            let fv = maps[cell.segment](&p);
            axpy(&mut acc, cell.span * w, &fv);
        }
        let lhs = sub(&points[3 * c + 3], y0);
        worst = worst.max(chain.norm(level, &sub(&lhs, &acc)));
    }
    worst
}

/// Residual of `ζ(t) = θ(t)·x` against the same control, at `level`.
pub fn translated_residual(
    chain: &dyn Chain,
    control: &ControlSignal,
    theta: &Trajectory,
    x: &[f64],
    level: usize,
    cells_per_unit: usize,
) -> f64 {
    let grid = PieceGrid::new(control, cells_per_unit);
    let zeta: Vec<Vec<f64>> = theta.points.iter().map(|p| chain.multiply(p, x)).collect();
    translated_points_residual(chain, &grid, &zeta, level)
}

pub(crate) fn translated_points_residual(
    chain: &dyn Chain,
    grid: &PieceGrid,
    zeta: &[Vec<f64>],
    level: usize,
) -> f64 {
    let maps = field_maps(chain, grid);
    integral_residual(chain, grid, &maps, zeta, level)
}
