use nalgebra::DMatrix;

use crate::chain::{Chain, FieldMap};
use crate::error::{Error, Result};
use crate::instances::InstanceKind;

/// Matrix groups near the identity: `GL(d)` with algebra `gl(d)`, or the
/// rotation group with skew-symmetric algebra in axis coordinates `ω ∈ ℝ³`.
///
/// All levels coincide; norms are operator norms.
#[derive(Debug, Clone)]
pub struct MatrixChain {
    dim: usize,
    rotations: bool,
}

impl MatrixChain {
    pub fn so3() -> Self {
        MatrixChain {
            dim: 3,
            rotations: true,
        }
    }

    pub fn gl(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams(
                "matrix dimension must be positive".into(),
            ));
        }
        Ok(MatrixChain {
            dim,
            rotations: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn mat(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, x)
    }

    fn coords(m: &DMatrix<f64>) -> Vec<f64> {
        m.transpose().as_slice().to_vec()
    }

    /// Algebra coordinates to a `d×d` matrix.
    pub fn algebra_matrix(&self, v: &[f64]) -> DMatrix<f64> {
        if self.rotations {
            hat(v)
        } else {
            self.mat(v)
        }
    }
}

fn row_major_product(d: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

pub(crate) fn hat(w: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        3,
        3,
        &[0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0],
    )
}

/// Largest singular value of a row-major `d×d` matrix: closed form for
/// `d ≤ 3` via the eigenvalues of `AᵀA`.
fn operator_norm(d: usize, a: &[f64]) -> f64 {
    if a.iter().all(|x| *x == 0.0) {
        return 0.0;
    }
    match d {
        1 => a[0].abs(),
        2 => {
            let fro2 = a.iter().map(|x| x * x).sum::<f64>();
            let det = a[0] * a[3] - a[1] * a[2];
            let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
            (0.5 * (fro2 + disc)).sqrt()
        }
        3 => {
            let mut b = [[0.0; 3]; 3];
            for (i, row) in b.iter_mut().enumerate() {
                for (j, entry) in row.iter_mut().enumerate() {
                    *entry = (0..3).map(|k| a[3 * k + i] * a[3 * k + j]).sum();
                }
            }
            largest_symmetric_eigenvalue3(&b).max(0.0).sqrt()
        }
        _ => DMatrix::from_row_slice(d, d, a).singular_values().max(),
    }
}

/// Trigonometric closed form for the top eigenvalue of a symmetric 3×3 matrix.
fn largest_symmetric_eigenvalue3(b: &[[f64; 3]; 3]) -> f64 {
    let p1 = b[0][1].powi(2) + b[0][2].powi(2) + b[1][2].powi(2);
    let q = (b[0][0] + b[1][1] + b[2][2]) / 3.0;
    if p1 == 0.0 {
        return b[0][0].max(b[1][1]).max(b[2][2]);
    }
    let p2 = (b[0][0] - q).powi(2) + (b[1][1] - q).powi(2) + (b[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let c = |i: usize, j: usize| (b[i][j] - if i == j { q } else { 0.0 }) / p;
    let det = c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1))
        - c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0))
        + c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0));
    let r = (det / 2.0).clamp(-1.0, 1.0);
    q + 2.0 * p * (r.acos() / 3.0).cos()
}

impl Chain for MatrixChain {
    fn name(&self) -> String {
        if self.rotations {
            "so3".into()
        } else {
            format!("gl:{}", self.dim)
        }
    }
    fn kind(&self) -> InstanceKind {
        if self.rotations {
            InstanceKind::So3
        } else {
            InstanceKind::Gl { dim: self.dim }
        }
    }
    fn top_level(&self) -> usize {
        4
    }
    fn loss(&self) -> usize {
        0
    }
    fn point_dim(&self) -> usize {
        self.dim * self.dim
    }
    fn algebra_dim(&self) -> usize {
        if self.rotations {
            3
        } else {
            self.dim * self.dim
        }
    }
    fn identity(&self) -> Vec<f64> {
        Self::coords(&DMatrix::identity(self.dim, self.dim))
    }
    fn norm(&self, _level: usize, x: &[f64]) -> f64 {
        operator_norm(self.dim, x)
    }
    fn algebra_norm(&self, _level: usize, v: &[f64]) -> f64 {
        if self.rotations {
            // ‖hat(ω)‖_op = |ω|
            v.iter().map(|x| x * x).sum::<f64>().sqrt()
        } else {
            operator_norm(self.dim, v)
        }
    }
    fn multiply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        row_major_product(self.dim, x, y)
    }
    fn field(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        row_major_product(self.dim, &Self::coords(&self.algebra_matrix(v)), x)
    }
    fn field_map<'a>(&'a self, v: &'a [f64]) -> FieldMap<'a> {
        let a = Self::coords(&self.algebra_matrix(v));
        let d = self.dim;
        Box::new(move |x| row_major_product(d, &a, x))
    }
    fn tangent_to_algebra(&self, w: &[f64]) -> Vec<f64> {
        if self.rotations {
            // vee of the skew part
            vec![
                0.5 * (w[7] - w[5]),
                0.5 * (w[2] - w[6]),
                0.5 * (w[3] - w[1]),
            ]
        } else {
            w.to_vec()
        }
    }
    fn invert(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.mat(x)
            .try_inverse()
            .map(|m| Self::coords(&m))
            .ok_or_else(|| Error::Contract("singular matrix has no inverse".into()))
    }
    fn exp(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(Self::coords(&self.algebra_matrix(v).exp()))
    }
    fn analytic_lipschitz(&self, _level: usize, _control_level: usize) -> Option<f64> {
        // ‖V A₂ − V A₁‖ ≤ ‖V‖ ‖A₂ − A₁‖
        Some(1.0)
    }
    fn analytic_field_bound(
        &self,
        level: usize,
        _: usize,
        center: &[f64],
        radius: f64,
    ) -> Option<f64> {
        // sup_{‖V‖≤1} ‖V A‖ = ‖A‖ ≤ ‖center‖ + R
        Some(self.norm(level, center) + radius)
    }
    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "name": self.name(), "dim": self.dim, "rotations": self.rotations })
    }
}
