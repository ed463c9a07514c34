//! Quadrature rules on the unit interval.

/// Gauss–Legendre rule with `n` points mapped to `[0, 1]`.
///
/// Nodes come from Newton iteration on the Legendre polynomial, weights from
/// the derivative formula. Accurate to round-off for `n <= 64`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th root of P_n on [-1, 1].
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Four-point Gauss–Lobatto collocation scheme on `[0, 1]`.
///
/// `integration[k][j] = ∫_0^{nodes[k]} ℓ_j(s) ds` where `ℓ_j` is the Lagrange
/// basis on the nodes; the last row equals the Lobatto weights.
#[derive(Debug, Clone)]
pub struct Lobatto4 {
    pub nodes: [f64; 4],
    pub weights: [f64; 4],
    pub integration: [[f64; 4]; 4],
}

impl Lobatto4 {
    pub fn new() -> Self {
        let r = (1.0f64 / 5.0).sqrt();
        let nodes = [0.0, 0.5 * (1.0 - r), 0.5 * (1.0 + r), 1.0];
        let (gn, gw) = gauss_legendre(4);
        let mut integration = [[0.0; 4]; 4];
        for (k, row) in integration.iter_mut().enumerate() {
            let upper = nodes[k];
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = gn
                    .iter()
                    .zip(&gw)
                    .map(|(&s, &w)| w * upper * lagrange_basis(&nodes, j, s * upper))
                    .sum();
            }
        }
        Lobatto4 {
            nodes,
            weights: [1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0],
            integration,
        }
    }
}

impl Default for Lobatto4 {
    fn default() -> Self {
        Self::new()
    }
}

/// Value at `s` of the `j`-th Lagrange basis polynomial on `nodes`.
pub fn lagrange_basis(nodes: &[f64], j: usize, s: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(m, _)| m != j)
        .map(|(_, &cm)| (s - cm) / (nodes[j] - cm))
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 3, 5, 8, 16] {
            let (x, w) = gauss_legendre(n);
            for p in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = 1.0 / (p as f64 + 1.0);
                assert!((q - exact).abs() < 1e-14, "n={n} p={p}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn lobatto_last_row_matches_weights() {
        let l = Lobatto4::new();
        for j in 0..4 {
            assert!((l.integration[3][j] - l.weights[j]).abs() < 1e-15);
            assert_eq!(l.integration[0][j], 0.0);
        }
        // rows integrate the constant function exactly
        for k in 0..4 {
            let s: f64 = l.integration[k].iter().sum();
            assert!((s - l.nodes[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn lobatto_rows_integrate_cubics() {
        let l = Lobatto4::new();
        for k in 1..4 {
            let c = l.nodes[k];
            let approx: f64 = (0..4)
                .map(|j| l.integration[k][j] * l.nodes[j].powi(3))
                .sum();
            assert!((approx - c.powi(4) / 4.0).abs() < 1e-15);
        }
    }
}
