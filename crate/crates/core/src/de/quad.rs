//! Quadrature rules for the entropy and interference integrals.

use nalgebra::DMatrix;

/// Gauss-Hermite rule: integrates `exp(-x^2) f(x)` over the real line.
///
/// Nodes and weights come from the Golub-Welsch eigenvalue problem on the
/// symmetric tridiagonal companion matrix with off-diagonal `sqrt(i/2)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Self {
        assert!(order >= 2, "Gauss-Hermite order must be >= 2");
        let mut m = DMatrix::<f64>::zeros(order, order);
        for i in 0..order - 1 {
            let off = ((i + 1) as f64 * 0.5).sqrt();
            m[(i, i + 1)] = off;
            m[(i + 1, i)] = off;
        }
        let eig = m.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = (0..order)
            .map(|i| {
                let w = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], w * w * std::f64::consts::PI.sqrt())
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        GaussHermite {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }
}

/// Composite Gauss-Legendre rule on [-1, 1], 16 points per panel.
///
/// Used for the 1-D entropy integral, where the integrand's complex poles
/// sit too close to the real axis for a single Hermite rule to converge at
/// useful orders once the Gaussian is wide.
pub const GL16_NODES: [f64; 16] = [
    -0.9894009349916499,
    -0.9445750230732326,
    -0.8656312023878318,
    -0.7554044083550030,
    -0.6178762444026438,
    -0.4580167776572274,
    -0.2816035507792589,
    -0.0950125098376374,
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];

pub const GL16_WEIGHTS: [f64; 16] = [
    0.0271524594117541,
    0.0622535239386479,
    0.0951585116824928,
    0.1246289712555339,
    0.1495959888165767,
    0.1691565193950025,
    0.1826034150449236,
    0.1894506104550685,
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

/// Integrate `f` over `[a, b]` with panels of width at most `max_width`.
pub fn composite_gl16<F: FnMut(f64) -> f64>(a: f64, b: f64, max_width: f64, mut f: F) -> f64 {
    debug_assert!(b > a && max_width > 0.0);
    let panels = ((b - a) / max_width).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (x, w) in GL16_NODES.iter().zip(GL16_WEIGHTS.iter()) {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}
