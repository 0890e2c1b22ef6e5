//! Gauss-Jacobi quadrature rules, generated by the Golub-Welsch algorithm
//! from the three-term recurrence of the Jacobi polynomials.
//!
//! The rules integrate weight functions with algebraic endpoint
//! singularities exactly, which is what every weakly singular integral in
//! this crate reduces to after a suitable substitution.

use crate::error::{FracError, Result};
use crate::gamma::ln_gamma;
use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights for `int_0^1 (1-s)^alpha s^beta g(s) ds`.
///
/// The weight singularities are folded into the rule: `apply` sums
/// `w_i * g(s_i)` over nodes `s_i` in (0, 1).
#[derive(Debug, Clone)]
pub struct GaussJacobi {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

impl GaussJacobi {
    /// Build an `n`-point rule for weight `(1-s)^alpha s^beta` on [0, 1].
    /// Requires `alpha > -1`, `beta > -1`.
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(FracError::size("quadrature rule needs at least one node"));
        }
        if !(alpha > -1.0) || !(beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(FracError::domain(format!(
                "Jacobi weight exponents must be > -1, got alpha={alpha}, beta={beta}"
            )));
        }
        let (a, b) = (alpha, beta);

        // Jacobi matrix of the monic recurrence on [-1, 1]:
        // diagonal d_k, off-diagonal sqrt(c_k).
        let mut mat = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let kf = k as f64;
            let denom = (2.0 * kf + a + b) * (2.0 * kf + a + b + 2.0);
            let dk = if k == 0 {
                (b - a) / (a + b + 2.0)
            } else {
                (b * b - a * a) / denom
            };
            mat[(k, k)] = dk;
        }
        for k in 1..n {
            let kf = k as f64;
            let ck = if k == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((a + b + 2.0).powi(2) * (a + b + 3.0))
            } else {
                4.0 * kf * (kf + a) * (kf + b) * (kf + a + b)
                    / ((2.0 * kf + a + b).powi(2) * (2.0 * kf + a + b + 1.0) * (2.0 * kf + a + b - 1.0))
            };
            let off = ck.sqrt();
            mat[(k, k - 1)] = off;
            mat[(k - 1, k)] = off;
        }

        let eigen = SymmetricEigen::new(mat);

        // Total mass on [-1,1]: 2^(a+b+1) B(a+1, b+1).
        let mu0 = ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
            - ln_gamma(a + b + 2.0))
            .exp();

        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let x = eigen.eigenvalues[i];
                let v0 = eigen.eigenvectors[(0, i)];
                (x, mu0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());

        // Map x in [-1,1] to s = (x+1)/2 in [0,1]; the weight picks up 2^-(a+b+1).
        let scale = 0.5f64.powf(a + b + 1.0);
        let nodes = pairs.iter().map(|p| 0.5 * (p.0 + 1.0)).collect();
        let weights = pairs.iter().map(|p| p.1 * scale).collect();
        Ok(GaussJacobi {
            nodes,
            weights,
            alpha,
            beta,
        })
    }

    /// Integrate `(1-s)^alpha s^beta g(s)` over [0, 1].
    pub fn apply(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (s, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * g(*s);
        }
        acc
    }

    /// Integrate `(b-t)^alpha (t-a)^beta g(t)` over [a, b].
    pub fn apply_on(&self, a: f64, b: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
        let len = b - a;
        let scale = len.powf(self.alpha + self.beta + 1.0);
        let mut acc = 0.0;
        for (s, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * g(a + len * s);
        }
        scale * acc
    }
}
