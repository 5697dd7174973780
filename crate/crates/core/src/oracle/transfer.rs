//! Exact stationary marginals of the one-dimensional nearest-neighbor
//! two-spin model, via the 2x2 transfer matrix
//! `T(s, s') = exp(beta s s' + beta h (s + s') / 2)`.
//!
//! The spin-flip dynamics with rates `exp(beta a H)` is reversible with
//! respect to this Gibbs measure, so the transfer matrix is an independent
//! oracle for anything the perfect sampler outputs on 1-d nearest-neighbor
//! models.

/// Spin order used for indexing: `SPINS[0] = -1`, `SPINS[1] = +1`.
pub const SPINS: [f64; 2] = [-1.0, 1.0];

#[derive(Debug, Clone)]
pub struct TransferMatrix1D {
    t: [[f64; 2]; 2],
    /// Leading eigenvalue.
    lambda: f64,
    /// Normalized leading eigenvector (Perron, strictly positive).
    v: [f64; 2],
}

impl TransferMatrix1D {
    pub fn new(beta: f64, h: f64) -> Self {
        let mut t = [[0.0; 2]; 2];
        for (i, s) in SPINS.iter().enumerate() {
            for (j, sp) in SPINS.iter().enumerate() {
                t[i][j] = (beta * s * sp + beta * h * (s + sp) / 2.0).exp();
            }
        }
        // symmetric 2x2 eigensystem in closed form
        let (a, b, c) = (t[0][0], t[0][1], t[1][1]);
        let half = 0.5 * (a + c);
        let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let lambda = half + disc;
        let mut v = [b, lambda - a];
        if v[0].abs() + v[1].abs() == 0.0 {
            v = [1.0, 0.0];
        }
        let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
        v = [v[0] / norm, v[1] / norm];
        TransferMatrix1D { t, lambda, v }
    }

    /// Single-site magnetization `E[s_0]`.
    pub fn magnetization(&self) -> f64 {
        SPINS
            .iter()
            .enumerate()
            .map(|(i, s)| s * self.v[i] * self.v[i])
            .sum()
    }

    /// Adjacent correlation `E[s_0 s_1]`.
    pub fn adjacent_correlation(&self) -> f64 {
        let mut acc = 0.0;
        for (i, s) in SPINS.iter().enumerate() {
            for (j, sp) in SPINS.iter().enumerate() {
                acc += s * sp * self.v[i] * self.t[i][j] * self.v[j];
            }
        }
        acc / self.lambda
    }

    /// Probability of a contiguous window configuration (left to right).
    pub fn window_probability(&self, window: &[f64]) -> f64 {
        assert!(!window.is_empty());
        let idx = |s: f64| if s < 0.0 { 0usize } else { 1usize };
        let first = idx(window[0]);
        let last = idx(*window.last().unwrap());
        let mut p = self.v[first] * self.v[last];
        for pair in window.windows(2) {
            p *= self.t[idx(pair[0])][idx(pair[1])] / self.lambda;
        }
        p
    }
}
