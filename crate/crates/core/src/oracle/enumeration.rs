//! Brute-force ladder computation for finite-alphabet exponential-rate
//! models, by exhausting every boundary condition on the interaction
//! support.
//!
//! The couplings are given extensionally (offset -> value), the rate is
//! recomputed from scratch, and every infimum is a literal minimum over an
//! enumerated set — no monotonicity shortcuts, no shell structure.

use crate::error::{PssimError, Result};

/// Budget on enumerated boundary configurations.
const BUDGET: f64 = 1e7;

/// An extensional model description: explicit couplings and alphabet.
#[derive(Debug, Clone)]
pub struct EnumModel {
    pub beta: f64,
    /// Nonzero couplings as (offset, value) pairs; the offset is relative to
    /// the updated site.
    pub couplings: Vec<(Vec<i64>, f64)>,
    pub field: f64,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EnumModel {
    fn l1(off: &[i64]) -> i64 {
        off.iter().map(|c| c.abs()).sum()
    }

    /// Local field for one boundary configuration (values indexed like
    /// `couplings`).
    fn local_field(&self, boundary: &[f64]) -> f64 {
        let mut h = self.field;
        for ((_, j), v) in self.couplings.iter().zip(boundary) {
            h += j * v;
        }
        h
    }

    /// The raw rate of color `a` under one boundary configuration.
    pub fn rate(&self, a: f64, boundary: &[f64]) -> f64 {
        (self.beta * a * self.local_field(boundary)).exp()
    }

    /// Total real-color mass under one boundary configuration.
    fn total(&self, boundary: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * self.rate(*v, boundary))
            .sum()
    }

    fn all_boundaries(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.couplings.len();
        let q = self.values.len();
        let count = (q as f64).powi(n as i32);
        if count > BUDGET {
            return Err(PssimError::EnumerationBudget {
                states: count,
                budget: BUDGET,
            });
        }
        let mut out = Vec::with_capacity(count as usize);
        let total = q.pow(n as u32);
        for idx in 0..total {
            let mut b = Vec::with_capacity(n);
            let mut rem = idx;
            for _ in 0..n {
                b.push(self.values[rem % q]);
                rem /= q;
            }
            out.push(b);
        }
        Ok(out)
    }

    /// The uniform mass bound `M = sup over boundaries of the total mass`.
    pub fn mass_bound(&self) -> Result<f64> {
        Ok(self
            .all_boundaries()?
            .iter()
            .map(|b| self.total(b))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// The ladder `alpha(-1), alpha(0), ..., alpha(l_max)` by literal
    /// enumeration: for each radius, minimize over the seen part and, for
    /// each color, over all completions of the unseen part.
    pub fn ladder(&self, l_max: i64) -> Result<Vec<f64>> {
        let mass = self.mass_bound()?;
        let boundaries = self.all_boundaries()?;
        let mut out = Vec::new();
        for k in -1..=l_max {
            let seen: Vec<usize> = self
                .couplings
                .iter()
                .enumerate()
                .filter(|(_, (off, _))| Self::l1(off) <= k)
                .map(|(i, _)| i)
                .collect();
            // group boundaries by their restriction to the seen offsets
            let mut best = f64::INFINITY;
            let mut seen_assignments = group_keys(&boundaries, &seen);
            seen_assignments.sort_by(|a, b| a.partial_cmp(b).unwrap());
            seen_assignments.dedup();
            for key in seen_assignments {
                let compat: Vec<&Vec<f64>> = boundaries
                    .iter()
                    .filter(|b| seen.iter().enumerate().all(|(p, &i)| b[i] == key[p]))
                    .collect();
                let mut integral = 0.0;
                for (v, w) in self.values.iter().zip(&self.weights) {
                    let min_rate = compat
                        .iter()
                        .map(|b| self.rate(*v, b))
                        .fold(f64::INFINITY, f64::min);
                    integral += w * min_rate;
                }
                if k >= 0 {
                    // the cemetery infimum: M minus the largest total mass
                    let max_total = compat
                        .iter()
                        .map(|b| self.total(b))
                        .fold(f64::NEG_INFINITY, f64::max);
                    integral += (mass - max_total).max(0.0);
                }
                best = best.min(integral);
            }
            out.push(best);
        }
        Ok(out)
    }

    /// Mixture weights `lambda(-1), lambda(0), ..., lambda(l_max)`.
    pub fn lambdas(&self, l_max: i64) -> Result<Vec<f64>> {
        let mass = self.mass_bound()?;
        let alphas = self.ladder(l_max)?;
        let mut out = vec![alphas[0] / mass];
        for pair in alphas.windows(2) {
            out.push((pair[1] - pair[0]) / mass);
        }
        Ok(out)
    }
}

fn group_keys(boundaries: &[Vec<f64>], seen: &[usize]) -> Vec<Vec<f64>> {
    boundaries
        .iter()
        .map(|b| seen.iter().map(|&i| b[i]).collect())
        .collect()
}

/// Convenience: the nearest-neighbor model in one dimension.
pub fn nn_ising_1d(beta: f64, j: f64, h: f64) -> EnumModel {
    EnumModel {
        beta,
        couplings: vec![(vec![-1], j), (vec![1], j)],
        field: h,
        values: vec![-1.0, 1.0],
        weights: vec![1.0, 1.0],
    }
}
