//! Forward continuous-time simulation of the finite-alphabet exponential
//! model on a one-dimensional torus, by uniformization.
//!
//! Used by the validation suites as an independent route to the stationary
//! law: run long, then compare window statistics against the perfect
//! sampler. The rates are recomputed from scratch (no shared code with the
//! engine models).

use rand::{Rng, RngCore};

use crate::error::{PssimError, Result};

/// Nearest-neighbor torus simulator.
pub struct TorusGlauber {
    pub n: usize,
    pub beta: f64,
    pub j: f64,
    pub h: f64,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TorusGlauber {
    fn mass_bound(&self) -> f64 {
        // sup over local fields of the total mass; the total is convex in
        // the field, so the sup sits at an extreme field value
        let vmax = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let vmin = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let total = |field: f64| -> f64 {
            self.values
                .iter()
                .zip(&self.weights)
                .map(|(v, w)| w * (self.beta * v * field).exp())
                .sum()
        };
        total(self.h + 2.0 * self.j * vmax).max(total(self.h + 2.0 * self.j * vmin))
    }

    /// Run until time `t` from the given initial state; returns the final
    /// state.
    pub fn run(&self, initial: &[f64], t: f64, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        if initial.len() != self.n || self.n < 3 {
            return Err(PssimError::Config(
                "torus needs at least 3 sites and a matching initial state".into(),
            ));
        }
        let mass = self.mass_bound();
        let mut state = initial.to_vec();
        let mut clock = 0.0f64;
        loop {
            // uniformized global clock: n * mass
            let e: f64 = -(1.0 - rng.gen::<f64>()).ln();
            clock += e / (self.n as f64 * mass);
            if clock >= t {
                return Ok(state);
            }
            let site = (rng.gen::<f64>() * self.n as f64) as usize % self.n;
            let left = state[(site + self.n - 1) % self.n];
            let right = state[(site + 1) % self.n];
            let field = self.h + self.j * (left + right);
            // categorical over colors plus the "no update" padding mass
            let mut u = rng.gen::<f64>() * mass;
            let mut chosen = None;
            for (v, w) in self.values.iter().zip(&self.weights) {
                u -= w * (self.beta * v * field).exp();
                if u <= 0.0 {
                    chosen = Some(*v);
                    break;
                }
            }
            if let Some(v) = chosen {
                state[site] = v;
            }
        }
    }

    /// Mean single-site value and mean adjacent product over `reps`
    /// independent long runs.
    pub fn stationary_stats(
        &self,
        t: f64,
        reps: usize,
        rng: &mut dyn RngCore,
    ) -> Result<(f64, f64)> {
        let mut mag = 0.0;
        let mut corr = 0.0;
        for _ in 0..reps {
            let init: Vec<f64> = (0..self.n)
                .map(|_| {
                    let idx = (rng.gen::<f64>() * self.values.len() as f64) as usize
                        % self.values.len();
                    self.values[idx]
                })
                .collect();
            let state = self.run(&init, t, rng)?;
            mag += state.iter().sum::<f64>() / self.n as f64;
            corr += state
                .iter()
                .enumerate()
                .map(|(i, v)| v * state[(i + 1) % self.n])
                .sum::<f64>()
                / self.n as f64;
        }
        Ok((mag / reps as f64, corr / reps as f64))
    }
}
