//! Rigorous a-priori bounds for the sampler, plus Monte-Carlo
//! maximum-likelihood helpers that reuse its exact samples.
//!
//! All bounds are driven by the branching index
//! `gamma = sup_i sum_k |V(k)| lambda_i(k)`:
//!
//! * `P(N_STOP > n) <= |F| gamma^n` — tail of the backward step count;
//! * `E |C_t| <= |F| exp(-M_min (1 - gamma) t)` — ancestor-set decay;
//! * capping the sketch at `n` steps and keeping completed replicas biases
//!   the output law by at most `gamma^n / (1 - gamma^n)` in total variation;
//! * truncating the ladder at range `L` biases each update law by at most
//!   `sup_i (M_i - alpha_i(L)) / M_i`, compounding to that over `1 - gamma`.

use serde::Serialize;

use crate::decomposition::RangeDecomposition;
use crate::error::{PssimError, Result};
use crate::lattice::{ball_volume, shell_counts};
use crate::models::kernel::Kernel;
use crate::stats::{mean, stderr_mean};

/// Snapshot of the rigorous bounds for one decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub gamma: f64,
    pub subcritical: bool,
    /// Smallest per-orbit mass bound (the slowest clock).
    pub mass_min: f64,
    pub mass_max: f64,
}

impl BoundsReport {
    pub fn compute(decomp: &RangeDecomposition) -> Result<Self> {
        let c = decomp.criticality()?;
        let orbits = decomp.model().num_orbits();
        let masses: Vec<f64> = (0..orbits).map(|o| decomp.mass_bound(o)).collect();
        Ok(BoundsReport {
            gamma: c.gamma(),
            subcritical: c.is_subcritical(),
            mass_min: masses.iter().cloned().fold(f64::INFINITY, f64::min),
            mass_max: masses.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// Upper bound on `P(N_STOP > n)` for a window of `window` sites.
    pub fn nstop_tail(&self, window: usize, n: u64) -> f64 {
        (window as f64 * self.gamma.powi(n as i32)).min(1.0)
    }

    /// Upper bound on the expected ancestor-set size at backward time `t`.
    pub fn ancestor_decay(&self, window: usize, t: f64) -> f64 {
        window as f64 * (-self.mass_min * (1.0 - self.gamma) * t).exp()
    }

    /// Total-variation distance between the time-`t` law started anywhere
    /// and the stationary law, bounded via the ancestor decay.
    pub fn convergence(&self, window: usize, t: f64) -> f64 {
        self.ancestor_decay(window, t).min(1.0)
    }

    /// Total-variation bias of keeping only replicas whose sketch finished
    /// within `n` steps.
    pub fn step_cap_bias(&self, n: u64) -> f64 {
        let g = self.gamma.powi(n as i32);
        if g >= 1.0 {
            1.0
        } else {
            g / (1.0 - g)
        }
    }

    /// Per-update total-variation bias of cutting the ladder at range `l`,
    /// compounded over the sketch.
    pub fn range_cut_bias(&self, decomp: &RangeDecomposition, l: i64) -> Result<f64> {
        let mut per_update = 0.0f64;
        for orbit in 0..decomp.model().num_orbits() {
            let m = decomp.mass_bound(orbit);
            let a = decomp.alpha(orbit, l)?;
            per_update = per_update.max((m - a) / m);
        }
        if !self.subcritical {
            return Err(PssimError::Supercritical { gamma: self.gamma });
        }
        Ok(per_update / (1.0 - self.gamma))
    }
}

/// The inverse temperature below which the decomposition of the
/// two-point-alphabet exponential model with this kernel is certainly
/// subcritical: `2 beta sum_k |V(k)| s_d(k) J_k = 1` is linear in `beta`.
///
/// For kernels without a truncation radius the series is summed until the
/// geometric kernel decay beats the polynomial ball growth.
pub fn critical_beta(kernel: &Kernel) -> Result<f64> {
    let d = kernel.dimension();
    let mut total = 0.0f64;
    match kernel.range() {
        Some(l) => {
            let counts = shell_counts(d, l);
            for (m, c) in counts.iter().enumerate().skip(1) {
                total += ball_volume(d, m as i64) * c * kernel.shell_value(m as i64);
            }
        }
        None => {
            let mut m = 1i64;
            loop {
                let counts = shell_counts(d, m);
                let term = ball_volume(d, m) * counts[m as usize] * kernel.shell_value(m);
                total += term;
                if m > 16 && term < 1e-15 * total.max(1.0) {
                    break;
                }
                if m > 10_000 {
                    return Err(PssimError::Unsupported(
                        "kernel decays too slowly for a critical-temperature estimate".into(),
                    ));
                }
                m += 1;
            }
        }
    }
    if total <= 0.0 {
        return Err(PssimError::Config(
            "zero kernel has no finite critical temperature".into(),
        ));
    }
    Ok(1.0 / (2.0 * total))
}

/// Monte-Carlo estimate of the partition-function ratio `Z(theta)/Z(psi)` of
/// a one-parameter exponential family, from samples drawn at `psi`:
/// `d_n(theta) = (1/n) sum_i exp(t_i (theta - psi))`, with the standard
/// error of the mean. The exponentials are shifted by their maximum for
/// stability.
pub fn mc_partition_ratio(stats: &[f64], theta: f64, psi: f64) -> (f64, f64) {
    let delta = theta - psi;
    let shift = stats
        .iter()
        .map(|t| t * delta)
        .fold(f64::NEG_INFINITY, f64::max);
    let terms: Vec<f64> = stats.iter().map(|t| (t * delta - shift).exp()).collect();
    let scale = shift.exp();
    (scale * mean(&terms), scale * stderr_mean(&terms))
}

/// Grid maximum-likelihood estimate: maximize
/// `theta * t_obs - log d_n(theta)` over the grid.
pub fn mc_mle_grid(stats: &[f64], t_obs: f64, grid: &[f64], psi: f64) -> (f64, Vec<f64>) {
    let mut best = (f64::NEG_INFINITY, grid[0]);
    let mut loglik = Vec::with_capacity(grid.len());
    for &theta in grid {
        let (d, _) = mc_partition_ratio(stats, theta, psi);
        let ll = theta * t_obs - d.ln();
        loglik.push(ll);
        if ll > best.0 {
            best = (ll, theta);
        }
    }
    (best.1, loglik)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ising::IsingModel;
    use crate::models::kernel::KernelSpec;
    use std::sync::Arc;

    #[test]
    fn critical_beta_nn_1d() {
        let k = Kernel::new(1, KernelSpec::Nn { value: 1.0 }).unwrap();
        let b = critical_beta(&k).unwrap();
        assert!((b - 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn bounds_monotone_in_time_and_steps() {
        let model = IsingModel::nearest_neighbor(1, 0.15, 1.0, 0.0).unwrap();
        let d = RangeDecomposition::new(Arc::new(model)).unwrap();
        let b = BoundsReport::compute(&d).unwrap();
        assert!(b.subcritical);
        assert!(b.nstop_tail(1, 10) > b.nstop_tail(1, 20));
        assert!(b.convergence(1, 1.0) > b.convergence(1, 2.0));
        assert!(b.step_cap_bias(10) > b.step_cap_bias(20));
        // truncated kernel: cutting at the true range is free
        assert!(b.range_cut_bias(&d, 1).unwrap().abs() < 1e-14);
    }

    #[test]
    fn partition_ratio_identity_at_psi() {
        let stats = vec![1.0, -1.0, 1.0, 1.0];
        let (d, se) = mc_partition_ratio(&stats, 0.3, 0.3);
        assert_eq!(d, 1.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn mle_recovers_on_exact_frequencies() {
        // stats drawn with P(t = 1) = e^psi cosh-weighted pair frequency
        let psi = 0.25f64;
        let p = psi.exp() / (psi.exp() + (-psi).exp());
        let n = 10_000usize;
        let n1 = (p * n as f64).round() as usize;
        let mut stats = vec![1.0; n1];
        stats.extend(vec![-1.0; n - n1]);
        let t_obs = mean(&stats);
        let grid: Vec<f64> = (0..101).map(|i| -0.5 + i as f64 * 0.015).collect();
        let (theta_hat, _) = mc_mle_grid(&stats, t_obs, &grid, psi);
        assert!((theta_hat - psi).abs() < 0.02, "theta_hat = {theta_hat}");
    }
}
