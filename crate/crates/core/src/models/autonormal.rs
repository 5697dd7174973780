//! Conditional-Gaussian model on `A = [0, 1]`: the rate of repainting site
//! `i` to color `a` is the truncated-normal density
//! `f(a; mu) = phi((a - mu)/sd) / (sd Z(mu))` with `mu = sum_j J(i,j) eta(j)`,
//! `Z(mu)` the normalizing mass of the Gaussian on [0, 1].
//!
//! Since the total repaint rate is one for every configuration, the mass
//! bound is `M = 1` and the cemetery rate vanishes identically.
//!
//! `log f(a; mu)` is unimodal in `mu` for fixed `a`, so the infimum of the
//! density over `mu` in `[mu_lo, mu_hi]` is attained at an endpoint:
//! `c^{[k]}(a | w) = min(f(a; mu_lo), f(a; mu_hi))` with `mu_lo = S_w` and
//! `mu_hi = S_w + S^{>k}` (the kernel is nonnegative and spins live in
//! [0, 1]). The two densities cross exactly once in `(0, 1)`, which gives a
//! closed form for the conditional masses; the ladder infimum over `S_w`
//! is a one-dimensional minimization solved by grid + golden-section search.

use rand::{Rng, RngCore};

use crate::error::{PssimError, Result};
use crate::lattice::{restrict_local, LocalConfig, Site, SparseConfiguration, SpinValue};
use crate::models::kernel::Kernel;
use crate::models::{RateModel, StateSpace, REJECTION_CAP};
use crate::stats::{norm_cdf_diff, phi, truncnorm_inv};

#[derive(Debug, Clone)]
pub struct AutonormalModel {
    kernel: Kernel,
    sd: f64,
    space: StateSpace,
}

/// A Gaussian branch truncated to [0, 1]: mean and its normalizing mass.
#[derive(Debug, Clone, Copy)]
struct Branch {
    mu: f64,
    z: f64,
}

impl AutonormalModel {
    pub fn new(kernel: Kernel, sd: f64) -> Result<Self> {
        if sd <= 0.0 {
            return Err(PssimError::Config("sd must be positive".into()));
        }
        if kernel.range().is_none() {
            return Err(PssimError::Unsupported(
                "the conditional-Gaussian model needs a truncated kernel".into(),
            ));
        }
        Ok(AutonormalModel {
            kernel,
            sd,
            space: StateSpace::Interval { lo: 0.0, hi: 1.0 },
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    fn branch(&self, mu: f64) -> Branch {
        Branch {
            mu,
            z: norm_cdf_diff((0.0 - mu) / self.sd, (1.0 - mu) / self.sd),
        }
    }

    /// Truncated-normal density at `a` for the given branch.
    fn density(&self, a: f64, b: &Branch) -> f64 {
        phi((a - b.mu) / self.sd) / (self.sd * b.z)
    }

    fn field_sum(&self, i: &Site, w: &LocalConfig) -> Result<f64> {
        let mut s = 0.0;
        for (site, val) in w {
            let j = self.kernel.eval(i, site);
            if j != 0.0 {
                let v = val
                    .real()
                    .ok_or_else(|| PssimError::Unspecified(site.key()))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(PssimError::OutsideStateSpace { value: v });
                }
                s += j * v;
            }
        }
        Ok(s)
    }

    /// The unique crossing point of the two branch densities in (0, 1),
    /// clamped to the interval.
    fn crossing(&self, lo: &Branch, hi: &Branch) -> f64 {
        if hi.mu - lo.mu < 1e-14 {
            return 1.0;
        }
        let x = 0.5 * (lo.mu + hi.mu)
            - self.sd * self.sd / (hi.mu - lo.mu) * (lo.z / hi.z).ln();
        x.clamp(0.0, 1.0)
    }

    /// `int_0^1 min(f(a; mu_lo), f(a; mu_hi)) da`: below the crossing the
    /// upper branch is smaller, above it the lower branch is.
    fn envelope_mass(&self, lo: &Branch, hi: &Branch) -> f64 {
        if hi.mu - lo.mu < 1e-14 {
            return 1.0;
        }
        let x = self.crossing(lo, hi);
        let upper_part = norm_cdf_diff((0.0 - hi.mu) / self.sd, (x - hi.mu) / self.sd) / hi.z;
        let lower_part = norm_cdf_diff((x - lo.mu) / self.sd, (1.0 - lo.mu) / self.sd) / lo.z;
        (upper_part + lower_part).min(1.0)
    }

    /// Conditional mass as a function of the seen field sum.
    fn mass_at(&self, s_w: f64, tail: f64) -> f64 {
        let lo = self.branch(s_w);
        let hi = self.branch(s_w + tail);
        self.envelope_mass(&lo, &hi)
    }

    fn bounds(&self, i: &Site, k: i64, w: &LocalConfig) -> Result<(Branch, Branch)> {
        let (s_w, tail) = if k < 0 {
            (0.0, self.kernel.sigma_total())
        } else {
            (self.field_sum(i, w)?, self.kernel.sum_gt(k))
        };
        Ok((self.branch(s_w), self.branch(s_w + tail)))
    }

    /// Draw from the density proportional to `min(f(.; lo), f(.; hi))`.
    fn sample_envelope(&self, lo: &Branch, hi: &Branch, rng: &mut dyn RngCore) -> f64 {
        if hi.mu - lo.mu < 1e-14 {
            return truncnorm_inv(rng.gen(), lo.mu, self.sd, 0.0, 1.0);
        }
        let x = self.crossing(lo, hi);
        let upper_part = norm_cdf_diff((0.0 - hi.mu) / self.sd, (x - hi.mu) / self.sd) / hi.z;
        let lower_part = norm_cdf_diff((x - lo.mu) / self.sd, (1.0 - lo.mu) / self.sd) / lo.z;
        if rng.gen::<f64>() * (upper_part + lower_part) < upper_part {
            truncnorm_inv(rng.gen(), hi.mu, self.sd, 0.0, x)
        } else {
            truncnorm_inv(rng.gen(), lo.mu, self.sd, x, 1.0)
        }
    }
}

impl RateModel for AutonormalModel {
    fn dimension(&self) -> usize {
        self.kernel.dimension()
    }

    fn state_space(&self) -> &StateSpace {
        &self.space
    }

    fn mass_bound(&self, _orbit: usize) -> f64 {
        1.0
    }

    fn truncation_range(&self) -> Option<i64> {
        self.kernel.range()
    }

    fn rate(&self, i: &Site, a: &SpinValue, eta: &SparseConfiguration) -> Result<f64> {
        let support = self.kernel.support_sites(i)?;
        let mut mu = 0.0;
        for j in &support {
            mu += self.kernel.eval(i, j) * eta.real_at(j)?;
        }
        match a {
            SpinValue::Real(v) => {
                if !self.space.contains(*v) {
                    return Err(PssimError::OutsideStateSpace { value: *v });
                }
                let b = self.branch(mu);
                Ok(self.density(*v, &b))
            }
            // total repaint mass is one for every configuration
            SpinValue::Cemetery => Ok(0.0),
        }
    }

    fn local_inf_rate(&self, i: &Site, a: &SpinValue, k: i64, w: &LocalConfig) -> Result<f64> {
        match a {
            SpinValue::Real(v) => {
                if !self.space.contains(*v) {
                    return Err(PssimError::OutsideStateSpace { value: *v });
                }
                let (lo, hi) = self.bounds(i, k, w)?;
                Ok(self.density(*v, &lo).min(self.density(*v, &hi)))
            }
            SpinValue::Cemetery => Ok(0.0),
        }
    }

    fn alpha(&self, _orbit: usize, k: i64) -> Result<f64> {
        if k < 0 {
            return Ok(self.mass_at(0.0, self.kernel.sigma_total()));
        }
        if let Some(l) = self.kernel.range() {
            if k >= l {
                return Ok(1.0);
            }
        }
        let tail = self.kernel.sum_gt(k);
        let s_max = self.kernel.sum_leq(k);
        if s_max == 0.0 {
            return Ok(self.mass_at(0.0, tail));
        }
        // one-dimensional minimization over the seen field sum in [0, s_max]
        let grid = 257usize;
        let mut best_s = 0.0;
        let mut best = f64::INFINITY;
        for idx in 0..=grid {
            let s = s_max * idx as f64 / grid as f64;
            let v = self.mass_at(s, tail);
            if v < best {
                best = v;
                best_s = s;
            }
        }
        // golden-section refinement in a bracket around the grid minimum
        let step = s_max / grid as f64;
        let (mut a, mut b) = ((best_s - step).max(0.0), (best_s + step).min(s_max));
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (self.mass_at(c, tail), self.mass_at(d, tail));
        for _ in 0..200 {
            if b - a < 1e-13 * s_max.max(1.0) {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = self.mass_at(c, tail);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = self.mass_at(d, tail);
            }
        }
        Ok(best.min(fc).min(fd))
    }

    fn conditional_mass(&self, i: &Site, k: i64, w: &LocalConfig) -> Result<f64> {
        if k < 0 {
            return self.alpha(0, -1);
        }
        let (lo, hi) = self.bounds(i, k, w)?;
        Ok(self.envelope_mass(&lo, &hi))
    }

    fn sample_base(&self, _i: &Site, rng: &mut dyn RngCore) -> Result<f64> {
        let lo = self.branch(0.0);
        let hi = self.branch(self.kernel.sigma_total());
        Ok(self.sample_envelope(&lo, &hi, rng))
    }

    fn sample_increment(
        &self,
        i: &Site,
        m: i64,
        w: &LocalConfig,
        rng: &mut dyn RngCore,
    ) -> Result<SpinValue> {
        // no cemetery mass anywhere: the increment is a density on [0, 1]
        let (lo, hi) = self.bounds(i, m, w)?;
        let (lo_prev, hi_prev) = if m == 0 {
            self.bounds(i, -1, &LocalConfig::new())?
        } else {
            let inner = restrict_local(w, i, m - 1)?;
            self.bounds(i, m - 1, &inner)?
        };
        // rejection against the mixture (f_lo + f_hi)/2, which dominates the
        // envelope difference pointwise
        for _ in 0..REJECTION_CAP {
            let a = if rng.gen::<f64>() < 0.5 {
                truncnorm_inv(rng.gen(), lo.mu, self.sd, 0.0, 1.0)
            } else {
                truncnorm_inv(rng.gen(), hi.mu, self.sd, 0.0, 1.0)
            };
            let num = self.density(a, &lo).min(self.density(a, &hi))
                - self.density(a, &lo_prev).min(self.density(a, &hi_prev));
            let den = self.density(a, &lo) + self.density(a, &hi);
            if num > 0.0 && rng.gen::<f64>() * den < num {
                return Ok(SpinValue::Real(a));
            }
        }
        Err(PssimError::RejectionCapExceeded {
            attempts: REJECTION_CAP,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::kernel::KernelSpec;
    use crate::quad::integrate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn model(j: f64, sd: f64) -> AutonormalModel {
        let k = Kernel::new(1, KernelSpec::Nn { value: j }).unwrap();
        AutonormalModel::new(k, sd).unwrap()
    }

    #[test]
    fn total_rate_is_one() {
        let m = model(0.2, 0.3);
        let i = Site::at(0);
        let mut cfg = SparseConfiguration::all_cemetery();
        cfg.set(Site::at(-1), SpinValue::Real(0.8));
        cfg.set(Site::at(1), SpinValue::Real(0.1));
        let total = integrate(
            |a| m.rate(&i, &SpinValue::Real(a), &cfg).unwrap(),
            0.0,
            1.0,
            1e-10,
        );
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn envelope_mass_matches_quadrature() {
        let m = model(0.2, 0.25);
        let i = Site::at(0);
        let mut cfg = SparseConfiguration::all_cemetery();
        cfg.set(Site::at(-1), SpinValue::Real(0.6));
        cfg.set(Site::at(0), SpinValue::Real(0.5));
        cfg.set(Site::at(1), SpinValue::Real(0.3));
        // k = 0: only the own site is seen, neighbors unseen
        let w = cfg.restrict(&i, 0).unwrap();
        let got = m.conditional_mass(&i, 0, &w).unwrap();
        let q = integrate(
            |a| m.local_inf_rate(&i, &SpinValue::Real(a), 0, &w).unwrap(),
            0.0,
            1.0,
            1e-10,
        );
        assert!((got - q).abs() < 1e-8, "got {got} quad {q}");
    }

    #[test]
    fn alpha_matches_quadrature_minimum() {
        let m = model(0.15, 0.3);
        let a0 = m.alpha(0, 0).unwrap();
        // k = 0 leaves no seen field: mass_at(0, S>0)
        let q = integrate(
            |a| {
                m.local_inf_rate(&i0(), &SpinValue::Real(a), -1, &LocalConfig::new())
                    .unwrap()
            },
            0.0,
            1.0,
            1e-10,
        );
        assert!((a0 - q).abs() < 1e-8);
        assert!((m.alpha(0, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    fn i0() -> Site {
        Site::at(0)
    }

    #[test]
    fn zero_kernel_base_is_truncated_normal() {
        let m = model(0.0, 0.4);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let n = 20000;
        let mut acc = 0.0;
        for _ in 0..n {
            let a = m.sample_base(&Site::at(0), &mut rng).unwrap();
            assert!((0.0..=1.0).contains(&a));
            acc += a;
        }
        let expect = crate::stats::truncnorm_mean(0.0, 0.4, 0.0, 1.0);
        assert!((acc / n as f64 - expect).abs() < 0.01);
    }
}
