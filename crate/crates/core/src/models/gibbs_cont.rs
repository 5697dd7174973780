//! Continuous-spin exponential-rate model on `A = [-1, 1]` with Lebesgue
//! reference measure: `c_i(a, eta) = exp(beta * a * H)`, local field
//! `H = sum_j J(i,j) eta(j)`.
//!
//! With `E(c) = (e^c - 1)/c = int_0^1 e^{ca} da`, every mass has a closed
//! form in terms of `G(x) = E(beta x) + E(-beta x)`:
//! * total mass `M = G(Sigma)`,
//! * local infima `c^{[k]}(a|w) = exp(beta a S_w - beta |a| S^{>k})`,
//! * cemetery infima `c^{[k]}(cem|w) = M - G(|S_w| + S^{>k})`,
//! * ladder `alpha(k) = M + E(beta (S^{<=k} - S^{>k})) - E(beta Sigma)`.
//!
//! The adaptive quadrature in `quad` provides an independent integration
//! route used by the verification suites.

use rand::{Rng, RngCore};

use crate::error::{PssimError, Result};
use crate::lattice::{restrict_local, LocalConfig, Site, SparseConfiguration, SpinValue};
use crate::models::kernel::Kernel;
use crate::models::{RateModel, StateSpace, REJECTION_CAP};
use crate::stats::expint;

#[derive(Debug, Clone)]
pub struct GibbsContModel {
    beta: f64,
    kernel: Kernel,
    space: StateSpace,
    mass: f64,
}

impl GibbsContModel {
    pub fn new(beta: f64, kernel: Kernel) -> Result<Self> {
        if beta < 0.0 {
            return Err(PssimError::Config("beta must be nonnegative".into()));
        }
        let space = StateSpace::Interval { lo: -1.0, hi: 1.0 };
        let sigma = kernel.sigma_total();
        let mass = g_mass(beta, sigma);
        Ok(GibbsContModel {
            beta,
            kernel,
            space,
            mass,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    fn field_sum(&self, i: &Site, w: &LocalConfig) -> Result<f64> {
        let mut s = 0.0;
        for (site, val) in w {
            let j = self.kernel.eval(i, site);
            if j != 0.0 {
                let v = val
                    .real()
                    .ok_or_else(|| PssimError::Unspecified(site.key()))?;
                s += j * v;
            }
        }
        Ok(s)
    }

    /// Real-color mass of `c^{[k]}(. | S_w)`:
    /// `int_{-1}^{1} e^{beta a S_w - beta |a| tail} da`.
    fn real_mass(&self, s_w: f64, tail: f64) -> f64 {
        expint(self.beta * (s_w - tail)) + expint(self.beta * (-s_w - tail))
    }

    /// Cemetery mass of `c^{[k]}(. | S_w)`.
    fn cemetery_mass(&self, s_w: f64, tail: f64) -> f64 {
        (self.mass - g_mass(self.beta, s_w.abs() + tail)).max(0.0)
    }
}

/// `G(x) = int_{-1}^{1} e^{beta a x} da`.
fn g_mass(beta: f64, x: f64) -> f64 {
    expint(beta * x) + expint(-beta * x)
}

impl RateModel for GibbsContModel {
    fn dimension(&self) -> usize {
        self.kernel.dimension()
    }

    fn state_space(&self) -> &StateSpace {
        &self.space
    }

    fn mass_bound(&self, _orbit: usize) -> f64 {
        self.mass
    }

    fn truncation_range(&self) -> Option<i64> {
        self.kernel.range()
    }

    fn rate(&self, i: &Site, a: &SpinValue, eta: &SparseConfiguration) -> Result<f64> {
        let support = self.kernel.support_sites(i)?;
        let mut h = 0.0;
        for j in &support {
            h += self.kernel.eval(i, j) * eta.real_at(j)?;
        }
        match a {
            SpinValue::Real(v) => {
                if !self.space.contains(*v) {
                    return Err(PssimError::OutsideStateSpace { value: *v });
                }
                Ok((self.beta * v * h).exp())
            }
            SpinValue::Cemetery => Ok((self.mass - g_mass(self.beta, h)).max(0.0)),
        }
    }

    fn local_inf_rate(&self, i: &Site, a: &SpinValue, k: i64, w: &LocalConfig) -> Result<f64> {
        let (s_w, tail) = if k < 0 {
            (0.0, self.kernel.sigma_total())
        } else {
            (self.field_sum(i, w)?, self.kernel.sum_gt(k))
        };
        match a {
            SpinValue::Real(v) => {
                if !self.space.contains(*v) {
                    return Err(PssimError::OutsideStateSpace { value: *v });
                }
                Ok((self.beta * (v * s_w - v.abs() * tail)).exp())
            }
            SpinValue::Cemetery => {
                if k < 0 {
                    Ok(0.0)
                } else {
                    Ok(self.cemetery_mass(s_w, tail))
                }
            }
        }
    }

    fn alpha(&self, _orbit: usize, k: i64) -> Result<f64> {
        let sigma = self.kernel.sigma_total();
        if k < 0 {
            return Ok(2.0 * expint(-self.beta * sigma));
        }
        if let Some(l) = self.kernel.range() {
            if k >= l {
                return Ok(self.mass);
            }
        }
        // The conditional mass is decreasing in |S_w|; the infimum over
        // boundary conditions is at the fully aligned one, S_w = S^{<=k}.
        let leq = self.kernel.sum_leq(k);
        let gt = self.kernel.sum_gt(k);
        Ok(self.mass + expint(self.beta * (leq - gt)) - expint(self.beta * sigma))
    }

    fn conditional_mass(&self, i: &Site, k: i64, w: &LocalConfig) -> Result<f64> {
        if k < 0 {
            return self.alpha(0, -1);
        }
        let s_w = self.field_sum(i, w)?;
        let tail = self.kernel.sum_gt(k);
        Ok(self.real_mass(s_w, tail) + self.cemetery_mass(s_w, tail))
    }

    fn sample_base(&self, _i: &Site, rng: &mut dyn RngCore) -> Result<f64> {
        // density proportional to exp(-beta Sigma |a|) on [-1, 1]
        let c = self.beta * self.kernel.sigma_total();
        let sign = if rng.gen::<f64>() < 0.5 { -1.0 } else { 1.0 };
        let u: f64 = rng.gen();
        let t = if c < 1e-12 {
            u
        } else {
            -(1.0 - u * (1.0 - (-c).exp())).ln() / c
        };
        Ok(sign * t.clamp(0.0, 1.0))
    }

    fn sample_increment(
        &self,
        i: &Site,
        m: i64,
        w: &LocalConfig,
        rng: &mut dyn RngCore,
    ) -> Result<SpinValue> {
        let s_w = self.field_sum(i, w)?;
        let tail = self.kernel.sum_gt(m);
        let (s_prev, tail_prev) = if m == 0 {
            (0.0, self.kernel.sigma_total())
        } else {
            let inner = restrict_local(w, i, m - 1)?;
            (self.field_sum(i, &inner)?, self.kernel.sum_gt(m - 1))
        };
        let real = self.real_mass(s_w, tail) - self.real_mass(s_prev, tail_prev);
        let mut cem = self.cemetery_mass(s_w, tail) - self.cemetery_mass(s_prev, tail_prev);
        if m == 0 {
            // the base layer carries no cemetery mass, so the whole k=0
            // cemetery infimum is an increment
            cem = self.cemetery_mass(s_w, tail);
        }
        let total = real + cem;
        if real < -1e-9 || cem < -1e-9 || !(total > 0.0) {
            return Err(PssimError::InternalConsistency(format!(
                "increment masses real={real} cemetery={cem} at layer {m}"
            )));
        }
        if rng.gen::<f64>() * total < cem.max(0.0) {
            return Ok(SpinValue::Cemetery);
        }
        // rejection for the real part: Delta(a) <= c^{[m]}(a | w) <= bound
        let bound = 1.0f64
            .max((self.beta * (s_w - tail)).exp())
            .max((self.beta * (-s_w - tail)).exp());
        for _ in 0..REJECTION_CAP {
            let a = -1.0 + 2.0 * rng.gen::<f64>();
            let d = self.increment_density(i, m, &SpinValue::Real(a), w)?;
            if rng.gen::<f64>() * bound < d {
                return Ok(SpinValue::Real(a));
            }
        }
        Err(PssimError::RejectionCapExceeded {
            attempts: REJECTION_CAP,
        })
    }
}
