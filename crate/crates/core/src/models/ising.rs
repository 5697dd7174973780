//! Finite-alphabet exponential-rate model: `c_i(a, eta) = exp(beta * a * H)`
//! with local field `H = sum_j J(i,j) eta(j) + h_i`.
//!
//! All local infima have closed forms:
//! * for a real color `a`, the infimum over unseen sites decouples per site,
//!   giving `exp(beta * (a (S_w + h) + min_s(a s) * S^{>k}))`;
//! * for the cemetery, `g(H) = sum_a w_a e^{beta a H}` is convex in `H`, so
//!   the supremum over the attainable interval of `H` sits at an endpoint.
//!
//! The ladder infimum over boundary conditions reduces to a closed form for
//! a symmetric two-point alphabet and to a finite enumeration of attainable
//! field sums otherwise.

use crate::error::{PssimError, Result};
use crate::lattice::{shell_counts, LocalConfig, Site, SparseConfiguration, SpinValue};
use crate::models::kernel::Kernel;
use crate::models::{FieldSpec, RateModel, StateSpace};

/// Default budget on enumerated boundary conditions per ladder entry.
const ENUM_BUDGET: f64 = 2e6;

#[derive(Debug, Clone)]
pub struct IsingModel {
    beta: f64,
    kernel: Kernel,
    field: FieldSpec,
    space: StateSpace,
    /// Per-orbit uniform mass bound.
    mass: Vec<f64>,
}

impl IsingModel {
    pub fn new(beta: f64, kernel: Kernel, field: FieldSpec, space: StateSpace) -> Result<Self> {
        space.validate()?;
        field.validate()?;
        if !matches!(space, StateSpace::Finite { .. }) {
            return Err(PssimError::Config(
                "the exponential-rate model needs a finite alphabet".into(),
            ));
        }
        if beta < 0.0 {
            return Err(PssimError::Config("beta must be nonnegative".into()));
        }
        let mut model = IsingModel {
            beta,
            kernel,
            field,
            space,
            mass: Vec::new(),
        };
        model.mass = (0..model.field.num_orbits())
            .map(|orbit| {
                let h = model.field.orbit_value(orbit);
                let sigma = model.kernel.sigma_total();
                let lo = h + model.space.min_value() * sigma;
                let hi = h + model.space.max_value() * sigma;
                model.g(lo).max(model.g(hi))
            })
            .collect();
        Ok(model)
    }

    /// Two-point symmetric alphabet, nearest-neighbor coupling `j`, constant
    /// field `h`: the workhorse configuration.
    pub fn nearest_neighbor(d: usize, beta: f64, j: f64, h: f64) -> Result<Self> {
        let kernel = Kernel::new(d, crate::models::kernel::KernelSpec::Nn { value: j })?;
        let field = if h == 0.0 {
            FieldSpec::None
        } else {
            FieldSpec::Constant { value: h }
        };
        let space = StateSpace::Finite {
            values: vec![-1.0, 1.0],
            weights: vec![1.0, 1.0],
        };
        IsingModel::new(beta, kernel, field, space)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    fn values_weights(&self) -> (&[f64], &[f64]) {
        match &self.space {
            StateSpace::Finite { values, weights } => (values, weights),
            _ => unreachable!("constructor enforces a finite alphabet"),
        }
    }

    /// `g(H) = sum_a w_a exp(beta a H)`, the total real-color rate mass.
    fn g(&self, h_field: f64) -> f64 {
        let (values, weights) = self.values_weights();
        values
            .iter()
            .zip(weights)
            .map(|(v, w)| w * (self.beta * v * h_field).exp())
            .sum()
    }

    /// `min_{s in A} a * s`.
    fn min_product(&self, a: f64) -> f64 {
        if a >= 0.0 {
            a * self.space.min_value()
        } else {
            a * self.space.max_value()
        }
    }

    /// Kernel-weighted sum of `w` around `i` (sites beyond the ball or with
    /// zero coupling contribute nothing).
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

    /// The conditional-mass integrand as a function of the seen field sum.
    fn mass_at(&self, orbit: usize, s_w: f64, tail: f64) -> f64 {
        let h = self.field.orbit_value(orbit);
        let (values, weights) = self.values_weights();
        let mut real = 0.0;
        for (v, wt) in values.iter().zip(weights) {
            real += wt * (self.beta * (v * (s_w + h) + self.min_product(*v) * tail)).exp();
        }
        let lo = s_w + h + self.space.min_value() * tail;
        let hi = s_w + h + self.space.max_value() * tail;
        let cemetery = (self.mass[orbit] - self.g(lo).max(self.g(hi))).max(0.0);
        real + cemetery
    }

    /// All attainable values of the seen field sum over boundary conditions
    /// on the radius-`k` ball, shell by shell.
    fn attainable_sums(&self, k: i64) -> Result<Vec<f64>> {
        let (values, _) = self.values_weights();
        let counts = shell_counts(self.kernel.dimension(), k);
        let mut sums = vec![0.0f64];
        for (m, c) in counts.iter().enumerate().skip(1) {
            let jm = self.kernel.shell_value(m as i64);
            if jm == 0.0 {
                continue;
            }
            let shell = multiset_sums(values, *c as u64)?;
            let mut next = Vec::with_capacity(sums.len() * shell.len());
            if (sums.len() * shell.len()) as f64 > ENUM_BUDGET {
                return Err(PssimError::EnumerationBudget {
                    states: (sums.len() * shell.len()) as f64,
                    budget: ENUM_BUDGET,
                });
            }
            for s in &sums {
                for t in &shell {
                    next.push(s + jm * t);
                }
            }
            // deduplicate to keep the cross product small
            next.sort_by(|a, b| a.partial_cmp(b).unwrap());
            next.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
            sums = next;
        }
        Ok(sums)
    }
}

/// All distinct sums of `n` draws (with repetition, order ignored) from
/// `values`.
fn multiset_sums(values: &[f64], n: u64) -> Result<Vec<f64>> {
    let mut sums = vec![0.0f64];
    for _ in 0..n {
        let mut next: Vec<f64> = sums
            .iter()
            .flat_map(|s| values.iter().map(move |v| s + v))
            .collect();
        next.sort_by(|a, b| a.partial_cmp(b).unwrap());
        next.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        if next.len() as f64 > ENUM_BUDGET {
            return Err(PssimError::EnumerationBudget {
                states: next.len() as f64,
                budget: ENUM_BUDGET,
            });
        }
        sums = next;
    }
    Ok(sums)
}

impl RateModel for IsingModel {
    fn dimension(&self) -> usize {
        self.kernel.dimension()
    }

    fn state_space(&self) -> &StateSpace {
        &self.space
    }

    fn num_orbits(&self) -> usize {
        self.field.num_orbits()
    }

    fn orbit_of(&self, site: &Site) -> usize {
        self.field.orbit_of(site)
    }

    fn mass_bound(&self, orbit: usize) -> f64 {
        self.mass[orbit]
    }

    fn truncation_range(&self) -> Option<i64> {
        self.kernel.range()
    }

    fn rate(&self, i: &Site, a: &SpinValue, eta: &SparseConfiguration) -> Result<f64> {
        let support = self.kernel.support_sites(i)?;
        let mut h = self.field.at(i);
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
            SpinValue::Cemetery => {
                Ok((self.mass[self.orbit_of(i)] - self.g(h)).max(0.0))
            }
        }
    }

    fn local_inf_rate(&self, i: &Site, a: &SpinValue, k: i64, w: &LocalConfig) -> Result<f64> {
        let orbit = self.orbit_of(i);
        let h = self.field.orbit_value(orbit);
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
                Ok((self.beta * (v * (s_w + h) + self.min_product(*v) * tail)).exp())
            }
            SpinValue::Cemetery => {
                if k < 0 {
                    return Ok(0.0);
                }
                let lo = s_w + h + self.space.min_value() * tail;
                let hi = s_w + h + self.space.max_value() * tail;
                Ok((self.mass[orbit] - self.g(lo).max(self.g(hi))).max(0.0))
            }
        }
    }

    fn alpha(&self, orbit: usize, k: i64) -> Result<f64> {
        let h = self.field.orbit_value(orbit);
        if k < 0 {
            let sigma = self.kernel.sigma_total();
            let (values, weights) = self.values_weights();
            return Ok(values
                .iter()
                .zip(weights)
                .map(|(v, wt)| wt * (self.beta * (v * h + self.min_product(*v) * sigma)).exp())
                .sum());
        }
        if let Some(l) = self.kernel.range() {
            if k >= l {
                return Ok(self.mass[orbit]);
            }
        }
        let tail = self.kernel.sum_gt(k);
        if let Some(s) = self.space.symmetric_two_point() {
            // the mass is even and decreasing in |S_w + h|, so the infimum
            // over boundary conditions sits at the fully aligned one
            let s_w = s * self.kernel.sum_leq(k);
            return Ok(self.mass_at(orbit, s_w, tail));
        }
        let mut best = f64::INFINITY;
        for s_w in self.attainable_sums(k)? {
            best = best.min(self.mass_at(orbit, s_w, tail));
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nn_model(beta: f64) -> IsingModel {
        IsingModel::nearest_neighbor(1, beta, 1.0, 0.0).unwrap()
    }

    #[test]
    fn mass_bound_nn() {
        let m = nn_model(0.15);
        assert!((m.mass_bound(0) - 2.0 * (0.3f64).cosh()).abs() < 1e-14);
    }

    #[test]
    fn ladder_values_nn() {
        let beta = 0.15f64;
        let m = nn_model(beta);
        let a_minus = m.alpha(0, -1).unwrap();
        let a0 = m.alpha(0, 0).unwrap();
        let a1 = m.alpha(0, 1).unwrap();
        assert!((a_minus - 2.0 * (-2.0 * beta).exp()).abs() < 1e-14);
        assert!((a0 - a_minus).abs() < 1e-14); // rate ignores the own spin
        assert!((a1 - m.mass_bound(0)).abs() < 1e-14); // range-1 kernel saturates
    }

    #[test]
    fn symmetric_shortcut_matches_enumeration() {
        let m = nn_model(0.3);
        // force the general enumeration path and compare with the shortcut
        let tail = m.kernel.sum_gt(1);
        let brute = m
            .attainable_sums(1)
            .unwrap()
            .into_iter()
            .map(|s| m.mass_at(0, s, tail))
            .fold(f64::INFINITY, f64::min);
        assert!((brute - m.alpha(0, 1).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn local_inf_monotone_in_radius() {
        let beta = 0.2;
        let m = nn_model(beta);
        let i = Site::at(0);
        let mut cfg = SparseConfiguration::all_cemetery();
        cfg.set(Site::at(-1), SpinValue::Real(1.0));
        cfg.set(Site::at(1), SpinValue::Real(-1.0));
        let w0 = cfg.restrict(&i, 0).unwrap();
        let w1 = cfg.restrict(&i, 1).unwrap();
        for a in [-1.0, 1.0] {
            let c_base = m
                .local_inf_rate(&i, &SpinValue::Real(a), -1, &LocalConfig::new())
                .unwrap();
            let c0 = m.local_inf_rate(&i, &SpinValue::Real(a), 0, &w0).unwrap();
            let c1 = m.local_inf_rate(&i, &SpinValue::Real(a), 1, &w1).unwrap();
            assert!(c_base <= c0 + 1e-14);
            assert!(c0 <= c1 + 1e-14);
        }
    }

    #[test]
    fn rate_matches_local_inf_at_full_range() {
        let m = nn_model(0.25);
        let i = Site::at(0);
        let mut cfg = SparseConfiguration::all_cemetery();
        cfg.set(Site::at(-1), SpinValue::Real(1.0));
        cfg.set(Site::at(1), SpinValue::Real(1.0));
        let w = cfg.restrict(&i, 1).unwrap();
        for a in [SpinValue::Real(-1.0), SpinValue::Real(1.0), SpinValue::Cemetery] {
            let r = m.rate(&i, &a, &cfg).unwrap();
            let c = m.local_inf_rate(&i, &a, 1, &w).unwrap();
            assert!((r - c).abs() < 1e-14, "{a:?}");
        }
    }
}
