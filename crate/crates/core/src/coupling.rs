//! Monotone coupling of two spin-flip dynamics on `{-1, +1}`.
//!
//! A lower process (kernel `J`, field `h`) and an upper process (kernel
//! `J'`, field `h'`) update simultaneously at a shared total rate
//! `M = 2 exp(beta (Sigma' + h'))`. The pair of spins at a site is encoded
//! as a single three-letter alphabet:
//!
//! * `-1.0` for `(-1, -1)`, `0.0` for `(-1, +1)`, `+1.0` for `(+1, +1)`;
//!
//! the state `(+1, -1)` never occurs, which is exactly the pointwise order
//! `sigma <= sigma'`. An update paints `(+1,+1)` with the lower process's
//! probability of painting `+1`, `(-1,-1)` with the upper process's
//! probability of painting `-1`, and `(-1,+1)` with the remaining mass.
//! That remainder is nonnegative whenever the upper process dominates the
//! lower one; `sum_j (J'(i,j) - J(i,j)) <= h' - h` is a sufficient
//! condition, and any violation encountered during sampling raises a
//! domination error.
//!
//! Because the pair alphabet is a plain finite state space, the whole
//! perfect-sampling pipeline applies unchanged; both marginals are exact
//! stationary samples of their own dynamics, drawn from one backward sketch.

use std::collections::BTreeMap;

use rand::RngCore;

use crate::decomposition::RangeDecomposition;
use crate::error::{PssimError, Result};
use crate::lattice::{ball_sites, LocalConfig, Site, SparseConfiguration, SpinValue};
use crate::models::kernel::Kernel;
use crate::models::{RateModel, StateSpace};
use crate::stats::binomial_se;

/// Budget on enumerated completions (3^n local pair states).
const PAIR_ENUM_BUDGET: u32 = 13;

/// Encode a valid ordered spin pair.
pub fn encode_pair(lower: f64, upper: f64) -> Result<f64> {
    match (lower as i8, upper as i8) {
        (-1, -1) => Ok(-1.0),
        (-1, 1) => Ok(0.0),
        (1, 1) => Ok(1.0),
        _ => Err(PssimError::Config(format!(
            "({lower}, {upper}) is not an ordered spin pair"
        ))),
    }
}

/// Decode the pair alphabet back into (lower, upper) spins.
pub fn decode_pair(x: f64) -> (f64, f64) {
    if x < -0.5 {
        (-1.0, -1.0)
    } else if x > 0.5 {
        (1.0, 1.0)
    } else {
        (-1.0, 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct CoupledIsingModel {
    beta: f64,
    lower_kernel: Kernel,
    upper_kernel: Kernel,
    lower_field: f64,
    upper_field: f64,
    space: StateSpace,
    mass: f64,
    /// All sites interacting with the origin under either kernel.
    support_range: i64,
}

impl CoupledIsingModel {
    pub fn new(
        beta: f64,
        lower_kernel: Kernel,
        upper_kernel: Kernel,
        lower_field: f64,
        upper_field: f64,
    ) -> Result<Self> {
        if beta < 0.0 {
            return Err(PssimError::Config("beta must be nonnegative".into()));
        }
        if lower_kernel.dimension() != upper_kernel.dimension() {
            return Err(PssimError::Config("kernel dimensions differ".into()));
        }
        if lower_field < 0.0 || upper_field < 0.0 {
            return Err(PssimError::Config("fields must be nonnegative".into()));
        }
        let (ll, lu) = match (lower_kernel.range(), upper_kernel.range()) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(PssimError::Unsupported(
                    "the coupled model needs truncated kernels".into(),
                ))
            }
        };
        let support_range = ll.max(lu);
        let mass =
            2.0 * (beta * (upper_kernel.sigma_total() + upper_field)).exp();
        Ok(CoupledIsingModel {
            beta,
            lower_kernel,
            upper_kernel,
            lower_field,
            upper_field,
            space: StateSpace::Finite {
                values: vec![-1.0, 0.0, 1.0],
                weights: vec![1.0, 1.0, 1.0],
            },
            mass,
            support_range,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Slack of the sufficient domination condition
    /// `sum_j (J'(i,j) - J(i,j)) <= h' - h`; nonnegative means guaranteed.
    pub fn domination_slack(&self) -> f64 {
        (self.upper_field - self.lower_field)
            - (self.upper_kernel.sigma_total() - self.lower_kernel.sigma_total())
    }

    /// The coupled update law at `i` given the local pair configuration:
    /// probabilities of painting `(+1,+1)`, `(-1,-1)` and `(-1,+1)`.
    pub fn update_law(&self, i: &Site, pair: &LocalConfig) -> Result<[f64; 3]> {
        let own = pair
            .get(i)
            .and_then(|v| v.real())
            .ok_or_else(|| PssimError::Unspecified(i.key()))?;
        let (own_lo, own_up) = decode_pair(own);
        let mut s_lo = 0.0;
        let mut s_up = 0.0;
        for (site, val) in pair {
            if site == i {
                continue;
            }
            let jl = self.lower_kernel.eval(i, site);
            let ju = self.upper_kernel.eval(i, site);
            if jl == 0.0 && ju == 0.0 {
                continue;
            }
            let v = val
                .real()
                .ok_or_else(|| PssimError::Unspecified(site.key()))?;
            let (lo, up) = decode_pair(v);
            s_lo += jl * lo;
            s_up += ju * up;
        }
        // flip probabilities of the two marginals under the shared clock
        let q_lo = (-self.beta * own_lo * (s_lo + self.lower_field)).exp() / self.mass;
        let q_up = (-self.beta * own_up * (s_up + self.upper_field)).exp() / self.mass;
        let p_plus = if own_lo < 0.0 { q_lo } else { 1.0 - q_lo };
        let p_minus_upper = if own_up > 0.0 { q_up } else { 1.0 - q_up };
        let middle = (1.0 - p_plus) - p_minus_upper;
        if middle < -1e-12 {
            return Err(PssimError::DominationViolated {
                site: i.key(),
                mass: middle,
            });
        }
        Ok([p_plus, p_minus_upper, middle.max(0.0)])
    }

    fn law_value(&self, i: &Site, pair: &LocalConfig, x: f64) -> Result<f64> {
        let law = self.update_law(i, pair)?;
        Ok(if x > 0.5 {
            law[0]
        } else if x < -0.5 {
            law[1]
        } else {
            law[2]
        })
    }

    /// Enumerate completions of `w` over the unseen interacting sites
    /// (and the own site, when unseen) and return the minimum of
    /// `M * P(x | completion)`.
    fn enumerated_inf(&self, i: &Site, x: f64, k: i64, w: &LocalConfig) -> Result<f64> {
        let mut unseen: Vec<Site> = Vec::new();
        let mut base = LocalConfig::new();
        let relevant = {
            let mut v = ball_sites(i, 0)?; // the own site
            for s in ball_sites(i, self.support_range)? {
                if self.lower_kernel.eval(i, &s) != 0.0 || self.upper_kernel.eval(i, &s) != 0.0 {
                    v.push(s);
                }
            }
            v
        };
        for site in relevant {
            match w.get(&site) {
                Some(v) if k >= 0 && site.l1_distance(i) <= k => {
                    base.insert(site, *v);
                }
                _ => unseen.push(site),
            }
        }
        if unseen.len() as u32 > PAIR_ENUM_BUDGET {
            return Err(PssimError::EnumerationBudget {
                states: 3f64.powi(unseen.len() as i32),
                budget: 3f64.powi(PAIR_ENUM_BUDGET as i32),
            });
        }
        let letters = [-1.0, 0.0, 1.0];
        let combos = 3usize.pow(unseen.len() as u32);
        let mut best = f64::INFINITY;
        for idx in 0..combos {
            let mut cfg = base.clone();
            let mut rem = idx;
            for site in &unseen {
                cfg.insert(site.clone(), SpinValue::Real(letters[rem % 3]));
                rem /= 3;
            }
            let p = self.law_value(i, &cfg, x)?;
            best = best.min(p);
        }
        Ok(best * self.mass)
    }
}

impl RateModel for CoupledIsingModel {
    fn dimension(&self) -> usize {
        self.lower_kernel.dimension()
    }

    fn state_space(&self) -> &StateSpace {
        &self.space
    }

    fn mass_bound(&self, _orbit: usize) -> f64 {
        self.mass
    }

    fn truncation_range(&self) -> Option<i64> {
        Some(self.support_range)
    }

    fn rate(&self, i: &Site, a: &SpinValue, eta: &SparseConfiguration) -> Result<f64> {
        match a {
            SpinValue::Cemetery => Ok(0.0), // the update law has full mass
            SpinValue::Real(x) => {
                if !self.space.contains(*x) {
                    return Err(PssimError::OutsideStateSpace { value: *x });
                }
                let w = eta.restrict(i, self.support_range)?;
                Ok(self.law_value(i, &w, *x)? * self.mass)
            }
        }
    }

    fn local_inf_rate(&self, i: &Site, a: &SpinValue, k: i64, w: &LocalConfig) -> Result<f64> {
        match a {
            SpinValue::Cemetery => Ok(0.0),
            SpinValue::Real(x) => {
                if !self.space.contains(*x) {
                    return Err(PssimError::OutsideStateSpace { value: *x });
                }
                self.enumerated_inf(i, *x, k, w)
            }
        }
    }

    fn alpha(&self, _orbit: usize, k: i64) -> Result<f64> {
        if k >= self.support_range {
            return Ok(self.mass);
        }
        let letters = [-1.0, 0.0, 1.0];
        // the seen sites: the radius-k ball restricted to interacting sites
        // plus the own site (whose current pair state the law depends on)
        let mut seen: Vec<Site> = Vec::new();
        if k >= 0 {
            for s in ball_sites(&i_origin(self.dimension()), k.min(self.support_range))? {
                let o = i_origin(self.dimension());
                if s == o
                    || self.lower_kernel.eval(&o, &s) != 0.0
                    || self.upper_kernel.eval(&o, &s) != 0.0
                {
                    seen.push(s);
                }
            }
        }
        if seen.len() as u32 > PAIR_ENUM_BUDGET {
            return Err(PssimError::EnumerationBudget {
                states: 3f64.powi(seen.len() as i32),
                budget: 3f64.powi(PAIR_ENUM_BUDGET as i32),
            });
        }
        let origin = i_origin(self.dimension());
        let combos = 3usize.pow(seen.len() as u32);
        let mut best = f64::INFINITY;
        for idx in 0..combos {
            let mut w = LocalConfig::new();
            let mut rem = idx;
            for site in &seen {
                w.insert(site.clone(), SpinValue::Real(letters[rem % 3]));
                rem /= 3;
            }
            let mut total = 0.0;
            for x in letters {
                total += self.local_inf_rate(&origin, &SpinValue::Real(x), k, &w)?;
            }
            best = best.min(total);
        }
        Ok(best)
    }
}

fn i_origin(d: usize) -> Site {
    Site::origin(d)
}

/// One coupled replica: exact stationary samples of both marginals from a
/// single backward sketch, guaranteed ordered.
pub struct PairSample {
    pub lower: BTreeMap<Site, f64>,
    pub upper: BTreeMap<Site, f64>,
    pub n_stop: u64,
}

/// Draw a coupled pair of stationary samples on the query window.
pub fn perfect_sample_pair(
    query: &[Site],
    decomp: &RangeDecomposition,
    rng: &mut dyn RngCore,
) -> Result<PairSample> {
    let r = crate::assign::perfect_sample(query, decomp, rng)?;
    let mut lower = BTreeMap::new();
    let mut upper = BTreeMap::new();
    for (site, v) in &r.spins {
        let (lo, up) = decode_pair(*v);
        if lo > up {
            return Err(PssimError::InternalConsistency(format!(
                "order violated at {}",
                site.key()
            )));
        }
        lower.insert(site.clone(), lo);
        upper.insert(site.clone(), up);
    }
    Ok(PairSample {
        lower,
        upper,
        n_stop: r.n_stop,
    })
}

/// Monte-Carlo estimate of the stationary disagreement density between the
/// two marginals.
#[derive(Debug, Clone)]
pub struct DbarEstimate {
    /// Per-site disagreement frequency with its binomial standard error.
    pub per_site: BTreeMap<Site, (f64, f64)>,
    /// Largest per-site disagreement frequency.
    pub sup: f64,
    pub mean_lower: f64,
    pub mean_upper: f64,
    pub replicas: u64,
    /// Replicas where an order violation was observed (always 0 unless the
    /// coupling itself is buggy).
    pub order_violations: u64,
}

/// Estimate the disagreement density over `replicas` coupled samples.
pub fn estimate_dbar(
    query: &[Site],
    decomp: &RangeDecomposition,
    replicas: u64,
    seed: u64,
) -> Result<DbarEstimate> {
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    let mut counts: BTreeMap<Site, u64> = query.iter().map(|s| (s.clone(), 0)).collect();
    let mut sum_lower = 0.0;
    let mut sum_upper = 0.0;
    let mut order_violations = 0u64;
    for r in 0..replicas {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(r);
        let pair = perfect_sample_pair(query, decomp, &mut rng)?;
        for site in query {
            let lo = pair.lower[site];
            let up = pair.upper[site];
            if lo > up {
                order_violations += 1;
            }
            if lo != up {
                *counts.get_mut(site).unwrap() += 1;
            }
            sum_lower += lo;
            sum_upper += up;
        }
    }
    let n = replicas as usize;
    let per_site: BTreeMap<Site, (f64, f64)> = counts
        .into_iter()
        .map(|(s, c)| {
            let p = c as f64 / replicas as f64;
            (s, (p, binomial_se(p, n)))
        })
        .collect();
    let sup = per_site.values().map(|(p, _)| *p).fold(0.0, f64::max);
    let denom = (replicas as f64) * query.len() as f64;
    Ok(DbarEstimate {
        per_site,
        sup,
        mean_lower: sum_lower / denom,
        mean_upper: sum_upper / denom,
        replicas,
        order_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::kernel::KernelSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::sync::Arc;

    fn pair_model(beta: f64, h_lo: f64, h_up: f64) -> CoupledIsingModel {
        let k1 = Kernel::new(1, KernelSpec::Nn { value: 1.0 }).unwrap();
        let k2 = Kernel::new(1, KernelSpec::Nn { value: 1.0 }).unwrap();
        CoupledIsingModel::new(beta, k1, k2, h_lo, h_up).unwrap()
    }

    #[test]
    fn update_law_is_a_probability() {
        let m = pair_model(0.06, 0.0, 0.2);
        let i = Site::at(0);
        let letters = [-1.0, 0.0, 1.0];
        for a in letters {
            for b in letters {
                for c in letters {
                    let mut w = LocalConfig::new();
                    w.insert(Site::at(-1), SpinValue::Real(a));
                    w.insert(Site::at(0), SpinValue::Real(b));
                    w.insert(Site::at(1), SpinValue::Real(c));
                    let law = m.update_law(&i, &w).unwrap();
                    let total: f64 = law.iter().sum();
                    assert!((total - 1.0).abs() < 1e-12);
                    assert!(law.iter().all(|p| *p >= 0.0));
                }
            }
        }
    }

    #[test]
    fn identical_marginals_never_disagree() {
        // equal kernels and fields: the middle letter has zero mass always
        let m = pair_model(0.1, 0.0, 0.0);
        let i = Site::at(0);
        let mut w = LocalConfig::new();
        w.insert(Site::at(-1), SpinValue::Real(1.0));
        w.insert(Site::at(0), SpinValue::Real(-1.0));
        w.insert(Site::at(1), SpinValue::Real(-1.0));
        let law = m.update_law(&i, &w).unwrap();
        assert!(law[2].abs() < 1e-14);
    }

    #[test]
    fn domination_slack_sign() {
        assert!(pair_model(0.06, 0.0, 0.2).domination_slack() >= 0.0);
        let k1 = Kernel::new(1, KernelSpec::Nn { value: 1.0 }).unwrap();
        let k2 = Kernel::new(1, KernelSpec::Nn { value: 1.5 }).unwrap();
        let m = CoupledIsingModel::new(0.1, k1, k2, 0.0, 0.2).unwrap();
        assert!(m.domination_slack() < 0.0);
    }

    #[test]
    fn pair_sampling_is_ordered_and_subcritical() {
        let m = pair_model(0.06, 0.0, 0.2);
        let d = RangeDecomposition::new(Arc::new(m)).unwrap();
        let c = d.criticality().unwrap();
        assert!(c.is_subcritical(), "gamma = {}", c.gamma());
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..50 {
            let pair = perfect_sample_pair(&[Site::at(0)], &d, &mut rng).unwrap();
            let lo = pair.lower[&Site::at(0)];
            let up = pair.upper[&Site::at(0)];
            assert!(lo <= up);
        }
    }

    #[test]
    fn identical_pair_dbar_is_zero() {
        let m = pair_model(0.1, 0.0, 0.0);
        let d = RangeDecomposition::new(Arc::new(m)).unwrap();
        let est = estimate_dbar(&[Site::at(0)], &d, 200, 3).unwrap();
        assert_eq!(est.sup, 0.0);
        assert_eq!(est.order_violations, 0);
    }
}
