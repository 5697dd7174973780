//! Rate models: spin systems given by bounded flip/update rates `c_i(a, eta)`
//! together with the local-infimum quantities the convex decomposition needs.
//!
//! A model exposes, per translation orbit of sites:
//! * a uniform mass bound `M` with `sup_eta c_i(A*, eta) = M`,
//! * the fixed ladder `alpha(k) = inf_w integral c^{[k]}(. | w)`,
//! * pointwise local infima `c^{[k]}(a | w)` over the radius-`k` ball,
//! * configuration-dependent masses `conditional_mass(i, k, w)`,
//! * exact samplers for the base density and the layer increments.
//!
//! All masses are with respect to the reference measure on the state space
//! extended by the cemetery point (which carries a unit atom).

pub mod autonormal;
pub mod gibbs_cont;
pub mod ising;
pub mod kernel;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{PssimError, Result};
use crate::lattice::{restrict_local, LocalConfig, Site, SparseConfiguration, SpinValue};

/// The single-site state space `A` with its reference measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateSpace {
    /// Finite alphabet with per-value weights (counting-type measure).
    Finite { values: Vec<f64>, weights: Vec<f64> },
    /// A real interval with Lebesgue measure (density one).
    Interval { lo: f64, hi: f64 },
}

impl StateSpace {
    pub fn validate(&self) -> Result<()> {
        match self {
            StateSpace::Finite { values, weights } => {
                if values.is_empty() || values.len() != weights.len() {
                    return Err(PssimError::Config(
                        "finite state space needs matching nonempty values/weights".into(),
                    ));
                }
                if weights.iter().any(|w| *w <= 0.0) {
                    return Err(PssimError::Config("state weights must be positive".into()));
                }
                let mut sorted = values.clone();
                sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                sorted.dedup();
                if sorted.len() != values.len() {
                    return Err(PssimError::Config("state values must be distinct".into()));
                }
            }
            StateSpace::Interval { lo, hi } => {
                if !(lo < hi) {
                    return Err(PssimError::Config("interval state space needs lo < hi".into()));
                }
            }
        }
        Ok(())
    }

    /// Total reference mass of `A`.
    pub fn mass(&self) -> f64 {
        match self {
            StateSpace::Finite { weights, .. } => weights.iter().sum(),
            StateSpace::Interval { lo, hi } => hi - lo,
        }
    }

    pub fn contains(&self, a: f64) -> bool {
        match self {
            StateSpace::Finite { values, .. } => values.iter().any(|v| (v - a).abs() < 1e-12),
            StateSpace::Interval { lo, hi } => (*lo..=*hi).contains(&a),
        }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            StateSpace::Finite { values, .. } => values.iter().cloned().fold(f64::INFINITY, f64::min),
            StateSpace::Interval { lo, .. } => *lo,
        }
    }

    pub fn max_value(&self) -> f64 {
        match self {
            StateSpace::Finite { values, .. } => {
                values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            }
            StateSpace::Interval { hi, .. } => *hi,
        }
    }

    /// `{-s, +s}` with equal weights, if that is what this space is.
    pub fn symmetric_two_point(&self) -> Option<f64> {
        match self {
            StateSpace::Finite { values, weights } if values.len() == 2 => {
                let (a, b) = (values[0], values[1]);
                if (a + b).abs() < 1e-14 && (weights[0] - weights[1]).abs() < 1e-14 && a != b {
                    Some(a.abs())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Draw from the normalized reference measure.
    pub fn sample_reference(&self, rng: &mut dyn RngCore) -> f64 {
        match self {
            StateSpace::Finite { values, weights } => {
                let total: f64 = weights.iter().sum();
                let mut u: f64 = rng.gen::<f64>() * total;
                for (v, w) in values.iter().zip(weights) {
                    u -= w;
                    if u <= 0.0 {
                        return *v;
                    }
                }
                *values.last().unwrap()
            }
            StateSpace::Interval { lo, hi } => lo + rng.gen::<f64>() * (hi - lo),
        }
    }
}

/// Spatially varying external field, restricted to families with finitely
/// many translation orbits.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    #[default]
    None,
    Constant { value: f64 },
    /// Alternating by the parity of the coordinate sum.
    Alternating { even: f64, odd: f64 },
}

impl FieldSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            FieldSpec::None => true,
            FieldSpec::Constant { value } => *value >= 0.0,
            FieldSpec::Alternating { even, odd } => *even >= 0.0 && *odd >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(PssimError::Config("field values must be nonnegative".into()))
        }
    }

    pub fn num_orbits(&self) -> usize {
        match self {
            FieldSpec::None | FieldSpec::Constant { .. } => 1,
            FieldSpec::Alternating { .. } => 2,
        }
    }

    pub fn orbit_of(&self, site: &Site) -> usize {
        match self {
            FieldSpec::None | FieldSpec::Constant { .. } => 0,
            FieldSpec::Alternating { .. } => {
                (site.0.iter().sum::<i64>().rem_euclid(2)) as usize
            }
        }
    }

    pub fn at(&self, site: &Site) -> f64 {
        match self {
            FieldSpec::None => 0.0,
            FieldSpec::Constant { value } => *value,
            FieldSpec::Alternating { even, odd } => {
                if site.0.iter().sum::<i64>().rem_euclid(2) == 0 {
                    *even
                } else {
                    *odd
                }
            }
        }
    }

    /// Field value for an orbit representative.
    pub fn orbit_value(&self, orbit: usize) -> f64 {
        match self {
            FieldSpec::None => 0.0,
            FieldSpec::Constant { value } => *value,
            FieldSpec::Alternating { even, odd } => {
                if orbit == 0 {
                    *even
                } else {
                    *odd
                }
            }
        }
    }
}

/// Upper cap on rejection-sampling attempts for continuous increments.
pub const REJECTION_CAP: u64 = 1_000_000;

/// A translation-covariant interacting particle system with bounded rates.
pub trait RateModel: Send + Sync {
    fn dimension(&self) -> usize;

    fn state_space(&self) -> &StateSpace;

    /// Number of translation orbits of sites (1 unless the field alternates).
    fn num_orbits(&self) -> usize {
        1
    }

    fn orbit_of(&self, _site: &Site) -> usize {
        0
    }

    /// The uniform total mass `M` for sites in this orbit.
    fn mass_bound(&self, orbit: usize) -> f64;

    /// Finite interaction range, when the kernel is truncated; `alpha(k)`
    /// equals the mass bound for `k >=` this value.
    fn truncation_range(&self) -> Option<i64>;

    /// The raw rate `c_i(a, eta)`; `eta` must be real-valued on the
    /// interaction support of `i`. `a` may be the cemetery.
    fn rate(&self, i: &Site, a: &SpinValue, eta: &SparseConfiguration) -> Result<f64>;

    /// The local infimum `c_i^{[k]}(a | w)`: the infimum of the rate over all
    /// configurations that agree with `w` on the radius-`k` ball around `i`.
    /// `k = -1` means no conditioning (`w` is ignored).
    fn local_inf_rate(&self, i: &Site, a: &SpinValue, k: i64, w: &LocalConfig) -> Result<f64>;

    /// The fixed ladder value `alpha(k)`, `k >= -1`.
    fn alpha(&self, orbit: usize, k: i64) -> Result<f64>;

    /// The configuration-dependent mass: the integral of `c^{[k]}(. | w)`
    /// over the state space plus the cemetery atom. `w` must cover the
    /// radius-`k` ball around `i` with real values. `k = -1` gives
    /// `alpha(-1)`.
    fn conditional_mass(&self, i: &Site, k: i64, w: &LocalConfig) -> Result<f64> {
        generic_conditional_mass(self, i, k, w)
    }

    /// Draw from the base density, proportional to `c^{[-1]}(a)` over `A`
    /// (the cemetery never has base mass).
    fn sample_base(&self, i: &Site, rng: &mut dyn RngCore) -> Result<f64> {
        generic_sample_base(self, i, rng)
    }

    /// Pointwise increment density
    /// `D^{[m]}(a | w) = c^{[m]}(a | w) - c^{[m-1]}(a | w restricted)`,
    /// for `a` in `A` or the cemetery; `w` covers the radius-`m` ball.
    fn increment_density(&self, i: &Site, m: i64, a: &SpinValue, w: &LocalConfig) -> Result<f64> {
        let hi = self.local_inf_rate(i, a, m, w)?;
        let lo = if m == 0 {
            self.local_inf_rate(i, a, -1, &LocalConfig::new())?
        } else {
            let inner = restrict_local(w, i, m - 1)?;
            self.local_inf_rate(i, a, m - 1, &inner)?
        };
        let d = hi - lo;
        if d < -1e-9 {
            return Err(PssimError::InternalConsistency(format!(
                "negative increment density {d} at site {} layer {m}",
                i.key()
            )));
        }
        Ok(d.max(0.0))
    }

    /// Draw from the density proportional to `D^{[m]}(. | w)` on `A` plus
    /// the cemetery atom.
    fn sample_increment(
        &self,
        i: &Site,
        m: i64,
        w: &LocalConfig,
        rng: &mut dyn RngCore,
    ) -> Result<SpinValue> {
        generic_sample_increment(self, i, m, w, rng)
    }
}

/// Conditional mass by summation over a finite alphabet.
pub fn generic_conditional_mass<M: RateModel + ?Sized>(
    model: &M,
    i: &Site,
    k: i64,
    w: &LocalConfig,
) -> Result<f64> {
    let (values, weights) = match model.state_space() {
        StateSpace::Finite { values, weights } => (values.clone(), weights.clone()),
        StateSpace::Interval { .. } => {
            return Err(PssimError::Unsupported(
                "conditional mass needs a model-specific implementation for continuous spins"
                    .into(),
            ))
        }
    };
    let mut total = 0.0;
    for (v, wt) in values.iter().zip(&weights) {
        total += wt * model.local_inf_rate(i, &SpinValue::Real(*v), k, w)?;
    }
    if k >= 0 {
        total += model.local_inf_rate(i, &SpinValue::Cemetery, k, w)?;
    }
    Ok(total)
}

/// Base-density draw by categorical sampling over a finite alphabet.
pub fn generic_sample_base<M: RateModel + ?Sized>(
    model: &M,
    i: &Site,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    let (values, weights) = match model.state_space() {
        StateSpace::Finite { values, weights } => (values.clone(), weights.clone()),
        StateSpace::Interval { .. } => {
            return Err(PssimError::Unsupported(
                "base sampling needs a model-specific implementation for continuous spins".into(),
            ))
        }
    };
    let empty = LocalConfig::new();
    let masses: Vec<f64> = values
        .iter()
        .zip(&weights)
        .map(|(v, wt)| {
            model
                .local_inf_rate(i, &SpinValue::Real(*v), -1, &empty)
                .map(|c| wt * c)
        })
        .collect::<Result<_>>()?;
    let idx = categorical(&masses, rng)?;
    Ok(values[idx])
}

/// Increment draw by categorical sampling over a finite alphabet plus the
/// cemetery atom.
pub fn generic_sample_increment<M: RateModel + ?Sized>(
    model: &M,
    i: &Site,
    m: i64,
    w: &LocalConfig,
    rng: &mut dyn RngCore,
) -> Result<SpinValue> {
    let (values, weights) = match model.state_space() {
        StateSpace::Finite { values, weights } => (values.clone(), weights.clone()),
        StateSpace::Interval { .. } => {
            return Err(PssimError::Unsupported(
                "increment sampling needs a model-specific implementation for continuous spins"
                    .into(),
            ))
        }
    };
    let mut masses = Vec::with_capacity(values.len() + 1);
    for (v, wt) in values.iter().zip(&weights) {
        masses.push(wt * model.increment_density(i, m, &SpinValue::Real(*v), w)?);
    }
    masses.push(model.increment_density(i, m, &SpinValue::Cemetery, w)?);
    let idx = categorical(&masses, rng)?;
    if idx == values.len() {
        Ok(SpinValue::Cemetery)
    } else {
        Ok(SpinValue::Real(values[idx]))
    }
}

/// Draw an index proportionally to nonnegative `masses`.
pub fn categorical(masses: &[f64], rng: &mut dyn RngCore) -> Result<usize> {
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(PssimError::InternalConsistency(format!(
            "categorical draw over total mass {total}"
        )));
    }
    let mut u = rng.gen::<f64>() * total;
    let mut last = 0;
    for (idx, m) in masses.iter().enumerate() {
        if *m < 0.0 {
            if *m < -1e-12 * total.max(1.0) {
                return Err(PssimError::InternalConsistency(format!(
                    "negative categorical mass {m}"
                )));
            }
            continue;
        }
        u -= m;
        last = idx;
        if u <= 0.0 {
            return Ok(idx);
        }
    }
    Ok(last)
}
