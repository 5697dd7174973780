//! Forward assignment: resolve a backward sketch into spin values.
//!
//! The recorded events are replayed in reverse (oldest first). A range `-1`
//! event repaints its site from the base law, with no dependence on any
//! other site; a range `k` event repaints from the layer law conditioned on
//! the current values on the radius-`k` ball. A cemetery outcome keeps the
//! current value.
//!
//! For an extinct sketch every site conditioned on has already received a
//! base repaint by construction, so the pass is self-contained and the
//! output is an exact stationary sample. For a finite-horizon sketch the
//! still-alive residual sites take their values from a user-supplied initial
//! condition. Either way, encountering an undetermined conditioning value is
//! a bug, not a runtime condition, and fails as an internal-consistency
//! error.

use std::collections::BTreeMap;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::decomposition::RangeDecomposition;
use crate::error::{PssimError, Result};
use crate::lattice::{Site, SparseConfiguration, SpinValue};
use crate::models::RateModel;
use crate::sketch::{run_backward_sketch, run_backward_sketch_timed, SketchRecord};

/// Result of one resolved replica.
#[derive(Debug, Clone)]
pub struct AssignmentResult {
    /// Spin values on the query window; empty iff `truncated`.
    pub spins: BTreeMap<Site, f64>,
    pub n_stop: u64,
    pub t_stop: Option<f64>,
    /// True when the underlying sketch hit its step cap and no sample was
    /// produced.
    pub truncated: bool,
}

/// Initial-condition families for finite-horizon runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialCondition {
    Constant { value: f64 },
    /// Alternating by coordinate-sum parity.
    Checkerboard { even: f64, odd: f64 },
    /// Independent draws from the normalized reference measure.
    IidReference,
}

impl InitialCondition {
    /// Concrete values on the given sites. Draws (for `IidReference`) are
    /// made in lexicographic site order.
    pub fn materialize(
        &self,
        sites: impl IntoIterator<Item = Site>,
        model: &dyn RateModel,
        rng: &mut dyn RngCore,
    ) -> Result<BTreeMap<Site, f64>> {
        let mut out = BTreeMap::new();
        for site in sites {
            let v = match self {
                InitialCondition::Constant { value } => *value,
                InitialCondition::Checkerboard { even, odd } => {
                    if site.0.iter().sum::<i64>().rem_euclid(2) == 0 {
                        *even
                    } else {
                        *odd
                    }
                }
                InitialCondition::IidReference => model.state_space().sample_reference(rng),
            };
            if !model.state_space().contains(v) {
                return Err(PssimError::OutsideStateSpace { value: v });
            }
            out.insert(site, v);
        }
        Ok(out)
    }
}

fn replay(
    record: &SketchRecord,
    initial: Option<&BTreeMap<Site, f64>>,
    decomp: &RangeDecomposition,
    rng: &mut dyn RngCore,
) -> Result<AssignmentResult> {
    if record.truncated {
        return Err(PssimError::TruncatedRecord);
    }
    let mut sigma = SparseConfiguration::all_cemetery();
    if record.residual.is_empty() {
        // extinct sketch: self-contained
    } else {
        let init = initial.ok_or(PssimError::TruncatedRecord)?;
        for site in &record.residual {
            let v = init
                .get(site)
                .ok_or_else(|| PssimError::MissingInitial(site.key()))?;
            sigma.set(site.clone(), SpinValue::Real(*v));
        }
    }
    for event in record.events.iter().rev() {
        let value = if event.range < 0 {
            SpinValue::Real(decomp.sample_base(&event.site, rng)?)
        } else {
            let w = sigma.restrict(&event.site, event.range)?;
            if let Some((site, _)) = w.iter().find(|(_, v)| v.is_cemetery()) {
                return Err(PssimError::InternalConsistency(format!(
                    "conditioning site {} undetermined while replaying an event at {} with range {}",
                    site.key(),
                    event.site.key(),
                    event.range
                )));
            }
            decomp.sample_layer(&event.site, event.range, &w, rng)?
        };
        if let SpinValue::Real(v) = value {
            sigma.set(event.site.clone(), SpinValue::Real(v));
        }
    }
    let mut spins = BTreeMap::new();
    for site in &record.query {
        let v = sigma.get(site).real().ok_or_else(|| {
            PssimError::InternalConsistency(format!(
                "query site {} undetermined after replay",
                site.key()
            ))
        })?;
        spins.insert(site.clone(), v);
    }
    Ok(AssignmentResult {
        spins,
        n_stop: record.n_stop,
        t_stop: record.t_stop,
        truncated: false,
    })
}

/// Resolve an extinct sketch into an exact stationary sample.
pub fn run_forward_assignment(
    record: &SketchRecord,
    decomp: &RangeDecomposition,
    rng: &mut dyn RngCore,
) -> Result<AssignmentResult> {
    if !record.residual.is_empty() {
        return Err(PssimError::TruncatedRecord);
    }
    replay(record, None, decomp, rng)
}

/// Resolve a finite-horizon sketch, seeding the residual sites from the
/// initial values.
pub fn run_forward_assignment_with_initial(
    record: &SketchRecord,
    initial: &BTreeMap<Site, f64>,
    decomp: &RangeDecomposition,
    rng: &mut dyn RngCore,
) -> Result<AssignmentResult> {
    replay(record, Some(initial), decomp, rng)
}

/// Draw one exact stationary sample of the query window.
pub fn perfect_sample(
    query: &[Site],
    decomp: &RangeDecomposition,
    rng: &mut dyn RngCore,
) -> Result<AssignmentResult> {
    let record = run_backward_sketch(query, decomp, rng, None)?;
    run_forward_assignment(&record, decomp, rng)
}

/// Draw a sample with a cap on backward steps. A sketch that does not die
/// within the cap yields a truncated result with no spins; keeping such
/// replicas conditions the output law on fast extinction, with total
/// variation bias at most `gamma^cap / (1 - gamma^cap)`.
pub fn perfect_sample_capped(
    query: &[Site],
    decomp: &RangeDecomposition,
    rng: &mut dyn RngCore,
    step_cap: u64,
) -> Result<AssignmentResult> {
    let record = run_backward_sketch(query, decomp, rng, Some(step_cap))?;
    if record.truncated {
        return Ok(AssignmentResult {
            spins: BTreeMap::new(),
            n_stop: record.n_stop,
            t_stop: None,
            truncated: true,
        });
    }
    run_forward_assignment(&record, decomp, rng)
}

/// Sample the process at time `horizon` started from `initial`.
pub fn finite_horizon_sample(
    query: &[Site],
    horizon: f64,
    initial: &InitialCondition,
    decomp: &RangeDecomposition,
    rng: &mut dyn RngCore,
    time_rng: &mut dyn RngCore,
) -> Result<AssignmentResult> {
    let record = run_backward_sketch_timed(query, horizon, decomp, rng, time_rng)?;
    let init = initial.materialize(
        record.residual.iter().cloned(),
        decomp.model().as_ref(),
        rng,
    )?;
    run_forward_assignment_with_initial(&record, &init, decomp, rng)
}
