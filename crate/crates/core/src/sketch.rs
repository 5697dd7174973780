//! Backward sketch: the branching exploration of the sites whose update
//! history can influence a finite query window.
//!
//! Starting from the query window `C = F`, each step picks a site `I` from
//! `C` proportionally to its mass bound and draws a range `K` from the
//! ladder law. `K = -1` means the update at `I` ignores every other site,
//! so `I` leaves the ancestor set; otherwise the radius-`K` ball around `I`
//! joins it. In the subcritical regime the set dies out almost surely; the
//! recorded event list is then resolved by the forward assignment pass.
//!
//! The timed variant additionally tracks backward time through exponential
//! holding times with rate `sum_{j in C} M_j`, drawn from a separate
//! randomness stream so that the event sequence coincides with the untimed
//! sketch on the same main stream. It stops at a finite horizon and reports
//! the still-alive residual set.

use std::collections::BTreeSet;

use rand::{Rng, RngCore};
use serde_json::{json, Value};

use crate::decomposition::RangeDecomposition;
use crate::error::{PssimError, Result};
use crate::lattice::{ball_sites, Site};
use crate::models::categorical;

/// One backward step: site `I`, range `K` and (for timed sketches) the
/// cumulative backward time at which it fires.
#[derive(Debug, Clone)]
pub struct SketchEvent {
    pub site: Site,
    pub range: i64,
    pub time: Option<f64>,
}

/// A complete backward sketch for a query window.
#[derive(Debug, Clone)]
pub struct SketchRecord {
    pub query: Vec<Site>,
    /// Events in the order they were drawn (backward step 1 first).
    pub events: Vec<SketchEvent>,
    pub n_stop: u64,
    /// Total backward time consumed (timed sketches only).
    pub t_stop: Option<f64>,
    /// Sites still alive when the sketch stopped; empty iff it went extinct.
    pub residual: BTreeSet<Site>,
    /// True when the sketch hit a step cap instead of stopping cleanly.
    pub truncated: bool,
}

impl SketchRecord {
    pub fn is_extinct(&self) -> bool {
        !self.truncated && self.residual.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "query": self.query.iter().map(|s| s.0.clone()).collect::<Vec<_>>(),
            "n_stop": self.n_stop,
            "t_stop": self.t_stop,
            "truncated": self.truncated,
            "residual": self.residual.iter().map(|s| s.0.clone()).collect::<Vec<_>>(),
            "events": self
                .events
                .iter()
                .map(|e| match e.time {
                    Some(t) => json!([e.site.0, e.range, t]),
                    None => json!([e.site.0, e.range]),
                })
                .collect::<Vec<_>>(),
        })
    }
}

fn validate_query(query: &[Site], d: usize) -> Result<()> {
    if query.is_empty() {
        return Err(PssimError::Config("query window is empty".into()));
    }
    if query.iter().any(|s| s.dimension() != d) {
        return Err(PssimError::Config(
            "query sites must match the model dimension".into(),
        ));
    }
    Ok(())
}

/// Pick the next site from the ancestor set, proportionally to the mass
/// bound of its orbit. Iteration order over the set is lexicographic, so the
/// draw is reproducible.
fn pick_site(
    alive: &BTreeSet<Site>,
    decomp: &RangeDecomposition,
    rng: &mut dyn RngCore,
) -> Result<Site> {
    let masses: Vec<f64> = alive
        .iter()
        .map(|s| decomp.mass_bound(decomp.model().orbit_of(s)))
        .collect();
    let idx = categorical(&masses, rng)?;
    Ok(alive.iter().nth(idx).unwrap().clone())
}

fn apply_event(alive: &mut BTreeSet<Site>, site: &Site, range: i64) -> Result<()> {
    if range < 0 {
        alive.remove(site);
    } else {
        for s in ball_sites(site, range)? {
            alive.insert(s);
        }
    }
    Ok(())
}

/// Run the backward sketch to extinction (or to `step_cap` events).
///
/// Without a step cap the decomposition must be subcritical; a supercritical
/// one would explode with positive probability.
pub fn run_backward_sketch(
    query: &[Site],
    decomp: &RangeDecomposition,
    rng: &mut dyn RngCore,
    step_cap: Option<u64>,
) -> Result<SketchRecord> {
    validate_query(query, decomp.model().dimension())?;
    if step_cap.is_none() {
        let c = decomp.criticality()?;
        if !c.is_subcritical() {
            return Err(PssimError::Supercritical { gamma: c.gamma() });
        }
    }
    let mut alive: BTreeSet<Site> = query.iter().cloned().collect();
    let mut events = Vec::new();
    while !alive.is_empty() {
        if let Some(cap) = step_cap {
            if events.len() as u64 >= cap {
                return Ok(SketchRecord {
                    query: query.to_vec(),
                    n_stop: events.len() as u64,
                    events,
                    t_stop: None,
                    residual: alive,
                    truncated: true,
                });
            }
        }
        let site = pick_site(&alive, decomp, rng)?;
        let range = decomp.sample_range(&site, rng.gen())?;
        apply_event(&mut alive, &site, range)?;
        events.push(SketchEvent {
            site,
            range,
            time: None,
        });
    }
    Ok(SketchRecord {
        query: query.to_vec(),
        n_stop: events.len() as u64,
        events,
        t_stop: None,
        residual: BTreeSet::new(),
        truncated: false,
    })
}

/// Run the backward sketch up to backward-time `horizon`.
///
/// Holding times come from `time_rng`; `rng` drives sites and ranges exactly
/// as in the untimed sketch. Events that would fire beyond the horizon are
/// not drawn; the residual set is what an initial condition must cover.
pub fn run_backward_sketch_timed(
    query: &[Site],
    horizon: f64,
    decomp: &RangeDecomposition,
    rng: &mut dyn RngCore,
    time_rng: &mut dyn RngCore,
) -> Result<SketchRecord> {
    validate_query(query, decomp.model().dimension())?;
    if !(horizon > 0.0) {
        return Err(PssimError::Config("time horizon must be positive".into()));
    }
    if !horizon.is_finite() {
        let c = decomp.criticality()?;
        if !c.is_subcritical() {
            return Err(PssimError::Supercritical { gamma: c.gamma() });
        }
    }
    let mut alive: BTreeSet<Site> = query.iter().cloned().collect();
    let mut events = Vec::new();
    let mut t_stop = 0.0f64;
    while !alive.is_empty() {
        let total_rate: f64 = alive
            .iter()
            .map(|s| decomp.mass_bound(decomp.model().orbit_of(s)))
            .sum();
        let e: f64 = -(1.0 - time_rng.gen::<f64>()).ln();
        let dt = e / total_rate;
        if t_stop + dt >= horizon {
            t_stop = horizon;
            break;
        }
        t_stop += dt;
        let site = pick_site(&alive, decomp, rng)?;
        let range = decomp.sample_range(&site, rng.gen())?;
        apply_event(&mut alive, &site, range)?;
        events.push(SketchEvent {
            site,
            range,
            time: Some(t_stop),
        });
    }
    Ok(SketchRecord {
        query: query.to_vec(),
        n_stop: events.len() as u64,
        events,
        t_stop: Some(t_stop),
        residual: alive,
        truncated: false,
    })
}

/// Monte-Carlo summaries of the ancestor process: mean ancestor-set size at
/// the probe times, the per-replica extinction step counts, and the mean
/// extinction time.
#[derive(Debug, Clone)]
pub struct AncestorStats {
    pub horizons: Vec<f64>,
    pub mean_size: Vec<f64>,
    pub se_size: Vec<f64>,
    /// N_STOP per replica.
    pub n_stops: Vec<u64>,
    pub mean_extinction_time: f64,
}

impl AncestorStats {
    /// Empirical `P(N_STOP > n)`.
    pub fn survival(&self, n: u64) -> f64 {
        let count = self.n_stops.iter().filter(|&&x| x > n).count();
        count as f64 / self.n_stops.len() as f64
    }
}

/// Run `replicas` timed sketches to extinction and probe the ancestor-set
/// size at each horizon.
pub fn ancestor_statistics(
    query: &[Site],
    decomp: &RangeDecomposition,
    horizons: &[f64],
    replicas: u64,
    seed: u64,
) -> Result<AncestorStats> {
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    let c = decomp.criticality()?;
    if !c.is_subcritical() {
        return Err(PssimError::Supercritical { gamma: c.gamma() });
    }
    let mut sizes = vec![Vec::with_capacity(replicas as usize); horizons.len()];
    let mut n_stops = Vec::with_capacity(replicas as usize);
    let mut t_sum = 0.0;
    for r in 0..replicas {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(2 * r + 1);
        let mut time_rng = ChaCha12Rng::seed_from_u64(seed);
        time_rng.set_stream(2 * r + 2);
        let rec =
            run_backward_sketch_timed(query, f64::INFINITY, decomp, &mut rng, &mut time_rng)?;
        n_stops.push(rec.n_stop);
        t_sum += rec.t_stop.unwrap_or(0.0);
        // reconstruct |C_s| from the event trace
        for (hi, &h) in horizons.iter().enumerate() {
            let mut alive: BTreeSet<Site> = query.iter().cloned().collect();
            for e in &rec.events {
                if e.time.unwrap() > h {
                    break;
                }
                apply_event(&mut alive, &e.site, e.range)?;
            }
            sizes[hi].push(alive.len() as f64);
        }
    }
    let mean_size: Vec<f64> = sizes.iter().map(|v| crate::stats::mean(v)).collect();
    let se_size: Vec<f64> = sizes.iter().map(|v| crate::stats::stderr_mean(v)).collect();
    Ok(AncestorStats {
        horizons: horizons.to_vec(),
        mean_size,
        se_size,
        n_stops,
        mean_extinction_time: t_sum / replicas as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ising::IsingModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::sync::Arc;

    fn decomp(beta: f64) -> RangeDecomposition {
        let model = IsingModel::nearest_neighbor(1, beta, 1.0, 0.0).unwrap();
        RangeDecomposition::new(Arc::new(model)).unwrap()
    }

    #[test]
    fn sketch_goes_extinct_subcritical() {
        let d = decomp(0.15);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let rec = run_backward_sketch(&[Site::at(0)], &d, &mut rng, None).unwrap();
            assert!(rec.is_extinct());
            assert_eq!(rec.n_stop as usize, rec.events.len());
            // last event must be a removal
            assert_eq!(rec.events.last().unwrap().range, -1);
        }
    }

    #[test]
    fn supercritical_needs_cap() {
        let d = decomp(0.5);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let err = run_backward_sketch(&[Site::at(0)], &d, &mut rng, None);
        assert!(matches!(err, Err(PssimError::Supercritical { .. })));
        let rec = run_backward_sketch(&[Site::at(0)], &d, &mut rng, Some(50)).unwrap();
        assert!(rec.truncated || rec.is_extinct());
    }

    #[test]
    fn timed_matches_untimed_event_sequence() {
        let d = decomp(0.15);
        let mut rng1 = ChaCha12Rng::seed_from_u64(42);
        let mut rng2 = ChaCha12Rng::seed_from_u64(42);
        let mut time_rng = ChaCha12Rng::seed_from_u64(7);
        let untimed = run_backward_sketch(&[Site::at(0)], &d, &mut rng1, None).unwrap();
        let timed = run_backward_sketch_timed(
            &[Site::at(0)],
            f64::INFINITY,
            &d,
            &mut rng2,
            &mut time_rng,
        )
        .unwrap();
        assert_eq!(untimed.n_stop, timed.n_stop);
        for (a, b) in untimed.events.iter().zip(&timed.events) {
            assert_eq!(a.site, b.site);
            assert_eq!(a.range, b.range);
        }
        assert!(timed.is_extinct());
        assert!(timed.t_stop.unwrap() > 0.0);
    }

    #[test]
    fn horizon_truncates_with_residual() {
        let d = decomp(0.15);
        // a tiny horizon almost surely leaves the query site alive
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let mut time_rng = ChaCha12Rng::seed_from_u64(6);
        let rec =
            run_backward_sketch_timed(&[Site::at(0)], 1e-9, &d, &mut rng, &mut time_rng).unwrap();
        assert!(!rec.is_extinct());
        assert_eq!(rec.residual.len(), 1);
        assert_eq!(rec.n_stop, 0);
    }

    #[test]
    fn json_round_shape() {
        let d = decomp(0.15);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let rec = run_backward_sketch(&[Site::at(0)], &d, &mut rng, None).unwrap();
        let v = rec.to_json();
        assert!(v["n_stop"].is_u64());
        assert!(v["events"].is_array());
    }
}
