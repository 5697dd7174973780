//! Lattice geometry, spin values with a cemetery state, and sparse
//! configurations over the infinite lattice.
//!
//! Only touched sites are ever stored: the ancestor set of a finite query
//! window is almost surely finite in the subcritical regime, so every
//! computation sees finitely many sites. Unassigned sites report a default
//! spin (the cemetery, in the forward assignment pass).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{PssimError, Result};

/// A lattice site: integer coordinates in `Z^d`.
///
/// Ordering is lexicographic on coordinates; all ball iteration uses it so
/// that runs with a fixed seed are bit-reproducible.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Site(pub Vec<i64>);

impl Site {
    pub fn new(coords: Vec<i64>) -> Self {
        Site(coords)
    }

    pub fn origin(d: usize) -> Self {
        Site(vec![0; d])
    }

    /// 1-d convenience constructor.
    pub fn at(x: i64) -> Self {
        Site(vec![x])
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    /// L1 distance to another site.
    pub fn l1_distance(&self, other: &Site) -> i64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Offset `other - self` as a coordinate vector.
    pub fn offset_to(&self, other: &Site) -> Vec<i64> {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| b - a)
            .collect()
    }

    pub fn translate(&self, offset: &[i64]) -> Site {
        Site(
            self.0
                .iter()
                .zip(offset.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Render as "(x)", "(x,y)", ... — the JSONL key format.
    pub fn key(&self) -> String {
        let inner: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        format!("({})", inner.join(","))
    }
}

/// All sites within L1 distance `k` of the origin in dimension `d`,
/// in lexicographic order.
pub fn ball_offsets(d: usize, k: i64) -> Result<Vec<Vec<i64>>> {
    if k < 0 {
        return Err(PssimError::Config(format!("ball radius {k} is negative")));
    }
    let mut out = Vec::new();
    let mut current = vec![0i64; d];
    fill_ball(d, k, 0, &mut current, &mut out);
    Ok(out)
}

fn fill_ball(d: usize, budget: i64, dim: usize, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if dim == d {
        out.push(current.clone());
        return;
    }
    for c in -budget..=budget {
        current[dim] = c;
        fill_ball(d, budget - c.abs(), dim + 1, current, out);
    }
    current[dim] = 0;
}

/// The sites of `V_i(k)`, the L1 ball of radius `k` around `center`.
pub fn ball_sites(center: &Site, k: i64) -> Result<Vec<Site>> {
    let offsets = ball_offsets(center.dimension(), k)?;
    let mut sites: Vec<Site> = offsets.iter().map(|o| center.translate(o)).collect();
    sites.sort();
    Ok(sites)
}

/// |V(k)| in dimension d.
pub fn ball_volume(d: usize, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    // Pascal-style recursion over dimensions on the shell counts.
    let mut shells = shell_counts(d, k);
    let mut total = 0.0;
    for s in shells.drain(..) {
        total += s;
    }
    total
}

/// Number of sites at exact L1 distance m from a fixed site, for m = 0..=k.
pub fn shell_counts(d: usize, k: i64) -> Vec<f64> {
    let k = k.max(-1);
    let n = (k + 1) as usize;
    if n == 0 {
        return Vec::new();
    }
    // counts[m] for dimension 1: 1, 2, 2, 2, ...
    let mut counts = vec![0.0f64; n];
    counts[0] = 1.0;
    for m in 1..n {
        counts[m] = 2.0;
    }
    if d == 1 {
        return counts;
    }
    for _ in 2..=d {
        let prev = counts.clone();
        for m in 0..n {
            // add one coordinate with value c, |c| <= m
            let mut s = prev[m]; // c = 0
            for c in 1..=m {
                s += 2.0 * prev[m - c];
            }
            counts[m] = s;
        }
    }
    counts
}

/// A spin value: either a real color in the model state space, or the
/// cemetery ("keep the current value").
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpinValue {
    Real(f64),
    Cemetery,
}

impl SpinValue {
    pub fn is_cemetery(&self) -> bool {
        matches!(self, SpinValue::Cemetery)
    }

    pub fn real(&self) -> Option<f64> {
        match self {
            SpinValue::Real(x) => Some(*x),
            SpinValue::Cemetery => None,
        }
    }
}

/// A local configuration: an ordered finite map Site -> SpinValue.
pub type LocalConfig = BTreeMap<Site, SpinValue>;

/// A sparse configuration over the infinite lattice. Lookups at unassigned
/// sites return the default value.
#[derive(Debug, Clone)]
pub struct SparseConfiguration {
    assignments: BTreeMap<Site, SpinValue>,
    default: SpinValue,
}

impl SparseConfiguration {
    pub fn new(default: SpinValue) -> Self {
        SparseConfiguration {
            assignments: BTreeMap::new(),
            default,
        }
    }

    /// All sites at the cemetery default ("undetermined").
    pub fn all_cemetery() -> Self {
        Self::new(SpinValue::Cemetery)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Site, f64)>, default: SpinValue) -> Self {
        let mut c = Self::new(default);
        for (s, v) in pairs {
            c.set(s, SpinValue::Real(v));
        }
        c
    }

    pub fn default_value(&self) -> SpinValue {
        self.default
    }

    pub fn get(&self, site: &Site) -> SpinValue {
        self.assignments.get(site).copied().unwrap_or(self.default)
    }

    pub fn set(&mut self, site: Site, value: SpinValue) {
        self.assignments.insert(site, value);
    }

    pub fn assigned(&self) -> impl Iterator<Item = (&Site, &SpinValue)> {
        self.assignments.iter()
    }

    /// The real value at a site, or an error when the site is undetermined.
    pub fn real_at(&self, site: &Site) -> Result<f64> {
        self.get(site)
            .real()
            .ok_or_else(|| PssimError::Unspecified(site.key()))
    }

    /// Restriction `eta(V_i(k))` with deterministic (lexicographic) ordering.
    pub fn restrict(&self, center: &Site, k: i64) -> Result<LocalConfig> {
        let mut out = LocalConfig::new();
        for s in ball_sites(center, k)? {
            let v = self.get(&s);
            out.insert(s, v);
        }
        Ok(out)
    }
}

/// Restrict an already-local configuration to a smaller ball.
pub fn restrict_local(w: &LocalConfig, center: &Site, k: i64) -> Result<LocalConfig> {
    let mut out = LocalConfig::new();
    for s in ball_sites(center, k)? {
        match w.get(&s) {
            Some(v) => {
                out.insert(s, *v);
            }
            None => return Err(PssimError::Unspecified(s.key())),
        }
    }
    Ok(out)
}
