//! Interaction kernels as named parametric families.
//!
//! Kernels are isotropic (the coupling depends only on the L1 distance) and
//! nonnegative, and are never supplied as arbitrary code: the range ladder
//! needs exact shell sums and exact tail sums, which each family provides in
//! closed form.

use serde::{Deserialize, Serialize};

use crate::error::{PssimError, Result};
use crate::lattice::{ball_sites, shell_counts, Site};

/// Named kernel families.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KernelSpec {
    /// Nearest-neighbor coupling: J = value at L1 distance 1.
    Nn { value: f64 },
    /// Per-shell table: `shells[m-1]` is the coupling at L1 distance m;
    /// zero beyond the table (finite range).
    Table { shells: Vec<f64> },
    /// Exponential decay J(i,j) = theta * ratio^{|i-j|}, optionally truncated.
    ExpDecay {
        theta: f64,
        ratio: f64,
        #[serde(default)]
        truncate: Option<i64>,
    },
    /// The zero kernel (no interaction).
    Zero,
}

/// An interaction kernel in dimension `d` with precomputed shell structure.
#[derive(Debug, Clone)]
pub struct Kernel {
    d: usize,
    spec: KernelSpec,
    /// Total absolute sum Sigma = sum_j |J(i,j)|.
    sigma: f64,
    range: Option<i64>,
}

impl Kernel {
    pub fn new(d: usize, spec: KernelSpec) -> Result<Self> {
        if d == 0 {
            return Err(PssimError::Config("dimension must be >= 1".into()));
        }
        match &spec {
            KernelSpec::Nn { value } => {
                if *value < 0.0 {
                    return Err(PssimError::Config("kernel values must be nonnegative".into()));
                }
            }
            KernelSpec::Table { shells } => {
                if shells.iter().any(|v| *v < 0.0) {
                    return Err(PssimError::Config("kernel values must be nonnegative".into()));
                }
            }
            KernelSpec::ExpDecay { theta, ratio, truncate } => {
                if *theta < 0.0 || *ratio <= 0.0 {
                    return Err(PssimError::Config(
                        "exp-decay kernel needs theta >= 0 and ratio > 0".into(),
                    ));
                }
                if truncate.is_none() && *ratio >= 1.0 {
                    return Err(PssimError::Config(
                        "untruncated exp-decay kernel needs ratio < 1".into(),
                    ));
                }
            }
            KernelSpec::Zero => {}
        }
        let mut k = Kernel {
            d,
            spec,
            sigma: 0.0,
            range: None,
        };
        k.range = k.compute_range();
        k.sigma = k.compute_sigma()?;
        Ok(k)
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Finite interaction range L (J = 0 beyond L), if any.
    pub fn range(&self) -> Option<i64> {
        self.range
    }

    fn compute_range(&self) -> Option<i64> {
        match &self.spec {
            KernelSpec::Zero => Some(0),
            KernelSpec::Nn { .. } => Some(1),
            KernelSpec::Table { shells } => Some(shells.len() as i64),
            KernelSpec::ExpDecay { truncate, .. } => *truncate,
        }
    }

    /// Coupling value at L1 distance m >= 1 (per site on the shell).
    pub fn shell_value(&self, m: i64) -> f64 {
        if m <= 0 {
            return 0.0;
        }
        match &self.spec {
            KernelSpec::Zero => 0.0,
            KernelSpec::Nn { value } => {
                if m == 1 {
                    *value
                } else {
                    0.0
                }
            }
            KernelSpec::Table { shells } => {
                if (m as usize) <= shells.len() {
                    shells[m as usize - 1]
                } else {
                    0.0
                }
            }
            KernelSpec::ExpDecay { theta, ratio, truncate } => {
                if truncate.map(|l| m > l).unwrap_or(false) {
                    0.0
                } else {
                    theta * ratio.powi(m as i32)
                }
            }
        }
    }

    /// J(i, j).
    pub fn eval(&self, i: &Site, j: &Site) -> f64 {
        self.shell_value(i.l1_distance(j))
    }

    fn compute_sigma(&self) -> Result<f64> {
        match &self.spec {
            KernelSpec::ExpDecay { theta, ratio, truncate: None } => {
                // sum_m s_d(m) r^m = ((1+r)/(1-r))^d - 1 from the shell
                // generating function of the L1 norm.
                let r = *ratio;
                Ok(theta * (((1.0 + r) / (1.0 - r)).powi(self.d as i32) - 1.0))
            }
            _ => {
                let l = self.range.expect("finite range");
                Ok(self.partial_sum(l))
            }
        }
    }

    fn partial_sum(&self, k: i64) -> f64 {
        if k < 1 {
            return 0.0;
        }
        let counts = shell_counts(self.d, k);
        let mut s = 0.0;
        for (m, c) in counts.iter().enumerate().skip(1) {
            s += c * self.shell_value(m as i64);
        }
        s
    }

    /// Sigma_i = sum_j |J(i,j)|.
    pub fn sigma_total(&self) -> f64 {
        self.sigma
    }

    /// S^{<= k} = sum over |j - i| <= k.
    pub fn sum_leq(&self, k: i64) -> f64 {
        match self.range {
            Some(l) if k >= l => self.sigma,
            _ => self.partial_sum(k),
        }
    }

    /// S^{> k} = Sigma - S^{<= k}; exact by construction.
    pub fn sum_gt(&self, k: i64) -> f64 {
        (self.sigma - self.sum_leq(k)).max(0.0)
    }

    /// Sites with nonzero coupling to `center` (truncated kernels only).
    pub fn support_sites(&self, center: &Site) -> Result<Vec<Site>> {
        let l = self.range.ok_or_else(|| {
            PssimError::Unsupported("support enumeration needs a truncated kernel".to_string())
        })?;
        let sites = ball_sites(center, l)?
            .into_iter()
            .filter(|s| self.eval(center, s) != 0.0)
            .collect();
        Ok(sites)
    }

    pub fn is_zero(&self) -> bool {
        self.sigma == 0.0
    }
}
