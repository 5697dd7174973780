//! JSON run configuration: model, sampler and output settings.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assign::InitialCondition;
use crate::coupling::CoupledIsingModel;
use crate::decomposition::{RangeDecomposition, DEFAULT_RANGE_CAP};
use crate::error::{PssimError, Result};
use crate::lattice::Site;
use crate::models::autonormal::AutonormalModel;
use crate::models::gibbs_cont::GibbsContModel;
use crate::models::ising::IsingModel;
use crate::models::kernel::{Kernel, KernelSpec};
use crate::models::{FieldSpec, StateSpace};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ModelConfig {
    /// Finite-alphabet exponential-rate model.
    Ising {
        dimension: usize,
        beta: f64,
        kernel: KernelSpec,
        #[serde(default)]
        field: FieldSpec,
        #[serde(default)]
        state: Option<StateSpace>,
    },
    /// Continuous spins on [-1, 1] with exponential rates.
    GibbsCont {
        dimension: usize,
        beta: f64,
        kernel: KernelSpec,
    },
    /// Conditional-Gaussian repainting on [0, 1].
    Autonormal {
        dimension: usize,
        kernel: KernelSpec,
        sd: f64,
    },
    /// Monotone coupling of two two-spin dynamics.
    Pair {
        dimension: usize,
        beta: f64,
        lower_kernel: KernelSpec,
        upper_kernel: KernelSpec,
        #[serde(default)]
        lower_field: f64,
        #[serde(default)]
        upper_field: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Query window as coordinate vectors.
    pub sites: Vec<Vec<i64>>,
    pub replicas: u64,
    pub seed: u64,
    /// Cap on backward steps per replica (None: run to extinction; required
    /// for supercritical decompositions).
    #[serde(default)]
    pub step_cap: Option<u64>,
    /// Finite time horizon; needs `initial`.
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub initial: Option<InitialCondition>,
    #[serde(default)]
    pub range_cap: Option<i64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct OutputConfig {
    /// Output path; stdout when absent.
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema: u32,
    pub model: ModelConfig,
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(PssimError::Config(format!(
                "unsupported schema version {}",
                self.schema
            )));
        }
        if self.sampler.sites.is_empty() {
            return Err(PssimError::Config("sampler.sites is empty".into()));
        }
        if self.sampler.replicas == 0 {
            return Err(PssimError::Config("sampler.replicas must be positive".into()));
        }
        let d = self.dimension();
        if self.sampler.sites.iter().any(|s| s.len() != d) {
            return Err(PssimError::Config(
                "sampler.sites must match the model dimension".into(),
            ));
        }
        if let Some(h) = self.sampler.horizon {
            if !(h > 0.0) {
                return Err(PssimError::Config("horizon must be positive".into()));
            }
            if self.sampler.initial.is_none() {
                return Err(PssimError::Config(
                    "finite-horizon runs need sampler.initial".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        match &self.model {
            ModelConfig::Ising { dimension, .. }
            | ModelConfig::GibbsCont { dimension, .. }
            | ModelConfig::Autonormal { dimension, .. }
            | ModelConfig::Pair { dimension, .. } => *dimension,
        }
    }

    pub fn is_pair(&self) -> bool {
        matches!(self.model, ModelConfig::Pair { .. })
    }

    pub fn query(&self) -> Vec<Site> {
        self.sampler.sites.iter().cloned().map(Site::new).collect()
    }

    pub fn build_decomposition(&self) -> Result<RangeDecomposition> {
        let model: Arc<dyn crate::models::RateModel> = match &self.model {
            ModelConfig::Ising {
                dimension,
                beta,
                kernel,
                field,
                state,
            } => {
                let kernel = Kernel::new(*dimension, kernel.clone())?;
                let space = state.clone().unwrap_or(StateSpace::Finite {
                    values: vec![-1.0, 1.0],
                    weights: vec![1.0, 1.0],
                });
                Arc::new(IsingModel::new(*beta, kernel, field.clone(), space)?)
            }
            ModelConfig::GibbsCont {
                dimension,
                beta,
                kernel,
            } => {
                let kernel = Kernel::new(*dimension, kernel.clone())?;
                Arc::new(GibbsContModel::new(*beta, kernel)?)
            }
            ModelConfig::Autonormal {
                dimension,
                kernel,
                sd,
            } => {
                let kernel = Kernel::new(*dimension, kernel.clone())?;
                Arc::new(AutonormalModel::new(kernel, *sd)?)
            }
            ModelConfig::Pair {
                dimension,
                beta,
                lower_kernel,
                upper_kernel,
                lower_field,
                upper_field,
            } => {
                let lo = Kernel::new(*dimension, lower_kernel.clone())?;
                let hi = Kernel::new(*dimension, upper_kernel.clone())?;
                Arc::new(CoupledIsingModel::new(
                    *beta,
                    lo,
                    hi,
                    *lower_field,
                    *upper_field,
                )?)
            }
        };
        let cap = self.sampler.range_cap.unwrap_or(DEFAULT_RANGE_CAP);
        RangeDecomposition::with_range_cap(model, cap)
    }
}
