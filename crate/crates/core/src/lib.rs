//! Perfect sampling for interacting particle systems on `Z^d` with bounded,
//! possibly infinite-range flip rates.
//!
//! The engine decomposes the rates into a convex mixture of finite-range
//! update laws (`decomposition`), runs a backward branching sketch over the
//! mixture's range distribution (`sketch`), and resolves the sketch into an
//! exact stationary sample by a forward assignment pass (`assign`). The
//! `coupling` module layers two processes on a shared randomness source for
//! ordered (stochastically dominated) pairs, and `diagnostics` exposes the
//! rigorous error and convergence bounds. The `oracle` module holds slow,
//! independent reference implementations used by the test suites.

pub mod assign;
pub mod config;
pub mod coupling;
pub mod decomposition;
pub mod diagnostics;
pub mod error;
pub mod lattice;
pub mod models;
pub mod oracle;
pub mod quad;
pub mod sketch;
pub mod stats;

pub use decomposition::{Criticality, RangeDecomposition};
pub use error::{PssimError, Result};
pub use lattice::{Site, SparseConfiguration, SpinValue};
pub use models::RateModel;
