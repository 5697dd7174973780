//! Slow, independent reference implementations used by the test suites.
//!
//! Nothing in here shares numerical code paths with the engine: rates,
//! ladders and stationary laws are recomputed from first principles
//! (exhaustive enumeration, transfer matrices, forward simulation) so that
//! agreement between the two is meaningful evidence.

pub mod enumeration;
pub mod glauber;
pub mod transfer;
