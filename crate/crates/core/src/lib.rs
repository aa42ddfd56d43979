//! Quantum friction between sliding bodies from the complex eigenfrequencies of
//! their hybridized guided modes.
//!
//! Units: `c = ħ = h_s = 1`; see [`units`] for the SI conversion.

// Negated comparisons double as NaN guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod argument;
pub mod error;
pub mod force;
pub mod instability;
pub mod media;
pub mod modes;
pub mod optics;
pub mod quadrature;
pub mod roots;
pub mod units;

pub use error::{Error, Result};
pub use force::{ForceMethod, ForceResult, ForceTimeSeries, Grid};
pub use instability::{HybridMode, SelectionSolution};
pub use media::{GapCoupling, Medium, MovingBody, Polarization, Scenario, SheetMedium, SlabMedium};
pub use modes::{GuidedModeBranch, GuidedModePoint};
pub use units::Units;
