//! Shared scenarios for the benchmarks.

use vacdrag_core::{Scenario, SheetMedium, SlabMedium};

/// Two index-14 slabs at `|v₂ − v₁|n/2c = 1.4`, one thickness apart.
pub fn reference_slabs() -> Scenario {
    Scenario::slabs(SlabMedium::new(14.0, 1.0).unwrap(), -0.1, 0.1, 1.0).unwrap()
}

/// Two unit-frequency plasmon sheets at `v = ±0.1`, half a unit apart.
pub fn reference_sheets() -> Scenario {
    Scenario::sheets(SheetMedium::new(1.0).unwrap(), -0.1, 0.1, 0.5).unwrap()
}
