//! Material bodies and two-body scenarios.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Field polarization class; the non-relativistic two-body problem decouples
/// into transverse-electric (`S`) and transverse-magnetic (`P`) waves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    S,
    P,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::S, Polarization::P];
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::S => "s",
            Polarization::P => "p",
        })
    }
}

/// A nondispersive, lossless, non-magnetic dielectric slab of thickness `h`
/// backed by a perfect electric conductor. Parameters are in the co-moving frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabMedium {
    pub n_d: f64,
    pub h: f64,
}

impl SlabMedium {
    pub fn new(n_d: f64, h: f64) -> Result<Self> {
        if !(n_d.is_finite() && n_d > 1.0) {
            return Err(Error::InvalidInput(format!(
                "slab index must exceed 1, got {n_d}"
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidInput(format!(
                "slab thickness must be positive, got {h}"
            )));
        }
        Ok(Self { n_d, h })
    }

    pub fn eps(&self) -> f64 {
        self.n_d * self.n_d
    }

    /// Relative permeability; the slabs are non-magnetic.
    pub fn mu_rel(&self) -> f64 {
        1.0
    }
}

/// A metal sheet with a single surface-plasmon resonance and no wavevector dependence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheetMedium {
    pub omega_sp: f64,
}

impl SheetMedium {
    pub fn new(omega_sp: f64) -> Result<Self> {
        if !(omega_sp.is_finite() && omega_sp > 0.0) {
            return Err(Error::InvalidInput(format!(
                "plasmon frequency must be positive, got {omega_sp}"
            )));
        }
        Ok(Self { omega_sp })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Medium {
    Slab(SlabMedium),
    Sheet(SheetMedium),
}

impl Medium {
    pub fn is_slab(&self) -> bool {
        matches!(self, Medium::Slab(_))
    }

    pub fn as_slab(&self) -> Option<&SlabMedium> {
        match self {
            Medium::Slab(s) => Some(s),
            Medium::Sheet(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovingBody {
    pub medium: Medium,
    /// Lab-frame velocity along x, in units of c.
    pub v: f64,
}

impl MovingBody {
    pub fn new(medium: Medium, v: f64) -> Result<Self> {
        if !(v.is_finite() && v.abs() < 1.0) {
            return Err(Error::InvalidInput(format!("|v| must be below c, got {v}")));
        }
        Ok(Self { medium, v })
    }
}

/// How the vacuum gap attenuates the coupling: `exp(-2 γ₀ d)` with the full
/// vacuum propagation constant, or `exp(-2 k d)` neglecting retardation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapCoupling {
    #[default]
    Retarded,
    Quasistatic,
}

/// Two parallel bodies separated by a vacuum gap `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub body1: MovingBody,
    pub body2: MovingBody,
    pub d: f64,
    pub gap: GapCoupling,
}

impl Scenario {
    /// Builds a scenario; sheets always use the quasistatic gap factor, slabs
    /// default to the retarded one.
    pub fn new(body1: MovingBody, body2: MovingBody, d: f64) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidInput(format!(
                "gap must be positive, got {d}"
            )));
        }
        if body1.medium.is_slab() != body2.medium.is_slab() {
            return Err(Error::InvalidInput(
                "both bodies must be slabs or both must be sheets".into(),
            ));
        }
        let gap = if body1.medium.is_slab() {
            GapCoupling::Retarded
        } else {
            GapCoupling::Quasistatic
        };
        Ok(Self {
            body1,
            body2,
            d,
            gap,
        })
    }

    /// Two identical slabs moving with `v1` and `v2`.
    pub fn slabs(slab: SlabMedium, v1: f64, v2: f64, d: f64) -> Result<Self> {
        Self::new(
            MovingBody::new(Medium::Slab(slab), v1)?,
            MovingBody::new(Medium::Slab(slab), v2)?,
            d,
        )
    }

    /// Two identical sheets moving with `v1` and `v2`.
    pub fn sheets(sheet: SheetMedium, v1: f64, v2: f64, d: f64) -> Result<Self> {
        Self::new(
            MovingBody::new(Medium::Sheet(sheet), v1)?,
            MovingBody::new(Medium::Sheet(sheet), v2)?,
            d,
        )
    }

    pub fn with_gap(mut self, gap: GapCoupling) -> Self {
        self.gap = gap;
        self
    }

    pub fn is_slabs(&self) -> bool {
        self.body1.medium.is_slab()
    }

    pub fn identical_media(&self) -> bool {
        self.body1.medium == self.body2.medium
    }

    /// `v₂ − v₁`.
    pub fn relative_velocity(&self) -> f64 {
        self.body2.v - self.body1.v
    }

    /// Swaps the bodies and negates both velocities.
    pub fn mirrored(&self) -> Self {
        Self {
            body1: MovingBody {
                medium: self.body2.medium,
                v: -self.body2.v,
            },
            body2: MovingBody {
                medium: self.body1.medium,
                v: -self.body1.v,
            },
            ..*self
        }
    }
}
