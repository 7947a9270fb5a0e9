//! Builtin structures and their potentials.

pub mod benney;
pub mod genus0;
pub mod genus1;
pub mod genus2;
mod logjet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gt::{EnhancedGt, GtStructure, Potential};

pub use genus2::CurvePoint;
pub use logjet::log_of;

/// Separation between drawn puncture coordinates.
pub const FIELD_SEPARATION: f64 = 0.2;
/// Separation of the genus-2 branch points from each other and from 0, 1.
pub const MODULI_SEPARATION: f64 = 0.3;

/// An enhanced structure with the potentials it is claimed to carry, and
/// the raw building blocks they are differences of.
#[derive(Clone, Debug)]
pub struct Family {
    pub enhanced: EnhancedGt,
    pub potentials: Vec<Potential>,
    pub raw: Vec<Potential>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyId {
    Genus0,
    Genus1,
    Genus2,
    Benney,
}

impl FamilyId {
    pub const ALL: [FamilyId; 4] = [FamilyId::Genus0, FamilyId::Genus1, FamilyId::Genus2, FamilyId::Benney];

    pub fn name(self) -> &'static str {
        match self {
            FamilyId::Genus0 => "genus0",
            FamilyId::Genus1 => "genus1",
            FamilyId::Genus2 => "genus2",
            FamilyId::Benney => "benney",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            FamilyId::Genus0 => "rational, points 0, 1, infinity fixed; fields u_1..u_n; enhanced, log potentials",
            FamilyId::Genus1 => "elliptic; fields tau, u_1..u_n; enhanced, potentials p - tau and theta logs",
            FamilyId::Genus2 => "hyperelliptic y^2 = p(p-1)(p-a)(p-b)(p-c); fields a, b, c; points on both sheets",
            FamilyId::Benney => "f = 1/(p1 - p2); fields u_1..u_n",
        }
    }

    pub fn enhanced(self) -> bool {
        matches!(self, FamilyId::Genus0 | FamilyId::Genus1)
    }
}

/// Selects a builtin structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSpec {
    pub family: FamilyId,
    /// Number of added points; ignored by genus2.
    #[serde(default = "one")]
    pub n: usize,
}

fn one() -> usize {
    1
}

impl StructureSpec {
    pub fn new(family: FamilyId, n: usize) -> Self {
        Self { family, n }
    }

    pub fn validate(&self) -> Result<()> {
        if self.family != FamilyId::Genus2 && self.n == 0 {
            return Err(Error::InvalidArgument(format!("{} needs n >= 1", self.family.name())));
        }
        Ok(())
    }

    pub fn structure(&self) -> Result<GtStructure> {
        self.validate()?;
        match self.family {
            FamilyId::Genus0 => genus0::structure(self.n),
            FamilyId::Genus1 => genus1::structure(self.n),
            FamilyId::Genus2 => genus2::structure(),
            FamilyId::Benney => benney::structure(self.n),
        }
    }

    /// The enhanced family, for the families that carry one.
    pub fn family(&self) -> Result<Family> {
        self.validate()?;
        match self.family {
            FamilyId::Genus0 => genus0::family(self.n),
            FamilyId::Genus1 => genus1::family(self.n),
            other => Err(Error::InvalidArgument(format!("{} has no enhanced structure", other.name()))),
        }
    }
}
