//! GT structures: data model, identity verification and transforms.

pub mod algebroid;
pub mod collide;
pub mod contour;
pub mod structure;
pub mod transform;
pub mod verify;

pub use algebroid::{algebroid_constants, AlgebroidTable};
pub use collide::{collide_points_closed, collide_points_limit, CollisionGroup};
pub use contour::{potential_from_contour, AffinePoint, Contour, ContourKind};
pub use structure::{EnhancedGt, GtStructure, Potential, Sampler, VerifyConfig};
pub use transform::{add_points, pushforward, pushforward_lambda, CoordinateChange};
pub use verify::{verify_axioms, verify_bracket, verify_cocycle, verify_lambda, verify_pole, verify_potential};
