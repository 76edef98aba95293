//! Wall-crossing toolkit: twisted torus algebra, flat geometry of quadratic
//! differentials, homology lattices, path lifting and lamination coordinates.

pub mod cli;
pub mod flat_geometry;
pub mod homology;
pub mod laminations;
pub mod lattice_algebra;
pub mod path_lift;
