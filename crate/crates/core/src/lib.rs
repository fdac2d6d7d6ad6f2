//! Mobile-manipulator task planning: cluster 5D targets into a minimum number
//! of base placements through reachability analysis and set cover, then
//! sequence the base tour, the target visits and the arm configurations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod error;
pub mod io;
pub mod kinematics;
pub mod model;
pub mod oracles;
pub mod pipeline;
pub mod reachability;
pub mod scp;
pub mod sequencing;
pub mod svg;
pub mod synthetic;

pub use error::{PlanError, Result};
pub use model::*;
