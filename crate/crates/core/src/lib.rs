//! Balanced packing of unequal circles into a rotating circular container.
//!
//! Circles are placed one at a time, each tangent to two circles of the
//! current outer ring, cycling through the quadrants around the moving
//! center of mass. Gaps left behind are filled at centroids, the widest
//! circle is repositioned while that shrinks the container, and the
//! container is finally centered on the center of mass so the layout has
//! zero imbalance.

pub mod geometry;
pub mod harness;
pub mod io;
pub mod layout;
pub mod permutation;
pub mod placement;
pub mod solver;

pub use geometry::{Point, Tolerance};
pub use layout::{CircleId, CircleSpec, Layout, ProblemInstance};
pub use solver::{solve, Solution, SolverConfig};
