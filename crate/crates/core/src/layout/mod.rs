//! Problem data and the state of a packing in progress.

mod border;
mod feasibility;

pub use border::{Border, BorderViolation};
pub use feasibility::{
    verify_placements, verify_solution, ContainmentViolation, FeasibilityReport, OverlapViolation,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{distance, Point};

pub type CircleId = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("instance has no circles")]
    EmptyInstance,
    #[error("circle {id}: {reason}")]
    InvalidCircle { id: CircleId, reason: &'static str },
    #[error("duplicate circle id {0}")]
    DuplicateId(CircleId),
    #[error("{name} must lie in {range}, got {value}")]
    InvalidParameter {
        name: &'static str,
        range: &'static str,
        value: f64,
    },
    #[error("no circle has been placed")]
    EmptyLayout,
    #[error("unknown circle id {0}")]
    UnknownCircle(CircleId),
    #[error("circle {0} has no position")]
    MissingCircle(CircleId),
    #[error("border needs at least 3 circles, got {0}")]
    BorderTooShort(usize),
    #[error("span {span} outside 1..={max} for a ring of {len}")]
    InvalidSpan { span: usize, max: usize, len: usize },
    #[error("ring position {index} out of range for a ring of {len}")]
    PositionOutOfRange { index: usize, len: usize },
    #[error("deleting from a ring of {0} would leave fewer than 3 circles")]
    TooSmall(usize),
}

/// One circle to be packed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleSpec {
    pub id: CircleId,
    pub radius: f64,
    pub mass: f64,
}

impl CircleSpec {
    pub fn new(id: CircleId, radius: f64, mass: f64) -> Self {
        CircleSpec { id, radius, mass }
    }
}

pub const DEFAULT_LAMBDA: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 0.5;
pub const DEFAULT_OMEGA: f64 = 1.0;

/// A validated set of circles plus the objective weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    name: String,
    circles: Vec<CircleSpec>,
    index: BTreeMap<CircleId, usize>,
    lambda: f64,
    beta: f64,
    omega: f64,
}

impl ProblemInstance {
    pub fn new(name: impl Into<String>, circles: Vec<CircleSpec>) -> Result<Self, LayoutError> {
        if circles.is_empty() {
            return Err(LayoutError::EmptyInstance);
        }
        let mut index = BTreeMap::new();
        for (i, c) in circles.iter().enumerate() {
            if !(c.radius.is_finite() && c.radius > 0.0) {
                return Err(LayoutError::InvalidCircle {
                    id: c.id,
                    reason: "radius must be finite and positive",
                });
            }
            if !(c.mass.is_finite() && c.mass > 0.0) {
                return Err(LayoutError::InvalidCircle {
                    id: c.id,
                    reason: "mass must be finite and positive",
                });
            }
            if index.insert(c.id, i).is_some() {
                return Err(LayoutError::DuplicateId(c.id));
            }
        }
        Ok(ProblemInstance {
            name: name.into(),
            circles,
            index,
            lambda: DEFAULT_LAMBDA,
            beta: DEFAULT_BETA,
            omega: DEFAULT_OMEGA,
        })
    }

    pub fn with_weights(mut self, lambda: f64, beta: f64) -> Result<Self, LayoutError> {
        check_open_unit("lambda", lambda)?;
        check_open_unit("beta", beta)?;
        self.lambda = lambda;
        self.beta = beta;
        Ok(self)
    }

    pub fn with_omega(mut self, omega: f64) -> Result<Self, LayoutError> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(LayoutError::InvalidParameter {
                name: "omega",
                range: "(0, inf)",
                value: omega,
            });
        }
        self.omega = omega;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn circles(&self) -> &[CircleSpec] {
        &self.circles
    }

    pub fn len(&self) -> usize {
        self.circles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circles.is_empty()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn circle(&self, id: CircleId) -> Option<&CircleSpec> {
        self.index.get(&id).map(|&i| &self.circles[i])
    }

    pub fn contains(&self, id: CircleId) -> bool {
        self.index.contains_key(&id)
    }

    /// Radius of a circle known to belong to the instance.
    ///
    /// Panics on an unknown id.
    pub fn radius(&self, id: CircleId) -> f64 {
        self.circles[self.index[&id]].radius
    }

    pub fn mass(&self, id: CircleId) -> f64 {
        self.circles[self.index[&id]].mass
    }

    pub fn total_mass(&self) -> f64 {
        self.circles.iter().map(|c| c.mass).sum()
    }

    /// Radius of the smallest container that could hold the total disk area.
    pub fn area_lower_bound(&self) -> f64 {
        self.circles
            .iter()
            .map(|c| c.radius * c.radius)
            .sum::<f64>()
            .sqrt()
    }
}

fn check_open_unit(name: &'static str, value: f64) -> Result<(), LayoutError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(LayoutError::InvalidParameter {
            name,
            range: "(0, 1)",
            value,
        })
    }
}

/// Center positions of the circles placed so far.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Layout {
    positions: BTreeMap<CircleId, Point>,
}

impl Layout {
    pub fn new() -> Self {
        Layout::default()
    }

    pub fn from_positions(positions: BTreeMap<CircleId, Point>) -> Self {
        Layout { positions }
    }

    pub fn place(&mut self, id: CircleId, at: Point) -> Option<Point> {
        self.positions.insert(id, at)
    }

    pub fn remove(&mut self, id: CircleId) -> Option<Point> {
        self.positions.remove(&id)
    }

    pub fn get(&self, id: CircleId) -> Option<Point> {
        self.positions.get(&id).copied()
    }

    pub fn contains(&self, id: CircleId) -> bool {
        self.positions.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (CircleId, Point)> + '_ {
        self.positions.iter().map(|(&id, &p)| (id, p))
    }

    pub fn ids(&self) -> impl Iterator<Item = CircleId> + '_ {
        self.positions.keys().copied()
    }

    pub fn positions(&self) -> &BTreeMap<CircleId, Point> {
        &self.positions
    }

    pub fn into_positions(self) -> BTreeMap<CircleId, Point> {
        self.positions
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassAggregate {
    pub cm: Point,
    pub total_mass: f64,
}

pub fn center_of_mass(
    layout: &Layout,
    instance: &ProblemInstance,
) -> Result<MassAggregate, LayoutError> {
    if layout.is_empty() {
        return Err(LayoutError::EmptyLayout);
    }
    let (mut mx, mut my, mut total) = (0.0, 0.0, 0.0);
    for (id, p) in layout.iter() {
        let m = instance
            .circle(id)
            .ok_or(LayoutError::UnknownCircle(id))?
            .mass;
        mx += m * p.x;
        my += m * p.y;
        total += m;
    }
    Ok(MassAggregate {
        cm: Point::new(mx / total, my / total),
        total_mass: total,
    })
}

/// Magnitude of the net centrifugal force about `container_center`.
pub fn imbalance_f2(
    layout: &Layout,
    container_center: Point,
    instance: &ProblemInstance,
    omega: f64,
) -> Result<f64, LayoutError> {
    if layout.is_empty() {
        return Err(LayoutError::EmptyLayout);
    }
    let w2 = omega * omega;
    let (mut fx, mut fy) = (0.0, 0.0);
    for (id, p) in layout.iter() {
        let m = instance
            .circle(id)
            .ok_or(LayoutError::UnknownCircle(id))?
            .mass;
        fx += m * w2 * (p.x - container_center.x);
        fy += m * w2 * (p.y - container_center.y);
    }
    Ok(fx.hypot(fy))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub radius: f64,
    /// Circle realizing the radius; smallest id on exact ties.
    pub k_max: CircleId,
}

pub fn envelopment_radius(
    layout: &Layout,
    center: Point,
    instance: &ProblemInstance,
) -> Result<Envelope, LayoutError> {
    let mut best: Option<Envelope> = None;
    for (id, p) in layout.iter() {
        let r = instance
            .circle(id)
            .ok_or(LayoutError::UnknownCircle(id))?
            .radius;
        let reach = r + distance(center, p);
        if best.is_none_or(|b| reach > b.radius) {
            best = Some(Envelope {
                radius: reach,
                k_max: id,
            });
        }
    }
    best.ok_or(LayoutError::EmptyLayout)
}

#[inline]
pub fn objective(f1: f64, f2: f64, lambda: f64, beta: f64) -> f64 {
    lambda * f1 + beta * f2
}
