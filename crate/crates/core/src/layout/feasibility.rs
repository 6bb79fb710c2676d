//! From-scratch feasibility check of a finished packing.
//!
//! Works on raw coordinates only and never calls into the solver, so it can
//! be used as an oracle for solver output.

use std::collections::BTreeMap;

use super::{CircleId, LayoutError, ProblemInstance};
use crate::geometry::Point;
use crate::solver::Solution;

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapViolation {
    pub a: CircleId,
    pub b: CircleId,
    /// Penetration depth, `r_a + r_b - distance`.
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentViolation {
    pub id: CircleId,
    /// How far the circle reaches past the container wall.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub overlaps: Vec<OverlapViolation>,
    pub containment: Vec<ContainmentViolation>,
    /// Smallest container radius about the reported center.
    pub f1: f64,
    /// Imbalance about the reported center.
    pub f2: f64,
    pub reported_radius: f64,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.overlaps.is_empty() && self.containment.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.overlaps.len() + self.containment.len()
    }
}

pub fn verify_solution(
    instance: &ProblemInstance,
    solution: &Solution,
    tol: f64,
) -> Result<FeasibilityReport, LayoutError> {
    verify_placements(
        instance,
        &solution.positions,
        solution.container_center,
        solution.radius,
        tol,
    )
}

/// Checks every pairwise separation and every containment constraint with an
/// absolute tolerance `tol`, and recomputes both objectives.
pub fn verify_placements(
    instance: &ProblemInstance,
    positions: &BTreeMap<CircleId, Point>,
    center: Point,
    radius: f64,
    tol: f64,
) -> Result<FeasibilityReport, LayoutError> {
    if let Some(&id) = positions.keys().find(|id| !instance.contains(**id)) {
        return Err(LayoutError::UnknownCircle(id));
    }
    let mut placed = Vec::with_capacity(instance.len());
    for c in instance.circles() {
        let p = positions
            .get(&c.id)
            .ok_or(LayoutError::MissingCircle(c.id))?;
        placed.push((c.id, c.radius, c.mass, p.x, p.y));
    }
    placed.sort_by_key(|c| c.0);

    let mut overlaps = Vec::new();
    for i in 0..placed.len() {
        let (ia, ra, _, xa, ya) = placed[i];
        for &(ib, rb, _, xb, yb) in &placed[i + 1..] {
            let d = ((xa - xb).powi(2) + (ya - yb).powi(2)).sqrt();
            if d < ra + rb - tol {
                overlaps.push(OverlapViolation {
                    a: ia,
                    b: ib,
                    depth: ra + rb - d,
                });
            }
        }
    }

    let mut containment = Vec::new();
    let mut f1 = 0.0f64;
    let (mut fx, mut fy) = (0.0, 0.0);
    let w2 = instance.omega() * instance.omega();
    for &(id, r, m, x, y) in &placed {
        let reach = r + ((x - center.x).powi(2) + (y - center.y).powi(2)).sqrt();
        f1 = f1.max(reach);
        if reach > radius + tol {
            containment.push(ContainmentViolation {
                id,
                excess: reach - radius,
            });
        }
        fx += m * w2 * (x - center.x);
        fy += m * w2 * (y - center.y);
    }

    Ok(FeasibilityReport {
        overlaps,
        containment,
        f1,
        f2: (fx * fx + fy * fy).sqrt(),
        reported_radius: radius,
    })
}
