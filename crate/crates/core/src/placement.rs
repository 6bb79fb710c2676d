//! Placement primitives: the four-circle seed, tangent placement on the
//! border, and gap filling at a centroid.

use thiserror::Error;

use crate::geometry::{
    centroid, circles_overlap, distance, tangency_candidates, Containment, GeometryError, Point,
    Tolerance,
};
use crate::layout::{Border, CircleId, CircleSpec, Layout, LayoutError, ProblemInstance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlacementError {
    #[error("circle {k} has no tangent position touching circles {p} and {q}")]
    Unsolvable {
        k: CircleId,
        p: CircleId,
        q: CircleId,
    },
    #[error("no overlap-free tangent position for circle {k} after {iterations} repositionings")]
    NoFeasibleTangentPlacement { k: CircleId, iterations: usize },
    #[error("ring positions {p_index} and {q_index} are not consecutive")]
    NotAdjacent { p_index: usize, q_index: usize },
    #[error("seed circles {a} and {b} overlap")]
    InitialOverlap { a: CircleId, b: CircleId },
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExternalPlacementResult {
    pub position: Point,
    /// Ring positions of the two circles the new circle touches.
    pub p_index: usize,
    pub q_index: usize,
    /// Number of repositioning steps taken after the first candidate.
    pub repositionings: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalPlacementResult {
    pub position: Point,
    pub circle: CircleId,
}

/// Places the first four circles of a placement order.
///
/// The first sits at the origin, the second touches it in direction `theta`
/// and the third and fourth touch both, on opposite sides of the line
/// through their centers. The border is `first, third, second, fourth`.
pub fn initial_layout(
    first_four: &[CircleSpec; 4],
    theta: f64,
    tol: Tolerance,
) -> Result<(Layout, Border), PlacementError> {
    let [a1, a2, a3, a4] = first_four;
    let x1 = Point::ORIGIN;
    let x2 = Point::new(theta.cos(), theta.sin()) * (a1.radius + a2.radius);

    let left = tangency_candidates(a3.radius, x1, a1.radius, x2, a2.radius, tol)?;
    let right = tangency_candidates(a4.radius, x1, a1.radius, x2, a2.radius, tol)?;
    // circles in contact always admit two tangent positions
    let x3 = left.points()[0];
    let x4 = right.points()[right.count() - 1];
    if circles_overlap(x3, a3.radius, x4, a4.radius, tol) {
        return Err(PlacementError::InitialOverlap { a: a3.id, b: a4.id });
    }

    let mut layout = Layout::new();
    layout.place(a1.id, x1);
    layout.place(a2.id, x2);
    layout.place(a3.id, x3);
    layout.place(a4.id, x4);
    let border = Border::new(vec![a1.id, a3.id, a2.id, a4.id])?;
    Ok((layout, border))
}

/// Runs the tangent and gap-filling placements against one instance while
/// counting every candidate position it tests.
#[derive(Debug)]
pub struct Placer<'a> {
    instance: &'a ProblemInstance,
    tol: Tolerance,
    evaluations: u64,
}

impl<'a> Placer<'a> {
    pub fn new(instance: &'a ProblemInstance, tol: Tolerance) -> Self {
        Placer {
            instance,
            tol,
            evaluations: 0,
        }
    }

    /// Candidate positions tested so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    fn overlapped(&self, k: &CircleSpec, at: Point, layout: &Layout) -> Vec<CircleId> {
        layout
            .iter()
            .filter(|&(id, p)| {
                id != k.id && circles_overlap(at, k.radius, p, self.instance.radius(id), self.tol)
            })
            .map(|(id, _)| id)
            .collect()
    }

    fn solve_pair(
        &self,
        k: &CircleSpec,
        p: CircleId,
        q: CircleId,
        layout: &Layout,
    ) -> Result<Vec<Point>, PlacementError> {
        let xp = layout.get(p).ok_or(LayoutError::MissingCircle(p))?;
        let xq = layout.get(q).ok_or(LayoutError::MissingCircle(q))?;
        let cands = tangency_candidates(
            k.radius,
            xp,
            self.instance.radius(p),
            xq,
            self.instance.radius(q),
            self.tol,
        )?;
        if cands.is_empty() {
            return Err(PlacementError::Unsolvable { k: k.id, p, q });
        }
        Ok(cands.points().to_vec())
    }

    /// Places `k` tangent to the consecutive border circles at `p_index` and
    /// `q_index`, outside the main area.
    ///
    /// If the first candidate overlaps placed circles, the anchors are moved
    /// outward along the ring to the furthest overlapped border circle on
    /// each side and the tangent position furthest from the layout centroid
    /// is taken, until no overlap remains.
    pub fn external_placement(
        &mut self,
        k: &CircleSpec,
        p_index: usize,
        q_index: usize,
        layout: &Layout,
        border: &Border,
    ) -> Result<ExternalPlacementResult, PlacementError> {
        let t = border.len();
        if p_index >= t || q_index != (p_index + 1) % t {
            return Err(PlacementError::NotAdjacent { p_index, q_index });
        }
        let poly = border.polygon(layout)?;
        let placed: Vec<Point> = layout.iter().map(|(_, p)| p).collect();
        let center = centroid(&placed)?;

        let cands = self.solve_pair(k, border.get(p_index), border.get(q_index), layout)?;
        let outside: Vec<Point> = cands
            .iter()
            .copied()
            .filter(|&c| poly.classify(c, self.tol) != Containment::Inside)
            .collect();
        let mut position = match outside.as_slice() {
            [] => {
                return Err(PlacementError::NoFeasibleTangentPlacement {
                    k: k.id,
                    iterations: 0,
                });
            }
            [only] => *only,
            [left, right, ..] => {
                // the exterior lies to the right of a counterclockwise edge
                if poly.signed_area() > 0.0 {
                    *right
                } else {
                    *left
                }
            }
        };

        let (mut p, mut q) = (p_index, q_index);
        let mut repositionings = 0;
        loop {
            self.evaluations += 1;
            let hits = self.overlapped(k, position, layout);
            if hits.is_empty() {
                break;
            }
            repositionings += 1;
            if repositionings > t {
                return Err(PlacementError::NoFeasibleTangentPlacement {
                    k: k.id,
                    iterations: repositionings - 1,
                });
            }

            let s = border.span(p, q);
            let mut back = 0usize;
            let mut ahead = 0usize;
            for id in hits {
                let Some(j) = border.position_of(id) else {
                    continue;
                };
                let from_p = border.span(p, j);
                if from_p <= s {
                    // anchors themselves, or circles the insertion drops anyway
                    continue;
                }
                let dp = border.span(j, p);
                let dq = border.span(q, j);
                if dp <= dq {
                    back = back.max(dp);
                } else {
                    ahead = ahead.max(dq);
                }
            }
            if back == 0 && ahead == 0 {
                // only interior circles are hit: widen by one on both sides
                back = 1;
                ahead = 1;
            }
            if s + back + ahead >= t {
                return Err(PlacementError::NoFeasibleTangentPlacement {
                    k: k.id,
                    iterations: repositionings,
                });
            }
            p = (p + t - back) % t;
            q = (q + ahead) % t;

            let cands = self.solve_pair(k, border.get(p), border.get(q), layout)?;
            position = furthest_from(center, &cands);
        }

        if poly.classify(position, self.tol) == Containment::Inside {
            return Err(PlacementError::NoFeasibleTangentPlacement {
                k: k.id,
                iterations: repositionings,
            });
        }
        Ok(ExternalPlacementResult {
            position,
            p_index: p,
            q_index: q,
            repositionings,
        })
    }

    /// Looks for the largest circle of `remaining` that fits, without
    /// overlap, at the centroid of the circles `nbar`.
    ///
    /// `remaining` must be sorted by descending radius.
    pub fn internal_placement(
        &mut self,
        nbar: &[CircleId],
        remaining: &[CircleSpec],
        layout: &Layout,
        border: &Border,
    ) -> Result<Option<InternalPlacementResult>, PlacementError> {
        if remaining.is_empty() {
            return Ok(None);
        }
        let centers = nbar
            .iter()
            .map(|&id| layout.get(id).ok_or(LayoutError::MissingCircle(id)))
            .collect::<Result<Vec<_>, _>>()?;
        let xc = centroid(&centers)?;
        let poly = border.polygon(layout)?;
        if !poly.classify(xc, self.tol).is_covered() {
            return Ok(None);
        }
        for c in remaining {
            self.evaluations += 1;
            if self.overlapped(c, xc, layout).is_empty() {
                return Ok(Some(InternalPlacementResult {
                    position: xc,
                    circle: c.id,
                }));
            }
        }
        Ok(None)
    }
}

/// Candidate furthest from `center`; ties go to the larger `(y, x)`.
fn furthest_from(center: Point, cands: &[Point]) -> Point {
    let mut best = cands[0];
    for &c in &cands[1..] {
        let (dc, db) = (distance(c, center), distance(best, center));
        if dc > db || (dc == db && (c.y, c.x) > (best.y, best.x)) {
            best = c;
        }
    }
    best
}
