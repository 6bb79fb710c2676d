//! Layout construction around the moving center of mass, followed by
//! border repositioning and recentering.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{distance, Point, Tolerance};
use crate::layout::{
    center_of_mass, envelopment_radius, imbalance_f2, objective, Border, BorderViolation, CircleId,
    CircleSpec, Layout, LayoutError, ProblemInstance,
};
use crate::placement::{initial_layout, PlacementError, Placer};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("the heuristic needs at least 4 circles, got {0}")]
    TooFewCircles(usize),
    #[error("placement order is not a permutation of the instance ids: {0}")]
    InvalidPermutation(String),
    #[error("construction stuck: circle {circle} fits on no border pair ({placed} placed, border {border:?})")]
    ConstructionStuck {
        circle: CircleId,
        placed: usize,
        border: Vec<CircleId>,
    },
    #[error("border invariant broken: {0:?}")]
    BorderInvariant(BorderViolation),
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

/// How a contact pair is picked from a nonempty quadrant bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PairPolicy {
    /// Pair whose midpoint is nearest the current center of mass.
    #[default]
    NearestCm,
    /// Uniform choice driven by the configured seed.
    SeededRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Direction of the second seed circle, in radians.
    pub theta: f64,
    pub tolerance: f64,
    /// Postoptimization accepts a move only if the radius drops by more than
    /// this fraction of the current radius.
    pub postopt_delta: f64,
    pub pair_policy: PairPolicy,
    pub seed: u64,
    pub postoptimize: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            theta: 0.0,
            tolerance: Tolerance::DEFAULT_EPS,
            postopt_delta: 1e-7,
            pair_policy: PairPolicy::NearestCm,
            seed: 0,
            postoptimize: true,
        }
    }
}

impl SolverConfig {
    pub fn tol(&self) -> Tolerance {
        Tolerance::new(self.tolerance)
    }
}

/// Quadrant index (0..4) of an offset from the center of mass.
///
/// Half-open wedges: Q1 `dx >= 0, dy > 0`, Q2 `dx < 0, dy >= 0`,
/// Q3 `dx <= 0, dy < 0`, Q4 `dx > 0, dy <= 0`; the origin itself is Q1.
pub fn quadrant_of(offset: Point) -> usize {
    let (dx, dy) = (offset.x, offset.y);
    if dx >= 0.0 && dy > 0.0 {
        0
    } else if dx < 0.0 && dy >= 0.0 {
        1
    } else if dx <= 0.0 && dy < 0.0 {
        2
    } else if dx > 0.0 && dy <= 0.0 {
        3
    } else {
        0
    }
}

/// Border contact pairs bucketed by the quadrant of their first circle.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadrantPartition {
    pub origin: Point,
    pub buckets: [Vec<(CircleId, CircleId)>; 4],
}

impl QuadrantPartition {
    pub fn q1(&self) -> &[(CircleId, CircleId)] {
        &self.buckets[0]
    }
    pub fn q2(&self) -> &[(CircleId, CircleId)] {
        &self.buckets[1]
    }
    pub fn q3(&self) -> &[(CircleId, CircleId)] {
        &self.buckets[2]
    }
    pub fn q4(&self) -> &[(CircleId, CircleId)] {
        &self.buckets[3]
    }

    pub fn len(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.iter().all(Vec::is_empty)
    }
}

pub fn cmpt_partition(
    layout: &Layout,
    border: &Border,
    instance: &ProblemInstance,
) -> Result<QuadrantPartition, SolveError> {
    let origin = center_of_mass(layout, instance)?.cm;
    let mut buckets: [Vec<(CircleId, CircleId)>; 4] = Default::default();
    for (a, b) in border.contact_pairs() {
        let xa = layout.get(a).ok_or(LayoutError::MissingCircle(a))?;
        buckets[quadrant_of(xa - origin)].push((a, b));
    }
    Ok(QuadrantPartition { origin, buckets })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub placements_external: usize,
    pub placements_internal: usize,
    /// External placements that needed the all-pairs retry.
    pub placements_fallback: usize,
    pub postopt_moves: usize,
    /// Postoptimization stopped because the widest circle is not on the border.
    pub postopt_skipped_interior: bool,
    /// Candidate positions tested for overlap over the whole run.
    pub candidate_evaluations: u64,
    pub elapsed: Duration,
}

/// Radii seen by postoptimization: the starting radius and one entry per
/// committed move.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PostoptTrace {
    pub radius_before: f64,
    pub committed: Vec<f64>,
    pub threshold: Vec<f64>,
    pub skipped_interior: bool,
}

impl PostoptTrace {
    pub fn radius_after(&self) -> f64 {
        self.committed.last().copied().unwrap_or(self.radius_before)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub positions: BTreeMap<CircleId, Point>,
    pub container_center: Point,
    pub radius: f64,
    pub f1: f64,
    pub f2: f64,
    pub objective: f64,
    pub permutation: Vec<CircleId>,
    /// Final border ring, in ring order.
    pub border: Vec<CircleId>,
    pub stats: SolveStats,
    pub postopt: PostoptTrace,
}

impl Solution {
    /// Equality on every field except wall-clock timing.
    pub fn same_result(&self, other: &Solution) -> bool {
        let mut a = self.stats.clone();
        let mut b = other.stats.clone();
        a.elapsed = Duration::ZERO;
        b.elapsed = Duration::ZERO;
        self.positions == other.positions
            && self.container_center == other.container_center
            && self.radius == other.radius
            && self.f1 == other.f1
            && self.f2 == other.f2
            && self.objective == other.objective
            && self.permutation == other.permutation
            && self.border == other.border
            && self.postopt == other.postopt
            && a == b
    }
}

/// State of one solve: the instance, the candidate counter and statistics.
struct Run<'a> {
    instance: &'a ProblemInstance,
    config: SolverConfig,
    placer: Placer<'a>,
    rng: ChaCha8Rng,
    stats: SolveStats,
}

impl<'a> Run<'a> {
    fn new(instance: &'a ProblemInstance, config: SolverConfig) -> Self {
        Run {
            instance,
            config,
            placer: Placer::new(instance, config.tol()),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            stats: SolveStats::default(),
        }
    }

    fn spec(&self, id: CircleId) -> CircleSpec {
        *self
            .instance
            .circle(id)
            .expect("id validated against instance")
    }

    fn validate(&self, permutation: &[CircleId]) -> Result<(), SolveError> {
        let n = self.instance.len();
        if n < 4 {
            return Err(SolveError::TooFewCircles(n));
        }
        if permutation.len() != n {
            return Err(SolveError::InvalidPermutation(format!(
                "expected {n} ids, got {}",
                permutation.len()
            )));
        }
        let mut seen = HashSet::with_capacity(n);
        for &id in permutation {
            if !self.instance.contains(id) {
                return Err(SolveError::InvalidPermutation(format!("unknown id {id}")));
            }
            if !seen.insert(id) {
                return Err(SolveError::InvalidPermutation(format!("repeated id {id}")));
            }
        }
        Ok(())
    }

    fn construct(&mut self, permutation: &[CircleId]) -> Result<(Layout, Border), SolveError> {
        self.validate(permutation)?;
        let first_four = [
            self.spec(permutation[0]),
            self.spec(permutation[1]),
            self.spec(permutation[2]),
            self.spec(permutation[3]),
        ];
        let tol = self.config.tol();
        let (mut layout, mut border) = initial_layout(&first_four, self.config.theta, tol)?;
        let mut queue: VecDeque<CircleId> = permutation[4..].iter().copied().collect();

        while !queue.is_empty() {
            let mut buckets = cmpt_partition(&layout, &border, self.instance)?.buckets;
            while !queue.is_empty() && buckets.iter().any(|b| !b.is_empty()) {
                for h in 0..4 {
                    if queue.is_empty() {
                        break;
                    }
                    buckets[h].retain(|&(a, b)| border.pair_position(a, b).is_some());
                    if buckets[h].is_empty() {
                        continue;
                    }
                    let pick = self.choose_pair(&buckets[h], &layout, &border)?;
                    let pair = buckets[h][pick];
                    let k = queue[0];

                    let consumed = match self.include(k, pair, &mut layout, &mut border, &mut queue)
                    {
                        Ok(consumed) => consumed,
                        Err(_) => {
                            buckets[h].remove(pick);
                            self.include_anywhere(k, pair, &mut layout, &mut border, &mut queue)?
                        }
                    };
                    for bucket in buckets.iter_mut() {
                        bucket.retain(|p| !consumed.contains(p));
                    }
                }
            }
        }
        Ok((layout, border))
    }

    fn choose_pair(
        &mut self,
        bucket: &[(CircleId, CircleId)],
        layout: &Layout,
        border: &Border,
    ) -> Result<usize, SolveError> {
        match self.config.pair_policy {
            PairPolicy::SeededRandom => Ok(self.rng.gen_range(0..bucket.len())),
            PairPolicy::NearestCm => {
                let cm = center_of_mass(layout, self.instance)?.cm;
                let key = |&(a, b): &(CircleId, CircleId)| {
                    let mid = layout.get(a).unwrap().midpoint(layout.get(b).unwrap());
                    (
                        distance(mid, cm),
                        border.position_of(a).unwrap_or(usize::MAX),
                    )
                };
                let mut best = 0;
                let mut best_key = key(&bucket[0]);
                for (i, pair) in bucket.iter().enumerate().skip(1) {
                    let k = key(pair);
                    if k.0 < best_key.0 || (k.0 == best_key.0 && k.1 < best_key.1) {
                        best = i;
                        best_key = k;
                    }
                }
                Ok(best)
            }
        }
    }

    /// Retries the external placement of `k` over every border pair, nearest
    /// midpoint to the center of mass first.
    fn include_anywhere(
        &mut self,
        k: CircleId,
        failed: (CircleId, CircleId),
        layout: &mut Layout,
        border: &mut Border,
        queue: &mut VecDeque<CircleId>,
    ) -> Result<Vec<(CircleId, CircleId)>, SolveError> {
        let cm = center_of_mass(layout, self.instance)?.cm;
        let mut pairs: Vec<(f64, usize, (CircleId, CircleId))> = border
            .contact_pairs()
            .into_iter()
            .enumerate()
            .filter(|&(_, pair)| pair != failed)
            .map(|(i, (a, b))| {
                let mid = layout.get(a).unwrap().midpoint(layout.get(b).unwrap());
                (distance(mid, cm), i, (a, b))
            })
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for (_, _, pair) in pairs {
            if let Ok(consumed) = self.include(k, pair, layout, border, queue) {
                self.stats.placements_fallback += 1;
                return Ok(consumed);
            }
        }
        Err(SolveError::ConstructionStuck {
            circle: k,
            placed: layout.len(),
            border: border.ids().to_vec(),
        })
    }

    /// External placement of `k` on `pair`, the ring update, and an optional
    /// gap fill. Leaves all state untouched on error.
    ///
    /// Returns the contact pairs consumed by the ring update.
    fn include(
        &mut self,
        k: CircleId,
        pair: (CircleId, CircleId),
        layout: &mut Layout,
        border: &mut Border,
        queue: &mut VecDeque<CircleId>,
    ) -> Result<Vec<(CircleId, CircleId)>, SolveError> {
        let tol = self.config.tol();
        let spec = self.spec(k);
        let p_index = border
            .pair_position(pair.0, pair.1)
            .ok_or(LayoutError::UnknownCircle(pair.0))?;
        let t = border.len();
        let ext =
            self.placer
                .external_placement(&spec, p_index, (p_index + 1) % t, layout, border)?;
        let (p, q) = shorter_side(border, ext.p_index, ext.q_index);
        let (next_border, _) = border.insert(k, p, q)?;

        let mut next_layout = layout.clone();
        next_layout.place(k, ext.position);
        next_border
            .check(&next_layout, self.instance, tol, true)
            .map_err(SolveError::BorderInvariant)?;

        let s = border.span(p, q);
        let consumed: Vec<(CircleId, CircleId)> = (0..s)
            .map(|j| (border.get(p + j), border.get(p + j + 1)))
            .collect();
        let mut nbar = vec![k];
        nbar.extend((0..=s).map(|j| border.get(p + j)));

        *layout = next_layout;
        *border = next_border;
        queue.retain(|&id| id != k);
        self.stats.placements_external += 1;

        let mut remaining: Vec<CircleSpec> = queue.iter().map(|&id| self.spec(id)).collect();
        remaining.sort_by(|a, b| b.radius.total_cmp(&a.radius).then(a.id.cmp(&b.id)));
        if let Some(fill) = self
            .placer
            .internal_placement(&nbar, &remaining, layout, border)?
        {
            layout.place(fill.circle, fill.position);
            queue.retain(|&id| id != fill.circle);
            self.stats.placements_internal += 1;
        }
        Ok(consumed)
    }

    fn postoptimize(
        &mut self,
        layout: &mut Layout,
        border: &mut Border,
    ) -> Result<PostoptTrace, SolveError> {
        let tol = self.config.tol();
        let mut trace = PostoptTrace::default();
        let mut first = true;
        loop {
            let cm = center_of_mass(layout, self.instance)?.cm;
            let env = envelopment_radius(layout, cm, self.instance)?;
            if first {
                trace.radius_before = env.radius;
                first = false;
            }
            if border.len() < 4 {
                break;
            }
            let Some(k_pos) = border.position_of(env.k_max) else {
                trace.skipped_interior = true;
                self.stats.postopt_skipped_interior = true;
                break;
            };
            let k = env.k_max;
            let spec = self.spec(k);
            let delta = self.config.postopt_delta * env.radius;
            let t = border.len();

            let saved = layout.remove(k).expect("border circle is placed");
            let reduced = border.delete(k_pos)?;
            let pairs: Vec<(CircleId, CircleId)> = border
                .contact_pairs()
                .into_iter()
                .enumerate()
                .filter(|&(j, _)| j != (k_pos + t - 1) % t && j != k_pos)
                .map(|(_, pair)| pair)
                .collect();

            let mut accepted = None;
            for (a, b) in pairs {
                let Some(pi) = reduced.pair_position(a, b) else {
                    continue;
                };
                let r = reduced.len();
                let Ok(ext) =
                    self.placer
                        .external_placement(&spec, pi, (pi + 1) % r, layout, &reduced)
                else {
                    continue;
                };
                let mut trial = layout.clone();
                trial.place(k, ext.position);
                let trial_cm = center_of_mass(&trial, self.instance)?.cm;
                let trial_r = envelopment_radius(&trial, trial_cm, self.instance)?.radius;
                if trial_r >= env.radius - delta {
                    continue;
                }
                let (p, q) = shorter_side(&reduced, ext.p_index, ext.q_index);
                let Ok((next_border, _)) = reduced.insert(k, p, q) else {
                    continue;
                };
                if next_border
                    .check(&trial, self.instance, tol, false)
                    .is_err()
                {
                    continue;
                }
                accepted = Some((trial, next_border, trial_r));
                break;
            }

            match accepted {
                Some((trial, next_border, r)) => {
                    *layout = trial;
                    *border = next_border;
                    trace.committed.push(r);
                    trace.threshold.push(delta);
                    self.stats.postopt_moves += 1;
                }
                None => {
                    layout.place(k, saved);
                    break;
                }
            }
        }
        Ok(trace)
    }
}

/// Orients a span so that the forward walk from `p` to `q` is the side with
/// fewer ring positions in between.
fn shorter_side(border: &Border, p: usize, q: usize) -> (usize, usize) {
    let t = border.len();
    let s = border.span(p, q);
    if t - s < s {
        (q, p)
    } else {
        (p, q)
    }
}

/// Builds a complete layout for one placement order, without
/// postoptimization.
pub fn construct_layout(
    instance: &ProblemInstance,
    permutation: &[CircleId],
    config: &SolverConfig,
) -> Result<(Layout, Border), SolveError> {
    Run::new(instance, *config).construct(permutation)
}

/// Repositions the circle realizing the envelopment radius while that
/// shrinks the radius by more than the configured threshold.
pub fn postoptimize(
    layout: &Layout,
    border: &Border,
    instance: &ProblemInstance,
    config: &SolverConfig,
) -> Result<(Layout, Border, PostoptTrace), SolveError> {
    let mut run = Run::new(instance, *config);
    let mut layout = layout.clone();
    let mut border = border.clone();
    let trace = run.postoptimize(&mut layout, &mut border)?;
    Ok((layout, border, trace))
}

/// Full solve for one placement order: construction, postoptimization and
/// recentering on the center of mass.
pub fn solve(
    instance: &ProblemInstance,
    permutation: &[CircleId],
    config: &SolverConfig,
) -> Result<Solution, SolveError> {
    let start = Instant::now();
    let mut run = Run::new(instance, *config);
    let (mut layout, mut border) = run.construct(permutation)?;
    let postopt = if config.postoptimize {
        run.postoptimize(&mut layout, &mut border)?
    } else {
        let cm = center_of_mass(&layout, instance)?.cm;
        let r = envelopment_radius(&layout, cm, instance)?.radius;
        PostoptTrace {
            radius_before: r,
            ..PostoptTrace::default()
        }
    };

    let cm = center_of_mass(&layout, instance)?.cm;
    let env = envelopment_radius(&layout, cm, instance)?;
    let f2 = imbalance_f2(&layout, cm, instance, instance.omega())?;
    let mut stats = run.stats;
    stats.candidate_evaluations = run.placer.evaluations();
    stats.elapsed = start.elapsed();
    Ok(Solution {
        positions: layout.into_positions(),
        container_center: cm,
        radius: env.radius,
        f1: env.radius,
        f2,
        objective: objective(env.radius, f2, instance.lambda(), instance.beta()),
        permutation: permutation.to_vec(),
        border: border.ids().to_vec(),
        stats,
        postopt,
    })
}
