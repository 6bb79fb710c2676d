//! Placement orders: the descending-radius base order and block shuffles of
//! it.
//!
//! The base order is cut into `b` leading blocks of `floor(n / b)` ids plus
//! a tail holding the rest. A block shuffle permutes ids inside each block
//! independently, so there are `(l!)^b * (n - b*l)!` distinct orders.

use std::collections::HashSet;

use itertools::Itertools;
use num_bigint::BigUint;
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::layout::{CircleId, CircleSpec};

/// Above this many orders the space is sampled by rejection instead of
/// being enumerated.
const ENUMERATION_LIMIT: u64 = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PermutationError {
    #[error("block count {b} must lie in 1..={n}")]
    InvalidBlockCount { b: usize, n: usize },
    #[error("cannot draw {count} distinct orders from a space of {space}")]
    CountExceedsSpace { count: usize, space: BigUint },
    #[error("no circles to order")]
    Empty,
}

/// Ids sorted by radius, largest first; equal radii by ascending id.
pub fn descending_order(circles: &[CircleSpec]) -> Vec<CircleId> {
    let mut sorted: Vec<&CircleSpec> = circles.iter().collect();
    sorted.sort_by(|a, b| b.radius.total_cmp(&a.radius).then(a.id.cmp(&b.id)));
    sorted.into_iter().map(|c| c.id).collect()
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::from(1u8), |acc, k| acc * k)
}

/// Number of distinct block shuffles of `n` ids with `b` blocks.
///
/// Panics unless `1 <= b <= n`.
pub fn permutation_space_size(n: usize, b: usize) -> BigUint {
    assert!(b >= 1 && b <= n, "block count {b} outside 1..={n}");
    let l = n / b;
    factorial(l).pow(b as u32) * factorial(n - b * l)
}

/// Block count used when none is given: 5 from ten circles up, else 1.
pub fn default_block_count(n: usize) -> usize {
    if n >= 10 {
        5
    } else {
        1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationScheme {
    base: Vec<CircleId>,
    blocks: usize,
    seed: u64,
}

impl PermutationScheme {
    pub fn new(circles: &[CircleSpec], blocks: usize, seed: u64) -> Result<Self, PermutationError> {
        Self::from_base(descending_order(circles), blocks, seed)
    }

    /// Uses `base` as given instead of sorting by radius.
    pub fn from_base(
        base: Vec<CircleId>,
        blocks: usize,
        seed: u64,
    ) -> Result<Self, PermutationError> {
        let n = base.len();
        if n == 0 {
            return Err(PermutationError::Empty);
        }
        if blocks == 0 || blocks > n {
            return Err(PermutationError::InvalidBlockCount { b: blocks, n });
        }
        Ok(PermutationScheme { base, blocks, seed })
    }

    pub fn base(&self) -> &[CircleId] {
        &self.base
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn block_size(&self) -> usize {
        self.base.len() / self.blocks
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn space_size(&self) -> BigUint {
        permutation_space_size(self.base.len(), self.blocks)
    }

    /// Index ranges of the shuffled segments: `b` blocks, then the tail if
    /// it is nonempty.
    pub fn segments(&self) -> Vec<std::ops::Range<usize>> {
        let (n, l) = (self.base.len(), self.block_size());
        let mut out: Vec<_> = (0..self.blocks).map(|i| i * l..(i + 1) * l).collect();
        if self.blocks * l < n {
            out.push(self.blocks * l..n);
        }
        out
    }

    /// Every distinct block shuffle, in lexicographic order of the per-block
    /// permutations.
    pub fn enumerate(&self) -> impl Iterator<Item = Vec<CircleId>> + '_ {
        self.segments()
            .into_iter()
            .map(|r| {
                let block = self.base[r].to_vec();
                let len = block.len();
                block.into_iter().permutations(len).collect::<Vec<_>>()
            })
            .multi_cartesian_product()
            .map(|parts| parts.concat())
    }

    fn shuffled(&self, rng: &mut ChaCha8Rng) -> Vec<CircleId> {
        let mut order = self.base.clone();
        for r in self.segments() {
            order[r].shuffle(rng);
        }
        order
    }

    /// Draws `count` block shuffles, seeded by the scheme's seed.
    ///
    /// Orders are distinct while `count` fits in the space. Beyond that the
    /// call fails unless `allow_repeats` is set.
    pub fn sample(
        &self,
        count: usize,
        allow_repeats: bool,
    ) -> Result<Vec<Vec<CircleId>>, PermutationError> {
        let space = self.space_size();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        if BigUint::from(count) > space {
            if !allow_repeats {
                return Err(PermutationError::CountExceedsSpace { count, space });
            }
            return Ok((0..count).map(|_| self.shuffled(&mut rng)).collect());
        }
        if space <= BigUint::from(ENUMERATION_LIMIT) {
            let all: Vec<Vec<CircleId>> = self.enumerate().collect();
            let picks = index::sample(&mut rng, all.len(), count);
            return Ok(picks.into_iter().map(|i| all[i].clone()).collect());
        }
        let mut seen = HashSet::with_capacity(count);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let order = self.shuffled(&mut rng);
            if seen.insert(order.clone()) {
                out.push(order);
            }
        }
        Ok(out)
    }
}
