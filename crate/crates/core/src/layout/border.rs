use std::collections::HashSet;

use super::{CircleId, Layout, LayoutError, ProblemInstance};
use crate::geometry::{distance, MainAreaPolygon, Tolerance};

/// Cyclic ring of circle ids forming the outer contact ring of a layout.
///
/// Positions index the stored ring directly. Equality is cyclic: two borders
/// are equal when one is a rotation of the other.
#[derive(Debug, Clone)]
pub struct Border {
    ring: Vec<CircleId>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BorderViolation {
    MissingPlacement(CircleId),
    NotInContact(CircleId, CircleId),
    NotSimple,
    CenterOutside(CircleId),
}

impl Border {
    pub fn new(ring: Vec<CircleId>) -> Result<Self, LayoutError> {
        if ring.len() < 3 {
            return Err(LayoutError::BorderTooShort(ring.len()));
        }
        let mut seen = HashSet::with_capacity(ring.len());
        for &id in &ring {
            if !seen.insert(id) {
                return Err(LayoutError::DuplicateId(id));
            }
        }
        Ok(Border { ring })
    }

    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    pub fn ids(&self) -> &[CircleId] {
        &self.ring
    }

    pub fn get(&self, index: usize) -> CircleId {
        self.ring[index % self.ring.len()]
    }

    pub fn position_of(&self, id: CircleId) -> Option<usize> {
        self.ring.iter().position(|&x| x == id)
    }

    pub fn contains(&self, id: CircleId) -> bool {
        self.ring.contains(&id)
    }

    /// Forward distance from ring position `from` to `to`.
    pub fn span(&self, from: usize, to: usize) -> usize {
        let t = self.ring.len();
        (to + t - from % t) % t
    }

    /// Largest span accepted by [`Border::insert`]. A plain insertion
    /// (span 1) is always allowed.
    pub fn max_span(&self) -> usize {
        ((self.ring.len().saturating_sub(2)) / 2).max(1)
    }

    /// Inserts `k` after position `p_index` and drops every id strictly
    /// between `p_index` and `q_index` (walking forward).
    ///
    /// Returns the new ring and the removed ids in ring order.
    pub fn insert(
        &self,
        k: CircleId,
        p_index: usize,
        q_index: usize,
    ) -> Result<(Border, Vec<CircleId>), LayoutError> {
        let t = self.ring.len();
        for index in [p_index, q_index] {
            if index >= t {
                return Err(LayoutError::PositionOutOfRange { index, len: t });
            }
        }
        if self.contains(k) {
            return Err(LayoutError::DuplicateId(k));
        }
        let s = self.span(p_index, q_index);
        let max = self.max_span();
        if s == 0 || s > max {
            return Err(LayoutError::InvalidSpan {
                span: s,
                max,
                len: t,
            });
        }
        let removed: Vec<CircleId> = (1..s).map(|j| self.ring[(p_index + j) % t]).collect();
        let mut ring = Vec::with_capacity(t + 2 - s);
        for (i, &id) in self.ring.iter().enumerate() {
            if self.span(p_index, i) < s && i != p_index {
                continue;
            }
            ring.push(id);
            if i == p_index {
                ring.push(k);
            }
        }
        Ok((Border { ring }, removed))
    }

    pub fn delete(&self, p_index: usize) -> Result<Border, LayoutError> {
        let t = self.ring.len();
        if p_index >= t {
            return Err(LayoutError::PositionOutOfRange {
                index: p_index,
                len: t,
            });
        }
        if t < 4 {
            return Err(LayoutError::TooSmall(t));
        }
        let mut ring = self.ring.clone();
        ring.remove(p_index);
        Ok(Border { ring })
    }

    /// The `t` consecutive cyclic pairs, starting at the first stored id.
    pub fn contact_pairs(&self) -> Vec<(CircleId, CircleId)> {
        let t = self.ring.len();
        (0..t)
            .map(|i| (self.ring[i], self.ring[(i + 1) % t]))
            .collect()
    }

    /// Position of `a` when `(a, b)` is a consecutive pair of the ring.
    pub fn pair_position(&self, a: CircleId, b: CircleId) -> Option<usize> {
        let p = self.position_of(a)?;
        (self.get(p + 1) == b).then_some(p)
    }

    /// Rotation starting at the smallest id.
    pub fn canonical(&self) -> Vec<CircleId> {
        let start = self
            .ring
            .iter()
            .enumerate()
            .min_by_key(|&(_, id)| *id)
            .map_or(0, |(i, _)| i);
        self.ring[start..]
            .iter()
            .chain(&self.ring[..start])
            .copied()
            .collect()
    }

    pub fn polygon(&self, layout: &Layout) -> Result<MainAreaPolygon, LayoutError> {
        let vertices = self
            .ring
            .iter()
            .map(|&id| layout.get(id).ok_or(LayoutError::MissingCircle(id)))
            .collect::<Result<Vec<_>, _>>()?;
        MainAreaPolygon::new(vertices).map_err(|_| LayoutError::BorderTooShort(self.ring.len()))
    }

    /// Checks that the ring is a border of `layout`: every id is placed, the
    /// center polygon is simple, every placed center is covered by it and,
    /// when `require_contact` is set, consecutive circles touch.
    pub fn check(
        &self,
        layout: &Layout,
        instance: &ProblemInstance,
        tol: Tolerance,
        require_contact: bool,
    ) -> Result<(), BorderViolation> {
        for &id in &self.ring {
            if !layout.contains(id) {
                return Err(BorderViolation::MissingPlacement(id));
            }
        }
        if require_contact {
            for (a, b) in self.contact_pairs() {
                let sum = instance.radius(a) + instance.radius(b);
                let d = distance(layout.get(a).unwrap(), layout.get(b).unwrap());
                if (d - sum).abs() > tol.relative(sum) {
                    return Err(BorderViolation::NotInContact(a, b));
                }
            }
        }
        let poly = self
            .polygon(layout)
            .map_err(|_| BorderViolation::NotSimple)?;
        if !poly.is_simple(tol) {
            return Err(BorderViolation::NotSimple);
        }
        for (id, p) in layout.iter() {
            if !poly.classify(p, tol).is_covered() {
                return Err(BorderViolation::CenterOutside(id));
            }
        }
        Ok(())
    }
}

impl PartialEq for Border {
    fn eq(&self, other: &Self) -> bool {
        self.ring.len() == other.ring.len() && self.canonical() == other.canonical()
    }
}

impl Eq for Border {}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring(ids: &[CircleId]) -> Border {
        Border::new(ids.to_vec()).unwrap()
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Border::new(vec![1, 2]).unwrap_err(),
            LayoutError::BorderTooShort(2)
        );
        assert_eq!(
            Border::new(vec![1, 2, 1]).unwrap_err(),
            LayoutError::DuplicateId(1)
        );
    }

    #[test]
    fn insert_without_removal() {
        let (b, removed) = ring(&[1, 3, 2, 4]).insert(5, 0, 1).unwrap();
        assert_eq!(b.ids(), &[1, 5, 3, 2, 4]);
        assert!(removed.is_empty());
    }

    #[test]
    fn insert_with_removal() {
        // a..f = 1..6
        let (b, removed) = ring(&[1, 2, 3, 4, 5, 6]).insert(9, 0, 2).unwrap();
        assert_eq!(b.ids(), &[1, 9, 3, 4, 5, 6]);
        assert_eq!(removed, vec![2]);
    }

    #[test]
    fn insert_wrapping() {
        let c = ring(&[1, 2, 3, 4]);
        let (b, _) = c.insert(9, 3, 0).unwrap();
        assert_eq!(b.ids(), &[1, 2, 3, 4, 9]);
        // cross-check: rotate so the anchor comes first, then insert
        let rotated = ring(&[4, 1, 2, 3]);
        let (b2, _) = rotated.insert(9, 0, 1).unwrap();
        assert_eq!(b, b2);
    }

    #[test]
    fn insert_wrapping_with_removal() {
        let c = ring(&[1, 2, 3, 4, 5, 6, 7, 8]);
        let (b, removed) = c.insert(9, 6, 1).unwrap();
        assert_eq!(removed, vec![8, 1]);
        assert_eq!(b, ring(&[2, 3, 4, 5, 6, 7, 9]));
    }

    #[test]
    fn insert_errors() {
        let c = ring(&[1, 3, 2, 4]);
        assert!(matches!(
            c.insert(5, 0, 2),
            Err(LayoutError::InvalidSpan {
                span: 2,
                max: 1,
                ..
            })
        ));
        assert!(matches!(
            c.insert(5, 0, 0),
            Err(LayoutError::InvalidSpan { span: 0, .. })
        ));
        assert_eq!(c.insert(3, 0, 1).unwrap_err(), LayoutError::DuplicateId(3));
        assert!(matches!(
            c.insert(5, 0, 9),
            Err(LayoutError::PositionOutOfRange { .. })
        ));
    }

    #[test]
    fn delete_examples() {
        let c = ring(&[1, 3, 2, 4]);
        assert_eq!(c.delete(2).unwrap().ids(), &[1, 3, 4]);
        assert_eq!(c.delete(0).unwrap().ids(), &[3, 2, 4]);
        assert_eq!(
            ring(&[1, 2, 3]).delete(0).unwrap_err(),
            LayoutError::TooSmall(3)
        );
    }

    #[test]
    fn contact_pair_examples() {
        assert_eq!(
            ring(&[1, 3, 2, 4]).contact_pairs(),
            vec![(1, 3), (3, 2), (2, 4), (4, 1)]
        );
        assert_eq!(
            ring(&[7, 8, 9]).contact_pairs(),
            vec![(7, 8), (8, 9), (9, 7)]
        );
        let c = ring(&[1, 3, 2, 4]);
        let (b, _) = c.insert(5, 2, 3).unwrap();
        assert_eq!(b.contact_pairs().len(), c.contact_pairs().len() + 1);
    }

    #[test]
    fn cyclic_equality() {
        assert_eq!(ring(&[1, 3, 2, 4]), ring(&[2, 4, 1, 3]));
        assert_ne!(ring(&[1, 3, 2, 4]), ring(&[1, 4, 2, 3]));
        assert_eq!(ring(&[3, 1, 2]).canonical(), vec![1, 2, 3]);
    }

    proptest! {
        #[test]
        fn insert_then_delete_is_identity(t in 3usize..20, p in 0usize..20) {
            let c = Border::new((1..=t as u32).collect()).unwrap();
            let p = p % t;
            let (b, removed) = c.insert(100, p, (p + 1) % t).unwrap();
            prop_assert!(removed.is_empty());
            let k = b.position_of(100).unwrap();
            prop_assert_eq!(b.delete(k).unwrap(), c);
        }

        #[test]
        fn insert_length_law(t in 4usize..30, p in 0usize..30, s in 1usize..15) {
            let c = Border::new((1..=t as u32).collect()).unwrap();
            let p = p % t;
            prop_assume!(s <= c.max_span());
            let (b, removed) = c.insert(100, p, (p + s) % t).unwrap();
            prop_assert_eq!(b.len(), t - s + 2);
            prop_assert_eq!(removed.len(), s - 1);
            for id in removed {
                prop_assert!(!b.contains(id));
            }
        }
    }
}
