//! Cell-complex representation of the closed domain X in R^k.
//!
//! The domain is a finite union of closed axis-aligned cells with pairwise
//! disjoint interiors. Cells may be degenerate on some axes (X need only be
//! closed, not full-dimensional). Ids are stable across refinement: children
//! of a bisected cell get fresh ids and the parent is retired.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::interval::{box_distance, Interval, IntervalBox};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct CellId(pub u64);

impl std::fmt::Display for CellId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cell {
    pub id: CellId,
    pub bounds: IntervalBox,
}

impl Cell {
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Index of the widest axis.
    pub fn widest_axis(&self) -> usize {
        let mut best = 0;
        let mut w = f64::NEG_INFINITY;
        for (i, iv) in self.bounds.iter().enumerate() {
            if iv.width() > w {
                w = iv.width();
                best = i;
            }
        }
        best
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|iv| iv.midpoint()).collect()
    }

    pub fn corners(&self) -> Vec<Vec<f64>> {
        let k = self.dim();
        let mut out = Vec::with_capacity(1 << k.min(12));
        let count: usize = 1 << k.min(12);
        for mask in 0..count {
            let p = self
                .bounds
                .iter()
                .enumerate()
                .map(|(i, iv)| if mask >> i & 1 == 1 { iv.hi } else { iv.lo })
                .collect();
            out.push(p);
        }
        out
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        self.bounds.iter().zip(p).all(|(iv, x)| iv.contains(*x))
    }
}

/// Finite union of closed cells representing X, keyed by id for
/// deterministic iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainComplex {
    dim: usize,
    cells: BTreeMap<CellId, Cell>,
    next_id: u64,
}

impl DomainComplex {
    /// Build from a list of boxes (each box is k pairs (lo, hi)) and an
    /// initial grid resolution `h`: boxes are split into grid cells of side
    /// at most `h`, ids assigned in lexicographic order of the cell lower
    /// corner.
    pub fn build(boxes: &[Vec<(f64, f64)>], h: f64) -> Result<Self, GeometryError> {
        if boxes.is_empty() {
            return Err(GeometryError::EmptyDomain);
        }
        if !(h > 0.0) {
            return Err(GeometryError::NonPositiveResolution(h));
        }
        let dim = boxes[0].len();
        for b in boxes {
            if b.len() != dim {
                return Err(GeometryError::DimensionMismatch(dim, b.len()));
            }
            for (axis, &(lo, hi)) in b.iter().enumerate() {
                if lo > hi || !lo.is_finite() || !hi.is_finite() {
                    return Err(GeometryError::InvertedAxis { axis, lo, hi });
                }
            }
        }
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if boxes_overlap_interior(&boxes[i], &boxes[j]) {
                    return Err(GeometryError::OverlappingBoxes(i, j));
                }
            }
        }

        let mut raw: Vec<IntervalBox> = Vec::new();
        for b in boxes {
            let per_axis: Vec<Vec<Interval>> = b
                .iter()
                .map(|&(lo, hi)| split_axis(lo, hi, h))
                .collect();
            let mut stack: Vec<IntervalBox> = vec![Vec::with_capacity(dim)];
            for axis_cells in &per_axis {
                let mut next = Vec::with_capacity(stack.len() * axis_cells.len());
                for partial in &stack {
                    for iv in axis_cells {
                        let mut p = partial.clone();
                        p.push(*iv);
                        next.push(p);
                    }
                }
                stack = next;
            }
            raw.extend(stack);
        }
        raw.sort_by(|a, b| {
            let ka: Vec<f64> = a.iter().map(|iv| iv.lo).collect();
            let kb: Vec<f64> = b.iter().map(|iv| iv.lo).collect();
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        });
        let cells = raw
            .into_iter()
            .enumerate()
            .map(|(i, bounds)| {
                let id = CellId(i as u64);
                (id, Cell { id, bounds })
            })
            .collect::<BTreeMap<_, _>>();
        let next_id = cells.len() as u64;
        Ok(DomainComplex { dim, cells, next_id })
    }

    /// Build directly from explicit cell boxes (pairwise disjoint
    /// interiors required); ids assigned in lexicographic order of the
    /// lower corner. This is how non-grid regions like annuli enter.
    pub fn from_cells(dim: usize, mut boxes: Vec<IntervalBox>) -> Result<Self, GeometryError> {
        if boxes.is_empty() {
            return Err(GeometryError::EmptyDomain);
        }
        for b in &boxes {
            if b.len() != dim {
                return Err(GeometryError::DimensionMismatch(dim, b.len()));
            }
        }
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                let overlap = boxes[i]
                    .iter()
                    .zip(&boxes[j])
                    .all(|(a, b)| a.lo < b.hi && b.lo < a.hi);
                if overlap {
                    return Err(GeometryError::OverlappingBoxes(i, j));
                }
            }
        }
        boxes.sort_by(|a, b| {
            let ka: Vec<f64> = a.iter().map(|iv| iv.lo).collect();
            let kb: Vec<f64> = b.iter().map(|iv| iv.lo).collect();
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        });
        let cells = boxes
            .into_iter()
            .enumerate()
            .map(|(i, bounds)| {
                let id = CellId(i as u64);
                (id, Cell { id, bounds })
            })
            .collect::<BTreeMap<_, _>>();
        let next_id = cells.len() as u64;
        Ok(DomainComplex { dim, cells, next_id })
    }

    /// Rebuild a complex from explicit cells with their ids (certificate
    /// files round-trip through this). Ids must be unique.
    pub fn from_cell_records(dim: usize, records: Vec<Cell>) -> Result<Self, GeometryError> {
        if records.is_empty() {
            return Err(GeometryError::EmptyDomain);
        }
        let mut cells = BTreeMap::new();
        let mut next_id = 0u64;
        for cell in records {
            if cell.bounds.len() != dim {
                return Err(GeometryError::DimensionMismatch(dim, cell.bounds.len()));
            }
            next_id = next_id.max(cell.id.0 + 1);
            let id = cell.id;
            if cells.insert(id, cell).is_some() {
                return Err(GeometryError::DuplicateCellId(id.0));
            }
        }
        Ok(DomainComplex { dim, cells, next_id })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, id: CellId) -> Result<&Cell, GeometryError> {
        self.cells.get(&id).ok_or(GeometryError::UnknownCell(id.0))
    }

    pub fn contains_cell(&self, id: CellId) -> bool {
        self.cells.contains_key(&id)
    }

    /// Cells in id order.
    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = CellId> + '_ {
        self.cells.keys().copied()
    }

    /// Bisect a cell at the midpoint of `axis` (widest axis when `None`).
    /// The parent is retired; children get fresh ids, low side first.
    pub fn refine_cell(
        &mut self,
        id: CellId,
        axis: Option<usize>,
    ) -> Result<(CellId, CellId), GeometryError> {
        let cell = self.cell(id)?.clone();
        let axis = axis.unwrap_or_else(|| cell.widest_axis());
        let iv = cell
            .bounds
            .get(axis)
            .copied()
            .ok_or(GeometryError::DimensionMismatch(self.dim, axis))?;
        if iv.width() <= 0.0 {
            return Err(GeometryError::DegenerateAxis { cell: id.0, axis });
        }
        let mid = iv.midpoint();
        let mut lo_bounds = cell.bounds.clone();
        lo_bounds[axis] = Interval::new(iv.lo, mid);
        let mut hi_bounds = cell.bounds;
        hi_bounds[axis] = Interval::new(mid, iv.hi);
        let lo_id = CellId(self.next_id);
        let hi_id = CellId(self.next_id + 1);
        self.next_id += 2;
        self.cells.remove(&id);
        self.cells.insert(lo_id, Cell { id: lo_id, bounds: lo_bounds });
        self.cells.insert(hi_id, Cell { id: hi_id, bounds: hi_bounds });
        Ok((lo_id, hi_id))
    }

    /// Ids of cells within Euclidean distance `d` of the given box.
    pub fn cells_near(&self, b: &[Interval], d: f64) -> Vec<CellId> {
        self.cells
            .values()
            .filter(|c| box_distance(&c.bounds, b) <= d)
            .map(|c| c.id)
            .collect()
    }

    /// The cell containing a point, if any (boundary points may belong to
    /// several; the one with the smallest id wins).
    pub fn cell_containing(&self, p: &[f64]) -> Option<CellId> {
        self.cells
            .values()
            .find(|c| c.contains_point(p))
            .map(|c| c.id)
    }

    /// Do two cells share at least a boundary point?
    pub fn adjacent(&self, a: CellId, b: CellId) -> Result<bool, GeometryError> {
        let ca = self.cell(a)?;
        let cb = self.cell(b)?;
        Ok(box_distance(&ca.bounds, &cb.bounds) == 0.0)
    }
}

fn boxes_overlap_interior(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    a.iter()
        .zip(b)
        .all(|(&(alo, ahi), &(blo, bhi))| alo < bhi && blo < ahi)
}

/// Split `[lo, hi]` into equal slabs of width at most `h`; a degenerate
/// axis yields the single point interval.
fn split_axis(lo: f64, hi: f64, h: f64) -> Vec<Interval> {
    let width = hi - lo;
    if width == 0.0 {
        return vec![Interval::point(lo)];
    }
    let count = (width / h).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(count);
    let mut prev = lo;
    for i in 1..=count {
        let next = if i == count {
            hi
        } else {
            lo + width * (i as f64) / (count as f64)
        };
        out.push(Interval::new(prev, next));
        prev = next;
    }
    out
}

/// Canonical element of exp_n(R^k): deduplicated at `tau`, sorted
/// lexicographically with exact float comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSet {
    points: Vec<Vec<f64>>,
}

impl FiniteSet {
    pub fn canonicalize(mut points: Vec<Vec<f64>>, tau: f64) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::EmptySet);
        }
        let dim = points[0].len();
        for p in &points {
            if p.len() != dim {
                return Err(GeometryError::DimensionMismatch(dim, p.len()));
            }
        }
        points.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let mut kept: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        for p in points {
            if kept.iter().all(|q| euclid(q, &p) > tau) {
                kept.push(p);
            }
        }
        Ok(FiniteSet { points: kept })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Hausdorff distance between two finite point sets under the Euclidean
/// metric: max over directed nearest-point distances, both ways.
pub fn hausdorff_distance(a: &FiniteSet, b: &FiniteSet) -> Result<f64, GeometryError> {
    if a.dim() != b.dim() {
        return Err(GeometryError::DimensionMismatch(a.dim(), b.dim()));
    }
    let directed = |s: &FiniteSet, t: &FiniteSet| {
        s.points()
            .iter()
            .map(|p| {
                t.points()
                    .iter()
                    .map(|q| euclid(p, q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// Minimum Euclidean distance between two unions of boxes; a valid lower
/// bound for the distance between any sets they enclose.
pub fn boxset_separation(
    s: &[IntervalBox],
    t: &[IntervalBox],
) -> Result<f64, GeometryError> {
    if s.is_empty() || t.is_empty() {
        return Err(GeometryError::EmptySet);
    }
    let dim = s[0].len();
    let mut best = f64::INFINITY;
    for a in s {
        if a.len() != dim {
            return Err(GeometryError::DimensionMismatch(dim, a.len()));
        }
        for b in t {
            if b.len() != dim {
                return Err(GeometryError::DimensionMismatch(dim, b.len()));
            }
            best = best.min(box_distance(a, b));
            if best == 0.0 {
                return Ok(0.0);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    #[test]
    fn build_1d_grid() {
        let x = DomainComplex::build(&[vec![(0.0, 4.0)]], 1.0).unwrap();
        assert_eq!(x.len(), 4);
        let bounds: Vec<_> = x.cells().map(|c| (c.bounds[0].lo, c.bounds[0].hi)).collect();
        assert_eq!(bounds, vec![(0.0, 1.0), (1.0, 2.0), (2.0, 3.0), (3.0, 4.0)]);
    }

    #[test]
    fn build_2d_grid() {
        let x = DomainComplex::build(&[vec![(0.0, 1.0), (0.0, 1.0)]], 0.5).unwrap();
        assert_eq!(x.len(), 4);
    }

    #[test]
    fn build_disconnected() {
        let x = DomainComplex::build(&[vec![(0.0, 1.0)], vec![(5.0, 6.0)]], 1.0).unwrap();
        assert_eq!(x.len(), 2);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(DomainComplex::build(&[], 1.0).is_err());
        assert!(DomainComplex::build(&[vec![(0.0, 1.0)]], 0.0).is_err());
        assert!(DomainComplex::build(
            &[vec![(0.0, 2.0)], vec![(1.0, 3.0)]],
            1.0
        )
        .is_err());
    }

    #[test]
    fn refine_1d() {
        let mut x = DomainComplex::build(&[vec![(0.0, 2.0)]], 2.0).unwrap();
        let id = x.ids().next().unwrap();
        let (a, b) = x.refine_cell(id, Some(0)).unwrap();
        assert!(!x.contains_cell(id));
        assert_eq!(x.cell(a).unwrap().bounds[0], iv(0.0, 1.0));
        assert_eq!(x.cell(b).unwrap().bounds[0], iv(1.0, 2.0));
    }

    #[test]
    fn refine_2d_axis1() {
        let mut x =
            DomainComplex::build(&[vec![(0.0, 1.0), (0.0, 4.0)]], 4.0).unwrap();
        let id = x.ids().next().unwrap();
        let (a, b) = x.refine_cell(id, Some(1)).unwrap();
        assert_eq!(x.cell(a).unwrap().bounds[1], iv(0.0, 2.0));
        assert_eq!(x.cell(b).unwrap().bounds[1], iv(2.0, 4.0));
        assert_eq!(x.cell(a).unwrap().bounds[0], iv(0.0, 1.0));
    }

    #[test]
    fn refine_degenerate_axis_fails() {
        let mut x = DomainComplex::build(&[vec![(1.0, 1.0)]], 1.0).unwrap();
        let id = x.ids().next().unwrap();
        assert!(x.refine_cell(id, Some(0)).is_err());
    }

    #[test]
    fn finite_set_canonical_form() {
        let s = FiniteSet::canonicalize(
            vec![vec![2.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0 + 1e-12]],
            1e-9,
        )
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.points()[0], vec![1.0, 1.0]);
    }

    #[test]
    fn hausdorff_examples() {
        let a = FiniteSet::canonicalize(vec![vec![0.0]], 1e-9).unwrap();
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);

        let b = FiniteSet::canonicalize(vec![vec![0.0], vec![1.0]], 1e-9).unwrap();
        let c = FiniteSet::canonicalize(vec![vec![0.0], vec![3.0]], 1e-9).unwrap();
        // directed(b->c) = 1 (point 1 vs 0); directed(c->b) = 2 (point 3 vs 1).
        assert_eq!(hausdorff_distance(&b, &c).unwrap(), 2.0);

        let p = FiniteSet::canonicalize(vec![vec![0.0, 0.0]], 1e-9).unwrap();
        let q = FiniteSet::canonicalize(vec![vec![3.0, 4.0]], 1e-9).unwrap();
        assert_eq!(hausdorff_distance(&p, &q).unwrap(), 5.0);
    }

    #[test]
    fn separation_examples() {
        let s = vec![vec![iv(0.0, 1.0)]];
        let t = vec![vec![iv(2.0, 3.0)]];
        assert_eq!(boxset_separation(&s, &t).unwrap(), 1.0);

        let s2 = vec![vec![iv(0.0, 1.0), iv(0.0, 1.0)]];
        let t2 = vec![vec![iv(2.0, 3.0), iv(0.0, 1.0)]];
        assert_eq!(boxset_separation(&s2, &t2).unwrap(), 1.0);

        let s3 = vec![vec![iv(0.0, 2.0)]];
        let t3 = vec![vec![iv(1.0, 3.0)]];
        assert_eq!(boxset_separation(&s3, &t3).unwrap(), 0.0);
    }
}
