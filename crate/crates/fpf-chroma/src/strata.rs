//! Certified classification of cells by the quantities driving the coloring
//! recursion: argmax multiplicity on a projection axis, branch-collision
//! status, and singleton-projection status.
//!
//! All certificates are interval-based. A label is only emitted when the
//! enclosures prove it for *every* point of the cell; everything else stays
//! `Ambiguous` and is bisected up to a depth budget. True stratum
//! boundaries (an actual branch crossing, say) leave a measure-zero residue
//! of ambiguous cells at any depth; callers resolve those toward the closed
//! stratum side.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, MapError};
use crate::geometry::{Cell, CellId, DomainComplex};
use crate::interval::Interval;
use crate::multimap::MultiMapSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MultiplicityLabel {
    /// For every x in the cell, exactly M distinct points of f(x) attain
    /// the maximum of the chosen coordinate projection.
    Certified(usize),
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollisionLabel {
    /// All branch pairs are certified distinct points throughout the cell.
    AllDistinct,
    /// Some branch pair coincides (within dedup tolerance) throughout.
    Collides,
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingletonLabel {
    /// All branches share the axis coordinate within dedup tolerance.
    Singleton,
    /// Some branch pair is certified apart in the axis coordinate.
    NonSingleton,
    Ambiguous,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellStrata {
    pub cell: CellId,
    pub multiplicity: MultiplicityLabel,
    pub collision: CollisionLabel,
    pub singleton: SingletonLabel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrataPartition {
    pub axis: usize,
    pub labels: BTreeMap<CellId, CellStrata>,
    /// Cells still carrying any ambiguous label after refinement.
    pub ambiguous: Vec<CellId>,
}

/// How two branches relate as points of f(x), certified over a whole cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairRelation {
    /// Euclidean distance <= tau everywhere on the cell.
    Equal,
    /// Distance > tau everywhere on the cell.
    Distinct,
    Ambiguous,
}

/// Certified relation of branches `j` and `l` over a cell. Structurally
/// identical branches short-circuit to `Equal`; otherwise each coordinate
/// difference is enclosed with affine arithmetic.
pub fn pair_relation(
    m: &MultiMapSpec,
    cell: &Cell,
    j: usize,
    l: usize,
) -> Result<PairRelation, MapError> {
    let tau = m.tol.dedup;
    let bj = m.branch(j);
    let bl = m.branch(l);
    if bj == bl {
        return Ok(PairRelation::Equal);
    }
    let mut sq_sup = 0.0_f64;
    let mut coordinate_apart = false;
    for c in 0..m.dim() {
        let d = coord_difference(m, cell, j, l, c)?;
        let sup = d.abs_max();
        sq_sup += sup * sup;
        if d.lo > tau || d.hi < -tau {
            coordinate_apart = true;
        }
    }
    if sq_sup.sqrt() <= tau {
        return Ok(PairRelation::Equal);
    }
    if coordinate_apart {
        return Ok(PairRelation::Distinct);
    }
    Ok(PairRelation::Ambiguous)
}

/// Enclosure of branch_j coordinate c minus branch_l coordinate c.
pub fn coord_difference(
    m: &MultiMapSpec,
    cell: &Cell,
    j: usize,
    l: usize,
    c: usize,
) -> Result<Interval, MapError> {
    let ej = &m.branch(j)[c];
    let el = &m.branch(l)[c];
    if ej == el {
        return Ok(Interval::point(0.0));
    }
    let fj = ej.eval_affine(&cell.bounds).map_err(|source| MapError::Branch {
        branch: j,
        component: c,
        source,
    })?;
    let fl = el.eval_affine(&cell.bounds).map_err(|source| MapError::Branch {
        branch: l,
        component: c,
        source,
    })?;
    Ok(fj.sub(&fl).range())
}

/// A certified split of a branch subset on one axis: every `top` branch is
/// strictly above every `rest` branch in the axis coordinate, everywhere on
/// the cell.
#[derive(Debug, Clone)]
pub struct ArgmaxSplit {
    pub top: Vec<usize>,
    pub rest: Vec<usize>,
    /// Positive separation between the groups (0 when rest is empty).
    pub gap: f64,
    pub multiplicity: MultiplicityLabel,
}

/// Analyze the argmax structure of `subset` branches on `axis` over a cell.
///
/// The minimal prefix of branches (ordered by upper coordinate bound) that
/// is certified above the remainder becomes `top`. The multiplicity is
/// certified only when all top branches coincide in the axis coordinate
/// (so each attains the maximum) and their pairwise point relations are
/// all certified equal-or-distinct; it then counts distinct points.
pub fn argmax_split(
    m: &MultiMapSpec,
    cell: &Cell,
    subset: &[usize],
    axis: usize,
) -> Result<ArgmaxSplit, MapError> {
    assert!(!subset.is_empty());
    let tau = m.tol.dedup;
    let mut coords: Vec<(usize, Interval)> = Vec::with_capacity(subset.len());
    for &j in subset {
        let e = &m.branch(j)[axis];
        let iv = e.eval_interval(&cell.bounds).map_err(|source| MapError::Branch {
            branch: j,
            component: axis,
            source,
        })?;
        coords.push((j, iv));
    }
    coords.sort_by(|a, b| {
        b.1.hi
            .partial_cmp(&a.1.hi)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });

    let mut split_at = coords.len();
    let mut gap = 0.0;
    for s in 1..coords.len() {
        let min_top_lo = coords[..s]
            .iter()
            .map(|(_, iv)| iv.lo)
            .fold(f64::INFINITY, f64::min);
        let max_rest_hi = coords[s..]
            .iter()
            .map(|(_, iv)| iv.hi)
            .fold(f64::NEG_INFINITY, f64::max);
        if min_top_lo > max_rest_hi {
            split_at = s;
            gap = min_top_lo - max_rest_hi;
            break;
        }
    }

    let mut top: Vec<usize> = coords[..split_at].iter().map(|(j, _)| *j).collect();
    let mut rest: Vec<usize> = coords[split_at..].iter().map(|(j, _)| *j).collect();
    top.sort_unstable();
    rest.sort_unstable();

    // Multiplicity: all top branches must share the axis coordinate, which
    // is what makes each of them attain the maximum at every point.
    let mut coincide = true;
    'outer: for (a, &j) in top.iter().enumerate() {
        for &l in &top[a + 1..] {
            let d = coord_difference(m, cell, j, l, axis)?;
            if !(d.lo >= -tau && d.hi <= tau) {
                coincide = false;
                break 'outer;
            }
        }
    }
    let multiplicity = if !coincide {
        MultiplicityLabel::Ambiguous
    } else {
        match distinct_value_classes(m, cell, &top)? {
            Some(classes) => MultiplicityLabel::Certified(classes),
            None => MultiplicityLabel::Ambiguous,
        }
    };

    Ok(ArgmaxSplit { top, rest, gap, multiplicity })
}

/// Count equivalence classes of certified-equal branches; `None` when some
/// pair is neither certified equal nor certified distinct.
pub fn distinct_value_classes(
    m: &MultiMapSpec,
    cell: &Cell,
    branches: &[usize],
) -> Result<Option<usize>, MapError> {
    let n = branches.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for a in 0..n {
        for b in a + 1..n {
            match pair_relation(m, cell, branches[a], branches[b])? {
                PairRelation::Equal => {
                    let ra = find(&mut parent, a);
                    let rb = find(&mut parent, b);
                    parent[ra] = rb;
                }
                PairRelation::Distinct => {}
                PairRelation::Ambiguous => return Ok(None),
            }
        }
    }
    let mut roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    roots.sort_unstable();
    roots.dedup();
    Ok(Some(roots.len()))
}

/// Representative branches after merging certified-equal (or ambiguous)
/// pairs: one branch per cluster, lowest index. Ambiguous pairs merge too,
/// which resolves boundary cells toward the collision stratum.
pub fn merged_representatives(
    m: &MultiMapSpec,
    cell: &Cell,
    subset: &[usize],
) -> Result<Vec<usize>, MapError> {
    let n = subset.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for a in 0..n {
        for b in a + 1..n {
            if pair_relation(m, cell, subset[a], subset[b])? != PairRelation::Distinct {
                let ra = find(&mut parent, a);
                let rb = find(&mut parent, b);
                parent[ra] = rb;
            }
        }
    }
    let mut reps: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        let entry = reps.entry(r).or_insert(subset[i]);
        *entry = (*entry).min(subset[i]);
    }
    Ok(reps.into_values().collect())
}

/// Argmax multiplicity of the full branch set on one axis.
pub fn argmax_multiplicity(
    m: &MultiMapSpec,
    cell: &Cell,
    axis: usize,
) -> Result<MultiplicityLabel, MapError> {
    if m.branch_count() == 1 {
        return Ok(MultiplicityLabel::Certified(1));
    }
    let all: Vec<usize> = (0..m.branch_count()).collect();
    Ok(argmax_split(m, cell, &all, axis)?.multiplicity)
}

fn collision_label(m: &MultiMapSpec, cell: &Cell) -> Result<CollisionLabel, MapError> {
    let n = m.branch_count();
    let mut ambiguous = false;
    for a in 0..n {
        for b in a + 1..n {
            match pair_relation(m, cell, a, b)? {
                PairRelation::Equal => return Ok(CollisionLabel::Collides),
                PairRelation::Ambiguous => ambiguous = true,
                PairRelation::Distinct => {}
            }
        }
    }
    Ok(if ambiguous {
        CollisionLabel::Ambiguous
    } else {
        CollisionLabel::AllDistinct
    })
}

fn singleton_label(
    m: &MultiMapSpec,
    cell: &Cell,
    axis: usize,
) -> Result<SingletonLabel, MapError> {
    let tau = m.tol.dedup;
    let n = m.branch_count();
    let mut all_close = true;
    let mut some_apart = false;
    for a in 0..n {
        for b in a + 1..n {
            let d = coord_difference(m, cell, a, b, axis)?;
            if !(d.lo >= -tau && d.hi <= tau) {
                all_close = false;
            }
            if d.lo > tau || d.hi < -tau {
                some_apart = true;
            }
        }
    }
    Ok(if all_close {
        SingletonLabel::Singleton
    } else if some_apart {
        SingletonLabel::NonSingleton
    } else {
        SingletonLabel::Ambiguous
    })
}

pub fn label_cell(
    m: &MultiMapSpec,
    cell: &Cell,
    axis: usize,
) -> Result<CellStrata, MapError> {
    Ok(CellStrata {
        cell: cell.id,
        multiplicity: argmax_multiplicity(m, cell, axis)?,
        collision: collision_label(m, cell)?,
        singleton: singleton_label(m, cell, axis)?,
    })
}

fn is_ambiguous(s: &CellStrata) -> bool {
    s.multiplicity == MultiplicityLabel::Ambiguous
        || s.collision == CollisionLabel::Ambiguous
        || s.singleton == SingletonLabel::Ambiguous
}

/// Label every cell for one axis, bisecting ambiguous cells up to
/// `max_depth` rounds. Surviving ambiguous cells are listed in the result.
pub fn classify(
    m: &MultiMapSpec,
    complex: &mut DomainComplex,
    axis: usize,
    max_depth: usize,
) -> Result<StrataPartition, MapError> {
    // n = 1 short-circuits: the single value is its own argmax everywhere.
    if m.branch_count() == 1 {
        let labels: BTreeMap<CellId, CellStrata> = complex
            .cells()
            .map(|c| {
                (
                    c.id,
                    CellStrata {
                        cell: c.id,
                        multiplicity: MultiplicityLabel::Certified(1),
                        collision: CollisionLabel::AllDistinct,
                        singleton: SingletonLabel::Singleton,
                    },
                )
            })
            .collect();
        return Ok(StrataPartition { axis, labels, ambiguous: Vec::new() });
    }

    let mut pending: Vec<CellId> = complex.ids().collect();
    let mut labels: BTreeMap<CellId, CellStrata> = BTreeMap::new();
    for depth in 0..=max_depth {
        let cells: Vec<Cell> = pending
            .iter()
            .map(|id| complex.cell(*id).cloned())
            .collect::<Result<_, _>>()?;
        let computed: Vec<CellStrata> = cells
            .par_iter()
            .map(|c| label_cell(m, c, axis))
            .collect::<Result<_, _>>()?;
        let mut still_ambiguous = Vec::new();
        for s in computed {
            if is_ambiguous(&s) && depth < max_depth {
                still_ambiguous.push(s.cell);
            } else {
                labels.insert(s.cell, s);
            }
        }
        if still_ambiguous.is_empty() {
            break;
        }
        let mut next = Vec::with_capacity(still_ambiguous.len() * 2);
        for id in still_ambiguous {
            match complex.refine_cell(id, None) {
                Ok((a, b)) => {
                    next.push(a);
                    next.push(b);
                }
                Err(GeometryError::DegenerateAxis { .. }) => {
                    // Point cells cannot shrink; label them as they are.
                    let cell = complex.cell(id)?.clone();
                    let s = label_cell(m, &cell, axis)?;
                    labels.insert(id, s);
                }
                Err(e) => return Err(e.into()),
            }
        }
        pending = next;
    }
    let ambiguous: Vec<CellId> = labels
        .values()
        .filter(|s| is_ambiguous(s))
        .map(|s| s.cell)
        .collect();
    Ok(StrataPartition { axis, labels, ambiguous })
}
