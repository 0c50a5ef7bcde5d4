//! Greedy conflict coloring: the baseline oracle and the fallback inside
//! the constructive pipeline.
//!
//! Cells conflict when one's image enclosure comes within the acceptance
//! target of the other cell (symmetrized). Classes are the color groups of
//! a descending-degree greedy pass, so each class keeps the target margin
//! by construction; a separation recomputation pins the recorded margins.

use std::collections::{BTreeMap, BTreeSet};

use crate::colorer::{ColorClass, ColorParams, Coloring, Ctx, ProvStep};
use crate::error::ColorError;
use crate::geometry::{boxset_separation, CellId, DomainComplex};
use crate::interval::{box_distance, IntervalBox};
use crate::multimap::MultiMapSpec;

/// Greedy-color a frozen region against per-cell avoid boxes, walking the
/// acceptance ladder downward. Fails only when some cell conflicts with
/// itself at the margin floor.
pub(crate) fn greedy_frozen(
    ctx: &Ctx,
    avoid: &BTreeMap<CellId, Vec<IntervalBox>>,
    trail: &[ProvStep],
) -> Result<Vec<ColorClass>, ColorError> {
    if avoid.is_empty() {
        return Ok(Vec::new());
    }
    let ids: Vec<CellId> = avoid.keys().copied().collect();
    let bounds: BTreeMap<CellId, IntervalBox> = ids
        .iter()
        .map(|id| Ok((*id, ctx.complex.cell(*id)?.bounds.clone())))
        .collect::<Result<_, ColorError>>()?;

    let ladder = ctx.params.target_ladder();
    let mut last_self_conflicts = 0usize;
    for target in ladder {
        match try_greedy(&ids, &bounds, avoid, target, trail)? {
            GreedyOutcome::Classes(classes) => return Ok(classes),
            GreedyOutcome::SelfConflicts(n) => last_self_conflicts = n,
        }
    }
    Err(ColorError::ColoringFailed {
        reason: "cells conflict with their own images at the margin floor".into(),
        cells: last_self_conflicts,
    })
}

enum GreedyOutcome {
    Classes(Vec<ColorClass>),
    SelfConflicts(usize),
}

fn try_greedy(
    ids: &[CellId],
    bounds: &BTreeMap<CellId, IntervalBox>,
    avoid: &BTreeMap<CellId, Vec<IntervalBox>>,
    target: f64,
    trail: &[ProvStep],
) -> Result<GreedyOutcome, ColorError> {
    let n = ids.len();
    let mut self_conflicts = 0usize;
    for id in ids {
        if images_near(&avoid[id], &bounds[id], target) {
            self_conflicts += 1;
        }
    }
    if self_conflicts > 0 {
        return Ok(GreedyOutcome::SelfConflicts(self_conflicts));
    }

    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let conflict = images_near(&avoid[&ids[i]], &bounds[&ids[j]], target)
                || images_near(&avoid[&ids[j]], &bounds[&ids[i]], target);
            if conflict {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(adj[i].len()), ids[i]));
    let mut color = vec![usize::MAX; n];
    let mut used_colors = 0;
    for &i in &order {
        let used: BTreeSet<usize> = adj[i]
            .iter()
            .filter(|&&j| color[j] != usize::MAX)
            .map(|&j| color[j])
            .collect();
        let c = (0..).find(|c| !used.contains(c)).unwrap();
        color[i] = c;
        used_colors = used_colors.max(c + 1);
    }

    let mut classes = Vec::with_capacity(used_colors);
    for c in 0..used_colors {
        let cells: BTreeSet<CellId> = (0..n)
            .filter(|&i| color[i] == c)
            .map(|i| ids[i])
            .collect();
        let cell_boxes: Vec<IntervalBox> =
            cells.iter().map(|id| bounds[id].clone()).collect();
        let image_boxes: Vec<IntervalBox> =
            cells.iter().flat_map(|id| avoid[id].clone()).collect();
        let margin = boxset_separation(&cell_boxes, &image_boxes)?;
        debug_assert!(margin >= target);
        classes.push(ColorClass {
            cells,
            margin,
            provenance: trail.to_vec(),
        });
    }
    Ok(GreedyOutcome::Classes(classes))
}

fn images_near(images: &[IntervalBox], cell: &IntervalBox, target: f64) -> bool {
    images.iter().any(|b| box_distance(b, cell) < target)
}

/// Standalone greedy conflict coloring over the whole complex, refining
/// self-conflicted cells up to the round budget. A map with a fixed point
/// keeps a self-conflicting cell through every refinement and fails.
pub fn greedy_conflict_coloring(
    spec: &MultiMapSpec,
    complex: &mut DomainComplex,
    params: ColorParams,
) -> Result<Coloring, ColorError> {
    for _round in 0..=params.greedy_rounds {
        let ctx = Ctx::build(spec, complex, params)?;
        let floor = params.min_margin;
        let stuck: Vec<CellId> = complex
            .cells()
            .filter(|c| images_near(&ctx.encl[&c.id], &c.bounds, floor))
            .map(|c| c.id)
            .collect();
        if stuck.is_empty() {
            let avoid: BTreeMap<CellId, Vec<IntervalBox>> = complex
                .cells()
                .map(|c| (c.id, ctx.encl[&c.id].clone()))
                .collect();
            let classes = greedy_frozen(&ctx, &avoid, &[ProvStep::Greedy])?;
            return Ok(Coloring { classes });
        }
        if _round == params.greedy_rounds {
            return Err(ColorError::ColoringFailed {
                reason: "self-conflicting cells survive the refinement budget".into(),
                cells: stuck.len(),
            });
        }
        for id in stuck {
            match complex.refine_cell(id, None) {
                Ok(_) => {}
                Err(crate::error::GeometryError::DegenerateAxis { .. }) => {
                    return Err(ColorError::ColoringFailed {
                        reason: format!("degenerate cell {id} conflicts with its own image"),
                        cells: 1,
                    });
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    unreachable!("greedy round loop always returns")
}
