//! Base colorer for single-cluster selections.
//!
//! Strategy: partition cells into direction sectors by the axis with the
//! largest certified displacement component (2k closed sectors, one per
//! signed axis; interiors contain no antipodal pair). Inside a sector the
//! displacement component along the sector axis is bounded below, so a
//! 1-D block partition along that axis colors the sector: a block's image
//! moves at least one block length away and same-colored blocks sit a full
//! period apart. Acceptance is always a separation check against the
//! class's avoid boxes; on failure the block length shrinks, then the
//! target margin backs off, then the greedy colorer takes over.

use std::collections::{BTreeMap, BTreeSet};

use crate::colorer::greedy::greedy_frozen;
use crate::colorer::{ColorClass, ClusterSel, Ctx, ProvStep};
use crate::error::ColorError;
use crate::geometry::{boxset_separation, CellId};
use crate::interval::IntervalBox;

/// Color a selection in which every cell carries exactly one cluster.
pub(crate) fn color_single_clusters(
    ctx: &Ctx,
    sel: &ClusterSel,
    trail: &[ProvStep],
) -> Result<Vec<ColorClass>, ColorError> {
    debug_assert!(sel.values().all(|cl| cl.len() == 1));
    if sel.is_empty() {
        return Ok(Vec::new());
    }
    let avoid: BTreeMap<CellId, Vec<IntervalBox>> = sel
        .iter()
        .map(|(&id, clusters)| (id, ctx.avoid_boxes(id, clusters)))
        .collect();

    // Fast path: the whole region's image leaves the region.
    let region_boxes: Vec<IntervalBox> = sel
        .keys()
        .map(|id| ctx.complex.cell(*id).map(|c| c.bounds.clone()))
        .collect::<Result<_, _>>()?;
    let avoid_all: Vec<IntervalBox> = avoid.values().flatten().cloned().collect();
    let sep = boxset_separation(&region_boxes, &avoid_all)?;
    if sep >= ctx.params.min_margin {
        let mut provenance = trail.to_vec();
        provenance.push(ProvStep::WholeRegion);
        return Ok(vec![ColorClass {
            cells: sel.keys().copied().collect(),
            margin: sep,
            provenance,
        }]);
    }

    // Sector assignment: per cell, the signed axis with the largest
    // certified displacement component. A displacement box separated from
    // the origin always certifies at least one signed axis.
    let mut sectors: BTreeMap<(usize, bool), Vec<CellId>> = BTreeMap::new();
    let mut unsectored: BTreeSet<CellId> = BTreeSet::new();
    for (&id, clusters) in sel {
        let dbox = ctx.cluster_disp(id, &clusters[0]);
        let mut best: Option<(f64, usize, bool)> = None;
        for (axis, iv) in dbox.iter().enumerate() {
            if iv.lo > 0.0 && best.map_or(true, |(m, _, _)| iv.lo > m) {
                best = Some((iv.lo, axis, true));
            }
            if iv.hi < 0.0 && best.map_or(true, |(m, _, _)| -iv.hi > m) {
                best = Some((-iv.hi, axis, false));
            }
        }
        match best {
            Some((_, axis, positive)) => {
                sectors.entry((axis, positive)).or_default().push(id)
            }
            None => {
                unsectored.insert(id);
            }
        }
    }

    let mut classes = Vec::new();
    let mut residue = unsectored;
    for ((axis, positive), cells) in sectors {
        match block_partition(ctx, sel, &avoid, &cells, axis, positive, trail)? {
            Some(mut sector_classes) => classes.append(&mut sector_classes),
            None => residue.extend(cells),
        }
    }
    if !residue.is_empty() {
        let avoid_residue: BTreeMap<CellId, Vec<IntervalBox>> = residue
            .iter()
            .map(|id| (*id, avoid[id].clone()))
            .collect();
        let mut trail_greedy = trail.to_vec();
        trail_greedy.push(ProvStep::Greedy);
        let mut greedy = greedy_frozen(ctx, &avoid_residue, &trail_greedy)?;
        classes.append(&mut greedy);
    }
    Ok(classes)
}

/// Block partition of one sector along its axis. Returns `None` when no
/// block length meets any acceptance target; the caller falls back.
#[allow(clippy::too_many_arguments)]
fn block_partition(
    ctx: &Ctx,
    sel: &ClusterSel,
    avoid: &BTreeMap<CellId, Vec<IntervalBox>>,
    cells: &[CellId],
    axis: usize,
    positive: bool,
    trail: &[ProvStep],
) -> Result<Option<Vec<ColorClass>>, ColorError> {
    // Certified displacement range along the signed axis.
    let mut delta = f64::INFINITY;
    let mut dmax: f64 = 0.0;
    let mut anchor = f64::INFINITY;
    let mut coarsest: f64 = 0.0;
    for &id in cells {
        let dbox = ctx.cluster_disp(id, &sel[&id][0]);
        let iv = dbox[axis];
        let (lo, hi) = if positive { (iv.lo, iv.hi) } else { (-iv.hi, -iv.lo) };
        delta = delta.min(lo);
        dmax = dmax.max(hi);
        let bounds = &ctx.complex.cell(id)?.bounds[axis];
        anchor = anchor.min(bounds.lo);
        coarsest = coarsest.max(bounds.width());
    }
    if !(delta > 0.0) {
        return Ok(None);
    }

    // Longest block first: fewer classes beat fatter margins, and the
    // target ladder backs off before the block length shrinks. Block
    // lengths snap down to a multiple of the coarsest cell width so cells
    // do not straddle block boundaries.
    for shrink in [0.8, 0.4, 0.2] {
        for target in ctx.params.target_ladder() {
            let raw = delta * shrink;
            let block = if coarsest > 0.0 && raw >= coarsest {
                (raw / coarsest + 1e-9).floor() * coarsest
            } else {
                raw
            };
            if block <= 0.0 {
                continue;
            }
            let period = ((block + dmax) / block).floor() as usize + 1;
            if period > 512 {
                continue;
            }
            let mut groups: BTreeMap<usize, BTreeSet<CellId>> = BTreeMap::new();
            for &id in cells {
                let lo = ctx.complex.cell(id)?.bounds[axis].lo;
                let idx = (((lo - anchor) / block) + 1e-9).floor() as usize % period;
                groups.entry(idx).or_default().insert(id);
            }
            let mut candidate = Vec::new();
            let mut ok = true;
            for (_, group) in groups {
                let cell_boxes: Vec<IntervalBox> = group
                    .iter()
                    .map(|id| ctx.complex.cell(*id).map(|c| c.bounds.clone()))
                    .collect::<Result<_, _>>()?;
                let image_boxes: Vec<IntervalBox> =
                    group.iter().flat_map(|id| avoid[id].clone()).collect();
                let margin = boxset_separation(&cell_boxes, &image_boxes)?;
                if margin < target {
                    ok = false;
                    break;
                }
                let mut provenance = trail.to_vec();
                provenance.push(ProvStep::SectorBlock { axis, positive });
                candidate.push(ColorClass { cells: group, margin, provenance });
            }
            if ok {
                return Ok(Some(candidate));
            }
        }
    }
    Ok(None)
}
