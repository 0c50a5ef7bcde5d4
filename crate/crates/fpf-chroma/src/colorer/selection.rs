//! Recursive coloring of branch-cluster selections.
//!
//! A selection assigns each cell a list of clusters (certified distinct
//! values of f). Single-cluster selections go to the sector-block base
//! colorer. Larger selections are split on a projection axis: the minimal
//! cluster prefix certified above the rest becomes the derived map g, the
//! remainder h, and a product of the two recursive colorings colors the
//! stratum. Cells are grouped by their certified top-group size and the
//! strata processed largest-first, which mirrors the closed-stratum
//! iteration of the underlying induction; cells that no axis can split
//! fall back to the greedy colorer.

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::colorer::greedy::greedy_frozen;
use crate::colorer::single::color_single_clusters;
use crate::colorer::{
    product_classes, ColorClass, ColorParams, Coloring, ClusterSel, Ctx, ProvStep,
};
use crate::error::ColorError;
use crate::geometry::{CellId, DomainComplex};
use crate::interval::{Interval, IntervalBox};
use crate::multimap::{sample_point, MultiMapSpec};
use crate::strata::{argmax_split, MultiplicityLabel, PairRelation};

/// A certified split of one cell's clusters on an axis.
#[derive(Debug, Clone)]
pub(crate) struct ClusterSplit {
    pub top: Vec<usize>,
    pub rest: Vec<usize>,
    pub gap: f64,
}

/// Minimal prefix of clusters (by upper coordinate bound) certified above
/// the remainder; `None` when no positive gap exists.
pub(crate) fn cluster_split(coords: &[Interval]) -> Option<ClusterSplit> {
    let j = coords.len();
    if j < 2 {
        return None;
    }
    let mut order: Vec<usize> = (0..j).collect();
    order.sort_by(|&a, &b| {
        coords[b]
            .hi
            .partial_cmp(&coords[a].hi)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    for s in 1..j {
        let min_top_lo = order[..s]
            .iter()
            .map(|&i| coords[i].lo)
            .fold(f64::INFINITY, f64::min);
        let max_rest_hi = order[s..]
            .iter()
            .map(|&i| coords[i].hi)
            .fold(f64::NEG_INFINITY, f64::max);
        if min_top_lo > max_rest_hi {
            let mut top: Vec<usize> = order[..s].to_vec();
            let mut rest: Vec<usize> = order[s..].to_vec();
            top.sort_unstable();
            rest.sort_unstable();
            return Some(ClusterSplit { top, rest, gap: min_top_lo - max_rest_hi });
        }
    }
    None
}

fn split_cell_on_axis(
    ctx: &Ctx,
    cell: CellId,
    clusters: &[Vec<usize>],
    axis: usize,
) -> Option<ClusterSplit> {
    let coords: Vec<Interval> = clusters
        .iter()
        .map(|cl| ctx.cluster_coord(cell, cl, axis))
        .collect();
    cluster_split(&coords)
}

/// Recursive colorer for a cluster selection; `guard` bounds the recursion
/// by the total cluster budget.
pub(crate) fn color_selection(
    ctx: &Ctx,
    sel: &ClusterSel,
    preferred: Option<usize>,
    trail: &[ProvStep],
    guard: usize,
) -> Result<Vec<ColorClass>, ColorError> {
    if sel.is_empty() {
        return Ok(Vec::new());
    }
    if guard == 0 {
        return Err(ColorError::ColoringFailed {
            reason: "selection recursion exceeded its cluster budget".into(),
            cells: sel.len(),
        });
    }

    let mut classes = Vec::new();

    // Cells already down to one value go straight to the base colorer.
    let singles: ClusterSel = sel
        .iter()
        .filter(|(_, cl)| cl.len() == 1)
        .map(|(k, v)| (*k, v.clone()))
        .collect();
    if !singles.is_empty() {
        classes.extend(color_single_clusters(ctx, &singles, trail)?);
    }

    let mut remaining: ClusterSel = sel
        .iter()
        .filter(|(_, cl)| cl.len() > 1)
        .map(|(k, v)| (*k, v.clone()))
        .collect();
    if remaining.is_empty() {
        return Ok(classes);
    }

    let axes = axis_order(ctx, &remaining, preferred);
    let mut level = 0usize;
    for axis in axes {
        if remaining.is_empty() {
            break;
        }
        // Certified splits on this axis, grouped by top-group size,
        // largest first (the closed strata come first).
        let mut splits: BTreeMap<CellId, ClusterSplit> = BTreeMap::new();
        for (&id, clusters) in &remaining {
            if let Some(s) = split_cell_on_axis(ctx, id, clusters, axis) {
                splits.insert(id, s);
            }
        }
        if splits.is_empty() {
            continue;
        }
        let mut by_top_size: BTreeMap<usize, Vec<CellId>> = BTreeMap::new();
        for (&id, s) in &splits {
            by_top_size.entry(s.top.len()).or_default().push(id);
        }
        for (_, group) in by_top_size.into_iter().rev() {
            level += 1;
            let group = match face_consistent(ctx, &remaining, &splits, &group) {
                Ok(g) => g,
                Err(ejected) => {
                    // Mismatched selections across a shared face: keep the
                    // consistent part, leave the rest for later passes.
                    ejected
                }
            };
            if group.is_empty() {
                continue;
            }
            let mut g_sel: ClusterSel = BTreeMap::new();
            let mut h_sel: ClusterSel = BTreeMap::new();
            for &id in &group {
                let s = &splits[&id];
                let clusters = &remaining[&id];
                g_sel.insert(id, s.top.iter().map(|&i| clusters[i].clone()).collect());
                h_sel.insert(id, s.rest.iter().map(|&i| clusters[i].clone()).collect());
            }
            let mut sub_trail = trail.to_vec();
            sub_trail.push(ProvStep::Stratum { level });
            let cg = color_selection(ctx, &g_sel, None, &sub_trail, guard - 1)?;
            let ch = color_selection(ctx, &h_sel, None, &sub_trail, guard - 1)?;
            let mut product_trail = sub_trail.clone();
            product_trail.push(ProvStep::Product);
            classes.extend(product_classes(&cg, &ch, &product_trail));
            for id in &group {
                remaining.remove(id);
            }
        }
    }

    if !remaining.is_empty() {
        let avoid: BTreeMap<CellId, Vec<IntervalBox>> = remaining
            .iter()
            .map(|(&id, clusters)| (id, ctx.avoid_boxes(id, clusters)))
            .collect();
        let mut trail_greedy = trail.to_vec();
        trail_greedy.push(ProvStep::Greedy);
        classes.extend(greedy_frozen(ctx, &avoid, &trail_greedy)?);
    }
    Ok(classes)
}

/// Axes ordered by how many remaining cells they can split, then by the
/// smallest certified gap (larger is better), preferred axis first.
fn axis_order(ctx: &Ctx, sel: &ClusterSel, preferred: Option<usize>) -> Vec<usize> {
    let k = ctx.spec.dim();
    let mut scored: Vec<(usize, usize, f64)> = (0..k)
        .map(|axis| {
            let mut count = 0usize;
            let mut min_gap = f64::INFINITY;
            for (&id, clusters) in sel {
                if let Some(s) = split_cell_on_axis(ctx, id, clusters, axis) {
                    count += 1;
                    min_gap = min_gap.min(s.gap);
                }
            }
            (axis, count, if count > 0 { min_gap } else { 0.0 })
        })
        .collect();
    scored.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then(b.2.partial_cmp(&a.2).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.0.cmp(&b.0))
    });
    let mut axes: Vec<usize> = scored.into_iter().map(|(a, _, _)| a).collect();
    if let Some(p) = preferred {
        axes.retain(|&a| a != p);
        axes.insert(0, p);
    }
    axes
}

/// Tripwire for selection consistency across shared faces: adjacent cells
/// of one stratum whose top branch sets differ must still agree on the top
/// value, so their top coordinate hulls must intersect. Returns the group
/// with offenders removed (as the error payload when any were dropped).
fn face_consistent(
    ctx: &Ctx,
    sel: &ClusterSel,
    splits: &BTreeMap<CellId, ClusterSplit>,
    group: &[CellId],
) -> Result<Vec<CellId>, Vec<CellId>> {
    let mut dropped: BTreeSet<CellId> = BTreeSet::new();
    for (i, &a) in group.iter().enumerate() {
        for &b in &group[i + 1..] {
            let (Ok(ca), Ok(cb)) = (ctx.complex.cell(a), ctx.complex.cell(b)) else {
                continue;
            };
            if crate::interval::box_distance(&ca.bounds, &cb.bounds) > 0.0 {
                continue;
            }
            let top_a = top_branches(sel, splits, a);
            let top_b = top_branches(sel, splits, b);
            if top_a == top_b {
                continue;
            }
            let hull_a = top_hull(ctx, sel, splits, a);
            let hull_b = top_hull(ctx, sel, splits, b);
            if !hull_a.intersects(&hull_b) {
                dropped.insert(b);
            }
        }
    }
    if dropped.is_empty() {
        Ok(group.to_vec())
    } else {
        Err(group.iter().copied().filter(|id| !dropped.contains(id)).collect())
    }
}

fn top_branches(
    sel: &ClusterSel,
    splits: &BTreeMap<CellId, ClusterSplit>,
    id: CellId,
) -> BTreeSet<usize> {
    let clusters = &sel[&id];
    splits[&id]
        .top
        .iter()
        .flat_map(|&i| clusters[i].iter().copied())
        .collect()
}

fn top_hull(
    ctx: &Ctx,
    sel: &ClusterSel,
    splits: &BTreeMap<CellId, ClusterSplit>,
    id: CellId,
) -> Interval {
    // Hull over every axis is overkill; the consistency gauge uses the
    // full-box distance of image hulls projected to all axes via the first
    // coordinate hull of the top clusters' boxes. Cheap and symmetric.
    let clusters = &sel[&id];
    let mut hull: Option<Interval> = None;
    for &i in &splits[&id].top {
        for &j in &clusters[i] {
            let b = &ctx.encl[&id][j];
            let iv = b[0];
            hull = Some(match hull {
                Some(h) => h.hull(&iv),
                None => iv,
            });
        }
    }
    hull.expect("top group nonempty")
}

/// Merge a branch subset of one cell into clusters of certified-equal (or
/// boundary-ambiguous) values.
pub(crate) fn branch_clusters(
    spec: &MultiMapSpec,
    complex: &DomainComplex,
    cell: CellId,
    subset: &[usize],
) -> Result<Vec<Vec<usize>>, ColorError> {
    let c = complex.cell(cell)?;
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
            if crate::strata::pair_relation(spec, c, subset[a], subset[b])?
                != PairRelation::Distinct
            {
                let ra = find(&mut parent, a);
                let rb = find(&mut parent, b);
                parent[ra] = rb;
            }
        }
    }
    let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        clusters.entry(r).or_default().push(subset[i]);
    }
    let mut out: Vec<Vec<usize>> = clusters
        .into_values()
        .map(|mut v| {
            v.sort_unstable();
            v
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Split a certified-argmax region into the derived maps g (top group by
/// value) and h (the rest) on the given axis and color the product of the
/// two recursions.
pub fn split_argmax_coloring(
    spec: &MultiMapSpec,
    complex: &DomainComplex,
    region: &BTreeSet<CellId>,
    axis: usize,
    params: ColorParams,
) -> Result<Coloring, ColorError> {
    let ctx = Ctx::build(spec, complex, params)?;
    let sel = region_selection(spec, complex, region)?;
    let mut g_sel: ClusterSel = BTreeMap::new();
    let mut h_sel: ClusterSel = BTreeMap::new();
    for (&id, clusters) in &sel {
        let split = split_cell_on_axis(&ctx, id, clusters, axis).ok_or_else(|| {
            ColorError::StrataViolation(format!(
                "cell {id} has no certified argmax split on axis {axis} \
                 (all values may tie: M = n violates the split precondition)"
            ))
        })?;
        g_sel.insert(id, split.top.iter().map(|&i| clusters[i].clone()).collect());
        h_sel.insert(id, split.rest.iter().map(|&i| clusters[i].clone()).collect());
    }
    sample_split_tripwire(spec, complex, &g_sel, &h_sel, axis, params.seed)?;

    let guard = spec.branch_count() + 1;
    let cg = color_selection(&ctx, &g_sel, None, &[], guard)?;
    let ch = color_selection(&ctx, &h_sel, None, &[], guard)?;
    Ok(Coloring {
        classes: product_classes(&cg, &ch, &[ProvStep::Product]),
    })
}

/// Sampled check that the certified split agrees with exact evaluation:
/// at random points every top-branch coordinate must strictly exceed
/// every rest-branch coordinate.
fn sample_split_tripwire(
    spec: &MultiMapSpec,
    complex: &DomainComplex,
    g_sel: &ClusterSel,
    h_sel: &ClusterSel,
    axis: usize,
    seed: u64,
) -> Result<(), ColorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (&id, g_clusters) in g_sel {
        let h_clusters = &h_sel[&id];
        if h_clusters.is_empty() {
            continue;
        }
        let cell = complex.cell(id)?;
        for _ in 0..4 {
            let p = sample_point(&mut rng, &cell.bounds);
            let coord = |branch: usize| -> Result<f64, ColorError> {
                Ok(spec.branch_point(branch, &p)?[axis])
            };
            let mut min_top = f64::INFINITY;
            for cl in g_clusters {
                for &j in cl {
                    min_top = min_top.min(coord(j)?);
                }
            }
            for cl in h_clusters {
                for &j in cl {
                    if coord(j)? >= min_top {
                        return Err(ColorError::StrataViolation(format!(
                            "sampled point in cell {id} contradicts the certified \
                             split on axis {axis}"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

fn region_selection(
    spec: &MultiMapSpec,
    complex: &DomainComplex,
    region: &BTreeSet<CellId>,
) -> Result<ClusterSel, ColorError> {
    let all: Vec<usize> = (0..spec.branch_count()).collect();
    region
        .iter()
        .map(|&id| Ok((id, branch_clusters(spec, complex, id, &all)?)))
        .collect()
}

/// Iterate the certified-multiplicity strata of a region on one axis,
/// largest multiplicity first, coloring each stratum with the argmax
/// split. Every region cell must carry a certified multiplicity in
/// 1..n-1.
pub fn stratified_coloring(
    spec: &MultiMapSpec,
    complex: &DomainComplex,
    region: &BTreeSet<CellId>,
    axis: usize,
    params: ColorParams,
) -> Result<Coloring, ColorError> {
    if region.is_empty() {
        return Ok(Coloring { classes: Vec::new() });
    }
    let n = spec.branch_count();
    let all: Vec<usize> = (0..n).collect();
    let mut by_mult: BTreeMap<usize, BTreeSet<CellId>> = BTreeMap::new();
    for &id in region {
        let cell = complex.cell(id)?;
        let split = argmax_split(spec, cell, &all, axis)?;
        match split.multiplicity {
            MultiplicityLabel::Certified(m) if m < n && !split.rest.is_empty() => {
                by_mult.entry(m).or_default().insert(id);
            }
            MultiplicityLabel::Certified(m) => {
                return Err(ColorError::StrataViolation(format!(
                    "cell {id} certified M = {m} of n = {n} on axis {axis}: \
                     all values tie, the stratified hypothesis fails"
                )));
            }
            MultiplicityLabel::Ambiguous => {
                return Err(ColorError::StrataViolation(format!(
                    "cell {id} has no certified multiplicity on axis {axis}"
                )));
            }
        }
    }
    let mut classes = Vec::new();
    let mut level = 0usize;
    for (_m, cells) in by_mult.into_iter().rev() {
        level += 1;
        let sub = split_argmax_coloring(spec, complex, &cells, axis, params)?;
        for mut class in sub.classes {
            let mut trail = vec![ProvStep::Stratum { level }];
            trail.append(&mut class.provenance);
            class.provenance = trail;
            classes.push(class);
        }
    }
    Ok(Coloring { classes })
}
