//! Top-level coloring drivers.
//!
//! `color_multimap` runs the full recursion: classify cells (refining
//! ambiguous ones), color the collision region with a branch-merged
//! recursion, iterate the singleton-projection stages over growing axis
//! index sets, and finish the leftover region where no projection is a
//! singleton. `color_single_valued` is the n = 1 base case.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colorer::selection::{branch_clusters, color_selection};
use crate::colorer::single::color_single_clusters;
use crate::colorer::{bound, ColorClass, ColorParams, Coloring, ClusterSel, Ctx, ProvStep};
use crate::error::{ColorError, GeometryError};
use crate::geometry::{Cell, CellId, DomainComplex};
use crate::multimap::{FpfCertificate, MultiMapSpec};
use crate::strata::{label_cell, CellStrata, CollisionLabel, SingletonLabel};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineReport {
    pub class_count: usize,
    /// Documented-recurrence bound for (k, n); absent on overflow.
    pub bound: Option<u128>,
    pub within_bound: Option<bool>,
    pub cells: usize,
    pub collision_cells: usize,
    pub ambiguous_cells: usize,
    /// Classes per top-level stage, keyed by the stage tag.
    pub stage_classes: BTreeMap<String, usize>,
}

/// Color a single-valued (n = 1) fixed-point-free map.
pub fn color_single_valued(
    spec: &MultiMapSpec,
    complex: &DomainComplex,
    cert: &FpfCertificate,
    params: ColorParams,
) -> Result<Coloring, ColorError> {
    if spec.branch_count() != 1 {
        return Err(ColorError::StrataViolation(format!(
            "single-valued colorer requires n = 1, map has {}",
            spec.branch_count()
        )));
    }
    let params = params.with_certificate(cert);
    let ctx = Ctx::build(spec, complex, params)?;
    let sel: ClusterSel = complex.ids().map(|id| (id, vec![vec![0]])).collect();
    let classes = color_single_clusters(&ctx, &sel, &[ProvStep::SingleValued])?;
    Ok(Coloring { classes })
}

/// Per-cell labels across all axes plus the collision status.
struct AllLabels {
    collision: CollisionLabel,
    per_axis: Vec<CellStrata>,
}

impl AllLabels {
    fn ambiguous(&self) -> bool {
        self.collision == CollisionLabel::Ambiguous
            || self.per_axis.iter().any(|s| {
                s.multiplicity == crate::strata::MultiplicityLabel::Ambiguous
                    || s.singleton == SingletonLabel::Ambiguous
            })
    }
}

fn classify_all(
    spec: &MultiMapSpec,
    complex: &mut DomainComplex,
    max_depth: usize,
) -> Result<BTreeMap<CellId, AllLabels>, ColorError> {
    let k = spec.dim();
    let mut pending: Vec<CellId> = complex.ids().collect();
    let mut labels: BTreeMap<CellId, AllLabels> = BTreeMap::new();
    for depth in 0..=max_depth {
        let cells: Vec<Cell> = pending
            .iter()
            .map(|id| complex.cell(*id).cloned())
            .collect::<Result<_, _>>()?;
        let computed: Vec<AllLabels> = cells
            .par_iter()
            .map(|cell| {
                let per_axis: Vec<CellStrata> = (0..k)
                    .map(|a| label_cell(spec, cell, a))
                    .collect::<Result<_, _>>()?;
                let collision = per_axis[0].collision;
                Ok(AllLabels { collision, per_axis })
            })
            .collect::<Result<_, ColorError>>()?;
        let mut still = Vec::new();
        for (cell, l) in cells.iter().zip(computed) {
            if l.ambiguous() && depth < max_depth {
                still.push(cell.id);
            } else {
                labels.insert(cell.id, l);
            }
        }
        if still.is_empty() {
            break;
        }
        let mut next = Vec::with_capacity(still.len() * 2);
        for id in still {
            match complex.refine_cell(id, None) {
                Ok((a, b)) => {
                    next.push(a);
                    next.push(b);
                }
                Err(GeometryError::DegenerateAxis { .. }) => {
                    let cell = complex.cell(id)?.clone();
                    let per_axis: Vec<CellStrata> = (0..k)
                        .map(|a| label_cell(spec, &cell, a))
                        .collect::<Result<_, _>>()?;
                    let collision = per_axis[0].collision;
                    labels.insert(id, AllLabels { collision, per_axis });
                }
                Err(e) => return Err(e.into()),
            }
        }
        pending = next;
    }
    Ok(labels)
}

fn combinations(k: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn rec(k: usize, size: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for a in start..k {
            current.push(a);
            rec(k, size, a + 1, current, out);
            current.pop();
        }
    }
    rec(k, size, 0, &mut current, &mut out);
    out
}

/// The full coloring recursion for a certified fixed-point-free map.
pub fn color_multimap(
    spec: &MultiMapSpec,
    complex: &mut DomainComplex,
    cert: &FpfCertificate,
    params: ColorParams,
) -> Result<(Coloring, PipelineReport), ColorError> {
    let params = params.with_certificate(cert);
    let n = spec.branch_count();
    let k = spec.dim();

    if n == 1 {
        let coloring = color_single_valued(spec, complex, cert, params)?;
        let report = make_report(spec, complex, &coloring, 0, 0);
        return Ok((coloring, report));
    }

    let labels = classify_all(spec, complex, params.max_depth)?;
    let ambiguous_cells = labels.values().filter(|l| l.ambiguous()).count();
    if ambiguous_cells * 2 > labels.len().max(1) {
        return Err(ColorError::InconclusiveStrata {
            ambiguous: ambiguous_cells,
            depth: params.max_depth,
        });
    }

    let ctx = Ctx::build(spec, complex, params)?;
    let all_branches: Vec<usize> = (0..n).collect();
    let mut classes: Vec<ColorClass> = Vec::new();

    // Collision region L: cells where |f(x)| < n somewhere (or the
    // boundary residue, resolved toward the closed side). Branch-merged
    // clusters give a selection with at most n-1 values per cell.
    let l_region: BTreeSet<CellId> = labels
        .iter()
        .filter(|(_, l)| l.collision != CollisionLabel::AllDistinct)
        .map(|(&id, _)| id)
        .collect();
    if !l_region.is_empty() {
        let sel: ClusterSel = l_region
            .iter()
            .map(|&id| Ok((id, branch_clusters(spec, complex, id, &all_branches)?)))
            .collect::<Result<_, ColorError>>()?;
        classes.extend(color_selection(
            &ctx,
            &sel,
            None,
            &[ProvStep::LStratum],
            n + 1,
        )?);
    }

    // E: honest |f(x)| = n cells. Stage j covers the cells whose
    // projections are singletons outside a j-sized axis set I; inside I a
    // non-singleton axis must exist, and the selection splits there.
    let e_region: BTreeSet<CellId> = labels
        .iter()
        .filter(|(_, l)| l.collision == CollisionLabel::AllDistinct)
        .map(|(&id, _)| id)
        .collect();
    let singleton_on = |id: CellId, axis: usize| {
        labels[&id].per_axis[axis].singleton == SingletonLabel::Singleton
    };
    let mut covered: BTreeSet<CellId> = BTreeSet::new();
    for stage in 1..k {
        for index_set in combinations(k, stage) {
            let cells: BTreeSet<CellId> = e_region
                .iter()
                .filter(|&&id| !covered.contains(&id))
                .filter(|&&id| (0..k).all(|a| index_set.contains(&a) || singleton_on(id, a)))
                .copied()
                .collect();
            if cells.is_empty() {
                continue;
            }
            let sel: ClusterSel = cells
                .iter()
                .map(|&id| Ok((id, branch_clusters(spec, complex, id, &all_branches)?)))
                .collect::<Result<_, ColorError>>()?;
            let preferred = index_set.first().copied();
            classes.extend(color_selection(
                &ctx,
                &sel,
                preferred,
                &[ProvStep::EiStage { stage }],
                n + 1,
            )?);
            covered.extend(cells);
        }
    }

    // Leftover: no singleton axis at all.
    let leftover: BTreeSet<CellId> = e_region
        .iter()
        .filter(|id| !covered.contains(id))
        .copied()
        .collect();
    if !leftover.is_empty() {
        let sel: ClusterSel = leftover
            .iter()
            .map(|&id| Ok((id, branch_clusters(spec, complex, id, &all_branches)?)))
            .collect::<Result<_, ColorError>>()?;
        classes.extend(color_selection(
            &ctx,
            &sel,
            None,
            &[ProvStep::Leftover],
            n + 1,
        )?);
    }

    let coloring = Coloring { classes };
    let covered_all = coloring.covered_cells();
    let missing = complex.ids().filter(|id| !covered_all.contains(id)).count();
    if missing > 0 {
        return Err(ColorError::ColoringFailed {
            reason: "pipeline left cells uncovered".into(),
            cells: missing,
        });
    }
    let report = make_report(spec, complex, &coloring, l_region.len(), ambiguous_cells);
    Ok((coloring, report))
}

fn make_report(
    spec: &MultiMapSpec,
    complex: &DomainComplex,
    coloring: &Coloring,
    collision_cells: usize,
    ambiguous_cells: usize,
) -> PipelineReport {
    let b = bound(spec.dim() as u32, spec.branch_count() as u32).ok();
    let mut stage_classes: BTreeMap<String, usize> = BTreeMap::new();
    for class in &coloring.classes {
        let tag = match class.provenance.first() {
            Some(ProvStep::LStratum) => "l-stratum",
            Some(ProvStep::EiStage { .. }) => "ei-stage",
            Some(ProvStep::Leftover) => "leftover",
            Some(ProvStep::SingleValued) => "single-valued",
            _ => "other",
        };
        *stage_classes.entry(tag.to_string()).or_insert(0) += 1;
    }
    PipelineReport {
        class_count: coloring.class_count(),
        bound: b,
        within_bound: b.map(|b| (coloring.class_count() as u128) <= b),
        cells: complex.len(),
        collision_cells,
        ambiguous_cells,
        stage_classes,
    }
}
