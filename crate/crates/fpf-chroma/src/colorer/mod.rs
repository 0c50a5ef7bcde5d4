//! The coloring pipeline: base single-valued colorer, product combinator,
//! argmax-split recursion, stratified induction, and the top-level driver,
//! plus the color-count bound and a greedy conflict-coloring baseline.
//!
//! Classes are built against per-cell *avoid boxes* (the image enclosures
//! the class must keep away from) and accepted only after an in-loop
//! separation check, so every construction strategy is verified before it
//! ships. The independent checker in [`crate::verifier`] re-derives
//! everything from the map specification afterwards.

mod bound;
mod greedy;
mod inflate;
mod pipeline;
mod selection;
mod single;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{ColorError, MapError};
use crate::geometry::{CellId, DomainComplex};
use crate::interval::IntervalBox;
use crate::multimap::{FpfCertificate, MultiMapSpec};

pub use bound::bound;
pub use greedy::greedy_conflict_coloring;
pub use inflate::{inflate_color, InflateReport};
pub use pipeline::{color_multimap, color_single_valued, PipelineReport};
pub use selection::{split_argmax_coloring, stratified_coloring};

/// Which pipeline step produced a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProvStep {
    /// Single class covering a region whose image leaves it entirely.
    WholeRegion,
    /// Block partition along an axis inside one displacement sector.
    SectorBlock { axis: usize, positive: bool },
    /// Greedy conflict coloring.
    Greedy,
    /// Collision stratum (cells where |f(x)| < n).
    LStratum,
    /// Stage j of the singleton-projection induction.
    EiStage { stage: usize },
    /// Region with no singleton projection axis.
    Leftover,
    /// Stratum of one certified argmax multiplicity.
    Stratum { level: usize },
    /// Intersection of two sub-colorings.
    Product,
    /// Whole map is single-valued.
    SingleValued,
    /// Class enlarged by a verified neighborhood.
    Inflated,
    /// Built by hand (tests, external files).
    Manual,
}

/// One bright color: a set of cells together with the separation margin
/// certified at construction time and the trail of steps that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColorClass {
    pub cells: BTreeSet<CellId>,
    pub margin: f64,
    pub provenance: Vec<ProvStep>,
}

/// An ordered list of color classes covering a region. Classes may
/// overlap: covers are covers, not partitions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Coloring {
    pub classes: Vec<ColorClass>,
}

impl Coloring {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn covered_cells(&self) -> BTreeSet<CellId> {
        self.classes
            .iter()
            .flat_map(|c| c.cells.iter().copied())
            .collect()
    }

    pub fn min_margin(&self) -> f64 {
        self.classes
            .iter()
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn has_provenance(&self, step: ProvStep) -> bool {
        self.classes
            .iter()
            .any(|c| c.provenance.contains(&step))
    }
}

/// Knobs shared by every coloring routine.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ColorParams {
    /// Floor for any accepted class margin (strictly positive gap is the
    /// computable "misses the closure").
    pub min_margin: f64,
    /// Certified fixed-point-freeness margin; acceptance targets start at
    /// a quarter of it and back off geometrically to `min_margin`.
    pub fpf_margin: f64,
    /// Refinement budget for strata classification.
    pub max_depth: usize,
    /// Refinement rounds for standalone greedy coloring.
    pub greedy_rounds: usize,
    pub seed: u64,
}

impl Default for ColorParams {
    fn default() -> Self {
        ColorParams {
            min_margin: 1e-6,
            fpf_margin: 4e-6,
            max_depth: 12,
            greedy_rounds: 8,
            seed: 0,
        }
    }
}

impl ColorParams {
    pub fn with_certificate(mut self, cert: &FpfCertificate) -> Self {
        self.fpf_margin = cert.margin.max(self.min_margin);
        self
    }

    /// Descending ladder of acceptance targets: fpf_margin/4 halved down
    /// to the floor.
    pub(crate) fn target_ladder(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut t = (self.fpf_margin / 4.0).max(self.min_margin);
        while t > self.min_margin {
            out.push(t);
            t /= 2.0;
        }
        out.push(self.min_margin);
        out
    }
}

/// Per-cell selection of branch clusters. Each cluster is a sorted list of
/// branch indices whose values are (certified or assumed) one point of
/// f(x); the cluster's enclosure is the hull of its members' boxes, so
/// every coloring decision stays sound for every member.
pub(crate) type ClusterSel = BTreeMap<CellId, Vec<Vec<usize>>>;

/// Frozen evaluation context: enclosures and displacement boxes for every
/// cell of the (post-refinement) complex.
pub(crate) struct Ctx<'a> {
    pub spec: &'a MultiMapSpec,
    pub complex: &'a DomainComplex,
    /// Per cell: per branch: image box.
    pub encl: BTreeMap<CellId, Vec<IntervalBox>>,
    /// Per cell: per branch: displacement box (branch(x) - x).
    pub disp: BTreeMap<CellId, Vec<IntervalBox>>,
    pub params: ColorParams,
}

impl<'a> Ctx<'a> {
    pub fn build(
        spec: &'a MultiMapSpec,
        complex: &'a DomainComplex,
        params: ColorParams,
    ) -> Result<Self, MapError> {
        use rayon::prelude::*;
        let cells: Vec<_> = complex.cells().cloned().collect();
        let computed: Vec<(CellId, Vec<IntervalBox>, Vec<IntervalBox>)> = cells
            .par_iter()
            .map(|cell| {
                let enc = spec.enclose(cell)?.boxes;
                let disp = spec.displacement_boxes(cell)?;
                Ok((cell.id, enc, disp))
            })
            .collect::<Result<_, MapError>>()?;
        let mut encl = BTreeMap::new();
        let mut disp = BTreeMap::new();
        for (id, e, d) in computed {
            encl.insert(id, e);
            disp.insert(id, d);
        }
        Ok(Ctx { spec, complex, encl, disp, params })
    }

    /// Image boxes a class over `sel` must avoid: hulls are not taken;
    /// every member branch box is listed.
    pub fn avoid_boxes(&self, cell: CellId, clusters: &[Vec<usize>]) -> Vec<IntervalBox> {
        let all = &self.encl[&cell];
        clusters
            .iter()
            .flat_map(|cl| cl.iter().map(|&j| all[j].clone()))
            .collect()
    }

    /// Hull of the displacement boxes of a cluster's members.
    pub fn cluster_disp(&self, cell: CellId, cluster: &[usize]) -> IntervalBox {
        let disp = &self.disp[&cell];
        hull_boxes(cluster.iter().map(|&j| &disp[j]))
    }

    /// Hull of the coordinate-`axis` image intervals of a cluster.
    pub fn cluster_coord(
        &self,
        cell: CellId,
        cluster: &[usize],
        axis: usize,
    ) -> crate::interval::Interval {
        let encl = &self.encl[&cell];
        let mut it = cluster.iter().map(|&j| encl[j][axis]);
        let first = it.next().expect("empty cluster");
        it.fold(first, |acc, iv| acc.hull(&iv))
    }
}

pub(crate) fn hull_boxes<'b>(mut boxes: impl Iterator<Item = &'b IntervalBox>) -> IntervalBox {
    let first = boxes.next().expect("empty box list").clone();
    boxes.fold(first, |acc, b| {
        acc.iter().zip(b).map(|(x, y)| x.hull(y)).collect()
    })
}

/// Nonempty pairwise intersections of two colorings over the same cell
/// set; margins are the minimum of the parents'.
pub fn product_coloring(cg: &Coloring, ch: &Coloring) -> Result<Coloring, ColorError> {
    if cg.covered_cells() != ch.covered_cells() {
        return Err(ColorError::CellSetMismatch);
    }
    Ok(Coloring {
        classes: product_classes(&cg.classes, &ch.classes, &[ProvStep::Product]),
    })
}

pub(crate) fn product_classes(
    a: &[ColorClass],
    b: &[ColorClass],
    trail: &[ProvStep],
) -> Vec<ColorClass> {
    let mut seen: BTreeSet<Vec<CellId>> = BTreeSet::new();
    let mut out = Vec::new();
    for ca in a {
        for cb in b {
            let cells: BTreeSet<CellId> =
                ca.cells.intersection(&cb.cells).copied().collect();
            if cells.is_empty() {
                continue;
            }
            let key: Vec<CellId> = cells.iter().copied().collect();
            if !seen.insert(key) {
                continue;
            }
            out.push(ColorClass {
                cells,
                margin: ca.margin.min(cb.margin),
                provenance: trail.to_vec(),
            });
        }
    }
    out
}
