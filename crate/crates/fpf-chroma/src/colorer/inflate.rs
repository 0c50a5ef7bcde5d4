//! Enlarge a bright color by a verified closed neighborhood.
//!
//! Every bright color admits an open neighborhood whose closure is again a
//! bright color; this realizes that constructively at the largest epsilon
//! in a geometric back-off sequence, re-verifying the enlarged class
//! against freshly computed image enclosures at each attempt.

use serde::{Deserialize, Serialize};

use crate::colorer::{ColorClass, ColorParams, ProvStep};
use crate::error::ColorError;
use crate::geometry::{boxset_separation, CellId, DomainComplex};
use crate::interval::{box_distance, IntervalBox};
use crate::multimap::MultiMapSpec;

const BACKOFF_STEPS: usize = 8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InflateReport {
    /// Epsilon accepted, or None when every attempt failed.
    pub accepted_eps: Option<f64>,
    pub attempts: Vec<f64>,
    pub margin: f64,
    pub added_cells: usize,
}

/// Grow `class` by the cells within `eps`, backing off geometrically until
/// the enlarged class verifies bright; returns the class unchanged (with a
/// report) when even the smallest attempt fails.
pub fn inflate_color(
    spec: &MultiMapSpec,
    complex: &DomainComplex,
    class: &ColorClass,
    eps: f64,
    params: ColorParams,
) -> Result<(ColorClass, InflateReport), ColorError> {
    let base_boxes: Vec<IntervalBox> = class
        .cells
        .iter()
        .map(|id| complex.cell(*id).map(|c| c.bounds.clone()))
        .collect::<Result<_, _>>()?;

    let mut attempts = Vec::new();
    if eps > 0.0 {
        let mut e = eps;
        for _ in 0..BACKOFF_STEPS {
            attempts.push(e);
            let mut cells: std::collections::BTreeSet<CellId> = class.cells.clone();
            for cell in complex.cells() {
                if cells.contains(&cell.id) {
                    continue;
                }
                let near = base_boxes
                    .iter()
                    .any(|b| box_distance(b, &cell.bounds) <= e);
                if near {
                    cells.insert(cell.id);
                }
            }
            if cells.len() > class.cells.len() {
                let cell_boxes: Vec<IntervalBox> = cells
                    .iter()
                    .map(|id| complex.cell(*id).map(|c| c.bounds.clone()))
                    .collect::<Result<_, _>>()?;
                let mut image_boxes: Vec<IntervalBox> = Vec::new();
                for id in &cells {
                    image_boxes.extend(spec.enclose(complex.cell(*id)?)?.boxes);
                }
                let margin = boxset_separation(&cell_boxes, &image_boxes)?;
                if margin >= params.min_margin {
                    let added = cells.len() - class.cells.len();
                    let mut provenance = class.provenance.clone();
                    provenance.push(ProvStep::Inflated);
                    return Ok((
                        ColorClass { cells, margin, provenance },
                        InflateReport {
                            accepted_eps: Some(e),
                            attempts,
                            margin,
                            added_cells: added,
                        },
                    ));
                }
            }
            e /= 2.0;
        }
    }

    // Unchanged: recompute the class's own margin for the report.
    let mut image_boxes: Vec<IntervalBox> = Vec::new();
    for id in &class.cells {
        image_boxes.extend(spec.enclose(complex.cell(*id)?)?.boxes);
    }
    let margin = boxset_separation(&base_boxes, &image_boxes)?;
    Ok((
        class.clone(),
        InflateReport {
            accepted_eps: None,
            attempts,
            margin,
            added_cells: 0,
        },
    ))
}
