//! Independent certificate checker.
//!
//! `verify_coloring` recomputes every enclosure from the map specification
//! and never reads colorer-provided margins. The interval check is the
//! certificate; point sampling is a tripwire for implementation bugs and
//! never upgrades a failed interval check.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colorer::Coloring;
use crate::error::MapError;
use crate::geometry::{boxset_separation, CellId, DomainComplex};
use crate::interval::{point_box_distance, IntervalBox};
use crate::multimap::{sample_point, MultiMapSpec};

pub const DEFAULT_MIN_MARGIN: f64 = 1e-6;
const SAMPLES_PER_CLASS: usize = 100;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointViolation {
    /// Sample point in the class whose image lands back near the class.
    pub source: Vec<f64>,
    /// Image point within `min_margin` of the class region.
    pub image: Vec<f64>,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassReport {
    pub index: usize,
    /// Separation between the class region and its recomputed image boxes.
    pub margin: f64,
    pub interval_ok: bool,
    pub point_violation: Option<PointViolation>,
}

impl ClassReport {
    pub fn ok(&self) -> bool {
        self.interval_ok && self.point_violation.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Bright,
    Violations,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub verdict: Verdict,
    pub min_margin_required: f64,
    /// Smallest class margin (infinity for an empty coloring).
    pub min_class_margin: f64,
    pub classes: Vec<ClassReport>,
    pub uncovered: Vec<CellId>,
}

impl VerificationReport {
    pub fn is_bright(&self) -> bool {
        self.verdict == Verdict::Bright
    }
}

/// Pure separation test shared by the verifier and the colorer back-off:
/// true iff the box sets stay at least `margin` apart.
pub fn verify_disjoint_from_closure(
    cells: &[IntervalBox],
    images: &[IntervalBox],
    margin: f64,
) -> bool {
    match boxset_separation(cells, images) {
        Ok(sep) => sep >= margin,
        Err(_) => false,
    }
}

/// Check cover completeness and per-class brightness of a coloring.
pub fn verify_coloring(
    m: &MultiMapSpec,
    complex: &DomainComplex,
    coloring: &Coloring,
    min_margin: f64,
    seed: u64,
) -> Result<VerificationReport, MapError> {
    // Reject unknown cell ids up front.
    for class in &coloring.classes {
        for id in &class.cells {
            complex.cell(*id)?;
        }
    }

    let classes: Vec<ClassReport> = coloring
        .classes
        .par_iter()
        .enumerate()
        .map(|(index, class)| -> Result<ClassReport, MapError> {
            let mut cell_boxes: Vec<IntervalBox> = Vec::with_capacity(class.cells.len());
            let mut image_boxes: Vec<IntervalBox> = Vec::new();
            for id in &class.cells {
                let cell = complex.cell(*id)?;
                cell_boxes.push(cell.bounds.clone());
                let enc = m.enclose(cell)?;
                image_boxes.extend(enc.boxes);
            }
            if cell_boxes.is_empty() {
                return Ok(ClassReport {
                    index,
                    margin: f64::INFINITY,
                    interval_ok: true,
                    point_violation: None,
                });
            }
            let margin = boxset_separation(&cell_boxes, &image_boxes)?;
            let interval_ok = margin >= min_margin;

            // Tripwire sampling: evaluate the map exactly at random points
            // of the class and check their images against the class region.
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
            let mut point_violation = None;
            for _ in 0..SAMPLES_PER_CLASS {
                let pick = rng.gen_range(0..cell_boxes.len());
                let p = sample_point(&mut rng, &cell_boxes[pick]);
                let image = m.evaluate(&p)?;
                for y in image.points() {
                    let dist = cell_boxes
                        .iter()
                        .map(|b| point_box_distance(y, b))
                        .fold(f64::INFINITY, f64::min);
                    if dist < min_margin {
                        point_violation = Some(PointViolation {
                            source: p.clone(),
                            image: y.clone(),
                            distance: dist,
                        });
                        break;
                    }
                }
                if point_violation.is_some() {
                    break;
                }
            }
            Ok(ClassReport { index, margin, interval_ok, point_violation })
        })
        .collect::<Result<_, _>>()?;

    let covered: std::collections::BTreeSet<CellId> = coloring
        .classes
        .iter()
        .flat_map(|c| c.cells.iter().copied())
        .collect();
    let uncovered: Vec<CellId> = complex
        .ids()
        .filter(|id| !covered.contains(id))
        .collect();

    let all_ok = classes.iter().all(|c| c.ok()) && uncovered.is_empty();
    let min_class_margin = classes
        .iter()
        .map(|c| c.margin)
        .fold(f64::INFINITY, f64::min);
    Ok(VerificationReport {
        verdict: if all_ok { Verdict::Bright } else { Verdict::Violations },
        min_margin_required: min_margin,
        min_class_margin,
        classes,
        uncovered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorer::{ColorClass, ProvStep};
    use crate::expr::parse;
    use crate::interval::Interval;
    use crate::multimap::Tolerances;
    use std::collections::BTreeSet;

    fn translation(shift: f64) -> MultiMapSpec {
        MultiMapSpec::new(
            1,
            vec![vec![parse(&format!("x0+{shift}")).unwrap()]],
            Tolerances::default(),
        )
        .unwrap()
    }

    fn block_coloring(complex: &DomainComplex, block: f64, colors: usize) -> Coloring {
        let mut classes: Vec<BTreeSet<CellId>> = vec![BTreeSet::new(); colors];
        for cell in complex.cells() {
            let idx = ((cell.bounds[0].lo + 1e-12) / block).floor() as usize % colors;
            classes[idx].insert(cell.id);
        }
        Coloring {
            classes: classes
                .into_iter()
                .map(|cells| ColorClass {
                    cells,
                    margin: 0.0,
                    provenance: vec![ProvStep::Manual],
                })
                .collect(),
        }
    }

    #[test]
    fn hand_built_block_coloring_is_bright() {
        let m = translation(1.0);
        let x = DomainComplex::build(&[vec![(0.0, 12.0)]], 0.1).unwrap();
        let coloring = block_coloring(&x, 0.8, 3);
        let report = verify_coloring(&m, &x, &coloring, 1e-6, 0).unwrap();
        assert!(report.is_bright(), "{report:?}");
        assert!(report.min_class_margin >= 0.15);
    }

    #[test]
    fn self_overlapping_class_violates() {
        let m = translation(1.0);
        let x = DomainComplex::build(&[vec![(0.0, 2.0)]], 0.5).unwrap();
        let coloring = Coloring {
            classes: vec![ColorClass {
                cells: x.ids().collect(),
                margin: 0.0,
                provenance: vec![ProvStep::Manual],
            }],
        };
        let report = verify_coloring(&m, &x, &coloring, 1e-6, 0).unwrap();
        assert!(!report.is_bright());
        assert!(!report.classes[0].interval_ok);
    }

    #[test]
    fn missing_cell_is_cover_violation() {
        let m = translation(5.0);
        let x = DomainComplex::build(&[vec![(0.0, 1.0)]], 0.5).unwrap();
        let mut ids: Vec<CellId> = x.ids().collect();
        let dropped = ids.pop().unwrap();
        let coloring = Coloring {
            classes: vec![ColorClass {
                cells: ids.into_iter().collect(),
                margin: 0.0,
                provenance: vec![ProvStep::Manual],
            }],
        };
        let report = verify_coloring(&m, &x, &coloring, 1e-6, 0).unwrap();
        assert!(!report.is_bright());
        assert_eq!(report.uncovered, vec![dropped]);
    }

    #[test]
    fn shrinking_a_class_never_decreases_margin() {
        let m = translation(2.0);
        let x = DomainComplex::build(&[vec![(0.0, 4.0)]], 0.5).unwrap();
        let all: BTreeSet<CellId> = x.ids().collect();
        let full = Coloring {
            classes: vec![ColorClass {
                cells: all.clone(),
                margin: 0.0,
                provenance: vec![ProvStep::Manual],
            }],
        };
        let full_margin = verify_coloring(&m, &x, &full, 1e-9, 0)
            .unwrap()
            .classes[0]
            .margin;
        let half: BTreeSet<CellId> = all.iter().copied().take(4).collect();
        let shrunk = Coloring {
            classes: vec![ColorClass {
                cells: half,
                margin: 0.0,
                provenance: vec![ProvStep::Manual],
            }],
        };
        let shrunk_margin = verify_coloring(&m, &x, &shrunk, 1e-9, 0)
            .unwrap()
            .classes[0]
            .margin;
        assert!(shrunk_margin >= full_margin);
    }

    #[test]
    fn disjoint_from_closure_boundary_semantics() {
        let cells = vec![vec![Interval::new(0.0, 1.0)]];
        let far = vec![vec![Interval::new(2.0, 3.0)]];
        assert!(verify_disjoint_from_closure(&cells, &far, 0.5));
        let close = vec![vec![Interval::new(1.1, 2.0)]];
        assert!(!verify_disjoint_from_closure(&cells, &close, 0.2));
        // Touching sets pass at margin exactly 0; bright thresholds are
        // strictly positive, so colorers reject them anyway.
        let touching = vec![vec![Interval::new(1.0, 2.0)]];
        assert!(verify_disjoint_from_closure(&cells, &touching, 0.0));
    }
}
