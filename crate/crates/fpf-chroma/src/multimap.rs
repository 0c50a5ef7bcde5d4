//! The multivalued map f: X -> exp_n(R^k) as a list of n expression
//! branches, with point evaluation, interval enclosures, and
//! fixed-point-freeness certification.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, MapError};
use crate::expr::Expr;
use crate::geometry::{euclid, hausdorff_distance, Cell, CellId, DomainComplex, FiniteSet};
use crate::interval::{box_origin_distance, Interval, IntervalBox};

/// Tolerances shared by evaluation and certification.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// Points closer than this are one element of f(x).
    pub dedup: f64,
    /// Certification keeps refining cells whose displacement gap is below
    /// this goal (budget permitting); purely a quality target.
    pub margin_goal: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { dedup: 1e-9, margin_goal: 1e-3 }
    }
}

/// n branches of k component expressions each.
#[derive(Debug, Clone)]
pub struct MultiMapSpec {
    dim: usize,
    branches: Vec<Vec<Expr>>,
    pub tol: Tolerances,
}

impl MultiMapSpec {
    pub fn new(
        dim: usize,
        branches: Vec<Vec<Expr>>,
        tol: Tolerances,
    ) -> Result<Self, MapError> {
        if branches.is_empty() {
            return Err(MapError::NoBranches);
        }
        for (bi, branch) in branches.iter().enumerate() {
            if branch.len() != dim {
                return Err(MapError::BranchArity {
                    branch: bi,
                    got: branch.len(),
                    expected: dim,
                });
            }
            for (ci, expr) in branch.iter().enumerate() {
                if let Err(var) = expr.check_dimension(dim) {
                    return Err(MapError::VariableOutOfRange {
                        branch: bi,
                        component: ci,
                        var,
                        dim,
                    });
                }
            }
        }
        Ok(MultiMapSpec { dim, branches, tol })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of branches n.
    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn branch(&self, j: usize) -> &[Expr] {
        &self.branches[j]
    }

    /// Point image of one branch.
    pub fn branch_point(&self, j: usize, p: &[f64]) -> Result<Vec<f64>, MapError> {
        self.branches[j]
            .iter()
            .enumerate()
            .map(|(ci, e)| {
                e.eval_point(p).map_err(|source| MapError::Branch {
                    branch: j,
                    component: ci,
                    source,
                })
            })
            .collect()
    }

    /// f(p) as a canonical finite set; branch collisions shrink the set.
    pub fn evaluate(&self, p: &[f64]) -> Result<FiniteSet, MapError> {
        let mut points = Vec::with_capacity(self.branches.len());
        for j in 0..self.branches.len() {
            points.push(self.branch_point(j, p)?);
        }
        Ok(FiniteSet::canonicalize(points, self.tol.dedup)?)
    }

    /// Per-branch interval boxes enclosing the branch images over a cell.
    pub fn enclose(&self, cell: &Cell) -> Result<BranchEnclosure, MapError> {
        let boxes = self
            .branches
            .iter()
            .enumerate()
            .map(|(bi, branch)| {
                branch
                    .iter()
                    .enumerate()
                    .map(|(ci, e)| {
                        e.eval_interval(&cell.bounds).map_err(|source| {
                            MapError::Branch { branch: bi, component: ci, source }
                        })
                    })
                    .collect::<Result<IntervalBox, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BranchEnclosure { cell: cell.id, boxes })
    }

    /// Per-branch enclosures of the displacement branch_j(x) - x over a
    /// cell, computed with affine arithmetic.
    pub fn displacement_boxes(&self, cell: &Cell) -> Result<Vec<IntervalBox>, MapError> {
        self.branches
            .iter()
            .enumerate()
            .map(|(bi, branch)| {
                branch
                    .iter()
                    .enumerate()
                    .map(|(ci, e)| {
                        e.displacement(ci, &cell.bounds).map_err(|source| {
                            MapError::Branch { branch: bi, component: ci, source }
                        })
                    })
                    .collect::<Result<IntervalBox, _>>()
            })
            .collect()
    }

    /// Exact distance from p to the set f(p).
    pub fn point_displacement(&self, p: &[f64]) -> Result<f64, MapError> {
        let image = self.evaluate(p)?;
        Ok(image
            .points()
            .iter()
            .map(|y| euclid(p, y))
            .fold(f64::INFINITY, f64::min))
    }

    /// Certify x not-in f(x) across the complex, bisecting cells whose
    /// displacement enclosures cannot be separated from the origin.
    pub fn certify_fixed_point_free(
        &self,
        complex: &mut DomainComplex,
        max_depth: usize,
    ) -> Result<CertifyOutcome, MapError> {
        let mut queue: Vec<CellId> = complex.ids().collect();
        let mut witnesses: BTreeMap<CellId, CellWitness> = BTreeMap::new();
        let mut depth_used = 0;

        for depth in 0..=max_depth {
            let cells: Vec<Cell> = queue
                .iter()
                .map(|id| complex.cell(*id).cloned())
                .collect::<Result<_, _>>()?;
            let analyzed: Vec<(CellId, Vec<IntervalBox>, f64)> = cells
                .par_iter()
                .map(|cell| {
                    let disp = self.displacement_boxes(cell)?;
                    let gap = disp
                        .iter()
                        .map(|b| box_origin_distance(b))
                        .fold(f64::INFINITY, f64::min);
                    Ok((cell.id, disp, gap))
                })
                .collect::<Result<_, MapError>>()?;

            let mut suspects: Vec<CellId> = Vec::new();
            for (id, disp, gap) in analyzed {
                if gap > 0.0 && (gap >= self.tol.margin_goal || depth == max_depth) {
                    witnesses.insert(id, CellWitness { cell: id, displacement: disp, gap });
                } else {
                    suspects.push(id);
                }
            }

            if !suspects.is_empty() {
                // Probe for actual fixed points before spending refinement.
                let mut found: Vec<FixedPointWitness> = Vec::new();
                for id in &suspects {
                    let cell = complex.cell(*id)?;
                    let mut probes = cell.corners();
                    probes.push(cell.center());
                    for p in probes {
                        let d = self.point_displacement(&p)?;
                        if d <= self.tol.dedup {
                            found.push(FixedPointWitness {
                                point: p,
                                distance: d,
                            });
                        }
                    }
                }
                if !found.is_empty() {
                    found.sort_by(|a, b| {
                        a.point
                            .partial_cmp(&b.point)
                            .unwrap_or(std::cmp::Ordering::Equal)
                    });
                    found.dedup_by(|a, b| euclid(&a.point, &b.point) <= self.tol.dedup);
                    return Ok(CertifyOutcome::Counterexample(CounterexampleReport {
                        witnesses: found,
                    }));
                }
            }

            if suspects.is_empty() {
                depth_used = depth;
                queue.clear();
                break;
            }
            if depth == max_depth {
                depth_used = depth;
                queue = suspects;
                break;
            }
            depth_used = depth + 1;
            let mut next = Vec::with_capacity(suspects.len() * 2);
            for id in suspects {
                match complex.refine_cell(id, None) {
                    Ok((a, b)) => {
                        next.push(a);
                        next.push(b);
                    }
                    // A fully degenerate cell cannot be refined; keep it.
                    Err(GeometryError::DegenerateAxis { .. }) => next.push(id),
                    Err(e) => return Err(e.into()),
                }
            }
            queue = next;
        }

        // Cells left in the queue at the refinement cap have gap <= 0.
        let unresolved: Vec<CellId> = queue
            .into_iter()
            .filter(|id| !witnesses.contains_key(id))
            .collect();
        if !unresolved.is_empty() {
            return Ok(CertifyOutcome::Inconclusive(InconclusiveReport {
                suspects: unresolved,
                depth_used,
            }));
        }

        let margin = witnesses
            .values()
            .map(|w| w.gap)
            .fold(f64::INFINITY, f64::min);
        Ok(CertifyOutcome::Certified(FpfCertificate {
            margin,
            depth_used,
            witnesses: witnesses.into_values().collect(),
        }))
    }

    /// Empirical Hausdorff-Lipschitz gauge from random same-cell pairs.
    /// Advisory only; never part of a certificate.
    pub fn continuity_report(
        &self,
        complex: &DomainComplex,
        samples: usize,
        seed: u64,
    ) -> Result<ContinuityReport, MapError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells: Vec<&Cell> = complex.cells().collect();
        let mut max_ratio: f64 = 0.0;
        let mut pairs = 0usize;
        while pairs < samples {
            let cell = cells[rng.gen_range(0..cells.len())];
            let p = sample_point(&mut rng, &cell.bounds);
            let q = sample_point(&mut rng, &cell.bounds);
            let dist = euclid(&p, &q);
            if dist < 1e-12 {
                continue;
            }
            let fp = self.evaluate(&p)?;
            let fq = self.evaluate(&q)?;
            let dh = hausdorff_distance(&fp, &fq)?;
            max_ratio = max_ratio.max(dh / dist);
            pairs += 1;
        }
        Ok(ContinuityReport { max_ratio, pairs })
    }
}

pub fn sample_point<R: Rng>(rng: &mut R, bounds: &[Interval]) -> Vec<f64> {
    bounds
        .iter()
        .map(|iv| {
            if iv.width() == 0.0 {
                iv.lo
            } else {
                rng.gen_range(iv.lo..=iv.hi)
            }
        })
        .collect()
}

/// Per-branch image boxes over one cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchEnclosure {
    pub cell: CellId,
    pub boxes: Vec<IntervalBox>,
}

/// Certificate that x is never in f(x): every displacement enclosure keeps
/// a positive gap from the origin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FpfCertificate {
    /// Lower bound for dist(x, f(x)) over the whole domain.
    pub margin: f64,
    pub depth_used: usize,
    pub witnesses: Vec<CellWitness>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellWitness {
    pub cell: CellId,
    pub displacement: Vec<IntervalBox>,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPointWitness {
    pub point: Vec<f64>,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub witnesses: Vec<FixedPointWitness>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InconclusiveReport {
    pub suspects: Vec<CellId>,
    pub depth_used: usize,
}

/// Interval arithmetic may fail to separate a displacement from zero
/// without a true fixed point, so inconclusive is a first-class outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum CertifyOutcome {
    Certified(FpfCertificate),
    Counterexample(CounterexampleReport),
    Inconclusive(InconclusiveReport),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub max_ratio: f64,
    pub pairs: usize,
}
