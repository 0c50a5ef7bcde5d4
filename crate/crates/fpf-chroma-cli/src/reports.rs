//! On-disk certificate and report formats.
//!
//! All structures serialize with fixed field order and container types
//! with stable iteration, so identical runs produce identical bytes.

use serde::{Deserialize, Serialize};

use fpf_chroma::colorer::{ColorClass, Coloring, PipelineReport, ProvStep};
use fpf_chroma::geometry::{Cell, CellId, DomainComplex};
use fpf_chroma::multimap::{CertifyOutcome, FpfCertificate};
use fpf_chroma::verifier::VerificationReport;

pub const COLORING_FORMAT: &str = "fpf-chroma/coloring/v1";
pub const CERTIFY_FORMAT: &str = "fpf-chroma/certify/v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellRecord {
    pub id: u64,
    /// k pairs [lo, hi].
    pub bounds: Vec<[f64; 2]>,
}

impl CellRecord {
    pub fn from_cell(cell: &Cell) -> Self {
        CellRecord {
            id: cell.id.0,
            bounds: cell.bounds.iter().map(|iv| [iv.lo, iv.hi]).collect(),
        }
    }
}

/// Output of `certify`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifyFile {
    pub format: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<WitnessRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suspect_cells: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub point: Vec<f64>,
    pub distance: f64,
}

impl CertifyFile {
    pub fn from_outcome(outcome: &CertifyOutcome) -> Self {
        match outcome {
            CertifyOutcome::Certified(c) => CertifyFile {
                format: CERTIFY_FORMAT.into(),
                status: "certified".into(),
                margin: Some(c.margin),
                depth_used: Some(c.depth_used),
                witnesses: None,
                suspect_cells: None,
            },
            CertifyOutcome::Counterexample(r) => CertifyFile {
                format: CERTIFY_FORMAT.into(),
                status: "counterexample".into(),
                margin: None,
                depth_used: None,
                witnesses: Some(
                    r.witnesses
                        .iter()
                        .map(|w| WitnessRecord {
                            point: w.point.clone(),
                            distance: w.distance,
                        })
                        .collect(),
                ),
                suspect_cells: None,
            },
            CertifyOutcome::Inconclusive(r) => CertifyFile {
                format: CERTIFY_FORMAT.into(),
                status: "inconclusive".into(),
                margin: None,
                depth_used: Some(r.depth_used),
                witnesses: None,
                suspect_cells: Some(r.suspects.iter().map(|c| c.0).collect()),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassRecord {
    pub cells: Vec<u64>,
    pub margin: f64,
    pub provenance: Vec<ProvStep>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ledger {
    pub class_count: usize,
    /// Bound value as a decimal string (may exceed u64).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within_bound: Option<bool>,
    pub dimension: usize,
    pub branch_count: usize,
}

/// Output of `color`: the coloring certificate. It embeds the
/// post-refinement complex so `verify` can recheck without re-running the
/// pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColoringFile {
    pub format: String,
    pub dimension: usize,
    pub branch_count: usize,
    pub fpf_margin: f64,
    pub cells: Vec<CellRecord>,
    pub classes: Vec<ClassRecord>,
    pub ledger: Ledger,
}

impl ColoringFile {
    pub fn build(
        complex: &DomainComplex,
        coloring: &Coloring,
        cert: &FpfCertificate,
        report: &PipelineReport,
        dimension: usize,
        branch_count: usize,
    ) -> Self {
        ColoringFile {
            format: COLORING_FORMAT.into(),
            dimension,
            branch_count,
            fpf_margin: cert.margin,
            cells: complex.cells().map(CellRecord::from_cell).collect(),
            classes: coloring
                .classes
                .iter()
                .map(|c| ClassRecord {
                    cells: c.cells.iter().map(|id| id.0).collect(),
                    margin: c.margin,
                    provenance: c.provenance.clone(),
                })
                .collect(),
            ledger: Ledger {
                class_count: report.class_count,
                bound: report.bound.map(|b| b.to_string()),
                within_bound: report.within_bound,
                dimension,
                branch_count,
            },
        }
    }

    /// Reconstruct the complex stored in the certificate, ids preserved.
    pub fn complex(&self) -> Result<DomainComplex, String> {
        let cells: Vec<Cell> = self
            .cells
            .iter()
            .map(|r| Cell {
                id: CellId(r.id),
                bounds: r
                    .bounds
                    .iter()
                    .map(|&[lo, hi]| fpf_chroma::interval::Interval::new(lo, hi))
                    .collect(),
            })
            .collect();
        DomainComplex::from_cell_records(self.dimension, cells).map_err(|e| e.to_string())
    }

    pub fn coloring(&self) -> Coloring {
        Coloring {
            classes: self
                .classes
                .iter()
                .map(|r| ColorClass {
                    cells: r.cells.iter().map(|&id| CellId(id)).collect(),
                    margin: r.margin,
                    provenance: r.provenance.clone(),
                })
                .collect(),
        }
    }
}

/// Output of `verify`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyFile {
    pub format: String,
    pub verdict: String,
    pub min_margin_required: f64,
    pub min_class_margin: f64,
    pub class_margins: Vec<f64>,
    pub failing_classes: Vec<usize>,
    pub uncovered_cells: Vec<u64>,
}

impl VerifyFile {
    pub fn from_report(report: &VerificationReport) -> Self {
        VerifyFile {
            format: "fpf-chroma/verify/v1".into(),
            verdict: if report.is_bright() { "bright" } else { "violations" }.into(),
            min_margin_required: report.min_margin_required,
            min_class_margin: report.min_class_margin,
            class_margins: report.classes.iter().map(|c| c.margin).collect(),
            failing_classes: report
                .classes
                .iter()
                .filter(|c| !c.ok())
                .map(|c| c.index)
                .collect(),
            uncovered_cells: report.uncovered.iter().map(|c| c.0).collect(),
        }
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report serialization");
    out.push(b'\n');
    out
}
