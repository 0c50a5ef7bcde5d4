//! Subcommand implementations. Each returns the process exit code and
//! writes its artifacts; `main` only does argument parsing.
//!
//! Exit codes:
//!
//! | command  | 0        | 1                    | 2           | 3            | 4               | 5                   |
//! |----------|----------|----------------------|-------------|--------------|-----------------|---------------------|
//! | certify  | certified| counterexample       | input error | inconclusive |                 |                     |
//! | color    | bright   | fpf counterexample   | input error | inconclusive | coloring failed | verification failed |
//! | verify   | bright   | violations           | input error |              |                 |                     |
//! | discrete | done     | loop / fixed point   | input error |              |                 |                     |
//! | bound    | printed  |                      | input error |              |                 |                     |
//! | plot     | written  |                      | input error |              |                 |                     |

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use log::info;

use fpf_chroma::colorer::color_multimap;
use fpf_chroma::discrete::{
    discrete_color_multi, discrete_color_single, doubling_min_colors_capped,
    parse_multimap, DOUBLING_CAP,
};
use fpf_chroma::error::ColorError;
use fpf_chroma::multimap::CertifyOutcome;
use fpf_chroma::verifier::verify_coloring;

use crate::config::RunConfig;
use crate::reports::{to_json_bytes, CertifyFile, ColoringFile, VerifyFile};
use crate::svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_COLORING_FAILED: i32 = 4;
pub const EXIT_VERIFICATION_FAILED: i32 = 5;

fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    RunConfig::from_json(&text).map_err(|e| e.to_string())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), String> {
    fs::write(path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

pub fn cmd_certify(config_path: &Path, out: &Path) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    match run_certify(&cfg) {
        Ok((outcome, _, _)) => {
            let file = CertifyFile::from_outcome(&outcome);
            if let Err(e) = write_file(out, &to_json_bytes(&file)) {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
            match outcome {
                CertifyOutcome::Certified(c) => {
                    println!("certified: margin {} (depth {})", c.margin, c.depth_used);
                    EXIT_OK
                }
                CertifyOutcome::Counterexample(r) => {
                    println!(
                        "counterexample: {} fixed-point witness(es), first at {:?}",
                        r.witnesses.len(),
                        r.witnesses.first().map(|w| &w.point)
                    );
                    EXIT_FAIL
                }
                CertifyOutcome::Inconclusive(r) => {
                    println!("inconclusive: {} suspect cells", r.suspects.len());
                    EXIT_INCONCLUSIVE
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

type CertifyParts = (
    CertifyOutcome,
    fpf_chroma::multimap::MultiMapSpec,
    fpf_chroma::geometry::DomainComplex,
);

fn run_certify(cfg: &RunConfig) -> Result<CertifyParts, String> {
    let map = cfg.build_map().map_err(|e| e.to_string())?;
    let mut complex = cfg.build_complex().map_err(|e| e.to_string())?;
    let outcome = map
        .certify_fixed_point_free(&mut complex, cfg.tolerances.max_depth)
        .map_err(|e| e.to_string())?;
    Ok((outcome, map, complex))
}

pub struct ColorArtifacts {
    pub coloring_json: Vec<u8>,
    pub verify_json: Vec<u8>,
    pub svg: Option<String>,
    pub exit: i32,
    pub summary: String,
}

/// The full pipeline as a pure function of the configuration; used by both
/// the CLI and the test suites.
pub fn run_color(cfg: &RunConfig, want_svg: bool) -> Result<ColorArtifacts, (i32, String)> {
    let (outcome, map, mut complex) =
        run_certify(cfg).map_err(|e| (EXIT_INPUT, e))?;
    let cert = match outcome {
        CertifyOutcome::Certified(c) => c,
        CertifyOutcome::Counterexample(r) => {
            return Err((
                EXIT_FAIL,
                format!(
                    "map has a fixed point (witness {:?}); coloring refused",
                    r.witnesses.first().map(|w| &w.point)
                ),
            ));
        }
        CertifyOutcome::Inconclusive(r) => {
            return Err((
                EXIT_INCONCLUSIVE,
                format!(
                    "fixed-point freeness inconclusive on {} cells",
                    r.suspects.len()
                ),
            ));
        }
    };
    info!("certified fixed-point free, margin {}", cert.margin);

    let params = cfg.color_params().with_certificate(&cert);
    let (coloring, report) = color_multimap(&map, &mut complex, &cert, params)
        .map_err(|e| match e {
            ColorError::InconclusiveStrata { .. } => {
                (EXIT_INCONCLUSIVE, e.to_string())
            }
            other => (EXIT_COLORING_FAILED, other.to_string()),
        })?;
    info!("pipeline produced {} classes", report.class_count);

    let verification = verify_coloring(
        &map,
        &complex,
        &coloring,
        cfg.tolerances.min_margin,
        cfg.seed,
    )
    .map_err(|e| (EXIT_INPUT, e.to_string()))?;

    let coloring_file = ColoringFile::build(
        &complex,
        &coloring,
        &cert,
        &report,
        cfg.dimension,
        map.branch_count(),
    );
    let verify_file = VerifyFile::from_report(&verification);
    let svg_out = if want_svg {
        Some(svg::render(&complex, &coloring).map_err(|e| (EXIT_INPUT, e))?)
    } else {
        None
    };

    let summary = format!(
        "classes {} (bound {}), min margin {:.6}, verdict {}",
        report.class_count,
        coloring_file
            .ledger
            .bound
            .clone()
            .unwrap_or_else(|| "overflow".into()),
        verification.min_class_margin,
        verify_file.verdict,
    );
    let exit = if verification.is_bright() {
        EXIT_OK
    } else {
        EXIT_VERIFICATION_FAILED
    };
    Ok(ColorArtifacts {
        coloring_json: to_json_bytes(&coloring_file),
        verify_json: to_json_bytes(&verify_file),
        svg: svg_out,
        exit,
        summary,
    })
}

pub fn cmd_color(
    config_path: &Path,
    out: &Path,
    report_path: &Path,
    svg_path: Option<&Path>,
) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let want_svg = svg_path.is_some() || cfg.plot;
    match run_color(&cfg, want_svg) {
        Ok(artifacts) => {
            if let Err(e) = write_file(out, &artifacts.coloring_json) {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
            if let Err(e) = write_file(report_path, &artifacts.verify_json) {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
            if let Some(svg_text) = &artifacts.svg {
                let default = out.with_extension("svg");
                let target = svg_path.unwrap_or(&default);
                if let Err(e) = write_file(target, svg_text.as_bytes()) {
                    eprintln!("error: {e}");
                    return EXIT_INPUT;
                }
            }
            println!("{}", artifacts.summary);
            artifacts.exit
        }
        Err((code, message)) => {
            eprintln!("error: {message}");
            code
        }
    }
}

pub fn cmd_verify(
    config_path: &Path,
    certificate: &Path,
    report_out: Option<&Path>,
    min_margin: Option<f64>,
) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let text = match fs::read_to_string(certificate) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", certificate.display());
            return EXIT_INPUT;
        }
    };
    let file: ColoringFile = match serde_json::from_str(&text) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: certificate JSON: {e}");
            return EXIT_INPUT;
        }
    };
    let map = match cfg.build_map() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let complex = match file.complex() {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: certificate cells: {e}");
            return EXIT_INPUT;
        }
    };
    let coloring = file.coloring();
    let margin = min_margin.unwrap_or(cfg.tolerances.min_margin);
    match verify_coloring(&map, &complex, &coloring, margin, cfg.seed) {
        Ok(report) => {
            let out = VerifyFile::from_report(&report);
            if let Some(path) = report_out {
                if let Err(e) = write_file(path, &to_json_bytes(&out)) {
                    eprintln!("error: {e}");
                    return EXIT_INPUT;
                }
            }
            println!(
                "verdict {}: min class margin {:.6} (required {:.6})",
                out.verdict, out.min_class_margin, margin
            );
            if report.is_bright() {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

pub fn cmd_bound(m: u32, n: u32) -> i32 {
    match fpf_chroma::colorer::bound(m, n) {
        Ok(v) => {
            println!("{v}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

pub enum DiscreteMode {
    Single,
    Multi,
    Doubling(u32),
}

pub fn cmd_discrete(mode: DiscreteMode, input: Option<&Path>, out: Option<&Path>) -> i32 {
    let result = match mode {
        DiscreteMode::Doubling(n) => match doubling_min_colors_capped(n, DOUBLING_CAP) {
            Ok(count) => {
                let body = format!("doubling N = {n}: exact minimum {count} colors\n");
                Ok((body, format!("doubling({n}) = {count}")))
            }
            Err(e) => Err((EXIT_INPUT, e.to_string())),
        },
        DiscreteMode::Multi | DiscreteMode::Single => {
            let Some(path) = input else {
                return input_error("an input file is required for this mode");
            };
            let text = match fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return input_error(&format!("cannot read {}: {e}", path.display())),
            };
            match run_discrete_file(&mode, &text) {
                Ok(v) => Ok(v),
                Err(e) => Err(e),
            }
        }
    };
    match result {
        Ok((body, summary)) => {
            if let Some(path) = out {
                if let Err(e) = fs::write(path, &body) {
                    return input_error(&format!("cannot write {}: {e}", path.display()));
                }
            } else {
                print!("{body}");
            }
            println!("{summary}");
            EXIT_OK
        }
        Err((code, message)) => {
            eprintln!("error: {message}");
            code
        }
    }
}

fn run_discrete_file(
    mode: &DiscreteMode,
    text: &str,
) -> Result<(String, String), (i32, String)> {
    let g = parse_multimap(text).map_err(|e| {
        let code = match e {
            fpf_chroma::error::DiscreteError::Loop(_) => EXIT_FAIL,
            _ => EXIT_INPUT,
        };
        (code, e.to_string())
    })?;
    let (coloring, bound_label) = match mode {
        DiscreteMode::Single => {
            let mut f: BTreeMap<u64, u64> = BTreeMap::new();
            for v in g.vertices() {
                let img = g.image(v).unwrap();
                if img.len() != 1 {
                    return Err((
                        EXIT_INPUT,
                        format!("vertex {v} has {} images; single mode needs 1", img.len()),
                    ));
                }
                f.insert(v, *img.iter().next().unwrap());
            }
            let coloring = discrete_color_single(&f)
                .map_err(|e| (EXIT_FAIL, e.to_string()))?;
            (coloring, "3".to_string())
        }
        DiscreteMode::Multi => {
            let k = g.max_out_degree();
            let coloring = discrete_color_multi(&g)
                .map_err(|e| (EXIT_FAIL, e.to_string()))?;
            (coloring, format!("{}", 2 * k + 1))
        }
        DiscreteMode::Doubling(_) => unreachable!(),
    };
    let used = coloring.values().copied().collect::<std::collections::BTreeSet<_>>();
    let mut body = String::new();
    for (v, c) in &coloring {
        body.push_str(&format!("{v} {c}\n"));
    }
    let summary = format!("{} colors used (bound {bound_label})", used.len());
    Ok((body, summary))
}

fn input_error(message: &str) -> i32 {
    eprintln!("error: {message}");
    EXIT_INPUT
}

pub fn cmd_plot(config_path: &Path, certificate: &Path, out: &Path) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let _ = cfg;
    let text = match fs::read_to_string(certificate) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", certificate.display());
            return EXIT_INPUT;
        }
    };
    let file: ColoringFile = match serde_json::from_str(&text) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: certificate JSON: {e}");
            return EXIT_INPUT;
        }
    };
    let complex = match file.complex() {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: certificate cells: {e}");
            return EXIT_INPUT;
        }
    };
    match svg::render(&complex, &file.coloring()) {
        Ok(svg_text) => {
            if let Err(e) = write_file(out, svg_text.as_bytes()) {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
            println!("wrote {}", out.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
