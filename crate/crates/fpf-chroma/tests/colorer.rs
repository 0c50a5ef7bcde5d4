//! End-to-end tests of the coloring operations against the independent
//! verifier.

use std::collections::BTreeSet;

use fpf_chroma::colorer::{
    self, bound, color_multimap, color_single_valued, greedy_conflict_coloring,
    inflate_color, product_coloring, split_argmax_coloring, stratified_coloring,
    ColorParams, Coloring, ProvStep,
};
use fpf_chroma::error::ColorError;
use fpf_chroma::expr::parse;
use fpf_chroma::geometry::{CellId, DomainComplex};
use fpf_chroma::interval::Interval;
use fpf_chroma::multimap::{CertifyOutcome, FpfCertificate, MultiMapSpec, Tolerances};
use fpf_chroma::verifier::verify_coloring;

fn map_1d(sources: &[&str]) -> MultiMapSpec {
    let branches = sources.iter().map(|s| vec![parse(s).unwrap()]).collect();
    MultiMapSpec::new(1, branches, Tolerances::default()).unwrap()
}

fn map_2d(sources: &[(&str, &str)]) -> MultiMapSpec {
    let branches = sources
        .iter()
        .map(|(a, b)| vec![parse(a).unwrap(), parse(b).unwrap()])
        .collect();
    MultiMapSpec::new(2, branches, Tolerances::default()).unwrap()
}

fn certify(m: &MultiMapSpec, x: &mut DomainComplex) -> FpfCertificate {
    match m.certify_fixed_point_free(x, 8).unwrap() {
        CertifyOutcome::Certified(c) => c,
        other => panic!("expected certificate, got {other:?}"),
    }
}

fn assert_bright(m: &MultiMapSpec, x: &DomainComplex, c: &Coloring, min_margin: f64) {
    let report = verify_coloring(m, x, c, min_margin, 0).unwrap();
    assert!(
        report.is_bright(),
        "verifier rejected: {:?} uncovered={:?}",
        report
            .classes
            .iter()
            .filter(|c| !c.ok())
            .collect::<Vec<_>>(),
        report.uncovered
    );
}

#[test]
fn single_valued_translation_block_structure() {
    let m = map_1d(&["x0+1"]);
    let mut x = DomainComplex::build(&[vec![(0.0, 12.0)]], 0.1).unwrap();
    let cert = certify(&m, &mut x);
    let coloring = color_single_valued(&m, &x, &cert, ColorParams::default()).unwrap();
    assert_eq!(coloring.class_count(), 3, "expected the 3-block structure");
    assert_bright(&m, &x, &coloring, 1e-6);
    let report = verify_coloring(&m, &x, &coloring, 1e-6, 0).unwrap();
    assert!(report.min_class_margin >= 0.15, "{}", report.min_class_margin);
    // Count within the base bound m + 3.
    assert!(coloring.class_count() as u128 <= bound(1, 1).unwrap());
}

#[test]
fn single_valued_image_leaves_domain() {
    let m = map_1d(&["x0+5"]);
    let mut x = DomainComplex::build(&[vec![(0.0, 1.0)]], 0.25).unwrap();
    let cert = certify(&m, &mut x);
    let coloring = color_single_valued(&m, &x, &cert, ColorParams::default()).unwrap();
    assert_eq!(coloring.class_count(), 1);
    assert!((coloring.classes[0].margin - 4.0).abs() < 1e-9);
    assert_bright(&m, &x, &coloring, 1.0);
}

/// Axis-aligned cells covering the annulus 1 <= |p| <= 2. Grid lines are
/// computed from integer indices so adjacent cells share endpoints
/// exactly.
fn annulus_complex(h: f64) -> DomainComplex {
    let mut boxes = Vec::new();
    let steps = (4.0 / h).round() as i64;
    for i in 0..steps {
        for j in 0..steps {
            let lo = [i as f64 * h - 2.0, j as f64 * h - 2.0];
            let hi = [(i + 1) as f64 * h - 2.0, (j + 1) as f64 * h - 2.0];
            // Keep cells whose closest and farthest corners straddle the
            // annulus shell.
            let near = lo[0].abs().min(hi[0].abs()).hypot(lo[1].abs().min(hi[1].abs()));
            let near = if lo[0] <= 0.0 && hi[0] >= 0.0 {
                lo[1].abs().min(hi[1].abs())
            } else if lo[1] <= 0.0 && hi[1] >= 0.0 {
                lo[0].abs().min(hi[0].abs())
            } else {
                near
            };
            let far = lo[0].abs().max(hi[0].abs()).hypot(lo[1].abs().max(hi[1].abs()));
            if far >= 1.0 && near <= 2.0 && near >= 0.9 {
                boxes.push(vec![
                    Interval::new(lo[0], hi[0]),
                    Interval::new(lo[1], hi[1]),
                ]);
            }
        }
    }
    DomainComplex::from_cells(2, boxes).unwrap()
}

#[test]
fn rotation_on_annulus() {
    // Quarter turn about the origin.
    let m = map_2d(&[("-x1", "x0")]);
    let mut x = annulus_complex(0.1);
    let cert = certify(&m, &mut x);
    assert!(cert.margin > 1.0, "rotation displacement {}", cert.margin);

    let coloring = color_single_valued(&m, &x, &cert, ColorParams::default()).unwrap();
    assert_bright(&m, &x, &coloring, 1e-6);

    // The greedy baseline stays within the m + 3 = 5 bound.
    let mut x2 = annulus_complex(0.1);
    let params = ColorParams { fpf_margin: cert.margin, ..ColorParams::default() };
    let greedy = greedy_conflict_coloring(&m, &mut x2, params).unwrap();
    assert_bright(&m, &x2, &greedy, 1e-6);
    assert!(
        greedy.class_count() as u128 <= bound(2, 1).unwrap(),
        "greedy used {} classes",
        greedy.class_count()
    );
}

#[test]
fn greedy_translation_coarse_grid() {
    let m = map_1d(&["x0+1"]);
    let mut x = DomainComplex::build(&[vec![(0.0, 12.0)]], 0.5).unwrap();
    let cert = certify(&m, &mut x);
    let params = ColorParams::default().with_certificate(&cert);
    let coloring = greedy_conflict_coloring(&m, &mut x, params).unwrap();
    assert_bright(&m, &x, &coloring, 1e-6);
    // Regression value: descending-degree greedy settles at 3 classes on
    // this conflict graph; the documented ceiling is 4.
    assert!(coloring.class_count() <= 4, "{}", coloring.class_count());
}

#[test]
fn greedy_fails_on_fixed_point() {
    let m = map_1d(&["x0*x0"]);
    let mut x = DomainComplex::build(&[vec![(0.0, 2.0)]], 0.5).unwrap();
    let err = greedy_conflict_coloring(&m, &mut x, ColorParams::default()).unwrap_err();
    assert!(matches!(err, ColorError::ColoringFailed { .. }), "{err:?}");
}

#[test]
fn split_argmax_two_translations() {
    let m = map_1d(&["x0+1", "x0+2"]);
    let mut x = DomainComplex::build(&[vec![(0.0, 4.0)]], 0.25).unwrap();
    let cert = certify(&m, &mut x);
    let region: BTreeSet<CellId> = x.ids().collect();
    let params = ColorParams::default().with_certificate(&cert);
    let coloring = split_argmax_coloring(&m, &x, &region, 0, params).unwrap();
    assert!(coloring.class_count() <= 9, "{}", coloring.class_count());
    assert_bright(&m, &x, &coloring, 1e-6);
    assert!(coloring.min_margin() > 0.0);
}

#[test]
fn split_argmax_rejects_full_tie() {
    // Both branches share the first coordinate everywhere: M = n on axis 0.
    let m = map_2d(&[("x0+1", "x1"), ("x0+1", "x1+2")]);
    let x = DomainComplex::build(&[vec![(0.0, 1.0), (0.0, 1.0)]], 0.5).unwrap();
    let region: BTreeSet<CellId> = x.ids().collect();
    let err = split_argmax_coloring(&m, &x, &region, 0, ColorParams::default()).unwrap_err();
    assert!(matches!(err, ColorError::StrataViolation(_)), "{err:?}");
}

/// Four branches in the plane with piecewise-constant second coordinates:
/// on [0,1] two branches share the top first coordinate (M = 2), on [3,4]
/// three do (M = 3).
fn two_strata_map() -> MultiMapSpec {
    map_2d(&[
        ("x0+2", "0"),
        ("x0+2", "1"),
        ("min(x0+2, x0+1+2*max(x0-2, 0))", "2"),
        ("x0+1", "3"),
    ])
}

fn two_strata_complex() -> DomainComplex {
    DomainComplex::build(
        &[
            vec![(0.0, 1.0), (0.0, 1.0)],
            vec![(3.0, 4.0), (0.0, 1.0)],
        ],
        0.25,
    )
    .unwrap()
}

#[test]
fn stratified_two_multiplicity_regions() {
    let m = two_strata_map();
    let mut x = two_strata_complex();
    let cert = certify(&m, &mut x);
    let region: BTreeSet<CellId> = x.ids().collect();
    let params = ColorParams::default().with_certificate(&cert);
    let coloring = stratified_coloring(&m, &x, &region, 0, params).unwrap();
    assert_bright(&m, &x, &coloring, 1e-6);
    // Two strata show up in the tags.
    assert!(coloring.has_provenance(ProvStep::Stratum { level: 1 }));
    assert!(coloring.has_provenance(ProvStep::Stratum { level: 2 }));
    assert!(coloring.class_count() as u128 <= bound(2, 4).unwrap());
}

#[test]
fn stratified_empty_region_is_empty() {
    let m = two_strata_map();
    let x = two_strata_complex();
    let coloring =
        stratified_coloring(&m, &x, &BTreeSet::new(), 0, ColorParams::default()).unwrap();
    assert_eq!(coloring.class_count(), 0);
}

#[test]
fn stratified_matches_split_on_constant_stratum() {
    // On a region where M is constant, one pass of the stratified
    // iteration is exactly the argmax split.
    let m = map_1d(&["x0+1", "x0+2"]);
    let mut x = DomainComplex::build(&[vec![(0.0, 4.0)]], 0.25).unwrap();
    let cert = certify(&m, &mut x);
    let region: BTreeSet<CellId> = x.ids().collect();
    let params = ColorParams::default().with_certificate(&cert);
    let strat = stratified_coloring(&m, &x, &region, 0, params).unwrap();
    let split = split_argmax_coloring(&m, &x, &region, 0, params).unwrap();
    let cells = |c: &Coloring| -> Vec<BTreeSet<CellId>> {
        c.classes.iter().map(|cl| cl.cells.clone()).collect()
    };
    assert_eq!(cells(&strat), cells(&split));
}

#[test]
fn color_multimap_two_translations() {
    let m = map_1d(&["x0+1", "x0+2"]);
    let mut x = DomainComplex::build(&[vec![(0.0, 12.0)]], 0.1).unwrap();
    let cert = certify(&m, &mut x);
    let (coloring, report) =
        color_multimap(&m, &mut x, &cert, ColorParams::default()).unwrap();
    assert_bright(&m, &x, &coloring, 1e-3);
    assert_eq!(report.bound, Some(52));
    assert!(report.within_bound.unwrap());
    assert!(coloring.class_count() <= 9, "{}", coloring.class_count());
}

#[test]
fn color_multimap_collision_stratum() {
    // On [0, 2] the branch 3-x0 fixes x = 1.5; the window stops short of
    // it and keeps the branch crossing at x = 1 inside.
    let m = map_1d(&["x0+1", "3-x0"]);
    let mut x = DomainComplex::build(&[vec![(0.0, 1.2)]], 0.1).unwrap();
    let cert = certify(&m, &mut x);
    let (coloring, report) =
        color_multimap(&m, &mut x, &cert, ColorParams::default()).unwrap();
    assert_bright(&m, &x, &coloring, 1e-6);
    assert!(report.collision_cells > 0);
    assert!(coloring.has_provenance(ProvStep::LStratum));
    assert!(report.within_bound.unwrap());
}

#[test]
fn color_multimap_single_branch_delegates() {
    let m = map_1d(&["x0+1"]);
    let mut x = DomainComplex::build(&[vec![(0.0, 12.0)]], 0.1).unwrap();
    let cert = certify(&m, &mut x);
    let (coloring, _) = color_multimap(&m, &mut x, &cert, ColorParams::default()).unwrap();
    let direct = color_single_valued(&m, &x, &cert, ColorParams::default()).unwrap();
    assert_eq!(coloring.class_count(), direct.class_count());
    assert!(coloring.has_provenance(ProvStep::SingleValued));
}

#[test]
fn color_multimap_2d_shift_pair() {
    let m = map_2d(&[("x0+1", "x1"), ("x0", "x1+1")]);
    let mut x = DomainComplex::build(&[vec![(0.0, 8.0), (0.0, 8.0)]], 0.25).unwrap();
    let cert = certify(&m, &mut x);
    let (coloring, report) =
        color_multimap(&m, &mut x, &cert, ColorParams::default()).unwrap();
    assert_bright(&m, &x, &coloring, 1e-6);
    assert_eq!(report.bound, Some(80));
    assert!(report.within_bound.unwrap());
}

#[test]
fn product_coloring_examples() {
    // Construct bright colorings of g, h over the same complex and check
    // the product against f = g union h.
    let g = map_1d(&["x0+2"]);
    let h = map_1d(&["x0+1"]);
    let f = map_1d(&["x0+2", "x0+1"]);
    let mut x = DomainComplex::build(&[vec![(0.0, 8.0)]], 0.25).unwrap();
    let cert_g = certify(&g, &mut x);
    let cg = color_single_valued(&g, &x, &cert_g, ColorParams::default()).unwrap();
    let mut x2 = DomainComplex::build(&[vec![(0.0, 8.0)]], 0.25).unwrap();
    let cert_h = certify(&h, &mut x2);
    let ch = color_single_valued(&h, &x2, &cert_h, ColorParams::default()).unwrap();
    let product = product_coloring(&cg, &ch).unwrap();
    assert!(product.class_count() <= cg.class_count() * ch.class_count());
    assert_bright(&f, &x, &product, 1e-6);
}

#[test]
fn inflate_examples() {
    let m = map_1d(&["x0+1"]);
    let mut x = DomainComplex::build(&[vec![(0.0, 12.0)]], 0.025).unwrap();
    let cert = certify(&m, &mut x);
    let coloring = color_single_valued(&m, &x, &cert, ColorParams::default()).unwrap();
    let class = &coloring.classes[0];

    // Identity at eps = 0.
    let (same, report) =
        inflate_color(&m, &x, class, 0.0, ColorParams::default()).unwrap();
    assert_eq!(same.cells, class.cells);
    assert_eq!(report.accepted_eps, None);

    // A small eps grows the class and stays bright.
    let (grown, report) =
        inflate_color(&m, &x, class, 0.05, ColorParams::default()).unwrap();
    assert!(report.accepted_eps.is_some());
    assert!(grown.cells.len() > class.cells.len());
    assert!(grown.margin >= 1e-6);
    let mut check = coloring.clone();
    check.classes[0] = grown;
    assert_bright(&m, &x, &check, 1e-6);

    // An eps beyond the margin backs off or leaves the class unchanged.
    let (huge, report) =
        inflate_color(&m, &x, class, 10.0, ColorParams::default()).unwrap();
    match report.accepted_eps {
        Some(e) => assert!(e < 10.0),
        None => assert_eq!(huge.cells, class.cells),
    }
}

#[test]
fn decreasing_branch_fixed_point_is_caught() {
    // The same two branches on the wider window [0, 2] contain the fixed
    // point of 3-x0 at x = 1.5, and certification must say so.
    let m = map_1d(&["x0+1", "3-x0"]);
    let mut x = DomainComplex::build(&[vec![(0.0, 2.0)]], 0.1).unwrap();
    match m.certify_fixed_point_free(&mut x, 8).unwrap() {
        CertifyOutcome::Counterexample(report) => {
            assert!(report
                .witnesses
                .iter()
                .any(|w| (w.point[0] - 1.5).abs() <= 1e-9));
        }
        other => panic!("expected counterexample, got {other:?}"),
    }
}

#[test]
fn fixed_point_never_yields_verified_coloring() {
    // Contrapositive tripwire: a map with fixed points cannot reach a
    // verified coloring through any pipeline path.
    let m = map_1d(&["x0*x0"]);
    let mut x = DomainComplex::build(&[vec![(0.0, 2.0)]], 0.25).unwrap();
    match m.certify_fixed_point_free(&mut x, 6).unwrap() {
        CertifyOutcome::Counterexample(_) => {}
        other => panic!("expected counterexample, got {other:?}"),
    }
    let mut x2 = DomainComplex::build(&[vec![(0.0, 2.0)]], 0.25).unwrap();
    assert!(greedy_conflict_coloring(&m, &mut x2, ColorParams::default()).is_err());
}

#[test]
fn bound_table_shape() {
    assert_eq!(bound(5, 1).unwrap(), 8);
    assert_eq!(bound(1, 2).unwrap(), 52);
    for m in 1..=6u32 {
        let mut prev = 0u128;
        for n in 1..=3u32 {
            let v = colorer::bound(m, n).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }
}
