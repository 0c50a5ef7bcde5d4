//! Deterministic SVG rendering of colorings for k <= 2.
//!
//! Classes render in index order with a fixed palette; a cell already
//! drawn by an earlier class gets a hatch overlay in the later class's
//! color, so overlap cells appear once per membership with stable layer
//! order. Output bytes are a pure function of the inputs.

use std::fmt::Write as _;

use fpf_chroma::colorer::Coloring;
use fpf_chroma::geometry::DomainComplex;

const PALETTE: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#2f4b7c", "#a05195",
];

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 20.0;
const STRIP_HEIGHT: f64 = 80.0;

pub fn render(complex: &DomainComplex, coloring: &Coloring) -> Result<String, String> {
    let k = complex.dim();
    if k == 0 || k > 2 {
        return Err(format!("plotting supports k <= 2, domain has k = {k}"));
    }

    // Domain bounding box.
    let mut lo = vec![f64::INFINITY; k];
    let mut hi = vec![f64::NEG_INFINITY; k];
    for cell in complex.cells() {
        for (a, iv) in cell.bounds.iter().enumerate() {
            lo[a] = lo[a].min(iv.lo);
            hi[a] = hi[a].max(iv.hi);
        }
    }
    let span_x = (hi[0] - lo[0]).max(1e-12);
    let scale = (WIDTH - 2.0 * MARGIN) / span_x;
    let height = if k == 2 {
        (hi[1] - lo[1]).max(1e-12) * scale + 2.0 * MARGIN
    } else {
        STRIP_HEIGHT + 2.0 * MARGIN
    };

    let fx = |x: f64| MARGIN + (x - lo[0]) * scale;
    // SVG y grows downward; flip the second axis.
    let fy = |y: f64| {
        if k == 2 {
            height - MARGIN - (y - lo[1]) * scale
        } else {
            MARGIN
        }
    };

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height:.3}" viewBox="0 0 {WIDTH} {height:.3}">"#
    );
    let _ = writeln!(svg, "<defs>");
    for (i, color) in PALETTE.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<pattern id="hatch{i}" width="6" height="6" patternTransform="rotate(45)" patternUnits="userSpaceOnUse"><line x1="0" y1="0" x2="0" y2="6" stroke="{color}" stroke-width="2"/></pattern>"#
        );
    }
    let _ = writeln!(svg, "</defs>");
    let _ = writeln!(
        svg,
        r##"<rect x="0" y="0" width="{WIDTH}" height="{height:.3}" fill="#ffffff"/>"##
    );

    let mut drawn: std::collections::BTreeSet<fpf_chroma::geometry::CellId> =
        std::collections::BTreeSet::new();
    for (ci, class) in coloring.classes.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        let _ = writeln!(svg, r#"<g id="class{ci}">"#);
        for id in &class.cells {
            let cell = complex.cell(*id).map_err(|e| e.to_string())?;
            let x0 = fx(cell.bounds[0].lo);
            let x1 = fx(cell.bounds[0].hi);
            let (y0, y1) = if k == 2 {
                (fy(cell.bounds[1].hi), fy(cell.bounds[1].lo))
            } else {
                (MARGIN, MARGIN + STRIP_HEIGHT)
            };
            let w = (x1 - x0).max(0.2);
            let h = (y1 - y0).max(0.2);
            let fill = if drawn.insert(*id) {
                color.to_string()
            } else {
                format!("url(#hatch{})", ci % PALETTE.len())
            };
            let _ = writeln!(
                svg,
                r##"<rect x="{x0:.3}" y="{y0:.3}" width="{w:.3}" height="{h:.3}" fill="{fill}" stroke="#333333" stroke-width="0.2"/>"##
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpf_chroma::colorer::{ColorClass, ProvStep};
    use fpf_chroma::geometry::CellId;
    use std::collections::BTreeSet;

    #[test]
    fn renders_every_membership_once() {
        let x = DomainComplex::build(&[vec![(0.0, 1.0), (0.0, 1.0)]], 0.5).unwrap();
        let all: BTreeSet<CellId> = x.ids().collect();
        let first: BTreeSet<CellId> = x.ids().take(2).collect();
        let coloring = Coloring {
            classes: vec![
                ColorClass { cells: first, margin: 1.0, provenance: vec![ProvStep::Manual] },
                ColorClass { cells: all, margin: 1.0, provenance: vec![ProvStep::Manual] },
            ],
        };
        let svg = render(&x, &coloring).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert_eq!(svg.matches("<rect").count(), 1 + 2 + 4);
        assert_eq!(svg.matches("url(#hatch1)").count(), 2);
        assert_eq!(svg.matches("</svg>").count(), 1);
        // Deterministic bytes.
        assert_eq!(svg, render(&x, &coloring).unwrap());
    }

    #[test]
    fn rejects_high_dimension() {
        let x = DomainComplex::build(
            &[vec![(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)]],
            1.0,
        )
        .unwrap();
        let coloring = Coloring { classes: vec![] };
        assert!(render(&x, &coloring).is_err());
    }
}
