//! Property tests for the crate's structural invariants.

use proptest::prelude::*;

use fpf_chroma::expr::{BinaryOp, Expr, UnaryOp};
use fpf_chroma::geometry::{
    boxset_separation, euclid, hausdorff_distance, DomainComplex, FiniteSet,
};
use fpf_chroma::interval::Interval;
use fpf_chroma::multimap::{MultiMapSpec, Tolerances};

/// Total expressions only: sqrt is fed absolute values, divisors are
/// bounded away from zero, exp arguments are clamped. Literals are
/// nonnegative so every generated tree is in the parser's image.
fn arb_expr(dim: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.0..3.0f64).prop_map(Expr::Num),
        (0..dim).prop_map(Expr::Var),
    ];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::unary(UnaryOp::Neg, e)),
            inner.clone().prop_map(|e| Expr::unary(UnaryOp::Sin, e)),
            inner.clone().prop_map(|e| Expr::unary(UnaryOp::Cos, e)),
            inner.clone().prop_map(|e| Expr::unary(UnaryOp::Abs, e)),
            inner
                .clone()
                .prop_map(|e| Expr::unary(UnaryOp::Sqrt, Expr::unary(UnaryOp::Abs, e))),
            inner.clone().prop_map(|e| Expr::unary(
                UnaryOp::Exp,
                Expr::binary(BinaryOp::Min, e, Expr::Num(5.0))
            )),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::binary(BinaryOp::Add, a, b)),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::binary(BinaryOp::Sub, a, b)),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::binary(BinaryOp::Mul, a, b)),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::binary(BinaryOp::Min, a, b)),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::binary(BinaryOp::Max, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| {
                let safe = Expr::binary(
                    BinaryOp::Add,
                    Expr::binary(BinaryOp::Mul, b.clone(), b),
                    Expr::Num(1.0),
                );
                Expr::binary(BinaryOp::Div, a, safe)
            }),
        ]
    })
}

fn arb_box(dim: usize) -> impl Strategy<Value = Vec<Interval>> {
    proptest::collection::vec((-3.0..3.0f64, 0.0..2.0f64), dim).prop_map(|axes| {
        axes.into_iter()
            .map(|(lo, w)| Interval::new(lo, lo + w))
            .collect()
    })
}

proptest! {
    /// eval_point lands inside eval_interval for points of the box.
    #[test]
    fn interval_inclusion_soundness(
        e in arb_expr(2),
        b in arb_box(2),
        t0 in 0.0..1.0f64,
        t1 in 0.0..1.0f64,
    ) {
        let p = vec![
            b[0].lo + t0 * b[0].width(),
            b[1].lo + t1 * b[1].width(),
        ];
        let iv = e.eval_interval(&b).unwrap();
        let v = e.eval_point(&p).unwrap();
        prop_assert!(
            iv.contains(v),
            "value {v} outside enclosure {iv:?} for {e}"
        );
    }

    /// Bisecting the box and hulling the child enclosures never widens.
    #[test]
    fn refinement_monotonicity(
        e in arb_expr(2),
        b in arb_box(2),
        axis in 0usize..2,
    ) {
        let parent = e.eval_interval(&b).unwrap();
        let mid = b[axis].midpoint();
        let mut left = b.clone();
        left[axis] = Interval::new(b[axis].lo, mid);
        let mut right = b.clone();
        right[axis] = Interval::new(mid, b[axis].hi);
        let hull = e
            .eval_interval(&left)
            .unwrap()
            .hull(&e.eval_interval(&right).unwrap());
        prop_assert!(
            parent.contains_interval(&hull),
            "children {hull:?} escape parent {parent:?} for {e}"
        );
    }

    /// Printing then parsing reproduces the tree.
    #[test]
    fn parse_print_round_trip(e in arb_expr(3)) {
        let printed = e.to_string();
        let reparsed = fpf_chroma::expr::parse(&printed)
            .unwrap_or_else(|err| panic!("reparse of `{printed}` failed: {err}"));
        prop_assert_eq!(e, reparsed, "print form: {}", printed);
    }

    /// The affine displacement enclosure contains exact displacements.
    #[test]
    fn displacement_soundness(
        e in arb_expr(1),
        b in arb_box(1),
        t in 0.0..1.0f64,
    ) {
        let d = e.displacement(0, &b).unwrap();
        let x = b[0].lo + t * b[0].width();
        let exact = e.eval_point(&[x]).unwrap() - x;
        prop_assert!(
            d.contains(exact),
            "displacement {exact} outside {d:?} for {e}"
        );
    }

    /// Hausdorff distance is a metric on canonical finite sets.
    #[test]
    fn hausdorff_metric_properties(
        pa in proptest::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1..5),
        pb in proptest::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1..5),
        pc in proptest::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1..5),
    ) {
        let set = |pts: Vec<(f64, f64)>| {
            FiniteSet::canonicalize(
                pts.into_iter().map(|(x, y)| vec![x, y]).collect(),
                1e-9,
            )
            .unwrap()
        };
        let (a, b, c) = (set(pa), set(pb), set(pc));
        let dab = hausdorff_distance(&a, &b).unwrap();
        let dba = hausdorff_distance(&b, &a).unwrap();
        prop_assert!((dab - dba).abs() < 1e-12);
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        let dac = hausdorff_distance(&a, &c).unwrap();
        let dbc = hausdorff_distance(&b, &c).unwrap();
        prop_assert!(dac <= dab + dbc + 1e-12);
    }

    /// boxset_separation lower-bounds the distance between contained points.
    #[test]
    fn separation_soundness(
        s in proptest::collection::vec(arb_box(2), 1..4),
        t in proptest::collection::vec(arb_box(2), 1..4),
        si in 0usize..4,
        ti in 0usize..4,
        u0 in 0.0..1.0f64, u1 in 0.0..1.0f64,
        v0 in 0.0..1.0f64, v1 in 0.0..1.0f64,
    ) {
        let sep = boxset_separation(&s, &t).unwrap();
        let sb = &s[si % s.len()];
        let tb = &t[ti % t.len()];
        let p = vec![sb[0].lo + u0 * sb[0].width(), sb[1].lo + u1 * sb[1].width()];
        let q = vec![tb[0].lo + v0 * tb[0].width(), tb[1].lo + v1 * tb[1].width()];
        prop_assert!(euclid(&p, &q) >= sep - 1e-12);
    }

    /// Point images stay inside the per-branch cell enclosures.
    #[test]
    fn evaluate_inside_enclose(
        e1 in arb_expr(1),
        e2 in arb_expr(1),
        t in 0.0..1.0f64,
    ) {
        let m = MultiMapSpec::new(1, vec![vec![e1], vec![e2]], Tolerances::default())
            .unwrap();
        let x = DomainComplex::build(&[vec![(-2.0, 2.0)]], 1.0).unwrap();
        for cell in x.cells() {
            let enc = m.enclose(cell).unwrap();
            let p = vec![cell.bounds[0].lo + t * cell.bounds[0].width()];
            for (j, bx) in enc.boxes.iter().enumerate() {
                let y = m.branch_point(j, &p).unwrap();
                prop_assert!(
                    bx[0].contains(y[0]),
                    "branch {j} value {} escapes {:?}",
                    y[0],
                    bx[0]
                );
            }
        }
    }
}

#[test]
fn random_discrete_multimaps_within_bound() {
    use fpf_chroma::discrete::{
        discrete_color_multi, validate_multi_coloring, FiniteMultiMap,
    };
    use rand::{Rng, SeedableRng};
    use std::collections::{BTreeMap, BTreeSet};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for k in [1usize, 2, 3, 5] {
        for _ in 0..40 {
            let n = rng.gen_range(2..200u64);
            let mut images: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
            for v in 0..n {
                let count = rng.gen_range(1..=k);
                let mut img = BTreeSet::new();
                while img.len() < count {
                    let w = rng.gen_range(0..n);
                    if w != v {
                        img.insert(w);
                    }
                }
                images.insert(v, img);
            }
            let g = FiniteMultiMap::new(images).unwrap();
            let coloring = discrete_color_multi(&g).unwrap();
            assert!(validate_multi_coloring(&g, &coloring));
            let used: BTreeSet<usize> = coloring.values().copied().collect();
            assert!(used.len() <= 2 * k + 1, "k={k}: {} colors", used.len());
        }
    }
}

#[test]
fn random_functional_graphs_three_colors() {
    use fpf_chroma::discrete::{discrete_color_single, validate_single_coloring};
    use rand::{Rng, SeedableRng};
    use std::collections::{BTreeMap, BTreeSet};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let n = rng.gen_range(2..300u64);
        let mut f: BTreeMap<u64, u64> = BTreeMap::new();
        for v in 0..n {
            let mut w = rng.gen_range(0..n);
            while w == v {
                w = rng.gen_range(0..n);
            }
            f.insert(v, w);
        }
        let coloring = discrete_color_single(&f).unwrap();
        assert!(validate_single_coloring(&f, &coloring));
        let used: BTreeSet<usize> = coloring.values().copied().collect();
        assert!(used.len() <= 3, "{} colors", used.len());
    }
}
