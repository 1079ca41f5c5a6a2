mod common {
    pub mod ast_gen;
}

use common::ast_gen::random_expr;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scalebridge::dsl::{format_expr, parse_expression, parse_relation};
use scalebridge::engine::{builtin_catalog, export_catalog, parse_catalog};

#[test]
fn random_trees_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ca1e);
    let mut deepest = 0;
    for i in 0..10_000 {
        let e = random_expr(&mut rng, 8);
        assert!(e.depth() <= 8);
        deepest = deepest.max(e.depth());
        let text = format_expr(&e);
        let back = parse_expression(&text).unwrap_or_else(|err| panic!("case {i}: {text:?}: {err}"));
        assert_eq!(back, e, "case {i}: {text}");
        assert_eq!(format_expr(&back), text);
    }
    assert_eq!(deepest, 8);
}

#[test]
fn relations_with_annotations_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let lhs = format_expr(&random_expr(&mut rng, 4));
        let rhs = format_expr(&random_expr(&mut rng, 4));
        let line = format!("@name(Q) @paper(Eq. (Z)) @tol(decades=0.25) @let(k={lhs}) {lhs} ~ k*({rhs})");
        let rel = parse_relation(&line).unwrap();
        assert_eq!(parse_relation(&rel.to_string()).unwrap(), rel);
    }
}

#[test]
fn builtin_catalog_re_exports_byte_identically() {
    let text = export_catalog(&builtin_catalog());
    let parsed = parse_catalog(&text).unwrap();
    assert_eq!(parsed.len(), 13);
    assert_eq!(export_catalog(&parsed), text);
}
