//! Property tests for the alpha DSL: render/parse round-trips and
//! evaluation laws over randomly generated ASTs.

use alphaforge::dsl::{eval_alpha, parse_alpha, render_alpha, AlphaExpr};
use alphaforge::panel::CrossSection;
use alphaforge::signals::CANONICAL;
use proptest::prelude::*;

fn arb_expr() -> impl Strategy<Value = AlphaExpr> {
    let leaf = prop_oneof![
        // non-negative finite literals; negative values are Neg(Const)
        (0u32..10_000u32, 0u32..100u32)
            .prop_map(|(a, b)| AlphaExpr::Const(a as f64 + b as f64 / 100.0)),
        proptest::sample::select(CANONICAL.to_vec())
            .prop_map(|id| AlphaExpr::Signal(id.to_string())),
    ];
    leaf.prop_recursive(6, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(l, r)| AlphaExpr::Add(Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone())
                .prop_map(|(l, r)| AlphaExpr::Sub(Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone())
                .prop_map(|(l, r)| AlphaExpr::Mul(Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone())
                .prop_map(|(l, r)| AlphaExpr::Div(Box::new(l), Box::new(r))),
            inner.clone().prop_map(|e| AlphaExpr::Neg(Box::new(e))),
            inner.prop_map(|e| AlphaExpr::Log(Box::new(e))),
        ]
    })
}

proptest! {
    #[test]
    fn parse_render_round_trip(expr in arb_expr()) {
        let text = render_alpha(&expr);
        let reparsed = parse_alpha(&text)
            .unwrap_or_else(|e| panic!("{text:?} failed to parse: {e}"));
        prop_assert_eq!(reparsed, expr);
    }

    #[test]
    fn eval_is_scale_correct(expr in arb_expr(), c in 1u32..50u32) {
        let c = c as f64;
        let scaled = AlphaExpr::Mul(Box::new(AlphaExpr::Const(c)), Box::new(expr.clone()));
        let lookup = |id: &str| {
            let idx = CANONICAL.iter().position(|s| *s == id)? as f64;
            Some(1.5 + idx * 0.37)
        };
        match (expr.eval_with(&lookup), scaled.eval_with(&lookup)) {
            (Some(base), Some(s)) => {
                let expected = c * base;
                if expected.is_finite() {
                    prop_assert!((s - expected).abs() <= 1e-9 * expected.abs().max(1.0));
                }
            }
            // scaling can only push values out of range, never rescue them
            (None, s) => prop_assert!(s.is_none() || c == 0.0),
            (Some(base), None) => prop_assert!(!(c * base).is_finite()),
        }
    }

    #[test]
    fn eval_never_returns_non_finite(expr in arb_expr(), a in -5.0f64..5.0, b in 0.01f64..10.0) {
        let lookup = |id: &str| {
            let idx = CANONICAL.iter().position(|s| *s == id)? as f64;
            Some(a + b * (idx - 4.0))
        };
        if let Some(v) = expr.eval_with(&lookup) {
            prop_assert!(v.is_finite());
        }
    }
}

#[test]
fn eval_alpha_over_cross_section_matches_elementwise() {
    use chrono::NaiveDate;
    use ndarray::{array, Array1};
    let cs = CrossSection::from_columns(
        NaiveDate::from_ymd_opt(2016, 3, 31).unwrap(),
        vec!["AAA".into(), "BBB".into(), "CCC".into()],
        vec!["ROE".into(), "PE".into()],
        array![[10.0, 5.0], [8.0, 4.0], [6.0, 0.0]],
        Array1::from_vec(vec![0.01, 0.02, 0.03]),
    )
    .unwrap();
    let expr = parse_alpha("ROE / PE").unwrap();
    let values = eval_alpha(&expr, &cs).unwrap();
    assert_eq!(values, vec![Some(2.0), Some(2.0), None]);

    let unknown = parse_alpha("GM + ROE").unwrap();
    assert!(eval_alpha(&unknown, &cs).is_err());
}
