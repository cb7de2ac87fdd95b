mod common;

use common::*;
use jetsym::expr::FuncKind;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_normal_forms_parse_back(e in any_expr()) {
        check_round_trip(&e)?;
    }

    #[test]
    fn normalize_is_idempotent(e in any_expr()) {
        check_idempotent(&e)?;
    }

    #[test]
    fn normalize_preserves_values(e in any_expr(), p in sample_point()) {
        check_homomorphism(&e, &p)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn total_derivative_matches_differences(e in smooth_expr(), x in -1.5f64..1.5, y in -1.5f64..1.5, t in 0.1f64..1.0) {
        check_total_derivative(&e, x, y, t)?;
    }

    #[test]
    fn jacobi_identity_ricci(a in prop::collection::vec(-3.0f64..3.0, 4), b in prop::collection::vec(-3.0f64..3.0, 4), c in prop::collection::vec(-3.0f64..3.0, 4)) {
        check_jacobi(&algebra("ricci"), &a, &b, &c)?;
    }

    #[test]
    fn jacobi_identity_convdiff(a in prop::collection::vec(-3.0f64..3.0, 4), b in prop::collection::vec(-3.0f64..3.0, 4), c in prop::collection::vec(-3.0f64..3.0, 4)) {
        check_jacobi(&algebra("convdiff"), &a, &b, &c)?;
    }

    #[test]
    fn adjoint_preserves_brackets(model in prop::sample::select(vec!["ricci", "convdiff"]), i in 0usize..4, eps in -2.0f64..2.0,
                                  x in prop::collection::vec(-3.0f64..3.0, 4), y in prop::collection::vec(-3.0f64..3.0, 4)) {
        check_adjoint_bracket(&algebra(model), i, eps, &x, &y)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn reductions_round_trip(k in 0usize..ROUND_TRIPS.len(), values in round_trip_values()) {
        check_reduction_round_trip(&ROUND_TRIPS[k], &values)?;
    }
}

#[test]
fn every_function_round_trips() {
    for k in FuncKind::ALL {
        let e = jetsym::expr::Expr::apply(k, jetsym::expr::Expr::sym("x") + jetsym::expr::Expr::int(2));
        check_round_trip(&e).unwrap();
    }
}
