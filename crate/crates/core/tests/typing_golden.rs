use pql_core::syntax::{parse_term, parse_type};
use pql_core::typecheck::{check_term, infer_term, Context, TypeError};

fn ty(s: &str) -> pql_core::syntax::TypeExpr {
    parse_type(s).unwrap()
}

const EXP: &str = "let <b, v_c> = meas v_c in if b then <init_tt *, free v_c> else <v_c, *>";

#[test]
fn exp_has_type_qubit_tensor_unit() {
    let ctx = Context::new().with("v_c", ty("qubit"));
    let d = check_term(&ctx, &parse_term(EXP).unwrap(), &ty("qubit * I")).unwrap();
    assert_eq!(d.ty, ty("qubit * I"));
    let inferred = infer_term(&ctx, &parse_term(EXP).unwrap()).unwrap();
    assert_eq!(inferred.ty, ty("qubit * I"));
}

#[test]
fn macro_types() {
    let c = Context::new();
    check_term(&c, &parse_term("meas").unwrap(), &ty("!(qubit -o bool * qubit)")).unwrap();
    check_term(&c, &parse_term("free").unwrap(), &ty("!(qubit -o I)")).unwrap();
    check_term(&c, &parse_term("init_tt *").unwrap(), &ty("qubit")).unwrap();
    let e = check_term(&c, &parse_term("init_tt *").unwrap(), &ty("!qubit")).unwrap_err();
    assert!(matches!(e, TypeError::NonValuePromotion(_)), "{e}");
    assert_eq!(infer_term(&c, &parse_term("init_tt *").unwrap()).unwrap().ty, ty("qubit"));
}

#[test]
fn linear_variable_used_twice_is_rejected() {
    let ctx = Context::new().with("q", ty("qubit"));
    let e = check_term(&ctx, &parse_term("<q, q>").unwrap(), &ty("qubit * qubit")).unwrap_err();
    assert_eq!(e, TypeError::LinearityError { var: "q".into(), uses: 2 });
    let e = check_term(&ctx, &parse_term("*").unwrap(), &ty("I")).unwrap_err();
    assert_eq!(e, TypeError::LinearityError { var: "q".into(), uses: 0 });
}
