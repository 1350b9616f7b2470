mod common;

use common::*;
use dif::decimal::Decimal;
use dif::expr::{differentiate, eval_interval, eval_point, parse, IntervalValue, PrecisionContext};
use proptest::prelude::*;

fn ctx(digits: u32) -> PrecisionContext {
    PrecisionContext::new(digits).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_then_parsing_is_identity(e in any_expr()) {
        let printed = e.to_string();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(&back, &e, "printed as {}", printed);
        let json = serde_json::to_string(&e).unwrap();
        prop_assert_eq!(serde_json::from_str::<dif::expr::Expr>(&json).unwrap(), e);
    }

    #[test]
    fn point_values_lie_in_enclosures(
        e in any_expr(),
        lo in decimal_in(0.2, 1.8, 3),
        w in decimal_in(0.0, 0.3, 3),
        t in 0u32..=100,
    ) {
        let hi = &lo + &w;
        let x = &lo + &(&w * &Decimal::new(t.into(), -2));
        let bx = IntervalValue::new(lo, hi).unwrap();
        if let (Ok(v), Ok(enc)) = (eval_point(&e, "x", &x, ctx(12)), eval_interval(&e, "x", &bx, ctx(12))) {
            prop_assert!(enc.contains(&v), "{} at {}: {} not in {}", e, x, v, enc);
        }
    }

    #[test]
    fn enclosures_grow_with_the_box(
        e in any_expr(),
        lo in decimal_in(0.2, 1.5, 3),
        w in decimal_in(0.0, 0.2, 3),
        grow_lo in decimal_in(0.0, 0.1, 3),
        grow_hi in decimal_in(0.0, 0.1, 3),
    ) {
        let inner = IntervalValue::new(lo.clone(), &lo + &w).unwrap();
        let outer = IntervalValue::new(&inner.lo - &grow_lo, &inner.hi + &grow_hi).unwrap();
        if let (Ok(a), Ok(b)) = (eval_interval(&e, "x", &inner, ctx(12)), eval_interval(&e, "x", &outer, ctx(12))) {
            let slack_lo = b.lo.abs().ulp(12);
            let slack_hi = b.hi.abs().ulp(12);
            prop_assert!(a.lo >= &b.lo - &slack_lo && a.hi <= &b.hi + &slack_hi, "{}: {} vs {}", e, a, b);
        }
    }

    #[test]
    fn derivatives_match_central_differences(e in smooth_expr(), x in decimal_in(0.25, 1.75, 4)) {
        let de = differentiate(&e, "x").unwrap();
        let c = ctx(30);
        let h = Decimal::pow10(-6);
        let fd = match (eval_point(&e, "x", &(&x + &h), c), eval_point(&e, "x", &(&x - &h), c)) {
            (Ok(a), Ok(b)) => (&a - &b).to_f64() / 2e-6,
            _ => return Ok(()),
        };
        let exact = eval_point(&de, "x", &x, c).unwrap().to_f64();
        prop_assume!(exact.abs() < 1e4);
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{} at {}: fd {} vs {} ({})", e, x, fd, exact, de);
    }

    #[test]
    fn raising_digits_keeps_leading_digits(e in positive_expr(), x in decimal_in(0.5, 2.0, 3), p in 6u32..16) {
        let lo = eval_point(&e, "x", &x, ctx(p)).unwrap();
        let hi = eval_point(&e, "x", &x, ctx(p + 10)).unwrap();
        let gap = (&lo - &hi).abs();
        let allowed = &hi.abs() * &Decimal::pow10(2 - p as i64);
        prop_assert!(gap <= allowed, "{} at {}: {} vs {}", e, x, lo, hi);
    }
}

#[test]
fn derivative_of_dirichlet_operand() {
    let g = parse("ln(2)^3/2^s + ln(3)^3/3^s").unwrap();
    let expected = parse("-ln(2)^4/2^s - ln(3)^4/3^s").unwrap();
    let dg = differentiate(&g, "s").unwrap();
    for s in ["0", "0.25", "0.5", "1"] {
        let a = eval_point(&dg, "s", &d(s), ctx(20)).unwrap();
        let b = eval_point(&expected, "s", &d(s), ctx(20)).unwrap();
        assert!((&a - &b).abs() < d("1e-17"), "at {s}: {a} vs {b}");
    }
}

#[test]
fn entropy_derivative_against_finite_difference() {
    let g1 = parse(ENTROPY_G1).unwrap();
    let dg = differentiate(&g1, "x").unwrap();
    let c = ctx(30);
    let h = d("0.000001");
    let x = d("0.01");
    let fd = (&eval_point(&g1, "x", &(&x + &h), c).unwrap() - &eval_point(&g1, "x", &(&x - &h), c).unwrap()).to_f64() / 2e-6;
    let exact = eval_point(&dg, "x", &x, c).unwrap().to_f64();
    assert!(((fd - exact) / exact).abs() <= 1e-6, "{fd} vs {exact}");
}

#[test]
fn f64_oracle_agrees_with_decimal_evaluation() {
    for src in [ENTROPY_G1, ENTROPY_G2, "ln(3)^3/3^x + ln(4)^3/4^x", "sin(pi*x)*exp(-x)"] {
        let e = parse(src).unwrap();
        for x in ["0", "0.01", "0.023", "0.04"] {
            let a = eval_point(&e, "x", &d(x), ctx(20)).unwrap().to_f64();
            let b = eval_f64(&e, x.parse().unwrap());
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{src} at {x}: {a} vs {b}");
        }
    }
}
