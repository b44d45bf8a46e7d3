use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use realdyn_cli::expr::{parse_expr, parse_map, BinOp, Expr, ParseError};
use realdyn_cli::RunConfig;

fn literal() -> impl Strategy<Value = Expr> {
    (0i64..2000, 0u32..4).prop_map(|(n, k)| {
        Expr::Num(BigRational::new(BigInt::from(n), BigInt::from(10i64.pow(k))))
    })
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![literal(), Just(Expr::Var)];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), -2i32..4).prop_map(|(e, k)| Expr::Pow(Box::new(e), k)),
            (
                prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)],
                inner.clone(),
                inner
            )
                .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_identical_ast(e in expr()) {
        let text = e.to_string();
        prop_assert_eq!(parse_expr(&text).unwrap(), e);
    }

    #[test]
    fn fraction_is_canonical(e in expr()) {
        // the printed reduced map denotes the same P/Q
        if let Ok(f) = e.to_map() {
            let g = parse_map(&f.to_string()).unwrap();
            prop_assert_eq!(g, f);
        }
    }

    #[test]
    fn equivalent_texts_agree(a in -9i64..10, b in 1i64..10, k in 1u32..4) {
        let factored = format!("({a}+z)^{k}/({b}*z)");
        let mut expanded = String::new();
        // binomial expansion written term by term
        let mut c: i64 = 1;
        for j in 0..=k {
            if j > 0 {
                c = c * (k - j + 1) as i64 / j as i64;
            }
            let coeff = c * a.pow(k - j);
            expanded.push_str(&format!("+{coeff}*z^{j}").replace("+-", "-"));
        }
        let expanded = format!("({})/({b}*z)", expanded);
        let p = parse_map(&factored);
        let q = parse_map(&expanded);
        match (p, q) {
            (Ok(p), Ok(q)) => prop_assert_eq!(p, q),
            (Err(ParseError::DegreeZero), Err(ParseError::DegreeZero)) => {}
            (p, q) => prop_assert!(false, "{:?} vs {:?}", p, q),
        }
    }

    #[test]
    fn syntax_offsets_in_range(s in "[z0-9+*/^() .-]{0,24}") {
        if let Err(ParseError::Syntax { offset, .. } | ParseError::NonPolynomialExponent { offset }) = parse_expr(&s) {
            prop_assert!(offset <= s.len());
        }
    }

    #[test]
    fn config_text_round_trip(depth in 1usize..64, tol in 1e-6f64..1.0, it in 1usize..1_000_000, th in 1usize..64, seed in any::<u64>()) {
        let c = RunConfig { depth, tolerance: tol, max_iter: it, threads: th, seed };
        prop_assert_eq!(RunConfig::parse(&c.to_string()).unwrap(), c);
    }
}
