use proptest::prelude::*;
use symexpr::Expr;

pub const VARS: [&str; 4] = ["x", "y0", "y1", "y2"];

/// Small random rational expressions over `VARS`.
pub fn rational_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i64..=3).prop_map(Expr::int),
        (0usize..VARS.len()).prop_map(|i| Expr::symbol(VARS[i])),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            // Denominators of the form 1 + d^2 never vanish identically.
            (inner.clone(), inner.clone()).prop_map(|(a, d)| a.try_div(&(Expr::one() + &d * &d)).unwrap()),
            (inner, 0i64..=3).prop_map(|(a, k)| a.pow(k)),
        ]
    })
}

pub fn var_index() -> impl Strategy<Value = usize> {
    0usize..VARS.len()
}
