mod common;

use std::sync::Arc;

use pathgeom::forms::{ext_d, pairs, reduce_mod, wedge, Coframe, FrameTwoForm, OneForm, PfaffianIdeal, TwoForm};
use pathgeom::odeparse::parse_ode;
use pathgeom::reduction::{check_gourst, ode_chart, zero_adapted_coframe, SIGMA, THETA};
use proptest::prelude::*;
use symexpr::{Chart, Expr, Sampler};

fn d(i: usize) -> OneForm {
    OneForm::coordinate(&ode_chart(), i)
}

fn y(k: usize) -> Expr {
    Expr::symbol(&format!("y{k}"))
}

#[test]
fn wedge_examples() {
    let s = Sampler::default();
    assert!(wedge(&d(0), &d(0)).unwrap().is_zero(&s));
    let a = wedge(&d(0), &d(2)).unwrap();
    let b = wedge(&d(2), &d(0)).unwrap();
    assert!((&a + &b).is_zero(&s));
    let lhs = wedge(&-&d(0), &(&d(2) - &d(0).scale(&y(2)))).unwrap();
    assert!((&lhs + &a).is_zero(&s));
    let other = Arc::new(Chart::base());
    assert!(wedge(&d(0), &OneForm::coordinate(&other, 0)).is_err());
}

#[test]
fn ext_d_examples() {
    let s = Sampler::default();
    let th0 = &d(1) - &d(0).scale(&y(1));
    assert!((&ext_d(&th0) - &wedge(&d(0), &d(2)).unwrap()).is_zero(&s));
    assert!(ext_d(&d(0)).is_zero(&s));
    let w = d(3).scale(&y(3));
    assert!((&ext_d(&w) - &wedge(&d(4), &d(3)).unwrap()).is_zero(&s));
}

#[test]
fn express_examples() {
    let s = Sampler::default();
    let cf = zero_adapted_coframe(&parse_ode("0").unwrap(), &s).unwrap();
    let d0 = cf.structure(THETA[0]);
    for (a, b) in pairs(5) {
        let want = if (a, b) == (SIGMA, THETA[1]) {
            -Expr::one()
        } else {
            Expr::zero()
        };
        assert_eq!(d0.get(a, b), want, "pair {a}{b}");
    }
    // F = 0: dθ3 = d(dy3) = 0.
    let d3 = cf.structure(THETA[3]);
    assert!(d3.coeffs().iter().all(Expr::is_zero_poly));
    let zero = cf.express(&TwoForm::zero(&ode_chart())).unwrap();
    assert!(zero.coeffs().iter().all(Expr::is_zero_poly));
}

#[test]
fn dtheta3_matches_direct_expansion() {
    let s = Sampler::default();
    let ode = parse_ode("3*(y''')^2").unwrap();
    let cf = zero_adapted_coframe(&ode, &s).unwrap();
    // θ3 = dy3 - 3y3² dx, so dθ3 = -6y3 dy3∧dx = 6y3 θ3∧σ (σ = -dx).
    let d3 = cf.structure(THETA[3]);
    for (a, b) in pairs(5) {
        let want = if (a, b) == (SIGMA, THETA[3]) {
            Expr::int(-6) * y(3)
        } else {
            Expr::zero()
        };
        assert_eq!(d3.get(a, b), want, "pair {a}{b}");
    }
}

#[test]
fn reduce_mod_examples() {
    let s = Sampler::default();
    let cf = zero_adapted_coframe(&parse_ode("y*y'''").unwrap(), &s).unwrap();
    let f = |k| cf.form(k).clone();
    let ideal = PfaffianIdeal::from_coframe(&cf, &[THETA[0]]);
    let w = wedge(&f(1), &f(2)).unwrap();
    assert!(reduce_mod(&w, &ideal, &cf, &s).unwrap().is_zero(&s));
    let st3 = wedge(&f(0), &f(4)).unwrap();
    let w = &st3 + &wedge(&f(1), &f(3)).unwrap();
    let r = reduce_mod(&w, &ideal, &cf, &s).unwrap();
    assert!((&r - &st3).is_zero(&s));
    // Idempotent.
    let again = reduce_mod(&r, &ideal, &cf, &s).unwrap();
    assert!((&again - &r).is_zero(&s));
    let dependent = PfaffianIdeal::new(vec![f(1), f(1).scale(&y(2))]);
    assert!(reduce_mod(&w, &dependent, &cf, &s).is_err());
}

#[test]
fn reduce_mod_on_exp_lagrangian_section() {
    let s = Sampler::default();
    let cf = common::exp_lagrangian_section();
    let ideal = PfaffianIdeal::from_coframe(&cf, &[THETA[0], THETA[1]]);
    let r = reduce_mod(&ext_d(cf.form(THETA[1])), &ideal, &cf, &s).unwrap();
    let c = cf.express(&r).unwrap();
    for (a, b) in pairs(5) {
        let want = if (a, b) == (SIGMA, THETA[2]) {
            Expr::one()
        } else {
            Expr::zero()
        };
        assert!(
            s.zero_test(&c.get(a, b).sub_ref(&want)).is_zero(),
            "pair {a}{b}: {}",
            c.get(a, b)
        );
    }
}

#[test]
fn gourst_examples() {
    let s = Sampler::default();
    for f in ["0", "3*(y''')^2", "3*y''*(y''')^2/(1+(y'')^2)", "x*y*y'''"] {
        assert!(
            check_gourst(&zero_adapted_coframe(&parse_ode(f).unwrap(), &s).unwrap(), &s),
            "{f}"
        );
    }
    let cf = zero_adapted_coframe(&parse_ode("0").unwrap(), &s).unwrap();
    let mut forms = cf.forms().to_vec();
    forms.swap(2, 3);
    assert!(!check_gourst(&Coframe::new(forms, &s).unwrap(), &s));
    assert!(check_gourst(&common::exp_lagrangian_section(), &s));
}

#[test]
fn zero_adapted_coframe_examples() {
    let s = Sampler::default();
    let cases = [
        ("3*(y''')^2", Expr::int(3) * y(3).pow(2)),
        ("0", Expr::zero()),
        ("3*y''*(y''')^2/(1+(y'')^2)", common::heisenberg().rhs),
    ];
    for (text, rhs) in cases {
        let cf = zero_adapted_coframe(&parse_ode(text).unwrap(), &s).unwrap();
        let th3 = cf.form(THETA[3]);
        assert_eq!(
            th3.coeffs(),
            &[rhs.neg_ref(), Expr::zero(), Expr::zero(), Expr::zero(), Expr::one()]
        );
        assert_eq!(cf.form(SIGMA).coeffs()[0], -Expr::one());
    }
}

fn coeff() -> impl Strategy<Value = Expr> {
    let atom = prop_oneof![
        (-3i64..=3).prop_map(Expr::int),
        Just(Expr::symbol("x")),
        (0usize..4).prop_map(y),
    ];
    (atom.clone(), atom.clone(), atom).prop_map(|(a, b, c)| (&a * &b + c).try_div(&(Expr::one() + &a * &a)).unwrap())
}

fn one_form() -> impl Strategy<Value = OneForm> {
    proptest::collection::vec(coeff(), 5).prop_map(|c| OneForm::new(&ode_chart(), c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn d_squared_vanishes(f in coeff()) {
        let s = Sampler::default();
        let df = OneForm::exact(&ode_chart(), &f);
        prop_assert!(ext_d(&df).is_zero(&s));
    }

    #[test]
    fn leibniz(f in coeff(), a in one_form()) {
        let s = Sampler::default();
        let df = OneForm::exact(&ode_chart(), &f);
        let lhs = ext_d(&a.scale(&f));
        let rhs = &wedge(&df, &a).unwrap() + &ext_d(&a).scale(&f);
        prop_assert!((&lhs - &rhs).is_zero(&s));
    }

    #[test]
    fn express_then_reconstruct(a in one_form(), b in one_form(), c in one_form()) {
        let s = Sampler::default();
        let cf = zero_adapted_coframe(&common::heisenberg(), &s).unwrap();
        let w = &wedge(&a, &b).unwrap() + &ext_d(&c);
        let back = cf.reconstruct(&cf.express(&w).unwrap());
        prop_assert!((&back - &w).is_zero(&s));
        let comps: Vec<Expr> = (0..10).map(|i| a.coeff(i % 5).clone()).collect();
        let mut fw = FrameTwoForm::zero(5);
        for ((i, j), v) in pairs(5).zip(&comps) {
            fw.add_to(i, j, v);
        }
        let round = cf.express(&cf.reconstruct(&fw)).unwrap();
        for (x, y) in round.coeffs().iter().zip(fw.coeffs()) {
            prop_assert!(s.zero_test(&x.sub_ref(y)).is_zero());
        }
    }
}
