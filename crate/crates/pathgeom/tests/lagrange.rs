mod common;

use pathgeom::classify::{classify, Verdict};
use pathgeom::lagrange::*;
use pathgeom::odeparse::{parse_lagrangian, parse_metric, parse_ode, LagrangianInput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symexpr::{Expr, Sampler, Var};

fn y(k: usize) -> Expr {
    Expr::symbol(&format!("y{k}"))
}

#[test]
fn examples() {
    let s = Sampler::default();
    let el = euler_lagrange(&parse_lagrangian("exp(-3*y'')").unwrap(), &s).unwrap();
    assert_eq!(el.rhs, Expr::int(3) * y(3).pow(2));
    let el = euler_lagrange(&parse_lagrangian("(y'')^2/2").unwrap(), &s).unwrap();
    assert!(el.rhs.is_zero_poly());
    let el = euler_lagrange(&parse_lagrangian("sqrt(1+(y'')^2)").unwrap(), &s).unwrap();
    assert_eq!(el.ode(), common::heisenberg());
    assert_eq!(
        euler_lagrange(&parse_lagrangian("y'*y'' + x*y").unwrap(), &s),
        Err(LagrangeError::Degenerate)
    );
}

#[test]
fn multiplier_resubstitution() {
    let s = Sampler::default();
    for text in ["exp(-3*y'')", "sqrt(1+(y'')^2)", "(y'')^2 + (y'')^3 - 2*y^2*y''"] {
        let el = euler_lagrange(&parse_lagrangian(text).unwrap(), &s).unwrap();
        let back = el.expression.subs_one(Var::symbol("y4"), &el.rhs);
        assert!(s.zero_test(&back).is_zero(), "{text}");
    }
}

#[test]
fn length_lagrangian_examples() {
    let s = Sampler::default();
    let flat = length_lagrangian(&common::flat());
    assert_eq!(flat.lagrangian, (Expr::one() + y(2).pow(2)).sqrt());
    let four = length_lagrangian(&common::metric("E=4,F=0,G=4"));
    assert!(s
        .zero_test(&four.lagrangian.sub_ref(&flat.lagrangian.scale(2, 1)))
        .is_zero());
    let m = common::metric("E=1,F=2*z,G=z^2+1");
    let l = length_lagrangian(&m).lagrangian;
    let r = l.mul_ref(&l);
    let c = s.signs(&r);
    assert_eq!((c.negative, c.zero), (0, 0));
}

#[test]
fn sr_ode_examples() {
    let s = Sampler::default();
    assert_eq!(sr_geodesic_ode(&common::flat(), &s).unwrap(), common::heisenberg());
    assert_eq!(
        sr_geodesic_ode(&common::metric("E=4,F=0,G=4"), &s).unwrap(),
        common::heisenberg()
    );
}

#[test]
fn random_metrics_in_x_are_sub_riemannian() {
    let s = Sampler::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        // Sums of squares plus a positive constant, in x only.
        let poly = |rng: &mut ChaCha8Rng| {
            let a: i64 = rng.gen_range(-2..=2);
            let b: i64 = rng.gen_range(-2..=2);
            let b = b.abs() + 1;
            format!("{b}+({a}*x+1)^2")
        };
        let (e, g) = (poly(&mut rng), poly(&mut rng));
        let text = format!("E={e},F=0,G={g}");
        let (m, _) = parse_metric(&text, &s, false).unwrap();
        let ode = sr_geodesic_ode(&m, &s).unwrap();
        assert!(ode.rhs.is_rational());
        let report = classify(&ode, &s, false).unwrap();
        assert_eq!(report.verdict, Some(Verdict::SubRiemannian), "{text}");
    }
}

#[test]
fn constant_multiples_share_equations() {
    let s = Sampler::default();
    for l in lagrangian_corpus(3, 4, &s) {
        let base = euler_lagrange(&l, &s).unwrap();
        for c in [Expr::rational(1, 3), Expr::int(5)] {
            let scaled = LagrangianInput {
                lagrangian: l.lagrangian.mul_ref(&c),
            };
            assert_eq!(euler_lagrange(&scaled, &s).unwrap().rhs, base.rhs);
        }
    }
}

#[test]
fn corpus_passes_variational_gate() {
    let s = Sampler::default();
    for ode in common::el_corpus() {
        let report = classify(&ode, &s, false).unwrap();
        assert_ne!(report.verdict, Some(Verdict::NotVariational));
        for name in ["I1", "T5", "T8"] {
            assert!(
                report.invariants.get(name).unwrap().value.is_zero_poly(),
                "{name} on {}",
                ode.rhs
            );
        }
    }
}

/// `L_y - (L_y')' + (L_y'')''` along `y = p(x)`, differentiating in `x`
/// after substitution.
fn el_along_curve(l: &Expr, curve: &Expr) -> Expr {
    let x = Var::symbol("x");
    let jets: Vec<Expr> = (0..5)
        .scan(curve.clone(), |c, _| {
            let out = c.clone();
            *c = c.diff(x);
            Some(out)
        })
        .collect();
    let on_curve = |e: &Expr| -> Expr {
        let map: Vec<(Var, Expr)> = (0..5)
            .map(|k| (Var::symbol(&format!("y{k}")), jets[k].clone()))
            .collect();
        e.subs(&map)
    };
    let partial = |k: usize| on_curve(&l.diff(Var::symbol(&format!("y{k}"))));
    partial(0)
        .sub_ref(&partial(1).diff(x))
        .add_ref(&partial(2).diff(x).diff(x))
}

#[test]
fn el_matches_curves() {
    let s = Sampler::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut lagrangians: Vec<Expr> = lagrangian_corpus(9, 4, &s).into_iter().map(|l| l.lagrangian).collect();
    lagrangians.push(parse_lagrangian("exp(-3*y'')").unwrap().lagrangian);
    lagrangians.push(parse_lagrangian("sqrt(1+(y'')^2)").unwrap().lagrangian);
    let x = Expr::symbol("x");
    for l in &lagrangians {
        let el = euler_lagrange(&LagrangianInput { lagrangian: l.clone() }, &s).unwrap();
        for _ in 0..10 {
            let curve: Expr = (0..=6)
                .map(|k| Expr::rational(rng.gen_range(-4..=4), rng.gen_range(1..=4)) * x.pow(k))
                .sum();
            let direct = el_along_curve(l, &curve);
            let mut jets = vec![(Var::symbol("x"), Expr::symbol("x"))];
            let mut c = curve.clone();
            for k in 0..5 {
                jets.push((Var::symbol(&format!("y{k}")), c.clone()));
                c = c.diff(Var::symbol("x"));
            }
            let symbolic = el.expression.subs(&jets[1..]);
            for t in [-0.7, 0.3, 1.1] {
                let at = |e: &Expr| e.eval(&|v: Var| (v == Var::symbol("x")).then_some(t)).unwrap();
                let (a, b) = (at(&direct), at(&symbolic));
                assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{l}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn degenerate_rhs_parses_back() {
    // The printed equation is accepted by the ODE parser.
    let s = Sampler::default();
    let el = euler_lagrange(&parse_lagrangian("exp(-3*y'')").unwrap(), &s).unwrap();
    let printed = pathgeom::odeparse::render_primes(&el.rhs);
    assert_eq!(parse_ode(&printed).unwrap().rhs, el.rhs);
}
