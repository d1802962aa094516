mod common;

use pathgeom::lagrange::{euler_lagrange, sr_geodesic_ode};
use pathgeom::odeparse::{parse_lagrangian, parse_ode};
use pathgeom::reduction::*;
use symexpr::{Expr, Sampler, ZeroVerdict};

fn y3() -> Expr {
    Expr::symbol("y3")
}

#[test]
fn exp_lagrangian_section_torsion() {
    let s = Sampler::default();
    let data = connection_and_torsion(&common::exp_lagrangian_section(), &s).unwrap();
    let t = &data.torsion;
    assert_eq!(t.t(2), &(Expr::rational(12, 5) * y3()));
    assert_eq!(t.t(3), &Expr::rational(3, 5));
    assert_eq!(t.t(4), &Expr::int(-1));
    for z in [&t.i1, t.t(5), t.t(8)] {
        assert!(z.is_zero_poly());
    }
}

#[test]
fn reduced_section_round_trips() {
    let s = Sampler::default();
    for f in ["0", "3*(y''')^2", "y*y'''"] {
        let b1 = reduce_to_b1(&parse_ode(f).unwrap(), &s).unwrap();
        let again = connection_and_torsion(&b1.coframe, &s).unwrap();
        assert_eq!(again.torsion, b1.data.torsion, "{f}");
        assert!(check_gourst(&b1.coframe, &s));
    }
}

#[test]
fn exp_lagrangian_ladder_values() {
    let s = Sampler::default();
    let b1 = reduce_to_b1(&common::exp_lagrangian(), &s).unwrap();
    let t = b1.torsion();
    assert!(b1.is_variational(&s));
    assert_eq!(s.zero_test(t.t(8)), ZeroVerdict::ProvenZero);
    let signs = s.signs(t.t(4));
    assert_eq!((signs.positive, signs.negative > 0), (0, true));
    let b2 = reduce_to_b2(&b1, &s).unwrap();
    assert_eq!(s.zero_test(&b2.torsion.w[2]), ZeroVerdict::ProvenNonzero);
}

#[test]
fn zero_rhs_is_variational_and_degenerate() {
    let s = Sampler::default();
    let el = euler_lagrange(&parse_lagrangian("(y'')^2/2").unwrap(), &s).unwrap();
    assert!(el.rhs.is_zero_poly());
    let b1 = reduce_to_b1(&el.ode(), &s).unwrap();
    assert!(b1.is_variational(&s));
    assert_eq!(reduce_to_b2(&b1, &s).unwrap_err(), ReductionError::Degenerate);
}

#[test]
fn non_variational_example() {
    let s = Sampler::default();
    let b1 = reduce_to_b1(&parse_ode("y*y'''").unwrap(), &s).unwrap();
    assert!(!b1.is_variational(&s));
    assert_eq!(reduce_to_b2(&b1, &s).unwrap_err(), ReductionError::NotVariational);
}

#[test]
fn heisenberg_passes_both_gates() {
    let s = Sampler::default();
    let ode = sr_geodesic_ode(&common::flat(), &s).unwrap();
    assert_eq!(ode, common::heisenberg());
    let b2 = reduce_to_b2(&reduce_to_b1(&ode, &s).unwrap(), &s).unwrap();
    let tw = &b2.torsion;
    assert_eq!(s.zero_test(&tw.w[2]), ZeroVerdict::ProvenZero);
    assert_eq!(
        s.zero_test(&tw.g[1].sub_ref(&tw.w[0].scale(2, 1))),
        ZeroVerdict::ProvenZero
    );
    assert_eq!(s.zero_test(&tw.g[3]), ZeroVerdict::ProvenZero);
    assert_eq!(s.zero_test(&tw.g[2].sub_ref(&tw.w[1])), ZeroVerdict::ProvenZero);
}

#[test]
fn normalized_section_shape() {
    let s = Sampler::default();
    let b2 = reduce_to_b2(&reduce_to_b1(&common::exp_lagrangian(), &s).unwrap(), &s).unwrap();
    let c = &b2.data.connection;
    let t = &b2.data.torsion;
    assert!(t.t(2).is_zero_poly());
    assert_eq!(t.t(4), &Expr::int(-1));
    // β - 2α = W0θ0 + W1θ1 + W2θ2 and γ = Hσ - 3ΣGiθi.
    for k in 0..5 {
        let bma = c.beta[k].sub_ref(&c.alpha[k].scale(2, 1));
        let want = match k {
            1..=3 => b2.torsion.w[k - 1].clone(),
            _ => Expr::zero(),
        };
        assert_eq!(bma, want);
        let g = if k == 0 {
            b2.torsion.h.clone()
        } else {
            b2.torsion.g[k - 1].scale(-3, 1)
        };
        assert_eq!(c.gamma[k], g);
    }
}

#[test]
fn scaling_weights_table() {
    assert_eq!(SCALING_WEIGHTS.frame, [1, 2, 1, 0, -1]);
    assert_eq!(SCALING_WEIGHTS.w, [-2, -1, 0]);
    assert_eq!(SCALING_WEIGHTS.h, -2);
    assert_eq!(SCALING_WEIGHTS.g, [-3, -2, -1, 0]);
}

#[test]
fn identities_on_examples_and_corpus() {
    let mut odes = vec![
        common::exp_lagrangian(),
        common::heisenberg(),
        parse_ode("y*y'''").unwrap(),
    ];
    odes.extend(common::el_corpus());
    for ode in odes {
        for c in common::identity_suite(&ode) {
            assert_ne!(c.holds, Some(false), "{} on {}: {}", c.label, ode.rhs, c.detail);
        }
    }
}

mod properties {
    use super::common;
    use pathgeom::lagrange::{euler_lagrange, lagrangian_corpus};
    use proptest::prelude::*;
    use symexpr::Sampler;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn identities_hold_on_seeded_lagrangians(seed in 0u64..10_000) {
            let s = Sampler::default();
            for l in lagrangian_corpus(seed, 2, &s) {
                let ode = euler_lagrange(&l, &s).unwrap().ode();
                for c in common::identity_suite(&ode) {
                    prop_assert_ne!(c.holds, Some(false), "{} on {}: {}", c.label, ode.rhs, c.detail);
                }
            }
        }
    }
}
