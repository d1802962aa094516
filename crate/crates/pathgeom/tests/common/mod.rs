#![allow(dead_code)]

use pathgeom::forms::{Coframe, OneForm};
use pathgeom::lagrange::{euler_lagrange, lagrangian_corpus};
use pathgeom::odeparse::{parse_metric, parse_ode, MetricInput, OdeInput};
use pathgeom::reduction::ode_chart;
use symexpr::{Expr, Sampler};

pub const CORPUS_SEED: u64 = 7;

/// Metrics with rational geodesic equations.
pub const METRICS: [&str; 5] = [
    "E=1,F=0,G=1",
    "E=1,F=0,G=(1+x^2)^2",
    "E=(1+z^2)^2,F=0,G=1",
    "E=1,F=2*z,G=z^2+1",
    "E=1+x^2,F=0,G=1",
];

pub fn metric(text: &str) -> MetricInput {
    parse_metric(text, &Sampler::default(), false).unwrap().0
}

pub fn flat() -> MetricInput {
    metric(METRICS[0])
}

pub fn exp_lagrangian() -> OdeInput {
    parse_ode("3*(y''')^2").unwrap()
}

pub fn heisenberg() -> OdeInput {
    parse_ode("3*y''*(y''')^2/(1+(y'')^2)").unwrap()
}

/// Five seeded Euler-Lagrange equations.
pub fn el_corpus() -> Vec<OdeInput> {
    let s = Sampler::default();
    lagrangian_corpus(CORPUS_SEED, 5, &s)
        .iter()
        .map(|l| euler_lagrange(l, &s).unwrap().ode())
        .collect()
}

fn q(n: i64, d: i64) -> Expr {
    Expr::rational(n, d)
}

/// The explicit section for `y'''' = 3(y''')^2`, built from coordinates.
pub fn exp_lagrangian_section() -> Coframe {
    let chart = ode_chart();
    let d = |i: usize| OneForm::coordinate(&chart, i);
    let y = |k: usize| Expr::symbol(&format!("y{k}"));
    let y3 = y(3);
    let th0 = &d(1) - &d(0).scale(&y(1));
    let th1 = &d(2) - &d(0).scale(&y(2));
    let th2 = &(&(&d(3) - &d(0).scale(&y3)) - &th1.scale(&y3)) + &th0.scale(&(q(3, 10) * y3.pow(2)));
    let th3 = &(&(&d(4) - &d(3).scale(&(Expr::int(3) * &y3))) - &th1.scale(&(q(3, 10) * y3.pow(2))))
        + &th0.scale(&(q(6, 5) * y3.pow(3)));
    let sigma = &(&d(0) + &th1) - &th0.scale(&(q(3, 5) * &y3));
    Coframe::new(vec![sigma, th0, th1, th2, th3], &Sampler::default()).unwrap()
}

use pathgeom::classify::canonical_section;
use pathgeom::reduction::{
    b2_from_coframe, connection_and_torsion, dw1_residual, reassemble, reduce_to_b1, reduce_to_b2, scale_coframe,
    structure, B1Data, SCALING_WEIGHTS,
};
use symexpr::ZeroVerdict;

/// Outcome of one identity on one ODE; `None` when its hypothesis fails.
#[derive(Debug)]
pub struct IdentityCheck {
    pub label: &'static str,
    pub holds: Option<bool>,
    pub detail: String,
}

fn proven_zero(s: &Sampler, e: &Expr) -> bool {
    s.zero_test(e) == ZeroVerdict::ProvenZero
}

/// Reassembled structure equations against `d` of the coframe, all ProvenZero.
pub fn structure_holds(cf: &Coframe, data: &B1Data, s: &Sampler) -> Result<(), String> {
    let rhs = reassemble(&data.connection, &data.torsion);
    for (a, (lhs, r)) in structure(cf).iter().zip(&rhs).enumerate() {
        for (p, (x, y)) in lhs.coeffs().iter().zip(r.coeffs()).enumerate() {
            let res = x.sub_ref(y);
            if !proven_zero(s, &res) {
                return Err(format!("equation {a}, pair {p}: {res}"));
            }
        }
    }
    Ok(())
}

/// Identities (a)-(f) on one ODE.
pub fn identity_suite(ode: &OdeInput) -> Vec<IdentityCheck> {
    let s = Sampler::default();
    let mut out = Vec::new();
    let mut push = |label, holds: Option<bool>, detail: String| out.push(IdentityCheck { label, holds, detail });
    let b1 = reduce_to_b1(ode, &s).expect("B1 section");
    let t = b1.torsion().clone();
    // (a) on the B1 section, refined equations included.
    let mut a = structure_holds(&b1.coframe, &b1.data, &s);
    if a.is_ok() {
        if let Some((k, r)) = b1.refined.as_ref().and_then(|r| r.residuals.first()) {
            a = Err(format!("{k}: {r}"));
        }
    }
    let variational = proven_zero(&s, &t.i1) && proven_zero(&s, t.t(5));
    // (b), (c)
    if variational {
        push("(b) I1=T5=0 => T8=0", Some(proven_zero(&s, t.t(8))), t.t(8).to_string());
        let c = t.t(3).add_ref(&t.t(4).scale(3, 5));
        push("(c) T3 + 3/5 T4 = 0", Some(proven_zero(&s, &c)), c.to_string());
    } else {
        push("(b) I1=T5=0 => T8=0", None, "not variational".into());
        push("(c) T3 + 3/5 T4 = 0", None, "not variational".into());
    }
    let definite = variational && !proven_zero(&s, t.t(4)) && {
        let c = s.signs(t.t(4));
        c.positive == 0 && c.negative > 0
    };
    let b2 = if definite {
        Some(reduce_to_b2(&b1, &s).expect("B2 section"))
    } else {
        None
    };
    if let (Some(b2), Ok(())) = (&b2, &a) {
        a = structure_holds(&b2.coframe, &b2.data, &s);
    }
    push("(a) structure equations", Some(a.is_ok()), a.err().unwrap_or_default());
    let Some(b2) = b2 else {
        for label in ["(d) W2=0 => G3=0, G2=W1", "(e) dW1 expansion", "(f) scaling g_2"] {
            push(label, None, "not definite".into());
        }
        return out;
    };
    let tw = &b2.torsion;
    let metric = proven_zero(&s, &tw.w[2]);
    if metric {
        let d = proven_zero(&s, &tw.g[3]) && proven_zero(&s, &tw.g[2].sub_ref(&tw.w[1]));
        push(
            "(d) W2=0 => G3=0, G2=W1",
            Some(d),
            format!("G3 = {}, G2 - W1 = {}", tw.g[3], tw.g[2].sub_ref(&tw.w[1])),
        );
        let covariant = dw1_residual(&b2).iter().all(|r| proven_zero(&s, r));
        // Literal form on the canonical section.
        let literal = match canonical_section(&b2, &s) {
            Ok(c) if c.potential.is_some() => {
                let k = &c.section;
                let dw1 = k.coframe.derivatives(&k.torsion.w[1]);
                proven_zero(&s, &dw1[0].sub_ref(&k.torsion.g[1].sub_ref(&k.torsion.w[0])))
                    && proven_zero(&s, &dw1[3])
                    && proven_zero(&s, &dw1[4].sub_ref(&Expr::rational(1, 5)))
            }
            Ok(_) => true,
            Err(_) => false,
        };
        push(
            "(e) dW1 expansion",
            Some(covariant && literal),
            format!("covariant {covariant}, canonical {literal}"),
        );
    } else {
        push("(d) W2=0 => G3=0, G2=W1", None, "W2 nonzero".into());
        push("(e) dW1 expansion", None, "W2 nonzero".into());
    }
    // (f) g_λ with λ = 2.
    let lambda = Expr::int(2);
    let scaled = scale_coframe(&b2.coframe, &lambda, &s).and_then(|cf| b2_from_coframe(cf, &s));
    let f = match scaled {
        Err(e) => Err(format!("{e}")),
        Ok(sc) => {
            let w = SCALING_WEIGHTS;
            let pow = |k: i32| lambda.try_pow(k as i64).unwrap();
            let mut bad = Vec::new();
            let mut check = |name: String, new: &Expr, old: &Expr, k: i32| {
                if !proven_zero(&s, &new.sub_ref(&old.mul_ref(&pow(k)))) {
                    bad.push(name);
                }
            };
            for i in 0..3 {
                check(format!("W{i}"), &sc.torsion.w[i], &tw.w[i], w.w[i]);
            }
            check("H".into(), &sc.torsion.h, &tw.h, w.h);
            for i in 0..4 {
                check(format!("G{i}"), &sc.torsion.g[i], &tw.g[i], w.g[i]);
            }
            let pred = |t: &pathgeom::reduction::B2Torsion| {
                (
                    proven_zero(&s, &t.w[2]),
                    proven_zero(&s, &t.g[1].sub_ref(&t.w[0].scale(2, 1))),
                )
            };
            if pred(&sc.torsion) != pred(tw) {
                bad.push("predicates".into());
            }
            if let Err(e) = connection_and_torsion(&sc.coframe, &s) {
                bad.push(format!("structure: {e}"));
            }
            if bad.is_empty() {
                Ok(())
            } else {
                Err(bad.join(", "))
            }
        }
    };
    push("(f) scaling g_2", Some(f.is_ok()), f.err().unwrap_or_default());
    out
}
