//! Fourth-order ODEs from second-order Lagrangians and from metrics.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symexpr::{Expr, Sampler, Var};
use thiserror::Error;

use crate::odeparse::{LagrangianInput, MetricInput, OdeInput};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LagrangeError {
    #[error("degenerate Lagrangian: the coefficient of y'''' vanishes identically")]
    Degenerate,
    #[error("Euler-Lagrange expression is not linear in y''''")]
    NotLinear,
    #[error("unsupported metric: geodesic equation is not rational ({0})")]
    UnsupportedMetric(String),
}

/// Jet coordinates `x, y0, ..., y4`.
pub fn jet_vars() -> [Var; 6] {
    ["x", "y0", "y1", "y2", "y3", "y4"].map(Var::symbol)
}

/// `D = ∂x + y1 ∂y0 + y2 ∂y1 + y3 ∂y2 + y4 ∂y3`.
pub fn total_derivative(e: &Expr) -> Expr {
    let v = jet_vars();
    let mut out = e.diff(v[0]);
    for k in 1..5 {
        let d = e.diff(v[k]);
        if !d.is_zero_poly() {
            out = out.add_ref(&Expr::var(v[k + 1]).mul_ref(&d));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElResult {
    /// `F` in `y'''' = F`.
    pub rhs: Expr,
    /// Coefficient of `y''''` in the Euler-Lagrange expression.
    pub multiplier: Expr,
    /// `L_y - D L_y' + D² L_y''`.
    pub expression: Expr,
}

impl ElResult {
    pub fn ode(&self) -> OdeInput {
        OdeInput { rhs: self.rhs.clone() }
    }
}

pub fn euler_lagrange(l: &LagrangianInput, sampler: &Sampler) -> Result<ElResult, LagrangeError> {
    let v = jet_vars();
    let lag = &l.lagrangian;
    let el = lag
        .diff(v[1])
        .sub_ref(&total_derivative(&lag.diff(v[2])))
        .add_ref(&total_derivative(&total_derivative(&lag.diff(v[3]))));
    let a = el.diff(v[5]);
    if sampler.zero_test(&a).is_zero() {
        return Err(LagrangeError::Degenerate);
    }
    if !sampler.zero_test(&a.diff(v[5])).is_zero() {
        return Err(LagrangeError::NotLinear);
    }
    let b = el.subs_one(v[5], &Expr::zero());
    let rhs = b.neg_ref().try_div(&a).map_err(|_| LagrangeError::Degenerate)?;
    Ok(ElResult {
        rhs,
        multiplier: a,
        expression: el,
    })
}

/// Metric components as functions on the jet chart under `y = y0`, `z = y1`.
pub fn metric_on_jets(m: &MetricInput) -> [Expr; 3] {
    let map = [
        (Var::symbol("y"), Expr::symbol("y0")),
        (Var::symbol("z"), Expr::symbol("y1")),
    ];
    [m.e.subs(&map), m.f.subs(&map), m.g.subs(&map)]
}

/// `sqrt(E + F y'' + G y''^2)`.
pub fn length_lagrangian(m: &MetricInput) -> LagrangianInput {
    let [e, f, g] = metric_on_jets(m);
    let y2 = Expr::symbol("y2");
    let radicand = &e + &(&f * &y2) + &g * &y2 * &y2;
    LagrangianInput {
        lagrangian: radicand.sqrt(),
    }
}

/// The geodesic ODE of a metric, transverse to the fibres.
pub fn sr_geodesic_ode(m: &MetricInput, sampler: &Sampler) -> Result<OdeInput, LagrangeError> {
    let el = euler_lagrange(&length_lagrangian(m), sampler)?;
    if !el.rhs.is_rational() {
        return Err(LagrangeError::UnsupportedMetric(el.rhs.to_string()));
    }
    Ok(el.ode())
}

/// Seeded Lagrangians: up to three monomials of degree ≤ 3 in
/// `x, y, y', y''` with small integer coefficients, plus `λ y''^2`.
/// Every other member also gets a `±y''^3` term, without which the
/// geometry is almost always degenerate.
pub fn lagrangian_corpus(seed: u64, count: usize, sampler: &Sampler) -> Vec<LagrangianInput> {
    let vars = ["x", "y0", "y1", "y2"].map(Expr::symbol);
    let mut monomials = Vec::new();
    for a in 0..=3 {
        for b in 0..=3 - a {
            for c in 0..=3 - a - b {
                for d in 0..=3 - a - b - c {
                    if a + b + c + d == 0 {
                        continue;
                    }
                    let m = vars[0].pow(a) * vars[1].pow(b) * vars[2].pow(c) * vars[3].pow(d);
                    monomials.push(m);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = rng.gen_range(1..=3);
        let lambda = Expr::int(rng.gen_range(1..=2));
        let mut l = lambda * &vars[3] * &vars[3];
        for m in monomials.choose_multiple(&mut rng, k) {
            let mut c = rng.gen_range(-3..=2);
            if c >= 0 {
                c += 1;
            }
            l = l + Expr::int(c) * m;
        }
        if out.len() % 2 == 1 {
            let c = if rng.gen_bool(0.5) { 1 } else { -1 };
            l = l + Expr::int(c) * vars[3].pow(3);
        }
        let input = LagrangianInput { lagrangian: l };
        if euler_lagrange(&input, sampler).is_ok() {
            out.push(input);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odeparse::{parse_lagrangian, parse_ode};

    #[test]
    fn example_lagrangians() {
        let s = Sampler::default();
        let el = euler_lagrange(&parse_lagrangian("exp(-3*y'')").unwrap(), &s).unwrap();
        assert_eq!(el.rhs, parse_ode("3*(y''')^2").unwrap().rhs);
        let el = euler_lagrange(&parse_lagrangian("(y'')^2/2").unwrap(), &s).unwrap();
        assert!(el.rhs.is_zero_poly());
        let el = euler_lagrange(&parse_lagrangian("sqrt(1+(y'')^2)").unwrap(), &s).unwrap();
        assert_eq!(el.rhs, parse_ode("3*y''*(y''')^2/(1+(y'')^2)").unwrap().rhs);
    }

    #[test]
    fn degenerate_lagrangian() {
        let s = Sampler::default();
        let l = parse_lagrangian("y''*y' + x").unwrap();
        assert_eq!(euler_lagrange(&l, &s), Err(LagrangeError::Degenerate));
    }
}
