//! Orthonormal coframe and connection of a metric on the contact planes of
//! `dy - z dx`, the explicit normalized section on the bundle with the
//! frame angle and multiplier, and numeric integration of geodesics.
//!
//! The lifted chart is `(x, y, z, u, xm)`: `u` is the stereographic frame
//! angle, `cos ψ = (1-u²)/(1+u²)`, `sin ψ = 2u/(1+u²)`, and `xm` the
//! multiplier.

#![allow(clippy::needless_range_loop)]

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use symexpr::{solve_relations, Chart, Expr, Sampler, SolveError, Var};
use thiserror::Error;

use crate::forms::{ext_d, Coframe, FormsError, FrameTwoForm, OneForm};
use crate::odeparse::{check_definite, MetricInput};
use crate::reduction::ReductionError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesicError {
    #[error("metric is not positive definite: {0}")]
    NotDefinite(String),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error("linear solve failed: {0}")]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("internal consistency failure in {identity}: residual {residual}")]
    Internal { identity: String, residual: String },
    #[error("frame must live on the lifted chart")]
    NotLifted,
    #[error("step size underflow at s = {0}")]
    StepUnderflow(f64),
    #[error("trajectory left the domain of the metric at s = {0}")]
    LeftChart(f64),
    #[error("invalid step control: {0}")]
    InvalidControl(String),
}

pub fn base_chart() -> Arc<Chart> {
    static CELL: OnceLock<Arc<Chart>> = OnceLock::new();
    CELL.get_or_init(|| Arc::new(Chart::base())).clone()
}

pub fn lifted_chart() -> Arc<Chart> {
    static CELL: OnceLock<Arc<Chart>> = OnceLock::new();
    CELL.get_or_init(|| Arc::new(Chart::griffiths())).clone()
}

fn internal(identity: &str, residual: &Expr) -> GeodesicError {
    GeodesicError::Internal {
        identity: identity.into(),
        residual: residual.to_string(),
    }
}

fn require_zero(identity: &str, e: &Expr, sampler: &Sampler) -> Result<(), GeodesicError> {
    if sampler.zero_test(e).is_zero() {
        Ok(())
    } else {
        Err(internal(identity, e))
    }
}

/// Orthonormal coframe `ω¹, ω²`, normalized contact form `ω³`,
/// connection `φ`, torsion `a1, a2` and curvature `K`.
///
/// On the base chart `coframe` is `(ω¹, ω², ω³)`; on the lifted chart it is
/// `(ω¹, ω², ω³, φ, dxm)`.
#[derive(Clone, Debug)]
pub struct SrFrame {
    pub coframe: Coframe,
    pub phi: OneForm,
    pub a1: Expr,
    pub a2: Expr,
    pub k: Expr,
}

impl SrFrame {
    pub fn omega(&self, i: usize) -> &OneForm {
        self.coframe.form(i - 1)
    }

    pub fn is_lifted(&self) -> bool {
        self.coframe.len() == 5
    }

    /// Nonzero residuals of the four structure equations.
    pub fn structure_residuals(&self, sampler: &Sampler) -> Vec<(String, Expr)> {
        let cf = &self.coframe;
        let n = cf.len();
        let e = |k: usize| -> Vec<Expr> {
            (0..n)
                .map(|i| if i == k { Expr::one() } else { Expr::zero() })
                .collect()
        };
        let phi = cf.components(&self.phi);
        let w = FrameTwoForm::wedge;
        let mut a = e(0).iter().map(|x| x.mul_ref(&self.a1)).collect::<Vec<_>>();
        for (x, y) in a.iter_mut().zip(e(1)) {
            *x = x.add_ref(&y.mul_ref(&self.a2));
        }
        let mut b = e(0).iter().map(|x| x.mul_ref(&self.a2)).collect::<Vec<_>>();
        for (x, y) in b.iter_mut().zip(e(1)) {
            *x = x.sub_ref(&y.mul_ref(&self.a1));
        }
        let neg_phi: Vec<Expr> = phi.iter().map(Expr::neg_ref).collect();
        let expected = [
            w(&phi, &e(1)).add(&w(&a, &e(2))),
            w(&neg_phi, &e(0)).add(&w(&b, &e(2))),
            w(&e(0), &e(1)),
        ];
        let mut out = Vec::new();
        for (k, exp) in expected.iter().enumerate() {
            let got = cf.structure(k);
            for (p, (x, y)) in got.coeffs().iter().zip(exp.coeffs()).enumerate() {
                let r = x.sub_ref(y);
                if !sampler.zero_test(&r).is_zero() {
                    out.push((format!("dω{}[{p}]", k + 1), r));
                }
            }
        }
        // dφ ≡ K ω¹∧ω² mod ω³
        let dphi = cf.express(&ext_d(&self.phi)).unwrap();
        for (i, j) in crate::forms::pairs(n) {
            if i == 2 || j == 2 {
                continue;
            }
            let want = if (i, j) == (0, 1) { self.k.clone() } else { Expr::zero() };
            let r = dphi.get(i, j).sub_ref(&want);
            if !sampler.zero_test(&r).is_zero() {
                out.push((format!("dφ[{i}{j}]"), r));
            }
        }
        out
    }
}

/// Metric components in the base chart.
fn components(m: &MetricInput) -> [Expr; 3] {
    [m.e.clone(), m.f.clone(), m.g.clone()]
}

pub fn sr_frame(m: &MetricInput, sampler: &Sampler) -> Result<SrFrame, GeodesicError> {
    check_definite(m, sampler).map_err(GeodesicError::NotDefinite)?;
    let chart = base_chart();
    let [e, f, g] = components(m);
    let z = Expr::symbol("z");
    // g = E (dx + F/(2E) dz)² + (4EG - F²)/(4E) dz²
    let r = e.sqrt();
    let disc = Expr::int(4) * &e * &g - &f * &f;
    let w2 = disc.try_div(&(Expr::int(4) * &e)).expect("E is nonzero").sqrt();
    let fe = f.try_div(&(Expr::int(2) * &r)).expect("E is nonzero");
    let w1_0 = OneForm::new(&chart, vec![r.clone(), Expr::zero(), fe])?;
    let w2_0 = OneForm::new(&chart, vec![Expr::zero(), Expr::zero(), w2.clone()])?;
    let mu = &r * &w2;
    let w3 = OneForm::new(&chart, vec![-(&mu * &z), mu.clone(), Expr::zero()])?;
    // Shift ω¹, ω² along ω³ so that dω³ = ω¹∧ω² exactly.
    let cf0 = Coframe::new(vec![w1_0.clone(), w2_0.clone(), w3.clone()], sampler)?;
    let dlog: Vec<Expr> = cf0
        .derivatives(&mu)
        .iter()
        .map(|d| d.try_div(&mu).expect("μ is nonzero"))
        .collect();
    let w1 = &w1_0 - &w3.scale(&dlog[1]);
    let w2f = &w2_0 + &w3.scale(&dlog[0]);
    let coframe = Coframe::new(vec![w1, w2f, w3], sampler)?;
    // φ and a1, a2 from dω¹, dω².
    let syms: Vec<Var> = ["_phi1", "_phi2", "_phi3", "_a1", "_a2"].map(Var::symbol).to_vec();
    let u: Vec<Expr> = syms.iter().map(|v| Expr::var(*v)).collect();
    let d1 = coframe.structure(0);
    let d2 = coframe.structure(1);
    let eqs = vec![
        d1.get(0, 1).sub_ref(&u[0]),
        d1.get(0, 2).sub_ref(&u[3]),
        d1.get(1, 2).sub_ref(&u[4].sub_ref(&u[2])),
        d2.get(0, 1).sub_ref(&u[1]),
        d2.get(0, 2).sub_ref(&u[2].add_ref(&u[4])),
        d2.get(1, 2).add_ref(&u[3]),
    ];
    let sol = solve_relations(&eqs, &syms, sampler)?;
    let phi = coframe.combine(&sol[0..3]);
    let k = coframe.express(&ext_d(&phi))?.get(0, 1);
    let frame = SrFrame {
        coframe,
        phi,
        a1: sol[3].clone(),
        a2: sol[4].clone(),
        k,
    };
    if let Some((name, r)) = frame.structure_residuals(sampler).into_iter().next() {
        return Err(internal(&name, &r));
    }
    Ok(frame)
}

/// `(cos ψ, sin ψ)` in the stereographic coordinate `u`.
pub fn angle_functions() -> (Expr, Expr) {
    let u = Expr::symbol("u");
    let den = Expr::one() + &u * &u;
    let c = (Expr::one() - &u * &u).try_div(&den).unwrap();
    let s = (Expr::int(2) * &u).try_div(&den).unwrap();
    (c, s)
}

fn pull_back(f: &OneForm, chart: &Arc<Chart>) -> OneForm {
    let mut c = vec![Expr::zero(); chart.dim()];
    for (v, e) in f.chart().vars().iter().zip(f.coeffs()) {
        let i = chart.index_of(*v).expect("base variable in lifted chart");
        c[i] = e.clone();
    }
    OneForm::new(chart, c).unwrap()
}

/// The frame on the lifted chart: `ω¹, ω²` rotated by ψ, `φ + dψ`, and the
/// torsion recomputed there.
pub fn lift(f: &SrFrame, sampler: &Sampler) -> Result<SrFrame, GeodesicError> {
    if f.is_lifted() {
        return Ok(f.clone());
    }
    let chart = lifted_chart();
    let (c, s) = angle_functions();
    let w1 = pull_back(f.omega(1), &chart);
    let w2 = pull_back(f.omega(2), &chart);
    let w3 = pull_back(f.omega(3), &chart);
    let u = Expr::symbol("u");
    let dpsi = OneForm::coordinate(&chart, 3).scale(&Expr::int(2).try_div(&(Expr::one() + &u * &u)).unwrap());
    let phi = &pull_back(&f.phi, &chart) + &dpsi;
    let n1 = &w1.scale(&c) + &w2.scale(&s);
    let n2 = &w2.scale(&c) - &w1.scale(&s);
    let coframe = Coframe::new(vec![n1, n2, w3, phi.clone(), OneForm::coordinate(&chart, 4)], sampler)?;
    let d1 = coframe.structure(0);
    let dphi = coframe.express(&ext_d(&phi))?;
    let out = SrFrame {
        a1: d1.get(0, 2),
        a2: d1.get(1, 2),
        k: dphi.get(0, 1),
        coframe,
        phi,
    };
    if let Some((name, r)) = out.structure_residuals(sampler).into_iter().next() {
        return Err(internal(&name, &r));
    }
    Ok(out)
}

/// Derivatives of `a1, a2, K` along `ω¹, ω²`.
#[derive(Clone, Debug, PartialEq)]
pub struct SrJets {
    pub b1: Expr,
    pub b2: Expr,
    pub s1: Expr,
    pub s2: Expr,
    pub k1: Expr,
    pub k2: Expr,
}

impl SrJets {
    pub fn named(&self) -> Vec<(&'static str, &Expr)> {
        vec![
            ("b1", &self.b1),
            ("b2", &self.b2),
            ("s1", &self.s1),
            ("s2", &self.s2),
            ("k1", &self.k1),
            ("k2", &self.k2),
        ]
    }
}

pub fn sr_jets(f: &SrFrame, sampler: &Sampler) -> Result<SrJets, GeodesicError> {
    let cf = &f.coframe;
    let phi = cf.components(&f.phi);
    let da1 = cf.derivatives(&f.a1);
    let da2 = cf.derivatives(&f.a2);
    let dk = cf.derivatives(&f.k);
    // da1 - 2 a2 φ and da2 + 2 a1 φ, ω¹ and ω² components.
    let two_a2 = f.a2.scale(2, 1);
    let two_a1 = f.a1.scale(2, 1);
    let p: Vec<Expr> = da1
        .iter()
        .zip(&phi)
        .map(|(d, p)| d.sub_ref(&two_a2.mul_ref(p)))
        .collect();
    let q: Vec<Expr> = da2
        .iter()
        .zip(&phi)
        .map(|(d, p)| d.add_ref(&two_a1.mul_ref(p)))
        .collect();
    if f.is_lifted() {
        require_zero("φ-component of da1 - 2a2φ", &p[3], sampler)?;
        require_zero("φ-component of da2 + 2a1φ", &q[3], sampler)?;
        require_zero("φ-component of dK", &dk[3], sampler)?;
    }
    let syms: Vec<Var> = ["_b1", "_b2", "_s1", "_s2", "_k1", "_k2"].map(Var::symbol).to_vec();
    let v: Vec<Expr> = syms.iter().map(|s| Expr::var(*s)).collect();
    let (b1, b2, s1, s2, k1, k2) = (&v[0], &v[1], &v[2], &v[3], &v[4], &v[5]);
    let eqs = vec![
        p[0].sub_ref(&(s1 + b2)),
        p[1].sub_ref(&(s2 + b1)),
        q[0].sub_ref(&(s2 - b1)),
        q[1].sub_ref(&(b2 - s1)),
        dk[0].sub_ref(k1),
        dk[1].sub_ref(k2),
    ];
    let sol = solve_relations(&eqs, &syms, sampler)?;
    let [b1, b2, s1, s2, k1, k2]: [Expr; 6] = sol.try_into().expect("six unknowns");
    Ok(SrJets { b1, b2, s1, s2, k1, k2 })
}

/// `σ = ω¹ - 3/5 xm ω³`, `θ0 = ω³`, `θ1 = ω²`, `θ2 = φ - xm ω¹ + Aω³`,
/// `θ3 = dxm - a1ω¹ - (a2+A)ω² + Bω³` on the lifted chart.
pub fn build_b1_section(f: &SrFrame, j: &SrJets, sampler: &Sampler) -> Result<Coframe, GeodesicError> {
    if !f.is_lifted() {
        return Err(GeodesicError::NotLifted);
    }
    let chart = lifted_chart();
    let xm = Expr::symbol("xm");
    let a = (&f.a2 + &(Expr::int(3) * &xm * &xm) - Expr::int(3) * &f.k).scale(1, 10);
    let b = (&j.s2 - &(Expr::int(3) * &j.k1) - Expr::int(6) * &f.a1 * &xm - Expr::int(21) * &j.b1).scale(1, 10);
    let (w1, w2, w3) = (f.omega(1), f.omega(2), f.omega(3));
    let sigma = w1 - &w3.scale(&xm.scale(3, 5));
    let th2 = &(&f.phi - &w1.scale(&xm)) + &w3.scale(&a);
    let th3 = &(&(&OneForm::coordinate(&chart, 4) - &w1.scale(&f.a1)) - &w2.scale(&(&f.a2 + &a))) + &w3.scale(&b);
    Ok(Coframe::new(vec![sigma, w3.clone(), w2.clone(), th2, th3], sampler)?)
}

/// Frame, lift, jets and section for a metric.
pub fn section_for_metric(m: &MetricInput, sampler: &Sampler) -> Result<(SrFrame, SrJets, Coframe), GeodesicError> {
    let base = sr_frame(m, sampler)?;
    let lifted = lift(&base, sampler)?;
    let jets = sr_jets(&lifted, sampler)?;
    let cf = build_b1_section(&lifted, &jets, sampler)?;
    Ok((lifted, jets, cf))
}

/// A point of the lifted space with the frame angle in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GriffithsState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub angle: f64,
    pub x_mult: f64,
}

impl GriffithsState {
    fn to_array(self) -> [f64; 5] {
        [self.x, self.y, self.z, self.angle, self.x_mult]
    }

    fn from_array(a: [f64; 5]) -> GriffithsState {
        GriffithsState {
            x: a[0],
            y: a[1],
            z: a[2],
            angle: a[3],
            x_mult: a[4],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepControl {
    Fixed { step: f64 },
    Adaptive { tol: f64, initial_step: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub s: f64,
    pub state: GriffithsState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Largest `|y(s) - y(0) - ∫ z dx|` along the discrete curve.
    pub contact_residual: f64,
    /// Largest `|g(v, v) - 1|` at the samples.
    pub speed_residual: f64,
    pub steps: usize,
}

/// The geodesic vector field in `(x, y, z, ψ, xm)` with arclength parameter.
pub struct GeodesicField {
    /// Coordinate components of the frame vectors dual to ω¹ and ω².
    e1: [Expr; 3],
    e2: [Expr; 3],
    phi: [Expr; 2],
    a: [Expr; 2],
    metric: [Expr; 3],
}

impl GeodesicField {
    pub fn new(frame: &SrFrame) -> Result<GeodesicField, GeodesicError> {
        if frame.is_lifted() {
            return Err(GeodesicError::InvalidControl("field needs the base frame".into()));
        }
        let cf = &frame.coframe;
        let v1 = cf.dual_vector(0);
        let v2 = cf.dual_vector(1);
        let phi = cf.components(&frame.phi);
        Ok(GeodesicField {
            e1: [v1[0].clone(), v1[1].clone(), v1[2].clone()],
            e2: [v2[0].clone(), v2[1].clone(), v2[2].clone()],
            phi: [phi[0].clone(), phi[1].clone()],
            a: [frame.a1.clone(), frame.a2.clone()],
            metric: [Expr::zero(), Expr::zero(), Expr::zero()],
        })
    }

    pub fn for_metric(m: &MetricInput, sampler: &Sampler) -> Result<GeodesicField, GeodesicError> {
        Ok(GeodesicField::new(&sr_frame(m, sampler)?)?.with_metric(m))
    }

    pub fn with_metric(mut self, m: &MetricInput) -> GeodesicField {
        self.metric = [m.e.clone(), m.f.clone(), m.g.clone()];
        self
    }

    fn eval(e: &Expr, p: &[f64; 3]) -> f64 {
        let vars = ["x", "y", "z"].map(Var::symbol);
        e.eval(&|v| vars.iter().position(|w| *w == v).map(|i| p[i]))
            .unwrap_or(f64::NAN)
    }

    /// `d/ds` of `(x, y, z, ψ, xm)`.
    pub fn velocity(&self, st: &[f64; 5]) -> [f64; 5] {
        let p = [st[0], st[1], st[2]];
        let (s, c) = st[3].sin_cos();
        let ev = |e: &Expr| GeodesicField::eval(e, &p);
        let mut out = [0.0; 5];
        for i in 0..3 {
            out[i] = c * ev(&self.e1[i]) + s * ev(&self.e2[i]);
        }
        out[3] = st[4] - (c * ev(&self.phi[0]) + s * ev(&self.phi[1]));
        let (s2, c2) = (2.0 * st[3]).sin_cos();
        out[4] = c2 * ev(&self.a[0]) + s2 * ev(&self.a[1]);
        out
    }

    /// Derivative of the velocity along the flow, by central differences.
    pub fn acceleration(&self, st: &[f64; 5], v: &[f64; 5]) -> [f64; 5] {
        const EPS: f64 = 1e-5;
        let fwd = self.velocity(&std::array::from_fn(|i| st[i] + EPS * v[i]));
        let back = self.velocity(&std::array::from_fn(|i| st[i] - EPS * v[i]));
        std::array::from_fn(|i| (fwd[i] - back[i]) / (2.0 * EPS))
    }

    /// `E x'^2 + F x'z' + G z'^2` at a state.
    pub fn speed_squared(&self, st: &[f64; 5]) -> f64 {
        let v = self.velocity(st);
        let p = [st[0], st[1], st[2]];
        let [e, f, g] = self.metric.each_ref().map(|m| GeodesicField::eval(m, &p));
        e * v[0] * v[0] + f * v[0] * v[2] + g * v[2] * v[2]
    }
}

fn rk4(field: &GeodesicField, y: &[f64; 5], h: f64) -> [f64; 5] {
    let add = |a: &[f64; 5], b: &[f64; 5], t: f64| -> [f64; 5] { std::array::from_fn(|i| a[i] + t * b[i]) };
    let k1 = field.velocity(y);
    let k2 = field.velocity(&add(y, &k1, h / 2.0));
    let k3 = field.velocity(&add(y, &k2, h / 2.0));
    let k4 = field.velocity(&add(y, &k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Position, velocity and acceleration at a sample.
#[derive(Clone, Copy)]
struct Jet {
    p: [f64; 5],
    v: [f64; 5],
    a: [f64; 5],
}

impl Jet {
    fn at(field: &GeodesicField, p: [f64; 5]) -> Jet {
        let v = field.velocity(&p);
        Jet {
            p,
            v,
            a: field.acceleration(&p, &v),
        }
    }

    fn is_finite(&self) -> bool {
        self.p.iter().chain(&self.v).chain(&self.a).all(|c| c.is_finite())
    }
}

/// `∫ z dx` over one step from quintic Hermite interpolants of `x` and `z`.
fn step_contact_integral(h: f64, j0: &Jet, j1: &Jet) -> f64 {
    let value = |t: f64, i: usize| -> f64 {
        let (t2, t3, t4, t5) = (t * t, t.powi(3), t.powi(4), t.powi(5));
        let b = [
            1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
            0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
            0.5 * t3 - t4 + 0.5 * t5,
            -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
            10.0 * t3 - 15.0 * t4 + 6.0 * t5,
        ];
        hermite(&b, h, i, j0, j1)
    };
    let slope = |t: f64, i: usize| -> f64 {
        let (t2, t3, t4) = (t * t, t.powi(3), t.powi(4));
        let b = [
            -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
            1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
            t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
            1.5 * t2 - 4.0 * t3 + 2.5 * t4,
            -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
            30.0 * t2 - 60.0 * t3 + 30.0 * t4,
        ];
        hermite(&b, h, i, j0, j1) / h
    };
    // Five-point Gauss-Legendre is exact for the degree-9 integrand.
    const NODES: [(f64, f64); 5] = [
        (0.0, 0.568_888_888_888_888_9),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    NODES
        .iter()
        .map(|&(xi, w)| {
            let t = 0.5 * (1.0 + xi);
            0.5 * w * value(t, 2) * slope(t, 0) * h
        })
        .sum()
}

fn hermite(b: &[f64; 6], h: f64, i: usize, j0: &Jet, j1: &Jet) -> f64 {
    b[0] * j0.p[i]
        + b[1] * h * j0.v[i]
        + b[2] * h * h * j0.a[i]
        + b[3] * h * h * j1.a[i]
        + b[4] * h * j1.v[i]
        + b[5] * j1.p[i]
}

/// Geodesic of a metric from `s0`, parametrized by arclength.
pub fn integrate_geodesic(
    m: &MetricInput,
    s0: GriffithsState,
    arc_length: f64,
    control: StepControl,
    sampler: &Sampler,
) -> Result<Trajectory, GeodesicError> {
    let field = GeodesicField::for_metric(m, sampler)?;
    integrate_field(&field, s0, arc_length, control)
}

pub fn integrate_field(
    field: &GeodesicField,
    s0: GriffithsState,
    arc_length: f64,
    control: StepControl,
) -> Result<Trajectory, GeodesicError> {
    if !(arc_length.is_finite() && arc_length > 0.0) {
        return Err(GeodesicError::InvalidControl(format!("arc length {arc_length}")));
    }
    let mut y = s0.to_array();
    let mut jet = Jet::at(field, y);
    if !jet.is_finite() {
        return Err(GeodesicError::LeftChart(0.0));
    }
    let mut s = 0.0;
    let mut samples = vec![Sample { s, state: s0 }];
    let mut contact_defect = 0.0f64;
    let mut contact_residual = 0.0f64;
    let has_metric = !field.metric[0].is_zero_poly();
    let mut speed_residual = if has_metric {
        (field.speed_squared(&y) - 1.0).abs()
    } else {
        0.0
    };
    let mut steps = 0;
    let (mut h, tol) = match control {
        StepControl::Fixed { step } if step > 0.0 => {
            let n = (arc_length / step).ceil().max(1.0);
            (arc_length / n, None)
        }
        StepControl::Adaptive { tol, initial_step } if tol > 0.0 && initial_step > 0.0 => (initial_step, Some(tol)),
        other => return Err(GeodesicError::InvalidControl(format!("{other:?}"))),
    };
    while s < arc_length {
        let last = s + h >= arc_length * (1.0 - 1e-15);
        let step = if last { arc_length - s } else { h };
        let next = match tol {
            None => rk4(field, &y, step),
            Some(tol) => {
                let full = rk4(field, &y, step);
                let half = rk4(field, &rk4(field, &y, step / 2.0), step / 2.0);
                let err = full
                    .iter()
                    .zip(&half)
                    .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
                    .fold(0.0, f64::max)
                    / 15.0;
                if !err.is_finite() {
                    return Err(GeodesicError::LeftChart(s));
                }
                if err > tol {
                    h = step * (0.9 * (tol / err).powf(0.2)).max(0.1);
                    if h < 1e-12 {
                        return Err(GeodesicError::StepUnderflow(s));
                    }
                    continue;
                }
                h = step * (0.9 * (tol / err.max(1e-300)).powf(0.2)).clamp(0.2, 4.0);
                // Richardson extrapolation of the two half steps.
                std::array::from_fn(|i| half[i] + (half[i] - full[i]) / 15.0)
            }
        };
        let jn = Jet::at(field, next);
        if !jn.is_finite() {
            return Err(GeodesicError::LeftChart(s));
        }
        contact_defect += (next[1] - y[1]) - step_contact_integral(step, &jet, &jn);
        contact_residual = contact_residual.max(contact_defect.abs());
        s = if last { arc_length } else { s + step };
        y = next;
        jet = jn;
        steps += 1;
        if has_metric {
            speed_residual = speed_residual.max((field.speed_squared(&y) - 1.0).abs());
        }
        samples.push(Sample {
            s,
            state: GriffithsState::from_array(y),
        });
    }
    Ok(Trajectory {
        samples,
        contact_residual,
        speed_residual,
        steps,
    })
}

/// Least-squares circle through points (algebraic fit).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: (f64, f64),
    pub radius: f64,
    /// Largest `|dist(p, center) - radius|`.
    pub residual: f64,
}

pub fn fit_circle(points: &[(f64, f64)]) -> Option<Circle> {
    if points.len() < 3 {
        return None;
    }
    // Center the data for conditioning.
    let n = points.len() as f64;
    let (mx, mz) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let mut m = [[0.0f64; 4]; 3];
    for &(x, z) in points {
        let (x, z) = (x - mx, z - mz);
        let row = [x, z, 1.0];
        let rhs = -(x * x + z * z);
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            m[i][3] += row[i] * rhs;
        }
    }
    for col in 0..3 {
        let p = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        m.swap(col, p);
        if m[col][col].abs() < 1e-300 {
            return None;
        }
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let (d, e, f) = (m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]);
    let (cx, cz) = (-d / 2.0, -e / 2.0);
    let r2 = cx * cx + cz * cz - f;
    if r2.is_nan() || r2 <= 0.0 {
        return None;
    }
    let radius = r2.sqrt();
    let residual = points
        .iter()
        .map(|&(x, z)| ((x - mx - cx).hypot(z - mz - cz) - radius).abs())
        .fold(0.0, f64::max);
    Some(Circle {
        center: (cx + mx, cz + mz),
        radius,
        residual,
    })
}

/// Numeric values of the frame invariants at a point, for diagnostics.
pub fn evaluate_at(e: &Expr, point: &HashMap<&str, f64>) -> Option<f64> {
    e.eval(&|v| v.name().and_then(|n| point.get(n.as_str()).copied()))
}
