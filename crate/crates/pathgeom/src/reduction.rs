//! Coframe adaptation for fourth-order ODEs: the 0-adapted coframe, the
//! normalized section with its connection and torsion, and the further
//! normalization `T2 = 0`, `T4 = -1`.
//!
//! Frame indices are `0 = σ`, `1..=4 = θ0..θ3` throughout.

use std::sync::{Arc, OnceLock};

use symexpr::{invert, solve_relations, Chart, Expr, Sampler, SignCount, SolveError, Var, ZeroVerdict};
use thiserror::Error;

use crate::forms::{ext_d, pairs, Coframe, FormsError, FrameTwoForm, OneForm};
use crate::odeparse::OdeInput;

pub const SIGMA: usize = 0;
pub const THETA: [usize; 4] = [1, 2, 3, 4];
pub const FRAME_NAMES: [&str; 5] = ["σ", "θ0", "θ1", "θ2", "θ3"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error("linear solve failed: {0}")]
    Solve(#[from] SolveError),
    #[error("coframe is not a normalized section; nonzero residuals: {}", fmt_residuals(.0))]
    NotNormalized(Vec<(String, String)>),
    #[error("zero test undecided for {0}")]
    Undecided(String),
    #[error("not variational: I1 or T5 is not identically zero")]
    NotVariational,
    #[error("degenerate: T4 vanishes identically")]
    Degenerate,
    #[error("indefinite: T4 takes both signs or is positive ({positive} positive, {negative} negative samples)")]
    Indefinite { positive: usize, negative: usize },
    #[error("internal consistency failure in {identity}: residual {residual}")]
    Internal { identity: String, residual: String },
}

fn fmt_residuals(r: &[(String, String)]) -> String {
    r.iter()
        .map(|(k, v)| format!("{k} = {v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn unit(k: usize) -> Vec<Expr> {
    (0..5)
        .map(|i| if i == k { Expr::one() } else { Expr::zero() })
        .collect()
}

/// `Σ c_k e_k` on frame components.
fn lin(terms: &[(&Expr, usize)]) -> Vec<Expr> {
    let mut out = vec![Expr::zero(); 5];
    for (c, k) in terms {
        out[*k] = out[*k].add_ref(c);
    }
    out
}

fn axpy(a: &[Expr], s: i64, b: &[Expr]) -> Vec<Expr> {
    let s = Expr::int(s);
    a.iter().zip(b).map(|(x, y)| x.add_ref(&s.mul_ref(y))).collect()
}

/// Connection forms by frame components.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    pub alpha: Vec<Expr>,
    pub beta: Vec<Expr>,
    pub gamma: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Torsion {
    pub i0: Expr,
    pub i1: Expr,
    /// `T1..T8` at indices `0..8`.
    pub t: [Expr; 8],
}

impl Torsion {
    pub fn t(&self, k: usize) -> &Expr {
        &self.t[k - 1]
    }

    /// Name and value of every scalar, in table order.
    pub fn named(&self) -> Vec<(String, Expr)> {
        let mut v = vec![("I0".to_string(), self.i0.clone()), ("I1".to_string(), self.i1.clone())];
        for k in 1..=8 {
            v.push((format!("T{k}"), self.t(k).clone()));
        }
        v
    }
}

/// Connection and torsion of a normalized section.
#[derive(Clone, Debug, PartialEq)]
pub struct B1Data {
    pub connection: Connection,
    pub torsion: Torsion,
}

/// Right-hand sides of the five structure equations.
pub fn reassemble(c: &Connection, t: &Torsion) -> [FrameTwoForm; 5] {
    let w = FrameTwoForm::wedge;
    let e = unit;
    let (a, b, g) = (&c.alpha, &c.beta, &c.gamma);
    let tt = |k| t.t(k);
    let d_sigma = w(a, &e(0))
        .add(&w(&e(1), &lin(&[(tt(1), 2), (tt(2), 3), (tt(3), 4)])))
        .add(&w(&e(2), &lin(&[(tt(4), 3), (tt(5), 4)])));
    let d0 = w(b, &e(1)).add(&w(&e(0), &e(2)));
    let d1 = w(&axpy(b, -1, a), &e(2)).add(&w(g, &e(1))).add(&w(&e(0), &e(3)));
    let g43: Vec<Expr> = g.iter().map(|x| x.scale(4, 3)).collect();
    let d2 = w(&axpy(b, -2, a), &e(3)).add(&w(&g43, &e(2))).add(&w(&e(0), &e(4)));
    let mut d3 = w(&axpy(b, -3, a), &e(4))
        .add(&w(g, &e(3)))
        .add(&w(&e(0), &lin(&[(&t.i0, 1), (&t.i1, 2)])));
    d3.add_to(1, 2, tt(6));
    d3.add_to(1, 3, tt(7));
    d3.add_to(2, 3, tt(8));
    [d_sigma, d0, d1, d2, d3]
}

fn from_unknowns(x: &[Expr]) -> (Connection, Torsion) {
    let c = Connection {
        alpha: x[0..5].to_vec(),
        beta: x[5..10].to_vec(),
        gamma: x[10..15].to_vec(),
    };
    let t = Torsion {
        i0: x[15].clone(),
        i1: x[16].clone(),
        t: std::array::from_fn(|k| x[17 + k].clone()),
    };
    (c, t)
}

/// The structure equations are affine in the 25 unknowns with constant
/// coefficients; 25 independent rows determine them.
struct Absorption {
    rows: Vec<(usize, usize)>,
    inverse: Vec<Vec<Expr>>,
    offset: Vec<Expr>,
}

fn absorption() -> &'static Absorption {
    static CELL: OnceLock<Absorption> = OnceLock::new();
    CELL.get_or_init(|| {
        let syms: Vec<Var> = (0..25).map(|k| Var::symbol(&format!("_cx{k}"))).collect();
        let x: Vec<Expr> = syms.iter().map(|v| Expr::var(*v)).collect();
        let (c, t) = from_unknowns(&x);
        let rhs = reassemble(&c, &t);
        let zero: Vec<(Var, Expr)> = syms.iter().map(|v| (*v, Expr::zero())).collect();
        let mut all: Vec<((usize, usize), Vec<Expr>, Expr)> = Vec::new();
        for (a, form) in rhs.iter().enumerate() {
            for (p, e) in form.coeffs().iter().enumerate() {
                let row: Vec<Expr> = syms.iter().map(|v| e.diff(*v)).collect();
                all.push(((a, p), row, e.subs(&zero)));
            }
        }
        // Greedy choice of independent rows.
        let mut basis: Vec<(usize, Vec<Expr>)> = Vec::new();
        let mut chosen = Vec::new();
        for (key, row, off) in &all {
            let mut r = row.clone();
            for (piv, b) in &basis {
                if !r[*piv].is_zero_poly() {
                    let f = r[*piv].clone();
                    r = r.iter().zip(b).map(|(x, y)| x.sub_ref(&f.mul_ref(y))).collect();
                }
            }
            if let Some(piv) = r.iter().position(|e| !e.is_zero_poly()) {
                let inv = r[piv].try_inv().unwrap();
                let r: Vec<Expr> = r.iter().map(|e| e.mul_ref(&inv)).collect();
                for (_, b) in basis.iter_mut() {
                    if !b[piv].is_zero_poly() {
                        let f = b[piv].clone();
                        *b = b.iter().zip(&r).map(|(x, y)| x.sub_ref(&f.mul_ref(y))).collect();
                    }
                }
                basis.push((piv, r));
                chosen.push((*key, row.clone(), off.clone()));
            }
        }
        assert_eq!(chosen.len(), 25, "structure equations determine the connection");
        let m: Vec<Vec<Expr>> = chosen.iter().map(|(_, r, _)| r.clone()).collect();
        let inverse = invert(&m, &Sampler::default()).expect("constant system is invertible");
        Absorption {
            rows: chosen.iter().map(|(k, _, _)| *k).collect(),
            inverse,
            offset: chosen.iter().map(|(_, _, o)| o.clone()).collect(),
        }
    })
}

fn pair_label(n: usize, p: usize) -> String {
    let (i, j) = pairs(n).nth(p).unwrap();
    format!("{}∧{}", FRAME_NAMES[i], FRAME_NAMES[j])
}

/// Structure-equation residuals `d e_a - rhs_a`, per nonzero coefficient.
pub fn structure_residuals(
    structure: &[FrameTwoForm],
    data: &B1Data,
    sampler: &Sampler,
) -> Result<Vec<(String, Expr)>, ReductionError> {
    let rhs = reassemble(&data.connection, &data.torsion);
    let mut out = Vec::new();
    for (a, (lhs, r)) in structure.iter().zip(&rhs).enumerate() {
        for (p, (x, y)) in lhs.coeffs().iter().zip(r.coeffs()).enumerate() {
            let res = x.sub_ref(y);
            match sampler.zero_test(&res) {
                ZeroVerdict::ProvenZero | ZeroVerdict::NumericallyZero { .. } => {}
                ZeroVerdict::ProvenNonzero => {
                    out.push((format!("d{}[{}]", FRAME_NAMES[a], pair_label(5, p)), res));
                }
                ZeroVerdict::Unknown => {
                    return Err(ReductionError::Undecided(format!(
                        "d{}[{}]",
                        FRAME_NAMES[a],
                        pair_label(5, p)
                    )))
                }
            }
        }
    }
    Ok(out)
}

/// Structure coefficients `d e_a` of a coframe.
pub fn structure(cf: &Coframe) -> Vec<FrameTwoForm> {
    (0..cf.len()).map(|a| cf.structure(a)).collect()
}

/// Connection forms and torsion of a normalized section, with every
/// structure equation verified.
pub fn connection_and_torsion(cf: &Coframe, sampler: &Sampler) -> Result<B1Data, ReductionError> {
    if cf.len() != 5 {
        return Err(FormsError::Dimension {
            expected: 5,
            got: cf.len(),
        }
        .into());
    }
    let st = structure(cf);
    data_from_structure(&st, sampler)
}

fn data_from_structure(st: &[FrameTwoForm], sampler: &Sampler) -> Result<B1Data, ReductionError> {
    let abs = absorption();
    let b: Vec<Expr> = abs
        .rows
        .iter()
        .zip(&abs.offset)
        .map(|((a, p), off)| st[*a].coeffs()[*p].sub_ref(off))
        .collect();
    let x: Vec<Expr> = abs
        .inverse
        .iter()
        .map(|row| {
            row.iter()
                .zip(&b)
                .filter(|(c, _)| !c.is_zero_poly())
                .map(|(c, v)| c.mul_ref(v))
                .sum()
        })
        .collect();
    let (connection, torsion) = from_unknowns(&x);
    let data = B1Data { connection, torsion };
    let bad = structure_residuals(st, &data, sampler)?;
    if !bad.is_empty() {
        return Err(ReductionError::NotNormalized(
            bad.into_iter().map(|(k, v)| (k, v.to_string())).collect(),
        ));
    }
    Ok(data)
}

/// The ODE chart as a shared handle.
pub fn ode_chart() -> Arc<Chart> {
    static CELL: OnceLock<Arc<Chart>> = OnceLock::new();
    CELL.get_or_init(|| Arc::new(Chart::ode())).clone()
}

/// `(dx, θ0, θ1, θ2, θ3)` with `θi = dyi - y(i+1) dx`, `θ3 = dy3 - F dx`.
fn contact_forms(ode: &OdeInput) -> Vec<OneForm> {
    let chart = ode_chart();
    let v = chart.vars().to_vec();
    let mut out = vec![OneForm::coordinate(&chart, 0)];
    for i in 0..4 {
        let next = if i < 3 { Expr::var(v[i + 2]) } else { ode.rhs.clone() };
        let mut c = vec![Expr::zero(); 5];
        c[0] = next.neg_ref();
        c[i + 1] = Expr::one();
        out.push(OneForm::new(&chart, c).unwrap());
    }
    out
}

/// `σ = -dx`, `θi = dyi - y(i+1) dx`, `θ3 = dy3 - F dx`.
pub fn zero_adapted_coframe(ode: &OdeInput, sampler: &Sampler) -> Result<Coframe, ReductionError> {
    let mut forms = contact_forms(ode);
    forms[0] = -&forms[0];
    Ok(Coframe::new(forms, sampler)?)
}

/// Whether `dθi ≡ ±θ(i+1) ∧ σ mod θ0..θi` for `i = 0, 1, 2`, with one sign
/// throughout (the sign records the orientation of σ).
pub fn check_gourst(cf: &Coframe, sampler: &Sampler) -> bool {
    if cf.len() != 5 {
        return false;
    }
    let mut sign: Option<bool> = None;
    for i in 0..3 {
        let d = cf.structure(THETA[i]);
        // Components on pairs not involving θ0..θi.
        let mut coeff = Expr::zero();
        for (a, b) in pairs(5) {
            if THETA[..=i].contains(&a) || THETA[..=i].contains(&b) {
                continue;
            }
            let c = d.get(a, b);
            if (a, b) == (SIGMA, THETA[i + 1]) {
                coeff = c;
            } else if !sampler.zero_test(&c).is_zero() {
                return false;
            }
        }
        // θ(i+1) ∧ σ = -σ ∧ θ(i+1)
        let plus = sampler.zero_test(&coeff.add_ref(&Expr::one())).is_zero();
        let minus = sampler.zero_test(&coeff.sub_ref(&Expr::one())).is_zero();
        let s = match (plus, minus) {
            (true, _) => true,
            (_, true) => false,
            _ => return false,
        };
        if *sign.get_or_insert(s) != s {
            return false;
        }
    }
    true
}

/// Group parameters moving the contact coframe to the normalized section:
/// `σ + pθ0 + qθ1`, `θ2 + sθ0 + tθ1`, `θ3 + uθ0 + vθ1 + wθ2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionParams {
    pub p: Expr,
    pub q: Expr,
    pub s: Expr,
    pub t: Expr,
    pub u: Expr,
    pub v: Expr,
    pub w: Expr,
}

impl Default for SectionParams {
    fn default() -> SectionParams {
        let z = Expr::zero();
        SectionParams {
            p: z.clone(),
            q: z.clone(),
            s: z.clone(),
            t: z.clone(),
            u: z.clone(),
            v: z.clone(),
            w: z,
        }
    }
}

impl SectionParams {
    fn slot(&mut self, name: char) -> &mut Expr {
        match name {
            'p' => &mut self.p,
            'q' => &mut self.q,
            's' => &mut self.s,
            't' => &mut self.t,
            'u' => &mut self.u,
            'v' => &mut self.v,
            'w' => &mut self.w,
            _ => unreachable!(),
        }
    }

    fn apply(&self, base: &[OneForm]) -> Vec<OneForm> {
        let [sg, t0, t1, t2, t3] = [&base[0], &base[1], &base[2], &base[3], &base[4]];
        let sigma = &(sg + &t0.scale(&self.p)) + &t1.scale(&self.q);
        let th2 = &(t2 + &t0.scale(&self.s)) + &t1.scale(&self.t);
        let th3 = &(&(t3 + &t0.scale(&self.u)) + &t1.scale(&self.v)) + &t2.scale(&self.w);
        vec![sigma, t0.clone(), t1.clone(), th2, th3]
    }
}

/// `Σ coef * C[a][i][j]` over structure coefficients.
struct Condition(&'static [(i64, i64, usize, usize, usize)]);

/// Normalizations in solving order. Each condition is algebraic in its
/// stage's unknowns and involves derivatives only of earlier ones.
const STAGES: [(&str, &[Condition]); 4] = [
    (
        "tw",
        &[
            Condition(&[(1, 1, 1, 0, 1), (-3, 1, 3, 0, 3), (2, 1, 4, 0, 4)]),
            Condition(&[(1, 1, 2, 0, 2), (-2, 1, 3, 0, 3), (1, 1, 4, 0, 4)]),
        ],
    ),
    ("q", &[Condition(&[(1, 1, 2, 1, 4), (-3, 4, 3, 2, 4)])]),
    (
        "sv",
        &[
            Condition(&[(1, 1, 2, 0, 1), (-1, 1, 4, 0, 3)]),
            Condition(&[(1, 1, 3, 0, 2), (-4, 3, 4, 0, 3)]),
        ],
    ),
    ("pu", &[Condition(&[(1, 1, 3, 1, 4)]), Condition(&[(1, 1, 3, 0, 1)])]),
];

/// Refined structure data available once the section is variational.
#[derive(Clone, Debug, PartialEq)]
pub struct Refined {
    pub u1: Expr,
    pub u2: Expr,
    /// Nonzero residuals of `dα = 2/3 dβ` and of the `dβ` equation.
    pub residuals: Vec<(String, Expr)>,
}

#[derive(Clone, Debug)]
pub struct B1Section {
    pub coframe: Coframe,
    pub params: SectionParams,
    pub data: B1Data,
    pub refined: Option<Refined>,
}

impl B1Section {
    pub fn torsion(&self) -> &Torsion {
        &self.data.torsion
    }

    /// `I1 ≡ 0` and `T5 ≡ 0`.
    pub fn is_variational(&self, sampler: &Sampler) -> bool {
        sampler.zero_test(&self.data.torsion.i1).is_zero() && sampler.zero_test(self.data.torsion.t(5)).is_zero()
    }

    pub fn alpha(&self) -> OneForm {
        self.coframe.combine(&self.data.connection.alpha)
    }

    pub fn beta(&self) -> OneForm {
        self.coframe.combine(&self.data.connection.beta)
    }

    pub fn gamma(&self) -> OneForm {
        self.coframe.combine(&self.data.connection.gamma)
    }
}

/// Normalizes the contact coframe of `y'''' = F` stage by stage and reads
/// off connection and torsion.
pub fn reduce_to_b1(ode: &OdeInput, sampler: &Sampler) -> Result<B1Section, ReductionError> {
    let base = contact_forms(ode);
    let mut params = SectionParams::default();
    for (names, conds) in STAGES {
        let syms: Vec<Var> = names.chars().map(|c| Var::symbol(&format!("_b1{c}"))).collect();
        let mut trial = params.clone();
        for (c, v) in names.chars().zip(&syms) {
            *trial.slot(c) = Expr::var(*v);
        }
        let cf = Coframe::new(trial.apply(&base), sampler)?;
        let mut st: Vec<Option<FrameTwoForm>> = vec![None; 5];
        let eqs: Vec<Expr> = conds
            .iter()
            .map(|Condition(terms)| {
                terms
                    .iter()
                    .map(|&(n, d, a, i, j)| {
                        let s = st[a].get_or_insert_with(|| cf.structure(a));
                        s.get(i, j).scale(n, d)
                    })
                    .sum()
            })
            .collect();
        let sol = solve_relations(&eqs, &syms, sampler)?;
        for (c, v) in names.chars().zip(sol) {
            *params.slot(c) = v;
        }
    }
    let coframe = Coframe::new(params.apply(&base), sampler)?;
    let st = structure(&coframe);
    let data = data_from_structure(&st, sampler)?;
    let mut section = B1Section {
        coframe,
        params,
        data,
        refined: None,
    };
    if section.is_variational(sampler) {
        let t8 = section.data.torsion.t(8);
        if !sampler.zero_test(t8).is_zero() {
            return Err(ReductionError::Internal {
                identity: "I1 = T5 = 0 implies T8 = 0".into(),
                residual: t8.to_string(),
            });
        }
        section.refined = Some(refine(&section, sampler));
    }
    Ok(section)
}

/// `U1`, `U2` from `dβ = σ∧γ - τ∧θ1 - 3ν∧θ0`, plus residuals of the
/// remaining refined equations.
pub fn refine(s: &B1Section, sampler: &Sampler) -> Refined {
    let cf = &s.coframe;
    let c = &s.data.connection;
    let t = &s.data.torsion;
    let d_beta = cf.express(&ext_d(&s.beta())).unwrap();
    let d_alpha = cf.express(&ext_d(&s.alpha())).unwrap();
    let tau = lin(&[(t.t(1), 2), (t.t(2), 3), (t.t(3), 4)]);
    let known = FrameTwoForm::wedge(&unit(0), &c.gamma).sub(&FrameTwoForm::wedge(&tau, &unit(2)));
    // -3 ν∧θ0
    let rest = d_beta.sub(&known);
    let nu_th0: Vec<Expr> = rest.coeffs().iter().map(|e| e.scale(-1, 3)).collect();
    let get = |a: usize, b: usize| {
        let i = crate::forms::pair_index(5, a, b);
        nu_th0[i].clone()
    };
    let u1 = get(1, 2).neg_ref();
    let u2 = get(1, 3).neg_ref();
    let nu = lin(&[(&u1, 2), (&u2, 3), (&t.t(2).neg_ref(), 4), (t.t(7), 0)]);
    let expected = FrameTwoForm::wedge(&nu, &unit(1));
    let mut residuals = Vec::new();
    for (p, (x, y)) in nu_th0.iter().zip(expected.coeffs()).enumerate() {
        let r = x.sub_ref(y);
        if !sampler.zero_test(&r).is_zero() {
            residuals.push((format!("dβ[{}]", pair_label(5, p)), r));
        }
    }
    for (p, (x, y)) in d_alpha.coeffs().iter().zip(d_beta.coeffs()).enumerate() {
        let r = x.sub_ref(&y.scale(2, 3));
        if !sampler.zero_test(&r).is_zero() {
            residuals.push((format!("dα-2/3dβ[{}]", pair_label(5, p)), r));
        }
    }
    Refined { u1, u2, residuals }
}

/// Torsion of the normalized section `T2 = 0`, `T4 = -1`.
#[derive(Clone, Debug, PartialEq)]
pub struct B2Torsion {
    pub w: [Expr; 3],
    pub g: [Expr; 4],
    pub h: Expr,
}

impl B2Torsion {
    pub fn named(&self) -> Vec<(String, Expr)> {
        let mut v: Vec<(String, Expr)> = (0..3).map(|k| (format!("W{k}"), self.w[k].clone())).collect();
        v.push(("H".into(), self.h.clone()));
        v.extend((0..4).map(|k| (format!("G{k}"), self.g[k].clone())));
        v
    }
}

#[derive(Clone, Debug)]
pub struct B2Section {
    pub coframe: Coframe,
    pub data: B1Data,
    pub torsion: B2Torsion,
    /// `-T4` of the section this one was normalized from.
    pub scale_square: Expr,
}

impl B2Section {
    pub fn alpha(&self) -> OneForm {
        self.coframe.combine(&self.data.connection.alpha)
    }

    pub fn beta(&self) -> OneForm {
        self.coframe.combine(&self.data.connection.beta)
    }

    /// `3α - 2β` by frame components.
    pub fn scale_form(&self) -> Vec<Expr> {
        let c = &self.data.connection;
        c.alpha
            .iter()
            .zip(&c.beta)
            .map(|(a, b)| a.scale(3, 1).sub_ref(&b.scale(2, 1)))
            .collect()
    }
}

/// Sign of `T4` over the sampler's points, after a symbolic zero test.
pub fn t4_signs(t4: &Expr, sampler: &Sampler) -> Result<SignCount, ReductionError> {
    match sampler.zero_test(t4) {
        ZeroVerdict::ProvenZero | ZeroVerdict::NumericallyZero { .. } => Err(ReductionError::Degenerate),
        ZeroVerdict::Unknown => Err(ReductionError::Undecided("T4".into())),
        ZeroVerdict::ProvenNonzero => Ok(sampler.signs(t4)),
    }
}

/// Moves along the fibre to `T2 = 0`, then rescales to `T4 = -1`.
pub fn reduce_to_b2(s: &B1Section, sampler: &Sampler) -> Result<B2Section, ReductionError> {
    if !s.is_variational(sampler) {
        return Err(ReductionError::NotVariational);
    }
    let t = &s.data.torsion;
    let signs = t4_signs(t.t(4), sampler)?;
    if signs.positive > 0 || signs.negative == 0 {
        return Err(ReductionError::Indefinite {
            positive: signs.positive,
            negative: signs.negative,
        });
    }
    let c = t.t(2).mul_ref(&t.t(4).try_inv().unwrap()).scale(5, 2);
    let f = s.coframe.forms();
    let c2 = c.mul_ref(&c);
    let c3 = c2.mul_ref(&c);
    let th1 = &f[2] + &f[1].scale(&c);
    let th2 = &(&f[3] + &f[2].scale(&c.scale(4, 3))) + &f[1].scale(&c2.scale(2, 3));
    let th3 = &(&(&f[4] + &f[3].scale(&c)) + &f[2].scale(&c2.scale(2, 3))) + &f[1].scale(&c3.scale(2, 9));
    let scale_square = t.t(4).neg_ref();
    let b = scale_square.sqrt();
    let forms = vec![
        f[0].clone(),
        f[1].scale(&b),
        th1.scale(&b),
        th2.scale(&b),
        th3.scale(&b),
    ];
    let coframe = Coframe::new(forms, sampler)?;
    let mut out = b2_from_coframe(coframe, sampler)?;
    out.scale_square = scale_square;
    Ok(out)
}

/// Reads `W`, `G`, `H` off a coframe that should already satisfy
/// `T2 = 0`, `T4 = -1`.
pub fn b2_from_coframe(coframe: Coframe, sampler: &Sampler) -> Result<B2Section, ReductionError> {
    let data = connection_and_torsion(&coframe, sampler)?;
    let t = &data.torsion;
    let check = |name: &str, e: Expr| -> Result<(), ReductionError> {
        if sampler.zero_test(&e).is_zero() {
            Ok(())
        } else {
            Err(ReductionError::Internal {
                identity: name.into(),
                residual: e.to_string(),
            })
        }
    };
    check("T2 = 0 after normalization", t.t(2).clone())?;
    check("T4 = -1 after normalization", t.t(4).add_ref(&Expr::one()))?;
    let c = &data.connection;
    let bma: Vec<Expr> = axpy(&c.beta, -2, &c.alpha);
    check("σ-component of β - 2α", bma[0].clone())?;
    check("θ3-component of β - 2α", bma[4].clone())?;
    let torsion = B2Torsion {
        w: [bma[1].clone(), bma[2].clone(), bma[3].clone()],
        g: std::array::from_fn(|k| c.gamma[k + 1].scale(-1, 3)),
        h: c.gamma[0].clone(),
    };
    Ok(B2Section {
        coframe,
        data,
        torsion,
        scale_square: Expr::one(),
    })
}

/// Weights of the scaling action `g_λ`: a quantity of weight `k` picks up `λ^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScalingWeights {
    /// σ, θ0, θ1, θ2, θ3.
    pub frame: [i32; 5],
    pub w: [i32; 3],
    pub h: i32,
    pub g: [i32; 4],
}

pub const SCALING_WEIGHTS: ScalingWeights = ScalingWeights {
    frame: [1, 2, 1, 0, -1],
    w: [-2, -1, 0],
    h: -2,
    g: [-3, -2, -1, 0],
};

/// `g_λ · (σ, θ0, θ1, θ2, θ3)`.
pub fn scale_coframe(cf: &Coframe, lambda: &Expr, sampler: &Sampler) -> Result<Coframe, ReductionError> {
    let forms = cf
        .forms()
        .iter()
        .zip(SCALING_WEIGHTS.frame)
        .map(|(f, k)| f.scale(&lambda.try_pow(k as i64).expect("λ is nonzero")))
        .collect();
    Ok(Coframe::new(forms, sampler)?)
}

/// Components along σ, θ2, θ3 of `dW1 - W1(3α-2β) - (G1-W0)σ - θ3/5`; all
/// vanish when `W2 ≡ 0`. The θ0, θ1 components are free.
pub fn dw1_residual(s: &B2Section) -> Vec<Expr> {
    let tw = &s.torsion;
    let dw1 = s.coframe.derivatives(&tw.w[1]);
    let k = s.scale_form();
    let mut r: Vec<Expr> = dw1
        .iter()
        .zip(&k)
        .map(|(d, k)| d.sub_ref(&tw.w[1].mul_ref(k)))
        .collect();
    r[0] = r[0].sub_ref(&tw.g[1].sub_ref(&tw.w[0]));
    r[4] = r[4].sub_ref(&Expr::rational(1, 5));
    vec![r[0].clone(), r[3].clone(), r[4].clone()]
}
