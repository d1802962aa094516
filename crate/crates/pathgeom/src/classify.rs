//! The decision ladder: variational, definite, metric-defining, geodesic.
//! Recovers the metric from a canonical section when the potential of
//! `3α - 2β` can be found.

use std::time::{Duration, Instant};

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use symexpr::{gcd::gcd, solve_relations, squarefree_factors, Expr, Poly, Sampler, Var, ZeroVerdict};
use thiserror::Error;

use crate::forms::{ext_d, Coframe, OneForm};
use crate::odeparse::{check_definite, render_primes, MetricInput, OdeInput};
use crate::reduction::{
    b2_from_coframe, dw1_residual, ode_chart, reduce_to_b1, reduce_to_b2, scale_coframe, B1Section, B2Section,
    ReductionError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("internal consistency failure in {identity}: residual {residual}")]
    Internal { identity: String, residual: String },
    #[error(transparent)]
    Reduction(ReductionError),
}

impl ClassifyError {
    fn internal(identity: impl Into<String>, residual: &Expr) -> ClassifyError {
        ClassifyError::Internal {
            identity: identity.into(),
            residual: render_primes(residual),
        }
    }
}

impl From<ReductionError> for ClassifyError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Internal { identity, residual } => ClassifyError::Internal { identity, residual },
            ReductionError::NotNormalized(r) => ClassifyError::Internal {
                identity: "structure equations".into(),
                residual: r
                    .into_iter()
                    .map(|(k, v)| format!("{k} = {v}"))
                    .collect::<Vec<_>>()
                    .join(", "),
            },
            other => ClassifyError::Reduction(other),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NotVariational,
    VariationalDegenerate,
    VariationalIndefinite,
    VariationalNotMetric,
    MetricNotGeodesic,
    SubRiemannian,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NotVariational => "NotVariational",
            Verdict::VariationalDegenerate => "VariationalDegenerate",
            Verdict::VariationalIndefinite => "VariationalIndefinite",
            Verdict::VariationalNotMetric => "VariationalNotMetric",
            Verdict::MetricNotGeodesic => "MetricNotGeodesic",
            Verdict::SubRiemannian => "SubRiemannian",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantEntry {
    pub expr: String,
    pub zero_verdict: String,
    #[serde(skip)]
    pub value: Expr,
    #[serde(skip)]
    pub verdict: ZeroVerdict,
}

/// Invariants in ladder order; serializes as a JSON object in that order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InvariantTable(pub Vec<(String, InvariantEntry)>);

impl InvariantTable {
    pub fn get(&self, name: &str) -> Option<&InvariantEntry> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn names(&self) -> Vec<&str> {
        self.0.iter().map(|(k, _)| k.as_str()).collect()
    }

    fn push(&mut self, name: &str, value: &Expr, sampler: &Sampler) -> ZeroVerdict {
        let verdict = sampler.zero_test(value);
        self.0.push((
            name.to_string(),
            InvariantEntry {
                expr: render_primes(value),
                zero_verdict: verdict.to_string(),
                value: value.clone(),
                verdict,
            },
        ));
        verdict
    }
}

impl Serialize for InvariantTable {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalStatus {
    /// The normalized section already has `3α - 2β = 0`.
    Canonical,
    /// Rescaled by a potential `m` with `d log m = 3α - 2β`.
    Rescaled,
    /// No potential found; only the conformal class is recovered and it is
    /// reported with `E = 1`.
    UpToScale,
    /// No metric: the ladder stopped before `W2 ≡ 0`.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveredMetric {
    #[serde(rename = "E")]
    pub e: String,
    #[serde(rename = "F")]
    pub f: String,
    #[serde(rename = "G")]
    pub g: String,
    /// `m` when the section was rescaled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    #[serde(skip)]
    pub input: MetricInput,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Telemetry {
    /// Size of `F` and of each stored invariant, in polynomial terms.
    pub rhs_size: usize,
    pub invariant_sizes: Vec<(String, usize)>,
    pub max_invariant_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub input: String,
    /// `None` when a gate could not be decided.
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub withheld: Option<String>,
    pub invariants: InvariantTable,
    pub metric: Option<RecoveredMetric>,
    pub canonical_scale_status: CanonicalStatus,
    pub warnings: Vec<String>,
    pub telemetry: Telemetry,
    #[serde(skip)]
    pub timings: Vec<(String, Duration)>,
}

impl ClassificationReport {
    pub fn is_withheld(&self) -> bool {
        self.verdict.is_none()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("y'''' = {}\n", self.input));
        match (self.verdict, &self.withheld) {
            (Some(v), _) => out.push_str(&format!("verdict: {}\n", v.as_str())),
            (None, Some(why)) => out.push_str(&format!("verdict: withheld ({why})\n")),
            (None, None) => out.push_str("verdict: withheld\n"),
        }
        out.push_str("invariants:\n");
        let width = self.invariants.0.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.invariants.0 {
            out.push_str(&format!("  {k:width$} = {}   [{}]\n", v.expr, v.zero_verdict));
        }
        if let Some(m) = &self.metric {
            out.push_str(&format!("metric: E = {}, F = {}, G = {}\n", m.e, m.f, m.g));
            if let Some(p) = &m.potential {
                out.push_str(&format!("scale potential: m = {p}\n"));
            }
        }
        let status = serde_json::to_value(self.canonical_scale_status).unwrap();
        out.push_str(&format!("canonical scale: {}\n", status.as_str().unwrap_or("")));
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

/// Outcome of a zero test used as a gate.
enum Gate {
    Zero,
    Nonzero,
    Withheld(String),
}

struct Ladder<'a> {
    sampler: &'a Sampler,
    strict: bool,
    report: ClassificationReport,
    started: Instant,
}

impl Ladder<'_> {
    fn record(&mut self, name: &str, value: &Expr) -> ZeroVerdict {
        self.report
            .telemetry
            .invariant_sizes
            .push((name.to_string(), value.size()));
        self.report.invariants.push(name, value, self.sampler)
    }

    fn lap(&mut self, stage: &str) {
        self.report.timings.push((stage.to_string(), self.started.elapsed()));
    }

    fn gate(&mut self, name: &str, v: ZeroVerdict) -> Gate {
        match v {
            ZeroVerdict::ProvenZero => Gate::Zero,
            ZeroVerdict::ProvenNonzero => Gate::Nonzero,
            ZeroVerdict::NumericallyZero { .. } => {
                let msg = format!("{name} is zero only by sampling ({v})");
                if self.strict {
                    Gate::Withheld(msg)
                } else {
                    self.report.warnings.push(msg);
                    Gate::Zero
                }
            }
            ZeroVerdict::Unknown => Gate::Withheld(format!("zero test for {name} is undecided")),
        }
    }

    /// Both zero, or the first nonzero, or withheld.
    fn gate_all(&mut self, items: &[(&str, ZeroVerdict)]) -> Gate {
        let mut withheld = None;
        for &(name, v) in items {
            match self.gate(name, v) {
                Gate::Nonzero => return Gate::Nonzero,
                Gate::Withheld(m) => withheld = withheld.or(Some(m)),
                Gate::Zero => {}
            }
        }
        withheld.map_or(Gate::Zero, Gate::Withheld)
    }

    fn finish(mut self, verdict: Option<Verdict>, withheld: Option<String>) -> ClassificationReport {
        self.lap("total");
        self.report.verdict = verdict;
        self.report.withheld = withheld;
        self.report.telemetry.max_invariant_size = self
            .report
            .telemetry
            .invariant_sizes
            .iter()
            .map(|(_, s)| *s)
            .max()
            .unwrap_or(0);
        self.report
    }

    fn require_zero(&self, identity: &str, e: &Expr) -> Result<(), ClassifyError> {
        if self.sampler.zero_test(e).is_zero() {
            Ok(())
        } else {
            Err(ClassifyError::internal(identity, e))
        }
    }
}

/// Runs the ladder on `y'''' = F`. Under `strict`, gates that are zero only
/// by sampling withhold the verdict instead of warning.
pub fn classify(ode: &OdeInput, sampler: &Sampler, strict: bool) -> Result<ClassificationReport, ClassifyError> {
    let mut l = Ladder {
        sampler,
        strict,
        started: Instant::now(),
        report: ClassificationReport {
            input: render_primes(&ode.rhs),
            verdict: None,
            withheld: None,
            invariants: InvariantTable::default(),
            metric: None,
            canonical_scale_status: CanonicalStatus::NotApplicable,
            warnings: Vec::new(),
            telemetry: Telemetry {
                rhs_size: ode.rhs.size(),
                ..Telemetry::default()
            },
            timings: Vec::new(),
        },
    };
    let b1 = match reduce_to_b1(ode, sampler) {
        Ok(b) => b,
        Err(ReductionError::Undecided(what)) => {
            return Ok(l.finish(None, Some(format!("zero test for {what} is undecided"))))
        }
        Err(e) => return Err(e.into()),
    };
    l.lap("b1");
    let t = b1.torsion().clone();
    let i1 = l.record("I1", &t.i1);
    let t5 = l.record("T5", t.t(5));
    l.record("T8", t.t(8));
    let t4 = l.record("T4", t.t(4));
    l.record("T3", t.t(3));
    l.record("T2", t.t(2));
    l.record("T1", t.t(1));
    l.record("I0", &t.i0);
    l.record("T6", t.t(6));
    l.record("T7", t.t(7));
    match l.gate_all(&[("I1", i1), ("T5", t5)]) {
        Gate::Nonzero => return Ok(l.finish(Some(Verdict::NotVariational), None)),
        Gate::Withheld(m) => return Ok(l.finish(None, Some(m))),
        Gate::Zero => {}
    }
    check_variational_identities(&l, &b1)?;
    if let Some(r) = &b1.refined {
        l.record("U1", &r.u1);
        l.record("U2", &r.u2);
    }
    match l.gate("T4", t4) {
        Gate::Zero => return Ok(l.finish(Some(Verdict::VariationalDegenerate), None)),
        Gate::Withheld(m) => return Ok(l.finish(None, Some(m))),
        Gate::Nonzero => {}
    }
    let signs = sampler.signs(t.t(4));
    if signs.positive > 0 || signs.negative == 0 {
        return Ok(l.finish(Some(Verdict::VariationalIndefinite), None));
    }
    let b2 = reduce_to_b2(&b1, sampler)?;
    l.lap("b2");
    let w: Vec<ZeroVerdict> = (0..3).map(|k| l.record(&format!("W{k}"), &b2.torsion.w[k])).collect();
    l.record("H", &b2.torsion.h);
    for k in 0..4 {
        l.record(&format!("G{k}"), &b2.torsion.g[k]);
    }
    match l.gate("W2", w[2]) {
        Gate::Nonzero => return Ok(l.finish(Some(Verdict::VariationalNotMetric), None)),
        Gate::Withheld(m) => return Ok(l.finish(None, Some(m))),
        Gate::Zero => {}
    }
    check_metric_identities(&l, &b2)?;
    let geodesic = b2.torsion.g[1].sub_ref(&b2.torsion.w[0].scale(2, 1));
    let geodesic_verdict = sampler.zero_test(&geodesic);
    let verdict = match l.gate("G1 - 2W0", geodesic_verdict) {
        Gate::Nonzero => Verdict::MetricNotGeodesic,
        Gate::Withheld(m) => return Ok(l.finish(None, Some(m))),
        Gate::Zero => Verdict::SubRiemannian,
    };
    let canonical = canonical_section(&b2, sampler)?;
    l.lap("canonical");
    let metric = emit_metric(&canonical, sampler)?;
    if let Err(why) = check_definite(&metric.input, sampler) {
        return Err(ClassifyError::Internal {
            identity: "recovered metric is positive definite".into(),
            residual: why,
        });
    }
    l.report.canonical_scale_status = canonical.status;
    l.report.metric = Some(metric);
    Ok(l.finish(Some(verdict), None))
}

fn check_variational_identities(l: &Ladder, b1: &B1Section) -> Result<(), ClassifyError> {
    let t = b1.torsion();
    l.require_zero("I1 = T5 = 0 implies T8 = 0", t.t(8))?;
    l.require_zero("T3 + 3/5 T4 = 0", &t.t(3).add_ref(&t.t(4).scale(3, 5)))?;
    if let Some(r) = &b1.refined {
        if let Some((name, res)) = r.residuals.first() {
            return Err(ClassifyError::internal(
                format!("refined structure equation {name}"),
                res,
            ));
        }
    }
    Ok(())
}

fn check_metric_identities(l: &Ladder, b2: &B2Section) -> Result<(), ClassifyError> {
    let tw = &b2.torsion;
    l.require_zero("W2 = 0 implies G3 = 0", &tw.g[3])?;
    l.require_zero("W2 = 0 implies G2 = W1", &tw.g[2].sub_ref(&tw.w[1]))?;
    for (r, label) in dw1_residual(b2).iter().zip(["σ", "θ2", "θ3"]) {
        l.require_zero(&format!("dW1 expansion, {label} component"), r)?;
    }
    Ok(())
}

/// A normalized section with `3α - 2β = 0` when a potential was found.
#[derive(Clone, Debug)]
pub struct CanonicalSection {
    pub section: B2Section,
    pub potential: Option<Expr>,
    pub status: CanonicalStatus,
}

/// Coordinate components of `3α - 2β`.
fn scale_one_form(s: &B2Section) -> OneForm {
    s.coframe.combine(&s.scale_form())
}

/// Reduces a polynomial list to pairwise coprime non-constant factors.
fn coprime_basis(polys: Vec<Poly>) -> Vec<Poly> {
    let mut basis: Vec<Poly> = Vec::new();
    let mut queue = polys;
    while let Some(p) = queue.pop() {
        if p.as_constant().is_some() {
            continue;
        }
        let mut split = None;
        for (i, b) in basis.iter().enumerate() {
            let g = gcd(&p, b);
            if g.as_constant().is_none() {
                split = Some((i, g));
                break;
            }
        }
        match split {
            None => basis.push(p.sign_normalized()),
            Some((i, g)) => {
                let b = basis.swap_remove(i);
                queue.push(p.div_exact(&g).unwrap());
                queue.push(b.div_exact(&g).unwrap());
                queue.push(g);
            }
        }
    }
    basis.sort_by_key(|p| Expr::from_poly(p.clone()).to_string());
    basis.dedup();
    basis
}

/// `m = Π f_i^{c_i}` with `2c_i` integral and `d log m = κ`, by matching
/// monomial coefficients of the cleared equations.
pub fn log_potential(kappa: &OneForm, extra: &[Expr], sampler: &Sampler) -> Option<Expr> {
    let mut candidates = Vec::new();
    for c in kappa.coeffs().iter().chain(extra) {
        candidates.extend(squarefree_factors(c.den()).into_iter().map(|(f, _)| f));
        candidates.extend(squarefree_factors(c.num()).into_iter().map(|(f, _)| f));
    }
    // Factors that only enter the numerators cannot appear in d log m, but
    // extra hints may carry them.
    let basis = coprime_basis(candidates);
    if basis.is_empty() {
        return None;
    }
    let chart = kappa.chart();
    let syms: Vec<Var> = (0..basis.len()).map(|i| Var::symbol(&format!("_pot{i}"))).collect();
    let mut rows = Vec::new();
    for (j, v) in chart.vars().iter().enumerate() {
        let mut e = kappa.coeff(j).clone();
        for (f, c) in basis.iter().zip(&syms) {
            let fe = Expr::from_poly(f.clone());
            let dlog = fe.diff(*v).try_div(&fe).ok()?;
            e = e.sub_ref(&Expr::var(*c).mul_ref(&dlog));
        }
        let num = e.num();
        // Group by the monomial in chart variables; each group is a linear
        // form in the unknown exponents.
        let mut groups: Vec<(symexpr::Mono, Expr)> = Vec::new();
        for (mono, coef) in num.terms() {
            let mut key = symexpr::Mono::one();
            let mut lin = Expr::from_int(coef.clone());
            for (var, k) in mono.pows() {
                if syms.contains(var) {
                    lin = lin.mul_ref(&Expr::var(*var).pow(*k as i64));
                } else {
                    key = key.mul(&symexpr::Mono::var(*var, *k));
                }
            }
            match groups.iter_mut().find(|(m, _)| *m == key) {
                Some((_, acc)) => *acc = acc.add_ref(&lin),
                None => groups.push((key, lin)),
            }
        }
        rows.extend(groups.into_iter().map(|(_, e)| e));
    }
    let sol = solve_relations(&rows, &syms, sampler).ok()?;
    let mut m = Expr::one();
    for (f, c) in basis.iter().zip(&sol) {
        let (n, d) = c.as_rational()?;
        let twice = Expr::from_int(n * symexpr::Int::from(2))
            .try_div(&Expr::from_int(d))
            .ok()?;
        let (k, one) = twice.as_rational()?;
        if one != symexpr::Int::from(1) {
            return None;
        }
        let k = i64::try_from(k).ok()?;
        let mut fe = Expr::from_poly(f.clone());
        if sampler.signs(&fe).positive == 0 {
            fe = fe.neg_ref();
        }
        m = m.mul_ref(&fe.pow(k.div_euclid(2)));
        if k.rem_euclid(2) == 1 {
            m = m.mul_ref(&fe.sqrt());
        }
    }
    let check = OneForm::exact(chart, &m);
    for (j, dm) in check.coeffs().iter().enumerate() {
        let r = dm.sub_ref(&m.mul_ref(kappa.coeff(j)));
        if !sampler.zero_test(&r).is_zero() {
            return None;
        }
    }
    Some(m)
}

/// Rescales a section with `W2 ≡ 0` to `3α - 2β = 0` when a potential for
/// `3α - 2β` exists among products of powers of the factors appearing in it.
pub fn canonical_section(s: &B2Section, sampler: &Sampler) -> Result<CanonicalSection, ClassifyError> {
    let kappa = scale_one_form(s);
    if kappa.is_zero(sampler) {
        return Ok(CanonicalSection {
            section: s.clone(),
            potential: Some(Expr::one()),
            status: CanonicalStatus::Canonical,
        });
    }
    let dk = ext_d(&kappa);
    for (p, c) in dk.pair_coeffs().iter().enumerate() {
        if !sampler.zero_test(c).is_zero() {
            return Err(ClassifyError::internal(format!("d(3α - 2β) = 0, pair {p}"), c));
        }
    }
    let Some(m) = log_potential(&kappa, std::slice::from_ref(&s.scale_square), sampler) else {
        return Ok(CanonicalSection {
            section: s.clone(),
            potential: None,
            status: CanonicalStatus::UpToScale,
        });
    };
    let coframe = scale_coframe(&s.coframe, &m, sampler)?;
    let mut rescaled = b2_from_coframe(coframe, sampler)?;
    rescaled.scale_square = s.scale_square.clone();
    for (k, c) in rescaled.scale_form().iter().enumerate() {
        if !sampler.zero_test(c).is_zero() {
            return Err(ClassifyError::internal(
                format!("3α - 2β = 0 after rescaling, component {k}"),
                c,
            ));
        }
    }
    let tw = &rescaled.torsion;
    let alpha = &rescaled.data.connection.alpha;
    let expected = [
        Expr::zero(),
        tw.w[0].scale(-2, 1),
        tw.w[1].scale(-2, 1),
        tw.w[2].scale(-2, 1),
        Expr::zero(),
    ];
    for (k, (a, e)) in alpha.iter().zip(&expected).enumerate() {
        let r = a.sub_ref(e);
        if !sampler.zero_test(&r).is_zero() {
            return Err(ClassifyError::internal(
                format!("α = -2(W0θ0 + W1θ1) on the canonical section, component {k}"),
                &r,
            ));
        }
    }
    Ok(CanonicalSection {
        section: rescaled,
        potential: Some(m),
        status: CanonicalStatus::Rescaled,
    })
}

/// `a` with its `dy0` component removed using `θ0`.
fn reduce_mod_contact(a: &OneForm, theta0: &OneForm) -> OneForm {
    let f = a.coeff(1).try_div(theta0.coeff(1)).expect("θ0 has a dy component");
    a - &theta0.scale(&f)
}

/// `σ² + θ1²` modulo `θ0` as `(E, F, G)` over `(x, y, z)`.
pub fn emit_metric(c: &CanonicalSection, sampler: &Sampler) -> Result<RecoveredMetric, ClassifyError> {
    let s = &c.section;
    let w2 = &s.torsion.w[2];
    if !sampler.zero_test(w2).is_zero() {
        return Err(ClassifyError::internal("W2 = 0 before emitting a metric", w2));
    }
    let cf: &Coframe = &s.coframe;
    let theta0 = cf.form(1);
    let sigma = reduce_mod_contact(cf.form(0), theta0);
    let theta1 = reduce_mod_contact(cf.form(2), theta0);
    for (name, f) in [("σ", &sigma), ("θ1", &theta1)] {
        for (k, label) in [(3, "dy2"), (4, "dy3")] {
            let r = f.coeff(k);
            if !sampler.zero_test(r).is_zero() {
                return Err(ClassifyError::internal(
                    format!("{name} mod θ0 has no {label} component"),
                    r,
                ));
            }
        }
    }
    let (sx, sz) = (sigma.coeff(0), sigma.coeff(2));
    let (tx, tz) = (theta1.coeff(0), theta1.coeff(2));
    let mut e = sx.mul_ref(sx).add_ref(&tx.mul_ref(tx));
    let mut f = sx.mul_ref(sz).add_ref(&tx.mul_ref(tz)).scale(2, 1);
    let mut g = sz.mul_ref(sz).add_ref(&tz.mul_ref(tz));
    if c.status == CanonicalStatus::UpToScale {
        let inv = e.try_inv().map_err(|_| ClassifyError::internal("E is nonzero", &e))?;
        f = f.mul_ref(&inv);
        g = g.mul_ref(&inv);
        e = Expr::one();
    }
    let chart = ode_chart();
    let jets: Vec<Var> = chart.vars().to_vec();
    for (name, comp) in [("E", &e), ("F", &f), ("G", &g)] {
        for v in &jets[3..] {
            let d = comp.diff(*v);
            if !sampler.zero_test(&d).is_zero() {
                return Err(ClassifyError::internal(
                    format!(
                        "metric coefficient {name} is independent of {}",
                        crate::odeparse::prime_name(*v).unwrap_or_default()
                    ),
                    &d,
                ));
            }
        }
    }
    let map = [(jets[1], Expr::symbol("y")), (jets[2], Expr::symbol("z"))];
    let input = MetricInput {
        e: e.subs(&map),
        f: f.subs(&map),
        g: g.subs(&map),
    };
    Ok(RecoveredMetric {
        e: input.e.to_string(),
        f: input.f.to_string(),
        g: input.g.to_string(),
        potential: c
            .potential
            .as_ref()
            .filter(|_| c.status == CanonicalStatus::Rescaled)
            .map(render_primes),
        input,
    })
}
