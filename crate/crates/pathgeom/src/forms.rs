//! One- and two-forms over a chart, coframes and Pfaffian ideals.
//!
//! Forms are stored in the coordinate cobasis. Coframe components are
//! computed on demand through the inverse coefficient matrix.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use symexpr::{invert, Chart, Expr, Sampler, SolveError, ZeroVerdict};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormsError {
    #[error("forms live on different charts (`{0}` and `{1}`)")]
    ChartMismatch(String, String),
    #[error("expected {expected} coefficients, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("coframe is singular: {0}")]
    SingularCoframe(SolveError),
    #[error("ideal generators are dependent modulo the coframe")]
    DependentGenerators,
}

/// Index of the pair `(i, j)`, `i < j`, in lexicographic pair order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// All pairs `(i, j)` with `i < j < n` in storage order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<(), FormsError> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(FormsError::ChartMismatch(a.name().into(), b.name().into()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    chart: Arc<Chart>,
    coeffs: Vec<Expr>,
}

impl OneForm {
    pub fn new(chart: &Arc<Chart>, coeffs: Vec<Expr>) -> Result<OneForm, FormsError> {
        if coeffs.len() != chart.dim() {
            return Err(FormsError::Dimension {
                expected: chart.dim(),
                got: coeffs.len(),
            });
        }
        Ok(OneForm {
            chart: chart.clone(),
            coeffs,
        })
    }

    pub fn zero(chart: &Arc<Chart>) -> OneForm {
        OneForm {
            chart: chart.clone(),
            coeffs: vec![Expr::zero(); chart.dim()],
        }
    }

    /// The coordinate differential `d(chart var i)`.
    pub fn coordinate(chart: &Arc<Chart>, i: usize) -> OneForm {
        let mut f = OneForm::zero(chart);
        f.coeffs[i] = Expr::one();
        f
    }

    /// `df`.
    pub fn exact(chart: &Arc<Chart>, f: &Expr) -> OneForm {
        OneForm {
            chart: chart.clone(),
            coeffs: chart.vars().iter().map(|v| f.diff(*v)).collect(),
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &Expr {
        &self.coeffs[i]
    }

    pub fn scale(&self, f: &Expr) -> OneForm {
        OneForm {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().map(|c| c.mul_ref(f)).collect(),
        }
    }

    /// True when every coefficient is zero by the sampler's verdict.
    pub fn is_zero(&self, sampler: &Sampler) -> bool {
        self.coeffs.iter().all(|c| sampler.zero_test(c).is_zero())
    }

    /// Substitutes values for symbols in every coefficient.
    pub fn subs(&self, map: &[(symexpr::Var, Expr)]) -> OneForm {
        OneForm {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().map(|c| c.subs(map)).collect(),
        }
    }

    fn zip(&self, o: &OneForm, f: impl Fn(&Expr, &Expr) -> Expr) -> OneForm {
        same_chart(&self.chart, &o.chart).expect("one-forms on different charts");
        OneForm {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

impl Add for &OneForm {
    type Output = OneForm;
    fn add(self, o: &OneForm) -> OneForm {
        self.zip(o, Expr::add_ref)
    }
}

impl Sub for &OneForm {
    type Output = OneForm;
    fn sub(self, o: &OneForm) -> OneForm {
        self.zip(o, Expr::sub_ref)
    }
}

impl Neg for &OneForm {
    type Output = OneForm;
    fn neg(self) -> OneForm {
        self.scale(&Expr::int(-1))
    }
}

impl Mul<&OneForm> for &Expr {
    type Output = OneForm;
    fn mul(self, a: &OneForm) -> OneForm {
        a.scale(self)
    }
}

/// Antisymmetric table stored on pairs `i < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    chart: Arc<Chart>,
    coeffs: Vec<Expr>,
}

impl TwoForm {
    pub fn zero(chart: &Arc<Chart>) -> TwoForm {
        let n = chart.dim();
        TwoForm {
            chart: chart.clone(),
            coeffs: vec![Expr::zero(); n * (n - 1) / 2],
        }
    }

    /// From the upper-triangle coefficients in [`pairs`] order.
    pub fn from_pairs(chart: &Arc<Chart>, coeffs: Vec<Expr>) -> Result<TwoForm, FormsError> {
        let n = chart.dim();
        if coeffs.len() != n * (n - 1) / 2 {
            return Err(FormsError::Dimension {
                expected: n * (n - 1) / 2,
                got: coeffs.len(),
            });
        }
        Ok(TwoForm {
            chart: chart.clone(),
            coeffs,
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    /// Coefficient on `dx_i ∧ dx_j`; antisymmetric in `(i, j)`.
    pub fn coeff(&self, i: usize, j: usize) -> Expr {
        let n = self.chart.dim();
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.coeffs[pair_index(n, i, j)].clone(),
            std::cmp::Ordering::Greater => self.coeffs[pair_index(n, j, i)].neg_ref(),
            std::cmp::Ordering::Equal => Expr::zero(),
        }
    }

    pub fn pair_coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn scale(&self, f: &Expr) -> TwoForm {
        TwoForm {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().map(|c| c.mul_ref(f)).collect(),
        }
    }

    pub fn is_zero(&self, sampler: &Sampler) -> bool {
        self.coeffs.iter().all(|c| sampler.zero_test(c).is_zero())
    }

    fn zip(&self, o: &TwoForm, f: impl Fn(&Expr, &Expr) -> Expr) -> TwoForm {
        same_chart(&self.chart, &o.chart).expect("two-forms on different charts");
        TwoForm {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

impl Add for &TwoForm {
    type Output = TwoForm;
    fn add(self, o: &TwoForm) -> TwoForm {
        self.zip(o, Expr::add_ref)
    }
}

impl Sub for &TwoForm {
    type Output = TwoForm;
    fn sub(self, o: &TwoForm) -> TwoForm {
        self.zip(o, Expr::sub_ref)
    }
}

impl Neg for &TwoForm {
    type Output = TwoForm;
    fn neg(self) -> TwoForm {
        self.scale(&Expr::int(-1))
    }
}

pub fn wedge(a: &OneForm, b: &OneForm) -> Result<TwoForm, FormsError> {
    same_chart(&a.chart, &b.chart)?;
    let n = a.chart.dim();
    let coeffs = pairs(n)
        .map(|(i, j)| {
            a.coeffs[i]
                .mul_ref(&b.coeffs[j])
                .sub_ref(&a.coeffs[j].mul_ref(&b.coeffs[i]))
        })
        .collect();
    Ok(TwoForm {
        chart: a.chart.clone(),
        coeffs,
    })
}

pub fn ext_d(a: &OneForm) -> TwoForm {
    let vars = a.chart.vars();
    let n = vars.len();
    let coeffs = pairs(n)
        .map(|(i, j)| a.coeffs[j].diff(vars[i]).sub_ref(&a.coeffs[i].diff(vars[j])))
        .collect();
    TwoForm {
        chart: a.chart.clone(),
        coeffs,
    }
}

/// Two-form components on the pairs `e_A ∧ e_B`, `A < B`, of a coframe.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameTwoForm {
    n: usize,
    coeffs: Vec<Expr>,
}

impl FrameTwoForm {
    pub fn zero(n: usize) -> FrameTwoForm {
        FrameTwoForm {
            n,
            coeffs: vec![Expr::zero(); n * (n - 1) / 2],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, a: usize, b: usize) -> Expr {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => self.coeffs[pair_index(self.n, a, b)].clone(),
            std::cmp::Ordering::Greater => self.coeffs[pair_index(self.n, b, a)].neg_ref(),
            std::cmp::Ordering::Equal => Expr::zero(),
        }
    }

    /// Adds `c` to the coefficient of `e_a ∧ e_b`.
    pub fn add_to(&mut self, a: usize, b: usize, c: &Expr) {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => {
                let k = pair_index(self.n, a, b);
                self.coeffs[k] = self.coeffs[k].add_ref(c);
            }
            std::cmp::Ordering::Greater => {
                let k = pair_index(self.n, b, a);
                self.coeffs[k] = self.coeffs[k].sub_ref(c);
            }
            std::cmp::Ordering::Equal => {}
        }
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    /// `a ∧ b` for frame components `a`, `b`.
    pub fn wedge(a: &[Expr], b: &[Expr]) -> FrameTwoForm {
        let n = a.len();
        let coeffs = pairs(n)
            .map(|(i, j)| a[i].mul_ref(&b[j]).sub_ref(&a[j].mul_ref(&b[i])))
            .collect();
        FrameTwoForm { n, coeffs }
    }

    pub fn sub(&self, o: &FrameTwoForm) -> FrameTwoForm {
        FrameTwoForm {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sub_ref(b)).collect(),
        }
    }

    pub fn add(&self, o: &FrameTwoForm) -> FrameTwoForm {
        FrameTwoForm {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add_ref(b)).collect(),
        }
    }
}

/// An ordered coframe together with its dual frame.
#[derive(Clone, Debug)]
pub struct Coframe {
    chart: Arc<Chart>,
    forms: Vec<OneForm>,
    /// `dual[i][a]`: component of the frame vector `e_a` along `∂_i`.
    dual: Vec<Vec<Expr>>,
    minors: OnceLock<Vec<Vec<Expr>>>,
}

impl Coframe {
    pub fn new(forms: Vec<OneForm>, sampler: &Sampler) -> Result<Coframe, FormsError> {
        let Some(first) = forms.first() else {
            return Err(FormsError::Dimension { expected: 1, got: 0 });
        };
        let chart = first.chart.clone();
        for f in &forms {
            same_chart(&chart, &f.chart)?;
        }
        if forms.len() != chart.dim() {
            return Err(FormsError::Dimension {
                expected: chart.dim(),
                got: forms.len(),
            });
        }
        // Rows are forms, columns coordinates; the inverse has frame vectors
        // as columns.
        let m: Vec<Vec<Expr>> = forms.iter().map(|f| f.coeffs.clone()).collect();
        let dual = invert(&m, sampler).map_err(FormsError::SingularCoframe)?;
        Ok(Coframe {
            chart,
            forms,
            dual,
            minors: OnceLock::new(),
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn forms(&self) -> &[OneForm] {
        &self.forms
    }

    pub fn form(&self, a: usize) -> &OneForm {
        &self.forms[a]
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    /// Coordinate components of the frame vector dual to `e^a`.
    pub fn dual_vector(&self, a: usize) -> Vec<Expr> {
        self.dual.iter().map(|row| row[a].clone()).collect()
    }

    /// `e_a(f)`, i.e. the frame components of `df`.
    pub fn derivatives(&self, f: &Expr) -> Vec<Expr> {
        let df: Vec<Expr> = self.chart.vars().iter().map(|v| f.diff(*v)).collect();
        self.components_of(&df)
    }

    /// Components of a one-form in this coframe.
    pub fn components(&self, a: &OneForm) -> Vec<Expr> {
        self.components_of(&a.coeffs)
    }

    fn components_of(&self, coeffs: &[Expr]) -> Vec<Expr> {
        (0..self.len())
            .map(|a| {
                coeffs
                    .iter()
                    .zip(&self.dual)
                    .filter(|(c, _)| !c.is_zero_poly())
                    .map(|(c, row)| c.mul_ref(&row[a]))
                    .sum()
            })
            .collect()
    }

    /// `Σ c_a e^a` as a coordinate one-form.
    pub fn combine(&self, c: &[Expr]) -> OneForm {
        let mut coeffs = vec![Expr::zero(); self.chart.dim()];
        for (ca, f) in c.iter().zip(&self.forms) {
            if ca.is_zero_poly() {
                continue;
            }
            for (k, fk) in f.coeffs.iter().enumerate() {
                if !fk.is_zero_poly() {
                    coeffs[k] = coeffs[k].add_ref(&ca.mul_ref(fk));
                }
            }
        }
        OneForm {
            chart: self.chart.clone(),
            coeffs,
        }
    }

    fn minors(&self) -> &Vec<Vec<Expr>> {
        self.minors.get_or_init(|| {
            let n = self.len();
            pairs(n)
                .map(|(i, j)| {
                    pairs(n)
                        .map(|(a, b)| {
                            let d = &self.dual;
                            d[i][a].mul_ref(&d[j][b]).sub_ref(&d[j][a].mul_ref(&d[i][b]))
                        })
                        .collect()
                })
                .collect()
        })
    }

    /// Components of `w` on `e^a ∧ e^b`, `a < b`.
    pub fn express(&self, w: &TwoForm) -> Result<FrameTwoForm, FormsError> {
        same_chart(&self.chart, &w.chart)?;
        let n = self.len();
        let minors = self.minors();
        let mut out = FrameTwoForm::zero(n);
        for (k, wk) in w.coeffs.iter().enumerate() {
            if wk.is_zero_poly() {
                continue;
            }
            for (p, m) in minors[k].iter().enumerate() {
                if !m.is_zero_poly() {
                    out.coeffs[p] = out.coeffs[p].add_ref(&wk.mul_ref(m));
                }
            }
        }
        Ok(out)
    }

    /// `Σ c_ab e^a ∧ e^b` as a coordinate two-form.
    pub fn reconstruct(&self, c: &FrameTwoForm) -> TwoForm {
        let mut out = TwoForm::zero(&self.chart);
        for ((a, b), cab) in pairs(self.len()).zip(&c.coeffs) {
            if cab.is_zero_poly() {
                continue;
            }
            let w = wedge(&self.forms[a], &self.forms[b]).expect("same chart");
            out = &out + &w.scale(cab);
        }
        out
    }

    /// `d(e^a)` in this coframe.
    pub fn structure(&self, a: usize) -> FrameTwoForm {
        self.express(&ext_d(&self.forms[a])).expect("same chart")
    }
}

/// Free expression of a two-form in a coframe; alias of [`Coframe::express`].
pub fn express_in_coframe(w: &TwoForm, cf: &Coframe) -> Result<FrameTwoForm, FormsError> {
    cf.express(w)
}

#[derive(Clone, Debug)]
pub struct PfaffianIdeal {
    generators: Vec<OneForm>,
}

impl PfaffianIdeal {
    pub fn new(generators: Vec<OneForm>) -> PfaffianIdeal {
        PfaffianIdeal { generators }
    }

    /// The ideal spanned by coframe members `idx`.
    pub fn from_coframe(cf: &Coframe, idx: &[usize]) -> PfaffianIdeal {
        PfaffianIdeal {
            generators: idx.iter().map(|&i| cf.forms[i].clone()).collect(),
        }
    }

    pub fn generators(&self) -> &[OneForm] {
        &self.generators
    }
}

fn decided_nonzero(e: &Expr, sampler: &Sampler) -> bool {
    !e.is_zero_poly() && matches!(sampler.zero_test(e), ZeroVerdict::ProvenNonzero)
}

/// The representative of `w` modulo the ideal that only involves coframe
/// members outside the ideal's pivot set.
pub fn reduce_mod(w: &TwoForm, ideal: &PfaffianIdeal, cf: &Coframe, sampler: &Sampler) -> Result<TwoForm, FormsError> {
    let c = cf.express(w)?;
    let r = reduce_frame_mod(&c, ideal, cf, sampler)?;
    Ok(cf.reconstruct(&r))
}

/// [`reduce_mod`] on frame components.
pub fn reduce_frame_mod(
    c: &FrameTwoForm,
    ideal: &PfaffianIdeal,
    cf: &Coframe,
    sampler: &Sampler,
) -> Result<FrameTwoForm, FormsError> {
    let n = cf.len();
    let mut rows: Vec<Vec<Expr>> = Vec::new();
    for g in &ideal.generators {
        same_chart(&cf.chart, &g.chart)?;
        rows.push(cf.components(g));
    }
    // Reduced row echelon form; each row then reads e_p + Σ r_j e_j ∈ I.
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..n {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&k| decided_nonzero(&rows[k][col], sampler)) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].try_inv().expect("pivot is nonzero");
        rows[r] = rows[r].iter().map(|e| e.mul_ref(&inv)).collect();
        for k in 0..rows.len() {
            if k != r && !rows[k][col].is_zero_poly() {
                let f = rows[k][col].clone();
                let pr = rows[r].clone();
                for (x, y) in rows[k].iter_mut().zip(&pr) {
                    *x = x.sub_ref(&f.mul_ref(y));
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if pivots.len() != rows.len() {
        return Err(FormsError::DependentGenerators);
    }
    // Image of each basis element in the quotient, as a frame vector.
    let image: Vec<Vec<Expr>> = (0..n)
        .map(|a| match pivots.iter().position(|&p| p == a) {
            Some(k) => (0..n)
                .map(|j| {
                    if pivots.contains(&j) {
                        Expr::zero()
                    } else {
                        rows[k][j].neg_ref()
                    }
                })
                .collect(),
            None => (0..n)
                .map(|j| if j == a { Expr::one() } else { Expr::zero() })
                .collect(),
        })
        .collect();
    let mut out = FrameTwoForm::zero(n);
    for ((a, b), cab) in pairs(n).zip(&c.coeffs) {
        if cab.is_zero_poly() {
            continue;
        }
        if !pivots.contains(&a) && !pivots.contains(&b) {
            out.add_to(a, b, cab);
            continue;
        }
        let w = FrameTwoForm::wedge(&image[a], &image[b]);
        for ((i, j), x) in pairs(n).zip(&w.coeffs) {
            if !x.is_zero_poly() {
                out.add_to(i, j, &cab.mul_ref(x));
            }
        }
    }
    Ok(out)
}
