//! Sparse multivariate polynomials over Z in graded-lex order.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use dashu_int::ops::{DivRem, Gcd};
use dashu_int::IBig;
use smallvec::SmallVec;

use crate::var::Var;

pub type Int = IBig;

/// Power product, sorted by variable with positive exponents only.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Mono {
    deg: u32,
    pows: SmallVec<[(Var, u32); 4]>,
}

impl Mono {
    pub fn one() -> Mono {
        Mono::default()
    }

    pub fn var(v: Var, e: u32) -> Mono {
        if e == 0 {
            return Mono::one();
        }
        let mut pows = SmallVec::new();
        pows.push((v, e));
        Mono { deg: e, pows }
    }

    pub fn is_one(&self) -> bool {
        self.pows.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn pows(&self) -> &[(Var, u32)] {
        &self.pows
    }

    pub fn exp(&self, v: Var) -> u32 {
        match self.pows.binary_search_by(|(w, _)| w.cmp(&v)) {
            Ok(i) => self.pows[i].1,
            Err(_) => 0,
        }
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        if o.is_one() {
            return self.clone();
        }
        if self.is_one() {
            return o.clone();
        }
        let mut pows = SmallVec::with_capacity(self.pows.len() + o.pows.len());
        let (mut i, mut j) = (0, 0);
        while i < self.pows.len() && j < o.pows.len() {
            let (a, b) = (self.pows[i], o.pows[j]);
            match a.0.cmp(&b.0) {
                Ordering::Less => {
                    pows.push(a);
                    i += 1;
                }
                Ordering::Greater => {
                    pows.push(b);
                    j += 1;
                }
                Ordering::Equal => {
                    pows.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        pows.extend_from_slice(&self.pows[i..]);
        pows.extend_from_slice(&o.pows[j..]);
        Mono {
            deg: self.deg + o.deg,
            pows,
        }
    }

    /// `self / o` when `o` divides `self`.
    pub fn div(&self, o: &Mono) -> Option<Mono> {
        if o.deg > self.deg {
            return None;
        }
        let mut pows = SmallVec::with_capacity(self.pows.len());
        let mut j = 0;
        for &(v, e) in &self.pows {
            if j < o.pows.len() && o.pows[j].0 < v {
                return None;
            }
            if j < o.pows.len() && o.pows[j].0 == v {
                let f = o.pows[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => pows.push((v, e - f)),
                }
            } else {
                pows.push((v, e));
            }
        }
        if j < o.pows.len() {
            return None;
        }
        Some(Mono {
            deg: self.deg - o.deg,
            pows,
        })
    }

    pub fn gcd(&self, o: &Mono) -> Mono {
        let mut pows = SmallVec::new();
        let mut deg = 0;
        let (mut i, mut j) = (0, 0);
        while i < self.pows.len() && j < o.pows.len() {
            let (a, b) = (self.pows[i], o.pows[j]);
            match a.0.cmp(&b.0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    let e = a.1.min(b.1);
                    pows.push((a.0, e));
                    deg += e;
                    i += 1;
                    j += 1;
                }
            }
        }
        Mono { deg, pows }
    }

    /// Replaces the exponent of `v`.
    pub fn with_exp(&self, v: Var, e: u32) -> Mono {
        let mut pows: SmallVec<[(Var, u32); 4]> = self.pows.iter().copied().filter(|p| p.0 != v).collect();
        if e > 0 {
            let pos = pows.partition_point(|p| p.0 < v);
            pows.insert(pos, (v, e));
        }
        let deg = pows.iter().map(|p| p.1).sum();
        Mono { deg, pows }
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Mono) -> Ordering {
        self.deg.cmp(&o.deg).then_with(|| {
            for (a, b) in self.pows.iter().zip(o.pows.iter()) {
                if a.0 != b.0 {
                    // The earlier variable is the larger one in lex order.
                    return if a.0 < b.0 { Ordering::Greater } else { Ordering::Less };
                }
                if a.1 != b.1 {
                    return a.1.cmp(&b.1);
                }
            }
            self.pows.len().cmp(&o.pows.len())
        })
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Mono) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        for (k, (v, e)) in self.pows.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "{v:?}")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Polynomial with terms strictly descending in graded-lex order.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Mono, Int)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(Int::ONE)
    }

    pub fn constant(c: Int) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly {
                terms: vec![(Mono::one(), c)],
            }
        }
    }

    pub fn var(v: Var) -> Poly {
        Poly::monomial(Mono::var(v, 1), Int::ONE)
    }

    pub fn monomial(m: Mono, c: Int) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Builds a polynomial from terms in any order, merging duplicates.
    pub fn from_terms(mut terms: Vec<(Mono, Int)>) -> Poly {
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Mono, Int)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 += c,
                _ => {
                    if let Some(last) = out.last() {
                        if last.1.is_zero() {
                            out.pop();
                        }
                    }
                    out.push((m, c));
                }
            }
        }
        if let Some(last) = out.last() {
            if last.1.is_zero() {
                out.pop();
            }
        }
        Poly { terms: out }
    }

    pub fn terms(&self) -> &[(Mono, Int)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Mono, Int)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn as_constant(&self) -> Option<Int> {
        match self.terms.len() {
            0 => Some(Int::ZERO),
            1 if self.terms[0].0.is_one() => Some(self.terms[0].1.clone()),
            _ => None,
        }
    }

    pub fn lead(&self) -> Option<&(Mono, Int)> {
        self.terms.first()
    }

    pub fn lc(&self) -> Int {
        self.terms.first().map(|t| t.1.clone()).unwrap_or(Int::ZERO)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map(|t| t.0.degree()).unwrap_or(0)
    }

    /// Variables occurring directly in the terms.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        for (m, _) in &self.terms {
            for (v, _) in m.pows() {
                s.insert(*v);
            }
        }
        s
    }

    /// Symbols this polynomial depends on, looking through atoms.
    pub fn support(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        for v in self.vars() {
            s.extend(v.info().support.iter().copied());
        }
        s
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.iter().any(|(m, _)| m.exp(v) > 0)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.iter().map(|(m, _)| m.exp(v)).max().unwrap_or(0)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        self.merge(o, false)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.merge(o, true)
    }

    fn merge(&self, o: &Poly, negate: bool) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &o.terms);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            out.push((t.0.clone(), c));
        }
        Poly { terms: out }
    }

    pub fn mul_int(&self, k: &Int) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Mono, k: &Int) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(n, c)| (n.mul(m), c * k)).collect(),
        }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let (small, big) = if self.len() <= o.len() { (self, o) } else { (o, self) };
        if small.len() == 1 {
            let (m, c) = &small.terms[0];
            return big.mul_term(m, c);
        }
        let mut all = Vec::with_capacity(small.len() * big.len());
        for (m, c) in &small.terms {
            for (n, d) in &big.terms {
                all.push((m.mul(n), c * d));
            }
        }
        Poly::from_terms(all)
    }

    pub fn square(&self) -> Poly {
        self.mul(self)
    }

    pub fn pow(&self, mut k: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Exact quotient, or `None` when `o` does not divide `self` over Z.
    pub fn div_exact(&self, o: &Poly) -> Option<Poly> {
        assert!(!o.is_zero(), "polynomial division by zero");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(k) = o.as_constant() {
            return self.div_int_exact(&k);
        }
        if o.len() == 1 {
            let (om, oc) = &o.terms[0];
            let mut terms = Vec::with_capacity(self.len());
            for (m, c) in &self.terms {
                let q = m.div(om)?;
                let (qc, r) = c.div_rem(oc);
                if !r.is_zero() {
                    return None;
                }
                terms.push((q, qc));
            }
            return Some(Poly { terms });
        }
        for (v, e) in o.terms[0].0.pows() {
            if self.degree_in(*v) < *e {
                return None;
            }
        }
        let (om, oc) = o.terms[0].clone();
        let tail = Poly {
            terms: o.terms[1..].to_vec(),
        };
        let mut q = Vec::new();
        let mut r = self.clone();
        while let Some((rm, rc)) = r.terms.first() {
            let qm = rm.div(&om)?;
            let (qc, rem) = rc.div_rem(&oc);
            if !rem.is_zero() {
                return None;
            }
            // r -= q_term * o; the leading terms cancel by construction.
            let rest = Poly {
                terms: r.terms[1..].to_vec(),
            };
            r = rest.sub(&tail.mul_term(&qm, &qc));
            q.push((qm, qc));
        }
        Some(Poly { terms: q })
    }

    pub fn div_int_exact(&self, k: &Int) -> Option<Poly> {
        let mut terms = Vec::with_capacity(self.len());
        for (m, c) in &self.terms {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            terms.push((m.clone(), q));
        }
        Some(Poly { terms })
    }

    /// Positive gcd of the coefficients (zero for the zero polynomial).
    pub fn content(&self) -> Int {
        let mut g = Int::ZERO;
        for (_, c) in &self.terms {
            g = Int::from(g.gcd(c));
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn mono_content(&self) -> Mono {
        let mut it = self.terms.iter();
        let mut g = match it.next() {
            Some((m, _)) => m.clone(),
            None => return Mono::one(),
        };
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    pub fn max_norm(&self) -> Int {
        let mut best = Int::ZERO;
        for (_, c) in &self.terms {
            let a = if c.signum() == Int::NEG_ONE { -c } else { c.clone() };
            if a > best {
                best = a;
            }
        }
        best
    }

    /// Coefficients as a polynomial in `v`: index `k` holds the coefficient of `v^k`.
    pub fn coeffs_in(&self, v: Var) -> Vec<Poly> {
        let d = self.degree_in(v) as usize;
        let mut buckets: Vec<Vec<(Mono, Int)>> = vec![Vec::new(); d + 1];
        for (m, c) in &self.terms {
            let e = m.exp(v);
            let rest = if e == 0 { m.clone() } else { m.with_exp(v, 0) };
            buckets[e as usize].push((rest, c.clone()));
        }
        buckets.into_iter().map(Poly::from_terms).collect()
    }

    pub fn from_coeffs_in(v: Var, coeffs: &[Poly]) -> Poly {
        let mut all = Vec::new();
        for (k, c) in coeffs.iter().enumerate() {
            let vm = Mono::var(v, k as u32);
            for (m, a) in &c.terms {
                all.push((m.mul(&vm), a.clone()));
            }
        }
        Poly::from_terms(all)
    }

    /// Partial derivative with respect to a variable occurring directly.
    pub fn diff(&self, v: Var) -> Poly {
        let mut all = Vec::new();
        for (m, c) in &self.terms {
            let e = m.exp(v);
            if e > 0 {
                all.push((m.with_exp(v, e - 1), c * Int::from(e)));
            }
        }
        Poly::from_terms(all)
    }

    /// Substitutes an integer for `v`.
    pub fn eval_int(&self, v: Var, x: &Int) -> Poly {
        let d = self.degree_in(v) as usize;
        let mut pw = Vec::with_capacity(d + 1);
        pw.push(Int::ONE);
        for k in 1..=d {
            let next = &pw[k - 1] * x;
            pw.push(next);
        }
        let mut all = Vec::with_capacity(self.len());
        for (m, c) in &self.terms {
            let e = m.exp(v);
            if e == 0 {
                all.push((m.clone(), c.clone()));
            } else {
                all.push((m.with_exp(v, 0), c * &pw[e as usize]));
            }
        }
        Poly::from_terms(all)
    }

    /// Substitutes a polynomial for `v`.
    pub fn compose(&self, v: Var, p: &Poly) -> Poly {
        if !self.contains_var(v) {
            return self.clone();
        }
        let coeffs = self.coeffs_in(v);
        // Horner in p.
        let mut acc = Poly::zero();
        for c in coeffs.iter().rev() {
            acc = acc.mul(p).add(c);
        }
        acc
    }

    /// Evaluates with a caller-supplied value for each variable.
    pub fn eval_with<T, F>(&self, mut value: F) -> T
    where
        T: Clone + std::ops::Add<Output = T> + std::ops::Mul<Output = T> + From<f64>,
        F: FnMut(Var) -> T,
    {
        let vars: Vec<Var> = self.vars().into_iter().collect();
        let vals: Vec<T> = vars.iter().map(|v| value(*v)).collect();
        let mut acc = T::from(0.0);
        for (m, c) in &self.terms {
            let mut t = T::from(int_to_f64(c));
            for (v, e) in m.pows() {
                let i = vars.binary_search(v).unwrap();
                for _ in 0..*e {
                    t = t * vals[i].clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Makes the leading coefficient positive.
    pub fn sign_normalized(self) -> Poly {
        if self.lc().signum() == Int::NEG_ONE {
            self.neg()
        } else {
            self
        }
    }
}

pub fn int_to_f64(c: &Int) -> f64 {
    c.to_f64().value()
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{m:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Poly {
        Poly::var(Var::symbol(n))
    }

    #[test]
    fn grlex_orders_by_degree_then_lex() {
        let x = Var::symbol("x");
        let y = Var::symbol("y0");
        let a = Mono::var(x, 1).mul(&Mono::var(y, 1));
        let b = Mono::var(y, 2);
        let c = Mono::var(x, 3);
        assert!(c > a);
        assert!(a > b);
        assert!(Mono::var(y, 1) > Mono::one());
    }

    #[test]
    fn square_of_binomial() {
        let p = v("y3").add(&Poly::one());
        let sq = p.square();
        let expect = v("y3").square().add(&v("y3").mul_int(&Int::from(2))).add(&Poly::one());
        assert_eq!(sq, expect);
    }

    #[test]
    fn exact_division_round_trips() {
        let a = v("x").add(&v("y2").square()).sub(&Poly::constant(Int::from(3)));
        let b = v("y2").mul(&v("y3")).add(&Poly::one());
        let ab = a.mul(&b);
        assert_eq!(ab.div_exact(&b), Some(a.clone()));
        assert_eq!(ab.div_exact(&a), Some(b.clone()));
        assert_eq!(a.div_exact(&b), None);
    }

    #[test]
    fn compose_and_coeffs() {
        let y = Var::symbol("y1");
        let p = v("y1").pow(3).add(&v("x"));
        let q = p.compose(y, &v("x").add(&Poly::one()));
        let back = v("x").add(&Poly::one()).pow(3).add(&v("x"));
        assert_eq!(q, back);
        let cs = p.coeffs_in(y);
        assert_eq!(cs.len(), 4);
        assert_eq!(Poly::from_coeffs_in(y, &cs), p);
    }
}
