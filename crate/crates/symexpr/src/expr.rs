//! Canonical rational functions over symbols and atoms.

use std::collections::BTreeSet;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_int::ops::{DivRem, SquareRoot, UnsignedAbs};

use crate::error::ExprError;
use crate::gcd::{cofactors, content_in, gcd};
use crate::poly::{Int, Mono, Poly};
use crate::var::{Atom, Func, Var, VarKind};

/// `num/den` with `gcd(num, den) = 1` and a positive leading coefficient in
/// `den`. Square-root atoms occur at most linearly in `num` and never in `den`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Expr {
    num: Poly,
    den: Poly,
    has_sqrt: bool,
}

impl Default for Expr {
    fn default() -> Expr {
        Expr::zero()
    }
}

fn sqrt_vars(p: &Poly) -> Vec<Var> {
    p.vars().into_iter().filter(|v| v.is_sqrt()).collect()
}

fn radicand(s: Var) -> Poly {
    match &s.info().kind {
        VarKind::Atom(Atom::Sqrt(p)) => p.clone(),
        _ => unreachable!("not a square-root atom"),
    }
}

/// Rewrites even powers of `s` through its radicand.
fn reduce_powers(p: &Poly, s: Var) -> Poly {
    if p.degree_in(s) < 2 {
        return p.clone();
    }
    let r = radicand(s);
    let cs = p.coeffs_in(s);
    let mut even = Poly::zero();
    let mut odd = Poly::zero();
    let mut rp = Poly::one();
    let mut j = 0;
    while 2 * j < cs.len() {
        even = even.add(&cs[2 * j].mul(&rp));
        if 2 * j + 1 < cs.len() {
            odd = odd.add(&cs[2 * j + 1].mul(&rp));
        }
        rp = rp.mul(&r);
        j += 1;
    }
    even.add(&odd.mul(&Poly::var(s)))
}

fn reduce_all(mut p: Poly) -> Poly {
    let mut vs = sqrt_vars(&p);
    vs.sort_unstable_by(|a, b| b.cmp(a));
    for s in vs {
        p = reduce_powers(&p, s);
    }
    p
}

impl Expr {
    pub fn zero() -> Expr {
        Expr {
            num: Poly::zero(),
            den: Poly::one(),
            has_sqrt: false,
        }
    }

    pub fn one() -> Expr {
        Expr::from_int(Int::ONE)
    }

    pub fn int(n: i64) -> Expr {
        Expr::from_int(Int::from(n))
    }

    pub fn from_int(n: Int) -> Expr {
        Expr {
            num: Poly::constant(n),
            den: Poly::one(),
            has_sqrt: false,
        }
    }

    /// `n/d`; panics if `d == 0`.
    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::from_polys(Poly::constant(Int::from(n)), Poly::constant(Int::from(d))).expect("nonzero denominator")
    }

    pub fn from_ints(n: Int, d: Int) -> Result<Expr, ExprError> {
        Expr::from_polys(Poly::constant(n), Poly::constant(d))
    }

    pub fn var(v: Var) -> Expr {
        Expr::from_poly(Poly::var(v))
    }

    pub fn symbol(name: &str) -> Expr {
        Expr::var(Var::symbol(name))
    }

    pub fn from_poly(p: Poly) -> Expr {
        Expr::from_polys(p, Poly::one()).unwrap()
    }

    /// Normalizes an arbitrary quotient.
    pub fn from_polys(num: Poly, den: Poly) -> Result<Expr, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        let mut num = num;
        let mut den = den;
        let mut svars: Vec<Var> = {
            let mut s: BTreeSet<Var> = sqrt_vars(&num).into_iter().collect();
            s.extend(sqrt_vars(&den));
            s.into_iter().collect()
        };
        if !svars.is_empty() {
            num = reduce_all(num);
            den = reduce_all(den);
            svars.sort_unstable_by(|a, b| b.cmp(a));
            for s in svars {
                if !den.contains_var(s) {
                    continue;
                }
                let cs = den.coeffs_in(s);
                let d0 = cs[0].clone();
                let d1 = cs.get(1).cloned().unwrap_or_default();
                let conj = d0.sub(&d1.mul(&Poly::var(s)));
                num = reduce_all(num.mul(&conj));
                den = reduce_all(d0.square().sub(&d1.square().mul(&radicand(s))));
                if den.is_zero() {
                    return Err(ExprError::DivisionByZero);
                }
            }
        }
        Ok(Expr::reduce(num, den))
    }

    /// Cancels the gcd and fixes the sign; `den` must be free of sqrt atoms.
    fn reduce(num: Poly, den: Poly) -> Expr {
        if num.is_zero() {
            return Expr::zero();
        }
        let (num, den) = if den.is_one() {
            (num, den)
        } else {
            let (_, n, d) = cofactors(&num, &den);
            (n, d)
        };
        let (num, den) = if den.lc().signum() == Int::NEG_ONE {
            (num.neg(), den.neg())
        } else {
            (num, den)
        };
        let has_sqrt = num.vars().iter().any(|v| v.is_sqrt());
        Expr { num, den, has_sqrt }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero_poly(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// `Some((n, d))` for rational constants.
    pub fn as_rational(&self) -> Option<(Int, Int)> {
        Some((self.num.as_constant()?, self.den.as_constant()?))
    }

    pub fn is_constant(&self) -> bool {
        self.as_rational().is_some()
    }

    /// Number of terms in numerator and denominator.
    pub fn size(&self) -> usize {
        self.num.len() + self.den.len()
    }

    /// Symbols this expression depends on.
    pub fn support(&self) -> BTreeSet<Var> {
        let mut s = self.num.support();
        s.extend(self.den.support());
        s
    }

    /// Symbols and atoms occurring directly.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = self.num.vars();
        s.extend(self.den.vars());
        s
    }

    pub fn atoms(&self) -> Vec<Var> {
        self.vars().into_iter().filter(|v| !v.is_symbol()).collect()
    }

    pub fn is_rational(&self) -> bool {
        self.vars().iter().all(|v| v.is_symbol())
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.vars().iter().any(|w| w.depends_on(v))
    }

    pub fn add_ref(&self, o: &Expr) -> Expr {
        if self.num.is_zero() {
            return o.clone();
        }
        if o.num.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            let t = self.num.add(&o.num);
            return Expr::reduce(t, self.den.clone());
        }
        let (g, ad, bd) = cofactors(&self.den, &o.den);
        let t = self.num.mul(&bd).add(&o.num.mul(&ad));
        if t.is_zero() {
            return Expr::zero();
        }
        if g.is_one() {
            let has_sqrt = self.has_sqrt || o.has_sqrt;
            let has_sqrt = has_sqrt && t.vars().iter().any(|v| v.is_sqrt());
            return Expr {
                num: t,
                den: ad.mul(&o.den),
                has_sqrt,
            };
        }
        let (_, t1, g1) = cofactors(&t, &g);
        let den = ad.mul(&bd).mul(&g1);
        let has_sqrt = t1.vars().iter().any(|v| v.is_sqrt());
        let (num, den) = if den.lc().signum() == Int::NEG_ONE {
            (t1.neg(), den.neg())
        } else {
            (t1, den)
        };
        Expr { num, den, has_sqrt }
    }

    pub fn neg_ref(&self) -> Expr {
        Expr {
            num: self.num.neg(),
            den: self.den.clone(),
            has_sqrt: self.has_sqrt,
        }
    }

    pub fn sub_ref(&self, o: &Expr) -> Expr {
        self.add_ref(&o.neg_ref())
    }

    pub fn mul_ref(&self, o: &Expr) -> Expr {
        if self.num.is_zero() || o.num.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return o.clone();
        }
        if o.is_one() {
            return self.clone();
        }
        if self.has_sqrt && o.has_sqrt {
            return Expr::from_polys(self.num.mul(&o.num), self.den.mul(&o.den)).unwrap();
        }
        let (_, an, bd) = cofactors(&self.num, &o.den);
        let (_, bn, ad) = cofactors(&o.num, &self.den);
        let num = an.mul(&bn);
        let den = ad.mul(&bd);
        let (num, den) = if den.lc().signum() == Int::NEG_ONE {
            (num.neg(), den.neg())
        } else {
            (num, den)
        };
        Expr {
            num,
            den,
            has_sqrt: self.has_sqrt || o.has_sqrt,
        }
    }

    pub fn try_inv(&self) -> Result<Expr, ExprError> {
        if self.num.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if self.has_sqrt {
            return Expr::from_polys(self.den.clone(), self.num.clone());
        }
        let (num, den) = if self.num.lc().signum() == Int::NEG_ONE {
            (self.den.neg(), self.num.neg())
        } else {
            (self.den.clone(), self.num.clone())
        };
        Ok(Expr {
            num,
            den,
            has_sqrt: false,
        })
    }

    pub fn try_div(&self, o: &Expr) -> Result<Expr, ExprError> {
        Ok(self.mul_ref(&o.try_inv()?))
    }

    /// Integer power; negative exponents need a nonzero base.
    pub fn try_pow(&self, k: i64) -> Result<Expr, ExprError> {
        if k < 0 {
            return self.try_inv()?.try_pow(-k);
        }
        let mut acc = Expr::one();
        let mut base = self.clone();
        let mut k = k as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_ref(&base);
            }
        }
        Ok(acc)
    }

    pub fn pow(&self, k: i64) -> Expr {
        self.try_pow(k).expect("power of zero with negative exponent")
    }

    pub fn scale(&self, n: i64, d: i64) -> Expr {
        self.mul_ref(&Expr::rational(n, d))
    }

    // -- elementary functions ------------------------------------------------

    pub fn apply(&self, f: Func) -> Expr {
        match f {
            Func::Exp => self.exp(),
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
        }
    }

    pub fn exp(&self) -> Expr {
        if self.num.is_zero() {
            return Expr::one();
        }
        if self.num.lc().signum() == Int::NEG_ONE {
            let v = Var::atom(Atom::Apply(Func::Exp, self.neg_ref()));
            return Expr::var(v).try_inv().unwrap();
        }
        Expr::var(Var::atom(Atom::Apply(Func::Exp, self.clone())))
    }

    pub fn sin(&self) -> Expr {
        if self.num.is_zero() {
            return Expr::zero();
        }
        if self.num.lc().signum() == Int::NEG_ONE {
            return Expr::var(Var::atom(Atom::Apply(Func::Sin, self.neg_ref()))).neg_ref();
        }
        Expr::var(Var::atom(Atom::Apply(Func::Sin, self.clone())))
    }

    pub fn cos(&self) -> Expr {
        if self.num.is_zero() {
            return Expr::one();
        }
        let arg = if self.num.lc().signum() == Int::NEG_ONE {
            self.neg_ref()
        } else {
            self.clone()
        };
        Expr::var(Var::atom(Atom::Apply(Func::Cos, arg)))
    }

    /// Principal square root: `sqrt(N/D) = sqrt(N*D)/D`, perfect squares
    /// come back as the root with positive leading coefficient.
    pub fn sqrt(&self) -> Expr {
        if self.num.is_zero() {
            return Expr::zero();
        }
        let r = self.num.mul(&self.den);
        let (outside, inside) = split_square(&r);
        let root = if inside.is_one() {
            Expr::from_poly(outside)
        } else {
            let s = Var::atom(Atom::Sqrt(inside));
            Expr::from_poly(outside.mul(&Poly::var(s)))
        };
        root.try_div(&Expr::from_poly(self.den.clone())).unwrap()
    }

    // -- calculus ------------------------------------------------------------

    /// Partial derivative of a polynomial, looking through atoms.
    fn poly_derivative(p: &Poly, v: Var) -> Expr {
        let mut acc = Expr::zero();
        for w in p.vars() {
            if !w.depends_on(v) {
                continue;
            }
            let dp = Expr::from_poly(p.diff(w));
            let dw = atom_derivative(w, v);
            acc = acc.add_ref(&dp.mul_ref(&dw));
        }
        acc
    }

    pub fn diff(&self, v: Var) -> Expr {
        if !self.depends_on(v) {
            return Expr::zero();
        }
        let direct = self.vars().into_iter().all(|w| w.is_symbol());
        if direct {
            let dn = self.num.diff(v);
            if self.den.is_one() {
                return Expr::from_poly(dn);
            }
            let dd = self.den.diff(v);
            let t = dn.mul(&self.den).sub(&self.num.mul(&dd));
            return Expr::from_polys(t, self.den.square()).unwrap();
        }
        let dn = Expr::poly_derivative(&self.num, v);
        if self.den.is_one() {
            return dn;
        }
        let den = Expr::from_poly(self.den.clone());
        let dd = Expr::poly_derivative(&self.den, v);
        let n = Expr::from_poly(self.num.clone());
        dn.mul_ref(&den)
            .sub_ref(&n.mul_ref(&dd))
            .try_div(&den.mul_ref(&den))
            .unwrap()
    }

    /// Simultaneous substitution of symbols.
    pub fn subs(&self, map: &[(Var, Expr)]) -> Expr {
        let mut e = self.clone();
        // Rebuild atoms whose arguments mention substituted symbols.
        let atoms: Vec<Var> = e
            .atoms()
            .into_iter()
            .filter(|a| map.iter().any(|(v, _)| a.depends_on(*v)))
            .collect();
        let mut replace: Vec<(Var, Expr)> = map.iter().filter(|(v, _)| e.vars().contains(v)).cloned().collect();
        for a in atoms {
            let val = match &a.info().kind {
                VarKind::Atom(Atom::Apply(f, arg)) => arg.subs(map).apply(*f),
                VarKind::Atom(Atom::Sqrt(p)) => Expr::from_poly(p.clone()).subs(map).sqrt(),
                VarKind::Symbol(_) => unreachable!(),
            };
            replace.push((a, val));
        }
        if replace.is_empty() {
            return e;
        }
        // Substitute through fresh placeholders so values may mention keys.
        let n = substitute_poly(&e.num, &replace);
        let d = substitute_poly(&e.den, &replace);
        e = n.try_div(&d).expect("substitution made the denominator vanish");
        e
    }

    pub fn subs_one(&self, v: Var, value: &Expr) -> Expr {
        self.subs(&[(v, value.clone())])
    }
}

/// Evaluates a polynomial with expressions for some of its variables.
fn substitute_poly(p: &Poly, map: &[(Var, Expr)]) -> Expr {
    let keys: Vec<Var> = map.iter().map(|(v, _)| *v).collect();
    let mut rest_terms: Vec<(Mono, Int)> = Vec::new();
    let mut groups: std::collections::BTreeMap<Vec<u32>, Vec<(Mono, Int)>> = Default::default();
    for (m, c) in p.terms() {
        let exps: Vec<u32> = keys.iter().map(|k| m.exp(*k)).collect();
        if exps.iter().all(|e| *e == 0) {
            rest_terms.push((m.clone(), c.clone()));
            continue;
        }
        let mut rest = m.clone();
        for k in &keys {
            rest = rest.with_exp(*k, 0);
        }
        groups.entry(exps).or_default().push((rest, c.clone()));
    }
    let mut acc = Expr::from_poly(Poly::from_terms(rest_terms));
    let mut cache: Vec<Vec<Expr>> = map.iter().map(|(_, e)| vec![Expr::one(), e.clone()]).collect();
    for (exps, terms) in groups {
        let mut t = Expr::from_poly(Poly::from_terms(terms));
        for (i, e) in exps.iter().enumerate() {
            let e = *e as usize;
            if e == 0 {
                continue;
            }
            while cache[i].len() <= e {
                let next = cache[i].last().unwrap().mul_ref(&map[i].1);
                cache[i].push(next);
            }
            t = t.mul_ref(&cache[i][e]);
        }
        acc = acc.add_ref(&t);
    }
    acc
}

/// d(w)/d(v) for a symbol or atom `w`.
fn atom_derivative(w: Var, v: Var) -> Expr {
    match &w.info().kind {
        VarKind::Symbol(_) => {
            if w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        VarKind::Atom(Atom::Apply(f, u)) => {
            let du = u.diff(v);
            match f {
                Func::Exp => Expr::var(w).mul_ref(&du),
                Func::Sin => u.cos().mul_ref(&du),
                Func::Cos => u.sin().neg_ref().mul_ref(&du),
            }
        }
        VarKind::Atom(Atom::Sqrt(p)) => {
            let dp = Expr::from_poly(p.clone()).diff(v);
            dp.try_div(&Expr::var(w).mul_ref(&Expr::int(2))).unwrap()
        }
    }
}

/// Writes `r = a^2 * b` with `b` free of square factors (as far as the
/// integer trial division and polynomial square-free split can see).
fn split_square(r: &Poly) -> (Poly, Poly) {
    let c = r.content();
    let sign = r.lc().signum();
    let q = r.div_int_exact(&(&c * &sign)).unwrap();
    let (ci, co) = split_int_square(&c);
    let (pa, pb) = split_poly_square(&q);
    let inside = pb.mul_int(&(co * sign));
    let outside = pa.mul_int(&ci);
    (outside, inside)
}

fn split_int_square(c: &Int) -> (Int, Int) {
    let mut rest = c.unsigned_abs();
    let mut out = dashu_int::UBig::ONE;
    let root = rest.sqrt();
    if &root * &root == rest {
        return (Int::from(root), Int::ONE);
    }
    let mut p = 2u32;
    while p < 1000 {
        let pp = dashu_int::UBig::from(p * p);
        loop {
            let (q, r) = (&rest).div_rem(&pp);
            if r.is_zero() {
                rest = q;
                out *= dashu_int::UBig::from(p);
            } else {
                break;
            }
        }
        p += 1;
    }
    let root = rest.sqrt();
    if &root * &root == rest {
        out *= root;
        rest = dashu_int::UBig::ONE;
    }
    (Int::from(out), Int::from(rest))
}

/// Square-free split of a primitive polynomial with positive leading coefficient.
fn split_poly_square(q: &Poly) -> (Poly, Poly) {
    if q.as_constant().is_some() {
        return (Poly::one(), q.clone());
    }
    let m = q.mono_content();
    let mut outside = Poly::one();
    let mut inside = Poly::one();
    for (v, e) in m.pows() {
        outside = outside.mul(&Poly::monomial(Mono::var(*v, e / 2), Int::ONE));
        inside = inside.mul(&Poly::monomial(Mono::var(*v, e % 2), Int::ONE));
    }
    let q = q.div_exact(&Poly::monomial(m.clone(), Int::ONE)).unwrap();
    if q.as_constant().is_some() {
        return (outside, inside.mul(&q));
    }
    let v = *q.vars().iter().next().unwrap();
    let cont = content_in(&q, v).sign_normalized();
    let pp = q.div_exact(&cont).unwrap();
    let (ca, cb) = split_poly_square(&cont);
    outside = outside.mul(&ca);
    inside = inside.mul(&cb);
    for (f, k) in yun(&pp, v) {
        if k / 2 > 0 {
            outside = outside.mul(&f.pow(k / 2));
        }
        if k % 2 == 1 {
            inside = inside.mul(&f);
        }
    }
    (outside.sign_normalized(), inside.sign_normalized())
}

/// Square-free factors `(f, k)` of a polynomial, `p = c * Π f^k` for an
/// integer constant `c`. Factors are primitive, sign-normalized and
/// non-constant; distinct entries may still share factors across variables.
pub fn squarefree_factors(p: &Poly) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    if p.is_zero() || p.as_constant().is_some() {
        return out;
    }
    let c = p.content();
    let q = p.div_int_exact(&c).unwrap();
    for (v, e) in q.mono_content().pows() {
        out.push((Poly::var(*v), *e));
    }
    let q = q.div_exact(&Poly::monomial(q.mono_content(), Int::ONE)).unwrap();
    if q.as_constant().is_some() {
        return out;
    }
    let v = *q.vars().iter().next().unwrap();
    let cont = content_in(&q, v).sign_normalized();
    let pp = q.div_exact(&cont).unwrap();
    out.extend(squarefree_factors(&cont));
    for (f, k) in yun(&pp, v) {
        if f.as_constant().is_none() {
            out.push((f.sign_normalized(), k));
        }
    }
    out
}

/// Yun's square-free factorization with respect to `v` of a polynomial that
/// is primitive in `v`.
fn yun(a: &Poly, v: Var) -> Vec<(Poly, u32)> {
    let da = a.diff(v);
    if da.is_zero() {
        return vec![(a.clone(), 1)];
    }
    let c = gcd(a, &da);
    let mut w = a.div_exact(&c).unwrap();
    let y = da.div_exact(&c).unwrap();
    let mut z = y.sub(&w.diff(v));
    let mut out = Vec::new();
    let mut i = 1;
    while w.degree_in(v) > 0 {
        let g = gcd(&w, &z);
        if g.degree_in(v) > 0 {
            out.push((g.clone(), i));
        }
        w = w.div_exact(&g).unwrap();
        let y = z.div_exact(&g).unwrap();
        z = y.sub(&w.diff(v));
        i += 1;
    }
    out
}

// -- operator sugar ----------------------------------------------------------

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                self.$f(o)
            }
        }
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                self.$f(&o)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                self.$f(o)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                self.$f(&o)
            }
        }
    };
}

impl Expr {
    fn div_panicking(&self, o: &Expr) -> Expr {
        self.try_div(o).expect("division by zero expression")
    }
}

binop!(Add, add, add_ref);
binop!(Sub, sub, sub_ref);
binop!(Mul, mul, mul_ref);
binop!(Div, div, div_panicking);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_ref()
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_ref()
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a.add_ref(&b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: &str) -> Expr {
        Expr::symbol(n)
    }

    #[test]
    fn binomial_identity_cancels() {
        let y3 = s("y3");
        let lhs = (&y3 + &Expr::one()).pow(2);
        let rhs = &y3 * &y3 + &y3 * Expr::int(2) + Expr::one();
        assert!((lhs - rhs).is_zero_poly());
    }

    #[test]
    fn quotient_is_reduced() {
        let y2 = s("y2");
        let a = (&y2 * &y2 - Expr::one()) / (&y2 - Expr::one());
        assert_eq!(a, &y2 + &Expr::one());
    }

    #[test]
    fn exp_inverse_cancels() {
        let y2 = s("y2");
        let e = y2.exp() * y2.neg_ref().exp() - Expr::one();
        assert!(e.is_zero_poly());
    }

    #[test]
    fn exp_chain_rule() {
        let y2 = Var::symbol("y2");
        let e = (Expr::var(y2) * Expr::int(-3)).exp();
        assert_eq!(e.diff(y2), e.clone() * Expr::int(-3));
    }

    #[test]
    fn sqrt_squares_back() {
        let y2 = s("y2");
        let r = (&y2 * &y2 + Expr::one()).sqrt();
        assert_eq!(&r * &r, &y2 * &y2 + Expr::one());
        let inv = Expr::one() / &r;
        assert_eq!(&inv * &r, Expr::one());
    }

    #[test]
    fn sqrt_of_square_is_rational() {
        let y2 = s("y2");
        let sq = (&y2 * &y2 + Expr::one()).pow(2) / Expr::int(4);
        let r = sq.sqrt();
        assert_eq!(r, (&y2 * &y2 + Expr::one()) / Expr::int(2));
        let partial = (Expr::int(12) * &y2 * &y2 * (&y2 + Expr::one())).sqrt();
        assert_eq!(&partial * &partial, Expr::int(12) * &y2 * &y2 * (&y2 + Expr::one()));
        assert!(partial.atoms().len() == 1);
    }

    #[test]
    fn sqrt_derivative() {
        let v = Var::symbol("y2");
        let y2 = Expr::var(v);
        let r = (&y2 * &y2 + Expr::one()).sqrt();
        let d = r.diff(v);
        assert_eq!(d, &y2 / &r);
    }

    #[test]
    fn substitution() {
        let x = Var::symbol("x");
        let e = Expr::var(x).pow(2) + Expr::var(x).exp();
        let got = e.subs(&[(x, Expr::int(0))]);
        assert_eq!(got, Expr::one());
        let y = s("y1");
        let got = e.subs(&[(x, y.clone() + Expr::one())]);
        assert_eq!(got, (&y + &Expr::one()).pow(2) + (&y + &Expr::one()).exp());
    }
}
