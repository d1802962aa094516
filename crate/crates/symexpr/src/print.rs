//! Text rendering that the expression grammar reads back.

use std::fmt;

use dashu_int::ops::Abs;

use crate::expr::Expr;
use crate::poly::{Int, Mono, Poly};
use crate::var::{Atom, Var, VarKind};

/// Maps symbols to display names; `None` falls back to the interned name.
pub type Namer<'a> = &'a dyn Fn(Var) -> Option<String>;

fn var_name(v: Var, namer: Namer) -> String {
    match &v.info().kind {
        VarKind::Symbol(s) => namer(v).unwrap_or_else(|| s.clone()),
        VarKind::Atom(Atom::Apply(f, arg)) => format!("{}({})", f.name(), render(arg, namer)),
        VarKind::Atom(Atom::Sqrt(p)) => format!("sqrt({})", render_poly(p, namer)),
    }
}

fn render_mono(m: &Mono, namer: Namer) -> String {
    let mut parts = Vec::new();
    for (v, e) in m.pows() {
        let name = var_name(*v, namer);
        if *e == 1 {
            parts.push(name);
        } else if name.chars().all(|c| c.is_alphanumeric() || c == '_')
            || name.ends_with(')') && !name.starts_with('(') && !name.contains('\'')
        {
            parts.push(format!("{name}^{e}"));
        } else {
            parts.push(format!("({name})^{e}"));
        }
    }
    parts.join("*")
}

/// Terms in ascending order so constants lead, e.g. `1+y2^2`.
fn render_poly(p: &Poly, namer: Namer) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (m, c)) in p.terms().iter().rev().enumerate() {
        let neg = c.signum() == Int::NEG_ONE;
        let a = c.clone().abs();
        if neg {
            out.push('-');
        } else if k > 0 {
            out.push('+');
        }
        if m.is_one() {
            out.push_str(&a.to_string());
        } else if a.is_one() {
            out.push_str(&render_mono(m, namer));
        } else {
            out.push_str(&format!("{a}*{}", render_mono(m, namer)));
        }
    }
    out
}

fn single_factor(p: &Poly) -> bool {
    match p.terms() {
        [(m, c)] => (m.is_one() && c.signum() != Int::NEG_ONE) || (c.is_one() && m.pows().len() == 1),
        _ => false,
    }
}

/// Renders with custom symbol names.
pub fn render(e: &Expr, namer: Namer) -> String {
    let num = render_poly(e.num(), namer);
    if e.den().is_one() {
        return num;
    }
    let num = if e.num().len() > 1 { format!("({num})") } else { num };
    let den = render_poly(e.den(), namer);
    if single_factor(e.den()) {
        format!("{num}/{den}")
    } else {
        format!("{num}/({den})")
    }
}

impl Expr {
    pub fn render_with(&self, namer: Namer) -> String {
        render(self, namer)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render(self, &|_| None))
    }
}
