//! Numeric evaluation of expressions.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Sub};

use crate::expr::Expr;
use crate::poly::{int_to_f64, Poly};
use crate::var::{Atom, Func, Var, VarKind};

/// Scalar types an expression can be evaluated in.
pub trait Numeric:
    Clone + From<f64> + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;
}

impl Numeric for f64 {
    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
    fn sin(&self) -> f64 {
        f64::sin(*self)
    }
    fn cos(&self) -> f64 {
        f64::cos(*self)
    }
    fn sqrt(&self) -> f64 {
        f64::sqrt(*self)
    }
}

/// Values for every variable in `vars` (atoms computed from their arguments).
fn values<T: Numeric>(
    vars: impl IntoIterator<Item = Var>,
    env: &dyn Fn(Var) -> Option<T>,
    memo: &mut HashMap<Var, T>,
) -> Option<()> {
    for v in vars {
        if memo.contains_key(&v) {
            continue;
        }
        let val = match &v.info().kind {
            VarKind::Symbol(_) => env(v)?,
            VarKind::Atom(Atom::Apply(f, arg)) => {
                let a = eval_memo(arg, env, memo)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                }
            }
            VarKind::Atom(Atom::Sqrt(p)) => {
                values(p.vars(), env, memo)?;
                eval_poly(p, memo).sqrt()
            }
        };
        memo.insert(v, val);
    }
    Some(())
}

fn eval_poly<T: Numeric>(p: &Poly, memo: &HashMap<Var, T>) -> T {
    p.eval_with(|v| memo[&v].clone())
}

fn eval_memo<T: Numeric>(e: &Expr, env: &dyn Fn(Var) -> Option<T>, memo: &mut HashMap<Var, T>) -> Option<T> {
    values(e.vars(), env, memo)?;
    let n = eval_poly(e.num(), memo);
    if e.den().is_one() {
        return Some(n);
    }
    Some(n / eval_poly(e.den(), memo))
}

impl Expr {
    /// Evaluates with `env` supplying symbol values; `None` if a symbol is missing.
    pub fn eval<T: Numeric>(&self, env: &dyn Fn(Var) -> Option<T>) -> Option<T> {
        let mut memo = HashMap::new();
        eval_memo(self, env, &mut memo)
    }

    pub fn eval_f64(&self, point: &HashMap<Var, f64>) -> Option<f64> {
        self.eval(&|v| point.get(&v).copied())
    }

    /// Numerator, denominator and their absolute term sums at a point.
    pub(crate) fn eval_parts(&self, point: &HashMap<Var, f64>) -> Option<[f64; 4]> {
        let mut memo: HashMap<Var, f64> = HashMap::new();
        values(self.vars(), &|v| point.get(&v).copied(), &mut memo)?;
        let abs = |p: &Poly| -> (f64, f64) {
            let mut val = 0.0;
            let mut scale = 0.0;
            for (m, c) in p.terms() {
                let mut t = int_to_f64(c);
                for (v, e) in m.pows() {
                    t *= memo[v].powi(*e as i32);
                }
                val += t;
                scale += t.abs();
            }
            (val, scale)
        };
        let (n, ns) = abs(self.num());
        let (d, ds) = abs(self.den());
        Some([n, ns, d, ds])
    }
}
