//! Named coordinate systems.

use std::collections::BTreeSet;

use crate::error::ExprError;
use crate::expr::Expr;
use crate::var::Var;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    name: String,
    vars: Vec<Var>,
}

impl Chart {
    pub fn new(name: &str, names: &[&str]) -> Result<Chart, ExprError> {
        if names.len() < 3 {
            return Err(ExprError::InvalidChart(format!(
                "`{name}` has dimension {} < 3",
                names.len()
            )));
        }
        let set: BTreeSet<&&str> = names.iter().collect();
        if set.len() != names.len() {
            return Err(ExprError::InvalidChart(format!("`{name}` repeats a variable")));
        }
        Ok(Chart {
            name: name.to_string(),
            vars: names.iter().map(|n| Var::symbol(n)).collect(),
        })
    }

    /// (x, y0, y1, y2, y3): the jet chart of a fourth-order ODE.
    pub fn ode() -> Chart {
        Chart::new("ode", &["x", "y0", "y1", "y2", "y3"]).unwrap()
    }

    /// (x, y, z): the contact base with contact form dy - z dx.
    pub fn base() -> Chart {
        Chart::new("base", &["x", "y", "z"]).unwrap()
    }

    /// (x, y, z, u, xm): base, stereographic frame angle and multiplier.
    pub fn griffiths() -> Chart {
        Chart::new("griffiths", &["x", "y", "z", "u", "xm"]).unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn var(&self, i: usize) -> Var {
        self.vars[i]
    }

    pub fn index_of(&self, v: Var) -> Option<usize> {
        self.vars.iter().position(|w| *w == v)
    }

    pub fn var_named(&self, name: &str) -> Result<Var, ExprError> {
        Var::lookup(name)
            .filter(|v| self.vars.contains(v))
            .ok_or_else(|| ExprError::NotInChart(name.to_string(), self.name.clone()))
    }

    /// Partial derivative with a membership check.
    pub fn diff(&self, e: &Expr, v: Var) -> Result<Expr, ExprError> {
        if !self.vars.contains(&v) {
            return Err(ExprError::NotInChart(format!("{v:?}"), self.name.clone()));
        }
        Ok(e.diff(v))
    }

    /// True when every symbol of `e` is a chart coordinate.
    pub fn contains_expr(&self, e: &Expr) -> bool {
        e.support().iter().all(|v| self.vars.contains(v))
    }
}
