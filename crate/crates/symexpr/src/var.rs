//! Process-wide variable interner.
//!
//! Chart coordinates and function atoms (`exp(u)`, `sqrt(P)`, ...) are both
//! plain polynomial variables as far as the rational-function core is
//! concerned. The interner is append-only, so a [`Var`] handed out once stays
//! valid for the life of the process.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use crate::expr::Expr;
use crate::poly::Poly;

/// Index into the interner. Lower indices sort first in the monomial order.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

/// Elementary functions carried opaquely.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub enum Func {
    Exp,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

/// A non-polynomial building block, interned as a variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Atom {
    Apply(Func, Expr),
    /// Positive square root of a polynomial with no square factors.
    Sqrt(Poly),
}

#[derive(Debug)]
pub enum VarKind {
    Symbol(String),
    Atom(Atom),
}

#[derive(Debug)]
pub struct VarInfo {
    pub kind: VarKind,
    /// Symbols this variable depends on (itself for a symbol).
    pub support: BTreeSet<Var>,
}

/// Names registered at startup so the common charts get stable ids.
const PRESET: &[&str] = &["x", "y0", "y1", "y2", "y3", "y4", "y", "z", "u", "xm"];

struct Registry {
    infos: Vec<Arc<VarInfo>>,
    by_name: HashMap<String, Var>,
    by_atom: HashMap<Atom, Var>,
}

fn registry() -> &'static RwLock<Registry> {
    static REG: OnceLock<RwLock<Registry>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut reg = Registry {
            infos: Vec::new(),
            by_name: HashMap::new(),
            by_atom: HashMap::new(),
        };
        for name in PRESET {
            reg.push_symbol(name);
        }
        RwLock::new(reg)
    })
}

impl Registry {
    fn push_symbol(&mut self, name: &str) -> Var {
        let v = Var(self.infos.len() as u32);
        self.infos.push(Arc::new(VarInfo {
            kind: VarKind::Symbol(name.to_string()),
            support: BTreeSet::from([v]),
        }));
        self.by_name.insert(name.to_string(), v);
        v
    }
}

impl Var {
    /// Interns a coordinate or parameter name.
    pub fn symbol(name: &str) -> Var {
        if let Some(v) = registry().read().unwrap().by_name.get(name) {
            return *v;
        }
        let mut reg = registry().write().unwrap();
        if let Some(v) = reg.by_name.get(name) {
            return *v;
        }
        reg.push_symbol(name)
    }

    /// Looks a name up without registering it.
    pub fn lookup(name: &str) -> Option<Var> {
        registry().read().unwrap().by_name.get(name).copied()
    }

    pub(crate) fn atom(atom: Atom) -> Var {
        if let Some(v) = registry().read().unwrap().by_atom.get(&atom) {
            return *v;
        }
        let support = match &atom {
            Atom::Apply(_, arg) => arg.support(),
            Atom::Sqrt(p) => p.support(),
        };
        let mut reg = registry().write().unwrap();
        if let Some(v) = reg.by_atom.get(&atom) {
            return *v;
        }
        let v = Var(reg.infos.len() as u32);
        reg.infos.push(Arc::new(VarInfo {
            kind: VarKind::Atom(atom.clone()),
            support,
        }));
        reg.by_atom.insert(atom, v);
        v
    }

    pub fn info(self) -> Arc<VarInfo> {
        registry().read().unwrap().infos[self.0 as usize].clone()
    }

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_symbol(self) -> bool {
        matches!(self.info().kind, VarKind::Symbol(_))
    }

    pub fn is_sqrt(self) -> bool {
        matches!(self.info().kind, VarKind::Atom(Atom::Sqrt(_)))
    }

    /// The symbol name, or `None` for atoms.
    pub fn name(self) -> Option<String> {
        match &self.info().kind {
            VarKind::Symbol(s) => Some(s.clone()),
            VarKind::Atom(_) => None,
        }
    }

    pub fn depends_on(self, v: Var) -> bool {
        self == v || self.info().support.contains(&v)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.info().kind {
            VarKind::Symbol(s) => write!(f, "{s}"),
            VarKind::Atom(a) => write!(f, "{a:?}"),
        }
    }
}
