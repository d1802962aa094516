//! Zero testing and seeded sampling.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::Expr;
use crate::var::{Atom, Func, Var, VarKind};

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_SAMPLES: usize = 20;
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroVerdict {
    ProvenZero,
    ProvenNonzero,
    NumericallyZero { samples: usize, tol: f64 },
    Unknown,
}

impl ZeroVerdict {
    /// Zero either by proof or by sampling.
    pub fn is_zero(self) -> bool {
        matches!(self, ZeroVerdict::ProvenZero | ZeroVerdict::NumericallyZero { .. })
    }

    pub fn is_nonzero(self) -> bool {
        self == ZeroVerdict::ProvenNonzero
    }

    pub fn label(self) -> &'static str {
        match self {
            ZeroVerdict::ProvenZero => "ProvenZero",
            ZeroVerdict::ProvenNonzero => "ProvenNonzero",
            ZeroVerdict::NumericallyZero { .. } => "NumericallyZero",
            ZeroVerdict::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for ZeroVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroVerdict::NumericallyZero { samples, tol } => {
                write!(f, "NumericallyZero({samples} samples, tol {tol:e})")
            }
            other => write!(f, "{}", other.label()),
        }
    }
}

/// Counts of signs seen at sample points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SignCount {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
    pub poles: usize,
}

/// Seeded point sampler; passed explicitly wherever sampling happens.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampler {
    pub seed: u64,
    pub count: usize,
    pub tol: f64,
}

impl Default for Sampler {
    fn default() -> Sampler {
        Sampler {
            seed: DEFAULT_SEED,
            count: DEFAULT_SAMPLES,
            tol: DEFAULT_TOL,
        }
    }
}

impl Sampler {
    pub fn new(seed: u64, count: usize, tol: f64) -> Sampler {
        Sampler { seed, count, tol }
    }

    /// Points with every coordinate in [-2,-0.1] ∪ [0.1,2]; `n` points.
    pub fn points(&self, vars: &[Var], n: usize) -> Vec<HashMap<Var, f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..n)
            .map(|_| {
                vars.iter()
                    .map(|v| {
                        let mag: f64 = rng.gen_range(0.1..=2.0);
                        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                        (*v, sign * mag)
                    })
                    .collect()
            })
            .collect()
    }

    /// Decides whether `e` vanishes identically.
    pub fn zero_test(&self, e: &Expr) -> ZeroVerdict {
        if e.is_zero_poly() {
            return ZeroVerdict::ProvenZero;
        }
        if !needs_sampling(e) {
            return ZeroVerdict::ProvenNonzero;
        }
        let vars: Vec<Var> = e.support().into_iter().collect();
        let mut valid = 0;
        for p in self.points(&vars, self.count * 5) {
            let Some([n, ns, d, ds]) = e.eval_parts(&p) else {
                continue;
            };
            if !(n.is_finite() && ns.is_finite() && d.is_finite() && ds.is_finite()) {
                continue;
            }
            if d.abs() <= self.tol * ds.max(f64::MIN_POSITIVE) {
                continue;
            }
            if n.abs() > self.tol * ns.max(1.0) {
                return ZeroVerdict::ProvenNonzero;
            }
            valid += 1;
            if valid == self.count {
                break;
            }
        }
        if valid == 0 {
            ZeroVerdict::Unknown
        } else {
            ZeroVerdict::NumericallyZero {
                samples: valid,
                tol: self.tol,
            }
        }
    }

    /// Signs of `e` at `count` sample points.
    pub fn signs(&self, e: &Expr) -> SignCount {
        let vars: Vec<Var> = e.support().into_iter().collect();
        let mut out = SignCount::default();
        for p in self.points(&vars, self.count) {
            match e.eval_parts(&p) {
                Some([n, ns, d, _]) if n.is_finite() && d.is_finite() && d != 0.0 => {
                    let v = n / d;
                    if n.abs() <= self.tol * ns.max(1.0) {
                        out.zero += 1;
                    } else if v > 0.0 {
                        out.positive += 1;
                    } else {
                        out.negative += 1;
                    }
                }
                _ => out.poles += 1,
            }
        }
        out
    }
}

/// True when the atoms in `e` could satisfy relations the canonical form
/// does not see (several exponentials or radicals, trig functions, nesting).
fn needs_sampling(e: &Expr) -> bool {
    let mut exps = 0;
    let mut sqrts = 0;
    for a in e.atoms() {
        match &a.info().kind {
            VarKind::Atom(Atom::Apply(Func::Exp, arg)) => {
                exps += 1;
                if !arg.is_rational() {
                    return true;
                }
            }
            VarKind::Atom(Atom::Apply(_, _)) => return true,
            VarKind::Atom(Atom::Sqrt(p)) => {
                sqrts += 1;
                if p.vars().iter().any(|v| !v.is_symbol()) {
                    return true;
                }
            }
            VarKind::Symbol(_) => {}
        }
    }
    exps > 1 || sqrts > 1
}

impl Expr {
    /// Zero test with the default sampler.
    pub fn is_zero(&self) -> ZeroVerdict {
        Sampler::default().zero_test(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_verdicts_are_proofs() {
        assert_eq!(Expr::zero().is_zero(), ZeroVerdict::ProvenZero);
        assert_eq!(
            (Expr::symbol("y3") * Expr::int(6)).is_zero(),
            ZeroVerdict::ProvenNonzero
        );
    }

    #[test]
    fn trig_identity_is_numerically_zero() {
        let x = Expr::symbol("x");
        let e = x.sin().pow(2) + x.cos().pow(2) - Expr::one();
        assert!(matches!(e.is_zero(), ZeroVerdict::NumericallyZero { samples: 20, .. }));
        let f = x.sin().pow(2) - x.cos().pow(2);
        assert_eq!(f.is_zero(), ZeroVerdict::ProvenNonzero);
    }

    #[test]
    fn sampling_is_reproducible() {
        let s = Sampler::default();
        let v = [Var::symbol("x"), Var::symbol("y0")];
        assert_eq!(s.points(&v, 5), s.points(&v, 5));
        for p in s.points(&v, 50) {
            for x in p.values() {
                assert!((0.1..=2.0).contains(&x.abs()));
            }
        }
    }
}
