//! Linear algebra over the field of expressions.

#![allow(clippy::needless_range_loop)]

use crate::error::SolveError;
use crate::expr::Expr;
use crate::var::Var;
use crate::zero::{Sampler, ZeroVerdict};

fn nonzero(e: &Expr, sampler: &Sampler) -> Result<bool, ()> {
    if e.is_zero_poly() {
        return Ok(false);
    }
    if e.is_rational() {
        return Ok(true);
    }
    match sampler.zero_test(e) {
        ZeroVerdict::ProvenNonzero => Ok(true),
        ZeroVerdict::ProvenZero | ZeroVerdict::NumericallyZero { .. } => Ok(false),
        ZeroVerdict::Unknown => Err(()),
    }
}

/// Gauss–Jordan elimination on `[a | b]` where `b` has several right-hand
/// side columns. Returns the solution columns, one `Vec` per unknown.
fn eliminate(a: &[Vec<Expr>], b: &[Vec<Expr>], sampler: &Sampler) -> Result<Vec<Vec<Expr>>, SolveError> {
    let m = a.len();
    let n = a.first().map(|r| r.len()).unwrap_or(0);
    if m < n {
        return Err(SolveError::Shape(format!("{m} equations for {n} unknowns")));
    }
    if b.len() != m {
        return Err(SolveError::Shape("right-hand side length".into()));
    }
    let mut rows: Vec<(Vec<Expr>, Vec<Expr>)> = a.iter().cloned().zip(b.iter().cloned()).collect();
    for col in 0..n {
        // Smallest nonzero pivot keeps expression swell down.
        let mut best: Option<(usize, usize)> = None;
        let mut undecided = false;
        for (r, row) in rows.iter().enumerate().skip(col) {
            match nonzero(&row.0[col], sampler) {
                Ok(true) => {
                    let size = row.0[col].size();
                    if best.is_none_or(|(_, s)| size < s) {
                        best = Some((r, size));
                    }
                }
                Ok(false) => {}
                Err(()) => undecided = true,
            }
        }
        let Some((p, _)) = best else {
            return Err(if undecided {
                SolveError::UndecidedPivot { column: col }
            } else {
                SolveError::Singular { column: col }
            });
        };
        rows.swap(col, p);
        let inv = rows[col].0[col].try_inv().expect("pivot is nonzero");
        let (prow, prhs) = {
            let (r, h) = &rows[col];
            let r: Vec<Expr> = r.iter().map(|e| e.mul_ref(&inv)).collect();
            let h: Vec<Expr> = h.iter().map(|e| e.mul_ref(&inv)).collect();
            (r, h)
        };
        rows[col] = (prow.clone(), prhs.clone());
        for (r, row) in rows.iter_mut().enumerate() {
            if r == col || row.0[col].is_zero_poly() {
                continue;
            }
            let f = row.0[col].clone();
            for j in col..n {
                if !prow[j].is_zero_poly() {
                    row.0[j] = row.0[j].sub_ref(&f.mul_ref(&prow[j]));
                }
            }
            for (j, h) in prhs.iter().enumerate() {
                if !h.is_zero_poly() {
                    row.1[j] = row.1[j].sub_ref(&f.mul_ref(h));
                }
            }
        }
    }
    for (r, row) in rows.iter().enumerate().skip(n) {
        for h in &row.1 {
            if let Ok(true) | Err(()) = nonzero(h, sampler) {
                return Err(SolveError::Inconsistent {
                    equation: r,
                    residual: h.to_string(),
                });
            }
        }
    }
    Ok(rows.into_iter().take(n).map(|(_, h)| h).collect())
}

/// Solves `a x = b` (square or consistent overdetermined) and verifies every
/// equation by substitution.
pub fn solve_linear(a: &[Vec<Expr>], b: &[Expr], sampler: &Sampler) -> Result<Vec<Expr>, SolveError> {
    let rhs: Vec<Vec<Expr>> = b.iter().map(|e| vec![e.clone()]).collect();
    let sol: Vec<Expr> = eliminate(a, &rhs, sampler)?
        .into_iter()
        .map(|mut v| v.pop().unwrap())
        .collect();
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let lhs: Expr = row.iter().zip(&sol).map(|(c, x)| c.mul_ref(x)).sum();
        let res = lhs.sub_ref(bi);
        if !sampler.zero_test(&res).is_zero() {
            return Err(SolveError::Inconsistent {
                equation: i,
                residual: res.to_string(),
            });
        }
    }
    Ok(sol)
}

/// Solves relations `eq_i = 0` that are linear in the symbols `unknowns`.
pub fn solve_relations(eqs: &[Expr], unknowns: &[Var], sampler: &Sampler) -> Result<Vec<Expr>, SolveError> {
    let zero_map: Vec<(Var, Expr)> = unknowns.iter().map(|u| (*u, Expr::zero())).collect();
    let mut a = Vec::with_capacity(eqs.len());
    let mut b = Vec::with_capacity(eqs.len());
    for (i, e) in eqs.iter().enumerate() {
        let mut row = Vec::with_capacity(unknowns.len());
        for u in unknowns {
            let c = e.diff(*u);
            if unknowns.iter().any(|w| c.depends_on(*w)) {
                return Err(SolveError::NonLinear {
                    equation: i,
                    unknown: format!("{u:?}"),
                });
            }
            row.push(c);
        }
        a.push(row);
        b.push(e.subs(&zero_map).neg_ref());
    }
    solve_linear(&a, &b, sampler)
}

/// Inverse of a square matrix.
pub fn invert(m: &[Vec<Expr>], sampler: &Sampler) -> Result<Vec<Vec<Expr>>, SolveError> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(SolveError::Shape("matrix is not square".into()));
    }
    let id: Vec<Vec<Expr>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Expr::one() } else { Expr::zero() })
                .collect()
        })
        .collect();
    eliminate(m, &id, sampler)
}

/// Determinant by Gaussian elimination over the field.
pub fn determinant(m: &[Vec<Expr>], sampler: &Sampler) -> Expr {
    let n = m.len();
    let mut a: Vec<Vec<Expr>> = m.to_vec();
    let mut det = Expr::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| matches!(nonzero(&a[r][col], sampler), Ok(true))) else {
            return Expr::zero();
        };
        if p != col {
            a.swap(p, col);
            det = det.neg_ref();
        }
        let piv = a[col][col].clone();
        det = det.mul_ref(&piv);
        let inv = piv.try_inv().unwrap();
        for r in col + 1..n {
            if a[r][col].is_zero_poly() {
                continue;
            }
            let f = a[r][col].mul_ref(&inv);
            for j in col..n {
                let t = f.mul_ref(&a[col][j]);
                a[r][j] = a[r][j].sub_ref(&t);
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let a = Var::symbol("_a");
        let b = Var::symbol("_b");
        let eqs = [Expr::var(a) + Expr::var(b) - Expr::int(2), Expr::var(a) - Expr::var(b)];
        let sol = solve_relations(&eqs, &[a, b], &Sampler::default()).unwrap();
        assert_eq!(sol, vec![Expr::one(), Expr::one()]);
    }

    #[test]
    fn symbolic_coefficient() {
        let a = Var::symbol("_a");
        let y3 = Expr::symbol("y3");
        let eqs = [&y3 * Expr::var(a) - Expr::int(3) * &y3 * &y3];
        let sol = solve_relations(&eqs, &[a], &Sampler::default()).unwrap();
        assert_eq!(sol[0], Expr::int(3) * &y3);
    }

    #[test]
    fn singular_and_inconsistent() {
        let a = Var::symbol("_a");
        let b = Var::symbol("_b");
        let s = Sampler::default();
        let eqs = [
            Expr::var(a) + Expr::var(b),
            Expr::var(a) * Expr::int(2) + Expr::var(b) * Expr::int(2),
        ];
        assert!(matches!(
            solve_relations(&eqs, &[a, b], &s),
            Err(SolveError::Singular { column: 1 })
        ));
        let eqs = [Expr::var(a) - Expr::one(), Expr::var(a) - Expr::int(2)];
        assert!(matches!(
            solve_relations(&eqs, &[a], &s),
            Err(SolveError::Inconsistent { .. })
        ));
    }

    #[test]
    fn inverse_times_matrix() {
        let x = Expr::symbol("x");
        let m = vec![vec![Expr::one(), x.clone()], vec![Expr::zero(), &x + &Expr::one()]];
        let s = Sampler::default();
        let inv = invert(&m, &s).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e: Expr = (0..2).map(|k| m[i][k].mul_ref(&inv[k][j])).sum();
                assert_eq!(e, if i == j { Expr::one() } else { Expr::zero() });
            }
        }
        assert_eq!(determinant(&m, &s), &x + &Expr::one());
    }
}
