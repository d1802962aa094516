//! Multivariate polynomial gcd over Z.
//!
//! Pipeline: strip integer and monomial content, handle variables private to
//! one argument, certify coprimality through univariate images mod a large
//! prime, then try the heuristic (evaluation/interpolation) gcd and fall back
//! to a primitive remainder sequence.

use std::collections::BTreeSet;

use dashu_int::ops::{DivRem, Gcd, UnsignedAbs};

use crate::poly::{Int, Mono, Poly};
use crate::var::Var;

/// Gcd with positive leading coefficient.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone().sign_normalized();
    }
    if b.is_zero() {
        return a.clone().sign_normalized();
    }
    if a == b {
        return a.clone().sign_normalized();
    }
    let ca = a.content();
    let cb = b.content();
    let c = Int::from((&ca).gcd(&cb));
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Poly::constant(c);
    }
    let ma = a.mono_content();
    let mb = b.mono_content();
    let m = ma.gcd(&mb);
    let a1 = strip(a, &ca, &ma);
    let b1 = strip(b, &cb, &mb);
    let g = gcd_primitive(&a1, &b1);
    g.mul_term(&m, &c)
}

/// Returns `(g, a/g, b/g)`.
pub fn cofactors(a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
    let g = gcd(a, b);
    if g.is_one() {
        return (g, a.clone(), b.clone());
    }
    let ca = a.div_exact(&g).expect("gcd divides first argument");
    let cb = b.div_exact(&g).expect("gcd divides second argument");
    (g, ca, cb)
}

fn strip(p: &Poly, c: &Int, m: &Mono) -> Poly {
    let q = if c.is_one() {
        p.clone()
    } else {
        p.div_int_exact(c).unwrap()
    };
    let q = if m.is_one() {
        q
    } else {
        q.div_exact(&Poly::monomial(m.clone(), Int::ONE)).unwrap()
    };
    q.sign_normalized()
}

fn primitive(p: Poly) -> Poly {
    let c = p.content();
    let p = if c.is_one() || c.is_zero() {
        p
    } else {
        p.div_int_exact(&c).unwrap()
    };
    p.sign_normalized()
}

/// Gcd of primitive polynomials without monomial content.
fn gcd_primitive(a: &Poly, b: &Poly) -> Poly {
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Poly::one();
    }
    if a == b || *a == b.neg() {
        return a.clone().sign_normalized();
    }
    let va = a.vars();
    let vb = b.vars();
    if va.is_disjoint(&vb) {
        return Poly::one();
    }
    // A variable present in only one argument cannot occur in the gcd.
    if let Some(v) = va.difference(&vb).next() {
        return gcd_with_content(a, *v, b);
    }
    if let Some(v) = vb.difference(&va).next() {
        return gcd_with_content(b, *v, a);
    }
    let vars: Vec<Var> = va.into_iter().collect();
    if coprime_mod_p(a, b, &vars) {
        return Poly::one();
    }
    if b.len() <= a.len() {
        if a.div_exact(b).is_some() {
            return b.clone().sign_normalized();
        }
    } else if b.div_exact(a).is_some() {
        return a.clone().sign_normalized();
    }
    if let Some(h) = heu_gcd(a, b, &vars) {
        return h;
    }
    prs_gcd(a, b, &vars)
}

/// gcd(content of `a` in `v`, `b`), with `v` absent from `b`.
fn gcd_with_content(a: &Poly, v: Var, b: &Poly) -> Poly {
    let mut coeffs = a.coeffs_in(v);
    coeffs.retain(|c| !c.is_zero());
    coeffs.sort_by_key(|c| c.len());
    let mut g = b.clone();
    for c in coeffs {
        g = gcd(&g, &c);
        if g.as_constant().is_some() {
            return Poly::one();
        }
    }
    primitive(g)
}

// ---------------------------------------------------------------------------
// Coprimality certificate via univariate images mod p.

const P: u64 = (1u64 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn invmod(a: u64) -> u64 {
    powmod(a, P - 2)
}

fn int_mod_p(c: &Int) -> u64 {
    let p = Int::from(P);
    let (_, mut r) = c.div_rem(&p);
    if r.signum() == Int::NEG_ONE {
        r += &p;
    }
    u64::try_from(&r).unwrap()
}

struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        (z ^ (z >> 31)) % P
    }
}

/// Image of `p` in Z_p[v] with the other variables evaluated.
fn univariate_image(p: &Poly, v: Var, vars: &[Var], vals: &[u64]) -> Vec<u64> {
    let d = p.degree_in(v) as usize;
    let mut out = vec![0u64; d + 1];
    for (m, c) in p.terms() {
        let mut t = int_mod_p(c);
        let mut e_v = 0;
        for (w, e) in m.pows() {
            if *w == v {
                e_v = *e as usize;
            } else {
                let i = vars.binary_search(w).unwrap();
                t = mulmod(t, powmod(vals[i], *e as u64));
            }
        }
        out[e_v] = (out[e_v] + t) % P;
    }
    out
}

fn trim(p: &mut Vec<u64>) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}

fn uni_rem(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let inv = invmod(b[db]);
    while r.len() > db && !(r.len() == 1 && r[0] == 0) {
        let dr = r.len() - 1;
        let q = mulmod(r[dr], inv);
        for i in 0..=db {
            let s = mulmod(q, b[i]);
            r[dr - db + i] = (r[dr - db + i] + P - s) % P;
        }
        r.pop();
        if r.is_empty() {
            r.push(0);
        }
        trim(&mut r);
    }
    r
}

fn uni_gcd_degree(a: Vec<u64>, b: Vec<u64>) -> usize {
    let (mut a, mut b) = (a, b);
    trim(&mut a);
    trim(&mut b);
    loop {
        if b.len() == 1 && b[0] == 0 {
            return a.len() - 1;
        }
        if b.len() == 1 {
            return 0;
        }
        let r = uni_rem(&a, &b);
        a = b;
        b = r;
    }
}

/// True only if `a` and `b` are certainly coprime (both primitive).
fn coprime_mod_p(a: &Poly, b: &Poly, vars: &[Var]) -> bool {
    let mut rng = SplitMix(0x005E_ED0F_C0DE ^ (a.len() as u64) << 20 ^ b.len() as u64);
    for &v in vars {
        let da = a.degree_in(v) as usize;
        let db = b.degree_in(v) as usize;
        if da == 0 || db == 0 {
            continue;
        }
        let mut decided = false;
        for _ in 0..3 {
            let vals: Vec<u64> = vars.iter().map(|_| rng.next()).collect();
            let ia = univariate_image(a, v, vars, &vals);
            let ib = univariate_image(b, v, vars, &vals);
            if ia[da] == 0 || ib[db] == 0 {
                continue;
            }
            if uni_gcd_degree(ia, ib) > 0 {
                return false;
            }
            decided = true;
            break;
        }
        if !decided {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Heuristic gcd.

const HEU_TRIES: usize = 6;

fn isqrt(n: &Int) -> Int {
    use dashu_int::ops::SquareRoot;
    Int::from(n.unsigned_abs().sqrt())
}

fn heu_gcd(f: &Poly, g: &Poly, vars: &[Var]) -> Option<Poly> {
    if vars.is_empty() {
        let a = f.as_constant()?;
        let b = g.as_constant()?;
        return Some(Poly::constant(Int::from(a.gcd(&b))));
    }
    let cf = f.content();
    let cg = g.content();
    let c = Int::from((&cf).gcd(&cg));
    let f = f.div_int_exact(&cf).unwrap();
    let g = g.div_int_exact(&cg).unwrap();
    let v = vars[0];
    let rest = &vars[1..];
    if !f.contains_var(v) || !g.contains_var(v) {
        // Content-style reduction keeps the recursion honest.
        let h = if !f.contains_var(v) {
            gcd_with_content(&g, v, &f)
        } else {
            gcd_with_content(&f, v, &g)
        };
        return Some(h.mul_int(&c));
    }
    let nf = f.max_norm();
    let ng = g.max_norm();
    let b = Int::from(2) * nf.clone().min(ng.clone()) + Int::from(29);
    let lf = f.lc().unsigned_abs();
    let lg = g.lc().unsigned_abs();
    let r1 = nf.unsigned_abs() / lf;
    let r2 = ng.unsigned_abs() / lg;
    let alt = Int::from(2) * Int::from(r1.min(r2)) + Int::from(4);
    let mut xi = b.clone().min(Int::from(99) * isqrt(&b)).max(alt);
    for _ in 0..HEU_TRIES {
        let ff = f.eval_int(v, &xi);
        let gg = g.eval_int(v, &xi);
        if !ff.is_zero() && !gg.is_zero() {
            let rest_vars: Vec<Var> = {
                let mut s: BTreeSet<Var> = ff.vars();
                s.extend(gg.vars());
                rest.iter().copied().filter(|w| s.contains(w)).collect()
            };
            if let Some(hh) = heu_gcd(&ff, &gg, &rest_vars) {
                let h = primitive(interpolate(&hh, v, &xi));
                if !h.is_zero() && f.div_exact(&h).is_some() && g.div_exact(&h).is_some() {
                    return Some(h.mul_int(&c));
                }
                if let Some(cff_img) = ff.div_exact(&hh) {
                    let cff = interpolate(&cff_img, v, &xi);
                    if !cff.is_zero() {
                        if let Some(h) = f.div_exact(&cff) {
                            let h = primitive(h);
                            if g.div_exact(&h).is_some() {
                                return Some(h.mul_int(&c));
                            }
                        }
                    }
                }
                if let Some(cfg_img) = gg.div_exact(&hh) {
                    let cfg = interpolate(&cfg_img, v, &xi);
                    if !cfg.is_zero() {
                        if let Some(h) = g.div_exact(&cfg) {
                            let h = primitive(h);
                            if f.div_exact(&h).is_some() {
                                return Some(h.mul_int(&c));
                            }
                        }
                    }
                }
            }
        }
        let s = isqrt(&isqrt(&xi));
        xi = Int::from(73794) * &xi * s / Int::from(27011);
    }
    None
}

/// Recovers a polynomial in `v` from its image at `v = xi` using balanced digits.
fn interpolate(h: &Poly, v: Var, xi: &Int) -> Poly {
    let half = xi / Int::from(2);
    let mut out = Vec::new();
    for (m, c) in h.terms() {
        let mut c = c.clone();
        let mut k = 0u32;
        while !c.is_zero() {
            let (mut q, mut r) = c.div_rem(xi);
            if r.signum() == Int::NEG_ONE {
                r += xi;
                q -= Int::ONE;
            }
            if r > half {
                r -= xi;
                q += Int::ONE;
            }
            if !r.is_zero() {
                out.push((m.mul(&Mono::var(v, k)), r));
            }
            c = q;
            k += 1;
        }
    }
    Poly::from_terms(out)
}

// ---------------------------------------------------------------------------
// Primitive remainder sequence fallback.

/// Content of `p` as a polynomial in `v`: the gcd of its coefficients.
pub fn content_in(p: &Poly, v: Var) -> Poly {
    let mut coeffs = p.coeffs_in(v);
    coeffs.retain(|c| !c.is_zero());
    coeffs.sort_by_key(|c| c.len());
    let mut g = Poly::zero();
    for c in coeffs {
        g = gcd(&g, &c);
        if g.as_constant().is_some() {
            return Poly::one();
        }
    }
    g
}

fn prem(a: &Poly, b: &Poly, v: Var) -> Poly {
    let db = b.degree_in(v);
    let bc = b.coeffs_in(v);
    let lb = bc[db as usize].clone();
    let mut r = a.clone();
    let mut e = a.degree_in(v) as i64 - db as i64 + 1;
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lr = r.coeffs_in(v)[dr as usize].clone();
        let shift = Poly::monomial(Mono::var(v, dr - db), Int::ONE);
        r = r.mul(&lb).sub(&lr.mul(&shift).mul(b));
        e -= 1;
    }
    if e > 0 {
        r = r.mul(&lb.pow(e as u32));
    }
    r
}

fn prs_gcd(a: &Poly, b: &Poly, vars: &[Var]) -> Poly {
    let v = vars[0];
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let c = gcd(&ca, &cb);
    let mut f = a.div_exact(&ca).unwrap();
    let mut g = b.div_exact(&cb).unwrap();
    if f.degree_in(v) < g.degree_in(v) {
        std::mem::swap(&mut f, &mut g);
    }
    while !g.is_zero() && g.degree_in(v) > 0 {
        let r = prem(&f, &g, v);
        f = g;
        g = if r.is_zero() {
            r
        } else {
            let cr = content_in(&r, v);
            primitive(r.div_exact(&cr).unwrap())
        };
    }
    let h = if g.is_zero() { primitive(f) } else { Poly::one() };
    primitive(h.mul(&c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Poly {
        Poly::var(Var::symbol(n))
    }
    fn k(n: i64) -> Poly {
        Poly::constant(Int::from(n))
    }

    #[test]
    fn gcd_recovers_common_factor() {
        let g0 = v("y2").square().add(&k(1));
        let a = g0.mul(&v("y3").add(&v("x")));
        let b = g0.mul(&v("y3").sub(&k(2))).mul(&v("y2"));
        assert_eq!(gcd(&a, &b), g0);
    }

    #[test]
    fn coprime_pair_gives_one() {
        let a = v("y2").square().add(&k(1));
        let b = v("y2").add(&v("y3"));
        assert!(gcd(&a, &b).is_one());
    }

    #[test]
    fn multivariate_power_gcd() {
        let f1 = v("x").mul(&v("y1")).add(&v("y2").pow(2)).sub(&k(3));
        let f2 = v("y0").add(&v("y3")).add(&k(1));
        let a = f1.pow(3).mul(&f2);
        let b = f1.pow(2).mul(&f2.pow(2)).mul(&v("y1").add(&k(5)));
        let g = f1.pow(2).mul(&f2);
        assert_eq!(gcd(&a, &b), g.sign_normalized());
    }

    #[test]
    fn prs_agrees_with_heuristic() {
        let f1 = v("x").mul(&v("y1")).add(&k(2));
        let f2 = v("x").sub(&v("y1"));
        let a = f1.mul(&f2).mul(&v("x").add(&k(7)));
        let b = f1.mul(&f2).mul(&v("y1").sub(&k(7)));
        let vars: Vec<Var> = a.vars().into_iter().collect();
        let p = prs_gcd(&a, &b, &vars);
        assert_eq!(p, f1.mul(&f2).sign_normalized());
        assert_eq!(gcd(&a, &b), p);
    }

    #[test]
    fn integer_content_and_monomials() {
        let a = v("x").square().mul_int(&Int::from(6));
        let b = v("x").mul(&v("y0")).mul_int(&Int::from(4));
        assert_eq!(gcd(&a, &b), v("x").mul_int(&Int::from(2)));
    }
}
