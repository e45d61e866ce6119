//! Factoring monic polynomials over finite fields: squarefree decomposition
//! with p-th root descent, distinct-degree splitting, then equal-degree
//! splitting (randomized, seeded by the caller). Output order is canonical so
//! repeated runs agree byte for byte.

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::field::Field;
use super::fq::FiniteField;
use super::poly::Poly;
use crate::error::Result;

/// Monic irreducible factors with multiplicities, sorted canonically.
pub fn factor_monic<F: FiniteField>(
    f: &F,
    a: &Poly<F>,
    rng: &mut ChaCha20Rng,
) -> Result<Vec<(Poly<F>, usize)>> {
    assert!(a.is_monic(f), "factor_monic expects a monic input");
    let mut out: Vec<(Poly<F>, usize)> = vec![];
    for (part, mult) in squarefree_decomposition(f, a) {
        for (deg, prod) in distinct_degree(f, &part) {
            for irr in equal_degree(f, &prod, deg, rng) {
                out.push((irr, mult));
            }
        }
    }
    out.sort_by(|(p1, _), (p2, _)| Poly::cmp_canonical(f, p1, p2));
    Ok(out)
}

/// Distinct roots of `a` in F (no multiplicities): the roots of the gcd with
/// x^q - x, read off its linear factors.
pub fn distinct_roots<F: FiniteField>(
    f: &F,
    a: &Poly<F>,
    rng: &mut ChaCha20Rng,
) -> Result<Vec<F::Elem>> {
    let monic = a.monic(f);
    // gcd(a, x^q - x) collects exactly the distinct roots.
    let xq = pow_mod_big(f, &Poly::x(f), &BigUint::from(f.order()), &monic);
    let lin = Poly::gcd(f, &Poly::sub(f, &xq, &Poly::x(f)), &monic);
    let mut roots = vec![];
    if lin.deg() == Some(0) {
        return Ok(roots);
    }
    for irr in equal_degree(f, &lin, 1, rng) {
        roots.push(f.neg(&irr.coeffs[0]));
    }
    roots.sort_by(|a, b| f.cmp_elems(a, b));
    Ok(roots)
}

/// Rabin's test over F_q.
pub fn is_irreducible<F: FiniteField>(f: &F, g: &Poly<F>) -> bool {
    let d = match g.deg() {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    if d == 1 {
        return true;
    }
    let g = g.monic(f);
    let q = BigUint::from(f.order());
    let x = Poly::x(f).rem(f, &g);
    let frob_iter = |k: usize| -> Poly<F> {
        let mut acc = x.clone();
        for _ in 0..k {
            acc = pow_mod_big(f, &acc, &q, &g);
        }
        acc
    };
    if frob_iter(d) != x {
        return false;
    }
    for l in prime_divisors(d) {
        let h = Poly::sub(f, &frob_iter(d / l), &x);
        if Poly::gcd(f, &h, &g).deg() != Some(0) {
            return false;
        }
    }
    true
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = vec![];
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// (squarefree part, multiplicity) pairs in characteristic p, handling the
/// a' = 0 case by taking p-th roots coefficient-wise.
fn squarefree_decomposition<F: FiniteField>(f: &F, a: &Poly<F>) -> Vec<(Poly<F>, usize)> {
    let p = f.char_p() as usize;
    let mut out = vec![];
    let da = a.derivative(f);
    if da.is_zero() {
        // Pure p-th power.
        let root = pth_root(f, a);
        for (g, m) in squarefree_decomposition(f, &root) {
            out.push((g, m * p));
        }
        return out;
    }
    let mut c = Poly::gcd(f, a, &da);
    let mut w = a.div_rem(f, &c).0;
    let mut i = 1usize;
    while w.deg() != Some(0) {
        let y = Poly::gcd(f, &w, &c);
        let z = w.div_rem(f, &y).0;
        if z.deg() != Some(0) {
            out.push((z.monic(f), i));
        }
        i += 1;
        w = y;
        c = c.div_rem(f, &w).0;
    }
    if c.deg() != Some(0) {
        let root = pth_root(f, &c);
        for (g, m) in squarefree_decomposition(f, &root) {
            out.push((g, m * p));
        }
    }
    out
}

/// For a polynomial in x^p, the unique b with b^p = a: indices divided by p,
/// coefficients sent through the inverse Frobenius a -> a^(q/p).
fn pth_root<F: FiniteField>(f: &F, a: &Poly<F>) -> Poly<F> {
    let p = f.char_p() as usize;
    let inv_frob_exp = f.order() / f.char_p() as u128;
    let mut coeffs = vec![];
    for (i, c) in a.coeffs.iter().enumerate() {
        if i % p == 0 {
            coeffs.push(f.elem_pow(c, inv_frob_exp));
        } else {
            debug_assert!(f.is_zero(c), "pth_root on non-p-power polynomial");
        }
    }
    Poly::from_coeffs(coeffs).normalized(f)
}

/// Splits a monic squarefree polynomial into (degree, product of all
/// irreducible factors of that degree) pairs.
fn distinct_degree<F: FiniteField>(f: &F, a: &Poly<F>) -> Vec<(usize, Poly<F>)> {
    let mut v = a.monic(f);
    let mut out = vec![];
    let q = BigUint::from(f.order());
    let mut h = Poly::x(f).rem(f, &v);
    let mut d = 0usize;
    while v.deg().map_or(false, |dv| dv >= 2 * (d + 1)) {
        d += 1;
        h = pow_mod_big(f, &h, &q, &v);
        let g = Poly::gcd(f, &Poly::sub(f, &h, &Poly::x(f)), &v);
        if g.deg() != Some(0) {
            out.push((d, g.clone()));
            v = v.div_rem(f, &g).0;
            h = h.rem(f, &v);
        }
    }
    if v.deg().map_or(false, |dv| dv >= 1) {
        out.push((v.degree(), v));
    }
    out
}

/// Cantor-Zassenhaus equal-degree splitting of a product of irreducibles all
/// of degree d.
fn equal_degree<F: FiniteField>(
    f: &F,
    a: &Poly<F>,
    d: usize,
    rng: &mut ChaCha20Rng,
) -> Vec<Poly<F>> {
    let n = a.degree();
    if n == d {
        return vec![a.monic(f)];
    }
    let a = a.monic(f);
    let split = loop {
        let r = random_poly(f, n, rng);
        if r.deg().map_or(true, |dr| dr == 0) {
            continue;
        }
        let g = Poly::gcd(f, &r, &a);
        if g.deg() != Some(0) {
            break g;
        }
        let s = if f.char_p() == 2 {
            // Trace map over F_{2^k}: sum of r^(2^i) for i < k*d.
            let k = f.ext_deg();
            let mut t = r.rem(f, &a);
            let mut acc = t.clone();
            for _ in 1..(k * d) {
                t = Poly::mul(f, &t, &t).rem(f, &a);
                acc = Poly::add(f, &acc, &t);
            }
            acc
        } else {
            // r^((q^d - 1)/2) - 1 vanishes on about half the factors.
            let e = (BigUint::from(f.order()).pow(d as u32) - BigUint::one()) / 2u32;
            let s = pow_mod_big(f, &r, &e, &a);
            Poly::sub(f, &s, &Poly::one(f))
        };
        let g = Poly::gcd(f, &s, &a);
        if g.deg().map_or(false, |dg| dg > 0 && dg < n) {
            break g;
        }
    };
    let rest = a.div_rem(f, &split).0;
    let mut out = equal_degree(f, &split, d, rng);
    out.extend(equal_degree(f, &rest, d, rng));
    out
}

fn random_poly<F: FiniteField>(f: &F, deg_lt: usize, rng: &mut ChaCha20Rng) -> Poly<F> {
    let order = f.order();
    let coeffs = (0..deg_lt)
        .map(|_| f.elem_from_index(rng.gen_range(0..order)))
        .collect();
    Poly::from_coeffs(coeffs).normalized(f)
}

fn pow_mod_big<F: Field>(f: &F, base: &Poly<F>, e: &BigUint, m: &Poly<F>) -> Poly<F> {
    let mut acc = Poly::one(f).rem(f, m);
    let mut b = base.rem(f, m);
    let bits = e.bits();
    for i in 0..bits {
        if e.bit(i) {
            acc = Poly::mul(f, &acc, &b).rem(f, m);
        }
        if i + 1 < bits {
            b = Poly::mul(f, &b, &b).rem(f, m);
        }
    }
    acc
}
