//! Finite fields F_{p^f} as explicit quotients F_p[z]/(m(z)) with a
//! deterministically chosen modulus, plus embeddings between them.
//!
//! Elements are canonical digit vectors of length exactly `f`, entries in
//! [0, p). Everything downstream that enumerates residue-field elements
//! (reduction matching, root search) relies on the fixed index order here.

use super::field::{Field, PrimeField};
use super::poly::Poly;
use crate::error::{Error, Result};

/// Common surface for F_p and F_{p^f}; lets the factoring code and the
/// matching search run over either without duplication.
pub trait FiniteField: Field {
    fn char_p(&self) -> u64;
    fn ext_deg(&self) -> usize;

    fn order(&self) -> u128 {
        (self.char_p() as u128).pow(self.ext_deg() as u32)
    }

    /// n-th element in the fixed enumeration, 0 <= n < order. Index 0 is
    /// zero, index 1 is one.
    fn elem_from_index(&self, n: u128) -> Self::Elem;

    fn frobenius(&self, a: &Self::Elem) -> Self::Elem {
        self.elem_pow(a, self.char_p() as u128)
    }

    fn elem_pow(&self, a: &Self::Elem, mut e: u128) -> Self::Elem {
        let mut acc = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }
}

impl FiniteField for PrimeField {
    fn char_p(&self) -> u64 {
        self.p
    }

    fn ext_deg(&self) -> usize {
        1
    }

    fn elem_from_index(&self, n: u128) -> u64 {
        debug_assert!(n < self.p as u128);
        n as u64
    }
}

/// F_{p^f} = F_p[z]/(modulus); the modulus is the first monic irreducible of
/// degree f in the digit enumeration, so two fields with equal (p, f) are
/// identical, not merely isomorphic.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtField {
    pub p: u64,
    pub f: usize,
    pub modulus: Poly<PrimeField>,
    base: PrimeField,
}

/// Search guard: exhaustive element scans stay tractable at this size and the
/// workloads here never legitimately exceed it.
const MAX_ENUM: u128 = 5_000_000;

impl ExtField {
    pub fn new(p: u64, f: usize) -> Result<ExtField> {
        super::rat::require_prime(p)?;
        assert!(f >= 1);
        let base = PrimeField::new(p);
        if f == 1 {
            // z itself: elements are scalars.
            let modulus = Poly::from_coeffs(vec![0u64, 1]);
            return Ok(ExtField { p, f, modulus, base });
        }
        let count = (p as u128).checked_pow(f as u32).filter(|&c| c <= MAX_ENUM);
        let count = count.ok_or_else(|| {
            Error::Internal(format!("residue field F_{{{p}^{f}}} too large"))
        })?;
        for n in 0..count {
            let mut coeffs = digits(n, p, f);
            coeffs.push(1);
            let g = Poly::from_coeffs(coeffs);
            if is_irreducible_fp(&base, &g) {
                return Ok(ExtField { p, f, modulus: g, base });
            }
        }
        Err(Error::Internal(format!(
            "no irreducible of degree {f} over F_{p}"
        )))
    }

    pub fn base(&self) -> &PrimeField {
        &self.base
    }

    fn pad(&self, mut v: Vec<u64>) -> Vec<u64> {
        v.truncate(self.f);
        while v.len() < self.f {
            v.push(0);
        }
        v
    }

    fn reduce(&self, p: Poly<PrimeField>) -> Vec<u64> {
        let r = p.rem(&self.base, &self.modulus);
        self.pad(r.coeffs)
    }

    pub fn to_poly(&self, a: &[u64]) -> Poly<PrimeField> {
        Poly::from_coeffs(a.to_vec()).normalized(&self.base)
    }

    /// Scalar inclusion F_p -> F_{p^f}.
    pub fn from_base(&self, c: u64) -> Vec<u64> {
        self.pad(vec![c % self.p])
    }

    /// The class of z.
    pub fn gen(&self) -> Vec<u64> {
        if self.f == 1 {
            // z = x reduces to 0.
            return vec![0];
        }
        self.pad(vec![0, 1])
    }

    /// Evaluate a polynomial with F_p coefficients at a point of this field.
    pub fn eval_base_poly(&self, g: &Poly<PrimeField>, x: &Vec<u64>) -> Vec<u64> {
        let mut acc = self.zero();
        for c in g.coeffs.iter().rev() {
            acc = self.mul(&acc, x);
            acc = self.add(&acc, &self.from_base(*c));
        }
        acc
    }

    /// Smallest root (in index order) of a polynomial over this field, by
    /// exhaustive scan. Used for embeddings; sizes are guarded at
    /// construction.
    pub fn first_root(&self, g: &Poly<ExtField>) -> Option<Vec<u64>> {
        let n = self.order();
        for i in 0..n {
            let x = self.elem_from_index(i);
            if self.is_zero(&g.eval(self, &x)) {
                return Some(x);
            }
        }
        None
    }
}

fn digits(mut n: u128, p: u64, f: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(f);
    for _ in 0..f {
        out.push((n % p as u128) as u64);
        n /= p as u128;
    }
    out
}

/// Irreducibility of monic g over F_p: x^(p^d) = x mod g and for each prime
/// l | d, gcd(x^(p^(d/l)) - x, g) = 1.
pub fn is_irreducible_fp(fp: &PrimeField, g: &Poly<PrimeField>) -> bool {
    let d = match g.deg() {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    if d == 1 {
        return true;
    }
    let x = Poly::x(fp);
    // x^(p^k) mod g by repeated p-th powering.
    let frob_iter = |k: usize| -> Poly<PrimeField> {
        let mut acc = x.rem(fp, g);
        for _ in 0..k {
            acc = Poly::pow_mod(fp, &acc, fp.p, g);
        }
        acc
    };
    if frob_iter(d) != x.rem(fp, g) {
        return false;
    }
    let mut m = d;
    let mut primes = vec![];
    let mut q = 2;
    while q * q <= m {
        if m % q == 0 {
            primes.push(q);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    for l in primes {
        let h = Poly::sub(fp, &frob_iter(d / l), &x);
        let g1 = Poly::gcd(fp, &h, g);
        if g1.deg() != Some(0) {
            return false;
        }
    }
    true
}

impl Field for ExtField {
    type Elem = Vec<u64>;

    fn zero(&self) -> Vec<u64> {
        vec![0; self.f]
    }

    fn one(&self) -> Vec<u64> {
        self.pad(vec![1])
    }

    fn is_zero(&self, a: &Vec<u64>) -> bool {
        a.iter().all(|&c| c == 0)
    }

    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        (0..self.f)
            .map(|i| self.base.add(&a[i], &b[i]))
            .collect()
    }

    fn neg(&self, a: &Vec<u64>) -> Vec<u64> {
        a.iter().map(|c| self.base.neg(c)).collect()
    }

    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let pa = self.to_poly(a);
        let pb = self.to_poly(b);
        self.reduce(Poly::mul(&self.base, &pa, &pb))
    }

    fn inv(&self, a: &Vec<u64>) -> Option<Vec<u64>> {
        if self.is_zero(a) {
            return None;
        }
        let (g, s, _) = Poly::xgcd(&self.base, &self.to_poly(a), &self.modulus);
        debug_assert_eq!(g.deg(), Some(0));
        Some(self.reduce(s))
    }

    fn from_i64(&self, n: i64) -> Vec<u64> {
        self.from_base(self.base.from_i64(n))
    }

    fn cmp_elems(&self, a: &Vec<u64>, b: &Vec<u64>) -> std::cmp::Ordering {
        a.iter().rev().cmp(b.iter().rev())
    }
}

impl FiniteField for ExtField {
    fn char_p(&self) -> u64 {
        self.p
    }

    fn ext_deg(&self) -> usize {
        self.f
    }

    fn elem_from_index(&self, n: u128) -> Vec<u64> {
        digits(n, self.p, self.f)
    }
}

/// Embedding of `sub` into `sup` (ext degrees must divide): the image of
/// sub's generator is the first root of sub's modulus in sup.
pub fn embed_generator(sub: &ExtField, sup: &ExtField) -> Result<Vec<u64>> {
    assert_eq!(sub.p, sup.p);
    assert!(sup.f % sub.f == 0, "no embedding: degree does not divide");
    let lifted = Poly::from_coeffs(
        sub.modulus
            .coeffs
            .iter()
            .map(|&c| sup.from_base(c))
            .collect::<Vec<_>>(),
    )
    .normalized(sup);
    sup.first_root(&lifted)
        .ok_or_else(|| Error::Internal("embedding root not found".into()))
}

/// Push an element of `sub` through the embedding with generator image `img`.
pub fn apply_embedding(sub: &ExtField, sup: &ExtField, img: &Vec<u64>, a: &[u64]) -> Vec<u64> {
    let rep = sub.to_poly(a);
    let mut acc = sup.zero();
    for c in rep.coeffs.iter().rev() {
        acc = sup.mul(&acc, img);
        acc = sup.add(&acc, &sup.from_base(*c));
    }
    acc
}

/// Element tagged with its field shape, for crossing module boundaries in
/// reports.
#[derive(Clone, Debug, PartialEq)]
pub struct FqElem {
    pub p: u64,
    pub f: usize,
    pub rep: Vec<u64>,
}

impl FqElem {
    pub fn format(&self) -> String {
        // Polynomial in z, low terms first suppressed when zero.
        if self.rep.iter().all(|&c| c == 0) {
            return "0".into();
        }
        let mut parts = vec![];
        for (i, &c) in self.rep.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let term = match (i, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "z".into(),
                (1, c) => format!("{c}*z"),
                (i, 1) => format!("z^{i}"),
                (i, c) => format!("{c}*z^{i}"),
            };
            parts.push(term);
        }
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_has_canonical_modulus() {
        // Over F_2 the first irreducible quadratic in digit order is
        // z^2 + z + 1.
        let k = ExtField::new(2, 2).unwrap();
        assert_eq!(k.modulus.coeffs, vec![1, 1, 1]);
        let z = k.gen();
        let z2 = k.mul(&z, &z);
        // z^2 = z + 1.
        assert_eq!(z2, vec![1, 1]);
    }

    #[test]
    fn inverses_work_in_f9() {
        let k = ExtField::new(3, 2).unwrap();
        for i in 1..9u128 {
            let a = k.elem_from_index(i);
            let b = k.inv(&a).unwrap();
            assert_eq!(k.mul(&a, &b), k.one());
        }
    }

    #[test]
    fn embedding_preserves_arithmetic() {
        let k = ExtField::new(2, 2).unwrap();
        let l = ExtField::new(2, 4).unwrap();
        let img = embed_generator(&k, &l).unwrap();
        let a = k.gen();
        let b = k.add(&k.gen(), &k.one());
        let ia = apply_embedding(&k, &l, &img, &a);
        let ib = apply_embedding(&k, &l, &img, &b);
        let prod = apply_embedding(&k, &l, &img, &k.mul(&a, &b));
        assert_eq!(l.mul(&ia, &ib), prod);
    }

    #[test]
    fn frobenius_fixes_prime_subfield() {
        let k = ExtField::new(5, 2).unwrap();
        for c in 0..5 {
            let a = k.from_base(c);
            assert_eq!(k.frobenius(&a), a);
        }
        // And z^5 != z in F_25.
        assert_ne!(k.frobenius(&k.gen()), k.gen());
    }
}
