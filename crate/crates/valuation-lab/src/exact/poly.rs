//! Dense univariate polynomials over any `Field`, with the Euclidean tool
//! chest the valuation machinery leans on: division, gcd, resultants,
//! Lagrange interpolation, shifts, and modular powers.

use super::field::Field;

/// Coefficients low to high; no trailing zeros; `vec![]` is the zero
/// polynomial.
#[derive(Clone, Debug)]
pub struct Poly<F: Field> {
    pub coeffs: Vec<F::Elem>,
}

impl<F: Field> PartialEq for Poly<F> {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl<F: Field> Poly<F> {
    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn one(f: &F) -> Self {
        Poly {
            coeffs: vec![f.one()],
        }
    }

    pub fn x(f: &F) -> Self {
        Poly {
            coeffs: vec![f.zero(), f.one()],
        }
    }

    pub fn constant(f: &F, c: F::Elem) -> Self {
        let mut p = Poly { coeffs: vec![c] };
        p.trim(f);
        p
    }

    pub fn from_coeffs(coeffs: Vec<F::Elem>) -> Self {
        // Callers pass canonical zeros; trim needs the field, so do a lazy
        // structural trim here and a field trim inside operations.
        Poly { coeffs }
    }

    fn trim(&mut self, f: &F) {
        while let Some(c) = self.coeffs.last() {
            if f.is_zero(c) {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn normalized(mut self, f: &F) -> Self {
        self.trim(f);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of a nonzero polynomial.
    pub fn degree(&self) -> usize {
        debug_assert!(!self.is_zero(), "degree of zero polynomial");
        self.coeffs.len() - 1
    }

    pub fn deg(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn lc<'a>(&'a self) -> &'a F::Elem {
        self.coeffs.last().expect("lc of zero polynomial")
    }

    pub fn coeff(&self, f: &F, i: usize) -> F::Elem {
        self.coeffs.get(i).cloned().unwrap_or_else(|| f.zero())
    }

    pub fn is_monic(&self, f: &F) -> bool {
        !self.is_zero() && {
            let one = f.one();
            *self.lc() == one
        }
    }

    pub fn add(f: &F, a: &Self, b: &Self) -> Self {
        let n = a.coeffs.len().max(b.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(f.add(&a.coeff(f, i), &b.coeff(f, i)));
        }
        Poly { coeffs: out }.normalized(f)
    }

    pub fn sub(f: &F, a: &Self, b: &Self) -> Self {
        let n = a.coeffs.len().max(b.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(f.sub(&a.coeff(f, i), &b.coeff(f, i)));
        }
        Poly { coeffs: out }.normalized(f)
    }

    pub fn neg(&self, f: &F) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|c| f.neg(c)).collect(),
        }
    }

    pub fn mul(f: &F, a: &Self, b: &Self) -> Self {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![f.zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, ca) in a.coeffs.iter().enumerate() {
            if f.is_zero(ca) {
                continue;
            }
            for (j, cb) in b.coeffs.iter().enumerate() {
                out[i + j] = f.add(&out[i + j], &f.mul(ca, cb));
            }
        }
        Poly { coeffs: out }.normalized(f)
    }

    pub fn scale(&self, f: &F, c: &F::Elem) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|a| f.mul(a, c)).collect(),
        }
        .normalized(f)
    }

    pub fn pow(f: &F, base: &Self, mut e: usize) -> Self {
        let mut acc = Poly::one(f);
        let mut b = base.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = Poly::mul(f, &acc, &b);
            }
            b = Poly::mul(f, &b, &b);
            e >>= 1;
        }
        acc
    }

    /// Euclidean division; divisor's leading coefficient must be invertible
    /// (always true over a field for nonzero divisor).
    pub fn div_rem(&self, f: &F, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() || self.coeffs.len() < d.coeffs.len() {
            return (Poly::zero(), self.clone());
        }
        let dl = f.inv(d.lc()).expect("leading coefficient not invertible");
        let mut rem = self.coeffs.clone();
        let dn = d.coeffs.len() - 1;
        let mut quo = vec![f.zero(); rem.len() - dn];
        for i in (dn..rem.len()).rev() {
            let c = f.mul(&rem[i], &dl);
            if f.is_zero(&c) {
                continue;
            }
            quo[i - dn] = c.clone();
            for (j, dc) in d.coeffs.iter().enumerate() {
                let t = f.mul(&c, dc);
                rem[i - dn + j] = f.sub(&rem[i - dn + j], &t);
            }
        }
        (
            Poly { coeffs: quo }.normalized(f),
            Poly { coeffs: rem }.normalized(f),
        )
    }

    pub fn rem(&self, f: &F, d: &Self) -> Self {
        self.div_rem(f, d).1
    }

    pub fn monic(&self, f: &F) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let inv = f.inv(self.lc()).expect("monic of zero lc");
        self.scale(f, &inv)
    }

    /// Monic gcd. gcd(0, b) = monic(b).
    pub fn gcd(f: &F, a: &Self, b: &Self) -> Self {
        let mut a = a.clone();
        let mut b = b.clone();
        while !b.is_zero() {
            let r = a.rem(f, &b);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    /// Extended gcd: returns (g, s, t) with g = s*a + t*b, g monic.
    pub fn xgcd(f: &F, a: &Self, b: &Self) -> (Self, Self, Self) {
        let mut r0 = a.clone();
        let mut r1 = b.clone();
        let mut s0 = Poly::one(f);
        let mut s1 = Poly::zero();
        let mut t0 = Poly::zero();
        let mut t1 = Poly::one(f);
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(f, &r1);
            let s = Poly::sub(f, &s0, &Poly::mul(f, &q, &s1));
            let t = Poly::sub(f, &t0, &Poly::mul(f, &q, &t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = f.inv(r0.lc()).unwrap();
        (
            r0.scale(f, &inv),
            s0.scale(f, &inv),
            t0.scale(f, &inv),
        )
    }

    pub fn derivative(&self, f: &F) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() - 1);
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            out.push(f.mul(c, &f.from_i64(i as i64)));
        }
        Poly { coeffs: out }.normalized(f)
    }

    pub fn eval(&self, f: &F, x: &F::Elem) -> F::Elem {
        let mut acc = f.zero();
        for c in self.coeffs.iter().rev() {
            acc = f.add(&f.mul(&acc, x), c);
        }
        acc
    }

    /// Composition self(g(x)); Horner over polynomials.
    pub fn compose(&self, f: &F, g: &Self) -> Self {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = Poly::mul(f, &acc, g);
            acc = Poly::add(f, &acc, &Poly::constant(f, c.clone()));
        }
        acc
    }

    /// self(x + c).
    pub fn shift(&self, f: &F, c: &F::Elem) -> Self {
        let g = Poly {
            coeffs: vec![c.clone(), f.one()],
        };
        self.compose(f, &g)
    }

    /// base^e mod m, binary exponentiation.
    pub fn pow_mod(f: &F, base: &Self, mut e: u64, m: &Self) -> Self {
        let mut acc = Poly::one(f).rem(f, m);
        let mut b = base.rem(f, m);
        while e > 0 {
            if e & 1 == 1 {
                acc = Poly::mul(f, &acc, &b).rem(f, m);
            }
            b = Poly::mul(f, &b, &b).rem(f, m);
            e >>= 1;
        }
        acc
    }

    /// Resultant via the Euclidean remainder sequence.
    pub fn resultant(f: &F, a: &Self, b: &Self) -> F::Elem {
        if a.is_zero() || b.is_zero() {
            return f.zero();
        }
        let mut a = a.clone();
        let mut b = b.clone();
        let mut res = f.one();
        loop {
            if b.degree() == 0 {
                // res * lc(b)^deg(a)
                let mut acc = f.one();
                for _ in 0..a.degree() {
                    acc = f.mul(&acc, &b.coeffs[0]);
                }
                return f.mul(&res, &acc);
            }
            let r = a.rem(f, &b);
            if r.is_zero() {
                return f.zero();
            }
            // (-1)^(deg a * deg b) * lc(b)^(deg a - deg r)
            if a.degree() % 2 == 1 && b.degree() % 2 == 1 {
                res = f.neg(&res);
            }
            let mut acc = f.one();
            for _ in 0..(a.degree() - r.degree()) {
                acc = f.mul(&acc, b.lc());
            }
            res = f.mul(&res, &acc);
            a = b;
            b = r;
        }
    }

    /// Unique interpolating polynomial through distinct points.
    pub fn interpolate(f: &F, points: &[(F::Elem, F::Elem)]) -> Self {
        let mut acc = Poly::zero();
        for (i, (xi, yi)) in points.iter().enumerate() {
            // Lagrange basis numerator and scalar denominator.
            let mut num = Poly::one(f);
            let mut den = f.one();
            for (j, (xj, _)) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                num = Poly::mul(
                    f,
                    &num,
                    &Poly {
                        coeffs: vec![f.neg(xj), f.one()],
                    },
                );
                den = f.mul(&den, &f.sub(xi, xj));
            }
            let s = f.mul(yi, &f.inv(&den).expect("repeated interpolation node"));
            acc = Poly::add(f, &acc, &num.scale(f, &s));
        }
        acc
    }

    /// Deterministic order: degree first, then coefficients from the top.
    pub fn cmp_canonical(f: &F, a: &Self, b: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match a.coeffs.len().cmp(&b.coeffs.len()) {
            Ordering::Equal => {}
            o => return o,
        }
        for (ca, cb) in a.coeffs.iter().rev().zip(b.coeffs.iter().rev()) {
            match f.cmp_elems(ca, cb) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::field::{PrimeField, Rationals};
    use crate::exact::rat::rat;

    fn qp(cs: &[i64]) -> Poly<Rationals> {
        Poly::from_coeffs(cs.iter().map(|&c| rat(c)).collect())
    }

    #[test]
    fn div_rem_reconstructs() {
        let f = Rationals;
        let a = qp(&[3, 0, -2, 7, 1]);
        let d = qp(&[-1, 2, 1]);
        let (q, r) = a.div_rem(&f, &d);
        let back = Poly::add(&f, &Poly::mul(&f, &q, &d), &r);
        assert_eq!(back, a);
        assert!(r.deg().map_or(true, |dr| dr < d.degree()));
    }

    #[test]
    fn resultant_detects_common_root() {
        let f = Rationals;
        // x^2 - 1 and x - 1 share a root.
        assert!(f.is_zero(&Poly::resultant(&f, &qp(&[-1, 0, 1]), &qp(&[-1, 1]))));
        // Res(x^2 + 1, x - 2) = 5.
        assert_eq!(Poly::resultant(&f, &qp(&[1, 0, 1]), &qp(&[-2, 1])), rat(5));
    }

    #[test]
    fn interpolation_round_trip() {
        let f = Rationals;
        let p = qp(&[2, -3, 0, 1]);
        let pts: Vec<_> = (0..4)
            .map(|i| {
                let x = rat(i - 1);
                (x.clone(), p.eval(&f, &x))
            })
            .collect();
        assert_eq!(Poly::interpolate(&f, &pts), p);
    }

    #[test]
    fn pow_mod_matches_naive() {
        let f = PrimeField::new(5);
        let m = Poly::from_coeffs(vec![2u64, 0, 1]); // x^2 + 2
        let x = Poly::x(&f);
        let a = Poly::pow_mod(&f, &x, 25, &m);
        let naive = Poly::pow(&f, &x, 25).rem(&f, &m);
        assert_eq!(a, naive);
    }

    #[test]
    fn xgcd_bezout_identity() {
        let f = PrimeField::new(7);
        let a = Poly::from_coeffs(vec![1u64, 0, 1]);
        let b = Poly::from_coeffs(vec![3u64, 1]);
        let (g, s, t) = Poly::xgcd(&f, &a, &b);
        let lhs = Poly::add(&f, &Poly::mul(&f, &s, &a), &Poly::mul(&f, &t, &b));
        assert_eq!(lhs, g);
    }
}
