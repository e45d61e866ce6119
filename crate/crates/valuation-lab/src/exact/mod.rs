//! Exact base arithmetic: rationals, dense polynomials over a pluggable
//! field, finite fields, and deterministic factorization over `F_{p^f}`
//! and over Q.

pub mod field;
pub mod fq;
pub mod fqfactor;
pub mod poly;
pub mod qfactor;
pub mod rat;

pub use field::{Field, PrimeField, Rationals};
pub use fq::{ExtField, FqElem};
pub use poly::Poly;
pub use rat::Rat;

use crate::error::{Error, Result};

/// Monic gcd of two polynomials over a field, Euclid's algorithm.
/// The zero polynomial is rejected so callers can't silently gcd with 0.
pub fn poly_gcd<F: Field>(f: &F, a: &Poly<F>, b: &Poly<F>) -> Result<Poly<F>> {
    if a.is_zero() && b.is_zero() {
        return Err(Error::ZeroPoly("poly_gcd: both inputs are zero".into()));
    }
    Ok(Poly::gcd(f, a, b))
}

/// Product of the distinct irreducible factors of `a`, i.e. `a / gcd(a, a')`,
/// normalized monic. Characteristic p inputs whose derivative vanishes are
/// rejected here (the full factorization routine handles them instead).
pub fn squarefree_part<F: Field>(f: &F, a: &Poly<F>) -> Result<Poly<F>> {
    if a.is_zero() {
        return Err(Error::ZeroPoly("squarefree_part: zero polynomial".into()));
    }
    if a.degree() == 0 {
        return Ok(Poly::one(f));
    }
    let da = a.derivative(f);
    if da.is_zero() {
        return Err(Error::ZeroPoly(
            "squarefree_part: derivative vanishes (inseparable shape)".into(),
        ));
    }
    let g = Poly::gcd(f, a, &da);
    let (q, r) = a.div_rem(f, &g);
    debug_assert!(r.is_zero());
    Ok(q.monic(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::rat;

    fn qpoly(coeffs: &[i64]) -> Poly<Rationals> {
        Poly::from_coeffs(coeffs.iter().map(|&c| rat(c)).collect())
    }

    #[test]
    fn gcd_of_worked_pair() {
        // gcd(x^3 - x, x^2 - 1) = x^2 - 1
        let f = Rationals;
        let a = qpoly(&[0, -1, 0, 1]);
        let b = qpoly(&[-1, 0, 1]);
        let g = poly_gcd(&f, &a, &b).unwrap();
        assert_eq!(g, qpoly(&[-1, 0, 1]));
    }

    #[test]
    fn gcd_rejects_double_zero() {
        let f = Rationals;
        let z = Poly::zero();
        assert!(matches!(poly_gcd(&f, &z, &z), Err(Error::ZeroPoly(_))));
    }

    #[test]
    fn squarefree_part_strips_multiplicity() {
        // x^3 + x^2 = x^2 (x + 1)  ->  x^2 + x
        let f = Rationals;
        let a = qpoly(&[0, 0, 1, 1]);
        let s = squarefree_part(&f, &a).unwrap();
        assert_eq!(s, qpoly(&[0, 1, 1]));
    }
}
