//! Factoring over Q: Yun squarefree split, then for each squarefree part a
//! good reduction prime, a mod-p factorization, Hensel lifting of the factor
//! tree past the Mignotte bound, and subset recombination in a fixed order.
//! Randomness enters only through the seeded mod-p split, so results are
//! reproducible for a given seed.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::field::{Field, PrimeField, Rationals};
use super::fqfactor;
use super::poly::Poly;
use super::rat::is_prime_u64;
use crate::error::{Error, Result};

/// Monic irreducible factors over Q with multiplicities, canonically sorted.
/// The leading coefficient of `a` is discarded: the list describes the monic
/// normalization.
pub fn factor_rationals(
    a: &Poly<Rationals>,
    seed: u64,
) -> Result<Vec<(Poly<Rationals>, usize)>> {
    let f = Rationals;
    if a.is_zero() {
        return Err(Error::ZeroPoly("factor: zero polynomial".into()));
    }
    if a.degree() == 0 {
        return Ok(vec![]);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out: Vec<(Poly<Rationals>, usize)> = vec![];
    for (part, mult) in yun_squarefree(&f, a) {
        if part.degree() == 0 {
            continue;
        }
        let prim = primitive_integer(&part);
        for irr in factor_squarefree_primitive(&prim, &mut rng)? {
            out.push((irr, mult));
        }
    }
    out.sort_by(|(p1, _), (p2, _)| Poly::cmp_canonical(&f, p1, p2));
    Ok(out)
}

pub fn is_irreducible_q(a: &Poly<Rationals>) -> Result<bool> {
    if a.is_zero() || a.degree() == 0 {
        return Ok(false);
    }
    let fs = factor_rationals(a, 0)?;
    Ok(fs.len() == 1 && fs[0].1 == 1)
}

/// Yun's algorithm, characteristic zero: (squarefree part, multiplicity).
fn yun_squarefree(f: &Rationals, a: &Poly<Rationals>) -> Vec<(Poly<Rationals>, usize)> {
    let a = a.monic(f);
    if a.degree() == 0 {
        return vec![];
    }
    let da = a.derivative(f);
    let g = Poly::gcd(f, &a, &da);
    let mut w = a.div_rem(f, &g).0;
    let mut y = da.div_rem(f, &g).0;
    let mut z = Poly::sub(f, &y, &w.derivative(f));
    let mut out = vec![];
    let mut i = 1usize;
    while w.degree() > 0 {
        let gi = Poly::gcd(f, &w, &z);
        if gi.degree() > 0 {
            out.push((gi.clone(), i));
        }
        w = w.div_rem(f, &gi).0;
        y = z.div_rem(f, &gi).0;
        z = Poly::sub(f, &y, &w.derivative(f));
        i += 1;
    }
    out
}

/// Strip denominators and content; normalize the sign so lc > 0.
fn primitive_integer(a: &Poly<Rationals>) -> Vec<BigInt> {
    let mut den = BigInt::one();
    for c in &a.coeffs {
        den = den.lcm(c.denom());
    }
    let mut ints: Vec<BigInt> = a
        .coeffs
        .iter()
        .map(|c| c.numer() * (&den / c.denom()))
        .collect();
    let mut content = BigInt::zero();
    for c in &ints {
        content = content.gcd(c);
    }
    if !content.is_zero() {
        for c in ints.iter_mut() {
            *c = &*c / &content;
        }
    }
    if ints.last().map_or(false, |lc| lc.is_negative()) {
        for c in ints.iter_mut() {
            *c = -&*c;
        }
    }
    ints
}

fn to_rat_poly(v: &[BigInt]) -> Poly<Rationals> {
    Poly::from_coeffs(
        v.iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect(),
    )
    .normalized(&Rationals)
}

/// Z/m with arithmetic in [0, m); a genuine field only when m is prime, but
/// division here only ever needs monic divisors or unit inverses.
#[derive(Clone, Debug, PartialEq)]
struct ModRing {
    m: BigInt,
}

impl Field for ModRing {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }

    fn one(&self) -> BigInt {
        BigInt::one().mod_floor(&self.m)
    }

    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a + b).mod_floor(&self.m)
    }

    fn neg(&self, a: &BigInt) -> BigInt {
        (-a).mod_floor(&self.m)
    }

    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a * b).mod_floor(&self.m)
    }

    fn inv(&self, a: &BigInt) -> Option<BigInt> {
        let g = a.extended_gcd(&self.m);
        if g.gcd.is_one() {
            Some(g.x.mod_floor(&self.m))
        } else {
            None
        }
    }

    fn from_i64(&self, n: i64) -> BigInt {
        BigInt::from(n).mod_floor(&self.m)
    }

    fn cmp_elems(&self, a: &BigInt, b: &BigInt) -> std::cmp::Ordering {
        a.cmp(b)
    }
}

fn factor_squarefree_primitive(
    g: &[BigInt],
    rng: &mut ChaCha20Rng,
) -> Result<Vec<Poly<Rationals>>> {
    let n = g.len() - 1;
    if n == 1 {
        return Ok(vec![to_rat_poly(g).monic(&Rationals)]);
    }
    let lc = g.last().unwrap().clone();

    // Good reduction prime: keeps the degree and stays squarefree mod p.
    let p = {
        let mut cand = 2u64;
        loop {
            if is_prime_u64(cand) && !(&lc % cand).is_zero() {
                let fp = PrimeField::new(cand);
                let gp = Poly::from_coeffs(
                    g.iter()
                        .map(|c| c.mod_floor(&BigInt::from(cand)).try_into().unwrap())
                        .collect::<Vec<u64>>(),
                )
                .normalized(&fp);
                let sep = Poly::gcd(&fp, &gp, &gp.derivative(&fp));
                if sep.deg() == Some(0) {
                    break cand;
                }
            }
            cand += 1;
        }
    };

    let fp = PrimeField::new(p);
    let gp_monic = Poly::from_coeffs(
        g.iter()
            .map(|c| c.mod_floor(&BigInt::from(p)).try_into().unwrap())
            .collect::<Vec<u64>>(),
    )
    .normalized(&fp)
    .monic(&fp);
    let modp_factors = fqfactor::factor_monic(&fp, &gp_monic, rng)?;
    debug_assert!(modp_factors.iter().all(|(_, m)| *m == 1));
    if modp_factors.len() == 1 {
        return Ok(vec![to_rat_poly(g).monic(&Rationals)]);
    }

    // Mignotte: coefficients of lc * (monic factor) are bounded by
    // sqrt(n+1) * 2^n * max|coeff| * |lc|.
    let height = g.iter().map(|c| c.abs()).max().unwrap();
    let sqrt_np1 = BigInt::from(((n as f64 + 1.0).sqrt().ceil()) as u64 + 1);
    let bound: BigInt = sqrt_np1 * (BigInt::one() << n) * height * lc.abs();
    let two_b1: BigInt = (&bound << 1) + 1;
    let mut k = 1u32;
    let mut pk = BigInt::from(p);
    while pk < two_b1 {
        pk *= p;
        k += 1;
    }

    // Lift the monic factorization of lc^{-1} g to mod p^k.
    let rk = ModRing { m: pk.clone() };
    let lc_inv = rk.inv(&lc.mod_floor(&pk)).expect("lc unit mod p^k");
    let f_star: Vec<BigInt> = g.iter().map(|c| rk.mul(&lc_inv, &c.mod_floor(&pk))).collect();
    let base: Vec<Poly<ModRing>> = modp_factors
        .iter()
        .map(|(q, _)| {
            Poly::from_coeffs(q.coeffs.iter().map(|&c| BigInt::from(c)).collect())
        })
        .collect();
    let lifted = lift_tree(&f_star, &base, &BigInt::from(p), k);

    // Subset recombination, by cardinality then index order.
    let mut remaining: Vec<Poly<ModRing>> = lifted;
    let mut current = to_rat_poly(g).monic(&Rationals);
    let mut out = vec![];
    let qf = Rationals;
    let mut card = 1usize;
    'outer: while 2 * card <= remaining.len() {
        for combo in combinations(remaining.len(), card) {
            let mut prod = Poly::constant(&rk, lc.mod_floor(&pk));
            for &i in &combo {
                prod = Poly::mul(&rk, &prod, &remaining[i]);
            }
            let cand = symmetric_primitive(&prod, &pk);
            let cand_q = to_rat_poly(&cand).monic(&qf);
            if cand_q.degree() == 0 {
                continue;
            }
            let (quo, rem) = current.div_rem(&qf, &cand_q);
            if rem.is_zero() {
                out.push(cand_q);
                current = quo;
                let keep: Vec<Poly<ModRing>> = remaining
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !combo.contains(i))
                    .map(|(_, q)| q.clone())
                    .collect();
                remaining = keep;
                continue 'outer;
            }
        }
        card += 1;
    }
    if current.degree() > 0 {
        out.push(current);
    }
    Ok(out)
}

/// Coefficients into (-m/2, m/2], then content and sign stripped.
fn symmetric_primitive(a: &Poly<ModRing>, m: &BigInt) -> Vec<BigInt> {
    let half = m >> 1;
    let ints: Vec<BigInt> = a
        .coeffs
        .iter()
        .map(|c| if c > &half { c - m } else { c.clone() })
        .collect();
    primitive_integer(&to_rat_poly(&ints))
}

fn combinations(n: usize, c: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut cur = vec![];
    fn rec(start: usize, n: usize, c: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == c {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, c, cur, out);
            cur.pop();
        }
    }
    rec(0, n, c, &mut cur, &mut out);
    out
}

/// Lift a pairwise-coprime monic factorization of the monic `target` from
/// mod p to mod p^k by recursive two-way splits.
fn lift_tree(
    target: &[BigInt],
    factors: &[Poly<ModRing>],
    p: &BigInt,
    k: u32,
) -> Vec<Poly<ModRing>> {
    let rk = ModRing {
        m: p.pow(k),
    };
    if factors.len() == 1 {
        return vec![Poly::from_coeffs(target.to_vec()).normalized(&rk)];
    }
    let rp = ModRing { m: p.clone() };
    let mid = factors.len() / 2;
    let mut gp = Poly::one(&rp);
    for q in &factors[..mid] {
        gp = Poly::mul(&rp, &gp, q);
    }
    let mut hp = Poly::one(&rp);
    for q in &factors[mid..] {
        hp = Poly::mul(&rp, &hp, q);
    }
    let (one, s, t) = Poly::xgcd(&rp, &gp, &hp);
    debug_assert_eq!(one.deg(), Some(0));
    let (gk, hk) = hensel_pair(target, &gp, &hp, &s, &t, p, k);
    let mut out = lift_tree(&gk.coeffs, &factors[..mid], p, k);
    out.extend(lift_tree(&hk.coeffs, &factors[mid..], p, k));
    out
}

/// Linear Hensel steps: target = g*h (mod p^m), s*g + t*h = 1 (mod p),
/// raising m from 1 to k with g, h monic throughout.
fn hensel_pair(
    target: &[BigInt],
    g0: &Poly<ModRing>,
    h0: &Poly<ModRing>,
    s: &Poly<ModRing>,
    t: &Poly<ModRing>,
    p: &BigInt,
    k: u32,
) -> (Poly<ModRing>, Poly<ModRing>) {
    let rp = ModRing { m: p.clone() };
    let mut g: Vec<BigInt> = g0.coeffs.clone();
    let mut h: Vec<BigInt> = h0.coeffs.clone();
    let mut pm = p.clone();
    for _ in 1..k {
        // e = (target - g*h) / p^m, reduced mod p.
        let prod = int_mul(&g, &h);
        let mut e: Vec<BigInt> = vec![];
        for i in 0..target.len().max(prod.len()) {
            let a = target.get(i).cloned().unwrap_or_default();
            let b = prod.get(i).cloned().unwrap_or_default();
            let d = a - b;
            debug_assert!((&d % &pm).is_zero());
            e.push((d / &pm).mod_floor(p));
        }
        let ep = Poly::from_coeffs(e).normalized(&rp);
        let gp = Poly::from_coeffs(g.iter().map(|c| c.mod_floor(p)).collect::<Vec<_>>())
            .normalized(&rp);
        let hp = Poly::from_coeffs(h.iter().map(|c| c.mod_floor(p)).collect::<Vec<_>>())
            .normalized(&rp);
        // a*h + b*g = e (mod p) with deg a < deg g.
        let te = Poly::mul(&rp, t, &ep);
        let (q, a) = te.div_rem(&rp, &gp);
        let b = Poly::add(&rp, &Poly::mul(&rp, s, &ep), &Poly::mul(&rp, &q, &hp));
        for (i, c) in a.coeffs.iter().enumerate() {
            if i < g.len() {
                g[i] += c * &pm;
            }
        }
        for (i, c) in b.coeffs.iter().enumerate() {
            if i < h.len() {
                h[i] += c * &pm;
            }
        }
        pm *= p;
    }
    let rk = ModRing { m: p.pow(k) };
    (
        Poly::from_coeffs(g).normalized(&rk),
        Poly::from_coeffs(h).normalized(&rk),
    )
}

fn int_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::rat;

    fn qp(cs: &[i64]) -> Poly<Rationals> {
        Poly::from_coeffs(cs.iter().map(|&c| rat(c)).collect())
    }

    #[test]
    fn x4_minus_1_splits() {
        let fs = factor_rationals(&qp(&[-1, 0, 0, 0, 1]), 0).unwrap();
        let expected = vec![
            (qp(&[-1, 1]), 1),
            (qp(&[1, 1]), 1),
            (qp(&[1, 0, 1]), 1),
        ];
        assert_eq!(fs, expected);
    }

    #[test]
    fn recombination_pairs_up() {
        // x^4 + 4 = (x^2 - 2x + 2)(x^2 + 2x + 2); splits further mod small
        // primes, so the subset search must pair lifted factors.
        let fs = factor_rationals(&qp(&[4, 0, 0, 0, 1]), 0).unwrap();
        let expected = vec![(qp(&[2, -2, 1]), 1), (qp(&[2, 2, 1]), 1)];
        assert_eq!(fs, expected);
    }

    #[test]
    fn irreducibles_stay_whole() {
        assert!(is_irreducible_q(&qp(&[-6, -2, 1])).unwrap());
        assert!(is_irreducible_q(&qp(&[1, 0, -10, 0, 1])).unwrap());
        assert!(!is_irreducible_q(&qp(&[-1, 0, 1])).unwrap());
    }

    #[test]
    fn multiplicities_via_yun() {
        // (x^2 + 1)^2 (x - 1)
        let sq = Poly::mul(&Rationals, &qp(&[1, 0, 1]), &qp(&[1, 0, 1]));
        let a = Poly::mul(&Rationals, &sq, &qp(&[-1, 1]));
        let fs = factor_rationals(&a, 0).unwrap();
        assert_eq!(fs, vec![(qp(&[-1, 1]), 1), (qp(&[1, 0, 1]), 2)]);
    }

    #[test]
    fn rational_coefficients_are_fine() {
        // x^2 - 1/4
        let a = Poly::from_coeffs(vec![
            BigRational::new(BigInt::from(-1), BigInt::from(4)),
            rat(0),
            rat(1),
        ]);
        let fs = factor_rationals(&a, 0).unwrap();
        assert_eq!(fs.len(), 2);
        for (g, m) in &fs {
            assert_eq!(*m, 1);
            assert_eq!(g.degree(), 1);
        }
    }

    #[test]
    fn seed_does_not_change_the_answer() {
        let a = qp(&[-2, 3, 0, 5, 0, 0, 1]);
        let f1 = factor_rationals(&a, 1).unwrap();
        let f2 = factor_rationals(&a, 99).unwrap();
        assert_eq!(f1, f2);
    }
}
