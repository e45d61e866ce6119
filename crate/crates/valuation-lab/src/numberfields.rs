//! Splitting algorithms over towers: factorization (norm reduction to the
//! level below, Trager-style), irreducibility, minimal polynomials by
//! successive norms, and primitive elements with change-of-basis back to the
//! tower generators.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::exact::field::{Field, Rationals};
use crate::exact::poly::Poly;
use crate::exact::qfactor;
use crate::exact::rat::Rat;
use crate::tower::{extend_structural, AlgElem, KElem, TowerField};

/// Monic irreducible factors over `k` with multiplicities, deterministic
/// order. The leading coefficient is dropped (factorization up to a unit).
pub fn factor_over_field(
    k: &TowerField,
    f: &Poly<TowerField>,
    config: &Config,
) -> Result<Vec<(Poly<TowerField>, usize)>> {
    if f.is_zero() {
        return Err(Error::ZeroPoly("factor: zero polynomial".into()));
    }
    if k.depth() > config.tower_depth_max {
        return Err(Error::TowerDepth(format!(
            "tower depth {} exceeds bound {}",
            k.depth(),
            config.tower_depth_max
        )));
    }
    if f.degree() == 0 {
        return Ok(vec![]);
    }
    if k.is_q() {
        let fs = qfactor::factor_rationals(&tower_poly_to_q(f), config.factor_seed)?;
        return Ok(fs
            .into_iter()
            .map(|(g, m)| (q_poly_to_tower(k, &g), m))
            .collect());
    }
    let monic = f.monic(k);
    let mut out: Vec<(Poly<TowerField>, usize)> = vec![];
    for (part, mult) in yun_squarefree(k, &monic) {
        for irr in factor_squarefree(k, &part, config)? {
            out.push((irr, mult));
        }
    }
    out.sort_by(|(a, _), (b, _)| Poly::cmp_canonical(k, a, b));
    Ok(out)
}

pub fn is_irreducible_over(
    k: &TowerField,
    f: &Poly<TowerField>,
    config: &Config,
) -> Result<bool> {
    if f.is_zero() || f.degree() == 0 {
        return Ok(false);
    }
    let fs = factor_over_field(k, f, config)?;
    Ok(fs.len() == 1 && fs[0].1 == 1 && fs[0].0.degree() == f.degree())
}

/// Adjoin a root of `minpoly` to `base`, certifying irreducibility.
pub fn extend_tower(
    base: &TowerField,
    name: &str,
    minpoly: &Poly<TowerField>,
    config: &Config,
) -> Result<TowerField> {
    if !minpoly.is_zero() && minpoly.degree() >= 1 && minpoly.is_monic(base) {
        if !is_irreducible_over(base, minpoly, config)? {
            return Err(Error::NotIrreducible(format!(
                "level polynomial of degree {} is reducible over the base",
                minpoly.degree()
            )));
        }
    }
    extend_structural(base, name, minpoly.clone(), config)
}

/// Minimal polynomial of `a` over a prefix of its home tower: push the
/// annihilator x - a down level by level through norms, then pick the unique
/// irreducible factor that vanishes at a.
pub fn minimal_polynomial(
    a: &AlgElem,
    over: &TowerField,
    config: &Config,
) -> Result<Poly<TowerField>> {
    let k = &a.field;
    if !k.has_prefix(over) {
        return Err(Error::DomainMismatch(
            "minimal_polynomial: `over` is not a prefix of the element's tower".into(),
        ));
    }
    if k.depth() > config.tower_depth_max {
        return Err(Error::TowerDepth(format!(
            "tower depth {} exceeds bound {}",
            k.depth(),
            config.tower_depth_max
        )));
    }
    // x - a, monic over the home field.
    let mut h = Poly::from_coeffs(vec![k.neg(&a.rep), k.one()]);
    let mut cur = k.clone();
    while cur.depth() > over.depth() {
        h = norm_down(&cur, &h);
        cur = cur.sub();
    }
    let factors = factor_over_field(over, &h, config)?;
    let mut hit: Option<Poly<TowerField>> = None;
    for (g, _) in factors {
        let lifted = Poly::from_coeffs(
            g.coeffs
                .iter()
                .map(|c| k.lift_from(over.depth(), c))
                .collect::<Vec<_>>(),
        );
        if k.is_zero(&lifted.eval(k, &a.rep)) {
            if hit.is_some() {
                return Err(Error::Internal(
                    "two distinct irreducible factors vanish at the element".into(),
                ));
            }
            hit = Some(g);
        }
    }
    hit.ok_or_else(|| Error::Internal("no factor of the norm vanishes at the element".into()))
}

/// A single generator for the whole tower with its minimal polynomial over
/// Q. Candidates are integer combinations of the level generators,
/// enumerated (1,...,1) first, then growing coefficient bound.
pub fn primitive_element(
    k: &TowerField,
    config: &Config,
) -> Result<(AlgElem, Poly<Rationals>)> {
    let d = k.depth();
    if d == 0 {
        return Err(Error::TowerDepth(
            "primitive_element: the trivial tower has no generators".into(),
        ));
    }
    let n = k.abs_degree();
    let gens: Vec<KElem> = (1..=d).map(|i| k.gen_at(i)).collect();
    for coeffs in coefficient_vectors(d) {
        let mut theta = k.zero();
        for (c, g) in coeffs.iter().zip(gens.iter()) {
            theta = k.add(&theta, &k.mul(&k.from_i64(*c), g));
        }
        let a = AlgElem {
            field: k.clone(),
            rep: theta,
        };
        let m = minimal_polynomial(&a, &TowerField::q(), config)?;
        if m.degree() == n {
            return Ok((a, tower_poly_to_q(&m)));
        }
    }
    Err(Error::Internal(
        "primitive element search exhausted its candidate budget".into(),
    ))
}

/// Write `elem` as a polynomial of degree < n in `theta` (n = absolute
/// degree), by solving against the power basis 1, theta, ..., theta^(n-1).
pub fn express_in_primitive(
    k: &TowerField,
    theta: &KElem,
    elem: &KElem,
) -> Result<Poly<Rationals>> {
    let n = k.abs_degree();
    let mut cols: Vec<Vec<Rat>> = Vec::with_capacity(n);
    let mut pw = k.one();
    for _ in 0..n {
        cols.push(flatten_elem(k, &pw));
        pw = k.mul(&pw, theta);
    }
    let target = flatten_elem(k, elem);
    let sol = solve_linear(&cols, &target).ok_or_else(|| {
        Error::Internal("power basis of the candidate generator is singular".into())
    })?;
    Ok(Poly::from_coeffs(sol).normalized(&Rationals))
}

/// Evaluate a rational-coefficient polynomial at a tower element.
pub fn eval_qpoly(k: &TowerField, p: &Poly<Rationals>, x: &KElem) -> KElem {
    let mut acc = k.zero();
    for c in p.coeffs.iter().rev() {
        acc = k.mul(&acc, x);
        acc = k.add(&acc, &k.from_rat(c.clone()));
    }
    acc
}

pub fn tower_poly_to_q(f: &Poly<TowerField>) -> Poly<Rationals> {
    Poly::from_coeffs(
        f.coeffs
            .iter()
            .map(|c| TowerField::expect_rat(c).clone())
            .collect(),
    )
    .normalized(&Rationals)
}

pub fn q_poly_to_tower(k: &TowerField, f: &Poly<Rationals>) -> Poly<TowerField> {
    Poly::from_coeffs(f.coeffs.iter().map(|c| k.from_rat(c.clone())).collect()).normalized(k)
}

/// Norm from the top level down one step: Res_y(m(y), g with the generator
/// replaced by y), computed by specializing x at enough integer points and
/// interpolating over the subfield. Monic m keeps specialization exact.
fn norm_down(k: &TowerField, g: &Poly<TowerField>) -> Poly<TowerField> {
    let sub = k.sub();
    let m_deg = k.top_deg();
    let m_poly: Poly<TowerField> = k.top_minpoly();
    let d = m_deg * g.degree() + 1;
    let coeffs_y: Vec<Poly<TowerField>> = g
        .coeffs
        .iter()
        .map(|c| Poly::from_coeffs(k.coeffs_in_sub(c)).normalized(&sub))
        .collect();
    let mut pts = Vec::with_capacity(d);
    for i in 0..d {
        let x0 = sub.from_i64(i as i64);
        // G(y, x0) over the subfield.
        let mut gy = Poly::zero();
        let mut xpow = sub.one();
        for cy in &coeffs_y {
            gy = Poly::add(&sub, &gy, &cy.scale(&sub, &xpow));
            xpow = sub.mul(&xpow, &x0);
        }
        let r = Poly::resultant(&sub, &m_poly, &gy);
        pts.push((x0, r));
    }
    Poly::interpolate(&sub, &pts)
}

/// Yun's squarefree decomposition, characteristic zero.
fn yun_squarefree(k: &TowerField, a: &Poly<TowerField>) -> Vec<(Poly<TowerField>, usize)> {
    let a = a.monic(k);
    if a.degree() == 0 {
        return vec![];
    }
    let da = a.derivative(k);
    let g = Poly::gcd(k, &a, &da);
    let mut w = a.div_rem(k, &g).0;
    let mut y = da.div_rem(k, &g).0;
    let mut z = Poly::sub(k, &y, &w.derivative(k));
    let mut out = vec![];
    let mut i = 1usize;
    while w.degree() > 0 {
        let gi = Poly::gcd(k, &w, &z);
        if gi.degree() > 0 {
            out.push((gi.clone(), i));
        }
        w = w.div_rem(k, &gi).0;
        y = z.div_rem(k, &gi).0;
        z = Poly::sub(k, &y, &w.derivative(k));
        i += 1;
    }
    out
}

/// Trager: shift until the norm is squarefree, factor the norm one level
/// down, pull factors back through gcds, unshift.
fn factor_squarefree(
    k: &TowerField,
    g: &Poly<TowerField>,
    config: &Config,
) -> Result<Vec<Poly<TowerField>>> {
    if g.degree() == 1 {
        return Ok(vec![g.monic(k)]);
    }
    let sub = k.sub();
    let a = k.gen();
    let shift_budget = 4 * k.top_deg() * g.degree() * g.degree() + 4;
    let mut chosen: Option<(i64, Poly<TowerField>, Poly<TowerField>)> = None;
    for s in 0..shift_budget as i64 {
        // g_s(x) = g(x - s*a)
        let sub_in = Poly::from_coeffs(vec![k.mul(&k.from_i64(-s), &a), k.one()]);
        let gs = g.compose(k, &sub_in);
        let norm = norm_down(k, &gs);
        let dn = norm.derivative(&sub);
        if Poly::gcd(&sub, &norm, &dn).degree() == 0 {
            chosen = Some((s, gs, norm));
            break;
        }
    }
    let (s, gs, norm) =
        chosen.ok_or_else(|| Error::Internal("no squarefree-norm shift found".into()))?;
    let mut out = vec![];
    for (h, _) in factor_over_field(&sub, &norm, config)? {
        let lifted = Poly::from_coeffs(
            h.coeffs
                .iter()
                .map(|c| k.lift_from(k.depth() - 1, c))
                .collect::<Vec<_>>(),
        );
        let factor = Poly::gcd(k, &gs, &lifted);
        if factor.degree() == 0 {
            continue;
        }
        // Unshift: x -> x + s*a.
        let back = Poly::from_coeffs(vec![k.mul(&k.from_i64(s), &a), k.one()]);
        out.push(factor.compose(k, &back).monic(k));
    }
    Ok(out)
}

/// Coefficient vectors (c_1..c_d), entries in [1, B] with some entry equal
/// to B, for B = 1, 2, ... Lexicographic within each B.
fn coefficient_vectors(d: usize) -> impl Iterator<Item = Vec<i64>> {
    (1i64..=30).flat_map(move |b| {
        let mut all: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..d {
            let mut next = vec![];
            for v in &all {
                for c in 1..=b {
                    let mut w = v.clone();
                    w.push(c);
                    next.push(w);
                }
            }
            all = next;
        }
        all.into_iter().filter(move |v| v.iter().any(|&c| c == b))
    })
}

/// Coordinates of an element in the monomial basis of the tower over Q
/// (recursive concatenation; length = absolute degree).
pub fn flatten_elem(k: &TowerField, a: &KElem) -> Vec<Rat> {
    if k.is_q() {
        return vec![TowerField::expect_rat(a).clone()];
    }
    let sub = k.sub();
    let mut out = vec![];
    for c in k.coeffs_in_sub(a) {
        out.extend(flatten_elem(&sub, &c));
    }
    out
}

/// Solve sum_j x_j * cols[j] = target over Q by Gaussian elimination.
/// None when the columns are linearly dependent.
fn solve_linear(cols: &[Vec<Rat>], target: &[Rat]) -> Option<Vec<Rat>> {
    let n = target.len();
    let m = cols.len();
    // Augmented matrix, rows = equations.
    let mut mat: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rat> = cols.iter().map(|c| c[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let f = Rationals;
    let mut piv_row = 0usize;
    let mut pivots = vec![];
    for col in 0..m {
        let Some(r) = (piv_row..n).find(|&r| !f.is_zero(&mat[r][col])) else {
            return None;
        };
        mat.swap(piv_row, r);
        let inv = f.inv(&mat[piv_row][col]).unwrap();
        for c in col..=m {
            mat[piv_row][c] = f.mul(&mat[piv_row][c], &inv);
        }
        for r2 in 0..n {
            if r2 != piv_row && !f.is_zero(&mat[r2][col]) {
                let factor = mat[r2][col].clone();
                for c in col..=m {
                    let t = f.mul(&factor, &mat[piv_row][c]);
                    mat[r2][c] = f.sub(&mat[r2][c], &t);
                }
            }
        }
        pivots.push(piv_row);
        piv_row += 1;
    }
    // Consistency of the remaining rows.
    for r in piv_row..n {
        if !f.is_zero(&mat[r][m]) {
            return None;
        }
    }
    Some((0..m).map(|j| mat[pivots[j]][m].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::rat;

    fn cfg() -> Config {
        Config::default()
    }

    fn qx(cs: &[i64], k: &TowerField) -> Poly<TowerField> {
        Poly::from_coeffs(cs.iter().map(|&c| k.from_i64(c)).collect()).normalized(k)
    }

    fn q_sqrt(n: i64, name: &str) -> TowerField {
        let q = TowerField::q();
        extend_tower(&q, name, &qx(&[-n, 0, 1], &q), &cfg()).unwrap()
    }

    #[test]
    fn x4_minus_1_over_q() {
        let q = TowerField::q();
        let fs = factor_over_field(&q, &qx(&[-1, 0, 0, 0, 1], &q), &cfg()).unwrap();
        let expected = vec![
            (qx(&[-1, 1], &q), 1),
            (qx(&[1, 1], &q), 1),
            (qx(&[1, 0, 1], &q), 1),
        ];
        assert_eq!(fs, expected);
    }

    #[test]
    fn x2_minus_2_splits_over_q_sqrt2() {
        let k = q_sqrt(2, "s");
        let fs = factor_over_field(&k, &qx(&[-2, 0, 1], &k), &cfg()).unwrap();
        assert_eq!(fs.len(), 2);
        let mut prod = Poly::one(&k);
        for (g, m) in &fs {
            assert_eq!((g.degree(), *m), (1, 1));
            prod = Poly::mul(&k, &prod, g);
        }
        assert_eq!(prod, qx(&[-2, 0, 1], &k));
        // Roots are exactly +-s.
        let roots: Vec<KElem> = fs.iter().map(|(g, _)| k.neg(&g.coeffs[0])).collect();
        assert!(roots.contains(&k.gen()));
        assert!(roots.contains(&k.neg(&k.gen())));
    }

    #[test]
    fn irreducibility_detects_discriminant() {
        let q = TowerField::q();
        assert!(is_irreducible_over(&q, &qx(&[-6, -2, 1], &q), &cfg()).unwrap());
        assert!(!is_irreducible_over(&q, &qx(&[-1, 0, 1], &q), &cfg()).unwrap());
    }

    #[test]
    fn extend_tower_rejects_reducible() {
        let q = TowerField::q();
        assert!(matches!(
            extend_tower(&q, "a", &qx(&[-1, 0, 1], &q), &cfg()),
            Err(Error::NotIrreducible(_))
        ));
    }

    #[test]
    fn minpoly_of_one_plus_sqrt7() {
        let k = q_sqrt(7, "c");
        let a = AlgElem {
            field: k.clone(),
            rep: k.add(&k.one(), &k.gen()),
        };
        let m = minimal_polynomial(&a, &TowerField::q(), &cfg()).unwrap();
        assert_eq!(tower_poly_to_q(&m), Poly::from_coeffs(vec![rat(-6), rat(-2), rat(1)]));
    }

    #[test]
    fn minpoly_of_rational_element_is_linear() {
        let k = q_sqrt(21, "w");
        // w * w = 21 is rational inside the tower.
        let a = AlgElem {
            field: k.clone(),
            rep: k.mul(&k.gen(), &k.gen()),
        };
        let m = minimal_polynomial(&a, &TowerField::q(), &cfg()).unwrap();
        assert_eq!(tower_poly_to_q(&m), Poly::from_coeffs(vec![rat(-21), rat(1)]));
    }

    #[test]
    fn primitive_element_of_biquadratic() {
        let k1 = q_sqrt(2, "s");
        let k = extend_tower(&k1, "u", &qx(&[-3, 0, 1], &k1), &cfg()).unwrap();
        let (theta, m) = primitive_element(&k, &cfg()).unwrap();
        // theta = s + u with minimal polynomial x^4 - 10x^2 + 1.
        let expected = k.add(&k.gen_at(1), &k.gen_at(2));
        assert_eq!(theta.rep, expected);
        assert_eq!(
            m,
            Poly::from_coeffs(vec![rat(1), rat(0), rat(-10), rat(0), rat(1)])
        );
        // Change of basis: each generator is a polynomial in theta.
        for i in 1..=2 {
            let g = k.gen_at(i);
            let p = express_in_primitive(&k, &theta.rep, &g).unwrap();
            assert_eq!(eval_qpoly(&k, &p, &theta.rep), g);
        }
    }

    #[test]
    fn primitive_element_needs_a_generator() {
        assert!(matches!(
            primitive_element(&TowerField::q(), &cfg()),
            Err(Error::TowerDepth(_))
        ));
    }

    #[test]
    fn factors_remultiply_over_tower() {
        let k = q_sqrt(2, "s");
        // (x^2 - 2)(x^2 + 1) over Q(s): splits into two linears and a quadratic.
        let f = Poly::mul(&k, &qx(&[-2, 0, 1], &k), &qx(&[1, 0, 1], &k));
        let fs = factor_over_field(&k, &f, &cfg()).unwrap();
        let mut prod = Poly::one(&k);
        for (g, m) in &fs {
            for _ in 0..*m {
                prod = Poly::mul(&k, &prod, g);
            }
        }
        assert_eq!(prod, f.monic(&k));
        assert_eq!(fs.len(), 3);
    }
}
