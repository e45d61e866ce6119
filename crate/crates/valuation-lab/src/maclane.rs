//! Inductive valuation chains over (Q, v_p): the engine behind extension
//! enumeration. A chain is a tower of key polynomials phi_1 | phi_2 | ... with
//! assigned values mu_1 < mu_2 < ...; each level refines the previous
//! approximation of a root of the target polynomial. Per level the target is
//! expanded in the key, the lower hull of digit values is cut into principal
//! segments, and each segment's residual polynomial is factored over the
//! accumulated residue field. Simple residual factors terminate in leaves
//! carrying (e, f); repeated factors grow the chain.
//!
//! Design choices that keep this auditable:
//!
//! * Residue fields are kept flat: k_r is an explicit F_{p^F} with a basis of
//!   generator monomials and their polynomial lifts. Reduction to the residue
//!   field is decided by the valuation itself (matching against all candidate
//!   lifts), so no grading normalization convention is load-bearing.
//! * Every step asserts its own consistency: principal hull length equals the
//!   inherited multiplicity, constructed keys reproduce their residual factor,
//!   and the leaf set must satisfy sum(e*f) = deg exactly. Violations surface
//!   as INTERNAL errors instead of silently wrong output.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::exact::field::{Field, PrimeField, Rationals};
use crate::exact::fq::{apply_embedding, embed_generator, ExtField, FiniteField, FqElem};
use crate::exact::fqfactor;
use crate::exact::poly::Poly;
use crate::exact::rat::{rat, Rat};
use crate::valuation::lower_hull;
use crate::value::Value;

type QPoly = Poly<Rationals>;
type RPoly = Poly<ExtField>;

/// One decision on the way to a leaf: the chosen segment slope and the
/// residual factor taken there. The first entry's slope is in the input
/// polynomial's coordinates; deeper entries are internal refinement data.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEntry {
    pub slope: Rat,
    pub residual: String,
}

/// A finalized chain level: key phi with value mu, its contribution to
/// ramification (e_here) and residue degree (f_here), and the flat residue
/// field context after this level.
#[derive(Clone, Debug)]
pub struct FinalLevel {
    pub phi: QPoly,
    pub mu: Rat,
    pub e_here: u64,
    pub f_here: usize,
    ctx: ResidueCtx,
}

/// Flat residue field with the data needed to reduce and to lift: a basis of
/// generator monomials (their field images and their polynomial lifts) and
/// the inverse change-of-basis matrix from flat coordinates.
#[derive(Clone, Debug)]
struct ResidueCtx {
    kfield: ExtField,
    /// (image in kfield, lift in Q[x]) per basis monomial.
    monomials: Vec<(Vec<u64>, QPoly)>,
    /// F x F matrix over F_p sending flat coordinates to monomial coordinates.
    from_flat: Vec<Vec<u64>>,
}

impl ResidueCtx {
    fn base(p: u64) -> Result<ResidueCtx> {
        let kfield = ExtField::new(p, 1)?;
        Ok(ResidueCtx {
            kfield,
            monomials: vec![(vec![1], Poly::one(&Rationals))],
            from_flat: vec![vec![1]],
        })
    }

    /// Extend by an irreducible psi of degree >= 2 whose root becomes the new
    /// generator; lift_z is the polynomial lift of that root.
    fn extend(&self, p: u64, psi: &RPoly, lift_z: &QPoly) -> Result<ResidueCtx> {
        let f_old = self.kfield.f;
        let f_psi = psi.degree();
        let kfield = ExtField::new(p, f_old * f_psi)?;
        let img = embed_generator(&self.kfield, &kfield)?;
        let psi_up = Poly::from_coeffs(
            psi.coeffs
                .iter()
                .map(|c| apply_embedding(&self.kfield, &kfield, &img, c))
                .collect::<Vec<_>>(),
        )
        .normalized(&kfield);
        let z = kfield
            .first_root(&psi_up)
            .ok_or_else(|| Error::Internal("residual factor has no root upstairs".into()))?;
        let mut monomials = vec![];
        let mut zpow = kfield.one();
        let mut lift_pow = Poly::one(&Rationals);
        for _ in 0..f_psi {
            for (m_img, m_lift) in &self.monomials {
                let up = apply_embedding(&self.kfield, &kfield, &img, m_img);
                monomials.push((
                    kfield.mul(&up, &zpow),
                    Poly::mul(&Rationals, m_lift, &lift_pow),
                ));
            }
            zpow = kfield.mul(&zpow, &z);
            lift_pow = Poly::mul(&Rationals, &lift_pow, lift_z);
        }
        let from_flat = invert_basis_matrix(p, &monomials, kfield.f)?;
        Ok(ResidueCtx {
            kfield,
            monomials,
            from_flat,
        })
    }

    /// Polynomial lift of a residue element: decompose over the monomial
    /// basis, lift coordinates as integers in [0, p).
    fn lift(&self, c: &[u64]) -> QPoly {
        let fp = PrimeField::new(self.kfield.p);
        let n = self.kfield.f;
        let mut coords = vec![0u64; n];
        for (i, row) in self.from_flat.iter().enumerate() {
            let mut acc = 0u64;
            for (j, m) in row.iter().enumerate() {
                acc = fp.add(&acc, &fp.mul(m, &c[j]));
            }
            coords[i] = acc;
        }
        let mut out = Poly::zero();
        for (k, coord) in coords.iter().enumerate() {
            if *coord == 0 {
                continue;
            }
            let scaled = self.monomials[k].1.scale(&Rationals, &rat(*coord as i64));
            out = Poly::add(&Rationals, &out, &scaled);
        }
        out
    }
}

/// Columns are the flat coordinates of the basis monomials; returns the
/// inverse over F_p.
fn invert_basis_matrix(p: u64, monomials: &[(Vec<u64>, QPoly)], n: usize) -> Result<Vec<Vec<u64>>> {
    let fp = PrimeField::new(p);
    // Augmented [M | I], rows indexed by flat coordinate.
    let mut m: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            let mut row: Vec<u64> = monomials.iter().map(|(img, _)| img[i]).collect();
            let mut id = vec![0u64; n];
            id[i] = 1;
            row.extend(id);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| m[r][col] != 0)
            .ok_or_else(|| Error::Internal("residue basis monomials are dependent".into()))?;
        m.swap(col, piv);
        let inv = fp.inv(&m[col][col]).unwrap();
        for j in 0..2 * n {
            m[col][j] = fp.mul(&m[col][j], &inv);
        }
        for r in 0..n {
            if r != col && m[r][col] != 0 {
                let factor = m[r][col];
                for j in 0..2 * n {
                    let t = fp.mul(&factor, &m[col][j]);
                    m[r][j] = fp.sub(&m[r][j], &t);
                }
            }
        }
    }
    Ok(m.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Chain state: finalized levels over the base context.
#[derive(Clone, Debug)]
struct State {
    p: u64,
    base: ResidueCtx,
    levels: Vec<FinalLevel>,
}

impl State {
    fn new(p: u64) -> Result<State> {
        Ok(State {
            p,
            base: ResidueCtx::base(p)?,
            levels: vec![],
        })
    }

    fn ctx(&self) -> &ResidueCtx {
        self.levels.last().map(|l| &l.ctx).unwrap_or(&self.base)
    }

    fn e_total(&self) -> u64 {
        self.levels.iter().map(|l| l.e_here).product()
    }

    fn f_total(&self) -> usize {
        self.levels.iter().map(|l| l.f_here).product()
    }

    /// V_r(h) using the first r finalized levels; None is +infinity.
    fn value_upto(&self, r: usize, h: &QPoly) -> Option<Rat> {
        if h.is_zero() {
            return None;
        }
        if r == 0 {
            // Gauss valuation: min v_p over coefficients.
            return h
                .coeffs
                .iter()
                .filter_map(|c| crate::exact::rat::vp(c, self.p))
                .map(rat)
                .min();
        }
        let l = &self.levels[r - 1];
        let mut best: Option<Rat> = None;
        for (j, b) in expand(h, &l.phi).into_iter().enumerate() {
            if let Some(v) = self.value_upto(r - 1, &b) {
                let t = v + &l.mu * rat(j as i64);
                best = Some(match best {
                    None => t,
                    Some(b0) => b0.min(t),
                });
            }
        }
        best
    }

    fn value(&self, h: &QPoly) -> Option<Rat> {
        self.value_upto(self.levels.len(), h)
    }

    /// Value under the augmentation [V; key -> mu].
    fn value_aug(&self, key: &QPoly, mu: &Rat, h: &QPoly) -> Option<Rat> {
        if h.is_zero() {
            return None;
        }
        let mut best: Option<Rat> = None;
        for (j, b) in expand(h, key).into_iter().enumerate() {
            if let Some(v) = self.value(&b) {
                let t = v + mu * rat(j as i64);
                best = Some(match best {
                    None => t,
                    Some(b0) => b0.min(t),
                });
            }
        }
        best
    }

    /// Standard monomial of value gamma in the current value group: p^c times
    /// key powers with exponents in [0, e_l).
    fn std_monomial(&self, gamma: &Rat) -> Result<QPoly> {
        let mut g = gamma.clone();
        let mut out = Poly::one(&Rationals);
        let mut e_below: u64 = self.e_total();
        for l in self.levels.iter().rev() {
            e_below /= l.e_here;
            let mut found = false;
            for a in 0..l.e_here {
                let cand = &g - &l.mu * rat(a as i64);
                if (cand * rat(e_below as i64)).is_integer() {
                    if a > 0 {
                        out = Poly::mul(&Rationals, &out, &Poly::pow(&Rationals, &l.phi, a as usize));
                    }
                    g = &g - &l.mu * rat(a as i64);
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(Error::Internal(format!(
                    "value {gamma} not in the current value group"
                )));
            }
        }
        if !g.is_integer() {
            return Err(Error::Internal(format!(
                "value {gamma} not in the current value group"
            )));
        }
        let c = g.to_integer();
        let scale = big_pow_rat(self.p, &c);
        Ok(out.scale(&Rationals, &scale))
    }

    /// Reduce a value-zero element to the residue field by matching against
    /// every candidate lift; exactly one candidate must work.
    fn reduce(&self, key: &QPoly, mu: &Rat, a: &QPoly) -> Result<Vec<u64>> {
        let ctx = self.ctx();
        let order = ctx.kfield.order();
        let mut hit: Option<Vec<u64>> = None;
        for idx in 0..order {
            let c = ctx.kfield.elem_from_index(idx);
            let diff = if idx == 0 {
                a.clone()
            } else {
                Poly::sub(&Rationals, a, &ctx.lift(&c))
            };
            let above = match self.value_aug(key, mu, &diff) {
                None => true,
                Some(v) => v > rat(0),
            };
            if above {
                if hit.is_some() {
                    return Err(Error::Internal(
                        "reduction matched two residue candidates".into(),
                    ));
                }
                hit = Some(c);
            }
        }
        hit.ok_or_else(|| Error::Internal("reduction matched no residue candidate".into()))
    }

    /// Residual polynomial of the digit family along the line of value w:
    /// coefficients red(b_{j0+i*e} * N0 * S^i), S of value e*mu.
    fn residual_along(
        &self,
        key: &QPoly,
        mu: &Rat,
        e_seg: u64,
        digits: &[QPoly],
        j0: usize,
        d: usize,
        w: &Rat,
    ) -> Result<RPoly> {
        let eta0 = w - mu * rat(j0 as i64);
        let n0 = self.std_monomial(&-&eta0)?;
        let s = self.std_monomial(&(mu * rat(e_seg as i64)))?;
        let ctx = self.ctx();
        let mut coeffs = vec![];
        let mut npow = n0;
        for i in 0..=d {
            let j = j0 + i * e_seg as usize;
            let b = digits.get(j).cloned().unwrap_or_else(Poly::zero);
            let c = if b.is_zero() {
                ctx.kfield.zero()
            } else {
                let eta_j = w - mu * rat(j as i64);
                let vb = self.value(&b).expect("nonzero digit has a value");
                debug_assert!(vb >= eta_j, "digit value below the segment line");
                if vb > eta_j {
                    ctx.kfield.zero()
                } else {
                    let a = Poly::mul(&Rationals, &b, &npow);
                    self.reduce(key, mu, &a)?
                }
            };
            coeffs.push(c);
            if i < d {
                npow = Poly::mul(&Rationals, &npow, &s);
            }
        }
        Ok(Poly::from_coeffs(coeffs).normalized(&ctx.kfield))
    }

    /// Next key for (key, mu, e, psi): monic of degree deg(key)*e*deg(psi)
    /// whose residual along the segment is psi. Verified after construction.
    fn build_key(&self, key: &QPoly, mu: &Rat, e_seg: u64, psi: &RPoly) -> Result<QPoly> {
        let f_psi = psi.degree();
        let ctx = self.ctx();
        let d_mono = self.std_monomial(&(mu * rat(e_seg as i64)))?;
        let mut out = Poly::pow(&Rationals, key, e_seg as usize * f_psi);
        for i in 0..f_psi {
            let c = psi.coeff(&ctx.kfield, i);
            if ctx.kfield.is_zero(&c) {
                continue;
            }
            let lift = ctx.lift(&c);
            let dpow = Poly::pow(&Rationals, &d_mono, f_psi - i);
            let term = Poly::mul(&Rationals, &lift, &dpow).rem(&Rationals, key);
            let shifted = Poly::mul(
                &Rationals,
                &term,
                &Poly::pow(&Rationals, key, e_seg as usize * i),
            );
            out = Poly::add(&Rationals, &out, &shifted);
        }
        // Certify: the candidate must sit on value e*f*mu and reduce to psi.
        let w = mu * rat((e_seg as usize * f_psi) as i64);
        let digits = expand(&out, key);
        let won = digits.iter().enumerate().filter_map(|(j, b)| {
            self.value(b).map(|v| v + mu * rat(j as i64))
        });
        let wmin = won.min().ok_or_else(|| Error::Internal("empty key expansion".into()))?;
        if wmin != w {
            return Err(Error::Internal(
                "key candidate is not on the expected value".into(),
            ));
        }
        let r = self.residual_along(key, mu, e_seg, &digits, 0, f_psi, &w)?;
        if &r != psi {
            return Err(Error::Internal(
                "key candidate does not reproduce its residual factor".into(),
            ));
        }
        Ok(out)
    }

    /// Finalize the pending level (key, mu, e, psi), extending the residue
    /// field when psi has degree >= 2.
    fn finalize(&mut self, key: QPoly, mu: Rat, e_seg: u64, psi: &RPoly) -> Result<()> {
        let f_psi = psi.degree();
        let ctx = if f_psi >= 2 {
            let lift_z = Poly::mul(
                &Rationals,
                &Poly::pow(&Rationals, &key, e_seg as usize),
                &self.std_monomial(&-(&mu * rat(e_seg as i64)))?,
            );
            self.ctx().extend(self.p, psi, &lift_z)?
        } else {
            self.ctx().clone()
        };
        self.levels.push(FinalLevel {
            phi: key,
            mu,
            e_here: e_seg,
            f_here: f_psi,
            ctx,
        });
        Ok(())
    }
}

/// Digits of h in base phi, low to high; at least one entry.
fn expand(h: &QPoly, phi: &QPoly) -> Vec<QPoly> {
    let mut digits = vec![];
    let mut cur = h.clone();
    loop {
        if cur.is_zero() || cur.degree() < phi.degree() {
            digits.push(cur);
            break;
        }
        let (q, r) = cur.div_rem(&Rationals, phi);
        digits.push(r);
        cur = q;
    }
    digits
}

fn big_pow_rat(p: u64, e: &BigInt) -> Rat {
    let mag = BigInt::from(p).pow(e.abs().to_u64().expect("exponent fits") as u32);
    if e.is_negative() {
        Rat::new(BigInt::one(), mag)
    } else {
        Rat::from_integer(mag)
    }
}

/// Canonical display of a residual polynomial in y over F_{p^f}.
pub fn format_residual(k: &ExtField, r: &RPoly) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let mut parts = vec![];
    for (i, c) in r.coeffs.iter().enumerate() {
        if k.is_zero(c) {
            continue;
        }
        let fq = FqElem {
            p: k.p,
            f: k.f,
            rep: c.clone(),
        };
        let cs = fq.format();
        let term = match i {
            0 => cs,
            _ => {
                let ypow = if i == 1 { "y".to_string() } else { format!("y^{i}") };
                if cs == "1" {
                    ypow
                } else if cs.contains('+') {
                    format!("({cs})*{ypow}")
                } else {
                    format!("{cs}*{ypow}")
                }
            }
        };
        parts.push(term);
    }
    parts.join(" + ")
}

/// A terminal branch of the enumeration: everything needed to evaluate the
/// corresponding valuation exactly.
#[derive(Clone, Debug)]
pub struct MacLaneLeaf {
    pub p: u64,
    /// Positivization shift t: the machine ran on p^(t*n) * g(x / p^t).
    pub shift: i64,
    pub g_orig: QPoly,
    pub g_pos: QPoly,
    levels: Vec<FinalLevel>,
    last_key: QPoly,
    last_mu: Rat,
    last_e: u64,
    last_psi: RPoly,
    /// Degree-1 fast path: the rational root when deg(g) = 1.
    linear_root: Option<Rat>,
    pub e: u64,
    pub f: u64,
    pub path: Vec<PathEntry>,
}

impl MacLaneLeaf {
    /// Value of the residue-field degree tower under this leaf.
    pub fn residue_degree(&self) -> u64 {
        self.f
    }

    /// 1/e, the positive generator of the leaf's value group.
    pub fn uniformizer_value(&self) -> Rat {
        Rat::new(BigInt::one(), BigInt::from(self.e))
    }
}

/// All extensions of v_p across Q[x]/(g), g monic irreducible (the caller
/// certifies irreducibility). The leaf set satisfies sum(e*f) = deg(g); that
/// identity is re-checked here and any failure is an internal error.
pub fn enumerate_qx(g: &QPoly, p: u64, config: &Config) -> Result<Vec<MacLaneLeaf>> {
    crate::exact::rat::require_prime(p)?;
    assert!(g.is_monic(&Rationals), "enumeration expects a monic input");
    let n = g.degree();
    if n == 0 {
        return Err(Error::ZeroPoly("cannot extend over a constant".into()));
    }
    if n == 1 {
        let root = -g.coeffs[0].clone();
        let state = State::new(p)?;
        return Ok(vec![MacLaneLeaf {
            p,
            shift: 0,
            g_orig: g.clone(),
            g_pos: g.clone(),
            levels: vec![],
            last_key: Poly::x(&Rationals),
            last_mu: rat(0),
            last_e: 1,
            last_psi: Poly::one(&state.base.kfield),
            linear_root: Some(root),
            e: 1,
            f: 1,
            path: vec![],
        }]);
    }

    // Positivize: make every root valuation strictly positive so x is a key.
    let np = crate::valuation::newton_polygon_q(g, p)?;
    let max_slope = np.segments.last().expect("nonempty polygon").slope.clone();
    let lam_min = -max_slope;
    let t: i64 = if lam_min > rat(0) {
        0
    } else {
        // floor(-lam_min) + 1
        let neg = -lam_min;
        (neg.floor().to_integer().to_i64().expect("small shift")) + 1
    };
    let g_pos = if t == 0 {
        g.clone()
    } else {
        Poly::from_coeffs(
            g.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * big_pow_rat(p, &BigInt::from(t * (n as i64 - i as i64))))
                .collect::<Vec<_>>(),
        )
        .normalized(&Rationals)
    };

    let state = State::new(p)?;
    let mut leaves = vec![];
    enumerate_at(
        &state,
        &g_pos,
        &Poly::x(&Rationals),
        &rat(0),
        n,
        0,
        &[],
        t,
        g,
        p,
        config,
        &mut leaves,
    )?;
    let total: u64 = leaves.iter().map(|l| l.e * l.f).sum();
    if total != n as u64 {
        return Err(Error::Internal(format!(
            "certification failed: sum(e*f) = {total} != {n}"
        )));
    }
    leaves.sort_by(|a, b| cmp_paths(&a.path, &b.path));
    Ok(leaves)
}

fn cmp_paths(a: &[PathEntry], b: &[PathEntry]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.slope.cmp(&y.slope).then_with(|| x.residual.cmp(&y.residual)) {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

#[allow(clippy::too_many_arguments)]
fn enumerate_at(
    state: &State,
    g_pos: &QPoly,
    key: &QPoly,
    nu: &Rat,
    omega: usize,
    depth: usize,
    path: &[PathEntry],
    shift: i64,
    g_orig: &QPoly,
    p: u64,
    config: &Config,
    out: &mut Vec<MacLaneLeaf>,
) -> Result<()> {
    let digits = expand(g_pos, key);
    let points: Vec<(usize, Option<Rat>)> = digits
        .iter()
        .enumerate()
        .map(|(j, b)| (j, state.value(b)))
        .collect();
    let hull = lower_hull(&points);
    let principal: Vec<_> = hull.iter().filter(|s| s.slope < -nu).collect();
    let plen: usize = principal.iter().map(|s| s.len).sum();
    if plen != omega {
        return Err(Error::Internal(format!(
            "principal hull length {plen} does not match inherited multiplicity {omega}"
        )));
    }
    let e_prev = state.e_total();
    let f_prev = state.f_total();
    for seg in principal {
        let mu = -seg.slope.clone();
        // Smallest e with e*mu in (1/E)Z.
        let scaled = &mu * rat(e_prev as i64);
        let e_seg = scaled.denom().to_u64().ok_or_else(|| {
            Error::Internal("segment denominator exceeds u64".into())
        })?;
        if seg.len % e_seg as usize != 0 {
            return Err(Error::Internal(
                "segment length not divisible by its ramification jump".into(),
            ));
        }
        let d = seg.len / e_seg as usize;
        let w = points[seg.start]
            .1
            .clone()
            .expect("hull vertex has finite value")
            + &mu * rat(seg.start as i64);
        let r_poly = state.residual_along(key, &mu, e_seg, &digits, seg.start, d, &w)?;
        let kf = state.ctx().kfield.clone();
        if r_poly.deg() != Some(d) {
            return Err(Error::Internal(
                "residual degree does not match the segment lattice".into(),
            ));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(config.factor_seed);
        let factors = fqfactor::factor_monic(&kf, &r_poly.monic(&kf), &mut rng)?;
        // Slope reported for the input polynomial: the first level of the
        // machine sees slopes shifted by the positivization.
        let reported_slope = if state.levels.is_empty() && depth == 0 {
            &seg.slope + rat(shift)
        } else {
            seg.slope.clone()
        };
        for (psi, m) in &factors {
            let mut sub_path = path.to_vec();
            sub_path.push(PathEntry {
                slope: reported_slope.clone(),
                residual: format_residual(&kf, psi),
            });
            if *m == 1 {
                out.push(MacLaneLeaf {
                    p,
                    shift,
                    g_orig: g_orig.clone(),
                    g_pos: g_pos.clone(),
                    levels: state.levels.clone(),
                    last_key: key.clone(),
                    last_mu: mu.clone(),
                    last_e: e_seg,
                    last_psi: psi.clone(),
                    linear_root: None,
                    e: e_prev * e_seg,
                    f: (f_prev * psi.degree()) as u64,
                    path: sub_path,
                });
                continue;
            }
            if depth + 1 > config.refinement_limit {
                return Err(Error::RefinementLimit(format!(
                    "refinement depth {} exceeded without certification",
                    config.refinement_limit
                )));
            }
            let key_next = state.build_key(key, &mu, e_seg, psi)?;
            let nu_next = &mu * rat((e_seg as usize * psi.degree()) as i64);
            if key_next.degree() == key.degree() {
                // Same-degree refinement: better key, same level structure.
                enumerate_at(
                    state, g_pos, &key_next, &nu_next, *m, depth + 1, &sub_path, shift,
                    g_orig, p, config, out,
                )?;
            } else {
                let mut st = state.clone();
                st.finalize(key.clone(), mu.clone(), e_seg, psi)?;
                enumerate_at(
                    &st, g_pos, &key_next, &nu_next, *m, depth + 1, &sub_path, shift,
                    g_orig, p, config, out,
                )?;
            }
        }
    }
    Ok(())
}

/// Exact value of h(a) under the valuation identified by the leaf, where a is
/// a root of the leaf's minimal polynomial. The leaf's approximant is pushed
/// one digit at a time until the residual test certifies exactness.
pub fn leaf_value_of(leaf: &MacLaneLeaf, h: &QPoly, config: &Config) -> Result<Value> {
    if h.is_zero() || h.rem(&Rationals, &leaf.g_orig).is_zero() {
        return Ok(Value::Infinity);
    }
    if let Some(root) = &leaf.linear_root {
        let v = h.eval(&Rationals, root);
        return crate::valuation::vp_rational(&v, leaf.p);
    }
    // Move h into the positivized coordinates: x -> x / p^t.
    let h_pos = Poly::from_coeffs(
        h.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * big_pow_rat(leaf.p, &BigInt::from(-leaf.shift * i as i64)))
            .collect::<Vec<_>>(),
    )
    .normalized(&Rationals);

    let mut state = State {
        p: leaf.p,
        base: ResidueCtx::base(leaf.p)?,
        levels: leaf.levels.clone(),
    };
    let mut key = leaf.last_key.clone();
    let mut mu = leaf.last_mu.clone();
    let mut e_seg = leaf.last_e;
    let mut psi = leaf.last_psi.clone();
    let cap = rat(config.value_cap as i64);

    loop {
        let digits = expand(&h_pos, &key);
        let vals: Vec<Option<Rat>> = digits.iter().map(|b| state.value(b)).collect();
        let w = vals
            .iter()
            .enumerate()
            .filter_map(|(j, v)| v.clone().map(|v| v + &mu * rat(j as i64)))
            .min()
            .expect("nonzero polynomial has a value");
        let j0 = (0..digits.len())
            .find(|&j| {
                vals[j]
                    .clone()
                    .map_or(false, |v| v + &mu * rat(j as i64) == w)
            })
            .unwrap();
        let d = (digits.len() - 1).saturating_sub(j0) / e_seg as usize;
        let r_h = state.residual_along(&key, &mu, e_seg, &digits, j0, d, &w)?;
        let kf = state.ctx().kfield.clone();
        let divisible = !r_h.is_zero() && r_h.rem(&kf, &psi).is_zero();
        if !divisible {
            return Ok(Value::from_rat(w));
        }
        // Improve the approximant by one chain step.
        let key_next = state.build_key(&key, &mu, e_seg, &psi)?;
        let nu_next = &mu * rat((e_seg as usize * psi.degree()) as i64);
        if key_next.degree() > key.degree() {
            state.finalize(key.clone(), mu.clone(), e_seg, &psi)?;
        }
        // Exact chain end: the key equals the minimal polynomial itself.
        if key_next == leaf.g_pos {
            state.finalize(key_next, nu_next, 1, &Poly::from_coeffs(vec![
                state.ctx().kfield.zero(),
                state.ctx().kfield.one(),
            ]))?;
            // With the full chain finalized the single digit h is exact.
            let v = state
                .value_upto(state.levels.len() - 1, &h_pos)
                .expect("nonzero polynomial");
            return Ok(Value::from_rat(v));
        }
        let digits_g = expand(&leaf.g_pos, &key_next);
        let points: Vec<(usize, Option<Rat>)> = digits_g
            .iter()
            .enumerate()
            .map(|(j, b)| (j, state.value(b)))
            .collect();
        let hull = lower_hull(&points);
        let principal: Vec<_> = hull.iter().filter(|s| s.slope < -&nu_next).collect();
        if principal.len() != 1 || principal[0].len != 1 {
            return Err(Error::Internal(
                "continuation step lost the single-branch invariant".into(),
            ));
        }
        let seg = principal[0];
        mu = -seg.slope.clone();
        if mu > cap {
            return Err(Error::PrecisionExhausted(format!(
                "approximant value exceeded the cap {}",
                config.value_cap
            )));
        }
        e_seg = 1;
        let w_g = points[seg.start]
            .1
            .clone()
            .expect("hull vertex has finite value")
            + &mu * rat(seg.start as i64);
        psi = state.residual_along(&key_next, &mu, 1, &digits_g, seg.start, 1, &w_g)?;
        let kf2 = state.ctx().kfield.clone();
        psi = psi.monic(&kf2);
        key = key_next;
    }
}
