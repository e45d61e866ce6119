//! Extensions of p-adic valuations across finite field extensions: complete
//! enumeration with certified ramification index e and residue degree f, and
//! the decision layer built on top of it (restriction, compatibility,
//! immediacy, Henselization membership, weak approximation).
//!
//! A valuation is a handle: either the p-adic valuation on Q or a certified
//! descriptor on a tower extension. A descriptor carries an absolute
//! refinement chain for a primitive generator of its field, which makes the
//! valuation exactly computable on every element; each decision procedure
//! here reduces to such evaluations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde_json::json;

use crate::batch::map_batch;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::exact::field::{Field, Rationals};
use crate::exact::poly::Poly;
use crate::exact::rat::{fmt_rat, rat, rat_frac, Rat};
use crate::maclane::{self, MacLaneLeaf, PathEntry};
use crate::numberfields::{
    self, eval_qpoly, express_in_primitive, extend_tower, is_irreducible_over, tower_poly_to_q,
};
use crate::tower::{AlgElem, KElem, TowerField};
use crate::value::Value;

type QPoly = Poly<Rationals>;

/// A valuation handle: v_p on Q, or a certified extension descriptor whose
/// home tower is the field the valuation lives on.
#[derive(Clone, Debug)]
pub enum ValHandle {
    PAdic(u64),
    Ext(Box<ExtensionDescriptor>),
}

impl ValHandle {
    pub fn prime(&self) -> u64 {
        match self {
            ValHandle::PAdic(p) => *p,
            ValHandle::Ext(d) => d.p,
        }
    }

    /// Whether this handle is a valuation on the given tower.
    pub fn attaches_to(&self, k: &TowerField) -> bool {
        match self {
            ValHandle::PAdic(_) => k.is_q(),
            ValHandle::Ext(d) => d.is_home(k),
        }
    }

    /// Exact value of an element of `k` under this handle.
    pub fn value_of(&self, k: &TowerField, a: &KElem, config: &Config) -> Result<Value> {
        match self {
            ValHandle::PAdic(p) => crate::valuation::vp_rational(TowerField::expect_rat(a), *p),
            ValHandle::Ext(d) => d.value_of_home_elem(k, a, config),
        }
    }

    /// Stable identification string; equal strings mean the same valuation
    /// written the same way. Used for the syntactic duplicate check.
    fn fingerprint(&self) -> String {
        match self {
            ValHandle::PAdic(p) => format!("p{p}"),
            ValHandle::Ext(d) => {
                let min = d
                    .theta_min
                    .coeffs
                    .iter()
                    .map(fmt_rat)
                    .collect::<Vec<_>>()
                    .join(",");
                format!("p{} [{}] {}", d.p, min, path_string(&d.path))
            }
        }
    }
}

fn path_string(path: &[PathEntry]) -> String {
    path.iter()
        .map(|e| format!("({}; {})", fmt_rat(&e.slope), e.residual))
        .collect::<Vec<_>>()
        .join(" ")
}

/// One extension of a base valuation across K -> K[x]/(g), identified by its
/// refinement path and certified through the fundamental equality over the
/// full sibling set. e and f are relative to the base valuation.
#[derive(Clone, Debug)]
pub struct ExtensionDescriptor {
    pub base: TowerField,
    pub base_val: Box<ValHandle>,
    pub minpoly: Poly<TowerField>,
    pub p: u64,
    pub path: Vec<PathEntry>,
    pub e: u64,
    pub f: u64,
    pub certified: bool,
    /// base extended by a root of minpoly. The generator name is synthetic;
    /// attachment checks compare structure only.
    home: TowerField,
    /// Primitive generator of home over Q, its minimal polynomial, and the
    /// absolute chain for it. abs_e, abs_f are invariants relative to Q.
    theta: KElem,
    theta_min: QPoly,
    leaf: MacLaneLeaf,
    abs_e: u64,
    abs_f: u64,
}

impl ExtensionDescriptor {
    /// True when `k` is structurally this descriptor's field: the base's
    /// levels followed by one level cut out by minpoly.
    pub fn is_home(&self, k: &TowerField) -> bool {
        k.depth() == self.base.depth() + 1
            && same_levels(&k.sub(), &self.base)
            && k.top_minpoly().coeffs == self.minpoly.coeffs
    }

    /// Invariants of the composite valuation relative to Q.
    pub fn abs_invariants(&self) -> (u64, u64) {
        (self.abs_e, self.abs_f)
    }

    /// Value of an element of this descriptor's field. `k` must be the home
    /// tower or a structurally equal instance of it.
    pub fn value_of_home_elem(&self, k: &TowerField, a: &KElem, config: &Config) -> Result<Value> {
        if !self.certified {
            return Err(Error::UncertifiedDescriptor(
                "cannot evaluate an uncertified descriptor".into(),
            ));
        }
        if !self.is_home(k) {
            return Err(Error::DomainMismatch(
                "element does not come from the descriptor's field".into(),
            ));
        }
        let q = express_in_primitive(k, &self.theta, a)?;
        maclane::leaf_value_of(&self.leaf, &q, config)
    }

    fn to_json(&self) -> serde_json::Value {
        json!({
            "e": self.e,
            "f": self.f,
            "path": self.path.iter().map(|en| json!({
                "slope": fmt_rat(&en.slope),
                "residual": en.residual,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Structural equality of towers: same level minimal polynomials in the same
/// order. Generator names do not matter; representations are positional.
fn same_levels(a: &TowerField, b: &TowerField) -> bool {
    a.depth() == b.depth()
        && (0..a.depth()).all(|i| a.tower().levels[i].minpoly == b.tower().levels[i].minpoly)
}

/// Complete enumeration result for one (K, v, g) input.
#[derive(Clone, Debug)]
pub struct ExtensionReport {
    pub descriptors: Vec<ExtensionDescriptor>,
    pub degree: u64,
    /// Sum of e_i * f_i over the descriptors; equals `degree` exactly.
    pub equality_certificate: u64,
}

impl ExtensionReport {
    pub fn certified(&self) -> bool {
        self.equality_certificate == self.degree && self.descriptors.iter().all(|d| d.certified)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "degree": self.degree,
            "extensions": self.descriptors.iter().map(|d| d.to_json()).collect::<Vec<_>>(),
            "certified": self.certified(),
        })
    }
}

/// A generator name not used by any level of the tower.
fn fresh_name(k: &TowerField) -> String {
    let used: Vec<&str> = k.tower().levels.iter().map(|l| l.name.as_str()).collect();
    for c in ["t", "u", "w", "s", "b", "c", "d", "g", "h"] {
        if !used.contains(&c) {
            return c.to_string();
        }
    }
    (2..)
        .map(|i| format!("t{i}"))
        .find(|n| !used.contains(&n.as_str()))
        .unwrap()
}

/// All extensions of `v` to K[x]/(g), certified by sum(e_i * f_i) = deg g.
pub fn extensions_of(
    k: &TowerField,
    v: &ValHandle,
    g: &Poly<TowerField>,
    config: &Config,
) -> Result<ExtensionReport> {
    if !v.attaches_to(k) {
        return Err(Error::DomainMismatch(
            "the valuation handle does not live on the given tower".into(),
        ));
    }
    if let ValHandle::Ext(d) = v {
        if !d.certified {
            return Err(Error::UncertifiedDescriptor(
                "base valuation descriptor is not certified".into(),
            ));
        }
    }
    if g.is_zero() || g.degree() == 0 {
        return Err(Error::NotIrreducible(
            "extension polynomial must be nonconstant".into(),
        ));
    }
    let g = g.monic(k);
    if !is_irreducible_over(k, &g, config)? {
        return Err(Error::NotIrreducible(format!(
            "polynomial of degree {} is reducible over the base",
            g.degree()
        )));
    }
    let p = v.prime();

    if k.is_q() {
        // Absolute case: enumerate directly; the adjoined root itself is a
        // primitive generator.
        let gq = tower_poly_to_q(&g);
        let leaves = maclane::enumerate_qx(&gq, p, config)?;
        let home = extend_tower(k, &fresh_name(k), &g, config)?;
        let theta = home.gen();
        let mut descriptors = vec![];
        for leaf in leaves {
            let (e, f) = (leaf.e, leaf.f);
            descriptors.push(ExtensionDescriptor {
                base: k.clone(),
                base_val: Box::new(v.clone()),
                minpoly: g.clone(),
                p,
                path: leaf.path.clone(),
                e,
                f,
                certified: true,
                home: home.clone(),
                theta: theta.clone(),
                theta_min: gq.clone(),
                leaf,
                abs_e: e,
                abs_f: f,
            });
        }
        let certificate: u64 = descriptors.iter().map(|d| d.e * d.f).sum();
        return Ok(ExtensionReport {
            degree: g.degree() as u64,
            equality_certificate: certificate,
            descriptors,
        });
    }

    // Relative case: enumerate absolutely on a primitive generator of
    // M = K[x]/(g) and keep the valuations whose restriction to K is v.
    let w = match v {
        ValHandle::Ext(d) => d,
        ValHandle::PAdic(_) => unreachable!("attaches_to holds and k is not Q"),
    };
    let m_tower = extend_tower(k, &fresh_name(k), &g, config)?;
    let (theta_m, theta_m_min) = numberfields::primitive_element(&m_tower, config)?;
    let abs_leaves = maclane::enumerate_qx(&theta_m_min, p, config)?;
    let oracle = RestrictionOracle::build(&w.theta_min, p, config)?;
    let w_index = oracle.index_of(&w.leaf)?;

    let mut descriptors = vec![];
    for leaf in abs_leaves {
        let idx = oracle.identify(|xq| {
            let xi = eval_qpoly(k, xq, &w.theta);
            let lifted = m_tower.lift_from(k.depth(), &xi);
            let expressed = express_in_primitive(&m_tower, &theta_m.rep, &lifted)?;
            maclane::leaf_value_of(&leaf, &expressed, config)
        })?;
        if idx != w_index {
            continue;
        }
        if leaf.e % w.abs_e != 0 || leaf.f % w.abs_f != 0 {
            return Err(Error::Internal(
                "absolute invariants are not multiples of the base invariants".into(),
            ));
        }
        let (e, f) = (leaf.e / w.abs_e, leaf.f / w.abs_f);
        descriptors.push(ExtensionDescriptor {
            base: k.clone(),
            base_val: Box::new(v.clone()),
            minpoly: g.clone(),
            p,
            path: leaf.path.clone(),
            e,
            f,
            certified: true,
            home: m_tower.clone(),
            theta: theta_m.rep.clone(),
            theta_min: theta_m_min.clone(),
            abs_e: leaf.e,
            abs_f: leaf.f,
            leaf,
        });
    }
    let certificate: u64 = descriptors.iter().map(|d| d.e * d.f).sum();
    if certificate != g.degree() as u64 {
        return Err(Error::Internal(format!(
            "fiber certification failed: sum e*f = {certificate}, degree = {}",
            g.degree()
        )));
    }
    Ok(ExtensionReport {
        degree: g.degree() as u64,
        equality_certificate: certificate,
        descriptors,
    })
}

/// Enumerate extensions for many polynomials over the same (K, v).
pub fn extensions_of_batch(
    k: &TowerField,
    v: &ValHandle,
    gs: &[Poly<TowerField>],
    config: &Config,
) -> Vec<Result<ExtensionReport>> {
    map_batch(gs, |g| extensions_of(k, v, g, config))
}

/// Distinguishes the finitely many extensions of v_p living on one field
/// Q[x]/(m) by their values on a separating family: a deterministic
/// small-height element enumeration scanned until every pair of valuations
/// disagrees somewhere on the family.
struct RestrictionOracle {
    leaves: Vec<MacLaneLeaf>,
    family: Vec<QPoly>,
    prints: Vec<Vec<Value>>,
}

impl RestrictionOracle {
    fn build(theta_min: &QPoly, p: u64, config: &Config) -> Result<RestrictionOracle> {
        let leaves = maclane::enumerate_qx(theta_min, p, config)?;
        let n = theta_min.degree();
        let mut family: Vec<QPoly> = vec![];
        let mut prints: Vec<Vec<Value>> = vec![vec![]; leaves.len()];
        let mut open: Vec<(usize, usize)> = (0..leaves.len())
            .flat_map(|i| (i + 1..leaves.len()).map(move |j| (i, j)))
            .collect();
        let mut tried = 0usize;
        for cand in qpoly_stream(n) {
            if open.is_empty() {
                break;
            }
            tried += 1;
            if tried > config.search_cap {
                return Err(Error::Internal(
                    "separating family search exhausted its budget".into(),
                ));
            }
            let vals: Vec<Value> = leaves
                .iter()
                .map(|l| maclane::leaf_value_of(l, &cand, config))
                .collect::<Result<_>>()?;
            let before = open.len();
            open.retain(|&(i, j)| vals[i] == vals[j]);
            if open.len() < before {
                for (i, v) in vals.into_iter().enumerate() {
                    prints[i].push(v);
                }
                family.push(cand);
            }
        }
        Ok(RestrictionOracle {
            leaves,
            family,
            prints,
        })
    }

    /// Position of a leaf inside this oracle's enumeration.
    fn index_of(&self, leaf: &MacLaneLeaf) -> Result<usize> {
        self.leaves
            .iter()
            .position(|l| l.path == leaf.path)
            .ok_or_else(|| {
                Error::Internal("descriptor chain not found in its own sibling set".into())
            })
    }

    /// Which valuation produces the given values on the separating family.
    fn identify(&self, eval: impl Fn(&QPoly) -> Result<Value>) -> Result<usize> {
        let mut got = vec![];
        for x in &self.family {
            got.push(eval(x)?);
        }
        let hits: Vec<usize> = (0..self.leaves.len())
            .filter(|&i| self.prints[i] == got)
            .collect();
        match hits.as_slice() {
            [i] => Ok(*i),
            [] => Err(Error::Internal(
                "restriction fingerprint matched no valuation".into(),
            )),
            _ => Err(Error::Internal(
                "restriction fingerprint matched several valuations".into(),
            )),
        }
    }
}

/// Integer coefficient vectors of length n in max-norm shells 1, 2, ...,
/// odometer order inside each shell (a vector appears in the shell of its
/// largest absolute coefficient, so no vector repeats).
struct CoeffShells {
    n: usize,
    b: i64,
    v: Vec<i64>,
    shell_done: bool,
}

impl Iterator for CoeffShells {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        if self.n == 0 {
            return None;
        }
        loop {
            if self.shell_done {
                self.b += 1;
                self.v = vec![-self.b; self.n];
                self.shell_done = false;
            }
            let cur = self.v.clone();
            let mut i = 0;
            loop {
                if i == self.n {
                    self.shell_done = true;
                    break;
                }
                self.v[i] += 1;
                if self.v[i] > self.b {
                    self.v[i] = -self.b;
                    i += 1;
                } else {
                    break;
                }
            }
            if cur.iter().any(|c| c.abs() == self.b) {
                return Some(cur);
            }
        }
    }
}

fn coeff_shells(n: usize) -> CoeffShells {
    CoeffShells {
        n,
        b: 1,
        v: vec![-1; n],
        shell_done: false,
    }
}

/// Deterministic stream of nonzero rational polynomials of degree < n.
fn qpoly_stream(n: usize) -> impl Iterator<Item = QPoly> {
    coeff_shells(n).map(|v| {
        Poly::from_coeffs(v.into_iter().map(rat).collect::<Vec<_>>()).normalized(&Rationals)
    })
}

/// w(g(a)) for g over the descriptor's base field, a the root its minimal
/// polynomial cuts out. g is reduced modulo the minimal polynomial first.
pub fn value_of_element(
    g: &Poly<TowerField>,
    d: &ExtensionDescriptor,
    config: &Config,
) -> Result<Value> {
    if !d.certified {
        return Err(Error::UncertifiedDescriptor(
            "cannot evaluate an uncertified descriptor".into(),
        ));
    }
    let red = g.rem(&d.base, &d.minpoly);
    let alpha = d.home.gen();
    let mut acc = d.home.zero();
    for c in red.coeffs.iter().rev() {
        let lifted = d.home.lift_from(d.base.depth(), c);
        acc = d.home.add(&d.home.mul(&acc, &alpha), &lifted);
    }
    d.value_of_home_elem(&d.home, &acc, config)
}

/// Whether w restricted to the field of `v` equals v. The field of `v` must
/// be a structural prefix of w's field; the whole field is allowed, which
/// compares the two valuations directly.
pub fn restricts_to(w: &ExtensionDescriptor, v: &ValHandle, config: &Config) -> Result<bool> {
    if !w.certified {
        return Err(Error::UncertifiedDescriptor(
            "restriction of an uncertified descriptor".into(),
        ));
    }
    match v {
        ValHandle::PAdic(p) => Ok(w.p == *p),
        ValHandle::Ext(d) => {
            if !d.certified {
                return Err(Error::UncertifiedDescriptor(
                    "restriction target descriptor is not certified".into(),
                ));
            }
            if d.p != w.p {
                return Ok(false);
            }
            let kd = d.home.depth();
            if w.home.depth() < kd || !same_levels(&w.home.prefix(kd), &d.home) {
                return Err(Error::DomainMismatch(
                    "restriction target does not live on a prefix of the descriptor's field"
                        .into(),
                ));
            }
            let oracle = RestrictionOracle::build(&d.theta_min, d.p, config)?;
            let target = oracle.index_of(&d.leaf)?;
            let got = oracle.identify(|xq| {
                let xi = eval_qpoly(&d.home, xq, &d.theta);
                let lifted = w.home.lift_from(kd, &xi);
                let expressed = express_in_primitive(&w.home, &w.theta, &lifted)?;
                maclane::leaf_value_of(&w.leaf, &expressed, config)
            })?;
            Ok(got == target)
        }
    }
}

/// Immediate: both relative invariants are 1.
pub fn is_immediate(d: &ExtensionDescriptor) -> Result<bool> {
    if !d.certified {
        return Err(Error::UncertifiedDescriptor(
            "immediacy of an uncertified descriptor".into(),
        ));
    }
    Ok(d.e == 1 && d.f == 1)
}

/// Whether the extension of v_p indexed by `which` (in report order) on
/// Q[x]/(g) is immediate, which characterizes membership of the adjoined
/// root in the Henselization of Q at p.
pub fn henselization_membership(g: &QPoly, p: u64, which: usize, config: &Config) -> Result<bool> {
    let q = TowerField::q();
    let gt = numberfields::q_poly_to_tower(&q, g);
    let report = extensions_of(&q, &ValHandle::PAdic(p), &gt, config)?;
    let d = report.descriptors.get(which).ok_or_else(|| {
        Error::IndexOutOfRange(format!(
            "extension index {which} out of range 0..{}",
            report.descriptors.len()
        ))
    })?;
    is_immediate(d)
}

/// Whether some valuation on the compositum of the two home fields restricts
/// to u on the first and to w on the second. The compositum is built
/// deterministically: shared structural prefixes are identified, and each
/// remaining level of w's field is adjoined through the canonically first
/// irreducible factor of its mapped minimal polynomial.
pub fn common_extension_exists(
    u: &ExtensionDescriptor,
    w: &ExtensionDescriptor,
    config: &Config,
) -> Result<bool> {
    if !u.certified || !w.certified {
        return Err(Error::UncertifiedDescriptor(
            "compatibility of uncertified descriptors".into(),
        ));
    }
    if u.p != w.p {
        return Err(Error::DomainMismatch(
            "compatibility requires a shared residue characteristic".into(),
        ));
    }
    let p = u.p;
    let k1 = &u.home;
    let k2 = &w.home;

    // Identify the longest shared structural prefix, then adjoin the rest of
    // k2 level by level. sigma tracks the images of k2's generators.
    let mut d0 = 0;
    while d0 < k1.depth().min(k2.depth())
        && k1.tower().levels[d0].minpoly == k2.tower().levels[d0].minpoly
    {
        d0 += 1;
    }
    let mut comp = k1.clone();
    let mut sigma: Vec<KElem> = (1..=d0).map(|i| comp.gen_at(i)).collect();
    for depth in d0 + 1..=k2.depth() {
        let level_field = k2.prefix(depth);
        let m = level_field.top_minpoly();
        let mapped = Poly::from_coeffs(
            m.coeffs
                .iter()
                .map(|c| map_through(&level_field.sub(), &comp, &sigma, c))
                .collect::<Vec<_>>(),
        )
        .normalized(&comp);
        let mut factors = numberfields::factor_over_field(&comp, &mapped, config)?;
        factors.sort_by(|a, b| Poly::cmp_canonical(&comp, &a.0, &b.0));
        let first = factors[0].0.monic(&comp);
        if first.degree() == 1 {
            sigma.push(comp.neg(&first.coeffs[0]));
        } else {
            let next = extend_tower(&comp, &fresh_name(&comp), &first, config)?;
            sigma = sigma
                .iter()
                .map(|s| next.lift_from(comp.depth(), s))
                .collect();
            sigma.push(next.gen());
            comp = next;
        }
    }

    let (theta_c, theta_c_min) = numberfields::primitive_element(&comp, config)?;
    let abs_leaves = maclane::enumerate_qx(&theta_c_min, p, config)?;

    let oracle_u = RestrictionOracle::build(&u.theta_min, p, config)?;
    let u_index = oracle_u.index_of(&u.leaf)?;
    let oracle_w = RestrictionOracle::build(&w.theta_min, p, config)?;
    let w_index = oracle_w.index_of(&w.leaf)?;
    let sigma_theta = map_through(k2, &comp, &sigma, &w.theta);

    for leaf in &abs_leaves {
        let iu = oracle_u.identify(|xq| {
            let xi = eval_qpoly(k1, xq, &u.theta);
            let lifted = comp.lift_from(k1.depth(), &xi);
            let expressed = express_in_primitive(&comp, &theta_c.rep, &lifted)?;
            maclane::leaf_value_of(leaf, &expressed, config)
        })?;
        if iu != u_index {
            continue;
        }
        let iw = oracle_w.identify(|xq| {
            let xi = eval_qpoly(&comp, xq, &sigma_theta);
            let expressed = express_in_primitive(&comp, &theta_c.rep, &xi)?;
            maclane::leaf_value_of(leaf, &expressed, config)
        })?;
        if iw == w_index {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Image of an element of `from` in `to`, given images of the generators of
/// `from` (images[i] is where generator i+1 goes, canonical in `to`).
fn map_through(from: &TowerField, to: &TowerField, images: &[KElem], a: &KElem) -> KElem {
    fn go(depth: usize, to: &TowerField, images: &[KElem], a: &KElem) -> KElem {
        match a {
            KElem::Rat(r) => to.from_rat(r.clone()),
            KElem::Alg(cs) => {
                let g = &images[depth - 1];
                let mut acc = to.zero();
                for c in cs.iter().rev() {
                    let mapped = go(depth - 1, to, images, c);
                    acc = to.add(&to.mul(&acc, g), &mapped);
                }
                acc
            }
        }
    }
    go(from.depth(), to, images, a)
}

/// Weak approximation on Q: a rational a with v_{p_i}(a) >= 0 and
/// v_{p_i}(a - t_i) > 0 for every i, by CRT on one digit per prime.
pub fn weak_approximation_q(primes: &[u64], targets: &[Rat]) -> Result<Rat> {
    if primes.len() != targets.len() || primes.is_empty() {
        return Err(Error::DomainMismatch(
            "need equally many valuations and targets".into(),
        ));
    }
    for (i, p) in primes.iter().enumerate() {
        crate::exact::rat::require_prime(*p)?;
        if primes[..i].contains(p) {
            return Err(Error::DuplicateValuations(format!(
                "valuation v_{p} listed twice"
            )));
        }
    }
    for (p, t) in primes.iter().zip(targets) {
        if matches!(crate::exact::rat::vp(t, *p), Some(k) if k < 0) {
            return Err(Error::DomainMismatch(format!(
                "target has negative value at p = {p}"
            )));
        }
    }
    let mut modulus = BigInt::from(1);
    let mut x = BigInt::zero();
    for (p, t) in primes.iter().zip(targets) {
        let pb = BigInt::from(*p);
        let r = rat_mod_p(t, *p);
        // Extend x across the new modulus: x + modulus * k = r (mod p).
        let eg = modulus.extended_gcd(&pb);
        let k = ((&r - &x) * eg.x) % &pb;
        x += &modulus * k;
        modulus *= &pb;
        x = ((&x % &modulus) + &modulus) % &modulus;
    }
    let a = Rat::from_integer(x);
    for (p, t) in primes.iter().zip(targets) {
        let ok_a = !matches!(crate::exact::rat::vp(&a, *p), Some(k) if k < 0);
        let ok_d = !matches!(crate::exact::rat::vp(&(&a - t), *p), Some(k) if k <= 0);
        if !ok_a || !ok_d {
            return Err(Error::Internal(
                "weak approximation postcondition failed".into(),
            ));
        }
    }
    Ok(a)
}

/// Residue of a p-integral rational mod p, as an integer in [0, p).
fn rat_mod_p(t: &Rat, p: u64) -> BigInt {
    let pb = BigInt::from(p);
    let num = ((t.numer() % &pb) + &pb) % &pb;
    let den = ((t.denom() % &pb) + &pb) % &pb;
    let inv = den.extended_gcd(&pb).x;
    ((num * inv) % &pb + &pb) % &pb
}

/// Weak approximation: an element a of the targets' field with v_i(a) >= 0
/// and v_i(a - t_i) > 0 for every i. On Q this is CRT; on towers,
/// combinations of separating elements, postconditions verified exactly.
pub fn weak_approximation(
    handles: &[ValHandle],
    targets: &[AlgElem],
    config: &Config,
) -> Result<AlgElem> {
    if handles.len() != targets.len() || handles.is_empty() {
        return Err(Error::DomainMismatch(
            "need equally many valuations and targets".into(),
        ));
    }
    let k = targets[0].field.clone();
    for t in targets {
        if t.field != k {
            return Err(Error::DomainMismatch(
                "targets come from different fields".into(),
            ));
        }
    }
    for h in handles {
        if !h.attaches_to(&k) {
            return Err(Error::DomainMismatch(
                "a valuation handle does not live on the targets' field".into(),
            ));
        }
    }
    for i in 0..handles.len() {
        for j in i + 1..handles.len() {
            if handles[i].fingerprint() == handles[j].fingerprint() {
                return Err(Error::DuplicateValuations(format!(
                    "valuations {i} and {j} coincide"
                )));
            }
        }
    }
    for (h, t) in handles.iter().zip(targets) {
        if h.value_of(&k, &t.rep, config)? < Value::zero() {
            return Err(Error::DomainMismatch(
                "target has negative value under its valuation".into(),
            ));
        }
    }
    if handles.len() == 1 {
        return Ok(targets[0].clone());
    }
    if k.is_q() {
        let primes: Vec<u64> = handles.iter().map(|h| h.prime()).collect();
        let ts: Vec<Rat> = targets
            .iter()
            .map(|t| TowerField::expect_rat(&t.rep).clone())
            .collect();
        let a = weak_approximation_q(&primes, &ts)?;
        return Ok(AlgElem {
            field: k.clone(),
            rep: k.from_rat(a),
        });
    }

    let n = handles.len();
    let val = |i: usize, x: &KElem| handles[i].value_of(&k, x, config);

    // Stage 1: for each ordered pair, an element with v_i < 0 < v_j.
    // Different residue characteristics separate by a prime ratio; equal
    // ones search for an element the two valuations value apart.
    let mut pair: Vec<Vec<Option<KElem>>> = vec![vec![None; n]; n];
    let mut unresolved = 0usize;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (pi, pj) = (handles[i].prime(), handles[j].prime());
            if pi != pj {
                pair[i][j] = Some(k.from_rat(rat_frac(pj as i64, pi as i64)));
            } else {
                unresolved += 1;
            }
        }
    }
    if unresolved > 0 {
        let mut tried = 0usize;
        for cand in tower_stream(&k) {
            tried += 1;
            if tried > config.search_cap {
                break;
            }
            let vals: Vec<Value> = (0..n).map(|i| val(i, &cand)).collect::<Result<_>>()?;
            for i in 0..n {
                for j in 0..n {
                    if i != j
                        && pair[i][j].is_none()
                        && handles[i].prime() == handles[j].prime()
                        && vals[i] != vals[j]
                    {
                        let z = tilt(&k, &cand, handles[i].prime(), &vals[i], &vals[j])?;
                        debug_assert!(val(i, &z)? < Value::zero() && val(j, &z)? > Value::zero());
                        pair[i][j] = Some(z);
                        unresolved -= 1;
                    }
                }
            }
            if unresolved == 0 {
                break;
            }
        }
        if unresolved > 0 {
            return Err(Error::DuplicateValuations(
                "two valuations could not be separated on the search set".into(),
            ));
        }
    }

    // Stage 2: z_i with v_i(z_i) < 0 and v_j(z_i) > 0 for every j != i,
    // grown one constraint at a time. Raising m repairs every coordinate
    // that is already strictly positive, so each step terminates.
    let mut zs: Vec<KElem> = vec![];
    for i in 0..n {
        let j0 = if i == 0 { 1 } else { 0 };
        let mut z = pair[i][j0].clone().unwrap();
        let mut fixed = vec![j0];
        for j in 0..n {
            if j == i || fixed.contains(&j) {
                continue;
            }
            if val(j, &z)? > Value::zero() {
                fixed.push(j);
                continue;
            }
            let y = pair[i][j].clone().unwrap();
            let vz_j = val(j, &z)?;
            let mut m = 1usize;
            loop {
                if m > config.search_cap {
                    return Err(Error::Internal(
                        "weak approximation combination stalled".into(),
                    ));
                }
                let zm = tower_pow(&k, &z, m);
                let candidate = if vz_j.is_zero() {
                    Some(k.mul(&zm, &y))
                } else {
                    let denom = k.add(&k.one(), &zm);
                    k.inv(&denom).map(|inv| k.mul(&k.mul(&zm, &inv), &y))
                };
                if let Some(cand) = candidate {
                    let mut ok = val(i, &cand)? < Value::zero() && val(j, &cand)? > Value::zero();
                    if ok {
                        for &j2 in &fixed {
                            if val(j2, &cand)? <= Value::zero() {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok {
                        z = cand;
                        fixed.push(j);
                        break;
                    }
                }
                m += 1;
            }
        }
        debug_assert!(val(i, &z)? < Value::zero());
        zs.push(z);
    }

    // Stage 3: a = sum of t_i * z_i^m / (1 + z_i^m). Each term tends to t_i
    // under v_i and to 0 under the others as m grows, so some finite m
    // passes the exact postcondition check.
    let mut m = 1usize;
    loop {
        if m > config.search_cap {
            return Err(Error::Internal(
                "weak approximation combination stalled".into(),
            ));
        }
        let mut a = Some(k.zero());
        for (i, t) in targets.iter().enumerate() {
            let zm = tower_pow(&k, &zs[i], m);
            let denom = k.add(&k.one(), &zm);
            match k.inv(&denom) {
                Some(inv) => {
                    let e = k.mul(&zm, &inv);
                    a = a.map(|acc| k.add(&acc, &k.mul(&t.rep, &e)));
                }
                None => {
                    a = None;
                    break;
                }
            }
        }
        if let Some(a) = a {
            let mut ok = true;
            for (i, t) in targets.iter().enumerate() {
                let va = val(i, &a)?;
                let diff = k.add(&a, &k.neg(&t.rep));
                let vd = val(i, &diff)?;
                if va < Value::zero() || vd <= Value::zero() {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(AlgElem {
                    field: k.clone(),
                    rep: a,
                });
            }
        }
        m += 1;
    }
}

/// From x valued differently by two valuations over the same p, build
/// z = y^M * p^c with v_i(z) < 0 < v_j(z), where y is x or 1/x oriented so
/// that v_i(y) < v_j(y). M stretches the value gap past 1, so an integer c
/// fits strictly between -M*v_j(y) and -M*v_i(y).
fn tilt(k: &TowerField, x: &KElem, p: u64, vi: &Value, vj: &Value) -> Result<KElem> {
    let (base, bi, bj) = if vi < vj {
        (x.clone(), vi.clone(), vj.clone())
    } else {
        let inv = k
            .inv(x)
            .ok_or_else(|| Error::Internal("separating element is zero".into()))?;
        (inv, vi.neg()?, vj.neg()?)
    };
    let ai = finite_part(&bi)?;
    let aj = finite_part(&bj)?;
    let delta = &aj - &ai;
    debug_assert!(delta > rat(0));
    let m = ((rat(2) / &delta).floor().to_integer().to_i64())
        .ok_or_else(|| Error::Internal("tilt exponent overflow".into()))? as usize
        + 1;
    let t = -(&ai * rat(m as i64));
    let fl = t.floor().to_integer();
    let c = if t.is_integer() { fl - 1 } else { fl };
    let c = c
        .to_i64()
        .ok_or_else(|| Error::Internal("tilt exponent overflow".into()))?;
    Ok(k.mul(&tower_pow(k, &base, m), &k.from_rat(pow_p(p, c))))
}

/// The rational component of a finite rank-one value.
fn finite_part(v: &Value) -> Result<Rat> {
    let (a, b) = v
        .parts()
        .ok_or_else(|| Error::Internal("finite value expected".into()))?;
    if !b.is_zero() {
        return Err(Error::Internal("rank-one value expected".into()));
    }
    Ok(a.clone())
}

fn pow_p(p: u64, c: i64) -> Rat {
    let mut acc = rat(1);
    for _ in 0..c.unsigned_abs() {
        acc *= rat(p as i64);
    }
    if c < 0 {
        rat(1) / acc
    } else {
        acc
    }
}

fn tower_pow(k: &TowerField, x: &KElem, m: usize) -> KElem {
    let mut acc = k.one();
    for _ in 0..m {
        acc = k.mul(&acc, x);
    }
    acc
}

/// Deterministic stream of nonzero tower elements: integer combinations of
/// the generator monomial basis, by max-norm height.
fn tower_stream(k: &TowerField) -> impl Iterator<Item = KElem> + '_ {
    coeff_shells(k.abs_degree()).map(move |v| basis_combination(k, &v))
}

/// Combination over the monomial basis prod gen_i^{e_i} with e_i below the
/// level degree, level 1 varying fastest.
fn basis_combination(k: &TowerField, coords: &[i64]) -> KElem {
    let degs: Vec<usize> = (1..=k.depth()).map(|i| k.prefix(i).top_deg()).collect();
    let mut acc = k.zero();
    for (idx, &c) in coords.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mut rem = idx;
        let mut mono = k.from_rat(rat(c));
        for (i, d) in degs.iter().enumerate() {
            let e = rem % d;
            rem /= d;
            for _ in 0..e {
                mono = k.mul(&mono, &k.gen_at(i + 1));
            }
        }
        acc = k.add(&acc, &mono);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfields::q_poly_to_tower;

    fn cfg() -> Config {
        Config::default()
    }

    fn qp(cs: &[i64]) -> QPoly {
        Poly::from_coeffs(cs.iter().map(|&c| rat(c)).collect::<Vec<_>>()).normalized(&Rationals)
    }

    fn tp(k: &TowerField, cs: &[i64]) -> Poly<TowerField> {
        q_poly_to_tower(k, &qp(cs))
    }

    fn over_q(cs: &[i64], p: u64) -> ExtensionReport {
        let q = TowerField::q();
        extensions_of(&q, &ValHandle::PAdic(p), &tp(&q, cs), &cfg()).unwrap()
    }

    #[test]
    fn ramified_quadratic_certifies() {
        let rep = over_q(&[-2, 0, 1], 2);
        assert_eq!(rep.degree, 2);
        assert!(rep.certified());
        assert_eq!(rep.descriptors.len(), 1);
        let d = &rep.descriptors[0];
        assert_eq!((d.e, d.f), (2, 1));
        assert!(!is_immediate(d).unwrap());
    }

    #[test]
    fn split_quadratic_two_immediate() {
        let rep = over_q(&[1, 0, 1], 5);
        assert_eq!(rep.descriptors.len(), 2);
        assert!(rep.certified());
        for d in &rep.descriptors {
            assert_eq!((d.e, d.f), (1, 1));
            assert!(is_immediate(d).unwrap());
            assert!(restricts_to(d, &ValHandle::PAdic(5), &cfg()).unwrap());
        }
    }

    #[test]
    fn inert_quadratic_residue_degree_two() {
        let rep = over_q(&[1, 0, 1], 3);
        assert_eq!(rep.descriptors.len(), 1);
        let d = &rep.descriptors[0];
        assert_eq!((d.e, d.f), (1, 2));
        assert!(!is_immediate(d).unwrap());
    }

    #[test]
    fn report_json_shape() {
        let rep = over_q(&[-2, 0, 1], 2);
        let j = rep.to_json();
        assert_eq!(j["degree"], 2);
        assert_eq!(j["certified"], true);
        assert_eq!(j["extensions"][0]["e"], 2);
        assert_eq!(j["extensions"][0]["f"], 1);
        assert!(j["extensions"][0]["path"][0]["slope"].is_string());
    }

    #[test]
    fn reducible_input_rejected() {
        let q = TowerField::q();
        let err = extensions_of(&q, &ValHandle::PAdic(2), &tp(&q, &[-1, 0, 1]), &cfg())
            .unwrap_err();
        assert!(matches!(err, Error::NotIrreducible(_)));
        let err = extensions_of(&q, &ValHandle::PAdic(2), &tp(&q, &[7]), &cfg()).unwrap_err();
        assert!(matches!(err, Error::NotIrreducible(_)));
    }

    #[test]
    fn generator_value_under_ramified_extension() {
        let q = TowerField::q();
        let rep = over_q(&[-2, 0, 1], 2);
        let d = &rep.descriptors[0];
        let v = value_of_element(&tp(&q, &[0, 1]), d, &cfg()).unwrap();
        assert_eq!(v, Value::from_frac(1, 2));
        let v1 = value_of_element(&tp(&q, &[1]), d, &cfg()).unwrap();
        assert_eq!(v1, Value::zero());
    }

    #[test]
    fn slope_zero_extension_gives_unit_generator() {
        let q = TowerField::q();
        let rep = over_q(&[-6, -2, 1], 3);
        assert_eq!(rep.descriptors.len(), 2);
        let d0 = rep
            .descriptors
            .iter()
            .find(|d| d.path[0].slope == rat(0))
            .unwrap();
        let v = value_of_element(&tp(&q, &[0, 1]), d0, &cfg()).unwrap();
        assert_eq!(v, Value::zero());
        let d1 = rep
            .descriptors
            .iter()
            .find(|d| d.path[0].slope == rat(-1))
            .unwrap();
        let v = value_of_element(&tp(&q, &[0, 1]), d1, &cfg()).unwrap();
        assert_eq!(v, Value::from_i64(1));
    }

    #[test]
    fn uniformizer_index_matches_e() {
        // For e = 2 the element values generate (1/2)Z: the generator itself
        // has denominator exactly e.
        let q = TowerField::q();
        let rep = over_q(&[-2, 0, 1], 2);
        let d = &rep.descriptors[0];
        let v = value_of_element(&tp(&q, &[0, 1]), d, &cfg()).unwrap();
        let (a, _) = v.parts().map(|(a, b)| (a.clone(), b.clone())).unwrap();
        assert_eq!(a.denom().to_u64().unwrap(), d.e);
    }

    #[test]
    fn restriction_separates_siblings_on_own_field() {
        let rep = over_q(&[-6, -2, 1], 3);
        let (d0, d1) = (&rep.descriptors[0], &rep.descriptors[1]);
        assert!(restricts_to(d0, &ValHandle::Ext(Box::new(d0.clone())), &cfg()).unwrap());
        assert!(!restricts_to(d0, &ValHandle::Ext(Box::new(d1.clone())), &cfg()).unwrap());
        assert!(restricts_to(d1, &ValHandle::Ext(Box::new(d1.clone())), &cfg()).unwrap());
    }

    #[test]
    fn henselization_membership_examples() {
        assert!(henselization_membership(&qp(&[-6, -2, 1]), 3, 0, &cfg()).unwrap());
        assert!(henselization_membership(&qp(&[-6, -2, 1]), 3, 1, &cfg()).unwrap());
        assert!(!henselization_membership(&qp(&[-2, 0, 1]), 2, 0, &cfg()).unwrap());
        assert!(henselization_membership(&qp(&[-5, 1]), 7, 0, &cfg()).unwrap());
        let err = henselization_membership(&qp(&[-2, 0, 1]), 2, 1, &cfg()).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange(_)));
    }

    #[test]
    fn relative_extension_inert_step() {
        // x^2 - i over Q(i) at p = 5: one extension with (e, f) = (1, 2).
        let q = TowerField::q();
        let rep5 = over_q(&[1, 0, 1], 5);
        let ki = extend_tower(&q, "i", &tp(&q, &[1, 0, 1]), &cfg()).unwrap();
        let v = ValHandle::Ext(Box::new(rep5.descriptors[0].clone()));
        assert!(v.attaches_to(&ki));
        let g = Poly::from_coeffs(vec![ki.neg(&ki.gen()), ki.zero(), ki.one()]).normalized(&ki);
        let rep = extensions_of(&ki, &v, &g, &cfg()).unwrap();
        assert_eq!(rep.degree, 2);
        assert!(rep.certified());
        assert_eq!(rep.descriptors.len(), 1);
        assert_eq!((rep.descriptors[0].e, rep.descriptors[0].f), (1, 2));
        assert_eq!(rep.descriptors[0].abs_invariants(), (1, 2));
    }

    #[test]
    fn relative_extension_split_step() {
        // x^2 - 2 over Q(i) at p = 7 (inert below): two extensions, each
        // immediate relative to the base.
        let q = TowerField::q();
        let rep7 = over_q(&[1, 0, 1], 7);
        assert_eq!(rep7.descriptors.len(), 1);
        let ki = extend_tower(&q, "i", &tp(&q, &[1, 0, 1]), &cfg()).unwrap();
        let v = ValHandle::Ext(Box::new(rep7.descriptors[0].clone()));
        let rep = extensions_of(&ki, &v, &tp(&ki, &[-2, 0, 1]), &cfg()).unwrap();
        assert!(rep.certified());
        assert_eq!(rep.descriptors.len(), 2);
        for d in &rep.descriptors {
            assert_eq!((d.e, d.f), (1, 1));
            assert!(is_immediate(d).unwrap());
            assert_eq!(d.abs_invariants(), (1, 2));
        }
    }

    #[test]
    fn compositum_same_field_distinct_valuations() {
        let rep = over_q(&[1, 0, 1], 5);
        let (u1, u2) = (&rep.descriptors[0], &rep.descriptors[1]);
        assert!(common_extension_exists(u1, u1, &cfg()).unwrap());
        assert!(!common_extension_exists(u1, u2, &cfg()).unwrap());
    }

    #[test]
    fn compositum_disjoint_fields() {
        let u = over_q(&[1, 0, 1], 5).descriptors[0].clone();
        let w_rep = over_q(&[-2, 0, 1], 5);
        assert_eq!(w_rep.descriptors.len(), 1);
        assert!(common_extension_exists(&u, &w_rep.descriptors[0], &cfg()).unwrap());
    }

    #[test]
    fn weak_approximation_crt_on_q() {
        let a = weak_approximation_q(&[2, 3], &[rat(1), rat(0)]).unwrap();
        assert_eq!(a, rat(3));
        let err = weak_approximation_q(&[2, 2], &[rat(1), rat(0)]).unwrap_err();
        assert!(matches!(err, Error::DuplicateValuations(_)));
    }

    #[test]
    fn weak_approximation_handles_on_q() {
        let q = TowerField::q();
        let handles = vec![ValHandle::PAdic(2), ValHandle::PAdic(3)];
        let targets = vec![
            AlgElem {
                field: q.clone(),
                rep: q.from_rat(rat(1)),
            },
            AlgElem {
                field: q.clone(),
                rep: q.from_rat(rat(0)),
            },
        ];
        let a = weak_approximation(&handles, &targets, &cfg()).unwrap();
        assert_eq!(TowerField::expect_rat(&a.rep), &rat(3));

        let single = weak_approximation(&handles[..1], &targets[..1], &cfg()).unwrap();
        assert_eq!(TowerField::expect_rat(&single.rep), &rat(1));
    }

    #[test]
    fn weak_approximation_on_tower() {
        let q = TowerField::q();
        let rep = over_q(&[1, 0, 1], 5);
        let ki = extend_tower(&q, "i", &tp(&q, &[1, 0, 1]), &cfg()).unwrap();
        let handles: Vec<ValHandle> = rep
            .descriptors
            .iter()
            .map(|d| ValHandle::Ext(Box::new(d.clone())))
            .collect();
        let targets = vec![
            AlgElem {
                field: ki.clone(),
                rep: ki.gen(),
            },
            AlgElem {
                field: ki.clone(),
                rep: ki.zero(),
            },
        ];
        let a = weak_approximation(&handles, &targets, &cfg()).unwrap();
        for (h, t) in handles.iter().zip(&targets) {
            let va = h.value_of(&ki, &a.rep, &cfg()).unwrap();
            assert!(va >= Value::zero());
            let diff = ki.add(&a.rep, &ki.neg(&t.rep));
            let vd = h.value_of(&ki, &diff, &cfg()).unwrap();
            assert!(vd > Value::zero());
        }
    }

    #[test]
    fn weak_approximation_rejects_duplicate_descriptors() {
        let q = TowerField::q();
        let rep = over_q(&[1, 0, 1], 5);
        let ki = extend_tower(&q, "i", &tp(&q, &[1, 0, 1]), &cfg()).unwrap();
        let d = ValHandle::Ext(Box::new(rep.descriptors[0].clone()));
        let targets = vec![
            AlgElem {
                field: ki.clone(),
                rep: ki.zero(),
            };
            2
        ];
        let err = weak_approximation(&[d.clone(), d], &targets, &cfg()).unwrap_err();
        assert!(matches!(err, Error::DuplicateValuations(_)));
    }

    #[test]
    fn batch_matches_sequential() {
        let q = TowerField::q();
        let gs = vec![tp(&q, &[-2, 0, 1]), tp(&q, &[1, 0, 1]), tp(&q, &[-6, -2, 1])];
        let batch = extensions_of_batch(&q, &ValHandle::PAdic(3), &gs, &cfg());
        for (g, r) in gs.iter().zip(batch) {
            let direct = extensions_of(&q, &ValHandle::PAdic(3), g, &cfg()).unwrap();
            let r = r.unwrap();
            assert_eq!(r.degree, direct.degree);
            assert_eq!(r.descriptors.len(), direct.descriptors.len());
            for (a, b) in r.descriptors.iter().zip(&direct.descriptors) {
                assert_eq!((a.e, a.f), (b.e, b.f));
                assert_eq!(a.path, b.path);
            }
        }
    }

    #[test]
    fn separating_family_is_small_and_total() {
        let oracle = RestrictionOracle::build(&qp(&[1, 0, 1]), 5, &cfg()).unwrap();
        assert_eq!(oracle.leaves.len(), 2);
        assert!(!oracle.family.is_empty());
        // Re-identify each leaf by its own values.
        for (i, leaf) in oracle.leaves.iter().enumerate() {
            let got = oracle
                .identify(|xq| maclane::leaf_value_of(leaf, xq, &cfg()))
                .unwrap();
            assert_eq!(got, i);
        }
    }

    #[test]
    fn handle_attachment_is_structural() {
        let q = TowerField::q();
        let rep = over_q(&[1, 0, 1], 5);
        let d = &rep.descriptors[0];
        let ki = extend_tower(&q, "i", &tp(&q, &[1, 0, 1]), &cfg()).unwrap();
        let kj = extend_tower(&q, "j", &tp(&q, &[1, 0, 1]), &cfg()).unwrap();
        assert!(d.is_home(&ki));
        assert!(d.is_home(&kj));
        let ks = extend_tower(&q, "s", &tp(&q, &[-2, 0, 1]), &cfg()).unwrap();
        assert!(!d.is_home(&ks));
    }
}
