//! Towers Q(a_1, ..., a_k): each level adjoins a root of a monic polynomial
//! over the level below. Elements are nested polynomial representatives,
//! fully reduced and zero-padded to fixed length at every level, so
//! structural equality is field equality.
//!
//! Construction here checks shape only (monic, degrees, depth, names);
//! irreducibility of each level is certified by the factorization routines
//! in `numberfields`, which own the public tower-building entry points.

use std::sync::Arc;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::exact::field::{Field, Rationals};
use crate::exact::poly::Poly;
use crate::exact::rat::{fmt_rat, Rat};

/// One adjunction step: `minpoly` is monic with coefficients in the field
/// below (canonical at depth `level - 1`), length deg + 1.
#[derive(Clone, Debug, PartialEq)]
pub struct TowerLevel {
    pub name: String,
    pub minpoly: Vec<KElem>,
}

impl TowerLevel {
    pub fn deg(&self) -> usize {
        self.minpoly.len() - 1
    }
}

/// Element representative. `Rat` lives at depth 0; `Alg` at depth k holds
/// exactly deg_k coefficients, each canonical at depth k-1.
#[derive(Clone, Debug, PartialEq)]
pub enum KElem {
    Rat(Rat),
    Alg(Vec<KElem>),
}

/// The full tower; level 0 (Q) is implicit.
#[derive(Debug, PartialEq)]
pub struct FieldTower {
    pub levels: Vec<TowerLevel>,
}

/// A field in the tower: the subfield generated by the first `depth` levels.
/// Cheap to clone; this is the ring object all polynomial code works over.
#[derive(Clone)]
pub struct TowerField {
    tower: Arc<FieldTower>,
    depth: usize,
}

impl std::fmt::Debug for TowerField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Q(")?;
        for (i, l) in self.tower.levels[..self.depth].iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", l.name)?;
        }
        write!(f, ")")
    }
}

impl PartialEq for TowerField {
    fn eq(&self, other: &Self) -> bool {
        self.depth == other.depth
            && self.tower.levels[..self.depth] == other.tower.levels[..other.depth]
    }
}

/// An element together with the field it lives in.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgElem {
    pub field: TowerField,
    pub rep: KElem,
}

impl TowerField {
    /// The rationals as the trivial tower.
    pub fn q() -> TowerField {
        TowerField {
            tower: Arc::new(FieldTower { levels: vec![] }),
            depth: 0,
        }
    }

    pub fn from_tower(t: Arc<FieldTower>) -> TowerField {
        let depth = t.levels.len();
        TowerField { tower: t, depth }
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_q(&self) -> bool {
        self.depth == 0
    }

    /// The field one level down. Depth must be >= 1.
    pub fn sub(&self) -> TowerField {
        assert!(self.depth >= 1);
        TowerField {
            tower: self.tower.clone(),
            depth: self.depth - 1,
        }
    }

    /// The subfield generated by the first `d` levels.
    pub fn prefix(&self, d: usize) -> TowerField {
        assert!(d <= self.depth);
        TowerField {
            tower: self.tower.clone(),
            depth: d,
        }
    }

    /// Whether `other` is a prefix of this field's tower.
    pub fn has_prefix(&self, other: &TowerField) -> bool {
        other.depth <= self.depth
            && self.tower.levels[..other.depth] == other.tower.levels[..other.depth]
    }

    pub fn top_level(&self) -> &TowerLevel {
        assert!(self.depth >= 1, "Q has no top level");
        &self.tower.levels[self.depth - 1]
    }

    /// Degree of the top step [self : sub()].
    pub fn top_deg(&self) -> usize {
        self.top_level().deg()
    }

    /// Absolute degree [self : Q].
    pub fn abs_degree(&self) -> usize {
        self.tower.levels[..self.depth]
            .iter()
            .map(|l| l.deg())
            .product()
    }

    /// Minimal polynomial of the top generator as a Poly over the subfield.
    pub fn top_minpoly(&self) -> Poly<TowerField> {
        Poly::from_coeffs(self.top_level().minpoly.clone())
    }

    /// The top generator as an element of this field.
    pub fn gen(&self) -> KElem {
        let sub = self.sub();
        let mut coeffs = vec![sub.zero(); self.top_deg()];
        if self.top_deg() == 1 {
            // a = -c_0 for minpoly x + c_0.
            coeffs[0] = sub.neg(&self.top_level().minpoly[0]);
        } else {
            coeffs[1] = sub.one();
        }
        KElem::Alg(coeffs)
    }

    /// Generator of level `i` (1-based) as an element of this field.
    pub fn gen_at(&self, i: usize) -> KElem {
        assert!(i >= 1 && i <= self.depth);
        let g = self.prefix(i).gen();
        self.lift_from(i, &g)
    }

    /// Lift an element canonical at depth `d` up to this field's depth.
    pub fn lift_from(&self, d: usize, a: &KElem) -> KElem {
        assert!(d <= self.depth);
        let mut cur = a.clone();
        for lvl in d..self.depth {
            let f = self.prefix(lvl + 1);
            let mut coeffs = vec![f.sub().zero(); f.top_deg()];
            coeffs[0] = cur;
            cur = KElem::Alg(coeffs);
        }
        cur
    }

    /// Lift a rational all the way up.
    pub fn from_rat(&self, x: Rat) -> KElem {
        self.lift_from(0, &KElem::Rat(x))
    }

    /// Coefficients of a top-level element over the subfield (low to high,
    /// exactly top_deg entries). Depth must be >= 1.
    pub fn coeffs_in_sub(&self, a: &KElem) -> Vec<KElem> {
        assert!(self.depth >= 1);
        match a {
            KElem::Alg(cs) => {
                debug_assert_eq!(cs.len(), self.top_deg());
                cs.clone()
            }
            KElem::Rat(_) => panic!("element not canonical at depth {}", self.depth),
        }
    }

    /// The rational value of a depth-0 element.
    pub fn expect_rat(a: &KElem) -> &Rat {
        match a {
            KElem::Rat(r) => r,
            KElem::Alg(_) => panic!("element not canonical at depth 0"),
        }
    }

    fn pad(&self, mut coeffs: Vec<KElem>) -> KElem {
        let d = self.top_deg();
        debug_assert!(coeffs.len() <= d);
        let sub = self.sub();
        while coeffs.len() < d {
            coeffs.push(sub.zero());
        }
        KElem::Alg(coeffs)
    }

    fn reduce(&self, p: Poly<TowerField>) -> KElem {
        let sub = self.sub();
        let r = p.rem(&sub, &self.top_minpoly());
        self.pad(r.coeffs)
    }

    fn as_poly(&self, a: &KElem) -> Poly<TowerField> {
        Poly::from_coeffs(self.coeffs_in_sub(a)).normalized(&self.sub())
    }

    /// Human-readable form using the tower's generator names.
    pub fn format_elem(&self, a: &KElem) -> String {
        match a {
            KElem::Rat(r) => fmt_rat(r),
            KElem::Alg(cs) => {
                let sub = self.sub();
                let name = &self.top_level().name;
                let mut parts = vec![];
                for (i, c) in cs.iter().enumerate() {
                    if sub.is_zero(c) {
                        continue;
                    }
                    let cs_str = sub.format_elem(c);
                    let part = match i {
                        0 => cs_str,
                        _ => {
                            let pow = if i == 1 {
                                name.clone()
                            } else {
                                format!("{name}^{i}")
                            };
                            if cs_str == "1" {
                                pow
                            } else if cs_str.contains(['+', '-'])
                                && !cs_str.starts_with('-')
                            {
                                format!("({cs_str})*{pow}")
                            } else if cs_str.starts_with('-') && cs_str[1..].contains(['+', '-']) {
                                format!("({cs_str})*{pow}")
                            } else {
                                format!("{cs_str}*{pow}")
                            }
                        }
                    };
                    parts.push(part);
                }
                if parts.is_empty() {
                    "0".into()
                } else {
                    parts.join(" + ")
                }
            }
        }
    }
}

impl Field for TowerField {
    type Elem = KElem;

    fn zero(&self) -> KElem {
        if self.depth == 0 {
            KElem::Rat(Rationals.zero())
        } else {
            let sub = self.sub();
            KElem::Alg(vec![sub.zero(); self.top_deg()])
        }
    }

    fn one(&self) -> KElem {
        self.from_rat(Rationals.one())
    }

    fn is_zero(&self, a: &KElem) -> bool {
        match a {
            KElem::Rat(r) => Rationals.is_zero(r),
            KElem::Alg(cs) => {
                let sub = self.sub();
                cs.iter().all(|c| sub.is_zero(c))
            }
        }
    }

    fn add(&self, a: &KElem, b: &KElem) -> KElem {
        match (a, b) {
            (KElem::Rat(x), KElem::Rat(y)) => KElem::Rat(x + y),
            (KElem::Alg(xs), KElem::Alg(ys)) => {
                let sub = self.sub();
                KElem::Alg(
                    xs.iter()
                        .zip(ys.iter())
                        .map(|(x, y)| sub.add(x, y))
                        .collect(),
                )
            }
            _ => panic!("mixed-depth elements"),
        }
    }

    fn neg(&self, a: &KElem) -> KElem {
        match a {
            KElem::Rat(x) => KElem::Rat(-x),
            KElem::Alg(xs) => {
                let sub = self.sub();
                KElem::Alg(xs.iter().map(|x| sub.neg(x)).collect())
            }
        }
    }

    fn mul(&self, a: &KElem, b: &KElem) -> KElem {
        match (a, b) {
            (KElem::Rat(x), KElem::Rat(y)) => KElem::Rat(x * y),
            (KElem::Alg(_), KElem::Alg(_)) => {
                let sub = self.sub();
                let p = Poly::mul(&sub, &self.as_poly(a), &self.as_poly(b));
                self.reduce(p)
            }
            _ => panic!("mixed-depth elements"),
        }
    }

    fn inv(&self, a: &KElem) -> Option<KElem> {
        if self.is_zero(a) {
            return None;
        }
        match a {
            KElem::Rat(x) => Some(KElem::Rat(x.recip())),
            KElem::Alg(_) => {
                let sub = self.sub();
                // Minpoly irreducible => gcd with any nonzero smaller-degree
                // polynomial is 1, so s*a = 1 mod minpoly.
                let (g, s, _) = Poly::xgcd(&sub, &self.as_poly(a), &self.top_minpoly());
                debug_assert_eq!(g.deg(), Some(0), "non-invertible: tower minpoly reducible?");
                let ginv = sub.inv(&g.coeffs[0]).unwrap();
                Some(self.reduce(s.scale(&sub, &ginv)))
            }
        }
    }

    fn from_i64(&self, n: i64) -> KElem {
        self.from_rat(Rationals.from_i64(n))
    }

    fn cmp_elems(&self, a: &KElem, b: &KElem) -> std::cmp::Ordering {
        match (a, b) {
            (KElem::Rat(x), KElem::Rat(y)) => x.cmp(y),
            (KElem::Alg(xs), KElem::Alg(ys)) => {
                let sub = self.sub();
                for (x, y) in xs.iter().rev().zip(ys.iter().rev()) {
                    match sub.cmp_elems(x, y) {
                        std::cmp::Ordering::Equal => {}
                        o => return o,
                    }
                }
                std::cmp::Ordering::Equal
            }
            _ => panic!("mixed-depth elements"),
        }
    }
}

/// Structural validation and extension. Does not test irreducibility; the
/// public builders in `numberfields` do and must be used for untrusted input.
pub fn extend_structural(
    base: &TowerField,
    name: &str,
    minpoly: Poly<TowerField>,
    config: &Config,
) -> Result<TowerField> {
    if base.depth + 1 > config.tower_depth_max {
        return Err(Error::TowerDepth(format!(
            "tower depth {} exceeds bound {}",
            base.depth + 1,
            config.tower_depth_max
        )));
    }
    if minpoly.is_zero() || minpoly.degree() == 0 {
        return Err(Error::ZeroPoly("level minimal polynomial must be nonconstant".into()));
    }
    if !minpoly.is_monic(base) {
        return Err(Error::NotIrreducible(
            "level minimal polynomial must be monic".into(),
        ));
    }
    if name.is_empty() || name == "x" {
        return Err(Error::DomainMismatch(format!(
            "generator name {name:?} is reserved"
        )));
    }
    if base.tower.levels[..base.depth]
        .iter()
        .any(|l| l.name == name)
    {
        return Err(Error::DomainMismatch(format!(
            "generator name {name:?} already used"
        )));
    }
    let deg = minpoly.degree();
    if base.abs_degree() * deg > config.degree_max {
        return Err(Error::DegreeBound(format!(
            "absolute degree {} exceeds bound {}",
            base.abs_degree() * deg,
            config.degree_max
        )));
    }
    let mut coeffs = minpoly.coeffs;
    while coeffs.len() < deg + 1 {
        coeffs.push(base.zero());
    }
    let mut levels = base.tower.levels[..base.depth].to_vec();
    levels.push(TowerLevel {
        name: name.to_string(),
        minpoly: coeffs,
    });
    Ok(TowerField::from_tower(Arc::new(FieldTower { levels })))
}
