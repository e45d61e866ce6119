//! p-adic valuations on Q and Newton polygons. The polygon convention is
//! fixed here once: a segment of slope s and horizontal length l corresponds
//! to exactly l roots of valuation -s in any valued extension.
//!
//! The descriptor-dependent operations (element values under a chosen
//! extension, weak approximation) live in `extensions`, next to the
//! machinery that certifies descriptors.

use crate::error::{Error, Result};
use crate::exact::field::Rationals;
use crate::exact::poly::Poly;
use crate::exact::rat::{self, Rat};
use crate::value::Value;

/// Lower convex hull segments of (i, v(a_i)); slopes strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonPolygon {
    pub segments: Vec<Segment>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub slope: Rat,
    /// Horizontal length (a positive integer).
    pub len: usize,
    /// Index of the segment's left endpoint.
    pub start: usize,
}

/// Exact p-adic valuation of a rational; v(0) = INFINITY.
pub fn vp_rational(x: &Rat, p: u64) -> Result<Value> {
    rat::require_prime(p)?;
    Ok(match rat::vp(x, p) {
        None => Value::Infinity,
        Some(v) => Value::from_i64(v),
    })
}

/// Lower hull of the finite points (i, val_i); None entries mark infinite
/// values (zero coefficients) and are skipped.
pub fn lower_hull(points: &[(usize, Option<Rat>)]) -> Vec<Segment> {
    let finite: Vec<(usize, Rat)> = points
        .iter()
        .filter_map(|(i, v)| v.clone().map(|v| (*i, v)))
        .collect();
    assert!(!finite.is_empty(), "hull of no finite points");
    let mut hull: Vec<(usize, Rat)> = vec![];
    for (x, y) in finite {
        while hull.len() >= 2 {
            let (ax, ay) = &hull[hull.len() - 2];
            let (bx, by) = &hull[hull.len() - 1];
            // Pop b when it is on or above the segment a -> (x, y).
            let lhs = Rat::from_integer(((bx - ax) as i64).into()) * (&y - by);
            let rhs = (by - ay) * Rat::from_integer(((x - bx) as i64).into());
            if lhs <= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    hull.windows(2)
        .map(|w| {
            let (i, v) = &w[0];
            let (j, u) = &w[1];
            Segment {
                slope: (u - v) / Rat::from_integer(((j - i) as i64).into()),
                len: j - i,
                start: *i,
            }
        })
        .collect()
}

/// Newton polygon of a rational polynomial under v_p.
pub fn newton_polygon_q(f: &Poly<Rationals>, p: u64) -> Result<NewtonPolygon> {
    rat::require_prime(p)?;
    if f.is_zero() {
        return Err(Error::ZeroPoly("newton polygon of zero polynomial".into()));
    }
    let points: Vec<(usize, Option<Rat>)> = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| (i, rat::vp(c, p).map(rat::rat)))
        .collect();
    Ok(NewtonPolygon {
        segments: lower_hull(&points),
    })
}

impl NewtonPolygon {
    /// Total horizontal length: deg(f) minus the order of vanishing at 0.
    pub fn width(&self) -> usize {
        self.segments.iter().map(|s| s.len).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "segments": self
                .segments
                .iter()
                .map(|s| serde_json::json!({
                    "slope": rat::fmt_rat(&s.slope),
                    "length": s.len,
                }))
                .collect::<Vec<_>>(),
        })
    }
}

/// A p-adic number carried as unit * p^shift, with the unit known modulo
/// p^N; the absolute precision is p^(shift + N). The unit is reduced and
/// coprime to p unless the represented value is exactly 0.
#[derive(Clone, Debug, PartialEq)]
pub struct PadicApprox {
    pub p: u64,
    pub unit: num_bigint::BigInt,
    pub shift: i64,
    pub n: u32,
}

impl PadicApprox {
    /// The represented rational unit * p^shift (center of the ball).
    pub fn value(&self) -> Rat {
        let mut acc = Rat::from_integer(self.unit.clone());
        let p = rat::rat(self.p as i64);
        for _ in 0..self.shift.unsigned_abs() {
            if self.shift >= 0 {
                acc = acc * &p;
            } else {
                acc = acc / &p;
            }
        }
        acc
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "shift": self.shift,
            "unit": self.unit.to_string(),
            "N": self.n,
        })
    }
}

pub use crate::extensions::{value_of_element, weak_approximation, weak_approximation_q};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::{rat, rat_frac};

    fn qp(cs: &[i64]) -> Poly<Rationals> {
        Poly::from_coeffs(cs.iter().map(|&c| rat(c)).collect())
    }

    #[test]
    fn vp_handles_zero_and_rejects_composites() {
        assert_eq!(vp_rational(&rat(0), 5).unwrap(), Value::Infinity);
        assert_eq!(vp_rational(&rat_frac(9, 2), 3).unwrap(), Value::from_i64(2));
        assert!(matches!(
            vp_rational(&rat(1), 6),
            Err(Error::NotPrime(_))
        ));
    }

    #[test]
    fn polygon_of_shifted_square() {
        // x^2 - 2x - 6 at p=3: points (0,1), (1,0), (2,0).
        let np = newton_polygon_q(&qp(&[-6, -2, 1]), 3).unwrap();
        assert_eq!(
            np.segments,
            vec![
                Segment { slope: rat(-1), len: 1, start: 0 },
                Segment { slope: rat(0), len: 1, start: 1 },
            ]
        );
    }

    #[test]
    fn polygon_of_x2_minus_2_dyadic() {
        let np = newton_polygon_q(&qp(&[-2, 0, 1]), 2).unwrap();
        assert_eq!(
            np.segments,
            vec![Segment { slope: rat_frac(-1, 2), len: 2, start: 0 }]
        );
    }

    #[test]
    fn polygon_of_linear() {
        let np = newton_polygon_q(&qp(&[-1, 1]), 7).unwrap();
        assert_eq!(np.segments, vec![Segment { slope: rat(0), len: 1, start: 0 }]);
        assert_eq!(np.width(), 1);
    }

    #[test]
    fn vanishing_at_zero_shortens_width() {
        // x^3 + 2x = x (x^2 + 2): points at 1 and 3 only, p=2.
        let np = newton_polygon_q(&qp(&[0, 2, 0, 1]), 2).unwrap();
        assert_eq!(np.width(), 2);
        assert_eq!(np.segments[0].start, 1);
    }

    #[test]
    fn slope_sum_identity() {
        // Sum over segments of len * (-slope) = v(a_0) - v(a_n) when a_0 != 0.
        for (poly, p) in [(qp(&[-6, -2, 1]), 3), (qp(&[-2, 0, 1]), 2), (qp(&[12, 0, 4, 0, 1]), 2)] {
            let np = newton_polygon_q(&poly, p).unwrap();
            let lhs: Rat = np
                .segments
                .iter()
                .map(|s| -&s.slope * rat(s.len as i64))
                .sum();
            let v0 = rat(rat::vp(&poly.coeffs[0], p).unwrap());
            let vn = rat(rat::vp(poly.lc(), p).unwrap());
            assert_eq!(lhs, v0 - vn);
        }
    }
}
