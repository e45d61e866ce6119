//! Hensel lifting over (Q, v_p) by Newton iteration in exact integer
//! arithmetic, plus the shape-and-irreducibility test for monic polynomials
//! whose membership certifies the underlying valued field non-Henselian.
//!
//! A lift runs modulo p^(N + k0) where k0 = v(f'(seed)). Each Newton step
//! divides by f'(b), which costs exactly k0 powers of p, so the working
//! modulus keeps k0 digits of slack above the target precision N. Inside
//! the ball v(b - seed) > k0 the derivative keeps valuation k0, so that
//! division is always by p^k0 times a unit.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::batch::map_batch;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::exact::field::Rationals;
use crate::exact::poly::Poly;
use crate::exact::rat::{int_padic, require_prime, vp, Rat};
use crate::extensions::ValHandle;
use crate::numberfields::is_irreducible_over;
use crate::tower::TowerField;
use crate::valuation::PadicApprox;
use crate::value::Value;

type QPoly = Poly<Rationals>;

/// One lifting instance over (Q, v_p): refine `seed` into a root of `f`
/// modulo p^n. Coefficients and seed must lie in Z localized at p.
#[derive(Clone, Debug)]
pub struct HenselProblem {
    pub f: QPoly,
    pub seed: Rat,
    pub p: u64,
    /// Target precision: the answer is a root of f modulo p^n.
    pub n: u32,
}

/// Newton-lift `prob.seed` to a root of `prob.f` modulo p^n.
///
/// Requires v(f(seed)) > 2 v(f'(seed)) with the latter finite. The answer
/// is the unique root b with v(b - seed) > v(f'(seed)), reported to
/// absolute precision p^n.
pub fn hensel_lift(prob: &HenselProblem, config: &Config) -> Result<PadicApprox> {
    hensel_lift_traced(prob, config).map(|(b, _)| b)
}

/// Like [`hensel_lift`], also returning the defect trace: v(f(b_k)) for
/// each iterate whose defect is measurable inside the working modulus, in
/// iteration order. Consecutive entries obey
/// trace[k+1] >= 2 trace[k] - 2 v(f'(seed)).
pub fn hensel_lift_traced(
    prob: &HenselProblem,
    config: &Config,
) -> Result<(PadicApprox, Vec<i64>)> {
    require_prime(prob.p)?;
    if prob.n == 0 {
        return Err(Error::DomainMismatch(
            "target precision must be at least 1".into(),
        ));
    }
    if prob.n > config.hensel_cap {
        return Err(Error::PrecisionOverflow(format!(
            "target precision {} exceeds the cap {}",
            prob.n, config.hensel_cap
        )));
    }
    let q = Rationals;
    let f = prob.f.clone().normalized(&q);
    if let Some(deg) = f.deg() {
        for i in 0..=deg {
            let c = f.coeff(&q, i);
            if vp(&c, prob.p).map_or(false, |v| v < 0) {
                return Err(Error::NotIntegral(format!(
                    "coefficient of x^{} has negative valuation",
                    i
                )));
            }
        }
    }
    if vp(&prob.seed, prob.p).map_or(false, |v| v < 0) {
        return Err(Error::NotIntegral(
            "seed has negative valuation".into(),
        ));
    }

    let df = f.derivative(&q);
    let dfs = df.eval(&q, &prob.seed);
    let k0 = match vp(&dfs, prob.p) {
        Some(v) => v,
        None => {
            return Err(Error::HenselPrecondition(
                "v(f'(seed)) is infinite".into(),
            ))
        }
    };
    debug_assert!(k0 >= 0);
    let fs = f.eval(&q, &prob.seed);
    match vp(&fs, prob.p) {
        Some(d0) if d0 <= 2 * k0 => {
            return Err(Error::HenselPrecondition(format!(
                "need v(f(seed)) > 2 v(f'(seed)), got {} <= 2 * {}",
                d0, k0
            )));
        }
        Some(_) => {}
        // The seed is already an exact root; report it at the asked
        // precision. Exact knowledge makes the precision claim valid even
        // though shift + N then exceeds n for seeds divisible by p.
        None => return Ok((approx_from_exact(&prob.seed, prob.p, prob.n)?, Vec::new())),
    }
    if k0 as u64 > u64::from(config.hensel_cap) {
        return Err(Error::PrecisionOverflow(format!(
            "working precision {} + {} exceeds the cap {}",
            prob.n, k0, config.hensel_cap
        )));
    }

    let n_i64 = i64::from(prob.n);
    let w = n_i64 + k0;
    let m = pow_big(prob.p, w as u64);
    let coeffs = int_coeffs_mod(&f, &m)?;
    let dcoeffs = int_coeffs_mod(&df, &m)?;
    let pk = pow_big(prob.p, k0 as u64);
    let mut b = rat_mod(&prob.seed, &m)?;
    let mut trace = Vec::new();
    // Each step at least doubles the defect's margin over 2 k0, so n
    // iterations always reach the target; the fuel guard only trips on a
    // logic error.
    let mut fuel = n_i64 + 4;
    loop {
        let fb = eval_mod(&coeffs, &b, &m);
        if fb.is_zero() {
            break;
        }
        let d = int_padic(&fb, prob.p);
        trace.push(d);
        if d >= n_i64 {
            break;
        }
        fuel -= 1;
        if fuel < 0 {
            return Err(Error::Internal(
                "newton iteration failed to converge".into(),
            ));
        }
        let dfb = eval_mod(&dcoeffs, &b, &m);
        if dfb.is_zero() || int_padic(&dfb, prob.p) != k0 {
            return Err(Error::Internal(
                "derivative valuation drifted out of the ball".into(),
            ));
        }
        let inv = inv_mod(&(&dfb / &pk), &m)?;
        // v(t) = d - k0 > k0 keeps the iterate inside the uniqueness ball.
        let t = (&fb / &pk) * inv;
        b = (b - t).mod_floor(&m);
    }

    // Certify the output rather than trust the loop.
    let mn = pow_big(prob.p, u64::from(prob.n));
    let bn = b.mod_floor(&mn);
    if !eval_mod(&coeffs, &bn, &mn).is_zero() {
        return Err(Error::Internal("lift fails its own congruence".into()));
    }
    let drift = Rat::from_integer(b) - &prob.seed;
    if !drift.is_zero() {
        match vp(&drift, prob.p) {
            Some(v) if v > k0 => {}
            _ => return Err(Error::Internal("lift left its uniqueness ball".into())),
        }
    }
    Ok((normalize_mod(&bn, prob.p, prob.n), trace))
}

/// Lift a simple residue root: when f(abar) = 0 and f'(abar) != 0 modulo p
/// there is a unique root of f congruent to abar, reported modulo p^n.
pub fn hensel_simple_root(
    f: &QPoly,
    abar: u64,
    p: u64,
    n: u32,
    config: &Config,
) -> Result<PadicApprox> {
    require_prime(p)?;
    if n == 0 {
        return Err(Error::DomainMismatch(
            "target precision must be at least 1".into(),
        ));
    }
    if n > config.hensel_cap {
        return Err(Error::PrecisionOverflow(format!(
            "target precision {} exceeds the cap {}",
            n, config.hensel_cap
        )));
    }
    let q = Rationals;
    let f = f.clone().normalized(&q);
    let deg = match f.deg() {
        Some(d) if d >= 1 => d,
        _ => {
            return Err(Error::NotSimpleRoot(
                "a constant polynomial has no simple roots".into(),
            ))
        }
    };
    for i in 0..=deg {
        let c = f.coeff(&q, i);
        if vp(&c, p).map_or(false, |v| v < 0) {
            return Err(Error::NotIntegral(format!(
                "coefficient of x^{} has negative valuation",
                i
            )));
        }
    }
    let a = abar % p;
    let mp = BigInt::from(p);
    let ab = BigInt::from(a);
    let f0 = eval_mod(&int_coeffs_mod(&f, &mp)?, &ab, &mp);
    let d0 = eval_mod(&int_coeffs_mod(&f.derivative(&q), &mp)?, &ab, &mp);
    if !f0.is_zero() || d0.is_zero() {
        return Err(Error::NotSimpleRoot(format!(
            "residue {} is not a simple root modulo {}",
            a, p
        )));
    }
    // v(f(a)) >= 1 > 0 = 2 v(f'(a)), so the lift precondition holds.
    let prob = HenselProblem {
        f,
        seed: Rat::from_integer(ab),
        p,
        n,
    };
    hensel_lift(&prob, config)
}

/// Answer of [`hensel_set_membership`]: a negative verdict carries the
/// first failed condition, a positive one says whether it doubles as a
/// non-Henselian witness.
#[derive(Clone, Debug, PartialEq)]
pub struct HenselSetAnswer {
    pub member: bool,
    pub reason: Option<String>,
    /// Set when a member has degree >= 2: a Henselian field would hand such
    /// a polynomial a root, contradicting its irreducibility.
    pub witnesses_non_henselian: bool,
}

impl HenselSetAnswer {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "member": self.member,
            "reason": self.reason,
            "witnesses_non_henselian": self.witnesses_non_henselian,
        })
    }

    fn no(reason: String) -> HenselSetAnswer {
        HenselSetAnswer {
            member: false,
            reason: Some(reason),
            witnesses_non_henselian: false,
        }
    }
}

/// Decide whether monic f = x^n + a_{n-1} x^{n-1} + ... + a_0 over (K, v)
/// is irreducible with v(a_{n-1}) = 0 and v(a_i) > 0 for all i < n-1.
///
/// Shape failures are answers, not errors; only coefficients outside the
/// valuation ring put the input beyond the operation's domain.
pub fn hensel_set_membership(
    k: &TowerField,
    v: &ValHandle,
    f: &Poly<TowerField>,
    config: &Config,
) -> Result<HenselSetAnswer> {
    if !v.attaches_to(k) {
        return Err(Error::DomainMismatch(
            "the valuation handle does not live on the given tower".into(),
        ));
    }
    let f = f.clone().normalized(k);
    let n = match f.deg() {
        Some(n) if n >= 1 && f.is_monic(k) => n,
        _ => {
            return Err(Error::DomainMismatch(
                "membership is defined for monic nonconstant polynomials".into(),
            ))
        }
    };
    let zero = Value::zero();
    let mut vals = Vec::with_capacity(n);
    for i in 0..n {
        let val = v.value_of(k, &f.coeff(k, i), config)?;
        if val < zero {
            return Err(Error::NotIntegral(format!(
                "coefficient a_{} has negative value",
                i
            )));
        }
        vals.push(val);
    }
    if vals[n - 1] != zero {
        return Ok(HenselSetAnswer::no(format!("shape: v(a_{}) > 0", n - 1)));
    }
    for (i, val) in vals.iter().take(n - 1).enumerate() {
        if *val == zero {
            return Ok(HenselSetAnswer::no(format!("shape: v(a_{}) = 0", i)));
        }
    }
    if !is_irreducible_over(k, &f, config)? {
        return Ok(HenselSetAnswer::no("reducible".into()));
    }
    Ok(HenselSetAnswer {
        member: true,
        reason: None,
        witnesses_non_henselian: n >= 2,
    })
}

/// Lift a batch of independent problems, in parallel when the `parallel`
/// feature is enabled.
pub fn hensel_lift_batch(
    problems: &[HenselProblem],
    config: &Config,
) -> Vec<Result<PadicApprox>> {
    map_batch(problems, |prob| hensel_lift(prob, config))
}

/// unit * p^shift for an exactly known root; the unit is reduced mod p^n.
fn approx_from_exact(x: &Rat, p: u64, n: u32) -> Result<PadicApprox> {
    if x.is_zero() {
        return Ok(PadicApprox {
            p,
            unit: BigInt::zero(),
            shift: 0,
            n,
        });
    }
    let s = match vp(x, p) {
        Some(s) => s,
        None => return Err(Error::Internal("nonzero rational with infinite valuation".into())),
    };
    debug_assert!(s >= 0);
    let ps = Rat::from_integer(pow_big(p, s as u64));
    let unit = rat_mod(&(x / &ps), &pow_big(p, u64::from(n)))?;
    Ok(PadicApprox { p, unit, shift: s, n })
}

/// Split a residue class mod p^n into unit * p^shift with the unit known
/// mod p^(n - shift); the class of 0 stays as unit 0 at full precision.
fn normalize_mod(bn: &BigInt, p: u64, n: u32) -> PadicApprox {
    if bn.is_zero() {
        return PadicApprox {
            p,
            unit: BigInt::zero(),
            shift: 0,
            n,
        };
    }
    let s = int_padic(bn, p);
    debug_assert!((s as u64) < u64::from(n));
    let unit = bn / pow_big(p, s as u64);
    PadicApprox {
        p,
        unit,
        shift: s,
        n: n - s as u32,
    }
}

fn pow_big(p: u64, e: u64) -> BigInt {
    let base = BigInt::from(p);
    let mut acc = BigInt::one();
    for _ in 0..e {
        acc *= &base;
    }
    acc
}

/// Reduce a rational with denominator coprime to the modulus.
fn rat_mod(t: &Rat, m: &BigInt) -> Result<BigInt> {
    let num = t.numer().mod_floor(m);
    let den = t.denom().mod_floor(m);
    Ok((num * inv_mod(&den, m)?).mod_floor(m))
}

fn inv_mod(u: &BigInt, m: &BigInt) -> Result<BigInt> {
    let g = u.extended_gcd(m);
    if !g.gcd.is_one() {
        return Err(Error::Internal(
            "expected a unit in the working modulus".into(),
        ));
    }
    Ok(g.x.mod_floor(m))
}

fn int_coeffs_mod(f: &QPoly, m: &BigInt) -> Result<Vec<BigInt>> {
    let q = Rationals;
    (0..=f.degree()).map(|i| rat_mod(&f.coeff(&q, i), m)).collect()
}

fn eval_mod(coeffs: &[BigInt], x: &BigInt, m: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in coeffs.iter().rev() {
        acc = (acc * x + c).mod_floor(m);
    }
    acc
}
