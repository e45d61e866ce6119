//! Formally-p-adic certification and the stage construction that walks a
//! valued field toward a p-adic closure: at each step a prime q must divide
//! one of v(a), v(a)+1, ..., v(a)+q-1, and when it does not, a q-th root of
//! a is adjoined so that it does.
//!
//! The dynamics live entirely in the value group: adjunctions are Kummer
//! steps that keep the residue field F_p (each one is totally ramified, of
//! index exactly q), so a stage carries its group, the root records that
//! produced it, and recomputed certification flags.

use crate::error::{Error, Result};
use crate::exact::rat::{is_prime_u64, require_prime, Rat};
use crate::value::Value;
use crate::valuegroup::{
    div_query, extend_div, least_positive_is_one, subgroup_index, FGGroup, MAX_STAGE_ORDER,
};
use num_bigint::BigInt;

/// A power product over the stage's multiplicative generators. Exponent
/// slot 0 is p, slot 1 is t, slot 2+j is the j-th adjoined root; missing
/// trailing slots mean exponent zero. The unit flag records that a factor
/// of valuation zero was dropped; it never affects the value.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialElem {
    pub exponents: Vec<i64>,
    pub unit: bool,
}

impl MonomialElem {
    pub fn new(exponents: Vec<i64>, unit: bool) -> MonomialElem {
        MonomialElem { exponents, unit }
    }

    /// The single generator at the given slot (0 = p, 1 = t, 2+j = root j).
    pub fn generator(slot: usize) -> MonomialElem {
        let mut exponents = vec![0; slot + 1];
        exponents[slot] = 1;
        MonomialElem {
            exponents,
            unit: false,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "exponents": self.exponents, "unit": self.unit })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<MonomialElem> {
        let exps = v
            .get("exponents")
            .and_then(|e| e.as_array())
            .ok_or_else(|| {
                Error::DomainMismatch("expected {\"exponents\": [...], \"unit\": bool}".into())
            })?;
        let exponents = exps
            .iter()
            .map(|e| {
                e.as_i64()
                    .ok_or_else(|| Error::DomainMismatch("exponents must be integers".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let unit = v.get("unit").and_then(|u| u.as_bool()).unwrap_or(false);
        Ok(MonomialElem { exponents, unit })
    }
}

/// One adjoined q-th root: the new generator's value is
/// (value(target) + m) / q, with m = 0 in the closure construction.
#[derive(Clone, Debug, PartialEq)]
pub struct RootRecord {
    pub target: MonomialElem,
    pub q: u64,
    pub m: u64,
    pub value: Value,
}

impl RootRecord {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "target": self.target.to_json(),
            "q": self.q,
            "m": self.m,
            "value": self.value.to_json(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageFlags {
    pub formally_padic: bool,
    pub residue_is_fp: bool,
    pub least_positive_one: bool,
}

impl StageFlags {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "formally_padic": self.formally_padic,
            "residue_is_Fp": self.residue_is_fp,
            "least_positive_one": self.least_positive_one,
        })
    }
}

/// One step of the closure construction: the value group so far, the root
/// records that built it from the base, and the certification flags.
#[derive(Clone, Debug)]
pub struct Stage {
    pub index: u64,
    pub p: u64,
    pub base: FGGroup,
    pub roots: Vec<RootRecord>,
    pub group: FGGroup,
    pub flags: StageFlags,
}

impl Stage {
    /// Stage 0 over the group Z<1, r>: v(p) = 1 and v(t) = r.
    pub fn initial(p: u64) -> Result<Stage> {
        let one = Value::from_i64(1);
        let r = Value::from_parts(Rat::from_integer(BigInt::from(0)), Rat::from_integer(BigInt::from(1)));
        Stage::with_group(p, FGGroup::new(vec![one, r])?)
    }

    /// Stage 0 over an arbitrary group containing v(p) = (1,0) and
    /// v(t) = (0,1).
    pub fn with_group(p: u64, group: FGGroup) -> Result<Stage> {
        Stage::rebuild(0, p, group, Vec::new())
    }

    /// Rebuild a stage from its parts, revalidating everything and
    /// recomputing the group and flags.
    fn rebuild(index: u64, p: u64, base: FGGroup, roots: Vec<RootRecord>) -> Result<Stage> {
        if !is_prime_u64(p) {
            return Err(Error::MalformedStage(format!("{} is not prime", p)));
        }
        let one = Value::from_i64(1);
        let r = Value::from_parts(rat_zero(), rat_one());
        if !base.contains(&one) || !base.contains(&r) {
            return Err(Error::MalformedStage(
                "the stage group must contain v(p) = (1,0) and v(t) = (0,1)".into(),
            ));
        }
        let mut gen_vals = vec![one, r];
        let mut group = base.clone();
        let mut residue_is_fp = true;
        for record in &roots {
            if !is_prime_u64(record.q) {
                return Err(Error::MalformedStage(format!(
                    "root order {} is not prime",
                    record.q
                )));
            }
            if record.m > MAX_STAGE_ORDER {
                return Err(Error::MalformedStage(format!(
                    "root offset {} exceeds the supported bound",
                    record.m
                )));
            }
            if record.target.exponents.len() > gen_vals.len() {
                return Err(Error::MalformedStage(
                    "a root target references generators adjoined later".into(),
                ));
            }
            let tv = combine(&gen_vals, &record.target);
            let expected = tv
                .add(&Value::from_i64(record.m as i64))
                .scale(&inv_rat(record.q));
            if expected != record.value {
                return Err(Error::MalformedStage(
                    "a root record's value does not equal (value(target) + m) / q".into(),
                ));
            }
            let mut gens = group.gens.clone();
            gens.push(record.value.clone());
            let next = FGGroup::new(gens)?;
            if subgroup_index(&group, &next)? != record.q {
                residue_is_fp = false;
            }
            group = next;
            gen_vals.push(record.value.clone());
        }
        let least_positive_one = least_positive_is_one(&group)?;
        let flags = StageFlags {
            formally_padic: residue_is_fp && least_positive_one,
            residue_is_fp,
            least_positive_one,
        };
        Ok(Stage {
            index,
            p,
            base,
            roots,
            group,
            flags,
        })
    }

    /// Values of the stage's multiplicative generators, slot for slot.
    pub fn gen_values(&self) -> Vec<Value> {
        let mut vals = vec![Value::from_i64(1), Value::from_parts(rat_zero(), rat_one())];
        vals.extend(self.roots.iter().map(|r| r.value.clone()));
        vals
    }

    /// The value of a monomial in this stage's group.
    pub fn value_of(&self, a: &MonomialElem) -> Result<Value> {
        let gens = self.gen_values();
        if a.exponents.len() > gens.len() {
            return Err(Error::DomainMismatch(format!(
                "monomial references {} generators but the stage has {}",
                a.exponents.len(),
                gens.len()
            )));
        }
        let mut acc = Value::zero();
        for (e, g) in a.exponents.iter().zip(&gens) {
            acc = acc.add(&g.mul_int(*e));
        }
        debug_assert!(self.group.contains(&acc));
        Ok(acc)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "index": self.index,
            "group": self.group.to_json(),
            "roots": self.roots.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "flags": self.flags.to_json(),
        })
    }
}

fn rat_zero() -> Rat {
    Rat::from_integer(BigInt::from(0))
}

fn rat_one() -> Rat {
    Rat::from_integer(BigInt::from(1))
}

fn inv_rat(q: u64) -> Rat {
    Rat::new(BigInt::from(1), BigInt::from(q))
}

fn combine(gen_vals: &[Value], a: &MonomialElem) -> Value {
    let mut acc = Value::zero();
    for (e, g) in a.exponents.iter().zip(gen_vals) {
        acc = acc.add(&g.mul_int(*e));
    }
    acc
}

/// Three-part certification report for a stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PadicReport {
    pub extends_padic_on_q: bool,
    pub residue_is_fp: bool,
    pub least_positive_one: bool,
}

impl PadicReport {
    pub fn formally_padic(&self) -> bool {
        self.extends_padic_on_q && self.residue_is_fp && self.least_positive_one
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "extends_padic_on_Q": self.extends_padic_on_q,
            "residue_is_Fp": self.residue_is_fp,
            "least_positive_one": self.least_positive_one,
            "formally_padic": self.formally_padic(),
        })
    }
}

/// Revalidate a stage and report its three certification conditions.
///
/// The extension-of-(Q, v_p) condition holds by construction once the group
/// contains v(p) = 1; residue F_p holds when every recorded adjunction was
/// totally ramified (index exactly q); the last condition is the value
/// group's gap check at 1.
pub fn formally_padic_check(s: &Stage) -> Result<PadicReport> {
    let fresh = Stage::rebuild(s.index, s.p, s.base.clone(), s.roots.clone())?;
    if !fresh.group.same_group(&s.group) {
        return Err(Error::MalformedStage(
            "the stage group does not match its base plus adjoined roots".into(),
        ));
    }
    Ok(PadicReport {
        extends_padic_on_q: true,
        residue_is_fp: fresh.flags.residue_is_fp,
        least_positive_one: fresh.flags.least_positive_one,
    })
}

/// One step: if q divides some v(a)+j with 0 <= j < q in the stage group,
/// nothing changes but the index; otherwise a q-th root of a is adjoined
/// and the group grows by exactly index q.
pub fn closure_stage(s: &Stage, a: &MonomialElem, q: u64) -> Result<Stage> {
    formally_padic_check(s)?;
    require_prime(q)?;
    if q > MAX_STAGE_ORDER {
        return Err(Error::DomainMismatch(format!(
            "prime {} exceeds the supported stage bound {}",
            q, MAX_STAGE_ORDER
        )));
    }
    let va = s.value_of(a)?;
    for j in 0..q {
        if div_query(&s.group, &va.add(&Value::from_i64(j as i64)), q)? {
            let mut next = s.clone();
            next.index += 1;
            return Ok(next);
        }
    }
    let value = va.scale(&inv_rat(q));
    // extend_div checks membership of the target value for us.
    extend_div(&s.group, &va, q)?;
    let mut roots = s.roots.clone();
    roots.push(RootRecord {
        target: a.clone(),
        q,
        m: 0,
        value,
    });
    let next = Stage::rebuild(s.index + 1, s.p, s.base.clone(), roots)?;
    if !next.flags.formally_padic {
        return Err(Error::NotFormallyPadic(
            "an adjunction broke a certification flag".into(),
        ));
    }
    Ok(next)
}

/// The full fold of [`closure_stage`] over a schedule, starting from a
/// certified stage; records which entries forced an adjunction.
#[derive(Clone, Debug)]
pub struct ClosureRun {
    pub stages: Vec<Stage>,
    pub adjoined: Vec<bool>,
}

impl ClosureRun {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "stages": self.stages.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
            "adjoined": self.adjoined,
        })
    }
}

pub fn run_closure(s0: &Stage, schedule: &[(MonomialElem, u64)]) -> Result<ClosureRun> {
    let report = formally_padic_check(s0)?;
    if !report.formally_padic() {
        return Err(Error::NotFormallyPadic(
            "the starting stage is not formally p-adic".into(),
        ));
    }
    let mut stages = vec![s0.clone()];
    let mut adjoined = Vec::new();
    for (a, q) in schedule {
        let next = {
            let cur = stages.last().expect("at least the starting stage");
            closure_stage(cur, a, *q)?
        };
        adjoined.push(next.roots.len() > stages.last().expect("nonempty").roots.len());
        stages.push(next);
    }
    Ok(ClosureRun { stages, adjoined })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::{rat, rat_frac};

    fn el(an: i64, ad: i64, bn: i64, bd: i64) -> Value {
        Value::from_parts(rat_frac(an, ad), rat_frac(bn, bd))
    }

    fn eli(a: i64, b: i64) -> Value {
        Value::from_parts(rat(a), rat(b))
    }

    fn t() -> MonomialElem {
        MonomialElem::generator(1)
    }

    #[test]
    fn initial_stage_is_certified() {
        let s = Stage::initial(3).unwrap();
        assert_eq!(s.index, 0);
        assert!(s.flags.formally_padic);
        let report = formally_padic_check(&s).unwrap();
        assert!(report.formally_padic());
        assert!(report.extends_padic_on_q && report.residue_is_fp && report.least_positive_one);
    }

    #[test]
    fn half_integer_group_fails_the_gap_check() {
        let g = FGGroup::new(vec![el(1, 2, 0, 1), eli(0, 1)]).unwrap();
        let s = Stage::with_group(5, g).unwrap();
        let report = formally_padic_check(&s).unwrap();
        assert!(!report.least_positive_one);
        assert!(!report.formally_padic());
        assert!(!s.flags.formally_padic);
    }

    #[test]
    fn adjoining_a_square_root_of_t_stays_certified() {
        let s0 = Stage::initial(2).unwrap();
        let s1 = closure_stage(&s0, &t(), 2).unwrap();
        assert_eq!(s1.index, 1);
        assert_eq!(s1.roots.len(), 1);
        assert_eq!(s1.roots[0].m, 0);
        assert_eq!(s1.roots[0].value, el(0, 1, 1, 2));
        assert!(s1
            .group
            .same_group(&FGGroup::new(vec![eli(1, 0), el(0, 1, 1, 2)]).unwrap()));
        assert_eq!(subgroup_index(&s0.group, &s1.group).unwrap(), 2);
        assert!(s1.flags.formally_padic);
    }

    #[test]
    fn divisible_targets_leave_the_stage_unchanged() {
        let s0 = Stage::initial(2).unwrap();
        let s1 = closure_stage(&s0, &t(), 2).unwrap();

        // t's value is now divisible by 2, so the same request is a no-op.
        let s2 = closure_stage(&s1, &t(), 2).unwrap();
        assert_eq!(s2.index, 2);
        assert_eq!(s2.roots.len(), 1);
        assert!(s2.group.same_group(&s1.group));

        // v(p) + 2 = 3 is divisible by 3 among the offsets.
        let s3 = closure_stage(&s0, &MonomialElem::generator(0), 3).unwrap();
        assert_eq!(s3.roots.len(), 0);
        assert!(s3.group.same_group(&s0.group));
    }

    #[test]
    fn closure_run_reaches_the_sixth_division_group() {
        let s0 = Stage::initial(2).unwrap();
        let run = run_closure(&s0, &[(t(), 2), (t(), 3)]).unwrap();
        assert_eq!(run.stages.len(), 3);
        assert_eq!(run.adjoined, vec![true, true]);
        let last = run.stages.last().unwrap();
        assert!(last
            .group
            .same_group(&FGGroup::new(vec![eli(1, 0), el(0, 1, 1, 6)]).unwrap()));
        assert_eq!(subgroup_index(&s0.group, &last.group).unwrap(), 6);
        for s in &run.stages {
            assert!(s.flags.formally_padic);
        }

        // Divisibility is monotone along the chain.
        assert!(div_query(&run.stages[1].group, &eli(0, 1), 2).unwrap());
        assert!(div_query(&run.stages[2].group, &eli(0, 1), 2).unwrap());

        let rerun = run_closure(&s0, &[(t(), 2), (t(), 2)]).unwrap();
        assert_eq!(rerun.adjoined, vec![true, false]);

        let empty = run_closure(&s0, &[]).unwrap();
        assert_eq!(empty.stages.len(), 1);
    }

    #[test]
    fn monomials_over_adjoined_roots_have_computable_values() {
        let s0 = Stage::initial(2).unwrap();
        let s1 = closure_stage(&s0, &t(), 2).unwrap();

        // p^2 t^-1 has value (2, -1).
        let a = MonomialElem::new(vec![2, -1], true);
        assert_eq!(s1.value_of(&a).unwrap(), eli(2, -1));

        // The adjoined root cubed has value (0, 3/2); dividing by 2 forces
        // a further adjunction of (0, 3/4), giving the quarter group.
        let b = MonomialElem::new(vec![0, 0, 3], false);
        assert_eq!(s1.value_of(&b).unwrap(), el(0, 1, 3, 2));
        let s2 = closure_stage(&s1, &b, 2).unwrap();
        assert_eq!(s2.roots.len(), 2);
        assert!(s2
            .group
            .same_group(&FGGroup::new(vec![eli(1, 0), el(0, 1, 1, 4)]).unwrap()));
        assert!(s2.flags.formally_padic);

        let err = s1.value_of(&MonomialElem::new(vec![0, 0, 0, 1], false)).unwrap_err();
        assert_eq!(err.code(), "DOMAIN_MISMATCH");
    }

    #[test]
    fn malformed_stages_are_rejected() {
        let err = Stage::initial(4).unwrap_err();
        assert_eq!(err.code(), "MALFORMED_STAGE");

        let no_t = FGGroup::new(vec![eli(1, 0), eli(0, 2)]).unwrap();
        let err = Stage::with_group(3, no_t).unwrap_err();
        assert_eq!(err.code(), "MALFORMED_STAGE");

        let s0 = Stage::initial(2).unwrap();
        let mut tampered = closure_stage(&s0, &t(), 2).unwrap();
        tampered.roots[0].value = eli(0, 1);
        let err = formally_padic_check(&tampered).unwrap_err();
        assert_eq!(err.code(), "MALFORMED_STAGE");

        let mut wrong_group = closure_stage(&s0, &t(), 2).unwrap();
        wrong_group.group = s0.group.clone();
        let err = formally_padic_check(&wrong_group).unwrap_err();
        assert_eq!(err.code(), "MALFORMED_STAGE");

        let err = closure_stage(&s0, &t(), 4).unwrap_err();
        assert_eq!(err.code(), "NOT_PRIME");
    }

    #[test]
    fn run_refuses_an_uncertified_start() {
        let g = FGGroup::new(vec![el(1, 2, 0, 1), eli(0, 1)]).unwrap();
        let s = Stage::with_group(5, g).unwrap();
        let err = run_closure(&s, &[(t(), 2)]).unwrap_err();
        assert_eq!(err.code(), "NOT_FORMALLY_PADIC");
    }

    #[test]
    fn json_shapes() {
        let s0 = Stage::initial(2).unwrap();
        let s1 = closure_stage(&s0, &t(), 2).unwrap();
        let j = s1.to_json();
        assert_eq!(j["index"], 1);
        assert!(j["group"]["gens"].is_array());
        assert_eq!(j["roots"][0]["q"], 2);
        assert_eq!(j["roots"][0]["m"], 0);
        assert_eq!(j["roots"][0]["target"]["exponents"][1], 1);
        assert_eq!(j["flags"]["formally_padic"], true);
        assert_eq!(j["flags"]["residue_is_Fp"], true);

        let m = MonomialElem::new(vec![1, -2, 3], true);
        let back = MonomialElem::from_json(&m.to_json()).unwrap();
        assert_eq!(m, back);
    }
}
