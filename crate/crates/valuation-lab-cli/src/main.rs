//! vlab: exact valuation computations as JSON. One document per invocation
//! on stdout (padic-close streams one document per stage); diagnostics on
//! stderr. Exit 0 on success, 1 on a domain error (the document is then an
//! error object), 2 on a usage error.

mod input;
mod parse;

use clap::{Parser, Subcommand};
use serde_json::json;

use valuation_lab::config::Config;
use valuation_lab::error::{Error, Result};
use valuation_lab::exact::rat::{fmt_rat, parse_rat};
use valuation_lab::extensions::{common_extension_exists, extensions_of, ValHandle};
use valuation_lab::hensel::{hensel_lift, hensel_set_membership, HenselProblem};
use valuation_lab::numberfields::{
    factor_over_field, minimal_polynomial, q_poly_to_tower, tower_poly_to_q,
};
use valuation_lab::padic_closure::{formally_padic_check, run_closure, Stage};
use valuation_lab::tower::{AlgElem, TowerField};
use valuation_lab::valuation::{newton_polygon_q, weak_approximation_q};
use valuation_lab::valuegroup::{div_query, extend_div, subgroup_index};
use valuation_lab::diag_sim::{
    sim_henselization, sim_no_comp_ext, sim_padic_adversary, OracleApprox,
};

#[derive(Parser)]
#[command(name = "vlab", version, about = "Exact valuation computations as JSON")]
struct Cli {
    /// Tower depth bound.
    #[arg(long, global = true)]
    depth_max: Option<usize>,

    /// Absolute degree bound for factorization and towers.
    #[arg(long, global = true)]
    degree_max: Option<usize>,

    /// Hensel precision cap.
    #[arg(long, global = true)]
    precision_cap: Option<u32>,

    /// Factorization seed; the VALUATION_LAB_SEED environment variable
    /// overrides this flag.
    #[arg(long, global = true)]
    factor_seed: Option<u64>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Factor a polynomial over Q or over a number-field tower.
    Factor {
        /// Tower as JSON: [{"name": "...", "minpoly": "..."}, ...]. Omitted
        /// means Q.
        #[arg(long)]
        tower: Option<String>,
        /// Polynomial in x; coefficients may use the generator names.
        #[arg(long)]
        poly: String,
    },
    /// Minimal polynomial over Q of an element of a tower.
    Minpoly {
        /// Tower as JSON: [{"name": "...", "minpoly": "..."}, ...].
        #[arg(long)]
        tower: String,
        /// Element written in the tower's generator names.
        #[arg(long)]
        elem: String,
    },
    /// Newton polygon of a polynomial over Q at p.
    Newton {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        poly: String,
    },
    /// Enumerate the extensions of v_p to Q[x]/(g), certified by sum e*f.
    Extensions {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        poly: String,
    },
    /// Newton-lift a seed to a root of f modulo p^n.
    HenselLift {
        #[arg(long)]
        p: u64,
        /// Target precision exponent.
        #[arg(long)]
        n: u32,
        #[arg(long)]
        poly: String,
        /// Starting approximation, a rational.
        #[arg(long)]
        seed: String,
    },
    /// Decide membership of a monic integral polynomial in the Hensel
    /// irreducibility set at p.
    HenselSet {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        poly: String,
    },
    /// Whether k divides x in the group generated by --gens.
    Div {
        /// Generators "a,b" separated by ';', e.g. "1,0;0,1".
        #[arg(long)]
        gens: String,
        /// The element to divide, as "a,b".
        #[arg(long)]
        x: String,
        #[arg(long)]
        k: u64,
    },
    /// Adjoin b/n to the group and report the result and its index.
    GroupExtend {
        #[arg(long)]
        gens: String,
        /// The element whose n-th part is adjoined, as "a,b".
        #[arg(long)]
        b: String,
        #[arg(long)]
        n: u64,
    },
    /// Certify the formally-p-adic conditions of a stage group.
    PadicCheck {
        #[arg(long)]
        p: u64,
        /// Stage group generators; omitted means Z<1, r>.
        #[arg(long)]
        gens: Option<String>,
    },
    /// Run a closure schedule, streaming one stage document per line.
    PadicClose {
        #[arg(long)]
        p: u64,
        /// Starting group generators; omitted means Z<1, r>.
        #[arg(long)]
        gens: Option<String>,
        /// JSON: [{"target": {"exponents": [...], "unit": bool}, "q": prime}, ...].
        #[arg(long)]
        schedule: String,
    },
    /// Weak approximation over Q: one element close to each target at its
    /// prime and integral at all of them.
    WeakApprox {
        /// Comma-separated primes.
        #[arg(long)]
        primes: String,
        /// Comma-separated rational targets, one per prime.
        #[arg(long)]
        targets: String,
    },
    /// Whether two extensions of v_p extend to a common valuation on a
    /// compositum.
    CommonExt {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        poly1: String,
        /// Index into the first extension report.
        #[arg(long, default_value_t = 0)]
        which1: usize,
        #[arg(long)]
        poly2: String,
        /// Index into the second extension report.
        #[arg(long, default_value_t = 0)]
        which2: usize,
    },
    /// Replay one of the diagonalization constructions.
    Simulate {
        #[command(subcommand)]
        sim: Sim,
    },
}

#[derive(Subcommand)]
enum Sim {
    /// Extension counts over the staged field encode oracle membership.
    NoCompExt {
        /// The odd base prime r.
        #[arg(long)]
        r: u64,
        /// Oracle members, comma separated; omit for the empty set.
        #[arg(long, value_delimiter = ',')]
        members: Vec<u64>,
        /// Probe indices 1..=budget.
        #[arg(long)]
        budget: u64,
    },
    /// Henselization membership certificates split by oracle membership.
    Henselization {
        #[arg(long)]
        r: u64,
        #[arg(long, value_delimiter = ',')]
        members: Vec<u64>,
        #[arg(long)]
        budget: u64,
    },
    /// The value-group adversary against a claimed p-adic closure.
    PadicAdversary {
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long)]
        q: u64,
        /// Offset with 0 <= m < q.
        #[arg(long)]
        m: u64,
        /// The claimed gamma with q * gamma = v(t) + m, as "a,b".
        #[arg(long)]
        gamma: String,
    },
}

enum Output {
    One(serde_json::Value),
    Stream(Vec<serde_json::Value>),
}

fn parse_u64_list(src: &str) -> Result<Vec<u64>> {
    src.split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| Error::ParseError {
                offset: 0,
                message: format!("bad integer {s:?}"),
            })
        })
        .collect()
}

fn stage_from(p: u64, gens: Option<&str>) -> Result<Stage> {
    match gens {
        None => Stage::initial(p),
        Some(src) => Stage::with_group(p, input::parse_group(src)?),
    }
}

fn run(cmd: Cmd, config: &Config) -> Result<Output> {
    match cmd {
        Cmd::Factor { tower, poly } => {
            let k = match tower {
                Some(t) => input::parse_tower(&t, config)?,
                None => TowerField::q(),
            };
            let f = parse::parse_tower_poly(&k, &poly)?;
            let factors = factor_over_field(&k, &f, config)?;
            Ok(Output::One(json!({
                "field": input::tower_to_json(&k),
                "factors": factors
                    .iter()
                    .map(|(g, m)| json!({
                        "poly": parse::print_tower_poly(&k, g),
                        "multiplicity": m,
                    }))
                    .collect::<Vec<_>>(),
            })))
        }
        Cmd::Minpoly { tower, elem } => {
            let k = input::parse_tower(&tower, config)?;
            let rep = parse::parse_elem(&k, &elem)?;
            let a = AlgElem {
                field: k.clone(),
                rep,
            };
            let q = TowerField::q();
            let m = minimal_polynomial(&a, &q, config)?;
            Ok(Output::One(json!({
                "minpoly": parse::print_qpoly(&tower_poly_to_q(&m)),
            })))
        }
        Cmd::Newton { p, poly } => {
            let f = parse::parse_qpoly(&poly)?;
            Ok(Output::One(newton_polygon_q(&f, p)?.to_json()))
        }
        Cmd::Extensions { p, poly } => {
            let q = TowerField::q();
            let g = q_poly_to_tower(&q, &parse::parse_qpoly(&poly)?);
            let report = extensions_of(&q, &ValHandle::PAdic(p), &g, config)?;
            Ok(Output::One(report.to_json()))
        }
        Cmd::HenselLift { p, n, poly, seed } => {
            let problem = HenselProblem {
                f: parse::parse_qpoly(&poly)?,
                seed: parse_rat(seed.trim())?,
                p,
                n,
            };
            Ok(Output::One(hensel_lift(&problem, config)?.to_json()))
        }
        Cmd::HenselSet { p, poly } => {
            let q = TowerField::q();
            let g = q_poly_to_tower(&q, &parse::parse_qpoly(&poly)?);
            let answer = hensel_set_membership(&q, &ValHandle::PAdic(p), &g, config)?;
            Ok(Output::One(answer.to_json()))
        }
        Cmd::Div { gens, x, k } => {
            let g = input::parse_group(&gens)?;
            let xv = input::parse_value(&x)?;
            Ok(Output::One(json!({ "divides": div_query(&g, &xv, k)? })))
        }
        Cmd::GroupExtend { gens, b, n } => {
            let g = input::parse_group(&gens)?;
            let bv = input::parse_value(&b)?;
            let h = extend_div(&g, &bv, n)?;
            let index = subgroup_index(&g, &h)?;
            Ok(Output::One(json!({
                "group": h.to_json(),
                "index": index,
            })))
        }
        Cmd::PadicCheck { p, gens } => {
            let stage = stage_from(p, gens.as_deref())?;
            Ok(Output::One(formally_padic_check(&stage)?.to_json()))
        }
        Cmd::PadicClose { p, gens, schedule } => {
            let stage = stage_from(p, gens.as_deref())?;
            let sched = input::parse_schedule(&schedule)?;
            let run = run_closure(&stage, &sched)?;
            Ok(Output::Stream(
                run.stages.iter().map(|s| s.to_json()).collect(),
            ))
        }
        Cmd::WeakApprox { primes, targets } => {
            let ps = parse_u64_list(&primes)?;
            let ts = input::parse_rat_list(&targets)?;
            let a = weak_approximation_q(&ps, &ts)?;
            Ok(Output::One(json!({ "element": fmt_rat(&a) })))
        }
        Cmd::CommonExt {
            p,
            poly1,
            which1,
            poly2,
            which2,
        } => {
            let q = TowerField::q();
            let g1 = q_poly_to_tower(&q, &parse::parse_qpoly(&poly1)?);
            let g2 = q_poly_to_tower(&q, &parse::parse_qpoly(&poly2)?);
            let r1 = extensions_of(&q, &ValHandle::PAdic(p), &g1, config)?;
            let r2 = extensions_of(&q, &ValHandle::PAdic(p), &g2, config)?;
            let pick = |r: &valuation_lab::extensions::ExtensionReport, w: usize| {
                r.descriptors.get(w).cloned().ok_or_else(|| {
                    Error::IndexOutOfRange(format!(
                        "extension index {w} out of range 0..{}",
                        r.descriptors.len()
                    ))
                })
            };
            let d1 = pick(&r1, which1)?;
            let d2 = pick(&r2, which2)?;
            Ok(Output::One(json!({
                "compatible": common_extension_exists(&d1, &d2, config)?,
            })))
        }
        Cmd::Simulate { sim } => match sim {
            Sim::NoCompExt { r, members, budget } => {
                let oracle = OracleApprox::new(&members, budget)?;
                Ok(Output::One(sim_no_comp_ext(r, &oracle, config)?.to_json()))
            }
            Sim::Henselization { r, members, budget } => {
                let oracle = OracleApprox::new(&members, budget)?;
                Ok(Output::One(
                    sim_henselization(r, &oracle, config)?.to_json(),
                ))
            }
            Sim::PadicAdversary { p, q, m, gamma } => {
                let g = input::parse_value(&gamma)?;
                Ok(Output::One(sim_padic_adversary(p, q, m, &g)?.to_json()))
            }
        },
    }
}

fn main() {
    let cli = Cli::parse();
    let mut config = Config::default();
    if let Some(d) = cli.depth_max {
        config.tower_depth_max = d;
    }
    if let Some(d) = cli.degree_max {
        config.degree_max = d;
    }
    if let Some(c) = cli.precision_cap {
        config.hensel_cap = c;
    }
    if let Some(s) = cli.factor_seed {
        config.factor_seed = s;
    }
    if let Ok(v) = std::env::var("VALUATION_LAB_SEED") {
        match v.trim().parse::<u64>() {
            Ok(s) => config.factor_seed = s,
            Err(_) => {
                eprintln!("vlab: VALUATION_LAB_SEED must be an unsigned integer");
                std::process::exit(2);
            }
        }
    }
    match run(cli.cmd, &config) {
        Ok(Output::One(doc)) => println!("{doc}"),
        Ok(Output::Stream(docs)) => {
            for doc in docs {
                println!("{doc}");
            }
        }
        Err(e) => {
            let code = e.code();
            let full = e.to_string();
            // Display prepends the code; the JSON carries it separately.
            let message = full
                .strip_prefix(&format!("{code}: "))
                .unwrap_or(&full)
                .to_string();
            println!("{}", json!({ "error": { "code": code, "message": message } }));
            std::process::exit(1);
        }
    }
}
