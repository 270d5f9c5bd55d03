use std::collections::HashSet;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use hopi::casebook;
use hopi::equiv::{
    check_abstraction, check_with, default_context_family, Mode, Relation, Verdict,
};
use hopi::parse::{load_defs, parse_term_with, DefEnv, ParseOptions};
use hopi::print::{print_term, print_term_elaborated};
use hopi::semantics::{build_lts, build_lts_sequential, normalize, transitions, ExploreBudget};
use hopi::sort::sort_check;
use hopi::syntax::{CalcId, Sort, Sym, Term};
use hopi::transforms::{factorize, make_trigger, FactorCase};
use hopi::Error;

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_DISTINGUISHED: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "hopi", version, about = "Workbench for strictly higher-order pi-calculi")]
struct Cli {
    /// Calculus: pi, piD<n> or pid<n>.
    #[arg(long, global = true, default_value = "piD1")]
    calc: CalcId,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// File of `def NAME = term;` entries that terms may refer to.
    #[arg(long, global = true)]
    defs: Option<PathBuf>,
    #[arg(long, global = true, env = "HOPI_BUDGET_STATES", default_value_t = 10_000)]
    max_states: usize,
    #[arg(long, global = true, default_value_t = 16)]
    max_tau_chain: usize,
    #[arg(long, global = true, default_value_t = 12)]
    max_depth: usize,
    /// Run on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationArg {
    Normal,
    Context,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strong,
    Weak,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse, sort-check and print the normal form. `-` reads stdin.
    Parse {
        term: String,
        /// Show `tau` and `!` in their encoded form.
        #[arg(long)]
        elaborate: bool,
    },
    /// Depth-first listing of transitions, at most `n` per state.
    Trace {
        term: String,
        #[arg(short, default_value_t = 8)]
        n: usize,
    },
    /// Export the reachable transition system.
    Lts { term: String },
    /// Compare two processes (or two abstractions).
    Check {
        left: String,
        right: String,
        #[arg(long, value_enum, default_value_t = RelationArg::Normal)]
        relation: RelationArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Weak)]
        mode: ModeArg,
    },
    /// Replace the abstraction `a` in context `e` by a trigger and a server.
    Factorize {
        /// Context, with the hole as a free process variable.
        e: String,
        a: String,
        #[arg(long, default_value = "X")]
        hole: String,
    },
    /// Print a term with replication and `tau` elaborated.
    Replicate { term: String },
    /// Run the casebook. FILTER selects claims whose id contains it.
    Claims {
        filter: Option<String>,
        #[arg(long)]
        list: bool,
        #[arg(long)]
        json: bool,
    },
}

struct Ctx {
    calc: CalcId,
    format: Format,
    defs: Option<DefEnv>,
    budget: ExploreBudget,
    parallel: bool,
}

impl Ctx {
    fn read(&self, src: &str) -> Result<Term, Error> {
        let text = if src == "-" {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        } else {
            src.to_string()
        };
        let opts = ParseOptions {
            defs: self.defs.as_ref(),
            ..ParseOptions::new(self.calc)
        };
        parse_term_with(text.trim(), &opts)
    }

    /// Parses `e` with `hole` free by binding it in a wrapper abstraction.
    fn read_context(&self, e: &str, hole: &str) -> Result<Term, Error> {
        match self.read(&format!("\\({hole}). ({e})"))? {
            Term::Abs(_, body) => Ok((*body).clone()),
            _ => unreachable!("parser returned a non-abstraction"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let defs = match cli.defs.as_ref().map(load_defs).transpose() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let ctx = Ctx {
        calc: cli.calc,
        format: cli.format,
        defs,
        budget: ExploreBudget {
            max_states: cli.max_states,
            max_tau_chain: cli.max_tau_chain,
            max_depth: cli.max_depth,
            ..ExploreBudget::default()
        },
        parallel: !cli.sequential,
    };
    match run(&ctx, cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn emit(ctx: &Ctx, text: impl FnOnce() -> String, json: impl FnOnce() -> serde_json::Value) {
    match ctx.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&json()).expect("json")),
        _ => print!("{}", text()),
    }
}

fn run(ctx: &Ctx, cmd: Cmd) -> Result<u8, Error> {
    match cmd {
        Cmd::Parse { term, elaborate } => {
            let t = normalize(&ctx.read(&term)?);
            let printed = if elaborate {
                print_term_elaborated(&t)
            } else {
                print_term(&t)
            };
            emit(ctx, || format!("{printed}\n"), || serde_json::to_value(&t).expect("json"));
            Ok(EXIT_OK)
        }
        Cmd::Trace { term, n } => {
            let t = normalize(&ctx.read(&term)?);
            let mut seen = HashSet::new();
            let mut lines = Vec::new();
            let tree = trace(&t, n, 0, ctx, &mut seen, &mut lines)?;
            emit(
                ctx,
                || {
                    let mut s = format!("{}\n", print_term(&t));
                    for l in &lines {
                        s.push_str(l);
                        s.push('\n');
                    }
                    s
                },
                || json!({"state": print_term(&t), "transitions": tree}),
            );
            Ok(EXIT_OK)
        }
        Cmd::Lts { term } => {
            let t = ctx.read(&term)?;
            let lts = if ctx.parallel {
                build_lts(&t, &ctx.budget)?
            } else {
                build_lts_sequential(&t, &ctx.budget)?
            };
            match ctx.format {
                Format::Dot => print!("{}", lts.to_dot()),
                Format::Json => println!("{}", serde_json::to_string_pretty(&lts.to_json()).expect("json")),
                Format::Text => {
                    for (i, s) in lts.states.iter().enumerate() {
                        println!("s{i} = {}", print_term(s));
                    }
                    for (s, a, d) in &lts.edges {
                        println!("s{s} --{a}--> s{d}");
                    }
                    if lts.truncated {
                        println!("(truncated)");
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Cmd::Check {
            left,
            right,
            relation,
            mode,
        } => {
            let (p, q) = (ctx.read(&left)?, ctx.read(&right)?);
            let mode = match mode {
                ModeArg::Strong => Mode::Strong,
                ModeArg::Weak => Mode::Weak,
            };
            let v = if sort_check(&p, ctx.calc)? != Sort::Proc {
                check_abstraction(&p, &q, mode, &ctx.budget)?
            } else {
                match relation {
                    RelationArg::Normal => check_with(&p, &q, mode, Relation::Normal, &ctx.budget, ctx.parallel)?,
                    RelationArg::Context => {
                        let fam = default_context_family(ctx.calc, ctx.calc.payload_sort())?;
                        check_with(&p, &q, mode, Relation::Context(&fam), &ctx.budget, ctx.parallel)?
                    }
                }
            };
            emit(ctx, || format!("{v}\n"), || v.to_json());
            Ok(match v {
                Verdict::BisimilarUpToBound { .. } => EXIT_OK,
                Verdict::Distinguished(_) => EXIT_DISTINGUISHED,
                Verdict::Inconclusive { .. } => EXIT_INCONCLUSIVE,
            })
        }
        Cmd::Factorize { e, a, hole } => {
            make_trigger(&Sym::new("m"), ctx.calc)?;
            let e = ctx.read_context(&e, &hole)?;
            let a = ctx.read(&a)?;
            let r = factorize(&e, &Sym::new(&hole), &a, ctx.calc)?;
            let printed = print_term(&r.factored);
            emit(
                ctx,
                || format!("{printed}\n"),
                || {
                    json!({
                        "original": print_term(&r.original),
                        "factored": printed,
                        "trigger": r.trigger_name.to_string(),
                        "parameters": match r.case {
                            FactorCase::NonParameterized => 0,
                            FactorCase::Parameterized(k) => k,
                        },
                    })
                },
            );
            Ok(EXIT_OK)
        }
        Cmd::Replicate { term } => {
            let t = ctx.read(&term)?;
            let printed = print_term_elaborated(&t);
            emit(ctx, || format!("{printed}\n"), || json!({"elaborated": printed}));
            Ok(EXIT_OK)
        }
        Cmd::Claims { filter, list, json } => {
            let ids = casebook::claim_ids();
            if let Some(f) = &filter {
                if !ids.iter().any(|id| id.contains(f.as_str())) {
                    return Err(Error::UnknownClaim(f.clone()));
                }
            }
            if list {
                for c in casebook::claims() {
                    if filter.as_deref().map_or(true, |f| c.id.contains(f)) {
                        println!("{:<34} {}", c.id, c.law);
                    }
                }
                return Ok(EXIT_OK);
            }
            let reports = casebook::run_all(filter.as_deref(), &ctx.budget, ctx.parallel);
            if json || ctx.format == Format::Json {
                let v = casebook::reports_to_json(&reports);
                println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            } else {
                for r in &reports {
                    let status = if r.pass { "PASS" } else { "FAIL" };
                    println!("{status}  {:<34} {:>9.1} ms", r.id, r.elapsed_ms);
                    for c in r.checks.iter().filter(|c| !c.pass) {
                        println!("      {}: expected {}, got {}", c.what, c.expected, c.observed);
                    }
                }
                let passed = reports.iter().filter(|r| r.pass).count();
                println!("{passed}/{} claims pass", reports.len());
            }
            let inconclusive = reports
                .iter()
                .flat_map(|r| &r.checks)
                .any(|c| !c.pass && c.observed.contains("inconclusive"));
            Ok(if reports.iter().all(|r| r.pass) {
                EXIT_OK
            } else if inconclusive {
                EXIT_INCONCLUSIVE
            } else {
                EXIT_DISTINGUISHED
            })
        }
    }
}

/// Lists transitions of `t` depth-first; states already listed are marked
/// and not expanded again.
fn trace(
    t: &Term,
    n: usize,
    depth: usize,
    ctx: &Ctx,
    seen: &mut HashSet<Term>,
    lines: &mut Vec<String>,
) -> Result<Vec<serde_json::Value>, Error> {
    seen.insert(t.clone());
    if depth >= ctx.budget.max_depth {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (a, r) in transitions(t, &ctx.budget)?.into_iter().take(n) {
        let r = normalize(&r);
        let repeat = seen.contains(&r);
        let indent = "  ".repeat(depth + 1);
        lines.push(format!(
            "{indent}--{a}--> {}{}",
            print_term(&r),
            if repeat { "  (seen)" } else { "" }
        ));
        let next = if repeat {
            Vec::new()
        } else {
            trace(&r, n, depth + 1, ctx, seen, lines)?
        };
        out.push(json!({
            "action": a.to_string(),
            "state": print_term(&r),
            "seen": repeat,
            "transitions": next,
        }));
    }
    Ok(out)
}
