//! Executable claims: every law and example of the theory that can be
//! checked on concrete terms, with a machine-readable report per claim.

use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::equiv::{
    check_abstraction, check_context, check_normal, default_context_family, replay_witness,
    ContextFamily, Mode, Probe, Verdict,
};
use crate::error::Error;
use crate::par;
use crate::parse::parse_term;
use crate::print::print_term;
use crate::semantics::{normalize, transitions, Action, ExploreBudget};
use crate::sort::sort_check;
use crate::syntax::{Arg, CalcId, Name, Param, Sort, Sym, Term};
use crate::transforms::{
    encode_replication, factorization_fixtures, factorize, server_law_fixtures, make_trigger,
    FactorCase, Prefix, ServerLaw,
};

fn pid() -> CalcId {
    CalcId::PiD(1)
}

fn term(src: &str) -> Term {
    parse_term(src, pid()).unwrap_or_else(|e| panic!("casebook term `{src}`: {e}"))
}

// ---------------------------------------------------------------------------
// Structural congruence instances

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CongruenceLaw {
    AlphaInput,
    AlphaRestriction,
    ParNil,
    ParAssoc,
    ParComm,
    ResSwap,
    ResDeadPrefix,
    ScopeExtrusion,
    Beta,
}

impl CongruenceLaw {
    pub const ALL: [CongruenceLaw; 9] = [
        CongruenceLaw::AlphaInput,
        CongruenceLaw::AlphaRestriction,
        CongruenceLaw::ParNil,
        CongruenceLaw::ParAssoc,
        CongruenceLaw::ParComm,
        CongruenceLaw::ResSwap,
        CongruenceLaw::ResDeadPrefix,
        CongruenceLaw::ScopeExtrusion,
        CongruenceLaw::Beta,
    ];

    pub fn id(self) -> &'static str {
        match self {
            CongruenceLaw::AlphaInput => "congruence-alpha-input",
            CongruenceLaw::AlphaRestriction => "congruence-alpha-restriction",
            CongruenceLaw::ParNil => "congruence-par-nil",
            CongruenceLaw::ParAssoc => "congruence-par-assoc",
            CongruenceLaw::ParComm => "congruence-par-comm",
            CongruenceLaw::ResSwap => "congruence-res-swap",
            CongruenceLaw::ResDeadPrefix => "congruence-res-dead-prefix",
            CongruenceLaw::ScopeExtrusion => "congruence-scope-extrusion",
            CongruenceLaw::Beta => "congruence-beta",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            CongruenceLaw::AlphaInput => "a(X).T == a(Z).T{Z/X}",
            CongruenceLaw::AlphaRestriction => "new c. T == new d. T{d/c}",
            CongruenceLaw::ParNil => "T | 0 == T",
            CongruenceLaw::ParAssoc => "T | (T' | T'') == (T | T') | T''",
            CongruenceLaw::ParComm => "T | T' == T' | T",
            CongruenceLaw::ResSwap => "new c. new d. T == new d. new c. T",
            CongruenceLaw::ResDeadPrefix => "new c. l.T == 0 when the subject of l is c",
            CongruenceLaw::ScopeExtrusion => "new c. (T | T') == (new c. T) | T' when c is not free in T'",
            CongruenceLaw::Beta => "(\\(U). T)<K> == T{K/U}",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CongruenceInstance {
    pub law: CongruenceLaw,
    pub left: Term,
    pub right: Term,
}

/// Small closed processes the congruence instances are built from.
const BASES: [&str; 5] = [
    "0",
    "a!",
    "b(X). X<\\(Y). a!>",
    "new c. (c! | c. a!)",
    "a!<\\(Y). Y<\\(Z). b!>>. b",
];

/// At least five instances of every structural congruence law.
pub fn congruence_instances() -> Vec<CongruenceInstance> {
    let mut out = Vec::new();
    let mut push = |law, l: String, r: String| {
        out.push(CongruenceInstance {
            law,
            left: term(&l),
            right: term(&r),
        })
    };
    let n = BASES.len();
    for i in 0..n {
        let (t, u, v) = (BASES[i], BASES[(i + 1) % n], BASES[(i + 2) % n]);
        push(
            CongruenceLaw::AlphaInput,
            format!("a(X). (X<\\(Y). 0> | {t})"),
            format!("a(W). (W<\\(Y). 0> | {t})"),
        );
        push(
            CongruenceLaw::AlphaRestriction,
            format!("new c. (c! | c. ({t}))"),
            format!("new k. (k! | k. ({t}))"),
        );
        push(CongruenceLaw::ParNil, format!("({t}) | 0"), t.to_string());
        push(
            CongruenceLaw::ParAssoc,
            format!("({t}) | (({u}) | ({v}))"),
            format!("(({t}) | ({u})) | ({v})"),
        );
        push(
            CongruenceLaw::ParComm,
            format!("({t}) | ({u})"),
            format!("({u}) | ({t})"),
        );
        push(
            CongruenceLaw::ResSwap,
            format!("new c. new e. (c!<\\(Y). e!>. e | c. ({t}))"),
            format!("new e. new c. (c!<\\(Y). e!>. e | c. ({t}))"),
        );
        let dead = if i % 2 == 0 {
            format!("new c. c!<\\(Y). ({t})>. ({u})")
        } else {
            format!("new c. c(X). (X<\\(Y). 0> | {t})")
        };
        push(CongruenceLaw::ResDeadPrefix, dead, "0".into());
        push(
            CongruenceLaw::ScopeExtrusion,
            format!("new c. (a!<\\(Y). c!>. c | ({t}))"),
            format!("(new c. a!<\\(Y). c!>. c) | ({t})"),
        );
        push(
            CongruenceLaw::Beta,
            format!("(\\(Y). a!<Y>. ({t}))<\\(Z). ({u})>"),
            format!("a!<\\(Z). ({u})>. ({t})"),
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Coincidence corpus

#[derive(Clone, Debug)]
pub struct CorpusPair {
    pub name: &'static str,
    pub left: Term,
    pub right: Term,
    pub bisimilar: bool,
}

const BISIMILAR: [(&str, &str, &str); 15] = [
    ("par-nil", "a!<\\(Y). b!>.0 | 0", "a!<\\(Y). b!>.0"),
    ("tau-law", "tau. a!", "a!"),
    ("internal-handshake", "new c. (c! | c. a!)", "a!"),
    ("tau-in-payload", "a!<\\(Y). tau. Y<\\(Z). 0>>.0", "a!<\\(Y). Y<\\(Z). 0>>.0"),
    ("par-order-under-input", "a(X). (X<\\(Y). 0> | b!)", "a(X). (b! | X<\\(Y). 0>)"),
    ("dead-restricted-output", "new c. c!. a!", "0"),
    ("tau-in-continuation", "a!. b!", "a!. tau. b!"),
    ("tau-after-input", "a(X). X<\\(Y). b!>", "a(X). tau. X<\\(Y). b!>"),
    ("handshake-then-beta", "new c. (c!<\\(Y). Y<\\(Z). 0>>.0 | c(X). X<\\(Z). a!>)", "a!"),
    ("beta-redex", "(\\(Y). a!<Y>.0)<\\(Z). b!>", "a!<\\(Z). b!>.0"),
    ("delayed-pair", "a! | b!", "new c. (c! | c. (a! | b!))"),
    ("delayed-after-input", "b(X). a!", "b(X). new c. (c! | c. a!)"),
    ("tau-before-private-signal", "new c. (a!<\\(Y). 0>. c! | c. b!)", "new c. (a!<\\(Y). 0>. tau. c! | c. b!)"),
    ("nested-nil", "a(X). (0 | X<\\(Y). (0 | b!)>)", "a(X). X<\\(Y). b!>"),
    ("double-tau", "tau. tau. a!<\\(Y). Y<\\(Z). 0>>.0", "a!<\\(Y). Y<\\(Z). 0>>.0"),
];

const DISTINGUISHED: [(&str, &str, &str); 15] = [
    ("different-subjects", "a!", "b!"),
    ("output-vs-nil", "a!", "0"),
    ("swapped-sequence", "a!. b!", "b!. a!"),
    ("payload-content", "a!<\\(Y). b!>.0", "a!<\\(Y). 0>.0"),
    ("argument-used", "a(X). X<\\(Y). 0>", "a(X). 0"),
    ("argument-used-twice", "a(X). (X<\\(Y). 0> | X<\\(Y). 0>)", "a(X). X<\\(Y). 0>"),
    ("interleaving", "a! | b!", "a!. b!"),
    ("internal-choice", "new c. (c! | c. a! | c. b!)", "a!"),
    ("payload-call-count", "a!<\\(Y). Y<\\(Z). 0>>.0", "a!<\\(Y). (Y<\\(Z). 0> | Y<\\(Z). 0>)>.0"),
    ("continuation-after-input", "a(X). b!", "a(X). 0"),
    ("payload-free-name", "a!<\\(Y). b!>.0", "a!<\\(Y). e!>.0"),
    ("argument-of-call", "a(X). X<\\(Y). b!>", "a(X). X<\\(Y). 0>"),
    ("private-guard", "new c. a!<\\(Y). c!>. c. b!", "new c. a!<\\(Y). c!>. b!"),
    ("repeated-output", "a!. a!", "a!"),
    ("input-output-swap", "b(X). a!", "a(X). b!"),
];

/// Pairs designed to be equivalent, then pairs designed to be told apart.
pub fn coincidence_corpus() -> Vec<CorpusPair> {
    let mk = |(name, l, r): (&'static str, &str, &str), bisimilar| CorpusPair {
        name,
        left: term(l),
        right: term(r),
        bisimilar,
    };
    BISIMILAR
        .iter()
        .map(|&p| mk(p, true))
        .chain(DISTINGUISHED.iter().map(|&p| mk(p, false)))
        .collect()
}

/// Receiving contexts that put the received process under a restriction
/// of the name its own output uses.
pub fn capture_family() -> Result<ContextFamily, Error> {
    let mut f = default_context_family(pid(), Sort::AbsD(1))?;
    for src in [
        "new m. X<\\(Y). 0>",
        "new n. X<\\(Y). 0>",
        "new m. (X<\\(Y). 0> | m!)",
        "new n. (X<\\(Y). 0> | n. b!)",
    ] {
        let t = crate::parse::parse_term_with(
            &format!("\\(X). ({src})"),
            &crate::parse::ParseOptions::new(pid()),
        )?;
        let Term::Abs(_, body) = t else { unreachable!() };
        f.contexts.push(Probe::new((*body).clone(), &[]));
    }
    f.validate()?;
    Ok(f)
}

/// The two alpha-variants of a process that outputs a private name inside
/// its payload.
pub fn capture_pair() -> (Term, Term) {
    (
        term("new m. a!<\\(Y). m>. m!. b"),
        term("new n. a!<\\(Y). n>. n!. b"),
    )
}

pub fn replication_pair() -> (Term, Term) {
    (term("!a!<\\(Z). 0>.0"), term("a!<\\(Z). 0>. !a!<\\(Z). 0>.0"))
}

// ---------------------------------------------------------------------------
// Claims

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub what: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

impl Check {
    fn new(what: impl Into<String>, expected: impl Into<String>, observed: impl Into<String>) -> Check {
        let (expected, observed) = (expected.into(), observed.into());
        Check {
            what: what.into(),
            pass: expected == observed,
            expected,
            observed,
        }
    }

    fn holds(what: impl Into<String>, ok: bool, detail: impl Into<String>) -> Check {
        Check {
            what: what.into(),
            expected: "holds".into(),
            observed: if ok { "holds".into() } else { detail.into() },
            pass: ok,
        }
    }
}

fn label(v: &Result<Verdict, Error>) -> String {
    match v {
        Ok(v) => v.label().to_string(),
        Err(e) => format!("error: {e}"),
    }
}

fn verdict(what: impl Into<String>, v: Result<Verdict, Error>, want: &str) -> Check {
    Check::new(what, want, label(&v))
}

pub struct Claim {
    pub id: &'static str,
    /// What is being checked, in words.
    pub law: &'static str,
    pub commentary: Option<&'static str>,
    run: Box<dyn Fn(&ExploreBudget) -> Vec<Check> + Send + Sync>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub id: String,
    pub law: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub commentary: Option<String>,
}

impl ClaimReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}

fn congruence_claim(law: CongruenceLaw) -> Claim {
    Claim {
        id: law.id(),
        law: law.statement(),
        commentary: None,
        run: Box::new(move |_| {
            congruence_instances()
                .into_iter()
                .filter(|i| i.law == law)
                .map(|i| {
                    Check::new(
                        format!("{}  ==  {}", print_term(&i.left), print_term(&i.right)),
                        print_term(&normalize(&i.right)),
                        print_term(&normalize(&i.left)),
                    )
                })
                .collect()
        }),
    }
}

const NAME_INSTANTIATION: &str = "Without name-passing a process cannot forward a name it does \
not know in advance, so no single receiving environment can stand in for every instantiation \
of a name parameter. This argument is recorded here and not checked.";

fn pid_counterexample(budget: &ExploreBudget) -> Vec<Check> {
    let calc = CalcId::Pid(1);
    let mut out = Vec::new();
    let w = parse_term("(\\(x). x!)<d>", calc);
    let w2 = parse_term("(\\(x). x!)<e>", calc);
    match (w, w2) {
        (Ok(w), Ok(w2)) => {
            let visible = |t: &Term| -> Vec<(Action, Term)> {
                transitions(t, budget)
                    .unwrap_or_default()
                    .into_iter()
                    .filter(|(a, _)| !matches!(a, Action::Tau))
                    .collect()
            };
            let vw = visible(&w);
            let subjects = |v: &[(Action, Term)]| -> String {
                v.iter()
                    .map(|(a, r)| match a {
                        Action::Out { subject, .. } => {
                            format!("out {} -> {}", subject, print_term(r))
                        }
                        other => format!("{other} -> {}", print_term(r)),
                    })
                    .collect::<Vec<_>>()
                    .join("; ")
            };
            out.push(Check::new(
                "W = (\\(x). x!)<d> has one visible transition, an output on d to 0",
                "out d -> 0",
                subjects(&vw),
            ));
            out.push(Check::new(
                "applying the same abstraction to e moves the output to e",
                "out e -> 0",
                subjects(&visible(&w2)),
            ));
        }
        (w, w2) => out.push(Check::holds(
            "W parses",
            false,
            format!("{:?} {:?}", w.err().map(|e| e.to_string()), w2.err().map(|e| e.to_string())),
        )),
    }
    let trig = make_trigger(&Sym::new("m"), calc);
    out.push(Check::new(
        "no trigger exists in the name-parameterized calculus",
        "unsupported-calculus",
        match trig {
            Err(Error::UnsupportedCalculus { .. }) => "unsupported-calculus".to_string(),
            Err(e) => format!("error: {e}"),
            Ok(t) => print_term(&t),
        },
    ));
    let a = parse_term("\\(x). x!", calc).expect("abstraction parses");
    let z = Sym::new("z");
    let server = encode_replication(
        &Prefix::Input {
            subject: Name::c("m"),
            binder: Param::Name(z.clone()),
        },
        &Term::App(a.into(), vec![Arg::Name(Name::Var(z))]),
        calc,
    );
    out.push(Check::new(
        "the server !m(z).A<z> of normal bisimulation is ill-sorted",
        "sort error",
        match sort_check(&server, calc) {
            Err(_) => "sort error".to_string(),
            Ok(s) => format!("sort {s}"),
        },
    ));
    out
}

fn name_capture(budget: &ExploreBudget) -> Vec<Check> {
    let (p, q) = capture_pair();
    let mut out = vec![verdict(
        "normal bisimilarity of the alpha-variants",
        check_normal(&p, &q, Mode::Weak, budget),
        "bisimilar-up-to-bound",
    )];
    match capture_family() {
        Ok(f) => out.push(verdict(
            "context bisimilarity under receiving contexts that restrict m and n",
            check_context(&p, &q, Mode::Weak, &f, budget),
            "bisimilar-up-to-bound",
        )),
        Err(e) => out.push(Check::holds("capture family builds", false, e.to_string())),
    }
    out
}

fn intro_factorization(budget: &ExploreBudget) -> Vec<Check> {
    let e = term_open("X<\\(Y). 0> | b(W). W<\\(Z). 0>");
    let a = term("\\(Y). a!<\\(Z). b!>.0");
    let r = factorize(&e, &Sym::new("X"), &a, pid());
    match r {
        Ok(r) => vec![
            Check::new("case", "NonParameterized", format!("{:?}", r.case)),
            verdict(
                format!("{}  ~  {}", print_term(&r.original), print_term(&r.factored)),
                check_normal(&r.original, &r.factored, Mode::Weak, budget),
                "bisimilar-up-to-bound",
            ),
        ],
        Err(err) => vec![Check::holds("factorize", false, err.to_string())],
    }
}

/// A context with free hole `X`, parsed as the body of an abstraction.
fn term_open(src: &str) -> Term {
    match term(&format!("\\(X). ({src})")) {
        Term::Abs(_, b) => (*b).clone(),
        _ => unreachable!(),
    }
}

fn server_law(law: ServerLaw) -> impl Fn(&ExploreBudget) -> Vec<Check> {
    move |budget| {
        server_law_fixtures()
            .into_iter()
            .filter(|f| f.law == law)
            .map(|f| {
                verdict(
                    format!("{}  ~  {}", print_term(&f.left), print_term(&f.right)),
                    check_normal(&f.left, &f.right, Mode::Weak, budget),
                    "bisimilar-up-to-bound",
                )
            })
            .collect()
    }
}

fn factorization(parameterized: bool) -> impl Fn(&ExploreBudget) -> Vec<Check> {
    move |budget| {
        let mut out = Vec::new();
        for f in factorization_fixtures() {
            let r = match factorize(&f.context, &Sym::new("X"), &f.argument, pid()) {
                Ok(r) => r,
                Err(e) => {
                    out.push(Check::holds(f.name, false, e.to_string()));
                    continue;
                }
            };
            let is_param = matches!(r.case, FactorCase::Parameterized(_));
            if is_param != parameterized {
                continue;
            }
            let v = if is_param {
                check_abstraction(&r.original, &r.factored, Mode::Weak, budget)
            } else {
                check_normal(&r.original, &r.factored, Mode::Weak, budget)
            };
            out.push(verdict(f.name, v, "bisimilar-up-to-bound"));
        }
        out
    }
}

fn coincidence(budget: &ExploreBudget) -> Vec<Check> {
    let family = match default_context_family(pid(), Sort::AbsD(1)) {
        Ok(f) => f,
        Err(e) => return vec![Check::holds("default family builds", false, e.to_string())],
    };
    let mut out = Vec::new();
    for c in coincidence_corpus() {
        let want = if c.bisimilar {
            "bisimilar-up-to-bound"
        } else {
            "distinguished"
        };
        let n = check_normal(&c.left, &c.right, Mode::Weak, budget);
        let k = check_context(&c.left, &c.right, Mode::Weak, &family, budget);
        let replays = [&n, &k].iter().all(|v| match v {
            Ok(Verdict::Distinguished(w)) => replay_witness(&c.left, &c.right, w, budget).is_ok(),
            _ => true,
        });
        out.push(Check::new(
            c.name,
            format!("normal {want}, context {want}, witnesses replay"),
            format!(
                "normal {}, context {}, witnesses {}",
                label(&n),
                label(&k),
                if replays { "replay" } else { "do not replay" }
            ),
        ));
    }
    out
}

fn replication(budget: &ExploreBudget) -> Vec<Check> {
    let (p, q) = replication_pair();
    vec![verdict(
        format!("{}  ~  {}", print_term(&p), print_term(&q)),
        check_normal(&p, &q, Mode::Weak, budget),
        "bisimilar-up-to-bound",
    )]
}

/// Every registered claim, in a fixed order.
pub fn claims() -> Vec<Claim> {
    let mut v: Vec<Claim> = CongruenceLaw::ALL.iter().map(|&l| congruence_claim(l)).collect();
    let mut add = |id, law, commentary, run: Box<dyn Fn(&ExploreBudget) -> Vec<Check> + Send + Sync>| {
        v.push(Claim {
            id,
            law,
            commentary,
            run,
        })
    };
    add(
        "pid-counterexample",
        "in the name-parameterized calculus W = (\\(x). x!)<d> fires on d, and neither the trigger nor the server of normal bisimulation can be written",
        Some(NAME_INSTANTIATION),
        Box::new(pid_counterexample),
    );
    add(
        "name-capture",
        "alpha-convertible processes stay equivalent under receiving contexts that restrict a name of the payload",
        None,
        Box::new(name_capture),
    );
    add(
        "intro-factorization",
        "A<dummy> | Q ~ new m. (Tr_m<dummy> | Q | !m(Z).A<Z>)",
        None,
        Box::new(intro_factorization),
    );
    add(
        "server-law-prefix",
        "new m. (p.E[Tr_m] | S) ~ p. new m. (E[Tr_m] | S)",
        None,
        Box::new(server_law(ServerLaw::Prefix)),
    );
    add(
        "server-law-output-payload",
        "an output payload E2[Tr_m] may carry its own copy of the server",
        None,
        Box::new(server_law(ServerLaw::OutputPayload)),
    );
    add(
        "server-law-parallel",
        "new m. (E1[Tr_m] | E2[Tr_m] | S) ~ new m. (E1[Tr_m] | S) | new m. (E2[Tr_m] | S)",
        None,
        Box::new(server_law(ServerLaw::Parallel)),
    );
    add(
        "server-law-application",
        "B<new m. (E[Tr_m] | S)> ~ new m. (B<E[Tr_m]> | S)",
        None,
        Box::new(server_law(ServerLaw::Application)),
    );
    add(
        "factorization-non-parameterized",
        "E[A] ~ new m. (E[Tr_m] | !m(Z).A<Z>) when E[Tr_m] is a process",
        None,
        Box::new(factorization(false)),
    );
    add(
        "factorization-parameterized",
        "E[A] ~ \\(Y1..Yk). new m. (E' | !m(Z).A<Z>) when E[Tr_m] is \\(Y1..Yk). E'",
        None,
        Box::new(factorization(true)),
    );
    add(
        "coincidence-sampling",
        "normal and context bisimilarity agree on a corpus of designed pairs",
        None,
        Box::new(coincidence),
    );
    add(
        "replication",
        "!a!<\\(Z). 0>.0 ~ a!<\\(Z). 0>. !a!<\\(Z). 0>.0",
        None,
        Box::new(replication),
    );
    v
}

pub fn claim_ids() -> Vec<&'static str> {
    claims().iter().map(|c| c.id).collect()
}

fn execute(c: &Claim, budget: &ExploreBudget) -> ClaimReport {
    let t = Instant::now();
    let checks = (c.run)(budget);
    ClaimReport {
        id: c.id.to_string(),
        law: c.law.to_string(),
        pass: !checks.is_empty() && checks.iter().all(|k| k.pass),
        checks,
        elapsed_ms: t.elapsed().as_secs_f64() * 1e3,
        commentary: c.commentary.map(str::to_string),
    }
}

pub fn run_claim(id: &str, budget: &ExploreBudget) -> Result<ClaimReport, Error> {
    claims()
        .iter()
        .find(|c| c.id == id)
        .map(|c| execute(c, budget))
        .ok_or_else(|| Error::UnknownClaim(id.to_string()))
}

/// Runs the claims whose id contains `filter` (all of them for `None`).
pub fn run_all(filter: Option<&str>, budget: &ExploreBudget, parallel: bool) -> Vec<ClaimReport> {
    let selected: Vec<Claim> = claims()
        .into_iter()
        .filter(|c| filter.map_or(true, |f| c.id.contains(f)))
        .collect();
    if parallel {
        par::map(&selected, |c| execute(c, budget))
    } else {
        par::map_seq(&selected, |c| execute(c, budget))
    }
}

pub fn reports_to_json(reports: &[ClaimReport]) -> serde_json::Value {
    json!({
        "claims": reports.iter().map(ClaimReport::to_json).collect::<Vec<_>>(),
        "passed": reports.iter().filter(|r| r.pass).count(),
        "total": reports.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::subst;

    #[test]
    fn every_law_has_five_instances() {
        let inst = congruence_instances();
        for law in CongruenceLaw::ALL {
            assert!(inst.iter().filter(|i| i.law == law).count() >= 5, "{law:?}");
        }
    }

    #[test]
    fn corpus_is_balanced() {
        let c = coincidence_corpus();
        assert_eq!(c.iter().filter(|p| p.bisimilar).count(), 15);
        assert_eq!(c.iter().filter(|p| !p.bisimilar).count(), 15);
    }

    #[test]
    fn unknown_claim_is_an_error() {
        let e = run_claim("no-such-claim", &ExploreBudget::default()).unwrap_err();
        assert!(matches!(e, Error::UnknownClaim(_)));
    }

    #[test]
    fn claim_ids_are_unique() {
        let ids = claim_ids();
        let set: std::collections::BTreeSet<_> = ids.iter().collect();
        assert_eq!(set.len(), ids.len());
    }

    /// Putting the payload under `new m` by textual replacement captures
    /// its `m`; substitution renames the binder instead.
    #[test]
    fn substitution_avoids_capture() {
        let ctx = term_open("new m. (X<\\(Y). 0> | m!)");
        let payload = term("\\(Y). m");
        let naive = print_term(&ctx).replace("X<", &format!("({})<", print_term(&payload)));
        let naive = normalize(&term(&naive));
        let proper = normalize(&subst(&ctx, &crate::syntax::Subst::term(Sym::new("X"), payload)));
        assert_ne!(naive, proper);
        assert!(crate::syntax::free_names(&proper).contains(&Sym::new("m")));
        assert!(!crate::syntax::free_names(&naive).contains(&Sym::new("m")));
    }
}
