//! Bounded, on-the-fly bisimilarity checking.
//!
//! A pair graph is explored breadth-first from the two processes. Every pair
//! carries one obligation per move of either side; an obligation lists the
//! replies of the other side, and a reply is good when all the pairs it leads
//! to are still alive. Pairs are killed greatest-fixpoint style, and the round
//! in which a pair dies is its rank, which orders the distinguishing trace.
//!
//! Unexpanded pairs (depth or state budget) are never killed, so a
//! `Distinguished` verdict does not depend on the budget.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::par;
use crate::print::print_term;
use crate::semantics::{
    commitments, normalize, tau_closure, transitions, trigger, Action, Commitment, ExploreBudget,
    WeakClosure,
};
use crate::sort::sort_check;
use crate::syntax::{
    dummy_abstraction, free_names, free_names_in_order, free_vars, fresh_name, is_closed,
    rename_consts, subst, symbols, Arg, CalcId, Name, Param, Sort, Subst, Sym, Term, VarRef,
    RESERVED_PREFIX,
};
use crate::transforms::{encode_replication, trigger_server, Prefix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strong,
    Weak,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InconclusiveReason {
    BudgetExhausted,
    TauCapHit,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Distinguished(Witness),
    BisimilarUpToBound {
        states_explored: usize,
        budget: ExploreBudget,
    },
    Inconclusive {
        reason: InconclusiveReason,
        states_explored: usize,
    },
}

impl Verdict {
    pub fn is_distinguished(&self) -> bool {
        matches!(self, Verdict::Distinguished(_))
    }

    pub fn is_bisimilar(&self) -> bool {
        matches!(self, Verdict::BisimilarUpToBound { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Distinguished(_) => "distinguished",
            Verdict::BisimilarUpToBound { .. } => "bisimilar-up-to-bound",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Verdict::Distinguished(w) => json!({"verdict": self.label(), "witness": w.to_json()}),
            Verdict::BisimilarUpToBound {
                states_explored,
                budget,
            } => json!({
                "verdict": self.label(),
                "states_explored": states_explored,
                "budget": {
                    "max_states": budget.max_states,
                    "max_tau_chain": budget.max_tau_chain,
                    "max_depth": budget.max_depth,
                },
            }),
            Verdict::Inconclusive {
                reason,
                states_explored,
            } => json!({
                "verdict": self.label(),
                "reason": reason,
                "states_explored": states_explored,
            }),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Distinguished(w) => {
                writeln!(f, "distinguished")?;
                write!(f, "{w}")
            }
            Verdict::BisimilarUpToBound {
                states_explored, ..
            } => write!(f, "bisimilar up to bound ({states_explored} pairs explored)"),
            Verdict::Inconclusive {
                reason,
                states_explored,
            } => {
                let r = match reason {
                    InconclusiveReason::BudgetExhausted => "state budget exhausted",
                    InconclusiveReason::TauCapHit => "internal-step chain cap hit",
                };
                write!(f, "inconclusive: {r} ({states_explored} pairs explored)")
            }
        }
    }
}

/// How the defender answered a move, and the pair it led to.
#[derive(Clone, Debug, PartialEq)]
pub struct Reply {
    pub action: Action,
    pub after: Term,
    /// Index of the receiving context the trace continues in.
    pub probe: Option<usize>,
    pub next: (Term, Term),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessStep {
    pub before: (Term, Term),
    pub side: Side,
    pub action: Action,
    pub attacker_after: Term,
    /// `None` on the last step: the defender has no reply at all.
    pub reply: Option<Reply>,
}

/// A distinguishing trace. Every step is a move of one side; the last one
/// cannot be answered by the other side.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub mode: Mode,
    pub steps: Vec<WitnessStep>,
}

impl Witness {
    pub fn to_json(&self) -> serde_json::Value {
        let pair = |p: &(Term, Term)| json!([print_term(&p.0), print_term(&p.1)]);
        let steps: Vec<_> = self
            .steps
            .iter()
            .map(|s| {
                json!({
                    "side": s.side,
                    "action": s.action.to_string(),
                    "state_before": pair(&s.before),
                    "state_after": print_term(&s.attacker_after),
                    "reply": s.reply.as_ref().map(|r| json!({
                        "action": r.action.to_string(),
                        "state_after": print_term(&r.after),
                        "probe": r.probe,
                        "next": pair(&r.next),
                    })),
                })
            })
            .collect();
        json!({ "mode": self.mode, "steps": steps })
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            let side = match s.side {
                Side::Left => "left",
                Side::Right => "right",
            };
            writeln!(
                f,
                "{i}: {}  ~  {}",
                print_term(&s.before.0),
                print_term(&s.before.1)
            )?;
            writeln!(f, "   {side} does {} -> {}", s.action, print_term(&s.attacker_after))?;
            match &s.reply {
                Some(r) => writeln!(f, "   other side answers {} -> {}", r.action, print_term(&r.after))?,
                None => writeln!(f, "   other side cannot answer")?,
            }
        }
        Ok(())
    }
}

/// A term with placeholder names that are made fresh at each use.
#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub term: Term,
    /// Free names replaced by fresh ones.
    pub fresh: Vec<Sym>,
    /// If set, the probe is used once for every free name of the pair under
    /// test, with this placeholder standing for it.
    pub any_name: Option<Sym>,
}

impl Probe {
    pub fn new(term: Term, fresh: &[&str]) -> Probe {
        Probe {
            term,
            fresh: fresh.iter().map(|s| Sym::new(s)).collect(),
            any_name: None,
        }
    }
}

/// Finite stand-in for "every receiving context" and "every received
/// payload".
#[derive(Clone, Debug)]
pub struct ContextFamily {
    pub calc: CalcId,
    pub hole: Sym,
    pub contexts: Vec<Probe>,
    pub payloads: Vec<Probe>,
}

impl ContextFamily {
    /// Sort-checks every member.
    pub fn validate(&self) -> Result<(), Error> {
        for p in self.contexts.iter() {
            crate::sort::check_process(&p.term, self.calc)?;
            let fv = free_vars(&p.term);
            if fv.iter().any(|v| *v != VarRef::Proc(self.hole.clone())) {
                return Err(Error::OpenTerm {
                    name: print_term(&p.term),
                    vars: format!("{fv:?}"),
                });
            }
        }
        for p in &self.payloads {
            let s = sort_check(&p.term, self.calc)?;
            if s != self.calc.payload_sort() {
                return Err(crate::error::SortError {
                    path: String::new(),
                    reason: format!("payload has sort {s}, expected {}", self.calc.payload_sort()),
                }
                .into());
            }
        }
        Ok(())
    }
}

/// Receiving contexts and payloads used by [`check_context`] when none are
/// given. `hole_sort` must be the calculus' payload sort.
pub fn default_context_family(calc: CalcId, hole_sort: Sort) -> Result<ContextFamily, Error> {
    if hole_sort != calc.payload_sort() {
        return Err(crate::error::SortError {
            path: String::new(),
            reason: format!("hole sort {hole_sort} is not the payload sort of {calc}"),
        }
        .into());
    }
    let x = || Term::var("X");
    let o = || Name::c("o");
    let d = dummy_abstraction(calc);
    let app = |args: Vec<Arg>| Term::app(x(), args);
    let (contexts, payloads) = match calc {
        CalcId::PiD(1) => {
            let bark = Term::abs1("Z", Term::output(o(), d.clone(), Term::Nil));
            let t = |n: &str| Arg::Term(trigger(&Sym::new(n)));
            let ctx = vec![
                Probe::new(Term::Nil, &[]),
                Probe::new(app(vec![Arg::Term(bark)]), &["o"]),
                Probe::new(app(vec![t("o")]), &["o"]),
                Probe::new(
                    Term::par(app(vec![Arg::Term(d.clone())]), app(vec![t("o")])),
                    &["o"],
                ),
                Probe::new(
                    Term::res(
                        "k",
                        Term::par(
                            app(vec![t("k")]),
                            Term::input(
                                Name::c("k"),
                                "Y",
                                Term::output(o(), d.clone(), Term::Nil),
                            ),
                        ),
                    ),
                    &["o"],
                ),
                Probe::new(
                    encode_replication(
                        &Prefix::Input {
                            subject: o(),
                            binder: Param::Proc(Sym::new("Z")),
                        },
                        &app(vec![Arg::Term(Term::var("Z"))]),
                        calc,
                    ),
                    &["o"],
                ),
            ];
            let pay = vec![
                Probe::new(trigger(&Sym::new("o")), &["o"]),
                Probe::new(d.clone(), &[]),
                Probe::new(
                    Term::abs1(
                        "Z",
                        Term::output(
                            o(),
                            d.clone(),
                            Term::app(Term::var("Z"), vec![Arg::Term(d.clone())]),
                        ),
                    ),
                    &["o"],
                ),
            ];
            (ctx, pay)
        }
        CalcId::PiD(n) => {
            let args = vec![Arg::Term(d.clone()); n];
            let bark = Term::abs(
                (0..n).map(|i| Param::Proc(Sym::new(&format!("Z{i}")))).collect(),
                Term::output(o(), d.clone(), Term::Nil),
            );
            (
                vec![
                    Probe::new(Term::Nil, &[]),
                    Probe::new(app(args.clone()), &[]),
                    Probe::new(Term::par(app(args.clone()), app(args)), &[]),
                ],
                vec![Probe::new(d.clone(), &[]), Probe::new(bark, &["o"])],
            )
        }
        CalcId::Pid(n) => {
            let names = |s: &str| vec![Arg::Name(Name::c(s)); n];
            let ys: Vec<Param> = (0..n).map(|i| Param::Name(Sym::new(&format!("y{i}")))).collect();
            let echo = Term::abs(
                ys.clone(),
                Term::output(Name::Var(Sym::new("y0")), d.clone(), Term::Nil),
            );
            let bark = Term::abs(ys, Term::output(o(), d.clone(), Term::Nil));
            let mut per_name = Probe::new(app(names("n")), &[]);
            per_name.any_name = Some(Sym::new("n"));
            (
                vec![
                    Probe::new(Term::Nil, &[]),
                    Probe::new(app(names("o")), &["o"]),
                    Probe::new(Term::par(app(names("o")), app(names("o"))), &["o"]),
                    per_name,
                    Probe::new(
                        Term::res(
                            "k",
                            Term::par(
                                app(names("k")),
                                Term::input(
                                    Name::c("k"),
                                    "Y",
                                    Term::output(o(), d.clone(), Term::Nil),
                                ),
                            ),
                        ),
                        &["o"],
                    ),
                ],
                vec![
                    Probe::new(d.clone(), &[]),
                    Probe::new(echo, &[]),
                    Probe::new(bark, &["o"]),
                ],
            )
        }
        CalcId::Pi => (
            vec![
                Probe::new(Term::Nil, &[]),
                Probe::new(x(), &[]),
                Probe::new(Term::par(x(), x()), &[]),
            ],
            vec![
                Probe::new(Term::Nil, &[]),
                Probe::new(Term::output(o(), Term::Nil, Term::Nil), &["o"]),
            ],
        ),
    };
    Ok(ContextFamily {
        calc,
        hole: Sym::new("X"),
        contexts,
        payloads,
    })
}

/// Normal bisimilarity of two closed processes of the single-parameter
/// process-passing calculus.
pub fn check_normal(p: &Term, q: &Term, mode: Mode, budget: &ExploreBudget) -> Result<Verdict, Error> {
    check_with(p, q, mode, Relation::Normal, budget, true)
}

/// Context bisimilarity relative to a finite family of receiving contexts
/// and payloads. `Distinguished` is a real inequivalence; a positive answer
/// only covers the family.
pub fn check_context(
    p: &Term,
    q: &Term,
    mode: Mode,
    family: &ContextFamily,
    budget: &ExploreBudget,
) -> Result<Verdict, Error> {
    check_with(p, q, mode, Relation::Context(family), budget, true)
}

/// Which bisimulation to check.
#[derive(Clone, Copy, Debug)]
pub enum Relation<'a> {
    Normal,
    Context(&'a ContextFamily),
}

/// [`check_normal`] / [`check_context`] with the frontier expanded either in
/// parallel or on the calling thread.
pub fn check_with(
    p: &Term,
    q: &Term,
    mode: Mode,
    rel: Relation<'_>,
    budget: &ExploreBudget,
    parallel: bool,
) -> Result<Verdict, Error> {
    let calc = match rel {
        Relation::Normal => CalcId::PiD(1),
        Relation::Context(f) => f.calc,
    };
    for t in [p, q] {
        if sort_check(t, calc)? != Sort::Proc {
            return Err(Error::NotAProcess);
        }
        if !is_closed(t) {
            let vars: Vec<String> = free_vars(t)
                .iter()
                .map(|v| match v {
                    VarRef::Proc(s) | VarRef::Name(s) => s.to_string(),
                })
                .collect();
            return Err(Error::OpenTerm {
                name: print_term(t),
                vars: vars.join(", "),
            });
        }
    }
    let mut engine = Engine {
        rel,
        mode,
        budget,
        up_to: true,
        commits: DashMap::new(),
        canon: DashMap::new(),
        closures: DashMap::new(),
    };
    let v = engine.run(p, q, parallel);
    if !v.is_distinguished() {
        return Ok(v);
    }
    // cancelling shared components is only sound for the positive answer
    engine.up_to = false;
    engine.canon.clear();
    Ok(engine.run(p, q, parallel))
}

/// Abstractions are compared through their instances: process parameters
/// receive distinct fresh triggers (normal bisimilarity), name parameters
/// range over the free names of both sides plus two fresh ones (context
/// bisimilarity with the default family).
pub fn check_abstraction(
    f: &Term,
    g: &Term,
    mode: Mode,
    budget: &ExploreBudget,
) -> Result<Verdict, Error> {
    let (Term::Abs(ps, _), Term::Abs(qs, _)) = (f, g) else {
        return Err(crate::error::SortError {
            path: String::new(),
            reason: "both terms must be abstractions".into(),
        }
        .into());
    };
    let calc = match ps[0] {
        Param::Proc(_) => CalcId::PiD(ps.len()),
        Param::Name(_) => CalcId::Pid(ps.len()),
    };
    let (sf, sg) = (sort_check(f, calc)?, sort_check(g, calc)?);
    if sf != sg || qs.len() != ps.len() {
        return Err(crate::error::SortError {
            path: String::new(),
            reason: format!("abstractions of different sorts {sf} and {sg}"),
        }
        .into());
    }
    let mut avoid = symbols(f);
    avoid.extend(symbols(g));
    match calc {
        CalcId::PiD(1) => {
            let m = fresh_name(&avoid);
            let arg = vec![Arg::Term(trigger(&m))];
            check_normal(
                &Term::app(f.clone(), arg.clone()),
                &Term::app(g.clone(), arg),
                mode,
                budget,
            )
        }
        CalcId::Pid(1) => {
            let mut names: Vec<Sym> = free_names(f).into_iter().collect();
            for n in free_names(g) {
                if !names.contains(&n) {
                    names.push(n);
                }
            }
            for _ in 0..2 {
                let n = fresh_name(&avoid);
                avoid.insert(n.clone());
                names.push(n);
            }
            let family = default_context_family(calc, calc.payload_sort())?;
            let mut total = 0;
            let mut pending: Option<Verdict> = None;
            for n in names {
                let arg = vec![Arg::Name(Name::Const(n))];
                let v = check_context(
                    &Term::app(f.clone(), arg.clone()),
                    &Term::app(g.clone(), arg),
                    mode,
                    &family,
                    budget,
                )?;
                match v {
                    Verdict::Distinguished(_) => return Ok(v),
                    Verdict::BisimilarUpToBound { states_explored, .. } => total += states_explored,
                    Verdict::Inconclusive { .. } => {
                        pending.get_or_insert(v);
                    }
                }
            }
            Ok(pending.unwrap_or(Verdict::BisimilarUpToBound {
                states_explored: total,
                budget: budget.clone(),
            }))
        }
        _ => Err(Error::UnsupportedCalculus {
            calc,
            reason: "abstraction checking covers single-parameter abstractions".into(),
        }),
    }
}

// ---------------------------------------------------------------------------
// Pair graph

#[derive(Clone, Debug)]
enum Want {
    Tau,
    In { subject: Sym, payload: Term },
    Out { subject: Sym },
}

impl Want {
    fn of(a: &Action) -> Want {
        match a {
            Action::Tau => Want::Tau,
            Action::In { subject, payload } => Want::In {
                subject: subject.clone(),
                payload: payload.clone(),
            },
            Action::Out { subject, .. } => Want::Out {
                subject: subject.clone(),
            },
        }
    }
}

#[derive(Clone, Debug)]
struct Cand {
    action: Action,
    after: Term,
    /// Successor pairs with the receiving context they come from.
    succ: Vec<(Option<usize>, (Term, Term))>,
    ids: Vec<usize>,
}

#[derive(Clone, Debug)]
struct Obl {
    side: Side,
    action: Action,
    after: Term,
    cands: Vec<Cand>,
}

#[derive(Clone, Debug)]
struct Expansion {
    obls: Vec<Obl>,
    capped: bool,
}

struct Node {
    pair: (Term, Term),
    depth: usize,
    exp: Option<Expansion>,
}

struct Engine<'a> {
    rel: Relation<'a>,
    mode: Mode,
    budget: &'a ExploreBudget,
    /// Work up to parallel composition: components present on both sides
    /// are dropped.
    up_to: bool,
    commits: DashMap<Term, Arc<Vec<Commitment>>>,
    canon: DashMap<(Term, Term), (Term, Term)>,
    closures: DashMap<Term, Arc<WeakClosure>>,
}

/// Normalizes both sides and renames the fresh names they share to a
/// canonical sequence, so pairs that differ only in the choice of fresh
/// names coincide.
pub(crate) fn canon_pair(l: &Term, r: &Term) -> (Term, Term) {
    let (mut l, mut r) = (collect_garbage(&normalize(l)), collect_garbage(&normalize(r)));
    for _ in 0..4 {
        let mut order = free_names_in_order(&l);
        for n in free_names_in_order(&r) {
            if !order.contains(&n) {
                order.push(n);
            }
        }
        let map: BTreeMap<Sym, Sym> = order
            .into_iter()
            .filter(|s| s.as_str().starts_with(RESERVED_PREFIX))
            .enumerate()
            .map(|(i, s)| (s, Sym::new(&format!("{RESERVED_PREFIX}f{i}"))))
            .filter(|(a, b)| a != b)
            .collect();
        if map.is_empty() {
            break;
        }
        l = normalize(&rename_consts(&l, &map));
        r = normalize(&rename_consts(&r, &map));
    }
    (l, r)
}

#[derive(Default)]
struct Usage {
    input: bool,
    output: bool,
    escapes: bool,
}

fn usage(t: &Term, c: &Sym, u: &mut Usage) {
    let is_c = |n: &Name| matches!(n, Name::Const(s) if s == c);
    match t {
        Term::Nil | Term::Var(_) => {}
        Term::Input(a, _, k) => {
            u.input |= is_c(a);
            usage(k, c, u);
        }
        Term::Output(a, p, k) => {
            u.output |= is_c(a);
            usage(p, c, u);
            usage(k, c, u);
        }
        Term::Par(p, q) => {
            usage(p, c, u);
            usage(q, c, u);
        }
        Term::Res(d, p) => {
            if d != c {
                usage(p, c, u);
            }
        }
        Term::Abs(_, p) => usage(p, c, u),
        Term::App(f, args) => {
            usage(f, c, u);
            for a in args {
                match a {
                    Arg::Term(t) => usage(t, c, u),
                    Arg::Name(n) => u.escapes |= is_c(n),
                }
            }
        }
    }
}

fn kill_prefixes(t: &Term, c: &Sym) -> Term {
    let is_c = |n: &Name| matches!(n, Name::Const(s) if s == c);
    match t {
        Term::Nil | Term::Var(_) => t.clone(),
        Term::Input(a, _, _) | Term::Output(a, _, _) if is_c(a) => Term::Nil,
        Term::Input(a, x, k) => Term::Input(a.clone(), x.clone(), Arc::new(kill_prefixes(k, c))),
        Term::Output(a, p, k) => Term::Output(
            a.clone(),
            Arc::new(kill_prefixes(p, c)),
            Arc::new(kill_prefixes(k, c)),
        ),
        Term::Par(p, q) => Term::Par(Arc::new(kill_prefixes(p, c)), Arc::new(kill_prefixes(q, c))),
        Term::Res(d, _) if d == c => t.clone(),
        Term::Res(d, p) => Term::Res(d.clone(), Arc::new(kill_prefixes(p, c))),
        Term::Abs(xs, p) => Term::Abs(xs.clone(), Arc::new(kill_prefixes(p, c))),
        Term::App(f, args) => Term::App(
            Arc::new(kill_prefixes(f, c)),
            args.iter()
                .map(|a| match a {
                    Arg::Term(t) => Arg::Term(kill_prefixes(t, c)),
                    Arg::Name(_) => a.clone(),
                })
                .collect(),
        ),
    }
}

/// Drops prefixes that can never fire: on a restricted name that is never
/// passed on and is used only for input, or only for output, nobody can
/// ever synchronize. Such prefixes behave like `0`.
pub(crate) fn collect_garbage(t: &Term) -> Term {
    fn go(t: &Term, changed: &mut bool) -> Term {
        match t {
            Term::Res(c, p) => {
                let p = go(p, changed);
                let mut u = Usage::default();
                usage(&p, c, &mut u);
                if !u.escapes && (u.input != u.output) {
                    *changed = true;
                    Term::Res(c.clone(), Arc::new(kill_prefixes(&p, c)))
                } else {
                    Term::Res(c.clone(), Arc::new(p))
                }
            }
            Term::Par(p, q) => Term::Par(Arc::new(go(p, changed)), Arc::new(go(q, changed))),
            _ => t.clone(),
        }
    }
    let mut cur = t.clone();
    loop {
        let mut changed = false;
        let next = go(&cur, &mut changed);
        if !changed {
            return cur;
        }
        cur = normalize(&next);
    }
}

/// Bound on the internal steps [`settle`] performs on one term.
const SETTLE_FUEL: usize = 64;

/// Performs internal steps that cannot be observed and commute with
/// everything else, so that the result is weakly bisimilar to the input:
///
/// * a communication on a restricted name with exactly one receiver and one
///   sender, when no other component mentions the name;
/// * a message to a replicated server on a restricted name that has no other
///   receiver and is never passed on.
pub(crate) fn settle(t: &Term) -> Term {
    let mut cur = normalize(t);
    for _ in 0..SETTLE_FUEL {
        match fire_inert(&cur) {
            Some(next) => cur = normalize(&next),
            None => break,
        }
    }
    cur
}

fn fire_inert(t: &Term) -> Option<Term> {
    match t {
        Term::Par(..) => {
            let items = crate::print::par_items(t);
            for (i, it) in items.iter().enumerate() {
                if let Some(n) = fire_inert(it) {
                    let mut v: Vec<Term> = items.iter().map(|x| (*x).clone()).collect();
                    v[i] = n;
                    return Some(Term::par_all(v));
                }
            }
            None
        }
        Term::Res(..) => {
            let mut names = Vec::new();
            let mut body = t;
            while let Term::Res(c, b) = body {
                names.push(c.clone());
                body = b;
            }
            let members: Vec<Term> = crate::print::par_items(body).into_iter().cloned().collect();
            for c in &names {
                if let Some(ms) = single_use(c, &members).or_else(|| to_server(c, &names, &members)) {
                    return Some(Term::res_all(&names, Term::par_all(ms)));
                }
            }
            for (i, m) in members.iter().enumerate() {
                if let Some(n) = fire_inert(m) {
                    let mut v = members.clone();
                    v[i] = n;
                    return Some(Term::res_all(&names, Term::par_all(v)));
                }
            }
            None
        }
        _ => None,
    }
}

fn on(c: &Sym, n: &Name) -> bool {
    matches!(n, Name::Const(s) if s == c)
}

fn single_use(c: &Sym, members: &[Term]) -> Option<Vec<Term>> {
    let mut inp = None;
    let mut out = None;
    for (i, m) in members.iter().enumerate() {
        match m {
            Term::Input(a, _, _) if on(c, a) && inp.is_none() => inp = Some(i),
            Term::Output(a, _, _) if on(c, a) && out.is_none() => out = Some(i),
            _ if free_names(m).contains(c) => return None,
            _ => {}
        }
    }
    let (i, o) = (inp?, out?);
    let (Term::Input(_, Param::Proc(x), q), Term::Output(_, a, k)) = (&members[i], &members[o]) else {
        return None;
    };
    let mut v: Vec<Term> = members
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i && *j != o)
        .map(|(_, m)| m.clone())
        .collect();
    v.push(subst(q, &Subst::term(x.clone(), (**a).clone())));
    v.push((**k).clone());
    Some(v)
}

/// Replicated servers in a block: either a member on its own, or the two
/// members sharing one of the block's names.
fn servers(names: &[Sym], members: &[Term]) -> Vec<(Vec<usize>, Term)> {
    let mut out = Vec::new();
    for (i, m) in members.iter().enumerate() {
        if let Some(p) = crate::print::as_replication(m) {
            out.push((vec![i], p));
        }
    }
    for e in names {
        let users: Vec<usize> = (0..members.len())
            .filter(|&i| free_names(&members[i]).contains(e))
            .collect();
        if users.len() != 2 {
            continue;
        }
        let t = Term::Res(
            e.clone(),
            Arc::new(Term::par(members[users[0]].clone(), members[users[1]].clone())),
        );
        if let Some(p) = crate::print::as_replication(&t) {
            out.push((users, p));
        }
    }
    out
}

fn to_server(c: &Sym, names: &[Sym], members: &[Term]) -> Option<Vec<Term>> {
    let mut server = None;
    for (idx, p) in servers(names, members) {
        if let Term::Input(a, Param::Proc(x), body) = p {
            if on(c, &a) {
                if server.is_some() {
                    return None;
                }
                server = Some((idx, x, body));
            }
        }
    }
    let (idx, x, body) = server?;
    let quiet = |t: &Term| {
        let mut u = Usage::default();
        usage(t, c, &mut u);
        !u.input && !u.escapes
    };
    if !quiet(&body) {
        return None;
    }
    let mut msg = None;
    for (i, m) in members.iter().enumerate() {
        if idx.contains(&i) {
            continue;
        }
        if !quiet(m) {
            return None;
        }
        if msg.is_none() && matches!(m, Term::Output(a, _, _) if on(c, a)) {
            msg = Some(i);
        }
    }
    let mi = msg?;
    let Term::Output(_, a, k) = &members[mi] else { unreachable!() };
    let mut v: Vec<Term> = members
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != mi)
        .map(|(_, m)| m.clone())
        .collect();
    v.push(subst(&body, &Subst::term(x, (**a).clone())));
    v.push((**k).clone());
    Some(v)
}

/// Removes the parallel components the two sides have in common.
fn cancel_common(l: &Term, r: &Term) -> Option<(Term, Term)> {
    let mut ls: Vec<&Term> = crate::print::par_items(l);
    let mut rs: Vec<&Term> = crate::print::par_items(r);
    let before = ls.len();
    ls.retain(|t| match rs.iter().position(|u| u == t) {
        Some(i) => {
            rs.remove(i);
            false
        }
        None => true,
    });
    if ls.len() == before {
        return None;
    }
    let rebuild = |v: Vec<&Term>| Term::par_all(v.into_iter().cloned());
    Some((rebuild(ls), rebuild(rs)))
}

/// Renames the extruded names of an output away from `avoid`.
fn apart(
    extruded: &[Sym],
    payload: &Term,
    residual: &Term,
    avoid: &BTreeSet<Sym>,
) -> (Vec<Sym>, Term, Term) {
    let mut used = avoid.clone();
    used.extend(symbols(payload));
    used.extend(symbols(residual));
    let mut map = BTreeMap::new();
    let mut out = Vec::new();
    for c in extruded {
        if avoid.contains(c) {
            let n = fresh_name(&used);
            used.insert(n.clone());
            map.insert(c.clone(), n.clone());
            out.push(n);
        } else {
            out.push(c.clone());
        }
    }
    if map.is_empty() {
        (out, payload.clone(), residual.clone())
    } else {
        (out, rename_consts(payload, &map), rename_consts(residual, &map))
    }
}

fn orient(side: Side, mine: Term, theirs: Term) -> (Term, Term) {
    match side {
        Side::Left => (mine, theirs),
        Side::Right => (theirs, mine),
    }
}

impl Engine<'_> {
    fn commits(&self, t: &Term) -> Arc<Vec<Commitment>> {
        if let Some(c) = self.commits.get(t) {
            return c.clone();
        }
        let cs: Vec<Commitment> = commitments(t)
            .into_iter()
            .map(|c| match c {
                Commitment::Tau(r) => Commitment::Tau(normalize(&r)),
                Commitment::Out {
                    extruded,
                    subject,
                    payload,
                    residual,
                } => Commitment::Out {
                    extruded,
                    subject,
                    payload: normalize(&payload),
                    residual: normalize(&residual),
                },
                other => other,
            })
            .collect();
        let cs = Arc::new(cs);
        self.commits.insert(t.clone(), cs.clone());
        cs
    }

    fn closure(&self, t: &Term) -> Arc<WeakClosure> {
        if let Some(c) = self.closures.get(t) {
            return c.clone();
        }
        let c = Arc::new(tau_closure(t.clone(), self.budget.max_tau_chain, |s| {
            self.commits(s)
                .iter()
                .filter_map(|c| match c {
                    Commitment::Tau(r) => Some(r.clone()),
                    _ => None,
                })
                .collect()
        }));
        self.closures.insert(t.clone(), c.clone());
        c
    }

    /// Single steps of `t` matching `want`. Output names are renamed apart
    /// from `avoid`.
    fn steps(&self, t: &Term, want: &Want, avoid: &BTreeSet<Sym>) -> Vec<(Action, Term)> {
        let mut out = Vec::new();
        for c in self.commits(t).iter() {
            match (c, want) {
                (Commitment::Tau(r), Want::Tau) => out.push((Action::Tau, r.clone())),
                (
                    Commitment::In {
                        subject,
                        binder,
                        residual,
                    },
                    Want::In {
                        subject: s,
                        payload,
                    },
                ) if subject == s => out.push((
                    Action::In {
                        subject: s.clone(),
                        payload: payload.clone(),
                    },
                    Commitment::instantiate(binder, residual, payload),
                )),
                (
                    Commitment::Out {
                        extruded,
                        subject,
                        payload,
                        residual,
                    },
                    Want::Out { subject: s },
                ) if subject == s => {
                    let (ext, pay, res) = apart(extruded, payload, residual, avoid);
                    out.push((
                        Action::Out {
                            extruded: ext,
                            subject: s.clone(),
                            payload: pay,
                        },
                        res,
                    ))
                }
                _ => {}
            }
        }
        out
    }

    /// Replies of `y` to a move labelled like `want`: single steps in strong
    /// mode, `=> step =>` in weak mode (plain `=>` for internal moves).
    fn replies(&self, y: &Term, want: &Want, avoid: &BTreeSet<Sym>) -> (Vec<(Action, Term)>, bool) {
        match self.mode {
            Mode::Strong => (self.steps(y, want, avoid), false),
            Mode::Weak => {
                let pre = self.closure(y);
                let mut capped = pre.capped;
                if let Want::Tau = want {
                    let v = pre.states.iter().map(|s| (Action::Tau, s.clone())).collect();
                    return (v, capped);
                }
                let mut out = BTreeSet::new();
                for y1 in &pre.states {
                    for (a, y2) in self.steps(y1, want, avoid) {
                        let post = self.closure(&y2);
                        capped |= post.capped;
                        for y3 in &post.states {
                            out.insert((a.clone(), y3.clone()));
                        }
                    }
                }
                (out.into_iter().collect(), capped)
            }
        }
    }

    fn instances(&self, probes: &[Probe], pair: &(Term, Term), avoid: &mut BTreeSet<Sym>) -> Vec<(usize, Term)> {
        let mut out = Vec::new();
        let mut pair_names: Vec<Sym> = free_names(&pair.0).into_iter().collect();
        for n in free_names(&pair.1) {
            if !pair_names.contains(&n) {
                pair_names.push(n);
            }
        }
        for (i, p) in probes.iter().enumerate() {
            let choices: Vec<Option<&Sym>> = match &p.any_name {
                Some(_) => pair_names.iter().map(Some).collect(),
                None => vec![None],
            };
            for choice in choices {
                let mut map = BTreeMap::new();
                for f in &p.fresh {
                    let n = fresh_name(avoid);
                    avoid.insert(n.clone());
                    map.insert(f.clone(), n);
                }
                if let (Some(ph), Some(n)) = (&p.any_name, choice) {
                    map.insert(ph.clone(), n.clone());
                }
                out.push((i, rename_consts(&p.term, &map)));
            }
        }
        out
    }

    fn expand(&self, pair: &(Term, Term)) -> Expansion {
        let mut avoid = symbols(&pair.0);
        avoid.extend(symbols(&pair.1));
        let free: BTreeSet<Sym> = free_names(&pair.0)
            .into_iter()
            .chain(free_names(&pair.1))
            .collect();
        let payloads: Vec<Term> = match self.rel {
            Relation::Normal => vec![trigger(&fresh_name(&avoid))],
            Relation::Context(f) => {
                let mut a = avoid.clone();
                let mut v: Vec<Term> = self
                    .instances(&f.payloads, pair, &mut a)
                    .into_iter()
                    .map(|(_, t)| t)
                    .collect();
                v.extend(self.budget.input_instantiations.iter().cloned());
                v
            }
        };
        let payloads: Vec<Term> = payloads.iter().map(normalize).collect();

        let mut obls = Vec::new();
        let mut capped = false;
        for side in [Side::Left, Side::Right] {
            let (x, y) = match side {
                Side::Left => (&pair.0, &pair.1),
                Side::Right => (&pair.1, &pair.0),
            };
            let mut moves: Vec<(Action, Term)> = Vec::new();
            for c in self.commits(x).iter() {
                match c {
                    Commitment::Tau(r) => moves.push((Action::Tau, r.clone())),
                    Commitment::Out {
                        extruded,
                        subject,
                        payload,
                        residual,
                    } => {
                        let (ext, pay, res) = apart(extruded, payload, residual, &free);
                        moves.push((
                            Action::Out {
                                extruded: ext,
                                subject: subject.clone(),
                                payload: pay,
                            },
                            res,
                        ));
                    }
                    Commitment::In {
                        subject,
                        binder,
                        residual,
                    } => {
                        for pl in &payloads {
                            moves.push((
                                Action::In {
                                    subject: subject.clone(),
                                    payload: pl.clone(),
                                },
                                Commitment::instantiate(binder, residual, pl),
                            ));
                        }
                    }
                }
            }
            moves.sort();
            moves.dedup();
            for (action, after) in moves {
                let mut reply_avoid = free.clone();
                if let Action::Out { extruded, .. } = &action {
                    reply_avoid.extend(extruded.iter().cloned());
                }
                let (replies, c) = self.replies(y, &Want::of(&action), &reply_avoid);
                capped |= c;
                let cands = replies
                    .into_iter()
                    .map(|(ra, rafter)| {
                        let succ = self.successors(side, &action, &after, &ra, &rafter, pair);
                        Cand {
                            action: ra,
                            after: rafter,
                            succ,
                            ids: Vec::new(),
                        }
                    })
                    .collect();
                obls.push(Obl {
                    side,
                    action,
                    after,
                    cands,
                });
            }
        }
        Expansion { obls, capped }
    }

    /// The pairs a move and its reply lead to.
    fn successors(
        &self,
        side: Side,
        action: &Action,
        after: &Term,
        reply: &Action,
        reply_after: &Term,
        pair: &(Term, Term),
    ) -> Vec<(Option<usize>, (Term, Term))> {
        let (
            Action::Out {
                extruded: c,
                payload: a,
                ..
            },
            Action::Out {
                extruded: d,
                payload: b,
                ..
            },
        ) = (action, reply)
        else {
            let (l, r) = orient(side, after.clone(), reply_after.clone());
            return vec![(None, self.canon(&l, &r))];
        };
        let mut avoid = symbols(&pair.0);
        avoid.extend(symbols(&pair.1));
        for t in [a, b, after, reply_after] {
            avoid.extend(symbols(t));
        }
        avoid.extend(c.iter().cloned());
        avoid.extend(d.iter().cloned());
        let wrap = |ext: &[Sym], residual: &Term, env: Term| {
            Term::res_all(ext, Term::par(residual.clone(), env))
        };
        match self.rel {
            Relation::Normal => {
                let m = fresh_name(&avoid);
                let l = wrap(c, after, trigger_server(&m, a));
                let r = wrap(d, reply_after, trigger_server(&m, b));
                let (l, r) = orient(side, l, r);
                vec![(None, self.canon(&l, &r))]
            }
            Relation::Context(f) => self
                .instances(&f.contexts, pair, &mut avoid)
                .into_iter()
                .map(|(i, e)| {
                    let ea = subst(&e, &Subst::term(f.hole.clone(), a.clone()));
                    let eb = subst(&e, &Subst::term(f.hole.clone(), b.clone()));
                    let (l, r) = orient(side, wrap(c, after, ea), wrap(d, reply_after, eb));
                    (Some(i), self.canon(&l, &r))
                })
                .collect(),
        }
    }

    fn canon(&self, l: &Term, r: &Term) -> (Term, Term) {
        let key = (l.clone(), r.clone());
        if let Some(hit) = self.canon.get(&key) {
            return hit.clone();
        }
        let mut pair = if self.up_to && self.mode == Mode::Weak {
            canon_pair(&settle(l), &settle(r))
        } else {
            canon_pair(l, r)
        };
        if self.up_to {
            if let Some((l, r)) = cancel_common(&pair.0, &pair.1) {
                pair = canon_pair(&l, &r);
            }
        }
        self.canon.insert(key, pair.clone());
        pair
    }

    fn run(&self, p: &Term, q: &Term, parallel: bool) -> Verdict {
        let root = self.canon(p, q);
        let mut nodes = vec![Node {
            pair: root.clone(),
            depth: 0,
            exp: None,
        }];
        let mut index: HashMap<(Term, Term), usize> = HashMap::from([(root, 0)]);
        let mut frontier = vec![0usize];
        let mut budget_hit = false;
        let mut ranks = vec![None];
        while !frontier.is_empty() {
            let todo: Vec<usize> = frontier
                .iter()
                .copied()
                .filter(|&i| nodes[i].depth < self.budget.max_depth && nodes[i].pair.0 != nodes[i].pair.1)
                .collect();
            if todo.is_empty() {
                break;
            }
            if nodes.len() >= self.budget.max_states {
                budget_hit = true;
                break;
            }
            let pairs: Vec<(Term, Term)> = todo.iter().map(|&i| nodes[i].pair.clone()).collect();
            let exps = if parallel {
                par::map(&pairs, |pr| self.expand(pr))
            } else {
                par::map_seq(&pairs, |pr| self.expand(pr))
            };
            let mut next = Vec::new();
            for (&id, mut exp) in todo.iter().zip(exps) {
                let depth = nodes[id].depth + 1;
                for obl in &mut exp.obls {
                    for cand in &mut obl.cands {
                        for (_, pr) in &cand.succ {
                            let j = match index.get(pr) {
                                Some(&j) => j,
                                None => {
                                    let j = nodes.len();
                                    nodes.push(Node {
                                        pair: pr.clone(),
                                        depth,
                                        exp: None,
                                    });
                                    index.insert(pr.clone(), j);
                                    next.push(j);
                                    j
                                }
                            };
                            cand.ids.push(j);
                        }
                    }
                }
                nodes[id].exp = Some(exp);
            }
            ranks = solve(&nodes);
            if ranks[0].is_some() {
                return Verdict::Distinguished(extract_witness(&nodes, &ranks, self.mode));
            }
            frontier = next;
        }
        if ranks.len() < nodes.len() {
            ranks = solve(&nodes);
        }
        if ranks[0].is_some() {
            return Verdict::Distinguished(extract_witness(&nodes, &ranks, self.mode));
        }
        let capped = nodes
            .iter()
            .any(|n| n.exp.as_ref().is_some_and(|e| e.capped));
        if budget_hit {
            Verdict::Inconclusive {
                reason: InconclusiveReason::BudgetExhausted,
                states_explored: nodes.len(),
            }
        } else if capped {
            Verdict::Inconclusive {
                reason: InconclusiveReason::TauCapHit,
                states_explored: nodes.len(),
            }
        } else {
            Verdict::BisimilarUpToBound {
                states_explored: nodes.len(),
                budget: self.budget.clone(),
            }
        }
    }
}

/// Round in which each pair is refuted, if ever.
fn solve(nodes: &[Node]) -> Vec<Option<usize>> {
    let mut rank: Vec<Option<usize>> = vec![None; nodes.len()];
    for round in 1.. {
        let dead_now: Vec<usize> = (0..nodes.len())
            .filter(|&i| rank[i].is_none())
            .filter(|&i| {
                nodes[i].exp.as_ref().is_some_and(|e| {
                    !e.capped
                        && e.obls.iter().any(|o| {
                            o.cands
                                .iter()
                                .all(|c| c.ids.iter().any(|&j| rank[j].is_some()))
                        })
                })
            })
            .collect();
        if dead_now.is_empty() {
            break;
        }
        for i in dead_now {
            rank[i] = Some(round);
        }
    }
    rank
}

fn extract_witness(nodes: &[Node], rank: &[Option<usize>], mode: Mode) -> Witness {
    let mut steps = Vec::new();
    let mut cur = 0;
    loop {
        let r = rank[cur].expect("dead pair");
        let below = |j: usize| rank[j].is_some_and(|k| k < r);
        let exp = nodes[cur].exp.as_ref().expect("refuted pairs are expanded");
        let obl = exp
            .obls
            .iter()
            .find(|o| o.cands.iter().all(|c| c.ids.iter().any(|&j| below(j))))
            .expect("refuted pair has a failing obligation");
        let reply = obl.cands.first().map(|c| {
            let k = c.ids.iter().position(|&j| below(j)).expect("dead successor");
            (c, k)
        });
        steps.push(WitnessStep {
            before: nodes[cur].pair.clone(),
            side: obl.side,
            action: obl.action.clone(),
            attacker_after: obl.after.clone(),
            reply: reply.map(|(c, k)| Reply {
                action: c.action.clone(),
                after: c.after.clone(),
                probe: c.succ[k].0,
                next: c.succ[k].1.clone(),
            }),
        });
        match reply {
            Some((c, k)) => cur = c.ids[k],
            None => break,
        }
    }
    Witness { mode, steps }
}

// ---------------------------------------------------------------------------
// Replay

/// `(c)(a!<A>.0 | P)`: identifies an output move up to the choice of
/// extruded names.
fn output_form(a: &Action, after: &Term) -> Term {
    match a {
        Action::Out {
            extruded,
            subject,
            payload,
        } => normalize(&Term::res_all(
            extruded,
            Term::par(
                Term::Output(Name::Const(subject.clone()), payload.clone().into(), Term::Nil.into()),
                after.clone(),
            ),
        )),
        _ => after.clone(),
    }
}

fn same_label_kind(a: &Action, b: &Action) -> bool {
    match (a, b) {
        (Action::Tau, Action::Tau) => true,
        (Action::In { subject: s, payload: p }, Action::In { subject: t, payload: q }) => {
            s == t && normalize(p) == normalize(q)
        }
        (Action::Out { subject: s, .. }, Action::Out { subject: t, .. }) => s == t,
        _ => false,
    }
}

/// One-step moves of `t` through the public transition function, with
/// inputs instantiated by `payload`.
fn public_steps(t: &Term, payload: Option<&Term>, budget: &ExploreBudget) -> Vec<(Action, Term)> {
    let b = ExploreBudget {
        input_instantiations: payload.into_iter().cloned().collect(),
        fresh_trigger: false,
        ..budget.clone()
    };
    transitions(t, &b).unwrap_or_default()
}

fn public_tau_closure(t: &Term, budget: &ExploreBudget) -> BTreeSet<Term> {
    tau_closure(normalize(t), budget.max_tau_chain, |s| {
        public_steps(s, None, budget)
            .into_iter()
            .filter(|(a, _)| a.is_tau())
            .map(|(_, r)| r)
            .collect()
    })
    .states
}

/// Moves of `t` labelled like `a` (weakly or strongly), each as the
/// extrusion-insensitive form used for comparison.
fn public_matches(t: &Term, a: &Action, mode: Mode, budget: &ExploreBudget) -> BTreeSet<Term> {
    let payload = match a {
        Action::In { payload, .. } => Some(payload),
        _ => None,
    };
    let mut out = BTreeSet::new();
    match mode {
        Mode::Strong => {
            for (b, r) in public_steps(t, payload, budget) {
                if same_label_kind(a, &b) {
                    out.insert(output_form(&b, &r));
                }
            }
        }
        Mode::Weak => {
            let pre = public_tau_closure(t, budget);
            if a.is_tau() {
                return pre;
            }
            for s in &pre {
                for (b, r) in public_steps(s, payload, budget) {
                    if same_label_kind(a, &b) {
                        for r2 in public_tau_closure(&r, budget) {
                            out.insert(output_form(&b, &r2));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Re-checks a witness against [`transitions`]: every move is a real
/// transition of its side, every reply is a real (weak) transition of the
/// other side, consecutive steps connect, and the final move has no reply.
pub fn replay_witness(
    p: &Term,
    q: &Term,
    witness: &Witness,
    budget: &ExploreBudget,
) -> Result<(), String> {
    let mut expected = canon_pair(p, q);
    let strong = Mode::Strong;
    for (i, s) in witness.steps.iter().enumerate() {
        if s.before != expected {
            return Err(format!("step {i}: pair does not follow from the previous step"));
        }
        let (x, y) = match s.side {
            Side::Left => (&s.before.0, &s.before.1),
            Side::Right => (&s.before.1, &s.before.0),
        };
        let moves = public_matches(x, &s.action, strong, budget);
        if !moves.contains(&output_form(&s.action, &s.attacker_after)) {
            return Err(format!("step {i}: `{}` is not a transition of the attacker", s.action));
        }
        let replies = public_matches(y, &s.action, witness.mode, budget);
        match &s.reply {
            Some(r) => {
                if !same_label_kind(&s.action, &r.action)
                    || !replies.contains(&output_form(&r.action, &r.after))
                {
                    return Err(format!("step {i}: reply `{}` is not a transition", r.action));
                }
                expected = r.next.clone();
            }
            None => {
                if !replies.is_empty() {
                    return Err(format!(
                        "step {i}: the other side can answer `{}` after all",
                        s.action
                    ));
                }
                if i + 1 != witness.steps.len() {
                    return Err(format!("step {i}: unanswered move before the end"));
                }
                return Ok(());
            }
        }
    }
    Err("witness does not end with an unanswerable move".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s, CalcId::PiD(1)).unwrap()
    }

    fn budget() -> ExploreBudget {
        ExploreBudget::default()
    }

    #[test]
    fn reflexive() {
        let p = t("a!<\\(Z). b!.Z<\\(Y).0>>.c");
        assert!(check_normal(&p, &p, Mode::Weak, &budget()).unwrap().is_bisimilar());
    }

    #[test]
    fn tau_law_weak_but_not_strong() {
        let p = t("tau.a!");
        let q = t("a!");
        assert!(check_normal(&p, &q, Mode::Weak, &budget()).unwrap().is_bisimilar());
        let v = check_normal(&p, &q, Mode::Strong, &budget()).unwrap();
        let Verdict::Distinguished(w) = v else { panic!("{v}") };
        replay_witness(&p, &q, &w, &budget()).unwrap();
    }

    #[test]
    fn trigger_server_tells_payloads_apart() {
        let p = t("a!<\\(Z). c!>.0");
        let q = t("a!<\\(Z). 0>.0");
        let v = check_normal(&p, &q, Mode::Weak, &budget()).unwrap();
        let Verdict::Distinguished(w) = v else { panic!("{v}") };
        replay_witness(&p, &q, &w, &budget()).unwrap();
    }

    #[test]
    fn context_family_sorts() {
        for calc in [CalcId::PiD(1), CalcId::PiD(2), CalcId::Pid(1), CalcId::Pi] {
            let f = default_context_family(calc, calc.payload_sort()).unwrap();
            f.validate().unwrap();
            assert!(!f.contexts.is_empty());
        }
    }

    #[test]
    fn context_probe_distinguishes() {
        let p = t("a!<\\(Z). Z<\\(Y).0>>.0");
        let q = t("a!<\\(Z). 0>.0");
        let fam = default_context_family(CalcId::PiD(1), Sort::AbsD(1)).unwrap();
        let v = check_context(&p, &q, Mode::Weak, &fam, &budget()).unwrap();
        let Verdict::Distinguished(w) = v else { panic!("{v}") };
        replay_witness(&p, &q, &w, &budget()).unwrap();
    }

    #[test]
    fn abstraction_instances() {
        let f = t("\\(Z). m!<Z>.0");
        let g = t("\\(Y). m!<Y>.0");
        assert!(check_abstraction(&f, &g, Mode::Weak, &budget()).unwrap().is_bisimilar());
        let f = t("\\(Z). Z<\\(Y).0>");
        let g = t("\\(Z). 0");
        assert!(check_abstraction(&f, &g, Mode::Weak, &budget()).unwrap().is_distinguished());
    }

    #[test]
    fn tiny_budget_is_inconclusive() {
        let p = t("a!<\\(Z). b!>.0");
        let q = t("a!<\\(Z). tau.b!>.0");
        let b = ExploreBudget {
            max_states: 1,
            ..budget()
        };
        let v = check_normal(&p, &q, Mode::Weak, &b).unwrap();
        assert!(v.is_inconclusive(), "{v}");
    }
}
