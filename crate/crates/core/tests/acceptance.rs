//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use hopi::casebook::{
    capture_family, capture_pair, claims, congruence_instances, coincidence_corpus,
    replication_pair, run_claim, CongruenceLaw,
};
use hopi::equiv::{
    check_abstraction, check_context, check_normal, default_context_family, replay_witness, Mode,
    Side, Verdict,
};
use hopi::gen::sample;
use hopi::parse::{parse_term, parse_term_with, ParseOptions};
use hopi::print::print_term;
use hopi::semantics::{normalize, transitions, Action, ExploreBudget};
use hopi::sort::sort_check;
use hopi::syntax::{free_names, symbols, Arg, CalcId, Name, Param, Sort, Subst, Sym, Term};
use hopi::transforms::{
    encode_replication, encode_tau, factorization_fixtures, factorize, server_law_fixtures,
    make_trigger, FactorCase, Prefix, ServerLaw,
};
use hopi::Error;

type Outcome = Result<String, String>;

fn pid1() -> CalcId {
    CalcId::PiD(1)
}

fn term(src: &str) -> Term {
    parse_term(src, pid1()).unwrap_or_else(|e| panic!("`{src}`: {e}"))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bisimilar(v: &Result<Verdict, Error>) -> bool {
    matches!(v, Ok(Verdict::BisimilarUpToBound { .. }))
}

fn describe(v: &Result<Verdict, Error>) -> String {
    match v {
        Ok(v) => v.label().to_string(),
        Err(e) => format!("error: {e}"),
    }
}

// ---------------------------------------------------------------------------

fn structural_congruence() -> Outcome {
    let inst = congruence_instances();
    for law in CongruenceLaw::ALL {
        let n = inst.iter().filter(|i| i.law == law).count();
        ensure(n >= 5, || format!("{law:?} has {n} instances"))?;
    }
    for i in &inst {
        let (l, r) = (normalize(&i.left), normalize(&i.right));
        ensure(l == r, || {
            format!(
                "{:?}: {} normalizes to {}, {} to {}",
                i.law,
                print_term(&i.left),
                print_term(&l),
                print_term(&i.right),
                print_term(&r)
            )
        })?;
    }
    let terms = sample(0xC0_46, 1000, 12);
    for t in &terms {
        ensure(t.size() <= 12, || format!("oversized sample {}", print_term(t)))?;
        let n = normalize(t);
        ensure(normalize(&n) == n, || format!("not idempotent on {}", print_term(t)))?;
    }
    Ok(format!("{} law instances, {} random terms", inst.len(), terms.len()))
}

// Reference stepper: the transition rules applied directly to the raw term,
// without any structural normalization. Restricted names are renamed to
// fresh ones whenever a restriction is crossed, so extrusion never captures.

enum RefStep {
    Tau(Term),
    Out {
        extruded: Vec<Sym>,
        subject: Sym,
        payload: Term,
        residual: Term,
    },
    In {
        subject: Sym,
        binder: Sym,
        body: Term,
    },
}

struct RefStepper {
    next: usize,
}

impl RefStepper {
    fn fresh(&mut self) -> Sym {
        self.next += 1;
        Sym::new(&format!("rr{}", self.next))
    }

    fn steps(&mut self, t: &Term) -> Vec<RefStep> {
        match t {
            Term::Input(Name::Const(a), Param::Proc(x), p) => vec![RefStep::In {
                subject: a.clone(),
                binder: x.clone(),
                body: (**p).clone(),
            }],
            Term::Output(Name::Const(a), k, p) => vec![RefStep::Out {
                extruded: Vec::new(),
                subject: a.clone(),
                payload: (**k).clone(),
                residual: (**p).clone(),
            }],
            Term::App(f, args) => match &**f {
                Term::Abs(ps, body) => {
                    let s = Subst::bind(ps, args).expect("well-sorted application");
                    self.steps(&hopi::syntax::subst(body, &s))
                }
                _ => Vec::new(),
            },
            Term::Par(l, r) => {
                let (ls, rs) = (self.steps(l), self.steps(r));
                let mut out = Vec::new();
                for (i, o) in [(&ls, &rs), (&rs, &ls)] {
                    for a in i {
                        let RefStep::In { subject, binder, body } = a else { continue };
                        for b in o {
                            let RefStep::Out { extruded, subject: s2, payload, residual } = b else {
                                continue;
                            };
                            if s2 != subject {
                                continue;
                            }
                            let got =
                                hopi::syntax::subst(body, &Subst::term(binder.clone(), payload.clone()));
                            out.push(RefStep::Tau(Term::res_all(
                                extruded,
                                Term::par(got, residual.clone()),
                            )));
                        }
                    }
                }
                let wrap = |s: RefStep, f: &dyn Fn(Term) -> Term| match s {
                    RefStep::Tau(r) => RefStep::Tau(f(r)),
                    RefStep::Out { extruded, subject, payload, residual } => RefStep::Out {
                        extruded,
                        subject,
                        payload,
                        residual: f(residual),
                    },
                    RefStep::In { subject, binder, body } => RefStep::In {
                        subject,
                        binder,
                        body: f(body),
                    },
                };
                for s in ls {
                    out.push(wrap(s, &|x| Term::par(x, (**r).clone())));
                }
                for s in rs {
                    out.push(wrap(s, &|x| Term::par((**l).clone(), x)));
                }
                out
            }
            Term::Res(c, p) => {
                let c2 = self.fresh();
                let body = hopi::syntax::subst(
                    p,
                    &Subst::name(Name::Const(c.clone()), Name::Const(c2.clone())),
                );
                let under = |t: Term| Term::Res(c2.clone(), t.into());
                self.steps(&body)
                    .into_iter()
                    .filter_map(|s| match s {
                        RefStep::Tau(r) => Some(RefStep::Tau(under(r))),
                        RefStep::In { subject, .. } if subject == c2 => None,
                        RefStep::In { subject, binder, body } => Some(RefStep::In {
                            subject,
                            binder,
                            body: under(body),
                        }),
                        RefStep::Out { subject, .. } if subject == c2 => None,
                        RefStep::Out { mut extruded, subject, payload, residual } => {
                            if free_names(&payload).contains(&c2) {
                                extruded.push(c2.clone());
                                Some(RefStep::Out { extruded, subject, payload, residual })
                            } else {
                                Some(RefStep::Out {
                                    extruded,
                                    subject,
                                    payload,
                                    residual: under(residual),
                                })
                            }
                        }
                    })
                    .collect()
            }
            _ => Vec::new(),
        }
    }
}

/// Alpha-invariant key of a transition.
fn out_key(extruded: &[Sym], subject: &Sym, payload: &Term, residual: &Term) -> String {
    let t = Term::res_all(
        extruded,
        Term::output(Name::Const(subject.clone()), payload.clone(), residual.clone()),
    );
    format!("out {}", print_term(&normalize(&t)))
}

fn reference_keys(t: &Term, payloads: &[Term]) -> BTreeSet<String> {
    let mut keys = BTreeSet::new();
    for s in (RefStepper { next: 0 }).steps(t) {
        match s {
            RefStep::Tau(r) => {
                keys.insert(format!("tau {}", print_term(&normalize(&r))));
            }
            RefStep::Out { extruded, subject, payload, residual } => {
                keys.insert(out_key(&extruded, &subject, &payload, &residual));
            }
            RefStep::In { subject, binder, body } => {
                for p in payloads {
                    let r = hopi::syntax::subst(&body, &Subst::term(binder.clone(), p.clone()));
                    keys.insert(format!(
                        "in {subject} {} {}",
                        print_term(&normalize(p)),
                        print_term(&normalize(&r))
                    ));
                }
            }
        }
    }
    keys
}

fn library_keys(t: &Term, budget: &ExploreBudget) -> Result<BTreeSet<String>, String> {
    let mut keys = BTreeSet::new();
    for (a, r) in transitions(&normalize(t), budget).map_err(|e| e.to_string())? {
        keys.insert(match &a {
            Action::Tau => format!("tau {}", print_term(&r)),
            Action::Out { extruded, subject, payload } => out_key(extruded, subject, payload, &r),
            Action::In { subject, payload } => {
                format!("in {subject} {} {}", print_term(payload), print_term(&r))
            }
        });
    }
    Ok(keys)
}

fn semantics_against_reference() -> Outcome {
    let payloads = vec![term("\\(Y). k!<Y>.0"), term("\\(Y). (Y<\\(Z). 0> | k)")];
    let budget = ExploreBudget {
        input_instantiations: payloads.clone(),
        fresh_trigger: false,
        ..ExploreBudget::default()
    };
    let terms = sample(0x5E_4A, 500, 12);
    let (mut compared, mut outs) = (0, 0);
    for t in &terms {
        let want = reference_keys(t, &payloads);
        let got = library_keys(t, &budget)?;
        ensure(want == got, || {
            format!(
                "{}: reference {:?}, library {:?}",
                print_term(t),
                want.symmetric_difference(&got).collect::<Vec<_>>(),
                got.len()
            )
        })?;
        compared += want.len();
        for (a, r) in transitions(t, &budget).map_err(|e| e.to_string())? {
            let Action::Out { extruded, subject, payload } = a else { continue };
            outs += 1;
            let fresh: BTreeSet<&Sym> = extruded.iter().collect();
            ensure(fresh.len() == extruded.len(), || "repeated extruded name".into())?;
            for c in &extruded {
                ensure(
                    free_names(&payload).contains(c)
                        && !free_names(&normalize(t)).contains(c)
                        && c != &subject,
                    || format!("bad extrusion of {c} from {}", print_term(t)),
                )?;
            }
            for c in free_names(&r).iter().chain(free_names(&payload).iter()) {
                ensure(
                    free_names(t).contains(c) || fresh.contains(c),
                    || format!("{c} appears free after a step of {}", print_term(t)),
                )?;
            }
        }
    }
    Ok(format!("{} terms, {compared} transitions, {outs} outputs", terms.len()))
}

fn pid_counterexample() -> Outcome {
    let calc = CalcId::Pid(1);
    let w = parse_term("(\\(x). x!)<d>", calc).map_err(|e| e.to_string())?;
    let visible: Vec<_> = transitions(&w, &ExploreBudget::default())
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter(|(a, _)| !a.is_tau())
        .collect();
    ensure(visible.len() == 1, || format!("{} visible transitions", visible.len()))?;
    let (a, r) = &visible[0];
    ensure(
        matches!(a, Action::Out { subject, extruded, .. } if subject.as_str() == "d" && extruded.is_empty())
            && *r == Term::Nil,
        || format!("W does {a} -> {}", print_term(r)),
    )?;
    ensure(
        matches!(make_trigger(&Sym::new("m"), calc), Err(Error::UnsupportedCalculus { .. })),
        || "trigger was built".into(),
    )?;
    let z = Sym::new("z");
    let server = encode_replication(
        &Prefix::Input {
            subject: Name::c("m"),
            binder: Param::Name(z.clone()),
        },
        &Term::app(Term::var("X"), vec![Arg::Name(Name::Var(z))]),
        calc,
    );
    ensure(sort_check(&server, calc).is_err(), || "server sort-checks".into())?;
    ensure(
        matches!(parse_term("\\(X). !m(z). X<z>", calc), Err(Error::Sort(_))),
        || "surface server parses".into(),
    )?;
    let report = run_claim("pid-counterexample", &ExploreBudget::default()).map_err(|e| e.to_string())?;
    ensure(report.pass && report.commentary.is_some(), || format!("{:?}", report.checks))?;
    Ok("W fires once on d; trigger and server rejected".into())
}

fn factorization_suite() -> Outcome {
    let budget = ExploreBudget::default();
    let fixtures = factorization_fixtures();
    ensure(fixtures.len() >= 9, || format!("{} fixtures", fixtures.len()))?;
    let mut cases = BTreeSet::new();
    for f in &fixtures {
        let hole = Sym::new("X");
        let r = factorize(&f.context, &hole, &f.argument, pid1()).map_err(|e| format!("{}: {e}", f.name))?;
        ensure(
            !symbols(&f.context).contains(&r.trigger_name) && !symbols(&f.argument).contains(&r.trigger_name),
            || format!("{}: trigger name is not fresh", f.name),
        )?;
        let (so, sf) = (sort_check(&r.original, pid1()), sort_check(&r.factored, pid1()));
        ensure(so.is_ok() && so.ok() == sf.ok(), || format!("{}: sort changed", f.name))?;
        let v = match r.case {
            FactorCase::NonParameterized => check_normal(&r.original, &r.factored, Mode::Weak, &budget),
            FactorCase::Parameterized(_) => check_abstraction(&r.original, &r.factored, Mode::Weak, &budget),
        };
        ensure(bisimilar(&v), || format!("{}: {}", f.name, describe(&v)))?;
        cases.insert(f.name);
    }
    Ok(format!("{} fixtures bisimilar", cases.len()))
}

fn server_laws() -> Outcome {
    let budget = ExploreBudget::default();
    let fixtures = server_law_fixtures();
    for law in [ServerLaw::Prefix, ServerLaw::OutputPayload, ServerLaw::Parallel, ServerLaw::Application] {
        let n = fixtures.iter().filter(|f| f.law == law).count();
        ensure(n >= 2, || format!("{law:?}: {n} instances"))?;
    }
    for f in &fixtures {
        let v = check_normal(&f.left, &f.right, Mode::Weak, &budget);
        ensure(bisimilar(&v), || {
            format!("{:?}: {} vs {}: {}", f.law, print_term(&f.left), print_term(&f.right), describe(&v))
        })?;
    }
    Ok(format!("{} instances bisimilar", fixtures.len()))
}

/// Checks the attacker's moves of a witness against `transitions` directly.
fn attacker_moves_exist(w: &hopi::equiv::Witness, budget: &ExploreBudget) -> Result<(), String> {
    for s in &w.steps {
        let from = match s.side {
            Side::Left => &s.before.0,
            Side::Right => &s.before.1,
        };
        let all = transitions(from, budget).map_err(|e| e.to_string())?;
        let weak = w.mode == Mode::Weak;
        let direct = all.iter().any(|(a, r)| a == &s.action && *r == normalize(&s.attacker_after));
        ensure(direct || weak, || format!("move {} not available from {}", s.action, print_term(from)))?;
    }
    Ok(())
}

fn coincidence() -> Outcome {
    let budget = ExploreBudget::default();
    let family = default_context_family(pid1(), Sort::AbsD(1)).map_err(|e| e.to_string())?;
    let corpus = coincidence_corpus();
    ensure(
        corpus.iter().filter(|c| c.bisimilar).count() >= 15 && corpus.iter().filter(|c| !c.bisimilar).count() >= 15,
        || "corpus too small".into(),
    )?;
    let mut witnesses = 0;
    for c in &corpus {
        let n = check_normal(&c.left, &c.right, Mode::Weak, &budget);
        let k = check_context(&c.left, &c.right, Mode::Weak, &family, &budget);
        ensure(describe(&n) == describe(&k), || {
            format!("{}: normal {}, context {}", c.name, describe(&n), describe(&k))
        })?;
        ensure(bisimilar(&n) == c.bisimilar && (c.bisimilar || n.as_ref().is_ok_and(Verdict::is_distinguished)), || {
            format!("{}: designed {}, got {}", c.name, c.bisimilar, describe(&n))
        })?;
        for v in [&n, &k] {
            if let Ok(Verdict::Distinguished(w)) = v {
                replay_witness(&c.left, &c.right, w, &budget).map_err(|e| format!("{}: {e}", c.name))?;
                attacker_moves_exist(w, &budget).map_err(|e| format!("{}: {e}", c.name))?;
                witnesses += 1;
            }
        }
    }
    Ok(format!("{} pairs agree, {witnesses} witnesses replayed", corpus.len()))
}

fn equivalence_laws() -> Outcome {
    let budget = ExploreBudget::default();
    let check = |p: &Term, q: &Term| check_normal(p, q, Mode::Weak, &budget);
    let samples = sample(0xE9_11, 50, 10);
    for t in &samples {
        let v = check(t, t);
        ensure(bisimilar(&v), || format!("{} not reflexive: {}", print_term(t), describe(&v)))?;
    }
    let corpus = coincidence_corpus();
    for c in &corpus {
        let (f, b) = (check(&c.left, &c.right), check(&c.right, &c.left));
        ensure(describe(&f) == describe(&b), || format!("{}: not symmetric", c.name))?;
    }
    let good: Vec<_> = corpus.iter().filter(|c| c.bisimilar).collect();
    for c in &good {
        let third = encode_tau(&c.right, pid1());
        let (l_r, r_t, l_t) = (check(&c.left, &c.right), check(&c.right, &third), check(&c.left, &third));
        ensure(bisimilar(&l_r) && bisimilar(&r_t) && bisimilar(&l_t), || {
            format!("{}: transitivity through tau.Q fails", c.name)
        })?;
    }
    let contexts = sample(0xC7_05, 10, 6);
    let names = ["a", "b", "c", "d", "e"];
    for (i, r) in contexts.iter().enumerate() {
        let n = Sym::new(names[i % names.len()]);
        for c in &good {
            let par = check(&Term::par(c.left.clone(), r.clone()), &Term::par(c.right.clone(), r.clone()));
            ensure(bisimilar(&par), || format!("{} | {}: {}", c.name, print_term(r), describe(&par)))?;
            let res = check(&Term::Res(n.clone(), c.left.clone().into()), &Term::Res(n.clone(), c.right.clone().into()));
            ensure(bisimilar(&res), || format!("new {n}. {}: {}", c.name, describe(&res)))?;
        }
    }
    Ok(format!(
        "{} reflexive, {} symmetric, {} transitive, {} closure checks",
        samples.len(),
        corpus.len(),
        good.len(),
        2 * contexts.len() * good.len()
    ))
}

fn name_capture() -> Outcome {
    let budget = ExploreBudget::default();
    let (p, q) = capture_pair();
    let family = capture_family().map_err(|e| e.to_string())?;
    let k = check_context(&p, &q, Mode::Weak, &family, &budget);
    ensure(bisimilar(&k), || format!("context: {}", describe(&k)))?;
    let n = check_normal(&p, &q, Mode::Weak, &budget);
    ensure(bisimilar(&n), || format!("normal: {}", describe(&n)))?;
    Ok(format!("{} contexts", family.contexts.len()))
}

fn replication() -> Outcome {
    let (p, q) = replication_pair();
    let v = check_normal(&p, &q, Mode::Weak, &ExploreBudget::default());
    ensure(bisimilar(&v), || describe(&v))?;
    Ok(match v {
        Ok(Verdict::BisimilarUpToBound { states_explored, .. }) => format!("{states_explored} pairs"),
        _ => unreachable!(),
    })
}

fn casebook_terms() -> Vec<Term> {
    let mut out = Vec::new();
    for i in congruence_instances() {
        out.extend([i.left, i.right]);
    }
    for c in coincidence_corpus() {
        out.extend([c.left, c.right]);
    }
    let (p, q) = capture_pair();
    let (r, s) = replication_pair();
    out.extend([p, q, r, s]);
    for f in factorization_fixtures() {
        if let Ok(r) = factorize(&f.context, &Sym::new("X"), &f.argument, pid1()) {
            out.extend([r.original, r.factored]);
        }
        out.push(f.argument);
    }
    for f in server_law_fixtures() {
        out.extend([f.left, f.right]);
    }
    out
}

fn hopi(args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_hopi"))
        .args(args)
        .output()
        .expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned())
}

fn cli_golden() -> Outcome {
    let opts = ParseOptions {
        allow_reserved: true,
        ..ParseOptions::new(pid1())
    };
    let terms = casebook_terms();
    for t in &terms {
        let s = print_term(t);
        let back = parse_term_with(&s, &opts).map_err(|e| format!("`{s}`: {e}"))?;
        ensure(print_term(&back) == s, || format!("`{s}` reprints as `{}`", print_term(&back)))?;
        let canon = print_term(&normalize(t));
        let (code, out) = hopi(&["parse", &canon]);
        ensure(code == 0 && out == format!("{canon}\n"), || {
            format!("hopi parse `{canon}` gave {code} `{}`", out.trim_end())
        })?;
    }
    let codes = [
        (vec!["check", "a!", "a!"], 0),
        (vec!["parse", "a!<"], 1),
        (vec!["parse", "--calc", "pid1", "\\(X). X<\\(Y). 0>"], 1),
        (vec!["claims", "no-such-claim"], 1),
        (vec!["check", "a!", "b!"], 2),
        (vec!["check", "--max-states", "1", "a!. b!", "a!. tau. b!"], 3),
    ];
    for (args, want) in &codes {
        let (code, _) = hopi(args);
        ensure(code == *want, || format!("hopi {args:?} exited {code}, expected {want}"))?;
    }
    let (code, out) = hopi(&["claims", "--list"]);
    ensure(code == 0 && out.lines().count() == claims().len(), || "claims --list".into())?;
    Ok(format!("{} terms round-trip, {} exit codes", terms.len(), codes.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("structural congruence laws and normalize idempotence", structural_congruence),
        ("transitions agree with the reference stepper", semantics_against_reference),
        ("pid-counterexample", pid_counterexample),
        ("factorization fixtures", factorization_suite),
        ("trigger-server distributive laws", server_laws),
        ("normal and context bisimilarity coincide", coincidence),
        ("reflexivity, symmetry, transitivity and closure", equivalence_laws),
        ("name capture", name_capture),
        ("replication as a derived operator", replication),
        ("cli round trip and exit codes", cli_golden),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let r = f();
        let ms = t.elapsed().as_millis();
        match r {
            Ok(detail) => println!("PASS  {name}  ({detail}; {ms} ms)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}  ({why}; {ms} ms)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
