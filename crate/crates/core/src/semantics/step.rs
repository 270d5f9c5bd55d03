//! Labelled transitions of closed processes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::syntax::{
    free_names, fresh_name, rename_consts, subst, symbols, Name, Param, Subst, Sym, Term,
};

use super::normalize::normalize;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Action {
    Tau,
    In {
        subject: Sym,
        payload: Term,
    },
    Out {
        extruded: Vec<Sym>,
        subject: Sym,
        payload: Term,
    },
}

impl Action {
    pub fn subject(&self) -> Option<&Sym> {
        match self {
            Action::Tau => None,
            Action::In { subject, .. } | Action::Out { subject, .. } => Some(subject),
        }
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Action::Tau)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Tau => f.write_str("tau"),
            Action::In { subject, payload } => {
                write!(f, "{subject}({})", crate::print::print_term(payload))
            }
            Action::Out {
                extruded,
                subject,
                payload,
            } => {
                if !extruded.is_empty() {
                    let names: Vec<&str> = extruded.iter().map(|s| s.as_str()).collect();
                    write!(f, "new {}. ", names.join(", "))?;
                }
                write!(f, "{subject}!<{}>", crate::print::print_term(payload))
            }
        }
    }
}

/// Bounds for exploring a (generally infinite) transition system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExploreBudget {
    pub max_states: usize,
    pub max_tau_chain: usize,
    pub max_depth: usize,
    /// Closed payloads every input is instantiated with.
    pub input_instantiations: Vec<Term>,
    /// Also instantiate each input with a trigger on a fresh name.
    pub fresh_trigger: bool,
}

impl Default for ExploreBudget {
    fn default() -> Self {
        ExploreBudget {
            max_states: 10_000,
            max_tau_chain: 16,
            max_depth: 12,
            input_instantiations: Vec::new(),
            fresh_trigger: true,
        }
    }
}

/// What a process can do, with inputs left symbolic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Commitment {
    Tau(Term),
    Out {
        extruded: Vec<Sym>,
        subject: Sym,
        payload: Term,
        residual: Term,
    },
    /// After receiving `A` on `subject` the process becomes
    /// `residual{A/binder}`.
    In {
        subject: Sym,
        binder: Sym,
        residual: Term,
    },
}

impl Commitment {
    pub fn instantiate(binder: &Sym, residual: &Term, payload: &Term) -> Term {
        normalize(&subst(residual, &Subst::term(binder.clone(), payload.clone())))
    }
}

/// Commitments of a term whose bound names are pairwise distinct and distinct
/// from its free names (every alpha-canonical term qualifies after
/// `uniquify`). Residuals are not normalized.
pub fn commitments(t: &Term) -> Vec<Commitment> {
    let t = uniquify(t);
    commit(&t)
}

/// Renames every restriction so bound names are pairwise distinct and
/// distinct from the free names.
pub fn uniquify(t: &Term) -> Term {
    let mut used: BTreeSet<Sym> = symbols(t);
    let mut seen: BTreeSet<Sym> = free_names(t);
    uniq(t, &mut used, &mut seen)
}

fn uniq(t: &Term, used: &mut BTreeSet<Sym>, seen: &mut BTreeSet<Sym>) -> Term {
    match t {
        Term::Nil | Term::Var(_) => t.clone(),
        Term::Input(a, p, b) => Term::Input(a.clone(), p.clone(), Arc::new(uniq(b, used, seen))),
        Term::Output(a, p, c) => Term::Output(
            a.clone(),
            Arc::new(uniq(p, used, seen)),
            Arc::new(uniq(c, used, seen)),
        ),
        Term::Par(l, r) => Term::Par(Arc::new(uniq(l, used, seen)), Arc::new(uniq(r, used, seen))),
        Term::Res(c, b) => {
            if seen.insert(c.clone()) {
                Term::Res(c.clone(), Arc::new(uniq(b, used, seen)))
            } else {
                let fresh = fresh_name(used);
                used.insert(fresh.clone());
                seen.insert(fresh.clone());
                let body = rename_consts(b, &[(c.clone(), fresh.clone())].into_iter().collect());
                Term::Res(fresh, Arc::new(uniq(&body, used, seen)))
            }
        }
        Term::Abs(ps, b) => Term::Abs(ps.clone(), Arc::new(uniq(b, used, seen))),
        Term::App(f, args) => Term::App(Arc::new(uniq(f, used, seen)), args.clone()),
    }
}

fn commit(t: &Term) -> Vec<Commitment> {
    match t {
        Term::Input(Name::Const(a), Param::Proc(x), body) => vec![Commitment::In {
            subject: a.clone(),
            binder: x.clone(),
            residual: (**body).clone(),
        }],
        Term::Output(Name::Const(a), payload, cont) => vec![Commitment::Out {
            extruded: Vec::new(),
            subject: a.clone(),
            payload: (**payload).clone(),
            residual: (**cont).clone(),
        }],
        Term::Par(l, r) => {
            let cl = commit(l);
            let cr = commit(r);
            let mut out = Vec::new();
            for c in &cl {
                out.push(lift_par(c, r, true));
            }
            for c in &cr {
                out.push(lift_par(c, l, false));
            }
            for (ins, outs, in_left) in [(&cl, &cr, true), (&cr, &cl, false)] {
                for i in ins.iter() {
                    let Commitment::In {
                        subject: a,
                        binder,
                        residual: recv,
                    } = i
                    else {
                        continue;
                    };
                    for o in outs.iter() {
                        let Commitment::Out {
                            extruded,
                            subject: b,
                            payload,
                            residual: sent,
                        } = o
                        else {
                            continue;
                        };
                        if a != b {
                            continue;
                        }
                        let (extruded, payload, sent) =
                            apart(extruded, payload, sent, &free_names(recv));
                        let received = subst(recv, &Subst::term(binder.clone(), payload));
                        let body = if in_left {
                            Term::par(received, sent)
                        } else {
                            Term::par(sent, received)
                        };
                        out.push(Commitment::Tau(Term::res_all(&extruded, body)));
                    }
                }
            }
            out
        }
        Term::Res(c, body) => commit(body)
            .into_iter()
            .filter_map(|cm| match cm {
                Commitment::Tau(r) => Some(Commitment::Tau(Term::Res(c.clone(), Arc::new(r)))),
                Commitment::Out {
                    mut extruded,
                    subject,
                    payload,
                    residual,
                } => {
                    if subject == *c {
                        None
                    } else if free_names(&payload).contains(c) {
                        extruded.insert(0, c.clone());
                        Some(Commitment::Out {
                            extruded,
                            subject,
                            payload,
                            residual,
                        })
                    } else {
                        Some(Commitment::Out {
                            extruded,
                            subject,
                            payload,
                            residual: Term::Res(c.clone(), Arc::new(residual)),
                        })
                    }
                }
                Commitment::In {
                    subject,
                    binder,
                    residual,
                } => (subject != *c).then(|| Commitment::In {
                    subject,
                    binder,
                    residual: Term::Res(c.clone(), Arc::new(residual)),
                }),
            })
            .collect(),
        Term::App(f, args) => match &**f {
            Term::Abs(ps, body) => match Subst::bind(ps, args) {
                Some(s) => commitments(&subst(body, &s)),
                None => Vec::new(),
            },
            _ => Vec::new(),
        },
        _ => Vec::new(),
    }
}

/// Renames extruded names that clash with `avoid`.
fn apart(
    extruded: &[Sym],
    payload: &Term,
    residual: &Term,
    avoid: &BTreeSet<Sym>,
) -> (Vec<Sym>, Term, Term) {
    if extruded.iter().all(|c| !avoid.contains(c)) {
        return (extruded.to_vec(), payload.clone(), residual.clone());
    }
    let mut used = avoid.clone();
    used.extend(symbols(payload));
    used.extend(symbols(residual));
    let mut map = BTreeMap::new();
    let mut names = Vec::new();
    for c in extruded {
        if avoid.contains(c) {
            let f = fresh_name(&used);
            used.insert(f.clone());
            map.insert(c.clone(), f.clone());
            names.push(f);
        } else {
            names.push(c.clone());
        }
    }
    (names, rename_consts(payload, &map), rename_consts(residual, &map))
}

fn lift_par(c: &Commitment, other: &Term, left: bool) -> Commitment {
    let join = |t: Term| {
        if left {
            Term::par(t, other.clone())
        } else {
            Term::par(other.clone(), t)
        }
    };
    match c {
        Commitment::Tau(r) => Commitment::Tau(join(r.clone())),
        Commitment::Out {
            extruded,
            subject,
            payload,
            residual,
        } => {
            let (extruded, payload, residual) =
                apart(extruded, payload, residual, &free_names(other));
            Commitment::Out {
                extruded,
                subject: subject.clone(),
                payload,
                residual: join(residual),
            }
        }
        Commitment::In {
            subject,
            binder,
            residual,
        } => Commitment::In {
            subject: subject.clone(),
            binder: binder.clone(),
            residual: join(residual.clone()),
        },
    }
}

/// `\(Z). m!<Z>.0`, the trigger on `m`.
pub fn trigger(m: &Sym) -> Term {
    Term::abs(
        vec![Param::Proc(Sym::new("Z"))],
        Term::output(Name::Const(m.clone()), Term::var("Z"), Term::Nil),
    )
}

/// All transitions of `t` with normalized residuals, sorted. Inputs are
/// instantiated with the budget's payloads and, if enabled, with a trigger on
/// a name fresh for `t`.
pub fn transitions(t: &Term, budget: &ExploreBudget) -> Result<Vec<(Action, Term)>, Error> {
    let n = normalize(t);
    if n.is_abs() {
        return Err(Error::NotAProcess);
    }
    let mut payloads = budget.input_instantiations.clone();
    if budget.fresh_trigger {
        let mut avoid = symbols(&n);
        for p in &payloads {
            avoid.extend(symbols(p));
        }
        payloads.push(trigger(&fresh_name(&avoid)));
    }
    let mut out = Vec::new();
    for c in commitments(&n) {
        match c {
            Commitment::Tau(r) => out.push((Action::Tau, normalize(&r))),
            Commitment::Out {
                extruded,
                subject,
                payload,
                residual,
            } => out.push((
                Action::Out {
                    extruded,
                    subject,
                    payload: normalize(&payload),
                },
                normalize(&residual),
            )),
            Commitment::In {
                subject,
                binder,
                residual,
            } => {
                for p in &payloads {
                    out.push((
                        Action::In {
                            subject: subject.clone(),
                            payload: normalize(p),
                        },
                        Commitment::instantiate(&binder, &residual, p),
                    ));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// States reachable by internal steps, and whether the chain cap cut the
/// search short.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakClosure {
    pub states: BTreeSet<Term>,
    pub capped: bool,
}

/// Normalized states reachable from `t` in at most `max_tau_chain` internal
/// steps (including `t` itself).
pub fn weak_closure(t: &Term, budget: &ExploreBudget) -> WeakClosure {
    tau_closure(normalize(t), budget.max_tau_chain, |s| {
        commitments(s)
            .into_iter()
            .filter_map(|c| match c {
                Commitment::Tau(r) => Some(normalize(&r)),
                _ => None,
            })
            .collect()
    })
}

pub(crate) fn tau_closure(
    start: Term,
    cap: usize,
    mut taus: impl FnMut(&Term) -> Vec<Term>,
) -> WeakClosure {
    let mut states = BTreeSet::new();
    states.insert(start.clone());
    let mut queue = VecDeque::from([(start, 0usize)]);
    let mut capped = false;
    while let Some((s, depth)) = queue.pop_front() {
        let succ = taus(&s);
        if depth >= cap {
            if succ.iter().any(|n| !states.contains(n)) {
                capped = true;
            }
            continue;
        }
        for n in succ {
            if states.insert(n.clone()) {
                queue.push_back((n, depth + 1));
            }
        }
    }
    WeakClosure { states, capped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{dummy_abstraction, CalcId};

    fn d() -> Term {
        dummy_abstraction(CalcId::PiD(1))
    }

    #[test]
    fn output_prefix() {
        let t = Term::output(Name::c("d"), d(), Term::Nil);
        let ts = transitions(&t, &ExploreBudget::default()).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(
            ts[0].0,
            Action::Out {
                extruded: vec![],
                subject: Sym::new("d"),
                payload: normalize(&d())
            }
        );
        assert_eq!(ts[0].1, Term::Nil);
    }

    #[test]
    fn extrusion_of_restricted_name() {
        let payload = trigger(&Sym::new("c"));
        let t = Term::res("c", Term::output(Name::c("a"), payload, Term::Nil));
        let ts = transitions(&t, &ExploreBudget::default()).unwrap();
        assert_eq!(ts.len(), 1);
        let Action::Out { extruded, subject, payload } = &ts[0].0 else { panic!() };
        assert_eq!(extruded.len(), 1);
        assert_eq!(subject.as_str(), "a");
        assert!(free_names(payload).contains(&extruded[0]));
    }

    #[test]
    fn communication_closes_scope() {
        // a(X).X<0^> | new c. a!<Tr_c>.0  --tau-->  new c. c!<0^>.0 == 0
        let recv = Term::input(
            Name::c("a"),
            "X",
            Term::app(Term::var("X"), vec![crate::syntax::Arg::Term(d())]),
        );
        let send = Term::res("c", Term::output(Name::c("a"), trigger(&Sym::new("c")), Term::Nil));
        let t = Term::par(recv.clone(), send);
        let ts = transitions(&t, &ExploreBudget::default()).unwrap();
        let taus: Vec<_> = ts.iter().filter(|(a, _)| a.is_tau()).collect();
        assert_eq!(taus.len(), 1);
        assert_eq!(taus[0].1, Term::Nil);
        // with a free trigger name the residual barks on m
        let send_m = Term::output(Name::c("a"), trigger(&Sym::new("m")), Term::Nil);
        let ts = transitions(&Term::par(recv, send_m), &ExploreBudget::default()).unwrap();
        let (_, r) = ts.iter().find(|(a, _)| a.is_tau()).unwrap();
        assert_eq!(*r, normalize(&Term::output(Name::c("m"), d(), Term::Nil)));
    }

    #[test]
    fn abstraction_is_not_a_process() {
        assert!(matches!(
            transitions(&d(), &ExploreBudget::default()),
            Err(Error::NotAProcess)
        ));
    }

    #[test]
    fn weak_closure_of_nil() {
        let w = weak_closure(&Term::Nil, &ExploreBudget::default());
        assert_eq!(w.states.len(), 1);
        assert!(!w.capped);
    }
}
