//! Triggers, factorization, and the elaborations of `!` and `tau`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::Error;
use crate::semantics::{normalize, trigger};
use crate::sort::sort_check;
use crate::syntax::{
    dummy_abstraction, free_vars, fresh_name, fresh_with, is_closed, subst, symbols, Arg, CalcId,
    Name, Param, Sort, Subst, Sym, Term,
};

/// `\(Z). m!<Z>.0`. Only the single-parameter process-passing calculus has
/// triggers: a name abstraction cannot forward the name it is applied to.
pub fn make_trigger(m: &Sym, calc: CalcId) -> Result<Term, Error> {
    match calc {
        CalcId::PiD(1) => Ok(trigger(m)),
        CalcId::Pid(_) => Err(Error::UnsupportedCalculus {
            calc,
            reason: "name-passing is not allowed, so a trigger cannot pass on the name it \
                     receives"
                .into(),
        }),
        _ => Err(Error::UnsupportedCalculus {
            calc,
            reason: "triggers are defined for single-parameter process abstractions only".into(),
        }),
    }
}

/// The prefix of a replicated process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prefix {
    Input { subject: Name, binder: Param },
    Output { subject: Name, payload: Term },
}

impl Prefix {
    fn guard(&self, body: Term) -> Term {
        match self {
            Prefix::Input { subject, binder } => {
                Term::Input(subject.clone(), binder.clone(), body.into())
            }
            Prefix::Output { subject, payload } => {
                Term::Output(subject.clone(), payload.clone().into(), body.into())
            }
        }
    }

    fn symbols(&self) -> BTreeSet<Sym> {
        let probe = self.guard(Term::Nil);
        let mut s = symbols(&probe);
        if let Prefix::Input { binder, .. } = self {
            s.insert(binder.sym().clone());
        }
        s
    }
}

/// `!p.P` as a derived operator.
///
/// With `Q = c(X).(p.(X | P) | c!<X>.0)` the textbook encoding is
/// `new c. (Q | c!<Q>.0)`, which reaches `new c. (p.(Q | P) | c!<Q>.0)` after
/// one internal step. The latter is returned so that the first action of `!p.P`
/// is `p`. In the parameterized calculi the circulating copy of `Q` is wrapped
/// in a dummy abstraction so that it is a legal payload.
pub fn encode_replication(prefix: &Prefix, p: &Term, calc: CalcId) -> Term {
    let mut avoid = symbols(p);
    avoid.extend(prefix.symbols());
    let c = fresh_name(&avoid);
    avoid.insert(c.clone());
    let x = fresh_with("X", &avoid);
    avoid.insert(x.clone());
    let cn = Name::Const(c.clone());

    let (unfold_x, wrap): (Term, Box<dyn Fn(Term) -> Term>) = match calc {
        CalcId::Pi => (Term::Var(x.clone()), Box::new(|q| q)),
        CalcId::PiD(n) => {
            let ys: Vec<Param> = (0..n)
                .map(|i| Param::Proc(fresh_with(&format!("Y{i}_"), &avoid)))
                .collect();
            let arg = dummy_abstraction(calc);
            (
                Term::app(Term::Var(x.clone()), vec![Arg::Term(arg); n]),
                Box::new(move |q| Term::abs(ys.clone(), q)),
            )
        }
        CalcId::Pid(n) => {
            let ys: Vec<Param> = (0..n)
                .map(|i| Param::Name(fresh_with(&format!("y{i}_"), &avoid)))
                .collect();
            (
                Term::app(Term::Var(x.clone()), vec![Arg::Name(cn.clone()); n]),
                Box::new(move |q| Term::abs(ys.clone(), q)),
            )
        }
    };
    let q = Term::Input(
        cn.clone(),
        Param::Proc(x.clone()),
        Term::par(
            prefix.guard(Term::par(unfold_x, p.clone())),
            Term::output(cn.clone(), Term::Var(x), Term::Nil),
        )
        .into(),
    );
    let d = wrap(q.clone());
    Term::Res(
        c,
        Term::par(
            prefix.guard(Term::par(q, p.clone())),
            Term::output(cn, d, Term::Nil),
        )
        .into(),
    )
}

/// `tau.P` as `new a. (a(X).P | a!<dummy>.0)` with `a` fresh.
pub fn encode_tau(p: &Term, calc: CalcId) -> Term {
    let avoid = symbols(p);
    let a = fresh_name(&avoid);
    let x = fresh_with("X", &avoid);
    Term::Res(
        a.clone(),
        Term::par(
            Term::Input(Name::Const(a.clone()), Param::Proc(x), p.clone().into()),
            Term::output(Name::Const(a), dummy_abstraction(calc), Term::Nil),
        )
        .into(),
    )
}

/// `!m(Z).A<Z>`, the server that answers calls on the trigger `m`.
pub fn trigger_server(m: &Sym, a: &Term) -> Term {
    let mut avoid = symbols(a);
    avoid.insert(m.clone());
    let z = if avoid.contains(&Sym::new("Z")) {
        fresh_with("Z", &avoid)
    } else {
        Sym::new("Z")
    };
    encode_replication(
        &Prefix::Input {
            subject: Name::Const(m.clone()),
            binder: Param::Proc(z.clone()),
        },
        &Term::app(a.clone(), vec![Arg::Term(Term::Var(z))]),
        CalcId::PiD(1),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorCase {
    /// `E[Tr_m]` is a process.
    NonParameterized,
    /// `E[Tr_m]` is an abstraction with this many parameters.
    Parameterized(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationResult {
    /// `E[A]`.
    pub original: Term,
    /// `new m. (E[Tr_m] | !m(Z).A<Z>)`, or the same under the parameters of
    /// `E[Tr_m]`.
    pub factored: Term,
    pub trigger_name: Sym,
    pub case: FactorCase,
}

/// Moves `a` out of the context `e` (hole `hole`) behind a trigger on a fresh
/// name, leaving a server for it alongside.
pub fn factorize(e: &Term, hole: &Sym, a: &Term, calc: CalcId) -> Result<FactorizationResult, Error> {
    make_trigger(&Sym::new("m"), calc)?;
    let sa = sort_check(a, calc)?;
    if sa != Sort::AbsD(1) {
        return Err(crate::error::SortError {
            path: "argument".into(),
            reason: format!("factorized term has sort {sa}, expected AbsD(1)"),
        }
        .into());
    }
    if !is_closed(a) {
        return Err(Error::OpenTerm {
            name: crate::print::print_term(a),
            vars: format!("{:?}", free_vars(a)),
        });
    }
    sort_check(e, calc)?;
    let mut avoid = symbols(e);
    avoid.extend(symbols(a));
    let m = fresh_name(&avoid);
    let original = subst(e, &Subst::term(hole.clone(), a.clone()));
    let mut head = subst(e, &Subst::term(hole.clone(), trigger(&m)));
    if matches!(head, Term::App(..)) && normalize(&head).is_abs() {
        head = normalize(&head);
    }
    let mut layers = Vec::new();
    while let Term::Abs(ps, body) = head {
        layers.push(ps);
        head = (*body).clone();
    }
    let core = Term::res_all(
        std::slice::from_ref(&m),
        Term::par(head, trigger_server(&m, a)),
    );
    let k = layers.iter().map(Vec::len).sum();
    let factored = layers.into_iter().rev().fold(core, |acc, ps| Term::abs(ps, acc));
    Ok(FactorizationResult {
        original,
        factored,
        trigger_name: m,
        case: if k == 0 {
            FactorCase::NonParameterized
        } else {
            FactorCase::Parameterized(k)
        },
    })
}

/// A context and an abstraction to factorize, named after the shape of the
/// context.
#[derive(Clone, Debug)]
pub struct FactorFixture {
    pub name: &'static str,
    pub context: Term,
    pub argument: Term,
}

fn fixture_term(src: &str) -> Term {
    crate::parse::parse_term(src, CalcId::PiD(1)).expect("fixture parses")
}

/// One factorization instance per syntactic shape of the context: nil,
/// an unrelated variable, the hole, the hole applied, an abstraction, an
/// output, an input, a parallel composition, a restriction, and
/// applications of a variable and of an abstraction.
pub fn factorization_fixtures() -> Vec<FactorFixture> {
    let fwd = "\\(Z). a!<Z>.0";
    let run = "\\(Z). (Z<\\(Y).0> | b!)";
    [
        ("nil", "0", run),
        ("variable", "\\(Y). Y<\\(V).0>", run),
        ("hole", "X", run),
        ("hole-applied", "X<\\(Y). c!<\\(V).0>.Y<\\(V).0>>", fwd),
        ("abstraction", "\\(Y). (Y<\\(V).0> | X<Y>)", run),
        ("output", "a!<X>.X<\\(V).0>", run),
        ("input", "c(Y).X<Y>", fwd),
        ("parallel", "X<\\(V).0> | X<\\(Y). c!>", run),
        ("restriction", "new c. (X<\\(Y). c!> | c(W).a!)", run),
        ("application-of-variable", "\\(Y). Y<X>", run),
        ("application-of-abstraction", "(\\(Y). (Y<\\(V).0> | c!))<X>", fwd),
    ]
    .into_iter()
    .map(|(name, e, a)| FactorFixture {
        name,
        context: fixture_term(e),
        argument: fixture_term(a),
    })
    .collect()
}

/// Which distributive law for trigger servers a fixture instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServerLaw {
    /// `new m.(p.E[Tr_m] | S) ~ p.new m.(E[Tr_m] | S)` for `m` not in `p`.
    Prefix,
    /// A payload `E2[Tr_m]` may carry its own copy of the server.
    OutputPayload,
    /// One server may be shared by, or split between, parallel components.
    Parallel,
    /// `B<new m.(E[Tr_m] | S)> ~ new m.(B<E[Tr_m]> | S)`.
    Application,
}

#[derive(Clone, Debug)]
pub struct ServerLawFixture {
    pub law: ServerLaw,
    pub left: Term,
    pub right: Term,
}

/// Concrete instances of the distributive laws for a server
/// `S = !m(Z).A<Z>` on a fresh `m`. Where a law places the server next to an
/// abstraction, the restriction is taken under the abstraction's parameter.
pub fn server_law_fixtures() -> Vec<ServerLawFixture> {
    let m = Sym::new("m");
    let d = "\\(V).0";
    let fwd = fixture_term("\\(Z). a!<Z>.0");
    let run = fixture_term(&format!("\\(Z). (Z<{d}> | b!)"));
    let inst = |law, a: &Term, l: String, r: String| {
        let s = crate::print::print_term(&trigger_server(&m, a));
        let opts = crate::parse::ParseOptions {
            allow_reserved: true,
            ..crate::parse::ParseOptions::new(CalcId::PiD(1))
        };
        let p = |src: String| {
            crate::parse::parse_term_with(&src.replace("$S", &format!("({s})")), &opts)
                .expect("fixture parses")
        };
        ServerLawFixture {
            law,
            left: p(l),
            right: p(r),
        }
    };
    let tr = "(\\(Z). m!<Z>.0)";
    vec![
        inst(
            ServerLaw::Prefix,
            &fwd,
            format!("new m. (a!<{d}>.{tr}<{d}> | $S)"),
            format!("a!<{d}>.new m. ({tr}<{d}> | $S)"),
        ),
        inst(
            ServerLaw::Prefix,
            &run,
            format!("new m. (c(Y).{tr}<Y> | $S)"),
            format!("c(Y).new m. ({tr}<Y> | $S)"),
        ),
        inst(
            ServerLaw::OutputPayload,
            &fwd,
            format!("new m. (c!<\\(Y). {tr}<Y>>.0 | $S)"),
            format!("new m. (c!<\\(Y). new m. ({tr}<Y> | $S)>.0 | $S)"),
        ),
        inst(
            ServerLaw::OutputPayload,
            &run,
            format!("new m. (c!<\\(Y). ({tr}<Y> | e!)>.{tr}<{d}> | $S)"),
            format!("new m. (c!<\\(Y). new m. ({tr}<Y> | e! | $S)>.{tr}<{d}> | $S)"),
        ),
        inst(
            ServerLaw::Parallel,
            &run,
            format!("new m. ({tr}<{d}> | {tr}<\\(Y). c!> | $S)"),
            format!("new m. ({tr}<{d}> | $S) | new m. ({tr}<\\(Y). c!> | $S)"),
        ),
        inst(
            ServerLaw::Parallel,
            &fwd,
            format!("new m. (c(Y).{tr}<Y> | {tr}<{d}> | $S)"),
            format!("new m. (c(Y).{tr}<Y> | $S) | new m. ({tr}<{d}> | $S)"),
        ),
        inst(
            ServerLaw::Application,
            &fwd,
            format!("(\\(Y). Y<{d}>)<\\(W). new m. ({tr}<W> | $S)>"),
            format!("new m. ((\\(Y). Y<{d}>)<\\(W). {tr}<W>> | $S)"),
        ),
        inst(
            ServerLaw::Application,
            &fwd,
            format!("(\\(Y). (Y<{d}> | Y<\\(V). c!>))<\\(W). new m. ({tr}<W> | e! | $S)>"),
            format!("new m. ((\\(Y). (Y<{d}> | Y<\\(V). c!>))<\\(W). ({tr}<W> | e!)> | $S)"),
        ),
    ]
}
