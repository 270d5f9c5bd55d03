//! ASCII printer. Output is deterministic and parses back to an
//! alpha-equivalent term.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::syntax::{
    alpha_eq, free_names, free_vars, symbols, Arg, Name, Param, Sym, Term, VarRef,
    RESERVED_PREFIX,
};

/// Prints `t`, folding internal-step and replication encodings back into
/// `tau.P` and `!p.P`.
pub fn print_term(t: &Term) -> String {
    Printer { sugar: true }.print(t)
}

/// Prints `t` with `tau` and replication shown in elaborated form.
pub fn print_term_elaborated(t: &Term) -> String {
    Printer { sugar: false }.print(t)
}

struct Printer {
    sugar: bool,
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Level {
    Par,
    Unary,
    Atom,
}

fn is_generated(s: &Sym) -> bool {
    matches!(s.as_str().chars().next(), Some(RESERVED_PREFIX) | Some('@') | Some('%'))
}

/// Renames generated bound identifiers to readable ones that occur nowhere
/// in the term.
fn prettify(t: &Term) -> Term {
    let mut taken = symbols(t);
    let mut cx = Pretty {
        taken: &mut taken,
        env: Vec::new(),
    };
    cx.go(t)
}

struct Pretty<'a> {
    taken: &'a mut BTreeSet<Sym>,
    env: Vec<(Sym, Sym)>,
}

impl Pretty<'_> {
    fn pick(&mut self, kind: char) -> Sym {
        let bases: &[&str] = match kind {
            'P' => &["X", "Y", "Z", "W"],
            'v' => &["x", "y", "z", "w"],
            _ => &["c", "d", "e", "k"],
        };
        for round in 0.. {
            for b in bases {
                let s = if round == 0 {
                    Sym::new(b)
                } else {
                    Sym::new(&format!("{b}{round}"))
                };
                if !self.taken.contains(&s) && !self.env.iter().any(|(_, v)| *v == s) {
                    return s;
                }
            }
        }
        unreachable!()
    }

    fn look(&self, s: &Sym) -> Sym {
        self.env
            .iter()
            .rev()
            .find(|(k, _)| k == s)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| s.clone())
    }

    fn bind(&mut self, s: &Sym, kind: char) -> Sym {
        let new = if is_generated(s) {
            self.pick(kind)
        } else {
            s.clone()
        };
        self.env.push((s.clone(), new.clone()));
        new
    }

    fn name(&self, n: &Name) -> Name {
        match n {
            Name::Const(c) => Name::Const(self.look(c)),
            Name::Var(x) => Name::Var(self.look(x)),
        }
    }

    fn param(&mut self, p: &Param) -> Param {
        match p {
            Param::Proc(x) => Param::Proc(self.bind(x, 'P')),
            Param::Name(x) => Param::Name(self.bind(x, 'v')),
        }
    }

    fn go(&mut self, t: &Term) -> Term {
        match t {
            Term::Nil => Term::Nil,
            Term::Var(x) => Term::Var(self.look(x)),
            Term::Input(a, p, b) => {
                let a = self.name(a);
                let p = self.param(p);
                let b = self.go(b);
                self.env.pop();
                Term::Input(a, p, Arc::new(b))
            }
            Term::Output(a, p, c) => {
                Term::Output(self.name(a), Arc::new(self.go(p)), Arc::new(self.go(c)))
            }
            Term::Par(l, r) => Term::Par(Arc::new(self.go(l)), Arc::new(self.go(r))),
            Term::Res(c, b) => {
                let c = self.bind(c, 'c');
                let b = self.go(b);
                self.env.pop();
                Term::Res(c, Arc::new(b))
            }
            Term::Abs(ps, b) => {
                let ps: Vec<Param> = ps.iter().map(|p| self.param(p)).collect();
                let b = self.go(b);
                for _ in &ps {
                    self.env.pop();
                }
                Term::Abs(ps, Arc::new(b))
            }
            Term::App(f, args) => Term::App(
                Arc::new(self.go(f)),
                args.iter()
                    .map(|a| match a {
                        Arg::Term(t) => Arg::Term(self.go(t)),
                        Arg::Name(n) => Arg::Name(self.name(n)),
                    })
                    .collect(),
            ),
        }
    }
}

pub(crate) fn par_items(t: &Term) -> Vec<&Term> {
    match t {
        Term::Par(l, r) => {
            let mut v = par_items(l);
            v.extend(par_items(r));
            v
        }
        Term::Nil => Vec::new(),
        other => vec![other],
    }
}

fn is_dummy(t: &Term) -> bool {
    match t {
        Term::Nil => true,
        Term::Abs(_, b) => **b == Term::Nil,
        _ => false,
    }
}

/// `new a. (a(X).P | a!<dummy>.0)` with `a`, `X` unused in `P`.
pub(crate) fn as_tau(t: &Term) -> Option<&Term> {
    let Term::Res(a, body) = t else { return None };
    let items = par_items(body);
    if items.len() != 2 {
        return None;
    }
    let is_send = |t: &Term| {
        matches!(t, Term::Output(Name::Const(b), p, k) if b == a && is_dummy(p) && **k == Term::Nil)
    };
    let (recv, send) = if is_send(items[1]) {
        (items[0], items[1])
    } else {
        (items[1], items[0])
    };
    if !is_send(send) {
        return None;
    }
    let Term::Input(Name::Const(b), Param::Proc(x), p) = recv else {
        return None;
    };
    if b != a || free_names(p).contains(a) || free_vars(p).contains(&VarRef::Proc(x.clone())) {
        return None;
    }
    Some(p)
}

/// Recognizes the replication encoding `new c. (p.(Q | P) | c!<D>.0)`
/// (with `Q` the unfolding of `D`) and returns the replicated prefix
/// (`p.P`, as a term) if it matches.
pub(crate) fn as_replication(t: &Term) -> Option<Term> {
    let Term::Res(c, body) = t else { return None };
    let items = par_items(body);
    if items.len() != 2 {
        return None;
    }
    let is_server = |t: &Term| {
        matches!(t, Term::Output(Name::Const(b), _, k) if b == c && **k == Term::Nil)
    };
    let (active, send) = if is_server(items[1]) {
        (items[0], items[1])
    } else {
        (items[1], items[0])
    };
    let Term::Output(_, d, _) = send else { return None };
    if !is_server(send) {
        return None;
    }
    let q: &Term = match &**d {
        Term::Abs(ps, q) if ps.len() == 1 => q,
        other => other,
    };
    let Term::Input(Name::Const(c2), Param::Proc(xv), qb) = q else {
        return None;
    };
    if c2 != c {
        return None;
    }
    let qitems = par_items(qb);
    if qitems.len() != 2 {
        return None;
    }
    let resend = |t: &Term| {
        matches!(t, Term::Output(Name::Const(b), p, k)
            if b == c && **p == Term::Var(xv.clone()) && **k == Term::Nil)
    };
    let inner = if resend(qitems[0]) {
        qitems[1]
    } else if resend(qitems[1]) {
        qitems[0]
    } else {
        return None;
    };
    let unfolds_var = |t: &Term| match t {
        Term::Var(y) => y == xv,
        Term::App(f, _) => **f == Term::Var(xv.clone()),
        _ => false,
    };
    let inner_prefix = strip_unfolding(inner, unfolds_var)?;
    let unfolds_d = |t: &Term| match t {
        Term::App(f, _) => alpha_eq(f, d),
        other => alpha_eq(other, q),
    };
    let outer_prefix = strip_unfolding(active, unfolds_d)?;
    if !alpha_eq(&inner_prefix, &outer_prefix) || free_names(&outer_prefix).contains(c) {
        return None;
    }
    Some(outer_prefix)
}

/// For `p.(U | P)` where `is_unfold(U)`, returns `p.P`.
fn strip_unfolding(t: &Term, is_unfold: impl Fn(&Term) -> bool) -> Option<Term> {
    let (body, rebuild): (&Term, Box<dyn Fn(Term) -> Term>) = match t {
        Term::Input(a, p, b) => {
            let (a, p) = (a.clone(), p.clone());
            (b, Box::new(move |k| Term::Input(a.clone(), p.clone(), Arc::new(k))))
        }
        Term::Output(a, obj, b) => {
            let (a, obj) = (a.clone(), obj.clone());
            (b, Box::new(move |k| Term::Output(a.clone(), obj.clone(), Arc::new(k))))
        }
        _ => return None,
    };
    let items = par_items(body);
    let pos = items.iter().position(|t| is_unfold(t))?;
    let rest: Vec<Term> = items
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != pos)
        .map(|(_, t)| (*t).clone())
        .collect();
    Some(rebuild(Term::par_all(rest)))
}

impl Printer {
    fn print(&self, t: &Term) -> String {
        let t = prettify(t);
        let mut s = String::new();
        self.term(&t, Level::Par, &mut s);
        s
    }

    fn term(&self, t: &Term, ctx: Level, out: &mut String) {
        let own = match t {
            Term::Par(..) => Level::Par,
            Term::Nil | Term::Var(_) | Term::App(..) => Level::Atom,
            _ => Level::Unary,
        };
        if own < ctx {
            out.push('(');
            self.term(t, Level::Par, out);
            out.push(')');
            return;
        }
        if self.sugar {
            if let Some(p) = as_tau(t) {
                out.push_str("tau.");
                self.term(p, Level::Unary, out);
                return;
            }
            if let Some(p) = as_replication(t) {
                out.push('!');
                self.term(&p, Level::Unary, out);
                return;
            }
        }
        match t {
            Term::Nil => out.push('0'),
            Term::Var(x) => out.push_str(x.as_str()),
            Term::Input(a, p, b) => {
                out.push_str(a.sym().as_str());
                let unused = match p {
                    Param::Proc(x) => !free_vars(b).contains(&VarRef::Proc(x.clone())),
                    Param::Name(x) => !free_vars(b).contains(&VarRef::Name(x.clone())),
                };
                if self.sugar && unused && matches!(p, Param::Proc(_)) {
                    if **b != Term::Nil {
                        out.push('.');
                        self.term(b, Level::Unary, out);
                    }
                    return;
                }
                out.push('(');
                out.push_str(p.sym().as_str());
                out.push_str(").");
                self.term(b, Level::Unary, out);
            }
            Term::Output(a, p, k) => {
                out.push_str(a.sym().as_str());
                out.push_str("!<");
                self.term(p, Level::Par, out);
                out.push_str(">.");
                self.term(k, Level::Unary, out);
            }
            Term::Par(l, r) => {
                self.term(l, Level::Unary, out);
                out.push_str(" | ");
                self.term(r, Level::Par, out);
            }
            Term::Res(c, b) => {
                out.push_str("new ");
                out.push_str(c.as_str());
                out.push_str(". ");
                self.term(b, Level::Unary, out);
            }
            Term::Abs(ps, b) => {
                out.push_str("\\(");
                let names: Vec<&str> = ps.iter().map(|p| p.sym().as_str()).collect();
                out.push_str(&names.join(", "));
                out.push_str("). ");
                self.term(b, Level::Unary, out);
            }
            Term::App(f, args) => {
                self.term(f, Level::Atom, out);
                out.push('<');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    match a {
                        Arg::Term(t) => self.term(t, Level::Par, out),
                        Arg::Name(n) => out.push_str(n.sym().as_str()),
                    }
                }
                out.push('>');
            }
        }
    }
}
