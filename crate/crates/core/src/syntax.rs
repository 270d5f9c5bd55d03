//! Abstract syntax for the strictly higher-order pi-calculus and its two
//! parameterized extensions, with the binding machinery that everything else
//! is built on: free names and variables, capture-avoiding substitution and
//! alpha-canonical forms.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use once_cell::sync::Lazy;
use parking_lot::Mutex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Prefix of every identifier the workbench invents. The parser refuses it in
/// user input, so a generated name can never collide with a user name.
pub const RESERVED_PREFIX: char = '#';

static INTERNER: Lazy<Mutex<HashSet<Arc<str>>>> = Lazy::new(|| Mutex::new(HashSet::new()));

/// An interned identifier. Ordering is by the underlying string.
#[derive(Clone)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(s: &str) -> Sym {
        let mut set = INTERNER.lock();
        if let Some(existing) = set.get(s) {
            return Sym(existing.clone());
        }
        let arc: Arc<str> = Arc::from(s);
        set.insert(arc.clone());
        Sym(arc)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_reserved(&self) -> bool {
        self.0.starts_with(RESERVED_PREFIX)
    }

    /// Process variables are spelled with a leading upper-case letter
    /// (after the optional reserved prefix).
    pub fn looks_like_proc_var(&self) -> bool {
        self.0
            .trim_start_matches(RESERVED_PREFIX)
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_uppercase())
    }
}

impl PartialEq for Sym {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}
impl Eq for Sym {}

impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Sym {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return std::cmp::Ordering::Equal;
        }
        self.0.cmp(&other.0)
    }
}
impl Hash for Sym {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Sym {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}
impl<'de> Deserialize<'de> for Sym {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Sym, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Sym::new(&s))
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Sym {
        Sym::new(s)
    }
}

/// A channel name: either a constant (`a`, `m`) or a name variable (`x`),
/// the latter bound only by name abstractions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "lowercase")]
pub enum Name {
    Const(Sym),
    Var(Sym),
}

impl Name {
    pub fn c(s: &str) -> Name {
        Name::Const(Sym::new(s))
    }

    pub fn sym(&self) -> &Sym {
        match self {
            Name::Const(s) | Name::Var(s) => s,
        }
    }

    pub fn as_const(&self) -> Option<&Sym> {
        match self {
            Name::Const(s) => Some(s),
            Name::Var(_) => None,
        }
    }
}

/// A binder introduced by an input prefix or an abstraction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "lowercase")]
pub enum Param {
    /// A process variable (`X`).
    Proc(Sym),
    /// A name variable (`x`).
    Name(Sym),
}

impl Param {
    pub fn sym(&self) -> &Sym {
        match self {
            Param::Proc(s) | Param::Name(s) => s,
        }
    }

    fn with_sym(&self, s: Sym) -> Param {
        match self {
            Param::Proc(_) => Param::Proc(s),
            Param::Name(_) => Param::Name(s),
        }
    }
}

/// Argument of an application: a term (process parameterization) or a name
/// (name parameterization).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arg {
    Term(Term),
    Name(Name),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    Nil,
    Var(Sym),
    Input(Name, Param, Arc<Term>),
    Output(Name, Arc<Term>, Arc<Term>),
    Par(Arc<Term>, Arc<Term>),
    Res(Sym, Arc<Term>),
    Abs(Vec<Param>, Arc<Term>),
    App(Arc<Term>, Vec<Arg>),
}

/// Reference to a free variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarRef {
    Proc(Sym),
    Name(Sym),
}

/// The minimal sorts needed to keep the three calculi apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sort {
    Proc,
    AbsD(usize),
    Absd(usize),
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Proc => write!(f, "Proc"),
            Sort::AbsD(n) => write!(f, "AbsD({n})"),
            Sort::Absd(n) => write!(f, "Absd({n})"),
        }
    }
}

/// Which calculus a term is meant to live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CalcId {
    Pi,
    PiD(usize),
    Pid(usize),
}

impl CalcId {
    /// Sort of transmitted objects (and of process variables).
    pub fn payload_sort(self) -> Sort {
        match self {
            CalcId::Pi => Sort::Proc,
            CalcId::PiD(n) => Sort::AbsD(n),
            CalcId::Pid(n) => Sort::Absd(n),
        }
    }
}

impl fmt::Display for CalcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CalcId::Pi => write!(f, "pi"),
            CalcId::PiD(n) => write!(f, "piD{n}"),
            CalcId::Pid(n) => write!(f, "pid{n}"),
        }
    }
}

impl std::str::FromStr for CalcId {
    type Err = String;

    /// Accepts `pi`, `piD<n>` and `pid<n>`, with an optional space before the
    /// arity (`PiD 1`). The case of the `D` is significant.
    fn from_str(s: &str) -> Result<CalcId, String> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let lower_pi = compact.len() >= 2 && compact[..2].eq_ignore_ascii_case("pi");
        if !lower_pi {
            return Err(format!("unknown calculus `{s}`"));
        }
        let rest = &compact[2..];
        if rest.is_empty() {
            return Ok(CalcId::Pi);
        }
        let (kind, digits) = rest.split_at(1);
        let n: usize = digits
            .parse()
            .map_err(|_| format!("bad arity in calculus `{s}`"))?;
        if n == 0 {
            return Err(format!("arity must be positive in `{s}`"));
        }
        match kind {
            "D" => Ok(CalcId::PiD(n)),
            "d" => Ok(CalcId::Pid(n)),
            _ => Err(format!("unknown calculus `{s}`")),
        }
    }
}

// ---------------------------------------------------------------------------
// Constructors

impl Term {
    pub fn input(a: Name, x: &str, body: Term) -> Term {
        let sym = Sym::new(x);
        let param = if sym.looks_like_proc_var() {
            Param::Proc(sym)
        } else {
            Param::Name(sym)
        };
        Term::Input(a, param, Arc::new(body))
    }

    pub fn output(a: Name, payload: Term, cont: Term) -> Term {
        Term::Output(a, Arc::new(payload), Arc::new(cont))
    }

    pub fn par(l: Term, r: Term) -> Term {
        Term::Par(Arc::new(l), Arc::new(r))
    }

    /// Right-nested parallel composition; `0` when empty.
    pub fn par_all<I: IntoIterator<Item = Term>>(items: I) -> Term {
        let mut v: Vec<Term> = items.into_iter().collect();
        let Some(mut acc) = v.pop() else {
            return Term::Nil;
        };
        while let Some(t) = v.pop() {
            acc = Term::par(t, acc);
        }
        acc
    }

    pub fn res(c: &str, body: Term) -> Term {
        Term::Res(Sym::new(c), Arc::new(body))
    }

    pub fn res_all(names: &[Sym], body: Term) -> Term {
        names
            .iter()
            .rev()
            .fold(body, |acc, c| Term::Res(c.clone(), Arc::new(acc)))
    }

    pub fn abs(params: Vec<Param>, body: Term) -> Term {
        Term::Abs(params, Arc::new(body))
    }

    pub fn abs1(x: &str, body: Term) -> Term {
        let sym = Sym::new(x);
        let p = if sym.looks_like_proc_var() {
            Param::Proc(sym)
        } else {
            Param::Name(sym)
        };
        Term::abs(vec![p], body)
    }

    pub fn app(op: Term, args: Vec<Arg>) -> Term {
        Term::App(Arc::new(op), args)
    }

    pub fn var(x: &str) -> Term {
        Term::Var(Sym::new(x))
    }

    pub fn is_abs(&self) -> bool {
        matches!(self, Term::Abs(..))
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Nil | Term::Var(_) => 1,
            Term::Input(_, _, b) | Term::Res(_, b) => 1 + b.size(),
            Term::Output(_, p, c) | Term::Par(p, c) => 1 + p.size() + c.size(),
            Term::Abs(_, b) => 1 + b.size(),
            Term::App(f, args) => {
                1 + f.size()
                    + args
                        .iter()
                        .map(|a| match a {
                            Arg::Term(t) => t.size(),
                            Arg::Name(_) => 1,
                        })
                        .sum::<usize>()
            }
        }
    }
}

/// `\(Y1..Yn).0` (or `\(y1..yn).0`, or plain `0` in the base calculus): the
/// inert object used wherever a payload or argument carries no behaviour.
pub fn dummy_abstraction(calc: CalcId) -> Term {
    match calc {
        CalcId::Pi => Term::Nil,
        CalcId::PiD(n) => Term::abs(
            (0..n).map(|i| Param::Proc(Sym::new(&format!("Y{i}")))).collect(),
            Term::Nil,
        ),
        CalcId::Pid(n) => Term::abs(
            (0..n).map(|i| Param::Name(Sym::new(&format!("y{i}")))).collect(),
            Term::Nil,
        ),
    }
}

// ---------------------------------------------------------------------------
// Free names / variables

pub fn free_names(t: &Term) -> BTreeSet<Sym> {
    let mut out = BTreeSet::new();
    collect_fn(t, &mut Vec::new(), &mut |c| {
        out.insert(c.clone());
    });
    out
}

/// Free names in order of first occurrence (left to right).
pub fn free_names_in_order(t: &Term) -> Vec<Sym> {
    let mut out: Vec<Sym> = Vec::new();
    collect_fn(t, &mut Vec::new(), &mut |c| {
        if !out.contains(c) {
            out.push(c.clone());
        }
    });
    out
}

fn collect_fn(t: &Term, bound: &mut Vec<Sym>, out: &mut dyn FnMut(&Sym)) {
    let name = |n: &Name, bound: &Vec<Sym>, out: &mut dyn FnMut(&Sym)| {
        if let Name::Const(c) = n {
            if !bound.contains(c) {
                out(c);
            }
        }
    };
    match t {
        Term::Nil | Term::Var(_) => {}
        Term::Input(a, _, b) => {
            name(a, bound, out);
            collect_fn(b, bound, out);
        }
        Term::Output(a, p, c) => {
            name(a, bound, out);
            collect_fn(p, bound, out);
            collect_fn(c, bound, out);
        }
        Term::Par(l, r) => {
            collect_fn(l, bound, out);
            collect_fn(r, bound, out);
        }
        Term::Res(c, b) => {
            bound.push(c.clone());
            collect_fn(b, bound, out);
            bound.pop();
        }
        Term::Abs(_, b) => collect_fn(b, bound, out),
        Term::App(f, args) => {
            collect_fn(f, bound, out);
            for a in args {
                match a {
                    Arg::Term(t) => collect_fn(t, bound, out),
                    Arg::Name(n) => name(n, bound, out),
                }
            }
        }
    }
}

pub fn free_vars(t: &Term) -> BTreeSet<VarRef> {
    let mut out = BTreeSet::new();
    collect_fv(t, &mut Vec::new(), &mut out);
    out
}

fn collect_fv(t: &Term, bound: &mut Vec<Param>, out: &mut BTreeSet<VarRef>) {
    let name = |n: &Name, bound: &Vec<Param>, out: &mut BTreeSet<VarRef>| {
        if let Name::Var(x) = n {
            if !bound.contains(&Param::Name(x.clone())) {
                out.insert(VarRef::Name(x.clone()));
            }
        }
    };
    match t {
        Term::Nil => {}
        Term::Var(x) => {
            if !bound.contains(&Param::Proc(x.clone())) {
                out.insert(VarRef::Proc(x.clone()));
            }
        }
        Term::Input(a, p, b) => {
            name(a, bound, out);
            bound.push(p.clone());
            collect_fv(b, bound, out);
            bound.pop();
        }
        Term::Output(a, p, c) => {
            name(a, bound, out);
            collect_fv(p, bound, out);
            collect_fv(c, bound, out);
        }
        Term::Par(l, r) => {
            collect_fv(l, bound, out);
            collect_fv(r, bound, out);
        }
        Term::Res(_, b) => collect_fv(b, bound, out),
        Term::Abs(ps, b) => {
            let n = bound.len();
            bound.extend(ps.iter().cloned());
            collect_fv(b, bound, out);
            bound.truncate(n);
        }
        Term::App(f, args) => {
            collect_fv(f, bound, out);
            for a in args {
                match a {
                    Arg::Term(t) => collect_fv(t, bound, out),
                    Arg::Name(n) => name(n, bound, out),
                }
            }
        }
    }
}

pub fn is_closed(t: &Term) -> bool {
    free_vars(t).is_empty()
}

/// Every identifier occurring in `t`, bound or free, of any kind.
pub fn symbols(t: &Term) -> BTreeSet<Sym> {
    let mut out = BTreeSet::new();
    collect_syms(t, &mut out);
    out
}

fn collect_syms(t: &Term, out: &mut BTreeSet<Sym>) {
    match t {
        Term::Nil => {}
        Term::Var(x) => {
            out.insert(x.clone());
        }
        Term::Input(a, p, b) => {
            out.insert(a.sym().clone());
            out.insert(p.sym().clone());
            collect_syms(b, out);
        }
        Term::Output(a, p, c) => {
            out.insert(a.sym().clone());
            collect_syms(p, out);
            collect_syms(c, out);
        }
        Term::Par(l, r) => {
            collect_syms(l, out);
            collect_syms(r, out);
        }
        Term::Res(c, b) => {
            out.insert(c.clone());
            collect_syms(b, out);
        }
        Term::Abs(ps, b) => {
            out.extend(ps.iter().map(|p| p.sym().clone()));
            collect_syms(b, out);
        }
        Term::App(f, args) => {
            collect_syms(f, out);
            for a in args {
                match a {
                    Arg::Term(t) => collect_syms(t, out),
                    Arg::Name(n) => {
                        out.insert(n.sym().clone());
                    }
                }
            }
        }
    }
}

/// Smallest `#<prefix><k>` not in `avoid`.
pub fn fresh_with(prefix: &str, avoid: &BTreeSet<Sym>) -> Sym {
    (0..)
        .map(|k| Sym::new(&format!("{RESERVED_PREFIX}{prefix}{k}")))
        .find(|s| !avoid.contains(s))
        .expect("unbounded supply")
}

/// A fresh name constant.
pub fn fresh_name(avoid: &BTreeSet<Sym>) -> Sym {
    fresh_with("", avoid)
}

fn fresh_like(p: &Param, avoid: &BTreeSet<Sym>) -> Sym {
    match p {
        Param::Proc(_) => fresh_with("X", avoid),
        Param::Name(_) => fresh_with("x", avoid),
    }
}

// ---------------------------------------------------------------------------
// Substitution

/// A simultaneous substitution of names for names and terms for process
/// variables.
#[derive(Clone, Debug, Default)]
pub struct Subst {
    pub names: BTreeMap<Name, Name>,
    pub terms: BTreeMap<Sym, Term>,
}

impl Subst {
    pub fn is_empty(&self) -> bool {
        self.names.is_empty() && self.terms.is_empty()
    }

    pub fn name(from: Name, to: Name) -> Subst {
        let mut s = Subst::default();
        s.names.insert(from, to);
        s
    }

    pub fn term(x: Sym, t: Term) -> Subst {
        let mut s = Subst::default();
        s.terms.insert(x, t);
        s
    }

    /// Binds parameters to arguments; `None` on an arity or kind mismatch.
    pub fn bind(params: &[Param], args: &[Arg]) -> Option<Subst> {
        if params.len() != args.len() {
            return None;
        }
        let mut s = Subst::default();
        for (p, a) in params.iter().zip(args) {
            match (p, a) {
                (Param::Proc(x), Arg::Term(t)) => {
                    s.terms.insert(x.clone(), t.clone());
                }
                (Param::Name(x), Arg::Name(n)) => {
                    s.names.insert(Name::Var(x.clone()), n.clone());
                }
                _ => return None,
            }
        }
        Some(s)
    }
}

/// Identifiers that occur free in the images of a substitution; binders
/// with these names must be renamed when the substitution passes under them.
struct Range {
    consts: BTreeSet<Sym>,
    name_vars: BTreeSet<Sym>,
    proc_vars: BTreeSet<Sym>,
    all: BTreeSet<Sym>,
}

impl Range {
    fn of(s: &Subst) -> Range {
        let mut r = Range {
            consts: BTreeSet::new(),
            name_vars: BTreeSet::new(),
            proc_vars: BTreeSet::new(),
            all: BTreeSet::new(),
        };
        for (k, n) in &s.names {
            r.all.insert(k.sym().clone());
            match n {
                Name::Const(c) => r.consts.insert(c.clone()),
                Name::Var(x) => r.name_vars.insert(x.clone()),
            };
        }
        for (x, t) in &s.terms {
            r.all.insert(x.clone());
            r.consts.extend(free_names(t));
            for v in free_vars(t) {
                match v {
                    VarRef::Proc(y) => r.proc_vars.insert(y),
                    VarRef::Name(y) => r.name_vars.insert(y),
                };
            }
        }
        r.all.extend(r.consts.iter().cloned());
        r.all.extend(r.name_vars.iter().cloned());
        r.all.extend(r.proc_vars.iter().cloned());
        r
    }
}

/// Capture-avoiding simultaneous substitution.
pub fn subst(t: &Term, s: &Subst) -> Term {
    if s.is_empty() {
        return t.clone();
    }
    let range = Range::of(s);
    subst_rec(t, s, &range)
}

fn touches(t: &Term, s: &Subst) -> bool {
    if s.is_empty() {
        return false;
    }
    if !s.names.is_empty() {
        let fns = free_names(t);
        if s
            .names
            .keys()
            .any(|k| matches!(k, Name::Const(c) if fns.contains(c)))
        {
            return true;
        }
    }
    let fvs = free_vars(t);
    s.names
        .keys()
        .any(|k| matches!(k, Name::Var(x) if fvs.contains(&VarRef::Name(x.clone()))))
        || s.terms.keys().any(|x| fvs.contains(&VarRef::Proc(x.clone())))
}

fn subst_name(n: &Name, s: &Subst) -> Name {
    s.names.get(n).cloned().unwrap_or_else(|| n.clone())
}

fn remove_param(s: &Subst, p: &Param) -> Subst {
    let mut s = s.clone();
    match p {
        Param::Proc(x) => {
            s.terms.remove(x);
        }
        Param::Name(x) => {
            s.names.remove(&Name::Var(x.clone()));
        }
    }
    s
}

/// Passes a substitution under a list of binders, renaming those that would
/// capture a free identifier of the range.
fn enter_binders(params: &[Param], body: &Term, s: &Subst, range: &Range) -> (Vec<Param>, Subst) {
    let mut inner = s.clone();
    for p in params {
        inner = remove_param(&inner, p);
    }
    if !touches(body, &inner) {
        return (params.to_vec(), inner);
    }
    let mut avoid = range.all.clone();
    avoid.extend(symbols(body));
    avoid.extend(params.iter().map(|p| p.sym().clone()));
    let mut new_params = Vec::with_capacity(params.len());
    for p in params {
        let clash = match p {
            Param::Proc(x) => range.proc_vars.contains(x),
            Param::Name(x) => range.name_vars.contains(x),
        };
        if clash {
            let fresh = fresh_like(p, &avoid);
            avoid.insert(fresh.clone());
            match p {
                Param::Proc(x) => {
                    inner.terms.insert(x.clone(), Term::Var(fresh.clone()));
                }
                Param::Name(x) => {
                    inner
                        .names
                        .insert(Name::Var(x.clone()), Name::Var(fresh.clone()));
                }
            }
            new_params.push(p.with_sym(fresh));
        } else {
            new_params.push(p.clone());
        }
    }
    (new_params, inner)
}

fn subst_rec(t: &Term, s: &Subst, range: &Range) -> Term {
    match t {
        Term::Nil => Term::Nil,
        Term::Var(x) => s.terms.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Input(a, p, b) => {
            let a2 = subst_name(a, s);
            let (ps, inner) = enter_binders(std::slice::from_ref(p), b, s, range);
            let body = if inner.is_empty() || !touches(b, &inner) {
                b.clone()
            } else {
                Arc::new(subst_rec(b, &inner, &Range::of(&inner)))
            };
            Term::Input(a2, ps.into_iter().next().unwrap(), body)
        }
        Term::Output(a, p, c) => Term::Output(
            subst_name(a, s),
            Arc::new(subst_rec(p, s, range)),
            Arc::new(subst_rec(c, s, range)),
        ),
        Term::Par(l, r) => Term::Par(
            Arc::new(subst_rec(l, s, range)),
            Arc::new(subst_rec(r, s, range)),
        ),
        Term::Res(c, b) => {
            let mut inner = s.clone();
            inner.names.remove(&Name::Const(c.clone()));
            if inner.is_empty() || !touches(b, &inner) {
                return t.clone();
            }
            if range.consts.contains(c) {
                let mut avoid = range.all.clone();
                avoid.extend(symbols(b));
                avoid.extend(inner.names.keys().map(|k| k.sym().clone()));
                let fresh = fresh_name(&avoid);
                inner
                    .names
                    .insert(Name::Const(c.clone()), Name::Const(fresh.clone()));
                let r2 = Range::of(&inner);
                Term::Res(fresh, Arc::new(subst_rec(b, &inner, &r2)))
            } else {
                Term::Res(c.clone(), Arc::new(subst_rec(b, &inner, range)))
            }
        }
        Term::Abs(ps, b) => {
            let (ps2, inner) = enter_binders(ps, b, s, range);
            if inner.is_empty() {
                return Term::Abs(ps2, b.clone());
            }
            let r2 = Range::of(&inner);
            Term::Abs(ps2, Arc::new(subst_rec(b, &inner, &r2)))
        }
        Term::App(f, args) => Term::App(
            Arc::new(subst_rec(f, s, range)),
            args.iter()
                .map(|a| match a {
                    Arg::Term(t) => Arg::Term(subst_rec(t, s, range)),
                    Arg::Name(n) => Arg::Name(subst_name(n, s)),
                })
                .collect(),
        ),
    }
}

/// `t{map}` for names.
pub fn subst_names(t: &Term, map: &BTreeMap<Name, Name>) -> Term {
    subst(
        t,
        &Subst {
            names: map.clone(),
            terms: BTreeMap::new(),
        },
    )
}

/// `t{map}` for process variables.
pub fn subst_terms(t: &Term, map: &BTreeMap<Sym, Term>) -> Term {
    subst(
        t,
        &Subst {
            names: BTreeMap::new(),
            terms: map.clone(),
        },
    )
}

/// Renames name constants (free occurrences only).
pub fn rename_consts(t: &Term, map: &BTreeMap<Sym, Sym>) -> Term {
    let names = map
        .iter()
        .map(|(k, v)| (Name::Const(k.clone()), Name::Const(v.clone())))
        .collect();
    subst_names(t, &names)
}

// ---------------------------------------------------------------------------
// Alpha-canonical form

/// Deterministic representative of the alpha-class of `t`.
///
/// A binder at nesting level `l` (counting enclosing binders of the same
/// kind) is renamed to the `l`-th reserved identifier of its kind that is not
/// free in `t`. Two terms get the same output iff they are alpha-equivalent.
pub fn alpha_canonical(t: &Term) -> Term {
    let fns = free_names(t);
    let mut fvs_proc = BTreeSet::new();
    let mut fvs_name = BTreeSet::new();
    for v in free_vars(t) {
        match v {
            VarRef::Proc(x) => fvs_proc.insert(x),
            VarRef::Name(x) => fvs_name.insert(x),
        };
    }
    let mut cx = Canon {
        consts: Supply::new("", fns),
        proc_vars: Supply::new("X", fvs_proc),
        name_vars: Supply::new("x", fvs_name),
        env_consts: Vec::new(),
        env_vars: Vec::new(),
    };
    cx.go(t)
}

struct Supply {
    prefix: &'static str,
    avoid: BTreeSet<Sym>,
    names: Vec<Sym>,
    next: usize,
}

impl Supply {
    fn new(prefix: &'static str, avoid: BTreeSet<Sym>) -> Supply {
        Supply {
            prefix,
            avoid,
            names: Vec::new(),
            next: 0,
        }
    }

    fn level(&mut self, l: usize) -> Sym {
        while self.names.len() <= l {
            let s = loop {
                let s = Sym::new(&format!("{RESERVED_PREFIX}{}{}", self.prefix, self.next));
                self.next += 1;
                if !self.avoid.contains(&s) {
                    break s;
                }
            };
            self.names.push(s);
        }
        self.names[l].clone()
    }
}

struct Canon {
    consts: Supply,
    proc_vars: Supply,
    name_vars: Supply,
    env_consts: Vec<(Sym, Sym)>,
    env_vars: Vec<(Param, Sym)>,
}

impl Canon {
    fn name(&self, n: &Name) -> Name {
        match n {
            Name::Const(c) => Name::Const(
                self.env_consts
                    .iter()
                    .rev()
                    .find(|(k, _)| k == c)
                    .map(|(_, v)| v.clone())
                    .unwrap_or_else(|| c.clone()),
            ),
            Name::Var(x) => Name::Var(self.lookup_var(&Param::Name(x.clone()))),
        }
    }

    fn lookup_var(&self, p: &Param) -> Sym {
        self.env_vars
            .iter()
            .rev()
            .find(|(k, _)| k == p)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| p.sym().clone())
    }

    fn bind_param(&mut self, p: &Param) -> Param {
        let level = self
            .env_vars
            .iter()
            .filter(|(k, _)| std::mem::discriminant(k) == std::mem::discriminant(p))
            .count();
        let s = match p {
            Param::Proc(_) => self.proc_vars.level(level),
            Param::Name(_) => self.name_vars.level(level),
        };
        self.env_vars.push((p.clone(), s.clone()));
        p.with_sym(s)
    }

    fn go(&mut self, t: &Term) -> Term {
        match t {
            Term::Nil => Term::Nil,
            Term::Var(x) => Term::Var(self.lookup_var(&Param::Proc(x.clone()))),
            Term::Input(a, p, b) => {
                let a2 = self.name(a);
                let p2 = self.bind_param(p);
                let b2 = self.go(b);
                self.env_vars.pop();
                Term::Input(a2, p2, Arc::new(b2))
            }
            Term::Output(a, p, c) => Term::Output(
                self.name(a),
                Arc::new(self.go(p)),
                Arc::new(self.go(c)),
            ),
            Term::Par(l, r) => Term::Par(Arc::new(self.go(l)), Arc::new(self.go(r))),
            Term::Res(c, b) => {
                let level = self.env_consts.len();
                let s = self.consts.level(level);
                self.env_consts.push((c.clone(), s.clone()));
                let b2 = self.go(b);
                self.env_consts.pop();
                Term::Res(s, Arc::new(b2))
            }
            Term::Abs(ps, b) => {
                let ps2: Vec<Param> = ps.iter().map(|p| self.bind_param(p)).collect();
                let b2 = self.go(b);
                for _ in ps {
                    self.env_vars.pop();
                }
                Term::Abs(ps2, Arc::new(b2))
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

pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    a == b || alpha_canonical(a) == alpha_canonical(b)
}
