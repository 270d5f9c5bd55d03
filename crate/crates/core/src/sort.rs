//! Minimal sort checker: enough typing to tell the three calculi apart and to
//! enforce strict abstraction-passing.

use crate::error::SortError;
use crate::syntax::{Arg, CalcId, Name, Param, Sort, Sym, Term};

/// Sort of `t` in `calc`. Free process variables are assumed to carry the
/// calculus' payload sort, so open contexts `E[X]` can be checked too.
pub fn sort_check(t: &Term, calc: CalcId) -> Result<Sort, SortError> {
    let mut cx = Checker {
        calc,
        path: Vec::new(),
        procs: Vec::new(),
        names: Vec::new(),
    };
    cx.check(t)
}

/// Checks that `t` is a process (sort `Proc`) of `calc`.
pub fn check_process(t: &Term, calc: CalcId) -> Result<(), SortError> {
    match sort_check(t, calc)? {
        Sort::Proc => Ok(()),
        s => Err(SortError {
            path: "/".into(),
            reason: format!("expected a process, found sort {s}"),
        }),
    }
}

struct Checker {
    calc: CalcId,
    path: Vec<String>,
    procs: Vec<Sym>,
    names: Vec<Sym>,
}

impl Checker {
    fn err<T>(&self, reason: impl Into<String>) -> Result<T, SortError> {
        Err(SortError {
            path: if self.path.is_empty() {
                "/".into()
            } else {
                self.path.join("/")
            },
            reason: reason.into(),
        })
    }

    fn under<T>(&mut self, seg: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        self.path.push(seg.to_string());
        let r = f(self);
        self.path.pop();
        r
    }

    fn name(&mut self, n: &Name) -> Result<(), SortError> {
        match (n, self.calc) {
            (Name::Const(_), _) => Ok(()),
            (Name::Var(_), CalcId::Pid(_)) => Ok(()),
            (Name::Var(x), c) => self.err(format!("name variable `{x}` is not allowed in {c}")),
        }
    }

    fn process(&mut self, seg: &str, t: &Term) -> Result<(), SortError> {
        self.under(seg, |cx| match cx.check(t)? {
            Sort::Proc => Ok(()),
            s => cx.err(format!("expected a process, found sort {s}")),
        })
    }

    fn check(&mut self, t: &Term) -> Result<Sort, SortError> {
        let payload = self.calc.payload_sort();
        match t {
            Term::Nil => Ok(Sort::Proc),
            Term::Var(_) => Ok(payload),
            Term::Input(a, p, body) => {
                self.name(a)?;
                match p {
                    Param::Name(x) => self.err(format!(
                        "input binds name variable `{x}`: name-passing is not part of {}",
                        self.calc
                    )),
                    Param::Proc(x) => {
                        self.procs.push(x.clone());
                        let r = self.process("in", body);
                        self.procs.pop();
                        r.map(|_| Sort::Proc)
                    }
                }
            }
            Term::Output(a, obj, cont) => {
                self.name(a)?;
                let s = self.under("out.payload", |cx| cx.check(obj))?;
                if s != payload {
                    return self.under("out.payload", |cx| {
                        cx.err(format!("payload has sort {s}, expected {payload}"))
                    });
                }
                self.process("out.cont", cont)?;
                Ok(Sort::Proc)
            }
            Term::Par(l, r) => {
                self.process("par.l", l)?;
                self.process("par.r", r)?;
                Ok(Sort::Proc)
            }
            Term::Res(c, body) => {
                self.process(&format!("new {c}"), body)?;
                Ok(Sort::Proc)
            }
            Term::Abs(params, body) => self.abstraction(params, body),
            Term::App(op, args) => self.application(op, args),
        }
    }

    fn abstraction(&mut self, params: &[Param], body: &Term) -> Result<Sort, SortError> {
        let (arity, want_proc) = match self.calc {
            CalcId::Pi => return self.err("abstraction is not part of pi"),
            CalcId::PiD(n) => (n, true),
            CalcId::Pid(n) => (n, false),
        };
        if params.len() != arity {
            return self.err(format!(
                "abstraction has {} parameters, calculus {} requires {arity}",
                params.len(),
                self.calc
            ));
        }
        for (i, p) in params.iter().enumerate() {
            if matches!(p, Param::Proc(_)) != want_proc {
                return self.err(format!("parameter `{}` has the wrong kind", p.sym()));
            }
            if params[..i].iter().any(|q| q.sym() == p.sym()) {
                return self.err(format!("parameter `{}` is repeated", p.sym()));
            }
        }
        let np = self.procs.len();
        let nn = self.names.len();
        for p in params {
            match p {
                Param::Proc(x) => self.procs.push(x.clone()),
                Param::Name(x) => self.names.push(x.clone()),
            }
        }
        let r = self.process("abs", body);
        self.procs.truncate(np);
        self.names.truncate(nn);
        r?;
        Ok(self.calc.payload_sort())
    }

    fn application(&mut self, op: &Term, args: &[Arg]) -> Result<Sort, SortError> {
        let payload = self.calc.payload_sort();
        let arity = match self.calc {
            CalcId::Pi => return self.err("application is not part of pi"),
            CalcId::PiD(n) | CalcId::Pid(n) => n,
        };
        let s = self.under("app.op", |cx| cx.check(op))?;
        if s != payload {
            return self.err(format!("applied term has sort {s}, expected {payload}"));
        }
        if args.len() != arity {
            return self.err(format!(
                "application has {} arguments, expected {arity}",
                args.len()
            ));
        }
        for (i, a) in args.iter().enumerate() {
            let seg = format!("app.arg{i}");
            match (a, self.calc) {
                (Arg::Term(t), CalcId::PiD(_)) => {
                    let s = self.under(&seg, |cx| cx.check(t))?;
                    if s != payload {
                        return self.under(&seg, |cx| {
                            cx.err(format!("argument has sort {s}, expected {payload}"))
                        });
                    }
                }
                (Arg::Name(n), CalcId::Pid(_)) => self.under(&seg, |cx| cx.name(n))?,
                (Arg::Term(_), c) => {
                    return self.under(&seg, |cx| cx.err(format!("{c} expects a name argument")))
                }
                (Arg::Name(_), c) => {
                    return self.under(&seg, |cx| cx.err(format!("{c} expects a term argument")))
                }
            }
        }
        Ok(Sort::Proc)
    }
}
