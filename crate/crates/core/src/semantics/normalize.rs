//! Structural-congruence normal forms.
//!
//! A term is rewritten bottom-up: redexes are beta-reduced, parallel
//! compositions are flattened into a soup of atoms together with every
//! restriction lifted out of them, and the soup is rebuilt with minimal
//! scopes and a canonical component order. The result is finally put into
//! alpha-canonical form, so structurally congruent terms compare equal.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::syntax::{
    alpha_canonical, free_names, rename_consts, subst, Arg, Name, Subst, Sym, Term,
};

/// Upper bound on beta steps per call; a term like `D<D>` with
/// `D = \(Y).Y<Y>` never reaches a normal form.
const BETA_FUEL: usize = 4096;

/// Above this many names a restriction block keeps its given order instead of
/// trying every permutation.
const MAX_PERMUTED_BLOCK: usize = 5;

/// Cap on the orders tried for one block.
const MAX_ORDERS: usize = 120;

/// Rounds of rewriting after the first, until the result no longer changes.
/// Parallel components are ordered by keys that still mention the names of
/// enclosing binders, so a second round with canonical binder names can
/// settle a different order.
const SETTLE_ROUNDS: usize = 3;

pub fn normalize(t: &Term) -> Term {
    let mut cx = Ctx {
        fuel: BETA_FUEL,
        counter: 0,
    };
    let mut n = alpha_canonical(&cx.norm(&alpha_canonical(t)));
    for _ in 0..SETTLE_ROUNDS {
        let next = alpha_canonical(&cx.norm(&n));
        if next == n {
            break;
        }
        n = next;
    }
    n
}

struct Ctx {
    fuel: usize,
    counter: usize,
}

impl Ctx {
    fn temp_name(&mut self) -> Sym {
        self.counter += 1;
        Sym::new(&format!("%r{}", self.counter))
    }

    fn norm(&mut self, t: &Term) -> Term {
        match t {
            Term::Nil | Term::Var(_) => t.clone(),
            Term::Input(a, p, b) => Term::Input(a.clone(), p.clone(), Arc::new(self.norm(b))),
            Term::Output(a, p, c) => {
                Term::Output(a.clone(), Arc::new(self.norm(p)), Arc::new(self.norm(c)))
            }
            Term::Abs(ps, b) => Term::Abs(ps.clone(), Arc::new(self.norm(b))),
            Term::App(..) => {
                // head reductions are iterated here rather than recursed
                let mut cur = t.clone();
                loop {
                    let Term::App(f, args) = &cur else {
                        return self.norm(&cur);
                    };
                    let f2 = self.norm(f);
                    let args2: Vec<Arg> = args
                        .iter()
                        .map(|a| match a {
                            Arg::Term(t) => Arg::Term(self.norm(t)),
                            Arg::Name(n) => Arg::Name(n.clone()),
                        })
                        .collect();
                    if let Term::Abs(ps, body) = &f2 {
                        if self.fuel > 0 {
                            if let Some(s) = Subst::bind(ps, &args2) {
                                self.fuel -= 1;
                                cur = subst(body, &s);
                                continue;
                            }
                        }
                    }
                    return Term::App(Arc::new(f2), args2);
                }
            }
            Term::Par(..) | Term::Res(..) => {
                let mut names = Vec::new();
                let mut atoms = Vec::new();
                self.soup(t, &mut names, &mut atoms);
                rebuild(names, atoms)
            }
        }
    }

    /// Flattens `t` into restricted names and atoms, renaming every lifted
    /// binder to a name unique within this normalization.
    fn soup(&mut self, t: &Term, names: &mut Vec<Sym>, atoms: &mut Vec<Term>) {
        match t {
            Term::Par(l, r) => {
                self.soup(l, names, atoms);
                self.soup(r, names, atoms);
            }
            Term::Res(c, b) => {
                let fresh = self.temp_name();
                let body = rename_consts(b, &[(c.clone(), fresh.clone())].into_iter().collect());
                names.push(fresh);
                self.soup(&body, names, atoms);
            }
            Term::Nil => {}
            other => {
                let n = self.norm(other);
                match n {
                    Term::Par(..) | Term::Res(..) => self.soup_normal(&n, names, atoms),
                    Term::Nil => {}
                    a => atoms.push(a),
                }
            }
        }
    }

    /// Like `soup`, for terms that are already normal (no further rewriting
    /// of atoms needed).
    fn soup_normal(&mut self, t: &Term, names: &mut Vec<Sym>, atoms: &mut Vec<Term>) {
        match t {
            Term::Par(l, r) => {
                self.soup_normal(l, names, atoms);
                self.soup_normal(r, names, atoms);
            }
            Term::Res(c, b) => {
                let fresh = self.temp_name();
                let body = rename_consts(b, &[(c.clone(), fresh.clone())].into_iter().collect());
                names.push(fresh);
                self.soup_normal(&body, names, atoms);
            }
            Term::Nil => {}
            a => atoms.push(a.clone()),
        }
    }
}

fn prefix_subject(t: &Term) -> Option<&Sym> {
    match t {
        Term::Input(Name::Const(a), _, _) | Term::Output(Name::Const(a), _, _) => Some(a),
        _ => None,
    }
}

/// Rebuilds a soup with minimal restriction scopes.
///
/// Names used by no atom are dropped; names used by one atom are pushed onto
/// that atom; a prefix restricted on its own subject is dead. Atoms connected
/// through names they share form one restriction block.
fn rebuild(mut names: Vec<Sym>, mut atoms: Vec<Term>) -> Term {
    let mut fns: Vec<_> = atoms.iter().map(free_names).collect();
    loop {
        let users: Vec<Vec<usize>> = names
            .iter()
            .map(|c| (0..atoms.len()).filter(|&i| fns[i].contains(c)).collect())
            .collect();
        let dead: Vec<usize> = (0..atoms.len())
            .filter(|&i| {
                prefix_subject(&atoms[i]).is_some_and(|a| {
                    names
                        .iter()
                        .zip(&users)
                        .any(|(c, u)| c == a && u.len() == 1 && u[0] == i)
                })
            })
            .collect();
        if dead.is_empty() {
            names = names
                .into_iter()
                .zip(&users)
                .filter(|(_, u)| !u.is_empty())
                .map(|(c, _)| c)
                .collect();
            break;
        }
        for &i in dead.iter().rev() {
            atoms.remove(i);
            fns.remove(i);
        }
    }

    let users: Vec<Vec<usize>> = names
        .iter()
        .map(|c| (0..atoms.len()).filter(|&i| fns[i].contains(c)).collect())
        .collect();

    let mut private: Vec<Vec<Sym>> = vec![Vec::new(); atoms.len()];
    let mut parent: Vec<usize> = (0..atoms.len()).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    let mut shared: Vec<(Sym, usize)> = Vec::new();
    for (c, u) in names.iter().zip(&users) {
        if u.len() == 1 {
            private[u[0]].push(c.clone());
        } else {
            for w in u.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if a != b {
                    parent[a] = b;
                }
            }
            shared.push((c.clone(), u[0]));
        }
    }

    let wrapped: Vec<Term> = atoms
        .iter()
        .zip(&private)
        .map(|(a, ps)| {
            if ps.is_empty() {
                a.clone()
            } else {
                canonical_block(ps, std::slice::from_ref(a))
            }
        })
        .collect();

    let mut groups: BTreeMap<usize, (Vec<Sym>, Vec<Term>)> = BTreeMap::new();
    for (i, w) in wrapped.into_iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().1.push(w);
    }
    for (c, first) in shared {
        let root = find(&mut parent, first);
        groups.get_mut(&root).expect("group exists").0.push(c);
    }

    let mut parts: Vec<(Term, Term)> = groups
        .into_values()
        .map(|(ns, members)| {
            let t = if ns.is_empty() {
                debug_assert_eq!(members.len(), 1);
                members.into_iter().next().unwrap()
            } else {
                canonical_block(&ns, &members)
            };
            (alpha_canonical(&t), t)
        })
        .collect();
    parts.sort_by(|a, b| a.0.cmp(&b.0));
    Term::par_all(parts.into_iter().map(|(_, t)| t))
}

/// `(names)(members)` with the member order and the order of the restricted
/// names chosen to minimize the alpha-canonical key. Names are first sorted
/// by how they are used; only names with the same usage are permuted.
fn canonical_block(names: &[Sym], members: &[Term]) -> Term {
    let mut sigs: Vec<(Vec<Term>, usize)> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (usage_signature(n, names, members), i))
        .collect();
    sigs.sort();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, (sig, i)) in sigs.iter().enumerate() {
        if k > 0 && sigs[k - 1].0 == *sig {
            groups.last_mut().expect("nonempty").push(*i);
        } else {
            groups.push(vec![*i]);
        }
    }
    let mut orders: Vec<Vec<usize>> = vec![Vec::new()];
    for g in &groups {
        let perms = if g.len() <= MAX_PERMUTED_BLOCK {
            permutations(g.len())
        } else {
            vec![(0..g.len()).collect()]
        };
        if orders.len() * perms.len() > MAX_ORDERS {
            orders.iter_mut().for_each(|o| o.extend(g));
            continue;
        }
        orders = orders
            .iter()
            .flat_map(|o| {
                perms.iter().map(move |p| {
                    let mut o = o.clone();
                    o.extend(p.iter().map(|&j| g[j]));
                    o
                })
            })
            .collect();
    }
    let placeholders: Vec<Sym> = (0..names.len())
        .map(|i| Sym::new(&format!("@p{i}")))
        .collect();
    let mut best: Option<(Term, Term)> = None;
    for order in orders {
        let map: BTreeMap<Sym, Sym> = order
            .iter()
            .enumerate()
            .map(|(slot, &i)| (names[i].clone(), placeholders[slot].clone()))
            .collect();
        let mut keyed: Vec<(Term, Term)> = members
            .iter()
            .map(|m| {
                let r = rename_consts(m, &map);
                (alpha_canonical(&r), r)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let body = Term::par_all(keyed.into_iter().map(|(_, t)| t));
        let term = Term::res_all(&placeholders, body);
        let key = alpha_canonical(&term);
        if best.as_ref().map_or(true, |(k, _)| key < *k) {
            best = Some((key, term));
        }
    }
    best.expect("at least one order").1
}

/// The members mentioning `n`, with `n` marked and the other block names
/// blurred. Invariant under renaming of the block.
fn usage_signature(n: &Sym, names: &[Sym], members: &[Term]) -> Vec<Term> {
    let map: BTreeMap<Sym, Sym> = names
        .iter()
        .map(|m| {
            let to = if m == n { "@q" } else { "@o" };
            (m.clone(), Sym::new(to))
        })
        .collect();
    let mut sig: Vec<Term> = members
        .iter()
        .filter(|m| free_names(m).contains(n))
        .map(|m| alpha_canonical(&rename_consts(m, &map)))
        .collect();
    sig.sort();
    sig
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{dummy_abstraction, CalcId};

    fn d() -> Term {
        dummy_abstraction(CalcId::PiD(1))
    }
    fn out(a: &str, k: Term) -> Term {
        Term::output(Name::c(a), d(), k)
    }
    fn inp(a: &str, k: Term) -> Term {
        Term::input(Name::c(a), "X", k)
    }

    #[test]
    fn par_unit() {
        let t = out("a", Term::Nil);
        assert_eq!(normalize(&Term::par(t.clone(), Term::Nil)), normalize(&t));
    }

    #[test]
    fn beta_with_name_argument() {
        let abs = Term::abs1(
            "x",
            Term::output(Name::Var(Sym::new("x")), Term::abs1("y", Term::Nil), Term::Nil),
        );
        let w = Term::app(abs, vec![Arg::Name(Name::c("d"))]);
        let expected = Term::output(Name::c("d"), Term::abs1("y", Term::Nil), Term::Nil);
        assert_eq!(normalize(&w), normalize(&expected));
    }

    #[test]
    fn restricted_prefix_on_own_subject_is_dead() {
        assert_eq!(normalize(&Term::res("c", inp("c", Term::Nil))), Term::Nil);
        // (c)(d) c!<..>.d!<..>.0 is dead too
        let t = Term::res("c", Term::res("d", out("c", out("d", Term::Nil))));
        assert_eq!(normalize(&t), Term::Nil);
    }

    #[test]
    fn scope_extrusion_and_commutation() {
        let t1 = Term::res("c", Term::par(out("c", Term::Nil), inp("c", Term::Nil)));
        let t2 = Term::par(out("a", Term::Nil), t1.clone());
        let t3 = Term::res("c", Term::par(inp("c", Term::Nil), Term::par(out("c", Term::Nil), out("a", Term::Nil))));
        assert_eq!(normalize(&t2), normalize(&t3));
        // (c)(d)T == (d)(c)T
        let body = |c: &str, e: &str| Term::par(out(c, inp(e, Term::Nil)), inp(c, out(e, Term::Nil)));
        let a = Term::res("c", Term::res("e", body("c", "e")));
        let b = Term::res("e", Term::res("c", body("c", "e")));
        assert_eq!(normalize(&a), normalize(&b));
    }

    #[test]
    fn divergent_beta_terminates() {
        let dd = Term::abs1(
            "Y",
            Term::app(Term::var("Y"), vec![Arg::Term(Term::var("Y"))]),
        );
        let t = Term::app(dd.clone(), vec![Arg::Term(dd)]);
        let n = normalize(&t);
        assert!(matches!(n, Term::App(..)));
    }

    #[test]
    fn idempotent_on_samples() {
        let t = Term::res(
            "c",
            Term::par(
                Term::par(out("c", Term::Nil), Term::Nil),
                Term::par(inp("c", out("a", Term::Nil)), out("b", Term::Nil)),
            ),
        );
        let n = normalize(&t);
        assert_eq!(normalize(&n), n);
    }
}
