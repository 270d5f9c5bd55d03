//! Random closed, well-sorted terms of the single-parameter process-passing
//! calculus, for property tests and sampling.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{Arg, Name, Param, Sym, Term};

const FREE_NAMES: [&str; 3] = ["a", "b", "d"];
const RESTRICTED: [&str; 2] = ["c", "e"];

/// Generator state: the variables and restricted names in scope.
pub struct TermGen {
    rng: ChaCha8Rng,
    vars: Vec<Sym>,
    names: Vec<Sym>,
    next_var: usize,
}

impl TermGen {
    pub fn new(seed: u64) -> TermGen {
        TermGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            vars: Vec::new(),
            names: Vec::new(),
            next_var: 0,
        }
    }

    /// A closed process with at most `max_size` nodes.
    pub fn process(&mut self, max_size: usize) -> Term {
        self.vars.clear();
        self.names.clear();
        self.next_var = 0;
        let target = self.rng.gen_range(1..=max_size.max(1));
        self.proc(target)
    }

    fn name(&mut self) -> Name {
        let mut pool: Vec<Sym> = FREE_NAMES.iter().map(|s| Sym::new(s)).collect();
        pool.extend(self.names.iter().cloned());
        Name::Const(pool.choose(&mut self.rng).expect("nonempty").clone())
    }

    fn fresh_var(&mut self) -> Sym {
        self.next_var += 1;
        Sym::new(&format!("X{}", self.next_var))
    }

    fn abstraction(&mut self, size: usize) -> Term {
        let y = self.fresh_var();
        self.vars.push(y.clone());
        let body = self.proc(size.saturating_sub(1).max(1));
        self.vars.pop();
        Term::Abs(vec![Param::Proc(y)], body.into())
    }

    fn proc(&mut self, size: usize) -> Term {
        let mut options: Vec<u8> = vec![0];
        if size >= 2 {
            options.extend([1, 4]);
        }
        if size >= 3 {
            options.push(3);
        }
        if size >= 4 {
            options.push(2);
            if !self.vars.is_empty() {
                options.push(5);
            }
        }
        if size >= 5 {
            options.push(6);
        }
        let choice = if size > 1 && options.len() > 1 {
            *options[1..].choose(&mut self.rng).expect("nonempty")
        } else {
            0
        };
        match choice {
            1 => {
                let a = self.name();
                let x = self.fresh_var();
                self.vars.push(x.clone());
                let body = self.proc(size - 1);
                self.vars.pop();
                Term::Input(a, Param::Proc(x), body.into())
            }
            2 => {
                let a = self.name();
                let k = self.rng.gen_range(2..=size - 2);
                let payload = self.abstraction(k);
                let cont = self.proc(size - 1 - k);
                Term::Output(a, payload.into(), cont.into())
            }
            3 => {
                let k = self.rng.gen_range(1..=size - 2);
                let l = self.proc(k);
                let r = self.proc(size - 1 - k);
                Term::Par(l.into(), r.into())
            }
            4 => {
                let c = Sym::new(RESTRICTED.choose(&mut self.rng).expect("nonempty"));
                self.names.push(c.clone());
                let body = self.proc(size - 1);
                self.names.pop();
                Term::Res(c, body.into())
            }
            5 => {
                let x = self.vars.choose(&mut self.rng).expect("nonempty").clone();
                let arg = self.abstraction(size - 2);
                Term::App(Term::Var(x).into(), vec![Arg::Term(arg)])
            }
            6 => {
                let k = self.rng.gen_range(2..=size - 3);
                let f = self.abstraction(k);
                let arg = self.abstraction(size - 1 - k);
                Term::App(f.into(), vec![Arg::Term(arg)])
            }
            _ => Term::Nil,
        }
    }
}

/// `count` processes of at most `max_size` nodes from a fixed seed.
pub fn sample(seed: u64, count: usize, max_size: usize) -> Vec<Term> {
    let mut g = TermGen::new(seed);
    (0..count).map(|_| g.process(max_size)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sort::sort_check;
    use crate::syntax::{is_closed, CalcId, Sort};

    #[test]
    fn samples_are_closed_well_sorted_and_small() {
        for t in sample(7, 300, 12) {
            assert!(t.size() <= 12, "{t:?}");
            assert!(is_closed(&t));
            assert_eq!(sort_check(&t, CalcId::PiD(1)).unwrap(), Sort::Proc);
        }
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        assert_eq!(sample(3, 20, 12), sample(3, 20, 12));
        assert_ne!(sample(3, 20, 12), sample(4, 20, 12));
    }

    #[test]
    fn sizes_vary() {
        let sizes: std::collections::BTreeSet<usize> =
            sample(11, 200, 12).iter().map(Term::size).collect();
        assert!(sizes.len() >= 8, "{sizes:?}");
    }
}
