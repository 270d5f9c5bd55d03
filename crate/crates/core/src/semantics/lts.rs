use std::collections::HashMap;

use serde::Serialize;

use crate::error::Error;
use crate::par;
use crate::syntax::Term;

use super::normalize::normalize;
use super::step::{transitions, Action, ExploreBudget};

/// Reachable fragment of a transition system, explored breadth-first.
#[derive(Clone, Debug)]
pub struct Lts {
    pub states: Vec<Term>,
    index: HashMap<Term, usize>,
    pub edges: Vec<(usize, Action, usize)>,
    pub root: usize,
    pub budget: ExploreBudget,
    /// Set when some reachable state was left unexplored.
    pub truncated: bool,
}

impl Lts {
    pub fn state_id(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn successors(&self, s: usize) -> impl Iterator<Item = (&Action, usize)> {
        self.edges
            .iter()
            .filter(move |(src, _, _)| *src == s)
            .map(|(_, a, t)| (a, *t))
    }
}

pub fn build_lts(t: &Term, budget: &ExploreBudget) -> Result<Lts, Error> {
    explore(t, budget, true)
}

/// Same as [`build_lts`] with the frontier expanded on one thread.
pub fn build_lts_sequential(t: &Term, budget: &ExploreBudget) -> Result<Lts, Error> {
    explore(t, budget, false)
}

fn explore(t: &Term, budget: &ExploreBudget, parallel: bool) -> Result<Lts, Error> {
    let root = normalize(t);
    if root.is_abs() {
        return Err(Error::NotAProcess);
    }
    let mut lts = Lts {
        states: vec![root.clone()],
        index: HashMap::from([(root, 0)]),
        edges: Vec::new(),
        root: 0,
        budget: budget.clone(),
        truncated: false,
    };
    let mut frontier = vec![0usize];
    let mut depth = 0;
    while !frontier.is_empty() {
        if depth >= budget.max_depth {
            for &src in &frontier {
                for (a, t) in transitions(&lts.states[src], budget).unwrap_or_default() {
                    match lts.index.get(&t) {
                        Some(&id) => lts.edges.push((src, a, id)),
                        None => lts.truncated = true,
                    }
                }
            }
            break;
        }
        let terms: Vec<Term> = frontier.iter().map(|&i| lts.states[i].clone()).collect();
        let step = |s: &Term| transitions(s, budget).unwrap_or_default();
        let succs = if parallel {
            par::map(&terms, step)
        } else {
            par::map_seq(&terms, step)
        };
        let mut next = Vec::new();
        'outer: for (&src, moves) in frontier.iter().zip(succs) {
            for (a, target) in moves {
                let id = match lts.index.get(&target) {
                    Some(&id) => id,
                    None => {
                        if lts.states.len() >= budget.max_states {
                            lts.truncated = true;
                            break 'outer;
                        }
                        let id = lts.states.len();
                        lts.states.push(target.clone());
                        lts.index.insert(target, id);
                        next.push(id);
                        id
                    }
                };
                lts.edges.push((src, a, id));
            }
        }
        if lts.truncated {
            break;
        }
        frontier = next;
        depth += 1;
    }
    Ok(lts)
}

#[derive(Serialize)]
struct JsonState {
    id: usize,
    term: String,
}

#[derive(Serialize)]
struct JsonEdge {
    source: usize,
    action: String,
    target: usize,
}

#[derive(Serialize)]
struct JsonLts {
    states: Vec<JsonState>,
    edges: Vec<JsonEdge>,
    root: usize,
    truncated: bool,
}

impl Lts {
    pub fn to_json(&self) -> serde_json::Value {
        let j = JsonLts {
            states: self
                .states
                .iter()
                .enumerate()
                .map(|(id, t)| JsonState {
                    id,
                    term: crate::print::print_term(t),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|(s, a, t)| JsonEdge {
                    source: *s,
                    action: a.to_string(),
                    target: *t,
                })
                .collect(),
            root: self.root,
            truncated: self.truncated,
        };
        serde_json::to_value(j).expect("serializable")
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph lts {\n  rankdir=LR;\n");
        for (id, t) in self.states.iter().enumerate() {
            let shape = if id == self.root { "doublecircle" } else { "circle" };
            out.push_str(&format!(
                "  s{id} [shape={shape}, label=\"{}\"];\n",
                dot_escape(&crate::print::print_term(t))
            ));
        }
        for (s, a, t) in &self.edges {
            out.push_str(&format!(
                "  s{s} -> s{t} [label=\"{}\"];\n",
                dot_escape(&a.to_string())
            ));
        }
        if self.truncated {
            out.push_str("  truncated [shape=plaintext, label=\"(truncated)\"];\n");
        }
        out.push_str("}\n");
        out
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
