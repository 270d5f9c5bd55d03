use std::collections::BTreeSet;

use proptest::prelude::*;

use hopi::equiv::{
    check_context, check_normal, default_context_family, replay_witness, Mode, Verdict,
};
use hopi::gen::TermGen;
use hopi::parse::parse_term;
use hopi::print::print_term;
use hopi::semantics::{normalize, transitions, uniquify, Action, ExploreBudget};
use hopi::sort::sort_check;
use hopi::syntax::{
    alpha_canonical, alpha_eq, dummy_abstraction, free_names, subst, subst_names, Arg, CalcId,
    Name, Param, Sort, Subst, Sym, Term,
};
use hopi::transforms::{encode_replication, Prefix};

fn pid1() -> CalcId {
    CalcId::PiD(1)
}

fn process(max: usize) -> impl Strategy<Value = Term> {
    any::<u64>().prop_map(move |seed| TermGen::new(seed).process(max))
}

fn abstraction(max: usize) -> impl Strategy<Value = Term> {
    process(max).prop_map(|body| Term::Abs(vec![Param::Proc(Sym::new("Yq"))], body.into()))
}

fn small_budget() -> ExploreBudget {
    ExploreBudget {
        max_states: 2_000,
        ..ExploreBudget::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn alpha_canonical_is_idempotent_and_renaming_invariant(t in process(12)) {
        let c = alpha_canonical(&t);
        prop_assert_eq!(alpha_canonical(&c), c.clone());
        prop_assert_eq!(alpha_canonical(&uniquify(&t)), c.clone());
        let reread = parse_term(&print_term(&t), pid1()).unwrap();
        prop_assert_eq!(alpha_canonical(&reread), c);
    }

    #[test]
    fn name_substitution_composes(t in process(12), target in prop::sample::select(vec!["b", "c", "d"])) {
        let (a, b, c) = (Name::c("a"), Name::c("fresh_b"), Name::c(target));
        let step = |t: &Term, from: &Name, to: &Name| {
            subst_names(t, &[(from.clone(), to.clone())].into_iter().collect())
        };
        let two = step(&step(&t, &a, &b), &b, &c);
        let one = step(&t, &a, &c);
        prop_assert!(alpha_eq(&two, &one), "{} vs {}", print_term(&two), print_term(&one));
    }

    #[test]
    fn process_substitution_preserves_sort_and_names(t in process(10), a in abstraction(6), b in abstraction(6)) {
        let x = Sym::new("Xh");
        let open = Term::par(
            Term::app(Term::var("Xh"), vec![Arg::Term(a.clone())]),
            Term::Input(Name::c("a"), Param::Proc(Sym::new("W9")), t.into()),
        );
        let filled = subst(&open, &Subst::term(x, b.clone()));
        prop_assert_eq!(sort_check(&filled, pid1()).unwrap(), Sort::Proc);
        let allowed: BTreeSet<Sym> = free_names(&open).union(&free_names(&b)).cloned().collect();
        prop_assert!(free_names(&filled).is_subset(&allowed));
    }

    #[test]
    fn print_parse_round_trip(t in process(12)) {
        let s = print_term(&t);
        let back = parse_term(&s, pid1()).unwrap();
        prop_assert!(alpha_eq(&back, &t), "{s}");
        prop_assert_eq!(print_term(&back), s);
        let canon = print_term(&normalize(&t));
        prop_assert!(!canon.contains('#'), "{canon}");
        let reread = normalize(&parse_term(&canon, pid1()).unwrap());
        prop_assert_eq!(print_term(&reread), canon);
    }

    #[test]
    fn term_json_round_trip(t in process(12)) {
        let j = serde_json::to_string(&t).unwrap();
        let back: Term = serde_json::from_str(&j).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn normalize_is_idempotent_and_alpha_invariant(t in process(12)) {
        let n = normalize(&t);
        prop_assert_eq!(normalize(&n), n.clone());
        prop_assert_eq!(normalize(&uniquify(&t)), n.clone());
        prop_assert_eq!(normalize(&alpha_canonical(&t)), n);
    }

    #[test]
    fn transitions_commute_with_alpha(t in process(12)) {
        let b = ExploreBudget::default();
        prop_assert_eq!(transitions(&alpha_canonical(&t), &b).unwrap(), transitions(&t, &b).unwrap());
        prop_assert_eq!(transitions(&uniquify(&t), &b).unwrap(), transitions(&t, &b).unwrap());
    }

    #[test]
    fn residuals_are_closed_processes(t in process(12)) {
        for (_, r) in transitions(&t, &ExploreBudget::default()).unwrap() {
            prop_assert_eq!(sort_check(&r, pid1()).unwrap(), Sort::Proc);
            prop_assert!(hopi::syntax::is_closed(&r));
        }
    }

    #[test]
    fn extruded_names_occur_in_the_payload(t in process(12)) {
        for (a, _) in transitions(&t, &ExploreBudget::default()).unwrap() {
            if let Action::Out { extruded, subject, payload } = a {
                for c in &extruded {
                    prop_assert!(free_names(&payload).contains(c));
                    prop_assert_ne!(c, &subject);
                }
            }
        }
    }

    #[test]
    fn communication_closes_scopes(t1 in process(8), t2 in process(8)) {
        let whole = transitions(&Term::par(t1.clone(), t2.clone()), &ExploreBudget::default()).unwrap();
        let taus: BTreeSet<Term> = whole.into_iter().filter(|(a, _)| a.is_tau()).map(|(_, r)| r).collect();
        for (a, r2) in transitions(&t2, &ExploreBudget::default()).unwrap() {
            let Action::Out { extruded, subject, payload } = a else { continue };
            let b = ExploreBudget {
                input_instantiations: vec![payload.clone()],
                fresh_trigger: false,
                ..ExploreBudget::default()
            };
            for (a1, r1) in transitions(&t1, &b).unwrap() {
                if matches!(&a1, Action::In { subject: s, .. } if *s == subject) {
                    let want = normalize(&Term::res_all(&extruded, Term::par(r1, r2.clone())));
                    prop_assert!(taus.contains(&want), "missing {}", print_term(&want));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn derived_replication_unfolds(p in process(3), input in any::<bool>()) {
        let prefix = if input {
            Prefix::Input { subject: Name::c("b"), binder: Param::Proc(Sym::new("Xr")) }
        } else {
            Prefix::Output { subject: Name::c("b"), payload: dummy_abstraction(pid1()) }
        };
        let bang = encode_replication(&prefix, &p, pid1());
        let body = Term::par(p.clone(), bang.clone());
        let unfolded = match &prefix {
            Prefix::Input { subject, binder } => Term::Input(subject.clone(), binder.clone(), body.into()),
            Prefix::Output { subject, payload } => Term::output(subject.clone(), payload.clone(), body),
        };
        let v = check_normal(&bang, &unfolded, Mode::Weak, &ExploreBudget::default()).unwrap();
        prop_assert!(!v.is_distinguished(), "{}: {}", print_term(&bang), v);
    }

    #[test]
    fn distinguished_verdicts_replay_and_coincide(p in process(7), q in process(7)) {
        let budget = small_budget();
        let family = default_context_family(pid1(), Sort::AbsD(1)).unwrap();
        let n = check_normal(&p, &q, Mode::Weak, &budget).unwrap();
        let k = check_context(&p, &q, Mode::Weak, &family, &budget).unwrap();
        for v in [&n, &k] {
            if let Verdict::Distinguished(w) = v {
                prop_assert!(replay_witness(&p, &q, w, &budget).is_ok());
            }
        }
        if k.is_distinguished() {
            prop_assert!(!n.is_bisimilar(), "context separates {} and {} but normal does not", print_term(&p), print_term(&q));
        }
    }

    #[test]
    fn verdicts_are_symmetric(p in process(7), q in process(7)) {
        let budget = small_budget();
        let f = check_normal(&p, &q, Mode::Weak, &budget).unwrap();
        let b = check_normal(&q, &p, Mode::Weak, &budget).unwrap();
        prop_assert_eq!(f.label(), b.label());
    }
}

#[test]
fn parser_rejects_reserved_identifiers() {
    for src in ["#a!", "new #c. 0", "a(#X). 0"] {
        assert!(parse_term(src, pid1()).is_err(), "{src}");
    }
}
