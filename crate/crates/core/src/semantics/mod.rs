//! Operational semantics: structural congruence, transitions, weak closure
//! and bounded state-space construction.

mod lts;
mod normalize;
mod step;

pub use lts::{build_lts, build_lts_sequential, Lts};
pub use normalize::normalize;
pub use step::{
    commitments, transitions, trigger, uniquify, weak_closure, Action, Commitment, ExploreBudget,
    WeakClosure,
};
pub(crate) use step::tau_closure;
