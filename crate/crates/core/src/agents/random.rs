use rand::seq::{index, IndexedRandom};
use rand::Rng;

use crate::action::{Action, ActionRequest, Constraint};
use crate::rng::Stream;

/// Uniform draw over the legal set described by `request`.
pub fn random_action(request: &ActionRequest, rng: &mut Stream) -> Action {
    match &request.constraint {
        Constraint::Range { min, max } => {
            let v = rng.random_range(*min..=*max);
            request.integer_action(v).expect("range requests are integer moves")
        }
        Constraint::OneOf { options } => {
            let pick = options.choose(rng).expect("option list is non-empty");
            request.choice_action(pick).expect("options map to moves")
        }
        Constraint::Target { targets, allow_miss } => {
            let slots = targets.len() + usize::from(*allow_miss);
            let i = rng.random_range(0..slots.max(1));
            Action::Shot(targets.get(i).copied())
        }
        Constraint::Allocation { seats, total } => Action::PirateProposal(random_composition(*total, seats.len(), rng)),
    }
}

/// Uniform weak composition of `total` into `parts` non-negative integers
/// (stars and bars).
fn random_composition(total: u64, parts: usize, rng: &mut Stream) -> Vec<u64> {
    if parts == 0 {
        return Vec::new();
    }
    let slots = total as usize + parts - 1;
    let mut bars = index::sample(rng, slots, parts - 1).into_vec();
    bars.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0usize;
    for b in bars {
        out.push((b - prev) as u64);
        prev = b + 1;
    }
    out.push((slots - prev) as u64);
    out
}
