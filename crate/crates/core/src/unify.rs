//! Merges the component transition systems into the unified one.
//!
//! The construction is a breadth-first product from
//! `(Start, Start, Start)` with the all-`dc` valuation, the sequence diagram
//! conducting the merge:
//!
//! * The SD advances whenever it has a transition whose updates are
//!   consistent with the current valuation; each such transition is one
//!   alternative. With no consistent transition the SD holds.
//! * A follower (SMD or AD slot) advances through every transition that is
//!   consistent with the valuation after the SD's step **and** sanctioned:
//!   updates that change no value are always allowed, and updates that fix a
//!   guard are allowed when the SD's own step was guard-free (the followers
//!   then split freely, one successor per assignment) or touched the same
//!   guards. A follower with consistent moves that are all unsanctioned
//!   holds and repeats its label, the two systems have different lengths.
//! * A follower whose outgoing transitions are all inconsistent with the
//!   sanctioned valuation actively disagrees: its slot shows `-` for the
//!   emitted state, and it resumes from its held position if consistency
//!   returns.
//! * A step is emitted only when at least one component advances; a state
//!   where nothing can move is terminal.
//!
//! Absent diagrams contribute the constant placeholder `-`. States are
//! memoized on `(rendered name, valuation)`, which bounds the construction;
//! successors are explored in lexicographic label order so two runs on the
//! same bundle produce byte-equal dumps.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use crate::ts::{
    ComponentTs, CtsTransition, GuardDomain, Label, UnifiedState, UnifiedTs, Updates, Valuation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SlotPos {
    pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Tracker {
    sd: usize,
    smd: Option<SlotPos>,
    ad: Option<SlotPos>,
}

#[derive(Debug, Clone)]
enum Choice {
    Advance { target: usize, updates: Updates },
    Hold,
    Dash,
}

impl Choice {
    fn advances(&self) -> bool {
        matches!(self, Choice::Advance { .. })
    }
}

#[derive(Debug, Clone)]
enum Sanction {
    /// SD stepped without guard updates: followers split freely.
    All,
    /// SD stepped fixing these guards: follower changes must stay within.
    Guards(Vec<usize>),
    /// SD held: followers may only take steps that change no value.
    NeutralOnly,
}

impl Sanction {
    fn permits(&self, changed: &[usize]) -> bool {
        match self {
            Sanction::All => true,
            Sanction::Guards(set) => changed.iter().all(|g| set.contains(g)),
            Sanction::NeutralOnly => changed.is_empty(),
        }
    }
}

/// Builds the unified system from the SD component plus at least one of the
/// SMD/AD components. All components must share `domain`.
pub fn unify(
    sd: &ComponentTs,
    smd: Option<&ComponentTs>,
    ad: Option<&ComponentTs>,
    domain: Arc<GuardDomain>,
) -> UnifiedTs {
    assert!(
        smd.is_some() || ad.is_some(),
        "a bundle merges the SD with at least one other diagram"
    );

    let initial_tracker = Tracker {
        sd: sd.initial(),
        smd: smd.map(|c| SlotPos { pos: c.initial() }),
        ad: ad.map(|c| SlotPos { pos: c.initial() }),
    };
    let slot_label = |component: Option<&ComponentTs>, slot: &Option<SlotPos>| match (component, slot)
    {
        (Some(c), Some(s)) => c.state(s.pos).label.clone(),
        _ => Label::placeholder(),
    };
    let initial_state = UnifiedState {
        msg: sd.state(sd.initial()).label.clone(),
        st: slot_label(smd, &initial_tracker.smd),
        act: slot_label(ad, &initial_tracker.ad),
        gvs: Valuation::all_dc(&domain),
    };

    let mut states: Vec<UnifiedState> = vec![initial_state.clone()];
    let mut memo: HashMap<(String, Valuation), usize> = HashMap::new();
    memo.insert((initial_state.render(), initial_state.gvs.clone()), 0);
    let mut transitions: Vec<(usize, usize)> = Vec::new();
    let mut queue: VecDeque<(usize, Tracker)> = VecDeque::from([(0, initial_tracker)]);

    while let Some((uid, tracker)) = queue.pop_front() {
        let gvs = states[uid].gvs.clone();
        let mut candidates: Vec<(UnifiedState, Tracker)> = Vec::new();

        for sd_choice in sd_choices(sd, tracker.sd, &gvs) {
            let (sd_advanced, sd_updates) = match &sd_choice {
                Choice::Advance { updates, .. } => (true, updates.clone()),
                _ => (false, Updates::empty()),
            };
            let after_sd = gvs.apply(&sd_updates);
            let sanction = if !sd_advanced {
                Sanction::NeutralOnly
            } else if sd_updates.is_empty() {
                Sanction::All
            } else {
                Sanction::Guards(sd_updates.guard_indices().collect())
            };

            for smd_choice in follower_choices(smd, &tracker.smd, &after_sd, &sanction) {
                let after_smd = match &smd_choice {
                    Choice::Advance { updates, .. } => after_sd.apply(updates),
                    _ => after_sd.clone(),
                };
                for ad_choice in follower_choices(ad, &tracker.ad, &after_smd, &sanction) {
                    if !sd_choice.advances() && !smd_choice.advances() && !ad_choice.advances() {
                        continue;
                    }
                    let final_gvs = match &ad_choice {
                        Choice::Advance { updates, .. } => after_smd.apply(updates),
                        _ => after_smd.clone(),
                    };
                    let msg = match &sd_choice {
                        Choice::Advance { target, .. } => sd.state(*target).label.clone(),
                        _ => sd.state(tracker.sd).label.clone(),
                    };
                    let (st, smd_slot) = step_slot(smd, &tracker.smd, &smd_choice);
                    let (act, ad_slot) = step_slot(ad, &tracker.ad, &ad_choice);
                    let next_tracker = Tracker {
                        sd: match &sd_choice {
                            Choice::Advance { target, .. } => *target,
                            _ => tracker.sd,
                        },
                        smd: smd_slot,
                        ad: ad_slot,
                    };
                    candidates.push((
                        UnifiedState {
                            msg,
                            st,
                            act,
                            gvs: final_gvs,
                        },
                        next_tracker,
                    ));
                }
            }
        }

        candidates.sort_by(|a, b| {
            (a.0.msg.render(), a.0.st.render(), a.0.act.render(), &a.0.gvs).cmp(&(
                b.0.msg.render(),
                b.0.st.render(),
                b.0.act.render(),
                &b.0.gvs,
            ))
        });

        for (state, next_tracker) in candidates {
            let key = (state.render(), state.gvs.clone());
            let target = match memo.get(&key) {
                Some(id) => *id,
                None => {
                    let id = states.len();
                    states.push(state);
                    memo.insert(key, id);
                    queue.push_back((id, next_tracker));
                    id
                }
            };
            transitions.push((uid, target));
        }
    }

    UnifiedTs::new(domain, states, transitions, 0)
}

fn sd_choices(sd: &ComponentTs, pos: usize, gvs: &Valuation) -> Vec<Choice> {
    let consistent: Vec<&CtsTransition> = sd
        .outgoing(pos)
        .filter(|t| gvs.is_consistent(&t.updates))
        .collect();
    if consistent.is_empty() {
        vec![Choice::Hold]
    } else {
        consistent
            .into_iter()
            .map(|t| Choice::Advance {
                target: t.target,
                updates: t.updates.clone(),
            })
            .collect()
    }
}

fn follower_choices(
    component: Option<&ComponentTs>,
    slot: &Option<SlotPos>,
    gvs: &Valuation,
    sanction: &Sanction,
) -> Vec<Choice> {
    let (Some(c), Some(s)) = (component, slot) else {
        return vec![Choice::Hold];
    };
    let outgoing: Vec<&CtsTransition> = c.outgoing(s.pos).collect();
    if outgoing.is_empty() {
        return vec![Choice::Hold];
    }
    let advancing: Vec<Choice> = outgoing
        .iter()
        .filter(|t| gvs.is_consistent(&t.updates) && sanction.permits(&gvs.changed_by(&t.updates)))
        .map(|t| Choice::Advance {
            target: t.target,
            updates: t.updates.clone(),
        })
        .collect();
    if !advancing.is_empty() {
        advancing
    } else if outgoing.iter().all(|t| !gvs.is_consistent(&t.updates)) {
        // Every exit actively disagrees with the sanctioned valuation: the
        // slot shows `-`; the held position stays so the component can
        // resume if consistency returns.
        vec![Choice::Dash]
    } else {
        vec![Choice::Hold]
    }
}

fn step_slot(
    component: Option<&ComponentTs>,
    slot: &Option<SlotPos>,
    choice: &Choice,
) -> (Label, Option<SlotPos>) {
    match (component, slot) {
        (Some(c), Some(s)) => match choice {
            Choice::Advance { target, .. } => (c.state(*target).label.clone(), Some(SlotPos { pos: *target })),
            Choice::Hold => (c.state(s.pos).label.clone(), Some(*s)),
            Choice::Dash => (Label::placeholder(), Some(*s)),
        },
        _ => (Label::placeholder(), None),
    }
}
