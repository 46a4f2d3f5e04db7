//! State machine → component transition system.
//!
//! A configuration is either one flat state or a tuple of region states.
//! Entering any region-owned state enters every region (the others at their
//! own initials); the tuple renders as the `and`-join of the region states
//! in declaration order. Inside the tuple, one step advances every region
//! that has a gvs-consistent transition and holds the rest; a transition
//! from a region state to a flat state abandons the tuple. There is no
//! synthetic `End`: a machine may legitimately rest in any state.

use std::collections::VecDeque;

use super::{literal_updates, TsBuilder};
use crate::diagram::{GuardName, SmTransition, StateMachineDiagram};
use crate::ts::{ComponentTs, DiagramKind, Label, Updates};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Config {
    Flat(String),
    Regions(Vec<String>),
}

pub fn smd_to_ts(smd: &StateMachineDiagram, guards: &[GuardName]) -> ComponentTs {
    let domain = super::guard_domain(guards);
    let mut b = TsBuilder::new(DiagramKind::Smd, domain);

    let initial = enter(smd, &smd.initial);
    let (initial_id, _) = b.edge(0, label_of(&initial), &Updates::empty());

    let mut queue: VecDeque<(Config, usize)> = VecDeque::from([(initial, initial_id)]);
    while let Some((config, id)) = queue.pop_front() {
        for (target_config, updates) in successors(smd, &b, id, &config) {
            let (target_id, fresh) = b.edge(id, label_of(&target_config), &updates);
            if fresh {
                queue.push_back((target_config, target_id));
            }
        }
    }
    b.finish()
}

/// Configuration reached by targeting `state`: flat states stand alone,
/// region states pull every region in (the others at their initials).
fn enter(smd: &StateMachineDiagram, state: &str) -> Config {
    match smd.region_of(state) {
        None => Config::Flat(state.to_string()),
        Some(owner) => Config::Regions(
            smd.regions
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    if i == owner {
                        state.to_string()
                    } else {
                        r.initial.clone()
                    }
                })
                .collect(),
        ),
    }
}

fn label_of(config: &Config) -> Label {
    match config {
        Config::Flat(s) => Label::single(s.clone()),
        Config::Regions(rs) => Label::and_join(rs.clone()),
    }
}

fn successors(
    smd: &StateMachineDiagram,
    b: &TsBuilder,
    id: usize,
    config: &Config,
) -> Vec<(Config, Updates)> {
    let mut out = Vec::new();
    match config {
        Config::Flat(s) => {
            for t in smd.transitions.iter().filter(|t| &t.source == s) {
                let updates = literal_updates(b.domain(), &t.guards);
                out.push((enter(smd, &t.target), updates));
            }
        }
        Config::Regions(rs) => {
            // Exits from any region state to a flat state abandon the tuple.
            for current in rs {
                for t in smd
                    .transitions
                    .iter()
                    .filter(|t| &t.source == current && smd.is_flat(&t.target))
                {
                    let updates = literal_updates(b.domain(), &t.guards);
                    out.push((Config::Flat(t.target.clone()), updates));
                }
            }
            // Synchronous step over the regions that can move.
            let gvs = b.gvs(id);
            let choices: Vec<Vec<&SmTransition>> = rs
                .iter()
                .enumerate()
                .map(|(i, current)| {
                    smd.transitions
                        .iter()
                        .filter(|t| {
                            &t.source == current
                                && smd.region_of(&t.target) == Some(i)
                                && gvs.is_consistent(&literal_updates(b.domain(), &t.guards))
                        })
                        .collect()
                })
                .collect();
            if choices.iter().any(|c| !c.is_empty()) {
                let mut combos: Vec<(Vec<String>, Updates)> = vec![(Vec::new(), Updates::empty())];
                for (i, region_choices) in choices.iter().enumerate() {
                    let mut next = Vec::new();
                    for (tuple, updates) in &combos {
                        if region_choices.is_empty() {
                            let mut tuple = tuple.clone();
                            tuple.push(rs[i].clone());
                            next.push((tuple, updates.clone()));
                        } else {
                            for t in region_choices {
                                let t_updates = literal_updates(b.domain(), &t.guards);
                                if let Some(joined) = updates.try_join(&t_updates) {
                                    let mut tuple = tuple.clone();
                                    tuple.push(t.target.clone());
                                    next.push((tuple, joined));
                                }
                            }
                        }
                    }
                    combos = next;
                }
                for (tuple, updates) in combos {
                    out.push((Config::Regions(tuple), updates));
                }
            }
        }
    }
    out
}
