//! Sequence diagram → component transition system.
//!
//! The body is walked with a frontier of `(state, pending updates)` pairs.
//! Pending updates are the literals of a branch that has been entered but
//! whose first transition has not been emitted yet; they attach to the next
//! transition out of each frontier state. A message advances the whole
//! frontier; `alt`/`opt`/`loop` split it; `par` advances its operands in
//! lockstep producing `and`-joined labels. A synthetic `End` state closes
//! every remaining frontier entry.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::{literal_updates, TsBuilder};
use crate::diagram::{GuardName, SdElement, SequenceDiagram};
use crate::ts::{ComponentTs, DiagramKind, GuardDomain, Label, Updates};

type Frontier = Vec<(usize, Updates)>;

pub fn sd_to_ts(sd: &SequenceDiagram, guards: &[GuardName]) -> ComponentTs {
    let domain = super::guard_domain(guards);
    let mut b = TsBuilder::new(DiagramKind::Sd, domain);
    let entry: Frontier = vec![(0, Updates::empty())];
    let exits = emit_body(&mut b, &sd.body, entry);
    for (state, pending) in exits {
        b.edge(state, Label::end(), &pending);
    }
    b.finish()
}

fn dedup(frontier: Frontier) -> Frontier {
    let set: BTreeSet<(usize, Updates)> = frontier.into_iter().collect();
    set.into_iter().collect()
}

fn emit_body(b: &mut TsBuilder, body: &[SdElement], mut frontier: Frontier) -> Frontier {
    for el in body {
        frontier = emit_element(b, el, frontier);
    }
    frontier
}

fn emit_element(b: &mut TsBuilder, el: &SdElement, frontier: Frontier) -> Frontier {
    match el {
        SdElement::Message(m) => {
            let label = Label::single(m.name.clone());
            let mut out = Vec::new();
            for (state, pending) in frontier {
                let (target, _) = b.edge(state, label.clone(), &pending);
                out.push((target, Updates::empty()));
            }
            dedup(out)
        }
        SdElement::Alt(branches) => {
            let mut out = Vec::new();
            for (literals, inner) in branches {
                let updates = literal_updates(b.domain(), literals);
                let entry: Frontier = frontier
                    .iter()
                    .map(|(s, p)| (*s, p.overlay(&updates)))
                    .collect();
                out.extend(emit_body(b, inner, entry));
            }
            dedup(out)
        }
        SdElement::Opt(literals, inner) => {
            let updates = literal_updates(b.domain(), literals);
            let entry: Frontier = frontier
                .iter()
                .map(|(s, p)| (*s, p.overlay(&updates)))
                .collect();
            let mut out = emit_body(b, inner, entry);
            // Bypass: one alternative per negated literal (the negation of a
            // conjunction is a disjunction, and disjunction is modeled by
            // multiple transitions).
            out.extend(bypass_entries(b.domain(), &frontier, literals));
            dedup(out)
        }
        SdElement::Loop(literals, inner) => {
            let updates = literal_updates(b.domain(), literals);
            let mut exits: Frontier = bypass_entries(b.domain(), &frontier, literals);
            let mut seen: BTreeSet<(usize, Updates)> = BTreeSet::new();
            let mut entries: Frontier = frontier
                .iter()
                .map(|(s, p)| (*s, p.overlay(&updates)))
                .collect();
            // Re-entering the body converges because states are interned on
            // (label, gvs); iterate until no fresh entry appears.
            while !entries.is_empty() {
                entries.retain(|e| seen.insert(e.clone()));
                if entries.is_empty() {
                    break;
                }
                let body_exits = emit_body(b, inner, entries);
                exits.extend(bypass_entries(b.domain(), &body_exits, literals));
                entries = body_exits
                    .iter()
                    .map(|(s, p)| (*s, p.overlay(&updates)))
                    .collect();
            }
            dedup(exits)
        }
        SdElement::Par(operands) => {
            // Validation guarantees operands are plain message chains; walk
            // them position by position, padding shorter operands with their
            // final label.
            let chains: Vec<Vec<&str>> = operands
                .iter()
                .map(|op| {
                    op.iter()
                        .map(|el| match el {
                            SdElement::Message(m) => m.name.as_str(),
                            _ => panic!("par operands hold only messages in validated diagrams"),
                        })
                        .collect()
                })
                .collect();
            let len = chains.iter().map(|c| c.len()).max().unwrap_or(0);
            let mut out = Vec::new();
            for (state, pending) in frontier {
                let mut current = state;
                let mut first = pending;
                for pos in 0..len {
                    let parts: Vec<String> = chains
                        .iter()
                        .map(|c| c[pos.min(c.len() - 1)].to_string())
                        .collect();
                    let (target, _) = b.edge(current, Label::and_join(parts), &first);
                    first = Updates::empty();
                    current = target;
                }
                out.push((current, Updates::empty()));
            }
            dedup(out)
        }
    }
}

/// Frontier entries taking the `!literals` side of an `opt`/`loop` test.
fn bypass_entries(
    domain: &Arc<GuardDomain>,
    frontier: &Frontier,
    literals: &[crate::diagram::GuardLiteral],
) -> Frontier {
    let mut out = Vec::new();
    for lit in literals {
        let negated = crate::diagram::GuardLiteral {
            guard: lit.guard.clone(),
            polarity: !lit.polarity,
        };
        let upd = literal_updates(domain, std::slice::from_ref(&negated));
        for (s, p) in frontier {
            out.push((*s, p.overlay(&upd)));
        }
    }
    out
}
