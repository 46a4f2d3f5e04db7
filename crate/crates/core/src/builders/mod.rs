//! Builders producing one [`ComponentTs`] per diagram.
//!
//! All three builders share the same regime: a synthetic `Start` state with
//! the all-`dc` valuation, states interned on `(label, valuation)`, and
//! transitions whose target valuation is the source valuation overwritten by
//! the transition's guard updates. Branch guards become updates on the first
//! transition entering the branch. Parallel constructs (`par` operands, AD
//! fork branches, SMD orthogonal regions) advance in lockstep with
//! `and`-joined labels rather than interleaving.
//!
//! Builders expect a bundle that passed [`crate::diagram::validate`]; they
//! may panic on structurally invalid input.

mod ad;
mod sd;
mod smd;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use ad::ad_to_ts;
pub use sd::sd_to_ts;
pub use smd::smd_to_ts;

use crate::diagram::{GuardLiteral, GuardName};
use crate::ts::{
    ComponentTs, CtsState, CtsTransition, DiagramKind, GuardDomain, Label, Updates, Valuation,
};

/// Interning construction helper shared by the three builders.
pub(crate) struct TsBuilder {
    kind: DiagramKind,
    domain: Arc<GuardDomain>,
    states: Vec<CtsState>,
    index: BTreeMap<(Label, Valuation), usize>,
    transitions: Vec<CtsTransition>,
}

impl TsBuilder {
    /// Starts with state 0: label `Start`, all guards `dc`.
    pub(crate) fn new(kind: DiagramKind, domain: Arc<GuardDomain>) -> Self {
        let start = CtsState {
            label: Label::start(),
            gvs: Valuation::all_dc(&domain),
        };
        let mut index = BTreeMap::new();
        index.insert((start.label.clone(), start.gvs.clone()), 0);
        TsBuilder {
            kind,
            domain,
            states: vec![start],
            index,
            transitions: Vec::new(),
        }
    }

    pub(crate) fn domain(&self) -> &Arc<GuardDomain> {
        &self.domain
    }

    pub(crate) fn gvs(&self, state: usize) -> &Valuation {
        &self.states[state].gvs
    }

    /// Interns `(label, gvs)`; returns the id and whether it is new.
    pub(crate) fn intern(&mut self, label: Label, gvs: Valuation) -> (usize, bool) {
        if let Some(id) = self.index.get(&(label.clone(), gvs.clone())) {
            return (*id, false);
        }
        let id = self.states.len();
        self.states.push(CtsState {
            label: label.clone(),
            gvs: gvs.clone(),
        });
        self.index.insert((label, gvs), id);
        (id, true)
    }

    /// Adds `source --updates--> (label, apply(source.gvs, updates))`,
    /// interning the target. Returns the target id and whether it is new.
    pub(crate) fn edge(&mut self, source: usize, label: Label, updates: &Updates) -> (usize, bool) {
        let gvs = self.states[source].gvs.apply(updates);
        let (target, fresh) = self.intern(label, gvs);
        self.transitions.push(CtsTransition {
            source,
            target,
            updates: updates.clone(),
        });
        (target, fresh)
    }

    pub(crate) fn finish(self) -> ComponentTs {
        ComponentTs::new(self.kind, self.domain, self.states, self.transitions)
    }
}

pub(crate) fn literal_updates(domain: &GuardDomain, literals: &[GuardLiteral]) -> Updates {
    Updates::new(
        literals
            .iter()
            .map(|l| {
                let idx = domain
                    .index_of(l.guard.as_str())
                    .expect("guard collected from the same bundle");
                (idx, l.polarity)
            })
            .collect(),
    )
}

/// Builds the domain shared by every component of one bundle.
pub fn guard_domain(guards: &[GuardName]) -> Arc<GuardDomain> {
    GuardDomain::new(guards.to_vec())
}
