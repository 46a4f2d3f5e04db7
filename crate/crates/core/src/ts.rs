//! Shared transition-system model.
//!
//! Both the per-diagram component systems and the unified system use the same
//! building blocks: [`Label`]s rendered from element names, and ternary
//! [`Valuation`]s over the bundle's guard list. States are value-identified
//! by `(rendered label, valuation)`; builders memoize on that pair, which is
//! what keeps every constructed system finite.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::diagram::GuardName;

/// Ternary guard value. `Dc` ("do not care") is the initial state of every
/// guard; it never reappears once a guard has been fixed along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GuardValue {
    Dc,
    False,
    True,
}

impl GuardValue {
    pub fn as_str(&self) -> &'static str {
        match self {
            GuardValue::Dc => "dc",
            GuardValue::False => "false",
            GuardValue::True => "true",
        }
    }
}

impl From<bool> for GuardValue {
    fn from(b: bool) -> Self {
        if b {
            GuardValue::True
        } else {
            GuardValue::False
        }
    }
}

impl fmt::Display for GuardValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GuardError {
    #[error("unknown guard name `{0}`")]
    UnknownGuard(String),
    #[error("inconsistent update: guard `{guard}` is {current} but update requires {requested}")]
    InconsistentUpdate {
        guard: String,
        current: GuardValue,
        requested: GuardValue,
    },
}

/// Ordered guard list of one bundle. Valuations and updates index into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardDomain {
    names: Vec<GuardName>,
}

impl GuardDomain {
    pub fn new(names: Vec<GuardName>) -> Arc<Self> {
        debug_assert!(
            names.iter().collect::<BTreeSet<_>>().len() == names.len(),
            "guard names must be distinct"
        );
        Arc::new(GuardDomain { names })
    }

    pub fn empty() -> Arc<Self> {
        Arc::new(GuardDomain { names: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[GuardName] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &GuardName {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|g| g.as_str() == name)
    }
}

/// A conjunction of guard assignments attached to a transition. Guards are
/// stored by domain index, sorted, each at most once.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Updates(Vec<(usize, bool)>);

impl Updates {
    pub fn new(mut entries: Vec<(usize, bool)>) -> Self {
        entries.sort_unstable();
        entries.dedup();
        debug_assert!(
            entries.windows(2).all(|w| w[0].0 != w[1].0),
            "conflicting values for one guard in a single update set"
        );
        Updates(entries)
    }

    pub fn empty() -> Self {
        Updates(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[(usize, bool)] {
        &self.0
    }

    pub fn guard_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|(g, _)| *g)
    }

    /// Overlay `other` on top of `self`: entries of `other` win on shared
    /// guards. Used when a branch's literals compose with pending updates
    /// from an enclosing fragment.
    pub fn overlay(&self, other: &Updates) -> Updates {
        let mut map: BTreeMap<usize, bool> = self.0.iter().copied().collect();
        for (g, v) in &other.0 {
            map.insert(*g, *v);
        }
        Updates(map.into_iter().collect())
    }

    /// Joins two update sets that must agree on shared guards; `None` when
    /// they assign opposite values to the same guard.
    pub fn try_join(&self, other: &Updates) -> Option<Updates> {
        let mut map: BTreeMap<usize, bool> = self.0.iter().copied().collect();
        for (g, v) in &other.0 {
            match map.insert(*g, *v) {
                Some(prev) if prev != *v => return None,
                _ => {}
            }
        }
        Some(Updates(map.into_iter().collect()))
    }
}

/// Total map from every guard in the domain to a [`GuardValue`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation {
    values: Vec<GuardValue>,
}

impl Valuation {
    /// The all-`dc` valuation every system starts from.
    pub fn all_dc(domain: &GuardDomain) -> Self {
        Valuation {
            values: vec![GuardValue::Dc; domain.len()],
        }
    }

    pub fn get(&self, index: usize) -> GuardValue {
        self.values[index]
    }

    pub fn values(&self) -> &[GuardValue] {
        &self.values
    }

    /// True iff every updated guard is currently `dc` or already carries the
    /// requested value. This is the matching criterion of the unifier.
    pub fn is_consistent(&self, updates: &Updates) -> bool {
        updates.entries().iter().all(|(g, v)| {
            matches!(self.values[*g], GuardValue::Dc) || self.values[*g] == GuardValue::from(*v)
        })
    }

    /// Pointwise overwrite. Re-assignment true↔false is permitted (loop
    /// re-entry); a guard never goes back to `dc` because updates only carry
    /// concrete values.
    pub fn apply(&self, updates: &Updates) -> Valuation {
        let mut values = self.values.clone();
        for (g, v) in updates.entries() {
            values[*g] = GuardValue::from(*v);
        }
        Valuation { values }
    }

    /// Like [`Valuation::apply`] but fails when the update conflicts with an
    /// already-fixed guard.
    pub fn apply_checked(
        &self,
        domain: &GuardDomain,
        updates: &Updates,
    ) -> Result<Valuation, GuardError> {
        for (g, v) in updates.entries() {
            let current = self.values[*g];
            let requested = GuardValue::from(*v);
            if current != GuardValue::Dc && current != requested {
                return Err(GuardError::InconsistentUpdate {
                    guard: domain.name(*g).to_string(),
                    current,
                    requested,
                });
            }
        }
        Ok(self.apply(updates))
    }

    /// Guard indices whose value would actually change under `updates`.
    pub fn changed_by(&self, updates: &Updates) -> Vec<usize> {
        updates
            .entries()
            .iter()
            .filter(|(g, v)| self.values[*g] != GuardValue::from(*v))
            .map(|(g, _)| *g)
            .collect()
    }

    pub fn is_all_dc(&self) -> bool {
        self.values.iter().all(|v| *v == GuardValue::Dc)
    }

    /// `g1=v1 g2=v2 ...` in domain order; empty string for an empty domain.
    pub fn render(&self, domain: &GuardDomain) -> String {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{}={}", domain.name(i), v))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Parses updates given by guard name, for callers that do not hold domain
/// indices. Unknown names are errors.
pub fn updates_by_name(
    domain: &GuardDomain,
    entries: &[(&str, bool)],
) -> Result<Updates, GuardError> {
    let mut indexed = Vec::with_capacity(entries.len());
    for (name, v) in entries {
        let idx = domain
            .index_of(name)
            .ok_or_else(|| GuardError::UnknownGuard((*name).to_string()))?;
        indexed.push((idx, *v));
    }
    Ok(Updates::new(indexed))
}

/// Name-keyed form of the consistency check.
pub fn gvs_consistent(
    domain: &GuardDomain,
    current: &Valuation,
    updates: &[(&str, bool)],
) -> Result<bool, GuardError> {
    let updates = updates_by_name(domain, updates)?;
    Ok(current.is_consistent(&updates))
}

/// Name-keyed apply; errors on unknown guards and on updates that conflict
/// with an already-fixed value.
pub fn gvs_apply(
    domain: &GuardDomain,
    current: &Valuation,
    updates: &[(&str, bool)],
) -> Result<Valuation, GuardError> {
    let updates = updates_by_name(domain, updates)?;
    current.apply_checked(domain, &updates)
}

/// A state label: one or more element names, joined with a literal `and`
/// when parallel. The placeholder label `-` marks a slot whose diagram is
/// absent or momentarily inconsistent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    parts: Vec<String>,
}

impl Label {
    pub fn single(name: impl Into<String>) -> Self {
        Label {
            parts: vec![name.into()],
        }
    }

    pub fn and_join(parts: Vec<String>) -> Self {
        debug_assert!(!parts.is_empty());
        Label { parts }
    }

    pub fn start() -> Self {
        Label::single("Start")
    }

    pub fn end() -> Self {
        Label::single("End")
    }

    pub fn placeholder() -> Self {
        Label::single("-")
    }

    pub fn is_placeholder(&self) -> bool {
        self.parts.len() == 1 && self.parts[0] == "-"
    }

    pub fn parts(&self) -> &[String] {
        &self.parts
    }

    pub fn render(&self) -> String {
        self.parts.join("and")
    }

    /// Contribution to a composed `Message-State-Activity` name: the
    /// placeholder contributes an empty segment, so an absent middle slot
    /// renders as `msg--act`.
    pub fn slot(&self) -> String {
        if self.is_placeholder() {
            String::new()
        } else {
            self.render()
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagramKind {
    Sd,
    Smd,
    Ad,
}

impl fmt::Display for DiagramKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagramKind::Sd => "sequence",
            DiagramKind::Smd => "statemachine",
            DiagramKind::Ad => "activity",
        })
    }
}

/// State of a component transition system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtsState {
    pub label: Label,
    pub gvs: Valuation,
}

/// Transition of a component transition system. The target valuation always
/// equals the source valuation overwritten by `updates`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CtsTransition {
    pub source: usize,
    pub target: usize,
    pub updates: Updates,
}

/// Per-diagram transition system. State 0 is the synthetic `Start` state
/// with the all-`dc` valuation; every state is reachable from it.
#[derive(Debug, Clone)]
pub struct ComponentTs {
    pub kind: DiagramKind,
    pub domain: Arc<GuardDomain>,
    pub states: Vec<CtsState>,
    pub transitions: Vec<CtsTransition>,
    outgoing: Vec<Vec<usize>>,
}

impl ComponentTs {
    pub fn new(
        kind: DiagramKind,
        domain: Arc<GuardDomain>,
        states: Vec<CtsState>,
        mut transitions: Vec<CtsTransition>,
    ) -> Self {
        transitions.sort();
        transitions.dedup();
        let mut outgoing = vec![Vec::new(); states.len()];
        for (i, t) in transitions.iter().enumerate() {
            outgoing[t.source].push(i);
        }
        ComponentTs {
            kind,
            domain,
            states,
            transitions,
            outgoing,
        }
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn state(&self, id: usize) -> &CtsState {
        &self.states[id]
    }

    pub fn outgoing(&self, id: usize) -> impl Iterator<Item = &CtsTransition> {
        self.outgoing[id].iter().map(|i| &self.transitions[*i])
    }

    fn state_key(&self, id: usize) -> String {
        state_key(&self.states[id].label.render(), &self.states[id].gvs, &self.domain)
    }

    /// Debug dump: one line per state, one per transition, each block
    /// lexicographically sorted. Golden tests diff this.
    pub fn dump(&self) -> String {
        let state_lines: BTreeSet<String> =
            (0..self.states.len()).map(|i| self.state_key(i)).collect();
        let trans_lines: BTreeSet<String> = self
            .transitions
            .iter()
            .map(|t| format!("{} -> {}", self.state_key(t.source), self.state_key(t.target)))
            .collect();
        let mut out = String::new();
        for line in state_lines.iter().chain(trans_lines.iter()) {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

fn state_key(name: &str, gvs: &Valuation, domain: &GuardDomain) -> String {
    if domain.is_empty() {
        name.to_string()
    } else {
        format!("{} | {}", name, gvs.render(domain))
    }
}

/// State of the unified transition system: one label per diagram slot plus
/// the joint guard valuation. Rendered as `Message-State-Activity`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnifiedState {
    pub msg: Label,
    pub st: Label,
    pub act: Label,
    pub gvs: Valuation,
}

impl UnifiedState {
    pub fn render(&self) -> String {
        format!("{}-{}-{}", self.msg.slot(), self.st.slot(), self.act.slot())
    }
}

/// The merged transition system. States are value-identified: two states
/// with the same rendered name and the same valuation are the same state.
#[derive(Debug, Clone)]
pub struct UnifiedTs {
    pub domain: Arc<GuardDomain>,
    pub states: Vec<UnifiedState>,
    pub transitions: Vec<(usize, usize)>,
    pub initial: usize,
    outgoing: Vec<Vec<usize>>,
}

impl UnifiedTs {
    pub fn new(
        domain: Arc<GuardDomain>,
        states: Vec<UnifiedState>,
        mut transitions: Vec<(usize, usize)>,
        initial: usize,
    ) -> Self {
        transitions.sort_unstable();
        transitions.dedup();
        let mut outgoing = vec![Vec::new(); states.len()];
        for &(src, dst) in &transitions {
            outgoing[src].push(dst);
        }
        UnifiedTs {
            domain,
            states,
            transitions,
            initial,
            outgoing,
        }
    }

    pub fn successors(&self, id: usize) -> &[usize] {
        &self.outgoing[id]
    }

    pub fn state(&self, id: usize) -> &UnifiedState {
        &self.states[id]
    }

    pub fn render_state(&self, id: usize) -> String {
        self.states[id].render()
    }

    fn state_key(&self, id: usize) -> String {
        state_key(&self.states[id].render(), &self.states[id].gvs, &self.domain)
    }

    /// Distinct rendered names, in the order of a deterministic BFS from the
    /// initial state (ties between successors broken by state key).
    pub fn bfs_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        let mut seen_names = BTreeSet::new();
        for id in self.bfs_order() {
            let name = self.render_state(id);
            if seen_names.insert(name.clone()) {
                names.push(name);
            }
        }
        names
    }

    /// Deterministic BFS order over all reachable states.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.states.len());
        let mut visited = vec![false; self.states.len()];
        let mut queue = VecDeque::new();
        visited[self.initial] = true;
        queue.push_back(self.initial);
        while let Some(id) = queue.pop_front() {
            order.push(id);
            let mut succs: Vec<usize> = self.outgoing[id].clone();
            succs.sort_by_key(|s| self.state_key(*s));
            for s in succs {
                if !visited[s] {
                    visited[s] = true;
                    queue.push_back(s);
                }
            }
        }
        order
    }

    /// `(declared, reachable)` counts. `declared` is the size of the SMV
    /// state space spanned by the distinct rendered names times every guard
    /// valuation; `reachable` counts the states a BFS from the initial state
    /// actually visits.
    pub fn reachable_stats(&self) -> (usize, usize) {
        let names: BTreeSet<String> = (0..self.states.len())
            .map(|i| self.render_state(i))
            .collect();
        let declared = names.len() * 3usize.pow(self.domain.len() as u32);
        let reachable = self.bfs_order().len();
        (declared, reachable)
    }

    /// Same dump format as [`ComponentTs::dump`].
    pub fn dump(&self) -> String {
        let state_lines: BTreeSet<String> =
            (0..self.states.len()).map(|i| self.state_key(i)).collect();
        let trans_lines: BTreeSet<String> = self
            .transitions
            .iter()
            .map(|(s, d)| format!("{} -> {}", self.state_key(*s), self.state_key(*d)))
            .collect();
        let mut out = String::new();
        for line in state_lines.iter().chain(trans_lines.iter()) {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}
