//! Explicit-state CTL checking over a [`UnifiedTs`].
//!
//! Satisfaction sets are computed bottom-up by fixpoint labeling: `EX` by
//! pre-image, `E[p U q]` as a least fixpoint, `EG p` as a greatest fixpoint.
//! Every other operator is rewritten into that base:
//!
//! ```text
//! AX f     = !EX !f             EF f     = E[true U f]
//! AF f     = A[true U f]        AG f     = !EF !f
//! A[p U q] = !(E[!q U (!p & !q)] | EG !q)
//! A[p W q] = !E[!q U (!p & !q)]
//! E[p W q] = E[p U q] | EG p
//! ```
//!
//! Deadlock states (no successors) are treated as having a self-loop, which
//! keeps verdicts aligned with the emitted SMV model whose `case` defaults
//! hold the current values.
//!
//! Counterexamples exist for the existential fragment reached by negating
//! the formula: atoms, `&` with at most one temporal conjunct, `|`, `EX`,
//! `EU`, `EG`. An `EU` witness is a shortest path found by BFS, an `EG`
//! witness a lasso; nested existentials concatenate their segments. Shapes
//! outside the fragment yield a verdict without a trace, flagged on the
//! verdict.

use thiserror::Error;

use crate::ctl::{Atom, AtomSubject, Formula};
use crate::ts::{GuardValue, UnifiedTs};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("unknown state name `{0}` in atom")]
    UnknownStateName(String),
    #[error("unknown guard `{0}` in atom")]
    UnknownGuard(String),
    #[error("guard `{guard}` compared against `{value}` (guards take dc, false or true)")]
    BadGuardValue { guard: String, value: String },
}

/// A violating (or witnessing) execution: a finite prefix, optionally closed
/// into a lasso by an edge from the last state back to `prefix[loop_start]`.
/// Steps follow unified transitions, except that a deadlock state may loop
/// on itself per the checker's totalization convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub prefix: Vec<usize>,
    pub loop_start: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub satisfied: bool,
    pub formula: Formula,
    pub trace: Option<Trace>,
    /// True when the formula failed but its negation is outside the
    /// supported witness fragment, so no trace could be extracted.
    pub trace_unsupported: bool,
}

pub(crate) struct Analyzer<'a> {
    uts: &'a UnifiedTs,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl<'a> Analyzer<'a> {
    pub(crate) fn new(uts: &'a UnifiedTs) -> Self {
        let n = uts.states.len();
        let mut succ: Vec<Vec<usize>> = (0..n).map(|i| uts.successors(i).to_vec()).collect();
        for (i, s) in succ.iter_mut().enumerate() {
            if s.is_empty() {
                s.push(i);
            }
            s.sort_unstable();
            s.dedup();
        }
        let mut pred = vec![Vec::new(); n];
        for (i, outs) in succ.iter().enumerate() {
            for &t in outs {
                pred[t].push(i);
            }
        }
        Analyzer { uts, succ, pred }
    }

    fn n(&self) -> usize {
        self.uts.states.len()
    }

    pub(crate) fn has_edge(&self, from: usize, to: usize) -> bool {
        self.succ[from].binary_search(&to).is_ok()
    }

    fn eval_atom(&self, atom: &Atom) -> Vec<bool> {
        match &atom.subject {
            AtomSubject::State => (0..self.n())
                .map(|i| self.uts.render_state(i) == atom.value)
                .collect(),
            AtomSubject::Guard(name) => {
                let idx = self.uts.domain.index_of(name).expect("validated atom");
                let want = match atom.value.as_str() {
                    "dc" => GuardValue::Dc,
                    "false" => GuardValue::False,
                    _ => GuardValue::True,
                };
                (0..self.n())
                    .map(|i| self.uts.state(i).gvs.get(idx) == want)
                    .collect()
            }
        }
    }

    /// States with at least one successor in `set`.
    fn ex(&self, set: &[bool]) -> Vec<bool> {
        (0..self.n())
            .map(|i| self.succ[i].iter().any(|&t| set[t]))
            .collect()
    }

    /// Least fixpoint for `E[p U q]`. The labeled set grows monotonically,
    /// one backward layer per round, and stabilizes in at most `n` rounds.
    pub(crate) fn eu(&self, p: &[bool], q: &[bool]) -> (Vec<bool>, usize) {
        let mut set = q.to_vec();
        let mut frontier: Vec<usize> = (0..self.n()).filter(|&i| set[i]).collect();
        let mut rounds = 0;
        while !frontier.is_empty() {
            rounds += 1;
            debug_assert!(rounds <= self.n() + 1, "EU exceeded its round bound");
            let mut next = Vec::new();
            for &state in &frontier {
                for &parent in &self.pred[state] {
                    if p[parent] && !set[parent] {
                        set[parent] = true;
                        next.push(parent);
                    }
                }
            }
            frontier = next;
        }
        (set, rounds)
    }

    /// Greatest fixpoint for `EG p`: start from `p` and shrink away states
    /// without a successor still in the set; stabilizes in at most `n`
    /// rounds.
    pub(crate) fn eg(&self, p: &[bool]) -> (Vec<bool>, usize) {
        let mut set = p.to_vec();
        let mut rounds = 0;
        loop {
            rounds += 1;
            debug_assert!(rounds <= self.n() + 1, "EG exceeded its round bound");
            let mut changed = false;
            for i in 0..self.n() {
                if set[i] && !self.succ[i].iter().any(|&t| set[t]) {
                    set[i] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        (set, rounds)
    }

    pub(crate) fn sat(&self, f: &Formula) -> Vec<bool> {
        let not = |s: Vec<bool>| s.into_iter().map(|b| !b).collect::<Vec<bool>>();
        let and = |a: &[bool], b: &[bool]| {
            a.iter().zip(b).map(|(x, y)| *x && *y).collect::<Vec<bool>>()
        };
        let or = |a: &[bool], b: &[bool]| {
            a.iter().zip(b).map(|(x, y)| *x || *y).collect::<Vec<bool>>()
        };
        let top = vec![true; self.n()];
        match f {
            Formula::True => top,
            Formula::False => vec![false; self.n()],
            Formula::Atom(a) => self.eval_atom(a),
            Formula::Not(p) => not(self.sat(p)),
            Formula::And(a, b) => and(&self.sat(a), &self.sat(b)),
            Formula::Or(a, b) => or(&self.sat(a), &self.sat(b)),
            Formula::Implies(a, b) => or(&not(self.sat(a)), &self.sat(b)),
            Formula::Ex(p) => self.ex(&self.sat(p)),
            Formula::Ax(p) => not(self.ex(&not(self.sat(p)))),
            Formula::Ef(p) => self.eu(&top, &self.sat(p)).0,
            Formula::Ag(p) => not(self.eu(&top, &not(self.sat(p))).0),
            Formula::Eg(p) => self.eg(&self.sat(p)).0,
            Formula::Af(p) => not(self.eg(&not(self.sat(p))).0),
            Formula::Eu(p, q) => self.eu(&self.sat(p), &self.sat(q)).0,
            Formula::Au(p, q) => {
                let np = not(self.sat(p));
                let nq = not(self.sat(q));
                let eu = self.eu(&nq, &and(&np, &nq)).0;
                let eg = self.eg(&nq).0;
                not(or(&eu, &eg))
            }
            Formula::Aw(p, q) => {
                let np = not(self.sat(p));
                let nq = not(self.sat(q));
                not(self.eu(&nq, &and(&np, &nq)).0)
            }
            Formula::Ew(p, q) => {
                let eu = self.eu(&self.sat(p), &self.sat(q)).0;
                let eg = self.eg(&self.sat(p)).0;
                or(&eu, &eg)
            }
        }
    }
}

fn validate_atoms(uts: &UnifiedTs, f: &Formula) -> Result<(), CheckError> {
    match f {
        Formula::Atom(a) => match &a.subject {
            AtomSubject::State => {
                let exists = (0..uts.states.len()).any(|i| uts.render_state(i) == a.value);
                if !exists {
                    return Err(CheckError::UnknownStateName(a.value.clone()));
                }
                Ok(())
            }
            AtomSubject::Guard(name) => {
                if uts.domain.index_of(name).is_none() {
                    return Err(CheckError::UnknownGuard(name.clone()));
                }
                if !matches!(a.value.as_str(), "dc" | "false" | "true") {
                    return Err(CheckError::BadGuardValue {
                        guard: name.clone(),
                        value: a.value.clone(),
                    });
                }
                Ok(())
            }
        },
        Formula::True | Formula::False => Ok(()),
        Formula::Not(p) | Formula::Ax(p) | Formula::Ex(p) | Formula::Af(p) | Formula::Ef(p)
        | Formula::Ag(p) | Formula::Eg(p) => validate_atoms(uts, p),
        Formula::And(a, b)
        | Formula::Or(a, b)
        | Formula::Implies(a, b)
        | Formula::Au(a, b)
        | Formula::Eu(a, b)
        | Formula::Aw(a, b)
        | Formula::Ew(a, b) => {
            validate_atoms(uts, a)?;
            validate_atoms(uts, b)
        }
    }
}

/// Checks `f` against the initial state. Unsatisfied verdicts carry a
/// counterexample when the negation falls into the supported witness
/// fragment.
pub fn check(uts: &UnifiedTs, f: &Formula) -> Result<Verdict, CheckError> {
    validate_atoms(uts, f)?;
    let analyzer = Analyzer::new(uts);
    let satisfied = analyzer.sat(f)[uts.initial];
    let (trace, trace_unsupported) = if satisfied {
        (None, false)
    } else {
        let witness = nnf_neg(f);
        match extract(&analyzer, &witness, uts.initial) {
            Some(t) => (Some(Trace::from(t)), false),
            None => (None, true),
        }
    };
    Ok(Verdict {
        satisfied,
        formula: f.clone(),
        trace,
        trace_unsupported,
    })
}

/// Extracts a counterexample for a formula that already failed [`check`].
/// `Ok(None)` means the shape is unsupported.
pub fn counterexample(uts: &UnifiedTs, f: &Formula) -> Result<Option<Trace>, CheckError> {
    validate_atoms(uts, f)?;
    let analyzer = Analyzer::new(uts);
    debug_assert!(!analyzer.sat(f)[uts.initial], "counterexample of a satisfied formula");
    Ok(extract(&analyzer, &nnf_neg(f), uts.initial).map(Trace::from))
}

/// Negation normal form of `!f`, rewritten toward the existential fragment.
fn nnf_neg(f: &Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Atom(_) => Formula::not(f.clone()),
        Formula::Not(p) => nnf_pos(p),
        Formula::And(a, b) => Formula::or(nnf_neg(a), nnf_neg(b)),
        Formula::Or(a, b) => Formula::and(nnf_neg(a), nnf_neg(b)),
        Formula::Implies(a, b) => Formula::and(nnf_pos(a), nnf_neg(b)),
        Formula::Ax(p) => Formula::Ex(Box::new(nnf_neg(p))),
        Formula::Ex(p) => Formula::Ax(Box::new(nnf_neg(p))),
        Formula::Af(p) => Formula::Eg(Box::new(nnf_neg(p))),
        Formula::Eg(p) => Formula::Af(Box::new(nnf_neg(p))),
        Formula::Ag(p) => Formula::Eu(Box::new(Formula::True), Box::new(nnf_neg(p))),
        Formula::Ef(p) => Formula::Ag(Box::new(nnf_neg(p))),
        Formula::Au(p, q) => {
            let np = nnf_neg(p);
            let nq = nnf_neg(q);
            Formula::or(
                Formula::Eu(Box::new(nq.clone()), Box::new(Formula::and(np, nq.clone()))),
                Formula::Eg(Box::new(nq)),
            )
        }
        Formula::Aw(p, q) => {
            let np = nnf_neg(p);
            let nq = nnf_neg(q);
            Formula::Eu(Box::new(nq.clone()), Box::new(Formula::and(np, nq)))
        }
        Formula::Eu(p, q) => {
            let np = nnf_neg(p);
            let nq = nnf_neg(q);
            Formula::Aw(Box::new(nq.clone()), Box::new(Formula::and(np, nq)))
        }
        Formula::Ew(p, q) => {
            // !(E[p U q] | EG p)
            Formula::and(nnf_neg(&Formula::Eu(p.clone(), q.clone())), Formula::Af(Box::new(nnf_neg(p))))
        }
    }
}

/// Negation normal form of `f` itself.
fn nnf_pos(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
        Formula::Not(p) => nnf_neg(p),
        Formula::And(a, b) => Formula::and(nnf_pos(a), nnf_pos(b)),
        Formula::Or(a, b) => Formula::or(nnf_pos(a), nnf_pos(b)),
        Formula::Implies(a, b) => Formula::or(nnf_neg(a), nnf_pos(b)),
        Formula::Ax(p) => Formula::Ax(Box::new(nnf_pos(p))),
        Formula::Ex(p) => Formula::Ex(Box::new(nnf_pos(p))),
        Formula::Af(p) => Formula::Af(Box::new(nnf_pos(p))),
        Formula::Ef(p) => Formula::Ef(Box::new(nnf_pos(p))),
        Formula::Ag(p) => Formula::Ag(Box::new(nnf_pos(p))),
        Formula::Eg(p) => Formula::Eg(Box::new(nnf_pos(p))),
        Formula::Au(p, q) => Formula::Au(Box::new(nnf_pos(p)), Box::new(nnf_pos(q))),
        Formula::Eu(p, q) => Formula::Eu(Box::new(nnf_pos(p)), Box::new(nnf_pos(q))),
        Formula::Aw(p, q) => Formula::Aw(Box::new(nnf_pos(p)), Box::new(nnf_pos(q))),
        Formula::Ew(p, q) => Formula::Ew(Box::new(nnf_pos(p)), Box::new(nnf_pos(q))),
    }
}

fn is_propositional(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => true,
        Formula::Not(p) => is_propositional(p),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            is_propositional(a) && is_propositional(b)
        }
        _ => false,
    }
}

struct Partial {
    states: Vec<usize>,
    loop_start: Option<usize>,
}

impl Partial {
    fn single(s: usize) -> Self {
        Partial { states: vec![s], loop_start: None }
    }

    /// Appends `tail`, whose first state must equal this trace's last.
    fn concat(mut self, tail: Partial) -> Partial {
        debug_assert_eq!(self.states.last(), tail.states.first());
        debug_assert!(self.loop_start.is_none(), "nothing follows a closed lasso");
        let offset = self.states.len() - 1;
        self.states.extend(tail.states.into_iter().skip(1));
        Partial {
            states: self.states,
            loop_start: tail.loop_start.map(|i| i + offset),
        }
    }
}

/// Witness extraction for an NNF formula holding at `s`. `None` marks an
/// unsupported shape.
fn extract(a: &Analyzer<'_>, f: &Formula, s: usize) -> Option<Partial> {
    debug_assert!(a.sat(f)[s], "extraction requires the witness formula to hold");
    match f {
        Formula::True | Formula::Atom(_) => Some(Partial::single(s)),
        Formula::Not(p) if is_propositional(p) => Some(Partial::single(s)),
        Formula::And(_, _) => {
            let mut conjuncts = Vec::new();
            flatten_and(f, &mut conjuncts);
            let temporal: Vec<&Formula> = conjuncts
                .iter()
                .copied()
                .filter(|c| !is_propositional(c))
                .collect();
            match temporal.as_slice() {
                [] => Some(Partial::single(s)),
                [one] => extract(a, one, s),
                _ => None,
            }
        }
        Formula::Or(p, q) => {
            if a.sat(p)[s] {
                extract(a, p, s).or_else(|| if a.sat(q)[s] { extract(a, q, s) } else { None })
            } else {
                extract(a, q, s)
            }
        }
        Formula::Ex(p) => {
            let sat_p = a.sat(p);
            let t = *a.succ[s].iter().find(|&&t| sat_p[t])?;
            let tail = extract(a, p, t)?;
            let mut states = vec![s];
            states.extend(tail.states.iter());
            Some(Partial {
                states,
                loop_start: tail.loop_start.map(|i| i + 1),
            })
        }
        Formula::Eu(p, q) => {
            // shortest p-path to a q-state, then q's own witness
            let sat_p = a.sat(p);
            let sat_q = a.sat(q);
            let path = bfs_path(a, s, &sat_p, &sat_q)?;
            let target = *path.last().unwrap();
            let tail = extract(a, q, target)?;
            Some(Partial { states: path, loop_start: None }.concat(tail))
        }
        Formula::Eg(p) => {
            // walk inside Sat(EG p) until a state repeats
            let sat_eg = a.eg(&a.sat(p)).0;
            debug_assert!(sat_eg[s]);
            let mut seen: Vec<usize> = Vec::new();
            let mut positions = std::collections::HashMap::new();
            let mut current = s;
            loop {
                if let Some(&j) = positions.get(&current) {
                    return Some(Partial { states: seen, loop_start: Some(j) });
                }
                positions.insert(current, seen.len());
                seen.push(current);
                current = *a.succ[current].iter().find(|&&t| sat_eg[t])?;
            }
        }
        Formula::Ew(p, q) => {
            let eu = Formula::Eu(p.clone(), q.clone());
            if a.sat(&eu)[s] {
                extract(a, &eu, s)
            } else {
                extract(a, &Formula::Eg(p.clone()), s)
            }
        }
        _ => None,
    }
}

fn flatten_and<'f>(f: &'f Formula, out: &mut Vec<&'f Formula>) {
    match f {
        Formula::And(a, b) => {
            flatten_and(a, out);
            flatten_and(b, out);
        }
        other => out.push(other),
    }
}

/// Shortest path from `s` through `p`-states to any `q`-state (the endpoints
/// may overlap: a `q`-state is found immediately when `s` satisfies `q`).
fn bfs_path(a: &Analyzer<'_>, s: usize, p: &[bool], q: &[bool]) -> Option<Vec<usize>> {
    if q[s] {
        return Some(vec![s]);
    }
    let mut parent: Vec<Option<usize>> = vec![None; a.n()];
    let mut visited = vec![false; a.n()];
    visited[s] = true;
    let mut queue = std::collections::VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        if !p[x] {
            continue;
        }
        for &t in &a.succ[x] {
            if !visited[t] {
                visited[t] = true;
                parent[t] = Some(x);
                if q[t] {
                    let mut path = vec![t];
                    let mut cur = t;
                    while let Some(prev) = parent[cur] {
                        path.push(prev);
                        cur = prev;
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(t);
            }
        }
    }
    None
}

impl From<Partial> for Trace {
    fn from(p: Partial) -> Self {
        Trace {
            prefix: p.states,
            loop_start: p.loop_start,
        }
    }
}

/// Re-validates a trace against the system: every consecutive pair must be
/// a unified transition (or the totalizing self-loop of a deadlock state),
/// and a lasso's closing edge must exist as well.
pub fn trace_revalidates(uts: &UnifiedTs, trace: &Trace) -> bool {
    if trace.prefix.is_empty() {
        return false;
    }
    let a = Analyzer::new(uts);
    for w in trace.prefix.windows(2) {
        if !a.has_edge(w[0], w[1]) {
            return false;
        }
    }
    match trace.loop_start {
        Some(ls) => {
            ls < trace.prefix.len() && a.has_edge(*trace.prefix.last().unwrap(), trace.prefix[ls])
        }
        None => true,
    }
}

/// Renders a trace in the style of model-checker output: numbered states
/// with their guard values, the lasso entry marked.
pub fn format_trace(uts: &UnifiedTs, trace: &Trace) -> String {
    let mut out = String::new();
    for (i, &state) in trace.prefix.iter().enumerate() {
        if trace.loop_start == Some(i) {
            out.push_str("-- loop starts here --\n");
        }
        let gvs = uts.state(state).gvs.render(&uts.domain);
        if gvs.is_empty() {
            out.push_str(&format!("State {}: {}\n", i + 1, uts.render_state(state)));
        } else {
            out.push_str(&format!(
                "State {}: {} | {}\n",
                i + 1,
                uts.render_state(state),
                gvs
            ));
        }
    }
    out
}
