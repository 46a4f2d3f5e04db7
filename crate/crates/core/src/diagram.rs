//! Diagram metamodels, structural validation, and guard collection.
//!
//! The metamodels are deliberately small subsets of UML 2: sequence diagrams
//! support `alt`/`opt`/`loop`/`par` combined fragments, state machines flat
//! states plus orthogonal regions, activity diagrams seven node kinds. Guards
//! are boolean atoms; a transition carries a conjunction of guard literals,
//! and disjunction is modeled by multiple transitions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NameError {
    #[error("`{0}` is not a valid identifier (letter first, then letters/digits/underscore)")]
    BadIdentifier(String),
    #[error("`and` is reserved for composed labels")]
    ReservedAnd,
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn check_name(s: &str) -> Result<(), NameError> {
    if !is_identifier(s) {
        return Err(NameError::BadIdentifier(s.to_string()));
    }
    if s == "and" {
        return Err(NameError::ReservedAnd);
    }
    Ok(())
}

/// Name of a boolean guard. Identifiers only, so a guard can never contain
/// the `-` and `and` tokens reserved for composing unified labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GuardName(String);

impl GuardName {
    pub fn new(name: &str) -> Result<Self, NameError> {
        check_name(name)?;
        Ok(GuardName(name.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for GuardName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// `[g]` or `[!g]`: taking the transition fixes the guard to the literal's
/// polarity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GuardLiteral {
    pub guard: GuardName,
    pub polarity: bool,
}

impl GuardLiteral {
    pub fn pos(guard: GuardName) -> Self {
        GuardLiteral {
            guard,
            polarity: true,
        }
    }

    pub fn neg(guard: GuardName) -> Self {
        GuardLiteral {
            guard,
            polarity: false,
        }
    }
}

impl fmt::Display for GuardLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.polarity {
            write!(f, "{}", self.guard)
        } else {
            write!(f, "!{}", self.guard)
        }
    }
}

pub type GuardSet = Vec<GuardLiteral>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub name: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SdElement {
    Message(Message),
    /// `alt` with two or more guarded branches.
    Alt(Vec<(GuardSet, Vec<SdElement>)>),
    Opt(GuardSet, Vec<SdElement>),
    Loop(GuardSet, Vec<SdElement>),
    /// Parallel operands, advanced in lockstep by the builder.
    Par(Vec<Vec<SdElement>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceDiagram {
    pub name: String,
    pub lifelines: Vec<String>,
    pub body: Vec<SdElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub name: String,
    pub states: Vec<String>,
    pub initial: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmTransition {
    pub source: String,
    pub target: String,
    pub event: Option<String>,
    pub guards: GuardSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMachineDiagram {
    pub name: String,
    /// Flat states, declared outside any region.
    pub states: Vec<String>,
    pub initial: String,
    pub regions: Vec<Region>,
    pub transitions: Vec<SmTransition>,
}

impl StateMachineDiagram {
    pub fn region_of(&self, state: &str) -> Option<usize> {
        self.regions
            .iter()
            .position(|r| r.states.iter().any(|s| s == state))
    }

    pub fn is_flat(&self, state: &str) -> bool {
        self.states.iter().any(|s| s == state)
    }

    pub fn all_states(&self) -> impl Iterator<Item = &String> {
        self.states
            .iter()
            .chain(self.regions.iter().flat_map(|r| r.states.iter()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Initial,
    Action,
    Decision,
    Merge,
    Fork,
    Join,
    Final,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Initial => "initial",
            NodeKind::Action => "action",
            NodeKind::Decision => "decision",
            NodeKind::Merge => "merge",
            NodeKind::Fork => "fork",
            NodeKind::Join => "join",
            NodeKind::Final => "final",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdNode {
    pub id: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdEdge {
    pub source: String,
    pub target: String,
    pub guards: GuardSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityDiagram {
    pub name: String,
    pub nodes: Vec<AdNode>,
    pub edges: Vec<AdEdge>,
}

impl ActivityDiagram {
    pub fn node(&self, id: &str) -> Option<&AdNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn outgoing<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a AdEdge> + 'a {
        self.edges.iter().filter(move |e| e.source == id)
    }
}

/// The parsed diagrams of one scenario. The sequence diagram is mandatory
/// and at least one of the other two must be present for the bundle to
/// validate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramBundle {
    pub sd: SequenceDiagram,
    pub smd: Option<StateMachineDiagram>,
    pub ad: Option<ActivityDiagram>,
}

/// One structural violation, with a path identifying the offending element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

fn check_label(report: &mut ValidationReport, path: &str, name: &str) {
    if name.contains('-') {
        report.push(path, format!("label `{name}` contains reserved character `-`"));
    } else if !is_identifier(name) {
        report.push(path, format!("label `{name}` is not a valid identifier"));
    } else if name == "and" {
        report.push(path, "label `and` is reserved for composed labels");
    }
}

fn check_guard_set(report: &mut ValidationReport, path: &str, guards: &GuardSet) {
    let mut seen = BTreeSet::new();
    for lit in guards {
        if !seen.insert(&lit.guard) {
            report.push(
                path,
                format!("guard `{}` appears twice in one literal set", lit.guard),
            );
        }
    }
}

/// Checks every structural invariant of the bundle. An empty report means
/// every builder in [`crate::builders`] will succeed on it. Violations are
/// data, not failures.
pub fn validate(bundle: &DiagramBundle) -> ValidationReport {
    let mut report = ValidationReport::default();
    if bundle.smd.is_none() && bundle.ad.is_none() {
        report.push("bundle", "bundle requires a second diagram besides the sequence diagram");
    }
    validate_sd(&mut report, &bundle.sd);
    if let Some(smd) = &bundle.smd {
        validate_smd(&mut report, smd);
    }
    if let Some(ad) = &bundle.ad {
        validate_ad(&mut report, ad);
    }
    report
}

fn validate_sd(report: &mut ValidationReport, sd: &SequenceDiagram) {
    let path = format!("sequence {}", sd.name);
    check_label(report, &path, &sd.name);
    let mut seen = BTreeSet::new();
    for l in &sd.lifelines {
        check_label(report, &format!("{path}/lifeline {l}"), l);
        if !seen.insert(l) {
            report.push(&path, format!("duplicate lifeline `{l}`"));
        }
    }
    if sd.body.is_empty() {
        report.push(&path, "body is empty");
    }
    validate_sd_body(report, sd, &path, &sd.body, false);
}

fn validate_sd_body(
    report: &mut ValidationReport,
    sd: &SequenceDiagram,
    path: &str,
    body: &[SdElement],
    inside_par: bool,
) {
    for (i, el) in body.iter().enumerate() {
        match el {
            SdElement::Message(m) => {
                let mpath = format!("{path}/msg {}", m.name);
                check_label(report, &mpath, &m.name);
                for endpoint in [&m.from, &m.to] {
                    if !sd.lifelines.iter().any(|l| l == endpoint) {
                        report.push(&mpath, format!("undeclared lifeline `{endpoint}`"));
                    }
                }
            }
            SdElement::Alt(branches) => {
                let apath = format!("{path}/alt#{i}");
                if inside_par {
                    report.push(&apath, "par operands may contain only messages");
                }
                if branches.len() < 2 {
                    report.push(&apath, "alt requires at least two branches");
                }
                for (b, (guards, inner)) in branches.iter().enumerate() {
                    let bpath = format!("{apath}/branch#{b}");
                    if guards.is_empty() {
                        report.push(&bpath, "alt branch without guard");
                    }
                    check_guard_set(report, &bpath, guards);
                    if inner.is_empty() {
                        report.push(&bpath, "body is empty");
                    }
                    validate_sd_body(report, sd, &bpath, inner, false);
                }
            }
            SdElement::Opt(guards, inner) | SdElement::Loop(guards, inner) => {
                let kind = if matches!(el, SdElement::Opt(..)) {
                    "opt"
                } else {
                    "loop"
                };
                let opath = format!("{path}/{kind}#{i}");
                if inside_par {
                    report.push(&opath, "par operands may contain only messages");
                }
                if guards.is_empty() {
                    report.push(&opath, format!("{kind} fragment without guard"));
                }
                check_guard_set(report, &opath, guards);
                if inner.is_empty() {
                    report.push(&opath, "body is empty");
                }
                validate_sd_body(report, sd, &opath, inner, false);
            }
            SdElement::Par(operands) => {
                let ppath = format!("{path}/par#{i}");
                if inside_par {
                    report.push(&ppath, "par operands may contain only messages");
                }
                if operands.len() < 2 {
                    report.push(&ppath, "par requires at least two operands");
                }
                for (o, operand) in operands.iter().enumerate() {
                    let opath = format!("{ppath}/operand#{o}");
                    if operand.is_empty() {
                        report.push(&opath, "body is empty");
                    }
                    validate_sd_body(report, sd, &opath, operand, true);
                }
            }
        }
    }
}

fn validate_smd(report: &mut ValidationReport, smd: &StateMachineDiagram) {
    let path = format!("statemachine {}", smd.name);
    check_label(report, &path, &smd.name);

    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    for s in &smd.states {
        check_label(report, &format!("{path}/state {s}"), s);
        if seen.insert(s, "flat").is_some() {
            report.push(&path, format!("duplicate declaration of state `{s}`"));
        }
    }
    for r in &smd.regions {
        let rpath = format!("{path}/region {}", r.name);
        check_label(report, &rpath, &r.name);
        for s in &r.states {
            check_label(report, &format!("{rpath}/state {s}"), s);
            if seen.insert(s, "region").is_some() {
                report.push(&rpath, format!("state `{s}` declared in more than one place"));
            }
        }
        if !r.states.iter().any(|s| s == &r.initial) {
            report.push(&rpath, format!("region initial `{}` is not one of its states", r.initial));
        }
    }

    let known = |s: &str| smd.all_states().any(|k| k == s);
    if !known(&smd.initial) {
        report.push(&path, format!("initial `{}` is not a declared state", smd.initial));
    }

    let mut out_count: BTreeMap<&str, Vec<&SmTransition>> = BTreeMap::new();
    for (i, t) in smd.transitions.iter().enumerate() {
        let tpath = format!("{path}/trans#{i} {}->{}", t.source, t.target);
        for endpoint in [&t.source, &t.target] {
            if !known(endpoint) {
                report.push(&tpath, format!("undeclared state `{endpoint}`"));
            }
        }
        if let Some(ev) = &t.event {
            check_label(report, &tpath, ev);
        }
        check_guard_set(report, &tpath, &t.guards);
        match (smd.region_of(&t.source), smd.region_of(&t.target)) {
            (Some(a), Some(b)) if a != b => {
                report.push(&tpath, "transition crosses between distinct regions");
            }
            _ => {}
        }
        out_count.entry(t.source.as_str()).or_default().push(t);
    }

    // No-guards diagrams must be path-free: branching states need guards on
    // every outgoing transition.
    for (state, outs) in &out_count {
        if outs.len() >= 2 && outs.iter().any(|t| t.guards.is_empty()) {
            report.push(
                format!("{path}/state {state}"),
                "multiple outgoing transitions require guards on each",
            );
        }
    }
}

fn validate_ad(report: &mut ValidationReport, ad: &ActivityDiagram) {
    let path = format!("activity {}", ad.name);
    check_label(report, &path, &ad.name);

    let mut seen = BTreeSet::new();
    let mut initials = 0usize;
    let mut finals = 0usize;
    for n in &ad.nodes {
        if n.kind != NodeKind::Initial {
            check_label(report, &format!("{path}/{} {}", n.kind, n.id), &n.id);
        }
        if !seen.insert(&n.id) {
            report.push(&path, format!("duplicate declaration of node `{}`", n.id));
        }
        match n.kind {
            NodeKind::Initial => initials += 1,
            NodeKind::Final => finals += 1,
            _ => {}
        }
    }
    if initials != 1 {
        report.push(&path, format!("exactly one initial node required, found {initials}"));
    }
    if finals == 0 {
        report.push(&path, "at least one final node required");
    }

    let mut outgoing: BTreeMap<&str, Vec<&AdEdge>> = BTreeMap::new();
    let mut incoming: BTreeMap<&str, Vec<&AdEdge>> = BTreeMap::new();
    for (i, e) in ad.edges.iter().enumerate() {
        let epath = format!("{path}/edge#{i} {}->{}", e.source, e.target);
        for endpoint in [&e.source, &e.target] {
            if ad.node(endpoint).is_none() {
                report.push(&epath, format!("undeclared node `{endpoint}`"));
            }
        }
        check_guard_set(report, &epath, &e.guards);
        outgoing.entry(e.source.as_str()).or_default().push(e);
        incoming.entry(e.target.as_str()).or_default().push(e);
    }

    // Nodes on fork branches, and the join each fork closes at; used to
    // check join integrity below.
    let mut branch_nodes: BTreeSet<&str> = BTreeSet::new();
    let mut fork_joins: BTreeMap<&str, &str> = BTreeMap::new();

    for n in &ad.nodes {
        let outs = outgoing.get(n.id.as_str()).map(|v| v.as_slice()).unwrap_or(&[]);
        let npath = format!("{path}/{} {}", n.kind, n.id);
        match n.kind {
            NodeKind::Initial => {
                if outs.len() != 1 {
                    report.push(&npath, "initial node requires exactly one outgoing edge");
                }
                if incoming.contains_key(n.id.as_str()) {
                    report.push(&npath, "initial node must not have incoming edges");
                }
            }
            NodeKind::Final => {
                if !outs.is_empty() {
                    report.push(&npath, "final node must not have outgoing edges");
                }
            }
            NodeKind::Decision => {
                if outs.iter().any(|e| e.guards.is_empty()) {
                    report.push(&npath, "decision node edges must all carry guards");
                }
            }
            NodeKind::Fork => {
                if outs.len() < 2 {
                    report.push(&npath, "fork requires at least two outgoing edges");
                }
                validate_fork(report, ad, &npath, outs, &outgoing, &mut branch_nodes, &mut fork_joins, &n.id);
            }
            _ => {}
        }
        // Branching anywhere requires guards; otherwise a guardless diagram
        // could still have multiple paths.
        if n.kind != NodeKind::Decision
            && n.kind != NodeKind::Fork
            && outs.len() >= 2
            && outs.iter().any(|e| e.guards.is_empty())
        {
            report.push(&npath, "multiple outgoing edges require guards on each");
        }
    }

    // Joins exist only as the meeting point of one fork's branches.
    for n in ad.nodes.iter().filter(|n| n.kind == NodeKind::Join) {
        let npath = format!("{path}/join {}", n.id);
        if !fork_joins.values().any(|j| *j == n.id.as_str()) {
            report.push(&npath, "join is not reached by any fork");
        }
        for e in incoming.get(n.id.as_str()).map(|v| v.as_slice()).unwrap_or(&[]) {
            if !branch_nodes.contains(e.source.as_str()) {
                report.push(
                    &npath,
                    format!("edge from `{}` enters a join from outside its fork", e.source),
                );
            }
        }
    }

    // Decision/merge nodes must always dissolve into a real node: a cycle
    // made of them alone would never terminate.
    let dissolving: BTreeSet<&str> = ad
        .nodes
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Decision | NodeKind::Merge))
        .map(|n| n.id.as_str())
        .collect();
    for start in &dissolving {
        let mut stack = vec![(*start, 0usize)];
        while let Some((node, depth)) = stack.pop() {
            if depth > dissolving.len() {
                report.push(
                    format!("{path}/{start}"),
                    "cycle of decision/merge nodes never reaches an action",
                );
                break;
            }
            for e in outgoing.get(node).map(|v| v.as_slice()).unwrap_or(&[]) {
                if dissolving.contains(e.target.as_str()) {
                    stack.push((e.target.as_str(), depth + 1));
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn validate_fork<'a>(
    report: &mut ValidationReport,
    ad: &'a ActivityDiagram,
    path: &str,
    outs: &[&'a AdEdge],
    outgoing: &BTreeMap<&str, Vec<&'a AdEdge>>,
    branch_nodes: &mut BTreeSet<&'a str>,
    fork_joins: &mut BTreeMap<&'a str, &'a str>,
    fork: &'a str,
) {
    // Each branch must be a non-empty chain of action nodes with unguarded
    // edges, all meeting at one common join.
    let mut joins = BTreeSet::new();
    for e in outs {
        if !e.guards.is_empty() {
            report.push(path, "fork branch edges must be unguarded");
        }
        let mut current = e.target.as_str();
        let mut actions = 0usize;
        let mut steps = 0usize;
        loop {
            steps += 1;
            if steps > ad.nodes.len() + 1 {
                report.push(path, "fork branch does not reach a join");
                return;
            }
            match ad.node(current).map(|n| n.kind) {
                Some(NodeKind::Join) => {
                    if actions == 0 {
                        report.push(path, "fork branch must contain at least one action");
                    }
                    joins.insert(current);
                    break;
                }
                Some(NodeKind::Action) => {
                    actions += 1;
                    branch_nodes.insert(current);
                    let next = outgoing.get(current).map(|v| v.as_slice()).unwrap_or(&[]);
                    if next.len() != 1 {
                        report.push(
                            path,
                            format!("fork branch node `{current}` must have exactly one outgoing edge"),
                        );
                        return;
                    }
                    if !next[0].guards.is_empty() {
                        report.push(path, "fork branch edges must be unguarded");
                    }
                    current = next[0].target.as_str();
                }
                _ => {
                    report.push(
                        path,
                        format!("fork branch may contain only action nodes, found `{current}`"),
                    );
                    return;
                }
            }
        }
    }
    if joins.len() > 1 {
        report.push(path, format!("fork `{fork}` branches reach different joins"));
    } else if let Some(join) = joins.first() {
        fork_joins.insert(fork, join);
    }
}

/// Deduplicated union of the guard names of every present diagram, ordered
/// by first textual occurrence in the sequence diagram, then the state
/// machine, then the activity diagram.
pub fn collect_guards(bundle: &DiagramBundle) -> Vec<GuardName> {
    let mut out: Vec<GuardName> = Vec::new();
    let push = |g: &GuardName, out: &mut Vec<GuardName>| {
        if !out.contains(g) {
            out.push(g.clone());
        }
    };

    fn walk_sd(body: &[SdElement], push: &mut dyn FnMut(&GuardName)) {
        for el in body {
            match el {
                SdElement::Message(_) => {}
                SdElement::Alt(branches) => {
                    for (guards, inner) in branches {
                        for lit in guards {
                            push(&lit.guard);
                        }
                        walk_sd(inner, push);
                    }
                }
                SdElement::Opt(guards, inner) | SdElement::Loop(guards, inner) => {
                    for lit in guards {
                        push(&lit.guard);
                    }
                    walk_sd(inner, push);
                }
                SdElement::Par(operands) => {
                    for op in operands {
                        walk_sd(op, push);
                    }
                }
            }
        }
    }

    walk_sd(&bundle.sd.body, &mut |g| push(g, &mut out));
    if let Some(smd) = &bundle.smd {
        for t in &smd.transitions {
            for lit in &t.guards {
                push(&lit.guard, &mut out);
            }
        }
    }
    if let Some(ad) = &bundle.ad {
        for e in &ad.edges {
            for lit in &e.guards {
                push(&lit.guard, &mut out);
            }
        }
    }
    out
}
