//! Activity diagram → component transition system.
//!
//! Action nodes become states; the initial node becomes `Start` and final
//! nodes become `End`. Decision and merge nodes are dissolved: their guarded
//! edges turn into guard-updating transitions between the neighboring real
//! nodes. Fork branches advance in lockstep with `and`-joined labels,
//! shorter branches padding with their final action.

use std::collections::{BTreeMap, VecDeque};

use super::{literal_updates, TsBuilder};
use crate::diagram::{ActivityDiagram, GuardName, NodeKind};
use crate::ts::{ComponentTs, DiagramKind, Label, Updates};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Config {
    Node(String),
    InFork { fork: String, step: usize },
}

struct ForkInfo {
    branches: Vec<Vec<String>>,
    join: String,
}

pub fn ad_to_ts(ad: &ActivityDiagram, guards: &[GuardName]) -> ComponentTs {
    let domain = super::guard_domain(guards);
    let mut b = TsBuilder::new(DiagramKind::Ad, domain.clone());
    let forks = fork_info(ad);

    let mut queue: VecDeque<(Config, usize)> = VecDeque::new();
    for (target, updates) in dissolve_from(ad, &domain, "initial") {
        if let Some(item) = emit_entry(ad, &forks, &mut b, 0, &target, &updates) {
            queue.push_back(item);
        }
    }
    while let Some((config, id)) = queue.pop_front() {
        match &config {
            Config::Node(node) => {
                for (target, updates) in dissolve_from(ad, &domain, node) {
                    if let Some(item) = emit_entry(ad, &forks, &mut b, id, &target, &updates) {
                        queue.push_back(item);
                    }
                }
            }
            Config::InFork { fork, step } => {
                let info = &forks[fork];
                let len = info.branches.iter().map(|c| c.len()).max().unwrap();
                if step + 1 < len {
                    let label = lockstep_label(info, step + 1);
                    let (id2, fresh) = b.edge(id, label, &Updates::empty());
                    if fresh {
                        queue.push_back((
                            Config::InFork {
                                fork: fork.clone(),
                                step: step + 1,
                            },
                            id2,
                        ));
                    }
                } else {
                    for (target, updates) in dissolve_from(ad, &domain, &info.join) {
                        if let Some(item) = emit_entry(ad, &forks, &mut b, id, &target, &updates) {
                            queue.push_back(item);
                        }
                    }
                }
            }
        }
    }
    b.finish()
}

fn lockstep_label(info: &ForkInfo, step: usize) -> Label {
    Label::and_join(
        info.branches
            .iter()
            .map(|chain| chain[step.min(chain.len() - 1)].clone())
            .collect(),
    )
}

fn emit_entry(
    ad: &ActivityDiagram,
    forks: &BTreeMap<String, ForkInfo>,
    b: &mut TsBuilder,
    from: usize,
    target: &str,
    updates: &Updates,
) -> Option<(Config, usize)> {
    match ad.node(target).map(|n| n.kind) {
        Some(NodeKind::Action) => {
            let (id, fresh) = b.edge(from, Label::single(target.to_string()), updates);
            fresh.then(|| (Config::Node(target.to_string()), id))
        }
        Some(NodeKind::Final) => {
            b.edge(from, Label::end(), updates);
            None
        }
        Some(NodeKind::Fork) => {
            let info = &forks[target];
            let (id, fresh) = b.edge(from, lockstep_label(info, 0), updates);
            fresh.then(|| {
                (
                    Config::InFork {
                        fork: target.to_string(),
                        step: 0,
                    },
                    id,
                )
            })
        }
        other => panic!("validated activity diagrams never step onto {other:?}"),
    }
}

/// Walks edges out of `node`, dissolving decision and merge nodes while
/// accumulating their guard updates, until hitting real nodes (action,
/// fork, final).
fn dissolve_from(
    ad: &ActivityDiagram,
    domain: &crate::ts::GuardDomain,
    node: &str,
) -> Vec<(String, Updates)> {
    fn walk(
        ad: &ActivityDiagram,
        domain: &crate::ts::GuardDomain,
        node: &str,
        acc: &Updates,
        depth: usize,
        out: &mut Vec<(String, Updates)>,
    ) {
        assert!(depth <= ad.nodes.len(), "decision/merge cycle in validated diagram");
        for e in ad.outgoing(node) {
            let acc2 = acc.overlay(&literal_updates(domain, &e.guards));
            match ad.node(&e.target).map(|n| n.kind) {
                Some(NodeKind::Decision) | Some(NodeKind::Merge) => {
                    walk(ad, domain, &e.target, &acc2, depth + 1, out);
                }
                _ => out.push((e.target.clone(), acc2)),
            }
        }
    }
    let mut out = Vec::new();
    walk(ad, domain, node, &Updates::empty(), 0, &mut out);
    out
}

fn fork_info(ad: &ActivityDiagram) -> BTreeMap<String, ForkInfo> {
    let mut map = BTreeMap::new();
    for n in ad.nodes.iter().filter(|n| n.kind == NodeKind::Fork) {
        let mut branches = Vec::new();
        let mut join = String::new();
        for e in ad.outgoing(&n.id) {
            let mut chain = Vec::new();
            let mut current = e.target.clone();
            loop {
                match ad.node(&current).map(|x| x.kind) {
                    Some(NodeKind::Join) => {
                        join = current;
                        break;
                    }
                    Some(NodeKind::Action) => {
                        chain.push(current.clone());
                        let next: Vec<_> = ad.outgoing(&current).collect();
                        current = next[0].target.clone();
                    }
                    other => panic!("validated fork branch node has kind {other:?}"),
                }
            }
            branches.push(chain);
        }
        map.insert(n.id.clone(), ForkInfo { branches, join });
    }
    map
}
