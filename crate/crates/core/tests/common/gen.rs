//! Seeded random generators for bundles, unified systems and formulas.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uml2ts_core::ctl::Formula;
use uml2ts_core::diagram::{
    ActivityDiagram, AdEdge, AdNode, DiagramBundle, GuardLiteral, GuardName, Message, NodeKind,
    Region, SdElement, SequenceDiagram, SmTransition, StateMachineDiagram,
};
use uml2ts_core::ts::{GuardDomain, Label, UnifiedState, UnifiedTs, Valuation};
use uml2ts_core::ubd::Diagram;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn g(name: &str) -> GuardName {
    GuardName::new(name).unwrap()
}

fn lit(rng: &mut impl Rng, guards: &[GuardName]) -> GuardLiteral {
    let guard = guards[rng.random_range(0..guards.len())].clone();
    GuardLiteral {
        guard,
        polarity: rng.random_bool(0.5),
    }
}

pub fn random_bundle(rng: &mut impl Rng, guardless: bool) -> DiagramBundle {
    let guard_count = if guardless { 0 } else { rng.random_range(0..=2) };
    let guards: Vec<GuardName> = (0..guard_count).map(|i| g(&format!("g{i}"))).collect();
    let sd = random_sd(rng, &guards);
    let (with_smd, with_ad) = match rng.random_range(0..3) {
        0 => (true, false),
        1 => (false, true),
        _ => (true, true),
    };
    DiagramBundle {
        sd,
        smd: with_smd.then(|| random_smd(rng, &guards)),
        ad: with_ad.then(|| random_ad(rng, &guards)),
    }
}

pub fn random_sd(rng: &mut impl Rng, guards: &[GuardName]) -> SequenceDiagram {
    let mut counter = 0usize;
    let count = rng.random_range(1..=4);
    let body = (0..count)
        .map(|_| random_element(rng, guards, &mut counter, 0))
        .collect();
    SequenceDiagram {
        name: "Gen".into(),
        lifelines: vec!["A".into(), "B".into()],
        body,
    }
}

fn message(counter: &mut usize) -> SdElement {
    let name = format!("m{counter}");
    *counter += 1;
    SdElement::Message(Message {
        name,
        from: "A".into(),
        to: "B".into(),
    })
}

fn random_element(
    rng: &mut impl Rng,
    guards: &[GuardName],
    counter: &mut usize,
    depth: usize,
) -> SdElement {
    let fragments_allowed = !guards.is_empty() && depth < 2;
    let pick = if fragments_allowed {
        rng.random_range(0..10)
    } else {
        rng.random_range(0..10).min(4) // messages and par only
    };
    match pick {
        0..=3 => message(counter),
        4 => {
            let operands = (0..2)
                .map(|_| {
                    (0..rng.random_range(1..=2))
                        .map(|_| message(counter))
                        .collect()
                })
                .collect();
            SdElement::Par(operands)
        }
        5 | 6 => {
            let guard = guards[rng.random_range(0..guards.len())].clone();
            let branches = vec![
                (
                    vec![GuardLiteral::pos(guard.clone())],
                    random_body(rng, guards, counter, depth + 1),
                ),
                (
                    vec![GuardLiteral::neg(guard)],
                    random_body(rng, guards, counter, depth + 1),
                ),
            ];
            SdElement::Alt(branches)
        }
        7 | 8 => SdElement::Opt(
            vec![lit(rng, guards)],
            random_body(rng, guards, counter, depth + 1),
        ),
        _ => SdElement::Loop(
            vec![lit(rng, guards)],
            random_body(rng, guards, counter, depth + 1),
        ),
    }
}

fn random_body(
    rng: &mut impl Rng,
    guards: &[GuardName],
    counter: &mut usize,
    depth: usize,
) -> Vec<SdElement> {
    (0..rng.random_range(1..=2))
        .map(|_| random_element(rng, guards, counter, depth))
        .collect()
}

pub fn random_smd(rng: &mut impl Rng, guards: &[GuardName]) -> StateMachineDiagram {
    let spine = rng.random_range(1..=3);
    let mut states: Vec<String> = (0..spine).map(|i| format!("t{i}")).collect();
    let mut transitions: Vec<SmTransition> = (0..spine - 1)
        .map(|i| SmTransition {
            source: format!("t{i}"),
            target: format!("t{}", i + 1),
            event: rng.random_bool(0.3).then(|| format!("ev{i}")),
            guards: vec![],
        })
        .collect();
    let mut regions = Vec::new();
    let last = format!("t{}", spine - 1);

    match rng.random_range(0..4) {
        0 if !guards.is_empty() => {
            // guarded split re-joining on a common state
            let guard = guards[rng.random_range(0..guards.len())].clone();
            states.extend(["u0".into(), "u1".into(), "w".into()]);
            transitions.push(SmTransition {
                source: last.clone(),
                target: "u0".into(),
                event: None,
                guards: vec![GuardLiteral::pos(guard.clone())],
            });
            transitions.push(SmTransition {
                source: last,
                target: "u1".into(),
                event: None,
                guards: vec![GuardLiteral::neg(guard)],
            });
            transitions.push(SmTransition {
                source: "u0".into(),
                target: "w".into(),
                event: None,
                guards: vec![],
            });
            transitions.push(SmTransition {
                source: "u1".into(),
                target: "w".into(),
                event: None,
                guards: vec![],
            });
        }
        1 => {
            // parallel pair entered from the spine, exiting to a flat state
            regions.push(Region {
                name: "R0".into(),
                states: vec!["p0".into()],
                initial: "p0".into(),
            });
            regions.push(Region {
                name: "R1".into(),
                states: vec!["p1".into()],
                initial: "p1".into(),
            });
            states.push("w".into());
            transitions.push(SmTransition {
                source: last,
                target: "p0".into(),
                event: None,
                guards: vec![],
            });
            transitions.push(SmTransition {
                source: "p0".into(),
                target: "w".into(),
                event: None,
                guards: vec![],
            });
        }
        2 => {
            // cycle back to the start of the spine
            transitions.push(SmTransition {
                source: last,
                target: "t0".into(),
                event: None,
                guards: vec![],
            });
        }
        _ => {}
    }

    StateMachineDiagram {
        name: "GenSm".into(),
        states,
        initial: "t0".into(),
        regions,
        transitions,
    }
}

pub fn random_ad(rng: &mut impl Rng, guards: &[GuardName]) -> ActivityDiagram {
    let mut nodes = vec![AdNode {
        id: "initial".into(),
        kind: NodeKind::Initial,
    }];
    let mut edges = Vec::new();
    let mut previous = "initial".to_string();
    let mut counter = 0usize;
    let action = |nodes: &mut Vec<AdNode>, counter: &mut usize| {
        let id = format!("a{counter}");
        *counter += 1;
        nodes.push(AdNode {
            id: id.clone(),
            kind: NodeKind::Action,
        });
        id
    };

    for _ in 0..rng.random_range(1..=2) {
        let a = action(&mut nodes, &mut counter);
        edges.push(AdEdge {
            source: previous,
            target: a.clone(),
            guards: vec![],
        });
        previous = a;
    }

    match rng.random_range(0..3) {
        0 if !guards.is_empty() => {
            let guard = guards[rng.random_range(0..guards.len())].clone();
            nodes.push(AdNode { id: "d0".into(), kind: NodeKind::Decision });
            nodes.push(AdNode { id: "mg".into(), kind: NodeKind::Merge });
            let yes = action(&mut nodes, &mut counter);
            let no = action(&mut nodes, &mut counter);
            edges.push(AdEdge { source: previous, target: "d0".into(), guards: vec![] });
            edges.push(AdEdge {
                source: "d0".into(),
                target: yes.clone(),
                guards: vec![GuardLiteral::pos(guard.clone())],
            });
            edges.push(AdEdge {
                source: "d0".into(),
                target: no.clone(),
                guards: vec![GuardLiteral::neg(guard)],
            });
            edges.push(AdEdge { source: yes, target: "mg".into(), guards: vec![] });
            edges.push(AdEdge { source: no, target: "mg".into(), guards: vec![] });
            previous = "mg".into();
        }
        1 => {
            nodes.push(AdNode { id: "fk".into(), kind: NodeKind::Fork });
            nodes.push(AdNode { id: "jn".into(), kind: NodeKind::Join });
            let x = action(&mut nodes, &mut counter);
            let y = action(&mut nodes, &mut counter);
            edges.push(AdEdge { source: previous, target: "fk".into(), guards: vec![] });
            edges.push(AdEdge { source: "fk".into(), target: x.clone(), guards: vec![] });
            edges.push(AdEdge { source: "fk".into(), target: y.clone(), guards: vec![] });
            edges.push(AdEdge { source: x, target: "jn".into(), guards: vec![] });
            edges.push(AdEdge { source: y, target: "jn".into(), guards: vec![] });
            previous = "jn".into();
        }
        _ => {}
    }

    nodes.push(AdNode { id: "fin".into(), kind: NodeKind::Final });
    edges.push(AdEdge {
        source: previous,
        target: "fin".into(),
        guards: vec![],
    });
    ActivityDiagram {
        name: "GenAct".into(),
        nodes,
        edges,
    }
}

/// One random diagram of a random kind, for serializer round-trips.
pub fn random_diagram(rng: &mut impl Rng) -> Diagram {
    let guard_count = rng.random_range(0..=2);
    let guards: Vec<GuardName> = (0..guard_count).map(|i| g(&format!("g{i}"))).collect();
    match rng.random_range(0..3) {
        0 => Diagram::Sequence(random_sd(rng, &guards)),
        1 => Diagram::StateMachine(random_smd(rng, &guards)),
        _ => Diagram::Activity(random_ad(rng, &guards)),
    }
}

/// Arbitrary small unified system: every state reachable from 0, arbitrary
/// guard valuations, occasional shared names and deadlock states.
pub fn random_uts(rng: &mut impl Rng) -> UnifiedTs {
    use uml2ts_core::ts::GuardValue;
    let n = rng.random_range(2..=12);
    let guard_count = rng.random_range(0..=2);
    let domain = GuardDomain::new((0..guard_count).map(|i| g(&format!("g{i}"))).collect());
    let pool_size = std::cmp::max(2, n - rng.random_range(0..=2));
    let values = [GuardValue::Dc, GuardValue::False, GuardValue::True];

    let states: Vec<UnifiedState> = (0..n)
        .map(|i| {
            let name = format!("s{}", rng.random_range(0..pool_size));
            let mut gvs = Valuation::all_dc(&domain);
            for gi in 0..guard_count {
                let v = values[rng.random_range(0..3)];
                // build by overwriting from dc, one guard at a time
                gvs = match v {
                    GuardValue::Dc => gvs,
                    GuardValue::False => {
                        gvs.apply(&uml2ts_core::ts::updates_by_name(&domain, &[(&format!("g{gi}"), false)]).unwrap())
                    }
                    GuardValue::True => {
                        gvs.apply(&uml2ts_core::ts::updates_by_name(&domain, &[(&format!("g{gi}"), true)]).unwrap())
                    }
                };
            }
            let _ = i;
            UnifiedState {
                msg: Label::single(name),
                st: Label::placeholder(),
                act: Label::placeholder(),
                gvs,
            }
        })
        .collect();

    let mut transitions: Vec<(usize, usize)> = (1..n)
        .map(|i| (rng.random_range(0..i), i))
        .collect();
    for _ in 0..rng.random_range(0..=n) {
        transitions.push((rng.random_range(0..n), rng.random_range(0..n)));
    }
    UnifiedTs::new(domain, states, transitions, 0)
}

/// Random formula over the system's actual names and guards, to the given
/// operator depth.
pub fn random_formula(rng: &mut impl Rng, uts: &UnifiedTs, depth: usize) -> Formula {
    if depth == 0 {
        return match rng.random_range(0..8) {
            0 => Formula::True,
            1 => Formula::False,
            x if x < 6 || uts.domain.is_empty() => {
                let i = rng.random_range(0..uts.states.len());
                Formula::state(uts.render_state(i))
            }
            _ => {
                let gi = rng.random_range(0..uts.domain.len());
                let value = ["dc", "false", "true"][rng.random_range(0..3)];
                Formula::guard(uts.domain.name(gi).as_str(), value)
            }
        };
    }
    let pick = rng.random_range(0..14);
    let mut sub = || Box::new(random_formula(rng, uts, depth - 1));
    match pick {
        0 => Formula::Not(sub()),
        1 => Formula::And(sub(), sub()),
        2 => Formula::Or(sub(), sub()),
        3 => Formula::Implies(sub(), sub()),
        4 => Formula::Ax(sub()),
        5 => Formula::Ex(sub()),
        6 => Formula::Af(sub()),
        7 => Formula::Ef(sub()),
        8 => Formula::Ag(sub()),
        9 => Formula::Eg(sub()),
        10 => Formula::Au(sub(), sub()),
        11 => Formula::Eu(sub(), sub()),
        12 => Formula::Aw(sub(), sub()),
        _ => Formula::Ew(sub(), sub()),
    }
}
