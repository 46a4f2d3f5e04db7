//! Independent oracles the production code is checked against.
//!
//! `oracle_sat` evaluates CTL by explicit forward path search, one start
//! state at a time: existential reachability is a visited-set DFS over the
//! actual paths, and "some path stays in a set forever" is a colored DFS
//! hunting for a lasso inside the set. A universal claim is decided by
//! searching for a violating path or lasso the same way. Nothing is shared
//! between start states and no backward fixpoint labeling is involved, which
//! keeps this evaluator structurally independent of the production checker.
//! `grid_stats` enumerates the full name×valuation grid and BFS reachability
//! without consulting `UnifiedTs::reachable_stats`.

use uml2ts_core::ctl::{AtomSubject, Formula};
use uml2ts_core::ts::{GuardValue, UnifiedTs};

/// Successor lists with the deadlock-self-loop totalization shared by the
/// checker's semantics.
pub fn totalized_succ(uts: &UnifiedTs) -> Vec<Vec<usize>> {
    (0..uts.states.len())
        .map(|i| {
            let mut s = uts.successors(i).to_vec();
            if s.is_empty() {
                s.push(i);
            }
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect()
}

pub fn oracle_holds(uts: &UnifiedTs, f: &Formula, state: usize) -> bool {
    oracle_sat(uts, f)[state]
}

pub fn oracle_sat(uts: &UnifiedTs, f: &Formula) -> Vec<bool> {
    let succ = totalized_succ(uts);
    sat(uts, &succ, f)
}

/// Some path from `start` passes only through `via` states and hits a
/// `target` state (the start itself counts when it is a target; `via` is not
/// required on the target). Fresh visited set per call.
fn reaches(succ: &[Vec<usize>], start: usize, via: &[bool], target: &[bool]) -> bool {
    if target[start] {
        return true;
    }
    let mut visited = vec![false; succ.len()];
    visited[start] = true;
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        if !via[x] {
            continue;
        }
        for &t in &succ[x] {
            if !visited[t] {
                if target[t] {
                    return true;
                }
                visited[t] = true;
                stack.push(t);
            }
        }
    }
    false
}

/// Some path from `start` stays inside `set` forever, i.e. `start` is in
/// `set` and reaches a cycle lying entirely inside it. Colored DFS, fresh
/// per call: a back edge onto the current path closes the lasso.
fn lasso_within(succ: &[Vec<usize>], start: usize, set: &[bool]) -> bool {
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    if !set[start] {
        return false;
    }
    let mut color = vec![WHITE; succ.len()];
    fn dfs(succ: &[Vec<usize>], set: &[bool], color: &mut [u8], x: usize) -> bool {
        color[x] = GRAY;
        for &t in &succ[x] {
            if !set[t] {
                continue;
            }
            match color[t] {
                GRAY => return true,
                WHITE => {
                    if dfs(succ, set, color, t) {
                        return true;
                    }
                }
                _ => {}
            }
        }
        color[x] = BLACK;
        false
    }
    dfs(succ, set, &mut color, start)
}

fn sat(uts: &UnifiedTs, succ: &[Vec<usize>], f: &Formula) -> Vec<bool> {
    let n = uts.states.len();
    let each = |decide: &dyn Fn(usize) -> bool| (0..n).map(decide).collect::<Vec<bool>>();
    let neg = |s: &[bool]| s.iter().map(|b| !b).collect::<Vec<bool>>();
    let conj = |a: &[bool], b: &[bool]| {
        a.iter().zip(b).map(|(x, y)| *x && *y).collect::<Vec<bool>>()
    };
    match f {
        Formula::True => vec![true; n],
        Formula::False => vec![false; n],
        Formula::Atom(a) => each(&|i| match &a.subject {
            AtomSubject::State => uts.render_state(i) == a.value,
            AtomSubject::Guard(name) => {
                let gi = uts.domain.index_of(name).expect("valid guard atom");
                let want = match a.value.as_str() {
                    "dc" => GuardValue::Dc,
                    "false" => GuardValue::False,
                    _ => GuardValue::True,
                };
                uts.state(i).gvs.get(gi) == want
            }
        }),
        Formula::Not(p) => neg(&sat(uts, succ, p)),
        Formula::And(a, b) => conj(&sat(uts, succ, a), &sat(uts, succ, b)),
        Formula::Or(a, b) => {
            let (sa, sb) = (sat(uts, succ, a), sat(uts, succ, b));
            each(&|i| sa[i] || sb[i])
        }
        Formula::Implies(a, b) => {
            let (sa, sb) = (sat(uts, succ, a), sat(uts, succ, b));
            each(&|i| !sa[i] || sb[i])
        }
        Formula::Ex(p) => {
            let sp = sat(uts, succ, p);
            each(&|i| succ[i].iter().any(|&t| sp[t]))
        }
        Formula::Ax(p) => {
            let sp = sat(uts, succ, p);
            each(&|i| succ[i].iter().all(|&t| sp[t]))
        }
        Formula::Ef(p) => {
            let sp = sat(uts, succ, p);
            let anywhere = vec![true; n];
            each(&|i| reaches(succ, i, &anywhere, &sp))
        }
        Formula::Ag(p) => {
            // violated exactly when some path reaches a !p state
            let np = neg(&sat(uts, succ, p));
            let anywhere = vec![true; n];
            each(&|i| !reaches(succ, i, &anywhere, &np))
        }
        Formula::Eg(p) => {
            let sp = sat(uts, succ, p);
            each(&|i| lasso_within(succ, i, &sp))
        }
        Formula::Af(p) => {
            // violated exactly when some path avoids p forever
            let np = neg(&sat(uts, succ, p));
            each(&|i| !lasso_within(succ, i, &np))
        }
        Formula::Eu(p, q) => {
            let sp = sat(uts, succ, p);
            let sq = sat(uts, succ, q);
            each(&|i| reaches(succ, i, &sp, &sq))
        }
        Formula::Au(p, q) => {
            // violated by a !q path hitting a (!p & !q) state, or by a path
            // avoiding q forever
            let sp = sat(uts, succ, p);
            let sq = sat(uts, succ, q);
            let nq = neg(&sq);
            let bad = conj(&neg(&sp), &nq);
            each(&|i| !(reaches(succ, i, &nq, &bad) || lasso_within(succ, i, &nq)))
        }
        Formula::Aw(p, q) => {
            // violated only by the finite bad prefix; holding p forever is fine
            let sp = sat(uts, succ, p);
            let sq = sat(uts, succ, q);
            let nq = neg(&sq);
            let bad = conj(&neg(&sp), &nq);
            each(&|i| !reaches(succ, i, &nq, &bad))
        }
        Formula::Ew(p, q) => {
            // a p-path to q, or a p-lasso
            let sp = sat(uts, succ, p);
            let sq = sat(uts, succ, q);
            each(&|i| reaches(succ, i, &sp, &sq) || lasso_within(succ, i, &sp))
        }
    }
}

/// Brute-force `(declared, reachable)`: enumerates every combination of a
/// rendered name with a full guard valuation, and BFS-walks the transition
/// list for reachability.
pub fn grid_stats(uts: &UnifiedTs) -> (usize, usize) {
    let mut names: Vec<String> = (0..uts.states.len())
        .map(|i| uts.render_state(i))
        .collect();
    names.sort();
    names.dedup();

    let values = [GuardValue::Dc, GuardValue::False, GuardValue::True];
    let guards = uts.domain.len();
    let mut declared = 0usize;
    let mut grid = vec![Vec::new()];
    for _ in 0..guards {
        let mut next = Vec::new();
        for row in &grid {
            for v in values {
                let mut row = row.clone();
                row.push(v);
                next.push(row);
            }
        }
        grid = next;
    }
    for _name in &names {
        for _valuation in &grid {
            declared += 1;
        }
    }

    let mut visited = vec![false; uts.states.len()];
    visited[uts.initial] = true;
    let mut queue = std::collections::VecDeque::from([uts.initial]);
    let mut reachable = 0usize;
    while let Some(s) = queue.pop_front() {
        reachable += 1;
        for &(src, dst) in &uts.transitions {
            if src == s && !visited[dst] {
                visited[dst] = true;
                queue.push_back(dst);
            }
        }
    }
    (declared, reachable)
}
