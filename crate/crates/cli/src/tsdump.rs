//! Reader for the transition-system dump format `build` writes, so `emit`
//! can run from a saved dump instead of the original diagrams.

use std::collections::BTreeMap;

use uml2ts_core::diagram::GuardName;
use uml2ts_core::ts::{updates_by_name, GuardDomain, Label, UnifiedState, Valuation};
use uml2ts_core::UnifiedTs;

pub fn parse_dump(text: &str) -> Result<UnifiedTs, String> {
    let mut state_keys: Vec<String> = Vec::new();
    let mut transition_lines: Vec<(String, String)> = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once(" -> ") {
            Some((src, dst)) => transition_lines.push((src.to_string(), dst.to_string())),
            None => state_keys.push(line.to_string()),
        }
    }
    if state_keys.is_empty() {
        return Err("dump contains no states".into());
    }

    // the guard list comes from the first state line carrying valuations
    let guard_names: Vec<GuardName> = match state_keys[0].split_once(" | ") {
        Some((_, gvs)) => gvs
            .split_whitespace()
            .map(|part| {
                let (name, _) = part
                    .split_once('=')
                    .ok_or_else(|| format!("malformed guard assignment `{part}`"))?;
                GuardName::new(name).map_err(|e| e.to_string())
            })
            .collect::<Result<_, String>>()?,
        None => Vec::new(),
    };
    let domain = GuardDomain::new(guard_names);

    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut states: Vec<UnifiedState> = Vec::new();
    for key in &state_keys {
        let (name, valuation) = parse_state_key(&domain, key)?;
        index.insert(key.clone(), states.len());
        states.push(unified_state(name, valuation)?);
    }

    let mut transitions = Vec::new();
    for (src, dst) in &transition_lines {
        let s = *index
            .get(src)
            .ok_or_else(|| format!("transition references unknown state `{src}`"))?;
        let d = *index
            .get(dst)
            .ok_or_else(|| format!("transition references unknown state `{dst}`"))?;
        transitions.push((s, d));
    }

    let initial = states
        .iter()
        .position(|s| {
            s.gvs.is_all_dc()
                && [&s.msg, &s.st, &s.act]
                    .iter()
                    .all(|l| l.is_placeholder() || l.render() == "Start")
        })
        .ok_or("dump has no all-dc Start state")?;
    Ok(UnifiedTs::new(domain, states, transitions, initial))
}

fn parse_state_key(
    domain: &std::sync::Arc<GuardDomain>,
    key: &str,
) -> Result<(String, Valuation), String> {
    let (name, gvs_text) = match key.split_once(" | ") {
        Some((n, g)) => (n, Some(g)),
        None => (key, None),
    };
    let mut valuation = Valuation::all_dc(domain);
    if let Some(gvs_text) = gvs_text {
        let mut updates = Vec::new();
        for part in gvs_text.split_whitespace() {
            let (g, v) = part
                .split_once('=')
                .ok_or_else(|| format!("malformed guard assignment `{part}`"))?;
            match v {
                "dc" => {}
                "true" => updates.push((g, true)),
                "false" => updates.push((g, false)),
                other => return Err(format!("bad guard value `{other}`")),
            }
        }
        valuation =
            valuation.apply(&updates_by_name(domain, &updates).map_err(|e| e.to_string())?);
    }
    Ok((name.to_string(), valuation))
}

/// Splits `msg-st-act` back into the three slot labels; an empty slot is the
/// placeholder, and multi-part labels keep their `and`-joined rendering as a
/// single part (the distinction is irrelevant for emission).
fn unified_state(name: String, gvs: Valuation) -> Result<UnifiedState, String> {
    let slots: Vec<&str> = name.split('-').collect();
    if slots.len() != 3 {
        return Err(format!("state name `{name}` does not have three slots"));
    }
    let label = |s: &str| {
        if s.is_empty() {
            Label::placeholder()
        } else {
            Label::single(s.to_string())
        }
    };
    Ok(UnifiedState {
        msg: label(slots[0]),
        st: label(slots[1]),
        act: label(slots[2]),
        gvs,
    })
}
