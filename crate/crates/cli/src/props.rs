//! Property-file loading: one CTL formula or pattern line per line.
//!
//! ```text
//! # comment
//! AG (!(State = Bad--))
//! pattern absence after-q p='State = Bad--' q='CardOk = false'
//! ```

use std::path::Path;

use uml2ts_core::ctl::{instantiate_pattern, parse_ctl, Formula, PatternSpec};

pub fn load_props(path: &Path) -> Result<Vec<Formula>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let number = idx + 1;
        let formula = if let Some(rest) = line.strip_prefix("pattern ") {
            parse_pattern_line(rest).map_err(|e| format!("line {number}: {e}"))?
        } else {
            parse_ctl(line).map_err(|e| format!("line {number}: syntax error: {e}"))?
        };
        out.push(formula);
    }
    Ok(out)
}

/// `pattern <name> <scope> p='...' [q='...'] [r='...'] [s='...']`
/// (the leading `pattern ` keyword is already stripped).
fn parse_pattern_line(rest: &str) -> Result<Formula, String> {
    let mut tokens = split_quoted(rest)?;
    if tokens.len() < 2 {
        return Err("pattern line needs a pattern name and a scope".into());
    }
    let pattern = tokens.remove(0).parse().map_err(|e| format!("{e}"))?;
    let scope = tokens.remove(0).parse().map_err(|e| format!("{e}"))?;
    let mut p = None;
    let mut q = None;
    let mut r = None;
    let mut s = None;
    for token in tokens {
        let Some((key, value)) = token.split_once('=') else {
            return Err(format!("expected key='formula', found `{token}`"));
        };
        let formula = parse_ctl(value).map_err(|e| format!("in {key}: {e}"))?;
        match key {
            "p" | "P" => p = Some(formula),
            "q" | "Q" => q = Some(formula),
            "r" | "R" => r = Some(formula),
            "s" | "S" => s = Some(formula),
            other => return Err(format!("unknown pattern argument `{other}`")),
        }
    }
    let Some(p) = p else {
        return Err("pattern line needs p='...'".into());
    };
    instantiate_pattern(&PatternSpec {
        pattern,
        scope,
        p,
        q,
        r,
        s,
    })
    .map_err(|e| e.to_string())
}

/// Splits on whitespace, keeping single-quoted spans (quotes stripped)
/// attached to the token they follow.
fn split_quoted(text: &str) -> Result<Vec<String>, String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut in_quote = false;
    for c in text.chars() {
        match c {
            '\'' => in_quote = !in_quote,
            c if c.is_whitespace() && !in_quote => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c => current.push(c),
        }
    }
    if in_quote {
        return Err("unterminated quote".into());
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    Ok(tokens)
}
