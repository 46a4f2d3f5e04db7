//! NuSMV source generation from a [`UnifiedTs`], plus a grammar checker for
//! the emitted subset.
//!
//! The model uses state variables only: `State` enumerates every distinct
//! rendered name in BFS order, and each guard gets its own variable over
//! `{dc, false, true}`. Everything starts at `Start-...` and `dc`. The
//! transition relation is an `ASSIGN`/`case` per variable: one arm per
//! source state, listing the target names as a set when the source branches
//! (a `case` picks its first matching arm, so per-transition arms with equal
//! conditions would silently drop the nondeterminism the unified system
//! carries). Guard arms mirror the `State` conditions and, at a branching
//! source, discriminate on `next(State)` and on the guards already chosen
//! before them: each joint successor is picked progressively, so every path
//! through the per-variable cases lands on exactly one real target even when
//! two successors share a rendered name and differ only in guard values. The
//! final `TRUE` arm holds the current value, totalizing exactly like the
//! checker's deadlock self-loops.
//!
//! Rendered names contain `-`; by default emitted identifiers replace it
//! with `_` (hyphenated enum literals would lex as subtraction). The
//! `paper_style` option keeps the raw hyphens.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::ctl::{render_ctl, AtomSubject, Formula};
use crate::ts::UnifiedTs;

#[derive(Debug, Clone, Copy, Default)]
pub struct EmitOptions {
    /// Emit hyphenated identifiers exactly as rendered instead of the
    /// default hyphen→underscore mapping.
    pub paper_style: bool,
}

fn map_ident(name: &str, opts: EmitOptions) -> String {
    if opts.paper_style {
        name.to_string()
    } else {
        name.replace('-', "_")
    }
}

/// Rewrites `State = <name>` atom values with the emission identifier
/// mapping so properties line up with the emitted enum literals.
fn map_formula(f: &Formula, opts: EmitOptions) -> Formula {
    match f {
        Formula::Atom(a) => match a.subject {
            AtomSubject::State => Formula::state(map_ident(&a.value, opts)),
            AtomSubject::Guard(_) => f.clone(),
        },
        Formula::True | Formula::False => f.clone(),
        Formula::Not(p) => Formula::Not(Box::new(map_formula(p, opts))),
        Formula::And(a, b) => Formula::and(map_formula(a, opts), map_formula(b, opts)),
        Formula::Or(a, b) => Formula::or(map_formula(a, opts), map_formula(b, opts)),
        Formula::Implies(a, b) => Formula::implies(map_formula(a, opts), map_formula(b, opts)),
        Formula::Ax(p) => Formula::Ax(Box::new(map_formula(p, opts))),
        Formula::Ex(p) => Formula::Ex(Box::new(map_formula(p, opts))),
        Formula::Af(p) => Formula::Af(Box::new(map_formula(p, opts))),
        Formula::Ef(p) => Formula::Ef(Box::new(map_formula(p, opts))),
        Formula::Ag(p) => Formula::Ag(Box::new(map_formula(p, opts))),
        Formula::Eg(p) => Formula::Eg(Box::new(map_formula(p, opts))),
        Formula::Au(p, q) => Formula::Au(Box::new(map_formula(p, opts)), Box::new(map_formula(q, opts))),
        Formula::Eu(p, q) => Formula::Eu(Box::new(map_formula(p, opts)), Box::new(map_formula(q, opts))),
        Formula::Aw(p, q) => Formula::Aw(Box::new(map_formula(p, opts)), Box::new(map_formula(q, opts))),
        Formula::Ew(p, q) => Formula::Ew(Box::new(map_formula(p, opts)), Box::new(map_formula(q, opts))),
    }
}

/// One `CTLSPEC` line with the same identifier mapping as [`emit_smv`].
pub fn emit_property(f: &Formula, opts: EmitOptions) -> String {
    format!("CTLSPEC {}", render_ctl(&map_formula(f, opts)))
}

/// Emits the complete `MODULE main` for the unified system plus one
/// `CTLSPEC` line per property. Deterministic: identical systems produce
/// byte-identical output.
pub fn emit_smv(uts: &UnifiedTs, props: &[Formula], opts: EmitOptions) -> String {
    let order = uts.bfs_order();
    let names = uts.bfs_names();
    let guard_count = uts.domain.len();

    let cond_of = |state: usize| -> String {
        let mut cond = format!("State={}", map_ident(&uts.render_state(state), opts));
        let gvs = &uts.state(state).gvs;
        for gi in 0..guard_count {
            let _ = write!(cond, " & {}={}", uts.domain.name(gi), gvs.get(gi));
        }
        cond
    };

    // Arms grouped by source; targets in deterministic order.
    struct Arm {
        source: usize,
        targets: Vec<usize>,
    }
    let arms: Vec<Arm> = order
        .iter()
        .filter(|&&s| !uts.successors(s).is_empty())
        .map(|&s| {
            let mut targets = uts.successors(s).to_vec();
            targets.sort_by_key(|t| {
                (
                    map_ident(&uts.render_state(*t), opts),
                    uts.state(*t).gvs.clone(),
                )
            });
            Arm { source: s, targets }
        })
        .collect();

    let mut out = String::new();
    out.push_str("MODULE main\n");
    out.push_str("VAR\n");
    let state_values: Vec<String> = names.iter().map(|n| map_ident(n, opts)).collect();
    let _ = writeln!(out, "    State : {{{}}};", state_values.join(", "));
    for gi in 0..guard_count {
        let _ = writeln!(out, "    {} : {{dc, false, true}};", uts.domain.name(gi));
    }
    out.push_str("ASSIGN\n");
    let _ = writeln!(
        out,
        "    init(State) := {};",
        map_ident(&uts.render_state(uts.initial), opts)
    );
    for gi in 0..guard_count {
        let _ = writeln!(out, "    init({}) := dc;", uts.domain.name(gi));
    }

    out.push_str("    next(State) := case\n");
    for arm in &arms {
        let mut names: Vec<String> = arm
            .targets
            .iter()
            .map(|t| map_ident(&uts.render_state(*t), opts))
            .collect();
        names.dedup();
        let result = if names.len() == 1 {
            names[0].clone()
        } else {
            format!("{{{}}}", names.join(", "))
        };
        let _ = writeln!(out, "        {} : {};", cond_of(arm.source), result);
    }
    out.push_str("        TRUE : State;\n");
    out.push_str("    esac;\n");

    for gi in 0..guard_count {
        let guard = uts.domain.name(gi);
        let _ = writeln!(out, "    next({guard}) := case");
        for arm in &arms {
            if arm.targets.len() == 1 {
                let value = uts.state(arm.targets[0]).gvs.get(gi);
                let _ = writeln!(out, "        {} : {};", cond_of(arm.source), value);
                continue;
            }
            // Discriminate on the chosen name and the guards already fixed
            // before this one, grouping targets by that prefix; the value
            // set per group keeps the joint choice exact.
            let mut groups: BTreeMap<Vec<String>, Vec<String>> = BTreeMap::new();
            for t in &arm.targets {
                let mut prefix = vec![map_ident(&uts.render_state(*t), opts)];
                for earlier in 0..gi {
                    prefix.push(uts.state(*t).gvs.get(earlier).to_string());
                }
                let value = uts.state(*t).gvs.get(gi).to_string();
                let entry = groups.entry(prefix).or_default();
                if !entry.contains(&value) {
                    entry.push(value);
                }
            }
            for (prefix, values) in groups {
                let mut cond = format!("{} & next(State)={}", cond_of(arm.source), prefix[0]);
                for (earlier, v) in prefix[1..].iter().enumerate() {
                    let _ = write!(cond, " & next({})={}", uts.domain.name(earlier), v);
                }
                let result = if values.len() == 1 {
                    values[0].clone()
                } else {
                    format!("{{{}}}", values.join(", "))
                };
                let _ = writeln!(out, "        {cond} : {result};");
            }
        }
        let _ = writeln!(out, "        TRUE : {guard};");
        out.push_str("    esac;\n");
    }

    for p in props {
        out.push_str(&emit_property(p, opts));
        out.push('\n');
    }
    out
}

/// Number of target entries across all `next(State)` arms; equals the
/// transition count whenever no two same-source transitions share a target
/// name, and in particular equals the arm count on deterministic systems.
pub fn state_case_target_entries(smv: &str) -> usize {
    let mut in_state_case = false;
    let mut count = 0;
    for line in smv.lines() {
        let line = line.trim();
        if line.starts_with("next(State) := case") {
            in_state_case = true;
            continue;
        }
        if in_state_case {
            if line.starts_with("esac") {
                break;
            }
            if line.starts_with("TRUE") {
                continue;
            }
            let result = line.split(" : ").nth(1).unwrap_or("");
            if result.starts_with('{') {
                count += result.matches(',').count() + 1;
            } else {
                count += 1;
            }
        }
    }
    count
}

/// Number of non-default arms in the `next(State)` case.
pub fn state_case_arm_count(smv: &str) -> usize {
    let mut in_state_case = false;
    let mut count = 0;
    for line in smv.lines() {
        let line = line.trim();
        if line.starts_with("next(State) := case") {
            in_state_case = true;
            continue;
        }
        if in_state_case {
            if line.starts_with("esac") {
                break;
            }
            if !line.starts_with("TRUE") {
                count += 1;
            }
        }
    }
    count
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("smv grammar: {message} (near token {near})")]
pub struct SmvError {
    pub message: String,
    pub near: String,
}

/// Checks emitted text against the grammar subset this crate produces:
/// `MODULE main`, a `VAR` block of enum declarations, an `ASSIGN` block of
/// `init`/`next` case statements, then `CTLSPEC` lines.
pub fn check_smv_grammar(text: &str) -> Result<(), SmvError> {
    let mut structural = String::new();
    for line in text.lines() {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix("CTLSPEC") {
            crate::ctl::parse_ctl(rest).map_err(|e| SmvError {
                message: format!("CTLSPEC formula does not parse: {e}"),
                near: rest.chars().take(40).collect(),
            })?;
        } else {
            structural.push_str(line);
            structural.push('\n');
        }
    }
    let tokens = smv_lex(&structural)?;
    SmvParser { tokens, pos: 0 }.file()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum STok {
    Ident(String),
    Colon,
    Semicolon,
    Assign,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Amp,
    Eq,
}

impl STok {
    fn show(&self) -> String {
        match self {
            STok::Ident(s) => s.clone(),
            STok::Colon => ":".into(),
            STok::Semicolon => ";".into(),
            STok::Assign => ":=".into(),
            STok::LBrace => "{".into(),
            STok::RBrace => "}".into(),
            STok::LParen => "(".into(),
            STok::RParen => ")".into(),
            STok::Comma => ",".into(),
            STok::Amp => "&".into(),
            STok::Eq => "=".into(),
        }
    }
}

fn smv_lex(text: &str) -> Result<Vec<STok>, SmvError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            ':' => {
                if chars.get(i + 1) == Some(&'=') {
                    out.push(STok::Assign);
                    i += 2;
                } else {
                    out.push(STok::Colon);
                    i += 1;
                }
            }
            ';' => {
                out.push(STok::Semicolon);
                i += 1;
            }
            '{' => {
                out.push(STok::LBrace);
                i += 1;
            }
            '}' => {
                out.push(STok::RBrace);
                i += 1;
            }
            '(' => {
                out.push(STok::LParen);
                i += 1;
            }
            ')' => {
                out.push(STok::RParen);
                i += 1;
            }
            ',' => {
                out.push(STok::Comma);
                i += 1;
            }
            '&' => {
                out.push(STok::Amp);
                i += 1;
            }
            '=' => {
                out.push(STok::Eq);
                i += 1;
            }
            c if c.is_ascii_alphanumeric() || c == '_' || c == '-' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric()
                        || chars[i] == '_'
                        || chars[i] == '-')
                {
                    i += 1;
                }
                out.push(STok::Ident(chars[start..i].iter().collect()));
            }
            other => {
                return Err(SmvError {
                    message: format!("unexpected character `{other}`"),
                    near: chars[i..(i + 20).min(chars.len())].iter().collect(),
                })
            }
        }
    }
    Ok(out)
}

struct SmvParser {
    tokens: Vec<STok>,
    pos: usize,
}

impl SmvParser {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, SmvError> {
        Err(SmvError {
            message: message.into(),
            near: self
                .tokens
                .get(self.pos)
                .map(|t| t.show())
                .unwrap_or_else(|| "<end>".into()),
        })
    }

    fn peek(&self) -> Option<&STok> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<STok> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: STok) -> Result<(), SmvError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected `{}`", want.show())),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), SmvError> {
        match self.bump() {
            Some(STok::Ident(w)) if w == word => Ok(()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected keyword `{word}`"))
            }
        }
    }

    fn ident(&mut self) -> Result<String, SmvError> {
        match self.bump() {
            Some(STok::Ident(w)) => Ok(w),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected an identifier")
            }
        }
    }

    fn file(&mut self) -> Result<(), SmvError> {
        self.keyword("MODULE")?;
        self.keyword("main")?;
        self.keyword("VAR")?;
        let mut vars = BTreeMap::new();
        while matches!(self.peek(), Some(STok::Ident(w)) if w != "ASSIGN") {
            let name = self.ident()?;
            self.expect(STok::Colon)?;
            self.expect(STok::LBrace)?;
            let mut values = Vec::new();
            loop {
                values.push(self.ident()?);
                match self.bump() {
                    Some(STok::Comma) => continue,
                    Some(STok::RBrace) => break,
                    _ => return self.err("expected `,` or `}` in enum"),
                }
            }
            self.expect(STok::Semicolon)?;
            vars.insert(name, values);
        }
        if vars.is_empty() {
            return self.err("VAR block declares no variables");
        }
        self.keyword("ASSIGN")?;
        let mut statements = 0;
        while let Some(STok::Ident(w)) = self.peek() {
            match w.as_str() {
                "init" => {
                    self.bump();
                    self.expect(STok::LParen)?;
                    self.ident()?;
                    self.expect(STok::RParen)?;
                    self.expect(STok::Assign)?;
                    self.ident()?;
                    self.expect(STok::Semicolon)?;
                }
                "next" => {
                    self.bump();
                    self.expect(STok::LParen)?;
                    self.ident()?;
                    self.expect(STok::RParen)?;
                    self.expect(STok::Assign)?;
                    self.keyword("case")?;
                    self.case_arms()?;
                    self.expect(STok::Semicolon)?;
                }
                other => return self.err(format!("unexpected `{other}` in ASSIGN block")),
            }
            statements += 1;
        }
        if statements == 0 {
            return self.err("ASSIGN block is empty");
        }
        if self.pos != self.tokens.len() {
            return self.err("trailing tokens after the module");
        }
        Ok(())
    }

    fn case_arms(&mut self) -> Result<(), SmvError> {
        let mut arms = 0;
        loop {
            match self.peek() {
                Some(STok::Ident(w)) if w == "esac" => {
                    self.bump();
                    break;
                }
                None => return self.err("unterminated case (missing esac)"),
                _ => {
                    self.cond()?;
                    self.expect(STok::Colon)?;
                    self.result()?;
                    self.expect(STok::Semicolon)?;
                    arms += 1;
                }
            }
        }
        if arms == 0 {
            return self.err("case with no arms");
        }
        Ok(())
    }

    fn cond(&mut self) -> Result<(), SmvError> {
        if matches!(self.peek(), Some(STok::Ident(w)) if w == "TRUE") {
            self.bump();
            return Ok(());
        }
        loop {
            self.test()?;
            if self.peek() == Some(&STok::Amp) {
                self.bump();
            } else {
                return Ok(());
            }
        }
    }

    fn test(&mut self) -> Result<(), SmvError> {
        let name = self.ident()?;
        if name == "next" {
            self.expect(STok::LParen)?;
            self.ident()?;
            self.expect(STok::RParen)?;
        }
        self.expect(STok::Eq)?;
        self.ident()?;
        Ok(())
    }

    fn result(&mut self) -> Result<(), SmvError> {
        match self.peek() {
            Some(STok::LBrace) => {
                self.bump();
                loop {
                    self.ident()?;
                    match self.bump() {
                        Some(STok::Comma) => continue,
                        Some(STok::RBrace) => return Ok(()),
                        _ => return self.err("expected `,` or `}` in result set"),
                    }
                }
            }
            _ => {
                self.ident()?;
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::GuardName;
    use crate::ts::{GuardDomain, Label, UnifiedState, Valuation};

    fn tiny_uts() -> UnifiedTs {
        let domain = GuardDomain::new(vec![
            GuardName::new("CardOk").unwrap(),
            GuardName::new("PinOk").unwrap(),
        ]);
        let dc = Valuation::all_dc(&domain);
        let s0 = UnifiedState {
            msg: Label::start(),
            st: Label::start(),
            act: Label::start(),
            gvs: dc.clone(),
        };
        let mut v_true = dc.clone();
        v_true = v_true.apply(&crate::ts::updates_by_name(&domain, &[("CardOk", true)]).unwrap());
        let s1 = UnifiedState {
            msg: Label::single("m1"),
            st: Label::single("a"),
            act: Label::single("b"),
            gvs: v_true,
        };
        UnifiedTs::new(domain, vec![s0, s1], vec![(0, 1)], 0)
    }

    #[test]
    fn init_lines_cover_every_guard() {
        let smv = emit_smv(&tiny_uts(), &[], EmitOptions::default());
        assert!(smv.contains("init(CardOk) := dc;"));
        assert!(smv.contains("init(PinOk) := dc;"));
        assert!(smv.contains("init(State) := Start_Start_Start;"));
    }

    #[test]
    fn hyphens_map_to_underscores_by_default() {
        let smv = emit_smv(&tiny_uts(), &[], EmitOptions::default());
        assert!(smv.contains("State=Start_Start_Start & CardOk=dc & PinOk=dc : m1_a_b;"));
        let paper = emit_smv(&tiny_uts(), &[], EmitOptions { paper_style: true });
        assert!(paper.contains("State=Start-Start-Start & CardOk=dc & PinOk=dc : m1-a-b;"));
    }

    #[test]
    fn degenerate_single_state_model() {
        let domain = GuardDomain::empty();
        let s0 = UnifiedState {
            msg: Label::start(),
            st: Label::start(),
            act: Label::start(),
            gvs: Valuation::all_dc(&domain),
        };
        let uts = UnifiedTs::new(domain, vec![s0], vec![], 0);
        let smv = emit_smv(&uts, &[], EmitOptions::default());
        assert!(smv.contains("State : {Start_Start_Start};"));
        assert!(smv.contains("TRUE : State;"));
        check_smv_grammar(&smv).unwrap();
    }

    #[test]
    fn emitted_text_passes_grammar_check() {
        let smv = emit_smv(&tiny_uts(), &[], EmitOptions::default());
        check_smv_grammar(&smv).unwrap();
    }

    #[test]
    fn property_lines_share_the_ident_mapping() {
        let f = Formula::ag(Formula::not(Formula::state("m1-a-b")));
        let line = emit_property(&f, EmitOptions::default());
        assert_eq!(line, "CTLSPEC AG (!(State = m1_a_b))");
        let paper = emit_property(&f, EmitOptions { paper_style: true });
        assert_eq!(paper, "CTLSPEC AG (!(State = m1-a-b))");
    }

    #[test]
    fn card_validation_property_maps_under_default_style() {
        let f = Formula::ag(Formula::implies(
            Formula::or(
                Formula::guard("CardOk", "false"),
                Formula::guard("PinOk", "false"),
            ),
            Formula::ag(Formula::not(Formula::state(
                "WaitAccount-CardValidandPinValid-InitiateTransaction",
            ))),
        ));
        assert_eq!(
            emit_property(&f, EmitOptions::default()),
            "CTLSPEC AG ((CardOk = false | PinOk = false) -> AG (!(State = WaitAccount_CardValidandPinValid_InitiateTransaction)))"
        );
    }

    #[test]
    fn emission_is_deterministic() {
        let a = emit_smv(&tiny_uts(), &[], EmitOptions::default());
        let b = emit_smv(&tiny_uts(), &[], EmitOptions::default());
        assert_eq!(a, b);
    }

    #[test]
    fn branching_source_emits_a_target_set() {
        let domain = GuardDomain::new(vec![GuardName::new("g").unwrap()]);
        let dc = Valuation::all_dc(&domain);
        let tv = dc.apply(&crate::ts::updates_by_name(&domain, &[("g", true)]).unwrap());
        let fv = dc.apply(&crate::ts::updates_by_name(&domain, &[("g", false)]).unwrap());
        let mk = |name: &str, gvs: &Valuation| UnifiedState {
            msg: Label::single(name.to_string()),
            st: Label::placeholder(),
            act: Label::placeholder(),
            gvs: gvs.clone(),
        };
        let uts = UnifiedTs::new(
            domain,
            vec![mk("Start", &dc), mk("yes", &tv), mk("no", &fv)],
            vec![(0, 1), (0, 2)],
            0,
        );
        let smv = emit_smv(&uts, &[], EmitOptions::default());
        assert!(smv.contains("State=Start__ & g=dc : {no__, yes__};"), "{smv}");
        // guard arms discriminate on the chosen successor
        assert!(smv.contains("& next(State)=yes__ : true;"), "{smv}");
        assert!(smv.contains("& next(State)=no__ : false;"), "{smv}");
        check_smv_grammar(&smv).unwrap();
        assert_eq!(state_case_target_entries(&smv), 2);
        assert_eq!(state_case_arm_count(&smv), 1);
    }
}
