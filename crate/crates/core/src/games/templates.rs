//! Versioned prompt templates.
//!
//! Each asset is a list of `[section]` headers followed by text. Placeholders
//! are `{NAME}`; a brace followed by anything else (JSON examples) is literal.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::config::{GameKind, PromptVersion};

macro_rules! assets {
    ($($v:literal),*) => {
        [$([
            include_str!(concat!("../../templates/", $v, "/guess_average.txt")),
            include_str!(concat!("../../templates/", $v, "/el_farol_bar.txt")),
            include_str!(concat!("../../templates/", $v, "/divide_dollar.txt")),
            include_str!(concat!("../../templates/", $v, "/public_goods.txt")),
            include_str!(concat!("../../templates/", $v, "/diners_dilemma.txt")),
            include_str!(concat!("../../templates/", $v, "/sealed_bid_auction.txt")),
            include_str!(concat!("../../templates/", $v, "/battle_royale.txt")),
            include_str!(concat!("../../templates/", $v, "/pirate_game.txt")),
        ]),*]
    };
}

static SOURCES: [[&str; 8]; 5] = assets!("v1", "v2", "v3", "v4", "v5");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    sections: BTreeMap<String, String>,
}

pub type Vars = Vec<(&'static str, String)>;

impl Template {
    pub fn parse(text: &str) -> Template {
        let mut sections = BTreeMap::new();
        let mut current: Option<String> = None;
        let mut body: Vec<&str> = Vec::new();
        let mut flush = |name: Option<String>, body: &mut Vec<&str>| {
            if let Some(name) = name {
                sections.insert(name, body.join("\n").trim_end().to_string());
            }
            body.clear();
        };
        for line in text.lines() {
            let t = line.trim();
            if t.starts_with('[') && t.ends_with(']') && t.len() > 2 && !t.contains(' ') {
                flush(current.take(), &mut body);
                current = Some(t[1..t.len() - 1].to_string());
            } else {
                body.push(line);
            }
        }
        flush(current, &mut body);
        Template { sections }
    }

    pub fn section_names(&self) -> impl Iterator<Item = &str> {
        self.sections.keys().map(String::as_str)
    }

    pub fn raw(&self, section: &str) -> &str {
        self.sections
            .get(section)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("template has no [{section}] section"))
    }

    /// Renders `section` with `vars` substituted.
    pub fn fill(&self, section: &str, vars: &[(&'static str, String)]) -> String {
        substitute(self.raw(section), vars)
    }
}

/// Replaces every `{NAME}` whose name appears in `vars`.
pub fn substitute(text: &str, vars: &[(&'static str, String)]) -> String {
    let mut out = String::with_capacity(text.len() + 64);
    let mut rest = text;
    while let Some(pos) = rest.find('{') {
        out.push_str(&rest[..pos]);
        let after = &rest[pos + 1..];
        let ident_len = after.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(after.len());
        let name = &after[..ident_len];
        let closes = after[ident_len..].starts_with('}');
        match vars.iter().find(|(k, _)| *k == name) {
            Some((_, value)) if closes && !name.is_empty() => {
                out.push_str(value);
                rest = &after[ident_len + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Placeholder names used in `text`.
pub fn placeholders(text: &str) -> Vec<&str> {
    let mut found = Vec::new();
    let mut rest = text;
    while let Some(pos) = rest.find('{') {
        let after = &rest[pos + 1..];
        let len = after.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(after.len());
        if len > 0 && after[len..].starts_with('}') {
            found.push(&after[..len]);
        }
        rest = after;
    }
    found
}

fn kind_index(kind: GameKind) -> usize {
    GameKind::ALL.iter().position(|k| *k == kind).expect("kind is listed in ALL")
}

pub fn template(kind: GameKind, version: PromptVersion) -> &'static Template {
    static CACHE: OnceLock<Vec<Vec<Template>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        SOURCES.iter().map(|games| games.iter().map(|t| Template::parse(t)).collect()).collect()
    });
    &cache[version.index()][kind_index(kind)]
}

/// Sections and placeholders each game's templates must use.
pub fn expected_shape(kind: GameKind) -> (&'static [&'static str], &'static [&'static str]) {
    match kind {
        GameKind::GuessAverage => (
            &["system", "result", "won", "lost", "request"],
            &["N", "K", "MIN", "MAX", "R", "I", "M", "T", "W"],
        ),
        GameKind::ElFarolBar => (
            &[
                "system",
                "result_head",
                "attendance_crowded",
                "attendance_ok",
                "fun_less",
                "fun_more",
                "echo_lead",
                "gain",
                "request",
            ],
            &["N", "K", "R", "MAX", "MIN", "HOME", "I", "GO", "STAY", "U"],
        ),
        GameKind::DivideDollar => (
            &["system", "result", "after_ok", "after_exceed", "request"],
            &["N", "K", "G", "I", "S", "B"],
        ),
        GameKind::PublicGoods => (
            &["system", "result", "after", "request"],
            &["N", "K", "R", "I", "CONTRIBUTIONS", "S", "GAIN", "BALANCE", "BALANCES", "LIMIT"],
        ),
        GameKind::DinersDilemma => (
            &["system", "result", "after", "request"],
            &["N", "K", "Ph", "Pl", "Uh", "Ul", "I", "NH", "NL", "S", "C", "U"],
        ),
        GameKind::SealedBidAuction => (
            &["system", "price_first", "price_second", "result", "after_won", "after_lost", "request"],
            &["N", "K", "PRICE_RULE", "I", "v", "W", "P", "U"],
        ),
        GameKind::BattleRoyale => (
            &["system", "result_head", "echo_lead", "intentional_miss", "hit", "missed", "remaining", "request"],
            &["N", "hit_rates", "ID", "HIT", "rank", "I", "ACTOR", "TARGET", "LEFT"],
        ),
        GameKind::PirateGame => (
            &[
                "system",
                "proposal_made",
                "vote_tally",
                "echo_lead",
                "rejected",
                "accepted",
                "request_head",
                "request_vote",
                "request_propose",
            ],
            &["N", "G", "rank", "PROPOSER", "PLAN", "A", "ALIVE", "g", "LAST", "PLAN_FORMAT"],
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_template_has_the_expected_shape() {
        for version in PromptVersion::ALL {
            for kind in GameKind::ALL {
                let t = template(kind, version);
                let (sections, vars) = expected_shape(kind);
                let mut names: Vec<&str> = t.section_names().collect();
                names.sort_unstable();
                let mut want = sections.to_vec();
                want.sort_unstable();
                assert_eq!(names, want, "{kind} {version}");
                for s in sections {
                    for p in placeholders(t.raw(s)) {
                        assert!(vars.contains(&p), "{kind} {version} [{s}] unknown placeholder {{{p}}}");
                    }
                }
            }
        }
    }

    #[test]
    fn substitution_leaves_json_braces() {
        let text = r#"{"chosen_number": "integer_between_{MIN}_and_{MAX}"} {X}"#;
        let out = substitute(text, &[("MIN", "0".into()), ("MAX", "100".into())]);
        assert_eq!(out, r#"{"chosen_number": "integer_between_0_and_100"} {X}"#);
    }

    #[test]
    fn guess_v1_request_ends_with_json_instruction() {
        let t = template(GameKind::GuessAverage, PromptVersion::V1);
        let req = t.raw("request");
        assert!(req.contains("Please provide your chosen number in the following JSON format:"));
        assert!(req.trim_end().ends_with(r#"{"chosen_number": "integer_between_{MIN}_and_{MAX}"}."#));
    }
}
