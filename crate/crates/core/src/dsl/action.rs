//! Agent actions: `<build>`, `<add>` and `<propose>` tagged payloads.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::construct::ConstructionStmt;
use super::parse::{parse_predicate, parse_problem, parse_statements};
use super::predicate::Predicate;
use super::{ParseError, Problem};

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Build(Problem),
    Add(Vec<ConstructionStmt>),
    Propose(Predicate),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Build,
    Add,
    Propose,
}

impl ActionKind {
    pub fn tag(self) -> &'static str {
        match self {
            ActionKind::Build => "build",
            ActionKind::Add => "add",
            ActionKind::Propose => "propose",
        }
    }
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Build(_) => ActionKind::Build,
            Action::Add(_) => ActionKind::Add,
            Action::Propose(_) => ActionKind::Propose,
        }
    }

    /// Symmetry-normalized rendering used for repeat detection and history rows.
    pub fn canonical_form(&self) -> String {
        match self {
            Action::Build(p) => alloc::format!("build {p}"),
            Action::Add(stmts) => {
                let parts: Vec<String> = stmts.iter().map(|s| alloc::format!("{s}")).collect();
                alloc::format!("add {}", parts.join("; "))
            }
            Action::Propose(p) => alloc::format!("propose {}", p.canonical()),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Build(p) => write!(f, "<build> {p} </build>"),
            Action::Add(stmts) => {
                f.write_str("<add> ")?;
                for (i, s) in stmts.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str(" </add>")
            }
            Action::Propose(p) => write!(f, "<propose> {p} </propose>"),
        }
    }
}

/// Extracts the single tagged action from one turn's output.
pub fn parse_action(text: &str) -> Result<Action, ParseError> {
    let lower = text.to_lowercase();
    let mut found: Vec<(ActionKind, usize)> = Vec::new();
    for kind in [ActionKind::Build, ActionKind::Add, ActionKind::Propose] {
        let open = alloc::format!("<{}>", kind.tag());
        let mut from = 0;
        while let Some(i) = lower[from..].find(&open) {
            found.push((kind, from + i));
            from += i + open.len();
        }
    }
    match found.len() {
        0 => return Err(ParseError::MissingTag),
        1 => {}
        _ => return Err(ParseError::MultipleTags),
    }
    let (kind, start) = found[0];
    let open_len = kind.tag().len() + 2;
    let close = alloc::format!("</{}>", kind.tag());
    let body_start = start + open_len;
    let body_len = lower[body_start..].find(&close).ok_or_else(|| ParseError::Syntax {
        pos: lower.len(),
        expected: close.clone(),
        found: "end of input".into(),
    })?;
    let body = &lower[body_start..body_start + body_len];
    let shift = |e: ParseError| match e {
        ParseError::Syntax { pos, expected, found } => ParseError::Syntax { pos: pos + body_start, expected, found },
        ParseError::UndefinedPoint { name, pos } => ParseError::UndefinedPoint { name, pos: pos + body_start },
        ParseError::Arity { what, expected, found, pos } => {
            ParseError::Arity { what, expected, found, pos: pos + body_start }
        }
        ParseError::DuplicatePoint { name, pos } => ParseError::DuplicatePoint { name, pos: pos + body_start },
        other => other,
    };
    match kind {
        ActionKind::Build => parse_problem(body).map(Action::Build).map_err(shift),
        ActionKind::Add => parse_statements(body).map(Action::Add).map_err(shift),
        ActionKind::Propose => parse_predicate(body.trim()).map(Action::Propose).map_err(shift),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{Constructor, PredicateKind};

    #[test]
    fn add_tag() {
        match parse_action("<add> d = foot a b c </add>").unwrap() {
            Action::Add(stmts) => {
                assert_eq!(stmts.len(), 1);
                assert_eq!(stmts[0].constructor, Constructor::Foot);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn propose_tag() {
        let a = parse_action("<propose> eqangle a b a c d b d c </propose>").unwrap();
        assert_eq!(
            a,
            Action::Propose(Predicate::parse_unchecked(PredicateKind::EqAngle, &["a", "b", "a", "c", "d", "b", "d", "c"]))
        );
    }

    #[test]
    fn missing_and_multiple_tags() {
        assert_eq!(parse_action("no tag here"), Err(ParseError::MissingTag));
        assert_eq!(
            parse_action("<add> d = foot a b c </add> <propose> coll a b c </propose>"),
            Err(ParseError::MultipleTags)
        );
    }

    #[test]
    fn unclosed_tag_is_malformed() {
        assert!(matches!(parse_action("<propose> coll a b c"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn surrounding_text_is_ignored_and_display_round_trips() {
        let a = parse_action("I will add the foot.\n<ADD> D = foot A B C </ADD>").unwrap();
        assert_eq!(parse_action(&alloc::format!("{a}")).unwrap(), a);
    }
}
