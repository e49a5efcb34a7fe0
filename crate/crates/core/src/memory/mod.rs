//! History compression and the turn rejection gate.
//!
//! [`compress`] keeps one summary row per earlier turn (canonical action,
//! status and a one-line result) and the latest turn verbatim.
//! [`pass_check`] rejects a candidate turn before it reaches the engine.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dsl::{parse_action, ActionKind};
use crate::engine::{Feedback, Status};

/// One agent turn: free-form thinking, the raw action text and the
/// engine's answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub think: String,
    pub action: String,
    pub feedback: Feedback,
}

impl Turn {
    /// Canonical action form, or `None` when the action does not parse.
    pub fn canonical_action(&self) -> Option<String> {
        parse_action(&self.action).ok().map(|a| a.canonical_form())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub turn: usize,
    pub action: String,
    pub status: Status,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressedHistory {
    pub summary_rows: Vec<SummaryRow>,
    pub last_turn: Turn,
}

/// Placeholder action of a row whose turn did not parse.
pub const MALFORMED: &str = "(malformed)";

/// Summarizes every turn but the last, which is kept as is. `None` for an
/// empty history.
pub fn compress(history: &[Turn]) -> Option<CompressedHistory> {
    let (last, earlier) = history.split_last()?;
    let summary_rows = earlier
        .iter()
        .enumerate()
        .map(|(i, t)| SummaryRow {
            turn: i + 1,
            action: t.canonical_action().unwrap_or_else(|| MALFORMED.into()),
            status: t.feedback.status,
            result: t.feedback.key_result(),
        })
        .collect();
    Some(CompressedHistory { summary_rows, last_turn: last.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassCheckLimits {
    pub max_think_chars: usize,
    pub max_same_kind: usize,
}

impl Default for PassCheckLimits {
    fn default() -> Self {
        PassCheckLimits { max_think_chars: 32_768, max_same_kind: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Malformed,
    ThinkTooLong,
    RepeatedAction,
    KindStreak,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

/// Checks a candidate turn (thinking text and raw action) against the
/// history. Conditions are tested in order: malformed action, overlong
/// thinking, repeat of an earlier action, too long a run of one action kind.
pub fn pass_check(think: &str, action: &str, history: &[Turn], limits: &PassCheckLimits) -> Verdict {
    let Ok(a) = parse_action(action) else {
        return Verdict::Reject(RejectReason::Malformed);
    };
    if think.chars().count() > limits.max_think_chars {
        return Verdict::Reject(RejectReason::ThinkTooLong);
    }
    let canon = a.canonical_form();
    if history.iter().any(|t| t.canonical_action().as_deref() == Some(canon.as_str())) {
        return Verdict::Reject(RejectReason::RepeatedAction);
    }
    let kind = a.kind();
    let streak = history.iter().rev().take_while(|t| turn_kind(t) == Some(kind)).count();
    if streak >= limits.max_same_kind {
        return Verdict::Reject(RejectReason::KindStreak);
    }
    Verdict::Accept
}

fn turn_kind(t: &Turn) -> Option<ActionKind> {
    parse_action(&t.action).ok().map(|a| a.kind())
}
