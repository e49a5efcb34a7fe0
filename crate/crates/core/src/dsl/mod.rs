//! The geometry construction language.
//!
//! ```text
//! problem := stmt (';' stmt)* '?' goal (';' goal)*
//! stmt    := '!'? name+ '=' clause (',' clause)*
//! clause  := constructor (name | number)*
//! goal    := predicate name+
//! ```
//!
//! Input is folded to lowercase and `#` starts a line comment. A statement
//! prefixed with `!` may create a point that coincides with an existing one
//! (a double point); when it re-uses an existing name it becomes a constraint
//! on that point.

mod action;
mod construct;
mod parse;
mod predicate;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

pub use action::{parse_action, Action, ActionKind};
pub use construct::{Arg, Clause, ConstructionStmt, Constructor, Signature};
pub use parse::{parse_predicate, parse_problem, parse_statements};
pub use predicate::{Arity, PointName, Predicate, PredicateKind};

pub(crate) use parse::{admit_statement, parse_predicate_list};
pub(crate) use predicate::canonical_args;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: expected {expected}, found {found}")]
    Syntax { pos: usize, expected: String, found: String },
    #[error("undefined point '{name}' at byte {pos}")]
    UndefinedPoint { name: String, pos: usize },
    #[error("wrong arity for {what} at byte {pos}: expected {expected}, found {found}")]
    Arity { what: String, expected: String, found: usize, pos: usize },
    #[error("duplicate point '{name}' at byte {pos}")]
    DuplicatePoint { name: String, pos: usize },
    #[error("invalid point name '{0}'")]
    InvalidName(String),
    #[error("point '{point}' repeated within one slot of {predicate}")]
    RepeatedInSlot { predicate: String, point: String },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("no <build>, <add> or <propose> tag found")]
    MissingTag,
    #[error("more than one action tag found")]
    MultipleTags,
}

impl ParseError {
    /// Byte offset of the error, when it has one.
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UndefinedPoint { pos, .. }
            | ParseError::Arity { pos, .. }
            | ParseError::DuplicatePoint { pos, .. } => Some(*pos),
            _ => None,
        }
    }
}

/// A construction sequence plus the goals to prove.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub constructions: Vec<ConstructionStmt>,
    pub goals: Vec<Predicate>,
}

impl Problem {
    /// Re-checks the structural invariants that parsing guarantees.
    pub fn validate(&self) -> Result<(), ParseError> {
        if self.goals.is_empty() {
            return Err(ParseError::InvariantViolation("problem has no goals".into()));
        }
        let defined = self.check_constructions()?;
        for g in &self.goals {
            Predicate::new(g.kind, g.args.clone())?;
            for a in &g.args {
                if !defined.contains(a) {
                    return Err(ParseError::UndefinedPoint { name: a.to_string(), pos: 0 });
                }
            }
        }
        Ok(())
    }

    pub(crate) fn check_constructions(&self) -> Result<BTreeSet<PointName>, ParseError> {
        let mut defined = BTreeSet::new();
        for stmt in &self.constructions {
            admit_statement(&mut defined, stmt, 0)?;
        }
        Ok(defined)
    }

    /// All point names in construction order (without repeats).
    pub fn points(&self) -> Vec<PointName> {
        let mut out: Vec<PointName> = Vec::new();
        for s in &self.constructions {
            for p in &s.new_points {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        }
        out
    }

    /// Premise facts introduced by the construction statements.
    pub fn premises(&self) -> Vec<Predicate> {
        let mut out = Vec::new();
        for s in &self.constructions {
            for p in s.premises() {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }
}

/// Renders a problem in the canonical textual form.
pub fn serialize(p: &Problem) -> Result<String, ParseError> {
    p.validate()?;
    Ok(p.to_string())
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.constructions.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(" ? ")?;
        for (i, g) in self.goals.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for Problem {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_problem(s)
    }
}
