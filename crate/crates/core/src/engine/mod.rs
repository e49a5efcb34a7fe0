//! Interactive proof sessions.
//!
//! A [`SessionState`] starts from a `<build>` action, then accepts `<add>`
//! and `<propose>` actions one turn at a time. Every action is answered with
//! a [`Feedback`]; once every goal has been proposed successfully the session
//! is solved and [`SessionState::extract_proof`] assembles the proof.

mod proof;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deduct::{DeductError, FactBase, ProofDag, RuleSet, DEFAULT_BUDGET};
use crate::diagram::{Diagram, DiagramConfig, DiagramError};
use crate::dsl::{
    admit_statement, parse_action, parse_predicate, parse_problem, parse_statements, Action, ConstructionStmt,
    ParseError, PointName, Predicate, Problem,
};

pub use proof::{used_aux, CertEntry, ProofDocument, ProofStep, StepKind};

/// Default turn limit of a session (the build counts as turn 1).
pub const DEFAULT_MAX_TURNS: u32 = 200;

/// Most facts listed in one feedback message.
const MAX_LISTED: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Deduct(#[from] DeductError),
    #[error("not proven: {0}")]
    NotProven(String),
    #[error("saturation budget exceeded before the goals were proven")]
    BudgetExceeded,
    #[error("turn limit of {0} exceeded")]
    TurnLimitExceeded(u32),
    #[error("session is already solved")]
    Solved,
    #[error("session is not solved")]
    NotSolved,
    #[error("the first action must be <build>")]
    NotBuild,
    #[error("<build> is only valid as the first action")]
    BuildAfterStart,
    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Proven,
    ConstructionFailed,
    NotProven,
    SessionSolved,
    Error,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Proven => "proven",
            Status::ConstructionFailed => "construction_failed",
            Status::NotProven => "not_proven",
            Status::SessionSolved => "session_solved",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Detail {
    /// New facts in derivation order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub facts: Vec<String>,
    /// Facts left out of `facts` because the list was capped.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub omitted: usize,
    /// Newly placed points that coincide numerically with existing ones.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coincident: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proof_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feedback {
    pub turn: u32,
    pub status: Status,
    pub detail: Detail,
    /// Propositions proven so far, in the order they were proven.
    pub known: Vec<String>,
}

impl Feedback {
    /// Feedback for a request that never reached a session.
    pub fn error(turn: u32, e: &EngineError) -> Feedback {
        Feedback {
            turn,
            status: Status::Error,
            detail: Detail { error: Some(e.to_string()), ..Detail::default() },
            known: Vec::new(),
        }
    }

    /// One-line description of the main result, for history summaries.
    pub fn key_result(&self) -> String {
        let d = &self.detail;
        if let Some(e) = &d.error {
            return e.clone();
        }
        if let Some(n) = d.proof_length {
            return alloc::format!("proof length {n}");
        }
        let mut parts: Vec<String> = d.coincident.clone();
        if !d.facts.is_empty() || d.omitted > 0 {
            parts.push(alloc::format!("{} new facts", d.facts.len() + d.omitted));
        }
        parts.join(", ")
    }
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub max_turns: u32,
    pub budget: usize,
    pub diagram: DiagramConfig,
    pub rules: Arc<RuleSet>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            max_turns: DEFAULT_MAX_TURNS,
            budget: DEFAULT_BUDGET,
            diagram: DiagramConfig::default(),
            rules: Arc::new(RuleSet::default_rules()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SessionState {
    pub problem: Problem,
    pub seed: u64,
    pub diagram: Diagram,
    pub factbase: FactBase,
    pub aux: Vec<ConstructionStmt>,
    pub proven: Vec<(Predicate, ProofDag)>,
    pub goals_remaining: Vec<Predicate>,
    pub turn: u32,
    pub max_turns: u32,
}

/// Serializable session state; the diagram and fact base are rebuilt on resume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub problem: String,
    pub seed: u64,
    pub max_turns: u32,
    pub aux: Vec<String>,
    pub proven: Vec<String>,
    pub turn: u32,
}

fn same(a: &Predicate, b: &Predicate) -> bool {
    a.canonical() == b.canonical()
}

/// Builds the problem of a `<build>` action and runs the initial saturation.
/// Goals that already follow from the premises are proven immediately.
pub fn start_session(a: &Action, seed: u64, cfg: &SessionConfig) -> Result<(SessionState, Feedback), EngineError> {
    let Action::Build(problem) = a else {
        return Err(EngineError::NotBuild);
    };
    let mut s = SessionState::fresh(problem.clone(), seed, cfg)?;
    let facts: Vec<String> = s.factbase.facts().map(|f| f.to_string()).collect();
    let mut detail = list_facts(facts);
    detail.residual = Some(s.diagram.residual().value);
    for g in s.problem.goals.clone() {
        if let Ok(dag) = s.factbase.prove(&g) {
            s.record(g, dag);
        }
    }
    let status = if s.is_solved() { Status::SessionSolved } else { Status::Ok };
    let fb = s.feedback(status, detail);
    Ok((s, fb))
}

/// Proves every goal of `p` by saturation alone, with no auxiliary points.
pub fn exhaust_solve(p: &Problem, seed: u64, budget: usize) -> Result<ProofDocument, EngineError> {
    exhaust_prove(p, seed, budget).map(|dag| ProofDocument::new(p, &[], &dag))
}

/// The proof DAG behind [`exhaust_solve`].
pub fn exhaust_prove(p: &Problem, seed: u64, budget: usize) -> Result<ProofDag, EngineError> {
    let cfg = SessionConfig { budget, ..SessionConfig::default() };
    let mut s = SessionState::fresh(p.clone(), seed, &cfg)?;
    match s.factbase.prove_all(&p.goals) {
        Ok(dag) => Ok(dag),
        Err(DeductError::NotProven(_)) if s.factbase.budget_exceeded() => Err(EngineError::BudgetExceeded),
        Err(DeductError::NotProven(g)) => Err(EngineError::NotProven(g)),
        Err(e) => Err(e.into()),
    }
}

fn list_facts(all: Vec<String>) -> Detail {
    let mut seen = BTreeSet::new();
    let mut facts: Vec<String> = all.into_iter().filter(|f| seen.insert(f.clone())).collect();
    let omitted = facts.len().saturating_sub(MAX_LISTED);
    facts.truncate(MAX_LISTED);
    Detail { facts, omitted, ..Detail::default() }
}

impl SessionState {
    fn fresh(problem: Problem, seed: u64, cfg: &SessionConfig) -> Result<SessionState, EngineError> {
        problem.validate()?;
        let diagram = Diagram::build(&problem.constructions, seed, &cfg.diagram)?;
        let mut factbase = FactBase::new(&diagram, cfg.rules.clone(), cfg.budget);
        factbase.add_premises(&problem.premises())?;
        factbase.saturate();
        let goals_remaining = problem.goals.clone();
        Ok(SessionState {
            problem,
            seed,
            diagram,
            factbase,
            aux: Vec::new(),
            proven: Vec::new(),
            goals_remaining,
            turn: 1,
            max_turns: cfg.max_turns,
        })
    }

    pub fn is_solved(&self) -> bool {
        self.goals_remaining.is_empty()
    }

    /// Proven propositions, in the order they were proven.
    pub fn known(&self) -> Vec<String> {
        self.proven.iter().map(|(p, _)| p.to_string()).collect()
    }

    fn feedback(&self, status: Status, detail: Detail) -> Feedback {
        Feedback { turn: self.turn, status, detail, known: self.known() }
    }

    fn error(&self, e: &dyn core::fmt::Display) -> Feedback {
        self.feedback(Status::Error, Detail { error: Some(e.to_string()), ..Detail::default() })
    }

    fn record(&mut self, p: Predicate, dag: ProofDag) {
        self.goals_remaining.retain(|g| !same(g, &p));
        if !self.proven.iter().any(|(q, _)| same(q, &p)) {
            self.proven.push((p, dag));
        }
    }

    /// Parses and applies one turn's raw output. Unparsable text is
    /// answered with an error feedback and still uses up the turn.
    pub fn step_text(&mut self, raw: &str) -> Result<Feedback, EngineError> {
        self.begin_turn()?;
        match parse_action(raw) {
            Ok(a) => Ok(self.apply(a)),
            Err(e) => Ok(self.error(&e)),
        }
    }

    /// Applies one action. Every call uses up exactly one turn.
    pub fn step(&mut self, a: Action) -> Result<Feedback, EngineError> {
        self.begin_turn()?;
        Ok(self.apply(a))
    }

    fn begin_turn(&mut self) -> Result<(), EngineError> {
        if self.is_solved() {
            return Err(EngineError::Solved);
        }
        if self.turn >= self.max_turns {
            return Err(EngineError::TurnLimitExceeded(self.max_turns));
        }
        self.turn += 1;
        Ok(())
    }

    fn apply(&mut self, a: Action) -> Feedback {
        match a {
            Action::Build(_) => self.error(&EngineError::BuildAfterStart),
            Action::Add(stmts) => self.add(&stmts),
            Action::Propose(p) => self.propose(p),
        }
    }

    fn defined(&self) -> BTreeSet<PointName> {
        self.factbase.names().iter().cloned().collect()
    }

    fn add(&mut self, stmts: &[ConstructionStmt]) -> Feedback {
        let mut defined = self.defined();
        for s in stmts {
            if let Err(e) = admit_statement(&mut defined, s, 0) {
                return self.error(&e);
            }
        }
        match self.try_add(stmts) {
            Ok(detail) => self.feedback(Status::Ok, detail),
            Err(e) => self.feedback(Status::ConstructionFailed, Detail { error: Some(e.to_string()), ..Detail::default() }),
        }
    }

    fn try_add(&mut self, stmts: &[ConstructionStmt]) -> Result<Detail, EngineError> {
        let mut d = self.diagram.clone();
        for s in stmts {
            d = d.add(s)?;
        }
        let mut fb = self.factbase.clone();
        let before = fb.len();
        fb.set_diagram(&d);
        for s in stmts {
            fb.add_premises(&s.premises())?;
        }
        fb.saturate();
        let new: Vec<String> = (before..fb.len()).map(|i| fb.fact(i).predicate.to_string()).collect();
        let mut detail = list_facts(new);
        detail.coincident = d
            .merged()
            .difference(self.diagram.merged())
            .map(|(a, b)| alloc::format!("idc {a} {b}"))
            .collect();
        detail.residual = Some(d.residual().value);
        self.diagram = d;
        self.factbase = fb;
        self.aux.extend(stmts.iter().cloned());
        Ok(detail)
    }

    fn propose(&mut self, p: Predicate) -> Feedback {
        match self.factbase.prove(&p) {
            Ok(dag) => {
                let n = crate::deduct::proof_length(&dag);
                self.record(p, dag);
                let status = if self.is_solved() { Status::SessionSolved } else { Status::Proven };
                self.feedback(status, Detail { proof_length: Some(n), ..Detail::default() })
            }
            Err(DeductError::NotProven(_)) => self.feedback(Status::NotProven, Detail::default()),
            Err(e) => self.error(&e),
        }
    }

    /// The complete proof of a solved session.
    pub fn extract_proof(&mut self) -> Result<ProofDocument, EngineError> {
        if !self.is_solved() {
            return Err(EngineError::NotSolved);
        }
        let dag = self.factbase.prove_all(&self.problem.goals)?;
        Ok(ProofDocument::new(&self.problem, &self.aux, &dag))
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            problem: self.problem.to_string(),
            seed: self.seed,
            max_turns: self.max_turns,
            aux: self.aux.iter().map(|s| s.to_string()).collect(),
            proven: self.known(),
            turn: self.turn,
        }
    }

    /// Rebuilds a session from a checkpoint by replaying its constructions
    /// and re-proving its propositions.
    pub fn resume(cp: &Checkpoint, cfg: &SessionConfig) -> Result<SessionState, EngineError> {
        let bad = |m: String| EngineError::Checkpoint(m);
        let problem = parse_problem(&cp.problem)?;
        let cfg = SessionConfig { max_turns: cp.max_turns, ..cfg.clone() };
        let mut s = SessionState::fresh(problem, cp.seed, &cfg)?;
        for text in &cp.aux {
            let stmts = parse_statements(text)?;
            s.try_add(&stmts).map_err(|e| bad(alloc::format!("replaying '{text}': {e}")))?;
        }
        for text in &cp.proven {
            let p = parse_predicate(text)?;
            let dag = s.factbase.prove(&p).map_err(|e| bad(alloc::format!("re-proving '{text}': {e}")))?;
            s.record(p, dag);
        }
        if cp.turn == 0 || cp.turn > cp.max_turns {
            return Err(bad(alloc::format!("turn {} outside 1..={}", cp.turn, cp.max_turns)));
        }
        s.turn = cp.turn;
        Ok(s)
    }
}
