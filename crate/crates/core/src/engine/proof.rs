//! Proof documents assembled from solved sessions.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::deduct::{proof_length, FactSource, ProofDag};
use crate::dsl::{ConstructionStmt, PointName, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Premise,
    Rule,
    Algebra,
    Merge,
}

/// `multiplier` times relation `relation` of the encoding of step `step`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertEntry {
    pub step: usize,
    pub relation: usize,
    /// Exact rational as `p` or `p/q`.
    pub multiplier: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofStep {
    pub fact: String,
    pub kind: StepKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub from: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificate: Vec<Vec<CertEntry>>,
}

/// A complete proof: the constructions it needs and its steps in
/// dependency order (every step cites earlier steps only).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofDocument {
    pub problem: String,
    pub aux_used: Vec<String>,
    pub aux_unused: Vec<String>,
    pub steps: Vec<ProofStep>,
    /// Step index of each goal, in problem order.
    pub goals: Vec<usize>,
    pub proof_length: usize,
}

/// Indices of the auxiliary statements a proof depends on: those whose
/// points occur in the proof, plus everything those are built from.
pub fn used_aux(aux: &[ConstructionStmt], dag: &ProofDag) -> BTreeSet<usize> {
    let mut needed: BTreeSet<PointName> = dag.nodes.iter().flat_map(|n| n.predicate.args.iter().cloned()).collect();
    let mut used = BTreeSet::new();
    for (i, s) in aux.iter().enumerate().rev() {
        if s.new_points.iter().any(|p| needed.contains(p)) {
            used.insert(i);
            needed.extend(s.referenced_points());
        }
    }
    used
}

impl ProofDocument {
    pub fn new(problem: &Problem, aux: &[ConstructionStmt], dag: &ProofDag) -> ProofDocument {
        let used = used_aux(aux, dag);
        let (aux_used, aux_unused) = aux.iter().enumerate().fold((Vec::new(), Vec::new()), |(mut u, mut n), (i, s)| {
            if used.contains(&i) { u.push(s.to_string()) } else { n.push(s.to_string()) }
            (u, n)
        });
        let steps = dag
            .nodes
            .iter()
            .map(|n| {
                let (kind, rule) = match &n.source {
                    FactSource::Premise => (StepKind::Premise, None),
                    FactSource::Rule { rule, .. } => (StepKind::Rule, Some(rule.clone())),
                    FactSource::Algebra { .. } => (StepKind::Algebra, None),
                    FactSource::Merge { .. } => (StepKind::Merge, None),
                };
                let certificate = match &n.source {
                    FactSource::Algebra { certificate, .. } => certificate
                        .iter()
                        .map(|part| {
                            part.iter()
                                .map(|t| CertEntry { step: t.fact, relation: t.relation, multiplier: t.multiplier.to_string() })
                                .collect()
                        })
                        .collect(),
                    _ => Vec::new(),
                };
                ProofStep { fact: n.predicate.to_string(), kind, rule, from: n.source.antecedents().to_vec(), certificate }
            })
            .collect();
        ProofDocument {
            problem: problem.to_string(),
            aux_used,
            aux_unused,
            steps,
            goals: dag.goal_roots.clone(),
            proof_length: proof_length(dag),
        }
    }

    /// Facts the proof starts from.
    pub fn premises(&self) -> impl Iterator<Item = &str> + '_ {
        self.steps.iter().filter(|s| s.kind == StepKind::Premise).map(|s| s.fact.as_str())
    }
}

impl fmt::Display for ProofDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "problem: {}", self.problem)?;
        for a in &self.aux_used {
            writeln!(f, "construct: {a}")?;
        }
        for (i, s) in self.steps.iter().enumerate() {
            let by = match (&s.kind, &s.rule) {
                (StepKind::Premise, _) => "premise".to_string(),
                (_, Some(r)) => r.clone(),
                (StepKind::Algebra, None) => "algebra".to_string(),
                _ => "same point".to_string(),
            };
            let from: Vec<String> = s.from.iter().map(|j| alloc::format!("({j})")).collect();
            if from.is_empty() {
                writeln!(f, "({i}) {} [{by}]", s.fact)?;
            } else {
                writeln!(f, "({i}) {} [{by} from {}]", s.fact, from.join(" "))?;
            }
        }
        write!(f, "proof length: {}", self.proof_length)
    }
}
