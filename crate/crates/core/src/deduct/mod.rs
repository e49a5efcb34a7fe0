//! Forward-chaining deduction with exact linear reasoning.
//!
//! A [`FactBase`] holds facts over the points of a diagram. Rules from a
//! [`RuleSet`] are matched numerically against the diagram once per diagram
//! state; the surviving candidates fire when their antecedents are known
//! symbolically. Linear predicates (everything except `cyclic` and `idc`) are
//! known when the exact angle and log-ratio systems imply them, so
//! transitivity and angle chasing never need rules. `idc` facts merge two
//! names into one symbolic point.

mod numeric;
mod rules;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::algebra::{encode_with, AngleSystem, Enc, RatioSystem, Space};
use crate::diagram::{Diagram, Pt};
use crate::dsl::{canonical_args, PointName, Predicate, PredicateKind};
use numeric::{Candidate, Numeric};

pub use rules::{Pattern, Rule, RuleSet};

/// Default cap on rule applications per saturation.
pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeductError {
    #[error("rule file line {line}: {message}")]
    RuleSyntax { line: usize, message: String },
    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("premise does not hold in the diagram: {0}")]
    PremiseFalse(String),
    #[error("not proven: {0}")]
    NotProven(String),
}

/// A predicate over point indices in canonical argument order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Key {
    pub kind: PredicateKind,
    pub args: Vec<usize>,
}

impl Key {
    pub fn new(kind: PredicateKind, args: &[usize]) -> Key {
        Key { kind, args: canonical_args(kind, args) }
    }

    fn degenerate(&self) -> bool {
        self.kind.distinct_slots(self.args.len()).iter().any(|slot| {
            slot.iter().enumerate().any(|(i, &a)| slot[i + 1..].iter().any(|&b| self.args[a] == self.args[b]))
        })
    }
}

/// One multiplier of an algebraic certificate: `multiplier` times relation
/// number `relation` of the encoding of fact `fact`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertTerm {
    pub fact: usize,
    pub relation: usize,
    pub multiplier: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FactSource {
    Premise,
    Rule { rule: String, antecedents: Vec<usize> },
    /// Linear combination of earlier facts; one combination per relation
    /// of the derived predicate's encoding.
    Algebra { antecedents: Vec<usize>, certificate: Vec<Vec<CertTerm>> },
    /// Bookkeeping: renaming through `idc` facts, or a higher-arity
    /// `cyclic` assembled from its four-point parts.
    Merge { antecedents: Vec<usize> },
}

impl FactSource {
    pub fn antecedents(&self) -> &[usize] {
        match self {
            FactSource::Premise => &[],
            FactSource::Rule { antecedents, .. }
            | FactSource::Algebra { antecedents, .. }
            | FactSource::Merge { antecedents } => antecedents,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            FactSource::Premise => "premise",
            FactSource::Rule { rule, .. } => rule,
            FactSource::Algebra { .. } => "algebra",
            FactSource::Merge { .. } => "merge",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fact {
    pub predicate: Predicate,
    pub source: FactSource,
}

/// The facts needed for a goal, in dependency order; antecedent indices
/// refer to positions in `nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofDag {
    pub nodes: Vec<Fact>,
    pub goal_roots: Vec<usize>,
}

impl ProofDag {
    pub fn premises(&self) -> impl Iterator<Item = &Predicate> + '_ {
        self.nodes.iter().filter(|n| n.source == FactSource::Premise).map(|n| &n.predicate)
    }
}

/// Deduction steps in a proof: rule applications and algebraic
/// certificates. Premises, renamings and `idc` facts do not count.
pub fn proof_length(dag: &ProofDag) -> usize {
    dag.nodes
        .iter()
        .filter(|n| {
            n.predicate.kind != PredicateKind::Idc
                && matches!(n.source, FactSource::Rule { .. } | FactSource::Algebra { .. })
        })
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum VarKey {
    Dir(usize, usize),
    Len(usize, usize),
    Log2,
}

fn pair(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn var_dir(a: &usize, b: &usize) -> VarKey {
    let (x, y) = pair(*a, *b);
    VarKey::Dir(x, y)
}

fn var_len(a: &usize, b: &usize) -> VarKey {
    let (x, y) = pair(*a, *b);
    VarKey::Len(x, y)
}

fn is_linear(kind: PredicateKind) -> bool {
    !matches!(kind, PredicateKind::Cyclic | PredicateKind::Idc)
}

#[derive(Debug, Clone)]
struct Node {
    key: Key,
    source: FactSource,
}

/// Summary of one saturation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Saturation {
    pub firings: usize,
    pub budget_exceeded: bool,
}

#[derive(Clone)]
pub struct FactBase {
    rules: Arc<RuleSet>,
    orders: Vec<Vec<Pattern>>,
    names: Vec<PointName>,
    index: BTreeMap<PointName, usize>,
    pts: Vec<Pt>,
    scale: f64,
    tol: f64,
    coincidence: f64,
    parent: Vec<usize>,
    parent_fact: Vec<Option<usize>>,
    nodes: Vec<Node>,
    known: BTreeMap<Key, usize>,
    angle: AngleSystem,
    ratio: RatioSystem,
    relations: Vec<(usize, usize)>,
    var_ids: BTreeMap<VarKey, u32>,
    numeric: Option<Arc<Numeric>>,
    pending: Vec<Vec<Candidate>>,
    angle_version: u64,
    ratio_version: u64,
    explicit_version: u64,
    positive: BTreeSet<Key>,
    negative: BTreeMap<Key, u64>,
    budget: usize,
    firings: usize,
    exceeded: bool,
}

impl core::fmt::Debug for FactBase {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FactBase").field("points", &self.names.len()).field("facts", &self.nodes.len()).finish()
    }
}

/// Saturates `premises` over `d` with the built-in rules. Check
/// [`FactBase::budget_exceeded`] for a partial result.
pub fn saturate(premises: &[Predicate], d: &Diagram, budget: usize) -> Result<FactBase, DeductError> {
    let mut fb = FactBase::new(d, Arc::new(RuleSet::default_rules()), budget);
    fb.add_premises(premises)?;
    fb.saturate();
    Ok(fb)
}

/// Proof of `goal` from the facts of `fb`.
pub fn prove(fb: &mut FactBase, goal: &Predicate) -> Result<ProofDag, DeductError> {
    fb.prove(goal)
}

impl FactBase {
    pub fn new(d: &Diagram, rules: Arc<RuleSet>, budget: usize) -> FactBase {
        let orders = rules.rules.iter().map(numeric::match_order).collect();
        let n_rules = rules.rules.len();
        let mut fb = FactBase {
            rules,
            orders,
            names: Vec::new(),
            index: BTreeMap::new(),
            pts: Vec::new(),
            scale: 1.0,
            tol: d.config().tol_check,
            coincidence: d.config().coincidence,
            parent: Vec::new(),
            parent_fact: Vec::new(),
            nodes: Vec::new(),
            known: BTreeMap::new(),
            angle: AngleSystem::default(),
            ratio: RatioSystem::default(),
            relations: Vec::new(),
            var_ids: BTreeMap::new(),
            numeric: None,
            pending: vec![Vec::new(); n_rules],
            angle_version: 0,
            ratio_version: 0,
            explicit_version: 0,
            positive: BTreeSet::new(),
            negative: BTreeMap::new(),
            budget,
            firings: 0,
            exceeded: false,
        };
        fb.set_diagram(d);
        fb
    }

    /// Follows a diagram that extends (or re-optimizes) the current one.
    /// Points keep their indices; new points are appended.
    pub fn set_diagram(&mut self, d: &Diagram) {
        for (i, name) in d.names().iter().enumerate() {
            if i >= self.names.len() {
                self.names.push(name.clone());
                self.index.insert(name.clone(), i);
                self.parent.push(i);
                self.parent_fact.push(None);
            }
        }
        self.pts = (0..d.len()).map(|i| d.pt(i)).collect();
        self.scale = d.scale();
        self.numeric = None;
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn budget_exceeded(&self) -> bool {
        self.exceeded
    }

    pub fn firings(&self) -> usize {
        self.firings
    }

    pub fn names(&self) -> &[PointName] {
        &self.names
    }

    fn predicate(&self, key: &Key) -> Predicate {
        Predicate { kind: key.kind, args: key.args.iter().map(|&i| self.names[i].clone()).collect() }
    }

    pub fn fact(&self, id: usize) -> Fact {
        Fact { predicate: self.predicate(&self.nodes[id].key), source: self.nodes[id].source.clone() }
    }

    /// Every materialized fact, in derivation order.
    pub fn facts(&self) -> impl Iterator<Item = Predicate> + '_ {
        self.nodes.iter().map(|n| self.predicate(&n.key))
    }

    fn key_of(&self, p: &Predicate) -> Result<Key, DeductError> {
        let args = p
            .args
            .iter()
            .map(|a| self.index.get(a).copied().ok_or_else(|| DeductError::UnknownPoint(a.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Key::new(p.kind, &args))
    }

    fn numerically_true(&self, key: &Key) -> bool {
        let pts: Vec<Pt> = key.args.iter().map(|&i| self.pts[i]).collect();
        crate::diagram::residual::violation(key.kind, &pts, self.scale) < self.tol
    }

    pub fn add_premises(&mut self, premises: &[Predicate]) -> Result<(), DeductError> {
        for p in premises {
            let key = self.key_of(p)?;
            if !self.numerically_true(&key) {
                return Err(DeductError::PremiseFalse(p.to_string()));
            }
            if !self.known.contains_key(&key) {
                self.add(key, FactSource::Premise);
            }
        }
        Ok(())
    }

    /// True iff `p` follows from the current facts.
    pub fn derives(&mut self, p: &Predicate) -> Result<bool, DeductError> {
        let key = self.key_of(p)?;
        Ok(self.check(&key))
    }

    pub fn prove(&mut self, goal: &Predicate) -> Result<ProofDag, DeductError> {
        let key = self.key_of(goal)?;
        let root = self.materialize(&key).ok_or_else(|| DeductError::NotProven(goal.to_string()))?;
        Ok(self.extract(&[root]))
    }

    /// One proof DAG covering every goal; `goal_roots` follows `goals`.
    pub fn prove_all(&mut self, goals: &[Predicate]) -> Result<ProofDag, DeductError> {
        let mut roots = Vec::with_capacity(goals.len());
        for g in goals {
            let key = self.key_of(g)?;
            roots.push(self.materialize(&key).ok_or_else(|| DeductError::NotProven(g.to_string()))?);
        }
        Ok(self.extract(&roots))
    }

    fn extract(&self, roots: &[usize]) -> ProofDag {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = roots.to_vec();
        while let Some(id) = stack.pop() {
            if seen.insert(id) {
                stack.extend(self.nodes[id].source.antecedents().iter().copied());
            }
        }
        let order: Vec<usize> = seen.into_iter().collect();
        let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let remap = |v: &[usize]| v.iter().map(|a| pos[a]).collect::<Vec<_>>();
        let nodes = order
            .iter()
            .map(|&id| {
                let source = match &self.nodes[id].source {
                    FactSource::Premise => FactSource::Premise,
                    FactSource::Rule { rule, antecedents } => FactSource::Rule { rule: rule.clone(), antecedents: remap(antecedents) },
                    FactSource::Merge { antecedents } => FactSource::Merge { antecedents: remap(antecedents) },
                    FactSource::Algebra { antecedents, certificate } => FactSource::Algebra {
                        antecedents: remap(antecedents),
                        certificate: certificate
                            .iter()
                            .map(|part| {
                                part.iter().map(|t| CertTerm { fact: pos[&t.fact], relation: t.relation, multiplier: t.multiplier.clone() }).collect()
                            })
                            .collect(),
                    },
                };
                Fact { predicate: self.predicate(&self.nodes[id].key), source }
            })
            .collect();
        ProofDag { nodes, goal_roots: roots.iter().map(|r| pos[r]).collect() }
    }

    // ---- symbolic points -------------------------------------------------

    fn rep(&self, mut p: usize) -> usize {
        while self.parent[p] != p {
            p = self.parent[p];
        }
        p
    }

    fn rep_key(&self, key: &Key) -> Option<Key> {
        let args: Vec<usize> = key.args.iter().map(|&a| self.rep(a)).collect();
        let k = Key::new(key.kind, &args);
        (!k.degenerate()).then_some(k)
    }

    /// `idc` facts explaining why `p` and `q` are the same symbolic point.
    fn idc_support(&self, p: usize, q: usize, out: &mut BTreeSet<usize>) {
        for start in [p, q] {
            let mut x = start;
            while let Some(f) = self.parent_fact[x] {
                if out.insert(f) {
                    let args = self.nodes[f].key.args.clone();
                    self.idc_support(args[0], args[1], out);
                }
                x = self.parent[x];
            }
        }
    }

    fn union(&mut self, fact: usize) {
        let (x, y) = (self.nodes[fact].key.args[0], self.nodes[fact].key.args[1]);
        let (rx, ry) = (self.rep(x), self.rep(y));
        if rx == ry {
            return;
        }
        let (root, old) = if rx < ry { (rx, ry) } else { (ry, rx) };
        self.parent[old] = root;
        self.parent_fact[old] = Some(fact);
        self.explicit_version += 1;
        self.numeric = None;
        // The fact justifying old = root, as a single node.
        let link = if pair(x, y) == pair(old, root) {
            fact
        } else {
            let mut sup = BTreeSet::new();
            self.idc_support(old, root, &mut sup);
            let key = Key::new(PredicateKind::Idc, &[old, root]);
            match self.known.get(&key) {
                Some(&id) => id,
                None => self.push_node(key, FactSource::Merge { antecedents: sup.into_iter().collect() }),
            }
        };
        // Every fact through the old point is restated for the root.
        let through: Vec<(usize, Key)> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.key.kind != PredicateKind::Idc && n.key.args.contains(&old))
            .map(|(i, n)| (i, n.key.clone()))
            .collect();
        for (id, k) in through {
            if let Some(rk) = self.rep_key(&k) {
                if !self.known.contains_key(&rk) {
                    self.add(rk, FactSource::Merge { antecedents: vec![id, link] });
                }
            }
        }
    }

    // ---- linear systems --------------------------------------------------

    fn var_id(&mut self, k: VarKey) -> u32 {
        let next = self.var_ids.len() as u32;
        *self.var_ids.entry(k).or_insert(next)
    }

    fn encode(key: &Key) -> Vec<Enc<VarKey>> {
        encode_with(key.kind, &key.args, var_dir, var_len, VarKey::Log2).unwrap_or_default()
    }

    fn stamp(&self, kind: PredicateKind) -> u64 {
        use PredicateKind::*;
        match kind {
            Coll | Para | Perp | EqAngle => self.angle_version + self.explicit_version,
            Cong | EqRatio | Circle | SimTri | ConTri => self.ratio_version + self.explicit_version,
            Midp => self.angle_version + self.ratio_version + self.explicit_version,
            Cyclic | Idc => self.explicit_version,
        }
    }

    /// Combination of relations for each part of the encoding of `key`.
    fn query(&self, key: &Key) -> Option<Vec<Vec<(usize, BigRational)>>> {
        let mut out = Vec::new();
        for e in Self::encode(key) {
            let mut terms = Vec::with_capacity(e.terms.len());
            for (v, c) in &e.terms {
                terms.push((*self.var_ids.get(v)?, *c));
            }
            terms.sort();
            let combo: Vec<(usize, BigRational)> = match e.space {
                Space::Angle => {
                    let t: Vec<(u32, BigInt)> = terms.iter().map(|(v, c)| (*v, BigInt::from(*c))).collect();
                    let k = if e.half { BigRational::new(1.into(), 2.into()) } else { BigRational::zero() };
                    self.angle.reduce(&t, &k)?.into_iter().map(|(r, m)| (r, BigRational::from_integer(m))).collect()
                }
                Space::LogRatio => {
                    let t: Vec<(u32, BigRational)> = terms.iter().map(|(v, c)| (*v, BigRational::from_integer((*c).into()))).collect();
                    self.ratio.reduce(&t)?.into_iter().collect()
                }
            };
            out.push(combo);
        }
        Some(out)
    }

    /// True iff `key` is known or implied. Does not create facts.
    fn check(&mut self, key: &Key) -> bool {
        if self.known.contains_key(key) || self.positive.contains(key) {
            return true;
        }
        if key.kind == PredicateKind::Idc {
            return self.rep(key.args[0]) == self.rep(key.args[1]);
        }
        let Some(rk) = self.rep_key(key) else {
            return false;
        };
        if rk != *key {
            return self.check(&rk);
        }
        let stamp = self.stamp(key.kind);
        if self.negative.get(key) == Some(&stamp) {
            return false;
        }
        let ok = match key.kind {
            PredicateKind::Cyclic if key.args.len() == 4 => false,
            PredicateKind::Cyclic => self.cyclic_parts(key).iter().all(|k| self.known.contains_key(k)),
            _ => self.query(key).is_some(),
        };
        if ok {
            self.positive.insert(key.clone());
        } else {
            self.negative.insert(key.clone(), stamp);
        }
        ok
    }

    fn cyclic_parts(&self, key: &Key) -> Vec<Key> {
        let a = &key.args;
        (3..a.len()).map(|i| Key::new(PredicateKind::Cyclic, &[a[0], a[1], a[2], a[i]])).collect()
    }

    /// The fact node for `key`, creating algebraic or bookkeeping nodes as
    /// needed; `None` when `key` does not follow.
    fn materialize(&mut self, key: &Key) -> Option<usize> {
        if let Some(&id) = self.known.get(key) {
            return Some(id);
        }
        if key.kind == PredicateKind::Idc {
            let (x, y) = (key.args[0], key.args[1]);
            if self.rep(x) != self.rep(y) {
                return None;
            }
            let mut sup = BTreeSet::new();
            self.idc_support(x, y, &mut sup);
            return Some(self.push_node(key.clone(), FactSource::Merge { antecedents: sup.into_iter().collect() }));
        }
        let rk = self.rep_key(key)?;
        if rk != *key {
            let base = self.materialize(&rk)?;
            let mut sup = BTreeSet::new();
            for &a in &key.args {
                let r = self.rep(a);
                if r != a {
                    self.idc_support(a, r, &mut sup);
                }
            }
            let mut antecedents = vec![base];
            antecedents.extend(sup);
            return Some(self.push_node(key.clone(), FactSource::Merge { antecedents }));
        }
        match key.kind {
            PredicateKind::Cyclic if key.args.len() == 4 => None,
            PredicateKind::Cyclic => {
                let parts = self.cyclic_parts(key);
                let ids = parts.iter().map(|k| self.known.get(k).copied()).collect::<Option<Vec<_>>>()?;
                Some(self.push_node(key.clone(), FactSource::Merge { antecedents: ids }))
            }
            _ => {
                let combos = self.query(key)?;
                let mut antecedents = BTreeSet::new();
                let certificate: Vec<Vec<CertTerm>> = combos
                    .into_iter()
                    .map(|c| {
                        c.into_iter()
                            .map(|(r, m)| {
                                let (fact, relation) = self.relations[r];
                                antecedents.insert(fact);
                                CertTerm { fact, relation, multiplier: m }
                            })
                            .collect()
                    })
                    .collect();
                let source = FactSource::Algebra { antecedents: antecedents.into_iter().collect(), certificate };
                Some(self.push_node(key.clone(), source))
            }
        }
    }

    fn push_node(&mut self, key: Key, source: FactSource) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node { key: key.clone(), source });
        self.known.insert(key, id);
        self.explicit_version += 1;
        id
    }

    /// Records a new fact and its consequences for the linear systems and
    /// the symbolic points.
    fn add(&mut self, key: Key, source: FactSource) -> usize {
        let id = self.push_node(key.clone(), source);
        if key.kind == PredicateKind::Idc {
            self.union(id);
            return id;
        }
        let Some(rk) = self.rep_key(&key) else {
            return id;
        };
        if rk != key {
            if !self.check(&rk) {
                let mut sup = BTreeSet::new();
                for &a in &key.args {
                    let r = self.rep(a);
                    if r != a {
                        self.idc_support(a, r, &mut sup);
                    }
                }
                let mut antecedents = vec![id];
                antecedents.extend(sup);
                self.add(rk, FactSource::Merge { antecedents });
            }
            return id;
        }
        if key.kind == PredicateKind::Cyclic && key.args.len() > 4 {
            for part in self.cyclic_parts(&key) {
                if !self.known.contains_key(&part) {
                    self.push_node(part, FactSource::Merge { antecedents: vec![id] });
                }
            }
            return id;
        }
        if !is_linear(key.kind) {
            return id;
        }
        for (i, e) in Self::encode(&key).into_iter().enumerate() {
            let mut terms: Vec<(u32, i64)> = e.terms.iter().map(|(v, c)| (self.var_id(*v), *c)).collect();
            terms.sort();
            let rel = self.relations.len();
            self.relations.push((id, i));
            match e.space {
                Space::Angle => {
                    let t = terms.into_iter().map(|(v, c)| (v, BigInt::from(c))).collect();
                    let k = if e.half { BigRational::new(1.into(), 2.into()) } else { BigRational::zero() };
                    // A contradiction can only come from numerical noise in
                    // the diagram; the relation is then left out.
                    if let Ok(true) = self.angle.insert(t, k, rel) {
                        self.angle_version += 1;
                    }
                }
                Space::LogRatio => {
                    let t = terms.into_iter().map(|(v, c)| (v, BigRational::from_integer(c.into()))).collect();
                    if self.ratio.insert(t, rel) {
                        self.ratio_version += 1;
                    }
                }
            }
        }
        id
    }

    // ---- saturation ------------------------------------------------------

    fn refresh_numeric(&mut self) {
        let active: Vec<usize> = (0..self.names.len()).filter(|&i| self.parent[i] == i).collect();
        let nm = Arc::new(Numeric::new(&self.pts, &active, self.scale, self.tol, self.coincidence));
        self.pending = self.rules.rules.iter().zip(&self.orders).map(|(r, o)| numeric::candidates(&nm, r, o)).collect();
        self.numeric = Some(nm);
    }

    /// Applies rules until nothing new follows or the budget runs out.
    pub fn saturate(&mut self) -> Saturation {
        let start = self.firings;
        'outer: loop {
            if self.numeric.is_none() {
                self.refresh_numeric();
            }
            let mut fired = false;
            for r in 0..self.pending.len() {
                let cands = core::mem::take(&mut self.pending[r]);
                let mut keep = Vec::with_capacity(cands.len());
                let mut iter = cands.into_iter();
                for c in iter.by_ref() {
                    if self.check(&c.consequent) {
                        continue;
                    }
                    if !c.antecedents.iter().all(|a| self.check(a)) {
                        keep.push(c);
                        continue;
                    }
                    if self.firings >= self.budget {
                        self.exceeded = true;
                        keep.push(c);
                        break;
                    }
                    let antecedents: Vec<usize> =
                        c.antecedents.iter().map(|a| self.materialize(a).expect("checked antecedent")).collect();
                    let rule = self.rules.rules[r].id.clone();
                    self.add(c.consequent.clone(), FactSource::Rule { rule, antecedents });
                    self.firings += 1;
                    fired = true;
                    if self.numeric.is_none() {
                        // Points were merged: candidates are recomputed.
                        continue 'outer;
                    }
                }
                keep.extend(iter);
                self.pending[r] = keep;
                if self.exceeded {
                    break 'outer;
                }
            }
            if !fired {
                break;
            }
        }
        Saturation { firings: self.firings - start, budget_exceeded: self.exceeded }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::build_diagram;
    use crate::dsl::parse_problem;

    fn solve(src: &str, seed: u64) -> (FactBase, Predicate) {
        let p = parse_problem(src).unwrap();
        let d = build_diagram(&p, seed).unwrap();
        let fb = saturate(&p.premises(), &d, DEFAULT_BUDGET).unwrap();
        (fb, p.goals[0].clone())
    }

    #[test]
    fn midsegment_is_proven() {
        let (mut fb, goal) = solve("a b c = triangle; m = midpoint a b; n = midpoint a c ? para m n b c", 1);
        let dag = fb.prove(&goal).unwrap();
        assert!(proof_length(&dag) >= 1);
        assert_eq!(dag.nodes[dag.goal_roots[0]].predicate.canonical(), goal.canonical());
    }

    #[test]
    fn transitivity_needs_no_rule() {
        let (mut fb, _) = solve("a b c = triangle; m = midpoint a b; n = midpoint a c ? para m n b c", 2);
        let goal: Predicate = "coll a m b".parse().unwrap();
        let dag = fb.prove(&goal).unwrap();
        assert_eq!(proof_length(&dag), 1);
    }
}
