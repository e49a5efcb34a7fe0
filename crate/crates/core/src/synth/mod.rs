//! Problem synthesis with a target proof complexity.
//!
//! [`generate_one`] samples a random raw construction, extends it with
//! auxiliary statements and keeps the most complex fact that the extended
//! construction proves but the raw one does not, stated over raw points
//! only. [`pipeline`] draws from a [`Cache`] first and generates batches of
//! samples until enough items fall within the tolerance around `kappa`.

mod cache;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deduct::{proof_length, FactBase, DEFAULT_BUDGET};
use crate::diagram::{Diagram, DiagramConfig};
use crate::dsl::{
    parse_problem, parse_statements, Arg, Clause, ConstructionStmt, Constructor, ParseError, PointName, Predicate,
    PredicateKind, Problem,
};
use crate::engine::{exhaust_prove, used_aux, EngineError};

pub use cache::{Cache, MemoryCache};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("no buildable construction after {0} attempts")]
    ExhaustedRetries(usize),
    #[error("timed out with {} of {} items", items.len(), items.len() + shortfall)]
    Timeout { items: Vec<SynthItem>, shortfall: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("bad item record: {0}")]
    Record(String),
}

impl From<ParseError> for SynthError {
    fn from(e: ParseError) -> Self {
        SynthError::Record(e.to_string())
    }
}

/// Shape of the random constructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    /// Raw point count is `clamp(raw_base + kappa * raw_per_kappa, 3, raw_max)`, give or take one.
    pub raw_base: f64,
    pub raw_per_kappa: f64,
    pub raw_max: usize,
    /// Auxiliary statement count is `clamp(aux_base + kappa * aux_per_kappa, 1, aux_max)`.
    pub aux_base: f64,
    pub aux_per_kappa: f64,
    pub aux_max: usize,
    /// Relative constructor weights; names as in the construction language.
    pub constructors: Vec<(String, f64)>,
    /// Probability that a raw statement carries a second clause.
    pub constrain: f64,
}

impl Default for Priors {
    fn default() -> Self {
        let w = |n: &str, x: f64| (n.to_string(), x);
        Priors {
            raw_base: 5.0,
            raw_per_kappa: 0.25,
            raw_max: 12,
            aux_base: 2.0,
            aux_per_kappa: 0.125,
            aux_max: 5,
            constructors: alloc::vec![
                w("midpoint", 3.0),
                w("foot", 3.0),
                w("circumcenter", 1.5),
                w("on_circle", 1.5),
                w("on_line", 1.0),
                w("reflect", 1.0),
                w("intersection_ll", 1.0),
                w("intersection_lc", 1.0),
                w("intersection_cc", 0.5),
                w("angle_bisector", 0.5),
                w("perp_bisector", 0.5),
                w("incenter", 0.5),
            ],
            constrain: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub kappa: f64,
    pub tolerance: f64,
    /// Most samples the pipeline generates before giving up.
    pub max_sample: usize,
    /// Attempts per construction before [`SynthError::ExhaustedRetries`].
    pub max_retries: usize,
    /// Samples generated per batch.
    pub batch: usize,
    pub budget: usize,
    pub priors: Priors,
}

impl SynthConfig {
    pub fn new(kappa: f64) -> SynthConfig {
        SynthConfig {
            kappa,
            tolerance: 2.0,
            max_sample: 200_000,
            max_retries: 50,
            batch: 16,
            budget: DEFAULT_BUDGET,
            priors: Priors::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Config(m.to_string()));
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad("kappa must be positive");
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive");
        }
        if self.max_sample == 0 || self.max_retries == 0 || self.batch == 0 {
            return bad("max_sample, max_retries and batch must be at least 1");
        }
        for (name, w) in &self.priors.constructors {
            let c = Constructor::from_name(name).ok_or_else(|| SynthError::Config(alloc::format!("unknown constructor {name}")))?;
            if matches!(c, Constructor::Triangle | Constructor::Free | Constructor::Centroid) {
                return Err(SynthError::Config(alloc::format!("{name} asserts no facts")));
            }
            if !(*w >= 0.0) {
                return bad("constructor weights must be non-negative");
            }
        }
        if !(0.0..=1.0).contains(&self.priors.constrain) {
            return bad("constrain must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn in_range(&self, proof_len: usize) -> bool {
        libm::fabs(proof_len as f64 - self.kappa) <= self.tolerance
    }

    fn raw_points(&self) -> usize {
        let p = &self.priors;
        clamp(p.raw_base + self.kappa * p.raw_per_kappa, 3, p.raw_max.max(3))
    }

    fn aux_count(&self) -> usize {
        let p = &self.priors;
        clamp(p.aux_base + self.kappa * p.aux_per_kappa, 1, p.aux_max.max(1))
    }
}

fn clamp(x: f64, lo: usize, hi: usize) -> usize {
    (libm::round(x).max(0.0) as usize).clamp(lo, hi)
}

/// A synthesized problem: the goal is stated over raw points, the withheld
/// constructions make it provable.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthItem {
    pub problem: Problem,
    pub aux: Vec<ConstructionStmt>,
    pub proof_len: usize,
    pub seed: u64,
}

/// One line of a dataset or cache file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthRecord {
    pub problem: String,
    pub aux: Vec<String>,
    pub proof_len: usize,
    pub seed: u64,
}

impl SynthItem {
    pub fn record(&self) -> SynthRecord {
        SynthRecord {
            problem: self.problem.to_string(),
            aux: self.aux.iter().map(|s| s.to_string()).collect(),
            proof_len: self.proof_len,
            seed: self.seed,
        }
    }

    pub fn from_record(r: &SynthRecord) -> Result<SynthItem, SynthError> {
        let problem = parse_problem(&r.problem)?;
        let mut aux = Vec::new();
        for s in &r.aux {
            aux.extend(parse_statements(s)?);
        }
        Ok(SynthItem { problem, aux, proof_len: r.proof_len, seed: r.seed })
    }

    /// Identity of an item's content (the seed is not part of it).
    pub fn content_key(&self) -> String {
        let aux: Vec<String> = self.aux.iter().map(|s| s.to_string()).collect();
        alloc::format!("{} | {}", self.problem, aux.join("; "))
    }

    /// The problem with the auxiliary constructions revealed.
    pub fn revealed(&self) -> Problem {
        let mut constructions = self.problem.constructions.clone();
        constructions.extend(self.aux.iter().cloned());
        Problem { constructions, goals: self.problem.goals.clone() }
    }
}

/// Seed of sample `index` of a run seeded with `seed`.
pub fn sample_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.gen()
}

fn point_name(i: usize) -> PointName {
    let letters = b"abcdefghijklmnopqrstuvwxyz";
    let name = if i < 26 {
        alloc::format!("{}", letters[i] as char)
    } else {
        alloc::format!("{}{}", letters[i % 26] as char, i / 26)
    };
    PointName::new(&name).expect("generated names are identifiers")
}

struct Sampler<'a> {
    cfg: &'a SynthConfig,
    weights: Vec<(Constructor, f64)>,
}

impl<'a> Sampler<'a> {
    fn new(cfg: &'a SynthConfig) -> Sampler<'a> {
        let weights = cfg
            .priors
            .constructors
            .iter()
            .filter_map(|(n, w)| Some((Constructor::from_name(n)?, *w)))
            .filter(|(_, w)| *w > 0.0)
            .collect();
        Sampler { cfg, weights }
    }

    fn pick_constructor(&self, rng: &mut ChaCha8Rng) -> Option<Constructor> {
        self.weights.choose_weighted(rng, |(_, w)| *w).ok().map(|(c, _)| *c)
    }

    fn clause(&self, rng: &mut ChaCha8Rng, points: &[PointName], avoid: Option<&Clause>) -> Option<Clause> {
        for _ in 0..8 {
            let c = self.pick_constructor(rng)?;
            let n = c.signature().point_args;
            if n > points.len() {
                continue;
            }
            let args: Vec<PointName> = points.choose_multiple(rng, n).cloned().collect();
            let clause = Clause { constructor: c, args: args.into_iter().map(Arg::Point).collect() };
            if let Some(a) = avoid {
                let set = |c: &Clause| c.point_args().into_iter().collect::<BTreeSet<_>>();
                if a.constructor == clause.constructor && set(a) == set(&clause) {
                    continue;
                }
            }
            return Some(clause);
        }
        None
    }

    fn statement(&self, rng: &mut ChaCha8Rng, points: &[PointName], name: PointName, constrain: bool) -> Option<ConstructionStmt> {
        let primary = self.clause(rng, points, None)?;
        let constraints = if constrain { alloc::vec![self.clause(rng, points, Some(&primary))?] } else { Vec::new() };
        Some(ConstructionStmt {
            new_points: alloc::vec![name],
            constructor: primary.constructor,
            args: primary.args,
            allow_double: false,
            constraints,
        })
    }

    /// Appends `count` statements to `base`, retrying until the result builds.
    fn extend(
        &self,
        base: &[ConstructionStmt],
        count: usize,
        constrain: f64,
        seed: u64,
    ) -> Result<Vec<ConstructionStmt>, SynthError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..self.cfg.max_retries {
            let mut stmts = base.to_vec();
            let mut points: Vec<PointName> = stmts.iter().flat_map(|s| s.new_points.iter().cloned()).collect();
            let mut ok = true;
            for _ in 0..count {
                let c = rng.gen_bool(constrain);
                match self.statement(&mut rng, &points, point_name(points.len()), c) {
                    Some(s) => {
                        points.push(s.new_points[0].clone());
                        stmts.push(s);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let build_seed: u64 = rng.gen();
            if Diagram::build(&stmts, build_seed, &DiagramConfig::default()).is_ok() {
                return Ok(stmts);
            }
        }
        Err(SynthError::ExhaustedRetries(self.cfg.max_retries))
    }
}

fn triangle() -> ConstructionStmt {
    ConstructionStmt {
        new_points: (0..3).map(point_name).collect(),
        constructor: Constructor::Triangle,
        args: Vec::new(),
        allow_double: false,
        constraints: Vec::new(),
    }
}

/// A random buildable raw construction sized by the priors.
pub fn rand_construction(cfg: &SynthConfig, seed: u64) -> Result<Vec<ConstructionStmt>, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter: i64 = rng.gen_range(-1..=1);
    let target = (cfg.raw_points() as i64 + jitter).clamp(3, cfg.priors.raw_max.max(3) as i64) as usize;
    let s = Sampler::new(cfg);
    s.extend(&[triangle()], target - 3, cfg.priors.constrain, rng.gen())
}

/// Appends `count` random auxiliary statements to `raw`.
pub fn add_aux_constructions(
    raw: &[ConstructionStmt],
    cfg: &SynthConfig,
    count: usize,
    seed: u64,
) -> Result<Vec<ConstructionStmt>, SynthError> {
    if count == 0 {
        return Ok(raw.to_vec());
    }
    Sampler::new(cfg).extend(raw, count, 0.0, seed)
}

/// Tie-break priority of goal kinds; higher is preferred.
pub fn kind_priority(kind: PredicateKind) -> u8 {
    use PredicateKind::*;
    match kind {
        EqRatio => 7,
        EqAngle => 6,
        SimTri | ConTri => 5,
        Cong => 4,
        Cyclic | Circle => 3,
        Para | Perp => 2,
        Midp => 1,
        Coll | Idc => 0,
    }
}

/// The most complex candidate: longest proof, then kind priority, then the
/// smallest rendering.
pub fn select_most_complex(cands: &[(Predicate, usize)]) -> Option<&(Predicate, usize)> {
    cands.iter().max_by(|(p, n), (q, m)| {
        n.cmp(m)
            .then(kind_priority(p.kind).cmp(&kind_priority(q.kind)))
            .then_with(|| q.to_string().cmp(&p.to_string()))
    })
}

/// Predicates of the cheap kinds that hold numerically among the first `n`
/// points of `d`.
fn numeric_candidates(d: &Diagram, n: usize) -> Vec<Predicate> {
    use PredicateKind::*;
    let name = |i: usize| d.names()[i].clone();
    let mk = |kind, idx: &[usize]| Predicate { kind, args: idx.iter().map(|&i| name(i)).collect() };
    let mut out = Vec::new();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    for (x, &(a, b)) in pairs.iter().enumerate() {
        for &(c, e) in &pairs[x + 1..] {
            for kind in [Para, Perp, Cong] {
                if d.holds_at(kind, &[a, b, c, e]) {
                    out.push(mk(kind, &[a, b, c, e]));
                }
            }
        }
        for c in b + 1..n {
            if d.holds_at(Coll, &[a, b, c]) {
                out.push(mk(Coll, &[a, b, c]));
            }
            for e in c + 1..n {
                if d.holds_at(Cyclic, &[a, b, c, e]) {
                    out.push(mk(Cyclic, &[a, b, c, e]));
                }
            }
        }
        for m in 0..n {
            if m != a && m != b && d.holds_at(Midp, &[m, a, b]) {
                out.push(mk(Midp, &[m, a, b]));
            }
        }
    }
    out
}

fn saturated(stmts: &[ConstructionStmt], d: &Diagram, budget: usize) -> Option<FactBase> {
    let p = Problem { constructions: stmts.to_vec(), goals: Vec::new() };
    let mut fb = FactBase::new(d, alloc::sync::Arc::new(crate::deduct::RuleSet::default_rules()), budget);
    fb.add_premises(&p.premises()).ok()?;
    fb.saturate();
    (!fb.budget_exceeded()).then_some(fb)
}

/// Statements needed to define `points`: their own statements and,
/// recursively, everything those refer to.
fn closure(stmts: &[ConstructionStmt], points: &BTreeSet<PointName>) -> Vec<usize> {
    let mut need = points.clone();
    let mut keep = BTreeSet::new();
    for (i, s) in stmts.iter().enumerate().rev() {
        if s.new_points.iter().any(|p| need.contains(p)) {
            keep.insert(i);
            need.extend(s.referenced_points());
        }
    }
    keep.into_iter().collect()
}

/// One sample, or `None` when it yields no item.
///
/// A random construction of `raw + aux` statements is saturated. Its
/// derivable facts with proof length at most `kappa + tolerance` are tried
/// from most to least complex; for each, the raw structure is the set of
/// statements its points depend on and the rest are withheld. The first
/// fact that its raw structure alone does not prove becomes the goal.
pub fn generate_one(cfg: &SynthConfig, seed: u64) -> Option<SynthItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = rand_construction(cfg, rng.gen()).ok()?;
    let n_aux = rng.gen_range(1..=cfg.aux_count());
    let aug = add_aux_constructions(&base, cfg, n_aux, rng.gen()).ok()?;
    let d_aug = Diagram::build(&aug, seed, &DiagramConfig::default()).ok()?;
    let mut f_aug = saturated(&aug, &d_aug, cfg.budget)?;

    // Candidates whose proof leaves the goal's own construction; a proof
    // inside it would need no auxiliary statement.
    let upper = libm::floor(cfg.kappa + cfg.tolerance) as usize;
    let mut seen = BTreeSet::new();
    let mut cands = Vec::new();
    let mut closures = BTreeMap::new();
    let pool: Vec<Predicate> = f_aug.facts().chain(numeric_candidates(&d_aug, d_aug.len())).collect();
    for p in pool {
        if p.kind == PredicateKind::Idc || !seen.insert(p.canonical()) {
            continue;
        }
        let Ok(dag) = f_aug.prove(&p) else { continue };
        let n = proof_length(&dag);
        if n == 0 || n > upper {
            continue;
        }
        let keep = closure(&aug, &p.args.iter().cloned().collect());
        let inside: BTreeSet<&PointName> = keep.iter().flat_map(|&i| aug[i].new_points.iter()).collect();
        if dag.nodes.iter().flat_map(|x| x.predicate.args.iter()).all(|x| inside.contains(x)) {
            continue;
        }
        closures.insert(p.clone(), keep);
        cands.push((p, n));
    }
    let mut tried: BTreeMap<Vec<usize>, Option<FactBase>> = BTreeMap::new();
    while let Some((goal, _)) = select_most_complex(&cands).cloned() {
        cands.retain(|(p, _)| p != &goal);
        let keep = closures.remove(&goal).expect("closure of candidate");
        let raw: Vec<ConstructionStmt> = keep.iter().map(|&i| aug[i].clone()).collect();
        let f_raw = tried.entry(keep.clone()).or_insert_with(|| {
            let d = Diagram::build(&raw, seed, &DiagramConfig::default()).ok()?;
            saturated(&raw, &d, cfg.budget)
        });
        let Some(f_raw) = f_raw else { continue };
        if f_raw.derives(&goal).unwrap_or(true) {
            continue;
        }
        let aux: Vec<ConstructionStmt> =
            aug.iter().enumerate().filter(|(i, _)| !keep.contains(i)).map(|(_, s)| s.clone()).collect();
        if let Some(item) = finish(cfg, Problem { constructions: raw, goals: alloc::vec![goal] }, aux, seed) {
            return Some(item);
        }
    }
    None
}

/// Prunes unused auxiliary statements and checks the item invariants with
/// fresh solver runs.
fn finish(cfg: &SynthConfig, problem: Problem, aux: Vec<ConstructionStmt>, seed: u64) -> Option<SynthItem> {
    if !matches!(exhaust_prove(&problem, seed, cfg.budget), Err(EngineError::NotProven(_))) {
        return None;
    }
    let item = SynthItem { problem, aux, proof_len: 0, seed };
    let dag = exhaust_prove(&item.revealed(), seed, cfg.budget).ok()?;
    let used = used_aux(&item.aux, &dag);
    let aux: Vec<ConstructionStmt> = item.aux.iter().enumerate().filter(|(i, _)| used.contains(i)).map(|(_, s)| s.clone()).collect();
    if aux.is_empty() {
        return None;
    }
    let item = SynthItem { aux, ..item };
    let dag = exhaust_prove(&item.revealed(), seed, cfg.budget).ok()?;
    Some(SynthItem { proof_len: proof_length(&dag), ..item })
}

/// Checks the item invariants: the raw problem is not provable, the
/// revealed one is, with the recorded proof length.
pub fn verify_item(item: &SynthItem, budget: usize) -> Result<(), String> {
    let seed = item.seed;
    match exhaust_prove(&item.problem, seed, budget) {
        Err(EngineError::NotProven(_)) => {}
        Ok(_) => return Err("raw problem is provable".into()),
        Err(e) => return Err(alloc::format!("raw problem: {e}")),
    }
    let dag = exhaust_prove(&item.revealed(), seed, budget).map_err(|e| alloc::format!("revealed problem: {e}"))?;
    if proof_length(&dag) != item.proof_len {
        return Err(alloc::format!("proof length {} but recorded {}", proof_length(&dag), item.proof_len));
    }
    Ok(())
}

/// Counters of one pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PipelineStats {
    pub cache_hits: usize,
    pub generated: usize,
    pub emitted: usize,
}

/// Runs a batch of samples; the result follows the order of `seeds`.
pub type BatchRunner<'a> = &'a (dyn Fn(&SynthConfig, &[u64]) -> Vec<Option<SynthItem>> + Sync);

/// Runs samples one after another.
pub fn run_sequential(cfg: &SynthConfig, seeds: &[u64]) -> Vec<Option<SynthItem>> {
    seeds.iter().map(|&s| generate_one(cfg, s)).collect()
}

/// Exactly `k` items with proof length within `cfg.tolerance` of
/// `cfg.kappa`: first from `cache`, then from fresh samples, which are
/// also appended to the cache. `expired` is polled between batches.
///
/// The output depends only on `seed`, the configuration and the cache
/// contents, not on how `runner` schedules a batch.
pub fn pipeline(
    cfg: &SynthConfig,
    k: usize,
    seed: u64,
    cache: &mut dyn Cache,
    runner: BatchRunner<'_>,
    expired: &mut dyn FnMut() -> bool,
) -> Result<(Vec<SynthItem>, PipelineStats), SynthError> {
    cfg.validate()?;
    if k == 0 {
        return Err(SynthError::Config("item count must be at least 1".into()));
    }
    let mut stats = PipelineStats::default();
    let mut out: Vec<SynthItem> = Vec::new();
    let mut taken: BTreeSet<String> = BTreeSet::new();
    for item in cache.items() {
        if out.len() == k {
            break;
        }
        if cfg.in_range(item.proof_len) && taken.insert(item.content_key()) {
            stats.cache_hits += 1;
            out.push(item);
        }
    }
    let mut index = 0u64;
    while out.len() < k {
        if stats.generated >= cfg.max_sample || expired() {
            let shortfall = k - out.len();
            return Err(SynthError::Timeout { items: out, shortfall });
        }
        let n = cfg.batch.min(cfg.max_sample - stats.generated);
        let seeds: Vec<u64> = (index..index + n as u64).map(|i| sample_seed(seed, i)).collect();
        index += n as u64;
        stats.generated += n;
        for item in runner(cfg, &seeds).into_iter().flatten() {
            stats.emitted += 1;
            cache.append(&item).map_err(SynthError::Record)?;
            if out.len() < k && cfg.in_range(item.proof_len) && taken.insert(item.content_key()) {
                out.push(item);
            }
        }
    }
    Ok((out, stats))
}
