//! Numeric models of construction programs.
//!
//! A [`Diagram`] places every point of a construction sequence by sampling
//! the free parameters of each statement and evaluating the closed-form
//! constructors in order. Statements carrying extra clauses, and predicates
//! added through [`adjust_globally`], are satisfied afterwards by damped
//! least squares over the free parameters.

mod eval;
pub(crate) mod geom;
pub(crate) mod residual;
mod solve;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dsl::{ConstructionStmt, Constructor, PointName, Predicate, PredicateKind, Problem};
use eval::Program;

pub use geom::Pt;

/// Stride between the RNG streams of successive restarts.
pub(crate) const RESTART_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagramError {
    #[error("infeasible configuration: {0}")]
    InfeasibleConfiguration(String),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("point '{point}' coincides with existing point '{existing}'")]
    CoincidesWithExisting { point: String, existing: String },
    #[error("unknown point '{0}'")]
    UnknownPoint(String),
}

/// Numeric tolerances, all relative to the diagram diameter.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramConfig {
    /// Largest constraint residual accepted for a built diagram.
    pub tol_construct: f64,
    /// Largest violation at which a predicate still counts as true.
    pub tol_check: f64,
    /// Points closer than this are the same point.
    pub coincidence: f64,
    /// Distinct points closer than this make the sample ambiguous.
    pub near_pair: f64,
    /// Triples whose normalized area is below this (but not exactly zero)
    /// are treated as accidental near-collinearities.
    pub near_collinear: f64,
    /// Normalized area below which a triple counts as exactly collinear.
    pub exact_collinear: f64,
    pub max_restarts: u32,
    pub max_iters: usize,
}

impl Default for DiagramConfig {
    fn default() -> Self {
        DiagramConfig {
            tol_construct: 1e-8,
            tol_check: 1e-8,
            coincidence: 1e-6,
            near_pair: 1e-3,
            near_collinear: 1e-4,
            exact_collinear: 1e-9,
            max_restarts: 32,
            max_iters: 200,
        }
    }
}

/// Constraint violation of a diagram: the worst term and every term by label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Residual {
    pub value: f64,
    pub per_constraint: BTreeMap<String, f64>,
}

/// Coordinates of a construction sequence together with its merged double points.
#[derive(Debug, Clone)]
pub struct Diagram {
    program: Program,
    params: Vec<f64>,
    pts: Vec<Pt>,
    merged: BTreeSet<(PointName, PointName)>,
    seed: u64,
    scale: f64,
    config: DiagramConfig,
}

enum Failure {
    Infeasible(String),
    Degenerate(String),
    Coincides { point: String, existing: String },
}

impl From<Failure> for DiagramError {
    fn from(f: Failure) -> Self {
        match f {
            Failure::Infeasible(s) => DiagramError::InfeasibleConfiguration(s),
            Failure::Degenerate(s) => DiagramError::DegenerateConfiguration(s),
            Failure::Coincides { point, existing } => DiagramError::CoincidesWithExisting { point, existing },
        }
    }
}

fn diameter(pts: &[Pt]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(pts[i].dist(pts[j]));
        }
    }
    d
}

fn flat_residuals(program: &Program, params: &[f64]) -> Option<Vec<f64>> {
    let pts = program.evaluate(params)?;
    let scale = diameter(&pts);
    Some(program.constraint_residuals(&pts, scale).into_iter().flat_map(|(_, r)| r).collect())
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

struct Validated {
    merged: BTreeSet<(PointName, PointName)>,
    scale: f64,
}

/// Checks residuals, coincidences and generic position of a candidate placement.
fn validate(program: &Program, pts: &[Pt], cfg: &DiagramConfig) -> Result<Validated, Failure> {
    let scale = diameter(pts);
    if pts.len() > 1 && !(scale.is_finite() && scale > 0.0) {
        return Err(Failure::Degenerate("all points coincide".into()));
    }
    let worst = program
        .constraint_residuals(pts, scale)
        .into_iter()
        .flat_map(|(_, r)| r)
        .fold(0.0, |m: f64, v| if v.is_nan() { f64::INFINITY } else { m.max(libm::fabs(v)) });
    if worst >= cfg.tol_construct {
        return Err(Failure::Infeasible(alloc::format!("constraint residual {worst:.3e}")));
    }
    let n = pts.len();
    let mut may_double = alloc::vec![false; n];
    for step in &program.steps {
        if step.stmt.allow_double {
            for &t in &step.targets {
                may_double[t] = true;
            }
        }
    }
    let name = |i: usize| program.names[i].to_string();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut merged = BTreeSet::new();
    for j in 0..n {
        for i in 0..j {
            let d = pts[i].dist(pts[j]) / scale;
            if d < cfg.coincidence {
                if !may_double[j] {
                    return Err(Failure::Coincides { point: name(j), existing: name(i) });
                }
                let (a, b) = (program.names[i].clone(), program.names[j].clone());
                merged.insert(if a < b { (a, b) } else { (b, a) });
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[rj] = ri;
            } else if d < cfg.near_pair {
                return Err(Failure::Degenerate(alloc::format!("points {} and {} nearly coincide", name(i), name(j))));
            }
        }
    }
    let reps: Vec<usize> = (0..n).filter(|&i| find(&mut parent, i) == i).collect();
    for (x, &i) in reps.iter().enumerate() {
        for (y, &j) in reps.iter().enumerate().skip(x + 1) {
            for &k in &reps[y + 1..] {
                let v = libm::fabs(residual::residuals(PredicateKind::Coll, &[pts[i], pts[j], pts[k]], scale)[0]);
                if v >= cfg.exact_collinear && v < cfg.near_collinear {
                    return Err(Failure::Degenerate(alloc::format!(
                        "points {}, {}, {} are nearly collinear",
                        name(i),
                        name(j),
                        name(k)
                    )));
                }
            }
        }
    }
    for step in &program.steps {
        let required: Option<[usize; 3]> = match step.stmt.constructor {
            Constructor::Triangle => Some([step.targets[0], step.targets[1], step.targets[2]]),
            Constructor::Circumcenter | Constructor::Incenter | Constructor::Centroid => {
                let a = &step.primary.args;
                Some([a[0], a[1], a[2]])
            }
            _ => None,
        };
        if let Some([i, j, k]) = required {
            let v = libm::fabs(residual::residuals(PredicateKind::Coll, &[pts[i], pts[j], pts[k]], scale)[0]);
            if !(v >= cfg.near_collinear) {
                return Err(Failure::Degenerate(alloc::format!(
                    "triangle {} {} {} is degenerate",
                    name(i),
                    name(j),
                    name(k)
                )));
            }
        }
    }
    Ok(Validated { merged, scale })
}

/// How each restart chooses its starting parameters.
enum Start<'a> {
    /// Fresh samples for everything.
    Sample,
    /// Keep `base` and resample only the steps from `first_step` on;
    /// only their parameters move.
    Extend { base: &'a [f64], first_step: usize },
    /// Start from `base`, then resample everything on later restarts.
    Adjust { base: &'a [f64] },
}

fn search(program: Program, seed: u64, cfg: &DiagramConfig, start: Start<'_>) -> Result<Diagram, DiagramError> {
    let mut last = Failure::Infeasible("no attempt made".into());
    let attempts = cfg.max_restarts.max(1);
    let mixed = seed ^ (program.steps.len() as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    for attempt in 0..attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(mixed.wrapping_add((attempt as u64).wrapping_mul(RESTART_STRIDE)));
        let (params, free): (Vec<f64>, Vec<usize>) = match start {
            Start::Sample => (program.sample(&mut rng), (0..program.n_params).collect()),
            Start::Extend { base, first_step } => {
                let mut p = base.to_vec();
                p.resize(program.n_params, 0.0);
                let from = program.steps.get(first_step).map_or(program.n_params, |s| s.param_offset);
                for step in &program.steps[first_step..] {
                    program.sample_step(step, &mut rng, &mut p);
                }
                let reuse = program.steps[first_step..].iter().any(|s| !s.places);
                let free = if reuse { (0..program.n_params).collect() } else { (from..program.n_params).collect() };
                (p, free)
            }
            Start::Adjust { base } => {
                let p = if attempt == 0 { base.to_vec() } else { program.sample(&mut rng) };
                (p, (0..program.n_params).collect())
            }
        };
        let params = if program.has_constraints() {
            solve::minimize(|x| flat_residuals(&program, x), params, &free, cfg.max_iters, 1e-13).params
        } else {
            params
        };
        let Some(pts) = program.evaluate(&params) else {
            last = Failure::Infeasible("a construction is undefined for the sampled parameters".into());
            continue;
        };
        match validate(&program, &pts, cfg) {
            Ok(v) => {
                return Ok(Diagram {
                    program,
                    params,
                    pts,
                    merged: v.merged,
                    seed,
                    scale: v.scale,
                    config: cfg.clone(),
                })
            }
            Err(f) => last = f,
        }
    }
    Err(last.into())
}

/// Builds a diagram for the constructions of `p` with the default tolerances.
pub fn build_diagram(p: &Problem, seed: u64) -> Result<Diagram, DiagramError> {
    Diagram::build(&p.constructions, seed, &DiagramConfig::default())
}

/// Re-optimizes `d` so that `extra` also holds. An empty `extra` returns `d` unchanged.
pub fn adjust_globally(d: &Diagram, extra: &[Predicate]) -> Result<Diagram, DiagramError> {
    if extra.is_empty() {
        return Ok(d.clone());
    }
    let mut program = d.program.clone();
    for q in extra {
        program.push_extra(q)?;
    }
    search(program, d.seed, &d.config, Start::Adjust { base: &d.params })
}

/// True iff `q` holds on `d` within the check tolerance.
pub fn check_predicate(d: &Diagram, q: &Predicate) -> Result<bool, DiagramError> {
    Ok(d.violation(q)? < d.config.tol_check)
}

/// Places the points of `s` without moving existing ones.
pub fn add_point(d: &Diagram, s: &ConstructionStmt) -> Result<Diagram, DiagramError> {
    d.add(s)
}

impl Diagram {
    pub fn build(stmts: &[ConstructionStmt], seed: u64, cfg: &DiagramConfig) -> Result<Diagram, DiagramError> {
        let mut program = Program::default();
        for s in stmts {
            program.push(s)?;
        }
        search(program, seed, cfg, Start::Sample)
    }

    pub fn add(&self, s: &ConstructionStmt) -> Result<Diagram, DiagramError> {
        let mut program = self.program.clone();
        let first_step = program.steps.len();
        program.push(s)?;
        let mut out = search(program, self.seed, &self.config, Start::Extend { base: &self.params, first_step })?;
        out.merged.extend(self.merged.iter().cloned());
        Ok(out)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &DiagramConfig {
        &self.config
    }

    /// Largest pairwise distance; every tolerance is relative to it.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// Point names in construction order.
    pub fn names(&self) -> &[PointName] {
        &self.program.names
    }

    pub fn index_of(&self, p: &PointName) -> Option<usize> {
        self.program.index.get(p).copied()
    }

    pub fn pt(&self, i: usize) -> Pt {
        self.pts[i]
    }

    pub fn coord(&self, p: &PointName) -> Option<Pt> {
        self.index_of(p).map(|i| self.pts[i])
    }

    pub fn coords(&self) -> impl Iterator<Item = (&PointName, Pt)> + '_ {
        self.program.names.iter().zip(self.pts.iter().copied())
    }

    /// Coincident pairs, each ordered by name.
    pub fn merged(&self) -> &BTreeSet<(PointName, PointName)> {
        &self.merged
    }

    pub fn is_merged(&self, a: &PointName, b: &PointName) -> bool {
        let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        self.merged.contains(&key)
    }

    pub fn statements(&self) -> impl Iterator<Item = &ConstructionStmt> + '_ {
        self.program.steps.iter().map(|s| &s.stmt)
    }

    /// Predicates imposed through [`adjust_globally`].
    pub fn extra(&self) -> impl Iterator<Item = &Predicate> + '_ {
        self.program.extra.iter().map(|(q, _)| q)
    }

    pub fn residual(&self) -> Residual {
        let mut per_constraint = BTreeMap::new();
        let mut value: f64 = 0.0;
        for (label, r) in self.program.constraint_residuals(&self.pts, self.scale) {
            let v = r.iter().fold(0.0, |m: f64, x| if x.is_nan() { f64::INFINITY } else { m.max(libm::fabs(*x)) });
            value = value.max(v);
            per_constraint.insert(label, v);
        }
        Residual { value, per_constraint }
    }

    /// Scale-normalized violation of `q` (0 when it holds exactly).
    pub fn violation(&self, q: &Predicate) -> Result<f64, DiagramError> {
        let pts = q
            .args
            .iter()
            .map(|a| self.coord(a).ok_or_else(|| DiagramError::UnknownPoint(a.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(residual::violation(q.kind, &pts, self.scale))
    }

    /// Violation of `kind` over points given by index.
    pub fn violation_at(&self, kind: PredicateKind, idx: &[usize]) -> f64 {
        let pts: Vec<Pt> = idx.iter().map(|&i| self.pts[i]).collect();
        residual::violation(kind, &pts, self.scale)
    }

    pub fn holds_at(&self, kind: PredicateKind, idx: &[usize]) -> bool {
        self.violation_at(kind, idx) < self.config.tol_check
    }
}
