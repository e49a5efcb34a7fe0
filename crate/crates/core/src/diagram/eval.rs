//! Compiled construction programs: parameter layout, sampling and evaluation.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use super::geom::{self, Pt};
use super::residual::residuals;
use super::DiagramError;
use crate::dsl::{Arg, ConstructionStmt, Constructor, PointName, Predicate, PredicateKind};

/// Points on a segment stay this fraction away from either end.
const SEGMENT_MARGIN: f64 = 0.01;

#[derive(Debug, Clone)]
pub(crate) struct CompiledClause {
    pub constructor: Constructor,
    pub args: Vec<usize>,
    pub numeric: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Step {
    pub stmt: ConstructionStmt,
    /// Indices of the points the statement names.
    pub targets: Vec<usize>,
    /// False when the statement re-uses an existing name and only constrains it.
    pub places: bool,
    pub primary: CompiledClause,
    pub constraints: Vec<CompiledClause>,
    pub param_offset: usize,
    pub param_count: usize,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Program {
    pub names: Vec<PointName>,
    pub index: BTreeMap<PointName, usize>,
    pub steps: Vec<Step>,
    pub extra: Vec<(Predicate, Vec<usize>)>,
    pub n_params: usize,
}

fn compile_clause(
    index: &BTreeMap<PointName, usize>,
    constructor: Constructor,
    args: &[Arg],
) -> Result<CompiledClause, DiagramError> {
    let mut pts = Vec::new();
    let mut numeric = Vec::new();
    for a in args {
        match a {
            Arg::Point(p) => pts.push(*index.get(p).ok_or_else(|| DiagramError::UnknownPoint(p.to_string()))?),
            Arg::Num(x) => numeric.push(*x),
        }
    }
    Ok(CompiledClause { constructor, args: pts, numeric })
}

impl Program {
    pub fn resolve(&self, p: &PointName) -> Result<usize, DiagramError> {
        self.index.get(p).copied().ok_or_else(|| DiagramError::UnknownPoint(p.to_string()))
    }

    /// Appends a statement, allocating parameters for its free placement.
    pub fn push(&mut self, stmt: &ConstructionStmt) -> Result<(), DiagramError> {
        let primary = compile_clause(&self.index, stmt.constructor, &stmt.args)?;
        let constraints = stmt
            .constraints
            .iter()
            .map(|c| compile_clause(&self.index, c.constructor, &c.args))
            .collect::<Result<Vec<_>, _>>()?;
        let reuse = stmt.new_points.iter().any(|p| self.index.contains_key(p));
        let mut targets = Vec::new();
        for p in &stmt.new_points {
            match self.index.get(p) {
                Some(&i) => targets.push(i),
                None => {
                    let i = self.names.len();
                    self.names.push(p.clone());
                    self.index.insert(p.clone(), i);
                    targets.push(i);
                }
            }
        }
        let param_count = if reuse || !primary.numeric.is_empty() { 0 } else { stmt.constructor.signature().dof };
        let step = Step {
            stmt: stmt.clone(),
            targets,
            places: !reuse,
            primary,
            constraints,
            param_offset: self.n_params,
            param_count,
        };
        self.n_params += param_count;
        self.steps.push(step);
        Ok(())
    }

    pub fn push_extra(&mut self, q: &Predicate) -> Result<(), DiagramError> {
        let idx = q.args.iter().map(|a| self.resolve(a)).collect::<Result<Vec<_>, _>>()?;
        self.extra.push((q.clone(), idx));
        Ok(())
    }

    /// True when some residual term must be driven to zero numerically.
    pub fn has_constraints(&self) -> bool {
        !self.extra.is_empty() || self.steps.iter().any(|s| !s.places || !s.constraints.is_empty())
    }

    pub fn sample_step<R: Rng>(&self, step: &Step, rng: &mut R, out: &mut [f64]) {
        let p = &mut out[step.param_offset..step.param_offset + step.param_count];
        if p.is_empty() {
            return;
        }
        match step.stmt.constructor {
            Constructor::Triangle | Constructor::Free => {
                for v in p.iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
            }
            Constructor::OnLine => p[0] = rng.gen_range(-0.5..1.5),
            Constructor::OnSegment => p[0] = rng.gen_range(-2.0..2.0),
            Constructor::OnCircle => p[0] = rng.gen_range(0.0..2.0 * PI),
            Constructor::AngleBisector => p[0] = rng.gen_range(0.3..1.5),
            Constructor::PerpBisector => p[0] = rng.gen_range(-1.0..1.0),
            _ => {}
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut params = alloc::vec![0.0; self.n_params];
        for step in &self.steps {
            self.sample_step(step, rng, &mut params);
        }
        params
    }

    /// Coordinates of every point, or `None` where a construction is undefined.
    pub fn evaluate(&self, params: &[f64]) -> Option<Vec<Pt>> {
        let mut pts = alloc::vec![Pt::default(); self.names.len()];
        for step in &self.steps {
            if !step.places {
                continue;
            }
            let p = &params[step.param_offset..step.param_offset + step.param_count];
            let placed = place(&step.primary, &pts, p)?;
            for (k, &t) in step.targets.iter().enumerate() {
                if !placed[k].is_finite() {
                    return None;
                }
                pts[t] = placed[k];
            }
        }
        Some(pts)
    }

    /// Labelled residual components of every constraint clause and extra predicate.
    pub fn constraint_residuals(&self, pts: &[Pt], scale: f64) -> Vec<(String, Vec<f64>)> {
        let mut out = Vec::new();
        for (si, step) in self.steps.iter().enumerate() {
            let x = step.targets[0];
            let mut clauses: Vec<&CompiledClause> = step.constraints.iter().collect();
            if !step.places {
                clauses.insert(0, &step.primary);
            }
            for (ci, c) in clauses.into_iter().enumerate() {
                let r = clause_residual(c, x, pts, scale);
                if !r.is_empty() {
                    out.push((alloc::format!("{si}.{ci}: {}", step.stmt), r));
                }
            }
        }
        for (q, idx) in &self.extra {
            let p: Vec<Pt> = idx.iter().map(|&i| pts[i]).collect();
            out.push((alloc::format!("extra: {q}"), residuals(q.kind, &p, scale)));
        }
        out
    }
}

/// Residual of "point `x` satisfies clause `c`".
fn clause_residual(c: &CompiledClause, x: usize, pts: &[Pt], scale: f64) -> Vec<f64> {
    let s = if scale > 0.0 { scale } else { 1.0 };
    if c.constructor.signature().dof == 0 || !c.numeric.is_empty() {
        return match place(c, pts, &[]) {
            Some(target) => alloc::vec![(pts[x].x - target[0].x) / s, (pts[x].y - target[0].y) / s],
            None => alloc::vec![f64::NAN],
        };
    }
    // Locus clauses: the point must satisfy the clause's premises.
    let mut out = Vec::new();
    let a = &c.args;
    let mut add = |kind: PredicateKind, ix: &[usize]| {
        let p: Vec<Pt> = ix.iter().map(|&i| pts[i]).collect();
        out.extend(residuals(kind, &p, scale));
    };
    match c.constructor {
        Constructor::OnLine | Constructor::OnSegment => add(PredicateKind::Coll, &[x, a[0], a[1]]),
        Constructor::OnCircle => add(PredicateKind::Cong, &[a[0], x, a[0], a[1]]),
        Constructor::AngleBisector => add(PredicateKind::EqAngle, &[a[1], a[0], a[1], x, a[1], x, a[1], a[2]]),
        Constructor::PerpBisector => add(PredicateKind::Cong, &[x, a[0], x, a[1]]),
        _ => {}
    }
    out
}

fn sigmoid(s: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-s))
}

/// Places the points of `c` given earlier coordinates and its free parameters.
pub(crate) fn place(c: &CompiledClause, pts: &[Pt], params: &[f64]) -> Option<Vec<Pt>> {
    let arg = |k: usize| pts[c.args[k]];
    let param = |k: usize| c.numeric.get(k).copied().or_else(|| params.get(k).copied());
    let one = |p: Pt| Some(alloc::vec![p]);
    match c.constructor {
        Constructor::Triangle => {
            let v: Vec<f64> = (0..6).map(param).collect::<Option<_>>()?;
            Some(alloc::vec![Pt::new(v[0], v[1]), Pt::new(v[2], v[3]), Pt::new(v[4], v[5])])
        }
        Constructor::Free => one(Pt::new(param(0)?, param(1)?)),
        Constructor::OnLine => {
            let (a, b) = (arg(0), arg(1));
            one(a + (b - a) * param(0)?)
        }
        Constructor::OnSegment => {
            let (a, b) = (arg(0), arg(1));
            let f = match c.numeric.first() {
                Some(&f) => f,
                None => SEGMENT_MARGIN + (1.0 - 2.0 * SEGMENT_MARGIN) * sigmoid(param(0)?),
            };
            one(a + (b - a) * f)
        }
        Constructor::OnCircle => {
            let (o, a) = (arg(0), arg(1));
            one(o + (a - o).rotate(param(0)?))
        }
        Constructor::Midpoint => one(geom::midpoint(arg(0), arg(1))),
        Constructor::Foot => one(geom::foot(arg(0), arg(1), arg(2))?),
        Constructor::AngleBisector => {
            let (a, b, c2) = (arg(0), arg(1), arg(2));
            let dir = ((a - b).unit()? + (c2 - b).unit()?).unit()?;
            let len = 0.5 * (a.dist(b) + c2.dist(b));
            one(b + dir * (len * param(0)?))
        }
        Constructor::PerpBisector => {
            let (a, b) = (arg(0), arg(1));
            one(geom::midpoint(a, b) + (b - a).rot90() * param(0)?)
        }
        Constructor::Circumcenter => one(geom::circumcenter(arg(0), arg(1), arg(2))?),
        Constructor::Incenter => {
            let (a, b, c2) = (arg(0), arg(1), arg(2));
            let (la, lb, lc) = (b.dist(c2), c2.dist(a), a.dist(b));
            let p = la + lb + lc;
            if p == 0.0 || libm::fabs((b - a).cross(c2 - a)) < 1e-12 * p * p {
                return None;
            }
            one((a * la + b * lb + c2 * lc) * (1.0 / p))
        }
        Constructor::Centroid => one((arg(0) + arg(1) + arg(2)) * (1.0 / 3.0)),
        Constructor::Reflect => one(geom::reflect(arg(0), arg(1), arg(2))?),
        Constructor::IntersectionLl => one(geom::line_line(arg(0), arg(1), arg(2), arg(3))?),
        Constructor::IntersectionLc => {
            let (a, b, o, q) = (arg(0), arg(1), arg(2), arg(3));
            let [r1, r2] = geom::line_circle(a, b, o, o.dist(q))?;
            one(if r1.dist(a) >= r2.dist(a) { r1 } else { r2 })
        }
        Constructor::IntersectionCc => {
            let (o1, o2, a) = (arg(0), arg(1), arg(2));
            one(geom::reflect(a, o1, o2)?)
        }
    }
}
