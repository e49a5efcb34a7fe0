//! Construction vocabulary: constructors, statements and the premises they introduce.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::predicate::{PointName, Predicate, PredicateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constructor {
    Triangle,
    Free,
    OnLine,
    OnCircle,
    Midpoint,
    Foot,
    AngleBisector,
    PerpBisector,
    Circumcenter,
    Incenter,
    Centroid,
    Reflect,
    IntersectionLl,
    IntersectionLc,
    IntersectionCc,
    OnSegment,
}

/// Shape of a constructor's signature.
#[derive(Debug, Clone, Copy)]
pub struct Signature {
    pub new_points: usize,
    pub point_args: usize,
    /// Accepted counts of trailing numeric literals.
    pub numeric_args: &'static [usize],
    /// Free real parameters consumed when the statement is placed at random.
    pub dof: usize,
}

impl Constructor {
    pub const ALL: [Constructor; 16] = [
        Constructor::Triangle,
        Constructor::Free,
        Constructor::OnLine,
        Constructor::OnCircle,
        Constructor::Midpoint,
        Constructor::Foot,
        Constructor::AngleBisector,
        Constructor::PerpBisector,
        Constructor::Circumcenter,
        Constructor::Incenter,
        Constructor::Centroid,
        Constructor::Reflect,
        Constructor::IntersectionLl,
        Constructor::IntersectionLc,
        Constructor::IntersectionCc,
        Constructor::OnSegment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Constructor::Triangle => "triangle",
            Constructor::Free => "free",
            Constructor::OnLine => "on_line",
            Constructor::OnCircle => "on_circle",
            Constructor::Midpoint => "midpoint",
            Constructor::Foot => "foot",
            Constructor::AngleBisector => "angle_bisector",
            Constructor::PerpBisector => "perp_bisector",
            Constructor::Circumcenter => "circumcenter",
            Constructor::Incenter => "incenter",
            Constructor::Centroid => "centroid",
            Constructor::Reflect => "reflect",
            Constructor::IntersectionLl => "intersection_ll",
            Constructor::IntersectionLc => "intersection_lc",
            Constructor::IntersectionCc => "intersection_cc",
            Constructor::OnSegment => "on_segment",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Constructor::ALL.iter().copied().find(|c| c.name() == name)
    }

    pub fn signature(self) -> Signature {
        const NONE: &[usize] = &[0];
        const OPT1: &[usize] = &[0, 1];
        let sig = |new_points, point_args, numeric_args, dof| Signature { new_points, point_args, numeric_args, dof };
        match self {
            Constructor::Triangle => sig(3, 0, NONE, 6),
            Constructor::Free => sig(1, 0, &[0, 2], 2),
            Constructor::OnLine => sig(1, 2, OPT1, 1),
            Constructor::OnCircle => sig(1, 2, OPT1, 1),
            Constructor::Midpoint => sig(1, 2, NONE, 0),
            Constructor::Foot => sig(1, 3, NONE, 0),
            Constructor::AngleBisector => sig(1, 3, OPT1, 1),
            Constructor::PerpBisector => sig(1, 2, OPT1, 1),
            Constructor::Circumcenter => sig(1, 3, NONE, 0),
            Constructor::Incenter => sig(1, 3, NONE, 0),
            Constructor::Centroid => sig(1, 3, NONE, 0),
            Constructor::Reflect => sig(1, 3, NONE, 0),
            Constructor::IntersectionLl => sig(1, 4, NONE, 0),
            Constructor::IntersectionLc => sig(1, 4, NONE, 0),
            Constructor::IntersectionCc => sig(1, 3, NONE, 0),
            Constructor::OnSegment => sig(1, 2, OPT1, 1),
        }
    }

    /// Point-argument positions that must be pairwise distinct.
    pub(crate) fn distinct_args(self) -> Vec<Vec<usize>> {
        match self {
            Constructor::IntersectionLl => vec![vec![0, 1], vec![2, 3]],
            Constructor::IntersectionLc => vec![vec![0, 1], vec![2, 3]],
            Constructor::OnCircle => vec![vec![0, 1]],
            _ => {
                let n = self.signature().point_args;
                vec![(0..n).collect()]
            }
        }
    }

    /// Facts a statement with this constructor asserts about `new` given point `args`.
    pub fn premises(self, new: &[PointName], args: &[PointName]) -> Vec<Predicate> {
        use PredicateKind::*;
        let mk = |kind, pts: Vec<&PointName>| Predicate { kind, args: pts.into_iter().cloned().collect() };
        let x = new.first();
        match (self, x) {
            (Constructor::Triangle, _) | (Constructor::Free, _) | (Constructor::Centroid, _) => Vec::new(),
            (_, None) => Vec::new(),
            (Constructor::OnLine, Some(x)) | (Constructor::OnSegment, Some(x)) => {
                vec![mk(Coll, vec![x, &args[0], &args[1]])]
            }
            (Constructor::OnCircle, Some(x)) => vec![mk(Cong, vec![&args[0], x, &args[0], &args[1]])],
            (Constructor::Midpoint, Some(x)) => vec![mk(Midp, vec![x, &args[0], &args[1]])],
            (Constructor::Foot, Some(x)) => vec![
                mk(Perp, vec![&args[0], x, &args[1], &args[2]]),
                mk(Coll, vec![x, &args[1], &args[2]]),
            ],
            (Constructor::AngleBisector, Some(x)) => {
                let (a, b, c) = (&args[0], &args[1], &args[2]);
                vec![mk(EqAngle, vec![b, a, b, x, b, x, b, c])]
            }
            (Constructor::PerpBisector, Some(x)) => vec![mk(Cong, vec![x, &args[0], x, &args[1]])],
            (Constructor::Circumcenter, Some(x)) => vec![
                mk(Cong, vec![x, &args[0], x, &args[1]]),
                mk(Cong, vec![x, &args[0], x, &args[2]]),
            ],
            (Constructor::Incenter, Some(x)) => {
                let (a, b, c) = (&args[0], &args[1], &args[2]);
                vec![
                    mk(EqAngle, vec![a, b, a, x, a, x, a, c]),
                    mk(EqAngle, vec![b, c, b, x, b, x, b, a]),
                    mk(EqAngle, vec![c, a, c, x, c, x, c, b]),
                ]
            }
            (Constructor::Reflect, Some(x)) => {
                let (a, b, c) = (&args[0], &args[1], &args[2]);
                vec![mk(Perp, vec![a, x, b, c]), mk(Cong, vec![b, a, b, x]), mk(Cong, vec![c, a, c, x])]
            }
            (Constructor::IntersectionLl, Some(x)) => vec![
                mk(Coll, vec![x, &args[0], &args[1]]),
                mk(Coll, vec![x, &args[2], &args[3]]),
            ],
            (Constructor::IntersectionLc, Some(x)) => vec![
                mk(Coll, vec![x, &args[0], &args[1]]),
                mk(Cong, vec![&args[2], x, &args[2], &args[3]]),
            ],
            (Constructor::IntersectionCc, Some(x)) => vec![
                mk(Cong, vec![&args[0], x, &args[0], &args[2]]),
                mk(Cong, vec![&args[1], x, &args[1], &args[2]]),
            ],
        }
        .into_iter()
        .filter(|p| Predicate::new(p.kind, p.args.clone()).is_ok())
        .collect()
    }
}

impl fmt::Display for Constructor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A constructor argument: either a point or a numeric literal.
#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Point(PointName),
    Num(f64),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Point(p) => write!(f, "{p}"),
            Arg::Num(x) => write!(f, "{x}"),
        }
    }
}

/// One `constructor args...` clause.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub constructor: Constructor,
    pub args: Vec<Arg>,
}

impl Clause {
    pub fn point_args(&self) -> Vec<PointName> {
        self.args
            .iter()
            .filter_map(|a| match a {
                Arg::Point(p) => Some(p.clone()),
                Arg::Num(_) => None,
            })
            .collect()
    }

    pub fn numeric_args(&self) -> Vec<f64> {
        self.args
            .iter()
            .filter_map(|a| match a {
                Arg::Num(x) => Some(*x),
                Arg::Point(_) => None,
            })
            .collect()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.constructor.name())?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

/// `'!'? names '=' clause (',' clause)*`
///
/// The first clause places the new points; any further clauses are extra
/// constraints on the (single) new point that the diagram builder satisfies
/// by global adjustment.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionStmt {
    pub new_points: Vec<PointName>,
    pub constructor: Constructor,
    pub args: Vec<Arg>,
    pub allow_double: bool,
    pub constraints: Vec<Clause>,
}

impl ConstructionStmt {
    pub fn primary(&self) -> Clause {
        Clause { constructor: self.constructor, args: self.args.clone() }
    }

    pub fn clauses(&self) -> Vec<Clause> {
        let mut v = vec![self.primary()];
        v.extend(self.constraints.iter().cloned());
        v
    }

    /// Every point referenced as an argument in any clause.
    pub fn referenced_points(&self) -> Vec<PointName> {
        self.clauses().iter().flat_map(|c| c.point_args()).collect()
    }

    /// Premise facts contributed by every clause of the statement.
    pub fn premises(&self) -> Vec<Predicate> {
        let mut out = Vec::new();
        for clause in self.clauses() {
            for p in clause.constructor.premises(&self.new_points, &clause.point_args()) {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    pub fn is_over_constrained(&self) -> bool {
        !self.constraints.is_empty()
    }
}

impl fmt::Display for ConstructionStmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.allow_double {
            f.write_str("!")?;
        }
        let names: Vec<String> = self.new_points.iter().map(|p| alloc::format!("{p}")).collect();
        write!(f, "{} = {}", names.join(" "), self.primary())?;
        for c in &self.constraints {
            write!(f, ", {c}")?;
        }
        Ok(())
    }
}
