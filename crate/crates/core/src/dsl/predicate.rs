//! Point names, predicate kinds and symmetry-group canonical forms.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ParseError;

/// A lowercase point identifier matching `[a-z][a-z0-9_]*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PointName(String);

impl PointName {
    pub fn new(name: &str) -> Result<Self, ParseError> {
        let lower = name.to_lowercase();
        if is_identifier(&lower) {
            Ok(PointName(lower))
        } else {
            Err(ParseError::InvalidName(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl fmt::Display for PointName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for PointName {
    type Error = ParseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        PointName::new(&s)
    }
}

impl From<PointName> for String {
    fn from(p: PointName) -> String {
        p.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateKind {
    Coll,
    Para,
    Perp,
    Cong,
    EqAngle,
    EqRatio,
    Cyclic,
    Circle,
    Midp,
    SimTri,
    ConTri,
    Idc,
}

/// Allowed argument count for a predicate kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Exactly(usize),
    AtLeast(usize),
}

impl Arity {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Arity::Exactly(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arity::Exactly(k) => write!(f, "{k}"),
            Arity::AtLeast(k) => write!(f, "at least {k}"),
        }
    }
}

impl PredicateKind {
    pub const ALL: [PredicateKind; 12] = [
        PredicateKind::Coll,
        PredicateKind::Para,
        PredicateKind::Perp,
        PredicateKind::Cong,
        PredicateKind::EqAngle,
        PredicateKind::EqRatio,
        PredicateKind::Cyclic,
        PredicateKind::Circle,
        PredicateKind::Midp,
        PredicateKind::SimTri,
        PredicateKind::ConTri,
        PredicateKind::Idc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PredicateKind::Coll => "coll",
            PredicateKind::Para => "para",
            PredicateKind::Perp => "perp",
            PredicateKind::Cong => "cong",
            PredicateKind::EqAngle => "eqangle",
            PredicateKind::EqRatio => "eqratio",
            PredicateKind::Cyclic => "cyclic",
            PredicateKind::Circle => "circle",
            PredicateKind::Midp => "midp",
            PredicateKind::SimTri => "simtri",
            PredicateKind::ConTri => "contri",
            PredicateKind::Idc => "idc",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        PredicateKind::ALL.iter().copied().find(|k| k.name() == name)
    }

    pub fn arity(self) -> Arity {
        match self {
            PredicateKind::Coll => Arity::AtLeast(3),
            PredicateKind::Cyclic => Arity::AtLeast(4),
            PredicateKind::Para | PredicateKind::Perp | PredicateKind::Cong => Arity::Exactly(4),
            PredicateKind::Circle => Arity::Exactly(4),
            PredicateKind::EqAngle | PredicateKind::EqRatio => Arity::Exactly(8),
            PredicateKind::Midp => Arity::Exactly(3),
            PredicateKind::SimTri | PredicateKind::ConTri => Arity::Exactly(6),
            PredicateKind::Idc => Arity::Exactly(2),
        }
    }

    /// Groups of argument positions whose points must be pairwise distinct.
    pub(crate) fn distinct_slots(self, n: usize) -> Vec<Vec<usize>> {
        use alloc::vec;
        match self {
            PredicateKind::Coll | PredicateKind::Cyclic | PredicateKind::Circle | PredicateKind::Midp
            | PredicateKind::Idc => vec![(0..n).collect()],
            PredicateKind::Para | PredicateKind::Perp | PredicateKind::Cong => vec![vec![0, 1], vec![2, 3]],
            PredicateKind::EqAngle | PredicateKind::EqRatio => {
                vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]]
            }
            PredicateKind::SimTri | PredicateKind::ConTri => vec![vec![0, 1, 2], vec![3, 4, 5]],
        }
    }
}

impl fmt::Display for PredicateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A geometric predicate over named points.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Predicate {
    pub kind: PredicateKind,
    pub args: Vec<PointName>,
}

impl Predicate {
    /// Builds a predicate, checking arity and slot distinctness.
    pub fn new(kind: PredicateKind, args: Vec<PointName>) -> Result<Self, ParseError> {
        if !kind.arity().accepts(args.len()) {
            return Err(ParseError::Arity {
                what: kind.name().to_string(),
                expected: kind.arity().to_string(),
                found: args.len(),
                pos: 0,
            });
        }
        for slot in kind.distinct_slots(args.len()) {
            for (i, &a) in slot.iter().enumerate() {
                for &b in &slot[i + 1..] {
                    if args[a] == args[b] {
                        return Err(ParseError::RepeatedInSlot {
                            predicate: kind.name().to_string(),
                            point: args[a].to_string(),
                        });
                    }
                }
            }
        }
        Ok(Predicate { kind, args })
    }

    /// Convenience constructor from string names; panics on invalid input.
    pub fn parse_unchecked(kind: PredicateKind, names: &[&str]) -> Self {
        let args = names.iter().map(|n| PointName::new(n).expect("valid point name")).collect();
        Predicate::new(kind, args).expect("valid predicate")
    }

    /// Canonical representative under the predicate's symmetry group.
    pub fn canonical(&self) -> Predicate {
        Predicate { kind: self.kind, args: canonical_args(self.kind, &self.args) }
    }

    pub fn points(&self) -> impl Iterator<Item = &PointName> {
        self.args.iter()
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

impl FromStr for Predicate {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        super::parse::parse_predicate(s)
    }
}

impl Serialize for Predicate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Predicate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Eight equivalent orderings of the four slots of `A-B = C-D` (angles) or `A/B = C/D` (ratios).
pub(crate) const QUAD_ORBIT: [[usize; 4]; 8] = [
    [0, 1, 2, 3],
    [2, 3, 0, 1],
    [1, 0, 3, 2],
    [3, 2, 1, 0],
    [0, 2, 1, 3],
    [1, 3, 0, 2],
    [2, 0, 3, 1],
    [3, 1, 2, 0],
];

pub(crate) const TRI_PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn sorted_pair<T: Ord + Clone>(a: &T, b: &T) -> [T; 2] {
    if a <= b {
        [a.clone(), b.clone()]
    } else {
        [b.clone(), a.clone()]
    }
}

/// Canonical argument order for any ordered point type.
pub(crate) fn canonical_args<T: Ord + Clone>(kind: PredicateKind, args: &[T]) -> Vec<T> {
    match kind {
        PredicateKind::Coll | PredicateKind::Cyclic | PredicateKind::Idc => {
            let mut v = args.to_vec();
            v.sort();
            v
        }
        PredicateKind::Circle | PredicateKind::Midp => {
            let mut rest = args[1..].to_vec();
            rest.sort();
            let mut v = Vec::with_capacity(args.len());
            v.push(args[0].clone());
            v.extend(rest);
            v
        }
        PredicateKind::Para | PredicateKind::Perp | PredicateKind::Cong => {
            let s1 = sorted_pair(&args[0], &args[1]);
            let s2 = sorted_pair(&args[2], &args[3]);
            let (x, y) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            let mut v = x.to_vec();
            v.extend(y);
            v
        }
        PredicateKind::EqAngle | PredicateKind::EqRatio => {
            let segs: Vec<[T; 2]> = (0..4).map(|i| sorted_pair(&args[2 * i], &args[2 * i + 1])).collect();
            QUAD_ORBIT
                .iter()
                .map(|perm| perm.iter().flat_map(|&i| segs[i].iter().cloned()).collect::<Vec<T>>())
                .min()
                .expect("orbit is non-empty")
        }
        PredicateKind::SimTri | PredicateKind::ConTri => {
            let mut best: Option<Vec<T>> = None;
            for p in TRI_PERMS.iter() {
                for swap in [false, true] {
                    let (t1, t2) = if swap { (&args[3..6], &args[0..3]) } else { (&args[0..3], &args[3..6]) };
                    let cand: Vec<T> = p.iter().map(|&i| t1[i].clone()).chain(p.iter().map(|&i| t2[i].clone())).collect();
                    if best.as_ref().is_none_or(|b| cand < *b) {
                        best = Some(cand);
                    }
                }
            }
            best.expect("non-empty")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Predicate {
        s.parse().unwrap()
    }

    #[test]
    fn cong_symmetries_share_canonical_form() {
        assert_eq!(p("cong a b c d").canonical(), p("cong d c b a").canonical());
        assert_eq!(p("cong a b c d").canonical(), p("cong b a d c").canonical());
        assert_ne!(p("cong a b c d").canonical(), p("cong a c b d").canonical());
    }

    #[test]
    fn eqangle_orbit_is_closed() {
        let base = p("eqangle a b c d e f g h");
        let c = base.canonical();
        for s in [
            "eqangle e f g h a b c d",
            "eqangle c d a b g h e f",
            "eqangle a b e f c d g h",
            "eqangle b a d c f e h g",
        ] {
            assert_eq!(p(s).canonical(), c, "{s}");
        }
        assert_ne!(p("eqangle a b c d g h e f").canonical(), c);
    }

    #[test]
    fn simtri_correspondence_is_preserved() {
        let c = p("simtri a b c d e f").canonical();
        assert_eq!(p("simtri b c a e f d").canonical(), c);
        assert_eq!(p("simtri d e f a b c").canonical(), c);
        assert_ne!(p("simtri a b c e d f").canonical(), c);
    }

    #[test]
    fn arity_and_slot_checks() {
        assert!(matches!("coll a b".parse::<Predicate>(), Err(ParseError::Arity { .. })));
        assert!(matches!("cong a a b c".parse::<Predicate>(), Err(ParseError::RepeatedInSlot { .. })));
        assert!("cong a b a c".parse::<Predicate>().is_ok());
        assert!("coll a b c d e".parse::<Predicate>().is_ok());
    }

    #[test]
    fn point_names_fold_case() {
        assert_eq!(PointName::new("Ab_1").unwrap().as_str(), "ab_1");
        assert!(PointName::new("1a").is_err());
        assert!(PointName::new("").is_err());
    }
}
