//! Exact linear reasoning over directions and lengths.
//!
//! Directions of lines are variables in R/πZ measured in units of π; a
//! relation in the angle space holds modulo 1 and is combined with integer
//! multipliers only. Lengths enter through their logarithms, so equal
//! lengths and equal ratios become homogeneous linear relations combined
//! over the rationals. A formal variable [`Var::Log2`] stands for `log 2` in
//! midpoint encodings.

mod encode;
mod system;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{PointName, Predicate, PredicateKind};

pub(crate) use encode::{encode_with, Enc};
pub(crate) use system::{AngleSystem, Combo, Contradiction, RatioSystem, Sparse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Angle,
    LogRatio,
}

/// A variable of the linear systems. Pairs are stored with the smaller name first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Dir(PointName, PointName),
    LogLen(PointName, PointName),
    Log2,
}

impl Var {
    pub fn dir(a: &PointName, b: &PointName) -> Var {
        if a <= b {
            Var::Dir(a.clone(), b.clone())
        } else {
            Var::Dir(b.clone(), a.clone())
        }
    }

    pub fn log_len(a: &PointName, b: &PointName) -> Var {
        if a <= b {
            Var::LogLen(a.clone(), b.clone())
        } else {
            Var::LogLen(b.clone(), a.clone())
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Dir(a, b) => write!(f, "dir({a},{b})"),
            Var::LogLen(a, b) => write!(f, "log|{a}{b}|"),
            Var::Log2 => f.write_str("log2"),
        }
    }
}

/// `Σ coefficient·variable = constant`, modulo 1 in the angle space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRelation {
    pub space: Space,
    pub terms: BTreeMap<Var, BigRational>,
    pub constant: BigRational,
}

impl fmt::Display for LinearRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            f.write_str("0")?;
        }
        for (i, (v, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else if i > 0 { "+" } else { "" };
            let mag = c.abs();
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(sign)?;
            if i > 0 && !sign.is_empty() {
                f.write_str(" ")?;
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
        }
        write!(f, " = {}", self.constant)?;
        if self.space == Space::Angle {
            f.write_str(" (mod 1)")?;
        }
        Ok(())
    }
}

/// One encoded relation of a derived predicate, written as a combination
/// of the input relations (keyed by their position in the input list).
#[derive(Debug, Clone, PartialEq)]
pub struct CertificatePart {
    pub relation: LinearRelation,
    pub combination: BTreeMap<usize, BigRational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub derived: Predicate,
    pub parts: Vec<CertificatePart>,
}

#[derive(Serialize)]
struct PartRepr {
    relation: String,
    combination: BTreeMap<usize, String>,
}

impl Serialize for Certificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let parts: Vec<PartRepr> = self
            .parts
            .iter()
            .map(|p| PartRepr {
                relation: p.relation.to_string(),
                combination: p.combination.iter().map(|(k, v)| (*k, v.to_string())).collect(),
            })
            .collect();
        let mut st = s.serialize_struct("Certificate", 2)?;
        st.serialize_field("derived", &self.derived)?;
        st.serialize_field("parts", &parts)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("{} has no linear encoding", .0.name())]
    NotLinearizable(PredicateKind),
    #[error("inconsistent system: a combination of {} relations yields 0 = nonzero", .combination.len())]
    InconsistentSystem { combination: BTreeMap<usize, BigRational> },
    #[error("angle-space coefficients must be integers")]
    NonIntegerAngleCoefficient,
    #[error("log-ratio relations must have a zero constant")]
    InhomogeneousRatio,
}

fn to_relation(e: Enc<Var>) -> LinearRelation {
    LinearRelation {
        space: e.space,
        terms: e.terms.into_iter().map(|(v, c)| (v, BigRational::from_integer(c.into()))).collect(),
        constant: if e.half { BigRational::new(1.into(), 2.into()) } else { BigRational::zero() },
    }
}

/// Linear encodings of `p`; tautological relations are dropped.
pub fn encode(p: &Predicate) -> Result<Vec<LinearRelation>, AlgebraError> {
    let encs = encode_with(p.kind, &p.args, Var::dir, Var::log_len, Var::Log2)?;
    Ok(encs.into_iter().map(to_relation).collect())
}

struct Interner {
    ids: BTreeMap<Var, u32>,
}

impl Interner {
    fn angle_row(&self, r: &LinearRelation) -> Result<Sparse<BigInt>, AlgebraError> {
        r.terms
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(v, c)| {
                if c.is_integer() {
                    Ok((self.ids[v], c.to_integer()))
                } else {
                    Err(AlgebraError::NonIntegerAngleCoefficient)
                }
            })
            .collect()
    }

    fn ratio_row(&self, r: &LinearRelation) -> Sparse<BigRational> {
        r.terms.iter().filter(|(_, c)| !c.is_zero()).map(|(v, c)| (self.ids[v], c.clone())).collect()
    }
}

fn int_combo(c: Combo<BigInt>) -> BTreeMap<usize, BigRational> {
    c.into_iter().map(|(k, v)| (k, BigRational::from_integer(v))).collect()
}

/// For each target, the combination of `relations` (by position) that
/// yields it, or `None` when it is not implied.
///
/// Relations in the log-ratio space must be homogeneous; a nonzero constant
/// with no terms is reported as an inconsistency.
pub fn implied(
    relations: &[LinearRelation],
    targets: &[LinearRelation],
) -> Result<Vec<Option<BTreeMap<usize, BigRational>>>, AlgebraError> {
    let mut vars = BTreeSet::new();
    for r in relations.iter().chain(targets) {
        vars.extend(r.terms.keys().cloned());
    }
    // Ids follow the variable order, so elimination is lexicographic.
    let interner = Interner { ids: vars.into_iter().enumerate().map(|(i, v)| (v, i as u32)).collect() };
    let mut angle = AngleSystem::default();
    let mut ratio = RatioSystem::default();
    for (id, r) in relations.iter().enumerate() {
        match r.space {
            Space::Angle => {
                angle
                    .insert(interner.angle_row(r)?, r.constant.clone(), id)
                    .map_err(|Contradiction { combo }| AlgebraError::InconsistentSystem { combination: int_combo(combo) })?;
            }
            Space::LogRatio => {
                let row = interner.ratio_row(r);
                if !r.constant.is_zero() {
                    // Nonzero constants never arise from encodings; a pure
                    // constant row is a contradiction, anything else is
                    // outside the supported fragment.
                    let mut combination = BTreeMap::new();
                    combination.insert(id, BigRational::one());
                    if row.is_empty() {
                        return Err(AlgebraError::InconsistentSystem { combination });
                    }
                    return Err(AlgebraError::InhomogeneousRatio);
                }
                ratio.insert(row, id);
            }
        }
    }
    targets
        .iter()
        .map(|t| {
            Ok(match t.space {
                Space::Angle => angle.reduce(&interner.angle_row(t)?, &t.constant).map(int_combo),
                Space::LogRatio if t.constant.is_zero() => ratio.reduce(&interner.ratio_row(t)),
                Space::LogRatio => None,
            })
        })
        .collect()
}

/// Returns the queries implied by `relations`, each with a certificate.
/// Queries without a linear encoding are never derived.
pub fn close(relations: &[LinearRelation], queries: &[Predicate]) -> Result<Vec<(Predicate, Certificate)>, AlgebraError> {
    let encoded: Vec<(Predicate, Vec<LinearRelation>)> =
        queries.iter().filter_map(|q| encode(q).ok().map(|e| (q.clone(), e))).collect();
    let targets: Vec<LinearRelation> = encoded.iter().flat_map(|(_, e)| e.iter().cloned()).collect();
    let mut answers = implied(relations, &targets)?.into_iter();
    let mut out = Vec::new();
    for (q, encs) in encoded {
        let mut parts = Vec::new();
        let mut all = true;
        for relation in encs {
            match answers.next().flatten() {
                Some(combination) => parts.push(CertificatePart { relation, combination }),
                None => all = false,
            }
        }
        if all {
            out.push((q.clone(), Certificate { derived: q, parts }));
        }
    }
    Ok(out)
}

/// Recomputes every part of `cert` from `sources` exactly.
pub fn verify_certificate(sources: &[LinearRelation], cert: &Certificate) -> bool {
    let Ok(expected) = encode(&cert.derived) else {
        return false;
    };
    if expected.len() != cert.parts.len() {
        return false;
    }
    cert.parts.iter().zip(expected.iter()).all(|(part, want)| {
        if part.relation != *want {
            return false;
        }
        let mut terms: BTreeMap<Var, BigRational> = BTreeMap::new();
        let mut constant = BigRational::zero();
        for (id, m) in &part.combination {
            let Some(src) = sources.get(*id) else {
                return false;
            };
            if src.space != want.space || (want.space == Space::Angle && !m.is_integer()) {
                return false;
            }
            for (v, c) in &src.terms {
                let e = terms.entry(v.clone()).or_insert_with(BigRational::zero);
                *e += m * c;
            }
            constant += m * &src.constant;
        }
        terms.retain(|_, c| !c.is_zero());
        let want_terms: BTreeMap<Var, BigRational> =
            want.terms.iter().filter(|(_, c)| !c.is_zero()).map(|(v, c)| (v.clone(), c.clone())).collect();
        if terms != want_terms {
            return false;
        }
        let diff = constant - &want.constant;
        match want.space {
            Space::Angle => diff.is_integer(),
            Space::LogRatio => diff.is_zero(),
        }
    })
}
