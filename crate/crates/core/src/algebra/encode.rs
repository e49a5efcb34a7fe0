//! Linear encodings of predicates over direction and log-length variables.

use alloc::vec;
use alloc::vec::Vec;

use super::{AlgebraError, Space};
use crate::dsl::PredicateKind;

/// A small-integer relation `Σ c·v = constant`, where the angle-space
/// constant is 0 or 1/2 (in units of π).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Enc<V> {
    pub space: Space,
    pub terms: Vec<(V, i64)>,
    pub half: bool,
}

impl<V: Ord + Clone> Enc<V> {
    fn new(space: Space, mut terms: Vec<(V, i64)>, half: bool) -> Self {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(V, i64)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            match merged.last_mut() {
                Some((w, d)) if *w == v => *d += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|(_, c)| *c != 0);
        Enc { space, terms: merged, half }
    }

    pub fn is_tautology(&self) -> bool {
        self.terms.is_empty() && !self.half
    }
}

/// Encodes `kind(args)`; `dir` and `len` name the variable of a point pair.
pub(crate) fn encode_with<P, V, D, L>(
    kind: PredicateKind,
    args: &[P],
    mut dir: D,
    mut len: L,
    log2: V,
) -> Result<Vec<Enc<V>>, AlgebraError>
where
    V: Ord + Clone,
    D: FnMut(&P, &P) -> V,
    L: FnMut(&P, &P) -> V,
{
    use PredicateKind::*;
    let a = args;
    let ang = |t: Vec<(V, i64)>, half| Enc::new(Space::Angle, t, half);
    let rat = |t: Vec<(V, i64)>| Enc::new(Space::LogRatio, t, false);
    let out = match kind {
        Para => vec![ang(vec![(dir(&a[0], &a[1]), 1), (dir(&a[2], &a[3]), -1)], false)],
        Perp => vec![ang(vec![(dir(&a[0], &a[1]), 1), (dir(&a[2], &a[3]), -1)], true)],
        EqAngle => vec![ang(
            vec![
                (dir(&a[2], &a[3]), 1),
                (dir(&a[0], &a[1]), -1),
                (dir(&a[6], &a[7]), -1),
                (dir(&a[4], &a[5]), 1),
            ],
            false,
        )],
        Cong => vec![rat(vec![(len(&a[0], &a[1]), 1), (len(&a[2], &a[3]), -1)])],
        EqRatio => vec![rat(vec![
            (len(&a[0], &a[1]), 1),
            (len(&a[2], &a[3]), -1),
            (len(&a[4], &a[5]), -1),
            (len(&a[6], &a[7]), 1),
        ])],
        Coll => {
            let base = dir(&a[0], &a[1]);
            let mut v = Vec::new();
            for i in 0..a.len() {
                for j in i + 1..a.len() {
                    if (i, j) != (0, 1) {
                        v.push(ang(vec![(dir(&a[i], &a[j]), 1), (base.clone(), -1)], false));
                    }
                }
            }
            v
        }
        Midp => {
            let (m, x, y) = (&a[0], &a[1], &a[2]);
            let base = dir(x, y);
            vec![
                rat(vec![(len(m, x), 1), (len(m, y), -1)]),
                rat(vec![(len(x, y), 1), (len(m, x), -1), (log2, -1)]),
                ang(vec![(dir(m, x), 1), (base.clone(), -1)], false),
                ang(vec![(dir(m, y), 1), (base, -1)], false),
            ]
        }
        Circle => {
            let r = len(&a[0], &a[1]);
            (2..a.len()).map(|i| rat(vec![(len(&a[0], &a[i]), 1), (r.clone(), -1)])).collect()
        }
        ConTri => vec![
            rat(vec![(len(&a[0], &a[1]), 1), (len(&a[3], &a[4]), -1)]),
            rat(vec![(len(&a[1], &a[2]), 1), (len(&a[4], &a[5]), -1)]),
            rat(vec![(len(&a[2], &a[0]), 1), (len(&a[5], &a[3]), -1)]),
        ],
        SimTri => vec![
            rat(vec![
                (len(&a[0], &a[1]), 1),
                (len(&a[1], &a[2]), -1),
                (len(&a[3], &a[4]), -1),
                (len(&a[4], &a[5]), 1),
            ]),
            rat(vec![
                (len(&a[1], &a[2]), 1),
                (len(&a[2], &a[0]), -1),
                (len(&a[4], &a[5]), -1),
                (len(&a[5], &a[3]), 1),
            ]),
        ],
        Cyclic | Idc => return Err(AlgebraError::NotLinearizable(kind)),
    };
    Ok(out.into_iter().filter(|e| !e.is_tautology()).collect())
}
