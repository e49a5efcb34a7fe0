//! Incremental exact elimination.
//!
//! Rows are kept in echelon form keyed by their leading (smallest) variable.
//! Every row remembers which input relations it is a combination of, so a
//! successful membership query yields a certificate for free.
//!
//! The angle system works over the integers with constants taken modulo 1:
//! directions live in R/πZ, where dividing a relation by an integer is not
//! sound (2x = 0 does not imply x = 0). Insertion therefore combines rows with
//! extended-gcd steps, which keeps the rows a basis of the integer lattice the
//! inputs generate. The log-ratio system is an ordinary vector space over Q.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub(crate) type Sparse<T> = Vec<(u32, T)>;
pub(crate) type Combo<T> = BTreeMap<usize, T>;

/// `a*x + b*y` for sorted sparse vectors, dropping zeros.
pub(crate) fn lin_comb<T>(a: &T, x: &[(u32, T)], b: &T, y: &[(u32, T)]) -> Sparse<T>
where
    T: Clone + Zero + for<'r> core::ops::Mul<&'r T, Output = T>,
{
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let (v, val) = match (x.get(i), y.get(j)) {
            (Some((vx, cx)), Some((vy, cy))) if vx == vy => {
                i += 1;
                j += 1;
                (*vx, a.clone() * cx + b.clone() * cy)
            }
            (Some((vx, cx)), Some((vy, _))) if vx < vy => {
                i += 1;
                (*vx, a.clone() * cx)
            }
            (Some((vx, cx)), None) => {
                i += 1;
                (*vx, a.clone() * cx)
            }
            (_, Some((vy, cy))) => {
                j += 1;
                (*vy, b.clone() * cy)
            }
            (None, None) => unreachable!(),
        };
        if !val.is_zero() {
            out.push((v, val));
        }
    }
    out
}

pub(crate) fn combo_lin<T>(a: &T, x: &Combo<T>, b: &T, y: &Combo<T>) -> Combo<T>
where
    T: Clone + Zero + for<'r> core::ops::Mul<&'r T, Output = T>,
{
    let mut out = Combo::new();
    for (k, v) in x {
        let w = a.clone() * v;
        if !w.is_zero() {
            out.insert(*k, w);
        }
    }
    for (k, v) in y {
        let w = b.clone() * v;
        let e = out.entry(*k).or_insert_with(T::zero);
        *e = e.clone() + w;
        if e.is_zero() {
            out.remove(k);
        }
    }
    out
}

fn frac_mod1(q: &BigRational) -> BigRational {
    q - q.floor()
}

#[derive(Debug, Clone)]
struct AngleRow {
    terms: Sparse<BigInt>,
    constant: BigRational,
    combo: Combo<BigInt>,
}

impl AngleRow {
    fn lin(a: &BigInt, x: &AngleRow, b: &AngleRow, bb: &BigInt) -> AngleRow {
        AngleRow {
            terms: lin_comb(a, &x.terms, bb, &b.terms),
            constant: frac_mod1(
                &(BigRational::from_integer(a.clone()) * &x.constant + BigRational::from_integer(bb.clone()) * &b.constant),
            ),
            combo: combo_lin(a, &x.combo, bb, &b.combo),
        }
    }

    fn negate(&mut self) {
        for (_, c) in &mut self.terms {
            *c = -c.clone();
        }
        self.constant = frac_mod1(&-self.constant.clone());
        for c in self.combo.values_mut() {
            *c = -c.clone();
        }
    }
}

/// An integer combination of inputs whose variable part vanishes while the
/// constant does not: the inputs contradict each other.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Contradiction<T> {
    pub combo: Combo<T>,
}

/// Directions modulo 1 (in units of π) over the integer lattice.
#[derive(Debug, Clone, Default)]
pub(crate) struct AngleSystem {
    rows: BTreeMap<u32, AngleRow>,
}

impl AngleSystem {
    /// Adds `Σ terms = constant (mod 1)` labelled `id`. Returns whether the
    /// lattice grew.
    pub fn insert(
        &mut self,
        terms: Sparse<BigInt>,
        constant: BigRational,
        id: usize,
    ) -> Result<bool, Contradiction<BigInt>> {
        let mut combo = Combo::new();
        combo.insert(id, BigInt::one());
        let mut row = AngleRow { terms, constant: frac_mod1(&constant), combo };
        let mut grew = false;
        loop {
            let Some((v, a)) = row.terms.first().cloned() else {
                if row.constant.is_zero() {
                    return Ok(grew);
                }
                return Err(Contradiction { combo: row.combo });
            };
            if a.is_negative() {
                row.negate();
                continue;
            }
            let Some(existing) = self.rows.get(&v) else {
                self.rows.insert(v, row);
                return Ok(true);
            };
            let b = existing.terms[0].1.clone();
            let (q, r) = a.div_rem(&b);
            if r.is_zero() {
                row = AngleRow::lin(&BigInt::one(), &row, existing, &-q);
                continue;
            }
            // g = s*a + t*b becomes the new pivot; the cofactor row loses v.
            let e = a.extended_gcd(&b);
            let (g, s, t) = (e.gcd, e.x, e.y);
            let pivot = AngleRow::lin(&s, &row, existing, &t);
            let rest = AngleRow::lin(&(&b / &g), &row, existing, &-(&a / &g));
            self.rows.insert(v, pivot);
            row = rest;
            grew = true;
        }
    }

    /// Integer combination of inputs equal to the query, if one exists.
    pub fn reduce(&self, terms: &[(u32, BigInt)], constant: &BigRational) -> Option<Combo<BigInt>> {
        let mut row = AngleRow { terms: terms.to_vec(), constant: frac_mod1(constant), combo: Combo::new() };
        while let Some((v, a)) = row.terms.first().cloned() {
            let existing = self.rows.get(&v)?;
            let b = &existing.terms[0].1;
            let (q, r) = a.div_rem(b);
            if !r.is_zero() {
                return None;
            }
            row = AngleRow::lin(&BigInt::one(), &row, existing, &-q);
        }
        // row = query - Σ combo·inputs, so the certificate is the negated combo.
        if !row.constant.is_zero() {
            return None;
        }
        Some(row.combo.into_iter().map(|(k, v)| (k, -v)).collect())
    }
}

#[derive(Debug, Clone)]
struct RatioRow {
    terms: Sparse<BigRational>,
    combo: Combo<BigRational>,
}

/// Homogeneous linear relations over Q (logarithms of lengths).
#[derive(Debug, Clone, Default)]
pub(crate) struct RatioSystem {
    rows: BTreeMap<u32, RatioRow>,
}

impl RatioSystem {
    fn normalize(row: &mut RatioRow) {
        if let Some((_, lead)) = row.terms.first() {
            let inv = lead.recip();
            for (_, c) in &mut row.terms {
                *c = c.clone() * &inv;
            }
            for c in row.combo.values_mut() {
                *c = c.clone() * &inv;
            }
        }
    }

    fn eliminate(&self, row: &mut RatioRow) -> bool {
        let one = BigRational::one();
        let mut i = 0;
        while i < row.terms.len() {
            let (v, a) = row.terms[i].clone();
            match self.rows.get(&v) {
                Some(r) => {
                    let neg = -a;
                    row.terms = lin_comb(&one, &row.terms, &neg, &r.terms);
                    row.combo = combo_lin(&one, &row.combo, &neg, &r.combo);
                    // Entries before i are untouched: r has no variable below v.
                }
                None => i += 1,
            }
        }
        row.terms.is_empty()
    }

    /// Adds `Σ terms = 0` labelled `id`. Returns whether the span grew.
    pub fn insert(&mut self, terms: Sparse<BigRational>, id: usize) -> bool {
        let mut combo = Combo::new();
        combo.insert(id, BigRational::one());
        let mut row = RatioRow { terms, combo };
        // Only the leading variable must be free of other pivots for the
        // echelon invariant; reducing fully keeps later queries short.
        if self.eliminate(&mut row) {
            return false;
        }
        Self::normalize(&mut row);
        let v = row.terms[0].0;
        self.rows.insert(v, row);
        true
    }

    pub fn reduce(&self, terms: &[(u32, BigRational)]) -> Option<Combo<BigRational>> {
        let mut row = RatioRow { terms: terms.to_vec(), combo: Combo::new() };
        if self.eliminate(&mut row) {
            Some(row.combo.into_iter().map(|(k, v)| (k, -v)).collect())
        } else {
            None
        }
    }
}
