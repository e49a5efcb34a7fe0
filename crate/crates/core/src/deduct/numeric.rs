//! Numeric indexes over a diagram and the numeric side of rule matching.
//!
//! Matching is done once per diagram state: every binding of a rule whose
//! antecedents and consequent hold numerically (and whose nondegeneracy
//! predicates do not) becomes a candidate. Symbolic checks happen later, in
//! the fact base.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::rules::{Pattern, Rule};
use super::Key;
use crate::diagram::geom::{circumcenter, Pt};
use crate::diagram::residual;
use crate::dsl::PredicateKind;

const NONE: u32 = u32::MAX;

/// Tolerances used to generate candidates; the strict test afterwards uses
/// the diagram's check tolerance.
const GEN_ANGLE: f64 = 1e-6;
const GEN_LEN: f64 = 1e-6;

fn wrap_pi(t: f64) -> f64 {
    let r = t % PI;
    if r < 0.0 {
        r + PI
    } else {
        r
    }
}

fn angle_close(a: f64, b: f64) -> bool {
    let d = wrap_pi(a - b);
    d < GEN_ANGLE || PI - d < GEN_ANGLE
}

pub(crate) struct Numeric {
    n: usize,
    pts: Vec<Pt>,
    scale: f64,
    tol: f64,
    /// Active points (one per symbolic point), ascending.
    active: Vec<usize>,
    /// Coincidence cluster of each active point; `usize::MAX` otherwise.
    cluster: Vec<usize>,
    theta: Vec<f64>,
    len: Vec<f64>,
    lines: Vec<Vec<usize>>,
    line_theta: Vec<f64>,
    line_of: Vec<u32>,
    lines_through: Vec<Vec<u32>>,
    by_theta: Vec<(f64, u32)>,
    by_len: Vec<(f64, usize, usize)>,
    circles: Vec<Vec<usize>>,
    vangles: Vec<(f64, usize, usize, usize)>,
    shapes: Vec<(f64, f64, [usize; 3])>,
}

impl Numeric {
    /// `active` lists the points that may be bound (symbolic
    /// representatives); `coincidence` is relative to `scale`.
    pub fn new(pts: &[Pt], active: &[usize], scale: f64, tol: f64, coincidence: f64) -> Numeric {
        let n = pts.len();
        let mut cluster = vec![usize::MAX; n];
        let mut next = 0;
        for (i, &p) in active.iter().enumerate() {
            if cluster[p] != usize::MAX {
                continue;
            }
            cluster[p] = next;
            for &q in &active[i + 1..] {
                if cluster[q] == usize::MAX && pts[p].dist(pts[q]) < coincidence * scale {
                    cluster[q] = next;
                }
            }
            next += 1;
        }
        let mut nm = Numeric {
            n,
            pts: pts.to_vec(),
            scale,
            tol,
            active: active.to_vec(),
            cluster,
            theta: vec![f64::NAN; n * n],
            len: vec![f64::NAN; n * n],
            lines: Vec::new(),
            line_theta: Vec::new(),
            line_of: vec![NONE; n * n],
            lines_through: vec![Vec::new(); n],
            by_theta: Vec::new(),
            by_len: Vec::new(),
            circles: Vec::new(),
            vangles: Vec::new(),
            shapes: Vec::new(),
        };
        nm.build();
        nm
    }

    fn distinct(&self, p: usize, q: usize) -> bool {
        self.cluster[p] != self.cluster[q]
    }

    fn build(&mut self) {
        let n = self.n;
        let act = self.active.clone();
        for &p in &act {
            for &q in &act {
                if self.distinct(p, q) {
                    let d = self.pts[q] - self.pts[p];
                    self.theta[p * n + q] = wrap_pi(libm::atan2(d.y, d.x));
                    self.len[p * n + q] = d.norm();
                }
            }
        }
        // Maximal collinear sets.
        for (i, &p) in act.iter().enumerate() {
            for &q in &act[i + 1..] {
                if !self.distinct(p, q) || self.line_of[p * n + q] != NONE {
                    continue;
                }
                let members: Vec<usize> = act
                    .iter()
                    .copied()
                    .filter(|&r| {
                        !self.distinct(r, p)
                            || !self.distinct(r, q)
                            || residual::violation(PredicateKind::Coll, &[self.pts[p], self.pts[q], self.pts[r]], self.scale)
                                < self.tol
                    })
                    .collect();
                let id = self.lines.len() as u32;
                for &a in &members {
                    for &b in &members {
                        if self.distinct(a, b) {
                            self.line_of[a * n + b] = id;
                        }
                    }
                    self.lines_through[a].push(id);
                }
                self.line_theta.push(self.theta[p * n + q]);
                self.lines.push(members);
            }
        }
        self.by_theta = self.line_theta.iter().enumerate().map(|(i, &t)| (t, i as u32)).collect();
        self.by_theta.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (i, &p) in act.iter().enumerate() {
            for &q in &act[i + 1..] {
                if self.distinct(p, q) {
                    self.by_len.push((self.len[p * n + q], p, q));
                }
            }
        }
        self.by_len.sort_by(|a, b| a.0.total_cmp(&b.0));
        self.build_circles();
        for &b in &act {
            for &a in &act {
                for &c in &act {
                    if a == c || !self.distinct(a, b) || !self.distinct(c, b) || !self.distinct(a, c) {
                        continue;
                    }
                    if self.line_of[b * n + a] == self.line_of[b * n + c] {
                        continue;
                    }
                    self.vangles.push((wrap_pi(self.theta[b * n + c] - self.theta[b * n + a]), b, a, c));
                }
            }
        }
        self.vangles.sort_by(|x, y| x.0.total_cmp(&y.0));
        for &a in &act {
            for &b in &act {
                for &c in &act {
                    if !self.distinct(a, b) || !self.distinct(b, c) || !self.distinct(a, c) {
                        continue;
                    }
                    if self.line_of[a * n + b] == self.line_of[a * n + c] {
                        continue;
                    }
                    let (ab, bc, ca) = (self.len[a * n + b], self.len[b * n + c], self.len[c * n + a]);
                    self.shapes.push((ab / bc, bc / ca, [a, b, c]));
                }
            }
        }
        self.shapes.sort_by(|x, y| x.0.total_cmp(&y.0));
    }

    fn build_circles(&mut self) {
        let act = self.active.clone();
        let mut covered: BTreeSet<[usize; 3]> = BTreeSet::new();
        for (i, &a) in act.iter().enumerate() {
            for (j, &b) in act.iter().enumerate().skip(i + 1) {
                for &c in &act[j + 1..] {
                    if covered.contains(&[a, b, c]) || !self.distinct(a, b) || !self.distinct(a, c) || !self.distinct(b, c) {
                        continue;
                    }
                    if self.line_of[a * self.n + b] == self.line_of[a * self.n + c] {
                        continue;
                    }
                    let (pa, pb, pc) = (self.pts[a], self.pts[b], self.pts[c]);
                    let members: Vec<usize> = act
                        .iter()
                        .copied()
                        .filter(|&r| {
                            r == a
                                || r == b
                                || r == c
                                || residual::violation(PredicateKind::Cyclic, &[pa, pb, pc, self.pts[r]], self.scale) < self.tol
                        })
                        .collect();
                    for (x, &p) in members.iter().enumerate() {
                        for (y, &q) in members.iter().enumerate().skip(x + 1) {
                            for &r in &members[y + 1..] {
                                covered.insert([p, q, r]);
                            }
                        }
                    }
                    let clusters: BTreeSet<usize> = members.iter().map(|&p| self.cluster[p]).collect();
                    if clusters.len() >= 4 {
                        self.circles.push(members);
                    }
                }
            }
        }
    }

    fn th(&self, p: usize, q: usize) -> f64 {
        self.theta[p * self.n + q]
    }

    fn ln(&self, p: usize, q: usize) -> f64 {
        self.len[p * self.n + q]
    }

    fn lines_at_theta(&self, t: f64) -> Vec<u32> {
        let t = wrap_pi(t);
        let mut out = Vec::new();
        let mut range = |lo: f64, hi: f64| {
            let start = self.by_theta.partition_point(|x| x.0 < lo);
            for &(v, id) in &self.by_theta[start..] {
                if v > hi {
                    break;
                }
                out.push(id);
            }
        };
        range(t - GEN_ANGLE, t + GEN_ANGLE);
        if t - GEN_ANGLE < 0.0 {
            range(t - GEN_ANGLE + PI, PI);
        }
        if t + GEN_ANGLE >= PI {
            range(0.0, t + GEN_ANGLE - PI);
        }
        out
    }

    /// Points on lines of direction `t`, through `through` when given.
    fn on_direction(&self, t: f64, through: Option<usize>) -> Vec<usize> {
        let mut out = BTreeSet::new();
        match through {
            Some(c) => {
                for &l in &self.lines_through[c] {
                    if angle_close(self.line_theta[l as usize], t) {
                        out.extend(self.lines[l as usize].iter().copied());
                    }
                }
            }
            None => {
                for l in self.lines_at_theta(t) {
                    out.extend(self.lines[l as usize].iter().copied());
                }
            }
        }
        out.into_iter().collect()
    }

    /// Points at distance `l`, from `from` when given.
    fn at_length(&self, l: f64, from: Option<usize>) -> Vec<usize> {
        let tol = GEN_LEN * self.scale;
        match from {
            Some(c) => self.active.iter().copied().filter(|&p| self.distinct(p, c) && (self.ln(c, p) - l).abs() < tol).collect(),
            None => {
                let mut out = BTreeSet::new();
                let start = self.by_len.partition_point(|x| x.0 < l - tol);
                for &(v, p, q) in &self.by_len[start..] {
                    if v > l + tol {
                        break;
                    }
                    out.insert(p);
                    out.insert(q);
                }
                out.into_iter().collect()
            }
        }
    }

    fn located_at(&self, x: Pt) -> Vec<usize> {
        if !x.is_finite() {
            return Vec::new();
        }
        let tol = GEN_LEN * self.scale;
        self.active.iter().copied().filter(|&p| self.pts[p].dist(x) < tol).collect()
    }

    /// Strict numeric truth of `kind` over point indices.
    pub fn holds(&self, kind: PredicateKind, args: &[usize]) -> bool {
        let pts: Vec<Pt> = args.iter().map(|&i| self.pts[i]).collect();
        residual::violation(kind, &pts, self.scale) < self.tol
    }

    /// Picks the next slot to bind and its candidate points.
    fn plan(&self, kind: PredicateKind, vars: &[usize], part: &[Option<usize>]) -> (usize, Vec<usize>) {
        use PredicateKind::*;
        let first_free = |range: core::ops::Range<usize>| range.into_iter().find(|&i| part[i].is_none());
        let all = || self.active.clone();
        let seg = |i: usize| match (part[i], part[i + 1]) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        };
        // A segment pair (s, s+1) with a target direction or length; picks the
        // slot in it and its candidates.
        let aim_dir = |s: usize, t: f64| -> (usize, Vec<usize>) {
            match (part[s], part[s + 1]) {
                (Some(c), None) => (s + 1, self.on_direction(t, Some(c))),
                (None, Some(d)) => (s, self.on_direction(t, Some(d))),
                _ => (s, self.on_direction(t, None)),
            }
        };
        let aim_len = |s: usize, l: f64| -> (usize, Vec<usize>) {
            match (part[s], part[s + 1]) {
                (Some(c), None) => (s + 1, self.at_length(l, Some(c))),
                (None, Some(d)) => (s, self.at_length(l, Some(d))),
                _ => (s, self.at_length(l, None)),
            }
        };
        match kind {
            Coll => {
                let bound: Vec<usize> = part.iter().flatten().copied().collect();
                let slot = first_free(0..part.len()).expect("unbound slot");
                if bound.len() >= 2 {
                    let l = self.line_of[bound[0] * self.n + bound[1]];
                    if l == NONE {
                        return (slot, Vec::new());
                    }
                    (slot, self.lines[l as usize].clone())
                } else if let Some(&b) = bound.first() {
                    let mut s = BTreeSet::new();
                    for &l in &self.lines_through[b] {
                        if self.lines[l as usize].len() >= 3 {
                            s.extend(self.lines[l as usize].iter().copied());
                        }
                    }
                    (slot, s.into_iter().collect())
                } else {
                    let mut s = BTreeSet::new();
                    for l in &self.lines {
                        if l.len() >= 3 {
                            s.extend(l.iter().copied());
                        }
                    }
                    (slot, s.into_iter().collect())
                }
            }
            Para | Perp => {
                let off = if kind == Perp { PI / 2.0 } else { 0.0 };
                if let Some((a, b)) = seg(0) {
                    aim_dir(2, self.th(a, b) + off)
                } else if let Some((c, d)) = seg(2) {
                    aim_dir(0, self.th(c, d) + off)
                } else {
                    (first_free(0..2).expect("unbound"), all())
                }
            }
            Cong => {
                if let Some((a, b)) = seg(0) {
                    aim_len(2, self.ln(a, b))
                } else if let Some((c, d)) = seg(2) {
                    aim_len(0, self.ln(c, d))
                } else {
                    (first_free(0..2).expect("unbound"), all())
                }
            }
            EqAngle | EqRatio => {
                let full = |h: usize| (h..h + 4).all(|i| part[i].is_some());
                let (f, s) = if full(0) {
                    (0, 4)
                } else if full(4) {
                    (4, 0)
                } else {
                    let cnt = |h: usize| (h..h + 4).filter(|&i| part[i].is_some()).count();
                    let h = if cnt(4) > cnt(0) { 4 } else { 0 };
                    return (first_free(h..h + 4).expect("unbound"), all());
                };
                let p = |i: usize| part[f + i].expect("bound");
                if kind == EqAngle {
                    let v = self.th(p(2), p(3)) - self.th(p(0), p(1));
                    if let Some((a, b)) = seg(s) {
                        return aim_dir(s + 2, self.th(a, b) + v);
                    }
                    if let Some((c, d)) = seg(s + 2) {
                        return aim_dir(s, self.th(c, d) - v);
                    }
                    if vars[s] == vars[s + 2] && part[s].is_none() {
                        let v = wrap_pi(v);
                        let (arm1, arm2) = (part[s + 1], part[s + 3]);
                        let mut out = BTreeSet::new();
                        for &(_, b, a, c) in self.vangle_range(v) {
                            if arm1.is_none_or(|x| x == a) && arm2.is_none_or(|x| x == c) {
                                out.insert(b);
                            }
                        }
                        return (s, out.into_iter().collect());
                    }
                    (first_free(s..s + 4).expect("unbound"), all())
                } else {
                    let r = self.ln(p(2), p(3)) / self.ln(p(0), p(1));
                    if let Some((a, b)) = seg(s) {
                        return aim_len(s + 2, self.ln(a, b) * r);
                    }
                    if let Some((c, d)) = seg(s + 2) {
                        return aim_len(s, self.ln(c, d) / r);
                    }
                    (first_free(s..s + 4).expect("unbound"), all())
                }
            }
            Cyclic => {
                let bound: BTreeSet<usize> = part.iter().flatten().copied().collect();
                let slot = first_free(0..part.len()).expect("unbound slot");
                let mut out = BTreeSet::new();
                for c in &self.circles {
                    if bound.iter().all(|b| c.contains(b)) {
                        out.extend(c.iter().copied());
                    }
                }
                (slot, out.into_iter().collect())
            }
            Circle => match part[0] {
                Some(o) => {
                    let slot = first_free(1..part.len()).expect("unbound");
                    match part[1..].iter().flatten().next() {
                        Some(&a) => (slot, self.at_length(self.ln(o, a), Some(o))),
                        None => (slot, all()),
                    }
                }
                None => {
                    if part[1..].iter().all(|p| p.is_some()) && part.len() >= 4 {
                        let (a, b, c) = (self.pts[part[1].unwrap()], self.pts[part[2].unwrap()], self.pts[part[3].unwrap()]);
                        let cands = circumcenter(a, b, c).map(|o| self.located_at(o)).unwrap_or_default();
                        (0, cands)
                    } else {
                        (0, all())
                    }
                }
            },
            Midp => {
                let pt = |i: usize| part[i].map(|p| self.pts[p]);
                match (pt(0), pt(1), pt(2)) {
                    (None, Some(a), Some(b)) => (0, self.located_at((a + b) * 0.5)),
                    (Some(m), Some(a), None) => (2, self.located_at(m * 2.0 - a)),
                    (Some(m), None, Some(b)) => (1, self.located_at(m * 2.0 - b)),
                    _ => (first_free(1..3).unwrap_or(0), all()),
                }
            }
            SimTri | ConTri => {
                let full = |h: usize| (h..h + 3).all(|i| part[i].is_some());
                let (f, s) = if full(0) {
                    (0, 3)
                } else if full(3) {
                    (3, 0)
                } else {
                    let cnt = |h: usize| (h..h + 3).filter(|&i| part[i].is_some()).count();
                    let h = if cnt(3) > cnt(0) { 3 } else { 0 };
                    return (first_free(h..h + 3).expect("unbound"), all());
                };
                let t = [part[f].unwrap(), part[f + 1].unwrap(), part[f + 2].unwrap()];
                let slot = first_free(s..s + 3).expect("unbound");
                let k = slot - s;
                let mut out = BTreeSet::new();
                for m in self.similar_to(t) {
                    if (0..3).all(|i| part[s + i].is_none_or(|x| x == m[i])) {
                        out.insert(m[k]);
                    }
                }
                (slot, out.into_iter().collect())
            }
            Idc => match part[0].or(part[1]) {
                Some(x) => {
                    let slot = if part[0].is_none() { 0 } else { 1 };
                    let c = self.cluster[x];
                    (slot, self.active.iter().copied().filter(|&p| p != x && self.cluster[p] == c).collect())
                }
                None => {
                    let mut out = Vec::new();
                    for &p in &self.active {
                        if self.active.iter().any(|&q| q != p && self.cluster[q] == self.cluster[p]) {
                            out.push(p);
                        }
                    }
                    (0, out)
                }
            },
        }
    }

    fn vangle_range(&self, v: f64) -> Vec<&(f64, usize, usize, usize)> {
        let mut out = Vec::new();
        let mut range = |lo: f64, hi: f64| {
            let start = self.vangles.partition_point(|x| x.0 < lo);
            for e in &self.vangles[start..] {
                if e.0 > hi {
                    break;
                }
                out.push(e);
            }
        };
        range(v - GEN_ANGLE, v + GEN_ANGLE);
        if v - GEN_ANGLE < 0.0 {
            range(v - GEN_ANGLE + PI, PI);
        }
        if v + GEN_ANGLE >= PI {
            range(0.0, v + GEN_ANGLE - PI);
        }
        out
    }

    fn similar_to(&self, t: [usize; 3]) -> Vec<[usize; 3]> {
        let n = self.n;
        let (ab, bc, ca) = (self.len[t[0] * n + t[1]], self.len[t[1] * n + t[2]], self.len[t[2] * n + t[0]]);
        if ab.is_nan() || bc.is_nan() || ca.is_nan() {
            return Vec::new();
        }
        let (k1, k2) = (ab / bc, bc / ca);
        let tol = |k: f64| GEN_LEN * k.max(1.0);
        let start = self.shapes.partition_point(|x| x.0 < k1 - tol(k1));
        let mut out = Vec::new();
        for &(x, y, m) in &self.shapes[start..] {
            if x > k1 + tol(k1) {
                break;
            }
            if (y - k2).abs() < tol(k2) {
                out.push(m);
            }
        }
        out
    }
}

/// A rule binding that holds numerically: canonical antecedent keys and the
/// consequent key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Candidate {
    pub consequent: Key,
    pub antecedents: Vec<Key>,
}

/// Order in which a rule's patterns are bound: the consequent first when it
/// has a cheap generator, then greedily the pattern with the fewest unbound
/// variables.
pub(crate) fn match_order(rule: &Rule) -> Vec<Pattern> {
    use PredicateKind::*;
    let mut items: Vec<(Pattern, bool)> = rule.antecedents.iter().cloned().map(|p| (p, false)).collect();
    let mut order = Vec::new();
    let mut bound: BTreeSet<usize> = BTreeSet::new();
    if matches!(rule.consequent.kind, SimTri | ConTri | Cyclic | Idc | Midp) {
        order.push(rule.consequent.clone());
        bound.extend(rule.consequent.args.iter().copied());
    }
    while items.iter().any(|(_, used)| !used) {
        let cost = |p: &Pattern| {
            let free: BTreeSet<usize> = p.args.iter().copied().filter(|v| !bound.contains(v)).collect();
            let weight = match p.kind {
                Idc | Midp => 0,
                Coll | Cyclic => 1,
                Cong | Para | Perp => 2,
                Circle | SimTri | ConTri => 3,
                EqAngle | EqRatio => 4,
            };
            free.len() * 10 + weight
        };
        let (i, _) = items
            .iter()
            .enumerate()
            .filter(|(_, (_, used))| !used)
            .min_by_key(|(_, (p, _))| cost(p))
            .expect("unused item");
        items[i].1 = true;
        bound.extend(items[i].0.args.iter().copied());
        order.push(items[i].0.clone());
    }
    order
}

fn key_of(kind: PredicateKind, args: &[usize], bind: &[Option<usize>]) -> Key {
    let pts: Vec<usize> = args.iter().map(|&v| bind[v].expect("bound variable")).collect();
    Key::new(kind, &pts)
}

/// Every numerically valid binding of `rule`, deduplicated by keys.
pub(crate) fn candidates(nm: &Numeric, rule: &Rule, order: &[Pattern]) -> Vec<Candidate> {
    let mut bind = vec![None; rule.vars.len()];
    let mut out = BTreeSet::new();
    let pair = if rule.consequent.kind == PredicateKind::Idc {
        Some((rule.consequent.args[0], rule.consequent.args[1]))
    } else {
        None
    };
    let mut m = Matcher { nm, rule, order, pair, out: &mut out };
    m.search(0, &mut bind);
    out.into_iter().collect()
}

struct Matcher<'a> {
    nm: &'a Numeric,
    rule: &'a Rule,
    order: &'a [Pattern],
    pair: Option<(usize, usize)>,
    out: &'a mut BTreeSet<Candidate>,
}

impl Matcher<'_> {
    fn can_bind(&self, var: usize, p: usize, bind: &[Option<usize>]) -> bool {
        if self.nm.cluster.get(p).is_none_or(|c| *c == usize::MAX) {
            return false;
        }
        bind.iter().enumerate().all(|(w, b)| match b {
            None => true,
            Some(q) if w == var => *q == p,
            Some(q) => {
                if *q == p {
                    return false;
                }
                let exempt = self.pair.is_some_and(|(x, y)| (x, y) == (var, w) || (y, x) == (var, w));
                exempt || self.nm.distinct(*q, p)
            }
        })
    }

    fn search(&mut self, item: usize, bind: &mut Vec<Option<usize>>) {
        if item == self.order.len() {
            self.finish(bind);
            return;
        }
        let pat = &self.order[item];
        let part: Vec<Option<usize>> = pat.args.iter().map(|&v| bind[v]).collect();
        if part.iter().all(|p| p.is_some()) {
            let args: Vec<usize> = part.iter().map(|p| p.unwrap()).collect();
            if self.nm.holds(pat.kind, &args) {
                self.search(item + 1, bind);
            }
            return;
        }
        let (slot, cands) = self.nm.plan(pat.kind, &pat.args, &part);
        let var = pat.args[slot];
        for c in cands {
            if self.can_bind(var, c, bind) {
                bind[var] = Some(c);
                self.search(item, bind);
                bind[var] = None;
            }
        }
    }

    fn finish(&mut self, bind: &[Option<usize>]) {
        let r = self.rule;
        let pts = |p: &Pattern| -> Vec<usize> { p.args.iter().map(|&v| bind[v].unwrap()).collect() };
        if !self.nm.holds(r.consequent.kind, &pts(&r.consequent)) {
            return;
        }
        if r.nondegeneracy.iter().any(|p| self.nm.holds(p.kind, &pts(p))) {
            return;
        }
        let mut antecedents: Vec<Key> = r.antecedents.iter().map(|p| key_of(p.kind, &p.args, bind)).collect();
        antecedents.sort();
        antecedents.dedup();
        let consequent = key_of(r.consequent.kind, &r.consequent.args, bind);
        if antecedents.contains(&consequent) {
            return;
        }
        self.out.insert(Candidate { consequent, antecedents });
    }
}
