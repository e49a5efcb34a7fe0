//! Signed, scale-normalized violation measures for every predicate kind.
//!
//! Angle-type predicates (coll, para, perp, eqangle, cyclic) are measured by
//! scale-free sines; length-type predicates are divided by the diagram
//! diameter `scale` (or its square for products).

use alloc::vec::Vec;

use super::geom::Pt;
use crate::dsl::PredicateKind;

fn sine(u: Pt, v: Pt) -> f64 {
    let n = u.norm() * v.norm();
    if n == 0.0 {
        return f64::NAN;
    }
    u.cross(v) / n
}

fn cosine(u: Pt, v: Pt) -> f64 {
    let n = u.norm() * v.norm();
    if n == 0.0 {
        return f64::NAN;
    }
    u.dot(v) / n
}

fn coll3(a: Pt, b: Pt, c: Pt) -> f64 {
    let l = a.dist(b).max(a.dist(c)).max(b.dist(c));
    if l == 0.0 {
        return f64::NAN;
    }
    (b - a).cross(c - a) / (l * l)
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Concyclicity of four points: the lifted-plane determinant after
/// translating to `a` and scaling by the largest pairwise distance.
fn cyclic4(a: Pt, b: Pt, c: Pt, d: Pt) -> f64 {
    let pts = [a, b, c, d];
    let mut l: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            l = l.max(pts[i].dist(pts[j]));
        }
    }
    if l == 0.0 {
        return f64::NAN;
    }
    let row = |p: Pt| {
        let q = (p - a) * (1.0 / l);
        [q.x, q.y, q.dot(q)]
    };
    det3([row(b), row(c), row(d)])
}

/// Residual components of `kind` over `p` (already resolved coordinates).
pub(crate) fn residuals(kind: PredicateKind, p: &[Pt], scale: f64) -> Vec<f64> {
    use PredicateKind::*;
    let s = if scale > 0.0 { scale } else { 1.0 };
    let mut out = Vec::new();
    match kind {
        Coll => {
            for i in 2..p.len() {
                out.push(coll3(p[0], p[1], p[i]));
            }
        }
        Para => out.push(sine(p[1] - p[0], p[3] - p[2])),
        Perp => out.push(cosine(p[1] - p[0], p[3] - p[2])),
        Cong => out.push((p[0].dist(p[1]) - p[2].dist(p[3])) / s),
        EqAngle => {
            let w = |i: usize| (p[2 * i + 1] - p[2 * i]).line_dir();
            let lhs = w(1).mul_conj(w(0));
            let rhs = w(3).mul_conj(w(2));
            out.push(lhs.x - rhs.x);
            out.push(lhs.y - rhs.y);
        }
        EqRatio => {
            let l = |i: usize| p[2 * i].dist(p[2 * i + 1]);
            out.push((l(0) * l(3) - l(1) * l(2)) / (s * s));
        }
        Cyclic => {
            for i in 3..p.len() {
                out.push(cyclic4(p[0], p[1], p[2], p[i]));
            }
        }
        Circle => {
            let r = p[0].dist(p[1]);
            out.push((p[0].dist(p[2]) - r) / s);
            out.push((p[0].dist(p[3]) - r) / s);
        }
        Midp => {
            let m = super::geom::midpoint(p[1], p[2]);
            out.push((p[0].x - m.x) / s);
            out.push((p[0].y - m.y) / s);
        }
        SimTri => {
            let l = |i: usize, j: usize| p[i].dist(p[j]);
            out.push((l(0, 1) * l(4, 5) - l(1, 2) * l(3, 4)) / (s * s));
            out.push((l(1, 2) * l(5, 3) - l(2, 0) * l(4, 5)) / (s * s));
        }
        ConTri => {
            let l = |i: usize, j: usize| p[i].dist(p[j]);
            out.push((l(0, 1) - l(3, 4)) / s);
            out.push((l(1, 2) - l(4, 5)) / s);
            out.push((l(2, 0) - l(5, 3)) / s);
        }
        Idc => {
            out.push((p[0].x - p[1].x) / s);
            out.push((p[0].y - p[1].y) / s);
        }
    }
    out
}

/// Largest absolute residual component; NaN (degenerate input) maps to +inf.
pub(crate) fn violation(kind: PredicateKind, p: &[Pt], scale: f64) -> f64 {
    residuals(kind, p, scale)
        .into_iter()
        .map(|r| if r.is_nan() { f64::INFINITY } else { libm::fabs(r) })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Pt> {
        v.iter().map(|&(x, y)| Pt::new(x, y)).collect()
    }

    #[test]
    fn eqangle_measures_directed_angles_mod_pi() {
        // 30 degrees from ab to cd and again from ef to gh (reversed segment orientation).
        let c30 = libm::cos(core::f64::consts::PI / 6.0);
        let s30 = 0.5;
        let p = pts(&[(0., 0.), (1., 0.), (0., 0.), (c30, s30), (2., 1.), (2., 3.), (5., 5.), (5. + s30, 5. - c30)]);
        // ef is vertical (90deg), gh must be at 120deg: direction (-1/2, c30) ~ (1/2, -c30).
        assert!(violation(PredicateKind::EqAngle, &p, 1.0) < 1e-12);
        let q = pts(&[(0., 0.), (1., 0.), (0., 0.), (c30, -s30), (2., 1.), (2., 3.), (5., 5.), (5. + s30, 5. - c30)]);
        assert!(violation(PredicateKind::EqAngle, &q, 1.0) > 0.1);
    }

    #[test]
    fn cyclic_detects_concyclic_points() {
        let on = |t: f64| (3.0 + 2.0 * libm::cos(t), -1.0 + 2.0 * libm::sin(t));
        let p = pts(&[on(0.1), on(1.3), on(2.9), on(4.4)]);
        assert!(violation(PredicateKind::Cyclic, &p, 4.0) < 1e-12);
        let q = pts(&[on(0.1), on(1.3), on(2.9), (3.0, -1.0)]);
        assert!(violation(PredicateKind::Cyclic, &q, 4.0) > 1e-3);
    }

    #[test]
    fn coincident_points_are_never_satisfied() {
        let p = pts(&[(0., 0.), (0., 0.), (1., 1.), (2., 2.)]);
        assert_eq!(violation(PredicateKind::Para, &p, 1.0), f64::INFINITY);
    }
}
