//! Damped least squares over a subset of construction parameters.

use alloc::vec;
use alloc::vec::Vec;

/// Solves the dense system `a x = b` by Gaussian elimination with partial
/// pivoting. `a` is row-major `n x n`. Returns `None` when singular.
pub(crate) fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| libm::fabs(a[i * n + col]).total_cmp(&libm::fabs(a[j * n + col])))?;
        if a[piv * n + col] == 0.0 || !a[piv * n + col].is_finite() {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in r + 1..n {
            s -= a[r * n + k] * x[k];
        }
        x[r] = s / a[r * n + r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn max_abs(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(libm::fabs(*v)) })
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

pub(crate) struct Outcome {
    pub params: Vec<f64>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub max_residual: f64,
}

/// Levenberg-Marquardt: minimizes the sum of squares of `f(x)` moving only
/// the coordinates listed in `free`. `f` returns `None` when `x` is outside
/// the domain (a construction is undefined); such steps are rejected.
pub(crate) fn minimize<F>(f: F, x0: Vec<f64>, free: &[usize], max_iters: usize, target: f64) -> Outcome
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let mut x = x0;
    let mut r = match f(&x) {
        Some(r) if r.iter().all(|v| v.is_finite()) => r,
        _ => return Outcome { params: x, max_residual: f64::INFINITY },
    };
    let n = free.len();
    if n == 0 || r.is_empty() {
        let m = max_abs(&r);
        return Outcome { params: x, max_residual: m };
    }
    let mut cost = sum_sq(&r);
    let mut lambda = 1e-3;
    for _ in 0..max_iters {
        if max_abs(&r) < target {
            break;
        }
        // Central-difference Jacobian, column per free parameter.
        let m = r.len();
        let mut jac = vec![0.0; m * n];
        let mut ok = true;
        for (c, &i) in free.iter().enumerate() {
            let h = 1e-7 * libm::fabs(x[i]).max(1.0);
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            match (f(&xp), f(&xm)) {
                (Some(rp), Some(rm)) if rp.len() == m && rm.len() == m => {
                    for k in 0..m {
                        jac[k * n + c] = (rp[k] - rm[k]) / (2.0 * h);
                    }
                }
                _ => ok = false,
            }
        }
        if !ok || jac.iter().any(|v| !v.is_finite()) {
            break;
        }
        let mut jtj = vec![0.0; n * n];
        let mut jtr = vec![0.0; n];
        for k in 0..m {
            for a in 0..n {
                let ja = jac[k * n + a];
                if ja == 0.0 {
                    continue;
                }
                jtr[a] -= ja * r[k];
                for b in 0..n {
                    jtj[a * n + b] += ja * jac[k * n + b];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for d in 0..n {
                a[d * n + d] += lambda * (jtj[d * n + d] + 1e-9);
            }
            if let Some(step) = solve_dense(a, jtr.clone(), n) {
                let mut xn = x.clone();
                for (c, &i) in free.iter().enumerate() {
                    xn[i] += step[c];
                }
                if let Some(rn) = f(&xn) {
                    let cn = sum_sq(&rn);
                    if rn.len() == m && cn.is_finite() && cn < cost {
                        x = xn;
                        r = rn;
                        cost = cn;
                        lambda = (lambda / 3.0).max(1e-12);
                        improved = true;
                        break;
                    }
                }
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    let max_residual = max_abs(&r);
    Outcome { params: x, max_residual }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solver_matches_known_solution() {
        let a = vec![2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0];
        let x = solve_dense(a, vec![8.0, -11.0, -3.0], 3).unwrap();
        for (got, want) in x.iter().zip([2.0, 3.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn fits_circle_through_points() {
        // Unknown center (x0, x1) equidistant from three fixed points.
        let f = |x: &[f64]| {
            let d = |px: f64, py: f64| libm::hypot(x[0] - px, x[1] - py);
            Some(vec![d(0.0, 0.0) - d(4.0, 0.0), d(0.0, 0.0) - d(0.0, 2.0)])
        };
        let out = minimize(f, vec![3.0, -2.0, 99.0], &[0, 1], 100, 1e-13);
        assert!(out.max_residual < 1e-12, "{}", out.max_residual);
        assert!((out.params[0] - 2.0).abs() < 1e-9 && (out.params[1] - 1.0).abs() < 1e-9);
        assert_eq!(out.params[2], 99.0);
    }
}
