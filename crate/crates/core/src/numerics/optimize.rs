//! Local minimizers for the low-dimensional searches over probe parameters.

use crate::numerics::RMat;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
}

/// Nelder-Mead simplex search from `x0` with initial edge `step`.
pub fn nelder_mead<T: Scalar>(
    f: impl Fn(&[T]) -> T,
    x0: &[T],
    step: T,
    tol: T,
    max_iter: usize,
) -> Minimum<T> {
    let n = x0.len();
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        if (simplex[n].1 - simplex[0].1).abs() <= tol {
            break;
        }
        let mut centroid = vec![T::zero(); n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += *xi / T::from_usize_lossy(n);
            }
        }
        let along = |t: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| *c + t * (*w - *c))
                .collect()
        };
        let xr = along(-T::one());
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-two);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = if fr < simplex[n].1 { along(-half) } else { along(half) };
            let fc = f(&xc);
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&best) {
                        *xi = *bi + half * (*xi - *bi);
                    }
                    *v = f(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (x, value) = simplex.swap_remove(0);
    Minimum {
        x,
        value,
        iterations,
    }
}

/// Levenberg-Marquardt on ½‖r(x)‖². `model` returns the residual vector and
/// its Jacobian (rows = residuals). `project` maps each accepted iterate back
/// onto the feasible set.
pub fn levenberg_marquardt<T: Scalar>(
    model: impl Fn(&[T]) -> (Vec<T>, RMat<T>),
    project: impl Fn(&mut Vec<T>),
    x0: &[T],
    tol: T,
    max_iter: usize,
) -> Minimum<T> {
    let cost = |r: &[T]| r.iter().map(|v| *v * *v).sum::<T>();
    let mut x = x0.to_vec();
    project(&mut x);
    let (mut r, mut jac) = model(&x);
    let mut c = cost(&r);
    let mut lambda = T::lit(1e-3);
    let mut iterations = 0;
    while iterations < max_iter && c > tol {
        iterations += 1;
        let jt = jac.transpose();
        let mut normal = jt.matmul(&jac);
        let grad = jt.apply(&r);
        for i in 0..x.len() {
            let d = normal[(i, i)];
            normal[(i, i)] = d + lambda * (T::one() + d);
        }
        let rhs: Vec<T> = grad.iter().map(|g| -*g).collect();
        let Some(dx) = normal.solve(&rhs) else {
            lambda *= T::lit(10.0);
            continue;
        };
        let mut trial: Vec<T> = x.iter().zip(&dx).map(|(a, b)| *a + *b).collect();
        project(&mut trial);
        let (rt, jt) = model(&trial);
        let ct = cost(&rt);
        if ct < c {
            let small = dx.iter().fold(T::zero(), |m, v| m.max(v.abs())) < T::epsilon();
            x = trial;
            r = rt;
            jac = jt;
            c = ct;
            lambda = (lambda / T::lit(3.0)).max(T::lit(1e-15));
            if small {
                break;
            }
        } else {
            lambda *= T::lit(4.0);
            if lambda > T::lit(1e12) {
                break;
            }
        }
    }
    Minimum {
        x,
        value: c,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(f, &[-1.2, 1.0], 0.5, 1e-20, 5000);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn lm_on_circle() {
        // r = (x² + y² − 1, x − y): roots at ±(1/√2, 1/√2)
        let model = |x: &[f64]| {
            let r = vec![x[0] * x[0] + x[1] * x[1] - 1.0, x[0] - x[1]];
            let j = RMat::from_rows(&[vec![2.0 * x[0], 2.0 * x[1]], vec![1.0, -1.0]]);
            (r, j)
        };
        let m = levenberg_marquardt(model, |_| {}, &[2.0, 0.5], 1e-30, 200);
        assert!(m.value < 1e-28);
        assert!((m.x[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }
}
