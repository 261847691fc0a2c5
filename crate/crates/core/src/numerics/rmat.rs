use std::ops::{Index, IndexMut, Sub};

use crate::scalar::Scalar;

/// Small dense real matrix (Fisher-information sized).
#[derive(Clone, Debug, PartialEq)]
pub struct RMat<T: Scalar> {
    n: usize,
    m: usize,
    data: Vec<T>,
}

impl<T: Scalar> RMat<T> {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            data: vec![T::zero(); n * m],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = T::one();
        }
        out
    }

    pub fn from_fn(n: usize, m: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * m);
        for r in 0..n {
            for c in 0..m {
                data.push(f(r, c));
            }
        }
        Self { n, m, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        Self::from_fn(n, m, |r, c| rows[r][c])
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.m
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|r| self.data[r * self.m..(r + 1) * self.m].to_vec())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.m, self.n, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.m, rhs.n);
        Self::from_fn(self.n, rhs.m, |r, c| {
            (0..self.m).map(|k| self[(r, k)] * rhs[(k, c)]).sum()
        })
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|r| (0..self.m).map(|k| self[(r, k)] * v[k]).sum())
            .collect()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            n: self.n,
            m: self.m,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn trace(&self) -> T {
        (0..self.n.min(self.m)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, x| a.max(x.abs()))
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        assert_eq!((self.n, self.m), (rhs.n, rhs.m));
        self.data
            .iter()
            .zip(&rhs.data)
            .fold(T::zero(), |a, (x, y)| a.max((*x - *y).abs()))
    }

    pub fn symmetry_defect(&self) -> T {
        self.max_abs_diff(&self.transpose())
    }

    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.n, self.m, |r, c| {
            (self[(r, c)] + self[(c, r)]) * T::lit(0.5)
        })
    }

    /// Determinant by cofactor expansion; intended for n <= 4.
    pub fn det(&self) -> T {
        assert_eq!(self.n, self.m);
        match self.n {
            0 => T::one(),
            1 => self.data[0],
            2 => self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)],
            n => (0..n)
                .map(|c| {
                    let sign = if c % 2 == 0 { T::one() } else { -T::one() };
                    sign * self[(0, c)] * self.minor(0, c).det()
                })
                .sum(),
        }
    }

    fn minor(&self, row: usize, col: usize) -> Self {
        let n = self.n;
        Self::from_fn(n - 1, n - 1, |r, c| {
            let rr = if r < row { r } else { r + 1 };
            let cc = if c < col { c } else { c + 1 };
            self[(rr, cc)]
        })
    }

    /// Inverse through the adjugate, or `None` if the determinant vanishes.
    pub fn inverse_adjugate(&self) -> Option<Self> {
        assert_eq!(self.n, self.m);
        let det = self.det();
        if det.is_zero() || !det.is_finite() {
            return None;
        }
        let n = self.n;
        if n == 1 {
            return Some(Self::from_fn(1, 1, |_, _| T::one() / det));
        }
        Some(Self::from_fn(n, n, |r, c| {
            let sign = if (r + c) % 2 == 0 { T::one() } else { -T::one() };
            sign * self.minor(c, r).det() / det
        }))
    }

    /// Solves `self · x = b` by Gaussian elimination with partial pivoting;
    /// `None` if a pivot vanishes.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(self.n, self.m);
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut a = self.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| {
                a[(i, col)]
                    .abs()
                    .partial_cmp(&a[(j, col)].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            let p = a[(piv, col)];
            if p.is_zero() || !p.is_finite() {
                return None;
            }
            if piv != col {
                for k in 0..n {
                    let tmp = a[(col, k)];
                    a[(col, k)] = a[(piv, k)];
                    a[(piv, k)] = tmp;
                }
                x.swap(col, piv);
            }
            for r in (col + 1)..n {
                let f = a[(r, col)] / p;
                if f.is_zero() {
                    continue;
                }
                for k in col..n {
                    let v = a[(col, k)];
                    a[(r, k)] -= f * v;
                }
                let v = x[col];
                x[r] -= f * v;
            }
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for k in (r + 1)..n {
                acc -= a[(r, k)] * x[k];
            }
            x[r] = acc / a[(r, r)];
        }
        Some(x)
    }

    /// Ascending eigenvalues of the symmetric part, by cyclic Jacobi.
    pub fn sym_eigenvalues(&self) -> Vec<T> {
        assert_eq!(self.n, self.m);
        let n = self.n;
        let mut a = self.symmetrized();
        let stop = (T::epsilon() * self.max_abs().max(T::min_positive_value())).powi(2);
        for _ in 0..100 {
            let off: T = (0..n)
                .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
                .map(|(r, c)| a[(r, c)] * a[(r, c)])
                .sum();
            if off <= stop {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.is_zero() {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                    let sign = if theta < T::zero() { -T::one() } else { T::one() };
                    let t = sign / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }
}

/// Serialized as a list of rows.
impl<T: Scalar + serde::Serialize> serde::Serialize for RMat<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<T: Scalar> Index<(usize, usize)> for RMat<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.m + c]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for RMat<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.m + c]
    }
}

impl<T: Scalar> Sub<&RMat<T>> for &RMat<T> {
    type Output = RMat<T>;

    fn sub(self, rhs: &RMat<T>) -> RMat<T> {
        assert_eq!((self.n, self.m), (rhs.n, rhs.m));
        RMat {
            n: self.n,
            m: self.m,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjugate_inverse_4x4() {
        let a = RMat::from_rows(&[
            vec![4.0, 1.0, 0.5, 0.0],
            vec![1.0, 3.0, 0.2, 0.1],
            vec![0.5, 0.2, 2.0, 0.3],
            vec![0.0, 0.1, 0.3, 1.0],
        ]);
        let inv = a.inverse_adjugate().unwrap();
        assert!(a.matmul(&inv).max_abs_diff(&RMat::identity(4)) < 1e-14);
    }

    #[test]
    fn circulant_eigenvalues() {
        // c on the diagonal, b off it: c + 2b once, c - b twice
        let (c, b) = (5.0f64, 1.5f64);
        let m = RMat::from_fn(3, 3, |r, k| if r == k { c } else { b });
        let ev = m.sym_eigenvalues();
        assert!((ev[0] - (c - b)).abs() < 1e-13);
        assert!((ev[1] - (c - b)).abs() < 1e-13);
        assert!((ev[2] - (c + 2.0 * b)).abs() < 1e-13);
    }

    #[test]
    fn pivoted_solve() {
        let a = RMat::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ]);
        let x = [1.0f64, -2.0, 0.5];
        let b = a.apply(&x);
        let got = a.solve(&b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_has_no_inverse() {
        let a = RMat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(a.inverse_adjugate().is_none());
    }
}
