//! Small dense helpers: compensated summation, a cyclic-Jacobi eigensolver
//! for Hermitian matrices, and a Cholesky solve for least squares on
//! recovery supports.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian within tolerance")]
    NotHermitian,
    #[error("matrix dimension {0} exceeds the cap of {1}")]
    DimensionTooLarge(usize, usize),
    #[error("matrix is not square")]
    NotSquare,
}

/// Kahan-compensated real accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Componentwise Kahan accumulator for complex values.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanComplex {
    re: KahanSum,
    im: KahanSum,
}

impl KahanComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Dense square complex matrix, row major.
#[derive(Clone, Debug)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self, LinalgError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(LinalgError::NotSquare);
        }
        Ok(CMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0f64;
        for i in 0..self.n {
            for j in i..self.n {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut acc = KahanSum::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    acc.add(self.get(i, j).norm_sqr());
                }
            }
        }
        acc.value().sqrt()
    }
}

pub const EIGEN_DIMENSION_CAP: usize = 256;

/// Extreme eigenvalues of a Hermitian matrix by cyclic Jacobi sweeps.
///
/// Rotations zero one off-diagonal pair at a time; sweeps stop once the
/// off-diagonal Frobenius norm falls below 1e-12 relative to the matrix scale.
pub fn hermitian_extreme_eigenvalues(g: &CMatrix) -> Result<(f64, f64), LinalgError> {
    let n = g.n();
    if n > EIGEN_DIMENSION_CAP {
        return Err(LinalgError::DimensionTooLarge(n, EIGEN_DIMENSION_CAP));
    }
    if g.hermitian_defect() > 1e-10 {
        return Err(LinalgError::NotHermitian);
    }
    if n == 0 {
        return Ok((0.0, 0.0));
    }
    let mut a = g.clone();
    // Symmetrize exactly so rotations preserve Hermitian structure.
    for i in 0..n {
        let d = a.get(i, i);
        a.set(i, i, Complex64::new(d.re, 0.0));
        for j in i + 1..n {
            let avg = (a.get(i, j) + a.get(j, i).conj()) * 0.5;
            a.set(i, j, avg);
            a.set(j, i, avg.conj());
        }
    }
    let scale: f64 = (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j).norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
        .max(1.0);
    let target = 1e-12 * scale;
    for _sweep in 0..60 {
        if a.off_diagonal_norm() <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let mag = apq.norm();
                if mag <= target / (n as f64) {
                    continue;
                }
                // Phase so the pivot becomes real, then a real Jacobi angle.
                let phase = apq / mag;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = D J: D rotates the pivot onto the real axis, J is the
                // real Jacobi rotation zeroing it. A <- U* A U.
                let s_col = phase.conj() * s;
                let c_col = phase.conj() * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * c - akq * s_col);
                    a.set(k, q, akp * s + akq * c_col);
                }
                let s_row = phase * s;
                let c_row = phase * c;
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, apk * c - aqk * s_row);
                    a.set(q, k, apk * s + aqk * c_row);
                }
            }
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let d = a.get(i, i).re;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    Ok((lo, hi))
}

/// Solve G x = b for Hermitian positive definite G by Cholesky.
/// Returns None when a pivot collapses (numerically singular G).
pub fn cholesky_solve(g: &CMatrix, b: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = g.n();
    assert_eq!(b.len(), n);
    let mut l = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut acc = g.get(i, j);
            for k in 0..j {
                acc -= l.get(i, k) * l.get(j, k).conj();
            }
            if i == j {
                if acc.re <= 1e-14 {
                    return None;
                }
                l.set(i, i, Complex64::new(acc.re.sqrt(), 0.0));
            } else {
                l.set(i, j, acc / l.get(j, j).re);
            }
        }
    }
    // Forward then backward substitution.
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l.get(i, k) * y[k];
        }
        y[i] = acc / l.get(i, i).re;
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for k in i + 1..n {
            acc -= l.get(k, i).conj() * x[k];
        }
        x[i] = acc / l.get(i, i).re;
    }
    Some(x)
}
