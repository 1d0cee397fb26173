//! Small dense complex and real matrices.
//!
//! Everything here is sized for space-time codes: a few antennas, a few
//! channel uses, so at most a couple of dozen rows. Entries are stored row-major.
//!
//! Two realification maps tie the complex and real worlds together:
//!
//! - [`check_realify`] replaces every complex entry `a + jb` by the 2x2 block
//!   `[[a, -b], [b, a]]`; it is a ring homomorphism, so products commute with it.
//! - [`vec_realify`] interleaves real and imaginary parts of a vector.
//!
//! With `C = AB`, `vec_realify(vec(C)) = (I_p ⊗ check(A)) vec_realify(vec(B))`.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::tol;
use crate::{Error, Result};

/// Dense complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Dense real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CMat {
    /// Builds a matrix from row-major entries, rejecting empty shapes and non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("{rows}x{cols} matrix")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if let Some(i) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { row: i / cols, col: i % cols });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        let data = (0..rows * cols).map(|i| f(i / cols, i % cols)).collect();
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, rhs: &CMat) -> Result<CMat> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(l, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &CMat) -> Result<CMat> {
        self.same_shape(rhs)?;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Ok(CMat { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, rhs: &CMat) -> Result<CMat> {
        self.same_shape(rhs)?;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(CMat { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: Complex64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * c).collect() }
    }

    /// `self += c * other`, shapes must agree.
    pub fn axpy(&mut self, c: f64, other: &CMat) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "axpy shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * c;
        }
    }

    /// Squared Frobenius norm.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `X X^H`.
    pub fn gram(&self) -> CMat {
        let n = self.rows;
        let mut g = CMat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..self.cols {
                    acc += self[(i, t)] * self[(j, t)].conj();
                }
                g[(i, j)] = acc;
                g[(j, i)] = acc.conj();
            }
        }
        g
    }

    /// Column-stacked vectorization.
    pub fn vec(&self) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self[(i, j)]);
            }
        }
        v
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    fn same_shape(&self, rhs: &CMat) -> Result<()> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Error::Dimension(format!(
                "shape mismatch {}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl RMat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("{rows}x{cols} matrix")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: i / cols, col: i % cols });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        let data = (0..rows * cols).map(|i| f(i / cols, i % cols)).collect();
        Self { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let rows = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != rows) {
            return Err(Error::Dimension("columns of unequal length".into()));
        }
        let mut data = vec![0.0; rows * cols.len()];
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                data[i * cols.len() + j] = x;
            }
        }
        RMat::new(rows, cols.len(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> RMat {
        RMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, rhs: &RMat) -> Result<RMat> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = RMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(l, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec length mismatch");
        self.data.chunks_exact(self.cols).map(|row| dot(row, x)).collect()
    }

    pub fn scale(&self, c: f64) -> RMat {
        RMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn sub(&self, rhs: &RMat) -> Result<RMat> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Error::Dimension("shape mismatch".into()));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(RMat { rows: self.rows, cols: self.cols, data })
    }

    /// `I_p ⊗ self`, block diagonal with `p` copies.
    pub fn kron_identity(&self, p: usize) -> RMat {
        let mut out = RMat::zeros(p * self.rows, p * self.cols);
        for b in 0..p {
            for i in 0..self.rows {
                for j in 0..self.cols {
                    out[(b * self.rows + i, b * self.cols + j)] = self[(i, j)];
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Rank by Gaussian elimination with full pivoting; pivots below
    /// `tol::RANK` times the largest entry count as zero.
    pub fn rank(&self) -> usize {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0;
        }
        let (m, n) = (self.rows, self.cols);
        let mut a = self.data.clone();
        let mut rank = 0;
        let mut row_used = vec![false; m];
        let mut col_used = vec![false; n];
        loop {
            let mut best = (0.0, 0, 0);
            for i in (0..m).filter(|&i| !row_used[i]) {
                for j in (0..n).filter(|&j| !col_used[j]) {
                    let v = a[i * n + j].abs();
                    if v > best.0 {
                        best = (v, i, j);
                    }
                }
            }
            let (piv, pi, pj) = best;
            if piv <= tol::RANK * scale {
                break;
            }
            rank += 1;
            row_used[pi] = true;
            col_used[pj] = true;
            for i in (0..m).filter(|&i| !row_used[i]) {
                let f = a[i * n + pj] / a[pi * n + pj];
                if f != 0.0 {
                    for j in 0..n {
                        a[i * n + j] -= f * a[pi * n + j];
                    }
                }
            }
        }
        rank
    }
}

impl Index<(usize, usize)> for RMat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Replaces each entry `a + jb` with the block `[[a, -b], [b, a]]`.
pub fn check_realify(x: &CMat) -> RMat {
    let mut out = RMat::zeros(2 * x.rows, 2 * x.cols);
    for i in 0..x.rows {
        for j in 0..x.cols {
            let z = x[(i, j)];
            out[(2 * i, 2 * j)] = z.re;
            out[(2 * i, 2 * j + 1)] = -z.im;
            out[(2 * i + 1, 2 * j)] = z.im;
            out[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    out
}

/// Interleaves real and imaginary parts: `[x1_re, x1_im, x2_re, ...]`.
pub fn vec_realify(x: &[Complex64]) -> Vec<f64> {
    x.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Inverse of [`vec_realify`].
pub fn vec_complexify(x: &[f64]) -> Vec<Complex64> {
    assert!(x.len().is_multiple_of(2), "odd-length real vector");
    x.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

/// Determinant by LU with partial pivoting. Exactly singular input yields zero.
pub fn det_c(x: &CMat) -> Result<Complex64> {
    if !x.is_square() {
        return Err(Error::Dimension(format!("determinant of {}x{} matrix", x.rows, x.cols)));
    }
    let mut a = x.data.clone();
    Ok(det_c_in_place(&mut a, x.rows))
}

/// LU determinant over a scratch buffer holding a row-major `n x n` matrix.
pub(crate) fn det_c_in_place(a: &mut [Complex64], n: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].norm_sqr();
        for i in k + 1..n {
            let v = a[i * n + k].norm_sqr();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let piv = a[k * n + k];
        det *= piv;
        for i in k + 1..n {
            let f = a[i * n + k] / piv;
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let t = a[k * n + j];
                a[i * n + j] -= f * t;
            }
        }
    }
    det
}

/// Real determinant by LU with partial pivoting.
pub fn det_r(x: &RMat) -> Result<f64> {
    if x.rows != x.cols {
        return Err(Error::Dimension(format!("determinant of {}x{} matrix", x.rows, x.cols)));
    }
    let n = x.rows;
    let mut a = x.data.clone();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs())).unwrap();
        if a[p * n + k] == 0.0 {
            return Ok(0.0);
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let piv = a[k * n + k];
        det *= piv;
        for i in k + 1..n {
            let f = a[i * n + k] / piv;
            for j in k + 1..n {
                a[i * n + j] -= f * a[k * n + j];
            }
        }
    }
    Ok(det)
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi, descending.
pub fn sym_eigvals(a: &RMat) -> Result<Vec<f64>> {
    if a.rows != a.cols {
        return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
    }
    let n = a.rows;
    let mut m = a.data.clone();
    let norm = a.frobenius();
    if norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    for _ in 0..tol::JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].powi(2))
            .sum();
        if off.sqrt() <= tol::JACOBI * norm {
            let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
            ev.sort_by(|x, y| y.total_cmp(x));
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    Err(Error::Numerical("Jacobi eigenvalue iteration did not converge".into()))
}

/// Eigenvalues of `X X^H` (squared singular values of `X`), descending and
/// nonnegative.
///
/// The Hermitian Gram matrix is realified to a symmetric matrix of twice the
/// size whose spectrum repeats each eigenvalue twice; every other entry of the
/// sorted real spectrum is returned.
pub fn gram_eigvals(x: &CMat) -> Vec<f64> {
    let g = check_realify(&x.gram());
    let ev = sym_eigvals(&g).expect("Jacobi on a symmetric PSD matrix converges");
    let scale = ev.first().copied().unwrap_or(0.0).max(1.0);
    ev.iter()
        .step_by(2)
        .map(|&l| {
            assert!(l > -tol::EIG_CLAMP * scale * 1e3, "Gram eigenvalue {l} is significantly negative");
            l.max(0.0)
        })
        .collect()
}

/// Thin Householder QR of a tall matrix: `x = Q R` with `Q` having
/// orthonormal columns and `R` upper triangular with nonnegative diagonal.
pub fn qr_real(x: &RMat) -> Result<(RMat, RMat)> {
    let (m, n) = (x.rows, x.cols);
    if m < n {
        return Err(Error::RankDeficient { rank: m, needed: n });
    }
    let scale = x.frobenius();
    let mut r = x.clone();
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let norm: f64 = (k..m).map(|i| r[(i, k)].powi(2)).sum::<f64>().sqrt();
        if norm <= tol::RANK * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::RankDeficient { rank: k, needed: n });
        }
        let alpha = if r[(k, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 > 0.0 {
            for j in k..n {
                let proj = (k..m).map(|i| v[i - k] * r[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
                for i in k..m {
                    r[(i, j)] -= proj * v[i - k];
                }
            }
        }
        vs.push(v);
    }
    // Accumulate Q = H_0 H_1 ... H_{n-1} applied to the first n columns of I.
    let mut q = RMat::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 });
    for k in (0..n).rev() {
        let v = &vs[k];
        let vnorm2 = dot(v, v);
        if vnorm2 == 0.0 {
            continue;
        }
        for j in 0..n {
            let proj = (k..m).map(|i| v[i - k] * q[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
            for i in k..m {
                q[(i, j)] -= proj * v[i - k];
            }
        }
    }
    let mut rr = RMat::from_fn(n, n, |i, j| if j >= i { r[(i, j)] } else { 0.0 });
    for i in 0..n {
        if rr[(i, i)] < 0.0 {
            for j in i..n {
                rr[(i, j)] = -rr[(i, j)];
            }
            for row in 0..m {
                q[(row, i)] = -q[(row, i)];
            }
        }
    }
    Ok((q, rr))
}

/// `log2 det(A)` for a symmetric positive definite matrix via Cholesky.
pub fn log2_det_spd(a: &RMat) -> Result<f64> {
    let n = a.rows;
    if n != a.cols {
        return Err(Error::Dimension("log-det of a non-square matrix".into()));
    }
    let mut l = vec![0.0; n * n];
    let mut acc = 0.0;
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 {
            return Err(Error::Numerical("matrix is not positive definite".into()));
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        acc += djj.log2();
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Ok(2.0 * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_cmat(rng: &mut impl Rng, r: usize, cc: usize) -> CMat {
        CMat::from_fn(r, cc, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    /// Unitary from a product of Householder reflections `I - 2 v v^H / |v|^2`.
    fn random_unitary(rng: &mut impl Rng, n: usize) -> CMat {
        let mut q = CMat::identity(n);
        for _ in 0..n {
            let v: Vec<Complex64> =
                (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            let h = CMat::from_fn(n, n, |i, j| {
                let id = if i == j { 1.0 } else { 0.0 };
                c(id, 0.0) - v[i] * v[j].conj() * (2.0 / nv)
            });
            q = q.mul(&h).unwrap();
        }
        q
    }

    #[test]
    fn realify_single_entry() {
        let x = CMat::new(1, 1, vec![c(1.0, 2.0)]).unwrap();
        let r = check_realify(&x);
        assert_eq!(r.as_slice(), &[1.0, -2.0, 2.0, 1.0]);
        assert_eq!(check_realify(&CMat::identity(2)), RMat::identity(4));
    }

    #[test]
    fn vec_realify_interleaves() {
        assert_eq!(vec_realify(&[c(1.0, 2.0), c(3.0, 0.0)]), vec![1.0, 2.0, 3.0, 0.0]);
        assert_eq!(vec_realify(&[c(0.0, 0.0); 3]), vec![0.0; 6]);
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(CMat::new(0, 2, vec![]).is_err());
        assert!(CMat::new(1, 2, vec![c(0.0, 0.0)]).is_err());
        assert!(matches!(
            CMat::new(1, 2, vec![c(0.0, 0.0), c(f64::NAN, 0.0)]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(RMat::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn det_examples() {
        assert_relative_eq!(det_c(&CMat::identity(3)).unwrap().re, 1.0);
        let d = det_c(&CMat::diag(&[c(2.0, 0.0), c(0.0, 3.0)])).unwrap();
        assert!((d - c(0.0, 6.0)).norm() < 1e-14);
        let sing = CMat::new(2, 2, vec![c(1.0, 1.0), c(2.0, 2.0), c(1.0, 1.0), c(2.0, 2.0)]).unwrap();
        assert!(det_c(&sing).unwrap().norm() < 1e-12);
        assert!(det_c(&CMat::zeros(2, 3)).is_err());
    }

    #[test]
    fn unitary_has_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=6 {
            let q = random_unitary(&mut rng, n);
            assert!((det_c(&q).unwrap().norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn real_det_matches_complex_realification() {
        // det(check(A)) = |det A|^2
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_cmat(&mut rng, 4, 4);
        let lhs = det_r(&check_realify(&a)).unwrap();
        let rhs = det_c(&a).unwrap().norm_sqr();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
    }

    #[test]
    fn gram_eigvals_examples() {
        assert_eq!(gram_eigvals(&CMat::identity(2)), vec![1.0, 1.0]);
        let x = CMat::diag(&[c(2.0, 0.0), c(0.0, 0.0)]);
        let ev = gram_eigvals(&x);
        assert_relative_eq!(ev[0], 4.0, epsilon = 1e-12);
        assert_eq!(ev[1], 0.0);
    }

    #[test]
    fn gram_eigvals_product_is_gram_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=8 {
            for t in [n, n + 1, 8] {
                let x = random_cmat(&mut rng, n, t);
                let prod: f64 = gram_eigvals(&x).iter().product();
                let det = det_c(&x.gram()).unwrap().re;
                assert_relative_eq!(prod, det, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn gram_eigvals_invariant_under_right_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=5 {
            let x = random_cmat(&mut rng, n, 4);
            let u = random_unitary(&mut rng, 4);
            let a = gram_eigvals(&x);
            let b = gram_eigvals(&x.mul(&u).unwrap());
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn qr_identity_and_reconstruction() {
        let (q, r) = qr_real(&RMat::identity(4)).unwrap();
        assert!(q.sub(&RMat::identity(4)).unwrap().max_abs() < 1e-15);
        assert!(r.sub(&RMat::identity(4)).unwrap().max_abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = RMat::from_fn(8, 4, |_, _| rng.random_range(-1.0..1.0));
            let (q, r) = qr_real(&x).unwrap();
            let qtq = q.transpose().mul(&q).unwrap();
            assert!(qtq.sub(&RMat::identity(4)).unwrap().frobenius() <= 1e-10);
            let rec = q.mul(&r).unwrap();
            assert!(rec.sub(&x).unwrap().frobenius() / x.frobenius() <= 1e-10);
            for i in 0..4 {
                assert!(r[(i, i)] >= 0.0);
                for j in 0..i {
                    assert_eq!(r[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn qr_rejects_rank_deficient() {
        let x = RMat::from_columns(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).unwrap();
        assert!(matches!(qr_real(&x), Err(Error::RankDeficient { .. })));
        assert!(matches!(qr_real(&RMat::zeros(2, 3)), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn rank_by_elimination() {
        let x = RMat::from_columns(&[vec![1.0, 0.0, 1.0], vec![2.0, 0.0, 2.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(x.rank(), 2);
        assert_eq!(RMat::identity(5).rank(), 5);
        assert_eq!(RMat::zeros(3, 3).rank(), 0);
    }

    #[test]
    fn log_det_matches_lu() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = RMat::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
        let a = b.transpose().mul(&b).unwrap();
        let a = RMat::from_fn(5, 5, |i, j| a[(i, j)] + if i == j { 1.0 } else { 0.0 });
        assert_relative_eq!(log2_det_spd(&a).unwrap(), det_r(&a).unwrap().log2(), epsilon = 1e-10);
    }

    fn cmat_strategy(r: usize, cc: usize) -> impl Strategy<Value = CMat> {
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), r * cc)
            .prop_map(move |v| CMat::new(r, cc, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn realify_is_multiplicative((a, b) in (1usize..5, 1usize..5, 1usize..5).prop_flat_map(|(m, n, p)| (cmat_strategy(m, n), cmat_strategy(n, p)))) {
            let lhs = check_realify(&a.mul(&b).unwrap());
            let rhs = check_realify(&a).mul(&check_realify(&b)).unwrap();
            let scale = lhs.max_abs().max(1.0);
            prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12 * scale);
        }

        #[test]
        fn vec_realify_of_product((a, b) in (1usize..5, 1usize..5, 1usize..5).prop_flat_map(|(m, n, p)| (cmat_strategy(m, n), cmat_strategy(n, p)))) {
            let lhs = vec_realify(&a.mul(&b).unwrap().vec());
            let rhs = check_realify(&a).kron_identity(b.cols()).matvec(&vec_realify(&b.vec()));
            for (x, y) in lhs.iter().zip(&rhs) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }
}
