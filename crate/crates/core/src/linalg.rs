//! Self-contained dense complex linear algebra.
//!
//! Row-major storage, value semantics: every operation returns a fresh
//! matrix. The matrices in this crate are small (a few hundred rows at most),
//! so the solvers favor robustness over speed: LU with partial pivoting for
//! inversion, cyclic complex Jacobi rotations for Hermitian eigenproblems,
//! and Hessenberg reduction with Wilkinson-shifted QR for the small
//! non-Hermitian eigenvalue problems ESPRIT needs.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::Error;
use crate::math;

pub use num_complex::Complex64;

/// Shorthand for a complex scalar.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds from a row-major data vector; rejects length mismatches and
    /// non-finite components (the one door through which external data
    /// enters).
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, Error> {
        if rows < 1 || cols < 1 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = ComplexMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Test/setup convenience: build from slices of rows.
    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        assert!(!rows.is_empty() && !rows[0].is_empty());
        let cols = rows[0].len();
        let mut m = ComplexMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, z) in r.iter().enumerate() {
                m[(i, j)] = *z;
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Standard matrix product.
    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        // i-k-j loop order keeps the inner walk contiguous in both operands.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik == ZERO {
                    continue;
                }
                let row_out = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                let row_b = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in row_out.iter_mut().zip(row_b) {
                    *o += aik * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn conj_transpose(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch {
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o += r;
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch {
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o -= r;
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> ComplexMatrix {
        let mut out = self.clone();
        for z in out.data.iter_mut() {
            *z *= s;
        }
        out
    }

    /// Copy of the rectangle `[r0, r1) x [c0, c1)`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> ComplexMatrix {
        assert!(r0 < r1 && r1 <= self.rows && c0 < c1 && c1 <= self.cols);
        ComplexMatrix::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn column(&self, j: usize) -> ComplexMatrix {
        self.submatrix(0, self.rows, j, j + 1)
    }

    /// Horizontal concatenation.
    pub fn hstack(parts: &[&ComplexMatrix]) -> Result<ComplexMatrix, Error> {
        assert!(!parts.is_empty());
        let rows = parts[0].rows;
        let mut cols = 0;
        for p in parts {
            if p.rows != rows {
                return Err(Error::DimensionMismatch {
                    left: (rows, 0),
                    right: p.shape(),
                });
            }
            cols += p.cols;
        }
        let mut out = ComplexMatrix::zeros(rows, cols);
        let mut offset = 0;
        for p in parts {
            for i in 0..rows {
                for j in 0..p.cols {
                    out[(i, offset + j)] = p[(i, j)];
                }
            }
            offset += p.cols;
        }
        Ok(out)
    }

    /// Vertical concatenation.
    pub fn vstack(parts: &[&ComplexMatrix]) -> Result<ComplexMatrix, Error> {
        assert!(!parts.is_empty());
        let cols = parts[0].cols;
        let mut rows = 0;
        for p in parts {
            if p.cols != cols {
                return Err(Error::DimensionMismatch {
                    left: (0, cols),
                    right: p.shape(),
                });
            }
            rows += p.rows;
        }
        let mut out = ComplexMatrix::zeros(rows, cols);
        let mut offset = 0;
        for p in parts {
            for i in 0..p.rows {
                for j in 0..cols {
                    out[(offset + i, j)] = p[(i, j)];
                }
            }
            offset += p.rows;
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0;
        for z in &self.data {
            m = math::fmax(m, z.norm());
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        let n = core::cmp::min(self.rows, self.cols);
        (0..n).map(|i| self[(i, i)]).sum()
    }

    /// Inverse by LU factorization with partial pivoting.
    ///
    /// Rejects inputs whose pivot ratio (a cheap condition estimate) exceeds
    /// 1e12 or whose pivot underflows relative to the matrix scale; both
    /// signal a rank-deficient block.
    pub fn inverse(&self) -> Result<ComplexMatrix, Error> {
        let lu = LuFactors::factor(self)?;
        let n = self.rows;
        let mut inv = ComplexMatrix::zeros(n, n);
        let mut col = vec![ZERO; n];
        for j in 0..n {
            for c in col.iter_mut() {
                *c = ZERO;
            }
            col[j] = ONE;
            lu.solve_in_place(&mut col);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }

    /// Moore-Penrose left inverse `(A^+ A)^-1 A^+` of a full-column-rank
    /// matrix with `rows >= cols`.
    pub fn left_pinv(&self) -> Result<ComplexMatrix, Error> {
        if self.rows < self.cols {
            return Err(Error::SingularBlock);
        }
        let ah = self.conj_transpose();
        let gram = ah.matmul(self)?;
        gram.inverse()?.matmul(&ah)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Condition gate for block inversion: largest/smallest absolute LU pivot.
const PIVOT_RATIO_LIMIT: f64 = 1e12;
/// A pivot below this fraction of the matrix scale counts as zero.
const PIVOT_REL_FLOOR: f64 = 1e-14;

struct LuFactors {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl LuFactors {
    fn factor(a: &ComplexMatrix) -> Result<LuFactors, Error> {
        if a.rows != a.cols {
            return Err(Error::NotSquare {
                rows: a.rows,
                cols: a.cols,
            });
        }
        let n = a.rows;
        let scale = a.max_abs();
        if scale == 0.0 {
            return Err(Error::SingularBlock);
        }
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_piv = f64::INFINITY;
        let mut max_piv = 0.0_f64;
        for k in 0..n {
            // partial pivoting on column k
            let mut best = k;
            let mut best_mag = lu[k * n + k].norm();
            for r in (k + 1)..n {
                let mag = lu[r * n + k].norm();
                if mag > best_mag {
                    best = r;
                    best_mag = mag;
                }
            }
            if best != k {
                for j in 0..n {
                    lu.swap(k * n + j, best * n + j);
                }
                perm.swap(k, best);
            }
            if best_mag <= PIVOT_REL_FLOOR * scale {
                return Err(Error::SingularBlock);
            }
            min_piv = math::fmin(min_piv, best_mag);
            max_piv = math::fmax(max_piv, best_mag);
            let piv = lu[k * n + k];
            for r in (k + 1)..n {
                let factor = lu[r * n + k] / piv;
                lu[r * n + k] = factor;
                for j in (k + 1)..n {
                    let v = lu[k * n + j];
                    lu[r * n + j] -= factor * v;
                }
            }
        }
        if max_piv / min_piv >= PIVOT_RATIO_LIMIT {
            return Err(Error::SingularBlock);
        }
        Ok(LuFactors { n, lu, perm })
    }

    /// Solves `A x = b` in place, `b` given in un-permuted order.
    #[allow(clippy::needless_range_loop)]
    fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        let mut x = vec![ZERO; n];
        for i in 0..n {
            x[i] = b[self.perm[i]];
        }
        // forward: L y = P b (unit diagonal)
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        // backward: U x = y
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        b.copy_from_slice(&x);
    }
}

const JACOBI_SWEEP_CAP: usize = 100;
const JACOBI_OFF_DIAG_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-9;

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Returns eigenvalues sorted descending and the matching orthonormal
/// eigenvector columns. The input must be Hermitian to `1e-9 * ||a||_F`.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), Error> {
    if a.rows() != a.cols() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let norm = a.frobenius_norm();
    let dev = a.sub(&a.conj_transpose()).unwrap().frobenius_norm();
    if dev > HERMITIAN_TOL * math::fmax(norm, f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian);
    }

    // Work on the exactly Hermitian average so rotations see clean input.
    let mut m = ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let tol = JACOBI_OFF_DIAG_TOL * norm;

    let off_diag = |m: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        math::sqrt(s)
    };

    let mut converged = off_diag(&m) <= tol;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= JACOBI_SWEEP_CAP {
            return Err(Error::NoConvergence);
        }
        sweeps += 1;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= tol / (n as f64) {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phase = apq / mag; // e^{i phi}
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + math::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + math::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = t * c;
                let u = phase * s; // rotation off-diagonal entry

                // A <- U^+ A U with U = [[c, u], [-conj(u), c]] on (p, q).
                for r in 0..n {
                    let mrp = m[(r, p)];
                    let mrq = m[(r, q)];
                    m[(r, p)] = mrp * c - mrq * u.conj();
                    m[(r, q)] = mrp * u + mrq * c;
                }
                for col in 0..n {
                    let mpc = m[(p, col)];
                    let mqc = m[(q, col)];
                    m[(p, col)] = mpc * c - mqc * u;
                    m[(q, col)] = mpc * u.conj() + mqc * c;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = c64(m[(p, p)].re, 0.0);
                m[(q, q)] = c64(m[(q, q)].re, 0.0);

                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * c - vrq * u.conj();
                    v[(r, q)] = vrp * u + vrq * c;
                }
            }
        }
        converged = off_diag(&m) <= tol;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((values, vectors))
}

const GENERAL_EIG_MAX_DIM: usize = 16;
const QR_ITER_CAP_PER_EIG: usize = 60;

/// Eigenvalues of a general complex matrix via Hessenberg reduction and
/// Wilkinson-shifted QR iteration. Intended for small matrices (source-count
/// sized); dimension is capped accordingly.
pub fn general_eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>, Error> {
    if a.rows() != a.cols() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n > GENERAL_EIG_MAX_DIM {
        return Err(Error::UnsupportedDimension {
            dim: n,
            max: GENERAL_EIG_MAX_DIM,
        });
    }
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }

    let mut h = hessenberg(a);
    let mut eigs: Vec<Complex64> = Vec::with_capacity(n);
    let eps = f64::EPSILON;
    let hnorm = math::fmax(h.frobenius_norm(), f64::MIN_POSITIVE);

    let mut hi = n - 1;
    loop {
        // deflate negligible subdiagonals
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let local = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let gate = eps * math::fmax(local, eps * hnorm);
            if sub <= gate {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }

        if lo == hi {
            eigs.push(h[(hi, hi)]);
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }
        if lo + 1 == hi {
            let (l1, l2) = eig_2x2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eigs.push(l1);
            eigs.push(l2);
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            continue;
        }

        // shifted QR sweeps on the active window [lo, hi]
        let mut iters = 0;
        loop {
            iters += 1;
            if iters > QR_ITER_CAP_PER_EIG {
                return Err(Error::NoConvergence);
            }
            let shift = if iters % 12 == 0 {
                // exceptional shift to break rare stalls
                h[(hi, hi)] + c64(h[(hi, hi - 1)].norm(), 0.0)
            } else {
                wilkinson_shift(&h, hi)
            };
            qr_step(&mut h, lo, hi, shift);

            // an interior subdiagonal may deflate before the corner; zero
            // whichever collapses and let the outer scan re-split the window
            let mut split = false;
            for m in ((lo + 1)..=hi).rev() {
                let sub = h[(m, m - 1)].norm();
                let local = h[(m - 1, m - 1)].norm() + h[(m, m)].norm();
                if sub <= eps * math::fmax(local, eps * hnorm) {
                    h[(m, m - 1)] = ZERO;
                    split = true;
                    break;
                }
            }
            if split {
                break;
            }
        }
    }
    Ok(eigs)
}

/// Similarity reduction to upper Hessenberg form by complex Householder
/// reflectors; eigenvalues are preserved, transforms are not accumulated.
fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let mut xnorm_sq = 0.0;
        for i in (k + 1)..n {
            xnorm_sq += h[(i, k)].norm_sqr();
        }
        let xnorm = math::sqrt(xnorm_sq);
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let sign = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        // v = x + sign(x0) * ||x|| * e1
        let mut v = vec![ZERO; n - k - 1];
        for (idx, i) in ((k + 1)..n).enumerate() {
            v[idx] = h[(i, k)];
        }
        v[0] += sign * xnorm;
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;

        // left: H <- (I - beta v v^+) H on rows k+1..n
        for col in 0..n {
            let mut dot = ZERO;
            for (idx, i) in ((k + 1)..n).enumerate() {
                dot += v[idx].conj() * h[(i, col)];
            }
            dot *= beta;
            for (idx, i) in ((k + 1)..n).enumerate() {
                let w = v[idx] * dot;
                h[(i, col)] -= w;
            }
        }
        // right: H <- H (I - beta v v^+) on cols k+1..n
        for row in 0..n {
            let mut dot = ZERO;
            for (idx, j) in ((k + 1)..n).enumerate() {
                dot += h[(row, j)] * v[idx];
            }
            dot *= beta;
            for (idx, j) in ((k + 1)..n).enumerate() {
                let w = dot * v[idx].conj();
                h[(row, j)] -= w;
            }
        }
        // zero out the annihilated entries explicitly
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// Eigenvalues of `[[a, b], [c, d]]`.
fn eig_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let mean = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (mean * mean - det).sqrt();
    (mean + disc, mean - disc)
}

/// Eigenvalue of the trailing 2x2 block closest to the corner entry.
fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> Complex64 {
    let (l1, l2) = eig_2x2(
        h[(hi - 1, hi - 1)],
        h[(hi - 1, hi)],
        h[(hi, hi - 1)],
        h[(hi, hi)],
    );
    let corner = h[(hi, hi)];
    if (l1 - corner).norm() <= (l2 - corner).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit-shift QR step on the decoupled Hessenberg window `[lo, hi]`.
fn qr_step(h: &mut ComplexMatrix, lo: usize, hi: usize, shift: Complex64) {
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    // QR by Givens rotations zeroing each subdiagonal in the window
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let x = h[(k, k)];
        let y = h[(k + 1, k)];
        let (c, s) = givens(x, y);
        rotations.push((c, s));
        for col in k..=hi {
            let hk = h[(k, col)];
            let hk1 = h[(k + 1, col)];
            h[(k, col)] = hk * c + hk1 * s;
            h[(k + 1, col)] = -hk * s.conj() + hk1 * c;
        }
        h[(k + 1, k)] = ZERO;
    }
    // RQ: apply the conjugated rotations on the right, in order
    for (idx, (c, s)) in rotations.iter().enumerate() {
        let k = lo + idx;
        let top = core::cmp::min(k + 1, hi);
        for row in lo..=top {
            let hk = h[(row, k)];
            let hk1 = h[(row, k + 1)];
            h[(row, k)] = hk * *c + hk1 * s.conj();
            h[(row, k + 1)] = -hk * *s + hk1 * *c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Complex Givens rotation `G = [[c, s], [-conj(s), c]]` (c real) with
/// `G [x; y] = [r; 0]`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ymag = y.norm();
    if ymag == 0.0 {
        return (1.0, ZERO);
    }
    let xmag = x.norm();
    let rho = math::hypot(xmag, ymag);
    if xmag == 0.0 {
        return (0.0, y.conj() / ymag);
    }
    let c = xmag / rho;
    let s = (x / xmag) * y.conj() / rho;
    (c, s)
}

/// Singular values (descending) as square roots of the eigenvalues of
/// `A^+ A`; tiny negative eigenvalues from rounding clamp to zero.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>, Error> {
    let gram = a.conj_transpose().matmul(a).unwrap();
    let (mut vals, _) = hermitian_eig(&gram)?;
    for v in vals.iter_mut() {
        *v = math::sqrt(math::fmax(*v, 0.0));
    }
    Ok(vals)
}

const RANK_DROP_TOL: f64 = 1e-12;

/// Orthonormal basis of the column space by modified Gram-Schmidt with one
/// reorthogonalization pass; columns whose residual collapses are dropped.
pub fn orthonormal_columns(a: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
    let n = a.rows();
    let scale = a.max_abs();
    if scale == 0.0 {
        return Err(Error::DegenerateSubspace);
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for j in 0..a.cols() {
        let mut v: Vec<Complex64> = (0..n).map(|i| a[(i, j)]).collect();
        for _ in 0..2 {
            for b in &basis {
                let dot: Complex64 = b.iter().zip(&v).map(|(bi, vi)| bi.conj() * vi).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= dot * bi;
                }
            }
        }
        let norm = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
        if norm <= RANK_DROP_TOL * scale * math::sqrt(n as f64) {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        basis.push(v);
    }
    if basis.is_empty() {
        return Err(Error::DegenerateSubspace);
    }
    Ok(ComplexMatrix::from_fn(n, basis.len(), |i, j| basis[j][i]))
}

/// Smallest principal angle, in radians, between the row space of `a`
/// (spanned by the conjugated rows) and the column space of `b`.
///
/// Computed from the singular values of `Qa^+ Qb` where `Qa`, `Qb` are
/// orthonormal bases; a numerically zero product yields `pi/2`.
pub fn principal_angle(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64, Error> {
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    let qa = orthonormal_columns(&a.conj_transpose())?;
    let qb = orthonormal_columns(b)?;
    let product = qa.conj_transpose().matmul(&qb).unwrap();
    let svals = singular_values(&product)?;
    let cos = math::fmin(math::fmax(svals[0], 0.0), 1.0);
    Ok(math::atan2(math::sqrt(1.0 - cos * cos), cos))
}
