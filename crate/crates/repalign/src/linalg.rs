//! Dense linear-algebra foundation: row-major matrices, a deterministic
//! thin SVD, label projections, row normalization, and minimum-norm
//! least-squares solutions.
//!
//! The SVD is a two-phase dense reduction: a Householder QR followed by
//! one-sided Jacobi rotations on the triangular factor. Jacobi keeps the
//! factors accurate to well below the 1e-10 reconstruction tolerance this
//! crate promises, and the whole pipeline is deterministic for a fixed
//! input: sweep order is fixed, ties in the singular values keep their
//! column order, and each right singular vector is sign-fixed so its
//! largest-magnitude entry is positive.

use crate::error::{Error, Result};

/// Dense real matrix, row-major. Rows are samples, columns are features.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Mat {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    /// Builds a matrix from row slices. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Mat> {
        if rows.is_empty() {
            return Err(Error::invalid_input("matrix needs at least one row"));
        }
        let cols = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::invalid_input(format!(
                    "ragged rows: row 0 has {} entries, row {} has {}",
                    cols,
                    i,
                    r.len()
                )));
            }
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            data.extend_from_slice(r);
        }
        Ok(Mat { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let lhs = self.row(i);
            let orow = out.row_mut(i);
            for (k, &l) in lhs.iter().enumerate() {
                if l == 0.0 {
                    continue;
                }
                let rhs = other.row(k);
                for (j, &r) in rhs.iter().enumerate() {
                    orow[j] += l * r;
                }
            }
        }
        out
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    /// `selfᵀ * v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "tr_mul_vec shape mismatch");
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let row = self.row(r);
            let s = v[r];
            if s == 0.0 {
                continue;
            }
            for (j, &x) in row.iter().enumerate() {
                out[j] += s * x;
            }
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| c * x).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|&x| x * x).sum::<f64>().sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// New matrix made of the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Mat {
        let mut out = Mat::zeros(indices.len(), self.cols);
        for (i, &r) in indices.iter().enumerate() {
            out.row_mut(i).copy_from_slice(self.row(r));
        }
        out
    }

    /// Appends one constant column (used for the constant bias feature).
    pub fn append_constant_column(&self, value: f64) -> Mat {
        Mat::from_fn(self.rows, self.cols + 1, |r, c| {
            if c < self.cols {
                self.get(r, c)
            } else {
                value
            }
        })
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

#[inline]
pub fn norm(v: &[f64]) -> f64 {
    norm_sq(v).sqrt()
}

/// Thin SVD of a representation matrix: orthonormal `u` (n×r), singular
/// values in strictly descending retained order, orthonormal `v` (d×r),
/// and the numerical rank `r`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Mat,
    pub sigma: Vec<f64>,
    pub v: Mat,
    pub rank: usize,
}

impl SvdResult {
    /// Number of rows of the decomposed matrix.
    pub fn n(&self) -> usize {
        self.u.rows()
    }

    /// Number of columns of the decomposed matrix.
    pub fn d(&self) -> usize {
        self.v.rows()
    }

    /// Largest singular value, or 0 for a zero matrix.
    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// `u · diag(sigma) · vᵀ`.
    pub fn reconstruct(&self) -> Mat {
        let mut out = Mat::zeros(self.u.rows(), self.v.rows());
        for i in 0..self.u.rows() {
            for k in 0..self.rank {
                let s = self.sigma[k] * self.u.get(i, k);
                if s == 0.0 {
                    continue;
                }
                for j in 0..self.v.rows() {
                    let val = out.get(i, j) + s * self.v.get(j, k);
                    out.set(i, j, val);
                }
            }
        }
        out
    }
}

/// Relative cutoff under which singular values count as numerically zero.
fn rank_cutoff(n: usize, d: usize, sigma_max: f64) -> f64 {
    1e-12 * n.max(d) as f64 * sigma_max
}

/// Computes the thin SVD of `phi`.
///
/// Singular values below `1e-12 · max(n, d) · σ_max` are dropped from the
/// factors and excluded from the rank. Results are deterministic: for a
/// fixed input the same factors come back every time, with each `v_i`
/// sign-fixed so its largest-magnitude entry is positive.
pub fn thin_svd(phi: &Mat) -> Result<SvdResult> {
    if phi.rows() == 0 || phi.cols() == 0 {
        return Err(Error::invalid_input("thin_svd: matrix must be at least 1x1"));
    }
    if !phi.all_finite() {
        return Err(Error::invalid_input("thin_svd: matrix has non-finite entries"));
    }

    let n = phi.rows();
    let d = phi.cols();
    let (mut u_cols, mut sigma, mut v_cols) = if n >= d {
        svd_tall(phi)
    } else {
        // Wide matrix: decompose the transpose and swap the factors.
        let (ut, s, vt) = svd_tall(&phi.transpose());
        (vt, s, ut)
    };

    // Descending sort; stable, so exact ties keep their column order.
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).unwrap());
    sigma = order.iter().map(|&i| sigma[i]).collect();
    u_cols = order.iter().map(|&i| std::mem::take(&mut u_cols[i])).collect();
    v_cols = order.iter().map(|&i| std::mem::take(&mut v_cols[i])).collect();

    let cutoff = rank_cutoff(n, d, sigma.first().copied().unwrap_or(0.0));
    let rank = sigma.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
    sigma.truncate(rank);
    u_cols.truncate(rank);
    v_cols.truncate(rank);

    // Sign convention: largest-magnitude entry of each v_i positive.
    for k in 0..rank {
        let mut best = 0;
        for j in 1..v_cols[k].len() {
            if v_cols[k][j].abs() > v_cols[k][best].abs() {
                best = j;
            }
        }
        if v_cols[k][best] < 0.0 {
            for x in v_cols[k].iter_mut() {
                *x = -*x;
            }
            for x in u_cols[k].iter_mut() {
                *x = -*x;
            }
        }
    }

    let u = Mat::from_fn(n, rank, |r, c| u_cols[c][r]);
    let v = Mat::from_fn(d, rank, |r, c| v_cols[c][r]);
    Ok(SvdResult { u, sigma, v, rank })
}

/// SVD core for n ≥ d: Householder QR, then one-sided Jacobi on R.
/// Returns unsorted, untruncated factors as column vectors.
fn svd_tall(phi: &Mat) -> (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>) {
    let n = phi.rows();
    let d = phi.cols();

    let (q_cols, r) = householder_qr(phi);
    let mut b_cols: Vec<Vec<f64>> = (0..d).map(|c| r.col(c)).collect();
    let mut v_cols: Vec<Vec<f64>> = (0..d)
        .map(|c| {
            let mut e = vec![0.0; d];
            e[c] = 1.0;
            e
        })
        .collect();
    one_sided_jacobi(&mut b_cols, &mut v_cols);

    let mut sigma = Vec::with_capacity(d);
    let mut u_cols = Vec::with_capacity(d);
    for j in 0..d {
        let s = norm(&b_cols[j]);
        sigma.push(s);
        let mut u = vec![0.0; n];
        if s > 0.0 {
            // u_j = Q · (b_j / s)
            for (k, qc) in q_cols.iter().enumerate() {
                let w = b_cols[j][k] / s;
                if w == 0.0 {
                    continue;
                }
                for (i, &qv) in qc.iter().enumerate() {
                    u[i] += w * qv;
                }
            }
        }
        u_cols.push(u);
    }
    (u_cols, sigma, v_cols)
}

/// Orthonormal basis for the columns of `a` (n ≥ d required), as an n×d
/// matrix with orthonormal columns. Deterministic for a fixed input.
pub fn orthonormal_columns(a: &Mat) -> Result<Mat> {
    if a.rows() < a.cols() {
        return Err(Error::invalid_input("orthonormal_columns: needs rows >= cols"));
    }
    if !a.all_finite() {
        return Err(Error::invalid_input("orthonormal_columns: non-finite entries"));
    }
    let (q_cols, _) = householder_qr(a);
    Ok(Mat::from_fn(a.rows(), a.cols(), |r, c| q_cols[c][r]))
}

/// Thin Householder QR of an n×d matrix with n ≥ d.
/// Returns Q as d column vectors of length n, and R as a d×d matrix.
fn householder_qr(a: &Mat) -> (Vec<Vec<f64>>, Mat) {
    let n = a.rows();
    let d = a.cols();
    debug_assert!(n >= d);

    // Working columns; reflectors overwrite the subdiagonal of each.
    let mut cols: Vec<Vec<f64>> = (0..d).map(|c| a.col(c)).collect();
    let mut betas = vec![0.0; d];
    let mut rdiag = vec![0.0; d];

    for k in 0..d {
        let nrm = norm(&cols[k][k..]);
        if nrm == 0.0 {
            betas[k] = 0.0;
            rdiag[k] = 0.0;
            // Reflector is identity; clear the stored vector part.
            for i in k..n {
                cols[k][i] = 0.0;
            }
            continue;
        }
        let alpha = if cols[k][k] >= 0.0 { -nrm } else { nrm };
        let mut v0 = cols[k][k] - alpha;
        // v normalized so v[k] = 1; beta = -v0/alpha gives H = I - beta·v·vᵀ.
        let beta = -v0 / alpha;
        for i in (k + 1)..n {
            cols[k][i] /= v0;
        }
        v0 = 1.0;
        cols[k][k] = v0;
        betas[k] = beta;
        rdiag[k] = alpha;

        for j in (k + 1)..d {
            let mut s = cols[j][k];
            for i in (k + 1)..n {
                s += cols[k][i] * cols[j][i];
            }
            s *= beta;
            cols[j][k] -= s;
            for i in (k + 1)..n {
                let h = cols[k][i];
                cols[j][i] -= s * h;
            }
        }
    }

    let mut r = Mat::zeros(d, d);
    for j in 0..d {
        for i in 0..j.min(d) {
            r.set(i, j, cols[j][i]);
        }
        r.set(j, j, rdiag[j]);
    }

    // Q = H_0 · H_1 ⋯ H_{d-1} applied to the first d identity columns.
    let mut q_cols: Vec<Vec<f64>> = (0..d)
        .map(|c| {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            e
        })
        .collect();
    for q in q_cols.iter_mut() {
        for k in (0..d).rev() {
            if betas[k] == 0.0 {
                continue;
            }
            let mut s = 0.0;
            for i in k..n {
                s += cols[k][i] * q[i];
            }
            s *= betas[k];
            for i in k..n {
                q[i] -= s * cols[k][i];
            }
        }
    }

    (q_cols, r)
}

/// One-sided Jacobi: orthogonalizes the columns of `b` in place by plane
/// rotations and accumulates the same rotations into `v`. Afterwards
/// `b = (original b) · V` with mutually orthogonal columns.
fn one_sided_jacobi(b: &mut [Vec<f64>], v: &mut [Vec<f64>]) {
    let k = b.len();
    if k < 2 {
        return;
    }
    let tol = 1e-14;
    let max_sweeps = 100;

    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..k - 1 {
            for q in (p + 1)..k {
                let alpha = norm_sq(&b[p]);
                let beta = norm_sq(&b[q]);
                let gamma = dot(&b[p], &b[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(b, p, q, c, s);
                rotate_pair(v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
}

#[inline]
fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    // Split borrow of two distinct columns.
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    let (head, tail) = cols.split_at_mut(hi);
    let (cp, cq) = if p < q {
        (&mut head[lo], &mut tail[0])
    } else {
        (&mut tail[0], &mut head[lo])
    };
    for (xp, xq) in cp.iter_mut().zip(cq.iter_mut()) {
        let a = *xp;
        let b = *xq;
        *xp = c * a - s * b;
        *xq = s * a + c * b;
    }
}

/// Projects the label vector onto the retained left singular directions:
/// entry `i` is `u_iᵀ y`. The result has length `rank`.
pub fn project_labels(svd: &SvdResult, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != svd.n() {
        return Err(Error::invalid_input(format!(
            "project_labels: label vector has length {}, expected {}",
            y.len(),
            svd.n()
        )));
    }
    let mut out = vec![0.0; svd.rank];
    for (r, &yv) in y.iter().enumerate() {
        if yv == 0.0 {
            continue;
        }
        let row = svd.u.row(r);
        for (k, o) in out.iter_mut().enumerate() {
            *o += yv * row[k];
        }
    }
    Ok(out)
}

/// Scales every nonzero row to unit Euclidean norm; zero rows stay zero.
pub fn normalize_rows(m: &Mat) -> Mat {
    let mut out = m.clone();
    for r in 0..out.rows() {
        let nrm = norm(out.row(r));
        if nrm > 0.0 {
            for x in out.row_mut(r) {
                *x /= nrm;
            }
        }
    }
    out
}

/// Minimum-norm least-squares solution `w* = V diag(1/σ) Uᵀ y` over the
/// retained directions. `Φ w*` is the orthogonal projection of `y` onto
/// the span of `Φ`'s columns.
pub fn least_squares_solution(svd: &SvdResult, y: &[f64]) -> Result<Vec<f64>> {
    let coeffs = project_labels(svd, y)?;
    let mut w = vec![0.0; svd.d()];
    for k in 0..svd.rank {
        let c = coeffs[k] / svd.sigma[k];
        if c == 0.0 {
            continue;
        }
        for (j, wj) in w.iter_mut().enumerate() {
            *wj += c * svd.v.get(j, k);
        }
    }
    Ok(w)
}
