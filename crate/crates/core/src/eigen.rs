//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation zeroes one off-diagonal pair `(p, q)` with a unitary
//! transform that first strips the phase of `a_pq` and then applies a
//! real Givens rotation. Sweeps visit all pairs in row order until the
//! off-diagonal Frobenius norm falls below `tol * ||H||_F`.

use crate::linalg::Matrix;
use crate::{Error, Result, C64};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: Matrix<C64>,
}

/// Full eigendecomposition `H = V diag(values) V^H`.
pub fn hermitian_eigendecompose(h: &Matrix<C64>, tol: f64) -> Result<HermitianEigen> {
    let (values, vt) = jacobi(h, tol, true)?;
    let vt = vt.expect("eigenvectors requested");
    let order = descending_order(&values);
    let n = values.len();
    let vectors = Matrix::from_fn(n, n, |i, j| vt[(order[j], i)]);
    Ok(HermitianEigen {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors,
    })
}

/// Eigenvalues only, descending. Skips the eigenvector accumulation.
pub fn hermitian_eigenvalues(h: &Matrix<C64>, tol: f64) -> Result<Vec<f64>> {
    let (values, _) = jacobi(h, tol, false)?;
    let order = descending_order(&values);
    Ok(order.iter().map(|&k| values[k]).collect())
}

/// Stable sort: ties keep ascending index of discovery.
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

fn check_hermitian(h: &Matrix<C64>, tol: f64) -> Result<()> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let n = h.rows();
    let scale = h.max_abs().max(1.0);
    let mut deviation = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (h[(i, j)] - h[(j, i)].conj()).norm();
            if !d.is_finite() {
                return Err(Error::NonFinite(i * n + j));
            }
            deviation = deviation.max(d);
        }
    }
    if deviation > tol * scale {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

#[allow(clippy::type_complexity)]
fn jacobi(h: &Matrix<C64>, tol: f64, want_vectors: bool) -> Result<(Vec<f64>, Option<Matrix<C64>>)> {
    check_hermitian(h, tol.max(1e-14))?;
    let n = h.rows();

    // Work on an exactly Hermitian copy with a real diagonal.
    let mut a = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => C64::new(h[(i, i)].re, 0.0),
        std::cmp::Ordering::Less => h[(i, j)],
        std::cmp::Ordering::Greater => h[(j, i)].conj(),
    });
    // Rows of `vt` are the eigenvector columns of V.
    let mut vt = want_vectors.then(|| Matrix::<C64>::identity(n));

    let total = a.frobenius();
    let target = tol * total;
    let mut off = off_diagonal_norm(&a);
    let mut sweeps = 0;
    while off > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, vt.as_mut(), p, q, n);
            }
        }
        off = off_diagonal_norm(&a);
    }
    let values = (0..n).map(|i| a[(i, i)].re).collect();
    Ok((values, vt))
}

fn off_diagonal_norm(a: &Matrix<C64>) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for (j, x) in a.row(i).iter().enumerate() {
            if i != j {
                s += x.norm_sqr();
            }
        }
    }
    s.sqrt()
}

#[inline]
fn rotate(a: &mut Matrix<C64>, vt: Option<&mut Matrix<C64>>, p: usize, q: usize, n: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Below resolution of both diagonal entries: the rotation is a no-op.
    if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = C64::new(0.0, 0.0);
        a[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let s_phase = phase * s;
    let s_phase_conj = s_phase.conj();

    // Rows p and q: row_p' = c row_p - s e row_q, row_q' = s conj(e) row_p + c row_q.
    {
        let (lo, hi) = a.as_mut_rows(p, q);
        for k in 0..n {
            let xp = lo[k];
            let xq = hi[k];
            lo[k] = xp * c - s_phase * xq;
            hi[k] = s_phase_conj * xp + xq * c;
        }
    }
    // Mirror into columns p and q.
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let xp = a[(p, k)].conj();
        let xq = a[(q, k)].conj();
        a[(k, p)] = xp;
        a[(k, q)] = xq;
    }
    a[(p, p)] = C64::new(app - t * mag, 0.0);
    a[(q, q)] = C64::new(aqq + t * mag, 0.0);
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);

    // V' = V G: col_p' = c col_p - s conj(e) col_q, col_q' = s e col_p + c col_q.
    if let Some(vt) = vt {
        let (lo, hi) = vt.as_mut_rows(p, q);
        for k in 0..n {
            let xp = lo[k];
            let xq = hi[k];
            lo[k] = xp * c - s_phase_conj * xq;
            hi[k] = s_phase * xp + xq * c;
        }
    }
}

impl Matrix<C64> {
    /// Disjoint mutable borrows of rows `p < q`.
    fn as_mut_rows(&mut self, p: usize, q: usize) -> (&mut [C64], &mut [C64]) {
        debug_assert!(p < q);
        let n = self.cols();
        let data = self.data_mut();
        let (head, tail) = data.split_at_mut(q * n);
        (&mut head[p * n..(p + 1) * n], &mut tail[..n])
    }
}
