//! HiPPO-LegS matrices, the normal form `A + P P^T`, and its diagonal
//! spectrum.

use serde::Serialize;

use crate::eigen::{self, HermitianEigen, DEFAULT_TOL};
use crate::linalg::Matrix;
use crate::{Error, Result, C64};

/// Dense state space triple `(A, B, C)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSpec {
    pub a: Matrix<C64>,
    pub b: Vec<C64>,
    /// Output map; `None` until a caller initializes it.
    pub c: Option<Vec<C64>>,
}

impl DenseSpec {
    pub fn new(a: Matrix<C64>, b: Vec<C64>, c: Option<Vec<C64>>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        if n == 0 {
            return Err(Error::ZeroStateSize);
        }
        if b.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: b.len(),
            });
        }
        if let Some(c) = &c {
            if c.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: c.len(),
                });
            }
        }
        Ok(Self { a, b, c })
    }

    /// Embeds a diagonal system densely.
    pub fn from_diagonal(a: &[C64], b: &[C64], c: &[C64]) -> Result<Self> {
        Self::new(Matrix::from_diag(a), b.to_vec(), Some(c.to_vec()))
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn with_c(mut self, c: Vec<C64>) -> Result<Self> {
        if c.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                actual: c.len(),
            });
        }
        self.c = Some(c);
        Ok(self)
    }

    pub fn is_real(&self) -> bool {
        self.a.as_slice().iter().chain(&self.b).all(|z| z.im == 0.0)
    }
}

/// Rank-1 correction factor `P` of the DPLR form.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankFactor {
    pub p: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
    /// True when ordered by descending imaginary part.
    pub sorted: bool,
}

impl Spectrum {
    /// Entries with nonnegative imaginary part, in stored order. For an even
    /// spectrum with exact conjugate pairing this is the first half.
    pub fn positive_half(&self) -> Vec<C64> {
        let half = self.eigenvalues.len().div_ceil(2);
        self.eigenvalues[..half].to_vec()
    }

    /// Largest deviation of `sort(Im)` from an exact `+/-` pairing.
    pub fn pairing_defect(&self) -> f64 {
        let mut im: Vec<f64> = self.eigenvalues.iter().map(|z| z.im).collect();
        im.sort_by(f64::total_cmp);
        let n = im.len();
        (0..n / 2)
            .map(|k| (im[k] + im[n - 1 - k]).abs())
            .chain((n % 2 == 1).then(|| im[n / 2].abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_real_deviation(&self, target: f64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| (z.re - target).abs())
            .fold(0.0, f64::max)
    }
}

/// HiPPO-LegS `(A, B)` and its low-rank factor `P`.
pub fn make_hippo_legs(n: usize) -> Result<(DenseSpec, LowRankFactor)> {
    if n == 0 {
        return Err(Error::ZeroStateSize);
    }
    let r: Vec<f64> = (0..n).map(|k| ((2 * k + 1) as f64).sqrt()).collect();
    let a = Matrix::from_fn(n, n, |i, j| {
        let v = match i.cmp(&j) {
            std::cmp::Ordering::Greater => -r[i] * r[j],
            std::cmp::Ordering::Equal => -((i + 1) as f64),
            std::cmp::Ordering::Less => 0.0,
        };
        C64::new(v, 0.0)
    });
    let b = r.iter().map(|&x| C64::new(x, 0.0)).collect();
    let p = (0..n).map(|k| (k as f64 + 0.5).sqrt()).collect();
    Ok((DenseSpec::new(a, b, None)?, LowRankFactor { p }))
}

/// Normal HiPPO matrix `A + P P^T`: `-1/2` on the diagonal and a
/// skew-symmetric off-diagonal part. `B` is the LegS `B`.
pub fn make_hippo_normal(n: usize) -> Result<DenseSpec> {
    let (legs, factor) = make_hippo_legs(n)?;
    let p = &factor.p;
    let mut a = legs.a;
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] += C64::new(p[i] * p[j], 0.0);
        }
    }
    // A_nn + P_n^2 = -(n+1) + (n + 1/2) rounds exactly, but pin it anyway.
    for i in 0..n {
        a[(i, i)] = C64::new(-0.5, 0.0);
    }
    DenseSpec::new(a, legs.b, None)
}

/// The skew-symmetric part `S` of `A^(N) = -I/2 + S`, as the Hermitian `iS`.
fn hermitian_part(n: usize) -> Result<Matrix<C64>> {
    let normal = make_hippo_normal(n)?;
    let s = normal.a.shifted(C64::new(0.5, 0.0));
    Ok(s.scaled(C64::new(0.0, 1.0)))
}

fn to_spectrum(lambdas: &[f64]) -> Spectrum {
    // iS v = l v  =>  S v = -i l v  =>  A^(N) v = (-1/2 - i l) v.
    // Eigenvalues come back descending in l, so reverse for descending Im.
    let eigenvalues = lambdas.iter().rev().map(|&l| C64::new(-0.5, -l)).collect();
    Spectrum {
        eigenvalues,
        sorted: true,
    }
}

/// Eigenvalues of `A^(N)`, sorted by descending imaginary part.
pub fn hippo_d_spectrum(n: usize) -> Result<Spectrum> {
    let h = hermitian_part(n)?;
    let lambdas = eigen::hermitian_eigenvalues(&h, DEFAULT_TOL)?;
    Ok(to_spectrum(&lambdas))
}

/// Eigenvalues and unitary eigenvectors of `A^(N)`: `A^(N) = V diag(spectrum) V^H`.
/// Column `j` of the matrix pairs with `spectrum.eigenvalues[j]`.
pub fn hippo_d_decomposition(n: usize) -> Result<(Spectrum, Matrix<C64>)> {
    let h = hermitian_part(n)?;
    let HermitianEigen { values, vectors } = eigen::hermitian_eigendecompose(&h, DEFAULT_TOL)?;
    let spectrum = to_spectrum(&values);
    let n = values.len();
    let v = Matrix::from_fn(n, n, |i, j| vectors[(i, n - 1 - j)]);
    Ok((spectrum, v))
}
