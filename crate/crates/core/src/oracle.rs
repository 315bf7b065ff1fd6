//! Independent reference computations: dense kernels, state space
//! transforms, the Legendre closed form, and the numerical experiments on
//! the HiPPO-LegS basis.

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::discretize::{discretize_dense, DenseDiscrete, Rule};
use crate::expm::dense_matrix_exp;
use crate::hippo::{hippo_d_spectrum, make_hippo_legs, make_hippo_normal, DenseSpec, Spectrum};
use crate::init::{seeded, DiagonalSpec, Pairing};
use crate::kernel::{sample_basis, sample_basis_dense, BasisTable, Kernel, KernelMeta};
use crate::linalg::Matrix;
use crate::{Error, Result, C64};

const STREAM_P: u64 = 5;

fn dense_meta(spec: &DenseSpec, disc: &DenseDiscrete) -> KernelMeta {
    KernelMeta {
        init: "dense".into(),
        rule: disc.rule,
        n: spec.n(),
        dt: disc.dt,
    }
}

/// `C A_bar^l B_bar` by iterating `v <- A_bar v`.
pub fn dense_kernel_complex(spec: &DenseSpec, rule: Rule, dt: f64, l: usize) -> Result<Vec<C64>> {
    if l == 0 {
        return Err(Error::EmptySequence);
    }
    let c = spec.c.as_deref().ok_or(Error::MissingOutputMap)?;
    let disc = discretize_dense(spec, rule, dt)?;
    Ok(iterate_kernel(&disc, c, l))
}

fn iterate_kernel(disc: &DenseDiscrete, c: &[C64], l: usize) -> Vec<C64> {
    let mut v = disc.b_bar.clone();
    let mut out = Vec::with_capacity(l);
    for k in 0..l {
        if k > 0 {
            v = disc.a_bar.matvec(&v);
        }
        out.push(c.iter().zip(&v).map(|(a, b)| a * b).sum());
    }
    out
}

/// Real part of [`dense_kernel_complex`].
pub fn dense_kernel(spec: &DenseSpec, rule: Rule, dt: f64, l: usize) -> Result<Kernel> {
    let c = spec.c.as_deref().ok_or(Error::MissingOutputMap)?;
    if l == 0 {
        return Err(Error::EmptySequence);
    }
    let disc = discretize_dense(spec, rule, dt)?;
    let values = iterate_kernel(&disc, c, l).iter().map(|z| z.re).collect();
    Ok(Kernel {
        values,
        meta: dense_meta(spec, &disc),
    })
}

/// `C A_bar^l B_bar` from explicit matrix powers.
pub fn matrix_power_kernel(disc: &DenseDiscrete, c: &[C64], l: usize) -> Vec<C64> {
    let n = disc.a_bar.rows();
    let mut power = Matrix::<C64>::identity(n);
    (0..l)
        .map(|k| {
            if k > 0 {
                power = power.matmul(&disc.a_bar);
            }
            let v = power.matvec(&disc.b_bar);
            c.iter().zip(&v).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// `(V^-1 A V, V^-1 B, C V)`.
pub fn state_space_transform(spec: &DenseSpec, v: &Matrix<C64>) -> Result<DenseSpec> {
    if !v.is_square() {
        return Err(Error::NotSquare {
            rows: v.rows(),
            cols: v.cols(),
        });
    }
    if v.rows() != spec.n() {
        return Err(Error::LengthMismatch {
            expected: spec.n(),
            actual: v.rows(),
        });
    }
    let lu = v.lu()?;
    let a = lu.solve_matrix(&spec.a.matmul(v))?;
    let b = lu.solve(&spec.b);
    let c = spec.c.as_ref().map(|c| v.vecmat(c));
    DenseSpec::new(a, b, c)
}

/// Reads a (numerically) diagonal dense system as a full-spectrum diagonal
/// spec. Off-diagonal mass above `tol * max|A|` is rejected.
pub fn diagonal_spec_from_dense(spec: &DenseSpec, tol: f64) -> Result<DiagonalSpec> {
    let n = spec.n();
    let scale = spec.a.max_abs().max(f64::MIN_POSITIVE);
    let off = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| spec.a[(i, j)].norm())
        .fold(0.0, f64::max);
    if off > tol * scale {
        return Err(Error::NotHermitian { deviation: off / scale });
    }
    Ok(DiagonalSpec {
        a: spec.a.diagonal(),
        b: spec.b.clone(),
        c: spec.c.clone(),
        log_dt: 0.0,
        n,
        pairing: Pairing::Real,
        init: "dense-diag".into(),
    })
}

/// Orthonormal shifted Legendre polynomial on `[0, 1]`.
pub fn shifted_legendre(n: usize, x: f64) -> f64 {
    let y = 2.0 * x - 1.0;
    let (mut prev, mut cur) = (1.0, y);
    if n == 0 {
        return 1.0;
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * y * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    ((2 * n + 1) as f64).sqrt() * cur
}

/// `L_n(e^-t) e^-t`.
pub fn legendre_basis(n: usize, t: f64) -> f64 {
    let x = (-t).exp();
    shifted_legendre(n, x) * x
}

pub fn legendre_table(rows: usize, t_grid: &[f64]) -> BasisTable {
    BasisTable {
        t_grid: t_grid.to_vec(),
        values: (0..rows)
            .map(|n| {
                t_grid
                    .iter()
                    .map(|&t| C64::new(legendre_basis(n, t), 0.0))
                    .collect()
            })
            .collect(),
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..m {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Gram matrix of the Legendre basis functions,
/// `G_nm = int_0^inf K_n(t) K_m(t) e^t dt`, by Gauss quadrature after the
/// substitution `x = e^-t`.
pub fn legendre_gram(rows: usize, points: usize) -> Vec<Vec<f64>> {
    let (nodes, weights) = gauss_legendre(points);
    let samples: Vec<(f64, f64)> = nodes
        .iter()
        .zip(&weights)
        .map(|(&y, &w)| (-(0.5 * (y + 1.0)).ln(), 0.5 * w))
        .collect();
    (0..rows)
        .map(|n| {
            (0..rows)
                .map(|m| {
                    samples
                        .iter()
                        .map(|&(t, w)| {
                            // dt = dx / x, and the weight e^t = 1 / x.
                            let x = (-t).exp();
                            w * legendre_basis(n, t) * legendre_basis(m, t) / (x * x)
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub n_values: Vec<usize>,
    pub rows: usize,
    pub grid_points: usize,
    pub t_end: f64,
    /// Sup error of the bilinear-discretized basis at cell midpoints.
    pub errors: Vec<f64>,
    /// Same measurement with ZOH steps, when requested.
    pub zoh_errors: Option<Vec<f64>>,
    pub non_increasing: bool,
    pub strictly_decreasing: bool,
}

impl ConvergenceReport {
    /// Last error divided by the first.
    pub fn reduction(&self) -> f64 {
        match (self.errors.first(), self.errors.last()) {
            (Some(a), Some(b)) if *a > 0.0 => b / a,
            _ => f64::NAN,
        }
    }
}

fn real_matrix(m: &Matrix<C64>) -> Matrix<f64> {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].re)
}

/// Sup error over rows `< rows` and midpoints `(k + 1/2) h` between
/// `A_bar^k B_bar / h` and the Legendre closed form.
fn midpoint_error(
    step: impl Fn(&[f64]) -> Vec<f64>,
    b_bar: Vec<f64>,
    h: f64,
    points: usize,
    rows: usize,
) -> f64 {
    let mut v = b_bar;
    let mut err: f64 = 0.0;
    for k in 0..points {
        if k > 0 {
            v = step(&v);
        }
        let t = (k as f64 + 0.5) * h;
        for (n, &x) in v.iter().take(rows).enumerate() {
            err = err.max((x / h - legendre_basis(n, t)).abs());
        }
    }
    err
}

/// Basis of `(A^(N), B/2)` against `L_n(e^-t) e^-t`. The continuous basis is
/// sampled through its one-step discretization with step `t_end / points`,
/// which is evaluated at cell midpoints.
pub fn theorem_legsd_convergence(
    n_values: &[usize],
    t_end: f64,
    points: usize,
    rows: usize,
    with_zoh: bool,
) -> Result<ConvergenceReport> {
    if points == 0 || t_end.is_nan() || t_end <= 0.0 {
        return Err(Error::InvalidGrid(format!("{points} points on [0, {t_end}]")));
    }
    let h = t_end / points as f64;
    let mut errors = Vec::with_capacity(n_values.len());
    let mut zoh_errors = with_zoh.then(Vec::new);
    for &n in n_values {
        let (legs, _) = make_hippo_legs(n)?;
        let normal = make_hippo_normal(n)?;
        let a = real_matrix(&normal.a);
        let b: Vec<f64> = legs.b.iter().map(|z| z.re / 2.0).collect();
        let rows = rows.min(n);
        let half = a.scaled(h / 2.0);
        let ident = Matrix::<f64>::identity(n);
        let lu = ident.sub(&half).lu()?;
        let plus = ident.add(&half);
        let b_bar = lu.solve(&b.iter().map(|x| x * h).collect::<Vec<_>>());
        errors.push(midpoint_error(|v| lu.solve(&plus.matvec(v)), b_bar, h, points, rows));

        if let Some(zoh) = zoh_errors.as_mut() {
            let disc = discretize_dense(
                &DenseSpec::new(normal.a.clone(), b.iter().map(|&x| C64::new(x, 0.0)).collect(), None)?,
                Rule::Zoh,
                h,
            )?;
            let step = real_matrix(&disc.a_bar);
            let b_bar = disc.b_bar.iter().map(|z| z.re).collect();
            zoh.push(midpoint_error(|v| step.matvec(v), b_bar, h, points, rows));
        }
    }
    let non_increasing = errors.windows(2).all(|w| w[1] <= w[0]);
    let strictly_decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    Ok(ConvergenceReport {
        n_values: n_values.to_vec(),
        rows,
        grid_points: points,
        t_end,
        errors,
        zoh_errors,
        non_increasing,
        strictly_decreasing,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub n: usize,
    pub max_imag: f64,
    /// `max Im - N^2 / pi`.
    pub offset: f64,
    /// `k * Im_k` over the positive half, `k` counted from zero.
    pub scaled_imag: Vec<f64>,
    /// `max / min` of `scaled_imag` over the middle half of indices.
    pub band_ratio: f64,
    pub max_real_deviation: f64,
}

pub fn conjecture_probe(n: usize) -> Result<ConjectureReport> {
    conjecture_from_spectrum(&hippo_d_spectrum(n)?)
}

pub fn conjecture_from_spectrum(spectrum: &Spectrum) -> Result<ConjectureReport> {
    let n = spectrum.eigenvalues.len();
    if n < 2 {
        return Err(Error::InvalidGrid(format!("spectrum of size {n} has no positive half")));
    }
    let mut half: Vec<f64> = spectrum
        .eigenvalues
        .iter()
        .map(|z| z.im)
        .filter(|&im| im > 0.0)
        .collect();
    half.sort_by(|a, b| b.total_cmp(a));
    let max_imag = half.first().copied().unwrap_or(0.0);
    let scaled_imag: Vec<f64> = half.iter().enumerate().map(|(k, im)| k as f64 * im).collect();
    let (lo, hi) = (half.len() / 4, (3 * half.len()) / 4);
    let middle = &scaled_imag[lo.max(1)..hi.max(lo.max(1) + 1).min(scaled_imag.len())];
    let (mn, mx) = middle
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    Ok(ConjectureReport {
        n,
        max_imag,
        offset: max_imag - (n * n) as f64 / PI,
        scaled_imag,
        band_ratio: mx / mn,
        max_real_deviation: spectrum.max_real_deviation(-0.5),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationReport {
    pub sigma: f64,
    pub seed: u64,
    pub table: BasisTable,
    /// `max |K_n(t)|` over the table.
    pub divergence: f64,
}

/// Standard normal draws scaled into the perturbation `P = sigma z`; the
/// draws depend only on `(seed, n)`.
pub fn perturbation_direction(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed, STREAM_P);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Basis of `(A + P P^T, B)` for HiPPO-LegS `(A, B)`.
pub fn perturbation_experiment(sigma: f64, seed: u64, n: usize, t_grid: &[f64]) -> Result<PerturbationReport> {
    let (legs, _) = make_hippo_legs(n)?;
    let p: Vec<f64> = perturbation_direction(n, seed).iter().map(|z| sigma * z).collect();
    let a = Matrix::from_fn(n, n, |i, j| legs.a[(i, j)] + p[i] * p[j]);
    let table = sample_basis_dense(&DenseSpec::new(a, legs.b, None)?, t_grid)?;
    let divergence = table.max_abs();
    Ok(PerturbationReport {
        sigma,
        seed,
        table,
        divergence,
    })
}

/// Mean divergence over `seeds`.
pub fn mean_divergence(sigma: f64, seeds: &[u64], n: usize, t_grid: &[f64]) -> Result<f64> {
    let total = seeds
        .iter()
        .map(|&s| perturbation_experiment(sigma, s, n, t_grid).map(|r| r.divergence))
        .sum::<Result<f64>>()?;
    Ok(total / seeds.len() as f64)
}

/// Diagonal system with `A_n = 2 pi i n`, `B_n = 1`.
pub fn fout_truncation_spec(n: usize) -> Result<DiagonalSpec> {
    if n == 0 {
        return Err(Error::ZeroStateSize);
    }
    let half = n.div_ceil(2);
    Ok(DiagonalSpec {
        a: (0..half).map(|k| C64::new(0.0, 2.0 * PI * k as f64)).collect(),
        b: vec![C64::new(1.0, 0.0); half],
        c: None,
        log_dt: 0.0,
        n,
        pairing: Pairing::Conjugate,
        init: "fout-trunc".into(),
    })
}

pub fn fout_truncation_basis(n: usize, t_grid: &[f64]) -> Result<BasisTable> {
    sample_basis(&fout_truncation_spec(n)?, t_grid)
}

/// Dense LegS basis on a grid, by exponentials.
pub fn legs_basis(n: usize, t_grid: &[f64]) -> Result<BasisTable> {
    let (legs, _) = make_hippo_legs(n)?;
    sample_basis_dense(&legs, t_grid)
}

/// `exp(t A) B` at a single time, for spot checks.
pub fn dense_basis_at(spec: &DenseSpec, t: f64) -> Result<Vec<C64>> {
    Ok(dense_matrix_exp(&spec.a.scaled(C64::new(t, 0.0)))?.matvec(&spec.b))
}
