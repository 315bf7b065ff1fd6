//! Convolution kernels of diagonal systems and sampled basis functions.

use serde::Serialize;

use crate::discretize::{DiscreteParams, Rule};
use crate::expm::dense_matrix_exp;
use crate::hippo::DenseSpec;
use crate::init::{DiagonalSpec, Pairing};
use crate::{Error, Result, C64};

/// Sequence positions processed per block by the streaming kernel.
pub const CHUNK: usize = 4096;

/// Below this `|A_bar - 1|` softmax row sums use a series.
const ROW_SUM_SERIES_CUTOFF: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelMeta {
    pub init: String,
    pub rule: Rule,
    pub n: usize,
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Kernel {
    pub values: Vec<f64>,
    pub meta: KernelMeta,
}

impl Kernel {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `values[n][k]` is `K_n(t_grid[k])`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisTable {
    pub t_grid: Vec<f64>,
    pub values: Vec<Vec<C64>>,
}

impl BasisTable {
    pub fn rows(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, n: usize) -> &[C64] {
        &self.values[n]
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest imaginary magnitude; zero for tables of real systems.
    pub fn max_imag(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0, |m, z| m.max(z.im.abs()))
    }

    pub fn truncate_rows(mut self, rows: usize) -> Self {
        self.values.truncate(rows);
        self
    }
}

fn check_inputs(spec: &DiagonalSpec, disc: &DiscreteParams, l: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::EmptySequence);
    }
    if spec.len() != disc.len() {
        return Err(Error::LengthMismatch {
            expected: spec.len(),
            actual: disc.len(),
        });
    }
    Ok(())
}

fn meta(spec: &DiagonalSpec, disc: &DiscreteParams) -> KernelMeta {
    KernelMeta {
        init: spec.init.clone(),
        rule: disc.rule,
        n: spec.n,
        dt: disc.dt,
    }
}

/// `W_n = C_n * B_bar_n`.
pub fn weights(spec: &DiagonalSpec, disc: &DiscreteParams) -> Result<Vec<C64>> {
    let c = spec.c_or_err()?;
    Ok(c.iter().zip(&disc.b_bar).map(|(&c, &b)| c * b).collect())
}

/// Explicit Vandermonde matrix `V[n][l] = a_bar_n^l`.
pub fn vandermonde_matrix(a_bar: &[C64], l: usize) -> Vec<Vec<C64>> {
    a_bar
        .iter()
        .map(|&z| {
            let mut row = Vec::with_capacity(l);
            let mut p = C64::new(1.0, 0.0);
            for _ in 0..l {
                row.push(p);
                p *= z;
            }
            row
        })
        .collect()
}

/// `factor * Re(W^T V)` with `V` materialized.
pub fn vandermonde_product(a_bar: &[C64], w: &[C64], l: usize, pairing: Pairing) -> Vec<f64> {
    let v = vandermonde_matrix(a_bar, l);
    let factor = pairing.factor();
    (0..l)
        .map(|j| {
            let mut acc = C64::new(0.0, 0.0);
            for (row, &wn) in v.iter().zip(w) {
                acc += wn * row[j];
            }
            factor * acc.re
        })
        .collect()
}

/// Same products as [`vandermonde_product`], computed blockwise with one
/// running power per state and a fixed-size accumulator.
pub fn vandermonde_product_streaming(
    a_bar: &[C64],
    w: &[C64],
    l: usize,
    pairing: Pairing,
) -> Vec<f64> {
    let factor = pairing.factor();
    let mut out = Vec::with_capacity(l);
    let mut powers = vec![C64::new(1.0, 0.0); a_bar.len()];
    let mut acc = vec![C64::new(0.0, 0.0); CHUNK];
    let mut start = 0;
    while start < l {
        let len = CHUNK.min(l - start);
        let block = &mut acc[..len];
        block.fill(C64::new(0.0, 0.0));
        for ((p, &z), &wn) in powers.iter_mut().zip(a_bar).zip(w) {
            for slot in block.iter_mut() {
                *slot += wn * *p;
                *p *= z;
            }
        }
        out.extend(block.iter().map(|s| factor * s.re));
        start += len;
    }
    out
}

/// Discrete kernel `K_l = factor * Re(sum_n C_n B_bar_n A_bar_n^l)`.
pub fn vandermonde_kernel(spec: &DiagonalSpec, disc: &DiscreteParams, l: usize) -> Result<Kernel> {
    check_inputs(spec, disc, l)?;
    let w = weights(spec, disc)?;
    Ok(Kernel {
        values: vandermonde_product(&disc.a_bar, &w, l, disc.pairing),
        meta: meta(spec, disc),
    })
}

pub fn vandermonde_kernel_streaming(
    spec: &DiagonalSpec,
    disc: &DiscreteParams,
    l: usize,
) -> Result<Kernel> {
    check_inputs(spec, disc, l)?;
    let w = weights(spec, disc)?;
    Ok(Kernel {
        values: vandermonde_product_streaming(&disc.a_bar, &w, l, disc.pairing),
        meta: meta(spec, disc),
    })
}

/// `sum_{j<l} z^j`, by closed form or by series near `z = 1`.
pub fn geometric_row_sum(z: C64, l: usize) -> C64 {
    let eps = z - 1.0;
    let lf = l as f64;
    if eps.norm() < ROW_SUM_SERIES_CUTOFF {
        let c1 = lf * (lf - 1.0) / 2.0;
        let c2 = c1 * (lf - 2.0) / 3.0;
        C64::new(lf, 0.0) + eps * c1 + eps * eps * c2
    } else {
        (z.powu(l as u32) - 1.0) / eps
    }
}

pub fn softmax_row_sums(a_bar: &[C64], l: usize) -> Result<Vec<C64>> {
    a_bar
        .iter()
        .enumerate()
        .map(|(n, &z)| {
            let s = geometric_row_sum(z, l);
            if s.norm() == 0.0 || !s.re.is_finite() || !s.im.is_finite() {
                Err(Error::DegenerateRow(n))
            } else {
                Ok(s)
            }
        })
        .collect()
}

/// Kernel with each `W_n` divided by its length-`l` Vandermonde row sum.
pub fn dss_softmax_kernel(spec: &DiagonalSpec, disc: &DiscreteParams, l: usize) -> Result<Kernel> {
    check_inputs(spec, disc, l)?;
    if disc.rule != Rule::Zoh {
        return Err(Error::SoftmaxNeedsZoh);
    }
    if l > u32::MAX as usize {
        return Err(Error::InvalidGrid(format!("sequence length {l} too large")));
    }
    let sums = softmax_row_sums(&disc.a_bar, l)?;
    let w: Vec<C64> = weights(spec, disc)?
        .iter()
        .zip(&sums)
        .map(|(&w, &s)| w / s)
        .collect();
    Ok(Kernel {
        values: vandermonde_product_streaming(&disc.a_bar, &w, l, disc.pairing),
        meta: meta(spec, disc),
    })
}

/// Per-position bound `factor * sum_n |W_n| |A_bar_n|^l`.
pub fn envelope_bound(spec: &DiagonalSpec, disc: &DiscreteParams, l: usize) -> Result<Vec<f64>> {
    check_inputs(spec, disc, l)?;
    let w = weights(spec, disc)?;
    let factor = disc.pairing.factor();
    let mut out = vec![0.0; l];
    for (&z, wn) in disc.a_bar.iter().zip(&w) {
        let r = z.norm();
        let mut p = wn.norm();
        for slot in out.iter_mut() {
            *slot += p;
            p *= r;
        }
    }
    out.iter_mut().for_each(|v| *v *= factor);
    Ok(out)
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidGrid("time grid is empty".into()));
    }
    if let Some(k) = t_grid.iter().position(|t| !t.is_finite()) {
        return Err(Error::NonFinite(k));
    }
    Ok(())
}

/// `n` points evenly spaced on `[t0, t1]`.
pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t0],
        _ => {
            let h = (t1 - t0) / (n - 1) as f64;
            (0..n).map(|k| t0 + h * k as f64).collect()
        }
    }
}

/// Rows `exp(t A_n) B_n` over the stored half-spectrum.
pub fn sample_basis(spec: &DiagonalSpec, t_grid: &[f64]) -> Result<BasisTable> {
    check_grid(t_grid)?;
    let values = spec
        .a
        .iter()
        .zip(&spec.b)
        .map(|(&a, &b)| t_grid.iter().map(|&t| (a * t).exp() * b).collect())
        .collect();
    Ok(BasisTable {
        t_grid: t_grid.to_vec(),
        values,
    })
}

fn uniform_step(t_grid: &[f64]) -> Option<f64> {
    if t_grid.len() < 3 {
        return None;
    }
    let h = t_grid[1] - t_grid[0];
    if h <= 0.0 {
        return None;
    }
    let tol = 1e-12 * t_grid.iter().fold(h, |m, t| m.max(t.abs()));
    t_grid
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= tol)
        .then_some(h)
}

/// Columns `exp(t A) B` of a dense system. Uniform grids propagate with one
/// step exponential; other grids take one exponential per point.
pub fn sample_basis_dense(spec: &DenseSpec, t_grid: &[f64]) -> Result<BasisTable> {
    check_grid(t_grid)?;
    let n = spec.n();
    let mut values = vec![Vec::with_capacity(t_grid.len()); n];
    let exp_at = |t: f64| dense_matrix_exp(&spec.a.scaled(C64::new(t, 0.0)));
    let mut push = |x: &[C64]| {
        for (row, &v) in values.iter_mut().zip(x) {
            row.push(v);
        }
    };
    match uniform_step(t_grid) {
        Some(h) => {
            let step = exp_at(h)?;
            let mut x = if t_grid[0] == 0.0 {
                spec.b.clone()
            } else {
                exp_at(t_grid[0])?.matvec(&spec.b)
            };
            push(&x);
            for _ in 1..t_grid.len() {
                x = step.matvec(&x);
                push(&x);
            }
        }
        None => {
            for &t in t_grid {
                push(&exp_at(t)?.matvec(&spec.b));
            }
        }
    }
    Ok(BasisTable {
        t_grid: t_grid.to_vec(),
        values,
    })
}
