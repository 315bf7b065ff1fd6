//! Bilinear and zero-order-hold discretization, elementwise for diagonal
//! systems and matrix-valued for dense ones.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::expm::dense_matrix_exp;
use crate::hippo::DenseSpec;
use crate::init::{DiagonalSpec, Pairing};
use crate::linalg::Matrix;
use crate::{Error, Result, C64};

/// Below this `|dt * A_n|` the ZOH input factor uses its Taylor series.
const ZOH_SERIES_CUTOFF: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Bilinear,
    Zoh,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Bilinear => "bilinear",
            Rule::Zoh => "zoh",
        })
    }
}

impl FromStr for Rule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bilinear" => Ok(Rule::Bilinear),
            "zoh" => Ok(Rule::Zoh),
            other => Err(Error::Parse(format!("unknown discretization `{other}`"))),
        }
    }
}

/// Discretized diagonal system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteParams {
    pub a_bar: Vec<C64>,
    pub b_bar: Vec<C64>,
    pub rule: Rule,
    pub dt: f64,
    pub pairing: Pairing,
}

impl DiscreteParams {
    pub fn len(&self) -> usize {
        self.a_bar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_bar.is_empty()
    }

    pub fn with_pairing(mut self, pairing: Pairing) -> Self {
        self.pairing = pairing;
        self
    }

    /// Largest `|A_bar_n|`.
    pub fn spectral_radius(&self) -> f64 {
        self.a_bar.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Discretized dense system.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseDiscrete {
    pub a_bar: Matrix<C64>,
    pub b_bar: Vec<C64>,
    pub rule: Rule,
    pub dt: f64,
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTimescale(format!("dt must be positive and finite, got {dt}")))
    }
}

fn check_lengths(a: &[C64], b: &[C64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(())
}

/// `A_bar = (1 + dt/2 A) / (1 - dt/2 A)`, `B_bar = dt B / (1 - dt/2 A)`.
pub fn discretize_bilinear(a: &[C64], b: &[C64], dt: f64) -> Result<DiscreteParams> {
    check_dt(dt)?;
    check_lengths(a, b)?;
    let mut a_bar = Vec::with_capacity(a.len());
    let mut b_bar = Vec::with_capacity(a.len());
    for (n, (&an, &bn)) in a.iter().zip(b).enumerate() {
        let half = an * (dt / 2.0);
        let denom = C64::new(1.0, 0.0) - half;
        if denom.norm() == 0.0 {
            return Err(Error::SingularResolvent(n));
        }
        let inv = denom.inv();
        a_bar.push((C64::new(1.0, 0.0) + half) * inv);
        b_bar.push(bn * dt * inv);
    }
    Ok(DiscreteParams {
        a_bar,
        b_bar,
        rule: Rule::Bilinear,
        dt,
        pairing: Pairing::Conjugate,
    })
}

/// `(exp(z) - 1) / z` with a series near zero.
pub fn expm1_over_z(z: C64) -> C64 {
    if z.norm() < ZOH_SERIES_CUTOFF {
        C64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        // exp(z) - 1 loses digits for small |z|; above the cutoff the
        // relative error stays below ~1e-8 * eps / |z|, which is fine.
        (z.exp() - 1.0) / z
    }
}

/// `A_bar = exp(dt A)`, `B_bar = (exp(dt A) - 1) / (dt A) * dt B`.
pub fn discretize_zoh(a: &[C64], b: &[C64], dt: f64) -> Result<DiscreteParams> {
    check_dt(dt)?;
    check_lengths(a, b)?;
    let (a_bar, b_bar) = a
        .iter()
        .zip(b)
        .map(|(&an, &bn)| {
            let z = an * dt;
            (z.exp(), expm1_over_z(z) * bn * dt)
        })
        .unzip();
    Ok(DiscreteParams {
        a_bar,
        b_bar,
        rule: Rule::Zoh,
        dt,
        pairing: Pairing::Conjugate,
    })
}

pub fn discretize_diag(a: &[C64], b: &[C64], rule: Rule, dt: f64) -> Result<DiscreteParams> {
    match rule {
        Rule::Bilinear => discretize_bilinear(a, b, dt),
        Rule::Zoh => discretize_zoh(a, b, dt),
    }
}

/// Discretizes a diagonal spec at its own timescale.
pub fn discretize(spec: &DiagonalSpec, rule: Rule) -> Result<DiscreteParams> {
    discretize_at(spec, rule, spec.dt())
}

pub fn discretize_at(spec: &DiagonalSpec, rule: Rule, dt: f64) -> Result<DiscreteParams> {
    Ok(discretize_diag(&spec.a, &spec.b, rule, dt)?.with_pairing(spec.pairing))
}

/// Dense bilinear transform via one LU factorization of `I - dt/2 A`.
pub fn bilinear_dense(a: &Matrix<C64>, b: &[C64], dt: f64) -> Result<DenseDiscrete> {
    check_dt(dt)?;
    let n = a.rows();
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    let half = a.scaled(C64::new(dt / 2.0, 0.0));
    let ident = Matrix::<C64>::identity(n);
    let lu = ident.sub(&half).lu()?;
    let a_bar = lu.solve_matrix(&ident.add(&half))?;
    let scaled_b: Vec<C64> = b.iter().map(|&x| x * dt).collect();
    let b_bar = lu.solve(&scaled_b);
    Ok(DenseDiscrete {
        a_bar,
        b_bar,
        rule: Rule::Bilinear,
        dt,
    })
}

/// Dense ZOH. Both blocks come from one exponential of the augmented matrix
/// `[[dt A, dt B], [0, 0]]`, which stays valid for singular `A`.
pub fn zoh_dense(a: &Matrix<C64>, b: &[C64], dt: f64) -> Result<DenseDiscrete> {
    check_dt(dt)?;
    let n = a.rows();
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    let aug = Matrix::from_fn(n + 1, n + 1, |i, j| {
        if i < n && j < n {
            a[(i, j)] * dt
        } else if i < n && j == n {
            b[i] * dt
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let e = dense_matrix_exp(&aug)?;
    let a_bar = Matrix::from_fn(n, n, |i, j| e[(i, j)]);
    let b_bar = (0..n).map(|i| e[(i, n)]).collect();
    Ok(DenseDiscrete {
        a_bar,
        b_bar,
        rule: Rule::Zoh,
        dt,
    })
}

pub fn discretize_dense(spec: &DenseSpec, rule: Rule, dt: f64) -> Result<DenseDiscrete> {
    match rule {
        Rule::Bilinear => bilinear_dense(&spec.a, &spec.b, dt),
        Rule::Zoh => zoh_dense(&spec.a, &spec.b, dt),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hippo::make_hippo_legs;
    use crate::init::init_lin;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// Independent exponential: Taylor series with 30 terms after scaling by
    /// 2^-s, then s squarings.
    fn taylor_exp(m: &Matrix<C64>) -> Matrix<C64> {
        let s = (m.norm_one().max(1.0)).log2().ceil() as i32 + 1;
        let a = m.scaled(c(0.5f64.powi(s)));
        let n = m.rows();
        let mut term = Matrix::<C64>::identity(n);
        let mut sum = term.clone();
        for k in 1..=30 {
            term = term.matmul(&a).scaled(c(1.0 / k as f64));
            sum = sum.add(&term);
        }
        for _ in 0..s {
            sum = sum.matmul(&sum);
        }
        sum
    }

    #[test]
    fn bilinear_identity_limit() {
        let d = discretize_bilinear(&[c(0.0)], &[c(2.0)], 0.3).unwrap();
        assert_eq!(d.a_bar[0], c(1.0));
        assert!((d.b_bar[0] - c(0.6)).norm() < 1e-16);
    }

    #[test]
    fn bilinear_scalar() {
        let d = discretize_bilinear(&[c(-1.0)], &[c(1.0)], 1.0).unwrap();
        assert!((d.a_bar[0] - c(1.0 / 3.0)).norm() < 1e-16);
        assert!((d.b_bar[0] - c(2.0 / 3.0)).norm() < 1e-16);
    }

    #[test]
    fn bilinear_singular_resolvent() {
        let err = discretize_bilinear(&[c(-1.0), c(2.0)], &[c(1.0), c(1.0)], 1.0).unwrap_err();
        assert_eq!(err, Error::SingularResolvent(1));
    }

    #[test]
    fn zoh_scalar() {
        let d = discretize_zoh(&[c(-1.0)], &[c(1.0)], 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert!((d.a_bar[0] - c(e)).norm() < 1e-16);
        assert!((d.b_bar[0] - c(1.0 - e)).norm() < 1e-16);
    }

    #[test]
    fn zoh_zero_limit() {
        let d = discretize_zoh(&[c(0.0), c(-1e-12)], &[c(3.0), c(3.0)], 0.5).unwrap();
        assert_eq!(d.a_bar[0], c(1.0));
        assert!((d.b_bar[0] - c(1.5)).norm() < 1e-16);
        assert!((d.b_bar[1] - c(1.5)).norm() < 1e-12);
    }

    #[test]
    fn zoh_b_bar_limit_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..2000 {
            let a = C64::new(-rng.random::<f64>() * 50.0, (rng.random::<f64>() - 0.5) * 100.0);
            let b = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let dt = 0.1 / a.norm() * rng.random::<f64>();
            let d = discretize_zoh(&[a], &[b], dt).unwrap();
            let lhs = (d.b_bar[0] - b * dt).norm();
            let rhs = (a * b * dt * dt).norm();
            assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300, "{lhs} > {rhs}");
        }
    }

    #[test]
    fn invalid_dt() {
        assert!(discretize_bilinear(&[c(-1.0)], &[c(1.0)], 0.0).is_err());
        assert!(discretize_zoh(&[c(-1.0)], &[c(1.0)], f64::NAN).is_err());
        assert!(discretize_zoh(&[c(-1.0)], &[], 0.1).is_err());
    }

    #[test]
    fn diagonal_matches_dense_embedding() {
        let spec = init_lin(4).unwrap();
        let dt = 0.01;
        let diag = Matrix::from_diag(&spec.a);
        for rule in [Rule::Bilinear, Rule::Zoh] {
            let d = discretize_at(&spec, rule, dt).unwrap();
            let dense = match rule {
                Rule::Bilinear => bilinear_dense(&diag, &spec.b, dt).unwrap(),
                Rule::Zoh => zoh_dense(&diag, &spec.b, dt).unwrap(),
            };
            for i in 0..spec.len() {
                assert!((dense.a_bar[(i, i)] - d.a_bar[i]).norm() < 1e-14, "{rule}");
                assert!((dense.b_bar[i] - d.b_bar[i]).norm() < 1e-14, "{rule}");
            }
        }
    }

    #[test]
    fn dense_zoh_matches_taylor_oracle() {
        let (legs, _) = make_hippo_legs(4).unwrap();
        let dt = 0.1;
        let d = zoh_dense(&legs.a, &legs.b, dt).unwrap();
        let oracle = taylor_exp(&legs.a.scaled(c(dt)));
        let err = d.a_bar.sub(&oracle).max_abs();
        assert!(err < 1e-12, "{err}");
        // B_bar = A^{-1} (A_bar - I) B.
        let rhs = d.a_bar.sub(&Matrix::identity(4)).matvec(&legs.b);
        let want = legs.a.lu().unwrap().solve(&rhs);
        for (x, y) in d.b_bar.iter().zip(&want) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn dense_bilinear_preserves_lower_triangular_structure() {
        let (legs, _) = make_hippo_legs(4).unwrap();
        let d = bilinear_dense(&legs.a, &legs.b, 0.2).unwrap();
        for i in 0..4 {
            for j in i + 1..4 {
                assert!(d.a_bar[(i, j)].norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rules_agree_to_third_order() {
        let a = C64::new(-0.5, 3.0);
        let constant = |dt: f64| {
            let bl = discretize_bilinear(&[a], &[c(1.0)], dt).unwrap().a_bar[0];
            let zo = discretize_zoh(&[a], &[c(1.0)], dt).unwrap().a_bar[0];
            (bl - zo).norm() / dt.powi(3)
        };
        let cs: Vec<f64> = [1e-2, 1e-3, 1e-4].into_iter().map(constant).collect();
        // Leading term is |A|^3 / 12.
        let expected = a.norm().powi(3) / 12.0;
        for k in &cs {
            assert!((k / expected - 1.0).abs() < 0.1, "{cs:?} vs {expected}");
        }
    }

    #[test]
    fn stability_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10_000 {
            let re = -rng.random::<f64>() * 1e3;
            if re == 0.0 {
                continue;
            }
            let a = C64::new(re, (rng.random::<f64>() - 0.5) * 2e3);
            let dt = 10f64.powf(-4.0 + 4.0 * rng.random::<f64>());
            for rule in [Rule::Bilinear, Rule::Zoh] {
                let d = discretize_diag(&[a], &[c(1.0)], rule, dt).unwrap();
                assert!(d.a_bar[0].norm() < 1.0, "{rule} {a} {dt}");
            }
        }
    }
}
