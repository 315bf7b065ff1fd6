//! Diagonal initializations and the half-spectrum parameter container.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::hippo::hippo_d_spectrum;
use crate::{Error, Result, C64};

pub const DEFAULT_DT_MIN: f64 = 1e-3;
pub const DEFAULT_DT_MAX: f64 = 1e-1;

// Independent random streams derived from a single user seed.
const STREAM_A: u64 = 0;
const STREAM_C: u64 = 1;
const STREAM_DT: u64 = 2;
const STREAM_B: u64 = 3;
const STREAM_REAL: u64 = 4;

pub(crate) fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// How stored eigenvalues map onto the real state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// Each stored entry stands for itself and its conjugate; sums are `2 Re`.
    Conjugate,
    /// Entries are the full (real) spectrum; sums are `Re`.
    Real,
}

impl Pairing {
    /// Multiplier applied to the real part of a half-spectrum sum. Kernels and
    /// recurrent scans both read it from here.
    pub fn factor(self) -> f64 {
        match self {
            Pairing::Conjugate => 2.0,
            Pairing::Real => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RealPartMode {
    Exp,
    Relu,
    Identity,
}

impl fmt::Display for RealPartMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RealPartMode::Exp => "exp",
            RealPartMode::Relu => "relu",
            RealPartMode::Identity => "identity",
        })
    }
}

impl FromStr for RealPartMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(Self::Exp),
            "relu" => Ok(Self::Relu),
            "identity" | "id" => Ok(Self::Identity),
            other => Err(Error::Parse(format!("unknown real-part mode `{other}`"))),
        }
    }
}

/// Stored real-part parameters. The effective real part is `-exp(raw)`,
/// `-relu(raw)` or `raw` depending on the mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealPartParam {
    pub mode: RealPartMode,
    pub raw: Vec<f64>,
}

impl RealPartParam {
    /// Inverts the parameterization for the given effective real parts.
    pub fn from_effective(mode: RealPartMode, re: &[f64]) -> Result<Self> {
        let raw = re
            .iter()
            .enumerate()
            .map(|(index, &x)| match mode {
                RealPartMode::Exp if x < 0.0 => Ok((-x).ln()),
                RealPartMode::Relu if x <= 0.0 => Ok(-x),
                RealPartMode::Identity => Ok(x),
                _ => Err(Error::UnstableEigenvalue { index, re: x }),
            })
            .collect::<Result<_>>()?;
        Ok(Self { mode, raw })
    }

    pub fn effective(&self) -> Vec<f64> {
        self.raw
            .iter()
            .map(|&r| match self.mode {
                RealPartMode::Exp => -r.exp(),
                RealPartMode::Relu => -r.max(0.0),
                RealPartMode::Identity => r,
            })
            .collect()
    }
}

/// Half-spectrum diagonal SSM.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalSpec {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    /// `None` until [`init_c`] (or a caller) supplies it.
    pub c: Option<Vec<C64>>,
    pub log_dt: f64,
    /// Nominal real state size.
    pub n: usize,
    pub pairing: Pairing,
    pub init: String,
}

impl DiagonalSpec {
    fn half_spectrum(init: &str, n: usize, a: Vec<C64>) -> Self {
        let len = a.len();
        Self {
            a,
            b: vec![C64::new(1.0, 0.0); len],
            c: None,
            log_dt: (DEFAULT_DT_MIN * DEFAULT_DT_MAX).sqrt().ln(),
            n,
            pairing: Pairing::Conjugate,
            init: init.to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.log_dt.exp()
    }

    pub fn with_c(mut self, c: Vec<C64>) -> Result<Self> {
        if c.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: c.len(),
            });
        }
        self.c = Some(c);
        Ok(self)
    }

    pub fn with_b(mut self, b: Vec<C64>) -> Result<Self> {
        if b.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: b.len(),
            });
        }
        self.b = b;
        Ok(self)
    }

    pub fn with_log_dt(mut self, log_dt: f64) -> Self {
        self.log_dt = log_dt;
        self
    }

    pub fn c_or_err(&self) -> Result<&[C64]> {
        self.c.as_deref().ok_or(Error::MissingOutputMap)
    }

    /// Checks the left-half-plane constraint for the given mode.
    pub fn check_real_parts(&self, mode: RealPartMode) -> Result<RealPartParam> {
        let re: Vec<f64> = self.a.iter().map(|z| z.re).collect();
        RealPartParam::from_effective(mode, &re)
    }

    /// Full spectrum with implicit conjugates made explicit.
    pub fn full_spectrum(&self) -> Vec<C64> {
        expand_spectrum(&self.a, self.pairing)
    }
}

pub fn expand_spectrum(stored: &[C64], pairing: Pairing) -> Vec<C64> {
    match pairing {
        Pairing::Real => stored.to_vec(),
        Pairing::Conjugate => stored.iter().copied().chain(stored.iter().map(|z| z.conj())).collect(),
    }
}

pub fn collapse_spectrum(full: &[C64], pairing: Pairing) -> Vec<C64> {
    match pairing {
        Pairing::Real => full.to_vec(),
        Pairing::Conjugate => full[..full.len() / 2].to_vec(),
    }
}

fn require_even(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::ZeroStateSize);
    }
    if n % 2 == 1 {
        return Err(Error::OddStateSize(n));
    }
    Ok(n / 2)
}

/// Imaginary part of the inverse law at (possibly fractional) node `u`.
pub fn inv_imag(n: usize, u: f64) -> f64 {
    let n = n as f64;
    n / PI * (n / (2.0 * u + 1.0) - 1.0)
}

pub fn inv2_imag(n: usize, index: usize) -> f64 {
    let n = n as f64;
    n / PI * (n / (index as f64 + 1.0) - 1.0)
}

pub fn lin_imag(u: f64) -> f64 {
    PI * u
}

pub fn quad_imag(index: usize) -> f64 {
    let k = 1.0 + 2.0 * index as f64;
    k * k / PI
}

pub fn init_legsd(n: usize) -> Result<DiagonalSpec> {
    let half = require_even(n)?;
    let spectrum = hippo_d_spectrum(n)?;
    let a = spectrum.eigenvalues[..half].to_vec();
    Ok(DiagonalSpec::half_spectrum("legsd", n, a))
}

pub fn init_inv(n: usize) -> Result<DiagonalSpec> {
    let half = require_even(n)?;
    let a = (0..half).map(|k| C64::new(-0.5, inv_imag(n, k as f64))).collect();
    Ok(DiagonalSpec::half_spectrum("inv", n, a))
}

pub fn init_lin(n: usize) -> Result<DiagonalSpec> {
    let half = require_even(n)?;
    let a = (0..half).map(|k| C64::new(-0.5, lin_imag(k as f64))).collect();
    Ok(DiagonalSpec::half_spectrum("lin", n, a))
}

pub fn init_inv2(n: usize) -> Result<DiagonalSpec> {
    let half = require_even(n)?;
    let a = (0..half).map(|k| C64::new(-0.5, inv2_imag(n, k))).collect();
    Ok(DiagonalSpec::half_spectrum("inv2", n, a))
}

pub fn init_quad(n: usize) -> Result<DiagonalSpec> {
    let half = require_even(n)?;
    let a = (0..half).map(|k| C64::new(-0.5, quad_imag(k))).collect();
    Ok(DiagonalSpec::half_spectrum("quad", n, a))
}

/// `A_n = -(n+1)`: the diagonal of HiPPO-LegS, stored as a full real spectrum.
pub fn init_real(n: usize) -> Result<DiagonalSpec> {
    if n == 0 {
        return Err(Error::ZeroStateSize);
    }
    let a = (0..n).map(|k| C64::new(-((k + 1) as f64), 0.0)).collect();
    let mut spec = DiagonalSpec::half_spectrum("real", n, a);
    spec.pairing = Pairing::Real;
    Ok(spec)
}

/// Real parts `-U[0,1)`, imaginary parts `U[0, N pi / 2)`.
pub fn init_rand(n: usize, seed: u64) -> Result<DiagonalSpec> {
    let half = require_even(n)?;
    let mut rng = seeded(seed, STREAM_A);
    let top = n as f64 * PI / 2.0;
    let a = (0..half)
        .map(|_| {
            let re = -rng.random::<f64>();
            let im = rng.random::<f64>() * top;
            C64::new(re, im)
        })
        .collect();
    Ok(DiagonalSpec::half_spectrum("rand", n, a))
}

/// Inverse law evaluated at explicit nodes `u` instead of `0, 1, ..., N/2 - 1`.
pub fn inv_at_nodes(n: usize, nodes: &[f64]) -> Result<DiagonalSpec> {
    let half = require_even(n)?;
    if nodes.len() != half {
        return Err(Error::LengthMismatch {
            expected: half,
            actual: nodes.len(),
        });
    }
    let a = nodes.iter().map(|&u| C64::new(-0.5, inv_imag(n, u))).collect();
    Ok(DiagonalSpec::half_spectrum("inv-rimag", n, a))
}

pub fn lin_at_nodes(n: usize, nodes: &[f64]) -> Result<DiagonalSpec> {
    let half = require_even(n)?;
    if nodes.len() != half {
        return Err(Error::LengthMismatch {
            expected: half,
            actual: nodes.len(),
        });
    }
    let a = nodes.iter().map(|&u| C64::new(-0.5, lin_imag(u))).collect();
    Ok(DiagonalSpec::half_spectrum("lin-rimag", n, a))
}

fn random_nodes(n: usize, seed: u64) -> Result<Vec<f64>> {
    let half = require_even(n)?;
    let mut rng = seeded(seed, STREAM_A);
    Ok((0..half).map(|_| rng.random::<f64>() * half as f64).collect())
}

/// Inverse law with nodes drawn uniformly on `[0, N/2)`.
pub fn init_inv_random_imag(n: usize, seed: u64) -> Result<DiagonalSpec> {
    inv_at_nodes(n, &random_nodes(n, seed)?)
}

/// Linear law with nodes drawn uniformly on `[0, N/2)`.
pub fn init_lin_random_imag(n: usize, seed: u64) -> Result<DiagonalSpec> {
    lin_at_nodes(n, &random_nodes(n, seed)?)
}

/// Redraws every real part from `-U[0,1)`, keeping imaginary parts.
pub fn init_random_real(spec: &DiagonalSpec, seed: u64) -> DiagonalSpec {
    let mut rng = seeded(seed, STREAM_REAL);
    let mut out = spec.clone();
    for z in &mut out.a {
        z.re = -rng.random::<f64>();
    }
    out.init = format!("{}+rreal", spec.init);
    out
}

/// Output map with independent standard-normal real and imaginary parts.
pub fn init_c(n_half: usize, seed: u64) -> Vec<C64> {
    let mut rng = seeded(seed, STREAM_C);
    (0..n_half)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect()
}

/// `B = 1 + scale * (xi_re + i xi_im)`, standing in for a trained input map.
pub fn init_b_perturbed(n_half: usize, scale: f64, seed: u64) -> Vec<C64> {
    let mut rng = seeded(seed, STREAM_B);
    (0..n_half)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(1.0 + scale * re, scale * im)
        })
        .collect()
}

/// `log dt` uniform on `[ln dt_min, ln dt_max]`.
pub fn init_log_dt(dt_min: f64, dt_max: f64, seed: u64) -> Result<f64> {
    if !(dt_min > 0.0 && dt_min.is_finite() && dt_max.is_finite()) || dt_min > dt_max {
        return Err(Error::InvalidTimescale(format!(
            "need 0 < dt_min <= dt_max, got dt_min={dt_min}, dt_max={dt_max}"
        )));
    }
    let (lo, hi) = (dt_min.ln(), dt_max.ln());
    if lo == hi {
        return Ok(lo);
    }
    let mut rng = seeded(seed, STREAM_DT);
    let u: f64 = rng.random();
    Ok((lo + u * (hi - lo)).clamp(lo, hi))
}

/// Stable identifiers of every initialization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum InitKind {
    Legsd,
    Inv,
    Lin,
    Inv2,
    Quad,
    Real,
    Rand,
    InvRandImag,
    LinRandImag,
}

impl InitKind {
    pub const ALL: [InitKind; 9] = [
        InitKind::Legsd,
        InitKind::Inv,
        InitKind::Lin,
        InitKind::Inv2,
        InitKind::Quad,
        InitKind::Real,
        InitKind::Rand,
        InitKind::InvRandImag,
        InitKind::LinRandImag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InitKind::Legsd => "legsd",
            InitKind::Inv => "inv",
            InitKind::Lin => "lin",
            InitKind::Inv2 => "inv2",
            InitKind::Quad => "quad",
            InitKind::Real => "real",
            InitKind::Rand => "rand",
            InitKind::InvRandImag => "inv-rimag",
            InitKind::LinRandImag => "lin-rimag",
        }
    }

    pub fn is_random(self) -> bool {
        matches!(self, InitKind::Rand | InitKind::InvRandImag | InitKind::LinRandImag)
    }

    /// Builds `A` (and `B = 1`); `C` and `dt` are left to the caller.
    pub fn build(self, n: usize, seed: u64) -> Result<DiagonalSpec> {
        match self {
            InitKind::Legsd => init_legsd(n),
            InitKind::Inv => init_inv(n),
            InitKind::Lin => init_lin(n),
            InitKind::Inv2 => init_inv2(n),
            InitKind::Quad => init_quad(n),
            InitKind::Real => init_real(n),
            InitKind::Rand => init_rand(n, seed),
            InitKind::InvRandImag => init_inv_random_imag(n, seed),
            InitKind::LinRandImag => init_lin_random_imag(n, seed),
        }
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        InitKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownInit(s.to_string()))
    }
}
