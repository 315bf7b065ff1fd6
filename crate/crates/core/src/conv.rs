//! Applying kernels: FFT causal convolution and the step recurrence.

use crate::discretize::DiscreteParams;
use crate::fft::{fft_in_place, ifft_in_place};
use crate::kernel::Kernel;
use crate::{Error, Result, C64};

/// Residue threshold relative to the output scale.
const IMAG_TOL: f64 = 1e-9;

/// One or more equal-length real channels.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    channels: Vec<Vec<f64>>,
}

impl Signal {
    pub fn new(channels: Vec<Vec<f64>>) -> Result<Self> {
        let len = channels.first().ok_or(Error::BadSignal)?.len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::BadSignal);
        }
        if let Some(k) = channels.iter().flatten().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(k % len.max(1)));
        }
        Ok(Self { channels })
    }

    pub fn mono(samples: Vec<f64>) -> Result<Self> {
        Self::new(vec![samples])
    }

    pub fn impulse(len: usize) -> Self {
        let mut v = vec![0.0; len];
        if let Some(first) = v.first_mut() {
            *first = 1.0;
        }
        Self { channels: vec![v] }
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    pub fn max_abs(&self) -> f64 {
        self.channels.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Per-channel half-spectrum state.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrentState {
    pub x: Vec<Vec<C64>>,
}

impl RecurrentState {
    pub fn zeros(channels: usize, n: usize) -> Self {
        Self {
            x: vec![vec![C64::new(0.0, 0.0); n]; channels],
        }
    }
}

/// `y_l = sum_{j<=l} k_j u_{l-j}`, quadratic time.
pub fn direct_causal_conv(u: &[f64], k: &[f64]) -> Vec<f64> {
    (0..u.len())
        .map(|l| {
            (0..=l)
                .filter(|&j| j < k.len())
                .map(|j| k[j] * u[l - j])
                .sum()
        })
        .collect()
}

/// Single-channel causal convolution through zero-padded transforms.
pub fn causal_conv_fft(u: &[f64], k: &[f64]) -> Result<Vec<f64>> {
    let l = u.len();
    if k.len() != l {
        return Err(Error::LengthMismatch {
            expected: l,
            actual: k.len(),
        });
    }
    if l == 0 {
        return Err(Error::EmptySequence);
    }
    let n = (2 * l).next_power_of_two();
    let pad = |x: &[f64]| {
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for (slot, &v) in buf.iter_mut().zip(x) {
            slot.re = v;
        }
        fft_in_place(&mut buf);
        buf
    };
    let mut y = pad(u);
    let kf = pad(k);
    for (a, b) in y.iter_mut().zip(&kf) {
        *a *= b;
    }
    ifft_in_place(&mut y);
    y.truncate(l);

    let scale = y.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    let residue = y.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    // Round-off floor for outputs that cancel to (near) zero.
    let umax = u.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let kmax = k.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let floor = f64::EPSILON * umax * kmax * l as f64;
    if residue > IMAG_TOL * scale + floor {
        return Err(Error::ImaginaryResidue { residue, scale });
    }
    Ok(y.into_iter().map(|z| z.re).collect())
}

/// Convolves every channel of `u` with `k`.
pub fn fft_causal_conv(u: &Signal, k: &Kernel) -> Result<Signal> {
    let out = u
        .channels()
        .iter()
        .map(|ch| causal_conv_fft(ch, &k.values))
        .collect::<Result<Vec<_>>>()?;
    Signal::new(out)
}

/// `x_k = A_bar x_{k-1} + B_bar u_k`, `y_k = factor * Re(C x_k)` from zero
/// state.
pub fn recurrent_scan(
    disc: &DiscreteParams,
    c: &[C64],
    u: &Signal,
) -> Result<(Signal, RecurrentState)> {
    let state = RecurrentState::zeros(u.num_channels(), disc.len());
    recurrent_scan_from(disc, c, u, state)
}

/// Continues a scan from a carried state.
pub fn recurrent_scan_from(
    disc: &DiscreteParams,
    c: &[C64],
    u: &Signal,
    mut state: RecurrentState,
) -> Result<(Signal, RecurrentState)> {
    let n = disc.len();
    if c.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: c.len(),
        });
    }
    if state.x.len() != u.num_channels() {
        return Err(Error::LengthMismatch {
            expected: u.num_channels(),
            actual: state.x.len(),
        });
    }
    if let Some(x) = state.x.iter().find(|x| x.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: x.len(),
        });
    }
    let factor = disc.pairing.factor();
    let mut out = Vec::with_capacity(u.num_channels());
    for (ch, x) in u.channels().iter().zip(state.x.iter_mut()) {
        let mut y = Vec::with_capacity(ch.len());
        for &uk in ch {
            let mut acc = C64::new(0.0, 0.0);
            for (((xn, &a), &b), &cn) in x.iter_mut().zip(&disc.a_bar).zip(&disc.b_bar).zip(c) {
                *xn = a * *xn + b * uk;
                acc += cn * *xn;
            }
            y.push(factor * acc.re);
        }
        out.push(y);
    }
    Ok((Signal::new(out)?, state))
}
