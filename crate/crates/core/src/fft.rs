//! Forward/inverse DFT of arbitrary length, backed by `rustfft`.

use rustfft::FftPlanner;

use crate::C64;

/// Unnormalized forward DFT: `X_k = sum_j x_j exp(-2 pi i jk / n)`.
pub fn fft(x: &[C64]) -> Vec<C64> {
    let mut buf = x.to_vec();
    fft_in_place(&mut buf);
    buf
}

/// Inverse DFT including the `1/n` factor.
pub fn ifft(x: &[C64]) -> Vec<C64> {
    let mut buf = x.to_vec();
    ifft_in_place(&mut buf);
    buf
}

pub fn fft_in_place(buf: &mut [C64]) {
    if buf.is_empty() {
        return;
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
}

pub fn ifft_in_place(buf: &mut [C64]) {
    if buf.is_empty() {
        return;
    }
    FftPlanner::new().plan_fft_inverse(buf.len()).process(buf);
    let scale = 1.0 / buf.len() as f64;
    for z in buf.iter_mut() {
        *z *= scale;
    }
}
