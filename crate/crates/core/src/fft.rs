//! Thin wrapper around rustfft with a per-thread planner.

use std::cell::RefCell;

use rustfft::FftPlanner;

use crate::C64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward transform, `X_k = sum_n x_n e^{-2 pi i k n / N}`.
pub fn forward(data: &mut [C64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(data.len()));
    fft.process(data);
}

/// Unnormalized inverse transform.
pub fn inverse(data: &mut [C64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(data.len()));
    fft.process(data);
}

/// Signed mode index of FFT slot `k` for length `n` (Nyquist maps to `-n/2`).
pub fn mode_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// FFT slot of signed mode `m`, if it is representable on `n` points.
pub fn slot(m: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if m >= -half && m < half {
        Some(m.rem_euclid(n as i64) as usize)
    } else {
        None
    }
}
