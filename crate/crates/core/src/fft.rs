//! Thread-local cached FFT plans and frequency-grid helpers.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward DFT in place.
pub fn forward(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

/// Inverse DFT in place, scaled by `1/len`.
pub fn inverse(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
    let s = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|v| *v *= s);
}

/// Frequency of DFT bin `k` on a grid of `len` bins at sample rate `fs`,
/// in `[-fs/2, fs/2)`.
#[inline]
pub fn bin_freq(k: usize, len: usize, fs: f64) -> f64 {
    let k = if 2 * k >= len { k as f64 - len as f64 } else { k as f64 };
    k * fs / len as f64
}

/// Absolute tolerance for "frequency lies inside a band" tests on a grid.
#[inline]
pub fn grid_eps(fs: f64) -> f64 {
    1e-9 * fs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_grid() {
        let x: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, -(i as f64) / 2.0)).collect();
        let mut y = x.clone();
        forward(&mut y);
        assert!((y[0] - x.iter().sum::<Complex64>()).norm() < 1e-12);
        inverse(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-12);
        }
        assert_eq!(bin_freq(0, 8, 8.0), 0.0);
        assert_eq!(bin_freq(3, 8, 8.0), 3.0);
        assert_eq!(bin_freq(4, 8, 8.0), -4.0);
        assert_eq!(bin_freq(7, 8, 8.0), -1.0);
    }
}
