//! Thin wrappers around `rustfft` with a shared plan cache.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type PlanCache = Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)>;

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let (planner, plans) = &mut *guard;
    plans
        .entry((len, inverse))
        .or_insert_with(|| {
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// Unnormalized forward DFT.
pub fn forward(data: &[Complex64]) -> Vec<Complex64> {
    let mut buf = data.to_vec();
    forward_in_place(&mut buf);
    buf
}

pub fn forward_in_place(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// Inverse DFT scaled by 1/N.
pub fn inverse(spectrum: &[Complex64]) -> Vec<Complex64> {
    let mut buf = spectrum.to_vec();
    inverse_in_place(&mut buf);
    buf
}

pub fn inverse_in_place(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
}

/// Applies a frequency response `h(f)` (signed frequency in Hz) by circular
/// convolution over the record.
pub fn apply_response(
    data: &[Complex64],
    sample_rate: f64,
    mut h: impl FnMut(f64) -> Complex64,
) -> Vec<Complex64> {
    let n = data.len();
    let df = sample_rate / n as f64;
    let mut buf = forward(data);
    for (k, v) in buf.iter_mut().enumerate() {
        let f = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 } * df;
        *v *= h(f);
    }
    inverse_in_place(&mut buf);
    buf
}
