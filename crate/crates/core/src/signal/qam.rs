//! 16-QAM passband generation and data-aided EVM measurement.
//!
//! Waveforms are synthesized directly in the frequency domain: every DFT bin
//! within the root-raised-cosine support around the carrier receives
//! `P(nu) * sum_m s_m exp(-j 2 pi nu m Ts)`. The result is periodic over the
//! record, so circular delays and filters act on it without edge effects.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fft;
use super::waveform::{dbm_to_watts, SampledWaveform, TimeGrid, REFERENCE_OHMS};
use crate::error::{Error, Result};

/// Minimum number of whole symbols a record must hold.
pub const MIN_SYMBOLS: usize = 64;

/// Symbols skipped at each end of the record when measuring EVM; the record
/// wrap-around does not fall on a symbol boundary.
const EDGE_SYMBOLS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QamSignalSpec {
    pub order: u32,
    /// Baud.
    pub symbol_rate: f64,
    /// Hz.
    pub center_frequency: f64,
    /// dBm into the reference impedance.
    pub power_dbm: f64,
    pub rolloff: f64,
    pub seed: u64,
}

impl QamSignalSpec {
    pub const DEFAULT_ROLLOFF: f64 = 0.35;

    /// Half of the occupied bandwidth, `(1 + rolloff) * symbol_rate / 2`.
    pub fn half_bandwidth(&self) -> f64 {
        (1.0 + self.rolloff) * self.symbol_rate / 2.0
    }

    fn validate(&self, grid: &TimeGrid) -> Result<()> {
        if self.order != 16 {
            return Err(Error::UnsupportedConstellation(self.order));
        }
        if !(self.symbol_rate > 0.0 && self.symbol_rate.is_finite()) {
            return Err(Error::validation("symbol_rate", "must be positive"));
        }
        if !(self.rolloff > 0.0 && self.rolloff <= 1.0) {
            return Err(Error::validation("rolloff", "must lie in (0, 1]"));
        }
        if !self.power_dbm.is_finite() {
            return Err(Error::validation("power_dbm", "must be finite"));
        }
        let hi = self.center_frequency + self.half_bandwidth();
        let lo = self.center_frequency - self.half_bandwidth();
        if lo <= 0.0 || hi >= grid.nyquist() {
            return Err(Error::Alias {
                frequency: if lo <= 0.0 { lo } else { hi },
                nyquist: grid.nyquist(),
            });
        }
        if self.symbol_count(grid) < MIN_SYMBOLS {
            return Err(Error::validation(
                "symbol_rate",
                format!(
                    "record holds {} symbols, need at least {MIN_SYMBOLS}",
                    self.symbol_count(grid)
                ),
            ));
        }
        Ok(())
    }

    pub fn symbol_count(&self, grid: &TimeGrid) -> usize {
        (grid.duration() * self.symbol_rate * (1.0 + 1e-12)).floor() as usize
    }
}

/// Root-raised-cosine amplitude response, unity at DC.
pub fn rrc_response(f: f64, symbol_rate: f64, rolloff: f64) -> f64 {
    let f = f.abs();
    let ts = 1.0 / symbol_rate;
    let f1 = (1.0 - rolloff) / (2.0 * ts);
    let f2 = (1.0 + rolloff) / (2.0 * ts);
    if f <= f1 {
        1.0
    } else if f >= f2 {
        0.0
    } else {
        (PI * ts / (2.0 * rolloff) * (f - f1)).cos()
    }
}

/// Gray-mapped 16-QAM points with unit average energy.
fn constellation_point(index: u8) -> Complex64 {
    const LEVELS: [f64; 4] = [-3.0, -1.0, 3.0, 1.0];
    let i = LEVELS[(index >> 2) as usize & 3];
    let q = LEVELS[index as usize & 3];
    Complex64::new(i, q) / 10f64.sqrt()
}

/// Symbol sequence for a spec; identical for identical seeds.
pub fn qam_symbols(spec: &QamSignalSpec, count: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..count)
        .map(|_| constellation_point(rng.gen_range(0..16u8)))
        .collect()
}

/// Record bins (index, offset from carrier) inside the RRC support.
fn band_bins(spec: &QamSignalSpec, grid: &TimeGrid) -> Vec<(usize, f64)> {
    let df = grid.bin_spacing();
    let half = spec.half_bandwidth();
    let k_lo = ((spec.center_frequency - half) / df).ceil().max(1.0) as usize;
    let k_hi = ((spec.center_frequency + half) / df).floor() as usize;
    (k_lo..=k_hi.min(grid.n_samples / 2 - 1))
        .map(|k| (k, k as f64 * df - spec.center_frequency))
        .collect()
}

/// Positive-frequency spectrum (before mirroring) of the unscaled waveform.
fn analytic_spectrum(
    spec: &QamSignalSpec,
    grid: &TimeGrid,
    symbols: &[Complex64],
) -> Vec<(usize, f64, Complex64)> {
    let ts = 1.0 / spec.symbol_rate;
    band_bins(spec, grid)
        .into_iter()
        .map(|(k, nu)| {
            let step = Complex64::from_polar(1.0, -TAU * nu * ts);
            let mut rot = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for s in symbols {
                acc += s * rot;
                rot *= step;
            }
            (k, nu, acc * rrc_response(nu, spec.symbol_rate, spec.rolloff))
        })
        .collect()
}

pub fn make_qam(spec: &QamSignalSpec, grid: &TimeGrid) -> Result<SampledWaveform> {
    spec.validate(grid)?;
    let symbols = qam_symbols(spec, spec.symbol_count(grid));
    let n = grid.n_samples;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (k, _, v) in analytic_spectrum(spec, grid, &symbols) {
        buf[k] = v;
        buf[n - k] = v.conj();
    }
    fft::inverse_in_place(&mut buf);
    let ms: f64 = buf.iter().map(|v| v.re * v.re).sum::<f64>() / n as f64;
    let target = dbm_to_watts(spec.power_dbm) * REFERENCE_OHMS;
    let scale = if ms > 0.0 { (target / ms).sqrt() } else { 0.0 };
    SampledWaveform::from_real(*grid, buf.iter().map(|v| v.re * scale))
}

/// RMS error-vector magnitude in percent after matched filtering, data-aided
/// timing recovery and a single complex-gain equalization.
pub fn demodulate_evm(w: &SampledWaveform, spec: &QamSignalSpec) -> Result<f64> {
    let grid = w.grid;
    spec.validate(&grid)?;
    let count = spec.symbol_count(&grid);
    let symbols = qam_symbols(spec, count);
    let reference = analytic_spectrum(spec, &grid, &symbols);
    let spectrum = fft::forward(&w.samples);

    // Matched filter on both the received and the reference spectra.
    let received: Vec<(usize, f64, Complex64)> = reference
        .iter()
        .map(|&(k, nu, _)| {
            (k, nu, spectrum[k] * rrc_response(nu, spec.symbol_rate, spec.rolloff))
        })
        .collect();
    let rx_energy: f64 = received.iter().map(|r| r.2.norm_sqr()).sum();
    let ref_energy: f64 = reference
        .iter()
        .map(|r| (r.2 * rrc_response(r.1, spec.symbol_rate, spec.rolloff)).norm_sqr())
        .sum();
    if !(rx_energy > 0.0) || !rx_energy.is_finite() {
        return Err(Error::Lock("no energy around the carrier".into()));
    }

    // Cross-correlation against the reference to recover the sample lag.
    let n = grid.n_samples;
    let mut xc = vec![Complex64::new(0.0, 0.0); n];
    for (r, x) in received.iter().zip(&reference) {
        let mf = rrc_response(x.1, spec.symbol_rate, spec.rolloff);
        xc[r.0] = r.2 * (x.2 * mf).conj();
    }
    fft::inverse_in_place(&mut xc);
    let (lag, peak) = xc
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v.norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, 0.0));
    let coherence = peak * n as f64 / (rx_energy * ref_energy).sqrt();
    if coherence < 0.3 {
        return Err(Error::Lock(format!("weak correlation ({coherence:.3})")));
    }
    let lag_s = lag as f64 / grid.sample_rate;

    let ts = 1.0 / spec.symbol_rate;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    let mut samples = Vec::with_capacity(count);
    for (m, s) in symbols
        .iter()
        .enumerate()
        .take(count - EDGE_SYMBOLS)
        .skip(EDGE_SYMBOLS)
    {
        let t = m as f64 * ts + lag_s;
        let y: Complex64 = received
            .iter()
            .map(|&(_, nu, v)| v * Complex64::from_polar(1.0, TAU * (nu * t).fract()))
            .sum();
        num += y * s.conj();
        den += s.norm_sqr();
        samples.push((y, *s));
    }
    let gain = num / den;
    if gain.norm() == 0.0 {
        return Err(Error::Lock("zero equalizer gain".into()));
    }
    let err: f64 = samples.iter().map(|(y, s)| (y - gain * s).norm_sqr()).sum();
    Ok(100.0 * (err / (gain.norm_sqr() * den)).sqrt())
}
