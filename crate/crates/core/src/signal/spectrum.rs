//! Averaged-periodogram spectral estimation and the band-power metrics built on it.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::fft;
use super::waveform::{watts_to_dbm, SampledWaveform, TimeGrid, REFERENCE_OHMS};
use crate::error::{Error, Result};

/// Lowest PSD value reported, in W/Hz (-400 dBm/Hz).
const PSD_FLOOR_W_PER_HZ: f64 = 1e-43;

/// Power spectral density with its resolution bandwidth.
///
/// Real waveforms yield a one-sided spectrum over `[0, fs/2]`; complex
/// waveforms a two-sided spectrum over `[-fs/2, fs/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub freqs: Vec<f64>,
    /// dBm/Hz.
    pub psd: Vec<f64>,
    /// Bin width of the estimate in Hz.
    pub rbw: f64,
}

impl SpectrumEstimate {
    pub fn psd_linear(&self, k: usize) -> f64 {
        // mW/Hz
        10f64.powf(self.psd[k] / 10.0)
    }

    pub fn total_power_dbm(&self) -> f64 {
        let mw: f64 = (0..self.psd.len()).map(|k| self.psd_linear(k)).sum::<f64>() * self.rbw;
        10.0 * mw.log10()
    }

    /// Index of the highest PSD bin inside `[f_lo, f_hi]`.
    pub fn peak_in(&self, f_lo: f64, f_hi: f64) -> Option<usize> {
        self.freqs
            .iter()
            .enumerate()
            .filter(|(_, f)| **f >= f_lo && **f <= f_hi)
            .max_by(|a, b| self.psd[a.0].total_cmp(&self.psd[b.0]))
            .map(|(k, _)| k)
    }
}

/// Resolution bandwidth used for link metrics: four times the record's bin
/// spacing, which gives seven half-overlapped Hann segments.
pub fn analysis_rbw(grid: &TimeGrid) -> f64 {
    let min = grid.bin_spacing();
    if grid.n_samples >= 8 {
        4.0 * min
    } else {
        min
    }
}

pub fn welch_psd(w: &SampledWaveform, rbw: f64) -> Result<SpectrumEstimate> {
    welch_with_load(&w.samples, &w.grid, rbw, REFERENCE_OHMS, w.is_real())
}

/// Welch estimate of samples whose squared magnitude is power across `ohms`.
/// Optical envelopes in sqrt(W) use `ohms = 1`.
pub(crate) fn welch_with_load(
    samples: &[Complex64],
    grid: &TimeGrid,
    rbw: f64,
    ohms: f64,
    one_sided: bool,
) -> Result<SpectrumEstimate> {
    let n = samples.len();
    let fs = grid.sample_rate;
    let min_rbw = fs / n as f64;
    if !(rbw.is_finite() && rbw >= min_rbw * (1.0 - 1e-9)) {
        return Err(Error::Resolution { rbw, min: min_rbw });
    }
    let nseg = ((fs / rbw).round() as usize).clamp(2, n);
    let hop = (nseg / 2).max(1);

    let window: Vec<f64> = (0..nseg)
        .map(|i| 0.5 - 0.5 * (TAU * i as f64 / nseg as f64).cos())
        .collect();
    let window_energy: f64 = window.iter().map(|w| w * w).sum();

    let mut acc = vec![0.0f64; nseg];
    let mut segments = 0usize;
    let mut start = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); nseg];
    while start + nseg <= n {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = samples[start + i] * window[i];
        }
        fft::forward_in_place(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let scale = 1.0 / (segments as f64 * fs * window_energy * ohms);
    let df = fs / nseg as f64;
    let to_dbm = |w_per_hz: f64| watts_to_dbm(w_per_hz.max(PSD_FLOOR_W_PER_HZ));

    let (freqs, psd) = if one_sided {
        let half = nseg / 2;
        (0..=half)
            .map(|k| {
                let mut p = acc[k % nseg] * scale;
                let edge = k == 0 || (nseg % 2 == 0 && k == half);
                if !edge {
                    p *= 2.0;
                }
                (k as f64 * df, to_dbm(p))
            })
            .unzip()
    } else {
        let shift = nseg / 2;
        (0..nseg)
            .map(|i| {
                let k = (i + nseg - shift) % nseg;
                let f = (i as f64 - shift as f64) * df;
                (f, to_dbm(acc[k] * scale))
            })
            .unzip()
    };
    Ok(SpectrumEstimate { freqs, psd, rbw: df })
}

/// Integrated power over `[f_lo, f_hi]` in dBm.
pub fn band_power(s: &SpectrumEstimate, f_lo: f64, f_hi: f64) -> Result<f64> {
    let half = s.rbw / 2.0;
    let min = s.freqs.first().copied().unwrap_or(0.0) - half;
    let max = s.freqs.last().copied().unwrap_or(0.0) + half;
    if !(f_lo < f_hi) || f_lo < min || f_hi > max {
        return Err(Error::Range {
            lo: f_lo,
            hi: f_hi,
            min,
            max,
        });
    }
    let mw: f64 = s
        .freqs
        .iter()
        .enumerate()
        .filter(|(_, f)| **f >= f_lo && **f <= f_hi)
        .map(|(k, _)| s.psd_linear(k))
        .sum::<f64>()
        * s.rbw;
    let floor_mw = PSD_FLOOR_W_PER_HZ * 1e3 * s.rbw;
    Ok(10.0 * mw.max(floor_mw).log10())
}

/// Band power suppression `P(without) - P(with)` in dB, measured at the
/// analysis resolution bandwidth.
pub fn cancellation_depth(
    without_sic: &SampledWaveform,
    with_sic: &SampledWaveform,
    band: (f64, f64),
) -> Result<f64> {
    cancellation_depth_at(without_sic, with_sic, band, analysis_rbw(&without_sic.grid))
}

pub fn cancellation_depth_at(
    without_sic: &SampledWaveform,
    with_sic: &SampledWaveform,
    band: (f64, f64),
    rbw: f64,
) -> Result<f64> {
    without_sic.grid.ensure_same(&with_sic.grid)?;
    if without_sic == with_sic {
        band_power(&welch_psd(without_sic, rbw)?, band.0, band.1)?;
        return Ok(0.0);
    }
    let p_without = band_power(&welch_psd(without_sic, rbw)?, band.0, band.1)?;
    let p_with = band_power(&welch_psd(with_sic, rbw)?, band.0, band.1)?;
    Ok(p_without - p_with)
}

/// Band holding `fraction` of the power found inside `[center - half_width,
/// center + half_width]`, with equal tails cut from each side.
pub fn occupied_band(
    s: &SpectrumEstimate,
    center: f64,
    half_width: f64,
    fraction: f64,
) -> Result<(f64, f64)> {
    let lo = center - half_width;
    let hi = center + half_width;
    band_power(s, lo, hi)?;
    let bins: Vec<(f64, f64)> = s
        .freqs
        .iter()
        .enumerate()
        .filter(|(_, f)| **f >= lo && **f <= hi)
        .map(|(k, f)| (*f, s.psd_linear(k)))
        .collect();
    let total: f64 = bins.iter().map(|b| b.1).sum();
    let tail = total * (1.0 - fraction) / 2.0;
    let mut acc = 0.0;
    let mut f_lo = lo;
    for &(f, p) in &bins {
        acc += p;
        if acc > tail {
            f_lo = f;
            break;
        }
    }
    acc = 0.0;
    let mut f_hi = hi;
    for &(f, p) in bins.iter().rev() {
        acc += p;
        if acc > tail {
            f_hi = f;
            break;
        }
    }
    if f_hi <= f_lo {
        f_hi = f_lo + s.rbw;
    }
    Ok((f_lo - s.rbw / 2.0, f_hi + s.rbw / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::tone::{make_tone, ToneSpec};
    use crate::signal::waveform::dbm_to_peak_volts;
    use rand::{Rng, SeedableRng};

    fn grid() -> TimeGrid {
        TimeGrid::new(64e9, 1 << 16).unwrap()
    }

    fn tone_dbm(dbm: f64, f: f64, g: &TimeGrid) -> SampledWaveform {
        make_tone(&ToneSpec::new(dbm_to_peak_volts(dbm), f, 0.3), g).unwrap()
    }

    #[test]
    fn zero_dbm_tone_integrates_to_zero_dbm() {
        let g = grid();
        let w = tone_dbm(0.0, 2e9, &g);
        let s = welch_psd(&w, 4.0 * g.bin_spacing()).unwrap();
        let p = band_power(&s, 2e9 - 3.0 * s.rbw, 2e9 + 3.0 * s.rbw).unwrap();
        assert!(p.abs() < 0.2, "{p}");
    }

    #[test]
    fn off_bin_tone_still_integrates() {
        let g = grid();
        let w = tone_dbm(0.0, 2.1234e9, &g);
        let s = welch_psd(&w, 4.0 * g.bin_spacing()).unwrap();
        let p = band_power(&s, 2.1234e9 - 3.0 * s.rbw, 2.1234e9 + 3.0 * s.rbw).unwrap();
        assert!(p.abs() < 0.2, "{p}");
    }

    #[test]
    fn zero_input_sits_at_floor() {
        let g = grid();
        let s = welch_psd(&SampledWaveform::zeros(g), 1e6).unwrap();
        assert!(s.psd.iter().all(|p| *p <= -300.0));
    }

    #[test]
    fn two_equal_tones_have_equal_peaks() {
        let g = TimeGrid::new(64e9, 1 << 18).unwrap();
        let w = tone_dbm(0.0, 2e9, &g).add(&tone_dbm(0.0, 2.1e9, &g)).unwrap();
        let s = welch_psd(&w, 1e6).unwrap();
        assert_eq!(s.rbw, 1e6);
        let a = s.psd[s.peak_in(1.95e9, 2.05e9).unwrap()];
        let b = s.psd[s.peak_in(2.05e9, 2.15e9).unwrap()];
        assert!((a - b).abs() < 0.1, "{a} {b}");
    }

    #[test]
    fn quiet_band_is_far_down() {
        let g = grid();
        let s = welch_psd(&tone_dbm(0.0, 2e9, &g), 4.0 * g.bin_spacing()).unwrap();
        assert!(band_power(&s, 10e9, 11e9).unwrap() <= -100.0);
    }

    #[test]
    fn flat_noise_halves_split_evenly() {
        let g = grid();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let w = SampledWaveform::from_real(g, (0..g.n_samples).map(|_| rng.gen::<f64>() - 0.5))
            .unwrap();
        let s = welch_psd(&w, 64.0 * g.bin_spacing()).unwrap();
        // Band edges chosen away from DC/Nyquist where the one-sided estimate
        // has half-weight bins.
        let total = band_power(&s, 1e9, 31e9).unwrap();
        let lower = band_power(&s, 1e9, 16e9 - s.rbw / 2.0).unwrap();
        let upper = band_power(&s, 16e9 + s.rbw / 2.0, 31e9).unwrap();
        assert!((lower - (total - 3.0103)).abs() < 0.1, "{lower} {total}");
        assert!((upper - (total - 3.0103)).abs() < 0.1, "{upper} {total}");
    }

    #[test]
    fn resolution_error() {
        let g = grid();
        let w = tone_dbm(0.0, 1e9, &g);
        assert!(matches!(
            welch_psd(&w, g.bin_spacing() / 2.0),
            Err(Error::Resolution { .. })
        ));
        assert!(welch_psd(&w, g.bin_spacing()).is_ok());
    }

    #[test]
    fn band_outside_spectrum_is_range_error() {
        let g = grid();
        let s = welch_psd(&tone_dbm(0.0, 1e9, &g), 1e6).unwrap();
        assert!(matches!(band_power(&s, 30e9, 40e9), Err(Error::Range { .. })));
        assert!(matches!(band_power(&s, 2e9, 1e9), Err(Error::Range { .. })));
    }

    #[test]
    fn depth_definition_and_symmetry() {
        let g = grid();
        let a = tone_dbm(-20.0, 2e9, &g);
        let b = tone_dbm(-60.0, 2e9, &g);
        let band = (2e9 - 1e6, 2e9 + 1e6);
        let d = cancellation_depth(&a, &b, band).unwrap();
        assert!((d - 40.0).abs() < 1e-6, "{d}");
        assert_eq!(cancellation_depth(&a, &a, band).unwrap(), 0.0);
        assert_eq!(cancellation_depth(&b, &a, band).unwrap(), -d);
    }

    #[test]
    fn two_sided_for_complex_input() {
        let g = grid();
        let f = 5e9;
        let w = SampledWaveform::new(
            g,
            (0..g.n_samples)
                .map(|k| Complex64::from_polar(0.1, TAU * f * g.time(k)))
                .collect(),
        )
        .unwrap();
        let s = welch_psd(&w, 1e6).unwrap();
        assert!(s.freqs[0] < 0.0);
        let k = s.peak_in(-32e9, 32e9).unwrap();
        assert!((s.freqs[k] - f).abs() <= s.rbw);
    }

    #[test]
    fn occupied_band_of_tone_is_narrow() {
        let g = grid();
        let s = welch_psd(&tone_dbm(0.0, 2e9, &g), 4.0 * g.bin_spacing()).unwrap();
        let (lo, hi) = occupied_band(&s, 2e9, 50e6, 0.99).unwrap();
        assert!(lo < 2e9 && hi > 2e9 && hi - lo < 6.0 * s.rbw);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn parseval_holds(amps in proptest::collection::vec(0.01f64..1.0, 3), seed in 0u64..1000) {
            let g = TimeGrid::new(64e9, 1 << 14).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut w = SampledWaveform::zeros(g);
            for a in amps {
                let f = rng.gen_range(0.5e9..30e9);
                let t = make_tone(&ToneSpec::new(a, f, rng.gen_range(0.0..6.0)), &g).unwrap();
                w = w.add(&t).unwrap();
            }
            let s = welch_psd(&w, 8.0 * g.bin_spacing()).unwrap();
            proptest::prop_assert!((s.total_power_dbm() - w.power_dbm()).abs() < 0.2);
        }
    }
}
