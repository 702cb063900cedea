//! Time-grid waveforms, generators, filters, spectral estimation and the
//! scalar metrics shared by every experiment.

pub mod fft;
mod filter;
mod qam;
mod spectrum;
mod tone;
mod waveform;

pub use filter::{filter_band, FilterKind, SKIRT_FRACTION};
pub use qam::{demodulate_evm, make_qam, qam_symbols, rrc_response, QamSignalSpec, MIN_SYMBOLS};
pub use spectrum::{
    analysis_rbw, band_power, cancellation_depth, cancellation_depth_at, occupied_band,
    welch_psd, SpectrumEstimate,
};
pub(crate) use spectrum::welch_with_load;
pub use tone::{make_tone, ToneSpec};
pub use waveform::{
    dbm_to_peak_volts, dbm_to_watts, peak_volts_to_dbm, watts_to_dbm, SampledWaveform, TimeGrid,
    REFERENCE_OHMS,
};

use num_complex::Complex64;
use std::f64::consts::TAU;

/// Circular delay by `tau` seconds applied as a linear spectral phase.
pub fn delay_waveform(w: &SampledWaveform, tau: f64) -> SampledWaveform {
    let real = w.is_real();
    let mut out = fft::apply_response(&w.samples, w.grid.sample_rate, |f| {
        Complex64::from_polar(1.0, -TAU * (f * tau).fract())
    });
    if real {
        out.iter_mut().for_each(|s| s.im = 0.0);
    }
    SampledWaveform {
        grid: w.grid,
        samples: out,
    }
}

/// Constant phase rotation of every spectral component (an ideal wideband
/// phase shifter): positive frequencies by `phase`, negative by `-phase`.
pub fn phase_shift_waveform(w: &SampledWaveform, phase: f64) -> SampledWaveform {
    let real = w.is_real();
    let mut out = fft::apply_response(&w.samples, w.grid.sample_rate, |f| {
        if f > 0.0 {
            Complex64::from_polar(1.0, phase)
        } else if f < 0.0 {
            Complex64::from_polar(1.0, -phase)
        } else {
            Complex64::new(phase.cos(), 0.0)
        }
    });
    if real {
        out.iter_mut().for_each(|s| s.im = 0.0);
    }
    SampledWaveform {
        grid: w.grid,
        samples: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_of_on_bin_tone_matches_analytic_shift() {
        let g = TimeGrid::new(64e9, 4096).unwrap();
        let f = g.snap_frequency(7e9);
        let w = make_tone(&ToneSpec::new(1.0, f, 0.0), &g).unwrap();
        let d = delay_waveform(&w, 0.37e-9);
        let expect = make_tone(&ToneSpec::new(1.0, f, -TAU * f * 0.37e-9), &g).unwrap();
        for (a, b) in d.samples.iter().zip(&expect.samples) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn phase_shift_rotates_cosine_into_sine() {
        let g = TimeGrid::new(64e9, 4096).unwrap();
        let w = make_tone(&ToneSpec::new(1.0, 2e9, 0.0), &g).unwrap();
        let p = phase_shift_waveform(&w, -std::f64::consts::FRAC_PI_2);
        let expect = make_tone(&ToneSpec::new(1.0, 2e9, -std::f64::consts::FRAC_PI_2), &g).unwrap();
        for (a, b) in p.samples.iter().zip(&expect.samples) {
            assert!((a - b).norm() < 1e-9);
        }
    }
}
