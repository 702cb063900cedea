use num_complex::Complex64;

use super::field::OpticalField;
use crate::error::Result;
use crate::signal::{welch_with_load, SampledWaveform, SpectrumEstimate};

pub const DEFAULT_RESPONSIVITY: f64 = 0.8;

/// Square-law detection of total intensity, in A.
pub fn photodetect(field: &OpticalField, responsivity: f64) -> SampledWaveform {
    let samples = field
        .env_x
        .iter()
        .zip(&field.env_y)
        .map(|(x, y)| Complex64::new(responsivity * (x.norm_sqr() + y.norm_sqr()), 0.0))
        .collect();
    SampledWaveform {
        grid: field.grid,
        samples,
    }
}

pub fn balanced_detect(
    plus: &OpticalField,
    minus: &OpticalField,
    responsivity: f64,
) -> Result<SampledWaveform> {
    plus.grid.ensure_same(&minus.grid)?;
    photodetect(plus, responsivity).sub(&photodetect(minus, responsivity))
}

/// Two-sided PSD of the optical envelope summed over both rails, with
/// frequencies as offsets from the carrier and power in W (dBm/Hz).
pub fn optical_psd(field: &OpticalField, rbw: f64) -> Result<SpectrumEstimate> {
    let x = welch_with_load(&field.env_x, &field.grid, rbw, 1.0, false)?;
    let y = welch_with_load(&field.env_y, &field.grid, rbw, 1.0, false)?;
    let psd = (0..x.psd.len())
        .map(|k| 10.0 * (x.psd_linear(k) + y.psd_linear(k)).log10())
        .collect();
    Ok(SpectrumEstimate {
        freqs: x.freqs,
        psd,
        rbw: x.rbw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{
        dp_bpsk_modulate, laser_cw, polarizer, bessel_j, ModulatorParams, Rail, Sideband,
    };
    use crate::signal::{fft, make_tone, TimeGrid, ToneSpec};
    use std::f64::consts::{FRAC_PI_4, PI};

    const FC: f64 = 191.3e12;

    #[test]
    fn cw_gives_dc_current() {
        let g = TimeGrid::new(64e9, 256).unwrap();
        let f = laser_cw(10.0, FC, Rail::Y, &g).unwrap();
        let i = photodetect(&f, 0.8);
        assert!(i.samples.iter().all(|s| (s.re - 0.008).abs() < 1e-15));
    }

    #[test]
    fn balanced_examples() {
        let g = TimeGrid::new(64e9, 256).unwrap();
        let f = laser_cw(10.0, FC, Rail::X, &g).unwrap();
        let z = balanced_detect(&f, &f, 0.8).unwrap();
        assert!(z.samples.iter().all(|s| s.re == 0.0 && s.im == 0.0));
        let dark = OpticalField::dark(g, FC);
        assert_eq!(balanced_detect(&f, &dark, 0.8).unwrap(), photodetect(&f, 0.8));
        assert_eq!(
            balanced_detect(&dark, &f, 0.8).unwrap(),
            photodetect(&f, 0.8).scaled(-1.0)
        );
    }

    /// Beat amplitude at f_IF + f_LO behind a 45-degree polarizer.
    fn upconverted_line(m1: f64, m2: f64) -> (f64, f64) {
        let g = TimeGrid::new(64e9, 8192).unwrap();
        let fi = g.snap_frequency(2.1e9);
        let fl = g.snap_frequency(5e9);
        let pi = ModulatorParams::new(6.0, 0.0, Sideband::Lower);
        let pl = ModulatorParams::new(6.0, 0.0, Sideband::Upper);
        let c = laser_cw(10.0, FC, Rail::X, &g).unwrap();
        let di = make_tone(&ToneSpec::new(m1 * 6.0 / PI, fi, 0.0), &g).unwrap();
        let dl = make_tone(&ToneSpec::new(m2 * 6.0 / PI, fl, 0.0), &g).unwrap();
        let f = dp_bpsk_modulate(&c, &di, &dl, &pi, &pl).unwrap();
        let i = photodetect(&polarizer(&f, FRAC_PI_4), 0.8);
        let s = fft::forward(&i.samples);
        let k = ((fi + fl) / g.bin_spacing()).round() as usize;
        let amp = 2.0 * s[k].norm() / g.n_samples as f64;
        // R * |carrier/sqrt(2)|^2 * J1(m1) J1(m2) for the 45-degree projection.
        let expect = 0.8 * 0.01 / 2.0 * bessel_j(1, m1) * bessel_j(1, m2);
        (amp, expect)
    }

    #[test]
    fn upconverted_line_follows_bessel_product() {
        for &(m1, m2) in &[(0.05, 0.05), (0.1, 0.2), (0.2, 0.2), (0.3, 0.15)] {
            let (amp, expect) = upconverted_line(m1, m2);
            assert!((amp / expect - 1.0).abs() < 0.01, "{m1} {m2}: {amp} vs {expect}");
        }
    }

    #[test]
    fn optical_psd_shows_carrier_and_sideband() {
        let g = TimeGrid::new(64e9, 8192).unwrap();
        let c = laser_cw(10.0, FC, Rail::X, &g).unwrap();
        let p = ModulatorParams::new(6.0, 0.0, Sideband::Lower);
        let fi = g.snap_frequency(2e9);
        let d = make_tone(&ToneSpec::new(0.3 * 6.0 / PI, fi, 0.0), &g).unwrap();
        let f = crate::optics::dd_mzm_ssb(&c, &d, &p).unwrap();
        let s = optical_psd(&f, 4.0 * g.bin_spacing()).unwrap();
        let peak_lower = s.peak_in(-fi - 1e8, -fi + 1e8).unwrap();
        let peak_upper = s.peak_in(fi - 1e8, fi + 1e8).unwrap();
        assert!((s.freqs[peak_lower] + fi).abs() <= s.rbw);
        assert!(s.psd[peak_lower] - s.psd[peak_upper] > 60.0);
        assert!((s.total_power_dbm() - f.power_dbm()).abs() < 0.1);
    }

    fn detected_line_db(dsb: bool, length_km: f64) -> f64 {
        use crate::optics::{dd_mzm_ssb, fiber_propagate, mzm_push_pull, FiberParams};
        let g = TimeGrid::new(64e9, 4096).unwrap();
        let f = g.snap_frequency(12e9);
        let c = laser_cw(10.0, FC, Rail::X, &g).unwrap();
        let d = make_tone(&ToneSpec::new(0.6, f, 0.0), &g).unwrap();
        let p = ModulatorParams::new(6.0, 0.0, Sideband::Lower);
        let m = if dsb {
            mzm_push_pull(&c, &d, &p).unwrap()
        } else {
            dd_mzm_ssb(&c, &d, &p).unwrap()
        };
        let fp = FiberParams {
            attenuation: 0.0,
            ..FiberParams::standard(length_km)
        };
        let i = photodetect(&fiber_propagate(&m, &fp).unwrap(), 0.8);
        let s = fft::forward(&i.samples);
        20.0 * s[(f / g.bin_spacing()).round() as usize].norm().log10()
    }

    #[test]
    fn ssb_is_immune_to_power_fading() {
        let levels: Vec<f64> = (0..=20).map(|k| detected_line_db(false, 2.0 * k as f64)).collect();
        let max = levels.iter().cloned().fold(f64::MIN, f64::max);
        let min = levels.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max - min < 0.5, "ripple {}", max - min);

        let dsb: Vec<f64> = (0..=80).map(|k| detected_line_db(true, 0.5 * k as f64)).collect();
        let max = dsb.iter().cloned().fold(f64::MIN, f64::max);
        let min = dsb.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max - min > 20.0, "dsb fading only {}", max - min);
    }
}
