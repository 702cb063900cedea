use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reference impedance for every voltage-to-power conversion.
pub const REFERENCE_OHMS: f64 = 50.0;

/// Uniform sampling grid shared by every waveform in one expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub sample_rate: f64,
    pub n_samples: usize,
    pub t0: f64,
}

impl TimeGrid {
    /// 64 GS/s with 2^20 samples (about 16.4 us).
    pub const DEFAULT_SAMPLE_RATE: f64 = 64e9;
    pub const DEFAULT_SAMPLES: usize = 1 << 20;

    pub fn new(sample_rate: f64, n_samples: usize) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::validation("sample_rate", "must be positive and finite"));
        }
        if n_samples < 2 {
            return Err(Error::validation("n_samples", "must be at least 2"));
        }
        Ok(Self {
            sample_rate,
            n_samples,
            t0: 0.0,
        })
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate / 2.0
    }

    pub fn duration(&self) -> f64 {
        self.n_samples as f64 / self.sample_rate
    }

    /// Spacing of the full-record DFT bins.
    pub fn bin_spacing(&self) -> f64 {
        self.sample_rate / self.n_samples as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 / self.sample_rate
    }

    /// Signed frequency of DFT bin `k` in FFT order.
    pub fn bin_frequency(&self, k: usize) -> f64 {
        let n = self.n_samples;
        let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        signed * self.bin_spacing()
    }

    /// Rounds a frequency to the nearest DFT bin so that tones complete an
    /// integer number of cycles over the record.
    pub fn snap_frequency(&self, f: f64) -> f64 {
        (f / self.bin_spacing()).round() * self.bin_spacing()
    }

    pub fn ensure_same(&self, other: &TimeGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Grid(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Electrical samples on a [`TimeGrid`]. Real signals carry a zero imaginary
/// part. Values are volts unless the producer documents otherwise
/// (photodetectors emit amperes).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    pub grid: TimeGrid,
    pub samples: Vec<Complex64>,
}

impl SampledWaveform {
    pub fn new(grid: TimeGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.n_samples {
            return Err(Error::Grid(format!(
                "{} samples on a grid of {}",
                samples.len(),
                grid.n_samples
            )));
        }
        if samples.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::Simulation("non-finite sample in waveform".into()));
        }
        Ok(Self { grid, samples })
    }

    pub fn from_real(grid: TimeGrid, values: impl IntoIterator<Item = f64>) -> Result<Self> {
        Self::new(grid, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.n_samples],
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|s| s.im == 0.0)
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.re).collect()
    }

    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Mean power in dBm across [`REFERENCE_OHMS`].
    pub fn power_dbm(&self) -> f64 {
        watts_to_dbm(self.mean_square() / REFERENCE_OHMS)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s * factor).collect(),
        }
    }

    pub fn add(&self, other: &SampledWaveform) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &SampledWaveform) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    pub fn peak_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Peak amplitude of a sinusoid carrying the same mean power.
    pub fn equivalent_amplitude(&self) -> f64 {
        (2.0 * self.mean_square()).sqrt()
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

/// Peak voltage of a sinusoid delivering `dbm` into [`REFERENCE_OHMS`].
pub fn dbm_to_peak_volts(dbm: f64) -> f64 {
    (2.0 * REFERENCE_OHMS * dbm_to_watts(dbm)).sqrt()
}

pub fn peak_volts_to_dbm(v: f64) -> f64 {
    watts_to_dbm(v * v / (2.0 * REFERENCE_OHMS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_values() {
        assert!(TimeGrid::new(0.0, 16).is_err());
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::new(f64::NAN, 16).is_err());
    }

    #[test]
    fn bin_frequencies_wrap_negative() {
        let g = TimeGrid::new(8.0, 8).unwrap();
        let f: Vec<f64> = (0..8).map(|k| g.bin_frequency(k)).collect();
        assert_eq!(f, vec![0.0, 1.0, 2.0, 3.0, 4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn snapping_lands_on_bins() {
        let g = TimeGrid::new(TimeGrid::DEFAULT_SAMPLE_RATE, TimeGrid::DEFAULT_SAMPLES).unwrap();
        assert_eq!(g.snap_frequency(2e9), 2e9);
        let f = g.snap_frequency(2.1e9);
        assert!((f - 2.1e9).abs() <= g.bin_spacing() / 2.0);
        assert_eq!((f / g.bin_spacing()).fract(), 0.0);
    }

    #[test]
    fn dbm_conversions() {
        assert!((dbm_to_peak_volts(0.0) - 0.316_227_766).abs() < 1e-9);
        assert!((peak_volts_to_dbm(dbm_to_peak_volts(-22.0)) + 22.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_samples_rejected() {
        let g = TimeGrid::new(1.0, 2).unwrap();
        assert!(SampledWaveform::from_real(g, [0.0, f64::INFINITY]).is_err());
        assert!(SampledWaveform::from_real(g, [0.0]).is_err());
    }
}
