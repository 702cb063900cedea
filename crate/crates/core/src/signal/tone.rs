use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::waveform::{SampledWaveform, TimeGrid};
use crate::error::{Error, Result};

/// A sinusoid `amplitude * cos(2*pi*frequency*t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneSpec {
    /// Peak amplitude in volts.
    pub amplitude: f64,
    /// Hz.
    pub frequency: f64,
    /// Radians.
    pub phase: f64,
}

impl ToneSpec {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase,
        }
    }
}

pub fn make_tone(spec: &ToneSpec, grid: &TimeGrid) -> Result<SampledWaveform> {
    if !(spec.amplitude >= 0.0 && spec.amplitude.is_finite()) {
        return Err(Error::validation("amplitude", "must be finite and non-negative"));
    }
    if !(spec.frequency >= 0.0) {
        return Err(Error::validation("frequency", "must be non-negative"));
    }
    if spec.frequency >= grid.nyquist() {
        return Err(Error::Alias {
            frequency: spec.frequency,
            nyquist: grid.nyquist(),
        });
    }
    // Phase is accumulated as cycles and reduced before scaling by 2*pi so long
    // records keep full precision.
    let cycles_per_sample = spec.frequency / grid.sample_rate;
    let start = spec.frequency * grid.t0;
    let samples = (0..grid.n_samples).map(|k| {
        let cycles = (start + cycles_per_sample * k as f64).fract();
        spec.amplitude * (TAU * cycles + spec.phase).cos()
    });
    SampledWaveform::from_real(*grid, samples)
}
