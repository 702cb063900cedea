use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft;
use super::waveform::SampledWaveform;
use crate::error::{Error, Result};

/// Relative width of the raised-cosine skirt outside each passband edge.
pub const SKIRT_FRACTION: f64 = 0.05;

/// Zero-phase filter shapes, defined by their passband edges in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FilterKind {
    Lowpass { edge: f64 },
    Bandpass { low: f64, high: f64 },
}

impl FilterKind {
    fn validate(&self, nyquist: f64) -> Result<()> {
        let edges: &[f64] = match self {
            FilterKind::Lowpass { edge } => &[*edge][..],
            FilterKind::Bandpass { low, high } => {
                if !(low < high) {
                    return Err(Error::FilterSpec(format!(
                        "band edges out of order: {low} >= {high}"
                    )));
                }
                &[*low, *high][..]
            }
        };
        for &e in edges {
            if !(e > 0.0 && e < nyquist) {
                return Err(Error::FilterSpec(format!(
                    "edge {e} Hz must lie in (0, {nyquist}) Hz"
                )));
            }
        }
        Ok(())
    }

    /// Amplitude response at `|f|`: unity across the passband, raised-cosine
    /// skirts of width `SKIRT_FRACTION * edge` outside it, zero beyond.
    pub fn gain(&self, f: f64) -> f64 {
        let f = f.abs();
        let falling = |edge: f64| {
            let w = SKIRT_FRACTION * edge;
            if f <= edge {
                1.0
            } else if f >= edge + w {
                0.0
            } else {
                0.5 * (1.0 + (PI * (f - edge) / w).cos())
            }
        };
        match *self {
            FilterKind::Lowpass { edge } => falling(edge),
            FilterKind::Bandpass { low, high } => {
                let w = SKIRT_FRACTION * low;
                let rising = if f >= low {
                    1.0
                } else if f <= low - w {
                    0.0
                } else {
                    0.5 * (1.0 + (PI * (low - f) / w).cos())
                };
                rising * falling(high)
            }
        }
    }
}

pub fn filter_band(w: &SampledWaveform, kind: FilterKind) -> Result<SampledWaveform> {
    kind.validate(w.grid.nyquist())?;
    let real = w.is_real();
    let mut out = fft::apply_response(&w.samples, w.grid.sample_rate, |f| {
        Complex64::new(kind.gain(f), 0.0)
    });
    if real {
        out.iter_mut().for_each(|s| s.im = 0.0);
    }
    SampledWaveform::new(w.grid, out)
}
