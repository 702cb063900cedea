//! Simulator for photonic self-interference cancellation in an in-band
//! full-duplex radio-over-fiber link.
//!
//! * [`signal`]: waveforms, generators, filters, spectra and metrics.
//! * [`optics`]: laser, modulators, polarization optics, fiber, detectors.
//! * [`link`]: the central-office / remote-unit topology end to end.
//! * [`tuner`]: attenuation and delay settings for the canceller.
//! * [`scenario`]: scenario files.

pub mod error;
pub mod link;
pub mod optics;
pub mod scenario;
pub mod signal;
pub mod tuner;

pub use error::{Error, Result};
