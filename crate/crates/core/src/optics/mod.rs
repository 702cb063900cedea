//! Optical components: laser, SSB modulators, polarization optics, fiber,
//! attenuator and delay line, photodetectors.

mod detector;
mod fiber;
mod field;
mod modulator;
mod polarization;

pub use detector::{balanced_detect, optical_psd, photodetect, DEFAULT_RESPONSIVITY};
pub use fiber::{attenuate, delay_line, fiber_propagate, FiberParams};
pub use field::{laser_cw, wavelength_to_frequency, OpticalField, Rail, SPEED_OF_LIGHT};
pub use modulator::{
    bessel_j, dd_mzm_ssb, dp_bpsk_modulate, hybrid_coupler_90, mzm_push_pull,
    ssb_smallsignal_coefficients, ModulatorParams, Sideband, SsbCoefficients,
};
pub use polarization::{apply_jones, pbc, pbs, polarizer, JonesRotation};
