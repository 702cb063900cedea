use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{OpticalField, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::signal::fft;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberParams {
    /// km.
    pub length: f64,
    /// ps/(nm km).
    pub dispersion: f64,
    /// dB/km.
    pub attenuation: f64,
    /// nm.
    pub reference_wavelength: f64,
}

impl FiberParams {
    /// Standard single-mode fiber at 1567 nm.
    pub fn standard(length: f64) -> Self {
        Self {
            length,
            dispersion: 17.0,
            attenuation: 0.2,
            reference_wavelength: 1567.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length >= 0.0 && self.length.is_finite()) {
            return Err(Error::validation("length", "must be non-negative"));
        }
        if !self.dispersion.is_finite() {
            return Err(Error::validation("dispersion", "must be finite"));
        }
        if !(self.attenuation >= 0.0 && self.attenuation.is_finite()) {
            return Err(Error::validation("attenuation", "must be non-negative"));
        }
        if !(self.reference_wavelength > 0.0 && self.reference_wavelength.is_finite()) {
            return Err(Error::validation("reference_wavelength", "must be positive"));
        }
        Ok(())
    }

    /// Group-velocity dispersion in s^2/m.
    pub fn beta2(&self) -> f64 {
        let lambda = self.reference_wavelength * 1e-9;
        let d = self.dispersion * 1e-6; // s/m^2
        -d * lambda * lambda / (TAU * SPEED_OF_LIGHT)
    }

    /// Spectral phase at an offset `df` Hz from the carrier.
    pub fn phase_at(&self, df: f64) -> f64 {
        let w = TAU * df;
        self.beta2() * self.length * 1e3 / 2.0 * w * w
    }

    pub fn field_transmission(&self) -> f64 {
        10f64.powf(-self.attenuation * self.length / 20.0)
    }
}

/// Loss plus quadratic spectral phase; the common group delay is dropped.
pub fn fiber_propagate(field: &OpticalField, fp: &FiberParams) -> Result<OpticalField> {
    fp.validate()?;
    let t = fp.field_transmission();
    let fs = field.grid.sample_rate;
    Ok(field.map_rails(|env| {
        fft::apply_response(env, fs, |f| Complex64::from_polar(t, fp.phase_at(f)))
    }))
}

/// Optical attenuator with power ratio `alpha`.
pub fn attenuate(field: &OpticalField, alpha: f64) -> Result<OpticalField> {
    if alpha > 1.0 {
        return Err(Error::GainNotAllowed(alpha));
    }
    if !(alpha >= 0.0) {
        return Err(Error::validation("alpha", "must lie in [0, 1]"));
    }
    Ok(field.scaled(alpha.sqrt()))
}

/// True optical delay: the envelope is delayed and the carrier phase
/// advances by `-omega_c * tau`.
pub fn delay_line(field: &OpticalField, tau: f64) -> Result<OpticalField> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::DelayRange {
            delay: tau,
            max: f64::INFINITY,
        });
    }
    let carrier_cycles = (field.carrier_frequency * tau).fract();
    let fs = field.grid.sample_rate;
    Ok(field.map_rails(|env| {
        fft::apply_response(env, fs, |f| {
            Complex64::from_polar(1.0, -TAU * (carrier_cycles + (f * tau).fract()))
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{laser_cw, Rail};
    use crate::signal::TimeGrid;

    const FC: f64 = 191.3e12;

    fn grid() -> TimeGrid {
        TimeGrid::new(64e9, 1024).unwrap()
    }

    fn noisy_field(g: &TimeGrid) -> OpticalField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut env = || -> Vec<Complex64> {
            (0..g.n_samples)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        };
        let (x, y) = (env(), env());
        OpticalField::new(*g, FC, x, y).unwrap()
    }

    fn lossless(length: f64) -> FiberParams {
        FiberParams {
            attenuation: 0.0,
            ..FiberParams::standard(length)
        }
    }

    #[test]
    fn beta2_at_1567_nm() {
        let b2_ps2_per_km = FiberParams::standard(1.0).beta2() * 1e24 * 1e3;
        assert!((b2_ps2_per_km + 22.15).abs() < 0.02, "{b2_ps2_per_km}");
    }

    #[test]
    fn zero_length_is_identity() {
        let f = noisy_field(&grid());
        let out = fiber_propagate(&f, &FiberParams::standard(0.0)).unwrap();
        for (a, b) in out.env_x.iter().zip(&f.env_x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn sideband_phase_after_4_1_km() {
        let fp = FiberParams::standard(4.1);
        let g = grid();
        let df = g.bin_spacing();
        let k = (8e9 / df).round() as usize;
        let f8 = k as f64 * df;
        let env: Vec<Complex64> = (0..g.n_samples)
            .map(|i| Complex64::new(1.0, 0.0) + Complex64::from_polar(0.1, TAU * f8 * g.time(i)))
            .collect();
        let f = OpticalField::single_rail(g, FC, Rail::X, env).unwrap();
        let out = fiber_propagate(&f, &fp).unwrap();
        let s = fft::forward(&out.env_x);
        let rel = (s[k] / s[0]).arg();
        assert!((rel - fp.phase_at(f8)).abs() < 1e-9);
        assert!((rel + 0.115).abs() < 0.002, "{rel}");
    }

    #[test]
    fn composition_adds_lengths() {
        let f = noisy_field(&grid());
        let a = FiberParams::standard(3.0);
        let b = FiberParams::standard(9.5);
        let two = fiber_propagate(&fiber_propagate(&f, &a).unwrap(), &b).unwrap();
        let one = fiber_propagate(&f, &FiberParams::standard(12.5)).unwrap();
        for (p, q) in two.env_x.iter().zip(&one.env_x).chain(two.env_y.iter().zip(&one.env_y)) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn lossless_fiber_conserves_power() {
        let f = noisy_field(&grid());
        let out = fiber_propagate(&f, &lossless(40.0)).unwrap();
        assert!((out.power() - f.power()).abs() < 1e-12 * f.power());
        let lossy = fiber_propagate(&f, &FiberParams::standard(10.0)).unwrap();
        assert!((10.0 * (lossy.power() / f.power()).log10() + 2.0).abs() < 1e-9);
    }

    #[test]
    fn attenuator_examples() {
        let g = grid();
        let f = laser_cw(0.0, FC, Rail::X, &g).unwrap();
        assert_eq!(attenuate(&f, 1.0).unwrap(), f);
        let q = attenuate(&f, 0.25).unwrap();
        assert!((q.power_dbm() + 6.0206).abs() < 1e-4);
        assert_eq!(attenuate(&f, 1.5), Err(Error::GainNotAllowed(1.5)));
        assert!(attenuate(&f, -0.1).is_err());
    }

    #[test]
    fn zero_delay_is_identity() {
        let f = noisy_field(&grid());
        let out = delay_line(&f, 0.0).unwrap();
        for (a, b) in out.env_x.iter().zip(&f.env_x) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(delay_line(&f, -1e-12).is_err());
    }

    #[test]
    fn one_carrier_period_is_nearly_invisible() {
        let g = grid();
        let env: Vec<Complex64> = (0..g.n_samples)
            .map(|i| Complex64::from_polar(1.0, TAU * g.snap_frequency(5e9) * g.time(i)))
            .collect();
        let f = OpticalField::single_rail(g, FC, Rail::X, env).unwrap();
        let out = delay_line(&f, 1.0 / FC).unwrap();
        // Residual is the 5 GHz envelope moving by 5.2 fs.
        let worst = out
            .env_x
            .iter()
            .zip(&f.env_x)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < TAU * 5e9 / FC * 1.01, "{worst}");
    }

    #[test]
    fn delay_rotates_carrier_phase() {
        let g = grid();
        let f = laser_cw(0.0, FC, Rail::X, &g).unwrap();
        let tau = 0.25 / FC;
        let out = delay_line(&f, tau).unwrap();
        assert!((out.env_x[0].arg() + std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    }
}
