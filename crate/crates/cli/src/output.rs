//! Comma-separated result files with a `#`-prefixed preamble.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rofsim_core::signal::SpectrumEstimate;
use rofsim_core::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Columns shared by every row.
pub const ROW_PREFIX: &str = "scenario,seed,version";

pub const METRICS_COLUMNS: &str = "mode,alpha,tau2_ns,rf_phase_comp_rad,depth_db,si_without_dbm,\
residual_si_dbm,soi_power_dbm,si_in_soi_band_without_dbm,si_in_soi_band_with_dbm,\
soi_band_with_sic_dbm,evm_percent";

pub const TUNE_COLUMNS: &str = "seed_alpha,seed_tau2_ns,refined_alpha,refined_tau2_ns,\
rf_phase_comp_rad,depth_seed_db,depth_refined_db,iterations";

pub const SPECTRUM_COLUMNS: &str = "tap,frequency_hz,psd_dbm_per_hz";

/// A table under construction. Rows are kept in insertion order.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(kind: &str, units: &str, columns: &str) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# rofsim {VERSION} {kind}");
        let _ = writeln!(text, "# units: {units}");
        let _ = writeln!(text, "{ROW_PREFIX},{columns}");
        Self { text }
    }

    pub fn push(&mut self, row: &str) {
        self.text.push_str(row);
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf, Error> {
        let io = |path: &Path, e: std::io::Error| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let path = dir.join(name);
        std::fs::write(&path, &self.text).map_err(|e| io(&path, e))?;
        Ok(path)
    }
}

pub fn prefix(scenario: &str, seed: u64) -> String {
    format!("{scenario},{seed},{VERSION}")
}

/// Fixed-precision number; empty for absent values, `-inf`/`inf`/`nan` spelled out.
pub fn num(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(x) if x.is_finite() => format!("{x:.6}"),
        Some(x) if x.is_nan() => "nan".into(),
        Some(x) if x > 0.0 => "inf".into(),
        Some(_) => "-inf".into(),
    }
}

/// Small quantities such as attenuation ratios need more digits.
pub fn sci(v: f64) -> String {
    format!("{v:.9e}")
}

pub fn spectrum_rows(table: &mut Table, head: &str, tap: &str, s: &SpectrumEstimate) {
    for (f, p) in s.freqs.iter().zip(&s.psd) {
        table.push(&format!("{head},{tap},{f:.1},{p:.4}"));
    }
}
