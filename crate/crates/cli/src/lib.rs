//! Experiment harness: seeded sweeps over sigmoidal kernels, the
//! support-function rate experiment, and CSV summaries.

pub mod config;
pub mod rate;
pub mod summarize;
pub mod sweep;

/// CSV float format: 17 significant digits, '.' decimal separator.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}
