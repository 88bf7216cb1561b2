//! Reproducible number formatting for reports and file output.

/// Formats a finite `f64` with 17 significant digits in scientific notation.
///
/// 17 digits round-trip every double exactly, so two runs that compute the
/// same bits emit the same bytes.
pub fn fmt_f64(x: f64) -> String {
    debug_assert!(x.is_finite());
    format!("{:.16e}", x)
}
