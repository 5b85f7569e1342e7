//! Stable CSV formatting shared by the metrics and bench commands.

use despeckle_core::metrics::MetricsReport;

/// Column order of one metrics block.
pub const METRIC_COLUMNS: &str = "psnr,mssim,mor,vor,dg,enl,enl_star,si,fom";

/// Formats a value with 6 significant digits, stable across runs.
/// Infinities print as `inf` / `-inf`; unavailable values print empty.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v.abs() < 1e-300 {
        return "0".into(); // subnormal range would overflow the scale factor
    }
    let magnitude = v.abs().log10().floor();
    let factor = 10f64.powf(5.0 - magnitude);
    let rounded = (v * factor).round() / factor;
    format!("{rounded}")
}

pub fn format_opt(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

/// One CSV cell per metric, in [`METRIC_COLUMNS`] order.
pub fn metric_cells(report: &MetricsReport) -> Vec<String> {
    vec![
        format_value(report.psnr),
        format_opt(report.mssim),
        format_value(report.mor),
        format_value(report.vor),
        format_value(report.dg),
        format_value(report.enl),
        format_value(report.enl_star),
        format_value(report.si),
        format_opt(report.fom),
    ]
}
