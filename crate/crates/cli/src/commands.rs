//! Subcommand bodies. Each returns a process exit code: 0 success,
//! 1 runtime failure, 2 usage or configuration error.

use std::path::{Path, PathBuf};

use despeckle_core::metrics::MetricsReport;
use despeckle_core::solver::{self, StepRecord, StopRule};
use despeckle_core::speckle::{apply_speckle, sample_speckle_field, SpeckleParams};
use despeckle_core::{pgm, ImageGrid};

use crate::bench::{self, report_header};
use crate::config::parse_run_config;
use crate::report::{format_value, metric_cells, METRIC_COLUMNS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

fn fail(code: i32, message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {message}");
    code
}

fn load(path: &Path) -> Result<ImageGrid, String> {
    pgm::load_pgm(path).map_err(|e| e.to_string())
}

/// `speckle`: multiply a clean image with a seeded Gamma noise field.
pub fn cmd_speckle(input: &Path, output: &Path, looks: u32, seed: u64) -> i32 {
    let params = match SpeckleParams::new(looks, seed) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let clean = match load(input) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_RUNTIME, e),
    };
    let result = sample_speckle_field(params, clean.width(), clean.height())
        .and_then(|noise| apply_speckle(&clean, &noise).map(|noisy| (noise, noisy)));
    let (noise, noisy) = match result {
        Ok(pair) => pair,
        Err(e) => return fail(EXIT_RUNTIME, e),
    };
    if let Err(e) = pgm::save_pgm(&noisy, output) {
        return fail(EXIT_RUNTIME, e);
    }
    let ratio = despeckle_core::metrics::RatioImage { grid: noise };
    let (mor, vor) = despeckle_core::metrics::mor_vor(&ratio);
    println!(
        "noise_mor={} noise_vor={} noise_vor_x_looks={}",
        format_value(mor),
        format_value(vor),
        format_value(vor * looks as f64)
    );
    EXIT_OK
}

fn history_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".history.csv");
    output.with_file_name(name)
}

fn write_history(path: &Path, history: &[StepRecord]) -> std::io::Result<()> {
    let mut text = String::from("step,rel_change,psnr,gs_sweeps,max_g\n");
    for record in history {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            record.step,
            format_value(record.rel_change),
            record.psnr.map(format_value).unwrap_or_default(),
            record.gs_sweeps,
            format_value(record.max_g)
        ));
    }
    std::fs::write(path, text)
}

/// `despeckle`: run the configured PDE filter on a noisy image.
pub fn cmd_despeckle(
    input: &Path,
    output: &Path,
    config_path: &Path,
    reference: Option<&Path>,
) -> i32 {
    let config_text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_USAGE, format!("{}: {e}", config_path.display())),
    };
    let run_config = match parse_run_config(&config_text) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    if matches!(run_config.solver.stop, StopRule::BestPsnr { .. }) && reference.is_none() {
        return fail(
            EXIT_USAGE,
            "config error: stop = \"best_psnr\" requires --reference",
        );
    }
    let noisy = match load(input) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_RUNTIME, e),
    };
    let reference_image = match reference.map(load).transpose() {
        Ok(r) => r,
        Err(e) => return fail(EXIT_RUNTIME, e),
    };
    let outcome = solver::run(
        &noisy,
        &run_config.solver,
        &run_config.diffusivity,
        reference_image.as_ref(),
    );
    let (restored, history) = match outcome {
        Ok(pair) => pair,
        Err(e) => return fail(EXIT_RUNTIME, e),
    };
    if let Err(e) = pgm::save_pgm(&restored, output) {
        return fail(EXIT_RUNTIME, e);
    }
    let sidecar = history_path(output);
    if let Err(e) = write_history(&sidecar, &history) {
        return fail(EXIT_RUNTIME, format!("{}: {e}", sidecar.display()));
    }
    println!(
        "steps={} rel_change={} history={}",
        history.len(),
        history
            .last()
            .map(|r| format_value(r.rel_change))
            .unwrap_or_default(),
        sidecar.display()
    );
    EXIT_OK
}

/// `metrics`: score a restored image against clean and noisy companions.
pub fn cmd_metrics(clean: &Path, noisy: &Path, restored: &Path, si_window: usize) -> i32 {
    let images = (|| -> Result<_, String> {
        Ok((load(clean)?, load(noisy)?, load(restored)?))
    })();
    let (clean, noisy, restored) = match images {
        Ok(t) => t,
        Err(e) => return fail(EXIT_RUNTIME, e),
    };
    match MetricsReport::compute(&clean, &noisy, &restored, si_window) {
        Ok(report) => {
            println!("{METRIC_COLUMNS}");
            println!("{}", metric_cells(&report).join(","));
            EXIT_OK
        }
        Err(e) => fail(EXIT_RUNTIME, e),
    }
}

/// `bench`: run a suite (bundled default when no file is given) and write
/// the report CSV.
pub fn cmd_bench(suite_path: Option<&Path>, output: &Path, jobs: Option<usize>) -> i32 {
    let cases = match suite_path {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail(EXIT_USAGE, format!("{}: {e}", path.display())),
            };
            match bench::parse_suite(&text) {
                Ok(c) => c,
                Err(e) => return fail(EXIT_USAGE, e),
            }
        }
        None => bench::default_suite(),
    };
    let jobs = jobs.unwrap_or_else(|| {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    });
    let rows = bench::run_suite(&cases, jobs);

    let mut text = report_header();
    text.push('\n');
    let mut failures = 0usize;
    for row in &rows {
        if row.status != "ok" {
            failures += 1;
        }
        text.push_str(&row.to_csv());
        text.push('\n');
    }
    if let Err(e) = std::fs::write(output, text) {
        return fail(EXIT_RUNTIME, format!("{}: {e}", output.display()));
    }
    println!(
        "cases={} failures={} report={}",
        rows.len(),
        failures,
        output.display()
    );
    if failures > 0 {
        EXIT_RUNTIME
    } else {
        EXIT_OK
    }
}
