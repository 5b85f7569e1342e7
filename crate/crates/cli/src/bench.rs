//! Benchmark suites: case definitions, the bundled default grid, parallel
//! execution, and the CSV report.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use despeckle_core::diffusivity::{DiffusivityConfig, ExponentKind};
use despeckle_core::metrics::MetricsReport;
use despeckle_core::solver::{self, ModelKind, SolverConfig, StopRule};
use despeckle_core::speckle::{apply_speckle, sample_speckle_field, SpeckleParams};
use despeckle_core::{pgm, ImageGrid};

use crate::config::{run_config_from_reader, ConfigError, KeyReader, RunConfig, BEST_PSNR_PATIENCE};
use crate::phantom::{make_phantom, PhantomKind};
use crate::report::{metric_cells, format_value, METRIC_COLUMNS};

/// Clean-image source of one case.
#[derive(Debug, Clone, PartialEq)]
pub enum SceneSource {
    Phantom(PhantomKind),
    File(PathBuf),
}

/// One benchmark run: a scene, a noise level and seed, and a full solver
/// configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchCase {
    pub label: String,
    pub scene: SceneSource,
    pub width: usize,
    pub height: usize,
    pub looks: u32,
    pub seed: u64,
    pub run: RunConfig,
}

/// Header of the bench report CSV.
pub fn report_header() -> String {
    format!("label,looks,seed,status,iterations,wall_time_s,{METRIC_COLUMNS}")
}

/// One report row; metric cells stay empty when the case failed.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub label: String,
    pub looks: u32,
    pub seed: u64,
    pub status: String,
    pub iterations: Option<usize>,
    pub wall_time_s: f64,
    pub metrics: Option<MetricsReport>,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        let empty_metrics = || vec![String::new(); 9];
        let cells = self.metrics.as_ref().map(metric_cells).unwrap_or_else(empty_metrics);
        format!(
            "{},{},{},{},{},{},{}",
            self.label,
            self.looks,
            self.seed,
            self.status,
            self.iterations.map(|i| i.to_string()).unwrap_or_default(),
            format_value(self.wall_time_s),
            cells.join(",")
        )
    }
}

/// Parses a suite document: an array of `[[case]]` tables, each holding the
/// case keys (`label`, `phantom` or `file`, `width`, `height`, `looks`,
/// `seed`) plus a complete flat run configuration.
pub fn parse_suite(text: &str) -> Result<Vec<BenchCase>, ConfigError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| ConfigError(format!("invalid TOML: {e}")))?;
    let mut top = KeyReader::new(table, "");
    let cases_value = top
        .take_array("case")?
        .ok_or_else(|| ConfigError("suite must contain at least one [[case]]".into()))?;
    top.finish()?;

    let mut cases = Vec::new();
    let mut labels = std::collections::HashSet::new();
    for (index, value) in cases_value.into_iter().enumerate() {
        let toml::Value::Table(table) = value else {
            return Err(ConfigError(format!("case {index}: expected a table")));
        };
        let context = format!("case {index}: ");
        let mut reader = KeyReader::new(table, &context);
        let label = reader.require_str("label")?;
        if !labels.insert(label.clone()) {
            return Err(ConfigError(format!("duplicate case label `{label}`")));
        }
        let phantom = reader.take_str("phantom")?;
        let file = reader.take_str("file")?;
        let scene = match (phantom, file) {
            (Some(name), None) => SceneSource::Phantom(
                PhantomKind::parse(&name).map_err(|e| ConfigError(format!("{context}{e}")))?,
            ),
            (None, Some(path)) => SceneSource::File(PathBuf::from(path)),
            (Some(_), Some(_)) => {
                return Err(ConfigError(format!(
                    "{context}keys `phantom` and `file` are mutually exclusive"
                )))
            }
            (None, None) => {
                return Err(ConfigError(format!(
                    "{context}one of `phantom` or `file` is required"
                )))
            }
        };
        let width = reader.take_usize("width")?.unwrap_or(128);
        let height = reader.take_usize("height")?.unwrap_or(128);
        let looks = reader.take_u64("looks")?.unwrap_or(1) as u32;
        let seed = reader.take_u64("seed")?.unwrap_or(1);
        let run = run_config_from_reader(&mut reader)?;
        reader.finish()?;
        cases.push(BenchCase {
            label,
            scene,
            width,
            height,
            looks,
            seed,
            run,
        });
    }
    Ok(cases)
}

/// The four methods compared throughout: diffusion and telegraph, each with
/// a constant exponent (DCE, TCE) and with the averaged gray-level exponent
/// (DVE, TVE). Scene-specific parameters live here, not in the solver: the
/// gradient scale follows the per-scene values used for these scenes
/// (0.1 circle, 0.2 mosaic); the circle additionally carries the sharper
/// smoothing/indicator pair (xi 0.35, alpha 8) tuned for its strong
/// two-level contrast.
pub fn method_run_config(method: &str, phantom: PhantomKind) -> RunConfig {
    let model = match method {
        "DCE" | "DVE" => ModelKind::Diffusion,
        _ => ModelKind::Telegraph { gamma: 2.0 },
    };
    let (grad_scale, xi, alpha) = match phantom {
        PhantomKind::Circle => (0.1, 0.35, 8.0),
        _ => (0.2, 1.0, 2.0),
    };
    let exponent = match method {
        "DCE" | "TCE" => ExponentKind::Constant(2.0),
        _ => ExponentKind::AvgGray { p0: 2.2, alpha },
    };
    RunConfig {
        solver: SolverConfig {
            model,
            stop: StopRule::BestPsnr {
                patience: BEST_PSNR_PATIENCE,
            },
            ..Default::default()
        },
        diffusivity: DiffusivityConfig {
            nu: 1.0,
            grad_scale,
            exponent,
            xi,
            ..Default::default()
        },
    }
}

/// Bundled default grid: {circle, mosaic} x L in {1,3,5,10} x
/// {DCE, DVE, TCE, TVE} x seeds {1,2,3} at 128x128.
pub fn default_suite() -> Vec<BenchCase> {
    let mut cases = Vec::new();
    for (phantom, name) in [
        (PhantomKind::Circle, "circle"),
        (PhantomKind::Mosaic, "mosaic"),
    ] {
        for looks in [1u32, 3, 5, 10] {
            for method in ["DCE", "DVE", "TCE", "TVE"] {
                for seed in 1u64..=3 {
                    cases.push(BenchCase {
                        label: format!("{method}-{name}-L{looks}-s{seed}"),
                        scene: SceneSource::Phantom(phantom),
                        width: 128,
                        height: 128,
                        looks,
                        seed,
                        run: method_run_config(method, phantom),
                    });
                }
            }
        }
    }
    cases
}

fn load_scene(case: &BenchCase) -> despeckle_core::Result<ImageGrid> {
    match &case.scene {
        SceneSource::Phantom(kind) => make_phantom(*kind, case.width, case.height),
        SceneSource::File(path) => pgm::load_pgm(path),
    }
}

/// Runs one case start to finish. The row is always produced; failures fill
/// the status column instead of aborting the suite.
pub fn run_case(case: &BenchCase) -> BenchRow {
    let start = Instant::now();
    let outcome = (|| -> despeckle_core::Result<(usize, MetricsReport)> {
        let clean = load_scene(case)?;
        let noise = sample_speckle_field(
            SpeckleParams::new(case.looks, case.seed)?,
            clean.width(),
            clean.height(),
        )?;
        let noisy = apply_speckle(&clean, &noise)?;
        let (restored, history) =
            solver::run(&noisy, &case.run.solver, &case.run.diffusivity, Some(&clean))?;
        let report = MetricsReport::compute(&clean, &noisy, &restored, 3)?;
        Ok((history.len(), report))
    })();
    let wall_time_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok((iterations, metrics)) => BenchRow {
            label: case.label.clone(),
            looks: case.looks,
            seed: case.seed,
            status: "ok".into(),
            iterations: Some(iterations),
            wall_time_s,
            metrics: Some(metrics),
        },
        Err(e) => BenchRow {
            label: case.label.clone(),
            looks: case.looks,
            seed: case.seed,
            status: format!("error: {e}").replace(',', ";"),
            iterations: None,
            wall_time_s,
            metrics: None,
        },
    }
}

/// Runs all cases on a bounded worker pool; report order follows suite order
/// regardless of completion order.
pub fn run_suite(cases: &[BenchCase], jobs: usize) -> Vec<BenchRow> {
    let jobs = jobs.max(1).min(cases.len().max(1));
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; cases.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= cases.len() {
                    break;
                }
                let row = run_case(&cases[index]);
                rows.lock().expect("no poisoned workers")[index] = Some(row);
            });
        }
    });
    rows.into_inner()
        .expect("workers joined")
        .into_iter()
        .map(|r| r.expect("every case produced a row"))
        .collect()
}
