//! Flat key=value run configuration.
//!
//! A run file is a flat TOML table. Recognized keys:
//!
//! | key       | meaning                                        | default    |
//! |-----------|------------------------------------------------|------------|
//! | model     | `diffusion` or `telegraph`                     | required   |
//! | gamma     | telegraph damping                              | 2.0        |
//! | tau       | time step                                      | 0.25       |
//! | theta1    | implicit flux weight                           | 0.0        |
//! | theta2    | lagged flux weight                             | 0.0        |
//! | epsilon   | diffusivity lower bound                        | 1e-4       |
//! | nu        | gray-level power                               | 0.0        |
//! | K         | gradient scale of the edge stop                | 0.1        |
//! | exponent  | `constant`, `avg_gray`, `gray`, or `grad`      | required   |
//! | p0        | exponent base (the value itself for constant)  | 2.0        |
//! | alpha     | indicator power for avg_gray / gray            | 2.0        |
//! | k         | gradient gain for grad                         | 2.0        |
//! | xi        | pre-smoothing scale                            | 1.0        |
//! | sigma     | smoothing scale of the grad exponent           | xi         |
//! | stop      | `rel_change` or `best_psnr`                    | rel_change |
//! | eps_stop  | relative-change stopping threshold             | 1e-4       |
//! | max_steps | iteration cap                                  | 500        |
//!
//! Unknown keys and mistyped values are rejected with the key named.

use despeckle_core::diffusivity::{DiffusivityConfig, ExponentKind};
use despeckle_core::solver::{ModelKind, SolverConfig, StopRule};

/// Patience of the best-PSNR stopping rule, in non-improving steps.
pub const BEST_PSNR_PATIENCE: usize = 10;

/// A parsed run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub diffusivity: DiffusivityConfig,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type CfgResult<T> = Result<T, ConfigError>;

/// Typed key extraction from a TOML table; every failure names the key.
pub(crate) struct KeyReader {
    table: toml::Table,
    context: String,
}

impl KeyReader {
    pub fn new(table: toml::Table, context: &str) -> Self {
        Self {
            table,
            context: context.to_string(),
        }
    }

    fn fail<T>(&self, key: &str, what: &str) -> CfgResult<T> {
        Err(ConfigError(format!("{}key `{key}`: {what}", self.context)))
    }

    pub fn take_f64(&mut self, key: &str) -> CfgResult<Option<f64>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(toml::Value::Float(v)) => Ok(Some(v)),
            Some(toml::Value::Integer(v)) => Ok(Some(v as f64)),
            Some(other) => self.fail(key, &format!("expected a number, found {other}")),
        }
    }

    pub fn take_usize(&mut self, key: &str) -> CfgResult<Option<usize>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(toml::Value::Integer(v)) if v >= 0 => Ok(Some(v as usize)),
            Some(other) => self.fail(key, &format!("expected a non-negative integer, found {other}")),
        }
    }

    pub fn take_u64(&mut self, key: &str) -> CfgResult<Option<u64>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(toml::Value::Integer(v)) if v >= 0 => Ok(Some(v as u64)),
            Some(other) => self.fail(key, &format!("expected a non-negative integer, found {other}")),
        }
    }

    pub fn take_str(&mut self, key: &str) -> CfgResult<Option<String>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(toml::Value::String(v)) => Ok(Some(v)),
            Some(other) => self.fail(key, &format!("expected a string, found {other}")),
        }
    }

    pub fn take_array(&mut self, key: &str) -> CfgResult<Option<Vec<toml::Value>>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some(toml::Value::Array(v)) => Ok(Some(v)),
            Some(other) => self.fail(key, &format!("expected an array of tables, found {other}")),
        }
    }

    pub fn require_str(&mut self, key: &str) -> CfgResult<String> {
        match self.take_str(key)? {
            Some(v) => Ok(v),
            None => self.fail(key, "missing required key"),
        }
    }

    /// Rejects any key that was never consumed.
    pub fn finish(self) -> CfgResult<()> {
        if let Some(key) = self.table.keys().next() {
            return Err(ConfigError(format!(
                "{}unknown config key `{key}`",
                self.context
            )));
        }
        Ok(())
    }
}

pub(crate) fn run_config_from_reader(reader: &mut KeyReader) -> CfgResult<RunConfig> {
    let model_name = reader.require_str("model")?;
    let gamma = reader.take_f64("gamma")?.unwrap_or(2.0);
    let model = match model_name.as_str() {
        "diffusion" => ModelKind::Diffusion,
        "telegraph" => ModelKind::Telegraph { gamma },
        other => {
            return Err(ConfigError(format!(
                "key `model`: expected `diffusion` or `telegraph`, found `{other}`"
            )))
        }
    };

    let tau = reader.take_f64("tau")?.unwrap_or(0.25);
    let theta1 = reader.take_f64("theta1")?.unwrap_or(0.0);
    let theta2 = reader.take_f64("theta2")?.unwrap_or(0.0);
    let epsilon = reader.take_f64("epsilon")?.unwrap_or(1e-4);
    let nu = reader.take_f64("nu")?.unwrap_or(0.0);
    let grad_scale = reader.take_f64("K")?.unwrap_or(0.1);
    let exponent_name = reader.require_str("exponent")?;
    let p0 = reader.take_f64("p0")?.unwrap_or(2.0);
    let alpha = reader.take_f64("alpha")?.unwrap_or(2.0);
    let gain = reader.take_f64("k")?.unwrap_or(2.0);
    let xi = reader.take_f64("xi")?.unwrap_or(1.0);
    let sigma = reader.take_f64("sigma")?;
    let exponent = match exponent_name.as_str() {
        "constant" => ExponentKind::Constant(p0),
        "avg_gray" => ExponentKind::AvgGray { p0, alpha },
        "gray" => ExponentKind::Gray { p0, alpha },
        "grad" => ExponentKind::Grad { p0, gain, sigma },
        other => {
            return Err(ConfigError(format!(
                "key `exponent`: expected `constant`, `avg_gray`, `gray`, or `grad`, found `{other}`"
            )))
        }
    };

    let stop_name = reader.take_str("stop")?.unwrap_or_else(|| "rel_change".into());
    let eps_stop = reader.take_f64("eps_stop")?.unwrap_or(1e-4);
    let stop = match stop_name.as_str() {
        "rel_change" => StopRule::RelChange { eps_stop },
        "best_psnr" => StopRule::BestPsnr {
            patience: BEST_PSNR_PATIENCE,
        },
        other => {
            return Err(ConfigError(format!(
                "key `stop`: expected `rel_change` or `best_psnr`, found `{other}`"
            )))
        }
    };
    let max_steps = reader.take_usize("max_steps")?.unwrap_or(500);

    let cfg = RunConfig {
        solver: SolverConfig {
            model,
            tau,
            theta1,
            theta2,
            stop,
            max_steps,
            ..Default::default()
        },
        diffusivity: DiffusivityConfig {
            epsilon,
            nu,
            grad_scale,
            exponent,
            xi,
        },
    };
    cfg.solver
        .validate()
        .and_then(|()| cfg.diffusivity.validate())
        .map_err(|e| ConfigError(e.to_string()))?;
    Ok(cfg)
}

/// Parses a flat run-config document.
pub fn parse_run_config(text: &str) -> CfgResult<RunConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| ConfigError(format!("invalid TOML: {e}")))?;
    let mut reader = KeyReader::new(table, "");
    let cfg = run_config_from_reader(&mut reader)?;
    reader.finish()?;
    Ok(cfg)
}
