//! Time stepping for the diffusion and telegraph-diffusion models.
//!
//! Both models share the arithmetic-mean flux stencil
//!
//! ```text
//! [div(g grad I)]_ij = 0.5/h^2 [ (g_ij+g_i+1,j) I_i+1,j + (g_ij+g_i-1,j) I_i-1,j
//!                              - (g_i+1,j+2g_ij+g_i-1,j) I_ij ]
//!                    + 0.5/h^2 [ same in j ]
//! ```
//!
//! evaluated with replicated ghost cells for both `I` and `g`. The telegraph
//! model advances with a weighted two-step scheme
//!
//! ```text
//! (1+0.5*gamma*tau) I^{n+1} - tau^2 theta1 [div(g grad I)]^{n+1}
//!   = 2 I^n + tau^2 (1-theta1-theta2) [div(g grad I)]^n
//!   + tau^2 theta2 [div(g grad I)]^{n-1} + (0.5*gamma*tau - 1) I^{n-1}
//! ```
//!
//! with `g` frozen at level `n` in all three flux terms, so the implicit
//! solve stays linear and is handled by Gauss-Seidel sweeps.

use crate::diffusivity::{diffusivity_field, DiffusivityConfig};
use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::metrics::psnr;

/// PDE selected for the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// First-order-in-time diffusion, explicit Euler.
    Diffusion,
    /// Damped second-order-in-time model with damping `gamma`.
    Telegraph { gamma: f64 },
}

/// Iteration stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Track PSNR against a reference and stop after `patience` consecutive
    /// non-improving steps, returning the best iterate seen.
    BestPsnr { patience: usize },
    /// Stop once `||I^{k+1} - I^k||^2 / ||I^k||^2 <= eps_stop`.
    RelChange { eps_stop: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub model: ModelKind,
    /// Time step.
    pub tau: f64,
    /// Weight of the implicit flux term.
    pub theta1: f64,
    /// Weight of the lagged flux term.
    pub theta2: f64,
    /// Gauss-Seidel max-residual tolerance.
    pub gs_tol: f64,
    /// Gauss-Seidel sweep cap.
    pub gs_max_sweeps: usize,
    pub stop: StopRule,
    pub max_steps: usize,
    /// Reject steps whose `tau` exceeds the admissible CFL bound.
    pub cfl_enforce: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Telegraph { gamma: 2.0 },
            tau: 0.25,
            theta1: 0.0,
            theta2: 0.0,
            gs_tol: 1e-6,
            gs_max_sweeps: 100,
            stop: StopRule::RelChange { eps_stop: 1e-4 },
            max_steps: 500,
            cfl_enforce: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.theta1 < 0.0 || self.theta2 < 0.0 || self.theta1 + self.theta2 > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "weights must satisfy theta1, theta2 >= 0 and theta1 + theta2 <= 1, got {} and {}",
                self.theta1, self.theta2
            )));
        }
        if let ModelKind::Telegraph { gamma } = self.model {
            if !(gamma.is_finite() && gamma > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "gamma must be positive, got {gamma}"
                )));
            }
        }
        if !(self.gs_tol.is_finite() && self.gs_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gs_tol must be positive, got {}",
                self.gs_tol
            )));
        }
        if self.gs_max_sweeps == 0 {
            return Err(Error::InvalidParameter(
                "gs_max_sweeps must be at least 1".into(),
            ));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter(
                "max_steps must be at least 1".into(),
            ));
        }
        if let StopRule::RelChange { eps_stop } = self.stop {
            if !(eps_stop.is_finite() && eps_stop > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "eps_stop must be positive, got {eps_stop}"
                )));
            }
        }
        Ok(())
    }
}

/// One history entry per completed time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// `||I^{n+1} - I^n||^2 / ||I^n||^2`.
    pub rel_change: f64,
    /// PSNR of the new iterate against the run's reference, when given.
    pub psnr: Option<f64>,
    /// Gauss-Seidel sweeps used (0 for explicit updates).
    pub gs_sweeps: usize,
    /// Maximum diffusion coefficient of the step.
    pub max_g: f64,
}

/// Two consecutive time levels plus the step log.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub prev: ImageGrid,
    pub curr: ImageGrid,
    pub step: usize,
    pub history: Vec<StepRecord>,
}

impl SolverState {
    /// Initializes both levels to the initial data (`I^1 = I^0`).
    pub fn new(initial: ImageGrid) -> Self {
        Self {
            prev: initial.clone(),
            curr: initial,
            step: 0,
            history: Vec::new(),
        }
    }
}

/// Arithmetic-mean flux stencil with replicated boundary on `I` and `g`.
pub fn flux_divergence(image: &ImageGrid, g: &ImageGrid) -> Result<ImageGrid> {
    image.check_dims(g)?;
    let (w, h) = (image.width(), image.height());
    let half_inv_h2 = 0.5 / (image.h() * image.h());
    let iv = image.ghost();
    let gv = g.ghost();
    // The stencil is evaluated in its factored edge-flux form
    //   (g_c + g_n)(I_n - I_c)
    // which is algebraically identical to the expanded right-hand side and
    // makes constant images map to exactly zero while interior edge fluxes
    // cancel pairwise in floating point.
    let mut out = vec![0.0f64; w * h];
    for j in 0..h {
        for i in 0..w {
            let (is, js) = (i as isize, j as isize);
            let g_c = gv.get(is, js);
            let i_c = iv.get(is, js);
            let mut acc = 0.0;
            for (ni, nj) in [(is + 1, js), (is - 1, js), (is, js + 1), (is, js - 1)] {
                acc += (g_c + gv.get(ni, nj)) * (iv.get(ni, nj) - i_c);
            }
            out[j * w + i] = half_inv_h2 * acc;
        }
    }
    let grid = ImageGrid::new(w, h, out)?;
    grid.with_h(image.h())
}

/// Largest stable time step `h / sqrt(g_max)`.
pub fn cfl_max_tau(g_max: f64, h: f64) -> Result<f64> {
    if !(g_max.is_finite() && g_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "maximum diffusivity must be positive, got {g_max}"
        )));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spatial step must be positive, got {h}"
        )));
    }
    Ok(h / g_max.sqrt())
}

fn check_cfl(cfg: &SolverConfig, g_max: f64, h: f64) -> Result<()> {
    if cfg.cfl_enforce {
        let tau_max = cfl_max_tau(g_max, h)?;
        if cfg.tau > tau_max {
            return Err(Error::CflViolation {
                tau: cfg.tau,
                tau_max,
            });
        }
    }
    Ok(())
}

fn squared_norm(data: &[f64]) -> f64 {
    data.iter().map(|v| v * v).sum()
}

fn relative_change(next: &ImageGrid, curr: &ImageGrid) -> f64 {
    let diff: f64 = next
        .data()
        .iter()
        .zip(curr.data())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    diff / squared_norm(curr.data()).max(f64::MIN_POSITIVE)
}

/// Explicit forward-Euler diffusion update with a supplied coefficient.
pub fn diffusion_update(curr: &ImageGrid, g: &ImageGrid, tau: f64) -> Result<ImageGrid> {
    let div = flux_divergence(curr, g)?;
    let data = curr
        .data()
        .iter()
        .zip(div.data())
        .map(|(&v, &d)| v + tau * d)
        .collect();
    ImageGrid::new(curr.width(), curr.height(), data)?.with_h(curr.h())
}

/// One weighted-theta telegraph update with a supplied coefficient, frozen
/// for all three flux terms. Returns the new level and the Gauss-Seidel
/// sweep count (0 when `theta1 = 0`).
pub fn telegraph_update(
    prev: &ImageGrid,
    curr: &ImageGrid,
    g: &ImageGrid,
    cfg: &SolverConfig,
) -> Result<(ImageGrid, usize)> {
    let gamma = match cfg.model {
        ModelKind::Telegraph { gamma } => gamma,
        ModelKind::Diffusion => {
            return Err(Error::InvalidParameter(
                "telegraph update requires a telegraph model config".into(),
            ))
        }
    };
    curr.check_dims(prev)?;
    curr.check_dims(g)?;
    let tau = cfg.tau;
    let tau2 = tau * tau;
    let c_new = 1.0 + 0.5 * gamma * tau;
    let c_old = 0.5 * gamma * tau - 1.0;

    let flux_curr = flux_divergence(curr, g)?;
    let flux_prev = if cfg.theta2 > 0.0 {
        Some(flux_divergence(prev, g)?)
    } else {
        None
    };

    let w_curr = tau2 * (1.0 - cfg.theta1 - cfg.theta2);
    let mut rhs = vec![0.0f64; curr.len()];
    for (idx, r) in rhs.iter_mut().enumerate() {
        let mut v = 2.0 * curr.data()[idx] + w_curr * flux_curr.data()[idx] + c_old * prev.data()[idx];
        if let Some(fp) = &flux_prev {
            v += tau2 * cfg.theta2 * fp.data()[idx];
        }
        *r = v;
    }

    if cfg.theta1 == 0.0 {
        let data = rhs.into_iter().map(|v| v / c_new).collect();
        let next = ImageGrid::new(curr.width(), curr.height(), data)?.with_h(curr.h())?;
        return Ok((next, 0));
    }

    gauss_seidel_solve(curr, g, &rhs, c_new, tau2 * cfg.theta1, cfg)
}

/// Solves `c_new * x - w_flux * [div(g grad x)] = rhs` by lexicographic
/// Gauss-Seidel sweeps, starting from the current level.
fn gauss_seidel_solve(
    curr: &ImageGrid,
    g: &ImageGrid,
    rhs: &[f64],
    c_new: f64,
    w_flux: f64,
    cfg: &SolverConfig,
) -> Result<(ImageGrid, usize)> {
    let (w, h) = (curr.width(), curr.height());
    let half_inv_h2 = 0.5 / (curr.h() * curr.h());
    let gv = g.ghost();

    // Per pixel: off-diagonal weights toward in-bounds neighbors. A clamped
    // (ghost) neighbor coincides with the pixel itself and its edge flux
    // vanishes, so it contributes nothing.
    let mut x = curr.clone();
    let mut sweeps = 0usize;
    loop {
        for j in 0..h {
            for i in 0..w {
                let (is, js) = (i as isize, j as isize);
                let g_c = gv.get(is, js);
                let mut diag = c_new;
                let mut acc = rhs[j * w + i];
                for (ni, nj) in [(is + 1, js), (is - 1, js), (is, js + 1), (is, js - 1)] {
                    let ci = ni.clamp(0, w as isize - 1) as usize;
                    let cj = nj.clamp(0, h as isize - 1) as usize;
                    if (ci, cj) == (i, j) {
                        continue;
                    }
                    let wgt = w_flux * half_inv_h2 * (g_c + gv.get(ni, nj));
                    diag += wgt;
                    acc += wgt * x.get(ci, cj);
                }
                x.set(i, j, acc / diag);
            }
        }
        sweeps += 1;

        // residual by back-substitution through the literal flux operator
        let div = flux_divergence(&x, g)?;
        let mut residual = 0.0f64;
        for (idx, &r) in rhs.iter().enumerate() {
            let defect = c_new * x.data()[idx] - w_flux * div.data()[idx] - r;
            residual = residual.max(defect.abs());
        }
        if residual < cfg.gs_tol {
            return Ok((x, sweeps));
        }
        if sweeps >= cfg.gs_max_sweeps {
            return Err(Error::GaussSeidelDiverged { residual, sweeps });
        }
    }
}

fn push_record(state: &mut SolverState, next: ImageGrid, gs_sweeps: usize, max_g: f64) {
    let rel_change = relative_change(&next, &state.curr);
    state.prev = std::mem::replace(&mut state.curr, next);
    state.step += 1;
    state.history.push(StepRecord {
        step: state.step,
        rel_change,
        psnr: None,
        gs_sweeps,
        max_g,
    });
}

/// Advances the diffusion model one explicit step.
pub fn diffusion_step(state: &mut SolverState, cfg: &SolverConfig, dcfg: &DiffusivityConfig) -> Result<()> {
    let field = diffusivity_field(&state.curr, dcfg)?;
    let (_, max_g) = field.g.minmax();
    check_cfl(cfg, max_g, state.curr.h())?;
    let next = diffusion_update(&state.curr, &field.g, cfg.tau)?;
    push_record(state, next, 0, max_g);
    Ok(())
}

/// Advances the telegraph model one weighted-theta step.
pub fn telegraph_step(state: &mut SolverState, cfg: &SolverConfig, dcfg: &DiffusivityConfig) -> Result<()> {
    let field = diffusivity_field(&state.curr, dcfg)?;
    let (_, max_g) = field.g.minmax();
    check_cfl(cfg, max_g, state.curr.h())?;
    let (next, sweeps) = telegraph_update(&state.prev, &state.curr, &field.g, cfg)?;
    push_record(state, next, sweeps, max_g);
    Ok(())
}

/// Advances one step of whichever model the config selects.
pub fn advance(state: &mut SolverState, cfg: &SolverConfig, dcfg: &DiffusivityConfig) -> Result<()> {
    match cfg.model {
        ModelKind::Diffusion => diffusion_step(state, cfg, dcfg),
        ModelKind::Telegraph { .. } => telegraph_step(state, cfg, dcfg),
    }
}

/// Runs the configured model from `initial` until the stopping rule fires or
/// `max_steps` is reached. `reference` feeds per-step PSNR into the history
/// and is mandatory for [`StopRule::BestPsnr`].
pub fn run(
    initial: &ImageGrid,
    cfg: &SolverConfig,
    dcfg: &DiffusivityConfig,
    reference: Option<&ImageGrid>,
) -> Result<(ImageGrid, Vec<StepRecord>)> {
    cfg.validate()?;
    dcfg.validate()?;
    let (min, _) = initial.minmax();
    if min <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "initial data must be strictly positive, minimum is {min}"
        )));
    }
    if let Some(r) = reference {
        initial.check_dims(r)?;
    }

    let mut state = SolverState::new(initial.clone());
    let (mut best_image, mut best_psnr, mut stale) = match cfg.stop {
        StopRule::BestPsnr { .. } => {
            let r = reference.ok_or_else(|| {
                Error::InvalidParameter("best-PSNR stopping requires a reference image".into())
            })?;
            (Some(initial.clone()), psnr(r, initial), 0usize)
        }
        StopRule::RelChange { .. } => (None, f64::NEG_INFINITY, 0usize),
    };

    while state.step < cfg.max_steps {
        advance(&mut state, cfg, dcfg)?;
        let record = state.history.last_mut().expect("step just pushed");
        if let Some(r) = reference {
            record.psnr = Some(psnr(r, &state.curr));
        }
        match cfg.stop {
            StopRule::BestPsnr { patience } => {
                let current = record.psnr.expect("reference checked above");
                if current > best_psnr {
                    best_psnr = current;
                    best_image = Some(state.curr.clone());
                    stale = 0;
                } else {
                    stale += 1;
                    if stale >= patience {
                        break;
                    }
                }
            }
            StopRule::RelChange { eps_stop } => {
                if record.rel_change <= eps_stop {
                    break;
                }
            }
        }
    }

    let restored = best_image.unwrap_or(state.curr);
    Ok((restored, state.history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusivity::ExponentKind;
    use crate::rng::Xoshiro256PlusPlus;

    fn random_grid(w: usize, h: usize, seed: u64) -> ImageGrid {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        ImageGrid::from_fn(w, h, |_, _| 0.2 + 0.6 * rng.next_f64()).unwrap()
    }

    fn telegraph_cfg() -> SolverConfig {
        SolverConfig {
            model: ModelKind::Telegraph { gamma: 2.0 },
            ..Default::default()
        }
    }

    #[test]
    fn flux_of_constant_image_is_zero() {
        let img = ImageGrid::constant(8, 8, 0.4).unwrap();
        let g = random_grid(8, 8, 1);
        let div = flux_divergence(&img, &g).unwrap();
        assert!(div.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn flux_with_constant_g_is_scaled_laplacian() {
        let img = random_grid(8, 8, 2);
        let c = 0.7;
        let g = ImageGrid::constant(8, 8, c).unwrap();
        let div = flux_divergence(&img, &g).unwrap();
        let view = img.ghost();
        for j in 0..8 {
            for i in 0..8 {
                let (is, js) = (i as isize, j as isize);
                let lap = view.get(is + 1, js)
                    + view.get(is - 1, js)
                    + view.get(is, js + 1)
                    + view.get(is, js - 1)
                    - 4.0 * view.get(is, js);
                assert!(
                    (div.get(i, j) - c * lap).abs() < 1e-12,
                    "({i},{j}): {} vs {}",
                    div.get(i, j),
                    c * lap
                );
            }
        }
    }

    #[test]
    fn flux_telescopes_to_zero() {
        for seed in 0..50 {
            let img = random_grid(6, 6, seed);
            let g = random_grid(6, 6, seed + 1000);
            let div = flux_divergence(&img, &g).unwrap();
            let total: f64 = div.data().iter().sum();
            let (_, max_abs) = img.minmax();
            assert!(total.abs() <= 1e-10 * max_abs, "seed {seed}: {total}");
        }
    }

    #[test]
    fn cfl_examples() {
        assert!((cfl_max_tau(1.0001, 1.0).unwrap() - 0.99995).abs() < 1e-4);
        assert_eq!(cfl_max_tau(4.0, 1.0).unwrap(), 0.5);
        assert!(cfl_max_tau(0.0, 1.0).is_err());
        // the default tau is admissible for every coefficient the bound allows
        assert!(0.25 <= cfl_max_tau(1.0 + 1e-4, 1.0).unwrap());
    }

    #[test]
    fn diffusion_constant_image_is_fixed_point() {
        let img = ImageGrid::constant(16, 16, 0.5).unwrap();
        let mut state = SolverState::new(img.clone());
        let cfg = SolverConfig {
            model: ModelKind::Diffusion,
            ..Default::default()
        };
        let dcfg = DiffusivityConfig::default();
        for _ in 0..5 {
            diffusion_step(&mut state, &cfg, &dcfg).unwrap();
        }
        assert_eq!(state.curr, img);
    }

    #[test]
    fn diffusion_conserves_pixel_sum() {
        let img = random_grid(16, 16, 9);
        let mut state = SolverState::new(img.clone());
        let cfg = SolverConfig {
            model: ModelKind::Diffusion,
            ..Default::default()
        };
        let dcfg = DiffusivityConfig {
            nu: 1.0,
            exponent: ExponentKind::AvgGray { p0: 2.2, alpha: 2.0 },
            ..Default::default()
        };
        let total0: f64 = img.data().iter().sum();
        for _ in 0..20 {
            diffusion_step(&mut state, &cfg, &dcfg).unwrap();
            let total: f64 = state.curr.data().iter().sum();
            assert!((total - total0).abs() <= 1e-10 * total0.abs());
        }
    }

    #[test]
    fn diffusion_range_and_l2_shrink() {
        let img = random_grid(16, 16, 13);
        let mut state = SolverState::new(img.clone());
        let cfg = SolverConfig {
            model: ModelKind::Diffusion,
            ..Default::default()
        };
        let dcfg = DiffusivityConfig {
            nu: 1.0,
            ..Default::default()
        };
        let (mut lo, mut hi) = img.minmax();
        let mut norm = squared_norm(img.data());
        for _ in 0..30 {
            diffusion_step(&mut state, &cfg, &dcfg).unwrap();
            let (nlo, nhi) = state.curr.minmax();
            assert!(nlo >= lo - 1e-12 && nhi <= hi + 1e-12, "[{nlo},{nhi}] vs [{lo},{hi}]");
            let nnorm = squared_norm(state.curr.data());
            assert!(nnorm <= norm * (1.0 + 1e-12));
            (lo, hi) = (nlo, nhi);
            norm = nnorm;
        }
    }

    // With the coefficient zeroed the recurrence collapses to
    // (1+a) I = 2 I0 + (a-1) I0, i.e. the initial image is a fixed point.
    #[test]
    fn telegraph_zero_coefficient_is_identity() {
        let img = random_grid(8, 8, 4);
        let zero = ImageGrid::constant(8, 8, 0.0).unwrap();
        let cfg = telegraph_cfg();
        let mut prev = img.clone();
        let mut curr = img.clone();
        for _ in 0..10 {
            let (next, sweeps) = telegraph_update(&prev, &curr, &zero, &cfg).unwrap();
            assert_eq!(sweeps, 0);
            for (a, b) in next.data().iter().zip(img.data()) {
                assert!((a - b).abs() < 1e-14);
            }
            prev = std::mem::replace(&mut curr, next);
        }
    }

    // theta1 = theta2 = 0 with gamma * tau = 2 collapses to one diffusion
    // step of effective size tau^2 / 2.
    #[test]
    fn telegraph_reduces_to_diffusion_at_gamma_tau_two() {
        let img = random_grid(8, 8, 6);
        let g = random_grid(8, 8, 7);
        let tau = 0.25;
        let cfg = SolverConfig {
            model: ModelKind::Telegraph { gamma: 2.0 / tau },
            tau,
            ..Default::default()
        };
        let (next, _) = telegraph_update(&img, &img, &g, &cfg).unwrap();
        let expected = diffusion_update(&img, &g, tau * tau / 2.0).unwrap();
        for (a, b) in next.data().iter().zip(expected.data()) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn gauss_seidel_satisfies_system() {
        let prev = random_grid(16, 16, 21);
        let curr = random_grid(16, 16, 22);
        let g = random_grid(16, 16, 23);
        let cfg = SolverConfig {
            theta1: 0.5,
            ..telegraph_cfg()
        };
        let (next, sweeps) = telegraph_update(&prev, &curr, &g, &cfg).unwrap();
        assert!(sweeps > 0);

        // back-substitute into the discrete equation
        let tau2 = cfg.tau * cfg.tau;
        let gamma = 2.0;
        let c_new = 1.0 + 0.5 * gamma * cfg.tau;
        let c_old = 0.5 * gamma * cfg.tau - 1.0;
        let flux_new = flux_divergence(&next, &g).unwrap();
        let flux_cur = flux_divergence(&curr, &g).unwrap();
        for idx in 0..next.len() {
            let lhs = c_new * next.data()[idx] - tau2 * cfg.theta1 * flux_new.data()[idx];
            let rhs = 2.0 * curr.data()[idx]
                + tau2 * (1.0 - cfg.theta1 - cfg.theta2) * flux_cur.data()[idx]
                + c_old * prev.data()[idx];
            assert!((lhs - rhs).abs() < 1e-6, "defect {}", lhs - rhs);
        }
    }

    #[test]
    fn gauss_seidel_reports_divergence() {
        let img = random_grid(8, 8, 30);
        let g = ImageGrid::constant(8, 8, 1.0).unwrap();
        let cfg = SolverConfig {
            theta1: 0.5,
            gs_tol: 1e-14,
            gs_max_sweeps: 1,
            ..telegraph_cfg()
        };
        let err = telegraph_update(&img, &img, &g, &cfg).unwrap_err();
        assert!(matches!(err, Error::GaussSeidelDiverged { .. }), "{err}");
    }

    #[test]
    fn cfl_violation_reports_admissible_tau() {
        let img = random_grid(8, 8, 31);
        let mut state = SolverState::new(img);
        let cfg = SolverConfig {
            model: ModelKind::Diffusion,
            tau: 2.0,
            ..Default::default()
        };
        let err = diffusion_step(&mut state, &cfg, &DiffusivityConfig::default()).unwrap_err();
        match err {
            Error::CflViolation { tau, tau_max } => {
                assert_eq!(tau, 2.0);
                // g <= 1 + eps, so the bound can never fall below ~1
                assert!(tau_max >= 1.0 / (1.0f64 + 1e-4).sqrt());
                assert!(tau > tau_max);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn rel_change_stops_immediately_on_constant_input() {
        let img = ImageGrid::constant(16, 16, 0.5).unwrap();
        let cfg = SolverConfig {
            model: ModelKind::Diffusion,
            stop: StopRule::RelChange { eps_stop: 1e-4 },
            ..Default::default()
        };
        let (restored, history) = run(&img, &cfg, &DiffusivityConfig::default(), None).unwrap();
        assert_eq!(history.len(), 1);
        assert_eq!(restored, img);
    }

    #[test]
    fn best_psnr_against_input_returns_step_zero() {
        let img = random_grid(16, 16, 40);
        let cfg = SolverConfig {
            model: ModelKind::Diffusion,
            stop: StopRule::BestPsnr { patience: 5 },
            max_steps: 50,
            ..Default::default()
        };
        // reference = the (noisy) input itself: smoothing only lowers PSNR
        let (restored, history) = run(&img, &cfg, &DiffusivityConfig::default(), Some(&img)).unwrap();
        assert_eq!(restored, img);
        assert_eq!(history.len(), 5);
    }

    #[test]
    fn best_psnr_requires_reference() {
        let img = random_grid(8, 8, 41);
        let cfg = SolverConfig {
            stop: StopRule::BestPsnr { patience: 5 },
            ..telegraph_cfg()
        };
        assert!(run(&img, &cfg, &DiffusivityConfig::default(), None).is_err());
    }

    #[test]
    fn run_is_deterministic() {
        let img = random_grid(16, 16, 50);
        let cfg = SolverConfig {
            max_steps: 10,
            stop: StopRule::RelChange { eps_stop: 1e-12 },
            ..telegraph_cfg()
        };
        let dcfg = DiffusivityConfig {
            nu: 1.0,
            exponent: ExponentKind::AvgGray { p0: 2.2, alpha: 2.0 },
            ..Default::default()
        };
        let (a, _) = run(&img, &cfg, &dcfg, None).unwrap();
        let (b, _) = run(&img, &cfg, &dcfg, None).unwrap();
        assert_eq!(a, b);
    }
}
