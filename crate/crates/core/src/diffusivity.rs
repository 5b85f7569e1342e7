//! Gray-level indicator, variable exponents, and the diffusion coefficient.
//!
//! The coefficient evaluated on a grid is
//!
//! ```text
//! g = epsilon + a(I_xi) / (1 + (|grad I_xi| / K)^p)
//! a(I_xi) = 2 |I_xi|^nu / (M_xi^nu + |I_xi|^nu)
//! ```
//!
//! where `I_xi = G_xi * I`, `M_xi = max |I_xi|`, and the exponent `p` is
//! either a constant or one of three image-dependent fields. The indicator
//! shuts diffusion down in dark regions; the second factor stops it across
//! steep smoothed gradients.

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::smoothing::{central_gradient, gaussian_convolve, smoothed_max};

/// Choice of the exponent `p` in the edge-stopping factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExponentKind {
    /// Fixed exponent, constant over the image.
    Constant(f64),
    /// `p0` minus the spatial mean of the smoothed gray indicator with
    /// power `alpha`; spatially constant but image-dependent.
    AvgGray { p0: f64, alpha: f64 },
    /// `p0` minus the pointwise gray indicator of the unsmoothed image.
    Gray { p0: f64, alpha: f64 },
    /// `p0 - 2 / (1 + gain * |grad G_sigma * I|^2)`; `sigma = None` reuses
    /// the config's smoothing scale `xi`.
    Grad { p0: f64, gain: f64, sigma: Option<f64> },
}

/// Parameters of the diffusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusivityConfig {
    /// Lower bound added to keep the coefficient strictly positive.
    pub epsilon: f64,
    /// Gray-level power in the indicator; 0 disables gray-level gating.
    pub nu: f64,
    /// Gradient scale `K` of the edge-stopping factor.
    pub grad_scale: f64,
    pub exponent: ExponentKind,
    /// Standard deviation of the Gaussian pre-smoothing.
    pub xi: f64,
}

impl Default for DiffusivityConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            nu: 0.0,
            grad_scale: 0.1,
            exponent: ExponentKind::Constant(2.0),
            xi: 1.0,
        }
    }
}

impl DiffusivityConfig {
    pub fn validate(&self) -> Result<()> {
        self.validate_inner(false)
    }

    fn validate_inner(&self, allow_zero_epsilon: bool) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        if allow_zero_epsilon {
            if !self.epsilon.is_finite() || self.epsilon < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "epsilon must be non-negative, got {}",
                    self.epsilon
                )));
            }
        } else {
            positive("epsilon", self.epsilon)?;
        }
        if !self.nu.is_finite() || self.nu < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "nu must be non-negative, got {}",
                self.nu
            )));
        }
        positive("K", self.grad_scale)?;
        positive("xi", self.xi)?;
        let check_p0 = |p0: f64| -> Result<()> {
            if p0.is_finite() && p0 > 0.0 && p0 <= 4.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "exponent base p0 must lie in (0, 4], got {p0}"
                )))
            }
        };
        match self.exponent {
            ExponentKind::Constant(p) => check_p0(p)?,
            ExponentKind::AvgGray { p0, alpha } | ExponentKind::Gray { p0, alpha } => {
                check_p0(p0)?;
                positive("alpha", alpha)?;
            }
            ExponentKind::Grad { p0, gain, sigma } => {
                check_p0(p0)?;
                positive("k", gain)?;
                if let Some(s) = sigma {
                    positive("sigma", s)?;
                }
            }
        }
        Ok(())
    }
}

/// Coefficient, exponent, and indicator fields evaluated on one image.
#[derive(Debug, Clone)]
pub struct DiffusivityField {
    /// Diffusion coefficient, within `[epsilon, 1 + epsilon]`.
    pub g: ImageGrid,
    /// Exponent field, within `[p0 - 2, p0]`.
    pub p: ImageGrid,
    /// Gray-level indicator, within `[0, 1]`.
    pub a: ImageGrid,
}

/// Pointwise gray-level indicator `2 r^nu / (1 + r^nu)` with `r = |v| / M`.
///
/// A degenerate maximum (`M < 1e-12`, constant-zero image) yields the
/// all-ones field, matching the `nu = 0` limit.
pub fn gray_indicator(smoothed: &ImageGrid, nu: f64, m_xi: f64) -> Result<ImageGrid> {
    if !nu.is_finite() || nu < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "nu must be non-negative, got {nu}"
        )));
    }
    if !(m_xi.is_finite() && m_xi >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "maximum must be non-negative, got {m_xi}"
        )));
    }
    if m_xi < 1e-12 {
        return ImageGrid::constant(smoothed.width(), smoothed.height(), 1.0);
    }
    let data = smoothed
        .data()
        .iter()
        .map(|&v| {
            let r = (v.abs() / m_xi).powf(nu);
            (2.0 * r / (1.0 + r)).min(1.0)
        })
        .collect();
    ImageGrid::new(smoothed.width(), smoothed.height(), data)
}

/// One evaluation of the edge-stopping coefficient.
///
/// `0^0` follows IEEE `pow` and equals 1, so a flat pixel with `p = 0`
/// yields `epsilon + a/2`.
#[inline]
pub fn diffusion_coefficient(a: f64, grad_mag: f64, grad_scale: f64, p: f64, epsilon: f64) -> f64 {
    epsilon + a / (1.0 + (grad_mag / grad_scale).powf(p))
}

struct SmoothedData {
    smoothed: ImageGrid,
    m_xi: f64,
    grad_mag: Vec<f64>,
}

fn smooth_and_grad(image: &ImageGrid, xi: f64) -> Result<SmoothedData> {
    let smoothed = gaussian_convolve(image, xi)?;
    let m_xi = smoothed_max(&smoothed);
    let (gx, gy) = central_gradient(&smoothed);
    let grad_mag = gx
        .data()
        .iter()
        .zip(gy.data())
        .map(|(&x, &y)| (x * x + y * y).sqrt())
        .collect();
    Ok(SmoothedData {
        smoothed,
        m_xi,
        grad_mag,
    })
}

fn exponent_field_from(image: &ImageGrid, cfg: &DiffusivityConfig, shared: &SmoothedData) -> Result<ImageGrid> {
    let (w, h) = (image.width(), image.height());
    match cfg.exponent {
        ExponentKind::Constant(p) => ImageGrid::constant(w, h, p),
        ExponentKind::AvgGray { p0, alpha } => {
            let ind = gray_indicator(&shared.smoothed, alpha, shared.m_xi)?;
            let mean = ind.data().iter().sum::<f64>() / ind.len() as f64;
            ImageGrid::constant(w, h, p0 - mean)
        }
        ExponentKind::Gray { p0, alpha } => {
            let m = smoothed_max(image);
            let ind = gray_indicator(image, alpha, m)?;
            let data = ind.data().iter().map(|&a| p0 - a).collect();
            ImageGrid::new(w, h, data)
        }
        ExponentKind::Grad { p0, gain, sigma } => {
            let sigma = sigma.unwrap_or(cfg.xi);
            let mag_owned;
            let mag: &[f64] = if sigma == cfg.xi {
                &shared.grad_mag
            } else {
                mag_owned = smooth_and_grad(image, sigma)?.grad_mag;
                &mag_owned
            };
            let data = mag
                .iter()
                .map(|&m| p0 - 2.0 / (1.0 + gain * m * m))
                .collect();
            ImageGrid::new(w, h, data)
        }
    }
}

/// Evaluates the exponent field alone.
pub fn exponent_field(image: &ImageGrid, cfg: &DiffusivityConfig) -> Result<ImageGrid> {
    cfg.validate_inner(true)?;
    let shared = smooth_and_grad(image, cfg.xi)?;
    exponent_field_from(image, cfg, &shared)
}

fn compute_field(image: &ImageGrid, cfg: &DiffusivityConfig) -> Result<DiffusivityField> {
    let shared = smooth_and_grad(image, cfg.xi)?;
    let a = gray_indicator(&shared.smoothed, cfg.nu, shared.m_xi)?;
    let p = exponent_field_from(image, cfg, &shared)?;
    let data = shared
        .grad_mag
        .iter()
        .zip(a.data().iter().zip(p.data()))
        .map(|(&mag, (&av, &pv))| diffusion_coefficient(av, mag, cfg.grad_scale, pv, cfg.epsilon))
        .collect();
    let g = ImageGrid::new(image.width(), image.height(), data)?;
    Ok(DiffusivityField { g, p, a })
}

/// Full coefficient evaluation `g = epsilon + a / (1 + (|grad I_xi|/K)^p)`.
pub fn diffusivity_field(image: &ImageGrid, cfg: &DiffusivityConfig) -> Result<DiffusivityField> {
    cfg.validate()?;
    compute_field(image, cfg)
}

/// Constant-exponent coefficient without the positivity offset
/// (`epsilon = 0`), the classic fixed-power form.
pub fn diffusivity_constant_p(image: &ImageGrid, nu: f64, grad_scale: f64, p: f64) -> Result<DiffusivityField> {
    let cfg = DiffusivityConfig {
        epsilon: 0.0,
        nu,
        grad_scale,
        exponent: ExponentKind::Constant(p),
        xi: 1.0,
    };
    cfg.validate_inner(true)?;
    compute_field(image, &cfg)
}
