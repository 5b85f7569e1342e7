//! Gaussian pre-smoothing and its gradient.
//!
//! Every diffusivity and exponent computation works on the mollified image
//! `G_xi * I`, so the kernel and the replicate-padded separable convolution
//! live here. Gradients are central differences on the smoothed field with
//! the same replicated boundary the PDE uses.

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

/// Normalized 1D Gaussian taps truncated at radius `ceil(3*xi)`.
#[derive(Debug, Clone)]
pub struct GaussianKernel {
    xi: f64,
    radius: usize,
    weights: Vec<f64>,
}

impl GaussianKernel {
    pub fn new(xi: f64) -> Result<Self> {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gaussian scale xi must be positive, got {xi}"
            )));
        }
        let radius = (3.0 * xi).ceil() as usize;
        let mut weights = Vec::with_capacity(2 * radius + 1);
        for k in 0..=2 * radius {
            let d = k as f64 - radius as f64;
            weights.push((-d * d / (2.0 * xi * xi)).exp());
        }
        let sum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= sum;
        }
        Ok(Self { xi, radius, weights })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[inline]
fn clamp_index(k: isize, len: usize) -> usize {
    k.clamp(0, len as isize - 1) as usize
}

/// Separable 2D convolution with replicate padding. Output has the input's
/// dimensions and spatial step.
pub fn gaussian_convolve(image: &ImageGrid, xi: f64) -> Result<ImageGrid> {
    let kernel = GaussianKernel::new(xi)?;
    Ok(convolve_with(image, &kernel))
}

pub(crate) fn convolve_with(image: &ImageGrid, kernel: &GaussianKernel) -> ImageGrid {
    let (w, h) = (image.width(), image.height());
    let r = kernel.radius() as isize;
    let taps = kernel.weights();

    // horizontal pass
    let mut pass = vec![0.0f64; w * h];
    for j in 0..h {
        for i in 0..w {
            let mut acc = 0.0;
            for (t, &wt) in taps.iter().enumerate() {
                let src = clamp_index(i as isize + t as isize - r, w);
                acc += wt * image.get(src, j);
            }
            pass[j * w + i] = acc;
        }
    }
    // vertical pass
    let mut out = vec![0.0f64; w * h];
    for j in 0..h {
        for i in 0..w {
            let mut acc = 0.0;
            for (t, &wt) in taps.iter().enumerate() {
                let src = clamp_index(j as isize + t as isize - r, h);
                acc += wt * pass[src * w + i];
            }
            out[j * w + i] = acc;
        }
    }
    let mut grid = ImageGrid::new(w, h, out).expect("dims preserved");
    grid = grid.with_h(image.h()).expect("h preserved");
    grid
}

/// Central differences of the already-smoothed field, replicated boundary.
pub(crate) fn central_gradient(smoothed: &ImageGrid) -> (ImageGrid, ImageGrid) {
    let (w, h) = (smoothed.width(), smoothed.height());
    let inv2h = 1.0 / (2.0 * smoothed.h());
    let view = smoothed.ghost();
    let mut gx = vec![0.0f64; w * h];
    let mut gy = vec![0.0f64; w * h];
    for j in 0..h {
        for i in 0..w {
            let (is, js) = (i as isize, j as isize);
            gx[j * w + i] = (view.get(is + 1, js) - view.get(is - 1, js)) * inv2h;
            gy[j * w + i] = (view.get(is, js + 1) - view.get(is, js - 1)) * inv2h;
        }
    }
    let gx = ImageGrid::new(w, h, gx).expect("dims preserved");
    let gy = ImageGrid::new(w, h, gy).expect("dims preserved");
    (gx, gy)
}

/// Gradient of `G_xi * I` by central differences; magnitude is
/// `sqrt(gx^2 + gy^2)` pointwise.
pub fn smoothed_gradient(image: &ImageGrid, xi: f64) -> Result<(ImageGrid, ImageGrid)> {
    let smoothed = gaussian_convolve(image, xi)?;
    Ok(central_gradient(&smoothed))
}

/// Maximum absolute value of a (typically smoothed) field.
pub fn smoothed_max(smoothed: &ImageGrid) -> f64 {
    smoothed.data().iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
