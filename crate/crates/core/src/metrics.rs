//! Quality and bias measures for despeckling runs.
//!
//! Reference-based: PSNR, MSSIM, despeckling gain. Ratio-image bias
//! indicators: MoR, VoR. Blind measures: ENL, trimmed ENL*, speckle index.
//! Edge localization: Pratt's figure of merit over detected edge maps.

use crate::error::{Error, Result};
use crate::grid::{ImageGrid, FLOOR_INTENSITY};

/// Mean squared difference between two same-size grids.
pub fn mse(a: &ImageGrid, b: &ImageGrid) -> f64 {
    assert!(a.same_dims(b), "mse requires equal dimensions");
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum();
    sum / a.len() as f64
}

/// `10 log10(max(reference)^2 / MSE)`; identical images give `+inf`.
pub fn psnr(reference: &ImageGrid, test: &ImageGrid) -> f64 {
    let err = mse(reference, test);
    if err == 0.0 {
        return f64::INFINITY;
    }
    let (_, max) = reference.minmax();
    10.0 * (max * max / err).log10()
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn ssim_window_weights() -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as isize;
    let mut w = Vec::with_capacity(SSIM_WINDOW * SSIM_WINDOW);
    for dy in -r..=r {
        for dx in -r..=r {
            w.push((-((dx * dx + dy * dy) as f64) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp());
        }
    }
    let sum: f64 = w.iter().sum();
    w.iter().map(|v| v / sum).collect()
}

/// Mean SSIM over all fully interior 11x11 Gaussian windows (sigma 1.5).
/// The dynamic range is pinned to `max(reference)`.
pub fn mssim(reference: &ImageGrid, test: &ImageGrid) -> Result<f64> {
    reference.check_dims(test)?;
    let (w, h) = (reference.width(), reference.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::InvalidParameter(format!(
            "image {w}x{h} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )));
    }
    let weights = ssim_window_weights();
    let (_, range) = reference.minmax();
    let c1 = (SSIM_K1 * range) * (SSIM_K1 * range);
    let c2 = (SSIM_K2 * range) * (SSIM_K2 * range);
    let r = SSIM_WINDOW / 2;

    let mut total = 0.0;
    let mut count = 0usize;
    for cy in r..h - r {
        for cx in r..w - r {
            let (mut mu_x, mut mu_y) = (0.0, 0.0);
            let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
            let mut t = 0usize;
            for dy in 0..SSIM_WINDOW {
                for dx in 0..SSIM_WINDOW {
                    let wgt = weights[t];
                    t += 1;
                    let x = reference.get(cx + dx - r, cy + dy - r);
                    let y = test.get(cx + dx - r, cy + dy - r);
                    mu_x += wgt * x;
                    mu_y += wgt * y;
                    xx += wgt * x * x;
                    yy += wgt * y * y;
                    xy += wgt * x * y;
                }
            }
            let var_x = xx - mu_x * mu_x;
            let var_y = yy - mu_y * mu_y;
            let cov = xy - mu_x * mu_y;
            let ssim = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2))
                / ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
            total += ssim;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Pointwise noisy / restored image; the denominator is clamped at the
/// intensity floor first, so every ratio is finite and positive.
#[derive(Debug, Clone)]
pub struct RatioImage {
    pub grid: ImageGrid,
}

pub fn ratio_image(noisy: &ImageGrid, restored: &ImageGrid) -> Result<RatioImage> {
    noisy.check_dims(restored)?;
    let data = noisy
        .data()
        .iter()
        .zip(restored.data())
        .map(|(&n, &r)| n / r.max(FLOOR_INTENSITY))
        .collect();
    Ok(RatioImage {
        grid: ImageGrid::new(noisy.width(), noisy.height(), data)?,
    })
}

/// Sample mean and population variance of the ratio image.
pub fn mor_vor(ratio: &RatioImage) -> (f64, f64) {
    let n = ratio.grid.len() as f64;
    let mean = ratio.grid.data().iter().sum::<f64>() / n;
    let var = ratio
        .grid
        .data()
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<f64>()
        / n;
    (mean, var)
}

/// `10 log10(MSE(clean, noisy) / MSE(clean, restored))` in dB. Zero when the
/// restoration equals the noisy input; `+inf` when it equals the clean image.
pub fn despeckling_gain(clean: &ImageGrid, noisy: &ImageGrid, restored: &ImageGrid) -> f64 {
    let mse_noisy = mse(clean, noisy);
    let mse_restored = mse(clean, restored);
    if mse_noisy == mse_restored {
        return 0.0;
    }
    if mse_restored == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (mse_noisy / mse_restored).log10()
}

/// Equivalent number of looks, `mean^2 / variance` of a homogeneous region.
/// A constant region gives the `+inf` sentinel.
pub fn enl(region: &ImageGrid) -> f64 {
    assert!(region.len() > 1, "ENL needs more than one pixel");
    let n = region.len() as f64;
    let mean = region.data().iter().sum::<f64>() / n;
    let var = region
        .data()
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<f64>()
        / n;
    if var == 0.0 {
        return f64::INFINITY;
    }
    mean * mean / var
}

/// Robust ENL variant: 5% of the samples trimmed from each tail before the
/// moment computation.
pub fn enl_star(region: &ImageGrid) -> f64 {
    assert!(region.len() > 1, "ENL* needs more than one pixel");
    let mut values: Vec<f64> = region.data().to_vec();
    values.sort_by(|a, b| a.partial_cmp(b).expect("grid values are finite"));
    let trim = values.len() / 20;
    let kept = &values[trim..values.len() - trim];
    let n = kept.len() as f64;
    let mean = kept.iter().sum::<f64>() / n;
    let var = kept.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var == 0.0 {
        return f64::INFINITY;
    }
    mean * mean / var
}

/// Mean local coefficient of variation (std / mean) over square windows with
/// replicated boundary. Pixels whose local mean falls below the intensity
/// floor contribute zero.
pub fn speckle_index(image: &ImageGrid, window: usize) -> Result<f64> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "speckle index window must be odd and at least 3, got {window}"
        )));
    }
    let (w, h) = (image.width(), image.height());
    let r = (window / 2) as isize;
    let view = image.ghost();
    let count = (window * window) as f64;
    let mut total = 0.0;
    for j in 0..h as isize {
        for i in 0..w as isize {
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for dj in -r..=r {
                for di in -r..=r {
                    let v = view.get(i + di, j + dj);
                    sum += v;
                    sum_sq += v * v;
                }
            }
            let mean = sum / count;
            if mean < FLOOR_INTENSITY {
                continue;
            }
            let var = (sum_sq / count - mean * mean).max(0.0);
            total += var.sqrt() / mean;
        }
    }
    Ok(total / (w * h) as f64)
}

/// Binary edge mask with grid dimensions.
#[derive(Debug, Clone)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "edge mask length {} does not match {width}x{height}",
                mask.len()
            )));
        }
        Ok(Self {
            width,
            height,
            mask,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.width + i]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    fn positions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.height {
            for i in 0..self.width {
                if self.is_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Sobel gradient magnitude with replicated boundary.
fn sobel_magnitude(image: &ImageGrid) -> Vec<f64> {
    let (w, h) = (image.width(), image.height());
    let v = image.ghost();
    let mut mag = vec![0.0f64; w * h];
    for j in 0..h as isize {
        for i in 0..w as isize {
            let gx = v.get(i + 1, j - 1) + 2.0 * v.get(i + 1, j) + v.get(i + 1, j + 1)
                - v.get(i - 1, j - 1)
                - 2.0 * v.get(i - 1, j)
                - v.get(i - 1, j + 1);
            let gy = v.get(i - 1, j + 1) + 2.0 * v.get(i, j + 1) + v.get(i + 1, j + 1)
                - v.get(i - 1, j - 1)
                - 2.0 * v.get(i, j - 1)
                - v.get(i + 1, j - 1);
            mag[j as usize * w + i as usize] = (gx * gx + gy * gy).sqrt();
        }
    }
    mag
}

const OTSU_BINS: usize = 256;

fn histogram_bin(v: f64, max: f64) -> usize {
    (((v / max) * (OTSU_BINS - 1) as f64).round() as usize).min(OTSU_BINS - 1)
}

/// Otsu split over a 256-bin histogram; returns the last bin of the
/// background class. Classification happens in bin space so near-zero
/// rounding dust stays in the background.
fn otsu_split_bin(values: &[f64], max: f64) -> usize {
    let mut hist = [0usize; OTSU_BINS];
    for &v in values {
        hist[histogram_bin(v, max)] += 1;
    }
    let total = values.len() as f64;
    let total_mean: f64 = hist
        .iter()
        .enumerate()
        .map(|(k, &c)| k as f64 * c as f64)
        .sum::<f64>()
        / total;
    let (mut best_bin, mut best_var) = (0usize, -1.0f64);
    let (mut w0, mut sum0) = (0.0f64, 0.0f64);
    for (k, &count) in hist.iter().enumerate().take(OTSU_BINS - 1) {
        w0 += count as f64 / total;
        sum0 += k as f64 * count as f64 / total;
        if w0 == 0.0 || w0 >= 1.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (total_mean - sum0) / (1.0 - w0);
        let between = w0 * (1.0 - w0) * (mu0 - mu1) * (mu0 - mu1);
        if between > best_var {
            best_var = between;
            best_bin = k;
        }
    }
    best_bin
}

/// Edge map by Sobel gradient magnitude thresholded at the Otsu level of the
/// gradient histogram.
pub fn detect_edges(image: &ImageGrid) -> Result<EdgeMap> {
    let mag = sobel_magnitude(image);
    let max = mag.iter().fold(0.0f64, |m, &v| m.max(v));
    let mask = if max == 0.0 {
        vec![false; mag.len()] // flat input: nothing qualifies as an edge
    } else {
        let split = otsu_split_bin(&mag, max);
        mag.iter().map(|&v| histogram_bin(v, max) > split).collect()
    };
    EdgeMap::new(image.width(), image.height(), mask)
}

/// Pratt's figure of merit with displacement constant `a = 1/9`.
pub fn figure_of_merit(edges_ref: &EdgeMap, edges_test: &EdgeMap) -> Result<f64> {
    if edges_ref.width != edges_test.width || edges_ref.height != edges_test.height {
        return Err(Error::DimensionMismatch(
            edges_ref.width,
            edges_ref.height,
            edges_test.width,
            edges_test.height,
        ));
    }
    let ref_pos = edges_ref.positions();
    let test_pos = edges_test.positions();
    if ref_pos.is_empty() || test_pos.is_empty() {
        return Err(Error::InvalidParameter(
            "figure of merit requires at least one edge pixel in each map".into(),
        ));
    }
    let mut sum = 0.0;
    for &(ti, tj) in &test_pos {
        let d2 = ref_pos
            .iter()
            .map(|&(ri, rj)| {
                let dx = ti as f64 - ri as f64;
                let dy = tj as f64 - rj as f64;
                dx * dx + dy * dy
            })
            .fold(f64::INFINITY, f64::min);
        sum += 1.0 / (1.0 + d2 / 9.0);
    }
    Ok(sum / ref_pos.len().max(test_pos.len()) as f64)
}

/// All measures for one clean / noisy / restored triple. `mssim` and `fom`
/// are absent when the image is too small for the SSIM window or when no
/// edges are detected.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub psnr: f64,
    pub mssim: Option<f64>,
    pub mor: f64,
    pub vor: f64,
    pub dg: f64,
    pub enl: f64,
    pub enl_star: f64,
    pub si: f64,
    pub fom: Option<f64>,
}

impl MetricsReport {
    pub fn compute(
        clean: &ImageGrid,
        noisy: &ImageGrid,
        restored: &ImageGrid,
        si_window: usize,
    ) -> Result<Self> {
        clean.check_dims(noisy)?;
        clean.check_dims(restored)?;
        if clean.len() < 2 {
            return Err(Error::InvalidParameter(
                "metrics need at least two pixels".into(),
            ));
        }
        let ratio = ratio_image(noisy, restored)?;
        let (mor, vor) = mor_vor(&ratio);
        let fom = match (detect_edges(clean), detect_edges(restored)) {
            (Ok(r), Ok(t)) => figure_of_merit(&r, &t).ok(),
            _ => None,
        };
        Ok(Self {
            psnr: psnr(clean, restored),
            mssim: mssim(clean, restored).ok(),
            mor,
            vor,
            dg: despeckling_gain(clean, noisy, restored),
            enl: enl(restored),
            enl_star: enl_star(restored),
            si: speckle_index(restored, si_window)?,
            fom,
        })
    }
}
