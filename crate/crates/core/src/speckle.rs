//! Multiplicative speckle synthesis.
//!
//! An `L`-look speckled image is the pointwise product of the clean image
//! with a Gamma(shape `L`, scale `1/L`) field: unit mean, variance `1/L`.

use crate::error::{Error, Result};
use crate::grid::{ImageGrid, FLOOR_INTENSITY};
use crate::rng::Xoshiro256PlusPlus;

/// Look number and RNG seed for one noise field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpeckleParams {
    pub looks: u32,
    pub seed: u64,
}

impl SpeckleParams {
    pub fn new(looks: u32, seed: u64) -> Result<Self> {
        if looks == 0 {
            return Err(Error::InvalidParameter(
                "look number L must be at least 1".into(),
            ));
        }
        Ok(Self { looks, seed })
    }
}

/// Gamma(shape, 1) variate by the Marsaglia-Tsang squeeze method, with the
/// usual `U^(1/shape)` boost for shape < 1.
fn sample_gamma(rng: &mut Xoshiro256PlusPlus, shape: f64) -> f64 {
    if shape < 1.0 {
        let boost = rng.next_f64_open().powf(1.0 / shape);
        return boost * sample_gamma(rng, shape + 1.0);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let (x, v) = loop {
            let x = rng.next_normal();
            let v = 1.0 + c * x;
            if v > 0.0 {
                break (x, v * v * v);
            }
        };
        let u = rng.next_f64_open();
        if u < 1.0 - 0.0331 * x * x * x * x {
            return d * v;
        }
        if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Draws an i.i.d. Gamma(L, 1/L) field. Deterministic for a fixed seed.
pub fn sample_speckle_field(params: SpeckleParams, width: usize, height: usize) -> Result<ImageGrid> {
    if params.looks == 0 {
        return Err(Error::InvalidParameter(
            "look number L must be at least 1".into(),
        ));
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(format!(
            "noise field dimensions must be positive, got {width}x{height}"
        )));
    }
    let shape = params.looks as f64;
    let scale = 1.0 / shape;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(params.seed);
    let mut data = Vec::with_capacity(width * height);
    for _ in 0..width * height {
        data.push(scale * sample_gamma(&mut rng, shape));
    }
    ImageGrid::new(width, height, data)
}

/// Pointwise product of clean image and noise field, clamped below at the
/// intensity floor so the result stays valid PDE initial data.
pub fn apply_speckle(clean: &ImageGrid, noise: &ImageGrid) -> Result<ImageGrid> {
    clean.check_dims(noise)?;
    let data = clean
        .data()
        .iter()
        .zip(noise.data())
        .map(|(&c, &n)| (c * n).max(FLOOR_INTENSITY))
        .collect();
    ImageGrid::new(clean.width(), clean.height(), data)
}
