use crate::error::{Error, Result};

/// Smallest intensity allowed in PDE initial data. Keeps images strictly
/// positive so gray-level ratios stay well defined.
pub const FLOOR_INTENSITY: f64 = 1.0 / 255.0;

/// Rectangular 2D scalar field of real intensities, stored row-major.
///
/// `get(i, j)` addresses column `i` (x direction, `0..width`) and row `j`
/// (y direction, `0..height`). The spatial step `h` is carried along so
/// stencil code stays correct for non-unit grids.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    h: f64,
    data: Vec<f64>,
}

impl ImageGrid {
    /// Builds a grid from row-major data. All values must be finite and the
    /// length must match `width * height`.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid contains non-finite value {v}"
            )));
        }
        Ok(Self {
            width,
            height,
            h: 1.0,
            data,
        })
    }

    /// Constant-valued grid.
    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a grid by evaluating `f(i, j)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                data.push(f(i, j));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Spatial step between adjacent pixels.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn with_h(mut self, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "spatial step must be positive and finite, got {h}"
            )));
        }
        self.h = h;
        Ok(self)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.width && j < self.height);
        self.data[j * self.width + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i < self.width && j < self.height);
        self.data[j * self.width + i] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn same_dims(&self, other: &ImageGrid) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_dims(&self, other: &ImageGrid) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ))
        }
    }

    /// Exact extrema of the stored data.
    pub fn minmax(&self) -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &v in &self.data {
            if v < min {
                min = v;
            }
            if v > max {
                max = v;
            }
        }
        (min, max)
    }

    /// Returns a copy with every value clamped below at [`FLOOR_INTENSITY`],
    /// as required of PDE initial data.
    pub fn clamped_to_floor(&self) -> ImageGrid {
        let mut out = self.clone();
        for v in &mut out.data {
            if *v < FLOOR_INTENSITY {
                *v = FLOOR_INTENSITY;
            }
        }
        out
    }

    /// Replicated-boundary view realizing the discrete Neumann condition.
    pub fn ghost(&self) -> GhostView<'_> {
        GhostView { grid: self }
    }
}

/// Read access to a grid extended by one replicated ghost cell on each side:
/// index `-1` maps to `0` and `width`/`height` map to the last interior cell.
#[derive(Clone, Copy)]
pub struct GhostView<'a> {
    grid: &'a ImageGrid,
}

impl GhostView<'_> {
    #[inline]
    pub fn get(&self, i: isize, j: isize) -> f64 {
        let i = i.clamp(0, self.grid.width as isize - 1) as usize;
        let j = j.clamp(0, self.grid.height as isize - 1) as usize;
        self.grid.get(i, j)
    }
}
