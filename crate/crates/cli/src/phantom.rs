//! Synthetic test scenes used when no real imagery is available.

use despeckle_core::{Error, ImageGrid, Result, FLOOR_INTENSITY};

/// Scene generators. Intensities stay inside [0.2, 0.8] except for the ramp,
/// keeping clear of the clamp floor and the PSNR range pin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomKind {
    /// Background 0.2 with a centered disk of 0.8, radius 0.3 * min(dim).
    Circle,
    /// 4x4 tiling of constant blocks on the lattice {0.2, 0.4, 0.6, 0.8}.
    Mosaic,
    /// Horizontal linear ramp from the intensity floor up to 1.
    Ramp,
}

impl PhantomKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "circle" => Ok(Self::Circle),
            "mosaic" => Ok(Self::Mosaic),
            "ramp" => Ok(Self::Ramp),
            other => Err(Error::InvalidParameter(format!(
                "unknown phantom `{other}` (expected circle, mosaic, or ramp)"
            ))),
        }
    }
}

pub fn make_phantom(kind: PhantomKind, width: usize, height: usize) -> Result<ImageGrid> {
    if width < 32 || height < 32 {
        return Err(Error::InvalidParameter(format!(
            "phantom dimensions must be at least 32x32, got {width}x{height}"
        )));
    }
    match kind {
        PhantomKind::Circle => {
            let cx = (width as f64 - 1.0) / 2.0;
            let cy = (height as f64 - 1.0) / 2.0;
            let radius = 0.3 * width.min(height) as f64;
            let r2 = radius * radius;
            ImageGrid::from_fn(width, height, |i, j| {
                let dx = i as f64 - cx;
                let dy = j as f64 - cy;
                if dx * dx + dy * dy <= r2 {
                    0.8
                } else {
                    0.2
                }
            })
        }
        PhantomKind::Mosaic => {
            const LEVELS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
            ImageGrid::from_fn(width, height, |i, j| {
                let bx = i * 4 / width;
                let by = j * 4 / height;
                LEVELS[(bx + by) % 4]
            })
        }
        PhantomKind::Ramp => ImageGrid::from_fn(width, height, |i, _| {
            let t = i as f64 / (width - 1) as f64;
            FLOOR_INTENSITY * (1.0 - t) + t
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_has_exactly_two_levels() {
        let g = make_phantom(PhantomKind::Circle, 256, 256).unwrap();
        let mut values: Vec<u64> = g.data().iter().map(|v| v.to_bits()).collect();
        values.sort_unstable();
        values.dedup();
        assert_eq!(values.len(), 2);
        assert_eq!(g.minmax(), (0.2, 0.8));
    }

    #[test]
    fn mosaic_block_boundaries() {
        let g = make_phantom(PhantomKind::Mosaic, 64, 64).unwrap();
        // constant inside a block
        for j in 0..16 {
            for i in 0..16 {
                assert_eq!(g.get(i, j), g.get(0, 0));
            }
        }
        // change across the block boundary at width/4
        assert_ne!(g.get(15, 0), g.get(16, 0));
        assert_ne!(g.get(0, 15), g.get(0, 16));
    }

    #[test]
    fn ramp_rows_identical() {
        let g = make_phantom(PhantomKind::Ramp, 64, 32).unwrap();
        for i in 0..64 {
            for j in 1..32 {
                assert_eq!(g.get(i, j), g.get(i, 0));
            }
        }
        assert_eq!(g.get(0, 0), FLOOR_INTENSITY);
        assert_eq!(g.get(63, 0), 1.0);
    }

    #[test]
    fn rejects_small_dims() {
        assert!(make_phantom(PhantomKind::Circle, 16, 64).is_err());
    }
}
