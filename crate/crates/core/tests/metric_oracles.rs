//! Every metric is checked against an independent brute-force
//! implementation written directly from its definition: explicit loops, no
//! shared helpers with the library path.

use despeckle_core::metrics;
use despeckle_core::rng::Xoshiro256PlusPlus;
use despeckle_core::ImageGrid;

const TOL: f64 = 1e-9;

fn random_grid(w: usize, h: usize, seed: u64) -> ImageGrid {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    ImageGrid::from_fn(w, h, |_, _| 0.1 + 0.8 * rng.next_f64()).unwrap()
}

fn brute_mse(a: &ImageGrid, b: &ImageGrid) -> f64 {
    let mut sum = 0.0;
    for j in 0..a.height() {
        for i in 0..a.width() {
            let d = a.get(i, j) - b.get(i, j);
            sum += d * d;
        }
    }
    sum / (a.width() * a.height()) as f64
}

fn brute_psnr(reference: &ImageGrid, test: &ImageGrid) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for j in 0..reference.height() {
        for i in 0..reference.width() {
            max = max.max(reference.get(i, j));
        }
    }
    10.0 * (max * max / brute_mse(reference, test)).log10()
}

#[test]
fn psnr_matches_brute_force() {
    for seed in 0..20 {
        let a = random_grid(8, 8, seed);
        let b = random_grid(8, 8, seed + 100);
        let got = metrics::psnr(&a, &b);
        let want = brute_psnr(&a, &b);
        assert!((got - want).abs() < TOL, "seed {seed}: {got} vs {want}");
    }
}

// Independent MSSIM: window weights rebuilt from the Gaussian definition,
// moments computed with two-pass (centered) sums instead of raw sums.
fn brute_mssim(reference: &ImageGrid, test: &ImageGrid) -> f64 {
    let win = 11usize;
    let sigma = 1.5f64;
    let r = win / 2;
    let mut weights = vec![0.0; win * win];
    let mut wsum = 0.0;
    for dy in 0..win {
        for dx in 0..win {
            let (fx, fy) = (dx as f64 - r as f64, dy as f64 - r as f64);
            let w = (-(fx * fx + fy * fy) / (2.0 * sigma * sigma)).exp();
            weights[dy * win + dx] = w;
            wsum += w;
        }
    }
    for w in &mut weights {
        *w /= wsum;
    }

    let mut range = f64::NEG_INFINITY;
    for j in 0..reference.height() {
        for i in 0..reference.width() {
            range = range.max(reference.get(i, j));
        }
    }
    let c1 = (0.01 * range).powi(2);
    let c2 = (0.03 * range).powi(2);

    let mut total = 0.0;
    let mut windows = 0usize;
    for cy in r..reference.height() - r {
        for cx in r..reference.width() - r {
            let (mut mu_x, mut mu_y) = (0.0, 0.0);
            for dy in 0..win {
                for dx in 0..win {
                    let w = weights[dy * win + dx];
                    mu_x += w * reference.get(cx + dx - r, cy + dy - r);
                    mu_y += w * test.get(cx + dx - r, cy + dy - r);
                }
            }
            let (mut var_x, mut var_y, mut cov) = (0.0, 0.0, 0.0);
            for dy in 0..win {
                for dx in 0..win {
                    let w = weights[dy * win + dx];
                    let x = reference.get(cx + dx - r, cy + dy - r) - mu_x;
                    let y = test.get(cx + dx - r, cy + dy - r) - mu_y;
                    var_x += w * x * x;
                    var_y += w * y * y;
                    cov += w * x * y;
                }
            }
            total += ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2))
                / ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
            windows += 1;
        }
    }
    total / windows as f64
}

#[test]
fn mssim_matches_brute_force() {
    // 16x16: the smallest of the oracle sizes that fits the 11x11 window
    for seed in 0..10 {
        let a = random_grid(16, 16, seed);
        let b = random_grid(16, 16, seed + 100);
        let got = metrics::mssim(&a, &b).unwrap();
        let want = brute_mssim(&a, &b);
        assert!((got - want).abs() < TOL, "seed {seed}: {got} vs {want}");
    }
}

fn brute_mor_vor(noisy: &ImageGrid, restored: &ImageGrid) -> (f64, f64) {
    let floor = despeckle_core::FLOOR_INTENSITY;
    let n = (noisy.width() * noisy.height()) as f64;
    let mut ratios = Vec::new();
    for j in 0..noisy.height() {
        for i in 0..noisy.width() {
            let denom = if restored.get(i, j) < floor {
                floor
            } else {
                restored.get(i, j)
            };
            ratios.push(noisy.get(i, j) / denom);
        }
    }
    let mean = ratios.iter().sum::<f64>() / n;
    let var = ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    (mean, var)
}

#[test]
fn mor_vor_matches_brute_force() {
    for seed in 0..20 {
        let noisy = random_grid(8, 8, seed);
        let restored = random_grid(8, 8, seed + 100);
        let ratio = metrics::ratio_image(&noisy, &restored).unwrap();
        let (mor, vor) = metrics::mor_vor(&ratio);
        let (bm, bv) = brute_mor_vor(&noisy, &restored);
        assert!((mor - bm).abs() < TOL);
        assert!((vor - bv).abs() < TOL);
    }
}

#[test]
fn dg_matches_brute_force() {
    for seed in 0..20 {
        let clean = random_grid(8, 8, seed);
        let noisy = random_grid(8, 8, seed + 100);
        let restored = random_grid(8, 8, seed + 200);
        let got = metrics::despeckling_gain(&clean, &noisy, &restored);
        let want = 10.0 * (brute_mse(&clean, &noisy) / brute_mse(&clean, &restored)).log10();
        assert!((got - want).abs() < TOL, "{got} vs {want}");
    }
}

fn brute_enl(region: &ImageGrid) -> f64 {
    let n = (region.width() * region.height()) as f64;
    let mut sum = 0.0;
    for j in 0..region.height() {
        for i in 0..region.width() {
            sum += region.get(i, j);
        }
    }
    let mean = sum / n;
    let mut var = 0.0;
    for j in 0..region.height() {
        for i in 0..region.width() {
            var += (region.get(i, j) - mean) * (region.get(i, j) - mean);
        }
    }
    mean * mean / (var / n)
}

#[test]
fn enl_matches_brute_force() {
    for seed in 0..20 {
        let g = random_grid(8, 8, seed);
        let got = metrics::enl(&g);
        let want = brute_enl(&g);
        assert!((got - want).abs() < TOL * want.abs().max(1.0), "{got} vs {want}");
    }
}

fn brute_speckle_index(image: &ImageGrid, window: usize) -> f64 {
    let floor = despeckle_core::FLOOR_INTENSITY;
    let r = (window / 2) as isize;
    let (w, h) = (image.width() as isize, image.height() as isize);
    let mut total = 0.0;
    for j in 0..h {
        for i in 0..w {
            let mut vals = Vec::new();
            for dj in -r..=r {
                for di in -r..=r {
                    let ci = (i + di).clamp(0, w - 1) as usize;
                    let cj = (j + dj).clamp(0, h - 1) as usize;
                    vals.push(image.get(ci, cj));
                }
            }
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            if mean < floor {
                continue;
            }
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            total += var.sqrt() / mean;
        }
    }
    total / (w * h) as f64
}

#[test]
fn speckle_index_matches_brute_force() {
    for seed in 0..20 {
        let g = random_grid(8, 8, seed);
        for window in [3usize, 5] {
            let got = metrics::speckle_index(&g, window).unwrap();
            let want = brute_speckle_index(&g, window);
            assert!((got - want).abs() < TOL, "w={window}: {got} vs {want}");
        }
    }
}

// Hand-enumerated single-impulse case: impulse of height 1 over a 0.5
// background, 3x3 windows. Only windows containing the impulse have nonzero
// deviation; each contributes std/mean of an 8-or-9-sample window.
#[test]
fn speckle_index_impulse_by_hand() {
    let mut img = ImageGrid::constant(8, 8, 0.5).unwrap();
    img.set(4, 4, 1.5);
    let got = metrics::speckle_index(&img, 3).unwrap();

    let mut expected = 0.0;
    for j in 0..8i64 {
        for i in 0..8i64 {
            if (i - 4).abs() <= 1 && (j - 4).abs() <= 1 {
                let mean: f64 = (8.0 * 0.5 + 1.5) / 9.0;
                let var: f64 = (8.0 * (0.5 - mean) * (0.5 - mean)
                    + (1.5 - mean) * (1.5 - mean))
                    / 9.0;
                expected += var.sqrt() / mean;
            }
        }
    }
    expected /= 64.0;
    assert!((got - expected).abs() < TOL, "{got} vs {expected}");
}

#[test]
fn speckle_index_drops_after_one_diffusion_step() {
    use despeckle_core::diffusivity::DiffusivityConfig;
    use despeckle_core::solver::{diffusion_step, ModelKind, SolverConfig, SolverState};
    use despeckle_core::speckle::{apply_speckle, sample_speckle_field, SpeckleParams};

    let clean = ImageGrid::constant(32, 32, 0.5).unwrap();
    let noise = sample_speckle_field(SpeckleParams::new(4, 11).unwrap(), 32, 32).unwrap();
    let noisy = apply_speckle(&clean, &noise).unwrap();
    let before = metrics::speckle_index(&noisy, 3).unwrap();

    let mut state = SolverState::new(noisy);
    let cfg = SolverConfig {
        model: ModelKind::Diffusion,
        ..Default::default()
    };
    diffusion_step(&mut state, &cfg, &DiffusivityConfig::default()).unwrap();
    let after = metrics::speckle_index(&state.curr, 3).unwrap();
    assert!(after < before, "{after} !< {before}");
}

fn brute_fom(re: &metrics::EdgeMap, te: &metrics::EdgeMap) -> f64 {
    let mut refs = Vec::new();
    let mut tests = Vec::new();
    for j in 0..re.height() {
        for i in 0..re.width() {
            if re.is_edge(i, j) {
                refs.push((i as f64, j as f64));
            }
            if te.is_edge(i, j) {
                tests.push((i as f64, j as f64));
            }
        }
    }
    let mut sum = 0.0;
    for &(ti, tj) in &tests {
        let mut d2 = f64::INFINITY;
        for &(ri, rj) in &refs {
            d2 = d2.min((ti - ri) * (ti - ri) + (tj - rj) * (tj - rj));
        }
        sum += 1.0 / (1.0 + d2 / 9.0);
    }
    sum / refs.len().max(tests.len()) as f64
}

#[test]
fn fom_matches_brute_force() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(77);
    for _ in 0..20 {
        let a: Vec<bool> = (0..64).map(|_| rng.next_f64() < 0.2).collect();
        let b: Vec<bool> = (0..64).map(|_| rng.next_f64() < 0.2).collect();
        if !a.iter().any(|&x| x) || !b.iter().any(|&x| x) {
            continue;
        }
        let ea = metrics::EdgeMap::new(8, 8, a).unwrap();
        let eb = metrics::EdgeMap::new(8, 8, b).unwrap();
        let got = metrics::figure_of_merit(&ea, &eb).unwrap();
        let want = brute_fom(&ea, &eb);
        assert!((got - want).abs() < TOL, "{got} vs {want}");
    }
}
