//! Deterministic pseudo-random test fields.
//!
//! All generators are seeded (ChaCha8), so a `(seed, grid)` pair always
//! produces the same field; verification reports stay byte-identical.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fft::dft_inverse;
use crate::grid::{Domain, GridSpec, SampledField};

/// Name of the generator family recorded in report metadata.
pub const RNG_NAME: &str = "chacha8";

/// A random band-limited field: independent uniform complex coefficients on
/// the frequency cube `|k_a| <= band`, zero elsewhere.
///
/// Coefficients are drawn in a fixed order over the frequency cube, so the
/// same `(band, seed)` pair produces the same continuum field on any grid
/// that resolves the band — refinement studies see one field at two
/// resolutions.
pub fn band_limited(grid: &GridSpec, band: usize, seed: u64) -> Result<SampledField> {
    let n = grid.dim();
    let b = band as i64;
    for a in 0..n {
        if band >= grid.samples()[a] / 2 {
            return Err(crate::error::KsError::InvalidGrid(format!(
                "band {band} is not resolved by {} samples on axis {a}",
                grid.samples()[a]
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hat = SampledField::zeros(grid.clone(), Domain::Freq);
    let mut k = vec![-b; n];
    loop {
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        hat.values[grid.ravel_wrapped(&k)] = c;
        let mut axis = n;
        for a in (0..n).rev() {
            k[a] += 1;
            if k[a] <= b {
                axis = a;
                break;
            }
            k[a] = -b;
        }
        if axis == n {
            break;
        }
    }
    dft_inverse(&hat)
}

/// A random field whose spectrum decays like `<<xi>>^(-decay)` with uniform
/// random phases; lies in `H^s` exactly for `s < decay - n/2`.
pub fn rough_spectrum(grid: &GridSpec, decay: f64, seed: u64) -> Result<SampledField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hat = SampledField::zeros(grid.clone(), Domain::Freq);
    let n = grid.dim();
    let mut scratch = vec![0usize; n];
    let mut xi = vec![0.0f64; n];
    for idx in 0..grid.len() {
        hat.grid.xi_at(idx, &mut scratch, &mut xi);
        let r2: f64 = xi.iter().map(|&v| v * v).sum();
        let amp = (1.0 + r2).powf(-decay / 2.0);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        hat.values[idx] = Complex64::from_polar(amp, phase);
    }
    dft_inverse(&hat)
}

/// A deterministic smooth bump `amp * exp(-1/(1 - |x - center|^2/width^2))`
/// supported in the ball of radius `width` around `center`.
pub fn bump_field(grid: &GridSpec, center: &[f64], width: f64, amp: f64) -> SampledField {
    crate::grid::sample(grid, |x| {
        let q: f64 = x
            .iter()
            .zip(center)
            .map(|(&xi, &ci)| {
                let d = (xi - ci) / width;
                d * d
            })
            .sum();
        if q < 1.0 {
            Complex64::new(amp * (-1.0 / (1.0 - q)).exp(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// A corpus of `count` band-limited fields with per-field derived seeds.
pub fn corpus(grid: &GridSpec, band: usize, seed: u64, count: usize) -> Result<Vec<SampledField>> {
    (0..count)
        .map(|j| band_limited(grid, band, seed.wrapping_add(1 + j as u64)))
        .collect()
}
