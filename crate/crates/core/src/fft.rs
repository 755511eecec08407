//! Physically scaled discrete Fourier transforms.
//!
//! `dft_forward` approximates the continuum transform
//! `u^(xi) = ∫ exp(-i<x,xi>) u(x) dx` by the Riemann sum over the grid, and
//! `dft_inverse` approximates `u(x) = (2*pi)^(-n) ∫ exp(i<x,xi>) u^(xi) dxi`.
//! Because the spatial origin sits in the middle of the box, each frequency
//! bin carries an extra sign `(-1)^(m_1 + ... + m_n)` relative to the raw
//! index-space DFT; the helpers below fold that sign and the quadrature
//! weights into the transform so that round trips are exact to rounding.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::grid::{Domain, GridSpec, SampledField};

/// Applies an in-place FFT along `axis` of a row-major tensor.
fn fft_axis(values: &mut [Complex64], grid: &GridSpec, axis: usize, inverse: bool) {
    let n = grid.samples()[axis];
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    // stride between consecutive entries along `axis`, and number of lines
    let stride: usize = grid.samples()[axis + 1..].iter().product();
    let outer: usize = grid.samples()[..axis].iter().product();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        let base_outer = o * n * stride;
        for s in 0..stride {
            let base = base_outer + s;
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = values[base + k * stride];
            }
            fft.process(&mut line);
            for (k, slot) in line.iter().enumerate() {
                values[base + k * stride] = *slot;
            }
        }
    }
}

/// Multiplies each entry by `(-1)^(sum of signed frequency integers)`.
fn apply_center_signs(values: &mut [Complex64], grid: &GridSpec) {
    let n = grid.dim();
    let mut scratch = vec![0usize; n];
    for (idx, v) in values.iter_mut().enumerate() {
        grid.unravel(idx, &mut scratch);
        let parity: i64 = (0..n).map(|a| grid.freq_int(a, scratch[a])).sum();
        if parity.rem_euclid(2) == 1 {
            *v = -*v;
        }
    }
}

/// Forward transform: space samples to physically scaled frequency samples.
pub fn dft_forward(u: &SampledField) -> Result<SampledField> {
    u.expect_domain(Domain::Space)?;
    let grid = u.grid.clone();
    let mut values = u.values.clone();
    for axis in 0..grid.dim() {
        fft_axis(&mut values, &grid, axis, false);
    }
    let w = grid.cell_volume();
    for v in values.iter_mut() {
        *v *= w;
    }
    apply_center_signs(&mut values, &grid);
    SampledField::new(grid, Domain::Freq, values)
}

/// Inverse transform: frequency samples back to space samples.
pub fn dft_inverse(uh: &SampledField) -> Result<SampledField> {
    uh.expect_domain(Domain::Freq)?;
    let grid = uh.grid.clone();
    let mut values = uh.values.clone();
    apply_center_signs(&mut values, &grid);
    for axis in 0..grid.dim() {
        fft_axis(&mut values, &grid, axis, true);
    }
    let w = 1.0 / grid.box_volume();
    for v in values.iter_mut() {
        *v *= w;
    }
    SampledField::new(grid, Domain::Space, values)
}

/// Returns the field in frequency domain, transforming if necessary.
pub fn to_freq(u: &SampledField) -> Result<SampledField> {
    match u.domain {
        Domain::Freq => Ok(u.clone()),
        Domain::Space => dft_forward(u),
    }
}

/// Returns the field in space domain, transforming if necessary.
pub fn to_space(u: &SampledField) -> Result<SampledField> {
    match u.domain {
        Domain::Space => Ok(u.clone()),
        Domain::Freq => dft_inverse(u),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{l2_norm, make_grid, sample};
    use std::f64::consts::PI;

    #[test]
    fn constant_field_transforms_to_a_single_bin_of_mass_box_volume() {
        // u = 1 on L = 2*pi: the continuum integral over the box is 2*pi,
        // concentrated in the zero bin.
        let g = make_grid(&[1], &[64], &[2.0 * PI]).unwrap();
        let u = sample(&g, |_| Complex64::new(1.0, 0.0));
        let uh = dft_forward(&u).unwrap();
        assert!((uh.values[0].re - 2.0 * PI).abs() < 1e-12);
        assert!(uh.values[0].im.abs() < 1e-12);
        for v in &uh.values[1..] {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn pure_mode_lands_on_its_frequency_bin() {
        // u = exp(3 i x) on L = 2*pi: bin at wrapped index 3 carries 2*pi.
        let g = make_grid(&[1], &[32], &[2.0 * PI]).unwrap();
        let u = sample(&g, |x| Complex64::new(0.0, 3.0 * x[0]).exp());
        let uh = dft_forward(&u).unwrap();
        for k in 0..32 {
            let expect = if g.freq_int(0, k) == 3 { 2.0 * PI } else { 0.0 };
            assert!(
                (uh.values[k].re - expect).abs() < 1e-10 && uh.values[k].im.abs() < 1e-10,
                "bin {k}: {:?}",
                uh.values[k]
            );
        }
    }

    #[test]
    fn round_trip_is_exact_to_rounding() {
        let g = make_grid(&[1, 1], &[16, 8], &[4.0, 2.0]).unwrap();
        let u = sample(&g, |x| {
            Complex64::new((2.0 * PI * x[0] / 4.0).sin(), (PI * x[1]).cos())
        });
        let back = dft_inverse(&dft_forward(&u).unwrap()).unwrap();
        for (a, b) in u.values.iter().zip(&back.values) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn parseval_holds_with_the_physical_scalings() {
        // sum |u|^2 dx == (2 pi)^(-n) sum |u^|^2 dxi
        let g = make_grid(&[2], &[16, 16], &[4.0, 8.0]).unwrap();
        let u = sample(&g, |x| {
            Complex64::new(
                (-x[0] * x[0] - 0.5 * x[1] * x[1]).exp(),
                0.3 * (PI * x[0] / 2.0).sin(),
            )
        });
        let space = l2_norm(&u).unwrap().powi(2);
        let uh = dft_forward(&u).unwrap();
        let freq: f64 = uh.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
            * g.freq_cell_volume()
            / (2.0 * PI).powi(2);
        assert!(
            (space - freq).abs() < 1e-12 * space.max(1.0),
            "{space} vs {freq}"
        );
    }
}
