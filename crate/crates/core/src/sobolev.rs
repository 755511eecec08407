//! Sobolev norms and Fourier multipliers on the torus grid.
//!
//! With the physically scaled transform of [`crate::fft`], the `H^s` norm is
//! realized as
//! `||u||_{H^s}^2 = (2 pi)^(-n) sum_k <<xi_k>>^(2s) |u^(xi_k)|^2 dxi`,
//! derivatives act as multiplication by `i xi_j`, and pointwise products are
//! de-aliased by doubling the grid before multiplying.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{KsError, Result};
use crate::fft::{dft_forward, dft_inverse, to_freq};
use crate::grid::{Domain, GridSpec, SampledField};
use crate::weights::{conv_bound_constant, multi_bracket, sigma_eps, BlockOrder};

/// Multiplies a frequency field in place by a symbol of the frequency.
pub fn apply_symbol(uh: &mut SampledField, symbol: impl Fn(&[f64]) -> Complex64) -> Result<()> {
    uh.expect_domain(Domain::Freq)?;
    let grid = uh.grid.clone();
    let n = grid.dim();
    let mut scratch = vec![0usize; n];
    let mut xi = vec![0.0f64; n];
    for (idx, v) in uh.values.iter_mut().enumerate() {
        grid.xi_at(idx, &mut scratch, &mut xi);
        *v *= symbol(&xi);
    }
    Ok(())
}

/// Bessel multiplier `<<D>>^s u`, i.e. multiplication of the spectrum by
/// `<<xi>>^s`; the result is returned in the domain of the input.
pub fn bessel_apply(u: &SampledField, s: &BlockOrder) -> Result<SampledField> {
    s.expect_compatible(&u.grid)?;
    let mut uh = to_freq(u)?;
    apply_symbol(&mut uh, |xi| Complex64::new(multi_bracket(xi, s), 0.0))?;
    match u.domain {
        Domain::Space => dft_inverse(&uh),
        Domain::Freq => Ok(uh),
    }
}

/// `H^s` norm of a field.
pub fn h_norm(u: &SampledField, s: &BlockOrder) -> Result<f64> {
    s.expect_compatible(&u.grid)?;
    let uh = to_freq(u)?;
    let grid = &uh.grid;
    let n = grid.dim();
    let mut scratch = vec![0usize; n];
    let mut xi = vec![0.0f64; n];
    let s2 = s.scale(2.0);
    let mut acc = 0.0;
    for (idx, v) in uh.values.iter().enumerate() {
        grid.xi_at(idx, &mut scratch, &mut xi);
        acc += multi_bracket(&xi, &s2) * v.norm_sqr();
    }
    let weight = grid.freq_cell_volume() / (2.0 * std::f64::consts::PI).powi(n as i32);
    Ok((acc * weight).sqrt())
}

/// Spectral partial derivative along an axis (multiplication by `i xi_j`).
pub fn derivative(u: &SampledField, axis: usize) -> Result<SampledField> {
    if axis >= u.grid.dim() {
        return Err(KsError::GridMismatch(format!(
            "axis {axis} out of range for an {}-dimensional grid",
            u.grid.dim()
        )));
    }
    let mut uh = to_freq(u)?;
    apply_symbol(&mut uh, |xi| Complex64::new(0.0, xi[axis]))?;
    match u.domain {
        Domain::Space => dft_inverse(&uh),
        Domain::Freq => Ok(uh),
    }
}

/// Modulation `exp(i <x, eta>) u(x)` by a lattice frequency
/// `eta = (2 pi m_1/L_1, ..., 2 pi m_n/L_n)`.
pub fn modulate(u: &SampledField, eta_ints: &[i64]) -> Result<SampledField> {
    u.expect_domain(Domain::Space)?;
    let grid = &u.grid;
    if eta_ints.len() != grid.dim() {
        return Err(KsError::GridMismatch("modulation index has wrong arity".into()));
    }
    let n = grid.dim();
    let mut scratch = vec![0usize; n];
    let mut x = vec![0.0f64; n];
    let mut values = Vec::with_capacity(grid.len());
    for (idx, v) in u.values.iter().enumerate() {
        grid.x_at(idx, &mut scratch, &mut x);
        let phase: f64 = (0..n)
            .map(|a| eta_ints[a] as f64 * grid.freq_step(a) * x[a])
            .sum();
        values.push(v * Complex64::new(0.0, phase).exp());
    }
    SampledField::new(grid.clone(), Domain::Space, values)
}

/// Physical frequency vector of a lattice modulation index.
pub fn eta_of_ints(grid: &GridSpec, eta_ints: &[i64]) -> Vec<f64> {
    (0..grid.dim())
        .map(|a| eta_ints[a] as f64 * grid.freq_step(a))
        .collect()
}

// ---------------------------------------------------------------------------
// De-aliased products.
// ---------------------------------------------------------------------------

/// Embeds a spectrum into a grid with doubled per-axis sample counts
/// (same box), leaving the new high-frequency bins zero.
fn upsample_spectrum(uh: &SampledField) -> Result<SampledField> {
    uh.expect_domain(Domain::Freq)?;
    let grid = &uh.grid;
    let n = grid.dim();
    let fine_samples: Vec<usize> = grid.samples().iter().map(|&m| 2 * m).collect();
    let fine = crate::grid::make_grid(grid.block_dims(), &fine_samples, grid.box_lengths())?;
    let mut out = SampledField::zeros(fine.clone(), Domain::Freq);
    let mut scratch = vec![0usize; n];
    let mut multi = vec![0i64; n];
    for (idx, v) in uh.values.iter().enumerate() {
        grid.unravel(idx, &mut scratch);
        for a in 0..n {
            multi[a] = grid.freq_int(a, scratch[a]);
        }
        out.values[fine.ravel_wrapped(&multi)] = *v;
    }
    Ok(out)
}

/// Restricts a fine-grid spectrum back to the coarse grid's frequency range.
fn downsample_spectrum(uh: &SampledField, coarse: &GridSpec) -> Result<SampledField> {
    uh.expect_domain(Domain::Freq)?;
    let n = coarse.dim();
    let mut out = SampledField::zeros(coarse.clone(), Domain::Freq);
    let mut scratch = vec![0usize; n];
    let mut multi = vec![0i64; n];
    for idx in 0..coarse.len() {
        coarse.unravel(idx, &mut scratch);
        for a in 0..n {
            multi[a] = coarse.freq_int(a, scratch[a]);
        }
        out.values[idx] = uh.values[uh.grid.ravel_wrapped(&multi)];
    }
    Ok(out)
}

/// Pointwise product with 2x zero padding: both spectra are embedded in a
/// doubled grid, multiplied in space there, and the product spectrum is
/// truncated back, so products of band-limited fields are alias-free.
pub fn multiply(u: &SampledField, v: &SampledField) -> Result<SampledField> {
    u.grid.expect_same(&v.grid)?;
    let uh = to_freq(u)?;
    let vh = to_freq(v)?;
    let uf = dft_inverse(&upsample_spectrum(&uh)?)?;
    let vf = dft_inverse(&upsample_spectrum(&vh)?)?;
    let prod = crate::grid::pointwise_mul(&uf, &vf)?;
    let ph = dft_forward(&prod)?;
    let coarse_spec = downsample_spectrum(&ph, &u.grid)?;
    match u.domain {
        Domain::Space => dft_inverse(&coarse_spec),
        Domain::Freq => Ok(coarse_spec),
    }
}

/// Result of measuring the Sobolev product inequality
/// `||uv||_{H^sigma} <= sqrt(C(s,t,eps,n)) (2 pi)^(-n/2) ||u||_{H^s} ||v||_{H^t}`.
#[derive(Debug, Clone, Serialize)]
pub struct ProductCheck {
    /// Measured `||uv||_{H^sigma}`.
    pub product_norm: f64,
    /// Measured `||u||_{H^s} ||v||_{H^t}`.
    pub factor_norms: f64,
    /// Measured ratio `product_norm / factor_norms`.
    pub ratio: f64,
    /// The analytic bound on the ratio.
    pub bound: f64,
    /// `ratio <= bound`.
    pub within_bound: bool,
}

/// Measures the product inequality for one pair of fields.
pub fn product_inequality_check(
    u: &SampledField,
    v: &SampledField,
    s: &BlockOrder,
    t: &BlockOrder,
    eps: &[f64],
) -> Result<ProductCheck> {
    let sigma = sigma_eps(s, t, eps)?;
    let nu = h_norm(u, s)?;
    let nv = h_norm(v, t)?;
    if nu == 0.0 || nv == 0.0 {
        return Err(KsError::Check("zero factor in product inequality check".into()));
    }
    let uv = multiply(u, v)?;
    let nuv = h_norm(&uv, &sigma)?;
    let n = u.grid.dim() as i32;
    let bound =
        conv_bound_constant(s, t, eps)?.sqrt() / (2.0 * std::f64::consts::PI).powi(n).sqrt();
    let ratio = nuv / (nu * nv);
    Ok(ProductCheck {
        product_norm: nuv,
        factor_norms: nu * nv,
        ratio,
        bound,
        within_bound: ratio <= bound,
    })
}

/// Multiplies a field by the trigonometric polynomial
/// `chi(x) = sum_gamma c_gamma exp(2 pi i <x, gamma>)` (gamma over integer
/// vectors) and measures the norm against the modulation bound
/// `||chi u||_{H^s} <= 2^(|s|_1/2) (sum_gamma <2 pi gamma>^{|s|_1} |c_gamma|) ||u||_{H^s}`.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicMultiplyCheck {
    /// Measured `||chi u||_{H^s}`.
    pub norm: f64,
    /// The modulation-sum bound.
    pub bound: f64,
    /// `norm <= bound`.
    pub within_bound: bool,
}

/// The periodic multiplier, returned together with the measured bound.
/// Requires integer box lengths so that every `2 pi gamma` lies on the
/// frequency lattice.
pub fn multiply_periodic(
    u: &SampledField,
    coeffs: &[(Vec<i64>, Complex64)],
    s: &BlockOrder,
) -> Result<(SampledField, PeriodicMultiplyCheck)> {
    u.expect_domain(Domain::Space)?;
    let grid = &u.grid;
    for &l in grid.box_lengths() {
        if (l - l.round()).abs() > 1e-12 {
            return Err(KsError::Window(format!(
                "periodic multipliers need integer box lengths, got {l}"
            )));
        }
    }
    let n = grid.dim();
    let mut acc = SampledField::zeros(grid.clone(), Domain::Space);
    let mut bound_sum = 0.0;
    let two_pi = 2.0 * std::f64::consts::PI;
    for (gamma, c) in coeffs {
        if gamma.len() != n {
            return Err(KsError::GridMismatch("coefficient index has wrong arity".into()));
        }
        // exp(2 pi i <x, gamma>) is the lattice modulation with
        // m_a = gamma_a * L_a.
        let eta_ints: Vec<i64> = (0..n)
            .map(|a| gamma[a] * grid.box_lengths()[a].round() as i64)
            .collect();
        let term = modulate(u, &eta_ints)?;
        for (slot, t) in acc.values.iter_mut().zip(&term.values) {
            *slot += c * t;
        }
        let eta: Vec<f64> = (0..n).map(|a| two_pi * gamma[a] as f64).collect();
        bound_sum += crate::weights::bracket_pow(&eta, s.total_abs()) * c.norm();
    }
    let factor = (0.5 * s.total_abs() * std::f64::consts::LN_2).exp();
    let bound = factor * bound_sum * h_norm(u, s)?;
    let norm = h_norm(&acc, s)?;
    let check = PeriodicMultiplyCheck {
        norm,
        bound,
        within_bound: norm <= bound * (1.0 + 1e-12),
    };
    Ok((acc, check))
}

/// Result of the `F^(-1) L^1` embedding measurement.
#[derive(Debug, Clone, Serialize)]
pub struct FourierL1Check {
    /// Discrete `(2 pi)^(-n) ||u^||_{L^1}`.
    pub l1_bound: f64,
    /// Measured `sup |u|`.
    pub sup_norm: f64,
    /// `sup_norm <= l1_bound (1 + 1e-9)`.
    pub within_bound: bool,
}

/// Checks the embedding `sup |u| <= (2 pi)^(-n) ||u^||_{L^1}`; requires
/// `s_l > n_l / 2` on every block (the condition under which `H^s` embeds
/// into `F^(-1) L^1`).
pub fn fourier_l1_bound(u: &SampledField, s: &BlockOrder) -> Result<FourierL1Check> {
    s.expect_compatible(&u.grid)?;
    for (l, &d) in s.block_dims().iter().enumerate() {
        if s.orders()[l] <= d as f64 / 2.0 {
            return Err(KsError::InvalidOrder(format!(
                "block {l}: the sup-norm embedding needs s_l > n_l/2"
            )));
        }
    }
    let uh = to_freq(u)?;
    let n = u.grid.dim() as i32;
    let l1 = uh.values.iter().map(|v| v.norm()).sum::<f64>() * uh.grid.freq_cell_volume()
        / (2.0 * std::f64::consts::PI).powi(n);
    let us = crate::fft::to_space(u)?;
    let sup = us.max_abs();
    Ok(FourierL1Check {
        l1_bound: l1,
        sup_norm: sup,
        within_bound: sup <= l1 * (1.0 + 1e-9),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample};
    use std::f64::consts::PI;

    fn circle_grid(n: usize) -> GridSpec {
        make_grid(&[1], &[n], &[2.0 * PI]).unwrap()
    }

    #[test]
    fn bessel_multiplier_scales_a_pure_mode_by_its_bracket() {
        // <<D>>^1 exp(i x) = sqrt(2) exp(i x).
        let g = circle_grid(64);
        let u = sample(&g, |x| Complex64::new(0.0, x[0]).exp());
        let s = BlockOrder::isotropic(1.0, 1).unwrap();
        let bu = bessel_apply(&u, &s).unwrap();
        for (a, b) in u.values.iter().zip(&bu.values) {
            assert!((b - a * 2.0f64.sqrt()).norm() < 1e-10);
        }
    }

    #[test]
    fn h_norm_of_a_pure_mode_matches_the_hand_value() {
        // ||exp(i x)||_{H^1} on L = 2 pi is sqrt(2) sqrt(2 pi).
        let g = circle_grid(64);
        let u = sample(&g, |x| Complex64::new(0.0, x[0]).exp());
        let s = BlockOrder::isotropic(1.0, 1).unwrap();
        let n = h_norm(&u, &s).unwrap();
        let expect = 2.0f64.sqrt() * (2.0 * PI).sqrt();
        assert!((n - expect).abs() < 1e-10, "{n} vs {expect}");
    }

    #[test]
    fn derivative_is_exact_on_trigonometric_polynomials() {
        let g = circle_grid(32);
        let u = sample(&g, |x| Complex64::new((3.0 * x[0]).sin(), 0.0));
        let du = derivative(&u, 0).unwrap();
        let expect = sample(&g, |x| Complex64::new(3.0 * (3.0 * x[0]).cos(), 0.0));
        for (a, b) in du.values.iter().zip(&expect.values) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn norm_splits_exactly_into_derivatives() {
        // ||u||_{H^s}^2 = ||u||_{H^(s-1)}^2 + sum_k ||d_k u||_{H^(s-1)}^2.
        let g = make_grid(&[2], &[32, 32], &[8.0, 8.0]).unwrap();
        let u = sample(&g, |x| {
            Complex64::new((-x[0] * x[0] - x[1] * x[1]).exp(), 0.1 * x[0].sin())
        });
        let s = BlockOrder::isotropic(1.7, 2).unwrap();
        let sm1 = s.shift(-1.0);
        let lhs = h_norm(&u, &s).unwrap().powi(2);
        let mut rhs = h_norm(&u, &sm1).unwrap().powi(2);
        for axis in 0..2 {
            rhs += h_norm(&derivative(&u, axis).unwrap(), &sm1).unwrap().powi(2);
        }
        assert!((lhs - rhs).abs() < 1e-9 * lhs, "{lhs} vs {rhs}");
    }

    #[test]
    fn modulation_bound_holds_with_ratio_at_most_one() {
        let g = make_grid(&[1], &[64], &[4.0]).unwrap();
        let u = sample(&g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
        for &sv in &[-1.5, 0.0, 2.0] {
            let s = BlockOrder::isotropic(sv, 1).unwrap();
            let m = modulate(&u, &[3]).unwrap();
            let eta = eta_of_ints(&g, &[3]);
            let bound = (0.5 * s.total_abs() * std::f64::consts::LN_2).exp()
                * multi_bracket(&eta, &s.abs())
                * h_norm(&u, &s).unwrap();
            let lhs = h_norm(&m, &s).unwrap();
            assert!(lhs <= bound * (1.0 + 1e-12), "s={sv}: {lhs} vs {bound}");
        }
    }

    #[test]
    fn padded_product_of_two_modes_is_exact() {
        // exp(i 3 x) * exp(i 4 x) = exp(i 7 x); both factors and the product
        // are band-limited, so the padded product is exact to rounding even
        // though 3 + 4 aliases on the half-size spectrum of a plain product.
        let g = circle_grid(16);
        let u = sample(&g, |x| Complex64::new(0.0, 3.0 * x[0]).exp());
        let v = sample(&g, |x| Complex64::new(0.0, 4.0 * x[0]).exp());
        let uv = multiply(&u, &v).unwrap();
        let expect = sample(&g, |x| Complex64::new(0.0, 7.0 * x[0]).exp());
        for (a, b) in uv.values.iter().zip(&expect.values) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn product_inequality_holds_for_gaussians() {
        let g = make_grid(&[1], &[128], &[16.0]).unwrap();
        let u = sample(&g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
        let v = sample(&g, |x| Complex64::new((-0.5 * x[0] * x[0]).exp() * x[0], 0.0));
        let s = BlockOrder::isotropic(1.0, 1).unwrap();
        let t = BlockOrder::isotropic(1.0, 1).unwrap();
        let out = product_inequality_check(&u, &v, &s, &t, &[0.25]).unwrap();
        assert!(out.within_bound, "{out:?}");
    }

    #[test]
    fn periodic_multiplier_respects_the_modulation_bound() {
        let g = make_grid(&[1], &[128], &[8.0]).unwrap();
        let u = sample(&g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
        let s = BlockOrder::isotropic(1.5, 1).unwrap();
        let coeffs = vec![
            (vec![0], Complex64::new(0.7, 0.0)),
            (vec![1], Complex64::new(0.2, 0.1)),
            (vec![-1], Complex64::new(0.2, -0.1)),
        ];
        let (_, check) = multiply_periodic(&u, &coeffs, &s).unwrap();
        assert!(check.within_bound, "{check:?}");
    }

    #[test]
    fn sup_norm_is_controlled_by_the_spectrum_l1_norm() {
        let g = make_grid(&[1], &[128], &[16.0]).unwrap();
        let u = sample(&g, |x| Complex64::new((-x[0] * x[0]).exp() * (1.0 + x[0].cos()), 0.0));
        let s = BlockOrder::isotropic(1.0, 1).unwrap();
        let out = fourier_l1_bound(&u, &s).unwrap();
        assert!(out.within_bound, "{out:?}");
        let bad = BlockOrder::isotropic(0.4, 1).unwrap();
        assert!(fourier_l1_bound(&u, &bad).is_err());
    }
}
