//! Uniform grids on the torus `[-L/2, L/2)^n` and sampled complex fields.
//!
//! Conventions used throughout the crate:
//!
//! * spatial nodes along axis `i` are `x_k = -L_i/2 + k * L_i/N_i`,
//!   `k = 0, ..., N_i - 1`;
//! * frequency nodes are `xi_k = 2*pi*wrap(k)/L_i` with `wrap` mapping the
//!   DFT index into `{-N_i/2, ..., N_i/2 - 1}`;
//! * values are stored row-major (last axis fastest).

use num_complex::Complex64;

use crate::error::{KsError, Result};

/// Which variable a field is sampled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Samples of `u(x)` at the spatial nodes.
    Space,
    /// Samples of the (approximate) Fourier transform `u^(xi)` at the
    /// frequency nodes, scaled so that they approximate the continuum
    /// integral `∫ exp(-i<x,xi>) u(x) dx`.
    Freq,
}

impl Domain {
    fn name(self) -> &'static str {
        match self {
            Domain::Space => "space",
            Domain::Freq => "frequency",
        }
    }
}

/// Shape of a discretized torus: block structure, per-axis sample counts and
/// box lengths.
///
/// The axes are grouped into consecutive blocks `n = n_1 + ... + n_j`; the
/// block structure only matters for anisotropic Bessel weights, the grid
/// itself is a plain tensor product.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    block_dims: Vec<usize>,
    samples: Vec<usize>,
    box_lengths: Vec<f64>,
}

/// Validates and builds a grid.
///
/// Requirements: at least one axis, every block dimension positive and
/// summing to the axis count, every sample count even and at least 4, every
/// box length positive and finite.
pub fn make_grid(block_dims: &[usize], samples: &[usize], box_lengths: &[f64]) -> Result<GridSpec> {
    if block_dims.is_empty() || block_dims.iter().any(|&d| d == 0) {
        return Err(KsError::InvalidGrid(
            "block dimensions must be non-empty and positive".into(),
        ));
    }
    let n: usize = block_dims.iter().sum();
    if samples.len() != n || box_lengths.len() != n {
        return Err(KsError::InvalidGrid(format!(
            "expected {} sample counts and box lengths for blocks {:?}, got {} and {}",
            n,
            block_dims,
            samples.len(),
            box_lengths.len()
        )));
    }
    for &ni in samples {
        if ni < 4 || ni % 2 != 0 {
            return Err(KsError::InvalidGrid(format!(
                "sample count {ni} is odd or tiny (need even N >= 4)"
            )));
        }
    }
    for &li in box_lengths {
        if !(li.is_finite() && li > 0.0) {
            return Err(KsError::InvalidGrid(format!("box length {li} must be positive")));
        }
    }
    let total: usize = samples.iter().product();
    if total > 1 << 28 {
        return Err(KsError::InvalidGrid(format!(
            "grid with {total} points is too large"
        )));
    }
    Ok(GridSpec {
        block_dims: block_dims.to_vec(),
        samples: samples.to_vec(),
        box_lengths: box_lengths.to_vec(),
    })
}

impl GridSpec {
    /// Total space dimension `n`.
    pub fn dim(&self) -> usize {
        self.samples.len()
    }

    /// Block structure `n = n_1 + ... + n_j`.
    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    /// Per-axis sample counts.
    pub fn samples(&self) -> &[usize] {
        &self.samples
    }

    /// Per-axis box lengths.
    pub fn box_lengths(&self) -> &[f64] {
        &self.box_lengths
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.samples.iter().product()
    }

    /// True when the grid has no points (never, for a validated grid).
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Spatial step `L_i / N_i` along an axis.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.box_lengths[axis] / self.samples[axis] as f64
    }

    /// Frequency step `2*pi / L_i` along an axis.
    pub fn freq_step(&self, axis: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.box_lengths[axis]
    }

    /// Volume element `prod_i L_i/N_i` of the spatial quadrature.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Volume element `prod_i 2*pi/L_i` of the frequency quadrature.
    pub fn freq_cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.freq_step(a)).product()
    }

    /// Volume `prod_i L_i` of the box.
    pub fn box_volume(&self) -> f64 {
        self.box_lengths.iter().product()
    }

    /// Decomposes a linear index into per-axis indices (row-major).
    pub fn unravel(&self, mut idx: usize, out: &mut [usize]) {
        for a in (0..self.dim()).rev() {
            out[a] = idx % self.samples[a];
            idx /= self.samples[a];
        }
    }

    /// Linear index of per-axis indices (row-major), wrapping each axis.
    pub fn ravel_wrapped(&self, multi: &[i64]) -> usize {
        let mut idx = 0usize;
        for a in 0..self.dim() {
            let n = self.samples[a] as i64;
            let k = multi[a].rem_euclid(n) as usize;
            idx = idx * self.samples[a] + k;
        }
        idx
    }

    /// Spatial coordinate of per-axis index `k` along `axis`.
    pub fn x_coord(&self, axis: usize, k: usize) -> f64 {
        -self.box_lengths[axis] / 2.0 + k as f64 * self.spacing(axis)
    }

    /// Signed DFT frequency integer of index `k` along `axis`
    /// (in `{-N/2, ..., N/2 - 1}`).
    pub fn freq_int(&self, axis: usize, k: usize) -> i64 {
        let n = self.samples[axis] as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Frequency coordinate `2*pi*wrap(k)/L` of per-axis index `k`.
    pub fn xi_coord(&self, axis: usize, k: usize) -> f64 {
        self.freq_int(axis, k) as f64 * self.freq_step(axis)
    }

    /// Fills `x` with the spatial coordinates of linear index `idx`.
    pub fn x_at(&self, idx: usize, scratch: &mut [usize], x: &mut [f64]) {
        self.unravel(idx, scratch);
        for a in 0..self.dim() {
            x[a] = self.x_coord(a, scratch[a]);
        }
    }

    /// Fills `xi` with the frequency coordinates of linear index `idx`.
    pub fn xi_at(&self, idx: usize, scratch: &mut [usize], xi: &mut [f64]) {
        self.unravel(idx, scratch);
        for a in 0..self.dim() {
            xi[a] = self.xi_coord(a, scratch[a]);
        }
    }

    /// Checks that another grid is identical (shape, box and blocks).
    pub fn expect_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(KsError::GridMismatch(format!(
                "grids differ: {:?}x{:?} vs {:?}x{:?}",
                self.samples, self.box_lengths, other.samples, other.box_lengths
            )));
        }
        Ok(())
    }
}

/// A complex field sampled on a grid, in either domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    /// The grid the samples live on.
    pub grid: GridSpec,
    /// Space or frequency samples.
    pub domain: Domain,
    /// Row-major sample values.
    pub values: Vec<Complex64>,
}

impl SampledField {
    /// Builds a field after checking that the value count matches the grid.
    pub fn new(grid: GridSpec, domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(KsError::GridMismatch(format!(
                "{} values for a grid with {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(SampledField { grid, domain, values })
    }

    /// Constant-zero field in the given domain.
    pub fn zeros(grid: GridSpec, domain: Domain) -> Self {
        let len = grid.len();
        SampledField {
            grid,
            domain,
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Errors unless the field is in the requested domain.
    pub fn expect_domain(&self, domain: Domain) -> Result<()> {
        if self.domain != domain {
            return Err(KsError::DomainMismatch {
                expected: domain.name(),
                got: self.domain.name(),
            });
        }
        Ok(())
    }

    /// Maximum modulus over the samples.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Samples a function of the spatial coordinates on the grid.
pub fn sample(grid: &GridSpec, f: impl Fn(&[f64]) -> Complex64) -> SampledField {
    let n = grid.dim();
    let mut scratch = vec![0usize; n];
    let mut x = vec![0.0f64; n];
    let mut values = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        grid.x_at(idx, &mut scratch, &mut x);
        values.push(f(&x));
    }
    SampledField {
        grid: grid.clone(),
        domain: Domain::Space,
        values,
    }
}

/// Samples a real-valued function of the spatial coordinates.
pub fn sample_real(grid: &GridSpec, f: impl Fn(&[f64]) -> f64) -> SampledField {
    sample(grid, |x| Complex64::new(f(x), 0.0))
}

/// Translates a space-domain field by an integer number of samples per axis
/// (circular shift): the result is `u(x - shift*dx)`.
pub fn translate(u: &SampledField, shift_samples: &[i64]) -> Result<SampledField> {
    u.expect_domain(Domain::Space)?;
    let grid = &u.grid;
    if shift_samples.len() != grid.dim() {
        return Err(KsError::GridMismatch(format!(
            "shift has {} axes, grid has {}",
            shift_samples.len(),
            grid.dim()
        )));
    }
    let n = grid.dim();
    let mut scratch = vec![0usize; n];
    let mut src = vec![0i64; n];
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (idx, out) in values.iter_mut().enumerate() {
        grid.unravel(idx, &mut scratch);
        for a in 0..n {
            src[a] = scratch[a] as i64 - shift_samples[a];
        }
        *out = u.values[grid.ravel_wrapped(&src)];
    }
    SampledField::new(grid.clone(), Domain::Space, values)
}

/// Translation by an integer lattice vector `gamma` (physical units); errors
/// unless each `gamma_i / dx_i` is an integer number of samples.
pub fn translate_lattice(u: &SampledField, gamma: &[i64]) -> Result<SampledField> {
    let grid = &u.grid;
    let mut shift = vec![0i64; grid.dim()];
    for a in 0..grid.dim() {
        let per_unit = grid.samples[a] as f64 / grid.box_lengths[a];
        let s = gamma[a] as f64 * per_unit;
        if (s - s.round()).abs() > 1e-9 {
            return Err(KsError::Window(format!(
                "unit translation along axis {a} is not grid-commensurate \
                 (N/L = {per_unit} is not an integer)"
            )));
        }
        shift[a] = s.round() as i64;
    }
    translate(u, &shift)
}

/// Discrete `L^2(torus)` norm `(sum |u_k|^2 dx)^(1/2)` of a space field.
pub fn l2_norm(u: &SampledField) -> Result<f64> {
    u.expect_domain(Domain::Space)?;
    let s: f64 = u.values.iter().map(|v| v.norm_sqr()).sum();
    Ok((s * u.grid.cell_volume()).sqrt())
}

/// Pointwise product of two space fields on the same grid (no de-aliasing;
/// see `sobolev::multiply` for the padded version).
pub fn pointwise_mul(u: &SampledField, v: &SampledField) -> Result<SampledField> {
    u.expect_domain(Domain::Space)?;
    v.expect_domain(Domain::Space)?;
    u.grid.expect_same(&v.grid)?;
    let values = u
        .values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| a * b)
        .collect();
    SampledField::new(u.grid.clone(), Domain::Space, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize, l: f64) -> GridSpec {
        make_grid(&[1], &[n], &[l]).unwrap()
    }

    #[test]
    fn make_grid_rejects_odd_or_tiny_sample_counts() {
        assert!(make_grid(&[1], &[5], &[1.0]).is_err());
        assert!(make_grid(&[1], &[2], &[1.0]).is_err());
        assert!(make_grid(&[1], &[0], &[1.0]).is_err());
        assert!(make_grid(&[2], &[8], &[1.0]).is_err()); // shape mismatch
        assert!(make_grid(&[1], &[8], &[-1.0]).is_err());
        assert!(make_grid(&[1, 1], &[8, 16], &[1.0, 2.0]).is_ok());
    }

    #[test]
    fn coordinates_follow_the_stated_conventions() {
        let g = grid1(8, 4.0);
        assert_eq!(g.x_coord(0, 0), -2.0);
        assert_eq!(g.x_coord(0, 4), 0.0);
        assert_eq!(g.spacing(0), 0.5);
        // frequency integers wrap into {-4,...,3}
        let ints: Vec<i64> = (0..8).map(|k| g.freq_int(0, k)).collect();
        assert_eq!(ints, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!((g.xi_coord(0, 1) - std::f64::consts::PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn translate_round_trips() {
        let g = grid1(16, 8.0);
        let u = sample(&g, |x| Complex64::new(x[0].sin(), x[0].cos()));
        let fwd = translate(&u, &[3]).unwrap();
        let back = translate(&fwd, &[-3]).unwrap();
        for (a, b) in u.values.iter().zip(&back.values) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn translate_lattice_requires_commensurate_units() {
        let g = grid1(16, 8.0); // 2 samples per unit
        let u = sample(&g, |x| Complex64::new(x[0], 0.0));
        assert!(translate_lattice(&u, &[1]).is_ok());
        let g2 = make_grid(&[1], &[16], &[3.0]).unwrap(); // 16/3 per unit
        let u2 = sample(&g2, |x| Complex64::new(x[0], 0.0));
        assert!(translate_lattice(&u2, &[1]).is_err());
    }

    #[test]
    fn l2_norm_of_constant_matches_box_volume() {
        let g = make_grid(&[2], &[8, 8], &[2.0, 3.0]).unwrap();
        let u = sample(&g, |_| Complex64::new(1.0, 0.0));
        let n = l2_norm(&u).unwrap();
        assert!((n - 6.0f64.sqrt()).abs() < 1e-12);
    }
}
