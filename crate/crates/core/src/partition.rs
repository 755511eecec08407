//! Smooth bump windows, lattice partitions of unity, lattice decompositions
//! of a field, and the split/assemble retract pair.
//!
//! The partition is built from the tensor bump `h~` that equals 1 on
//! `[1/3, 2/3]^n` and vanishes outside `[1/4, 3/4]^n`, translated to the 3^n
//! points of the `(1/3) Z^n` lattice inside the unit cell and normalized by
//! the periodized sum `H~ >= 1`.  The resulting `h_i` sum to a function `h`
//! whose integer translates sum to 1, and the periodized `chi_i = sum_gamma
//! tau_gamma h_i` sum to 1 as well.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{KsError, Result};
use crate::fft::dft_forward;
use crate::grid::{sample_real, translate, Domain, GridSpec, SampledField};
use crate::sobolev::h_norm;
use crate::weights::BlockOrder;

/// A one-dimensional `C^inf` plateau profile: 0 outside `[a, d]`, 1 on
/// `[b, c]`, with `exp(-1/t)` smoothstep transitions on `[a, b]` and
/// `[c, d]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile1d {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

fn expm(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smoothstep: 0 for `t <= 0`, 1 for `t >= 1`, `C^inf` monotone in between.
fn smoothstep(t: f64) -> f64 {
    let f = expm(t);
    let g = expm(1.0 - t);
    if f == 0.0 {
        0.0
    } else if g == 0.0 {
        1.0
    } else {
        f / (f + g)
    }
}

/// Builds a plateau profile; requires `a < b <= c < d`.
pub fn bump_profile(a: f64, b: f64, c: f64, d: f64) -> Result<Profile1d> {
    if !(a < b && b <= c && c < d) {
        return Err(KsError::Window(format!(
            "profile breakpoints must satisfy a < b <= c < d, got {a}, {b}, {c}, {d}"
        )));
    }
    Ok(Profile1d { a, b, c, d })
}

impl Profile1d {
    /// Evaluates the profile at a point.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.d {
            0.0
        } else if x < self.b {
            smoothstep((x - self.a) / (self.b - self.a))
        } else if x <= self.c {
            1.0
        } else {
            smoothstep((self.d - x) / (self.d - self.c))
        }
    }

    /// Support interval `[a, d]`.
    pub fn support(&self) -> (f64, f64) {
        (self.a, self.d)
    }

    /// The translated profile.
    pub fn translated(&self, c: f64) -> Profile1d {
        Profile1d {
            a: self.a + c,
            b: self.b + c,
            c: self.c + c,
            d: self.d + c,
        }
    }
}

/// A sampled window together with per-axis support intervals (in physical
/// coordinates, before wrapping onto the torus).
#[derive(Debug, Clone)]
pub struct Window {
    /// The window samples (space domain).
    pub field: SampledField,
    /// Per-axis support intervals.
    pub support: Vec<(f64, f64)>,
}

/// Samples the tensor product of per-axis profiles on a grid, folding the
/// support onto the torus; requires each support width to fit in the box.
pub fn window_from_profiles(grid: &GridSpec, profiles: &[Profile1d]) -> Result<Window> {
    if profiles.len() != grid.dim() {
        return Err(KsError::Window("one profile per axis required".into()));
    }
    for (a, p) in profiles.iter().enumerate() {
        let (lo, hi) = p.support();
        if hi - lo > grid.box_lengths()[a] {
            return Err(KsError::Window(format!(
                "axis {a}: support width {} exceeds box length {}",
                hi - lo,
                grid.box_lengths()[a]
            )));
        }
    }
    let field = sample_real(grid, |x| {
        let mut v = 1.0;
        for (a, p) in profiles.iter().enumerate() {
            let l = grid.box_lengths()[a];
            let mut axis = 0.0;
            // fold the real-line profile onto the torus
            let mut m = ((p.support().0 - x[a]) / l).floor();
            loop {
                let shifted = x[a] + m * l;
                if shifted > p.support().1 {
                    break;
                }
                axis += p.eval(shifted);
                m += 1.0;
            }
            v *= axis;
        }
        v
    });
    Ok(Window {
        field,
        support: profiles.iter().map(|p| p.support()).collect(),
    })
}

/// Number of grid samples per unit length along an axis; errors unless the
/// integer lattice is a sub-lattice of the grid.
pub fn unit_shift_samples(grid: &GridSpec, axis: usize) -> Result<i64> {
    let l = grid.box_lengths()[axis];
    if (l - l.round()).abs() > 1e-12 || l.round() < 1.0 {
        return Err(KsError::Window(format!(
            "axis {axis}: box length {l} is not a positive integer"
        )));
    }
    let per_unit = grid.samples()[axis] as f64 / l.round();
    if (per_unit - per_unit.round()).abs() > 1e-9 {
        return Err(KsError::Window(format!(
            "axis {axis}: {} samples over length {l} put the unit lattice off-grid",
            grid.samples()[axis]
        )));
    }
    Ok(per_unit.round() as i64)
}

/// All lattice vectors of one fundamental domain, `gamma_a in {0, ..., L_a - 1}`.
pub fn lattice_points(grid: &GridSpec) -> Result<Vec<Vec<i64>>> {
    let n = grid.dim();
    let mut sizes = Vec::with_capacity(n);
    for a in 0..n {
        unit_shift_samples(grid, a)?;
        sizes.push(grid.box_lengths()[a].round() as i64);
    }
    let mut out = vec![vec![0i64; n]];
    for a in 0..n {
        let mut next = Vec::with_capacity(out.len() * sizes[a] as usize);
        for g in &out {
            for v in 0..sizes[a] {
                let mut g2 = g.clone();
                g2[a] = v;
                next.push(g2);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Circular shift of a space field by an integer lattice vector.
pub fn translate_units(u: &SampledField, gamma: &[i64]) -> Result<SampledField> {
    let n = u.grid.dim();
    let mut shift = vec![0i64; n];
    for a in 0..n {
        shift[a] = gamma[a] * unit_shift_samples(&u.grid, a)?;
    }
    translate(u, &shift)
}

/// The lattice partition of unity subordinate to the unit lattice.
#[derive(Debug, Clone)]
pub struct PartitionFamily {
    /// The 3^n offsets `x_i` in `{-1/3, 0, 1/3}^n`.
    pub points: Vec<Vec<f64>>,
    /// The local pieces `h_i = tau_(x_i) h~ / H~` (windows with support
    /// `x_i + [1/4, 3/4]^n`).
    pub pieces: Vec<Window>,
    /// The periodized pieces `chi_i = sum_gamma tau_gamma h_i`; these sum
    /// to 1 on the grid.
    pub periodized: Vec<SampledField>,
    /// The window `h = sum_i h_i` whose integer translates sum to 1.
    pub window: Window,
    /// The normalizer `H~` (positive, `>= 1` up to rounding).
    pub normalizer: SampledField,
}

/// Builds the partition on a grid with integer box lengths; errors when the
/// unit lattice is off-grid or the `[1/4, 1/3]` transition of the bump is
/// resolved by fewer than 8 samples.
pub fn build_partition(grid: &GridSpec) -> Result<PartitionFamily> {
    let n = grid.dim();
    for a in 0..n {
        let per_unit = unit_shift_samples(grid, a)?;
        if per_unit < 96 {
            return Err(KsError::Window(format!(
                "axis {a}: {per_unit} samples per unit resolve the [1/4, 1/3] \
                 transition with fewer than 8 samples"
            )));
        }
    }
    let base = bump_profile(0.25, 1.0 / 3.0, 2.0 / 3.0, 0.75)?;
    let offsets = [-1.0 / 3.0, 0.0, 1.0 / 3.0];

    // Per-axis tables.  For the local pieces, one copy of the bump
    // `base(. - offset_c)` is folded onto the torus (periodization with the
    // box length), while the normalizer H~ sums over the full integer
    // lattice.  Everything is separable because both the bump and the offset
    // lattice are tensor products.
    let mut tables: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n);
    let mut axis_h: Vec<Vec<f64>> = Vec::with_capacity(n);
    for a in 0..n {
        let na = grid.samples()[a];
        let la = grid.box_lengths()[a].round();
        let mut per_offset = vec![vec![0.0f64; na]; offsets.len()];
        let mut hsum = vec![0.0f64; na];
        for k in 0..na {
            let x = grid.x_coord(a, k);
            for (ci, &c) in offsets.iter().enumerate() {
                // single copy, folded with the box period
                let mut fold = 0.0;
                let m0 = ((x - c - 0.75) / la).floor() as i64 - 1;
                let m1 = ((x - c - 0.25) / la).ceil() as i64 + 1;
                for m in m0..=m1 {
                    fold += base.eval(x - c - m as f64 * la);
                }
                per_offset[ci][k] = fold;
                // all integer translates, for the normalizer
                let mut full = 0.0;
                let g0 = (x - c - 0.75).floor() as i64 - 1;
                let g1 = (x - c - 0.25).ceil() as i64 + 1;
                for g in g0..=g1 {
                    full += base.eval(x - c - g as f64);
                }
                hsum[k] += full;
            }
        }
        tables.push(per_offset);
        axis_h.push(hsum);
    }

    let mut normalizer = SampledField::zeros(grid.clone(), Domain::Space);
    let mut scratch = vec![0usize; n];
    for (idx, slot) in normalizer.values.iter_mut().enumerate() {
        grid.unravel(idx, &mut scratch);
        let v: f64 = (0..n).map(|a| axis_h[a][scratch[a]]).product();
        *slot = Complex64::new(v, 0.0);
    }
    if normalizer.values.iter().any(|v| v.re < 1.0 - 1e-9) {
        return Err(KsError::Window("partition normalizer dipped below 1".into()));
    }

    // Enumerate the 3^n offset combinations.
    let mut combos: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for c in &combos {
            for ci in 0..offsets.len() {
                let mut c2 = c.clone();
                c2.push(ci);
                next.push(c2);
            }
        }
        combos = next;
    }

    let lattice = lattice_points(grid)?;
    let mut points = Vec::with_capacity(combos.len());
    let mut pieces = Vec::with_capacity(combos.len());
    let mut periodized = Vec::with_capacity(combos.len());
    let mut window_field = SampledField::zeros(grid.clone(), Domain::Space);
    for combo in &combos {
        let point: Vec<f64> = combo.iter().map(|&ci| offsets[ci]).collect();
        let mut piece = SampledField::zeros(grid.clone(), Domain::Space);
        for (idx, slot) in piece.values.iter_mut().enumerate() {
            grid.unravel(idx, &mut scratch);
            let num: f64 = (0..n).map(|a| tables[a][combo[a]][scratch[a]]).product();
            *slot = Complex64::new(num, 0.0) / normalizer.values[idx];
        }
        for (ws, ps) in window_field.values.iter_mut().zip(&piece.values) {
            *ws += ps;
        }
        let mut chi = SampledField::zeros(grid.clone(), Domain::Space);
        for gamma in &lattice {
            let shifted = translate_units(&piece, gamma)?;
            for (cs, ss) in chi.values.iter_mut().zip(&shifted.values) {
                *cs += ss;
            }
        }
        let support: Vec<(f64, f64)> = point.iter().map(|&c| (c + 0.25, c + 0.75)).collect();
        points.push(point);
        pieces.push(Window {
            field: piece,
            support,
        });
        periodized.push(chi);
    }
    let window = Window {
        field: window_field,
        support: vec![(-1.0 / 12.0, 13.0 / 12.0); n],
    };
    Ok(PartitionFamily {
        points,
        pieces,
        periodized,
        window,
        normalizer,
    })
}

impl PartitionFamily {
    /// Max deviation of `sum_i chi_i` from 1 over the grid.
    pub fn periodized_sum_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in 0..self.periodized[0].values.len() {
            let s: Complex64 = self.periodized.iter().map(|c| c.values[idx]).sum();
            worst = worst.max((s - Complex64::new(1.0, 0.0)).norm());
        }
        worst
    }

    /// Max deviation of `sum_gamma tau_gamma h` from 1 over the grid.
    pub fn window_sum_error(&self) -> Result<f64> {
        let grid = &self.window.field.grid;
        let mut total = SampledField::zeros(grid.clone(), Domain::Space);
        for gamma in lattice_points(grid)? {
            let shifted = translate_units(&self.window.field, &gamma)?;
            for (t, s) in total.values.iter_mut().zip(&shifted.values) {
                *t += s;
            }
        }
        Ok(total
            .values
            .iter()
            .map(|v| (v - Complex64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max))
    }
}

// ---------------------------------------------------------------------------
// Lattice decompositions.
// ---------------------------------------------------------------------------

/// A family `(u_gamma)` of fields supported in a common compact set `K` with
/// `(K - K) ∩ Z^n = {0}`, indexed by integer lattice points.
#[derive(Debug, Clone)]
pub struct DecompositionFamily {
    /// Per-axis support interval of the common set `K` (width `< 1`).
    pub support: Vec<(f64, f64)>,
    /// Members, keyed by their lattice translation.
    pub members: Vec<(Vec<i64>, SampledField)>,
}

impl DecompositionFamily {
    /// Validates supports and lattice keys and builds the family.
    pub fn new(support: Vec<(f64, f64)>, members: Vec<(Vec<i64>, SampledField)>) -> Result<Self> {
        if members.is_empty() {
            return Err(KsError::Check("decomposition family has no members".into()));
        }
        for (a, &(lo, hi)) in support.iter().enumerate() {
            if !(hi > lo && hi - lo < 1.0) {
                return Err(KsError::Window(format!(
                    "axis {a}: support [{lo}, {hi}] must have width in (0, 1) so that \
                     (K - K) meets Z^n only at 0"
                )));
            }
        }
        let grid = members[0].1.grid.clone();
        for (gamma, u) in &members {
            u.grid.expect_same(&grid)?;
            u.expect_domain(Domain::Space)?;
            if gamma.len() != grid.dim() {
                return Err(KsError::GridMismatch("member key has wrong arity".into()));
            }
        }
        Ok(DecompositionFamily { support, members })
    }

    /// The assembled field `u = sum_gamma tau_gamma u_gamma`.
    pub fn assemble(&self) -> Result<SampledField> {
        let grid = self.members[0].1.grid.clone();
        let mut out = SampledField::zeros(grid, Domain::Space);
        for (gamma, u) in &self.members {
            let shifted = translate_units(u, gamma)?;
            for (o, s) in out.values.iter_mut().zip(&shifted.values) {
                *o += s;
            }
        }
        Ok(out)
    }

    /// Assembles with modulated phases: `sum_gamma exp(i <gamma, theta>)
    /// tau_gamma u_gamma`, `theta_a = 2 pi m_a / L_a`.
    pub fn assemble_modulated(&self, theta_ints: &[i64]) -> Result<SampledField> {
        let grid = self.members[0].1.grid.clone();
        let n = grid.dim();
        let mut out = SampledField::zeros(grid.clone(), Domain::Space);
        for (gamma, u) in &self.members {
            let phase: f64 = (0..n)
                .map(|a| gamma[a] as f64 * theta_ints[a] as f64 * grid.freq_step(a))
                .sum();
            let factor = Complex64::new(0.0, phase).exp();
            let shifted = translate_units(u, gamma)?;
            for (o, s) in out.values.iter_mut().zip(&shifted.values) {
                *o += factor * s;
            }
        }
        Ok(out)
    }
}

/// Result of the almost-orthogonality measurement for a decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionCheck {
    /// `H^s` norm of the assembled field.
    pub assembled_norm: f64,
    /// `(sum_gamma ||u_gamma||_{H^s}^2)^(1/2)`.
    pub block_norm: f64,
    /// `block_norm / assembled_norm`.
    pub ratio: f64,
}

/// Measures the two-sided equivalence
/// `C^-1 ||u|| <= (sum ||u_gamma||^2)^(1/2) <= C ||u||` for one family.
pub fn decomposition_equivalence_check(
    fam: &DecompositionFamily,
    s: &BlockOrder,
) -> Result<DecompositionCheck> {
    let u = fam.assemble()?;
    let assembled_norm = h_norm(&u, s)?;
    let mut sq = 0.0;
    for (_, m) in &fam.members {
        sq += h_norm(m, s)?.powi(2);
    }
    let block_norm = sq.sqrt();
    if assembled_norm == 0.0 {
        return Err(KsError::Check("assembled field vanishes".into()));
    }
    Ok(DecompositionCheck {
        assembled_norm,
        block_norm,
        ratio: block_norm / assembled_norm,
    })
}

// ---------------------------------------------------------------------------
// Modulated periodization (Poisson-type identities).
// ---------------------------------------------------------------------------

/// The modulated periodization
/// `phi_theta = sum_gamma exp(i <gamma, theta>) tau_gamma phi` for a lattice
/// frequency `theta_a = 2 pi m_a / L_a`.
pub fn periodize_modulated(phi: &Window, theta_ints: &[i64]) -> Result<SampledField> {
    let grid = &phi.field.grid;
    let n = grid.dim();
    if theta_ints.len() != n {
        return Err(KsError::GridMismatch("theta index has wrong arity".into()));
    }
    let mut out = SampledField::zeros(grid.clone(), Domain::Space);
    for gamma in lattice_points(grid)? {
        let phase: f64 = (0..n)
            .map(|a| gamma[a] as f64 * theta_ints[a] as f64 * grid.freq_step(a))
            .sum();
        let factor = Complex64::new(0.0, phase).exp();
        let shifted = translate_units(&phi.field, &gamma)?;
        for (o, s) in out.values.iter_mut().zip(&shifted.values) {
            *o += factor * s;
        }
    }
    Ok(out)
}

/// Spectrum structure of a modulated periodization.
#[derive(Debug, Clone, Serialize)]
pub struct PoissonCheck {
    /// Largest off-coset bin magnitude relative to the largest bin.
    pub off_coset_leak: f64,
    /// Largest relative error of on-coset bins against
    /// `L^n phi^(2 pi gamma + theta)`.
    pub coset_value_err: f64,
}

/// Verifies that the spectrum of `phi_theta` is supported on the coset
/// `theta + 2 pi Z^n` with bin values `prod_a L_a * phi^(xi)` (the discrete
/// realization of the atoms `(2 pi)^n phi^(2 pi gamma + theta)
/// delta_(2 pi gamma + theta)`, one frequency cell per atom).
pub fn poisson_check(phi: &Window, theta_ints: &[i64]) -> Result<PoissonCheck> {
    let grid = &phi.field.grid;
    let n = grid.dim();
    let f = periodize_modulated(phi, theta_ints)?;
    let fh = dft_forward(&f)?;
    let ph = dft_forward(&phi.field)?;
    let volume = grid.box_volume();
    let peak = fh.max_abs();
    if peak == 0.0 {
        return Err(KsError::Check("periodization vanished".into()));
    }
    let mut scratch = vec![0usize; n];
    let mut off_leak = 0.0f64;
    let mut value_err = 0.0f64;
    for idx in 0..grid.len() {
        grid.unravel(idx, &mut scratch);
        let mut on_coset = true;
        for a in 0..n {
            let la = grid.box_lengths()[a].round() as i64;
            let m = grid.freq_int(a, scratch[a]);
            if (m - theta_ints[a]).rem_euclid(la) != 0 {
                on_coset = false;
                break;
            }
        }
        if on_coset {
            let predicted = ph.values[idx] * volume;
            value_err = value_err.max((fh.values[idx] - predicted).norm() / peak);
        } else {
            off_leak = off_leak.max(fh.values[idx].norm() / peak);
        }
    }
    Ok(PoissonCheck {
        off_coset_leak: off_leak,
        coset_value_err: value_err,
    })
}

/// Discrete Plancherel identity in the modulation parameter.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaPlancherelCheck {
    /// Largest per-bin deviation of the theta-average of `|u_theta^|^2`
    /// from `sum_gamma |u_gamma^|^2`, relative to the largest bin.
    pub max_rel_err: f64,
}

/// Checks `avg_theta |u_theta^(xi)|^2 = sum_gamma |u_gamma^(xi)|^2` per bin,
/// with theta running over the full lattice of `prod L_a` modulations (the
/// exact quadrature of the continuum theta-average).
pub fn theta_plancherel_check(fam: &DecompositionFamily) -> Result<ThetaPlancherelCheck> {
    let grid = fam.members[0].1.grid.clone();
    let thetas = lattice_points(&grid)?;
    let len = grid.len();
    let mut avg = vec![0.0f64; len];
    for theta in &thetas {
        let u = fam.assemble_modulated(theta)?;
        let uh = dft_forward(&u)?;
        for (slot, v) in avg.iter_mut().zip(&uh.values) {
            *slot += v.norm_sqr();
        }
    }
    let count = thetas.len() as f64;
    for slot in avg.iter_mut() {
        *slot /= count;
    }
    let mut blocks = vec![0.0f64; len];
    for (gamma, m) in &fam.members {
        let shifted = translate_units(m, gamma)?;
        let mh = dft_forward(&shifted)?;
        for (slot, v) in blocks.iter_mut().zip(&mh.values) {
            *slot += v.norm_sqr();
        }
    }
    let peak = blocks.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let max_rel_err = avg
        .iter()
        .zip(&blocks)
        .map(|(a, b)| (a - b).abs() / peak)
        .fold(0.0, f64::max);
    Ok(ThetaPlancherelCheck { max_rel_err })
}

// ---------------------------------------------------------------------------
// Retract pair.
// ---------------------------------------------------------------------------

/// Splits a field into the windowed lattice family `u_k = (tau_k chi_z) u`.
pub fn retract_split(
    u: &SampledField,
    chi_z: &Window,
) -> Result<Vec<(Vec<i64>, SampledField)>> {
    u.expect_domain(Domain::Space)?;
    u.grid.expect_same(&chi_z.field.grid)?;
    let mut parts = Vec::new();
    for k in lattice_points(&u.grid)? {
        let w = translate_units(&chi_z.field, &k)?;
        let part = crate::grid::pointwise_mul(&w, u)?;
        parts.push((k, part));
    }
    Ok(parts)
}

/// Reassembles a windowed family with a wider window:
/// `sum_k (tau_k chi) u_k`.  Requires `chi == 1` on the support of `chi_z`
/// (checked on the grid), which makes split-then-assemble the identity.
pub fn retract_assemble(
    parts: &[(Vec<i64>, SampledField)],
    chi: &Window,
    chi_z: &Window,
) -> Result<SampledField> {
    if parts.is_empty() {
        return Err(KsError::Check("no parts to assemble".into()));
    }
    let grid = parts[0].1.grid.clone();
    grid.expect_same(&chi.field.grid)?;
    for (zv, cv) in chi_z.field.values.iter().zip(&chi.field.values) {
        if zv.norm() > 1e-14 && (cv - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(KsError::Window(
                "outer window is not identically 1 on the support of the inner window".into(),
            ));
        }
    }
    let mut out = SampledField::zeros(grid.clone(), Domain::Space);
    for (k, part) in parts {
        let w = translate_units(&chi.field, k)?;
        let term = crate::grid::pointwise_mul(&w, part)?;
        for (o, t) in out.values.iter_mut().zip(&term.values) {
            *o += t;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample};

    #[test]
    fn profile_is_a_plateau_with_smooth_edges() {
        let p = bump_profile(0.25, 1.0 / 3.0, 2.0 / 3.0, 0.75).unwrap();
        assert_eq!(p.eval(0.2), 0.0);
        assert_eq!(p.eval(0.5), 1.0);
        assert_eq!(p.eval(0.8), 0.0);
        assert!(p.eval(0.3) > 0.0 && p.eval(0.3) < 1.0);
        // symmetric transitions
        assert!((p.eval(0.25 + 0.04) - p.eval(0.75 - 0.04)).abs() < 1e-15);
        assert!(bump_profile(0.5, 0.4, 0.6, 0.7).is_err());
    }

    #[test]
    fn partition_pieces_sum_to_one_after_periodization() {
        let g = make_grid(&[1], &[256], &[2.0]).unwrap();
        let fam = build_partition(&g).unwrap();
        assert_eq!(fam.points.len(), 3);
        assert!(fam.periodized_sum_error() < 1e-12);
        assert!(fam.window_sum_error().unwrap() < 1e-12);
    }

    #[test]
    fn partition_works_in_two_dimensions() {
        let g = make_grid(&[2], &[192, 192], &[2.0, 2.0]).unwrap();
        let fam = build_partition(&g).unwrap();
        assert_eq!(fam.points.len(), 9);
        assert!(fam.periodized_sum_error() < 1e-12);
        assert!(fam.window_sum_error().unwrap() < 1e-12);
    }

    #[test]
    fn partition_rejects_coarse_or_off_lattice_grids() {
        let coarse = make_grid(&[1], &[64], &[2.0]).unwrap();
        assert!(build_partition(&coarse).is_err());
        let off = make_grid(&[1], &[256], &[2.5]).unwrap();
        assert!(build_partition(&off).is_err());
    }

    #[test]
    fn single_member_decomposition_has_ratio_one() {
        let g = make_grid(&[1], &[256], &[4.0]).unwrap();
        let u = sample(&g, |x| {
            let t = x[0] - 0.5;
            Complex64::new((-40.0 * t * t).exp(), 0.0)
        });
        let fam =
            DecompositionFamily::new(vec![(0.1, 0.9)], vec![(vec![1], u)]).unwrap();
        let s = BlockOrder::isotropic(1.3, 1).unwrap();
        let out = decomposition_equivalence_check(&fam, &s).unwrap();
        assert!((out.ratio - 1.0).abs() < 1e-10, "{out:?}");
    }

    #[test]
    fn poisson_spectrum_sits_on_the_coset_with_predicted_values() {
        let g = make_grid(&[1], &[256], &[2.0]).unwrap();
        let part = build_partition(&g).unwrap();
        for theta in 0..2 {
            let out = poisson_check(&part.window, &[theta]).unwrap();
            assert!(out.off_coset_leak < 1e-11, "{out:?}");
            assert!(out.coset_value_err < 1e-9, "{out:?}");
        }
    }

    #[test]
    fn theta_average_recovers_the_block_square_sum() {
        let g = make_grid(&[1], &[192], &[4.0]).unwrap();
        let bump = |x: f64, c: f64| {
            let t = (x - c) / 0.3;
            if t.abs() < 1.0 {
                (1.0 - t * t).powi(3)
            } else {
                0.0
            }
        };
        let m0 = sample(&g, |x| Complex64::new(bump(x[0], 0.5), 0.0));
        let m1 = sample(&g, |x| Complex64::new(0.7 * bump(x[0], 0.45), 0.2 * bump(x[0], 0.55)));
        let fam = DecompositionFamily::new(
            vec![(0.15, 0.85)],
            vec![(vec![0], m0), (vec![2], m1)],
        )
        .unwrap();
        let out = theta_plancherel_check(&fam).unwrap();
        assert!(out.max_rel_err < 1e-9, "{out:?}");
    }

    #[test]
    fn retract_round_trip_is_the_identity() {
        let g = make_grid(&[1], &[256], &[2.0]).unwrap();
        let part = build_partition(&g).unwrap();
        let chi = window_from_profiles(
            &g,
            &[bump_profile(-5.0 / 12.0, -1.0 / 6.0, 7.0 / 6.0, 17.0 / 12.0).unwrap()],
        )
        .unwrap();
        let u = sample(&g, |x| Complex64::new((3.0 * x[0]).sin(), (2.0 * x[0]).cos()));
        let parts = retract_split(&u, &part.window).unwrap();
        let back = retract_assemble(&parts, &chi, &part.window).unwrap();
        for (a, b) in u.values.iter().zip(&back.values) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn retract_assemble_rejects_a_narrow_outer_window() {
        let g = make_grid(&[1], &[256], &[2.0]).unwrap();
        let part = build_partition(&g).unwrap();
        // too narrow: not 1 on all of supp h
        let narrow = window_from_profiles(
            &g,
            &[bump_profile(0.0, 0.2, 0.8, 1.0).unwrap()],
        )
        .unwrap();
        let u = sample(&g, |x| Complex64::new(x[0].sin(), 0.0));
        let parts = retract_split(&u, &part.window).unwrap();
        assert!(retract_assemble(&parts, &narrow, &part.window).is_err());
    }
}
