//! Uniformly local (Kato) norms `K_p^s` over translated windows and the
//! equivalences that tie them to the global Sobolev norm.
//!
//! The continuum norm is `||u||_{s,p,chi} = (∫ ||u tau_y chi||_{H^s}^p dy)^(1/p)`
//! (sup over `y` for `p = inf`).  On the torus it is realized in two modes:
//! `Lattice` sums over integer translates (weight 1 per translate, the form
//! used in the `H^s = K_2^s` identification), `SubGrid` sums over a sub-grid
//! of translates with the quadrature weight of the sub-grid cell.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{KsError, Result};
use crate::grid::{pointwise_mul, translate, Domain, GridSpec, SampledField};
use crate::partition::{unit_shift_samples, Window};
use crate::sobolev::h_norm;
use crate::weights::{conv_bound_constant, BlockOrder};

/// The exponent of a `K_p^s` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PNorm {
    /// `1 <= p < inf`.
    Finite(f64),
    /// `p = inf` (sup over translates).
    Inf,
}

impl PNorm {
    fn validate(&self) -> Result<()> {
        if let PNorm::Finite(p) = self {
            if !(*p >= 1.0 && p.is_finite()) {
                return Err(KsError::InvalidOrder(format!(
                    "K_p exponent must satisfy 1 <= p < inf, got {p}"
                )));
            }
        }
        Ok(())
    }

    /// `1/p` (0 for the sup norm).
    pub fn reciprocal(&self) -> f64 {
        match self {
            PNorm::Finite(p) => 1.0 / p,
            PNorm::Inf => 0.0,
        }
    }

    /// The Hölder conjugate combination `1/r = 1/p + 1/q`.
    pub fn holder_with(&self, other: &PNorm) -> Result<PNorm> {
        let inv = self.reciprocal() + other.reciprocal();
        if inv == 0.0 {
            Ok(PNorm::Inf)
        } else if inv <= 1.0 {
            Ok(PNorm::Finite(1.0 / inv))
        } else {
            Err(KsError::InvalidOrder(format!(
                "1/p + 1/q = {inv} exceeds 1"
            )))
        }
    }
}

/// The set of window translates a Kato norm ranges over.
#[derive(Debug, Clone, PartialEq)]
pub enum TranslationSet {
    /// Integer lattice translates with per-axis spacing (in length units);
    /// each translate carries weight 1.
    Lattice {
        /// Per-axis spacing; must divide the box length.
        spacing: Vec<i64>,
    },
    /// Sub-grid translates with per-axis step (in samples); each translate
    /// carries the sub-grid cell volume as quadrature weight.
    SubGrid {
        /// Per-axis sample step; must divide the sample count.
        step: Vec<usize>,
    },
}

impl TranslationSet {
    /// All sample-shift vectors of the set, plus the per-translate weight.
    pub fn shifts(&self, grid: &GridSpec) -> Result<(Vec<Vec<i64>>, f64)> {
        let n = grid.dim();
        let mut per_axis: Vec<Vec<i64>> = Vec::with_capacity(n);
        let weight;
        match self {
            TranslationSet::Lattice { spacing } => {
                if spacing.len() != n {
                    return Err(KsError::GridMismatch("lattice spacing has wrong arity".into()));
                }
                for a in 0..n {
                    let per_unit = unit_shift_samples(grid, a)?;
                    let la = grid.box_lengths()[a].round() as i64;
                    let sp = spacing[a];
                    if sp < 1 || la % sp != 0 {
                        return Err(KsError::Window(format!(
                            "axis {a}: lattice spacing {sp} does not divide box length {la}"
                        )));
                    }
                    per_axis.push((0..la / sp).map(|k| k * sp * per_unit).collect());
                }
                weight = 1.0;
            }
            TranslationSet::SubGrid { step } => {
                if step.len() != n {
                    return Err(KsError::GridMismatch("sub-grid step has wrong arity".into()));
                }
                let mut w = 1.0;
                for a in 0..n {
                    let na = grid.samples()[a];
                    let st = step[a];
                    if st == 0 || na % st != 0 {
                        return Err(KsError::Window(format!(
                            "axis {a}: sub-grid step {st} does not divide sample count {na}"
                        )));
                    }
                    per_axis.push((0..(na / st) as i64).map(|k| k * st as i64).collect());
                    w *= st as f64 * grid.spacing(a);
                }
                weight = w;
            }
        }
        let mut shifts = vec![vec![]];
        for axis_shifts in &per_axis {
            let mut next = Vec::with_capacity(shifts.len() * axis_shifts.len());
            for s in &shifts {
                for &v in axis_shifts {
                    let mut s2: Vec<i64> = s.clone();
                    s2.push(v);
                    next.push(s2);
                }
            }
            shifts = next;
        }
        Ok((shifts, weight))
    }
}

/// Full specification of a `K_p^s` norm.
#[derive(Debug, Clone)]
pub struct KatoNormSpec {
    /// Smoothness orders.
    pub s: BlockOrder,
    /// Exponent.
    pub p: PNorm,
    /// The window field.
    pub window: Window,
    /// The translates the norm ranges over.
    pub translations: TranslationSet,
}

/// Computes the `K_p^s` norm of a space field.
///
/// In `Lattice` mode the translated windows are additionally required to
/// cover the torus: `Psi = sum_gamma |tau_gamma chi|^2 >= 1e-6` everywhere.
pub fn kato_norm(u: &SampledField, spec: &KatoNormSpec) -> Result<f64> {
    u.expect_domain(Domain::Space)?;
    u.grid.expect_same(&spec.window.field.grid)?;
    spec.p.validate()?;
    spec.s.expect_compatible(&u.grid)?;
    let (shifts, weight) = spec.translations.shifts(&u.grid)?;
    if let TranslationSet::Lattice { .. } = spec.translations {
        let mut cover = vec![0.0f64; u.grid.len()];
        for sh in &shifts {
            let w = translate(&spec.window.field, sh)?;
            for (c, v) in cover.iter_mut().zip(&w.values) {
                *c += v.norm_sqr();
            }
        }
        if cover.iter().any(|&c| c < 1e-6) {
            return Err(KsError::Window(
                "translated windows do not cover the torus (min sum |tau chi|^2 < 1e-6)".into(),
            ));
        }
    }
    let norms: Vec<f64> = shifts
        .par_iter()
        .map(|sh| -> Result<f64> {
            let w = translate(&spec.window.field, sh)?;
            let prod = pointwise_mul(&w, u)?;
            h_norm(&prod, &spec.s)
        })
        .collect::<Result<Vec<f64>>>()?;
    match spec.p {
        PNorm::Inf => Ok(norms.iter().cloned().fold(0.0, f64::max)),
        PNorm::Finite(p) => {
            let sum: f64 = norms.iter().map(|n| n.powf(p)).sum();
            Ok((weight * sum).powf(1.0 / p))
        }
    }
}

// ---------------------------------------------------------------------------
// Equivalence and embedding measurements.
// ---------------------------------------------------------------------------

/// Ratio of the same `K_p^s` norm taken with two different windows.
#[derive(Debug, Clone, Serialize)]
pub struct WindowEquivalence {
    /// Norm under the first window.
    pub norm_a: f64,
    /// Norm under the second window.
    pub norm_b: f64,
    /// `norm_a / norm_b`.
    pub ratio: f64,
}

/// Measures the window-independence of the `K_p^s` norm for one field.
pub fn window_equivalence_check(
    u: &SampledField,
    s: &BlockOrder,
    p: PNorm,
    win_a: &Window,
    win_b: &Window,
    translations: &TranslationSet,
) -> Result<WindowEquivalence> {
    let spec_a = KatoNormSpec {
        s: s.clone(),
        p,
        window: win_a.clone(),
        translations: translations.clone(),
    };
    let spec_b = KatoNormSpec {
        s: s.clone(),
        p,
        window: win_b.clone(),
        translations: translations.clone(),
    };
    let norm_a = kato_norm(u, &spec_a)?;
    let norm_b = kato_norm(u, &spec_b)?;
    if norm_b == 0.0 {
        return Err(KsError::Check("zero norm in window equivalence check".into()));
    }
    Ok(WindowEquivalence {
        norm_a,
        norm_b,
        ratio: norm_a / norm_b,
    })
}

/// Ratio of the lattice `K_2^s` norm (with the partition window) to the
/// global `H^s` norm.
pub fn h_equals_k2_ratio(u: &SampledField, s: &BlockOrder, window: &Window) -> Result<f64> {
    let spec = KatoNormSpec {
        s: s.clone(),
        p: PNorm::Finite(2.0),
        window: window.clone(),
        translations: TranslationSet::Lattice {
            spacing: vec![1; u.grid.dim()],
        },
    };
    let k2 = kato_norm(u, &spec)?;
    let h = h_norm(u, s)?;
    if h == 0.0 {
        return Err(KsError::Check("zero H^s norm".into()));
    }
    Ok(k2 / h)
}

/// Measured `K_p^s * K_q^t -> K_r^sigma` product datum.
#[derive(Debug, Clone, Serialize)]
pub struct KatoProductCheck {
    /// `||uv||_{sigma, r, chi^2}`.
    pub product_norm: f64,
    /// `||u||_{s,p,chi} ||v||_{t,q,chi}`.
    pub factor_norms: f64,
    /// Measured ratio.
    pub ratio: f64,
    /// The Sobolev product constant `sqrt(C(s,t,eps,n)) (2 pi)^(-n/2)`
    /// entering the continuum bound (recorded for reference).
    pub sobolev_constant: f64,
}

/// Measures `||uv||_{sigma, r, chi^2} / (||u||_{s,p,chi} ||v||_{t,q,chi})`
/// with `1/r = 1/p + 1/q` and `chi^2` the pointwise square of the window.
#[allow(clippy::too_many_arguments)]
pub fn kato_product_check(
    u: &SampledField,
    v: &SampledField,
    s: &BlockOrder,
    t: &BlockOrder,
    eps: &[f64],
    p: PNorm,
    q: PNorm,
    window: &Window,
    translations: &TranslationSet,
) -> Result<KatoProductCheck> {
    let sigma = crate::weights::sigma_eps(s, t, eps)?;
    let r = p.holder_with(&q)?;
    let uv = crate::sobolev::multiply(u, v)?;
    let squared = Window {
        field: pointwise_mul(&window.field, &window.field)?,
        support: window.support.clone(),
    };
    let nu = kato_norm(
        u,
        &KatoNormSpec {
            s: s.clone(),
            p,
            window: window.clone(),
            translations: translations.clone(),
        },
    )?;
    let nv = kato_norm(
        v,
        &KatoNormSpec {
            s: t.clone(),
            p: q,
            window: window.clone(),
            translations: translations.clone(),
        },
    )?;
    let nuv = kato_norm(
        &uv,
        &KatoNormSpec {
            s: sigma,
            p: r,
            window: squared,
            translations: translations.clone(),
        },
    )?;
    if nu == 0.0 || nv == 0.0 {
        return Err(KsError::Check("zero factor in Kato product check".into()));
    }
    let n = u.grid.dim() as i32;
    let sobolev_constant =
        conv_bound_constant(s, t, eps)?.sqrt() / (2.0 * std::f64::consts::PI).powi(n).sqrt();
    Ok(KatoProductCheck {
        product_norm: nuv,
        factor_norms: nu * nv,
        ratio: nuv / (nu * nv),
        sobolev_constant,
    })
}

/// Measured bounded-derivatives embedding datum.
#[derive(Debug, Clone, Serialize)]
pub struct BcEmbeddingCheck {
    /// `||u||_{m, ul, chi}` (sup over lattice translates).
    pub uniform_norm: f64,
    /// The product `||u||_{BC^m} ||chi||_{H^m}`.
    pub bc_factor: f64,
    /// `uniform_norm / bc_factor`.
    pub observed_constant: f64,
}

/// Measures `||u||_{m, ul, chi} <= C ||u||_{BC^m} ||chi||_{H^m}` for a field
/// with a caller-supplied `BC^m` norm (sup norms of derivatives up to
/// order `m`, known analytically for fixture fields).  Single-block grids
/// only, integer `m >= 0`.
pub fn bc_embedding_check(
    u: &SampledField,
    m: usize,
    bc_norm: f64,
    window: &Window,
) -> Result<BcEmbeddingCheck> {
    if u.grid.block_dims().len() != 1 {
        return Err(KsError::InvalidOrder(
            "the BC^m embedding is stated for a single block".into(),
        ));
    }
    if !(bc_norm > 0.0 && bc_norm.is_finite()) {
        return Err(KsError::Check("BC^m norm must be positive".into()));
    }
    let s = BlockOrder::isotropic(m as f64, u.grid.dim())?;
    let spec = KatoNormSpec {
        s: s.clone(),
        p: PNorm::Inf,
        window: window.clone(),
        translations: TranslationSet::Lattice {
            spacing: vec![1; u.grid.dim()],
        },
    };
    let uniform_norm = kato_norm(u, &spec)?;
    let bc_factor = bc_norm * h_norm(&window.field, &s)?;
    Ok(BcEmbeddingCheck {
        uniform_norm,
        bc_factor,
        observed_constant: uniform_norm / bc_factor,
    })
}

/// Approximation sequences of the density check.
#[derive(Debug, Clone, Serialize)]
pub struct DensityCheck {
    /// The mollification scales used.
    pub scales: Vec<f64>,
    /// `||phi_eps * u - u||_{s,p,chi}` per scale.
    pub mollify_errors: Vec<f64>,
    /// `||psi(eps .) u - u||_{s,p,chi}` per scale (smooth cutoffs opening up).
    pub cutoff_errors: Vec<f64>,
    /// True when both sequences decrease (up to 5% slack) and end below
    /// a tenth of their initial value.
    pub decreasing: bool,
}

/// Verifies that mollification and smooth cutoffs approximate `u` in `K_p^s`
/// for finite `p`; `p = inf` is rejected (approximation fails there).
pub fn density_approx_check(
    u: &SampledField,
    s: &BlockOrder,
    p: PNorm,
    window: &Window,
    translations: &TranslationSet,
    scales: &[f64],
) -> Result<DensityCheck> {
    if matches!(p, PNorm::Inf) {
        return Err(KsError::Check(
            "smooth compactly supported fields are not dense in K_inf; use finite p".into(),
        ));
    }
    if scales.len() < 2 {
        return Err(KsError::Check("need at least two scales".into()));
    }
    let spec = KatoNormSpec {
        s: s.clone(),
        p,
        window: window.clone(),
        translations: translations.clone(),
    };
    let diff_norm = |a: &SampledField, b: &SampledField| -> Result<f64> {
        let mut d = a.clone();
        for (x, y) in d.values.iter_mut().zip(&b.values) {
            *x -= y;
        }
        kato_norm(&d, &spec)
    };
    let cutoff = crate::partition::bump_profile(-2.0, -1.0, 1.0, 2.0)?;
    let mut mollify_errors = Vec::with_capacity(scales.len());
    let mut cutoff_errors = Vec::with_capacity(scales.len());
    for &eps in scales {
        let smoothed = crate::calculus::mollify(u, eps)?;
        mollify_errors.push(diff_norm(&smoothed, u)?);
        // psi(eps x) u: the cutoff plateau widens as eps shrinks; evaluated
        // directly in box coordinates (no torus folding), as a restriction.
        let psi = crate::grid::sample_real(&u.grid, |x| {
            x.iter().map(|&xi| cutoff.eval(eps * xi)).product()
        });
        let cut = pointwise_mul(&psi, u)?;
        cutoff_errors.push(diff_norm(&cut, u)?);
    }
    let decreasing_seq = |e: &[f64]| -> bool {
        let start = e[0].max(1e-300);
        let end = e[e.len() - 1];
        e.windows(2).all(|w| w[1] <= w[0] * 1.05 + 1e-14) && end <= 0.1 * start + 1e-14
    };
    let decreasing = decreasing_seq(&mollify_errors) && decreasing_seq(&cutoff_errors);
    Ok(DensityCheck {
        scales: scales.to_vec(),
        mollify_errors,
        cutoff_errors,
        decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample};
    use crate::partition::build_partition;
    use num_complex::Complex64;

    fn partition_grid() -> GridSpec {
        make_grid(&[1], &[256], &[2.0]).unwrap()
    }

    fn localized(g: &GridSpec) -> SampledField {
        sample(g, |x| {
            let t = x[0] - 0.4;
            Complex64::new((-30.0 * t * t).exp() * (5.0 * x[0]).cos(), 0.0)
        })
    }

    #[test]
    fn constant_field_k2_norm_matches_the_window_square_sum() {
        // For u = 1 and p = 2 the lattice norm is (sum_gamma ||tau_gamma chi||^2)^(1/2)
        // = (#translates)^(1/2) ||chi||_{H^s} by translation invariance.
        let g = partition_grid();
        let part = build_partition(&g).unwrap();
        let u = sample(&g, |_| Complex64::new(1.0, 0.0));
        let s = BlockOrder::isotropic(1.0, 1).unwrap();
        let spec = KatoNormSpec {
            s: s.clone(),
            p: PNorm::Finite(2.0),
            window: part.window.clone(),
            translations: TranslationSet::Lattice { spacing: vec![1] },
        };
        let k = kato_norm(&u, &spec).unwrap();
        let expect = 2.0f64.sqrt() * h_norm(&part.window.field, &s).unwrap();
        assert!((k - expect).abs() < 1e-10 * expect, "{k} vs {expect}");
    }

    #[test]
    fn kato_norm_is_nonincreasing_in_p() {
        let g = partition_grid();
        let part = build_partition(&g).unwrap();
        let u = localized(&g);
        let s = BlockOrder::isotropic(1.0, 1).unwrap();
        let mut prev = f64::INFINITY;
        for p in [PNorm::Finite(1.0), PNorm::Finite(2.0), PNorm::Finite(4.0), PNorm::Inf] {
            let spec = KatoNormSpec {
                s: s.clone(),
                p,
                window: part.window.clone(),
                translations: TranslationSet::Lattice { spacing: vec![1] },
            };
            let k = kato_norm(&u, &spec).unwrap();
            assert!(k <= prev * (1.0 + 1e-12), "p-chain violated: {k} > {prev}");
            prev = k;
        }
    }

    #[test]
    fn uncovering_window_is_rejected_in_lattice_mode() {
        let g = partition_grid();
        // narrow bump, translates leave gaps on the 1-lattice of a box of 2
        let win = crate::partition::window_from_profiles(
            &g,
            &[crate::partition::bump_profile(0.0, 0.1, 0.2, 0.3).unwrap()],
        )
        .unwrap();
        let u = localized(&g);
        let spec = KatoNormSpec {
            s: BlockOrder::isotropic(0.0, 1).unwrap(),
            p: PNorm::Finite(2.0),
            window: win,
            translations: TranslationSet::Lattice { spacing: vec![1] },
        };
        assert!(matches!(kato_norm(&u, &spec), Err(KsError::Window(_))));
    }

    #[test]
    fn h_equals_k2_ratio_is_grid_stable() {
        let s = BlockOrder::isotropic(1.0, 1).unwrap();
        let mut ratios = Vec::new();
        for n in [256usize, 512] {
            let g = make_grid(&[1], &[n], &[2.0]).unwrap();
            let part = build_partition(&g).unwrap();
            let u = localized(&g);
            ratios.push(h_equals_k2_ratio(&u, &s, &part.window).unwrap());
        }
        assert!(
            (ratios[0] - ratios[1]).abs() < 0.02 * ratios[1],
            "{ratios:?}"
        );
    }

    #[test]
    fn constant_field_realizes_the_bc_embedding_with_constant_one() {
        let g = partition_grid();
        let part = build_partition(&g).unwrap();
        let u = sample(&g, |_| Complex64::new(1.0, 0.0));
        let out = bc_embedding_check(&u, 1, 1.0, &part.window).unwrap();
        assert!((out.observed_constant - 1.0).abs() < 1e-10, "{out:?}");
    }

    #[test]
    fn density_check_rejects_the_sup_norm() {
        let g = partition_grid();
        let part = build_partition(&g).unwrap();
        let u = localized(&g);
        let s = BlockOrder::isotropic(1.0, 1).unwrap();
        let tr = TranslationSet::Lattice { spacing: vec![1] };
        let err = density_approx_check(&u, &s, PNorm::Inf, &part.window, &tr, &[0.5, 0.25]);
        assert!(err.is_err());
    }
}
