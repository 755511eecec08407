//! Mollifiers and the polydisc-contour realization of the holomorphic
//! functional calculus.
//!
//! For fields `u = (u_1, ..., u_d)` whose joint range stays at sup-distance
//! `8r` from the complement of the domain of holomorphy, `Phi(u)` is
//! evaluated through the Cauchy-type integral
//!
//! `h(x) = (2 pi i)^(-d) ∮_{(∂D(0,3r))^d} Phi(zeta + v(x))
//!         prod_k (zeta_k + v_k(x) - u_k(x))^(-1) d zeta`
//!
//! with a mollified companion `v` of `u` satisfying `|u - v| <= r/2`, so
//! every denominator stays above `3r - r/2` in modulus.  Each circle factor
//! is discretized by the trapezoidal rule, which converges geometrically in
//! the node count for these analytic integrands.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{KsError, Result};
use crate::fft::{dft_inverse, to_freq};
use crate::grid::{pointwise_mul, sample_real, Domain, SampledField};
use crate::kato::{kato_norm, KatoNormSpec, PNorm, TranslationSet};
use crate::partition::{bump_profile, Window};
use crate::sobolev::{derivative, h_norm};
use crate::weights::BlockOrder;

// ---------------------------------------------------------------------------
// Mollification.
// ---------------------------------------------------------------------------

/// Samples the standard bump mollifier `phi_eps = eps^(-n) phi(./eps)` on the
/// grid of `u`, with the discrete mass normalized to exactly 1.
pub fn mollifier_kernel(like: &SampledField, eps: f64) -> Result<SampledField> {
    let grid = &like.grid;
    let max_dx = (0..grid.dim()).map(|a| grid.spacing(a)).fold(0.0, f64::max);
    let min_l = grid.box_lengths().iter().cloned().fold(f64::INFINITY, f64::min);
    if !(eps >= 2.0 * max_dx) {
        return Err(KsError::Calculus(format!(
            "mollifier scale {eps} is under-resolved (need eps >= 2 dx = {})",
            2.0 * max_dx
        )));
    }
    if eps > min_l / 4.0 {
        return Err(KsError::Calculus(format!(
            "mollifier scale {eps} is too large for box length {min_l}"
        )));
    }
    let mut kernel = sample_real(grid, |x| {
        let q: f64 = x.iter().map(|&xi| (xi / eps) * (xi / eps)).sum();
        if q < 1.0 {
            (-1.0 / (1.0 - q)).exp()
        } else {
            0.0
        }
    });
    let mass: f64 = kernel.values.iter().map(|v| v.re).sum::<f64>() * grid.cell_volume();
    for v in kernel.values.iter_mut() {
        *v /= mass;
    }
    Ok(kernel)
}

/// Convolution with the standard mollifier at scale `eps` (a spectral
/// product, i.e. circular convolution on the torus).
pub fn mollify(u: &SampledField, eps: f64) -> Result<SampledField> {
    u.expect_domain(Domain::Space)?;
    let kernel = mollifier_kernel(u, eps)?;
    let uh = to_freq(u)?;
    let kh = to_freq(&kernel)?;
    let mut prod = uh;
    for (p, k) in prod.values.iter_mut().zip(&kh.values) {
        *p *= k;
    }
    dft_inverse(&prod)
}

/// Measured mollifier approximation rates.
#[derive(Debug, Clone, Serialize)]
pub struct MollifierRateCheck {
    /// The exponent `theta = min(s - s', 1)`.
    pub theta: f64,
    /// The scales used.
    pub scales: Vec<f64>,
    /// `||phi_eps * u - u||_{H^s'}` per scale.
    pub errors: Vec<f64>,
    /// The analytic bounds `2^(1-theta) eps^theta ||u||_{H^s}` per scale.
    pub bounds: Vec<f64>,
    /// Least-squares slope of `log error` against `log eps`.
    pub slope: f64,
    /// True when every error sits below its bound.
    pub within_bounds: bool,
}

/// Checks `||phi_eps * u - u||_{H^s'} <= 2^(1-theta) eps^theta ||u||_{H^s}`
/// (`theta = min(s - s', 1)`) over a sequence of scales and fits the decay
/// slope.  Isotropic single-block orders with `s' < s`.
pub fn mollifier_rate_check(
    u: &SampledField,
    s: f64,
    s_prime: f64,
    scales: &[f64],
) -> Result<MollifierRateCheck> {
    if !(s_prime < s) {
        return Err(KsError::InvalidOrder(format!(
            "mollifier rates need s' < s, got s' = {s_prime}, s = {s}"
        )));
    }
    if scales.len() < 2 {
        return Err(KsError::Check("need at least two scales".into()));
    }
    let n = u.grid.dim();
    let so = BlockOrder::isotropic(s, n)?;
    let spo = BlockOrder::isotropic(s_prime, n)?;
    let theta = (s - s_prime).min(1.0);
    let base = h_norm(u, &so)?;
    let mut errors = Vec::with_capacity(scales.len());
    let mut bounds = Vec::with_capacity(scales.len());
    for &eps in scales {
        let sm = mollify(u, eps)?;
        let mut diff = sm;
        for (d, v) in diff.values.iter_mut().zip(&u.values) {
            *d -= v;
        }
        errors.push(h_norm(&diff, &spo)?);
        bounds.push((2.0f64).powf(1.0 - theta) * eps.powf(theta) * base);
    }
    // least squares in log-log
    let logs: Vec<(f64, f64)> = scales
        .iter()
        .zip(&errors)
        .filter(|(_, e)| **e > 0.0)
        .map(|(x, e)| (x.ln(), e.ln()))
        .collect();
    let m = logs.len() as f64;
    let (sx, sy): (f64, f64) = logs.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let within_bounds = errors
        .iter()
        .zip(&bounds)
        .all(|(e, b)| *e <= b * (1.0 + 1e-9));
    Ok(MollifierRateCheck {
        theta,
        scales: scales.to_vec(),
        errors,
        bounds,
        slope,
        within_bounds,
    })
}

/// Measured convolution contraction datum.
#[derive(Debug, Clone, Serialize)]
pub struct ConvContractionCheck {
    /// `||phi||_{L^1}` (discrete).
    pub kernel_l1: f64,
    /// `||phi * u||_{s,p,chi} / ||u||_{s,p,chi}`.
    pub ratio: f64,
    /// `ratio <= kernel_l1 (1 + 1e-6)`.
    pub within_bound: bool,
}

/// Checks `||phi * u||_{s,p,chi} <= ||phi||_{L^1} ||u||_{s,p,chi}` for a
/// caller-supplied kernel.  Sub-grid translation sets only (the discrete
/// Minkowski argument needs the translate family to be shift invariant).
pub fn conv_contraction_check(
    u: &SampledField,
    kernel: &SampledField,
    spec: &KatoNormSpec,
) -> Result<ConvContractionCheck> {
    if !matches!(spec.translations, TranslationSet::SubGrid { .. }) {
        return Err(KsError::Check(
            "convolution contraction is measured with sub-grid translates".into(),
        ));
    }
    kernel.expect_domain(Domain::Space)?;
    u.grid.expect_same(&kernel.grid)?;
    let l1 = kernel.values.iter().map(|v| v.norm()).sum::<f64>() * u.grid.cell_volume();
    let uh = to_freq(u)?;
    let kh = to_freq(kernel)?;
    let mut conv = uh;
    for (c, k) in conv.values.iter_mut().zip(&kh.values) {
        *c *= k;
    }
    let conv = dft_inverse(&conv)?;
    let num = kato_norm(&conv, spec)?;
    let den = kato_norm(u, spec)?;
    if den == 0.0 {
        return Err(KsError::Check("zero norm in contraction check".into()));
    }
    let ratio = num / den;
    Ok(ConvContractionCheck {
        kernel_l1: l1,
        ratio,
        within_bound: ratio <= l1 * (1.0 + 1e-6),
    })
}

// ---------------------------------------------------------------------------
// Holomorphic maps and contours.
// ---------------------------------------------------------------------------

type MapFn = Arc<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>;
type DistFn = Arc<dyn Fn(&[Complex64]) -> f64 + Send + Sync>;

/// A holomorphic map `Phi: Omega subset C^d -> C` with an optional gradient
/// and the sup-norm distance to the complement of `Omega`.
#[derive(Clone)]
pub struct HoloMap {
    /// Display name.
    pub name: String,
    /// Number of complex arguments `d`.
    pub arity: usize,
    eval: MapFn,
    grad: Option<Vec<MapFn>>,
    omega_dist: DistFn,
}

impl std::fmt::Debug for HoloMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HoloMap")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .finish()
    }
}

impl HoloMap {
    /// Builds a map from closures.
    pub fn new(
        name: &str,
        arity: usize,
        eval: MapFn,
        grad: Option<Vec<MapFn>>,
        omega_dist: DistFn,
    ) -> Result<Self> {
        if arity == 0 || arity > 3 {
            return Err(KsError::Calculus(format!(
                "map arity must be between 1 and 3, got {arity}"
            )));
        }
        if let Some(g) = &grad {
            if g.len() != arity {
                return Err(KsError::Calculus("gradient arity mismatch".into()));
            }
        }
        Ok(HoloMap {
            name: name.to_string(),
            arity,
            eval,
            grad,
            omega_dist,
        })
    }

    /// Evaluates the map.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        (self.eval)(z)
    }

    /// Sup-norm distance of a point to the complement of the domain.
    pub fn omega_dist(&self, z: &[Complex64]) -> f64 {
        (self.omega_dist)(z)
    }

    /// The `k`-th partial derivative as a map with the same domain.
    pub fn partial(&self, k: usize) -> Result<HoloMap> {
        let grads = self
            .grad
            .as_ref()
            .ok_or_else(|| KsError::Calculus(format!("{} has no gradient", self.name)))?;
        HoloMap::new(
            &format!("{}_z{}", self.name, k + 1),
            self.arity,
            grads[k].clone(),
            None,
            self.omega_dist.clone(),
        )
    }
}

/// Distance function for entire maps: a fixed positive constant, so the
/// contour radius stays moderate regardless of the field.
const ENTIRE_DIST: f64 = 4.0;

/// The reciprocal map `1/z` on `Omega = {|z| > floor}`.
pub fn reciprocal_map(floor: f64) -> Result<HoloMap> {
    if !(floor > 0.0) {
        return Err(KsError::Calculus("reciprocal floor must be positive".into()));
    }
    HoloMap::new(
        "reciprocal",
        1,
        Arc::new(|z: &[Complex64]| 1.0 / z[0]),
        Some(vec![Arc::new(|z: &[Complex64]| -1.0 / (z[0] * z[0])) as MapFn]),
        Arc::new(move |z: &[Complex64]| z[0].norm() - floor),
    )
}

/// Names of the built-in maps.
pub fn builtin_names() -> &'static [&'static str] {
    &["identity", "reciprocal", "exp", "square", "product2"]
}

/// Looks up a built-in map by name.  `reciprocal` uses the floor 1/2
/// (domain `{|z| > 1/2}`); the others are entire.
pub fn builtin_holomap(name: &str) -> Result<HoloMap> {
    let entire: DistFn = Arc::new(|_: &[Complex64]| ENTIRE_DIST);
    match name {
        "identity" => HoloMap::new(
            "identity",
            1,
            Arc::new(|z: &[Complex64]| z[0]),
            Some(vec![
                Arc::new(|_: &[Complex64]| Complex64::new(1.0, 0.0)) as MapFn
            ]),
            entire,
        ),
        "reciprocal" => reciprocal_map(0.5),
        "exp" => HoloMap::new(
            "exp",
            1,
            Arc::new(|z: &[Complex64]| z[0].exp()),
            Some(vec![Arc::new(|z: &[Complex64]| z[0].exp()) as MapFn]),
            entire,
        ),
        "square" => HoloMap::new(
            "square",
            1,
            Arc::new(|z: &[Complex64]| z[0] * z[0]),
            Some(vec![Arc::new(|z: &[Complex64]| 2.0 * z[0]) as MapFn]),
            entire,
        ),
        "product2" => HoloMap::new(
            "product2",
            2,
            Arc::new(|z: &[Complex64]| z[0] * z[1]),
            Some(vec![
                Arc::new(|z: &[Complex64]| z[1]) as MapFn,
                Arc::new(|z: &[Complex64]| z[0]) as MapFn,
            ]),
            entire,
        ),
        other => Err(KsError::Calculus(format!("unknown built-in map `{other}`"))),
    }
}

/// A tensor-product contour `(∂D(0, radius))^arity`, each circle factor
/// discretized by `nodes` trapezoidal points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolydiscContour {
    /// Circle radius (equals `3r` in the calculus).
    pub radius: f64,
    /// Trapezoidal nodes per circle factor (power of two, at least 4).
    pub nodes: usize,
    /// Number of circle factors.
    pub arity: usize,
}

impl PolydiscContour {
    /// Validates and builds a contour.
    pub fn new(radius: f64, nodes: usize, arity: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(KsError::Calculus("contour radius must be positive".into()));
        }
        if nodes < 4 || !nodes.is_power_of_two() {
            return Err(KsError::Calculus(format!(
                "node count must be a power of two >= 4, got {nodes}"
            )));
        }
        if arity == 0 || arity > 3 {
            return Err(KsError::Calculus("contour arity must be between 1 and 3".into()));
        }
        Ok(PolydiscContour { radius, nodes, arity })
    }
}

/// Sup-norm contour radius parameter: `r = min_x dist(u(x), C^d \ Omega) / 8`.
pub fn range_radius(map: &HoloMap, fields: &[SampledField]) -> Result<f64> {
    check_fields(map.arity, fields)?;
    let len = fields[0].values.len();
    let mut r = f64::INFINITY;
    let mut z = vec![Complex64::new(0.0, 0.0); fields.len()];
    for idx in 0..len {
        for (k, f) in fields.iter().enumerate() {
            z[k] = f.values[idx];
        }
        r = r.min(map.omega_dist(&z));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(KsError::Calculus(format!(
            "range of the field touches the boundary of the domain (dist = {r})"
        )));
    }
    Ok(r / 8.0)
}

fn check_fields(arity: usize, fields: &[SampledField]) -> Result<()> {
    if fields.is_empty() || fields.len() != arity {
        return Err(KsError::Calculus(format!(
            "expected {arity} component fields, got {}",
            fields.len()
        )));
    }
    for f in fields {
        f.expect_domain(Domain::Space)?;
        fields[0].grid.expect_same(&f.grid)?;
    }
    Ok(())
}

/// Mollified companion fields within sup-distance `r/2` of `u`, at the
/// largest admissible mollification scale.
pub fn choose_companion(fields: &[SampledField], r: f64) -> Result<(Vec<SampledField>, f64)> {
    if fields.is_empty() {
        return Err(KsError::Calculus("no fields".into()));
    }
    let grid = &fields[0].grid;
    let max_dx = (0..grid.dim()).map(|a| grid.spacing(a)).fold(0.0, f64::max);
    let min_l = grid.box_lengths().iter().cloned().fold(f64::INFINITY, f64::min);
    let mut eps = min_l / 4.0;
    while eps >= 2.0 * max_dx {
        let mut companions = Vec::with_capacity(fields.len());
        let mut worst: f64 = 0.0;
        for f in fields {
            let v = mollify(f, eps)?;
            let err = f
                .values
                .iter()
                .zip(&v.values)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            worst = worst.max(err);
            companions.push(v);
        }
        if worst <= r / 2.0 {
            return Ok((companions, worst));
        }
        eps /= 2.0;
    }
    Err(KsError::Calculus(format!(
        "no companion within tolerance {} at this resolution",
        r / 2.0
    )))
}

/// Evaluates the contour integral for `Phi(u)` with a given companion.
///
/// Errors when any `|u_k - v_k|` exceeds `radius/6` (the `r/2` companion
/// tolerance), which would push a denominator below `3r - r/2`.
pub fn calderon_apply(
    map: &HoloMap,
    fields: &[SampledField],
    companions: &[SampledField],
    contour: &PolydiscContour,
) -> Result<SampledField> {
    check_fields(map.arity, fields)?;
    check_fields(map.arity, companions)?;
    fields[0].grid.expect_same(&companions[0].grid)?;
    if contour.arity != map.arity {
        return Err(KsError::Calculus("contour arity does not match the map".into()));
    }
    let d = map.arity;
    let q = contour.nodes;
    let radius = contour.radius;
    for k in 0..d {
        let worst = fields[k]
            .values
            .iter()
            .zip(&companions[k].values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if worst > radius / 6.0 + 1e-12 {
            return Err(KsError::Calculus(format!(
                "component {k}: companion distance {worst} exceeds r/2 = {}, \
                 a contour denominator would fall below 3r - r/2",
                radius / 6.0
            )));
        }
    }
    let nodes: Vec<Complex64> = (0..q)
        .map(|t| {
            let th = 2.0 * std::f64::consts::PI * t as f64 / q as f64;
            Complex64::from_polar(radius, th)
        })
        .collect();
    let grid = fields[0].grid.clone();
    let len = grid.len();
    let values: Vec<Complex64> = (0..len)
        .into_par_iter()
        .map(|idx| {
            let mut w = [Complex64::new(0.0, 0.0); 3];
            let mut v = [Complex64::new(0.0, 0.0); 3];
            for k in 0..d {
                v[k] = companions[k].values[idx];
                w[k] = fields[k].values[idx] - v[k];
            }
            // per-factor tables zeta/(zeta - w_k)
            let mut factor: Vec<Vec<Complex64>> = Vec::with_capacity(d);
            for k in 0..d {
                factor.push(nodes.iter().map(|&z| z / (z - w[k])).collect());
            }
            let mut z = vec![Complex64::new(0.0, 0.0); d];
            let mut sum = Complex64::new(0.0, 0.0);
            let mut t = vec![0usize; d];
            loop {
                let mut weight = Complex64::new(1.0, 0.0);
                for k in 0..d {
                    z[k] = nodes[t[k]] + v[k];
                    weight *= factor[k][t[k]];
                }
                sum += map.eval(&z) * weight;
                // advance the multi-index (fixed lexicographic order keeps
                // the summation deterministic)
                let mut carry = d;
                for k in (0..d).rev() {
                    t[k] += 1;
                    if t[k] < q {
                        carry = k;
                        break;
                    }
                    t[k] = 0;
                }
                if carry == d {
                    break;
                }
            }
            sum / (q as f64).powi(d as i32)
        })
        .collect();
    SampledField::new(grid, Domain::Space, values)
}

/// Diagnostics of a full composition pipeline run.
#[derive(Debug, Clone, Serialize)]
pub struct ComposeInfo {
    /// The radius parameter `r`.
    pub r: f64,
    /// Achieved companion sup-distance.
    pub companion_err: f64,
    /// Contour radius `3r`.
    pub radius: f64,
    /// Nodes per circle factor.
    pub nodes: usize,
}

/// Full pipeline: radius, companion, contour, contour integral.
pub fn compose(
    map: &HoloMap,
    fields: &[SampledField],
    nodes: usize,
) -> Result<(SampledField, ComposeInfo)> {
    let r = range_radius(map, fields)?;
    let (companions, companion_err) = choose_companion(fields, r)?;
    let contour = PolydiscContour::new(3.0 * r, nodes, map.arity)?;
    let out = calderon_apply(map, fields, &companions, &contour)?;
    Ok((
        out,
        ComposeInfo {
            r,
            companion_err,
            radius: contour.radius,
            nodes,
        },
    ))
}

/// Pointwise reciprocal `1/u` through the contour calculus, for fields with
/// `|u| >= c > 0` everywhere.
pub fn invert(u: &SampledField, c: f64) -> Result<SampledField> {
    invert_with_nodes(u, c, 64)
}

/// [`invert`] with an explicit node count.
pub fn invert_with_nodes(u: &SampledField, c: f64, nodes: usize) -> Result<SampledField> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(KsError::Calculus("invertibility floor must be positive".into()));
    }
    let min_mod = u.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if min_mod < c * (1.0 - 1e-12) {
        return Err(KsError::Calculus(format!(
            "field modulus dips to {min_mod}, below the floor {c}"
        )));
    }
    let map = reciprocal_map(c / 2.0)?;
    let (out, _) = compose(&map, std::slice::from_ref(u), nodes)?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Spectra.
// ---------------------------------------------------------------------------

/// Outcome of a joint-spectrum membership query.
#[derive(Debug, Clone, Serialize)]
pub enum SpectrumResult {
    /// `lambda` is within resolution distance of the sampled range.
    Member {
        /// Sup-norm distance to the sampled range.
        distance: f64,
    },
    /// `lambda` is clearly outside; a Bezout witness `(v_k)` with
    /// `sum_k v_k (u_k - lambda_k) = 1` was constructed.
    NonMember {
        /// Sup-norm distance to the sampled range.
        distance: f64,
        /// `max_x |sum_k v_k (u_k - lambda_k) - 1|`.
        bezout_residual: f64,
    },
    /// `lambda` sits in the resolution tolerance band; undecidable on this
    /// grid.
    Indeterminate {
        /// Sup-norm distance to the sampled range.
        distance: f64,
        /// The tolerance band edge.
        tolerance: f64,
    },
}

/// Joint-spectrum membership of `lambda` for a tuple of fields, with the
/// Bezout witness construction
/// `v_k = conj(u_k - lambda_k) / sum_j |u_j - lambda_j|^2` for non-members.
///
/// The resolution tolerance is twice the largest jump of `u` between
/// neighboring grid points (the sampled range can miss intermediate values
/// by at most that much).
pub fn spectrum_member(
    fields: &[SampledField],
    lambda: &[Complex64],
    nodes: usize,
) -> Result<(SpectrumResult, Option<Vec<SampledField>>)> {
    if fields.is_empty() || fields.len() != lambda.len() {
        return Err(KsError::Calculus("one lambda component per field required".into()));
    }
    check_fields(fields.len(), fields)?;
    let grid = fields[0].grid.clone();
    let n = grid.dim();
    // distance to the sampled range
    let len = grid.len();
    let mut dist = f64::INFINITY;
    for idx in 0..len {
        let mut d: f64 = 0.0;
        for (k, f) in fields.iter().enumerate() {
            d = d.max((f.values[idx] - lambda[k]).norm());
        }
        dist = dist.min(d);
    }
    // resolution tolerance: largest neighbor jump over all fields and axes
    let mut jump: f64 = 0.0;
    let mut scratch = vec![0usize; n];
    let mut nb = vec![0i64; n];
    for f in fields {
        for idx in 0..len {
            grid.unravel(idx, &mut scratch);
            for a in 0..n {
                for e in 0..n {
                    nb[e] = scratch[e] as i64;
                }
                nb[a] += 1;
                let j = (f.values[grid.ravel_wrapped(&nb)] - f.values[idx]).norm();
                jump = jump.max(j);
            }
        }
    }
    let tol = 2.0 * jump;
    if dist <= tol {
        return Ok((SpectrumResult::Member { distance: dist }, None));
    }
    if dist <= 2.0 * tol {
        return Ok((
            SpectrumResult::Indeterminate {
                distance: dist,
                tolerance: 2.0 * tol,
            },
            None,
        ));
    }
    // Bezout witness: v_k = conj(u_k - lambda_k) * (sum_j |u_j - lambda_j|^2)^(-1).
    let mut denom = SampledField::zeros(grid.clone(), Domain::Space);
    for (k, f) in fields.iter().enumerate() {
        for (dv, uv) in denom.values.iter_mut().zip(&f.values) {
            let d = uv - lambda[k];
            *dv += Complex64::new(d.norm_sqr(), 0.0);
        }
    }
    let floor = denom.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    let inv = invert_with_nodes(&denom, floor * (1.0 - 1e-12), nodes)?;
    let mut witness = Vec::with_capacity(fields.len());
    let mut bezout = vec![Complex64::new(0.0, 0.0); len];
    for (k, f) in fields.iter().enumerate() {
        let mut vk = SampledField::zeros(grid.clone(), Domain::Space);
        for idx in 0..len {
            vk.values[idx] = (f.values[idx] - lambda[k]).conj() * inv.values[idx];
            bezout[idx] += vk.values[idx] * (f.values[idx] - lambda[k]);
        }
        witness.push(vk);
    }
    let bezout_residual = bezout
        .iter()
        .map(|b| (b - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    Ok((
        SpectrumResult::NonMember {
            distance: dist,
            bezout_residual,
        },
        Some(witness),
    ))
}

// ---------------------------------------------------------------------------
// Chain rule, division, K_p composition.
// ---------------------------------------------------------------------------

/// Measured chain-rule residuals.
#[derive(Debug, Clone, Serialize)]
pub struct ChainRuleCheck {
    /// Relative `H^s'` residual of
    /// `d_j Phi(u) - sum_k (d Phi/d z_k)(u) d_j u_k`, per axis `j`.
    pub residuals: Vec<f64>,
    /// The largest residual.
    pub max_residual: f64,
}

/// Verifies the chain rule for a map with a gradient.
pub fn chain_rule_check(
    map: &HoloMap,
    fields: &[SampledField],
    s_prime: &BlockOrder,
    nodes: usize,
) -> Result<ChainRuleCheck> {
    let (g, _) = compose(map, fields, nodes)?;
    let grid = fields[0].grid.clone();
    let n = grid.dim();
    let mut partials = Vec::with_capacity(map.arity);
    for k in 0..map.arity {
        let (pk, _) = compose(&map.partial(k)?, fields, nodes)?;
        partials.push(pk);
    }
    let mut residuals = Vec::with_capacity(n);
    for axis in 0..n {
        let dg = derivative(&g, axis)?;
        let mut rhs = SampledField::zeros(grid.clone(), Domain::Space);
        for (k, pk) in partials.iter().enumerate() {
            let duk = derivative(&fields[k], axis)?;
            let term = pointwise_mul(pk, &duk)?;
            for (r, t) in rhs.values.iter_mut().zip(&term.values) {
                *r += t;
            }
        }
        let mut diff = dg.clone();
        for (d, r) in diff.values.iter_mut().zip(&rhs.values) {
            *d -= r;
        }
        let scale = h_norm(&dg, s_prime)?.max(h_norm(&rhs, s_prime)?).max(1e-300);
        residuals.push(h_norm(&diff, s_prime)? / scale);
    }
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(ChainRuleCheck {
        residuals,
        max_residual,
    })
}

/// Result of the compactly supported division `u / v`.
#[derive(Debug, Clone, Serialize)]
pub struct DivideOutcome {
    /// Margin of the cutoff plateau around the declared support.
    pub margin: f64,
    /// `max |quotient * v - u|` over the grid (padded product).
    pub residual: f64,
}

/// Divides a compactly supported field by a divisor bounded below on its
/// support: builds a cutoff `phi` that is 1 on `support` and vanishes where
/// `|v|` might dip, inverts `w = phi |v|^2 + (c^2/4)(1 - phi) >= c^2/4`, and
/// returns `conj(v) u / w`, which equals `u / v` on the support of `u`.
pub fn divide(
    u: &SampledField,
    v: &SampledField,
    c: f64,
    support: &[(f64, f64)],
) -> Result<(SampledField, DivideOutcome)> {
    u.expect_domain(Domain::Space)?;
    v.expect_domain(Domain::Space)?;
    u.grid.expect_same(&v.grid)?;
    if !(c > 0.0) {
        return Err(KsError::Calculus("divisor floor must be positive".into()));
    }
    let grid = u.grid.clone();
    let n = grid.dim();
    if support.len() != n {
        return Err(KsError::Calculus("one support interval per axis required".into()));
    }
    let len = grid.len();
    let mut scratch = vec![0usize; n];
    let mut x = vec![0.0f64; n];
    let peak = u.max_abs().max(1e-300);
    for idx in 0..len {
        grid.x_at(idx, &mut scratch, &mut x);
        let inside = (0..n).all(|a| x[a] >= support[a].0 && x[a] <= support[a].1);
        if !inside && u.values[idx].norm() > 1e-12 * peak {
            return Err(KsError::Calculus(
                "numerator is not supported in the declared support box".into(),
            ));
        }
        if inside && v.values[idx].norm() < c * (1.0 - 1e-9) {
            return Err(KsError::Calculus(format!(
                "divisor modulus dips below {c} on the support"
            )));
        }
    }
    // Find the widest margin on which |v| keeps half the floor.
    let mut margin = f64::INFINITY;
    for a in 0..n {
        let l = grid.box_lengths()[a];
        margin = margin
            .min(support[a].0 + l / 2.0)
            .min(l / 2.0 - support[a].1)
            .min(1.0);
    }
    let min_dx = (0..n).map(|a| grid.spacing(a)).fold(f64::INFINITY, f64::min);
    let phi = loop {
        if margin < 8.0 * min_dx {
            return Err(KsError::Calculus(
                "no admissible cutoff margin at this resolution".into(),
            ));
        }
        let mut profiles = Vec::with_capacity(n);
        for &(lo, hi) in support {
            profiles.push(bump_profile(lo - margin, lo, hi, hi + margin)?);
        }
        let phi = crate::partition::window_from_profiles(&grid, &profiles)?;
        let ok = (0..len).all(|idx| {
            phi.field.values[idx].re <= 1e-14 || v.values[idx].norm() >= c / 2.0
        });
        if ok {
            break phi;
        }
        margin /= 2.0;
    };
    // w = phi |v|^2 + (c^2/4)(1 - phi) >= c^2 / 4
    let quarter = c * c / 4.0;
    let mut w = SampledField::zeros(grid.clone(), Domain::Space);
    for idx in 0..len {
        let p = phi.field.values[idx].re;
        w.values[idx] = Complex64::new(p * v.values[idx].norm_sqr() + quarter * (1.0 - p), 0.0);
    }
    let winv = invert(&w, quarter * (1.0 - 1e-9))?;
    let mut quotient = SampledField::zeros(grid.clone(), Domain::Space);
    for idx in 0..len {
        quotient.values[idx] = u.values[idx] * v.values[idx].conj() * winv.values[idx];
    }
    let back = crate::sobolev::multiply(&quotient, v)?;
    let residual = back
        .values
        .iter()
        .zip(&u.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok((quotient, DivideOutcome { margin, residual }))
}

/// Measured `K_p^s` composition datum for maps with `Phi(0) = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct KpCompositionCheck {
    /// `||Phi(u)||_{s,p,chi}`.
    pub composed_norm: f64,
    /// `||u||_{s,p,chi}`.
    pub field_norm: f64,
    /// Max over lattice windows of
    /// `||Phi(u) tau_gamma chi||_{H^s} / ||u tau_gamma chi||_{H^s}`
    /// (windows where `u` has no mass are required to stay empty).
    pub max_window_ratio: f64,
    /// True when no window carries composed mass without field mass.
    pub locality_ok: bool,
}

/// Verifies that composition with a map fixing 0 stays in `K_p^s` and acts
/// window-by-window (vanishing windows stay vanishing).
pub fn kp_composition_check(
    map: &HoloMap,
    u: &SampledField,
    s: &BlockOrder,
    p: PNorm,
    window: &Window,
    translations: &TranslationSet,
    nodes: usize,
) -> Result<KpCompositionCheck> {
    if map.arity != 1 {
        return Err(KsError::Calculus("composition check takes a one-variable map".into()));
    }
    let zero = [Complex64::new(0.0, 0.0)];
    if map.eval(&zero).norm() > 1e-12 {
        return Err(KsError::Calculus(format!(
            "{} does not fix 0; K_p composition needs Phi(0) = 0",
            map.name
        )));
    }
    let (g, _) = compose(map, std::slice::from_ref(u), nodes)?;
    let spec = KatoNormSpec {
        s: s.clone(),
        p,
        window: window.clone(),
        translations: translations.clone(),
    };
    let composed_norm = kato_norm(&g, &spec)?;
    let field_norm = kato_norm(u, &spec)?;
    // per-window ratios over the lattice translates
    let (shifts, _) = translations.shifts(&u.grid)?;
    let mut max_ratio: f64 = 0.0;
    let mut locality_ok = true;
    let mut window_norms = Vec::with_capacity(shifts.len());
    for sh in &shifts {
        let w = crate::grid::translate(&window.field, sh)?;
        let nu = h_norm(&pointwise_mul(&w, u)?, s)?;
        let ng = h_norm(&pointwise_mul(&w, &g)?, s)?;
        window_norms.push((nu, ng));
    }
    let peak = window_norms.iter().map(|(nu, _)| *nu).fold(0.0, f64::max);
    for (nu, ng) in &window_norms {
        if *nu > 1e-9 * peak {
            max_ratio = max_ratio.max(ng / nu);
        } else if *ng > 1e-7 * peak {
            locality_ok = false;
        }
    }
    Ok(KpCompositionCheck {
        composed_norm,
        field_norm,
        max_window_ratio: max_ratio,
        locality_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample};
    use std::f64::consts::PI;

    fn smooth_field() -> SampledField {
        let g = make_grid(&[1], &[256], &[2.0 * PI]).unwrap();
        sample(&g, |x| Complex64::new(0.4 * x[0].sin(), 0.2 * (2.0 * x[0]).cos()))
    }

    #[test]
    fn mollifier_kernel_has_unit_mass_and_mollify_preserves_means() {
        let g = make_grid(&[1], &[512], &[8.0]).unwrap();
        let u = sample(&g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
        let k = mollifier_kernel(&u, 0.25).unwrap();
        let mass: f64 = k.values.iter().map(|v| v.re).sum::<f64>() * g.cell_volume();
        assert!((mass - 1.0).abs() < 1e-14);
        let sm = mollify(&u, 0.25).unwrap();
        let mean = |f: &SampledField| {
            f.values.iter().sum::<Complex64>() * g.cell_volume()
        };
        assert!((mean(&u) - mean(&sm)).norm() < 1e-13);
    }

    #[test]
    fn mollifier_rates_sit_below_the_theta_bound() {
        let g = make_grid(&[1], &[1024], &[8.0]).unwrap();
        let u = sample(&g, |x| Complex64::new((-2.0 * x[0] * x[0]).exp(), 0.0));
        let scales: Vec<f64> = (1..=6).map(|k| (0.5f64).powi(k)).collect();
        let out = mollifier_rate_check(&u, 1.5, 0.5, &scales).unwrap();
        assert!(out.within_bounds, "{out:?}");
        assert!(out.slope >= out.theta - 0.1, "{out:?}");
    }

    #[test]
    fn contour_identity_reproduces_the_field() {
        let u = smooth_field();
        let map = builtin_holomap("identity").unwrap();
        let (g, info) = compose(&map, std::slice::from_ref(&u), 64).unwrap();
        let err = g
            .values
            .iter()
            .zip(&u.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "err = {err}, info = {info:?}");
    }

    #[test]
    fn contour_exp_matches_pointwise_exponentials() {
        let u = smooth_field();
        let map = builtin_holomap("exp").unwrap();
        let (g, _) = compose(&map, std::slice::from_ref(&u), 64).unwrap();
        let err = g
            .values
            .iter()
            .zip(&u.values)
            .map(|(a, b)| (a - b.exp()).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "err = {err}");
    }

    #[test]
    fn contour_product2_multiplies_two_fields() {
        let g = make_grid(&[1], &[128], &[2.0 * PI]).unwrap();
        let u1 = sample(&g, |x| Complex64::new(0.3 * x[0].cos(), 0.0));
        let u2 = sample(&g, |x| Complex64::new(0.0, 0.2 * x[0].sin()));
        let map = builtin_holomap("product2").unwrap();
        let (p, _) = compose(&map, &[u1.clone(), u2.clone()], 32).unwrap();
        let err = p
            .values
            .iter()
            .zip(u1.values.iter().zip(&u2.values))
            .map(|(a, (b, c))| (a - b * c).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "err = {err}");
    }

    #[test]
    fn invert_multiplies_back_to_one() {
        let g = make_grid(&[1], &[256], &[2.0 * PI]).unwrap();
        let u = sample(&g, |x| Complex64::new(2.0 + x[0].sin(), 0.0));
        let inv = invert(&u, 1.0).unwrap();
        let err = inv
            .values
            .iter()
            .zip(&u.values)
            .map(|(a, b)| (a * b - Complex64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "err = {err}");
    }

    #[test]
    fn invert_rejects_fields_that_touch_the_floor() {
        let g = make_grid(&[1], &[64], &[2.0 * PI]).unwrap();
        let u = sample(&g, |x| Complex64::new(x[0].sin(), 0.0));
        assert!(invert(&u, 0.5).is_err());
    }

    #[test]
    fn spectrum_query_separates_members_from_non_members() {
        let g = make_grid(&[1], &[256], &[2.0 * PI]).unwrap();
        let u = sample(&g, |x| Complex64::new(2.0 + x[0].sin(), 0.0));
        // 0 is far from the range [1, 3]
        let (res, witness) =
            spectrum_member(std::slice::from_ref(&u), &[Complex64::new(0.0, 0.0)], 64).unwrap();
        match res {
            SpectrumResult::NonMember { bezout_residual, .. } => {
                assert!(bezout_residual < 1e-8, "{bezout_residual}");
                assert!(witness.is_some());
            }
            other => panic!("expected NonMember, got {other:?}"),
        }
        // 2 is attained
        let (res, _) =
            spectrum_member(std::slice::from_ref(&u), &[Complex64::new(2.0, 0.0)], 64).unwrap();
        assert!(matches!(res, SpectrumResult::Member { .. }), "{res:?}");
    }

    #[test]
    fn chain_rule_residual_is_small_for_exp() {
        let u = smooth_field();
        let map = builtin_holomap("exp").unwrap();
        let sp = BlockOrder::isotropic(0.5, 1).unwrap();
        let out = chain_rule_check(&map, std::slice::from_ref(&u), &sp, 64).unwrap();
        assert!(out.max_residual < 1e-6, "{out:?}");
    }

    #[test]
    fn divide_reconstructs_the_numerator() {
        let g = make_grid(&[1], &[1024], &[4.0 * PI]).unwrap();
        let u = sample(&g, |x| {
            let t = x[0] / 1.5;
            if t.abs() < 1.0 {
                Complex64::new((-1.0 / (1.0 - t * t)).exp(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let v = sample(&g, |x| Complex64::new(2.0 + x[0].sin(), 0.0));
        let (q, out) = divide(&u, &v, 1.0, &[(-1.5, 1.5)]).unwrap();
        assert!(out.residual < 1e-8, "{out:?}");
        // q equals u/v pointwise on the support
        let mid = g.len() / 2;
        let expect = u.values[mid] / v.values[mid];
        assert!((q.values[mid] - expect).norm() < 1e-9);
    }

    #[test]
    fn divide_rejects_a_divisor_that_dips_on_the_support() {
        let g = make_grid(&[1], &[256], &[4.0 * PI]).unwrap();
        let u = sample(&g, |x| {
            let t = x[0] / 1.5;
            if t.abs() < 1.0 {
                Complex64::new((-1.0 / (1.0 - t * t)).exp(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let v = sample(&g, |x| Complex64::new(x[0].sin(), 0.0)); // vanishes at 0
        assert!(matches!(
            divide(&u, &v, 0.5, &[(-1.5, 1.5)]),
            Err(KsError::Calculus(_))
        ));
    }
}
