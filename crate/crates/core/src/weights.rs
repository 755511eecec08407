//! Anisotropic Bessel weights and weighted convolution bounds.
//!
//! For a block decomposition `R^n = R^{n_1} x ... x R^{n_j}` and a vector of
//! orders `s = (s_1, ..., s_j)` the weight is
//! `<<xi>>^s = prod_l (1 + |xi^(l)|^2)^(s_l / 2)`.
//! The module provides the weight itself, the Peetre inequality margin
//! `2^(|s|_1/2) <<xi>>^s <<eta>>^|s| - <<xi+eta>>^s >= 0`, `L^1` norms of
//! weights `<.>^(-2 lambda)` on `R^n`, and the explicit constant in the
//! weighted convolution inequality
//! `<.>^(-2s) * <.>^(-2t) <= C(s,t,eps,n) <.>^(-2 sigma)`.

use serde::Serialize;

use crate::error::{KsError, Result};
use crate::grid::GridSpec;

/// Per-block smoothness orders attached to a block decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOrder {
    orders: Vec<f64>,
    block_dims: Vec<usize>,
}

impl BlockOrder {
    /// Builds an order vector; one finite order per block.
    pub fn new(orders: &[f64], block_dims: &[usize]) -> Result<Self> {
        if orders.is_empty() || orders.len() != block_dims.len() {
            return Err(KsError::InvalidOrder(format!(
                "{} orders for {} blocks",
                orders.len(),
                block_dims.len()
            )));
        }
        if orders.iter().any(|s| !s.is_finite()) {
            return Err(KsError::InvalidOrder("orders must be finite".into()));
        }
        if block_dims.iter().any(|&d| d == 0) {
            return Err(KsError::InvalidOrder("block dimensions must be positive".into()));
        }
        Ok(BlockOrder {
            orders: orders.to_vec(),
            block_dims: block_dims.to_vec(),
        })
    }

    /// Isotropic order: a single block covering all `n` axes.
    pub fn isotropic(s: f64, n: usize) -> Result<Self> {
        BlockOrder::new(&[s], &[n])
    }

    /// Convenience: the same block layout as a grid, isotropic per block.
    pub fn for_grid(grid: &GridSpec, orders: &[f64]) -> Result<Self> {
        BlockOrder::new(orders, grid.block_dims())
    }

    /// The per-block orders.
    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    /// The per-block dimensions.
    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    /// Total dimension `n`.
    pub fn dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    /// `|s|_1 = sum_l |s_l|`.
    pub fn total_abs(&self) -> f64 {
        self.orders.iter().map(|s| s.abs()).sum()
    }

    /// The order vector `|s| = (|s_1|, ..., |s_j|)`.
    pub fn abs(&self) -> BlockOrder {
        BlockOrder {
            orders: self.orders.iter().map(|s| s.abs()).collect(),
            block_dims: self.block_dims.clone(),
        }
    }

    /// Component-wise `s + c` on every block.
    pub fn shift(&self, c: f64) -> BlockOrder {
        BlockOrder {
            orders: self.orders.iter().map(|s| s + c).collect(),
            block_dims: self.block_dims.clone(),
        }
    }

    /// Scales every order by `c`.
    pub fn scale(&self, c: f64) -> BlockOrder {
        BlockOrder {
            orders: self.orders.iter().map(|s| s * c).collect(),
            block_dims: self.block_dims.clone(),
        }
    }

    /// Errors unless the block layout matches the grid's.
    pub fn expect_compatible(&self, grid: &GridSpec) -> Result<()> {
        if self.block_dims != grid.block_dims() {
            return Err(KsError::InvalidOrder(format!(
                "order blocks {:?} do not match grid blocks {:?}",
                self.block_dims,
                grid.block_dims()
            )));
        }
        Ok(())
    }
}

/// Isotropic Japanese bracket `<xi> = (1 + |xi|^2)^(1/2)` raised to power `s`.
pub fn bracket_pow(xi: &[f64], s: f64) -> f64 {
    let q: f64 = xi.iter().map(|v| v * v).sum();
    (0.5 * s * q.ln_1p()).exp()
}

/// Anisotropic weight `<<xi>>^s = prod_l <xi^(l)>^(s_l)`.
pub fn multi_bracket(xi: &[f64], s: &BlockOrder) -> f64 {
    debug_assert_eq!(xi.len(), s.dim());
    let mut log = 0.0;
    let mut off = 0;
    for (l, &d) in s.block_dims.iter().enumerate() {
        let q: f64 = xi[off..off + d].iter().map(|v| v * v).sum();
        log += 0.5 * s.orders[l] * q.ln_1p();
        off += d;
    }
    log.exp()
}

/// Margin of the Peetre inequality:
/// `2^(|s|_1/2) <<xi>>^s <<eta>>^|s| - <<xi + eta>>^s` (nonnegative).
pub fn peetre_margin(xi: &[f64], eta: &[f64], s: &BlockOrder) -> f64 {
    let sum: Vec<f64> = xi.iter().zip(eta).map(|(a, b)| a + b).collect();
    let factor = (0.5 * s.total_abs() * std::f64::consts::LN_2).exp();
    factor * multi_bracket(xi, s) * multi_bracket(eta, &s.abs()) - multi_bracket(&sum, s)
}

// ---------------------------------------------------------------------------
// Quadrature for L^1 norms of radial weights.
// ---------------------------------------------------------------------------

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(g: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(g >= 1);
    let mut xs = vec![0.0; g];
    let mut ws = vec![0.0; g];
    let gf = g as f64;
    for i in 0..g.div_ceil(2) {
        // Newton iteration from the Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (gf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=g {
                let kf = k as f64;
                let pk = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = pk;
            }
            dp = gf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        xs[i] = -x;
        xs[g - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[i] = w;
        ws[g - 1 - i] = w;
    }
    if g % 2 == 1 {
        xs[g / 2] = 0.0;
    }
    (xs, ws)
}

/// Composite Gauss-Legendre on `[a, b]` with panels graded geometrically
/// toward `a` (factor 1/2 per panel) to absorb mild endpoint irregularity.
fn graded_gl(a: f64, b: f64, g: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (xs, ws) = gauss_legendre(g);
    let mut total = 0.0;
    let mut hi = b;
    // Panels (a + w/2, a + w], (a + w/4, a + w/2], ... down to the rounding
    // floor; the integrand is bounded so the skipped sliver near `a` is
    // O(machine epsilon) relative.
    while hi - a > (b - a) * 1e-17 {
        let lo = a + (hi - a) / 2.0;
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut panel = 0.0;
        for (x, w) in xs.iter().zip(&ws) {
            panel += w * f(mid + half * x);
        }
        total += panel * half;
        hi = lo;
    }
    total
}

/// Plain Gauss-Legendre on `[a, b]` (for analytic integrands).
fn plain_gl(a: f64, b: f64, g: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (xs, ws) = gauss_legendre(g);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut total = 0.0;
    for (x, w) in xs.iter().zip(&ws) {
        total += w * f(mid + half * x);
    }
    total * half
}

/// `Gamma(n/2)` for integer `n >= 1`, by the half-integer recursion.
fn gamma_half(n: usize) -> f64 {
    let mut z = n as f64 / 2.0;
    let mut acc = 1.0;
    while z > 1.25 {
        z -= 1.0;
        acc *= z;
    }
    // z is now 0.5 or 1.0
    if (z - 0.5).abs() < 1e-12 {
        acc * std::f64::consts::PI.sqrt()
    } else {
        acc
    }
}

/// Radial part of the `L^1` weight integral for a given node count.
fn weight_radial(lambda: f64, n: usize, g: usize) -> f64 {
    // integral_0^inf r^(n-1) (1+r^2)^(-lambda) dr, split at r = 1 and the far
    // part inverted (r = 1/rho) and power-substituted
    // (rho = sigma^(1/(2 lambda - n))) so that both pieces are quadratures of
    // bounded integrands on [0, 1].
    let near = plain_gl(0.0, 1.0, g, |r| {
        r.powi(n as i32 - 1) * (-lambda * (r * r).ln_1p()).exp()
    });
    let p = 2.0 * lambda - n as f64;
    let far = graded_gl(0.0, 1.0, g, |sig| {
        let rho = sig.powf(1.0 / p);
        (-lambda * (rho * rho).ln_1p()).exp() / p
    });
    near + far
}

/// `L^1(R^n)` norm of the weight `<x>^(-2 lambda)`, i.e.
/// `∫ (1 + |x|^2)^(-lambda) dx`; requires `2 lambda > n`.
///
/// Reduced to a radial integral (`omega_(n-1) ∫ r^(n-1) <r>^(-2 lambda) dr`)
/// and evaluated with composite Gauss-Legendre after substitutions that keep
/// the integrand bounded; the node count is doubled once as a convergence
/// check.
pub fn weight_l1_norm(lambda: f64, n: usize) -> Result<f64> {
    weight_l1_norm_with(lambda, n, 48)
}

/// Same as [`weight_l1_norm`] with an explicit base node count.
pub fn weight_l1_norm_with(lambda: f64, n: usize, nodes: usize) -> Result<f64> {
    if n == 0 {
        return Err(KsError::InvalidOrder("dimension must be positive".into()));
    }
    if !(2.0 * lambda > n as f64) {
        return Err(KsError::InvalidOrder(format!(
            "<x>^(-2*{lambda}) is not integrable on R^{n} (need 2*lambda > n)"
        )));
    }
    let g = nodes.max(8);
    let sphere = 2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half(n);
    let coarse = sphere * weight_radial(lambda, n, g);
    let fine = sphere * weight_radial(lambda, n, 2 * g);
    if (coarse - fine).abs() > 1e-10 * fine.abs() {
        return Err(KsError::Quadrature(format!(
            "weight integral did not converge: {coarse} vs {fine} at {g}/{} nodes",
            2 * g
        )));
    }
    Ok(fine)
}

// ---------------------------------------------------------------------------
// Convolution bound constants.
// ---------------------------------------------------------------------------

/// Per-block exponent `sigma_l = min(s_l, t_l, s_l + t_l - n_l/2 - eps_l)`
/// of the weighted convolution inequality.
pub fn sigma_eps(s: &BlockOrder, t: &BlockOrder, eps: &[f64]) -> Result<BlockOrder> {
    validate_sigma_inputs(s, t, eps)?;
    let orders: Vec<f64> = (0..s.orders.len())
        .map(|l| {
            let nl = s.block_dims[l] as f64;
            s.orders[l]
                .min(t.orders[l])
                .min(s.orders[l] + t.orders[l] - nl / 2.0 - eps[l])
        })
        .collect();
    BlockOrder::new(&orders, &s.block_dims)
}

/// Default slack: `eps_l = (s_l + t_l - n_l/2) / 4` per block.
pub fn default_eps(s: &BlockOrder, t: &BlockOrder) -> Result<Vec<f64>> {
    if s.block_dims != t.block_dims {
        return Err(KsError::InvalidOrder("orders have different block layouts".into()));
    }
    (0..s.orders.len())
        .map(|l| {
            let gap = s.orders[l] + t.orders[l] - s.block_dims[l] as f64 / 2.0;
            if gap <= 0.0 {
                Err(KsError::InvalidOrder(format!(
                    "block {l}: need s_l + t_l > n_l/2 for the default slack"
                )))
            } else {
                Ok(gap / 4.0)
            }
        })
        .collect()
}

fn validate_sigma_inputs(s: &BlockOrder, t: &BlockOrder, eps: &[f64]) -> Result<()> {
    if s.block_dims != t.block_dims {
        return Err(KsError::InvalidOrder("orders have different block layouts".into()));
    }
    if eps.len() != s.orders.len() {
        return Err(KsError::InvalidOrder(format!(
            "{} slack values for {} blocks",
            eps.len(),
            s.orders.len()
        )));
    }
    for (l, &e) in eps.iter().enumerate() {
        if !(e > 0.0 && e.is_finite()) {
            return Err(KsError::InvalidOrder(format!("block {l}: slack must be positive")));
        }
        let nl = s.block_dims[l] as f64;
        let (sl, tl) = (s.orders[l], t.orders[l]);
        if (sl < 0.0 || tl < 0.0) && sl + tl <= nl / 2.0 {
            return Err(KsError::InvalidOrder(format!(
                "block {l}: with a negative order the bound needs s_l + t_l > n_l/2"
            )));
        }
    }
    Ok(())
}

/// Explicit constant `C(s, t, eps, n)` in
/// `<.>^(-2s) * <.>^(-2t) <= C <.>^(-2 sigma)`, per block:
/// `2^(2 sigma_l + 1) ||<.>^(-2(s_l + t_l - sigma_l))||_1` when both orders
/// are nonnegative, `2^|sigma_l| ||<.>^(-2(s_l + t_l))||_1` otherwise.
pub fn conv_bound_constant(s: &BlockOrder, t: &BlockOrder, eps: &[f64]) -> Result<f64> {
    let sigma = sigma_eps(s, t, eps)?;
    let mut c = 1.0;
    for l in 0..s.orders.len() {
        let nl = s.block_dims[l];
        let (sl, tl, gl) = (s.orders[l], t.orders[l], sigma.orders[l]);
        let cl = if sl >= 0.0 && tl >= 0.0 {
            (2.0f64).powf(2.0 * gl + 1.0) * weight_l1_norm(sl + tl - gl, nl)?
        } else {
            (2.0f64).powf(gl.abs()) * weight_l1_norm(sl + tl, nl)?
        };
        c *= cl;
    }
    Ok(c)
}

/// Outcome of the discrete convolution-bound measurement.
#[derive(Debug, Clone, Serialize)]
pub struct ConvWeightCheck {
    /// The analytic constant `C(s, t, eps, n)`.
    pub constant: f64,
    /// Max over the frequency lattice of the quadrature-convolution ratio
    /// `(w_s * w_t)(xi) / <<xi>>^(-2 sigma)`.
    pub max_ratio: f64,
    /// Same ratio on the lattice with doubled extent.
    pub max_ratio_refined: f64,
    /// True when `max_ratio <= constant`.
    pub within_bound: bool,
}

fn conv_max_ratio(
    s: &BlockOrder,
    t: &BlockOrder,
    sigma: &BlockOrder,
    samples: &[usize],
    steps: &[f64],
) -> f64 {
    let n = samples.len();
    let total: usize = samples.iter().product();
    let cell: f64 = steps.iter().product();
    // Frequency lattice values per axis: 2*pi*wrap(k)/L.
    let freq = |axis: usize, k: usize| -> f64 {
        let half = samples[axis] as i64 / 2;
        let m = k as i64;
        let m = if m < half { m } else { m - samples[axis] as i64 };
        m as f64 * steps[axis]
    };
    let unravel = |mut idx: usize, out: &mut [usize]| {
        for a in (0..n).rev() {
            out[a] = idx % samples[a];
            idx /= samples[a];
        }
    };
    // Table of the second weight on the difference lattice
    // d in [-(N-1), N-1]^n, so the inner loop is a pure lookup.
    let diff_dims: Vec<usize> = samples.iter().map(|&m| 2 * m - 1).collect();
    let diff_total: usize = diff_dims.iter().product();
    let mut g_table = vec![0.0f64; diff_total];
    {
        let mut sc = vec![0usize; n];
        let mut xi = vec![0.0f64; n];
        for (idx, slot) in g_table.iter_mut().enumerate() {
            let mut rem = idx;
            for a in (0..n).rev() {
                sc[a] = rem % diff_dims[a];
                rem /= diff_dims[a];
            }
            for a in 0..n {
                xi[a] = (sc[a] as i64 - (samples[a] as i64 - 1)) as f64 * steps[a];
            }
            *slot = multi_bracket(&xi, &t.scale(-2.0));
        }
    }
    let mut f_vals = vec![0.0f64; total];
    {
        let mut sc = vec![0usize; n];
        let mut xi = vec![0.0f64; n];
        for (idx, slot) in f_vals.iter_mut().enumerate() {
            unravel(idx, &mut sc);
            for a in 0..n {
                xi[a] = freq(a, sc[a]);
            }
            *slot = multi_bracket(&xi, &s.scale(-2.0));
        }
    }
    // Signed frequency integers per point, for difference-table indexing.
    let mut ints = vec![0i64; total * n];
    {
        let mut sc = vec![0usize; n];
        for idx in 0..total {
            unravel(idx, &mut sc);
            for a in 0..n {
                let half = samples[a] as i64 / 2;
                let m = sc[a] as i64;
                ints[idx * n + a] = if m < half { m } else { m - samples[a] as i64 };
            }
        }
    }
    let mut max_ratio: f64 = 0.0;
    let mut xi = vec![0.0f64; n];
    for xi_idx in 0..total {
        let mut conv = 0.0;
        for eta_idx in 0..total {
            let fv = f_vals[eta_idx];
            if fv == 0.0 {
                continue;
            }
            let mut d_idx = 0usize;
            for a in 0..n {
                let d = ints[xi_idx * n + a] - ints[eta_idx * n + a] + samples[a] as i64 - 1;
                d_idx = d_idx * diff_dims[a] + d as usize;
            }
            conv += fv * g_table[d_idx];
        }
        conv *= cell;
        for a in 0..n {
            xi[a] = ints[xi_idx * n + a] as f64 * steps[a];
        }
        let ratio = conv * multi_bracket(&xi, &sigma.scale(2.0));
        max_ratio = max_ratio.max(ratio);
    }
    max_ratio
}

/// Measures the discrete convolution of `<<.>>^(-2s)` and `<<.>>^(-2t)` on
/// the frequency lattice of `grid` against `C(s,t,eps,n) <<.>>^(-2 sigma)`.
///
/// The measurement is repeated on the lattice with doubled per-axis extent;
/// if the max ratio moves by more than 2% the lattice is deemed too coarse.
pub fn conv_weight_check(
    s: &BlockOrder,
    t: &BlockOrder,
    eps: &[f64],
    grid: &GridSpec,
) -> Result<ConvWeightCheck> {
    s.expect_compatible(grid)?;
    let sigma = sigma_eps(s, t, eps)?;
    let constant = conv_bound_constant(s, t, eps)?;
    let steps: Vec<f64> = (0..grid.dim()).map(|a| grid.freq_step(a)).collect();
    let coarse = conv_max_ratio(s, t, &sigma, grid.samples(), &steps);
    let doubled: Vec<usize> = grid.samples().iter().map(|&m| 2 * m).collect();
    let fine = conv_max_ratio(s, t, &sigma, &doubled, &steps);
    if (coarse - fine).abs() > 0.02 * fine.abs() {
        return Err(KsError::Check(format!(
            "convolution ratio not converged between N and 2N: {coarse} vs {fine}"
        )));
    }
    Ok(ConvWeightCheck {
        constant,
        max_ratio: coarse,
        max_ratio_refined: fine,
        within_bound: coarse <= constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn multi_bracket_matches_hand_values() {
        let s = BlockOrder::new(&[1.0, -2.0], &[1, 2]).unwrap();
        // <<(2, 1, 2)>>^s = (1+4)^(1/2) * (1+1+4)^(-1)
        let v = multi_bracket(&[2.0, 1.0, 2.0], &s);
        assert!((v - 5.0f64.sqrt() / 6.0).abs() < 1e-14);
    }

    #[test]
    fn multi_bracket_of_zero_is_one() {
        let s = BlockOrder::new(&[3.7], &[2]).unwrap();
        assert_eq!(multi_bracket(&[0.0, 0.0], &s), 1.0);
    }

    #[test]
    fn weight_l1_norm_matches_gamma_closed_form() {
        // On R^1: ||<x>^(-2 lambda)||_1 = sqrt(pi) Gamma(lambda - 1/2) / Gamma(lambda).
        use statrs::function::gamma::gamma;
        for &lam in &[0.75, 1.0, 1.3, 2.0, 5.0] {
            let expect = PI.sqrt() * gamma(lam - 0.5) / gamma(lam);
            let got = weight_l1_norm(lam, 1).unwrap();
            assert!(
                ((got - expect) / expect).abs() < 1e-9,
                "lambda={lam}: {got} vs {expect}"
            );
        }
        // lambda = 1, n = 1 is the arctangent integral: exactly pi.
        assert!((weight_l1_norm(1.0, 1).unwrap() - PI).abs() < 1e-10);
        // On R^2 with lambda = 2: ∫ (1+r^2)^(-2) = pi.
        assert!((weight_l1_norm(2.0, 2).unwrap() - PI).abs() < 1e-9);
        // On R^3 with lambda = 2: 4 pi ∫ r^2 (1+r^2)^(-2) dr = pi^2.
        assert!((weight_l1_norm(2.0, 3).unwrap() - PI * PI).abs() < 1e-8);
    }

    #[test]
    fn weight_l1_norm_rejects_non_integrable_exponents() {
        assert!(weight_l1_norm(0.5, 1).is_err());
        assert!(weight_l1_norm(1.0, 2).is_err());
    }

    #[test]
    fn sigma_and_constant_match_hand_values() {
        let one = |v: f64| BlockOrder::isotropic(v, 1).unwrap();
        // s = t = 1, eps = 1/4, n = 1: sigma = 1, C = 2^3 ||<.>^(-2)||_1 = 8 pi.
        let sig = sigma_eps(&one(1.0), &one(1.0), &[0.25]).unwrap();
        assert!((sig.orders()[0] - 1.0).abs() < 1e-14);
        let c = conv_bound_constant(&one(1.0), &one(1.0), &[0.25]).unwrap();
        assert!((c - 8.0 * PI).abs() < 1e-8 * c, "{c}");
        // s = -1, t = 2: sigma = -1 (negative branch), C = 2 ||<.>^(-2)||_1 = 2 pi.
        let sig = sigma_eps(&one(-1.0), &one(2.0), &[0.25]).unwrap();
        assert!((sig.orders()[0] + 1.0).abs() < 1e-14);
        let c = conv_bound_constant(&one(-1.0), &one(2.0), &[0.25]).unwrap();
        assert!((c - 2.0 * PI).abs() < 1e-8 * c, "{c}");
    }

    #[test]
    fn default_eps_needs_supercritical_sum() {
        let one = |v: f64| BlockOrder::isotropic(v, 1).unwrap();
        assert!(default_eps(&one(0.25), &one(0.25)).is_err());
        let e = default_eps(&one(1.0), &one(1.0)).unwrap();
        assert!((e[0] - 0.375).abs() < 1e-14);
    }

    #[test]
    fn conv_weight_check_stays_within_the_constant() {
        let g = make_grid(&[1], &[256], &[16.0]).unwrap();
        let s = BlockOrder::isotropic(1.0, 1).unwrap();
        let t = BlockOrder::isotropic(1.0, 1).unwrap();
        let out = conv_weight_check(&s, &t, &[0.25], &g).unwrap();
        assert!(out.within_bound, "{out:?}");
        assert!(out.max_ratio > 0.0);
    }

    proptest! {
        #[test]
        fn peetre_margin_is_nonnegative(
            xi in prop::collection::vec(-50.0f64..50.0, 3),
            eta in prop::collection::vec(-50.0f64..50.0, 3),
            s1 in -4.0f64..4.0,
            s2 in -4.0f64..4.0,
        ) {
            let s = BlockOrder::new(&[s1, s2], &[1, 2]).unwrap();
            prop_assert!(peetre_margin(&xi, &eta, &s) >= -1e-12);
        }

        #[test]
        fn bracket_bound_by_total_order(
            xi in prop::collection::vec(-50.0f64..50.0, 3),
            s1 in -4.0f64..4.0,
            s2 in -4.0f64..4.0,
        ) {
            // <<xi>>^s <= <xi>^{|s|_1}
            let s = BlockOrder::new(&[s1, s2], &[2, 1]).unwrap();
            let lhs = multi_bracket(&xi, &s);
            let rhs = bracket_pow(&xi, s.total_abs());
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
