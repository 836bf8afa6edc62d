//! Tensor-product quadrature over boxes, with automatic domain selection
//! driven by a decay threshold on the integrand's exponent.
//!
//! The integrands in this crate all have the shape `w(xi) * exp(-g(xi))`
//! with `g` polynomial-like and growing along rays, so a box on which the
//! boundary exponent exceeds `ln(1/tail_tol)` captures the mass up to the
//! tail tolerance.  Domains are found by probing each half-axis for the
//! threshold crossing, inflating, and then *verifying the whole boundary by
//! sampling*: cross-shaped level sets leak mass through face valleys that
//! axis probes alone never see, and the verification loop widens the box
//! until the faces are quiet.
//!
//! Node counts double until two successive results agree; results carry the
//! last doubling difference as an error estimate.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::par_sum_complex;

/// Hard cap on refinement rounds (node doubling) and on domain expansion
/// rounds.
const MAX_REFINE: usize = 12;
const MAX_EXPAND: usize = 12;

/// Cap on total tensor nodes per integration pass.
const MAX_TOTAL_NODES: usize = 1 << 27;

/// Boundary faces are sampled on this many points per free axis when
/// verifying the tail bound.
const FACE_SAMPLES: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadRule {
    GaussLegendre,
    Trapezoid,
}

/// How to integrate: domain, base resolution, rule, tail tolerance and
/// whether to refine until two successive node counts agree.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    /// Half-widths of the integration box per axis; `None` selects the
    /// domain automatically from the integrand's exponent.
    pub half_widths: Option<Vec<f64>>,
    pub nodes_per_axis: usize,
    pub rule: QuadRule,
    /// Pointwise integrand size below which the tail is considered
    /// negligible; also the absolute convergence target for refinement.
    pub tail_tol: f64,
    pub refine: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            half_widths: None,
            nodes_per_axis: 96,
            rule: QuadRule::GaussLegendre,
            tail_tol: (-36.0f64).exp(),
            refine: true,
        }
    }
}

impl QuadratureSpec {
    /// The exponent level `ln(1/tail_tol)` defining the integration domain.
    pub fn threshold(&self) -> f64 {
        (1.0 / self.tail_tol).ln()
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: Complex64,
    /// Difference between the last two refinement passes (0.0 when
    /// refinement is disabled).
    pub est_error: f64,
    pub nodes_per_axis: usize,
    pub half_widths: Vec<f64>,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence from Chebyshev initial
/// guesses; accurate to a few ulps for the node counts used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    // The middle node of an odd count is exactly zero.
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Closed trapezoid nodes and weights on `[-1, 1]`.
fn trapezoid(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let h = 2.0 / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n).map(|i| -1.0 + h * i as f64).collect();
    let mut weights = vec![h; n];
    weights[0] = h / 2.0;
    weights[n - 1] = h / 2.0;
    (nodes, weights)
}

fn rule_nodes(rule: QuadRule, n: usize) -> (Vec<f64>, Vec<f64>) {
    match rule {
        QuadRule::GaussLegendre => gauss_legendre(n),
        QuadRule::Trapezoid => trapezoid(n),
    }
}

/// Single tensor-product pass over the box with `n` nodes per axis.
pub fn tensor_pass<F>(f: &F, half_widths: &[f64], n: usize, rule: QuadRule) -> Complex64
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let dim = half_widths.len();
    assert!(dim >= 1 && dim <= 8, "tensor quadrature supports dim 1..=8");
    let (nodes, weights) = rule_nodes(rule, n);
    // Per-axis scaled nodes and weights.
    let axes: Vec<(Vec<f64>, Vec<f64>)> = half_widths
        .iter()
        .map(|h| {
            (
                nodes.iter().map(|x| h * x).collect(),
                weights.iter().map(|w| h * w).collect(),
            )
        })
        .collect();
    let total = n.pow(dim as u32);
    par_sum_complex(total, |idx| {
        let mut x = [0.0f64; 8];
        let mut w = 1.0;
        let mut rem = idx;
        for (d, (xs, ws)) in axes.iter().enumerate() {
            let i = rem % n;
            rem /= n;
            x[d] = xs[i];
            w *= ws[i];
        }
        w * f(&x[..dim])
    })
}

/// Integrate with node doubling until two passes agree to
/// `max(tail_tol, 1e-12 |I|)` in absolute value.
pub fn adaptive_tensor<F>(f: &F, half_widths: &[f64], spec: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let dim = half_widths.len();
    let mut n = spec.nodes_per_axis.max(2);
    let mut value = tensor_pass(f, half_widths, n, spec.rule);
    if !spec.refine {
        return Ok(QuadResult {
            value,
            est_error: 0.0,
            nodes_per_axis: n,
            half_widths: half_widths.to_vec(),
        });
    }
    for _ in 0..MAX_REFINE {
        let n2 = n * 2;
        if n2.pow(dim as u32) > MAX_TOTAL_NODES {
            return Err(Error::NonConvergence {
                steps: MAX_REFINE,
                context: format!("node budget exhausted at {n} nodes per axis in dim {dim}"),
            });
        }
        let next = tensor_pass(f, half_widths, n2, spec.rule);
        let diff = (next - value).norm();
        value = next;
        n = n2;
        if diff <= spec.tail_tol.max(1e-12 * value.norm()) {
            return Ok(QuadResult {
                value,
                est_error: diff,
                nodes_per_axis: n,
                half_widths: half_widths.to_vec(),
            });
        }
    }
    Err(Error::NonConvergence {
        steps: MAX_REFINE,
        context: format!("tensor quadrature still moving at {n} nodes per axis"),
    })
}

/// Smallest `r > 0` with `g(r * dir) >= threshold`, by doubling then
/// bisection along the ray.
fn ray_crossing<G>(g: &G, dir: &[f64], threshold: f64) -> Result<f64>
where
    G: Fn(&[f64]) -> f64 + ?Sized,
{
    let dim = dir.len();
    let eval = |r: f64| {
        let mut x = [0.0f64; 8];
        for d in 0..dim {
            x[d] = r * dir[d];
        }
        g(&x[..dim])
    };
    let mut hi = 1.0;
    let mut grow = 0;
    while eval(hi) < threshold {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::InvalidInput(format!(
                "exponent does not reach {threshold} along direction {dir:?}"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) >= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Minimum of `g` over the boundary faces of the box, sampled on a uniform
/// subgrid per face; returns the minimum and the point attaining it.
fn boundary_minimum<G>(g: &G, half_widths: &[f64]) -> (f64, Vec<f64>)
where
    G: Fn(&[f64]) -> f64 + ?Sized,
{
    let dim = half_widths.len();
    let mut best = (f64::INFINITY, vec![0.0; dim]);
    if dim == 1 {
        for s in [-1.0, 1.0] {
            let x = [s * half_widths[0]];
            let v = g(&x);
            if v < best.0 {
                best = (v, x.to_vec());
            }
        }
        return best;
    }
    let free = dim - 1;
    let total = FACE_SAMPLES.pow(free as u32);
    for axis in 0..dim {
        for sign in [-1.0f64, 1.0] {
            for idx in 0..total {
                let mut x = [0.0f64; 8];
                x[axis] = sign * half_widths[axis];
                let mut rem = idx;
                for d in 0..dim {
                    if d == axis {
                        continue;
                    }
                    let i = rem % FACE_SAMPLES;
                    rem /= FACE_SAMPLES;
                    let s = -1.0 + 2.0 * i as f64 / (FACE_SAMPLES - 1) as f64;
                    x[d] = s * half_widths[d];
                }
                let v = g(&x[..dim]);
                if v < best.0 {
                    best = (v, x[..dim].to_vec());
                }
            }
        }
    }
    best
}

/// Choose box half-widths so that the exponent `g` exceeds `threshold` on
/// the whole boundary: probe each axis for the crossing, inflate by 1.5, and
/// expand until boundary sampling confirms the bound.
pub fn auto_half_widths<G>(g: &G, dim: usize, threshold: f64) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let mut hw = Vec::with_capacity(dim);
    for axis in 0..dim {
        let mut dir = vec![0.0; dim];
        dir[axis] = 1.0;
        let plus = ray_crossing(g, &dir, threshold)?;
        dir[axis] = -1.0;
        let minus = ray_crossing(g, &dir, threshold)?;
        hw.push(1.5 * plus.max(minus));
    }
    for _ in 0..MAX_EXPAND {
        let (min_val, at) = boundary_minimum(g, &hw);
        if min_val >= threshold {
            return Ok(hw);
        }
        // Push out the face the violation sits on; when the violating point
        // is a corner valley, widen every axis it touches maximally.
        let mut expanded = false;
        for d in 0..dim {
            if at[d].abs() >= hw[d] * (1.0 - 1e-12) {
                hw[d] *= 1.5;
                expanded = true;
            }
        }
        if !expanded {
            hw.iter_mut().for_each(|h| *h *= 1.5);
        }
    }
    let (min_val, at) = boundary_minimum(g, &hw);
    if min_val >= threshold {
        Ok(hw)
    } else {
        Err(Error::TailBound {
            point: at,
            value: min_val,
            required: threshold,
        })
    }
}

/// Check a user-supplied box against the tail bound; unlike
/// `auto_half_widths` this never widens, it only verifies.
pub fn verify_half_widths<G>(g: &G, half_widths: &[f64], threshold: f64) -> Result<()>
where
    G: Fn(&[f64]) -> f64 + ?Sized,
{
    let (min_val, at) = boundary_minimum(g, half_widths);
    if min_val >= threshold {
        Ok(())
    } else {
        Err(Error::TailBound {
            point: at,
            value: min_val,
            required: threshold,
        })
    }
}

/// Resolve the integration box for an exponent `g`: the user-supplied one
/// (verified) or an automatic one.
pub fn resolve_domain<G>(g: &G, dim: usize, spec: &QuadratureSpec) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    match &spec.half_widths {
        Some(hw) => {
            if hw.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "{} half-widths for dim {dim}",
                    hw.len()
                )));
            }
            if hw.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
                return Err(Error::InvalidInput(
                    "half-widths must be positive and finite".into(),
                ));
            }
            verify_half_widths(g, hw, spec.threshold())?;
            Ok(hw.clone())
        }
        None => auto_half_widths(g, dim, spec.threshold()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 16, 96] {
            let (_, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn gauss_legendre_is_exact_on_low_degree() {
        // n nodes integrate degree 2n-1 exactly: check x^8 with n = 5.
        let (x, w) = gauss_legendre(5);
        let integral: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(8)).sum();
        assert_relative_eq!(integral, 2.0 / 9.0, max_relative = 1e-13);
    }

    #[test]
    fn gauss_legendre_nodes_are_symmetric() {
        let (x, w) = gauss_legendre(12);
        for i in 0..12 {
            assert_relative_eq!(x[i], -x[11 - i], epsilon = 1e-15);
            assert_relative_eq!(w[i], w[11 - i], epsilon = 1e-15);
        }
    }

    #[test]
    fn gaussian_integral_2d() {
        let f = |x: &[f64]| Complex64::new((-x[0] * x[0] - x[1] * x[1]).exp(), 0.0);
        let v = tensor_pass(&f, &[8.0, 8.0], 96, QuadRule::GaussLegendre);
        assert_relative_eq!(v.re, std::f64::consts::PI, max_relative = 1e-13);
        assert!(v.im.abs() < 1e-16);
    }

    #[test]
    fn oscillatory_gaussian_refines_to_answer() {
        // int exp(-x^2) cos(5 x) dx = sqrt(pi) exp(-25/4).
        let f = |x: &[f64]| Complex64::new((-x[0] * x[0]).exp() * (5.0 * x[0]).cos(), 0.0);
        let spec = QuadratureSpec {
            nodes_per_axis: 8,
            ..Default::default()
        };
        let r = adaptive_tensor(&f, &[8.0], &spec).unwrap();
        let exact = std::f64::consts::PI.sqrt() * (-6.25f64).exp();
        assert_relative_eq!(r.value.re, exact, max_relative = 1e-10);
        assert!(r.nodes_per_axis > 8);
    }

    #[test]
    fn trapezoid_agrees_with_gauss_on_smooth_decay() {
        let f = |x: &[f64]| Complex64::new((-x[0] * x[0]).exp(), 0.0);
        let spec_g = QuadratureSpec::default();
        let spec_t = QuadratureSpec {
            rule: QuadRule::Trapezoid,
            nodes_per_axis: 256,
            ..Default::default()
        };
        let a = adaptive_tensor(&f, &[8.0], &spec_g).unwrap();
        let b = adaptive_tensor(&f, &[8.0], &spec_t).unwrap();
        assert_relative_eq!(a.value.re, b.value.re, max_relative = 1e-10);
    }

    #[test]
    fn auto_domain_covers_quartic() {
        let g = |x: &[f64]| x[0].powi(4);
        let hw = auto_half_widths(&g, 1, 36.0).unwrap();
        // Crossing at 36^(1/4) ~ 2.449, inflated by 1.5.
        assert!(hw[0] >= 2.449 && hw[0] <= 4.0, "{hw:?}");
    }

    #[test]
    fn auto_domain_expands_through_valleys() {
        // g has a valley along the diagonal that axis probes never see:
        // g = (x - y)^2 + 0.01 (x + y)^2.
        let g = |x: &[f64]| {
            let u = x[0] - x[1];
            let v = x[0] + x[1];
            u * u + 0.01 * v * v
        };
        let hw = auto_half_widths(&g, 2, 36.0).unwrap();
        let (min_val, _) = boundary_minimum(&g, &hw);
        assert!(min_val >= 36.0);
        // The axis crossing is at x = 6/sqrt(1.01) ~ 5.97, but the valley
        // forces the box out to |x| ~ 42.
        assert!(hw[0] > 20.0, "{hw:?}");
    }

    #[test]
    fn undersized_user_domain_is_rejected() {
        let g = |x: &[f64]| x[0] * x[0];
        let spec = QuadratureSpec {
            half_widths: Some(vec![2.0]),
            ..Default::default()
        };
        let err = resolve_domain(&g, 1, &spec).unwrap_err();
        match err {
            Error::TailBound { value, .. } => assert!((value - 4.0).abs() < 1e-9),
            other => panic!("expected tail bound error, got {other}"),
        }
    }

    #[test]
    fn quartic_exponential_value() {
        // int exp(-x^4) dx = 2 Gamma(5/4) = Gamma(1/4)/2.
        let f = |x: &[f64]| Complex64::new((-x[0].powi(4)).exp(), 0.0);
        let g = |x: &[f64]| x[0].powi(4);
        let spec = QuadratureSpec::default();
        let hw = resolve_domain(&g, 1, &spec).unwrap();
        let r = adaptive_tensor(&f, &hw, &spec).unwrap();
        let exact = 2.0 * statrs::function::gamma::gamma(1.25);
        assert_relative_eq!(r.value.re, exact, max_relative = 1e-12);
    }
}
