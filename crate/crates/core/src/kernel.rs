//! Heat kernel values `H_P^t(x) = (2 pi)^{-d} int exp(-t P(xi) - i x.xi) dxi`
//! for polynomial symbols, in three representations:
//!
//! * naive: integrate the assembled symbol directly (accurate for moderate
//!   `t`, degrades as the scaling regimes separate),
//! * rescaled small-time: the substitution `xi = (t^{-E2} eta, t^{-F1} zeta)`
//!   turns the exponent into `P1(t^{E1-E2} eta + Q(zeta)) + P2(eta)` and
//!   pulls out the factor `t^{-mu0}`,
//! * rescaled large-time: through the dual symbol, the exponent becomes
//!   `P1(eta) + P2(t^{E2-E1} eta - Q(zeta))` with the factor `t^{-mu_inf}`.
//!
//! The rescaled integrals converge to the on-diagonal values of the two
//! limit symbols, which for sums of pure even powers also have a closed
//! Gamma-product form.  `exp_integral_identity` checks the exact identity
//! `int exp(-eps P) = m(B_P) Gamma(mu + 1) / eps^mu` that anchors both
//! constants, with the sublevel-set measure `m(B_P)` obtained by midpoint
//! grid counting.

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::decomp::SymbolDecomposition;
use crate::error::{Error, Result};
use crate::numeric::{par_sum, ComplexAccumulator};
use crate::poly::PolySymbol;
use crate::quad::{adaptive_tensor, resolve_domain, QuadratureSpec};

/// One evaluated kernel value.
#[derive(Debug, Clone)]
pub struct KernelSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub value: Complex64,
    /// Quadrature refinement estimate, scaled like `value`.
    pub est_error: f64,
}

/// A kernel value in a rescaled representation.
#[derive(Debug, Clone, Copy)]
pub struct RescaledSample {
    pub t: f64,
    /// The kernel value itself, `phi(t) = H_P^t(0)`.
    pub phi: f64,
    /// The rescaled integral `t^mu * phi(t)`, which converges to the limit
    /// constant of the corresponding regime.
    pub scaled: f64,
    /// Refinement estimate on `scaled`.
    pub est_error: f64,
}

fn two_pi_pow(dim: usize) -> f64 {
    (2.0 * std::f64::consts::PI).powi(dim as i32)
}

/// `H_P^t(x)` by adaptive tensor quadrature.
pub fn kernel_eval(
    p: &PolySymbol,
    t: f64,
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<KernelSample> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "time must be positive, got {t}"
        )));
    }
    let dim = p.dim();
    if x.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "point of length {} for a symbol in dim {dim}",
            x.len()
        )));
    }
    let g = move |xi: &[f64]| t * p.eval(xi);
    let hw = resolve_domain(&g, dim, spec)?;
    let f = |xi: &[f64]| {
        let phase: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
        Complex64::from_polar((-t * p.eval(xi)).exp(), -phase)
    };
    let r = adaptive_tensor(&f, &hw, spec)?;
    let norm = two_pi_pow(dim);
    Ok(KernelSample {
        t,
        x: x.to_vec(),
        value: r.value / norm,
        est_error: r.est_error / norm,
    })
}

/// `phi(t) = H_P^t(0)` for the assembled symbol, naive representation.
pub fn phi_naive(p: &PolySymbol, t: f64, spec: &QuadratureSpec) -> Result<KernelSample> {
    kernel_eval(p, t, &vec![0.0; p.dim()], spec)
}

/// `phi(t)` in the small-time representation.  The returned `scaled` value
/// `t^mu0 phi(t)` converges to `H^1_{P_0}(0)` as `t -> 0`.
pub fn phi_rescaled_small(
    d: &SymbolDecomposition,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<RescaledSample> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "time must be positive, got {t}"
        )));
    }
    let (a, _) = d.block_dims();
    let dim = d.dim();
    let m = d.difference_generator().group_element(t)?;
    let p1 = d.p1();
    let p2 = d.p2();
    let q = d.q();
    let g = move |xi: &[f64]| {
        let (eta, zeta) = xi.split_at(a);
        let scaled_eta = m.apply(eta).expect("dims match");
        let qv = q.eval(zeta);
        let arg: Vec<f64> = scaled_eta.iter().zip(&qv).map(|(e, qc)| e + qc).collect();
        p1.eval(&arg) + p2.eval(eta)
    };
    let hw = resolve_domain(&g, dim, spec)?;
    let f = |xi: &[f64]| Complex64::new((-g(xi)).exp(), 0.0);
    let r = adaptive_tensor(&f, &hw, spec)?;
    let mu0 = d.exponents().mu0;
    let scaled = r.value.re / two_pi_pow(dim);
    Ok(RescaledSample {
        t,
        phi: t.powf(-mu0) * scaled,
        scaled,
        est_error: r.est_error / two_pi_pow(dim),
    })
}

/// `phi(t)` in the large-time representation (through the dual symbol).
/// The returned `scaled` value `t^mu_inf phi(t)` converges to
/// `H^1_{P_inf}(0)` as `t -> infinity`.
pub fn phi_rescaled_large(
    d: &SymbolDecomposition,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<RescaledSample> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "time must be positive, got {t}"
        )));
    }
    let (a, _) = d.block_dims();
    let dim = d.dim();
    // t^(E2 - E1) = (1/t)^(E1 - E2).
    let m = d.difference_generator().group_element(1.0 / t)?;
    let p1 = d.p1();
    let p2 = d.p2();
    let q = d.q();
    let g = move |xi: &[f64]| {
        let (eta, zeta) = xi.split_at(a);
        let scaled_eta = m.apply(eta).expect("dims match");
        let qv = q.eval(zeta);
        let arg: Vec<f64> = scaled_eta.iter().zip(&qv).map(|(e, qc)| e - qc).collect();
        p1.eval(eta) + p2.eval(&arg)
    };
    let hw = resolve_domain(&g, dim, spec)?;
    let f = |xi: &[f64]| Complex64::new((-g(xi)).exp(), 0.0);
    let r = adaptive_tensor(&f, &hw, spec)?;
    let mu_inf = d.exponents().mu_inf;
    let scaled = r.value.re / two_pi_pow(dim);
    Ok(RescaledSample {
        t,
        phi: t.powf(-mu_inf) * scaled,
        scaled,
        est_error: r.est_error / two_pi_pow(dim),
    })
}

/// On-diagonal value `H^1_P(0)` of a limit symbol, with the closed
/// Gamma-product form alongside when `P` is a sum of pure even powers
/// `sum_j c_j xi_j^{m_j}`:
///
/// ```text
/// H^1_P(0) = (2 pi)^{-d} prod_j 2 Gamma(1 + 1/m_j) c_j^{-1/m_j}.
/// ```
#[derive(Debug, Clone, Copy)]
pub struct LimitConstant {
    pub value: f64,
    pub est_error: f64,
    pub closed_form: Option<f64>,
}

pub fn limit_constant(p: &PolySymbol, spec: &QuadratureSpec) -> Result<LimitConstant> {
    let sample = phi_naive(p, 1.0, spec)?;
    Ok(LimitConstant {
        value: sample.value.re,
        est_error: sample.est_error,
        closed_form: gamma_product_form(p),
    })
}

/// The closed form above, or `None` when `P` is not a sum of pure even
/// powers with positive coefficients covering every axis.
pub fn gamma_product_form(p: &PolySymbol) -> Option<f64> {
    let dim = p.dim();
    let mut per_axis: Vec<Option<(u32, f64)>> = vec![None; dim];
    for (alpha, coeff) in p.terms() {
        let nz: Vec<usize> = (0..dim).filter(|i| alpha[*i] > 0).collect();
        if nz.len() != 1 {
            return None;
        }
        let v = nz[0];
        let m = alpha[v];
        let c = num::ToPrimitive::to_f64(coeff)?;
        if m % 2 != 0 || c <= 0.0 || per_axis[v].is_some() {
            return None;
        }
        per_axis[v] = Some((m, c));
    }
    let mut product = 1.0;
    for slot in per_axis {
        let (m, c) = slot?;
        product *= 2.0 * gamma(1.0 + 1.0 / m as f64) * c.powf(-1.0 / m as f64);
    }
    Some(product / two_pi_pow(dim))
}

/// Report for the identity `int exp(-eps P) = m(B_P) Gamma(mu + 1) / eps^mu`
/// where `B_P = { P <= 1 }` and `mu` is the trace of `P`'s scaling group.
#[derive(Debug, Clone, Copy)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ball_measure: f64,
    /// Difference between the two counting resolutions for the measure.
    pub measure_est_error: f64,
    pub rel_err: f64,
}

/// Midpoint-count the measure of `{ P <= 1 }` inside the box, `n` cells per
/// axis.
fn sublevel_count(p: &PolySymbol, hw: &[f64], n: usize) -> f64 {
    let dim = hw.len();
    let total = n.pow(dim as u32);
    let cell_vol: f64 = hw.iter().map(|h| 2.0 * h / n as f64).product();
    let count = par_sum(total, |idx| {
        let mut x = [0.0f64; 8];
        let mut rem = idx;
        for d in 0..dim {
            let i = rem % n;
            rem /= n;
            // Cell midpoints.
            x[d] = -hw[d] + (2.0 * hw[d]) * (i as f64 + 0.5) / n as f64;
        }
        if p.eval(&x[..dim]) <= 1.0 {
            1.0
        } else {
            0.0
        }
    });
    count * cell_vol
}

/// Verify the exponential-integral identity at `eps`, measuring `m(B_P)` by
/// midpoint counting at two resolutions with Richardson extrapolation.
pub fn exp_integral_identity(
    p: &PolySymbol,
    mu: f64,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<IdentityReport> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let dim = p.dim();
    let g = move |xi: &[f64]| eps * p.eval(xi);
    let hw = resolve_domain(&g, dim, spec)?;
    let f = |xi: &[f64]| Complex64::new((-eps * p.eval(xi)).exp(), 0.0);
    let lhs = adaptive_tensor(&f, &hw, spec)?.value.re;

    // Bounding box for the sublevel set, then two-level midpoint counting.
    let level = |xi: &[f64]| p.eval(xi);
    let ball_hw = crate::quad::auto_half_widths(&level, dim, 1.0)?;
    let n1 = match dim {
        1 => 1 << 20,
        2 => 2048,
        3 => 192,
        _ => {
            return Err(Error::InvalidInput(format!(
                "sublevel-set counting supports dim <= 3, got {dim}"
            )))
        }
    };
    let m1 = sublevel_count(p, &ball_hw, n1);
    let m2 = sublevel_count(p, &ball_hw, 2 * n1);
    let measure = 2.0 * m2 - m1;

    let rhs = measure * gamma(mu + 1.0) / eps.powf(mu);
    Ok(IdentityReport {
        lhs,
        rhs,
        ball_measure: measure,
        measure_est_error: (m2 - m1).abs(),
        rel_err: (lhs - rhs).abs() / rhs.abs(),
    })
}

/// Kernel values on a rectangular grid of 2-d spatial points
/// `(offsets0[i], offsets1[k])`, sharing one quadrature pass.
///
/// The phase `exp(-i x.xi)` factorizes across the tensor grid, so the whole
/// window costs one evaluation of the exponent per quadrature node plus two
/// small matrix products, instead of one quadrature per point.
#[derive(Debug, Clone)]
pub struct WindowEval {
    /// `values[i][k]` is the kernel value at `(offsets0[i], offsets1[k])`.
    pub values: Vec<Vec<Complex64>>,
    pub est_error: f64,
    pub nodes_per_axis: usize,
}

pub fn kernel_window_eval<G>(
    g: &G,
    offsets0: &[f64],
    offsets1: &[f64],
    spec: &QuadratureSpec,
) -> Result<WindowEval>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    let hw = resolve_domain(g, 2, spec)?;
    let mut n = spec.nodes_per_axis.max(2);
    let mut current = window_pass(g, &hw, n, offsets0, offsets1);
    if !spec.refine {
        return Ok(WindowEval {
            values: current,
            est_error: 0.0,
            nodes_per_axis: n,
        });
    }
    for _ in 0..12 {
        let n2 = n * 2;
        if n2 * n2 > (1 << 26) {
            return Err(Error::NonConvergence {
                steps: 12,
                context: format!("window evaluation node budget exhausted at {n} per axis"),
            });
        }
        let next = window_pass(g, &hw, n2, offsets0, offsets1);
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (row_a, row_b) in current.iter().zip(&next) {
            for (a, b) in row_a.iter().zip(row_b) {
                diff = diff.max((a - b).norm());
                scale = scale.max(b.norm());
            }
        }
        current = next;
        n = n2;
        if diff <= spec.tail_tol.max(1e-12 * scale) {
            return Ok(WindowEval {
                values: current,
                est_error: diff,
                nodes_per_axis: n,
            });
        }
    }
    Err(Error::NonConvergence {
        steps: 12,
        context: "window evaluation still moving at the refinement cap".into(),
    })
}

fn window_pass<G>(
    g: &G,
    hw: &[f64],
    n: usize,
    offsets0: &[f64],
    offsets1: &[f64],
) -> Vec<Vec<Complex64>>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    let (nodes, weights) = crate::quad::gauss_legendre(n);
    let xi0: Vec<f64> = nodes.iter().map(|x| hw[0] * x).collect();
    let w0: Vec<f64> = weights.iter().map(|w| hw[0] * w).collect();
    let xi1: Vec<f64> = nodes.iter().map(|x| hw[1] * x).collect();
    let w1: Vec<f64> = weights.iter().map(|w| hw[1] * w).collect();

    // G[j0][k] = sum_j1 w0 w1 exp(-g(xi0[j0], xi1[j1])) exp(-i offsets1[k] xi1[j1])
    let phase1: Vec<Vec<Complex64>> = offsets1
        .iter()
        .map(|y| {
            xi1.iter()
                .map(|xi| Complex64::from_polar(1.0, -y * xi))
                .collect()
        })
        .collect();
    let inner: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j0| {
            let row: Vec<f64> = (0..n)
                .map(|j1| w0[j0] * w1[j1] * (-g(&[xi0[j0], xi1[j1]])).exp())
                .collect();
            phase1
                .iter()
                .map(|ph| {
                    let mut acc = ComplexAccumulator::new();
                    for (f, p) in row.iter().zip(ph) {
                        acc.add(p * *f);
                    }
                    acc.total()
                })
                .collect()
        })
        .collect();

    let norm = two_pi_pow(2);
    offsets0
        .par_iter()
        .map(|y0| {
            let phase0: Vec<Complex64> = xi0
                .iter()
                .map(|xi| Complex64::from_polar(1.0, -y0 * xi))
                .collect();
            (0..offsets1.len())
                .map(|k| {
                    let mut acc = ComplexAccumulator::new();
                    for j0 in 0..n {
                        acc.add(phase0[j0] * inner[j0][k]);
                    }
                    acc.total() / norm
                })
                .collect()
        })
        .collect()
}

/// Kernel values `H_P^t` on a spatial grid `(offsets_u[j], offsets_v[k])`
/// through the large-time rescaled representation, for decompositions with
/// one-dimensional blocks.
///
/// Substituting `xi = T(t^{-G} w)` with `G = E1 (+) F2` and `T` the shear
/// turns the exponent into `P1(eta) + P2(t^{E2-E1} eta - Q(zeta))` with the
/// flat factor `t^{-mu_inf}`, while the phase picks up a shear term:
///
/// ```text
/// x . xi = (t^{-E1} x_u) eta + (t^{-F2} x_v) zeta - (t^{-E2} x_u) Q(zeta).
/// ```
///
/// The `eta`-phase still factorizes across the grid, but the `Q(zeta)` term
/// couples each `x_u` row to the `zeta` nodes, so rows are contracted first
/// over `eta` and then over `zeta` with the row's own shear phase.  Domain
/// and refinement policy match `kernel_window_eval`; the returned values are
/// the kernel values themselves (the `t^{-mu_inf}` factor is included).
pub fn kernel_window_rescaled_large(
    d: &SymbolDecomposition,
    t: f64,
    offsets_u: &[f64],
    offsets_v: &[f64],
    spec: &QuadratureSpec,
) -> Result<WindowEval> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "time must be positive, got {t}"
        )));
    }
    if d.block_dims() != (1, 1) {
        return Err(Error::InvalidInput(format!(
            "rescaled window needs one-dimensional blocks, got {:?}",
            d.block_dims()
        )));
    }
    let me = d.difference_generator().group_element(1.0 / t)?.entry(0, 0);
    let p1 = d.p1();
    let p2 = d.p2();
    let qc = &d.q().components()[0];
    let g = move |xi: &[f64]| {
        let arg = me * xi[0] - qc.eval(&[xi[1]]);
        p1.eval(&xi[..1]) + p2.eval(&[arg])
    };
    let hw = resolve_domain(&g, 2, spec)?;

    let su = t.powf(-d.e1().entry(0, 0));
    let sq = t.powf(-d.e2().entry(0, 0));
    let sv = t.powf(-d.f2().entry(0, 0));
    let flat = t.powf(-d.exponents().mu_inf);

    let pass = |n: usize| -> Vec<Vec<Complex64>> {
        let (nodes, weights) = crate::quad::gauss_legendre(n);
        let eta: Vec<f64> = nodes.iter().map(|x| hw[0] * x).collect();
        let weta: Vec<f64> = weights.iter().map(|w| hw[0] * w).collect();
        let zeta: Vec<f64> = nodes.iter().map(|x| hw[1] * x).collect();
        let wzeta: Vec<f64> = weights.iter().map(|w| hw[1] * w).collect();
        let qv: Vec<f64> = zeta.iter().map(|z| qc.eval(&[*z])).collect();

        // amp[i][l] = w_i w_l exp(-P1(eta_i) - P2(me eta_i - Q(zeta_l)))
        let amp: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|l| weta[i] * wzeta[l] * (-g(&[eta[i], zeta[l]])).exp())
                    .collect()
            })
            .collect();

        let norm = two_pi_pow(2);
        offsets_u
            .par_iter()
            .map(|xu| {
                let alpha = su * xu;
                let gamma = sq * xu;
                // Contract eta per zeta node with this row's plane wave.
                let phase_u: Vec<Complex64> = eta
                    .iter()
                    .map(|e| Complex64::from_polar(1.0, -alpha * e))
                    .collect();
                let row: Vec<Complex64> = (0..n)
                    .map(|l| {
                        let mut acc = ComplexAccumulator::new();
                        for i in 0..n {
                            acc.add(phase_u[i] * amp[i][l]);
                        }
                        acc.total()
                    })
                    .collect();
                offsets_v
                    .iter()
                    .map(|xv| {
                        let beta = sv * xv;
                        let mut acc = ComplexAccumulator::new();
                        for l in 0..n {
                            acc.add(
                                row[l] * Complex64::from_polar(1.0, gamma * qv[l] - beta * zeta[l]),
                            );
                        }
                        acc.total() * flat / norm
                    })
                    .collect()
            })
            .collect()
    };

    let mut n = spec.nodes_per_axis.max(2);
    let mut current = pass(n);
    if !spec.refine {
        return Ok(WindowEval {
            values: current,
            est_error: 0.0,
            nodes_per_axis: n,
        });
    }
    for _ in 0..12 {
        let n2 = n * 2;
        if n2 * n2 > (1 << 24) {
            return Err(Error::NonConvergence {
                steps: 12,
                context: format!("rescaled window node budget exhausted at {n} per axis"),
            });
        }
        let next = pass(n2);
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (row_a, row_b) in current.iter().zip(&next) {
            for (a, b) in row_a.iter().zip(row_b) {
                diff = diff.max((a - b).norm());
                scale = scale.max(b.norm());
            }
        }
        current = next;
        n = n2;
        if diff <= (spec.tail_tol * flat).max(1e-12 * scale) {
            return Ok(WindowEval {
                values: current,
                est_error: diff,
                nodes_per_axis: n,
            });
        }
    }
    Err(Error::NonConvergence {
        steps: 12,
        context: "rescaled window still moving at the refinement cap".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::power_family;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_heat_kernel_closed_form() {
        // P = xi^2: H^t(x) = exp(-x^2 / 4t) / sqrt(4 pi t).
        let p = PolySymbol::monomial(1, &[2], 1.0).unwrap();
        let spec = QuadratureSpec::default();
        for &(t, x) in &[(0.7, 1.3), (1.0, 0.0), (0.05, -0.4)] {
            let s = kernel_eval(&p, t, &[x], &spec).unwrap();
            let exact = (-x * x / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t).sqrt();
            assert_relative_eq!(s.value.re, exact, max_relative = 1e-11);
            assert!(s.value.im.abs() < 1e-13);
        }
    }

    #[test]
    fn rescaled_routes_agree_with_naive_at_t_one() {
        let d = power_family(2, 2, 4).unwrap();
        let p = d.assemble_symbol().unwrap();
        let spec = QuadratureSpec::default();
        let naive = phi_naive(&p, 1.0, &spec).unwrap().value.re;
        let small = phi_rescaled_small(&d, 1.0, &spec).unwrap().phi;
        let large = phi_rescaled_large(&d, 1.0, &spec).unwrap().phi;
        assert_relative_eq!(naive, small, max_relative = 1e-9);
        assert_relative_eq!(naive, large, max_relative = 1e-9);
    }

    #[test]
    fn limit_constant_closed_form_matches_quadrature() {
        // eta^4 + zeta^4.
        let p = PolySymbol::from_f64_terms(2, &[(vec![4, 0], 1.0), (vec![0, 4], 1.0)]).unwrap();
        let lc = limit_constant(&p, &QuadratureSpec::default()).unwrap();
        let cf = lc.closed_form.expect("pure even powers");
        assert_relative_eq!(lc.value, cf, max_relative = 1e-10);
        let exact = gamma(1.25) * gamma(1.25) / (std::f64::consts::PI * std::f64::consts::PI);
        assert_relative_eq!(cf, exact, max_relative = 1e-14);
    }

    #[test]
    fn gamma_product_rejects_cross_terms() {
        let p = PolySymbol::from_f64_terms(2, &[(vec![2, 2], 1.0), (vec![0, 4], 1.0)]).unwrap();
        assert!(gamma_product_form(&p).is_none());
    }

    #[test]
    fn gamma_product_handles_coefficients() {
        // P = 4 xi^2: H^1(0) = (2 pi)^-1 2 Gamma(3/2) / 2 = Gamma(3/2) / (2 pi).
        let p = PolySymbol::monomial(1, &[2], 4.0).unwrap();
        let cf = gamma_product_form(&p).unwrap();
        assert_relative_eq!(
            cf,
            gamma(1.5) / (2.0 * std::f64::consts::PI),
            max_relative = 1e-14
        );
    }

    #[test]
    fn exp_identity_for_square() {
        // P = xi^2, mu = 1/2: both sides equal sqrt(pi / eps).
        let p = PolySymbol::monomial(1, &[2], 1.0).unwrap();
        let r = exp_integral_identity(&p, 0.5, 0.35, &QuadratureSpec::default()).unwrap();
        assert!(r.rel_err < 1e-5, "rel err {}", r.rel_err);
        assert_relative_eq!(r.ball_measure, 2.0, max_relative = 1e-5);
    }

    #[test]
    fn rescaled_window_matches_pointwise_kernel() {
        let d = power_family(2, 2, 4).unwrap();
        let p = d.assemble_symbol().unwrap();
        let spec = QuadratureSpec::default();
        let offs_u = [0.0, 1.0, -2.0];
        let offs_v = [0.0, 0.5, -1.5];
        for &t in &[2.0, 50.0] {
            let win = kernel_window_rescaled_large(&d, t, &offs_u, &offs_v, &spec).unwrap();
            for (j, xu) in offs_u.iter().enumerate() {
                for (k, xv) in offs_v.iter().enumerate() {
                    let direct = kernel_eval(&p, t, &[*xu, *xv], &spec).unwrap();
                    assert_relative_eq!(win.values[j][k].re, direct.value.re, max_relative = 1e-8);
                    assert!((win.values[j][k].im - direct.value.im).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rescaled_window_needs_scalar_blocks() {
        let d = power_family(2, 2, 4).unwrap();
        let spec = QuadratureSpec::default();
        // A 1-d "decomposition" with an empty second block is not eligible.
        let p1 = PolySymbol::monomial(1, &[2], 1.0).unwrap();
        let d1 = SymbolDecomposition::new(
            1,
            0,
            p1,
            PolySymbol::zero(1),
            crate::poly::PolyMap::new(vec![PolySymbol::zero(0)]).unwrap(),
            crate::scaling::ScalingMap::diagonal(&[0.5]),
            crate::scaling::ScalingMap::diagonal(&[0.25]),
            crate::scaling::ScalingMap::new(0, &[]).unwrap(),
            crate::scaling::ScalingMap::new(0, &[]).unwrap(),
        )
        .unwrap();
        assert!(kernel_window_rescaled_large(&d1, 2.0, &[0.0], &[0.0], &spec).is_err());
        assert!(kernel_window_rescaled_large(&d, -1.0, &[0.0], &[0.0], &spec).is_err());
    }

    #[test]
    fn window_eval_matches_pointwise_kernel() {
        let d = power_family(2, 2, 4).unwrap();
        let p = d.assemble_symbol().unwrap();
        let spec = QuadratureSpec::default();
        let t = 2.0;
        let offs0 = [0.0, 1.0, -2.0];
        let offs1 = [0.5, -1.5];
        let g = |xi: &[f64]| t * p.eval(xi);
        let win = kernel_window_eval(&g, &offs0, &offs1, &spec).unwrap();
        for (i, y0) in offs0.iter().enumerate() {
            for (k, y1) in offs1.iter().enumerate() {
                let direct = kernel_eval(&p, t, &[*y0, *y1], &spec).unwrap();
                assert_relative_eq!(win.values[i][k].re, direct.value.re, max_relative = 1e-9);
                assert!((win.values[i][k].im - direct.value.im).abs() < 1e-12);
            }
        }
    }
}
