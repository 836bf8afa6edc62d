//! Analytic properties of the heat-kernel quadratures: duality under the
//! shear, monotone on-diagonal decay, domination, representation agreement,
//! exact rescaling of homogeneous kernels, and the large-time envelope.

use heatlab::decomp::power_family;
use heatlab::kernel::{
    kernel_eval, limit_constant, phi_naive, phi_rescaled_large, phi_rescaled_small,
};
use heatlab::numeric::logspace;
use heatlab::quad::QuadratureSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn on_diagonal_value_is_shear_invariant() {
    let d = power_family(2, 2, 4).unwrap();
    let p = d.assemble_symbol().unwrap();
    let dual = d.dual_symbol().unwrap();
    let spec = QuadratureSpec::default();
    for t in [0.5, 1.0, 2.0] {
        let a = phi_naive(&p, t, &spec).unwrap();
        let b = phi_naive(&dual, t, &spec).unwrap();
        let diff = (a.value.re - b.value.re).abs();
        let budget = a.est_error + b.est_error + 1e-12 * a.value.re;
        assert!(
            diff <= budget,
            "t={t}: |{:.12e} - {:.12e}| = {diff:.3e} > {budget:.3e}",
            a.value.re,
            b.value.re
        );
    }
}

#[test]
fn on_diagonal_decay_is_non_increasing() {
    let d = power_family(2, 2, 4).unwrap();
    let p = d.assemble_symbol().unwrap();
    let spec = QuadratureSpec::default();
    let ts = logspace(1e-2, 1e3, 26);
    let samples: Vec<_> = ts
        .iter()
        .map(|t| phi_naive(&p, *t, &spec).unwrap())
        .collect();
    for w in samples.windows(2) {
        let slack = w[0].est_error + w[1].est_error + 1e-9 * w[0].value.re;
        assert!(
            w[1].value.re <= w[0].value.re + slack,
            "phi({}) = {:.9e} exceeds phi({}) = {:.9e}",
            w[1].t,
            w[1].value.re,
            w[0].t,
            w[0].value.re
        );
    }
}

#[test]
fn off_diagonal_values_are_dominated_by_phi() {
    let d = power_family(2, 2, 4).unwrap();
    let p = d.assemble_symbol().unwrap();
    let spec = QuadratureSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for t in [0.5, 2.0] {
        let phi = phi_naive(&p, t, &spec).unwrap();
        for _ in 0..8 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let k = kernel_eval(&p, t, &x, &spec).unwrap();
            assert!(
                k.value.norm() <= phi.value.re + 2.0 * (phi.est_error + k.est_error),
                "|H^{t}({x:?})| = {:.9e} > phi = {:.9e}",
                k.value.norm(),
                phi.value.re
            );
        }
    }
}

#[test]
fn three_representations_agree_at_unit_time() {
    let d = power_family(2, 2, 4).unwrap();
    let p = d.assemble_symbol().unwrap();
    let spec = QuadratureSpec::default();
    let naive = phi_naive(&p, 1.0, &spec).unwrap();
    let small = phi_rescaled_small(&d, 1.0, &spec).unwrap();
    let large = phi_rescaled_large(&d, 1.0, &spec).unwrap();
    // At t = 1 all scaling prefactors are 1, so the three phi values measure
    // the same integral through three changes of variables.
    for (name, value, est) in [
        ("small", small.phi, small.est_error),
        ("large", large.phi, large.est_error),
    ] {
        let diff = (value - naive.value.re).abs();
        let budget = naive.est_error + est + 1e-12 * naive.value.re;
        assert!(
            diff <= budget,
            "{name} {value:.12e} vs naive {:.12e}: diff {diff:.3e} > {budget:.3e}",
            naive.value.re
        );
    }
}

#[test]
fn homogeneous_kernel_obeys_the_scaling_identity() {
    let d = power_family(2, 2, 4).unwrap();
    let (_, large) = d.limit_symbols().unwrap();
    let spec = QuadratureSpec::default();
    let mu = d.exponents().mu_inf;
    // The generator is diagonal here, so it equals its own transpose.
    let e_star = d.large_limit_generator();
    for n in [4.0, 50.0] {
        let shrink = e_star.group_element(1.0 / n).unwrap();
        for x in [vec![0.0, 0.0], vec![0.5, 0.3], vec![-1.0, 0.7]] {
            let lhs = kernel_eval(&large, n, &x, &spec).unwrap();
            let back = shrink.apply(&x).unwrap();
            let unit = kernel_eval(&large, 1.0, &back, &spec).unwrap();
            let rhs = n.powf(-mu) * unit.value;
            let budget = lhs.est_error + n.powf(-mu) * unit.est_error + 1e-12;
            assert!(
                (lhs.value - rhs).norm() <= budget,
                "n={n} x={x:?}: {:.12e} vs {:.12e}",
                lhs.value.re,
                rhs.re
            );
        }
    }
}

#[test]
fn large_time_envelope_approaches_the_limit_constant() {
    let d = power_family(2, 2, 4).unwrap();
    let (_, large) = d.limit_symbols().unwrap();
    let spec = QuadratureSpec::default();
    let c = limit_constant(&large, &spec).unwrap();
    if let Some(closed) = c.closed_form {
        assert!((c.value - closed).abs() <= 1e-3 * closed);
    }
    let ts = logspace(1.0, 1e4, 9);
    let scaled: Vec<f64> = ts
        .iter()
        .map(|t| phi_rescaled_large(&d, *t, &spec).unwrap().scaled)
        .collect();
    for s in &scaled {
        assert!(*s > 0.5 * c.value && *s < 2.0 * c.value, "t^mu phi = {s}");
    }
    // The gap to the limit shrinks along the grid.
    for w in scaled.windows(2) {
        let (d0, d1) = ((w[0] - c.value).abs(), (w[1] - c.value).abs());
        assert!(d1 <= d0 + 1e-9, "gap grew: {d0:.3e} -> {d1:.3e}");
    }
    let last = scaled.last().unwrap();
    assert!((last - c.value).abs() <= 5e-3 * c.value);
}
