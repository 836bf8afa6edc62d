//! Group-law and trace properties of the one-parameter scaling groups.

use heatlab::scaling::ScalingMap;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generators exercising the shapes that occur in practice: diagonal,
/// triangular with large shear, rotations, Jordan blocks, and the direct
/// sums used by the two-block symbols.
fn generator_catalog() -> Vec<ScalingMap> {
    vec![
        ScalingMap::diagonal(&[0.5, 0.25]),
        ScalingMap::diagonal(&[0.5, 0.125]),
        ScalingMap::from_rows(&[vec![0.5, 1.0], vec![0.0, 0.25]]).unwrap(),
        ScalingMap::from_rows(&[vec![0.5, 10.0], vec![0.0, 0.5]]).unwrap(),
        ScalingMap::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap(),
        ScalingMap::from_rows(&[vec![0.5, 1.0], vec![-1.0, 0.5]]).unwrap(),
        ScalingMap::diagonal(&[1.0 / 3.0, 1.0 / 6.0, 0.5]),
        ScalingMap::diagonal(&[0.3]),
    ]
}

#[test]
fn group_law_holds_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for e in generator_catalog() {
        for _ in 0..200 {
            let s: f64 = rng.gen_range(0.1..10.0);
            let t: f64 = rng.gen_range(0.1..10.0);
            let st = e.group_element(s * t).unwrap();
            let gs = e.group_element(s).unwrap();
            let gt = e.group_element(t).unwrap();
            let prod = gs.matmul(&gt).unwrap();
            let defect = st.sub(&prod).unwrap().frobenius_norm();
            let bound = 1e-10 * (1.0 + gs.frobenius_norm() * gt.frobenius_norm());
            assert!(
                defect <= bound,
                "group law defect {defect:.3e} > {bound:.3e} at (s,t)=({s},{t})"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // Same law under proptest's own exploration of (s, t) and a sheared
    // two-by-two generator.
    #[test]
    fn group_law_proptest(
        s in 0.1f64..10.0,
        t in 0.1f64..10.0,
        d1 in 0.1f64..1.0,
        d2 in 0.1f64..1.0,
        shear in -2.0f64..2.0,
    ) {
        let e = ScalingMap::from_rows(&[vec![d1, shear], vec![0.0, d2]]).unwrap();
        let st = e.group_element(s * t).unwrap();
        let gs = e.group_element(s).unwrap();
        let gt = e.group_element(t).unwrap();
        let defect = st.sub(&gs.matmul(&gt).unwrap()).unwrap().frobenius_norm();
        let bound = 1e-10 * (1.0 + gs.frobenius_norm() * gt.frobenius_norm());
        prop_assert!(defect <= bound);
    }

    #[test]
    fn determinant_is_power_of_trace_proptest(
        t in 0.05f64..20.0,
        d1 in 0.1f64..1.0,
        d2 in 0.1f64..1.0,
        shear in -2.0f64..2.0,
    ) {
        let e = ScalingMap::from_rows(&[vec![d1, shear], vec![0.0, d2]]).unwrap();
        let det = e.group_element(t).unwrap().determinant();
        let expected = t.powf(e.trace());
        prop_assert!((det - expected).abs() <= 1e-9 * expected.abs());
    }
}

#[test]
fn determinant_is_power_of_trace_on_catalog() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for e in generator_catalog() {
        for _ in 0..50 {
            let t: f64 = 10f64.powf(rng.gen_range(-1.5..1.5));
            let det = e.group_element(t).unwrap().determinant();
            let expected = t.powf(e.trace());
            assert!(
                (det - expected).abs() <= 1e-9 * expected.abs().max(1e-300),
                "det {det:.15e} vs t^tr {expected:.15e} at t={t}"
            );
        }
    }
}

/// Twenty fixed matrices spanning contracting, non-expanding, expanding,
/// rotation, nilpotent, and mixed-sign spectra.
fn trace_sign_catalog() -> Vec<ScalingMap> {
    vec![
        ScalingMap::diagonal(&[0.5, 0.25]),
        ScalingMap::diagonal(&[0.5, 0.125]),
        ScalingMap::diagonal(&[0.25]),
        ScalingMap::diagonal(&[1.0]),
        ScalingMap::identity(2),
        ScalingMap::diagonal(&[0.0]),
        ScalingMap::diagonal(&[0.0, 0.0]),
        ScalingMap::diagonal(&[-0.5, 1.0]),
        ScalingMap::diagonal(&[-0.25]),
        ScalingMap::from_rows(&[vec![0.5, 1.0], vec![0.0, 0.25]]).unwrap(),
        ScalingMap::from_rows(&[vec![0.5, 10.0], vec![0.0, 0.5]]).unwrap(),
        ScalingMap::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap(),
        ScalingMap::from_rows(&[vec![0.5, 1.0], vec![-1.0, 0.5]]).unwrap(),
        ScalingMap::from_rows(&[vec![0.5, 1.0], vec![0.0, 0.5]]).unwrap(),
        ScalingMap::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap(),
        ScalingMap::diagonal(&[1.0, 0.0]),
        ScalingMap::diagonal(&[1.0 / 3.0, 1.0 / 6.0, 0.5]),
        ScalingMap::from_rows(&[
            vec![1.0 / 3.0, 1.0, 0.0],
            vec![0.0, 1.0 / 6.0, 0.0],
            vec![0.0, 0.0, 0.5],
        ])
        .unwrap(),
        ScalingMap::diagonal(&[2.0, 2.0]),
        ScalingMap::diagonal(&[0.125, 0.125]),
    ]
}

#[test]
fn contraction_verdicts_imply_trace_signs() {
    let catalog = trace_sign_catalog();
    assert_eq!(catalog.len(), 20);
    for (i, e) in catalog.iter().enumerate() {
        let contracting = e.is_contracting();
        let non_expanding = e.is_non_expanding();
        if contracting.is_pass() {
            assert!(
                e.trace() > 0.0,
                "catalog[{i}] contracting but trace = {}",
                e.trace()
            );
            assert!(
                non_expanding.is_pass(),
                "catalog[{i}] contracting but not non-expanding"
            );
        }
        if non_expanding.is_pass() {
            assert!(
                e.trace() >= -1e-12,
                "catalog[{i}] non-expanding but trace = {}",
                e.trace()
            );
        }
    }
}

#[test]
fn contraction_verdicts_are_decisive_on_clear_cases() {
    // Spot checks that the catalog exercises both sides.
    assert!(ScalingMap::diagonal(&[0.5, 0.25])
        .is_contracting()
        .is_pass());
    assert!(!ScalingMap::diagonal(&[-0.5, 1.0])
        .is_contracting()
        .is_pass());
    assert!(ScalingMap::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]])
        .unwrap()
        .is_non_expanding()
        .is_pass());
}
