//! The bundled data/ tree must stay in lockstep with the library builtins:
//! every file parses back to the exact in-memory value it was generated
//! from, including rational coefficients with no double representation.

use heatlab::decomp::{power_family, SymbolDecomposition};
use heatlab::lattice::LatticeFunction;
use heatlab::perturb::Perturbation;
use heatlab::poly::PolySymbol;
use num::{BigInt, BigRational, One};
use std::fs;
use std::path::PathBuf;

fn data_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(rel)
}

fn load<T: serde::de::DeserializeOwned>(rel: &str) -> T {
    let path = data_path(rel);
    let text =
        fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("cannot parse {}: {e}", path.display()))
}

#[test]
fn decomposition_files_match_the_constructors() {
    let raw: SymbolDecomposition = load("decompositions/shear_2_2_4.json");
    assert_eq!(raw, power_family(2, 2, 4).unwrap());

    let scaled: SymbolDecomposition = load("decompositions/shear_2_2_4_scaled.json");
    let hundredth = BigRational::new(BigInt::one(), BigInt::from(100));
    assert_eq!(
        scaled,
        power_family(2, 2, 4).unwrap().scale(&hundredth).unwrap()
    );

    let six: SymbolDecomposition = load("decompositions/shear_2_2_6.json");
    assert_eq!(six, power_family(2, 2, 6).unwrap());

    let cubic: SymbolDecomposition = load("decompositions/shear_3_2_6.json");
    assert_eq!(cubic, power_family(3, 2, 6).unwrap());
}

#[test]
fn lattice_files_match_the_builtin_tables() {
    let phi: LatticeFunction = load("lattice/phi.json");
    assert_eq!(phi, LatticeFunction::builtin_phi());

    let psi: LatticeFunction = load("lattice/psi.json");
    assert_eq!(psi, LatticeFunction::builtin_psi());
}

#[test]
fn perturbation_files_match_the_catalog() {
    let sq: Perturbation = load("perturbations/p_squared.json");
    assert_eq!(
        sq,
        Perturbation::Composed {
            higher_coeffs: vec![1.0]
        }
    );

    let cross: Perturbation = load("perturbations/cross_term.json");
    assert_eq!(
        cross,
        Perturbation::Polynomial {
            re: PolySymbol::from_f64_terms(
                2,
                &[(vec![2, 2], 1.0), (vec![1, 4], 2.0), (vec![0, 6], 1.0)],
            )
            .unwrap(),
            im: None,
        }
    );

    let mono: Perturbation = load("perturbations/eta2zeta4.json");
    assert_eq!(mono, Perturbation::monomial(2, &[2, 4], 1.0).unwrap());

    let k5: Perturbation = load("perturbations/radial_k5.json");
    assert_eq!(k5, Perturbation::RadialPower { k: 5.0 });

    let k2: Perturbation = load("perturbations/radial_k2.json");
    assert_eq!(k2, Perturbation::RadialPower { k: 2.0 });
}

#[test]
fn data_files_round_trip_byte_for_byte() {
    for rel in [
        "decompositions/shear_2_2_4.json",
        "decompositions/shear_2_2_4_scaled.json",
        "decompositions/shear_2_2_6.json",
        "decompositions/shear_3_2_6.json",
        "lattice/phi.json",
        "lattice/psi.json",
    ] {
        let text = fs::read_to_string(data_path(rel)).unwrap();
        let reprinted = if rel.starts_with("lattice") {
            let v: LatticeFunction = serde_json::from_str(&text).unwrap();
            serde_json::to_string_pretty(&v).unwrap()
        } else {
            let v: SymbolDecomposition = serde_json::from_str(&text).unwrap();
            serde_json::to_string_pretty(&v).unwrap()
        };
        assert_eq!(text.trim_end(), reprinted, "{rel} does not round-trip");
    }
}
