//! Structured symbol decompositions
//!
//! ```text
//! P(eta, zeta) = P1(eta + Q(zeta)) + P2(eta)
//! ```
//!
//! with homogeneity data: `P1`, `P2` are homogeneous with respect to the
//! groups generated by `E1`, `E2` on the first block, and the polynomial map
//! `Q` intertwines the block groups in both regimes,
//! `Q(t^F1 zeta) = t^E1 Q(zeta)` and `Q(t^F2 zeta) = t^E2 Q(zeta)`.
//!
//! From this data the module assembles the full symbol, its dual under the
//! shear `T(eta, zeta) = (eta - Q(zeta), zeta)`, the two limiting symbols,
//! and the small/large time decay exponents.  `validate` checks every
//! structural hypothesis numerically and reports an itemized verdict.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{PolyMap, PolySymbol};
use crate::scaling::{ScalingMap, Verdict};

/// Structural tolerance for the sampled homogeneity identities.
pub const HOMOGENEITY_TOL: f64 = 1e-8;

/// Tolerance on commutator Frobenius norms, relative to the generator norms.
const COMMUTATOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DecompJson", into = "DecompJson")]
pub struct SymbolDecomposition {
    a: usize,
    b: usize,
    p1: PolySymbol,
    p2: PolySymbol,
    q: PolyMap,
    e1: ScalingMap,
    e2: ScalingMap,
    f1: ScalingMap,
    f2: ScalingMap,
}

#[derive(Serialize, Deserialize)]
struct DecompJson {
    a: usize,
    b: usize,
    #[serde(rename = "P1")]
    p1: PolySymbol,
    #[serde(rename = "P2")]
    p2: PolySymbol,
    #[serde(rename = "Q")]
    q: PolyMap,
    #[serde(rename = "E1")]
    e1: ScalingMap,
    #[serde(rename = "E2")]
    e2: ScalingMap,
    #[serde(rename = "F1")]
    f1: ScalingMap,
    #[serde(rename = "F2")]
    f2: ScalingMap,
}

impl TryFrom<DecompJson> for SymbolDecomposition {
    type Error = Error;

    fn try_from(j: DecompJson) -> Result<Self> {
        SymbolDecomposition::new(j.a, j.b, j.p1, j.p2, j.q, j.e1, j.e2, j.f1, j.f2)
    }
}

impl From<SymbolDecomposition> for DecompJson {
    fn from(d: SymbolDecomposition) -> Self {
        DecompJson {
            a: d.a,
            b: d.b,
            p1: d.p1,
            p2: d.p2,
            q: d.q,
            e1: d.e1,
            e2: d.e2,
            f1: d.f1,
            f2: d.f2,
        }
    }
}

impl SymbolDecomposition {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: usize,
        b: usize,
        p1: PolySymbol,
        p2: PolySymbol,
        q: PolyMap,
        e1: ScalingMap,
        e2: ScalingMap,
        f1: ScalingMap,
        f2: ScalingMap,
    ) -> Result<Self> {
        if a == 0 {
            return Err(Error::InvalidInput("first block must be non-empty".into()));
        }
        if p1.dim() != a || p2.dim() != a {
            return Err(Error::DimensionMismatch(format!(
                "P1 and P2 must live on the first block (dim {a}), got dims {} and {}",
                p1.dim(),
                p2.dim()
            )));
        }
        if q.in_dim() != b || q.out_dim() != a {
            return Err(Error::DimensionMismatch(format!(
                "Q must map the second block (dim {b}) into the first (dim {a}), got {} -> {}",
                q.in_dim(),
                q.out_dim()
            )));
        }
        if e1.dim() != a || e2.dim() != a {
            return Err(Error::DimensionMismatch(
                "E1, E2 must act on the first block".into(),
            ));
        }
        if f1.dim() != b || f2.dim() != b {
            return Err(Error::DimensionMismatch(
                "F1, F2 must act on the second block".into(),
            ));
        }
        Ok(Self {
            a,
            b,
            p1,
            p2,
            q,
            e1,
            e2,
            f1,
            f2,
        })
    }

    pub fn block_dims(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    /// Total dimension `a + b` of the frequency space.
    pub fn dim(&self) -> usize {
        self.a + self.b
    }

    pub fn p1(&self) -> &PolySymbol {
        &self.p1
    }

    pub fn p2(&self) -> &PolySymbol {
        &self.p2
    }

    pub fn q(&self) -> &PolyMap {
        &self.q
    }

    pub fn e1(&self) -> &ScalingMap {
        &self.e1
    }

    pub fn e2(&self) -> &ScalingMap {
        &self.e2
    }

    pub fn f1(&self) -> &ScalingMap {
        &self.f1
    }

    pub fn f2(&self) -> &ScalingMap {
        &self.f2
    }

    /// `E1 - E2`, the generator whose group moves between the two regimes.
    pub fn difference_generator(&self) -> ScalingMap {
        self.e1.sub(&self.e2).expect("same block")
    }

    /// `G = E1 (+) F2`, the scaling group of the small-time limit symbol's
    /// complement; perturbations are probed along this group.
    pub fn probe_generator(&self) -> ScalingMap {
        self.e1.direct_sum(&self.f2)
    }

    /// Generator of the group under which the small-time limit symbol is
    /// homogeneous, `E2 (+) F1`.
    pub fn small_limit_generator(&self) -> ScalingMap {
        self.e2.direct_sum(&self.f1)
    }

    /// Generator of the group under which the large-time limit symbol is
    /// homogeneous, `E1 (+) F2`.
    pub fn large_limit_generator(&self) -> ScalingMap {
        self.e1.direct_sum(&self.f2)
    }

    /// The variables of the first block as polynomials on the full space.
    fn eta_vars(&self) -> Vec<PolySymbol> {
        (0..self.a)
            .map(|i| PolySymbol::var(self.dim(), i).expect("index in range"))
            .collect()
    }

    /// The components of `Q` as polynomials on the full space.
    fn q_on_full(&self) -> Vec<PolySymbol> {
        self.q
            .components()
            .iter()
            .map(|c| c.embed(self.dim(), self.a).expect("fits"))
            .collect()
    }

    fn full_vars_zeta(&self) -> Vec<PolySymbol> {
        (self.a..self.dim())
            .map(|i| PolySymbol::var(self.dim(), i).expect("index in range"))
            .collect()
    }

    /// Exact expansion of `P(eta, zeta) = P1(eta + Q(zeta)) + P2(eta)`.
    pub fn assemble_symbol(&self) -> Result<PolySymbol> {
        let shifted: Vec<PolySymbol> = self
            .eta_vars()
            .iter()
            .zip(self.q_on_full())
            .map(|(eta, qc)| eta.add(&qc))
            .collect::<Result<_>>()?;
        let first = self.p1.substitute(&shifted)?;
        let second = self.p2.embed(self.dim(), 0)?;
        first.add(&second)
    }

    /// Exact expansion of the dual symbol `P(T(eta, zeta))` under the shear
    /// `T(eta, zeta) = (eta - Q(zeta), zeta)`, which equals
    /// `P1(eta) + P2(eta - Q(zeta))`.
    pub fn dual_symbol(&self) -> Result<PolySymbol> {
        let sheared: Vec<PolySymbol> = self
            .eta_vars()
            .iter()
            .zip(self.q_on_full())
            .map(|(eta, qc)| eta.sub(&qc))
            .collect::<Result<_>>()?;
        let first = self.p1.embed(self.dim(), 0)?;
        let second = self.p2.substitute(&sheared)?;
        first.add(&second)
    }

    /// Compose an arbitrary polynomial on the full space with the shear `T`,
    /// exactly.  This carries perturbations of `P` over to perturbations of
    /// the dual symbol.
    pub fn compose_with_shear(&self, r: &PolySymbol) -> Result<PolySymbol> {
        if r.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "shear composition needs a polynomial on dim {}, got {}",
                self.dim(),
                r.dim()
            )));
        }
        let mut subs: Vec<PolySymbol> = self
            .eta_vars()
            .iter()
            .zip(self.q_on_full())
            .map(|(eta, qc)| eta.sub(&qc))
            .collect::<Result<_>>()?;
        subs.extend(self.full_vars_zeta());
        r.substitute(&subs)
    }

    /// The shear image `T(xi) = (eta - Q(zeta), zeta)` of a point.
    pub fn shear_point(&self, xi: &[f64]) -> Result<Vec<f64>> {
        if xi.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "shear of a point of length {} in dim {}",
                xi.len(),
                self.dim()
            )));
        }
        let (eta, zeta) = xi.split_at(self.a);
        let qv = self.q.eval(zeta);
        let mut out = Vec::with_capacity(self.dim());
        out.extend(eta.iter().zip(&qv).map(|(e, q)| e - q));
        out.extend_from_slice(zeta);
        Ok(out)
    }

    /// The two limiting symbols: small-time `P1(Q(zeta)) + P2(eta)` and
    /// large-time `P1(eta) + P2(-Q(zeta))`, both on the full space.
    pub fn limit_symbols(&self) -> Result<(PolySymbol, PolySymbol)> {
        let q_full = self.q_on_full();
        let small = self
            .p1
            .substitute(&q_full)?
            .add(&self.p2.embed(self.dim(), 0)?)?;

        let neg_q: Vec<PolySymbol> = q_full.iter().map(|c| c.neg()).collect();
        let large = self
            .p1
            .embed(self.dim(), 0)?
            .add(&self.p2.substitute(&neg_q)?)?;
        Ok((small, large))
    }

    /// Scale the whole symbol by an exact rational factor `c` (both `P1` and
    /// `P2`; the scaling groups are unchanged).
    pub fn scale(&self, c: &num::BigRational) -> Result<Self> {
        Self::new(
            self.a,
            self.b,
            self.p1.scale_exact(c)?,
            self.p2.scale_exact(c)?,
            self.q.clone(),
            self.e1.clone(),
            self.e2.clone(),
            self.f1.clone(),
            self.f2.clone(),
        )
    }

    /// Small- and large-time decay exponents from the group traces, together
    /// with the closed-form values when the decomposition is of diagonal
    /// power type (detected from the polynomial data alone, independently of
    /// the stored generators).
    pub fn exponents(&self) -> Exponents {
        let mu0 = self.e2.trace() + self.f1.trace();
        let mu_inf = self.e1.trace() + self.f2.trace();
        let family = self.detect_power_family().map(|(qd, ld, pd)| {
            let mu0_family: f64 = ld.iter().map(|l| 1.0 / *l as f64).sum::<f64>()
                + qd.iter()
                    .zip(&pd)
                    .map(|(q, p)| 1.0 / (*q as f64 * *p as f64))
                    .sum::<f64>();
            let mu_inf_family: f64 = qd.iter().map(|q| 1.0 / *q as f64).sum::<f64>()
                + ld.iter()
                    .zip(&pd)
                    .map(|(l, p)| 1.0 / (*l as f64 * *p as f64))
                    .sum::<f64>();
            FamilyExponents {
                mu0: mu0_family,
                mu_inf: mu_inf_family,
            }
        });
        Exponents {
            mu0,
            mu_inf,
            family,
        }
    }

    /// Recognize `P1 = sum c_j eta_j^{q_j}`, `P2 = sum c_j' eta_j^{l_j}`,
    /// `Q_j = c_j'' zeta_{sigma(j)}^{p_j}` with `sigma` a bijection.  Returns
    /// `(q_j, l_j, p_j)` per first-block variable, with `p_j` aligned so that
    /// `Q_j` feeds `eta_j`.
    fn detect_power_family(&self) -> Option<(Vec<u32>, Vec<u32>, Vec<u32>)> {
        if self.a != self.b {
            return None;
        }
        let pure_powers = |p: &PolySymbol| -> Option<Vec<u32>> {
            let mut degs = vec![0u32; p.dim()];
            for (alpha, coeff) in p.terms() {
                let nz: Vec<usize> = (0..alpha.len()).filter(|i| alpha[*i] > 0).collect();
                if nz.len() != 1 || !num::Signed::is_positive(coeff) {
                    return None;
                }
                let v = nz[0];
                if degs[v] != 0 {
                    return None;
                }
                degs[v] = alpha[v];
            }
            if degs.iter().any(|d| *d == 0) {
                return None;
            }
            Some(degs)
        };
        let qd = pure_powers(&self.p1)?;
        let ld = pure_powers(&self.p2)?;

        let mut pd = vec![0u32; self.a];
        let mut used = vec![false; self.b];
        for (j, comp) in self.q.components().iter().enumerate() {
            if comp.num_terms() != 1 {
                return None;
            }
            let (alpha, coeff) = comp.terms().next()?;
            if !num::Signed::is_positive(coeff) {
                return None;
            }
            let nz: Vec<usize> = (0..alpha.len()).filter(|i| alpha[*i] > 0).collect();
            if nz.len() != 1 || used[nz[0]] {
                return None;
            }
            used[nz[0]] = true;
            pd[j] = alpha[nz[0]];
        }
        Some((qd, ld, pd))
    }

    /// Run every structural check and collect an itemized report.
    pub fn validate(&self, cfg: &ValidateConfig) -> ValidationReport {
        let mut items = Vec::new();

        let h1 = check_homogeneity(
            &self.p1,
            &self.e1,
            cfg.seed,
            cfg.homog_samples,
            cfg.homog_tol,
        );
        items.push(CheckItem {
            name: "p1_homogeneous".into(),
            verdict: Verdict::from_bool(h1.pass),
            detail: format!("max defect {:.3e}", h1.max_defect),
        });
        let h2 = check_homogeneity(
            &self.p2,
            &self.e2,
            cfg.seed.wrapping_add(1),
            cfg.homog_samples,
            cfg.homog_tol,
        );
        items.push(CheckItem {
            name: "p2_homogeneous".into(),
            verdict: Verdict::from_bool(h2.pass),
            detail: format!("max defect {:.3e}", h2.max_defect),
        });

        let q1 = check_pair_homogeneity(
            &self.q,
            &self.e1,
            &self.f1,
            cfg.seed.wrapping_add(2),
            cfg.homog_samples,
            cfg.homog_tol,
        );
        items.push(CheckItem {
            name: "q_intertwines_small".into(),
            verdict: Verdict::from_bool(q1.pass),
            detail: format!("max defect {:.3e}", q1.max_defect),
        });
        let q2 = check_pair_homogeneity(
            &self.q,
            &self.e2,
            &self.f2,
            cfg.seed.wrapping_add(3),
            cfg.homog_samples,
            cfg.homog_tol,
        );
        items.push(CheckItem {
            name: "q_intertwines_large".into(),
            verdict: Verdict::from_bool(q2.pass),
            detail: format!("max defect {:.3e}", q2.max_defect),
        });

        for (name, p, seed) in [
            ("p1_positive_definite", &self.p1, cfg.seed.wrapping_add(4)),
            ("p2_positive_definite", &self.p2, cfg.seed.wrapping_add(5)),
        ] {
            let (min_val, where_r) = sphere_minimum(p, seed, cfg.sphere_samples);
            items.push(CheckItem {
                name: name.into(),
                verdict: Verdict::from_bool(min_val > 0.0),
                detail: format!("min {min_val:.3e} on sphere of radius {where_r:.0e}"),
            });
        }

        let comm_tol = |x: &ScalingMap, y: &ScalingMap| {
            COMMUTATOR_TOL * (1.0 + x.frobenius_norm() * y.frobenius_norm())
        };
        let ce = self.e1.commutator_norm(&self.e2).expect("same block");
        items.push(CheckItem {
            name: "e_generators_commute".into(),
            verdict: Verdict::from_bool(ce <= comm_tol(&self.e1, &self.e2)),
            detail: format!("commutator norm {ce:.3e}"),
        });
        let cf = self.f1.commutator_norm(&self.f2).expect("same block");
        items.push(CheckItem {
            name: "f_generators_commute".into(),
            verdict: Verdict::from_bool(cf <= comm_tol(&self.f1, &self.f2)),
            detail: format!("commutator norm {cf:.3e}"),
        });

        let diff = self.difference_generator();
        let ne = diff.is_non_expanding();
        items.push(CheckItem {
            name: "difference_non_expanding".into(),
            verdict: ne,
            detail: "sup of ||t^(E1-E2)|| over t in (0,1]".into(),
        });

        let contracting = diff.is_contracting();

        let pass = items.iter().all(|i| i.verdict.is_pass());
        ValidationReport {
            items,
            contracting_difference: contracting,
            pass,
        }
    }
}

/// Decay exponents of the on-diagonal heat kernel: `mu0` governs `t -> 0`,
/// `mu_inf` governs `t -> infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub mu0: f64,
    pub mu_inf: f64,
    /// Closed-form values recomputed from the exponent integers when the
    /// decomposition is of diagonal power type; cross-checks the traces.
    pub family: Option<FamilyExponents>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyExponents {
    pub mu0: f64,
    pub mu_inf: f64,
}

#[derive(Debug, Clone)]
pub struct ValidateConfig {
    pub seed: u64,
    pub homog_samples: usize,
    pub homog_tol: f64,
    pub sphere_samples: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            homog_samples: 500,
            homog_tol: HOMOGENEITY_TOL,
            sphere_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub items: Vec<CheckItem>,
    /// Whether `t^(E1-E2) -> 0` as `t -> 0`; downstream perturbation
    /// verdicts may only declare hard failures when this holds.
    pub contracting_difference: Verdict,
    pub pass: bool,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for item in &self.items {
            writeln!(
                f,
                "{:<28} {:<13} {}",
                item.name,
                item.verdict.to_string(),
                item.detail
            )?;
        }
        writeln!(
            f,
            "{:<28} {:<13} (informational)",
            "difference_contracting",
            self.contracting_difference.to_string()
        )?;
        write!(f, "overall: {}", if self.pass { "pass" } else { "fail" })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HomogeneityReport {
    pub max_defect: f64,
    pub pass: bool,
}

fn sample_point<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

fn sample_t<R: Rng>(rng: &mut R) -> f64 {
    let e: f64 = rng.gen_range(-2.0..2.0);
    10f64.powf(e)
}

/// Sampled check of `p(t^E x) = t * p(x)`.
///
/// The defect is relative: `|p(t^E x) - t p(x)| / (1 + |t p(x)|)`, measured
/// over `samples` draws of `x` uniform in `[-2, 2]^dim` and `t` log-uniform
/// in `[1e-2, 1e2]`.
pub fn check_homogeneity(
    p: &PolySymbol,
    e: &ScalingMap,
    seed: u64,
    samples: usize,
    tol: f64,
) -> HomogeneityReport {
    assert_eq!(p.dim(), e.dim(), "generator must act on the symbol's space");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_defect: f64 = 0.0;
    for _ in 0..samples {
        let x = sample_point(&mut rng, p.dim());
        let t = sample_t(&mut rng);
        let g = e.group_element(t).expect("t > 0");
        let scaled = g.apply(&x).expect("dims match");
        let lhs = p.eval(&scaled);
        let rhs = t * p.eval(&x);
        let defect = (lhs - rhs).abs() / (1.0 + rhs.abs());
        max_defect = max_defect.max(defect);
    }
    HomogeneityReport {
        max_defect,
        pass: max_defect <= tol,
    }
}

/// Sampled check of the intertwining identity `q(t^F zeta) = t^E q(zeta)`.
pub fn check_pair_homogeneity(
    q: &PolyMap,
    e: &ScalingMap,
    f: &ScalingMap,
    seed: u64,
    samples: usize,
    tol: f64,
) -> HomogeneityReport {
    assert_eq!(q.in_dim(), f.dim());
    assert_eq!(q.out_dim(), e.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_defect: f64 = 0.0;
    for _ in 0..samples {
        let zeta = sample_point(&mut rng, q.in_dim());
        let t = sample_t(&mut rng);
        let gf = f.group_element(t).expect("t > 0");
        let ge = e.group_element(t).expect("t > 0");
        let lhs = q.eval(&gf.apply(&zeta).expect("dims match"));
        let rhs = ge.apply(&q.eval(&zeta)).expect("dims match");
        for (l, r) in lhs.iter().zip(&rhs) {
            let defect = (l - r).abs() / (1.0 + r.abs());
            max_defect = max_defect.max(defect);
        }
    }
    HomogeneityReport {
        max_defect,
        pass: max_defect <= tol,
    }
}

/// Minimum of `p` over spheres of radii 1e-2, 1, 1e2 (`samples` points on
/// each); returns the minimum and the radius where it was attained.
fn sphere_minimum(p: &PolySymbol, seed: u64, samples: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (f64::INFINITY, 1.0);
    for &radius in &[1e-2, 1.0, 1e2] {
        for _ in 0..samples {
            let x = sphere_point(&mut rng, p.dim(), radius);
            let v = p.eval(&x);
            if v < best.0 {
                best = (v, radius);
            }
        }
    }
    best
}

fn sphere_point<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    // Box-Muller normals, normalized to the sphere.
    loop {
        let g: Vec<f64> = (0..dim)
            .map(|_| {
                let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                (-2.0 * u.ln()).sqrt() * v.cos()
            })
            .collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return g.iter().map(|x| radius * x / norm).collect();
        }
    }
}

/// The diagonal power-type decomposition on `R x R`:
/// `P1 = eta^q`, `P2 = eta^l`, `Q(zeta) = zeta^p`, with generators
/// `E1 = 1/q`, `E2 = 1/l`, `F1 = 1/(qp)`, `F2 = 1/(lp)`.
pub fn power_family(p: u32, q: u32, l: u32) -> Result<SymbolDecomposition> {
    if p < 1 {
        return Err(Error::InvalidInput("power p must be >= 1".into()));
    }
    if q < 2 || q % 2 != 0 || l < 2 || l % 2 != 0 {
        return Err(Error::InvalidInput(
            "powers q and l must be even and >= 2".into(),
        ));
    }
    let p1 = PolySymbol::monomial(1, &[q], 1.0)?;
    let p2 = PolySymbol::monomial(1, &[l], 1.0)?;
    let qmap = PolyMap::new(vec![PolySymbol::monomial(1, &[p], 1.0)?])?;
    let (pf, qf, lf) = (p as f64, q as f64, l as f64);
    SymbolDecomposition::new(
        1,
        1,
        p1,
        p2,
        qmap,
        ScalingMap::diagonal(&[1.0 / qf]),
        ScalingMap::diagonal(&[1.0 / lf]),
        ScalingMap::diagonal(&[1.0 / (qf * pf)]),
        ScalingMap::diagonal(&[1.0 / (lf * pf)]),
    )
}
