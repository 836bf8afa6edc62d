//! Multivariate polynomials with exact rational coefficients.
//!
//! Coefficients are stored as `BigRational` so that symbol assembly,
//! composition with polynomial maps, and checksum identities are exact; a
//! lexicographically ordered `f64` view is cached for fast compensated
//! evaluation.  JSON serialization writes coefficients as plain numbers when
//! they are exactly representable in double precision and as `"p/q"` strings
//! otherwise, and accepts both forms on input.

use std::collections::BTreeMap;
use std::str::FromStr;

use num::{BigRational, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Accumulator;

/// Exponent tuple of a monomial; the length always equals the polynomial's
/// variable count.
pub type MultiIndex = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct PolySymbol {
    dim: usize,
    terms: BTreeMap<MultiIndex, BigRational>,
    /// Lex-ordered f64 view of `terms`, rebuilt on every mutation.
    cache: Vec<(MultiIndex, f64)>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    dim: usize,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    alpha: Vec<u32>,
    coeff: CoeffJson,
}

/// A coefficient in a data file: a JSON number, or a string like "3/100" for
/// rationals that have no exact double representation.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffJson {
    Num(f64),
    Exact(String),
}

impl TryFrom<PolyJson> for PolySymbol {
    type Error = Error;

    fn try_from(j: PolyJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in j.terms {
            let coeff = match t.coeff {
                CoeffJson::Num(x) => BigRational::from_float(x)
                    .ok_or_else(|| Error::InvalidInput(format!("non-finite coefficient {x}")))?,
                CoeffJson::Exact(s) => BigRational::from_str(s.trim()).map_err(|e| {
                    Error::InvalidInput(format!("cannot parse coefficient {s:?}: {e}"))
                })?,
            };
            terms.push((t.alpha, coeff));
        }
        PolySymbol::from_rational_terms(j.dim, terms)
    }
}

impl From<PolySymbol> for PolyJson {
    fn from(p: PolySymbol) -> Self {
        let terms = p
            .terms
            .iter()
            .map(|(alpha, coeff)| {
                let as_f64 = coeff.to_f64().unwrap_or(f64::NAN);
                let coeff_json = match BigRational::from_float(as_f64) {
                    Some(back) if &back == coeff => CoeffJson::Num(as_f64),
                    _ => CoeffJson::Exact(coeff.to_string()),
                };
                TermJson {
                    alpha: alpha.clone(),
                    coeff: coeff_json,
                }
            })
            .collect();
        PolyJson { dim: p.dim, terms }
    }
}

impl PolySymbol {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
            cache: Vec::new(),
        }
    }

    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        Self::from_f64_terms(dim, &[(vec![0; dim], value)])
    }

    /// The coordinate polynomial `x_i` in `dim` variables.
    pub fn var(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::InvalidInput(format!(
                "variable index {i} out of range for dim {dim}"
            )));
        }
        let mut alpha = vec![0u32; dim];
        alpha[i] = 1;
        Self::from_f64_terms(dim, &[(alpha, 1.0)])
    }

    /// Single monomial `coeff * x^alpha`.
    pub fn monomial(dim: usize, alpha: &[u32], coeff: f64) -> Result<Self> {
        Self::from_f64_terms(dim, &[(alpha.to_vec(), coeff)])
    }

    pub fn from_f64_terms(dim: usize, terms: &[(MultiIndex, f64)]) -> Result<Self> {
        let rat: Result<Vec<_>> = terms
            .iter()
            .map(|(alpha, c)| {
                let r = BigRational::from_float(*c)
                    .ok_or_else(|| Error::InvalidInput(format!("non-finite coefficient {c}")))?;
                Ok((alpha.clone(), r))
            })
            .collect();
        Self::from_rational_terms(dim, rat?)
    }

    pub fn from_rational_terms(
        dim: usize,
        terms: impl IntoIterator<Item = (MultiIndex, BigRational)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<MultiIndex, BigRational> = BTreeMap::new();
        for (alpha, coeff) in terms {
            if alpha.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "multi-index {alpha:?} in a polynomial of dim {dim}"
                )));
            }
            let entry = map.entry(alpha).or_insert_with(BigRational::zero);
            *entry += coeff;
        }
        map.retain(|_, c| !c.is_zero());
        let mut p = Self {
            dim,
            terms: map,
            cache: Vec::new(),
        };
        p.rebuild_cache()?;
        Ok(p)
    }

    fn rebuild_cache(&mut self) -> Result<()> {
        self.cache.clear();
        for (alpha, coeff) in &self.terms {
            let c = coeff
                .to_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::CoefficientOverflow(format!("coefficient {coeff}")))?;
            self.cache.push((alpha.clone(), c));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &BigRational)> {
        self.terms.iter()
    }

    /// f64 view of the coefficient of `x^alpha` (0.0 when absent).
    pub fn coefficient(&self, alpha: &[u32]) -> f64 {
        self.terms
            .get(alpha)
            .and_then(|c| c.to_f64())
            .unwrap_or(0.0)
    }

    pub fn exact_coefficient(&self, alpha: &[u32]) -> Option<&BigRational> {
        self.terms.get(alpha)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|alpha| alpha.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|alpha| alpha[var]).max().unwrap_or(0)
    }

    /// Compensated evaluation at a real point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut acc = Accumulator::new();
        for (alpha, coeff) in &self.cache {
            let mut term = *coeff;
            for (xi, ai) in x.iter().zip(alpha) {
                if *ai > 0 {
                    term *= xi.powi(*ai as i32);
                }
            }
            acc.add(term);
        }
        acc.total()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(
                "adding polynomials of different dims".into(),
            ));
        }
        Self::from_rational_terms(
            self.dim,
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(a, c)| (a.clone(), c.clone())),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self::from_rational_terms(
            self.dim,
            self.terms.iter().map(|(a, c)| (a.clone(), -c.clone())),
        )
        .expect("negation preserves validity")
    }

    pub fn scale_exact(&self, c: &BigRational) -> Result<Self> {
        Self::from_rational_terms(self.dim, self.terms.iter().map(|(a, k)| (a.clone(), k * c)))
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        let r = BigRational::from_float(c)
            .ok_or_else(|| Error::InvalidInput(format!("non-finite scale {c}")))?;
        self.scale_exact(&r)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(
                "multiplying polynomials of different dims".into(),
            ));
        }
        let mut terms: Vec<(MultiIndex, BigRational)> = Vec::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let alpha: MultiIndex = a.iter().zip(b).map(|(x, y)| x + y).collect();
                terms.push((alpha, ca * cb));
            }
        }
        Self::from_rational_terms(self.dim, terms)
    }

    pub fn pow(&self, n: u32) -> Result<Self> {
        let mut result = Self::constant(self.dim, 1.0)?;
        for _ in 0..n {
            result = result.mul(self)?;
        }
        Ok(result)
    }

    /// Substitute `subs[i]` for variable `i`; all `subs` must share one
    /// common dimension, which becomes the dimension of the result.  Exact.
    pub fn substitute(&self, subs: &[Self]) -> Result<Self> {
        if subs.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} substitution targets for a polynomial in {} variables",
                subs.len(),
                self.dim
            )));
        }
        let out_dim = match subs.first() {
            Some(s) => s.dim,
            None => return Err(Error::InvalidInput("empty substitution".into())),
        };
        if subs.iter().any(|s| s.dim != out_dim) {
            return Err(Error::DimensionMismatch(
                "substitution targets of different dims".into(),
            ));
        }

        // Memoize powers of each substitution target up to the degree used.
        let mut powers: Vec<Vec<Self>> = Vec::with_capacity(self.dim);
        for (i, s) in subs.iter().enumerate() {
            let deg = self.degree_in(i) as usize;
            let mut ps = Vec::with_capacity(deg + 1);
            ps.push(Self::constant(out_dim, 1.0)?);
            for k in 1..=deg {
                let next = ps[k - 1].mul(s)?;
                ps.push(next);
            }
            powers.push(ps);
        }

        let mut result = Self::zero(out_dim);
        for (alpha, coeff) in &self.terms {
            let mut term = Self::constant(out_dim, 1.0)?;
            for (i, ai) in alpha.iter().enumerate() {
                if *ai > 0 {
                    term = term.mul(&powers[i][*ai as usize])?;
                }
            }
            result = result.add(&term.scale_exact(coeff)?)?;
        }
        Ok(result)
    }

    /// Reinterpret this polynomial in a larger variable set, with its own
    /// variables starting at `offset`.
    pub fn embed(&self, new_dim: usize, offset: usize) -> Result<Self> {
        if offset + self.dim > new_dim {
            return Err(Error::DimensionMismatch(format!(
                "embedding dim {} at offset {offset} into dim {new_dim}",
                self.dim
            )));
        }
        Self::from_rational_terms(
            new_dim,
            self.terms.iter().map(|(alpha, coeff)| {
                let mut beta = vec![0u32; new_dim];
                beta[offset..offset + self.dim].copy_from_slice(alpha);
                (beta, coeff.clone())
            }),
        )
    }

    /// True when every term has even degree in every variable and a positive
    /// coefficient (a sufficient condition for nonnegativity).
    pub fn is_even_positive(&self) -> bool {
        self.terms
            .iter()
            .all(|(alpha, c)| alpha.iter().all(|a| a % 2 == 0) && c.is_positive())
    }
}

/// Writes terms like `3/2*x0^2*x1`; used for diagnostics only.
impl std::fmt::Display for PolySymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (alpha, coeff) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{coeff}")?;
            for (i, a) in alpha.iter().enumerate() {
                match a {
                    0 => {}
                    1 => write!(f, "*x{i}")?,
                    _ => write!(f, "*x{i}^{a}")?,
                }
            }
        }
        Ok(())
    }
}

/// Polynomial map between Euclidean spaces, one component per output
/// coordinate; all components share the same input dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PolySymbol>", into = "Vec<PolySymbol>")]
pub struct PolyMap {
    components: Vec<PolySymbol>,
}

impl TryFrom<Vec<PolySymbol>> for PolyMap {
    type Error = Error;

    fn try_from(components: Vec<PolySymbol>) -> Result<Self> {
        PolyMap::new(components)
    }
}

impl From<PolyMap> for Vec<PolySymbol> {
    fn from(m: PolyMap) -> Self {
        m.components
    }
}

impl PolyMap {
    pub fn new(components: Vec<PolySymbol>) -> Result<Self> {
        let first_dim = components
            .first()
            .ok_or_else(|| Error::InvalidInput("polynomial map needs >= 1 component".into()))?
            .dim();
        if components.iter().any(|c| c.dim() != first_dim) {
            return Err(Error::DimensionMismatch(
                "polynomial map components of different input dims".into(),
            ));
        }
        Ok(Self { components })
    }

    pub fn in_dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn out_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[PolySymbol] {
        &self.components
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p_example() -> PolySymbol {
        // (x0 + x1^2)^2 + x0^4 expanded.
        PolySymbol::from_f64_terms(
            2,
            &[
                (vec![2, 0], 1.0),
                (vec![1, 2], 2.0),
                (vec![0, 4], 1.0),
                (vec![4, 0], 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn eval_matches_direct_formula() {
        let p = p_example();
        for &(x, y) in &[(0.3, -1.7), (2.0, 0.5), (-1.0, 1.0), (0.0, 0.0)] {
            let expected = (x + y * y) * (x + y * y) + x * x * x * x;
            assert_relative_eq!(p.eval(&[x, y]), expected, max_relative = 1e-14);
        }
    }

    #[test]
    fn zero_coefficients_are_pruned() {
        let p = PolySymbol::from_f64_terms(1, &[(vec![2], 1.0), (vec![2], -1.0), (vec![0], 3.0)])
            .unwrap();
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coefficient(&[0]), 3.0);
    }

    #[test]
    fn substitution_expands_shift() {
        // x^2 with x -> (u + v^2) in 2 vars.
        let sq = PolySymbol::monomial(1, &[2], 1.0).unwrap();
        let u = PolySymbol::var(2, 0).unwrap();
        let v2 = PolySymbol::monomial(2, &[0, 2], 1.0).unwrap();
        let shift = u.add(&v2).unwrap();
        let out = sq.substitute(&[shift]).unwrap();
        assert_eq!(out.coefficient(&[2, 0]), 1.0);
        assert_eq!(out.coefficient(&[1, 2]), 2.0);
        assert_eq!(out.coefficient(&[0, 4]), 1.0);
        assert_eq!(out.num_terms(), 3);
    }

    #[test]
    fn substitution_is_exact_for_rationals() {
        // (x/3 + 1/7)^3 has coefficient 1/27 on x^3 and 1/343 constant.
        let p = PolySymbol::monomial(1, &[3], 1.0).unwrap();
        let inner = PolySymbol::from_rational_terms(
            1,
            vec![
                (vec![1], BigRational::new(1.into(), 3.into())),
                (vec![0], BigRational::new(1.into(), 7.into())),
            ],
        )
        .unwrap();
        let out = p.substitute(&[inner]).unwrap();
        assert_eq!(
            out.exact_coefficient(&[3]).unwrap(),
            &BigRational::new(1.into(), 27.into())
        );
        assert_eq!(
            out.exact_coefficient(&[0]).unwrap(),
            &BigRational::new(1.into(), 343.into())
        );
    }

    #[test]
    fn serde_exact_rational_roundtrip() {
        let p = PolySymbol::from_rational_terms(
            1,
            vec![(vec![2], BigRational::new(1.into(), 100.into()))],
        )
        .unwrap();
        let text = serde_json::to_string(&p).unwrap();
        // 1/100 has no exact double representation, so it must serialize as
        // a string.
        assert!(text.contains("\"1/100\""));
        let back: PolySymbol = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn serde_accepts_plain_numbers() {
        let text = r#"{"dim":2,"terms":[{"alpha":[1,2],"coeff":2.0},{"alpha":[4,0],"coeff":1}]}"#;
        let p: PolySymbol = serde_json::from_str(text).unwrap();
        assert_eq!(p.coefficient(&[1, 2]), 2.0);
        assert_eq!(p.coefficient(&[4, 0]), 1.0);
    }

    #[test]
    fn bad_multi_index_length_rejected() {
        let r = PolySymbol::from_f64_terms(2, &[(vec![1], 1.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn embed_shifts_variables() {
        let q = PolySymbol::monomial(1, &[2], 1.0).unwrap();
        let e = q.embed(3, 1).unwrap();
        assert_eq!(e.dim(), 3);
        assert_eq!(e.coefficient(&[0, 2, 0]), 1.0);
    }

    #[test]
    fn even_positive_detection() {
        assert!(p_example().is_even_positive() == false); // x0^1 x1^2 term
        let p = PolySymbol::from_f64_terms(2, &[(vec![2, 0], 1.0), (vec![0, 4], 0.5)]).unwrap();
        assert!(p.is_even_positive());
    }

    #[test]
    fn polymap_eval() {
        let q = PolyMap::new(vec![PolySymbol::monomial(1, &[2], 1.0).unwrap()]).unwrap();
        assert_eq!(q.eval(&[3.0]), vec![9.0]);
        assert_eq!(q.in_dim(), 1);
        assert_eq!(q.out_dim(), 1);
    }
}
