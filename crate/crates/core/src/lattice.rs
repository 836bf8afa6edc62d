//! Finitely supported complex functions on `Z^d`: exact builtin datasets,
//! convolution powers (direct or through the torus DFT), Fourier analysis,
//! and local comparison of convolution powers against heat-kernel
//! attractors.
//!
//! Entries are complex doubles; constructors additionally carry an exact
//! rational side table that survives serialization, so datasets defined by
//! rational tables roundtrip losslessly and exact norms can be computed in
//! tests.  Arithmetic (convolution, powers) drops the exact table.
//!
//! The DFT power method computes `fhat` on a uniform torus grid, raises it
//! pointwise and transforms back, which periodizes the true power over the
//! grid; the grid is doubled until the sup norm stabilizes.  That criterion
//! cannot detect a pure translation of mass (a power of a single shifted
//! delta wraps around the torus without changing its sup norm), so functions
//! whose powers translate without spreading need a grid sized by hand.

use std::collections::BTreeMap;
use std::str::FromStr;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::decomp::SymbolDecomposition;
use crate::error::{Error, Result};
use crate::kernel::{kernel_eval, kernel_window_rescaled_large};
use crate::numeric::{Accumulator, ComplexAccumulator};
use crate::quad::QuadratureSpec;

/// Noise floor for convolution powers, relative to the sup norm: entries
/// below it are dropped after every squaring / inverse-transform step.
const POWER_PRUNE_REL: f64 = 1e-18;

/// Relative sup-norm stability target for the DFT grid doubling.
const ALIAS_REL_TOL: f64 = 1e-9;

/// Maximum number of grid doublings before giving up on alias control.
const ALIAS_MAX_DOUBLINGS: usize = 8;

/// Cell budget for dense intermediate arrays (DFT grids, convolution boxes).
const CELL_BUDGET: usize = 1 << 24;

/// Fraction of the l1 norm that a comparison window may leave outside.
const WINDOW_CLIP_REL: f64 = 1e-6;

/// Entries below this fraction of the sup norm are outside the core of a
/// convolution power when the default comparison window is chosen.
const WINDOW_CORE_REL: f64 = 1e-3;

/// Shell radius used for the expansion-residual precondition of
/// `llt_compare`.
const LLT_RESIDUAL_RADIUS: f64 = 0.1;

/// A finitely supported function `Z^d -> C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeJson", into = "LatticeJson")]
pub struct LatticeFunction {
    dim: usize,
    entries: BTreeMap<Vec<i64>, Complex64>,
    /// Exact values per entry, kept by constructors and dropped by
    /// arithmetic.
    exact: Option<BTreeMap<Vec<i64>, (BigRational, BigRational)>>,
}

#[derive(Serialize, Deserialize)]
struct LatticeJson {
    dim: usize,
    entries: Vec<EntryJson>,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    x: Vec<i64>,
    re: CoeffJson,
    im: CoeffJson,
}

/// A value in a data file: a JSON number, or a string like "3/100" for
/// rationals with no exact double representation.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffJson {
    Num(f64),
    Exact(String),
}

impl CoeffJson {
    fn parse(&self) -> Result<BigRational> {
        match self {
            CoeffJson::Num(x) => BigRational::from_float(*x)
                .ok_or_else(|| Error::InvalidInput(format!("non-finite entry value {x}"))),
            CoeffJson::Exact(s) => BigRational::from_str(s.trim())
                .map_err(|e| Error::InvalidInput(format!("cannot parse value {s:?}: {e}"))),
        }
    }

    fn emit(r: &BigRational) -> Self {
        let as_f64 = r.to_f64().unwrap_or(f64::NAN);
        match BigRational::from_float(as_f64) {
            Some(back) if &back == r => CoeffJson::Num(as_f64),
            _ => CoeffJson::Exact(r.to_string()),
        }
    }
}

impl TryFrom<LatticeJson> for LatticeFunction {
    type Error = Error;

    fn try_from(j: LatticeJson) -> Result<Self> {
        let entries = j
            .entries
            .into_iter()
            .map(|e| Ok((e.x, e.re.parse()?, e.im.parse()?)))
            .collect::<Result<Vec<_>>>()?;
        LatticeFunction::from_rational_entries(j.dim, entries)
    }
}

impl From<LatticeFunction> for LatticeJson {
    fn from(f: LatticeFunction) -> Self {
        let entries = match &f.exact {
            Some(ex) => ex
                .iter()
                .map(|(x, (re, im))| EntryJson {
                    x: x.clone(),
                    re: CoeffJson::emit(re),
                    im: CoeffJson::emit(im),
                })
                .collect(),
            None => f
                .entries
                .iter()
                .map(|(x, v)| EntryJson {
                    x: x.clone(),
                    re: CoeffJson::Num(v.re),
                    im: CoeffJson::Num(v.im),
                })
                .collect(),
        };
        LatticeJson {
            dim: f.dim,
            entries,
        }
    }
}

/// How to compute a convolution power.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvMethod {
    /// Binary powering with exact direct convolutions.
    Direct,
    /// Periodize through a torus DFT with `grid` points per axis, doubling
    /// the grid until the sup norm stabilizes.
    Dft { grid: usize },
}

impl LatticeFunction {
    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput(
                "lattice dimension must be positive".into(),
            ));
        }
        Ok(Self {
            dim,
            entries: BTreeMap::new(),
            exact: Some(BTreeMap::new()),
        })
    }

    /// The point mass at the origin.
    pub fn delta(dim: usize) -> Result<Self> {
        Self::from_rational_entries(
            dim,
            [(vec![0; dim], BigRational::one(), BigRational::zero())],
        )
    }

    pub fn from_entries(dim: usize, entries: &[(Vec<i64>, Complex64)]) -> Result<Self> {
        let rat = entries
            .iter()
            .map(|(x, v)| {
                let re = BigRational::from_float(v.re);
                let im = BigRational::from_float(v.im);
                match (re, im) {
                    (Some(re), Some(im)) => Ok((x.clone(), re, im)),
                    _ => Err(Error::InvalidInput(format!(
                        "non-finite value {v} at {x:?}"
                    ))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rational_entries(dim, rat)
    }

    /// Build from exact rational values; duplicate points accumulate, exact
    /// zeros are dropped.
    pub fn from_rational_entries(
        dim: usize,
        entries: impl IntoIterator<Item = (Vec<i64>, BigRational, BigRational)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput(
                "lattice dimension must be positive".into(),
            ));
        }
        let mut exact: BTreeMap<Vec<i64>, (BigRational, BigRational)> = BTreeMap::new();
        for (x, re, im) in entries {
            if x.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "point {x:?} in a lattice function of dim {dim}"
                )));
            }
            let slot = exact
                .entry(x)
                .or_insert_with(|| (BigRational::zero(), BigRational::zero()));
            slot.0 += re;
            slot.1 += im;
        }
        exact.retain(|_, (re, im)| !re.is_zero() || !im.is_zero());
        let mut entries = BTreeMap::new();
        for (x, (re, im)) in &exact {
            let (rf, imf) = (re.to_f64(), im.to_f64());
            match (rf, imf) {
                (Some(a), Some(b)) if a.is_finite() && b.is_finite() => {
                    entries.insert(x.clone(), Complex64::new(a, b));
                }
                _ => {
                    return Err(Error::CoefficientOverflow(format!(
                        "entry at {x:?} not representable in f64"
                    )))
                }
            }
        }
        Ok(Self {
            dim,
            entries,
            exact: Some(exact),
        })
    }

    /// The step distribution with transform
    /// `1 - [ (sin x1 + 4 sin^2(x2/2))^2 + (797/600) sin^4 x1
    ///        + 10 sin^6(x1/2) + (1/6) sin^6 x2 + (179/1200) sin^8 x2
    ///        + (1/6) sin x1 sin^4 x2 + (77/900) sin x1 sin^6 x2
    ///        + (47/150) sin^3 x1 sin^2 x2 - (3/100) sin^2 x1 sin^4 x2 ] / 100`,
    /// as an exact 47-entry table.  Its powers decay at the inhomogeneous
    /// rate `n^{-5/8}` and satisfy the local limit comparison.
    pub fn builtin_phi() -> Self {
        let f = table_function(PHI_DEN, PHI_TERMS).expect("embedded table is well-formed");
        assert!(
            f.exact_sum_is_one(),
            "builtin 47-entry table failed its exact checksum"
        );
        f
    }

    /// The companion step distribution (transform truncated after the
    /// `sin^6 x2` term): same symbol to second order along the axes but with
    /// a residual that blows up along the valley, so its powers decay
    /// strictly faster than `n^{-5/8}` while the limit constant degrades to
    /// zero.  Exact 21-entry table.
    pub fn builtin_psi() -> Self {
        let f = table_function(PSI_DEN, PSI_TERMS).expect("embedded table is well-formed");
        assert!(
            f.exact_sum_is_one(),
            "builtin 21-entry table failed its exact checksum"
        );
        f
    }

    fn exact_sum_is_one(&self) -> bool {
        let ex = match &self.exact {
            Some(ex) => ex,
            None => return false,
        };
        let mut re = BigRational::zero();
        let mut im = BigRational::zero();
        for (r, i) in ex.values() {
            re += r;
            im += i;
        }
        re.is_one() && im.is_zero()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.entries.iter()
    }

    /// The value at `x` (zero off the support).
    pub fn get(&self, x: &[i64]) -> Complex64 {
        self.entries.get(x).copied().unwrap_or(Complex64::ZERO)
    }

    /// The exact value at `x`, when this function carries an exact table.
    pub fn exact_value(&self, x: &[i64]) -> Option<(BigRational, BigRational)> {
        self.exact.as_ref().map(|ex| {
            ex.get(x)
                .cloned()
                .unwrap_or_else(|| (BigRational::zero(), BigRational::zero()))
        })
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn supnorm(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn l1_norm(&self) -> f64 {
        let mut acc = Accumulator::new();
        for v in self.entries.values() {
            acc.add(v.norm());
        }
        acc.total()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let mut acc = Accumulator::new();
        for v in self.entries.values() {
            acc.add(v.norm_sqr());
        }
        acc.total()
    }

    pub fn sum(&self) -> Complex64 {
        let mut acc = ComplexAccumulator::new();
        for v in self.entries.values() {
            acc.add(*v);
        }
        acc.total()
    }

    /// Componentwise min / max of the support, `None` when empty.
    pub fn support_box(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let mut it = self.entries.keys();
        let first = it.next()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for x in it {
            for d in 0..self.dim {
                lo[d] = lo[d].min(x[d]);
                hi[d] = hi[d].max(x[d]);
            }
        }
        Some((lo, hi))
    }

    fn prune_relative(&mut self, rel: f64) {
        let floor = self.supnorm() * rel;
        if floor > 0.0 {
            self.entries.retain(|_, v| v.norm() > floor);
        }
        self.exact = None;
    }

    /// Convolution `(f * g)(x) = sum_y f(x - y) g(y)` by direct summation
    /// over a dense output box; exact zeros are dropped, and the exact side
    /// tables do not survive.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "convolution of dims {} and {}",
                self.dim, other.dim
            )));
        }
        let (abox, bbox) = match (self.support_box(), other.support_box()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Self::zero_no_exact(self.dim),
        };
        let dim = self.dim;
        let lo: Vec<i64> = (0..dim).map(|d| abox.0[d] + bbox.0[d]).collect();
        let hi: Vec<i64> = (0..dim).map(|d| abox.1[d] + bbox.1[d]).collect();
        let dims: Vec<usize> = (0..dim).map(|d| (hi[d] - lo[d] + 1) as usize).collect();
        let cells = checked_cells(&dims)?;

        // Gather from the larger operand, iterating the smaller one per
        // output cell; the larger is densified so lookups are O(1).
        let (big, small) = if self.entries.len() >= other.entries.len() {
            (self, other)
        } else {
            (other, self)
        };
        let (blo, bdims, bdense) = big.to_dense()?;
        let small_terms: Vec<(&Vec<i64>, Complex64)> =
            small.entries.iter().map(|(x, v)| (x, *v)).collect();

        let out: Vec<Complex64> = (0..cells)
            .into_par_iter()
            .map(|idx| {
                let x = decode_index(idx, &dims, &lo);
                let mut acc = ComplexAccumulator::new();
                for (y, v) in &small_terms {
                    let mut flat = 0usize;
                    let mut inside = true;
                    for d in 0..dim {
                        let c = x[d] - y[d] - blo[d];
                        if c < 0 || c >= bdims[d] as i64 {
                            inside = false;
                            break;
                        }
                        flat = flat * bdims[d] + c as usize;
                    }
                    if inside {
                        acc.add(bdense[flat] * v);
                    }
                }
                acc.total()
            })
            .collect();

        let mut entries = BTreeMap::new();
        for (idx, v) in out.into_iter().enumerate() {
            if v.norm() > 0.0 {
                entries.insert(decode_index(idx, &dims, &lo), v);
            }
        }
        Ok(Self {
            dim,
            entries,
            exact: None,
        })
    }

    fn zero_no_exact(dim: usize) -> Result<Self> {
        Ok(Self {
            dim,
            entries: BTreeMap::new(),
            exact: None,
        })
    }

    fn to_dense(&self) -> Result<(Vec<i64>, Vec<usize>, Vec<Complex64>)> {
        let (lo, hi) = self.support_box().expect("non-empty");
        let dims: Vec<usize> = (0..self.dim)
            .map(|d| (hi[d] - lo[d] + 1) as usize)
            .collect();
        let cells = checked_cells(&dims)?;
        let mut dense = vec![Complex64::ZERO; cells];
        for (x, v) in &self.entries {
            let mut flat = 0usize;
            for d in 0..self.dim {
                flat = flat * dims[d] + (x[d] - lo[d]) as usize;
            }
            dense[flat] = *v;
        }
        Ok((lo, dims, dense))
    }

    /// The `n`-fold convolution power, `n >= 1`.
    pub fn conv_power(&self, n: u32, method: ConvMethod) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("convolution power needs n >= 1".into()));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        match method {
            ConvMethod::Direct => {
                let mut acc: Option<Self> = None;
                let mut base = self.clone();
                let mut k = n;
                loop {
                    if k & 1 == 1 {
                        acc = Some(match acc {
                            None => base.clone(),
                            Some(a) => {
                                let mut r = a.convolve(&base)?;
                                r.prune_relative(POWER_PRUNE_REL);
                                r
                            }
                        });
                    }
                    k >>= 1;
                    if k == 0 {
                        break;
                    }
                    let mut sq = base.convolve(&base)?;
                    sq.prune_relative(POWER_PRUNE_REL);
                    base = sq;
                }
                Ok(acc.expect("n >= 1"))
            }
            ConvMethod::Dft { grid } => self.conv_power_dft(n, grid),
        }
    }

    fn conv_power_dft(&self, n: u32, grid: usize) -> Result<Self> {
        if self.dim > 2 {
            return Err(Error::InvalidInput(format!(
                "dft convolution powers support dim <= 2, got {}",
                self.dim
            )));
        }
        if let Some((lo, hi)) = self.support_box() {
            for d in 0..self.dim {
                let width = (hi[d] - lo[d] + 1) as usize;
                if grid < width {
                    return Err(Error::InvalidInput(format!(
                        "dft grid {grid} smaller than the support width {width} on axis {d}"
                    )));
                }
            }
        }
        let mut grid = grid.max(2);
        let mut prev = self.dft_power_grid(n, grid)?;
        for _ in 0..ALIAS_MAX_DOUBLINGS {
            let next = self.dft_power_grid(n, grid * 2)?;
            let (ps, cs) = (prev.supnorm(), next.supnorm());
            if (ps - cs).abs() <= ALIAS_REL_TOL * cs {
                return Ok(next);
            }
            prev = next;
            grid *= 2;
        }
        Err(Error::NonConvergence {
            steps: ALIAS_MAX_DOUBLINGS,
            context: format!("dft power sup norm still moving at grid {grid} per axis"),
        })
    }

    fn dft_power_grid(&self, n: u32, grid: usize) -> Result<Self> {
        let dims = vec![grid; self.dim];
        let cells = checked_cells(&dims)?;
        let mut data = vec![Complex64::ZERO; cells];
        for (x, v) in &self.entries {
            let mut flat = 0usize;
            for d in 0..self.dim {
                flat = flat * grid + x[d].rem_euclid(grid as i64) as usize;
            }
            data[flat] += v;
        }
        // Transform sign convention: the unnormalized inverse DFT of the
        // embedded table is fhat on the grid 2 pi k / N.
        fft_all(&mut data, &dims, true);
        data.par_iter_mut().for_each(|z| *z = z.powu(n));
        fft_all(&mut data, &dims, false);
        let scale = 1.0 / cells as f64;

        let mut sup: f64 = 0.0;
        for z in &data {
            sup = sup.max(z.norm());
        }
        let floor = sup * scale * POWER_PRUNE_REL;
        let mut entries = BTreeMap::new();
        for (idx, z) in data.iter().enumerate() {
            let v = z * scale;
            if v.norm() > floor {
                let mut rem = idx;
                let mut x = vec![0i64; self.dim];
                for d in (0..self.dim).rev() {
                    x[d] = wrap_centered(rem % grid, grid);
                    rem /= grid;
                }
                entries.insert(x, v);
            }
        }
        Ok(Self {
            dim: self.dim,
            entries,
            exact: None,
        })
    }

    /// `fhat(xi) = sum_x f(x) exp(i x . xi)`, compensated, in support order.
    pub fn fourier_eval(&self, xi: &[f64]) -> Result<Complex64> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "frequency of length {} for a lattice function of dim {}",
                xi.len(),
                self.dim
            )));
        }
        Ok(self.transform_at(xi))
    }

    fn transform_at(&self, xi: &[f64]) -> Complex64 {
        let mut acc = ComplexAccumulator::new();
        for (x, v) in &self.entries {
            let phase: f64 = x.iter().zip(xi).map(|(a, b)| *a as f64 * b).sum();
            acc.add(v * Complex64::from_polar(1.0, phase));
        }
        acc.total()
    }

    /// All maximizers of `|fhat|` on the torus `(-pi, pi]^d`: a uniform grid
    /// scan (at least 64 points per axis), pattern-search refinement of every
    /// near-maximal grid local maximum, then the refined points within
    /// `1e-9` of the refined global maximum, best first.
    ///
    /// A patch of near-constant modulus (more than `16 * 3^d` grid cells
    /// within `1e-12` of the maximum) has no isolated maximizer and is
    /// reported as degenerate.
    pub fn max_modulus_search(
        &self,
        grid: usize,
        refine_iters: usize,
    ) -> Result<Vec<ModulusPoint>> {
        if grid < 64 {
            return Err(Error::InvalidInput(format!(
                "modulus search grid must be at least 64 per axis, got {grid}"
            )));
        }
        let dim = self.dim;
        let dims = vec![grid; dim];
        let cells = checked_cells(&dims)?;
        let axis: Vec<f64> = (0..grid)
            .map(|j| {
                -std::f64::consts::PI + 2.0 * std::f64::consts::PI * (j + 1) as f64 / grid as f64
            })
            .collect();

        let values: Vec<f64> = (0..cells)
            .into_par_iter()
            .map(|idx| {
                let mut rem = idx;
                let mut xi = vec![0.0; dim];
                for d in (0..dim).rev() {
                    xi[d] = axis[rem % grid];
                    rem /= grid;
                }
                self.transform_at(&xi).norm()
            })
            .collect();
        let m = values.iter().copied().fold(0.0, f64::max);

        let plateau = values.iter().filter(|v| m - **v <= 1e-12).count();
        if plateau > 16 * 3usize.pow(dim as u32) {
            return Err(Error::Degenerate(format!(
                "modulus is constant to 1e-12 on {plateau} grid cells; no isolated maximizer"
            )));
        }

        // Grid local maxima near the global level, as refinement seeds.
        let level = m - 0.1 * m.max(1.0);
        let mut seeds = Vec::new();
        'cells: for idx in 0..cells {
            if values[idx] < level {
                continue;
            }
            let mut coord = vec![0usize; dim];
            let mut rem = idx;
            for d in (0..dim).rev() {
                coord[d] = rem % grid;
                rem /= grid;
            }
            let mut offs = vec![0i64; dim];
            loop {
                // Walk the 3^d - 1 torus neighbors.
                let mut d = 0;
                loop {
                    if d == dim {
                        break 'cells;
                    }
                    offs[d] += 1;
                    if offs[d] <= 1 {
                        break;
                    }
                    offs[d] = -1;
                    d += 1;
                }
                if offs.iter().all(|o| *o == 0) {
                    continue;
                }
                let mut nidx = 0usize;
                for d in 0..dim {
                    let c = (coord[d] as i64 + offs[d]).rem_euclid(grid as i64) as usize;
                    nidx = nidx * grid + c;
                }
                if values[nidx] > values[idx] {
                    break;
                }
                if offs.iter().all(|o| *o == 1) {
                    let xi: Vec<f64> = coord.iter().map(|c| axis[*c]).collect();
                    seeds.push((xi, values[idx]));
                    break;
                }
            }
        }

        // Pattern search around each seed.
        let step0 = std::f64::consts::PI / grid as f64;
        let mut refined: Vec<(Vec<f64>, f64)> = seeds
            .into_par_iter()
            .map(|(mut xi, mut val)| {
                let mut h = step0;
                for _ in 0..refine_iters {
                    let mut best: Option<(usize, f64, f64)> = None;
                    for d in 0..dim {
                        for s in [-1.0, 1.0] {
                            let mut cand = xi.clone();
                            cand[d] += s * h;
                            let v = self.transform_at(&cand).norm();
                            if v > val && best.map_or(true, |(_, _, bv)| v > bv) {
                                best = Some((d, s * h, v));
                            }
                        }
                    }
                    match best {
                        Some((d, dh, v)) => {
                            xi[d] += dh;
                            val = v;
                        }
                        None => {
                            h *= 0.5;
                            if h < 1e-13 {
                                break;
                            }
                        }
                    }
                }
                for c in &mut xi {
                    *c = wrap_angle(*c);
                }
                (xi, val)
            })
            .collect();

        refined.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal))
        });
        let mut kept: Vec<(Vec<f64>, f64)> = Vec::new();
        for (xi, val) in refined {
            let dup = kept.iter().any(|(k, _)| torus_dist(k, &xi) < 1e-6);
            if !dup {
                kept.push((xi, val));
            }
        }
        let best = kept.first().map(|(_, v)| *v).unwrap_or(0.0);
        let tol = 1e-9 * best.max(1.0);
        Ok(kept
            .into_iter()
            .filter(|(_, v)| best - *v <= tol)
            .map(|(xi, value)| ModulusPoint { xi, value })
            .collect())
    }
}

/// One maximizer of `|fhat|` on the torus.
#[derive(Debug, Clone)]
pub struct ModulusPoint {
    pub xi: Vec<f64>,
    pub value: f64,
}

fn checked_cells(dims: &[usize]) -> Result<usize> {
    let mut cells = 1usize;
    for d in dims {
        cells = cells
            .checked_mul(*d)
            .filter(|c| *c <= CELL_BUDGET)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "dense box {dims:?} exceeds the {CELL_BUDGET}-cell budget"
                ))
            })?;
    }
    Ok(cells)
}

fn decode_index(idx: usize, dims: &[usize], lo: &[i64]) -> Vec<i64> {
    let mut rem = idx;
    let mut x = vec![0i64; dims.len()];
    for d in (0..dims.len()).rev() {
        x[d] = lo[d] + (rem % dims[d]) as i64;
        rem /= dims[d];
    }
    x
}

fn wrap_centered(k: usize, n: usize) -> i64 {
    let (k, n) = (k as i64, n as i64);
    if k < (n + 1) / 2 {
        k
    } else {
        k - n
    }
}

fn wrap_angle(x: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let w = x - tau * (x / tau).round();
    if w <= -std::f64::consts::PI {
        w + tau
    } else {
        w
    }
}

fn torus_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| wrap_angle(x - y).abs())
        .fold(0.0, f64::max)
}

/// In-place unnormalized DFT along every axis of a dense row-major array,
/// `inverse = true` for the `exp(+i)` sign.
fn fft_all(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let plan = |planner: &mut FftPlanner<f64>, len: usize| {
        if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        }
    };
    match dims {
        [n] => {
            let fft = plan(&mut planner, *n);
            fft.process(data);
        }
        [n0, n1] => {
            let (n0, n1) = (*n0, *n1);
            let fft1 = plan(&mut planner, n1);
            data.par_chunks_mut(n1).for_each(|row| fft1.process(row));
            let mut tr = vec![Complex64::ZERO; n0 * n1];
            tr.par_chunks_mut(n0).enumerate().for_each(|(j, col)| {
                for (i, slot) in col.iter_mut().enumerate() {
                    *slot = data[i * n1 + j];
                }
            });
            let fft0 = plan(&mut planner, n0);
            tr.par_chunks_mut(n0).for_each(|col| fft0.process(col));
            data.par_chunks_mut(n1).enumerate().for_each(|(i, row)| {
                for (j, slot) in row.iter_mut().enumerate() {
                    *slot = tr[j * n0 + i];
                }
            });
        }
        _ => unreachable!("dft powers are restricted to dim <= 2"),
    }
}

/// The data needed to compare convolution powers of `f` against a heat
/// kernel: the structured symbol (as a two-block decomposition), the
/// maximizer `xi0` of `|fhat|`, the drift `alpha = -i grad log fhat(xi0)`,
/// and the decay exponent `mu_phi` (which must equal the large-time trace
/// exponent of the decomposition).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "LltSpecJson", into = "LltSpecJson")]
pub struct LltSpec {
    decomp: SymbolDecomposition,
    xi0: Vec<f64>,
    alpha: Vec<f64>,
    mu_phi: f64,
}

#[derive(Serialize, Deserialize)]
struct LltSpecJson {
    decomp: SymbolDecomposition,
    xi0: Vec<f64>,
    alpha: Vec<f64>,
    mu_phi: f64,
}

impl TryFrom<LltSpecJson> for LltSpec {
    type Error = Error;

    fn try_from(j: LltSpecJson) -> Result<Self> {
        LltSpec::new(j.decomp, j.xi0, j.alpha, j.mu_phi)
    }
}

impl From<LltSpec> for LltSpecJson {
    fn from(s: LltSpec) -> Self {
        LltSpecJson {
            decomp: s.decomp,
            xi0: s.xi0,
            alpha: s.alpha,
            mu_phi: s.mu_phi,
        }
    }
}

impl LltSpec {
    pub fn new(
        decomp: SymbolDecomposition,
        xi0: Vec<f64>,
        alpha: Vec<f64>,
        mu_phi: f64,
    ) -> Result<Self> {
        let dim = decomp.dim();
        if xi0.len() != dim || alpha.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "xi0 / alpha of lengths {} / {} for a symbol in dim {dim}",
                xi0.len(),
                alpha.len()
            )));
        }
        if xi0.iter().chain(&alpha).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("xi0 and alpha must be finite".into()));
        }
        if !(mu_phi > 0.0) || !mu_phi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "decay exponent must be positive, got {mu_phi}"
            )));
        }
        let mu_inf = decomp.exponents().mu_inf;
        if (mu_phi - mu_inf).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "decay exponent {mu_phi} disagrees with the large-time trace exponent {mu_inf}"
            )));
        }
        Ok(Self {
            decomp,
            xi0,
            alpha,
            mu_phi,
        })
    }

    /// The comparison spec for both builtin datasets: the two-block symbol
    /// `((x1 + x2^2)^2 + x1^4) / 100` with `xi0 = 0`, no drift, and decay
    /// exponent `5/8`.
    pub fn for_builtins() -> Result<Self> {
        let d = crate::decomp::power_family(2, 2, 4)?;
        let scaled = d.scale(&BigRational::new(BigInt::one(), BigInt::from(100)))?;
        Self::new(scaled, vec![0.0; 2], vec![0.0; 2], 0.625)
    }

    pub fn decomp(&self) -> &SymbolDecomposition {
        &self.decomp
    }

    pub fn xi0(&self) -> &[f64] {
        &self.xi0
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn mu_phi(&self) -> f64 {
        self.mu_phi
    }
}

/// `max |R| / P` over one shell of the expansion check.
#[derive(Debug, Clone)]
pub struct ShellSample {
    pub t: f64,
    pub max_ratio: f64,
    pub max_abs_residual: f64,
    /// The sampled frequency offset realizing `max_ratio`.
    pub at: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub shells: Vec<ShellSample>,
    /// The smallest shell is below 0.05 and improves on the largest.
    pub pass: bool,
}

/// Checks that `log fhat(xi0 + xi) - log fhat(xi0) = i alpha . xi - P(xi)
/// + R(xi)` with `R` subordinate to `P`: samples
/// `xi = T(t^G xi')` over unit directions `xi'` on six shells
/// `t = sample_radius, sample_radius/10, ...` (`T` the shear, `G` the
/// large-time generator) and reports `max |R| / P` per shell.  The check
/// passes when the smallest shell is below `0.05` and below the largest
/// shell, so the residual actually dies out relative to the symbol at the
/// attractor's own anisotropic rate.
///
/// The principal branch of the logarithm is used; samples must keep
/// `fhat / fhat(xi0)` in the right half-plane.
pub fn expansion_residual(
    f: &LatticeFunction,
    spec: &LltSpec,
    sample_radius: f64,
) -> Result<ResidualReport> {
    let dim = spec.decomp().dim();
    if f.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "lattice function of dim {} against a symbol in dim {dim}",
            f.dim()
        )));
    }
    if !(sample_radius > 0.0) || !sample_radius.is_finite() {
        return Err(Error::InvalidInput(format!(
            "sample radius must be positive, got {sample_radius}"
        )));
    }
    let c0 = f.transform_at(spec.xi0());
    if (c0.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "|fhat(xi0)| = {} but the comparison needs a normalized maximizer",
            c0.norm()
        )));
    }
    let p = spec.decomp().assemble_symbol()?;
    let g = spec.decomp().probe_generator();
    let dirs = unit_directions(dim);

    let mut shells = Vec::with_capacity(6);
    for k in 0..6 {
        let t = sample_radius * 10f64.powi(-(k as i32));
        let m = g.group_element(t)?;
        let mut worst = ShellSample {
            t,
            max_ratio: 0.0,
            max_abs_residual: 0.0,
            at: vec![0.0; dim],
        };
        for w in &dirs {
            let scaled = m.apply(w).expect("dims match");
            let xi = spec.decomp().shear_point(&scaled)?;
            let pval = p.eval(&xi);
            if !(pval > 0.0) {
                return Err(Error::Degenerate(format!(
                    "symbol is not positive at the shell sample {xi:?}"
                )));
            }
            let probe: Vec<f64> = spec.xi0().iter().zip(&xi).map(|(a, b)| a + b).collect();
            let z = f.transform_at(&probe) / c0;
            if !(z.re > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "fhat / fhat(xi0) leaves the right half-plane at offset {xi:?}; \
                     the principal logarithm branch is unusable there"
                )));
            }
            let drift: f64 = spec.alpha().iter().zip(&xi).map(|(a, b)| a * b).sum();
            let r = z.ln() - Complex64::new(0.0, drift) + pval;
            let ratio = r.norm() / pval;
            if ratio > worst.max_ratio {
                worst.max_ratio = ratio;
                worst.max_abs_residual = r.norm();
                worst.at = xi;
            }
        }
        shells.push(worst);
    }
    let pass = shells[5].max_ratio <= 0.05 && shells[5].max_ratio < shells[0].max_ratio;
    Ok(ResidualReport { shells, pass })
}

fn unit_directions(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..64)
            .map(|j| {
                let th = 2.0 * std::f64::consts::PI * j as f64 / 64.0;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
            (0..64)
                .map(|_| {
                    let mut v: Vec<f64> = (0..dim)
                        .map(|_| {
                            // Box-Muller pair, first component.
                            let u1: f64 = rng.gen_range(1e-12..1.0);
                            let u2: f64 = rng.gen_range(0.0..1.0);
                            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                        })
                        .collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                    v.iter_mut().for_each(|x| *x /= norm);
                    v
                })
                .collect()
        }
    }
}

/// Result of comparing the `n`-th convolution power against its attractor
/// `fhat(xi0)^n exp(-i x . xi0) H_P^n(x - n alpha)` over a window.
#[derive(Debug, Clone)]
pub struct LltReport {
    pub n: u32,
    pub window_min: Vec<i64>,
    pub window_max: Vec<i64>,
    pub sup_residual: f64,
    /// `n^{mu_phi} sup_residual`, the quantity the comparison bounds.
    pub sup_residual_scaled: f64,
    pub residual_argmax: Vec<i64>,
    pub attractor_at_origin: Complex64,
    /// `n^{mu_phi} |attractor(0)|`, the scale against which the residual is
    /// judged.
    pub attractor_origin_scaled: f64,
    pub conv_supnorm: f64,
    pub kernel_est_error: f64,
    /// Whether the kernel window came from the rescaled large-time
    /// representation (pointwise quadrature otherwise).
    pub rescaled_window_path: bool,
}

/// Compare the `n`-th convolution power of `f` against its heat-kernel
/// attractor on a lattice window.
///
/// The power is computed by the DFT method with alias control.  `window` is
/// an inclusive `(min, max)` box per axis; by default the box where the
/// power exceeds `1e-3` of its sup norm is extended by 25% of its width per
/// side, repeatedly if necessary, until at most `1e-6` of the l1 norm lies
/// outside.  A user window that clips more than that is an error.
pub fn llt_compare(
    f: &LatticeFunction,
    spec: &LltSpec,
    n: u32,
    qspec: &QuadratureSpec,
    window: Option<(&[i64], &[i64])>,
) -> Result<LltReport> {
    let w = llt_window_eval(f, spec, n, qspec, window)?;
    let cells = w.kernel_vals.len();

    let mut sup_residual = 0.0f64;
    let mut argmax = w.wmin.clone();
    for idx in 0..cells {
        let x = decode_index(idx, &w.dims, &w.wmin);
        let r = (w.conv.get(&x) - w.attractor(idx, &x, spec.xi0())).norm();
        if r > sup_residual {
            sup_residual = r;
            argmax = x;
        }
    }

    let dim = f.dim();
    let t = n as f64;
    let mut kernel_est_error = w.kernel_est_error;
    let attractor_at_origin = if (0..dim).all(|d| w.wmin[d] <= 0 && 0 <= w.wmax[d]) {
        let mut idx = 0usize;
        for d in 0..dim {
            idx = idx * w.dims[d] + (-w.wmin[d]) as usize;
        }
        w.c * w.kernel_vals[idx]
    } else {
        let p = spec.decomp().assemble_symbol()?;
        let y: Vec<f64> = spec.alpha().iter().map(|al| -t * al).collect();
        let s = kernel_eval(&p, t, &y, qspec)?;
        kernel_est_error = kernel_est_error.max(s.est_error);
        w.c * s.value
    };

    let scale = t.powf(spec.mu_phi());
    Ok(LltReport {
        n,
        window_min: w.wmin,
        window_max: w.wmax,
        sup_residual,
        sup_residual_scaled: scale * sup_residual,
        residual_argmax: argmax,
        attractor_at_origin,
        attractor_origin_scaled: scale * attractor_at_origin.norm(),
        conv_supnorm: w.conv_supnorm,
        kernel_est_error,
        rescaled_window_path: w.rescaled_path,
    })
}

/// Pointwise window dump of a convolution power against its attractor, in
/// row-major order over the same window `llt_compare` uses; intended for
/// figure-reproduction CSV output.
#[derive(Debug, Clone)]
pub struct LltGrid {
    pub n: u32,
    pub window_min: Vec<i64>,
    pub window_max: Vec<i64>,
    pub points: Vec<Vec<i64>>,
    pub conv_values: Vec<Complex64>,
    pub attractor_values: Vec<Complex64>,
    pub kernel_est_error: f64,
    pub rescaled_window_path: bool,
}

/// Evaluate both sides of the local limit comparison on every lattice point
/// of the window.  Same preconditions and window rules as `llt_compare`.
pub fn llt_grid(
    f: &LatticeFunction,
    spec: &LltSpec,
    n: u32,
    qspec: &QuadratureSpec,
    window: Option<(&[i64], &[i64])>,
) -> Result<LltGrid> {
    let w = llt_window_eval(f, spec, n, qspec, window)?;
    let cells = w.kernel_vals.len();
    let mut points = Vec::with_capacity(cells);
    let mut conv_values = Vec::with_capacity(cells);
    let mut attractor_values = Vec::with_capacity(cells);
    for idx in 0..cells {
        let x = decode_index(idx, &w.dims, &w.wmin);
        conv_values.push(w.conv.get(&x));
        attractor_values.push(w.attractor(idx, &x, spec.xi0()));
        points.push(x);
    }
    Ok(LltGrid {
        n,
        window_min: w.wmin,
        window_max: w.wmax,
        points,
        conv_values,
        attractor_values,
        kernel_est_error: w.kernel_est_error,
        rescaled_window_path: w.rescaled_path,
    })
}

struct LltWindowEval {
    wmin: Vec<i64>,
    wmax: Vec<i64>,
    dims: Vec<usize>,
    conv: LatticeFunction,
    conv_supnorm: f64,
    c: Complex64,
    kernel_vals: Vec<Complex64>,
    kernel_est_error: f64,
    rescaled_path: bool,
}

impl LltWindowEval {
    fn attractor(&self, idx: usize, x: &[i64], xi0: &[f64]) -> Complex64 {
        let phase: f64 = x.iter().zip(xi0).map(|(a, b)| *a as f64 * b).sum();
        self.c * Complex64::from_polar(1.0, -phase) * self.kernel_vals[idx]
    }
}

fn llt_window_eval(
    f: &LatticeFunction,
    spec: &LltSpec,
    n: u32,
    qspec: &QuadratureSpec,
    window: Option<(&[i64], &[i64])>,
) -> Result<LltWindowEval> {
    let dim = f.dim();
    if dim != spec.decomp().dim() {
        return Err(Error::DimensionMismatch(format!(
            "lattice function of dim {dim} against a symbol in dim {}",
            spec.decomp().dim()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("comparison needs n >= 1".into()));
    }
    let resid = expansion_residual(f, spec, LLT_RESIDUAL_RADIUS)?;
    if !resid.pass {
        return Err(Error::InvalidInput(format!(
            "expansion residual does not vanish against the symbol \
             (shell ratios {:.3} -> {:.3}); the attractor comparison is meaningless",
            resid.shells[0].max_ratio, resid.shells[5].max_ratio
        )));
    }

    let conv = f.conv_power(
        n,
        ConvMethod::Dft {
            grid: default_dft_grid(f),
        },
    )?;
    let sup = conv.supnorm();
    let l1 = conv.l1_norm();

    let (wmin, wmax) = match window {
        Some((lo, hi)) => {
            if lo.len() != dim || hi.len() != dim || lo.iter().zip(hi).any(|(a, b)| a > b) {
                return Err(Error::InvalidInput(format!(
                    "window {lo:?} .. {hi:?} is not a box in dim {dim}"
                )));
            }
            let outside = l1 - mass_inside(&conv, lo, hi);
            if outside > WINDOW_CLIP_REL * l1 {
                return Err(Error::WindowClipped(format!(
                    "window {lo:?} .. {hi:?} leaves {:.3e} of the l1 norm {l1:.3e} outside \
                     (allowed {:.1e} relative)",
                    outside, WINDOW_CLIP_REL
                )));
            }
            (lo.to_vec(), hi.to_vec())
        }
        None => default_window(&conv, sup, l1)?,
    };

    // Attractor values H_P^n(x - n alpha) over the window.
    let t = n as f64;
    let dims: Vec<usize> = (0..dim).map(|d| (wmax[d] - wmin[d] + 1) as usize).collect();
    let cells = checked_cells(&dims)?;
    let c = f.transform_at(spec.xi0()).powu(n);

    let (a, b) = spec.decomp().block_dims();
    let mut kernel_est_error: f64 = 0.0;
    let mut rescaled_path = false;
    // The symbol need not be even, so the kernel is complex off the origin.
    let kernel_vals: Vec<Complex64> = if dim == 2 && a == 1 && b == 1 {
        let us: Vec<f64> = (wmin[0]..=wmax[0])
            .map(|x| x as f64 - t * spec.alpha()[0])
            .collect();
        let vs: Vec<f64> = (wmin[1]..=wmax[1])
            .map(|x| x as f64 - t * spec.alpha()[1])
            .collect();
        let win = kernel_window_rescaled_large(spec.decomp(), t, &us, &vs, qspec)?;
        kernel_est_error = win.est_error;
        rescaled_path = true;
        let mut vals = Vec::with_capacity(cells);
        for row in &win.values {
            vals.extend_from_slice(row);
        }
        vals
    } else {
        let p = spec.decomp().assemble_symbol()?;
        let mut vals = Vec::with_capacity(cells);
        for idx in 0..cells {
            let x = decode_index(idx, &dims, &wmin);
            let y: Vec<f64> = x
                .iter()
                .zip(spec.alpha())
                .map(|(xi, al)| *xi as f64 - t * al)
                .collect();
            let s = kernel_eval(&p, t, &y, qspec)?;
            kernel_est_error = kernel_est_error.max(s.est_error);
            vals.push(s.value);
        }
        vals
    };

    Ok(LltWindowEval {
        wmin,
        wmax,
        dims,
        conv,
        conv_supnorm: sup,
        c,
        kernel_vals,
        kernel_est_error,
        rescaled_path,
    })
}

fn default_dft_grid(f: &LatticeFunction) -> usize {
    let width = f
        .support_box()
        .map(|(lo, hi)| {
            (0..f.dim())
                .map(|d| (hi[d] - lo[d] + 1) as usize)
                .max()
                .unwrap_or(1)
        })
        .unwrap_or(1);
    width.next_power_of_two().max(64)
}

fn mass_inside(f: &LatticeFunction, lo: &[i64], hi: &[i64]) -> f64 {
    let mut acc = Accumulator::new();
    for (x, v) in f.entries() {
        if x.iter()
            .enumerate()
            .all(|(d, c)| lo[d] <= *c && *c <= hi[d])
        {
            acc.add(v.norm());
        }
    }
    acc.total()
}

/// Core box of `|f| >= WINDOW_CORE_REL * sup`, extended by 25% of the core
/// width per side (repeatedly, up to 8 times) until the clip rule holds.
fn default_window(conv: &LatticeFunction, sup: f64, l1: f64) -> Result<(Vec<i64>, Vec<i64>)> {
    let dim = conv.dim();
    let floor = WINDOW_CORE_REL * sup;
    let mut lo = vec![i64::MAX; dim];
    let mut hi = vec![i64::MIN; dim];
    for (x, v) in conv.entries() {
        if v.norm() >= floor {
            for d in 0..dim {
                lo[d] = lo[d].min(x[d]);
                hi[d] = hi[d].max(x[d]);
            }
        }
    }
    if lo.iter().any(|v| *v == i64::MAX) {
        return Err(Error::Degenerate(
            "convolution power has no entries above the core level".into(),
        ));
    }
    let pad: Vec<i64> = (0..dim)
        .map(|d| (((hi[d] - lo[d] + 1) as f64 * 0.25).ceil() as i64).max(1))
        .collect();
    for k in 1..=8 {
        let wlo: Vec<i64> = (0..dim).map(|d| lo[d] - k * pad[d]).collect();
        let whi: Vec<i64> = (0..dim).map(|d| hi[d] + k * pad[d]).collect();
        let outside = l1 - mass_inside(conv, &wlo, &whi);
        if outside <= WINDOW_CLIP_REL * l1 {
            return Ok((wlo, whi));
        }
    }
    Err(Error::WindowClipped(
        "default window still clips more than 1e-6 of the l1 norm after 8 extensions".into(),
    ))
}

/// One point of the decay curve `n -> n^mu ||f^(n)||_inf`.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub n: u32,
    pub supnorm: f64,
    pub scaled: f64,
}

/// Sup norms of convolution powers along `n_list` (strictly increasing),
/// scaled by `n^mu`.
pub fn supnorm_curve(f: &LatticeFunction, n_list: &[u32], mu: f64) -> Result<Vec<CurvePoint>> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::InvalidInput(
            "power list must be strictly increasing and positive".into(),
        ));
    }
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::InvalidInput(format!(
            "scaling exponent must be finite and non-negative, got {mu}"
        )));
    }
    let grid = default_dft_grid(f);
    n_list
        .iter()
        .map(|&n| {
            let p = f.conv_power(n, ConvMethod::Dft { grid })?;
            let supnorm = p.supnorm();
            Ok(CurvePoint {
                n,
                supnorm,
                scaled: (n as f64).powf(mu) * supnorm,
            })
        })
        .collect()
}

// Exact builtin tables: (x1, x2, re, im) numerators over the common
// denominator.
const PHI_DEN: i64 = 92160000;
#[rustfmt::skip]
const PHI_TERMS: &[(i64, i64, i64, i64)] = &[
    (-4, 0, -76512, 0),
    (-3, -2, 0, -9024),
    (-3, 0, 144000, 18048),
    (-3, 2, 0, -9024),
    (-2, -4, -432, 0),
    (-2, -2, 1728, 0),
    (-2, 0, -330144, 0),
    (-2, 2, 1728, 0),
    (-2, 4, -432, 0),
    (-1, -6, 0, 616),
    (-1, -4, 0, -8496),
    (-1, -2, 0, 55512),
    (-1, -1, 0, 921600),
    (-1, 0, 2160000, -1938464),
    (-1, 1, 0, 921600),
    (-1, 2, 0, 55512),
    (-1, 4, 0, -8496),
    (-1, 6, 0, 616),
    (0, -8, -537, 0),
    (0, -6, 6696, 0),
    (0, -4, -28572, 0),
    (0, -2, -858984, 0),
    (0, -1, 3686400, 0),
    (0, 0, 82750122, 0),
    (0, 1, 3686400, 0),
    (0, 2, -858984, 0),
    (0, 4, -28572, 0),
    (0, 6, 6696, 0),
    (0, 8, -537, 0),
    (1, -6, 0, -616),
    (1, -4, 0, 8496),
    (1, -2, 0, -55512),
    (1, -1, 0, -921600),
    (1, 0, 2160000, 1938464),
    (1, 1, 0, -921600),
    (1, 2, 0, -55512),
    (1, 4, 0, 8496),
    (1, 6, 0, -616),
    (2, -4, -432, 0),
    (2, -2, 1728, 0),
    (2, 0, -330144, 0),
    (2, 2, 1728, 0),
    (2, 4, -432, 0),
    (3, -2, 0, 9024),
    (3, 0, 144000, -18048),
    (3, 2, 0, 9024),
    (4, 0, -76512, 0),
];

const PSI_DEN: i64 = 960000;
#[rustfmt::skip]
const PSI_TERMS: &[(i64, i64, i64, i64)] = &[
    (-4, 0, -797, 0),
    (-3, 0, 1500, 0),
    (-2, 0, -3412, 0),
    (-1, -1, 0, 9600),
    (-1, 0, 22500, -19200),
    (-1, 1, 0, 9600),
    (0, -6, 25, 0),
    (0, -4, -150, 0),
    (0, -2, -9225, 0),
    (0, -1, 38400, 0),
    (0, 0, 862318, 0),
    (0, 1, 38400, 0),
    (0, 2, -9225, 0),
    (0, 4, -150, 0),
    (0, 6, 25, 0),
    (1, -1, 0, -9600),
    (1, 0, 22500, 19200),
    (1, 1, 0, -9600),
    (2, 0, -3412, 0),
    (3, 0, 1500, 0),
    (4, 0, -797, 0),
];

fn table_function(den: i64, terms: &[(i64, i64, i64, i64)]) -> Result<LatticeFunction> {
    let d = BigInt::from(den);
    LatticeFunction::from_rational_entries(
        2,
        terms.iter().map(|(x1, x2, re, im)| {
            (
                vec![*x1, *x2],
                BigRational::new(BigInt::from(*re), d.clone()),
                BigRational::new(BigInt::from(*im), d.clone()),
            )
        }),
    )
}
