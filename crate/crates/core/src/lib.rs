//! Numerical laboratory for heat kernels of inhomogeneous symbols and for
//! local limit behaviour of convolution powers on the integer lattice.
//!
//! The library is organised around a structured symbol
//!
//! ```text
//! P(eta, zeta) = P1(eta + Q(zeta)) + P2(eta)
//! ```
//!
//! where `P1`, `P2` are positive-definite polynomials on the first block of
//! variables and `Q` is a polynomial map from the second block into the
//! first.  Each piece comes with one-parameter scaling groups recorded as
//! matrix generators.  From this data the crate computes:
//!
//! * on-diagonal heat kernel values `H_P^t(0)` by adaptive tensor quadrature,
//!   in naive and rescaled representations, together with the two decay
//!   exponents and the limiting constants,
//! * subhomogeneity probes deciding whether a perturbation of the symbol is
//!   negligible under the small-time scaling group,
//! * convolution powers of finitely supported complex functions on `Z^d`,
//!   their Fourier transforms, and comparisons against the heat-kernel
//!   attractor predicted by the symbol.

pub mod decomp;
pub mod error;
pub mod kernel;
pub mod lattice;
pub mod numeric;
pub mod perturb;
pub mod poly;
pub mod quad;
pub mod scaling;

pub use decomp::{power_family, SymbolDecomposition, ValidationReport};
pub use error::{Error, Result};
pub use kernel::KernelSample;
pub use lattice::LatticeFunction;
pub use perturb::Perturbation;
pub use poly::{MultiIndex, PolyMap, PolySymbol};
pub use quad::QuadratureSpec;
pub use scaling::{ScalingMap, Verdict};
