//! Riemann-Liouville fractional calculus, Erdelyi-Kober operators, and the
//! scaling-symmetry reduction pipeline for the fractional KdV-Burgers
//! equation
//!
//! ```text
//!     D^p_{0,x2} u + u D^q_{0,x1} u + D^r_{0,x1} u = 0.
//! ```
//!
//! The crate is organized around two currencies:
//!
//! * exact generalized polynomials (finite sums of real-power terms), on
//!   which every fractional operator acts in closed form through Gamma
//!   ratios — the oracle class ([`fraccore`]);
//! * sampled grid functions, on which the same operators are approximated
//!   by product integration and Grunwald-Letnikov weights ([`frlnum`]).
//!
//! On top of these sit the Erdelyi-Kober operators ([`ekober`]), the
//! prolongation coefficients of scaling vector fields ([`prolong`]), the
//! fractional KdV-Burgers model with its scaling-symmetry derivation
//! ([`fkdvb`]), and the symmetry reduction to an Erdelyi-Kober ordinary
//! differential equation together with a collocation solver and an
//! a-posteriori verification pass ([`reduce`]).

pub mod ekober;
pub mod error;
pub mod fkdvb;
pub mod fraccore;
pub mod frlnum;
pub mod gamma;
pub mod io;
pub mod prolong;
pub mod quadrature;
pub mod reduce;

pub use error::{FracError, Result};
pub use fraccore::{
    Axis, BiTerm, BivariatePowerSum, GeneralizedPolynomial, GridFunction1D, GridFunction2D,
    PowerTerm, UniformGrid1D,
};
pub use frlnum::{FracOrder, SchemeKind};
