#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical laboratory for a-priori L∞ bounds of weighted degenerate
//! elliptic Dirichlet problems with data in Orlicz spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`young`]: the power-log Young functions `A(t) = t^p log(e+t)^q`,
//!   their inverses and (numeric and closed-form) conjugates.
//! * [`measure`]: discrete weighted domains, scalar fields, weighted
//!   integration and level-set measures.
//! * [`orlicz`]: Luxemburg norms, the Orlicz-Hölder pairing, indicator
//!   norms and norm-comparison chains.
//! * [`operator`]: finite-volume assembly and solution of
//!   `-div(Q ∇u) = f v`, Sobolev quotients and exponential integrability.
//! * [`degiorgi`]: level sequences, level-set ledgers, the τ₀ threshold,
//!   the induction verifier and the exponent triple.
//! * [`experiments`]: configurable scenarios and the command-line front end.

pub mod cli;
pub mod degiorgi;
pub mod error;
pub mod experiments;
pub mod measure;
pub mod operator;
pub mod orlicz;
pub mod roots;
pub mod young;

pub use error::{Error, Result};
pub use measure::{ScalarField, WeightSpec, WeightedDomain};
pub use young::YoungParams;
