//! Numerical kernels for Markov-type inequalities on cuspidal planar domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`jacobi`] evaluates Jacobi polynomials, their asymptotics and `J_α`;
//! * [`domain`] describes normalised cuspidal graph domains and solves for `ε_n`;
//! * [`quad`] integrates `|P|^p` over those domains on graded meshes;
//! * [`markov`] computes Markov factors and fits growth exponents;
//! * [`construct`] builds a domain whose factors follow a prescribed sequence.
//!
//! ```
//! use mlab_core::domain::{CuspProfile, GraphDomain};
//!
//! let domain = GraphDomain::upper(CuspProfile::power(2.0)?)?;
//! let scale = domain.solve_epsilon_n(1)?;
//! assert!((scale.epsilon_n - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
//! # Ok::<(), mlab_core::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod construct;
pub mod domain;
mod error;
pub mod hermite;
pub mod jacobi;
pub mod markov;
pub mod poly;
pub mod quad;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/jacobi.md")]
    mod jacobi {}
    #[doc = include_str!("../../../book/src/domains.md")]
    mod domains {}
    #[doc = include_str!("../../../book/src/quadrature.md")]
    mod quadrature {}
    #[doc = include_str!("../../../book/src/markov-factors.md")]
    mod markov_factors {}
    #[doc = include_str!("../../../book/src/construction.md")]
    mod construction {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
