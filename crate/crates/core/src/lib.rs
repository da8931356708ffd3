//! Kirkwood–Dirac quasi-probabilities for small pure-state systems.
//!
//! - [`qcore`]: state vectors, operators and orthonormal bases up to
//!   dimension [`qcore::MAX_DIM`].
//! - [`kdq`]: the joint quasi-probability `P(m, b | a)`, its marginals,
//!   action phases and the unitaries they generate.
//! - [`scenarios`]: Leggett–Garg, three-box, Cheshire cat, Hardy,
//!   Peres–Mermin and CHSH set-ups with self-checking reports.
//! - [`weaksim`]: a Gaussian pointer that reads the table out weakly.
//!
//! ```
//! use kdqlab_core::kdq::kd_joint;
//! use kdqlab_core::qcore::{OrthonormalBasis, StateVector};
//!
//! let a = StateVector::from_real(&[1.0, 1.0, 1.0])?;
//! let m = OrthonormalBasis::standard(3)?;
//! let b = OrthonormalBasis::fourier(3)?;
//! let kd = kd_joint(&a, &m, &b)?;
//! assert!((kd.post_selection_probability(0) - 1.0).abs() < 1e-12);
//! # Ok::<(), kdqlab_core::Error>(())
//! ```

pub mod kdq;
pub mod qcore;
pub mod scenarios;
pub mod weaksim;
mod error;

pub use error::{Error, Result};
pub use num_complex::Complex64;

// The guide's snippets run as doctests of this crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/kd.md")]
    mod kd {}
    #[doc = include_str!("../../../book/src/actions.md")]
    mod actions {}
    #[doc = include_str!("../../../book/src/paradoxes.md")]
    mod paradoxes {}
    #[doc = include_str!("../../../book/src/weak.md")]
    mod weak {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
