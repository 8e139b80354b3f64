//! Time-tagged qubit registers, the Turnstile entanglement swap, entropy
//! functionals, temporal Petz recovery and entropy-based DDoS detection for
//! a quantum repeater.
//!
//! ```
//! use turnstile_core::bell::BellIndex;
//! use turnstile_core::petz::{predetect, Scenario};
//! use turnstile_core::turnstile::{invert, OutcomeSelector};
//!
//! let rec = invert(BellIndex::B01, 0, OutcomeSelector::Seeded(3))?;
//! assert!((rec.fidelity() - 1.0).abs() < 1e-9);
//! assert!(predetect(Scenario::FutureAttack)?.attack_in_future);
//! # Ok::<(), turnstile_core::Error>(())
//! ```

pub mod bell;
pub mod config;
pub mod entropy;
pub mod error;
pub mod netsim;
pub mod petz;
pub mod qmath;
pub mod turnstile;
pub mod verify;

pub use error::{Error, Result};

// The guide's snippets run as doc-tests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/registers.md")]
    mod registers {}
    #[doc = include_str!("../../../book/src/entropy.md")]
    mod entropy {}
    #[doc = include_str!("../../../book/src/turnstile.md")]
    mod turnstile {}
    #[doc = include_str!("../../../book/src/petz.md")]
    mod petz {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
