//! Quantum private information retrieval over GRS-coded storage with
//! `t`-collusion.
//!
//! The quantum channel is simulated at the level of symplectic cosets
//! ([`symplectic`], [`protocol`]) and cross-checked against a dense
//! state-vector simulation on tiny instances ([`oracle`]).

pub mod cli;
pub mod codes;
pub mod galois;
pub mod linalg;
pub mod oracle;
pub mod protocol;
pub mod symplectic;
pub mod verify;
