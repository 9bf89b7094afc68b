//! Workbench for the generalized Merkle-Hellman trapdoor knapsack cipher.
//!
//! The classic construction hides a superincreasing vector behind modular
//! multiplication and encrypts one bit per element. Here each element instead
//! carries an f-bit digit (0..=2^f-1, so "0/255" at f = 8), which shortens a
//! message of n bits to N = n/f elements without shrinking the search space:
//! an exhaustive attacker still faces (2^f)^N = 2^n assignments. The crate
//! provides the key schedule, the cipher itself, exhaustive and
//! meet-in-the-middle solvers with exact work accounting, an exact-rational
//! sawtooth scan that recovers alternative trapdoors from the public key, and
//! small benchmark helpers around the cost model.

pub mod bench;
pub mod cipher;
pub mod keygen;
pub mod params;
pub mod sawtooth;
pub mod solver;
pub mod wire;

pub use cipher::{Ciphertext, MessageBlock};
pub use keygen::{PrivateKey, PublicKey, SuperincreasingVector};
pub use params::DigitParams;
pub use solver::SolveReport;
