//! Trapdoor key schedule.
//!
//! The private side is a "level-f" superincreasing vector: every element
//! exceeds (2^f - 1) times the sum of all elements before it, so a target sum
//! decomposes into f-bit digits by one greedy pass. Modular multiplication by
//! w (coprime to m) disguises it as the public vector; the modulus is chosen
//! above (2^f - 1) times the vector sum so no block sum ever wraps.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::params::DigitParams;

/// Slack used by [`keygen`]; see [`gen_superincreasing`] for what slack does.
pub const DEFAULT_SLACK: u32 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KeygenError {
    #[error("no modular inverse: arguments share the factor {gcd}")]
    NotCoprime { gcd: BigUint },
    #[error("easy vector breaks the level bound at element {0}")]
    LevelViolation(usize),
    #[error("modulus {modulus} does not clear the wraparound bound {bound}")]
    ModulusTooSmall { modulus: BigUint, bound: BigUint },
    #[error("multiplier pair is inconsistent: w*w_inv != 1 (mod m)")]
    BadMultiplierPair,
}

/// Verdict of the level check. `InvalidAt(i)` names the first element (1-based)
/// with a_i <= (2^f - 1) * (a_1 + ... + a_{i-1}).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelVerdict {
    Valid,
    InvalidAt(usize),
}

impl LevelVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, LevelVerdict::Valid)
    }
}

/// Checks a_i > (2^f - 1) * sum(a_1..a_{i-1}) for every i, reporting the first
/// offender instead of failing. With f = 1 this is the plain superincreasing
/// condition.
pub fn validate_level(elements: &[BigUint], digit_bits: u32) -> LevelVerdict {
    let level = (BigUint::one() << digit_bits) - 1u32;
    let mut prefix = BigUint::zero();
    for (i, a) in elements.iter().enumerate() {
        // strict: a = level * prefix is already ambiguous for greedy decoding
        if *a <= &level * &prefix {
            return LevelVerdict::InvalidAt(i + 1);
        }
        prefix += a;
    }
    LevelVerdict::Valid
}

/// Private superincreasing vector together with its digit width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperincreasingVector {
    pub elements: Vec<BigUint>,
    pub digit_bits: u32,
}

impl SuperincreasingVector {
    pub fn new(elements: Vec<BigUint>, digit_bits: u32) -> Result<Self, KeygenError> {
        match validate_level(&elements, digit_bits) {
            LevelVerdict::Valid => Ok(SuperincreasingVector { elements, digit_bits }),
            LevelVerdict::InvalidAt(i) => Err(KeygenError::LevelViolation(i)),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Level bound multiplier 2^f - 1 (also the largest digit).
    pub fn level(&self) -> BigUint {
        (BigUint::one() << self.digit_bits) - 1u32
    }

    pub fn sum(&self) -> BigUint {
        self.elements.iter().sum()
    }

    /// Largest decodable value: (2^f - 1) * sum of all elements.
    pub fn max_weighted_sum(&self) -> BigUint {
        self.level() * self.sum()
    }

    pub fn params(&self) -> DigitParams {
        DigitParams { digit_bits: self.digit_bits, n_elems: self.elements.len() }
    }
}

/// Builds a level-f superincreasing vector of `params.n_elems` elements.
///
/// `slack = 0` is the deterministic minimum-growth recurrence a_1 = 1,
/// a_i = (2^f - 1) * S_{i-1} + 1, which works out to a_i = 2^(f*(i-1)) — the
/// plain radix-2^f weights. Positive slack adds a random increment drawn from
/// [0, slack * (2^f - 1) * S_{i-1}] on top, so elements keep the same bit
/// growth order but stop being powers.
pub fn gen_superincreasing<R: Rng>(
    rng: &mut R,
    params: DigitParams,
    slack: u32,
) -> SuperincreasingVector {
    let level = BigUint::from(params.digit_max());
    let mut elements = Vec::with_capacity(params.n_elems);
    let mut prefix = BigUint::zero();
    for _ in 0..params.n_elems {
        let mut a = &level * &prefix + 1u32;
        if slack > 0 {
            let span = &level * &prefix * slack;
            if !span.is_zero() {
                a += rng.gen_biguint_below(&(span + 1u32));
            }
        }
        prefix += &a;
        elements.push(a);
    }
    SuperincreasingVector { elements, digit_bits: params.digit_bits }
}

/// Draws the modulus uniformly from (B, 2B] where B = (2^f - 1) * sum(easy).
///
/// Keeping m above B means no weighted block sum can reach m, so decryption
/// never wraps. The result is clamped to at least 3 — only reachable for the
/// one-element f = 1 vector (1), whose range (1, 2] leaves no room for a
/// multiplier strictly between 1 and m.
pub fn choose_modulus<R: Rng>(rng: &mut R, easy: &SuperincreasingVector) -> BigUint {
    let bound = easy.max_weighted_sum();
    let m = &bound + 1u32 + rng.gen_biguint_below(&bound);
    if m < BigUint::from(3u32) {
        BigUint::from(3u32)
    } else {
        m
    }
}

/// Rejection-samples w uniformly from 1 < w < m with gcd(w, m) = 1.
/// m - 1 is always coprime to m, so the loop terminates.
pub fn choose_multiplier<R: Rng>(rng: &mut R, modulus: &BigUint) -> BigUint {
    debug_assert!(*modulus >= BigUint::from(3u32));
    let two = BigUint::from(2u32);
    loop {
        let w = rng.gen_biguint_range(&two, modulus);
        if w.gcd(modulus).is_one() {
            return w;
        }
    }
}

/// w^-1 mod m via the extended Euclidean algorithm, normalized into [1, m).
pub fn mod_inverse(w: &BigUint, modulus: &BigUint) -> Result<BigUint, KeygenError> {
    let e = BigInt::from(w.clone()).extended_gcd(&BigInt::from(modulus.clone()));
    if !e.gcd.is_one() {
        return Err(KeygenError::NotCoprime { gcd: e.gcd.to_biguint().expect("gcd of naturals") });
    }
    let m = BigInt::from(modulus.clone());
    let x = e.x.mod_floor(&m);
    Ok(x.to_biguint().expect("mod_floor result is non-negative"))
}

/// Disguises the easy vector: a_i = (w * a'_i) mod m.
pub fn derive_public(easy: &SuperincreasingVector, w: &BigUint, modulus: &BigUint) -> Vec<BigUint> {
    easy.elements.iter().map(|a| w * a % modulus).collect()
}

/// Private trapdoor: the easy vector plus the modular disguise (m, w, w^-1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey {
    pub easy: SuperincreasingVector,
    pub modulus: BigUint,
    pub multiplier: BigUint,
    pub multiplier_inv: BigUint,
}

impl PrivateKey {
    pub fn params(&self) -> DigitParams {
        self.easy.params()
    }

    /// Checks every structural property a usable trapdoor needs: the level
    /// bound, the wraparound headroom of m, and w * w_inv = 1 (mod m).
    pub fn validate(&self) -> Result<(), KeygenError> {
        if let LevelVerdict::InvalidAt(i) = validate_level(&self.easy.elements, self.easy.digit_bits)
        {
            return Err(KeygenError::LevelViolation(i));
        }
        let bound = self.easy.max_weighted_sum();
        if self.modulus <= bound {
            return Err(KeygenError::ModulusTooSmall { modulus: self.modulus.clone(), bound });
        }
        if (&self.multiplier * &self.multiplier_inv % &self.modulus) != BigUint::one() {
            return Err(KeygenError::BadMultiplierPair);
        }
        Ok(())
    }
}

/// What an eavesdropper sees: the disguised vector and the block geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub hard: Vec<BigUint>,
    pub digit_bits: u32,
}

impl PublicKey {
    pub fn from_elements(hard: Vec<BigUint>, digit_bits: u32) -> Self {
        PublicKey { hard, digit_bits }
    }

    pub fn params(&self) -> DigitParams {
        DigitParams { digit_bits: self.digit_bits, n_elems: self.hard.len() }
    }
}

/// Full key schedule with the default slack. One seed drives every draw, so a
/// (params, seed) pair always reproduces the same key pair.
pub fn keygen(params: DigitParams, seed: u64) -> (PrivateKey, PublicKey) {
    keygen_with_slack(params, seed, DEFAULT_SLACK)
}

pub fn keygen_with_slack(params: DigitParams, seed: u64, slack: u32) -> (PrivateKey, PublicKey) {
    let mut rng = StdRng::seed_from_u64(seed);
    let easy = gen_superincreasing(&mut rng, params, slack);
    let modulus = choose_modulus(&mut rng, &easy);
    let multiplier = choose_multiplier(&mut rng, &modulus);
    let multiplier_inv = mod_inverse(&multiplier, &modulus).expect("w sampled coprime to m");
    let hard = derive_public(&easy, &multiplier, &modulus);
    let digit_bits = params.digit_bits;
    (
        PrivateKey { easy, modulus, multiplier, multiplier_inv },
        PublicKey { hard, digit_bits },
    )
}

/// Bit length of the largest element a slack-0 vector reaches: f*(N-1) + 1,
/// since the minimum-growth recurrence lands exactly on powers of 2^f.
pub fn min_growth_top_bits(params: DigitParams) -> u64 {
    params.digit_bits as u64 * (params.n_elems as u64 - 1) + 1
}
