//! Block geometry shared by every stage: N knapsack elements, f-bit digits.

use thiserror::Error;

/// Digits are stored in `u64`; 32 bits of digit already puts the alphabet far
/// beyond anything an enumeration stage could visit.
pub const MAX_DIGIT_BITS: u32 = 32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamsError {
    #[error("digit width must be 1..={MAX_DIGIT_BITS} bits, got {0}")]
    DigitBitsOutOfRange(u32),
    #[error("element count must be at least 1")]
    NoElements,
    #[error("digit width {digit_bits} does not divide message length {message_bits}")]
    NonDividing { digit_bits: u32, message_bits: u64 },
}

/// Geometry of one cipher block: `n_elems` elements (N), each weighted by a
/// digit of `digit_bits` bits (f). The block carries n = f*N message bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DigitParams {
    pub digit_bits: u32,
    pub n_elems: usize,
}

impl DigitParams {
    pub fn new(digit_bits: u32, n_elems: usize) -> Result<Self, ParamsError> {
        if digit_bits == 0 || digit_bits > MAX_DIGIT_BITS {
            return Err(ParamsError::DigitBitsOutOfRange(digit_bits));
        }
        if n_elems == 0 {
            return Err(ParamsError::NoElements);
        }
        Ok(DigitParams { digit_bits, n_elems })
    }

    /// Geometry for an n-bit message at digit width f; f must divide n.
    pub fn from_message_bits(digit_bits: u32, message_bits: u64) -> Result<Self, ParamsError> {
        if digit_bits == 0 || digit_bits > MAX_DIGIT_BITS {
            return Err(ParamsError::DigitBitsOutOfRange(digit_bits));
        }
        if message_bits == 0 || message_bits % digit_bits as u64 != 0 {
            return Err(ParamsError::NonDividing { digit_bits, message_bits });
        }
        Ok(DigitParams {
            digit_bits,
            n_elems: (message_bits / digit_bits as u64) as usize,
        })
    }

    /// Message bits per block: n = f*N.
    pub fn message_bits(&self) -> u64 {
        self.digit_bits as u64 * self.n_elems as u64
    }

    /// Largest digit value, 2^f - 1. Doubles as the level bound multiplier.
    pub fn digit_max(&self) -> u64 {
        (1u64 << self.digit_bits) - 1
    }

    /// Alphabet size 2^f.
    pub fn alphabet_size(&self) -> u64 {
        1u64 << self.digit_bits
    }
}
