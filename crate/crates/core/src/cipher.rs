//! Block cipher over the knapsack: pack bits into f-bit digits, weight the
//! public vector, and undo it all with the trapdoor.
//!
//! Encryption is the plain integer sum b = sum(a_i * x_i). Decryption maps b
//! back through b' = w^-1 * b mod m; because m clears the wraparound bound,
//! b' equals the weighted sum over the easy vector and one greedy pass peels
//! the digits off from the top element down.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::keygen::{PrivateKey, PublicKey, SuperincreasingVector};
use crate::params::{DigitParams, ParamsError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CipherError {
    #[error("bit string length {len} is not a multiple of the digit width {digit_bits}")]
    RaggedBits { len: usize, digit_bits: u32 },
    #[error("message bits must be '0' or '1', found {0:?}")]
    BadBitChar(char),
    #[error("bad geometry: {0}")]
    BadGeometry(#[from] ParamsError),
    #[error("block geometry (f={block_bits}, N={block_len}) does not match key (f={key_bits}, N={key_len})")]
    GeometryMismatch { block_bits: u32, block_len: usize, key_bits: u32, key_len: usize },
    #[error("digit {digit} at element {index} exceeds the alphabet maximum {max}")]
    DigitOverflow { index: usize, digit: u64, max: u64 },
    #[error("value {value} exceeds the decodable maximum {max}")]
    OutOfRange { value: BigUint, max: BigUint },
    #[error("residue {0} left after the greedy pass; not a weighted sum of this vector")]
    Residue(BigUint),
    #[error("envelope declares {declared} bits but carries {capacity}")]
    BadEnvelope { declared: u64, capacity: u64 },
}

/// One plaintext block: N digits, most significant element last (digit i
/// weights element a_i).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageBlock {
    pub digits: Vec<u64>,
    pub digit_bits: u32,
}

impl MessageBlock {
    pub fn new(digits: Vec<u64>, digit_bits: u32) -> Result<Self, CipherError> {
        let params = DigitParams::new(digit_bits, digits.len())?;
        for (i, &d) in digits.iter().enumerate() {
            if d > params.digit_max() {
                return Err(CipherError::DigitOverflow {
                    index: i + 1,
                    digit: d,
                    max: params.digit_max(),
                });
            }
        }
        Ok(MessageBlock { digits, digit_bits })
    }

    pub fn params(&self) -> DigitParams {
        DigitParams { digit_bits: self.digit_bits, n_elems: self.digits.len() }
    }
}

/// Block sum b = sum(a_i * x_i); an integer, not a residue.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ciphertext(pub BigUint);

/// Splits a bit string into f-bit groups, most significant bit first:
/// "100011" at f = 2 reads as digits (2, 0, 3).
pub fn pack(bits: &str, digit_bits: u32) -> Result<MessageBlock, CipherError> {
    if let Some(bad) = bits.chars().find(|c| *c != '0' && *c != '1') {
        return Err(CipherError::BadBitChar(bad));
    }
    if bits.is_empty() || bits.len() % digit_bits as usize != 0 {
        return Err(CipherError::RaggedBits { len: bits.len(), digit_bits });
    }
    let _ = DigitParams::new(digit_bits, bits.len() / digit_bits as usize)?;
    let digits = bits
        .as_bytes()
        .chunks(digit_bits as usize)
        .map(|group| group.iter().fold(0u64, |acc, b| (acc << 1) | (b - b'0') as u64))
        .collect();
    Ok(MessageBlock { digits, digit_bits })
}

/// Inverse of [`pack`]: digits back to the bit string.
pub fn unpack(block: &MessageBlock) -> String {
    let f = block.digit_bits;
    let mut bits = String::with_capacity(block.digits.len() * f as usize);
    for &d in &block.digits {
        for shift in (0..f).rev() {
            bits.push(if (d >> shift) & 1 == 1 { '1' } else { '0' });
        }
    }
    bits
}

/// b = sum(a_i * x_i) over the integers.
pub fn encrypt(key: &PublicKey, block: &MessageBlock) -> Result<Ciphertext, CipherError> {
    if key.params() != block.params() {
        return Err(CipherError::GeometryMismatch {
            block_bits: block.digit_bits,
            block_len: block.digits.len(),
            key_bits: key.digit_bits,
            key_len: key.hard.len(),
        });
    }
    let sum = key
        .hard
        .iter()
        .zip(&block.digits)
        .map(|(a, &x)| a * x)
        .sum();
    Ok(Ciphertext(sum))
}

/// Untwists b into the easy domain and greedily decodes the digits.
pub fn decrypt(key: &PrivateKey, ciphertext: &Ciphertext) -> Result<MessageBlock, CipherError> {
    // b' = w^-1 * b mod m; wraparound-free by the modulus bound
    let b_easy = &key.multiplier_inv * &ciphertext.0 % &key.modulus;
    greedy_decode(&key.easy, &b_easy)
}

/// Peels digits off `target` from the top element down: x_i is the largest
/// digit with x_i * a_i still inside the remainder, capped at 2^f - 1. The
/// level bound makes this the unique digit decomposition when one exists.
pub fn greedy_decode(
    easy: &SuperincreasingVector,
    target: &BigUint,
) -> Result<MessageBlock, CipherError> {
    let max = easy.max_weighted_sum();
    if *target > max {
        return Err(CipherError::OutOfRange { value: target.clone(), max });
    }
    let digit_max = (1u64 << easy.digit_bits) - 1;
    let mut remainder = target.clone();
    let mut digits = vec![0u64; easy.len()];
    for (i, a) in easy.elements.iter().enumerate().rev() {
        let d = (&remainder / a).to_u64().map_or(digit_max, |q| q.min(digit_max));
        remainder -= a * d;
        digits[i] = d;
    }
    if !remainder.is_zero() {
        return Err(CipherError::Residue(remainder));
    }
    Ok(MessageBlock { digits, digit_bits: easy.digit_bits })
}

/// Ciphertext envelope for messages longer than one block: the original bit
/// count plus one block sum per n-bit slice (the last slice zero-padded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub orig_bits: u64,
    pub blocks: Vec<Ciphertext>,
}

/// Encrypts a bit string of any length, zero-padding the final block.
pub fn encrypt_message(key: &PublicKey, bits: &str) -> Result<Envelope, CipherError> {
    let n = key.params().message_bits() as usize;
    if n == 0 {
        return Err(CipherError::BadGeometry(ParamsError::NoElements));
    }
    if let Some(bad) = bits.chars().find(|c| *c != '0' && *c != '1') {
        return Err(CipherError::BadBitChar(bad));
    }
    let mut padded = bits.to_owned();
    while padded.len() % n != 0 {
        padded.push('0');
    }
    let blocks = padded
        .as_bytes()
        .chunks(n)
        .map(|slice| {
            let block = pack(std::str::from_utf8(slice).expect("ascii bits"), key.digit_bits)?;
            encrypt(key, &block)
        })
        .collect::<Result<_, _>>()?;
    Ok(Envelope { orig_bits: bits.len() as u64, blocks })
}

/// Inverse of [`encrypt_message`]: decrypts every block and trims the padding.
pub fn decrypt_message(key: &PrivateKey, envelope: &Envelope) -> Result<String, CipherError> {
    let n = key.params().message_bits();
    if n == 0 {
        return Err(CipherError::BadGeometry(ParamsError::NoElements));
    }
    let capacity = n * envelope.blocks.len() as u64;
    if envelope.orig_bits > capacity || (!envelope.blocks.is_empty() && capacity - envelope.orig_bits >= n) {
        return Err(CipherError::BadEnvelope { declared: envelope.orig_bits, capacity });
    }
    let mut bits = String::with_capacity(capacity as usize);
    for block in &envelope.blocks {
        bits.push_str(&unpack(&decrypt(key, block)?));
    }
    bits.truncate(envelope.orig_bits as usize);
    Ok(bits)
}
