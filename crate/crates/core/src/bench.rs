//! Demo drivers: the search-cost equivalence table, the line-rate
//! transmission model, and key-size growth.
//!
//! The equivalence experiment is the headline: fix the message width n, vary
//! the digit width f over divisors of n, and count exhaustive-search leaves.
//! Every row reports exactly 2^n of them — grouping bits into wider digits
//! shrinks the vector but widens the per-element alphabet by the same factor,
//! so the eavesdropper's enumeration never gets cheaper.

use num_bigint::BigUint;
use num_rational::Ratio;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::time::Duration;
use thiserror::Error;

use crate::cipher::{decrypt, encrypt, MessageBlock};
use crate::keygen::{keygen, keygen_with_slack};
use crate::params::{DigitParams, ParamsError};
use crate::solver::{exhaustive_solve, search_space, Prune};

/// Widest message a full enumeration run will accept: 2^24 leaves is seconds
/// of work; doublings beyond that stop being a demo.
pub const ENUMERATION_GUARD_BITS: u64 = 24;

/// A 2500-bit message on a 300 bit/s line needs 2500/300 = 25/3 s — about
/// 8.33 s, a shade over, not under, the eight seconds sometimes quoted for
/// this setup. Eight seconds flat would move only 2400 bits.
pub const TRANSMISSION_NOTE: &str = "2500 bits at 300 bit/s takes 25/3 s (about 8.33 s), \
     slightly over eight seconds, not under";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error(transparent)]
    BadGeometry(#[from] ParamsError),
    #[error(
        "a {message_bits}-bit enumeration is over the 2^{ENUMERATION_GUARD_BITS} guard; \
         report the symbolic search space instead"
    )]
    OverGuard { message_bits: u64 },
}

/// One line of the equivalence table: a (f, N) geometry at fixed n = f*N,
/// with the exact leaf count of a prune-free exhaustive run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceRow {
    pub digit_bits: u32,
    pub n_elems: usize,
    pub message_bits: u64,
    pub leaves: BigUint,
    pub log2_leaves: u64,
    pub wall_time: Duration,
}

/// log2 of an exact power of two.
fn exact_log2(x: &BigUint) -> u64 {
    assert_eq!(x.count_ones(), 1, "not a power of two");
    x.bits() - 1
}

/// Runs the fixed-n, varying-f experiment: for each digit width, generate a
/// key, encrypt one random block, and exhaustively solve with pruning off.
/// Each row checks itself — the single recovered solution is the plaintext
/// and the leaf count equals the full search space. Rows come out ordered by
/// digit width ascending no matter how `f_list` was given.
pub fn equivalence_experiment(
    message_bits: u64,
    f_list: &[u32],
    seed: u64,
) -> Result<Vec<EquivalenceRow>, BenchError> {
    if message_bits > ENUMERATION_GUARD_BITS {
        return Err(BenchError::OverGuard { message_bits });
    }
    let mut widths = f_list.to_vec();
    widths.sort_unstable();
    let mut master = StdRng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(widths.len());
    for &digit_bits in &widths {
        let params = DigitParams::from_message_bits(digit_bits, message_bits)?;
        let (private, public) = keygen(params, master.gen());
        let digits: Vec<u64> =
            (0..params.n_elems).map(|_| master.gen_range(0..=params.digit_max())).collect();
        let block = MessageBlock::new(digits, digit_bits).expect("digits in range");
        let ciphertext = encrypt(&public, &block).expect("geometry matches");
        debug_assert_eq!(decrypt(&private, &ciphertext).expect("own key"), block);
        let report = exhaustive_solve(&public, &ciphertext, Prune::Off);
        assert_eq!(report.solutions, vec![block], "trapdoor encryption is injective");
        assert_eq!(report.leaves_visited, search_space(params), "prune-off visits every leaf");
        rows.push(EquivalenceRow {
            digit_bits,
            n_elems: params.n_elems,
            message_bits,
            log2_leaves: exact_log2(&report.leaves_visited),
            leaves: report.leaves_visited,
            wall_time: report.wall_time,
        });
    }
    Ok(rows)
}

/// Seconds to push `bits` through a line, exactly.
pub fn transmission_model(bits: u64, bits_per_second: u64) -> Ratio<u64> {
    assert!(bits_per_second > 0, "dead line");
    Ratio::new(bits, bits_per_second)
}

/// Total public-key size in bits for the tightest possible (slack 0) key of
/// this geometry. Each element carries about f*N bits, so the key costs
/// ~f*N^2 bits to publish while the message space it protects is only 2^(f*N):
/// the key is quadratically bigger than the blocks it encrypts.
pub fn keysize_estimate(params: DigitParams, seed: u64) -> u64 {
    let (_, public) = keygen_with_slack(params, seed, 0);
    public.hard.iter().map(|a| a.bits()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_digit_width_costs_the_same_leaves() {
        let rows = equivalence_experiment(12, &[1, 2, 3, 4, 6], 7).unwrap();
        assert_eq!(rows.len(), 5);
        for row in &rows {
            assert_eq!(row.leaves, BigUint::from(4096u32));
            assert_eq!(row.log2_leaves, 12);
            assert_eq!(row.n_elems, 12 / row.digit_bits as usize);
        }
    }

    #[test]
    fn rows_come_out_sorted_by_digit_width() {
        let rows = equivalence_experiment(12, &[6, 1, 4, 2], 7).unwrap();
        let widths: Vec<u32> = rows.iter().map(|r| r.digit_bits).collect();
        assert_eq!(widths, vec![1, 2, 4, 6]);
    }

    #[test]
    fn guard_refuses_walltime_scale_runs() {
        let err = equivalence_experiment(96, &[1], 7).unwrap_err();
        assert_eq!(err, BenchError::OverGuard { message_bits: 96 });
    }

    #[test]
    fn non_dividing_width_is_rejected() {
        let err = equivalence_experiment(16, &[3], 7).unwrap_err();
        assert!(matches!(
            err,
            BenchError::BadGeometry(ParamsError::NonDividing { digit_bits: 3, message_bits: 16 })
        ));
    }

    #[test]
    fn transmission_times_are_exact_ratios() {
        let full = transmission_model(20000, 300);
        assert_eq!(full, Ratio::new(200, 3));
        assert!(full > Ratio::from_integer(60), "20 kbit at 300 bit/s tops a minute");
        let grouped = transmission_model(2500, 300);
        assert_eq!(grouped, Ratio::new(25, 3));
        assert!(grouped > Ratio::from_integer(8), "over eight seconds, not under");
        assert_eq!(transmission_model(0, 300), Ratio::from_integer(0));
        assert!(TRANSMISSION_NOTE.contains("8.33"));
    }

    #[test]
    fn transmission_is_monotone_in_load_and_line_rate() {
        for bits in [1u64, 64, 2500, 20000] {
            assert!(transmission_model(bits, 300) < transmission_model(bits + 1, 300));
            assert!(transmission_model(bits, 600) < transmission_model(bits, 300));
        }
    }

    #[test]
    fn keysize_grows_quadratically_in_the_element_count() {
        // one element, one bit: the key is the single digit-sum bound
        let unit = keysize_estimate(DigitParams::new(1, 1).unwrap(), 11);
        assert!((1..=4).contains(&unit), "f=1 N=1 key of {unit} bits");
        let small = keysize_estimate(DigitParams::new(2, 3).unwrap(), 11);
        assert!((3..=21).contains(&small), "f=2 N=3 key of {small} bits");
        let mid = keysize_estimate(DigitParams::new(2, 6).unwrap(), 11);
        assert!(mid > 2 * small, "doubling N should far more than double the key");
        // the 96-bit-block regime at byte digits: ~96 elements of ~770 bits
        // against 12 elements of ~100 — a ~64x blow-up for an 8x longer vector
        let huge = keysize_estimate(DigitParams::new(8, 96).unwrap(), 11);
        let modest = keysize_estimate(DigitParams::new(8, 12).unwrap(), 11);
        assert!(huge > 30 * modest, "{huge} vs {modest} bits");
        assert!(huge > 60_000, "f=8 N=96 key of {huge} bits");
        // same story at single-bit digits
        let bitwise = keysize_estimate(DigitParams::new(1, 96).unwrap(), 11);
        assert!(bitwise > 30 * keysize_estimate(DigitParams::new(1, 12).unwrap(), 11));
        assert!(bitwise > 8000, "f=1 N=96 key of {bitwise} bits");
    }
}
