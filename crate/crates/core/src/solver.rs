//! Eavesdropper-side solvers with exact work accounting.
//!
//! The exhaustive search walks digit vectors in one canonical order — element
//! N first, digit values descending — so with pruning off it visits exactly
//! (2^f)^N leaves. That count is the point: at fixed n = f*N the tree has
//! 2^n leaves no matter how the bits are grouped into digits, which is why
//! widening the alphabet buys the attacker nothing. Work counters are kept
//! exact and reported as big integers so symbolic-scale calls cannot lie by
//! overflowing.

use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use std::thread;
use std::time::{Duration, Instant};
use thiserror::Error;

use crate::cipher::{Ciphertext, MessageBlock};
use crate::keygen::PublicKey;
use crate::params::DigitParams;

/// Cap on entries per half-enumeration table in [`mitm_solve`].
pub const DEFAULT_MITM_BUDGET: u64 = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("meet-in-the-middle would table {required} half-assignments, over the {budget} budget")]
    BudgetExceeded { required: BigUint, budget: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prune {
    On,
    Off,
}

/// Outcome of one solver run. `leaves_visited` counts complete assignments
/// reached; `nodes_expanded` counts internal nodes whose children were
/// scanned (the meet-in-the-middle solver expands no tree nodes and instead
/// reports enumerated half-assignments under `leaves_visited`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub solutions: Vec<MessageBlock>,
    pub leaves_visited: BigUint,
    pub nodes_expanded: BigUint,
    pub pruned: bool,
    pub wall_time: Duration,
}

struct Search<'a> {
    a: &'a [BigUint],
    target: &'a BigUint,
    digit_max: u64,
    digit_bits: u32,
    prune: bool,
    // need[pos] = max(target - (2^f - 1) * (a_1 + .. + a_pos), 0): the least
    // prefix sum at element pos+1 that elements 1..=pos can still lift to the
    // target. Index 0 is the leaf level, so need[0] = target.
    need: Vec<BigUint>,
}

#[derive(Default)]
struct Tally {
    leaves: u128,
    nodes: u128,
    solutions: Vec<MessageBlock>,
}

impl Search<'_> {
    /// Scans digits d_hi down to d_lo at element `pos` on top of prefix sum
    /// `partial`, recursing toward element 0.
    fn scan(
        &self,
        pos: usize,
        d_hi: u64,
        d_lo: u64,
        partial: &BigUint,
        digits: &mut [u64],
        out: &mut Tally,
    ) {
        let a = &self.a[pos];
        let mut d = d_hi;
        let mut child = partial + a * d;
        loop {
            if !self.prune || (child <= *self.target && child >= self.need[pos]) {
                digits[pos] = d;
                if pos == 0 {
                    out.leaves += 1;
                    if child == *self.target {
                        out.solutions.push(MessageBlock {
                            digits: digits.to_vec(),
                            digit_bits: self.digit_bits,
                        });
                    }
                } else {
                    out.nodes += 1;
                    self.scan(pos - 1, self.digit_max, 0, &child, digits, out);
                }
            } else if child < self.need[pos] {
                break; // digits only shrink from here; every one undershoots
            }
            if d == d_lo {
                break;
            }
            d -= 1;
            child -= a;
        }
    }
}

fn need_table(a: &[BigUint], target: &BigUint, digit_max: u64) -> Vec<BigUint> {
    let level = BigUint::from(digit_max);
    let mut reach = BigUint::zero();
    let mut need = Vec::with_capacity(a.len());
    for elem in a {
        need.push(if *target > reach { target - &reach } else { BigUint::zero() });
        reach += &level * elem;
    }
    need
}

/// Splits the top-level digit range 2^f-1..=0 into up to `workers` contiguous
/// descending spans (hi, lo), both ends inclusive.
fn digit_spans(digit_max: u64, workers: usize) -> Vec<(u64, u64)> {
    let alphabet = digit_max + 1;
    let w = (workers.max(1) as u64).min(alphabet);
    let base = alphabet / w;
    let extra = alphabet % w;
    let mut spans = Vec::with_capacity(w as usize);
    let mut hi = digit_max;
    for i in 0..w {
        let len = base + if i < extra { 1 } else { 0 };
        let lo = hi + 1 - len;
        spans.push((hi, lo));
        if lo == 0 {
            break;
        }
        hi = lo - 1;
    }
    spans
}

/// Depth-first enumeration of every digit vector, in canonical order.
pub fn exhaustive_solve(key: &PublicKey, ciphertext: &Ciphertext, prune: Prune) -> SolveReport {
    exhaustive_solve_parallel(key, ciphertext, prune, 1)
}

/// Same search with the top-level digit range split across `workers` threads.
/// Each worker owns disjoint subtrees and the merged report is identical —
/// solutions, order, and counters — to a single-worker run.
pub fn exhaustive_solve_parallel(
    key: &PublicKey,
    ciphertext: &Ciphertext,
    prune: Prune,
    workers: usize,
) -> SolveReport {
    let start = Instant::now();
    let params = key.params();
    let prune = matches!(prune, Prune::On);
    let n = key.hard.len();
    debug_assert!(key.hard.iter().all(|a| !a.is_zero()), "zero public elements");
    if n == 0 {
        // empty vector: one (empty) assignment, matching iff the target is 0
        let solutions = if ciphertext.0.is_zero() {
            vec![MessageBlock { digits: vec![], digit_bits: key.digit_bits }]
        } else {
            vec![]
        };
        return SolveReport {
            solutions,
            leaves_visited: BigUint::one(),
            nodes_expanded: BigUint::zero(),
            pruned: prune,
            wall_time: start.elapsed(),
        };
    }

    let search = Search {
        a: &key.hard,
        target: &ciphertext.0,
        digit_max: params.digit_max(),
        digit_bits: params.digit_bits,
        prune,
        need: need_table(&key.hard, &ciphertext.0, params.digit_max()),
    };
    let top = n - 1;
    let spans = digit_spans(params.digit_max(), workers);

    let run_span = |(hi, lo): (u64, u64)| {
        let mut out = Tally::default();
        let mut digits = vec![0u64; n];
        search.scan(top, hi, lo, &BigUint::zero(), &mut digits, &mut out);
        out
    };
    let tallies: Vec<Tally> = if spans.len() == 1 {
        vec![run_span(spans[0])]
    } else {
        let run_span = &run_span;
        thread::scope(|scope| {
            let handles: Vec<_> = spans
                .iter()
                .map(|&span| scope.spawn(move || run_span(span)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("solver worker")).collect()
        })
    };

    let mut solutions = Vec::new();
    let mut leaves: u128 = 0;
    let mut nodes: u128 = 1; // the root node is scanned exactly once overall
    for tally in tallies {
        leaves += tally.leaves;
        nodes += tally.nodes;
        solutions.extend(tally.solutions);
    }
    SolveReport {
        solutions,
        leaves_visited: BigUint::from(leaves),
        nodes_expanded: BigUint::from(nodes),
        pruned: prune,
        wall_time: start.elapsed(),
    }
}

/// All sums of digit assignments over `elems`, indexed by the mixed-radix
/// counter sum(d_i * alphabet^i) with element 0 least significant.
fn enumerate_half(elems: &[BigUint], alphabet: u64) -> Vec<BigUint> {
    let mut sums = vec![BigUint::zero()];
    for a in elems {
        let mut next = Vec::with_capacity(sums.len() * alphabet as usize);
        let mut step = BigUint::zero(); // d * a, grown incrementally
        for d in 0..alphabet {
            if d > 0 {
                step += a;
            }
            next.extend(sums.iter().map(|s| s + &step));
        }
        sums = next;
    }
    sums
}

fn digits_of_index(mut index: u64, alphabet: u64, len: usize) -> Vec<u64> {
    let mut digits = Vec::with_capacity(len);
    for _ in 0..len {
        digits.push(index % alphabet);
        index /= alphabet;
    }
    digits
}

/// Meet-in-the-middle with the default table budget.
pub fn mitm_solve(key: &PublicKey, ciphertext: &Ciphertext) -> Result<SolveReport, SolverError> {
    mitm_solve_with_budget(key, ciphertext, DEFAULT_MITM_BUDGET)
}

/// Splits the vector in half, tables every front-half sum, and scans the back
/// half against it. Finds exactly the solutions the exhaustive search finds,
/// in the same order, at the cost of (2^f)^(N/2) table entries — hence the
/// budget, which refuses instances whose larger half would blow the table.
pub fn mitm_solve_with_budget(
    key: &PublicKey,
    ciphertext: &Ciphertext,
    budget: u64,
) -> Result<SolveReport, SolverError> {
    let start = Instant::now();
    let params = key.params();
    let alphabet = params.alphabet_size();
    let n = key.hard.len();
    let front_len = n / 2;
    let back_len = n - front_len;

    let big_alpha = BigUint::from(alphabet);
    let front_count = big_alpha.pow(front_len as u32);
    let back_count = big_alpha.pow(back_len as u32);
    let required = front_count.clone().max(back_count.clone());
    if required > BigUint::from(budget) {
        return Err(SolverError::BudgetExceeded { required, budget });
    }

    let front_sums = enumerate_half(&key.hard[..front_len], alphabet);
    let mut front: Vec<(BigUint, u64)> =
        front_sums.into_iter().enumerate().map(|(i, s)| (s, i as u64)).collect();
    front.sort_unstable();

    let back_sums = enumerate_half(&key.hard[front_len..], alphabet);
    let mut solutions = Vec::new();
    for (back_index, back_sum) in back_sums.iter().enumerate() {
        if *back_sum > ciphertext.0 {
            continue;
        }
        let want = &ciphertext.0 - back_sum;
        // all front entries whose sum equals `want`
        let from = front.partition_point(|(s, _)| *s < want);
        for (sum, front_index) in &front[from..] {
            if *sum != want {
                break;
            }
            let mut digits = digits_of_index(*front_index, alphabet, front_len);
            digits.extend(digits_of_index(back_index as u64, alphabet, back_len));
            solutions.push(MessageBlock { digits, digit_bits: params.digit_bits });
        }
    }
    // canonical order: element N digit first, descending
    solutions.sort_unstable_by(|x, y| y.digits.iter().rev().cmp(x.digits.iter().rev()));

    Ok(SolveReport {
        solutions,
        leaves_visited: front_count + back_count,
        nodes_expanded: BigUint::zero(),
        pruned: false,
        wall_time: start.elapsed(),
    })
}

/// Number of digit assignments an exhaustive attacker faces: (2^f)^N, which
/// is exactly 2^(f*N) — the same count the bit-level cipher at n = f*N has.
/// Symbolic: no enumeration happens.
pub fn search_space(params: DigitParams) -> BigUint {
    let per_element = BigUint::one() << params.digit_bits;
    let product = per_element.pow(params.n_elems as u32);
    debug_assert_eq!(product, BigUint::one() << params.message_bits());
    product
}

/// Knapsack density N / log2(max a_i): element count per bit of the largest
/// element. The numerator is exact; the log is a fixed-precision (2^-32)
/// estimate, far below the 4 decimal places reports quote.
pub fn density(hard: &[BigUint]) -> Ratio<BigInt> {
    const SCALE: u32 = 32;
    let max = hard.iter().max().expect("density of an empty vector");
    assert!(*max >= BigUint::from(2u32), "density needs an element >= 2");
    let shift = max.bits().saturating_sub(53);
    let top = (max >> shift).to_f64().expect("<= 53 bits");
    let log2 = top.log2() + shift as f64;
    let denom = BigInt::from((log2 * 2f64.powi(SCALE as i32)).round() as i128);
    Ratio::new(BigInt::from(hard.len()) << SCALE, denom)
}
