//! On-disk formats: JSON for keys, envelopes, and solver reports, CSV for
//! bench tables. Big integers travel as decimal strings — the worked keys fit
//! in a u64 but the 96-bit regime does not, and JSON numbers stop being exact
//! long before that.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::EquivalenceRow;
use crate::cipher::{Ciphertext, Envelope};
use crate::keygen::{KeygenError, PrivateKey, PublicKey, SuperincreasingVector};
use crate::params::{DigitParams, ParamsError};
use crate::solver::SolveReport;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected a decimal integer, got {0:?}")]
    BadNumber(String),
    #[error("file declares N = {declared} but carries {got} elements")]
    GeometryMismatch { declared: usize, got: usize },
    #[error("bad geometry: {0}")]
    BadGeometry(#[from] ParamsError),
    #[error("key fails validation: {0}")]
    BadKey(#[from] KeygenError),
}

fn parse_big(s: &str) -> Result<BigUint, WireError> {
    s.parse().map_err(|_| WireError::BadNumber(s.to_string()))
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

#[derive(Serialize, Deserialize)]
struct PrivateKeyFile {
    f: u32,
    #[serde(rename = "N")]
    n: usize,
    easy: Vec<String>,
    m: String,
    w: String,
    w_inv: String,
}

#[derive(Serialize, Deserialize)]
struct PublicKeyFile {
    f: u32,
    #[serde(rename = "N")]
    n: usize,
    hard: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct EnvelopeFile {
    orig_bits: u64,
    blocks: Vec<String>,
}

pub fn private_key_to_json(key: &PrivateKey) -> String {
    to_pretty(&PrivateKeyFile {
        f: key.easy.digit_bits,
        n: key.easy.elements.len(),
        easy: key.easy.elements.iter().map(BigUint::to_string).collect(),
        m: key.modulus.to_string(),
        w: key.multiplier.to_string(),
        w_inv: key.multiplier_inv.to_string(),
    })
}

/// Parses and fully validates a private key: geometry, the level bound,
/// modulus headroom, and w * w_inv = 1 (mod m). A file that loads is a file
/// that decrypts.
pub fn private_key_from_json(text: &str) -> Result<PrivateKey, WireError> {
    let file: PrivateKeyFile = serde_json::from_str(text)?;
    DigitParams::new(file.f, file.n)?;
    if file.easy.len() != file.n {
        return Err(WireError::GeometryMismatch { declared: file.n, got: file.easy.len() });
    }
    let elements =
        file.easy.iter().map(|s| parse_big(s)).collect::<Result<Vec<_>, _>>()?;
    let key = PrivateKey {
        easy: SuperincreasingVector { elements, digit_bits: file.f },
        modulus: parse_big(&file.m)?,
        multiplier: parse_big(&file.w)?,
        multiplier_inv: parse_big(&file.w_inv)?,
    };
    key.validate()?;
    Ok(key)
}

pub fn public_key_to_json(key: &PublicKey) -> String {
    to_pretty(&PublicKeyFile {
        f: key.digit_bits,
        n: key.hard.len(),
        hard: key.hard.iter().map(BigUint::to_string).collect(),
    })
}

pub fn public_key_from_json(text: &str) -> Result<PublicKey, WireError> {
    let file: PublicKeyFile = serde_json::from_str(text)?;
    DigitParams::new(file.f, file.n)?;
    if file.hard.len() != file.n {
        return Err(WireError::GeometryMismatch { declared: file.n, got: file.hard.len() });
    }
    let hard = file.hard.iter().map(|s| parse_big(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(PublicKey::from_elements(hard, file.f))
}

pub fn envelope_to_json(envelope: &Envelope) -> String {
    to_pretty(&EnvelopeFile {
        orig_bits: envelope.orig_bits,
        blocks: envelope.blocks.iter().map(|c| c.0.to_string()).collect(),
    })
}

pub fn envelope_from_json(text: &str) -> Result<Envelope, WireError> {
    let file: EnvelopeFile = serde_json::from_str(text)?;
    let blocks = file
        .blocks
        .iter()
        .map(|s| parse_big(s).map(Ciphertext))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Envelope { orig_bits: file.orig_bits, blocks })
}

#[derive(Serialize)]
struct SolveReportFile {
    f: u32,
    #[serde(rename = "N")]
    n: usize,
    pruned: bool,
    leaves_visited: String,
    nodes_expanded: String,
    wall_ms: u64,
    solutions: Vec<Vec<u64>>,
}

pub fn solve_report_to_json(params: DigitParams, report: &SolveReport) -> String {
    to_pretty(&SolveReportFile {
        f: params.digit_bits,
        n: params.n_elems,
        pruned: report.pruned,
        leaves_visited: report.leaves_visited.to_string(),
        nodes_expanded: report.nodes_expanded.to_string(),
        wall_ms: report.wall_time.as_millis() as u64,
        solutions: report.solutions.iter().map(|b| b.digits.clone()).collect(),
    })
}

pub fn bench_rows_to_csv(rows: &[EquivalenceRow]) -> String {
    let mut out = String::from("f,N,n,leaves,log2_leaves,wall_ms\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.digit_bits,
            row.n_elems,
            row.message_bits,
            row.leaves,
            row.log2_leaves,
            row.wall_time.as_millis()
        ));
    }
    out
}

#[derive(Serialize)]
struct BenchRowFile {
    f: u32,
    #[serde(rename = "N")]
    n: usize,
    message_bits: u64,
    leaves: String,
    log2_leaves: u64,
    wall_ms: u64,
}

pub fn bench_rows_to_json(rows: &[EquivalenceRow]) -> String {
    let files: Vec<BenchRowFile> = rows
        .iter()
        .map(|row| BenchRowFile {
            f: row.digit_bits,
            n: row.n_elems,
            message_bits: row.message_bits,
            leaves: row.leaves.to_string(),
            log2_leaves: row.log2_leaves,
            wall_ms: row.wall_time.as_millis() as u64,
        })
        .collect();
    to_pretty(&files)
}
