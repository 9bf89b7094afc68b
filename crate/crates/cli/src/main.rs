//! Command-line workbench for the trapdoor knapsack cipher: key generation,
//! block encryption, eavesdropper solvers, and the sawtooth trapdoor attack.
//!
//! Exit codes: 0 success, 1 usage error, 2 bad input or I/O failure,
//! 3 honest negative (no solution found / no trapdoor recovered).

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};

use knapsack_core::bench::{
    equivalence_experiment, keysize_estimate, transmission_model, BenchError,
    ENUMERATION_GUARD_BITS, TRANSMISSION_NOTE,
};
use knapsack_core::cipher::{decrypt_message, encrypt_message, unpack, Ciphertext, Envelope};
use knapsack_core::keygen::{keygen_with_slack, PublicKey};
use knapsack_core::params::DigitParams;
use knapsack_core::sawtooth::{
    candidate_ratios, find_candidates, reconstruct_trapdoor, write_candidate_intervals,
    write_curve_samples,
};
use knapsack_core::solver::{
    density, exhaustive_solve_parallel, mitm_solve_with_budget, search_space, Prune, SolveReport,
    DEFAULT_MITM_BUDGET,
};
use knapsack_core::wire;
use num_traits::ToPrimitive;

type CliError = Box<dyn Error>;

#[derive(Parser)]
#[command(name = "knapsack", version, about = "Trapdoor knapsack cipher workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair and write both halves as JSON
    Keygen {
        /// Digit width in bits (1 = the classic 0/1 cipher, 8 = digits 0..255)
        #[arg(long)]
        f: u32,
        /// Number of knapsack elements
        #[arg(long)]
        n_elems: usize,
        /// RNG seed; drawn from the OS and printed when omitted
        #[arg(long)]
        seed: Option<u64>,
        /// Extra randomness in element growth (0 = tightest possible key)
        #[arg(long, default_value_t = 1)]
        slack: u32,
        #[arg(long)]
        private_out: PathBuf,
        #[arg(long)]
        public_out: PathBuf,
    },
    /// Encrypt a message under a public key
    Encrypt {
        #[arg(long)]
        public: PathBuf,
        #[command(flatten)]
        message: MessageInput,
        /// Envelope destination; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decrypt an envelope with a private key
    Decrypt {
        #[arg(long)]
        private: PathBuf,
        #[arg(long)]
        envelope: PathBuf,
        /// Print the plaintext as hex instead of bits
        #[arg(long)]
        hex: bool,
    },
    /// Recover plaintext from public data alone, the brute-force way
    Solve {
        #[arg(long)]
        public: PathBuf,
        #[command(flatten)]
        target: SolveTarget,
        #[arg(long, value_enum, default_value_t = Algorithm::Exhaustive)]
        algorithm: Algorithm,
        /// Feasibility pruning (exhaustive only); off visits every assignment
        #[arg(long, value_enum, default_value_t = PruneArg::On)]
        prune: PruneArg,
        /// Worker threads for the exhaustive search
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Table cap for meet-in-the-middle
        #[arg(long, default_value_t = DEFAULT_MITM_BUDGET)]
        budget: u64,
        /// Write the solver report(s) as a JSON array
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Sawtooth scan: hunt the multiplier ratio and rebuild a trapdoor
    Attack {
        #[arg(long)]
        public: PathBuf,
        /// How many curves (public elements) to intersect
        #[arg(long, default_value_t = 4)]
        curves: usize,
        /// Curve-height threshold as an exact ratio, e.g. 1/16
        #[arg(long, value_parser = parse_ratio)]
        epsilon: BigRational,
        /// Trial ratios probed per candidate sliver
        #[arg(long, default_value_t = 128)]
        probe_budget: usize,
        /// Write the recovered private key as JSON
        #[arg(long)]
        recovered_out: Option<PathBuf>,
        /// Write candidate slivers as CSV
        #[arg(long)]
        intervals_out: Option<PathBuf>,
        /// Write curve samples as CSV on a grid of this many points
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, requires = "samples")]
        samples_out: Option<PathBuf>,
    },
    /// The equivalence table: same message bits, different digit widths
    Bench {
        /// Message width n in bits; every digit width must divide it
        #[arg(long)]
        message_bits: u64,
        /// Digit widths to compare, comma separated
        #[arg(long, value_delimiter = ',')]
        f_list: Vec<u32>,
        #[arg(long)]
        seed: Option<u64>,
        /// Emit JSON instead of CSV
        #[arg(long)]
        json: bool,
    },
    /// Published size of the tightest possible public key for a geometry
    Keysize {
        #[arg(long)]
        f: u32,
        #[arg(long)]
        n_elems: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MessageInput {
    /// Plaintext as a bit string, e.g. 100011
    #[arg(long)]
    bits: Option<String>,
    /// Plaintext as hex, four bits per digit
    #[arg(long)]
    hex: Option<String>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SolveTarget {
    /// Envelope file: solve every block and reassemble the plaintext
    #[arg(long)]
    envelope: Option<PathBuf>,
    /// A single block sum, in decimal
    #[arg(long)]
    target: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Exhaustive,
    Mitm,
}

#[derive(Clone, Copy, ValueEnum)]
enum PruneArg {
    On,
    Off,
}

impl From<PruneArg> for Prune {
    fn from(arg: PruneArg) -> Prune {
        match arg {
            PruneArg::On => Prune::On,
            PruneArg::Off => Prune::Off,
        }
    }
}

fn parse_ratio(s: &str) -> Result<BigRational, String> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = num.parse().map_err(|_| format!("bad numerator {num:?}"))?;
    let d: BigInt = den.parse().map_err(|_| format!("bad denominator {den:?}"))?;
    if d <= BigInt::from(0) {
        return Err("denominator must be positive".into());
    }
    Ok(BigRational::new(n, d))
}

fn hex_to_bits(hex: &str) -> Result<String, CliError> {
    let mut bits = String::with_capacity(hex.len() * 4);
    for c in hex.chars() {
        let v = c.to_digit(16).ok_or_else(|| format!("bad hex digit {c:?}"))?;
        bits.push_str(&format!("{v:04b}"));
    }
    Ok(bits)
}

fn bits_to_hex(bits: &str) -> Result<String, CliError> {
    if bits.len() % 4 != 0 {
        return Err(format!("{} bits do not form whole hex digits", bits.len()).into());
    }
    bits.as_bytes()
        .chunks(4)
        .map(|chunk| {
            let v = chunk.iter().fold(0u32, |acc, b| (acc << 1) | u32::from(b - b'0'));
            Ok(char::from_digit(v, 16).expect("nibble"))
        })
        .collect()
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()).into())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()).into())
}

fn load_public(path: &Path) -> Result<PublicKey, CliError> {
    Ok(wire::public_key_from_json(&read_to_string(path)?)?)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(2);
        }
    }
}

fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Keygen { f, n_elems, seed, slack, private_out, public_out } => {
            let params = DigitParams::new(f, n_elems)?;
            let seed = seed.unwrap_or_else(rand::random);
            let (private, public) = keygen_with_slack(params, seed, slack);
            write_file(&private_out, &wire::private_key_to_json(&private))?;
            write_file(&public_out, &wire::public_key_to_json(&public))?;
            println!("seed: {seed}");
            println!(
                "wrote f={f} N={n_elems} key pair; modulus has {} bits",
                private.modulus.bits()
            );
            Ok(0)
        }
        Command::Encrypt { public, message, out } => {
            let key = load_public(&public)?;
            let bits = match (&message.bits, &message.hex) {
                (Some(b), None) => b.clone(),
                (None, Some(h)) => hex_to_bits(h)?,
                _ => unreachable!("clap group"),
            };
            let envelope = encrypt_message(&key, &bits)?;
            let json = wire::envelope_to_json(&envelope);
            match out {
                Some(path) => {
                    write_file(&path, &json)?;
                    println!("{} bits -> {} block(s)", envelope.orig_bits, envelope.blocks.len());
                }
                None => print!("{json}"),
            }
            Ok(0)
        }
        Command::Decrypt { private, envelope, hex } => {
            let key = wire::private_key_from_json(&read_to_string(&private)?)?;
            let envelope = wire::envelope_from_json(&read_to_string(&envelope)?)?;
            let bits = decrypt_message(&key, &envelope)?;
            if hex {
                println!("{}", bits_to_hex(&bits)?);
            } else {
                println!("{bits}");
            }
            Ok(0)
        }
        Command::Solve { public, target, algorithm, prune, workers, budget, report_out } => {
            let key = load_public(&public)?;
            solve_command(&key, target, algorithm, prune, workers, budget, report_out)
        }
        Command::Attack {
            public,
            curves,
            epsilon,
            probe_budget,
            recovered_out,
            intervals_out,
            samples,
            samples_out,
        } => {
            let key = load_public(&public)?;
            let d = density(&key.hard).to_f64().expect("density is a small ratio");
            println!("public vector density: {d:.4}");
            let scan = find_candidates(&key.hard, curves, &epsilon)?;
            if scan.covers_unit {
                eprintln!("warning: epsilon >= 1 qualifies the whole unit interval");
            }
            println!("{} candidate sliver(s) from {} curve(s)", scan.candidates.len(), curves);
            if let Some(path) = intervals_out {
                let mut buf = Vec::new();
                write_candidate_intervals(&mut buf, &scan)?;
                write_file(&path, &String::from_utf8(buf).expect("ascii csv"))?;
            }
            if let (Some(points), Some(path)) = (samples, samples_out) {
                let mut buf = Vec::new();
                write_curve_samples(&mut buf, &key.hard, curves, points)?;
                write_file(&path, &String::from_utf8(buf).expect("ascii csv"))?;
            }
            let recovered = scan
                .candidates
                .iter()
                .flat_map(|iv| candidate_ratios(iv, probe_budget))
                .find_map(|v| reconstruct_trapdoor(&key.hard, &v, key.digit_bits));
            match recovered {
                Some(trapdoor) => {
                    println!(
                        "recovered trapdoor: modulus {} multiplier {}",
                        trapdoor.modulus, trapdoor.multiplier
                    );
                    if let Some(path) = recovered_out {
                        write_file(&path, &wire::private_key_to_json(&trapdoor))?;
                    }
                    Ok(0)
                }
                None => {
                    println!("no trapdoor recovered; widen epsilon or the probe budget");
                    Ok(3)
                }
            }
        }
        Command::Bench { message_bits, f_list, seed, json } => {
            if message_bits > ENUMERATION_GUARD_BITS {
                // too big to enumerate: print the symbolic search space instead
                println!("f,N,n,search_space");
                let mut widths = f_list;
                widths.sort_unstable();
                for &f in &widths {
                    let params = DigitParams::from_message_bits(f, message_bits)?;
                    println!(
                        "{f},{},{message_bits},{}",
                        params.n_elems,
                        search_space(params)
                    );
                }
                print_transmission_footer();
                return Ok(0);
            }
            let rows = equivalence_experiment(message_bits, &f_list, seed.unwrap_or(1))
                .map_err(|e| match e {
                    BenchError::BadGeometry(g) => CliError::from(g),
                    other => CliError::from(other),
                })?;
            if json {
                print!("{}", wire::bench_rows_to_json(&rows));
            } else {
                print!("{}", wire::bench_rows_to_csv(&rows));
            }
            print_transmission_footer();
            Ok(0)
        }
        Command::Keysize { f, n_elems, seed } => {
            let params = DigitParams::new(f, n_elems)?;
            let bits = keysize_estimate(params, seed.unwrap_or(1));
            println!(
                "tightest public key: {bits} bits across {n_elems} elements \
                 (message blocks are {} bits)",
                params.message_bits()
            );
            Ok(0)
        }
    }
}

/// The line-rate companion to the leaf-count table, on stderr so stdout
/// stays machine-readable.
fn print_transmission_footer() {
    let full = transmission_model(20000, 300);
    let grouped = transmission_model(2500, 300);
    eprintln!("line model at 300 bit/s: 20000 bits take {full} s, 2500 bits take {grouped} s");
    eprintln!("note: {TRANSMISSION_NOTE}");
}

fn solve_command(
    key: &PublicKey,
    target: SolveTarget,
    algorithm: Algorithm,
    prune: PruneArg,
    workers: usize,
    budget: u64,
    report_out: Option<PathBuf>,
) -> Result<i32, CliError> {
    let params = key.params();
    let (blocks, orig_bits): (Vec<Ciphertext>, Option<u64>) = match (&target.envelope, &target.target)
    {
        (Some(path), None) => {
            let envelope: Envelope = wire::envelope_from_json(&read_to_string(path)?)?;
            (envelope.blocks, Some(envelope.orig_bits))
        }
        (None, Some(decimal)) => {
            let sum: BigUint =
                decimal.parse().map_err(|_| format!("bad decimal target {decimal:?}"))?;
            (vec![Ciphertext(sum)], None)
        }
        _ => unreachable!("clap group"),
    };

    if matches!(algorithm, Algorithm::Exhaustive) && params.message_bits() > ENUMERATION_GUARD_BITS
    {
        return Err(format!(
            "exhaustive search over {} bits will not finish; \
             the full space is {} assignments (try --algorithm mitm)",
            params.message_bits(),
            search_space(params)
        )
        .into());
    }

    let mut reports: Vec<SolveReport> = Vec::with_capacity(blocks.len());
    for c in &blocks {
        let report = match algorithm {
            Algorithm::Exhaustive => exhaustive_solve_parallel(key, c, prune.into(), workers),
            Algorithm::Mitm => mitm_solve_with_budget(key, c, budget)?,
        };
        reports.push(report);
    }

    for (i, report) in reports.iter().enumerate() {
        println!(
            "block {}: {} solution(s), {} leaves, {} nodes",
            i + 1,
            report.solutions.len(),
            report.leaves_visited,
            report.nodes_expanded
        );
        for s in &report.solutions {
            let digits: Vec<String> = s.digits.iter().map(u64::to_string).collect();
            println!("  digits: {}", digits.join(" "));
        }
    }

    // the eavesdropper's payoff: a unique solution per block reassembles the
    // transmitted bit string without ever touching the private key
    if let Some(orig_bits) = orig_bits {
        if reports.iter().all(|r| r.solutions.len() == 1) {
            let mut bits = String::new();
            for report in &reports {
                bits.push_str(&unpack(&report.solutions[0]));
            }
            bits.truncate(orig_bits as usize);
            println!("recovered bits: {bits}");
        }
    }

    if let Some(path) = report_out {
        let docs: Vec<serde_json::Value> = reports
            .iter()
            .map(|r| {
                serde_json::from_str(&wire::solve_report_to_json(params, r)).expect("own json")
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&docs).expect("serializable");
        text.push('\n');
        write_file(&path, &text)?;
    }

    let all_solved = reports.iter().all(|r| !r.solutions.is_empty());
    Ok(if all_solved { 0 } else { 3 })
}
