//! Command-line front end: key generation, CSV ingestion into encrypted tables, slot updates,
//! aggregation queries, slot reads and benchmark suites.
//!
//! Layout under the data directory: `keys/` (parameters and key files) and `tables/<name>/`.
//! Machine output (`--format machine`) is one `key=value` record per line.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bfv::{SchemeParams, SUPPORTED_PLAINTEXT_MODULI};
use crate::error::{Error, Result};
pub use output::{Format, Output};

/// Prime widths of the ciphertext modulus for every profile.
const PRIME_BITS: [u32; 3] = [60, 60, 60];

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RANGE: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;
pub const EXIT_PARAMS_MISMATCH: i32 = 5;
pub const EXIT_MISSING_KEY: i32 = 6;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parameter(_) | Error::Index { .. } | Error::UnknownTable(_) | Error::UnknownGroup { .. } => EXIT_USAGE,
        Error::Range { .. } | Error::Ingest { .. } => EXIT_RANGE,
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::ParamsMismatch { .. } => EXIT_PARAMS_MISMATCH,
        Error::MissingKey(_) => EXIT_MISSING_KEY,
        _ => EXIT_OTHER,
    }
}

#[derive(Debug, Parser)]
#[command(name = "hermes", version, about = "Encrypted single-attribute tables on packed BFV ciphertexts")]
pub struct Cli {
    /// Root directory for keys and tables.
    #[arg(long, global = true, env = "HERMES_DATA_DIR", default_value = "hermes-data")]
    pub data_dir: PathBuf,

    /// Key directory (default: <data-dir>/keys).
    #[arg(long, global = true, visible_alias = "out")]
    pub keys_dir: Option<PathBuf>,

    /// Deterministic randomness for tests. Never use for real data.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn keys_dir(&self) -> PathBuf {
        self.keys_dir.clone().unwrap_or_else(|| self.data_dir.join("keys"))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate secret, public and rotation keys.
    Keygen(KeygenArgs),
    /// Load a single-column CSV into a new encrypted table.
    Ingest(IngestArgs),
    /// Insert a value at a slot (or append it) in one group.
    Insert(InsertArgs),
    /// Delete the value at a slot in one group.
    Delete(DeleteArgs),
    /// Encrypted sum over a table or one group.
    Sum(SumArgs),
    /// Decrypt one slot of a group.
    Get(GetArgs),
    /// Run a benchmark suite on freshly generated keys.
    Bench(BenchArgs),
    /// Replay random operations against the plaintext oracle.
    Fuzz(FuzzArgs),
    /// Show parameters, keys and tables.
    Info,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    /// N = 16384, n = 8192 slots.
    Full,
    /// N = 8192, n = 4096 slots.
    Mid,
    /// N = 16 unless -N is given. Not secure.
    Desk,
}

#[derive(Clone, Debug, Args)]
pub struct ProfileArgs {
    #[arg(long, value_enum, default_value_t = Profile::Full)]
    pub profile: Profile,

    /// Ring degree N (power of two), overriding the profile.
    #[arg(short = 'N', long = "degree")]
    pub degree: Option<usize>,

    /// Plaintext modulus.
    #[arg(short = 't', long = "plain-modulus", default_value_t = 65537, value_parser = parse_plain_modulus)]
    pub plain_modulus: u64,
}

impl ProfileArgs {
    pub fn params(&self) -> Result<SchemeParams> {
        let degree = self.degree.unwrap_or(match self.profile {
            Profile::Full => 1 << 14,
            Profile::Mid => 1 << 13,
            Profile::Desk => 16,
        });
        SchemeParams::new(degree, self.plain_modulus, &PRIME_BITS)
    }
}

fn parse_plain_modulus(s: &str) -> std::result::Result<u64, String> {
    let t: u64 = s.parse().map_err(|e| format!("{e}"))?;
    if SUPPORTED_PLAINTEXT_MODULI.contains(&t) {
        Ok(t)
    } else {
        Err(format!("supported plaintext moduli are {SUPPORTED_PLAINTEXT_MODULI:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Rotations {
    /// Steps ±2^j for all 2^j < n: updates plus the rotate-and-add baseline.
    Standard,
    /// Steps ±1 only: enough for inserts and deletes.
    Minimal,
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,

    /// Overwrite existing keys.
    #[arg(long)]
    pub force: bool,

    #[arg(long, value_enum, default_value_t = Rotations::Standard)]
    pub rotations: Rotations,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// CSV file, or one of the built-in datasets `covid19`, `hg38`, `bitcoin`.
    pub csv: String,

    /// Table name.
    #[arg(long)]
    pub table: String,

    /// Tuples per ciphertext (default: min(4096, n-1)).
    #[arg(long)]
    pub group_size: Option<usize>,

    /// Rescale every value by k/d (floor), e.g. `1/24`.
    #[arg(long)]
    pub scale: Option<crate::dataset::Scale>,

    /// Wrap values >= t modulo t instead of rejecting them. Sums become mod-t sums of the
    /// wrapped values.
    #[arg(long)]
    pub reduce_mod_t: bool,

    /// Replace an existing table of the same name.
    #[arg(long)]
    pub replace: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Plain,
    Encrypted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    /// Refresh automatically when the budget would drop below the floor.
    Auto,
    /// Fail instead of refreshing.
    Strict,
    /// Never check.
    Off,
}

#[derive(Debug, Args)]
pub struct UpdatePolicy {
    #[arg(long, value_enum, default_value_t = PolicyArg::Auto)]
    pub refresh: PolicyArg,

    /// Minimum noise budget (bits) an update may leave.
    #[arg(long, default_value_t = crate::pack::DEFAULT_REFRESH_FLOOR)]
    pub floor: f64,

    /// Print the operation trace.
    #[arg(short, long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("position").required(true).args(["index", "append"])))]
pub struct InsertArgs {
    /// Table name.
    #[arg(long)]
    pub table: String,

    /// Group id; a missing group is created empty.
    #[arg(long)]
    pub group: u64,

    /// Slot to insert at (0..=L).
    #[arg(long)]
    pub index: Option<usize>,

    /// Place the value after the last tuple.
    #[arg(long)]
    pub append: bool,

    pub value: u64,

    #[arg(long, value_enum, default_value_t = ModeArg::Plain)]
    pub mode: ModeArg,

    #[command(flatten)]
    pub policy: UpdatePolicy,
}

#[derive(Debug, Args)]
pub struct DeleteArgs {
    /// Table name.
    #[arg(long)]
    pub table: String,

    /// Group id.
    #[arg(long)]
    pub group: u64,

    /// Slot to delete (0..L).
    #[arg(long)]
    pub index: usize,

    #[command(flatten)]
    pub policy: UpdatePolicy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    /// log2(n) rotate-and-add steps per ciphertext.
    Rotate,
}

#[derive(Debug, Args)]
pub struct SumArgs {
    /// Table name.
    #[arg(long)]
    pub table: String,

    /// Restrict to one group.
    #[arg(long)]
    pub group: Option<u64>,

    /// Use a rotation-based baseline instead of the sum slot.
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,
}

#[derive(Debug, Args)]
pub struct GetArgs {
    /// Table name.
    #[arg(long)]
    pub table: String,

    /// Group id.
    #[arg(long)]
    pub group: u64,

    /// Slot index; slot n-1 holds the group sum.
    #[arg(long)]
    pub slot: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Encrypt,
    Insert,
    Delete,
    Aggregate,
    Sweep,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(value_enum)]
    pub suite: Suite,

    #[command(flatten)]
    pub profile: ProfileArgs,

    /// Built-in dataset (`covid19`, `hg38`, `bitcoin`) or CSV path.
    #[arg(long, default_value = "hg38")]
    pub dataset: String,

    /// Group size for the encrypt, insert, delete and aggregate suites (default: min(4096, n-1)).
    #[arg(long)]
    pub group_size: Option<usize>,

    /// Ascending group sizes for the sweep suite.
    #[arg(long, value_delimiter = ',')]
    pub group_sizes: Option<Vec<usize>>,

    /// Operations per update run.
    #[arg(long, default_value_t = 100)]
    pub ops: usize,

    /// Rescale dataset values by k/d (floor).
    #[arg(long)]
    pub scale: Option<crate::dataset::Scale>,

    /// Wrap dataset values >= t modulo t.
    #[arg(long)]
    pub reduce_mod_t: bool,

    /// Spread group encryptions over all cores (encrypt suite; reported as parallel).
    #[arg(long)]
    pub parallel: bool,

    /// Also write the reports to a CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    /// Ring degree (desk profile).
    #[arg(short = 'N', long = "degree", default_value_t = 16)]
    pub degree: usize,

    #[arg(long, default_value_t = 10_000)]
    pub ops: usize,
}

/// Parses `args` and runs the command, writing to stdout/stderr. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let mut out = Output::stdout(cli.format);
    match commands::dispatch(&cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            exit_code(&Error::Parameter("x".into())),
            exit_code(&Error::Range { value: 1, modulus: 1 }),
            exit_code(&Error::Capacity { len: 1, capacity: 1 }),
            exit_code(&Error::ParamsMismatch { expected: "a".into(), found: "b".into() }),
            exit_code(&Error::MissingKey(1)),
            exit_code(&Error::Format("x".into())),
        ];
        let mut sorted = codes.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), codes.len());
        assert!(!codes.contains(&EXIT_OK));
    }

    #[test]
    fn profiles_resolve() {
        let p = ProfileArgs { profile: Profile::Desk, degree: None, plain_modulus: 65537 };
        assert_eq!(p.params().unwrap().slot_count(), 8);
        let p = ProfileArgs { profile: Profile::Full, degree: None, plain_modulus: 65537 };
        assert_eq!(p.params().unwrap().slot_count(), 8192);
        assert!(parse_plain_modulus("65536").is_err());
        assert_eq!(parse_plain_modulus("786433"), Ok(786433));
    }
}
