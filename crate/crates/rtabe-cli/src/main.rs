//! Command-line front end: key authority, data-owner, and data-user
//! operations plus the bench/game/noise-report harnesses.

mod container;
mod harness;
mod names;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use rtabe::codec;
use rtabe::policy::{self, AttributeSet};
use rtabe::ring::{InverseConvention, NoiseMode, Params, SchemeMode};
use rtabe::scheme::{self, KeyRegistry};

/// Exit codes: 0 success, 2 usage, 3 not authorized, 4 malformed input,
/// 5 internal failure.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NotAuthorized,
    Malformed(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::NotAuthorized => 3,
            CliError::Malformed(_) => 4,
            CliError::Internal(_) => 5,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::NotAuthorized => "key attributes do not satisfy the policy".into(),
            CliError::Malformed(m) => m.clone(),
            CliError::Internal(m) => m.clone(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Malformed(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParamsPreset {
    Toy,
    Desk,
}

impl ParamsPreset {
    fn build(self, mode: SchemeMode) -> Params {
        match self {
            ParamsPreset::Toy => Params::toy(mode),
            ParamsPreset::Desk => Params::desk(mode),
        }
    }

    fn name(self) -> &'static str {
        match self {
            ParamsPreset::Toy => "toy",
            ParamsPreset::Desk => "desk",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Default)]
enum InverseArg {
    /// Full inverse in R_q (exactly correct pipeline).
    #[default]
    Exact,
    /// Inverse mod (x^n + 1, p), lifted.
    Paper,
}

#[derive(Debug, Clone, Copy, ValueEnum, Default)]
enum NoiseArg {
    /// Error terms fixed to zero.
    #[default]
    Off,
    /// Discrete-Gaussian error terms.
    On,
}

fn mode_of(inverse: InverseArg, noise: NoiseArg) -> SchemeMode {
    SchemeMode::new(
        match inverse {
            InverseArg::Exact => InverseConvention::ExactInverse,
            InverseArg::Paper => InverseConvention::PaperLiteral,
        },
        match noise {
            NoiseArg::Off => NoiseMode::NoiseOff,
            NoiseArg::On => NoiseMode::NoiseOn,
        },
    )
}

#[derive(Parser)]
#[command(
    name = "rtabe",
    version,
    about = "Attribute-based encryption over polynomial rings: authority, owner, and user commands"
)]
struct Cli {
    /// Seed for all randomness; runs with the same seed are bit-identical.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create an authority directory: public key, master key, registry.
    Setup {
        #[arg(long, value_enum)]
        params: ParamsPreset,
        /// Number of attributes in the universe (ids 1..=N).
        #[arg(long)]
        attrs: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        inverse: InverseArg,
        #[arg(long, value_enum, default_value_t)]
        noise: NoiseArg,
    },
    /// Issue (or extend) a user key for an identity.
    Keygen {
        #[arg(long)]
        identity: String,
        /// Comma-separated attribute ids or mapped names, e.g. "1,4,7".
        #[arg(long)]
        attrs: String,
        /// Authority directory created by `setup`.
        #[arg(long)]
        authority: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt a file under a policy.
    Encrypt {
        #[arg(long)]
        pk: PathBuf,
        /// Policy expression, e.g. "and(att1, or(att2, att3))".
        #[arg(long)]
        policy: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decrypt a container with a user key.
    Decrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        pk: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a policy against an attribute set.
    PolicyCheck {
        #[arg(long)]
        policy: String,
        /// Comma-separated attribute ids, e.g. "2,3".
        #[arg(long)]
        attrs: String,
    },
    /// Time the four scheme algorithms.
    Bench {
        #[arg(long, value_enum)]
        params: ParamsPreset,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Run the challenger/adversary game and report the win rate.
    Game {
        #[arg(long, default_value = "coinflip")]
        adversary: String,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = ParamsPreset::Toy)]
        params: ParamsPreset,
        #[arg(long, default_value_t = 4)]
        attrs: u32,
        /// Write one JSON record per game to this file.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Decryption failure rates for all four scheme variants.
    NoiseReport {
        #[arg(long, value_enum)]
        params: ParamsPreset,
        #[arg(long, default_value_t = 1_000)]
        trials: usize,
    },
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let seed = resolve_seed(cli.seed);
    match cli.command {
        Command::Setup {
            params,
            attrs,
            out,
            inverse,
            noise,
        } => cmd_setup(params, attrs, &out, mode_of(inverse, noise), seed),
        Command::Keygen {
            identity,
            attrs,
            authority,
            out,
        } => cmd_keygen(&identity, &attrs, &authority, &out, seed),
        Command::Encrypt {
            pk,
            policy,
            input,
            out,
        } => cmd_encrypt(&pk, &policy, &input, &out, seed),
        Command::Decrypt {
            key,
            pk,
            input,
            out,
        } => cmd_decrypt(&key, &pk, &input, &out),
        Command::PolicyCheck { policy, attrs } => cmd_policy_check(&policy, &attrs),
        Command::Bench { params, trials } => harness::cmd_bench(
            params.build(SchemeMode::exact_noiseless()),
            params.name(),
            trials,
            seed,
        ),
        Command::Game {
            adversary,
            trials,
            params,
            attrs,
            records,
        } => harness::cmd_game(
            &adversary,
            params.build(SchemeMode::exact_noiseless()),
            attrs,
            trials,
            records.as_deref(),
            seed,
        ),
        Command::NoiseReport { params, trials } => {
            harness::cmd_noise_report(params.name(), trials, seed)
        }
    }
}

// ----------------------------------------------------------------- setup

const PK_FILE: &str = "pk.bin";
const MSK_FILE: &str = "msk.bin";
const REGISTRY_FILE: &str = "registry.bin";
const ATTRS_MAP_FILE: &str = "attrs.map";

fn cmd_setup(
    preset: ParamsPreset,
    n_attrs: u32,
    out: &Path,
    mode: SchemeMode,
    seed: u64,
) -> CliResult<()> {
    if n_attrs == 0 {
        return Err(CliError::Usage("--attrs must be at least 1".into()));
    }
    let params = preset.build(mode);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (pk, msk) = scheme::setup(&params, n_attrs, &mut rng)
        .map_err(|e| CliError::Internal(format!("setup failed: {e}")))?;

    fs::create_dir_all(out)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", out.display())))?;
    write_file(&out.join(PK_FILE), &codec::encode_public_key(&pk))?;
    write_file(&out.join(MSK_FILE), &codec::encode_master_secret_key(&msk))?;
    write_file(
        &out.join(REGISTRY_FILE),
        &codec::encode_registry(&params, &KeyRegistry::new()),
    )?;
    if !out.join(ATTRS_MAP_FILE).exists() {
        write_file(&out.join(ATTRS_MAP_FILE), names::TEMPLATE.as_bytes())?;
    }

    println!("authority initialized in {}", out.display());
    println!(
        "parameters: {} (n={}, q={}, p={}, sigma={}), mode {}, universe 1..={}",
        preset.name(),
        params.n(),
        params.q(),
        params.p(),
        params.sigma(),
        params.mode,
        n_attrs
    );
    println!("seed: {seed}");
    Ok(())
}

// ---------------------------------------------------------------- keygen

fn parse_attr_list(text: &str, map: &names::AttrMap) -> CliResult<Vec<u32>> {
    let mut out = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        out.push(map.resolve_attr(token)?);
    }
    if out.is_empty() {
        return Err(CliError::Usage("attribute list is empty".into()));
    }
    Ok(out)
}

fn cmd_keygen(
    identity: &str,
    attrs: &str,
    authority: &Path,
    out: &Path,
    seed: u64,
) -> CliResult<()> {
    let msk = codec::decode_master_secret_key(&read_file(&authority.join(MSK_FILE))?)
        .map_err(|e| CliError::Malformed(format!("bad master key file: {e}")))?;
    let (reg_params, mut registry) =
        codec::decode_registry(&read_file(&authority.join(REGISTRY_FILE))?)
            .map_err(|e| CliError::Malformed(format!("bad registry file: {e}")))?;
    if reg_params != msk.params {
        return Err(CliError::Malformed(
            "registry and master key parameters disagree".into(),
        ));
    }
    let map = names::AttrMap::load(&authority.join(ATTRS_MAP_FILE))?;

    let ids = parse_attr_list(attrs, &map)?;
    for &id in &ids {
        if id == 0 || id > msk.n_attrs {
            return Err(CliError::Usage(format!(
                "attribute {id} outside the universe 1..={}",
                msk.n_attrs
            )));
        }
    }
    let att = AttributeSet::new(ids).map_err(|e| CliError::Usage(e.to_string()))?;

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let usk = scheme::keygen(&msk, identity, &att, &mut rng, &mut registry)
        .map_err(|e| CliError::Internal(format!("keygen failed: {e}")))?;

    write_file(out, &codec::encode_user_secret_key(&usk))?;
    write_file(
        &authority.join(REGISTRY_FILE),
        &codec::encode_registry(&msk.params, &registry),
    )?;
    println!(
        "issued key for '{identity}' with attributes {:?} -> {}",
        usk.attributes().iter().collect::<Vec<_>>(),
        out.display()
    );
    Ok(())
}

// --------------------------------------------------------------- encrypt

fn cmd_encrypt(pk_path: &Path, policy: &str, input: &Path, out: &Path, seed: u64) -> CliResult<()> {
    let pk = codec::decode_public_key(&read_file(pk_path)?)
        .map_err(|e| CliError::Malformed(format!("bad public key file: {e}")))?;
    let map = names::AttrMap::load(
        &pk_path
            .parent()
            .unwrap_or(Path::new("."))
            .join(ATTRS_MAP_FILE),
    )?;

    let resolved = map.resolve_policy(policy)?;
    let tree = policy::parse_policy(&resolved).map_err(|e| CliError::Usage(e.to_string()))?;
    tree.check_universe(pk.n_attrs)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let payload = read_file(input)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let bytes = container::seal(&pk, &tree, &payload, &mut rng)?;
    write_file(out, &bytes)?;
    println!(
        "encrypted {} bytes in {} block(s) under policy {}",
        payload.len(),
        container::block_count(&pk.params, payload.len()),
        policy::format_policy(&tree)
    );
    Ok(())
}

// --------------------------------------------------------------- decrypt

fn cmd_decrypt(key_path: &Path, pk_path: &Path, input: &Path, out: &Path) -> CliResult<()> {
    let usk = codec::decode_user_secret_key(&read_file(key_path)?)
        .map_err(|e| CliError::Malformed(format!("bad user key file: {e}")))?;
    let pk = codec::decode_public_key(&read_file(pk_path)?)
        .map_err(|e| CliError::Malformed(format!("bad public key file: {e}")))?;
    let sealed = read_file(input)?;
    let payload = container::open(&sealed, &usk, &pk)?;
    write_file(out, &payload)?;
    println!("decrypted {} bytes -> {}", payload.len(), out.display());
    Ok(())
}

// ----------------------------------------------------------- policy-check

fn cmd_policy_check(policy_text: &str, attrs: &str) -> CliResult<()> {
    let tree = policy::parse_policy(policy_text).map_err(|e| CliError::Usage(e.to_string()))?;
    let map = names::AttrMap::empty();
    let ids = parse_attr_list(attrs, &map)?;
    let att = AttributeSet::new(ids).map_err(|e| CliError::Usage(e.to_string()))?;
    let leaf_attrs: BTreeSet<u32> = tree.attributes();
    if tree.evaluate(&att) {
        println!("satisfied");
    } else {
        println!("unsatisfied");
    }
    println!(
        "policy attributes: {:?}; provided: {:?}",
        leaf_attrs,
        att.iter().collect::<Vec<_>>()
    );
    Ok(())
}
