//! Command-line front end. Each protocol message is a file.
//!
//! Exit codes: 0 success, 1 other failure, 2 usage, 3 policy not satisfied,
//! 4 proof rejected, 5 untraceable key, 6 corrupt or invalid file.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use maabe::access_tree::parse_attribute_set;
use maabe::central_authority::{ca_issue, trace, ChallengeOrigin};
use maabe::formats::{load, save, save_public, Artifact};
use maabe::harness::game::{PlantedKeyAdversary, ShareMixingAdversary, UniformGuesser, ViolatingAdversary};
use maabe::harness::{bench, win_rate, BenchParams, GameConfig, Phase};
use maabe::scheme::{decrypt_hybrid, encrypt_hybrid, finalize_key, global_setup, request_key};
use maabe::{
    authority, AccessNode, AttributeKeyShare, AuthorityPublic, AuthoritySecret, Backend, Bls12, CaSecret, Error,
    HybridCiphertext, Identity, IssuanceRequest, KeyRequest, PartialKey, PublicParams, ToyM61, TraceTable, UserKey,
};

#[derive(Parser)]
#[command(name = "maabe", version, about = "Multi-authority ABE with traceable keys")]
struct Cli {
    #[arg(long, value_enum, default_value_t = BackendArg::Curve, global = true)]
    backend: BackendArg,

    /// Deterministic randomness, for tests only.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    /// BLS12-381.
    Curve,
    /// Exponent-carrying toy group modulo 2^61 - 1. Insecure.
    Toy,
}

#[derive(Subcommand)]
enum Command {
    /// Create public parameters and the CA secret.
    Setup {
        #[arg(long)]
        authorities: u32,
        #[arg(long)]
        mpk: PathBuf,
        #[arg(long)]
        msk: PathBuf,
    },
    /// Create authority keys and enroll the PRF seed with the CA.
    AuthoritySetup {
        #[arg(long)]
        index: u32,
        #[arg(long)]
        attributes: u32,
        #[arg(long)]
        msk: PathBuf,
        #[arg(long)]
        secret: PathBuf,
        #[arg(long)]
        public: PathBuf,
    },
    /// Add an identity to the trace table.
    Register {
        #[arg(long)]
        msk: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        id: String,
    },
    /// User: commit to a blinding value and prove knowledge of it.
    RequestKey {
        #[arg(long)]
        mpk: PathBuf,
        #[arg(long)]
        id: String,
        /// Private state kept until finalize-key.
        #[arg(long)]
        state: PathBuf,
        /// Message for the CA.
        #[arg(long)]
        out: PathBuf,
    },
    /// Authority: attribute keys for a user over an access tree.
    Grant {
        #[arg(long)]
        mpk: PathBuf,
        #[arg(long)]
        authority: PathBuf,
        #[arg(long)]
        id: String,
        /// e.g. "(2of3 (leaf 1:1) (leaf 1:2) (leaf 1:3))"
        #[arg(long)]
        tree: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// CA: verify the request and issue the partial key.
    IssueKey {
        #[arg(long)]
        mpk: PathBuf,
        #[arg(long)]
        msk: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        request: PathBuf,
        /// One per authority.
        #[arg(long = "share", required = true)]
        shares: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// User: unblind the partial key.
    FinalizeKey {
        #[arg(long)]
        mpk: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        partial: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt a file under an attribute set.
    Encrypt {
        #[arg(long)]
        mpk: PathBuf,
        #[arg(long = "authority", required = true)]
        authorities: Vec<PathBuf>,
        /// e.g. "1:1,2:3"
        #[arg(long)]
        attrs: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Decrypt {
        #[arg(long)]
        mpk: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Find the registered owner of a key.
    Trace {
        #[arg(long)]
        mpk: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Measured operation counts and sizes against the published table.
    Bench {
        #[arg(long, default_value_t = 2)]
        authorities: u32,
        #[arg(long, default_value_t = 4)]
        k1: u32,
        #[arg(long, default_value_t = 4)]
        k2: u32,
        #[arg(long)]
        threshold: Option<u32>,
        #[arg(long)]
        json: bool,
    },
    /// Win rate of a built-in adversary in the selective-set CPA game.
    Game {
        #[arg(long, value_enum, default_value_t = AdversaryArg::Uniform)]
        adversary: AdversaryArg,
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryArg {
    Uniform,
    Violating,
    Planted,
    Mixing,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::PolicyNotSatisfied => 3,
        Error::ProofRejected => 4,
        Error::UntraceableKey => 5,
        Error::Corruption
        | Error::Version(_)
        | Error::BackendMismatch { .. }
        | Error::Validation(_)
        | Error::TableIntegrity(_)
        | Error::Tampering => 6,
        _ => 1,
    }
}

fn read<B: Backend, T: Artifact<B>>(path: &Path) -> maabe::Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    load(&bytes)
}

fn write_secret<B: Backend, T: Artifact<B>>(path: &Path, x: &T) -> maabe::Result<()> {
    Ok(fs::write(path, save(x))?)
}

fn write_public<B: Backend, T: Artifact<B>>(path: &Path, x: &T) -> maabe::Result<()> {
    Ok(fs::write(path, save_public(x)?)?)
}

fn run<B: Backend>(command: Command, rng: &mut ChaCha20Rng) -> maabe::Result<()> {
    match command {
        Command::Setup { authorities, mpk, msk } => {
            let (public, master) = global_setup::<B, _>(authorities, rng)?;
            write_public(&mpk, &public)?;
            write_secret(&msk, &CaSecret::new(master, rng))?;
        }
        Command::AuthoritySetup {
            index,
            attributes,
            msk,
            secret,
            public,
        } => {
            let mut ca: CaSecret<B> = read(&msk)?;
            let (s, p) = authority::authority_setup::<B, _>(index, attributes, rng)?;
            ca.enroll_authority(index, s.seed().clone());
            write_secret(&secret, &s)?;
            write_public(&public, &p)?;
            write_secret(&msk, &ca)?;
        }
        Command::Register { msk, table, id } => {
            let ca: CaSecret<B> = read(&msk)?;
            TraceTable::register_at(&table, &ca, &Identity::new(id))?;
        }
        Command::RequestKey { mpk, id, state, out } => {
            let mpk: PublicParams<B> = read(&mpk)?;
            let (request, message) = request_key(&mpk, &Identity::new(id), rng);
            write_secret::<B, KeyRequest<B>>(&state, &request)?;
            write_public(&out, &message)?;
        }
        Command::Grant {
            mpk,
            authority,
            id,
            tree,
            out,
        } => {
            let mpk: PublicParams<B> = read(&mpk)?;
            let auth: AuthoritySecret<B> = read(&authority)?;
            let tree: AccessNode = tree.parse()?;
            let share = auth.issue_attribute_keys(&mpk, &Identity::new(id), &tree, rng)?;
            write_secret(&out, &share)?;
        }
        Command::IssueKey {
            mpk,
            msk,
            table,
            request,
            shares,
            out,
        } => {
            let mpk: PublicParams<B> = read(&mpk)?;
            let ca: CaSecret<B> = read(&msk)?;
            let message: IssuanceRequest<B> = read(&request)?;
            let shares = shares
                .iter()
                .map(|p| read::<B, AttributeKeyShare<B>>(p))
                .collect::<maabe::Result<Vec<_>>>()?;
            // issue against a copy, then persist the registration under the lock
            let mut snapshot = if table.exists() { TraceTable::load(&table)? } else { TraceTable::new() };
            let partial = ca_issue(
                &ca,
                &mpk,
                &mut snapshot,
                &message.id,
                &message.commitment,
                &message.proof,
                ChallengeOrigin::Derived,
                shares,
                rng,
            )?;
            TraceTable::register_at(&table, &ca, &message.id)?;
            write_secret(&out, &partial)?;
        }
        Command::FinalizeKey {
            mpk,
            state,
            partial,
            id,
            out,
        } => {
            let mpk: PublicParams<B> = read(&mpk)?;
            let request: KeyRequest<B> = read(&state)?;
            let partial: PartialKey<B> = read(&partial)?;
            let key = finalize_key(&mpk, &request, partial, &Identity::new(id))?;
            write_secret(&out, &key)?;
        }
        Command::Encrypt {
            mpk,
            authorities,
            attrs,
            input,
            out,
        } => {
            let mpk: PublicParams<B> = read(&mpk)?;
            let publics = authorities
                .iter()
                .map(|p| read::<B, AuthorityPublic<B>>(p))
                .collect::<maabe::Result<Vec<_>>>()?;
            let attrs = parse_attribute_set(&attrs)?;
            let plaintext = fs::read(&input)?;
            let ct = encrypt_hybrid(&mpk, &publics, &attrs, &plaintext, rng)?;
            write_public(&out, &ct)?;
        }
        Command::Decrypt { mpk, key, input, out } => {
            let mpk: PublicParams<B> = read(&mpk)?;
            let key: UserKey<B> = read(&key)?;
            let ct: HybridCiphertext<B> = read(&input)?;
            let plaintext = decrypt_hybrid(&mpk, &key, &ct)?;
            fs::write(&out, plaintext)?;
        }
        Command::Trace { mpk, table, key, json } => {
            let mpk: PublicParams<B> = read(&mpk)?;
            let table: TraceTable<B> = TraceTable::load(&table)?;
            let key: UserKey<B> = read(&key)?;
            let id = trace(&mpk, &table, &key)?;
            if json {
                println!("{}", json!({ "identity": id.as_str() }));
            } else {
                println!("{id}");
            }
        }
        Command::Bench {
            authorities,
            k1,
            k2,
            threshold,
            json,
        } => {
            let mut params = BenchParams::new(authorities, k1, k2);
            params.threshold = threshold;
            let report = bench::<B>(&params)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{}", report.to_text());
            }
        }
        Command::Game { adversary, runs, json } => {
            let seed = rand::Rng::gen::<u64>(rng);
            let mut config = GameConfig::default();
            let stats = match adversary {
                AdversaryArg::Uniform => win_rate::<B, _>(|| UniformGuesser, &config, runs, seed),
                AdversaryArg::Violating => win_rate::<B, _>(|| ViolatingAdversary::new(Phase::One), &config, runs, seed),
                AdversaryArg::Planted => {
                    config.plant_key = true;
                    win_rate::<B, _>(PlantedKeyAdversary::default, &config, runs, seed)
                }
                AdversaryArg::Mixing => win_rate::<B, _>(ShareMixingAdversary::default, &config, runs, seed),
            };
            if json {
                println!("{}", serde_json::to_string(&stats).expect("stats serialize"));
            } else {
                println!(
                    "seed {} runs {} wins {} aborts {} win-rate {:.4} ({:+.2} sigma from 1/2)",
                    stats.seed,
                    stats.runs,
                    stats.wins,
                    stats.aborts,
                    stats.win_rate,
                    stats.sigma_from_half()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut rng = match cli.seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    };
    let result = match cli.backend {
        BackendArg::Curve => run::<Bls12>(cli.command, &mut rng),
        BackendArg::Toy => run::<ToyM61>(cli.command, &mut rng),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("maabe: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
