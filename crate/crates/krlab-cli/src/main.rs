use clap::{Parser, Subcommand};

mod commands;

/// Exact simulator and security analyzer for key-relay and secure network
/// coding protocols on undirected graphs.
#[derive(Parser)]
#[command(name = "krlab", version, about)]
struct Cli {
    /// Output format for reports
    #[arg(long, global = true, default_value = "text", value_parser = ["text", "json"])]
    format: String,

    /// Worker threads for the cover search and the oracle (default:
    /// KRLAB_WORKERS or 1)
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Variable-count bound for the brute-force oracle (max 24)
    #[arg(long, global = true, default_value_t = krlab::sec::DEFAULT_ORACLE_BOUND)]
    oracle_bound: usize,

    /// Write the primary output document to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and analyze a protocol file: soundness, secrecy, verdict
    Analyze {
        /// Protocol document (JSON)
        file: std::path::PathBuf,
        /// Wiretap collection: a JSON file or an inline JSON literal like
        /// '{"members":[["e1"]]}'; defaults to the file's own collection
        /// or the empty member
        #[arg(long)]
        wiretap: Option<String>,
    },
    /// Rewrite a protocol into another setting
    Transform {
        /// One of: lks-to-sc, sc-to-otp, snc-to-krpbysnc, attach-otp
        kind: String,
        /// Source protocol document
        file: std::path::PathBuf,
        /// Sender side per pair for attach-otp, e.g. "u1,u1,u2"
        #[arg(long)]
        senders: Option<String>,
    },
    /// The counterexample graph: build it, run and verify the relay
    /// protocol, diagnose KRP-by-SNC candidates, run the cover search
    G0 {
        #[command(subcommand)]
        sub: G0Command,
    },
    /// Emit a built-in fixture and its analysis
    Demo {
        /// One of: fig1, fig3a, fig3b, g0-flood
        name: String,
        /// Relay length for fig3a
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Brute-force oracles
    Oracle {
        #[command(subcommand)]
        sub: OracleCommand,
    },
    /// Hash-based key verification
    Auth {
        #[command(subcommand)]
        sub: AuthCommand,
    },
}

#[derive(Subcommand)]
enum G0Command {
    /// Emit the topology document (126 nodes, 171 edges)
    Build,
    /// Emit the relay protocol document
    RunLkrp {
        /// Use the message-passing formulation instead of the parity form
        #[arg(long)]
        interactive: bool,
    },
    /// Verify the relay protocol: soundness for all nine pairs and
    /// secrecy against the empty wiretap collection
    Verify,
    /// Run the requirement and path-consistency diagnostics on a
    /// KRP-by-SNC candidate protocol file
    Diagnose { file: std::path::PathBuf },
    /// Exhaust all 5^9 gamma-sequences against the 77 candidate subsets
    CoverSearch,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Compare the rank-based leak with exhaustive mutual information for
    /// every wiretap member
    Mi {
        file: std::path::PathBuf,
        #[arg(long)]
        wiretap: Option<String>,
    },
}

#[derive(Subcommand)]
enum AuthCommand {
    /// Hash a hex key at a point: prints the tag in hex
    Tag {
        #[arg(long)]
        m: u8,
        #[arg(long)]
        ell: usize,
        /// Key bits, hex encoded, consumed most significant bit first
        #[arg(long)]
        key: String,
        /// Hash point in GF(2^m), hex
        #[arg(long)]
        point: String,
    },
    /// Verify two keys via the one-time-padded tag; exit 0 on accept,
    /// 1 on reject
    Verify {
        #[arg(long)]
        m: u8,
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        key_a: String,
        #[arg(long)]
        key_b: String,
        #[arg(long)]
        point: String,
        #[arg(long)]
        pad: String,
    },
}

fn main() {
    // Die quietly when a pipe consumer closes early instead of panicking.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let workers = cli.workers.unwrap_or_else(|| {
        std::env::var("KRLAB_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(1)
    });
    let ctx = commands::Ctx {
        json: cli.format == "json",
        workers: workers.max(1),
        oracle_bound: cli.oracle_bound.min(krlab::sec::MAX_ORACLE_BOUND),
        out: cli.out,
    };
    let code = match cli.command {
        Command::Analyze { file, wiretap } => commands::analyze(&ctx, &file, wiretap.as_deref()),
        Command::Transform {
            kind,
            file,
            senders,
        } => commands::transform(&ctx, &kind, &file, senders.as_deref()),
        Command::G0 { sub } => match sub {
            G0Command::Build => commands::g0_build(&ctx),
            G0Command::RunLkrp { interactive } => commands::g0_run_lkrp(&ctx, interactive),
            G0Command::Verify => commands::g0_verify(&ctx),
            G0Command::Diagnose { file } => commands::g0_diagnose(&ctx, &file),
            G0Command::CoverSearch => commands::g0_cover_search(&ctx),
        },
        Command::Demo { name, n } => commands::demo(&ctx, &name, n),
        Command::Oracle { sub } => match sub {
            OracleCommand::Mi { file, wiretap } => {
                commands::oracle_mi(&ctx, &file, wiretap.as_deref())
            }
        },
        Command::Auth { sub } => match sub {
            AuthCommand::Tag { m, ell, key, point } => {
                commands::auth_tag(&ctx, m, ell, &key, &point)
            }
            AuthCommand::Verify {
                m,
                ell,
                key_a,
                key_b,
                point,
                pad,
            } => commands::auth_verify(&ctx, m, ell, &key_a, &key_b, &point, &pad),
        },
    };
    std::process::exit(code);
}
