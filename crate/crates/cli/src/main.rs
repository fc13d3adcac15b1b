use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frobthresh_cli::{
    cmd_annihilator, cmd_degenerate, cmd_scan, cmd_vr, parse_bytes, parse_family_range, parse_list, spec_from_args,
    CliError, Emitted, Format, RunConfig,
};
use frobthresh_core::weights::{
    euler_characteristic, p_adic_decompose, p_adic_decompose_with_tail, to_fundamental, vanishing_window, Weight,
};
use frobthresh_core::{truncated_hilbert_series, Family};

#[derive(Parser)]
#[command(name = "frobthresh", version, about = "Socle degrees of R/m^[q] and diagonal F-threshold tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Socle degree v_R(q) for one ring.
    Vr {
        family: Family,
        /// `n` for square families, `m n` for maximal minors.
        #[arg(num_args = 1..=2, required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        s: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Memory cap in bytes (suffixes K, M, G accepted).
        #[arg(long, value_parser = parse_cap)]
        mem_cap: Option<u64>,
    },
    /// Threshold table over families, primes and Frobenius levels.
    Scan(ScanArgs),
    /// Least-degree annihilator of the defining equation in S/m^[q].
    Annihilator {
        family: Family,
        n: usize,
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        s: u32,
    },
    /// Socle degrees along the Pfaffian degeneration.
    Degenerate {
        n: usize,
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        s: u32,
        /// Residues of t to evaluate (default: all of F_p).
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<u32>>,
    },
    /// Weight combinatorics for GL_n.
    #[command(subcommand)]
    Weights(WeightsCommand),
    /// Hilbert function of S/m^[q] in r variables.
    Hilbert {
        r: usize,
        #[arg(long)]
        q: u32,
    },
}

#[derive(Args)]
struct ScanArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `family:sizes`, e.g. `symmetric:2-3` or `maximal_minors:3x2`; repeatable.
    #[arg(long = "family")]
    families: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    primes: Option<Vec<u32>>,
    #[arg(long)]
    s_max: Option<u32>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = parse_cap)]
    mem_cap: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write 0 in the wall_ms column so output is byte-reproducible.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Subcommand)]
enum WeightsCommand {
    /// Coordinates in the basis of fundamental weights.
    Fundamental {
        #[arg(allow_hyphen_values = true)]
        weight: String,
    },
    /// Base-p expansion into restricted layers.
    Padic {
        weight: String,
        #[arg(long)]
        p: u64,
        /// Stop after s restricted layers and put the remainder on top.
        #[arg(long)]
        s: Option<u32>,
    },
    /// Euler characteristic of the line bundle O(y) on the flag variety.
    Euler {
        #[arg(allow_hyphen_values = true)]
        weight: String,
    },
    /// Vanishing hypotheses for H^k(Fl_n, O(lambda, e)), k <= j.
    Window {
        weight: String,
        #[arg(long, allow_hyphen_values = true)]
        e: i64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        j: usize,
    },
}

fn parse_cap(s: &str) -> Result<u64, String> {
    parse_bytes(s).map_err(|e| e.to_string())
}

fn parse_weight(s: &str) -> Result<Weight, CliError> {
    let entries: Vec<i64> = parse_list(s)?;
    if entries.is_empty() {
        return Err(CliError::Usage(format!("'{s}' is not a weight")));
    }
    Ok(Weight::new(entries))
}

fn weight_err(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn text(t: String) -> Emitted {
    Emitted { text: t, exit_code: 0 }
}

fn run_weights(cmd: WeightsCommand) -> Result<Emitted, CliError> {
    match cmd {
        WeightsCommand::Fundamental { weight } => {
            let coords = to_fundamental(&parse_weight(&weight)?).map_err(weight_err)?;
            let shown: Vec<String> = coords.iter().map(ToString::to_string).collect();
            Ok(text(format!("{}\n", shown.join(","))))
        }
        WeightsCommand::Padic { weight, p, s } => {
            let lambda = parse_weight(&weight)?;
            let dec = match s {
                Some(s) => p_adic_decompose_with_tail(&lambda, p, s),
                None => p_adic_decompose(&lambda, p),
            }
            .map_err(weight_err)?;
            Ok(text(format!("{dec}\n")))
        }
        WeightsCommand::Euler { weight } => Ok(text(format!("{}\n", euler_characteristic(&parse_weight(&weight)?)))),
        WeightsCommand::Window { weight, e, n, q, j } => {
            let holds = vanishing_window(&parse_weight(&weight)?, e, n, q, j).map_err(weight_err)?;
            Ok(text(format!("{holds}\n")))
        }
    }
}

fn scan_config(args: ScanArgs) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    if let Some(path) = &args.config {
        config.apply_file(path)?;
    }
    config.apply_env()?;
    if !args.families.is_empty() {
        config.ranges = args.families.iter().map(|f| parse_family_range(f)).collect::<Result<_, _>>()?;
    }
    if let Some(primes) = args.primes {
        config.primes = primes;
    }
    if let Some(s) = args.s_max {
        config.s_max = s;
    }
    if let Some(t) = args.threads {
        config.threads = Some(t);
    }
    if let Some(cap) = args.mem_cap {
        config.mem_cap = cap;
    }
    if let Some(f) = args.format {
        config.format = f;
    }
    if let Some(o) = args.output {
        config.output = Some(o);
    }
    if args.no_timings {
        config.timings = false;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<Emitted, CliError> {
    match cli.command {
        Command::Vr { family, sizes, p, s, format, mem_cap } => {
            let spec = spec_from_args(family, &sizes, p, s)?;
            let mut config = RunConfig::default();
            config.apply_env()?;
            cmd_vr(&spec, mem_cap.unwrap_or(config.mem_cap), format)
        }
        Command::Scan(args) => cmd_scan(&scan_config(args)?),
        Command::Annihilator { family, n, p, s } => cmd_annihilator(family, n, p, s),
        Command::Degenerate { n, p, s, t } => cmd_degenerate(n, p, s, t.as_deref()),
        Command::Weights(cmd) => run_weights(cmd),
        Command::Hilbert { r, q } => {
            if r == 0 || !(2..=frobthresh_core::poly::MAX_Q).contains(&q) {
                return Err(CliError::Usage(format!("need r >= 1 and 2 <= q <= {}", frobthresh_core::poly::MAX_Q)));
            }
            let shown: Vec<String> = truncated_hilbert_series(r, q).iter().map(ToString::to_string).collect();
            Ok(text(format!("{}\n", shown.join(","))))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("frobthresh: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
