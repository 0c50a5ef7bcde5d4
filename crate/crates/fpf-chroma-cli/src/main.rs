use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fpf_chroma_cli::commands::{self, DiscreteMode};

/// Certified bright colorings of fixed-point-free multivalued maps on
/// boxed domains.
#[derive(Parser)]
#[command(name = "fpf-chroma", version, about)]
struct Cli {
    /// Cap the rayon thread pool (1 forces fully sequential execution;
    /// outputs are identical at any setting).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify that the configured map is fixed-point free.
    Certify {
        #[arg(long, short)]
        config: PathBuf,
        /// Certificate output path.
        #[arg(long, short, default_value = "certify.json")]
        out: PathBuf,
    },
    /// Certify, color, verify, and emit the coloring certificate.
    Color {
        #[arg(long, short)]
        config: PathBuf,
        /// Coloring certificate output path.
        #[arg(long, short, default_value = "coloring.json")]
        out: PathBuf,
        /// Verification report output path.
        #[arg(long, default_value = "verify.json")]
        report: PathBuf,
        /// Also write an SVG plot here (k <= 2).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Re-check an existing coloring certificate.
    Verify {
        #[arg(long, short)]
        config: PathBuf,
        /// Coloring certificate produced by `color`.
        #[arg(long)]
        certificate: PathBuf,
        /// Verification report output path (optional).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Override the required class margin.
        #[arg(long)]
        min_margin: Option<f64>,
    },
    /// Print the color-count bound for dimension m and branch count n.
    Bound { m: u32, n: u32 },
    /// Color finite structures (image-list files or the doubling map).
    Discrete {
        /// single | multi | doubling
        #[arg(long, default_value = "multi")]
        mode: String,
        /// Input file of `v: a b c` lines (single/multi modes).
        input: Option<PathBuf>,
        /// N for doubling mode.
        #[arg(long)]
        n: Option<u32>,
        /// Write the coloring here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render an SVG plot from an existing coloring certificate.
    Plot {
        #[arg(long, short)]
        config: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long, short, default_value = "plot.svg")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter("FPF_CHROMA_LOG"),
    )
    .init();

    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(commands::EXIT_INPUT as u8);
        }
    }

    let code = match cli.command {
        Command::Certify { config, out } => commands::cmd_certify(&config, &out),
        Command::Color { config, out, report, svg } => {
            commands::cmd_color(&config, &out, &report, svg.as_deref())
        }
        Command::Verify { config, certificate, report, min_margin } => {
            commands::cmd_verify(&config, &certificate, report.as_deref(), min_margin)
        }
        Command::Bound { m, n } => commands::cmd_bound(m, n),
        Command::Discrete { mode, input, n, out } => {
            let mode = match mode.as_str() {
                "single" => DiscreteMode::Single,
                "multi" => DiscreteMode::Multi,
                "doubling" => match n {
                    Some(n) => DiscreteMode::Doubling(n),
                    None => {
                        eprintln!("error: doubling mode requires --n");
                        return ExitCode::from(commands::EXIT_INPUT as u8);
                    }
                },
                other => {
                    eprintln!("error: unknown mode `{other}`");
                    return ExitCode::from(commands::EXIT_INPUT as u8);
                }
            };
            commands::cmd_discrete(mode, input.as_deref(), out.as_deref())
        }
        Command::Plot { config, certificate, out } => {
            commands::cmd_plot(&config, &certificate, &out)
        }
    };
    ExitCode::from(code as u8)
}
