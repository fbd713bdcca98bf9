use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use gridforge::levelgen::{GenParams, OreCounts};
use gridforge::rollout::Policy;
use gridforge_cli::serve::Server;
use gridforge_cli::{CliError, RolloutArgs, DEFAULT_PORT, EXIT_IO, EXIT_OK};

#[derive(Parser)]
#[command(name = "gridforge", version, about = "Grid-world game engine driven by GDY documents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Random,
    Noop,
}

#[derive(clap::Args, Clone)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 24)]
    width: u32,
    #[arg(long, default_value_t = 24)]
    height: u32,
    #[arg(long)]
    tree_threshold: Option<f64>,
    #[arg(long)]
    stone_threshold: Option<f64>,
    #[arg(long)]
    water_threshold: Option<f64>,
    #[arg(long)]
    lava_threshold: Option<f64>,
    #[arg(long)]
    coal: Option<u32>,
    #[arg(long)]
    iron: Option<u32>,
    #[arg(long)]
    diamond: Option<u32>,
}

impl GenArgs {
    fn params(&self) -> GenParams {
        let d = GenParams::new(self.seed, self.width, self.height);
        GenParams {
            tree_threshold: self.tree_threshold.unwrap_or(d.tree_threshold),
            stone_threshold: self.stone_threshold.unwrap_or(d.stone_threshold),
            water_threshold: self.water_threshold.unwrap_or(d.water_threshold),
            lava_threshold: self.lava_threshold.unwrap_or(d.lava_threshold),
            ore_counts: OreCounts {
                coal: self.coal.unwrap_or(d.ore_counts.coal),
                iron: self.iron.unwrap_or(d.ore_counts.iron),
                diamond: self.diamond.unwrap_or(d.ore_counts.diamond),
            },
            ..d
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a GDY document; prints diagnostics as JSON.
    Validate {
        /// Path, or `builtin:sokoban` / `builtin:escape_room`.
        gdy: String,
    },
    /// Replay a trajectory file and print the report.
    Replay {
        gdy: String,
        trajectory: PathBuf,
        /// Exit 3 when the stored hash or reward does not match.
        #[arg(long)]
        verify: bool,
    },
    /// Play in the terminal, one key per action.
    Play {
        gdy: String,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        level_string: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "trajectory.json")]
        record_path: PathBuf,
    },
    /// Write generated EscapeRoom levels and a manifest.
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scripted policy and print episode statistics.
    Rollout {
        gdy: String,
        #[arg(long, default_value_t = 1)]
        episodes: usize,
        #[arg(long, value_enum, default_value = "random")]
        policy: PolicyArg,
        /// Seeds the policy and the first reset.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        level_string: Option<String>,
        /// Reset into generated levels of this size (`WxH`).
        #[arg(long)]
        generator: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        max_len: u64,
        /// Time single-thread steps instead of collecting statistics.
        #[arg(long)]
        bench: bool,
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
    },
    /// Serve the JSON session protocol over HTTP.
    Serve {
        #[arg(long, env = "GRIDFORGE_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

fn parse_size(text: &str) -> Result<(u32, u32), CliError> {
    let (w, h) = text.split_once(['x', 'X']).ok_or_else(|| CliError::domain(format!("bad size `{text}`, want WxH")))?;
    let dim = |s: &str| s.trim().parse().map_err(|_| CliError::domain(format!("bad size `{text}`")));
    Ok((dim(w)?, dim(h)?))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Validate { gdy } => gridforge_cli::validate(&gdy, &mut out),
        Command::Replay { gdy, trajectory, verify } => gridforge_cli::replay(&gdy, &trajectory, verify, &mut out),
        Command::Play { gdy, level, level_string, seed, record_path } => {
            drop(out);
            gridforge_cli::run_play(&gdy, gridforge_cli::reset_options(level, level_string, None, seed), record_path)
        }
        Command::Generate { gen, count, out: dir } => gridforge_cli::generate(&gen.params(), count, &dir, &mut out),
        Command::Rollout { gdy, episodes, policy, seed, level, level_string, generator, max_len, bench, steps } => {
            let generator = match generator {
                Some(size) => {
                    let (w, h) = parse_size(&size)?;
                    Some(GenParams::new(seed, w, h))
                }
                None => None,
            };
            let args = RolloutArgs {
                reset: gridforge_cli::reset_options(level, level_string, generator, seed),
                episodes,
                policy: match policy {
                    PolicyArg::Random => Policy::Random,
                    PolicyArg::Noop => Policy::Noop,
                },
                seed,
                max_len,
                bench_steps: bench.then_some(steps),
            };
            gridforge_cli::run_rollout(&gdy, &args, &mut out)
        }
        Command::Serve { port, host } => {
            let runtime = tokio::runtime::Runtime::new()?;
            let addr = SocketAddr::new(host, port);
            runtime
                .block_on(gridforge_cli::http::serve(addr, Arc::new(Server::default())))
                .map_err(|e| CliError::io(addr, e))?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_IO as u8))
}
