use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fewstate_cli::config::Config;
use fewstate_cli::io::write_stream_to;
use fewstate_cli::runner::{compare, run, sweep, write_csv, Row};
use fewstate_cli::source::Source;
use fewstate_cli::CliError;

#[derive(Parser)]
#[command(name = "fewstate", version, about = "Metered streaming-sketch experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated stream to a stream file.
    Gen(Common),
    /// Run one algorithm for a number of seeded trials.
    Run(Common),
    /// Run over a list of n, m or eps values and fit the state-change slope.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// n, m or eps.
        #[arg(long)]
        vary: Option<String>,
        /// Comma-separated values, at least 4.
        #[arg(long)]
        values: Option<String>,
    },
    /// Run several algorithms on the same streams.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated algorithm names.
        #[arg(long)]
        algos: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// key=value file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// paper or practical.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Stream file or generator spec such as zipf:n=4096,m=32768,s=1.1.
    #[arg(long)]
    stream: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Any other config key, as key=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn config(&self, extra: &[(&str, &Option<String>)]) -> Result<Config, CliError> {
        let mut c = Config::default();
        if let Some(path) = &self.config {
            let text = Config::load(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            c.apply_text(&text, &path.display().to_string())?;
        }
        let flags = [
            ("algo", &self.algo),
            ("p", &self.p),
            ("eps", &self.eps),
            ("delta", &self.delta),
            ("preset", &self.preset),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("stream", &self.stream),
            ("out", &self.out),
        ];
        for (key, value) in flags.iter().chain(extra) {
            if let Some(v) = value {
                c.set(key, v)?;
            }
        }
        for kv in &self.set {
            c.apply_text(kv, "--set")?;
        }
        Ok(c)
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn emit(rows: &[Row], config: &Config) -> Result<(), CliError> {
    write_csv(rows, output(config.out.as_deref())?)?;
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(common) => {
            let c = common.config(&[])?;
            let stream = Source::parse(&c.stream)?.build(c.seed, c.p)?;
            let target = c.out.as_deref().map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
            write_stream_to(output(c.out.as_deref())?, &stream).map_err(|source| CliError::Io { path: target, source })
        }
        Command::Run(common) => {
            let c = common.config(&[])?;
            emit(&run(&c)?, &c)
        }
        Command::Sweep { common, vary, values } => {
            let c = common.config(&[("vary", &vary), ("values", &values)])?;
            let (rows, fit) = sweep(&c)?;
            emit(&rows, &c)?;
            eprintln!("slope={:.4} stderr={:.4} points={}", fit.slope, fit.stderr, fit.points);
            Ok(())
        }
        Command::Compare { common, algos } => {
            let c = common.config(&[("algos", &algos)])?;
            emit(&compare(&c)?, &c)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
