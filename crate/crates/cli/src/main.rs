use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use s1phase_cli::error::{CliError, EXIT_CONFIG, EXIT_OK};
use s1phase_cli::{load_config, run_batch, Kind};

#[derive(Parser)]
#[command(name = "s1phase", version, about = "Phase-field experiments for circle-valued maps")]
struct Cli {
    /// Print the experiment kinds and exit.
    #[arg(long)]
    list_kinds: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment of a config file.
    Run {
        config: PathBuf,
        /// Output root; each experiment writes to its own subdirectory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the seed of every experiment.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (defaults to the number of cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn run(config: PathBuf, out: PathBuf, seed: Option<u64>, jobs: Option<usize>) -> i32 {
    let mut cfgs = match load_config(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Some(s) = seed {
        cfgs.iter_mut().for_each(|c| c.seed = s);
    }
    if let Some(j) = jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return EXIT_CONFIG;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    }
    let mut status = EXIT_OK;
    for result in run_batch(&cfgs, &out) {
        match result {
            Ok(o) => println!(
                "{}: ok, {} files in {}\n{}",
                o.name,
                o.files.len(),
                out.join(&o.name).display(),
                serde_json::to_string_pretty(&o.summary).unwrap_or_default()
            ),
            Err(e) => {
                eprintln!("error: {}", chain(&e));
                if status == EXIT_OK {
                    status = e.exit_code();
                }
            }
        }
    }
    status
}

fn chain(e: &CliError) -> String {
    let mut s = e.to_string();
    let mut src = std::error::Error::source(e);
    while let Some(inner) = src {
        let msg = inner.to_string();
        if !s.contains(&msg) {
            s.push_str(": ");
            s.push_str(&msg);
        }
        src = inner.source();
    }
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_kinds {
        for k in Kind::ALL {
            println!("{:<18} {}", k.tag(), k.description());
        }
        return ExitCode::SUCCESS;
    }
    let code = match cli.command {
        Some(Command::Run { config, out, seed, jobs }) => run(config, out, seed, jobs),
        None => {
            eprintln!("error: nothing to do; see --help");
            EXIT_CONFIG
        }
    };
    ExitCode::from(code as u8)
}
