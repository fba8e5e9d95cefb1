//! The `qshift` command-line tool.
//!
//! Exit codes: 0 success, 1 a simulation condition or I/O failed, 2 bad
//! arguments or experiment file, 3 input data that cannot be analysed.

pub mod analysis;
pub mod args;
pub mod error;
pub mod experiment;
pub mod input;
pub mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub use args::{Cli, Command};
pub use error::{CliError, Result};

use experiment::Experiment;

fn sink(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

fn simulate(args: &args::SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let mut exp = Experiment::load(&args.experiment)?;
    exp.override_sizes(args.n_sims, args.nboot)?;
    let results = experiment::run(&exp);
    sink(args.output.as_deref(), out, |w| {
        experiment::write_csv(&exp, &results, w)
    })?;
    if let Some(path) = &args.metadata {
        let meta = experiment::metadata(&args.experiment, &exp, &results);
        sink(Some(path), out, |w| {
            serde_json::to_writer_pretty(&mut *w, &meta)?;
            writeln!(w)?;
            Ok(())
        })?;
    }
    experiment::failures(&results).map_or(Ok(()), Err)
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Decinter(a) => sink(a.output.as_deref(), out, |w| analysis::cmd_decinter(a, w)),
        Command::Iband(a) => sink(a.output.as_deref(), out, |w| analysis::cmd_iband(a, w)),
        Command::Plotdata(a) => sink(a.output.as_deref(), out, |w| analysis::cmd_plotdata(a, w)),
        Command::Simulate(a) => simulate(a, out),
    }
}

/// Runs a parsed command line, writing data to `out` unless `--output` is set.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match cli.threads {
        None => dispatch(&cli.command, out),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Failed(format!("thread pool: {e}")))?;
            let mut buf = Vec::new();
            let result = pool.install(|| dispatch(&cli.command, &mut buf));
            out.write_all(&buf)?;
            result
        }
    }
}
