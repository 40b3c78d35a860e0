//! Command-line front end: `validate`, `run`, `report` and `serve`.
//!
//! Exit codes: 0 success, 1 domain error (validation findings, gate
//! violations, unknown assessment), 2 input error (unreadable or malformed
//! files, bad arguments).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::catalog::{parse_catalog, validate_catalog, Catalog};
use crate::error::Error;
use crate::report::{export, ExportFile, ExportFormat};
use crate::session::{self, parse_script};
use crate::store::{AssessmentStore, FsStore, MemoryStore};
use crate::workflow::Workflow;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fria", version, about = "Gate-based fundamental rights impact assessment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Check a catalog; prints one finding per line.
    Validate { catalog: PathBuf },
    /// Replay a session script and write the report in every format.
    Run {
        catalog: PathBuf,
        script: PathBuf,
        out_dir: PathBuf,
        /// Persist the assessment here instead of in memory.
        #[arg(long, env = "FRIA_STORE_ROOT")]
        store_root: Option<PathBuf>,
    },
    /// Re-export a stored assessment.
    Report {
        assessment_id: String,
        #[arg(long, default_value = "canonical")]
        format: ExportFormat,
        #[arg(long, env = "FRIA_CATALOG")]
        catalog: PathBuf,
        #[arg(long, env = "FRIA_STORE_ROOT", default_value = "fria-store")]
        store_root: PathBuf,
        /// Write files here; without it the export goes to stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "FRIA_LISTEN", default_value = "127.0.0.1:8080")]
        listen: String,
        #[arg(long, env = "FRIA_STORE_ROOT", default_value = "fria-store")]
        store_root: PathBuf,
        #[arg(long, env = "FRIA_CATALOG")]
        catalog: PathBuf,
    },
}

impl clap::ValueEnum for ExportFormat {
    fn value_variants<'a>() -> &'a [Self] {
        &ExportFormat::ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(match self {
            ExportFormat::Canonical => clap::builder::PossibleValue::new("canonical"),
            ExportFormat::CsvBundle => clap::builder::PossibleValue::new("csv"),
            ExportFormat::TextSummary => clap::builder::PossibleValue::new("text"),
        })
    }
}

/// Exit code for an engine error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Catalog(_) | Error::Script { .. } | Error::Io(_) | Error::Corrupt { .. } | Error::CorruptAudit(_) => {
            EXIT_INPUT
        }
        _ => EXIT_DOMAIN,
    }
}

fn report_error(err: &Error, stderr: &mut dyn Write) -> i32 {
    let _ = writeln!(stderr, "error[{}]: {err}", err.rule_id());
    exit_code(err)
}

fn load_catalog(path: &Path) -> Result<Catalog, Error> {
    let bytes = std::fs::read(path)?;
    Ok(parse_catalog(&bytes)?)
}

fn write_files(dir: &Path, files: &[ExportFile]) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    for f in files {
        std::fs::write(dir.join(f.name), &f.bytes)?;
    }
    Ok(())
}

/// Runs a parsed command line. `serve` blocks until the server stops.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match cli.command {
        CliCommand::Validate { catalog } => validate(&catalog, stdout, stderr),
        CliCommand::Run {
            catalog,
            script,
            out_dir,
            store_root,
        } => match run_session(&catalog, &script, &out_dir, store_root.as_deref(), stdout) {
            Ok(()) => EXIT_OK,
            Err(e) => report_error(&e, stderr),
        },
        CliCommand::Report {
            assessment_id,
            format,
            catalog,
            store_root,
            out_dir,
        } => match report(
            &assessment_id,
            format,
            &catalog,
            &store_root,
            out_dir.as_deref(),
            stdout,
        ) {
            Ok(()) => EXIT_OK,
            Err(e) => report_error(&e, stderr),
        },
        CliCommand::Serve {
            listen,
            store_root,
            catalog,
        } => match serve(&listen, &store_root, &catalog, stdout) {
            Ok(()) => EXIT_OK,
            Err(e) => report_error(&e, stderr),
        },
    }
}

fn validate(path: &Path, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let catalog = match load_catalog(path) {
        Ok(c) => c,
        Err(e) => return report_error(&e, stderr),
    };
    let report = validate_catalog(&catalog);
    for f in &report.findings {
        let _ = writeln!(stdout, "{}\t{}\t{}", f.path, f.rule, f.message);
    }
    if report.is_valid() {
        let _ = writeln!(stdout, "ok: 0 findings");
        EXIT_OK
    } else {
        EXIT_DOMAIN
    }
}

fn run_session(
    catalog: &Path,
    script: &Path,
    out_dir: &Path,
    store_root: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), Error> {
    let catalog = load_catalog(catalog)?;
    let script = parse_script(&std::fs::read_to_string(script)?)?;
    let output = match store_root {
        Some(root) => session::run_with(&mut Workflow::new(catalog, FsStore::open(root)?), &script)?,
        None => session::run_with(&mut Workflow::new(catalog, MemoryStore::new()), &script)?,
    };
    write_files(out_dir, &output.files)?;
    let _ = writeln!(
        stdout,
        "{}: {:?} report at revision {}, {} files in {}",
        output.outcome.assessment_id,
        output.report.status,
        output.outcome.revision,
        output.files.len(),
        out_dir.display()
    );
    Ok(())
}

fn report(
    id: &str,
    format: ExportFormat,
    catalog: &Path,
    store_root: &Path,
    out_dir: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), Error> {
    let catalog = load_catalog(catalog)?;
    if !store_root.is_dir() {
        return Err(Error::NotFound(format!("store {}", store_root.display())));
    }
    let workflow = Workflow::new(catalog, FsStore::open(store_root)?);
    let files = export(&workflow.report(id)?, format);
    match out_dir {
        Some(dir) => {
            write_files(dir, &files)?;
            for f in &files {
                let _ = writeln!(stdout, "{}", dir.join(f.name).display());
            }
        }
        None if files.len() == 1 => stdout.write_all(&files[0].bytes)?,
        None => {
            for f in &files {
                writeln!(stdout, "==> {} <==", f.name)?;
                stdout.write_all(&f.bytes)?;
            }
        }
    }
    Ok(())
}

fn serve(listen: &str, store_root: &Path, catalog: &Path, stdout: &mut dyn Write) -> Result<(), Error> {
    let catalog = load_catalog(catalog)?;
    let store: Arc<dyn AssessmentStore> = Arc::new(FsStore::open(store_root)?);
    let router = crate::service::router(catalog, store);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(listen).await?;
        writeln!(stdout, "listening on http://{}", listener.local_addr()?)?;
        stdout.flush()?;
        crate::service::serve(listener, router).await?;
        Ok(())
    })
}
