//! Replay the triage session script and print the text summary. With an
//! output directory, every export format is written there.
//!
//! ```text
//! cargo run --example run_session [out-dir]
//! ```

use fria::catalog::parse_catalog;
use fria::fixture;
use fria::session::{report_digest, run_session};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = parse_catalog(fixture::TRIAGE_CATALOG.as_bytes())?;
    let out = run_session(&catalog, fixture::TRIAGE_SCRIPT)?;
    let summary = out.files.iter().find(|f| f.name == "summary.txt").unwrap();
    print!("{}", String::from_utf8_lossy(&summary.bytes));
    println!();
    println!(
        "{} mutations, revision {}, report digest {}",
        out.outcome.mutations,
        out.outcome.revision,
        report_digest(&out.report)
    );
    if let Some(dir) = std::env::args().nth(1) {
        std::fs::create_dir_all(&dir)?;
        for f in &out.files {
            std::fs::write(std::path::Path::new(&dir).join(f.name), &f.bytes)?;
        }
        println!("wrote {} files to {dir}", out.files.len());
    }
    Ok(())
}
