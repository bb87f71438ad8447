use std::io::Write;
use std::process::ExitCode;

use toric_mirror_core::report::{run_args, PRECISION_ENV};

fn main() -> ExitCode {
    let precision = std::env::var(PRECISION_ENV).ok();
    let outcome = match run_args(std::env::args_os(), precision.as_deref()) {
        Ok(o) => o,
        Err(e) => e.exit(),
    };
    if let Some((path, text)) = &outcome.csv {
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    for w in outcome.report["warnings"].as_array().into_iter().flatten() {
        if let Some(w) = w.as_str() {
            eprintln!("warning: {w}");
        }
    }
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(outcome.to_json().as_bytes()).is_err() {
        return ExitCode::from(1);
    }
    ExitCode::from(outcome.exit_code as u8)
}
