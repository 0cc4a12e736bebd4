//! Run a reproduction batch the way `lfa-tune reproduce` does and print the
//! consolidated report. Output goes under the system temp directory.
//!
//! ```bash
//! cargo run --release --example reproduce -- fig-4.2
//! ```

use lfa_tune::cli::{cmd_reproduce, CliError};

pub fn run(id: &str) -> Result<(), CliError> {
    let out = std::env::temp_dir().join("lfa-tune-reproduce");
    let report = cmd_reproduce(id, &out)?;
    print!("{}", report.render());
    println!("files written to {}", out.join(id).display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), CliError> {
    let id = std::env::args().nth(1).unwrap_or_else(|| "fig-4.2".into());
    run(&id)
}
