//! Drive the same commands as the `varexp` binary from code: load a TOML
//! config, solve it into a directory, then sweep the time step.
//!
//! ```bash
//! cargo run --release --example config_driven_runs
//! ```

use std::path::Path;

use varexp_parabolic::cli::{self, Command, Invocation};
use varexp_parabolic::Result;

fn main() -> Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let out = std::env::temp_dir().join("varexp-example");

    let loaded = cli::config::load(&root.join("heat.toml"), None)?;
    let outcome = cli::solve_into(&loaded.config, &loaded.base, &out.join("heat"))?;
    println!(
        "heat: exit {}, t = {}, L2(Q_T) error {:?}",
        outcome.status.code(),
        outcome.final_t,
        outcome.l2_error
    );

    let inv = Invocation {
        config: root.join("sweep.toml"),
        out: Some(out.join("sweep")),
        ..Invocation::default()
    };
    let status = cli::run(Command::Sweep, &inv);
    println!("sweep: exit {}", status.code());
    print!("{}", std::fs::read_to_string(out.join("sweep/sweep.csv"))?);
    Ok(())
}
