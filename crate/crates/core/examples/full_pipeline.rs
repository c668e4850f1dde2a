//! Every stage of a scenario into a run directory.
//!
//! `cargo run --release --example full_pipeline -- fig7 out/fig7`
use std::path::PathBuf;

use covhole::harness::{run_pipeline, Scenario};

fn main() -> covhole::Result<()> {
    let mut args = std::env::args().skip(1);
    let sc = Scenario::resolve(&args.next().unwrap_or_else(|| "fig7".into()))?;
    let dir = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("covhole-run"));
    std::fs::create_dir_all(&dir)?;
    let s = run_pipeline(&sc, &dir)?;
    print!("{}", s.to_text());
    println!("artifacts in {}", dir.display());
    Ok(())
}
