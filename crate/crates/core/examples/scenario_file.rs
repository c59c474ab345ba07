//! Loads a JSON scenario, as the command-line tool does, and runs it.
//!
//! `cargo run --release --example scenario_file -- crates/core/examples/scenarios/ring_asuman.json`

use asuman::cli::ScenarioFile;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/examples/scenarios/complete_asuman.json"
        )
        .into()
    });
    let mut scenario = ScenarioFile::from_json(&std::fs::read_to_string(&path)?)?;
    scenario.run.replications = scenario.run.replications.min(8);
    let exp = scenario.experiment()?;
    let stats = exp.run(0)?;
    let e = stats.network();
    println!("{path}");
    println!(
        "{} nodes, {}: mean age {:.3} ± {:.3} over {} replications",
        exp.spec.n(),
        exp.spec.policy.name(),
        e.mean,
        e.stderr.unwrap_or(0.0),
        stats.replications()
    );
    Ok(())
}
