//! Runs a `verify` job the way the command-line tool does and lists its
//! output files.

use std::fs;

use chronoslyap::cli::{run, CommandKind, InitialCondition, JobSpec};

fn main() -> chronoslyap::Result<()> {
    let dir = std::env::temp_dir().join("chronoslyap-cli-job");
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("ts.json"), r#"{"kind":"h_uniform","h":0.5,"window":[0,10]}"#)?;
    fs::write(dir.join("system.json"), r#"{"n":2,"A":{"constant":[[-0.8,0.3],[-0.3,-0.8]]}}"#)?;
    fs::write(dir.join("cost.json"), r#"{"n":2,"M":{"constant":[[1,0],[0,2]]}}"#)?;

    let job = JobSpec {
        command: CommandKind::Verify,
        ts: vec![dir.join("ts.json")],
        system: dir.join("system.json"),
        cost: Some(dir.join("cost.json")),
        ic: InitialCondition::Stationary,
        x0: Some(vec![1.0, 1.0]),
        lambda_test: Some(0.5),
        dense_step: 1e-3,
        tail_tol: None,
        horizon: None,
        t0: None,
        out: dir.join("out"),
    };
    let outcome = run(&job)?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    println!("{}", serde_json::to_string_pretty(&outcome.summary).unwrap_or_default());
    Ok(())
}
