//! Write a synthetic corpus, identify every frame and print the accuracy
//! table per scene kind.

use pdot360::pipeline::{cmd_eval, cmd_identify, cmd_synth, read_jsonl, render_eval_table, GroundTruthLabel, RunConfig};

fn main() -> pdot360::Result<()> {
    let dir = std::path::Path::new("target/example_corpus");
    let cfg = RunConfig {
        seed: 17,
        ..RunConfig::default()
    };
    cmd_synth(10, 1024, dir, &cfg)?;
    let labels: Vec<GroundTruthLabel> = read_jsonl(dir.join("labels.jsonl"))?;
    let mut reports = Vec::new();
    for tau in ["depth:4", "depth:5", "depth"] {
        let run = RunConfig {
            classifier: tau.into(),
            ..cfg.clone()
        };
        let out = cmd_identify(Some(&dir.join("depth")), &run)?;
        reports.push(cmd_eval(&out.verdicts, &labels, tau, "none")?);
    }
    print!("{}", render_eval_table(&reports));
    Ok(())
}
