//! Decoupling distance against the pulse interval at fixed runtime, compared
//! with the unprotected run.

use aqc_shield::runner::{run_experiment, ExperimentConfig, GroupPreset};

fn main() -> aqc_shield::Result<()> {
    let base = ExperimentConfig::parse(
        r#"
[model]
preset = "universal-2local"
coupling = 0.1
seed = 7
[protocol.explicit]
tau = 0.4
total_time = 9.6
[run]
tolerance = 1e-8
"#,
    )?;
    let mut none = base.clone();
    none.protocol.group = GroupPreset::None;
    println!("no decoupling: d_D = {:.4e}", run_experiment(&none)?.report.d_d);

    let mut prev: Option<f64> = None;
    for tau in [0.4, 0.2, 0.1, 0.05] {
        let mut cfg = base.clone();
        cfg.protocol.explicit.as_mut().unwrap().tau = tau;
        let d = run_experiment(&cfg)?.report.d_d;
        let ratio = prev.map(|p| format!("  (×{:.2})", p / d)).unwrap_or_default();
        println!("tau = {tau:<5} d_D = {d:.4e}{ratio}");
        prev = Some(d);
    }
    Ok(())
}
