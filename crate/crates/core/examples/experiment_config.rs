//! Build an experiment from TOML, tweak it with overrides, and list the presets.

use lodco::cli::config::ExperimentConfig;
use lodco::cli::presets::Preset;

const TOML: &str = r#"
[system]
rho = 0.4
battery_capacity = 18e-3

[run]
slots = 5000
seeds = 2
policies = ["lodco", "dynamic-gd"]
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_toml_with(TOML, &["system.distance=60".into()])?;
    let p = cfg.params()?;
    println!("V derived from the battery: {:.5e}, theta {:.4e}", p.v, p.theta);
    println!("{}", cfg.to_toml());

    for preset in Preset::ALL {
        let c = preset.config();
        let axis = c.sweep.as_ref().map(|s| format!("{} x{}", s.axis.name(), s.values.len())).unwrap_or_default();
        println!("{:<5} {:<10} policies {}", preset.name(), axis, c.run.policies.len());
    }
    Ok(())
}
