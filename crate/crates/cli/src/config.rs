//! Scenario files.
//!
//! A file is either a complete scenario (`m0`, `[grid]`, `[initial]`, ...)
//! or a reference to a named preset with optional `[output]` / `[solver]`
//! overrides:
//!
//! ```toml
//! preset = "riemann_pure_fluid"
//! [output]
//! interval = 0.05
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use bvlasov_core::config::{OutputSpec, SolverSpec};
use bvlasov_core::{presets, ScenarioConfig};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetFile {
    preset: String,
    #[serde(default)]
    output: Option<OutputSpec>,
    #[serde(default)]
    solver: Option<SolverSpec>,
}

pub fn parse(text: &str, origin: &str) -> Result<ScenarioConfig> {
    let table: toml::Table =
        toml::from_str(text).with_context(|| format!("{origin}: not valid TOML"))?;
    let cfg = if table.contains_key("preset") {
        let file: PresetFile =
            toml::from_str(text).with_context(|| format!("{origin}: invalid preset reference"))?;
        let mut cfg = presets::by_name(&file.preset).with_context(|| origin.to_string())?;
        if let Some(out) = file.output {
            cfg.output = out;
        }
        if let Some(solver) = file.solver {
            cfg.solver = solver;
        }
        cfg
    } else {
        toml::from_str::<ScenarioConfig>(text)
            .with_context(|| format!("{origin}: invalid scenario"))?
    };
    cfg.validate()
        .with_context(|| format!("{origin}: invalid scenario"))?;
    if cfg.name.is_empty() {
        bail!("{origin}: name: must be non-empty");
    }
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
name = "bump"
m0 = 1.0

[grid]
x_min = -4.0
x_max = 4.0
v_min = -2.5
v_max = 2.5
nx = 32
nv = 32
epsilon = 0.02
t_end = 0.5
cfl_safety = 0.4

[initial]
preset = "gaussian_bump"
amplitude = 0.5
center = 0.0
width = 1.0
"#;

    fn message(e: anyhow::Error) -> String {
        format!("{e:#}")
    }

    #[test]
    fn full_scenario_parses() {
        let cfg = parse(FULL, "t.toml").unwrap();
        assert_eq!(cfg.grid.nx(), 32);
        assert_eq!(cfg.output.interval, None);
    }

    #[test]
    fn preset_reference_with_override() {
        let cfg = parse("preset = \"zero\"\n[output]\ninterval = 0.1\n", "p.toml").unwrap();
        assert_eq!(cfg.name, "zero");
        assert_eq!(cfg.output.interval, Some(0.1));
    }

    #[test]
    fn zero_viscosity_is_rejected_with_the_key() {
        let e =
            message(parse(&FULL.replace("epsilon = 0.02", "epsilon = 0.0"), "t.toml").unwrap_err());
        assert!(e.contains("grid.epsilon"), "{e}");
        assert!(e.contains("line"), "{e}");
    }

    #[test]
    fn tiny_grid_is_rejected() {
        let e = message(parse(&FULL.replace("nx = 32", "nx = 2"), "t.toml").unwrap_err());
        assert!(e.contains("grid.nx"), "{e}");
    }

    #[test]
    fn missing_physical_parameter_is_an_error() {
        let e = message(parse(&FULL.replace("t_end = 0.5\n", ""), "t.toml").unwrap_err());
        assert!(e.contains("t_end"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = message(parse("preset = \"zero\"\nbogus = 1\n", "p.toml").unwrap_err());
        assert!(e.contains("bogus"), "{e}");
        assert!(parse("preset = \"nope\"\n", "p.toml").is_err());
    }
}
