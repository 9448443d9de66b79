use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use radcomp::{ManifoldSpec, RadialCurvature};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    #[serde(default)]
    pub curvatures: BTreeMap<String, RadialCurvature>,
    #[serde(default)]
    pub manifold: Option<ManifoldSpec>,
    pub commands: Vec<Command>,
    /// Relative paths are taken from the scenario file's directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    /// `δ` and `1 - F(δ)` for `K* = min{0, g, k}` (or `G₋` without `k`).
    Threshold {
        g: String,
        k: Option<String>,
    },
    Growth {
        numerator: String,
        denominator: String,
        #[serde(default = "default_horizons")]
        horizons: Vec<f64>,
    },
    Triangle {
        curvature: String,
        sides: [f64; 3],
    },
    GaussBonnet {
        curvature: String,
        triangles: Vec<[f64; 3]>,
    },
    CheckMain {
        g: String,
        k: String,
        /// Declared growth bracket; without it the scenario's manifold is used.
        bracket: Option<[f64; 2]>,
        #[serde(default = "default_horizons")]
        horizons: Vec<f64>,
    },
    CheckCorollary {
        g: String,
        bracket: Option<[f64; 2]>,
        #[serde(default = "default_horizons")]
        horizons: Vec<f64>,
    },
}

fn default_horizons() -> Vec<f64> {
    vec![2.0, 4.0, 8.0, 16.0]
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Threshold { .. } => "threshold",
            Command::Growth { .. } => "growth",
            Command::Triangle { .. } => "triangle",
            Command::GaussBonnet { .. } => "gauss-bonnet",
            Command::CheckMain { .. } => "check-main",
            Command::CheckCorollary { .. } => "check-corollary",
        }
    }

    fn curvature_names(&self) -> Vec<&str> {
        match self {
            Command::Threshold { g, k } => {
                std::iter::once(g.as_str()).chain(k.as_deref()).collect()
            }
            Command::Growth {
                numerator,
                denominator,
                ..
            } => vec![numerator, denominator],
            Command::Triangle { curvature, .. } | Command::GaussBonnet { curvature, .. } => {
                vec![curvature]
            }
            Command::CheckMain { g, k, .. } => vec![g, k],
            Command::CheckCorollary { g, .. } => vec![g],
        }
    }
}

pub const TASK_NAMES: [&str; 6] = [
    "threshold",
    "growth",
    "triangle",
    "gauss-bonnet",
    "check-main",
    "check-corollary",
];

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read scenario {}", path.display()))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            // serde_json's message already carries the line and column
            anyhow::anyhow!(
                "{}: schema violation at `{}`: {}",
                path.display(),
                e.path(),
                e.inner()
            )
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            bail!("n must be at least 2 (got {})", self.n);
        }
        if let Some(m) = &self.manifold {
            if m.n != self.n {
                bail!(
                    "manifold dimension {} differs from scenario n = {}",
                    m.n,
                    self.n
                );
            }
        }
        for (i, c) in self.commands.iter().enumerate() {
            for name in c.curvature_names() {
                if !self.curvatures.contains_key(name) {
                    bail!("commands[{i}] ({}): unknown curvature `{name}`", c.name());
                }
            }
            let uses_manifold = matches!(
                c,
                Command::CheckMain { bracket: None, .. }
                    | Command::CheckCorollary { bracket: None, .. }
            );
            if uses_manifold && self.manifold.is_none() {
                bail!(
                    "commands[{i}] ({}): no growth bracket given and the scenario has no manifold",
                    c.name()
                );
            }
        }
        Ok(())
    }

    pub fn curvature(&self, name: &str) -> &RadialCurvature {
        &self.curvatures[name]
    }
}
