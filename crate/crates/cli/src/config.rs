//! Run configuration, read from TOML. Unknown keys are rejected.

use std::path::Path;

use anyhow::{Context, Result};
use membrane_core::SolveConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Multi-start seed; overrides `solver.multi_start.seed`.
    pub seed: Option<u64>,
    /// Cells per unit length; overrides the experiment default.
    pub resolution: Option<usize>,
    pub solver: SolveConfig,
    pub solve: SolveSection,
    pub fig3: Fig3Config,
    pub rectangle: RectangleConfig,
    pub vs: VsConfig,
    pub weiss: WeissConfig,
    pub cones: ConesConfig,
    pub spectrum: SpectrumConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text)?;
        cfg.solver.validate()?;
        Ok(cfg)
    }

    /// Solver settings with the seed override applied.
    pub fn solver(&self) -> SolveConfig {
        let mut s = self.solver.clone();
        if let Some(seed) = self.seed {
            s.multi_start.seed = seed;
        }
        s
    }

    pub fn seed(&self) -> u64 {
        self.solver().multi_start.seed
    }

    pub fn resolution_or(&self, default: usize) -> usize {
        self.resolution.unwrap_or(default)
    }

    pub fn to_toml(&self) -> toml::Table {
        toml::Table::try_from(self).expect("config serializes to a table")
    }
}

/// Problem for the `solve` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    /// Cone whose trace is the boundary data, e.g. `"v0 rot=0.3"` or `"oned n=3 k=1"`.
    pub cone: String,
    pub dim: usize,
    /// Half side of the square (or interval) centered at the origin.
    pub half_width: f64,
    /// Restrict the energy to the unit ball.
    pub ball: bool,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self {
            cone: "v0".into(),
            dim: 2,
            half_width: 1.0,
            ball: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3Config {
    pub resolution: usize,
    /// Half width of the slope-fit windows at the kinks.
    pub window: f64,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Self {
            resolution: 512,
            window: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RectangleConfig {
    /// Half length `M` of `[−M, M] × [−1, 1]`.
    pub half_length: f64,
    pub resolution: usize,
    /// Radius of the cone fit at the junction, in cells.
    pub fit_cells: f64,
    /// Radius at which the Weiss energy is reported.
    pub weiss_radius: f64,
    /// Width of the one-phase windows centered at `x₁ = ±M/2`.
    pub window: f64,
}

impl Default for RectangleConfig {
    fn default() -> Self {
        Self {
            half_length: 6.0,
            resolution: 64,
            fit_cells: 8.0,
            weiss_radius: 0.3,
            window: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VsConfig {
    pub resolution: usize,
}

impl Default for VsConfig {
    fn default() -> Self {
        Self { resolution: 128 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeissConfig {
    /// Radii of the profile at the junction.
    pub radii: Vec<f64>,
}

impl Default for WeissConfig {
    fn default() -> Self {
        Self {
            radii: vec![0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConesConfig {
    pub resolution: usize,
}

impl Default for ConesConfig {
    fn default() -> Self {
        Self { resolution: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub count: usize,
    /// Angular mesh of the Rayleigh quotient check.
    pub mesh: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { count: 9, mesh: 512 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(Config::parse("sede = 3").is_err());
        assert!(Config::parse("[solver]\ntolerence = 1e-3").is_err());
        assert!(Config::parse("[rectangle]\nhalf_length = 5.0\nfoo = 1").is_err());
    }

    #[test]
    fn seed_overrides_the_solver_seed() {
        let c = Config::parse("seed = 9\n[solver.multi_start]\nseed = 4").unwrap();
        assert_eq!(c.seed(), 9);
        let c = Config::parse("[solver.multi_start]\nseed = 4\nruns = 2").unwrap();
        assert_eq!((c.seed(), c.solver().multi_start.runs), (4, 2));
    }

    #[test]
    fn config_round_trips() {
        let c = Config::parse("resolution = 32\n[solver]\ntolerance = 1e-5").unwrap();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(Config::parse(&text).unwrap(), c);
    }
}
