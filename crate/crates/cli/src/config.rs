use anyhow::{bail, Context, Result};
use pauli_core::field::{FieldProfile, ProfileSpec};
use pauli_core::Spin;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Flux,
    Spectrum,
    Certify,
    Sweep,
    Bs,
    Identity,
    Zeromodes,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Flux => "flux",
            Task::Spectrum => "spectrum",
            Task::Certify => "certify",
            Task::Sweep => "sweep",
            Task::Bs => "bs",
            Task::Identity => "identity",
            Task::Zeromodes => "zeromodes",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Radial,
    Planar,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    #[serde(default = "default_g")]
    pub g: f64,
    /// Single coupling; ignored when `lambdas` is set.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_spins")]
    pub spins: Vec<Spin>,
    #[serde(default)]
    pub ell_min: i32,
    #[serde(default)]
    pub ell_max: i32,
}

impl Default for Physics {
    fn default() -> Self {
        Self { g: default_g(), lambda: default_lambda(), lambdas: vec![], spins: default_spins(), ell_min: 0, ell_max: 0 }
    }
}

impl Physics {
    pub fn lambda_list(&self) -> Vec<f64> {
        if self.lambdas.is_empty() {
            vec![self.lambda]
        } else {
            self.lambdas.clone()
        }
    }
}

fn default_g() -> f64 {
    2.0
}

fn default_lambda() -> f64 {
    1.0
}

fn default_spins() -> Vec<Spin> {
    vec![Spin::Minus]
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Spectrum solver; radial profiles default to radial, others to planar.
    pub solver: Option<Solver>,
    /// Seed for Lanczos start vectors.
    pub seed: Option<u64>,
    /// Number of planar eigenvalues.
    pub eigenvalues: Option<usize>,
    /// Eigen-solver residual tolerance.
    pub eigen_tol: Option<f64>,
    /// Planar core spacing; default support/40.
    pub planar_h: Option<f64>,
    /// Planar box half-width; default 10·support.
    pub planar_half_width: Option<f64>,
    /// Spacing ratio outside the planar core.
    pub planar_growth: Option<f64>,
    /// Radial domain and node count; defaults from the radial solver.
    pub radial_r_max: Option<f64>,
    pub radial_n: Option<usize>,
    /// BS kernel cell size; default extent/16.
    pub bs_h: Option<f64>,
    /// κ bracket for the BS bisection.
    pub kappa_min: Option<f64>,
    pub kappa_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

impl Op {
    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Op::Lt => a < b,
            Op::Le => a <= b,
            Op::Gt => a > b,
            Op::Ge => a >= b,
            Op::Eq => a == b,
        }
    }
}

/// A check on one number of the summary's `outputs`, addressed by a
/// dot-separated path (array elements by index).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertion {
    pub metric: String,
    pub op: Op,
    pub value: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: Option<String>,
    /// Write the planar ground-state density grid.
    #[serde(default)]
    pub dump_eigenvectors: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub task: Option<Task>,
    /// Profile name used in reports.
    #[serde(default = "default_name")]
    pub name: String,
    pub profile: ProfileSpec,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default, rename = "assert")]
    pub assertions: Vec<Assertion>,
    #[serde(default)]
    pub output: Output,
}

fn default_name() -> String {
    "profile".into()
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| anyhow::anyhow!("config schema violation: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    fn validate(&self) -> Result<()> {
        let p = &self.physics;
        if !(p.g >= 0.0 && p.g.is_finite()) {
            bail!("physics.g: must be a nonnegative number, got {}", p.g);
        }
        for (k, l) in p.lambda_list().iter().enumerate() {
            if !(*l >= 0.0 && l.is_finite()) {
                bail!("physics.lambdas[{k}]: must be a nonnegative number, got {l}");
            }
        }
        if p.spins.is_empty() {
            bail!("physics.spins: at least one spin is required");
        }
        if p.ell_max < p.ell_min {
            bail!("physics.ell_max: must be ≥ ell_min");
        }
        let n = &self.numerics;
        let pos = [
            ("numerics.eigen_tol", n.eigen_tol),
            ("numerics.planar_h", n.planar_h),
            ("numerics.planar_half_width", n.planar_half_width),
            ("numerics.radial_r_max", n.radial_r_max),
            ("numerics.bs_h", n.bs_h),
            ("numerics.kappa_min", n.kappa_min),
            ("numerics.kappa_max", n.kappa_max),
        ];
        for (name, v) in pos {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    bail!("{name}: must be positive, got {v}");
                }
            }
        }
        if let Some(g) = n.planar_growth {
            if !(g >= 1.0) {
                bail!("numerics.planar_growth: must be ≥ 1, got {g}");
            }
        }
        if matches!(n.eigenvalues, Some(0)) || n.eigenvalues.is_some_and(|k| k > 20) {
            bail!("numerics.eigenvalues: must be in 1..=20");
        }
        if matches!(n.radial_n, Some(k) if k < 10) {
            bail!("numerics.radial_n: must be at least 10");
        }
        Ok(())
    }

    pub fn build_profile(&self, base: Option<&Path>) -> Result<FieldProfile> {
        self.profile.build(&self.name, base).context("profile")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = Config::parse("[profile]\nkind = \"builtin\"\nname = \"uniform-disk\"\n").unwrap();
        assert_eq!(c.physics.spins, vec![Spin::Minus]);
        assert_eq!(c.physics.lambda_list(), vec![1.0]);
        assert!(c.task.is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = Config::parse("[profile]\nkind = \"builtin\"\nname = \"zero\"\n[physics]\ngee = 2\n").unwrap_err();
        assert!(format!("{e:#}").contains("gee"), "{e:#}");
        assert!(Config::parse("tsk = \"flux\"\n[profile]\nkind = \"builtin\"\nname = \"zero\"\n").is_err());
    }

    #[test]
    fn values_are_validated_with_paths() {
        let e = Config::parse("[profile]\nkind = \"builtin\"\nname = \"zero\"\n[physics]\nlambdas = [0.1, -1]\n").unwrap_err();
        assert!(e.to_string().contains("physics.lambdas[1]"), "{e}");
        let e = Config::parse("[profile]\nkind = \"builtin\"\nname = \"zero\"\n[numerics]\nplanar_h = 0\n").unwrap_err();
        assert!(e.to_string().contains("numerics.planar_h"), "{e}");
    }

    #[test]
    fn assertions_parse() {
        let c = Config::parse(
            "task = \"certify\"\n[profile]\nkind = \"builtin\"\nname = \"uniform-disk\"\n[[assert]]\nmetric = \"count_lower_bound\"\nop = \">=\"\nvalue = 3\n",
        )
        .unwrap();
        assert_eq!(c.assertions[0].op, Op::Ge);
        assert!(c.assertions[0].op.holds(3.0, 3.0));
    }
}
