//! Declarative profile descriptions (TOML-friendly) and the built-in corpus.

use super::{flux, Bump, FieldProfile, Geometry, ProfileKind, RadialShape, SampledField};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// A radial field shape, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShapeSpec {
    UniformDisk {
        #[serde(default = "one")]
        amplitude: f64,
        radius: f64,
    },
    /// B = values[i] on [edges[i-1], edges[i]); the last edge is the support radius.
    Piecewise {
        edges: Vec<f64>,
        values: Vec<f64>,
    },
    RingShell {
        amplitude: f64,
        inner: f64,
        outer: f64,
    },
    TruncatedGaussian {
        amplitude: f64,
        width: f64,
        #[serde(default = "three")]
        cutoff: f64,
    },
    Algebraic {
        amplitude: f64,
        #[serde(default = "one")]
        scale: f64,
        power: f64,
    },
    ZeroFluxAlgebraic {
        amplitude: f64,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn three() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub center: [f64; 2],
    pub shape: ShapeSpec,
}

/// A field profile description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// One of the built-in corpus entries.
    Builtin {
        name: String,
    },
    Radial {
        shape: ShapeSpec,
    },
    Bumps {
        bumps: Vec<BumpSpec>,
    },
    /// CSV grid file, relative paths resolved against the config directory.
    Sampled {
        path: PathBuf,
    },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ShapeSpec {
    pub fn build(&self) -> Result<RadialShape> {
        let s = match *self {
            Self::UniformDisk { amplitude, radius } => {
                positive("radius", radius)?;
                RadialShape::Piecewise { edges: vec![radius], values: vec![amplitude] }
            }
            Self::Piecewise { ref edges, ref values } => {
                if edges.is_empty() || edges.len() != values.len() {
                    return Err(Error::InvalidArgument("piecewise profile needs matching nonempty edges and values".into()));
                }
                let mut prev = 0.0;
                for &e in edges {
                    if !(e > prev) || !e.is_finite() {
                        return Err(Error::InvalidArgument("piecewise edges must be positive and increasing".into()));
                    }
                    prev = e;
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument("piecewise values must be finite".into()));
                }
                RadialShape::Piecewise { edges: edges.clone(), values: values.clone() }
            }
            Self::RingShell { amplitude, inner, outer } => {
                positive("inner", inner)?;
                if !(outer > inner) {
                    return Err(Error::InvalidArgument("ring shell needs outer > inner".into()));
                }
                RadialShape::Piecewise { edges: vec![inner, outer], values: vec![0.0, amplitude] }
            }
            Self::TruncatedGaussian { amplitude, width, cutoff } => {
                positive("width", width)?;
                positive("cutoff", cutoff)?;
                RadialShape::TruncatedGaussian { amplitude, width, cutoff }
            }
            Self::Algebraic { amplitude, scale, power } => {
                positive("scale", scale)?;
                positive("power", power)?;
                RadialShape::Algebraic { amplitude, scale, power }
            }
            Self::ZeroFluxAlgebraic { amplitude, scale } => {
                positive("scale", scale)?;
                RadialShape::ZeroFluxAlgebraic { amplitude, scale }
            }
        };
        Ok(s)
    }
}

impl ProfileSpec {
    /// Builds the profile; `base` resolves relative sampled-field paths.
    pub fn build(&self, name: &str, base: Option<&Path>) -> Result<FieldProfile> {
        match self {
            Self::Builtin { name } => builtin(name),
            Self::Radial { shape } => Ok(FieldProfile::radial(name, shape.build()?)),
            Self::Bumps { bumps } => {
                if bumps.is_empty() {
                    return Err(Error::InvalidArgument("bumps profile needs at least one bump".into()));
                }
                let v = bumps.iter().map(|b| Ok(Bump { center: b.center, shape: b.shape.build()? })).collect::<Result<Vec<_>>>()?;
                Ok(FieldProfile::new(name, Geometry::Bumps(v)))
            }
            Self::Sampled { path } => {
                let p = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                Ok(FieldProfile::new(name, Geometry::Sampled(SampledField::from_csv_path(&p)?)))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub parameters: &'static str,
    pub kind: ProfileKind,
    pub flux: f64,
    pub nonsymmetric: bool,
    /// Member of the five-profile reference corpus.
    pub corpus: bool,
}

const TABLE: &[(&str, &str, &str, bool)] = &[
    ("uniform-disk", "B = 1 on the disk of radius √5 (F = 2.5)", "amplitude, radius", true),
    ("zero-flux-annulus", "B = 1 on r < 1, B = -1/3 on 1 < r < 2", "edges, values", true),
    ("ring-shell", "B = 5 on the shell 1 < r < 1.4 (surface-current limit)", "amplitude, inner, outer", true),
    ("truncated-gaussian", "3 (e^{-r²} - e^{-9}) on r < 3", "amplitude, width, cutoff", true),
    ("two-bump-asym", "opposite truncated Gaussians at (-0.6, 0.2) and (0.7, -0.3), zero net flux", "bumps: center, shape", true),
    ("algebraic", "2 (1 + r²)^{-2}", "amplitude, scale, power", false),
    ("zero-flux-algebraic", "4 (1 - r²)/(1 + r²)³", "amplitude, scale", false),
    ("zero", "B = 0", "", false),
];

/// Built-in profile by name.
pub fn builtin(name: &str) -> Result<FieldProfile> {
    let pw = |edges: Vec<f64>, values: Vec<f64>| RadialShape::Piecewise { edges, values };
    let shape = match name {
        "uniform-disk" => pw(vec![5f64.sqrt()], vec![1.0]),
        "zero-flux-annulus" => pw(vec![1.0, 2.0], vec![1.0, -1.0 / 3.0]),
        "ring-shell" => pw(vec![1.0, 1.4], vec![0.0, 5.0]),
        "truncated-gaussian" => RadialShape::TruncatedGaussian { amplitude: 3.0, width: 1.0, cutoff: 3.0 },
        "algebraic" => RadialShape::Algebraic { amplitude: 2.0, scale: 1.0, power: 2.0 },
        "zero-flux-algebraic" => RadialShape::ZeroFluxAlgebraic { amplitude: 4.0, scale: 1.0 },
        "zero" => RadialShape::Zero,
        "two-bump-asym" => {
            let (w1, w2) = (0.5, 0.7);
            let a1 = 8.0;
            let bumps = vec![
                Bump { center: [-0.6, 0.2], shape: RadialShape::TruncatedGaussian { amplitude: a1, width: w1, cutoff: 3.0 } },
                Bump {
                    center: [0.7, -0.3],
                    shape: RadialShape::TruncatedGaussian { amplitude: -a1 * (w1 / w2).powi(2), width: w2, cutoff: 3.0 },
                },
            ];
            return Ok(FieldProfile::new(name, Geometry::Bumps(bumps)));
        }
        other => return Err(Error::InvalidArgument(format!("unknown built-in profile {other:?}"))),
    };
    Ok(FieldProfile::radial(name, shape))
}

/// Names, parameter schemas and fluxes of the built-in profiles.
pub fn builtin_catalog() -> Result<Vec<CatalogEntry>> {
    TABLE
        .iter()
        .map(|&(name, description, parameters, corpus)| {
            let p = builtin(name)?;
            Ok(CatalogEntry { name, description, parameters, kind: p.kind(), flux: flux(&p)?.f, nonsymmetric: p.is_nonsymmetric(), corpus })
        })
        .collect()
}

/// The five-profile reference corpus.
pub fn corpus() -> Result<Vec<FieldProfile>> {
    TABLE.iter().filter(|t| t.3).map(|t| builtin(t.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_contents() {
        let c = builtin_catalog().unwrap();
        assert!(c.iter().any(|e| e.name == "uniform-disk"));
        let ann = c.iter().find(|e| e.name == "zero-flux-annulus").unwrap();
        assert_eq!(ann.flux, 0.0);
        let two = c.iter().find(|e| e.name == "two-bump-asym").unwrap();
        assert!(two.nonsymmetric && two.flux == 0.0);
        assert_eq!(corpus().unwrap().len(), 5);
    }

    #[test]
    fn toml_specs() {
        #[derive(Deserialize)]
        struct Wrap {
            profile: ProfileSpec,
        }
        let w: Wrap = toml::from_str("[profile]\nkind = \"radial\"\nshape = { kind = \"uniform-disk\", radius = 1.0 }\n").unwrap();
        let p = w.profile.build("d", None).unwrap();
        assert!((flux(&p).unwrap().f - 0.5).abs() < 1e-12);
        let bad = toml::from_str::<Wrap>("[profile]\nkind = \"builtin\"\nname = \"zero\"\ncolour = 1\n");
        assert!(bad.is_err());
        let bad_shape =
            toml::from_str::<Wrap>("[profile]\nkind = \"radial\"\nshape = { kind = \"uniform-disk\", radius = 1.0, wdth = 2 }\n");
        assert!(bad_shape.is_err());
    }
}
