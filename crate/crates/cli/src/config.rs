//! JSON run configuration. Every struct rejects unknown keys; errors carry
//! the dotted path of the offending key.

use std::path::{Path, PathBuf};

use deltashell::acoustic::{MediumConfig, Resolution};
use deltashell::boundary_scatter::DeltaSpec;
use deltashell::farfield::KirchhoffOptions;
use deltashell::geometry::{equiangular_directions, load_mesh, make_sphere_mesh, make_volume_grid, BoundingBox, SurfaceMesh, Vec3};
use deltashell::harness::Scatterer;
use deltashell::kernels::{make_sigma_k, ComplexDirection, IncidentField};
use deltashell::solver::SolveOptions;
use deltashell::volume_scatter::PotentialSample;
use deltashell::Error;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Forward,
    Farfield,
    Acoustic,
    Oracle,
    Verify,
}

/// A parsed configuration file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub output_dir: Option<PathBuf>,
    /// Directory of the config file; relative paths resolve against it.
    pub base: PathBuf,
    /// Canonical JSON of the whole file, the input of the config digest.
    pub raw: Value,
    pub body: Body,
}

#[derive(Debug, Clone)]
pub enum Body {
    Forward(ForwardConfig),
    Farfield(FarfieldConfig),
    Acoustic(AcousticConfig),
    Oracle(OracleConfig),
    Verify(VerifyConfig),
}

fn config_err(key: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        msg: msg.into(),
    }
}

fn typed<T: DeserializeOwned>(v: Value) -> Result<T, Error> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        config_err(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err("<file>", format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: PathBuf) -> Result<Self, Error> {
        let raw: Value = serde_json::from_str(text)
            .map_err(|e| config_err("<syntax>", format!("line {} column {}: {e}", e.line(), e.column())))?;
        let Value::Object(mut map) = raw.clone() else {
            return Err(config_err("<root>", "expected a JSON object"));
        };
        let command: Command = match map.remove("command") {
            Some(c) => typed(c).map_err(|e| match e {
                Error::Config { msg, .. } => config_err("command", msg),
                other => other,
            })?,
            None => return Err(config_err("command", "missing field")),
        };
        let output_dir = match map.remove("output_dir") {
            Some(v) => Some(typed::<PathBuf>(v).map_err(|_| config_err("output_dir", "expected a path string"))?),
            None => None,
        };
        let rest = Value::Object(map);
        let body = match command {
            Command::Forward => Body::Forward(typed(rest)?),
            Command::Farfield => Body::Farfield(typed(rest)?),
            Command::Acoustic => Body::Acoustic(typed(rest)?),
            Command::Oracle => Body::Oracle(typed(rest)?),
            Command::Verify => Body::Verify(typed(rest)?),
        };
        let cfg = Self {
            command,
            output_dir,
            base,
            raw,
            body,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Error> {
        let pos = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_err(key, format!("must be positive, got {v}")))
            }
        };
        match &self.body {
            Body::Forward(c) => {
                pos("k", c.k)?;
                c.scatterer.validate("scatterer")?;
                c.points.validate("points")
            }
            Body::Farfield(c) => {
                pos("k", c.k)?;
                c.scatterer.validate("scatterer")?;
                if c.incidence.is_empty() {
                    return Err(config_err("incidence", "at least one incident field"));
                }
                c.observations.validate("observations")
            }
            Body::Acoustic(c) => {
                if c.frequencies.is_empty() {
                    return Err(config_err("frequencies", "at least one frequency"));
                }
                for (i, w) in c.frequencies.iter().enumerate() {
                    pos(&format!("frequencies[{i}]"), *w)?;
                }
                c.incidence.validate("incidence")?;
                c.observations.validate("observations")
            }
            Body::Oracle(c) => {
                pos("k", c.k)?;
                pos("radius", c.radius)?;
                c.observations.validate("observations")
            }
            Body::Verify(c) => {
                if c.experiments.is_empty() {
                    return Err(config_err("experiments", "at least one experiment"));
                }
                Ok(())
            }
        }
    }
}

/// Surface Γ.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshConfig {
    Sphere { radius: f64, subdivisions: u32 },
    Off {
        path: PathBuf,
        #[serde(default)]
        refinements: u32,
    },
}

impl MeshConfig {
    pub fn build(&self, base: &Path) -> Result<SurfaceMesh, Error> {
        match self {
            MeshConfig::Sphere { radius, subdivisions } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(config_err("mesh.sphere.radius", "must be positive"));
                }
                if *subdivisions > 6 {
                    return Err(config_err("mesh.sphere.subdivisions", "at most 6"));
                }
                Ok(make_sphere_mesh(*radius, *subdivisions))
            }
            MeshConfig::Off { path, refinements } => {
                let (mut m, _) = load_mesh(base.join(path))?;
                for _ in 0..*refinements {
                    m = m.refine(None);
                }
                Ok(m)
            }
        }
    }
}

/// α on Γ: a constant or a CSV `panel,alpha` over the final mesh.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaConfig {
    Constant(f64),
    Csv(PathBuf),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaConfig {
    pub mesh: MeshConfig,
    pub alpha: AlphaConfig,
}

/// One additive term of V.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialTerm {
    /// `value` inside the ball.
    Ball { center: [f64; 3], radius: f64, value: f64 },
    /// amplitude·exp(−|x − center|²/width²)
    Gaussian { center: [f64; 3], amplitude: f64, width: f64 },
    /// One value per cell in grid order (x fastest), header `cell,v`.
    Csv(PathBuf),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub box_half_side: f64,
    pub cells_per_axis: usize,
    pub terms: Vec<PotentialTerm>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererConfig {
    #[serde(default)]
    pub potential: Option<PotentialConfig>,
    #[serde(default)]
    pub delta: Option<DeltaConfig>,
}

fn read_column(path: &Path, key: &str) -> Result<Vec<f64>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(key, format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (n == 0 && line.chars().next().is_some_and(|c| c.is_alphabetic())) {
            continue;
        }
        let v = line
            .split(',')
            .nth(1)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| config_err(key, format!("{} line {}: expected `index,value`", path.display(), n + 1)))?;
        out.push(v);
    }
    Ok(out)
}

impl ScattererConfig {
    fn validate(&self, key: &str) -> Result<(), Error> {
        if self.potential.is_none() && self.delta.is_none() {
            return Err(config_err(key, "needs a potential, a delta shell, or both"));
        }
        if let Some(p) = &self.potential {
            if !(p.box_half_side > 0.0) {
                return Err(config_err(format!("{key}.potential.box_half_side"), "must be positive"));
            }
            if p.cells_per_axis == 0 {
                return Err(config_err(format!("{key}.potential.cells_per_axis"), "must be positive"));
            }
        }
        Ok(())
    }

    pub fn build(&self, base: &Path, key: &str) -> Result<Scatterer, Error> {
        self.validate(key)?;
        let potential = match &self.potential {
            None => None,
            Some(p) => {
                let grid = make_volume_grid(BoundingBox::cube(p.box_half_side)?, p.cells_per_axis)?;
                let mut values = vec![0.0; grid.len()];
                for (t, term) in p.terms.iter().enumerate() {
                    match term {
                        PotentialTerm::Ball { center, radius, value } => {
                            for (i, v) in values.iter_mut().enumerate() {
                                if (grid.cell_center(i) - Vec3::from(*center)).norm() < *radius {
                                    *v += value;
                                }
                            }
                        }
                        PotentialTerm::Gaussian { center, amplitude, width } => {
                            if !(*width > 0.0) {
                                return Err(config_err(format!("{key}.potential.terms[{t}].gaussian.width"), "must be positive"));
                            }
                            for (i, v) in values.iter_mut().enumerate() {
                                let r2 = (grid.cell_center(i) - Vec3::from(*center)).norm_squared();
                                *v += amplitude * (-r2 / (width * width)).exp();
                            }
                        }
                        PotentialTerm::Csv(path) => {
                            let k = format!("{key}.potential.terms[{t}].csv");
                            let col = read_column(&base.join(path), &k)?;
                            if col.len() != values.len() {
                                return Err(config_err(k, format!("{} values for {} cells", col.len(), values.len())));
                            }
                            values.iter_mut().zip(col).for_each(|(v, c)| *v += c);
                        }
                    }
                }
                Some(PotentialSample::new(grid, values)?)
            }
        };
        let delta = match &self.delta {
            None => None,
            Some(d) => {
                let mesh = d.mesh.build(base)?;
                let alpha = match &d.alpha {
                    AlphaConfig::Constant(a) => vec![*a; mesh.len()],
                    AlphaConfig::Csv(path) => {
                        let k = format!("{key}.delta.alpha.csv");
                        let col = read_column(&base.join(path), &k)?;
                        if col.len() != mesh.len() {
                            return Err(config_err(k, format!("{} values for {} panels", col.len(), mesh.len())));
                        }
                        col
                    }
                };
                Some(DeltaSpec::new(mesh, alpha)?)
            }
        };
        Ok(Scatterer::new(potential, delta))
    }
}

/// ρ = w ζ̂ + i√(w² + k²) ξ̂.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaConfig {
    pub w: f64,
    pub zeta: [f64; 3],
    pub xi: [f64; 3],
}

impl SigmaConfig {
    pub fn build(&self, k: f64) -> Result<ComplexDirection, Error> {
        make_sigma_k(self.w, Vec3::from(self.zeta), Vec3::from(self.xi), k)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum IncidenceConfig {
    PlaneWave { direction: [f64; 3] },
    Exponential(SigmaConfig),
}

impl IncidenceConfig {
    pub fn build(&self, k: f64) -> Result<IncidentField, Error> {
        match self {
            IncidenceConfig::PlaneWave { direction } => {
                let d = Vec3::from(*direction);
                if !(d.norm() > 0.0) {
                    return Err(config_err("incidence.plane_wave.direction", "must be nonzero"));
                }
                Ok(IncidentField::plane_wave(d))
            }
            IncidenceConfig::Exponential(s) => Ok(IncidentField::Exponential(s.build(k)?)),
        }
    }
}

/// A set of unit directions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DirectionsConfig {
    /// Equiangular (θ, φ) grid.
    Grid { n_theta: usize, n_phi: usize },
    List(Vec<[f64; 3]>),
}

impl DirectionsConfig {
    fn validate(&self, key: &str) -> Result<(), Error> {
        match self {
            DirectionsConfig::Grid { n_theta, n_phi } if *n_theta == 0 || *n_phi == 0 => {
                Err(config_err(format!("{key}.grid"), "grid sizes must be positive"))
            }
            DirectionsConfig::List(l) if l.is_empty() => Err(config_err(format!("{key}.list"), "empty list")),
            DirectionsConfig::List(l) if l.iter().any(|d| !(Vec3::from(*d).norm() > 0.0)) => {
                Err(config_err(format!("{key}.list"), "directions must be nonzero"))
            }
            _ => Ok(()),
        }
    }

    pub fn directions(&self) -> Vec<Vec3> {
        match self {
            DirectionsConfig::Grid { n_theta, n_phi } => equiangular_directions(*n_theta, *n_phi),
            DirectionsConfig::List(l) => l.iter().map(|d| Vec3::from(*d).normalize()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PointsConfig {
    List(Vec<[f64; 3]>),
    Line { from: [f64; 3], to: [f64; 3], n: usize },
}

impl PointsConfig {
    fn validate(&self, key: &str) -> Result<(), Error> {
        match self {
            PointsConfig::Line { n, .. } if *n < 2 => Err(config_err(format!("{key}.line.n"), "at least 2 points")),
            PointsConfig::List(l) if l.is_empty() => Err(config_err(format!("{key}.list"), "empty list")),
            _ => Ok(()),
        }
    }

    pub fn points(&self) -> Vec<Vec3> {
        match self {
            PointsConfig::List(l) => l.iter().map(|p| Vec3::from(*p)).collect(),
            PointsConfig::Line { from, to, n } => {
                let (a, b) = (Vec3::from(*from), Vec3::from(*to));
                (0..*n).map(|i| a + (b - a) * (i as f64 / (*n - 1) as f64)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardConfig {
    pub k: f64,
    pub scatterer: ScattererConfig,
    pub incidence: IncidenceConfig,
    pub points: PointsConfig,
    #[serde(default)]
    pub solver: SolveOptions,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    #[default]
    Source,
    Kirchhoff,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarfieldConfig {
    pub k: f64,
    pub scatterer: ScattererConfig,
    pub incidence: Vec<IncidenceConfig>,
    pub observations: DirectionsConfig,
    #[serde(default)]
    pub route: Route,
    /// Radius of the Kirchhoff sphere; defaults to 1.05 × the support radius.
    #[serde(default)]
    pub kirchhoff_radius: Option<f64>,
    #[serde(default)]
    pub kirchhoff: KirchhoffOptions,
    #[serde(default)]
    pub solver: SolveOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcousticConfig {
    pub medium: MediumConfig,
    pub resolution: Resolution,
    pub frequencies: Vec<f64>,
    pub incidence: DirectionsConfig,
    pub observations: DirectionsConfig,
    #[serde(default)]
    pub solver: SolveOptions,
}

fn default_l_max() -> usize {
    50
}

fn default_z() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub k: f64,
    pub radius: f64,
    pub alpha: f64,
    /// (outer radius, V) from the center outwards; empty means V = 0.
    #[serde(default)]
    pub shells: Vec<(f64, f64)>,
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    #[serde(default = "default_z")]
    pub incidence: [f64; 3],
    pub observations: DirectionsConfig,
}

fn default_radii() -> Vec<f64> {
    vec![4.0, 8.0, 16.0]
}

fn default_reciprocity_tolerance() -> f64 {
    0.01
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentConfig {
    GreenPairing {
        k: f64,
        medium_1: ScattererConfig,
        medium_2: ScattererConfig,
        rho_1: SigmaConfig,
        rho_2: SigmaConfig,
        radius: f64,
    },
    FourierIdentity {
        k: f64,
        medium_1: ScattererConfig,
        medium_2: ScattererConfig,
        xi: [f64; 3],
        w: f64,
    },
    Sommerfeld {
        k: f64,
        scatterer: ScattererConfig,
        incidence: IncidenceConfig,
        #[serde(default = "default_radii")]
        radii: Vec<f64>,
    },
    /// Radiation condition on the partial-wave field of a δ-sphere.
    SommerfeldOracle {
        k: f64,
        radius: f64,
        alpha: f64,
        #[serde(default = "default_radii")]
        radii: Vec<f64>,
    },
    Reciprocity {
        k: f64,
        scatterer: ScattererConfig,
        directions: DirectionsConfig,
        #[serde(default = "default_reciprocity_tolerance")]
        tolerance: f64,
    },
    Uniqueness {
        medium_a: MediumConfig,
        medium_b: MediumConfig,
        omega: f64,
        omega_tilde: f64,
        fine: Resolution,
        coarse: Resolution,
        incidence: DirectionsConfig,
        observations: DirectionsConfig,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub experiments: Vec<ExperimentConfig>,
    #[serde(default)]
    pub solver: SolveOptions,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RunConfig, Error> {
        RunConfig::parse(s, PathBuf::from("."))
    }

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("not a config error: {other}"),
        }
    }

    const FORWARD: &str = r#"{
        "command": "forward",
        "k": 1.5,
        "scatterer": {"delta": {"mesh": {"sphere": {"radius": 1.0, "subdivisions": 1}}, "alpha": {"constant": 2.0}}},
        "incidence": {"plane_wave": {"direction": [0, 0, 1]}},
        "points": {"line": {"from": [0, 0, 2], "to": [0, 0, 4], "n": 3}}
    }"#;

    #[test]
    fn parses_forward() {
        let c = parse(FORWARD).unwrap();
        assert_eq!(c.command, Command::Forward);
        let Body::Forward(f) = c.body else { panic!() };
        assert_eq!(f.points.points().len(), 3);
        let s = f.scatterer.build(Path::new("."), "scatterer").unwrap();
        assert_eq!(s.delta.unwrap().alpha().len(), 80);
    }

    #[test]
    fn unknown_keys_point_to_their_path() {
        let bad = FORWARD.replace("\"alpha\": {\"constant\": 2.0}", "\"alpha\": {\"constant\": 2.0}, \"alpah\": 1");
        assert_eq!(key_of(parse(&bad).unwrap_err()), "scatterer.delta.alpah");
        let bad = FORWARD.replace("\"k\": 1.5", "\"k\": \"fast\"");
        assert_eq!(key_of(parse(&bad).unwrap_err()), "k");
        let bad = FORWARD.replace("\"n\": 3", "\"n\": 1");
        assert_eq!(key_of(parse(&bad).unwrap_err()), "points.line.n");
        let bad = FORWARD.replace("\"forward\"", "\"backward\"");
        assert_eq!(key_of(parse(&bad).unwrap_err()), "command");
        let bad = FORWARD.replace("\"k\": 1.5", "\"k\": -1");
        assert_eq!(key_of(parse(&bad).unwrap_err()), "k");
        assert_eq!(key_of(parse("{\"command\": \"forward\",").unwrap_err()), "<syntax>");
    }

    #[test]
    fn scatterer_needs_content() {
        let bad = FORWARD.replace(
            r#"{"delta": {"mesh": {"sphere": {"radius": 1.0, "subdivisions": 1}}, "alpha": {"constant": 2.0}}}"#,
            "{}",
        );
        assert_eq!(key_of(parse(&bad).unwrap_err()), "scatterer");
    }

    #[test]
    fn potential_terms_add() {
        let s: ScattererConfig = serde_json::from_str(
            r#"{"potential": {"box_half_side": 1.0, "cells_per_axis": 4, "terms": [
                {"ball": {"center": [0, 0, 0], "radius": 10.0, "value": 1.0}},
                {"gaussian": {"center": [0, 0, 0], "amplitude": 2.0, "width": 1e9}}]}}"#,
        )
        .unwrap();
        let sc = s.build(Path::new("."), "s").unwrap();
        assert!(sc.potential.unwrap().values().iter().all(|v| (v - 3.0).abs() < 1e-12));
    }
}
