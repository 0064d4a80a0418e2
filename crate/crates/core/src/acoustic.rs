//! Acoustic media (ρ, v) whose density carries a single-layer kink across Γ,
//! and their Schrödinger form: u = √ρ ψ turns
//! ω²u + v²ρ∇·(ρ⁻¹∇u) = 0 into (−Δ + V + αδ_Γ − ω²)ψ = 0 with
//! V = −½Δρ/ρ + ¾|∇ρ|²/ρ² + ω²(1 − 1/v²) and α = ½·[∂ₙρ jump]⁻/ρ on Γ.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary_scatter::{solve_problem, DeltaSolution, DeltaSpec};
use crate::error::{Error, Result};
use crate::farfield::{farfield_source, FarFieldPattern};
use crate::geometry::triangle::{triangle_potential, triangle_potential_grad};
use crate::geometry::{load_mesh, make_sphere_mesh, make_volume_grid, BoundingBox, SurfaceMesh, Vec3, VolumeGrid};
use crate::kernels::IncidentField;
use crate::solver::SolveOptions;
use crate::volume_scatter::PotentialSample;

fn medium_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Medium(msg.into()))
}

/// a·exp(−|x − c|²/w²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBump {
    pub center: [f64; 3],
    pub amplitude: f64,
    pub width: f64,
}

impl GaussianBump {
    /// (value, gradient, Laplacian).
    pub fn eval(&self, x: &Vec3) -> (f64, Vec3, f64) {
        let s = x - Vec3::from(self.center);
        let w2 = self.width * self.width;
        let g = self.amplitude * (-s.norm_squared() / w2).exp();
        (g, s * (-2.0 * g / w2), g * (4.0 * s.norm_squared() / (w2 * w2) - 6.0 / w2))
    }
}

/// Constant sound speed inside a ball (overrides the smooth profile).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedBall {
    pub center: [f64; 3],
    pub radius: f64,
    pub speed: f64,
}

/// C² radial cutoff: 1 for r ≤ radius − width, 0 for r ≥ radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cutoff {
    pub radius: f64,
    #[serde(default = "one")]
    pub width: f64,
}

fn one() -> f64 {
    1.0
}

impl Cutoff {
    /// (χ, ∇χ, Δχ) at x.
    pub fn eval(&self, x: &Vec3) -> (f64, Vec3, f64) {
        let r = x.norm();
        let t = (self.radius - r) / self.width;
        if t >= 1.0 {
            return (1.0, Vec3::zeros(), 0.0);
        }
        if t <= 0.0 {
            return (0.0, Vec3::zeros(), 0.0);
        }
        let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
        let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        let dds = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
        let d1 = -ds / self.width;
        let d2 = dds / (self.width * self.width);
        (s, x * (d1 / r), d2 + 2.0 * d1 / r)
    }
}

/// ρ = 1 + χ(ρ◦ + SLξ) with SLξ the static single layer on Γ; v = 1 + χ·Σ
/// bumps, overridden inside speed balls.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumSpec {
    gamma: SurfaceMesh,
    rho_bumps: Vec<GaussianBump>,
    shell_density: Vec<f64>,
    cutoff: Cutoff,
    v_bumps: Vec<GaussianBump>,
    v_balls: Vec<SpeedBall>,
}

/// ρ with its gradient and one-sided Laplacian at a point off Γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySample {
    pub rho: f64,
    pub grad: Vec3,
    pub laplacian: f64,
    /// Closer to Γ than a quarter panel diameter.
    pub near_field_warning: bool,
}

impl MediumSpec {
    pub fn new(
        gamma: SurfaceMesh,
        rho_bumps: Vec<GaussianBump>,
        shell_density: Vec<f64>,
        cutoff: Cutoff,
        v_bumps: Vec<GaussianBump>,
        v_balls: Vec<SpeedBall>,
    ) -> Result<Self> {
        if shell_density.len() != gamma.len() || shell_density.iter().any(|x| !x.is_finite()) {
            return medium_err("shell density must be finite with one value per panel");
        }
        if !(cutoff.radius > 0.0 && cutoff.width > 0.0 && cutoff.width <= cutoff.radius) {
            return medium_err("cutoff needs 0 < width <= radius");
        }
        if gamma.bounding_radius(&Vec3::zeros()) >= cutoff.radius {
            return medium_err("Γ must lie inside the cutoff ball");
        }
        for b in rho_bumps.iter().chain(&v_bumps) {
            if !(b.width > 0.0) || !b.amplitude.is_finite() {
                return medium_err("bump widths must be positive");
            }
        }
        for b in &v_balls {
            if !(b.speed > 0.0 && b.radius > 0.0) || Vec3::from(b.center).norm() + b.radius > cutoff.radius {
                return medium_err("speed balls need positive speed and must lie inside the cutoff ball");
            }
        }
        Ok(Self {
            gamma,
            rho_bumps,
            shell_density,
            cutoff,
            v_bumps,
            v_balls,
        })
    }

    /// Only a shell of constant density on Γ, v ≡ 1.
    pub fn shell(gamma: SurfaceMesh, xi: f64, cutoff: Cutoff) -> Result<Self> {
        let n = gamma.len();
        Self::new(gamma, Vec::new(), vec![xi; n], cutoff, Vec::new(), Vec::new())
    }

    pub fn gamma(&self) -> &SurfaceMesh {
        &self.gamma
    }

    pub fn shell_density(&self) -> &[f64] {
        &self.shell_density
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.cutoff
    }

    /// SLξ(x) and its gradient, panels integrated analytically.
    fn layer(&self, x: &Vec3) -> (f64, Vec3) {
        let mut v = 0.0;
        let mut g = Vec3::zeros();
        for (q, &xi) in self.shell_density.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let tri = self.gamma.panel(q);
            v += xi * triangle_potential(x, &tri);
            g += triangle_potential_grad(x, &tri) * xi;
        }
        (v / (4.0 * PI), g / (4.0 * PI))
    }

    fn layer_value(&self, x: &Vec3) -> f64 {
        self.shell_density
            .iter()
            .enumerate()
            .filter(|(_, xi)| **xi != 0.0)
            .map(|(q, xi)| xi * triangle_potential(x, &self.gamma.panel(q)))
            .sum::<f64>()
            / (4.0 * PI)
    }

    fn smooth(&self, x: &Vec3) -> (f64, Vec3, f64) {
        self.rho_bumps.iter().fold((0.0, Vec3::zeros(), 0.0), |acc, b| {
            let (v, g, l) = b.eval(x);
            (acc.0 + v, acc.1 + g, acc.2 + l)
        })
    }

    fn near_gamma(&self, x: &Vec3) -> bool {
        self.gamma
            .centroids()
            .iter()
            .zip(self.gamma.diameters())
            .any(|(c, d)| (x - c).norm() < 0.25 * d)
    }

    pub fn eval_density(&self, x: &Vec3) -> DensitySample {
        let (chi, dchi, lchi) = self.cutoff.eval(x);
        if chi == 0.0 {
            return DensitySample {
                rho: 1.0,
                grad: Vec3::zeros(),
                laplacian: 0.0,
                near_field_warning: false,
            };
        }
        let (s, ds, ls) = self.smooth(x);
        let (l, dl) = self.layer(x);
        let f = s + l;
        let df = ds + dl;
        // the layer is harmonic off Γ
        DensitySample {
            rho: 1.0 + chi * f,
            grad: dchi * f + df * chi,
            laplacian: lchi * f + 2.0 * dchi.dot(&df) + chi * ls,
            near_field_warning: self.near_gamma(x),
        }
    }

    /// γ₀ρ at the centroid of panel q.
    pub fn trace_density(&self, q: usize) -> f64 {
        let c = self.gamma.centroids()[q];
        let (chi, _, _) = self.cutoff.eval(&c);
        1.0 + chi * (self.smooth(&c).0 + self.layer_value(&c))
    }

    pub fn sound_speed(&self, x: &Vec3) -> f64 {
        for b in &self.v_balls {
            if (x - Vec3::from(b.center)).norm() < b.radius {
                return b.speed;
            }
        }
        let (chi, _, _) = self.cutoff.eval(x);
        if chi == 0.0 {
            return 1.0;
        }
        1.0 + chi * self.v_bumps.iter().map(|b| b.eval(x).0).sum::<f64>()
    }

    /// α_q = ½ χ(c_q) ξ_q / γ₀ρ_q, independent of ω.
    pub fn alpha(&self) -> Result<Vec<f64>> {
        (0..self.gamma.len())
            .into_par_iter()
            .map(|q| {
                let xi = self.shell_density[q];
                if xi == 0.0 {
                    return Ok(0.0);
                }
                let rho = self.trace_density(q);
                if !(rho > 0.0) {
                    return medium_err(format!("density {rho} <= 0 on panel {q}"));
                }
                let (chi, _, _) = self.cutoff.eval(&self.gamma.centroids()[q]);
                Ok(0.5 * chi * xi / rho)
            })
            .collect()
    }
}

/// Diagnostics reported alongside the Schrödinger data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MediumDiagnostics {
    pub rho_min: f64,
    pub rho_max: f64,
    /// (Σ |∇ρ|⁴ vol)^{1/4} over the grid
    pub grad_rho_l4: f64,
    pub alpha_l4: f64,
    pub near_gamma_cells: usize,
}

/// V = V_φ + ω²(1 − 1/v²) on the grid and α on Γ.
#[derive(Debug, Clone)]
pub struct SchrodingerData {
    pub potential: PotentialSample,
    pub delta: DeltaSpec,
    pub omega: f64,
    /// V_φ = −½Δρ/ρ + ¾|∇ρ|²/ρ² per cell
    pub v_phi: Vec<f64>,
    /// 1 − 1/v² per cell
    pub speed_term: Vec<f64>,
    pub diagnostics: MediumDiagnostics,
}

/// −½Δρ/ρ + ¾|∇ρ|²/ρ², i.e. Δφ/φ for φ = ρ^{−1/2}.
pub fn liouville_potential(d: &DensitySample) -> f64 {
    -0.5 * d.laplacian / d.rho + 0.75 * d.grad.norm_squared() / (d.rho * d.rho)
}

/// Sub-points per axis in cells cut by Γ or by a speed-ball boundary.
const CUT_CELL_POINTS: usize = 4;
/// Sub-points per axis elsewhere in the cutoff ball.
const SMOOTH_CELL_POINTS: usize = 2;

struct CellSample {
    center: DensitySample,
    v_phi: f64,
    speed_term: f64,
    rho_min: f64,
    rho_max: f64,
}

/// Cell means of V_φ and 1 − 1/v² by a sub-grid midpoint rule, finer in
/// cells that may straddle a discontinuity of V. Cells outside the cutoff
/// ball take the center value.
fn cell_sample(m: &MediumSpec, grid: &VolumeGrid, i: usize) -> CellSample {
    let x = grid.cell_center(i);
    let center = m.eval_density(&x);
    let h = grid.spacing();
    let half_diag = 0.5 * h.norm();
    let cut_gamma = m.cutoff.eval(&x).0 > 0.0
        && m.shell_density.iter().any(|xi| *xi != 0.0)
        && m
            .gamma
            .centroids()
            .iter()
            .zip(m.gamma.diameters())
            .any(|(c, d)| (x - c).norm() < half_diag + d);
    let cut_ball = m
        .v_balls
        .iter()
        .any(|b| ((x - Vec3::from(b.center)).norm() - b.radius).abs() < half_diag);
    let inside_cutoff = x.norm() < m.cutoff.radius + half_diag;
    if !(cut_gamma || cut_ball || inside_cutoff) {
        let v = m.sound_speed(&x);
        return CellSample {
            v_phi: liouville_potential(&center),
            speed_term: 1.0 - 1.0 / (v * v),
            rho_min: center.rho,
            rho_max: center.rho,
            center,
        };
    }
    let n = if cut_gamma || cut_ball { CUT_CELL_POINTS } else { SMOOTH_CELL_POINTS };
    let mut acc = (0.0, 0.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let off = |t: usize| (t as f64 + 0.5) / n as f64 - 0.5;
                let p = x + Vec3::new(off(a) * h.x, off(b) * h.y, off(c) * h.z);
                let d = m.eval_density(&p);
                let v = m.sound_speed(&p);
                lo = lo.min(d.rho);
                hi = hi.max(d.rho);
                acc.0 += liouville_potential(&d);
                acc.1 += 1.0 - 1.0 / (v * v);
            }
        }
    }
    let cnt = (n * n * n) as f64;
    CellSample {
        center,
        v_phi: acc.0 / cnt,
        speed_term: acc.1 / cnt,
        rho_min: lo,
        rho_max: hi,
    }
}

pub fn acoustic_to_schrodinger(m: &MediumSpec, omega: f64, grid: &VolumeGrid) -> Result<SchrodingerData> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Validation(format!("frequency must be positive, got {omega}")));
    }
    if !grid.bbox().contains_ball(&Vec3::zeros(), m.cutoff.radius) {
        return Err(Error::Validation("volume grid must cover the cutoff ball".into()));
    }
    let samples: Vec<CellSample> = (0..grid.len()).into_par_iter().map(|i| cell_sample(m, grid, i)).collect();
    let mut v_phi = Vec::with_capacity(samples.len());
    let mut speed_term = Vec::with_capacity(samples.len());
    let mut rho_min = f64::INFINITY;
    let mut rho_max = f64::NEG_INFINITY;
    let mut g4 = 0.0;
    let mut near = 0;
    for (i, c) in samples.iter().enumerate() {
        if !(c.rho_min > 0.0) {
            return medium_err(format!("density {} <= 0 in cell {i}", c.rho_min));
        }
        rho_min = rho_min.min(c.rho_min);
        rho_max = rho_max.max(c.rho_max);
        g4 += c.center.grad.norm_squared().powi(2) * grid.cell_volume();
        near += c.center.near_field_warning as usize;
        v_phi.push(c.v_phi);
        speed_term.push(c.speed_term);
    }
    let alpha = m.alpha()?;
    for q in 0..m.gamma.len() {
        let r = m.trace_density(q);
        rho_min = rho_min.min(r);
        rho_max = rho_max.max(r);
    }
    let delta = DeltaSpec::new(m.gamma.clone(), alpha)?;
    let values = v_phi.iter().zip(&speed_term).map(|(p, s)| p + omega * omega * s).collect();
    let potential = PotentialSample::new(grid.clone(), values)?;
    let diagnostics = MediumDiagnostics {
        rho_min,
        rho_max,
        grad_rho_l4: g4.powf(0.25),
        alpha_l4: delta.lp_norm(4.0),
        near_gamma_cells: near,
    };
    Ok(SchrodingerData {
        potential,
        delta,
        omega,
        v_phi,
        speed_term,
        diagnostics,
    })
}

/// u = √ρ ψ.
pub fn schrodinger_to_acoustic_field(psi: Complex64, rho: f64) -> Result<Complex64> {
    if !(rho > 0.0) {
        return medium_err(format!("density must be positive, got {rho}"));
    }
    Ok(psi * rho.sqrt())
}

/// Acoustic pressure at x from a solved Schrödinger field.
pub fn acoustic_field_at(m: &MediumSpec, sol: &DeltaSolution, x: &Vec3) -> Result<Complex64> {
    schrodinger_to_acoustic_field(sol.total(x)?.value, m.eval_density(x).rho)
}

/// Solves the Schrödinger problem for every incidence direction with one
/// factorization. ρ = 1 outside the cutoff ball, so u∞ = ψ∞.
pub fn solve_acoustic(
    data: &SchrodingerData,
    incidence: &[Vec3],
    opts: &SolveOptions,
) -> Result<Vec<DeltaSolution>> {
    let incs: Vec<IncidentField> = incidence.iter().map(|d| IncidentField::plane_wave(*d)).collect();
    solve_problem(Some(&data.potential), Some(&data.delta), &incs, data.omega, opts)
}

pub fn acoustic_farfield(
    m: &MediumSpec,
    omega: f64,
    grid: &VolumeGrid,
    incidence: &[Vec3],
    obs: &[Vec3],
    opts: &SolveOptions,
) -> Result<FarFieldPattern> {
    let data = acoustic_to_schrodinger(m, omega, grid)?;
    let sols = solve_acoustic(&data, incidence, opts)?;
    FarFieldPattern::concat(sols.iter().map(|s| farfield_source(s, obs)).collect::<Result<_>>()?)
}

/// Where Γ comes from in a medium config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaSource {
    /// Icosphere about the origin.
    Sphere { radius: f64 },
    /// OFF file, refined by midpoint splitting.
    Off(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShellDensitySource {
    Constant(f64),
    /// CSV with header `panel,xi`, one row per panel of the unrefined mesh.
    PerPanel { csv: PathBuf },
}

impl Default for ShellDensitySource {
    fn default() -> Self {
        ShellDensitySource::Constant(0.0)
    }
}

/// Mesh subdivision level and grid cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub subdivisions: u32,
    pub cells_per_axis: usize,
}

/// JSON description of a medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub gamma: GammaSource,
    #[serde(default)]
    pub rho_bumps: Vec<GaussianBump>,
    #[serde(default)]
    pub shell_density: ShellDensitySource,
    pub cutoff: Cutoff,
    #[serde(default)]
    pub v_bumps: Vec<GaussianBump>,
    #[serde(default)]
    pub v_balls: Vec<SpeedBall>,
    /// Half side of the grid cube; defaults to the cutoff radius.
    #[serde(default)]
    pub box_half_side: Option<f64>,
}

fn read_shell_csv(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if n == 0 && line.starts_with("panel") || line.is_empty() {
            continue;
        }
        let val = line.split(',').nth(1).and_then(|v| v.trim().parse::<f64>().ok());
        match val {
            Some(v) => out.push(v),
            None => {
                return Err(Error::Parse {
                    line: n + 1,
                    msg: "expected `panel,xi`".into(),
                })
            }
        }
    }
    Ok(out)
}

impl MediumConfig {
    /// Medium and covering grid at a resolution. Relative paths resolve
    /// against `base`.
    pub fn build(&self, res: Resolution, base: &Path) -> Result<(MediumSpec, VolumeGrid)> {
        let (mesh, levels) = match &self.gamma {
            GammaSource::Sphere { radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::Config {
                        key: "gamma.sphere.radius".into(),
                        msg: "must be positive".into(),
                    });
                }
                (make_sphere_mesh(*radius, res.subdivisions), 0)
            }
            GammaSource::Off(p) => {
                let (mut m, _) = load_mesh(&base.join(p))?;
                for _ in 0..res.subdivisions {
                    m = m.refine(None);
                }
                (m, res.subdivisions)
            }
        };
        let xi = match &self.shell_density {
            ShellDensitySource::Constant(c) => vec![*c; mesh.len()],
            ShellDensitySource::PerPanel { csv } => {
                if matches!(self.gamma, GammaSource::Sphere { .. }) {
                    return Err(Error::Config {
                        key: "shell_density".into(),
                        msg: "per-panel densities need an OFF surface".into(),
                    });
                }
                let base_vals = read_shell_csv(&base.join(csv))?;
                let rep = 4usize.pow(levels);
                if base_vals.len() * rep != mesh.len() {
                    return Err(Error::Config {
                        key: "shell_density.csv".into(),
                        msg: format!("{} values for {} panels", base_vals.len(), mesh.len() / rep),
                    });
                }
                // midpoint refinement keeps the four children of a panel contiguous
                base_vals.iter().flat_map(|v| std::iter::repeat_n(*v, rep)).collect()
            }
        };
        let medium = MediumSpec::new(
            mesh,
            self.rho_bumps.clone(),
            xi,
            self.cutoff,
            self.v_bumps.clone(),
            self.v_balls.clone(),
        )?;
        let half = self.box_half_side.unwrap_or(self.cutoff.radius);
        let grid = make_volume_grid(BoundingBox::cube(half)?, res.cells_per_axis)?;
        Ok((medium, grid))
    }
}
