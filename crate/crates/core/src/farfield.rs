//! Far-field patterns: source sums, the Kirchhoff surface integral over a
//! sphere, scattering amplitudes and a CSV format with a JSON header.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::boundary_scatter::DeltaSolution;
use crate::error::{invalid, Error, Result};
use crate::geometry::{angles_of, direction_from_angles, make_sphere_grid, Vec3};
use crate::kernels::{make_sigma_k, ComplexDirection, IncidentField, CVec3};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// s = AMPLITUDE_FACTOR · ψ∞.
pub fn amplitude_factor() -> f64 {
    (2.0 * PI).powf(1.5)
}

/// Description of one incidence row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Incidence {
    PlaneWave { direction: [f64; 3] },
    Exponential(ComplexDirection),
    Herglotz,
}

impl Incidence {
    pub fn of(f: &IncidentField) -> Self {
        match f {
            IncidentField::PlaneWave { direction } => Incidence::PlaneWave {
                direction: (*direction).into(),
            },
            IncidentField::Exponential(r) if r.w == 0.0 => Incidence::PlaneWave { direction: r.xi_hat },
            IncidentField::Exponential(r) => Incidence::Exponential(r.clone()),
            IncidentField::Herglotz { .. } => Incidence::Herglotz,
        }
    }

    pub fn is_plane_wave(&self) -> bool {
        matches!(self, Incidence::PlaneWave { .. })
    }

    pub fn direction(&self) -> Option<Vec3> {
        match self {
            Incidence::PlaneWave { direction } => Some(Vec3::from(*direction)),
            Incidence::Exponential(r) => Some(r.xi()),
            Incidence::Herglotz => None,
        }
    }
}

/// ψ∞(k, incidence, x̂), one row per incidence.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    pub k: f64,
    pub incidence: Vec<Incidence>,
    pub observations: Vec<Vec3>,
    /// values[row][obs]
    pub values: Vec<Vec<Complex64>>,
}

impl FarFieldPattern {
    pub fn new(k: f64, incidence: Vec<Incidence>, observations: Vec<Vec3>, values: Vec<Vec<Complex64>>) -> Result<Self> {
        if incidence.is_empty() || observations.is_empty() {
            return invalid("far-field grids must be non-empty");
        }
        if values.len() != incidence.len() || values.iter().any(|r| r.len() != observations.len()) {
            return invalid("far-field table shape does not match its grids");
        }
        if values.iter().flatten().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return invalid("far-field values must be finite");
        }
        Ok(Self {
            k,
            incidence,
            observations,
            values,
        })
    }

    /// Stacks rows computed on a common observation grid.
    pub fn concat(rows: Vec<FarFieldPattern>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return invalid("no far-field rows");
        };
        let k = first.k;
        let obs = first.observations.clone();
        let mut inc = Vec::new();
        let mut values = Vec::new();
        for r in rows {
            if r.k != k || r.observations != obs {
                return invalid("far-field rows use different grids");
            }
            inc.extend(r.incidence);
            values.extend(r.values);
        }
        Self::new(k, inc, obs, values)
    }

    pub fn rows(&self) -> usize {
        self.incidence.len()
    }

    pub fn same_grid(&self, other: &FarFieldPattern) -> bool {
        self.k == other.k
            && self.incidence == other.incidence
            && self.observations.len() == other.observations.len()
            && self
                .observations
                .iter()
                .zip(&other.observations)
                .all(|(a, b)| (a - b).norm() < 1e-12)
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// (‖a − b‖₂/‖b‖₂, max|a − b|/max|b|) with `other` as reference.
    pub fn relative_distance(&self, other: &FarFieldPattern) -> Result<(f64, f64)> {
        if !self.same_grid(other) {
            return Err(Error::Validation("far-field grids differ".into()));
        }
        let mut num2 = 0.0;
        let mut numx: f64 = 0.0;
        for (ra, rb) in self.values.iter().zip(&other.values) {
            for (a, b) in ra.iter().zip(rb) {
                num2 += (a - b).norm_sqr();
                numx = numx.max((a - b).norm());
            }
        }
        let ref2 = other.l2_norm();
        let refx = other.max_abs();
        let rel = |n: f64, d: f64| if d > 0.0 { n / d } else if n == 0.0 { 0.0 } else { f64::INFINITY };
        Ok((rel(num2.sqrt(), ref2), rel(numx, refx)))
    }

    /// CSV with one line per (incidence, observation) pair preceded by a
    /// `# {json}` metadata line.
    pub fn to_csv(&self, metadata: &Value) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", serde_json::to_string(metadata).unwrap_or_else(|_| "{}".into()));
        s.push_str("k,inc_kind,inc_theta,inc_phi,w,zeta_x,zeta_y,zeta_z,xi_x,xi_y,xi_z,obs_theta,obs_phi,re,im\n");
        for (inc, row) in self.incidence.iter().zip(&self.values) {
            let (kind, w, zeta, xi) = match inc {
                Incidence::PlaneWave { direction } => ("plane_wave", 0.0, [0.0; 3], *direction),
                Incidence::Exponential(r) => ("exponential", r.w, r.zeta_hat, r.xi_hat),
                Incidence::Herglotz => ("herglotz", 0.0, [0.0; 3], [0.0; 3]),
            };
            let (it, ip) = if matches!(inc, Incidence::Herglotz) {
                (0.0, 0.0)
            } else {
                angles_of(&Vec3::from(xi))
            };
            for (o, v) in self.observations.iter().zip(row) {
                let (ot, op) = angles_of(o);
                let _ = writeln!(
                    s,
                    "{:.17e},{kind},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    self.k, it, ip, w, zeta[0], zeta[1], zeta[2], xi[0], xi[1], xi[2], ot, op, v.re, v.im
                );
            }
        }
        s
    }

    /// Inverse of [`FarFieldPattern::to_csv`]; returns the metadata too.
    pub fn from_csv(text: &str) -> Result<(Self, Value)> {
        let mut lines = text.lines().enumerate().peekable();
        let mut meta = Value::Null;
        if let Some((_, l)) = lines.peek() {
            if let Some(j) = l.strip_prefix("# ") {
                meta = serde_json::from_str(j)?;
                lines.next();
            }
        }
        match lines.next() {
            Some((_, h)) if h.starts_with("k,inc_kind") => {}
            Some((n, _)) => return Err(Error::Parse { line: n + 1, msg: "missing far-field CSV header".into() }),
            None => return invalid("empty far-field file"),
        }
        let mut k = None;
        let mut incidence: Vec<Incidence> = Vec::new();
        let mut keys: Vec<String> = Vec::new();
        let mut values: Vec<Vec<Complex64>> = Vec::new();
        let mut obs_rows: Vec<Vec<Vec3>> = Vec::new();
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let perr = |msg: &str| Error::Parse {
                line: n + 1,
                msg: msg.to_string(),
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 15 {
                return Err(perr("expected 15 columns"));
            }
            let num = |i: usize| f[i].trim().parse::<f64>().map_err(|_| perr("bad number"));
            let kk = num(0)?;
            match k {
                None => k = Some(kk),
                Some(k0) if k0 != kk => return Err(perr("mixed wavenumbers")),
                _ => {}
            }
            let key = f[1..11].join(",");
            if keys.last() != Some(&key) {
                let xi = [num(8)?, num(9)?, num(10)?];
                let inc = match f[1] {
                    "plane_wave" => Incidence::PlaneWave { direction: xi },
                    "exponential" => Incidence::Exponential(
                        make_sigma_k(num(4)?, Vec3::new(num(5)?, num(6)?, num(7)?), Vec3::from(xi), kk)
                            .map_err(|e| perr(&e.to_string()))?,
                    ),
                    "herglotz" => Incidence::Herglotz,
                    _ => return Err(perr("unknown incidence kind")),
                };
                keys.push(key);
                incidence.push(inc);
                values.push(Vec::new());
                obs_rows.push(Vec::new());
            }
            values.last_mut().unwrap().push(Complex64::new(num(13)?, num(14)?));
            obs_rows.last_mut().unwrap().push(direction_from_angles(num(11)?, num(12)?));
        }
        let Some(observations) = obs_rows.first().cloned() else {
            return invalid("far-field file has no data rows");
        };
        if obs_rows.iter().any(|r| r.len() != observations.len() || r.iter().zip(&observations).any(|(a, b)| (a - b).norm() > 1e-12)) {
            return invalid("observation grid differs between incidence rows");
        }
        Ok((Self::new(k.unwrap_or(0.0), incidence, observations, values)?, meta))
    }
}

/// Sign and normalization conventions embedded in every output file.
pub fn conventions() -> Value {
    json!({
        "incident_plane_wave": "exp(+i k xi.x)",
        "kernel": "exp(+i k |x-y|) / (4 pi |x-y|)",
        "farfield": "psi_sc(x) = psi_inf(xhat) exp(i k |x|)/|x| + O(|x|^-2)",
        "amplitude": "s = (2 pi)^(3/2) psi_inf",
        "amplitude_factor": amplitude_factor(),
        "partial_wave_farfield": "psi_inf = -(i/k) sum_l (2l+1) t_l P_l(cos theta)",
        "partial_wave_factor": [0.0, -1.0],
        "acoustic_field": "u = sqrt(rho) psi",
    })
}

/// ψ∞(x̂) = −(1/4π) Σ_j e^{−ik x̂·c_j} s_j over the solved point sources.
pub fn farfield_source(sol: &DeltaSolution, obs: &[Vec3]) -> Result<FarFieldPattern> {
    let k = sol.k();
    let nodes = sol.nodes();
    let row: Vec<Complex64> = obs
        .par_iter()
        .map(|xh| {
            -sol.sources()
                .iter()
                .map(|&(j, s)| (-I * k * xh.dot(&nodes.centers[j])).exp() * s)
                .sum::<Complex64>()
                / (4.0 * PI)
        })
        .collect();
    FarFieldPattern::new(k, vec![Incidence::of(sol.incident())], obs.to_vec(), vec![row])
}

/// How ∂_r ψ_sc is obtained on the Kirchhoff sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// Central differences with step min(1e−3, 1e−4·R).
    #[default]
    FiniteDifference,
    /// Differentiating the source representation.
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KirchhoffOptions {
    /// Gauss–Legendre nodes in cos θ; 0 picks a count from kR.
    pub n_theta: usize,
    /// Uniform nodes in φ; 0 means 2·n_theta.
    pub n_phi: usize,
    pub gradient: GradientMode,
}

impl Default for KirchhoffOptions {
    fn default() -> Self {
        Self {
            n_theta: 0,
            n_phi: 0,
            gradient: GradientMode::FiniteDifference,
        }
    }
}

/// ψ∞(x̂) = (1/4π)∮_{|y|=R} (ψ_sc ŷ·∇e^{−ik x̂·y} − e^{−ik x̂·y} ∂_r ψ_sc) dσ(y).
pub fn farfield_kirchhoff(sol: &DeltaSolution, radius: f64, obs: &[Vec3], opts: &KirchhoffOptions) -> Result<FarFieldPattern> {
    let k = sol.k();
    let support = sol.support_radius();
    if !(radius > support) {
        return invalid(format!(
            "Kirchhoff radius {radius} does not enclose the scatterer (support radius {support:.4})"
        ));
    }
    let n_theta = if opts.n_theta > 0 {
        opts.n_theta
    } else {
        (k * (radius + support)).ceil() as usize + 24
    };
    let n_phi = if opts.n_phi > 0 { opts.n_phi } else { 2 * n_theta };
    let grid = make_sphere_grid(radius, n_theta, n_phi)?;
    let h = (1e-3f64).min(radius * 1e-4);
    let samples: Vec<(Complex64, Complex64)> = grid
        .nodes()
        .par_iter()
        .zip(grid.normals().par_iter())
        .map(|(y, n)| {
            let u = sol.scattered(y);
            let du = match opts.gradient {
                GradientMode::FiniteDifference => (sol.scattered(&(y + n * h)) - sol.scattered(&(y - n * h))) / (2.0 * h),
                GradientMode::Analytic => {
                    let g: CVec3 = sol.scattered_grad(y);
                    g.x * n.x + g.y * n.y + g.z * n.z
                }
            };
            (u, du)
        })
        .collect();
    let row: Vec<Complex64> = obs
        .par_iter()
        .map(|xh| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (((y, n), w), (u, du)) in grid.nodes().iter().zip(grid.normals()).zip(grid.weights()).zip(&samples) {
                let e = (-I * k * xh.dot(y)).exp();
                let de = -I * k * xh.dot(n) * e;
                acc += (u * de - e * du) * *w;
            }
            acc / (4.0 * PI)
        })
        .collect();
    FarFieldPattern::new(k, vec![Incidence::of(sol.incident())], obs.to_vec(), vec![row])
}

/// s = (2π)^{3/2} ψ∞; plane-wave rows only.
pub fn scattering_amplitude(ff: &FarFieldPattern) -> Result<FarFieldPattern> {
    if ff.incidence.iter().any(|i| !i.is_plane_wave()) {
        return invalid("scattering amplitude is defined for plane-wave incidence only");
    }
    let c = amplitude_factor();
    let mut out = ff.clone();
    out.values.iter_mut().flatten().for_each(|v| *v *= c);
    Ok(out)
}

/// u∞ = s/(2π)^{3/2}.
pub fn farfield_from_amplitude(s: &FarFieldPattern) -> FarFieldPattern {
    let c = amplitude_factor();
    let mut out = s.clone();
    out.values.iter_mut().flatten().for_each(|v| *v /= c);
    out
}

/// max |s(ξ̂, x̂) − s(−x̂, −ξ̂)| / max|s| for a pattern whose incidence and
/// observation grids coincide.
pub fn reciprocity_defect(ff: &FarFieldPattern) -> Result<f64> {
    let dirs: Vec<Vec3> = ff
        .incidence
        .iter()
        .map(|i| match i {
            Incidence::PlaneWave { direction } => Ok(Vec3::from(*direction)),
            _ => invalid("reciprocity needs plane-wave incidence"),
        })
        .collect::<Result<_>>()?;
    let find = |v: &Vec3, set: &[Vec3]| set.iter().position(|d| (d - v).norm() < 1e-9);
    if dirs.len() != ff.observations.len() || dirs.iter().any(|d| find(d, &ff.observations).is_none()) {
        return invalid("incidence and observation grids must be identical");
    }
    let mut worst: f64 = 0.0;
    for (a, da) in dirs.iter().enumerate() {
        for (b, ob) in ff.observations.iter().enumerate() {
            let (Some(a2), Some(b2)) = (find(&-ob, &dirs), find(&-da, &ff.observations)) else {
                return invalid("direction grid is not closed under x -> -x");
            };
            worst = worst.max((ff.values[a][b] - ff.values[a2][b2]).norm());
        }
    }
    let m = ff.max_abs();
    Ok(if m > 0.0 { worst / m } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_scatter::{solve_problem, DeltaSpec};
    use crate::geometry::{equiangular_directions, make_sphere_mesh, make_volume_grid, BoundingBox, DirectionRule};
    use crate::solver::SolveOptions;
    use crate::volume_scatter::PotentialSample;

    fn solve(alpha: f64, v: f64, incs: &[IncidentField], k: f64) -> Vec<DeltaSolution> {
        let g = make_volume_grid(BoundingBox::cube(1.1).unwrap(), 6).unwrap();
        let pot = PotentialSample::from_fn(g, |x| if x.norm() < 0.6 { v } else { 0.0 }).unwrap();
        let d = DeltaSpec::constant(make_sphere_mesh(1.0, 2), alpha).unwrap();
        solve_problem(Some(&pot), Some(&d), incs, k, &SolveOptions::default()).unwrap()
    }

    #[test]
    fn zero_scatterer_gives_zero() {
        let inc = IncidentField::plane_wave(Vec3::z());
        let s = &solve(0.0, 0.0, &[inc], 1.0)[0];
        let obs = equiangular_directions(4, 8);
        let a = farfield_source(s, &obs).unwrap();
        assert_eq!(a.max_abs(), 0.0);
        let b = farfield_kirchhoff(s, 2.0, &obs, &KirchhoffOptions::default()).unwrap();
        assert!(b.max_abs() <= 1e-10);
        assert_eq!(scattering_amplitude(&a).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn two_routes_agree() {
        let inc = IncidentField::plane_wave(Vec3::new(0.2, 0.1, 1.0));
        let s = &solve(1.5, 2.0, &[inc], 2.0)[0];
        let obs = equiangular_directions(6, 12);
        let src = farfield_source(s, &obs).unwrap();
        let k2 = farfield_kirchhoff(s, 2.0, &obs, &KirchhoffOptions::default()).unwrap();
        let k3 = farfield_kirchhoff(s, 3.0, &obs, &KirchhoffOptions::default()).unwrap();
        let ka = farfield_kirchhoff(
            s,
            2.0,
            &obs,
            &KirchhoffOptions {
                gradient: GradientMode::Analytic,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(k2.relative_distance(&src).unwrap().0 <= 1e-3);
        assert!(k3.relative_distance(&k2).unwrap().0 <= 1e-4);
        assert!(ka.relative_distance(&k2).unwrap().0 <= 1e-6);
        assert!(farfield_kirchhoff(s, 0.9, &obs, &KirchhoffOptions::default()).is_err());
    }

    #[test]
    fn born_regime_surface_integral() {
        let k = 1.3;
        let xi = Vec3::new(0.0, 0.0, 1.0);
        let m = make_sphere_mesh(1.0, 3);
        let obs = equiangular_directions(3, 6);
        // first Born term by panel 3-point quadrature
        let born: Vec<Complex64> = obs
            .iter()
            .map(|xh| {
                let mut acc = Complex64::new(0.0, 0.0);
                for q in 0..m.len() {
                    for (y, w) in m.three_point_rule(q) {
                        acc += (I * k * (xi - xh).dot(&y)).exp() * w;
                    }
                }
                -acc / (4.0 * PI)
            })
            .collect();
        let eps = 1e-6;
        let d = DeltaSpec::constant(m.clone(), eps).unwrap();
        let s = &solve_problem(None, Some(&d), &[IncidentField::plane_wave(xi)], k, &SolveOptions::default()).unwrap()[0];
        let ff = farfield_source(s, &obs).unwrap();
        let scale = born.iter().map(|b| b.norm()).fold(0.0, f64::max);
        for (a, b) in ff.values[0].iter().zip(&born) {
            assert!((a / eps - b).norm() < 1e-2 * scale, "{a} {b}");
        }
    }

    #[test]
    fn herglotz_superposition() {
        let rule = DirectionRule::lebedev26();
        let k = 1.4;
        let dens: Vec<Complex64> = rule
            .directions
            .iter()
            .map(|d| Complex64::new(d.x + 0.3, d.z * d.y))
            .collect();
        let mut incs: Vec<IncidentField> = rule.directions.iter().map(|d| IncidentField::plane_wave(*d)).collect();
        incs.push(IncidentField::herglotz(rule.clone(), dens.clone()).unwrap());
        let sols = solve(0.9, 1.0, &incs, k);
        let obs = equiangular_directions(4, 8);
        let rows: Vec<FarFieldPattern> = sols.iter().map(|s| farfield_source(s, &obs).unwrap()).collect();
        let h = &rows[26].values[0];
        let m = h.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (o, hv) in h.iter().enumerate() {
            let sum: Complex64 = (0..26).map(|j| rows[j].values[0][o] * dens[j] * rule.weights[j]).sum();
            assert!((sum - hv).norm() <= 1e-8 * m);
        }
    }

    #[test]
    fn csv_roundtrip() {
        let obs = equiangular_directions(3, 4);
        let rho = make_sigma_k(0.5, Vec3::x(), Vec3::z(), 1.0).unwrap();
        let ff = FarFieldPattern::new(
            1.0,
            vec![Incidence::PlaneWave { direction: [0.0, 0.0, 1.0] }, Incidence::Exponential(rho)],
            obs.clone(),
            vec![
                obs.iter().map(|o| Complex64::new(o.x, o.y)).collect(),
                obs.iter().map(|o| Complex64::new(o.z, 1.0)).collect(),
            ],
        )
        .unwrap();
        let text = ff.to_csv(&json!({"conventions": conventions()}));
        let (back, meta) = FarFieldPattern::from_csv(&text).unwrap();
        assert!(back.same_grid(&ff));
        assert_eq!(back.values, ff.values);
        assert_eq!(meta["conventions"]["amplitude_factor"], json!(amplitude_factor()));
        assert_eq!(ff.relative_distance(&ff).unwrap(), (0.0, 0.0));
        assert!(scattering_amplitude(&ff).is_err());
    }

    #[test]
    fn amplitude_scaling() {
        let obs = equiangular_directions(2, 4);
        let ff = FarFieldPattern::new(
            2.0,
            vec![Incidence::PlaneWave { direction: [1.0, 0.0, 0.0] }],
            obs.clone(),
            vec![obs.iter().map(|o| Complex64::new(o.x, -o.z)).collect()],
        )
        .unwrap();
        let s = scattering_amplitude(&ff).unwrap();
        for (a, b) in s.values[0].iter().zip(&ff.values[0]) {
            assert!((a.norm() - (2.0 * PI).powf(1.5) * b.norm()).abs() < 1e-12);
        }
        let back = farfield_from_amplitude(&s);
        assert!(back.relative_distance(&ff).unwrap().1 < 1e-15);
    }
}
