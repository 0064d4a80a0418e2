//! δ-shell scattering: single layer on Γ, the coupled cell/panel solve and
//! field evaluation from the solved sources.

use std::fmt::Write as _;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::discretization::Nodes;
use crate::error::{invalid, Error, Result};
use crate::geometry::{SurfaceMesh, Vec3};
use crate::kernels::{check_k, CVec3, IncidentField};
use crate::solver::{scattered_at, scattered_grad_at, solve_nodal, NodalSystem, SolveOptions};
use crate::volume_scatter::{PotentialSample, VolumeField};

/// Surface strength α per panel.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSpec {
    mesh: SurfaceMesh,
    alpha: Vec<f64>,
}

impl DeltaSpec {
    pub fn new(mesh: SurfaceMesh, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != mesh.len() {
            return invalid(format!("alpha has {} values for {} panels", alpha.len(), mesh.len()));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return invalid("alpha values must be finite");
        }
        Ok(Self { mesh, alpha })
    }

    pub fn constant(mesh: SurfaceMesh, alpha: f64) -> Result<Self> {
        let n = mesh.len();
        Self::new(mesh, vec![alpha; n])
    }

    pub fn mesh(&self) -> &SurfaceMesh {
        &self.mesh
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// (Σ |α_q|^p area_q)^{1/p}.
    pub fn lp_norm(&self, p: f64) -> f64 {
        self.alpha
            .iter()
            .zip(self.mesh.areas())
            .map(|(a, w)| a.abs().powf(p) * w)
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// η = α γ₀ψ per panel.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDensity {
    pub mesh: SurfaceMesh,
    pub eta: Vec<Complex64>,
}

struct Shared {
    sys: NodalSystem,
    potential: Option<PotentialSample>,
    delta: Option<DeltaSpec>,
}

/// Solved total field for one incident wave.
#[derive(Clone)]
pub struct DeltaSolution {
    shared: Arc<Shared>,
    psi: Vec<Complex64>,
    sources: Vec<(usize, Complex64)>,
    incident: IncidentField,
    residual: f64,
}

/// Field value with a flag for points too close to Γ for the panel rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub value: Complex64,
    pub near_field_warning: bool,
}

impl std::fmt::Debug for DeltaSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DeltaSolution")
            .field("k", &self.k())
            .field("nodes", &self.psi.len())
            .field("active", &self.sources.len())
            .field("residual", &self.residual)
            .finish()
    }
}

impl DeltaSolution {
    pub fn k(&self) -> f64 {
        self.shared.sys.k
    }

    pub fn incident(&self) -> &IncidentField {
        &self.incident
    }

    /// ‖Aψ − ψ⁰‖/‖ψ⁰‖ of the dense system.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn condition_estimate(&self) -> f64 {
        self.shared.sys.condition
    }

    pub fn potential(&self) -> Option<&PotentialSample> {
        self.shared.potential.as_ref()
    }

    pub fn delta(&self) -> Option<&DeltaSpec> {
        self.shared.delta.as_ref()
    }

    pub fn nodes(&self) -> &Nodes {
        &self.shared.sys.nodes
    }

    /// Coefficient per node: V on cells, α on panels.
    pub fn coefficients(&self) -> &[f64] {
        &self.shared.sys.coeff
    }

    /// Total field at every node (cells first, then panel centroids).
    pub fn nodal_values(&self) -> &[Complex64] {
        &self.psi
    }

    /// Point sources (node index, c_j w_j ψ_j) of the scattered field.
    pub fn sources(&self) -> &[(usize, Complex64)] {
        &self.sources
    }

    pub fn volume_field(&self) -> Option<VolumeField> {
        let v = self.shared.potential.as_ref()?;
        let n = v.grid().len();
        Some(VolumeField {
            grid: v.grid().clone(),
            values: self.psi[..n].to_vec(),
        })
    }

    /// γ₀ψ at panel centroids.
    pub fn trace(&self) -> &[Complex64] {
        &self.psi[self.shared.sys.nodes.n_cells()..]
    }

    pub fn density(&self) -> Option<BoundaryDensity> {
        let d = self.shared.delta.as_ref()?;
        let eta = self.trace().iter().zip(&d.alpha).map(|(t, a)| t * a).collect();
        Some(BoundaryDensity {
            mesh: d.mesh.clone(),
            eta,
        })
    }

    /// ψ_sc(x) = −Σ_j K(x, c_j) V_j ψ_j vol_j − Σ_q K(x, c_q) η_q area_q.
    pub fn scattered(&self, x: &Vec3) -> Complex64 {
        scattered_at(&self.shared.sys.nodes, &self.sources, self.k(), x)
    }

    pub fn scattered_grad(&self, x: &Vec3) -> CVec3 {
        scattered_grad_at(&self.shared.sys.nodes, &self.sources, self.k(), x)
    }

    pub fn total(&self, x: &Vec3) -> Result<FieldSample> {
        let value = self.incident.eval(self.k(), x)? + self.scattered(x);
        let near_field_warning = self.shared.delta.is_some() && self.shared.sys.nodes.nearest_panel_ratio(x) <= 0.25;
        Ok(FieldSample {
            value,
            near_field_warning,
        })
    }

    /// Radius about the origin containing every active source element.
    pub fn support_radius(&self) -> f64 {
        let nodes = &self.shared.sys.nodes;
        self.shared
            .sys
            .active
            .iter()
            .map(|&j| nodes.centers[j].norm() + nodes.influence_radius(j).max(half_cell_diagonal(self, j)))
            .fold(0.0, f64::max)
    }

    /// True when both solutions were produced by the same factorization.
    pub fn shares_system_with(&self, other: &DeltaSolution) -> bool {
        Arc::ptr_eq(&self.shared, &other.shared)
    }

    /// CSV with columns panel,cx,cy,cz,re_eta,im_eta,alpha.
    pub fn density_csv(&self) -> Option<String> {
        let d = self.shared.delta.as_ref()?;
        let mut s = String::from("panel,cx,cy,cz,re_eta,im_eta,alpha\n");
        for (q, t) in self.trace().iter().enumerate() {
            let c = d.mesh.centroids()[q];
            let eta = t * d.alpha[q];
            let _ = writeln!(
                s,
                "{q},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                c.x, c.y, c.z, eta.re, eta.im, d.alpha[q]
            );
        }
        Some(s)
    }
}

fn half_cell_diagonal(sol: &DeltaSolution, j: usize) -> f64 {
    match (&sol.shared.potential, j < sol.shared.sys.nodes.n_cells()) {
        (Some(v), true) => 0.5 * v.grid().spacing().norm(),
        _ => 0.0,
    }
}

/// Solves one scattering problem for several incident fields with a single
/// factorization. Either part may be absent.
pub fn solve_problem(
    potential: Option<&PotentialSample>,
    delta: Option<&DeltaSpec>,
    incs: &[IncidentField],
    k: f64,
    opts: &SolveOptions,
) -> Result<Vec<DeltaSolution>> {
    check_k(k)?;
    if incs.is_empty() {
        return invalid("no incident fields");
    }
    let nodes = Nodes::new(potential.map(|p| p.grid()), delta.map(|d| d.mesh()));
    let mut coeff = Vec::with_capacity(nodes.len());
    if let Some(p) = potential {
        coeff.extend_from_slice(p.values());
    }
    if let Some(d) = delta {
        coeff.extend_from_slice(d.alpha());
    }
    let (sys, fields) = solve_nodal(Arc::new(nodes), coeff, incs, k, opts)?;
    let shared = Arc::new(Shared {
        sys,
        potential: potential.cloned(),
        delta: delta.cloned(),
    });
    Ok(fields
        .into_iter()
        .zip(incs)
        .map(|(f, inc)| DeltaSolution {
            sources: shared.sys.sources(&f.psi),
            shared: shared.clone(),
            psi: f.psi,
            incident: inc.clone(),
            residual: f.residual,
        })
        .collect())
}

/// ψ^{V,α} for one incident field: the coupled system over cells and panels.
pub fn solve_delta_system(
    v: &PotentialSample,
    delta: &DeltaSpec,
    inc: &IncidentField,
    k: f64,
    opts: &SolveOptions,
) -> Result<DeltaSolution> {
    let mut s = solve_problem(Some(v), Some(delta), std::slice::from_ref(inc), k, opts)?;
    Ok(s.pop().expect("one incident field"))
}

/// S[i][j] ≈ ∫_{panel j} e^{ik|c_i−y|}/(4π|c_i−y|) dσ(y). The static part is
/// integrated analytically over the flat panel for the self term and for
/// panels within a few diameters (averaged over the two collocation points,
/// so S·diag(1/area) is exactly symmetric); the bounded remainder
/// (e^{ikr} − 1)/(4πr) uses the 3-point rule on the diagonal and the
/// centroid elsewhere.
pub fn assemble_single_layer(mesh: &SurfaceMesh, k: f64, opts: &SolveOptions) -> Result<Mat<Complex64>> {
    if !(k >= 0.0 && k.is_finite()) {
        return invalid("wavenumber must be nonnegative");
    }
    let n = mesh.len();
    if n > opts.max_panels {
        return Err(Error::Size {
            what: "panels",
            got: n,
            max: opts.max_panels,
        });
    }
    let nodes = Nodes::new(None, Some(mesh));
    let cols: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let w = mesh.areas()[j];
            (0..n)
                .map(|i| if i == j { nodes.self_term(i, k) * w } else { nodes.pair(i, j, k) * w })
                .collect()
        })
        .collect();
    Ok(Mat::from_fn(n, n, |i, j| cols[j][i]))
}

/// Total field at x with a near-surface flag.
pub fn eval_total_field(sol: &DeltaSolution, x: &Vec3) -> Result<FieldSample> {
    sol.total(x)
}

/// Single layer SLξ(x) = Σ_q K(x, q) ξ_q area_q.
pub fn single_layer_at(nodes: &Nodes, density: &[f64], k: f64, x: &Vec3) -> Complex64 {
    let off = nodes.n_cells();
    density
        .iter()
        .enumerate()
        .filter(|(_, d)| **d != 0.0)
        .map(|(q, d)| nodes.eval_kernel(x, off + q, k) * (d * nodes.weights[off + q]))
        .sum()
}

/// One-sided normal derivatives and the resulting jump of SLξ.
#[derive(Debug, Clone)]
pub struct JumpReport {
    pub exterior: Vec<Complex64>,
    pub interior: Vec<Complex64>,
    /// ‖[∂ₙ SLξ] + ξ‖ / ‖ξ‖ (area-weighted)
    pub relative_error: f64,
}

/// Checks [∂ₙ SLξ] = −ξ panel by panel. Each one-sided limit is extrapolated
/// linearly from central differences at offsets δ and 2δ along ±n, with
/// δ = 0.02·diam²/R (R the mesh radius), so δ/diam shrinks under refinement.
pub fn check_jump_relation(mesh: &SurfaceMesh, k: f64, xi: &[f64]) -> Result<JumpReport> {
    if !(k >= 0.0 && k.is_finite()) {
        return invalid("wavenumber must be nonnegative");
    }
    if xi.len() != mesh.len() {
        return invalid("density length must match panel count");
    }
    let nodes = Nodes::new(None, Some(mesh));
    let center: Vec3 = mesh.vertices().iter().sum::<Vec3>() / mesh.vertices().len() as f64;
    let radius = mesh.bounding_radius(&center);
    // static part integrated analytically on every panel, so the evaluator has no near/far switch
    let off = nodes.n_cells();
    let f = |x: &Vec3| -> Complex64 {
        xi.iter()
            .enumerate()
            .filter(|(_, d)| **d != 0.0)
            .map(|(q, d)| nodes.eval_panel_kernel_exact(x, off + q, k) * (d * nodes.weights[off + q]))
            .sum()
    };
    let results: Vec<(Complex64, Complex64)> = (0..mesh.len())
        .into_par_iter()
        .map(|q| {
            let c = mesh.centroids()[q];
            let n = mesh.normals()[q];
            let d = mesh.diameters()[q];
            let delta = 0.02 * d * d / radius;
            let deriv = |side: f64, off: f64| {
                let x = c + n * (side * off);
                (f(&(x + n * (0.5 * delta))) - f(&(x - n * (0.5 * delta)))) / delta
            };
            let ext = deriv(1.0, delta) * 2.0 - deriv(1.0, 2.0 * delta);
            let int = deriv(-1.0, delta) * 2.0 - deriv(-1.0, 2.0 * delta);
            (ext, int)
        })
        .collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for (q, (e, i)) in results.iter().enumerate() {
        let w = mesh.areas()[q];
        num += w * (e - i + xi[q]).norm_sqr();
        den += w * xi[q] * xi[q];
    }
    Ok(JumpReport {
        exterior: results.iter().map(|r| r.0).collect(),
        interior: results.iter().map(|r| r.1).collect(),
        relative_error: if den > 0.0 { (num / den).sqrt() } else { num.sqrt() },
    })
}
