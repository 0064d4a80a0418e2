//! Collocation nodes (cell centers, panel centroids) and the symmetric
//! element-averaged kernel shared by the volume and surface solvers.
//!
//! K(x, j) approximates the average of e^{ik|x−y|}/(4π|x−y|) over element j.
//! The static part 1/(4πr) is integrated exactly where it matters (equal-volume
//! ball for cells, flat triangle for panels near x); the bounded remainder
//! (e^{ikr} − 1)/(4πr) is taken at the element center, or by the panel's
//! 3-point rule for evaluation points near a panel. Pair entries K_ij are
//! symmetric in (i, j), which makes the discrete operators reciprocal.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::geometry::triangle::{triangle_potential, triangle_potential_grad};
use crate::geometry::{SurfaceMesh, Vec3, VolumeGrid};
use crate::kernels::CVec3;

/// Panels closer than this many diameters use the analytic static integral.
pub const NEAR_FACTOR: f64 = 2.0;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub(crate) enum NodeKind {
    Cell {
        radius: f64,
    },
    Panel {
        tri: [Vec3; 3],
        near: f64,
        /// ∫ over the own panel of 1/(4π|c − y|), c the centroid
        static_self: f64,
        rule: [(Vec3, f64); 3],
    },
}

/// Cells of a grid followed by panels of a mesh.
#[derive(Debug, Clone)]
pub struct Nodes {
    pub(crate) centers: Vec<Vec3>,
    pub(crate) weights: Vec<f64>,
    pub(crate) kinds: Vec<NodeKind>,
    pub(crate) n_cells: usize,
}

impl Nodes {
    pub fn new(grid: Option<&VolumeGrid>, mesh: Option<&SurfaceMesh>) -> Self {
        let mut centers = Vec::new();
        let mut weights = Vec::new();
        let mut kinds = Vec::new();
        if let Some(g) = grid {
            let a = g.equivalent_radius();
            for i in 0..g.len() {
                centers.push(g.cell_center(i));
                weights.push(g.cell_volume());
                kinds.push(NodeKind::Cell { radius: a });
            }
        }
        let n_cells = centers.len();
        if let Some(m) = mesh {
            for q in 0..m.len() {
                let tri = m.panel(q);
                let c = m.centroids()[q];
                centers.push(c);
                weights.push(m.areas()[q]);
                kinds.push(NodeKind::Panel {
                    tri,
                    near: NEAR_FACTOR * m.diameters()[q],
                    static_self: triangle_potential(&c, &tri) / (4.0 * PI),
                    rule: m.three_point_rule(q),
                });
            }
        }
        Self {
            centers,
            weights,
            kinds,
            n_cells,
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_panels(&self) -> usize {
        self.len() - self.n_cells
    }

    pub fn centers(&self) -> &[Vec3] {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Radius beyond which element j acts as a point source.
    pub(crate) fn influence_radius(&self, j: usize) -> f64 {
        match &self.kinds[j] {
            NodeKind::Cell { radius } => *radius,
            NodeKind::Panel { near, .. } => *near,
        }
    }

    /// Average over element j of 1/(4π|x − y|).
    fn static_avg(&self, x: &Vec3, j: usize) -> f64 {
        let r = (x - self.centers[j]).norm();
        match &self.kinds[j] {
            NodeKind::Cell { radius } => {
                if r < *radius {
                    (0.5 * radius * radius - r * r / 6.0) / self.weights[j]
                } else {
                    1.0 / (4.0 * PI * r)
                }
            }
            NodeKind::Panel { tri, near, .. } => {
                if r < *near {
                    triangle_potential(x, tri) / (4.0 * PI * self.weights[j])
                } else {
                    1.0 / (4.0 * PI * r)
                }
            }
        }
    }

    fn static_avg_grad(&self, x: &Vec3, j: usize) -> Vec3 {
        let d = x - self.centers[j];
        let r = d.norm();
        match &self.kinds[j] {
            NodeKind::Cell { radius } => {
                if r < *radius {
                    -d / (3.0 * self.weights[j])
                } else {
                    -d / (4.0 * PI * r * r * r)
                }
            }
            NodeKind::Panel { tri, near, .. } => {
                if r < *near {
                    triangle_potential_grad(x, tri) / (4.0 * PI * self.weights[j])
                } else {
                    -d / (4.0 * PI * r * r * r)
                }
            }
        }
    }

    /// Diagonal entry K_jj.
    pub(crate) fn self_term(&self, j: usize, k: f64) -> Complex64 {
        let re = match &self.kinds[j] {
            NodeKind::Cell { radius } => ball_self_real(*radius, k) / self.weights[j],
            NodeKind::Panel {
                static_self, rule, ..
            } => {
                let c = self.centers[j];
                let smooth: f64 = rule
                    .iter()
                    .map(|(p, w)| w * smooth_kernel_re((p - c).norm(), k))
                    .sum();
                (static_self + smooth) / self.weights[j]
            }
        };
        Complex64::new(re, k / (4.0 * PI))
    }

    /// Symmetric off-diagonal entry K_ij, i ≠ j.
    pub(crate) fn pair(&self, i: usize, j: usize, k: f64) -> Complex64 {
        let (ci, cj) = (self.centers[i], self.centers[j]);
        let r = (ci - cj).norm();
        let stat = match (&self.kinds[i], &self.kinds[j]) {
            (NodeKind::Cell { radius: ai }, NodeKind::Cell { radius: aj }) => {
                if r < ai.max(*aj) {
                    0.5 * (self.static_avg(&ci, j) + self.static_avg(&cj, i))
                } else {
                    1.0 / (4.0 * PI * r)
                }
            }
            (NodeKind::Panel { near: ni, .. }, NodeKind::Panel { near: nj, .. }) => {
                if r < ni.max(*nj) {
                    0.5 * (panel_static(&ci, &self.kinds[j], self.weights[j])
                        + panel_static(&cj, &self.kinds[i], self.weights[i]))
                } else {
                    1.0 / (4.0 * PI * r)
                }
            }
            (NodeKind::Cell { .. }, NodeKind::Panel { .. }) => self.static_avg(&ci, j),
            (NodeKind::Panel { .. }, NodeKind::Cell { .. }) => self.static_avg(&cj, i),
        };
        smooth_kernel(r, k) + stat
    }

    /// K(x, j) for an arbitrary point; at the node itself this is K_jj.
    pub(crate) fn eval_kernel(&self, x: &Vec3, j: usize, k: f64) -> Complex64 {
        let r = (x - self.centers[j]).norm();
        if r <= 1e-12 * self.influence_radius(j) {
            return self.self_term(j, k);
        }
        self.smooth_part(x, j, k) + self.static_avg(x, j)
    }

    /// Bounded part of K(x, j): 3-point rule over a panel when x is near it,
    /// so the normal derivative has no spurious kink across the panel.
    fn smooth_part(&self, x: &Vec3, j: usize, k: f64) -> Complex64 {
        match &self.kinds[j] {
            NodeKind::Panel { rule, near, .. } if (x - self.centers[j]).norm() < *near => {
                rule.iter().map(|(p, w)| smooth_kernel((x - p).norm(), k) * *w).sum::<Complex64>()
                    / self.weights[j]
            }
            _ => smooth_kernel((x - self.centers[j]).norm(), k),
        }
    }

    /// Panel-averaged kernel with the static part integrated analytically
    /// at any distance. Continuous in x off the panel plane.
    pub(crate) fn eval_panel_kernel_exact(&self, x: &Vec3, j: usize, k: f64) -> Complex64 {
        match &self.kinds[j] {
            NodeKind::Panel { tri, rule, .. } => {
                let smooth: Complex64 =
                    rule.iter().map(|(p, w)| smooth_kernel((x - p).norm(), k) * *w).sum();
                (smooth + triangle_potential(x, tri) / (4.0 * PI)) / self.weights[j]
            }
            NodeKind::Cell { .. } => self.eval_kernel(x, j, k),
        }
    }

    /// ∇ₓK(x, j); x must not coincide with the node.
    pub(crate) fn eval_kernel_grad(&self, x: &Vec3, j: usize, k: f64) -> CVec3 {
        let d = x - self.centers[j];
        let r = d.norm();
        let s = self.static_avg_grad(x, j);
        let sg = |d: Vec3| {
            let r = d.norm();
            let ds = if r > 0.0 { smooth_kernel_dr(r, k) / r } else { Complex64::new(0.0, 0.0) };
            CVec3::new(ds * d.x, ds * d.y, ds * d.z)
        };
        let smooth = match &self.kinds[j] {
            NodeKind::Panel { rule, near, .. } if r < *near => {
                rule.iter().map(|(p, w)| sg(x - p) * Complex64::from(*w)).sum::<CVec3>()
                    / Complex64::from(self.weights[j])
            }
            _ => sg(d),
        };
        smooth + CVec3::new(s.x.into(), s.y.into(), s.z.into())
    }

    /// Smallest distance from x to a panel centroid, relative to that panel's diameter.
    pub(crate) fn nearest_panel_ratio(&self, x: &Vec3) -> f64 {
        (self.n_cells..self.len())
            .map(|j| (x - self.centers[j]).norm() / (self.influence_radius(j) / NEAR_FACTOR))
            .fold(f64::INFINITY, f64::min)
    }
}

fn panel_static(x: &Vec3, kind: &NodeKind, area: f64) -> f64 {
    match kind {
        NodeKind::Panel { tri, .. } => triangle_potential(x, tri) / (4.0 * PI * area),
        NodeKind::Cell { .. } => unreachable!(),
    }
}

/// (e^{ikr} − 1)/(4πr), continuous at r = 0.
pub(crate) fn smooth_kernel(r: f64, k: f64) -> Complex64 {
    let x = k * r;
    if x < 1e-4 {
        // ik − k²r/2 − ik³r²/6
        return Complex64::new(-0.5 * k * x, k * (1.0 - x * x / 6.0)) / (4.0 * PI);
    }
    ((I * x).exp() - 1.0) / (4.0 * PI * r)
}

fn smooth_kernel_re(r: f64, k: f64) -> f64 {
    smooth_kernel(r, k).re
}

/// d/dr of [`smooth_kernel`].
fn smooth_kernel_dr(r: f64, k: f64) -> Complex64 {
    let x = k * r;
    if x < 1e-3 {
        // −k²/2 − ik³r/3 + k⁴r²/8
        return Complex64::new(-0.5 * k * k + k * k * x * x / 8.0, -k * k * x / 3.0) / (4.0 * PI);
    }
    ((I * x).exp() * (I * x - 1.0) + 1.0) / (4.0 * PI * r * r)
}

/// ∫ over the ball |y| < a of cos(k|y|)/(4π|y|) = (cos ka + ka sin ka − 1)/k².
pub fn ball_self_real(a: f64, k: f64) -> f64 {
    let x = k * a;
    if x < 1e-2 {
        return a * a * (0.5 - x * x / 8.0 + x.powi(4) / 144.0);
    }
    (x.cos() + x * x.sin() - 1.0) / (k * k)
}
