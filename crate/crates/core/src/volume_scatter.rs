//! Lippmann–Schwinger solver for a regular potential V sampled on a grid.

use std::fmt::Write as _;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::boundary_scatter::{solve_problem, DeltaSolution};
use crate::discretization::Nodes;
use crate::error::{invalid, Error, Result};
use crate::geometry::{Vec3, VolumeGrid};
use crate::kernels::{check_k, IncidentField};
use crate::solver::SolveOptions;

/// Real potential per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSample {
    grid: VolumeGrid,
    values: Vec<f64>,
}

impl PotentialSample {
    pub fn new(grid: VolumeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "potential has {} values for {} cells",
                values.len(),
                grid.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("potential values must be finite");
        }
        Ok(Self { grid, values })
    }

    pub fn zero(grid: VolumeGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Samples `f` at cell centers.
    pub fn from_fn(grid: VolumeGrid, f: impl Fn(&Vec3) -> f64 + Sync) -> Result<Self> {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.cell_center(i)))
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &VolumeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Cells on the box surface carrying a nonzero potential; a nonzero count
    /// means supp V is probably cut off by the box.
    pub fn boundary_support_cells(&self) -> usize {
        (0..self.grid.len())
            .filter(|&i| self.values[i] != 0.0 && self.grid.is_boundary_cell(i))
            .count()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Complex field per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeField {
    pub grid: VolumeGrid,
    pub values: Vec<Complex64>,
}

impl VolumeField {
    /// CSV with columns cell,x,y,z,re_psi,im_psi.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cell,x,y,z,re_psi,im_psi\n");
        for (i, v) in self.values.iter().enumerate() {
            let c = self.grid.cell_center(i);
            let _ = writeln!(s, "{i},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", c.x, c.y, c.z, v.re, v.im);
        }
        s
    }
}

/// G[i][j] ≈ ∫_{cell j} e^{ik|c_i−y|}/(4π|c_i−y|) dy for every pair of cells.
/// Off-diagonal entries use the midpoint rule; the diagonal replaces the cell
/// by its equal-volume ball of radius a: real part (cos ka + ka sin ka − 1)/k²
/// (a²/2 at k = 0), imaginary part k·vol/(4π).
pub fn assemble_volume_operator(grid: &VolumeGrid, k: f64, opts: &SolveOptions) -> Result<Mat<Complex64>> {
    if !(k >= 0.0 && k.is_finite()) {
        return invalid("wavenumber must be nonnegative");
    }
    let n = grid.len();
    let cap = opts.max_cells.min(opts.max_unknowns);
    if n > cap {
        return Err(Error::Size {
            what: "dense volume operator",
            got: n,
            max: cap,
        });
    }
    let nodes = Nodes::new(Some(grid), None);
    let vol = grid.cell_volume();
    let cols: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            (0..n)
                .map(|i| if i == j { nodes.self_term(i, k) * vol } else { nodes.pair(i, j, k) * vol })
                .collect()
        })
        .collect();
    Ok(Mat::from_fn(n, n, |i, j| cols[j][i]))
}

/// Total field of (−Δ + V − k²)ψ = 0 with incident ψ⁰ on the grid:
/// (I + G·diag(V)) ψ = ψ⁰.
pub fn solve_lippmann_schwinger(
    v: &PotentialSample,
    inc: &IncidentField,
    k: f64,
    opts: &SolveOptions,
) -> Result<(VolumeField, DeltaSolution)> {
    check_k(k)?;
    let mut sols = solve_problem(Some(v), None, std::slice::from_ref(inc), k, opts)?;
    let sol = sols.pop().expect("one incident field");
    let field = sol.volume_field().expect("grid present");
    Ok((field, sol))
}

/// ψ(x) = ψ⁰(x) − Σ_j G(x, c_j) V_j ψ_j vol_j, with the ball self-correction
/// inside a cell's equivalent ball.
pub fn eval_volume_field(sol: &DeltaSolution, x: &Vec3) -> Result<Complex64> {
    Ok(sol.incident().eval(sol.k(), x)? + sol.scattered(x))
}
