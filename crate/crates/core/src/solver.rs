//! Dense collocation solve shared by the volume and δ-shell problems.
//!
//! Unknowns are the total field ψ at every active node (cells with V ≠ 0,
//! panels with α ≠ 0). Row i reads ψ_i + Σ_j K_ij c_j w_j ψ_j = ψ⁰(x_i), with
//! c = V on cells and c = α on panels; the panel unknown is the trace γ₀ψ and
//! the surface density is η = α γ₀ψ.

use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::Nodes;
use crate::error::{Error, Result};
use crate::kernels::{CVec3, IncidentField};
use crate::linalg::DenseLu;
use crate::geometry::Vec3;

/// How the coupled cell/panel system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// One block LU over cells and panels.
    #[default]
    Coupled,
    /// Volume resolvent first, then the surface system with the
    /// V-dependent single layer (Schur complement). For cross-checks.
    Composition,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveOptions {
    pub max_cells: usize,
    pub max_panels: usize,
    /// Cap on the dense system dimension.
    pub max_unknowns: usize,
    pub strategy: Strategy,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_cells: 32 * 32 * 32,
            max_panels: 8192,
            max_unknowns: 8192,
            strategy: Strategy::Coupled,
        }
    }
}

/// ψ at every node for one incident field.
#[derive(Debug, Clone)]
pub(crate) struct NodalField {
    pub psi: Vec<Complex64>,
    pub residual: f64,
}

pub(crate) struct NodalSystem {
    pub nodes: Arc<Nodes>,
    /// c_j per node (V on cells, α on panels)
    pub coeff: Vec<f64>,
    pub k: f64,
    pub active: Vec<usize>,
    pub condition: f64,
}

impl NodalSystem {
    /// c_j w_j for active node position a.
    fn cw(&self, a: usize) -> f64 {
        let j = self.active[a];
        self.coeff[j] * self.nodes.weights[j]
    }

    /// Point sources (node index, c_j w_j ψ_j) of a solved field.
    pub fn sources(&self, psi: &[Complex64]) -> Vec<(usize, Complex64)> {
        self.active
            .iter()
            .map(|&j| (j, psi[j] * self.coeff[j] * self.nodes.weights[j]))
            .collect()
    }
}

fn build_matrix(nodes: &Nodes, active: &[usize], cw: &[f64], k: f64) -> Mat<Complex64> {
    let m = active.len();
    let rows: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|a| {
            let i = active[a];
            (0..m)
                .map(|b| {
                    let j = active[b];
                    if a == b {
                        Complex64::new(1.0, 0.0) + nodes.self_term(i, k) * cw[b]
                    } else {
                        nodes.pair(i, j, k) * cw[b]
                    }
                })
                .collect()
        })
        .collect();
    Mat::from_fn(m, m, |a, b| rows[a][b])
}

fn incident_at(nodes: &Nodes, idx: &[usize], inc: &IncidentField, k: f64) -> Result<Vec<Complex64>> {
    idx.iter().map(|&i| inc.eval(k, &nodes.centers[i])).collect()
}

/// Solves for all incident fields with one factorization.
pub(crate) fn solve_nodal(
    nodes: Arc<Nodes>,
    coeff: Vec<f64>,
    incs: &[IncidentField],
    k: f64,
    opts: &SolveOptions,
) -> Result<(NodalSystem, Vec<NodalField>)> {
    assert_eq!(coeff.len(), nodes.len());
    if nodes.n_cells() > opts.max_cells {
        return Err(Error::Size {
            what: "grid cells",
            got: nodes.n_cells(),
            max: opts.max_cells,
        });
    }
    if nodes.n_panels() > opts.max_panels {
        return Err(Error::Size {
            what: "panels",
            got: nodes.n_panels(),
            max: opts.max_panels,
        });
    }
    let active: Vec<usize> = (0..nodes.len()).filter(|&j| coeff[j] != 0.0).collect();
    if active.len() > opts.max_unknowns {
        return Err(Error::Size {
            what: "unknowns",
            got: active.len(),
            max: opts.max_unknowns,
        });
    }
    let mut sys = NodalSystem {
        nodes,
        coeff,
        k,
        active,
        condition: 1.0,
    };
    let m = sys.active.len();
    let nodes = sys.nodes.clone();
    let all: Vec<usize> = (0..nodes.len()).collect();
    let psi0: Vec<Vec<Complex64>> = incs
        .iter()
        .map(|inc| incident_at(&nodes, &all, inc, k))
        .collect::<Result<_>>()?;
    if m == 0 {
        let fields = psi0
            .into_iter()
            .map(|psi| NodalField { psi, residual: 0.0 })
            .collect();
        return Ok((sys, fields));
    }

    let cw: Vec<f64> = (0..m).map(|a| sys.cw(a)).collect();
    let a_mat = build_matrix(&nodes, &sys.active, &cw, k);
    let b = Mat::from_fn(m, incs.len(), |i, r| psi0[r][sys.active[i]]);
    let x = match opts.strategy {
        Strategy::Coupled => {
            let lu = DenseLu::factor(&a_mat)?;
            sys.condition = lu.condition_estimate();
            lu.solve(&b)
        }
        Strategy::Composition => {
            let (x, cond) = solve_by_composition(&nodes, &sys.active, &cw, &a_mat, &b)?;
            sys.condition = cond;
            x
        }
    };
    let ax = &a_mat * &x;
    drop(a_mat);

    let inactive: Vec<usize> = (0..nodes.len()).filter(|&j| sys.coeff[j] == 0.0).collect();
    // K_ia c_a w_a for inactive rows (symmetric pair rule), reused for every right-hand side
    let fill_rows: Vec<Vec<Complex64>> = inactive
        .par_iter()
        .map(|&i| {
            sys.active
                .iter()
                .zip(&cw)
                .map(|(&j, &c)| nodes.pair(i, j, k) * c)
                .collect()
        })
        .collect();

    let mut out = Vec::with_capacity(incs.len());
    for (r, p0) in psi0.into_iter().enumerate() {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..m {
            num += (ax[(i, r)] - b[(i, r)]).norm_sqr();
            den += b[(i, r)].norm_sqr();
        }
        let residual = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
        let mut psi = p0;
        for (a, &j) in sys.active.iter().enumerate() {
            psi[j] = x[(a, r)];
        }
        for (row, &i) in fill_rows.iter().zip(&inactive) {
            let s: Complex64 = row.iter().enumerate().map(|(a, kc)| kc * x[(a, r)]).sum();
            psi[i] -= s;
        }
        out.push(NodalField { psi, residual });
    }
    Ok((sys, out))
}

/// Schur-complement route: eliminate the cell block first.
fn solve_by_composition(
    nodes: &Nodes,
    active: &[usize],
    cw: &[f64],
    a_mat: &Mat<Complex64>,
    b: &Mat<Complex64>,
) -> Result<(Mat<Complex64>, f64)> {
    let m = active.len();
    let mc = active.iter().take_while(|&&j| j < nodes.n_cells()).count();
    let mp = m - mc;
    let nrhs = b.ncols();
    if mc == 0 || mp == 0 {
        let lu = DenseLu::factor(a_mat)?;
        return Ok((lu.solve(b), lu.condition_estimate()));
    }
    let a_cc = Mat::from_fn(mc, mc, |i, j| a_mat[(i, j)]);
    // K_cp and K_pc recovered from A = I + K·diag(cw)
    let k_cp = Mat::from_fn(mc, mp, |i, j| a_mat[(i, mc + j)] / cw[mc + j]);
    let lu_c = DenseLu::factor(&a_cc)?;
    let rhs_c = Mat::from_fn(mc, nrhs + mp, |i, j| if j < nrhs { b[(i, j)] } else { k_cp[(i, j - nrhs)] });
    let sol_c = lu_c.solve(&rhs_c);
    // ψ^V on panels and the V-dependent single layer S^V
    let psi_v_p = Mat::from_fn(mp, nrhs, |p, r| {
        let mut s = b[(mc + p, r)];
        for c in 0..mc {
            s -= a_mat[(mc + p, c)] * sol_c[(c, r)];
        }
        s
    });
    let schur = Mat::from_fn(mp, mp, |p, q| {
        let mut kpq = a_mat[(mc + p, mc + q)];
        if p == q {
            kpq -= Complex64::new(1.0, 0.0);
        }
        kpq /= cw[mc + q];
        for c in 0..mc {
            kpq -= a_mat[(mc + p, c)] * sol_c[(c, nrhs + q)];
        }
        let mut v = kpq * cw[mc + q];
        if p == q {
            v += Complex64::new(1.0, 0.0);
        }
        v
    });
    let lu_p = DenseLu::factor(&schur)?;
    let psi_p = lu_p.solve(&psi_v_p);
    let x = Mat::from_fn(m, nrhs, |i, r| {
        if i < mc {
            let mut s = sol_c[(i, r)];
            for q in 0..mp {
                s -= sol_c[(i, nrhs + q)] * cw[mc + q] * psi_p[(q, r)];
            }
            s
        } else {
            psi_p[(i - mc, r)]
        }
    });
    Ok((x, lu_c.condition_estimate().max(lu_p.condition_estimate())))
}

/// −Σ K(x, j) s_j over point sources.
pub(crate) fn scattered_at(nodes: &Nodes, sources: &[(usize, Complex64)], k: f64, x: &Vec3) -> Complex64 {
    -sources
        .iter()
        .map(|&(j, s)| nodes.eval_kernel(x, j, k) * s)
        .sum::<Complex64>()
}

pub(crate) fn scattered_grad_at(
    nodes: &Nodes,
    sources: &[(usize, Complex64)],
    k: f64,
    x: &Vec3,
) -> CVec3 {
    let mut g = CVec3::zeros();
    for &(j, s) in sources {
        g -= nodes.eval_kernel_grad(x, j, k) * s;
    }
    g
}
