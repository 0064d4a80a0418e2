use std::f64::consts::PI;

use super::quadrature::gauss_legendre;
use super::Vec3;
use crate::error::{invalid, Result};

/// Product quadrature on the sphere of radius `radius` about the origin:
/// Gauss–Legendre in cos θ times the uniform rule in φ.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    radius: f64,
    n_theta: usize,
    n_phi: usize,
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
    normals: Vec<Vec3>,
}

pub fn make_sphere_grid(radius: f64, n_theta: usize, n_phi: usize) -> Result<SphereGrid> {
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid("sphere grid radius must be positive");
    }
    if n_theta < 2 || n_phi < 4 {
        return invalid("sphere grid needs n_theta >= 2 and n_phi >= 4");
    }
    let (ct, wt) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    let mut normals = Vec::with_capacity(n_theta * n_phi);
    for (c, w) in ct.iter().zip(&wt) {
        let s = (1.0 - c * c).sqrt();
        for j in 0..n_phi {
            let phi = j as f64 * dphi;
            let n = Vec3::new(s * phi.cos(), s * phi.sin(), *c);
            normals.push(n);
            nodes.push(n * radius);
            weights.push(w * dphi * radius * radius);
        }
    }
    Ok(SphereGrid {
        radius,
        n_theta,
        n_phi,
        nodes,
        weights,
        normals,
    })
}

impl SphereGrid {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_theta, self.n_phi)
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<T, F>(&self, f: F) -> T
    where
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
        F: Fn(&Vec3) -> T,
    {
        self.nodes.iter().zip(&self.weights).map(|(x, &w)| f(x) * w).sum()
    }
}

/// Unit directions with quadrature weights summing to 4π.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionRule {
    pub directions: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl DirectionRule {
    /// The unit-sphere product grid.
    pub fn product(n_theta: usize, n_phi: usize) -> Result<Self> {
        let g = make_sphere_grid(1.0, n_theta, n_phi)?;
        Ok(Self {
            directions: g.normals,
            weights: g.weights,
        })
    }

    /// 26-point Lebedev rule (degree 7), closed under x -> -x.
    pub fn lebedev26() -> Self {
        let mut directions = Vec::with_capacity(26);
        let mut weights = Vec::with_capacity(26);
        let four_pi = 4.0 * PI;
        for axis in 0..3 {
            for s in [1.0, -1.0] {
                let mut v = Vec3::zeros();
                v[axis] = s;
                directions.push(v);
                weights.push(four_pi / 21.0);
            }
        }
        let r2 = 0.5f64.sqrt();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            for s in [1.0, -1.0] {
                for t in [1.0, -1.0] {
                    let mut v = Vec3::zeros();
                    v[a] = s * r2;
                    v[b] = t * r2;
                    directions.push(v);
                    weights.push(four_pi * 4.0 / 105.0);
                }
            }
        }
        let r3 = (1.0f64 / 3.0).sqrt();
        for sx in [1.0, -1.0] {
            for sy in [1.0, -1.0] {
                for sz in [1.0, -1.0] {
                    directions.push(Vec3::new(sx, sy, sz) * r3);
                    weights.push(four_pi * 9.0 / 280.0);
                }
            }
        }
        Self { directions, weights }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// Midpoint-equiangular directions: θ_i = (i + ½)π/n_theta, φ_j = 2πj/n_phi.
/// With even `n_phi` the set is closed under x -> -x.
pub fn equiangular_directions(n_theta: usize, n_phi: usize) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let th = (i as f64 + 0.5) * PI / n_theta as f64;
        for j in 0..n_phi {
            let ph = 2.0 * PI * j as f64 / n_phi as f64;
            out.push(direction_from_angles(th, ph));
        }
    }
    out
}

pub fn direction_from_angles(theta: f64, phi: f64) -> Vec3 {
    Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// (θ, φ) of a unit vector, φ in [0, 2π).
pub fn angles_of(d: &Vec3) -> (f64, f64) {
    let th = d.z.clamp(-1.0, 1.0).acos();
    let mut ph = d.y.atan2(d.x);
    if ph < 0.0 {
        ph += 2.0 * PI;
    }
    (th, ph)
}
