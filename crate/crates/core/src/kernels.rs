//! Outgoing Helmholtz kernel, incident fields and complex directions ρ with ρ·ρ = −k².

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{DirectionRule, Vec3};

pub type CVec3 = nalgebra::Vector3<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Exponential incident waves refuse points with |Re ρ·x| above this.
pub const EXP_GUARD: f64 = 40.0;

pub(crate) fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        invalid(format!("wavenumber must be positive and finite, got {k}"))
    }
}

/// e^{ik|x−y|} / (4π|x−y|).
pub fn helmholtz_kernel(x: &Vec3, y: &Vec3, k: f64) -> Result<Complex64> {
    let r = (x - y).norm();
    if r == 0.0 {
        return Err(Error::Domain("kernel evaluated at coincident points".into()));
    }
    Ok((I * k * r).exp() / (4.0 * PI * r))
}

/// ∇ₓ of [`helmholtz_kernel`].
pub fn helmholtz_kernel_grad(x: &Vec3, y: &Vec3, k: f64) -> Result<CVec3> {
    let d = x - y;
    let r = d.norm();
    if r == 0.0 {
        return Err(Error::Domain("kernel evaluated at coincident points".into()));
    }
    let g = (I * k * r).exp() / (4.0 * PI * r);
    let s = g * (I * k - 1.0 / r) / r;
    Ok(d.map(|c| s * c))
}

pub fn unconjugated_dot(a: &CVec3, b: &CVec3) -> Complex64 {
    a.x * b.x + a.y * b.y + a.z * b.z
}

/// An element ρ = w ζ̂ + i√(w²+k²) ξ̂ of Σ_k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexDirection {
    pub w: f64,
    pub zeta_hat: [f64; 3],
    pub xi_hat: [f64; 3],
    pub k: f64,
    #[serde(skip)]
    rho: CVec3,
}

impl ComplexDirection {
    pub fn rho(&self) -> CVec3 {
        self.rho
    }

    pub fn zeta(&self) -> Vec3 {
        Vec3::from(self.zeta_hat)
    }

    pub fn xi(&self) -> Vec3 {
        Vec3::from(self.xi_hat)
    }

    /// Plane wave e^{ik ξ̂·x}: w = 0.
    pub fn is_plane_wave(&self) -> bool {
        self.w == 0.0
    }

    /// Recomputes ρ after deserialization.
    pub fn rebuild(self) -> Result<Self> {
        make_sigma_k(self.w, self.zeta(), self.xi(), self.k)
    }
}

/// Builds ρ = w ζ̂ + i√(w²+k²) ξ̂; ζ̂, ξ̂ must be orthonormal.
pub fn make_sigma_k(w: f64, zeta_hat: Vec3, xi_hat: Vec3, k: f64) -> Result<ComplexDirection> {
    check_k(k)?;
    if !(w >= 0.0 && w.is_finite()) {
        return invalid("w must be nonnegative");
    }
    let tol = 1e-10;
    if (zeta_hat.norm() - 1.0).abs() > tol || (xi_hat.norm() - 1.0).abs() > tol {
        return invalid("zeta_hat and xi_hat must be unit vectors");
    }
    if zeta_hat.dot(&xi_hat).abs() > tol {
        return invalid("zeta_hat and xi_hat must be orthogonal");
    }
    let s = (w * w + k * k).sqrt();
    let rho = CVec3::new(
        Complex64::new(w * zeta_hat.x, s * xi_hat.x),
        Complex64::new(w * zeta_hat.y, s * xi_hat.y),
        Complex64::new(w * zeta_hat.z, s * xi_hat.z),
    );
    Ok(ComplexDirection {
        w,
        zeta_hat: zeta_hat.into(),
        xi_hat: xi_hat.into(),
        k,
        rho,
    })
}

/// Some unit vector orthogonal to `v` (v ≠ 0).
pub fn orthogonal_unit(v: &Vec3) -> Vec3 {
    let a = if v.x.abs() <= v.y.abs() && v.x.abs() <= v.z.abs() {
        Vec3::x()
    } else if v.y.abs() <= v.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    v.cross(&a).normalize()
}

/// The plane wave e^{ik d̂·x} as the w = 0 element of Σ_k.
pub fn plane_wave_direction(direction: Vec3, k: f64) -> Result<ComplexDirection> {
    let d = direction.normalize();
    make_sigma_k(0.0, orthogonal_unit(&d), d, k)
}

/// ρ₁, ρ₂ ∈ Σ_k with conj(ρ₁) + ρ₂ = −iξ:
/// ρ₁ = wμ̂ + i(ξ/2 + sν̂), ρ₂ = −wμ̂ + i(−ξ/2 + sν̂), s = √(w²+k²−|ξ|²/4).
pub fn sigma_pair_for_xi(
    xi: Vec3,
    k: f64,
    w: f64,
) -> Result<(ComplexDirection, ComplexDirection)> {
    check_k(k)?;
    let xn = xi.norm();
    let s2 = w * w + k * k - 0.25 * xn * xn;
    if s2 < -1e-12 * (k * k + xn * xn) {
        return invalid(format!(
            "insufficient w for this xi: need w^2 + k^2 >= |xi|^2/4 (w={w}, k={k}, |xi|={xn})"
        ));
    }
    let s = s2.max(0.0).sqrt();
    let xhat = if xn > 0.0 { xi / xn } else { Vec3::z() };
    let mu = orthogonal_unit(&xhat);
    let nu = xhat.cross(&mu);
    let big = (w * w + k * k).sqrt();
    let b1 = (xi * 0.5 + nu * s) / big;
    let b2 = (-xi * 0.5 + nu * s) / big;
    // renormalize away rounding so the validation in make_sigma_k passes tightly
    let r1 = make_sigma_k(w, mu, b1.normalize(), k)?;
    let r2 = make_sigma_k(w, -mu, b2.normalize(), k)?;
    Ok((r1, r2))
}

/// Incident fields solving (Δ + k²)u = 0.
#[derive(Debug, Clone, PartialEq)]
pub enum IncidentField {
    /// e^{ik d̂·x}
    PlaneWave { direction: Vec3 },
    /// e^{ρ·x}
    Exponential(ComplexDirection),
    /// Σ_m w_m f_m e^{ik d̂_m·x}
    Herglotz {
        rule: DirectionRule,
        density: Vec<Complex64>,
    },
}

impl IncidentField {
    pub fn plane_wave(direction: Vec3) -> Self {
        IncidentField::PlaneWave {
            direction: direction.normalize(),
        }
    }

    pub fn herglotz(rule: DirectionRule, density: Vec<Complex64>) -> Result<Self> {
        if rule.len() != density.len() || rule.is_empty() {
            return invalid("Herglotz density must match the direction rule");
        }
        Ok(IncidentField::Herglotz { rule, density })
    }

    /// Value and gradient at x.
    pub fn eval_with_grad(&self, k: f64, x: &Vec3) -> Result<(Complex64, CVec3)> {
        match self {
            IncidentField::PlaneWave { direction } => {
                let u = (I * k * direction.dot(x)).exp();
                Ok((u, direction.map(|d| I * k * d * u)))
            }
            IncidentField::Exponential(rho) => {
                let r = rho.rho();
                let phase = r.x * x.x + r.y * x.y + r.z * x.z;
                if phase.re.abs() > EXP_GUARD {
                    return Err(Error::Overflow(phase.re.abs()));
                }
                let u = phase.exp();
                Ok((u, r.map(|c| c * u)))
            }
            IncidentField::Herglotz { rule, density } => {
                let mut u = Complex64::new(0.0, 0.0);
                let mut g = CVec3::zeros();
                for ((d, w), f) in rule.directions.iter().zip(&rule.weights).zip(density) {
                    let e = f * w * (I * k * d.dot(x)).exp();
                    u += e;
                    g += d.map(|c| I * k * c * e);
                }
                Ok((u, g))
            }
        }
    }

    pub fn eval(&self, k: f64, x: &Vec3) -> Result<Complex64> {
        match self {
            IncidentField::PlaneWave { direction } => Ok((I * k * direction.dot(x)).exp()),
            _ => Ok(self.eval_with_grad(k, x)?.0),
        }
    }
}

pub fn eval_incident(f: &IncidentField, k: f64, x: &Vec3) -> Result<Complex64> {
    f.eval(k, x)
}

pub fn eval_incident_grad(f: &IncidentField, k: f64, x: &Vec3) -> Result<CVec3> {
    Ok(f.eval_with_grad(k, x)?.1)
}
