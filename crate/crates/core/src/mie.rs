//! Partial-wave solution for a sphere carrying a constant δ-strength α on
//! r = a and a piecewise-constant radial potential inside.
//!
//! Mode ℓ of the exterior field is j_ℓ(kr) + t_ℓ h_ℓ(kr), so the scattered
//! field is Σ (2ℓ+1) iˡ t_ℓ h_ℓ(kr) P_ℓ(cos θ) and the far field is
//! −(i/k) Σ (2ℓ+1) t_ℓ P_ℓ(cos θ). For real data S_ℓ = 1 + 2t_ℓ has modulus one.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::farfield::{FarFieldPattern, Incidence};
use crate::geometry::Vec3;
use crate::kernels::check_k;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest supported order.
pub const MAX_ORDER: usize = 200;

fn check_arg(l: usize, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Range(format!("argument must be positive, got {x}")));
    }
    if l > MAX_ORDER {
        return Err(Error::Range(format!("order {l} above {MAX_ORDER}")));
    }
    Ok(())
}

/// Miller's downward recurrence for f_{ℓ−1} = (2ℓ+1)/x f_ℓ + s f_{ℓ+1}
/// (s = −1 for j, +1 for i), returning unnormalized values 0..=lmax+1.
fn downward(lmax: usize, x: f64, sign: f64) -> Vec<f64> {
    let top = lmax + 1;
    let start = top + 20 + (x + 8.0 * (top as f64 + x).sqrt()) as usize;
    let mut out = vec![0.0; top + 1];
    let mut fp = 0.0;
    let mut f = 1e-300;
    for l in (1..=start).rev() {
        let fm = (2 * l + 1) as f64 / x * f + sign * fp;
        fp = f;
        f = fm;
        // f now holds order l−1, fp order l
        if l - 1 <= top {
            out[l - 1] = f;
        }
        if l <= top {
            out[l] = fp;
        }
        if f.abs() > 1e250 {
            f *= 1e-250;
            fp *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    out
}

/// j_ℓ(x) for ℓ = 0..=lmax+1.
fn bessel_j_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut v = downward(lmax, x, -1.0);
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    let scale = if j0.abs() >= j1.abs() { j0 / v[0] } else { j1 / v[1] };
    v.iter_mut().for_each(|f| *f *= scale);
    v
}

/// y_ℓ(x) for ℓ = 0..=lmax+1 by upward recurrence.
fn bessel_y_all(lmax: usize, x: f64) -> Result<Vec<f64>> {
    let (s, c) = x.sin_cos();
    let mut v = vec![-c / x, -c / (x * x) - s / x];
    for l in 1..=lmax {
        let next = (2 * l + 1) as f64 / x * v[l] - v[l - 1];
        if !next.is_finite() {
            return Err(Error::Range(format!("y_{} overflows at x = {x}", l + 1)));
        }
        v.push(next);
    }
    v.truncate(lmax + 2);
    Ok(v)
}

/// (j_ℓ(x), j_ℓ'(x)).
pub fn spherical_bessel(l: usize, x: f64) -> Result<(f64, f64)> {
    check_arg(l, x)?;
    let j = bessel_j_all(l, x);
    Ok((j[l], l as f64 / x * j[l] - j[l + 1]))
}

/// (h_ℓ⁽¹⁾(x), h_ℓ⁽¹⁾'(x)) with h = j + i y.
pub fn spherical_hankel(l: usize, x: f64) -> Result<(Complex64, Complex64)> {
    check_arg(l, x)?;
    let j = bessel_j_all(l, x);
    let y = bessel_y_all(l, x)?;
    let lx = l as f64 / x;
    let h = Complex64::new(j[l], y[l]);
    let dh = Complex64::new(lx * j[l] - j[l + 1], lx * y[l] - y[l + 1]);
    Ok((h, dh))
}

/// Regular modified function i_ℓ(x) for ℓ = 0..=lmax+1.
fn modified_i_all(lmax: usize, x: f64) -> Result<Vec<f64>> {
    let mut v = downward(lmax, x, 1.0);
    let i0 = if x < 1e-8 { 1.0 } else { x.sinh() / x };
    if !i0.is_finite() {
        return Err(Error::Range(format!("i_0 overflows at x = {x}")));
    }
    let scale = i0 / v[0];
    v.iter_mut().for_each(|f| *f *= scale);
    Ok(v)
}

/// Decaying modified function k_ℓ(x) with k_0 = e^{−x}/x, ℓ = 0..=lmax+1.
fn modified_k_all(lmax: usize, x: f64) -> Result<Vec<f64>> {
    let e = (-x).exp();
    let mut v = vec![e / x, e * (1.0 + 1.0 / x) / x];
    for l in 1..=lmax {
        let next = v[l - 1] + (2 * l + 1) as f64 / x * v[l];
        if !next.is_finite() {
            return Err(Error::Range(format!("k_{} overflows at x = {x}", l + 1)));
        }
        v.push(next);
    }
    v.truncate(lmax + 2);
    Ok(v)
}

/// Radial medium: δ-shell of strength α on r = a, V piecewise constant inside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialMedium {
    pub a: f64,
    pub alpha: f64,
    /// (outer radius, V) with increasing radii; the last radius equals a.
    pub shells: Vec<(f64, f64)>,
}

impl RadialMedium {
    pub fn new(a: f64, alpha: f64, shells: Vec<(f64, f64)>) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !alpha.is_finite() {
            return invalid("radius must be positive and α finite");
        }
        let shells = if shells.is_empty() { vec![(a, 0.0)] } else { shells };
        let mut prev = 0.0;
        for &(r, v) in &shells {
            if !(r > prev) || !v.is_finite() {
                return invalid("shell radii must increase and V must be finite");
            }
            prev = r;
        }
        if (prev - a).abs() > 1e-14 * a {
            return invalid("last shell must end at the sphere radius");
        }
        Ok(Self { a, alpha, shells })
    }

    /// V = 0 inside, strength α on the sphere.
    pub fn delta_sphere(a: f64, alpha: f64) -> Result<Self> {
        Self::new(a, alpha, Vec::new())
    }

    pub fn potential_at(&self, r: f64) -> f64 {
        self.shells.iter().find(|s| r < s.0).map_or(0.0, |s| s.1)
    }
}

/// Radial basis in one shell: regular and irregular solutions of
/// R'' + 2R'/r + (κ² − ℓ(ℓ+1)/r²)R = 0 with κ² = k² − V.
#[derive(Clone, Copy)]
struct ShellBasis {
    l: usize,
    kappa2: f64,
}

impl ShellBasis {
    /// ((f, f'), (g, g')) at radius r.
    fn eval(&self, r: f64) -> Result<((f64, f64), (f64, f64))> {
        let l = self.l;
        let lf = l as f64;
        if self.kappa2 > 0.0 {
            let q = self.kappa2.sqrt();
            let x = q * r;
            let j = bessel_j_all(l, x);
            let y = bessel_y_all(l, x)?;
            Ok((
                (j[l], q * (lf / x * j[l] - j[l + 1])),
                (y[l], q * (lf / x * y[l] - y[l + 1])),
            ))
        } else if self.kappa2 < 0.0 {
            let q = (-self.kappa2).sqrt();
            let x = q * r;
            let i = modified_i_all(l, x)?;
            let k = modified_k_all(l, x)?;
            Ok((
                (i[l], q * (i[l + 1] + lf / x * i[l])),
                (k[l], q * (-k[l + 1] + lf / x * k[l])),
            ))
        } else {
            Ok((
                (r.powi(l as i32), lf * r.powi(l as i32 - 1)),
                (r.powi(-(l as i32) - 1), -(lf + 1.0) * r.powi(-(l as i32) - 2)),
            ))
        }
    }
}

/// Coefficients for one ℓ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSolution {
    pub l: usize,
    pub t: Complex64,
    /// (A, B) per shell in the (regular, irregular) basis, scaled so the
    /// exterior wave is exactly j_ℓ + t_ℓ h_ℓ.
    pub interior: Vec<(Complex64, Complex64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialWaveSolution {
    pub k: f64,
    pub medium: RadialMedium,
    pub modes: Vec<ModeSolution>,
}

fn solve_mode(m: &RadialMedium, k: f64, l: usize) -> Result<ModeSolution> {
    // propagate (R, R') outward, normalized at every interface
    let mut coeffs: Vec<(f64, f64)> = Vec::with_capacity(m.shells.len());
    let mut state: Option<(f64, f64)> = None;
    let mut r0 = 0.0;
    let mut norms = Vec::with_capacity(m.shells.len());
    for &(r1, v) in &m.shells {
        let basis = ShellBasis { l, kappa2: k * k - v };
        let (a, b) = match state {
            None => (1.0, 0.0),
            Some((u, du)) => {
                let ((f, df), (g, dg)) = basis.eval(r0)?;
                let w = f * dg - df * g;
                ((u * dg - du * g) / w, (f * du - df * u) / w)
            }
        };
        let ((f, df), (g, dg)) = basis.eval(r1)?;
        let (mut u, mut du) = (a * f + b * g, a * df + b * dg);
        // the last state is left unscaled so that a vacuum interior reproduces j exactly
        let last = norms.len() + 1 == m.shells.len();
        let n = if last { 1.0 } else { u.hypot(du) };
        if !(u.hypot(du).is_finite() && u.hypot(du) > 0.0) {
            return Err(Error::Range(format!("radial solution for mode {l} lost range at r = {r1}")));
        }
        u /= n;
        du /= n;
        coeffs.push((a, b));
        norms.push(n);
        state = Some((u, du));
        r0 = r1;
    }
    let (u, du) = state.expect("at least one shell");
    let x = k * m.a;
    let (j, dj) = spherical_bessel(l, x)?;
    let (h, dh) = spherical_hankel(l, x)?;
    let p = du + m.alpha * u;
    let den = h * p - k * dh * u;
    if den.norm() < 1e-300 {
        return Err(Error::Singular(format!("partial-wave matching for mode {l} is singular")));
    }
    let t = (k * dj * u - j * p) / den;
    // physical amplitude of the normalized interior state
    let outer = j + t * h;
    let c = if u.abs() >= du.abs() {
        outer / u
    } else {
        (k * (dj + t * dh) - m.alpha * outer) / du
    };
    // shell s holds R/(n_s n_{s+1} ...) relative to the final state
    let mut interior = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); coeffs.len()];
    let mut tail = 1.0;
    for s in (0..coeffs.len()).rev() {
        tail *= norms[s];
        interior[s] = (c * coeffs[s].0 / tail, c * coeffs[s].1 / tail);
    }
    Ok(ModeSolution { l, t, interior })
}

/// Mode-by-mode matching up to order `l_max`, raised (to at most
/// [`MAX_ORDER`]) until |t_ℓ| has dropped below 1e−14 of its peak.
pub fn solve_partial_waves(m: &RadialMedium, k: f64, l_max: usize) -> Result<PartialWaveSolution> {
    check_k(k)?;
    let mut modes = Vec::new();
    let mut l = 0;
    let mut target = l_max;
    loop {
        while l <= target {
            modes.push(solve_mode(m, k, l)?);
            l += 1;
        }
        let peak = modes.iter().map(|md| md.t.norm()).fold(0.0, f64::max);
        let tail = modes[target.saturating_sub(2)..].iter().map(|md| md.t.norm()).fold(0.0, f64::max);
        if tail <= 1e-14 * peak || peak == 0.0 || target >= MAX_ORDER {
            break;
        }
        target = (target + 10).min(MAX_ORDER);
    }
    Ok(PartialWaveSolution {
        k,
        medium: m.clone(),
        modes,
    })
}

/// P_0..P_n at c.
pub fn legendre_all(n: usize, c: f64) -> Vec<f64> {
    let mut p = vec![1.0, c];
    for l in 1..n {
        let lf = l as f64;
        p.push(((2.0 * lf + 1.0) * c * p[l] - lf * p[l - 1]) / (lf + 1.0));
    }
    p.truncate(n + 1);
    p
}

impl PartialWaveSolution {
    pub fn t(&self) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.t).collect()
    }

    pub fn order(&self) -> usize {
        self.modes.len() - 1
    }

    /// max_ℓ ||1 + 2t_ℓ| − 1|.
    pub fn unitarity_defect(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| ((1.0 + 2.0 * m.t).norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// ψ∞ as a function of cos θ = ξ̂·x̂.
    pub fn farfield_at(&self, cos_theta: f64) -> Complex64 {
        let p = legendre_all(self.order(), cos_theta);
        let s: Complex64 = self
            .modes
            .iter()
            .map(|m| m.t * ((2 * m.l + 1) as f64 * p[m.l]))
            .sum();
        -I * s / self.k
    }

    /// Scattered field Σ (2ℓ+1) iˡ t_ℓ h_ℓ(kr) P_ℓ(cos θ) for r > a.
    pub fn scattered_field(&self, xi_hat: &Vec3, x: &Vec3) -> Result<Complex64> {
        let r = x.norm();
        if !(r > self.medium.a) {
            return invalid("scattered-field series is evaluated outside the sphere");
        }
        let kr = self.k * r;
        let j = bessel_j_all(self.order(), kr);
        let y = bessel_y_all(self.order(), kr)?;
        let p = legendre_all(self.order(), xi_hat.normalize().dot(x) / r);
        let mut il = Complex64::new(1.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        for m in &self.modes {
            s += il * m.t * Complex64::new(j[m.l], y[m.l]) * ((2 * m.l + 1) as f64 * p[m.l]);
            il *= I;
        }
        Ok(s)
    }

    /// Total field at any point (interior shells included).
    pub fn total_field(&self, xi_hat: &Vec3, x: &Vec3) -> Result<Complex64> {
        let r = x.norm();
        if r > self.medium.a {
            let inc = (I * self.k * xi_hat.normalize().dot(x)).exp();
            return Ok(inc + self.scattered_field(xi_hat, x)?);
        }
        let c = if r > 0.0 { xi_hat.normalize().dot(x) / r } else { 1.0 };
        let p = legendre_all(self.order(), c);
        let shell = self.medium.shells.iter().position(|s| r < s.0).unwrap_or(self.medium.shells.len() - 1);
        let v = self.medium.shells[shell].1;
        let mut il = Complex64::new(1.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        for m in &self.modes {
            let (a, b) = m.interior[shell];
            let basis = ShellBasis {
                l: m.l,
                kappa2: self.k * self.k - v,
            };
            let radial = if r == 0.0 {
                if m.l == 0 {
                    a
                } else {
                    Complex64::new(0.0, 0.0)
                }
            } else {
                let ((f, _), (g, _)) = basis.eval(r)?;
                if b == Complex64::new(0.0, 0.0) {
                    a * f
                } else {
                    a * f + b * g
                }
            };
            s += il * radial * ((2 * m.l + 1) as f64 * p[m.l]);
            il *= I;
        }
        Ok(s)
    }
}

/// Far-field row for incidence ξ̂ on the given observation directions.
pub fn mie_farfield(sol: &PartialWaveSolution, xi_hat: &Vec3, obs: &[Vec3]) -> Result<FarFieldPattern> {
    let xi = xi_hat.normalize();
    let row = obs.iter().map(|o| sol.farfield_at(xi.dot(&o.normalize()).clamp(-1.0, 1.0))).collect();
    FarFieldPattern::new(
        sol.k,
        vec![Incidence::PlaneWave { direction: xi.into() }],
        obs.to_vec(),
        vec![row],
    )
}
