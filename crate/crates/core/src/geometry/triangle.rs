//! Closed-form integrals of 1/|x − y| over a flat triangle.

use super::Vec3;

struct EdgeTerms {
    /// outward in-plane edge normal
    u: Vec3,
    p0: f64,
    log_term: f64,
    angle_term: f64,
}

/// `ln((R⁺ + l⁺)/(R⁻ + l⁻))` written to avoid cancellation when l < 0.
fn log_ratio(lp: f64, rp: f64, lm: f64, rm: f64, r0sq: f64) -> f64 {
    let f = |l: f64, r: f64| if l >= 0.0 { r + l } else { r0sq / (r - l) };
    (f(lp, rp) / f(lm, rm)).ln()
}

fn edge_terms(x: &Vec3, tri: &[Vec3; 3]) -> (Vec3, f64, [EdgeTerms; 3]) {
    let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).normalize();
    let d = (x - tri[0]).dot(&n);
    let rho = x - n * d;
    let ad = d.abs();
    let scale = (tri[1] - tri[0]).norm() + (tri[2] - tri[1]).norm() + (tri[0] - tri[2]).norm();
    let tiny = 1e-14 * scale;
    let terms = [0, 1, 2].map(|e| {
        let a = tri[e];
        let b = tri[(e + 1) % 3];
        let lhat = (b - a).normalize();
        let u = lhat.cross(&n);
        let p0 = (a - rho).dot(&u);
        let lm = (a - rho).dot(&lhat);
        let lp = (b - rho).dot(&lhat);
        let r0sq = p0 * p0 + d * d;
        let rm = (lm * lm + r0sq).sqrt();
        let rp = (lp * lp + r0sq).sqrt();
        if r0sq.sqrt() < tiny {
            // x on the edge line: both contributions vanish
            return EdgeTerms {
                u,
                p0,
                log_term: 0.0,
                angle_term: 0.0,
            };
        }
        let log_term = log_ratio(lp, rp, lm, rm, r0sq);
        let angle_term = if p0.abs() < tiny {
            0.0
        } else {
            (p0 * lp / (r0sq + ad * rp)).atan() - (p0 * lm / (r0sq + ad * rm)).atan()
        };
        EdgeTerms {
            u,
            p0,
            log_term,
            angle_term,
        }
    });
    (n, d, terms)
}

/// ∫_T dA(y) / |x − y| for the flat triangle `tri`, any x.
pub fn triangle_potential(x: &Vec3, tri: &[Vec3; 3]) -> f64 {
    let (_, d, terms) = edge_terms(x, tri);
    terms
        .iter()
        .map(|t| t.p0 * t.log_term - d.abs() * t.angle_term)
        .sum()
}

/// Gradient in x of [`triangle_potential`]. On the triangle's plane the
/// normal component is the average of the two one-sided limits (zero).
pub fn triangle_potential_grad(x: &Vec3, tri: &[Vec3; 3]) -> Vec3 {
    let (n, d, terms) = edge_terms(x, tri);
    let mut g = Vec3::zeros();
    let mut solid = 0.0;
    for t in &terms {
        g -= t.u * t.log_term;
        solid += t.angle_term;
    }
    g - n * (d.signum() * solid * if d == 0.0 { 0.0 } else { 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::quadrature::gauss_legendre_on;

    /// Independent route: fan the triangle from the foot point of x and
    /// integrate the radial part in closed form, the edge parameter by
    /// composite Gauss–Legendre.
    fn fan_quadrature(x: &Vec3, tri: &[Vec3; 3]) -> f64 {
        let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).normalize();
        let d = (x - tri[0]).dot(&n);
        let rho = x - n * d;
        let mut total = 0.0;
        for e in 0..3 {
            let a = tri[e];
            let b = tri[(e + 1) % 3];
            for seg in 0..16 {
                let t0 = seg as f64 / 16.0;
                for (t, w) in gauss_legendre_on(20, t0, t0 + 1.0 / 16.0) {
                    let p = a + (b - a) * t;
                    let q2 = (p - rho).norm_squared();
                    let jac = (p - rho).cross(&(b - a)).dot(&n);
                    if q2 == 0.0 {
                        continue;
                    }
                    total += w * jac * ((q2 + d * d).sqrt() - d.abs()) / q2;
                }
            }
        }
        total
    }

    fn tri() -> [Vec3; 3] {
        [
            Vec3::new(0.1, -0.2, 0.3),
            Vec3::new(1.2, 0.1, 0.2),
            Vec3::new(0.3, 0.9, 0.6),
        ]
    }

    #[test]
    fn matches_fan_quadrature() {
        let t = tri();
        let c = (t[0] + t[1] + t[2]) / 3.0;
        let n = (t[1] - t[0]).cross(&(t[2] - t[0])).normalize();
        let pts = [
            c,
            c + n * 0.05,
            c - n * 0.3,
            c + Vec3::new(2.0, -1.0, 0.5),
            t[0] + (t[1] - t[0]) * 1.7 + n * 0.01,
            Vec3::new(0.6, 0.3, 0.4) - n * (Vec3::new(0.6, 0.3, 0.4) - t[0]).dot(&n),
            c + (t[2] - c) * 3.0,
        ];
        for x in &pts {
            let a = triangle_potential(x, &t);
            let b = fan_quadrature(x, &t);
            assert!((a - b).abs() < 1e-10 * b.abs(), "{x:?}: {a} vs {b}");
        }
    }

    #[test]
    fn far_field_is_point_source() {
        let t = tri();
        let c = (t[0] + t[1] + t[2]) / 3.0;
        let area = 0.5 * (t[1] - t[0]).cross(&(t[2] - t[0])).norm();
        let x = c + Vec3::new(300.0, 200.0, -100.0);
        let v = triangle_potential(&x, &t);
        assert!((v - area / (x - c).norm()).abs() < 1e-7 * v);
    }

    #[test]
    fn vertex_and_edge_points_are_finite() {
        let t = tri();
        for x in [t[0], (t[0] + t[1]) * 0.5, t[1] * 2.0 - t[0]] {
            let v = triangle_potential(&x, &t);
            assert!(v.is_finite() && v > 0.0);
            assert!((v - fan_quadrature(&x, &t)).abs() < 1e-9 * v);
        }
    }

    #[test]
    fn gradient_matches_differences() {
        let t = tri();
        let c = (t[0] + t[1] + t[2]) / 3.0;
        let n = (t[1] - t[0]).cross(&(t[2] - t[0])).normalize();
        for x in [c + n * 0.1, c - n * 0.02 + Vec3::new(0.3, 0.0, 0.0), c + Vec3::new(1.5, 0.7, -0.4)] {
            let g = triangle_potential_grad(&x, &t);
            let h = 1e-5;
            for i in 0..3 {
                let mut e = Vec3::zeros();
                e[i] = h;
                let fd = (triangle_potential(&(x + e), &t) - triangle_potential(&(x - e), &t)) / (2.0 * h);
                assert!((g[i] - fd).abs() < 1e-6 * (1.0 + g.norm()), "{i}: {} vs {fd}", g[i]);
            }
        }
    }

    #[test]
    fn normal_derivative_jump_is_two_pi() {
        // one-sided normal derivatives at the centroid differ by -4π·(1/2)·... per unit density:
        // ∂n(∫1/R) jumps by -4π across the panel.
        let t = tri();
        let c = (t[0] + t[1] + t[2]) / 3.0;
        let n = (t[1] - t[0]).cross(&(t[2] - t[0])).normalize();
        let up = triangle_potential_grad(&(c + n * 1e-9), &t).dot(&n);
        let down = triangle_potential_grad(&(c - n * 1e-9), &t).dot(&n);
        assert!((up - down + 4.0 * std::f64::consts::PI).abs() < 1e-6);
    }
}
