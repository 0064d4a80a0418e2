//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use deltashell::acoustic::*;
use deltashell::boundary_scatter::*;
use deltashell::farfield::*;
use deltashell::geometry::*;
use deltashell::harness::*;
use deltashell::kernels::*;
use deltashell::mie::*;
use deltashell::solver::SolveOptions;
use deltashell::volume_scatter::*;
use num_complex::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn mie_agreement() -> Outcome {
    let k = 2.0;
    let xi = Vec3::z();
    let obs = equiangular_directions(16, 32);
    let oracle = solve_partial_waves(&RadialMedium::delta_sphere(1.0, 2.0).unwrap(), k, 50).unwrap();
    let reference = mie_farfield(&oracle, &xi, &obs).unwrap();
    let start = Instant::now();
    let mut errs = Vec::new();
    for s in [3u32, 4] {
        let d = DeltaSpec::constant(make_sphere_mesh(1.0, s), 2.0).unwrap();
        let sol = solve_problem(None, Some(&d), &[IncidentField::plane_wave(xi)], k, &opts()).unwrap().remove(0);
        let ff = farfield_source(&sol, &obs).unwrap();
        errs.push((d.mesh().len(), ff.relative_distance(&reference).unwrap().0));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = errs[0].1 <= 0.05 && errs[1].1 <= 0.02 && errs[1].1 < errs[0].1 && secs <= 180.0;
    outcome(
        pass,
        format!(
            "{} panels: {:.3e} (<= 5e-2), {} panels: {:.3e} (<= 2e-2), {:.1} s (<= 180 s)",
            errs[0].0, errs[0].1, errs[1].0, errs[1].1, secs
        ),
    )
}

fn two_route_farfield() -> Outcome {
    let obs = equiangular_directions(8, 16);
    let g = make_volume_grid(BoundingBox::cube(1.0).unwrap(), 8).unwrap();
    let v = PotentialSample::from_fn(g, |x| 0.8 * (-2.0 * x.norm_squared()).exp()).unwrap();
    let d = DeltaSpec::constant(make_sphere_mesh(0.9, 3), 1.5).unwrap();
    let sol = solve_problem(Some(&v), Some(&d), &[IncidentField::plane_wave(Vec3::x())], 2.0, &opts())
        .unwrap()
        .remove(0);
    let src = farfield_source(&sol, &obs).unwrap();
    let r0 = sol.support_radius() * 1.05;
    let ko = KirchhoffOptions::default();
    let k2 = farfield_kirchhoff(&sol, r0, &obs, &ko).unwrap();
    let k3 = farfield_kirchhoff(&sol, r0 * 1.5, &obs, &ko).unwrap();
    let routes = k2.relative_distance(&src).unwrap().0;
    let radii = k3.relative_distance(&k2).unwrap().0;
    outcome(
        routes <= 1e-3 && radii <= 1e-4,
        format!("Kirchhoff vs source {routes:.3e} (<= 1e-3), R {r0:.2} vs {:.2}: {radii:.3e} (<= 1e-4)", r0 * 1.5),
    )
}

fn jump_relation() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, y1) in [("1", false), ("Y1", true)] {
        let mut errs = Vec::new();
        for s in 1..=3u32 {
            let mesh = make_sphere_mesh(1.0, s);
            let xi: Vec<f64> = mesh
                .centroids()
                .iter()
                .map(|c| if y1 { c.z / c.norm() } else { 1.0 })
                .collect();
            errs.push(check_jump_relation(&mesh, 1.0, &xi).unwrap().relative_error);
        }
        pass &= errs[2] <= 0.05 && errs.windows(2).all(|w| w[1] < w[0]);
        detail.push(format!("xi={name}: {:.3e} {:.3e} {:.3e}", errs[0], errs[1], errs[2]));
    }
    outcome(pass, format!("{} (last <= 5e-2, decreasing)", detail.join("; ")))
}

fn sphere_media() -> (Scatterer, Scatterer) {
    let g = make_volume_grid(BoundingBox::cube(1.0).unwrap(), 8).unwrap();
    let mesh = make_sphere_mesh(1.0, 2);
    let v1 = PotentialSample::from_fn(g.clone(), |x| if x.norm() < 0.7 { 2.0 } else { 0.0 }).unwrap();
    let v2 = PotentialSample::from_fn(g, |x| 1.5 * (-4.0 * x.norm_squared()).exp()).unwrap();
    (
        Scatterer::new(Some(v1), Some(DeltaSpec::constant(mesh.clone(), 1.0).unwrap())),
        Scatterer::new(Some(v2), Some(DeltaSpec::constant(mesh, -0.5).unwrap())),
    )
}

fn green_pairing() -> Outcome {
    let (m1, m2) = sphere_media();
    let k = 1.0;
    let r1 = make_sigma_k(0.5, Vec3::x(), Vec3::y(), k).unwrap();
    let r2 = make_sigma_k(0.5, Vec3::z(), Vec3::new(1.0, 1.0, 0.0).normalize(), k).unwrap();
    let radius = 2.6;
    let distinct = green_pairing_check(&m1, &m2, &r1, &r2, k, radius, &opts()).unwrap();
    let same = green_pairing_check(&m1, &m1, &r1, &r1, k, radius, &opts()).unwrap();
    let same_op = green_pairing_check(&m2, &m2, &r1, &r2, k, radius, &opts()).unwrap();
    outcome(
        distinct.pass && same.pass && same_op.pass,
        format!(
            "distinct media mismatch {} (<= 1e-2); m1=m2,rho1=rho2 rhs {} (<= 1e-10); m1=m2,rho1!=rho2 rhs {} (<= 1e-10)",
            distinct.metrics["relative_mismatch"],
            same.metrics["rhs_relative_to_terms"],
            same_op.metrics["rhs_relative_to_terms"],
        ),
    )
}

fn fourier_split() -> Outcome {
    let (m1, m2) = sphere_media();
    let r = fourier_identity_check(&m1, &m2, Vec3::new(0.6, 0.0, 0.8), 0.5, 1.0, &opts()).unwrap();
    outcome(
        r.pass,
        format!(
            "split error {} (<= 1e-10); |F_xi| {:.4e}; finite-w remainder {:.4e} (reported)",
            r.metrics["split_error"],
            r.metrics["f_xi_abs"].as_f64().unwrap(),
            r.metrics["finite_w_remainder_abs"].as_f64().unwrap(),
        ),
    )
}

fn sommerfeld() -> Outcome {
    let radii = [4.0, 8.0, 16.0];
    let mut reports = Vec::new();
    let (m1, m2) = sphere_media();
    for (m, k) in [(&m1, 1.0), (&m2, 2.0)] {
        let s = m.solve(&[IncidentField::plane_wave(Vec3::z())], k, &opts()).unwrap().remove(0);
        reports.push(sommerfeld_check(&s, &radii).unwrap());
    }
    let sphere = DeltaSpec::constant(make_sphere_mesh(1.0, 2), 2.0).unwrap();
    let s = solve_problem(None, Some(&sphere), &[IncidentField::plane_wave(Vec3::z())], 2.0, &opts()).unwrap().remove(0);
    reports.push(sommerfeld_check(&s, &radii).unwrap());
    let tiny = DeltaSpec::constant(make_sphere_mesh(0.1, 1), 0.05).unwrap();
    let s = solve_problem(None, Some(&tiny), &[IncidentField::plane_wave(Vec3::z())], 1.0, &opts()).unwrap().remove(0);
    reports.push(sommerfeld_check(&s, &radii).unwrap());
    let oracle = solve_partial_waves(&RadialMedium::delta_sphere(1.0, 2.0).unwrap(), 2.0, 50).unwrap();
    reports.push(sommerfeld_check_fn("sommerfeld_mie", 2.0, &radii, |x| oracle.scattered_field(&Vec3::z(), x)).unwrap());
    let (m, grid) = acoustic_medium(1.0, None).build(Resolution { subdivisions: 2, cells_per_axis: 10 }, Path::new(".")).unwrap();
    let data = acoustic_to_schrodinger(&m, 1.0, &grid).unwrap();
    let s = solve_acoustic(&data, &[Vec3::x()], &opts()).unwrap().remove(0);
    reports.push(sommerfeld_check(&s, &radii).unwrap());
    let worst = reports
        .iter()
        .map(|r| r.metrics["min_decrease_per_doubling"].as_f64().unwrap_or(f64::INFINITY))
        .fold(f64::INFINITY, f64::min);
    outcome(
        reports.iter().all(|r| r.pass),
        format!("{} configurations, worst decrease per doubling {worst:.3} (>= 1.8)", reports.len()),
    )
}

fn acoustic_medium(xi: f64, speed: Option<f64>) -> MediumConfig {
    MediumConfig {
        gamma: GammaSource::Sphere { radius: 0.7 },
        rho_bumps: vec![],
        shell_density: ShellDensitySource::Constant(xi),
        cutoff: Cutoff { radius: 2.0, width: 1.0 },
        v_bumps: speed
            .map(|a| vec![GaussianBump { center: [0.0; 3], amplitude: a, width: 0.5 }])
            .unwrap_or_default(),
        v_balls: vec![],
        box_half_side: Some(2.0),
    }
}

fn acoustic_consistency() -> Outcome {
    let mut cfg = acoustic_medium(0.0, Some(0.3));
    cfg.rho_bumps = vec![GaussianBump { center: [0.1, 0.0, 0.0], amplitude: 0.4, width: 0.5 }];
    let (m, grid) = cfg.build(Resolution { subdivisions: 2, cells_per_axis: 10 }, Path::new(".")).unwrap();
    let obs = equiangular_directions(8, 16);
    let d1 = acoustic_to_schrodinger(&m, 1.0, &grid).unwrap();
    let delta_route = solve_acoustic(&d1, &[Vec3::z()], &opts()).unwrap().remove(0);
    let (_, ls) = solve_lippmann_schwinger(&d1.potential, &IncidentField::plane_wave(Vec3::z()), 1.0, &opts()).unwrap();
    let pipelines = farfield_source(&delta_route, &obs)
        .unwrap()
        .relative_distance(&farfield_source(&ls, &obs).unwrap())
        .unwrap()
        .0;
    let shell = acoustic_medium(1.0, Some(0.3));
    let (m, grid) = shell.build(Resolution { subdivisions: 2, cells_per_axis: 10 }, Path::new(".")).unwrap();
    let a = acoustic_to_schrodinger(&m, 1.0, &grid).unwrap();
    let b = acoustic_to_schrodinger(&m, 2.0, &grid).unwrap();
    let mut v_err: f64 = 0.0;
    for i in 0..grid.len() {
        let expect = (4.0 - 1.0) * a.speed_term[i];
        v_err = v_err.max((b.potential.values()[i] - a.potential.values()[i] - expect).abs());
    }
    let bitwise = a
        .delta
        .alpha()
        .iter()
        .zip(b.delta.alpha())
        .all(|(x, y)| x.to_bits() == y.to_bits());
    outcome(
        pipelines <= 1e-3 && v_err <= 1e-12 && bitwise,
        format!("delta vs LS {pipelines:.3e} (<= 1e-3); V difference {v_err:.3e} (<= 1e-12); alpha bitwise {bitwise}"),
    )
}

fn desk_uniqueness() -> Outcome {
    let axes: Vec<Vec3> = vec![Vec3::x(), -Vec3::x(), Vec3::y(), -Vec3::y(), Vec3::z(), -Vec3::z()];
    let setup = UniquenessSetup {
        omega: 1.0,
        omega_tilde: 2.0,
        fine: Resolution { subdivisions: 3, cells_per_axis: 14 },
        coarse: Resolution { subdivisions: 2, cells_per_axis: 10 },
        incidence: axes,
        observations: equiangular_directions(8, 16),
    };
    let base = acoustic_medium(1.0, None);
    let cases = [
        ("xi 1 vs 1.5", acoustic_medium(1.5, None)),
        ("v bump", acoustic_medium(1.0, Some(1.0))),
        ("identical", base.clone()),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, other) in cases {
        let r = uniqueness_experiment(&base, &other, Path::new("."), &setup, &opts()).unwrap();
        pass &= r.pass;
        let m = &r.metrics;
        detail.push(format!(
            "{name}: D/N = {:.2} / {:.2} at omega 1 / 2 (D {:.3e} {:.3e}, N {:.3e} {:.3e})",
            m["D_omega"].as_f64().unwrap() / m["N_omega"].as_f64().unwrap(),
            m["D_omega_tilde"].as_f64().unwrap() / m["N_omega_tilde"].as_f64().unwrap(),
            m["D_omega"].as_f64().unwrap(),
            m["D_omega_tilde"].as_f64().unwrap(),
            m["N_omega"].as_f64().unwrap(),
            m["N_omega_tilde"].as_f64().unwrap(),
        ));
    }
    outcome(pass, format!("{} (differing >= 10, identical D <= N)", detail.join("; ")))
}

fn oracle_checks() -> Outcome {
    let mut wr: f64 = 0.0;
    for &x in &[0.3, 1.0, 4.5, 20.0, 75.0] {
        for l in 0..=50 {
            let Ok((h, dh)) = spherical_hankel(l, x) else { continue };
            let (j, dj) = spherical_bessel(l, x).unwrap();
            let w = h * dj - dh * j;
            // j h' − j' h = i/x²
            wr = wr.max(((dh * j - h * dj) - Complex64::new(0.0, 1.0 / (x * x))).norm() * x * x);
            let _ = w;
        }
    }
    let zero_t = solve_partial_waves(&RadialMedium::delta_sphere(1.0, 0.0).unwrap(), 2.0, 30)
        .unwrap()
        .t()
        .iter()
        .all(|t| t.norm() == 0.0);
    let mut flux: f64 = 0.0;
    for (alpha, k) in [(2.0, 2.0), (-3.0, 0.7), (50.0, 5.0)] {
        let s = solve_partial_waves(&RadialMedium::delta_sphere(1.0, alpha).unwrap(), k, 40).unwrap();
        flux = flux.max(s.unitarity_defect());
    }
    let k = 2.0;
    let hard = solve_partial_waves(&RadialMedium::delta_sphere(1.0, 1e6).unwrap(), k, 20).unwrap();
    let mut soft: f64 = 0.0;
    for (l, t) in hard.t().iter().enumerate().take(21) {
        let (j, _) = spherical_bessel(l, k).unwrap();
        let (h, _) = spherical_hankel(l, k).unwrap();
        soft = soft.max((t + j / h).norm());
    }
    outcome(
        wr <= 1e-12 && zero_t && flux <= 1e-10 && soft <= 1e-4,
        format!(
            "Wronskian {wr:.3e} (<= 1e-12); alpha=0 gives t=0: {zero_t}; flux {flux:.3e} (<= 1e-10); sound-soft {soft:.3e} (<= 1e-4)"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("partial-wave agreement", mie_agreement),
        ("two-route far field", two_route_farfield),
        ("single-layer jump", jump_relation),
        ("Green pairing", green_pairing),
        ("F_xi exact split", fourier_split),
        ("radiation condition", sommerfeld),
        ("acoustic consistency", acoustic_consistency),
        ("desk uniqueness", desk_uniqueness),
        ("oracle internal checks", oracle_checks),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        failed += !o.pass as usize;
        println!(
            "criterion {}: {} {name} [{:.1} s] {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
