use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use deltashell::acoustic::{acoustic_to_schrodinger, solve_acoustic};
use deltashell::farfield::{conventions, farfield_kirchhoff, farfield_source, FarFieldPattern};
use deltashell::geometry::Vec3;
use deltashell::harness::{
    digest, fourier_identity_check, green_pairing_check, reciprocity_check, sommerfeld_check, sommerfeld_check_fn,
    uniqueness_experiment, ExperimentReport, UniquenessSetup,
};
use deltashell::kernels::IncidentField;
use deltashell::mie::{mie_farfield, solve_partial_waves, RadialMedium};
use deltashell::solver::SolveOptions;
use deltashell::{Error, Result};
use serde_json::{json, Value};

use crate::config::*;

/// Where results go, plus the header embedded in every file.
pub struct Output {
    pub dir: PathBuf,
    pub header: Value,
    pub quiet: bool,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: PathBuf, command: &str, config: Option<&Value>, quiet: bool) -> Self {
        let header = json!({
            "command": command,
            "config_digest": config.map(digest),
            "conventions": conventions(),
        });
        Self {
            dir,
            header,
            quiet,
            written: Vec::new(),
        }
    }

    fn comment_line(&self) -> String {
        format!("# {}\n", self.header)
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(name);
        std::fs::write(&path, content)?;
        if !self.quiet {
            eprintln!("wrote {}", path.display());
        }
        self.written.push(path);
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, body: &str) -> Result<()> {
        let text = self.comment_line() + body;
        self.write(name, &text)
    }

    pub fn write_farfield(&mut self, name: &str, ff: &FarFieldPattern) -> Result<()> {
        let text = ff.to_csv(&self.header);
        self.write(name, &text)
    }

    pub fn write_json(&mut self, name: &str, extra: Value) -> Result<()> {
        let mut v = self.header.clone();
        if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
            m.extend(e);
        }
        let text = serde_json::to_string_pretty(&v)? + "\n";
        self.write(name, &text)
    }
}

/// Outcome of a command: whether its verification (if any) passed.
pub type Verdict = bool;

pub fn forward(c: &ForwardConfig, base: &Path, out: &mut Output) -> Result<Verdict> {
    let sc = c.scatterer.build(base, "scatterer")?;
    let inc = c.incidence.build(c.k)?;
    let sol = sc.solve(std::slice::from_ref(&inc), c.k, &c.solver)?.remove(0);
    let mut csv = String::from("x,y,z,re_total,im_total,re_scattered,im_scattered,near_field_warning\n");
    let mut warnings = 0;
    for p in c.points.points() {
        let t = sol.total(&p)?;
        let s = sol.scattered(&p);
        warnings += t.near_field_warning as usize;
        let _ = writeln!(
            csv,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            p.x, p.y, p.z, t.value.re, t.value.im, s.re, s.im, t.near_field_warning as u8
        );
    }
    out.write_csv("field.csv", &csv)?;
    if let Some(d) = sol.density_csv() {
        out.write_csv("density.csv", &d)?;
    }
    out.write_json(
        "metadata.json",
        json!({
            "k": c.k,
            "residual": sol.residual(),
            "condition_estimate": sol.condition_estimate(),
            "sources": sol.sources().len(),
            "near_field_points": warnings,
        }),
    )?;
    Ok(true)
}

pub fn farfield(c: &FarfieldConfig, base: &Path, out: &mut Output) -> Result<Verdict> {
    let sc = c.scatterer.build(base, "scatterer")?;
    let incs: Vec<IncidentField> = c.incidence.iter().map(|i| i.build(c.k)).collect::<Result<_>>()?;
    let sols = sc.solve(&incs, c.k, &c.solver)?;
    let obs = c.observations.directions();
    let radius = c.kirchhoff_radius.unwrap_or_else(|| 1.05 * sols[0].support_radius());
    let source = || -> Result<FarFieldPattern> {
        FarFieldPattern::concat(sols.iter().map(|s| farfield_source(s, &obs)).collect::<Result<_>>()?)
    };
    let kirchhoff = || -> Result<FarFieldPattern> {
        FarFieldPattern::concat(
            sols.iter()
                .map(|s| farfield_kirchhoff(s, radius, &obs, &c.kirchhoff))
                .collect::<Result<_>>()?,
        )
    };
    let mut meta = json!({
        "k": c.k,
        "route": c.route,
        "residuals": sols.iter().map(|s| s.residual()).collect::<Vec<_>>(),
        "condition_estimate": sols[0].condition_estimate(),
    });
    match c.route {
        Route::Source => out.write_farfield("farfield.csv", &source()?)?,
        Route::Kirchhoff => {
            out.write_farfield("farfield.csv", &kirchhoff()?)?;
            meta["kirchhoff_radius"] = json!(radius);
        }
        Route::Both => {
            let (s, k) = (source()?, kirchhoff()?);
            let (l2, mx) = k.relative_distance(&s)?;
            out.write_farfield("farfield.csv", &s)?;
            out.write_farfield("farfield_kirchhoff.csv", &k)?;
            meta["kirchhoff_radius"] = json!(radius);
            meta["route_distance"] = json!({ "l2_relative": l2, "max_relative": mx });
        }
    }
    out.write_json("metadata.json", meta)?;
    Ok(true)
}

pub fn acoustic(c: &AcousticConfig, base: &Path, out: &mut Output) -> Result<Verdict> {
    let (medium, grid) = c.medium.build(c.resolution, base)?;
    let inc = c.incidence.directions();
    let obs = c.observations.directions();
    let mut runs = Vec::new();
    for (i, &omega) in c.frequencies.iter().enumerate() {
        let data = acoustic_to_schrodinger(&medium, omega, &grid)?;
        let sols = solve_acoustic(&data, &inc, &c.solver)?;
        let ff = FarFieldPattern::concat(sols.iter().map(|s| farfield_source(s, &obs)).collect::<Result<_>>()?)?;
        let name = format!("farfield_{i}.csv");
        out.write_farfield(&name, &ff)?;
        runs.push(json!({
            "omega": omega,
            "file": name,
            "diagnostics": data.diagnostics,
            "residuals": sols.iter().map(|s| s.residual()).collect::<Vec<_>>(),
        }));
    }
    out.write_json(
        "metadata.json",
        json!({
            "cells": grid.len(),
            "panels": medium.gamma().len(),
            "runs": runs,
        }),
    )?;
    Ok(true)
}

pub fn oracle(c: &OracleConfig, out: &mut Output) -> Result<Verdict> {
    let m = RadialMedium::new(c.radius, c.alpha, c.shells.clone())?;
    let sol = solve_partial_waves(&m, c.k, c.l_max)?;
    let d = Vec3::from(c.incidence);
    if !(d.norm() > 0.0) {
        return Err(Error::Config {
            key: "incidence".into(),
            msg: "must be nonzero".into(),
        });
    }
    let ff = mie_farfield(&sol, &d.normalize(), &c.observations.directions())?;
    out.write_farfield("farfield.csv", &ff)?;
    let mut csv = String::from("l,re_t,im_t\n");
    for (l, t) in sol.t().iter().enumerate() {
        let _ = writeln!(csv, "{l},{:.17e},{:.17e}", t.re, t.im);
    }
    out.write_csv("coefficients.csv", &csv)?;
    out.write_json(
        "metadata.json",
        json!({
            "k": c.k,
            "order": sol.order(),
            "unitarity_defect": sol.unitarity_defect(),
        }),
    )?;
    Ok(true)
}

fn run_experiment(e: &ExperimentConfig, base: &Path, solver: &SolveOptions) -> Result<ExperimentReport> {
    match e {
        ExperimentConfig::GreenPairing {
            k,
            medium_1,
            medium_2,
            rho_1,
            rho_2,
            radius,
        } => green_pairing_check(
            &medium_1.build(base, "medium_1")?,
            &medium_2.build(base, "medium_2")?,
            &rho_1.build(*k)?,
            &rho_2.build(*k)?,
            *k,
            *radius,
            solver,
        ),
        ExperimentConfig::FourierIdentity { k, medium_1, medium_2, xi, w } => fourier_identity_check(
            &medium_1.build(base, "medium_1")?,
            &medium_2.build(base, "medium_2")?,
            Vec3::from(*xi),
            *w,
            *k,
            solver,
        ),
        ExperimentConfig::Sommerfeld {
            k,
            scatterer,
            incidence,
            radii,
        } => {
            let sc = scatterer.build(base, "scatterer")?;
            let sol = sc.solve(&[incidence.build(*k)?], *k, solver)?.remove(0);
            sommerfeld_check(&sol, radii)
        }
        ExperimentConfig::SommerfeldOracle { k, radius, alpha, radii } => {
            let sol = solve_partial_waves(&RadialMedium::delta_sphere(*radius, *alpha)?, *k, 50)?;
            sommerfeld_check_fn("sommerfeld_oracle", *k, radii, |x| sol.scattered_field(&Vec3::z(), x))
        }
        ExperimentConfig::Reciprocity {
            k,
            scatterer,
            directions,
            tolerance,
        } => {
            let sc = scatterer.build(base, "scatterer")?;
            let dirs = directions.directions();
            let incs: Vec<IncidentField> = dirs.iter().map(|d| IncidentField::plane_wave(*d)).collect();
            let sols = sc.solve(&incs, *k, solver)?;
            let ff = FarFieldPattern::concat(sols.iter().map(|s| farfield_source(s, &dirs)).collect::<Result<_>>()?)?;
            reciprocity_check(&ff, *tolerance)
        }
        ExperimentConfig::Uniqueness {
            medium_a,
            medium_b,
            omega,
            omega_tilde,
            fine,
            coarse,
            incidence,
            observations,
        } => {
            let setup = UniquenessSetup {
                omega: *omega,
                omega_tilde: *omega_tilde,
                fine: *fine,
                coarse: *coarse,
                incidence: incidence.directions(),
                observations: observations.directions(),
            };
            uniqueness_experiment(medium_a, medium_b, base, &setup, solver)
        }
    }
}

pub fn verify(c: &VerifyConfig, base: &Path, out: &mut Output) -> Result<Verdict> {
    let mut reports = Vec::new();
    for e in &c.experiments {
        let r = run_experiment(e, base, &c.solver)?;
        if !out.quiet {
            eprintln!("{}: {}", r.name, if r.pass { "PASS" } else { "FAIL" });
        }
        reports.push(r);
    }
    let pass = reports.iter().all(|r| r.pass);
    out.write_json("reports.json", json!({ "pass": pass, "reports": reports }))?;
    Ok(pass)
}

/// L² and max relative distances of `a` from `b`.
pub fn compare(a: &Path, b: &Path, tolerance: Option<f64>, out: Option<&mut Output>) -> Result<(Value, Verdict)> {
    let read = |p: &Path| -> Result<(FarFieldPattern, String)> {
        let text = std::fs::read_to_string(p).map_err(|e| Error::Config {
            key: "<file>".into(),
            msg: format!("{}: {e}", p.display()),
        })?;
        let (ff, _) = FarFieldPattern::from_csv(&text)?;
        Ok((ff, digest(&Value::String(text))))
    };
    let (fa, da) = read(a)?;
    let (fb, db) = read(b)?;
    if !fa.same_grid(&fb) {
        return Err(Error::Validation("far-field grids differ".into()));
    }
    let (l2, mx) = fa.relative_distance(&fb)?;
    let pass = tolerance.is_none_or(|t| l2 <= t);
    let report = json!({
        "a": { "path": a.display().to_string(), "digest": da },
        "b": { "path": b.display().to_string(), "digest": db },
        "l2_relative": l2,
        "max_relative": mx,
        "tolerance": tolerance,
        "pass": pass,
    });
    if let Some(o) = out {
        o.write_json("compare.json", report.clone())?;
    }
    Ok((report, pass))
}
