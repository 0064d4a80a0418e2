//! Reader and writer for the OFF mesh format (triangles only).

use std::fmt::Write as _;
use std::path::Path;

use super::{SurfaceMesh, Topology, Vec3};
use crate::error::{Error, Result};

/// Non-fatal findings while loading a mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeshWarning {
    /// The surface is not closed; the count is the number of boundary edges.
    OpenEdges(usize),
}

impl std::fmt::Display for MeshWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshWarning::OpenEdges(n) => write!(f, "mesh is not closed: {n} open edges"),
        }
    }
}

/// Reads an OFF file. Fails on parse errors (with line number), non-triangular
/// faces and inconsistent winding; an open surface is only a warning.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<(SurfaceMesh, Vec<MeshWarning>)> {
    let text = std::fs::read_to_string(path)?;
    parse_off(&text)
}

pub fn parse_off(text: &str) -> Result<(SurfaceMesh, Vec<MeshWarning>)> {
    // (line number, tokens) of every non-blank, non-comment line
    let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
        let body = l.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then(|| (i + 1, body.split_whitespace().collect::<Vec<_>>()))
    });
    let perr = |line: usize, msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };

    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    if header[0] != "OFF" {
        return Err(perr(hline, "missing OFF header"));
    }
    let (cline, counts) = if header.len() > 1 {
        (hline, header[1..].to_vec())
    } else {
        lines.next().ok_or_else(|| perr(hline + 1, "missing counts line"))?
    };
    if counts.len() < 2 {
        return Err(perr(cline, "expected vertex and face counts"));
    }
    let nv: usize = counts[0].parse().map_err(|_| perr(cline, "bad vertex count"))?;
    let nf: usize = counts[1].parse().map_err(|_| perr(cline, "bad face count"))?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, tok) = lines.next().ok_or_else(|| perr(cline, "unexpected end of file in vertices"))?;
        if tok.len() < 3 {
            return Err(perr(ln, "vertex needs 3 coordinates"));
        }
        let mut p = [0.0; 3];
        for (c, t) in p.iter_mut().zip(&tok) {
            *c = t.parse().map_err(|_| perr(ln, "bad coordinate"))?;
        }
        vertices.push(Vec3::new(p[0], p[1], p[2]));
    }

    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, tok) = lines.next().ok_or_else(|| perr(cline, "unexpected end of file in faces"))?;
        let n: usize = tok[0].parse().map_err(|_| perr(ln, "bad face size"))?;
        if n != 3 {
            return Err(Error::NonTriangularFace { line: ln });
        }
        if tok.len() < 4 {
            return Err(perr(ln, "face needs 3 indices"));
        }
        let mut t = [0usize; 3];
        for (c, s) in t.iter_mut().zip(&tok[1..4]) {
            *c = s.parse().map_err(|_| perr(ln, "bad vertex index"))?;
            if *c >= nv {
                return Err(perr(ln, "vertex index out of range"));
            }
        }
        triangles.push(t);
    }

    let mesh = SurfaceMesh::new(vertices, triangles)?;
    let topo = mesh.topology();
    check_orientation(&mesh, &topo)?;
    let mut warnings = Vec::new();
    if topo.open_edges > 0 {
        warnings.push(MeshWarning::OpenEdges(topo.open_edges));
    }
    Ok((mesh, warnings))
}

fn check_orientation(mesh: &SurfaceMesh, topo: &Topology) -> Result<()> {
    if !topo.is_consistently_oriented() {
        return Err(Error::Mesh(format!(
            "inconsistent winding: {} directed edges are shared by panels with the same orientation",
            topo.misoriented_edges
        )));
    }
    if topo.is_closed() && mesh.signed_volume() <= 0.0 {
        return Err(Error::Mesh(
            "closed mesh is wound clockwise seen from outside (normals point inward)".into(),
        ));
    }
    Ok(())
}

pub fn to_off_string(mesh: &SurfaceMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "OFF\n{} {} 0", mesh.vertices().len(), mesh.len());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:.17e} {:.17e} {:.17e}", v.x, v.y, v.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

pub fn write_off(mesh: &SurfaceMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_off_string(mesh))?;
    Ok(())
}
