use std::collections::HashMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::Vec3;
use crate::error::{Error, Result};

/// Flat-triangle surface mesh with per-panel centroid, area and unit normal.
///
/// Panels are oriented by vertex winding: counter-clockwise seen from the
/// side the normal points to.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    centroids: Vec<Vec3>,
    areas: Vec<f64>,
    normals: Vec<Vec3>,
    diameters: Vec<f64>,
}

/// Edge statistics of a triangle mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Topology {
    pub edges: usize,
    /// Edges used by a single triangle.
    pub open_edges: usize,
    /// Edges used by more than two triangles.
    pub overshared_edges: usize,
    /// Directed edges traversed twice in the same direction.
    pub misoriented_edges: usize,
}

impl Topology {
    pub fn is_closed(&self) -> bool {
        self.open_edges == 0 && self.overshared_edges == 0
    }

    pub fn is_consistently_oriented(&self) -> bool {
        self.misoriented_edges == 0
    }
}

impl SurfaceMesh {
    /// Builds a mesh from vertices and index triples. Rejects out-of-range
    /// indices and degenerate (zero-area) panels.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::Mesh("mesh has no triangles".into()));
        }
        if let Some(v) = vertices.iter().find(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::Mesh(format!("non-finite vertex {v:?}")));
        }
        let n = triangles.len();
        let mut centroids = Vec::with_capacity(n);
        let mut areas = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        let mut diameters = Vec::with_capacity(n);
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::Mesh(format!("triangle {t} references a missing vertex")));
            }
            let [a, b, c] = tri.map(|i| vertices[i]);
            let cross = (b - a).cross(&(c - a));
            let twice_area = cross.norm();
            let scale = (b - a).norm().max((c - a).norm());
            if !(twice_area > 1e-14 * scale * scale) {
                return Err(Error::Mesh(format!("triangle {t} is degenerate")));
            }
            centroids.push((a + b + c) / 3.0);
            areas.push(0.5 * twice_area);
            normals.push(cross / twice_area);
            diameters.push((b - a).norm().max((c - b).norm()).max((a - c).norm()));
        }
        Ok(Self {
            vertices,
            triangles,
            centroids,
            areas,
            normals,
            diameters,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Number of panels.
    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn centroids(&self) -> &[Vec3] {
        &self.centroids
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    /// Longest edge of each panel.
    pub fn diameters(&self) -> &[f64] {
        &self.diameters
    }

    pub fn panel(&self, i: usize) -> [Vec3; 3] {
        self.triangles[i].map(|v| self.vertices[v])
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn max_diameter(&self) -> f64 {
        self.diameters.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest vertex distance from `center`.
    pub fn bounding_radius(&self, center: &Vec3) -> f64 {
        self.vertices
            .iter()
            .map(|v| (v - center).norm())
            .fold(0.0, f64::max)
    }

    /// Enclosed volume by the divergence theorem; negative for inward winding.
    pub fn signed_volume(&self) -> f64 {
        (0..self.len())
            .map(|i| self.centroids[i].dot(&self.normals[i]) * self.areas[i])
            .sum::<f64>()
            / 3.0
    }

    /// Symmetric 3-point rule (degree 2): points and weights, weights sum to the area.
    pub fn three_point_rule(&self, i: usize) -> [(Vec3, f64); 3] {
        let [a, b, c] = self.panel(i);
        let w = self.areas[i] / 3.0;
        let p = |x: Vec3, y: Vec3, z: Vec3| x * (2.0 / 3.0) + (y + z) / 6.0;
        [(p(a, b, c), w), (p(b, c, a), w), (p(c, a, b), w)]
    }

    pub fn topology(&self) -> Topology {
        let mut undirected: HashMap<(usize, usize), usize> = HashMap::new();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                *undirected.entry((a.min(b), a.max(b))).or_default() += 1;
                *directed.entry((a, b)).or_default() += 1;
            }
        }
        Topology {
            edges: undirected.len(),
            open_edges: undirected.values().filter(|&&c| c == 1).count(),
            overshared_edges: undirected.values().filter(|&&c| c > 2).count(),
            misoriented_edges: directed.values().filter(|&&c| c > 1).count(),
        }
    }

    /// Splits every panel into four at edge midpoints. With `project` set,
    /// new vertices are pushed onto the sphere `(center, radius)`.
    pub fn refine(&self, project: Option<(Vec3, f64)>) -> SurfaceMesh {
        let (vertices, triangles) = split_triangles(&self.vertices, &self.triangles, project);
        SurfaceMesh::new(vertices, triangles).expect("midpoint refinement keeps panels valid")
    }

    /// Hex SHA-256 of the vertex coordinates and triangle indices.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.vertices {
            for c in v.iter() {
                h.update(c.to_le_bytes());
            }
        }
        for t in &self.triangles {
            for &i in t {
                h.update((i as u64).to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn split_triangles(
    vertices: &[Vec3],
    triangles: &[[usize; 3]],
    project: Option<(Vec3, f64)>,
) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let mut verts = vertices.to_vec();
    let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
        *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let mut m = (verts[a] + verts[b]) * 0.5;
            if let Some((c, r)) = project {
                m = c + (m - c).normalize() * r;
            }
            verts.push(m);
            verts.len() - 1
        })
    };
    let mut tris = Vec::with_capacity(4 * triangles.len());
    for &[a, b, c] in triangles {
        let ab = midpoint(a, b, &mut verts);
        let bc = midpoint(b, c, &mut verts);
        let ca = midpoint(c, a, &mut verts);
        tris.push([a, ab, ca]);
        tris.push([b, bc, ab]);
        tris.push([c, ca, bc]);
        tris.push([ab, bc, ca]);
    }
    (verts, tris)
}

/// Icosphere centred at the origin: the regular icosahedron split
/// `subdivisions` times, vertices projected to the sphere.
///
/// # Panics
/// If `radius` is not a positive finite number.
pub fn make_sphere_mesh(radius: f64, subdivisions: u32) -> SurfaceMesh {
    assert!(radius > 0.0 && radius.is_finite(), "sphere radius must be positive");
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let raw = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ];
    let mut vertices: Vec<Vec3> = raw
        .iter()
        .map(|&(x, y, z)| Vec3::new(x, y, z).normalize() * radius)
        .collect();
    let mut triangles = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let (v, t) = split_triangles(&vertices, &triangles, Some((Vec3::zeros(), radius)));
        vertices = v;
        triangles = t;
    }
    SurfaceMesh::new(vertices, triangles).expect("icosphere panels are valid")
}
