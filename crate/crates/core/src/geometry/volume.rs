use serde::{Deserialize, Serialize};

use super::Vec3;
use crate::error::{invalid, Result};

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl BoundingBox {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Result<Self> {
        if (0..3).any(|i| !(max[i] > min[i]) || !min[i].is_finite() || !max[i].is_finite()) {
            return invalid("bounding box must have positive extent along every axis");
        }
        Ok(Self { min, max })
    }

    /// The cube [-h, h]³.
    pub fn cube(half_side: f64) -> Result<Self> {
        Self::new([-half_side; 3], [half_side; 3])
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|i| self.max[i] - self.min[i]).product()
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        (0..3).all(|i| x[i] >= self.min[i] && x[i] <= self.max[i])
    }

    /// True when the closed ball (center, r) lies inside the box.
    pub fn contains_ball(&self, center: &Vec3, r: f64) -> bool {
        (0..3).all(|i| center[i] - r >= self.min[i] - 1e-12 && center[i] + r <= self.max[i] + 1e-12)
    }
}

/// Uniform n×n×n cell grid over a box. Cell index = i + n·(j + n·k).
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeGrid {
    bbox: BoundingBox,
    n: usize,
    spacing: Vec3,
}

pub fn make_volume_grid(bbox: BoundingBox, n: usize) -> Result<VolumeGrid> {
    let bbox = BoundingBox::new(bbox.min, bbox.max)?;
    if n < 2 {
        return invalid("volume grid needs at least 2 cells per axis");
    }
    let spacing = Vec3::new(
        (bbox.max[0] - bbox.min[0]) / n as f64,
        (bbox.max[1] - bbox.min[1]) / n as f64,
        (bbox.max[2] - bbox.min[2]) / n as f64,
    );
    Ok(VolumeGrid { bbox, n, spacing })
}

impl VolumeGrid {
    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> Vec3 {
        self.spacing
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    pub fn ijk(&self, idx: usize) -> [usize; 3] {
        [idx % self.n, (idx / self.n) % self.n, idx / (self.n * self.n)]
    }

    pub fn cell_center(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.ijk(idx);
        Vec3::new(
            self.bbox.min[0] + (i as f64 + 0.5) * self.spacing.x,
            self.bbox.min[1] + (j as f64 + 0.5) * self.spacing.y,
            self.bbox.min[2] + (k as f64 + 0.5) * self.spacing.z,
        )
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.x * self.spacing.y * self.spacing.z
    }

    /// Radius of the ball with the cell's volume.
    pub fn equivalent_radius(&self) -> f64 {
        (3.0 * self.cell_volume() / (4.0 * std::f64::consts::PI)).cbrt()
    }

    /// Cells touching the box surface.
    pub fn is_boundary_cell(&self, idx: usize) -> bool {
        self.ijk(idx).iter().any(|&c| c == 0 || c + 1 == self.n)
    }

    pub fn centers(&self) -> Vec<Vec3> {
        (0..self.len()).map(|i| self.cell_center(i)).collect()
    }
}
