use crate::error::{Error, Result};
use crate::geometry::Region;

/// Structured mesh of `(-L, L) x (-H, d)` with `z = 0` as a mesh line.
///
/// Node `(i, j)` has index `i + j * (nx + 1)`, row `j = 0` lies on `z = -H` and row
/// `nz1` on the interface. Cell `(i, j)` has index `i + j * nx`.
#[derive(Debug, Clone)]
pub struct ReferenceMesh {
    pub nx: usize,
    pub nz1: usize,
    pub nz2: usize,
    pub half_width: f64,
    pub gap: f64,
    pub thickness: f64,
    pub xs: Vec<f64>,
    pub zs: Vec<f64>,
    pub boundary: Vec<bool>,
    /// Node index to interior unknown index, `usize::MAX` on the boundary.
    pub interior_index: Vec<usize>,
    pub interior_nodes: Vec<usize>,
}

impl ReferenceMesh {
    pub fn build(half_width: f64, gap: f64, thickness: f64, nx: usize, nz1: usize, nz2: usize) -> Result<Self> {
        for (name, v) in [("half_width", half_width), ("gap", gap), ("thickness", thickness)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter { name, reason: format!("extent must be > 0, got {v}") });
            }
        }
        for (name, n) in [("nx", nx), ("nz1", nz1), ("nz2", nz2)] {
            if n == 0 {
                return Err(Error::InvalidParameter { name, reason: "cell count must be positive".into() });
            }
        }
        let hx = 2.0 * half_width / nx as f64;
        let xs: Vec<f64> = (0..=nx).map(|i| if i == nx { half_width } else { -half_width + i as f64 * hx }).collect();
        let mut zs = Vec::with_capacity(nz1 + nz2 + 1);
        for j in 0..nz1 {
            zs.push(-gap + j as f64 * gap / nz1 as f64);
        }
        zs.push(0.0);
        for j in 1..=nz2 {
            zs.push(if j == nz2 { thickness } else { j as f64 * thickness / nz2 as f64 });
        }
        let nz = nz1 + nz2;
        let n_nodes = (nx + 1) * (nz + 1);
        let mut boundary = vec![false; n_nodes];
        for j in 0..=nz {
            for i in 0..=nx {
                boundary[i + j * (nx + 1)] = i == 0 || i == nx || j == 0 || j == nz;
            }
        }
        let mut interior_index = vec![usize::MAX; n_nodes];
        let mut interior_nodes = Vec::new();
        for (n, &b) in boundary.iter().enumerate() {
            if !b {
                interior_index[n] = interior_nodes.len();
                interior_nodes.push(n);
            }
        }
        Ok(Self { nx, nz1, nz2, half_width, gap, thickness, xs, zs, boundary, interior_index, interior_nodes })
    }

    pub fn nz(&self) -> usize {
        self.nz1 + self.nz2
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.nz() + 1)
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.nz()
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        i + j * (self.nx + 1)
    }

    pub fn node_coords(&self, n: usize) -> (f64, f64) {
        let i = n % (self.nx + 1);
        let j = n / (self.nx + 1);
        (self.xs[i], self.zs[j])
    }

    /// Counter-clockwise nodes of cell `(i, j)`.
    #[inline]
    pub fn cell_nodes(&self, c: usize) -> [usize; 4] {
        let (i, j) = (c % self.nx, c / self.nx);
        [self.node(i, j), self.node(i + 1, j), self.node(i + 1, j + 1), self.node(i, j + 1)]
    }

    /// `(x0, z0, hx, hz)` of a cell.
    #[inline]
    pub fn cell_box(&self, c: usize) -> (f64, f64, f64, f64) {
        let (i, j) = (c % self.nx, c / self.nx);
        (self.xs[i], self.zs[j], self.xs[i + 1] - self.xs[i], self.zs[j + 1] - self.zs[j])
    }

    pub fn cell_region(&self, c: usize) -> Region {
        if c / self.nx < self.nz1 {
            Region::Lower
        } else {
            Region::Upper
        }
    }

    pub fn interface_nodes(&self) -> Vec<usize> {
        (0..=self.nx).map(|i| self.node(i, self.nz1)).collect()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_cells()).map(|c| {
            let (_, _, hx, hz) = self.cell_box(c);
            hx * hz
        }).sum()
    }

    /// Midpoints of the cell columns.
    pub fn x_midpoints(&self) -> Vec<f64> {
        self.xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}
