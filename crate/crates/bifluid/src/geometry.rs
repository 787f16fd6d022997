//! Uniform Cartesian meshes (1D interval, 2D rectangle), boundary-face
//! bookkeeping and classification of the boundary by the sign of `u_B · n`.

use crate::{Error, Result};

/// Faces with |u_B · n| below this go to the neutral part of the boundary.
pub const TOL_BC: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lo,
    Hi,
}

/// One boundary face of a Cartesian mesh.
#[derive(Debug, Clone)]
pub struct BoundaryFace {
    /// Index of the cell the face belongs to.
    pub cell: usize,
    /// Axis the face is orthogonal to.
    pub axis: usize,
    pub side: Side,
    /// Outward unit normal.
    pub normal: [f64; 2],
    /// Face measure (1 in 1D, edge length in 2D).
    pub measure: f64,
    pub center: [f64; 2],
}

/// Uniform Cartesian mesh on (0,L0) or (0,L0)x(0,L1).
///
/// Immutable after construction; freely shared across parallel runs.
#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    n: [usize; 2],
    len: [f64; 2],
    h: [f64; 2],
    boundary: Vec<BoundaryFace>,
}

impl Mesh {
    pub fn line(cells: usize, length: f64) -> Result<Self> {
        Self::new(1, [cells, 1], [length, 1.0])
    }

    pub fn rectangle(cells: [usize; 2], lengths: [f64; 2]) -> Result<Self> {
        Self::new(2, cells, lengths)
    }

    fn new(dim: usize, n: [usize; 2], len: [f64; 2]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArg(format!("dimension must be 1 or 2, got {dim}")));
        }
        if n[0] == 0 || n[1] == 0 || len[0] <= 0.0 || len[1] <= 0.0 {
            return Err(Error::InvalidArg("cell counts and lengths must be positive".into()));
        }
        let h = [len[0] / n[0] as f64, len[1] / n[1] as f64];
        let mut mesh = Mesh { dim, n, len, h, boundary: Vec::new() };
        mesh.boundary = mesh.build_boundary();
        Ok(mesh)
    }

    fn build_boundary(&self) -> Vec<BoundaryFace> {
        let mut faces = Vec::new();
        let [nx, ny] = self.n;
        // Faces orthogonal to axis 0 (left/right).
        for j in 0..ny {
            let yc = if self.dim == 2 { (j as f64 + 0.5) * self.h[1] } else { 0.0 };
            let measure = if self.dim == 2 { self.h[1] } else { 1.0 };
            faces.push(BoundaryFace {
                cell: self.cell_index(0, j),
                axis: 0,
                side: Side::Lo,
                normal: [-1.0, 0.0],
                measure,
                center: [0.0, yc],
            });
            faces.push(BoundaryFace {
                cell: self.cell_index(nx - 1, j),
                axis: 0,
                side: Side::Hi,
                normal: [1.0, 0.0],
                measure,
                center: [self.len[0], yc],
            });
        }
        if self.dim == 2 {
            // Faces orthogonal to axis 1 (bottom/top).
            for i in 0..nx {
                let xc = (i as f64 + 0.5) * self.h[0];
                faces.push(BoundaryFace {
                    cell: self.cell_index(i, 0),
                    axis: 1,
                    side: Side::Lo,
                    normal: [0.0, -1.0],
                    measure: self.h[0],
                    center: [xc, 0.0],
                });
                faces.push(BoundaryFace {
                    cell: self.cell_index(i, ny - 1),
                    axis: 1,
                    side: Side::Hi,
                    normal: [0.0, 1.0],
                    measure: self.h[0],
                    center: [xc, self.len[1]],
                });
            }
        }
        faces
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> [usize; 2] {
        self.n
    }

    pub fn num_cells(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn lengths(&self) -> [f64; 2] {
        self.len
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.h
    }

    /// Cell volume (width in 1D, area in 2D).
    pub fn cell_volume(&self) -> f64 {
        if self.dim == 2 {
            self.h[0] * self.h[1]
        } else {
            self.h[0]
        }
    }

    pub fn domain_measure(&self) -> f64 {
        self.cell_volume() * self.num_cells() as f64
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i + self.n[0] * j
    }

    pub fn cell_coords(&self, c: usize) -> (usize, usize) {
        (c % self.n[0], c / self.n[0])
    }

    pub fn cell_center(&self, c: usize) -> [f64; 2] {
        let (i, j) = self.cell_coords(c);
        [
            (i as f64 + 0.5) * self.h[0],
            if self.dim == 2 { (j as f64 + 0.5) * self.h[1] } else { 0.0 },
        ]
    }

    /// Distance from a cell center to the domain boundary.
    pub fn distance_to_boundary(&self, c: usize) -> f64 {
        let x = self.cell_center(c);
        let mut d = f64::INFINITY;
        for a in 0..self.dim {
            d = d.min(x[a]).min(self.len[a] - x[a]);
        }
        d
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary
    }

    /// Face area of a face orthogonal to `axis`.
    pub fn face_area(&self, axis: usize) -> f64 {
        self.cell_volume() / self.h[axis]
    }

    /// Neighbor of cell `c` along `axis` on the given side, if interior.
    pub fn neighbor(&self, c: usize, axis: usize, side: Side) -> Option<usize> {
        let (i, j) = self.cell_coords(c);
        match (axis, side) {
            (0, Side::Lo) if i > 0 => Some(self.cell_index(i - 1, j)),
            (0, Side::Hi) if i + 1 < self.n[0] => Some(self.cell_index(i + 1, j)),
            (1, Side::Lo) if j > 0 => Some(self.cell_index(i, j - 1)),
            (1, Side::Hi) if j + 1 < self.n[1] => Some(self.cell_index(i, j + 1)),
            _ => None,
        }
    }
}

/// Normal (axis-component) velocity on every face of the mesh, including
/// the boundary faces at the axis ends.
///
/// Faces orthogonal to axis 0 are indexed `i + (nx+1)*j` for `i` in `0..=nx`;
/// faces orthogonal to axis 1 are indexed `i + nx*j` for `j` in `0..=ny`.
/// Values are the velocity component along the axis (not `u·n`).
#[derive(Debug, Clone)]
pub struct FaceVelocity {
    pub axis: [Vec<f64>; 2],
}

impl FaceVelocity {
    pub fn zero(mesh: &Mesh) -> Self {
        let [nx, ny] = mesh.cells();
        FaceVelocity {
            axis: [
                vec![0.0; (nx + 1) * ny],
                if mesh.dim() == 2 { vec![0.0; nx * (ny + 1)] } else { Vec::new() },
            ],
        }
    }

    pub fn face_index(mesh: &Mesh, axis: usize, i: usize, j: usize) -> usize {
        let [nx, _] = mesh.cells();
        if axis == 0 {
            i + (nx + 1) * j
        } else {
            i + nx * j
        }
    }

    /// Velocity component at the face on `side` of cell `c` along `axis`.
    pub fn at_cell_face(&self, mesh: &Mesh, c: usize, axis: usize, side: Side) -> f64 {
        let (i, j) = mesh.cell_coords(c);
        let idx = match (axis, side) {
            (0, Side::Lo) => Self::face_index(mesh, 0, i, j),
            (0, Side::Hi) => Self::face_index(mesh, 0, i + 1, j),
            (1, Side::Lo) => Self::face_index(mesh, 1, i, j),
            (1, Side::Hi) => Self::face_index(mesh, 1, i, j + 1),
            _ => unreachable!("axis out of range"),
        };
        self.axis[axis][idx]
    }

    /// Discrete divergence of the face velocity in cell `c`:
    /// sum of outward face fluxes divided by the cell volume.
    pub fn divergence(&self, mesh: &Mesh, c: usize) -> f64 {
        let vol = mesh.cell_volume();
        let mut acc = 0.0;
        for axis in 0..mesh.dim() {
            let area = mesh.face_area(axis);
            acc += area * self.at_cell_face(mesh, c, axis, Side::Hi);
            acc -= area * self.at_cell_face(mesh, c, axis, Side::Lo);
        }
        acc / vol
    }

    pub fn max_abs_divergence(&self, mesh: &Mesh) -> f64 {
        (0..mesh.num_cells()).map(|c| self.divergence(mesh, c).abs()).fold(0.0, f64::max)
    }
}

/// `u·n` on every boundary face, read off a [`FaceVelocity`] field. Using
/// this to classify the boundary keeps the ledgers and the scheme working
/// with one and the same velocity.
pub fn normal_velocities(mesh: &Mesh, faces: &FaceVelocity) -> Vec<f64> {
    mesh.boundary_faces()
        .iter()
        .map(|bf| {
            let sign = if bf.side == Side::Hi { 1.0 } else { -1.0 };
            sign * faces.at_cell_face(mesh, bf.cell, bf.axis, bf.side)
        })
        .collect()
}

/// Disjoint decomposition of the boundary faces by the sign of `u_B · n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryPartition {
    pub inflow: Vec<usize>,
    pub outflow: Vec<usize>,
    pub neutral: Vec<usize>,
}

/// Classify every boundary face by the sign of `u_B · n` with tolerance
/// [`TOL_BC`]. Total function: every face lands in exactly one set.
pub fn classify_boundary(mesh: &Mesh, u_n: &[f64]) -> BoundaryPartition {
    let mut part = BoundaryPartition { inflow: Vec::new(), outflow: Vec::new(), neutral: Vec::new() };
    for (f, &un) in u_n.iter().enumerate().take(mesh.boundary_faces().len()) {
        if un < -TOL_BC {
            part.inflow.push(f);
        } else if un > TOL_BC {
            part.outflow.push(f);
        } else {
            part.neutral.push(f);
        }
    }
    part
}

/// Midpoint-quadrature value of the surface integral of `r u_B·n` over the
/// given face set. Linear in `r`, additive over disjoint face sets.
pub fn boundary_flux(mesh: &Mesh, r: &[f64], u_n: &[f64], faces: &[usize]) -> f64 {
    faces
        .iter()
        .map(|&f| r[f] * u_n[f] * mesh.boundary_faces()[f].measure)
        .sum()
}

/// Velocity, per-species boundary densities and the sign partition on the
/// boundary faces of a mesh.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    /// `u_B · n` per boundary face.
    pub u_n: Vec<f64>,
    pub partition: BoundaryPartition,
    pub rho: Vec<f64>,
    pub z: Vec<f64>,
    pub big_r: Vec<f64>,
    pub big_z: Vec<f64>,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    Rho,
    Z,
    BigR,
    BigZ,
}

impl Species {
    pub const ALL: [Species; 4] = [Species::Rho, Species::Z, Species::BigR, Species::BigZ];

    pub fn name(self) -> &'static str {
        match self {
            Species::Rho => "rho",
            Species::Z => "z",
            Species::BigR => "R",
            Species::BigZ => "Z",
        }
    }
}

impl BoundaryData {
    pub fn species(&self, sp: Species) -> &[f64] {
        match sp {
            Species::Rho => &self.rho,
            Species::Z => &self.z,
            Species::BigR => &self.big_r,
            Species::BigZ => &self.big_z,
        }
    }
}
