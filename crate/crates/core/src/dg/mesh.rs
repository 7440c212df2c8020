//! Structured triangular meshes of the unit square, with the facet
//! connectivity a discontinuous Galerkin assembly needs.
//!
//! The square is cut into `m × m` cells and each cell into two triangles
//! along its up-diagonal. Facets are discovered by hashing each edge's
//! midpoint in doubled integer grid coordinates, which identifies shared
//! edges without any floating point comparison; under periodic
//! identification the doubled coordinates are reduced modulo `2m`, gluing
//! opposite boundary edges (including the degenerate `m = 1` case, where
//! every boundary edge finds its twin).
//!
//! Every facet side records which local vertex of its cell maps to each
//! endpoint of the facet, endpoints ordered by ascending global vertex id.
//! Vertex ids grow monotonically with grid position, so the order agrees
//! between the two sides of a periodic pair, and both sides parameterize
//! the facet identically — trace coefficients from the two cells line up
//! point-for-point with no flip bookkeeping.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

/// Per-cell affine geometry: vertex positions, the Jacobian determinant of
/// the reference-to-physical map (twice the area for counterclockwise
/// cells), and the constant gradients of the barycentric coordinates.
#[derive(Clone, Debug)]
pub struct CellGeometry {
    pub verts: [[f64; 2]; 3],
    /// `|det E| = 2 · area`: the factor scaling reference integrals to
    /// physical ones.
    pub det: f64,
    /// `grad_b[i]` is the (constant) spatial gradient of barycentric
    /// coordinate `b_i`.
    pub grad_b: [[f64; 2]; 3],
}

impl CellGeometry {
    pub fn new(verts: [[f64; 2]; 3]) -> Self {
        let e1 = [verts[1][0] - verts[0][0], verts[1][1] - verts[0][1]];
        let e2 = [verts[2][0] - verts[0][0], verts[2][1] - verts[0][1]];
        let det = e1[0] * e2[1] - e1[1] * e2[0];
        assert!(det > 0.0, "cells must be counterclockwise");
        // Rows of the inverse Jacobian are the gradients of b_1, b_2.
        let g1 = [e2[1] / det, -e2[0] / det];
        let g2 = [-e1[1] / det, e1[0] / det];
        let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
        Self {
            verts,
            det,
            grad_b: [g0, g1, g2],
        }
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    /// Shortest altitude: `2·area / longest edge`, the mesh size entering
    /// time step restrictions.
    pub fn min_altitude(&self) -> f64 {
        let mut longest: f64 = 0.0;
        for i in 0..3 {
            let a = self.verts[(i + 1) % 3];
            let b = self.verts[(i + 2) % 3];
            let e = libm::hypot(a[0] - b[0], a[1] - b[1]);
            longest = longest.max(e);
        }
        self.det / longest
    }

    /// Physical point with barycentric coordinates `l`.
    pub fn point(&self, l: &[f64]) -> [f64; 2] {
        let mut p = [0.0, 0.0];
        for (v, &li) in self.verts.iter().zip(l) {
            p[0] += li * v[0];
            p[1] += li * v[1];
        }
        p
    }
}

/// One side of a facet: the cell, the local index of the vertex opposite
/// the facet, and the local indices of the cell vertices matching the
/// facet's first and second endpoints (ordered by global vertex id on this
/// side).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FacetSide {
    pub cell: usize,
    pub opposite: usize,
    pub first: usize,
    pub second: usize,
}

/// A mesh facet: the owning ("minus") side, the neighbor ("plus") side if
/// the facet is interior, the unit normal pointing out of the minus cell,
/// and the facet length.
#[derive(Clone, Debug)]
pub struct Facet {
    pub minus: FacetSide,
    pub plus: Option<FacetSide>,
    pub normal: [f64; 2],
    pub length: f64,
}

impl Facet {
    pub fn is_boundary(&self) -> bool {
        self.plus.is_none()
    }
}

/// A conforming triangulation of the unit square.
#[derive(Clone, Debug)]
pub struct SimplexMesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise global vertex ids per cell.
    pub cells: Vec<[usize; 3]>,
    pub geometries: Vec<CellGeometry>,
    pub facets: Vec<Facet>,
}

impl SimplexMesh {
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn num_boundary_facets(&self) -> usize {
        self.facets.iter().filter(|f| f.is_boundary()).count()
    }

    pub fn num_interior_facets(&self) -> usize {
        self.num_facets() - self.num_boundary_facets()
    }

    /// Smallest altitude over all cells.
    pub fn min_altitude(&self) -> f64 {
        self.geometries
            .iter()
            .map(CellGeometry::min_altitude)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn total_area(&self) -> f64 {
        self.geometries.iter().map(CellGeometry::area).sum()
    }
}

/// Builds the `m × m × 2` triangulation of `[0,1]²`. With `periodic` set,
/// opposite boundary edges are identified and every facet is interior;
/// otherwise boundary edges become single-sided facets.
pub fn build_structured_mesh(m: usize, periodic: bool) -> SimplexMesh {
    assert!(m >= 1, "mesh needs at least one cell per direction");
    let mf = m as f64;
    let vid = |i: usize, j: usize| j * (m + 1) + i;
    let mut vertices = Vec::with_capacity((m + 1) * (m + 1));
    let mut grid = Vec::with_capacity((m + 1) * (m + 1));
    for j in 0..=m {
        for i in 0..=m {
            vertices.push([i as f64 / mf, j as f64 / mf]);
            grid.push((i, j));
        }
    }

    let mut cells: Vec<[usize; 3]> = Vec::with_capacity(2 * m * m);
    for j in 0..m {
        for i in 0..m {
            let p00 = vid(i, j);
            let p10 = vid(i + 1, j);
            let p01 = vid(i, j + 1);
            let p11 = vid(i + 1, j + 1);
            cells.push([p00, p10, p11]);
            cells.push([p00, p11, p01]);
        }
    }
    let geometries: Vec<CellGeometry> = cells
        .iter()
        .map(|c| CellGeometry::new([vertices[c[0]], vertices[c[1]], vertices[c[2]]]))
        .collect();

    // Group facet sides by the doubled-integer midpoint of their edge,
    // reduced modulo 2m under periodic identification.
    let mut by_key: BTreeMap<(usize, usize), Vec<FacetSide>> = BTreeMap::new();
    for (c, cell) in cells.iter().enumerate() {
        for opposite in 0..3 {
            let la = (opposite + 1) % 3;
            let lb = (opposite + 2) % 3;
            let (ga, gb) = (cell[la], cell[lb]);
            let (ia, ja) = grid[ga];
            let (ib, jb) = grid[gb];
            let mut key = (ia + ib, ja + jb);
            if periodic {
                key = (key.0 % (2 * m), key.1 % (2 * m));
            }
            // Order endpoints by global id on this side.
            let (first, second) = if ga < gb { (la, lb) } else { (lb, la) };
            by_key.entry(key).or_default().push(FacetSide {
                cell: c,
                opposite,
                first,
                second,
            });
        }
    }

    let mut facets = Vec::with_capacity(by_key.len());
    for (key, sides) in by_key {
        assert!(
            sides.len() <= 2,
            "edge key {key:?} matched {} sides",
            sides.len()
        );
        let minus = sides[0];
        let plus = sides.get(1).copied();
        let geom = &geometries[minus.cell];
        let g = geom.grad_b[minus.opposite];
        let norm = libm::hypot(g[0], g[1]);
        let normal = [-g[0] / norm, -g[1] / norm];
        let a = geom.verts[minus.first];
        let b = geom.verts[minus.second];
        let length = libm::hypot(b[0] - a[0], b[1] - a[1]);
        facets.push(Facet {
            minus,
            plus,
            normal,
            length,
        });
    }

    SimplexMesh {
        vertices,
        cells,
        geometries,
        facets,
    }
}
