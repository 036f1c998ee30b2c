//! Structured box meshes: each grid cell is split into six tetrahedra
//! sharing the main diagonal, which keeps neighboring cells conforming.

use super::SimplicialMesh;
use crate::{Error, Result};

const AXIS_ORDERS: [[usize; 3]; 6] =
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Box `[0, extent]` with `divisions` cells per axis; every cell gets
/// region tag 1 and boundary faces get tags 1..=6 for the sides
/// x=0, x=L, y=0, y=L, z=0, z=L.
pub fn generate_box_mesh(extent: [f64; 3], divisions: [usize; 3]) -> Result<SimplicialMesh> {
    generate_box_mesh_with(extent, divisions, |_| 1, None)
}

/// Box mesh with a region rule evaluated at cell centers and an optional
/// boundary rule overriding the default side tags (it receives the face
/// centroid and the default tag).
pub fn generate_box_mesh_with(
    extent: [f64; 3],
    divisions: [usize; 3],
    region_rule: impl Fn([f64; 3]) -> i32,
    boundary_rule: Option<&dyn Fn([f64; 3], i32) -> i32>,
) -> Result<SimplicialMesh> {
    let [nx, ny, nz] = divisions;
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::Spec("box mesh needs at least one cell per axis".into()));
    }
    if extent.iter().any(|&l| l <= 0.0) {
        return Err(Error::Spec("box extent must be positive".into()));
    }
    let h = [extent[0] / nx as f64, extent[1] / ny as f64, extent[2] / nz as f64];
    let idx = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([i as f64 * h[0], j as f64 * h[1], k as f64 * h[2]]);
            }
        }
    }

    let mut tets = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let center = [
                    (i as f64 + 0.5) * h[0],
                    (j as f64 + 0.5) * h[1],
                    (k as f64 + 0.5) * h[2],
                ];
                let region = region_rule(center);
                for order in &AXIS_ORDERS {
                    // walk corner offsets along the permuted axes
                    let mut off = [0usize; 3];
                    let mut quad = [idx(i, j, k); 4];
                    for (step, &axis) in order.iter().enumerate() {
                        off[axis] = 1;
                        quad[step + 1] = idx(i + off[0], j + off[1], k + off[2]);
                    }
                    tets.push((quad, region));
                }
            }
        }
    }

    // tag boundary faces by which box side they lie on
    let tol = 1e-9 * extent.iter().fold(f64::MIN, |a, &b| a.max(b));
    let side_tag = |c: [f64; 3]| -> i32 {
        for axis in 0..3 {
            if c[axis].abs() < tol {
                return (2 * axis + 1) as i32;
            }
            if (c[axis] - extent[axis]).abs() < tol {
                return (2 * axis + 2) as i32;
            }
        }
        0
    };

    // build once untagged to discover boundary faces, then tag
    let mesh = SimplicialMesh::new(vertices.clone(), tets.clone(), &[])?;
    let mut tags = Vec::new();
    for f in mesh.boundary_faces() {
        let c = mesh.face_centroid(f);
        let tag = side_tag(c);
        let tag = match &boundary_rule {
            Some(rule) => rule(c, tag),
            None => tag,
        };
        if tag != 0 {
            tags.push((mesh.face(f), tag));
        }
    }
    SimplicialMesh::new(vertices, tets, &tags)
}
