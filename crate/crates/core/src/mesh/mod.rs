//! Tetrahedral meshes with oriented incidence, cochains, and piecewise
//! fields.
//!
//! Simplices are canonically oriented by ascending vertex ids; a tet whose
//! four sorted vertices give negative volume has its last two vertices
//! swapped at build time, so every stored tet is positively oriented in the
//! fixed global orientation. Signed incidence follows permutation parity,
//! which makes the discrete complex exact over the integers.

mod boxmesh;
mod io;
mod smooth;
mod trace;
mod whitney;

pub use boxmesh::{generate_box_mesh, generate_box_mesh_with};
pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string};
pub use smooth::{
    covariant_exterior_derivative, covariant_exterior_derivative_vv, d_from_partials,
    SmoothCovectorField, SmoothVectorField,
};
pub use trace::{
    boundary_face_outward_sign, face_dot_wedge, face_wedge, trace_boundary,
    trace_boundary_covector_valued, trace_covector_valued, trace_form, trace_vector_valued,
    FaceFrame,
};
pub use whitney::{barycentric, displacement_gradient, integrate, integrate_region, whitney_value};

use crate::{Error, Result};
use std::collections::BTreeMap;

/// Reference from a tet to one of its four faces: global face id, incidence
/// sign, and the local vertex indices in ascending-global order.
#[derive(Clone, Copy, Debug)]
pub(crate) struct TetFaceRef {
    pub face: usize,
    pub sign: i8,
    pub local: [u8; 3],
}

/// Reference from a tet to one of its six edges; local indices are ordered
/// so that the first maps to the smaller global vertex id.
#[derive(Clone, Copy, Debug)]
pub(crate) struct TetEdgeRef {
    pub edge: usize,
    pub local: [u8; 2],
}

/// An oriented tetrahedral complex.
#[derive(Clone, Debug)]
pub struct SimplicialMesh {
    vertices: Vec<[f64; 3]>,
    tets: Vec<[usize; 4]>,
    tet_region: Vec<i32>,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 3]>,
    /// Edge ids of each face in the order (bc, ac, ab) with incidence signs
    /// (+, -, +).
    face_edges: Vec<[usize; 3]>,
    tet_faces: Vec<[TetFaceRef; 4]>,
    tet_edges: Vec<[TetEdgeRef; 6]>,
    face_tets: Vec<(usize, Option<usize>)>,
    /// Boundary tag per face; 0 for interior faces and untagged boundary.
    face_tag: Vec<i32>,
    tet_volume: Vec<f64>,
    /// Barycentric gradients per tet, one 3-vector per local vertex.
    tet_grads: Vec<[[f64; 3]; 4]>,
}

fn permutation_parity<T: Ord>(items: &[T]) -> i8 {
    let mut sign = 1i8;
    for i in 0..items.len() {
        for j in (i + 1)..items.len() {
            if items[i] > items[j] {
                sign = -sign;
            }
        }
    }
    sign
}

impl SimplicialMesh {
    /// Builds a mesh from raw vertices, tets with region tags, and tagged
    /// boundary faces. Incidence exactness and positive volumes are
    /// enforced here.
    pub fn new(
        vertices: Vec<[f64; 3]>,
        tets_in: Vec<([usize; 4], i32)>,
        boundary_tags: &[([usize; 3], i32)],
    ) -> Result<Self> {
        let nv = vertices.len();
        if nv < 4 || tets_in.is_empty() {
            return Err(Error::MeshInvalid("need at least one tetrahedron".into()));
        }

        let mut tets = Vec::with_capacity(tets_in.len());
        let mut tet_region = Vec::with_capacity(tets_in.len());
        let mut tet_volume = Vec::with_capacity(tets_in.len());
        let mut tet_grads = Vec::with_capacity(tets_in.len());

        for (ti, (ids, region)) in tets_in.into_iter().enumerate() {
            let mut v = ids;
            v.sort_unstable();
            if v.iter().any(|&i| i >= nv) {
                return Err(Error::MeshInvalid(format!("tet {ti} references a missing vertex")));
            }
            if v[0] == v[1] || v[1] == v[2] || v[2] == v[3] {
                return Err(Error::MeshInvalid(format!("tet {ti} repeats a vertex")));
            }
            let vol = signed_volume(&vertices, &v);
            let vol = if vol < 0.0 {
                v.swap(2, 3);
                -vol
            } else {
                vol
            };
            let scale = edge_scale(&vertices, &v);
            if vol <= 1e-14 * scale * scale * scale {
                return Err(Error::DegenerateElement(ti));
            }
            tet_grads.push(barycentric_gradients(&vertices, &v));
            tet_volume.push(vol);
            tets.push(v);
            tet_region.push(region);
        }

        // deterministic simplex numbering: lexicographic over sorted ids
        let mut edge_ids: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        let mut face_ids: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        for t in &tets {
            let mut s = *t;
            s.sort_unstable();
            for i in 0..4 {
                for j in (i + 1)..4 {
                    edge_ids.entry([s[i], s[j]]).or_default();
                }
                let mut tri = [0usize; 3];
                let mut k = 0;
                for (m, &vtx) in s.iter().enumerate() {
                    if m != i {
                        tri[k] = vtx;
                        k += 1;
                    }
                }
                face_ids.entry(tri).or_default();
            }
        }
        for (i, v) in edge_ids.values_mut().enumerate() {
            *v = i;
        }
        for (i, v) in face_ids.values_mut().enumerate() {
            *v = i;
        }
        let edges: Vec<[usize; 2]> = edge_ids.keys().copied().collect();
        let faces: Vec<[usize; 3]> = face_ids.keys().copied().collect();

        let face_edges: Vec<[usize; 3]> = faces
            .iter()
            .map(|&[a, b, c]| [edge_ids[&[b, c]], edge_ids[&[a, c]], edge_ids[&[a, b]]])
            .collect();

        let mut face_tets: Vec<(usize, Option<usize>)> = vec![(usize::MAX, None); faces.len()];
        let mut tet_faces = Vec::with_capacity(tets.len());
        let mut tet_edges = Vec::with_capacity(tets.len());

        for (ti, t) in tets.iter().enumerate() {
            let mut frefs = [TetFaceRef { face: 0, sign: 0, local: [0; 3] }; 4];
            for m in 0..4 {
                let mut tri_local = [0u8; 3];
                let mut k = 0;
                for l in 0..4 {
                    if l != m {
                        tri_local[k] = l as u8;
                        k += 1;
                    }
                }
                let tri_global = [t[tri_local[0] as usize], t[tri_local[1] as usize], t[tri_local[2] as usize]];
                // sort the ordered boundary triple into canonical order,
                // tracking parity
                let mut pairs: Vec<(usize, u8)> =
                    tri_global.iter().copied().zip(tri_local).collect();
                let parity = permutation_parity(&tri_global);
                pairs.sort_unstable_by_key(|p| p.0);
                let sorted = [pairs[0].0, pairs[1].0, pairs[2].0];
                let local = [pairs[0].1, pairs[1].1, pairs[2].1];
                let face = face_ids[&sorted];
                let sign = if m % 2 == 0 { parity } else { -parity };
                frefs[m] = TetFaceRef { face, sign, local };
                let slot = &mut face_tets[face];
                if slot.0 == usize::MAX {
                    slot.0 = ti;
                } else if slot.1.is_none() {
                    slot.1 = Some(ti);
                } else {
                    return Err(Error::MeshInvalid(format!(
                        "face {sorted:?} belongs to more than two tets"
                    )));
                }
            }
            tet_faces.push(frefs);

            let mut erefs = [TetEdgeRef { edge: 0, local: [0; 2] }; 6];
            let mut k = 0;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let (a, b) = (t[i], t[j]);
                    let (lo, hi, la, lb) =
                        if a < b { (a, b, i as u8, j as u8) } else { (b, a, j as u8, i as u8) };
                    erefs[k] = TetEdgeRef { edge: edge_ids[&[lo, hi]], local: [la, lb] };
                    k += 1;
                }
            }
            tet_edges.push(erefs);
        }

        let mut face_tag = vec![0i32; faces.len()];
        for &(tri, tag) in boundary_tags {
            let mut s = tri;
            s.sort_unstable();
            let fid = *face_ids
                .get(&s)
                .ok_or_else(|| Error::MeshInvalid(format!("tagged face {s:?} not in mesh")))?;
            if face_tets[fid].1.is_some() {
                return Err(Error::MeshInvalid(format!("tagged face {s:?} is interior")));
            }
            face_tag[fid] = tag;
        }

        let mesh = Self {
            vertices,
            tets,
            tet_region,
            edges,
            faces,
            face_edges,
            tet_faces,
            tet_edges,
            face_tets,
            face_tag,
            tet_volume,
            tet_grads,
        };
        if !mesh.incidence_products_vanish() {
            return Err(Error::MeshInvalid("incidence products do not vanish".into()));
        }
        Ok(mesh)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    /// Number of p-simplices.
    pub fn simplex_count(&self, degree: usize) -> usize {
        match degree {
            0 => self.vertex_count(),
            1 => self.edge_count(),
            2 => self.face_count(),
            3 => self.tet_count(),
            _ => 0,
        }
    }

    pub fn vertex(&self, i: usize) -> [f64; 3] {
        self.vertices[i]
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn tet(&self, t: usize) -> [usize; 4] {
        self.tets[t]
    }

    pub fn region(&self, t: usize) -> i32 {
        self.tet_region[t]
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    pub fn face(&self, f: usize) -> [usize; 3] {
        self.faces[f]
    }

    pub fn tet_volume(&self, t: usize) -> f64 {
        self.tet_volume[t]
    }

    pub fn total_volume(&self) -> f64 {
        self.tet_volume.iter().sum()
    }

    pub(crate) fn tet_grad(&self, t: usize) -> &[[f64; 3]; 4] {
        &self.tet_grads[t]
    }

    pub(crate) fn tet_face_refs(&self, t: usize) -> &[TetFaceRef; 4] {
        &self.tet_faces[t]
    }

    pub(crate) fn tet_edge_refs(&self, t: usize) -> &[TetEdgeRef; 6] {
        &self.tet_edges[t]
    }

    /// The one or two tets incident to a face.
    pub fn face_tets(&self, f: usize) -> (usize, Option<usize>) {
        self.face_tets[f]
    }

    /// Edge ids of a face `(a<b<c)` in the order `(bc, ac, ab)`; the
    /// incidence signs for that order are `(+, -, +)`.
    pub fn face_edge_ids(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }

    pub fn is_boundary_face(&self, f: usize) -> bool {
        self.face_tets[f].1.is_none()
    }

    /// Boundary tag of a face (0 when interior or untagged).
    pub fn boundary_tag(&self, f: usize) -> i32 {
        self.face_tag[f]
    }

    /// Ids of all boundary faces, i.e. faces incident to exactly one tet.
    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&f| self.is_boundary_face(f))
    }

    pub fn tet_centroid(&self, t: usize) -> [f64; 3] {
        let mut c = [0.0; 3];
        for &v in &self.tets[t] {
            for k in 0..3 {
                c[k] += self.vertices[v][k] * 0.25;
            }
        }
        c
    }

    pub fn face_centroid(&self, f: usize) -> [f64; 3] {
        let mut c = [0.0; 3];
        for &v in &self.faces[f] {
            for k in 0..3 {
                c[k] += self.vertices[v][k] / 3.0;
            }
        }
        c
    }

    /// Checks `D1 D0 = 0` and `D2 D1 = 0` exactly in integer arithmetic.
    pub fn incidence_products_vanish(&self) -> bool {
        // D1 D0: the boundary-of-boundary of every face hits each vertex
        // with canceling signs
        for f in 0..self.faces.len() {
            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
            let signs = [1i64, -1, 1];
            for (k, &e) in self.face_edges[f].iter().enumerate() {
                let [a, b] = self.edges[e];
                *acc.entry(b).or_default() += signs[k];
                *acc.entry(a).or_default() -= signs[k];
            }
            if acc.values().any(|&v| v != 0) {
                return false;
            }
        }
        // D2 D1
        for t in 0..self.tets.len() {
            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
            for fr in &self.tet_faces[t] {
                let signs = [1i64, -1, 1];
                for (k, &e) in self.face_edges[fr.face].iter().enumerate() {
                    *acc.entry(e).or_default() += fr.sign as i64 * signs[k];
                }
            }
            if acc.values().any(|&v| v != 0) {
                return false;
            }
        }
        true
    }

    /// Applies the transpose of the vertex-edge incidence to an edge vector:
    /// `(out)_v = sum_e D0[e][v] x_e`. Used for gradient-compatibility
    /// checks of magnetic sources.
    pub fn d0_transpose_apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.edges.len());
        let mut out = vec![0.0; self.vertices.len()];
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            out[b] += x[e];
            out[a] -= x[e];
        }
        out
    }
}

fn signed_volume(vertices: &[[f64; 3]], t: &[usize; 4]) -> f64 {
    let p0 = vertices[t[0]];
    let mut m = [[0.0; 3]; 3];
    for k in 0..3 {
        for c in 0..3 {
            m[c][k] = vertices[t[k + 1]][c] - p0[c];
        }
    }
    crate::algebra::mat_det(&m) / 6.0
}

fn edge_scale(vertices: &[[f64; 3]], t: &[usize; 4]) -> f64 {
    let mut s = 0.0f64;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let (a, b) = (vertices[t[i]], vertices[t[j]]);
            let d2 = (0..3).map(|k| (a[k] - b[k]) * (a[k] - b[k])).sum::<f64>();
            s = s.max(d2.sqrt());
        }
    }
    s
}

fn barycentric_gradients(vertices: &[[f64; 3]], t: &[usize; 4]) -> [[f64; 3]; 4] {
    let p0 = vertices[t[0]];
    let mut e = [[0.0; 3]; 3];
    for k in 0..3 {
        for c in 0..3 {
            e[c][k] = vertices[t[k + 1]][c] - p0[c];
        }
    }
    let inv = crate::algebra::mat_inverse(&e).expect("non-degenerate tet");
    let mut g = [[0.0; 3]; 4];
    for i in 0..3 {
        g[i + 1] = inv[i];
        for c in 0..3 {
            g[0][c] -= inv[i][c];
        }
    }
    g
}

/// Degrees of freedom attached to p-simplices: one real per simplex.
#[derive(Clone, Debug)]
pub struct Cochain {
    degree: usize,
    values: Vec<f64>,
}

impl Cochain {
    pub fn zeros(mesh: &SimplicialMesh, degree: usize) -> Result<Self> {
        if degree > 3 {
            return Err(Error::InvalidDegree { degree, context: "Cochain" });
        }
        Ok(Self { degree, values: vec![0.0; mesh.simplex_count(degree)] })
    }

    pub fn from_values(mesh: &SimplicialMesh, degree: usize, values: Vec<f64>) -> Result<Self> {
        if degree > 3 {
            return Err(Error::InvalidDegree { degree, context: "Cochain" });
        }
        if values.len() != mesh.simplex_count(degree) {
            return Err(Error::Spec(format!(
                "cochain length {} does not match the {}-simplex count {}",
                values.len(),
                degree,
                mesh.simplex_count(degree)
            )));
        }
        Ok(Self { degree, values })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Discrete exterior derivative: the signed incidence operator acting on
/// cochain values; `d(d(c)) = 0` exactly.
pub fn exterior_derivative(mesh: &SimplicialMesh, c: &Cochain) -> Result<Cochain> {
    match c.degree() {
        0 => {
            let mut out = vec![0.0; mesh.edge_count()];
            for (e, &[a, b]) in mesh.edges.iter().enumerate() {
                out[e] = c.values[b] - c.values[a];
            }
            Cochain::from_values(mesh, 1, out)
        }
        1 => {
            let mut out = vec![0.0; mesh.face_count()];
            for (f, fe) in mesh.face_edges.iter().enumerate() {
                out[f] = c.values[fe[0]] - c.values[fe[1]] + c.values[fe[2]];
            }
            Cochain::from_values(mesh, 2, out)
        }
        2 => {
            let mut out = vec![0.0; mesh.tet_count()];
            for (t, frefs) in mesh.tet_faces.iter().enumerate() {
                out[t] = frefs.iter().map(|fr| fr.sign as f64 * c.values[fr.face]).sum();
            }
            Cochain::from_values(mesh, 3, out)
        }
        d => Err(Error::InvalidDegree { degree: d, context: "exterior_derivative" }),
    }
}

/// One 3-vector per mesh vertex (nodal P1 displacement).
#[derive(Clone, Debug)]
pub struct NodalVectorField {
    values: Vec<[f64; 3]>,
}

impl NodalVectorField {
    pub fn zeros(mesh: &SimplicialMesh) -> Self {
        Self { values: vec![[0.0; 3]; mesh.vertex_count()] }
    }

    pub fn from_fn(mesh: &SimplicialMesh, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        Self { values: mesh.vertices.iter().map(|&x| f(x)).collect() }
    }

    pub fn from_values(values: Vec<[f64; 3]>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [[f64; 3]] {
        &mut self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// One value per tet: the storage for every piecewise-constant field.
#[derive(Clone, Debug)]
pub struct ElementField<T> {
    values: Vec<T>,
}

impl<T> ElementField<T> {
    pub fn from_values(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, t: usize) -> &T {
        &self.values[t]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> ElementField<U> {
        ElementField { values: self.values.iter().map(f).collect() }
    }
}
