//! Traces of forms to boundary faces.
//!
//! A face frame is the ordered pair of edge vectors from the
//! lowest-id vertex of the (canonically sorted) face. Real-valued form
//! parts are pulled back into that frame; covector values keep all three
//! components, since they live in the restriction of the ambient cotangent
//! space to the face.
//!
//! Face forms reuse [`PCovector`] and the valued types with the degree
//! reinterpreted in the 2-D tangent plane: a face p-form carries C(2, p)
//! meaningful components (1, 2, 1 for p = 0, 1, 2).

use super::SimplicialMesh;
use crate::algebra::{cross3, dot3, PCovector};
use crate::valued::{CovectorValuedForm, VectorValuedForm};
use crate::{Error, Result};

/// Tangent frame of a triangular face.
#[derive(Clone, Copy, Debug)]
pub struct FaceFrame {
    pub origin: [f64; 3],
    /// Edge vectors to the second and third vertex, in ascending-id order.
    pub u: [[f64; 3]; 2],
}

impl FaceFrame {
    pub fn of_face(mesh: &SimplicialMesh, f: usize) -> Self {
        let [a, b, c] = mesh.face(f);
        let (pa, pb, pc) = (mesh.vertex(a), mesh.vertex(b), mesh.vertex(c));
        Self {
            origin: pa,
            u: [
                [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]],
                [pc[0] - pa[0], pc[1] - pa[1], pc[2] - pa[2]],
            ],
        }
    }

    /// Euclidean area of the triangle.
    pub fn area(&self) -> f64 {
        let n = cross3(&self.u[0], &self.u[1]);
        0.5 * dot3(&n, &n).sqrt()
    }

    /// Face normal scaled by twice the area (frame orientation).
    pub fn normal(&self) -> [f64; 3] {
        cross3(&self.u[0], &self.u[1])
    }
}

/// Sign relating the frame orientation of a boundary face to the outward
/// orientation of the domain: +1 when `u1 x u2` points out of the mesh.
pub fn boundary_face_outward_sign(mesh: &SimplicialMesh, f: usize) -> Result<f64> {
    if !mesh.is_boundary_face(f) {
        return Err(Error::FaceNotOnSurface);
    }
    let (t, _) = mesh.face_tets(f);
    let frame = FaceFrame::of_face(mesh, f);
    let n = frame.normal();
    let c_in = mesh.tet_centroid(t);
    let c_f = mesh.face_centroid(f);
    let d = [c_f[0] - c_in[0], c_f[1] - c_in[1], c_f[2] - c_in[2]];
    Ok(if dot3(&n, &d) >= 0.0 { 1.0 } else { -1.0 })
}

/// Pull-back of a real p-form to the face frame, p < 3.
pub fn trace_form(frame: &FaceFrame, form: &PCovector) -> Result<PCovector> {
    match form.degree() {
        0 => Ok(*form),
        1 => {
            let c = [form.evaluate(&[frame.u[0]]), form.evaluate(&[frame.u[1]]), 0.0];
            Ok(PCovector::from_raw(1, c))
        }
        2 => {
            let c = form.evaluate(&[frame.u[0], frame.u[1]]);
            Ok(PCovector::from_raw(2, [c, 0.0, 0.0]))
        }
        d => Err(Error::InvalidDegree { degree: d, context: "trace of a volume form on a face" }),
    }
}

/// Trace of a covector-valued p-form: pull back the form part, keep the
/// covector values whole.
pub fn trace_covector_valued(
    frame: &FaceFrame,
    omega: &CovectorValuedForm,
) -> Result<CovectorValuedForm> {
    let mut out = CovectorValuedForm::zero(omega.degree());
    for i in 0..3 {
        out.set_row(i, &trace_form(frame, &omega.row(i))?);
    }
    Ok(out)
}

/// Trace of a vector-valued p-form, same recipe on the value rows.
pub fn trace_vector_valued(
    frame: &FaceFrame,
    eta: &VectorValuedForm,
) -> Result<VectorValuedForm> {
    let mut out = VectorValuedForm::zero(eta.degree());
    for i in 0..3 {
        out.set_row(i, &trace_form(frame, &eta.row(i))?);
    }
    Ok(out)
}

/// Wedge of face forms (2-D shuffle tables).
pub fn face_wedge(a: &PCovector, b: &PCovector) -> Result<PCovector> {
    let (p, q) = (a.degree(), b.degree());
    if p + q > 2 {
        return Err(Error::DegreeOverflow(p, q));
    }
    let (ac, bc) = (a.comps_raw(), b.comps_raw());
    let out = match (p, q) {
        (0, _) => b.scaled(ac[0]),
        (_, 0) => a.scaled(bc[0]),
        (1, 1) => PCovector::from_raw(2, [ac[0] * bc[1] - ac[1] * bc[0], 0.0, 0.0]),
        _ => unreachable!(),
    };
    Ok(out)
}

/// Dot-wedge of face-valued forms: row-wise [`face_wedge`].
pub fn face_dot_wedge(
    omega: &CovectorValuedForm,
    eta: &VectorValuedForm,
) -> Result<PCovector> {
    let (p, q) = (omega.degree(), eta.degree());
    if p + q > 2 {
        return Err(Error::DegreeOverflow(p, q));
    }
    let mut out = PCovector::zero(p + q);
    for i in 0..3 {
        out = out.add(&face_wedge(&omega.row(i), &eta.row(i))?)?;
    }
    Ok(out)
}

/// Trace of a piecewise-constant form field onto a boundary face, taken
/// from its single incident element. Interior faces are not on the
/// boundary surface.
pub fn trace_boundary(
    mesh: &SimplicialMesh,
    field: &crate::mesh::ElementField<PCovector>,
    face: usize,
) -> Result<PCovector> {
    if !mesh.is_boundary_face(face) {
        return Err(Error::FaceNotOnSurface);
    }
    let (t, _) = mesh.face_tets(face);
    trace_form(&FaceFrame::of_face(mesh, face), field.value(t))
}

/// Covector-valued variant of [`trace_boundary`]: the form part is pulled
/// back, the covector values stay in the ambient cotangent space.
pub fn trace_boundary_covector_valued(
    mesh: &SimplicialMesh,
    field: &crate::mesh::ElementField<CovectorValuedForm>,
    face: usize,
) -> Result<CovectorValuedForm> {
    if !mesh.is_boundary_face(face) {
        return Err(Error::FaceNotOnSurface);
    }
    let (t, _) = mesh.face_tets(face);
    trace_covector_valued(&FaceFrame::of_face(mesh, face), field.value(t))
}
