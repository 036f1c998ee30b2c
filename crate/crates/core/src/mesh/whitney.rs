//! Lowest-order Whitney reconstruction, per-element displacement
//! gradients, and integration of piecewise-constant 3-forms.

use super::{ElementField, NodalVectorField, SimplicialMesh};
use crate::algebra::{PCovector, PAIRS};
use crate::mesh::Cochain;
use crate::valued::VectorValuedForm;
use crate::{par, Error, Result};

/// Barycentric coordinates of a point in a tet.
pub fn barycentric(mesh: &SimplicialMesh, t: usize, x: [f64; 3]) -> [f64; 4] {
    let grads = mesh.tet_grad(t);
    let p0 = mesh.vertex(mesh.tet(t)[0]);
    let d = [x[0] - p0[0], x[1] - p0[1], x[2] - p0[2]];
    let mut lam = [0.0; 4];
    for i in 1..4 {
        lam[i] = grads[i][0] * d[0] + grads[i][1] * d[1] + grads[i][2] * d[2];
    }
    lam[0] = 1.0 - lam[1] - lam[2] - lam[3];
    lam
}

fn wedge1(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    let mut c = [0.0; 3];
    for (idx, &(j, k)) in PAIRS.iter().enumerate() {
        c[idx] = a[j] * b[k] - a[k] * b[j];
    }
    c
}

/// Whitney reconstruction of a degree-p cochain at a barycentric point of
/// a tet. Gradient cochains reconstruct to constant 1-forms, and the
/// reconstruction commutes with the exterior derivative.
pub fn whitney_value(
    mesh: &SimplicialMesh,
    c: &Cochain,
    t: usize,
    bary: [f64; 4],
) -> Result<PCovector> {
    let tol = 1e-10;
    if bary.iter().any(|&l| l < -tol) || (bary.iter().sum::<f64>() - 1.0).abs() > tol {
        return Err(Error::PointOutsideElement);
    }
    let grads = mesh.tet_grad(t);
    let verts = mesh.tet(t);
    match c.degree() {
        0 => {
            let v: f64 = (0..4).map(|i| bary[i] * c.values()[verts[i]]).sum();
            Ok(PCovector::new(0, &[v]).unwrap())
        }
        1 => {
            let mut out = [0.0; 3];
            for er in mesh.tet_edge_refs(t) {
                let (la, lb) = (er.local[0] as usize, er.local[1] as usize);
                let w = c.values()[er.edge];
                for k in 0..3 {
                    out[k] += w * (bary[la] * grads[lb][k] - bary[lb] * grads[la][k]);
                }
            }
            Ok(PCovector::new(1, &out).unwrap())
        }
        2 => {
            let mut out = [0.0; 3];
            for fr in mesh.tet_face_refs(t) {
                let (la, lb, lc) =
                    (fr.local[0] as usize, fr.local[1] as usize, fr.local[2] as usize);
                let w = 2.0 * c.values()[fr.face];
                let gbc = wedge1(&grads[lb], &grads[lc]);
                let gac = wedge1(&grads[la], &grads[lc]);
                let gab = wedge1(&grads[la], &grads[lb]);
                for k in 0..3 {
                    out[k] += w * (bary[la] * gbc[k] - bary[lb] * gac[k] + bary[lc] * gab[k]);
                }
            }
            Ok(PCovector::new(2, &out).unwrap())
        }
        3 => {
            let v = c.values()[t] / mesh.tet_volume(t);
            Ok(PCovector::new(3, &[v]).unwrap())
        }
        d => Err(Error::InvalidDegree { degree: d, context: "whitney_value" }),
    }
}

/// Per-element displacement gradient of a nodal P1 vector field under the
/// flat connection: the componentwise Jacobian of the barycentric
/// interpolant, exact for affine fields.
pub fn displacement_gradient(
    mesh: &SimplicialMesh,
    nu: &NodalVectorField,
) -> ElementField<VectorValuedForm> {
    let values = par::map_indexed(mesh.tet_count(), |t| {
        let grads = mesh.tet_grad(t);
        let verts = mesh.tet(t);
        let mut m = [[0.0; 3]; 3];
        for l in 0..4 {
            let v = nu.values()[verts[l]];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += v[i] * grads[l][j];
                }
            }
        }
        VectorValuedForm::from_component_matrix(m)
    });
    ElementField::from_values(values)
}

/// Integral of a piecewise-constant 3-form field: component times tet
/// volume, exact for the lowest-order discretization.
pub fn integrate(mesh: &SimplicialMesh, field: &ElementField<PCovector>) -> f64 {
    integrate_region(mesh, field, |_| true)
}

/// Same as [`integrate`] restricted to tets whose region tag passes the
/// predicate.
pub fn integrate_region(
    mesh: &SimplicialMesh,
    field: &ElementField<PCovector>,
    pred: impl Fn(i32) -> bool + Sync + Send,
) -> f64 {
    debug_assert_eq!(field.len(), mesh.tet_count());
    par::sum_indexed(mesh.tet_count(), |t| {
        if pred(mesh.region(t)) {
            debug_assert_eq!(field.value(t).degree(), 3);
            field.value(t).components()[0] * mesh.tet_volume(t)
        } else {
            0.0
        }
    })
}
