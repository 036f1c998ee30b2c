//! Weak-form assembly of the elastic and magnetic systems.
//!
//! Elastic stiffness entries are evaluated through the constitutive law and
//! the dot-wedge pairing: `K[(v,i)][(w,c)] = vol * (sigma(e_c (x) dl_w) .^
//! (e_i (x) dl_v))`. The magnetic system is the curl-curl form on edge
//! unknowns, `K = D^T M_r D`, assembled per tet from the face mass of
//! Whitney 2-forms with one-point quadrature (exact, since discrete
//! inductions are elementwise constant).

use super::{DisplacementBc, DofMap, LinearSystem, PotentialBc, ProblemSpec};
use crate::algebra::{dot3, PCovector};
use crate::constitutive::{deformed_metric, elastic_stress, maxwell_stress};
use crate::mesh::{ElementField, FaceFrame, NodalVectorField, SimplicialMesh};
use crate::solve::CsrMatrix;
use crate::valued::{CovectorValuedForm, VectorValuedForm};
use crate::{par, Error, Result};
use std::collections::BTreeMap;

/// Magnetic contribution to the elastic right-hand side.
pub enum CouplingLoad<'a> {
    None,
    /// Prescribed magnetic stress: integrated by parts over the material
    /// body, with the outside trace on its boundary.
    MaxwellJump(&'a ElementField<CovectorValuedForm>),
    /// Energy-derived magnetic stress: volume term over every element.
    EnergyVolume(&'a ElementField<CovectorValuedForm>),
}

fn local_edge_slot(p: u8, q: u8) -> usize {
    // pairs of local vertices (0..4) enumerated (01,02,03,12,13,23)
    const SLOT: [[usize; 4]; 4] = [
        [usize::MAX, 0, 1, 2],
        [0, usize::MAX, 3, 4],
        [1, 3, usize::MAX, 5],
        [2, 4, 5, usize::MAX],
    ];
    SLOT[p as usize][q as usize]
}

fn grad_form(grads: &[[f64; 3]; 4], v: usize) -> PCovector {
    PCovector::new(1, &grads[v]).unwrap()
}

/// Vertices incident to at least one material-body tet.
fn body_vertices(spec: &ProblemSpec) -> Vec<bool> {
    let mesh = spec.mesh;
    let mut in_body = vec![false; mesh.vertex_count()];
    for t in 0..mesh.tet_count() {
        if spec.material.elastic_regions.contains(&mesh.region(t)) {
            for v in mesh.tet(t) {
                in_body[v] = true;
            }
        }
    }
    in_body
}

/// The elastic dof partition: components prescribed on tagged boundary
/// faces are fixed, as is every dof of vertices outside the material body.
/// Also reports whether any essential data constrains the body.
pub(crate) fn elastic_dof_map(spec: &ProblemSpec) -> (DofMap, bool) {
    let (fixed, essential) = elastic_fixed_dofs(spec);
    (DofMap::new(3 * spec.mesh.vertex_count(), &fixed), essential)
}

fn elastic_fixed_dofs(spec: &ProblemSpec) -> (BTreeMap<usize, f64>, bool) {
    let mesh = spec.mesh;
    let in_body = body_vertices(spec);
    let mut fixed = BTreeMap::new();
    for (v, &inside) in in_body.iter().enumerate() {
        if !inside {
            for c in 0..3 {
                fixed.insert(3 * v + c, 0.0);
            }
        }
    }
    let mut essential = false;
    for f in mesh.boundary_faces() {
        let tag = mesh.boundary_tag(f);
        let Some(bc) = spec.displacement_bc.get(&tag) else { continue };
        for v in mesh.face(f) {
            match bc {
                DisplacementBc::Components(comps) => {
                    for (c, val) in comps.iter().enumerate() {
                        if let Some(val) = val {
                            fixed.insert(3 * v + c, *val);
                            essential |= in_body[v];
                        }
                    }
                }
                DisplacementBc::Field(field) => {
                    let val = field(mesh.vertex(v));
                    for c in 0..3 {
                        fixed.insert(3 * v + c, val[c]);
                    }
                    essential |= in_body[v];
                }
            }
        }
    }
    (fixed, essential)
}

/// Checks that a load on an unconstrained body does no work on the six
/// rigid modes.
fn check_rigid_compatibility(
    spec: &ProblemSpec,
    dofs: &DofMap,
    rhs: &[f64],
) -> Result<()> {
    let mesh = spec.mesh;
    let f_norm = dot_slice(rhs, rhs).sqrt();
    if f_norm == 0.0 {
        return Ok(());
    }
    // centroid of the free vertices
    let mut center = [0.0; 3];
    let mut count = 0.0f64;
    for &g in &dofs.free {
        if g % 3 == 0 {
            let x = mesh.vertex(g / 3);
            for k in 0..3 {
                center[k] += x[k];
            }
            count += 1.0;
        }
    }
    for k in 0..3 {
        center[k] /= count.max(1.0);
    }
    let mut worst = 0.0f64;
    for mode in 0..6 {
        let mut r = vec![0.0; dofs.n_free()];
        for (k, &g) in dofs.free.iter().enumerate() {
            let (v, c) = (g / 3, g % 3);
            let x = mesh.vertex(v);
            let d = [x[0] - center[0], x[1] - center[1], x[2] - center[2]];
            r[k] = match mode {
                0..=2 => {
                    if c == mode {
                        1.0
                    } else {
                        0.0
                    }
                }
                _ => {
                    // infinitesimal rotation about axis (mode - 3)
                    let mut omega = [0.0; 3];
                    omega[mode - 3] = 1.0;
                    crate::algebra::cross3(&omega, &d)[c]
                }
            };
        }
        let r_norm = dot_slice(&r, &r).sqrt();
        if r_norm > 0.0 {
            worst = worst.max(dot_slice(&r, rhs).abs() / (r_norm * f_norm));
        }
    }
    if worst > spec.settings.compat_tol {
        return Err(Error::IllPosedLoad(worst));
    }
    Ok(())
}

fn dot_slice(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The Maxwell stress mapping evaluated on every element from a
/// piecewise-constant induction field.
pub(crate) fn maxwell_stress_field(
    spec: &ProblemSpec,
    strain: Option<&ElementField<VectorValuedForm>>,
    b_field: &ElementField<PCovector>,
) -> Result<ElementField<CovectorValuedForm>> {
    let mesh = spec.mesh;
    let metric = spec.material.metric;
    let mut values = Vec::with_capacity(mesh.tet_count());
    for t in 0..mesh.tet_count() {
        let r = spec.material.reluctivity_of(mesh.region(t))?;
        let eps = strain.map(|s| *s.value(t)).unwrap_or_else(|| VectorValuedForm::zero(1));
        values.push(maxwell_stress(r, &metric, &eps, b_field.value(t))?);
    }
    Ok(ElementField::from_values(values))
}

/// Faces on the boundary of the material body, with the inside tet and the
/// outside tet when one exists.
fn body_boundary_faces(spec: &ProblemSpec) -> Vec<(usize, usize, Option<usize>)> {
    let mesh = spec.mesh;
    let is_body =
        |t: usize| spec.material.elastic_regions.contains(&mesh.region(t));
    let mut out = Vec::new();
    for f in 0..mesh.face_count() {
        let (t0, t1) = mesh.face_tets(f);
        match t1 {
            Some(t1) => match (is_body(t0), is_body(t1)) {
                (true, false) => out.push((f, t0, Some(t1))),
                (false, true) => out.push((f, t1, Some(t0))),
                _ => {}
            },
            None => {
                if is_body(t0) {
                    out.push((f, t0, None));
                }
            }
        }
    }
    out
}

/// Assembles the elastic system. When an induction field is given, the
/// Maxwell stress mapping is evaluated per element and its force enters
/// the right-hand side in integrated-by-parts form.
pub fn assemble_elastic(
    spec: &ProblemSpec,
    b_field: Option<&ElementField<PCovector>>,
) -> Result<LinearSystem> {
    match b_field {
        None => assemble_elastic_with(spec, CouplingLoad::None),
        Some(b) => {
            let s = maxwell_stress_field(spec, None, b)?;
            assemble_elastic_with(spec, CouplingLoad::MaxwellJump(&s))
        }
    }
}

/// Elastic assembly with an explicit magnetic coupling load.
pub fn assemble_elastic_with(
    spec: &ProblemSpec,
    coupling: CouplingLoad,
) -> Result<LinearSystem> {
    spec.validate()?;
    let mesh = spec.mesh;
    let metric = spec.material.metric;
    let (dofs, has_essential) = elastic_dof_map(spec);
    if dofs.n_free() == 0 {
        return Err(Error::Spec("elastic problem has no free degrees of freedom".into()));
    }

    // materials are small copies; resolve them once per region
    let materials = spec.material.elastic.clone();
    let regions = spec.material.elastic_regions.clone();

    let (triplets, corrections) = par::collect_entries(mesh.tet_count(), |t, trip, corr| {
        let region = mesh.region(t);
        if !regions.contains(&region) {
            return;
        }
        let Some(mat) = materials.get(&region) else { return };
        let grads = mesh.tet_grad(t);
        let verts = mesh.tet(t);
        let vol = mesh.tet_volume(t);
        for w in 0..4 {
            for c in 0..3 {
                let mut basis = VectorValuedForm::zero(1);
                basis.set_row(c, &grad_form(grads, w));
                let sigma = elastic_stress(mat, &metric, &basis).expect("valid material");
                let col = 3 * verts[w] + c;
                for v in 0..4 {
                    for i in 0..3 {
                        let row = 3 * verts[v] + i;
                        let Some(r_free) = dofs.index[row] else { continue };
                        let val = vol
                            * crate::algebra::wedge(&sigma.row(i), &grad_form(grads, v))
                                .expect("degree 2+1")
                                .components()[0];
                        match dofs.index[col] {
                            Some(c_free) => trip.push((r_free, c_free, val)),
                            None => {
                                let fv = dofs.fixed_values[col];
                                if fv != 0.0 {
                                    corr.push((r_free, -val * fv));
                                }
                            }
                        }
                    }
                }
            }
        }
    });

    let matrix = CsrMatrix::from_triplets(dofs.n_free(), triplets);
    let mut rhs = vec![0.0; dofs.n_free()];
    for (r, v) in corrections {
        rhs[r as usize] += v;
    }
    add_elastic_loads(spec, &dofs, coupling, &mut rhs)?;

    if !has_essential {
        check_rigid_compatibility(spec, &dofs, &rhs)?;
    }
    Ok(LinearSystem { matrix, rhs, dofs })
}

/// Adds body force, traction, and magnetic coupling terms to the reduced
/// right-hand side.
pub(crate) fn add_elastic_loads(
    spec: &ProblemSpec,
    dofs: &DofMap,
    coupling: CouplingLoad,
    rhs: &mut Vec<f64>,
) -> Result<()> {
    let mesh = spec.mesh;

    // body force: one-point quadrature, P1 hat integral vol/4
    for t in 0..mesh.tet_count() {
        let Some(density) = spec.body_force.get(&mesh.region(t)) else { continue };
        let f = density.at(mesh.tet_centroid(t));
        let w = mesh.tet_volume(t) * 0.25;
        for v in mesh.tet(t) {
            for c in 0..3 {
                if let Some(k) = dofs.index[3 * v + c] {
                    rhs[k as usize] += w * f[c];
                }
            }
        }
    }

    // traction: per tagged boundary face, area/3 per vertex
    for f in mesh.boundary_faces() {
        let Some(tr) = spec.traction.get(&mesh.boundary_tag(f)) else { continue };
        let frame = FaceFrame::of_face(mesh, f);
        let w = frame.area() / 3.0;
        for v in mesh.face(f) {
            for c in 0..3 {
                if let Some(k) = dofs.index[3 * v + c] {
                    rhs[k as usize] += w * tr[c];
                }
            }
        }
    }

    match coupling {
        CouplingLoad::None => {}
        CouplingLoad::MaxwellJump(s_field) => {
            // -int_M S .^ grad(dv) over the body
            for t in 0..mesh.tet_count() {
                if !spec.material.elastic_regions.contains(&mesh.region(t)) {
                    continue;
                }
                volume_stress_term(mesh, t, s_field.value(t), dofs, rhs);
            }
            // + int_{dM} t(S_outside) .^ t(dv), outside trace from the
            // adjacent exterior element (zero past the domain boundary)
            for (f, t_in, t_out) in body_boundary_faces(spec) {
                let Some(t_out) = t_out else { continue };
                let s_out = s_field.value(t_out);
                face_stress_term(mesh, f, t_in, s_out, 1.0, dofs, rhs);
            }
        }
        CouplingLoad::EnergyVolume(s_field) => {
            // -int_Omega sigma_mag .^ grad(dv) over every element
            for t in 0..mesh.tet_count() {
                volume_stress_term(mesh, t, s_field.value(t), dofs, rhs);
            }
        }
    }
    Ok(())
}

/// Accumulates `-vol * (S .^ (e_i (x) dl_v))` for the four vertices of a
/// tet.
fn volume_stress_term(
    mesh: &SimplicialMesh,
    t: usize,
    s: &CovectorValuedForm,
    dofs: &DofMap,
    rhs: &mut [f64],
) {
    let grads = mesh.tet_grad(t);
    let verts = mesh.tet(t);
    let vol = mesh.tet_volume(t);
    for v in 0..4 {
        let dl = grad_form(grads, v);
        for i in 0..3 {
            if let Some(k) = dofs.index[3 * verts[v] + i] {
                let val = crate::algebra::wedge(&s.row(i), &dl).unwrap().components()[0];
                rhs[k as usize] -= vol * val;
            }
        }
    }
}

/// Accumulates `sign * int_F t(S) .^ t(dv)` over a face, oriented outward
/// from the inside tet.
fn face_stress_term(
    mesh: &SimplicialMesh,
    f: usize,
    t_in: usize,
    s: &CovectorValuedForm,
    sign: f64,
    dofs: &DofMap,
    rhs: &mut [f64],
) {
    let frame = FaceFrame::of_face(mesh, f);
    let n = frame.normal();
    let c_in = mesh.tet_centroid(t_in);
    let c_f = mesh.face_centroid(f);
    let outward =
        if dot3(&n, &[c_f[0] - c_in[0], c_f[1] - c_in[1], c_f[2] - c_in[2]]) >= 0.0 {
            1.0
        } else {
            -1.0
        };
    // int_F lambda_v * (2-form) = value on the frame pair / 6
    for v in mesh.face(f) {
        for i in 0..3 {
            if let Some(k) = dofs.index[3 * v + i] {
                let val = s.row(i).evaluate(&[frame.u[0], frame.u[1]]);
                rhs[k as usize] += sign * outward * val / 6.0;
            }
        }
    }
}

/// Edge integral of the prescribed potential.
fn potential_edge_value(bc: &PotentialBc, a: [f64; 3], b: [f64; 3]) -> f64 {
    match bc {
        PotentialBc::Zero => 0.0,
        PotentialBc::UniformB(b2) => {
            let xm = 0.5 * (a[0] + b[0]);
            let ym = 0.5 * (a[1] + b[1]);
            b2[0] * xm * (b[1] - a[1]) + b2[1] * xm * (b[2] - a[2]) + b2[2] * ym * (b[2] - a[2])
        }
        PotentialBc::OneForm(field) => {
            // two-point Gauss along the edge
            let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let mut total = 0.0;
            for xi in [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()] {
                let x = [a[0] + xi * d[0], a[1] + xi * d[1], a[2] + xi * d[2]];
                let one_form = field(x);
                total += 0.5 * dot3(&one_form, &d);
            }
            total
        }
    }
}

/// Assembles the magnetostatic curl-curl system on edge unknowns. When a
/// strain field is given, the per-element mass uses the Hodge star of the
/// deformed metric.
pub fn assemble_magnetic(
    spec: &ProblemSpec,
    strain: Option<&ElementField<VectorValuedForm>>,
) -> Result<LinearSystem> {
    spec.validate()?;
    let mesh = spec.mesh;
    let base_metric = spec.material.metric;
    let quad = spec.material.quadratic_metric_term;
    let dofs = magnetic_dof_map(spec);

    // reluctivities must exist on every region
    let mut reluctivity = BTreeMap::new();
    for t in 0..mesh.tet_count() {
        let region = mesh.region(t);
        if !reluctivity.contains_key(&region) {
            reluctivity.insert(region, spec.material.reluctivity_of(region)?);
        }
    }

    let (triplets, corrections) = par::collect_entries(mesh.tet_count(), |t, trip, corr| {
        let r = reluctivity[&mesh.region(t)];
        let metric = match strain {
            Some(field) => deformed_metric(&base_metric, field.value(t), quad)
                .expect("strain within the admissible range"),
            None => base_metric,
        };
        let grads = mesh.tet_grad(t);
        let vol = mesh.tet_volume(t);
        let frefs = mesh.tet_face_refs(t);

        // Whitney 2-forms of the four faces at the centroid
        let mut wf = [PCovector::zero(2); 4];
        for (k, fr) in frefs.iter().enumerate() {
            let (a, b, c) = (fr.local[0] as usize, fr.local[1] as usize, fr.local[2] as usize);
            let gbc = crate::algebra::wedge(&grad_form(grads, b), &grad_form(grads, c)).unwrap();
            let gac = crate::algebra::wedge(&grad_form(grads, a), &grad_form(grads, c)).unwrap();
            let gab = crate::algebra::wedge(&grad_form(grads, a), &grad_form(grads, b)).unwrap();
            wf[k] = gbc.sub(&gac).unwrap().add(&gab).unwrap().scaled(0.5);
        }
        // face mass with one-point quadrature
        let mut mass = [[0.0; 4]; 4];
        let weight = r * metric.sqrt_det() * vol;
        for i in 0..4 {
            for j in i..4 {
                let v = weight * crate::algebra::inner_product(&metric, &wf[i], &wf[j]).unwrap();
                mass[i][j] = v;
                mass[j][i] = v;
            }
        }
        // local face-edge incidence: rows follow the canonical edge order
        // (bc, ac, ab) with signs (+, -, +)
        let mut d = [[0.0f64; 6]; 4];
        for (k, fr) in frefs.iter().enumerate() {
            let (a, b, c) = (fr.local[0], fr.local[1], fr.local[2]);
            d[k][local_edge_slot(b, c)] += 1.0;
            d[k][local_edge_slot(a, c)] -= 1.0;
            d[k][local_edge_slot(a, b)] += 1.0;
        }
        let erefs = mesh.tet_edge_refs(t);
        for e in 0..6 {
            let row = erefs[e].edge;
            let Some(r_free) = dofs.index[row] else { continue };
            for e2 in 0..6 {
                let col = erefs[e2].edge;
                let mut val = 0.0;
                for i in 0..4 {
                    if d[i][e] == 0.0 {
                        continue;
                    }
                    for j in 0..4 {
                        val += d[i][e] * mass[i][j] * d[j][e2];
                    }
                }
                match dofs.index[col] {
                    Some(c_free) => trip.push((r_free, c_free, val)),
                    None => {
                        let fv = dofs.fixed_values[col];
                        if fv != 0.0 {
                            corr.push((r_free, -val * fv));
                        }
                    }
                }
            }
        }
    });

    let matrix = CsrMatrix::from_triplets(dofs.n_free(), triplets);
    let mut rhs = vec![0.0; dofs.n_free()];
    for (r, v) in corrections {
        rhs[r as usize] += v;
    }

    let rhs_global = magnetic_load_global(spec)?;
    for (e, &v) in rhs_global.iter().enumerate() {
        if let Some(k) = dofs.index[e] {
            rhs[k as usize] += v;
        }
    }

    // fully natural problem: sources must be orthogonal to gradients
    if spec.potential_bc.is_empty() {
        let grad_part = mesh.d0_transpose_apply(&rhs_global);
        let mut abs_scale = vec![0.0; mesh.vertex_count()];
        for (e, v) in rhs_global.iter().enumerate() {
            let [a, b] = mesh.edge(e);
            abs_scale[a] += v.abs();
            abs_scale[b] += v.abs();
        }
        let num = dot_slice(&grad_part, &grad_part).sqrt();
        let den = dot_slice(&abs_scale, &abs_scale).sqrt();
        if den > 0.0 {
            let rel = num / den;
            if rel > spec.settings.compat_tol {
                return Err(Error::NonSolenoidalCurrent(rel));
            }
        }
    }

    Ok(LinearSystem { matrix, rhs, dofs })
}

/// The magnetic dof partition: edges of tagged boundary faces are fixed to
/// the edge integrals of the prescribed potential.
pub(crate) fn magnetic_dof_map(spec: &ProblemSpec) -> DofMap {
    let mesh = spec.mesh;
    let mut fixed = BTreeMap::new();
    for f in mesh.boundary_faces() {
        let Some(bc) = spec.potential_bc.get(&mesh.boundary_tag(f)) else { continue };
        for e in mesh.face_edge_ids(f) {
            let [a, b] = mesh.edge(e);
            fixed.insert(e, potential_edge_value(bc, mesh.vertex(a), mesh.vertex(b)));
        }
    }
    DofMap::new(mesh.edge_count(), &fixed)
}

/// The magnetic drive-force functional on every edge: current-density and
/// surface-field work terms.
pub(crate) fn magnetic_load_global(spec: &ProblemSpec) -> Result<Vec<f64>> {
    let mesh = spec.mesh;
    let mut rhs_global = vec![0.0; mesh.edge_count()];

    // current: int j ∧ W_e with one-point quadrature
    for t in 0..mesh.tet_count() {
        let Some(density) = spec.current.get(&mesh.region(t)) else { continue };
        let jv = density.at(mesh.tet_centroid(t));
        // 2-form i_J (dx∧dy∧dz)
        let j2 = PCovector::new(2, &[jv[2], -jv[1], jv[0]]).unwrap();
        let grads = mesh.tet_grad(t);
        let vol = mesh.tet_volume(t);
        for er in mesh.tet_edge_refs(t) {
            let (a, b) = (er.local[0] as usize, er.local[1] as usize);
            let we = grad_form(grads, b).sub(&grad_form(grads, a)).unwrap().scaled(0.25);
            let val = vol * crate::algebra::wedge(&j2, &we).unwrap().components()[0];
            rhs_global[er.edge] += val;
        }
    }

    // surface field intensity: int_dOmega t(h_s) ∧ t(W_e)
    for f in mesh.boundary_faces() {
        let Some(h) = spec.surface_h.get(&mesh.boundary_tag(f)) else { continue };
        let frame = FaceFrame::of_face(mesh, f);
        let outward = crate::mesh::boundary_face_outward_sign(mesh, f)?;
        let (t, _) = mesh.face_tets(f);
        let bary = crate::mesh::barycentric(mesh, t, mesh.face_centroid(f));
        let grads = mesh.tet_grad(t);
        let th = [dot3(h, &frame.u[0]), dot3(h, &frame.u[1])];
        for e in mesh.face_edge_ids(f) {
            // locate the edge inside the adjacent tet
            let er = mesh
                .tet_edge_refs(t)
                .iter()
                .find(|er| er.edge == e)
                .expect("face edge belongs to the adjacent tet");
            let (a, b) = (er.local[0] as usize, er.local[1] as usize);
            let mut w = [0.0; 3];
            for k in 0..3 {
                w[k] = bary[a] * grads[b][k] - bary[b] * grads[a][k];
            }
            let tw = [dot3(&w, &frame.u[0]), dot3(&w, &frame.u[1])];
            let val = 0.5 * outward * (th[0] * tw[1] - th[1] * tw[0]);
            rhs_global[e] += val;
        }
    }
    Ok(rhs_global)
}

/// Scalar Laplace system on the passive (non-body) region, used to extend
/// displacement there: Dirichlet data from the body boundary and zero on
/// the domain boundary.
pub struct ExtensionSystem {
    pub matrix: CsrMatrix,
    /// One right-hand side per displacement component.
    pub rhs: [Vec<f64>; 3],
    /// Vertex ids of the free (interior passive) unknowns.
    pub free: Vec<usize>,
}

/// Assembles the displacement extension over the passive region. Returns
/// `None` when every vertex is already determined.
pub fn assemble_laplace_extension(
    spec: &ProblemSpec,
    body_values: &NodalVectorField,
) -> Result<Option<ExtensionSystem>> {
    let mesh = spec.mesh;
    let in_body = body_vertices(spec);
    let mut on_outer = vec![false; mesh.vertex_count()];
    for f in mesh.boundary_faces() {
        for v in mesh.face(f) {
            on_outer[v] = true;
        }
    }
    let mut index = vec![None; mesh.vertex_count()];
    let mut free = Vec::new();
    for v in 0..mesh.vertex_count() {
        if !in_body[v] && !on_outer[v] {
            index[v] = Some(free.len());
            free.push(v);
        }
    }
    if free.is_empty() {
        return Ok(None);
    }
    let dirichlet = |v: usize| -> [f64; 3] {
        if in_body[v] {
            body_values.values()[v]
        } else {
            [0.0; 3]
        }
    };
    let weight = |c: [f64; 3]| -> f64 {
        match spec.settings.extension {
            super::ExtensionOperator::Laplace => 1.0,
            super::ExtensionOperator::WeightedLaplace => {
                1.0 + c[0].abs() + c[1].abs() + c[2].abs()
            }
        }
    };

    let mut triplets = Vec::new();
    let mut rhs = [
        vec![0.0; free.len()],
        vec![0.0; free.len()],
        vec![0.0; free.len()],
    ];
    for t in 0..mesh.tet_count() {
        if spec.material.elastic_regions.contains(&mesh.region(t)) {
            continue;
        }
        let grads = mesh.tet_grad(t);
        let verts = mesh.tet(t);
        let k = weight(mesh.tet_centroid(t)) * mesh.tet_volume(t);
        for a in 0..4 {
            let Some(ra) = index[verts[a]] else { continue };
            for b in 0..4 {
                let val = k * dot3(&grads[a], &grads[b]);
                match index[verts[b]] {
                    Some(cb) => triplets.push((ra as u32, cb as u32, val)),
                    None => {
                        let d = dirichlet(verts[b]);
                        for c in 0..3 {
                            rhs[c][ra] -= val * d[c];
                        }
                    }
                }
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(free.len(), triplets);
    Ok(Some(ExtensionSystem { matrix, rhs, free }))
}
