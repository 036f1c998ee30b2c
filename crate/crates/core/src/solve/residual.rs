//! Post-solve weak residuals.
//!
//! The residual is reassembled from the solution fields through the
//! constitutive law, not read off the cached linear system: internal
//! forces come from the per-element stress and field-intensity fields, and
//! external work from the load functionals. For a converged Galerkin solve
//! both residuals sit at the linear-solver tolerance times the load scale.

use super::assemble::{
    add_elastic_loads, elastic_dof_map, magnetic_dof_map, magnetic_load_global, CouplingLoad,
};
use super::{ProblemSpec, SolveReport};
use crate::algebra::PCovector;
use crate::constitutive::CouplingMode;
use crate::valued::CovectorValuedForm;
use crate::{Error, Result};

/// Weak residual norms of a solved state.
#[derive(Clone, Debug, Default)]
pub struct ResidualNorms {
    pub elastic_max: f64,
    pub elastic_l2: f64,
    /// Euclidean norm of the elastic load functional, for scaling.
    pub elastic_load: f64,
    pub magnetic_max: f64,
    pub magnetic_l2: f64,
    pub magnetic_load: f64,
}

/// Internal elastic forces from a stress field: entries
/// `sum_T vol (sigma_T .^ (e_i (x) dl_v))` on the free dofs.
fn internal_forces(
    spec: &ProblemSpec,
    stress: &crate::mesh::ElementField<CovectorValuedForm>,
    include_air: bool,
    dofs: &super::DofMap,
) -> Vec<f64> {
    let mesh = spec.mesh;
    let mut out = vec![0.0; dofs.n_free()];
    for t in 0..mesh.tet_count() {
        let in_body = spec.material.elastic_regions.contains(&mesh.region(t));
        if !in_body && !include_air {
            continue;
        }
        let grads = mesh.tet_grad(t);
        let verts = mesh.tet(t);
        let vol = mesh.tet_volume(t);
        let s = stress.value(t);
        for v in 0..4 {
            let dl = PCovector::new(1, &grads[v]).unwrap();
            for i in 0..3 {
                if let Some(k) = dofs.index[3 * verts[v] + i] {
                    out[k as usize] +=
                        vol * crate::algebra::wedge(&s.row(i), &dl).unwrap().components()[0];
                }
            }
        }
    }
    out
}

/// Assembles the weak equilibrium residual of a report: elastic
/// `int sigma_total .^ grad(dv) - F(dv)` over the free displacement test
/// functions, and magnetic `int h ∧ d(da) - F_m(da)` over the free edge
/// test functions.
pub fn equilibrium_residual(spec: &ProblemSpec, report: &SolveReport) -> Result<ResidualNorms> {
    let mesh = spec.mesh;
    let mut norms = ResidualNorms::default();

    if let Some(stress) = &report.stress {
        let (dofs, _) = elastic_dof_map(spec);
        // the energy-coupled model carries its magnetic stress inside the
        // total stress over the whole domain; the force-coupled one keeps
        // it as an explicit load
        let include_air = matches!(
            report.coupling,
            Some(CouplingMode::ModelB) | Some(CouplingMode::ModelBLinearized)
        );
        let internal = internal_forces(spec, stress, include_air, &dofs);
        let mut loads = vec![0.0; dofs.n_free()];
        let coupling_load = match report.coupling {
            Some(CouplingMode::ModelA) => match &report.magnetic_stress {
                Some(s) => CouplingLoad::MaxwellJump(s),
                None => CouplingLoad::None,
            },
            _ => CouplingLoad::None,
        };
        add_elastic_loads(spec, &dofs, coupling_load, &mut loads)?;

        let mut l2 = 0.0;
        let mut load2 = 0.0;
        for k in 0..dofs.n_free() {
            let r = internal[k] - loads[k];
            norms.elastic_max = norms.elastic_max.max(r.abs());
            l2 += r * r;
            load2 += loads[k] * loads[k];
        }
        norms.elastic_l2 = l2.sqrt();
        norms.elastic_load = load2.sqrt();
    }

    if let Some(intensity) = &report.field_intensity {
        let dofs = magnetic_dof_map(spec);
        let mut internal = vec![0.0; dofs.n_free()];
        for t in 0..mesh.tet_count() {
            let grads = mesh.tet_grad(t);
            let vol = mesh.tet_volume(t);
            let h = intensity.value(t);
            if h.degree() != 1 {
                return Err(Error::Spec("field intensity must be a 1-form field".into()));
            }
            for er in mesh.tet_edge_refs(t) {
                let Some(k) = dofs.index[er.edge] else { continue };
                let (a, b) = (er.local[0] as usize, er.local[1] as usize);
                let ga = PCovector::new(1, &grads[a]).unwrap();
                let gb = PCovector::new(1, &grads[b]).unwrap();
                // dW_e = 2 dl_a ∧ dl_b
                let dwe = crate::algebra::wedge(&ga, &gb)?.scaled(2.0);
                internal[k as usize] +=
                    vol * crate::algebra::wedge(h, &dwe)?.components()[0];
            }
        }
        let loads_global = magnetic_load_global(spec)?;
        let mut l2 = 0.0;
        let mut load2 = 0.0;
        for (e, &load) in loads_global.iter().enumerate() {
            if let Some(k) = dofs.index[e] {
                let r = internal[k as usize] - load;
                norms.magnetic_max = norms.magnetic_max.max(r.abs());
                l2 += r * r;
                load2 += load * load;
            }
        }
        norms.magnetic_l2 = l2.sqrt();
        norms.magnetic_load = load2.sqrt();
    }
    Ok(norms)
}
