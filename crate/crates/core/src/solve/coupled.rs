//! Solution drivers: single-physics solves and the two staggered coupled
//! loops.
//!
//! Coupling is resolved by damped Picard iteration rather than a
//! monolithic Newton scheme: each pass solves the magnetic system at the
//! current strain, evaluates the magnetic stresses, then solves the
//! elastic system, keeping every subsystem symmetric. Damping applies to
//! the displacement update and halves when the tracked potential energy
//! rises.

use super::assemble::{
    assemble_elastic_with, assemble_laplace_extension, assemble_magnetic,
    maxwell_stress_field, CouplingLoad,
};
use super::{cg_solve, LinearSolveStats, LinearSystem, ProblemSpec, SolveReport};
use crate::algebra::PCovector;
use crate::constitutive::{
    fd_magnetic_stress, linearized_magnetic_stress, CouplingMode, DecompositionConvention,
};
use crate::mesh::{
    displacement_gradient, exterior_derivative, integrate, whitney_value, Cochain, ElementField,
    NodalVectorField,
};
use crate::valued::{CovectorValuedForm, VectorValuedForm};
use crate::{Error, Result};

/// One pass of a coupled loop.
#[derive(Clone, Debug)]
pub struct OuterIteration {
    /// Relative displacement increment.
    pub delta: f64,
    /// Tracked total potential energy.
    pub energy: f64,
    pub damping: f64,
}

fn run_cg(
    system: &LinearSystem,
    spec: &ProblemSpec,
    label: &'static str,
    x0: Option<&[f64]>,
    stats: &mut Vec<LinearSolveStats>,
) -> Result<Vec<f64>> {
    let (x, report) = cg_solve(
        &system.matrix,
        &system.rhs,
        spec.settings.linear_tol,
        spec.settings.max_linear_iter,
        x0,
    )?;
    stats.push(LinearSolveStats {
        label,
        unknowns: system.matrix.n(),
        iterations: report.iterations,
        residual: report.residual,
    });
    Ok(x)
}

/// Per-element induction from the potential cochain, evaluated at tet
/// centroids (constant inside each tet for cochains in the image of the
/// derivative).
pub(crate) fn induction_field(
    mesh: &crate::mesh::SimplicialMesh,
    a: &Cochain,
) -> Result<ElementField<PCovector>> {
    let da = exterior_derivative(mesh, a)?;
    let mut values = Vec::with_capacity(mesh.tet_count());
    for t in 0..mesh.tet_count() {
        values.push(whitney_value(mesh, &da, t, [0.25; 4])?);
    }
    Ok(ElementField::from_values(values))
}

fn nodal_from_global(mesh: &crate::mesh::SimplicialMesh, full: &[f64]) -> NodalVectorField {
    let values = (0..mesh.vertex_count())
        .map(|v| [full[3 * v], full[3 * v + 1], full[3 * v + 2]])
        .collect();
    NodalVectorField::from_values(values)
}

/// Energy-derived magnetic stress per element (the strain partial of the
/// deformed-metric magnetic energy).
fn energy_stress_field(
    spec: &ProblemSpec,
    strain: &ElementField<VectorValuedForm>,
    b: &ElementField<PCovector>,
) -> Result<ElementField<CovectorValuedForm>> {
    let mesh = spec.mesh;
    let metric = spec.material.metric;
    let quad = spec.material.quadratic_metric_term;
    let mut values = Vec::with_capacity(mesh.tet_count());
    for t in 0..mesh.tet_count() {
        let r = spec.material.reluctivity_of(mesh.region(t))?;
        let sigma = match spec.material.coupling {
            CouplingMode::ModelBLinearized => {
                linearized_magnetic_stress(r, &metric, strain.value(t), b.value(t), quad)?
            }
            CouplingMode::ModelB => {
                fd_magnetic_stress(r, &metric, strain.value(t), b.value(t), quad)?
            }
            CouplingMode::ModelA => {
                return Err(Error::Spec("energy stress is a model-B quantity".into()))
            }
        };
        values.push(sigma);
    }
    Ok(ElementField::from_values(values))
}

/// Fills the derived fields and energies of a report from the solution
/// state.
fn finalize_report(
    spec: &ProblemSpec,
    report: &mut SolveReport,
) -> Result<()> {
    let mesh = spec.mesh;
    let material = &spec.material;
    let strain = report.strain.clone();
    let induction = report.induction.clone();

    let eps_of = |t: usize| {
        strain.as_ref().map(|s| *s.value(t)).unwrap_or_else(|| VectorValuedForm::zero(1))
    };
    let b_of = |t: usize| {
        induction.as_ref().map(|b| *b.value(t)).unwrap_or_else(|| PCovector::zero(2))
    };

    // total stress and field intensity through the constitutive law
    if report.strain.is_some() || report.induction.is_some() {
        let mut stress = Vec::with_capacity(mesh.tet_count());
        let mut intensity = Vec::with_capacity(mesh.tet_count());
        for t in 0..mesh.tet_count() {
            let law = material.point_law(mesh.region(t));
            stress.push(law.d1(&eps_of(t), &b_of(t))?);
            intensity.push(law.d2(&eps_of(t), &b_of(t))?);
        }
        report.stress = Some(ElementField::from_values(stress));
        if report.induction.is_some() {
            report.field_intensity = Some(ElementField::from_values(intensity));
        }
    }

    // energies by integrating the decomposed densities at the final state
    let mut elastic = Vec::with_capacity(mesh.tet_count());
    let mut magnetic = Vec::with_capacity(mesh.tet_count());
    let mut coupling = Vec::with_capacity(mesh.tet_count());
    for t in 0..mesh.tet_count() {
        let law = material.point_law(mesh.region(t));
        let parts = law.decompose(DecompositionConvention::ElasticAtZeroB);
        let (eps, b) = (eps_of(t), b_of(t));
        let e = parts.elastic(&eps, &b)?;
        let m = parts.magnetic(&eps, &b)?;
        let total = law.energy(&eps, &b)?;
        coupling.push(total.sub(&e)?.sub(&m)?);
        elastic.push(e);
        magnetic.push(m);
    }
    report.elastic_energy = integrate(mesh, &ElementField::from_values(elastic));
    report.magnetic_energy = integrate(mesh, &ElementField::from_values(magnetic));
    report.coupling_energy = integrate(mesh, &ElementField::from_values(coupling));
    Ok(())
}

/// Pure elastostatic solve.
pub fn solve_elastic(spec: &ProblemSpec) -> Result<SolveReport> {
    let mut report = SolveReport::default();
    let system = assemble_elastic_with(spec, CouplingLoad::None)?;
    let x = run_cg(&system, spec, "elastic", None, &mut report.linear_solves)?;
    let full = system.dofs.expand(&x);
    let nu = nodal_from_global(spec.mesh, &full);
    report.strain = Some(displacement_gradient(spec.mesh, &nu));
    report.displacement = Some(nu);
    finalize_report(spec, &mut report)?;
    Ok(report)
}

/// Pure magnetostatic solve.
pub fn solve_magnetic(spec: &ProblemSpec) -> Result<SolveReport> {
    let mut report = SolveReport::default();
    let system = assemble_magnetic(spec, None)?;
    let x = run_cg(&system, spec, "magnetic", None, &mut report.linear_solves)?;
    let a = Cochain::from_values(spec.mesh, 1, system.dofs.expand(&x))?;
    report.induction = Some(induction_field(spec.mesh, &a)?);
    report.potential = Some(a);
    finalize_report(spec, &mut report)?;
    Ok(report)
}

fn delta_norm(new: &[f64], old: &[f64]) -> (f64, f64) {
    let mut d2 = 0.0;
    let mut n2 = 0.0;
    for (a, b) in new.iter().zip(old) {
        d2 += (a - b) * (a - b);
        n2 += a * a;
    }
    (d2.sqrt(), n2.sqrt())
}

/// Elastic potential energy of a reduced solution: `1/2 x^T K x - f^T x`.
fn potential_energy(system: &LinearSystem, x: &[f64]) -> f64 {
    let mut kx = vec![0.0; x.len()];
    system.matrix.matvec(x, &mut kx);
    let xkx: f64 = x.iter().zip(&kx).map(|(a, b)| a * b).sum();
    let fx: f64 = x.iter().zip(&system.rhs).map(|(a, b)| a * b).sum();
    0.5 * xkx - fx
}

/// Coupling through prescribed magnetic stresses: staggered loop of
/// magnetic solve, Maxwell stress evaluation, and elastic solve with the
/// magnetic force in integrated-by-parts form.
pub fn solve_coupled_model_a(spec: &ProblemSpec) -> Result<SolveReport> {
    if spec.material.coupling != CouplingMode::ModelA {
        return Err(Error::Spec("coupling mode must be model A".into()));
    }
    let mesh = spec.mesh;
    let mut report = SolveReport::default();
    report.coupling = Some(CouplingMode::ModelA);

    // the separable energy makes the magnetic problem strain-independent:
    // one solve suffices and the loop below converges on the second pass
    let mag_system = assemble_magnetic(spec, None)?;
    let a_red = run_cg(&mag_system, spec, "magnetic", None, &mut report.linear_solves)?;
    let a = Cochain::from_values(mesh, 1, mag_system.dofs.expand(&a_red))?;
    let b = induction_field(mesh, &a)?;

    let mut nu_full = vec![0.0; 3 * mesh.vertex_count()];
    let mut x_prev: Option<Vec<f64>> = None;
    let mut damping = spec.settings.damping;
    let mut last_energy = f64::INFINITY;

    for _outer in 0..spec.settings.max_outer_iter {
        let strain = displacement_gradient(mesh, &nodal_from_global(mesh, &nu_full));
        let s_field = maxwell_stress_field(spec, Some(&strain), &b)?;
        let system = assemble_elastic_with(spec, CouplingLoad::MaxwellJump(&s_field))?;
        let x = run_cg(&system, spec, "elastic", x_prev.as_deref(), &mut report.linear_solves)?;

        let mut new_full = system.dofs.expand(&x);
        if damping < 1.0 {
            for (n, o) in new_full.iter_mut().zip(&nu_full) {
                *n = damping * *n + (1.0 - damping) * o;
            }
        }
        let (d, n) = delta_norm(&new_full, &nu_full);
        let delta = d / n.max(1e-300);
        let energy = potential_energy(&system, &x);
        if energy > last_energy + 1e-12 * last_energy.abs() {
            damping = 0.5 * damping;
            log::warn!(
                "outer loop energy rose ({last_energy:.6e} -> {energy:.6e}); damping now {damping}"
            );
        }
        last_energy = energy;
        report.outer_iterations.push(OuterIteration { delta, energy, damping });
        nu_full = new_full;
        x_prev = Some(x);

        if delta < spec.settings.outer_tol || n == 0.0 && d == 0.0 {
            let nu = nodal_from_global(mesh, &nu_full);
            report.strain = Some(displacement_gradient(mesh, &nu));
            report.displacement = Some(nu);
            report.induction = Some(b);
            report.potential = Some(a);
            report.magnetic_stress = Some(maxwell_stress_field(
                spec,
                report.strain.as_ref(),
                report.induction.as_ref().unwrap(),
            )?);
            finalize_report(spec, &mut report)?;
            return Ok(report);
        }
    }
    let history: Vec<f64> = report.outer_iterations.iter().map(|o| o.delta).collect();
    Err(Error::NoConvergence {
        iterations: spec.settings.max_outer_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

/// Coupling through the deformed-metric energy: displacement lives on the
/// whole domain with zero trace on its boundary, extended into the passive
/// region by a discrete Laplace solve after each elastic pass.
pub fn solve_coupled_model_b(spec: &ProblemSpec) -> Result<SolveReport> {
    if !matches!(spec.material.coupling, CouplingMode::ModelB | CouplingMode::ModelBLinearized) {
        return Err(Error::Spec("coupling mode must be model B".into()));
    }
    let mesh = spec.mesh;
    let mut report = SolveReport::default();
    report.coupling = Some(spec.material.coupling);

    let mut nu_full = vec![0.0; 3 * mesh.vertex_count()];
    let mut x_prev: Option<Vec<f64>> = None;
    let mut a_prev: Option<Vec<f64>> = None;
    let mut damping = spec.settings.damping;
    let mut last_delta = f64::INFINITY;

    for _outer in 0..spec.settings.max_outer_iter {
        let nu = nodal_from_global(mesh, &nu_full);
        let strain = displacement_gradient(mesh, &nu);

        // magnetic solve with the deformed-metric mass
        let mag_system = assemble_magnetic(spec, Some(&strain))?;
        let a_red =
            run_cg(&mag_system, spec, "magnetic", a_prev.as_deref(), &mut report.linear_solves)?;
        let a = Cochain::from_values(mesh, 1, mag_system.dofs.expand(&a_red))?;
        let b = induction_field(mesh, &a)?;
        a_prev = Some(a_red);

        // elastic solve with the energy-derived magnetic stress as load
        let sigma_mag = energy_stress_field(spec, &strain, &b)?;
        let system = assemble_elastic_with(spec, CouplingLoad::EnergyVolume(&sigma_mag))?;
        let x = run_cg(&system, spec, "elastic", x_prev.as_deref(), &mut report.linear_solves)?;
        let mut new_full = system.dofs.expand(&x);
        x_prev = Some(x);

        // extend into the passive region
        if let Some(ext) = assemble_laplace_extension(spec, &nodal_from_global(mesh, &new_full))? {
            for c in 0..3 {
                let (y, cg) = cg_solve(
                    &ext.matrix,
                    &ext.rhs[c],
                    spec.settings.linear_tol,
                    spec.settings.max_linear_iter,
                    None,
                )?;
                report.linear_solves.push(LinearSolveStats {
                    label: "extension",
                    unknowns: ext.matrix.n(),
                    iterations: cg.iterations,
                    residual: cg.residual,
                });
                for (k, &v) in ext.free.iter().enumerate() {
                    new_full[3 * v + c] = y[k];
                }
            }
        }

        if damping < 1.0 {
            for (n, o) in new_full.iter_mut().zip(&nu_full) {
                *n = damping * *n + (1.0 - damping) * o;
            }
        }
        let (d, n) = delta_norm(&new_full, &nu_full);
        let delta = d / n.max(1e-300);
        if delta > last_delta * 1.5 && delta > spec.settings.outer_tol {
            damping = 0.5 * damping;
            log::warn!("outer increments grew ({last_delta:.3e} -> {delta:.3e}); damping now {damping}");
        }
        last_delta = delta;
        report
            .outer_iterations
            .push(OuterIteration { delta, energy: f64::NAN, damping });
        nu_full = new_full;

        if delta < spec.settings.outer_tol {
            let nu = nodal_from_global(mesh, &nu_full);
            report.strain = Some(displacement_gradient(mesh, &nu));
            report.displacement = Some(nu);
            report.magnetic_stress =
                Some(energy_stress_field(spec, report.strain.as_ref().unwrap(), &b)?);
            report.induction = Some(b);
            report.potential = Some(a);
            finalize_report(spec, &mut report)?;
            return Ok(report);
        }
    }
    let history: Vec<f64> = report.outer_iterations.iter().map(|o| o.delta).collect();
    Err(Error::NoConvergence {
        iterations: spec.settings.max_outer_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}
