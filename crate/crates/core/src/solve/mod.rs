//! Weak-form assembly and solution drivers.
//!
//! Essential conditions are imposed by degree-of-freedom elimination, which
//! preserves symmetry. The magnetic system keeps its gradient kernel (no
//! gauge fixing); the elastic system without essential data keeps its six
//! rigid modes and the load is checked against them.

mod assemble;
mod coupled;
mod manufactured;
mod residual;
mod sparse;

pub use assemble::{assemble_elastic, assemble_laplace_extension, assemble_magnetic, CouplingLoad};
pub use coupled::{
    solve_coupled_model_a, solve_coupled_model_b, solve_elastic, solve_magnetic, OuterIteration,
};
pub use manufactured::{l2_displacement_error, observed_orders, ManufacturedElastic};
pub use residual::{equilibrium_residual, ResidualNorms};
pub use sparse::{cg_solve, CgReport, CsrMatrix};

use crate::algebra::PCovector;
use crate::constitutive::{CouplingMode, MagnetoElasticEnergy};
use crate::mesh::{Cochain, ElementField, NodalVectorField, SimplicialMesh};
use crate::valued::{CovectorValuedForm, VectorValuedForm};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::sync::Arc;

/// A position-dependent 3-component field.
pub type FieldFn = Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>;

/// Essential displacement data on a boundary tag.
#[derive(Clone)]
pub enum DisplacementBc {
    /// Per-component prescriptions; `None` leaves the component free
    /// (symmetry rollers etc.).
    Components([Option<f64>; 3]),
    /// All three components prescribed from a field of position.
    Field(FieldFn),
}

/// Essential magnetic-potential data on a boundary tag: the tangential
/// trace of the covector potential, as edge integrals.
#[derive(Clone)]
pub enum PotentialBc {
    /// Potential of a uniform induction with 2-form components
    /// `[b_12, b_13, b_23]`.
    UniformB([f64; 3]),
    Zero,
    /// Explicit 1-form components of the potential; edge integrals by
    /// two-point Gauss quadrature.
    OneForm(FieldFn),
}

/// Volume source density, constant per region or position-dependent.
#[derive(Clone)]
pub enum SourceDensity {
    Constant([f64; 3]),
    Field(FieldFn),
}

impl SourceDensity {
    pub fn at(&self, x: [f64; 3]) -> [f64; 3] {
        match self {
            SourceDensity::Constant(v) => *v,
            SourceDensity::Field(f) => f(x),
        }
    }
}

/// How displacement is extended into the passive region for the
/// energy-coupled model; two operators are shipped so extension
/// independence can be probed empirically.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtensionOperator {
    Laplace,
    /// Laplace with a smoothly varying positive coefficient.
    WeightedLaplace,
}

/// Solver tolerances and loop controls.
#[derive(Clone, Copy, Debug)]
pub struct SolverSettings {
    pub linear_tol: f64,
    pub max_linear_iter: usize,
    /// Relative displacement-increment tolerance of the coupled loop.
    pub outer_tol: f64,
    pub max_outer_iter: usize,
    /// Initial damping on displacement updates, halved on energy increase.
    pub damping: f64,
    /// Tolerance of the rigid-mode and solenoidal-source compatibility
    /// checks.
    pub compat_tol: f64,
    pub extension: ExtensionOperator,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            linear_tol: 1e-10,
            max_linear_iter: 50_000,
            outer_tol: 1e-8,
            max_outer_iter: 50,
            damping: 1.0,
            compat_tol: 1e-8,
            extension: ExtensionOperator::Laplace,
        }
    }
}

/// Boundary conditions, loads, material, and solver settings of one
/// problem.
#[derive(Clone)]
pub struct ProblemSpec<'m> {
    pub mesh: &'m SimplicialMesh,
    pub material: MagnetoElasticEnergy,
    /// Essential displacement surface, by boundary tag.
    pub displacement_bc: BTreeMap<i32, DisplacementBc>,
    /// Traction covector per boundary tag (force per area).
    pub traction: BTreeMap<i32, [f64; 3]>,
    /// Body force covector density per region (force per volume).
    pub body_force: BTreeMap<i32, SourceDensity>,
    /// Essential potential surface, by boundary tag.
    pub potential_bc: BTreeMap<i32, PotentialBc>,
    /// Surface field intensity 1-form per boundary tag.
    pub surface_h: BTreeMap<i32, [f64; 3]>,
    /// Current density vector per region; the 2-form is its contraction
    /// with the volume form.
    pub current: BTreeMap<i32, SourceDensity>,
    pub settings: SolverSettings,
}

impl<'m> ProblemSpec<'m> {
    pub fn new(mesh: &'m SimplicialMesh, material: MagnetoElasticEnergy) -> Self {
        Self {
            mesh,
            material,
            displacement_bc: BTreeMap::new(),
            traction: BTreeMap::new(),
            body_force: BTreeMap::new(),
            potential_bc: BTreeMap::new(),
            surface_h: BTreeMap::new(),
            current: BTreeMap::new(),
            settings: SolverSettings::default(),
        }
    }

    /// Structural consistency: essential and natural surfaces must not
    /// overlap.
    pub fn validate(&self) -> Result<()> {
        for tag in self.displacement_bc.keys() {
            if self.traction.contains_key(tag) {
                return Err(Error::Spec(format!(
                    "boundary tag {tag} carries both prescribed displacement and traction"
                )));
            }
        }
        for tag in self.potential_bc.keys() {
            if self.surface_h.contains_key(tag) {
                return Err(Error::Spec(format!(
                    "boundary tag {tag} carries both prescribed potential and surface field"
                )));
            }
        }
        Ok(())
    }
}

/// Free/fixed partition of a global degree-of-freedom set.
#[derive(Clone, Debug)]
pub struct DofMap {
    /// Global ids of the free dofs, in ascending order.
    pub free: Vec<usize>,
    /// Global dof to free index; `None` marks fixed dofs.
    pub index: Vec<Option<u32>>,
    /// Prescribed value per global dof (zero for free dofs).
    pub fixed_values: Vec<f64>,
}

impl DofMap {
    pub(crate) fn new(n_global: usize, fixed: &BTreeMap<usize, f64>) -> Self {
        let mut index = vec![None; n_global];
        let mut fixed_values = vec![0.0; n_global];
        let mut free = Vec::with_capacity(n_global - fixed.len());
        for g in 0..n_global {
            if let Some(&v) = fixed.get(&g) {
                fixed_values[g] = v;
            } else {
                index[g] = Some(free.len() as u32);
                free.push(g);
            }
        }
        Self { free, index, fixed_values }
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Scatters a free-dof vector into the full global vector, fixed
    /// values included.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = self.fixed_values.clone();
        for (k, &g) in self.free.iter().enumerate() {
            full[g] = reduced[k];
        }
        full
    }
}

/// Reduced symmetric system with its dof partition.
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
}

/// Statistics of one inner linear solve.
#[derive(Clone, Debug)]
pub struct LinearSolveStats {
    pub label: &'static str,
    pub unknowns: usize,
    pub iterations: usize,
    pub residual: f64,
}

/// Solution fields and diagnostics of a solve.
#[derive(Clone, Default)]
pub struct SolveReport {
    pub displacement: Option<NodalVectorField>,
    pub potential: Option<Cochain>,
    pub strain: Option<ElementField<VectorValuedForm>>,
    /// Per-element induction 2-form.
    pub induction: Option<ElementField<PCovector>>,
    /// Total constitutive stress per element.
    pub stress: Option<ElementField<CovectorValuedForm>>,
    /// Magnetic stress per element: the prescribed mapping for the
    /// force-coupled model, the energy-derived part for the energy-coupled
    /// one.
    pub magnetic_stress: Option<ElementField<CovectorValuedForm>>,
    /// Field intensity 1-form per element.
    pub field_intensity: Option<ElementField<PCovector>>,
    pub elastic_energy: f64,
    pub magnetic_energy: f64,
    /// Residual of the fiberwise split: total minus elastic minus
    /// magnetic energy (zero for the shipped laws).
    pub coupling_energy: f64,
    pub linear_solves: Vec<LinearSolveStats>,
    pub outer_iterations: Vec<OuterIteration>,
    pub coupling: Option<CouplingMode>,
}

impl SolveReport {
    pub fn total_energy(&self) -> f64 {
        self.elastic_energy + self.magnetic_energy + self.coupling_energy
    }
}
