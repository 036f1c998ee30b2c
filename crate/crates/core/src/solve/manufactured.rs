//! Manufactured elastic solutions for convergence studies.
//!
//! The displacement is a product of sines vanishing on the unit-box
//! boundary; the matching body force is the negative covariant exterior
//! derivative of the analytic stress, computed exactly through the
//! constitutive law's linearity in strain.

use super::{DisplacementBc, ProblemSpec, SolveReport, SourceDensity};
use crate::algebra::Metric;
use crate::constitutive::{elastic_stress, IsotropicElastic};
use crate::mesh::{covariant_exterior_derivative, SimplicialMesh, SmoothCovectorField};
use crate::valued::VectorValuedForm;
use crate::Result;
use std::f64::consts::PI;
use std::sync::Arc;

/// Smooth displacement `u_i = amp_i sin(pi x) sin(pi y) sin(pi z)` with
/// its analytic derivatives and the matching body force.
#[derive(Clone, Copy, Debug)]
pub struct ManufacturedElastic {
    pub amplitude: [f64; 3],
    pub material: IsotropicElastic,
}

impl ManufacturedElastic {
    pub fn displacement(&self, x: [f64; 3]) -> [f64; 3] {
        let s = (PI * x[0]).sin() * (PI * x[1]).sin() * (PI * x[2]).sin();
        [self.amplitude[0] * s, self.amplitude[1] * s, self.amplitude[2] * s]
    }

    /// The displacement gradient as a component matrix.
    pub fn gradient(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let (sz, cz) = (PI * x[2]).sin_cos();
        let d = [PI * cx * sy * sz, PI * sx * cy * sz, PI * sx * sy * cz];
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.amplitude[i] * d[j];
            }
        }
        m
    }

    /// Partial derivative of the gradient along an axis.
    fn gradient_partial(&self, x: [f64; 3], axis: usize) -> [[f64; 3]; 3] {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let (sz, cz) = (PI * x[2]).sin_cos();
        // second partials of sin*sin*sin
        let dd = |j: usize, k: usize| -> f64 {
            let pi2 = PI * PI;
            match (j.min(k), j.max(k)) {
                (0, 0) => -pi2 * sx * sy * sz,
                (1, 1) => -pi2 * sx * sy * sz,
                (2, 2) => -pi2 * sx * sy * sz,
                (0, 1) => pi2 * cx * cy * sz,
                (0, 2) => pi2 * cx * sy * cz,
                (1, 2) => pi2 * sx * cy * cz,
                _ => unreachable!(),
            }
        };
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.amplitude[i] * dd(j, axis);
            }
        }
        m
    }

    /// The body force balancing the manufactured stress:
    /// `f = -d_nabla sigma(grad u)`, as covector components against the
    /// volume form.
    pub fn body_force(&self, metric: &Metric, x: [f64; 3]) -> [f64; 3] {
        let mat = self.material;
        let m = *metric;
        let value = move |y: [f64; 3]| {
            let eps = VectorValuedForm::from_component_matrix(self.gradient(y));
            elastic_stress(&mat, &m, &eps).unwrap()
        };
        let partial = move |y: [f64; 3], axis: usize| {
            // the law is linear with constant coefficients
            let deps = VectorValuedForm::from_component_matrix(self.gradient_partial(y, axis));
            elastic_stress(&mat, &m, &deps).unwrap()
        };
        let field = SmoothCovectorField { degree: 2, value: &value, partial: &partial };
        let dsigma = covariant_exterior_derivative(&field, x).unwrap();
        let mut f = [0.0; 3];
        for i in 0..3 {
            f[i] = -dsigma.row(i).components()[0];
        }
        f
    }

    /// The full problem on a mesh: exact displacement prescribed on every
    /// tagged boundary side, analytic body force everywhere.
    pub fn problem<'m>(&self, mesh: &'m SimplicialMesh, metric: Metric) -> ProblemSpec<'m> {
        let model = crate::constitutive::MagnetoElasticEnergy::new(
            crate::constitutive::CouplingMode::ModelA,
            metric,
        )
        .with_elastic(1, self.material);
        let mut spec = ProblemSpec::new(mesh, model);
        let me = *self;
        for tag in 1..=6 {
            spec.displacement_bc.insert(
                tag,
                DisplacementBc::Field(Arc::new(move |x| me.displacement(x))),
            );
        }
        let me = *self;
        spec.body_force.insert(
            1,
            SourceDensity::Field(Arc::new(move |x| me.body_force(&metric, x))),
        );
        spec
    }
}

/// Second-order barycentric quadrature points of a tet (degree-2 exact).
const QUAD_A: f64 = 0.585_410_196_624_968_5;
const QUAD_B: f64 = 0.138_196_601_125_010_5;

/// L2 norm of the difference between a P1 solution and an exact
/// displacement field.
pub fn l2_displacement_error(
    mesh: &SimplicialMesh,
    report: &SolveReport,
    exact: impl Fn([f64; 3]) -> [f64; 3],
) -> Result<f64> {
    let nu = report
        .displacement
        .as_ref()
        .ok_or_else(|| crate::Error::Spec("report carries no displacement".into()))?;
    let mut total = 0.0;
    for t in 0..mesh.tet_count() {
        let verts = mesh.tet(t);
        let vol = mesh.tet_volume(t);
        for q in 0..4 {
            let mut bary = [QUAD_B; 4];
            bary[q] = QUAD_A;
            let mut x = [0.0; 3];
            let mut uh = [0.0; 3];
            for (l, &v) in verts.iter().enumerate() {
                let p = mesh.vertex(v);
                let nv = nu.values()[v];
                for k in 0..3 {
                    x[k] += bary[l] * p[k];
                    uh[k] += bary[l] * nv[k];
                }
            }
            let ue = exact(x);
            let err2: f64 = (0..3).map(|k| (uh[k] - ue[k]) * (uh[k] - ue[k])).sum();
            total += 0.25 * vol * err2;
        }
    }
    Ok(total.sqrt())
}

/// Observed convergence orders between successive errors under uniform
/// halving of the mesh size.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
