//! Covariant exterior derivative for smooth fields under the flat
//! Euclidean connection.
//!
//! With vanishing connection coefficients the derivative acts row-wise as
//! the ordinary exterior derivative of the component forms. It is defined
//! here only for analytically differentiable callables; on discrete
//! piecewise-constant stresses equilibrium is always enforced weakly, never
//! through this operator.

use crate::algebra::{PCovector, PAIRS};
use crate::valued::{CovectorValuedForm, VectorValuedForm};
use crate::{Error, Result};

/// A covector-valued p-form field given with its analytic partials.
pub struct SmoothCovectorField<'a> {
    pub degree: usize,
    pub value: &'a dyn Fn([f64; 3]) -> CovectorValuedForm,
    /// Partial derivative of the component block along an axis.
    pub partial: &'a dyn Fn([f64; 3], usize) -> CovectorValuedForm,
}

/// A vector-valued p-form field with analytic partials.
pub struct SmoothVectorField<'a> {
    pub degree: usize,
    pub value: &'a dyn Fn([f64; 3]) -> VectorValuedForm,
    pub partial: &'a dyn Fn([f64; 3], usize) -> VectorValuedForm,
}

/// Exterior derivative of a real p-form from its three partial-derivative
/// values at a point.
pub fn d_from_partials(partials: &[PCovector; 3]) -> Result<PCovector> {
    let p = partials[0].degree();
    match p {
        0 => {
            let c = [
                partials[0].components()[0],
                partials[1].components()[0],
                partials[2].components()[0],
            ];
            Ok(PCovector::new(1, &c).unwrap())
        }
        1 => {
            let mut c = [0.0; 3];
            for (idx, &(j, k)) in PAIRS.iter().enumerate() {
                c[idx] = partials[j].components()[k] - partials[k].components()[j];
            }
            Ok(PCovector::new(2, &c).unwrap())
        }
        2 => {
            let v = partials[0].components()[2] - partials[1].components()[1]
                + partials[2].components()[0];
            Ok(PCovector::new(3, &[v]).unwrap())
        }
        d => Err(Error::InvalidDegree { degree: d, context: "d_from_partials" }),
    }
}

/// Covariant exterior derivative of a smooth covector-valued p-form at a
/// point (flat connection: row-wise exterior derivative).
pub fn covariant_exterior_derivative(
    field: &SmoothCovectorField,
    x: [f64; 3],
) -> Result<CovectorValuedForm> {
    if field.degree >= 3 {
        return Err(Error::InvalidDegree {
            degree: field.degree,
            context: "covariant_exterior_derivative",
        });
    }
    let parts = [(field.partial)(x, 0), (field.partial)(x, 1), (field.partial)(x, 2)];
    let mut out = CovectorValuedForm::zero(field.degree + 1);
    for i in 0..3 {
        let rows = [parts[0].row(i), parts[1].row(i), parts[2].row(i)];
        out.set_row(i, &d_from_partials(&rows)?);
    }
    Ok(out)
}

/// Covariant exterior derivative of a smooth vector-valued p-form at a
/// point.
pub fn covariant_exterior_derivative_vv(
    field: &SmoothVectorField,
    x: [f64; 3],
) -> Result<VectorValuedForm> {
    if field.degree >= 3 {
        return Err(Error::InvalidDegree {
            degree: field.degree,
            context: "covariant_exterior_derivative",
        });
    }
    let parts = [(field.partial)(x, 0), (field.partial)(x, 1), (field.partial)(x, 2)];
    let mut out = VectorValuedForm::zero(field.degree + 1);
    for i in 0..3 {
        let rows = [parts[0].row(i), parts[1].row(i), parts[2].row(i)];
        out.set_row(i, &d_from_partials(&rows)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valued::{dot_wedge, dot_wedge_vc};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    // quadratic polynomial stress field with analytic partials:
    // rows[i][c] = a[i][c] + sum_j b[i][c][j] x_j + sum_j q[i][c][j] x_j^2
    struct Poly {
        a: [[f64; 3]; 3],
        b: [[[f64; 3]; 3]; 3],
        q: [[[f64; 3]; 3]; 3],
    }

    impl Poly {
        fn random(rng: &mut impl Rng) -> Self {
            let mut p = Poly { a: [[0.0; 3]; 3], b: [[[0.0; 3]; 3]; 3], q: [[[0.0; 3]; 3]; 3] };
            for i in 0..3 {
                for c in 0..3 {
                    p.a[i][c] = rng.gen_range(-1.0..1.0);
                    for j in 0..3 {
                        p.b[i][c][j] = rng.gen_range(-1.0..1.0);
                        p.q[i][c][j] = rng.gen_range(-1.0..1.0);
                    }
                }
            }
            p
        }

        fn value(&self, x: [f64; 3], degree: usize) -> [[f64; 3]; 3] {
            let mut rows = [[0.0; 3]; 3];
            for i in 0..3 {
                for c in 0..crate::algebra::COMP_COUNT[degree] {
                    rows[i][c] = self.a[i][c]
                        + (0..3).map(|j| self.b[i][c][j] * x[j]).sum::<f64>()
                        + (0..3).map(|j| self.q[i][c][j] * x[j] * x[j]).sum::<f64>();
                }
            }
            rows
        }

        fn partial(&self, x: [f64; 3], axis: usize, degree: usize) -> [[f64; 3]; 3] {
            let mut rows = [[0.0; 3]; 3];
            for i in 0..3 {
                for c in 0..crate::algebra::COMP_COUNT[degree] {
                    rows[i][c] = self.b[i][c][axis] + 2.0 * self.q[i][c][axis] * x[axis];
                }
            }
            rows
        }
    }

    #[test]
    fn constant_field_has_zero_derivative() {
        let value = |_x: [f64; 3]| CovectorValuedForm::new(2, [[1.0, 2.0, 3.0]; 3]).unwrap();
        let partial = |_x: [f64; 3], _axis: usize| CovectorValuedForm::zero(2);
        let field = SmoothCovectorField { degree: 2, value: &value, partial: &partial };
        let d = covariant_exterior_derivative(&field, [0.3, 0.1, 0.9]).unwrap();
        assert_eq!(d.norm_inf(), 0.0);
    }

    #[test]
    fn defining_identity_on_polynomial_fields() {
        // d_nabla sigma .^ u = d(sigma .^ u) - sigma .^ grad(u)
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let sigma = Poly::random(&mut rng);
            let u = Poly::random(&mut rng); // rows[i][0] is the i-th component
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];

            let sig_value =
                |y: [f64; 3]| CovectorValuedForm::new(2, sigma.value(y, 2)).unwrap();
            let sig_partial =
                |y: [f64; 3], ax: usize| CovectorValuedForm::new(2, sigma.partial(y, ax, 2)).unwrap();
            let field = SmoothCovectorField { degree: 2, value: &sig_value, partial: &sig_partial };
            let dsig = covariant_exterior_derivative(&field, x).unwrap();

            let u_at = |y: [f64; 3]| VectorValuedForm::new(0, u.value(y, 0)).unwrap();
            let lhs = dot_wedge(&dsig, &u_at(x)).unwrap();

            // d(sigma .^ u) from analytic partials of the product 2-form
            let prod_partial = |ax: usize| {
                let sp = CovectorValuedForm::new(2, sigma.partial(x, ax, 2)).unwrap();
                let up = VectorValuedForm::new(0, u.partial(x, ax, 0)).unwrap();
                dot_wedge(&sp, &u_at(x))
                    .unwrap()
                    .add(&dot_wedge(&sig_value(x), &up).unwrap())
                    .unwrap()
            };
            let dprod = d_from_partials(&[prod_partial(0), prod_partial(1), prod_partial(2)]).unwrap();

            // grad u as a vector-valued 1-form
            let mut grad = [[0.0; 3]; 3];
            for ax in 0..3 {
                let up = u.partial(x, ax, 0);
                for i in 0..3 {
                    grad[i][ax] = up[i][0];
                }
            }
            let gradu = VectorValuedForm::from_component_matrix(grad);
            let rhs = dprod.sub(&dot_wedge(&sig_value(x), &gradu).unwrap()).unwrap();

            let scale = lhs.norm_inf().max(rhs.norm_inf()).max(1.0);
            assert!(lhs.sub(&rhs).unwrap().norm_inf() < 1e-12 * scale);
        }
    }

    #[test]
    fn second_derivative_vanishes_in_the_flat_case() {
        // d_nabla d_nabla u = 0 for polynomial vector-valued 0-forms
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..30 {
            let u = Poly::random(&mut rng);
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];

            // first derivative: the Jacobian as a vector-valued 1-form,
            // with analytic partials (second derivatives of u)
            let first_value = |y: [f64; 3]| {
                let mut rows = [[0.0; 3]; 3];
                for ax in 0..3 {
                    let up = u.partial(y, ax, 0);
                    for i in 0..3 {
                        rows[i][ax] = up[i][0];
                    }
                }
                VectorValuedForm::from_component_matrix(rows)
            };
            let first_partial = |y: [f64; 3], ax: usize| {
                // d/dy_ax of grad(u): second partials of the quadratic
                let mut rows = [[0.0; 3]; 3];
                for i in 0..3 {
                    // mixed partials vanish for this separable quadratic;
                    // only d^2/dax^2 survives
                    rows[i][ax] = 2.0 * u.q[i][0][ax];
                }
                let _ = y;
                VectorValuedForm::from_component_matrix(rows)
            };
            let field =
                SmoothVectorField { degree: 1, value: &first_value, partial: &first_partial };
            let dd = covariant_exterior_derivative_vv(&field, x).unwrap();
            assert!(dd.norm_inf() < 1e-13);
        }
    }

    #[test]
    fn graded_identity_relating_both_products() {
        // consistency of the two dot-wedge orders inside the derivative
        // definition: (-1)^{pq} symmetry survives differentiation
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sigma = Poly::random(&mut rng);
        let x = [0.2, -0.4, 0.6];
        let s = CovectorValuedForm::new(2, sigma.value(x, 2)).unwrap();
        let e = VectorValuedForm::new(1, sigma.value(x, 1)).unwrap();
        let a = dot_wedge(&s, &e).unwrap();
        let b = dot_wedge_vc(&e, &s).unwrap();
        assert!(a.sub(&b).unwrap().norm_inf() < 1e-13); // p q = 2 is even
    }
}
