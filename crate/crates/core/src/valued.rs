//! Vector- and covector-valued p-forms and their pairing product.
//!
//! A valued p-form is stored as a dense 3 x C(3, p) component block in the
//! canonical basis: row `i` of a [`VectorValuedForm`] is the real p-form
//! multiplying basis vector `e_i`, row `i` of a [`CovectorValuedForm`] the
//! p-form multiplying basis covector `a^i`. Density is optimal at n = 3.
//!
//! The dot-wedge product pairs the vector and covector slots and wedges the
//! form parts; in components it reduces to a row-wise exterior product. The
//! stress isomorphism turns a covector-valued 2-form into the linear map
//! taking vector-valued 1-forms to 3-forms; in the canonical bases its
//! matrix is diagonal with entries +1, -1, +1 per block once each 2-form
//! basis element is paired with its complementary covector axis.

use crate::algebra::{
    self, hodge_star, inner_product, mat_mul, mat_transpose, mat_vec, wedge, Metric,
    PCovector, PVector, COMP_COUNT, PAIR_COMPLEMENT, PAIR_COMPLEMENT_SIGN,
};
use crate::{Error, Result};

/// A p-form with tangent-vector values; degree-0 instances are ordinary
/// vectors and degree-1 instances are linear maps on the tangent space
/// (displacement gradients live here).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorValuedForm {
    degree: usize,
    rows: [[f64; 3]; 3],
}

/// A p-form with covector values; stresses, body forces, and tractions
/// live here.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovectorValuedForm {
    degree: usize,
    rows: [[f64; 3]; 3],
}

macro_rules! impl_valued {
    ($ty:ident) => {
        impl $ty {
            pub fn new(degree: usize, rows: [[f64; 3]; 3]) -> Result<Self> {
                if degree > 3 {
                    return Err(Error::InvalidDegree { degree, context: stringify!($ty) });
                }
                Ok(Self { degree, rows })
            }

            pub fn zero(degree: usize) -> Self {
                Self { degree, rows: [[0.0; 3]; 3] }
            }

            /// Basis element: value slot `slot`, form component `comp`.
            pub fn basis(degree: usize, slot: usize, comp: usize) -> Self {
                assert!(degree <= 3 && slot < 3 && comp < COMP_COUNT[degree]);
                let mut rows = [[0.0; 3]; 3];
                rows[slot][comp] = 1.0;
                Self { degree, rows }
            }

            pub fn degree(&self) -> usize {
                self.degree
            }

            /// Row `i` as a real p-form.
            pub fn row(&self, i: usize) -> PCovector {
                PCovector::from_raw(self.degree, self.rows[i])
            }

            pub fn set_row(&mut self, i: usize, form: &PCovector) {
                debug_assert_eq!(form.degree(), self.degree);
                self.rows[i] = form.comps_raw();
            }

            pub(crate) fn rows_raw(&self) -> &[[f64; 3]; 3] {
                &self.rows
            }

            pub fn scaled(&self, s: f64) -> Self {
                let mut rows = self.rows;
                for row in &mut rows {
                    for x in row {
                        *x *= s;
                    }
                }
                Self { degree: self.degree, rows }
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                if self.degree != other.degree {
                    return Err(Error::DegreeMismatch(self.degree, other.degree));
                }
                let mut rows = self.rows;
                for (r, o) in rows.iter_mut().zip(other.rows.iter()) {
                    for (x, y) in r.iter_mut().zip(o.iter()) {
                        *x += y;
                    }
                }
                Ok(Self { degree: self.degree, rows })
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.add(&other.scaled(-1.0))
            }

            pub fn norm_inf(&self) -> f64 {
                self.rows.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
            }
        }
    };
}

impl_valued!(VectorValuedForm);
impl_valued!(CovectorValuedForm);

impl VectorValuedForm {
    /// Wraps a tangent vector as a vector-valued 0-form.
    pub fn from_vector(v: &PVector) -> Self {
        let c = v.as_vector();
        Self { degree: 0, rows: [[c[0], 0.0, 0.0], [c[1], 0.0, 0.0], [c[2], 0.0, 0.0]] }
    }

    /// The inverse of [`Self::from_vector`]; degree must be 0.
    pub fn as_vector(&self) -> Result<PVector> {
        if self.degree != 0 {
            return Err(Error::InvalidDegree { degree: self.degree, context: "as_vector" });
        }
        Ok(PVector::vector([self.rows[0][0], self.rows[1][0], self.rows[2][0]]))
    }

    /// Degree-1 component matrix `M[i][j] = eps^i_j` (vector index i,
    /// form index j).
    pub fn component_matrix(&self) -> [[f64; 3]; 3] {
        debug_assert_eq!(self.degree, 1);
        self.rows
    }

    pub fn from_component_matrix(m: [[f64; 3]; 3]) -> Self {
        Self { degree: 1, rows: m }
    }

    /// Applies a degree-1 form to a tangent vector.
    pub fn apply(&self, v: &PVector) -> Result<PVector> {
        if self.degree != 1 {
            return Err(Error::InvalidDegree { degree: self.degree, context: "apply" });
        }
        Ok(PVector::vector(mat_vec(&self.rows, &v.as_vector())))
    }
}

/// The identity vector-valued 1-form.
pub fn identity_form() -> VectorValuedForm {
    VectorValuedForm::from_component_matrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
}

/// Dot-wedge of a covector-valued p-form with a vector-valued q-form:
/// pair the value slots, wedge the form parts. Row-wise this is
/// `sum_i wedge(omega_i, eta^i)`.
pub fn dot_wedge(omega: &CovectorValuedForm, eta: &VectorValuedForm) -> Result<PCovector> {
    let (p, q) = (omega.degree(), eta.degree());
    if p + q > 3 {
        return Err(Error::DegreeOverflow(p, q));
    }
    let mut out = PCovector::zero(p + q);
    for i in 0..3 {
        out = out.add(&wedge(&omega.row(i), &eta.row(i))?)?;
    }
    Ok(out)
}

/// Reversed-argument variant, satisfying
/// `dot_wedge(omega, eta) = (-1)^{pq} dot_wedge_vc(eta, omega)`.
pub fn dot_wedge_vc(eta: &VectorValuedForm, omega: &CovectorValuedForm) -> Result<PCovector> {
    let (p, q) = (eta.degree(), omega.degree());
    if p + q > 3 {
        return Err(Error::DegreeOverflow(p, q));
    }
    let mut out = PCovector::zero(p + q);
    for i in 0..3 {
        out = out.add(&wedge(&eta.row(i), &omega.row(i))?)?;
    }
    Ok(out)
}

/// Symmetric part of a displacement gradient with respect to the metric:
/// `sym(eps)^i_j = (eps^i_j + G_{lj} G^{ik} eps^l_k) / 2`.
pub fn sym(metric: &Metric, eps: &VectorValuedForm) -> Result<VectorValuedForm> {
    if eps.degree() != 1 {
        return Err(Error::InvalidDegree { degree: eps.degree(), context: "sym" });
    }
    let m = eps.component_matrix();
    let gt = mat_mul(metric.inverse(), &mat_mul(&mat_transpose(&m), metric.tensor()));
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = 0.5 * (m[i][j] + gt[i][j]);
        }
    }
    Ok(VectorValuedForm::from_component_matrix(out))
}

/// Antisymmetric part; `sym + skw` is the identity decomposition.
pub fn skw(metric: &Metric, eps: &VectorValuedForm) -> Result<VectorValuedForm> {
    let s = sym(metric, eps)?;
    eps.sub(&s)
}

/// Trace of a vector-valued 1-form, independent of the basis.
pub fn trace_vv1(eps: &VectorValuedForm) -> f64 {
    debug_assert_eq!(eps.degree(), 1);
    let m = eps.rows_raw();
    m[0][0] + m[1][1] + m[2][2]
}

/// Composition of a vector-valued 1-form with itself (component matrix
/// squared).
pub fn compose_square(eps: &VectorValuedForm) -> VectorValuedForm {
    debug_assert_eq!(eps.degree(), 1);
    let m = eps.component_matrix();
    VectorValuedForm::from_component_matrix(mat_mul(&m, &m))
}

/// Metric inner product of equal-degree vector-valued forms:
/// `<eta, beta> = G_{ki} <eta^k, beta^i>` with the form inner product
/// extended by Gram determinants of the inverse metric.
pub fn inner_product_vv(
    metric: &Metric,
    eta: &VectorValuedForm,
    beta: &VectorValuedForm,
) -> Result<f64> {
    if eta.degree() != beta.degree() {
        return Err(Error::DegreeMismatch(eta.degree(), beta.degree()));
    }
    let g = metric.tensor();
    let mut s = 0.0;
    for k in 0..3 {
        for i in 0..3 {
            if g[k][i] != 0.0 {
                s += g[k][i] * inner_product(metric, &eta.row(k), &beta.row(i))?;
            }
        }
    }
    Ok(s)
}

/// Valued Hodge operator lowering the value slot:
/// `hodge_flat(eta) = (e_i)_flat (x) star(row_i)`, so that
/// `dot_wedge_vc(eta, hodge_flat(beta)) = <eta, beta> Vol`.
pub fn hodge_flat(metric: &Metric, eta: &VectorValuedForm) -> CovectorValuedForm {
    let g = metric.tensor();
    let q = 3 - eta.degree();
    let mut out = CovectorValuedForm::zero(q);
    for k in 0..3 {
        let mut acc = PCovector::zero(q);
        for i in 0..3 {
            if g[k][i] != 0.0 {
                acc = acc.add(&hodge_star(metric, &eta.row(i)).scaled(g[k][i])).unwrap();
            }
        }
        out.set_row(k, &acc);
    }
    out
}

/// Valued Hodge operator raising the value slot; inverse of
/// [`hodge_flat`] across complementary degrees.
pub fn hodge_sharp(metric: &Metric, omega: &CovectorValuedForm) -> VectorValuedForm {
    let gi = metric.inverse();
    let q = 3 - omega.degree();
    let mut out = VectorValuedForm::zero(q);
    for k in 0..3 {
        let mut acc = PCovector::zero(q);
        for i in 0..3 {
            if gi[k][i] != 0.0 {
                acc = acc.add(&hodge_star(metric, &omega.row(i)).scaled(gi[k][i])).unwrap();
            }
        }
        out.set_row(k, &acc);
    }
    out
}

/// A covector-valued 2-form materialized as the linear map it induces from
/// vector-valued 1-forms to 3-forms.
///
/// `coeffs[l][m]` is the 3-form coefficient produced by the basis input
/// `e_l (x) a^m`.
#[derive(Clone, Copy, Debug)]
pub struct StressOperator {
    coeffs: [[f64; 3]; 3],
}

impl StressOperator {
    pub(crate) fn from_coeffs(coeffs: [[f64; 3]; 3]) -> Self {
        Self { coeffs }
    }

    /// Applies the operator to a vector-valued 1-form.
    pub fn apply(&self, e: &VectorValuedForm) -> Result<PCovector> {
        if e.degree() != 1 {
            return Err(Error::InvalidDegree { degree: e.degree(), context: "StressOperator" });
        }
        let rows = e.rows_raw();
        let mut v = 0.0;
        for l in 0..3 {
            for m in 0..3 {
                v += self.coeffs[l][m] * rows[l][m];
            }
        }
        Ok(PCovector::new(3, &[v]).unwrap())
    }
}

/// Materializes a covector-valued 2-form as its stress operator by the
/// literal three-term evaluation
/// `(sigma .^ e)(u,v,w) = sigma(u,v)(e(w)) + sigma(w,u)(e(v)) + sigma(v,w)(e(u))`
/// on basis triples. This path is independent of [`dot_wedge`] and is
/// checked against it in the test suites.
pub fn stress_to_operator(sigma: &CovectorValuedForm) -> Result<StressOperator> {
    if sigma.degree() != 2 {
        return Err(Error::InvalidDegree { degree: sigma.degree(), context: "stress_to_operator" });
    }
    let basis = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let (e1, e2, e3) = (basis[0], basis[1], basis[2]);
    let mut coeffs = [[0.0; 3]; 3];
    for l in 0..3 {
        // sigma(u,v) applied to e_l is the 2-form in row l evaluated on (u,v)
        let s_l = sigma.row(l);
        for m in 0..3 {
            // basis input e_l (x) a^m sends w to w^m e_l
            coeffs[l][m] = e3[m] * s_l.evaluate(&[e1, e2])
                + e2[m] * s_l.evaluate(&[e3, e1])
                + e1[m] * s_l.evaluate(&[e2, e3]);
        }
    }
    Ok(StressOperator::from_coeffs(coeffs))
}

/// Rebuilds the stress form from operator coefficients (the diagonal
/// inverse of the isomorphism).
pub(crate) fn operator_coeffs_to_stress(coeffs: &[[f64; 3]; 3]) -> CovectorValuedForm {
    let mut rows = [[0.0; 3]; 3];
    for l in 0..3 {
        for c in 0..3 {
            // form pair c is read back from the complementary covector axis
            rows[l][c] = PAIR_COMPLEMENT_SIGN[c] * coeffs[l][PAIR_COMPLEMENT[c]];
        }
    }
    CovectorValuedForm::new(2, rows).unwrap()
}

/// Index of the operator component paired with stress component
/// `(block, pair)` under the fixed basis bookkeeping: within each value
/// block the operator slots are enumerated by the covector axis
/// complementary to the form pair, so the isomorphism matrix is diagonal.
fn canonical_index(block: usize, pos: usize) -> usize {
    3 * block + pos
}

/// The 9x9 matrix of the stress operator of `sigma` in the canonical
/// bases. It is diagonal with entries `(+1, -1, +1)` per block times the
/// stress components; for the nine basis stresses the single nonzero entry
/// is the permutation sign of (pair, complementary axis).
pub fn operator_matrix(sigma: &CovectorValuedForm) -> Result<[[f64; 9]; 9]> {
    if sigma.degree() != 2 {
        return Err(Error::InvalidDegree { degree: sigma.degree(), context: "operator_matrix" });
    }
    let rows = sigma.rows_raw();
    let mut m = [[0.0; 9]; 9];
    for block in 0..3 {
        for c in 0..3 {
            let idx = canonical_index(block, c);
            m[idx][idx] = PAIR_COMPLEMENT_SIGN[c] * rows[block][c];
        }
    }
    Ok(m)
}

/// Inverse of [`operator_matrix`]. Fails with `NotRepresentable` when the
/// matrix carries any off-diagonal content, i.e. does not lie in the image
/// of the isomorphism under the fixed bookkeeping.
pub fn operator_to_stress(m: &[[f64; 9]; 9]) -> Result<CovectorValuedForm> {
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    for r in 0..9 {
        for c in 0..9 {
            if r != c && m[r][c].abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::NotRepresentable);
            }
        }
    }
    let mut rows = [[0.0; 3]; 3];
    for block in 0..3 {
        for c in 0..3 {
            let idx = canonical_index(block, c);
            rows[block][c] = PAIR_COMPLEMENT_SIGN[c] * m[idx][idx];
        }
    }
    CovectorValuedForm::new(2, rows)
}

/// Evaluates `dot_wedge(sigma, eta)` for degree-1 `eta` through the
/// operator route; used where the solver wants the bilinear-form value.
pub fn stress_pairing(sigma: &CovectorValuedForm, eta: &VectorValuedForm) -> Result<f64> {
    Ok(dot_wedge(sigma, eta)?.components()[0])
}

pub use algebra::{metric_flat, metric_sharp};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{volume_form, Metric};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    fn random_vv(rng: &mut impl Rng, degree: usize) -> VectorValuedForm {
        let mut rows = [[0.0; 3]; 3];
        for r in &mut rows {
            for c in 0..COMP_COUNT[degree] {
                r[c] = rng.gen_range(-1.0..1.0);
            }
        }
        VectorValuedForm::new(degree, rows).unwrap()
    }

    fn random_cv(rng: &mut impl Rng, degree: usize) -> CovectorValuedForm {
        let mut rows = [[0.0; 3]; 3];
        for r in &mut rows {
            for c in 0..COMP_COUNT[degree] {
                r[c] = rng.gen_range(-1.0..1.0);
            }
        }
        CovectorValuedForm::new(degree, rows).unwrap()
    }

    fn random_metric(rng: &mut impl Rng) -> Metric {
        let mut a = [[0.0; 3]; 3];
        for row in &mut a {
            for x in row.iter_mut() {
                *x = rng.gen_range(-0.8..0.8);
            }
        }
        let mut g = mat_mul(&mat_transpose(&a), &a);
        for i in 0..3 {
            g[i][i] += 1.0;
        }
        Metric::new(g).unwrap()
    }

    #[test]
    fn dot_wedge_basic_examples() {
        // (a^1 (x) a^1) .^ (e_1 (x) a^2) = dx ∧ dy
        let omega = CovectorValuedForm::basis(1, 0, 0);
        let eta = VectorValuedForm::basis(1, 0, 1);
        let got = dot_wedge(&omega, &eta).unwrap();
        assert_eq!(got.degree(), 2);
        assert_eq!(got.components(), &[1.0, 0.0, 0.0]);

        // zero form annihilates
        let zero = VectorValuedForm::zero(1);
        assert_eq!(dot_wedge(&omega, &zero).unwrap().norm_inf(), 0.0);

        // body-force pairing: (a^1 (x) Vol) .^ e_1 = Vol
        let f = CovectorValuedForm::basis(3, 0, 0);
        let v = VectorValuedForm::from_vector(&PVector::vector([1.0, 0.0, 0.0]));
        let got = dot_wedge(&f, &v).unwrap();
        assert_eq!(got.components(), &[1.0]);
    }

    #[test]
    fn dot_wedge_graded_anticommutativity() {
        let mut rng = rng();
        for _ in 0..1000 {
            let p = rng.gen_range(0..=3);
            let q = rng.gen_range(0..=(3 - p));
            let omega = random_cv(&mut rng, p);
            let eta = random_vv(&mut rng, q);
            let a = dot_wedge(&omega, &eta).unwrap();
            let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
            let b = dot_wedge_vc(&eta, &omega).unwrap().scaled(sign);
            assert!(a.sub(&b).unwrap().norm_inf() < 1e-14);
        }
    }

    #[test]
    fn dot_wedge_degree_overflow() {
        let omega = random_cv(&mut rng(), 2);
        let eta = random_vv(&mut rng(), 2);
        assert!(matches!(dot_wedge(&omega, &eta), Err(Error::DegreeOverflow(2, 2))));
    }

    #[test]
    fn stress_operator_worked_example() {
        // sigma = a^1 (x) (a^2 ∧ a^3), e = e_1 (x) a^1: value 1 on (e1,e2,e3)
        let sigma = CovectorValuedForm::basis(2, 0, 2);
        let e = VectorValuedForm::basis(1, 0, 0);
        let op = stress_to_operator(&sigma).unwrap();
        assert_eq!(op.apply(&e).unwrap().components(), &[1.0]);
        // zero stress gives the zero map
        let z = stress_to_operator(&CovectorValuedForm::zero(2)).unwrap();
        assert_eq!(z.apply(&e).unwrap().components(), &[0.0]);
    }

    #[test]
    fn stress_operator_agrees_with_dot_wedge() {
        let mut rng = rng();
        for _ in 0..500 {
            let sigma = random_cv(&mut rng, 2);
            let e = random_vv(&mut rng, 1);
            let via_op = stress_to_operator(&sigma).unwrap().apply(&e).unwrap();
            let via_dw = dot_wedge(&sigma, &e).unwrap();
            assert!((via_op.components()[0] - via_dw.components()[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn operator_matrix_is_diagonal_with_unit_entries() {
        // each of the nine basis stresses hits a single diagonal slot
        for block in 0..3 {
            for c in 0..3 {
                let sigma = CovectorValuedForm::basis(2, block, c);
                let m = operator_matrix(&sigma).unwrap();
                for r in 0..9 {
                    for s in 0..9 {
                        let expect = if r == s && r == 3 * block + c {
                            PAIR_COMPLEMENT_SIGN[c]
                        } else {
                            0.0
                        };
                        assert_eq!(m[r][s], expect);
                    }
                }
            }
        }
        // all-ones stress: diagonal entries are the signs
        let sigma = CovectorValuedForm::new(2, [[1.0; 3]; 3]).unwrap();
        let m = operator_matrix(&sigma).unwrap();
        let mut det = 1.0;
        for r in 0..9 {
            det *= m[r][r];
            assert_eq!(m[r][r].abs(), 1.0);
        }
        assert_eq!(det.abs(), 1.0);
    }

    #[test]
    fn operator_matrix_matches_three_term_operator() {
        // the pattern route and the literal evaluation route agree
        let mut rng = rng();
        for _ in 0..100 {
            let sigma = random_cv(&mut rng, 2);
            let m = operator_matrix(&sigma).unwrap();
            let op = stress_to_operator(&sigma).unwrap();
            for block in 0..3 {
                for c in 0..3 {
                    let e = VectorValuedForm::basis(1, block, PAIR_COMPLEMENT[c]);
                    let idx = canonical_index(block, c);
                    let direct = op.apply(&e).unwrap().components()[0];
                    assert!((m[idx][idx] - direct).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn operator_round_trip_and_not_representable() {
        let mut rng = rng();
        for _ in 0..200 {
            let sigma = random_cv(&mut rng, 2);
            let back = operator_to_stress(&operator_matrix(&sigma).unwrap()).unwrap();
            assert!(sigma.sub(&back).unwrap().norm_inf() < 1e-15);
        }
        let mut m = [[0.0; 9]; 9];
        m[0][1] = 1.0;
        assert!(matches!(operator_to_stress(&m), Err(Error::NotRepresentable)));
    }

    #[test]
    fn sym_skw_examples() {
        let g = Metric::euclidean();
        let eps = VectorValuedForm::basis(1, 0, 1); // e1 (x) a^2
        let s = sym(&g, &eps).unwrap();
        let m = s.component_matrix();
        assert_eq!(m[0][1], 0.5);
        assert_eq!(m[1][0], 0.5);

        let id = identity_form();
        assert_eq!(sym(&g, &id).unwrap(), id);
        assert_eq!(skw(&g, &id).unwrap().norm_inf(), 0.0);

        let g = Metric::diagonal([4.0, 1.0, 1.0]).unwrap();
        let s = sym(&g, &eps).unwrap().component_matrix();
        assert_eq!(s[0][1], 0.5);
        assert_eq!(s[1][0], 2.0);
    }

    #[test]
    fn sym_skw_decomposition_and_g_symmetry() {
        let mut rng = rng();
        for _ in 0..300 {
            let g = random_metric(&mut rng);
            let eps = random_vv(&mut rng, 1);
            let s = sym(&g, &eps).unwrap();
            let a = skw(&g, &eps).unwrap();
            assert!(s.add(&a).unwrap().sub(&eps).unwrap().norm_inf() < 1e-14);
            assert!(sym(&g, &s).unwrap().sub(&s).unwrap().norm_inf() < 1e-13);
            assert!(skw(&g, &s).unwrap().norm_inf() < 1e-13);
            // G_{ik} sym^k_j is a symmetric matrix
            let gs = mat_mul(g.tensor(), &s.component_matrix());
            for i in 0..3 {
                for j in 0..3 {
                    assert!((gs[i][j] - gs[j][i]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn trace_and_square() {
        assert_eq!(trace_vv1(&identity_form()), 3.0);
        assert_eq!(trace_vv1(&VectorValuedForm::basis(1, 0, 1)), 0.0);
        assert_eq!(compose_square(&identity_form()), identity_form());
        let n = VectorValuedForm::basis(1, 0, 1);
        assert_eq!(compose_square(&n).norm_inf(), 0.0);
        let d = VectorValuedForm::from_component_matrix([
            [1.0, 0.0, 0.0],
            [0.0, 2.0, 0.0],
            [0.0, 0.0, 3.0],
        ]);
        assert_eq!(trace_vv1(&compose_square(&d)), 14.0);
    }

    #[test]
    fn trace_is_similarity_invariant() {
        let mut rng = rng();
        for _ in 0..100 {
            let eps = random_vv(&mut rng, 1);
            // random invertible P (diagonally dominated)
            let mut p = [[0.0; 3]; 3];
            for (i, row) in p.iter_mut().enumerate() {
                for (j, x) in row.iter_mut().enumerate() {
                    *x = rng.gen_range(-0.4..0.4) + if i == j { 2.0 } else { 0.0 };
                }
            }
            let pinv = crate::algebra::mat_inverse(&p).unwrap();
            let conj = mat_mul(&p, &mat_mul(&eps.component_matrix(), &pinv));
            let t = trace_vv1(&VectorValuedForm::from_component_matrix(conj));
            assert!((t - trace_vv1(&eps)).abs() < 1e-12);
        }
    }

    #[test]
    fn valued_hodge_identities() {
        let g = Metric::euclidean();
        let id = identity_form();
        let flat = hodge_flat(&g, &id);
        // I .^ hodge_flat(I) = <I, I> Vol = 3 Vol
        let got = dot_wedge_vc(&id, &flat).unwrap();
        assert_eq!(got.components(), &[3.0]);

        let g = Metric::diagonal([4.0, 1.0, 1.0]).unwrap();
        let eta = VectorValuedForm::basis(1, 0, 0); // e1 (x) dx
        let fl = hodge_flat(&g, &eta);
        // 4 dx (x) (1/2 dy∧dz) = 2 dx (x) dy∧dz
        assert_eq!(fl.degree(), 2);
        assert_eq!(fl.row(0).components(), &[0.0, 0.0, 2.0]);
        assert_eq!(fl.row(1).norm_inf(), 0.0);

        let mut rng = rng();
        for _ in 0..300 {
            let g = random_metric(&mut rng);
            let p = rng.gen_range(0..=3);
            let eta = random_vv(&mut rng, p);
            let beta = random_vv(&mut rng, p);
            // eta .^ hodge_flat(beta) = <eta, beta> Vol
            let lhs = dot_wedge_vc(&eta, &hodge_flat(&g, &beta)).unwrap();
            let rhs = volume_form(&g).scaled(inner_product_vv(&g, &eta, &beta).unwrap());
            assert!(lhs.sub(&rhs).unwrap().norm_inf() < 1e-12 * (1.0 + lhs.norm_inf()));
            // sharp inverts flat
            let back = hodge_sharp(&g, &hodge_flat(&g, &eta));
            assert!(back.sub(&eta).unwrap().norm_inf() < 1e-12);
        }
    }

    #[test]
    fn vector_wrapping_round_trip() {
        let v = PVector::vector([0.2, -0.7, 1.5]);
        let w = VectorValuedForm::from_vector(&v);
        assert_eq!(w.degree(), 0);
        assert_eq!(w.as_vector().unwrap(), v);
        // identity form applied to any vector returns it
        let back = identity_form().apply(&v).unwrap();
        assert_eq!(back, v);
    }
}
