//! Energy densities and constitutive laws.
//!
//! The shipped laws are the linear isotropic ones: a quadratic elastic
//! energy in the displacement gradient, a quadratic magnetic energy in the
//! induction 2-form, the Maxwell stress mapping, and the deformed-metric
//! variant of the magnetic energy used by the energy-coupled model. The
//! architecture admits genuinely magnetostrictive laws (a magnetic part
//! depending on strain) but none is shipped.
//!
//! Derivatives of the quadratic laws are analytic. The full deformed-metric
//! energy has no closed-form strain derivative here, so `d1` falls back to
//! central finite differences with a relative step of 1e-6; the linearized
//! variant (quadratic metric term dropped) gets an exact matrix-calculus
//! derivative.

use crate::algebra::{
    hodge_star, interior_product, mat_det, mat_inverse, mat_mul, mat_transpose, volume_form,
    wedge, Metric, PCovector, PVector,
};
use crate::valued::{
    compose_square, hodge_flat, identity_form, inner_product_vv, operator_coeffs_to_stress, sym,
    trace_vv1, CovectorValuedForm, VectorValuedForm,
};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// Lamé parameters of the isotropic elastic energy.
#[derive(Clone, Copy, Debug)]
pub struct IsotropicElastic {
    lambda: f64,
    mu: f64,
}

impl IsotropicElastic {
    /// Requires `mu > 0` and `3 lambda + 2 mu > 0` so the quadratic form is
    /// positive definite on symmetric strains.
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0) {
            return Err(Error::Spec(format!(
                "elastic parameters out of range: lambda={lambda}, mu={mu}"
            )));
        }
        Ok(Self { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Validates a reluctivity value (inverse permeability).
pub fn check_reluctivity(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Spec(format!("reluctivity must be positive, got {r}")));
    }
    Ok(r)
}

/// Elastic energy density
/// `1/2 (lambda tr(eps)^2 + mu (tr(eps^2) + <eps, eps>)) Vol`.
pub fn elastic_energy_density(
    mat: &IsotropicElastic,
    metric: &Metric,
    eps: &VectorValuedForm,
) -> Result<PCovector> {
    let tr = trace_vv1(eps);
    let tr_sq = trace_vv1(&compose_square(eps));
    let ip = inner_product_vv(metric, eps, eps)?;
    let coeff = 0.5 * (mat.lambda * tr * tr + mat.mu * (tr_sq + ip));
    Ok(volume_form(metric).scaled(coeff))
}

/// Elastic constitutive law
/// `sigma = lambda tr(eps) hodge_flat(I) + 2 mu hodge_flat(sym(eps))`,
/// the analytic strain derivative of [`elastic_energy_density`].
pub fn elastic_stress(
    mat: &IsotropicElastic,
    metric: &Metric,
    eps: &VectorValuedForm,
) -> Result<CovectorValuedForm> {
    let id_part = hodge_flat(metric, &identity_form()).scaled(mat.lambda * trace_vv1(eps));
    let sym_part = hodge_flat(metric, &sym(metric, eps)?).scaled(2.0 * mat.mu);
    id_part.add(&sym_part)
}

/// Magnetic energy density `1/2 r star(b) ∧ b`.
pub fn magnetic_energy_density(r: f64, metric: &Metric, b: &PCovector) -> Result<PCovector> {
    check_reluctivity(r)?;
    wedge(&hodge_star(metric, b), b).map(|w| w.scaled(0.5 * r))
}

/// Magnetic field intensity `h = r star(b)`, the induction derivative of
/// the magnetic energy density.
pub fn magnetic_field_intensity(r: f64, metric: &Metric, b: &PCovector) -> Result<PCovector> {
    check_reluctivity(r)?;
    Ok(hodge_star(metric, b).scaled(r))
}

/// Magnetic stress mapping: the covector-valued 2-form with
/// `S .^ v = 1/2 r star(b) ∧ i_v b + 1/2 i_v(r star(b)) ∧ b`,
/// independent of strain. With the Euclidean metric this is the classical
/// Maxwell stress, measured in the reference configuration.
pub fn maxwell_stress(
    r: f64,
    metric: &Metric,
    _eps: &VectorValuedForm,
    b: &PCovector,
) -> Result<CovectorValuedForm> {
    check_reluctivity(r)?;
    let h = hodge_star(metric, b).scaled(r);
    let mut out = CovectorValuedForm::zero(2);
    for j in 0..3 {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        let v = PVector::vector(e);
        let term1 = wedge(&h, &interior_product(&v, b)?)?.scaled(0.5);
        let term2 = wedge(&interior_product(&v, &h)?, b)?.scaled(0.5);
        out.set_row(j, &term1.add(&term2)?);
    }
    Ok(out)
}

fn deformed_tensor(metric: &Metric, eps: &VectorValuedForm, quadratic: bool) -> [[f64; 3]; 3] {
    // G_hat = (I + eps)^T G (I + eps), with the quadratic term eps^T G eps
    // dropped when disabled
    let g = metric.tensor();
    let m = eps.component_matrix();
    let ge = mat_mul(g, &m);
    let mut out = *g;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += ge[i][j] + ge[j][i];
        }
    }
    if quadratic {
        let q = mat_mul(&mat_transpose(&m), &ge);
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += q[i][j];
            }
        }
    }
    out
}

/// Pull-back of the metric by the configuration change implied by the
/// strain. Fails with `StrainTooLarge` when the result is not positive
/// definite.
pub fn deformed_metric(
    metric: &Metric,
    eps: &VectorValuedForm,
    include_quadratic: bool,
) -> Result<Metric> {
    let g = deformed_tensor(metric, eps, include_quadratic);
    let m = Metric::new(g).map_err(|_| Error::StrainTooLarge)?;
    Ok(if metric.orientation_sign() < 0.0 { m.with_orientation(-1) } else { m })
}

/// Magnetic energy density measured in the deformed configuration:
/// `1/2 r star_hat(b) ∧ b` with the star of the deformed metric.
pub fn model_b_magnetic_energy(
    r: f64,
    metric: &Metric,
    eps: &VectorValuedForm,
    b: &PCovector,
    include_quadratic: bool,
) -> Result<PCovector> {
    check_reluctivity(r)?;
    let ghat = deformed_metric(metric, eps, include_quadratic)?;
    wedge(&hodge_star(&ghat, b), b).map(|w| w.scaled(0.5 * r))
}

/// Coupling construction selected by a problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingMode {
    /// Separable energy plus a prescribed magnetic stress mapping.
    ModelA,
    /// Coupling purely through the deformed-metric magnetic energy.
    ModelB,
    /// Model B with the quadratic metric term dropped and an analytic
    /// strain derivative.
    ModelBLinearized,
}

/// Convention for splitting a coupled energy into elastic and magnetic
/// parts; the two coincide exactly when the coupling is separable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecompositionConvention {
    /// Elastic part is the energy at zero induction.
    ElasticAtZeroB,
    /// Magnetic part is the energy at zero strain.
    MagneticAtZeroEps,
}

/// Material data for the coupled problem: per-region elastic and magnetic
/// parameters, the coupling mode, and the base metric.
#[derive(Clone, Debug)]
pub struct MagnetoElasticEnergy {
    pub elastic: BTreeMap<i32, IsotropicElastic>,
    pub reluctivity: BTreeMap<i32, f64>,
    pub coupling: CouplingMode,
    pub quadratic_metric_term: bool,
    pub metric: Metric,
    /// Region tags forming the material body; elastic fields live here.
    pub elastic_regions: BTreeSet<i32>,
}

impl MagnetoElasticEnergy {
    pub fn new(coupling: CouplingMode, metric: Metric) -> Self {
        Self {
            elastic: BTreeMap::new(),
            reluctivity: BTreeMap::new(),
            coupling,
            quadratic_metric_term: matches!(coupling, CouplingMode::ModelB),
            metric,
            elastic_regions: BTreeSet::new(),
        }
    }

    pub fn with_elastic(mut self, region: i32, mat: IsotropicElastic) -> Self {
        self.elastic.insert(region, mat);
        self.elastic_regions.insert(region);
        self
    }

    pub fn with_reluctivity(mut self, region: i32, r: f64) -> Self {
        self.reluctivity.insert(region, r);
        self
    }

    /// The pointwise law for one region.
    pub fn point_law(&self, region: i32) -> PointLaw<'_> {
        PointLaw {
            elastic: self.elastic.get(&region).copied(),
            r: self.reluctivity.get(&region).copied(),
            mode: self.coupling,
            quadratic: self.quadratic_metric_term,
            metric: &self.metric,
        }
    }

    pub fn reluctivity_of(&self, region: i32) -> Result<f64> {
        self.reluctivity
            .get(&region)
            .copied()
            .ok_or_else(|| Error::Spec(format!("missing reluctivity for region {region}")))
    }
}

/// The energy and its partial derivatives at a point of one region.
#[derive(Clone, Copy)]
pub struct PointLaw<'a> {
    pub elastic: Option<IsotropicElastic>,
    pub r: Option<f64>,
    pub mode: CouplingMode,
    pub quadratic: bool,
    pub metric: &'a Metric,
}

impl PointLaw<'_> {
    fn elastic_energy(&self, eps: &VectorValuedForm) -> Result<PCovector> {
        match &self.elastic {
            Some(mat) => elastic_energy_density(mat, self.metric, eps),
            None => Ok(PCovector::zero(3)),
        }
    }

    fn magnetic_part(&self, eps: &VectorValuedForm, b: &PCovector) -> Result<PCovector> {
        let Some(r) = self.r else { return Ok(PCovector::zero(3)) };
        match self.mode {
            CouplingMode::ModelA => magnetic_energy_density(r, self.metric, b),
            CouplingMode::ModelB | CouplingMode::ModelBLinearized => {
                model_b_magnetic_energy(r, self.metric, eps, b, self.quadratic)
            }
        }
    }

    /// Total energy density at `(eps, b)`.
    pub fn energy(&self, eps: &VectorValuedForm, b: &PCovector) -> Result<PCovector> {
        self.elastic_energy(eps)?.add(&self.magnetic_part(eps, b)?)
    }

    /// Strain partial derivative, materialized as a covector-valued 2-form
    /// through the diagonal stress isomorphism.
    pub fn d1(&self, eps: &VectorValuedForm, b: &PCovector) -> Result<CovectorValuedForm> {
        let elastic = match &self.elastic {
            Some(mat) => elastic_stress(mat, self.metric, eps)?,
            None => CovectorValuedForm::zero(2),
        };
        match self.mode {
            CouplingMode::ModelA => Ok(elastic),
            CouplingMode::ModelBLinearized => {
                let mag = match self.r {
                    Some(r) => linearized_magnetic_stress(r, self.metric, eps, b, self.quadratic)?,
                    None => CovectorValuedForm::zero(2),
                };
                elastic.add(&mag)
            }
            CouplingMode::ModelB => {
                let mag = match self.r {
                    Some(r) => {
                        fd_magnetic_stress(r, self.metric, eps, b, self.quadratic)?
                    }
                    None => CovectorValuedForm::zero(2),
                };
                elastic.add(&mag)
            }
        }
    }

    /// Induction partial derivative: the field intensity 1-form.
    pub fn d2(&self, eps: &VectorValuedForm, b: &PCovector) -> Result<PCovector> {
        let Some(r) = self.r else { return Ok(PCovector::zero(1)) };
        match self.mode {
            CouplingMode::ModelA => magnetic_field_intensity(r, self.metric, b),
            CouplingMode::ModelB | CouplingMode::ModelBLinearized => {
                let ghat = deformed_metric(self.metric, eps, self.quadratic)?;
                Ok(hodge_star(&ghat, b).scaled(r))
            }
        }
    }

    /// Splits the energy into elastic and magnetic callables under the
    /// given convention; their sum is the total energy pointwise.
    pub fn decompose(&self, convention: DecompositionConvention) -> EnergyDecomposition<'_> {
        EnergyDecomposition { law: *self, convention }
    }
}

/// The two-part split of a coupled energy density.
pub struct EnergyDecomposition<'a> {
    law: PointLaw<'a>,
    convention: DecompositionConvention,
}

impl EnergyDecomposition<'_> {
    pub fn elastic(&self, eps: &VectorValuedForm, b: &PCovector) -> Result<PCovector> {
        match self.convention {
            DecompositionConvention::ElasticAtZeroB => {
                self.law.energy(eps, &PCovector::zero(2))
            }
            DecompositionConvention::MagneticAtZeroEps => {
                let _ = b;
                self.law.energy(eps, b)?.sub(&self.magnetic(eps, b)?)
            }
        }
    }

    pub fn magnetic(&self, eps: &VectorValuedForm, b: &PCovector) -> Result<PCovector> {
        match self.convention {
            DecompositionConvention::ElasticAtZeroB => {
                self.law.energy(eps, b)?.sub(&self.law.energy(eps, &PCovector::zero(2))?)
            }
            DecompositionConvention::MagneticAtZeroEps => {
                self.law.energy(&VectorValuedForm::zero(1), b)
            }
        }
    }
}

/// Analytic strain derivative of the linearized deformed-metric magnetic
/// energy, returned through the stress isomorphism.
///
/// Writing the energy coefficient as `1/2 r q(eps) s(eps)` with
/// `q = <b,b>_Ghat` and `s = sqrt(det Ghat)`, the directional derivative
/// along `delta` uses `dGhat = G delta + delta^T G` and
/// `dq = tr(X dGhat X B X B)`, `ds = s/2 tr(X dGhat)` for `X = Ghat^{-1}`
/// and `B` the antisymmetric component matrix of the induction.
pub fn linearized_magnetic_stress(
    r: f64,
    metric: &Metric,
    eps: &VectorValuedForm,
    b: &PCovector,
    include_quadratic: bool,
) -> Result<CovectorValuedForm> {
    check_reluctivity(r)?;
    // the analytic route is exact only for the affine metric map; callers
    // selecting the quadratic term go through the finite-difference path
    if include_quadratic {
        return fd_magnetic_stress(r, metric, eps, b, true);
    }
    let ghat = deformed_tensor(metric, eps, false);
    if Metric::new(ghat).is_err() {
        return Err(Error::StrainTooLarge);
    }
    let x = mat_inverse(&ghat).ok_or(Error::StrainTooLarge)?;
    let det = mat_det(&ghat);
    let s = metric.orientation_sign() * det.sqrt();
    let bmat = b.antisym_matrix();
    let xbxb = mat_mul(&x, &mat_mul(&bmat, &mat_mul(&x, &bmat)));
    let q = -0.5 * trace(&xbxb);
    let g = metric.tensor();

    let mut coeffs = [[0.0; 3]; 3];
    for l in 0..3 {
        for m in 0..3 {
            // direction delta = e_l (x) a^m: component matrix has a 1 at
            // row l, column m
            let mut delta = [[0.0; 3]; 3];
            delta[l][m] = 1.0;
            let gd = mat_mul(g, &delta);
            let mut dghat = gd;
            for i in 0..3 {
                for j in 0..3 {
                    dghat[i][j] += gd[j][i];
                }
            }
            let xdg = mat_mul(&x, &dghat);
            let dq = trace(&mat_mul(&xdg, &xbxb));
            let ds = 0.5 * s * trace(&xdg);
            coeffs[l][m] = 0.5 * r * (dq * s + q * ds);
        }
    }
    Ok(operator_coeffs_to_stress(&coeffs))
}

/// Central finite-difference strain derivative of the deformed-metric
/// magnetic energy (relative step 1e-6), for the full quadratic metric.
pub fn fd_magnetic_stress(
    r: f64,
    metric: &Metric,
    eps: &VectorValuedForm,
    b: &PCovector,
    include_quadratic: bool,
) -> Result<CovectorValuedForm> {
    let h = 1e-6 * eps.norm_inf().max(1.0);
    let mut coeffs = [[0.0; 3]; 3];
    for l in 0..3 {
        for m in 0..3 {
            let delta = VectorValuedForm::basis(1, l, m);
            let plus = eps.add(&delta.scaled(h))?;
            let minus = eps.add(&delta.scaled(-h))?;
            let ep = model_b_magnetic_energy(r, metric, &plus, b, include_quadratic)?;
            let em = model_b_magnetic_energy(r, metric, &minus, b, include_quadratic)?;
            coeffs[l][m] = (ep.components()[0] - em.components()[0]) / (2.0 * h);
        }
    }
    Ok(operator_coeffs_to_stress(&coeffs))
}

fn trace(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::COMP_COUNT;
    use crate::valued::dot_wedge;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(99)
    }

    fn random_vv1(rng: &mut impl Rng, scale: f64) -> VectorValuedForm {
        let mut m = [[0.0; 3]; 3];
        for row in &mut m {
            for x in row {
                *x = rng.gen_range(-scale..scale);
            }
        }
        VectorValuedForm::from_component_matrix(m)
    }

    fn random_form(rng: &mut impl Rng, degree: usize) -> PCovector {
        let c: Vec<f64> = (0..COMP_COUNT[degree]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        PCovector::new(degree, &c).unwrap()
    }

    fn random_metric(rng: &mut impl Rng) -> Metric {
        let mut a = [[0.0; 3]; 3];
        for row in &mut a {
            for x in row.iter_mut() {
                *x = rng.gen_range(-0.5..0.5);
            }
        }
        let mut g = mat_mul(&mat_transpose(&a), &a);
        for i in 0..3 {
            g[i][i] += 1.0;
        }
        Metric::new(g).unwrap()
    }

    #[test]
    fn elastic_energy_worked_examples() {
        let g = Metric::euclidean();
        let mat = IsotropicElastic::new(2.0, 1.0).unwrap();
        let e = elastic_energy_density(&mat, &g, &identity_form()).unwrap();
        assert!((e.components()[0] - 12.0).abs() < 1e-14);

        let zero = VectorValuedForm::zero(1);
        assert_eq!(elastic_energy_density(&mat, &g, &zero).unwrap().components(), &[0.0]);

        // antisymmetric strain carries no energy: tr = 0, tr(eps^2) = -2,
        // <eps,eps> = 2
        let skew = VectorValuedForm::from_component_matrix([
            [0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0],
        ]);
        let mat = IsotropicElastic::new(1.3, 0.7).unwrap();
        let e = elastic_energy_density(&mat, &g, &skew).unwrap();
        assert!(e.components()[0].abs() < 1e-14);
    }

    #[test]
    fn elastic_energy_vanishes_only_on_antisymmetric_strain() {
        let mut rng = rng();
        let g = Metric::euclidean();
        let mat = IsotropicElastic::new(1.0, 1.0).unwrap();
        for _ in 0..200 {
            let eps = random_vv1(&mut rng, 1.0);
            let e = elastic_energy_density(&mat, &g, &eps).unwrap().components()[0];
            assert!(e >= -1e-14);
            let s = sym(&g, &eps).unwrap();
            if s.norm_inf() > 1e-6 {
                assert!(e > 0.0);
            }
        }
    }

    #[test]
    fn elastic_stress_worked_examples() {
        let g = Metric::euclidean();
        let mat = IsotropicElastic::new(1.0, 1.0).unwrap();
        let sigma = elastic_stress(&mat, &g, &identity_form()).unwrap();
        let expect = hodge_flat(&g, &identity_form()).scaled(5.0);
        assert!(sigma.sub(&expect).unwrap().norm_inf() < 1e-14);

        let skew = VectorValuedForm::from_component_matrix([
            [0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0],
        ]);
        assert!(elastic_stress(&mat, &g, &skew).unwrap().norm_inf() < 1e-15);
    }

    /// Central-difference check of an analytic directional derivative;
    /// returns |fd - analytic| for each step.
    fn fd_errors(
        energy: impl Fn(f64) -> f64,
        analytic: f64,
        steps: &[f64],
    ) -> Vec<f64> {
        steps
            .iter()
            .map(|&h| {
                let fd = (energy(h) - energy(-h)) / (2.0 * h);
                (fd - analytic).abs()
            })
            .collect()
    }

    #[test]
    fn elastic_stress_is_the_energy_derivative() {
        // quadratic energy: the central difference is exact to roundoff
        let mut rng = rng();
        for _ in 0..50 {
            let g = random_metric(&mut rng);
            let mat = IsotropicElastic::new(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0))
                .unwrap();
            let eps = random_vv1(&mut rng, 0.5);
            let delta = random_vv1(&mut rng, 1.0);
            let sigma = elastic_stress(&mat, &g, &eps).unwrap();
            let pairing = dot_wedge(&sigma, &delta).unwrap().components()[0];
            let energy = |h: f64| {
                elastic_energy_density(&mat, &g, &eps.add(&delta.scaled(h)).unwrap())
                    .unwrap()
                    .components()[0]
            };
            for err in fd_errors(energy, pairing, &[1e-3, 1e-4, 1e-5]) {
                assert!(err < 1e-9, "fd mismatch {err}");
            }
        }
    }

    #[test]
    fn magnetic_density_and_intensity() {
        let g = Metric::euclidean();
        let b = PCovector::basis(2, 0); // dx∧dy
        let phi = magnetic_energy_density(1.0, &g, &b).unwrap();
        assert!((phi.components()[0] - 0.5).abs() < 1e-15);
        let h = magnetic_field_intensity(1.0, &g, &b).unwrap();
        assert_eq!(h.components(), &[0.0, 0.0, 1.0]); // dz
        let h2 = magnetic_field_intensity(2.0, &g, &b).unwrap();
        assert_eq!(h2.components(), &[0.0, 0.0, 2.0]);
        assert!(magnetic_energy_density(0.0, &g, &b).is_err());
    }

    #[test]
    fn field_intensity_is_the_energy_derivative() {
        let mut rng = rng();
        for _ in 0..50 {
            let g = random_metric(&mut rng);
            let r = rng.gen_range(0.5..3.0);
            let b = random_form(&mut rng, 2);
            let db = random_form(&mut rng, 2);
            let h = magnetic_field_intensity(r, &g, &b).unwrap();
            let pairing = wedge(&h, &db).unwrap().components()[0];
            let energy = |t: f64| {
                magnetic_energy_density(r, &g, &b.add(&db.scaled(t)).unwrap())
                    .unwrap()
                    .components()[0]
            };
            for err in fd_errors(energy, pairing, &[1e-3, 1e-4, 1e-5]) {
                assert!(err < 1e-9);
            }
        }
    }

    #[test]
    fn maxwell_stress_of_a_uniform_field() {
        let g = Metric::euclidean();
        let r = 1.5;
        let bmag = 2.0;
        let b = PCovector::basis(2, 0).scaled(bmag); // B dx∧dy
        let s = maxwell_stress(r, &g, &VectorValuedForm::zero(1), &b).unwrap();
        // tension 1/2 r B^2 along the field direction
        let row3 = s.row(2);
        assert!((row3.components()[0] - 0.5 * r * bmag * bmag).abs() < 1e-13);
        assert!(row3.components()[1].abs() < 1e-13 && row3.components()[2].abs() < 1e-13);

        let zero = maxwell_stress(r, &g, &VectorValuedForm::zero(1), &PCovector::zero(2)).unwrap();
        assert_eq!(zero.norm_inf(), 0.0);
    }

    #[test]
    fn maxwell_stress_is_quadratic_in_b() {
        let mut rng = rng();
        for _ in 0..100 {
            let g = random_metric(&mut rng);
            let r = rng.gen_range(0.2..2.0);
            let b = random_form(&mut rng, 2);
            let c: f64 = rng.gen_range(-2.0..2.0);
            let eps = random_vv1(&mut rng, 0.1);
            let s1 = maxwell_stress(r, &g, &eps, &b).unwrap();
            let s2 = maxwell_stress(r, &g, &eps, &b.scaled(c)).unwrap();
            assert!(s2.sub(&s1.scaled(c * c)).unwrap().norm_inf() < 1e-12);
        }
    }

    #[test]
    fn deformed_metric_examples() {
        let g = Metric::euclidean();
        let zero = VectorValuedForm::zero(1);
        let ghat = deformed_metric(&g, &zero, true).unwrap();
        assert_eq!(ghat.tensor(), g.tensor());

        let c = 0.05;
        let eps = identity_form().scaled(c);
        let ghat = deformed_metric(&g, &eps, true).unwrap();
        for i in 0..3 {
            assert!((ghat.tensor()[i][i] - (1.0 + c) * (1.0 + c)).abs() < 1e-14);
        }

        // matrix oracle: (I + A)^T (I + A)
        let mut rng = rng();
        for _ in 0..100 {
            let eps = random_vv1(&mut rng, 0.05);
            let ghat = deformed_metric(&g, &eps, true).unwrap();
            let a = eps.component_matrix();
            let mut ia = a;
            for i in 0..3 {
                ia[i][i] += 1.0;
            }
            let oracle = mat_mul(&mat_transpose(&ia), &ia);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((ghat.tensor()[i][j] - oracle[i][j]).abs() < 1e-14);
                }
            }
        }

        // strain far past the admissible range loses definiteness
        let eps = identity_form().scaled(-1.0);
        assert!(matches!(deformed_metric(&g, &eps, true), Err(Error::StrainTooLarge)));
        let eps = identity_form().scaled(-0.6);
        assert!(matches!(deformed_metric(&g, &eps, false), Err(Error::StrainTooLarge)));
        // and stays definite for moderate strains
        for _ in 0..50 {
            let eps = random_vv1(&mut rng, 0.1);
            assert!(deformed_metric(&g, &eps, true).is_ok());
        }
    }

    #[test]
    fn model_b_energy_examples() {
        let g = Metric::euclidean();
        let b = PCovector::basis(2, 0);
        let r = 1.0;
        // zero strain reduces to the reference energy
        let e0 = model_b_magnetic_energy(r, &g, &VectorValuedForm::zero(1), &b, true).unwrap();
        let phi = magnetic_energy_density(r, &g, &b).unwrap();
        assert!((e0.components()[0] - phi.components()[0]).abs() < 1e-15);

        // isotropic stretch: star of 2-forms scales by 1/(1+c)
        let c = 0.07;
        let eps = identity_form().scaled(c);
        let e = model_b_magnetic_energy(r, &g, &eps, &b, true).unwrap();
        let expect = 0.5 * r / (1.0 + c);
        assert!((e.components()[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn linearized_stress_matches_finite_differences_at_order_two() {
        let mut rng = rng();
        let g = Metric::euclidean();
        let mat = IsotropicElastic::new(1.2, 0.9).unwrap();
        let steps = [1e-3, 1e-4, 1e-5];
        for _ in 0..20 {
            let r = rng.gen_range(0.5..2.0);
            let eps = random_vv1(&mut rng, 0.05);
            let b = random_form(&mut rng, 2);
            let delta = random_vv1(&mut rng, 1.0);
            let sigma_mag = linearized_magnetic_stress(r, &g, &eps, &b, false).unwrap();
            let sigma_el = elastic_stress(&mat, &g, &eps).unwrap();
            let pairing =
                dot_wedge(&sigma_mag.add(&sigma_el).unwrap(), &delta).unwrap().components()[0];
            let energy = |h: f64| {
                let e = eps.add(&delta.scaled(h)).unwrap();
                model_b_magnetic_energy(r, &g, &e, &b, false).unwrap().components()[0]
                    + elastic_energy_density(&mat, &g, &e).unwrap().components()[0]
            };
            let errs = fd_errors(energy, pairing, &steps);
            // non-quadratic energy: genuine second-order convergence
            let slope = (errs[0] / errs[1]).log10();
            assert!(errs[2] < 1e-8, "largest-step agreement {errs:?}");
            assert!((1.5..2.5).contains(&slope), "observed order {slope}, errors {errs:?}");
        }
    }

    #[test]
    fn point_law_model_a_is_separable() {
        let mut rng = rng();
        let model = MagnetoElasticEnergy::new(CouplingMode::ModelA, Metric::euclidean())
            .with_elastic(1, IsotropicElastic::new(2.0, 1.0).unwrap())
            .with_reluctivity(1, 1.5);
        let law = model.point_law(1);
        for _ in 0..50 {
            let eps = random_vv1(&mut rng, 0.3);
            let b1 = random_form(&mut rng, 2);
            let b2 = random_form(&mut rng, 2);
            // d1 ignores b, d2 ignores eps
            let d1a = law.d1(&eps, &b1).unwrap();
            let d1b = law.d1(&eps, &b2).unwrap();
            assert!(d1a.sub(&d1b).unwrap().norm_inf() < 1e-15);
            let expect = elastic_stress(&IsotropicElastic::new(2.0, 1.0).unwrap(), &model.metric, &eps)
                .unwrap();
            assert!(d1a.sub(&expect).unwrap().norm_inf() < 1e-15);
            let d2 = law.d2(&eps, &b1).unwrap();
            let expect = magnetic_field_intensity(1.5, &model.metric, &b1).unwrap();
            assert!(d2.sub(&expect).unwrap().norm_inf() < 1e-15);
        }
    }

    #[test]
    fn point_law_model_b_d2_at_zero_strain() {
        let model = MagnetoElasticEnergy::new(CouplingMode::ModelB, Metric::euclidean())
            .with_reluctivity(1, 2.0);
        let law = model.point_law(1);
        let b = PCovector::basis(2, 0);
        let d2 = law.d2(&VectorValuedForm::zero(1), &b).unwrap();
        let expect = magnetic_field_intensity(2.0, &model.metric, &b).unwrap();
        assert!(d2.sub(&expect).unwrap().norm_inf() < 1e-15);
    }

    #[test]
    fn model_b_d1_matches_its_own_energy() {
        // full quadratic metric: finite-difference d1 against a coarser
        // independent sweep of the energy
        let mut rng = rng();
        let model = MagnetoElasticEnergy::new(CouplingMode::ModelB, Metric::euclidean())
            .with_elastic(1, IsotropicElastic::new(1.0, 1.0).unwrap())
            .with_reluctivity(1, 1.0);
        let law = model.point_law(1);
        for _ in 0..10 {
            let eps = random_vv1(&mut rng, 0.05);
            let b = random_form(&mut rng, 2);
            let delta = random_vv1(&mut rng, 1.0);
            let sigma = law.d1(&eps, &b).unwrap();
            let pairing = dot_wedge(&sigma, &delta).unwrap().components()[0];
            let energy = |h: f64| {
                law.energy(&eps.add(&delta.scaled(h)).unwrap(), &b).unwrap().components()[0]
            };
            let errs = fd_errors(energy, pairing, &[1e-3, 1e-4]);
            assert!(errs[1] < 1e-7, "{errs:?}");
        }
    }

    #[test]
    fn antisymmetric_variations_do_no_work() {
        let mut rng = rng();
        for _ in 0..200 {
            let g = random_metric(&mut rng);
            let mat = IsotropicElastic::new(rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0))
                .unwrap();
            let eps = random_vv1(&mut rng, 1.0);
            let sigma = elastic_stress(&mat, &g, &eps).unwrap();
            let anti = crate::valued::skw(&g, &random_vv1(&mut rng, 1.0)).unwrap();
            let w = dot_wedge(&sigma, &anti).unwrap().components()[0];
            assert!(w.abs() < 1e-12 * (1.0 + sigma.norm_inf()));
        }
    }

    #[test]
    fn decomposition_sums_to_the_total() {
        let mut rng = rng();
        for mode in [CouplingMode::ModelA, CouplingMode::ModelB, CouplingMode::ModelBLinearized] {
            let model = MagnetoElasticEnergy::new(mode, Metric::euclidean())
                .with_elastic(1, IsotropicElastic::new(1.0, 0.8).unwrap())
                .with_reluctivity(1, 1.3);
            let law = model.point_law(1);
            for convention in
                [DecompositionConvention::ElasticAtZeroB, DecompositionConvention::MagneticAtZeroEps]
            {
                let parts = law.decompose(convention);
                for _ in 0..30 {
                    let eps = random_vv1(&mut rng, 0.05);
                    let b = random_form(&mut rng, 2);
                    let total = law.energy(&eps, &b).unwrap();
                    let sum = parts
                        .elastic(&eps, &b)
                        .unwrap()
                        .add(&parts.magnetic(&eps, &b).unwrap())
                        .unwrap();
                    assert!(total.sub(&sum).unwrap().norm_inf() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn elastic_part_at_zero_b_is_b_independent() {
        let mut rng = rng();
        let model = MagnetoElasticEnergy::new(CouplingMode::ModelB, Metric::euclidean())
            .with_elastic(1, IsotropicElastic::new(1.0, 0.8).unwrap())
            .with_reluctivity(1, 1.3);
        let law = model.point_law(1);
        let parts = law.decompose(DecompositionConvention::ElasticAtZeroB);
        let eps = random_vv1(&mut rng, 0.05);
        let reference = parts.elastic(&eps, &PCovector::zero(2)).unwrap();
        for _ in 0..30 {
            let b = random_form(&mut rng, 2);
            let e = parts.elastic(&eps, &b).unwrap();
            assert!(e.sub(&reference).unwrap().norm_inf() < 1e-15);
        }
        // the two conventions coincide on the separable model only
        let sep = MagnetoElasticEnergy::new(CouplingMode::ModelA, Metric::euclidean())
            .with_elastic(1, IsotropicElastic::new(1.0, 0.8).unwrap())
            .with_reluctivity(1, 1.3);
        let sep_law = sep.point_law(1);
        let da = sep_law.decompose(DecompositionConvention::ElasticAtZeroB);
        let db = sep_law.decompose(DecompositionConvention::MagneticAtZeroEps);
        let b = random_form(&mut rng, 2);
        let ea = da.elastic(&eps, &b).unwrap();
        let eb = db.elastic(&eps, &b).unwrap();
        assert!(ea.sub(&eb).unwrap().norm_inf() < 1e-14);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(IsotropicElastic::new(1.0, 0.0).is_err());
        assert!(IsotropicElastic::new(-10.0, 1.0).is_err());
        assert!(check_reluctivity(-1.0).is_err());
    }

    #[test]
    fn linearized_stress_at_zero_strain_is_the_maxwell_stress() {
        // at the reference configuration the energy-derived magnetic
        // stress of the linearized metric coincides with the prescribed
        // Maxwell mapping
        let mut rng = rng();
        let g = Metric::euclidean();
        for _ in 0..100 {
            let r = rng.gen_range(0.2..3.0);
            let b = random_form(&mut rng, 2);
            let zero = VectorValuedForm::zero(1);
            let from_energy = linearized_magnetic_stress(r, &g, &zero, &b, false).unwrap();
            let prescribed = maxwell_stress(r, &g, &zero, &b).unwrap();
            assert!(
                from_energy.sub(&prescribed).unwrap().norm_inf()
                    < 1e-13 * (1.0 + prescribed.norm_inf()),
                "energy route and mapping disagree at zero strain"
            );
        }
    }
}
