//! Pointwise exterior algebra in a 3-dimensional real vector space.
//!
//! Components are stored against the increasing multi-index bases
//! `[1, 2, 3]`, `[12, 13, 23]`, `[123]`; antisymmetry is implicit in the
//! storage, never duplicated. The dimension is hard-fixed at 3 and the
//! degree travels with the value, not the type.
//!
//! Twisted forms are represented as ordinary forms after fixing a global
//! orientation through [`Metric::orientation_sign`]; all target domains are
//! orientable subsets of Euclidean space, so no twisted-form bookkeeping is
//! carried around.

use crate::{Error, Result};

/// Fixed spatial dimension.
pub const DIM: usize = 3;

/// Binomial coefficients C(3, p) for p = 0..3: the component counts.
pub const COMP_COUNT: [usize; 4] = [1, 3, 3, 1];

/// Increasing index pairs for degree-2 storage order `[12, 13, 23]`
/// (0-based).
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Axis missing from each entry of [`PAIRS`]: the Hodge-complement partner.
pub const PAIR_COMPLEMENT: [usize; 3] = [2, 1, 0];

/// Permutation sign of `(j, k, complement)` for each entry of [`PAIRS`].
pub const PAIR_COMPLEMENT_SIGN: [f64; 3] = [1.0, -1.0, 1.0];

fn check_degree(degree: usize, context: &'static str) -> Result<()> {
    if degree > 3 {
        return Err(Error::InvalidDegree { degree, context });
    }
    Ok(())
}

/// A p-covector: an alternating p-linear map on vectors, p in 0..=3.
///
/// Only the first `C(3, p)` entries of the component array are meaningful.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PCovector {
    degree: usize,
    comps: [f64; 3],
}

/// A p-vector, stored exactly like [`PCovector`] but living in the dual
/// role: degree-1 p-vectors are ordinary tangent vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PVector {
    degree: usize,
    comps: [f64; 3],
}

macro_rules! impl_graded {
    ($ty:ident) => {
        impl $ty {
            /// Builds a value of the given degree from its increasing
            /// multi-index components.
            pub fn new(degree: usize, comps: &[f64]) -> Result<Self> {
                check_degree(degree, stringify!($ty))?;
                if comps.len() != COMP_COUNT[degree] {
                    return Err(Error::InvalidDegree {
                        degree,
                        context: concat!(stringify!($ty), ": wrong component count"),
                    });
                }
                let mut c = [0.0; 3];
                c[..comps.len()].copy_from_slice(comps);
                Ok(Self { degree, comps: c })
            }

            pub fn zero(degree: usize) -> Self {
                Self { degree, comps: [0.0; 3] }
            }

            /// The `idx`-th basis element of the given degree.
            pub fn basis(degree: usize, idx: usize) -> Self {
                assert!(degree <= 3 && idx < COMP_COUNT[degree]);
                let mut c = [0.0; 3];
                c[idx] = 1.0;
                Self { degree, comps: c }
            }

            pub fn degree(&self) -> usize {
                self.degree
            }

            /// The meaningful components (length `C(3, degree)`).
            pub fn components(&self) -> &[f64] {
                &self.comps[..COMP_COUNT[self.degree]]
            }

            #[allow(dead_code)]
            pub(crate) fn comps_raw(&self) -> [f64; 3] {
                self.comps
            }

            #[allow(dead_code)]
            pub(crate) fn from_raw(degree: usize, comps: [f64; 3]) -> Self {
                Self { degree, comps }
            }

            pub fn scaled(&self, s: f64) -> Self {
                let mut c = self.comps;
                for x in &mut c {
                    *x *= s;
                }
                Self { degree: self.degree, comps: c }
            }

            /// Componentwise sum; degrees must match.
            pub fn add(&self, other: &Self) -> Result<Self> {
                if self.degree != other.degree {
                    return Err(Error::DegreeMismatch(self.degree, other.degree));
                }
                let mut c = self.comps;
                for (x, y) in c.iter_mut().zip(other.comps.iter()) {
                    *x += y;
                }
                Ok(Self { degree: self.degree, comps: c })
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.add(&other.scaled(-1.0))
            }

            pub fn norm_inf(&self) -> f64 {
                self.components().iter().fold(0.0, |m, c| m.max(c.abs()))
            }
        }
    };
}

impl_graded!(PCovector);
impl_graded!(PVector);

impl PCovector {
    /// Evaluates the form on a tuple of `degree` vectors.
    pub fn evaluate(&self, vectors: &[[f64; 3]]) -> f64 {
        assert_eq!(vectors.len(), self.degree);
        match self.degree {
            0 => self.comps[0],
            1 => dot3(&self.comps, &vectors[0]),
            2 => {
                let (u, v) = (vectors[0], vectors[1]);
                PAIRS
                    .iter()
                    .enumerate()
                    .map(|(idx, &(j, k))| self.comps[idx] * (u[j] * v[k] - u[k] * v[j]))
                    .sum()
            }
            3 => self.comps[0] * det3_cols(&vectors[0], &vectors[1], &vectors[2]),
            _ => unreachable!(),
        }
    }

    /// The full antisymmetric component matrix of a degree-2 form.
    pub(crate) fn antisym_matrix(&self) -> [[f64; 3]; 3] {
        debug_assert_eq!(self.degree, 2);
        let mut b = [[0.0; 3]; 3];
        for (idx, &(j, k)) in PAIRS.iter().enumerate() {
            b[j][k] = self.comps[idx];
            b[k][j] = -self.comps[idx];
        }
        b
    }
}

impl PVector {
    /// Degree-1 convenience constructor.
    pub fn vector(v: [f64; 3]) -> Self {
        Self { degree: 1, comps: v }
    }

    /// The Cartesian components of a degree-1 p-vector.
    pub fn as_vector(&self) -> [f64; 3] {
        debug_assert_eq!(self.degree, 1);
        self.comps
    }
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn det3_cols(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    dot3(a, &cross3(b, c))
}

pub(crate) fn mat_det(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub(crate) fn mat_inverse(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = mat_det(m);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((i + 1) % 3, (i + 2) % 3);
            let (c, d) = ((j + 1) % 3, (j + 2) % 3);
            // transposed cofactor
            inv[j][i] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) * inv_det;
        }
    }
    Some(inv)
}

pub(crate) fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub(crate) fn mat_transpose(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i];
        }
    }
    out
}

pub(crate) fn mat_vec(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [dot3(&m[0], v), dot3(&m[1], v), dot3(&m[2], v)]
}

fn cholesky_spd(m: &[[f64; 3]; 3]) -> bool {
    let mut l = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return false;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    true
}

/// A symmetric positive definite metric tensor together with the global
/// orientation sign that stands in for twisted-form bookkeeping.
#[derive(Clone, Copy, Debug)]
pub struct Metric {
    g: [[f64; 3]; 3],
    inv: [[f64; 3]; 3],
    det: f64,
    orientation_sign: f64,
}

impl Metric {
    /// Validates symmetry and positive definiteness (by Cholesky success).
    pub fn new(g: [[f64; 3]; 3]) -> Result<Self> {
        let scale = g.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..3 {
            for j in 0..3 {
                if (g[i][j] - g[j][i]).abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::InvalidMetric);
                }
            }
        }
        if !cholesky_spd(&g) {
            return Err(Error::InvalidMetric);
        }
        let inv = mat_inverse(&g).ok_or(Error::InvalidMetric)?;
        let det = mat_det(&g);
        Ok(Self { g, inv, det, orientation_sign: 1.0 })
    }

    pub fn euclidean() -> Self {
        Self::diagonal([1.0, 1.0, 1.0]).unwrap()
    }

    pub fn diagonal(d: [f64; 3]) -> Result<Self> {
        let mut g = [[0.0; 3]; 3];
        for i in 0..3 {
            g[i][i] = d[i];
        }
        Self::new(g)
    }

    /// Flips or sets the global orientation; `sign` must be +1 or -1.
    pub fn with_orientation(mut self, sign: i8) -> Self {
        assert!(sign == 1 || sign == -1);
        self.orientation_sign = sign as f64;
        self
    }

    pub fn orientation_sign(&self) -> f64 {
        self.orientation_sign
    }

    pub fn tensor(&self) -> &[[f64; 3]; 3] {
        &self.g
    }

    pub fn inverse(&self) -> &[[f64; 3]; 3] {
        &self.inv
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn sqrt_det(&self) -> f64 {
        self.det.sqrt()
    }
}

/// Exterior product of real-valued forms, by explicit shuffle tables.
///
/// Bilinear and graded anticommutative: `wedge(a, b) = (-1)^{pq} wedge(b, a)`.
pub fn wedge(a: &PCovector, b: &PCovector) -> Result<PCovector> {
    let (p, q) = (a.degree(), b.degree());
    if p + q > 3 {
        return Err(Error::DegreeOverflow(p, q));
    }
    let (ac, bc) = (a.comps_raw(), b.comps_raw());
    let out = match (p, q) {
        (0, _) => return Ok(b.scaled(ac[0])),
        (_, 0) => return Ok(a.scaled(bc[0])),
        (1, 1) => {
            let mut c = [0.0; 3];
            for (idx, &(j, k)) in PAIRS.iter().enumerate() {
                c[idx] = ac[j] * bc[k] - ac[k] * bc[j];
            }
            PCovector::from_raw(2, c)
        }
        (1, 2) => {
            // a ∧ B = (a1 B23 - a2 B13 + a3 B12) dx∧dy∧dz
            let v = ac[0] * bc[2] - ac[1] * bc[1] + ac[2] * bc[0];
            PCovector::from_raw(3, [v, 0.0, 0.0])
        }
        (2, 1) => {
            let v = bc[0] * ac[2] - bc[1] * ac[1] + bc[2] * ac[0];
            PCovector::from_raw(3, [v, 0.0, 0.0])
        }
        _ => unreachable!(),
    };
    Ok(out)
}

/// Interior product `i_v a` of a degree-1 p-vector with a p-covector:
/// `(i_v a)(w_1, ..., w_{p-1}) = a(v, w_1, ..., w_{p-1})`.
pub fn interior_product(v: &PVector, a: &PCovector) -> Result<PCovector> {
    if v.degree() != 1 {
        return Err(Error::InvalidDegree { degree: v.degree(), context: "interior_product vector" });
    }
    if a.degree() == 0 {
        return Err(Error::InvalidDegree { degree: 0, context: "interior_product form" });
    }
    let vv = v.as_vector();
    let ac = a.comps_raw();
    let out = match a.degree() {
        1 => PCovector::from_raw(0, [dot3(&ac, &vv), 0.0, 0.0]),
        2 => {
            let b = a.antisym_matrix();
            let mut c = [0.0; 3];
            for k in 0..3 {
                c[k] = (0..3).map(|j| vv[j] * b[j][k]).sum();
            }
            PCovector::from_raw(1, c)
        }
        3 => {
            // (i_v T)_{jk} = v^l T_{ljk}
            let t = ac[0];
            PCovector::from_raw(2, [vv[2] * t, -vv[1] * t, vv[0] * t])
        }
        _ => unreachable!(),
    };
    Ok(out)
}

/// Inner product of equal-degree covectors, extending `G^{-1}` to degree p
/// by Gram determinants.
pub fn inner_product(metric: &Metric, a: &PCovector, b: &PCovector) -> Result<f64> {
    if a.degree() != b.degree() {
        return Err(Error::DegreeMismatch(a.degree(), b.degree()));
    }
    let gi = metric.inverse();
    let (ac, bc) = (a.comps_raw(), b.comps_raw());
    let v = match a.degree() {
        0 => ac[0] * bc[0],
        1 => (0..3).map(|i| (0..3).map(|j| ac[i] * bc[j] * gi[i][j]).sum::<f64>()).sum(),
        2 => {
            let mut s = 0.0;
            for (ia, &(i, j)) in PAIRS.iter().enumerate() {
                for (ib, &(k, l)) in PAIRS.iter().enumerate() {
                    let gram = gi[i][k] * gi[j][l] - gi[i][l] * gi[j][k];
                    s += ac[ia] * bc[ib] * gram;
                }
            }
            s
        }
        3 => ac[0] * bc[0] / metric.det(),
        _ => unreachable!(),
    };
    Ok(v)
}

/// Lowers a tangent vector to a covector with the metric.
pub fn metric_flat(metric: &Metric, v: &PVector) -> Result<PCovector> {
    if v.degree() != 1 {
        return Err(Error::InvalidDegree { degree: v.degree(), context: "metric_flat" });
    }
    Ok(PCovector::from_raw(1, mat_vec(metric.tensor(), &v.as_vector())))
}

/// Raises a covector to a tangent vector with the inverse metric.
pub fn metric_sharp(metric: &Metric, a: &PCovector) -> Result<PVector> {
    if a.degree() != 1 {
        return Err(Error::InvalidDegree { degree: a.degree(), context: "metric_sharp" });
    }
    Ok(PVector::vector(mat_vec(metric.inverse(), &a.comps_raw())))
}

/// The volume form `orientation_sign * sqrt(det G) dx∧dy∧dz`.
pub fn volume_form(metric: &Metric) -> PCovector {
    PCovector::from_raw(3, [metric.orientation_sign() * metric.sqrt_det(), 0.0, 0.0])
}

/// Hodge star on p-covectors: the unique linear map with
/// `a ∧ star(b) = <a, b> Vol` for equal-degree `a`, `b`.
///
/// In 3-D Riemannian signature the star is involutive on every degree.
pub fn hodge_star(metric: &Metric, a: &PCovector) -> PCovector {
    let s = metric.orientation_sign();
    let sq = metric.sqrt_det();
    let gi = metric.inverse();
    let ac = a.comps_raw();
    match a.degree() {
        0 => PCovector::from_raw(3, [s * sq * ac[0], 0.0, 0.0]),
        1 => {
            // star a = i_{a#} Vol
            let v = mat_vec(gi, &ac);
            PCovector::from_raw(2, [s * sq * v[2], -s * sq * v[1], s * sq * v[0]])
        }
        2 => {
            // raise both indices, contract with the permutation symbol
            let b = a.antisym_matrix();
            let raised = mat_mul(&mat_mul(gi, &b), gi);
            let mut c = [0.0; 3];
            // (star B)_l = sqrt(det) B^{jk} eps_{jkl} summed over j<k
            c[0] = s * sq * raised[1][2];
            c[1] = -s * sq * raised[0][2];
            c[2] = s * sq * raised[0][1];
            PCovector::from_raw(1, c)
        }
        3 => PCovector::from_raw(0, [s * ac[0] / sq, 0.0, 0.0]),
        _ => unreachable!(),
    }
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Brute-force reference implementations used only by tests.

    use super::*;

    fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
        let mut out = Vec::new();
        let mut idx: Vec<usize> = (0..n).collect();
        permute(&mut idx, 0, &mut out);
        out
    }

    fn permute(idx: &mut Vec<usize>, k: usize, out: &mut Vec<(Vec<usize>, f64)>) {
        if k == idx.len() {
            out.push((idx.clone(), parity(idx)));
            return;
        }
        for i in k..idx.len() {
            idx.swap(k, i);
            permute(idx, k + 1, out);
            idx.swap(k, i);
        }
    }

    fn parity(p: &[usize]) -> f64 {
        let mut sign = 1.0;
        for i in 0..p.len() {
            for j in (i + 1)..p.len() {
                if p[i] > p[j] {
                    sign = -sign;
                }
            }
        }
        sign
    }

    /// Wedge by full antisymmetrization over all permutations, evaluated
    /// componentwise on basis tuples.
    pub fn wedge_by_permutation_sum(a: &PCovector, b: &PCovector) -> PCovector {
        let (p, q) = (a.degree(), b.degree());
        let n = p + q;
        assert!(n <= 3);
        let basis = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let tuples: Vec<Vec<usize>> = match n {
            0 => vec![vec![]],
            1 => (0..3).map(|i| vec![i]).collect(),
            2 => PAIRS.iter().map(|&(i, j)| vec![i, j]).collect(),
            3 => vec![vec![0, 1, 2]],
            _ => unreachable!(),
        };
        let fact = |m: usize| -> f64 { (1..=m).product::<usize>().max(1) as f64 };
        let mut comps = Vec::new();
        for tuple in &tuples {
            let mut value = 0.0;
            for (perm, sign) in permutations(n) {
                let first: Vec<[f64; 3]> = perm[..p].iter().map(|&i| basis[tuple[i]]).collect();
                let second: Vec<[f64; 3]> = perm[p..].iter().map(|&i| basis[tuple[i]]).collect();
                value += sign * a.evaluate(&first) * b.evaluate(&second);
            }
            comps.push(value / (fact(p) * fact(q)));
        }
        PCovector::new(n, &comps).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    fn random_form(rng: &mut impl Rng, degree: usize) -> PCovector {
        let comps: Vec<f64> = (0..COMP_COUNT[degree]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        PCovector::new(degree, &comps).unwrap()
    }

    fn random_metric(rng: &mut impl Rng) -> Metric {
        // A^T A + I is safely SPD
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

    fn assert_close(a: f64, b: f64, tol: f64) {
        let scale = a.abs().max(b.abs()).max(1.0);
        assert!((a - b).abs() <= tol * scale, "{a} vs {b}");
    }

    #[test]
    fn wedge_basis_duality() {
        let dx = PCovector::basis(1, 0);
        let dy = PCovector::basis(1, 1);
        let w = wedge(&dx, &dy).unwrap();
        let e1 = [1.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0];
        assert_eq!(w.evaluate(&[e1, e2]), 1.0);
    }

    #[test]
    fn wedge_of_one_form_with_itself_vanishes() {
        let mut rng = rng();
        for _ in 0..50 {
            let a = random_form(&mut rng, 1);
            let w = wedge(&a, &a).unwrap();
            assert!(w.norm_inf() < 1e-15);
        }
    }

    #[test]
    fn wedge_sum_example() {
        // (dx + dy) ∧ dz = dx∧dz + dy∧dz
        let a = PCovector::new(1, &[1.0, 1.0, 0.0]).unwrap();
        let dz = PCovector::basis(1, 2);
        let w = wedge(&a, &dz).unwrap();
        assert_eq!(w.components(), &[0.0, 1.0, 1.0]);
    }

    #[test]
    fn wedge_matches_permutation_oracle() {
        let mut rng = rng();
        for _ in 0..200 {
            let p = rng.gen_range(0..=3);
            let q = rng.gen_range(0..=(3 - p));
            let a = random_form(&mut rng, p);
            let b = random_form(&mut rng, q);
            let fast = wedge(&a, &b).unwrap();
            let slow = oracle::wedge_by_permutation_sum(&a, &b);
            for (x, y) in fast.components().iter().zip(slow.components()) {
                assert_close(*x, *y, 1e-14);
            }
        }
    }

    #[test]
    fn wedge_graded_anticommutativity() {
        let mut rng = rng();
        for _ in 0..1000 {
            let p = rng.gen_range(0..=3);
            let q = rng.gen_range(0..=(3 - p));
            let a = random_form(&mut rng, p);
            let b = random_form(&mut rng, q);
            let ab = wedge(&a, &b).unwrap();
            let ba = wedge(&b, &a).unwrap().scaled(if (p * q) % 2 == 0 { 1.0 } else { -1.0 });
            assert!(ab.sub(&ba).unwrap().norm_inf() < 1e-14);
        }
    }

    #[test]
    fn wedge_degree_overflow_is_an_error() {
        let a = PCovector::basis(2, 0);
        let b = PCovector::basis(2, 1);
        assert!(matches!(wedge(&a, &b), Err(Error::DegreeOverflow(2, 2))));
    }

    #[test]
    fn interior_product_basis_cases() {
        let dxdy = PCovector::basis(2, 0);
        let got = interior_product(&PVector::vector([1.0, 0.0, 0.0]), &dxdy).unwrap();
        assert_eq!(got.components(), &[0.0, 1.0, 0.0]); // dy
        let got = interior_product(&PVector::vector([0.0, 0.0, 1.0]), &dxdy).unwrap();
        assert!(got.norm_inf() == 0.0);
    }

    #[test]
    fn interior_product_of_volume() {
        // i_{e1+e2}(dx∧dy∧dz) = dy∧dz - dx∧dz
        let vol = PCovector::basis(3, 0);
        let got = interior_product(&PVector::vector([1.0, 1.0, 0.0]), &vol).unwrap();
        assert_eq!(got.components(), &[0.0, -1.0, 1.0]);
    }

    #[test]
    fn interior_product_rejects_scalars() {
        let c = PCovector::basis(0, 0);
        assert!(interior_product(&PVector::vector([1.0, 0.0, 0.0]), &c).is_err());
    }

    #[test]
    fn interior_product_is_an_antiderivation() {
        let mut rng = rng();
        for _ in 0..300 {
            let p = rng.gen_range(1..=2);
            let q = rng.gen_range(1..=(3 - p));
            let a = random_form(&mut rng, p);
            let b = random_form(&mut rng, q);
            let v = PVector::vector([
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]);
            let lhs = interior_product(&v, &wedge(&a, &b).unwrap()).unwrap();
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let rhs = wedge(&interior_product(&v, &a).unwrap(), &b)
                .unwrap()
                .add(&wedge(&a, &interior_product(&v, &b).unwrap()).unwrap().scaled(sign))
                .unwrap();
            assert!(lhs.sub(&rhs).unwrap().norm_inf() < 1e-13);
        }
    }

    #[test]
    fn hodge_star_euclidean_cases() {
        let g = Metric::euclidean();
        let dx = PCovector::basis(1, 0);
        assert_eq!(hodge_star(&g, &dx).components(), &[0.0, 0.0, 1.0]); // dy∧dz
        let vol = PCovector::basis(3, 0);
        assert_eq!(hodge_star(&g, &vol).components(), &[1.0]);
    }

    #[test]
    fn hodge_star_stretched_metric() {
        let g = Metric::diagonal([4.0, 1.0, 1.0]).unwrap();
        let dx = PCovector::basis(1, 0);
        let got = hodge_star(&g, &dx);
        assert_eq!(got.degree(), 2);
        assert_close(got.components()[2], 0.5, 1e-15); // ½ dy∧dz
        assert_close(got.components()[0], 0.0, 1e-15);
    }

    #[test]
    fn hodge_star_defining_identity_and_involution() {
        let mut rng = rng();
        for _ in 0..1000 {
            let g = random_metric(&mut rng);
            let p = rng.gen_range(0..=3);
            let a = random_form(&mut rng, p);
            let b = random_form(&mut rng, p);
            // a ∧ star b = <a,b> Vol
            let lhs = wedge(&a, &hodge_star(&g, &b)).unwrap();
            let rhs = volume_form(&g).scaled(inner_product(&g, &a, &b).unwrap());
            assert!(lhs.sub(&rhs).unwrap().norm_inf() <= 1e-12 * (1.0 + lhs.norm_inf()));
            // star star = id
            let ss = hodge_star(&g, &hodge_star(&g, &a));
            assert!(ss.sub(&a).unwrap().norm_inf() <= 1e-12 * (1.0 + a.norm_inf()));
        }
    }

    #[test]
    fn inner_product_cases() {
        let g = Metric::euclidean();
        let dxdy = PCovector::basis(2, 0);
        assert_eq!(inner_product(&g, &dxdy, &dxdy).unwrap(), 1.0);
        let dx = PCovector::basis(1, 0);
        let dy = PCovector::basis(1, 1);
        assert_eq!(inner_product(&g, &dx, &dy).unwrap(), 0.0);
        let g = Metric::diagonal([4.0, 1.0, 1.0]).unwrap();
        assert_close(inner_product(&g, &dx, &dx).unwrap(), 0.25, 1e-15);
        assert!(inner_product(&g, &dx, &dxdy).is_err());
    }

    #[test]
    fn flat_and_sharp_are_inverse() {
        let g = Metric::diagonal([4.0, 1.0, 1.0]).unwrap();
        let e1 = PVector::vector([1.0, 0.0, 0.0]);
        let flat = metric_flat(&g, &e1).unwrap();
        assert_eq!(flat.components(), &[4.0, 0.0, 0.0]);
        let mut rng = rng();
        for _ in 0..50 {
            let g = random_metric(&mut rng);
            let v = PVector::vector([
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]);
            let back = metric_sharp(&g, &metric_flat(&g, &v).unwrap()).unwrap();
            for i in 0..3 {
                assert_close(back.as_vector()[i], v.as_vector()[i], 1e-12);
            }
        }
    }

    #[test]
    fn volume_form_scaling() {
        assert_eq!(volume_form(&Metric::euclidean()).components(), &[1.0]);
        let g = Metric::diagonal([4.0, 1.0, 1.0]).unwrap();
        assert_eq!(volume_form(&g).components(), &[2.0]);
        let c = 1.7;
        let g1 = Metric::diagonal([c, c, c]).unwrap();
        assert_close(volume_form(&g1).components()[0], c.powf(1.5), 1e-14);
    }

    #[test]
    fn orientation_flip_negates_volume_and_star() {
        let g = Metric::euclidean().with_orientation(-1);
        assert_eq!(volume_form(&g).components(), &[-1.0]);
        let dx = PCovector::basis(1, 0);
        assert_eq!(hodge_star(&g, &dx).components(), &[0.0, 0.0, -1.0]);
        // the involution is insensitive to the orientation sign
        let ss = hodge_star(&g, &hodge_star(&g, &dx));
        assert_eq!(ss.components(), dx.components());
    }

    #[test]
    fn non_spd_metric_is_rejected() {
        assert!(Metric::diagonal([1.0, -1.0, 1.0]).is_err());
        assert!(Metric::new([[0.0; 3]; 3]).is_err());
        let asym = [[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(Metric::new(asym).is_err());
    }
}
