//! Operator algebra on `d`-dimensional Hilbert spaces and the Bloch-vector
//! picture that ties density operators and POVM effects to real vectors.
//!
//! An operator is expanded as
//!
//! ```text
//! A = (1/d) (tr(A) 1 + c_d Σ_i r_i σ_i),      c_d = sqrt(d (d - 1) / 2),
//! ```
//!
//! where `σ_i` are the `d² - 1` generalized Gell-Mann matrices normalized to
//! `tr(σ_i σ_j) = 2 δ_ij`. With this normalization a unit vector `r` yields a
//! rank-1 projector for qubits and the Pauli matrices appear unscaled.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategies::{Behavior, Scenario};

/// Tolerance for physical checks (positivity, trace, completeness).
pub const PHYSICAL_TOL: f64 = 1e-9;
/// Tolerance for algebraic identities and Hermiticity on construction.
pub const ALGEBRAIC_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `c_d = sqrt(d(d-1)/2)`.
pub fn bloch_scale(d: usize) -> f64 {
    ((d * (d - 1)) as f64 / 2.0).sqrt()
}

/// A dense Hermitian `d × d` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct HermitianOperator {
    matrix: DMatrix<Complex64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorRepr {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<OperatorRepr> for HermitianOperator {
    type Error = Error;

    fn try_from(repr: OperatorRepr) -> Result<Self> {
        let d = repr.dim;
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !rows_ok(&repr.re) || !rows_ok(&repr.im) {
            return Err(Error::ShapeMismatch(format!("operator entries must be {d}x{d}")));
        }
        let matrix = DMatrix::from_fn(d, d, |i, j| Complex64::new(repr.re[i][j], repr.im[i][j]));
        HermitianOperator::new(matrix)
    }
}

impl From<HermitianOperator> for OperatorRepr {
    fn from(op: HermitianOperator) -> Self {
        let d = op.dim();
        let re = (0..d).map(|i| (0..d).map(|j| op.matrix[(i, j)].re).collect()).collect();
        let im = (0..d).map(|i| (0..d).map(|j| op.matrix[(i, j)].im).collect()).collect();
        OperatorRepr { dim: d, re, im }
    }
}

impl HermitianOperator {
    /// Wraps `matrix`, checking it is square and Hermitian within
    /// [`ALGEBRAIC_TOL`]. The stored matrix is symmetrized exactly.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let (n, m) = matrix.shape();
        if n != m {
            return Err(Error::DimensionMismatch(n, m));
        }
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                dev = dev.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if dev > ALGEBRAIC_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let matrix = (&matrix + matrix.adjoint()).scale(0.5);
        Ok(Self { matrix })
    }

    // Callers guarantee Hermiticity (sums and real multiples of Hermitian operators).
    fn from_hermitian_unchecked(matrix: DMatrix<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_hermitian_unchecked(DMatrix::identity(d, d))
    }

    /// `1/d`, the maximally mixed state.
    pub fn maximally_mixed(d: usize) -> Self {
        Self::identity(d).scale(1.0 / d as f64)
    }

    /// Real diagonal operator.
    pub fn diagonal(entries: &[f64]) -> Self {
        let d = entries.len();
        Self::from_hermitian_unchecked(DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(entries[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_hermitian_unchecked(self.matrix.map(|z| z * s))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self::from_hermitian_unchecked(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self::from_hermitian_unchecked(&self.matrix - &other.matrix))
    }

    /// Hilbert–Schmidt product `tr(self · other)`, unclamped.
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (self.matrix[(i, j)] * other.matrix[(j, i)]).re;
            }
        }
        Ok(acc)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (&self.matrix - &other.matrix).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Coefficients `r_i` of the traceless part in the scaled Gell-Mann expansion.
    pub fn bloch_vector(&self) -> BlochVector {
        let d = self.dim();
        let cd = bloch_scale(d);
        let coords = generators_unchecked(d)
            .iter()
            .map(|s| d as f64 * s.trace_product(self).unwrap_or(0.0) / (2.0 * cd))
            .collect();
        BlochVector { dim: d, coords }
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(a, b))
    }
}

/// Real coordinates of the traceless component of an operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlochVector {
    pub dim: usize,
    pub coords: Vec<f64>,
}

impl BlochVector {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if coords.len() != dim * dim - 1 {
            return Err(Error::ShapeMismatch(format!(
                "a Bloch vector for d={dim} has {} coordinates, got {}",
                dim * dim - 1,
                coords.len()
            )));
        }
        Ok(Self { dim, coords })
    }

    pub fn qubit(v: [f64; 3]) -> Self {
        Self { dim: 2, coords: v.to_vec() }
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, coords: self.coords.iter().map(|c| c * s).collect() }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }
}

fn generators_unchecked(d: usize) -> Vec<HermitianOperator> {
    let unit = |i: usize, j: usize| {
        let mut m = DMatrix::from_element(d, d, ZERO);
        m[(i, j)] = ONE;
        m
    };
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in (j + 1)..d {
            out.push(HermitianOperator::from_hermitian_unchecked(unit(j, k) + unit(k, j)));
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            out.push(HermitianOperator::from_hermitian_unchecked(unit(j, k) * (-I) + unit(k, j) * I));
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; d];
        diag.iter_mut().take(l).for_each(|e| *e = norm);
        diag[l] = -(l as f64) * norm;
        out.push(HermitianOperator::diagonal(&diag));
    }
    out
}

/// The `d² - 1` generalized Gell-Mann matrices with `tr(σ_i σ_j) = 2 δ_ij`.
/// For `d = 2` these are the Pauli matrices `X, Y, Z` in that order.
pub fn generators(d: usize) -> Result<Vec<HermitianOperator>> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(generators_unchecked(d))
}

fn expand(r: &BlochVector, trace: f64) -> Result<HermitianOperator> {
    let d = r.dim;
    let gens = generators(d)?;
    if r.coords.len() != gens.len() {
        return Err(Error::ShapeMismatch(format!(
            "Bloch vector has {} coordinates, expected {}",
            r.coords.len(),
            gens.len()
        )));
    }
    let cd = bloch_scale(d);
    let mut m = DMatrix::identity(d, d) * Complex64::new(trace, 0.0);
    for (c, s) in r.coords.iter().zip(&gens) {
        m += s.matrix() * Complex64::new(cd * c, 0.0);
    }
    Ok(HermitianOperator::from_hermitian_unchecked(m / Complex64::new(d as f64, 0.0)))
}

/// `(1/d)(1 + c_d Σ v_i σ_i)` for a unit vector `v`; a rank-1 projector when `d = 2`.
pub fn projector_from_unit_vector(v: &BlochVector) -> Result<HermitianOperator> {
    let n = v.norm();
    if (n - 1.0).abs() > PHYSICAL_TOL {
        return Err(Error::InvalidArgument(format!("expected a unit vector, norm is {n}")));
    }
    expand(v, 1.0)
}

/// Unit-trace operator with Bloch vector `r`. Qubit vectors outside the unit ball are rejected.
pub fn state_from_bloch(r: &BlochVector) -> Result<HermitianOperator> {
    if r.dim == 2 && r.norm() > 1.0 + PHYSICAL_TOL {
        return Err(Error::NonphysicalState(format!("qubit Bloch vector has norm {} > 1", r.norm())));
    }
    expand(r, 1.0)
}

/// Born-rule probability `tr(effect · state)`, clamped into `[0, 1]`.
pub fn born(effect: &HermitianOperator, state: &HermitianOperator) -> Result<f64> {
    let p = effect.trace_product(state)?;
    Ok(p.clamp(-PHYSICAL_TOL, 1.0 + PHYSICAL_TOL).clamp(0.0, 1.0))
}

fn check_unit_interval(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("parameter {t} is outside [0, 1]")))
    }
}

/// Depolarizing channel `Φ_t(A) = t A + (1 - t) tr(A) 1/d`. Self-dual.
pub fn depolarize(op: &HermitianOperator, t: f64) -> Result<HermitianOperator> {
    check_unit_interval(t)?;
    let d = op.dim();
    let noise = HermitianOperator::identity(d).scale((1.0 - t) * op.trace() / d as f64);
    op.scale(t).add(&noise)
}

/// Inverse of [`depolarize`]: `(A - (1 - t) tr(A) 1/d) / t`. The result is a probe
/// operator and need not be positive.
pub fn inflate(op: &HermitianOperator, t: f64) -> Result<HermitianOperator> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidArgument(format!("inflation parameter {t} is outside (0, 1]")));
    }
    let d = op.dim();
    let noise = HermitianOperator::identity(d).scale((1.0 - t) * op.trace() / d as f64);
    Ok(op.sub(&noise)?.scale(1.0 / t))
}

/// A labelled density operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preparation {
    pub label: usize,
    pub state: HermitianOperator,
}

impl Preparation {
    /// Checks unit trace and positivity within [`PHYSICAL_TOL`].
    pub fn new(label: usize, state: HermitianOperator) -> Result<Self> {
        let tr = state.trace();
        if (tr - 1.0).abs() > PHYSICAL_TOL {
            return Err(Error::NonphysicalState(format!("trace is {tr}")));
        }
        let min = state.min_eigenvalue();
        if min < -PHYSICAL_TOL {
            return Err(Error::NonphysicalState(format!("minimum eigenvalue is {min}")));
        }
        Ok(Self { label, state })
    }

    /// Qubit state from a Bloch vector.
    pub fn qubit(label: usize, r: [f64; 3]) -> Result<Self> {
        Self::new(label, state_from_bloch(&BlochVector::qubit(r))?)
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }
}

/// A labelled POVM `{M_b}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    pub label: usize,
    pub effects: Vec<HermitianOperator>,
}

impl MeasurementSet {
    /// Checks positivity of each effect and completeness within [`PHYSICAL_TOL`].
    pub fn new(label: usize, effects: Vec<HermitianOperator>) -> Result<Self> {
        let Some(first) = effects.first() else {
            return Err(Error::InvalidMeasurement("no effects".into()));
        };
        let d = first.dim();
        let mut sum = DMatrix::from_element(d, d, ZERO);
        for (b, e) in effects.iter().enumerate() {
            check_dims(d, e.dim())?;
            let min = e.min_eigenvalue();
            if min < -PHYSICAL_TOL {
                return Err(Error::InvalidMeasurement(format!("effect {b} has eigenvalue {min}")));
            }
            sum += e.matrix();
        }
        let dev = (sum - DMatrix::<Complex64>::identity(d, d)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if dev > PHYSICAL_TOL {
            return Err(Error::InvalidMeasurement(format!("effects sum to identity only within {dev:e}")));
        }
        Ok(Self { label, effects })
    }

    /// Binary projective qubit measurement `{Π(v), Π(-v)}` along unit vector `v`.
    pub fn qubit_projective(label: usize, v: [f64; 3]) -> Result<Self> {
        let v = BlochVector::qubit(v);
        let plus = projector_from_unit_vector(&v)?;
        let minus = projector_from_unit_vector(&v.neg())?;
        Self::new(label, vec![plus, minus])
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }
}

/// Statistics `p(b|x,y) = tr(M_{b|y} ρ_x)`. The message alphabet of the
/// returned scenario is set to the Hilbert-space dimension.
pub fn behavior_of(preps: &[Preparation], meas: &[MeasurementSet]) -> Result<Behavior> {
    let (Some(p0), Some(m0)) = (preps.first(), meas.first()) else {
        return Err(Error::ShapeMismatch("empty preparation or measurement list".into()));
    };
    let d = p0.dim();
    let n_b = m0.outcomes();
    for m in meas {
        check_dims(d, m.dim())?;
        if m.outcomes() != n_b {
            return Err(Error::ShapeMismatch("measurements have different outcome counts".into()));
        }
    }
    for p in preps {
        check_dims(d, p.dim())?;
    }
    let scenario = Scenario::new(preps.len(), meas.len(), d, n_b)?;
    let mut beh = Behavior::zeros(scenario);
    for (x, p) in preps.iter().enumerate() {
        for (y, m) in meas.iter().enumerate() {
            for (b, e) in m.effects.iter().enumerate() {
                beh.set(b, x, y, born(e, &p.state)?);
            }
        }
    }
    Ok(beh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pauli_generators() {
        let g = generators(2).unwrap();
        assert_eq!(g.len(), 3);
        let x = &g[0].matrix;
        let y = &g[1].matrix;
        let z = &g[2].matrix;
        assert_eq!(x[(0, 1)], ONE);
        assert_eq!(y[(0, 1)], -I);
        assert_eq!(y[(1, 0)], I);
        assert_eq!(z[(0, 0)], ONE);
        assert_eq!(z[(1, 1)], -ONE);
        for s in &g {
            assert_abs_diff_eq!(s.trace(), 0.0);
        }
    }

    #[test]
    fn qutrit_generators_orthogonal() {
        let g = generators(3).unwrap();
        assert_eq!(g.len(), 8);
        for (i, a) in g.iter().enumerate() {
            assert_abs_diff_eq!(a.trace(), 0.0, epsilon = 1e-14);
            for (j, b) in g.iter().enumerate() {
                let want = if i == j { 2.0 } else { 0.0 };
                assert_abs_diff_eq!(a.trace_product(b).unwrap(), want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn generators_reject_small_dim() {
        assert!(matches!(generators(1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn z_projectors() {
        let up = projector_from_unit_vector(&BlochVector::qubit([0.0, 0.0, 1.0])).unwrap();
        let down = projector_from_unit_vector(&BlochVector::qubit([0.0, 0.0, -1.0])).unwrap();
        assert!(up.max_abs_diff(&HermitianOperator::diagonal(&[1.0, 0.0])) < 1e-15);
        assert!(down.max_abs_diff(&HermitianOperator::diagonal(&[0.0, 1.0])) < 1e-15);
        let sum = up.add(&down).unwrap();
        assert!(sum.max_abs_diff(&HermitianOperator::identity(2)) < 1e-12);
    }

    #[test]
    fn x_projector_spectrum() {
        let p = projector_from_unit_vector(&BlochVector::qubit([1.0, 0.0, 0.0])).unwrap();
        let ev = p.eigenvalues();
        assert_abs_diff_eq!(ev[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn projector_rejects_non_unit() {
        let r = projector_from_unit_vector(&BlochVector::qubit([0.5, 0.0, 0.0]));
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn states_from_bloch() {
        let mixed = state_from_bloch(&BlochVector::qubit([0.0; 3])).unwrap();
        assert!(mixed.max_abs_diff(&HermitianOperator::maximally_mixed(2)) < 1e-15);
        let up = state_from_bloch(&BlochVector::qubit([0.0, 0.0, 1.0])).unwrap();
        assert!(up.max_abs_diff(&HermitianOperator::diagonal(&[1.0, 0.0])) < 1e-15);
        let ev = state_from_bloch(&BlochVector::qubit([0.6, 0.0, 0.0])).unwrap().eigenvalues();
        assert_abs_diff_eq!(ev[0], 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], 0.8, epsilon = 1e-12);
        assert!(matches!(state_from_bloch(&BlochVector::qubit([0.8, 0.8, 0.0])), Err(Error::NonphysicalState(_))));
    }

    #[test]
    fn bloch_vector_roundtrip() {
        let r = BlochVector::qubit([0.1, -0.4, 0.3]);
        let back = state_from_bloch(&r).unwrap().bloch_vector();
        for (a, b) in r.coords.iter().zip(&back.coords) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn born_basics() {
        let up = HermitianOperator::diagonal(&[1.0, 0.0]);
        assert_abs_diff_eq!(born(&up, &up).unwrap(), 1.0);
        assert_abs_diff_eq!(born(&up, &HermitianOperator::maximally_mixed(2)).unwrap(), 0.5);
        assert!(born(&up, &HermitianOperator::identity(3)).is_err());
    }

    #[test]
    fn depolarize_endpoints() {
        let rho = state_from_bloch(&BlochVector::qubit([0.3, 0.2, -0.5])).unwrap();
        assert!(depolarize(&rho, 1.0).unwrap().max_abs_diff(&rho) < 1e-15);
        let full = depolarize(&rho, 0.0).unwrap();
        assert!(full.max_abs_diff(&HermitianOperator::maximally_mixed(2)) < 1e-15);
        assert!(depolarize(&rho, 1.5).is_err());
        assert!(depolarize(&rho, -0.1).is_err());
    }

    #[test]
    fn inflate_scales_bloch() {
        let rho = state_from_bloch(&BlochVector::qubit([0.0, 0.0, 0.79])).unwrap();
        let o = inflate(&rho, 0.79).unwrap();
        let r = o.bloch_vector();
        assert_abs_diff_eq!(r.coords[2], 1.0, epsilon = 1e-12);
        assert!(inflate(&rho, 1.0).unwrap().max_abs_diff(&rho) < 1e-15);
        let mixed = HermitianOperator::maximally_mixed(2);
        assert!(inflate(&mixed, 0.3).unwrap().max_abs_diff(&mixed) < 1e-15);
        assert!(inflate(&rho, 0.0).is_err());
    }

    #[test]
    fn operator_json_shape() {
        let op = HermitianOperator::diagonal(&[1.0, 0.0]);
        let s = serde_json::to_string(&op).unwrap();
        assert_eq!(s, r#"{"dim":2,"re":[[1.0,0.0],[0.0,0.0]],"im":[[0.0,0.0],[0.0,0.0]]}"#);
        let back: HermitianOperator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, op);
        let bad = r#"{"dim":2,"re":[[1.0,1.0],[0.0,0.0]],"im":[[0.0,0.0],[0.0,0.0]]}"#;
        assert!(serde_json::from_str::<HermitianOperator>(bad).is_err());
        let v: BlochVector = serde_json::from_str(r#"{"dim":2,"coords":[0,0,1]}"#).unwrap();
        assert_eq!(v.coords, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn measurement_validation() {
        assert!(MeasurementSet::qubit_projective(0, [0.0, 1.0, 0.0]).is_ok());
        let half = HermitianOperator::maximally_mixed(2);
        assert!(MeasurementSet::new(0, vec![half.clone()]).is_err());
        assert!(MeasurementSet::new(0, vec![half.clone(), half]).is_ok());
        let neg = HermitianOperator::diagonal(&[1.5, -0.5]);
        let comp = HermitianOperator::diagonal(&[-0.5, 1.5]);
        assert!(MeasurementSet::new(0, vec![neg, comp]).is_err());
    }

    #[test]
    fn behavior_examples() {
        let mixed = Preparation::new(0, HermitianOperator::maximally_mixed(2)).unwrap();
        let meas = vec![
            MeasurementSet::qubit_projective(0, [1.0, 0.0, 0.0]).unwrap(),
            MeasurementSet::qubit_projective(1, [0.0, 0.0, 1.0]).unwrap(),
        ];
        let beh = behavior_of(&[mixed], &meas).unwrap();
        assert!(beh.probabilities().iter().all(|&p| (p - 0.5).abs() < 1e-15));

        let up = Preparation::qubit(0, [0.0, 0.0, 1.0]).unwrap();
        let beh = behavior_of(&[up], &meas).unwrap();
        assert_abs_diff_eq!(beh.get(0, 0, 1), 1.0, epsilon = 1e-15);
    }
}
