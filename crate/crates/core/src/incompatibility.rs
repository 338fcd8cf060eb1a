//! Joint measurability of binary qubit measurements and their
//! incompatibility robustness under identity noise.
//!
//! A set `{M_{b|y}}` is jointly measurable when one parent POVM `{J_ℓ}`,
//! `ℓ = (ℓ_1, …, ℓ_n)`, reproduces every `M_{b|y}` as the marginal over
//! `ℓ_y = b`. For qubits `J_ℓ = (s_ℓ 𝟙 + u_ℓ·σ)/2` is positive iff
//! `s_ℓ ≥ ‖u_ℓ‖`, so the search is a small second-order-cone program.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::bloch::{BlochVector, HermitianOperator, MeasurementSet};
use crate::error::{Error, Result};

/// Default bisection gap for [`robustness`].
pub const DEFAULT_GAP_TOL: f64 = 1e-4;

/// Parents whose worst cone margin is at least `-FEASIBILITY_TOL` count as
/// feasible.
const FEASIBILITY_TOL: f64 = 1e-8;

/// Largest number of settings accepted (the parent has `2^n` outcomes).
const MAX_SETTINGS: usize = 12;

/// Three binary qubit measurements along `x̂` and `cos θ x̂ ± sin θ ẑ`.
pub fn mirror_symmetric(theta: f64) -> Result<Vec<MeasurementSet>> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidArgument(format!("angle {theta} is outside [0, π/2]")));
    }
    let (s, c) = theta.sin_cos();
    Ok(vec![
        MeasurementSet::qubit_projective(0, [1.0, 0.0, 0.0])?,
        MeasurementSet::qubit_projective(1, [c, 0.0, s])?,
        MeasurementSet::qubit_projective(2, [c, 0.0, -s])?,
    ])
}

/// A POVM with one effect per outcome tuple; `effects[k]` belongs to the
/// tuple whose `y`-th entry is bit `y` of `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentMeasurement {
    pub settings: usize,
    pub effects: Vec<HermitianOperator>,
}

impl ParentMeasurement {
    pub fn new(settings: usize, effects: Vec<HermitianOperator>) -> Result<Self> {
        if settings > MAX_SETTINGS || effects.len() != 1 << settings {
            return Err(Error::ShapeMismatch(format!(
                "{} effects do not match {settings} binary settings",
                effects.len()
            )));
        }
        Ok(Self { settings, effects })
    }

    /// Outcome tuple of `effects[k]`.
    pub fn outcome(&self, k: usize) -> Vec<usize> {
        (0..self.settings).map(|y| (k >> y) & 1).collect()
    }

    /// `Σ_{ℓ : ℓ_y = b} J_ℓ`.
    pub fn marginal(&self, y: usize, b: usize) -> Result<HermitianOperator> {
        let mut acc = HermitianOperator::diagonal(&[0.0, 0.0]);
        for (k, e) in self.effects.iter().enumerate() {
            if (k >> y) & 1 == b {
                acc = acc.add(e)?;
            }
        }
        Ok(acc)
    }
}

/// Bloch data `(tr M₀, m)` of `M₀ = (tr M₀ 𝟙 + m·σ)/2` per setting.
fn binary_qubit_data(meas: &[MeasurementSet]) -> Result<Vec<(f64, [f64; 3])>> {
    if meas.is_empty() || meas.len() > MAX_SETTINGS {
        return Err(Error::InvalidArgument(format!(
            "need between 1 and {MAX_SETTINGS} measurements, got {}",
            meas.len()
        )));
    }
    meas.iter()
        .map(|m| {
            if m.dim() != 2 {
                return Err(Error::DimensionMismatch(2, m.dim()));
            }
            if m.outcomes() != 2 {
                return Err(Error::ShapeMismatch(format!("measurement {} is not binary", m.label)));
            }
            let e = &m.effects[0];
            let v = e.bloch_vector();
            Ok((e.trace(), [v.coords[0], v.coords[1], v.coords[2]]))
        })
        .collect()
}

/// Identity-noise mixture `χ M_{b|y} + (1 - χ) 𝟙/2`.
pub fn noisy(meas: &[MeasurementSet], chi: f64) -> Result<Vec<MeasurementSet>> {
    check_chi(chi)?;
    let half = HermitianOperator::maximally_mixed(2);
    meas.iter()
        .map(|m| {
            let effects = m
                .effects
                .iter()
                .map(|e| e.scale(chi).add(&half.scale((1.0 - chi) * 2.0 / m.outcomes() as f64)))
                .collect::<Result<_>>()?;
            Ok(MeasurementSet { label: m.label, effects })
        })
        .collect()
}

fn check_chi(chi: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&chi) {
        return Err(Error::InvalidArgument(format!("mixing weight {chi} is outside [0, 1]")));
    }
    Ok(())
}

/// `(s_ℓ, u_ℓ)` of one parent outcome.
type ConeBlock = (f64, [f64; 3]);

/// Largest cone margin `τ` with `s_ℓ - τ ≥ ‖u_ℓ‖` over parents of the
/// `χ`-mixed set, with the parent attaining it. `τ` is capped at 1.
fn best_margin(data: &[(f64, [f64; 3])], chi: f64) -> Result<(f64, Vec<ConeBlock>)> {
    use clarabel::algebra::CscMatrix;
    use clarabel::solver::{
        DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SecondOrderConeT, SolverStatus, ZeroConeT,
    };

    let n = data.len();
    let l = 1usize << n;
    // Variables: (s_ℓ, u_ℓ) for each ℓ, then τ.
    let n_vars = 4 * l + 1;
    let tau = 4 * l;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![];
    let mut b = vec![];

    // Completeness: Σ s = 2, Σ u = 0.
    for c in 0..4 {
        rows.push((0..l).map(|k| (4 * k + c, 1.0)).collect());
        b.push(if c == 0 { 2.0 } else { 0.0 });
    }
    // Marginals for outcome 0 of each setting.
    for (y, (tr, m)) in data.iter().enumerate() {
        for c in 0..4 {
            rows.push((0..l).filter(|k| (k >> y) & 1 == 0).map(|k| (4 * k + c, 1.0)).collect());
            b.push(if c == 0 { chi * tr + 1.0 - chi } else { chi * m[c - 1] });
        }
    }
    let n_eq = rows.len();
    // τ ≤ 1.
    rows.push(vec![(tau, 1.0)]);
    b.push(1.0);
    // (s_ℓ - τ, u_ℓ) in the second-order cone.
    for k in 0..l {
        rows.push(vec![(4 * k, -1.0), (tau, 1.0)]);
        b.push(0.0);
        for c in 1..4 {
            rows.push(vec![(4 * k + c, -1.0)]);
            b.push(0.0);
        }
    }

    let mut cols: Vec<Vec<(usize, f64)>> = vec![vec![]; n_vars];
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            cols[j].push((i, v));
        }
    }
    let mut colptr = vec![0];
    let (mut rowval, mut nzval) = (vec![], vec![]);
    for col in &cols {
        for &(i, v) in col {
            rowval.push(i);
            nzval.push(v);
        }
        colptr.push(rowval.len());
    }
    let a = CscMatrix::new(rows.len(), n_vars, colptr, rowval, nzval);
    let p = CscMatrix::<f64>::zeros((n_vars, n_vars));
    let mut q = vec![0.0; n_vars];
    q[tau] = -1.0;
    let mut cones = vec![ZeroConeT(n_eq), NonnegativeConeT(1)];
    cones.extend((0..l).map(|_| SecondOrderConeT(4)));
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(1e-10)
        .tol_gap_rel(1e-10)
        .tol_feas(1e-10)
        .build()
        .map_err(|e| Error::ConicSolver(format!("{e:?}")))?;
    let mut solver =
        DefaultSolver::new(&p, &q, &a, &b, &cones, settings).map_err(|e| Error::ConicSolver(e.to_string()))?;
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {}
        other => return Err(Error::ConicSolver(format!("status {other:?}"))),
    }
    let x = &solver.solution.x;
    let parent = (0..l).map(|k| (x[4 * k], [x[4 * k + 1], x[4 * k + 2], x[4 * k + 3]])).collect();
    Ok((x[tau], parent))
}

fn parent_from(settings: usize, parts: &[(f64, [f64; 3])]) -> Result<ParentMeasurement> {
    let gens = crate::bloch::generators(2)?;
    let effects = parts
        .iter()
        .map(|(s, u)| {
            let mut m = HermitianOperator::identity(2).scale(s / 2.0);
            for (g, ui) in gens.iter().zip(u) {
                m = m.add(&g.scale(ui / 2.0))?;
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    ParentMeasurement::new(settings, effects)
}

/// Whether the `χ`-mixed set has a parent, with one when it does.
pub fn jm_feasible(meas: &[MeasurementSet], chi: f64) -> Result<(bool, Option<ParentMeasurement>)> {
    check_chi(chi)?;
    let data = binary_qubit_data(meas)?;
    let (tau, parts) = best_margin(&data, chi)?;
    if tau >= -FEASIBILITY_TOL {
        Ok((true, Some(parent_from(meas.len(), &parts)?)))
    } else {
        Ok((false, None))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessResult {
    pub chi_lower: f64,
    pub chi_upper: f64,
    /// Parent of the set mixed at `chi_lower`.
    pub certificate: ParentMeasurement,
}

/// Incompatibility robustness `χ*` by bisection on [`jm_feasible`] until the
/// bracket is narrower than `gap_tol`.
pub fn robustness(meas: &[MeasurementSet], gap_tol: f64) -> Result<RobustnessResult> {
    if gap_tol.is_nan() || gap_tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("gap tolerance {gap_tol} must be positive")));
    }
    if let (true, Some(certificate)) = jm_feasible(meas, 1.0)? {
        return Ok(RobustnessResult { chi_lower: 1.0, chi_upper: 1.0, certificate });
    }
    let (ok, cert) = jm_feasible(meas, 0.0)?;
    let mut certificate = match (ok, cert) {
        (true, Some(c)) => c,
        _ => return Err(Error::ConicSolver("no parent found for pure noise".into())),
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > gap_tol {
        let mid = 0.5 * (lo + hi);
        match jm_feasible(meas, mid)? {
            (true, Some(c)) => {
                lo = mid;
                certificate = c;
            }
            _ => hi = mid,
        }
    }
    Ok(RobustnessResult { chi_lower: lo, chi_upper: hi, certificate })
}

/// Independent audit of a parent against the `χ`-mixed targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentAudit {
    pub min_eigenvalue: f64,
    pub completeness_error: f64,
    pub marginal_error: f64,
    pub valid: bool,
}

pub fn verify_parent(parent: &ParentMeasurement, meas: &[MeasurementSet], chi: f64, tol: f64) -> ParentAudit {
    let invalid =
        ParentAudit { min_eigenvalue: f64::NAN, completeness_error: f64::NAN, marginal_error: f64::NAN, valid: false };
    if parent.settings != meas.len() || parent.effects.len() != 1 << parent.settings {
        return invalid;
    }
    let Ok(targets) = noisy(meas, chi) else {
        return invalid;
    };
    let min_eigenvalue = parent.effects.iter().map(HermitianOperator::min_eigenvalue).fold(f64::INFINITY, f64::min);
    let total = parent.effects.iter().try_fold(HermitianOperator::diagonal(&[0.0, 0.0]), |acc, e| acc.add(e));
    let Ok(total) = total else {
        return invalid;
    };
    let completeness_error = total.max_abs_diff(&HermitianOperator::identity(2));
    let mut marginal_error: f64 = 0.0;
    for (y, m) in targets.iter().enumerate() {
        if m.outcomes() != 2 {
            return invalid;
        }
        for b in 0..2 {
            match parent.marginal(y, b) {
                Ok(j) => marginal_error = marginal_error.max(j.max_abs_diff(&m.effects[b])),
                Err(_) => return invalid,
            }
        }
    }
    let valid = min_eigenvalue >= -tol && completeness_error <= tol && marginal_error <= tol;
    ParentAudit { min_eigenvalue, completeness_error, marginal_error, valid }
}

/// Busch criterion for two unbiased sharp binary qubit measurements along
/// unit vectors: compatible iff `‖χ(m+n)‖ + ‖χ(m−n)‖ ≤ 2`. Returns the
/// threshold `χ`.
pub fn busch_threshold(m: [f64; 3], n: [f64; 3]) -> f64 {
    let m = BlochVector::qubit(m);
    let n = BlochVector::qubit(n);
    let plus = BlochVector::qubit([m.coords[0] + n.coords[0], m.coords[1] + n.coords[1], m.coords[2] + n.coords[2]]);
    let minus = BlochVector::qubit([m.coords[0] - n.coords[0], m.coords[1] - n.coords[1], m.coords[2] - n.coords[2]]);
    (2.0 / (plus.norm() + minus.norm())).min(1.0)
}
