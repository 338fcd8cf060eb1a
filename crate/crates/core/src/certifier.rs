//! Classicality certificates from linear programs over deterministic
//! strategies.
//!
//! Preparations `ρ_x` are certified against a probe set of measurements whose
//! Bloch vectors span a polytope with inscribed radius `η`: if the statistics
//! of the inflated operators `O_x = (ρ_x - (1-η)𝟙/d)/η` on the probes have a
//! classical model, every projective measurement does. The visibility program
//! finds the largest `α` for which the `α`-depolarized preparations pass this
//! test. Measurements are handled the same way with the roles swapped.
//!
//! Because the behavior is affine in `α`, a [`VisibilityProblem`] stores only
//! the values at `α = 0` and the slope. The LP is
//!
//! ```text
//! maximize α  subject to  Σ_λ π(λ) D_λ - α·slope = base,  Σ_λ π(λ) = 1,
//!                         π ≥ 0,  0 ≤ α ≤ 1.
//! ```

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bloch::{depolarize, inflate, HermitianOperator, MeasurementSet, Preparation};
use crate::error::{Error, Result};
use crate::geometry::{measurements_from_vertices, PolyhedronSpec};
use crate::lp::{InteriorPoint, LpProblem, LpSolver, LpStatus};
use crate::strategies::{
    count, deterministic_behavior, enumerate, linear_value, maximization_is_exact, maximize_linear, Behavior,
    DeterministicStrategy, Scenario, StrategySampler,
};

/// `α* ≥ 1 - CERTIFICATION_TOL` counts as certified.
pub const CERTIFICATION_TOL: f64 = 1e-7;

/// Default POVM shrinking parameter for qubits, just below `√(2/3)`.
pub const DEFAULT_POVM_T: f64 = 0.816_496_580_927_726 - 1e-6;

/// A reduced cost must beat this to count as improving.
const PRICING_TOL: f64 = 1e-9;

/// Probe operators `O_x = inflate(ρ_x, η)`.
pub fn probe_operators_preparations(preps: &[Preparation], eta: f64) -> Result<Vec<HermitianOperator>> {
    preps.iter().map(|p| inflate(&p.state, eta)).collect()
}

/// Probe effects `O_{b|y} = inflate(Π_{b|y}, η)`, grouped per measurement.
pub fn probe_operators_measurements(meas: &[MeasurementSet], eta: f64) -> Result<Vec<Vec<HermitianOperator>>> {
    meas.iter().map(|m| m.effects.iter().map(|e| inflate(e, eta)).collect()).collect()
}

/// Target behavior `base + α·slope` of a visibility program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityProblem {
    scenario: Scenario,
    base: Vec<f64>,
    slope: Vec<f64>,
}

impl VisibilityProblem {
    /// The base must be normalized for every `(x, y)` and the slope must sum
    /// to zero over outcomes.
    pub fn new(scenario: Scenario, base: Vec<f64>, slope: Vec<f64>) -> Result<Self> {
        let n = scenario.behavior_len();
        if base.len() != n || slope.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "target has {} + {} entries, scenario needs {n}",
                base.len(),
                slope.len()
            )));
        }
        for x in 0..scenario.n_x {
            for y in 0..scenario.n_y {
                let sum = |v: &[f64]| (0..scenario.n_b).map(|b| v[scenario.entry(b, x, y)]).sum::<f64>();
                if (sum(&base) - 1.0).abs() > 1e-9 || sum(&slope).abs() > 1e-9 {
                    return Err(Error::ShapeMismatch(format!("target is not normalized at x={x}, y={y}")));
                }
            }
        }
        Ok(Self { scenario, base, slope })
    }

    /// Program for states `ρ_x` against probe measurements with radius `η`:
    /// `p(b|x,y) = tr(M_{b|y} inflate(Φ_α(ρ_x), η))`. The states are not
    /// required to be positive, so already inflated operators are accepted.
    pub fn for_preparations(states: &[HermitianOperator], probes: &[MeasurementSet], eta: f64) -> Result<Self> {
        let effects: Vec<&[HermitianOperator]> = probes.iter().map(|m| m.effects.as_slice()).collect();
        Self::build(
            states.len(),
            &effects,
            |alpha, b, x, y| {
                let op = inflate(&depolarize(&states[x], alpha)?, eta)?;
                effects[y][b].trace_product(&op)
            },
            states.first().map(HermitianOperator::dim),
        )
    }

    /// Program for measurements against probe states with radius `η`:
    /// `p(b|x,y) = tr(inflate(Φ_χ(M_{b|y}), η) ρ_x)`.
    pub fn for_measurements(meas: &[MeasurementSet], probes: &[HermitianOperator], eta: f64) -> Result<Self> {
        let effects: Vec<&[HermitianOperator]> = meas.iter().map(|m| m.effects.as_slice()).collect();
        Self::build(
            probes.len(),
            &effects,
            |chi, b, x, y| {
                let op = inflate(&depolarize(&effects[y][b], chi)?, eta)?;
                op.trace_product(&probes[x])
            },
            probes.first().map(HermitianOperator::dim),
        )
    }

    fn build<F>(n_x: usize, effects: &[&[HermitianOperator]], value: F, dim: Option<usize>) -> Result<Self>
    where
        F: Fn(f64, usize, usize, usize) -> Result<f64>,
    {
        let (Some(d), Some(first)) = (dim, effects.first()) else {
            return Err(Error::ShapeMismatch("empty state or measurement list".into()));
        };
        let n_b = first.len();
        if effects.iter().any(|m| m.len() != n_b) {
            return Err(Error::ShapeMismatch("measurements have different outcome counts".into()));
        }
        let scenario = Scenario::new(n_x, effects.len(), d, n_b)?;
        let n = scenario.behavior_len();
        let (mut base, mut slope) = (vec![0.0; n], vec![0.0; n]);
        for b in 0..n_b {
            for x in 0..n_x {
                for y in 0..effects.len() {
                    let k = scenario.entry(b, x, y);
                    base[k] = value(0.0, b, x, y)?;
                    slope[k] = value(1.0, b, x, y)? - base[k];
                }
            }
        }
        Self::new(scenario, base, slope)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn slope(&self) -> &[f64] {
        &self.slope
    }

    /// Target behavior entries at visibility `alpha`.
    pub fn target(&self, alpha: f64) -> Vec<f64> {
        self.base.iter().zip(&self.slope).map(|(b, s)| b + alpha * s).collect()
    }

    /// Strategies with an `a`-independent decoder whose mixture reproduces
    /// the `x`-averaged base distribution. They make `α = 0` feasible
    /// whenever the base does not depend on `x`.
    pub fn baseline_strategies(&self) -> Vec<DeterministicStrategy> {
        let s = self.scenario;
        let q = |b: usize, y: usize| (0..s.n_x).map(|x| self.base[s.entry(b, x, y)]).sum::<f64>() / s.n_x as f64;
        let mut cdf = vec![vec![0.0; s.n_b]; s.n_y];
        let mut cuts = vec![0.0, 1.0];
        for (y, row) in cdf.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (b, c) in row.iter_mut().enumerate() {
                acc += q(b, y);
                *c = acc;
                cuts.push(acc.clamp(0.0, 1.0));
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let mut out: Vec<DeterministicStrategy> = vec![];
        for w in cuts.windows(2) {
            let u = 0.5 * (w[0] + w[1]);
            let row: Vec<usize> = cdf.iter().map(|c| c.iter().position(|&v| v > u).unwrap_or(s.n_b - 1)).collect();
            let lam = DeterministicStrategy { enc: vec![0; s.n_x], dec: vec![row; s.n_a] };
            if !out.contains(&lam) {
                out.push(lam);
            }
        }
        out
    }
}

/// Optimum of the visibility LP over a fixed strategy list.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilitySolution {
    pub alpha: f64,
    /// `weights[i]` belongs to the `i`-th strategy passed in.
    pub weights: Vec<f64>,
    /// Row multipliers: behavior entries followed by the normalization row.
    pub duals: Vec<f64>,
    /// Positions of strategies in the final basis.
    pub basic: Vec<usize>,
}

/// Solves the visibility LP with the interior-point backend.
pub fn solve_visibility(
    problem: &VisibilityProblem,
    strategies: &[DeterministicStrategy],
) -> Result<VisibilitySolution> {
    solve_visibility_with(problem, strategies, &InteriorPoint::default())
}

pub fn solve_visibility_with(
    problem: &VisibilityProblem,
    strategies: &[DeterministicStrategy],
    solver: &dyn LpSolver,
) -> Result<VisibilitySolution> {
    if strategies.is_empty() {
        return Err(Error::InvalidArgument("no strategies supplied".into()));
    }
    let s = &problem.scenario;
    // Rows for the last outcome follow from normalization and are left out;
    // in `[b][x][y]` order the kept entries are a prefix.
    let n = (s.n_b - 1) * s.n_x * s.n_y;
    let mut rhs = problem.base[..n].to_vec();
    rhs.push(1.0);
    let mut lp = LpProblem::new(rhs);
    let mut column = vec![0.0; n + 1];
    column[n] = 1.0;
    for lam in strategies {
        if !lam.is_valid_for(s) {
            return Err(Error::ShapeMismatch("strategy does not fit the scenario".into()));
        }
        column[..n].fill(0.0);
        for x in 0..s.n_x {
            for y in 0..s.n_y {
                let k = s.entry(lam.outcome(x, y), x, y);
                if k < n {
                    column[k] = 1.0;
                }
            }
        }
        lp.add_column(0.0, f64::INFINITY, &column)?;
    }
    let alpha_col: Vec<f64> = problem.slope[..n].iter().map(|v| -v).chain([0.0]).collect();
    let a = lp.add_column(-1.0, 1.0, &alpha_col)?;

    let sol = solver.solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(Error::Solver("visibility program is infeasible even at zero visibility".into()))
        }
        LpStatus::Unbounded => return Err(Error::Solver("visibility program reported unbounded".into())),
    }
    Ok(VisibilitySolution {
        alpha: sol.primal[a].clamp(0.0, 1.0),
        weights: sol.primal[..a].iter().map(|w| w.max(0.0)).collect(),
        duals: expand_duals(s, &sol.duals),
        basic: sol.basis.into_iter().filter(|&j| j < a).collect(),
    })
}

/// Row multipliers in behavior layout, zero on the omitted last-outcome
/// entries, followed by the normalization multiplier.
fn expand_duals(s: &Scenario, duals: &[f64]) -> Vec<f64> {
    let kept = (s.n_b - 1) * s.n_x * s.n_y;
    let mut out = vec![0.0; s.behavior_len() + 1];
    out[..kept].copy_from_slice(&duals[..kept]);
    out[s.behavior_len()] = duals[kept];
    out
}

/// Feasibility at full visibility: `(feasible, weights)`.
pub fn check_feasibility(
    problem: &VisibilityProblem,
    strategies: &[DeterministicStrategy],
) -> Result<(bool, Vec<f64>)> {
    let sol = solve_visibility(problem, strategies)?;
    Ok((sol.alpha >= 1.0 - CERTIFICATION_TOL, sol.weights))
}

/// Settings of the iterative exploration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterationConfig {
    /// Active-set size per round.
    pub batch_size: usize,
    pub max_iters: usize,
    /// Rounds with `α` moving less than `alpha_tol` before stopping.
    pub stall_rounds: usize,
    pub alpha_tol: f64,
    pub seed: u64,
    /// Strategies with weight above this survive to the next round.
    pub weight_floor: f64,
    /// Skip fresh draws that were in the previous active set.
    pub exclude_active: bool,
    /// Most improving strategies added per round by dual pricing; 0 disables
    /// pricing and leaves pure random resampling.
    pub pricing_columns: usize,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            batch_size: 2000,
            max_iters: 200,
            stall_rounds: 10,
            alpha_tol: 1e-6,
            seed: 0,
            weight_floor: 1e-9,
            exclude_active: false,
            pricing_columns: 50,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self, s: &Scenario) -> Result<()> {
        let min_batch = s.behavior_len() + 2;
        if self.batch_size < min_batch {
            return Err(Error::InvalidArgument(format!(
                "batch size {} is below the minimum {min_batch} for this scenario",
                self.batch_size
            )));
        }
        if self.max_iters == 0 || self.stall_rounds == 0 {
            return Err(Error::InvalidArgument("max_iters and stall_rounds must be positive".into()));
        }
        if self.alpha_tol.is_nan() || self.alpha_tol < 0.0 || self.weight_floor.is_nan() || self.weight_floor < 0.0 {
            return Err(Error::InvalidArgument("tolerances must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedClassical,
    /// Sufficient test failed; the set may still be classical.
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedStrategy {
    /// Canonical index, absent when the strategy count overflows 64 bits.
    pub index: Option<u64>,
    pub strategy: DeterministicStrategy,
    pub weight: f64,
}

/// Outcome of an iterative certification with its replayable certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationResult {
    pub alpha_star: f64,
    pub verdict: Verdict,
    pub eta_used: f64,
    pub iterations: usize,
    /// Best visibility after each round; non-decreasing.
    pub trace: Vec<f64>,
    /// False when `max_iters` ran out before a stopping rule fired.
    pub converged: bool,
    pub seed: u64,
    pub scenario: Scenario,
    pub weights: Vec<WeightedStrategy>,
}

impl CertificationResult {
    /// Mixture of the certificate's deterministic behaviors.
    pub fn replay(&self) -> Result<Behavior> {
        let behaviors: Vec<Behavior> =
            self.weights.iter().map(|w| deterministic_behavior(&self.scenario, &w.strategy)).collect();
        Behavior::mixture(self.scenario, self.weights.iter().zip(&behaviors).map(|(w, b)| (w.weight, b)))
    }

    /// Largest entry-wise deviation between the replayed certificate and the
    /// problem's target at `alpha_star`.
    pub fn replay_error(&self, problem: &VisibilityProblem) -> Result<f64> {
        let replayed = self.replay()?;
        let target = problem.target(self.alpha_star);
        Ok(replayed.probabilities().iter().zip(&target).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Active-set exploration: solve on the current strategies, keep the basic
/// and weighted ones, add dual-priced improving strategies and refill with
/// random draws. When every strategy fits into one batch the program is
/// solved exhaustively in a single round.
pub fn iterate_visibility(problem: &VisibilityProblem, cfg: &IterationConfig, eta: f64) -> Result<CertificationResult> {
    iterate_visibility_with(problem, cfg, eta, &InteriorPoint::default())
}

pub fn iterate_visibility_with(
    problem: &VisibilityProblem,
    cfg: &IterationConfig,
    eta: f64,
    solver: &dyn LpSolver,
) -> Result<CertificationResult> {
    let s = problem.scenario;
    cfg.validate(&s)?;
    let n = s.behavior_len();
    let total = count(&s).ok();
    let exhaustive = total.is_some_and(|t| t <= cfg.batch_size as u64);
    let exact_pricing = cfg.pricing_columns > 0 && maximization_is_exact(&s);

    let baseline = problem.baseline_strategies();
    let mut sampler = StrategySampler::new(s, cfg.seed);
    let mut active: Vec<DeterministicStrategy> = if exhaustive { enumerate(&s)? } else { baseline.clone() };
    if !exhaustive {
        let previous = HashSet::new();
        refill(&mut active, &mut sampler, cfg, &previous);
    }

    let mut trace: Vec<f64> = vec![];
    let mut best: Option<(f64, Vec<(DeterministicStrategy, f64)>)> = None;
    let mut stall = 0;
    let mut converged = false;
    for iteration in 1..=cfg.max_iters {
        let sol = solve_visibility_with(problem, &active, solver).map_err(|e| Error::IterationAborted {
            iteration,
            reason: e.to_string(),
            trace: trace.clone(),
        })?;
        let previous_alpha = best.as_ref().map(|b| b.0);
        if previous_alpha.is_none_or(|a| sol.alpha >= a) {
            let support = active
                .iter()
                .zip(&sol.weights)
                .filter(|(_, &w)| w > cfg.weight_floor)
                .map(|(lam, &w)| (lam.clone(), w))
                .collect();
            best = Some((sol.alpha, support));
        }
        let alpha = best.as_ref().map_or(0.0, |b| b.0);
        trace.push(alpha);

        if exhaustive || alpha >= 1.0 - 1e-12 {
            converged = true;
            break;
        }
        stall = match previous_alpha {
            Some(prev) if alpha - prev < cfg.alpha_tol => stall + 1,
            _ => 0,
        };

        let priced = if cfg.pricing_columns > 0 {
            improving_strategies(&s, &sol.duals, cfg.pricing_columns, n)?
        } else {
            vec![]
        };
        if exact_pricing && priced.is_empty() {
            converged = true;
            break;
        }
        if stall >= cfg.stall_rounds {
            converged = true;
            break;
        }
        if iteration == cfg.max_iters {
            break;
        }

        let mut keep: HashSet<usize> = sol.basic.iter().copied().collect();
        keep.extend(sol.weights.iter().enumerate().filter(|(_, &w)| w > cfg.weight_floor).map(|(i, _)| i));
        if cfg.pricing_columns > 0 {
            // Also keep the non-basic strategies closest to entering.
            let mut scored: Vec<(usize, f64)> =
                active.iter().enumerate().map(|(i, lam)| (i, linear_value(&s, &sol.duals[..n], lam))).collect();
            scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            keep.extend(scored.iter().take(cfg.batch_size / 2).map(|(i, _)| *i));
        }
        let previous: HashSet<DeterministicStrategy> = active.iter().cloned().collect();
        let mut next: Vec<DeterministicStrategy> = baseline.clone();
        for (i, lam) in active.iter().enumerate() {
            if keep.contains(&i) && !next.contains(lam) {
                next.push(lam.clone());
            }
        }
        let mut seen: HashSet<DeterministicStrategy> = next.iter().cloned().collect();
        for lam in priced {
            if seen.insert(lam.clone()) {
                next.push(lam);
            }
        }
        refill(&mut next, &mut sampler, cfg, &previous);
        active = next;
    }

    let (alpha_star, support) = best.unwrap_or((0.0, vec![]));
    let weights = support
        .into_iter()
        .map(|(strategy, weight)| WeightedStrategy { index: strategy.to_index(&s).ok(), strategy, weight })
        .collect();
    Ok(CertificationResult {
        alpha_star,
        verdict: if alpha_star >= 1.0 - CERTIFICATION_TOL { Verdict::CertifiedClassical } else { Verdict::Undecided },
        eta_used: eta,
        iterations: trace.len(),
        trace,
        converged,
        seed: cfg.seed,
        scenario: s,
        weights,
    })
}

/// Strategies with positive reduced cost `y·D_λ + y_sum`, best first.
fn improving_strategies(s: &Scenario, duals: &[f64], k: usize, n: usize) -> Result<Vec<DeterministicStrategy>> {
    let y_sum = duals[n];
    let coeffs = &duals[..n];
    Ok(maximize_linear(s, coeffs, k)?
        .into_iter()
        .filter(|(lam, _)| linear_value(s, coeffs, lam) + y_sum > PRICING_TOL)
        .map(|(lam, _)| lam)
        .collect())
}

fn refill(
    active: &mut Vec<DeterministicStrategy>,
    sampler: &mut StrategySampler,
    cfg: &IterationConfig,
    previous: &HashSet<DeterministicStrategy>,
) {
    let mut seen: HashSet<DeterministicStrategy> = active.iter().cloned().collect();
    let mut attempts = 0;
    while active.len() < cfg.batch_size && attempts < 20 * cfg.batch_size {
        attempts += 1;
        let lam = sampler.draw();
        if cfg.exclude_active && previous.contains(&lam) {
            continue;
        }
        if seen.insert(lam.clone()) {
            active.push(lam);
        }
    }
}

fn require_qubits(dim: usize) -> Result<()> {
    if dim != 2 {
        return Err(Error::DimensionMismatch(2, dim));
    }
    Ok(())
}

/// Certifies operators (possibly inflated) against arbitrary probe
/// measurements with a caller-supplied `η`.
pub fn certify_preparations_with(
    states: &[HermitianOperator],
    probes: &[MeasurementSet],
    eta: f64,
    cfg: &IterationConfig,
) -> Result<CertificationResult> {
    let problem = VisibilityProblem::for_preparations(states, probes, eta)?;
    iterate_visibility(&problem, cfg, eta)
}

/// Certifies measurements against arbitrary probe states with a
/// caller-supplied `η`.
pub fn certify_measurements_with(
    meas: &[MeasurementSet],
    probes: &[HermitianOperator],
    eta: f64,
    cfg: &IterationConfig,
) -> Result<CertificationResult> {
    let problem = VisibilityProblem::for_measurements(meas, probes, eta)?;
    iterate_visibility(&problem, cfg, eta)
}

/// Largest visibility at which the qubit preparations are certified
/// classical for every projective measurement.
pub fn certify_preparations_pm(
    preps: &[Preparation],
    polyhedron: &PolyhedronSpec,
    cfg: &IterationConfig,
) -> Result<CertificationResult> {
    certify_preparations_povm(preps, polyhedron, 1.0, cfg)
}

/// As [`certify_preparations_pm`] after inflating each state by `t`, which
/// certifies classicality under all POVMs when `t` is small enough
/// ([`DEFAULT_POVM_T`] for qubits).
pub fn certify_preparations_povm(
    preps: &[Preparation],
    polyhedron: &PolyhedronSpec,
    t: f64,
    cfg: &IterationConfig,
) -> Result<CertificationResult> {
    for p in preps {
        require_qubits(p.dim())?;
    }
    let eta = polyhedron.eta()?;
    let probes = measurements_from_vertices(polyhedron)?;
    let states: Vec<HermitianOperator> = preps.iter().map(|p| inflate(&p.state, t)).collect::<Result<_>>()?;
    certify_preparations_with(&states, &probes, eta, cfg)
}

/// Pure probe states at the polyhedron vertices.
pub fn vertex_states(polyhedron: &PolyhedronSpec) -> Result<Vec<HermitianOperator>> {
    polyhedron.vertices.iter().enumerate().map(|(x, v)| Preparation::qubit(x, *v).map(|p| p.state)).collect()
}

/// Largest `χ` such that the `χ`-depolarized measurements are certified
/// classical for every preparation set.
pub fn certify_measurements_pm(
    meas: &[MeasurementSet],
    polyhedron: &PolyhedronSpec,
    cfg: &IterationConfig,
) -> Result<CertificationResult> {
    certify_measurements_povm(meas, polyhedron, 1.0, cfg)
}

/// Measurement certification against the vertex states inflated by `t`.
pub fn certify_measurements_povm(
    meas: &[MeasurementSet],
    polyhedron: &PolyhedronSpec,
    t: f64,
    cfg: &IterationConfig,
) -> Result<CertificationResult> {
    for m in meas {
        require_qubits(m.dim())?;
    }
    let eta = polyhedron.eta()?;
    let probes: Vec<HermitianOperator> =
        vertex_states(polyhedron)?.iter().map(|rho| inflate(rho, t)).collect::<Result<_>>()?;
    certify_measurements_with(meas, &probes, eta, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{born, BlochVector};
    use crate::geometry::{polyhedron, PolyhedronName};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const X: [f64; 3] = [1.0, 0.0, 0.0];
    const Y: [f64; 3] = [0.0, 1.0, 0.0];
    const Z: [f64; 3] = [0.0, 0.0, 1.0];

    fn ico() -> PolyhedronSpec {
        polyhedron(PolyhedronName::Icosahedron).unwrap()
    }

    fn rhombi() -> PolyhedronSpec {
        polyhedron(PolyhedronName::Rhombicuboctahedron).unwrap()
    }

    fn preps(vectors: &[[f64; 3]], visibility: f64) -> Vec<Preparation> {
        vectors
            .iter()
            .enumerate()
            .map(|(x, v)| Preparation::qubit(x, [v[0] * visibility, v[1] * visibility, v[2] * visibility]).unwrap())
            .collect()
    }

    fn problem_for(p: &[Preparation], poly: &PolyhedronSpec) -> VisibilityProblem {
        let states: Vec<_> = p.iter().map(|p| p.state.clone()).collect();
        VisibilityProblem::for_preparations(&states, &measurements_from_vertices(poly).unwrap(), poly.eta().unwrap())
            .unwrap()
    }

    fn exhaustive_alpha(problem: &VisibilityProblem) -> f64 {
        solve_visibility(problem, &enumerate(problem.scenario()).unwrap()).unwrap().alpha
    }

    #[test]
    fn probe_operator_examples() {
        let p = preps(&[[0.3, -0.2, 0.5]], 1.0);
        let same = probe_operators_preparations(&p, 1.0).unwrap();
        assert!(same[0].max_abs_diff(&p[0].state) < 1e-15);
        let mixed = preps(&[[0.0; 3]], 1.0);
        let o = probe_operators_preparations(&mixed, 0.37).unwrap();
        assert!(o[0].max_abs_diff(&HermitianOperator::maximally_mixed(2)) < 1e-15);
        let r = preps(&[[0.0, 0.0, 0.79]], 1.0);
        let o = probe_operators_preparations(&r, 0.79).unwrap();
        let v = o[0].bloch_vector();
        assert_abs_diff_eq!(v.coords[2], 1.0, epsilon = 1e-12);
        assert!(probe_operators_preparations(&r, 0.0).is_err());

        let m = vec![MeasurementSet::qubit_projective(0, [0.0, 0.6, 0.8]).unwrap()];
        let same = probe_operators_measurements(&m, 1.0).unwrap();
        assert!(same[0][1].max_abs_diff(&m[0].effects[1]) < 1e-15);
        let half = MeasurementSet::new(0, vec![HermitianOperator::maximally_mixed(2); 2]).unwrap();
        let o = probe_operators_measurements(&[half], 0.5).unwrap();
        assert!(o[0][0].max_abs_diff(&HermitianOperator::maximally_mixed(2)) < 1e-15);
        let o = probe_operators_measurements(&m, 0.8).unwrap();
        assert_abs_diff_eq!(o[0][0].trace(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(o[0][0].bloch_vector().norm(), 1.25, epsilon = 1e-12);
    }

    #[test]
    fn affine_target_matches_direct_evaluation() {
        let p = preps(&[X, [0.6, 0.0, 0.8], Y], 0.9);
        let probes = measurements_from_vertices(&ico()).unwrap();
        let eta = 0.8;
        let states: Vec<_> = p.iter().map(|p| p.state.clone()).collect();
        let problem = VisibilityProblem::for_preparations(&states, &probes, eta).unwrap();
        let alpha = 0.37;
        let t = problem.target(alpha);
        for x in 0..3 {
            let o = inflate(&depolarize(&states[x], alpha).unwrap(), eta).unwrap();
            for (y, m) in probes.iter().enumerate() {
                for b in 0..2 {
                    let direct = m.effects[b].trace_product(&o).unwrap();
                    assert_abs_diff_eq!(t[problem.scenario().entry(b, x, y)], direct, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn baseline_reproduces_zero_visibility() {
        let probes = vec![
            MeasurementSet::new(
                0,
                vec![HermitianOperator::diagonal(&[0.3, 0.1]), HermitianOperator::diagonal(&[0.7, 0.9])],
            )
            .unwrap(),
            MeasurementSet::qubit_projective(1, Z).unwrap(),
        ];
        let states = vec![preps(&[X], 1.0)[0].state.clone(), preps(&[Z], 0.5)[0].state.clone()];
        let problem = VisibilityProblem::for_preparations(&states, &probes, 0.9).unwrap();
        let base = problem.baseline_strategies();
        let sol = solve_visibility(&problem, &base).unwrap();
        assert!(sol.alpha >= 0.0);
        let got = Behavior::mixture(
            *problem.scenario(),
            sol.weights
                .iter()
                .zip(base.iter().map(|l| deterministic_behavior(problem.scenario(), l)))
                .map(|(w, b)| (*w, b))
                .collect::<Vec<_>>()
                .iter()
                .map(|(w, b)| (*w, b)),
        )
        .unwrap();
        let target = problem.target(sol.alpha);
        for (a, b) in got.probabilities().iter().zip(&target) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn maximally_mixed_is_fully_visible() {
        let p = preps(&[X, Y, Z], 0.0);
        let problem = problem_for(&p, &ico());
        let sol = solve_visibility(&problem, &problem.baseline_strategies()).unwrap();
        assert_abs_diff_eq!(sol.alpha, 1.0, epsilon = 1e-8);
        let (ok, _) = check_feasibility(&problem, &problem.baseline_strategies()).unwrap();
        assert!(ok);
        let res = certify_preparations_pm(&p, &ico(), &IterationConfig::default()).unwrap();
        assert_eq!(res.verdict, Verdict::CertifiedClassical);
        let res = certify_preparations_povm(&p, &ico(), DEFAULT_POVM_T, &IterationConfig::default()).unwrap();
        assert_abs_diff_eq!(res.alpha_star, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn equal_states_are_classical() {
        let p = preps(&[Z, Z, Z], 1.0);
        let res = certify_preparations_pm(&p, &rhombi(), &IterationConfig::default()).unwrap();
        assert_abs_diff_eq!(res.alpha_star, 1.0, epsilon = 1e-7);
        assert_eq!(res.verdict, Verdict::CertifiedClassical);
    }

    #[test]
    fn equal_states_are_limited_by_probe_statistics() {
        // Identical states only need every probe probability in [0, 1],
        // which caps α at η / max_v |v·r|.
        let v = [0.0, 0.6, 0.8];
        let poly = ico();
        let res = certify_preparations_pm(&preps(&[v, v, v], 1.0), &poly, &IterationConfig::default()).unwrap();
        let reach = poly.vertices.iter().map(|w| (w[1] * v[1] + w[2] * v[2]).abs()).fold(0.0, f64::max);
        assert_abs_diff_eq!(res.alpha_star, poly.eta().unwrap() / reach, epsilon = 1e-7);
    }

    #[test]
    fn feasibility_examples() {
        let low = problem_for(&preps(&[X, Y, Z], 0.4), &ico());
        let all = enumerate(low.scenario()).unwrap();
        let (ok, w) = check_feasibility(&low, &all).unwrap();
        assert!(ok);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-9);

        let full = problem_for(&preps(&[X, Y, Z], 1.0), &rhombi());
        let res = iterate_visibility(&full, &IterationConfig::default(), rhombi().eta().unwrap()).unwrap();
        let (ok, _) =
            check_feasibility(&full, &res.weights.iter().map(|w| w.strategy.clone()).collect::<Vec<_>>()).unwrap();
        assert!(res.alpha_star < 1.0);
        assert!(!ok);
    }

    #[test]
    fn pure_triad_matches_exhaustive_optimum() {
        let problem = problem_for(&preps(&[X, Z, Y], 1.0), &ico());
        let exact = exhaustive_alpha(&problem);
        assert!(exact > 0.4 && exact < 1.0);
        let cfg = IterationConfig { batch_size: 500, ..IterationConfig::default() };
        let res = iterate_visibility(&problem, &cfg, 0.0).unwrap();
        assert_abs_diff_eq!(res.alpha_star, exact, epsilon = 1e-6);
        assert!(res.converged);
        assert!(res.replay_error(&problem).unwrap() < 1e-6);
    }

    #[test]
    fn random_resampling_is_a_monotone_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3 {
            let vs: Vec<[f64; 3]> = (0..3)
                .map(|_| {
                    let v = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                    let n = BlochVector::qubit(v).norm();
                    [v[0] / n, v[1] / n, v[2] / n]
                })
                .collect();
            let problem = problem_for(&preps(&vs, 1.0), &ico());
            let exact = exhaustive_alpha(&problem);
            let cfg = IterationConfig { batch_size: 300, pricing_columns: 0, seed: 9, ..IterationConfig::default() };
            let res = iterate_visibility(&problem, &cfg, 0.0).unwrap();
            assert!(res.alpha_star <= exact + 1e-9);
            assert!(res.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
            assert!(res.replay_error(&problem).unwrap() < 1e-6);
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let problem = problem_for(&preps(&[X, [0.6, 0.0, 0.8], Y], 1.0), &ico());
        let cfg = IterationConfig {
            batch_size: 200,
            pricing_columns: 0,
            max_iters: 15,
            seed: 77,
            ..IterationConfig::default()
        };
        let a = iterate_visibility(&problem, &cfg, 0.0).unwrap();
        let b = iterate_visibility(&problem, &cfg, 0.0).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let excl = IterationConfig { exclude_active: true, ..cfg };
        let c = iterate_visibility(&problem, &excl, 0.0).unwrap();
        assert!(c.trace.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn config_validation() {
        let problem = problem_for(&preps(&[X, Y, Z], 1.0), &ico());
        let small = IterationConfig { batch_size: 10, ..IterationConfig::default() };
        assert!(iterate_visibility(&problem, &small, 0.0).is_err());
        let zero = IterationConfig { max_iters: 0, ..IterationConfig::default() };
        assert!(iterate_visibility(&problem, &zero, 0.0).is_err());
        assert!(solve_visibility(&problem, &[]).is_err());
    }

    #[test]
    fn larger_eta_never_lowers_visibility() {
        let p = preps(&[X, [0.6, 0.0, 0.8], [0.0, 0.8, -0.6]], 1.0);
        let cfg = IterationConfig::default();
        let states: Vec<_> = p.iter().map(|p| p.state.clone()).collect();
        let probes = measurements_from_vertices(&ico()).unwrap();
        let eta = ico().eta().unwrap();
        let full = certify_preparations_with(&states, &probes, eta, &cfg).unwrap();
        let shrunk = certify_preparations_with(&states, &probes, 0.6, &cfg).unwrap();
        // For a fixed probe set only α/η enters the program.
        assert!(full.alpha_star < 1.0);
        assert_abs_diff_eq!(shrunk.alpha_star, full.alpha_star * 0.6 / eta, epsilon = 1e-6);
        let rh = certify_preparations_pm(&p, &rhombi(), &cfg).unwrap();
        assert!(rh.alpha_star >= full.alpha_star - 1e-6);
    }

    #[test]
    fn povm_certification() {
        let p = preps(&[X, Z], 0.5);
        let cfg = IterationConfig::default();
        let pm = certify_preparations_pm(&p, &ico(), &cfg).unwrap();
        let same = certify_preparations_povm(&p, &ico(), 1.0, &cfg).unwrap();
        assert_eq!(pm, same);
        let povm = certify_preparations_povm(&p, &ico(), 2f64.sqrt() / 3f64.sqrt(), &cfg).unwrap();
        assert!(povm.alpha_star <= pm.alpha_star + 1e-9);
        assert_abs_diff_eq!(DEFAULT_POVM_T, (2.0f64 / 3.0).sqrt() - 1e-6, epsilon = 1e-15);
    }

    #[test]
    fn single_measurement_along_facet_normal() {
        let m = vec![MeasurementSet::qubit_projective(0, Z).unwrap()];
        let res = certify_measurements_pm(&m, &rhombi(), &IterationConfig::default()).unwrap();
        assert_abs_diff_eq!(res.alpha_star, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn single_measurement_is_limited_by_probe_statistics() {
        // One setting is classical as long as every probe probability lies
        // in [0, 1], which caps χ at η / max_v |v·m|.
        let m = vec![MeasurementSet::qubit_projective(0, ico().vertices[0]).unwrap()];
        let res = certify_measurements_pm(&m, &ico(), &IterationConfig::default()).unwrap();
        assert_abs_diff_eq!(res.alpha_star, ico().eta().unwrap(), epsilon = 1e-7);
    }

    #[test]
    fn adding_measurements_never_raises_chi() {
        let cfg = IterationConfig::default();
        let one = vec![MeasurementSet::qubit_projective(0, X).unwrap()];
        let mut two = one.clone();
        two.push(MeasurementSet::qubit_projective(1, Z).unwrap());
        let mut three = two.clone();
        three.push(MeasurementSet::qubit_projective(2, Y).unwrap());
        let a = certify_measurements_pm(&one, &rhombi(), &cfg).unwrap().alpha_star;
        let b = certify_measurements_pm(&two, &rhombi(), &cfg).unwrap().alpha_star;
        let c = certify_measurements_pm(&three, &rhombi(), &cfg).unwrap().alpha_star;
        assert!(a >= b - 1e-6 && b >= c - 1e-6, "{a} {b} {c}");
        assert!(c < 1.0);
    }

    #[test]
    fn measurement_certificate_replays() {
        let m = vec![
            MeasurementSet::qubit_projective(0, X).unwrap(),
            MeasurementSet::qubit_projective(1, [0.6, 0.0, 0.8]).unwrap(),
        ];
        let poly = ico();
        let probes = vertex_states(&poly).unwrap();
        let problem = VisibilityProblem::for_measurements(&m, &probes, poly.eta().unwrap()).unwrap();
        let res = certify_measurements_pm(&m, &poly, &IterationConfig::default()).unwrap();
        assert!(res.replay_error(&problem).unwrap() < 1e-6);
        let total: f64 = res.weights.iter().map(|w| w.weight).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-7);
        let same = certify_measurements_povm(&m, &poly, 1.0, &IterationConfig::default()).unwrap();
        assert_eq!(res, same);
    }

    #[test]
    fn tetrahedral_povm_survives_depolarization() {
        let tet = polyhedron(PolyhedronName::Tetrahedron).unwrap();
        let effects: Vec<HermitianOperator> = tet
            .vertices
            .iter()
            .map(|v| crate::bloch::projector_from_unit_vector(&BlochVector::qubit(*v)).unwrap().scale(0.5))
            .collect();
        let povm = MeasurementSet::new(0, effects).unwrap();
        let t = (2.0f64 / 3.0).sqrt();
        for e in &povm.effects {
            assert!(depolarize(e, t).unwrap().min_eigenvalue() >= -1e-12);
        }
        // Self-duality: tr(Φ_t(M) ρ) = tr(M Φ_t(ρ)).
        let rho = preps(&[[0.2, -0.5, 0.4]], 1.0)[0].state.clone();
        for e in &povm.effects {
            let lhs = born(&depolarize(e, t).unwrap(), &rho).unwrap();
            let rhs = born(e, &depolarize(&rho, t).unwrap()).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
        let res = certify_measurements_povm(&[povm], &ico(), t, &IterationConfig::default()).unwrap();
        assert!(res.alpha_star > 0.0 && res.alpha_star <= 1.0);
    }

    #[test]
    fn qubit_only_entry_points() {
        let qutrit = Preparation::new(0, HermitianOperator::maximally_mixed(3)).unwrap();
        assert!(certify_preparations_pm(&[qutrit], &ico(), &IterationConfig::default()).is_err());
    }

    #[test]
    fn result_json_roundtrip() {
        let res = certify_preparations_pm(&preps(&[X, Z], 0.7), &ico(), &IterationConfig::default()).unwrap();
        let text = serde_json::to_string(&res).unwrap();
        let back: CertificationResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back, res);
        assert!(text.contains("\"verdict\""));
    }
}
