//! The `S` witness of the four-input, two-setting binary scenario, the
//! preparation family that activates non-classicality, and the 2→1 random
//! access code built on the same statistics.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::bloch::{behavior_of, MeasurementSet, Preparation};
use crate::error::{Error, Result};
use crate::strategies::Behavior;

/// Classical maximum of [`s_value`].
pub const CLASSICAL_S_BOUND: f64 = 4.0;

/// Sign of `E_xy` in `S`, indexed `[x][y]`.
const S_SIGNS: [[f64; 2]; 4] = [[1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, 1.0]];

/// Bits `(m₁, m₂)` encoded by input `x`. Chosen so that guessing `m_y`
/// correctly scores `+E_xy` exactly when `S` carries a plus sign.
pub const RAC_ENCODING: [[usize; 2]; 4] = [[0, 1], [1, 0], [1, 1], [0, 0]];

/// `E_xy = p(0|x,y) - p(1|x,y)`.
pub fn correlator(beh: &Behavior, x: usize, y: usize) -> Result<f64> {
    let s = beh.scenario();
    if s.n_b != 2 {
        return Err(Error::ShapeMismatch(format!("correlators need binary outcomes, got {}", s.n_b)));
    }
    if x >= s.n_x || y >= s.n_y {
        return Err(Error::ShapeMismatch(format!("no entry for x={x}, y={y}")));
    }
    Ok(beh.get(0, x, y) - beh.get(1, x, y))
}

fn check_witness_shape(beh: &Behavior) -> Result<()> {
    let s = beh.scenario();
    if (s.n_x, s.n_y, s.n_b) != (4, 2, 2) {
        return Err(Error::ShapeMismatch(format!(
            "witness needs |X|=4, |Y|=2, |B|=2, got {}, {}, {}",
            s.n_x, s.n_y, s.n_b
        )));
    }
    Ok(())
}

/// `S = E₁₁ - E₁₂ - E₂₁ + E₂₂ - E₃₁ - E₃₂ + E₄₁ + E₄₂`, at most 4 classically.
pub fn s_value(beh: &Behavior) -> Result<f64> {
    check_witness_shape(beh)?;
    let mut s = 0.0;
    for (x, signs) in S_SIGNS.iter().enumerate() {
        for (y, sign) in signs.iter().enumerate() {
            s += sign * correlator(beh, x, y)?;
        }
    }
    Ok(s)
}

/// `p_suc = (S + 8) / 16`.
pub fn rac_success(s: f64) -> f64 {
    (s + 8.0) / 16.0
}

/// Average probability of outputting bit `m_y` under [`RAC_ENCODING`].
pub fn rac_success_from_behavior(beh: &Behavior) -> Result<f64> {
    check_witness_shape(beh)?;
    let mut total = 0.0;
    for (x, bits) in RAC_ENCODING.iter().enumerate() {
        for (y, &m) in bits.iter().enumerate() {
            total += beh.get(m, x, y);
        }
    }
    Ok(total / 8.0)
}

/// Four qubit states at distance `alpha` from the centre, tilted by `theta`
/// from the `y` axis towards the diagonals of the `xz` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationFamily {
    pub alpha: f64,
    pub theta: f64,
}

impl ActivationFamily {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("shrinking factor {alpha} is outside [0, 1]")));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidArgument(format!("angle {theta} is outside [0, π/2]")));
        }
        Ok(Self { alpha, theta })
    }

    /// `r_i = α (cos θ ŷ + sin θ w_i)`.
    pub fn bloch_vectors(&self) -> [[f64; 3]; 4] {
        let h = 1.0 / SQRT_2;
        let w = [[-h, 0.0, -h], [h, 0.0, h], [h, 0.0, -h], [-h, 0.0, h]];
        let (s, c) = self.theta.sin_cos();
        w.map(|w| [self.alpha * s * w[0], self.alpha * c, self.alpha * s * w[2]])
    }

    /// `4√2 α sin θ`, the witness value against [`activation_measurements`].
    pub fn analytic_s(&self) -> f64 {
        4.0 * SQRT_2 * self.alpha * self.theta.sin()
    }
}

pub fn activation_preparations(fam: &ActivationFamily) -> Result<Vec<Preparation>> {
    fam.bloch_vectors().iter().enumerate().map(|(x, r)| Preparation::qubit(x, *r)).collect()
}

/// Projective measurements along `-x̂` and `ẑ`.
pub fn activation_measurements() -> Result<Vec<MeasurementSet>> {
    Ok(vec![
        MeasurementSet::qubit_projective(0, [-1.0, 0.0, 0.0])?,
        MeasurementSet::qubit_projective(1, [0.0, 0.0, 1.0])?,
    ])
}

/// Visibility above which the family violates `S ≤ 4` at angle `theta`,
/// capped at 1 where no violation is possible.
pub fn s_threshold(theta: f64) -> f64 {
    let denom = 4.0 * SQRT_2 * theta.sin();
    if denom <= CLASSICAL_S_BOUND {
        1.0
    } else {
        CLASSICAL_S_BOUND / denom
    }
}

/// Witness value of the family measured along `-x̂` and `ẑ`.
pub fn activation_s_value(fam: &ActivationFamily) -> Result<f64> {
    s_value(&behavior_of(&activation_preparations(fam)?, &activation_measurements()?)?)
}

/// All subsets of size `k`, in lexicographic order of positions.
pub fn subsets<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    fn go<T: Clone>(items: &[T], k: usize, start: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i].clone());
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    go(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}
