//! Membranes with arbitrary breaking densities.
//!
//! One-dimensional densities live on the elastic `z ∈ [-1/√2, 1/√2]`, whose
//! end at `+1/√2` is outcome `+`. A particle sitting at `z_a = cosθ/√2`
//! leaves the mass below it in region `A_1`; a break there pulls it to `+`.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::{cellular_block_law, CellularDensity};
use crate::error::{domain, Result, TrmError};
use crate::mc::{self, Estimate, McRng, Tally};
use crate::simplex::{region_of, BarycentricVector, OutcomePartition};
use crate::utr;

/// Half-length of the elastic.
pub const HALF_LENGTH: f64 = FRAC_1_SQRT_2;

const COS_TOL: f64 = 1e-12;

/// A breaking law for the membrane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    /// Flat law on the whole membrane.
    Uniform,
    /// Flat on the central segment of length `√2·ε`, unbreakable outside.
    Epsilon {
        epsilon: f64,
    },
    /// Breaks only at `z0`.
    PointBreak {
        z0: f64,
    },
    /// Breaks at `+1/√2` with weight `a` and at `-1/√2` with weight `b`.
    DoublePoint {
        a: f64,
        b: f64,
    },
    Cellular(CellularDensity),
    /// Piecewise-constant 1-D law: `masses[j]` spread evenly on
    /// `[breakpoints[j], breakpoints[j+1])`.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        masses: Vec<f64>,
    },
}

/// A sampled breaking point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum BreakPoint {
    Line(f64),
    Simplex(BarycentricVector),
}

impl DensitySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DensitySpec::Uniform | DensitySpec::Cellular(_) => Ok(()),
            DensitySpec::Epsilon { epsilon } => {
                if *epsilon > 0.0 && *epsilon <= 1.0 {
                    Ok(())
                } else {
                    Err(domain(format!("epsilon must lie in (0,1], got {epsilon}")))
                }
            }
            DensitySpec::PointBreak { z0 } => {
                if z0.abs() <= HALF_LENGTH + COS_TOL {
                    Ok(())
                } else {
                    Err(domain(format!("break point {z0} is off the elastic")))
                }
            }
            DensitySpec::DoublePoint { a, b } => {
                if *a > 0.0 && *b > 0.0 && (a + b - 1.0).abs() <= 1e-9 {
                    Ok(())
                } else {
                    Err(domain(format!(
                        "double point weights ({a},{b}) must be positive and sum to 1"
                    )))
                }
            }
            DensitySpec::PiecewiseConstant { breakpoints, masses } => {
                if breakpoints.len() != masses.len() + 1 || masses.is_empty() {
                    return Err(domain("piecewise density needs one more breakpoint than masses"));
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(domain("breakpoints must be strictly increasing"));
                }
                if breakpoints[0] < -HALF_LENGTH - COS_TOL || breakpoints[breakpoints.len() - 1] > HALF_LENGTH + COS_TOL
                {
                    return Err(domain("breakpoints must lie on the elastic"));
                }
                if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
                    return Err(domain("masses must be nonnegative"));
                }
                let total: f64 = masses.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(TrmError::DegenerateDensity(format!(
                        "piecewise masses sum to {total}, expected 1"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn is_one_dimensional(&self) -> bool {
        !matches!(self, DensitySpec::Cellular(_))
    }

    /// Mass strictly below `z` and atom mass exactly at `z`.
    fn split_at(&self, z: f64) -> Result<(f64, f64)> {
        let flat = |half: f64| ((z + half) / (2.0 * half)).clamp(0.0, 1.0);
        Ok(match self {
            DensitySpec::Uniform => (flat(HALF_LENGTH), 0.0),
            DensitySpec::Epsilon { epsilon } => (flat(epsilon * HALF_LENGTH), 0.0),
            DensitySpec::PointBreak { z0 } => {
                if *z0 < z {
                    (1.0, 0.0)
                } else if *z0 == z {
                    (0.0, 1.0)
                } else {
                    (0.0, 0.0)
                }
            }
            DensitySpec::DoublePoint { a, b } => {
                let mut below = 0.0;
                let mut atom = 0.0;
                for (pos, w) in [(-HALF_LENGTH, *b), (HALF_LENGTH, *a)] {
                    if pos < z {
                        below += w;
                    } else if pos == z {
                        atom += w;
                    }
                }
                (below, atom)
            }
            DensitySpec::PiecewiseConstant { breakpoints, masses } => {
                let below = breakpoints
                    .windows(2)
                    .zip(masses)
                    .map(|(w, m)| m * ((z - w[0]) / (w[1] - w[0])).clamp(0.0, 1.0))
                    .sum::<f64>();
                (below.min(1.0), 0.0)
            }
            DensitySpec::Cellular(_) => return Err(domain("cellular densities are not one-dimensional")),
        })
    }

    /// Cumulative distribution of a 1-D law (atoms counted fully at their
    /// own position).
    pub fn cdf(&self, z: f64) -> Result<f64> {
        let (below, atom) = self.split_at(z)?;
        Ok(below + atom)
    }
}

fn check_cos(cos_theta: f64) -> Result<f64> {
    if !cos_theta.is_finite() || cos_theta.abs() > 1.0 + COS_TOL {
        return Err(domain(format!("cos theta {cos_theta} outside [-1,1]")));
    }
    Ok(cos_theta.clamp(-1.0, 1.0))
}

/// `(p+, p-)` for a particle at `z = cosθ/√2` under a 1-D density. An atom
/// exactly at the particle splits evenly.
pub fn transition_probabilities_1d(cos_theta: f64, rho: &DensitySpec) -> Result<(f64, f64)> {
    let c = check_cos(cos_theta)?;
    if !rho.is_one_dimensional() {
        return Err(domain("transition_probabilities_1d needs a one-dimensional density"));
    }
    rho.validate()?;
    let (below, atom) = rho.split_at(c * HALF_LENGTH)?;
    let plus = (below + 0.5 * atom).clamp(0.0, 1.0);
    Ok((plus, 1.0 - plus))
}

/// Closed-form ε-model law. The two Heaviside branches apply for
/// `|cosθ| > ε`; at `|cosθ| = ε` the breakable-segment branch is used.
pub fn epsilon_probability(cos_theta: f64, epsilon: f64) -> Result<(f64, f64)> {
    let c = check_cos(cos_theta)?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(domain(format!("epsilon must lie in (0,1], got {epsilon}")));
    }
    Ok(if c > epsilon {
        (1.0, 0.0)
    } else if c < -epsilon {
        (0.0, 1.0)
    } else {
        (0.5 * (1.0 + c / epsilon), 0.5 * (1.0 - c / epsilon))
    })
}

/// One draw from `rho`. `Uniform` draws on the elastic; use
/// [`crate::simplex::sample_uniform`] for the flat law on a simplex.
pub fn sample_break_point<R: Rng + ?Sized>(rho: &DensitySpec, rng: &mut R) -> Result<BreakPoint> {
    rho.validate()?;
    Ok(match rho {
        DensitySpec::Uniform => BreakPoint::Line(HALF_LENGTH * (2.0 * rng.random::<f64>() - 1.0)),
        DensitySpec::Epsilon { epsilon } => BreakPoint::Line(epsilon * HALF_LENGTH * (2.0 * rng.random::<f64>() - 1.0)),
        DensitySpec::PointBreak { z0 } => BreakPoint::Line(*z0),
        DensitySpec::DoublePoint { a, .. } => BreakPoint::Line(if rng.random::<f64>() < *a {
            HALF_LENGTH
        } else {
            -HALF_LENGTH
        }),
        DensitySpec::PiecewiseConstant { breakpoints, masses } => {
            let u = rng.random::<f64>();
            let mut acc = 0.0;
            let mut j = masses.len() - 1;
            for (i, m) in masses.iter().enumerate() {
                acc += m;
                if u < acc && *m > 0.0 {
                    j = i;
                    break;
                }
            }
            let t = rng.random::<f64>();
            BreakPoint::Line(breakpoints[j] + t * (breakpoints[j + 1] - breakpoints[j]))
        }
        DensitySpec::Cellular(d) => {
            let sub = d.subdivision()?;
            let c = d.breakable()[rng.random_range(0..d.breakable().len())];
            BreakPoint::Simplex(sub.sample_in_cell(c, rng))
        }
    })
}

/// One 1-D measurement: 0 for outcome `+`, 1 for `-`.
pub fn sample_outcome_1d<R: Rng + ?Sized>(cos_theta: f64, rho: &DensitySpec, rng: &mut R) -> Result<usize> {
    let z_a = check_cos(cos_theta)? * HALF_LENGTH;
    let BreakPoint::Line(z) = sample_break_point(rho, rng)? else {
        return Err(domain("sample_outcome_1d needs a one-dimensional density"));
    };
    Ok(if z < z_a {
        0
    } else if z > z_a {
        1
    } else {
        usize::from(rng.random::<bool>())
    })
}

/// Seeded outcome counts for a 1-D measurement.
pub fn measure_1d_mc(cos_theta: f64, rho: &DensitySpec, trials: u64, seed: u64) -> Result<Tally> {
    if !rho.is_one_dimensional() {
        return Err(domain("measure_1d_mc needs a one-dimensional density"));
    }
    mc::tally(2, trials, seed, |rng| sample_outcome_1d(cos_theta, rho, rng))
}

/// Block law of a measurement with density `rho` on `S_{N-1}`.
///
/// `Uniform` is exact. `Cellular` is exact for N = 2 and otherwise estimated
/// by stratified sampling: `mc_samples` points split evenly over the
/// breakable cells, each cell on its own substream of `seed`.
pub fn transition_probabilities_nd(
    x: &BarycentricVector,
    rho: &DensitySpec,
    p: &OutcomePartition,
    mc_samples: u64,
    seed: u64,
) -> Result<Estimate> {
    match rho {
        DensitySpec::Uniform => Ok(Estimate::exact(utr::outcome_probabilities(x, p)?)),
        DensitySpec::Cellular(d) => {
            if d.dim() != x.dim() || p.dim() != x.dim() {
                return Err(TrmError::DimensionMismatch {
                    expected: x.dim(),
                    got: d.dim(),
                });
            }
            let sub = d.subdivision()?;
            if x.dim() == 2 {
                let fractions = sub.region_fractions(x)?;
                return Ok(Estimate::exact(cellular_block_law(
                    &fractions,
                    d.breakable().iter().copied(),
                    p,
                )));
            }
            let per_cell = mc_samples.div_ceil(d.breakable().len() as u64).max(1);
            let rows = d
                .breakable()
                .par_iter()
                .map(|&c| {
                    let mut rng = mc::shard_rng(seed, c as u64);
                    stratum(&sub, c, x, p, per_cell, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(stratified_estimate(&rows, per_cell))
        }
        _ => Err(domain(
            "transition_probabilities_nd needs a Uniform or Cellular density",
        )),
    }
}

/// Block frequencies from `m` uniform points in cell `c`.
pub(crate) fn stratum(
    sub: &crate::cells::Subdivision,
    c: usize,
    x: &BarycentricVector,
    p: &OutcomePartition,
    m: u64,
    rng: &mut McRng,
) -> Result<Vec<f64>> {
    let mut counts = vec![0u64; p.len()];
    for _ in 0..m {
        let mut attempts = 0;
        let region = loop {
            let lambda = sub.sample_in_cell(c, rng);
            match region_of(x, &lambda) {
                Ok(i) => break i,
                Err(TrmError::Boundary) if attempts < utr::MAX_BOUNDARY_RESAMPLES => attempts += 1,
                Err(TrmError::Boundary) => return Err(TrmError::ResampleLimit(utr::MAX_BOUNDARY_RESAMPLES)),
                Err(e) => return Err(e),
            }
        };
        counts[p.block_of(region)?] += 1;
    }
    Ok(counts.into_iter().map(|k| k as f64 / m as f64).collect())
}

/// Equal-weight combination of per-cell frequency rows.
pub(crate) fn stratified_estimate(rows: &[Vec<f64>], per_cell: u64) -> Estimate {
    let cells = rows.len() as f64;
    let width = rows.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; width];
    let mut var = vec![0.0; width];
    for row in rows {
        for (k, f) in row.iter().enumerate() {
            mean[k] += f;
            var[k] += f * (1.0 - f) / per_cell as f64;
        }
    }
    Estimate {
        mean: mean.iter().map(|m| m / cells).collect(),
        stderr: var.iter().map(|v| v.sqrt() / cells).collect(),
    }
}
