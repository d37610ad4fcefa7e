//! The two-outcome sphere model.
//!
//! States are points on a sphere of radius `1/√2`. Measuring along `u` drops
//! the particle orthogonally onto the elastic stretched between `u` and `-u`,
//! where it sits at `cosθ/√2` with `cosθ = 2 w·u`; the elastic then breaks
//! according to a 1-D density and drags the particle to `u` or `-u`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::checker::{kolmogorov_check, Bundle, JointTriple, KolmogorovVerdict, PairwiseTransitions};
use crate::density::{sample_outcome_1d, transition_probabilities_1d, DensitySpec};
use crate::error::{domain, Result};
use crate::mc::{self, Tally};

pub const RADIUS: f64 = FRAC_1_SQRT_2;
const NORM_TOL: f64 = 1e-9;

/// A point of the radius-`1/√2` sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub fn new(coords: [f64; 3]) -> Result<Self> {
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - RADIUS).abs() > NORM_TOL {
            return Err(domain(format!("Bloch vector norm {norm}, expected 1/sqrt(2)")));
        }
        Ok(Self(coords))
    }

    /// Rescales any nonzero direction onto the sphere.
    pub fn from_direction(d: [f64; 3]) -> Result<Self> {
        let norm = d.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(domain("direction must be nonzero and finite"));
        }
        Ok(Self(d.map(|c| c * RADIUS / norm)))
    }

    /// Point at polar angle `theta` and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self([
            RADIUS * theta.sin() * phi.cos(),
            RADIUS * theta.sin() * phi.sin(),
            RADIUS * theta.cos(),
        ])
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0).map(|(a, b)| a * b).sum()
    }

    pub fn antipode(&self) -> Self {
        Self(self.0.map(|c| -c))
    }

    /// Applies a 3x3 matrix, renormalizing onto the sphere.
    pub fn transform(&self, m: &[[f64; 3]; 3]) -> Result<Self> {
        let v = [0, 1, 2].map(|r| (0..3).map(|c| m[r][c] * self.0[c]).sum());
        Self::from_direction(v)
    }
}

impl<'de> Deserialize<'de> for BlochVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = <[f64; 3]>::deserialize(d)?;
        BlochVector::new(raw).map_err(serde::de::Error::custom)
    }
}

/// Measurement sign: `Plus` lands on `u`, `Minus` on `-u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn target(self, u: &BlochVector) -> BlochVector {
        match self {
            Sign::Plus => *u,
            Sign::Minus => u.antipode(),
        }
    }
}

/// `cosθ = 2 w·u`.
pub fn fall(w: &BlochVector, u: &BlochVector) -> f64 {
    (2.0 * w.dot(u)).clamp(-1.0, 1.0)
}

/// Probability of `sign` when measuring `u` on `w`.
pub fn transition(w: &BlochVector, u: &BlochVector, sign: Sign, rho: &DensitySpec) -> Result<f64> {
    let (plus, minus) = transition_probabilities_1d(fall(w, u), rho)?;
    Ok(match sign {
        Sign::Plus => plus,
        Sign::Minus => minus,
    })
}

/// One measurement: the sign and the collapsed state `±u`.
pub fn measure<R: Rng + ?Sized>(
    w: &BlochVector,
    u: &BlochVector,
    rho: &DensitySpec,
    rng: &mut R,
) -> Result<(Sign, BlochVector)> {
    let sign = match sample_outcome_1d(fall(w, u), rho, rng)? {
        0 => Sign::Plus,
        _ => Sign::Minus,
    };
    Ok((sign, sign.target(u)))
}

/// Seeded sign counts for repeated single measurements.
pub fn measure_many(w: &BlochVector, u: &BlochVector, rho: &DensitySpec, trials: u64, seed: u64) -> Result<Tally> {
    let c = fall(w, u);
    mc::tally(2, trials, seed, |rng| sample_outcome_1d(c, rho, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub direction: BlochVector,
    pub sign: Sign,
}

impl Step {
    pub fn new(direction: BlochVector, sign: Sign) -> Self {
        Self { direction, sign }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequentialRecord {
    pub initial: BlochVector,
    pub steps: Vec<Step>,
    pub probability: f64,
}

/// Joint probability of a chain of measurements with prescribed signs.
pub fn sequential_joint(w: &BlochVector, steps: &[Step], rho: &DensitySpec) -> Result<SequentialRecord> {
    let mut state = *w;
    let mut probability = 1.0;
    for step in steps {
        probability *= transition(&state, &step.direction, step.sign, rho)?;
        state = step.sign.target(&step.direction);
    }
    Ok(SequentialRecord {
        initial: *w,
        steps: steps.to_vec(),
        probability,
    })
}

/// Fraction of simulated chains that follow every prescribed sign.
pub fn sequential_mc(w: &BlochVector, steps: &[Step], rho: &DensitySpec, trials: u64, seed: u64) -> Result<Tally> {
    mc::tally(2, trials, seed, |rng| {
        let mut state = *w;
        for step in steps {
            let (sign, post) = measure(&state, &step.direction, rho, rng)?;
            if sign != step.sign {
                return Ok(1);
            }
            state = post;
        }
        Ok(0)
    })
}

/// The three directions: `v` at π/4 from `w`, `u` at π/2 from `v`, all in
/// the xy-plane, with `u` at 3π/4 from `w`.
pub fn counterexample_directions() -> [BlochVector; 3] {
    let w = BlochVector::from_angles(FRAC_PI_2, 0.0);
    let v = BlochVector::from_angles(FRAC_PI_2, FRAC_PI_4);
    let u = BlochVector::from_angles(FRAC_PI_2, FRAC_PI_4 + FRAC_PI_2);
    [w, v, u]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub epsilon: f64,
    /// `P(→w→v|w)`, `P(→w→u|w)`, `P(→v→-u|w)` as `pVW`, `pUW`, `pUcV`.
    pub joints: JointTriple,
    pub transitions: PairwiseTransitions,
    pub violation: bool,
    pub kolmogorov: KolmogorovVerdict,
}

/// Evaluates the three sequential joints for the ε-model on the given
/// `(w, v, u)` triple and tests them against the classical bound.
pub fn counterexample_for(dirs: &[BlochVector; 3], epsilon: f64, tol: f64) -> Result<CounterexampleReport> {
    let rho = DensitySpec::Epsilon { epsilon };
    rho.validate()?;
    let [w, v, u] = dirs;
    let joint = |steps: &[Step]| sequential_joint(w, steps, &rho).map(|r| r.probability);
    let joints = JointTriple::new(
        joint(&[Step::new(*w, Sign::Plus), Step::new(*v, Sign::Plus)])?,
        joint(&[Step::new(*w, Sign::Plus), Step::new(*u, Sign::Plus)])?,
        joint(&[Step::new(*v, Sign::Plus), Step::new(*u, Sign::Minus)])?,
    )?;
    let transitions = PairwiseTransitions::new(
        transition(w, v, Sign::Plus, &rho)?,
        transition(v, u, Sign::Plus, &rho)?,
        transition(w, u, Sign::Plus, &rho)?,
    )?;
    let kolmogorov = kolmogorov_check(&joints, tol);
    Ok(CounterexampleReport {
        epsilon,
        joints,
        transitions,
        violation: joints.pVW - joints.pUW > joints.pUcV,
        kolmogorov,
    })
}

pub fn counterexample(epsilon: f64) -> Result<CounterexampleReport> {
    counterexample_for(&counterexample_directions(), epsilon, crate::checker::DEFAULT_TOL)
}

/// The counterexample statistics as a classification bundle.
pub fn counterexample_bundle(epsilon: f64) -> Result<Bundle> {
    let r = counterexample(epsilon)?;
    Ok(Bundle {
        joints: vec![r.joints],
        transitions: vec![r.transitions],
    })
}
