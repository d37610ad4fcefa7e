//! Uniform tension-reduction measurements.
//!
//! The membrane breaks with the flat law on the simplex. A partition of the
//! outcomes fuses regions: the probability of block `k` is the total weight of
//! `x` on that block, and the particle lands on the renormalized restriction
//! of `x` to the block.

use rand::Rng;
use serde::Serialize;

use crate::error::{domain, Result, TrmError};
use crate::mc::{self, Tally};
use crate::simplex::{region_of, sample_uniform, BarycentricVector, OutcomePartition};

/// Resampling cap for breaking points that land on a region boundary.
pub const MAX_BOUNDARY_RESAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtrOutcome {
    pub block_index: usize,
    pub post_state: BarycentricVector,
    pub breaking_point: BarycentricVector,
}

fn check_partition(x: &BarycentricVector, p: &OutcomePartition) -> Result<()> {
    if p.dim() != x.dim() {
        return Err(TrmError::DimensionMismatch {
            expected: x.dim(),
            got: p.dim(),
        });
    }
    Ok(())
}

fn block_weight(x: &BarycentricVector, block: &[usize]) -> Result<f64> {
    block.iter().map(|&i| x.get(i)).sum()
}

/// Probability of each block: the sum of `x_i` over the block.
pub fn outcome_probabilities(x: &BarycentricVector, p: &OutcomePartition) -> Result<Vec<f64>> {
    check_partition(x, p)?;
    p.blocks().iter().map(|b| block_weight(x, b)).collect()
}

/// Renormalized restriction of `x` to `block`.
pub fn collapse(x: &BarycentricVector, block: &[usize]) -> Result<BarycentricVector> {
    let w = block_weight(x, block)?;
    if w <= 0.0 {
        return Err(TrmError::ImpossibleOutcome);
    }
    let mut c = vec![0.0; x.dim()];
    for &i in block {
        c[i] = x.components()[i] / w;
    }
    Ok(BarycentricVector::from_normalized(c))
}

/// Samples a breaking point that avoids region boundaries and returns it with
/// its region.
pub(crate) fn sample_region<R: Rng + ?Sized>(x: &BarycentricVector, rng: &mut R) -> Result<(usize, BarycentricVector)> {
    for _ in 0..MAX_BOUNDARY_RESAMPLES {
        let lambda = sample_uniform(x.dim(), rng)?;
        match region_of(x, &lambda) {
            Ok(i) => return Ok((i, lambda)),
            Err(TrmError::Boundary) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(TrmError::ResampleLimit(MAX_BOUNDARY_RESAMPLES))
}

/// One membrane measurement.
pub fn run_once<R: Rng + ?Sized>(x: &BarycentricVector, p: &OutcomePartition, rng: &mut R) -> Result<UtrOutcome> {
    check_partition(x, p)?;
    let (region, breaking_point) = sample_region(x, rng)?;
    let block_index = p.block_of(region)?;
    let post_state = collapse(x, p.block(block_index)?)?;
    Ok(UtrOutcome {
        block_index,
        post_state,
        breaking_point,
    })
}

/// Block counts over `trials` seeded measurements.
pub fn run_many(x: &BarycentricVector, p: &OutcomePartition, trials: u64, seed: u64) -> Result<Tally> {
    check_partition(x, p)?;
    mc::tally(p.len(), trials, seed, |rng| {
        let (region, _) = sample_region(x, rng)?;
        p.block_of(region)
    })
}

/// Probability of a chain of measurements, each with a chosen block, with the
/// state collapsed between steps. An impossible step gives 0.
pub fn sequential_probability(x: &BarycentricVector, steps: &[(OutcomePartition, usize)]) -> Result<f64> {
    let mut state = x.clone();
    let mut prob = 1.0;
    for (p, k) in steps {
        check_partition(&state, p)?;
        let block = p.block(*k)?;
        let w = block_weight(&state, block)?;
        if w <= 0.0 {
            return Ok(0.0);
        }
        prob *= w;
        state = collapse(&state, block)?;
    }
    Ok(prob)
}

/// Outcome law when the membrane can only break at `lambda` and the particle
/// position is uniformly unknown. Closed forms exist for N = 2 and N = 3.
pub fn complementary_probabilities(lambda: &BarycentricVector) -> Result<Vec<f64>> {
    let l = lambda.components();
    match l.len() {
        2 => Ok(vec![l[1], l[0]]),
        3 => {
            if l.iter().any(|&c| c <= 0.0) {
                return Err(domain("complementary law for N=3 needs an interior breaking point"));
            }
            let quad = |a: f64, b: f64, c: f64| b * c * (1.0 + a) / ((1.0 - b) * (1.0 - c));
            Ok(vec![
                quad(l[0], l[1], l[2]),
                quad(l[1], l[2], l[0]),
                quad(l[2], l[0], l[1]),
            ])
        }
        n => Err(domain(format!(
            "no closed complementary law for N={n}; use complementary_mc"
        ))),
    }
}

/// Monte Carlo estimate of the complementary law for any N: the particle is
/// drawn uniformly and the fixed `lambda` selects its region.
pub fn complementary_mc(lambda: &BarycentricVector, trials: u64, seed: u64) -> Result<Tally> {
    if lambda.components().iter().any(|&c| c <= 0.0) {
        return Err(domain("complementary Monte Carlo needs an interior breaking point"));
    }
    let n = lambda.dim();
    mc::tally(n, trials, seed, |rng| {
        for _ in 0..MAX_BOUNDARY_RESAMPLES {
            let x = sample_uniform(n, rng)?;
            match region_of(&x, lambda) {
                Ok(i) => return Ok(i),
                Err(TrmError::Boundary) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(TrmError::ResampleLimit(MAX_BOUNDARY_RESAMPLES))
    })
}

/// Residuals of the four product-state relations on a 4-outcome state
/// ordered `(1,1), (1,2), (2,1), (2,2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductCheck {
    pub holds: bool,
    pub residuals: [f64; 4],
}

pub fn product_relation_residuals(x: &[f64; 4]) -> [f64; 4] {
    let [x1, x2, x3, x4] = *x;
    [
        x1 - (x1 + x2) * (x1 + x3),
        x2 - (x1 + x2) * (x2 + x4),
        x3 - (x3 + x4) * (x1 + x3),
        x4 - (x3 + x4) * (x2 + x4),
    ]
}

pub fn product_probability_check(x: &BarycentricVector, tol: f64) -> Result<ProductCheck> {
    let c: [f64; 4] = x.components().try_into().map_err(|_| TrmError::DimensionMismatch {
        expected: 4,
        got: x.dim(),
    })?;
    let residuals = product_relation_residuals(&c);
    Ok(ProductCheck {
        holds: residuals.iter().all(|r| r.abs() <= tol),
        residuals,
    })
}
