//! Geometry of the (N-1)-simplex spanned by N orthonormal vertices.
//!
//! A [`BarycentricVector`] is both a particle state and a membrane breaking
//! point. The particle at `x` splits the simplex into N regions `A_i`, the
//! convex hull of `x` with every vertex except the i-th; a break inside `A_i`
//! pulls the particle to vertex i.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, TrmError};

/// Tolerance on the component sum accepted by [`BarycentricVector::new`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Relative tolerance below which two tension ratios count as a tie.
pub const BOUNDARY_REL_TOL: f64 = 1e-12;

/// A point of the (N-1)-simplex: N nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BarycentricVector(Vec<f64>);

impl BarycentricVector {
    /// Validates and renormalizes. Components must be finite and nonnegative
    /// and their sum must be within [`NORMALIZATION_TOL`] of one.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() < 2 {
            return Err(domain(format!(
                "barycentric vector needs at least 2 components, got {}",
                components.len()
            )));
        }
        if let Some(c) = components.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(domain(format!("invalid barycentric component {c}")));
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(domain(format!("components sum to {sum}, expected 1")));
        }
        Ok(Self(components.into_iter().map(|c| c / sum).collect()))
    }

    /// Vertex `x̂_i` (0-based).
    pub fn vertex(n: usize, i: usize) -> Result<Self> {
        check_dim(n)?;
        if i >= n {
            return Err(TrmError::IndexOutOfRange { index: i, dim: n });
        }
        let mut c = vec![0.0; n];
        c[i] = 1.0;
        Ok(Self(c))
    }

    /// Barycenter `(1/N, ..., 1/N)`.
    pub fn barycenter(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub(crate) fn from_normalized(components: Vec<f64>) -> Self {
        debug_assert!((components.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Self(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Result<f64> {
        self.0.get(i).copied().ok_or(TrmError::IndexOutOfRange {
            index: i,
            dim: self.dim(),
        })
    }

    /// Indices with strictly positive weight.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, c)| **c > 0.0).map(|(i, _)| i)
    }

    /// Index of the vertex if this is one.
    pub fn as_vertex(&self) -> Option<usize> {
        let mut support = self.support();
        match (support.next(), support.next()) {
            (Some(i), None) => Some(i),
            _ => None,
        }
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl<'de> Deserialize<'de> for BarycentricVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(d)?;
        BarycentricVector::new(raw).map_err(serde::de::Error::custom)
    }
}

/// A partition of the outcome indices `{0..N}` into disjoint nonempty blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomePartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
    owner: Vec<usize>,
}

impl OutcomePartition {
    /// Builds a partition from 0-based blocks. Block order is kept; indices
    /// inside a block are sorted.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        check_dim(n)?;
        if blocks.is_empty() || blocks.len() > n {
            return Err(domain(format!(
                "partition of {n} outcomes cannot have {} blocks",
                blocks.len()
            )));
        }
        let mut owner = vec![usize::MAX; n];
        let mut sorted = Vec::with_capacity(blocks.len());
        for (k, mut block) in blocks.into_iter().enumerate() {
            if block.is_empty() {
                return Err(domain(format!("block {k} is empty")));
            }
            block.sort_unstable();
            for &i in &block {
                if i >= n {
                    return Err(TrmError::IndexOutOfRange { index: i, dim: n });
                }
                if owner[i] != usize::MAX {
                    return Err(domain(format!("index {i} appears in more than one block")));
                }
                owner[i] = k;
            }
            sorted.push(block);
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(domain(format!("index {i} is not covered by any block")));
        }
        Ok(Self {
            n,
            blocks: sorted,
            owner,
        })
    }

    /// Builds a partition from 1-based blocks, the form used in config files.
    pub fn from_one_based(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let shifted = blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|&i| i.checked_sub(1).ok_or_else(|| domain("block indices are 1-based")))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, shifted)
    }

    /// The non-degenerate measurement: one block per outcome.
    pub fn singletons(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|i| vec![i]).collect())
    }

    /// The trivial measurement with a single block.
    pub fn trivial(n: usize) -> Result<Self> {
        Self::new(n, vec![(0..n).collect()])
    }

    /// Every set partition of `{0..n}`, in restricted-growth-string order.
    pub fn enumerate(n: usize) -> Result<Vec<Self>> {
        check_dim(n)?;
        let mut out = Vec::new();
        let mut labels = vec![0usize; n];
        loop {
            let count = labels.iter().max().map_or(0, |m| m + 1);
            let mut blocks = vec![Vec::new(); count];
            for (i, &l) in labels.iter().enumerate() {
                blocks[l].push(i);
            }
            out.push(Self::new(n, blocks)?);

            // next restricted growth string
            let mut pos = n - 1;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                let prefix_max = labels[..pos].iter().copied().max().unwrap_or(0);
                if labels[pos] <= prefix_max {
                    labels[pos] += 1;
                    for l in &mut labels[pos + 1..] {
                        *l = 0;
                    }
                    break;
                }
                pos -= 1;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> Result<&[usize]> {
        self.blocks.get(k).map(Vec::as_slice).ok_or(TrmError::IndexOutOfRange {
            index: k,
            dim: self.blocks.len(),
        })
    }

    /// Block containing outcome `i`.
    pub fn block_of(&self, i: usize) -> Result<usize> {
        self.owner
            .get(i)
            .copied()
            .ok_or(TrmError::IndexOutOfRange { index: i, dim: self.n })
    }

    /// 1-based blocks.
    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.iter().map(|i| i + 1).collect()).collect()
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        Err(domain(format!("simplex dimension N must be >= 2, got {n}")))
    } else {
        Ok(())
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Lebesgue measure of `S_{N-1}`: `sqrt(N) / (N-1)!`.
pub fn simplex_measure(n: usize) -> Result<f64> {
    check_dim(n)?;
    Ok((n as f64).sqrt() / factorial(n - 1))
}

/// Measure of a facet `S^i_{N-2}`, i.e. of the simplex on N-1 vertices. A
/// point (N = 2) has unit counting measure.
pub fn facet_measure(n: usize) -> Result<f64> {
    check_dim(n)?;
    if n == 2 {
        Ok(1.0)
    } else {
        simplex_measure(n - 1)
    }
}

/// Measure of region `A_i`: `μ(S_{N-1}) · x_i`.
pub fn region_measure(x: &BarycentricVector, i: usize) -> Result<f64> {
    Ok(simplex_measure(x.dim())? * x.get(i)?)
}

/// Distance from `x` to the facet opposite vertex `i`: `sqrt(N/(N-1)) · x_i`.
pub fn height(x: &BarycentricVector, i: usize) -> Result<f64> {
    let n = x.dim() as f64;
    Ok((n / (n - 1.0)).sqrt() * x.get(i)?)
}

/// The region `A_i` containing breaking point `lambda` for a particle at `x`.
///
/// `lambda ∈ A_i` iff `i` minimizes `lambda_j / x_j` over the support of `x`.
/// A vertex state returns its own index. Ties within [`BOUNDARY_REL_TOL`]
/// yield [`TrmError::Boundary`].
pub fn region_of(x: &BarycentricVector, lambda: &BarycentricVector) -> Result<usize> {
    if x.dim() != lambda.dim() {
        return Err(TrmError::DimensionMismatch {
            expected: x.dim(),
            got: lambda.dim(),
        });
    }
    if let Some(i) = x.as_vertex() {
        return Ok(i);
    }
    let mut best = (usize::MAX, f64::INFINITY);
    let mut runner_up = f64::INFINITY;
    for (j, (&xj, &lj)) in x.components().iter().zip(lambda.components()).enumerate() {
        if xj <= 0.0 {
            continue;
        }
        let r = lj / xj;
        if r < best.1 {
            runner_up = best.1;
            best = (j, r);
        } else if r < runner_up {
            runner_up = r;
        }
    }
    if runner_up - best.1 <= BOUNDARY_REL_TOL * runner_up.abs() {
        return Err(TrmError::Boundary);
    }
    Ok(best.0)
}

/// Draws a point from the flat Lebesgue law on `S_{N-1}` via normalized
/// exponential spacings.
pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<BarycentricVector> {
    check_dim(n)?;
    Ok(BarycentricVector::from_normalized(uniform_components(n, rng)))
}

pub(crate) fn uniform_components<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut e: Vec<f64> = (0..n).map(|_| rng.sample(Exp1)).collect();
    let total: f64 = e.iter().sum();
    for v in &mut e {
        *v /= total;
    }
    e
}
