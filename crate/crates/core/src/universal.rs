//! Universal measurements: the uniform average of the outcome law over all
//! `2^{n_c} - 1` cellular membranes built on `n_c` equal cells.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cells::{cellular_block_law, CellularDensity, Subdivision};
use crate::density::{stratified_estimate, stratum};
use crate::error::{domain, Result, TrmError};
use crate::mc::{self, Estimate};
use crate::simplex::{BarycentricVector, OutcomePartition};
use crate::utr;

/// Largest cell count accepted by exact enumeration.
pub const MAX_ENUMERATION_CELLS: usize = 24;
/// Largest triangle count for the exact N = 3 path.
pub const MAX_TRIANGLE_CELLS: usize = 16;
/// Largest N for the Monte Carlo path.
pub const MAX_MC_DIM: usize = 5;

fn check_enumeration(n_c: usize) -> Result<()> {
    if (1..=MAX_ENUMERATION_CELLS).contains(&n_c) {
        Ok(())
    } else {
        Err(domain(format!(
            "exact enumeration needs 1 <= n_c <= {MAX_ENUMERATION_CELLS}, got {n_c}"
        )))
    }
}

/// Every cellular density on `n_c` cells of `S_{N-1}`, one per nonempty
/// breakable subset, in increasing bitmask order.
pub fn enumerate_cellular(n: usize, n_c: usize) -> Result<impl Iterator<Item = CellularDensity>> {
    check_enumeration(n_c)?;
    let k = crate::cells::cells_per_edge(n, n_c)?;
    Ok((1u32..(1u32 << n_c)).map(move |mask| {
        let cells = (0..n_c).filter(|c| mask & (1 << c) != 0).collect();
        CellularDensity::new(n, k, cells).expect("nonempty in-range subset")
    }))
}

/// Exact universal average for N = 2 (any `n_c <= 24`) or N = 3 (`n_c` a
/// square `<= 16`).
pub fn universal_probability_exact(x: &BarycentricVector, n_c: usize, p: &OutcomePartition) -> Result<Vec<f64>> {
    check_enumeration(n_c)?;
    match x.dim() {
        2 => {}
        3 if n_c <= MAX_TRIANGLE_CELLS => {}
        3 => {
            return Err(domain(format!(
                "exact N=3 averaging is capped at {MAX_TRIANGLE_CELLS} cells"
            )))
        }
        n => return Err(domain(format!("exact averaging supports N <= 3, got {n}"))),
    }
    if p.dim() != x.dim() {
        return Err(TrmError::DimensionMismatch {
            expected: x.dim(),
            got: p.dim(),
        });
    }
    let sub = Subdivision::with_cell_count(x.dim(), n_c)?;
    let fractions = sub.region_fractions(x)?;
    Ok(average_over_subsets(&fractions, p))
}

/// Mean of the per-subset block laws over every nonempty subset of cells.
pub(crate) fn average_over_subsets(fractions: &[Vec<f64>], p: &OutcomePartition) -> Vec<f64> {
    let n_c = fractions.len();
    let subsets = (1u64 << n_c) - 1;
    const CHUNK: u64 = 1 << 12;
    let chunks = (subsets + 1).div_ceil(CHUNK);
    let partials: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|ch| {
            let mut acc = vec![0.0; p.len()];
            let lo = (ch * CHUNK).max(1);
            let hi = ((ch + 1) * CHUNK).min(subsets + 1);
            for mask in lo..hi {
                let law = cellular_block_law(fractions, (0..n_c).filter(|c| mask & (1 << c) != 0), p);
                for (a, v) in acc.iter_mut().zip(law) {
                    *a += v;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; p.len()];
    for part in partials {
        for (t, v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    total.iter().map(|t| t / subsets as f64).collect()
}

/// A uniformly random nonempty subset of `n_c` cells, by rejection of the
/// empty set.
pub fn sample_breakable<R: Rng + ?Sized>(n_c: usize, rng: &mut R) -> Vec<usize> {
    loop {
        let cells: Vec<usize> = (0..n_c).filter(|_| rng.random::<bool>()).collect();
        if !cells.is_empty() {
            return cells;
        }
    }
}

/// Monte Carlo universal average for `N <= 5`: `density_samples` random
/// cellular membranes, each integrated with `point_samples` stratified
/// points. The standard error is the spread of the per-membrane laws.
pub fn universal_probability_mc(
    x: &BarycentricVector,
    n_c: usize,
    p: &OutcomePartition,
    density_samples: u64,
    point_samples: u64,
    seed: u64,
) -> Result<Estimate> {
    if x.dim() > MAX_MC_DIM {
        return Err(domain(format!("Monte Carlo averaging supports N <= {MAX_MC_DIM}")));
    }
    if p.dim() != x.dim() {
        return Err(TrmError::DimensionMismatch {
            expected: x.dim(),
            got: p.dim(),
        });
    }
    if density_samples < 2 || point_samples == 0 {
        return Err(domain("need at least 2 densities and 1 point per density"));
    }
    let sub = Subdivision::with_cell_count(x.dim(), n_c)?;
    // N = 2 intervals integrate exactly; higher N samples inside the cells
    let fractions = if x.dim() == 2 {
        Some(sub.region_fractions(x)?)
    } else {
        None
    };
    let laws = (0..density_samples)
        .into_par_iter()
        .map(|d| {
            let mut rng = mc::shard_rng(seed, d);
            let breakable = sample_breakable(sub.cell_count(), &mut rng);
            match &fractions {
                Some(f) => Ok(cellular_block_law(f, breakable, p)),
                None => {
                    let per_cell = point_samples.div_ceil(breakable.len() as u64).max(1);
                    let rows = breakable
                        .iter()
                        .map(|&c| stratum(&sub, c, x, p, per_cell, &mut rng))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(stratified_estimate(&rows, per_cell).mean)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_and_stderr(&laws))
}

fn mean_and_stderr(samples: &[Vec<f64>]) -> Estimate {
    let m = samples.len() as f64;
    let width = samples[0].len();
    let mean: Vec<f64> = (0..width)
        .map(|k| samples.iter().map(|s| s[k]).sum::<f64>() / m)
        .collect();
    let stderr = (0..width)
        .map(|k| {
            let ss: f64 = samples.iter().map(|s| (s[k] - mean[k]).powi(2)).sum();
            (ss / (m - 1.0) / m).sqrt()
        })
        .collect();
    Estimate { mean, stderr }
}

/// How [`convergence_scan`] evaluates each cell count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanMode {
    Exact,
    MonteCarlo {
        density_samples: u64,
        point_samples: u64,
        seed: u64,
    },
}

/// One CSV row of a convergence scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub n_c: usize,
    /// 1-based block label
    pub outcome_index: usize,
    pub probability: f64,
    pub stderr: f64,
    /// `|P_univ - P_uniform|`
    pub deviation: f64,
}

/// Universal averages for each cell count, with their distance from the
/// uniform-membrane law.
pub fn convergence_scan(
    x: &BarycentricVector,
    n_c_list: &[usize],
    p: &OutcomePartition,
    mode: ScanMode,
) -> Result<Vec<ScanRow>> {
    let uniform = utr::outcome_probabilities(x, p)?;
    let mut rows = Vec::new();
    for (pos, &n_c) in n_c_list.iter().enumerate() {
        let est = match mode {
            ScanMode::Exact => Estimate::exact(universal_probability_exact(x, n_c, p)?),
            ScanMode::MonteCarlo {
                density_samples,
                point_samples,
                seed,
            } => universal_probability_mc(
                x,
                n_c,
                p,
                density_samples,
                point_samples,
                mc::derive_seed(seed, pos as u64),
            )?,
        };
        for (k, (&prob, &se)) in est.mean.iter().zip(&est.stderr).enumerate() {
            rows.push(ScanRow {
                n_c,
                outcome_index: k + 1,
                probability: prob,
                stderr: se,
                deviation: (prob - uniform[k]).abs(),
            });
        }
    }
    Ok(rows)
}
