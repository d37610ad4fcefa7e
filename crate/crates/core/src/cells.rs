//! Equal-measure cellular subdivisions of the simplex and cellular densities.
//!
//! Barycentric coordinates map linearly onto the order simplex
//! `0 <= t_1 <= ... <= t_d <= k` (d = N-1) through `t_j = k (λ_1 + ... + λ_j)`.
//! Cutting that by the hyperplanes `t_i ∈ Z` and `t_i - t_j ∈ Z` gives the
//! Freudenthal triangulation into `k^d` Kuhn simplices of identical volume.
//! For N = 2 the cells are the intervals `[j/k, (j+1)/k)` of `λ_1`; for N = 3
//! they are the k² upward and downward triangles of the edgewise subdivision.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, TrmError};
use crate::simplex::{BarycentricVector, OutcomePartition};

/// Largest simplex dimension N for which cellular densities are supported.
pub const MAX_CELLULAR_DIM: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
struct KuhnCell {
    base: Vec<usize>,
    // coordinate order of descending fractional parts
    perm: Vec<usize>,
}

/// The subdivision of `S_{N-1}` into `k^{N-1}` equal cells.
#[derive(Debug, Clone)]
pub struct Subdivision {
    n: usize,
    k: usize,
    cells: Vec<KuhnCell>,
    index: HashMap<(Vec<usize>, Vec<usize>), usize>,
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(d - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, d - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

impl Subdivision {
    /// `k` cells per edge on `S_{N-1}`.
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if !(2..=MAX_CELLULAR_DIM).contains(&n) {
            return Err(domain(format!(
                "cellular subdivisions support 2 <= N <= {MAX_CELLULAR_DIM}, got {n}"
            )));
        }
        if k == 0 {
            return Err(domain("cells per edge must be positive"));
        }
        let d = n - 1;
        let total = k
            .checked_pow(d as u32)
            .filter(|&t| t <= 1 << 20)
            .ok_or_else(|| domain("too many cells"))?;
        let perms = permutations(d);
        let mut cells = Vec::with_capacity(total);
        let mut base = vec![0usize; d];
        loop {
            for perm in &perms {
                // centroid of the Kuhn simplex has fractional part (d-l)/(d+1)
                // at coordinate perm[l]
                let mut t = vec![0.0; d];
                for (l, &c) in perm.iter().enumerate() {
                    t[c] = base[c] as f64 + (d - l) as f64 / (d + 1) as f64;
                }
                let inside = t[0] > 0.0 && t.windows(2).all(|w| w[0] < w[1]) && t[d - 1] < k as f64;
                if inside {
                    cells.push(KuhnCell {
                        base: base.clone(),
                        perm: perm.clone(),
                    });
                }
            }
            // odometer over [0,k)^d
            let mut j = 0;
            while j < d {
                base[j] += 1;
                if base[j] < k {
                    break;
                }
                base[j] = 0;
                j += 1;
            }
            if j == d {
                break;
            }
        }
        debug_assert_eq!(cells.len(), total);
        let index = cells
            .iter()
            .enumerate()
            .map(|(i, c)| ((c.base.clone(), c.perm.clone()), i))
            .collect();
        Ok(Self { n, k, cells, index })
    }

    /// Subdivision with exactly `n_c` cells; `n_c` must be a perfect
    /// (N-1)-th power.
    pub fn with_cell_count(n: usize, n_c: usize) -> Result<Self> {
        let k = cells_per_edge(n, n_c)?;
        Self::new(n, k)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn cells_per_edge(&self) -> usize {
        self.k
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Every cell has measure `μ(S_{N-1}) / n_c`; this is the fraction.
    pub fn cell_fraction(&self) -> f64 {
        1.0 / self.cells.len() as f64
    }

    fn to_order(&self, lambda: &[f64]) -> Vec<f64> {
        let k = self.k as f64;
        let mut acc = 0.0;
        lambda[..self.n - 1]
            .iter()
            .map(|l| {
                acc += l;
                k * acc
            })
            .collect()
    }

    fn point_from_order(&self, t: &[f64]) -> BarycentricVector {
        let k = self.k as f64;
        let mut c = Vec::with_capacity(self.n);
        let mut prev = 0.0;
        for &tj in t {
            c.push(((tj - prev) / k).max(0.0));
            prev = tj;
        }
        c.push((1.0 - prev / k).max(0.0));
        let s: f64 = c.iter().sum();
        BarycentricVector::from_normalized(c.into_iter().map(|v| v / s).collect())
    }

    /// Cell containing `lambda`. Points on a shared face belong to the cell
    /// whose base has the larger floor, so membership is half-open.
    pub fn locate(&self, lambda: &BarycentricVector) -> Result<usize> {
        if lambda.dim() != self.n {
            return Err(TrmError::DimensionMismatch {
                expected: self.n,
                got: lambda.dim(),
            });
        }
        let t = self.to_order(lambda.components());
        let base: Vec<usize> = t
            .iter()
            .map(|&v| (v.floor().max(0.0) as usize).min(self.k - 1))
            .collect();
        let frac: Vec<f64> = t.iter().zip(&base).map(|(v, &b)| v - b as f64).collect();
        let mut perm: Vec<usize> = (0..t.len()).collect();
        perm.sort_by(|&a, &b| frac[b].total_cmp(&frac[a]).then(a.cmp(&b)));
        self.index.get(&(base, perm)).copied().ok_or(TrmError::Boundary)
    }

    /// Uniform point inside cell `c`.
    pub fn sample_in_cell<R: Rng + ?Sized>(&self, c: usize, rng: &mut R) -> BarycentricVector {
        let cell = &self.cells[c];
        let d = self.n - 1;
        let mut u: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        u.sort_by(|a, b| b.total_cmp(a));
        let mut t: Vec<f64> = cell.base.iter().map(|&b| b as f64).collect();
        for (l, &coord) in cell.perm.iter().enumerate() {
            t[coord] += u[l];
        }
        self.point_from_order(&t)
    }

    /// The N vertices of cell `c`.
    pub fn cell_vertices(&self, c: usize) -> Vec<BarycentricVector> {
        let cell = &self.cells[c];
        let mut t: Vec<f64> = cell.base.iter().map(|&b| b as f64).collect();
        let mut out = vec![self.point_from_order(&t)];
        for &coord in &cell.perm {
            t[coord] += 1.0;
            out.push(self.point_from_order(&t));
        }
        out
    }

    /// `fractions[c][i]`: share of cell `c` lying in region `A_i` of the
    /// particle at `x`. Exact for N = 2 (interval overlap) and N = 3 (convex
    /// polygon clipping).
    pub fn region_fractions(&self, x: &BarycentricVector) -> Result<Vec<Vec<f64>>> {
        if x.dim() != self.n {
            return Err(TrmError::DimensionMismatch {
                expected: self.n,
                got: x.dim(),
            });
        }
        match self.n {
            2 => {
                let k = self.k as f64;
                let x0 = x.components()[0];
                Ok((0..self.cell_count())
                    .map(|c| {
                        let f = ((x0 - c as f64 / k) * k).clamp(0.0, 1.0);
                        vec![f, 1.0 - f]
                    })
                    .collect())
            }
            3 => Ok((0..self.cell_count())
                .map(|c| triangle_fractions(&self.cell_vertices(c), x))
                .collect()),
            n => Err(domain(format!(
                "exact cell/region overlaps are available for N <= 3, got {n}"
            ))),
        }
    }
}

/// `k` such that `k^{N-1} = n_c`.
pub fn cells_per_edge(n: usize, n_c: usize) -> Result<usize> {
    if n < 2 {
        return Err(domain("N must be >= 2"));
    }
    if n_c == 0 {
        return Err(domain("cell count must be positive"));
    }
    let d = (n - 1) as u32;
    let guess = (n_c as f64).powf(1.0 / d as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1)
        .find(|&k| k > 0 && k.checked_pow(d) == Some(n_c))
        .ok_or_else(|| {
            domain(format!(
                "{n_c} cells cannot tile S_{} evenly; need a perfect {d}-th power",
                n - 1
            ))
        })
}

fn planar(v: &BarycentricVector) -> [f64; 2] {
    [v.components()[0], v.components()[1]]
}

fn signed_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        / 2.0
}

/// Sutherland-Hodgman clip of `subject` by the counter-clockwise convex
/// polygon `clip`.
fn clip_convex(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let side = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let (sp, sq) = (side(p), side(q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
    }
    out
}

fn ccw(mut tri: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    if signed_area(&tri) < 0.0 {
        tri.reverse();
    }
    tri
}

fn triangle_fractions(cell: &[BarycentricVector], x: &BarycentricVector) -> Vec<f64> {
    let cell = ccw(cell.iter().map(planar).collect());
    let cell_area = signed_area(&cell);
    let xp = planar(x);
    let verts = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]];
    (0..3)
        .map(|i| {
            let region: Vec<[f64; 2]> = (0..3).map(|j| if j == i { xp } else { verts[j] }).collect();
            if signed_area(&region).abs() <= f64::EPSILON {
                return 0.0;
            }
            let clipped = clip_convex(&cell, &ccw(region));
            if clipped.len() < 3 {
                0.0
            } else {
                (signed_area(&clipped) / cell_area).clamp(0.0, 1.0)
            }
        })
        .collect()
}

/// A cellular density: uniform over the breakable cells of a subdivision,
/// zero elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CellularWire", into = "CellularWire")]
pub struct CellularDensity {
    n: usize,
    k: usize,
    breakable: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellularWire {
    n: usize,
    cells_per_edge: usize,
    /// 1-based cell labels
    breakable: Vec<usize>,
}

impl TryFrom<CellularWire> for CellularDensity {
    type Error = TrmError;

    fn try_from(w: CellularWire) -> Result<Self> {
        let cells = w
            .breakable
            .iter()
            .map(|&c| c.checked_sub(1).ok_or_else(|| domain("cell labels are 1-based")))
            .collect::<Result<Vec<_>>>()?;
        CellularDensity::new(w.n, w.cells_per_edge, cells)
    }
}

impl From<CellularDensity> for CellularWire {
    fn from(d: CellularDensity) -> Self {
        Self {
            n: d.n,
            cells_per_edge: d.k,
            breakable: d.breakable.iter().map(|c| c + 1).collect(),
        }
    }
}

impl CellularDensity {
    /// `breakable` holds 0-based cell indices.
    pub fn new(n: usize, k: usize, mut breakable: Vec<usize>) -> Result<Self> {
        if !(2..=MAX_CELLULAR_DIM).contains(&n) || k == 0 {
            return Err(domain(format!("invalid cellular layout N={n}, k={k}")));
        }
        let total = k.pow((n - 1) as u32);
        breakable.sort_unstable();
        breakable.dedup();
        if breakable.is_empty() {
            return Err(TrmError::DegenerateDensity("no breakable cell".into()));
        }
        if let Some(&c) = breakable.iter().find(|&&c| c >= total) {
            return Err(TrmError::IndexOutOfRange { index: c, dim: total });
        }
        Ok(Self { n, k, breakable })
    }

    pub fn all_breakable(n: usize, k: usize) -> Result<Self> {
        let total = k.pow(n.saturating_sub(1) as u32);
        Self::new(n, k, (0..total).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn cells_per_edge(&self) -> usize {
        self.k
    }

    pub fn cell_count(&self) -> usize {
        self.k.pow((self.n - 1) as u32)
    }

    pub fn breakable(&self) -> &[usize] {
        &self.breakable
    }

    pub fn subdivision(&self) -> Result<Subdivision> {
        Subdivision::new(self.n, self.k)
    }
}

/// Block probabilities of one cellular membrane from precomputed per-cell
/// region fractions: the breakable-cell average of the fractions.
pub fn cellular_block_law(
    fractions: &[Vec<f64>],
    breakable: impl IntoIterator<Item = usize>,
    p: &OutcomePartition,
) -> Vec<f64> {
    let mut fine = vec![0.0; p.dim()];
    let mut count = 0usize;
    for c in breakable {
        for (acc, f) in fine.iter_mut().zip(&fractions[c]) {
            *acc += f;
        }
        count += 1;
    }
    p.blocks()
        .iter()
        .map(|b| b.iter().map(|&i| fine[i]).sum::<f64>() / count as f64)
        .collect()
}
