//! Reference complex Hilbert space model: Born rule, projective collapse,
//! tensor products and product-state tests. Serves as the oracle the
//! membrane model is compared against.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, TrmError};
use crate::simplex::{BarycentricVector, OutcomePartition};
use crate::utr;

const NORM_TOL: f64 = 1e-9;

/// A unit vector of `C^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertState(Vec<Complex64>);

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl HilbertState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(domain("state needs at least one amplitude"));
        }
        let n = norm_sqr(&amplitudes);
        if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
            return Err(domain(format!("squared norm {n}, expected 1")));
        }
        let s = n.sqrt();
        Ok(Self(amplitudes.into_iter().map(|a| a / s).collect()))
    }

    /// `Σ √x_i e^{iα_i} |i>` in the computational basis.
    pub fn from_weights(x: &BarycentricVector, phases: &[f64]) -> Result<Self> {
        if phases.len() != x.dim() {
            return Err(TrmError::DimensionMismatch {
                expected: x.dim(),
                got: phases.len(),
            });
        }
        Self::new(
            x.components()
                .iter()
                .zip(phases)
                .map(|(w, a)| Complex64::from_polar(w.sqrt(), *a))
                .collect(),
        )
    }

    pub fn basis(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(TrmError::IndexOutOfRange { index: i, dim: n });
        }
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[i] = Complex64::new(1.0, 0.0);
        Ok(Self(v))
    }

    /// Haar-random pure state.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        Self::new(normalized(gaussian_vector(n, rng)))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    /// Squared moduli of the amplitudes.
    pub fn weights(&self) -> Vec<f64> {
        self.0.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multiplies amplitude `i` by `e^{i phases[i]}`.
    pub fn with_phases(&self, phases: &[f64]) -> Self {
        Self(
            self.0
                .iter()
                .zip(phases)
                .map(|(a, p)| a * Complex64::from_polar(1.0, *p))
                .collect(),
        )
    }
}

impl Serialize for HilbertState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(|a| [a.re, a.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HilbertState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        HilbertState::new(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .map_err(serde::de::Error::custom)
    }
}

fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

fn normalized(v: Vec<Complex64>) -> Vec<Complex64> {
    let s = norm_sqr(&v).sqrt();
    v.into_iter().map(|a| a / s).collect()
}

/// An observable given spectrally: an orthonormal eigenbasis, a grouping of
/// the basis vectors into eigenspaces, and one eigenvalue per eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertObservable {
    basis: Vec<Vec<Complex64>>,
    grouping: OutcomePartition,
    eigenvalues: Vec<f64>,
}

impl HilbertObservable {
    pub fn new(basis: Vec<Vec<Complex64>>, grouping: OutcomePartition, eigenvalues: Vec<f64>) -> Result<Self> {
        let n = basis.len();
        if grouping.dim() != n {
            return Err(TrmError::DimensionMismatch {
                expected: n,
                got: grouping.dim(),
            });
        }
        if basis.iter().any(|v| v.len() != n) {
            return Err(domain("eigenbasis vectors must have length N"));
        }
        for i in 0..n {
            for j in 0..n {
                let g = inner(&basis[i], &basis[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                if (g - want).norm() > NORM_TOL {
                    return Err(domain(format!("eigenbasis not orthonormal at ({i},{j})")));
                }
            }
        }
        if eigenvalues.len() != grouping.len() {
            return Err(domain("one eigenvalue per eigenspace is required"));
        }
        for (a, va) in eigenvalues.iter().enumerate() {
            if eigenvalues[..a].contains(va) {
                return Err(domain("eigenvalues of distinct eigenspaces must differ"));
            }
        }
        Ok(Self {
            basis,
            grouping,
            eigenvalues,
        })
    }

    /// Computational-basis observable with eigenvalue `k` on block `k`.
    pub fn diagonal(grouping: OutcomePartition) -> Result<Self> {
        let n = grouping.dim();
        let basis = (0..n)
            .map(|i| HilbertState::basis(n, i).map(|s| s.0))
            .collect::<Result<Vec<_>>>()?;
        let eig = (0..grouping.len()).map(|k| k as f64).collect();
        Self::new(basis, grouping, eig)
    }

    /// Random eigenbasis (Gram-Schmidt on Gaussian vectors).
    pub fn random<R: Rng + ?Sized>(grouping: OutcomePartition, rng: &mut R) -> Result<Self> {
        let n = grouping.dim();
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        while basis.len() < n {
            let mut v = gaussian_vector(n, rng);
            for b in &basis {
                let c = inner(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
            if norm_sqr(&v) > 1e-6 {
                basis.push(normalized(v));
            }
        }
        let eig = (0..grouping.len()).map(|k| k as f64).collect();
        Self::new(basis, grouping, eig)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn grouping(&self) -> &OutcomePartition {
        &self.grouping
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn with_grouping(&self, grouping: OutcomePartition) -> Result<Self> {
        let eig = (0..grouping.len()).map(|k| k as f64).collect();
        Self::new(self.basis.clone(), grouping, eig)
    }

    /// `<a_i|ψ>` for every eigenvector.
    pub fn coefficients(&self, psi: &HilbertState) -> Result<Vec<Complex64>> {
        if psi.dim() != self.dim() {
            return Err(TrmError::DimensionMismatch {
                expected: self.dim(),
                got: psi.dim(),
            });
        }
        Ok(self.basis.iter().map(|a| inner(a, &psi.0)).collect())
    }

    /// `|<a_i|ψ>|²` for every eigenvector.
    pub fn weights(&self, psi: &HilbertState) -> Result<Vec<f64>> {
        Ok(self.coefficients(psi)?.iter().map(|c| c.norm_sqr()).collect())
    }
}

/// Born probability of each eigenspace.
pub fn born_probabilities(psi: &HilbertState, a: &HilbertObservable) -> Result<Vec<f64>> {
    let w = a.weights(psi)?;
    Ok(a.grouping
        .blocks()
        .iter()
        .map(|b| b.iter().map(|&i| w[i]).sum())
        .collect())
}

/// Normalized projection of `psi` onto eigenspace `block` of `a`.
pub fn collapse(psi: &HilbertState, a: &HilbertObservable, block: usize) -> Result<HilbertState> {
    let coeff = a.coefficients(psi)?;
    let members = a.grouping.block(block)?;
    let mut out = vec![Complex64::new(0.0, 0.0); a.dim()];
    for &i in members {
        for (o, e) in out.iter_mut().zip(&a.basis[i]) {
            *o += coeff[i] * e;
        }
    }
    let n = norm_sqr(&out);
    if n <= 0.0 {
        return Err(TrmError::ImpossibleOutcome);
    }
    Ok(HilbertState(normalized(out)))
}

/// Kronecker product of two qubit states, ordered `|11>, |12>, |21>, |22>`.
pub fn tensor(a: &HilbertState, b: &HilbertState) -> Result<HilbertState> {
    for s in [a, b] {
        if s.dim() != 2 {
            return Err(TrmError::DimensionMismatch {
                expected: 2,
                got: s.dim(),
            });
        }
    }
    Ok(HilbertState(
        a.0.iter().flat_map(|x| b.0.iter().map(move |y| x * y)).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductStateReport {
    pub is_product: bool,
    /// `|ψ_11 ψ_22 - ψ_12 ψ_21|`
    pub determinant: f64,
    /// Product-relation residuals on the squared moduli.
    pub relation_residuals: [f64; 4],
}

/// Rank-one test on the 2x2 amplitude arrangement of a two-qubit state.
pub fn is_product_state(psi: &HilbertState, tol: f64) -> Result<ProductStateReport> {
    if psi.dim() != 4 {
        return Err(TrmError::DimensionMismatch {
            expected: 4,
            got: psi.dim(),
        });
    }
    let a = &psi.0;
    let determinant = (a[0] * a[3] - a[1] * a[2]).norm();
    let w = psi.weights();
    Ok(ProductStateReport {
        is_product: determinant <= tol,
        determinant,
        relation_residuals: utr::product_relation_residuals(&[w[0], w[1], w[2], w[3]]),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub partitions: usize,
    pub max_probability_deviation: f64,
    pub max_collapse_deviation: f64,
}

impl CorrespondenceReport {
    pub fn max_deviation(&self) -> f64 {
        self.max_probability_deviation.max(self.max_collapse_deviation)
    }
}

/// Compares the Born model of `psi` against the membrane model on
/// `x_i = |<a_i|ψ>|²` for every partition of the outcomes: block
/// probabilities and post-measurement weights must agree.
pub fn utr_correspondence(psi: &HilbertState, a: &HilbertObservable) -> Result<CorrespondenceReport> {
    correspondence_with_offset(psi, a, 0.0)
}

/// [`utr_correspondence`] with `offset` added to the first Born probability,
/// so fault detection can be exercised end to end.
pub(crate) fn correspondence_with_offset(
    psi: &HilbertState,
    a: &HilbertObservable,
    offset: f64,
) -> Result<CorrespondenceReport> {
    let x = BarycentricVector::new(a.weights(psi)?)?;
    let partitions = OutcomePartition::enumerate(a.dim())?;
    let mut prob_dev: f64 = 0.0;
    let mut collapse_dev: f64 = 0.0;
    for p in &partitions {
        let obs = a.with_grouping(p.clone())?;
        let mut born = born_probabilities(psi, &obs)?;
        born[0] += offset;
        let membrane = utr::outcome_probabilities(&x, p)?;
        for (b, m) in born.iter().zip(&membrane) {
            prob_dev = prob_dev.max((b - m).abs());
        }
        for (k, &m) in membrane.iter().enumerate() {
            if m <= 0.0 {
                continue;
            }
            let post = obs.weights(&collapse(psi, &obs, k)?)?;
            let utr_post = utr::collapse(&x, p.block(k)?)?;
            for (h, u) in post.iter().zip(utr_post.components()) {
                collapse_dev = collapse_dev.max((h - u).abs());
            }
        }
    }
    Ok(CorrespondenceReport {
        partitions: partitions.len(),
        max_probability_deviation: prob_dev,
        max_collapse_deviation: collapse_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sample_state() -> HilbertState {
        HilbertState::new(vec![
            c(0.1f64.sqrt()),
            c(0.2f64.sqrt()),
            c(0.3f64.sqrt()),
            c(0.4f64.sqrt()),
        ])
        .unwrap()
    }

    #[test]
    fn born_examples() {
        let psi = sample_state();
        let halves = OutcomePartition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let p = born_probabilities(&psi, &HilbertObservable::diagonal(halves).unwrap()).unwrap();
        assert!((p[0] - 0.3).abs() < 1e-12 && (p[1] - 0.7).abs() < 1e-12);
        let single = HilbertObservable::diagonal(OutcomePartition::singletons(4).unwrap()).unwrap();
        let e = born_probabilities(&HilbertState::basis(4, 1).unwrap(), &single).unwrap();
        assert_eq!(e, vec![0.0, 1.0, 0.0, 0.0]);
        let phased = psi.with_phases(&[0.3, 1.7, -2.0, 0.9]);
        let a = born_probabilities(&psi, &single).unwrap();
        let b = born_probabilities(&phased, &single).unwrap();
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(born_probabilities(&HilbertState::basis(3, 0).unwrap(), &single).is_err());
    }

    #[test]
    fn collapse_examples() {
        let psi = sample_state();
        let halves = OutcomePartition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let obs = HilbertObservable::diagonal(halves).unwrap();
        let post = collapse(&psi, &obs, 0).unwrap();
        let want: [f64; 4] = [1.0 / 3.0, 2.0 / 3.0, 0.0, 0.0];
        for (a, w) in post.amplitudes().iter().zip(want) {
            assert!((a.re - w.sqrt()).abs() < 1e-12 && a.im.abs() < 1e-15);
        }
        let again = collapse(&post, &obs, 0).unwrap();
        for (a, b) in again.amplitudes().iter().zip(post.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
        let single = HilbertObservable::diagonal(OutcomePartition::singletons(4).unwrap()).unwrap();
        let third = collapse(&psi, &single, 2).unwrap();
        assert!((third.amplitudes()[2] - c(1.0)).norm() < 1e-15);
        assert_eq!(
            collapse(&HilbertState::basis(4, 0).unwrap(), &single, 3),
            Err(TrmError::ImpossibleOutcome)
        );
    }

    #[test]
    fn tensor_examples() {
        let a = HilbertState::new(vec![c(0.3f64.sqrt()), c(0.7f64.sqrt())]).unwrap();
        let b = HilbertState::new(vec![c(0.6f64.sqrt()), c(0.4f64.sqrt())]).unwrap();
        let w = tensor(&a, &b).unwrap().weights();
        for (x, y) in w.iter().zip([0.18, 0.12, 0.42, 0.28]) {
            assert!((x - y).abs() < 1e-12);
        }
        let t = tensor(&HilbertState::basis(2, 0).unwrap(), &HilbertState::basis(2, 1).unwrap()).unwrap();
        assert_eq!(t, HilbertState::basis(4, 1).unwrap());
        let pa = a.with_phases(&[0.4, 1.1]);
        let pb = b.with_phases(&[-0.7, 2.5]);
        let amp = tensor(&pa, &pb).unwrap();
        let arg = amp.amplitudes()[0].arg();
        assert!((arg - (0.4 - 0.7)).abs() < 1e-12);
        let arg = amp.amplitudes()[3].arg();
        assert!((arg - (1.1 + 2.5 - std::f64::consts::TAU)).abs() < 1e-12);
        assert!(tensor(&sample_state(), &a).is_err());
    }

    #[test]
    fn product_state_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let a = HilbertState::random(2, &mut rng).unwrap();
            let b = HilbertState::random(2, &mut rng).unwrap();
            let r = is_product_state(&tensor(&a, &b).unwrap(), 1e-12).unwrap();
            assert!(r.is_product);
            assert!(r.relation_residuals.iter().all(|x| x.abs() < 1e-12));
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = HilbertState::new(vec![c(0.0), c(s), c(-s), c(0.0)]).unwrap();
        let r = is_product_state(&singlet, 1e-12).unwrap();
        assert!(!r.is_product);
        assert!((r.relation_residuals[0] + 0.25).abs() < 1e-12);
        assert!(
            is_product_state(&HilbertState::basis(4, 0).unwrap(), 1e-12)
                .unwrap()
                .is_product
        );
    }

    #[test]
    fn observable_validation() {
        let p = OutcomePartition::singletons(2).unwrap();
        let bad = vec![vec![c(1.0), c(0.0)], vec![c(1.0), c(0.0)]];
        assert!(HilbertObservable::new(bad, p.clone(), vec![0.0, 1.0]).is_err());
        let basis = vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)]];
        assert!(HilbertObservable::new(basis, p, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn correspondence_on_eigenstate_is_exact() {
        let obs = HilbertObservable::diagonal(OutcomePartition::singletons(4).unwrap()).unwrap();
        let r = utr_correspondence(&HilbertState::basis(4, 2).unwrap(), &obs).unwrap();
        assert_eq!(r.partitions, 15);
        assert_eq!(r.max_deviation(), 0.0);
    }

    #[test]
    fn state_json_is_pairs() {
        let s = HilbertState::basis(2, 1).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[[0.0,0.0],[1.0,0.0]]");
        let back: HilbertState = serde_json::from_str("[[0.0,0.0],[1.0,0.0]]").unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<HilbertState>("[[0.5,0.0],[0.5,0.0]]").is_err());
    }
}
