//! Classification of sequential-measurement statistics.
//!
//! Two independent tests: whether a triple of joint probabilities can come
//! from one Kolmogorov probability space, and whether three pairwise
//! transition probabilities can come from three pure states of a qubit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TrmError};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Joint probabilities `P(V∩W)`, `P(U∩W)` and `P(U^c∩V)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
#[serde(deny_unknown_fields)]
pub struct JointTriple {
    pub pVW: f64,
    pub pUW: f64,
    pub pUcV: f64,
}

/// Transition probabilities between three pure states a, b, c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairwiseTransitions {
    pub p_ab: f64,
    pub p_bc: f64,
    pub p_ac: f64,
}

fn check_prob(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(TrmError::Schema(format!("{name}={v} is not a probability")))
    }
}

impl JointTriple {
    #[allow(non_snake_case)]
    pub fn new(pVW: f64, pUW: f64, pUcV: f64) -> Result<Self> {
        let t = Self { pVW, pUW, pUcV };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        check_prob("pVW", self.pVW)?;
        check_prob("pUW", self.pUW)?;
        check_prob("pUcV", self.pUcV)
    }
}

impl PairwiseTransitions {
    pub fn new(p_ab: f64, p_bc: f64, p_ac: f64) -> Result<Self> {
        let t = Self { p_ab, p_bc, p_ac };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        check_prob("p_ab", self.p_ab)?;
        check_prob("p_bc", self.p_bc)?;
        check_prob("p_ac", self.p_ac)
    }

    /// Bloch angles `2·arccos(√p)` in `[0, π]`.
    pub fn bloch_angles(&self) -> [f64; 3] {
        [self.p_ab, self.p_bc, self.p_ac].map(|p| 2.0 * p.clamp(0.0, 1.0).sqrt().acos())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum KolmogorovVerdict {
    Satisfied,
    /// `P(V∩W) - P(U∩W) - P(U^c∩V)`
    Violated {
        margin: f64,
    },
}

impl KolmogorovVerdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, KolmogorovVerdict::Satisfied)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum QubitVerdict {
    Embeddable,
    /// Largest violation among the spherical triangle inequalities, in radians.
    NotEmbeddable {
        deficit: f64,
    },
}

impl QubitVerdict {
    pub fn is_embeddable(&self) -> bool {
        matches!(self, QubitVerdict::Embeddable)
    }
}

/// Classical admissibility: any three events of one probability space obey
/// `P(V∩W) - P(U∩W) <= P(U^c∩V)`.
pub fn kolmogorov_check(t: &JointTriple, tol: f64) -> KolmogorovVerdict {
    let margin = t.pVW - t.pUW - t.pUcV;
    if margin > tol {
        KolmogorovVerdict::Violated { margin }
    } else {
        KolmogorovVerdict::Satisfied
    }
}

/// Three qubit pure states with `|<a|b>|² = p` sit on the Bloch sphere at
/// angular distances `θ = 2·arccos(√p)`, so the transitions are realizable iff
/// the angles form a spherical triangle: each is at most the sum of the
/// other two and the perimeter is at most `2π`.
pub fn qubit_embeddable(p: &PairwiseTransitions, tol: f64) -> QubitVerdict {
    let [ab, bc, ac] = p.bloch_angles();
    let deficit = [ac - (ab + bc), ab - (bc + ac), bc - (ab + ac), ab + bc + ac - 2.0 * PI]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if deficit > tol {
        QubitVerdict::NotEmbeddable { deficit }
    } else {
        QubitVerdict::Embeddable
    }
}

/// A batch of statistics to classify.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    #[serde(default)]
    pub joints: Vec<JointTriple>,
    #[serde(default)]
    pub transitions: Vec<PairwiseTransitions>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub classical_ok: bool,
    pub qubit_ok: bool,
    pub joints: Vec<KolmogorovVerdict>,
    pub transitions: Vec<QubitVerdict>,
    pub notes: Vec<String>,
}

/// Runs both checks over a bundle. A model class survives only if every
/// entry passes its check.
pub fn classify(bundle: &Bundle, tol: f64) -> Result<ClassificationReport> {
    for j in &bundle.joints {
        j.validate()?;
    }
    for t in &bundle.transitions {
        t.validate()?;
    }
    let joints: Vec<_> = bundle.joints.iter().map(|j| kolmogorov_check(j, tol)).collect();
    let transitions: Vec<_> = bundle.transitions.iter().map(|t| qubit_embeddable(t, tol)).collect();
    let mut notes = Vec::new();
    if joints.is_empty() {
        notes.push("no joint triples: classical admissibility holds vacuously".to_string());
    }
    if transitions.is_empty() {
        notes.push("no transitions: qubit embeddability holds vacuously".to_string());
    }
    let violated = joints.iter().filter(|v| !v.is_satisfied()).count();
    if violated > 0 {
        notes.push(format!("{violated} joint triple(s) violate the classical bound"));
    }
    let blocked = transitions.iter().filter(|v| !v.is_embeddable()).count();
    if blocked > 0 {
        notes.push(format!("{blocked} transition set(s) admit no qubit model"));
    }
    Ok(ClassificationReport {
        classical_ok: violated == 0,
        qubit_ok: blocked == 0,
        joints,
        transitions,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_examples() {
        let v = kolmogorov_check(&JointTriple::new(1.0, 0.0, 0.5).unwrap(), DEFAULT_TOL);
        assert_eq!(v, KolmogorovVerdict::Violated { margin: 0.5 });
        assert!(kolmogorov_check(&JointTriple::new(0.5, 0.3, 0.4).unwrap(), DEFAULT_TOL).is_satisfied());
        assert!(kolmogorov_check(&JointTriple::new(0.3, 0.3, 0.0).unwrap(), DEFAULT_TOL).is_satisfied());
        assert!(JointTriple::new(1.2, 0.0, 0.0).is_err());
    }

    #[test]
    fn qubit_examples() {
        match qubit_embeddable(&PairwiseTransitions::new(1.0, 0.5, 0.0).unwrap(), DEFAULT_TOL) {
            QubitVerdict::NotEmbeddable { deficit } => assert!((deficit - PI / 2.0).abs() < 1e-12),
            v => panic!("expected violation, got {v:?}"),
        }
        let c = |a: f64| a.cos().powi(2);
        let born = PairwiseTransitions::new(c(PI / 8.0), 0.5, c(3.0 * PI / 8.0)).unwrap();
        let [a, b, ac] = born.bloch_angles();
        assert!((a - PI / 4.0).abs() < 1e-12);
        assert!((b - PI / 2.0).abs() < 1e-12);
        assert!((ac - 3.0 * PI / 4.0).abs() < 1e-12);
        assert!(qubit_embeddable(&born, DEFAULT_TOL).is_embeddable());
        assert!(qubit_embeddable(&PairwiseTransitions::new(1.0, 1.0, 1.0).unwrap(), DEFAULT_TOL).is_embeddable());
    }

    #[test]
    fn perimeter_bound_is_enforced() {
        // three mutually antipodal-ish angles: each pair at 0.9π
        let p = (0.45 * PI).cos().powi(2);
        let v = qubit_embeddable(&PairwiseTransitions::new(p, p, p).unwrap(), DEFAULT_TOL);
        assert!(!v.is_embeddable());
    }

    #[test]
    fn empty_bundle_is_vacuous() {
        let r = classify(&Bundle::default(), DEFAULT_TOL).unwrap();
        assert!(r.classical_ok && r.qubit_ok);
        assert_eq!(r.notes.len(), 2);
    }

    #[test]
    fn bundle_json_schema() {
        let b: Bundle = serde_json::from_str(
            r#"{"joints":[{"pVW":1,"pUW":0,"pUcV":0.5}],"transitions":[{"p_ab":1,"p_bc":0.5,"p_ac":0}]}"#,
        )
        .unwrap();
        let r = classify(&b, DEFAULT_TOL).unwrap();
        assert!(!r.classical_ok && !r.qubit_ok);
        assert!(serde_json::from_str::<Bundle>(r#"{"joints":[{"pVW":1}]}"#).is_err());
        let bad = Bundle {
            joints: vec![JointTriple {
                pVW: 2.0,
                pUW: 0.0,
                pUcV: 0.0,
            }],
            transitions: vec![],
        };
        assert!(matches!(classify(&bad, DEFAULT_TOL), Err(TrmError::Schema(_))));
    }
}
