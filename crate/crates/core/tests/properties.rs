use proptest::prelude::*;
use trm_core::cells::Subdivision;
use trm_core::density::{self, DensitySpec};
use trm_core::hilbert::{self, HilbertObservable, HilbertState};
use trm_core::mc;
use trm_core::simplex::{self, BarycentricVector, OutcomePartition};
use trm_core::{sphere, universal, utr};

fn state(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = BarycentricVector> {
    n.prop_flat_map(|n| prop::collection::vec(0.001f64..1.0, n))
        .prop_map(|w| {
            BarycentricVector::new(w.clone().into_iter().map(|v| v / w.iter().sum::<f64>()).collect()).unwrap()
        })
}

fn partition_of(n: usize, labels: &[usize]) -> OutcomePartition {
    // relabel to 0..k in order of first appearance
    let mut map = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (i, &l) in labels.iter().take(n).enumerate() {
        let k = match map.iter().position(|&m| m == l) {
            Some(k) => k,
            None => {
                map.push(l);
                blocks.push(Vec::new());
                map.len() - 1
            }
        };
        blocks[k].push(i);
    }
    OutcomePartition::new(n, blocks).unwrap()
}

proptest! {
    #[test]
    fn region_measures_tile_the_simplex(x in state(2..=8)) {
        let n = x.dim();
        let total: f64 = (0..n).map(|i| simplex::region_measure(&x, i).unwrap()).sum();
        prop_assert!((total - simplex::simplex_measure(n).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn region_measure_is_a_cone(x in state(2..=8)) {
        let n = x.dim();
        let facet = simplex::facet_measure(n).unwrap();
        for i in 0..n {
            let lhs = simplex::region_measure(&x, i).unwrap();
            let rhs = facet * simplex::height(&x, i).unwrap() / (n as f64 - 1.0);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn region_of_is_constant_along_the_tension_ray(x in state(2..=4), seed in any::<u64>(), t in 0.05f64..1.0) {
        let mut rng = mc::shard_rng(seed, 0);
        let l = simplex::sample_uniform(x.dim(), &mut rng).unwrap();
        if let Ok(i) = simplex::region_of(&x, &l) {
            // points of the open segment (x, λ] lie in the same region
            let mid: Vec<f64> = x.components().iter().zip(l.components()).map(|(a, b)| a + t * (b - a)).collect();
            let mid = BarycentricVector::new(mid).unwrap();
            if let Ok(j) = simplex::region_of(&x, &mid) {
                prop_assert_eq!(i, j);
            }
            // convex-hull membership: λ = α0 x + Σ_{j≠i} αj e_j with α >= 0
            let alpha0 = l.components()[i] / x.components()[i];
            prop_assert!(alpha0 <= 1.0 + 1e-12);
            for j in 0..x.dim() {
                prop_assert!(l.components()[j] - alpha0 * x.components()[j] >= -1e-12);
            }
        }
    }

    #[test]
    fn outcome_law_is_normalized(x in state(2..=6), labels in prop::collection::vec(0usize..6, 6)) {
        let p = partition_of(x.dim(), &labels);
        let probs = utr::outcome_probabilities(&x, &p).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(probs.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn collapse_gives_conditional_law(x in state(2..=6), labels in prop::collection::vec(0usize..6, 6)) {
        let p = partition_of(x.dim(), &labels);
        let fine = OutcomePartition::singletons(x.dim()).unwrap();
        for k in 0..p.len() {
            let block = p.block(k).unwrap();
            let post = utr::collapse(&x, block).unwrap();
            let mass: f64 = block.iter().map(|&i| x.components()[i]).sum();
            let law = utr::outcome_probabilities(&post, &fine).unwrap();
            for (i, (&got, &xi)) in law.iter().zip(x.components()).enumerate() {
                let want = if block.contains(&i) { xi / mass } else { 0.0 };
                prop_assert!((got - want).abs() < 1e-12);
            }
            // collapsing again onto the same block changes nothing
            let again = utr::collapse(&post, block).unwrap();
            for (a, b) in again.components().iter().zip(post.components()) {
                prop_assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn fine_outcomes_recovered_sequentially(x in state(4..=4)) {
        let a = OutcomePartition::from_one_based(4, &[vec![1, 3], vec![2, 4]]).unwrap();
        let b = OutcomePartition::from_one_based(4, &[vec![1, 2], vec![3, 4]]).unwrap();
        for i in 0..4 {
            for (p, q) in [(&a, &b), (&b, &a)] {
                let got = utr::sequential_probability(&x, &[
                    (p.clone(), p.block_of(i).unwrap()),
                    (q.clone(), q.block_of(i).unwrap()),
                ]).unwrap();
                prop_assert!((got - x.components()[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn complementary_law_is_normalized(l in state(2..=3)) {
        let p = utr::complementary_probabilities(&l).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn epsilon_closed_form_matches_cdf(c in -1.0f64..=1.0, eps in 0.001f64..=1.0) {
        let (p, m) = density::epsilon_probability(c, eps).unwrap();
        let (q, r) = density::transition_probabilities_1d(c, &DensitySpec::Epsilon { epsilon: eps }).unwrap();
        prop_assert!((p - q).abs() < 1e-12 && (m - r).abs() < 1e-12);
        prop_assert!((p + m - 1.0).abs() < 1e-15);
    }

    #[test]
    fn epsilon_law_is_monotone_in_cos(c1 in -1.0f64..=1.0, c2 in -1.0f64..=1.0, eps in 0.01f64..=1.0) {
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let a = density::epsilon_probability(lo, eps).unwrap().0;
        let b = density::epsilon_probability(hi, eps).unwrap().0;
        prop_assert!(a <= b + 1e-15);
    }

    #[test]
    fn point_break_is_deterministic(c in -1.0f64..=1.0) {
        prop_assume!(c.abs() > 1e-9);
        let (p, m) = density::transition_probabilities_1d(c, &DensitySpec::PointBreak { z0: 0.0 }).unwrap();
        prop_assert!((p == 1.0 && m == 0.0) || (p == 0.0 && m == 1.0));
    }

    #[test]
    fn double_point_ignores_the_state(c in -0.999f64..0.999, a in 0.0f64..=1.0) {
        let rho = DensitySpec::DoublePoint { a, b: 1.0 - a };
        let (p, m) = density::transition_probabilities_1d(c, &rho).unwrap();
        prop_assert!((p - (1.0 - a)).abs() < 1e-12 && (m - a).abs() < 1e-12);
    }

    #[test]
    fn universal_average_equals_state(x in state(2..=2), n_c in 1usize..=12) {
        let s = OutcomePartition::singletons(2).unwrap();
        let p = universal::universal_probability_exact(&x, n_c, &s).unwrap();
        prop_assert!((p[0] - x.components()[0]).abs() < 1e-12);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cell_fractions_average_to_state(x in state(2..=3), k in 1usize..=4) {
        let sub = Subdivision::new(x.dim(), k).unwrap();
        let f = sub.region_fractions(&x).unwrap();
        for i in 0..x.dim() {
            let mean: f64 = f.iter().map(|r| r[i]).sum::<f64>() / f.len() as f64;
            prop_assert!((mean - x.components()[i]).abs() < 1e-12);
        }
        for r in &f {
            prop_assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fall_is_symmetric(t1 in 0.0f64..std::f64::consts::PI, p1 in 0.0f64..std::f64::consts::TAU, t2 in 0.0f64..std::f64::consts::PI, p2 in 0.0f64..std::f64::consts::TAU) {
        let w = sphere::BlochVector::from_angles(t1, p1);
        let u = sphere::BlochVector::from_angles(t2, p2);
        prop_assert!((sphere::fall(&w, &u) - sphere::fall(&u, &w)).abs() < 1e-15);
        prop_assert!((sphere::fall(&w, &u.antipode()) + sphere::fall(&w, &u)).abs() < 1e-15);
    }

    #[test]
    fn born_law_is_normalized_and_phase_free(seed in any::<u64>(), n in 2usize..=5, phases in prop::collection::vec(0.0f64..std::f64::consts::TAU, 5)) {
        let mut rng = mc::shard_rng(seed, 1);
        let obs = HilbertObservable::random(OutcomePartition::singletons(n).unwrap(), &mut rng).unwrap();
        let psi = HilbertState::random(n, &mut rng).unwrap();
        let p = hilbert::born_probabilities(&psi, &obs).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let diag = HilbertObservable::diagonal(OutcomePartition::singletons(n).unwrap()).unwrap();
        let q = hilbert::born_probabilities(&psi, &diag).unwrap();
        let r = hilbert::born_probabilities(&psi.with_phases(&phases[..n]), &diag).unwrap();
        for (a, b) in q.iter().zip(&r) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_states_are_products(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = HilbertState::random(2, &mut mc::shard_rng(s1, 0)).unwrap();
        let b = HilbertState::random(2, &mut mc::shard_rng(s2, 0)).unwrap();
        let r = hilbert::is_product_state(&hilbert::tensor(&a, &b).unwrap(), 1e-12).unwrap();
        prop_assert!(r.is_product);
        prop_assert!(r.relation_residuals.iter().all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn universal_average_ignores_cell_labels() {
    // the average depends on the multiset of per-cell fractions only
    let x = BarycentricVector::new(vec![0.2, 0.3, 0.5]).unwrap();
    let s = OutcomePartition::singletons(3).unwrap();
    let p = universal::universal_probability_exact(&x, 9, &s).unwrap();
    let sub = Subdivision::with_cell_count(3, 9).unwrap();
    let mut f = sub.region_fractions(&x).unwrap();
    f.reverse();
    f.rotate_left(4);
    let n_c = f.len();
    let mut total = [0.0; 3];
    for mask in 1u32..(1 << n_c) {
        let cells: Vec<_> = (0..n_c).filter(|c| mask & (1 << c) != 0).collect();
        for i in 0..3 {
            total[i] += cells.iter().map(|&c| f[c][i]).sum::<f64>() / cells.len() as f64;
        }
    }
    for i in 0..3 {
        assert!((total[i] / ((1u32 << n_c) - 1) as f64 - p[i]).abs() < 1e-12);
    }
}
