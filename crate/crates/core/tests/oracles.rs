//! Values frozen from independent computations: hand enumeration, polygon
//! clipping done with a separate geometry library, and Monte Carlo runs of a
//! separate implementation.

use trm_core::cells::Subdivision;
use trm_core::simplex::{BarycentricVector, OutcomePartition};
use trm_core::{universal, utr};

fn bv(c: &[f64]) -> BarycentricVector {
    BarycentricVector::new(c.to_vec()).unwrap()
}

fn sorted_rows(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows
}

fn assert_rows(got: Vec<Vec<f64>>, want: &[[f64; 3]]) {
    let got = sorted_rows(got);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        for (a, b) in g.iter().zip(w) {
            assert!((a - b).abs() < 1e-12, "{g:?} vs {w:?}");
        }
    }
}

#[test]
fn triangle_cell_fractions_k2() {
    let f = Subdivision::new(3, 2)
        .unwrap()
        .region_fractions(&bv(&[0.2, 0.3, 0.5]))
        .unwrap();
    assert_rows(
        f,
        &[
            [0.0, 0.375, 0.625],
            [0.114285714285714, 0.225, 0.660714285714286],
            [0.285714285714286, 0.0, 0.714285714285714],
            [0.4, 0.6, 0.0],
        ],
    );
}

#[test]
fn triangle_cell_fractions_k3() {
    let f = Subdivision::new(3, 3)
        .unwrap()
        .region_fractions(&bv(&[0.2, 0.3, 0.5]))
        .unwrap();
    assert_rows(
        f,
        &[
            [0.0, 0.0, 1.0],
            [0.0, 0.225, 0.775],
            [0.0, 0.375, 0.625],
            [0.0, 0.9, 0.1],
            [0.114285714285714, 0.0, 0.885714285714286],
            [0.257142857142857, 0.6, 0.142857142857143],
            [0.285714285714286, 0.0, 0.714285714285714],
            [0.4, 0.6, 0.0],
            [0.742857142857143, 0.0, 0.257142857142857],
        ],
    );
}

#[test]
fn universal_triangle_averages() {
    let s = OutcomePartition::singletons(3).unwrap();
    for x in [[0.2, 0.3, 0.5], [0.6, 0.1, 0.3]] {
        for n_c in [1, 4, 9] {
            let p = universal::universal_probability_exact(&bv(&x), n_c, &s).unwrap();
            for i in 0..3 {
                assert!((p[i] - x[i]).abs() < 1e-12, "x={x:?} n_c={n_c}: {p:?}");
            }
        }
    }
}

#[test]
fn hand_enumerated_interval_averages() {
    let s = OutcomePartition::singletons(2).unwrap();
    // seven subsets of three thirds at x = (0.3, 0.7)
    let p = universal::universal_probability_exact(&bv(&[0.3, 0.7]), 3, &s).unwrap();
    assert!((p[0] - (0.9 + 0.45 + 0.45 + 0.3) / 7.0).abs() < 1e-15);
}

#[test]
fn complementary_against_independent_monte_carlo() {
    // 10^6-draw simulation of the breaking rule written separately
    let p = utr::complementary_probabilities(&bv(&[0.2, 0.5, 0.3])).unwrap();
    let mc = [0.5136, 0.1603, 0.3260];
    for (a, b) in p.iter().zip(mc) {
        assert!((a - b).abs() < 0.002, "{p:?}");
    }
    let q = utr::complementary_probabilities(&bv(&[0.5, 0.25, 0.25])).unwrap();
    assert!((q[0] - 1.0 / 6.0).abs() < 1e-15);
    assert!((q[1] - 5.0 / 12.0).abs() < 1e-15 && (q[2] - 5.0 / 12.0).abs() < 1e-15);
    let r = utr::complementary_probabilities(&bv(&[0.3, 0.7])).unwrap();
    assert_eq!(r, vec![0.7, 0.3]);
}
