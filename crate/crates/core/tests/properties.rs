//! Randomized properties: metric inequalities, word-metric axioms, greedy
//! characterization, and the packing sandwich.

use proptest::collection::vec;
use proptest::prelude::*;
use slowent::metrics::{bowen, hamming, word_distance, Trajectory};
use slowent::separation::{
    bowen_separation, exact_max_separated, greedy_separated, CandidateSet, DistanceMatrix, Method,
};
use slowent::systems::{PhasePoint, SequenceSource};
use slowent::{Real, SystemSpec64};

fn torus_system(rho: f64) -> SystemSpec64 {
    SystemSpec64::torus_skew(rho).unwrap()
}

fn symmetric_matrix(values: Vec<f64>, size: usize) -> DistanceMatrix<Real> {
    let mut it = values.into_iter();
    DistanceMatrix::from_fn(size, |_, _| Ok(it.next().unwrap())).unwrap()
}

fn brute_force_max(m: &DistanceMatrix<Real>, delta: f64) -> usize {
    let n = m.size();
    let mut best = 0usize;
    for mask in 0u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if members.len() <= best {
            continue;
        }
        let ok = members
            .iter()
            .enumerate()
            .all(|(a, &i)| members[a + 1..].iter().all(|&j| m.get(i, j) >= delta));
        if ok {
            best = members.len();
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn hamming_never_exceeds_bowen_on_the_torus(
        rho in 0.01f64..0.99,
        x1 in 0.0f64..1.0, y1 in 0.0f64..1.0,
        x2 in 0.0f64..1.0, y2 in 0.0f64..1.0,
        n in 1usize..64,
    ) {
        let sys = torus_system(rho);
        let p = PhasePoint::torus(x1, y1).unwrap();
        let q = PhasePoint::torus(x2, y2).unwrap();
        let tp = Trajectory::generate(&sys, &p, n).unwrap();
        let tq = Trajectory::generate(&sys, &q, n).unwrap();
        prop_assert!(hamming(&tp, &tq).unwrap() <= bowen(&tp, &tq).unwrap());
    }

    #[test]
    fn hamming_never_exceeds_bowen_on_the_shift(
        a in -(1i64 << 40)..(1i64 << 40),
        b in -(1i64 << 40)..(1i64 << 40),
        n in 1usize..48,
    ) {
        let source = SequenceSource::<Real>::default_toeplitz();
        let sys = SystemSpec64::shift_on_subshift(source.clone(), 16).unwrap();
        let tp = Trajectory::generate(&sys, &PhasePoint::symbolic(source.clone(), a), n).unwrap();
        let tq = Trajectory::generate(&sys, &PhasePoint::symbolic(source, b), n).unwrap();
        // Both sides are dyadic with exponent -16, so the comparison is exact.
        prop_assert!(hamming(&tp, &tq).unwrap() <= bowen(&tp, &tq).unwrap());
    }

    #[test]
    fn word_metric_axioms(
        bits in vec(0u8..2, 3 * 41),
    ) {
        let (u, rest) = bits.split_at(41);
        let (v, w) = rest.split_at(41);
        let duv: Real = word_distance(u, v).unwrap();
        let dvu: Real = word_distance(v, u).unwrap();
        let duw: Real = word_distance(u, w).unwrap();
        let dvw: Real = word_distance(v, w).unwrap();
        prop_assert_eq!(word_distance::<Real>(u, u).unwrap(), 0.0);
        prop_assert_eq!(duv, dvu);
        prop_assert!((0.0..=1.0).contains(&duv));
        // Mismatch counts are integers over a common denominator, so the
        // triangle inequality survives any rounding at this granularity.
        prop_assert!(duw <= duv + dvw + 1e-12);
    }

    #[test]
    fn symbolic_base_distance_is_an_exact_metric(
        a in -(1i64 << 30)..(1i64 << 30),
        b in -(1i64 << 30)..(1i64 << 30),
        c in -(1i64 << 30)..(1i64 << 30),
    ) {
        let source = SequenceSource::<Real>::default_toeplitz();
        let sys = SystemSpec64::shift_on_subshift(source.clone(), 12).unwrap();
        let p = PhasePoint::symbolic(source.clone(), a);
        let q = PhasePoint::symbolic(source.clone(), b);
        let r = PhasePoint::symbolic(source, c);
        let dpq = sys.base_distance(&p, &q).unwrap();
        let dqp = sys.base_distance(&q, &p).unwrap();
        let dpr = sys.base_distance(&p, &r).unwrap();
        let dqr = sys.base_distance(&q, &r).unwrap();
        prop_assert_eq!(dpq, dqp);
        // Sums of weights 2^-|k| with |k| <= 12 stay well inside the exact
        // dyadic range of f64, so no epsilon is needed.
        prop_assert!(dpr <= dpq + dqr);
        if a == b {
            prop_assert_eq!(dpq, 0.0);
        }
    }

    #[test]
    fn streaming_greedy_matches_the_matrix_route(
        rho in 0.01f64..0.99,
        coords in vec((0.0f64..1.0, 0.0f64..1.0), 2..12),
        n in 1usize..64,
        delta in 0.05f64..0.7,
    ) {
        let sys = torus_system(rho);
        let points: Vec<PhasePoint<Real>> = coords
            .iter()
            .map(|&(x, y)| PhasePoint::torus(x, y).unwrap())
            .collect();
        let trajs: Vec<Trajectory<Real>> = points
            .iter()
            .map(|p| Trajectory::generate(&sys, p, n).unwrap())
            .collect();
        let m = DistanceMatrix::from_fn(points.len(), |i, j| bowen(&trajs[i], &trajs[j])).unwrap();
        let by_matrix = greedy_separated(&m, delta);
        let cands = CandidateSet::from_points(points, "proptest");
        let streamed = bowen_separation(&sys, &cands, n, delta, Method::Greedy).unwrap();
        prop_assert_eq!(streamed.witness, by_matrix);
    }

    #[test]
    fn greedy_subsets_are_separated_and_maximal(
        size in 3usize..12,
        raw in vec(0.0f64..1.0, 12 * 11 / 2),
        delta in 0.05f64..0.9,
    ) {
        let m = symmetric_matrix(raw, size);
        let kept = greedy_separated(&m, delta);
        for (a, &i) in kept.iter().enumerate() {
            for &j in &kept[a + 1..] {
                prop_assert!(m.get(i, j) >= delta);
            }
        }
        for i in 0..size {
            if !kept.contains(&i) {
                prop_assert!(kept.iter().any(|&j| m.get(i, j) < delta));
            }
        }
    }

    #[test]
    fn exact_solver_matches_brute_force(
        size in 3usize..11,
        raw in vec(0.0f64..1.0, 11 * 10 / 2),
        delta in 0.05f64..0.9,
    ) {
        // Arbitrary symmetric data: the solver and the greedy lower bound
        // need no triangle inequality.
        let m = symmetric_matrix(raw, size);
        let exact_fine = exact_max_separated(&m, delta).unwrap().len();
        let greedy = greedy_separated(&m, delta).len();
        prop_assert!(greedy <= exact_fine);
        prop_assert_eq!(exact_fine, brute_force_max(&m, delta));
    }

    #[test]
    fn packing_sandwich_on_planar_point_sets(
        coords in vec((0.0f64..1.0, 0.0f64..1.0), 3..12),
        delta in 0.05f64..0.45,
    ) {
        // The coarse-versus-greedy comparison needs a genuine metric, so the
        // matrix comes from Euclidean distances of sampled points.
        let m = DistanceMatrix::from_fn(coords.len(), |i, j| {
            let (xi, yi) = coords[i];
            let (xj, yj) = coords[j];
            Ok(((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt())
        })
        .unwrap();
        let exact_fine = exact_max_separated(&m, delta).unwrap().len();
        let exact_coarse = exact_max_separated(&m, 2.0 * delta).unwrap().len();
        let greedy = greedy_separated(&m, delta).len();
        prop_assert!(exact_coarse <= greedy);
        prop_assert!(greedy <= exact_fine);
    }

    #[test]
    fn bowen_is_monotone_in_the_horizon(
        rho in 0.01f64..0.99,
        x1 in 0.0f64..1.0, y1 in 0.0f64..1.0,
        x2 in 0.0f64..1.0, y2 in 0.0f64..1.0,
        n1 in 1usize..48,
        extra in 1usize..48,
    ) {
        let sys = torus_system(rho);
        let p = PhasePoint::torus(x1, y1).unwrap();
        let q = PhasePoint::torus(x2, y2).unwrap();
        let short_p = Trajectory::generate(&sys, &p, n1).unwrap();
        let short_q = Trajectory::generate(&sys, &q, n1).unwrap();
        let long_p = Trajectory::generate(&sys, &p, n1 + extra).unwrap();
        let long_q = Trajectory::generate(&sys, &q, n1 + extra).unwrap();
        prop_assert!(bowen(&short_p, &short_q).unwrap() <= bowen(&long_p, &long_q).unwrap());
    }
}
