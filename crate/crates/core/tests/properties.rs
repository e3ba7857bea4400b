use num_complex::Complex64;
use proptest::prelude::*;

use aqae::linalg::{density_matrix, expm_unitary, partial_trace, partial_transpose, trace_norm, Subsystem};
use aqae::models::Flavor;
use aqae::observables::{entanglement_entropy, flavor_probability, log_negativity, persistence, rayleigh, ObservableSeries};
use aqae::qubo::{build_clock_qubo, build_eigen_qubo, complex_objective, decode, decode_complex, deinterleave, real_objective};
use aqae::solver::{RunTrace, SolveTrace, ZoomStep};
use aqae::{Encoding, HermMatrix, QuboInstance, StateVector, SymMatrix};

fn sym_matrix(dim: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-2.0..2.0f64, dim * dim)
        .prop_map(move |m| SymMatrix::from_fn(dim, |i, j| m[i.min(j) * dim + i.max(j)]))
}

fn herm_matrix(dim: usize) -> impl Strategy<Value = HermMatrix> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), dim * dim).prop_map(move |m| {
        HermMatrix::from_fn(dim, |i, j| {
            let (re, im) = m[i.min(j) * dim + i.max(j)];
            match i.cmp(&j) {
                std::cmp::Ordering::Equal => Complex64::new(re, 0.0),
                std::cmp::Ordering::Less => Complex64::new(re, im),
                std::cmp::Ordering::Greater => Complex64::new(re, -im),
            }
        })
    })
}

fn state(dim: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim)
        .prop_filter_map("nonzero", |v| {
            StateVector::from_complex(&v.iter().map(|&(r, i)| Complex64::new(r, i)).collect::<Vec<_>>()).normalized().ok()
        })
}

fn bitstrings(n: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1u32 << n).map(move |x| (0..n).map(|b| (x >> b) as u8 & 1).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn real_qubo_energy_is_objective_difference(
        (h, centers) in (1usize..=3).prop_flat_map(|d| (sym_matrix(d), prop::collection::vec(-1.0..1.0f64, d))),
        bits in 1usize..=2,
        zoom in 0u32..=3,
    ) {
        let enc = Encoding::new(bits, zoom, centers).unwrap();
        let q = build_eigen_qubo(&h, &enc).unwrap();
        let f0 = real_objective(&h, &enc.centers);
        for b in bitstrings(enc.n_vars()) {
            let f = real_objective(&h, &decode(&b, &enc).unwrap());
            prop_assert!((q.energy(&b) - (f - f0)).abs() < 1e-10);
        }
    }

    #[test]
    fn complex_qubo_energy_is_objective_difference(
        (c, centers) in (1usize..=2).prop_flat_map(|d| (herm_matrix(d), prop::collection::vec(-1.0..1.0f64, 2 * d))),
        bits in 1usize..=2,
        zoom in 0u32..=3,
    ) {
        let enc = Encoding::new(bits, zoom, centers).unwrap();
        let q = build_clock_qubo(&c, &enc).unwrap();
        let f0 = complex_objective(&c, &deinterleave(&enc.centers));
        for b in bitstrings(enc.n_vars()) {
            let f = complex_objective(&c, &decode_complex(&b, &enc).unwrap());
            prop_assert!((q.energy(&b) - (f - f0)).abs() < 1e-10);
        }
    }

    #[test]
    fn zoom_grids_nest(bits in 1usize..=4, zoom in 0u32..=10, center in -1.0..1.0f64) {
        let coarse = Encoding::new(bits, zoom, vec![center]).unwrap().reachable(center);
        let fine = Encoding::new(bits, zoom + 1, vec![center]).unwrap().reachable(center);
        let half = 2f64.powi(-(zoom as i32));
        let step = 2f64.powi(1 - bits as i32 - zoom as i32);
        prop_assert!((coarse[0] - (center - half)).abs() < 1e-15);
        prop_assert!(coarse.windows(2).all(|w| (w[1] - w[0] - step).abs() < 1e-12));
        prop_assert!((fine[0] - (center - half / 2.0)).abs() < 1e-15);
        for x in coarse.iter().filter(|&&x| x >= fine[0] && x <= fine[fine.len() - 1]) {
            prop_assert!(fine.iter().any(|y| (x - y).abs() < 1e-14));
        }
    }

    #[test]
    fn propagator_preserves_norm(h in herm_matrix(4), psi in state(4), t in -5.0..5.0f64) {
        let u = expm_unitary(&h, t).unwrap();
        prop_assert!(u.unitarity_deviation() < 1e-10);
        prop_assert!((u.matvec(&psi).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn partial_transpose_trace_norm_at_least_one(psi in state(8), pair in prop::sample::select(vec![(0usize, 1usize), (0, 2), (1, 2)])) {
        let rho = partial_trace(&density_matrix(&psi).unwrap(), &[pair.0, pair.1]).unwrap();
        let norm = trace_norm(&partial_transpose(&rho, Subsystem::Second).unwrap()).unwrap();
        prop_assert!(norm >= 1.0 - 1e-10);
        prop_assert!(log_negativity(&psi, pair.0, pair.1).unwrap() >= 0.0);
    }

    #[test]
    fn observables_are_phase_invariant(psi in state(4), h in sym_matrix(4), phase in 0.0..std::f64::consts::TAU) {
        let rotated = psi.rotated(Complex64::from_polar(1.0, phase));
        let reference = StateVector::basis(4, 1);
        let pairs = [
            (rayleigh(&psi, &h).unwrap(), rayleigh(&rotated, &h).unwrap()),
            (persistence(&psi, &reference).unwrap(), persistence(&rotated, &reference).unwrap()),
            (flavor_probability(&psi, 0, Flavor::Electron).unwrap(), flavor_probability(&rotated, 0, Flavor::Electron).unwrap()),
            (entanglement_entropy(&psi, 1).unwrap(), entanglement_entropy(&rotated, 1).unwrap()),
            (log_negativity(&psi, 0, 1).unwrap(), log_negativity(&rotated, 0, 1).unwrap()),
        ];
        for (a, b) in pairs {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn solve_trace_csv_round_trip(
        values in prop::collection::vec((any::<f64>().prop_filter("finite", |x| x.is_finite()), prop::collection::vec(-1.0..1.0f64, 3)), 1..6),
        complex in any::<bool>(),
    ) {
        let steps: Vec<ZoomStep> = values.iter().enumerate().map(|(z, (e, v))| {
            let state = if complex {
                StateVector::new(v.clone(), v.iter().map(|x| x / 3.0).collect()).unwrap()
            } else {
                StateVector::from_real(v.clone())
            };
            ZoomStep { zoom: z as u32, energy: *e, state, null_reads: 0 }
        }).collect();
        let trace = SolveTrace { runs: vec![RunTrace { run: 0, steps: steps.clone() }, RunTrace { run: 1, steps }] };
        let text = trace.to_csv();
        prop_assert!(!text.contains('\r'));
        prop_assert_eq!(SolveTrace::from_csv(&text).unwrap(), trace);
    }

    #[test]
    fn observable_series_csv_round_trip(rows in prop::collection::vec(prop::array::uniform4(-1e3..1e3f64), 1..10)) {
        let s = ObservableSeries {
            label: "x".into(),
            times: rows.iter().map(|r| r[0]).collect(),
            values: rows.iter().map(|r| r[1]).collect(),
            lo68: rows.iter().map(|r| r[2]).collect(),
            hi68: rows.iter().map(|r| r[3]).collect(),
        };
        prop_assert_eq!(ObservableSeries::from_csv("x", &s.to_csv()).unwrap(), s);
    }

    #[test]
    fn qubo_text_round_trip(dense in prop::collection::vec(-1e6..1e6f64, 16)) {
        let q = QuboInstance::from_dense(4, &dense).unwrap();
        prop_assert_eq!(QuboInstance::from_text(&q.to_text(), Some(4)).unwrap(), q);
    }
}
