use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use spinlab::analysis::catalog::{normalized_cos_profile, torus_sine};
use spinlab::operators::{apply_chirality, hamiltonian, scalar_multiple};
use spinlab::random::seeded_rng;
use spinlab::spectral::*;
use spinlab::*;

fn unit(n: usize) -> Arc<Geometry> {
    Geometry::unit_periodic(2, n).unwrap()
}

fn free(n: usize) -> (Arc<Geometry>, Gammas, Operator) {
    let g = unit(n);
    let gs = build_gamma_set(2).unwrap();
    let h = hamiltonian(&g, &gs, &Field::zeros(&g)).unwrap();
    (g, gs, h)
}

/// Sorted `|k|^2` over the integer lattice of an `n x n` grid, each twice.
fn lattice_spectrum(n: usize) -> Vec<f64> {
    let half = n as i64 / 2;
    let mut out = Vec::new();
    for a in -half..half {
        for b in -half..half {
            let norm = (a * a + b * b) as f64;
            out.extend([norm, norm]);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn free_spectrum_iterative() {
    let (_, _, h) = free(16);
    let s = smallest_eigenpairs(&h, 10, 1e-10, 5000).unwrap();
    assert!(s.converged);
    let expected = [0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
    for (l, e) in s.eigenvalues.iter().zip(expected) {
        assert!((l - e).abs() < 1e-10, "{:?}", s.eigenvalues);
    }
    assert!(s.max_residual() <= 1e-10);
    assert_eq!(s.zero_count(), 2);
}

#[test]
fn constant_deformation_bottom() {
    let g = unit(8);
    let gs = build_gamma_set(2).unwrap();
    let h = hamiltonian(&g, &gs, &Field::constant(&g, 2.0)).unwrap();
    let s = smallest_eigenpairs(&h, 2, 1e-10, 5000).unwrap();
    assert!((s.eigenvalues[0] - 4.0).abs() < 1e-10);
}

#[test]
fn sine_product_iterative_matches_dense() {
    let g = unit(8);
    let gs = build_gamma_set(2).unwrap();
    let f = Field::from_fn(&g, |x| x[0].sin() * x[1].sin());
    let h = hamiltonian(&g, &gs, &f).unwrap();
    let it = smallest_eigenpairs(&h, 6, 1e-10, 5000).unwrap();
    let (dense, _) = dense_eigenvalues(&h).unwrap();
    for i in 0..6 {
        assert!((it.eigenvalues[i] - dense[i]).abs() < 1e-8);
    }
}

#[test]
fn iterative_solver_is_deterministic() {
    let (_, _, h) = free(8);
    let a = smallest_eigenpairs(&h, 4, 1e-10, 5000).unwrap();
    let b = smallest_eigenpairs(&h, 4, 1e-10, 5000).unwrap();
    assert_eq!(a.eigenvalues, b.eigenvalues);
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.eigenvectors[0].data(), b.eigenvectors[0].data());
}

#[test]
fn eigenvectors_are_orthonormal() {
    let g = unit(8);
    let gs = build_gamma_set(2).unwrap();
    let f = torus_sine(&g, 1.0, 1.0);
    let h = hamiltonian(&g, &gs, &f).unwrap();
    for s in [smallest_eigenpairs(&h, 8, 1e-10, 5000).unwrap(), dense_spectrum(&h).unwrap().truncated(8)] {
        for i in 0..s.len() {
            for j in 0..s.len() {
                let ip = s.eigenvectors[i].inner(&s.eigenvectors[j]).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - Complex64::new(want, 0.0)).norm() < 1e-8, "{i} {j} {ip}");
            }
        }
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.eigenvalues[0] >= -1e-9);
    }
}

#[test]
fn non_self_adjoint_operator_rejected() {
    let g = unit(8);
    let gs = build_gamma_set(2).unwrap();
    let df = operators::deformed_dirac(&g, &gs, &Field::constant(&g, 1.0), operators::Sign::Plus).unwrap();
    assert!(matches!(smallest_eigenpairs(&df, 2, 1e-9, 10), Err(Error::NotSelfAdjoint(_))));
    assert!(matches!(dense_spectrum(&df), Err(Error::NotSelfAdjoint(_))));
}

#[test]
fn iteration_cap_gives_partial_result() {
    let g = unit(16);
    let gs = build_gamma_set(2).unwrap();
    let h = hamiltonian(&g, &gs, &torus_sine(&g, 1.0, 1.0)).unwrap();
    let s = smallest_eigenpairs(&h, 6, 1e-14, 1).unwrap();
    assert!(!s.converged);
    assert_eq!(s.len(), 6);
}

#[test]
fn dense_identity_spectrum() {
    let g = unit(4);
    let id = Operator::identity(&g, 2);
    let s = dense_spectrum(&id).unwrap();
    assert_eq!(s.len(), 32);
    assert!(s.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-14));
    assert!(s.is_complete());
}

#[test]
fn dense_free_multiplicities() {
    let (_, _, h) = free(8);
    let (values, defect) = dense_eigenvalues(&h).unwrap();
    assert!(defect < 1e-12);
    let expected = lattice_spectrum(8);
    assert_eq!(values.len(), expected.len());
    for (v, e) in values.iter().zip(&expected) {
        assert!((v - e).abs() < 1e-10, "{v} vs {e}");
    }
    let mut counts = BTreeMap::new();
    for v in values.iter().take(18) {
        *counts.entry(v.round() as i64).or_insert(0) += 1;
    }
    assert_eq!(counts.get(&0), Some(&2));
    assert_eq!(counts.get(&1), Some(&8));
    assert_eq!(counts.get(&2), Some(&8));
}

#[test]
fn dense_guard() {
    let g = make_torus(2, &[1.0, 1.0], &[64, 64], &[SpinStructure::Periodic; 2]).unwrap();
    let id = Operator::identity(&g, 2);
    assert!(matches!(dense_spectrum(&id), Err(Error::DimensionGuard { .. })));
}

#[test]
fn materialized_hamiltonian_is_hermitian() {
    let g = unit(8);
    let gs = build_gamma_set(2).unwrap();
    let h = hamiltonian(&g, &gs, &torus_sine(&g, 1.0, 1.0)).unwrap();
    let m = materialize(&h).unwrap();
    let n = m.nrows();
    let defect = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (m[(i, j)] - m[(j, i)].conj()).norm())
        .fold(0.0, f64::max);
    assert!(defect < 1e-12, "{defect}");
}

#[test]
fn heat_trace_constant_shift() {
    let g = unit(8);
    let gs = build_gamma_set(2).unwrap();
    let s0 = dense_spectrum(&hamiltonian(&g, &gs, &Field::zeros(&g)).unwrap()).unwrap();
    let s2 = dense_spectrum(&hamiltonian(&g, &gs, &Field::constant(&g, 2.0)).unwrap()).unwrap();
    let t = [0.5, 1.0, 2.0];
    let c0 = heat_traces(&s0, &gs, &t, 1e-3).unwrap();
    let c2 = heat_traces(&s2, &gs, &t, 1e-3).unwrap();
    for i in 0..t.len() {
        let want = (-4.0 * t[i]).exp() * c0.theta[i];
        assert!((c2.theta[i] - want).abs() < 1e-8 * want.max(1.0));
        assert_eq!(c0.truncation_bound[i], 0.0);
    }
    assert!(c0.theta.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn free_supertrace_vanishes() {
    let (_, gs, h) = free(8);
    let s = dense_spectrum(&h).unwrap();
    let c = heat_traces(&s, &gs, &[0.5, 1.0, 2.0], 1e-3).unwrap();
    for (psi, theta) in c.psi.iter().zip(&c.theta) {
        assert!(psi.abs() < 1e-10, "{psi}");
        assert!(psi.abs() <= *theta);
    }
}

#[test]
fn heat_trace_refuses_small_t_for_partial_spectrum() {
    let (_, gs, h) = free(16);
    let s = smallest_eigenpairs(&h, 10, 1e-10, 5000).unwrap();
    let threshold = validity_threshold(&s, 1e-3).unwrap();
    assert!(threshold > 0.0);
    match heat_traces(&s, &gs, &[threshold * 0.5], 1e-3) {
        Err(Error::TBelowThreshold { threshold: th, .. }) => assert!((th - threshold).abs() < 1e-12 * threshold),
        other => panic!("expected refusal, got {other:?}"),
    }
    let ok = heat_traces(&s, &gs, &[threshold * 2.0], 1e-3).unwrap();
    assert!(ok.truncation_bound[0] <= 1e-3 * ok.theta[0]);
}

#[test]
fn heat_trace_needs_eigenvectors() {
    let (_, gs, h) = free(4);
    let mut s = dense_spectrum(&h).unwrap();
    s.eigenvectors.clear();
    assert!(heat_traces(&s, &gs, &[1.0], 1e-3).is_err());
}

#[test]
fn truncation_bound_dominates_true_tail() {
    let (g, gs, h) = free(16);
    let full = dense_spectrum(&h).unwrap();
    let part = full.below(20.5);
    let t = validity_threshold(&part, 1e-2).unwrap() * 1.5;
    let curve = heat_traces(&part, &gs, &[t], 1e-2).unwrap();
    let full_theta: f64 = full.eigenvalues.iter().map(|l| (-l * t).exp()).sum();
    let true_tail = full_theta - curve.theta[0];
    assert!(curve.truncation_bound[0] >= true_tail, "{} < {true_tail}", curve.truncation_bound[0]);
    assert!(weyl_constant(2, g.volume()) > 0.0);
}

#[test]
fn index_identities_for_cos_profile() {
    let g = unit(16);
    let gs = build_gamma_set(2).unwrap();
    let f = normalized_cos_profile(&g);
    let r = index_checks(&g, &gs, &f, 1.0, &IndexCheckOptions::default()).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(r.theta_gap < 1e-8 && r.d_trace < 1e-8 && r.spectrum_gap < 1e-8);
    assert!(r.gamma_map_residual <= 1e-7);
}

#[test]
fn index_identities_from_iterative_spectra() {
    let g = unit(16);
    let gs = build_gamma_set(2).unwrap();
    let f = torus_sine(&g, 1.0, 1.0);
    let opts = IndexCheckOptions {
        method: SpectrumMethod::Iterative { k: 12, options: SolverOptions { tol: 1e-10, ..SolverOptions::default() } },
        ..IndexCheckOptions::default()
    };
    let r = index_checks(&g, &gs, &f, 1.0, &opts).unwrap();
    assert!(r.truncation > 0);
    assert!(r.spectrum_gap < 1e-8, "{r:?}");
    assert!(r.d_trace < 1e-8);
    assert!(r.gamma_map_residual <= 1e-7);
}

#[test]
fn gamma_maps_eigenvectors_to_opposite_sign() {
    let g = unit(8);
    let gs = build_gamma_set(2).unwrap();
    let f = torus_sine(&g, 1.0, 1.0);
    let s = dense_spectrum(&hamiltonian(&g, &gs, &f).unwrap()).unwrap();
    let hm = hamiltonian(&g, &gs, &f.scale(-1.0)).unwrap();
    for (l, v) in s.eigenvalues.iter().zip(&s.eigenvectors) {
        let gv = apply_chirality(&gs, v).unwrap();
        let r = hm.apply(&gv).unwrap().sub(&gv.scale_real(*l)).unwrap().norm() / gv.norm();
        assert!(r <= 1e-7, "{l}: {r}");
    }
}

#[test]
fn action_functional_paths_agree() {
    let g = unit(16);
    let gs = build_gamma_set(2).unwrap();
    let f = torus_sine(&g, 1.0, 0.7);
    let mut rng = seeded_rng(3);
    let u = spinlab::random::random_smooth_spinor(&g, 2, 3, &mut rng);
    let (a, b) = action_functional_paths(&g, &gs, &f, &u).unwrap();
    assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
    assert!(a >= 0.0);

    let c = Spinor::constant(&g, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).normalized().unwrap();
    assert!(action_functional(&g, &gs, &Field::zeros(&g), &c).unwrap().abs() < 1e-24);
    assert!((action_functional(&g, &gs, &Field::constant(&g, 1.5), &c).unwrap() - 2.25).abs() < 1e-12);
    assert!(matches!(action_functional(&g, &gs, &f, &Spinor::zeros(&g, 2)), Err(Error::ZeroField)));
}

#[test]
fn spectrum_serialization() {
    let g = unit(4);
    let s = dense_spectrum(&scalar_multiple(&g, 2, Complex64::new(2.5, 0.0))).unwrap();
    let v: serde_json::Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
    assert_eq!(v["solver"], "dense");
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 32);
    let csv = s.to_csv();
    assert_eq!(csv.lines().count(), 33);
    assert!(csv.lines().nth(1).unwrap().starts_with("0,2.5000000000000000e0,"));
}
