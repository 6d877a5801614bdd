use std::f64::consts::PI;
use std::sync::Arc;

use spinlab::analysis::catalog::{nodal_catalog, normalized_cos_profile, positive_catalog};
use spinlab::analysis::*;
use spinlab::operators::apply_chirality;
use spinlab::random::{random_spinor, seeded_rng};
use spinlab::*;

fn grid(nx: usize, nr: usize) -> Arc<Geometry> {
    make_torus(2, &[1.0, 1.0], &[nx, nr], &[SpinStructure::Periodic; 2]).unwrap()
}

/// Composite Simpson rule on `[0, 2 pi]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = 2.0 * PI / n as f64;
    let mut s = f(0.0) + f(2.0 * PI);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn uniform_condition_examples() {
    let g = grid(16, 16);
    let f = Field::from_fn(&g, |x| 2.0 + 0.1 * x[0].sin());
    let r = check_uniform_condition(&f).unwrap();
    assert!(r.holds && r.margin >= 1.9 * 1.9 - 0.1);
    assert_eq!(r.condition, Condition::UniformGradient);

    let s = Field::from_fn(&g, |x| x[1].sin());
    let r = check_uniform_condition(&s).unwrap();
    assert!(!r.holds);
    assert!((r.margin + 1.0).abs() < 1e-12, "{}", r.margin);
    let r_coord = r.witness_coordinates[1];
    assert!(r_coord.abs() < 1e-12 || (r_coord - PI).abs() < 1e-12);
}

#[test]
fn small_tau_eventually_passes() {
    let g = grid(16, 16);
    let h = decompose_deformation(&Field::from_fn(&g, |x| x[0].cos() + (2.0 * x[1]).sin())).unwrap().h;
    let (tau, r) = find_passing_tau(1.0, &h, 4.0, 30).unwrap().expect("some tau passes");
    assert!(r.holds);
    assert!(tau < 4.0);
    assert!(!check_uniform_condition(&h.scale(2.0 * tau).add_constant(1.0)).unwrap().holds || tau == 4.0);
}

#[test]
fn sign_definite_examples() {
    let g = grid(16, 16);
    let r = check_sign_definite(&Field::constant(&g, 1.0)).unwrap();
    assert!(r.holds);
    assert_eq!(r.margin, 1.0);
    let c = Field::from_fn(&g, |x| x[1].cos());
    assert!(!check_sign_definite(&c).unwrap().holds);
    assert!(check_sign_definite(&Field::constant(&g, -0.5)).unwrap().holds);
}

#[test]
fn uniform_passing_catalog_entries_are_sign_definite() {
    let g = grid(16, 16);
    for e in positive_catalog(&g) {
        if check_uniform_condition(&e.f).unwrap().holds {
            assert!(check_sign_definite(&e.f).unwrap().holds, "{}", e.name);
        }
    }
}

#[test]
fn product_zero_modes_at_32() {
    let g = grid(32, 32);
    let gs = build_gamma_set(2).unwrap();
    let h = normalized_cos_profile(&g);
    let modes = build_product_zero_modes(&g, &gs, &h, 1.0, None).unwrap();
    let f = h.scale(1.0);
    let hf = operators::hamiltonian(&g, &gs, &f).unwrap();
    for phi in [&modes.phi1, &modes.phi2] {
        let r = hf.apply(phi).unwrap().norm() / phi.norm();
        assert!(r < 1e-8, "{r}");
    }
    let (g1, g2) = modes.norm_gaps();
    assert!(g1 < 1e-8 && g2 < 1e-8);
    assert!(modes.kernel_residual <= KERNEL_TOL);
}

#[test]
fn quadrature_matches_independent_oracle() {
    let g = grid(32, 32);
    let gs = build_gamma_set(2).unwrap();
    let h = normalized_cos_profile(&g);
    let modes = build_product_zero_modes(&g, &gs, &h, 1.0, None).unwrap();
    // h = cos r / (pi sqrt 2) so omega = sin r / (pi sqrt 2)
    let c = 1.0 / (PI * 2f64.sqrt());
    let a1 = 2.0 * simpson(|r| (-2.0 * c * r.sin()).exp(), 4096);
    let a2 = 2.0 * simpson(|r| (2.0 * c * r.sin()).exp(), 4096);
    assert!((modes.a1 - a1).abs() < 1e-10 * a1, "{} vs {a1}", modes.a1);
    assert!((modes.a2 - a2).abs() < 1e-10 * a2);
}

#[test]
fn nonzero_average_refused() {
    let g = grid(16, 16);
    let gs = build_gamma_set(2).unwrap();
    let f = normalized_cos_profile(&g).add_constant(0.3);
    assert!(matches!(build_product_zero_modes_for(&g, &gs, &f, None), Err(Error::NonPeriodicSolution { .. })));
    let ok = build_product_zero_modes_for(&g, &gs, &normalized_cos_profile(&g).scale(1.5), None).unwrap();
    assert!((ok.a1 - ok.a2).abs() < 1e-10 * ok.a1);
}

#[test]
fn kernel_spinor_is_checked() {
    let g = grid(16, 16);
    let gs = build_gamma_set(2).unwrap();
    let h = normalized_cos_profile(&g);
    let wavy = Spinor::from_fn(&g, 1, |x, _| num_complex::Complex64::new(x[0].cos(), 0.0));
    assert!(matches!(build_product_zero_modes(&g, &gs, &h, 1.0, Some(&wavy)), Err(Error::NotInKernel { .. })));
}

#[test]
fn built_mode_passes_pairing_norm_and_divergence_checks() {
    let g = grid(32, 32);
    let gs = build_gamma_set(2).unwrap();
    let f = normalized_cos_profile(&g);
    let modes = build_product_zero_modes(&g, &gs, &f, 1.0, None).unwrap();
    let r = verify_zero_mode(&g, &gs, &f, &modes.phi1, &ZeroModeTolerances::default()).unwrap();
    assert!(r.verified, "{r:?}");
    assert!(r.pairing_f < 1e-7 && r.pairing_d < 1e-7 && r.norm_identity_gap < 1e-7 && r.divergence_gap < 1e-7);
    assert!(r.flux_plus.unwrap() > 0.0 && r.flux_minus.unwrap() < 0.0);
}

#[test]
fn random_field_is_not_a_zero_mode() {
    let g = grid(16, 16);
    let gs = build_gamma_set(2).unwrap();
    let f = normalized_cos_profile(&g);
    let mut rng = seeded_rng(11);
    let u = random_spinor(&g, 2, &mut rng);
    let r = verify_zero_mode(&g, &gs, &f, &u, &ZeroModeTolerances::default()).unwrap();
    assert!(!r.verified);
    assert!(r.residual > 1.0);
    assert!(matches!(verify_zero_mode(&g, &gs, &f, &Spinor::zeros(&g, 2), &ZeroModeTolerances::default()), Err(Error::ZeroField)));
}

#[test]
fn chirality_image_is_zero_mode_of_opposite_sign() {
    let g = grid(32, 32);
    let gs = build_gamma_set(2).unwrap();
    let f = normalized_cos_profile(&g);
    let modes = build_product_zero_modes(&g, &gs, &f, 1.0, None).unwrap();
    let gphi = apply_chirality(&gs, &modes.phi1).unwrap();
    let r = verify_zero_mode(&g, &gs, &f.scale(-1.0), &gphi, &ZeroModeTolerances::default()).unwrap();
    assert!(r.verified, "{r:?}");
    let d1 = modes.phi1.density().real_values();
    let d2 = gphi.density().real_values();
    assert!(d1.iter().zip(&d2).all(|(a, b)| (a - b).abs() < 1e-14));
}

#[test]
fn flux_balance_at_64() {
    let g = grid(32, 64);
    let gs = build_gamma_set(2).unwrap();
    let f = normalized_cos_profile(&g);
    let modes = build_product_zero_modes(&g, &gs, &f, 1.0, None).unwrap();
    let r = nodal_flux(&g, &gs, &f, &modes.phi1).unwrap();
    assert!(r.balance_gap < 1e-6, "{r:?}");
    assert!(r.current_reversal_gap < 1e-12);

    // direct quadrature of f |phi|^2 over {f > 0}
    let phi = modes.phi1.normalized().unwrap();
    let dens = phi.density().real_values();
    let fv = f.real_values();
    let plus: f64 = fv.iter().zip(&dens).filter(|(v, _)| **v > 0.0).map(|(v, d)| v * d * g.cell_volume()).sum();
    assert!(plus > 0.0);
    assert!((r.flux_plus - plus).abs() < 1e-14);

    let flipped = nodal_flux(&g, &gs, &f.scale(-1.0), &apply_chirality(&gs, &modes.phi1).unwrap()).unwrap();
    assert!(flipped.flux_plus > 0.0);
    assert!((flipped.flux_plus + r.flux_minus).abs() < 1e-14);
    assert!((flipped.flux_minus + r.flux_plus).abs() < 1e-14);
}

#[test]
fn flux_needs_nodal_set() {
    let g = grid(8, 8);
    let gs = build_gamma_set(2).unwrap();
    let f = Field::constant(&g, 1.0);
    let mut rng = seeded_rng(2);
    let u = random_spinor(&g, 2, &mut rng);
    assert!(matches!(nodal_flux(&g, &gs, &f, &u), Err(Error::NoNodalSet)));
}

#[test]
fn flux_balance_shrinks_under_refinement() {
    let gs = build_gamma_set(2).unwrap();
    let mut last = f64::INFINITY;
    for nr in [16, 32, 64] {
        let g = grid(16, nr);
        let f = normalized_cos_profile(&g);
        let modes = build_product_zero_modes(&g, &gs, &f, 2.0, None).unwrap();
        let gap = nodal_flux(&g, &gs, &f.scale(2.0), &modes.phi1).unwrap().balance_gap;
        assert!(gap <= last.max(1e-12), "{gap} after {last}");
        last = gap;
    }
}

#[test]
fn sign_definite_deformation_has_positive_spectrum() {
    let g = grid(16, 16);
    let gs = build_gamma_set(2).unwrap();
    let f = Field::from_fn(&g, |x| 1.0 + 0.2 * x[0].sin() * x[1].sin());
    let (r, _) = positivity_vs_spectrum(&g, &gs, &f, &SpectrumCheckOptions::default()).unwrap();
    assert!(r.checker_holds && r.consistent);
    assert!(r.lambda_min > r.zero_threshold);
}

#[test]
fn counterexample_is_consistent_with_criteria() {
    let g = grid(16, 16);
    let gs = build_gamma_set(2).unwrap();
    let f = normalized_cos_profile(&g);
    let opts = SpectrumCheckOptions { dense: true, ..SpectrumCheckOptions::default() };
    let (r, spec) = positivity_vs_spectrum(&g, &gs, &f, &opts).unwrap();
    assert!(!r.checker_holds);
    assert!(r.consistent);
    assert!(r.lambda_min < 1e-8);
    assert!(spec.zero_count() >= 2);
    assert!(r.note.starts_with("sufficient-only"));
}

#[test]
fn large_tau_fails_criteria_without_zero_modes() {
    let g = grid(16, 16);
    let gs = build_gamma_set(2).unwrap();
    let f = Field::from_fn(&g, |x| 1.0 + 3.0 * x[0].cos());
    let (r, _) = positivity_vs_spectrum(&g, &gs, &f, &SpectrumCheckOptions::default()).unwrap();
    assert!(!r.checker_holds);
    assert!(r.consistent);
    assert!(r.note.starts_with("sufficient-only"));
}

#[test]
fn nodal_catalog_entries_change_sign() {
    let g = grid(16, 16);
    for e in nodal_catalog(&g) {
        assert!(!check_sign_definite(&e.f).unwrap().holds, "{}", e.name);
        assert!(!check_uniform_condition(&e.f).unwrap().holds, "{}", e.name);
    }
}

#[test]
fn reports_serialize() {
    let g = grid(8, 8);
    let r = check_uniform_condition(&Field::constant(&g, 2.0)).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["condition"], "uniform_gradient");
    assert_eq!(v["holds"], true);
}
