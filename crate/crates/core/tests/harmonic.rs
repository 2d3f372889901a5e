//! Spacetime harmonic solves, Hessians, mass bounds and integral identities.

use std::f64::consts::PI;

use cornermass::corner::{CustomPatch, GluedDataSet, Scenario, Side};
use cornermass::harmonic::{
    boundary_formula_check, grid_study, hessian_at, integral_formula_check, mass_bound_report, solve_and_bound,
    solve_spacetime_harmonic, spacetime_hessian, AxisymField, Direction, HarmonicError, HarmonicSettings, InnerBoundary,
    NodeSide, ResolvedInner, ADM_RADII,
};
use cornermass::masses::adm_energy_momentum;
use cornermass::numgrid::AxisymGrid;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform_grid(r_out: f64, n: usize) -> AxisymGrid {
    AxisymGrid::new((0..=n).map(|k| r_out * k as f64 / n as f64).collect(), n).unwrap()
}

fn umbilic(c: f64) -> GluedDataSet {
    let patches = vec![CustomPatch { lo: 0.0, hi: 1e4, f: vec![(0, 1.0)], a: vec![(0, c)], b: vec![(0, c)] }];
    Scenario::Custom { patches, allow_discontinuous: false }.build().unwrap()
}

fn shell(kappa: f64) -> GluedDataSet {
    let c = kappa / 3.0;
    let patches = vec![
        CustomPatch { lo: 0.0, hi: 1.0, f: vec![(0, 1.0)], a: vec![], b: vec![] },
        CustomPatch { lo: 1.0, hi: 1.2, f: vec![(0, 1.0)], a: vec![(0, c)], b: vec![(0, c)] },
        CustomPatch { lo: 1.2, hi: 1e4, f: vec![(0, 1.0)], a: vec![], b: vec![] },
    ];
    Scenario::Custom { patches, allow_discontinuous: true }.build().unwrap()
}

#[test]
fn flat_solution_is_the_coordinate() {
    let set = Scenario::Flat.build().unwrap();
    let s = HarmonicSettings::default().with_resolution(32);
    let sol = solve_spacetime_harmonic(&set, &s).unwrap();
    assert_eq!(sol.inner, ResolvedInner::Center);
    assert!(sol.picard.linear && sol.picard.iterations == 1);
    let g = sol.field.grid();
    for i in 0..g.n_r() {
        for j in 0..g.n_theta() {
            assert!((sol.field.value(i, j) - g.radii()[i] * g.theta(j).cos()).abs() <= 1e-8);
        }
    }
}

#[test]
fn minus_z_direction_flips_the_field() {
    let set = Scenario::Flat.build().unwrap();
    let s = HarmonicSettings { direction: Direction::MinusZ, ..HarmonicSettings::default().with_resolution(16) };
    let sol = solve_spacetime_harmonic(&set, &s).unwrap();
    let g = sol.field.grid();
    let i = g.n_r() / 2;
    assert!((sol.field.value(i, 0) + g.radii()[i]).abs() <= 1e-8);
}

#[test]
fn schwarzschild_is_linear_and_obeys_maximum_principle() {
    let set = Scenario::Schwarzschild { m: 1.0, r_in: 3.0 }.build().unwrap();
    let s = HarmonicSettings::default().with_resolution(32);
    let sol = solve_spacetime_harmonic(&set, &s).unwrap();
    assert_eq!(sol.inner, ResolvedInner::Asymptote);
    assert_eq!(sol.picard.iterations, 1);
    assert!(sol.picard.equation_residual <= 1e-10, "{}", sol.picard.equation_residual);
    assert!(sol.max_principle_violation <= 1e-10);
    let bound = sol.field.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(bound <= s.outer_radius + 1e-10);
}

#[test]
fn constant_inner_value_reports_flux_sign() {
    let set = Scenario::Schwarzschild { m: 1.0, r_in: 3.0 }.build().unwrap();
    let s = HarmonicSettings { inner: InnerBoundary::Constant(None), ..HarmonicSettings::default().with_resolution(16) };
    let sol = solve_spacetime_harmonic(&set, &s).unwrap();
    assert_eq!(sol.inner, ResolvedInner::Constant(0.0));
    let sign = sol.inner_sign.unwrap();
    assert!(sign.min_normal_derivative <= sign.max_normal_derivative);
    let center = HarmonicSettings { inner: InnerBoundary::Center, ..s };
    assert!(matches!(solve_spacetime_harmonic(&set, &center), Err(HarmonicError::IncompatibleInner(_))));
}

#[test]
fn thin_shell_source_matches_first_order_sign() {
    let s = HarmonicSettings { outer_radius: 10.0, ..HarmonicSettings::default().with_resolution(48) };
    let l = s.outer_radius;
    for kappa in [0.02, -0.02] {
        let sol = solve_spacetime_harmonic(&shell(kappa), &s).unwrap();
        let oracle = kappa * (1.2f64.powi(2) - 1.0) / 2.0 - kappa * (1.2f64.powi(3) - 1.0) / (3.0 * l);
        let w0 = sol.field.value(0, 0);
        assert_eq!(w0.signum(), kappa.signum());
        assert!((w0 / oracle - 1.0).abs() < 0.05, "{w0} vs {oracle}");
    }
}

#[test]
fn picard_cap_is_reported() {
    let set = Scenario::HyperbolicNegschw { sign: 1.0 }.build().unwrap();
    let s = HarmonicSettings { max_picard: 3, ..HarmonicSettings::default().with_resolution(16) };
    match solve_spacetime_harmonic(&set, &s) {
        Err(HarmonicError::PicardStagnation { iterations, history }) => {
            assert_eq!(iterations, 3);
            assert_eq!(history.len(), 3);
        }
        other => panic!("expected stagnation, got {other:?}"),
    }
}

#[test]
fn picard_contracts_on_nonlinear_scenarios() {
    for sc in [Scenario::HyperbolicNegschw { sign: 1.0 }, Scenario::HyperbolicNegschw { sign: -1.0 }, Scenario::ShiTamGlue { r0: 1.0, h: 3.0, omega: 1.0 }] {
        let sol = solve_spacetime_harmonic(&sc.build().unwrap(), &HarmonicSettings::default().with_resolution(32)).unwrap();
        assert!(!sol.picard.linear);
        assert!(sol.picard.contraction_monotone(), "{}: {:?}", sc.name(), sol.picard.changes);
        assert!(sol.picard.equation_residual <= 1e-8);
        assert!(sol.max_principle_violation <= 1e-10);
    }
}

#[test]
fn flat_hessian_of_z_vanishes() {
    let set = Scenario::Flat.build().unwrap();
    let f = AxisymField::sample(&set, uniform_grid(2.0, 16), 0.0, |r, t| r * t.cos()).unwrap();
    let h = spacetime_hessian(&f);
    assert!(h.max_norm_sq() <= 1e-20);
}

#[test]
fn umbilic_k_shifts_hessian_norm() {
    let c = 0.7;
    let set = umbilic(c);
    let f = AxisymField::sample(&set, uniform_grid(2.0, 16), 0.0, |r, t| r * t.cos()).unwrap();
    let h = spacetime_hessian(&f);
    for s in &h.samples {
        assert!((s.norm_sq - 3.0 * c * c).abs() <= 1e-10, "{s:?}");
    }
    assert!(h.identity_residual(&f) <= 1e-12);
}

fn cartesian_hessian_frame(r: f64, t: f64) -> [f64; 4] {
    let (x, z) = (r * t.sin(), r * t.cos());
    let xs = [x, 0.0, z];
    let mut h = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let dz = |k: usize| if k == 2 { 1.0 } else { 0.0 };
            let d = if i == j { 1.0 } else { 0.0 };
            h[i][j] = dz(i) * xs[j] / r + dz(j) * xs[i] / r + z * (d / r - xs[i] * xs[j] / r.powi(3));
        }
    }
    let e1 = [t.sin(), 0.0, t.cos()];
    let e2 = [t.cos(), 0.0, -t.sin()];
    let e3 = [0.0, 1.0, 0.0];
    let q = |a: &[f64; 3], b: &[f64; 3]| (0..3).map(|i| (0..3).map(|j| a[i] * h[i][j] * b[j]).sum::<f64>()).sum::<f64>();
    [q(&e1, &e1), q(&e1, &e2), q(&e2, &e2), q(&e3, &e3)]
}

#[test]
fn finite_difference_hessian_converges_at_stencil_order() {
    let set = Scenario::Flat.build().unwrap();
    let err = |n: usize| {
        let f = AxisymField::sample(&set, uniform_grid(2.0, n), 0.0, |r, t| r * r * t.cos() + (0.8 * r).sin() * t.cos().powi(2)).unwrap();
        let g = f.grid();
        let mut worst: f64 = 0.0;
        let i = g.node_at(1.0).unwrap();
        for j in 0..g.n_theta() {
            let s = hessian_at(&f, i, j, NodeSide::Upper).unwrap();
            let t = g.theta(j);
            let exact = cartesian_hessian_frame(1.0, t);
            let r: f64 = 1.0;
            let (st, ct) = (t.sin(), t.cos());
            let sin_part = {
                let (v, v1, v2) = ((0.8 * r).sin(), 0.8 * (0.8 * r).cos(), -0.64 * (0.8 * r).sin());
                let urr = v2 * ct * ct;
                let ur = v1 * ct * ct;
                let ut = -2.0 * v * st * ct;
                let urt = -2.0 * v1 * st * ct;
                let utt = -2.0 * v * (ct * ct - st * st);
                let polar = if st.abs() < 1e-12 { utt } else { ct / st * ut };
                [urr, (urt - ut / r) / r, (utt + r * ur) / (r * r), ur / r + polar / (r * r)]
            };
            for c in 0..4 {
                worst = worst.max((s.hessian[c] - exact[c] - sin_part[c]).abs());
            }
        }
        worst
    };
    let (e1, e2) = (err(32), err(64));
    let order = (e1 / e2).log2();
    assert!(order >= 1.8, "errors {e1:e} {e2:e}, order {order}");
}

#[test]
fn spacetime_hessian_identity_on_solved_field() {
    let set = Scenario::HyperbolicNegschw { sign: 1.0 }.build().unwrap();
    let sol = solve_spacetime_harmonic(&set, &HarmonicSettings::default().with_resolution(16)).unwrap();
    let h = spacetime_hessian(&sol.field);
    assert!(h.identity_residual(&sol.field) <= 1e-12);
}

#[test]
fn flat_mass_bound_vanishes() {
    let set = Scenario::Flat.build().unwrap();
    let (_, rep) = solve_and_bound(&set, &HarmonicSettings::default().with_resolution(32)).unwrap();
    for v in [rep.lhs, rep.bulk, rep.corner, rep.slack] {
        assert!(v.abs() <= 1e-8, "{rep:?}");
    }
    assert_eq!(rep.slack, rep.slack_recomputed());
}

#[test]
fn schwarzschild_slack_is_nonnegative_under_refinement() {
    let set = Scenario::Schwarzschild { m: 1.0, r_in: 3.0 }.build().unwrap();
    let study = grid_study(&set, &HarmonicSettings::default(), &[16, 32, 64]).unwrap();
    assert!(study.holds, "{:?}", study.slacks);
    assert!(study.observed_order.unwrap() >= 1.0, "{:?}", study.differences);
    for r in &study.reports {
        assert!(r.corner_terms.is_empty() && !r.corner_hypothesis_violated);
        assert_eq!(r.slack, r.slack_recomputed());
        assert!(r.delta_variation <= study.epsilon_grid.max(r.delta_variation));
    }
}

#[test]
fn counterexample_books_balance() {
    let set = Scenario::HyperbolicNegschw { sign: 1.0 }.build().unwrap();
    let (sol, rep) = solve_and_bound(&set, &HarmonicSettings::default().with_resolution(32)).unwrap();
    assert!(rep.corner_hypothesis_violated);
    assert!(rep.corner < 0.0 && rep.bulk >= 0.0);
    assert!((rep.lhs + 8.0 * PI).abs() < 1e-2);
    assert_eq!(rep.corner_terms.len(), 1);
    assert!((rep.corner_terms[0].jump + 2.0).abs() < 1e-10);
    let adm = adm_energy_momentum(&set, &ADM_RADII).unwrap();
    let again = mass_bound_report(&set, &sol, &adm).unwrap();
    assert_eq!(again.corner, rep.corner);
}

#[test]
fn field_exports_csv() {
    let set = Scenario::Flat.build().unwrap();
    let f = AxisymField::sample(&set, uniform_grid(1.0, 8), 0.0, |r, t| r * t.cos()).unwrap();
    let csv = f.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,theta,u,grad_norm"));
    assert_eq!(lines.count(), f.grid().len());
}

#[test]
fn flat_ball_integral_formula() {
    let set = Scenario::Flat.build().unwrap();
    let err = |n: usize| {
        let f = AxisymField::sample(&set, uniform_grid(2.0, n), 1e-8, |r, t| r * t.cos()).unwrap();
        let rep = integral_formula_check(&set, &f, 0.0, 1.0).unwrap();
        assert!(rep.lhs.abs() <= 1e-12 && rep.normal_flux.abs() <= 1e-10 && rep.k_flux.abs() <= 1e-12);
        assert!((rep.euler_part - 4.0 * PI).abs() <= 1e-10);
        rep.defect.abs()
    };
    let (e1, e2) = (err(32), err(64));
    assert!(e2 < 1e-2 && (e1 / e2).log2() > 1.8);
}

#[test]
fn schwarzschild_annulus_integral_formula_converges() {
    let set = Scenario::Schwarzschild { m: 1.0, r_in: 3.0 }.build().unwrap();
    let defect = |n: usize| {
        let s = HarmonicSettings::default().with_resolution(n);
        let sol = solve_spacetime_harmonic(&set, &s).unwrap();
        let r = sol.field.grid().radii().to_vec();
        let ib = r.iter().position(|&x| x > 10.0).unwrap();
        integral_formula_check(&set, &sol.field, r[0], r[ib]).unwrap().defect.abs()
    };
    let d: Vec<f64> = [32, 64, 128].iter().map(|&n| defect(n)).collect();
    assert!(d[2] < d[1] && d[1] < d[0], "{d:?}");
}

#[test]
fn integral_formula_rejects_corner_crossing() {
    let set = Scenario::HyperbolicNegschw { sign: 1.0 }.build().unwrap();
    let sol = solve_spacetime_harmonic(&set, &HarmonicSettings::default().with_resolution(16)).unwrap();
    let r = sol.field.grid().radii();
    assert!(integral_formula_check(&set, &sol.field, 0.0, r[r.len() - 1]).is_err());
}

#[test]
fn boundary_formula_flat_unit_sphere() {
    let set = Scenario::Flat.build().unwrap();
    let f = AxisymField::sample(&set, uniform_grid(2.0, 64), 1e-8, |r, t| r * t.cos()).unwrap();
    let rep = boundary_formula_check(&f, 1.0, Side::Inner).unwrap();
    assert!((rep.lhs - rep.rhs).abs() <= 1e-6);
    assert!(rep.lhs.abs() <= 1e-10);
    assert!((rep.momentum_mean_curvature + 8.0 * PI).abs() < 1e-2);
    assert!((rep.geodesic_curvature - 4.0 * PI).abs() < 1e-2);
    assert!((rep.tangential - 16.0 * PI / 3.0).abs() < 1e-2);
    assert!((rep.curve_acceleration + 4.0 * PI / 3.0).abs() < 1e-2);
    assert!(rep.equation_defect.abs() < 1e-10);
    assert_eq!(rep.rhs, rep.rhs_recomputed());
    assert!(!rep.flagged);
}

#[test]
fn boundary_formula_radial_field_has_no_tangential_terms() {
    let set = Scenario::Flat.build().unwrap();
    let f = AxisymField::sample(&set, uniform_grid(2.0, 32), 1e-8, |r, _| r * r).unwrap();
    let rep = boundary_formula_check(&f, 1.0, Side::Inner).unwrap();
    assert!(rep.geodesic_curvature.abs() < 1e-12 && rep.curve_acceleration.abs() < 1e-12);
    assert!((rep.lhs - rep.rhs).abs() < 1e-2);
}

fn random_field(seed: u64) -> impl Fn(f64, f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.1..0.1)).collect();
    move |r: f64, t: f64| {
        let x = t.cos();
        r * x + c[0] + c[1] * r * r * (1.5 * x * x - 0.5) + c[2] * (1.3 * r).sin() * x + c[3] * r.powi(3) * x.powi(3)
            + c[4] * (0.7 * r).cos() + c[5] * r * r * x
    }
}

#[test]
fn boundary_formula_injected_field_converges() {
    let set = Scenario::Flat.build().unwrap();
    for seed in 0..4 {
        let u = random_field(seed);
        let res = |n: usize| {
            let f = AxisymField::sample(&set, uniform_grid(2.0, n), 1e-8, &u).unwrap();
            boundary_formula_check(&f, 1.0, Side::Inner).unwrap().discrepancy.abs()
        };
        let (e1, e2) = (res(64), res(128));
        assert!((e1 / e2).log2() >= 1.7, "seed {seed}: {e1:e} {e2:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hessian_identity_is_exact(c in -2.0..2.0f64, a in -1.0..1.0f64, b in -1.0..1.0f64) {
        let set = umbilic(c);
        let f = AxisymField::sample(&set, uniform_grid(2.0, 12), 1e-3, |r, t| r * t.cos() + a * r * r + b * (r * t.cos()).powi(2)).unwrap();
        let h = spacetime_hessian(&f);
        prop_assert!(h.identity_residual(&f) <= 1e-12);
        for s in &h.samples {
            prop_assert!(s.grad_norm_delta >= f.delta());
        }
    }

    #[test]
    fn boundary_identity_converges_on_both_sides(seed in 0u64..1000) {
        let set = Scenario::Flat.build().unwrap();
        let u = random_field(seed);
        for side in [Side::Inner, Side::Outer] {
            let res = |n: usize| {
                let f = AxisymField::sample(&set, uniform_grid(2.0, n), 1e-8, &u).unwrap();
                let rep = boundary_formula_check(&f, 1.0, side).unwrap();
                assert_eq!(rep.rhs, rep.rhs_recomputed());
                rep.discrepancy.abs()
            };
            let (e1, e2) = (res(32), res(64));
            prop_assert!(e2 <= 0.5 * e1 || e2 < 1e-10, "{} {}", e1, e2);
        }
    }

    #[test]
    fn flat_slack_vanishes_at_any_truncation(l in 5.0..100.0f64) {
        let set = Scenario::Flat.build().unwrap();
        let s = HarmonicSettings { outer_radius: l, ..HarmonicSettings::default().with_resolution(16) };
        let (_, rep) = solve_and_bound(&set, &s).unwrap();
        prop_assert!(rep.slack.abs() <= 1e-8);
    }
}
