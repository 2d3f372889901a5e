//! Brute-force Cartesian checks of the closed-form radial geometry.

use cornermass::geometry::RadialPatch;
use cornermass::numgrid::{Interval, Jet, ScalarProfile};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Mat = [[f64; 3]; 3];

/// Radial profile with closed-form value only; derivatives are never used
/// by the oracle.
#[derive(Clone, Copy)]
struct Data {
    f: fn(&[f64; 4], f64) -> f64,
    rho: fn(&[f64; 4], f64) -> f64,
    a: fn(&[f64; 4], f64) -> f64,
    b: fn(&[f64; 4], f64) -> f64,
    c: [f64; 4],
}

fn norm(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn metric(d: &Data, x: &[f64; 3]) -> Mat {
    let s = norm(x);
    let n = [x[0] / s, x[1] / s, x[2] / s];
    let t = ((d.rho)(&d.c, s) / s).powi(2);
    let fi = 1.0 / (d.f)(&d.c, s);
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            g[i][j] = t * (delta - n[i] * n[j]) + fi * n[i] * n[j];
        }
    }
    g
}

fn curvature_tensor(d: &Data, x: &[f64; 3]) -> Mat {
    let s = norm(x);
    let n = [x[0] / s, x[1] / s, x[2] / s];
    let g = metric(d, x);
    let (a, b) = ((d.a)(&d.c, s), (d.b)(&d.c, s));
    let fi = 1.0 / (d.f)(&d.c, s);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = b * g[i][j] + (a - b) * fi * n[i] * n[j];
        }
    }
    k
}

fn momentum(d: &Data, x: &[f64; 3]) -> Mat {
    let g = metric(d, x);
    let k = curvature_tensor(d, x);
    let gi = inverse(&g);
    let tr: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| gi[i][j] * k[i][j]).sum();
    let mut p = k;
    for i in 0..3 {
        for j in 0..3 {
            p[i][j] -= tr * g[i][j];
        }
    }
    p
}

fn inverse(m: &Mat) -> Mat {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    inv
}

fn shifted(x: &[f64; 3], k: usize, h: f64) -> [f64; 3] {
    let mut y = *x;
    y[k] += h;
    y
}

/// `∂_k T` by central differences.
fn partial<F: Fn(&[f64; 3]) -> Mat>(t: &F, x: &[f64; 3], h: f64) -> [Mat; 3] {
    let mut out = [[[0.0; 3]; 3]; 3];
    for (k, dk) in out.iter_mut().enumerate() {
        let p = t(&shifted(x, k, h));
        let m = t(&shifted(x, k, -h));
        for i in 0..3 {
            for j in 0..3 {
                dk[i][j] = (p[i][j] - m[i][j]) / (2.0 * h);
            }
        }
    }
    out
}

/// `Γ^k_ij` stored as `gamma[k][i][j]`.
fn christoffel(d: &Data, x: &[f64; 3], h: f64) -> [Mat; 3] {
    let dg = partial(&|y: &[f64; 3]| metric(d, y), x, h);
    let gi = inverse(&metric(d, x));
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                gamma[k][i][j] =
                    0.5 * (0..3).map(|l| gi[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j])).sum::<f64>();
            }
        }
    }
    gamma
}

fn oracle_scalar_curvature(d: &Data, x: &[f64; 3], h: f64) -> f64 {
    let gamma = christoffel(d, x, h);
    let mut dgamma = [[[[0.0; 3]; 3]; 3]; 3];
    for (m, dm) in dgamma.iter_mut().enumerate() {
        let p = christoffel(d, &shifted(x, m, h), h);
        let q = christoffel(d, &shifted(x, m, -h), h);
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    dm[k][i][j] = (p[k][i][j] - q[k][i][j]) / (2.0 * h);
                }
            }
        }
    }
    let gi = inverse(&metric(d, x));
    let mut r = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let mut ric = 0.0;
            for k in 0..3 {
                ric += dgamma[k][k][i][j] - dgamma[j][k][i][k];
                for l in 0..3 {
                    ric += gamma[k][k][l] * gamma[l][i][j] - gamma[k][j][l] * gamma[l][i][k];
                }
            }
            r += gi[i][j] * ric;
        }
    }
    r
}

/// `J(ν)` with `J_j = g^{ik}∇_k π_ij` and `ν = √f ∂_r`.
fn oracle_radial_current(d: &Data, x: &[f64; 3], h: f64) -> f64 {
    let dp = partial(&|y: &[f64; 3]| momentum(d, y), x, h);
    let p = momentum(d, x);
    let gamma = christoffel(d, x, h);
    let gi = inverse(&metric(d, x));
    let s = norm(x);
    let sf = (d.f)(&d.c, s).sqrt();
    let mut jr = 0.0;
    for j in 0..3 {
        let mut jj = 0.0;
        for i in 0..3 {
            for k in 0..3 {
                let mut cov = dp[k][i][j];
                for l in 0..3 {
                    cov -= gamma[l][k][i] * p[l][j] + gamma[l][k][j] * p[i][l];
                }
                jj += gi[i][k] * cov;
            }
        }
        jr += sf * x[j] / s * jj;
    }
    jr
}

fn analytic(d: Data, g: fn(&[f64; 4], f64) -> f64, dom: Interval) -> ScalarProfile {
    ScalarProfile::from_fn(dom, move |r| {
        let e = 1e-4 * r.max(1.0);
        let (p, c, m) = (g(&d.c, r + e), g(&d.c, r), g(&d.c, r - e));
        let (p2, m2) = (g(&d.c, r + 2.0 * e), g(&d.c, r - 2.0 * e));
        let d1 = (8.0 * (p - m) - (p2 - m2)) / (12.0 * e);
        let d2 = (16.0 * (p + m) - (p2 + m2) - 30.0 * c) / (12.0 * e * e);
        Jet::new(c, d1, d2)
    })
}

fn random_data(c: [f64; 4]) -> Data {
    Data {
        f: |c, r| 1.0 + c[0] * r * r * (-r).exp() + 0.3 * c[1] * (r / (1.0 + r)).powi(2),
        rho: |c, r| r * (1.0 + 0.1 * c[2] * (r / (1.0 + r * r))),
        a: |c, r| c[3] + 0.4 * c[0] * r - 0.2 * c[1] * r * r,
        b: |c, r| 0.5 * c[2] - 0.3 * c[3] * r + 0.1 * c[0] * (r * 0.7).sin(),
        c,
    }
}

fn closed_form(d: Data) -> RadialPatch {
    let dom = Interval::new(0.3, 4.0).unwrap();
    RadialPatch::with_areal_radius(
        analytic(d, d.f, dom),
        analytic(d, d.a, dom),
        analytic(d, d.b, dom),
        analytic(d, d.rho, dom),
        dom,
    )
    .unwrap()
}

fn check_point(d: Data, r: f64, dir: [f64; 3]) {
    let patch = closed_form(d);
    let s = norm(&dir);
    let x = [r * dir[0] / s, r * dir[1] / s, r * dir[2] / s];
    let h = 2e-3;
    let c = patch.constraints(r).unwrap();
    let r_oracle = oracle_scalar_curvature(&d, &x, h);
    let k = curvature_tensor(&d, &x);
    let gi = inverse(&metric(&d, &x));
    let mut tr = 0.0;
    let mut ksq = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            tr += gi[i][j] * k[i][j];
            for p in 0..3 {
                for q in 0..3 {
                    ksq += gi[i][p] * gi[j][q] * k[i][j] * k[p][q];
                }
            }
        }
    }
    let mu_oracle = 0.5 * (r_oracle + tr * tr - ksq);
    let j_oracle = oracle_radial_current(&d, &x, h);
    assert!((c.scalar_curvature - r_oracle).abs() < 1e-4, "R {} vs {}", c.scalar_curvature, r_oracle);
    assert!((c.mu - mu_oracle).abs() < 1e-4, "mu {} vs {}", c.mu, mu_oracle);
    assert!((c.j_radial - j_oracle).abs() < 1e-4, "J {} vs {}", c.j_radial, j_oracle);
}

#[test]
fn constraints_match_cartesian_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..12 {
        let c = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let r = rng.gen_range(0.5..3.5);
        let dir = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        check_point(random_data(c), r, dir);
    }
}

#[test]
fn ad_hoc_current_matches_oracle() {
    let d = Data { f: |_, _| 1.0, rho: |_, r| r, a: |_, _| 0.0, b: |_, r| r, c: [0.0; 4] };
    check_point(d, 1.3, [0.3, -0.2, 0.9]);
    let dom = Interval::new(0.5, 2.0).unwrap();
    let patch = RadialPatch::new(
        ScalarProfile::constant(1.0, dom),
        ScalarProfile::constant(0.0, dom),
        ScalarProfile::laurent(vec![(1, 1.0)], dom),
        dom,
    )
    .unwrap();
    let report = patch.dec_check(101).unwrap();
    let c = patch.constraints(report.radius).unwrap();
    assert_eq!(report.min_margin, c.dec_margin);
    assert!((c.mu - report.radius * report.radius).abs() < 1e-12);
    assert!((c.j_radial + 4.0).abs() < 1e-12);
    assert!((report.min_margin - (0.25 - 4.0)).abs() < 1e-12);
}

#[test]
fn mean_curvature_is_chart_independent() {
    let m = 1.0;
    let dom = Interval::new(0.3, 20.0).unwrap();
    let psi = move |s: f64| 1.0 + m / (2.0 * s);
    let f = ScalarProfile::from_fn(dom, move |s| {
        let p = psi(s);
        let dp = -m / (2.0 * s * s);
        let ddp = m / (s * s * s);
        let v = p.powi(-4);
        let d1 = -4.0 * p.powi(-5) * dp;
        let d2 = 20.0 * p.powi(-6) * dp * dp - 4.0 * p.powi(-5) * ddp;
        Jet::new(v, d1, d2)
    });
    let rho = ScalarProfile::from_fn(dom, move |s| {
        let p = psi(s);
        let dp = -m / (2.0 * s * s);
        let ddp = m / (s * s * s);
        Jet::new(s * p * p, p * p + 2.0 * s * p * dp, 4.0 * p * dp + 2.0 * s * (dp * dp + p * ddp))
    });
    let zero = ScalarProfile::constant(0.0, dom);
    let iso = RadialPatch::with_areal_radius(f, zero.clone(), zero, rho, dom).unwrap();
    let adom = Interval::new(2.1, 30.0).unwrap();
    let areal = RadialPatch::time_symmetric(ScalarProfile::laurent(vec![(0, 1.0), (-1, -2.0 * m)], adom), adom).unwrap();
    for s in [1.0, 2.0, 5.0, 15.0] {
        let r = iso.areal_radius(s).unwrap();
        let h_iso = iso.mean_curvature(s).unwrap();
        let h_areal = areal.mean_curvature(r).unwrap();
        assert!((h_iso - h_areal).abs() < 1e-12, "s = {s}: {h_iso} vs {h_areal}");
        assert!(iso.scalar_curvature(s).unwrap().abs() < 1e-12);
    }
    let mots = iso.null_expansions(0.5).unwrap();
    assert!(mots.marginally_outer_trapped);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mu_matches_oracle(c0 in -1.0..1.0f64, c1 in -1.0..1.0f64, c2 in -1.0..1.0f64, c3 in -1.0..1.0f64, r in 0.5..3.5f64) {
        check_point(random_data([c0, c1, c2, c3]), r, [0.2, 0.5, -0.8]);
    }

    #[test]
    fn pi_nn_plus_tr_sigma_k_vanishes(a in -5.0..5.0f64, b in -5.0..5.0f64, r in 0.5..2.0f64) {
        let dom = Interval::new(0.5, 2.0).unwrap();
        let p = RadialPatch::new(ScalarProfile::constant(1.0, dom), ScalarProfile::constant(a, dom), ScalarProfile::constant(b, dom), dom).unwrap();
        let m = p.momentum_tensor(r).unwrap();
        prop_assert!((m.pi_nn + m.tr_sigma_k).abs() <= 1e-14);
    }

    #[test]
    fn vacuum_families(m in 0.1..3.0f64, sign in prop::bool::ANY, r in 0.0..1.0f64) {
        let dom = Interval::new(3.0 * m, 50.0 * m).unwrap();
        let schw = RadialPatch::time_symmetric(ScalarProfile::laurent(vec![(0, 1.0), (-1, -2.0 * m)], dom), dom).unwrap();
        let c = schw.constraints(3.0 * m + r * 47.0 * m).unwrap();
        prop_assert!(c.mu.abs() < 1e-10 && c.j_radial.abs() < 1e-10);
        let hdom = Interval::new(0.0, 1.0).unwrap();
        let s = if sign { 1.0 } else { -1.0 };
        let k = ScalarProfile::constant(s, hdom);
        let hyp = RadialPatch::new(ScalarProfile::laurent(vec![(0, 1.0), (2, 1.0)], hdom), k.clone(), k, hdom).unwrap();
        let c = hyp.constraints(r).unwrap();
        prop_assert!(c.mu.abs() < 1e-10 && c.j_radial.abs() < 1e-10);
    }
}
