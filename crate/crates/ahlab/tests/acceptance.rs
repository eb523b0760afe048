//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single PASS/FAIL line (visible with `--nocapture`) before asserting.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ahlab::expr::Expr;
use ahlab::gauge_flow::{holder_check, FlowField};
use ahlab::geometry::{make_hyperbolic, WarpedMetric, YamabeSign};
use ahlab::grid::RadialGrid;
use ahlab::indicial::{conjugate, default_defining_function, indicial_roots};
use ahlab::{eigenfunction, einstein, spectrum};

fn verdict(id: u32, name: &str, ok: bool, detail: &str) {
    println!(
        "[criterion {id:02}] {name}: {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id:02} {name}: {detail}");
}

fn hyperbolic(n: usize, t_max: f64, points: usize) -> WarpedMetric {
    make_hyperbolic(n, RadialGrid::uniform(0.0, t_max, points).unwrap()).unwrap()
}

fn radii(t_max: f64) -> Vec<f64> {
    [0.62, 0.73, 0.84, 0.95].iter().map(|f| f * t_max).collect()
}

#[test]
fn c01_hyperbolic_bottom_of_spectrum() {
    let mut detail = String::new();
    let mut ok = true;
    for n in 1..=4usize {
        let start = Instant::now();
        let m = hyperbolic(n, 14.0, 2801);
        let est = spectrum::lambda0_estimate(&m, &radii(14.0)).unwrap();
        let elapsed = start.elapsed();
        let target = (n * n) as f64 / 4.0;
        let err = (est.value - target).abs();
        ok &= err < 1e-3 && elapsed.as_secs_f64() < 10.0;
        detail.push_str(&format!(
            "n={n}: {:.6} (defect {err:.1e}, {:.2}s) ",
            est.value,
            elapsed.as_secs_f64()
        ));
    }
    verdict(1, "hyperbolic lambda0 = n^2/4", ok, &detail);
}

#[test]
fn c02_hyperbolic_has_no_point_spectrum() {
    let m = hyperbolic(3, 14.0, 2801);
    let eigs = spectrum::shoot_eigenvalues(&m, 13.3, 1e-8).unwrap();
    verdict(
        2,
        "no eigenvalues below threshold on hyperbolic 4-space",
        eigs.is_empty(),
        &format!("scan returned {eigs:?}"),
    );
}

#[test]
fn c03_growth_eigenfunction_matches_cosh() {
    let m = hyperbolic(3, 10.0, 2001);
    let rep = eigenfunction::solve(&m).unwrap();
    let defect = rep
        .points
        .iter()
        .enumerate()
        .map(|(j, &t)| (rep.u[j] - t.cosh()).abs() / t.cosh())
        .fold(0.0f64, f64::max);
    verdict(
        3,
        "growth eigenfunction oracle",
        defect <= 1e-6,
        &format!("sup relative defect vs cosh t: {defect:.2e}"),
    );
}

#[test]
fn c04_boundary_limits() {
    let m = hyperbolic(3, 10.0, 2001);
    let rep = eigenfunction::solve(&m).unwrap();
    let v_err = (rep.v_limit.value - 0.25).abs();
    let g_err = (rep.g_limit.value - (-1.0)).abs();
    verdict(
        4,
        "boundary v and gradient-defect limits",
        v_err <= 1e-3 && g_err <= 1e-3,
        &format!(
            "v -> {:.6} (defect {v_err:.1e}), G -> {:.6} (defect {g_err:.1e})",
            rep.v_limit.value, rep.g_limit.value
        ),
    );
}

#[test]
fn c05_subharmonicity_identity() {
    let mut detail = String::new();
    let mut ok = true;
    for n in [3usize, 1] {
        let m = hyperbolic(n, 10.0, 4001);
        let rep = eigenfunction::solve(&m).unwrap();
        let sub = eigenfunction::subharmonicity_check(&m, &rep).unwrap();
        ok &= sub.identity_residual <= 1e-6;
        detail.push_str(&format!("dim {}: {:.2e} ", n + 1, sub.identity_residual));
    }
    // Order-h^2 decrease under grid halving on a non-round Einstein shot.
    let mut residuals = Vec::new();
    for points in [1001usize, 2001] {
        let shot = einstein::shoot(-0.03, 10.0, points).unwrap();
        let m = shot.metric.unwrap();
        let rep = eigenfunction::solve(&m).unwrap();
        let sub = eigenfunction::subharmonicity_check(&m, &rep).unwrap();
        residuals.push(sub.identity_residual);
    }
    let ratio = residuals[0] / residuals[1];
    ok &= ratio >= 3.0;
    detail.push_str(&format!(
        "halving: {:.2e} -> {:.2e} (ratio {ratio:.1})",
        residuals[0], residuals[1]
    ));
    verdict(5, "subharmonicity identity residual", ok, &detail);
}

#[test]
fn c06_certificate_on_nonnegative_yamabe_profiles() {
    let mut detail = String::new();
    let mut ok = true;
    for &p in &[-0.05, -0.03, -0.01, 0.0] {
        let row = einstein::sweep_row(p, 12.0, 1201).unwrap();
        let yam = row.yamabe.unwrap();
        assert_eq!(yam, YamabeSign::Positive, "schedule must stay in the positive regime");
        let cert = row.certificate.as_ref().unwrap();
        let l0 = row.lambda0.as_ref().unwrap();
        let agrees = (l0.value - 2.25).abs() <= l0.error;
        ok &= cert.certified && cert.bound >= 2.25 - 1e-6 && agrees;
        detail.push_str(&format!(
            "p={p}: certified={} lambda0={:.5}±{:.1e} ",
            cert.certified, l0.value, l0.error
        ));
    }
    verdict(6, "threshold certificate, nonnegative Yamabe", ok, &detail);
}

#[test]
fn c07_family_spectral_trend() {
    let rows = einstein::pedersen_sweep(&[-0.083, -0.05, -0.02, 0.0], 16.0, 3201).unwrap();
    let mut ok = true;
    let mut detail = String::new();
    let mut prev: Option<(f64, f64)> = None;
    for row in &rows {
        assert!(row.failures.is_empty(), "{:?}", row.failures);
        let tb = row.berger_parameter.unwrap();
        let l0 = row.lambda0.as_ref().unwrap();
        detail.push_str(&format!(
            "tB={tb:.3}: lambda0={:.4}±{:.0e} eigs={} ",
            l0.value,
            l0.error,
            row.eigenvalues_below_threshold.len()
        ));
        ok &= l0.value >= 2.0 - 1e-2;
        if let Some((pv, pe)) = prev {
            ok &= l0.value <= pv + pe + l0.error;
        }
        prev = Some((l0.value, l0.error));
        if !row.eigenvalues_below_threshold.is_empty() && row.yamabe != Some(YamabeSign::Negative)
        {
            println!(
                "[criterion 07] FINDING: eigenvalues below threshold at tB={tb} with Yamabe {:?}",
                row.yamabe
            );
            ok = false;
        }
    }
    // The deep end of the schedule must actually exercise the eigenvalue
    // clause.
    let exercised = rows
        .iter()
        .any(|r| !r.eigenvalues_below_threshold.is_empty());
    ok &= exercised;
    detail.push_str(&format!("eigenvalue clause exercised: {exercised}"));
    verdict(7, "family trend: lambda0 decreasing, >= 2", ok, &detail);
}

#[test]
fn c08_quotient_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ok = true;
    for _ in 0..20 {
        let n = rng.gen_range(2usize..=8);
        let nf = n as f64;
        let d = rng.gen_range(0.5..=1.0) * nf;
        if d <= nf / 2.0 {
            continue;
        }
        ok &= spectrum::sullivan_lambda0(n, d).unwrap() == d * (nf - d);
    }
    for _ in 0..20 {
        let n = rng.gen_range(1usize..=8);
        let nf = n as f64;
        let d = rng.gen_range(0.0..=0.5) * nf;
        ok &= spectrum::sullivan_lambda0(n, d).unwrap() == nf * nf / 4.0;
    }
    verdict(8, "limit-set formula d(n-d)", ok, "40 random draws, exact");
}

#[test]
fn c09_flow_regularity() {
    let mut ok = true;
    let mut detail = String::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let fields: Vec<(String, f64)> = std::iter::once(("x".to_string(), 1.0))
        .chain(
            [0.3, 0.5, 0.7]
                .iter()
                .map(|a| (format!("x + abs(x)^{}", 1.0 + a), *a)),
        )
        .collect();
    let mut pairs = 0usize;
    for (src, alpha) in &fields {
        let field = FlowField::new(vec!["x".into()], vec![Expr::parse(src).unwrap()]).unwrap();
        // Gronwall bound over sampled base points and separations.
        for _ in 0..5 {
            let x = rng.gen_range(0.05..0.8);
            let rep = holder_check(
                &field,
                &[x],
                &[1.0],
                &[1.0],
                &[0.05, 0.025, 0.0125, 0.00625, 0.003125],
                *alpha,
                1.0,
            )
            .unwrap();
            pairs += rep.samples.len();
            ok &= rep.max_ratio <= 1.0 + 1e-6;
        }
        // Empirical exponent of the linearized flow next to the origin,
        // where the coefficient is genuinely just Hölder.
        let rep = holder_check(
            &field,
            &[1e-12],
            &[1.0],
            &[1.0],
            &[1e-3, 3e-4, 1e-4, 3e-5, 1e-5],
            *alpha,
            1.0,
        )
        .unwrap();
        let exponent = rep.empirical_exponent;
        if *alpha < 1.0 {
            ok &= exponent >= alpha - 0.05;
            detail.push_str(&format!("alpha={alpha}: exponent {exponent:.3} "));
        }
    }
    detail.push_str(&format!("({pairs} bound pairs, worst ratio <= 1+1e-6)"));
    verdict(9, "flow Hölder bound and exponent", ok, &detail);
}

#[test]
fn c10_indicial_analysis() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut ok = true;
    for _ in 0..100 {
        let n = rng.gen_range(1usize..=8);
        let nf = n as f64;
        let kappa = rng.gen_range(-20.0..20.0);
        let roots = indicial_roots(n, kappa).unwrap();
        ok &= (roots.s_minus + roots.s_plus - nf).abs() < 1e-12;
        if roots.complex_pair {
            ok &= nf * nf + 4.0 * kappa < 0.0;
        } else {
            for s in [roots.s_minus, roots.s_plus] {
                ok &= (s * (nf - s) + kappa).abs() < 1e-9 * (1.0 + kappa.abs());
            }
        }
    }

    // Conjugated zeroth-order coefficient tends to kappa + s(n-s).
    let m = hyperbolic(3, 10.0, 2001);
    let rho = default_defining_function();
    let kappa = -2.0;
    let mut detail = String::from("quadratic x100; boundary limits: ");
    for s in [-1.0, 0.0, 1.0, 1.5] {
        let rep = conjugate(&m, &rho, s, kappa).unwrap();
        let h_end = *rep.potential.last().unwrap();
        let want = kappa + s * (3.0 - s);
        ok &= (h_end - want).abs() <= 1e-6;
        detail.push_str(&format!("s={s}: {h_end:.7} (want {want}) "));
    }
    verdict(10, "indicial roots and conjugated potential", ok, &detail);
}
