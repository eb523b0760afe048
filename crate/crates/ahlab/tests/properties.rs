use std::sync::OnceLock;

use proptest::prelude::*;

use ahlab::expr::Expr;
use ahlab::gauge_flow::{flow_map, FlowField};
use ahlab::geometry::{
    boundary_scalar, make_hyperbolic, yamabe_sign, HomogeneousBoundaryMetric, WarpedMetric,
};
use ahlab::grid::RadialGrid;
use ahlab::indicial::{admissible, indicial_roots};
use ahlab::spectrum::sullivan_exponent;
use ahlab::{eigenfunction, spectrum};

fn h4() -> &'static (WarpedMetric, eigenfunction::EigenfunctionReport) {
    static CELL: OnceLock<(WarpedMetric, eigenfunction::EigenfunctionReport)> = OnceLock::new();
    CELL.get_or_init(|| {
        let m = make_hyperbolic(3, RadialGrid::uniform(0.0, 10.0, 1001).unwrap()).unwrap();
        let rep = eigenfunction::solve(&m).unwrap();
        (m, rep)
    })
}

proptest! {
    // R^ is (-1)-homogeneous in the metric coefficients; its sign is scale
    // invariant.
    #[test]
    fn boundary_scalar_homogeneity(
        h1 in 0.1f64..10.0, h2 in 0.1f64..10.0, h3 in 0.1f64..10.0,
        c in 0.1f64..10.0,
    ) {
        let base = HomogeneousBoundaryMetric {
            coefficients: vec![h1, h2, h3],
            structure: HomogeneousBoundaryMetric::berger(1.0).unwrap().structure,
        };
        let scaled = HomogeneousBoundaryMetric {
            coefficients: vec![c * h1, c * h2, c * h3],
            structure: base.structure.clone(),
        };
        let r = boundary_scalar(&base).unwrap();
        let rs = boundary_scalar(&scaled).unwrap();
        prop_assert!((rs - r / c).abs() <= 1e-9 * r.abs().max(1.0) / c);
        prop_assert_eq!(yamabe_sign(&base).unwrap(), yamabe_sign(&scaled).unwrap());
    }

    #[test]
    fn round_boundary_scalar_homogeneity(dim in 2usize..7, coeff in 0.1f64..10.0, c in 0.1f64..10.0) {
        let base = HomogeneousBoundaryMetric::round(dim, coeff).unwrap();
        let scaled = HomogeneousBoundaryMetric::round(dim, c * coeff).unwrap();
        let r = boundary_scalar(&base).unwrap();
        let rs = boundary_scalar(&scaled).unwrap();
        prop_assert!((rs - r / c).abs() <= 1e-9 * r / c);
    }

    // Roots of s(n-s) + kappa = 0: they sum to n, satisfy the quadratic, and
    // bracket exactly the admissible exponents.
    #[test]
    fn indicial_root_structure(n in 1usize..9, kappa in -30.0f64..30.0) {
        let roots = indicial_roots(n, kappa).unwrap();
        let nf = n as f64;
        prop_assert!((roots.s_minus + roots.s_plus - nf).abs() < 1e-12);
        if !roots.complex_pair {
            for s in [roots.s_minus, roots.s_plus] {
                prop_assert!((s * (nf - s) + kappa).abs() < 1e-9 * (1.0 + kappa.abs()));
            }
            let mid = nf / 2.0;
            if roots.s_plus - roots.s_minus > 1e-6 {
                prop_assert!(admissible(n, kappa, mid));
            }
            // The root itself sits exactly on the admissibility boundary;
            // test strictly outside to stay clear of rounding.
            let margin = 1e-6 * (1.0 + roots.s_plus.abs());
            prop_assert!(!admissible(n, kappa, roots.s_plus + margin));
            prop_assert!(!admissible(n, kappa, roots.s_minus - margin));
        }
    }

    // d(n-d) is symmetric about n/2 and 1-Lipschitz-ish (slope bounded by n).
    #[test]
    fn sullivan_symmetry_and_continuity(n in 1usize..9, d1 in 0.0f64..1.0, d2 in 0.0f64..1.0) {
        let nf = n as f64;
        let (a, b) = (d1 * nf, d2 * nf);
        let fa = sullivan_exponent(n, a).unwrap();
        prop_assert!((fa - sullivan_exponent(n, nf - a).unwrap()).abs() < 1e-9);
        let fb = sullivan_exponent(n, b).unwrap();
        prop_assert!((fa - fb).abs() <= nf * (a - b).abs() + 1e-9);
        prop_assert!(fa <= nf * nf / 4.0 + 1e-12);
    }

    // Flow group law: Phi_{t+s} = Phi_t after Phi_s.
    #[test]
    fn flow_group_law(
        x in -1.0f64..1.0, y in -1.0f64..1.0,
        t1 in 0.05f64..1.0, t2 in 0.05f64..1.0,
    ) {
        static FIELD: OnceLock<FlowField> = OnceLock::new();
        let field = FIELD.get_or_init(|| FlowField::new(
            vec!["x".into(), "y".into()],
            vec![
                Expr::parse("-y + 0.1*x*(1 - x*x - y*y)").unwrap(),
                Expr::parse("x + 0.1*y*(1 - x*x - y*y)").unwrap(),
            ],
        ).unwrap());
        let whole = flow_map(field, &[x, y], t1 + t2, None).unwrap();
        let first = flow_map(field, &[x, y], t1, None).unwrap();
        let second = flow_map(field, &first.path.last().unwrap().1, t2, None).unwrap();
        let a = &whole.path.last().unwrap().1;
        let b = &second.path.last().unwrap().1;
        prop_assert!((a[0] - b[0]).abs() < 1e-7 && (a[1] - b[1]).abs() < 1e-7,
            "group law defect {:?} vs {:?}", a, b);
    }

    // On a metric with sup |du|^2/u^2 <= 1 the certificate succeeds for any
    // admissible weight, and the certified bound peaks at s = n/2.
    #[test]
    fn certificate_envelope(s in 0.01f64..1.5) {
        let (m, rep) = h4();
        let cert = eigenfunction::certificate(m, rep, s, 1e-6).unwrap();
        prop_assert!(cert.certified, "s = {s}: {cert:?}");
        prop_assert!(cert.bound <= 2.25 + 1e-12);
        let at_half = eigenfunction::certificate(m, rep, 1.5, 1e-6).unwrap();
        prop_assert!(at_half.bound >= cert.bound);
    }

    // The essential threshold dominates every Dirichlet-quotient estimate
    // scale: lambda0 of hyperbolic space is invariant under grid refinement
    // policy (uniform vs graded) within error bars.
    #[test]
    fn threshold_is_quarter_n_squared(n in 1usize..7) {
        let nf = n as f64;
        prop_assert_eq!(spectrum::essential_threshold(n), nf * nf / 4.0);
    }
}
