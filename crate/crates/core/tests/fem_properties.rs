mod common;

use gasnet_core::fem::{
    derivative_coefficients, eval_test, eval_trial, gauss_rule, h1_project, l2_project, BasisSpec, EdgeMesh,
};
use proptest::prelude::*;

fn mesh_strategy() -> impl Strategy<Value = EdgeMesh> {
    prop::collection::vec(0.2f64..1.0, 1..8).prop_map(|widths| {
        let mut x = vec![0.0];
        for w in widths {
            x.push(x.last().unwrap() + w);
        }
        EdgeMesh::new(x).unwrap()
    })
}

fn smooth_strategy() -> impl Strategy<Value = common::SmoothFn> {
    prop::collection::vec((-2.0f64..2.0, -6.0f64..6.0, 0.0f64..6.3), 1..4)
        .prop_map(|terms| common::SmoothFn { terms })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_of_interpolant_is_projected_derivative(
        v in smooth_strategy(), mesh in mesh_strategy(), k in 1usize..=4
    ) {
        let basis = BasisSpec::new(k).unwrap();
        let lhs = derivative_coefficients(&h1_project(&|x| v.value(x), &|x| v.derivative(x), &mesh, &basis), &mesh, &basis);
        let rhs = l2_project(&|x| v.derivative(x), &mesh, &basis);
        let scale = rhs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert!((a - b).abs() <= 1e-12 * scale, "{} vs {}", a, b);
        }
    }

    #[test]
    fn interpolant_matches_at_breakpoints(v in smooth_strategy(), mesh in mesh_strategy(), k in 1usize..=4) {
        let basis = BasisSpec::new(k).unwrap();
        let c = h1_project(&|x| v.value(x), &|x| v.derivative(x), &mesh, &basis);
        for (n, &x) in mesh.breakpoints().iter().enumerate() {
            prop_assert!((c[n * k] - v.value(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn l2_projection_residual_is_orthogonal(v in smooth_strategy(), mesh in mesh_strategy(), k in 1usize..=4) {
        let basis = BasisSpec::new(k).unwrap();
        let c = l2_project(&|x| v.value(x), &mesh, &basis);
        let rule = gauss_rule(k + 12);
        for n in 0..mesh.num_elements() {
            let (a, b) = mesh.element(n);
            for i in 0..k {
                let r = rule.integrate_on(a, b, |x| {
                    let xi = 2.0 * (x - a) / (b - a) - 1.0;
                    (v.value(x) - eval_test(&c, &mesh, &basis, x)) * basis.test_values(xi)[i]
                });
                prop_assert!(r.abs() < 1e-10, "element {} mode {}: {}", n, i, r);
            }
        }
    }

    #[test]
    fn projections_reproduce_their_spaces(mesh in mesh_strategy(), k in 1usize..=4, coef in prop::collection::vec(-1.0f64..1.0, 5)) {
        // a global polynomial of degree k lies in the trial space
        let p = |x: f64| coef.iter().take(k + 1).enumerate().map(|(i, c)| c * x.powi(i as i32)).sum::<f64>();
        let dp = |x: f64| coef.iter().take(k + 1).enumerate().skip(1).map(|(i, c)| i as f64 * c * x.powi(i as i32 - 1)).sum::<f64>();
        let basis = BasisSpec::new(k).unwrap();
        let c = h1_project(&p, &dp, &mesh, &basis);
        let len = mesh.length();
        for s in 0..=10 {
            let x = len * s as f64 / 10.0;
            prop_assert!((eval_trial(&c, &mesh, &basis, x) - p(x)).abs() < 1e-10);
        }
    }
}
