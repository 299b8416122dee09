mod common;

use std::sync::Arc;

use gasnet_core::assembly::{CouplingMode, Discretization, SpaceTimeFn};
use gasnet_core::fem::{h1_project, EdgeMesh};
use gasnet_core::harness::{exact_error, table1_scenario, ErrorWeights};
use gasnet_core::models::{Model, ModelKind, ModelParams, PipeParams};
use gasnet_core::timeloop::{integrate, steady_state, InitialCondition, Scenario, Signal};
use gasnet_core::topology::NetworkGraph;
use proptest::prelude::*;
use rand::Rng;

const KINDS: [ModelKind; 3] = [ModelKind::Linear, ModelKind::Semilinear, ModelKind::Quasilinear];

fn model(kind: ModelKind, k: usize) -> Model {
    let disc = common::discretization(NetworkGraph::fig1(1.0), 0.5, k, CouplingMode::Monolithic);
    let pipe = PipeParams {
        area: 0.8,
        sound_speed: 1.3,
        ..PipeParams::default()
    };
    Model::new(disc, ModelParams::uniform(kind, 7, pipe)).unwrap()
}

/// Density in `[0.7, 1.3]`, flux of either sign.
fn random_state(disc: &Discretization, rng: &mut impl Rng) -> Vec<f64> {
    let mut u = vec![0.0; disc.dofmap().n_broken()];
    for lay in disc.dofmap().edges() {
        for j in 0..lay.n_nodes {
            u[lay.pressure(j)] = rng.random_range(0.7..1.3);
            u[lay.flux(j)] = rng.random_range(-0.6..0.6);
        }
    }
    u
}

/// Largest entry of `J - J_fd`, relative to the largest entry of `J`.
fn jacobian_defect(model: &Model, u: &[f64]) -> f64 {
    let jac = model.jacobian(u, 0.0).unwrap().to_dense();
    let scale = jac.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut worst = 0.0f64;
    for j in 0..u.len() {
        let eps = 1e-6 * u[j].abs().max(1.0);
        let (mut up, mut down) = (u.to_vec(), u.to_vec());
        up[j] += eps;
        down[j] -= eps;
        let rp = model.spatial_residual(&up, 0.0).unwrap();
        let rm = model.spatial_residual(&down, 0.0).unwrap();
        for (i, row) in jac.iter().enumerate() {
            let fd = (rp[i] - rm[i]) / (2.0 * eps);
            worst = worst.max((fd - row[j]).abs() / scale);
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn analytic_jacobians_match_central_differences(seed in any::<u64>(), k in 1usize..=3) {
        let mut rng = common::rng(seed);
        for kind in KINDS {
            let m = model(kind, k);
            let u = random_state(m.discretization(), &mut rng);
            let d = jacobian_defect(&m, &u);
            prop_assert!(d < 1e-6, "{kind} k={k}: {d:e}");
        }
    }

    #[test]
    fn friction_never_produces_energy(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        for kind in [ModelKind::Semilinear, ModelKind::Quasilinear] {
            let m = model(kind, 2);
            let u = random_state(m.discretization(), &mut rng);
            prop_assert!(m.friction_dissipation(&u).unwrap() >= 0.0);
        }
    }
}

/// `rho = 1 + 0.3 sin(2x + t)`, `m = 0.4 cos(3x - t)` with `A = c = 1`.
#[derive(Clone, Copy)]
struct NonlinearSolution {
    kind: ModelKind,
    beta: f64,
}

impl NonlinearSolution {
    fn rho(x: f64, t: f64) -> f64 {
        1.0 + 0.3 * (2.0 * x + t).sin()
    }
    fn rho_x(x: f64, t: f64) -> f64 {
        0.6 * (2.0 * x + t).cos()
    }
    fn rho_t(x: f64, t: f64) -> f64 {
        0.3 * (2.0 * x + t).cos()
    }
    fn m(x: f64, t: f64) -> f64 {
        0.4 * (3.0 * x - t).cos()
    }
    fn m_x(x: f64, t: f64) -> f64 {
        -1.2 * (3.0 * x - t).sin()
    }
    fn m_t(x: f64, t: f64) -> f64 {
        0.4 * (3.0 * x - t).sin()
    }

    fn g(&self, x: f64, t: f64) -> f64 {
        let (rho, m) = (Self::rho(x, t), Self::m(x, t));
        let mut g = Self::m_t(x, t) + Self::rho_x(x, t) + self.beta * m.abs() * m / rho;
        if self.kind == ModelKind::Quasilinear {
            g += 2.0 * m * Self::m_x(x, t) / rho - m * m * Self::rho_x(x, t) / (rho * rho);
        }
        g
    }

    fn error(&self, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let graph = Arc::new(NetworkGraph::single_pipe(1.0).unwrap());
        let mesh = EdgeMesh::uniform(1.0, n).unwrap();
        let disc = Arc::new(Discretization::new(graph, vec![mesh.clone()], 1, CouplingMode::Monolithic).unwrap());
        let f: SpaceTimeFn = Arc::new(|x, t| Self::rho_t(x, t) + Self::m_x(x, t));
        let this = *self;
        let g: SpaceTimeFn = Arc::new(move |x, t| this.g(x, t));
        let params = ModelParams {
            kind: self.kind,
            pipes: vec![PipeParams {
                friction_factor: 2.0 * self.beta,
                ..PipeParams::default()
            }],
            f: vec![Some(f)],
            g: vec![Some(g)],
        };
        let model = Arc::new(Model::new(disc.clone(), params).unwrap());
        let boundary: Vec<(String, Signal)> = vec![
            ("v1".into(), Arc::new(|t| Self::rho(0.0, t))),
            ("v2".into(), Arc::new(|t| Self::rho(1.0, t))),
        ];
        let mut sc = Scenario::new(model, boundary, 1.0, h / 4.0).unwrap();
        let rho0 = h1_project(&|x| Self::rho(x, 0.0), &|x| Self::rho_x(x, 0.0), &mesh, disc.basis());
        let m0 = h1_project(&|x| Self::m(x, 0.0), &|x| Self::m_x(x, 0.0), &mesh, disc.basis());
        let lay = disc.dofmap().edge(0);
        let mut broken = vec![0.0; disc.dofmap().n_broken()];
        for j in 0..lay.n_nodes {
            broken[lay.pressure(j)] = rho0[j];
            broken[lay.flux(j)] = m0[j];
        }
        sc.initial = InitialCondition::Coefficients(broken);
        let state = integrate(&sc).unwrap().final_state;
        exact_error(
            &disc,
            &state.broken,
            &|_, x| Self::rho(x, 1.0),
            &|_, x| Self::m(x, 1.0),
            &ErrorWeights::unit(1),
        )
    }
}

#[test]
fn nonlinear_models_converge_at_second_order() {
    for kind in [ModelKind::Semilinear, ModelKind::Quasilinear] {
        let sol = NonlinearSolution { kind, beta: 3.5 };
        let errors: Vec<f64> = [4, 8, 16, 32, 64].iter().map(|&n| sol.error(n)).collect();
        let eoc: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        for &r in &eoc[1..] {
            assert!((r - 2.0).abs() < 0.15, "{kind}: {eoc:?}");
        }
    }
}

#[test]
fn nonlinear_steady_states_have_constant_edge_fluxes() {
    let graph = Arc::new(NetworkGraph::fig1(1.0));
    let beta = 3.5;
    for kind in [ModelKind::Semilinear, ModelKind::Quasilinear] {
        let disc = Arc::new(Discretization::uniform(graph.clone(), 0.05, 3, CouplingMode::Monolithic).unwrap());
        let model = Arc::new(Model::new(disc.clone(), ModelParams::uniform(kind, 7, PipeParams::default())).unwrap());
        let sc = Scenario::new(
            model,
            vec![("v1".into(), common::constant(1.2)), ("v6".into(), common::constant(1.0))],
            1.0,
            0.1,
        )
        .unwrap();
        let s = steady_state(&sc, 0.0).unwrap();
        let map = disc.dofmap();
        let mut end_flux = vec![0.0; 7];
        for (e, lay) in map.edges().iter().enumerate() {
            let m0 = s.broken[lay.flux(0)];
            for j in 0..lay.n_nodes {
                assert!((s.broken[lay.flux(j)] - m0).abs() < 1e-10, "{kind} edge {e}");
            }
            end_flux[e] = m0;
            if kind == ModelKind::Semilinear {
                // rho^2 drops linearly: rho(0)^2 - rho(L)^2 = 2 beta |m| m L
                let (r0, r1) = (s.broken[lay.pressure(0)], s.broken[lay.pressure(lay.n_nodes - 1)]);
                let drop = r0 * r0 - r1 * r1;
                let expected = 2.0 * beta * m0.abs() * m0 * graph.edge(e).length;
                assert!((drop - expected).abs() < 1e-6, "edge {e}: {drop} vs {expected}");
            }
        }
        for &v in graph.interior_vertices() {
            let net: f64 = graph.incident_edges(v).iter().map(|&(e, s)| s.value() * end_flux[e]).sum();
            assert!(net.abs() < 1e-10, "{kind} junction {}", graph.vertex_name(v));
        }
        assert!(end_flux[0] > 0.01, "flow goes from high to low pressure");
    }
}

#[test]
fn semilinear_fig1_run_matches_the_linear_mean_flux() {
    let mean_flux = |kind| {
        let sc = table1_scenario(kind, 0.1, 1, CouplingMode::Monolithic).unwrap();
        let traj = integrate(&sc).unwrap();
        assert_eq!(*traj.times.last().unwrap(), 10.0);
        traj.boundary_flux.iter().map(|row| row[0].abs()).sum::<f64>() / traj.boundary_flux.len() as f64
    };
    let (lin, semi) = (mean_flux(ModelKind::Linear), mean_flux(ModelKind::Semilinear));
    assert!(lin > 0.0 && semi > 0.0);
    let ratio = semi / lin;
    assert!((0.5..2.0).contains(&ratio), "linear {lin}, semilinear {semi}");
}
