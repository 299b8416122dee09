#![allow(dead_code)]

use std::sync::Arc;

use gasnet_core::assembly::{Coefficient, CouplingMode, Discretization};
use gasnet_core::models::{Model, ModelKind, ModelParams, PipeParams};
use gasnet_core::timeloop::{Scenario, Signal};
use gasnet_core::topology::NetworkGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `v(x) = sum_i a_i sin(b_i x + c_i)` and its derivative.
#[derive(Debug, Clone)]
pub struct SmoothFn {
    pub terms: Vec<(f64, f64, f64)>,
}

impl SmoothFn {
    pub fn random(rng: &mut impl Rng) -> Self {
        let n = rng.random_range(1..=4);
        let terms = (0..n)
            .map(|_| {
                (
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-6.0..6.0),
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        Self { terms }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(a, b, c)| a * (b * x + c).sin()).sum()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(a, b, c)| a * b * (b * x + c).cos()).sum()
    }
}

pub fn constant(c: f64) -> Signal {
    Arc::new(move |_| c)
}

pub fn linear_pipes(n: usize, d: f64) -> ModelParams {
    ModelParams::uniform(
        ModelKind::Linear,
        n,
        PipeParams {
            d: Coefficient::Constant(d),
            ..PipeParams::default()
        },
    )
}

pub fn discretization(graph: NetworkGraph, h: f64, k: usize, mode: CouplingMode) -> Arc<Discretization> {
    Arc::new(Discretization::uniform(Arc::new(graph), h, k, mode).unwrap())
}

pub fn scenario(
    disc: Arc<Discretization>,
    params: ModelParams,
    boundary: Vec<(&str, Signal)>,
    final_time: f64,
    dt: f64,
) -> Scenario {
    let model = Arc::new(Model::new(disc, params).unwrap());
    let boundary = boundary.into_iter().map(|(v, s)| (v.to_string(), s)).collect();
    Scenario::new(model, boundary, final_time, dt).unwrap()
}

/// A random admissible state: continuous pressure vanishing at the
/// boundary, flux satisfying the junction balance.
pub fn random_admissible(disc: &Discretization, rng: &mut impl Rng) -> Vec<f64> {
    let map = disc.dofmap();
    let x: Vec<f64> = (0..map.n_unknowns()).map(|_| rng.random_range(-1.0..1.0)).collect();
    map.expand(&x, &|_| 0.0)
}

/// Three pipes meeting at one junction.
pub fn star3() -> NetworkGraph {
    NetworkGraph::parse("a v1 c 1.0\nb c v2 0.8\nd c v3 1.2\n").unwrap()
}
