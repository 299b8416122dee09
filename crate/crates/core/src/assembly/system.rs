//! Petrov-Galerkin operators of the linear model
//!
//! ```text
//!   (a dt p_h, q~) + (dx m_h, q~)                 = (f, q~)
//!   (b dt m_h, v~) + (dx p_h, v~) + (d pi m_h, v~) = (g, v~)
//! ```
//!
//! with continuous trial functions of degree `k` and discontinuous test
//! functions of degree `k - 1`. The friction term acts on the `L^2`
//! projection of the flux, which makes it a mass-type term on the test space.

use std::fmt;
use std::sync::Arc;

use super::discretization::Discretization;
use crate::error::{Error, Result};
use crate::fem::EdgeMesh;
use crate::sparse::{dot, norm2, CsrMatrix, TripletBuilder};

pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A spatially varying coefficient on one edge.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    Function(SpaceFn),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(c: f64) -> Self {
        Coefficient::Constant(c)
    }
}

impl Coefficient {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Function(Arc::new(f))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Function(f) => f(x),
        }
    }

    /// Elementwise mean values `pi_h^0 d` on the given mesh.
    pub fn elementwise_mean(&self, mesh: &EdgeMesh) -> Coefficient {
        match self {
            Coefficient::Constant(c) => Coefficient::Constant(*c),
            Coefficient::Function(f) => {
                let rule = crate::fem::gauss_rule(8);
                let means: Vec<f64> = (0..mesh.num_elements())
                    .map(|n| {
                        let (a, b) = mesh.element(n);
                        rule.integrate_on(a, b, |x| f(x)) / (b - a)
                    })
                    .collect();
                let mesh = mesh.clone();
                Coefficient::function(move |x| means[mesh.locate(x).0])
            }
        }
    }
}

/// Parameters of the linear model on one pipe.
#[derive(Debug, Clone)]
pub struct LinearCoefficients {
    pub a: f64,
    pub b: f64,
    pub d: Coefficient,
}

impl LinearCoefficients {
    pub fn new(a: f64, b: f64, d: impl Into<Coefficient>) -> Self {
        Self { a, b, d: d.into() }
    }
}

/// Weights of the linear part of a model on one edge.
#[derive(Debug, Clone)]
pub(crate) struct OperatorWeights {
    pub mass_pressure: f64,
    pub mass_flux: f64,
    /// Factor in front of `(dx p, v~)`.
    pub pressure_gradient: f64,
    pub friction: Coefficient,
}

/// Assembled operators; all act on broken trial coefficients and produce
/// test-space vectors.
#[derive(Debug, Clone)]
pub struct SemidiscreteSystem {
    /// `(a q_h, q~)` and `(b v_h, v~)`.
    pub mass: CsrMatrix,
    /// `(dx q_h, v~)`, unweighted.
    pub pressure_gradient: CsrMatrix,
    /// `(dx v_h, q~)`, unweighted.
    pub flux_gradient: CsrMatrix,
    /// `(d pi v_h, v~)`.
    pub friction: CsrMatrix,
    /// Weighted sum of the gradient and friction blocks.
    pub stiffness: CsrMatrix,
}

impl SemidiscreteSystem {
    /// Assembles the linear model with per-edge coefficients.
    pub fn assemble(disc: &Discretization, params: &[LinearCoefficients]) -> Result<Self> {
        for p in params {
            if !(p.a > 0.0) {
                return Err(Error::NonpositiveCoefficient { name: "a", value: p.a });
            }
            if !(p.b > 0.0) {
                return Err(Error::NonpositiveCoefficient { name: "b", value: p.b });
            }
        }
        let weights: Vec<OperatorWeights> = params
            .iter()
            .map(|p| OperatorWeights {
                mass_pressure: p.a,
                mass_flux: p.b,
                pressure_gradient: 1.0,
                friction: p.d.clone(),
            })
            .collect();
        Self::assemble_weighted(disc, &weights)
    }

    pub(crate) fn assemble_weighted(disc: &Discretization, weights: &[OperatorWeights]) -> Result<Self> {
        let graph = disc.graph();
        if weights.len() != graph.num_edges() {
            return Err(Error::InvalidScenario(format!(
                "{} parameter sets for {} edges",
                weights.len(),
                graph.num_edges()
            )));
        }
        let map = disc.dofmap();
        let t = disc.tables();
        let k = disc.degree();
        let (rows, cols) = (map.n_test(), map.n_broken());
        let mut mass = TripletBuilder::new(rows, cols);
        let mut bp = TripletBuilder::new(rows, cols);
        let mut bm = TripletBuilder::new(rows, cols);
        let mut fr = TripletBuilder::new(rows, cols);
        let mut stiff = TripletBuilder::new(rows, cols);

        for (e, lay) in map.edges().iter().enumerate() {
            let w = &weights[e];
            let mesh = disc.mesh(e);
            for n in 0..lay.n_elements {
                let h = mesh.element_size(n);
                let dq: Vec<f64> = t
                    .rule
                    .points
                    .iter()
                    .map(|&xi| w.friction.eval(mesh.map(n, xi)))
                    .collect();
                if let Some(&neg) = dq.iter().find(|&&d| d < 0.0 || !d.is_finite()) {
                    return Err(Error::NegativeFriction {
                        edge: graph.edge(e).id.clone(),
                        value: neg,
                    });
                }
                for i in 0..k {
                    let rp = lay.pressure_test(n * k + i);
                    let rm = lay.flux_test(n * k + i);
                    for j in 0..=k {
                        let cp = lay.pressure(n * k + j);
                        let cm = lay.flux(n * k + j);
                        let m = 0.5 * h * t.mass[i][j];
                        mass.push(rp, cp, w.mass_pressure * m);
                        mass.push(rm, cm, w.mass_flux * m);
                        let g = t.grad[i][j];
                        bm.push(rp, cm, g);
                        bp.push(rm, cp, g);
                        stiff.push(rp, cm, g);
                        stiff.push(rm, cp, w.pressure_gradient * g);
                        let f: f64 = (0..t.num_points())
                            .map(|q| t.rule.weights[q] * dq[q] * t.proj_at[q][j] * t.test[q][i])
                            .sum::<f64>()
                            * 0.5
                            * h;
                        fr.push(rm, cm, f);
                        stiff.push(rm, cm, f);
                    }
                }
            }
        }
        Ok(Self {
            mass: mass.into_csr(),
            pressure_gradient: bp.into_csr(),
            flux_gradient: bm.into_csr(),
            friction: fr.into_csr(),
            stiffness: stiff.into_csr(),
        })
    }
}

/// Load vector `((f, q~), (g, v~))` at time `t`, by `k + 2` point quadrature.
pub fn assemble_load(
    disc: &Discretization,
    f: &[Option<SpaceTimeFn>],
    g: &[Option<SpaceTimeFn>],
    t: f64,
) -> Vec<f64> {
    let map = disc.dofmap();
    let tab = disc.tables();
    let k = disc.degree();
    let mut out = vec![0.0; map.n_test()];
    for (e, lay) in map.edges().iter().enumerate() {
        let mesh = disc.mesh(e);
        for (src, is_flux) in [(f.get(e), false), (g.get(e), true)] {
            let Some(Some(src)) = src else { continue };
            for n in 0..lay.n_elements {
                let half = 0.5 * mesh.element_size(n);
                for q in 0..tab.num_points() {
                    let val = tab.rule.weights[q] * half * src(mesh.map(n, tab.rule.points[q]), t);
                    for i in 0..k {
                        let row = if is_flux {
                            lay.flux_test(n * k + i)
                        } else {
                            lay.pressure_test(n * k + i)
                        };
                        out[row] += val * tab.test[q][i];
                    }
                }
            }
        }
    }
    out
}

/// Value of `(dx m_h, pi p_h) + (dx p_h, pi m_h)` and a Cauchy-Schwarz bound
/// of its two terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntisymmetryDefect {
    pub value: f64,
    pub scale: f64,
}

impl AntisymmetryDefect {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.value.abs()
        } else {
            self.value.abs() / self.scale
        }
    }
}

/// Evaluates the anti-symmetry defect of a broken coefficient vector. It
/// vanishes when the pressure is continuous with zero boundary values and
/// the flux satisfies the junction balance.
pub fn antisymmetry_defect(
    disc: &Discretization,
    system: &SemidiscreteSystem,
    broken: &[f64],
) -> AntisymmetryDefect {
    let proj = disc.project_broken(broken);
    let dm = system.flux_gradient.mul_vec(broken);
    let dp = system.pressure_gradient.mul_vec(broken);
    let map = disc.dofmap();
    let mut pi_p = vec![0.0; map.n_test()];
    let mut pi_m = vec![0.0; map.n_test()];
    for lay in map.edges() {
        for i in 0..lay.n_tests() {
            pi_p[lay.pressure_test(i)] = proj[lay.pressure_test(i)];
            pi_m[lay.flux_test(i)] = proj[lay.flux_test(i)];
        }
    }
    let t1 = dot(&pi_p, &dm);
    let t2 = dot(&pi_m, &dp);
    AntisymmetryDefect {
        value: t1 + t2,
        scale: norm2(&pi_p) * norm2(&dm) + norm2(&pi_m) * norm2(&dp),
    }
}
