//! Residuals and Jacobians of the three gas transport models.
//!
//! All models share the Petrov-Galerkin skeleton of [`SemidiscreteSystem`].
//! The linear model works with pressure `p` and flux `m`. The nonlinear
//! models use density `rho` and flux `m`, with `p = c^2 rho`:
//!
//! ```text
//!   (A dt rho, q~) + (dx m, q~)                                        = (f, q~)
//!   (dt m, v~) + (A c^2 dx rho, v~) [+ (dx(m^2/(A rho)), v~)]
//!              + (lambda/(2D) |m|/(A rho) pi m, v~)                    = (g, v~)
//! ```
//!
//! The bracketed convective term is present only in the quasilinear model.
//! Nonlinear terms are integrated with the `k + 2` point Gauss rule.

use std::sync::Arc;

use crate::assembly::{
    assemble_load, Coefficient, Discretization, HiddenConstraints, LinearCoefficients,
    OperatorWeights, SemidiscreteSystem, SpaceTimeFn,
};
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, TripletBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Linear,
    Semilinear,
    Quasilinear,
}

impl ModelKind {
    pub fn is_nonlinear(self) -> bool {
        self != ModelKind::Linear
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Semilinear => "semilinear",
            ModelKind::Quasilinear => "quasilinear",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "linear" => Ok(ModelKind::Linear),
            "semilinear" => Ok(ModelKind::Semilinear),
            "quasilinear" => Ok(ModelKind::Quasilinear),
            other => Err(format!("unknown model `{other}`")),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Isothermal pressure law `p = c^2 rho`.
pub fn pressure_law(sound_speed: f64, density: f64) -> Result<f64> {
    if !(density > 0.0) {
        return Err(Error::NonpositiveDensity(density));
    }
    Ok(sound_speed * sound_speed * density)
}

/// Inverse of [`pressure_law`].
pub fn density_from_pressure(sound_speed: f64, pressure: f64) -> f64 {
    pressure / (sound_speed * sound_speed)
}

/// Friction coefficient `lambda/(2D) |m| / (A rho)` that turns the
/// semilinear friction law into the linear one at a given state.
pub fn linearized_friction(friction_rate: f64, area: f64, flux: f64, density: f64) -> f64 {
    friction_rate * flux.abs() / (area * density)
}

/// Physical parameters of one pipe. The linear model reads `a`, `b`, `d`;
/// the nonlinear ones read the cross section, diameter, friction factor
/// and speed of sound.
#[derive(Debug, Clone)]
pub struct PipeParams {
    pub a: f64,
    pub b: f64,
    pub d: Coefficient,
    pub area: f64,
    pub diameter: f64,
    pub friction_factor: f64,
    pub sound_speed: f64,
}

impl Default for PipeParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            d: Coefficient::Constant(1.0),
            area: 1.0,
            diameter: 1.0,
            friction_factor: 7.0,
            sound_speed: 1.0,
        }
    }
}

impl PipeParams {
    /// `lambda / (2 D)`
    pub fn friction_rate(&self) -> f64 {
        self.friction_factor / (2.0 * self.diameter)
    }

    fn validate_nonlinear(&self) -> Result<()> {
        for (name, value) in [
            ("A", self.area),
            ("D", self.diameter),
            ("lambda", self.friction_factor),
            ("c", self.sound_speed),
        ] {
            if !(value > 0.0) {
                return Err(Error::NonpositiveCoefficient { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Clone)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub pipes: Vec<PipeParams>,
    /// Source of the mass balance, per edge, as `f(x, t)`.
    pub f: Vec<Option<SpaceTimeFn>>,
    /// Source of the momentum balance, per edge, as `g(x, t)`.
    pub g: Vec<Option<SpaceTimeFn>>,
}

impl std::fmt::Debug for ModelParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelParams")
            .field("kind", &self.kind)
            .field("pipes", &self.pipes)
            .field("f", &self.f.iter().map(Option::is_some).collect::<Vec<_>>())
            .field("g", &self.g.iter().map(Option::is_some).collect::<Vec<_>>())
            .finish()
    }
}

impl ModelParams {
    /// The same parameters on every one of `n_edges` pipes, no sources.
    pub fn uniform(kind: ModelKind, n_edges: usize, pipe: PipeParams) -> Self {
        Self {
            kind,
            pipes: vec![pipe; n_edges],
            f: vec![None; n_edges],
            g: vec![None; n_edges],
        }
    }
}

/// A model bound to a discretization.
#[derive(Debug, Clone)]
pub struct Model {
    disc: Arc<Discretization>,
    params: ModelParams,
    linear: SemidiscreteSystem,
    hidden: HiddenConstraints,
    has_sources: bool,
}

impl Model {
    pub fn new(disc: Arc<Discretization>, params: ModelParams) -> Result<Self> {
        let n = disc.graph().num_edges();
        if params.pipes.len() != n {
            return Err(Error::InvalidScenario(format!(
                "{} pipe parameter sets for {} edges",
                params.pipes.len(),
                n
            )));
        }
        let linear = match params.kind {
            ModelKind::Linear => {
                let coeffs: Vec<LinearCoefficients> = params
                    .pipes
                    .iter()
                    .map(|p| LinearCoefficients::new(p.a, p.b, p.d.clone()))
                    .collect();
                SemidiscreteSystem::assemble(&disc, &coeffs)?
            }
            ModelKind::Semilinear | ModelKind::Quasilinear => {
                let weights = params
                    .pipes
                    .iter()
                    .map(|p| {
                        p.validate_nonlinear()?;
                        Ok(OperatorWeights {
                            mass_pressure: p.area,
                            mass_flux: 1.0,
                            pressure_gradient: p.area * p.sound_speed * p.sound_speed,
                            friction: Coefficient::Constant(0.0),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                SemidiscreteSystem::assemble_weighted(&disc, &weights)?
            }
        };
        let has_sources = params.f.iter().chain(&params.g).any(Option::is_some);
        let hidden = HiddenConstraints::new(&disc, &linear.mass, &linear.stiffness);
        Ok(Self {
            disc,
            params,
            linear,
            hidden,
            has_sources,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn discretization(&self) -> &Arc<Discretization> {
        &self.disc
    }

    /// Constant operator in front of the time derivative.
    pub fn mass(&self) -> &CsrMatrix {
        &self.linear.mass
    }

    /// Algebraic combinations of the pressure (density) equations.
    pub fn hidden_constraints(&self) -> &HiddenConstraints {
        &self.hidden
    }

    /// Linear part of the spatial operator.
    pub fn linear_system(&self) -> &SemidiscreteSystem {
        &self.linear
    }

    pub fn has_sources(&self) -> bool {
        self.has_sources
    }

    /// Load vector at time `t`.
    pub fn load(&self, t: f64) -> Vec<f64> {
        if self.has_sources {
            assemble_load(&self.disc, &self.params.f, &self.params.g, t)
        } else {
            vec![0.0; self.disc.dofmap().n_test()]
        }
    }

    /// Value of the state variable (pressure or density) at a boundary
    /// vertex with prescribed pressure, on edge `e`.
    pub fn boundary_state(&self, e: usize, pressure: f64) -> f64 {
        match self.params.kind {
            ModelKind::Linear => pressure,
            _ => density_from_pressure(self.params.pipes[e].sound_speed, pressure),
        }
    }

    /// Pressure represented by a state value on edge `e`.
    pub fn pressure_of_state(&self, e: usize, state: f64) -> f64 {
        match self.params.kind {
            ModelKind::Linear => state,
            _ => {
                let c = self.params.pipes[e].sound_speed;
                c * c * state
            }
        }
    }

    /// Spatial residual `S(U) - F(t)` on broken coefficients.
    pub fn spatial_residual(&self, state: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut r = self.linear.stiffness.mul_vec(state);
        if self.params.kind.is_nonlinear() {
            self.nonlinear_terms(state, Some(&mut r), None)?;
        }
        if self.has_sources {
            for (ri, fi) in r.iter_mut().zip(self.load(t)) {
                *ri -= fi;
            }
        }
        Ok(r)
    }

    /// Full residual `M rate + S(U) - F(t)`.
    pub fn residual(&self, state: &[f64], rate: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut r = self.spatial_residual(state, t)?;
        self.linear.mass.mul_vec_acc(rate, 1.0, &mut r);
        Ok(r)
    }

    /// Derivative of [`spatial_residual`](Self::spatial_residual) with
    /// respect to the broken coefficients. `|m|` is differentiated as
    /// `sign(m)` with `sign(0) = 0`.
    pub fn jacobian(&self, state: &[f64], _t: f64) -> Result<CsrMatrix> {
        if !self.params.kind.is_nonlinear() {
            return Ok(self.linear.stiffness.clone());
        }
        let map = self.disc.dofmap();
        let mut out = TripletBuilder::with_capacity(
            map.n_test(),
            map.n_broken(),
            self.linear.stiffness.nnz() * 3,
        );
        self.linear.stiffness.push_into(1.0, &mut out);
        self.nonlinear_terms(state, None, Some(&mut out))?;
        Ok(out.into_csr())
    }

    /// Discrete friction work `sum_q w_q lambda/(2D) |m| (pi m)^2 / (A rho)`,
    /// nonnegative for any state with positive density.
    pub fn friction_dissipation(&self, state: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        self.for_each_point(state, |_, _, pt| {
            total += pt.weight * pt.beta * pt.m.abs() * pt.pm * pt.pm / (pt.area * pt.rho);
        })?;
        Ok(total)
    }

    fn for_each_point(
        &self,
        state: &[f64],
        mut visit: impl FnMut(usize, usize, &QuadPoint),
    ) -> Result<()> {
        let t = self.disc.tables();
        let k = self.disc.degree();
        for (e, lay) in self.disc.dofmap().edges().iter().enumerate() {
            let pipe = &self.params.pipes[e];
            let mesh = self.disc.mesh(e);
            for n in 0..lay.n_elements {
                let h = mesh.element_size(n);
                for q in 0..t.num_points() {
                    let mut pt = QuadPoint {
                        weight: 0.5 * h * t.rule.weights[q],
                        beta: pipe.friction_rate(),
                        area: pipe.area,
                        ..Default::default()
                    };
                    for j in 0..=k {
                        let rho_j = state[lay.pressure(n * k + j)];
                        let m_j = state[lay.flux(n * k + j)];
                        pt.rho += rho_j * t.trial[q][j];
                        pt.rho_x += rho_j * t.dtrial[q][j];
                        pt.m += m_j * t.trial[q][j];
                        pt.m_x += m_j * t.dtrial[q][j];
                        pt.pm += m_j * t.proj_at[q][j];
                    }
                    pt.rho_x *= 2.0 / h;
                    pt.m_x *= 2.0 / h;
                    if !(pt.rho > 0.0) {
                        return Err(Error::VacuumState {
                            edge: self.disc.graph().edge(e).id.clone(),
                            x: mesh.map(n, t.rule.points[q]),
                            density: pt.rho,
                        });
                    }
                    visit(e, n * t.num_points() + q, &pt);
                }
            }
        }
        Ok(())
    }

    fn nonlinear_terms(
        &self,
        state: &[f64],
        mut residual: Option<&mut Vec<f64>>,
        mut jacobian: Option<&mut TripletBuilder>,
    ) -> Result<()> {
        let t = self.disc.tables();
        let k = self.disc.degree();
        let nq = t.num_points();
        let quasi = self.params.kind == ModelKind::Quasilinear;
        let map = self.disc.dofmap();
        let mut jm = vec![0.0; k + 1];
        let mut jr = vec![0.0; k + 1];
        self.for_each_point(state, |e, idx, pt| {
            let lay = map.edge(e);
            let (n, q) = (idx / nq, idx % nq);
            let h = self.disc.mesh(e).element_size(n);
            let arho = pt.area * pt.rho;
            let mut value = pt.beta * pt.m.abs() * pt.pm / arho;
            if quasi {
                value += 2.0 * pt.m * pt.m_x / arho - pt.m * pt.m * pt.rho_x / (arho * pt.rho);
            }
            if let Some(r) = residual.as_deref_mut() {
                for i in 0..k {
                    r[lay.flux_test(n * k + i)] += pt.weight * value * t.test[q][i];
                }
            }
            if let Some(jac) = jacobian.as_deref_mut() {
                let sgn = if pt.m > 0.0 {
                    1.0
                } else if pt.m < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                for j in 0..=k {
                    let phi = t.trial[q][j];
                    let dphi = t.dtrial[q][j] * 2.0 / h;
                    jm[j] = pt.beta / arho * (sgn * phi * pt.pm + pt.m.abs() * t.proj_at[q][j]);
                    jr[j] = -pt.beta * pt.m.abs() * pt.pm * phi / (arho * pt.rho);
                    if quasi {
                        jm[j] += 2.0 * phi * pt.m_x / arho + 2.0 * pt.m * dphi / arho
                            - 2.0 * pt.m * phi * pt.rho_x / (arho * pt.rho);
                        jr[j] += -2.0 * pt.m * pt.m_x * phi / (arho * pt.rho)
                            - pt.m * pt.m * dphi / (arho * pt.rho)
                            + 2.0 * pt.m * pt.m * pt.rho_x * phi / (arho * pt.rho * pt.rho);
                    }
                }
                for i in 0..k {
                    let row = lay.flux_test(n * k + i);
                    let w = pt.weight * t.test[q][i];
                    for j in 0..=k {
                        jac.push(row, lay.flux(n * k + j), w * jm[j]);
                        jac.push(row, lay.pressure(n * k + j), w * jr[j]);
                    }
                }
            }
        })
    }
}

/// Field values at one quadrature point.
#[derive(Debug, Default)]
struct QuadPoint {
    weight: f64,
    beta: f64,
    area: f64,
    rho: f64,
    rho_x: f64,
    m: f64,
    m_x: f64,
    /// `pi_h^{k-1} m`
    pm: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::CouplingMode;
    use crate::fem::EdgeMesh;
    use crate::topology::NetworkGraph;

    fn disc(n: usize, k: usize) -> Arc<Discretization> {
        let g = Arc::new(NetworkGraph::single_pipe(1.0).unwrap());
        Arc::new(
            Discretization::new(g, vec![EdgeMesh::uniform(1.0, n).unwrap()], k, CouplingMode::Monolithic)
                .unwrap(),
        )
    }

    #[test]
    fn pressure_law_values() {
        assert_eq!(pressure_law(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(pressure_law(2.0, 3.0).unwrap(), 12.0);
        let rho = 0.731;
        assert_eq!(density_from_pressure(2.0, pressure_law(2.0, rho).unwrap()), rho);
        assert_eq!(pressure_law(1.0, 0.0), Err(Error::NonpositiveDensity(0.0)));
    }

    #[test]
    fn zero_state_has_zero_linear_residual() {
        let d = disc(4, 2);
        let m = Model::new(d.clone(), ModelParams::uniform(ModelKind::Linear, 1, PipeParams::default())).unwrap();
        let z = vec![0.0; d.dofmap().n_broken()];
        assert!(m.residual(&z, &z, 0.3).unwrap().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn semilinear_at_rest_has_no_friction() {
        let d = disc(3, 2);
        let m = Model::new(d.clone(), ModelParams::uniform(ModelKind::Semilinear, 1, PipeParams::default())).unwrap();
        let lay = *d.dofmap().edge(0);
        let mut u = vec![0.0; d.dofmap().n_broken()];
        for j in 0..lay.n_nodes {
            u[lay.pressure(j)] = 1.0;
        }
        let r = m.spatial_residual(&u, 0.0).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-15));
        assert_eq!(m.friction_dissipation(&u).unwrap(), 0.0);
    }

    #[test]
    fn vacuum_is_reported() {
        let d = disc(3, 1);
        let m = Model::new(d.clone(), ModelParams::uniform(ModelKind::Semilinear, 1, PipeParams::default())).unwrap();
        let u = vec![0.0; d.dofmap().n_broken()];
        assert!(matches!(m.spatial_residual(&u, 0.0), Err(Error::VacuumState { .. })));
    }

    #[test]
    fn nonlinear_parameters_are_validated() {
        let d = disc(2, 1);
        let pipe = PipeParams {
            diameter: 0.0,
            ..PipeParams::default()
        };
        assert!(matches!(
            Model::new(d, ModelParams::uniform(ModelKind::Quasilinear, 1, pipe)),
            Err(Error::NonpositiveCoefficient { name: "D", .. })
        ));
    }

    #[test]
    fn semilinear_reduces_to_linear_with_frozen_friction() {
        // m = m0 constant, rho linear in x; the linear model with
        // d(x) = beta m0 / (A rho(x)) must give the same residual
        let k = 2;
        let d = disc(5, k);
        let (m0, beta) = (0.4, 3.5);
        let rho = |x: f64| 1.0 + 0.3 * x;
        let lin_pipe = PipeParams {
            d: Coefficient::function(move |x| beta * m0 / rho(x)),
            ..PipeParams::default()
        };
        let lin = Model::new(d.clone(), ModelParams::uniform(ModelKind::Linear, 1, lin_pipe)).unwrap();
        let semi = Model::new(d.clone(), ModelParams::uniform(ModelKind::Semilinear, 1, PipeParams::default())).unwrap();
        let lay = *d.dofmap().edge(0);
        let mesh = d.mesh(0);
        let mut u = vec![0.0; d.dofmap().n_broken()];
        for n in 0..lay.n_elements {
            for (j, &xi) in d.basis().nodes().iter().enumerate() {
                u[lay.pressure(n * k + j)] = rho(mesh.map(n, xi));
                u[lay.flux(n * k + j)] = m0;
            }
        }
        let rate: Vec<f64> = (0..u.len()).map(|i| (i as f64).sin()).collect();
        let a = lin.residual(&u, &rate, 0.0).unwrap();
        let b = semi.residual(&u, &rate, 0.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14, "{x} vs {y}");
        }
    }

    #[test]
    fn quasilinear_without_flow_matches_semilinear() {
        let d = disc(4, 3);
        let semi = Model::new(d.clone(), ModelParams::uniform(ModelKind::Semilinear, 1, PipeParams::default())).unwrap();
        let quasi = Model::new(d.clone(), ModelParams::uniform(ModelKind::Quasilinear, 1, PipeParams::default())).unwrap();
        let lay = *d.dofmap().edge(0);
        let mut u = vec![0.0; d.dofmap().n_broken()];
        for j in 0..lay.n_nodes {
            u[lay.pressure(j)] = 1.0 + 0.1 * (j as f64).sin();
        }
        assert_eq!(semi.spatial_residual(&u, 0.0).unwrap(), quasi.spatial_residual(&u, 0.0).unwrap());
    }

    #[test]
    fn linear_jacobian_is_state_independent() {
        let d = disc(3, 2);
        let m = Model::new(d.clone(), ModelParams::uniform(ModelKind::Linear, 1, PipeParams::default())).unwrap();
        let u1 = vec![0.3; d.dofmap().n_broken()];
        let u2: Vec<f64> = (0..u1.len()).map(|i| i as f64).collect();
        assert_eq!(m.jacobian(&u1, 0.0).unwrap(), m.jacobian(&u2, 1.0).unwrap());
    }

    fn finite_difference_check(kind: ModelKind, k: usize) {
        let d = disc(4, k);
        let pipe = PipeParams {
            area: 1.3,
            sound_speed: 0.8,
            ..PipeParams::default()
        };
        let model = Model::new(d.clone(), ModelParams::uniform(kind, 1, pipe)).unwrap();
        let n = d.dofmap().n_broken();
        let lay = *d.dofmap().edge(0);
        let mut u = vec![0.0; n];
        for j in 0..lay.n_nodes {
            let s = j as f64 / lay.n_nodes as f64;
            u[lay.pressure(j)] = 1.0 + 0.4 * (3.0 * s).sin();
            // flux changes sign inside the pipe
            u[lay.flux(j)] = 0.7 * (4.0 * s + 0.3).cos();
        }
        let jac = model.jacobian(&u, 0.0).unwrap().to_dense();
        let eps = 1e-6;
        for c in 0..n {
            let mut up = u.clone();
            let mut um = u.clone();
            up[c] += eps;
            um[c] -= eps;
            let rp = model.spatial_residual(&up, 0.0).unwrap();
            let rm = model.spatial_residual(&um, 0.0).unwrap();
            for r in 0..rp.len() {
                let fd = (rp[r] - rm[r]) / (2.0 * eps);
                assert!(
                    (fd - jac[r][c]).abs() < 1e-6 * (1.0 + fd.abs()),
                    "{kind} k={k} ({r},{c}): fd {fd} vs {}",
                    jac[r][c]
                );
            }
        }
    }

    #[test]
    fn jacobians_match_finite_differences() {
        for k in 1..=3 {
            finite_difference_check(ModelKind::Semilinear, k);
            finite_difference_check(ModelKind::Quasilinear, k);
        }
    }

    #[test]
    fn jacobian_pattern_is_state_independent() {
        let d = disc(3, 2);
        let model = Model::new(d.clone(), ModelParams::uniform(ModelKind::Quasilinear, 1, PipeParams::default())).unwrap();
        let lay = *d.dofmap().edge(0);
        let mut u = vec![0.0; d.dofmap().n_broken()];
        for j in 0..lay.n_nodes {
            u[lay.pressure(j)] = 1.0;
        }
        let a = model.jacobian(&u, 0.0).unwrap();
        for j in 0..lay.n_nodes {
            u[lay.flux(j)] = 0.1 * j as f64;
        }
        let b = model.jacobian(&u, 0.0).unwrap();
        assert_eq!(a.nnz(), b.nnz());
    }

    #[test]
    fn model_kind_parsing() {
        assert_eq!("quasilinear".parse::<ModelKind>().unwrap(), ModelKind::Quasilinear);
        assert!("cubic".parse::<ModelKind>().is_err());
        assert!((linearized_friction(3.5, 1.0, -0.2, 2.0) - 0.35).abs() < 1e-15);
    }
}
