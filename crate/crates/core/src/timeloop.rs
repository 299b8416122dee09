//! Time integration of the semidiscrete differential-algebraic system.
//!
//! A step with the implicit midpoint rule solves
//!
//! ```text
//!   M (u1 - u0) / dt + S((u0 + u1) / 2) - F(t0 + dt/2) = 0
//! ```
//!
//! for the unknowns of `u1`. In monolithic mode `u1` carries the exact
//! boundary values at `t0 + dt`; in hybrid mode the constraint rows are
//! imposed at `t0 + dt`. Both variants therefore produce the same broken
//! coefficients. Backward Euler evaluates `S` and `F` at `t0 + dt` instead.

use std::io::Write;
use std::sync::Arc;

use crate::assembly::{CouplingMode, Discretization, DofMap};
use crate::error::{Error, Result};
use crate::models::{Model, ModelKind, ModelParams, PipeParams};
use crate::sparse::{norm_inf, CsrMatrix, RowUpdateSolver, SparseSolver, TripletBuilder};
use crate::topology::Sign;

/// Prescribed boundary pressure `p_v(t)`.
pub type Signal = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    ImplicitMidpoint,
    BackwardEuler,
}

impl std::str::FromStr for Integrator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "midpoint" => Ok(Integrator::ImplicitMidpoint),
            "euler" => Ok(Integrator::BackwardEuler),
            other => Err(format!("unknown integrator `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_iterations: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialCondition {
    /// Steady state for the boundary data at `t = 0`.
    #[default]
    SteadyState,
    /// Broken trial coefficients; they must satisfy the coupling conditions.
    Coefficients(Vec<f64>),
}

/// A model with boundary data, time horizon and solver settings.
#[derive(Clone)]
pub struct Scenario {
    model: Arc<Model>,
    /// Signal per vertex; `Some` exactly for boundary vertices.
    boundary: Vec<Option<Signal>>,
    pub final_time: f64,
    pub dt: f64,
    pub initial: InitialCondition,
    pub integrator: Integrator,
    pub newton: NewtonSettings,
    /// Keep every n-th state of the trajectory (the initial and final
    /// states are always kept when set).
    pub snapshot_every: Option<usize>,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("kind", &self.model.kind())
            .field("final_time", &self.final_time)
            .field("dt", &self.dt)
            .field("integrator", &self.integrator)
            .finish_non_exhaustive()
    }
}

impl Scenario {
    /// Builds a scenario; every boundary vertex needs a signal.
    pub fn new(
        model: Arc<Model>,
        boundary: Vec<(String, Signal)>,
        final_time: f64,
        dt: f64,
    ) -> Result<Self> {
        let graph = model.discretization().graph();
        let mut signals: Vec<Option<Signal>> = vec![None; graph.num_vertices()];
        for (name, s) in boundary {
            let v = graph.vertex_index(&name)?;
            if !graph.is_boundary(v) {
                return Err(Error::NotABoundaryVertex(name));
            }
            signals[v] = Some(s);
        }
        if let Some(&v) = graph.boundary_vertices().iter().find(|&&v| signals[v].is_none()) {
            return Err(Error::MissingBoundary(graph.vertex_name(v).to_string()));
        }
        if !(final_time >= 0.0) || !final_time.is_finite() {
            return Err(Error::InvalidScenario(format!("final time must be >= 0, got {final_time}")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidScenario(format!("time step must be positive, got {dt}")));
        }
        Ok(Self {
            model,
            boundary: signals,
            final_time,
            dt,
            initial: InitialCondition::SteadyState,
            integrator: Integrator::ImplicitMidpoint,
            newton: NewtonSettings::default(),
            snapshot_every: None,
        })
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn discretization(&self) -> &Arc<Discretization> {
        self.model.discretization()
    }

    /// Prescribed pressure at boundary vertex `v`.
    pub fn boundary_pressure(&self, v: usize, t: f64) -> f64 {
        (self.boundary[v].as_ref().expect("boundary vertex has a signal"))(t)
    }

    /// Number of steps and the step size that hits `T` exactly.
    pub fn step_count(&self) -> (usize, f64) {
        if self.final_time == 0.0 {
            return (0, self.dt);
        }
        let n = ((self.final_time / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (n, self.final_time / n as f64)
    }

    /// Boundary values of the state variable at time `t`, by vertex.
    fn boundary_state(&self, t: f64) -> Vec<f64> {
        let graph = self.discretization().graph();
        (0..graph.num_vertices())
            .map(|v| match &self.boundary[v] {
                Some(s) => {
                    let e = graph.incident_edges(v)[0].0;
                    self.model.boundary_state(e, s(t))
                }
                None => 0.0,
            })
            .collect()
    }

    /// Time derivative of [`boundary_state`](Self::boundary_state), by a
    /// fourth-order central difference of the signals.
    fn boundary_rate(&self, t: f64) -> Vec<f64> {
        let eps = 1e-3 * (1.0 + t.abs());
        let (a, b, c, d) = (
            self.boundary_state(t - 2.0 * eps),
            self.boundary_state(t - eps),
            self.boundary_state(t + eps),
            self.boundary_state(t + 2.0 * eps),
        );
        (0..a.len())
            .map(|v| (a[v] - 8.0 * b[v] + 8.0 * c[v] - d[v]) / (12.0 * eps))
            .collect()
    }

    /// Residual of the hidden algebraic equations at the state's time; it
    /// vanishes along exact trajectories and after every step.
    pub fn algebraic_residual(&self, state: &SimState) -> Result<Vec<f64>> {
        let rate = self.boundary_rate(state.t);
        let load = self.model.has_sources().then(|| self.model.load(state.t));
        Ok(self
            .model
            .hidden_constraints()
            .residual(&state.broken, load.as_deref(), &|v| rate[v]))
    }

    fn expand(&self, x: &[f64], t: f64) -> Vec<f64> {
        let values = self.boundary_state(t);
        self.discretization().dofmap().expand(x, &|v| values[v])
    }

    fn constraint_residual(&self, x: &[f64], t: f64) -> Vec<f64> {
        let values = self.boundary_state(t);
        self.discretization().dofmap().constraint_residual(x, &|v| values[v])
    }

    /// `a ||pi p||^2 + b ||pi m||^2` for the linear kind, and
    /// `A ||pi rho||^2 + ||pi m||^2` for the nonlinear ones.
    pub fn energy(&self, state: &SimState) -> f64 {
        let pipes = &self.model.params().pipes;
        let linear = self.model.kind() == ModelKind::Linear;
        self.discretization().projected_energy(
            &state.broken,
            &|e| if linear { pipes[e].a } else { pipes[e].area },
            &|e| if linear { pipes[e].b } else { 1.0 },
        )
    }
}

/// State at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    /// Unknowns of the square system (including junction pressures in hybrid mode).
    pub unknowns: Vec<f64>,
    /// Edgewise trial coefficients of pressure (or density) and flux.
    pub broken: Vec<f64>,
}

/// Recorded output of [`integrate`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub boundary_vertices: Vec<usize>,
    /// `boundary_flux[n][i]` is the flux at `boundary_vertices[i]` at `times[n]`,
    /// oriented along the incident pipe.
    pub boundary_flux: Vec<Vec<f64>>,
    pub snapshots: Vec<SimState>,
    pub final_state: SimState,
    pub newton_iterations: usize,
}

impl Trajectory {
    /// CSV with columns `t,vertex,m`.
    pub fn write_flux_csv(&self, scenario: &Scenario, mut out: impl Write) -> std::io::Result<()> {
        let graph = scenario.discretization().graph();
        writeln!(out, "t,vertex,m")?;
        for (t, row) in self.times.iter().zip(&self.boundary_flux) {
            for (&v, m) in self.boundary_vertices.iter().zip(row) {
                writeln!(out, "{:.16e},{},{:.16e}", t, graph.vertex_name(v), m)?;
            }
        }
        Ok(())
    }
}

/// Writes states as CSV with columns `t,edge,element,node,p,m`, one line per
/// local trial node; `p` is the pressure also for density-based models.
pub fn write_snapshot_csv(scenario: &Scenario, states: &[SimState], mut out: impl Write) -> std::io::Result<()> {
    let disc = scenario.discretization();
    let model = scenario.model();
    let k = disc.degree();
    writeln!(out, "t,edge,element,node,p,m")?;
    for s in states {
        for (e, lay) in disc.dofmap().edges().iter().enumerate() {
            let id = &disc.graph().edge(e).id;
            for n in 0..lay.n_elements {
                for j in 0..=k {
                    let p = model.pressure_of_state(e, s.broken[lay.pressure(n * k + j)]);
                    let m = s.broken[lay.flux(n * k + j)];
                    writeln!(out, "{:.16e},{},{},{},{:.16e},{:.16e}", s.t, id, n, j, p, m)?;
                }
            }
        }
    }
    Ok(())
}

/// Fluxes at the boundary vertices, in the order of
/// [`boundary_vertices`](crate::topology::NetworkGraph::boundary_vertices).
pub fn boundary_fluxes(disc: &Discretization, broken: &[f64]) -> Vec<f64> {
    let graph = disc.graph();
    graph
        .boundary_vertices()
        .iter()
        .map(|&v| {
            let (e, s): (usize, Sign) = graph.incident_edges(v)[0];
            let lay = disc.dofmap().edge(e);
            broken[lay.flux(lay.end_node(s))]
        })
        .collect()
}

/// One-step solver of a scenario.
///
/// The factorized step matrix is kept across steps. For the nonlinear kinds
/// it is refreshed with the current analytic Jacobian whenever an iteration
/// reduces the residual by less than a factor of ten.
pub struct Stepper<'a> {
    scenario: &'a Scenario,
    dt: f64,
    solver: RowUpdateSolver,
    /// Pivot rows of the hidden constraints and their rows `W K E`.
    hidden_rows: Vec<(usize, Vec<(usize, f64)>)>,
    /// Mass factor of the current factorization.
    factored: Option<f64>,
    refresh: bool,
    iterations: usize,
    factorizations: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Self {
            scenario,
            dt: scenario.step_count().1,
            solver: RowUpdateSolver::new(),
            hidden_rows: hidden_rows(scenario),
            factored: None,
            refresh: false,
            iterations: 0,
            factorizations: 0,
        }
    }

    /// Step size actually used.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Total Newton iterations so far.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Number of step matrix factorizations so far.
    pub fn factorizations(&self) -> usize {
        self.factorizations
    }

    /// Initial state, with its mass-free components adjusted so that the
    /// hidden algebraic equations hold at `t = 0` (the projections
    /// `pi p`, `pi m` are unchanged).
    pub fn initial_state(&mut self) -> Result<SimState> {
        let state = match &self.scenario.initial {
            InitialCondition::SteadyState => steady_state(self.scenario, 0.0)?,
            InitialCondition::Coefficients(broken) => {
                let map = self.scenario.discretization().dofmap();
                if broken.len() != map.n_broken() {
                    return Err(Error::InvalidScenario(format!(
                        "initial data has {} coefficients, expected {}",
                        broken.len(),
                        map.n_broken()
                    )));
                }
                let unknowns = map.restrict(broken);
                let broken = self.scenario.expand(&unknowns, 0.0);
                SimState {
                    t: 0.0,
                    unknowns,
                    broken,
                }
            }
        };
        consistent_state(self.scenario, state)
    }

    /// Advances `state` by one time step.
    pub fn step(&mut self, state: &SimState) -> Result<SimState> {
        let sc = self.scenario;
        let model = sc.model();
        let dt = self.dt;
        let t1 = state.t + dt;
        let u0 = &state.broken;
        let (theta, t_eval) = match sc.integrator {
            Integrator::ImplicitMidpoint => (0.5, state.t + 0.5 * dt),
            Integrator::BackwardEuler => (1.0, t1),
        };
        // The hidden algebraic equations are imposed at t1 in place of their
        // pivot rows; the remaining rows are the plain one-step scheme.
        let hidden = model.hidden_constraints();
        let boundary_rate = sc.boundary_rate(t1);
        let load1 = model.has_sources().then(|| model.load(t1));
        let residual = |x: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
            let u1 = sc.expand(x, t1);
            let eval: Vec<f64> = u0.iter().zip(&u1).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
            let rate: Vec<f64> = u1.iter().zip(u0).map(|(b, a)| (b - a) / dt).collect();
            let mut r = model.residual(&eval, &rate, t_eval)?;
            let h = hidden.residual(&u1, load1.as_deref(), &|v| boundary_rate[v]);
            for (&p, hi) in hidden.pivots().iter().zip(h) {
                r[p] = hi;
            }
            r.extend(sc.constraint_residual(x, t1));
            Ok((r, eval))
        };
        let linear = model.kind() == ModelKind::Linear;
        let mut x = state.unknowns.clone();
        let (mut r, mut eval) = residual(&x)?;
        let r0 = norm_inf(&r);
        let tol = sc.newton.abs_tol.max(sc.newton.rel_tol * r0);
        let mut it = 0;
        while norm_inf(&r) > tol {
            if it == sc.newton.max_iterations || !r.iter().all(|v| v.is_finite()) {
                return Err(Error::NewtonDiverged {
                    iterations: it,
                    residual: norm_inf(&r),
                });
            }
            let alpha = 1.0 / dt;
            let fresh = self.factored != Some(alpha) || self.refresh;
            if fresh {
                let jac = model.jacobian(&eval, t_eval)?;
                let m = step_matrix(sc, Some((model.mass(), alpha)), &jac, theta, false);
                self.solver.factor(&m, &self.hidden_rows)?;
                self.factored = Some(alpha);
                self.refresh = false;
                self.factorizations += 1;
            }
            let delta = self.solver.solve(&r)?;
            for (xi, d) in x.iter_mut().zip(&delta) {
                *xi -= d;
            }
            it += 1;
            let previous = norm_inf(&r);
            (r, eval) = residual(&x)?;
            if linear {
                // exact up to rounding
                break;
            }
            if norm_inf(&r) > 0.1 * previous {
                self.refresh = true;
            }
            if fresh && norm_inf(&delta) <= 1e-14 * (1.0 + norm_inf(&x)) {
                break;
            }
        }
        self.iterations += it;
        let broken = sc.expand(&x, t1);
        Ok(SimState {
            t: t1,
            unknowns: x,
            broken,
        })
    }
}

fn hidden_rows(sc: &Scenario) -> Vec<(usize, Vec<(usize, f64)>)> {
    let map = sc.discretization().dofmap();
    let hidden = sc.model().hidden_constraints();
    hidden
        .pivots()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let row = hidden
                .operator()
                .row(i)
                .flat_map(|(c, v)| map.expansion(c).iter().map(move |&(j, w)| (j, v * w)))
                .collect();
            (p, row)
        })
        .collect()
}

/// `alpha M E + theta J E` with the constraint rows appended; with
/// `with_hidden`, the pivot rows of the hidden constraints become `W K E`.
fn step_matrix(
    sc: &Scenario,
    mass: Option<(&CsrMatrix, f64)>,
    jac: &CsrMatrix,
    theta: f64,
    with_hidden: bool,
) -> CsrMatrix {
    let map = sc.discretization().dofmap();
    let mut b = TripletBuilder::with_capacity(map.n_equations(), map.n_unknowns(), 2 * jac.nnz());
    let mut skip = vec![false; map.n_test()];
    if with_hidden {
        for (p, row) in hidden_rows(sc) {
            skip[p] = true;
            for (j, v) in row {
                b.push(p, j, v);
            }
        }
    }
    if let Some((m, alpha)) = mass {
        compose_rows(map, m, alpha, &skip, &mut b);
    }
    compose_rows(map, jac, theta, &skip, &mut b);
    for (i, c) in map.constraints().iter().enumerate() {
        for &(j, w) in &c.entries {
            b.push(map.n_test() + i, j, w);
        }
    }
    b.into_csr()
}

/// Moves `state` along the kernel of `M E` onto the hidden constraints.
fn consistent_state(sc: &Scenario, mut state: SimState) -> Result<SimState> {
    let model = sc.model();
    let hidden = model.hidden_constraints();
    let h = sc.algebraic_residual(&state)?;
    if norm_inf(&h) == 0.0 {
        return Ok(state);
    }
    let map = sc.discretization().dofmap();
    let a = step_matrix(sc, Some((model.mass(), 1.0)), &model.linear_system().stiffness, 0.0, true);
    let mut rhs = vec![0.0; map.n_equations()];
    for (&p, hi) in hidden.pivots().iter().zip(h) {
        rhs[p] = hi;
    }
    let delta = crate::sparse::solve(&a, &rhs)?;
    for (x, d) in state.unknowns.iter_mut().zip(&delta) {
        *x -= d;
    }
    state.broken = sc.expand(&state.unknowns, state.t);
    Ok(state)
}

fn compose_rows(map: &DofMap, a: &CsrMatrix, alpha: f64, skip: &[bool], out: &mut TripletBuilder) {
    for r in (0..a.nrows()).filter(|&r| !skip[r]) {
        for (c, v) in a.row(r) {
            for &(j, w) in map.expansion(c) {
                out.push(r, j, alpha * v * w);
            }
        }
    }
}

fn newton_steady(sc: &Scenario, t: f64, mut x: Vec<f64>) -> Result<Vec<f64>> {
    let model = sc.model();
    let residual = |x: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let u = sc.expand(x, t);
        let mut r = model.spatial_residual(&u, t)?;
        r.extend(sc.constraint_residual(x, t));
        Ok((r, u))
    };
    let (mut r, mut u) = residual(&x)?;
    let tol = sc.newton.abs_tol.max(sc.newton.rel_tol * norm_inf(&r));
    let mut solver = SparseSolver::new();
    let mut it = 0;
    while norm_inf(&r) > tol {
        if it == sc.newton.max_iterations || !r.iter().all(|v| v.is_finite()) {
            return Err(Error::NewtonDiverged {
                iterations: it,
                residual: norm_inf(&r),
            });
        }
        let jac = model.jacobian(&u, t)?;
        solver.factor(&step_matrix(sc, None, &jac, 1.0, false))?;
        let delta = solver.solve(&r)?;
        for (xi, d) in x.iter_mut().zip(&delta) {
            *xi -= d;
        }
        it += 1;
        (r, u) = residual(&x)?;
        if norm_inf(&delta) <= 1e-14 * (1.0 + norm_inf(&x)) {
            break;
        }
    }
    Ok(x)
}

/// Solves the time-independent system for the boundary data at time `t`.
///
/// Nonlinear kinds start Newton from the linear steady state with friction
/// `lambda / (2 D A)`, rescaled to densities.
pub fn steady_state(scenario: &Scenario, t: f64) -> Result<SimState> {
    let model = scenario.model();
    let disc = scenario.discretization();
    let map = disc.dofmap();
    let guess = if model.kind() == ModelKind::Linear {
        vec![0.0; map.n_unknowns()]
    } else {
        let pipes: Vec<PipeParams> = model
            .params()
            .pipes
            .iter()
            .map(|p| PipeParams {
                a: 1.0,
                b: 1.0,
                d: (p.friction_rate() / p.area).into(),
                ..p.clone()
            })
            .collect();
        let params = ModelParams {
            kind: ModelKind::Linear,
            pipes,
            ..model.params().clone()
        };
        let mut lin = scenario.clone();
        lin.model = Arc::new(Model::new(disc.clone(), params)?);
        let x = newton_steady(&lin, t, vec![0.0; map.n_unknowns()])?;
        let mut u = lin.expand(&x, t);
        for (e, lay) in map.edges().iter().enumerate() {
            let c = model.params().pipes[e].sound_speed;
            for j in 0..lay.n_nodes {
                u[lay.pressure(j)] /= c * c;
            }
        }
        map.restrict(&u)
    };
    let unknowns = newton_steady(scenario, t, guess)?;
    let broken = scenario.expand(&unknowns, t);
    Ok(SimState { t, unknowns, broken })
}

/// Advances from `t = 0` to the final time, recording boundary fluxes at
/// every step.
pub fn integrate(scenario: &Scenario) -> Result<Trajectory> {
    let disc = scenario.discretization();
    let mut stepper = Stepper::new(scenario);
    let (n_steps, dt) = scenario.step_count();
    let mut state = stepper.initial_state()?;
    let mut times = vec![0.0];
    let mut flux = vec![boundary_fluxes(disc, &state.broken)];
    let mut snapshots = Vec::new();
    if scenario.snapshot_every.is_some() {
        snapshots.push(state.clone());
    }
    for n in 1..=n_steps {
        let mut next = stepper.step(&state)?;
        // avoid drift from repeated addition
        next.t = if n == n_steps { scenario.final_time } else { n as f64 * dt };
        state = next;
        times.push(state.t);
        flux.push(boundary_fluxes(disc, &state.broken));
        if let Some(every) = scenario.snapshot_every {
            if n % every.max(1) == 0 || n == n_steps {
                snapshots.push(state.clone());
            }
        }
    }
    Ok(Trajectory {
        times,
        boundary_vertices: disc.graph().boundary_vertices().to_vec(),
        boundary_flux: flux,
        snapshots,
        final_state: state,
        newton_iterations: stepper.iterations(),
    })
}

/// Convenience for tests and drivers: a scenario on uniform meshes.
pub fn uniform_scenario(
    graph: Arc<crate::topology::NetworkGraph>,
    h: f64,
    degree: usize,
    mode: CouplingMode,
    params: impl FnOnce(usize) -> ModelParams,
    boundary: Vec<(String, Signal)>,
    final_time: f64,
    dt: f64,
) -> Result<Scenario> {
    let disc = Arc::new(Discretization::uniform(graph.clone(), h, degree, mode)?);
    let model = Model::new(disc, params(graph.num_edges()))?;
    Scenario::new(Arc::new(model), boundary, final_time, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::Coefficient;
    use crate::topology::NetworkGraph;

    fn constant(c: f64) -> Signal {
        Arc::new(move |_| c)
    }

    fn linear_params(d: f64) -> impl FnOnce(usize) -> ModelParams {
        move |n| {
            ModelParams::uniform(
                ModelKind::Linear,
                n,
                PipeParams {
                    d: Coefficient::Constant(d),
                    ..PipeParams::default()
                },
            )
        }
    }

    fn pipe_scenario(mode: CouplingMode, p0: f64, p1: f64) -> Scenario {
        uniform_scenario(
            Arc::new(NetworkGraph::single_pipe(1.0).unwrap()),
            0.25,
            2,
            mode,
            linear_params(1.0),
            vec![("v1".into(), constant(p0)), ("v2".into(), constant(p1))],
            1.0,
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn single_pipe_steady_state() {
        for mode in [CouplingMode::Monolithic, CouplingMode::Hybrid] {
            let sc = pipe_scenario(mode, 1.0, 0.0);
            let s = steady_state(&sc, 0.0).unwrap();
            let disc = sc.discretization();
            let nodes = disc.basis().nodes().to_vec();
            let lay = *disc.dofmap().edge(0);
            for n in 0..lay.n_elements {
                for (j, &xi) in nodes.iter().enumerate() {
                    let x = disc.mesh(0).map(n, xi);
                    let idx = n * 2 + j;
                    assert!((s.broken[lay.pressure(idx)] - (1.0 - x)).abs() < 1e-12);
                    assert!((s.broken[lay.flux(idx)] - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn steady_state_is_a_fixed_point() {
        let sc = pipe_scenario(CouplingMode::Monolithic, 1.0, 0.3);
        let traj = integrate(&sc).unwrap();
        let s0 = steady_state(&sc, 0.0).unwrap();
        for (a, b) in s0.broken.iter().zip(&traj.final_state.broken) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_final_time_keeps_initial_state() {
        let mut sc = pipe_scenario(CouplingMode::Monolithic, 1.0, 0.0);
        sc.final_time = 0.0;
        let traj = integrate(&sc).unwrap();
        assert_eq!(traj.times, vec![0.0]);
        assert_eq!(traj.boundary_flux.len(), 1);
    }

    #[test]
    fn step_count_hits_final_time() {
        let mut sc = pipe_scenario(CouplingMode::Monolithic, 1.0, 0.0);
        sc.final_time = 1.0;
        sc.dt = 0.3;
        assert_eq!(sc.step_count(), (4, 0.25));
        sc.dt = 0.1;
        assert_eq!(sc.step_count().0, 10);
    }

    #[test]
    fn boundary_validation() {
        let g = Arc::new(NetworkGraph::single_pipe(1.0).unwrap());
        let disc = Arc::new(Discretization::uniform(g, 0.5, 1, CouplingMode::Monolithic).unwrap());
        let model = Arc::new(Model::new(disc, linear_params(1.0)(1)).unwrap());
        assert_eq!(
            Scenario::new(model.clone(), vec![("v1".into(), constant(1.0))], 1.0, 0.1).unwrap_err(),
            Error::MissingBoundary("v2".into())
        );
        assert!(matches!(
            Scenario::new(model.clone(), vec![("v9".into(), constant(1.0))], 1.0, 0.1),
            Err(Error::UnknownVertex(_))
        ));
        let both = vec![("v1".into(), constant(1.0)), ("v2".into(), constant(1.0))];
        assert!(matches!(
            Scenario::new(model, both, 1.0, 0.0),
            Err(Error::InvalidScenario(_))
        ));
    }

    #[test]
    fn hybrid_matches_monolithic_on_a_pipe() {
        let mut a = pipe_scenario(CouplingMode::Monolithic, 1.0, 0.0);
        let mut b = pipe_scenario(CouplingMode::Hybrid, 1.0, 0.0);
        let sig: Signal = Arc::new(|t: f64| 0.5 * (3.0 * t).sin());
        a.boundary[1] = Some(sig.clone());
        b.boundary[1] = Some(sig);
        let ta = integrate(&a).unwrap();
        let tb = integrate(&b).unwrap();
        for (x, y) in ta.final_state.broken.iter().zip(&tb.final_state.broken) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn semilinear_pipe_reaches_steady_flow() {
        let sc = uniform_scenario(
            Arc::new(NetworkGraph::single_pipe(1.0).unwrap()),
            0.1,
            1,
            CouplingMode::Monolithic,
            |n| ModelParams::uniform(ModelKind::Semilinear, n, PipeParams::default()),
            vec![("v1".into(), constant(1.2)), ("v2".into(), constant(1.0))],
            0.0,
            0.1,
        )
        .unwrap();
        let s = steady_state(&sc, 0.0).unwrap();
        let m = boundary_fluxes(sc.discretization(), &s.broken);
        // mass conservation: the same flux leaves and enters
        assert!((m[0] - m[1]).abs() < 1e-12);
        // rho rho_x = -beta m |m| with A = c = 1 gives m^2 = (1.2^2 - 1) / (2 beta)
        assert!((m[0] - (0.44f64 / 7.0).sqrt()).abs() < 1e-3, "{}", m[0]);
    }
}
