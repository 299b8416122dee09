//! Convergence studies: pairwise errors on the seven-pipe network and
//! manufactured solutions on a single pipe.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::assembly::{Coefficient, CouplingMode, Discretization, SpaceTimeFn};
use crate::error::{Error, Result};
use crate::fem::projection::eval_trial_local;
use crate::fem::{gauss_rule, h1_project, EdgeMesh};
use crate::models::{Model, ModelKind, ModelParams, PipeParams};
use crate::timeloop::{integrate, InitialCondition, Scenario, Signal};
use crate::topology::NetworkGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub error: f64,
    /// `log2(e_{2h} / e_h)`; absent in the first row.
    pub eoc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub scenario: String,
    pub kind: ModelKind,
    pub degree: usize,
    pub dt_rule: String,
    pub final_time: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// Builds rows from mesh sizes and errors, computing the eoc column.
    pub fn from_errors(
        scenario: impl Into<String>,
        kind: ModelKind,
        degree: usize,
        dt_rule: impl Into<String>,
        final_time: f64,
        data: &[(f64, f64)],
    ) -> Self {
        let rows = data
            .iter()
            .enumerate()
            .map(|(i, &(h, error))| ConvergenceRow {
                h,
                error,
                eoc: (i > 0).then(|| (data[i - 1].1 / error).log2()),
            })
            .collect();
        Self {
            scenario: scenario.into(),
            kind,
            degree,
            dt_rule: dt_rule.into(),
            final_time,
            rows,
        }
    }

    pub fn eocs(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.eoc).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# {} model={} k={} dt={} T={}",
            self.scenario, self.kind, self.degree, self.dt_rule, self.final_time
        );
        let _ = writeln!(s, "{:>10}  {:>12}  {:>6}", "h", "e_h", "eoc");
        for r in &self.rows {
            let eoc = r.eoc.map_or_else(|| "--".to_string(), |e| format!("{e:.2}"));
            let _ = writeln!(s, "{:>10.5}  {:>12.5e}  {:>6}", r.h, r.error, eoc);
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,error,eoc\n");
        for r in &self.rows {
            let eoc = r.eoc.map_or_else(String::new, |e| format!("{e:.16e}"));
            let _ = writeln!(s, "{:.16e},{:.16e},{}", r.h, r.error, eoc);
        }
        s
    }
}

/// Per-edge weights of `a ||p||^2 + b ||m||^2`, and the factor turning the
/// state variable into pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorWeights {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub pressure_factor: Vec<f64>,
}

impl ErrorWeights {
    pub fn unit(n_edges: usize) -> Self {
        Self {
            a: vec![1.0; n_edges],
            b: vec![1.0; n_edges],
            pressure_factor: vec![1.0; n_edges],
        }
    }

    /// Unit weights, with `p = c^2 rho` for the nonlinear kinds.
    pub fn for_model(model: &Model) -> Self {
        let n = model.params().pipes.len();
        let mut w = Self::unit(n);
        if model.kind().is_nonlinear() {
            for (f, p) in w.pressure_factor.iter_mut().zip(&model.params().pipes) {
                *f = p.sound_speed * p.sound_speed;
            }
        }
        w
    }
}

/// `(a ||p_c - p_f||^2 + b ||m_c - m_f||^2)^{1/2}` between a coarse and a
/// nested fine solution, integrated on the fine mesh with `k + 2` points.
pub fn pairwise_error(
    coarse: &Discretization,
    coarse_state: &[f64],
    fine: &Discretization,
    fine_state: &[f64],
    weights: &ErrorWeights,
) -> Result<f64> {
    if coarse.graph().num_edges() != fine.graph().num_edges() {
        return Err(Error::MeshMismatch("different number of edges".into()));
    }
    if coarse.degree() != fine.degree() {
        return Err(Error::MeshMismatch("different polynomial degrees".into()));
    }
    for e in 0..fine.graph().num_edges() {
        if !coarse.mesh(e).is_refined_by(fine.mesh(e)) {
            return Err(Error::MeshMismatch(format!(
                "edge `{}`",
                fine.graph().edge(e).id
            )));
        }
    }
    let basis = fine.basis();
    let rule = gauss_rule(fine.degree() + 2);
    let mut sum = 0.0;
    for e in 0..fine.graph().num_edges() {
        let (cm, fm) = (coarse.mesh(e), fine.mesh(e));
        let (cp, cf) = (coarse.pressure_coeffs(coarse_state, e), coarse.flux_coeffs(coarse_state, e));
        let (fp, ff) = (fine.pressure_coeffs(fine_state, e), fine.flux_coeffs(fine_state, e));
        let scale = weights.pressure_factor[e];
        for n in 0..fm.num_elements() {
            let (a, b) = fm.element(n);
            let nc = cm.locate(0.5 * (a + b)).0;
            let (ca, cb) = cm.element(nc);
            let half = 0.5 * (b - a);
            for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
                let x = fm.map(n, xi);
                let xc = 2.0 * (x - ca) / (cb - ca) - 1.0;
                let dp = scale * (eval_trial_local(cp, basis, nc, xc) - eval_trial_local(fp, basis, n, xi));
                let dm = eval_trial_local(cf, basis, nc, xc) - eval_trial_local(ff, basis, n, xi);
                sum += half * w * (weights.a[e] * dp * dp + weights.b[e] * dm * dm);
            }
        }
    }
    Ok(sum.sqrt())
}

/// Error against exact fields `p(e, x)`, `m(e, x)`, with `k + 4` points.
pub fn exact_error(
    disc: &Discretization,
    state: &[f64],
    p: &dyn Fn(usize, f64) -> f64,
    m: &dyn Fn(usize, f64) -> f64,
    weights: &ErrorWeights,
) -> f64 {
    let basis = disc.basis();
    let rule = gauss_rule(disc.degree() + 4);
    let mut sum = 0.0;
    for e in 0..disc.graph().num_edges() {
        let mesh = disc.mesh(e);
        let (cp, cf) = (disc.pressure_coeffs(state, e), disc.flux_coeffs(state, e));
        for n in 0..mesh.num_elements() {
            let half = 0.5 * mesh.element_size(n);
            for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
                let x = mesh.map(n, xi);
                let dp = p(e, x) - weights.pressure_factor[e] * eval_trial_local(cp, basis, n, xi);
                let dm = m(e, x) - eval_trial_local(cf, basis, n, xi);
                sum += half * w * (weights.a[e] * dp * dp + weights.b[e] * dm * dm);
            }
        }
    }
    sum.sqrt()
}

/// Solves `count` independent problems, in parallel when the `parallel`
/// feature is on. Results keep the input order.
pub fn run_levels<T: Send>(count: usize, solve: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(solve).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(solve).collect()
    }
}

/// Pairwise convergence study: solves at `h0 / 2^i` for `i = 0..=levels`
/// and reports `levels` rows of `e_h` between consecutive solutions.
pub fn pairwise_study(
    levels: usize,
    h0: f64,
    scenario_at: impl Fn(f64) -> Result<Scenario> + Sync + Send,
) -> Result<(Vec<(f64, f64)>, Vec<Scenario>)> {
    let runs = run_levels(levels + 1, |i| {
        let sc = scenario_at(h0 / f64::powi(2.0, i as i32))?;
        let traj = integrate(&sc)?;
        Ok((sc, traj.final_state.broken))
    })?;
    let mut data = Vec::with_capacity(levels);
    for i in 0..levels {
        let (c, uc) = &runs[i];
        let (f, uf) = &runs[i + 1];
        let w = ErrorWeights::for_model(c.model());
        let e = pairwise_error(c.discretization(), uc, f.discretization(), uf, &w)?;
        data.push((h0 / f64::powi(2.0, i as i32), e));
    }
    Ok((data, runs.into_iter().map(|(s, _)| s).collect()))
}

/// Boundary pressures of the seven-pipe experiment: `p_v1 = 1` and
/// `p_v6 = 1 + sin(pi t) / 2`.
pub fn table1_boundary() -> Vec<(String, Signal)> {
    vec![
        ("v1".to_string(), Arc::new(|_| 1.0) as Signal),
        ("v6".to_string(), Arc::new(|t: f64| 1.0 + 0.5 * (std::f64::consts::PI * t).sin()) as Signal),
    ]
}

/// Parameters of the seven-pipe experiment: `a = b = d = 1` for the linear
/// model; `A = c = 1` and `lambda / (2D) = 7/2` for the nonlinear ones.
pub fn table1_params(kind: ModelKind, n_edges: usize) -> ModelParams {
    ModelParams::uniform(kind, n_edges, PipeParams::default())
}

/// The seven-pipe experiment on uniform meshes of size `h`, with
/// `dt = h / 4`, `T = 10`, started from the steady state.
pub fn table1_scenario(kind: ModelKind, h: f64, degree: usize, mode: CouplingMode) -> Result<Scenario> {
    let graph = Arc::new(NetworkGraph::fig1(1.0));
    let disc = Arc::new(Discretization::uniform(graph.clone(), h, degree, mode)?);
    let model = Model::new(disc, table1_params(kind, graph.num_edges()))?;
    Scenario::new(Arc::new(model), table1_boundary(), 10.0, h / 4.0)
}

pub const TABLE1_H0: f64 = 0.1;

/// Reproduces one column of the seven-pipe convergence table with
/// `levels` rows starting at `h = 0.1`.
pub fn run_table1(kind: ModelKind, levels: usize, degree: usize) -> Result<ConvergenceReport> {
    if levels < 3 {
        return Err(Error::InvalidScenario(format!("at least three levels are required, got {levels}")));
    }
    let (data, _) = pairwise_study(levels, TABLE1_H0, |h| {
        table1_scenario(kind, h, degree, CouplingMode::Monolithic)
    })?;
    Ok(ConvergenceReport::from_errors(
        "fig1-network",
        kind,
        degree,
        "h/4",
        10.0,
        &data,
    ))
}

/// Smooth exact solution of the linear model on `[0, 1]` with
/// piecewise constant friction (jump at `x = 1/2`).
#[derive(Debug, Clone, Copy)]
pub struct Manufactured {
    pub a: f64,
    pub b: f64,
    pub d_left: f64,
    pub d_right: f64,
}

impl Default for Manufactured {
    fn default() -> Self {
        Self {
            a: 1.5,
            b: 0.8,
            d_left: 1.0,
            d_right: 2.0,
        }
    }
}

impl Manufactured {
    pub fn pressure(x: f64, t: f64) -> f64 {
        (2.0 * x + 1.0 + t).sin()
    }

    pub fn pressure_x(x: f64, t: f64) -> f64 {
        2.0 * (2.0 * x + 1.0 + t).cos()
    }

    pub fn flux(x: f64, t: f64) -> f64 {
        (3.0 * x - t).cos()
    }

    pub fn flux_x(x: f64, t: f64) -> f64 {
        -3.0 * (3.0 * x - t).sin()
    }

    pub fn d(&self, x: f64) -> f64 {
        if x < 0.5 {
            self.d_left
        } else {
            self.d_right
        }
    }

    /// `f = a p_t + m_x`
    pub fn f(&self, x: f64, t: f64) -> f64 {
        self.a * (2.0 * x + 1.0 + t).cos() + Self::flux_x(x, t)
    }

    /// `g = b m_t + p_x + d m`
    pub fn g(&self, x: f64, t: f64) -> f64 {
        self.b * (3.0 * x - t).sin() + Self::pressure_x(x, t) + self.d(x) * Self::flux(x, t)
    }

    /// Scenario on a single pipe with `n` elements, the exact source
    /// terms, `I_h` of the exact initial data and the given step.
    pub fn scenario(&self, n: usize, degree: usize, final_time: f64, dt: f64) -> Result<Scenario> {
        let graph = Arc::new(NetworkGraph::single_pipe(1.0)?);
        let mesh = EdgeMesh::uniform(1.0, n)?;
        let disc = Arc::new(Discretization::new(graph, vec![mesh.clone()], degree, CouplingMode::Monolithic)?);
        let this = *self;
        let f: SpaceTimeFn = Arc::new(move |x, t| this.f(x, t));
        let g: SpaceTimeFn = Arc::new(move |x, t| this.g(x, t));
        let params = ModelParams {
            kind: ModelKind::Linear,
            pipes: vec![PipeParams {
                a: self.a,
                b: self.b,
                d: Coefficient::function(move |x| this.d(x)),
                ..PipeParams::default()
            }],
            f: vec![Some(f)],
            g: vec![Some(g)],
        };
        let model = Model::new(disc.clone(), params)?;
        let boundary = vec![
            ("v1".to_string(), Arc::new(|t| Self::pressure(0.0, t)) as Signal),
            ("v2".to_string(), Arc::new(|t| Self::pressure(1.0, t)) as Signal),
        ];
        let mut sc = Scenario::new(Arc::new(model), boundary, final_time, dt)?;
        let basis = disc.basis();
        let p0 = h1_project(&|x| Self::pressure(x, 0.0), &|x| Self::pressure_x(x, 0.0), &mesh, basis);
        let m0 = h1_project(&|x| Self::flux(x, 0.0), &|x| Self::flux_x(x, 0.0), &mesh, basis);
        let lay = disc.dofmap().edge(0);
        let mut broken = vec![0.0; disc.dofmap().n_broken()];
        for j in 0..lay.n_nodes {
            broken[lay.pressure(j)] = p0[j];
            broken[lay.flux(j)] = m0[j];
        }
        sc.initial = InitialCondition::Coefficients(broken);
        Ok(sc)
    }
}

pub const MANUFACTURED_T: f64 = 0.5;

/// Time step `h^{(k+1)/2} / 2`, which keeps the second order time error
/// below the spatial error.
pub fn manufactured_dt(h: f64, degree: usize) -> f64 {
    0.5 * h.powf((degree as f64 + 1.0) / 2.0)
}

/// Errors against the exact solution at `T = 1/2` on meshes with
/// `4 * 2^i` elements, `i = 0..levels`.
pub fn run_manufactured(degree: usize, levels: usize) -> Result<ConvergenceReport> {
    let mf = Manufactured::default();
    let data = run_levels(levels, |i| {
        let n = 4 << i;
        let h = 1.0 / n as f64;
        let sc = mf.scenario(n, degree, MANUFACTURED_T, manufactured_dt(h, degree))?;
        let traj = integrate(&sc)?;
        let w = ErrorWeights {
            a: vec![mf.a],
            b: vec![mf.b],
            pressure_factor: vec![1.0],
        };
        let t = traj.final_state.t;
        let e = exact_error(
            sc.discretization(),
            &traj.final_state.broken,
            &|_, x| Manufactured::pressure(x, t),
            &|_, x| Manufactured::flux(x, t),
            &w,
        );
        Ok((h, e))
    })?;
    Ok(ConvergenceReport::from_errors(
        "manufactured-single-pipe",
        ModelKind::Linear,
        degree,
        "h^((k+1)/2)/2",
        MANUFACTURED_T,
        &data,
    ))
}
