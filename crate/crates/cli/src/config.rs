use std::path::PathBuf;
use std::sync::Arc;

use gasnet_core::assembly::{Coefficient, CouplingMode, Discretization};
use gasnet_core::models::{Model, ModelKind, ModelParams, PipeParams};
use gasnet_core::timeloop::{Integrator, Scenario, Signal};
use gasnet_core::topology::NetworkGraph;

use crate::error::CliError;
use crate::scenario::{PipeSpec, ScenarioFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Steady,
    Converge,
}

/// Command-line values that take precedence over the scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub degree: Option<usize>,
    pub dt: Option<f64>,
    pub h: Option<f64>,
    pub final_time: Option<f64>,
    pub kind: Option<ModelKind>,
    pub hybrid: Option<bool>,
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub network: Option<PathBuf>,
    pub scenario: PathBuf,
    pub out: PathBuf,
    pub overrides: Overrides,
}

/// Everything needed to build solver scenarios, validated against the
/// network.
#[derive(Clone)]
pub struct Problem {
    pub graph: Arc<NetworkGraph>,
    pub kind: ModelKind,
    pub degree: usize,
    pub h: f64,
    pub dt: f64,
    pub final_time: f64,
    pub mode: CouplingMode,
    pub integrator: Integrator,
    pub snapshot_every: Option<usize>,
    pub levels: usize,
    pipes: Vec<PipeSpec>,
    boundary: Vec<(String, Signal)>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("kind", &self.kind)
            .field("degree", &self.degree)
            .field("h", &self.h)
            .field("dt", &self.dt)
            .field("final_time", &self.final_time)
            .field("mode", &self.mode)
            .field("levels", &self.levels)
            .finish_non_exhaustive()
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn required<T>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::MissingParameter(name.to_string()))
}

impl Problem {
    /// Reads the files named in `cfg` and checks them against each other.
    pub fn load(cfg: &RunConfig) -> Result<Self, CliError> {
        let file = ScenarioFile::read(&cfg.scenario)?;
        let network = cfg
            .network
            .clone()
            .or_else(|| file.network.clone())
            .ok_or_else(|| CliError::MissingParameter("network file ([network] file or --network)".into()))?;
        let graph = NetworkGraph::from_file(&network)?;
        Self::resolve(file, graph, &cfg.overrides, cfg.command)
    }

    pub fn resolve(
        file: ScenarioFile,
        graph: NetworkGraph,
        ov: &Overrides,
        command: Command,
    ) -> Result<Self, CliError> {
        let kind = ov.kind.or(file.kind).unwrap_or(ModelKind::Linear);
        let degree = ov.degree.or(file.degree).unwrap_or(1);
        if degree == 0 {
            return Err(CliError::Config("polynomial degree k must be at least 1".into()));
        }
        let h = positive("h", required(ov.h.or(file.h), "h ([model] h or --h)")?)?;
        let (dt, final_time) = if command == Command::Steady {
            (ov.dt.or(file.dt).unwrap_or(1.0), ov.final_time.or(file.final_time).unwrap_or(0.0))
        } else {
            (
                required(ov.dt.or(file.dt), "dt ([solver] dt or --dt)")?,
                required(ov.final_time.or(file.final_time), "T ([solver] T or --final-time)")?,
            )
        };
        let dt = positive("dt", dt)?;
        if !(final_time >= 0.0 && final_time.is_finite()) {
            return Err(CliError::Config(format!("T must be >= 0, got {final_time}")));
        }
        let levels = ov.levels.or(file.levels).unwrap_or(5);
        if command == Command::Converge && levels < 3 {
            return Err(CliError::Config(format!("a convergence study needs at least 3 levels, got {levels}")));
        }

        let mut pipes = vec![file.defaults.clone(); graph.num_edges()];
        for (id, spec, line) in &file.pipes {
            let e = graph.edge_index(id).map_err(|_| {
                CliError::Config(format!("line {line}: section for unknown pipe `{id}`"))
            })?;
            pipes[e] = spec.or(&file.defaults);
        }

        let mut boundary = Vec::new();
        for b in &file.boundary {
            let v = graph
                .vertex_index(&b.vertex)
                .map_err(|_| CliError::UnknownVertexInBoundaryCondition(b.vertex.clone()))?;
            if !graph.is_boundary(v) {
                return Err(CliError::Config(format!(
                    "line {}: vertex `{}` is a junction, not a boundary vertex",
                    b.line, b.vertex
                )));
            }
            let signal = Arc::new(b.signal.clone());
            boundary.push((b.vertex.clone(), Arc::new(move |t| signal.eval(t, 0.0)) as Signal));
        }
        for &v in graph.boundary_vertices() {
            let name = graph.vertex_name(v);
            if !boundary.iter().any(|(b, _)| b == name) {
                return Err(CliError::MissingParameter(format!("boundary condition for vertex `{name}`")));
            }
        }

        Ok(Self {
            graph: Arc::new(graph),
            kind,
            degree,
            h,
            dt,
            final_time,
            mode: if ov.hybrid.or(file.hybrid).unwrap_or(false) {
                CouplingMode::Hybrid
            } else {
                CouplingMode::Monolithic
            },
            integrator: file.integrator.unwrap_or_default(),
            snapshot_every: file.snapshot_every,
            levels,
            pipes,
            boundary,
        })
    }

    fn params(&self) -> ModelParams {
        let base = PipeParams::default();
        let pipes = self
            .pipes
            .iter()
            .map(|s| PipeParams {
                a: s.a.unwrap_or(base.a),
                b: s.b.unwrap_or(base.b),
                d: match &s.d {
                    None => base.d.clone(),
                    Some(e) => match e.constant() {
                        Some(c) => Coefficient::Constant(c),
                        None => {
                            let e = Arc::new(e.clone());
                            Coefficient::function(move |x| e.eval(0.0, x))
                        }
                    },
                },
                area: s.area.unwrap_or(base.area),
                diameter: s.diameter.unwrap_or(base.diameter),
                friction_factor: s.friction_factor.unwrap_or(base.friction_factor),
                sound_speed: s.sound_speed.unwrap_or(base.sound_speed),
            })
            .collect();
        ModelParams {
            pipes,
            ..ModelParams::uniform(self.kind, self.graph.num_edges(), base)
        }
    }

    /// Solver scenario on uniform meshes of size `h` with step `dt`.
    pub fn scenario(&self, h: f64, dt: f64) -> gasnet_core::Result<Scenario> {
        let disc = Arc::new(Discretization::uniform(self.graph.clone(), h, self.degree, self.mode)?);
        let model = Model::new(disc, self.params())?;
        let mut sc = Scenario::new(Arc::new(model), self.boundary.clone(), self.final_time, dt)?;
        sc.integrator = self.integrator;
        sc.snapshot_every = self.snapshot_every;
        Ok(sc)
    }

    pub fn boundary_signal(&self, vertex: &str) -> Option<&Signal> {
        self.boundary.iter().find(|(v, _)| v == vertex).map(|(_, s)| s)
    }
}
