use std::sync::Arc;

use super::dofmap::{CouplingMode, DofMap};
use crate::error::{Error, Result};
use crate::fem::{BasisSpec, EdgeMesh, ElementTables};
use crate::topology::NetworkGraph;

/// Graph, per-edge meshes, element tables and numbering of one discrete problem.
#[derive(Debug, Clone)]
pub struct Discretization {
    graph: Arc<NetworkGraph>,
    meshes: Vec<EdgeMesh>,
    tables: ElementTables,
    dofmap: DofMap,
}

impl Discretization {
    pub fn new(
        graph: Arc<NetworkGraph>,
        meshes: Vec<EdgeMesh>,
        degree: usize,
        mode: CouplingMode,
    ) -> Result<Self> {
        let dofmap = DofMap::build(&graph, &meshes, degree, mode)?;
        let tables = ElementTables::with_default_rule(BasisSpec::new(degree)?);
        Ok(Self {
            graph,
            meshes,
            tables,
            dofmap,
        })
    }

    /// Uniform meshes with element size at most `h` on every edge.
    pub fn uniform(
        graph: Arc<NetworkGraph>,
        h: f64,
        degree: usize,
        mode: CouplingMode,
    ) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidMesh(format!("mesh size must be positive, got {h}")));
        }
        let meshes = graph
            .edges()
            .iter()
            .map(|e| EdgeMesh::with_max_size(e.length, h))
            .collect::<Result<Vec<_>>>()?;
        Self::new(graph, meshes, degree, mode)
    }

    /// The same problem on meshes with every element bisected.
    pub fn refined(&self) -> Self {
        let meshes = self.meshes.iter().map(EdgeMesh::refined).collect();
        Self::new(
            self.graph.clone(),
            meshes,
            self.degree(),
            self.dofmap.mode(),
        )
        .expect("refinement of a valid discretization is valid")
    }

    /// The same meshes with another coupling mode.
    pub fn with_mode(&self, mode: CouplingMode) -> Self {
        Self::new(self.graph.clone(), self.meshes.clone(), self.degree(), mode)
            .expect("valid discretization")
    }

    pub fn graph(&self) -> &NetworkGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<NetworkGraph> {
        &self.graph
    }

    pub fn meshes(&self) -> &[EdgeMesh] {
        &self.meshes
    }

    pub fn mesh(&self, e: usize) -> &EdgeMesh {
        &self.meshes[e]
    }

    pub fn tables(&self) -> &ElementTables {
        &self.tables
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.tables.basis
    }

    pub fn dofmap(&self) -> &DofMap {
        &self.dofmap
    }

    pub fn degree(&self) -> usize {
        self.tables.degree()
    }

    /// Largest element size over all edges.
    pub fn h(&self) -> f64 {
        self.meshes.iter().map(EdgeMesh::h).fold(0.0, f64::max)
    }

    pub fn pressure_coeffs<'a>(&self, broken: &'a [f64], e: usize) -> &'a [f64] {
        let lay = self.dofmap.edge(e);
        &broken[lay.pressure(0)..lay.pressure(0) + lay.n_nodes]
    }

    pub fn flux_coeffs<'a>(&self, broken: &'a [f64], e: usize) -> &'a [f64] {
        let lay = self.dofmap.edge(e);
        &broken[lay.flux(0)..lay.flux(0) + lay.n_nodes]
    }

    /// Legendre coefficients of `pi_h^{k-1}` of the pressure (in the
    /// pressure-test slots) and of the flux (in the flux-test slots).
    pub fn project_broken(&self, broken: &[f64]) -> Vec<f64> {
        let k = self.degree();
        let t = &self.tables;
        let mut out = vec![0.0; self.dofmap.n_test()];
        for lay in self.dofmap.edges() {
            for n in 0..lay.n_elements {
                for i in 0..k {
                    let (mut p, mut m) = (0.0, 0.0);
                    for j in 0..=k {
                        p += t.proj[i][j] * broken[lay.pressure(n * k + j)];
                        m += t.proj[i][j] * broken[lay.flux(n * k + j)];
                    }
                    out[lay.pressure_test(n * k + i)] = p;
                    out[lay.flux_test(n * k + i)] = m;
                }
            }
        }
        out
    }

    /// `a ||pi p||^2 + b ||pi m||^2` with per-edge weights.
    pub fn projected_energy(&self, broken: &[f64], a: &dyn Fn(usize) -> f64, b: &dyn Fn(usize) -> f64) -> f64 {
        let k = self.degree();
        let proj = self.project_broken(broken);
        let mut sum = 0.0;
        for (e, lay) in self.dofmap.edges().iter().enumerate() {
            for n in 0..lay.n_elements {
                let half = 0.5 * self.meshes[e].element_size(n);
                for i in 0..k {
                    let norm = half * BasisSpec::test_norm_sq(i);
                    let cp = proj[lay.pressure_test(n * k + i)];
                    let cm = proj[lay.flux_test(n * k + i)];
                    sum += norm * (a(e) * cp * cp + b(e) * cm * cm);
                }
            }
        }
        sum
    }

    /// Splits a broken coefficient vector into per-edge fields.
    pub fn edge_fields(&self, broken: &[f64]) -> EdgeFields {
        let n = self.graph.num_edges();
        EdgeFields {
            pressure: (0..n).map(|e| self.pressure_coeffs(broken, e).to_vec()).collect(),
            flux: (0..n).map(|e| self.flux_coeffs(broken, e).to_vec()).collect(),
        }
    }
}

/// Edgewise trial coefficients of pressure (or density) and flux.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFields {
    pub pressure: Vec<Vec<f64>>,
    pub flux: Vec<Vec<f64>>,
}

impl EdgeFields {
    /// Largest coefficient difference relative to the largest coefficient.
    pub fn relative_difference(&self, other: &EdgeFields) -> f64 {
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (a, b) in self
            .pressure
            .iter()
            .chain(&self.flux)
            .zip(other.pressure.iter().chain(&other.flux))
        {
            for (x, y) in a.iter().zip(b) {
                diff = diff.max((x - y).abs());
                scale = scale.max(x.abs()).max(y.abs());
            }
        }
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }

    pub fn map_pressure(mut self, f: impl Fn(usize, f64) -> f64) -> Self {
        for (e, p) in self.pressure.iter_mut().enumerate() {
            for v in p.iter_mut() {
                *v = f(e, *v);
            }
        }
        self
    }
}

/// Edgewise coefficients of a hybrid solution vector.
///
/// The broken part of a hybrid unknown vector already is the edgewise
/// representation; the junction pressures are redundant copies.
pub fn hybrid_to_monolithic(disc: &Discretization, unknowns: &[f64]) -> EdgeFields {
    assert_eq!(disc.dofmap().mode(), CouplingMode::Hybrid);
    disc.edge_fields(&unknowns[..disc.dofmap().n_broken()])
}
