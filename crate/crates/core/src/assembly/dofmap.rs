//! Global numbering of the trial unknowns.
//!
//! All operators are assembled on the *broken* trial space, in which every
//! edge carries its own `N_e k + 1` pressure and `N_e k + 1` flux
//! coefficients. A [`DofMap`] relates the actual unknowns to that space:
//!
//! * **monolithic**: pressure continuity at junctions and flux balance are
//!   built into the basis; boundary pressures are removed from the unknowns
//!   and supplied through a lifting vector;
//! * **hybrid**: the unknowns are the broken coefficients plus one pressure
//!   value per junction, and the coupling and boundary conditions are extra
//!   algebraic rows.

use crate::error::{Error, Result};
use crate::fem::EdgeMesh;
use crate::topology::{NetworkGraph, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingMode {
    Monolithic,
    Hybrid,
}

/// Offsets of one edge inside the broken trial and test vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeLayout {
    pub n_elements: usize,
    /// `N_e k + 1`
    pub n_nodes: usize,
    /// Pressure coefficients start here; flux coefficients follow after `n_nodes`.
    pub trial_offset: usize,
    /// Pressure-equation tests start here; flux-equation tests follow after `N_e k`.
    pub test_offset: usize,
}

impl EdgeLayout {
    pub fn n_tests(&self) -> usize {
        self.n_nodes - 1
    }

    pub fn pressure(&self, node: usize) -> usize {
        self.trial_offset + node
    }

    pub fn flux(&self, node: usize) -> usize {
        self.trial_offset + self.n_nodes + node
    }

    pub fn pressure_test(&self, i: usize) -> usize {
        self.test_offset + i
    }

    pub fn flux_test(&self, i: usize) -> usize {
        self.test_offset + self.n_tests() + i
    }

    /// Local node sitting at the vertex with the given incidence.
    pub fn end_node(&self, sign: Sign) -> usize {
        match sign {
            Sign::Minus => 0,
            Sign::Plus => self.n_nodes - 1,
        }
    }
}

/// Right-hand side of an explicit constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintRhs {
    Zero,
    /// Prescribed boundary value at this vertex.
    Boundary(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub entries: Vec<(usize, f64)>,
    pub rhs: ConstraintRhs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    mode: CouplingMode,
    degree: usize,
    edges: Vec<EdgeLayout>,
    n_broken: usize,
    n_test: usize,
    n_unknowns: usize,
    dim_pressure: usize,
    dim_flux: usize,
    expand: Vec<Vec<(usize, f64)>>,
    dirichlet: Vec<(usize, usize)>,
    constraints: Vec<Constraint>,
    vertex_pressure: Vec<(usize, usize)>,
}

impl DofMap {
    pub fn build(
        graph: &NetworkGraph,
        meshes: &[EdgeMesh],
        degree: usize,
        mode: CouplingMode,
    ) -> Result<Self> {
        if degree == 0 {
            return Err(Error::DegreeZero);
        }
        if meshes.len() < graph.num_edges() {
            return Err(Error::MissingMesh(
                graph.edge(meshes.len()).id.clone(),
            ));
        }
        let mut edges = Vec::with_capacity(graph.num_edges());
        let (mut trial, mut test) = (0, 0);
        for (e, mesh) in meshes.iter().enumerate().take(graph.num_edges()) {
            let len = graph.edge(e).length;
            if (mesh.length() - len).abs() > 1e-12 * len {
                return Err(Error::InvalidMesh(format!(
                    "mesh of edge `{}` covers [0, {}] but the pipe has length {}",
                    graph.edge(e).id,
                    mesh.length(),
                    len
                )));
            }
            let n_elements = mesh.num_elements();
            let n_nodes = n_elements * degree + 1;
            edges.push(EdgeLayout {
                n_elements,
                n_nodes,
                trial_offset: trial,
                test_offset: test,
            });
            trial += 2 * n_nodes;
            test += 2 * (n_nodes - 1);
        }
        let mut map = Self {
            mode,
            degree,
            edges,
            n_broken: trial,
            n_test: test,
            n_unknowns: 0,
            dim_pressure: 0,
            dim_flux: 0,
            expand: vec![Vec::new(); trial],
            dirichlet: Vec::new(),
            constraints: Vec::new(),
            vertex_pressure: Vec::new(),
        };
        match mode {
            CouplingMode::Monolithic => map.number_monolithic(graph),
            CouplingMode::Hybrid => map.number_hybrid(graph),
        }
        Ok(map)
    }

    fn number_monolithic(&mut self, graph: &NetworkGraph) {
        let mut next = 0;
        for lay in &self.edges {
            for j in 1..lay.n_nodes - 1 {
                self.expand[lay.pressure(j)].push((next, 1.0));
                next += 1;
            }
        }
        for &v in graph.interior_vertices() {
            for &(e, s) in graph.incident_edges(v) {
                let lay = self.edges[e];
                self.expand[lay.pressure(lay.end_node(s))].push((next, 1.0));
            }
            self.vertex_pressure.push((v, next));
            next += 1;
        }
        for &v in graph.boundary_vertices() {
            let (e, s) = graph.incident_edges(v)[0];
            let lay = self.edges[e];
            self.dirichlet.push((lay.pressure(lay.end_node(s)), v));
        }
        self.dim_pressure = next;

        for lay in &self.edges {
            for j in 1..lay.n_nodes - 1 {
                self.expand[lay.flux(j)].push((next, 1.0));
                next += 1;
            }
        }
        for &v in graph.boundary_vertices() {
            let (e, s) = graph.incident_edges(v)[0];
            let lay = self.edges[e];
            self.expand[lay.flux(lay.end_node(s))].push((next, 1.0));
            next += 1;
        }
        for &v in graph.interior_vertices() {
            // the first incident flux is eliminated by the balance
            // sum_e n^e(v) m^e(v) = 0
            let star = graph.incident_edges(v);
            let (e0, s0) = star[0];
            let pivot = self.edges[e0].flux(self.edges[e0].end_node(s0));
            for &(e, s) in &star[1..] {
                let lay = self.edges[e];
                self.expand[lay.flux(lay.end_node(s))].push((next, 1.0));
                self.expand[pivot].push((next, -s0.value() * s.value()));
                next += 1;
            }
        }
        self.dim_flux = next - self.dim_pressure;
        self.n_unknowns = next;
    }

    fn number_hybrid(&mut self, graph: &NetworkGraph) {
        for (b, ex) in self.expand.iter_mut().enumerate() {
            ex.push((b, 1.0));
        }
        let mut next = self.n_broken;
        for &v in graph.interior_vertices() {
            self.vertex_pressure.push((v, next));
            for &(e, s) in graph.incident_edges(v) {
                let lay = self.edges[e];
                self.constraints.push(Constraint {
                    entries: vec![(lay.pressure(lay.end_node(s)), 1.0), (next, -1.0)],
                    rhs: ConstraintRhs::Zero,
                });
            }
            next += 1;
        }
        for &v in graph.interior_vertices() {
            let entries = graph
                .incident_edges(v)
                .iter()
                .map(|&(e, s)| (self.edges[e].flux(self.edges[e].end_node(s)), s.value()))
                .collect();
            self.constraints.push(Constraint {
                entries,
                rhs: ConstraintRhs::Zero,
            });
        }
        for &v in graph.boundary_vertices() {
            let (e, s) = graph.incident_edges(v)[0];
            let lay = self.edges[e];
            self.constraints.push(Constraint {
                entries: vec![(lay.pressure(lay.end_node(s)), 1.0)],
                rhs: ConstraintRhs::Boundary(v),
            });
        }
        self.dim_pressure = self.edges.iter().map(|l| l.n_nodes).sum();
        self.dim_flux = self.dim_pressure;
        self.n_unknowns = next;
    }

    pub fn mode(&self) -> CouplingMode {
        self.mode
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn edge(&self, e: usize) -> &EdgeLayout {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[EdgeLayout] {
        &self.edges
    }

    /// Length of the broken trial vector.
    pub fn n_broken(&self) -> usize {
        self.n_broken
    }

    /// Number of test functions (rows of the Petrov-Galerkin equations).
    pub fn n_test(&self) -> usize {
        self.n_test
    }

    /// Number of unknowns of the square system.
    pub fn n_unknowns(&self) -> usize {
        self.n_unknowns
    }

    /// Number of equations of the square system (tests plus constraint rows).
    pub fn n_equations(&self) -> usize {
        self.n_test + self.constraints.len()
    }

    /// `dim Q_h` (monolithic) or the broken pressure count (hybrid).
    pub fn dim_pressure(&self) -> usize {
        self.dim_pressure
    }

    /// `dim V_h` (monolithic) or the broken flux count (hybrid).
    pub fn dim_flux(&self) -> usize {
        self.dim_flux
    }

    /// For every broken coefficient, the unknowns it is composed of.
    pub fn expansion(&self, broken: usize) -> &[(usize, f64)] {
        &self.expand[broken]
    }

    /// `(broken pressure coefficient, boundary vertex)` pairs filled by the lifting.
    pub fn dirichlet_slots(&self) -> &[(usize, usize)] {
        &self.dirichlet
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// `(junction vertex, unknown)` of the shared junction pressures.
    pub fn vertex_pressures(&self) -> &[(usize, usize)] {
        &self.vertex_pressure
    }

    /// Broken coefficients `E x + lift`, where `boundary(v)` gives the
    /// prescribed value at boundary vertex `v` (used in monolithic mode only).
    pub fn expand(&self, x: &[f64], boundary: &dyn Fn(usize) -> f64) -> Vec<f64> {
        assert_eq!(x.len(), self.n_unknowns);
        let mut u: Vec<f64> = self
            .expand
            .iter()
            .map(|ex| ex.iter().map(|&(c, w)| w * x[c]).sum())
            .collect();
        for &(b, v) in &self.dirichlet {
            u[b] = boundary(v);
        }
        u
    }

    /// Inverse of [`expand`](Self::expand) for broken vectors that satisfy the
    /// coupling conditions. Hybrid junction pressures are read from the
    /// first incident edge.
    pub fn restrict(&self, broken: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_unknowns];
        for (b, ex) in self.expand.iter().enumerate() {
            if let [(c, w)] = ex.as_slice() {
                if *w == 1.0 {
                    x[*c] = broken[b];
                }
            }
        }
        if self.mode == CouplingMode::Hybrid {
            for (i, &(_, unknown)) in self.vertex_pressure.iter().enumerate() {
                // the first constraint row of each junction references it
                let row = self
                    .constraints
                    .iter()
                    .find(|c| c.entries.len() == 2 && c.entries[1].0 == unknown)
                    .unwrap_or_else(|| panic!("junction {i} has no constraint"));
                x[unknown] = broken[row.entries[0].0];
            }
        }
        x
    }

    /// Appends `alpha * A E` to `out`, where `A` acts on broken coefficients.
    pub fn compose_into(
        &self,
        a: &crate::sparse::CsrMatrix,
        alpha: f64,
        out: &mut crate::sparse::TripletBuilder,
    ) {
        for r in 0..a.nrows() {
            for (b, v) in a.row(r) {
                for &(c, w) in &self.expand[b] {
                    out.push(r, c, alpha * v * w);
                }
            }
        }
    }

    /// Residuals of the explicit constraint rows, `C x - rhs`.
    pub fn constraint_residual(&self, x: &[f64], boundary: &dyn Fn(usize) -> f64) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| {
                let lhs: f64 = c.entries.iter().map(|&(j, w)| w * x[j]).sum();
                lhs - match c.rhs {
                    ConstraintRhs::Zero => 0.0,
                    ConstraintRhs::Boundary(v) => boundary(v),
                }
            })
            .collect()
    }
}
