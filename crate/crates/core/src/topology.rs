//! Directed metric graphs modelling pipe networks.
//!
//! Every edge `e = (tail, head)` is identified with the interval `[0, length]`,
//! oriented from tail to head. The incidence value `n^e(v)` is `-1` at the
//! tail and `+1` at the head. Vertices with a single incident edge are
//! boundary vertices; all others are interior junctions.

use std::collections::{HashMap, VecDeque};
use std::path::Path;

use crate::error::{Error, Result};

/// Incidence of an edge at one of its end vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    /// The vertex is the tail of the edge (`x = 0`).
    Minus,
    /// The vertex is the head of the edge (`x = length`).
    Plus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub length: f64,
}

/// Immutable network graph with dense vertex and edge indices.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    star: Vec<Vec<(usize, Sign)>>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
}

/// One line of an edge list: `(edge id, tail id, head id, length)`.
pub type EdgeSpec = (String, String, String, f64);

impl NetworkGraph {
    /// Builds a graph from `(edge id, tail id, head id, length)` records.
    ///
    /// Vertices are numbered in order of first appearance.
    pub fn build(edge_list: &[EdgeSpec]) -> Result<Self> {
        if edge_list.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut vertices: Vec<String> = Vec::new();
        let mut vertex_index: HashMap<String, usize> = HashMap::new();
        let mut intern = |name: &str, vertices: &mut Vec<String>| -> usize {
            *vertex_index.entry(name.to_owned()).or_insert_with(|| {
                vertices.push(name.to_owned());
                vertices.len() - 1
            })
        };

        let mut edges = Vec::with_capacity(edge_list.len());
        let mut seen_edges = HashMap::new();
        for (id, tail, head, length) in edge_list {
            if seen_edges.insert(id.clone(), ()).is_some() {
                return Err(Error::DuplicateEdge(id.clone()));
            }
            if !(*length > 0.0) || !length.is_finite() {
                return Err(Error::NonpositiveLength {
                    edge: id.clone(),
                    length: *length,
                });
            }
            if tail == head {
                return Err(Error::SelfLoop {
                    edge: id.clone(),
                    vertex: tail.clone(),
                });
            }
            let t = intern(tail, &mut vertices);
            let h = intern(head, &mut vertices);
            edges.push(Edge {
                id: id.clone(),
                tail: t,
                head: h,
                length: *length,
            });
        }

        let mut star = vec![Vec::new(); vertices.len()];
        for (e, edge) in edges.iter().enumerate() {
            star[edge.tail].push((e, Sign::Minus));
            star[edge.head].push((e, Sign::Plus));
        }

        // breadth-first search from vertex 0
        let mut reached = vec![false; vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        reached[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(e, _) in &star[v] {
                let other = if edges[e].tail == v { edges[e].head } else { edges[e].tail };
                if !reached[other] {
                    reached[other] = true;
                    queue.push_back(other);
                }
            }
        }
        if let Some(v) = reached.iter().position(|r| !r) {
            return Err(Error::Disconnected {
                vertex: vertices[v].clone(),
            });
        }

        let (boundary, interior): (Vec<usize>, Vec<usize>) =
            (0..vertices.len()).partition(|&v| star[v].len() == 1);

        Ok(Self {
            vertices,
            edges,
            star,
            interior,
            boundary,
        })
    }

    /// Parses the line-oriented network format:
    /// `<edge_id> <tail_id> <head_id> <length>`, `#` starts a comment.
    pub fn parse(text: &str) -> std::result::Result<Self, NetworkParseError> {
        let mut list = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(NetworkParseError::Syntax {
                    line: lineno + 1,
                    message: format!("expected 4 fields, found {}", fields.len()),
                });
            }
            let length: f64 = fields[3].parse().map_err(|_| NetworkParseError::Syntax {
                line: lineno + 1,
                message: format!("invalid length `{}`", fields[3]),
            })?;
            list.push((
                fields[0].to_owned(),
                fields[1].to_owned(),
                fields[2].to_owned(),
                length,
            ));
        }
        Ok(Self::build(&list)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> std::result::Result<Self, NetworkParseError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| NetworkParseError::Io {
            path: path.as_ref().display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// The seven-pipe network used throughout the numerical experiments.
    pub fn fig1(length: f64) -> Self {
        let list: Vec<EdgeSpec> = [
            ("e1", "v1", "v2"),
            ("e2", "v2", "v3"),
            ("e3", "v2", "v4"),
            ("e4", "v3", "v4"),
            ("e5", "v3", "v5"),
            ("e6", "v4", "v5"),
            ("e7", "v5", "v6"),
        ]
        .iter()
        .map(|(e, t, h)| (e.to_string(), t.to_string(), h.to_string(), length))
        .collect();
        Self::build(&list).expect("fixed network is valid")
    }

    /// A single pipe `v1 -> v2`.
    pub fn single_pipe(length: f64) -> Result<Self> {
        Self::build(&[("e1".into(), "v1".into(), "v2".into(), length)])
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVertex(name.to_owned()))
    }

    pub fn edge_index(&self, name: &str) -> Result<usize> {
        self.edges
            .iter()
            .position(|e| e.id == name)
            .ok_or_else(|| Error::UnknownEdge(name.to_owned()))
    }

    /// Interior (junction) vertices, ascending.
    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior
    }

    /// Boundary vertices (exactly one incident edge), ascending.
    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.star[v].len() == 1
    }

    /// Incidence value `n^e(v)`, or `None` if `e` does not touch `v`.
    pub fn incidence(&self, e: usize, v: usize) -> Option<Sign> {
        let edge = &self.edges[e];
        if edge.tail == v {
            Some(Sign::Minus)
        } else if edge.head == v {
            Some(Sign::Plus)
        } else {
            None
        }
    }

    /// Edges touching `v` together with their incidence sign, in edge order.
    pub fn incident_edges(&self, v: usize) -> &[(usize, Sign)] {
        &self.star[v]
    }

    /// Same as [`incident_edges`](Self::incident_edges) but by vertex name.
    pub fn incident_edges_of(&self, name: &str) -> Result<Vec<(String, Sign)>> {
        let v = self.vertex_index(name)?;
        Ok(self.star[v]
            .iter()
            .map(|&(e, s)| (self.edges[e].id.clone(), s))
            .collect())
    }

    /// Dense incidence matrix with rows indexed by vertices and columns by edges.
    pub fn incidence_matrix(&self) -> Vec<Vec<f64>> {
        let mut n = vec![vec![0.0; self.edges.len()]; self.vertices.len()];
        for (e, edge) in self.edges.iter().enumerate() {
            n[edge.tail][e] = -1.0;
            n[edge.head][e] = 1.0;
        }
        n
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetworkParseError {
    #[error("network file line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Graph(#[from] Error),
}
