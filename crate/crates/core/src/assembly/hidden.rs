//! Hidden algebraic equations of the semidiscrete system.
//!
//! The pressure mass matrix of an edge maps `N_e k + 1` continuous
//! coefficients onto `N_e k` test rows, so the pressure equations have a
//! left null direction per edge: a broken test function `q_e` whose mass
//! row only sees the two end values of `p`. Combinations of these that
//! cancel at every junction contain no time derivative of an unknown; they
//! are the algebraic part of the system. Their count is `|E| - |V_0|`.

use super::discretization::Discretization;
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::topology::Sign;

#[derive(Debug, Clone)]
pub struct HiddenConstraints {
    /// Test-row weights, one list per constraint.
    rows: Vec<Vec<(usize, f64)>>,
    /// Test row that each constraint replaces in the step system.
    pivots: Vec<usize>,
    /// `(boundary vertex, weight)` of the boundary-state rate term.
    boundary: Vec<Vec<(usize, f64)>>,
    /// `W K`, the weighted stiffness rows.
    operator: CsrMatrix,
}

/// Per-edge left null vector of the pressure mass rows and its end weights.
struct EdgeFunctional {
    weights: Vec<(usize, f64)>,
    tail: f64,
    head: f64,
}

impl HiddenConstraints {
    /// `mass` and `stiffness` act on broken coefficients; only the pressure
    /// rows are used, which are linear in every model.
    pub fn new(disc: &Discretization, mass: &CsrMatrix, stiffness: &CsrMatrix) -> Self {
        let graph = disc.graph();
        let k = disc.degree();
        let edges: Vec<EdgeFunctional> = disc
            .dofmap()
            .edges()
            .iter()
            .map(|lay| edge_functional(mass, lay, k))
            .collect();

        let interior = graph.interior_vertices();
        let mut junction = vec![vec![0.0; edges.len()]; interior.len()];
        for (row, &v) in junction.iter_mut().zip(interior) {
            for &(e, s) in graph.incident_edges(v) {
                row[e] += match s {
                    Sign::Minus => edges[e].tail,
                    Sign::Plus => edges[e].head,
                };
            }
        }
        let (combos, free) = null_space(junction, edges.len());

        let mut rows = Vec::with_capacity(combos.len());
        let mut pivots = Vec::with_capacity(combos.len());
        let mut boundary = Vec::with_capacity(combos.len());
        for (c, &f) in combos.iter().zip(&free) {
            let mut w = Vec::new();
            for (e, &ce) in c.iter().enumerate() {
                if ce != 0.0 {
                    w.extend(edges[e].weights.iter().map(|&(r, x)| (r, ce * x)));
                }
            }
            // the free edge belongs to this combination only
            let pivot = edges[f]
                .weights
                .iter()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|&(r, _)| r)
                .expect("edge has test rows");
            let b: Vec<(usize, f64)> = graph
                .boundary_vertices()
                .iter()
                .flat_map(|&v| graph.incident_edges(v).iter().map(move |&(e, s)| (v, e, s)))
                .filter(|&(_, e, _)| c[e] != 0.0)
                .map(|(v, e, s)| {
                    let end = match s {
                        Sign::Minus => edges[e].tail,
                        Sign::Plus => edges[e].head,
                    };
                    (v, c[e] * end)
                })
                .collect();
            rows.push(w);
            pivots.push(pivot);
            boundary.push(b);
        }

        let mut op = TripletBuilder::new(rows.len(), stiffness.ncols());
        for (i, w) in rows.iter().enumerate() {
            for &(r, x) in w {
                for (c, v) in stiffness.row(r) {
                    op.push(i, c, x * v);
                }
            }
        }
        Self {
            rows,
            pivots,
            boundary,
            operator: op.into_csr(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// `W K` on broken coefficients.
    pub fn operator(&self) -> &CsrMatrix {
        &self.operator
    }

    /// `W (K u - F) + sum_v c_v dt u_v`, where `rate(v)` is the time
    /// derivative of the boundary state at vertex `v`.
    pub fn residual(&self, state: &[f64], load: Option<&[f64]>, rate: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let mut r = self.operator.mul_vec(state);
        for (i, ri) in r.iter_mut().enumerate() {
            if let Some(f) = load {
                *ri -= self.rows[i].iter().map(|&(j, w)| w * f[j]).sum::<f64>();
            }
            *ri += self.boundary[i].iter().map(|&(v, w)| w * rate(v)).sum::<f64>();
        }
        r
    }

    /// `W y` for a vector on the test rows.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|w| w.iter().map(|&(j, x)| x * y[j]).sum())
            .collect()
    }
}

fn edge_functional(mass: &CsrMatrix, lay: &super::EdgeLayout, k: usize) -> EdgeFunctional {
    let n = lay.n_elements;
    let mut local = Vec::with_capacity(n);
    let mut scale = vec![1.0; n];
    for j in 0..n {
        let block: Vec<Vec<f64>> = (0..k)
            .map(|l| {
                let r = lay.pressure_test(j * k + l);
                (0..=k).map(|c| mass.get(r, lay.pressure(j * k + c))).collect()
            })
            .collect();
        let v = left_null_vector(&block);
        let end = |c: usize| v.iter().zip(&block).map(|(x, row)| x * row[c]).sum::<f64>();
        let (tail, head) = (end(0), end(k));
        local.push((v, tail, head));
    }
    for j in 1..n {
        scale[j] = -scale[j - 1] * local[j - 1].2 / local[j].1;
    }
    let max = local
        .iter()
        .zip(&scale)
        .flat_map(|((v, _, _), s)| v.iter().map(move |x| (x * s).abs()))
        .fold(0.0f64, f64::max);
    let mut weights = Vec::with_capacity(n * k);
    for (j, ((v, _, _), s)) in local.iter().zip(&scale).enumerate() {
        for (l, x) in v.iter().enumerate() {
            weights.push((lay.pressure_test(j * k + l), x * s / max));
        }
    }
    EdgeFunctional {
        weights,
        tail: local[0].1 * scale[0] / max,
        head: local[n - 1].2 * scale[n - 1] / max,
    }
}

/// `v` with `v^T B[:, 1..k] = 0` for a `k x (k + 1)` element block.
fn left_null_vector(block: &[Vec<f64>]) -> Vec<f64> {
    let k = block.len();
    (0..k)
        .map(|i| {
            let minor: Vec<Vec<f64>> = block
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != i)
                .map(|(_, row)| row[1..k].to_vec())
                .collect();
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * determinant(minor)
        })
        .collect()
}

fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for j in c..n {
                a[r][j] -= f * a[c][j];
            }
        }
    }
    det
}

/// Basis of `{c : A c = 0}` from the reduced row echelon form, together with
/// the free column that each basis vector owns (value 1 there, 0 in the
/// other basis vectors).
fn null_space(mut a: Vec<Vec<f64>>, ncols: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let tol = 1e-12 * a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let p = (r..a.len()).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c].abs() <= tol {
            continue;
        }
        a.swap(p, r);
        let d = a[r][c];
        for x in a[r].iter_mut() {
            *x /= d;
        }
        for i in 0..a.len() {
            if i != r && a[i][c] != 0.0 {
                let f = a[i][c];
                for j in 0..ncols {
                    a[i][j] -= f * a[r][j];
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivot_cols.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![0.0; ncols];
            v[f] = 1.0;
            for (row, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -a[row][f];
            }
            v
        })
        .collect();
    (basis, free)
}
