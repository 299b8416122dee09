//! Trial and test bases on the reference element.
//!
//! Trial functions of degree `k` are Lagrange polynomials at the Gauss-Lobatto
//! nodes, so the first and last local coefficients are the values at the
//! element end points and continuity across elements is enforced by sharing
//! them. Test functions of degree `k - 1` are the Legendre polynomials
//! `P_0, ..., P_{k-1}`, discontinuous across elements.

use super::quadrature::{gauss_lobatto_points, gauss_rule, legendre_values, QuadratureRule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    degree: usize,
    nodes: Vec<f64>,
    // barycentric weights of the Lagrange basis
    bary: Vec<f64>,
}

impl BasisSpec {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::DegreeZero);
        }
        let nodes = gauss_lobatto_points(degree);
        let bary = nodes
            .iter()
            .enumerate()
            .map(|(j, &xj)| {
                let prod: f64 = nodes
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != j)
                    .map(|(_, &xm)| xj - xm)
                    .product();
                1.0 / prod
            })
            .collect();
        Ok(Self { degree, nodes, bary })
    }

    /// Trial degree `k`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Local trial dimension `k + 1`.
    pub fn trial_dim(&self) -> usize {
        self.degree + 1
    }

    /// Local test dimension `k`.
    pub fn test_dim(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Values of all trial functions at `xi`.
    pub fn trial_values(&self, xi: f64) -> Vec<f64> {
        let n = self.nodes.len();
        if let Some(j) = self.nodes.iter().position(|&x| x == xi) {
            let mut v = vec![0.0; n];
            v[j] = 1.0;
            return v;
        }
        let ell: f64 = self.nodes.iter().map(|&x| xi - x).product();
        (0..n).map(|j| ell * self.bary[j] / (xi - self.nodes[j])).collect()
    }

    /// Reference derivatives `d/dxi` of all trial functions at `xi`.
    pub fn trial_derivatives(&self, xi: f64) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|j| {
                // l_j'(xi) = sum_{m != j} 1/(x_j - x_m) prod_{r != j,m} (xi - x_r)/(x_j - x_r)
                let mut total = 0.0;
                for m in 0..n {
                    if m == j {
                        continue;
                    }
                    let mut term = 1.0 / (self.nodes[j] - self.nodes[m]);
                    for r in 0..n {
                        if r != j && r != m {
                            term *= (xi - self.nodes[r]) / (self.nodes[j] - self.nodes[r]);
                        }
                    }
                    total += term;
                }
                total
            })
            .collect()
    }

    /// Values of the test functions `P_0, ..., P_{k-1}` at `xi`.
    pub fn test_values(&self, xi: f64) -> Vec<f64> {
        let mut p = legendre_values(self.degree - 1, xi);
        p.truncate(self.degree);
        p
    }

    /// Reference `L^2` norm squared of test function `i`: `2 / (2i + 1)`.
    pub fn test_norm_sq(i: usize) -> f64 {
        2.0 / (2 * i + 1) as f64
    }
}

/// Reference-element tables for a basis and a quadrature rule.
///
/// Physical integrals on an element of size `h` are obtained from the
/// reference ones: mass-type terms scale with `h/2`, derivative terms are
/// scale invariant (`d/dx = 2/h d/dxi` and `dx = h/2 dxi`).
#[derive(Debug, Clone)]
pub struct ElementTables {
    pub basis: BasisSpec,
    pub rule: QuadratureRule,
    /// `trial[q][j]`: trial function `j` at quadrature point `q`.
    pub trial: Vec<Vec<f64>>,
    /// `dtrial[q][j]`: reference derivative of trial function `j`.
    pub dtrial: Vec<Vec<f64>>,
    /// `test[q][i]`: test function `i` at quadrature point `q`.
    pub test: Vec<Vec<f64>>,
    /// `int psi_i phi_j dxi` (exact).
    pub mass: Vec<Vec<f64>>,
    /// `int psi_i phi_j' dxi` (exact).
    pub grad: Vec<Vec<f64>>,
    /// Legendre coefficients of the `L^2` projection of `phi_j`: `proj[i][j]`.
    pub proj: Vec<Vec<f64>>,
    /// `proj_at[q][j]`: value of the projected trial function `j` at point `q`.
    pub proj_at: Vec<Vec<f64>>,
}

impl ElementTables {
    /// Tables with `n_points` Gauss points; `n_points >= k + 1` keeps the
    /// stored mass and gradient integrals exact.
    pub fn new(basis: BasisSpec, n_points: usize) -> Self {
        let k = basis.degree();
        let rule = gauss_rule(n_points);
        let exact = gauss_rule(k + 1);

        let integrate = |f: &dyn Fn(f64) -> f64| exact.integrate(f);
        let mass: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                (0..=k)
                    .map(|j| integrate(&|x| basis.test_values(x)[i] * basis.trial_values(x)[j]))
                    .collect()
            })
            .collect();
        let grad: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                (0..=k)
                    .map(|j| {
                        integrate(&|x| basis.test_values(x)[i] * basis.trial_derivatives(x)[j])
                    })
                    .collect()
            })
            .collect();
        let proj: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                (0..=k)
                    .map(|j| mass[i][j] / BasisSpec::test_norm_sq(i))
                    .collect()
            })
            .collect();

        let trial: Vec<Vec<f64>> = rule.points.iter().map(|&x| basis.trial_values(x)).collect();
        let dtrial: Vec<Vec<f64>> = rule
            .points
            .iter()
            .map(|&x| basis.trial_derivatives(x))
            .collect();
        let test: Vec<Vec<f64>> = rule.points.iter().map(|&x| basis.test_values(x)).collect();
        let proj_at = test
            .iter()
            .map(|psi| {
                (0..=k)
                    .map(|j| (0..k).map(|i| proj[i][j] * psi[i]).sum())
                    .collect()
            })
            .collect();

        Self {
            basis,
            rule,
            trial,
            dtrial,
            test,
            mass,
            grad,
            proj,
            proj_at,
        }
    }

    /// Tables with the default `k + 2` point rule.
    pub fn with_default_rule(basis: BasisSpec) -> Self {
        let n = basis.degree() + 2;
        Self::new(basis, n)
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn num_points(&self) -> usize {
        self.rule.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_basis_is_nodal_and_partition_of_unity() {
        for k in 1..=5 {
            let b = BasisSpec::new(k).unwrap();
            for (j, &x) in b.nodes().iter().enumerate() {
                let v = b.trial_values(x);
                for (m, vm) in v.iter().enumerate() {
                    assert_eq!(*vm, if m == j { 1.0 } else { 0.0 });
                }
            }
            for &x in &[-0.77, -0.1, 0.33, 0.9] {
                let s: f64 = b.trial_values(x).iter().sum();
                assert!((s - 1.0).abs() < 1e-14);
                let ds: f64 = b.trial_derivatives(x).iter().sum();
                assert!(ds.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trial_derivative_matches_finite_difference() {
        let b = BasisSpec::new(4).unwrap();
        let x = 0.237;
        let eps = 1e-6;
        let (vp, vm) = (b.trial_values(x + eps), b.trial_values(x - eps));
        for (j, d) in b.trial_derivatives(x).iter().enumerate() {
            assert!((d - (vp[j] - vm[j]) / (2.0 * eps)).abs() < 1e-8);
        }
    }

    #[test]
    fn degree_zero_rejected() {
        assert_eq!(BasisSpec::new(0), Err(Error::DegreeZero));
    }

    #[test]
    fn linear_mass_table() {
        // psi_0 = 1 against the two hats: int_{-1}^{1} (1 -+ x)/2 = 1
        let t = ElementTables::with_default_rule(BasisSpec::new(1).unwrap());
        assert_eq!(t.mass.len(), 1);
        assert!((t.mass[0][0] - 1.0).abs() < 1e-15 && (t.mass[0][1] - 1.0).abs() < 1e-15);
        assert!((t.grad[0][0] + 1.0).abs() < 1e-15 && (t.grad[0][1] - 1.0).abs() < 1e-15);
        assert!((t.proj[0][0] - 0.5).abs() < 1e-15);
    }
}
