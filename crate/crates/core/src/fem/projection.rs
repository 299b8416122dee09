//! The `H^1` projection `I_h^k` onto continuous piecewise polynomials and the
//! `L^2` projection `pi_h^{k-1}` onto discontinuous ones, together with the
//! evaluation helpers needed to compare discrete fields.
//!
//! Both projections act element by element. They satisfy the commuting
//! relation `d/dx I_h^k v = pi_h^{k-1} d/dx v`.
//!
//! Coefficient layout on an edge with `N` elements: trial coefficient of
//! local node `j` in element `n` is stored at `n * k + j` (`N k + 1` in
//! total, neighbouring elements share the end node); test coefficient of
//! Legendre mode `i` in element `n` at `n * k + i` (`N k` in total).

use super::basis::BasisSpec;
use super::mesh::EdgeMesh;
use super::quadrature::{gauss_rule, legendre_values, QuadratureRule};

/// Extra Gauss points used when projecting general (non-polynomial) functions.
const PROJECTION_EXTRA_POINTS: usize = 8;

fn projection_rule(k: usize) -> QuadratureRule {
    gauss_rule(k + PROJECTION_EXTRA_POINTS)
}

/// Legendre coefficients of `pi_h^{k-1} v` (test-space coefficients).
pub fn l2_project(v: &dyn Fn(f64) -> f64, mesh: &EdgeMesh, basis: &BasisSpec) -> Vec<f64> {
    let k = basis.degree();
    let rule = projection_rule(k);
    let mut out = vec![0.0; mesh.num_elements() * k];
    for n in 0..mesh.num_elements() {
        for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
            let val = v(mesh.map(n, xi));
            for (i, p) in basis.test_values(xi).iter().enumerate() {
                out[n * k + i] += w * val * p / BasisSpec::test_norm_sq(i);
            }
        }
    }
    out
}

/// Nodal coefficients of `I_h^k v`.
///
/// The values at the breakpoints are `v(x_n)`; inside every element the
/// derivative equals the `L^2` projection of `dv` onto `P_{k-1}`, where the
/// mean of the derivative is taken exactly from the end-point values.
pub fn h1_project(
    v: &dyn Fn(f64) -> f64,
    dv: &dyn Fn(f64) -> f64,
    mesh: &EdgeMesh,
    basis: &BasisSpec,
) -> Vec<f64> {
    let k = basis.degree();
    let rule = projection_rule(k);
    let mut out = vec![0.0; mesh.num_elements() * k + 1];
    for n in 0..mesh.num_elements() {
        let (a, b) = mesh.element(n);
        let half = 0.5 * (b - a);
        let (va, vb) = (v(a), v(b));
        // Legendre coefficients of dv/dxi = half * dv/dx
        let mut c = vec![0.0; k];
        c[0] = 0.5 * (vb - va);
        for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
            let d = half * dv(mesh.map(n, xi));
            let p = basis.test_values(xi);
            for i in 1..k {
                c[i] += w * d * p[i] / BasisSpec::test_norm_sq(i);
            }
        }
        out[n * k] = va;
        out[n * k + k] = vb;
        for j in 1..k {
            out[n * k + j] = va + integrate_legendre_series(&c, basis.nodes()[j]);
        }
    }
    out
}

/// `int_{-1}^{xi} sum_i c_i P_i(s) ds`.
fn integrate_legendre_series(c: &[f64], xi: f64) -> f64 {
    let p = legendre_values(c.len(), xi);
    let mut s = c[0] * (xi + 1.0);
    for i in 1..c.len() {
        // (P_{i+1} - P_{i-1}) / (2i + 1) is the antiderivative of P_i vanishing at -1
        s += c[i] * (p[i + 1] - p[i - 1]) / (2 * i + 1) as f64;
    }
    s
}

/// Value of a trial field at reference point `xi` of element `n`.
pub fn eval_trial_local(coeffs: &[f64], basis: &BasisSpec, n: usize, xi: f64) -> f64 {
    let k = basis.degree();
    basis
        .trial_values(xi)
        .iter()
        .enumerate()
        .map(|(j, phi)| coeffs[n * k + j] * phi)
        .sum()
}

/// Value of a trial field at physical coordinate `x`.
pub fn eval_trial(coeffs: &[f64], mesh: &EdgeMesh, basis: &BasisSpec, x: f64) -> f64 {
    let (n, xi) = mesh.locate(x);
    eval_trial_local(coeffs, basis, n, xi)
}

/// Value of a test-space (Legendre) field at reference point `xi` of element `n`.
pub fn eval_test_local(coeffs: &[f64], basis: &BasisSpec, n: usize, xi: f64) -> f64 {
    let k = basis.degree();
    basis
        .test_values(xi)
        .iter()
        .enumerate()
        .map(|(i, p)| coeffs[n * k + i] * p)
        .sum()
}

pub fn eval_test(coeffs: &[f64], mesh: &EdgeMesh, basis: &BasisSpec, x: f64) -> f64 {
    let (n, xi) = mesh.locate(x);
    eval_test_local(coeffs, basis, n, xi)
}

/// Legendre coefficients of `d/dx` of a trial field (exact, the derivative
/// lies in the test space).
pub fn derivative_coefficients(coeffs: &[f64], mesh: &EdgeMesh, basis: &BasisSpec) -> Vec<f64> {
    let k = basis.degree();
    let exact = gauss_rule(k + 1);
    let mut out = vec![0.0; mesh.num_elements() * k];
    for n in 0..mesh.num_elements() {
        let scale = 2.0 / mesh.element_size(n);
        for (&xi, &w) in exact.points.iter().zip(&exact.weights) {
            let du: f64 = basis
                .trial_derivatives(xi)
                .iter()
                .enumerate()
                .map(|(j, d)| coeffs[n * k + j] * d)
                .sum();
            for (i, p) in basis.test_values(xi).iter().enumerate() {
                out[n * k + i] += w * scale * du * p / BasisSpec::test_norm_sq(i);
            }
        }
    }
    out
}

/// Legendre coefficients of `pi_h^{k-1}` applied to a trial field (exact).
pub fn project_trial(coeffs: &[f64], mesh: &EdgeMesh, basis: &BasisSpec) -> Vec<f64> {
    let k = basis.degree();
    let exact = gauss_rule(k + 1);
    let mut out = vec![0.0; mesh.num_elements() * k];
    for n in 0..mesh.num_elements() {
        for (&xi, &w) in exact.points.iter().zip(&exact.weights) {
            let u = eval_trial_local(coeffs, basis, n, xi);
            for (i, p) in basis.test_values(xi).iter().enumerate() {
                out[n * k + i] += w * u * p / BasisSpec::test_norm_sq(i);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionKind {
    /// `I_h^k`
    H1,
    /// `pi_h^{k-1}`
    L2,
}

/// `||v - I_h^k v||` or `||v - pi_h^{k-1} v||`, integrated with `k + 2`
/// Gauss points per element.
pub fn projection_error(
    v: &dyn Fn(f64) -> f64,
    dv: &dyn Fn(f64) -> f64,
    mesh: &EdgeMesh,
    basis: &BasisSpec,
    which: ProjectionKind,
) -> f64 {
    let k = basis.degree();
    let rule = gauss_rule(k + 2);
    let coeffs = match which {
        ProjectionKind::H1 => h1_project(v, dv, mesh, basis),
        ProjectionKind::L2 => l2_project(v, mesh, basis),
    };
    let mut sum = 0.0;
    for n in 0..mesh.num_elements() {
        let half = 0.5 * mesh.element_size(n);
        for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
            let approx = match which {
                ProjectionKind::H1 => eval_trial_local(&coeffs, basis, n, xi),
                ProjectionKind::L2 => eval_test_local(&coeffs, basis, n, xi),
            };
            let e = v(mesh.map(n, xi)) - approx;
            sum += half * w * e * e;
        }
    }
    sum.sqrt()
}
