//! Browser bindings. Each export wraps a plain function that is also
//! tested natively; results are flat `f64` arrays for easy plotting.

use std::sync::Arc;

use gasnet_core::assembly::CouplingMode;
use gasnet_core::harness::{run_manufactured, table1_params};
use gasnet_core::models::ModelKind;
use gasnet_core::timeloop::{integrate, steady_state, uniform_scenario, Signal};
use gasnet_core::topology::NetworkGraph;
use wasm_bindgen::prelude::*;

fn fig1_boundary(p1: f64, p6: Signal) -> Vec<(String, Signal)> {
    vec![("v1".into(), Arc::new(move |_| p1) as Signal), ("v6".into(), p6)]
}

/// Boundary fluxes of the seven-pipe network driven by
/// `p_v6 = 1 + amplitude sin(pi t)`, as rows `t, m_v1, m_v6`.
pub fn fig1_fluxes(kind: &str, h: f64, final_time: f64, amplitude: f64) -> Result<Vec<f64>, String> {
    let kind: ModelKind = kind.parse()?;
    if !(h > 0.0 && h <= 1.0) {
        return Err(format!("mesh size must lie in (0, 1], got {h}"));
    }
    if !(0.0..=50.0).contains(&final_time) {
        return Err(format!("final time must lie in [0, 50], got {final_time}"));
    }
    let p6: Signal = Arc::new(move |t: f64| 1.0 + amplitude * (std::f64::consts::PI * t).sin());
    let sc = uniform_scenario(
        Arc::new(NetworkGraph::fig1(1.0)),
        h,
        1,
        CouplingMode::Monolithic,
        |n| table1_params(kind, n),
        fig1_boundary(1.0, p6),
        final_time,
        h / 4.0,
    )
    .map_err(|e| e.to_string())?;
    let traj = integrate(&sc).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * traj.times.len());
    for (t, m) in traj.times.iter().zip(&traj.boundary_flux) {
        out.push(*t);
        out.extend_from_slice(m);
    }
    Ok(out)
}

/// Steady fluxes of the seven pipes (linear model, `d = 1`) for the given
/// end pressures.
pub fn steady_fluxes(p1: f64, p6: f64) -> Result<Vec<f64>, String> {
    let sc = uniform_scenario(
        Arc::new(NetworkGraph::fig1(1.0)),
        0.25,
        1,
        CouplingMode::Monolithic,
        |n| table1_params(ModelKind::Linear, n),
        fig1_boundary(p1, Arc::new(move |_| p6)),
        0.0,
        1.0,
    )
    .map_err(|e| e.to_string())?;
    let state = steady_state(&sc, 0.0).map_err(|e| e.to_string())?;
    let disc = sc.discretization();
    Ok((0..disc.graph().num_edges())
        .map(|e| disc.flux_coeffs(&state.broken, e)[0])
        .collect())
}

/// Manufactured-solution study for degree `k`: rows `h, error, eoc`
/// (`eoc` is NaN in the first row).
pub fn manufactured_study(k: usize, levels: usize) -> Result<Vec<f64>, String> {
    if !(1..=4).contains(&k) || !(2..=6).contains(&levels) {
        return Err("degree must be 1..4 and levels 2..6".into());
    }
    let report = run_manufactured(k, levels).map_err(|e| e.to_string())?;
    Ok(report
        .rows
        .iter()
        .flat_map(|r| [r.h, r.error, r.eoc.unwrap_or(f64::NAN)])
        .collect())
}

#[wasm_bindgen(js_name = fig1Fluxes)]
pub fn fig1_fluxes_js(kind: &str, h: f64, final_time: f64, amplitude: f64) -> Result<Vec<f64>, JsError> {
    fig1_fluxes(kind, h, final_time, amplitude).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = steadyFluxes)]
pub fn steady_fluxes_js(p1: f64, p6: f64) -> Result<Vec<f64>, JsError> {
    steady_fluxes(p1, p6).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = manufacturedStudy)]
pub fn manufactured_study_js(k: usize, levels: usize) -> Result<Vec<f64>, JsError> {
    manufactured_study(k, levels).map_err(|e| JsError::new(&e))
}
