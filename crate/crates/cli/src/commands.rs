//! Command execution. Outputs are rendered in memory and only written once
//! the whole computation has succeeded; each file goes through a temporary
//! file in the output directory and is renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use gasnet_core::harness::{pairwise_study, ConvergenceReport};
use gasnet_core::timeloop::{integrate, steady_state, write_snapshot_csv};

use crate::config::{Command, Problem, RunConfig};
use crate::error::CliError;

/// A rendered output file.
pub struct Artifact {
    pub name: &'static str,
    pub bytes: Vec<u8>,
}

fn csv(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory cannot fail");
    buf
}

pub fn simulate(problem: &Problem) -> Result<Vec<Artifact>, CliError> {
    let sc = problem.scenario(problem.h, problem.dt)?;
    let traj = integrate(&sc)?;
    let mut out = vec![Artifact {
        name: "flux.csv",
        bytes: csv(|b| traj.write_flux_csv(&sc, b)),
    }];
    if problem.snapshot_every.is_some() {
        out.push(Artifact {
            name: "snapshots.csv",
            bytes: csv(|b| write_snapshot_csv(&sc, &traj.snapshots, b)),
        });
    }
    Ok(out)
}

pub fn steady(problem: &Problem) -> Result<Vec<Artifact>, CliError> {
    let sc = problem.scenario(problem.h, problem.dt)?;
    let state = steady_state(&sc, 0.0)?;
    Ok(vec![Artifact {
        name: "steady.csv",
        bytes: csv(|b| write_snapshot_csv(&sc, std::slice::from_ref(&state), b)),
    }])
}

/// Pairwise study on `h, h/2, ...` with `dt / h` held fixed.
pub fn converge(problem: &Problem) -> Result<Vec<Artifact>, CliError> {
    let ratio = problem.dt / problem.h;
    let (data, _) = pairwise_study(problem.levels, problem.h, |h| problem.scenario(h, ratio * h))?;
    let report = ConvergenceReport::from_errors(
        "network",
        problem.kind,
        problem.degree,
        format!("{ratio}*h"),
        problem.final_time,
        &data,
    );
    Ok(vec![
        Artifact {
            name: "convergence.txt",
            bytes: report.to_text().into_bytes(),
        },
        Artifact {
            name: "convergence.csv",
            bytes: report.to_csv().into_bytes(),
        },
    ])
}

/// Writes every artifact to a temporary file first, then renames them all.
pub fn commit(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    let write_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Write { path, source }
    };
    std::fs::create_dir_all(dir).map_err(write_err(dir))?;
    let mut staged = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(write_err(dir))?;
        tmp.write_all(&a.bytes).map_err(write_err(tmp.path()))?;
        tmp.as_file().sync_all().map_err(write_err(tmp.path()))?;
        staged.push((tmp, dir.join(a.name)));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, target) in staged {
        tmp.persist(&target).map_err(|e| CliError::Write {
            path: target.clone(),
            source: e.error,
        })?;
        written.push(target);
    }
    Ok(written)
}

pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let problem = Problem::load(cfg)?;
    let artifacts = match cfg.command {
        Command::Simulate => simulate(&problem)?,
        Command::Steady => steady(&problem)?,
        Command::Converge => converge(&problem)?,
    };
    commit(&cfg.out, &artifacts)
}
