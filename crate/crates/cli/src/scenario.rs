//! Sectioned key-value scenario files.
//!
//! ```text
//! [network]
//! file = fig1.net            # relative to the scenario file
//!
//! [model]
//! kind = linear              # linear | semilinear | quasilinear
//! k = 1
//! h = 0.1
//! hybrid = off
//!
//! [pipes]                    # defaults for every pipe
//! a = 1
//! b = 1
//! d = 1                      # may depend on x, the position along the pipe
//!
//! [pipe e4]                  # overrides for one pipe
//! d = 2
//!
//! [boundary]
//! v1 = 1
//! v6 = 1 + 0.5*sin(pi*t)
//!
//! [solver]
//! T = 10
//! dt = 0.025
//! ```
//!
//! `#` starts a comment. Numeric values are constant expressions.

use std::path::{Path, PathBuf};

use gasnet_core::models::ModelKind;
use gasnet_core::timeloop::Integrator;

use crate::error::CliError;
use crate::expr::{Expr, Var};

/// Pipe parameters given in a `[pipes]` or `[pipe <id>]` section.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipeSpec {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub d: Option<Expr>,
    pub area: Option<f64>,
    pub diameter: Option<f64>,
    pub friction_factor: Option<f64>,
    pub sound_speed: Option<f64>,
}

impl PipeSpec {
    /// `self` with unset entries taken from `base`.
    pub fn or(&self, base: &PipeSpec) -> PipeSpec {
        PipeSpec {
            a: self.a.or(base.a),
            b: self.b.or(base.b),
            d: self.d.clone().or_else(|| base.d.clone()),
            area: self.area.or(base.area),
            diameter: self.diameter.or(base.diameter),
            friction_factor: self.friction_factor.or(base.friction_factor),
            sound_speed: self.sound_speed.or(base.sound_speed),
        }
    }
}

/// A `vertex = expression` line of the `[boundary]` section.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    pub vertex: String,
    pub signal: Expr,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioFile {
    pub path: PathBuf,
    pub network: Option<PathBuf>,
    pub kind: Option<ModelKind>,
    pub degree: Option<usize>,
    pub h: Option<f64>,
    pub hybrid: Option<bool>,
    pub defaults: PipeSpec,
    /// Per-pipe overrides with the line of their section header.
    pub pipes: Vec<(String, PipeSpec, usize)>,
    pub boundary: Vec<BoundarySpec>,
    pub final_time: Option<f64>,
    pub dt: Option<f64>,
    pub integrator: Option<Integrator>,
    pub snapshot_every: Option<usize>,
    pub levels: Option<usize>,
}

enum Section {
    Network,
    Model,
    Pipes,
    Pipe(usize),
    Boundary,
    Solver,
}

struct Cursor<'a> {
    path: &'a Path,
    line: usize,
}

impl Cursor<'_> {
    fn error(&self, column: usize, message: impl Into<String>) -> CliError {
        CliError::Parse {
            file: self.path.to_path_buf(),
            line: self.line,
            column,
            message: message.into(),
        }
    }
}

/// A value with the 1-based column where it starts.
struct Value<'a> {
    text: &'a str,
    column: usize,
}

impl Value<'_> {
    fn expr(&self, cur: &Cursor, vars: &[Var]) -> Result<Expr, CliError> {
        Expr::parse(self.text, vars).map_err(|e| cur.error(self.column + e.offset, e.message))
    }

    fn number(&self, cur: &Cursor) -> Result<f64, CliError> {
        let v = self
            .expr(cur, &[])?
            .constant()
            .expect("expressions without variables are constant");
        if v.is_finite() {
            Ok(v)
        } else {
            Err(cur.error(self.column, format!("`{}` is not a finite number", self.text)))
        }
    }

    fn count(&self, cur: &Cursor) -> Result<usize, CliError> {
        self.text
            .parse()
            .map_err(|_| cur.error(self.column, format!("expected a non-negative integer, found `{}`", self.text)))
    }

    fn switch(&self, cur: &Cursor) -> Result<bool, CliError> {
        match self.text {
            "on" | "true" | "yes" => Ok(true),
            "off" | "false" | "no" => Ok(false),
            other => Err(cur.error(self.column, format!("expected on or off, found `{other}`"))),
        }
    }
}

fn set<T>(slot: &mut Option<T>, value: T, key: &str, cur: &Cursor) -> Result<(), CliError> {
    if slot.is_some() {
        return Err(cur.error(1, format!("duplicate key `{key}`")));
    }
    *slot = Some(value);
    Ok(())
}

fn pipe_key(spec: &mut PipeSpec, key: &str, value: &Value, cur: &Cursor) -> Result<(), CliError> {
    match key {
        "a" => set(&mut spec.a, value.number(cur)?, key, cur),
        "b" => set(&mut spec.b, value.number(cur)?, key, cur),
        "d" => set(&mut spec.d, value.expr(cur, &[Var::X])?, key, cur),
        "area" => set(&mut spec.area, value.number(cur)?, key, cur),
        "diameter" => set(&mut spec.diameter, value.number(cur)?, key, cur),
        "friction" => set(&mut spec.friction_factor, value.number(cur)?, key, cur),
        "sound_speed" => set(&mut spec.sound_speed, value.number(cur)?, key, cur),
        _ => Err(cur.error(1, format!("unknown pipe parameter `{key}`"))),
    }
}

impl ScenarioFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Parses scenario text; `path` is used for messages and to resolve the
    /// network file.
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let mut out = ScenarioFile {
            path: path.to_path_buf(),
            ..Default::default()
        };
        let mut section: Option<Section> = None;
        for (i, raw) in text.lines().enumerate() {
            let cur = Cursor { path, line: i + 1 };
            let content = raw.split('#').next().unwrap_or("");
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let indent = content.len() - content.trim_start().len();
            if let Some(inner) = trimmed.strip_prefix('[') {
                let Some(inner) = inner.strip_suffix(']') else {
                    return Err(cur.error(indent + 1, "unterminated section header"));
                };
                let words: Vec<&str> = inner.split_whitespace().collect();
                section = Some(match words.as_slice() {
                    ["network"] => Section::Network,
                    ["model"] => Section::Model,
                    ["pipes"] => Section::Pipes,
                    ["pipe", id] => {
                        if out.pipes.iter().any(|(p, _, _)| p == id) {
                            return Err(cur.error(indent + 1, format!("duplicate section for pipe `{id}`")));
                        }
                        out.pipes.push((id.to_string(), PipeSpec::default(), cur.line));
                        Section::Pipe(out.pipes.len() - 1)
                    }
                    ["boundary"] => Section::Boundary,
                    ["solver"] => Section::Solver,
                    _ => return Err(cur.error(indent + 1, format!("unknown section `[{inner}]`"))),
                });
                continue;
            }
            let Some(eq) = content.find('=') else {
                return Err(cur.error(indent + 1, "expected `key = value`"));
            };
            let key = content[..eq].trim();
            let after = &content[eq + 1..];
            let value_text = after.trim();
            let value = Value {
                text: value_text,
                column: eq + 2 + (after.len() - after.trim_start().len()),
            };
            if value_text.is_empty() {
                return Err(cur.error(value.column, format!("missing value for `{key}`")));
            }
            let Some(sec) = &section else {
                return Err(cur.error(indent + 1, "key outside of a section"));
            };
            match sec {
                Section::Network => match key {
                    "file" => {
                        let base = path.parent().unwrap_or(Path::new(""));
                        set(&mut out.network, base.join(value_text), key, &cur)?
                    }
                    _ => return Err(cur.error(indent + 1, format!("unknown key `{key}` in [network]"))),
                },
                Section::Model => match key {
                    "kind" => {
                        let kind = value_text.parse().map_err(|e: String| cur.error(value.column, e))?;
                        set(&mut out.kind, kind, key, &cur)?
                    }
                    "k" => set(&mut out.degree, value.count(&cur)?, key, &cur)?,
                    "h" => set(&mut out.h, value.number(&cur)?, key, &cur)?,
                    "hybrid" => set(&mut out.hybrid, value.switch(&cur)?, key, &cur)?,
                    _ => return Err(cur.error(indent + 1, format!("unknown key `{key}` in [model]"))),
                },
                Section::Pipes => pipe_key(&mut out.defaults, key, &value, &cur)?,
                Section::Pipe(idx) => pipe_key(&mut out.pipes[*idx].1, key, &value, &cur)?,
                Section::Boundary => {
                    if out.boundary.iter().any(|b| b.vertex == key) {
                        return Err(cur.error(indent + 1, format!("duplicate boundary condition for `{key}`")));
                    }
                    out.boundary.push(BoundarySpec {
                        vertex: key.to_string(),
                        signal: value.expr(&cur, &[Var::T])?,
                        line: cur.line,
                    });
                }
                Section::Solver => match key {
                    "T" => set(&mut out.final_time, value.number(&cur)?, key, &cur)?,
                    "dt" => set(&mut out.dt, value.number(&cur)?, key, &cur)?,
                    "integrator" => {
                        let integ = value_text.parse().map_err(|e: String| cur.error(value.column, e))?;
                        set(&mut out.integrator, integ, key, &cur)?
                    }
                    "snapshot_every" => set(&mut out.snapshot_every, value.count(&cur)?, key, &cur)?,
                    "levels" => set(&mut out.levels, value.count(&cur)?, key, &cur)?,
                    _ => return Err(cur.error(indent + 1, format!("unknown key `{key}` in [solver]"))),
                },
            }
        }
        Ok(out)
    }
}
