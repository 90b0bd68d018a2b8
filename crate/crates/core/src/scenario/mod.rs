//! Scenario files: loading with located diagnostics, validation,
//! serialization, simulation and runs.

mod bundled;
mod model;
mod run;
mod sim;

use std::fmt;
use std::path::Path;

use thiserror::Error;

pub use bundled::{bundled, bundled_names, BUNDLED};
pub use model::{AgentSpec, BandSpec, Bounds, RandomVia, Scenario, SwapSpec, TrackerSpec, ViaSpec};
pub use run::{bench, run, run_silent, write_outputs, AgentSummary, BenchReport, GateCrossing, RunSummary, TimingStats};
pub use sim::{AgentController, Simulation};

use crate::band::BandParams;
use crate::tracker::{validate_params, RoaProfileParams};
use crate::world::AgentKind;
use crate::NavError;

/// Source line (1-based), if one could be attributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Line(pub Option<usize>);

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(n) => write!(f, "line {n}: "),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{line}syntax error: {message}")]
    Syntax { line: Line, message: String },

    #[error("{line}invalid {field}: {reason}")]
    Invalid { line: Line, field: String, reason: String },

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown bundled scenario `{0}`")]
    UnknownBundled(String),
}

impl ScenarioError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ScenarioError::Syntax { line, .. } | ScenarioError::Invalid { line, .. } => line.0,
            _ => None,
        }
    }

    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ScenarioError::Invalid {
            line: Line(None),
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Parse and validate scenario text.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: Line(e.span().map(|s| line_of(text, s.start))),
        message: e.message().to_string(),
    })?;
    validate(&scenario).map_err(|e| match e {
        ScenarioError::Invalid { field, reason, .. } => ScenarioError::Invalid {
            line: Line(locate(text, &field)),
            field,
            reason,
        },
        other => other,
    })?;
    Ok(scenario)
}

pub fn load_file(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_scenario(&text)
}

/// Load a file path, or a bundled scenario by name when no such file exists.
pub fn load_path_or_bundled(spec: &str) -> Result<Scenario, ScenarioError> {
    let path = Path::new(spec);
    if path.exists() {
        return load_file(path);
    }
    let name = spec.trim_end_matches(".scn");
    let text = bundled(name).ok_or_else(|| ScenarioError::UnknownBundled(spec.to_string()))?;
    load_scenario(text)
}

pub fn to_toml(scenario: &Scenario) -> String {
    toml::to_string(scenario).expect("scenario model is always representable as TOML")
}

fn line_of(text: &str, byte: usize) -> usize {
    text[..byte.min(text.len())].matches('\n').count() + 1
}

/// Best-effort line of a dotted field path such as `agent[1].bubble.radius`.
fn locate(text: &str, path: &str) -> Option<usize> {
    let lines: Vec<&str> = text.lines().collect();
    let mut pos = 0usize;
    let mut found = None;
    let mut table = String::new();
    for seg in path.split('.') {
        let (name, index) = match seg.split_once('[') {
            Some((n, rest)) => (n, rest.trim_end_matches(']').parse::<usize>().ok()),
            None => (seg, None),
        };
        if !table.is_empty() {
            table.push('.');
        }
        table.push_str(name);
        match index {
            Some(i) if name_is_table_array(&lines, &table) => {
                let header = format!("[[{table}]]");
                let hit = lines
                    .iter()
                    .enumerate()
                    .skip(pos)
                    .filter(|(_, l)| l.trim() == header)
                    .nth(i)?;
                pos = hit.0;
                found = Some(pos);
            }
            _ => {
                let header = format!("[{table}]");
                // stay inside the current array element
                let hit = lines
                    .iter()
                    .enumerate()
                    .skip(pos)
                    .take_while(|(k, l)| *k == pos || !l.trim_start().starts_with("[["))
                    .find(|(_, l)| {
                        let t = l.trim();
                        t == header || contains_key(t, name)
                    });
                if let Some((k, _)) = hit {
                    pos = k;
                    found = Some(k);
                }
            }
        }
    }
    found.map(|k| k + 1)
}

fn name_is_table_array(lines: &[&str], table: &str) -> bool {
    let header = format!("[[{table}]]");
    lines.iter().any(|l| l.trim() == header)
}

fn contains_key(line: &str, key: &str) -> bool {
    line.match_indices(key).any(|(i, _)| {
        let before = line[..i].chars().last();
        let boundary = before.is_none_or(|c| !(c.is_alphanumeric() || c == '_'));
        boundary && line[i + key.len()..].trim_start().starts_with('=')
    })
}

fn positive(field: String, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ScenarioError::invalid(field, format!("must be > 0, got {v}")))
    }
}

fn check_len(field: String, v: &[f64], n: usize) -> Result<(), ScenarioError> {
    if v.len() != n {
        return Err(ScenarioError::invalid(
            field,
            format!("expected {n} values (one per active DoF), got {}", v.len()),
        ));
    }
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(ScenarioError::invalid(field, format!("non-finite value {bad}")));
    }
    Ok(())
}

fn from_nav(prefix: &str, e: NavError) -> ScenarioError {
    match e {
        NavError::InvalidParam { field, reason } => ScenarioError::invalid(format!("{prefix}.{field}"), reason),
        other => ScenarioError::invalid(prefix.to_string(), other.to_string()),
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Check every scenario invariant; errors carry the offending field path.
pub fn validate(s: &Scenario) -> Result<(), ScenarioError> {
    positive("dt".into(), s.dt)?;
    if !(s.duration.is_finite() && s.duration >= s.dt) {
        return Err(ScenarioError::invalid("duration", format!("must be >= dt, got {}", s.duration)));
    }
    if s.log_every == 0 {
        return Err(ScenarioError::invalid("log_every", "must be >= 1"));
    }
    if s.agents.is_empty() {
        return Err(ScenarioError::invalid("agent", "scenario has no agents"));
    }
    s.viscous.validate().map_err(|e| match e {
        NavError::InvalidParam { field, reason } => ScenarioError::invalid(field, reason),
        other => ScenarioError::invalid("viscous", other.to_string()),
    })?;
    if let Some(b) = &s.bounds {
        if !(0..3).all(|i| b.min[i] < b.max[i]) {
            return Err(ScenarioError::invalid("bounds.max", "must exceed bounds.min on every axis"));
        }
    }
    let mut ids = std::collections::HashSet::new();
    for (i, a) in s.agents.iter().enumerate() {
        validate_agent(s, i, a)?;
        if !ids.insert(a.id.as_str()) {
            return Err(ScenarioError::invalid(format!("agent[{i}].id"), format!("duplicate id `{}`", a.id)));
        }
    }
    for (i, o) in s.obstacles.iter().enumerate() {
        let p = format!("obstacle[{i}]");
        if o.id.is_empty() {
            return Err(ScenarioError::invalid(format!("{p}.id"), "must not be empty"));
        }
        o.validate().map_err(|e| from_nav(&p, e))?;
        if !ids.insert(o.id.as_str()) {
            return Err(ScenarioError::invalid(format!("{p}.id"), format!("duplicate id `{}`", o.id)));
        }
    }
    Ok(())
}

fn validate_agent(s: &Scenario, i: usize, a: &AgentSpec) -> Result<(), ScenarioError> {
    let p = format!("agent[{i}]");
    if !valid_id(&a.id) {
        return Err(ScenarioError::invalid(
            format!("{p}.id"),
            format!("`{}` must be non-empty and use only [A-Za-z0-9_-]", a.id),
        ));
    }
    let n = a.kind.dofs().len();
    check_len(format!("{p}.pose"), &a.pose, n)?;
    if !a.twist.is_empty() {
        check_len(format!("{p}.twist"), &a.twist, n)?;
    }
    for (name, v) in [("inertia", &a.inertia), ("accel_max", &a.accel_max), ("vel_max", &a.vel_max)] {
        check_len(format!("{p}.{name}"), v, n)?;
        for (k, x) in v.iter().enumerate() {
            positive(format!("{p}.{name}[{k}]"), *x)?;
        }
    }
    if !(a.radius >= 0.0 && a.radius.is_finite()) {
        return Err(ScenarioError::invalid(format!("{p}.radius"), format!("must be >= 0, got {}", a.radius)));
    }
    if let Some(hz) = a.feedback_hz {
        positive(format!("{p}.feedback_hz"), hz)?;
    }
    if let Some(b) = &s.bounds {
        let body = sim::body_from_spec(a);
        if !b.contains(body.position(), a.kind.is_planar()) {
            return Err(ScenarioError::invalid(format!("{p}.pose"), "start pose lies outside bounds"));
        }
    }

    let band = &a.band;
    check_len(format!("{p}.band.stiffness"), &band.stiffness, n)?;
    for (name, v) in [("mass", &band.mass), ("accel_max", &band.accel_max), ("vel_max", &band.vel_max)] {
        if let Some(v) = v {
            check_len(format!("{p}.band.{name}"), v, n)?;
        }
    }
    for (k, params) in band_params(a).into_iter().enumerate() {
        params.validate().map_err(|e| match e {
            NavError::InvalidParam { field, reason } => ScenarioError::invalid(format!("{p}.{field}[{k}]"), reason),
            other => ScenarioError::invalid(p.clone(), other.to_string()),
        })?;
    }

    let t = &a.tracker;
    for (name, v) in [("k0", &t.k0), ("x0", &t.x0), ("xb", &t.xb), ("f_max", &t.f_max)] {
        check_len(format!("{p}.tracker.{name}"), v, n)?;
    }
    for (k, prof) in tracker_profiles(a).into_iter().enumerate() {
        validate_params(&prof).map_err(|e| match e {
            NavError::InvalidParam { field, reason } => {
                ScenarioError::invalid(format!("{p}.tracker.{field}[{k}]"), reason)
            }
            other => ScenarioError::invalid(p.clone(), other.to_string()),
        })?;
        // the tracker may not ask for more than the body can deliver
        let physical = a.inertia[k] * a.accel_max[k];
        if t.f_max[k] > physical * (1.0 + 1e-12) {
            return Err(ScenarioError::invalid(
                format!("{p}.tracker.f_max[{k}]"),
                format!("{} exceeds inertia * accel_max = {physical}", t.f_max[k]),
            ));
        }
    }

    if let Some(b) = &a.bubble {
        b.validate().map_err(|e| from_nav(&p, e))?;
    }

    let v = &a.via;
    positive(format!("{p}.via.trigger_radius"), v.trigger_radius)?;
    if v.points.is_empty() && v.random.is_none() {
        return Err(ScenarioError::invalid(format!("{p}.via.points"), "plan is empty"));
    }
    for (k, pt) in v.points.iter().enumerate() {
        check_len(format!("{p}.via.points[{k}]"), pt, n)?;
    }
    if let Some(r) = &v.random {
        validate_random(&format!("{p}.via.random"), r, n)?;
    }
    let mut last = f64::NEG_INFINITY;
    for (k, sw) in v.schedule.iter().enumerate() {
        let sp = format!("{p}.via.schedule[{k}]");
        if !(sw.at.is_finite() && sw.at > last) {
            return Err(ScenarioError::invalid(format!("{sp}.at"), "swap times must be strictly increasing"));
        }
        last = sw.at;
        if sw.points.is_empty() && sw.random.is_none() {
            return Err(ScenarioError::invalid(format!("{sp}.points"), "swap plan is empty"));
        }
        for (j, pt) in sw.points.iter().enumerate() {
            check_len(format!("{sp}.points[{j}]"), pt, n)?;
        }
        if let Some(r) = &sw.random {
            validate_random(&format!("{sp}.random"), r, n)?;
        }
    }
    Ok(())
}

fn validate_random(p: &str, r: &RandomVia, n: usize) -> Result<(), ScenarioError> {
    if r.count == 0 {
        return Err(ScenarioError::invalid(format!("{p}.count"), "must be >= 1"));
    }
    check_len(format!("{p}.min"), &r.min, n)?;
    check_len(format!("{p}.max"), &r.max, n)?;
    if r.min.iter().zip(&r.max).any(|(lo, hi)| lo > hi) {
        return Err(ScenarioError::invalid(format!("{p}.max"), "must be >= min"));
    }
    Ok(())
}

/// Band parameters per active DoF, with defaults filled from the agent.
pub(crate) fn band_params(a: &AgentSpec) -> Vec<BandParams> {
    let n = a.kind.dofs().len();
    let pick = |o: &Option<Vec<f64>>, fallback: &Vec<f64>, k: usize| {
        o.as_ref().and_then(|v| v.get(k)).or(fallback.get(k)).copied().unwrap_or(f64::NAN)
    };
    (0..n)
        .map(|k| {
            BandParams::new(
                a.band.stiffness.get(k).copied().unwrap_or(f64::NAN),
                pick(&a.band.mass, &a.inertia, k),
                pick(&a.band.accel_max, &a.accel_max, k),
                pick(&a.band.vel_max, &a.vel_max, k),
            )
        })
        .collect()
}

pub(crate) fn tracker_profiles(a: &AgentSpec) -> Vec<RoaProfileParams> {
    let t = &a.tracker;
    (0..t.k0.len().min(t.x0.len()).min(t.xb.len()).min(t.f_max.len()))
        .map(|k| RoaProfileParams::new(t.k0[k], t.x0[k], t.xb[k], t.f_max[k]))
        .collect()
}

/// Per-DoF vector in the agent's DoF order → full 6-vector.
pub(crate) fn dof_vec(kind: AgentKind, values: &[f64]) -> crate::DofVec {
    let mut out = crate::DofVec::ZERO;
    for (d, v) in kind.dofs().iter().zip(values) {
        out[*d] = *v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "mini"
duration = 1.0
dt = 0.001

[[agent]]
id = "a"
kind = "planar"
pose = [0.0, 0.0, 0.0]
inertia = [100.0, 100.0, 100.0]
accel_max = [0.5, 0.5, 0.5]
vel_max = [1.0, 1.0, 1.0]

[agent.band]
stiffness = [1.0, 1.0, 1.0]

[agent.tracker]
k0 = [100.0, 100.0, 100.0]
x0 = [0.1, 0.1, 0.1]
xb = [0.3, 0.3, 0.3]
f_max = [50.0, 50.0, 50.0]

[agent.bubble]
shape = { kind = "circle", radius = 0.5 }
repulsion = { k0 = 100.0, x0 = 0.1, xb = 0.3, f_max = 50.0 }

[agent.via]
points = [[1.0, 0.0, 0.0]]
"#;

    #[test]
    fn minimal_loads() {
        let s = load_scenario(MINIMAL).unwrap();
        assert_eq!(s.agents.len(), 1);
        assert_eq!(s.agents[0].via.trigger_radius, 0.2);
        assert_eq!(s.total_dofs(), 3);
    }

    #[test]
    fn negative_bubble_radius_is_located() {
        let text = MINIMAL.replace("radius = 0.5", "radius = -1.0");
        let e = load_scenario(&text).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("bubble.radius"), "{msg}");
        let line = e.line().unwrap();
        assert!(text.lines().nth(line - 1).unwrap().contains("radius = -1.0"));
    }

    #[test]
    fn unknown_key_is_located() {
        let text = MINIMAL.replace("dt = 0.001", "dt = 0.001\nbogus = 3");
        let e = load_scenario(&text).unwrap_err();
        assert!(matches!(e, ScenarioError::Syntax { .. }));
        assert!(e.to_string().contains("bogus"), "{e}");
        assert_eq!(e.line(), Some(5));
    }

    #[test]
    fn wrong_vector_length_names_field() {
        let text = MINIMAL.replace("stiffness = [1.0, 1.0, 1.0]", "stiffness = [1.0, 1.0]");
        let e = load_scenario(&text).unwrap_err();
        assert!(e.to_string().contains("agent[0].band.stiffness"), "{e}");
        let line = e.line().unwrap();
        assert!(text.lines().nth(line - 1).unwrap().contains("stiffness"));
    }

    #[test]
    fn duration_shorter_than_dt() {
        let text = MINIMAL.replace("duration = 1.0", "duration = 0.0001");
        let e = load_scenario(&text).unwrap_err();
        assert!(e.to_string().contains("duration"));
        assert_eq!(e.line(), Some(3));
    }

    #[test]
    fn tracker_beyond_physical_limit_is_rejected() {
        let text = MINIMAL.replace("accel_max = [0.5, 0.5, 0.5]", "accel_max = [0.5, 0.4, 0.5]");
        let err = load_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("agent[0].tracker.f_max[1]"), "{err}");
    }

    #[test]
    fn round_trip() {
        let s = load_scenario(MINIMAL).unwrap();
        let back = load_scenario(&to_toml(&s)).unwrap();
        assert_eq!(back, s);
    }
}
