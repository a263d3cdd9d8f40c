//! TSF JSON files and DOT export.
//!
//! TSF layout:
//!
//! ```json
//! { "num_states": 4, "initial": 0, "errors": [3],
//!   "controlled": [[0,0],[1,0]], "uncontrolled": [[0,1]], "repair": [],
//!   "labels": {"0": "1"} }
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EdgeKind, ModelError, StateId, TransitionSystem, ValidationOptions, Violation};
use crate::stateset::StateSet;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("system violates {} rule(s): {}", .0.len(), join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TsfFile {
    num_states: usize,
    initial: u32,
    errors: Vec<u32>,
    controlled: Vec<[u32; 2]>,
    uncontrolled: Vec<[u32; 2]>,
    #[serde(default)]
    repair: Vec<[u32; 2]>,
    #[serde(default)]
    labels: BTreeMap<u32, String>,
}

/// Parses TSF JSON and validates the result.
pub fn from_json_str(text: &str, options: ValidationOptions) -> Result<TransitionSystem, FormatError> {
    let file: TsfFile = serde_json::from_str(text).map_err(|e| FormatError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut b = TransitionSystem::builder(file.num_states).initial(file.initial);
    for e in file.errors {
        b = b.error(e);
    }
    for (kind, list) in [
        (EdgeKind::Controlled, &file.controlled),
        (EdgeKind::Uncontrolled, &file.uncontrolled),
        (EdgeKind::Repair, &file.repair),
    ] {
        for &[s, t] in list {
            b = b.edge(kind, s, t);
        }
    }
    for (s, name) in file.labels {
        b = b.label(s, name);
    }
    let sys = b.build()?;
    let violations = sys.validate_with(options);
    if !violations.is_empty() {
        return Err(FormatError::Invalid(violations));
    }
    Ok(sys)
}

/// Serializes without validating. Edge lists are written one list per line.
pub fn to_json_string(sys: &TransitionSystem) -> String {
    let edges = |kind| {
        let parts: Vec<String> = sys.edges(kind).map(|(s, t)| format!("[{s},{t}]")).collect();
        format!("[{}]", parts.join(","))
    };
    let errors: Vec<String> = sys.errors().iter().map(|s| s.to_string()).collect();
    let labels: BTreeMap<u32, &str> = sys.labels().iter().map(|(s, l)| (s.0, l.as_str())).collect();
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"num_states\": {},", sys.num_states());
    let _ = writeln!(out, "  \"initial\": {},", sys.initial());
    let _ = writeln!(out, "  \"errors\": [{}],", errors.join(","));
    let _ = writeln!(out, "  \"controlled\": {},", edges(EdgeKind::Controlled));
    let _ = writeln!(out, "  \"uncontrolled\": {},", edges(EdgeKind::Uncontrolled));
    let _ = writeln!(out, "  \"repair\": {},", edges(EdgeKind::Repair));
    let _ = writeln!(
        out,
        "  \"labels\": {}",
        serde_json::to_string(&labels).expect("labels serialize")
    );
    out.push_str("}\n");
    out
}

pub fn load(path: impl AsRef<Path>) -> Result<TransitionSystem, FormatError> {
    load_with(path, ValidationOptions::default())
}

pub fn load_with(path: impl AsRef<Path>, options: ValidationOptions) -> Result<TransitionSystem, FormatError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })?;
    from_json_str(&text, options)
}

/// Writes the system, refusing to save one that does not validate.
pub fn save(sys: &TransitionSystem, path: impl AsRef<Path>) -> Result<(), FormatError> {
    save_with(sys, path, ValidationOptions::default())
}

pub fn save_with(
    sys: &TransitionSystem,
    path: impl AsRef<Path>,
    options: ValidationOptions,
) -> Result<(), FormatError> {
    let violations = sys.validate_with(options);
    if !violations.is_empty() {
        return Err(FormatError::Invalid(violations));
    }
    let path = path.as_ref();
    fs::write(path, to_json_string(sys)).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Graphviz rendering: controlled edges solid, uncontrolled dashed red,
/// repair dotted blue, error states double circles. States in `highlight`
/// are filled.
pub fn to_dot(sys: &TransitionSystem, highlight: Option<&StateSet>) -> String {
    let mut out = String::from("digraph tsf {\n  rankdir=LR;\n  node [shape=circle];\n");
    for s in sys.states() {
        let mut attrs = vec![format!("label={}", dot_quote(&sys.label(s)))];
        if sys.is_error(s) {
            attrs.push("shape=doublecircle".into());
        }
        if highlight.is_some_and(|h| h.contains(s)) {
            attrs.push("style=filled".into());
            attrs.push("fillcolor=palegreen".into());
        }
        if s == sys.initial() {
            attrs.push("penwidth=2".into());
        }
        let _ = writeln!(out, "  s{} [{}];", s, attrs.join(", "));
    }
    for kind in EdgeKind::ALL {
        let style = match kind {
            EdgeKind::Controlled => "",
            EdgeKind::Uncontrolled => " [style=dashed, color=red]",
            EdgeKind::Repair => " [style=dotted, color=blue]",
        };
        for (s, t) in sys.edges(kind) {
            let _ = writeln!(out, "  s{s} -> s{t}{style};");
        }
    }
    out.push_str("}\n");
    out
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Parses a comma-separated list of state labels or indices.
pub fn parse_state_list(sys: &TransitionSystem, text: &str) -> Result<StateSet, String> {
    let mut set = StateSet::empty(sys.num_states());
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let s: StateId = sys
            .find_state(part)
            .ok_or_else(|| format!("unknown state `{part}`"))?;
        set.insert(s);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{example_system, Rule};

    #[test]
    fn round_trip_example_system() {
        let sys = example_system();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("example.tsf.json");
        save(&sys, &path).unwrap();
        assert_eq!(load(&path).unwrap(), sys);
    }

    #[test]
    fn repair_edge_into_error_is_rejected() {
        let text = r#"{"num_states": 2, "initial": 0, "errors": [1],
            "controlled": [[0,0]], "uncontrolled": [], "repair": [[0,1]]}"#;
        match from_json_str(text, ValidationOptions::default()) {
            Err(FormatError::Invalid(v)) => {
                assert_eq!(v[0].rule, Rule::RepairTouchesError);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn parse_error_has_position() {
        let err = from_json_str("{\n \"num_states\": 2,\n \"initial\": x }", ValidationOptions::default())
            .unwrap_err();
        match err {
            FormatError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_named() {
        let err = from_json_str(
            r#"{"num_states": 1, "initial": 0, "errors": [], "controlled": [[0,0]], "uncontrolled": [], "extra": 1}"#,
            ValidationOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
    }

    #[test]
    fn save_refuses_invalid() {
        let sys = TransitionSystem::builder(2).controlled(0, 0).build().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let err = save(&sys, dir.path().join("x.json")).unwrap_err();
        assert!(matches!(err, FormatError::Invalid(_)));
    }

    #[test]
    fn dot_styles() {
        let dot = to_dot(&example_system(), None);
        assert!(dot.contains("s3 [label=\"4\", shape=doublecircle]"));
        assert!(dot.contains("s2 -> s3 [style=dashed, color=red];"));
        assert!(dot.contains("s1 -> s0;"));
    }

    #[test]
    fn state_lists() {
        let sys = example_system();
        let set = parse_state_list(&sys, "1, 3").unwrap();
        assert_eq!(set.to_vec(), vec![StateId(0), StateId(2)]);
        assert!(parse_state_list(&sys, "9").is_err());
    }
}
