//! Transition systems with failures.
//!
//! A system has a finite set of dense state indices, an initial state, a set
//! of error sinks, and three edge relations: controlled (recovery moves the
//! controller may choose), uncontrolled (failures injected by the
//! environment) and repair (good events the controller cannot block).

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stateset::StateSet;

/// Dense state index in `[0, num_states)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub u32);

impl StateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Controlled,
    Uncontrolled,
    Repair,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 3] = [EdgeKind::Controlled, EdgeKind::Uncontrolled, EdgeKind::Repair];

    fn slot(self) -> usize {
        match self {
            EdgeKind::Controlled => 0,
            EdgeKind::Uncontrolled => 1,
            EdgeKind::Repair => 2,
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::Controlled => "controlled",
            EdgeKind::Uncontrolled => "uncontrolled",
            EdgeKind::Repair => "repair",
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("a system needs at least one state")]
    NoStates,
    #[error("{what} refers to state {state}, but the system has {num_states} states")]
    StateOutOfRange {
        what: String,
        state: u32,
        num_states: usize,
    },
}

/// Compressed adjacency: targets of state `s` are `targets[offsets[s]..offsets[s+1]]`,
/// sorted ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Adjacency {
    offsets: Vec<u32>,
    targets: Vec<StateId>,
}

impl Adjacency {
    fn build(num_states: usize, edges: &[(StateId, StateId)]) -> Self {
        let mut offsets = vec![0u32; num_states + 1];
        for &(s, _) in edges {
            offsets[s.index() + 1] += 1;
        }
        for i in 0..num_states {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![StateId(0); edges.len()];
        for &(s, t) in edges {
            let slot = &mut fill[s.index()];
            targets[*slot as usize] = t;
            *slot += 1;
        }
        for s in 0..num_states {
            targets[offsets[s] as usize..offsets[s + 1] as usize].sort_unstable();
        }
        Self { offsets, targets }
    }

    #[inline]
    fn of(&self, s: StateId) -> &[StateId] {
        let i = s.index();
        &self.targets[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    fn edges(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        (0..self.offsets.len().saturating_sub(1)).flat_map(move |i| {
            let s = StateId(i as u32);
            self.of(s).iter().map(move |&t| (s, t))
        })
    }

    fn len(&self) -> usize {
        self.targets.len()
    }
}

/// An immutable transition system with failures.
///
/// Edge lists are kept sorted by source (then target), with reverse
/// adjacency for predecessor walks. Build one with [`SystemBuilder`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem {
    num_states: usize,
    initial: StateId,
    errors: StateSet,
    forward: [Adjacency; 3],
    backward: [Adjacency; 3],
    labels: BTreeMap<StateId, String>,
}

impl TransitionSystem {
    pub fn builder(num_states: usize) -> SystemBuilder {
        SystemBuilder::new(num_states)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn errors(&self) -> &StateSet {
        &self.errors
    }

    pub fn is_error(&self, s: StateId) -> bool {
        self.errors.contains(s)
    }

    /// `S \ F`.
    pub fn non_error(&self) -> StateSet {
        self.errors.complement()
    }

    pub fn all_states(&self) -> StateSet {
        StateSet::full(self.num_states)
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.num_states as u32).map(StateId)
    }

    /// Targets of `kind` edges leaving `s`, sorted ascending.
    ///
    /// Panics if `s` is not a state of this system.
    #[inline]
    pub fn successors(&self, s: StateId, kind: EdgeKind) -> &[StateId] {
        self.check_state(s);
        self.forward[kind.slot()].of(s)
    }

    /// Sources of `kind` edges entering `t`, sorted ascending.
    #[inline]
    pub fn predecessors(&self, t: StateId, kind: EdgeKind) -> &[StateId] {
        self.check_state(t);
        self.backward[kind.slot()].of(t)
    }

    pub fn successor_set(&self, s: StateId, kind: EdgeKind) -> StateSet {
        StateSet::from_states(self.num_states, self.successors(s, kind).iter().copied())
    }

    /// All edges of one kind, sorted by source then target.
    pub fn edges(&self, kind: EdgeKind) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.forward[kind.slot()].edges()
    }

    pub fn edge_count(&self, kind: EdgeKind) -> usize {
        self.forward[kind.slot()].len()
    }

    pub fn has_repair_edges(&self) -> bool {
        self.edge_count(EdgeKind::Repair) > 0
    }

    /// `|T| = max(|S|, |τ|)`.
    pub fn size(&self) -> usize {
        let edges: usize = EdgeKind::ALL.iter().map(|&k| self.edge_count(k)).sum();
        self.num_states.max(edges)
    }

    pub fn labels(&self) -> &BTreeMap<StateId, String> {
        &self.labels
    }

    /// The state's label, or its index when unlabelled.
    pub fn label(&self, s: StateId) -> Cow<'_, str> {
        match self.labels.get(&s) {
            Some(name) => Cow::Borrowed(name),
            None => Cow::Owned(s.to_string()),
        }
    }

    /// Looks a state up by label, falling back to a numeric index.
    pub fn find_state(&self, name: &str) -> Option<StateId> {
        if let Some((&s, _)) = self.labels.iter().find(|(_, l)| l.as_str() == name) {
            return Some(s);
        }
        name.parse::<u32>()
            .ok()
            .map(StateId)
            .filter(|s| s.index() < self.num_states)
    }

    /// Formats a set as `{a, b, c}` using labels.
    pub fn format_set(&self, set: &StateSet) -> String {
        let names: Vec<_> = set.iter().map(|s| self.label(s).into_owned()).collect();
        format!("{{{}}}", names.join(", "))
    }

    pub fn validate(&self) -> Vec<Violation> {
        self.validate_with(ValidationOptions::default())
    }

    pub fn validate_with(&self, options: ValidationOptions) -> Vec<Violation> {
        let mut out = Vec::new();
        for kind in EdgeKind::ALL {
            let mut previous = None;
            for (s, t) in self.edges(kind) {
                if previous == Some((s, t)) {
                    out.push(Violation::edge(Rule::DuplicateEdge, kind, s, t));
                }
                previous = Some((s, t));
                let rule = match kind {
                    EdgeKind::Controlled if self.is_error(s) || self.is_error(t) => {
                        Some(Rule::ControlledTouchesError)
                    }
                    EdgeKind::Repair if self.is_error(s) || self.is_error(t) => {
                        Some(Rule::RepairTouchesError)
                    }
                    EdgeKind::Uncontrolled if self.is_error(s) => Some(Rule::UncontrolledFromError),
                    _ => None,
                };
                if let Some(rule) = rule {
                    out.push(Violation::edge(rule, kind, s, t));
                }
            }
        }
        if !options.allow_overlap {
            for s in self.states() {
                let c = self.successors(s, EdgeKind::Controlled);
                let u = self.successors(s, EdgeKind::Uncontrolled);
                let r = self.successors(s, EdgeKind::Repair);
                for (kind, targets, others) in [
                    (EdgeKind::Uncontrolled, u, c),
                    (EdgeKind::Repair, r, c),
                    (EdgeKind::Repair, r, u),
                ] {
                    for t in targets {
                        if others.binary_search(t).is_ok() {
                            out.push(Violation::edge(Rule::OverlappingEdge, kind, s, *t));
                        }
                    }
                }
            }
        }
        for s in self.states() {
            if !self.is_error(s) && self.successors(s, EdgeKind::Controlled).is_empty() {
                out.push(Violation {
                    rule: Rule::MissingControlledSuccessor,
                    state: Some(s),
                    edge: None,
                });
            }
        }
        out
    }

    #[inline]
    fn check_state(&self, s: StateId) {
        assert!(
            s.index() < self.num_states,
            "state {s} out of range for a system with {} states",
            self.num_states
        );
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Permit the same (source, target) pair in more than one edge relation.
    pub allow_overlap: bool,
}

/// Definitional constraints a system must satisfy.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    ControlledTouchesError,
    RepairTouchesError,
    UncontrolledFromError,
    MissingControlledSuccessor,
    DuplicateEdge,
    OverlappingEdge,
}

impl Rule {
    pub fn description(self) -> &'static str {
        match self {
            Rule::ControlledTouchesError => "controlled edges must satisfy τ_c ⊆ (S∖F)×(S∖F)",
            Rule::RepairTouchesError => "repair edges must satisfy τ_r ⊆ (S∖F)×(S∖F)",
            Rule::UncontrolledFromError => "uncontrolled edges must satisfy τ_u ⊆ (S∖F)×S",
            Rule::MissingControlledSuccessor => {
                "every non-error state needs at least one controlled successor"
            }
            Rule::DuplicateEdge => "edge lists must not contain duplicates",
            Rule::OverlappingEdge => "an edge may belong to only one of τ_c, τ_u, τ_r",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub state: Option<StateId>,
    pub edge: Option<(EdgeKind, StateId, StateId)>,
}

impl Violation {
    fn edge(rule: Rule, kind: EdgeKind, s: StateId, t: StateId) -> Self {
        Self {
            rule,
            state: Some(s),
            edge: Some((kind, s, t)),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.edge, self.state) {
            (Some((kind, s, t)), _) => {
                write!(f, "{kind} edge {s} -> {t}: {}", self.rule.description())
            }
            (None, Some(s)) => write!(f, "state {s}: {}", self.rule.description()),
            (None, None) => f.write_str(self.rule.description()),
        }
    }
}

/// Collects states, edges and labels before freezing them into a
/// [`TransitionSystem`].
#[derive(Clone, Debug, Default)]
pub struct SystemBuilder {
    num_states: usize,
    initial: StateId,
    errors: Vec<StateId>,
    edges: [Vec<(StateId, StateId)>; 3],
    labels: BTreeMap<StateId, String>,
}

impl SystemBuilder {
    pub fn new(num_states: usize) -> Self {
        Self {
            num_states,
            ..Default::default()
        }
    }

    pub fn initial(mut self, s: u32) -> Self {
        self.initial = StateId(s);
        self
    }

    pub fn error(mut self, s: u32) -> Self {
        self.errors.push(StateId(s));
        self
    }

    pub fn edge(mut self, kind: EdgeKind, s: u32, t: u32) -> Self {
        self.add_edge(kind, StateId(s), StateId(t));
        self
    }

    pub fn controlled(self, s: u32, t: u32) -> Self {
        self.edge(EdgeKind::Controlled, s, t)
    }

    pub fn uncontrolled(self, s: u32, t: u32) -> Self {
        self.edge(EdgeKind::Uncontrolled, s, t)
    }

    pub fn repair(self, s: u32, t: u32) -> Self {
        self.edge(EdgeKind::Repair, s, t)
    }

    pub fn label(mut self, s: u32, name: impl Into<String>) -> Self {
        self.labels.insert(StateId(s), name.into());
        self
    }

    pub fn set_initial(&mut self, s: StateId) {
        self.initial = s;
    }

    pub fn add_error(&mut self, s: StateId) {
        self.errors.push(s);
    }

    pub fn add_edge(&mut self, kind: EdgeKind, s: StateId, t: StateId) {
        self.edges[kind.slot()].push((s, t));
    }

    pub fn set_label(&mut self, s: StateId, name: impl Into<String>) {
        self.labels.insert(s, name.into());
    }

    pub fn build(self) -> Result<TransitionSystem, ModelError> {
        let n = self.num_states;
        if n == 0 {
            return Err(ModelError::NoStates);
        }
        let range = |what: &dyn Fn() -> String, s: StateId| {
            if s.index() < n {
                Ok(())
            } else {
                Err(ModelError::StateOutOfRange {
                    what: what(),
                    state: s.0,
                    num_states: n,
                })
            }
        };
        range(&|| "initial state".into(), self.initial)?;
        for &e in &self.errors {
            range(&|| "error set".into(), e)?;
        }
        for kind in EdgeKind::ALL {
            for &(s, t) in &self.edges[kind.slot()] {
                range(&|| format!("{kind} edge {s} -> {t}"), s)?;
                range(&|| format!("{kind} edge {s} -> {t}"), t)?;
            }
        }
        for &s in self.labels.keys() {
            range(&|| "label".into(), s)?;
        }
        let forward = [0, 1, 2].map(|i| Adjacency::build(n, &self.edges[i]));
        let backward = [0, 1, 2].map(|i| {
            let reversed: Vec<_> = self.edges[i].iter().map(|&(s, t)| (t, s)).collect();
            Adjacency::build(n, &reversed)
        });
        Ok(TransitionSystem {
            num_states: n,
            initial: self.initial,
            errors: StateSet::from_states(n, self.errors),
            forward,
            backward,
            labels: self.labels,
        })
    }
}

/// The four-state example: states `1..4` (indices `0..3`), error state `4`,
/// controlled self-loops and left moves, failures moving right.
pub fn example_system() -> TransitionSystem {
    TransitionSystem::builder(4)
        .initial(0)
        .error(3)
        .controlled(0, 0)
        .controlled(1, 1)
        .controlled(2, 2)
        .controlled(1, 0)
        .controlled(2, 1)
        .uncontrolled(0, 1)
        .uncontrolled(1, 2)
        .uncontrolled(2, 3)
        .label(0, "1")
        .label(1, "2")
        .label(2, "3")
        .label(3, "4")
        .build()
        .expect("example system is well formed")
}
