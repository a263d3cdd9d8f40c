//! Explicit-state compilation by counter abstraction.
//!
//! A configuration stores the value of every shared variable and, for each
//! template, how many replicas sit in each location. A local transition is
//! enabled when its source location is occupied and its guard holds; a send
//! `!ch` and a receive `?ch` fire together as one step. Guards read the
//! configuration before the step, updates run left to right (sender first)
//! and a step whose updates leave a variable outside its bounds is disabled.
//!
//! Configurations satisfying the error predicate become sinks. Controlled
//! steps into error configurations are dropped, since a controller never
//! has to take them. Repair steps into error configurations are rejected as
//! modeling errors. A configuration with no enabled step at all stutters
//! through a controlled self-loop; one that has failure or repair steps but
//! no controlled step is reported.
//!
//! With `explicit_identities` every replica becomes its own single-instance
//! copy of the template, which gives the uncompressed product for checking
//! the abstraction on small models.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use resilience_core::model::Violation;
use resilience_core::{EdgeKind, StateId, SystemBuilder, TransitionSystem};
use serde::Serialize;
use thiserror::Error;

use crate::ast::{CefsmModel, Expr, Sync, Update, UpdateOp};

pub const DEFAULT_MAX_STATES: usize = 5_000_000;
pub const EXPLICIT_REPLICA_LIMIT: u32 = 3;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct CompileOptions {
    pub max_states: usize,
    pub explicit_identities: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            max_states: DEFAULT_MAX_STATES,
            explicit_identities: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("more than {cap} reachable configurations")]
    TooManyStates { cap: usize },
    #[error("initial configuration satisfies the error predicate: {0}")]
    InitialIsError(String),
    #[error("configuration has failure or repair steps but no controlled step: {0}")]
    NoControlledSuccessor(String),
    #[error("repair step (line {line}) leads into an error configuration: {from} -> {to}")]
    RepairIntoError { line: usize, from: String, to: String },
    #[error("steps of kinds {first} and {second} both lead from {from} to {to}")]
    MixedKinds {
        first: EdgeKind,
        second: EdgeKind,
        from: String,
        to: String,
    },
    #[error("template `{template}` has {count} replicas; explicit identities allow at most {EXPLICIT_REPLICA_LIMIT}")]
    TooManyReplicas { template: String, count: u32 },
    #[error("compiled system is invalid: {0:?}")]
    Invalid(Vec<Violation>),
}

/// Maps state ids back to configurations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateDictionary {
    pub vars: Vec<String>,
    /// `Template.Location`, or `Template#i.Location` with explicit identities.
    pub slots: Vec<String>,
    width: usize,
    data: Vec<i32>,
}

#[derive(Serialize)]
struct DictEntry<'a> {
    id: u32,
    vars: BTreeMap<&'a str, i32>,
    locations: BTreeMap<&'a str, i32>,
}

impl StateDictionary {
    pub fn len(&self) -> usize {
        self.data.len() / self.width.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn raw(&self, s: StateId) -> &[i32] {
        &self.data[s.index() * self.width..(s.index() + 1) * self.width]
    }

    pub fn var(&self, s: StateId, name: &str) -> Option<i32> {
        let i = self.vars.iter().position(|v| v == name)?;
        Some(self.raw(s)[i])
    }

    /// Occupancy of a slot name such as `Processor.Run`.
    pub fn occupancy(&self, s: StateId, slot: &str) -> Option<i32> {
        let i = self.slots.iter().position(|v| v == slot)?;
        Some(self.raw(s)[self.vars.len() + i])
    }

    /// `crp=3 cfp=0 | Processor.Run=3 Memory.Ok=3` (empty locations omitted).
    pub fn describe(&self, s: StateId) -> String {
        let c = self.raw(s);
        let nv = self.vars.len();
        let mut out = String::new();
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v}={}", c[i]);
        }
        out.push_str(" |");
        for (i, slot) in self.slots.iter().enumerate() {
            if c[nv + i] != 0 {
                let _ = write!(out, " {slot}={}", c[nv + i]);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let nv = self.vars.len();
        let entries: Vec<DictEntry> = (0..self.len())
            .map(|i| {
                let c = self.raw(StateId(i as u32));
                DictEntry {
                    id: i as u32,
                    vars: self.vars.iter().map(String::as_str).zip(c[..nv].iter().copied()).collect(),
                    locations: self
                        .slots
                        .iter()
                        .map(String::as_str)
                        .zip(c[nv..].iter().copied())
                        .filter(|&(_, n)| n != 0)
                        .collect(),
                }
            })
            .collect();
        serde_json::to_string_pretty(&entries).expect("dictionary serializes")
    }
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub system: TransitionSystem,
    pub dictionary: StateDictionary,
    /// Controlled steps removed because they enter an error configuration.
    pub dropped_controlled: usize,
}

#[derive(Clone)]
struct Step<'m> {
    src: usize,
    dst: usize,
    kind: EdgeKind,
    guard: Option<&'m Expr>,
    updates: &'m [Update],
    line: usize,
}

struct Machine<'m> {
    model: &'m CefsmModel,
    nv: usize,
    /// Slots holding the replicas of `(template, location)`.
    occupancy: Vec<Vec<Vec<usize>>>,
    singles: Vec<Step<'m>>,
    pairs: Vec<(Step<'m>, Step<'m>)>,
}

impl<'m> Machine<'m> {
    fn var(&self, c: &[i32], i: usize) -> i64 {
        c[i] as i64
    }

    fn eval(&self, e: &Expr, c: &[i32]) -> i64 {
        e.eval(&|i| self.var(c, i), &|t, l| {
            self.occupancy[t][l].iter().map(|&s| c[self.nv + s] as i64).sum()
        })
    }

    fn guard_ok(&self, step: &Step, c: &[i32]) -> bool {
        step.guard.is_none_or(|g| self.eval(g, c) != 0)
    }

    fn apply_updates(&self, step: &Step, c: &mut [i32]) {
        for u in step.updates {
            let v = match &u.op {
                UpdateOp::Inc => c[u.var] as i64 + 1,
                UpdateOp::Dec => c[u.var] as i64 - 1,
                UpdateOp::Assign(e) => self.eval(e, c),
            };
            c[u.var] = v.clamp(i32::MIN as i64, i32::MAX as i64) as i32;
        }
    }

    fn in_bounds(&self, c: &[i32]) -> bool {
        self.model
            .vars
            .iter()
            .enumerate()
            .all(|(i, v)| (v.lo..=v.hi).contains(&(c[i] as i64)))
    }

    fn is_error(&self, c: &[i32]) -> bool {
        self.model.error.as_ref().is_some_and(|e| self.eval(e, c) != 0)
    }

    /// Enabled steps of `c` as `(kind, line, successor)`, in declaration order.
    fn successors(&self, c: &[i32], out: &mut Vec<(EdgeKind, usize, Vec<i32>)>) {
        out.clear();
        let nv = self.nv;
        for step in &self.singles {
            if c[nv + step.src] == 0 || !self.guard_ok(step, c) {
                continue;
            }
            let mut next = c.to_vec();
            next[nv + step.src] -= 1;
            next[nv + step.dst] += 1;
            self.apply_updates(step, &mut next);
            if self.in_bounds(&next) {
                out.push((step.kind, step.line, next));
            }
        }
        for (send, recv) in &self.pairs {
            let needed = if send.src == recv.src { 2 } else { 1 };
            if c[nv + send.src] < needed || c[nv + recv.src] == 0 {
                continue;
            }
            if !self.guard_ok(send, c) || !self.guard_ok(recv, c) {
                continue;
            }
            let mut next = c.to_vec();
            next[nv + send.src] -= 1;
            next[nv + send.dst] += 1;
            next[nv + recv.src] -= 1;
            next[nv + recv.dst] += 1;
            self.apply_updates(send, &mut next);
            self.apply_updates(recv, &mut next);
            if self.in_bounds(&next) {
                out.push((send.kind, send.line, next));
            }
        }
    }
}

pub fn compile(model: &CefsmModel, options: CompileOptions) -> Result<Compiled, CompileError> {
    let nv = model.vars.len();
    let mut slots = Vec::new();
    let mut occupancy: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut init = Vec::new();
    let mut singles = Vec::new();
    let mut senders: Vec<(Sync, Step)> = Vec::new();
    for t in &model.templates {
        let (instances, per_instance) = if options.explicit_identities {
            if t.count > EXPLICIT_REPLICA_LIMIT {
                return Err(CompileError::TooManyReplicas {
                    template: t.name.clone(),
                    count: t.count,
                });
            }
            (t.count, 1)
        } else {
            (1, t.count)
        };
        let mut occ = vec![Vec::new(); t.locations.len()];
        for i in 0..instances {
            let base = slots.len();
            for (l, loc) in t.locations.iter().enumerate() {
                slots.push(if options.explicit_identities {
                    format!("{}#{i}.{loc}", t.name)
                } else {
                    format!("{}.{loc}", t.name)
                });
                occ[l].push(base + l);
                init.push(if l == t.initial { per_instance as i32 } else { 0 });
            }
            for tr in &t.transitions {
                let step = Step {
                    src: base + tr.src,
                    dst: base + tr.dst,
                    kind: tr.kind,
                    guard: tr.guard.as_ref(),
                    updates: &tr.updates,
                    line: tr.line,
                };
                match tr.sync {
                    None => singles.push(step),
                    Some(s) => senders.push((s, step)),
                }
            }
        }
        occupancy.push(occ);
    }
    let mut pairs = Vec::new();
    for (s, send) in &senders {
        let Sync::Send(ch) = s else { continue };
        for (r, recv) in &senders {
            if *r == Sync::Recv(*ch) {
                pairs.push((send.clone(), recv.clone()));
            }
        }
    }
    let machine = Machine {
        model,
        nv,
        occupancy,
        singles,
        pairs,
    };

    let mut start: Vec<i32> = model.vars.iter().map(|v| v.init as i32).collect();
    start.extend(init);
    let width = start.len();
    let dictionary_of = |data: Vec<i32>| StateDictionary {
        vars: model.vars.iter().map(|v| v.name.clone()).collect(),
        slots: slots.clone(),
        width,
        data,
    };

    let mut index: HashMap<Box<[i32]>, u32> = HashMap::new();
    let mut data: Vec<i32> = Vec::new();
    let mut errors: Vec<bool> = Vec::new();
    let mut edges: Vec<(u32, EdgeKind, u32)> = Vec::new();
    let mut dropped = 0usize;

    let mut intern = |c: Vec<i32>, data: &mut Vec<i32>, errors: &mut Vec<bool>| -> Result<u32, CompileError> {
        if let Some(&id) = index.get(c.as_slice()) {
            return Ok(id);
        }
        if errors.len() >= options.max_states {
            return Err(CompileError::TooManyStates {
                cap: options.max_states,
            });
        }
        let id = errors.len() as u32;
        errors.push(machine.is_error(&c));
        data.extend_from_slice(&c);
        index.insert(c.into_boxed_slice(), id);
        Ok(id)
    };

    intern(start, &mut data, &mut errors)?;
    if errors[0] {
        return Err(CompileError::InitialIsError(dictionary_of(data).describe(StateId(0))));
    }
    let mut succ = Vec::new();
    let mut next = 0usize;
    while next < errors.len() {
        let id = next as u32;
        next += 1;
        if errors[id as usize] {
            continue;
        }
        let config: Vec<i32> = data[id as usize * width..(id as usize + 1) * width].to_vec();
        machine.successors(&config, &mut succ);
        let mut out: BTreeMap<u32, (EdgeKind, usize)> = BTreeMap::new();
        let mut any_step = false;
        for (kind, line, c) in succ.drain(..) {
            any_step = true;
            let t = intern(c, &mut data, &mut errors)?;
            if errors[t as usize] {
                match kind {
                    EdgeKind::Controlled => {
                        dropped += 1;
                        continue;
                    }
                    EdgeKind::Repair => {
                        let d = dictionary_of(data.clone());
                        return Err(CompileError::RepairIntoError {
                            line,
                            from: d.describe(StateId(id)),
                            to: d.describe(StateId(t)),
                        });
                    }
                    EdgeKind::Uncontrolled => {}
                }
            }
            if let Some(&(prev, _)) = out.get(&t) {
                if prev != kind {
                    let d = dictionary_of(data.clone());
                    return Err(CompileError::MixedKinds {
                        first: prev,
                        second: kind,
                        from: d.describe(StateId(id)),
                        to: d.describe(StateId(t)),
                    });
                }
                continue;
            }
            out.insert(t, (kind, line));
        }
        if !any_step {
            out.insert(id, (EdgeKind::Controlled, 0));
        }
        if !out.values().any(|&(k, _)| k == EdgeKind::Controlled) {
            return Err(CompileError::NoControlledSuccessor(
                dictionary_of(data.clone()).describe(StateId(id)),
            ));
        }
        edges.extend(out.into_iter().map(|(t, (k, _))| (id, k, t)));
    }

    let mut b = SystemBuilder::new(errors.len());
    for (i, &e) in errors.iter().enumerate() {
        if e {
            b.add_error(StateId(i as u32));
        }
    }
    for (s, k, t) in edges {
        b.add_edge(k, StateId(s), StateId(t));
    }
    let system = b.build().expect("compiled ids are in range");
    let violations = system.validate();
    if !violations.is_empty() {
        return Err(CompileError::Invalid(violations));
    }
    Ok(Compiled {
        system,
        dictionary: dictionary_of(data),
        dropped_controlled: dropped,
    })
}
