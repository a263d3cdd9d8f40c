//! Parameterized benchmark families.
//!
//! `avionics`, `voting` and `simple_voting` are emitted as CEFSM text;
//! `pbft`, `clock_sync` and `chain` are built directly as transition
//! systems. Each family states the resilience level it is designed for.

use std::fmt;
use std::str::FromStr;

use resilience_cefsm::{compile_text, CompileOptions};
use resilience_core::{StateId, SystemBuilder, TransitionSystem};
use thiserror::Error;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Avionics,
    Voting,
    SimpleVoting,
    Pbft,
    ClockSync,
    Chain,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Avionics,
        Family::Voting,
        Family::SimpleVoting,
        Family::Pbft,
        Family::ClockSync,
        Family::Chain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Avionics => "avionics",
            Family::Voting => "voting",
            Family::SimpleVoting => "simple_voting",
            Family::Pbft => "pbft",
            Family::ClockSync => "clock_sync",
            Family::Chain => "chain",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s || f.name().replace('_', "-") == s)
            .ok_or_else(|| {
                let names: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
                format!("unknown family `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BenchmarkSpec {
    /// `n` processors, `m` memory copies.
    Avionics { n: u32, m: u32 },
    /// `r` replicas voting for one client.
    Voting { r: u32 },
    /// `r` replicas, faulty ones are isolated without a client round.
    SimpleVoting { r: u32 },
    Pbft { r: u32 },
    /// `s` clock servers.
    ClockSync { s: u32 },
    /// `len + 2` non-error states in a line.
    Chain { len: u32 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("{family}: {param} must be at least {min}, got {value}")]
    TooSmall {
        family: Family,
        param: &'static str,
        min: u32,
        value: u32,
    },
}

pub enum Artifact {
    Cefsm(String),
    System(TransitionSystem),
}

fn ceil_div(a: u32, b: u32) -> u32 {
    a.div_ceil(b)
}

impl BenchmarkSpec {
    pub fn family(&self) -> Family {
        match self {
            BenchmarkSpec::Avionics { .. } => Family::Avionics,
            BenchmarkSpec::Voting { .. } => Family::Voting,
            BenchmarkSpec::SimpleVoting { .. } => Family::SimpleVoting,
            BenchmarkSpec::Pbft { .. } => Family::Pbft,
            BenchmarkSpec::ClockSync { .. } => Family::ClockSync,
            BenchmarkSpec::Chain { .. } => Family::Chain,
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let check = |param, value, min| {
            if value < min {
                Err(SpecError::TooSmall {
                    family: self.family(),
                    param,
                    min,
                    value,
                })
            } else {
                Ok(())
            }
        };
        match *self {
            BenchmarkSpec::Avionics { n, m } => {
                check("n", n, 1)?;
                check("m", m, 1)
            }
            BenchmarkSpec::Voting { r } | BenchmarkSpec::SimpleVoting { r } | BenchmarkSpec::Pbft { r } => {
                check("r", r, 1)
            }
            BenchmarkSpec::ClockSync { s } => check("s", s, 1),
            BenchmarkSpec::Chain { len } => check("len", len, 1),
        }
    }

    /// Design resilience level of the initial state; `-1` when the initial
    /// state cannot even survive without failures.
    ///
    /// Avionics tolerates fewer than half of its processors failing at once,
    /// and a block must leave at least one correct memory copy behind.
    pub fn expected_k(&self) -> i64 {
        let k = match *self {
            BenchmarkSpec::Avionics { n, m } => (ceil_div(n, 2) as i64 - 1).min(m as i64 - 1),
            BenchmarkSpec::Voting { r } | BenchmarkSpec::SimpleVoting { r } => ceil_div(r, 2) as i64 - 1,
            BenchmarkSpec::Pbft { r } => ceil_div(r, 3) as i64 - 1,
            BenchmarkSpec::ClockSync { s } => ceil_div(s, 3) as i64 - 1,
            BenchmarkSpec::Chain { len } => len as i64 + 1,
        };
        k.max(-1)
    }

    pub fn generate(&self) -> Result<Artifact, SpecError> {
        self.validate()?;
        Ok(match *self {
            BenchmarkSpec::Avionics { n, m } => Artifact::Cefsm(avionics(n, m)),
            BenchmarkSpec::Voting { r } => Artifact::Cefsm(voting(r)),
            BenchmarkSpec::SimpleVoting { r } => Artifact::Cefsm(simple_voting(r)),
            BenchmarkSpec::Pbft { r } => Artifact::System(pbft(r)),
            BenchmarkSpec::ClockSync { s } => Artifact::System(clock_sync(s)),
            BenchmarkSpec::Chain { len } => Artifact::System(chain(len)),
        })
    }

    /// Generates and, for CEFSM families, compiles.
    pub fn system(&self) -> Result<TransitionSystem, anyhow::Error> {
        Ok(match self.generate()? {
            Artifact::Cefsm(text) => compile_text(&text, CompileOptions::default())?.system,
            Artifact::System(sys) => sys,
        })
    }
}

impl fmt::Display for BenchmarkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchmarkSpec::Avionics { n, m } => write!(f, "avionics(n={n}, m={m})"),
            BenchmarkSpec::Voting { r } => write!(f, "voting(r={r})"),
            BenchmarkSpec::SimpleVoting { r } => write!(f, "simple_voting(r={r})"),
            BenchmarkSpec::Pbft { r } => write!(f, "pbft(r={r})"),
            BenchmarkSpec::ClockSync { s } => write!(f, "clock_sync(s={s})"),
            BenchmarkSpec::Chain { len } => write!(f, "chain(len={len})"),
        }
    }
}

/// Processors run the main computation under majority checking and
/// service faulty memory copies; memories fail silently, are detected, and
/// are rewritten by a processor taken off the main computation.
pub fn avionics(n: u32, m: u32) -> String {
    format!(
        "\
# Avionics: {n} processors, {m} memory copies.
#
# crp  processors running the main computation
# cfp  processors that failed and have not been removed yet
# crm  correct memory copies
# cfm  faulty memory copies not yet taken into repair
#
# Errors: the faulty processors are no minority among the running ones
# (majority checking fails), no correct memory copy is left to repair
# from, or a detected memory fault has no processor that could service it.
# Fault detection is reliable.

vars
  crp 0..{n} = {n}
  cfp 0..{n} = 0
  crm 0..{m} = {m}
  cfm 0..{m} = 0

channels
  fd rs

template Processor {n}
  locations Run Free Repairing Down
  initial Run
  Run -> Run C
  Run -> Down U do crp--, cfp++
  Down -> Free C do cfp--
  Run -> Free C do crp--
  Free -> Run C do crp++
  Free -> Repairing C !fd
  Repairing -> Free R !rs

template Memory {m}
  locations Ok FaultyUndetected FaultyDetected Repairing
  initial Ok
  Ok -> FaultyUndetected U do crm--, cfm++
  FaultyUndetected -> FaultyDetected C
  FaultyDetected -> Repairing C ?fd do cfm--
  Repairing -> Ok R ?rs do crm++

error
  cfp >= crp
  crm == 0
  Memory.FaultyDetected > 0 && Processor.Run + Processor.Free == 0
"
    )
}

/// Replicas answer a client's vote; a faulty replica is isolated during a
/// vote round and restored by a repair.
pub fn voting(r: u32) -> String {
    format!(
        "\
# Voting: {r} replicas, one client.
#
# good    replicas voting correctly
# faulty  replicas voting wrongly and still in the vote
#
# Error: the faulty replicas are no minority among the voting ones.
# A vote round (client Collecting -> Idle) lets the client single out one
# faulty replica, which then restores its state from the others.

vars
  good 0..{r} = {r}
  faulty 0..{r} = 0

channels
  vote

template Client 1
  locations Idle Collecting
  Idle -> Idle C
  Idle -> Collecting C
  Collecting -> Collecting C
  Collecting -> Idle C !vote

template Replica {r}
  locations Good Faulty Restoring
  Good -> Faulty U do good--, faulty++
  Good -> Good C ?vote
  Faulty -> Restoring C ?vote do faulty--
  Restoring -> Good R do good++

error
  faulty >= good
"
    )
}

/// Voting without a client: faulty replicas are isolated directly.
pub fn simple_voting(r: u32) -> String {
    format!(
        "\
# Simple voting: {r} replicas, faulty ones are isolated directly.
#
# Error: the faulty replicas are no minority among the voting ones.

vars
  good 0..{r} = {r}
  faulty 0..{r} = 0

template Replica {r}
  locations Good Faulty Restoring
  Good -> Good C
  Good -> Faulty U do good--, faulty++
  Faulty -> Restoring C do faulty--
  Restoring -> Good R do good++

error
  faulty >= good
"
    )
}

const PHASES: [&str; 4] = ["Idle", "PrePrepare", "Prepare", "Commit"];

/// Fault-threshold abstraction of PBFT.
///
/// A state is `(f, p, phase)`: `f` Byzantine replicas still in the protocol,
/// `p` replicas being recovered. A phase advances when the correct replicas
/// in service form a quorum of `2f+1`. A failure turns a correct replica
/// Byzantine; the controller can start the recovery of a Byzantine replica,
/// which a repair completes. All states with `3f >= r` collapse into one
/// error state.
pub fn pbft(r: u32) -> TransitionSystem {
    let mut states: Vec<(u32, u32, usize)> = Vec::new();
    for f in 0..=r {
        for p in 0..=r - f {
            if 3 * f >= r {
                continue;
            }
            for phase in 0..PHASES.len() {
                states.push((f, p, phase));
            }
        }
    }
    let error = states.len() as u32;
    let id = |f: u32, p: u32, phase: usize| -> u32 {
        if 3 * f >= r {
            return error;
        }
        states
            .iter()
            .position(|&s| s == (f, p, phase))
            .expect("state enumerated") as u32
    };
    let mut b = SystemBuilder::new(states.len() + 1);
    b.add_error(StateId(error));
    b.set_label(StateId(error), "error");
    for (i, &(f, p, phase)) in states.iter().enumerate() {
        let s = StateId(i as u32);
        b.set_label(s, format!("f={f} p={p} {}", PHASES[phase]));
        let correct = r - f - p;
        b.add_edge(resilience_core::EdgeKind::Controlled, s, s);
        if correct >= 2 * f + 1 {
            let next = StateId(id(f, p, (phase + 1) % PHASES.len()));
            if next != s {
                b.add_edge(resilience_core::EdgeKind::Controlled, s, next);
            }
        }
        if f > 0 {
            b.add_edge(resilience_core::EdgeKind::Controlled, s, StateId(id(f - 1, p + 1, phase)));
        }
        if f + p < r {
            b.add_edge(resilience_core::EdgeKind::Uncontrolled, s, StateId(id(f + 1, p, phase)));
        }
        if p > 0 {
            b.add_edge(resilience_core::EdgeKind::Repair, s, StateId(id(f, p - 1, phase)));
        }
    }
    b.build().expect("pbft states in range")
}

const ROUNDS: [&str; 3] = ["Read", "Average", "Adjust"];

/// Fault-threshold abstraction of fault-tolerant clock synchronization.
///
/// A state is `(d, c, round)`: `d` clocks drifting undetected, `c` clocks
/// being corrected. Rounds cycle Read, Average, Adjust; a drifting clock can
/// only be taken into correction in the Adjust round, and a repair finishes
/// the correction. All states with `3d >= s` collapse into one error state.
pub fn clock_sync(s: u32) -> TransitionSystem {
    let mut states: Vec<(u32, u32, usize)> = Vec::new();
    for d in 0..=s {
        if 3 * d >= s {
            continue;
        }
        for c in 0..=s - d {
            for round in 0..ROUNDS.len() {
                states.push((d, c, round));
            }
        }
    }
    let error = states.len() as u32;
    let id = |d: u32, c: u32, round: usize| -> u32 {
        if 3 * d >= s {
            return error;
        }
        states
            .iter()
            .position(|&x| x == (d, c, round))
            .expect("state enumerated") as u32
    };
    let mut b = SystemBuilder::new(states.len() + 1);
    b.add_error(StateId(error));
    b.set_label(StateId(error), "error");
    for (i, &(d, c, round)) in states.iter().enumerate() {
        let st = StateId(i as u32);
        b.set_label(st, format!("d={d} c={c} {}", ROUNDS[round]));
        b.add_edge(
            resilience_core::EdgeKind::Controlled,
            st,
            StateId(id(d, c, (round + 1) % ROUNDS.len())),
        );
        if d > 0 && ROUNDS[round] == "Adjust" {
            b.add_edge(resilience_core::EdgeKind::Controlled, st, StateId(id(d - 1, c + 1, round)));
        }
        if d + c < s {
            b.add_edge(resilience_core::EdgeKind::Uncontrolled, st, StateId(id(d + 1, c, round)));
        }
        if c > 0 {
            b.add_edge(resilience_core::EdgeKind::Repair, st, StateId(id(d, c - 1, round)));
        }
    }
    b.build().expect("clock states in range")
}

/// `len + 2` non-error states `0..=len+1` and the error state `len + 2`.
/// Failures push one step to the right, the controller can stay or step
/// back to the left. `chain(1)` is the four-state example system.
pub fn chain(len: u32) -> TransitionSystem {
    let last = len + 1;
    let error = len + 2;
    let mut b = SystemBuilder::new(error as usize + 1);
    b.add_error(StateId(error));
    for i in 0..=error {
        b.set_label(StateId(i), (i + 1).to_string());
    }
    for i in 0..=last {
        b.add_edge(resilience_core::EdgeKind::Controlled, StateId(i), StateId(i));
        if i > 0 {
            b.add_edge(resilience_core::EdgeKind::Controlled, StateId(i), StateId(i - 1));
        }
        b.add_edge(resilience_core::EdgeKind::Uncontrolled, StateId(i), StateId(i + 1));
    }
    b.build().expect("chain states in range")
}
