//! Adversarial play-out of resilience strategies.
//!
//! Each play starts inside the resilient set with budget `k`. The
//! protagonist follows the strategy; the antagonist injects failures while
//! budget remains and otherwise resolves the protagonist's offer. Re-entering
//! the resilient set resets the budget to `k`.
//!
//! Plays run in parallel. Play `i` owns a ChaCha8 generator seeded with the
//! run seed on stream `i`, so results do not depend on thread scheduling.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Mode, Move};
use crate::model::{EdgeKind, StateId, TransitionSystem};
use crate::stateset::StateSet;
use crate::strategy::ResilienceStrategy;

pub const MAX_HORIZON: u64 = 10_000_000;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Fails with probability 1/2 whenever possible; uniform choices.
    Random,
    /// Picks the failure with the least attractor headroom, ties by lowest id.
    /// Also resolves the strategy's own choices against the protagonist, so
    /// greedy plays are deterministic.
    Greedy,
}

impl Policy {
    pub const ALL: [Policy; 2] = [Policy::Random, Policy::Greedy];
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Random => "random",
            Policy::Greedy => "greedy",
        })
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random" => Ok(Policy::Random),
            "greedy" => Ok(Policy::Greedy),
            other => Err(format!("unknown antagonist `{other}` (expected random or greedy)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StartStates {
    Initial,
    Fixed(StateId),
    /// Play `i` starts in the `i mod |R|`-th resilient state.
    RotateResilient,
}

#[derive(Clone, Debug)]
pub struct SimulationConfig {
    pub policy: Policy,
    pub plays: u64,
    pub horizon: u64,
    pub seed: u64,
    pub start: StartStates,
    /// Consecutive failure-free steps outside the resilient set after which
    /// a play counts as stalled. Defaults to `2·(k+1)·|S|`, twice the
    /// longest recovery a sound strategy can take.
    pub stall_bound: Option<u64>,
}

impl SimulationConfig {
    pub fn new(policy: Policy, plays: u64, horizon: u64, seed: u64) -> Self {
        Self {
            policy,
            plays,
            horizon,
            seed,
            start: StartStates::Initial,
            stall_bound: None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimulationError {
    #[error("strategy has an empty resilient set")]
    EmptyResilientSet,
    #[error("start state {0} is not in the resilient set")]
    StartNotResilient(StateId),
    #[error("horizon {0} exceeds the maximum of {MAX_HORIZON} steps")]
    HorizonTooLong(u64),
    #[error("strategy covers {strategy} states but the system has {system}")]
    SizeMismatch { strategy: usize, system: usize },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Safety,
    Recovery,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mover {
    Protagonist,
    Antagonist,
    Repair,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Position {
    pub state: StateId,
    pub phase: Phase,
    pub budget: u32,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub mover: Mover,
    pub kind: EdgeKind,
    pub from: StateId,
    pub to: StateId,
    /// Position after the move.
    pub position: Position,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    SurvivedHorizon,
    ErrorReached,
    /// Recovery made no progress for longer than the stall bound.
    Stalled,
    /// The strategy left the resilient set without a failure.
    LeftResilientSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayTrace {
    pub seed: u64,
    pub play: u64,
    pub k: u32,
    pub policy: Policy,
    pub start: Position,
    pub steps: Vec<TraceStep>,
    pub outcome: Outcome,
    pub resets: u64,
}

impl PlayTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Checks that moves follow declared edges and that the budget drops
    /// exactly on failures and resets exactly on re-entry into `resilient`.
    pub fn check(&self, sys: &TransitionSystem, resilient: &StateSet) -> Result<(), String> {
        let k = self.k;
        let mut pos = self.start;
        if pos.phase != Phase::Safety || pos.budget != k || !resilient.contains(pos.state) {
            return Err(format!("play must start in the resilient set with budget {k}"));
        }
        let mut resets = 0;
        for (i, step) in self.steps.iter().enumerate() {
            let err = |msg: String| Err(format!("step {i}: {msg}"));
            if step.from != pos.state {
                return err(format!("starts at {} but play is at {}", step.from, pos.state));
            }
            if step.to.index() >= sys.num_states() || !sys.successors(step.from, step.kind).contains(&step.to) {
                return err(format!("{} -> {} is not a {} edge", step.from, step.to, step.kind));
            }
            let expected_kind = match step.mover {
                Mover::Protagonist => EdgeKind::Controlled,
                Mover::Antagonist => EdgeKind::Uncontrolled,
                Mover::Repair => EdgeKind::Repair,
            };
            if step.kind != expected_kind {
                return err(format!("{:?} cannot take a {} edge", step.mover, step.kind));
            }
            let mut budget = pos.budget;
            let mut phase = pos.phase;
            if step.mover == Mover::Antagonist {
                if budget == 0 {
                    return err("failure with exhausted budget".into());
                }
                budget -= 1;
                phase = Phase::Recovery;
            }
            if resilient.contains(step.to) {
                if phase == Phase::Recovery {
                    resets += 1;
                }
                phase = Phase::Safety;
                budget = k;
            } else {
                phase = Phase::Recovery;
            }
            let expected = Position {
                state: step.to,
                phase,
                budget,
            };
            if step.position != expected {
                return err(format!("recorded {:?}, expected {:?}", step.position, expected));
            }
            pos = expected;
        }
        if resets != self.resets {
            return Err(format!("recorded {} resets, counted {resets}", self.resets));
        }
        let ends_in_error = sys.is_error(pos.state);
        if ends_in_error != (self.outcome == Outcome::ErrorReached) {
            return Err(format!("outcome {:?} inconsistent with final state {}", self.outcome, pos.state));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub policy: Policy,
    pub plays: u64,
    pub horizon: u64,
    pub seed: u64,
    pub steps: u64,
    pub error_reaches: u64,
    pub stalled_plays: u64,
    pub safety_breaches: u64,
    /// Protagonist positions outside the resilient set without a recovery move.
    pub uncovered_positions: u64,
    pub failures: u64,
    pub repairs: u64,
    pub resets: u64,
    pub mean_recovery_length: f64,
    pub max_block_failures: u32,
    pub budget_violations: u64,
    /// Positions outside the resilient set reached with no budget left.
    pub exhausted_positions: u64,
    pub first_failure: Option<PlayTrace>,
}

impl SimulationReport {
    pub fn is_clean(&self) -> bool {
        self.error_reaches == 0
            && self.stalled_plays == 0
            && self.safety_breaches == 0
            && self.budget_violations == 0
    }
}

#[derive(Clone, Debug, Default)]
struct PlayStats {
    steps: u64,
    error: bool,
    stalled: bool,
    breach: bool,
    uncovered: u64,
    failures: u64,
    repairs: u64,
    resets: u64,
    recovery_steps: u64,
    max_block_failures: u32,
    budget_violations: u64,
    exhausted: u64,
    failing_play: Option<u64>,
}

impl PlayStats {
    fn failed(&self) -> bool {
        self.error || self.stalled || self.breach || self.budget_violations > 0
    }

    /// Adds `times` repetitions of the counters accumulated since `before`.
    fn repeat_since(&mut self, before: &PlayStats, times: u64) {
        self.steps += times * (self.steps - before.steps);
        self.uncovered += times * (self.uncovered - before.uncovered);
        self.failures += times * (self.failures - before.failures);
        self.repairs += times * (self.repairs - before.repairs);
        self.resets += times * (self.resets - before.resets);
        self.recovery_steps += times * (self.recovery_steps - before.recovery_steps);
        self.budget_violations += times * (self.budget_violations - before.budget_violations);
        self.exhausted += times * (self.exhausted - before.exhausted);
    }
}

#[derive(Clone, Debug, Default)]
struct Totals {
    steps: u64,
    errors: u64,
    stalled: u64,
    breaches: u64,
    uncovered: u64,
    failures: u64,
    repairs: u64,
    resets: u64,
    recovery_steps: u64,
    max_block_failures: u32,
    budget_violations: u64,
    exhausted: u64,
    first_failing: Option<u64>,
}

impl Totals {
    fn from_play(p: PlayStats) -> Self {
        Totals {
            steps: p.steps,
            errors: p.error as u64,
            stalled: p.stalled as u64,
            breaches: p.breach as u64,
            uncovered: p.uncovered,
            failures: p.failures,
            repairs: p.repairs,
            resets: p.resets,
            recovery_steps: p.recovery_steps,
            max_block_failures: p.max_block_failures,
            budget_violations: p.budget_violations,
            exhausted: p.exhausted,
            first_failing: p.failing_play,
        }
    }

    fn merge(mut self, o: Totals) -> Totals {
        self.steps += o.steps;
        self.errors += o.errors;
        self.stalled += o.stalled;
        self.breaches += o.breaches;
        self.uncovered += o.uncovered;
        self.failures += o.failures;
        self.repairs += o.repairs;
        self.resets += o.resets;
        self.recovery_steps += o.recovery_steps;
        self.max_block_failures = self.max_block_failures.max(o.max_block_failures);
        self.budget_violations += o.budget_violations;
        self.exhausted += o.exhausted;
        self.first_failing = match (self.first_failing, o.first_failing) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self
    }
}

const NO_MOVE: u32 = u32::MAX;
const WAIT: u32 = u32::MAX - 1;
const NONE: u32 = u32::MAX;

/// Random bits drawn from the play's ChaCha8 stream, a few at a time.
struct Dice {
    rng: ChaCha8Rng,
    bits: u64,
    left: u32,
}

impl Dice {
    fn new(seed: u64, play: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(play);
        Dice { rng, bits: 0, left: 0 }
    }

    fn take(&mut self, n: u32) -> u64 {
        if self.left < n {
            self.bits = self.rng.next_u64();
            self.left = 64;
        }
        let v = self.bits & ((1u64 << n) - 1);
        self.bits >>= n;
        self.left -= n;
        v
    }

    fn coin(&mut self) -> bool {
        self.take(1) == 1
    }

    /// Uniform index below `n`, by rejection on the smallest covering bit width.
    fn below(&mut self, n: usize) -> usize {
        if n <= 1 {
            return 0;
        }
        let width = usize::BITS - (n - 1).leading_zeros();
        loop {
            let v = self.take(width) as usize;
            if v < n {
                return v;
            }
        }
    }
}

#[derive(Copy, Clone, Default)]
struct Span {
    start: u32,
    len: u32,
}

/// Everything a play needs about one state.
#[derive(Copy, Clone)]
struct Node {
    inside: bool,
    error: bool,
    action: u32,
    level: u32,
    distance: u32,
    first_controlled: u32,
    safety: Span,
    failures: Span,
    repairs: Span,
}

/// Strategy and system flattened into one table indexed by state.
struct Player {
    k: u32,
    policy: Policy,
    nodes: Vec<Node>,
    pool: Vec<StateId>,
    fairness: u32,
    stall_bound: u64,
}

/// Greedy preference: smaller is worse for the protagonist.
type Damage = (u8, i64, i64, std::cmp::Reverse<u32>);

impl Player {
    fn new(sys: &TransitionSystem, strat: &ResilienceStrategy, policy: Policy, stall_bound: Option<u64>) -> Self {
        let n = sys.num_states();
        let mut pool = Vec::new();
        let span = |pool: &mut Vec<StateId>, items: &[StateId]| {
            let s = Span {
                start: pool.len() as u32,
                len: items.len() as u32,
            };
            pool.extend_from_slice(items);
            s
        };
        let mut nodes: Vec<Node> = sys
            .states()
            .map(|s| {
                let repairs = match strat.mode {
                    Mode::Base => &[][..],
                    Mode::Repair => sys.successors(s, EdgeKind::Repair),
                };
                Node {
                    inside: strat.resilient.contains(s),
                    error: sys.is_error(s),
                    action: NO_MOVE,
                    level: 0,
                    distance: 0,
                    first_controlled: sys.successors(s, EdgeKind::Controlled).first().map_or(NONE, |t| t.0),
                    safety: Span::default(),
                    failures: span(&mut pool, sys.successors(s, EdgeKind::Uncontrolled)),
                    repairs: span(&mut pool, repairs),
                }
            })
            .collect();
        for (s, moves) in &strat.safety_moves {
            nodes[s.index()].safety = span(&mut pool, moves);
        }
        for (s, r) in &strat.recovery_moves {
            let node = &mut nodes[s.index()];
            node.action = match r.action {
                Move::To(t) => t.0,
                Move::Wait => WAIT,
            };
            node.level = r.level;
            node.distance = r.distance;
        }
        Player {
            k: strat.k,
            policy,
            nodes,
            pool,
            fairness: n as u32,
            stall_bound: stall_bound.unwrap_or(2 * (strat.k as u64 + 1) * n as u64),
        }
    }

    fn slice(&self, span: Span) -> &[StateId] {
        &self.pool[span.start as usize..(span.start + span.len) as usize]
    }

    fn damage(&self, u: StateId, budget_after: u32) -> Damage {
        let node = &self.nodes[u.index()];
        let tie = std::cmp::Reverse(u.0);
        if node.error {
            (0, 0, 0, tie)
        } else if node.inside {
            (3, 0, 0, tie)
        } else if node.action == NO_MOVE {
            (1, 0, 0, tie)
        } else {
            let headroom = node.level as i64 - budget_after as i64;
            (2, headroom, -(node.distance as i64), tie)
        }
    }

    /// Lowest-damage target, ties to the lowest id.
    fn most_damaging(&self, targets: &[StateId], budget_after: u32) -> StateId {
        *targets
            .iter()
            .max_by_key(|&&u| std::cmp::Reverse(self.damage(u, budget_after)))
            .expect("nonempty targets")
    }

    /// Safety move into the state whose worst failure is most damaging.
    fn most_exposed(&self, moves: &[StateId]) -> StateId {
        let exposure = |t: StateId| {
            let fails = self.slice(self.nodes[t.index()].failures);
            let worst = fails.iter().map(|&u| self.damage(u, self.k.saturating_sub(1))).min();
            (worst.is_none(), worst, std::cmp::Reverse(t.0))
        };
        *moves.iter().min_by_key(|&&t| exposure(t)).expect("nonempty moves")
    }

    fn run(&self, seed: u64, play: u64, start: StateId, mut trace: Option<&mut Vec<TraceStep>>, horizon: u64) -> PlayStats {
        let mut dice = Dice::new(seed, play);
        let k = self.k;
        let mut st = PlayStats::default();
        let mut s = start;
        let mut budget = k;
        let mut recovering = false;
        let mut block_failures = 0u32;
        let mut recovery_len = 0u64;
        let mut idle = 0u64;
        let mut starved = 0u32;
        let mut offer: Vec<StateId> = Vec::with_capacity(8);
        let fallback = |node: &Node| (node.first_controlled != NONE).then_some(StateId(node.first_controlled));
        // Greedy plays are deterministic, and at a resilient state every
        // local variable except the state and the starvation counter is
        // reset. A repeat of that pair means the rest of the play is periodic.
        let mut seen = (self.policy == Policy::Greedy && trace.is_none()).then(std::collections::HashMap::new);

        while st.steps < horizon {
            let node = self.nodes[s.index()];
            if let (Some(map), true) = (seen.as_mut(), node.inside) {
                if let Some(before) = map.insert((s, starved), st.clone()) {
                    let period = st.steps - before.steps;
                    let times = (horizon - st.steps) / period;
                    st.repeat_since(&before, times);
                    seen = None;
                    if st.steps >= horizon {
                        break;
                    }
                }
            }
            st.steps += 1;
            let repairs = self.slice(node.repairs);

            // Protagonist's choice: a controlled target, or none (wait).
            let controlled: Option<StateId> = if node.inside {
                let moves = self.slice(node.safety);
                match (moves.len(), self.policy) {
                    (0, _) => None,
                    (1, _) => Some(moves[0]),
                    (len, Policy::Random) => Some(moves[dice.below(len)]),
                    (_, Policy::Greedy) => Some(self.most_exposed(moves)),
                }
            } else {
                match node.action {
                    WAIT => None,
                    NO_MOVE => {
                        st.uncovered += 1;
                        fallback(&node)
                    }
                    t => Some(StateId(t)),
                }
            };
            let controlled = if controlled.is_none() && repairs.is_empty() {
                // Nothing offered at all: fall back to any controlled move.
                if node.inside {
                    st.uncovered += 1;
                }
                fallback(&node)
            } else {
                controlled
            };

            // Antagonist: failure or resolution of the offer.
            let failures = self.slice(node.failures);
            let fail_to = if budget > 0 && !failures.is_empty() {
                match self.policy {
                    Policy::Random => dice.coin().then(|| failures[dice.below(failures.len())]),
                    Policy::Greedy => {
                        let u = self.most_damaging(failures, budget - 1);
                        (!self.nodes[u.index()].inside).then_some(u)
                    }
                }
            } else {
                None
            };

            let (mover, kind, to) = if let Some(u) = fail_to {
                (Mover::Antagonist, EdgeKind::Uncontrolled, u)
            } else {
                let must_repair = !repairs.is_empty() && (controlled.is_none() || starved >= self.fairness);
                let pick = if must_repair {
                    match self.policy {
                        Policy::Random => repairs[dice.below(repairs.len())],
                        Policy::Greedy => self.most_damaging(repairs, budget),
                    }
                } else if repairs.is_empty() {
                    match controlled {
                        Some(c) => c,
                        None => {
                            // Dead end; cannot happen on validated systems.
                            st.stalled = true;
                            break;
                        }
                    }
                } else {
                    offer.clear();
                    offer.extend(controlled);
                    offer.extend_from_slice(repairs);
                    match self.policy {
                        Policy::Random => offer[dice.below(offer.len())],
                        Policy::Greedy => self.most_damaging(&offer, budget),
                    }
                };
                if Some(pick) == controlled && !must_repair {
                    if !repairs.is_empty() {
                        starved += 1;
                    }
                    (Mover::Protagonist, EdgeKind::Controlled, pick)
                } else {
                    starved = 0;
                    (Mover::Repair, EdgeKind::Repair, pick)
                }
            };

            match mover {
                Mover::Antagonist => {
                    budget -= 1;
                    block_failures += 1;
                    st.failures += 1;
                    st.max_block_failures = st.max_block_failures.max(block_failures);
                    recovering = true;
                    idle = 0;
                }
                Mover::Repair => st.repairs += 1,
                Mover::Protagonist => {}
            }
            if recovering {
                recovery_len += 1;
            }
            let from = s;
            s = to;
            let here = &self.nodes[s.index()];
            if here.inside {
                if recovering {
                    st.resets += 1;
                    st.recovery_steps += recovery_len;
                }
                recovering = false;
                budget = k;
                block_failures = 0;
                recovery_len = 0;
                idle = 0;
            } else {
                if !recovering {
                    st.breach = true;
                    recovering = true;
                    recovery_len = 1;
                }
                if mover != Mover::Antagonist {
                    idle += 1;
                }
                if budget == 0 {
                    st.exhausted += 1;
                }
            }
            if block_failures > k || budget + block_failures != k {
                st.budget_violations += 1;
            }
            if let Some(t) = trace.as_deref_mut() {
                t.push(TraceStep {
                    mover,
                    kind,
                    from,
                    to: s,
                    position: Position {
                        state: s,
                        phase: if recovering { Phase::Recovery } else { Phase::Safety },
                        budget,
                    },
                });
            }
            if here.error {
                st.error = true;
                break;
            }
            if idle > self.stall_bound {
                st.stalled = true;
                break;
            }
        }
        if st.failed() {
            st.failing_play = Some(play);
        }
        st
    }
}

fn start_states(strat: &ResilienceStrategy, sys: &TransitionSystem, start: &StartStates) -> Result<Vec<StateId>, SimulationError> {
    let r = &strat.resilient;
    if r.is_empty() {
        return Err(SimulationError::EmptyResilientSet);
    }
    match start {
        StartStates::Initial | StartStates::Fixed(_) => {
            let s = match start {
                StartStates::Fixed(s) => *s,
                _ => sys.initial(),
            };
            if !r.contains(s) {
                return Err(SimulationError::StartNotResilient(s));
            }
            Ok(vec![s])
        }
        StartStates::RotateResilient => Ok(r.to_vec()),
    }
}

/// Plays `config.plays` games of the strategy against the configured
/// antagonist. Failing plays are replayed with recording to produce a trace.
pub fn simulate(
    sys: &TransitionSystem,
    strat: &ResilienceStrategy,
    config: &SimulationConfig,
) -> Result<SimulationReport, SimulationError> {
    if config.horizon > MAX_HORIZON {
        return Err(SimulationError::HorizonTooLong(config.horizon));
    }
    if strat.resilient.universe() != sys.num_states() {
        return Err(SimulationError::SizeMismatch {
            strategy: strat.resilient.universe(),
            system: sys.num_states(),
        });
    }
    let starts = start_states(strat, sys, &config.start)?;
    let player = Player::new(sys, strat, config.policy, config.stall_bound);
    let start_of = |i: u64| starts[(i % starts.len() as u64) as usize];

    let totals = match config.policy {
        Policy::Random => (0..config.plays)
            .into_par_iter()
            .map(|i| Totals::from_play(player.run(config.seed, i, start_of(i), None, config.horizon)))
            .reduce(Totals::default, Totals::merge),
        Policy::Greedy => {
            // Deterministic: every play from the same start is identical.
            let per_start: Vec<PlayStats> = starts
                .par_iter()
                .map(|&s| player.run(config.seed, 0, s, None, config.horizon))
                .collect();
            (0..config.plays)
                .map(|i| {
                    let mut p = per_start[(i % starts.len() as u64) as usize].clone();
                    if p.failing_play.is_some() {
                        p.failing_play = Some(i);
                    }
                    Totals::from_play(p)
                })
                .fold(Totals::default(), Totals::merge)
        }
    };

    let first_failure = totals.first_failing.map(|i| {
        let mut steps = Vec::new();
        let stats = player.run(config.seed, i, start_of(i), Some(&mut steps), config.horizon);
        let outcome = if stats.error {
            Outcome::ErrorReached
        } else if stats.stalled {
            Outcome::Stalled
        } else if stats.breach {
            Outcome::LeftResilientSet
        } else {
            Outcome::SurvivedHorizon
        };
        PlayTrace {
            seed: config.seed,
            play: i,
            k: strat.k,
            policy: config.policy,
            start: Position {
                state: start_of(i),
                phase: Phase::Safety,
                budget: strat.k,
            },
            steps,
            outcome,
            resets: stats.resets,
        }
    });

    Ok(SimulationReport {
        policy: config.policy,
        plays: config.plays,
        horizon: config.horizon,
        seed: config.seed,
        steps: totals.steps,
        error_reaches: totals.errors,
        stalled_plays: totals.stalled,
        safety_breaches: totals.breaches,
        uncovered_positions: totals.uncovered,
        failures: totals.failures,
        repairs: totals.repairs,
        resets: totals.resets,
        mean_recovery_length: if totals.resets == 0 {
            0.0
        } else {
            totals.recovery_steps as f64 / totals.resets as f64
        },
        max_block_failures: totals.max_block_failures,
        budget_violations: totals.budget_violations,
        exhausted_positions: totals.exhausted,
        first_failure,
    })
}

/// Records a single play, e.g. to replay a `.trace.json`.
pub fn record_play(
    sys: &TransitionSystem,
    strat: &ResilienceStrategy,
    policy: Policy,
    seed: u64,
    play: u64,
    start: StateId,
    horizon: u64,
) -> PlayTrace {
    let player = Player::new(sys, strat, policy, None);
    let mut steps = Vec::new();
    let stats = player.run(seed, play, start, Some(&mut steps), horizon);
    let outcome = if stats.error {
        Outcome::ErrorReached
    } else if stats.stalled {
        Outcome::Stalled
    } else if stats.breach {
        Outcome::LeftResilientSet
    } else {
        Outcome::SurvivedHorizon
    };
    PlayTrace {
        seed,
        play,
        k: strat.k,
        policy,
        start: Position {
            state: start,
            phase: Phase::Safety,
            budget: strat.k,
        },
        steps,
        outcome,
        resets: stats.resets,
    }
}
