//! Brute-force solution of the two-phase resilience game.
//!
//! The game is unfolded into an explicit position graph over
//! `(state, phase, remaining budget)`:
//!
//! * In the safety phase the play must stay inside `G`. The environment may
//!   interrupt any controller move with a failure, which starts the
//!   recovery phase with `k - 1` failures left.
//! * In the recovery phase the controller wins as soon as `G` is reached;
//!   every further failure costs one unit of budget.
//! * Error states lose immediately.
//!
//! The controller wins iff the play visits recovery positions only finitely
//! often (either it stays in the safety phase forever or it reaches the
//! winning sink), so the unfolding is solved as a co-Büchi game. No part of
//! the attractor-chain construction is reused.
//!
//! In repair mode each controller choice is an explicit offered set `O`
//! with `suc_r(s) ⊆ O ⊆ suc_c(s) ∪ suc_r(s)`, `O ≠ ∅`, from which the
//! environment picks when it does not inject a failure.

use std::collections::HashMap;

use thiserror::Error;

use super::arena::{Arena, Player};
use crate::game::Mode;
use crate::model::{EdgeKind, StateId, TransitionSystem};
use crate::stateset::StateSet;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_states: usize,
    pub max_k: u32,
    /// Up to this many controlled-only successors every subset is offered;
    /// beyond it only the minimal offers (one controlled target, or none).
    pub exhaustive_offer_degree: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_states: 12,
            max_k: 4,
            exhaustive_offer_degree: 8,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("system has {states} states, oracle cap is {cap}")]
    TooManyStates { states: usize, cap: usize },
    #[error("k = {k} exceeds the oracle cap {cap}")]
    BudgetTooLarge { k: u32, cap: u32 },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
enum Phase {
    Safety,
    /// Remaining failures.
    Recovery(u32),
}

struct Unfolding<'a> {
    sys: &'a TransitionSystem,
    goal: &'a StateSet,
    k: u32,
    mode: Mode,
    limits: OracleLimits,
    arena: Arena,
    bad: Vec<bool>,
    index: HashMap<(StateId, Phase), u32>,
    pending: Vec<(u32, StateId, Phase)>,
    win: u32,
    lose: u32,
}

impl<'a> Unfolding<'a> {
    fn new(sys: &'a TransitionSystem, goal: &'a StateSet, k: u32, mode: Mode, limits: OracleLimits) -> Self {
        let mut arena = Arena::default();
        let win = arena.add_node(Player::Protagonist);
        arena.add_edge(win, win);
        let lose = arena.add_node(Player::Protagonist);
        arena.add_edge(lose, lose);
        Self {
            sys,
            goal,
            k,
            mode,
            limits,
            arena,
            bad: vec![false, true],
            index: HashMap::new(),
            pending: Vec::new(),
            win,
            lose,
        }
    }

    fn node(&mut self, owner: Player, bad: bool) -> u32 {
        self.bad.push(bad);
        self.arena.add_node(owner)
    }

    fn position(&mut self, s: StateId, phase: Phase) -> u32 {
        if self.sys.is_error(s) {
            return self.lose;
        }
        match phase {
            Phase::Safety if !self.goal.contains(s) => return self.lose,
            Phase::Recovery(_) if self.goal.contains(s) => return self.win,
            _ => {}
        }
        if let Some(&v) = self.index.get(&(s, phase)) {
            return v;
        }
        let v = self.node(Player::Protagonist, matches!(phase, Phase::Recovery(_)));
        self.index.insert((s, phase), v);
        self.pending.push((v, s, phase));
        v
    }

    fn offers(&self, s: StateId) -> Vec<Vec<StateId>> {
        let controlled = self.sys.successors(s, EdgeKind::Controlled);
        match self.mode {
            Mode::Base => controlled.iter().map(|&t| vec![t]).collect(),
            Mode::Repair => {
                let repairs = self.sys.successors(s, EdgeKind::Repair);
                let extra: Vec<StateId> = controlled
                    .iter()
                    .copied()
                    .filter(|t| !repairs.contains(t))
                    .collect();
                let mut out = Vec::new();
                if extra.len() <= self.limits.exhaustive_offer_degree {
                    for mask in 0u32..(1 << extra.len()) {
                        let mut offer = repairs.to_vec();
                        offer.extend(
                            (0..extra.len())
                                .filter(|i| mask & (1 << i) != 0)
                                .map(|i| extra[i]),
                        );
                        if !offer.is_empty() {
                            out.push(offer);
                        }
                    }
                } else {
                    if !repairs.is_empty() {
                        out.push(repairs.to_vec());
                    }
                    for &t in &extra {
                        let mut offer = repairs.to_vec();
                        offer.push(t);
                        out.push(offer);
                    }
                }
                out
            }
        }
    }

    fn expand(&mut self) {
        while let Some((v, s, phase)) = self.pending.pop() {
            let budget = match phase {
                Phase::Safety => self.k,
                Phase::Recovery(b) => b,
            };
            let in_recovery = matches!(phase, Phase::Recovery(_));
            let failures: Vec<StateId> = if budget > 0 {
                self.sys.successors(s, EdgeKind::Uncontrolled).to_vec()
            } else {
                Vec::new()
            };
            let offers = self.offers(s);
            if offers.is_empty() {
                self.arena.add_edge(v, self.lose);
                continue;
            }
            for offer in offers {
                let q = self.node(Player::Antagonist, in_recovery);
                self.arena.add_edge(v, q);
                for o in offer {
                    let w = self.position(o, phase);
                    self.arena.add_edge(q, w);
                }
                for &u in &failures {
                    let w = self.position(u, Phase::Recovery(budget - 1));
                    self.arena.add_edge(q, w);
                }
            }
        }
    }
}

fn check_limits(sys: &TransitionSystem, k: u32, limits: OracleLimits) -> Result<(), OracleError> {
    if sys.num_states() > limits.max_states {
        return Err(OracleError::TooManyStates {
            states: sys.num_states(),
            cap: limits.max_states,
        });
    }
    if k > limits.max_k {
        return Err(OracleError::BudgetTooLarge { k, cap: limits.max_k });
    }
    Ok(())
}

/// States of `goal` from which the controller wins the safety-phase game
/// with failure budget `k`.
pub fn brute_force_safe_k(
    sys: &TransitionSystem,
    goal: &StateSet,
    k: u32,
    mode: Mode,
    limits: OracleLimits,
) -> Result<StateSet, OracleError> {
    check_limits(sys, k, limits)?;
    let mut game = Unfolding::new(sys, goal, k, mode, limits);
    let roots: Vec<(StateId, u32)> = goal
        .iter()
        .filter(|&s| !sys.is_error(s))
        .map(|s| (s, game.position(s, Phase::Safety)))
        .collect();
    game.expand();
    let win = game.arena.solve_cobuchi(&game.bad);
    Ok(StateSet::from_states(
        sys.num_states(),
        roots.into_iter().filter(|&(_, v)| win[v as usize]).map(|(s, _)| s),
    ))
}

/// Greatest fixed point of [`brute_force_safe_k`] from `S∖F`.
pub fn brute_force_res_k(
    sys: &TransitionSystem,
    k: u32,
    mode: Mode,
    limits: OracleLimits,
) -> Result<StateSet, OracleError> {
    let mut g = sys.non_error();
    loop {
        let next = brute_force_safe_k(sys, &g, k, mode, limits)?;
        if next == g {
            return Ok(g);
        }
        g = next;
    }
}
