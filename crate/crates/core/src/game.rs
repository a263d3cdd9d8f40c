//! Fixed-point constructions for dense-failure resilience.
//!
//! * [`frag`]: states with a failure edge into a set.
//! * [`cla`]: controlled attractor of a goal, limited to a region.
//! * [`safe0`]: safety kernel (an infinite controlled path stays inside).
//! * [`safe_k`]: stay in the goal until the first failure, then return to
//!   it while the environment injects at most `k` failures in total.
//! * [`res_k`]: greatest fixed point of `safe_k`, plus a memoryless strategy.
//! * [`k_max`]: the largest `k` for which a state is `k`-resilient.
//!
//! All passes are worklist-driven over the predecessor lists, so each `cla`
//! or `safe0` run is linear in the size of the system.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{EdgeKind, StateId, TransitionSystem};
use crate::stateset::StateSet;
use crate::strategy::{RecoveryMove, ResilienceStrategy};

/// Whether repair transitions take part in the game.
///
/// In `Base` mode repair edges are ignored. In `Repair` mode the controller
/// offers a set of successors that must include every repair successor
/// (it may also offer nothing but those, i.e. wait), and the environment
/// picks from the offer unless it injects a failure.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Base,
    Repair,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Base => "base",
            Mode::Repair => "repair",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "base" => Ok(Mode::Base),
            "repair" => Ok(Mode::Repair),
            other => Err(format!("unknown mode `{other}` (expected base or repair)")),
        }
    }
}

/// A controller action: take a controlled edge, or (repair mode) only offer
/// the repair successors.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    To(StateId),
    Wait,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::To(t) => t.fmt(f),
            Move::Wait => f.write_str("wait"),
        }
    }
}

const NO_RANK: u32 = u32::MAX;
const NO_MOVE: u32 = u32::MAX;
const WAIT: u32 = u32::MAX - 1;

/// Result of a limited attractor computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attractor {
    pub set: StateSet,
    rank: Vec<u32>,
    witness: Vec<u32>,
}

impl Attractor {
    /// Round in which `s` joined the attractor: 0 for goal states, `None`
    /// for non-members.
    pub fn rank(&self, s: StateId) -> Option<u32> {
        match self.rank[s.index()] {
            NO_RANK => None,
            r => Some(r),
        }
    }

    /// The chosen move towards the goal; `None` for goal states and
    /// non-members.
    pub fn witness(&self, s: StateId) -> Option<Move> {
        match self.witness[s.index()] {
            NO_MOVE => None,
            WAIT => Some(Move::Wait),
            t => Some(Move::To(StateId(t))),
        }
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.set.contains(s)
    }
}

/// `frag(B)`: states with at least one uncontrolled successor in `b`.
pub fn frag(sys: &TransitionSystem, b: &StateSet) -> StateSet {
    let mut out = StateSet::empty(sys.num_states());
    for (s, t) in sys.edges(EdgeKind::Uncontrolled) {
        if b.contains(t) {
            out.insert(s);
        }
    }
    out
}

/// `cla_L(G)`: the least `A ⊇ G` closed under adding states of `limit`
/// that can move into `A`.
///
/// Base mode: `s ∈ L` joins once some controlled successor is in `A`.
/// Repair mode: `s ∈ L` joins once some controlled or repair successor is
/// in `A` and every repair successor is in `A`.
///
/// Each non-goal member records the round it joined and a witness move:
/// the lowest-numbered controlled successor among those of minimal rank,
/// or [`Move::Wait`] when only the repair successors make progress.
pub fn cla(sys: &TransitionSystem, limit: &StateSet, goal: &StateSet, mode: Mode) -> Attractor {
    let (set, rank) = attract(sys, limit, goal, mode);
    let mut witness = vec![NO_MOVE; sys.num_states()];
    for s in set.iter() {
        let r = rank[s.index()];
        if r == 0 {
            continue;
        }
        let mut best: Option<(u32, StateId)> = None;
        for &t in sys.successors(s, EdgeKind::Controlled) {
            let rt = rank[t.index()];
            if rt < r && best.is_none_or(|(b, _)| rt < b) {
                best = Some((rt, t));
            }
        }
        witness[s.index()] = match best {
            Some((_, t)) => t.0,
            None => {
                debug_assert_eq!(mode, Mode::Repair);
                WAIT
            }
        };
    }
    Attractor { set, rank, witness }
}

/// Layered backward search; returns the attractor and per-state join rounds.
fn attract(sys: &TransitionSystem, limit: &StateSet, goal: &StateSet, mode: Mode) -> (StateSet, Vec<u32>) {
    let n = sys.num_states();
    let mut set = goal.clone();
    let mut rank = vec![NO_RANK; n];
    for g in goal.iter() {
        rank[g.index()] = 0;
    }
    // Repair mode bookkeeping: repair successors still outside A, and
    // whether some successor is already inside.
    let (mut pending, mut touched) = match mode {
        Mode::Base => (Vec::new(), Vec::new()),
        Mode::Repair => (
            (0..n)
                .map(|s| sys.successors(StateId(s as u32), EdgeKind::Repair).len() as u32)
                .collect(),
            vec![false; n],
        ),
    };

    let mut frontier: Vec<StateId> = goal.to_vec();
    let mut next = Vec::new();
    let mut round = 0;
    while !frontier.is_empty() {
        round += 1;
        for &v in &frontier {
            for &p in sys.predecessors(v, EdgeKind::Controlled) {
                if !limit.contains(p) || set.contains(p) {
                    continue;
                }
                let ready = match mode {
                    Mode::Base => true,
                    Mode::Repair => {
                        touched[p.index()] = true;
                        pending[p.index()] == 0
                    }
                };
                if ready {
                    set.insert(p);
                    rank[p.index()] = round;
                    next.push(p);
                }
            }
            if mode == Mode::Repair {
                for &p in sys.predecessors(v, EdgeKind::Repair) {
                    if !limit.contains(p) || set.contains(p) {
                        continue;
                    }
                    pending[p.index()] -= 1;
                    touched[p.index()] = true;
                    if pending[p.index()] == 0 {
                        set.insert(p);
                        rank[p.index()] = round;
                        next.push(p);
                    }
                }
            }
        }
        std::mem::swap(&mut frontier, &mut next);
        next.clear();
    }
    (set, rank)
}

/// Safety kernel: the greatest `X ⊆ G` (minus error states) where every
/// state keeps a move inside `X`.
///
/// Repair mode additionally demands that all repair successors stay in `X`;
/// a state may then rely on its repair successors alone.
pub fn safe0(sys: &TransitionSystem, goal: &StateSet, mode: Mode) -> StateSet {
    let n = sys.num_states();
    let mut x = goal.intersection(&sys.non_error());
    let mut count = vec![0u32; n];
    let mut queue = Vec::new();
    for s in x.iter() {
        let mut c = sys
            .successors(s, EdgeKind::Controlled)
            .iter()
            .filter(|t| x.contains(**t))
            .count() as u32;
        let mut escapes = false;
        if mode == Mode::Repair {
            for &t in sys.successors(s, EdgeKind::Repair) {
                if x.contains(t) {
                    c += 1;
                } else {
                    escapes = true;
                }
            }
        }
        count[s.index()] = c;
        if c == 0 || escapes {
            queue.push(s);
        }
    }
    for &s in &queue {
        x.remove(s);
    }
    while let Some(v) = queue.pop() {
        for &p in sys.predecessors(v, EdgeKind::Controlled) {
            if x.contains(p) {
                count[p.index()] -= 1;
                if count[p.index()] == 0 {
                    x.remove(p);
                    queue.push(p);
                }
            }
        }
        if mode == Mode::Repair {
            for &p in sys.predecessors(v, EdgeKind::Repair) {
                if x.remove(p) {
                    queue.push(p);
                }
            }
        }
    }
    x
}

/// Controlled successors of `s` inside `kernel`.
pub fn safety_moves(sys: &TransitionSystem, kernel: &StateSet, s: StateId) -> Vec<StateId> {
    sys.successors(s, EdgeKind::Controlled)
        .iter()
        .copied()
        .filter(|t| kernel.contains(*t))
        .collect()
}

/// Everything computed by one `safe_k(G)` run.
#[derive(Clone, Debug)]
pub struct SafeKResult {
    pub goal: StateSet,
    pub safe_set: StateSet,
    /// `A_0 ⊇ … ⊇ A_{k-1}`.
    pub attractors: Vec<Attractor>,
    /// `L_0 ⊇ … ⊇ L_k`.
    pub limits: Vec<StateSet>,
}

/// `safe_k(G) = safe0(G ∩ L_k)` where `L_0 = S∖F`, `A_i = cla_{L_i}(G)` and
/// `L_{i+1} = L_0 ∖ frag(S∖A_i)`.
///
/// Error states in `goal` are ignored.
pub fn safe_k(sys: &TransitionSystem, goal: &StateSet, k: u32, mode: Mode) -> SafeKResult {
    let non_error = sys.non_error();
    let goal = goal.intersection(&non_error);
    let mut limits = vec![non_error.clone()];
    let mut attractors: Vec<Attractor> = Vec::with_capacity(k as usize);
    for i in 0..k as usize {
        // Once L stops shrinking, every later stage repeats.
        if i >= 1 && limits[i] == limits[i - 1] {
            let a = attractors[i - 1].clone();
            attractors.push(a);
            limits.push(limits[i].clone());
            continue;
        }
        let a = cla(sys, &limits[i], &goal, mode);
        let next = non_error.difference(&frag(sys, &a.set.complement()));
        attractors.push(a);
        limits.push(next);
    }
    let safe_set = safe0(sys, &goal.intersection(&limits[k as usize]), mode);
    SafeKResult {
        goal,
        safe_set,
        attractors,
        limits,
    }
}

/// The `safe_k` set alone, without ranks or witnesses.
pub fn safe_k_set(sys: &TransitionSystem, goal: &StateSet, k: u32, mode: Mode) -> StateSet {
    let non_error = sys.non_error();
    let goal = goal.intersection(&non_error);
    let mut limit = non_error.clone();
    for _ in 0..k {
        let (a, _) = attract(sys, &limit, &goal, mode);
        let next = non_error.difference(&frag(sys, &a.complement()));
        if next == limit {
            break;
        }
        limit = next;
    }
    safe0(sys, &goal.intersection(&limit), mode)
}

/// Iterates `G_{i+1} = safe_k(G_i)` to its greatest fixed point. Returns the
/// fixed point and the number of `safe_k` applications.
pub fn res_k_set(sys: &TransitionSystem, k: u32, mode: Mode, initial_goal: Option<&StateSet>) -> (StateSet, usize) {
    let mut g = match initial_goal {
        Some(g0) => g0.intersection(&sys.non_error()),
        None => sys.non_error(),
    };
    let mut rounds = 0;
    loop {
        let next = safe_k_set(sys, &g, k, mode);
        rounds += 1;
        if next == g {
            return (g, rounds);
        }
        g = next;
    }
}

/// `res_k(G_0)` with a memoryless strategy taken from the `safe_k` run on
/// the fixed point. `initial_goal` defaults to `S∖F`.
pub fn res_k(sys: &TransitionSystem, k: u32, mode: Mode, initial_goal: Option<&StateSet>) -> ResilienceStrategy {
    let (fixed, _) = res_k_set(sys, k, mode, initial_goal);
    strategy_for(sys, &fixed, k, mode)
}

/// Builds the controller for a fixed point `g = safe_k(g)`.
pub fn strategy_for(sys: &TransitionSystem, g: &StateSet, k: u32, mode: Mode) -> ResilienceStrategy {
    let run = safe_k(sys, g, k, mode);
    debug_assert_eq!(&run.safe_set, g, "strategy_for needs a fixed point of safe_k");
    let resilient = run.safe_set.clone();
    let safety = resilient
        .iter()
        .map(|s| (s, safety_moves(sys, &resilient, s)))
        .collect();
    let mut recovery = std::collections::BTreeMap::new();
    if let Some(outer) = run.attractors.first() {
        for s in outer.set.iter() {
            if resilient.contains(s) {
                continue;
            }
            // A_i descend, so the deepest attractor containing s gives the
            // largest number of failures it can still absorb.
            let level = run
                .attractors
                .iter()
                .rposition(|a| a.contains(s))
                .expect("s is in A_0");
            let a = &run.attractors[level];
            if a.rank(s) == Some(0) {
                continue;
            }
            recovery.insert(
                s,
                RecoveryMove {
                    level: level as u32,
                    distance: a.rank(s).expect("member"),
                    action: a.witness(s).expect("non-goal member has a witness"),
                },
            );
        }
    }
    ResilienceStrategy {
        k,
        mode,
        resilient,
        safety_moves: safety,
        recovery_moves: recovery,
    }
}

/// Resilience level of a state.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ResilienceLevel {
    /// Not even 0-resilient.
    NotResilient,
    Finite(u32),
    /// Resilient for `k = cap = |S|` and therefore for every `k`: the
    /// `L_i` chain is stationary after at most `|S|` steps.
    Unbounded { cap: u32 },
}

impl ResilienceLevel {
    /// `-1`, `k`, or `None` for unbounded.
    pub fn as_int(self) -> Option<i64> {
        match self {
            ResilienceLevel::NotResilient => Some(-1),
            ResilienceLevel::Finite(k) => Some(k as i64),
            ResilienceLevel::Unbounded { .. } => None,
        }
    }
}

impl fmt::Display for ResilienceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResilienceLevel::NotResilient => f.write_str("-1"),
            ResilienceLevel::Finite(k) => k.fmt(f),
            ResilienceLevel::Unbounded { cap } => write!(f, "∞ (≥{cap})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KMaxResult {
    pub level: ResilienceLevel,
    /// Strategy for `res_{k_max}`; for unbounded levels, for `k = cap`.
    pub strategy: Option<ResilienceStrategy>,
    /// Every `(k, state ∈ res_k)` evaluated, in order.
    pub probes: Vec<(u32, bool)>,
}

/// `max{n | state ∈ res_n(S∖F)}` by doubling from 1 and then bisecting.
pub fn k_max(sys: &TransitionSystem, mode: Mode, state: StateId) -> KMaxResult {
    let mut probes = Vec::new();
    let mut member = |k: u32| {
        let inside = res_k_set(sys, k, mode, None).0.contains(state);
        probes.push((k, inside));
        inside
    };
    if !member(0) {
        return KMaxResult {
            level: ResilienceLevel::NotResilient,
            strategy: None,
            probes,
        };
    }
    let cap = sys.num_states() as u32;
    let mut good = 0u32;
    let mut bad = None;
    let mut probe = 1u32;
    loop {
        let k = probe.min(cap);
        if member(k) {
            good = k;
            if k == cap {
                break;
            }
            probe = probe.saturating_mul(2);
        } else {
            bad = Some(k);
            break;
        }
    }
    if let Some(mut bad) = bad {
        while bad - good > 1 {
            let mid = good + (bad - good) / 2;
            if member(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
    }
    let level = match bad {
        Some(_) => ResilienceLevel::Finite(good),
        None => ResilienceLevel::Unbounded { cap },
    };
    KMaxResult {
        level,
        strategy: Some(res_k(sys, good, mode, None)),
        probes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::example_system;

    // Example labels 1..4 are indices 0..3.
    fn fig(labels: &[u32]) -> StateSet {
        StateSet::from_states(4, labels.iter().map(|l| StateId(l - 1)))
    }

    #[test]
    fn frag_examples() {
        let sys = example_system();
        assert_eq!(frag(&sys, &fig(&[4])), fig(&[3]));
        assert_eq!(frag(&sys, &fig(&[])), fig(&[]));
        assert_eq!(frag(&sys, &fig(&[3, 4])), fig(&[2, 3]));
    }

    #[test]
    fn cla_examples() {
        let sys = example_system();
        let a = cla(&sys, &fig(&[1, 2, 3]), &fig(&[1, 2]), Mode::Base);
        assert_eq!(a.set, fig(&[1, 2, 3]));
        assert_eq!(a.witness(StateId(2)), Some(Move::To(StateId(1))));
        assert_eq!(a.rank(StateId(2)), Some(1));
        assert_eq!(a.rank(StateId(0)), Some(0));
        assert_eq!(a.witness(StateId(0)), None);

        let a = cla(&sys, &fig(&[]), &fig(&[2]), Mode::Base);
        assert_eq!(a.set, fig(&[2]));

        let a = cla(&sys, &fig(&[1]), &fig(&[1, 2]), Mode::Base);
        assert_eq!(a.set, fig(&[1, 2]));
    }

    #[test]
    fn safe0_examples() {
        let sys = example_system();
        assert_eq!(safe0(&sys, &fig(&[1, 2, 3]), Mode::Base), fig(&[1, 2, 3]));
        assert_eq!(safe0(&sys, &fig(&[]), Mode::Base), fig(&[]));
        assert_eq!(safe0(&sys, &fig(&[1]), Mode::Base), fig(&[1]));
    }

    #[test]
    fn safe_k_examples() {
        let sys = example_system();
        assert_eq!(safe_k(&sys, &fig(&[1, 2, 3]), 1, Mode::Base).safe_set, fig(&[1, 2]));
        let run = safe_k(&sys, &fig(&[1, 2]), 2, Mode::Base);
        assert_eq!(run.safe_set, fig(&[1]));
        assert_eq!(run.attractors[0].set, fig(&[1, 2, 3]));
        assert_eq!(run.limits[1], fig(&[1, 2]));
        assert_eq!(run.attractors[1].set, fig(&[1, 2]));
        assert_eq!(run.limits[2], fig(&[1]));
        assert_eq!(safe_k(&sys, &fig(&[1]), 2, Mode::Base).safe_set, fig(&[1]));
        // k = 0 is the safety kernel
        assert_eq!(safe_k(&sys, &fig(&[1, 2, 3]), 0, Mode::Base).safe_set, fig(&[1, 2, 3]));
    }

    #[test]
    fn res_k_examples() {
        let sys = example_system();
        assert_eq!(res_k(&sys, 2, Mode::Base, None).resilient, fig(&[1]));
        assert_eq!(res_k(&sys, 0, Mode::Base, None).resilient, fig(&[1, 2, 3]));
        assert_eq!(res_k(&sys, 3, Mode::Base, None).resilient, fig(&[]));
    }

    #[test]
    fn res_2_strategy() {
        let sys = example_system();
        let strat = res_k(&sys, 2, Mode::Base, None);
        assert_eq!(strat.safety_moves[&StateId(0)], vec![StateId(0)]);
        let r2 = strat.recovery_moves[&StateId(1)];
        assert_eq!(r2.action, Move::To(StateId(0)));
        assert_eq!(r2.level, 1);
        let r3 = strat.recovery_moves[&StateId(2)];
        assert_eq!(r3.action, Move::To(StateId(1)));
        assert_eq!(r3.level, 0);
    }

    #[test]
    fn k_max_examples() {
        let sys = example_system();
        assert_eq!(k_max(&sys, Mode::Base, StateId(0)).level, ResilienceLevel::Finite(2));
        assert_eq!(k_max(&sys, Mode::Base, StateId(2)).level, ResilienceLevel::Finite(0));
        assert_eq!(k_max(&sys, Mode::Base, StateId(3)).level, ResilienceLevel::NotResilient);

        let inert = TransitionSystem::builder(1).controlled(0, 0).build().unwrap();
        assert_eq!(
            k_max(&inert, Mode::Base, StateId(0)).level,
            ResilienceLevel::Unbounded { cap: 1 }
        );
    }

    #[test]
    fn k_max_probe_count_is_logarithmic() {
        // chain with 30 non-error states: k_max = 29
        let mut b = TransitionSystem::builder(31).initial(0).error(30);
        for i in 0..30 {
            b = b.controlled(i, i).uncontrolled(i, i + 1);
            if i > 0 {
                b = b.controlled(i, i - 1);
            }
        }
        let chain = b.build().unwrap();
        let res = k_max(&chain, Mode::Base, StateId(0));
        assert_eq!(res.level, ResilienceLevel::Finite(29));
        // 1 zero probe + doubling (1,2,4,8,16,31 capped) + bisection over (16,31)
        assert!(res.probes.len() <= 1 + 6 + 4, "{:?}", res.probes);
    }

    #[test]
    fn repair_mode_wait() {
        // 0 -r-> 1 (goal); 0 has only a self-loop as controlled move.
        let sys = TransitionSystem::builder(3)
            .error(2)
            .controlled(0, 0)
            .controlled(1, 1)
            .repair(0, 1)
            .uncontrolled(1, 0)
            .build()
            .unwrap();
        let all = StateSet::from_states(3, [StateId(0), StateId(1)]);
        let goal = StateSet::from_states(3, [StateId(1)]);
        let a = cla(&sys, &all, &goal, Mode::Repair);
        assert!(a.contains(StateId(0)));
        assert_eq!(a.witness(StateId(0)), Some(Move::Wait));
        let base = cla(&sys, &all, &goal, Mode::Base);
        assert!(!base.contains(StateId(0)));
    }

    #[test]
    fn repair_mode_requires_all_repairs() {
        // 0 -r-> 1 (goal) and 0 -r-> 2 (outside)
        let sys = TransitionSystem::builder(3)
            .controlled(0, 1)
            .controlled(1, 1)
            .controlled(2, 2)
            .repair(0, 1)
            .repair(0, 2)
            .build()
            .unwrap();
        let all = sys.non_error();
        let goal = StateSet::from_states(3, [StateId(1)]);
        assert!(!cla(&sys, &all, &goal, Mode::Repair).contains(StateId(0)));
        assert!(cla(&sys, &all, &goal, Mode::Base).contains(StateId(0)));
        // the kernel of {0,1} loses 0 in repair mode, 1 stays
        let g = StateSet::from_states(3, [StateId(0), StateId(1)]);
        assert_eq!(safe0(&sys, &g, Mode::Repair), goal);
        assert_eq!(safe0(&sys, &g, Mode::Base), g);
    }
}
