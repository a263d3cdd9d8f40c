//! Memoryless resilience controllers and their JSON form.
//!
//! ```json
//! { "k": 2, "mode": "base", "resilient": [0],
//!   "safety_moves": {"0": [0]},
//!   "recovery_moves": {"1": {"rank": 1, "move": 0, "distance": 1},
//!                      "2": {"rank": 0, "move": 1, "distance": 1}} }
//! ```
//!
//! `rank` is the deepest attractor level containing the state, i.e. how many
//! further failures the recovery can absorb; `distance` is the state's round
//! in that attractor; `move` is a target state or `"wait"`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::game::{Mode, Move};
use crate::model::StateId;
use crate::stateset::StateSet;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct RecoveryMove {
    /// Largest `i` with the state in `A_i`.
    pub level: u32,
    /// Round in which the state joined `A_level`; strictly decreases along
    /// the move.
    pub distance: u32,
    pub action: Move,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResilienceStrategy {
    pub k: u32,
    pub mode: Mode,
    pub resilient: StateSet,
    /// All controlled moves that stay inside `resilient` (the permissive
    /// controller). In repair mode an empty list means the state waits for
    /// its repair successors.
    pub safety_moves: BTreeMap<StateId, Vec<StateId>>,
    pub recovery_moves: BTreeMap<StateId, RecoveryMove>,
}

impl ResilienceStrategy {
    /// Keeps only the lowest-numbered safety move per state.
    pub fn determinized(&self) -> ResilienceStrategy {
        let mut out = self.clone();
        for moves in out.safety_moves.values_mut() {
            moves.truncate(1);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StrategyFile::from(self)).expect("strategy serializes")
    }

    pub fn from_json(text: &str, num_states: usize) -> Result<Self, String> {
        let file: StrategyFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        file.into_strategy(num_states)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StrategyFile {
    k: u32,
    #[serde(default)]
    mode: Mode,
    resilient: Vec<u32>,
    safety_moves: BTreeMap<u32, Vec<u32>>,
    recovery_moves: BTreeMap<u32, RecoveryEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RecoveryEntry {
    rank: u32,
    #[serde(rename = "move")]
    action: MoveRepr,
    #[serde(default)]
    distance: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum MoveRepr {
    To(u32),
    Word(String),
}

impl From<&ResilienceStrategy> for StrategyFile {
    fn from(s: &ResilienceStrategy) -> Self {
        StrategyFile {
            k: s.k,
            mode: s.mode,
            resilient: s.resilient.iter().map(|x| x.0).collect(),
            safety_moves: s
                .safety_moves
                .iter()
                .map(|(k, v)| (k.0, v.iter().map(|t| t.0).collect()))
                .collect(),
            recovery_moves: s
                .recovery_moves
                .iter()
                .map(|(k, r)| {
                    let action = match r.action {
                        Move::To(t) => MoveRepr::To(t.0),
                        Move::Wait => MoveRepr::Word("wait".into()),
                    };
                    (
                        k.0,
                        RecoveryEntry {
                            rank: r.level,
                            action,
                            distance: r.distance,
                        },
                    )
                })
                .collect(),
        }
    }
}

impl StrategyFile {
    fn into_strategy(self, n: usize) -> Result<ResilienceStrategy, String> {
        let state = |x: u32| {
            if (x as usize) < n {
                Ok(StateId(x))
            } else {
                Err(format!("state {x} out of range (system has {n} states)"))
            }
        };
        let resilient = self
            .resilient
            .iter()
            .map(|&x| state(x))
            .collect::<Result<Vec<_>, _>>()?;
        let mut safety_moves = BTreeMap::new();
        for (s, moves) in self.safety_moves {
            let moves = moves.into_iter().map(state).collect::<Result<Vec<_>, _>>()?;
            safety_moves.insert(state(s)?, moves);
        }
        let mut recovery_moves = BTreeMap::new();
        for (s, entry) in self.recovery_moves {
            let action = match entry.action {
                MoveRepr::To(t) => Move::To(state(t)?),
                MoveRepr::Word(w) if w == "wait" => Move::Wait,
                MoveRepr::Word(w) => return Err(format!("unknown move `{w}`")),
            };
            recovery_moves.insert(
                state(s)?,
                RecoveryMove {
                    level: entry.rank,
                    distance: entry.distance,
                    action,
                },
            );
        }
        Ok(ResilienceStrategy {
            k: self.k,
            mode: self.mode,
            resilient: StateSet::from_states(n, resilient),
            safety_moves,
            recovery_moves,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::res_k;
    use crate::model::example_system;

    #[test]
    fn json_round_trip() {
        let sys = example_system();
        let strat = res_k(&sys, 2, Mode::Base, None);
        let text = strat.to_json();
        assert!(text.contains("\"recovery_moves\""));
        assert_eq!(ResilienceStrategy::from_json(&text, 4).unwrap(), strat);
    }

    #[test]
    fn wait_round_trip() {
        let mut strat = res_k(&example_system(), 2, Mode::Base, None);
        strat.recovery_moves.get_mut(&StateId(2)).unwrap().action = Move::Wait;
        let text = strat.to_json();
        assert!(text.contains("\"move\": \"wait\""));
        assert_eq!(ResilienceStrategy::from_json(&text, 4).unwrap(), strat);
    }

    #[test]
    fn rejects_out_of_range() {
        let text = r#"{"k":1,"resilient":[7],"safety_moves":{},"recovery_moves":{}}"#;
        assert!(ResilienceStrategy::from_json(text, 4).is_err());
    }

    #[test]
    fn determinized_keeps_lowest() {
        let sys = example_system();
        let strat = res_k(&sys, 0, Mode::Base, None);
        assert_eq!(strat.safety_moves[&StateId(2)], vec![StateId(1), StateId(2)]);
        assert_eq!(strat.determinized().safety_moves[&StateId(2)], vec![StateId(1)]);
    }
}
