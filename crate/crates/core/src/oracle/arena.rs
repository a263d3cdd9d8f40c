//! Explicit two-player game graphs and a co-Büchi solver.

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Player {
    Protagonist,
    Antagonist,
}

impl Player {
    fn opponent(self) -> Player {
        match self {
            Player::Protagonist => Player::Antagonist,
            Player::Antagonist => Player::Protagonist,
        }
    }
}

/// A turn-based game graph. Every node must have at least one successor.
#[derive(Clone, Debug, Default)]
pub struct Arena {
    owner: Vec<Player>,
    succ: Vec<Vec<u32>>,
}

impl Arena {
    pub fn add_node(&mut self, owner: Player) -> u32 {
        self.owner.push(owner);
        self.succ.push(Vec::new());
        (self.owner.len() - 1) as u32
    }

    pub fn add_edge(&mut self, from: u32, to: u32) {
        self.succ[from as usize].push(to);
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    fn predecessors(&self) -> Vec<Vec<u32>> {
        let mut pred = vec![Vec::new(); self.len()];
        for (v, succ) in self.succ.iter().enumerate() {
            for &w in succ {
                pred[w as usize].push(v as u32);
            }
        }
        pred
    }

    /// Nodes of `active` from which `player` forces a visit to `target`
    /// (within the subgame induced by `active`).
    fn attractor(&self, pred: &[Vec<u32>], player: Player, target: &[bool], active: &[bool]) -> Vec<bool> {
        let n = self.len();
        let mut attr = vec![false; n];
        let mut remaining: Vec<u32> = (0..n)
            .map(|v| {
                if active[v] && self.owner[v] == player.opponent() {
                    self.succ[v].iter().filter(|&&w| active[w as usize]).count() as u32
                } else {
                    0
                }
            })
            .collect();
        let mut queue: Vec<u32> = Vec::new();
        for v in 0..n {
            if active[v] && target[v] {
                attr[v] = true;
                queue.push(v as u32);
            }
        }
        while let Some(w) = queue.pop() {
            for &v in &pred[w as usize] {
                let vi = v as usize;
                if !active[vi] || attr[vi] {
                    continue;
                }
                let joins = if self.owner[vi] == player {
                    true
                } else {
                    remaining[vi] -= 1;
                    remaining[vi] == 0
                };
                if joins {
                    attr[vi] = true;
                    queue.push(v);
                }
            }
        }
        attr
    }

    /// Winning region of the protagonist for the objective "visit `bad`
    /// only finitely often".
    ///
    /// Repeatedly removes the protagonist attractor of the region where the
    /// antagonist cannot force a visit to `bad`.
    pub fn solve_cobuchi(&self, bad: &[bool]) -> Vec<bool> {
        let n = self.len();
        debug_assert!(self.succ.iter().all(|s| !s.is_empty()), "dead end in arena");
        let pred = self.predecessors();
        let mut active = vec![true; n];
        let mut win = vec![false; n];
        loop {
            let target: Vec<bool> = (0..n).map(|v| active[v] && bad[v]).collect();
            let forced = self.attractor(&pred, Player::Antagonist, &target, &active);
            let safe: Vec<bool> = (0..n).map(|v| active[v] && !forced[v]).collect();
            if !safe.iter().any(|&b| b) {
                return win;
            }
            let won = self.attractor(&pred, Player::Protagonist, &safe, &active);
            for v in 0..n {
                if won[v] {
                    win[v] = true;
                    active[v] = false;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protagonist_escapes_bad_cycle() {
        // 0 (P) -> 1 (bad, self loop via 2) or 3 (good sink)
        let mut a = Arena::default();
        let n0 = a.add_node(Player::Protagonist);
        let n1 = a.add_node(Player::Antagonist);
        let n2 = a.add_node(Player::Protagonist);
        a.add_edge(n0, n1);
        a.add_edge(n0, n2);
        a.add_edge(n1, n1);
        a.add_edge(n2, n2);
        let win = a.solve_cobuchi(&[false, true, false]);
        assert_eq!(win, vec![true, false, true]);
    }

    #[test]
    fn antagonist_forces_bad_infinitely() {
        // antagonist node 0 chooses between bad 1 and good 2; both return to 0
        let mut a = Arena::default();
        let n0 = a.add_node(Player::Antagonist);
        let n1 = a.add_node(Player::Protagonist);
        let n2 = a.add_node(Player::Protagonist);
        a.add_edge(n0, n1);
        a.add_edge(n0, n2);
        a.add_edge(n1, n0);
        a.add_edge(n2, n0);
        assert_eq!(a.solve_cobuchi(&[false, true, false]), vec![false; 3]);
        // with the choice moved to the protagonist, it wins everywhere
        let mut b = Arena::default();
        let m0 = b.add_node(Player::Protagonist);
        let m1 = b.add_node(Player::Protagonist);
        let m2 = b.add_node(Player::Protagonist);
        b.add_edge(m0, m1);
        b.add_edge(m0, m2);
        b.add_edge(m1, m0);
        b.add_edge(m2, m0);
        assert_eq!(b.solve_cobuchi(&[false, true, false]), vec![true; 3]);
    }

    #[test]
    fn finitely_many_bad_visits_are_fine() {
        // bad 0 -> good sink 1
        let mut a = Arena::default();
        let n0 = a.add_node(Player::Antagonist);
        let n1 = a.add_node(Player::Antagonist);
        a.add_edge(n0, n1);
        a.add_edge(n1, n1);
        assert_eq!(a.solve_cobuchi(&[true, false]), vec![true, true]);
    }
}
