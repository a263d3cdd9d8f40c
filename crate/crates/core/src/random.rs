//! Seeded random transition systems for differential testing.

use rand::Rng;

use crate::model::{EdgeKind, StateId, SystemBuilder, TransitionSystem};

#[derive(Copy, Clone, Debug)]
pub struct RandomSystemParams {
    pub states: usize,
    pub errors: usize,
    /// Probability that an ordered pair of states carries an edge.
    pub density: f64,
    pub repair: bool,
}

impl RandomSystemParams {
    pub fn new(states: usize, density: f64) -> Self {
        Self {
            states,
            errors: 1,
            density,
            repair: false,
        }
    }
}

/// A valid system: every non-error state has a controlled successor, the
/// three edge relations are disjoint and only failures enter error states.
pub fn random_system<R: Rng + ?Sized>(rng: &mut R, params: RandomSystemParams) -> TransitionSystem {
    let n = params.states;
    assert!(n > params.errors, "need at least one non-error state");
    let errors: Vec<bool> = (0..n).map(|i| i >= n - params.errors).collect();
    let mut kind: Vec<Option<EdgeKind>> = vec![None; n * n];
    for s in (0..n).filter(|&s| !errors[s]) {
        for t in 0..n {
            if !rng.gen_bool(params.density) {
                continue;
            }
            kind[s * n + t] = if errors[t] {
                Some(EdgeKind::Uncontrolled)
            } else {
                let roll = rng.gen_range(0..if params.repair { 5 } else { 4 });
                Some(match roll {
                    0 | 1 => EdgeKind::Controlled,
                    2 | 3 => EdgeKind::Uncontrolled,
                    _ => EdgeKind::Repair,
                })
            };
        }
        let has_controlled = (0..n).any(|t| kind[s * n + t] == Some(EdgeKind::Controlled));
        if !has_controlled {
            let t = loop {
                let t = rng.gen_range(0..n);
                if !errors[t] {
                    break t;
                }
            };
            kind[s * n + t] = Some(EdgeKind::Controlled);
        }
    }
    let non_error: Vec<usize> = (0..n).filter(|&s| !errors[s]).collect();
    let mut b = SystemBuilder::new(n);
    b.set_initial(StateId(non_error[rng.gen_range(0..non_error.len())] as u32));
    for (s, &e) in errors.iter().enumerate() {
        if e {
            b.add_error(StateId(s as u32));
        }
    }
    for s in 0..n {
        for t in 0..n {
            if let Some(k) = kind[s * n + t] {
                b.add_edge(k, StateId(s as u32), StateId(t as u32));
            }
        }
    }
    b.build().expect("random system in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_systems_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for i in 0..200 {
            let params = RandomSystemParams {
                states: 3 + i % 6,
                errors: 1 + i % 2,
                density: [0.2, 0.4][i % 2],
                repair: i % 3 == 0,
            };
            let sys = random_system(&mut rng, params);
            assert!(sys.validate().is_empty(), "{:?}", sys.validate());
        }
    }
}
