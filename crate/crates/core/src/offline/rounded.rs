//! Optimal packing of an instance with few distinct sizes.
//!
//! The state is the vector of remaining counts per size class. From each
//! state we try every maximal bin filling that contains at least one item of
//! the first non-exhausted class (some bin of any optimal packing does), and
//! memoise the best bin count per state.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rational::Rational;

pub struct ClassSolver<'a> {
    sizes: &'a [Rational],
    memo: HashMap<Vec<u32>, (u32, Vec<u32>)>,
    nodes: u64,
    budget: u64,
}

/// Fewest bins for `counts[i]` items of size `sizes[i]`; returns one
/// count vector per bin. `sizes` must be nonincreasing.
pub fn solve_classes(sizes: &[Rational], counts: &[u32], budget: u64) -> Result<Vec<Vec<u32>>> {
    debug_assert!(sizes.windows(2).all(|w| w[0] >= w[1]));
    debug_assert_eq!(sizes.len(), counts.len());
    if sizes.iter().any(|s| s.is_zero() || *s > Rational::ONE) {
        return Err(Error::InvalidParameter("class sizes must lie in (0, 1]".into()));
    }
    let mut solver = ClassSolver {
        sizes,
        memo: HashMap::new(),
        nodes: 0,
        budget,
    };
    solver.best(counts)?;
    let mut bins = Vec::new();
    let mut state = counts.to_vec();
    while state.iter().any(|&c| c > 0) {
        let (_, config) = solver.memo[&state].clone();
        for (s, c) in state.iter_mut().zip(&config) {
            *s -= c;
        }
        bins.push(config);
    }
    Ok(bins)
}

impl ClassSolver<'_> {
    fn best(&mut self, state: &[u32]) -> Result<u32> {
        let Some(first) = state.iter().position(|&c| c > 0) else {
            return Ok(0);
        };
        if let Some((bins, _)) = self.memo.get(state) {
            return Ok(*bins);
        }
        self.tick()?;
        let mut fillings = Vec::new();
        let mut config = vec![0u32; state.len()];
        self.fillings(state, first, first, Rational::ONE, &mut config, &mut fillings)?;

        let mut best: Option<(u32, Vec<u32>)> = None;
        let mut next = state.to_vec();
        for filling in fillings {
            for i in 0..next.len() {
                next[i] = state[i] - filling[i];
            }
            let bins = self.best(&next)? + 1;
            if best.as_ref().is_none_or(|(b, _)| bins < *b) {
                best = Some((bins, filling));
            }
        }
        let best = best.expect("the first class always fits alone");
        let bins = best.0;
        self.memo.insert(state.to_vec(), best);
        Ok(bins)
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::budget("rounded-instance search nodes", self.budget));
        }
        Ok(())
    }

    fn fillings(
        &mut self,
        state: &[u32],
        first: usize,
        idx: usize,
        room: Rational,
        config: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) -> Result<()> {
        if idx == state.len() {
            let maximal = (0..state.len())
                .all(|i| state[i] == config[i] || self.sizes[i] > room);
            if maximal {
                out.push(config.clone());
            }
            return Ok(());
        }
        self.tick()?;
        let size = self.sizes[idx];
        let fit = (room / size).floor().min(state[idx] as u128) as u32;
        let min = if idx == first { 1 } else { 0 };
        if fit < min {
            return Ok(());
        }
        for take in (min..=fit).rev() {
            config[idx] = take;
            let left = room - size.mul_int(take as u128);
            self.fillings(state, first, idx + 1, left, config, out)?;
        }
        config[idx] = 0;
        Ok(())
    }
}
