//! The small-item program: maximise placed small mass subject to bin room and
//! colour supply. Its constraint matrix is a bipartite transportation
//! problem, so an exact max flow (colours → bins) gives the LP optimum.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Colour;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpsBin {
    /// Size already packed in the bin.
    pub load: Rational,
    /// Colours whose small items may enter the bin.
    pub colours: Vec<Colour>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LpsProblem {
    pub bins: Vec<LpsBin>,
    /// Total small-item size per colour.
    pub supplies: BTreeMap<Colour, Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpsSolution {
    pub value: Rational,
    /// `x[(bin, colour)]` for every admissible pair.
    pub x: BTreeMap<(usize, Colour), Rational>,
}

impl LpsSolution {
    pub fn get(&self, bin: usize, colour: Colour) -> Rational {
        self.x.get(&(bin, colour)).copied().unwrap_or(Rational::ZERO)
    }
}

/// Exact optimum of the program by Edmonds–Karp over rationals.
pub fn solve_lps(problem: &LpsProblem) -> Result<LpsSolution> {
    for (i, b) in problem.bins.iter().enumerate() {
        if b.load > Rational::ONE {
            return Err(Error::InvalidParameter(format!(
                "bin {i} already holds {} > 1",
                b.load
            )));
        }
    }
    let colours: Vec<Colour> = problem.supplies.keys().copied().collect();
    let nc = colours.len();
    let nb = problem.bins.len();
    let source = 0;
    let sink = nc + nb + 1;
    let n = sink + 1;
    let mut cap = vec![vec![Rational::ZERO; n]; n];
    for (ci, c) in colours.iter().enumerate() {
        cap[source][1 + ci] = problem.supplies[c];
    }
    for (bi, b) in problem.bins.iter().enumerate() {
        let room = Rational::ONE - b.load;
        cap[1 + nc + bi][sink] = room;
        for c in &b.colours {
            if let Ok(ci) = colours.binary_search(c) {
                cap[1 + ci][1 + nc + bi] = room;
            }
        }
    }
    let original = cap.clone();

    let mut value = Rational::ZERO;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && !cap[u][v].is_zero() {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[sink] == usize::MAX {
            break;
        }
        let mut push = None::<Rational>;
        let mut v = sink;
        while v != source {
            let u = prev[v];
            push = Some(push.map_or(cap[u][v], |p| p.min(cap[u][v])));
            v = u;
        }
        let push = push.expect("path has an edge");
        let mut v = sink;
        while v != source {
            let u = prev[v];
            cap[u][v] -= push;
            cap[v][u] += push;
            v = u;
        }
        value += push;
    }

    let mut x = BTreeMap::new();
    for (bi, b) in problem.bins.iter().enumerate() {
        for c in &b.colours {
            if let Ok(ci) = colours.binary_search(c) {
                let (u, v) = (1 + ci, 1 + nc + bi);
                x.insert((bi, *c), original[u][v].saturating_sub(cap[u][v]));
            }
        }
    }
    Ok(LpsSolution { value, x })
}
