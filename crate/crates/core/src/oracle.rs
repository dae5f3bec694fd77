//! Exact solvers for small instances: OPT(I), OPT(I_c) and OPT_β(I).
//!
//! These are the ground truth for every stretch measurement. They refuse
//! inputs above their size limits instead of approximating.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{Bin, Colour, Instance, Item, Packing, Provenance};
use crate::rational::Rational;

pub const DEFAULT_LIMIT: usize = 16;
pub const DEFAULT_BETA_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    DpBitmask,
    ExhaustivePartition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaOpt {
    pub beta: Rational,
    /// `None` when no packing meets the colour-stretch bound.
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub opt_bins: usize,
    pub per_colour_opt: BTreeMap<Colour, usize>,
    pub opt_beta: Option<BetaOpt>,
    pub method: OracleMethod,
    pub instance_digest: String,
}

/// Hash of the instance's item multiset and colour count. Item ids and
/// arrival order do not affect it.
pub fn instance_digest(instance: &Instance) -> String {
    let mut keys: Vec<(Rational, Colour)> =
        instance.items.iter().map(|e| (e.size, e.colour)).collect();
    keys.sort();
    let mut hasher = Sha256::new();
    hasher.update(format!("m={};", instance.m));
    for (size, colour) in keys {
        hasher.update(format!("{size}:{colour};"));
    }
    hex::encode(hasher.finalize())
}

/// Minimum number of unit bins for `items`, by dynamic programming over
/// subsets: `best[mask]` is the lexicographically smallest (bins, last-bin
/// load) over orderings of `mask`.
pub fn exact_opt(items: &[Item], limit_n: usize) -> Result<usize> {
    if items.len() > limit_n {
        return Err(Error::OracleLimit {
            n: items.len(),
            limit: limit_n,
        });
    }
    items.iter().try_for_each(Item::check_size)?;
    if items.is_empty() {
        return Ok(0);
    }
    let sizes: Vec<Rational> = items.iter().map(|e| e.size).collect();
    Ok(match scale_to_integers(&sizes) {
        Some((weights, cap)) => subset_dp(&weights, cap),
        None => subset_dp(&sizes, Rational::ONE),
    })
}

fn scale_to_integers(sizes: &[Rational]) -> Option<(Vec<u128>, u128)> {
    let mut lcm: u128 = 1;
    for s in sizes {
        let d = s.denom();
        let g = gcd(lcm, d);
        lcm = (lcm / g).checked_mul(d)?;
        if lcm > 1u128 << 100 {
            return None;
        }
    }
    let weights = sizes
        .iter()
        .map(|s| s.numer() * (lcm / s.denom()))
        .collect();
    Some((weights, lcm))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn subset_dp<W>(sizes: &[W], cap: W) -> usize
where
    W: Copy + Ord + std::ops::Add<Output = W>,
{
    let n = sizes.len();
    let full = (1usize << n) - 1;
    // load == cap marks "no open bin" for the empty set
    let mut best: Vec<Option<(u32, W)>> = vec![None; 1 << n];
    best[0] = Some((0, cap));
    for mask in 0..full {
        let Some((bins, load)) = best[mask] else {
            continue;
        };
        for (i, &s) in sizes.iter().enumerate() {
            if mask & (1 << i) != 0 {
                continue;
            }
            let next = if load + s <= cap && bins > 0 {
                (bins, load + s)
            } else {
                (bins + 1, s)
            };
            let slot = &mut best[mask | (1 << i)];
            if slot.is_none_or(|cur| next < cur) {
                *slot = Some(next);
            }
        }
    }
    best[full].expect("full mask reachable").0 as usize
}

/// What an exhaustive search minimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Bins,
    SpanOf(Colour),
}

/// Constraints for [`exhaustive_search`].
#[derive(Debug, Clone, Default)]
pub struct SearchLimits {
    pub max_bins: Option<usize>,
    /// Per-colour cap on the number of bins a colour may span.
    pub span_caps: BTreeMap<Colour, usize>,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub value: usize,
    pub packing: Packing,
    pub nodes: u64,
}

/// Enumerates every packing of the instance (items into unlabelled bins)
/// that meets `limits`, and returns one minimising `objective`.
pub fn exhaustive_search(
    instance: &Instance,
    limits: &SearchLimits,
    objective: Objective,
    limit_n: usize,
) -> Result<Option<SearchOutcome>> {
    if instance.len() > limit_n {
        return Err(Error::OracleLimit {
            n: instance.len(),
            limit: limit_n,
        });
    }
    instance.validate()?;
    let mut items = instance.items.clone();
    items.sort_by(|a, b| b.size.cmp(&a.size).then(a.id.cmp(&b.id)));
    let remaining: Vec<Rational> = {
        let mut acc = Rational::ZERO;
        let mut suffix = vec![Rational::ZERO; items.len() + 1];
        for i in (0..items.len()).rev() {
            acc += items[i].size;
            suffix[i] = acc;
        }
        suffix
    };
    let mut search = Exhaustive {
        items: &items,
        suffix: remaining,
        limits,
        objective,
        bins: Vec::new(),
        spans: BTreeMap::new(),
        best: None,
        best_assignment: Vec::new(),
        assignment: Vec::with_capacity(items.len()),
        nodes: 0,
    };
    search.dfs(0);
    let Some(value) = search.best else {
        return Ok(None);
    };
    let nodes = search.nodes;
    let mut bins: Vec<Bin> = Vec::new();
    for (item, &b) in items.iter().zip(&search.best_assignment) {
        while bins.len() <= b {
            bins.push(Bin::new(bins.len()));
        }
        bins[b].push(item.clone());
    }
    Ok(Some(SearchOutcome {
        value,
        packing: Packing::new(bins, Provenance::new("exhaustive", format!("{objective:?}"))),
        nodes,
    }))
}

struct Exhaustive<'a> {
    items: &'a [Item],
    suffix: Vec<Rational>,
    limits: &'a SearchLimits,
    objective: Objective,
    bins: Vec<(Rational, Vec<Colour>)>,
    spans: BTreeMap<Colour, usize>,
    best: Option<usize>,
    best_assignment: Vec<usize>,
    assignment: Vec<usize>,
    nodes: u64,
}

impl Exhaustive<'_> {
    fn current_value(&self) -> usize {
        match self.objective {
            Objective::Bins => self.bins.len(),
            Objective::SpanOf(c) => self.spans.get(&c).copied().unwrap_or(0),
        }
    }

    fn dfs(&mut self, idx: usize) {
        self.nodes += 1;
        if self.best.is_some_and(|b| self.current_value() >= b) {
            return;
        }
        if idx == self.items.len() {
            self.best = Some(self.current_value());
            self.best_assignment = self.assignment.clone();
            return;
        }
        // weight bound on the bins still needed
        if let Objective::Bins = self.objective {
            let free: Rational = self
                .bins
                .iter()
                .map(|(load, _)| Rational::ONE.saturating_sub(*load))
                .sum();
            let extra = self.suffix[idx].saturating_sub(free).ceil() as usize;
            if self.best.is_some_and(|b| self.bins.len() + extra >= b) {
                return;
            }
        }
        let item = &self.items[idx];
        for b in 0..=self.bins.len() {
            let opening = b == self.bins.len();
            if opening {
                if self
                    .limits
                    .max_bins
                    .is_some_and(|m| self.bins.len() >= m)
                {
                    continue;
                }
                self.bins.push((Rational::ZERO, Vec::new()));
            }
            if self.bins[b].0 + item.size > Rational::ONE {
                continue;
            }
            let new_colour = !self.bins[b].1.contains(&item.colour);
            let span = self.spans.get(&item.colour).copied().unwrap_or(0) + new_colour as usize;
            let capped = self
                .limits
                .span_caps
                .get(&item.colour)
                .is_some_and(|&cap| span > cap);
            if !capped {
                self.bins[b].0 += item.size;
                if new_colour {
                    self.bins[b].1.push(item.colour);
                    self.spans.insert(item.colour, span);
                }
                self.assignment.push(b);
                self.dfs(idx + 1);
                self.assignment.pop();
                self.bins[b].0 -= item.size;
                if new_colour {
                    self.bins[b].1.pop();
                    self.spans.insert(item.colour, span - 1);
                }
            }
            if opening {
                self.bins.pop();
            }
        }
    }
}

/// OPT(I_c) for every colour of the instance.
pub fn per_colour_opt(instance: &Instance, limit_n: usize) -> Result<BTreeMap<Colour, usize>> {
    instance
        .colours()
        .map(|c| Ok((c, exact_opt(&instance.colour_items(c), limit_n)?)))
        .collect()
}

/// Fewest bins over packings in which every colour spans at most
/// `⌊β · OPT(I_c)⌋` bins (no additive slack).
pub fn exact_opt_beta(instance: &Instance, beta: Rational, limit_n: usize) -> Result<usize> {
    let per_colour = per_colour_opt(instance, limit_n.max(DEFAULT_LIMIT))?;
    exact_opt_beta_with(instance, beta, &per_colour, limit_n)
}

pub fn exact_opt_beta_with(
    instance: &Instance,
    beta: Rational,
    per_colour: &BTreeMap<Colour, usize>,
    limit_n: usize,
) -> Result<usize> {
    let limits = SearchLimits {
        max_bins: None,
        span_caps: beta_caps(beta, per_colour),
    };
    match exhaustive_search(instance, &limits, Objective::Bins, limit_n)? {
        Some(outcome) => Ok(outcome.value),
        None => Err(Error::Infeasible(beta)),
    }
}

pub fn beta_caps(beta: Rational, per_colour: &BTreeMap<Colour, usize>) -> BTreeMap<Colour, usize> {
    per_colour
        .iter()
        .map(|(&c, &opt)| (c, beta.mul_int(opt as u128).floor() as usize))
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub limit_n: usize,
    pub beta_limit_n: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            limit_n: DEFAULT_LIMIT,
            beta_limit_n: DEFAULT_BETA_LIMIT,
        }
    }
}

/// Full oracle record for an instance, optionally including OPT_β.
pub fn solve(instance: &Instance, config: OracleConfig, beta: Option<Rational>) -> Result<OracleResult> {
    instance.validate()?;
    let opt_bins = exact_opt(&instance.items, config.limit_n)?;
    let per_colour = per_colour_opt(instance, config.limit_n)?;
    let (opt_beta, method) = match beta {
        Some(beta) => {
            let bins = match exact_opt_beta_with(instance, beta, &per_colour, config.beta_limit_n) {
                Ok(b) => Some(b),
                Err(Error::Infeasible(_)) => None,
                Err(e) => return Err(e),
            };
            (Some(BetaOpt { beta, bins }), OracleMethod::ExhaustivePartition)
        }
        None => (None, OracleMethod::DpBitmask),
    };
    Ok(OracleResult {
        opt_bins,
        per_colour_opt: per_colour,
        opt_beta,
        method,
        instance_digest: instance_digest(instance),
    })
}
