//! Asymptotic scheme for packings with bounded colour stretch.
//!
//! Large items (`≥ ε²`) are grouped per colour and rounded *down*; packings
//! of the rounded items into labelled configurations are enumerated, each
//! realised with the next group's original items, and completed with the
//! largest group (`Q`) by First Fit and the small items through the LPS
//! program. Only intended for a handful of items and colours.

pub mod lps;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classic::first_fit_into;
use crate::error::{Error, Result};
use crate::metrics::{colour_spans, OptSource};
use crate::model::{Bin, Colour, Instance, Item, Packing, Provenance};
use crate::offline::{RoundDirection, RoundedGroup};
use crate::oracle::{exact_opt, DEFAULT_LIMIT};
use crate::rational::Rational;

pub use lps::{solve_lps, LpsBin, LpsProblem, LpsSolution};

pub const DEFAULT_MAX_CONFIGURATIONS: usize = 200_000;
pub const DEFAULT_MAX_NODES: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AptasConfig {
    pub max_configurations: usize,
    pub max_nodes: u64,
    /// Colours with at most this many items get an exact OPT(I_c) for the
    /// stretch filter; larger ones fall back to the weight bound.
    pub oracle_limit: usize,
    /// Use `ε/m` in place of `ε`.
    pub rescale: bool,
    /// Known OPT(I_c) values; skips the oracle when present.
    pub per_colour_opt: Option<BTreeMap<Colour, usize>>,
    /// Keep a summary of every candidate in the outcome (capped).
    pub record_candidates: bool,
}

impl Default for AptasConfig {
    fn default() -> Self {
        AptasConfig {
            max_configurations: DEFAULT_MAX_CONFIGURATIONS,
            max_nodes: DEFAULT_MAX_NODES,
            oracle_limit: DEFAULT_LIMIT,
            rescale: false,
            per_colour_opt: None,
            record_candidates: false,
        }
    }
}

const MAX_RECORDED: usize = 10_000;

/// Items `≥ ε²` are large, the rest small.
pub fn split_small_large(instance: &Instance, eps: Rational) -> Result<(Vec<Item>, Vec<Item>)> {
    check_eps(eps)?;
    let threshold = eps * eps;
    Ok(instance
        .items
        .iter()
        .cloned()
        .partition(|e| e.size >= threshold))
}

fn check_eps(eps: Rational) -> Result<()> {
    if eps.is_zero() || eps >= Rational::ONE {
        return Err(Error::InvalidParameter(format!(
            "ε must lie in (0, 1), got {eps}"
        )));
    }
    Ok(())
}

/// Rounded-down groups of one colour, largest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColourGroups {
    pub colour: Colour,
    pub groups: Vec<RoundedGroup>,
}

/// Per colour: sort decreasing, cut into groups of `max(1, ⌊n_c·ε³⌋)` items
/// and round each down to its smallest member. Returns the groups and `Q`,
/// the union of every colour's first group.
pub fn group_round_down(large: &[Item], eps: Rational) -> Result<(Vec<ColourGroups>, Vec<Item>)> {
    check_eps(eps)?;
    let cube = eps * eps * eps;
    let mut by_colour: BTreeMap<Colour, Vec<Item>> = BTreeMap::new();
    for e in large {
        by_colour.entry(e.colour).or_default().push(e.clone());
    }
    let mut out = Vec::new();
    let mut q = Vec::new();
    for (colour, mut items) in by_colour {
        items.sort_by_key(|e| std::cmp::Reverse(e.size));
        let size = (cube.mul_int(items.len() as u128).floor() as usize).max(1);
        let groups: Vec<RoundedGroup> = items
            .chunks(size)
            .map(|chunk| RoundedGroup {
                original_items: chunk.to_vec(),
                rounded_size: chunk.last().expect("non-empty chunk").size,
                direction: RoundDirection::Down,
            })
            .collect();
        q.extend(groups[0].original_items.iter().cloned());
        out.push(ColourGroups { colour, groups });
    }
    Ok((out, q))
}

/// A rounded item class: `count` items of `colour` with size `size`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeClass {
    pub colour: Colour,
    /// Index of the group within its colour (0 = largest).
    pub group: usize,
    pub size: Rational,
    pub count: usize,
}

pub fn size_classes(groups: &[ColourGroups]) -> Vec<SizeClass> {
    groups
        .iter()
        .flat_map(|cg| {
            cg.groups.iter().enumerate().map(move |(j, g)| SizeClass {
                colour: cg.colour,
                group: j,
                size: g.rounded_size,
                count: g.original_items.len(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelledConfiguration {
    /// Multiplicity of each size class.
    pub counts: Vec<usize>,
    /// Colours whose small items may later join the bin.
    pub small_colours: Vec<Colour>,
    pub slack: Rational,
}

impl LabelledConfiguration {
    pub fn is_label_only(&self) -> bool {
        self.counts.iter().all(|&k| k == 0)
    }
}

/// Every multiset of classes that fits in one bin (using each class at most
/// `count` times), crossed with every subset of `label_colours`. Label-only
/// configurations come first.
pub fn enumerate_configurations(
    classes: &[SizeClass],
    label_colours: &[Colour],
    max_configurations: usize,
) -> Result<Vec<LabelledConfiguration>> {
    if label_colours.len() >= 32 {
        return Err(Error::InvalidParameter(format!(
            "{} label colours is too many",
            label_colours.len()
        )));
    }
    let subsets = 1usize << label_colours.len();
    let mut multisets: Vec<(Vec<usize>, Rational)> = Vec::new();
    let mut current = vec![0; classes.len()];
    let cap = max_configurations / subsets + 1;
    collect_multisets(classes, 0, Rational::ZERO, &mut current, &mut multisets, cap)
        .map_err(|_| Error::budget("configurations", max_configurations as u64))?;

    let total = multisets.len().saturating_mul(subsets);
    if total > max_configurations {
        return Err(Error::budget("configurations", max_configurations as u64));
    }
    let mut out = Vec::with_capacity(total);
    for (counts, used) in multisets {
        for mask in 0..subsets {
            let small_colours = label_colours
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &c)| c)
                .collect();
            out.push(LabelledConfiguration {
                counts: counts.clone(),
                small_colours,
                slack: Rational::ONE - used,
            });
        }
    }
    Ok(out)
}

fn collect_multisets(
    classes: &[SizeClass],
    k: usize,
    used: Rational,
    current: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, Rational)>,
    cap: usize,
) -> Result<()> {
    if k == classes.len() {
        if out.len() >= cap {
            return Err(Error::budget("configurations", cap as u64));
        }
        out.push((current.clone(), used));
        return Ok(());
    }
    let mut load = used;
    let mut mult = 0;
    loop {
        current[k] = mult;
        collect_multisets(classes, k + 1, load, current, out, cap)?;
        if mult == classes[k].count || classes[k].size.is_zero() {
            break;
        }
        match load.checked_add(classes[k].size) {
            Ok(next) if next <= Rational::ONE => load = next,
            _ => break,
        }
        mult += 1;
    }
    current[k] = 0;
    Ok(())
}

/// Bounds for [`search_packings`].
#[derive(Debug, Clone, Default)]
pub struct SearchBounds {
    /// Per-colour span ceiling; candidates exceeding any are skipped.
    pub span_caps: Option<BTreeMap<Colour, usize>>,
    /// Most bins without large items in one candidate.
    pub max_label_only: usize,
    pub max_nodes: u64,
}

/// Depth-first search over multisets of configurations that cover the
/// rounded items exactly. `visit` receives each candidate as a list of
/// configuration indices (non-increasing). Returns the nodes expanded.
pub fn search_packings(
    configs: &[LabelledConfiguration],
    classes: &[SizeClass],
    bounds: &SearchBounds,
    visit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<u64> {
    if configs.is_empty() {
        return Ok(0);
    }
    let mut colour_index: BTreeMap<Colour, usize> = BTreeMap::new();
    for c in classes.iter().map(|k| k.colour) {
        let n = colour_index.len();
        colour_index.entry(c).or_insert(n);
    }
    for cfg in configs {
        for c in &cfg.small_colours {
            let n = colour_index.len();
            colour_index.entry(*c).or_insert(n);
        }
    }
    let touched: Vec<Vec<usize>> = configs
        .iter()
        .map(|cfg| {
            let mut t: Vec<usize> = cfg
                .counts
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, _)| colour_index[&classes[i].colour])
                .chain(cfg.small_colours.iter().map(|c| colour_index[c]))
                .collect();
            t.sort_unstable();
            t.dedup();
            t
        })
        .collect();
    let caps: Vec<usize> = {
        let mut caps = vec![usize::MAX; colour_index.len()];
        if let Some(span_caps) = &bounds.span_caps {
            for (c, &i) in &colour_index {
                caps[i] = span_caps.get(c).copied().unwrap_or(0);
            }
        }
        caps
    };
    let min_idx: Vec<usize> = (0..classes.len())
        .map(|k| {
            configs
                .iter()
                .position(|cfg| cfg.counts[k] > 0)
                .unwrap_or(usize::MAX)
        })
        .collect();

    let mut dfs = Dfs {
        configs,
        touched,
        caps,
        min_idx,
        remaining: classes.iter().map(|k| k.count).collect(),
        spans: vec![0; colour_index.len()],
        label_only: 0,
        max_label_only: bounds.max_label_only,
        chosen: Vec::new(),
        nodes: 0,
        max_nodes: bounds.max_nodes,
        visit,
    };
    dfs.run(configs.len() - 1)?;
    Ok(dfs.nodes)
}

struct Dfs<'a, 'v> {
    configs: &'a [LabelledConfiguration],
    touched: Vec<Vec<usize>>,
    caps: Vec<usize>,
    min_idx: Vec<usize>,
    remaining: Vec<usize>,
    spans: Vec<usize>,
    label_only: usize,
    max_label_only: usize,
    chosen: Vec<usize>,
    nodes: u64,
    max_nodes: u64,
    visit: &'v mut dyn FnMut(&[usize]) -> Result<()>,
}

impl Dfs<'_, '_> {
    fn run(&mut self, last: usize) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(Error::budget("aptas search nodes", self.max_nodes));
        }
        let mut done = true;
        for (k, &left) in self.remaining.iter().enumerate() {
            if left > 0 {
                done = false;
                if self.min_idx[k] > last {
                    return Ok(());
                }
            }
        }
        if done {
            (self.visit)(&self.chosen)?;
        }
        for idx in (0..=last).rev() {
            let cfg = &self.configs[idx];
            let label_only = cfg.is_label_only();
            if label_only && (cfg.small_colours.is_empty() || self.label_only >= self.max_label_only) {
                continue;
            }
            if cfg.counts.iter().zip(&self.remaining).any(|(&k, &r)| k > r) {
                continue;
            }
            if self.touched[idx].iter().any(|&c| self.spans[c] >= self.caps[c]) {
                continue;
            }
            for (r, &k) in self.remaining.iter_mut().zip(&cfg.counts) {
                *r -= k;
            }
            for &c in &self.touched[idx] {
                self.spans[c] += 1;
            }
            self.label_only += usize::from(label_only);
            self.chosen.push(idx);

            let res = self.run(idx);

            self.chosen.pop();
            self.label_only -= usize::from(label_only);
            for &c in &self.touched[idx] {
                self.spans[c] -= 1;
            }
            let cfg = &self.configs[idx];
            for (r, &k) in self.remaining.iter_mut().zip(&cfg.counts) {
                *r += k;
            }
            res?;
        }
        Ok(())
    }
}

/// Realises a candidate with original sizes: every slot of group `j` takes
/// an item of group `j + 1` of the same colour, which is no larger. Returns
/// the bins and each bin's small-colour label.
pub fn realise_candidate(
    configs: &[LabelledConfiguration],
    classes: &[SizeClass],
    groups: &[ColourGroups],
    chosen: &[usize],
) -> (Vec<Bin>, Vec<Vec<Colour>>) {
    let by_colour: BTreeMap<Colour, &ColourGroups> = groups.iter().map(|g| (g.colour, g)).collect();
    let mut cursor = vec![0usize; classes.len()];
    let mut bins = Vec::with_capacity(chosen.len());
    let mut labels = Vec::with_capacity(chosen.len());
    for (b, &idx) in chosen.iter().enumerate() {
        let cfg = &configs[idx];
        let mut bin = Bin::new(b);
        for (k, &mult) in cfg.counts.iter().enumerate() {
            let class = &classes[k];
            let Some(next) = by_colour[&class.colour].groups.get(class.group + 1) else {
                cursor[k] += mult;
                continue;
            };
            for _ in 0..mult {
                if let Some(item) = next.original_items.get(cursor[k]) {
                    bin.push(item.clone());
                }
                cursor[k] += 1;
            }
        }
        bins.push(bin);
        labels.push(cfg.small_colours.clone());
    }
    (bins, labels)
}

/// Greedy fill of each `(bin, colour)` quota from the LPS solution: a
/// colour's small items go in order while the next still fits its quota.
/// Returns the leftover items.
pub fn place_small_items(
    bins: &mut [Bin],
    labels: &[Vec<Colour>],
    x: &LpsSolution,
    small: &BTreeMap<Colour, Vec<Item>>,
) -> Vec<Item> {
    let mut cursor: BTreeMap<Colour, usize> = small.keys().map(|&c| (c, 0)).collect();
    for (i, bin) in bins.iter_mut().enumerate() {
        for &c in &labels[i] {
            let Some(items) = small.get(&c) else { continue };
            let pos = cursor.get_mut(&c).expect("cursor per colour");
            let mut quota = x.get(i, c);
            while let Some(item) = items.get(*pos) {
                if item.size > quota {
                    break;
                }
                quota -= item.size;
                bin.push(item.clone());
                *pos += 1;
            }
        }
    }
    small
        .iter()
        .flat_map(|(c, items)| items[cursor[c]..].iter().cloned())
        .collect()
}

/// First Fit into fresh bins over the items ordered by colour.
pub fn pack_overflow_ff(items: &[Item]) -> Result<Vec<Bin>> {
    let mut sorted = items.to_vec();
    sorted.sort_by_key(|e| e.colour);
    let mut bins = Vec::new();
    first_fit_into(&mut bins, &sorted, None)?;
    Ok(bins)
}

/// Summary of one evaluated candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub configurations: Vec<usize>,
    pub large_bins: usize,
    pub total_bins: usize,
    pub colour_stretch: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct AptasOutcome {
    pub packing: Packing,
    pub candidates: u64,
    pub nodes: u64,
    pub configurations: usize,
    pub per_colour_opt: BTreeMap<Colour, usize>,
    pub opt_source: OptSource,
    pub trace: Vec<CandidateSummary>,
}

pub fn aptas(instance: &Instance, eps: Rational, beta: Option<Rational>, config: &AptasConfig) -> Result<Packing> {
    aptas_detailed(instance, eps, beta, config).map(|o| o.packing)
}

/// Runs the full pipeline. `beta = None` disables the stretch filter.
pub fn aptas_detailed(
    instance: &Instance,
    eps: Rational,
    beta: Option<Rational>,
    config: &AptasConfig,
) -> Result<AptasOutcome> {
    instance.validate()?;
    check_eps(eps)?;
    if let Some(b) = beta {
        if b < Rational::ONE {
            return Err(Error::InvalidParameter(format!("β must be at least 1, got {b}")));
        }
    }
    let work_eps = if config.rescale && instance.m > 1 {
        eps.div_int(instance.m as u128)
    } else {
        eps
    };

    let (per_colour_opt, opt_source) = match &config.per_colour_opt {
        Some(known) => (known.clone(), OptSource::ExactOracle),
        None => {
            let mut exact = true;
            let mut map = BTreeMap::new();
            for c in instance.colours() {
                let items = instance.colour_items(c);
                let opt = if items.len() <= config.oracle_limit {
                    exact_opt(&items, config.oracle_limit)?
                } else {
                    exact = false;
                    instance.colour_weight_bound(c)
                };
                map.insert(c, opt);
            }
            let source = if exact { OptSource::ExactOracle } else { OptSource::WeightLowerBound };
            (map, source)
        }
    };
    let span_caps = beta.map(|b| {
        per_colour_opt
            .iter()
            .map(|(&c, &opt)| (c, b.mul_int(opt as u128).floor() as usize))
            .collect::<BTreeMap<_, _>>()
    });

    let (large, small_items) = split_small_large(instance, work_eps)?;
    let (groups, q) = group_round_down(&large, work_eps)?;
    let classes = size_classes(&groups);

    let mut small: BTreeMap<Colour, Vec<Item>> = BTreeMap::new();
    for e in &small_items {
        small.entry(e.colour).or_default().push(e.clone());
    }
    let label_colours: Vec<Colour> = small.keys().copied().collect();
    let supplies: BTreeMap<Colour, Rational> = small
        .iter()
        .map(|(&c, items)| (c, items.iter().map(|e| e.size).sum()))
        .collect();

    let configs = enumerate_configurations(&classes, &label_colours, config.max_configurations)?;
    let q_bins = pack_overflow_ff(&q)?;

    let bounds = SearchBounds {
        span_caps,
        max_label_only: small_items.len(),
        max_nodes: config.max_nodes,
    };
    let provenance = Provenance::new(
        "aptas",
        match beta {
            Some(b) => format!("eps={eps},beta={b}"),
            None => format!("eps={eps}"),
        },
    );

    let mut best: Option<(usize, Rational, Packing)> = None;
    let mut candidates = 0u64;
    let mut trace = Vec::new();
    let mut evaluate = |chosen: &[usize]| -> Result<()> {
        candidates += 1;
        let (mut bins, labels) = realise_candidate(&configs, &classes, &groups, chosen);
        let problem = LpsProblem {
            bins: bins
                .iter()
                .zip(&labels)
                .map(|(b, l)| LpsBin { load: b.load(), colours: l.clone() })
                .collect(),
            supplies: supplies.clone(),
        };
        let x = solve_lps(&problem)?;
        let overflow = place_small_items(&mut bins, &labels, &x, &small);
        let overflow_bins = pack_overflow_ff(&overflow)?;
        bins.extend(q_bins.iter().cloned());
        bins.extend(overflow_bins);
        for (i, b) in bins.iter_mut().enumerate() {
            b.id = i;
        }
        let packing = Packing::new(bins, provenance.clone()).compact();
        let total = packing.total_bins();
        let stretch = colour_spans(&packing, instance.m)
            .into_iter()
            .map(|(c, span)| {
                let opt = per_colour_opt.get(&c).copied().unwrap_or(0).max(1);
                Rational::frac(span as u128, opt as u128)
            })
            .max()
            .unwrap_or(Rational::ZERO);
        if config.record_candidates && trace.len() < MAX_RECORDED {
            trace.push(CandidateSummary {
                configurations: chosen.to_vec(),
                large_bins: chosen.len(),
                total_bins: total,
                colour_stretch: stretch,
            });
        }
        let better = match &best {
            None => true,
            Some((b_total, b_stretch, _)) => (total, stretch) < (*b_total, *b_stretch),
        };
        if better {
            best = Some((total, stretch, packing));
        }
        Ok(())
    };

    let searched = search_packings(&configs, &classes, &bounds, &mut evaluate);
    let nodes = match searched {
        Ok(nodes) => nodes,
        Err(Error::BudgetExceeded { what, limit, .. }) => {
            return Err(Error::BudgetExceeded {
                what,
                limit,
                best_so_far: best.map(|(_, _, p)| Box::new(p)),
            });
        }
        Err(e) => return Err(e),
    };
    let Some((_, _, packing)) = best else {
        return Err(Error::EmptyCandidates(beta.unwrap_or(Rational::ZERO)));
    };
    Ok(AptasOutcome {
        packing,
        candidates,
        nodes,
        configurations: configs.len(),
        per_colour_opt,
        opt_source,
        trace,
    })
}
