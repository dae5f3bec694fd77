//! Offline schemes: the grouping-and-rounding APTAS with small items packed
//! per colour (bin stretch 1+ε, colour stretch O(1/ε)), and the
//! per-colour-APTAS-then-Bounded-Best-Fit replay (bin stretch 1.7, colour
//! stretch 1+ε).

pub mod rounded;

use serde::{Deserialize, Serialize};

use crate::classic::{bounded_best_fit, first_fit_into};
use crate::error::{Error, Result};
use crate::model::{Bin, Instance, Item, Packing, Provenance};
use crate::rational::Rational;

pub use rounded::solve_classes;

pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundDirection {
    Up,
    Down,
}

/// A group of items sharing one rounded size: the largest member when
/// rounding up, the smallest when rounding down.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundedGroup {
    pub original_items: Vec<Item>,
    pub rounded_size: Rational,
    pub direction: RoundDirection,
}

#[derive(Debug, Clone, Copy)]
pub struct VlConfig {
    /// Search nodes allowed when solving the rounded instance.
    pub node_budget: u64,
}

impl Default for VlConfig {
    fn default() -> Self {
        VlConfig {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// Accepts `0 < ε ≤ 1/2` with `1/ε` an integer; returns `1/ε`.
pub fn check_epsilon(eps: Rational) -> Result<u128> {
    if eps.is_zero() || eps > Rational::frac(1, 2) || eps.numer() != 1 {
        return Err(Error::InvalidParameter(format!(
            "ε must be 1/x for an integer x ≥ 2, got {eps}"
        )));
    }
    Ok(eps.denom())
}

/// Sorts by increasing size and cuts into at most `1/ε²` groups of
/// `⌈n·ε²⌉` items, each rounded up to its largest member.
pub fn round_up_groups(large: &[Item], eps: Rational) -> Result<Vec<RoundedGroup>> {
    let inv = check_epsilon(eps)?;
    let groups = inv * inv;
    let mut sorted = large.to_vec();
    sorted.sort_by(|a, b| a.size.cmp(&b.size).then(a.id.cmp(&b.id)));
    if sorted.is_empty() {
        return Ok(Vec::new());
    }
    let per_group = (sorted.len() as u128).div_ceil(groups) as usize;
    Ok(sorted
        .chunks(per_group)
        .map(|chunk| RoundedGroup {
            rounded_size: chunk.last().expect("nonempty chunk").size,
            original_items: chunk.to_vec(),
            direction: RoundDirection::Up,
        })
        .collect())
}

/// Optimal packing of the rounded-up groups, mapped back to original items.
fn pack_rounded_up(groups: &[RoundedGroup], config: VlConfig) -> Result<Vec<Bin>> {
    // merge groups with equal rounded size into one class, largest first
    let mut classes: Vec<(Rational, Vec<Item>)> = Vec::new();
    for g in groups.iter().rev() {
        match classes.last_mut() {
            Some((size, items)) if *size == g.rounded_size => {
                items.extend(g.original_items.iter().cloned())
            }
            _ => classes.push((g.rounded_size, g.original_items.clone())),
        }
    }
    let sizes: Vec<Rational> = classes.iter().map(|c| c.0).collect();
    let counts: Vec<u32> = classes.iter().map(|c| c.1.len() as u32).collect();
    let configs = solve_classes(&sizes, &counts, config.node_budget)?;

    let mut pools: Vec<std::vec::IntoIter<Item>> =
        classes.into_iter().map(|c| c.1.into_iter()).collect();
    let bins = configs
        .iter()
        .enumerate()
        .map(|(id, cfg)| {
            let mut bin = Bin::new(id);
            for (class, &count) in cfg.iter().enumerate() {
                for _ in 0..count {
                    bin.push(pools[class].next().expect("class count matches"));
                }
            }
            bin
        })
        .collect();
    Ok(bins)
}

fn split_at_epsilon(items: &[Item], eps: Rational) -> (Vec<Item>, Vec<Item>) {
    items.iter().cloned().partition(|e| e.size >= eps)
}

fn large_phase(large: &[Item], eps: Rational, config: VlConfig) -> Result<Vec<Bin>> {
    let groups = round_up_groups(large, eps)?;
    pack_rounded_up(&groups, config)
}

/// Fewest bins for the rounded-up large items (exposed for checking the
/// rounding loss against an exact oracle).
pub fn rounded_up_opt(large: &[Item], eps: Rational, config: VlConfig) -> Result<usize> {
    Ok(large_phase(large, eps, config)?.len())
}

/// Colour-agnostic APTAS: round and solve the large items (≥ ε), then First
/// Fit the small ones into the remaining space.
pub fn vl_pack(items: &[Item], eps: Rational, config: VlConfig) -> Result<Packing> {
    check_epsilon(eps)?;
    items.iter().try_for_each(Item::check_size)?;
    let (large, small) = split_at_epsilon(items, eps);
    let mut bins = large_phase(&large, eps, config)?;
    first_fit_into(&mut bins, &small, None)?;
    Ok(Packing::new(bins, Provenance::new("vl", format!("eps={eps}"))))
}

/// Packs small items one colour at a time (ascending colour), each with
/// First Fit restricted to bins whose free space exceeds `2ε`.
pub fn pack_small_by_colour(packing: Packing, small_items: &[Item], eps: Rational) -> Result<Packing> {
    if let Some(e) = small_items.iter().find(|e| e.size >= eps) {
        return Err(Error::NotSmall {
            id: e.id,
            size: e.size,
            threshold: eps,
        });
    }
    let Packing {
        mut bins,
        provenance,
    } = packing;
    let threshold = eps.mul_int(2);
    let eligible = |b: &Bin| b.free() > threshold;
    let mut colours: Vec<_> = small_items.iter().map(|e| e.colour).collect();
    colours.sort_unstable();
    colours.dedup();
    for colour in colours {
        let group: Vec<Item> = small_items
            .iter()
            .filter(|e| e.colour == colour)
            .cloned()
            .collect();
        first_fit_into(&mut bins, &group, Some(&eligible))?;
    }
    Ok(Packing::new(bins, provenance))
}

/// The (1+ε, O(1/ε)) scheme.
pub fn offline_1plus_eps(instance: &Instance, eps: Rational, config: VlConfig) -> Result<Packing> {
    check_epsilon(eps)?;
    instance.validate()?;
    let (large, small) = split_at_epsilon(&instance.items, eps);
    let bins = large_phase(&large, eps, config)?;
    let packing = Packing::new(bins, Provenance::new("vl1eps", format!("eps={eps}")));
    pack_small_by_colour(packing, &small, eps)
}

/// Per-colour monochromatic APTAS packings, concatenated in ascending colour order.
pub fn per_colour_vl(instance: &Instance, eps: Rational, config: VlConfig) -> Result<Packing> {
    let mut bins = Vec::new();
    for colour in instance.colours() {
        let part = vl_pack(&instance.colour_items(colour), eps, config)?;
        for mut bin in part.bins {
            bin.id = bins.len();
            bins.push(bin);
        }
    }
    Ok(Packing::new(bins, Provenance::new("per_colour_vl", format!("eps={eps}"))))
}

/// The (1.7, 1+ε) scheme: per-colour APTAS, then replay every item in bin
/// order through Bounded Best Fit with two open bins.
pub fn offline_17_1plus_eps(instance: &Instance, eps: Rational, config: VlConfig) -> Result<Packing> {
    check_epsilon(eps)?;
    instance.validate()?;
    let staged = per_colour_vl(instance, eps, config)?;
    let mut packing = bounded_best_fit(&staged.items_in_bin_order(), Some(2), Vec::new())?;
    packing.provenance = Provenance::new("off17", format!("eps={eps}"));
    Ok(packing)
}

/// Colours in ascending order, each colour's items in arrival order, through
/// Bounded Best Fit with two open bins.
pub fn colour_ordered_bbf(instance: &Instance) -> Result<Packing> {
    instance.validate()?;
    let order: Vec<Item> = instance
        .colours()
        .flat_map(|c| instance.colour_items(c))
        .collect();
    let mut packing = bounded_best_fit(&order, Some(2), Vec::new())?;
    packing.provenance = Provenance::new("colour_bbf", "k=2");
    Ok(packing)
}
