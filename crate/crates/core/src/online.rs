//! Online algorithms. Every algorithm sees one item at a time through
//! [`OnlineAlgorithm::pack`] and never moves an item once placed.
//!
//! The region schemes assume a minimum item size `ε = 1/2^j`. A level-`i`
//! bin (`1 ≤ i ≤ j`) is cut into `2^(j-i)` monochromatic regions of size
//! `2^i·ε`, and a colour holds at most one region per level. Once a colour
//! reaches level `j` its level-`j` bin becomes isolated and the colour
//! continues alone under Bounded Best Fit with two open bins.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classic::BoundedState;
use crate::error::{Error, Result};
use crate::model::{Bin, BinId, BinKind, Colour, Item, ItemId, Packing, Provenance};
use crate::rational::Rational;

/// Where one item went.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub item: ItemId,
    pub bin: BinId,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub region: Option<usize>,
    pub isolated: bool,
}

impl Placement {
    fn plain(item: ItemId, bin: BinId) -> Self {
        Placement {
            item,
            bin,
            level: None,
            region: None,
            isolated: false,
        }
    }
}

pub trait OnlineAlgorithm {
    fn name(&self) -> String;
    /// Forgets all packed items.
    fn reset(&mut self);
    fn pack(&mut self, item: &Item) -> Result<Placement>;
    fn snapshot(&self) -> Packing;
}

impl<A: OnlineAlgorithm + ?Sized> OnlineAlgorithm for Box<A> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn reset(&mut self) {
        (**self).reset()
    }
    fn pack(&mut self, item: &Item) -> Result<Placement> {
        (**self).pack(item)
    }
    fn snapshot(&self) -> Packing {
        (**self).snapshot()
    }
}

/// Feeds `items` in order; stops at the first rejected item.
pub fn run_online<A: OnlineAlgorithm + ?Sized>(
    alg: &mut A,
    items: &[Item],
) -> Result<(Packing, Vec<Placement>)> {
    let mut trace = Vec::with_capacity(items.len());
    for item in items {
        trace.push(alg.pack(item)?);
    }
    Ok((alg.snapshot(), trace))
}

fn provenance(name: String) -> Provenance {
    match name.split_once(' ') {
        Some((algo, params)) => Provenance::new(algo, params),
        None => Provenance::new(name, ""),
    }
}

/// First Fit over all bins ever opened.
#[derive(Debug, Clone, Default)]
pub struct FirstFitOnline {
    bins: Vec<Bin>,
}

impl FirstFitOnline {
    pub fn new() -> Self {
        Self::default()
    }
}

impl OnlineAlgorithm for FirstFitOnline {
    fn name(&self) -> String {
        "ff".into()
    }

    fn reset(&mut self) {
        self.bins.clear();
    }

    fn pack(&mut self, item: &Item) -> Result<Placement> {
        item.check_size()?;
        let idx = match self.bins.iter().position(|b| b.fits(item.size)) {
            Some(i) => i,
            None => {
                self.bins.push(Bin::new(self.bins.len()));
                self.bins.len() - 1
            }
        };
        self.bins[idx].push(item.clone());
        Ok(Placement::plain(item.id, idx))
    }

    fn snapshot(&self) -> Packing {
        Packing::new(self.bins.clone(), provenance(self.name()))
    }
}

/// Next Fit (`k = Some(1)`), Bounded Best Fit (`k = Some(n)`), or Best Fit (`k = None`).
#[derive(Debug, Clone)]
pub struct BestFitOnline {
    k: Option<usize>,
    state: BoundedState,
    next_id: BinId,
}

impl BestFitOnline {
    pub fn new(k: Option<usize>) -> Self {
        BestFitOnline {
            k,
            state: BoundedState::new(k, Vec::new()),
            next_id: 0,
        }
    }

    pub fn next_fit() -> Self {
        Self::new(Some(1))
    }
}

impl OnlineAlgorithm for BestFitOnline {
    fn name(&self) -> String {
        match self.k {
            Some(1) => "nf".into(),
            Some(k) => format!("bbf k={k}"),
            None => "bf".into(),
        }
    }

    fn reset(&mut self) {
        *self = Self::new(self.k);
    }

    fn pack(&mut self, item: &Item) -> Result<Placement> {
        let bin = self.state.pack(item.clone(), &mut self.next_id)?;
        Ok(Placement::plain(item.id, bin))
    }

    fn snapshot(&self) -> Packing {
        let mut bins: Vec<Bin> = self.state.bins().cloned().collect();
        bins.sort_by_key(|b| b.id);
        Packing::new(bins, provenance(self.name()))
    }
}

/// How a colour looks for room among the regions it already holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionRule {
    /// Only the region at the colour's highest level (MNF).
    NextFit,
    /// Every region of the colour, lowest level first (MFF).
    FirstFit,
}

/// Checks `ε = 1/2^j` with `j ≥ 1` and returns `j`.
pub fn level_count(eps: Rational) -> Result<u32> {
    let d = eps.denom();
    if eps.numer() != 1 || d < 2 || !d.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "ε must be 1/2^j for an integer j ≥ 1, got {eps}"
        )));
    }
    Ok(d.trailing_zeros())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct RegionRef {
    level: u32,
    bin: BinId,
    region: usize,
}

/// Region-based packing of non-isolated bins, optionally followed by
/// per-colour Bounded Best Fit once a colour reaches the top level.
#[derive(Debug, Clone)]
pub struct LevelScheme {
    eps: Rational,
    j: u32,
    rule: RegionRule,
    isolate: bool,
    shared: BTreeMap<BinId, Bin>,
    /// The one level-`i` bin that still has unclaimed regions, per level.
    open_level_bin: BTreeMap<u32, BinId>,
    regions: BTreeMap<Colour, Vec<RegionRef>>,
    isolated: BTreeMap<Colour, BoundedState>,
    next_id: BinId,
}

impl LevelScheme {
    pub fn new(eps: Rational, rule: RegionRule, isolate: bool) -> Result<Self> {
        let j = level_count(eps)?;
        Ok(LevelScheme {
            eps,
            j,
            rule,
            isolate,
            shared: BTreeMap::new(),
            open_level_bin: BTreeMap::new(),
            regions: BTreeMap::new(),
            isolated: BTreeMap::new(),
            next_id: 0,
        })
    }

    /// The (3, 1.7) scheme: MNF in shared bins, then isolation.
    pub fn three_seventeen(eps: Rational) -> Result<Self> {
        Self::new(eps, RegionRule::NextFit, true)
    }

    pub fn levels(&self) -> u32 {
        self.j
    }

    pub fn region_capacity(&self, level: u32) -> Rational {
        self.eps.mul_int(1u128 << level)
    }

    fn regions_per_bin(&self, level: u32) -> usize {
        1usize << (self.j - level)
    }

    /// The colour's current (highest) level, if it has any region.
    pub fn colour_level(&self, colour: Colour) -> Option<u32> {
        if self.isolated.contains_key(&colour) {
            return Some(self.j);
        }
        self.regions
            .get(&colour)
            .and_then(|rs| rs.last())
            .map(|r| r.level)
    }

    pub fn is_isolated(&self, colour: Colour) -> bool {
        self.isolated.contains_key(&colour)
    }

    fn check_item(&self, item: &Item) -> Result<()> {
        item.check_size()?;
        if item.size < self.eps {
            return Err(Error::BelowMinimumSize {
                id: item.id,
                size: item.size,
                epsilon: self.eps,
            });
        }
        Ok(())
    }

    fn region_fits(&self, r: &RegionRef, size: Rational) -> bool {
        self.shared[&r.bin].regions.as_ref().expect("level bin")[r.region].fits(size)
    }

    fn claim_region(&mut self, level: u32) -> RegionRef {
        let bin_id = match self.open_level_bin.get(&level) {
            Some(&id) => id,
            None => {
                let id = self.next_id;
                self.next_id += 1;
                let bin = Bin::level(
                    id,
                    level,
                    self.region_capacity(level),
                    self.regions_per_bin(level),
                );
                self.shared.insert(id, bin);
                self.open_level_bin.insert(level, id);
                id
            }
        };
        let regions = self.shared[&bin_id].regions.as_ref().expect("level bin");
        let region = regions
            .iter()
            .position(|r| r.colour.is_none())
            .expect("open level bin has a free region");
        if region + 1 == regions.len() {
            self.open_level_bin.remove(&level);
        }
        RegionRef {
            level,
            bin: bin_id,
            region,
        }
    }

    /// One step of MNF/MFF for a colour that is not isolated.
    pub fn mnf_pack(&mut self, item: &Item) -> Result<Placement> {
        self.check_item(item)?;
        if self.isolated.contains_key(&item.colour) {
            return Err(Error::ColourIsolated(item.colour));
        }
        Ok(self.place_in_regions(item))
    }

    /// The region rule proper; sizes are not checked against ε.
    fn place_in_regions(&mut self, item: &Item) -> Placement {
        let held = self.regions.get(&item.colour).cloned().unwrap_or_default();
        let existing = match self.rule {
            RegionRule::NextFit => held.last().filter(|r| self.region_fits(r, item.size)).copied(),
            RegionRule::FirstFit => held.iter().find(|r| self.region_fits(r, item.size)).copied(),
        };
        let target = match existing {
            Some(r) => r,
            None => {
                let floor = held.last().map_or(1, |r| r.level + 1);
                let level = (floor..=self.j)
                    .find(|&l| self.region_capacity(l) >= item.size)
                    .unwrap_or(self.j);
                let r = self.claim_region(level);
                self.regions.entry(item.colour).or_default().push(r);
                r
            }
        };
        self.shared
            .get_mut(&target.bin)
            .expect("region bin exists")
            .push_into_region(target.region, item.clone());

        let isolated = self.isolate && target.level == self.j;
        if isolated {
            self.isolate_colour(item.colour, target.bin);
        }
        Placement {
            item: item.id,
            bin: target.bin,
            level: Some(target.level),
            region: Some(target.region),
            isolated,
        }
    }

    fn isolate_colour(&mut self, colour: Colour, bin_id: BinId) {
        let mut bin = self.shared.remove(&bin_id).expect("top-level bin");
        bin.kind = BinKind::Isolated;
        bin.regions = None;
        self.isolated
            .insert(colour, BoundedState::new(Some(2), vec![bin]));
    }

    fn pack_isolated(&mut self, item: &Item) -> Result<Placement> {
        let state = self
            .isolated
            .get_mut(&item.colour)
            .expect("colour is isolated");
        let bin = state.pack(item.clone(), &mut self.next_id)?;
        for b in state.open_bins.iter_mut() {
            b.kind = BinKind::Isolated;
        }
        Ok(Placement {
            item: item.id,
            bin,
            level: None,
            region: None,
            isolated: true,
        })
    }
}

impl OnlineAlgorithm for LevelScheme {
    fn name(&self) -> String {
        let algo = match (self.isolate, self.rule) {
            (true, RegionRule::NextFit) => "level17",
            (true, RegionRule::FirstFit) => "level17_mff",
            (false, RegionRule::NextFit) => "mnf",
            (false, RegionRule::FirstFit) => "mff",
        };
        format!("{algo} eps={}", self.eps)
    }

    fn reset(&mut self) {
        *self = LevelScheme::new(self.eps, self.rule, self.isolate).expect("validated ε");
    }

    fn pack(&mut self, item: &Item) -> Result<Placement> {
        self.check_item(item)?;
        if self.isolated.contains_key(&item.colour) {
            self.pack_isolated(item)
        } else {
            self.mnf_pack(item)
        }
    }

    fn snapshot(&self) -> Packing {
        let mut bins: Vec<Bin> = self.shared.values().cloned().collect();
        for state in self.isolated.values() {
            bins.extend(state.bins().cloned());
        }
        bins.sort_by_key(|b| b.id);
        Packing::new(bins, provenance(self.name()))
    }
}

/// The (2+ε, 1.7) scheme: shared First Fit while a colour's shared weight
/// `w(c)` is at most `g = 1/ε`, then First Fit in the colour's own bins.
#[derive(Debug, Clone)]
pub struct ThresholdScheme {
    eps: Rational,
    g: Rational,
    shared: Vec<Bin>,
    isolated: BTreeMap<Colour, Vec<Bin>>,
    weight: BTreeMap<Colour, Rational>,
    next_id: BinId,
}

impl ThresholdScheme {
    pub fn new(eps: Rational) -> Result<Self> {
        if eps.is_zero() || eps > Rational::ONE {
            return Err(Error::InvalidParameter(format!(
                "ε must lie in (0, 1], got {eps}"
            )));
        }
        Ok(ThresholdScheme {
            eps,
            g: eps.recip()?,
            shared: Vec::new(),
            isolated: BTreeMap::new(),
            weight: BTreeMap::new(),
            next_id: 0,
        })
    }

    /// Shared weight accumulated so far by a colour.
    pub fn weight(&self, colour: Colour) -> Rational {
        self.weight.get(&colour).copied().unwrap_or(Rational::ZERO)
    }

    fn first_fit(bins: &mut Vec<Bin>, next_id: &mut BinId, item: &Item, kind: BinKind) -> BinId {
        if let Some(b) = bins.iter_mut().find(|b| b.fits(item.size)) {
            b.push(item.clone());
            return b.id;
        }
        let mut bin = Bin::with_kind(*next_id, kind);
        *next_id += 1;
        bin.push(item.clone());
        let id = bin.id;
        bins.push(bin);
        id
    }
}

impl OnlineAlgorithm for ThresholdScheme {
    fn name(&self) -> String {
        format!("threshold eps={}", self.eps)
    }

    fn reset(&mut self) {
        *self = ThresholdScheme::new(self.eps).expect("validated ε");
    }

    fn pack(&mut self, item: &Item) -> Result<Placement> {
        item.check_size()?;
        if item.size < self.eps {
            return Err(Error::BelowMinimumSize {
                id: item.id,
                size: item.size,
                epsilon: self.eps,
            });
        }
        let w = self.weight.entry(item.colour).or_insert(Rational::ZERO);
        if *w <= self.g {
            *w += item.size;
            let bin = Self::first_fit(&mut self.shared, &mut self.next_id, item, BinKind::Plain);
            Ok(Placement::plain(item.id, bin))
        } else {
            let pool = self.isolated.entry(item.colour).or_default();
            let bin = Self::first_fit(pool, &mut self.next_id, item, BinKind::Isolated);
            Ok(Placement {
                isolated: true,
                ..Placement::plain(item.id, bin)
            })
        }
    }

    fn snapshot(&self) -> Packing {
        let mut bins = self.shared.clone();
        for pool in self.isolated.values() {
            bins.extend(pool.iter().cloned());
        }
        bins.sort_by_key(|b| b.id);
        Packing::new(bins, provenance(self.name()))
    }
}

/// Region-level statistics of a finished level-scheme run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LevelAudit {
    /// Non-isolated bins with every region in use.
    pub full_bins: usize,
    /// Total item size in those bins.
    pub full_fill: Rational,
    /// Per level, bins with at least one unused region.
    pub partial_bins: BTreeMap<u32, usize>,
    /// Largest number of non-isolated bins any single colour touches.
    pub max_colour_shared_bins: usize,
    /// Largest number of level-`i` bins any colour touches at one level.
    pub max_colour_bins_per_level: usize,
}

impl LevelAudit {
    /// `full_fill / full_bins >= 1/3` (vacuous with no full bins).
    pub fn average_fill_at_least_third(&self) -> bool {
        self.full_fill.mul_int(3) >= Rational::integer(self.full_bins as u128)
    }
}

pub fn audit_levels(packing: &Packing) -> LevelAudit {
    let mut audit = LevelAudit::default();
    let mut per_colour: BTreeMap<Colour, BTreeMap<u32, Vec<BinId>>> = BTreeMap::new();
    for bin in &packing.bins {
        let (BinKind::Level(level), Some(regions)) = (bin.kind, &bin.regions) else {
            continue;
        };
        if regions.iter().all(|r| r.is_used()) {
            audit.full_bins += 1;
            audit.full_fill += bin.load();
        } else {
            *audit.partial_bins.entry(level).or_default() += 1;
        }
        for r in regions {
            if let Some(c) = r.colour {
                let bins = per_colour.entry(c).or_default().entry(level).or_default();
                if !bins.contains(&bin.id) {
                    bins.push(bin.id);
                }
            }
        }
    }
    for levels in per_colour.values() {
        let total: usize = levels.values().map(Vec::len).sum();
        audit.max_colour_shared_bins = audit.max_colour_shared_bins.max(total);
        let per_level = levels.values().map(Vec::len).max().unwrap_or(0);
        audit.max_colour_bins_per_level = audit.max_colour_bins_per_level.max(per_level);
    }
    audit
}
