//! Items, instances, bins and packings.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type ItemId = usize;
pub type BinId = usize;
pub type Colour = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    pub size: Rational,
    pub colour: Colour,
}

impl Item {
    pub fn new(id: ItemId, size: Rational, colour: Colour) -> Result<Self> {
        let item = Item { id, size, colour };
        item.check_size()?;
        Ok(item)
    }

    /// Errors unless `0 < size <= 1`.
    pub fn check_size(&self) -> Result<()> {
        if self.size.is_zero() || self.size > Rational::ONE {
            return Err(Error::ItemSize {
                id: self.id,
                size: self.size,
            });
        }
        Ok(())
    }
}

/// An ordered sequence of coloured items. The order is the online arrival order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub m: u32,
    pub items: Vec<Item>,
}

impl Instance {
    pub fn new(m: u32, items: Vec<Item>) -> Result<Self> {
        let inst = Instance { m, items };
        inst.validate()?;
        Ok(inst)
    }

    /// Builds an instance from `(size, colour)` pairs, numbering items from 0.
    pub fn from_sizes(m: u32, items: impl IntoIterator<Item = (Rational, Colour)>) -> Result<Self> {
        let items = items
            .into_iter()
            .enumerate()
            .map(|(id, (size, colour))| Item { id, size, colour })
            .collect();
        Self::new(m, items)
    }

    /// A single-colour instance from sizes alone.
    pub fn monochrome(sizes: impl IntoIterator<Item = Rational>) -> Result<Self> {
        Self::from_sizes(1, sizes.into_iter().map(|s| (s, 1)))
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.items.len());
        for item in &self.items {
            item.check_size()?;
            if item.colour == 0 || item.colour > self.m {
                return Err(Error::InvalidInstance(format!(
                    "item {} has colour {} outside 1..={}",
                    item.id, item.colour, self.m
                )));
            }
            if !seen.insert(item.id) {
                return Err(Error::InvalidInstance(format!(
                    "duplicate item id {}",
                    item.id
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn colours(&self) -> impl Iterator<Item = Colour> {
        1..=self.m
    }

    pub fn check_colour(&self, colour: Colour) -> Result<()> {
        if colour == 0 || colour > self.m {
            return Err(Error::UnknownColour(colour));
        }
        Ok(())
    }

    /// Items of one colour, in arrival order.
    pub fn colour_items(&self, colour: Colour) -> Vec<Item> {
        self.items
            .iter()
            .filter(|e| e.colour == colour)
            .cloned()
            .collect()
    }

    pub fn total_size(&self) -> Rational {
        self.items.iter().map(|e| e.size).sum()
    }

    /// `⌈Σ s(e)⌉`, the weight lower bound on OPT(I).
    pub fn weight_bound(&self) -> usize {
        self.total_size().ceil() as usize
    }

    pub fn colour_weight_bound(&self, colour: Colour) -> usize {
        self.items
            .iter()
            .filter(|e| e.colour == colour)
            .map(|e| e.size)
            .sum::<Rational>()
            .ceil() as usize
    }

    pub fn index_by_id(&self) -> BTreeMap<ItemId, &Item> {
        self.items.iter().map(|e| (e.id, e)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinKind {
    Plain,
    /// A shared bin cut into equal monochromatic regions of size `2^level · ε`.
    Level(u32),
    /// A bin reserved for a single colour.
    Isolated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub capacity: Rational,
    pub colour: Option<Colour>,
    pub used: Rational,
    pub items: Vec<ItemId>,
}

impl Region {
    pub fn empty(capacity: Rational) -> Self {
        Region {
            capacity,
            colour: None,
            used: Rational::ZERO,
            items: Vec::new(),
        }
    }

    pub fn is_used(&self) -> bool {
        !self.items.is_empty()
    }

    pub fn fits(&self, size: Rational) -> bool {
        self.used + size <= self.capacity
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bin {
    pub id: BinId,
    pub items: Vec<Item>,
    pub kind: BinKind,
    pub regions: Option<Vec<Region>>,
    pub open: bool,
    load: Rational,
}

impl Bin {
    pub fn new(id: BinId) -> Self {
        Bin {
            id,
            items: Vec::new(),
            kind: BinKind::Plain,
            regions: None,
            open: true,
            load: Rational::ZERO,
        }
    }

    pub fn with_kind(id: BinId, kind: BinKind) -> Self {
        Bin {
            kind,
            ..Bin::new(id)
        }
    }

    /// A level bin with `count` regions of `capacity` each.
    pub fn level(id: BinId, level: u32, capacity: Rational, count: usize) -> Self {
        Bin {
            kind: BinKind::Level(level),
            regions: Some(vec![Region::empty(capacity); count]),
            ..Bin::new(id)
        }
    }

    pub fn load(&self) -> Rational {
        self.load
    }

    pub fn free(&self) -> Rational {
        Rational::ONE.saturating_sub(self.load)
    }

    pub fn fits(&self, size: Rational) -> bool {
        self.load + size <= Rational::ONE
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, item: Item) {
        self.load += item.size;
        self.items.push(item);
    }

    /// Places an item inside region `region` of a level bin.
    pub fn push_into_region(&mut self, region: usize, item: Item) {
        let regions = self.regions.as_mut().expect("not a level bin");
        let r = &mut regions[region];
        debug_assert!(r.colour.is_none() || r.colour == Some(item.colour));
        r.colour = Some(item.colour);
        r.used += item.size;
        r.items.push(item.id);
        self.push(item);
    }

    pub fn contains_colour(&self, colour: Colour) -> bool {
        self.items.iter().any(|e| e.colour == colour)
    }

    /// Rebuilds the cached load after external edits to `items`.
    pub fn recompute_load(&mut self) {
        self.load = self.items.iter().map(|e| e.size).sum();
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub algorithm: String,
    pub params: String,
}

impl Provenance {
    pub fn new(algorithm: impl Into<String>, params: impl Into<String>) -> Self {
        Provenance {
            algorithm: algorithm.into(),
            params: params.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Packing {
    pub bins: Vec<Bin>,
    pub provenance: Provenance,
}

impl Packing {
    pub fn new(bins: Vec<Bin>, provenance: Provenance) -> Self {
        Packing { bins, provenance }
    }

    /// Number of bins holding at least one item.
    pub fn total_bins(&self) -> usize {
        self.bins.iter().filter(|b| !b.is_empty()).count()
    }

    pub fn items(&self) -> impl Iterator<Item = &Item> {
        self.bins.iter().flat_map(|b| b.items.iter())
    }

    pub fn item_count(&self) -> usize {
        self.bins.iter().map(|b| b.items.len()).sum()
    }

    /// Drops empty bins and renumbers the rest in order.
    pub fn compact(mut self) -> Self {
        self.bins.retain(|b| !b.is_empty());
        for (i, b) in self.bins.iter_mut().enumerate() {
            b.id = i;
        }
        self
    }

    /// Items in bin order, then in-bin order.
    pub fn items_in_bin_order(&self) -> Vec<Item> {
        self.items().cloned().collect()
    }
}
