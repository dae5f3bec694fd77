//! Feasibility checks for packings. Problems are collected, never thrown.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::model::{BinId, BinKind, Instance, ItemId, Packing};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Capacity { bin: BinId, load: Rational },
    Missing { item: ItemId },
    Duplicated { item: ItemId, count: usize },
    UnknownItem { bin: BinId, item: ItemId },
    /// The packed item's size or colour differs from the instance's.
    ItemMismatch { bin: BinId, item: ItemId },
    RegionMixedColour { bin: BinId, region: usize },
    RegionOverflow { bin: BinId, region: usize },
    /// Region bookkeeping disagrees with the bin's contents.
    RegionAccounting { bin: BinId, region: usize },
    /// A level bin item that sits in no region, or in more than one.
    RegionCoverage { bin: BinId, item: ItemId },
    MissingRegions { bin: BinId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Capacity { bin, load } => write!(f, "bin {bin} overfull (load {load})"),
            Violation::Missing { item } => write!(f, "item {item} is not packed"),
            Violation::Duplicated { item, count } => write!(f, "item {item} packed {count} times"),
            Violation::UnknownItem { bin, item } => {
                write!(f, "bin {bin} holds item {item} which is not in the instance")
            }
            Violation::ItemMismatch { bin, item } => {
                write!(f, "bin {bin} holds item {item} with altered size or colour")
            }
            Violation::RegionMixedColour { bin, region } => {
                write!(f, "bin {bin} region {region} mixes colours")
            }
            Violation::RegionOverflow { bin, region } => {
                write!(f, "bin {bin} region {region} exceeds its capacity")
            }
            Violation::RegionAccounting { bin, region } => {
                write!(f, "bin {bin} region {region} bookkeeping is inconsistent")
            }
            Violation::RegionCoverage { bin, item } => {
                write!(f, "bin {bin} item {item} is not in exactly one region")
            }
            Violation::MissingRegions { bin } => write!(f, "level bin {bin} has no regions"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "packing is feasible");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_packing(packing: &Packing, instance: &Instance) -> ValidationReport {
    let mut violations = Vec::new();
    let by_id = instance.index_by_id();
    let mut counts: BTreeMap<ItemId, usize> = BTreeMap::new();

    for bin in &packing.bins {
        let load: Rational = bin.items.iter().map(|e| e.size).sum();
        if load > Rational::ONE {
            violations.push(Violation::Capacity { bin: bin.id, load });
        }
        for item in &bin.items {
            *counts.entry(item.id).or_default() += 1;
            match by_id.get(&item.id) {
                None => violations.push(Violation::UnknownItem {
                    bin: bin.id,
                    item: item.id,
                }),
                Some(orig) if **orig != *item => violations.push(Violation::ItemMismatch {
                    bin: bin.id,
                    item: item.id,
                }),
                Some(_) => {}
            }
        }
        check_regions(bin, &mut violations);
    }

    for (&id, &count) in &counts {
        if count > 1 {
            violations.push(Violation::Duplicated { item: id, count });
        }
    }
    for item in &instance.items {
        if !counts.contains_key(&item.id) {
            violations.push(Violation::Missing { item: item.id });
        }
    }

    ValidationReport { violations }
}

fn check_regions(bin: &crate::model::Bin, violations: &mut Vec<Violation>) {
    let regions = match (&bin.kind, &bin.regions) {
        (BinKind::Level(_), Some(r)) => r,
        (BinKind::Level(_), None) => {
            violations.push(Violation::MissingRegions { bin: bin.id });
            return;
        }
        (_, None) => return,
        (_, Some(r)) => r,
    };
    let contents: HashMap<ItemId, &crate::model::Item> =
        bin.items.iter().map(|e| (e.id, e)).collect();
    let mut placed: HashMap<ItemId, usize> = HashMap::new();

    for (idx, region) in regions.iter().enumerate() {
        let mut used = Rational::ZERO;
        let mut accounting_ok = true;
        for id in &region.items {
            *placed.entry(*id).or_default() += 1;
            match contents.get(id) {
                Some(item) => {
                    used += item.size;
                    if region.colour != Some(item.colour) {
                        violations.push(Violation::RegionMixedColour {
                            bin: bin.id,
                            region: idx,
                        });
                    }
                }
                None => accounting_ok = false,
            }
        }
        if used != region.used || (region.items.is_empty() && region.colour.is_some()) {
            accounting_ok = false;
        }
        if !accounting_ok {
            violations.push(Violation::RegionAccounting {
                bin: bin.id,
                region: idx,
            });
        }
        if used > region.capacity {
            violations.push(Violation::RegionOverflow {
                bin: bin.id,
                region: idx,
            });
        }
    }
    for item in &bin.items {
        if placed.get(&item.id).copied().unwrap_or(0) != 1 {
            violations.push(Violation::RegionCoverage {
                bin: bin.id,
                item: item.id,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bin, Item, Provenance};

    fn r(n: u128, d: u128) -> Rational {
        Rational::frac(n, d)
    }

    fn packing_of(groups: &[&[&Item]]) -> Packing {
        let bins = groups
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let mut b = Bin::new(i);
                for e in *g {
                    b.push((*e).clone());
                }
                b
            })
            .collect();
        Packing::new(bins, Provenance::new("manual", ""))
    }

    #[test]
    fn exact_capacity_is_valid() {
        let inst = Instance::monochrome([r(1, 2), r(1, 2)]).unwrap();
        let p = packing_of(&[&[&inst.items[0], &inst.items[1]]]);
        assert!(validate_packing(&p, &inst).is_valid());
    }

    #[test]
    fn overfull_bin_is_reported() {
        let inst = Instance::monochrome([r(1, 2), r(2, 3)]).unwrap();
        let p = packing_of(&[&[&inst.items[0], &inst.items[1]]]);
        let report = validate_packing(&p, &inst);
        assert_eq!(
            report.violations,
            vec![Violation::Capacity {
                bin: 0,
                load: r(7, 6)
            }]
        );
    }

    #[test]
    fn missing_and_duplicated_items() {
        let inst = Instance::monochrome([r(1, 4), r(1, 4), r(1, 4), r(1, 4)]).unwrap();
        let it = &inst.items;
        let p = packing_of(&[&[&it[0], &it[1]], &[&it[2], &it[0]]]);
        let report = validate_packing(&p, &inst);
        assert!(report
            .violations
            .contains(&Violation::Missing { item: 3 }));
        assert!(report
            .violations
            .contains(&Violation::Duplicated { item: 0, count: 2 }));
    }

    #[test]
    fn altered_item_is_reported() {
        let inst = Instance::monochrome([r(1, 4)]).unwrap();
        let forged = Item {
            id: 0,
            size: r(1, 8),
            colour: 1,
        };
        let p = packing_of(&[&[&forged]]);
        assert_eq!(
            validate_packing(&p, &inst).violations,
            vec![Violation::ItemMismatch { bin: 0, item: 0 }]
        );
    }

    #[test]
    fn mixed_region_is_reported() {
        let inst = Instance::from_sizes(2, [(r(1, 8), 1), (r(1, 8), 2)]).unwrap();
        let mut bin = Bin::level(0, 1, r(1, 2), 2);
        bin.push_into_region(0, inst.items[0].clone());
        // Bypass the region API to forge a two-colour region.
        let forged = inst.items[1].clone();
        {
            let region = &mut bin.regions.as_mut().unwrap()[0];
            region.used += forged.size;
            region.items.push(forged.id);
        }
        bin.push(forged);
        let p = Packing::new(vec![bin], Provenance::default());
        let report = validate_packing(&p, &inst);
        assert_eq!(
            report.violations,
            vec![Violation::RegionMixedColour { bin: 0, region: 0 }]
        );
    }

    #[test]
    fn region_overflow_is_reported() {
        let inst = Instance::monochrome([r(1, 4), r(1, 8)]).unwrap();
        let mut bin = Bin::level(0, 1, r(1, 4), 4);
        bin.push_into_region(0, inst.items[0].clone());
        bin.push_into_region(0, inst.items[1].clone());
        let p = Packing::new(vec![bin], Provenance::default());
        assert_eq!(
            validate_packing(&p, &inst).violations,
            vec![Violation::RegionOverflow { bin: 0, region: 0 }]
        );
    }
}
