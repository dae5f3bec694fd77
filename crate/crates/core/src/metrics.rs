//! Bin stretch and colour stretch of a packing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Colour, Instance, Packing};
use crate::oracle::{instance_digest, OracleResult};
use crate::rational::Rational;

/// Where the OPT values in a [`StretchReport`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptSource {
    ExactOracle,
    WeightLowerBound,
}

impl OptSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            OptSource::ExactOracle => "exact_oracle",
            OptSource::WeightLowerBound => "weight_lower_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StretchReport {
    pub total_bins: usize,
    pub per_colour_span: BTreeMap<Colour, usize>,
    pub opt_bins: usize,
    pub per_colour_opt: BTreeMap<Colour, usize>,
    pub bin_stretch: Rational,
    pub colour_stretch: Rational,
    pub opt_source: OptSource,
}

impl StretchReport {
    /// `span / max(1, OPT(I_c))` for one colour.
    pub fn colour_ratio(&self, colour: Colour) -> Rational {
        let span = self.per_colour_span.get(&colour).copied().unwrap_or(0);
        let opt = self.per_colour_opt.get(&colour).copied().unwrap_or(0).max(1);
        Rational::frac(span as u128, opt as u128)
    }
}

/// Number of bins holding at least one item of `colour`.
pub fn bins_spanned(packing: &Packing, instance: &Instance, colour: Colour) -> Result<usize> {
    instance.check_colour(colour)?;
    Ok(span_of(packing, colour))
}

pub(crate) fn span_of(packing: &Packing, colour: Colour) -> usize {
    packing
        .bins
        .iter()
        .filter(|b| b.contains_colour(colour))
        .count()
}

pub fn colour_spans(packing: &Packing, m: u32) -> BTreeMap<Colour, usize> {
    let mut spans: BTreeMap<Colour, usize> = (1..=m).map(|c| (c, 0)).collect();
    for bin in &packing.bins {
        let mut seen: Vec<Colour> = bin.items.iter().map(|e| e.colour).collect();
        seen.sort_unstable();
        seen.dedup();
        for c in seen {
            *spans.entry(c).or_default() += 1;
        }
    }
    spans
}

/// Measures a packing. Without an oracle the weight bounds `⌈Σ s⌉` stand in
/// for OPT and the report says so.
pub fn compute_stretch(
    packing: &Packing,
    instance: &Instance,
    oracle: Option<&OracleResult>,
) -> Result<StretchReport> {
    let total_bins = packing.total_bins();
    let per_colour_span = colour_spans(packing, instance.m);

    let (opt_bins, per_colour_opt, opt_source) = match oracle {
        Some(o) => {
            let digest = instance_digest(instance);
            if o.instance_digest != digest {
                return Err(Error::OracleMismatch(format!(
                    "digest {} != {}",
                    o.instance_digest, digest
                )));
            }
            (o.opt_bins, o.per_colour_opt.clone(), OptSource::ExactOracle)
        }
        None => (
            instance.weight_bound(),
            instance
                .colours()
                .map(|c| (c, instance.colour_weight_bound(c)))
                .collect(),
            OptSource::WeightLowerBound,
        ),
    };

    let bin_stretch = if opt_bins == 0 {
        Rational::integer(total_bins as u128)
    } else {
        Rational::frac(total_bins as u128, opt_bins as u128)
    };
    let colour_stretch = per_colour_span
        .iter()
        .map(|(c, &span)| {
            let opt = per_colour_opt.get(c).copied().unwrap_or(0).max(1);
            Rational::frac(span as u128, opt as u128)
        })
        .max()
        .unwrap_or(Rational::ZERO);

    Ok(StretchReport {
        total_bins,
        per_colour_span,
        opt_bins,
        per_colour_opt,
        bin_stretch,
        colour_stretch,
        opt_source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bin, Provenance};

    fn r(n: u128, d: u128) -> Rational {
        Rational::frac(n, d)
    }

    fn pack(inst: &Instance, groups: &[&[usize]]) -> Packing {
        let bins = groups
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let mut b = Bin::new(i);
                for &idx in *g {
                    b.push(inst.items[idx].clone());
                }
                b
            })
            .collect();
        Packing::new(bins, Provenance::default())
    }

    #[test]
    fn spanned_counts_distinct_bins() {
        // colour 1 appears in bins 1, 4 and 4 again
        let inst = Instance::from_sizes(
            2,
            [(r(1, 4), 2), (r(1, 4), 1), (r(1, 4), 2), (r(1, 4), 2), (r(1, 4), 1), (r(1, 4), 1)],
        )
        .unwrap();
        let p = pack(&inst, &[&[0], &[1], &[2], &[3], &[4, 5]]);
        assert_eq!(bins_spanned(&p, &inst, 1).unwrap(), 2);
        assert_eq!(bins_spanned(&p, &inst, 2).unwrap(), 3);
        assert!(matches!(
            bins_spanned(&p, &inst, 3),
            Err(Error::UnknownColour(3))
        ));
    }

    #[test]
    fn absent_colour_spans_nothing() {
        let inst = Instance::from_sizes(2, [(r(1, 2), 1)]).unwrap();
        let p = pack(&inst, &[&[0]]);
        assert_eq!(bins_spanned(&p, &inst, 2).unwrap(), 0);
    }

    #[test]
    fn optimal_packing_has_unit_stretch() {
        let inst = Instance::from_sizes(
            2,
            [(r(1, 2), 1), (r(1, 2), 1), (r(1, 2), 2), (r(1, 2), 2)],
        )
        .unwrap();
        let p = pack(&inst, &[&[0, 1], &[2, 3]]);
        let rep = compute_stretch(&p, &inst, None).unwrap();
        assert_eq!(rep.total_bins, 2);
        assert_eq!(rep.bin_stretch, Rational::ONE);
        assert_eq!(rep.colour_stretch, Rational::ONE);
        assert_eq!(rep.opt_source, OptSource::WeightLowerBound);
    }

    #[test]
    fn colour_ratio_three_over_two() {
        // colour 1 has weight 2 (OPT 2) but spans 3 bins
        let inst = Instance::from_sizes(
            1,
            [(r(1, 2), 1), (r(1, 2), 1), (r(1, 2), 1), (r(1, 2), 1)],
        )
        .unwrap();
        let p = pack(&inst, &[&[0, 1], &[2], &[3]]);
        let rep = compute_stretch(&p, &inst, None).unwrap();
        assert_eq!(rep.colour_stretch, r(3, 2));
        assert_eq!(rep.colour_ratio(1), r(3, 2));
    }
}
