//! Classical one-dimensional heuristics: Next Fit, First Fit, First Fit
//! Decreasing, Best Fit and Bounded Best Fit.

use crate::error::Result;
use crate::model::{Bin, BinId, Item, Packing, Provenance};

fn check_items(items: &[Item]) -> Result<()> {
    items.iter().try_for_each(Item::check_size)
}

pub fn next_fit(items: &[Item]) -> Result<Packing> {
    let mut state = BoundedState::new(Some(1), Vec::new());
    let mut next_id = 0;
    for item in items {
        state.pack(item.clone(), &mut next_id)?;
    }
    Ok(Packing::new(state.into_bins(), Provenance::new("nf", "")))
}

/// Filter deciding which existing bins First Fit may use.
pub type Eligibility<'a> = &'a dyn Fn(&Bin) -> bool;

/// First Fit into an existing bin list, appending new bins as needed.
///
/// A freshly opened bin always receives the item that opened it, whatever
/// `eligible` says about it afterwards.
pub fn first_fit_into(
    bins: &mut Vec<Bin>,
    items: &[Item],
    eligible: Option<Eligibility<'_>>,
) -> Result<()> {
    check_items(items)?;
    for item in items {
        let slot = bins
            .iter()
            .position(|b| b.open && eligible.is_none_or(|f| f(b)) && b.fits(item.size));
        match slot {
            Some(i) => bins[i].push(item.clone()),
            None => {
                let id = bins.iter().map(|b| b.id + 1).max().unwrap_or(0);
                let mut bin = Bin::new(id);
                bin.push(item.clone());
                bins.push(bin);
            }
        }
    }
    Ok(())
}

pub fn first_fit(items: &[Item], eligible: Option<Eligibility<'_>>) -> Result<Packing> {
    let mut bins = Vec::new();
    first_fit_into(&mut bins, items, eligible)?;
    Ok(Packing::new(bins, Provenance::new("ff", "")))
}

pub fn first_fit_decreasing(items: &[Item]) -> Result<Packing> {
    let mut sorted = items.to_vec();
    // stable: equal sizes keep input order
    sorted.sort_by_key(|e| std::cmp::Reverse(e.size));
    let mut packing = first_fit(&sorted, None)?;
    packing.provenance = Provenance::new("ffd", "");
    Ok(packing)
}

pub fn best_fit(items: &[Item]) -> Result<Packing> {
    let mut packing = bounded_best_fit(items, None, Vec::new())?;
    packing.provenance = Provenance::new("bf", "");
    Ok(packing)
}

/// Best Fit over at most `k` open bins (`None` = unbounded).
///
/// An item goes to the fullest open bin that can take it, ties to the lowest
/// id. When none can, a new bin is opened; if `k` bins are already open the
/// fullest of them is closed first. `initial_open` bins count against `k`
/// and keep their ids; new bins are numbered after them.
pub fn bounded_best_fit(
    items: &[Item],
    k: Option<usize>,
    initial_open: Vec<Bin>,
) -> Result<Packing> {
    check_items(items)?;
    let mut next_id = initial_open.iter().map(|b| b.id + 1).max().unwrap_or(0);
    let mut state = BoundedState::new(k, initial_open);
    for item in items {
        state.pack(item.clone(), &mut next_id)?;
    }
    let params = match k {
        Some(k) => format!("k={k}"),
        None => "k=inf".to_string(),
    };
    Ok(Packing::new(state.into_bins(), Provenance::new("bbf", params)))
}

/// Replays a packing's items, bin by bin, through Bounded Best Fit.
pub fn replay_bbf(packing: &Packing, k: usize, initial_open: Vec<Bin>) -> Result<Packing> {
    bounded_best_fit(&packing.items_in_bin_order(), Some(k), initial_open)
}

/// Bounded Best Fit as a resumable state machine.
#[derive(Debug, Clone)]
pub struct BoundedState {
    pub open_bins: Vec<Bin>,
    pub closed_bins: Vec<Bin>,
    pub k: Option<usize>,
}

impl BoundedState {
    pub fn new(k: Option<usize>, initial_open: Vec<Bin>) -> Self {
        if let Some(k) = k {
            assert!(k >= 1, "k must be at least 1");
            assert!(
                initial_open.len() <= k,
                "{} pre-opened bins exceed k = {k}",
                initial_open.len()
            );
        }
        let open_bins = initial_open
            .into_iter()
            .map(|mut b| {
                b.open = true;
                b
            })
            .collect();
        BoundedState {
            open_bins,
            closed_bins: Vec::new(),
            k,
        }
    }

    /// Packs one item, drawing fresh bin ids from `next_id`. Returns the bin used.
    pub fn pack(&mut self, item: Item, next_id: &mut BinId) -> Result<BinId> {
        item.check_size()?;
        if let Some(i) = fullest(&self.open_bins, |b| b.fits(item.size)) {
            let bin = &mut self.open_bins[i];
            bin.push(item);
            return Ok(bin.id);
        }
        if self.k.is_some_and(|k| self.open_bins.len() >= k) {
            let i = fullest(&self.open_bins, |_| true).expect("k >= 1 open bins");
            let mut closed = self.open_bins.remove(i);
            closed.open = false;
            self.closed_bins.push(closed);
        }
        let mut bin = Bin::new(*next_id);
        *next_id += 1;
        let id = bin.id;
        bin.push(item);
        self.open_bins.push(bin);
        Ok(id)
    }

    pub fn bins(&self) -> impl Iterator<Item = &Bin> {
        self.closed_bins.iter().chain(self.open_bins.iter())
    }

    /// All bins ordered by id.
    pub fn into_bins(self) -> Vec<Bin> {
        let mut bins: Vec<Bin> = self.closed_bins.into_iter().chain(self.open_bins).collect();
        bins.sort_by_key(|b| b.id);
        bins
    }
}

/// Index of the fullest bin passing `filter`, lowest id on ties.
fn fullest(bins: &[Bin], filter: impl Fn(&Bin) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, b) in bins.iter().enumerate() {
        if !filter(b) {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(j) => {
                let cur = &bins[j];
                if b.load() > cur.load() || (b.load() == cur.load() && b.id < cur.id) {
                    Some(i)
                } else {
                    Some(j)
                }
            }
        };
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Instance;
    use crate::rational::Rational;
    use crate::validate::validate_packing;

    fn items(sizes: &[&str]) -> Vec<Item> {
        Instance::monochrome(sizes.iter().map(|s| s.parse::<Rational>().unwrap()))
            .unwrap()
            .items
    }

    fn shape(p: &Packing) -> Vec<Vec<String>> {
        p.bins
            .iter()
            .filter(|b| !b.is_empty())
            .map(|b| b.items.iter().map(|e| e.size.to_string()).collect())
            .collect()
    }

    #[test]
    fn next_fit_trace() {
        let p = next_fit(&items(&["0.6", "0.5", "0.4"])).unwrap();
        assert_eq!(shape(&p), vec![vec!["3/5"], vec!["1/2", "2/5"]]);
        assert_eq!(next_fit(&items(&["1", "1"])).unwrap().total_bins(), 2);
        assert_eq!(next_fit(&[]).unwrap().total_bins(), 0);
    }

    #[test]
    fn oversize_item_is_rejected() {
        let bad = vec![Item {
            id: 0,
            size: Rational::frac(3, 2),
            colour: 1,
        }];
        assert!(next_fit(&bad).is_err());
        assert!(first_fit(&bad, None).is_err());
        assert!(first_fit_decreasing(&bad).is_err());
        assert!(bounded_best_fit(&bad, Some(2), vec![]).is_err());
    }

    #[test]
    fn first_fit_trace() {
        let p = first_fit(&items(&["0.6", "0.5", "0.4"]), None).unwrap();
        assert_eq!(shape(&p), vec![vec!["3/5", "2/5"], vec!["1/2"]]);
        let p = first_fit(&items(&["0.5", "0.5", "0.5", "0.5"]), None).unwrap();
        assert_eq!(p.total_bins(), 2);
    }

    #[test]
    fn first_fit_respects_eligibility() {
        let eps = Rational::frac(1, 5);
        let inst = Instance::monochrome(
            ["0.7", "0.5", "0.25"].iter().map(|s| s.parse().unwrap()),
        )
        .unwrap();
        let mut bins = vec![Bin::new(0), Bin::new(1)];
        bins[0].push(inst.items[0].clone());
        bins[1].push(inst.items[1].clone());
        let rule = |b: &Bin| b.free() > eps.mul_int(2);
        first_fit_into(&mut bins, &inst.items[2..], Some(&rule)).unwrap();
        assert_eq!(bins.len(), 2);
        assert_eq!(bins[1].items.len(), 2);
        assert_eq!(bins[0].items.len(), 1);
    }

    #[test]
    fn ffd_traces() {
        let p = first_fit_decreasing(&items(&["0.4", "0.6", "0.5"])).unwrap();
        assert_eq!(shape(&p), vec![vec!["3/5", "2/5"], vec!["1/2"]]);
        let p = first_fit_decreasing(&items(&["0.3"; 10])).unwrap();
        assert_eq!(p.total_bins(), 4);
        assert_eq!(first_fit_decreasing(&[]).unwrap().total_bins(), 0);
    }

    #[test]
    fn bounded_best_fit_trace() {
        let p = bounded_best_fit(&items(&["0.5", "0.6", "0.5", "0.4"]), Some(2), vec![]).unwrap();
        assert_eq!(
            shape(&p),
            vec![vec!["1/2", "1/2"], vec!["3/5", "2/5"]]
        );
    }

    #[test]
    fn bbf_closes_fullest_when_nothing_fits() {
        // open: {0.7} and {0.4}; 0.65 fits neither, so the 0.7 bin closes
        let its = items(&["0.7", "0.4", "0.65", "0.2"]);
        let mut next = 0;
        let mut st = BoundedState::new(Some(2), vec![]);
        for e in &its[..3] {
            st.pack(e.clone(), &mut next).unwrap();
        }
        assert_eq!(st.closed_bins.len(), 1);
        assert_eq!(st.closed_bins[0].id, 0);
        // 0.2 fits in {0.65} (fuller) and {0.4}; best fit picks the 0.65 bin
        let placed = st.pack(its[3].clone(), &mut next).unwrap();
        assert_eq!(placed, 2);
    }

    #[test]
    fn bbf_ties_go_to_lowest_id() {
        let its = items(&["0.6", "0.6", "0.3"]);
        let p = bounded_best_fit(&its, Some(2), vec![]).unwrap();
        assert_eq!(p.bins[0].items.len(), 2);
    }

    #[test]
    fn bbf_with_k1_is_next_fit() {
        let its = items(&["0.3", "0.8", "0.1", "0.5", "0.5", "0.2", "0.9", "0.05"]);
        let a = bounded_best_fit(&its, Some(1), vec![]).unwrap();
        let b = next_fit(&its).unwrap();
        assert_eq!(shape(&a), shape(&b));
    }

    #[test]
    fn unbounded_is_best_fit() {
        let its = items(&["0.5", "0.7", "0.3", "0.2", "0.1"]);
        let p = best_fit(&its).unwrap();
        // 0.3 -> {0.7}, 0.2 -> {0.5}, 0.1 -> {0.5,0.2}
        assert_eq!(
            shape(&p),
            vec![vec!["1/2", "1/5", "1/10"], vec!["7/10", "3/10"]]
        );
    }

    #[test]
    fn outputs_are_feasible() {
        let inst = Instance::monochrome(
            ["0.3", "0.8", "0.1", "0.5", "0.5", "0.2", "0.9", "0.05"]
                .iter()
                .map(|s| s.parse().unwrap()),
        )
        .unwrap();
        for p in [
            next_fit(&inst.items).unwrap(),
            first_fit(&inst.items, None).unwrap(),
            first_fit_decreasing(&inst.items).unwrap(),
            best_fit(&inst.items).unwrap(),
            bounded_best_fit(&inst.items, Some(2), vec![]).unwrap(),
        ] {
            assert!(validate_packing(&p, &inst).is_valid());
        }
    }
}
