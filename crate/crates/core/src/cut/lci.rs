//! Minimal covers of a station's capacity knapsack and their lifted cover
//! inequalities.

use crate::network::NodeId;

/// `sum_{q in cover} z_q + sum_{q not in cover} alpha_q z_q <= |cover| - 1`
/// for the pairs routed through `station`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LiftedCover {
    pub station: NodeId,
    /// Pair indexes, ascending.
    pub cover: Vec<usize>,
    /// Nonzero lifting coefficients of pairs outside the cover, ascending by
    /// pair.
    pub lifted: Vec<(usize, u32)>,
}

impl LiftedCover {
    pub fn rhs(&self) -> f64 {
        self.cover.len() as f64 - 1.0
    }

    pub fn coefficient(&self, q: usize) -> f64 {
        if self.cover.binary_search(&q).is_ok() {
            return 1.0;
        }
        self.lifted
            .binary_search_by_key(&q, |&(p, _)| p)
            .map(|i| self.lifted[i].1 as f64)
            .unwrap_or(0.0)
    }

    /// Left-hand side at the assignment `z(q)`.
    pub fn lhs(&self, z: impl Fn(usize) -> f64) -> f64 {
        self.cover.iter().map(|&q| z(q)).sum::<f64>() + self.lifted.iter().map(|&(q, a)| a as f64 * z(q)).sum::<f64>()
    }

    /// Pairs with a nonzero coefficient and their coefficients.
    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.cover
            .iter()
            .map(|&q| (q, 1.0))
            .chain(self.lifted.iter().map(|&(q, a)| (q, a as f64)))
    }
}

/// One candidate member of a cover: pair index, its LP value at the station
/// and its demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverItem {
    pub pair: usize,
    pub value: f64,
    pub demand: f64,
}

/// Greedy cover by non-increasing LP value, then stripped of members
/// (largest demand first) that are not needed. `None` if everything fits.
pub fn minimal_cover(items: &[CoverItem], capacity: f64) -> Option<Vec<usize>> {
    let mut order: Vec<&CoverItem> = items.iter().collect();
    order.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.pair.cmp(&b.pair)));
    let mut cover = Vec::new();
    let mut total = 0.0;
    for it in order {
        if total > capacity {
            break;
        }
        cover.push(*it);
        total += it.demand;
    }
    if total <= capacity {
        return None;
    }
    let mut by_demand = cover.clone();
    by_demand.sort_by(|a, b| b.demand.total_cmp(&a.demand).then(a.pair.cmp(&b.pair)));
    for it in by_demand {
        if total - it.demand > capacity {
            total -= it.demand;
            cover.retain(|c| c.pair != it.pair);
        }
    }
    let mut out: Vec<usize> = cover.iter().map(|c| c.pair).collect();
    out.sort_unstable();
    Some(out)
}

/// Sums of the `r` largest cover demands, `r = 0..=|C|`.
pub fn prefix_sums(cover_demands: &[f64]) -> Vec<f64> {
    let mut sorted = cover_demands.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut sums = vec![0.0];
    for f in sorted {
        sums.push(sums.last().copied().unwrap_or(0.0) + f);
    }
    sums
}

/// The integer `alpha` with `S(alpha) <= demand < S(alpha + 1)`, where
/// `S(r)` is the sum of the `r` largest cover demands and `S(|C| + 1)` is
/// taken as infinite.
pub fn balas_lift(cover_demands: &[f64], demand: f64) -> u32 {
    let sums = prefix_sums(cover_demands);
    let mut alpha = 0;
    while alpha + 1 < sums.len() && sums[alpha + 1] <= demand {
        alpha += 1;
    }
    alpha as u32
}

/// Builds the lifted cover inequality for `station` from the LP values of
/// the pairs that may use it.
pub fn lifted_cover(station: NodeId, items: &[CoverItem], capacity: f64) -> Option<LiftedCover> {
    if !capacity.is_finite() {
        return None;
    }
    let cover = minimal_cover(items, capacity)?;
    let demands: Vec<f64> = items
        .iter()
        .filter(|it| cover.contains(&it.pair))
        .map(|it| it.demand)
        .collect();
    let mut lifted: Vec<(usize, u32)> = items
        .iter()
        .filter(|it| !cover.contains(&it.pair))
        .map(|it| (it.pair, balas_lift(&demands, it.demand)))
        .filter(|&(_, a)| a > 0)
        .collect();
    lifted.sort_unstable();
    Some(LiftedCover { station, cover, lifted })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn items(values: &[f64], demands: &[f64]) -> Vec<CoverItem> {
        values
            .iter()
            .zip(demands)
            .enumerate()
            .map(|(pair, (&value, &demand))| CoverItem { pair, value, demand })
            .collect()
    }

    #[test]
    fn greedy_cover_is_minimal() {
        let it = items(&[0.9, 0.8, 0.7, 0.6], &[6.0, 5.0, 4.0, 7.0]);
        assert_eq!(minimal_cover(&it, 10.0), Some(vec![0, 1]));
    }

    #[test]
    fn single_oversized_pair() {
        let it = items(&[1.0], &[3.0]);
        assert_eq!(minimal_cover(&it, 2.0), Some(vec![0]));
    }

    #[test]
    fn everything_fits() {
        let it = items(&[1.0, 1.0], &[1.0, 2.0]);
        assert_eq!(minimal_cover(&it, 3.0), None);
    }

    #[test]
    fn stripping_removes_unneeded_member() {
        let it = items(&[0.9, 0.8, 0.7], &[2.0, 3.0, 9.0]);
        assert_eq!(minimal_cover(&it, 10.0), Some(vec![0, 2]));
    }

    #[test]
    fn balas_examples() {
        assert_eq!(balas_lift(&[6.0, 5.0], 4.0), 0);
        assert_eq!(balas_lift(&[6.0, 5.0], 7.0), 1);
        assert_eq!(balas_lift(&[6.0, 5.0], 6.0), 1);
        assert_eq!(balas_lift(&[6.0, 5.0], 11.0), 2);
    }

    #[test]
    fn violated_lci_example() {
        let it = items(&[0.9, 0.9, 0.0, 0.3], &[6.0, 5.0, 4.0, 7.0]);
        let lci = lifted_cover(0, &it, 10.0).unwrap();
        assert_eq!(lci.cover, vec![0, 1]);
        assert_eq!(lci.lifted, vec![(3, 1)]);
        let z = [0.9, 0.9, 0.0, 0.3];
        let lhs = lci.lhs(|q| z[q]);
        assert!((lhs - 2.1).abs() < 1e-12);
        assert!(lhs > lci.rhs());
    }
}
