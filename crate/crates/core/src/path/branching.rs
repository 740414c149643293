//! Arc-partition branching on the path variables of one pair.

use crate::network::OdSubgraph;

/// Index of the last common node of two local paths that start at the same
/// origin, `None` if one is a prefix of the other.
pub fn divergence_index(p: &[usize], p2: &[usize]) -> Option<usize> {
    let common = p.iter().zip(p2).take_while(|(a, b)| a == b).count();
    if common == 0 || common >= p.len() || common >= p2.len() {
        return None;
    }
    Some(common - 1)
}

/// Splits the allowed out-arcs of a node into two halves of sizes differing
/// by at most one, with `first` in the first half and `second` (if any) in
/// the other. Remaining arcs alternate, starting with the smaller side.
pub fn split_arcs(allowed: &[usize], first: usize, second: Option<usize>) -> (Vec<usize>, Vec<usize>) {
    let mut a1 = vec![first];
    let mut a2: Vec<usize> = second.into_iter().collect();
    let mut rest: Vec<usize> = allowed
        .iter()
        .copied()
        .filter(|&a| a != first && Some(a) != second)
        .collect();
    rest.sort_unstable();
    for a in rest {
        if a2.len() <= a1.len() {
            a2.push(a);
        } else {
            a1.push(a);
        }
    }
    a1.sort_unstable();
    a2.sort_unstable();
    (a1, a2)
}

/// Allowed out-arcs (local) of local node `i`.
pub fn allowed_out_arcs(sub: &OdSubgraph, forbidden: &[bool], i: usize) -> Vec<usize> {
    sub.out_arcs(i)
        .iter()
        .copied()
        .filter(|&a| !forbidden.get(a).copied().unwrap_or(false))
        .collect()
}

/// Local arcs along a local node sequence.
pub fn path_arcs(sub: &OdSubgraph, nodes: &[usize]) -> Vec<usize> {
    nodes
        .windows(2)
        .map(|w| sub.find_arc(w[0], w[1]).expect("path uses subgraph arcs"))
        .collect()
}

/// Arc sets for two children separating the paths `p` and `p2` at their
/// divergence node.
pub fn branch_two_paths(
    sub: &OdSubgraph,
    forbidden: &[bool],
    p: &[usize],
    p2: &[usize],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let k = divergence_index(p, p2)?;
    let a = sub.find_arc(p[k], p[k + 1])?;
    let b = sub.find_arc(p2[k], p2[k + 1])?;
    Some(split_arcs(&allowed_out_arcs(sub, forbidden, p[k]), a, Some(b)))
}

/// Arc sets for two children, the first of which excludes path `p`, taken
/// at the first node of `p` with more than one allowed out-arc. `None` when
/// `p` is the only allowed path.
pub fn branch_one_path(sub: &OdSubgraph, forbidden: &[bool], p: &[usize]) -> Option<(Vec<usize>, Vec<usize>)> {
    for w in p.windows(2) {
        let allowed = allowed_out_arcs(sub, forbidden, w[0]);
        if allowed.len() > 1 {
            let a = sub.find_arc(w[0], w[1])?;
            return Some(split_arcs(&allowed, a, None));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_network;

    #[test]
    fn example_network_split_at_origin() {
        let fx = example_network(5.0, &[1.0]);
        let sub = fx.instance.subgraph(0);
        let l = |v| sub.local(v).unwrap();
        let p = vec![l(fx.s), l(fx.b), l(fx.t)];
        let p2 = vec![l(fx.s), l(fx.a), l(fx.d), l(fx.t)];
        let forbidden = vec![false; sub.arcs().len()];
        let (a1, a2) = branch_two_paths(&sub, &forbidden, &p, &p2).unwrap();
        assert_eq!(a1, vec![sub.find_arc(l(fx.s), l(fx.b)).unwrap()]);
        assert_eq!(a2, vec![sub.find_arc(l(fx.s), l(fx.a)).unwrap()]);
    }

    #[test]
    fn three_arcs_split_two_one() {
        let (a1, a2) = split_arcs(&[4, 7, 9], 7, Some(9));
        assert_eq!((a1.len(), a2.len()), (1, 2));
        assert!(a1.contains(&7) && a2.contains(&9));
        let (b1, b2) = split_arcs(&[1, 2, 3, 4, 5], 3, None);
        assert!(b1.contains(&3));
        assert!((b1.len() as i64 - b2.len() as i64).abs() <= 1);
        assert!(b1.iter().all(|a| !b2.contains(a)));
    }

    #[test]
    fn divergence_of_prefix_is_none() {
        assert_eq!(divergence_index(&[0, 1, 2], &[0, 1, 2]), None);
        assert_eq!(divergence_index(&[0, 1, 2], &[0, 3, 2]), Some(0));
    }
}
