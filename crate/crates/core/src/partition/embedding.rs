//! Search for structure-preserving embeddings of one expanded tree into
//! another.
//!
//! Level maps are tried in lexicographic order of their increasing value
//! tuples. For a fixed level map the nodes of the small tree are placed in
//! `<*` order; each node's image must sit on the mapped level, below the
//! correct branch of its parent's image, and after the image of the previous
//! node of the same level.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tree::{for_each_combination, ExpandedTree, Node};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Embedding {
    /// `node_map[v]` is the image of node `v`.
    pub node_map: Vec<Node>,
    /// `level_map[l]` is the level of the images of level `l`.
    pub level_map: Vec<usize>,
}

impl Embedding {
    /// Image of a tuple.
    pub fn apply(&self, nodes: &[Node]) -> Vec<Node> {
        nodes.iter().map(|&v| self.node_map[v]).collect()
    }

    /// `outer ∘ self`.
    pub fn then(&self, outer: &Embedding) -> Embedding {
        Embedding {
            node_map: self.apply_map(&outer.node_map),
            level_map: self.level_map.iter().map(|&l| outer.level_map[l]).collect(),
        }
    }

    fn apply_map(&self, outer: &[Node]) -> Vec<Node> {
        self.node_map.iter().map(|&v| outer[v]).collect()
    }
}

/// Pins on the search: fixed level images and fixed node images.
#[derive(Clone, Debug, Default)]
pub struct Constraints {
    pub levels: BTreeMap<usize, usize>,
    pub nodes: BTreeMap<Node, Node>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub level_maps: u64,
    pub nodes_expanded: u64,
    pub prunes: u64,
    pub embeddings: u64,
}

impl SearchStats {
    pub fn absorb(&mut self, other: &SearchStats) {
        self.level_maps += other.level_maps;
        self.nodes_expanded += other.nodes_expanded;
        self.prunes += other.prunes;
        self.embeddings += other.embeddings;
    }
}

struct Placement<'a> {
    small: &'a ExpandedTree,
    big: &'a ExpandedTree,
    order: Vec<Node>,
    pins: &'a BTreeMap<Node, Node>,
    level_map: Vec<usize>,
    node_map: Vec<Node>,
}

impl Placement<'_> {
    /// Returns `false` once the visitor asks to stop.
    fn place(&mut self, i: usize, stats: &mut SearchStats, f: &mut dyn FnMut(&Embedding) -> bool) -> bool {
        if i == self.order.len() {
            stats.embeddings += 1;
            return f(&Embedding { node_map: self.node_map.clone(), level_map: self.level_map.clone() });
        }
        let v = self.order[i];
        let lv = self.small.level(v);
        let target_level = self.level_map[lv];
        let min_rank = match i.checked_sub(1).map(|j| self.order[j]) {
            Some(prev) if self.small.level(prev) == lv => Some(self.big.level_rank(self.node_map[prev])),
            _ => None,
        };
        let parent = self.small.parent(v).map(|p| {
            let label = self.small.branch_label(v).expect("non-root nodes carry labels");
            (self.node_map[p], self.level_map[lv - 1], label)
        });
        let pin = self.pins.get(&v).copied();
        for &x in self.big.level_nodes(target_level) {
            stats.nodes_expanded += 1;
            if min_rank.is_some_and(|r| self.big.level_rank(x) <= r) {
                stats.prunes += 1;
                continue;
            }
            if pin.is_some_and(|p| p != x) {
                stats.prunes += 1;
                continue;
            }
            if let Some((img_p, pl, label)) = parent {
                // the image must lie in branch `label` of the parent's image
                let ok = self.big.anc(x, pl) == img_p && self.big.branch_label(self.big.anc(x, pl + 1)) == Some(label);
                if !ok {
                    stats.prunes += 1;
                    continue;
                }
            }
            self.node_map[v] = x;
            if !self.place(i + 1, stats, f) {
                return false;
            }
        }
        true
    }
}

fn check_inputs(small: &ExpandedTree, big: &ExpandedTree, constraints: &Constraints) -> Result<()> {
    if !small.is_well_formed() || !big.is_well_formed() {
        return Err(Error::MalformedTree("embedding search needs well-formed trees".into()));
    }
    for (&l, &m) in &constraints.levels {
        if l >= small.height() || m >= big.height() {
            return Err(Error::Domain(format!("level pin {l} -> {m} out of range")));
        }
    }
    for (&v, &x) in &constraints.nodes {
        small.check_node(v)?;
        big.check_node(x)?;
    }
    Ok(())
}

/// Visit every embedding of `small` into `big` in search order; the visitor
/// returns `false` to stop.
pub fn for_each_embedding(
    small: &ExpandedTree,
    big: &ExpandedTree,
    constraints: &Constraints,
    stats: &mut SearchStats,
    f: &mut dyn FnMut(&Embedding) -> bool,
) -> Result<()> {
    check_inputs(small, big, constraints)?;
    if small.height() > big.height() {
        return Ok(());
    }
    let order: Vec<Node> = (0..small.height()).flat_map(|l| small.level_nodes(l).iter().copied()).collect();
    let mut placement = Placement {
        small,
        big,
        order,
        pins: &constraints.nodes,
        level_map: Vec::new(),
        node_map: vec![0; small.node_count()],
    };
    for_each_combination(big.height(), small.height(), &mut |levels| {
        if constraints.levels.iter().any(|(&l, &m)| levels[l] != m) {
            return true;
        }
        if constraints.nodes.iter().any(|(&v, &x)| big.level(x) != levels[small.level(v)]) {
            return true;
        }
        stats.level_maps += 1;
        placement.level_map = levels.to_vec();
        placement.place(0, stats, f)
    });
    Ok(())
}

/// First embedding in search order.
pub fn find_embedding(small: &ExpandedTree, big: &ExpandedTree, constraints: &Constraints) -> Result<Option<Embedding>> {
    let mut found = None;
    for_each_embedding(small, big, constraints, &mut SearchStats::default(), &mut |e| {
        found = Some(e.clone());
        false
    })?;
    Ok(found)
}

pub fn count_embeddings(small: &ExpandedTree, big: &ExpandedTree, constraints: &Constraints) -> Result<u64> {
    let mut stats = SearchStats::default();
    for_each_embedding(small, big, constraints, &mut stats, &mut |_| true)?;
    Ok(stats.embeddings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::coloring::all_tuples;
    use crate::tree::LevelOrder;

    fn lex(h: usize, b: usize) -> ExpandedTree {
        ExpandedTree::canonical_with(h, b, &LevelOrder::Lex).unwrap()
    }

    /// Every injective map accepted by the subtree predicate.
    fn oracle(small: &ExpandedTree, big: &ExpandedTree) -> Vec<Vec<Node>> {
        all_tuples(big.node_count(), small.node_count())
            .into_iter()
            .filter(|m| {
                let mut seen = m.clone();
                seen.sort_unstable();
                seen.dedup();
                seen.len() == m.len() && small.is_subtree(big, m).unwrap()
            })
            .collect()
    }

    fn search_all(small: &ExpandedTree, big: &ExpandedTree) -> Vec<Vec<Node>> {
        let mut out = Vec::new();
        for_each_embedding(small, big, &Constraints::default(), &mut SearchStats::default(), &mut |e| {
            out.push(e.node_map.clone());
            true
        })
        .unwrap();
        out.sort();
        out
    }

    #[test]
    fn matches_brute_force() {
        let cases = [
            (lex(2, 2), lex(3, 2)),
            (lex(2, 2), ExpandedTree::canonical_with(3, 2, &LevelOrder::Reversed).unwrap()),
            (lex(1, 2), lex(3, 2)),
            (lex(2, 2), lex(2, 2)),
            (ExpandedTree::canonical_with(2, 2, &LevelOrder::Reversed).unwrap(), lex(3, 2)),
        ];
        for (small, big) in cases {
            assert_eq!(search_all(&small, &big), oracle(&small, &big));
        }
    }

    #[test]
    fn images_are_subtrees() {
        let small = lex(3, 2);
        let big = ExpandedTree::canonical_with(4, 2, &LevelOrder::Shuffled(5)).unwrap();
        let mut n = 0;
        for_each_embedding(&small, &big, &Constraints::default(), &mut SearchStats::default(), &mut |e| {
            assert!(small.is_subtree(&big, &e.node_map).unwrap());
            n += 1;
            true
        })
        .unwrap();
        assert_eq!(n, count_embeddings(&small, &big, &Constraints::default()).unwrap());
    }

    #[test]
    fn pins_and_heights() {
        let small = lex(2, 2);
        let big = lex(3, 2);
        let mut c = Constraints::default();
        c.levels.insert(0, 1);
        let e = find_embedding(&small, &big, &c).unwrap().unwrap();
        assert_eq!(e.level_map, vec![1, 2]);
        c.nodes.insert(0, big.node_at(&[1]).unwrap());
        let e = find_embedding(&small, &big, &c).unwrap().unwrap();
        assert_eq!(e.node_map[0], big.node_at(&[1]).unwrap());
        assert!(find_embedding(&big, &small, &Constraints::default()).unwrap().is_none());
        c.levels.insert(5, 0);
        assert!(find_embedding(&small, &big, &c).is_err());
    }

    #[test]
    fn composition() {
        let (a, b, c) = (lex(2, 2), lex(3, 2), lex(4, 2));
        let g = find_embedding(&a, &b, &Constraints::default()).unwrap().unwrap();
        let h = find_embedding(&b, &c, &Constraints::default()).unwrap().unwrap();
        let gh = g.then(&h);
        assert!(a.is_subtree(&c, &gh.node_map).unwrap());
        assert_eq!(gh.apply(&[0]), vec![h.node_map[g.node_map[0]]]);
    }
}
