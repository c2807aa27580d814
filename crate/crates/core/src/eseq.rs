//! Embedded sequences: `<*`-increasing node sequences closed under meets and
//! level restrictions, their closure operator and enumeration.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::simtype::SimilarityType;
use crate::tree::{ExpandedTree, Node};

/// An embedded sequence of some tree. Construction checks the defining
/// conditions; the tree itself is passed alongside at every use.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ESeq(Vec<Node>);

impl ESeq {
    pub fn new(tree: &ExpandedTree, nodes: Vec<Node>) -> Result<Self> {
        if is_eseq(tree, &nodes)? {
            Ok(ESeq(nodes))
        } else {
            Err(Error::NotEseq { nodes })
        }
    }

    pub fn empty() -> Self {
        ESeq(Vec::new())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<Node> {
        self.0
    }

    /// Index of `v` in the sequence.
    pub fn position(&self, v: Node) -> Option<usize> {
        self.0.iter().position(|&x| x == v)
    }
}

fn check_tree(tree: &ExpandedTree) -> Result<()> {
    if tree.is_well_formed() {
        Ok(())
    } else {
        Err(Error::MalformedTree("parent links do not form a level-consistent tree".into()))
    }
}

/// The set of levels occupied by `nodes`.
pub fn lev_set(tree: &ExpandedTree, nodes: &[Node]) -> BTreeSet<usize> {
    nodes.iter().map(|&v| tree.level(v)).collect()
}

/// Check the three defining conditions of an embedded sequence.
pub fn is_eseq(tree: &ExpandedTree, nodes: &[Node]) -> Result<bool> {
    check_tree(tree)?;
    for &v in nodes {
        tree.check_node(v)?;
    }
    if nodes.windows(2).any(|w| !tree.star_less(w[0], w[1])) {
        return Ok(false);
    }
    for (k, &a) in nodes.iter().enumerate() {
        for &b in &nodes[k + 1..] {
            if !nodes.contains(&tree.meet_unchecked(a, b)) {
                return Ok(false);
            }
        }
    }
    for &a in nodes {
        for &b in nodes {
            if tree.level(a) <= tree.level(b) && !nodes.contains(&tree.anc(b, tree.level(a))) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn dedup_checked(tree: &ExpandedTree, set: &[Node]) -> Result<Vec<Node>> {
    check_tree(tree)?;
    for &v in set {
        tree.check_node(v)?;
    }
    let mut a = set.to_vec();
    a.sort_unstable();
    a.dedup();
    Ok(a)
}

/// Closure of a nonempty node set: all pairwise meets, then every member
/// restricted to every level of those meets, sorted by `<*`.
pub fn closure(tree: &ExpandedTree, set: &[Node]) -> Result<ESeq> {
    let a = dedup_checked(tree, set)?;
    if a.is_empty() {
        return Err(Error::Domain("closure of the empty set".into()));
    }
    Ok(ESeq(closure_of_distinct(tree, &a)))
}

pub(crate) fn closure_of_distinct(tree: &ExpandedTree, a: &[Node]) -> Vec<Node> {
    let mut meet_levels = BTreeSet::new();
    for (i, &x) in a.iter().enumerate() {
        for &y in &a[i..] {
            meet_levels.insert(tree.level(tree.meet_unchecked(x, y)));
        }
    }
    let mut out = BTreeSet::new();
    for &x in a {
        for &l in meet_levels.range(..=tree.level(x)) {
            out.insert(tree.anc(x, l));
        }
    }
    let mut v: Vec<Node> = out.into_iter().collect();
    v.sort_by_key(|&x| tree.star_key(x));
    v
}

/// Position of each member of `set` inside its closure.
pub fn pos(tree: &ExpandedTree, set: &[Node]) -> Result<BTreeMap<Node, usize>> {
    let cl = closure(tree, set)?;
    Ok(cl.0.iter().enumerate().filter(|(_, v)| set.contains(v)).map(|(i, &v)| (v, i)).collect())
}

/// Similarity of two embedded sequences: same length, same tree order and
/// same branch relations between corresponding entries.
pub fn similar(tree: &ExpandedTree, a: &[Node], b: &[Node]) -> Result<bool> {
    for s in [a, b] {
        if !is_eseq(tree, s)? {
            return Err(Error::NotEseq { nodes: s.to_vec() });
        }
    }
    Ok(similar_unchecked(tree, a, b))
}

pub(crate) fn similar_unchecked(tree: &ExpandedTree, a: &[Node], b: &[Node]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let n = a.len();
    for k in 0..n {
        for i in 0..n {
            if tree.is_below_or_equal(a[k], a[i]) != tree.is_below_or_equal(b[k], b[i]) {
                return false;
            }
            if tree.branch_at(a[k], a[i]) != tree.branch_at(b[k], b[i]) {
                return false;
            }
        }
    }
    true
}

/// Similarity type of an arbitrary node sequence: the type of the closure of
/// its range together with the position of every entry in that closure.
pub fn sim_type(tree: &ExpandedTree, seq: &[Node]) -> Result<SimilarityType> {
    check_tree(tree)?;
    for &v in seq {
        tree.check_node(v)?;
    }
    Ok(sim_type_unchecked(tree, seq))
}

pub(crate) fn sim_type_unchecked(tree: &ExpandedTree, seq: &[Node]) -> SimilarityType {
    let mut range = seq.to_vec();
    range.sort_unstable();
    range.dedup();
    let cl = if range.is_empty() { Vec::new() } else { closure_of_distinct(tree, &range) };
    let positions = seq.iter().map(|v| cl.iter().position(|x| x == v).expect("entry in closure")).collect();
    SimilarityType::of_nodes(tree, &cl, Some(positions))
}

/// Depth-first enumerator of `eseq_n` in lexicographic order of node tuples.
pub struct EseqEnumerator<'t> {
    tree: &'t ExpandedTree,
    n: usize,
    prefix: Vec<Node>,
    cursor: Vec<usize>,
    done: bool,
    visited: u64,
}

impl<'t> EseqEnumerator<'t> {
    /// Number of candidate extensions examined so far.
    pub fn visited(&self) -> u64 {
        self.visited
    }

    fn extends(&self, x: Node) -> bool {
        let t = self.tree;
        if let Some(&last) = self.prefix.last() {
            if !t.star_less(last, x) {
                return false;
            }
        }
        let has = |v: Node| v == x || self.prefix.contains(&v);
        self.prefix.iter().all(|&p| has(t.meet_unchecked(p, x)) && has(t.anc(x, t.level(p))))
    }
}

impl Iterator for EseqEnumerator<'_> {
    type Item = ESeq;

    fn next(&mut self) -> Option<ESeq> {
        if self.done {
            return None;
        }
        if self.n == 0 {
            self.done = true;
            return Some(ESeq::empty());
        }
        let count = self.tree.node_count();
        loop {
            let d = self.prefix.len();
            if d == self.n {
                let out = self.prefix.clone();
                self.prefix.pop();
                return Some(ESeq(out));
            }
            let mut c = self.cursor[d];
            let mut found = None;
            while c < count {
                self.visited += 1;
                let ok = self.extends(c);
                c += 1;
                if ok {
                    found = Some(c - 1);
                    break;
                }
            }
            self.cursor[d] = c;
            match found {
                Some(x) => {
                    self.prefix.push(x);
                    if d + 1 < self.n {
                        self.cursor[d + 1] = 0;
                    }
                }
                None if d == 0 => {
                    self.done = true;
                    return None;
                }
                None => {
                    self.prefix.pop();
                }
            }
        }
    }
}

/// Every embedded sequence of length `n`, each exactly once, in
/// lexicographic order of node-index tuples.
pub fn enumerate_eseq(tree: &ExpandedTree, n: usize) -> Result<EseqEnumerator<'_>> {
    check_tree(tree)?;
    Ok(EseqEnumerator { tree, n, prefix: Vec::with_capacity(n), cursor: vec![0; n], done: false, visited: 0 })
}

/// Run `f` over `eseq_n`, failing once more than `budget` candidate
/// extensions have been examined.
pub fn for_each_eseq(
    tree: &ExpandedTree,
    n: usize,
    budget: u64,
    mut f: impl FnMut(&ESeq),
) -> Result<u64> {
    let mut it = enumerate_eseq(tree, n)?;
    loop {
        let next = it.next();
        if it.visited() > budget {
            return Err(Error::BudgetExceeded { budget });
        }
        match next {
            Some(s) => f(&s),
            None => return Ok(it.visited()),
        }
    }
}

/// For `t` above a level-closed initial part `u` of the tree and `a ⊆ u`,
/// split `cl(a ∪ {t})` as `c ⌢ ⟨t⟩` with `c` inside `u`.
///
/// `u` must be downward closed and contain every node of each level it
/// meets; with only downward closure the restrictions of `t` can fall
/// outside `u`.
pub fn closure_extension_split(
    tree: &ExpandedTree,
    u: &[Node],
    a: &[Node],
    t: Node,
) -> Result<(ESeq, Node)> {
    check_tree(tree)?;
    tree.check_node(t)?;
    let uset: BTreeSet<Node> = u.iter().copied().collect();
    for &v in &uset {
        tree.check_node(v)?;
        if let Some(p) = tree.parent(v) {
            if !uset.contains(&p) {
                return Err(Error::Precondition(format!("u is not downward closed at node {v}")));
            }
        }
        if tree.level_nodes(tree.level(v)).iter().any(|w| !uset.contains(w)) {
            return Err(Error::Precondition(format!(
                "u is not level closed: level {} is only partly included",
                tree.level(v)
            )));
        }
    }
    if let Some(&x) = a.iter().find(|x| !uset.contains(x)) {
        return Err(Error::Precondition(format!("node {x} of a is not in u")));
    }
    let lev_u = uset.iter().map(|&v| tree.level(v) + 1).max().unwrap_or(0);
    if lev_u >= tree.level(t) {
        return Err(Error::Precondition(format!(
            "t has level {} but u reaches level {lev_u}",
            tree.level(t)
        )));
    }
    let mut set = a.to_vec();
    set.push(t);
    let mut cl = closure(tree, &set)?.into_vec();
    if cl.pop() != Some(t) || cl.iter().any(|v| !uset.contains(v)) {
        return Err(Error::Domain("closure does not split at t".into()));
    }
    Ok((ESeq(cl), t))
}
