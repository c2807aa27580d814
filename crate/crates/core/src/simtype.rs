//! Canonical similarity types of embedded sequences.
//!
//! A [`SimilarityType`] stores every quantifier-free table of a sequence
//! (tree order, branch relations, meets, restrictions, level order) even
//! though the first two determine the rest, so that equality of types is a
//! flat field comparison.

use std::fmt;
use std::fmt::Write as _;

use crate::eseq::ESeq;
use crate::tree::{ExpandedTree, Node};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimilarityType {
    n: usize,
    branching: usize,
    /// `tree_le[k * n + i]`: `a_k <= a_i` in the tree order.
    tree_le: Vec<bool>,
    /// `branch[k * n + i] = Some(l)` iff `a_k R_l a_i`.
    branch: Vec<Option<usize>>,
    /// `meet[k * n + i]`: index of `a_k ∩ a_i`.
    meet: Vec<usize>,
    /// `restriction[l * n + m]`: index of `a_l ↾ lev(a_m)` when defined.
    restriction: Vec<Option<usize>>,
    /// `level_le[k * n + l]`: `lev(a_k) <= lev(a_l)`.
    level_le: Vec<bool>,
    /// For types of arbitrary tuples, the position of each tuple entry in
    /// the closure.
    pos: Option<Vec<usize>>,
}

impl SimilarityType {
    /// Type of an embedded sequence, without a position record.
    pub fn of_eseq(tree: &ExpandedTree, seq: &ESeq) -> Self {
        Self::of_nodes(tree, seq.nodes(), None)
    }

    /// `nodes` must be closed under meets and restrictions.
    pub(crate) fn of_nodes(tree: &ExpandedTree, nodes: &[Node], pos: Option<Vec<usize>>) -> Self {
        let n = nodes.len();
        let index_of = |v: Node| nodes.iter().position(|&x| x == v).expect("sequence is closed");
        let mut tree_le = Vec::with_capacity(n * n);
        let mut branch = Vec::with_capacity(n * n);
        let mut meet = Vec::with_capacity(n * n);
        let mut restriction = Vec::with_capacity(n * n);
        let mut level_le = Vec::with_capacity(n * n);
        for &a in nodes {
            for &b in nodes {
                tree_le.push(tree.is_below_or_equal(a, b));
                branch.push(tree.branch_at(a, b));
                meet.push(index_of(tree.meet_unchecked(a, b)));
                restriction.push((tree.level(b) <= tree.level(a)).then(|| index_of(tree.anc(a, tree.level(b)))));
                level_le.push(tree.level(a) <= tree.level(b));
            }
        }
        SimilarityType { n, branching: tree.branching(), tree_le, branch, meet, restriction, level_le, pos }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn tree_le(&self, k: usize, i: usize) -> bool {
        self.tree_le[k * self.n + i]
    }

    pub fn branch(&self, k: usize, i: usize) -> Option<usize> {
        self.branch[k * self.n + i]
    }

    /// The `n × n` table of the branch relation with label `label`.
    pub fn branch_table(&self, label: usize) -> Vec<bool> {
        self.branch.iter().map(|&b| b == Some(label)).collect()
    }

    pub fn meet(&self, k: usize, i: usize) -> usize {
        self.meet[k * self.n + i]
    }

    pub fn restriction(&self, l: usize, m: usize) -> Option<usize> {
        self.restriction[l * self.n + m]
    }

    pub fn level_le(&self, k: usize, l: usize) -> bool {
        self.level_le[k * self.n + l]
    }

    pub fn pos(&self) -> Option<&[usize]> {
        self.pos.as_deref()
    }

    /// Number of entries on the maximal level.
    pub fn top_count(&self) -> usize {
        (0..self.n).filter(|&k| (0..self.n).all(|j| self.level_le(j, k))).count()
    }

    /// Internal consistency of the tables.
    pub fn is_consistent(&self) -> bool {
        let n = self.n;
        let sq = n * n;
        if [self.tree_le.len(), self.branch.len(), self.meet.len(), self.restriction.len(), self.level_le.len()]
            .iter()
            .any(|&l| l != sq)
        {
            return false;
        }
        for k in 0..n {
            if !self.tree_le(k, k) || self.meet(k, k) != k {
                return false;
            }
            for i in 0..n {
                if self.meet(k, i) != self.meet(i, k) || self.meet(k, i) >= n {
                    return false;
                }
                if k != i && self.tree_le(k, i) && self.tree_le(i, k) {
                    return false;
                }
                // the tree order is refined by the level order
                if self.tree_le(k, i) && !self.level_le(k, i) {
                    return false;
                }
                match self.branch(k, i) {
                    Some(l) if l >= self.branching || k == i || !self.tree_le(k, i) => return false,
                    None if k != i && self.tree_le(k, i) => return false,
                    _ => {}
                }
                for j in 0..n {
                    if self.tree_le(k, i) && self.tree_le(i, j) && !self.tree_le(k, j) {
                        return false;
                    }
                }
            }
        }
        if let Some(p) = &self.pos {
            if p.iter().any(|&x| x >= n) {
                return false;
            }
        }
        true
    }

    /// Stable textual form: fields in alphabetical order, tables as rows
    /// separated by `/`.
    pub fn canonical_string(&self) -> String {
        let n = self.n;
        let mut s = String::new();
        let rows = |s: &mut String, cell: &dyn Fn(usize, usize, &mut String)| {
            for k in 0..n {
                if k > 0 {
                    s.push('/');
                }
                for i in 0..n {
                    cell(k, i, s);
                }
            }
        };
        let bit = |b: bool| if b { '1' } else { '0' };
        let _ = write!(s, "b={};br=", self.branching);
        rows(&mut s, &|k, i, s| match self.branch(k, i) {
            Some(l) => {
                let _ = write!(s, "{l}");
            }
            None => s.push('.'),
        });
        s.push_str(";le=");
        rows(&mut s, &|k, i, s| s.push(bit(self.tree_le(k, i))));
        s.push_str(";lev=");
        rows(&mut s, &|k, i, s| s.push(bit(self.level_le(k, i))));
        s.push_str(";meet=");
        rows(&mut s, &|k, i, s| {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}", self.meet(k, i));
        });
        let _ = write!(s, ";n={n};pos=");
        match &self.pos {
            Some(p) => {
                let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                s.push_str(&parts.join(","));
            }
            None => s.push('-'),
        }
        s.push_str(";restr=");
        rows(&mut s, &|k, i, s| {
            if i > 0 {
                s.push(',');
            }
            match self.restriction(k, i) {
                Some(x) => {
                    let _ = write!(s, "{x}");
                }
                None => s.push('.'),
            }
        });
        s
    }

    /// 64-bit FNV-1a digest of the canonical string.
    pub fn digest(&self) -> u64 {
        fnv1a(self.canonical_string().as_bytes())
    }
}

impl fmt::Display for SimilarityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_string())
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eseq::{closure, enumerate_eseq, sim_type};
    use crate::tree::LevelOrder;

    #[test]
    fn singletons_share_a_type() {
        let t = ExpandedTree::canonical_with(4, 2, &LevelOrder::Lex).unwrap();
        let first = sim_type(&t, &[0]).unwrap();
        for v in 0..t.node_count() {
            assert_eq!(sim_type(&t, &[v]).unwrap(), first);
        }
        assert_eq!(first.canonical_string(), "b=2;br=.;le=1;lev=1;meet=0;n=1;pos=0;restr=0");
    }

    #[test]
    fn branch_distinguishes() {
        let t = ExpandedTree::canonical_with(3, 2, &LevelOrder::Lex).unwrap();
        let r = t.root().unwrap();
        let a = sim_type(&t, &[r, t.node_at(&[0]).unwrap()]).unwrap();
        let b = sim_type(&t, &[r, t.node_at(&[1]).unwrap()]).unwrap();
        assert_ne!(a, b);
        assert_eq!(a.branch(0, 1), Some(0));
        assert_eq!(b.branch_table(1), vec![false, true, false, false]);
    }

    #[test]
    fn tuple_types_record_positions() {
        let t = ExpandedTree::canonical_with(3, 2, &LevelOrder::Lex).unwrap();
        let (x, y) = (t.node_at(&[0, 1]).unwrap(), t.node_at(&[1, 0]).unwrap());
        let st = sim_type(&t, &[y, x, y]).unwrap();
        assert_eq!(st.len(), 3);
        assert_eq!(st.pos(), Some(&[2, 1, 2][..]));
        assert_ne!(st, sim_type(&t, &[x, y, y]).unwrap());
        assert_eq!(sim_type(&t, &[]).unwrap().len(), 0);
        let cl = closure(&t, &[x, y]).unwrap();
        assert_eq!(SimilarityType::of_eseq(&t, &cl).top_count(), 2);
    }

    #[test]
    fn all_types_consistent() {
        let t = ExpandedTree::canonical_with(4, 3, &LevelOrder::Shuffled(3)).unwrap();
        for n in 0..=3 {
            for s in enumerate_eseq(&t, n).unwrap() {
                assert!(SimilarityType::of_eseq(&t, &s).is_consistent());
            }
        }
    }
}
