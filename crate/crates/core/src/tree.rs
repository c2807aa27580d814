//! Finite expanded trees.
//!
//! An [`ExpandedTree`] is a rooted tree in which every level carries its own
//! well-order and every splitting node has exactly `b` labeled successors.
//! Nodes are dense indices `0..node_count`; the string view of a node (its
//! branch labels read from the root) is derived, never stored.
//!
//! The level-then-rank order `<*` is represented implicitly by the pair
//! `(level, level_rank)`.

use std::cmp::Ordering;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Node = usize;

/// Upper bound on the number of nodes a canonical tree may have.
pub const MAX_NODES: usize = 1 << 22;

const NONE: Node = usize::MAX;

/// Structural indexes computed for trees whose parent links are consistent
/// with their levels. Everything here is a function of the stored fields.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Index {
    /// `anc[node * height + level]` is the ancestor of `node` at `level`, or
    /// `NONE` when `level > lev(node)`.
    anc: Vec<Node>,
    /// Nodes of each level, sorted by `(level_rank, index)`.
    levels: Vec<Vec<Node>>,
    /// Children of each node, sorted by branch label.
    children: Vec<Vec<Node>>,
    root: Node,
}

/// A finite expanded tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpandedTree {
    branching: usize,
    height: usize,
    parent: Vec<Option<Node>>,
    branch_label: Vec<Option<usize>>,
    level: Vec<usize>,
    level_rank: Vec<usize>,
    index: Option<Index>,
}

/// Source of the per-level well-orders of a canonical tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LevelOrder {
    /// Lexicographic order of the level's strings.
    Lex,
    /// Every level in reverse lexicographic order.
    Reversed,
    /// Each level shuffled by a ChaCha8 stream seeded with the value.
    Shuffled(u64),
    /// `orders[level][rank]` is the lexicographic index of the node holding
    /// that rank.
    Explicit(Vec<Vec<usize>>),
}

impl LevelOrder {
    /// Materialize the per-level permutations for a full tree.
    pub fn permutations(&self, height: usize, branching: usize) -> Result<Vec<Vec<usize>>> {
        let sizes = level_sizes(height, branching)?;
        Ok(match self {
            LevelOrder::Lex => sizes.iter().map(|&s| (0..s).collect()).collect(),
            LevelOrder::Reversed => sizes.iter().map(|&s| (0..s).rev().collect()).collect(),
            LevelOrder::Shuffled(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                sizes
                    .iter()
                    .map(|&s| {
                        let mut v: Vec<usize> = (0..s).collect();
                        v.shuffle(&mut rng);
                        v
                    })
                    .collect()
            }
            LevelOrder::Explicit(orders) => orders.clone(),
        })
    }
}

impl fmt::Display for LevelOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelOrder::Lex => write!(f, "lex"),
            LevelOrder::Reversed => write!(f, "reversed"),
            LevelOrder::Shuffled(seed) => write!(f, "seeded-shuffle({seed})"),
            LevelOrder::Explicit(_) => write!(f, "explicit"),
        }
    }
}

fn level_sizes(height: usize, branching: usize) -> Result<Vec<usize>> {
    if height == 0 {
        return Err(Error::InvalidParameters("height must be at least 1".into()));
    }
    if branching < 2 {
        return Err(Error::InvalidParameters("branching must be at least 2".into()));
    }
    let mut sizes = Vec::with_capacity(height);
    let mut size = 1usize;
    let mut total = 0usize;
    for _ in 0..height {
        sizes.push(size);
        total = total
            .checked_add(size)
            .filter(|&t| t <= MAX_NODES)
            .ok_or_else(|| Error::InvalidParameters(format!("tree exceeds {MAX_NODES} nodes")))?;
        size = size.saturating_mul(branching);
    }
    Ok(sizes)
}

/// Which axiom a [`Violation`] refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Clause {
    /// `(u, <*)` is a nonempty well order.
    B,
    /// The tree order is included in `<*`.
    C,
    /// Levels are the order types of the ancestor chains.
    D,
    /// Equivalence classes are exactly the levels; the height is the number
    /// of levels.
    F,
    /// No last level (only checked in strict mode).
    FGamma,
    /// Every node has descendants on every higher level.
    G,
    /// Splitting nodes have exactly `b` immediate successors.
    H,
    /// Meets exist, i.e. there is exactly one root.
    K,
    /// Branch labels are in range and distinct among siblings.
    L,
}

impl Clause {
    pub fn letter(self) -> &'static str {
        match self {
            Clause::B => "b",
            Clause::C => "c",
            Clause::D => "d",
            Clause::F => "f",
            Clause::FGamma => "f(gamma)",
            Clause::G => "g",
            Clause::H => "h",
            Clause::K => "k",
            Clause::L => "l",
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.letter())
    }
}

/// One violated axiom together with the nodes witnessing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub clause: Clause,
    pub nodes: Vec<Node>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {:?}: {}", self.clause, self.nodes, self.message)
    }
}

/// Clauses of the substructure relation, in the order they are checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SubtreeClause {
    /// Tree order is the restriction.
    Order,
    /// Meets are preserved.
    Meet,
    /// Branch relations are the restriction.
    Branch,
    /// `<*` is the restriction.
    StarOrder,
    /// Level equality is the restriction.
    Level,
}

impl SubtreeClause {
    pub fn letter(self) -> &'static str {
        match self {
            SubtreeClause::Order => "b",
            SubtreeClause::Meet => "c",
            SubtreeClause::Branch => "d",
            SubtreeClause::StarOrder => "e",
            SubtreeClause::Level => "f",
        }
    }
}

impl ExpandedTree {
    /// Assemble a tree from raw per-node fields.
    ///
    /// Only shape is checked here (equal lengths, parent indices in range).
    /// Axiom violations are reported by [`ExpandedTree::validate`]; the
    /// structural queries return [`Error::MalformedTree`] on trees whose
    /// parent links do not form a single level-consistent tree.
    pub fn from_parts(
        branching: usize,
        height: usize,
        parent: Vec<Option<Node>>,
        branch_label: Vec<Option<usize>>,
        level: Vec<usize>,
        level_rank: Vec<usize>,
    ) -> Result<Self> {
        let n = parent.len();
        if branch_label.len() != n || level.len() != n || level_rank.len() != n {
            return Err(Error::InvalidParameters(format!(
                "field lengths differ: parent {n}, branch_label {}, level {}, level_rank {}",
                branch_label.len(),
                level.len(),
                level_rank.len()
            )));
        }
        if branching < 2 {
            return Err(Error::InvalidParameters("branching must be at least 2".into()));
        }
        if n > MAX_NODES {
            return Err(Error::InvalidParameters(format!("tree exceeds {MAX_NODES} nodes")));
        }
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(Error::InvalidNode { node: p, node_count: n });
                }
                if p == v {
                    return Err(Error::InvalidParameters(format!("node {v} is its own parent")));
                }
            }
        }
        let mut tree = ExpandedTree {
            branching,
            height,
            parent,
            branch_label,
            level,
            level_rank,
            index: None,
        };
        tree.index = tree.build_index();
        Ok(tree)
    }

    fn build_index(&self) -> Option<Index> {
        let n = self.node_count();
        let h = self.height;
        if n == 0 || h == 0 {
            return None;
        }
        let mut roots = (0..n).filter(|&v| self.parent[v].is_none());
        let root = roots.next()?;
        if roots.next().is_some() || self.level[root] != 0 {
            return None;
        }
        for v in 0..n {
            if self.level[v] >= h {
                return None;
            }
            if let Some(p) = self.parent[v] {
                if self.level[p] + 1 != self.level[v] {
                    return None;
                }
            }
        }
        // Parent levels strictly decrease, so every chain ends at the root.
        let mut order: Vec<Node> = (0..n).collect();
        order.sort_by_key(|&v| self.level[v]);
        let mut anc = vec![NONE; n * h];
        for &v in &order {
            let lv = self.level[v];
            if let Some(p) = self.parent[v] {
                let (src, dst) = (p * h, v * h);
                for l in 0..lv {
                    anc[dst + l] = anc[src + l];
                }
            }
            anc[v * h + lv] = v;
        }
        let mut levels = vec![Vec::new(); h];
        for v in 0..n {
            levels[self.level[v]].push(v);
        }
        for lv in &mut levels {
            lv.sort_by_key(|&v| (self.level_rank[v], v));
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                children[p].push(v);
            }
        }
        for c in &mut children {
            c.sort_by_key(|&v| (self.branch_label[v], v));
        }
        Some(Index { anc, levels, children, root })
    }

    /// The full `b`-branching tree of the given height with the supplied
    /// per-level orders. `level_orders[l][r]` is the lexicographic index
    /// (among the `b^l` strings of length `l`) of the node with rank `r`.
    pub fn canonical(height: usize, branching: usize, level_orders: &[Vec<usize>]) -> Result<Self> {
        let sizes = level_sizes(height, branching)?;
        if level_orders.len() != height {
            return Err(Error::InvalidParameters(format!(
                "expected {height} level orders, got {}",
                level_orders.len()
            )));
        }
        for (l, (order, &size)) in level_orders.iter().zip(&sizes).enumerate() {
            if order.len() != size {
                return Err(Error::InvalidPermutation {
                    level: l,
                    reason: format!("expected {size} entries, got {}", order.len()),
                });
            }
            let mut seen = vec![false; size];
            for &x in order {
                if x >= size {
                    return Err(Error::InvalidPermutation {
                        level: l,
                        reason: format!("entry {x} out of range 0..{size}"),
                    });
                }
                if std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidPermutation {
                        level: l,
                        reason: format!("duplicate entry {x}"),
                    });
                }
            }
        }
        let total: usize = sizes.iter().sum();
        let mut parent = Vec::with_capacity(total);
        let mut branch_label = Vec::with_capacity(total);
        let mut level = Vec::with_capacity(total);
        let mut level_rank = vec![0; total];
        let mut offset = 0usize;
        let mut prev_offset = 0usize;
        for (l, &size) in sizes.iter().enumerate() {
            for lex in 0..size {
                if l == 0 {
                    parent.push(None);
                    branch_label.push(None);
                } else {
                    parent.push(Some(prev_offset + lex / branching));
                    branch_label.push(Some(lex % branching));
                }
                level.push(l);
            }
            for (rank, &lex) in level_orders[l].iter().enumerate() {
                level_rank[offset + lex] = rank;
            }
            prev_offset = offset;
            offset += size;
        }
        Self::from_parts(branching, height, parent, branch_label, level, level_rank)
    }

    /// Convenience wrapper around [`ExpandedTree::canonical`].
    pub fn canonical_with(height: usize, branching: usize, order: &LevelOrder) -> Result<Self> {
        let orders = order.permutations(height, branching)?;
        Self::canonical(height, branching, &orders)
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn parent(&self, v: Node) -> Option<Node> {
        self.parent[v]
    }

    pub fn branch_label(&self, v: Node) -> Option<usize> {
        self.branch_label[v]
    }

    pub fn level(&self, v: Node) -> usize {
        self.level[v]
    }

    pub fn level_rank(&self, v: Node) -> usize {
        self.level_rank[v]
    }

    /// True when the parent links form a single tree whose levels match
    /// depth. Structural queries require this.
    pub fn is_well_formed(&self) -> bool {
        self.index.is_some()
    }

    fn idx(&self) -> Result<&Index> {
        self.index
            .as_ref()
            .ok_or_else(|| Error::MalformedTree("parent links do not form a level-consistent tree".into()))
    }

    fn index_unchecked(&self) -> &Index {
        self.index.as_ref().expect("structural query on a malformed tree")
    }

    pub fn check_node(&self, v: Node) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(Error::InvalidNode { node: v, node_count: self.node_count() })
        }
    }

    pub fn root(&self) -> Result<Node> {
        Ok(self.idx()?.root)
    }

    /// Nodes of level `l`, in `<*` order.
    pub fn level_nodes(&self, l: usize) -> &[Node] {
        match &self.index {
            Some(ix) if l < ix.levels.len() => &ix.levels[l],
            _ => &[],
        }
    }

    /// Children of `v`, sorted by branch label.
    pub fn children(&self, v: Node) -> &[Node] {
        match &self.index {
            Some(ix) => &ix.children[v],
            None => &[],
        }
    }

    /// The child of `v` with branch label `label`.
    pub fn successor(&self, v: Node, label: usize) -> Option<Node> {
        self.children(v).iter().copied().find(|&c| self.branch_label[c] == Some(label))
    }

    /// Key realizing `<*`.
    #[inline]
    pub fn star_key(&self, v: Node) -> (usize, usize) {
        (self.level[v], self.level_rank[v])
    }

    #[inline]
    pub fn star_less(&self, s: Node, t: Node) -> bool {
        self.star_key(s) < self.star_key(t)
    }

    #[inline]
    pub(crate) fn anc(&self, t: Node, l: usize) -> Node {
        let ix = self.index_unchecked();
        ix.anc[t * self.height + l]
    }

    /// Strict tree order `s < t`.
    #[inline]
    pub fn is_ancestor(&self, s: Node, t: Node) -> bool {
        self.level[s] < self.level[t] && self.anc(t, self.level[s]) == s
    }

    #[inline]
    pub fn is_below_or_equal(&self, s: Node, t: Node) -> bool {
        s == t || self.is_ancestor(s, t)
    }

    /// Label of the branch of `s` that contains `t`, for `s < t`.
    #[inline]
    pub fn branch_at(&self, s: Node, t: Node) -> Option<usize> {
        if self.is_ancestor(s, t) {
            self.branch_label[self.anc(t, self.level[s] + 1)]
        } else {
            None
        }
    }

    /// The branch relation `s R_label t`.
    #[inline]
    pub fn in_branch(&self, s: Node, label: usize, t: Node) -> bool {
        self.branch_at(s, t) == Some(label)
    }

    #[inline]
    pub(crate) fn meet_unchecked(&self, s: Node, t: Node) -> Node {
        let ix = self.index_unchecked();
        let h = self.height;
        let top = self.level[s].min(self.level[t]);
        // The common-ancestor levels form a prefix; find its end.
        let (mut lo, mut hi) = (0usize, top);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if ix.anc[s * h + mid] == ix.anc[t * h + mid] {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        ix.anc[s * h + lo]
    }

    /// Greatest common lower bound of `s` and `t`.
    pub fn meet(&self, s: Node, t: Node) -> Result<Node> {
        self.check_node(s)?;
        self.check_node(t)?;
        self.idx()?;
        Ok(self.meet_unchecked(s, t))
    }

    /// The ancestor of `t` at level `l`.
    pub fn restrict(&self, t: Node, l: usize) -> Result<Node> {
        self.check_node(t)?;
        self.idx()?;
        if l > self.level[t] {
            return Err(Error::Domain(format!(
                "cannot restrict node {t} of level {} to level {l}",
                self.level[t]
            )));
        }
        Ok(self.anc(t, l))
    }

    /// Branch labels along the path from the root to `v`.
    pub fn node_string(&self, v: Node) -> Result<Vec<usize>> {
        self.check_node(v)?;
        self.idx()?;
        Ok((1..=self.level[v]).map(|l| self.branch_label[self.anc(v, l)].unwrap_or(0)).collect())
    }

    /// The node reached from the root by following `labels`.
    pub fn node_at(&self, labels: &[usize]) -> Option<Node> {
        let mut v = self.index.as_ref()?.root;
        for &l in labels {
            v = self.successor(v, l)?;
        }
        Some(v)
    }

    /// In-order comparison: the 0-branch lies left of a node, every other
    /// branch lies right of it.
    pub fn lex_less(&self, s: Node, t: Node) -> Result<bool> {
        self.check_node(s)?;
        self.check_node(t)?;
        self.idx()?;
        if s == t {
            return Err(Error::Domain(format!("lex_less needs distinct nodes, got {s} twice")));
        }
        let rho = self.meet_unchecked(s, t);
        let side = |x: Node| self.branch_label[self.anc(x, self.level[rho] + 1)].unwrap_or(0);
        Ok(if rho == s {
            side(t) >= 1
        } else if rho == t {
            side(s) == 0
        } else {
            side(s) < side(t)
        })
    }

    /// Check the tree axioms. Clauses about the absence of a top level (no
    /// last level; splitting and extension at the top level) are enforced
    /// only when `strict` is set, which every finite tree fails.
    pub fn validate(&self, strict: bool) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.node_count();
        let mut push = |clause, nodes: Vec<Node>, message: String| {
            out.push(Violation { clause, nodes, message });
        };
        if n == 0 {
            push(Clause::B, vec![], "universe is empty".into());
            return out;
        }

        // (k): exactly one root.
        let roots: Vec<Node> = (0..n).filter(|&v| self.parent[v].is_none()).collect();
        if roots.len() != 1 {
            push(Clause::K, roots.clone(), format!("{} roots, so some pair has no common lower bound", roots.len()));
        }
        for &r in &roots {
            if self.level[r] != 0 {
                push(Clause::D, vec![r], format!("root has level {}", self.level[r]));
            }
            if self.branch_label[r].is_some() {
                push(Clause::L, vec![r], "root carries a branch label".into());
            }
        }

        // (d): parent level is exactly one less.
        let mut level_ok = true;
        for v in 0..n {
            if let Some(p) = self.parent[v] {
                if self.level[p] + 1 != self.level[v] {
                    level_ok = false;
                    push(
                        Clause::D,
                        vec![p, v],
                        format!("parent level {} but child level {}", self.level[p], self.level[v]),
                    );
                }
            }
        }

        // (c): tree order inside <*.
        for v in 0..n {
            if let Some(p) = self.parent[v] {
                if !self.star_less(p, v) {
                    push(Clause::C, vec![p, v], "parent does not precede child in <*".into());
                }
            }
        }

        // (f): levels are 0..height and all nonempty.
        let mut sizes = vec![0usize; self.height];
        for v in 0..n {
            if self.level[v] >= self.height {
                push(Clause::F, vec![v], format!("level {} not below height {}", self.level[v], self.height));
            } else {
                sizes[self.level[v]] += 1;
            }
        }
        for (l, &s) in sizes.iter().enumerate() {
            if s == 0 {
                push(Clause::F, vec![], format!("level {l} is empty"));
            }
        }
        if strict {
            push(Clause::FGamma, vec![], format!("level {} is the last level", self.height.saturating_sub(1)));
        }

        // (b): ranks inside each level form 0..size.
        let mut by_level: Vec<Vec<Node>> = vec![Vec::new(); self.height];
        for v in 0..n {
            if self.level[v] < self.height {
                by_level[self.level[v]].push(v);
            }
        }
        for (l, nodes) in by_level.iter().enumerate() {
            let mut holder = vec![None; nodes.len()];
            for &v in nodes {
                let r = self.level_rank[v];
                if r >= nodes.len() {
                    push(Clause::B, vec![v], format!("rank {r} out of range on level {l} of size {}", nodes.len()));
                } else if let Some(w) = holder[r] {
                    push(Clause::B, vec![w, v], format!("rank {r} repeated on level {l}"));
                } else {
                    holder[r] = Some(v);
                }
            }
        }

        // (h), (l): children.
        let mut children: Vec<Vec<Node>> = vec![Vec::new(); n];
        for v in 0..n {
            if let Some(p) = self.parent[v] {
                children[p].push(v);
            }
        }
        for (v, kids) in children.iter().enumerate() {
            if self.parent[v].is_some() {
                match self.branch_label[v] {
                    None => push(Clause::L, vec![v], "non-root node without branch label".into()),
                    Some(l) if l >= self.branching => {
                        push(Clause::L, vec![v], format!("branch label {l} not below {}", self.branching))
                    }
                    _ => {}
                }
            }
            let mut labels: Vec<usize> = kids.iter().filter_map(|&c| self.branch_label[c]).collect();
            labels.sort_unstable();
            if labels.windows(2).any(|w| w[0] == w[1]) {
                let mut ns = vec![v];
                ns.extend(kids);
                push(Clause::L, ns, "siblings share a branch label".into());
            }
            let internal = self.level[v] + 1 < self.height;
            if (internal || strict) && kids.len() != self.branching {
                let mut ns = vec![v];
                ns.extend(kids);
                push(
                    Clause::H,
                    ns,
                    format!("{} immediate successors, expected {}", kids.len(), self.branching),
                );
            }
        }

        // (g): extension to every higher level. With parent levels consistent
        // it suffices that internal nodes have a child.
        if level_ok {
            for (v, kids) in children.iter().enumerate() {
                if self.level[v] + 1 < self.height && kids.is_empty() {
                    push(
                        Clause::G,
                        vec![v],
                        format!("no descendant on level {}", self.level[v] + 1),
                    );
                }
            }
        }
        out
    }

    /// True iff the two trees differ at most in their per-level orders.
    pub fn are_neighbors(&self, other: &ExpandedTree) -> bool {
        self.branching == other.branching
            && self.height == other.height
            && self.parent == other.parent
            && self.branch_label == other.branch_label
            && self.level == other.level
    }

    /// Every `<*`-increasing tuple of at most `n_max` nodes of a non-top
    /// level extends, on some higher level, to a `<*`-increasing tuple lying
    /// pointwise above it.
    pub fn is_weakly_saturated(&self, n_max: usize) -> Result<bool> {
        self.idx()?;
        if n_max == 0 {
            return Err(Error::Domain("n_max must be at least 1".into()));
        }
        for eps in 0..self.height.saturating_sub(1) {
            let nodes = self.level_nodes(eps);
            for n in 1..=n_max.min(nodes.len()) {
                let mut ok = true;
                for_each_combination(nodes.len(), n, &mut |pick| {
                    let tuple: Vec<Node> = pick.iter().map(|&i| nodes[i]).collect();
                    let found = (eps + 1..self.height).any(|zeta| self.extends_at(&tuple, zeta));
                    if !found {
                        ok = false;
                    }
                    ok
                });
                if !ok {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Greedy check for `t_0 <* ... <* t_{n-1}` on level `zeta` with each
    /// `t_k` above `tuple[k]`.
    fn extends_at(&self, tuple: &[Node], zeta: usize) -> bool {
        let level = self.level_nodes(zeta);
        let mut i = 0usize;
        for &s in tuple {
            while i < level.len() && self.anc(level[i], self.level[s]) != s {
                i += 1;
            }
            if i == level.len() {
                return false;
            }
            i += 1;
        }
        true
    }

    /// Check whether `map` (indexed by nodes of `self`) makes `self` a
    /// substructure of `big`. Returns the first failing clause, checking
    /// clause by clause over all pairs.
    pub fn subtree_violation(&self, big: &ExpandedTree, map: &[Node]) -> Result<Option<SubtreeClause>> {
        self.idx()?;
        big.idx()?;
        if map.len() != self.node_count() {
            return Err(Error::Precondition(format!(
                "node map has {} entries for {} nodes",
                map.len(),
                self.node_count()
            )));
        }
        let mut seen = vec![NONE; big.node_count()];
        for (v, &img) in map.iter().enumerate() {
            big.check_node(img)?;
            if seen[img] != NONE {
                return Err(Error::NotInjective { first: seen[img], second: v, image: img });
            }
            seen[img] = v;
        }
        let n = self.node_count();
        let pairs = || (0..n).flat_map(move |s| (0..n).map(move |t| (s, t)));
        if pairs().any(|(s, t)| self.is_ancestor(s, t) != big.is_ancestor(map[s], map[t])) {
            return Ok(Some(SubtreeClause::Order));
        }
        if pairs().any(|(s, t)| map[self.meet_unchecked(s, t)] != big.meet_unchecked(map[s], map[t])) {
            return Ok(Some(SubtreeClause::Meet));
        }
        if pairs().any(|(s, t)| self.branch_at(s, t) != big.branch_at(map[s], map[t])) {
            return Ok(Some(SubtreeClause::Branch));
        }
        if pairs().any(|(s, t)| self.star_less(s, t) != big.star_less(map[s], map[t])) {
            return Ok(Some(SubtreeClause::StarOrder));
        }
        if pairs().any(|(s, t)| (self.level[s] == self.level[t]) != (big.level[map[s]] == big.level[map[t]])) {
            return Ok(Some(SubtreeClause::Level));
        }
        Ok(None)
    }

    /// True iff `map` is an isomorphism of `self` onto a substructure of `big`.
    pub fn is_subtree(&self, big: &ExpandedTree, map: &[Node]) -> Result<bool> {
        Ok(self.subtree_violation(big, map)?.is_none())
    }

    /// Serialize to the line-oriented tree file format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("xtree-tree 1\n");
        s.push_str(&format!("height {}\n", self.height));
        s.push_str(&format!("branching {}\n", self.branching));
        s.push_str(&format!("node_count {}\n", self.node_count()));
        let opt = |x: Option<usize>| x.map_or_else(|| "-".to_string(), |v| v.to_string());
        for v in 0..self.node_count() {
            s.push_str(&format!(
                "node {} {} {} {} {}\n",
                v,
                opt(self.parent[v]),
                opt(self.branch_label[v]),
                self.level[v],
                self.level_rank[v]
            ));
        }
        s
    }

    /// Parse the tree file format written by [`ExpandedTree::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Parse { line: 0, message: format!("missing {what}") })
        };
        let (ln, magic) = next("header")?;
        if magic.trim() != "xtree-tree 1" {
            return Err(Error::Parse { line: ln + 1, message: format!("bad magic {magic:?}") });
        }
        let mut header = |key: &str| -> Result<usize> {
            let (ln, line) = next(key)?;
            let mut it = line.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some(k), Some(v), None) if k == key => v
                    .parse()
                    .map_err(|_| Error::Parse { line: ln + 1, message: format!("bad {key} value {v:?}") }),
                _ => Err(Error::Parse { line: ln + 1, message: format!("expected `{key} <value>`") }),
            }
        };
        let height = header("height")?;
        let branching = header("branching")?;
        let count = header("node_count")?;
        if count > MAX_NODES {
            return Err(Error::Parse { line: 4, message: format!("node_count exceeds {MAX_NODES}") });
        }
        let mut parent = Vec::with_capacity(count);
        let mut label = Vec::with_capacity(count);
        let mut level = Vec::with_capacity(count);
        let mut rank = Vec::with_capacity(count);
        for v in 0..count {
            let (ln, line) = next("node line")?;
            let err = |m: String| Error::Parse { line: ln + 1, message: m };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 6 || f[0] != "node" {
                return Err(err("expected `node <index> <parent|-> <label|-> <level> <rank>`".into()));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad number {s:?}")));
            let opt = |s: &str| if s == "-" { Ok(None) } else { num(s).map(Some) };
            if num(f[1])? != v {
                return Err(err(format!("expected node index {v}")));
            }
            parent.push(opt(f[2])?);
            label.push(opt(f[3])?);
            level.push(num(f[4])?);
            rank.push(num(f[5])?);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse { line: ln + 1, message: "trailing content".into() });
        }
        Self::from_parts(branching, height, parent, label, level, rank)
    }
}

/// Call `f` with each `k`-subset of `0..n` in lexicographic order until it
/// returns false.
pub(crate) fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] < i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

impl Ord for ExpandedTree {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.branching, self.height, &self.parent, &self.branch_label, &self.level, &self.level_rank).cmp(&(
            other.branching,
            other.height,
            &other.parent,
            &other.branch_label,
            &other.level,
            &other.level_rank,
        ))
    }
}

impl PartialOrd for ExpandedTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
