//! Colorings of node tuples and their text file format.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::eseq::{enumerate_eseq, lev_set, sim_type_unchecked};
use crate::tree::{ExpandedTree, Node};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arity {
    Fixed(usize),
    /// Every finite length, as needed by the end-homogeneity relations.
    All,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColoringKind {
    /// Explicit `tuple -> color` rows.
    Table(BTreeMap<Vec<Node>, u64>),
    /// A function of the similarity type only.
    SimType,
    /// Level of the last entry, modulo the number of colors.
    Level,
    /// Seeded hash of the node tuple.
    SeededHash(u64),
    /// Refines the similarity type by a seeded bit computed from the entries
    /// lying below the top `free_levels` levels of the tuple; insensitive to
    /// the other entries.
    Coherent { seed: u64, free_levels: usize },
}

/// Which tuples of a tree a coloring is evaluated on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// `eseq_n`.
    Eseq(usize),
    /// `eseq_{<=cap}`.
    EseqUpTo(usize),
    /// All `n`-tuples.
    Seq(usize),
    /// All tuples of length at most `n`.
    SeqUpTo(usize),
}

impl Domain {
    fn lengths(self) -> std::ops::RangeInclusive<usize> {
        match self {
            Domain::Eseq(n) | Domain::Seq(n) => n..=n,
            Domain::EseqUpTo(n) | Domain::SeqUpTo(n) => 0..=n,
        }
    }

    fn tuples(self, tree: &ExpandedTree) -> Result<Vec<Vec<Node>>> {
        let mut out = Vec::new();
        for n in self.lengths() {
            match self {
                Domain::Eseq(_) | Domain::EseqUpTo(_) => {
                    out.extend(enumerate_eseq(tree, n)?.map(|s| s.into_vec()));
                }
                Domain::Seq(_) | Domain::SeqUpTo(_) => out.extend(all_tuples(tree.node_count(), n)),
            }
        }
        Ok(out)
    }
}

/// All `n`-tuples over `0..count` in lexicographic order.
pub fn all_tuples(count: usize, n: usize) -> Vec<Vec<Node>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..count).map(move |v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// A color assignment evaluated on node tuples of one tree.
pub trait Colorer {
    fn color(&self, nodes: &[Node]) -> u64;
}

impl<C: Colorer + ?Sized> Colorer for &C {
    fn color(&self, nodes: &[Node]) -> u64 {
        (**self).color(nodes)
    }
}

/// `c ∘ g`: color a tuple by the color of its image.
pub struct Pullback<'a, C: ?Sized> {
    pub inner: &'a C,
    pub map: &'a [Node],
}

impl<C: Colorer + ?Sized> Colorer for Pullback<'_, C> {
    fn color(&self, nodes: &[Node]) -> u64 {
        let image: Vec<Node> = nodes.iter().map(|&v| self.map[v]).collect();
        self.inner.color(&image)
    }
}

/// A color table over an explicit tuple list; used when sweeping colorings.
pub struct IndexedColorer<'a> {
    pub index: &'a HashMap<Vec<Node>, usize>,
    pub colors: &'a [u64],
}

impl Colorer for IndexedColorer<'_> {
    fn color(&self, nodes: &[Node]) -> u64 {
        self.colors[self.index[nodes]]
    }
}

pub(crate) fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_tuple(seed: u64, nodes: &[Node]) -> u64 {
    let mut h = splitmix(seed ^ (nodes.len() as u64).rotate_left(32));
    for &v in nodes {
        h = splitmix(h ^ v as u64);
    }
    h
}

/// Positions `l` with at least `k` levels of the tuple strictly above
/// `lev(a_l)`: the entries an end-`k` coloring may depend on.
pub fn fixed_positions(tree: &ExpandedTree, nodes: &[Node], k: usize) -> Vec<usize> {
    let levels = lev_set(tree, nodes);
    (0..nodes.len())
        .filter(|&l| levels.range(tree.level(nodes[l]) + 1..).count() >= k)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    pub arity: Arity,
    pub sigma: u64,
    pub kind: ColoringKind,
}

impl Coloring {
    pub fn new(arity: Arity, sigma: u64, kind: ColoringKind) -> Result<Self> {
        if sigma == 0 {
            return Err(Error::InvalidParameters("a coloring needs at least one color".into()));
        }
        if let ColoringKind::Table(rows) = &kind {
            if let Some((t, c)) = rows.iter().find(|(_, &c)| c >= sigma) {
                return Err(Error::InvalidParameters(format!("row {t:?} has color {c} >= sigma {sigma}")));
            }
            if let Arity::Fixed(n) = arity {
                if let Some(t) = rows.keys().find(|t| t.len() != n) {
                    return Err(Error::ArityMismatch(format!("row {t:?} in a coloring of arity {n}")));
                }
            }
        }
        if let ColoringKind::Coherent { .. } = kind {
            if sigma < 2 {
                return Err(Error::InvalidParameters("coherent colorings need sigma >= 2".into()));
            }
        }
        Ok(Coloring { arity, sigma, kind })
    }

    /// The one-color coloring.
    pub fn constant(arity: Arity) -> Self {
        Coloring { arity, sigma: 1, kind: ColoringKind::SeededHash(0) }
    }

    /// Evaluate on `nodes` of `tree` without checking the domain.
    pub fn color_of(&self, tree: &ExpandedTree, nodes: &[Node]) -> Option<u64> {
        let s = self.sigma;
        Some(match &self.kind {
            ColoringKind::Table(rows) => *rows.get(nodes)?,
            ColoringKind::SimType => sim_type_unchecked(tree, nodes).digest() % s,
            ColoringKind::Level => nodes.last().map_or(0, |&v| tree.level(v) as u64 % s),
            ColoringKind::SeededHash(seed) => hash_tuple(*seed, nodes) % s,
            ColoringKind::Coherent { seed, free_levels } => {
                let fixed: Vec<Node> = fixed_positions(tree, nodes, *free_levels)
                    .into_iter()
                    .flat_map(|l| [l, nodes[l]])
                    .collect();
                let bit = hash_tuple(*seed, &fixed) & 1;
                let half = s / 2;
                (sim_type_unchecked(tree, nodes).digest() % half) * 2 + bit
            }
        })
    }

    /// Check arity compatibility and totality over `domain`, returning a
    /// [`Colorer`] for `tree`.
    pub fn bind<'a>(&'a self, tree: &'a ExpandedTree, domain: Domain) -> Result<BoundColoring<'a>> {
        if !tree.is_well_formed() {
            return Err(Error::MalformedTree("cannot color a malformed tree".into()));
        }
        if let Arity::Fixed(n) = self.arity {
            if domain.lengths() != (n..=n) {
                return Err(Error::ArityMismatch(format!(
                    "coloring of arity {n} used on tuples of length {:?}",
                    domain.lengths()
                )));
            }
        }
        if let ColoringKind::Table(rows) = &self.kind {
            for t in domain.tuples(tree)? {
                if !rows.contains_key(&t) {
                    return Err(Error::ArityMismatch(format!("coloring table has no row for {t:?}")));
                }
            }
            if let Some(t) = rows.keys().flatten().find(|&&v| v >= tree.node_count()) {
                return Err(Error::InvalidNode { node: *t, node_count: tree.node_count() });
            }
        }
        Ok(BoundColoring { coloring: self, tree })
    }

    /// Serialize to the coloring file format.
    pub fn to_text(&self) -> String {
        let mut s = String::from("xtree-coloring 1\n");
        match self.arity {
            Arity::Fixed(n) => {
                let _ = writeln!(s, "arity {n}");
            }
            Arity::All => s.push_str("arity all\n"),
        }
        let _ = writeln!(s, "sigma {}", self.sigma);
        match &self.kind {
            ColoringKind::Table(rows) => {
                s.push_str("kind table\n");
                for (t, c) in rows {
                    let nodes: Vec<String> = t.iter().map(|v| v.to_string()).collect();
                    let _ = writeln!(s, "row {} : {c}", nodes.join(" ")).map(|_| ());
                }
            }
            ColoringKind::SimType => s.push_str("kind simtype\n"),
            ColoringKind::Level => s.push_str("kind level\n"),
            ColoringKind::SeededHash(seed) => {
                let _ = write!(s, "kind seeded-hash\nseed {seed}\n");
            }
            ColoringKind::Coherent { seed, free_levels } => {
                let _ = write!(s, "kind coherent\nseed {seed}\nfree_levels {free_levels}\n");
            }
        }
        s.replace("row  :", "row :")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let err = |line: usize, m: &str| Error::Parse { line, message: m.to_string() };
        let mut it = lines.into_iter();
        let mut field = |key: &str| -> Result<(usize, String)> {
            let (ln, l) = it.next().ok_or_else(|| err(0, &format!("missing {key}")))?;
            match l.split_once(' ') {
                Some((k, v)) if k == key => Ok((ln, v.trim().to_string())),
                _ if key == "xtree-coloring" && l == "xtree-coloring 1" => Ok((ln, "1".into())),
                _ => Err(err(ln, &format!("expected `{key} ...`"))),
            }
        };
        let (ln, v) = field("xtree-coloring")?;
        if v != "1" {
            return Err(err(ln, "unsupported coloring version"));
        }
        let (ln, a) = field("arity")?;
        let arity = if a == "all" {
            Arity::All
        } else {
            Arity::Fixed(a.parse().map_err(|_| err(ln, "bad arity"))?)
        };
        let (ln, s) = field("sigma")?;
        let sigma: u64 = s.parse().map_err(|_| err(ln, "bad sigma"))?;
        let (ln, kind) = field("kind")?;
        let num = |field: &mut dyn FnMut(&str) -> Result<(usize, String)>, key: &str| -> Result<u64> {
            let (ln, v) = field(key)?;
            v.parse().map_err(|_| err(ln, &format!("bad {key}")))
        };
        let kind = match kind.as_str() {
            "simtype" => ColoringKind::SimType,
            "level" => ColoringKind::Level,
            "seeded-hash" => ColoringKind::SeededHash(num(&mut field, "seed")?),
            "coherent" => {
                let seed = num(&mut field, "seed")?;
                let free_levels = num(&mut field, "free_levels")? as usize;
                ColoringKind::Coherent { seed, free_levels }
            }
            "table" => {
                let mut rows = BTreeMap::new();
                while let Ok((ln, row)) = field("row") {
                    let (lhs, rhs) = row
                        .rsplit_once(':')
                        .or_else(|| row.strip_prefix(':').map(|r| ("", r)))
                        .ok_or_else(|| err(ln, "row needs `nodes : color`"))?;
                    let nodes = lhs
                        .split_whitespace()
                        .map(|x| x.parse::<Node>().map_err(|_| err(ln, "bad node")))
                        .collect::<Result<Vec<_>>>()?;
                    let c = rhs.trim().parse().map_err(|_| err(ln, "bad color"))?;
                    if rows.insert(nodes, c).is_some() {
                        return Err(err(ln, "duplicate row"));
                    }
                }
                ColoringKind::Table(rows)
            }
            _ => return Err(err(ln, &format!("unknown kind {kind:?}"))),
        };
        if let Some((ln, _)) = it.next() {
            return Err(err(ln, "trailing content"));
        }
        Coloring::new(arity, sigma, kind)
    }
}

/// A coloring checked against one tree and domain.
pub struct BoundColoring<'a> {
    coloring: &'a Coloring,
    tree: &'a ExpandedTree,
}

impl Colorer for BoundColoring<'_> {
    fn color(&self, nodes: &[Node]) -> u64 {
        self.coloring.color_of(self.tree, nodes).expect("bound coloring is total on its domain")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::LevelOrder;

    fn tree() -> ExpandedTree {
        ExpandedTree::canonical_with(3, 2, &LevelOrder::Lex).unwrap()
    }

    #[test]
    fn file_round_trip() {
        let rows = BTreeMap::from([(vec![0], 1), (vec![1], 0), (vec![2], 1)]);
        for c in [
            Coloring::new(Arity::Fixed(1), 2, ColoringKind::Table(rows)).unwrap(),
            Coloring::new(Arity::All, 3, ColoringKind::SimType).unwrap(),
            Coloring::new(Arity::Fixed(2), 5, ColoringKind::SeededHash(99)).unwrap(),
            Coloring::new(Arity::All, 1 << 20, ColoringKind::Coherent { seed: 4, free_levels: 1 }).unwrap(),
            Coloring::new(Arity::All, 2, ColoringKind::Table(BTreeMap::from([(vec![], 1)]))).unwrap(),
        ] {
            let text = c.to_text();
            let back = Coloring::from_text(&text).unwrap();
            assert_eq!(back, c, "{text}");
            assert_eq!(back.to_text(), text);
        }
        assert!(Coloring::from_text("xtree-coloring 1\narity 1\nsigma 2\nkind nope\n").is_err());
        assert!(Coloring::new(Arity::Fixed(1), 0, ColoringKind::Level).is_err());
    }

    #[test]
    fn binding_checks_domain() {
        let t = tree();
        let c = Coloring::new(Arity::Fixed(1), 2, ColoringKind::Table(BTreeMap::from([(vec![0], 1)]))).unwrap();
        assert!(matches!(c.bind(&t, Domain::Eseq(1)), Err(Error::ArityMismatch(_))));
        let c = Coloring::new(Arity::Fixed(2), 2, ColoringKind::Level).unwrap();
        assert!(matches!(c.bind(&t, Domain::Eseq(1)), Err(Error::ArityMismatch(_))));
        let c = Coloring::new(Arity::All, 2, ColoringKind::Level).unwrap();
        let b = c.bind(&t, Domain::EseqUpTo(3)).unwrap();
        assert_eq!(b.color(&[t.node_at(&[0, 1]).unwrap()]), 0);
        assert_eq!(b.color(&[t.node_at(&[0]).unwrap()]), 1);
    }

    #[test]
    fn fixed_positions_count_levels_above() {
        let t = tree();
        let r = t.root().unwrap();
        let a = t.node_at(&[0]).unwrap();
        let b = t.node_at(&[0, 1]).unwrap();
        assert_eq!(fixed_positions(&t, &[r, a, b], 1), vec![0, 1]);
        assert_eq!(fixed_positions(&t, &[r, a, b], 2), vec![0]);
        assert!(fixed_positions(&t, &[r, a, b], 3).is_empty());
        assert!(fixed_positions(&t, &[b], 1).is_empty());
    }

    #[test]
    fn coherent_refines_simtype() {
        let t = ExpandedTree::canonical_with(4, 2, &LevelOrder::Lex).unwrap();
        let c = Coloring::new(Arity::All, 1 << 40, ColoringKind::Coherent { seed: 1, free_levels: 1 }).unwrap();
        let mut seen: HashMap<u64, crate::SimilarityType> = HashMap::new();
        for n in 0..=3 {
            for s in enumerate_eseq(&t, n).unwrap() {
                let col = c.color_of(&t, s.nodes()).unwrap();
                let ty = sim_type_unchecked(&t, s.nodes());
                assert_eq!(seen.entry(col).or_insert_with(|| ty.clone()), &ty);
            }
        }
    }

    #[test]
    fn tuples_enumerated_lexicographically() {
        assert_eq!(all_tuples(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(all_tuples(3, 0), vec![Vec::<Node>::new()]);
    }
}
