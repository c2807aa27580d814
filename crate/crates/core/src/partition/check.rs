//! Homogeneity requirements on a small tree and the searches that decide
//! them through embeddings into a larger colored tree.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::coloring::{all_tuples, fixed_positions, Coloring, ColoringKind, Colorer, Domain, IndexedColorer, Pullback};
use super::embedding::{for_each_embedding, Constraints, Embedding, SearchStats};
use crate::error::{Error, Result};
use crate::eseq::{enumerate_eseq, lev_set, sim_type_unchecked};
use crate::simtype::SimilarityType;
use crate::tree::{ExpandedTree, Node};

/// What an embedding `g` must satisfy for a coloring `c` of the big tree.
#[derive(Clone, Debug)]
pub enum Requirement {
    /// Every group must be monochromatic under `c ∘ g`.
    Monochrome(Vec<Vec<Vec<Node>>>),
    /// For every anchor, `c ∘ g` takes at most `j` colors on its set.
    AtMost { j: usize, sets: Vec<(Vec<Node>, Vec<Vec<Node>>)> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// A tuple of the small tree, the anchor for bounded-color requirements.
    pub first: Vec<Node>,
    /// A tuple that must share the color of `first`; empty for bounded-color
    /// requirements.
    pub second: Vec<Node>,
    pub colors: Vec<u64>,
}

impl Requirement {
    pub fn constrained_groups(&self) -> usize {
        match self {
            Requirement::Monochrome(g) => g.len(),
            Requirement::AtMost { sets, .. } => sets.len(),
        }
    }

    /// First violation under `c ∘ map`.
    pub fn violation<C: Colorer + ?Sized>(&self, c: &C, map: &[Node]) -> Option<Violation> {
        let pulled = Pullback { inner: c, map };
        match self {
            Requirement::Monochrome(groups) => {
                for group in groups {
                    let first = &group[0];
                    let c0 = pulled.color(first);
                    for other in &group[1..] {
                        let c1 = pulled.color(other);
                        if c1 != c0 {
                            return Some(Violation { first: first.clone(), second: other.clone(), colors: vec![c0, c1] });
                        }
                    }
                }
                None
            }
            Requirement::AtMost { j, sets } => {
                for (anchor, set) in sets {
                    let mut colors: Vec<u64> = set.iter().map(|t| pulled.color(t)).collect();
                    colors.sort_unstable();
                    colors.dedup();
                    if colors.len() > *j {
                        return Some(Violation { first: anchor.clone(), second: Vec::new(), colors });
                    }
                }
                None
            }
        }
    }
}

fn group_by<K: Ord>(tuples: impl IntoIterator<Item = (K, Vec<Node>)>) -> Vec<Vec<Vec<Node>>> {
    let mut map: BTreeMap<K, Vec<Vec<Node>>> = BTreeMap::new();
    for (k, t) in tuples {
        map.entry(k).or_default().push(t);
    }
    map.into_values().filter(|g| g.len() > 1).collect()
}

fn eseqs(tree: &ExpandedTree, n: usize) -> Result<Vec<Vec<Node>>> {
    Ok(enumerate_eseq(tree, n)?.map(|s| s.into_vec()).collect())
}

/// `eseq_n` grouped by similarity type.
pub fn arrow_requirement(small: &ExpandedTree, n: usize) -> Result<Requirement> {
    let tuples = eseqs(small, n)?;
    Ok(Requirement::Monochrome(group_by(tuples.into_iter().map(|t| (sim_type_unchecked(small, &t), t)))))
}

/// Entries whose position is fixed under end-`k` similarity, with positions.
fn fixed_entries(tree: &ExpandedTree, t: &[Node], k: usize) -> Vec<(usize, Node)> {
    fixed_positions(tree, t, k).into_iter().map(|l| (l, t[l])).collect()
}

/// `eseq_{<=cap}` grouped by (type, fixed entries); with `m`, only classes
/// with at most `m` fixed entries are constrained.
pub fn end_requirement(small: &ExpandedTree, k: usize, m: Option<usize>, cap: usize) -> Result<Requirement> {
    let mut keyed = Vec::new();
    for n in 0..=cap {
        for t in eseqs(small, n)? {
            let fixed = fixed_entries(small, &t, k);
            if m.is_some_and(|m| fixed.len() > m) {
                continue;
            }
            keyed.push(((sim_type_unchecked(small, &t), fixed), t));
        }
    }
    Ok(Requirement::Monochrome(group_by(keyed)))
}

/// All tuples of length `n` (or `1..=n`) grouped by tuple type.
pub fn prime_requirement(small: &ExpandedTree, n: usize, up_to: bool) -> Result<Requirement> {
    let lengths = if up_to { 1..=n } else { n..=n };
    let mut keyed: Vec<(SimilarityType, Vec<Node>)> = Vec::new();
    for len in lengths {
        for t in all_tuples(small.node_count(), len) {
            keyed.push((sim_type_unchecked(small, &t), t));
        }
    }
    Ok(Requirement::Monochrome(group_by(keyed)))
}

/// For each `ā ∈ eseq_{<=cap}` (with at most `m` fixed entries when given),
/// the weakly similar `b̄` agreeing with `ā` on its fixed entries.
pub fn square_requirement(small: &ExpandedTree, k: usize, m: Option<usize>, j: usize, cap: usize) -> Result<Requirement> {
    if j == 0 {
        return Err(Error::InvalidParameters("j must be at least 1".into()));
    }
    let mut sets = Vec::new();
    for n in 0..=cap {
        let all = eseqs(small, n)?;
        for a in &all {
            let fixed = fixed_entries(small, a, k);
            if m.is_some_and(|m| fixed.len() > m) {
                continue;
            }
            let set: Vec<Vec<Node>> = all
                .iter()
                .filter(|b| fixed.iter().all(|&(l, v)| b[l] == v) && weak_similar_unchecked(small, a, b))
                .cloned()
                .collect();
            if set.len() > j {
                sets.push((a.clone(), set));
            }
        }
    }
    Ok(Requirement::AtMost { j, sets })
}

/// Weak similarity: some permutation `π` carries level equalities of `a`
/// into those of `b` and preserves the strict tree order in both
/// directions. Sequences of different lengths are never weakly similar.
pub fn weak_similar(tree: &ExpandedTree, a: &[Node], b: &[Node]) -> Result<bool> {
    for &v in a.iter().chain(b) {
        tree.check_node(v)?;
    }
    Ok(weak_similar_unchecked(tree, a, b))
}

pub(crate) fn weak_similar_unchecked(tree: &ExpandedTree, a: &[Node], b: &[Node]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let n = a.len();
    let below = |s: Node, t: Node| s != t && tree.is_below_or_equal(s, t);
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn extend(
        i: usize,
        perm: &mut [usize],
        used: &mut [bool],
        ok: &dyn Fn(usize, usize, usize, usize) -> bool,
    ) -> bool {
        if i == perm.len() {
            return true;
        }
        for p in 0..perm.len() {
            if used[p] || !(0..i).all(|k| ok(i, p, k, perm[k])) {
                continue;
            }
            perm[i] = p;
            used[p] = true;
            if extend(i + 1, perm, used, ok) {
                return true;
            }
            used[p] = false;
        }
        false
    }
    let ok = |l: usize, pl: usize, k: usize, pk: usize| {
        let (al, ak, bl, bk) = (a[l], a[k], b[pl], b[pk]);
        (tree.level(al) != tree.level(ak) || tree.level(bl) == tree.level(bk))
            && below(al, ak) == below(bl, bk)
            && below(ak, al) == below(bk, bl)
    };
    extend(0, &mut perm, &mut used, &ok)
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub witness: Option<Embedding>,
    pub stats: SearchStats,
    pub constrained_groups: usize,
}

impl CheckResult {
    pub fn holds(&self) -> bool {
        self.witness.is_some()
    }
}

/// Search for an embedding of `small` into `big` satisfying `req` for `c`.
pub fn search<C: Colorer + ?Sized>(
    big: &ExpandedTree,
    small: &ExpandedTree,
    req: &Requirement,
    c: &C,
    constraints: &Constraints,
) -> Result<CheckResult> {
    let mut stats = SearchStats::default();
    let mut witness = None;
    for_each_embedding(small, big, constraints, &mut stats, &mut |e| {
        if req.violation(c, &e.node_map).is_none() {
            witness = Some(e.clone());
            false
        } else {
            true
        }
    })?;
    Ok(CheckResult { witness, stats, constrained_groups: req.constrained_groups() })
}

/// Check a given embedding against a requirement.
pub fn verify<C: Colorer + ?Sized>(
    big: &ExpandedTree,
    small: &ExpandedTree,
    g: &Embedding,
    req: &Requirement,
    c: &C,
) -> Result<Option<Violation>> {
    if !small.is_subtree(big, &g.node_map)? {
        return Err(Error::Precondition("the map is not an embedding".into()));
    }
    Ok(req.violation(c, &g.node_map))
}

/// `T1 → (T2)^n_σ` for one coloring: an embedding on which `c` depends only
/// on similarity type.
pub fn check_arrow(t1: &ExpandedTree, t2: &ExpandedTree, n: usize, c: &Coloring) -> Result<CheckResult> {
    let bound = c.bind(t1, Domain::Eseq(n))?;
    search(t1, t2, &arrow_requirement(t2, n)?, &bound, &Constraints::default())
}

/// End-`k` homogeneity over `eseq_{<=cap}`.
pub fn check_end_k(t1: &ExpandedTree, t2: &ExpandedTree, k: usize, c: &Coloring, cap: usize) -> Result<CheckResult> {
    let bound = c.bind(t1, Domain::EseqUpTo(cap))?;
    search(t1, t2, &end_requirement(t2, k, None, cap)?, &bound, &Constraints::default())
}

/// End-`(k, m)` homogeneity over `eseq_{<=cap}`.
pub fn check_end_k_m(
    t1: &ExpandedTree,
    t2: &ExpandedTree,
    k: usize,
    m: usize,
    c: &Coloring,
    cap: usize,
) -> Result<CheckResult> {
    let bound = c.bind(t1, Domain::EseqUpTo(cap))?;
    search(t1, t2, &end_requirement(t2, k, Some(m), cap)?, &bound, &Constraints::default())
}

/// Homogeneity for arbitrary `n`-tuples (or all lengths `1..=n`).
pub fn check_arrow_prime(
    t1: &ExpandedTree,
    t2: &ExpandedTree,
    n: usize,
    c: &Coloring,
    up_to: bool,
) -> Result<CheckResult> {
    let domain = if up_to { Domain::SeqUpTo(n) } else { Domain::Seq(n) };
    let bound = c.bind(t1, domain)?;
    search(t1, t2, &prime_requirement(t2, n, up_to)?, &bound, &Constraints::default())
}

/// The bounded-color square-bracket relation over `eseq_{<=cap}`.
#[allow(clippy::too_many_arguments)]
pub fn check_square_bracket(
    t1: &ExpandedTree,
    t2: &ExpandedTree,
    k: usize,
    m: Option<usize>,
    j: usize,
    c: &Coloring,
    cap: usize,
) -> Result<CheckResult> {
    let bound = c.bind(t1, Domain::EseqUpTo(cap))?;
    search(t1, t2, &square_requirement(t2, k, m, j, cap)?, &bound, &Constraints::default())
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SweepVerdict {
    /// Every tested coloring admits a homogeneous embedding.
    Holds { tested: u64, sampled: bool },
    /// A coloring with no homogeneous embedding, as explicit rows.
    Counterexample { tested: u64, sampled: bool, rows: Vec<(Vec<Node>, u64)> },
}

impl SweepVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, SweepVerdict::Holds { .. })
    }

    /// The counterexample as a coloring.
    pub fn coloring(&self, n: usize, sigma: u64) -> Option<Coloring> {
        match self {
            SweepVerdict::Counterexample { rows, .. } => Some(Coloring {
                arity: super::coloring::Arity::Fixed(n),
                sigma,
                kind: ColoringKind::Table(rows.iter().cloned().collect()),
            }),
            SweepVerdict::Holds { .. } => None,
        }
    }
}

/// `T1 → (T2)^n_σ` over every coloring of `eseq_n(T1)`, or over `samples`
/// seeded random colorings when `σ^N` exceeds `budget`.
pub fn check_arrow_all_colorings(
    t1: &ExpandedTree,
    t2: &ExpandedTree,
    n: usize,
    sigma: u64,
    budget: u64,
    samples: u64,
    seed: u64,
) -> Result<SweepVerdict> {
    if sigma == 0 {
        return Err(Error::InvalidParameters("sigma must be at least 1".into()));
    }
    let tuples = eseqs(t1, n)?;
    let req = arrow_requirement(t2, n)?;
    let index: HashMap<Vec<Node>, usize> = tuples.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let total = u32::try_from(tuples.len()).ok().and_then(|e| sigma.checked_pow(e)).filter(|&t| t <= budget);
    let mut colors = vec![0u64; tuples.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (count, sampled) = match total {
        Some(t) => (t, false),
        None => (samples, true),
    };
    for code in 0..count {
        if sampled {
            colors.iter_mut().for_each(|c| *c = rng.random_range(0..sigma));
        } else {
            let mut x = code;
            for c in colors.iter_mut() {
                *c = x % sigma;
                x /= sigma;
            }
        }
        let colorer = IndexedColorer { index: &index, colors: &colors };
        if !search(t1, t2, &req, &colorer, &Constraints::default())?.holds() {
            let rows = tuples.iter().cloned().zip(colors.iter().copied()).collect();
            return Ok(SweepVerdict::Counterexample { tested: code + 1, sampled, rows });
        }
    }
    Ok(SweepVerdict::Holds { tested: count, sampled })
}

/// One link `g: T_ℓ → T_{ℓ+1}` of an embedding chain.
#[derive(Clone, Debug)]
pub struct ChainLink<'a> {
    pub lower: &'a ExpandedTree,
    pub upper: &'a ExpandedTree,
    pub embedding: Embedding,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ChainVerdict {
    /// The composite is end-`(k, m)` homogeneous and homogeneous for every
    /// arity up to `m`.
    Pass { composed: Embedding },
    /// Link `link` is not end-`(1, m)` homogeneous for the pulled-back coloring.
    LinkFailed { link: usize, violation: Violation },
    /// The composite violates end-`(k, m)` homogeneity.
    EndFailed { composed: Embedding, violation: Violation },
    /// The composite is not homogeneous for `n`-sequences.
    ArityFailed { composed: Embedding, n: usize, violation: Violation },
}

/// Compose `T_0 → T_1 → … → T_k` and verify the composite for a coloring of
/// `T_k`, checking each link against the coloring pulled back along the
/// later links. `cap` bounds the sequence lengths examined.
pub fn compose_homogeneous_chain(chain: &[ChainLink<'_>], m: usize, c: &Coloring, cap: usize) -> Result<ChainVerdict> {
    let k = chain.len();
    if k == 0 {
        return Err(Error::InvalidParameters("empty chain".into()));
    }
    for (i, link) in chain.iter().enumerate() {
        if link.embedding.node_map.len() != link.lower.node_count()
            || link.embedding.node_map.iter().any(|&x| x >= link.upper.node_count())
        {
            return Err(Error::ChainMismatch { link: i, reason: "map does not fit the trees".into() });
        }
        if !link.lower.is_subtree(link.upper, &link.embedding.node_map)? {
            return Err(Error::ChainMismatch { link: i, reason: "map is not an embedding".into() });
        }
        if let Some(next) = chain.get(i + 1) {
            if link.upper != next.lower {
                return Err(Error::ChainMismatch { link: i, reason: "upper tree differs from the next lower tree".into() });
            }
        }
    }
    let top = chain[k - 1].upper;
    let bound = c.bind(top, Domain::EseqUpTo(cap))?;
    // maps from each T_ℓ into T_k
    let mut into_top: Vec<Vec<Node>> = vec![(0..top.node_count()).collect()];
    for link in chain.iter().rev() {
        let outer = into_top.last().expect("non-empty");
        into_top.push(link.embedding.node_map.iter().map(|&x| outer[x]).collect());
    }
    into_top.reverse();
    for (i, link) in chain.iter().enumerate() {
        let pulled = Pullback { inner: &bound, map: &into_top[i + 1] };
        let req = end_requirement(link.lower, 1, Some(m), cap)?;
        if let Some(violation) = req.violation(&pulled, &link.embedding.node_map) {
            return Ok(ChainVerdict::LinkFailed { link: i, violation });
        }
    }
    let base = chain[0].lower;
    let composed = chain.iter().skip(1).fold(chain[0].embedding.clone(), |g, l| g.then(&l.embedding));
    let req = end_requirement(base, k, Some(m), cap)?;
    if let Some(violation) = req.violation(&bound, &composed.node_map) {
        return Ok(ChainVerdict::EndFailed { composed, violation });
    }
    for n in 1..=m.min(cap) {
        if let Some(violation) = arrow_requirement(base, n)?.violation(&bound, &composed.node_map) {
            return Ok(ChainVerdict::ArityFailed { composed, n, violation });
        }
    }
    Ok(ChainVerdict::Pass { composed })
}

/// Levels of `Lev(ā)` strictly above each entry, for diagnostics.
pub fn levels_above(tree: &ExpandedTree, nodes: &[Node]) -> Vec<usize> {
    let levels = lev_set(tree, nodes);
    nodes.iter().map(|&v| levels.range(tree.level(v) + 1..).count()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::coloring::Arity;
    use crate::partition::embedding::find_embedding;
    use crate::tree::LevelOrder;

    fn lex(h: usize, b: usize) -> ExpandedTree {
        ExpandedTree::canonical_with(h, b, &LevelOrder::Lex).unwrap()
    }

    /// Brute force over every embedding and every tuple pair.
    fn arrow_oracle(t1: &ExpandedTree, t2: &ExpandedTree, n: usize, c: &Coloring) -> bool {
        let tuples = eseqs(t2, n).unwrap();
        let mut ok = false;
        for_each_embedding(t2, t1, &Constraints::default(), &mut SearchStats::default(), &mut |e| {
            let homogeneous = tuples.iter().all(|a| {
                tuples.iter().all(|b| {
                    sim_type_unchecked(t2, a) != sim_type_unchecked(t2, b)
                        || c.color_of(t1, &e.apply(a)) == c.color_of(t1, &e.apply(b))
                })
            });
            ok |= homogeneous;
            !ok
        })
        .unwrap();
        ok
    }

    #[test]
    fn arrow_agrees_with_oracle() {
        let t1 = lex(3, 2);
        let t2 = lex(2, 2);
        for seed in 0..20 {
            for n in 1..=2 {
                let c = Coloring::new(Arity::Fixed(n), 2, ColoringKind::SeededHash(seed)).unwrap();
                let r = check_arrow(&t1, &t2, n, &c).unwrap();
                assert_eq!(r.holds(), arrow_oracle(&t1, &t2, n, &c), "seed {seed} n {n}");
                if let Some(g) = r.witness {
                    assert!(t2.is_subtree(&t1, &g.node_map).unwrap());
                }
            }
        }
    }

    #[test]
    fn constant_coloring_always_homogeneous() {
        let t1 = lex(3, 2);
        let t2 = lex(2, 2);
        let c = Coloring::constant(Arity::All);
        assert!(check_end_k(&t1, &t2, 1, &c, 3).unwrap().holds());
        assert!(check_arrow_prime(&t1, &t2, 2, &c, true).unwrap().holds());
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let c = Coloring::new(Arity::Fixed(2), 2, ColoringKind::Level).unwrap();
        assert!(matches!(check_arrow(&lex(3, 2), &lex(2, 2), 1, &c), Err(Error::ArityMismatch(_))));
    }

    #[test]
    fn singleton_sweep_finds_hand_counterexample() {
        let (t1, t2) = (lex(3, 2), lex(2, 2));
        // root and <1> red; <0> blue; <00> red; the 1-side leaves blue
        let at = |s: &[usize]| t1.node_at(s).unwrap();
        let rows = BTreeMap::from([
            (vec![at(&[])], 0),
            (vec![at(&[0])], 1),
            (vec![at(&[1])], 0),
            (vec![at(&[0, 0])], 0),
            (vec![at(&[0, 1])], 1),
            (vec![at(&[1, 0])], 1),
            (vec![at(&[1, 1])], 1),
        ]);
        let c = Coloring::new(Arity::Fixed(1), 2, ColoringKind::Table(rows)).unwrap();
        assert!(!check_arrow(&t1, &t2, 1, &c).unwrap().holds());
        assert!(!arrow_oracle(&t1, &t2, 1, &c));

        let verdict = check_arrow_all_colorings(&t1, &t2, 1, 2, 1 << 20, 10, 0).unwrap();
        let found = verdict.coloring(1, 2).expect("a counterexample exists");
        assert!(!arrow_oracle(&t1, &t2, 1, &found));
        assert!(matches!(verdict, SweepVerdict::Counterexample { sampled: false, .. }));
        let one = check_arrow_all_colorings(&t1, &t2, 1, 1, 1 << 20, 10, 0).unwrap();
        assert!(matches!(one, SweepVerdict::Holds { tested: 1, sampled: false }));
    }

    #[test]
    fn sampling_kicks_in_over_budget() {
        let v = check_arrow_all_colorings(&lex(3, 2), &lex(2, 2), 1, 2, 10, 5, 1).unwrap();
        match v {
            SweepVerdict::Holds { tested, sampled } => assert!(sampled && tested == 5),
            SweepVerdict::Counterexample { tested, sampled, .. } => assert!(sampled && tested <= 5),
        }
    }

    #[test]
    fn weak_similarity() {
        let t = lex(3, 2);
        let r = t.root().unwrap();
        let (a, b) = (t.node_at(&[0]).unwrap(), t.node_at(&[1]).unwrap());
        assert!(weak_similar(&t, &[r, a], &[r, b]).unwrap());
        assert!(!crate::eseq::similar(&t, &[r, a], &[r, b]).unwrap());
        assert!(weak_similar(&t, &[a], &[b]).unwrap());
        assert!(!weak_similar(&t, &[a], &[a, b]).unwrap());
        assert!(!weak_similar(&t, &[r, a], &[a, b]).unwrap());
        assert!(weak_similar(&t, &[a, r], &[r, b]).unwrap());
        assert!(weak_similar(&t, &[99], &[0]).is_err());
    }

    #[test]
    fn square_bracket_with_j_one_implies_end() {
        let t1 = lex(4, 2);
        let t2 = lex(2, 2);
        let c = Coloring::new(Arity::All, 1 << 30, ColoringKind::Coherent { seed: 3, free_levels: 1 }).unwrap();
        assert!(check_end_k(&t1, &t2, 1, &c, 2).unwrap().holds());
        let sq = check_square_bracket(&t1, &t2, 1, None, 4, &c, 2).unwrap();
        let sq_full = check_square_bracket(&t1, &t2, 1, None, 1000, &c, 2).unwrap();
        assert!(sq_full.holds());
        assert!(sq.constrained_groups <= sq_full.constrained_groups || sq_full.constrained_groups == 0);
        assert!(check_square_bracket(&t1, &t2, 1, None, 0, &c, 2).is_err());
    }

    #[test]
    fn end_k_m_relaxes_end_k() {
        let t1 = lex(4, 2);
        let t2 = lex(2, 2);
        for seed in 0..10 {
            let c = Coloring::new(Arity::All, 2, ColoringKind::SeededHash(seed)).unwrap();
            let strict = check_end_k(&t1, &t2, 1, &c, 2).unwrap().holds();
            let relaxed = check_end_k_m(&t1, &t2, 1, 0, &c, 2).unwrap().holds();
            assert!(!strict || relaxed);
        }
    }

    #[test]
    fn chain_composition() {
        let (t0, t1, t2) = (lex(2, 2), lex(3, 2), lex(4, 2));
        let c = Coloring::new(Arity::All, 1 << 30, ColoringKind::Coherent { seed: 9, free_levels: 2 }).unwrap();
        let g1_search = check_end_k_m(&t2, &t1, 1, 2, &c, 3).unwrap();
        let g1 = g1_search.witness.expect("coherent colorings are end homogeneous");
        let pulled_rows: BTreeMap<Vec<Node>, u64> = (0..=3)
            .flat_map(|n| eseqs(&t1, n).unwrap())
            .map(|t| {
                let col = c.color_of(&t2, &g1.apply(&t)).unwrap();
                (t, col)
            })
            .collect();
        let pulled = Coloring::new(Arity::All, c.sigma, ColoringKind::Table(pulled_rows)).unwrap();
        let g0 = check_end_k_m(&t1, &t0, 1, 2, &pulled, 3).unwrap().witness.unwrap();
        let chain = [
            ChainLink { lower: &t0, upper: &t1, embedding: g0.clone() },
            ChainLink { lower: &t1, upper: &t2, embedding: g1.clone() },
        ];
        let v = compose_homogeneous_chain(&chain, 2, &c, 3).unwrap();
        assert!(matches!(v, ChainVerdict::Pass { .. }), "{v:?}");

        let bad = [
            ChainLink { lower: &t0, upper: &t1, embedding: g0 },
            ChainLink { lower: &t0, upper: &t2, embedding: find_embedding(&t0, &t2, &Constraints::default()).unwrap().unwrap() },
        ];
        assert!(matches!(compose_homogeneous_chain(&bad, 2, &c, 3), Err(Error::ChainMismatch { link: 0, .. })));
    }

    #[test]
    fn levels_above_counts() {
        let t = lex(3, 2);
        let r = t.root().unwrap();
        let x = t.node_at(&[1, 1]).unwrap();
        assert_eq!(levels_above(&t, &[r, x]), vec![1, 0]);
    }
}
