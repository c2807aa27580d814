//! Census of similarity types of embedded sequences, and adjudication of the
//! closed bounds and recurrences for their counts against enumeration.
//!
//! `m•_n` is the number of types of length-`n` embedded sequences (prefixes
//! of embedded sequences are embedded sequences, so this is the number of
//! types over `eseq_n`). `m*_{n,k}` counts those types with exactly `k`
//! entries on the maximal level.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eseq::enumerate_eseq;
use crate::simtype::SimilarityType;
use crate::tree::ExpandedTree;

/// Default cap on candidate extensions examined by one enumeration.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// One closed-form comparison inside a [`CensusReport`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormulaComparison {
    pub name: String,
    /// `"="`, `"<="` or `">="`: how the enumerated value must relate to the
    /// formula value.
    pub relation: String,
    pub formula: Count,
    pub enumerated: u64,
    pub agree: bool,
}

/// Saturating 128-bit count; `Count::MAX` stands for "does not fit".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Count(pub u128);

impl Count {
    pub const MAX: Count = Count(u128::MAX);

    fn pow2(e: u64) -> Count {
        if e >= 128 {
            Count::MAX
        } else {
            Count(1u128 << e)
        }
    }

    fn mul(self, o: Count) -> Count {
        Count(self.0.saturating_mul(o.0))
    }

    fn add(self, o: Count) -> Count {
        Count(self.0.saturating_add(o.0))
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Count::MAX {
            f.write_str("overflow")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Count {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusReport {
    pub n: usize,
    pub total_types: u64,
    /// `k ↦ m*_{n,k}`.
    pub by_top_count: BTreeMap<usize, u64>,
    pub upper_bound: Count,
    pub bound_ok: bool,
    pub lower_ok: bool,
    pub formula_comparisons: Vec<FormulaComparison>,
    pub eseq_count: u64,
    pub visited: u64,
    /// Weakly saturated up to tuples of length `n`; counts on other trees
    /// may depend on the tree.
    pub saturated: bool,
    /// False when the enumeration budget ran out and counts are partial.
    pub complete: bool,
}

fn factorial(n: usize) -> Count {
    (1..=n as u128).fold(Count(1), |acc, x| acc.mul(Count(x)))
}

fn binomial(n: usize, k: usize) -> Count {
    if k > n {
        return Count(0);
    }
    let mut r: u128 = 1;
    for i in 0..k as u128 {
        r = r * (n as u128 - i) / (i + 1);
    }
    Count(r)
}

/// `2^{2n²+n}`.
pub fn type_upper_bound(n: usize) -> Count {
    let n = n as u64;
    Count::pow2(2 * n * n + n)
}

/// `4^{n-1} (n-1)!` for `n >= 1`.
pub fn m_bullet_closed_bound(n: usize) -> Count {
    assert!(n >= 1);
    Count::pow2(2 * (n as u64 - 1)).mul(factorial(n - 1))
}

fn run_census(tree: &ExpandedTree, n: usize, budget: u64) -> Result<CensusReport> {
    let mut types: BTreeSet<SimilarityType> = BTreeSet::new();
    let mut it = enumerate_eseq(tree, n)?;
    let mut eseq_count = 0u64;
    let mut complete = true;
    loop {
        let next = it.next();
        if it.visited() > budget {
            complete = false;
            break;
        }
        match next {
            Some(s) => {
                eseq_count += 1;
                types.insert(SimilarityType::of_eseq(tree, &s));
            }
            None => break,
        }
    }
    let mut by_top_count = BTreeMap::new();
    for t in &types {
        *by_top_count.entry(t.top_count()).or_insert(0u64) += 1;
    }
    let total = types.len() as u64;
    let upper = type_upper_bound(n);
    let mut formula_comparisons = vec![
        FormulaComparison {
            name: "upper_bound_2^(2n^2+n)".into(),
            relation: "<=".into(),
            formula: upper,
            enumerated: total,
            agree: Count(total as u128) <= upper,
        },
        FormulaComparison {
            name: "lower_bound_n".into(),
            relation: ">=".into(),
            formula: Count(n as u128),
            enumerated: total,
            agree: total >= n as u64,
        },
    ];
    if n <= 1 {
        formula_comparisons.push(FormulaComparison {
            name: "m_bullet_base".into(),
            relation: "=".into(),
            formula: Count(1),
            enumerated: total,
            agree: total == 1,
        });
    }
    if n >= 1 {
        let closed = m_bullet_closed_bound(n);
        formula_comparisons.push(FormulaComparison {
            name: "m_bullet_closed_4^(n-1)(n-1)!".into(),
            relation: "<=".into(),
            formula: closed,
            enumerated: total,
            agree: Count(total as u128) <= closed,
        });
    }
    Ok(CensusReport {
        n,
        total_types: total,
        by_top_count,
        upper_bound: upper,
        bound_ok: Count(total as u128) <= upper,
        lower_ok: total >= n as u64,
        formula_comparisons,
        eseq_count,
        visited: it.visited(),
        saturated: n == 0 || tree.is_weakly_saturated(n)?,
        complete,
    })
}

/// Enumerate `eseq_n(tree)` and bucket by similarity type. Fails once more
/// than `budget` candidate extensions have been examined.
pub fn census(tree: &ExpandedTree, n: usize, budget: u64) -> Result<CensusReport> {
    let r = run_census(tree, n, budget)?;
    if r.complete {
        Ok(r)
    } else {
        Err(Error::BudgetExceeded { budget })
    }
}

/// As [`census`], but returns the partial counts (with `complete = false`)
/// instead of failing when the budget runs out.
pub fn census_partial(tree: &ExpandedTree, n: usize, budget: u64) -> Result<CensusReport> {
    run_census(tree, n, budget)
}

/// One row of [`m_bullet_bound_check`]: the bounds on `m•_n` given
/// `m•_{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BulletCheck {
    pub n: usize,
    pub m_bullet: u64,
    /// `4(n-1) · m•_{n-1}`, absent for `n = 1`.
    pub step_bound: Option<Count>,
    pub closed_bound: Count,
    pub ok: bool,
}

/// Check the one-step bound `m•_{n+1} <= 4n m•_n` and the closed bound
/// `m•_n <= 4^{n-1}(n-1)!` for `1 <= n <= n_max`.
pub fn m_bullet_bound_check(tree: &ExpandedTree, n_max: usize, budget: u64) -> Result<Vec<BulletCheck>> {
    let censuses = (0..=n_max).map(|n| census(tree, n, budget)).collect::<Result<Vec<_>>>()?;
    Ok(m_bullet_rows(&censuses))
}

/// [`m_bullet_bound_check`] over censuses for `n = 0, 1, ...` in order.
pub fn m_bullet_rows(censuses: &[CensusReport]) -> Vec<BulletCheck> {
    let mut rows = Vec::new();
    for w in censuses.windows(2) {
        let (prev, m, n) = (w[0].total_types, w[1].total_types, w[1].n);
        let step_bound = (n >= 2).then(|| Count(4 * (n as u128 - 1)).mul(Count(prev as u128)));
        let closed_bound = m_bullet_closed_bound(n);
        let mc = Count(m as u128);
        let ok = mc <= closed_bound && step_bound.is_none_or(|b| mc <= b) && (n != 1 || m == 1);
        rows.push(BulletCheck { n, m_bullet: m, step_bound, closed_bound, ok });
    }
    rows
}

/// The rules for `m*_{n,k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StarRule {
    /// `m*_{1,1} = 1`.
    BaseOneOne,
    /// `m*_{1,0} = 0`.
    BaseOneZero,
    /// `m*_{0,k} = 0`, stipulated.
    BaseZero,
    /// `n = k >= 1` gives 1.
    Diagonal,
    /// `2k - 1 > n >= k >= 1` gives 0.
    TooManyTop,
    /// `m*_{n+1,1} = Σ_{k ∈ [1,n]} 2k · m*_{n,k}`.
    TopOneRecurrence,
    /// The general `m*_{n+k,k}` summation over `ℓ = ℓ0+ℓ1+ℓ2`, read
    /// literally.
    GeneralLiteral,
    /// The general summation with the additional constraint `ℓ1 + 2ℓ2 = k`.
    GeneralProse,
}

impl StarRule {
    pub fn name(self) -> &'static str {
        match self {
            StarRule::BaseOneOne => "base_1_1",
            StarRule::BaseOneZero => "base_1_0",
            StarRule::BaseZero => "base_0_k",
            StarRule::Diagonal => "diagonal_n_eq_k",
            StarRule::TooManyTop => "too_many_top_2k-1_gt_n",
            StarRule::TopOneRecurrence => "top_one_recurrence",
            StarRule::GeneralLiteral => "general_literal",
            StarRule::GeneralProse => "general_prose",
        }
    }

    /// The general summations are evaluated but never treated as
    /// established.
    pub fn experimental(self) -> bool {
        matches!(self, StarRule::GeneralLiteral | StarRule::GeneralProse)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RuleValue {
    pub rule: StarRule,
    pub value: Count,
}

/// All rules applicable at one `(n, k)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FormulaEvaluation {
    pub rules: Vec<RuleValue>,
}

/// Outcome of the established (non-experimental) rules at one `(n, k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormulaOutcome {
    Inapplicable,
    Value(Count),
    Conflict(Vec<RuleValue>),
}

impl FormulaEvaluation {
    pub fn established(&self) -> impl Iterator<Item = &RuleValue> {
        self.rules.iter().filter(|r| !r.rule.experimental())
    }

    pub fn experimental(&self) -> impl Iterator<Item = &RuleValue> {
        self.rules.iter().filter(|r| r.rule.experimental())
    }

    pub fn outcome(&self) -> FormulaOutcome {
        let est: Vec<RuleValue> = self.established().copied().collect();
        match est.first() {
            None => FormulaOutcome::Inapplicable,
            Some(first) if est.iter().all(|r| r.value == first.value) => FormulaOutcome::Value(first.value),
            Some(_) => FormulaOutcome::Conflict(est),
        }
    }
}

fn lookup(lower: &BTreeMap<(usize, usize), u128>, n: usize, k: usize) -> Result<Count> {
    match lower.get(&(n, k)) {
        Some(&v) => Ok(Count(v)),
        // No type has zero entries on its maximal level.
        None if k == 0 => Ok(Count(0)),
        None => Err(Error::MissingValue { n, k }),
    }
}

fn general_sum(
    lower: &BTreeMap<(usize, usize), u128>,
    n: usize,
    k: usize,
    prose: bool,
) -> Result<Count> {
    let mut total = Count(0);
    for l in 0..n {
        let m = lookup(lower, n, l)?;
        for l0 in 0..n {
            for l1 in 0..n {
                for l2 in 0..n {
                    if l0 + l1 + l2 != l || (prose && l1 + 2 * l2 != k) {
                        continue;
                    }
                    let term = factorial(l)
                        .mul(binomial(l, l1))
                        .mul(binomial(l - l1, l2))
                        .mul(Count::pow2(l as u64))
                        .mul(m);
                    total = total.add(term);
                }
            }
        }
    }
    Ok(total)
}

/// Evaluate every rule that applies to `m*_{n,k}`, reading referenced lower
/// values from `lower_values`. `m*_{n',0}` defaults to 0 when absent.
pub fn m_star_formula(
    n: usize,
    k: usize,
    lower_values: &BTreeMap<(usize, usize), u128>,
) -> Result<FormulaEvaluation> {
    let mut rules = Vec::new();
    let mut push = |rule, value| rules.push(RuleValue { rule, value });
    if (n, k) == (1, 1) {
        push(StarRule::BaseOneOne, Count(1));
    }
    if (n, k) == (1, 0) {
        push(StarRule::BaseOneZero, Count(0));
    }
    if n == 0 {
        push(StarRule::BaseZero, Count(0));
    }
    if n == k && k >= 1 {
        push(StarRule::Diagonal, Count(1));
    }
    if k >= 1 && n >= k && 2 * k - 1 > n {
        push(StarRule::TooManyTop, Count(0));
    }
    if k == 1 && n >= 2 {
        let prev = n - 1;
        let mut sum = Count(0);
        for j in 1..=prev {
            sum = sum.add(Count(2 * j as u128).mul(lookup(lower_values, prev, j)?));
        }
        push(StarRule::TopOneRecurrence, sum);
    }
    if k >= 1 && n > 2 * k {
        let base = n - k;
        push(StarRule::GeneralLiteral, general_sum(lower_values, base, k, false)?);
        push(StarRule::GeneralProse, general_sum(lower_values, base, k, true)?);
    }
    Ok(FormulaEvaluation { rules })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleCheck {
    pub rule: String,
    pub value: Count,
    pub agrees: bool,
    pub experimental: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// No established rule covers this entry.
    NoRule,
    Agree,
    Disagree,
    /// Established rules disagree with each other; the enumerated value
    /// decides which of them holds.
    Conflict { resolved_by: u64, consistent_rules: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerdictRecord {
    pub n: usize,
    pub k: usize,
    pub enumerated: u64,
    pub rules: Vec<RuleCheck>,
    pub verdict: Verdict,
    pub tree_limited: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerdictTable {
    pub n_max: usize,
    pub censuses: Vec<CensusReport>,
    pub records: Vec<VerdictRecord>,
}

impl VerdictTable {
    pub fn record(&self, n: usize, k: usize) -> Option<&VerdictRecord> {
        self.records.iter().find(|r| r.n == n && r.k == k)
    }
}

/// Compare enumerated `m*_{n,k}` against every applicable rule for
/// `1 <= n <= n_max`, `0 <= k <= n`. Rules are fed enumerated lower values,
/// so each record checks one step of the recurrences.
pub fn formula_vs_enumeration(tree: &ExpandedTree, n_max: usize, budget: u64) -> Result<VerdictTable> {
    let censuses = (0..=n_max).map(|n| census(tree, n, budget)).collect::<Result<Vec<_>>>()?;
    verdict_table(censuses)
}

/// [`formula_vs_enumeration`] from complete censuses for `n = 0..=n_max`.
pub fn verdict_table(censuses: Vec<CensusReport>) -> Result<VerdictTable> {
    if censuses.is_empty() || censuses.iter().enumerate().any(|(i, c)| c.n != i || !c.complete) {
        return Err(Error::Precondition("need complete censuses for n = 0, 1, ...".into()));
    }
    let n_max = censuses.len() - 1;
    let mut lower: BTreeMap<(usize, usize), u128> = BTreeMap::new();
    for c in &censuses {
        for k in 0..=c.n {
            lower.insert((c.n, k), u128::from(c.by_top_count.get(&k).copied().unwrap_or(0)));
        }
    }
    let mut records = Vec::new();
    for n in 1..=n_max {
        let limited = !censuses[n].saturated;
        for k in 0..=n {
            let enumerated = lower[&(n, k)] as u64;
            let eval = m_star_formula(n, k, &lower)?;
            let e = Count(u128::from(enumerated));
            let rules: Vec<RuleCheck> = eval
                .rules
                .iter()
                .map(|r| RuleCheck {
                    rule: r.rule.name().into(),
                    value: r.value,
                    agrees: r.value == e,
                    experimental: r.rule.experimental(),
                })
                .collect();
            let verdict = match eval.outcome() {
                FormulaOutcome::Inapplicable => Verdict::NoRule,
                FormulaOutcome::Value(v) if v == e => Verdict::Agree,
                FormulaOutcome::Value(_) => Verdict::Disagree,
                FormulaOutcome::Conflict(rs) => Verdict::Conflict {
                    resolved_by: enumerated,
                    consistent_rules: rs.iter().filter(|r| r.value == e).map(|r| r.rule.name().into()).collect(),
                },
            };
            records.push(VerdictRecord { n, k, enumerated, rules, verdict, tree_limited: limited });
        }
    }
    Ok(VerdictTable { n_max, censuses, records })
}
