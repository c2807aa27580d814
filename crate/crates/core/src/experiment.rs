//! Deterministic experiment runs behind the command-line tool.
//!
//! Every report starts with a config record; [`rerun`] replays it and
//! produces the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::census::{census_partial, m_bullet_rows, verdict_table, Verdict, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::partition::check::{
    arrow_requirement, end_requirement, prime_requirement, search, square_requirement, ChainLink, CheckResult,
    Requirement,
};
use crate::partition::coloring::Domain;
use crate::partition::{
    check_arrow_all_colorings, compose_homogeneous_chain, Arity, Coloring, ColoringKind, Constraints,
};
use crate::tree::{ExpandedTree, LevelOrder};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const BUDGET_ENV: &str = "XTREE_BUDGET";

/// Budget from the environment, or the library default.
pub fn default_budget() -> u64 {
    std::env::var(BUDGET_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

macro_rules! string_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(Error::InvalidParameters(format!(
                        concat!("unknown ", stringify!($name), " {:?}; expected one of: "), s
                    ) + &[$($text),+].join(", "))),
                }
            }
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }
    };
}

string_enum!(Command { Build => "build", Census => "census", Check => "check" });

string_enum!(OrderKind { Lex => "lex", Reversed => "reversed", SeededShuffle => "seeded-shuffle" });

string_enum!(Format { Records => "records", Table => "table" });

string_enum!(
    /// The partition relation decided by `check`.
    Relation {
        Arrow => "arrow",
        ArrowAll => "arrow-all",
        End => "end",
        EndM => "end-m",
        Square => "square",
        Prime => "prime",
        PrimeUpTo => "prime-upto",
        Chain => "chain",
    }
);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Big tree: a file path or `canonical:<height>:<branching>:<order>[:<seed>]`.
    pub tree: Option<String>,
    /// Small tree for partition checks.
    pub tree2: Option<String>,
    /// Middle tree of a two-link chain.
    pub via: Option<String>,
    pub height: usize,
    pub branching: usize,
    pub order: OrderKind,
    pub relation: Relation,
    pub n: usize,
    pub k: usize,
    pub m: Option<usize>,
    pub sigma: u64,
    pub j: usize,
    pub arity_cap: usize,
    pub budget: u64,
    pub seed: u64,
    pub samples: u64,
    /// A coloring file or one of `constant`, `simtype`, `level`, `seeded`,
    /// `coherent`.
    pub coloring: Option<String>,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: Command::Census,
            tree: None,
            tree2: None,
            via: None,
            height: 4,
            branching: 2,
            order: OrderKind::Lex,
            relation: Relation::Arrow,
            n: 1,
            k: 1,
            m: None,
            sigma: 2,
            j: 1,
            arity_cap: 3,
            budget: DEFAULT_BUDGET,
            seed: 0,
            samples: 100,
            coloring: None,
            format: Format::Records,
        }
    }
}

const MAX_HEIGHT: usize = 22;
const MAX_N: usize = 12;
const MAX_CAP: usize = 6;

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameters(m));
        if self.command == Command::Build {
            if self.height == 0 || self.height > MAX_HEIGHT {
                return bad(format!("height must be in 1..={MAX_HEIGHT}"));
            }
            if self.branching < 2 {
                return bad("branching must be at least 2".into());
            }
        }
        if self.n > MAX_N {
            return bad(format!("n must be at most {MAX_N}"));
        }
        if self.arity_cap > MAX_CAP {
            return bad(format!("arity cap must be at most {MAX_CAP}"));
        }
        if self.sigma == 0 || self.j == 0 || self.budget == 0 {
            return bad("sigma, j and budget must be positive".into());
        }
        Ok(())
    }
}

/// Load a tree from a spec string.
pub fn load_tree(spec: &str) -> Result<ExpandedTree> {
    if let Some(rest) = spec.strip_prefix("canonical:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let bad = || Error::InvalidParameters(format!("bad tree spec {spec:?}"));
        if parts.len() < 3 || parts.len() > 4 {
            return Err(bad());
        }
        let h: usize = parts[0].parse().map_err(|_| bad())?;
        let b: usize = parts[1].parse().map_err(|_| bad())?;
        let seed: u64 = parts.get(3).map(|s| s.parse().map_err(|_| bad())).transpose()?.unwrap_or(0);
        let order = level_order(parts[2].parse()?, seed);
        return ExpandedTree::canonical_with(h, b, &order);
    }
    ExpandedTree::from_text(&std::fs::read_to_string(spec)?)
}

fn level_order(kind: OrderKind, seed: u64) -> LevelOrder {
    match kind {
        OrderKind::Lex => LevelOrder::Lex,
        OrderKind::Reversed => LevelOrder::Reversed,
        OrderKind::SeededShuffle => LevelOrder::Shuffled(seed),
    }
}

fn load_coloring(spec: &str, arity: Arity, cfg: &ExperimentConfig) -> Result<Coloring> {
    let kind = match spec {
        "constant" => return Ok(Coloring::constant(arity)),
        "simtype" => ColoringKind::SimType,
        "level" => ColoringKind::Level,
        "seeded" => ColoringKind::SeededHash(cfg.seed),
        "coherent" => ColoringKind::Coherent { seed: cfg.seed, free_levels: cfg.k },
        path => {
            let c = Coloring::from_text(&std::fs::read_to_string(path)?)?;
            return match (c.arity, arity) {
                (Arity::All, _) => Ok(c),
                (a, b) if a == b => Ok(c),
                (a, b) => Err(Error::ArityMismatch(format!("coloring has arity {a:?}, the check needs {b:?}"))),
            };
        }
    };
    Coloring::new(arity, cfg.sigma, kind)
}

/// Output of one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub text: String,
    /// A budget or size guard stopped the run early.
    pub guard_tripped: bool,
}

struct Writer {
    format: Format,
    text: String,
}

impl Writer {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let header = json!({ "record": "config", "tool": "xtree", "version": VERSION, "config": cfg });
        let mut text = String::new();
        match cfg.format {
            Format::Records if cfg.command != Command::Build => text.push_str(&to_line(&header)?),
            _ => {
                text.push_str("# config ");
                text.push_str(&to_line(&header)?);
            }
        }
        Ok(Writer { format: if cfg.command == Command::Build { Format::Table } else { cfg.format }, text })
    }

    /// Emit a record, or its table rendering.
    fn record(&mut self, kind: &str, body: Value, table: impl FnOnce(&mut String)) -> Result<()> {
        match self.format {
            Format::Records => {
                let mut v = json!({ "record": kind });
                if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
                    dst.extend(src);
                }
                self.text.push_str(&to_line(&v)?);
            }
            Format::Table => table(&mut self.text),
        }
        Ok(())
    }
}

fn to_line(v: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string(v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn to_value(v: &impl Serialize) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

fn required<'a>(field: &'a Option<String>, name: &str) -> Result<&'a str> {
    field.as_deref().ok_or_else(|| Error::InvalidParameters(format!("--{name} is required")))
}

/// Execute a config.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    match cfg.command {
        Command::Build => cmd_build(cfg),
        Command::Census => cmd_census(cfg),
        Command::Check => cmd_check(cfg),
    }
}

/// Recover the config embedded in a report and run it again.
pub fn rerun(report: &str) -> Result<Report> {
    run(&embedded_config(report)?)
}

pub fn embedded_config(report: &str) -> Result<ExperimentConfig> {
    let first = report.lines().next().ok_or_else(|| Error::Parse { line: 1, message: "empty report".into() })?;
    let json = first.strip_prefix("# config ").unwrap_or(first);
    let v: Value = serde_json::from_str(json).map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
    if v.get("record").and_then(Value::as_str) != Some("config") {
        return Err(Error::Parse { line: 1, message: "first line is not a config record".into() });
    }
    serde_json::from_value(v["config"].clone()).map_err(|e| Error::Parse { line: 1, message: e.to_string() })
}

fn cmd_build(cfg: &ExperimentConfig) -> Result<Report> {
    let tree = ExpandedTree::canonical_with(cfg.height, cfg.branching, &level_order(cfg.order, cfg.seed))?;
    let mut w = Writer::new(cfg)?;
    w.text.push_str(&tree.to_text());
    let violations = tree.validate(false);
    if violations.is_empty() {
        w.text.push_str("# validate ok\n");
    }
    for v in violations {
        let _ = writeln!(w.text, "# violation {v}");
    }
    Ok(Report { text: w.text, guard_tripped: false })
}

fn cmd_census(cfg: &ExperimentConfig) -> Result<Report> {
    let tree = load_tree(required(&cfg.tree, "tree")?)?;
    let mut w = Writer::new(cfg)?;
    let mut censuses = Vec::new();
    for n in 0..=cfg.n {
        let c = census_partial(&tree, n, cfg.budget)?;
        let complete = c.complete;
        w.record("census", to_value(&c)?, |s| {
            let by: Vec<String> = c.by_top_count.iter().map(|(k, v)| format!("{k}:{v}")).collect();
            let _ = writeln!(
                s,
                "census n={} types={} by_top=[{}] bound={} bound_ok={} lower_ok={} saturated={}{}",
                c.n,
                c.total_types,
                by.join(" "),
                c.upper_bound,
                c.bound_ok,
                c.lower_ok,
                c.saturated,
                if c.complete { "" } else { " PARTIAL" }
            );
        })?;
        censuses.push(c);
        if !complete {
            w.record("guard", json!({ "reason": "budget exceeded", "budget": cfg.budget, "n": n }), |s| {
                let _ = writeln!(s, "guard: budget {} exceeded at n={n}; counts are partial", cfg.budget);
            })?;
            return Ok(Report { text: w.text, guard_tripped: true });
        }
    }
    for row in m_bullet_rows(&censuses) {
        w.record("bullet_bound", to_value(&row)?, |s| {
            let step = row.step_bound.map_or("-".to_string(), |b| b.to_string());
            let _ = writeln!(s, "m_bullet n={} value={} step_bound={step} closed_bound={} ok={}", row.n, row.m_bullet, row.closed_bound, row.ok);
        })?;
    }
    let table = verdict_table(censuses)?;
    for r in &table.records {
        w.record("verdict", to_value(r)?, |s| {
            let verdict = match &r.verdict {
                Verdict::NoRule => "no-rule".to_string(),
                Verdict::Agree => "agree".to_string(),
                Verdict::Disagree => "DISAGREE".to_string(),
                Verdict::Conflict { resolved_by, consistent_rules } => {
                    format!("CONFLICT resolved_by={resolved_by} consistent=[{}]", consistent_rules.join(","))
                }
            };
            let rules: Vec<String> = r.rules.iter().map(|c| format!("{}={}", c.rule, c.value)).collect();
            let _ = writeln!(s, "m_star n={} k={} enumerated={} {verdict} rules=[{}]", r.n, r.k, r.enumerated, rules.join(" "));
        })?;
    }
    Ok(Report { text: w.text, guard_tripped: false })
}

fn check_body(result: &CheckResult) -> Result<Value> {
    Ok(json!({
        "holds": result.holds(),
        "witness": match &result.witness { Some(e) => to_value(e)?, None => json!("none") },
        "stats": result.stats,
        "constrained_groups": result.constrained_groups,
    }))
}

fn render_check(s: &mut String, relation: Relation, result: &CheckResult) {
    match &result.witness {
        Some(e) => {
            let _ = writeln!(s, "{}: witness level_map={:?} node_map={:?}", relation.as_str(), e.level_map, e.node_map);
        }
        None => {
            let _ = writeln!(s, "{}: no witness", relation.as_str());
        }
    }
    let st = result.stats;
    let _ = writeln!(
        s,
        "stats level_maps={} nodes_expanded={} prunes={} embeddings={} constrained_groups={}",
        st.level_maps, st.nodes_expanded, st.prunes, st.embeddings, result.constrained_groups
    );
}

fn cmd_check(cfg: &ExperimentConfig) -> Result<Report> {
    let t1 = load_tree(required(&cfg.tree, "tree")?)?;
    let t2 = load_tree(required(&cfg.tree2, "tree2")?)?;
    let mut w = Writer::new(cfg)?;
    let cap = cfg.arity_cap;
    let relation = cfg.relation;
    let coloring = |arity| load_coloring(required(&cfg.coloring, "coloring")?, arity, cfg);
    let single = |req: Requirement, c: &Coloring, domain: Domain| -> Result<CheckResult> {
        let bound = c.bind(&t1, domain)?;
        search(&t1, &t2, &req, &bound, &Constraints::default())
    };
    let result = match relation {
        Relation::Arrow => single(arrow_requirement(&t2, cfg.n)?, &coloring(Arity::Fixed(cfg.n))?, Domain::Eseq(cfg.n))?,
        Relation::End => single(end_requirement(&t2, cfg.k, None, cap)?, &coloring(Arity::All)?, Domain::EseqUpTo(cap))?,
        Relation::EndM => {
            let m = cfg.m.ok_or_else(|| Error::InvalidParameters("--m is required".into()))?;
            single(end_requirement(&t2, cfg.k, Some(m), cap)?, &coloring(Arity::All)?, Domain::EseqUpTo(cap))?
        }
        Relation::Square => {
            single(square_requirement(&t2, cfg.k, cfg.m, cfg.j, cap)?, &coloring(Arity::All)?, Domain::EseqUpTo(cap))?
        }
        Relation::Prime => single(prime_requirement(&t2, cfg.n, false)?, &coloring(Arity::Fixed(cfg.n))?, Domain::Seq(cfg.n))?,
        Relation::PrimeUpTo => single(prime_requirement(&t2, cfg.n, true)?, &coloring(Arity::All)?, Domain::SeqUpTo(cfg.n))?,
        Relation::ArrowAll => {
            let v = check_arrow_all_colorings(&t1, &t2, cfg.n, cfg.sigma, cfg.budget, cfg.samples, cfg.seed)?;
            w.record("sweep", to_value(&v)?, |s| {
                let _ = match &v {
                    crate::partition::SweepVerdict::Holds { tested, sampled } => {
                        writeln!(s, "arrow-all: holds tested={tested} sampled={sampled}")
                    }
                    crate::partition::SweepVerdict::Counterexample { tested, sampled, rows } => {
                        writeln!(s, "arrow-all: counterexample tested={tested} sampled={sampled} coloring={rows:?}")
                    }
                };
            })?;
            return Ok(Report { text: w.text, guard_tripped: false });
        }
        Relation::Chain => return chain(cfg, &t1, &t2, w),
    };
    w.record("check", { let mut b = check_body(&result)?; b["relation"] = json!(relation); b }, |s| {
        render_check(s, relation, &result)
    })?;
    Ok(Report { text: w.text, guard_tripped: false })
}

/// `tree2 → via → tree`: find per-link end(1, m) witnesses, then compose.
fn chain(cfg: &ExperimentConfig, top: &ExpandedTree, base: &ExpandedTree, mut w: Writer) -> Result<Report> {
    let mid = load_tree(required(&cfg.via, "via")?)?;
    let m = cfg.m.ok_or_else(|| Error::InvalidParameters("--m is required".into()))?;
    let cap = cfg.arity_cap;
    let c = load_coloring(required(&cfg.coloring, "coloring")?, Arity::All, cfg)?;
    let upper = {
        let bound = c.bind(top, Domain::EseqUpTo(cap))?;
        search(top, &mid, &end_requirement(&mid, 1, Some(m), cap)?, &bound, &Constraints::default())?
    };
    w.record("link", { let mut b = check_body(&upper)?; b["link"] = json!(1); b }, |s| {
        s.push_str("link 1 ");
        render_check(s, Relation::EndM, &upper);
    })?;
    let Some(g1) = upper.witness else {
        return Ok(Report { text: w.text, guard_tripped: false });
    };
    let pulled_rows: BTreeMap<Vec<usize>, u64> = (0..=cap)
        .map(|n| crate::eseq::enumerate_eseq(&mid, n).map(|it| it.map(|s| s.into_vec()).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .map(|t| {
            let col = c.color_of(top, &g1.apply(&t)).expect("bound coloring");
            (t, col)
        })
        .collect();
    let pulled = Coloring::new(Arity::All, c.sigma, ColoringKind::Table(pulled_rows))?;
    let lower = {
        let bound = pulled.bind(&mid, Domain::EseqUpTo(cap))?;
        search(&mid, base, &end_requirement(base, 1, Some(m), cap)?, &bound, &Constraints::default())?
    };
    w.record("link", { let mut b = check_body(&lower)?; b["link"] = json!(0); b }, |s| {
        s.push_str("link 0 ");
        render_check(s, Relation::EndM, &lower);
    })?;
    let Some(g0) = lower.witness else {
        return Ok(Report { text: w.text, guard_tripped: false });
    };
    let links = [
        ChainLink { lower: base, upper: &mid, embedding: g0 },
        ChainLink { lower: &mid, upper: top, embedding: g1 },
    ];
    let v = compose_homogeneous_chain(&links, m, &c, cap)?;
    w.record("chain", to_value(&v)?, |s| {
        let _ = writeln!(s, "chain: {}", serde_json::to_string(&v).unwrap_or_default());
    })?;
    Ok(Report { text: w.text, guard_tripped: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: Command) -> ExperimentConfig {
        ExperimentConfig { command, ..Default::default() }
    }

    #[test]
    fn build_is_deterministic_and_parseable() {
        let mut c = cfg(Command::Build);
        c.order = OrderKind::SeededShuffle;
        c.seed = 7;
        let a = run(&c).unwrap();
        assert_eq!(a, run(&c).unwrap());
        let t = ExpandedTree::from_text(&a.text).unwrap();
        assert_eq!(t.node_count(), 15);
        assert_eq!(rerun(&a.text).unwrap(), a);
        c.height = 0;
        assert!(matches!(run(&c), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn census_reports_and_guard() {
        let mut c = cfg(Command::Census);
        c.tree = Some("canonical:4:2:lex".into());
        c.n = 2;
        let r = run(&c).unwrap();
        assert!(!r.guard_tripped);
        assert!(r.text.contains(r#""n":2,"record":"census","saturated":true,"total_types":2"#), "{}", r.text);
        assert_eq!(rerun(&r.text).unwrap(), r);
        c.format = Format::Table;
        let t = run(&c).unwrap();
        assert!(t.text.contains("census n=1 types=1"));
        assert_eq!(rerun(&t.text).unwrap(), t);
        c.n = 5;
        c.budget = 1000;
        assert!(run(&c).unwrap().guard_tripped);
    }

    #[test]
    fn checks_run() {
        let mut c = cfg(Command::Check);
        c.tree = Some("canonical:3:2:lex".into());
        c.tree2 = Some("canonical:2:2:lex".into());
        c.coloring = Some("constant".into());
        for rel in [Relation::Arrow, Relation::End, Relation::Square, Relation::Prime, Relation::PrimeUpTo] {
            c.relation = rel;
            let r = run(&c).unwrap();
            assert!(r.text.contains(r#""holds":true"#), "{rel:?}: {}", r.text);
        }
        c.relation = Relation::ArrowAll;
        let r = run(&c).unwrap();
        assert!(r.text.contains("counterexample"));
        assert_eq!(rerun(&r.text).unwrap(), r);
        c.relation = Relation::Chain;
        c.tree = Some("canonical:4:2:lex".into());
        c.via = Some("canonical:3:2:lex".into());
        c.m = Some(2);
        c.coloring = Some("coherent".into());
        c.sigma = 1 << 30;
        c.k = 2;
        let r = run(&c).unwrap();
        assert!(r.text.contains(r#""verdict":"pass""#), "{}", r.text);
    }

    #[test]
    fn spec_strings() {
        assert_eq!(load_tree("canonical:3:2:seeded-shuffle:4").unwrap().node_count(), 7);
        assert!(load_tree("canonical:3:2").is_err());
        assert!(load_tree("canonical:3:2:sideways").is_err());
        assert!("tabular".parse::<Format>().is_err());
        assert_eq!("end-m".parse::<Relation>().unwrap(), Relation::EndM);
    }
}
