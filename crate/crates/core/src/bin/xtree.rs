use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xtree::experiment::{
    self, default_budget, Command, ExperimentConfig, Format, OrderKind, Relation, BUDGET_ENV,
};

#[derive(Parser)]
#[command(name = "xtree", version, about = "Expanded trees, type census and partition checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a canonical full tree and write it in the tree file format.
    Build {
        #[arg(long, default_value_t = 4)]
        height: usize,
        #[arg(long, default_value_t = 2)]
        branching: usize,
        #[arg(long, default_value = "lex")]
        order: OrderKind,
        #[command(flatten)]
        common: Common,
    },
    /// Count similarity types of embedded sequences and adjudicate the formulas.
    Census {
        #[arg(long)]
        tree: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Search for a homogeneous embedding of --tree2 into --tree.
    Check {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        tree2: String,
        /// Middle tree for `--relation chain`.
        #[arg(long)]
        via: Option<String>,
        #[arg(long, default_value = "arrow")]
        relation: Relation,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 2)]
        sigma: u64,
        #[arg(long, default_value_t = 1)]
        j: usize,
        #[arg(long, default_value_t = 3)]
        arity_cap: usize,
        /// Random colorings tried when the exhaustive sweep is over budget.
        #[arg(long, default_value_t = 100)]
        samples: u64,
        /// Coloring file, or one of constant, simtype, level, seeded, coherent.
        #[arg(long)]
        coloring: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Re-run the config embedded in a report.
    Rerun {
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, env = BUDGET_ENV)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "records")]
    format: Format,
}

fn config(cmd: Cmd) -> Result<(ExperimentConfig, Option<PathBuf>), xtree::Error> {
    let mut cfg = ExperimentConfig { budget: default_budget(), ..Default::default() };
    let common = match cmd {
        Cmd::Build { height, branching, order, common } => {
            cfg.command = Command::Build;
            cfg.height = height;
            cfg.branching = branching;
            cfg.order = order;
            common
        }
        Cmd::Census { tree, n, common } => {
            cfg.command = Command::Census;
            cfg.tree = Some(tree);
            cfg.n = n;
            common
        }
        Cmd::Check { tree, tree2, via, relation, n, k, m, sigma, j, arity_cap, samples, coloring, common } => {
            cfg = ExperimentConfig {
                command: Command::Check,
                tree: Some(tree),
                tree2: Some(tree2),
                via,
                relation,
                n,
                k,
                m,
                sigma,
                j,
                arity_cap,
                samples,
                coloring,
                ..cfg
            };
            common
        }
        Cmd::Rerun { report, out } => {
            let text = std::fs::read_to_string(report)?;
            return Ok((experiment::embedded_config(&text)?, out));
        }
    };
    if let Some(b) = common.budget {
        cfg.budget = b;
    }
    cfg.seed = common.seed;
    cfg.format = common.format;
    Ok((cfg, common.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config(cli.command).and_then(|(cfg, out)| {
        let report = experiment::run(&cfg)?;
        match out {
            Some(path) => std::fs::write(path, &report.text)?,
            None => print!("{}", report.text),
        }
        Ok(report.guard_tripped)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e @ xtree::Error::BudgetExceeded { .. }) => {
            eprintln!("xtree: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("xtree: {e}");
            ExitCode::from(1)
        }
    }
}
