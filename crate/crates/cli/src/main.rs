//! `suffcause` command line.
//!
//! Exit status: 0 when every requested check passes, 1 when a check fails or
//! a premise is violated, 2 on malformed input.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use suffcause::model::{parse_model, ModelFile};
use suffcause::report::{run, Flags};
use suffcause::{fixtures, scm::DEFAULT_BUDGET};

#[derive(Parser, Debug)]
#[command(name = "suffcause", version, about = "Sufficient-cause structures on binary causal DAGs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Canonical representation of each node's equation (or --node).
    Canonical(Common),
    /// Graph expanded by the sufficient-cause structure of --node.
    Expand(Common),
    /// d-separation of --x and --y given --given, with a witness path.
    Dsep(Common),
    /// Independence of --x and --y within the stratum --node=--stratum.
    StratumCi(Common),
    /// Edge monotonicity and pairwise association signs.
    Signs(Common),
    /// Sign conclusions for Cov(E1,E2|D) and, with --f/--g, Cov(F,G|D).
    Covsign(Common),
    /// Checks conclusions exactly, on the model or a seeded sweep.
    OracleCheck(Common),
    /// Lists the shipped figure fixtures.
    Fixtures,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Expect {
    Separated,
    Connected,
}

#[derive(Args, Debug)]
struct Common {
    /// Model file.
    model: Option<PathBuf>,
    /// Use a shipped fixture instead of a file (see `fixtures`).
    #[arg(long, conflicts_with = "model")]
    fixture: Option<String>,
    #[arg(long)]
    node: Option<String>,
    /// Comma-separated node list.
    #[arg(long, value_delimiter = ',')]
    x: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    y: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    given: Vec<String>,
    #[arg(long)]
    e1: Option<String>,
    #[arg(long)]
    e2: Option<String>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    g: Option<String>,
    #[arg(long, value_delimiter = ',')]
    q: Vec<String>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    stratum: Option<u8>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of enumerated worlds.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    /// Parameterizations per sweep.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Extra premise, in model-file syntax without `assert`. Repeatable.
    #[arg(long = "assert")]
    asserts: Vec<String>,
    /// Two-parent case to sweep (i..viii or all); no model needed.
    #[arg(long)]
    case: Option<String>,
    /// Expected verdict for dsep / stratum-ci.
    #[arg(long, value_enum)]
    expect: Option<Expect>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

impl Common {
    fn flags(&self) -> Flags {
        Flags {
            node: self.node.clone(),
            x: self.x.clone(),
            y: self.y.clone(),
            given: self.given.clone(),
            e1: self.e1.clone(),
            e2: self.e2.clone(),
            f: self.f.clone(),
            g: self.g.clone(),
            q: self.q.clone(),
            stratum: self.stratum,
            seed: self.seed,
            budget: self.budget,
            samples: self.samples,
            asserts: self.asserts.clone(),
            case: self.case.clone(),
            expect: self.expect.map(|e| e == Expect::Separated),
        }
    }

    fn load(&self) -> anyhow::Result<Option<ModelFile>> {
        if let Some(name) = &self.fixture {
            return Ok(Some(fixtures::load(name)?));
        }
        match &self.model {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let m = parse_model(&text).with_context(|| format!("in {}", path.display()))?;
                Ok(Some(m))
            }
            None => Ok(None),
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    let (name, common) = match &cli.command {
        Command::Fixtures => {
            for (name, text) in fixtures::FIXTURES {
                let title = text.lines().next().unwrap_or("").trim_start_matches('#').trim();
                println!("{name}\t{title}");
            }
            return Ok(true);
        }
        Command::Canonical(c) => ("canonical", c),
        Command::Expand(c) => ("expand", c),
        Command::Dsep(c) => ("dsep", c),
        Command::StratumCi(c) => ("stratum-ci", c),
        Command::Signs(c) => ("signs", c),
        Command::Covsign(c) => ("covsign", c),
        Command::OracleCheck(c) => ("oracle-check", c),
    };
    let model = common.load()?;
    if model.is_none() && !(name == "oracle-check" && common.case.is_some()) {
        bail!("`{name}` needs a model file or --fixture");
    }
    let report = run(name, model.as_ref(), &common.flags())?;
    match common.format {
        Format::Json => println!("{}", report.json()),
        Format::Text => print!("{}", report.text),
    }
    Ok(report.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
