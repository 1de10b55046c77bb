//! Command-line front end: config ingestion, dispatch and report rendering.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::classes::{parse_chern_list, parse_num_sequence, ChernClass, Lattice};
use crate::coefficients::{u_case_decomposition, u_coefficient};
use crate::error::{Error, Result};
use crate::hall::{assemble_epsilon_flat, compare_flat_nested, nested_expression};
use crate::invariants::{bss, hft_rank2, pair_invariant_rank1, InvariantResult};
use crate::lie::{DtTable, EulerPairing};
use crate::rational::{format, Rational};
use crate::stackcalc::{
    epsilon_02_normal_form, evaluation_tension, psi_constant_02, psi_constant_image_02, psi_delta_02_axiom,
};
use crate::verify::{selfcheck_all, Bounds};

pub const CONFIG_ENV: &str = "BP_WALLCROSS_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "bp-wallcross", version, about = "Exact wall-crossing coefficients and pair invariants")]
pub struct Cli {
    /// JSON config with lattice rank, DT table, pairing and targets.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Emit a JSON report.
    #[arg(long, global = true, conflicts_with = "text")]
    pub json: bool,
    /// Emit a plain-text report (default).
    #[arg(long, global = true)]
    pub text: bool,
    /// Worker threads for the parallel sweeps.
    #[arg(long, global = true, value_name = "THREADS")]
    pub parallel: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transformation coefficient U(α_1,…,α_n; τ•, τ̃) for a class sequence such as "(0,2),(1;0)".
    UCoeff { sequence: String },
    /// Per-case partial sums of U for two (0,1) entries at positions k < m of n.
    CaseSplit { n: usize, k: usize, m: usize },
    /// Flat and nested assemblies of ε̄^(β,d)(τ̃).
    Epsilon(EpsilonArgs),
    /// Reduce ε̄^(0,2)(τ•) to normal form and apply Ψ̃.
    StackReduce,
    /// Pair invariants from the configured DT table and pairing.
    Invariant(InvariantArgs),
    /// Run every audit.
    Verify {
        #[arg(long, default_value_t = 8)]
        nmax: usize,
    },
}

#[derive(Debug, Args)]
pub struct EpsilonArgs {
    /// Vector dimension d (1 or 2).
    #[arg(long, default_value_t = 2)]
    pub rank: u32,
    /// Sheaf parts, e.g. "(1,0),(0,1)".
    #[arg(long)]
    pub parts: String,
}

#[derive(Debug, Args)]
pub struct InvariantArgs {
    /// Target class β.
    #[arg(long, conflicts_with = "selector")]
    pub beta: Option<String>,
    /// Classes summed into one invariant, e.g. "(1,0),(0,1)".
    #[arg(long)]
    pub selector: Option<String>,
    /// Vector dimension d (1 or 2).
    #[arg(long, default_value_t = 2)]
    pub rank: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DtRecord {
    pub class: ChernClass,
    #[serde(with = "crate::rational::serde_str")]
    pub value: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub lattice_rank: usize,
    pub dt_table: Vec<DtRecord>,
    pub pairing: EulerPairing,
    #[serde(default)]
    pub targets: Vec<ChernClass>,
}

/// A validated config.
#[derive(Clone, Debug)]
pub struct Setup {
    pub lattice: Lattice,
    pub dt: DtTable,
    pub pairing: EulerPairing,
    pub targets: Vec<ChernClass>,
}

impl Default for Config {
    fn default() -> Self {
        let dt_table = crate::verify::sweep_pool()
            .into_iter()
            .map(|(class, value)| DtRecord { class, value })
            .collect();
        Config {
            lattice_rank: 2,
            dt_table,
            pairing: EulerPairing::GeometricLinear(vec![1, 2]),
            targets: vec![ChernClass(vec![1, 1]), ChernClass(vec![2, 1])],
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn validate(&self) -> Result<Setup> {
        let lattice = Lattice::new(self.lattice_rank)?;
        self.pairing.validate(&lattice)?;
        let dt = DtTable::new(&lattice, self.dt_table.iter().map(|r| (r.class.clone(), r.value.clone())))?;
        for t in &self.targets {
            lattice.check_effective(t)?;
        }
        Ok(Setup { lattice, dt, pairing: self.pairing.clone(), targets: self.targets.clone() })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Report {
    json: Value,
    text: String,
    ok: bool,
}

fn sequence_lattice(ranks: impl IntoIterator<Item = usize>) -> Result<Lattice> {
    let mut ranks = ranks.into_iter();
    let first = ranks.next().ok_or(Error::EmptySequence)?;
    let lattice = Lattice::new(first)?;
    for r in ranks {
        if r != first {
            return Err(Error::RankMismatch { expected: first, found: r });
        }
    }
    Ok(lattice)
}

fn invariant_json(r: &InvariantResult) -> Value {
    serde_json::to_value(r).unwrap_or(Value::Null)
}

fn invariant_text(r: &InvariantResult) -> String {
    let targets: Vec<String> = r.targets.iter().map(ToString::to_string).collect();
    let mut out = format!(
        "d={} targets=[{}] closed_form={} bracket_eval={} agree={}\n",
        r.d,
        targets.join(","),
        format(&r.closed_form),
        format(&r.bracket_eval),
        r.agree
    );
    for c in &r.per_decomposition {
        let parts: Vec<String> = c.parts.iter().map(ToString::to_string).collect();
        out.push_str(&format!(
            "  [{}] closed={} bracket={}\n",
            parts.join(","),
            format(&c.closed_form),
            format(&c.bracket_eval)
        ));
    }
    out
}

fn evaluate(setup: &Setup, beta: &ChernClass, d: u32) -> Result<InvariantResult> {
    setup.lattice.check_effective(beta)?;
    match d {
        1 => pair_invariant_rank1(beta, &setup.dt, &setup.pairing),
        2 => bss(beta, &setup.dt, &setup.pairing),
        other => Err(Error::UnsupportedRank(other)),
    }
}

fn dispatch(cli: &Cli) -> Result<Report> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let setup = config.validate()?;

    match &cli.command {
        Command::UCoeff { sequence } => {
            let seq = parse_num_sequence(sequence)?;
            sequence_lattice(seq.iter().map(|c| c.rank()))?.check_sequence(&seq)?;
            let u = u_coefficient(&seq)?;
            Ok(Report {
                json: json!({ "sequence": seq, "u": format(&u) }),
                text: format!("{}\n", format(&u)),
                ok: true,
            })
        }
        Command::CaseSplit { n, k, m } => {
            let s = u_case_decomposition(*n, *k, *m)?;
            let text = format!(
                "n={n} k={k} m={m}\nu1a={}\nu1b={}\nu2a={}\nu2b={}\nu3={}\ntotal={}\n",
                format(&s.u1a),
                format(&s.u1b),
                format(&s.u2a),
                format(&s.u2b),
                format(&s.u3),
                format(&s.total())
            );
            let mut json = serde_json::to_value(&s).unwrap_or(Value::Null);
            json["total"] = json!(format(&s.total()));
            Ok(Report { json, text, ok: true })
        }
        Command::Epsilon(args) => {
            let parts = parse_chern_list(&args.parts)?;
            let lattice = sequence_lattice(parts.iter().map(ChernClass::rank))?;
            let flat = assemble_epsilon_flat(&lattice, args.rank, &parts)?;
            let nested = nested_expression(&lattice, args.rank, &parts)?;
            let cmp = compare_flat_nested(&lattice, args.rank, &parts)?;
            let text = format!(
                "flat: {flat}\nnested: {nested}\nsummed over {} orderings: identical={}\n",
                cmp.orderings, cmp.identical
            );
            Ok(Report {
                json: json!({
                    "d": args.rank,
                    "parts": parts,
                    "flat": flat,
                    "nested_expression": nested.to_string(),
                    "nested": nested.expand(),
                    "over_orderings": cmp,
                }),
                text,
                ok: true,
            })
        }
        Command::StackReduce => {
            let nf = epsilon_02_normal_form();
            let image = psi_constant_image_02(setup.lattice.rank);
            let tension = evaluation_tension();
            let text = format!(
                "normal form: {nf}\npsi image: {image}\npsi(delta_(0,2)) axiom: {}\n",
                format(&psi_delta_02_axiom())
            );
            Ok(Report {
                json: json!({
                    "normal_form": nf,
                    "psi_coefficient": format(&psi_constant_02()),
                    "psi_image": image,
                    "psi_delta_02_axiom": format(&psi_delta_02_axiom()),
                    "evaluation_tension": tension,
                }),
                text,
                ok: true,
            })
        }
        Command::Invariant(args) => {
            let results = if let Some(beta) = &args.beta {
                vec![evaluate(&setup, &ChernClass::parse(beta)?, args.rank)?]
            } else if let Some(sel) = &args.selector {
                let selector = parse_chern_list(sel)?;
                for c in &selector {
                    setup.lattice.check_effective(c)?;
                }
                if args.rank != 2 {
                    return Err(Error::UnsupportedRank(args.rank));
                }
                vec![hft_rank2(&selector, &setup.dt, &setup.pairing)?]
            } else {
                setup
                    .targets
                    .iter()
                    .map(|b| evaluate(&setup, b, args.rank))
                    .collect::<Result<Vec<_>>>()?
            };
            let ok = results.iter().all(|r| r.agree);
            Ok(Report {
                json: Value::Array(results.iter().map(invariant_json).collect()),
                text: results.iter().map(invariant_text).collect(),
                ok,
            })
        }
        Command::Verify { nmax } => {
            let bounds = Bounds { n_max: *nmax, ..Bounds::default() };
            let summary = selfcheck_all(&bounds);
            Ok(Report {
                json: serde_json::to_value(&summary).unwrap_or(Value::Null),
                text: summary.render_text(),
                ok: summary.passed,
            })
        }
    }
}

fn render(cli: &Cli, report: Report) -> Outcome {
    let stdout = if cli.json {
        let mut s = serde_json::to_string_pretty(&report.json).unwrap_or_default();
        s.push('\n');
        s
    } else {
        report.text
    };
    Outcome { code: if report.ok { 0 } else { 1 }, stdout, stderr: String::new() }
}

/// Parses `args` (including the program name), runs the command and returns the rendered
/// report. Exit code 0 on success, 1 when a computed check fails, 2 on invalid input.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let msg = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: msg, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: msg }
            };
        }
    };
    let go = || match dispatch(&cli) {
        Ok(report) => render(&cli, report),
        Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {e}\n") },
    };
    match cli.parallel {
        Some(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(go),
            Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {e}\n") },
        },
        None => go(),
    }
}
