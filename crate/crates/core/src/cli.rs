//! Command-line front end. `run` does all the work and returns the text for
//! standard output and standard error, so it can be driven from tests.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::autom::{Endo, OuterAutomorphism};
use crate::cmt::{load_or_build, CmtGenerator};
use crate::cvmetric::{displacement, MarkedMetricGraph};
use crate::decide::{conjugacy_irreducible, detect_irreducible, Context, Verdict};
use crate::error::{Error, Result};
use crate::stallings::{subgroup_graph, visibly_reducible};
use crate::words::{FreeWord, Letter};
use crate::Rational;

pub const CACHE_ENV: &str = "OUTFN_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(name = "outfn", version, about = "Outer automorphisms of free groups")]
pub struct Cli {
    /// Emit one JSON record instead of human-readable text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for closure expansion.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Directory for cached CMT generator sets (also read from OUTFN_CACHE_DIR).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print ‖φ‖ for the standard basis.
    Norm { aut: String },
    /// Check whether the given basis images define an automorphism.
    IsAut { aut: String },
    /// Decide conjugacy of two irreducible outer automorphisms.
    Conjugate {
        phi: String,
        psi: String,
        #[arg(long)]
        mu: Option<String>,
        /// Run the irreducibility test on both inputs first.
        #[arg(long)]
        check_irreducible: bool,
    },
    /// Decide irreducibility.
    Irreducible {
        aut: String,
        #[arg(long)]
        mu: Option<String>,
    },
    /// Displacement Λ(X, φX) at a marked metric graph (default: uniform rose).
    Displacement {
        aut: String,
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// List the CMT generators of the given rank.
    CmtGens { rank: usize },
    /// Fold the subgroup generated by comma- or space-separated words.
    Fold { words: Vec<String> },
    /// Search for a visibly reducible basis partition.
    VisiblyReducible { aut: String },
}

/// Settings shared by every command.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub structured: bool,
    pub threads: usize,
    pub cache_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn parse_automorphism(text: &str) -> Result<Endo> {
    Endo::parse(text)
}

fn parse_outer(text: &str) -> Result<OuterAutomorphism> {
    OuterAutomorphism::new(parse_automorphism(text)?)
}

fn parse_mu(text: Option<&str>) -> Result<Option<Rational>> {
    text.map(|t| t.trim().parse::<Rational>().map_err(|_| Error::Parse(format!("bad rational '{t}'"))))
        .transpose()
}

fn fmt_partition(p: &[Vec<usize>]) -> String {
    p.iter()
        .map(|b| {
            let inner: Vec<String> = b.iter().map(|&i| Letter::gen(i).to_string()).collect();
            format!("{{{}}}", inner.join(","))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn fmt_path(gens: &[CmtGenerator], path: &[usize]) -> Vec<String> {
    path.iter().map(|&g| gens[g].forward.to_string()).collect()
}

/// Parses arguments and runs a command.
pub fn run<I, T>(args: I) -> Report
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.to_string();
            return if code == 0 {
                Report { code, stdout: text, stderr: String::new() }
            } else {
                Report { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let config = RunConfig {
        structured: cli.json,
        threads: cli.threads,
        cache_dir: cli.cache_dir.clone().or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from)),
    };
    match dispatch(&cli.command, &config) {
        Ok(r) => r,
        Err(e) => Report { code: 1, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn context(rank: usize, config: &RunConfig) -> Result<Context> {
    let gens = load_or_build(rank, config.cache_dir.as_deref())?;
    Ok(Context::with_generators(rank, gens).threads(config.threads))
}

struct Outcome {
    verdict: String,
    human: String,
    witness: Value,
    members: Option<usize>,
    max_norm: Option<Rational>,
    telemetry: Option<String>,
}

impl Outcome {
    fn plain(verdict: String) -> Self {
        Outcome { human: verdict.clone(), verdict, witness: Value::Null, members: None, max_norm: None, telemetry: None }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Norm { .. } => "norm",
        Command::IsAut { .. } => "is-aut",
        Command::Conjugate { .. } => "conjugate",
        Command::Irreducible { .. } => "irreducible",
        Command::Displacement { .. } => "displacement",
        Command::CmtGens { .. } => "cmt-gens",
        Command::Fold { .. } => "fold",
        Command::VisiblyReducible { .. } => "visibly-reducible",
    }
}

pub fn dispatch(cmd: &Command, config: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let out = match cmd {
        Command::Norm { aut } => Outcome::plain(parse_outer(aut)?.norm().to_string()),
        Command::IsAut { aut } => {
            let e = parse_automorphism(aut)?;
            Outcome::plain(if e.is_automorphism() { "YES" } else { "NO" }.to_string())
        }
        Command::Conjugate { phi, psi, mu, check_irreducible } => {
            let phi = parse_outer(phi)?;
            let psi = parse_outer(psi)?;
            if phi.rank() != psi.rank() {
                return Err(Error::RankMismatch(phi.rank(), psi.rank()));
            }
            let ctx = context(phi.rank(), config)?;
            let mu = parse_mu(mu.as_deref())?;
            if *check_irreducible {
                for (name, x) in [("phi", &phi), ("psi", &psi)] {
                    let r = detect_irreducible(&ctx, x, mu.clone())?;
                    if !r.is_irreducible() {
                        return Err(Error::Precondition(format!("{name} = {x} is reducible")));
                    }
                }
            }
            let r = conjugacy_irreducible(&ctx, &phi, &psi, mu)?;
            let path = r.conjugator.as_ref().map(|p| fmt_path(ctx.generators(), p));
            let verdict = if r.conjugate { "YES" } else { "NO" }.to_string();
            let human = match &path {
                Some(p) if p.is_empty() => format!("{verdict}\nconjugator: identity"),
                Some(p) => format!("{verdict}\nconjugator: {}", p.join(" ; ")),
                None => verdict.clone(),
            };
            Outcome {
                verdict,
                human,
                witness: path.map_or(Value::Null, |p| json!(p)),
                members: Some(r.members),
                max_norm: Some(r.max_norm.clone()),
                telemetry: Some(format!("mu {} members {} max_norm {}", r.mu, r.members, r.max_norm)),
            }
        }
        Command::Irreducible { aut, mu } => {
            let phi = parse_outer(aut)?;
            let ctx = context(phi.rank(), config)?;
            let r = detect_irreducible(&ctx, &phi, parse_mu(mu.as_deref())?)?;
            let telemetry =
                Some(format!("mu {} members {} scanned {} max_norm {}", r.mu, r.members, r.scanned, r.max_norm));
            match &r.verdict {
                Verdict::Irreducible => Outcome {
                    verdict: "IRREDUCIBLE".into(),
                    human: "IRREDUCIBLE".into(),
                    witness: Value::Null,
                    members: Some(r.members),
                    max_norm: Some(r.max_norm.clone()),
                    telemetry,
                },
                Verdict::Reducible(w) => Outcome {
                    verdict: "REDUCIBLE".into(),
                    human: format!(
                        "REDUCIBLE\nwitness: {}\npartition: {}\nconjugator: {}",
                        w.witness,
                        fmt_partition(&w.partition),
                        if w.path.is_empty() {
                            "identity".to_string()
                        } else {
                            fmt_path(ctx.generators(), &w.path).join(" ; ")
                        }
                    ),
                    witness: json!({
                        "automorphism": w.witness.to_string(),
                        "partition": w.partition.iter().map(|b| b.iter().map(|&i| Letter::gen(i).to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                        "conjugator": fmt_path(ctx.generators(), &w.path),
                    }),
                    members: Some(r.members),
                    max_norm: Some(r.max_norm.clone()),
                    telemetry,
                },
            }
        }
        Command::Displacement { aut, graph } => {
            let phi = parse_outer(aut)?;
            let x = match graph {
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
                    MarkedMetricGraph::parse(&text)?
                }
                None => MarkedMetricGraph::uniform_rose(phi.rank()),
            };
            Outcome::plain(displacement(&x, &phi)?.to_string())
        }
        Command::CmtGens { rank } => {
            if *rank == 0 {
                return Err(Error::Precondition("rank must be at least 1".into()));
            }
            let gens = load_or_build(*rank, config.cache_dir.as_deref())?;
            let lines: Vec<String> = gens.iter().map(|g| g.forward.to_string()).collect();
            let mut o = Outcome::plain(gens.len().to_string());
            o.human = format!("{}\n{}", lines.len(), lines.join("\n"));
            o.witness = json!(lines);
            o
        }
        Command::Fold { words } => {
            let gens = words
                .iter()
                .flat_map(|w| w.split(','))
                .map(str::trim)
                .filter(|w| !w.is_empty())
                .map(FreeWord::parse)
                .collect::<Result<Vec<_>>>()?;
            let g = subgroup_graph(&gens);
            let mut o = Outcome::plain(format!("rank {}", g.betti()));
            o.human = format!("{}", g).trim_end().to_string();
            o.witness = json!(g.to_string());
            o
        }
        Command::VisiblyReducible { aut } => match visibly_reducible(&parse_outer(aut)?) {
            Some(p) => {
                let mut o = Outcome::plain("YES".into());
                o.human = format!("YES\npartition: {}", fmt_partition(&p));
                o.witness = json!(fmt_partition(&p));
                o
            }
            None => Outcome::plain("NO".into()),
        },
    };
    let elapsed = start.elapsed().as_secs_f64();
    let stdout = if config.structured {
        let record = json!({
            "command": command_name(cmd),
            "verdict": out.verdict,
            "witness": out.witness,
            "members": out.members,
            "max_norm": out.max_norm.as_ref().map(|q| q.to_string()),
            "elapsed": elapsed,
        });
        format!("{record}\n")
    } else {
        format!("{}\n", out.human)
    };
    let stderr = out.telemetry.map(|t| format!("{t} elapsed {elapsed:.3}s\n")).unwrap_or_default();
    Ok(Report { code: 0, stdout, stderr })
}
