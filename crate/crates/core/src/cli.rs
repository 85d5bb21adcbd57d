//! The `qprop` command line.
//!
//! Exit status: 0 when every result line passed, 1 when a certificate or
//! check failed, 2 on usage, parse or precondition errors. A JSON document
//! is always written: the report, or `{"error":{"kind","message"}}`.

use crate::algebra::{AlgebraShape, BlockElement};
use crate::error::{Error, Result};
use crate::io;
use crate::metrics::{
    beta_bound_certificate, diameter_upper_bound, kantorovich_commutative_exact, kantorovich_lower_bound, relabel_tower,
    rescaling_bridge_bound, verify_quantum_isometry, EffrosShenFamily, MetricCertificate,
};
use crate::report::{error_json, Report, ResultLine};
use crate::seminorms::best_approx::TARGET_REL_GAP;
use crate::seminorms::{lip, quotient_seminorm, LipSpec, WeightSequence};
use crate::states::{effros_shen_trace, effros_shen_trace_rational, restrict_trace, TraceWeights};
use crate::towers::{ContinuedFraction, Tower};
use crate::{random, suite};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "qprop", version, about = "Certified quantum metric computations on truncated AF algebras")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every sampler.
    #[arg(long, global = true, env = "QPROP_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Replace certificate tolerances; values above the default need --allow-loose-tol.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub allow_loose_tol: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a tower.
    #[command(subcommand)]
    Tower(TowerCmd),
    /// Build or restrict a tracial state.
    #[command(subcommand)]
    Trace(TraceCmd),
    /// Sample an element.
    #[command(subcommand)]
    Element(ElementCmd),
    /// Build a Lip-norm spec.
    #[command(subcommand)]
    Spec(SpecCmd),
    /// Evaluate the Lip-norm of an element.
    Lipnorm {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        element: PathBuf,
    },
    /// Distance from an element to the self-adjoint part of a level.
    Quotient {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        element: PathBuf,
        #[arg(long)]
        level: usize,
    },
    /// Monge-Kantorovich distance between two tracial states.
    Kantorovich {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Propinquity bounds.
    #[command(subcommand)]
    Propinquity(PropinquityCmd),
    /// Quantum isometries between towers.
    #[command(subcommand)]
    Isometry(IsometryCmd),
    /// Run every invariant suite.
    VerifySuite,
}

#[derive(Debug, Subcommand)]
pub enum TowerCmd {
    EffrosShen {
        /// Partial quotients, e.g. 0,1,1,1.
        #[arg(long)]
        cf: String,
        #[arg(long)]
        depth: usize,
    },
    Uhf {
        /// Multipliers, cycled, e.g. 2,3,5.
        #[arg(long)]
        mult: String,
        #[arg(long)]
        depth: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum TraceCmd {
    EffrosShen {
        #[arg(long)]
        cf: String,
        #[arg(long)]
        level: usize,
        /// Use the rational number whose expansion is exactly --cf.
        #[arg(long)]
        rational: bool,
    },
    /// Restrict a top-level trace to a lower level.
    Pullback {
        #[arg(long)]
        tower: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        level: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum ElementCmd {
    Random {
        /// Block sizes, e.g. 2,1.
        #[arg(long)]
        shape: String,
        #[arg(long)]
        self_adjoint: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    CondExp,
    Quotient,
}

#[derive(Debug, Subcommand)]
pub enum SpecCmd {
    /// Effros-Shen tower with its trace, beta(n) = 1/(q_n^2 + q_{n-1}^2) and the golden dominator.
    EffrosShen {
        #[arg(long)]
        cf: String,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = KindArg::CondExp)]
        kind: KindArg,
    },
    /// Any tower with explicit beta.
    Build {
        #[arg(long)]
        tower: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Comma-separated rationals beta(0), ..., e.g. 1/2,1/8.
        #[arg(long)]
        beta: String,
        /// Top-level trace; defaults to the canonical one.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum PropinquityCmd {
    /// Reach bound beta(m) for the inclusion of level m.
    BetaBound {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Rescaling bridge between two specs at a shared level.
    Rescale {
        #[arg(long)]
        member: PathBuf,
        #[arg(long)]
        limit: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Chain bound for one member of a fusing Effros-Shen family.
    Chain {
        #[arg(long, conflicts_with = "golden_family", required_unless_present = "golden_family")]
        family: Option<PathBuf>,
        /// Use members [0; 1^k, 2, 2, ...] for k below COUNT.
        #[arg(long, value_name = "COUNT")]
        golden_family: Option<usize>,
        /// Quotients appended to each generated member.
        #[arg(long, default_value_t = 40)]
        tail: usize,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum IsometryCmd {
    Verify {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Relabel the blocks of a tower; emits the copy and the map.
    Relabel {
        #[arg(long)]
        tower: PathBuf,
        /// One permutation per level as JSON, e.g. [[0],[1,0]].
        #[arg(long)]
        perms: String,
    },
}

/// A raw document, or a report whose `artifact` is taken as the document.
fn read(path: &Path) -> Result<Vec<u8>> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if let Ok(serde_json::Value::Object(mut doc)) = serde_json::from_slice::<serde_json::Value>(&bytes) {
        if doc.contains_key("results") {
            let artifact = doc.remove("artifact").ok_or_else(|| Error::Parse(format!("{}: report has no artifact", path.display())))?;
            return Ok(artifact.to_string().into_bytes());
        }
    }
    Ok(bytes)
}

fn parse_dims(text: &str) -> Result<Vec<usize>> {
    text.split(',').map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("{s:?} is not a dimension")))).collect()
}

fn levels_text(t: &Tower) -> String {
    t.levels().iter().map(|s| format!("({})", s.dims().iter().map(ToString::to_string).collect::<Vec<_>>().join(","))).collect::<Vec<_>>().join(",")
}

/// Applies `--tol` to a certificate and re-evaluates it.
fn apply_tol(g: &GlobalArgs, mut cert: MetricCertificate) -> Result<MetricCertificate> {
    if let Some(tol) = g.tol {
        if !(tol >= 0.0) || !tol.is_finite() {
            return Err(Error::Config(format!("tolerance {tol} must be finite and non-negative")));
        }
        if tol > cert.tolerance && !g.allow_loose_tol {
            return Err(Error::Config(format!("--tol {tol:e} loosens the default {:e}; pass --allow-loose-tol", cert.tolerance)));
        }
        cert.tolerance = tol;
        cert.verified = cert.recheck();
    }
    Ok(cert)
}

/// Runs one parsed command and returns its report.
pub fn execute(cli: &Cli) -> Result<Report> {
    let g = &cli.global;
    let seed = g.seed;
    match &cli.command {
        Command::Tower(cmd) => {
            let (name, tower) = match cmd {
                TowerCmd::EffrosShen { cf, depth } => ("tower effros-shen", Tower::effros_shen(&ContinuedFraction::parse(cf)?, *depth)?),
                TowerCmd::Uhf { mult, depth } => {
                    let mult = parse_dims(mult)?;
                    if mult.is_empty() {
                        return Err(Error::Config("--mult needs at least one multiplier".into()));
                    }
                    let cycled: Vec<usize> = mult.iter().copied().cycle().take(*depth).collect();
                    ("tower uhf", Tower::uhf(&cycled, *depth)?)
                }
            };
            let mut r = Report::new(name, seed);
            r.push(ResultLine::info("levels", levels_text(&tower), "tower construction"));
            r.push(ResultLine::info("top-dimension", tower.top().total_dimension().to_string(), "sum of squared block sizes"));
            r.set_artifact(&io::tower_to_json(&tower)?)?;
            Ok(r)
        }
        Command::Trace(TraceCmd::EffrosShen { cf, level, rational }) => {
            let cf = ContinuedFraction::parse(cf)?;
            let es = if *rational { effros_shen_trace_rational(&cf, *level)? } else { effros_shen_trace(&cf, *level)? };
            let mut r = Report::new("trace effros-shen", seed);
            let source = if *rational { "exact rational expansion" } else { "theta enclosure from the given quotients" };
            r.push(ResultLine::info("t", es.t.to_string(), source));
            r.push(ResultLine::info("t-half-width", es.half_width.to_f64().unwrap_or(f64::INFINITY), source));
            r.set_artifact(&io::trace_to_json(&es.weights)?)?;
            Ok(r)
        }
        Command::Trace(TraceCmd::Pullback { tower, trace, level }) => {
            let tower = io::parse_tower(&read(tower)?)?;
            let w = io::parse_trace(&read(trace)?)?;
            let out = restrict_trace(&tower, tower.depth(), *level, &w)?;
            let mut r = Report::new("trace pullback", seed);
            r.push(ResultLine::info("level", *level, "restriction along the tower steps"));
            r.set_artifact(&io::trace_to_json(&out)?)?;
            Ok(r)
        }
        Command::Element(ElementCmd::Random { shape, self_adjoint }) => {
            let shape = AlgebraShape::new(parse_dims(shape)?)?;
            let mut rng = random::rng(seed);
            let x = if *self_adjoint { BlockElement::random_self_adjoint(&shape, &mut rng) } else { BlockElement::random(&shape, &mut rng) };
            let mut r = Report::new("element random", seed);
            r.push(ResultLine::info("op-norm", x.op_norm(), "Jacobi eigensolver"));
            r.set_artifact(&io::element_to_json(&x)?)?;
            Ok(r)
        }
        Command::Spec(cmd) => {
            let spec = match cmd {
                SpecCmd::EffrosShen { cf, depth, kind } => {
                    let cond = EffrosShenFamily::spec(&ContinuedFraction::parse(cf)?, *depth)?;
                    match kind {
                        KindArg::CondExp => cond,
                        KindArg::Quotient => LipSpec::quotient(cond.tower().clone(), cond.beta().clone())?,
                    }
                }
                SpecCmd::Build { tower, kind, beta, trace } => {
                    let tower = io::parse_tower(&read(tower)?)?;
                    let beta = WeightSequence::new(beta.split(',').map(|s| io::parse_rational(s.trim())).collect::<Result<_>>()?)?;
                    match kind {
                        KindArg::CondExp => {
                            let w = match trace {
                                Some(p) => io::parse_trace(&read(p)?)?,
                                None => TraceWeights::canonical(tower.top()),
                            };
                            LipSpec::cond_exp(tower, w, beta)?
                        }
                        KindArg::Quotient => LipSpec::quotient(tower, beta)?,
                    }
                }
            };
            let mut r = Report::new("spec", seed);
            r.push(ResultLine::info("kind", spec.kind().as_str(), "spec construction"));
            r.push(ResultLine::info("depth", spec.depth(), "spec construction"));
            r.set_artifact(&io::lipspec_to_json(&spec)?)?;
            Ok(r)
        }
        Command::Lipnorm { spec, element } => {
            let spec = io::parse_lipspec(&read(spec)?)?;
            let x = io::parse_element(&read(element)?)?;
            let v = lip(&spec, &x)?;
            let source = format!("{} Lip-norm", spec.kind().as_str());
            let mut r = Report::new("lipnorm", seed);
            r.push(ResultLine::info("lower", v.lower, &source));
            r.push(ResultLine::number("upper", v.upper, TARGET_REL_GAP, &source, v.converged));
            Ok(r)
        }
        Command::Quotient { spec, element, level } => {
            let spec = io::parse_lipspec(&read(spec)?)?;
            let x = io::parse_element(&read(element)?)?;
            let q = quotient_seminorm(&spec, *level, &x)?;
            let mut r = Report::new("quotient", seed);
            r.push(ResultLine::info("lower", q.lower, q.method));
            r.push(ResultLine::info("value", q.value, q.method));
            r.push(ResultLine::number("relative-gap", q.rel_gap, TARGET_REL_GAP, q.method, q.converged));
            r.set_artifact(&io::element_to_json(&q.witness)?)?;
            Ok(r)
        }
        Command::Kantorovich { spec, phi, psi, samples } => {
            let spec = io::parse_lipspec(&read(spec)?)?;
            let phi = io::parse_trace(&read(phi)?)?;
            let psi = io::parse_trace(&read(psi)?)?;
            let mut r = Report::new("kantorovich", seed);
            let est = kantorovich_lower_bound(&spec, &phi, &psi, *samples, seed)?;
            r.push(ResultLine::number("lower-bound", est.value, 0.0, "feasible Lip-ball elements", est.converged));
            r.push(ResultLine::info("sampled", est.sampled, "Lip-ball samples"));
            if spec.tower().top().is_commutative() {
                let exact = kantorovich_commutative_exact(&spec, &phi, &psi)?;
                r.push(ResultLine::number("exact", exact, 1e-9, "simplex on the commutative top level", est.value <= exact + 1e-9));
            }
            r.push(ResultLine::info("diameter-upper-bound", diameter_upper_bound(&spec), "2 beta(0)"));
            Ok(r)
        }
        Command::Propinquity(PropinquityCmd::BetaBound { spec, level, samples }) => {
            let spec = io::parse_lipspec(&read(spec)?)?;
            let cert = apply_tol(g, beta_bound_certificate(&spec, *level, *samples, seed)?)?;
            let mut r = Report::new("propinquity beta-bound", seed);
            r.push_certificate("", &cert)?;
            Ok(r)
        }
        Command::Propinquity(PropinquityCmd::Rescale { member, limit, level, samples }) => {
            let member = io::parse_lipspec(&read(member)?)?;
            let limit = io::parse_lipspec(&read(limit)?)?;
            let cert = apply_tol(g, rescaling_bridge_bound(&member, &limit, *level, *samples, seed)?)?;
            let mut r = Report::new("propinquity rescale", seed);
            r.push_certificate("", &cert)?;
            Ok(r)
        }
        Command::Propinquity(PropinquityCmd::Chain { family, golden_family, tail, n, k, samples }) => {
            let fam = match (family, golden_family) {
                (Some(path), _) => io::parse_family(&read(path)?)?,
                (None, Some(count)) => EffrosShenFamily::golden_perturbation(*count, *tail),
                (None, None) => return Err(Error::Config("pass --family or --golden-family".into())),
            };
            let fusing = fam.fusing(*n)?;
            let mut r = Report::new("propinquity chain", seed);
            // Improvement over levels: every admissible N' ≤ N.
            for level in 0..*n {
                if *k >= fusing[level] {
                    let b = fam.chain_bound(level, *k, *samples, seed)?;
                    r.push(ResultLine::info(&format!("bound[N={level}]"), b.bound, "2B(N) + bridge term"));
                }
            }
            let b = fam.chain_bound(*n, *k, *samples, seed)?;
            r.push(ResultLine::info("fusing-index", b.fusing_index, "c_N"));
            r.push(ResultLine::info("dominator", b.dominator.to_string(), "B(N)"));
            r.push(ResultLine::info("truncation-term", b.truncation_term.to_string(), "2B(N)"));
            r.push(ResultLine::info("weight-distance", b.weight_distance, "sum of trace weight differences at level N"));
            let mut passed = true;
            if let Some(cert) = b.bridge.clone() {
                let cert = apply_tol(g, cert)?;
                passed = cert.verified;
                r.push_certificate("bridge/", &cert)?;
            }
            r.push(ResultLine::number("bound", b.bound, 0.0, "2B(N) + bridge term", passed));
            Ok(r)
        }
        Command::Isometry(IsometryCmd::Verify { map, u, v, samples }) => {
            let map = io::parse_isometry_map(&read(map)?)?;
            let u = io::parse_lipspec(&read(u)?)?;
            let v = io::parse_lipspec(&read(v)?)?;
            let cert = apply_tol(g, verify_quantum_isometry(&map, &u, &v, *samples, seed)?)?;
            let mut r = Report::new("isometry verify", seed);
            r.push_certificate("", &cert)?;
            Ok(r)
        }
        Command::Isometry(IsometryCmd::Relabel { tower, perms }) => {
            let tower = io::parse_tower(&read(tower)?)?;
            let perms: Vec<Vec<usize>> = serde_json::from_str(perms).map_err(|e| Error::Parse(e.to_string()))?;
            let (copy, map) = relabel_tower(&tower, &perms)?;
            let mut r = Report::new("isometry relabel", seed);
            r.push(ResultLine::info("levels", levels_text(&copy), "relabeled tower"));
            let artifact = format!(r#"{{"version":1,"tower":{},"map":{}}}"#, io::tower_to_json(&copy)?, io::isometry_map_to_json(&map)?);
            r.set_artifact(&artifact)?;
            Ok(r)
        }
        Command::VerifySuite => {
            if let Some(tol) = g.tol {
                return Err(Error::Config(format!("--tol {tol} does not apply to verify-suite")));
            }
            suite::run(seed)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses `args` (program name first), runs the command and writes the
/// report. Returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            print!("{}", error_json(&Error::Config(e.render().to_string().trim().to_string())));
            return 2;
        }
    };
    let out = cli.global.out.as_deref();
    let result = execute(&cli).and_then(|r| {
        let text = match cli.global.format {
            Format::Json => r.to_json()?,
            Format::Csv => r.to_csv()?,
        };
        Ok((r.verified, text))
    });
    match result.and_then(|(ok, text)| emit(out, &text).map(|()| ok)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            print!("{}", error_json(&e));
            2
        }
    }
}
