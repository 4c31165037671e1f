use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crnp::compose::{self, Rule};
use crnp::network::{ReactionNetwork, SpeciesSet};
use crnp::report;
use crnp::siphon::{self, SiphonError};
use crnp::sim::{self, HistoryFunction, SimError};
use crnp::Verdict;

const EXIT_OK: u8 = 0;
const EXIT_IO: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_UNDECIDED: u8 = 3;
const EXIT_TOO_LARGE: u8 = 4;
const EXIT_NUMERIC: u8 = 5;

#[derive(Parser)]
#[command(name = "crnp", version, about = "Persistence certificates for delayed mass-action networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate semilocking sets and print a persistence certificate as JSON.
    Analyze {
        path: PathBuf,
        /// Write the certificate here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Enumeration cap on the number of species (default: CRNP_MAX_N or 24).
        #[arg(long)]
        max_n: Option<usize>,
    },
    /// Integrate the delayed dynamics from a constant positive history.
    Simulate {
        path: PathBuf,
        /// Initial state, e.g. "X1=2,X2=0.5"; every species is required.
        #[arg(long)]
        init: String,
        /// One delay for every reaction, or a comma list with one per reaction.
        #[arg(long)]
        tau_override: Option<String>,
        #[arg(long)]
        t_end: f64,
        #[arg(long)]
        step: f64,
        /// Trajectory CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run report JSON path.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Keep every N-th grid point in the CSV.
        #[arg(long, default_value_t = 1)]
        every: usize,
    },
    /// Explain the analysis of one candidate set.
    Explain {
        path: PathBuf,
        /// Species names, comma separated.
        #[arg(long)]
        set: String,
    },
    /// Random-history simulations as empirical persistence evidence.
    Probe {
        path: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 50.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn input(message: impl Into<String>) -> Failure {
    Failure::new(EXIT_INPUT, message)
}

fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::NonFiniteState { .. } | SimError::NegativeStateAborted { .. } => {
            Failure::new(EXIT_NUMERIC, e.to_string())
        }
        SimError::MemoryCap { .. } => Failure::new(EXIT_TOO_LARGE, e.to_string()),
        _ => input(e.to_string()),
    }
}

fn load(path: &Path) -> Result<ReactionNetwork, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    crnp::load_network(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", p.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(EXIT_IO, e.to_string())),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn analyze(path: &Path, out: Option<&Path>, max_n: Option<usize>) -> Result<u8, Failure> {
    let net = load(path)?;
    let cap = max_n.unwrap_or_else(crnp::max_n_from_env);
    let cert = compose::certify_persistence(&net, cap).map_err(|e| match e {
        compose::ComposeError::TooLarge { .. } => Failure::new(EXIT_TOO_LARGE, e.to_string()),
        other => Failure::new(EXIT_IO, other.to_string()),
    })?;
    write_output(out, &pretty(&report::certificate_document(&net, &cert)))?;
    eprintln!("verdict: {}", cert.verdict_text());
    Ok(match cert.verdict {
        Verdict::Persistent => EXIT_OK,
        Verdict::Undecided => EXIT_UNDECIDED,
    })
}

fn parse_init(net: &ReactionNetwork, text: &str) -> Result<Vec<f64>, Failure> {
    let mut x = vec![None; net.n_species()];
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| input(format!("--init entry {part:?} is not Name=value")))?;
        let s = net
            .species_index(name.trim())
            .ok_or_else(|| input(format!("--init names unknown species {}", name.trim())))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| input(format!("--init value {:?} is not a number", value.trim())))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(input(format!("--init value for {} must be positive", name.trim())));
        }
        x[s] = Some(v);
    }
    x.iter()
        .enumerate()
        .map(|(s, v)| v.ok_or_else(|| input(format!("--init is missing species {}", net.species()[s].name))))
        .collect()
}

fn parse_taus(net: &ReactionNetwork, text: &str) -> Result<Vec<f64>, Failure> {
    let vals: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| input(format!("--tau-override {text:?} is not a list of numbers")))?;
    if vals.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(input("--tau-override delays must be nonnegative"));
    }
    match vals.len() {
        1 => Ok(vec![vals[0]; net.n_reactions()]),
        k if k == net.n_reactions() => Ok(vals),
        k => Err(input(format!(
            "--tau-override has {k} values, network has {} reactions",
            net.n_reactions()
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    path: &Path,
    init: &str,
    tau_override: Option<&str>,
    t_end: f64,
    step: f64,
    out: Option<&Path>,
    report_path: Option<&Path>,
    every: usize,
) -> Result<u8, Failure> {
    let mut net = load(path)?;
    let x0 = parse_init(&net, init)?;
    if let Some(t) = tau_override {
        net = net.with_delays(&parse_taus(&net, t)?);
    }
    let (traj, rep) =
        sim::simulate(&net, &HistoryFunction::Constant(x0), t_end, step).map_err(sim_failure)?;
    let mut csv = Vec::new();
    sim::write_csv(&net, &traj, every, &mut csv).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    let json = pretty(&report::run_report_json(&net, &rep));
    for w in &rep.rounding_warnings {
        eprintln!("warning: {w}");
    }
    match (out, report_path) {
        (Some(o), Some(r)) => {
            write_output(Some(o), std::str::from_utf8(&csv).expect("csv is utf-8"))?;
            write_output(Some(r), &json)?;
        }
        (Some(o), None) => {
            write_output(Some(o), std::str::from_utf8(&csv).expect("csv is utf-8"))?;
            write_output(None, &json)?;
        }
        (None, r) => {
            write_output(None, std::str::from_utf8(&csv).expect("csv is utf-8"))?;
            match r {
                Some(r) => write_output(Some(r), &json)?,
                None => eprint!("{json}"),
            }
        }
    }
    Ok(EXIT_OK)
}

fn parse_set(net: &ReactionNetwork, text: &str) -> Result<SpeciesSet, Failure> {
    let names: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(input("--set is empty"));
    }
    net.species_set(&names).map_err(|e| input(e.to_string()))
}

fn explain(path: &Path, set: &str) -> Result<u8, Failure> {
    let net = load(path)?;
    let w = parse_set(&net, set)?;
    let names = w.names(&net).join(",");
    if let Some(i) = siphon::violating_reaction(&net, &w) {
        println!("W={{{names}}}");
        println!("semilocking: no; witness reaction {}", net.reaction_label(i));
        return Ok(EXIT_OK);
    }
    let rep = siphon::report_for(&net, &w).map_err(|e| match e {
        SiphonError::EmptySet | SiphonError::UnknownSpecies(_) => input(e.to_string()),
        other => Failure::new(EXIT_IO, other.to_string()),
    })?;
    let dec = compose::decompose_or_single(&net);
    let analysis = compose::case_label(&net, &dec, &w).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    let (discharge, caveats) = if rep.trivial {
        (compose::discharge_trivial(&net, &rep), Vec::new())
    } else {
        let o = compose::apply_rules(&net, &rep, &analysis).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
        (o.discharge, o.caveats)
    };
    let also: Vec<&str> = compose::applicable_rules(&net, &rep, &analysis)
        .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?
        .iter()
        .filter(|d| d.rule != discharge.rule)
        .map(|d| d.rule.label())
        .collect();

    println!("W={{{names}}}");
    println!(
        "semilocking: yes; boundary: {}; rule: {} ({})",
        rep.boundary.label(),
        discharge.rule.label(),
        discharge.citation()
    );
    println!(
        "face dimension: {} (stoichiometric dimension {}, complement projection {})",
        rep.face_dim,
        crnp::stoich::dimension(&net),
        rep.complement_projection_dim
    );
    for v in rep.face_kernel.as_strings() {
        println!("face kernel vector: ({})", v.join(", "));
    }
    let part = &rep.complement_partition;
    println!(
        "complement: tf={{{}}} sr={{{}}} tr={{{}}}",
        part.tf.names(&net).join(","),
        part.sr.names(&net).join(","),
        part.tr.names(&net).join(",")
    );
    println!(
        "case: {}; meets intersecting species: {}; cv={{{}}} cn={{{}}}",
        analysis.case_label.label(),
        if analysis.meets_sc { "yes" } else { "no" },
        analysis.cv.names(&net).join(","),
        analysis.cn.names(&net).join(",")
    );
    for r in &analysis.restrictions {
        println!(
            "{}: restriction {{{}}} {} (face {}, block dimension {})",
            dec.block_label(r.block),
            r.members.names(&net).join(","),
            r.class.label(),
            r.face_dim,
            r.block_dim
        );
    }
    println!("justification: {}", discharge.justification);
    if !also.is_empty() {
        println!("also applicable: {}", also.join(", "));
    }
    for c in caveats {
        println!("caveat: {c}");
    }
    Ok(if discharge.rule == Rule::Undecided { EXIT_UNDECIDED } else { EXIT_OK })
}

fn probe(path: &Path, trials: usize, t_end: f64, step: f64, seed: u64, out: Option<&Path>) -> Result<u8, Failure> {
    let net = load(path)?;
    let summary = sim::persistence_probe(&net, trials, t_end, step, seed).map_err(sim_failure)?;
    write_output(out, &pretty(&report::probe_json(&net, &summary, seed)))?;
    eprintln!(
        "min concentration {:.3e}; floor {} {}",
        summary.min_concentration,
        summary.floor,
        if summary.floor_breached { "breached" } else { "held" }
    );
    Ok(EXIT_OK)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Analyze { path, out, max_n } => analyze(&path, out.as_deref(), max_n),
        Command::Simulate {
            path,
            init,
            tau_override,
            t_end,
            step,
            out,
            report,
            every,
        } => simulate(
            &path,
            &init,
            tau_override.as_deref(),
            t_end,
            step,
            out.as_deref(),
            report.as_deref(),
            every,
        ),
        Command::Explain { path, set } => explain(&path, &set),
        Command::Probe {
            path,
            trials,
            t_end,
            step,
            seed,
            out,
        } => probe(&path, trials, t_end, step, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

