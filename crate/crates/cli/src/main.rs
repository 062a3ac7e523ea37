use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use toric_thomsen::bondal::{bondal_pipeline, prepare};
use toric_thomsen::divisor::{QDivisor, TDivisor};
use toric_thomsen::fan::{Cone, Fan};
use toric_thomsen::gensys::{chambers, formal_to_string, resolve, verify_certificate, NodeKind};
use toric_thomsen::io;
use toric_thomsen::lattice::Rat;
use toric_thomsen::thomsen::{frobenius_cube, frobenius_lattice, stabilization_base, thomsen_collection_with_budget};

#[derive(Parser)]
#[command(name = "toric-gen", about = "Toric Frobenius splittings, Thomsen collections and generation certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fan commands.
    Fan {
        #[command(subcommand)]
        cmd: FanCmd,
    },
    /// Stabilized Thomsen collection of a fan and Q-divisor.
    Thomsen {
        fan: PathBuf,
        #[arg(long)]
        divisor: Option<PathBuf>,
        /// Largest grid size tried before giving up.
        #[arg(long, default_value_t = 4096)]
        max_m: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Splitting of the Frobenius pushforward of O(m·D).
    Frobenius {
        fan: PathBuf,
        #[arg(short, long)]
        m: u64,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        #[arg(long)]
        divisor: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generating-system commands.
    Gensys {
        #[command(subcommand)]
        cmd: GensysCmd,
    },
    /// Blow-up checks on a fan with a smooth center.
    Bondal {
        #[command(subcommand)]
        cmd: BondalCmd,
    },
}

#[derive(Subcommand)]
enum FanCmd {
    Check {
        fan: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Blowup {
        fan: PathBuf,
        /// Ray indices of the center, e.g. `0,1`.
        #[arg(long, value_delimiter = ',', required = true)]
        cone: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GensysCmd {
    Resolve {
        system: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Verify { certificate: PathBuf, system: PathBuf },
}

#[derive(Subcommand)]
enum BondalCmd {
    /// Takes an instance file, or a fan file together with `--cone`.
    Run {
        input: PathBuf,
        #[arg(long, default_value_t = 4)]
        grid: u64,
        #[arg(long, value_delimiter = ',')]
        cone: Option<Vec<usize>>,
        /// Exceptional coefficient as `num/den`.
        #[arg(long, value_parser = parse_rat)]
        c0: Option<Rat>,
        #[arg(long)]
        divisor: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Cube,
    Lattice,
    Both,
}

fn parse_rat(s: &str) -> Result<Rat, String> {
    io::parse_rat_arg(s).ok_or_else(|| format!("not a rational number: {s}"))
}

enum Failure {
    Check,
    Input(String),
}

impl From<io::IoError> for Failure {
    fn from(e: io::IoError) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn emit(out: &Option<PathBuf>, v: &Value) -> Outcome {
    if let Some(p) = out {
        io::write_file(p, &io::to_text(v))?;
    }
    Ok(())
}

fn cone_of(fan: &Fan, idx: &[usize]) -> Result<Cone, Failure> {
    let ids = idx
        .iter()
        .map(|&k| fan.rays().get(k).map(|r| r.id).ok_or_else(|| input(format!("ray index {k} out of range"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Cone::new(ids))
}

fn divisor_or_zero(path: &Option<PathBuf>, fan: &Fan) -> Result<QDivisor, Failure> {
    match path {
        Some(p) => Ok(io::parse_qdivisor(p, Some(fan))?),
        None => Ok(QDivisor::zero()),
    }
}

fn fan_check(path: &Path, out: &Option<PathBuf>) -> Outcome {
    let fan = io::parse_fan(path)?;
    println!("rank = {}", fan.rank());
    println!("rays = {}", fan.rays().len());
    println!("maximal cones = {}", fan.max_cones().len());
    println!("smooth = {}", fan.is_smooth());
    println!("complete = {}", fan.is_complete());
    println!("codim>=2 strata = {}", fan.has_codim_ge2_strata());
    emit(out, &io::fan_report(&fan))
}

fn fan_blowup(path: &Path, cone: &[usize], out: &Option<PathBuf>) -> Outcome {
    let fan = io::parse_fan(path)?;
    let sigma = cone_of(&fan, cone)?;
    let sub = fan.stellar_subdivision(&sigma).map_err(input)?;
    let pos = sub.fan.position(sub.new_ray).unwrap();
    let v = json!({ "fan": io::fan_to_json(&sub.fan), "new_ray": pos });
    for (k, r) in sub.fan.rays().iter().enumerate() {
        let g: Vec<String> = r.generator.iter().map(|x| x.to_string()).collect();
        println!("ray {k}: ({})", g.join(","));
    }
    println!("maximal cones = {}", sub.fan.max_cones().len());
    println!("new ray index = {pos}");
    emit(out, &v)
}

fn thomsen(path: &Path, divisor: &Option<PathBuf>, max_m: u64, out: &Option<PathBuf>) -> Outcome {
    let fan = io::parse_fan(path)?;
    let d = divisor_or_zero(divisor, &fan)?;
    let base = stabilization_base(&fan, &d);
    let mut rounds = 0;
    while base.saturating_mul(2u64 << rounds) <= max_m && rounds < 62 {
        rounds += 1;
    }
    if base > max_m {
        eprintln!("stabilization needs m >= {base}, above --max-m {max_m}");
        return Err(Failure::Check);
    }
    match thomsen_collection_with_budget(&fan, &d, rounds) {
        Ok(t) => {
            println!("m used = {} (stable at {} and {})", t.m_used, t.stabilization_evidence.0, t.stabilization_evidence.1);
            println!("{} classes:", t.classes.len());
            for c in &t.classes {
                println!("  {c}");
            }
            emit(out, &io::thomsen_to_json(&t))
        }
        Err(e) => {
            eprintln!("{e}");
            Err(Failure::Check)
        }
    }
}

fn frobenius(path: &Path, m: u64, method: Method, divisor: &Option<PathBuf>, out: &Option<PathBuf>) -> Outcome {
    if m == 0 {
        return Err(input("m must be positive"));
    }
    let fan = io::parse_fan(path)?;
    let d = divisor_or_zero(divisor, &fan)?;
    let source: TDivisor = d
        .scale(&Rat::from_integer(m.into()))
        .to_integral()
        .ok_or_else(|| input(format!("{m}·D is not integral")))?;
    let cube = match method {
        Method::Lattice => None,
        _ => Some(frobenius_cube(&fan, m, &source).map_err(input)?),
    };
    let lattice = match method {
        Method::Cube => None,
        _ => Some(frobenius_lattice(&fan, m, &d).map_err(input)?),
    };
    let shown = cube.as_ref().or(lattice.as_ref()).unwrap();
    println!("m = {m}, source = {}", shown.source);
    for (c, k) in &shown.multiplicities {
        println!("  {c}: {k}");
    }
    println!("total = {}", shown.total());
    let agree = match (&cube, &lattice) {
        (Some(a), Some(b)) => Some(a.multiplicities == b.multiplicities),
        _ => None,
    };
    let mut v = io::frobenius_to_json(shown);
    if let Some(a) = agree {
        println!("methods agree = {a}");
        v["methods_agree"] = json!(a);
    }
    emit(out, &v)?;
    if agree == Some(false) {
        return Err(Failure::Check);
    }
    Ok(())
}

fn gensys_resolve(path: &Path, out: &Option<PathBuf>) -> Outcome {
    let gs = io::parse_system(path)?;
    let chs = chambers(&gs);
    println!("{} items, {} chambers", gs.items().len(), chs.len());
    let cert = resolve(&gs).map_err(|e| {
        eprintln!("{e}");
        Failure::Check
    })?;
    let koszul = cert.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Koszul { .. })).count();
    println!("certificate: {} nodes, {} koszul steps, {} leaves", cert.nodes.len(), koszul, cert.leaves().count());
    for n in cert.leaves() {
        println!("  leaf {}: {}", n.id, formal_to_string(&n.target));
    }
    emit(out, &io::certificate_to_json(&cert))
}

fn gensys_verify(cert: &Path, system: &Path) -> Outcome {
    let cert = io::parse_certificate(cert)?;
    let gs = io::parse_system(system)?;
    // Without a fan, distinct prime names are taken to be disjoint.
    match verify_certificate(&cert, &gs, &|a: &str, b: &str| a != b) {
        Ok(()) => {
            println!("certificate verified ({} nodes)", cert.nodes.len());
            Ok(())
        }
        Err(vs) => {
            for v in &vs {
                println!("violation: {v}");
            }
            println!("certificate rejected");
            Err(Failure::Check)
        }
    }
}

fn bondal_run(
    path: &Path,
    grid: u64,
    cone: &Option<Vec<usize>>,
    c0: &Option<Rat>,
    divisor: &Option<PathBuf>,
    out: &Option<PathBuf>,
) -> Outcome {
    if grid == 0 {
        return Err(input("grid must be positive"));
    }
    let text = io::read_file(path)?;
    let parsed: Value = serde_json::from_str(&text).map_err(|e| Failure::from(io::IoError::from(e)))?;
    let mut raw = if parsed.get("fan").is_some() {
        io::parse_instance_str(&text)?
    } else {
        let fan = io::parse_fan_str(&text)?;
        let idx = cone.as_ref().ok_or_else(|| input("a fan file needs --cone"))?;
        let sigma = cone_of(&fan, idx)?;
        io::RawInstance { fan, sigma, c0: Rat::from_integer(0.into()), c: QDivisor::zero() }
    };
    if let Some(idx) = cone {
        raw.sigma = cone_of(&raw.fan, idx)?;
    }
    if let Some(c) = c0 {
        raw.c0 = c.clone();
    }
    if divisor.is_some() {
        raw.c = divisor_or_zero(divisor, &raw.fan)?;
    }
    let (inst, norm) = prepare(&raw.fan, &raw.sigma, &raw.c0, &raw.c).map_err(input)?;
    let report = bondal_pipeline(&inst, grid).map_err(input)?;
    print!("{}", report.summary());
    let v = json!({
        "normalization": io::normalization_to_json(&norm),
        "instance": io::instance_to_json(&io::RawInstance {
            fan: inst.fan.clone(),
            sigma: inst.sigma.clone(),
            c0: inst.c0.clone(),
            c: inst.c.clone(),
        }),
        "report": io::bondal_report_to_json(&report),
    });
    emit(out, &v)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Fan { cmd: FanCmd::Check { fan, out } } => fan_check(&fan, &out),
        Command::Fan { cmd: FanCmd::Blowup { fan, cone, out } } => fan_blowup(&fan, &cone, &out),
        Command::Thomsen { fan, divisor, max_m, out } => thomsen(&fan, &divisor, max_m, &out),
        Command::Frobenius { fan, m, method, divisor, out } => frobenius(&fan, m, method, &divisor, &out),
        Command::Gensys { cmd: GensysCmd::Resolve { system, out } } => gensys_resolve(&system, &out),
        Command::Gensys { cmd: GensysCmd::Verify { certificate, system } } => gensys_verify(&certificate, &system),
        Command::Bondal { cmd: BondalCmd::Run { input, grid, cone, c0, divisor, out } } => {
            bondal_run(&input, grid, &cone, &c0, &divisor, &out)
        }
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
