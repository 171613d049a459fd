use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use catnorm_core::chase::ChaseLimits;
use catnorm_core::emit::{
    decompose_hybrid, emit_dtd, emit_property_graph, emit_relational, parse_assignment,
    partitions_to_json,
};
use catnorm_core::pipeline::{reduce, run_checks, Check, Level, Reduction};
use catnorm_core::verify::{NfReport, Verdict};
use catnorm_core::{parse_schema, validate, Error, SchemaDocument};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "catnorm", version, about = "Normalize categorical schemas and emit relational, XML and graph schemas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a schema file
    Validate { input: PathBuf },
    /// Write the closure graph with the provenance of each added arrow
    Closure(Common),
    /// Reduce a schema, optionally emitting and checking the result
    Reduce(Common),
    /// Emit target schemas (no reduction unless --level is given)
    Emit(Common),
    /// Check normal forms of the schemas emitted from the (reduced) graph
    Check(Common),
    /// Split the (reduced) graph into per-model partitions
    Hybrid(Common),
}

#[derive(Args, Clone)]
struct Common {
    input: PathBuf,
    /// Reduction level: 0 none, 1 first reduced, 2 second reduced
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
    level: Option<u8>,
    #[arg(long, value_enum, value_delimiter = ',')]
    emit: Vec<Target>,
    #[arg(long, value_delimiter = ',')]
    check: Vec<Check>,
    /// Also write the reduction trace
    #[arg(long)]
    trace: bool,
    /// JSON file placing each object in one or more partitions
    #[arg(long)]
    assignment: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Write artifacts to standard output instead of files
    #[arg(long)]
    stdout: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Target {
    Relational,
    Dtd,
    Pg,
    Hybrid,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. }
            | Error::DuplicateObject(_)
            | Error::UndeclaredObject { .. }
            | Error::InvalidGraph(_)
            | Error::UnknownObject(_)
            | Error::Precondition(_) => Failure::Input(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

struct Output {
    dir: PathBuf,
    stem: String,
    stdout: bool,
}

impl Output {
    fn new(c: &Common) -> Self {
        let stem = c
            .input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "schema".into());
        Output {
            dir: c.out_dir.clone(),
            stem,
            stdout: c.stdout,
        }
    }

    fn write(&self, ext: &str, body: &str) -> Result<(), Failure> {
        if self.stdout {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .map_err(|e| Failure::Internal(e.to_string()))?;
            return Ok(());
        }
        fs::create_dir_all(&self.dir).map_err(|e| Failure::Input(format!("{}: {e}", self.dir.display())))?;
        let path = self.dir.join(format!("{}{ext}", self.stem));
        fs::write(&path, body).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn chase_limits() -> Result<ChaseLimits, Failure> {
    match std::env::var("CATNORM_CHASE_LIMIT") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(ChaseLimits::with_rows)
            .ok_or_else(|| Failure::Input(format!("CATNORM_CHASE_LIMIT: not a positive integer: {v}"))),
        Err(_) => Ok(ChaseLimits::default()),
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

fn load(c: &Common, default_level: u8) -> Result<Reduction, Failure> {
    let (g, deps) = parse_schema(&read(&c.input)?)?;
    let level = Level::from_number(c.level.unwrap_or(default_level)).expect("clap bounds the level");
    Ok(reduce(&g, &deps, level)?)
}

fn emit_targets(c: &Common, red: &Reduction, out: &Output) -> Result<usize, Failure> {
    let mut targets = c.emit.clone();
    targets.sort();
    targets.dedup();
    if targets.contains(&Target::Hybrid) && c.assignment.is_none() {
        return Err(Failure::Input("the hybrid target needs --assignment".into()));
    }
    let assignment = match &c.assignment {
        Some(p) if targets.contains(&Target::Hybrid) => Some(parse_assignment(&read(p)?)?),
        _ => None,
    };
    let g = &red.reduced;
    // Emitters only read the graph, so they run side by side.
    let rendered: Vec<Result<(&str, String, usize), Error>> = std::thread::scope(|s| {
        let handles: Vec<_> = targets
            .iter()
            .map(|t| {
                let assignment = assignment.as_ref();
                s.spawn(move || match t {
                    Target::Relational => {
                        let r = emit_relational(g);
                        for w in &r.warnings {
                            eprintln!("warning: {w}");
                        }
                        Ok((".sql", r.to_sql(), r.relations.len()))
                    }
                    Target::Dtd => Ok((".dtd", emit_dtd(g).render(), 0)),
                    Target::Pg => Ok((".pg.json", emit_property_graph(g).to_json(), 0)),
                    Target::Hybrid => {
                        let parts = decompose_hybrid(g, assignment.expect("checked above"))?;
                        Ok((".hybrid.json", partitions_to_json(&parts), 0))
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("emitter thread")).collect()
    });
    let mut relations = 0;
    for r in rendered {
        let (ext, body, n) = r?;
        relations += n;
        out.write(ext, &body)?;
    }
    Ok(relations)
}

fn check_and_report(c: &Common, red: &Reduction, out: &Output, summary: &mut String) -> Result<Vec<NfReport>, Failure> {
    let mut checks = c.check.clone();
    checks.sort();
    checks.dedup();
    if checks.is_empty() {
        return Ok(vec![]);
    }
    if checks.contains(&Check::FourthNf) && red.level != Level::Second && !red.deps.mvds.is_empty() {
        eprintln!("note: 4nf is only expected to hold after --level 2");
    }
    let paired = run_checks(red, &checks, chase_limits()?)?;
    for (check, r) in &paired {
        let verdict = match r.verdict {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::Unknown => "unknown",
        };
        let _ = writeln!(summary, "  {:<14} {:<14} {verdict}", check.to_string(), r.subject);
        for w in &r.witnesses {
            let _ = writeln!(summary, "    {} ({})", w.dependency, w.reason);
        }
    }
    let reports: Vec<NfReport> = paired.into_iter().map(|(_, r)| r).collect();
    out.write(".report.json", &json(&reports))?;
    Ok(reports)
}

fn verdict_code(reports: &[NfReport]) -> u8 {
    if reports.iter().any(|r| r.verdict == Verdict::Violated) {
        3
    } else if reports.iter().any(|r| r.verdict == Verdict::Unknown) {
        4
    } else {
        0
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Validate { input } => {
            let (g, deps) = parse_schema(&read(&input)?)?;
            let report = validate(&g, &deps);
            for w in &report.warnings {
                eprintln!("warning: {}", w.message);
            }
            if !report.is_valid() {
                for v in &report.violations {
                    eprintln!("error: {}", v.message);
                }
                return Ok(1);
            }
            eprintln!("{} objects, {} arrows", g.objects.len(), g.arrows.len());
            Ok(0)
        }
        Command::Closure(c) => {
            let red = load(&c, 0)?;
            let out = Output::new(&c);
            let mut doc = SchemaDocument::from_parts(&red.closure, &red.deps);
            doc.provenance = red
                .provenance
                .iter()
                .map(|p| serde_json::to_value(p).expect("provenance serializes"))
                .collect();
            out.write(".closure.json", &doc.to_json())?;
            eprintln!(
                "objects {} -> {}, arrows {} -> {}",
                red.input.objects.len(),
                red.closure.objects.len(),
                red.input.arrows.len(),
                red.closure.arrows.len()
            );
            Ok(0)
        }
        Command::Reduce(c) => pipeline(c, 1),
        Command::Emit(c) | Command::Check(c) | Command::Hybrid(c) => pipeline(c, 0),
    }
}

fn pipeline(mut c: Common, default_level: u8) -> Result<u8, Failure> {
    let red = load(&c, default_level)?;
    if c.assignment.is_some() && !c.emit.contains(&Target::Hybrid) {
        c.emit.push(Target::Hybrid);
    }
    let out = Output::new(&c);
    if red.level != Level::None {
        let mut deps = red.deps.clone();
        if red.level == Level::Second {
            deps.mvds = red.trace.residual_mvds.clone();
        }
        out.write(".reduced.json", &SchemaDocument::from_parts(&red.reduced, &deps).to_json())?;
        if c.trace {
            out.write(".trace.json", &json(&red.trace))?;
        }
    }
    let relations = emit_targets(&c, &red, &out)?;
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "objects {} -> {}, arrows {} -> {}, relations {relations}",
        red.input.objects.len(),
        red.reduced.objects.len(),
        red.input.arrows.len(),
        red.reduced.arrows.len()
    );
    let reports = check_and_report(&c, &red, &out, &mut summary)?;
    eprint!("{summary}");
    Ok(verdict_code(&reports))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(2)
        }
    }
}
