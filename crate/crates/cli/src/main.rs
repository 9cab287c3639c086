//! Command-line front end: decode, verify, search, classify and report.
//!
//! Exit codes: 0 success, 2 usage, 3 missing input, 4 data error,
//! 5 internal consistency failure.

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use semifield_core::binmat::{parse_tuple_line, read_tuples, write_tuples};
use semifield_core::classify::{classify_representative, ClassRecord, ClassSummary, PlaneCatalog};
use semifield_core::fixtures::{self, Conformance, Status};
use semifield_core::presentations::{check_appendix, AppendixReport};
use semifield_core::search::{full_search, oracle_search, A2Policy, SearchConfig, SearchManifest};
use semifield_core::semifield::StandardBasis;
use semifield_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "semifield",
    version,
    about = "Search and classification of semifields of order 2^d"
)]
struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, short = 'j', global = true, env = "SEMIFIELD_WORKERS",
          value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,

    /// Progress and timing on stderr.
    #[arg(long, short, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the matrices A1..Ad of a tuple line as 0/1 grids.
    Decode {
        /// The codes of A2..Ad; read from --input when absent.
        codes: Vec<String>,
        #[arg(short, long, default_value_t = 6, value_parser = clap::value_parser!(u8).range(2..=6))]
        dim: u8,
        /// Tuple file to decode line by line.
        #[arg(long, conflicts_with = "codes")]
        input: Option<PathBuf>,
    },
    /// Recompute the tabulated properties and report PASS/FAIL per row.
    Verify {
        #[arg(long, value_enum, default_value_t = FixtureSet::All)]
        fixtures: FixtureSet,
        /// Restrict to these plane labels.
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<String>>,
        /// Structured report.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Enumerate standard bases of order 2^d.
    Search {
        #[arg(short, long, value_parser = clap::value_parser!(u8).range(2..=6))]
        dim: u8,
        /// Exhaustive backtracking without symmetry reduction (d <= 4).
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, default_value_t = Policy::Standard)]
        policy: Policy,
        /// Directory for resumable intermediate results.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Continue from an existing checkpoint directory.
        #[arg(long, requires = "checkpoint")]
        resume: bool,
        /// Output directory for tuples.txt and manifest.json.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Group a tuple file into S3-classes and planes.
    Classify {
        input: PathBuf,
        #[arg(short, long, default_value_t = 6, value_parser = clap::value_parser!(u8).range(2..=6))]
        dim: u8,
        /// Output directory for records.jsonl and summary.json.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Summarise the files written by search or classify.
    Report { dir: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FixtureSet {
    Table1,
    Table5,
    Appendix,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Policy {
    Standard,
    AllPrimitive,
    Irreducible,
}

impl From<Policy> for A2Policy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Standard => A2Policy::Standard,
            Policy::AllPrimitive => A2Policy::AllPrimitive,
            Policy::Irreducible => A2Policy::Irreducible,
        }
    }
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            msg: msg.into(),
        }
    }

    fn missing(path: &Path) -> Self {
        Failure {
            code: 3,
            msg: format!("{}: not found", path.display()),
        }
    }

    fn data(msg: impl Into<String>) -> Self {
        Failure {
            code: 4,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::UnsupportedDimension(_) => 2,
            Error::Io(io) if io.kind() == io::ErrorKind::NotFound => 3,
            Error::Io(io) if io.kind() == io::ErrorKind::BrokenPipe => 0,
            Error::Consistency(_) => 5,
            _ => 4,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::data(e.to_string())
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(5);
        }
    }
    let start = Instant::now();
    let result = match cli.command {
        Command::Decode { codes, dim, input } => decode(&codes, dim as usize, input.as_deref()),
        Command::Verify {
            fixtures,
            labels,
            json,
        } => verify(fixtures, labels, json.as_deref(), cli.verbose),
        Command::Search {
            dim,
            oracle,
            policy,
            checkpoint,
            resume,
            out,
        } => search(dim as usize, oracle, policy, checkpoint, resume, &out),
        Command::Classify { input, dim, out } => classify(&input, dim as usize, &out, cli.verbose),
        Command::Report { dir } => report(&dir),
    };
    if cli.verbose {
        eprintln!("elapsed {:.3}s", start.elapsed().as_secs_f64());
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if f.code == 0 => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn read_file(path: &Path) -> std::result::Result<String, Failure> {
    if !path.exists() {
        return Err(Failure::missing(path));
    }
    Ok(fs::read_to_string(path)?)
}

fn print_basis(out: &mut impl Write, basis: &StandardBasis) -> io::Result<()> {
    for (i, m) in basis.matrices().iter().enumerate() {
        writeln!(out, "A{}", i + 1)?;
        write!(out, "{m}")?;
    }
    Ok(())
}

fn decode(codes: &[String], dim: usize, input: Option<&Path>) -> CmdResult {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if let Some(path) = input {
        let text = read_file(path)?;
        for (n, line) in text.lines().enumerate() {
            let Some(t) = parse_tuple_line(line, n + 1)? else {
                continue;
            };
            if t.len() != dim - 1 {
                return Err(Failure::data(format!(
                    "line {}: expected {} integers, found {}",
                    n + 1,
                    dim - 1,
                    t.len()
                )));
            }
            writeln!(out, "# line {}", n + 1)?;
            print_basis(&mut out, &StandardBasis::from_codes(&t)?)?;
        }
        return Ok(());
    }
    if codes.is_empty() {
        return Err(Failure::usage("no codes given"));
    }
    let line = codes.join(" ");
    let line = line.split_whitespace().collect::<Vec<_>>().join(" ");
    let t = parse_tuple_line(&line, 1)
        .map_err(|e| Failure::usage(e.to_string()))?
        .unwrap_or_default();
    if t.len() != dim - 1 {
        return Err(Failure::usage(format!(
            "expected {} integers for dimension {dim}, found {}",
            dim - 1,
            t.len()
        )));
    }
    let basis = StandardBasis::from_codes(&t)?;
    print_basis(&mut out, &basis)?;
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    planes: Vec<Conformance>,
    appendix: Vec<AppendixReport>,
    passed: bool,
}

fn verify(
    set: FixtureSet,
    labels: Option<Vec<String>>,
    json: Option<&Path>,
    verbose: bool,
) -> CmdResult {
    let wanted = |l: &str| labels.as_ref().is_none_or(|ls| ls.iter().any(|x| x == l));
    let mut reps = Vec::new();
    if matches!(set, FixtureSet::Table1 | FixtureSet::All) {
        reps.extend(fixtures::known_planes());
    }
    if matches!(set, FixtureSet::Table5 | FixtureSet::All) {
        reps.extend(fixtures::new_planes());
    }
    reps.retain(|r| wanted(&r.label));
    let stdout = io::stdout();
    let mut planes = Vec::new();
    for rep in &reps {
        let started = Instant::now();
        let props = fixtures::plane_properties(&rep.label)
            .ok_or_else(|| Failure::data(format!("no properties for {}", rep.label)))?;
        let c = classify_representative(&rep.label, &rep.table()?)?;
        let conf = fixtures::conformance(&props, rep.aut, &c);
        writeln!(stdout.lock(), "{conf}")?;
        if verbose {
            eprintln!("{} {:.2}s", rep.label, started.elapsed().as_secs_f64());
        }
        planes.push(conf);
    }
    let mut appendix = Vec::new();
    if matches!(set, FixtureSet::Appendix | FixtureSet::All) {
        let labels: Option<Vec<String>> = labels.clone();
        appendix = check_appendix(labels.as_deref());
        for r in &appendix {
            let status = if r.passed() {
                Status::Pass
            } else {
                Status::Fail
            };
            writeln!(
                stdout.lock(),
                "{status} {} appendix={:?}",
                r.label,
                r.outcome
            )?;
        }
    }
    let failed = planes.iter().filter(|c| !c.passed()).count()
        + appendix.iter().filter(|r| !r.passed()).count();
    let info = planes.iter().filter(|c| c.status() == Status::Info).count();
    writeln!(
        stdout.lock(),
        "checked {} planes and {} rules: {} failed, {} info",
        planes.len(),
        appendix.len(),
        failed,
        info
    )?;
    if let Some(path) = json {
        let report = VerifyReport {
            planes,
            appendix,
            passed: failed == 0,
        };
        write_json(path, &report)?;
    }
    if failed > 0 {
        return Err(Failure::data(format!("{failed} rows did not conform")));
    }
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> CmdResult {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
enum ManifestFile {
    Oracle { dim: usize, tuples: usize },
    Search(SearchManifest),
}

fn search(
    dim: usize,
    oracle: bool,
    policy: Policy,
    checkpoint: Option<PathBuf>,
    resume: bool,
    out: &Path,
) -> CmdResult {
    if oracle && dim > 4 {
        return Err(Failure::usage("--oracle supports d <= 4"));
    }
    if !oracle && !(4..=6).contains(&dim) {
        return Err(Failure::usage(
            "search supports d = 4, 5, 6 (use --oracle below 4)",
        ));
    }
    if let Some(dir) = &checkpoint {
        let occupied = dir.exists() && fs::read_dir(dir)?.next().is_some();
        if resume && !dir.exists() {
            return Err(Failure::missing(dir));
        }
        if !resume && occupied {
            return Err(Failure::usage(format!(
                "{} is not empty; pass --resume to continue it",
                dir.display()
            )));
        }
    }
    let (tuples, manifest) = if oracle {
        let tuples = oracle_search(dim)?;
        let m = ManifestFile::Oracle {
            dim,
            tuples: tuples.len(),
        };
        (tuples, m)
    } else {
        let cfg = SearchConfig {
            dim,
            policy: policy.into(),
            checkpoint,
        };
        let outcome = full_search(&cfg)?;
        (outcome.tuples, ManifestFile::Search(outcome.manifest))
    };
    fs::create_dir_all(out)?;
    let mut f = io::BufWriter::new(fs::File::create(out.join("tuples.txt"))?);
    write_tuples(&mut f, &tuples)?;
    f.flush()?;
    write_json(&out.join("manifest.json"), &manifest)?;
    println!("{} tuples written to {}", tuples.len(), out.display());
    Ok(())
}

/// One S3-class found in a tuple file, with the line of its first tuple.
#[derive(Serialize, Deserialize)]
struct ClassLine {
    line: usize,
    tuple: Vec<u32>,
    /// Isomorphism classes per distinct plane of the hexagon.
    plane_class_counts: Vec<u64>,
    #[serde(flatten)]
    record: ClassRecord,
}

#[derive(Serialize, Deserialize)]
struct SummaryFile {
    tuples: usize,
    #[serde(flatten)]
    summary: ClassSummary,
}

fn classify(input: &Path, dim: usize, out: &Path, verbose: bool) -> CmdResult {
    if !input.exists() {
        return Err(Failure::missing(input));
    }
    let tuples = read_tuples(BufReader::new(fs::File::open(input)?), dim)?;
    let mut numbered = Vec::new();
    for (n, line) in read_file(input)?.lines().enumerate() {
        if parse_tuple_line(line, n + 1)?.is_some() {
            numbered.push(n + 1);
        }
    }
    let known = fixtures::all_representatives();
    let mut catalog = PlaneCatalog::new();
    let mut records = Vec::new();
    for (t, &line) in tuples.iter().zip(&numbered) {
        let basis =
            StandardBasis::from_codes(t).map_err(|e| Failure::data(format!("line {line}: {e}")))?;
        let table = basis.table();
        let before = catalog.s3_classes().len();
        catalog.add_hexagon(&table);
        if catalog.s3_classes().len() == before {
            continue;
        }
        let label = known
            .iter()
            .find(|r| dim == 6 && &r.codes == t)
            .map_or_else(|| format!("line{line}"), |r| r.label.clone());
        let c = classify_representative(&label, &table)?;
        if verbose {
            eprintln!("{label}: |At| = {}", c.record.at_order);
        }
        records.push(ClassLine {
            line,
            tuple: t.clone(),
            plane_class_counts: c.plane_class_counts,
            record: c.record,
        });
    }
    fs::create_dir_all(out)?;
    let mut body = String::new();
    for r in &records {
        body.push_str(&serde_json::to_string(r)?);
        body.push('\n');
    }
    fs::write(out.join("records.jsonl"), body)?;
    let summary = catalog.summary();
    write_json(
        &out.join("summary.json"),
        &SummaryFile {
            tuples: tuples.len(),
            summary,
        },
    )?;
    println!(
        "{} tuples: {} S3-classes, {} planes, {} isomorphism classes",
        tuples.len(),
        summary.s3_classes,
        summary.planes,
        summary.isomorphism_classes
    );
    Ok(())
}

fn report(dir: &Path) -> CmdResult {
    if !dir.is_dir() {
        return Err(Failure::missing(dir));
    }
    let manifest = dir.join("manifest.json");
    let summary = dir.join("summary.json");
    let records = dir.join("records.jsonl");
    if !manifest.exists() && !summary.exists() {
        return Err(Failure {
            code: 3,
            msg: format!("{}: no manifest.json or summary.json", dir.display()),
        });
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if manifest.exists() {
        let m: ManifestFile = serde_json::from_str(&read_file(&manifest)?)?;
        match m {
            ManifestFile::Oracle { dim, tuples } => {
                writeln!(out, "oracle search, d = {dim}: {tuples} standard bases")?;
            }
            ManifestFile::Search(m) => {
                writeln!(out, "search, d = {}, policy {:?}", m.dim, m.policy)?;
                for s in &m.stages {
                    let lists: Vec<String> = s.list_sizes.iter().map(usize::to_string).collect();
                    writeln!(
                        out,
                        "  A2 poly {:#b}: lists [{}], {} partial bases, {} tuples",
                        s.poly,
                        lists.join(" "),
                        s.prefixes,
                        s.tuples
                    )?;
                }
                writeln!(
                    out,
                    "  total: {} partial bases, {} tuples",
                    m.partial_bases, m.tuples
                )?;
            }
        }
    }
    if summary.exists() {
        let s: SummaryFile = serde_json::from_str(&read_file(&summary)?)?;
        writeln!(
            out,
            "classified {} tuples: {} S3-classes, {} planes, {} isomorphism classes",
            s.tuples, s.summary.s3_classes, s.summary.planes, s.summary.isomorphism_classes
        )?;
    }
    if records.exists() {
        writeln!(
            out,
            "{:<8} {:>6} {:<28} {:<22} primitivity",
            "plane", "|At|", "S/A", "ZN"
        )?;
        for (n, line) in read_file(&records)?.lines().enumerate() {
            let r: ClassLine = serde_json::from_str(line)
                .map_err(|e| Failure::data(format!("records.jsonl line {}: {e}", n + 1)))?;
            let sa: Vec<String> = r
                .record
                .sa
                .iter()
                .map(|[c, a]| format!("{c}/{a}"))
                .collect();
            let zn: Vec<String> = r.record.zn.iter().map(u32::to_string).collect();
            writeln!(
                out,
                "{:<8} {:>6} {:<28} {:<22} {}",
                r.record.plane,
                r.record.at_order,
                sa.join(" + "),
                zn.join(" "),
                r.record.primitivity
            )?;
        }
    }
    Ok(())
}
