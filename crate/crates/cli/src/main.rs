//! `knapcount` command-line front end.
//!
//! Every command prints one JSON object per line on stdout (or CSV / text with
//! `--format`); diagnostics go to stderr. Exit codes: 0 ok, 1 usage or input
//! error, 2 internal failure, 3 bound violation in `compare`.

mod report;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use knapcount::{
    approx_count, classify, count_lpv, count_ltv, dp_exact_count, generate_instance,
    parse_allocation_instance, parse_knapsack_instance, Allocation, AllocationInstance,
    CountResult, Epsilon, GeneratedInstance, GeneratorSpec, InstanceKind, ItemCountRule,
    KnapsackInstance, Method,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use report::{Format, RunReport};

#[derive(Parser)]
#[command(
    name = "knapcount",
    version,
    about = "Count knapsack solutions and semi-fair allocations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count solutions of a knapsack or allocation instance.
    Count(CountArgs),
    /// Classify one allocation of an allocation instance.
    Classify(ClassifyArgs),
    /// Run the exact and approximate counters and check the ratio.
    Compare(CompareArgs),
    /// Generate a random instance document.
    Gen(GenArgs),
    /// Time the approximate counters on generated instances and write CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Problem {
    Knapsack,
    Lpv,
    Ltv,
}

impl Problem {
    fn name(self) -> &'static str {
        match self {
            Problem::Knapsack => "knapsack",
            Problem::Lpv => "lpv",
            Problem::Ltv => "ltv",
        }
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ModeArgs {
    /// Approximation parameter in (0, 1), as a decimal or p/q.
    #[arg(long)]
    epsilon: Option<Epsilon>,
    /// Count exactly with the pseudo-polynomial DP.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct CountArgs {
    problem: Problem,
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    mode: ModeArgs,
    /// Also count the two allocations that give every good to one player.
    #[arg(long)]
    include_trivial: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    input: PathBuf,
    /// 1-based goods given to player A; the rest go to B.
    #[arg(long, value_delimiter = ',', conflicts_with = "set_b")]
    set_a: Option<Vec<usize>>,
    /// 1-based goods given to player B; the rest go to A.
    #[arg(long, value_delimiter = ',')]
    set_b: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct CompareArgs {
    problem: Problem,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    epsilon: Epsilon,
    #[arg(long)]
    include_trivial: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Knapsack,
    Allocation,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    max_value: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Knapsack capacity as a fraction of the total weight.
    #[arg(long, default_value_t = 0.5)]
    capacity_rule: f64,
    /// Prescribed item count, or `uniform` for a random one (default n/2).
    #[arg(long)]
    m: Option<String>,
    /// Write the document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Largest n; sizes double from --min-n up to it.
    #[arg(long)]
    max_n: usize,
    #[arg(long, default_value_t = 5)]
    min_n: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    epsilon: Vec<Epsilon>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Problem::Knapsack)]
    problem: Problem,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure and the exit code it maps to.
enum Failure {
    Usage(anyhow::Error),
    Internal(anyhow::Error),
    Violation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Internal(_) => 2,
            Failure::Violation(_) => 3,
        }
    }
}

impl From<knapcount::Error> for Failure {
    fn from(e: knapcount::Error) -> Self {
        match e {
            knapcount::Error::EnumerationGuard { .. } | knapcount::Error::MemoryBudget { .. } => {
                Failure::Internal(e.into())
            }
            other => Failure::Usage(other.into()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = std::panic::catch_unwind(|| run(cli))
        .unwrap_or_else(|_| Err(Failure::Internal(anyhow!("internal panic"))));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Usage(e) => eprintln!("error: {e:#}"),
                Failure::Internal(e) => eprintln!("internal error: {e:#}"),
                Failure::Violation(msg) => eprintln!("bound violation: {msg}"),
            }
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Count(args) => run_count(args),
        Command::Classify(args) => run_classify(args),
        Command::Compare(args) => run_compare(args),
        Command::Gen(args) => run_gen(args),
        Command::Bench(args) => run_bench(args),
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Usage)
}

enum Loaded {
    Knapsack(KnapsackInstance),
    Allocation(AllocationInstance),
}

fn load(problem: Problem, path: &Path) -> Result<Loaded, Failure> {
    let text = read_input(path)?;
    Ok(match problem {
        Problem::Knapsack => Loaded::Knapsack(parse_knapsack_instance(&text)?),
        Problem::Lpv | Problem::Ltv => Loaded::Allocation(parse_allocation_instance(&text)?),
    })
}

fn count(
    problem: Problem,
    loaded: &Loaded,
    method: &Method,
    include_trivial: bool,
) -> knapcount::Result<CountResult> {
    match (loaded, problem) {
        (Loaded::Knapsack(inst), _) => match method {
            Method::Exact => Ok(CountResult::exact(dp_exact_count(inst)?.0)),
            Method::Approximate(e) => approx_count(inst, e),
        },
        (Loaded::Allocation(inst), Problem::Lpv) => count_lpv(inst, method, include_trivial),
        (Loaded::Allocation(inst), _) => count_ltv(inst, method, include_trivial),
    }
}

fn describe(report: &mut RunReport, problem: Problem, loaded: &Loaded) {
    report.problem = Some(problem.name().into());
    match loaded {
        Loaded::Knapsack(inst) => {
            report.n = Some(inst.n());
            report.m = Some(inst.m_items());
            report.capacity = Some(inst.capacity().to_string());
        }
        Loaded::Allocation(inst) => report.n = Some(inst.n()),
    }
}

fn run_count(args: CountArgs) -> Outcome {
    let start = Instant::now();
    let loaded = load(args.problem, &args.input)?;
    let method = match args.mode.epsilon {
        Some(e) => Method::Approximate(e),
        None => Method::Exact,
    };
    let result = count(args.problem, &loaded, &method, args.include_trivial)?;
    let mut report = RunReport::new("count");
    describe(&mut report, args.problem, &loaded);
    if let Method::Approximate(e) = &method {
        report.epsilon = Some(e.to_string());
    }
    if args.problem != Problem::Knapsack {
        report.include_trivial = Some(args.include_trivial);
    }
    report.set_count(&result);
    report.finish(start);
    emit(&report, args.format)
}

fn to_zero_based(n: usize, goods: &[usize]) -> Result<Vec<usize>, Failure> {
    goods
        .iter()
        .map(|&g| {
            if (1..=n).contains(&g) {
                Ok(g - 1)
            } else {
                Err(Failure::Usage(anyhow!("good {g} is outside 1..={n}")))
            }
        })
        .collect()
}

fn run_classify(args: ClassifyArgs) -> Outcome {
    let start = Instant::now();
    let inst = parse_allocation_instance(&read_input(&args.input)?)?;
    let n = inst.n();
    let alloc = match (&args.set_a, &args.set_b) {
        (Some(a), None) => {
            let a = to_zero_based(n, a)?;
            let b: Vec<usize> = (0..n).filter(|g| !a.contains(g)).collect();
            Allocation::from_sets(n, &a, &b)?
        }
        (None, Some(b)) => Allocation::with_set_b(n, &to_zero_based(n, b)?)?,
        _ => {
            return Err(Failure::Usage(anyhow!(
                "pass exactly one of --set-a or --set-b"
            )))
        }
    };
    let flags = classify(&inst, &alloc)?;
    let mut report = RunReport::new("classify");
    report.n = Some(n);
    report.set_a = Some(alloc.set_a().iter().map(|g| g + 1).collect());
    report.set_b = Some(alloc.set_b().iter().map(|g| g + 1).collect());
    report.flags = Some(flags);
    report.finish(start);
    emit(&report, args.format)
}

fn run_compare(args: CompareArgs) -> Outcome {
    let start = Instant::now();
    let loaded = load(args.problem, &args.input)?;
    let exact = count(args.problem, &loaded, &Method::Exact, args.include_trivial)?;
    let approx = count(
        args.problem,
        &loaded,
        &Method::Approximate(args.epsilon.clone()),
        args.include_trivial,
    )?;
    let exact_value = exact
        .exact_value()
        .cloned()
        .ok_or_else(|| Failure::Internal(anyhow!("exact counter returned an approximation")))?;

    let mut report = RunReport::new("compare");
    describe(&mut report, args.problem, &loaded);
    report.epsilon = Some(args.epsilon.to_string());
    if args.problem != Problem::Knapsack {
        report.include_trivial = Some(args.include_trivial);
    }
    report.exact = Some(exact_value.to_string());
    report.approximate = Some(approx.decimal(12));

    let violation = if exact_value.is_zero() {
        (!approx.is_zero()).then(|| format!("exact count is 0 but approximation is {approx}"))
    } else {
        let ratio = approx.value() / BigRational::from_integer(BigInt::from(exact_value.clone()));
        report.ratio = ratio.to_f64();
        let upper = args.epsilon.exp_lower_bound();
        (ratio < BigRational::one() || ratio > upper).then(|| {
            format!(
                "ratio {} outside [1, e^{}]",
                report.ratio.unwrap_or(f64::NAN),
                args.epsilon
            )
        })
    };
    report.within_bound = Some(violation.is_none());
    report.finish(start);
    emit(&report, args.format)?;
    match violation {
        Some(msg) => Err(Failure::Violation(msg)),
        None => Ok(()),
    }
}

fn run_gen(args: GenArgs) -> Outcome {
    let m_rule = match args.m.as_deref() {
        None => ItemCountRule::Fixed(args.n / 2),
        Some("uniform") => ItemCountRule::Uniform,
        Some(text) => ItemCountRule::Fixed(text.parse().map_err(|_| {
            Failure::Usage(anyhow!("--m expects an integer or `uniform`, got {text:?}"))
        })?),
    };
    let spec = GeneratorSpec {
        kind: match args.kind {
            Kind::Knapsack => InstanceKind::Knapsack,
            Kind::Allocation => InstanceKind::Allocation,
        },
        n: args.n,
        max_value: args.max_value,
        seed: args.seed,
        capacity_rule: args.capacity_rule,
        m_rule,
    };
    let doc = generate_instance(&spec)?.to_json();
    match &args.out {
        Some(path) => fs::write(path, format!("{doc}\n"))
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Usage),
        None => {
            println!("{doc}");
            Ok(())
        }
    }
}

fn bench_sizes(min_n: usize, max_n: usize) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut n = min_n;
    while n <= max_n {
        sizes.push(n);
        n *= 2;
    }
    if sizes.last() != Some(&max_n) {
        sizes.push(max_n);
    }
    sizes
}

fn bench_instance(problem: Problem, n: usize, seed: u64) -> knapcount::Result<Loaded> {
    let seed = seed.wrapping_add(n as u64);
    Ok(match problem {
        Problem::Knapsack => match generate_instance(&GeneratorSpec::knapsack(n, 1000, seed))? {
            GeneratedInstance::Knapsack(k) => Loaded::Knapsack(k),
            GeneratedInstance::Allocation(_) => unreachable!("knapsack spec"),
        },
        Problem::Lpv | Problem::Ltv => {
            match generate_instance(&GeneratorSpec::allocation(n, 1000, seed))? {
                GeneratedInstance::Allocation(a) => Loaded::Allocation(a),
                GeneratedInstance::Knapsack(_) => unreachable!("allocation spec"),
            }
        }
    })
}

fn run_bench(args: BenchArgs) -> Outcome {
    if args.min_n == 0 || args.min_n > args.max_n {
        return Err(Failure::Usage(anyhow!(
            "need 1 <= --min-n <= --max-n, got {} and {}",
            args.min_n,
            args.max_n
        )));
    }
    let mut csv = String::from("problem,n,epsilon,wall_ms,result\n");
    for e in &args.epsilon {
        for n in bench_sizes(args.min_n, args.max_n) {
            let loaded = bench_instance(args.problem, n, args.seed)?;
            let method = Method::Approximate(e.clone());
            let start = Instant::now();
            let result = count(args.problem, &loaded, &method, false)?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            eprintln!("{} n={n} eps={e}: {wall_ms:.1} ms", args.problem.name());
            csv.push_str(&format!(
                "{},{n},{e},{wall_ms:.3},{}\n",
                args.problem.name(),
                result.decimal(12)
            ));
        }
    }
    match &args.out {
        Some(path) => fs::write(path, csv)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Usage),
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .context("writing stdout")
            .map_err(Failure::Internal),
    }
}

fn emit(report: &RunReport, format: Format) -> Outcome {
    let text = report.render(format).map_err(Failure::Internal)?;
    println!("{text}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bench_sizes_double_and_end_at_max() {
        assert_eq!(bench_sizes(5, 40), [5, 10, 20, 40]);
        assert_eq!(bench_sizes(5, 30), [5, 10, 20, 30]);
        assert_eq!(bench_sizes(7, 7), [7]);
    }

    #[test]
    fn guard_errors_are_internal() {
        let guard = knapcount::Error::EnumerationGuard { n: 30, guard: 25 };
        assert_eq!(Failure::from(guard).code(), 2);
        assert_eq!(Failure::from(knapcount::Error::Empty).code(), 1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
