use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ambiprob::dsl::{self, DslError};
use ambiprob::montecarlo::{sample_posterior, Agreement, McError, McOptions};
use ambiprob::scenarios::{self, ScenarioError, IDS};
use ambiprob::{
    posterior, Day, EngineError, ModelError, QueryPredicate, Rational, Statement, WorldConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod output;

use output::{ListRow, McReport, Report};

#[derive(Parser)]
#[command(
    name = "ambiprob",
    version,
    about = "Exact and sampled posteriors for two-child disclosure puzzles"
)]
struct Cli {
    #[command(flatten)]
    world: WorldArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct WorldArgs {
    /// Number of equally likely birth days.
    #[arg(long, global = true, default_value_t = 7)]
    week_days: u32,
    #[arg(long, global = true, default_value_t = 2)]
    children: usize,
    /// Day for the day-centered procedures: mon..sun, dN or an index.
    /// Defaults to Tuesday, or the last day of a shorter week.
    #[arg(long, global = true)]
    day: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, global = true, default_value_t = 1)]
    shards: u64,
    /// Add decimal approximations to table output.
    #[arg(long, global = true)]
    decimal: bool,
    /// Target answer of the any-answer procedure, as a fraction.
    #[arg(long, global = true, default_value = "1/3")]
    p: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// List the builtin scenarios and their exact answers.
    List,
    /// Evaluate a builtin scenario exactly.
    Run {
        id: String,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Evaluate a procedure file exactly.
    Eval {
        file: PathBuf,
        /// Statement heard, e.g. "claim(boy, tue)".
        #[arg(long)]
        say: String,
        /// Event of interest, e.g. "all(boy)".
        #[arg(long)]
        event: String,
    },
    /// Sample a scenario or procedure file and compare with the exact value.
    Mc {
        /// Scenario id or path to a .proc file.
        target: String,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Tabulate the bc-tc posterior against (2d-1)/(4d-1).
    Sweep { d_min: u32, d_max: u32 },
}

#[derive(Args)]
struct QueryArgs {
    /// Statement heard; defaults to the scenario's own.
    #[arg(long)]
    say: Option<String>,
    /// Event of interest; defaults to two boys.
    #[arg(long)]
    event: Option<String>,
}

#[derive(Debug)]
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

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(2, message)
    }

    fn dsl(origin: &str, e: DslError) -> Self {
        Failure::new(4, format!("{origin}:{e}"))
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::EmptySupport => Failure::new(3, e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::ZeroStatementMass(_) | EngineError::EmptySupport => {
                Failure::new(3, e.to_string())
            }
            EngineError::Model(m) => m.into(),
            EngineError::InvalidKernel(_) => Failure::new(1, e.to_string()),
        }
    }
}

impl From<McError> for Failure {
    fn from(e: McError) -> Self {
        match e {
            McError::DegenerateProtocol(_) => Failure::new(6, e.to_string()),
            McError::EmptyPick(_) => Failure::new(4, e.to_string()),
            McError::NoTrials | McError::NoShards => Failure::usage(e.to_string()),
        }
    }
}

struct Ctx {
    cfg: WorldConfig,
    day: Day,
    p: Rational,
    format: Format,
    decimal: bool,
}

fn parse_day(text: &str, cfg: &WorldConfig) -> Result<Day, Failure> {
    let day = if !text.is_empty() && text.bytes().all(|b| b.is_ascii_digit()) {
        text.parse()
            .ok()
            .map(Day)
            .filter(|d| cfg.check_day(*d).is_ok())
    } else {
        Day::parse(text, cfg)
    };
    day.ok_or_else(|| {
        Failure::usage(format!(
            "unknown day `{text}` for a {}-day week",
            cfg.week_length()
        ))
    })
}

fn context(w: &WorldArgs) -> Result<Ctx, Failure> {
    let cfg = WorldConfig::new(w.week_days, w.children)?;
    let day = match &w.day {
        Some(text) => parse_day(text, &cfg)?,
        None => Day(Day::TUESDAY.0.min(cfg.week_length() - 1)),
    };
    let p = w.p.trim().parse::<Rational>().map_err(|_| {
        Failure::usage(format!("--p expects a fraction such as 1/3, got `{}`", w.p))
    })?;
    Ok(Ctx {
        cfg,
        day,
        p,
        format: w.format,
        decimal: w.decimal,
    })
}

/// Engine errors with statements rendered using the configured day names.
fn engine(e: EngineError, cfg: &WorldConfig) -> Failure {
    match &e {
        EngineError::ZeroStatementMass(s) => Failure::new(
            3,
            format!(
                "statement {} is never emitted; the conditional probability is undefined",
                s.render(cfg)
            ),
        ),
        _ => e.into(),
    }
}

fn statement_arg(text: &str, cfg: &WorldConfig) -> Result<Statement, Failure> {
    dsl::parse_statement(text, cfg).map_err(|e| Failure::dsl("--say", e))
}

fn event_arg(text: &str, cfg: &WorldConfig) -> Result<QueryPredicate, Failure> {
    dsl::parse_event(text, cfg).map_err(|e| Failure::dsl("--event", e))
}

fn scenario(ctx: &Ctx, id: &str) -> Result<ambiprob::ExactScenario, Failure> {
    Ok(scenarios::build(id, &ctx.cfg, ctx.day, ctx.p.clone())?)
}

/// Statement and event, falling back to the scenario's canonical pair.
fn query(
    ctx: &Ctx,
    args: &QueryArgs,
    fallback: Option<(Statement, QueryPredicate)>,
) -> Result<(Statement, QueryPredicate), Failure> {
    let (s, q) = match fallback {
        Some((s, q)) => (Some(s), Some(q)),
        None => (None, None),
    };
    let s = match (&args.say, s) {
        (Some(text), _) => statement_arg(text, &ctx.cfg)?,
        (None, Some(s)) => s,
        (None, None) => return Err(Failure::usage("procedure files need --say")),
    };
    let q = match (&args.event, q) {
        (Some(text), _) => event_arg(text, &ctx.cfg)?,
        (None, Some(q)) => q,
        (None, None) => return Err(Failure::usage("procedure files need --event")),
    };
    Ok((s, q))
}

fn read_source(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn warn(origin: &str, warnings: &[dsl::Diagnostic]) {
    for w in warnings {
        eprintln!("warning: {origin}:{w}");
    }
}

fn cmd_list(ctx: &Ctx) -> Result<u8, Failure> {
    let mut rows = Vec::new();
    for id in IDS {
        let s = scenario(ctx, id)?;
        rows.push(ListRow {
            id,
            answer: s.evaluate()?.posterior,
            description: scenarios::describe(id).unwrap_or_default(),
        });
    }
    print!("{}", output::list(&rows, ctx.format, ctx.decimal));
    Ok(0)
}

fn cmd_run(ctx: &Ctx, id: &str, args: &QueryArgs) -> Result<u8, Failure> {
    let s = scenario(ctx, id)?;
    let (statement, event) = query(
        ctx,
        args,
        Some((s.canonical_statement.clone(), s.canonical_query.clone())),
    )?;
    let report = posterior(&s.kernel, &statement, &event).map_err(|e| engine(e, &ctx.cfg))?;
    print!(
        "{}",
        output::report(
            &Report {
                source: ("scenario", id),
                cfg: &ctx.cfg,
                report: &report,
            },
            ctx.format,
            ctx.decimal,
        )
    );
    Ok(0)
}

fn cmd_eval(ctx: &Ctx, file: &Path, say: &str, event: &str) -> Result<u8, Failure> {
    let origin = file.display().to_string();
    let ast = dsl::parse(&read_source(file)?).map_err(|e| Failure::dsl(&origin, e))?;
    let compiled =
        dsl::compile::<Rational>(&ast, &ctx.cfg).map_err(|e| Failure::dsl(&origin, e))?;
    warn(&origin, &compiled.warnings);
    let statement = statement_arg(say, &ctx.cfg)?;
    let event = event_arg(event, &ctx.cfg)?;
    let report =
        posterior(&compiled.kernel, &statement, &event).map_err(|e| engine(e, &ctx.cfg))?;
    print!(
        "{}",
        output::report(
            &Report {
                source: ("procedure", &origin),
                cfg: &ctx.cfg,
                report: &report,
            },
            ctx.format,
            ctx.decimal,
        )
    );
    Ok(0)
}

fn cmd_mc(ctx: &Ctx, w: &WorldArgs, target: &str, args: &QueryArgs) -> Result<u8, Failure> {
    let (origin, source, fallback) = if IDS.contains(&target) {
        let s = scenario(ctx, target)?;
        let source = scenarios::reference_source(target, &ctx.cfg, ctx.day, &ctx.p)?;
        (
            target.to_string(),
            source,
            Some((s.canonical_statement, s.canonical_query)),
        )
    } else {
        let path = Path::new(target);
        if !path.exists() && !target.ends_with(".proc") {
            return Err(Failure::usage(format!(
                "`{target}` is neither a scenario id nor a file"
            )));
        }
        (path.display().to_string(), read_source(path)?, None)
    };
    let ast = dsl::parse(&source).map_err(|e| Failure::dsl(&origin, e))?;
    let program = dsl::lower(&ast, &ctx.cfg).map_err(|e| Failure::dsl(&origin, e))?;
    let compiled =
        dsl::compile_program::<Rational>(&program).map_err(|e| Failure::dsl(&origin, e))?;
    warn(&origin, &compiled.warnings);
    let (statement, event) = query(ctx, args, fallback)?;
    let exact = posterior(&compiled.kernel, &statement, &event)
        .map_err(|e| engine(e, &ctx.cfg))?
        .posterior;
    let opts = McOptions::new(w.trials, w.seed).with_shards(w.shards);
    let result = sample_posterior(&program, &statement, &event, &opts)?;
    let agreement = Agreement::judge(exact, result);
    print!(
        "{}",
        output::mc(
            &McReport {
                target: &origin,
                cfg: &ctx.cfg,
                statement: &statement,
                event: &event,
                shards: w.shards,
                agreement: &agreement,
            },
            ctx.format,
        )
    );
    Ok(if agreement.pass { 0 } else { 5 })
}

fn cmd_sweep(ctx: &Ctx, d_min: u32, d_max: u32) -> Result<u8, Failure> {
    if d_min < 1 || d_min > d_max {
        return Err(Failure::usage(format!(
            "sweep needs 1 <= d_min <= d_max, got {d_min} and {d_max}"
        )));
    }
    if ctx.cfg.family_size() != 2 {
        return Err(ScenarioError::UnsupportedConfig(ctx.cfg.family_size()).into());
    }
    let rows = scenarios::week_sweep::<Rational>(d_min..=d_max).map_err(|e| match e {
        scenarios::SweepError::Model(m) => Failure::from(m),
        scenarios::SweepError::Scenario(s) => Failure::from(s),
        scenarios::SweepError::Engine(e) => Failure::from(e),
    })?;
    print!("{}", output::sweep(&rows, ctx.format, ctx.decimal));
    Ok(if rows.iter().all(|r| r.matches()) {
        0
    } else {
        1
    })
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let ctx = context(&cli.world)?;
    match &cli.command {
        Command::List => cmd_list(&ctx),
        Command::Run { id, query } => cmd_run(&ctx, id, query),
        Command::Eval { file, say, event } => cmd_eval(&ctx, file, say, event),
        Command::Mc { target, query } => cmd_mc(&ctx, &cli.world, target, query),
        Command::Sweep { d_min, d_max } => cmd_sweep(&ctx, *d_min, *d_max),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("ambiprob: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
