use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use orlicz_core::grammar::parse_young;
use orlicz_core::lp::DyadicPartition;
use orlicz_core::seminorm::full_norm;
use orlicz_core::target::target;
use orlicz_core::{io, Grid, Order, Smoothness, Space, Young};

use orlicz::config::{parse_boundary, ConfigFile, Format, Settings};
use orlicz::family::{sample, Generator, GridSpec};
use orlicz::report::{fmt_num, RunReport, SuiteBuilder, SuiteReport};
use orlicz::suites::{run_embedding, run_suite, EmbeddingParams, SUITES};

#[derive(Parser, Debug)]
#[command(name = "orlicz", version, about = "Orlicz and fractional Orlicz-Sobolev norms on sampled grids")]
struct Cli {
    /// Key-value config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed of every random stream (default 1).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write a report to this path.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Report format: json or csv.
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct GridArgs {
    /// Dimension, 1 or 2.
    #[arg(long)]
    n: Option<usize>,
    /// Grid points per axis.
    #[arg(long)]
    points: Option<usize>,
    /// The box is [-L, L)^n.
    #[arg(long)]
    half_width: Option<f64>,
    /// zero or interior.
    #[arg(long)]
    boundary: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Young function tables.
    #[command(subcommand)]
    Young(YoungCmd),
    /// One norm of one function.
    Norm {
        /// LA (Luxemburg), W, B, O or F.
        #[arg(long)]
        space: Option<String>,
        /// Young function spec, e.g. `power(2)` or `powerlog(2,1)`.
        #[arg(long = "A")]
        a: Option<String>,
        /// Smoothness order.
        #[arg(long)]
        s: Option<f64>,
        /// Generator spec such as `gaussian(0,1)`, or a CSV / OGF1 file.
        #[arg(long = "fn")]
        func: Option<String>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Littlewood-Paley blocks.
    #[command(subcommand)]
    Lp(LpCmd),
    /// Run verification suites; all of them when none are named.
    Verify {
        /// Suite names; see the README for the list.
        suites: Vec<String>,
        /// Convolution sub-suite.
        #[arg(long)]
        suite: Option<String>,
        /// Override the number of random cases.
        #[arg(long)]
        cases: Option<usize>,
        /// Members of the smooth test family (default 30).
        #[arg(long)]
        family_size: Option<usize>,
        /// Coarse grid of the refinement experiments.
        #[arg(long)]
        ratio_points: Option<usize>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Embedding ratio experiment for a chosen A, s and r.
    Experiment {
        /// Young function spec, e.g. `power(2)` or `powerlog(2,1)`.
        #[arg(long = "A")]
        a: Option<String>,
        /// Smoothness order.
        #[arg(long)]
        s: Option<f64>,
        /// Lower smoothness order, 0 < r < s.
        #[arg(long)]
        r: Option<f64>,
        /// Members of the smooth test family (default 30).
        #[arg(long)]
        family_size: Option<usize>,
        /// Coarse grid of the refinement experiments.
        #[arg(long)]
        ratio_points: Option<usize>,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Subcommand, Debug)]
enum YoungCmd {
    /// Tabulate A, its density, inverse and conjugate on log-spaced t.
    Eval {
        /// Young function spec, e.g. `power(2)` or `powerlog(2,1)`.
        #[arg(long = "A")]
        a: Option<String>,
        /// Smallest t of the table (default 1e-3).
        #[arg(long)]
        t_min: Option<f64>,
        /// Largest t of the table (default 1e3).
        #[arg(long)]
        t_max: Option<f64>,
        /// Number of log-spaced rows (default 61).
        #[arg(long)]
        count: Option<usize>,
        /// CSV output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the Sobolev-conjugate target of A.
    Target {
        /// Young function spec, e.g. `power(2)` or `powerlog(2,1)`.
        #[arg(long = "A")]
        a: Option<String>,
        /// Dimension, 1 or 2.
        #[arg(long)]
        n: Option<usize>,
        /// Smoothness gap, 0 < sigma < n.
        #[arg(long)]
        sigma: Option<f64>,
        /// Smallest t of the table (default 1e-3).
        #[arg(long)]
        t_min: Option<f64>,
        /// Largest t of the table (default 1e3).
        #[arg(long)]
        t_max: Option<f64>,
        /// Number of log-spaced rows (default 61).
        #[arg(long)]
        count: Option<usize>,
        /// CSV output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum LpCmd {
    /// Write each block phi_i(D) u as a CSV grid into a directory.
    Blocks {
        /// Generator spec or a CSV / OGF1 file.
        #[arg(long = "fn")]
        func: Option<String>,
        /// Directory for the block CSV files.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
}

/// Flags resolved against the config file.
struct Ctx {
    cfg: ConfigFile,
    seed: u64,
    report: Option<PathBuf>,
    format: Format,
    base: Option<PathBuf>,
}

impl Ctx {
    fn pick<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.cfg.pick(flag, key)?)
    }

    fn require<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.pick(flag, key)?.with_context(|| format!("missing --{}", key.replace('_', "-")))
    }

    fn young(&self, spec: &str) -> Result<Young> {
        parse_young(spec, self.base.as_deref()).with_context(|| format!("young function {spec:?}"))
    }

    fn settings(&self, grid: &GridArgs) -> Result<Settings> {
        let d = Settings::default();
        let boundary = match self.pick(grid.boundary.clone(), "boundary")? {
            Some(b) => parse_boundary(&b).map_err(anyhow::Error::msg)?,
            None => d.boundary,
        };
        let s = Settings {
            seed: self.seed,
            n: self.pick(grid.n, "n")?.unwrap_or(d.n),
            points: self.pick(grid.points, "points")?.unwrap_or(d.points),
            half_width: self.pick(grid.half_width, "half_width")?.unwrap_or(d.half_width),
            boundary,
            ..d
        };
        Ok(s)
    }

    fn emit(&self, command: &str, suites: Vec<SuiteReport>) -> Result<RunReport> {
        let run = RunReport::new(command, self.seed, suites);
        if let Some(path) = &self.report {
            let f = BufWriter::new(File::create(path).with_context(|| format!("create {}", path.display()))?);
            match self.format {
                Format::Json => run.write_json(f)?,
                Format::Csv => run.write_csv(f)?,
            }
        }
        Ok(run)
    }
}

fn load_function(spec: &str, grid: GridSpec) -> Result<Grid> {
    let path = Path::new(spec);
    if path.is_file() {
        return io::load(path).with_context(|| format!("read {spec}"));
    }
    let g = Generator::parse(spec).with_context(|| format!("--fn {spec:?} is neither a file nor a generator"))?;
    Ok(sample(g, grid)?)
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && count >= 2) {
        bail!("need 0 < t_min < t_max and count >= 2");
    }
    Ok((0..count).map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (count - 1) as f64).exp()).collect())
}

fn output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("create {}", p.display()))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn young_cmd(ctx: &Ctx, cmd: YoungCmd) -> Result<bool> {
    match cmd {
        YoungCmd::Eval { a, t_min, t_max, count, out } => {
            let spec: String = ctx.require(a, "a")?;
            let young = ctx.young(&spec)?;
            let conj = young.conjugate()?;
            let ts = log_grid(
                ctx.pick(t_min, "t_min")?.unwrap_or(1e-3),
                ctx.pick(t_max, "t_max")?.unwrap_or(1e3),
                ctx.pick(count, "count")?.unwrap_or(61),
            )?;
            let mut w = output(ctx.pick(out, "out")?.as_deref())?;
            writeln!(w, "t,A,a,A_inv,conjugate")?;
            for t in ts {
                let row = [t, young.eval(t), young.density(t), young.inverse(t), conj.eval(t)];
                writeln!(w, "{}", row.map(fmt_num).join(","))?;
            }
            w.flush()?;
        }
        YoungCmd::Target { a, n, sigma, t_min, t_max, count, out } => {
            let spec: String = ctx.require(a, "a")?;
            let young = ctx.young(&spec)?;
            let params = Smoothness::new(ctx.pick(n, "n")?.unwrap_or(1), ctx.require(sigma, "sigma")?)?;
            let tgt = target(&young, params)?;
            let ts = log_grid(
                ctx.pick(t_min, "t_min")?.unwrap_or(1e-3),
                ctx.pick(t_max, "t_max")?.unwrap_or(1e3),
                ctx.pick(count, "count")?.unwrap_or(61),
            )?;
            let mut w = output(ctx.pick(out, "out")?.as_deref())?;
            writeln!(w, "t,value")?;
            for t in ts {
                writeln!(w, "{},{}", fmt_num(t), fmt_num(tgt.eval(t)))?;
            }
            w.flush()?;
        }
    }
    Ok(true)
}

fn norm_cmd(ctx: &Ctx, space: Option<String>, a: Option<String>, s: Option<f64>, func: Option<String>, grid: GridArgs) -> Result<bool> {
    let t0 = Instant::now();
    let settings = ctx.settings(&grid)?;
    settings.validate()?;
    let space: String = ctx.require(space, "space")?;
    let spec: String = ctx.require(a, "a")?;
    let func: String = ctx.require(func, "fn")?;
    let young = ctx.young(&spec)?;
    let u = load_function(&func, settings.grid())?;
    let mut b = SuiteBuilder::new("norm", ctx.seed);
    b.setting("space", &space).setting("A", &spec).setting("fn", &func);
    b.setting("n", u.n()).setting("points", u.points()).setting("half_width", u.half_width());
    let value = if space.eq_ignore_ascii_case("LA") {
        u.luxemburg_norm(&young)
    } else {
        let sp: Space = space.parse().map_err(|_| anyhow::anyhow!("unknown space {space:?}, expected LA, W, B, O or F"))?;
        let s: f64 = ctx.require(s, "s")?;
        b.setting("s", s).setting("boundary", format!("{:?}", settings.boundary).to_lowercase());
        full_norm(sp, &young, Order::new(s)?, &u, settings.boundary)?
    };
    b.check("norm", value.is_finite(), value, f64::NAN, format!("{space} norm"));
    println!("{}", fmt_num(value));
    let mut report = b.finish();
    report.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(ctx.emit("norm", vec![report])?.pass)
}

fn lp_cmd(ctx: &Ctx, cmd: LpCmd) -> Result<bool> {
    let LpCmd::Blocks { func, out, grid } = cmd;
    let settings = ctx.settings(&grid)?;
    settings.validate()?;
    let func: String = ctx.require(func, "fn")?;
    let out: PathBuf = ctx.require(out, "out")?;
    let u = load_function(&func, settings.grid())?;
    let p = DyadicPartition::for_grid(&u)?;
    std::fs::create_dir_all(&out).with_context(|| format!("create {}", out.display()))?;
    for (i, block) in p.blocks(&u)?.iter().enumerate() {
        let path = out.join(format!("block_{i:02}.csv"));
        let f = BufWriter::new(File::create(&path).with_context(|| format!("create {}", path.display()))?);
        io::write_csv(block, f)?;
    }
    println!("{} blocks written to {}", p.i_max() + 1, out.display());
    Ok(true)
}

fn summarize(run: &RunReport) {
    for s in &run.suites {
        println!("{} {} ({:.1} s)", if s.pass { "PASS" } else { "FAIL" }, s.suite, s.wall_time_s);
        for f in s.failures() {
            println!("  {f}");
        }
    }
}

fn verify_cmd(
    ctx: &Ctx,
    suites: Vec<String>,
    suite: Option<String>,
    cases: Option<usize>,
    family_size: Option<usize>,
    ratio_points: Option<usize>,
    grid: GridArgs,
) -> Result<bool> {
    let mut settings = ctx.settings(&grid)?;
    settings.cases = ctx.pick(cases, "cases")?;
    settings.sub_suite = ctx.pick(suite, "suite")?;
    settings.family_size = ctx.pick(family_size, "family_size")?.unwrap_or(settings.family_size);
    settings.ratio_points = ctx.pick(ratio_points, "ratio_points")?.unwrap_or(settings.ratio_points);
    settings.validate()?;
    let names: Vec<String> = if suites.is_empty() { SUITES.iter().map(|s| s.to_string()).collect() } else { suites };
    let mut reports = Vec::new();
    for name in &names {
        let t0 = Instant::now();
        let mut r = run_suite(name, &settings)?;
        r.wall_time_s = t0.elapsed().as_secs_f64();
        reports.push(r);
    }
    let run = ctx.emit("verify", reports)?;
    summarize(&run);
    Ok(run.pass)
}

#[allow(clippy::too_many_arguments)]
fn experiment_cmd(
    ctx: &Ctx,
    a: Option<String>,
    s: Option<f64>,
    r: Option<f64>,
    family_size: Option<usize>,
    ratio_points: Option<usize>,
    grid: GridArgs,
) -> Result<bool> {
    let mut settings = ctx.settings(&grid)?;
    settings.family_size = ctx.pick(family_size, "family_size")?.unwrap_or(settings.family_size);
    settings.ratio_points = ctx.pick(ratio_points, "ratio_points")?.unwrap_or(settings.ratio_points);
    settings.validate()?;
    let d = EmbeddingParams::default();
    let young_spec = ctx.pick(a, "a")?.unwrap_or(d.young_spec);
    let params = EmbeddingParams {
        young: ctx.young(&young_spec)?,
        young_spec,
        s: ctx.pick(s, "s")?.unwrap_or(d.s),
        r: ctx.pick(r, "r")?.unwrap_or(d.r),
    };
    let t0 = Instant::now();
    let mut report = run_embedding(&settings, &params)?;
    report.wall_time_s = t0.elapsed().as_secs_f64();
    let run = ctx.emit("experiment", vec![report])?;
    summarize(&run);
    Ok(run.pass)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let threads: Option<usize> = cfg.pick(cli.threads, "threads")?;
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("thread pool")?;
    }
    let ctx = Ctx {
        seed: cfg.pick(cli.seed, "seed")?.unwrap_or(Settings::default().seed),
        report: cfg.pick(cli.report, "report")?,
        format: cfg.pick(cli.format, "format")?.unwrap_or_default(),
        base: cli.config.as_ref().and_then(|p| p.parent().map(Path::to_path_buf)),
        cfg,
    };
    match cli.command {
        Command::Young(cmd) => young_cmd(&ctx, cmd),
        Command::Norm { space, a, s, func, grid } => norm_cmd(&ctx, space, a, s, func, grid),
        Command::Lp(cmd) => lp_cmd(&ctx, cmd),
        Command::Verify { suites, suite, cases, family_size, ratio_points, grid } => {
            verify_cmd(&ctx, suites, suite, cases, family_size, ratio_points, grid)
        }
        Command::Experiment { a, s, r, family_size, ratio_points, grid } => experiment_cmd(&ctx, a, s, r, family_size, ratio_points, grid),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
