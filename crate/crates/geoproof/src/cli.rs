//! Command-line commands. Each returns the process exit code.

use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use geoproof_core::curriculum::{by_name, run_cbrl_sim, SimConfig};
use geoproof_core::dsl::parse_problem;
use geoproof_core::engine::{exhaust_solve, EngineError};
use geoproof_core::synth::{generate_one, pipeline, run_sequential, Cache, MemoryCache, SynthConfig, SynthError, SynthItem};
use rayon::prelude::*;

use crate::cache::{write_items, FileCache};
use crate::config::Config;
use crate::protocol::{serve, ServerOptions};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NOT_PROVEN: u8 = 2;
pub const EXIT_SHORTFALL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "geoproof", version, about = "Geometry prover, proof sessions, problem synthesis and curriculum simulation")]
pub struct Cli {
    /// Config file; overrides GEO_CONFIG.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prove the goals of a problem file by saturation alone.
    Solve(SolveArgs),
    /// Serve proof sessions over JSON lines on stdin/stdout.
    Session(SessionArgs),
    /// Synthesize problems of a given complexity.
    Synth(SynthArgs),
    /// Run the curriculum simulation with a scripted policy.
    Curriculum(CurriculumArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub path: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Saturation budget in rule firings.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Write the proof as JSON here.
    #[arg(long)]
    pub proof_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    #[arg(long)]
    pub max_turns: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reject degenerate turns before they reach the engine.
    #[arg(long)]
    pub passcheck: bool,
    /// Persist sessions here and resume them after a restart.
    #[arg(long)]
    pub checkpoint_dir: Option<PathBuf>,
    /// Keep serving after every session is over, until end of input.
    #[arg(long)]
    pub keep_open: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// JSON-lines cache, read first and appended to.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Most samples to generate.
    #[arg(long)]
    pub max_sample: Option<usize>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CurriculumArgs {
    /// logistic, frozen, oracle or random.
    #[arg(long, default_value = "logistic")]
    pub policy: String,
    #[arg(long, default_value_t = 100)]
    pub rounds: usize,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Trace file (JSON lines); stdout when absent.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub kappa0: Option<f64>,
    /// Initial policy skill.
    #[arg(long)]
    pub skill: Option<f64>,
    /// Skill gained per unit of mean absolute advantage.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

/// Runs a parsed command line.
pub fn run(cli: Cli, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    let loaded = match &cli.config {
        Some(p) => Config::load(p),
        None => Config::from_env(),
    };
    let config = match loaded {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, &config, stdout, stderr),
        Command::Session(a) => cmd_session(&a, &config, stdin, stdout),
        Command::Synth(a) => cmd_synth(&a, &config, stdout, stderr),
        Command::Curriculum(a) => cmd_curriculum(&a, &config, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

type CmdResult = Result<u8, String>;

fn io_err(path: &std::path::Path) -> impl Fn(std::io::Error) -> String + '_ {
    move |e| format!("{}: {e}", path.display())
}

pub fn cmd_solve(a: &SolveArgs, config: &Config, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let text = std::fs::read_to_string(&a.path).map_err(io_err(&a.path))?;
    let problem = parse_problem(&text).map_err(|e| format!("{}: {e}", a.path.display()))?;
    match exhaust_solve(&problem, a.seed, a.budget.unwrap_or(config.budget)) {
        Ok(doc) => {
            writeln!(stdout, "{doc}").map_err(|e| e.to_string())?;
            if let Some(out) = &a.proof_out {
                let json = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
                std::fs::write(out, json + "\n").map_err(io_err(out))?;
            }
            Ok(EXIT_OK)
        }
        Err(e @ (EngineError::NotProven(_) | EngineError::BudgetExceeded)) => {
            let _ = writeln!(stderr, "{e}");
            Ok(EXIT_NOT_PROVEN)
        }
        Err(e) => Err(format!("{}: {e}", a.path.display())),
    }
}

pub fn cmd_session(a: &SessionArgs, config: &Config, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> CmdResult {
    let mut session = config.session_config();
    if let Some(n) = a.max_turns {
        if n == 0 {
            return Err("--max-turns must be at least 1".into());
        }
        session.max_turns = n;
    }
    if let Some(dir) = &a.checkpoint_dir {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let opts = ServerOptions {
        seed: a.seed,
        session,
        passcheck: a.passcheck.then_some(config.passcheck),
        checkpoint_dir: a.checkpoint_dir.clone(),
        keep_open: a.keep_open,
    };
    serve(stdin, stdout, opts).map_err(|e| e.to_string())?;
    Ok(EXIT_OK)
}

type Runner = Box<dyn Fn(&SynthConfig, &[u64]) -> Vec<Option<SynthItem>> + Sync>;

/// Batch runner over `jobs` worker threads. Results keep seed order, so
/// the output does not depend on the job count.
fn runner(jobs: usize) -> Result<Runner, String> {
    if jobs <= 1 {
        return Ok(Box::new(run_sequential));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| e.to_string())?;
    Ok(Box::new(move |cfg: &SynthConfig, seeds: &[u64]| {
        pool.install(|| seeds.par_iter().map(|&s| generate_one(cfg, s)).collect())
    }))
}

fn open_cache(path: &Option<PathBuf>, stderr: &mut dyn Write) -> Result<Box<dyn Cache>, String> {
    match path {
        Some(p) => {
            let c = FileCache::open(p).map_err(io_err(p))?;
            if c.skipped() > 0 {
                let _ = writeln!(stderr, "cache: skipped {} unreadable lines in {}", c.skipped(), p.display());
            }
            Ok(Box::new(c))
        }
        None => Ok(Box::new(MemoryCache::new())),
    }
}

fn output(path: &Option<PathBuf>, stdout: &mut dyn Write, f: &mut dyn FnMut(&mut dyn Write) -> std::io::Result<()>) -> Result<(), String> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(io_err(p))?);
            f(&mut w).and_then(|_| w.flush()).map_err(io_err(p))
        }
        None => f(stdout).map_err(|e| e.to_string()),
    }
}

pub fn cmd_synth(a: &SynthArgs, config: &Config, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let mut cfg = config.synth_config(a.kappa);
    if let Some(t) = a.tolerance {
        cfg.tolerance = t;
    }
    if let Some(n) = a.max_sample {
        cfg.max_sample = n;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    if a.count == 0 {
        return Err("--count must be at least 1".into());
    }
    let mut cache = open_cache(&a.cache, stderr)?;
    let run = runner(a.jobs)?;
    let deadline = a.timeout.map(|s| Instant::now() + Duration::from_secs_f64(s.max(0.0)));
    let mut expired = || deadline.is_some_and(|d| Instant::now() >= d);
    let started = Instant::now();
    let result = pipeline(&cfg, a.count, a.seed, cache.as_mut(), &*run, &mut expired);
    let (items, code) = match result {
        Ok((items, stats)) => {
            let _ = writeln!(
                stderr,
                "synth: {} items, cache hits {}, generated {}, emitted {}, {:.1}s",
                items.len(),
                stats.cache_hits,
                stats.generated,
                stats.emitted,
                started.elapsed().as_secs_f64()
            );
            (items, EXIT_OK)
        }
        Err(SynthError::Timeout { items, shortfall }) => {
            let _ = writeln!(stderr, "synth: timeout with {} items, shortfall {shortfall}", items.len());
            (items, EXIT_SHORTFALL)
        }
        Err(e) => return Err(e.to_string()),
    };
    output(&a.out, stdout, &mut |w| write_items(w, &items))?;
    Ok(code)
}

pub fn cmd_curriculum(a: &CurriculumArgs, config: &Config, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let d = &config.curriculum;
    let Some(mut policy) = by_name(&a.policy, a.skill.unwrap_or(d.skill0), a.rate.unwrap_or(d.rate)) else {
        return Err(format!("unknown policy '{}' (expected logistic, frozen, oracle or random)", a.policy));
    };
    let mut sim = SimConfig::new(a.rounds, a.batch.unwrap_or(d.batch_size), a.alpha.unwrap_or(d.alpha), a.seed);
    sim.kappa0 = a.kappa0.unwrap_or(d.kappa0);
    sim.kappa_min = d.kappa_min;
    sim.synth = config.synth_config(sim.kappa0);
    sim.session = config.session_config();
    if sim.alpha < 0.0 || sim.batch_size == 0 || sim.kappa_min <= 0.0 {
        return Err("alpha must be non-negative, batch at least 1".into());
    }
    let mut cache = open_cache(&a.cache, stderr)?;
    let run = runner(a.jobs)?;
    let started = Instant::now();
    let (state, trace) = run_cbrl_sim(policy.as_mut(), &sim, cache.as_mut(), &*run, &mut || false);
    output(&a.trace, stdout, &mut |w| {
        for r in &trace {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    let skipped = trace.iter().filter(|r| r.skipped.is_some()).count();
    let _ = writeln!(
        stderr,
        "curriculum: {} rounds ({skipped} skipped), final kappa {}, skill {:.3}, {:.1}s",
        trace.len(),
        state.kappa,
        policy.skill(),
        started.elapsed().as_secs_f64()
    );
    Ok(EXIT_OK)
}
