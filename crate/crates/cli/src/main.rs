use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cellfree_fl::baselines::Scheme;
use cellfree_fl::evaluate::evaluate_selection;
use cellfree_fl::experiment::sweep::{job_streams, run_row};
use cellfree_fl::experiment::{
    emit_plotdata, jobs, read_rows, run_sweep_streaming, summarize, validate, write_aggregates,
    write_rows, ExperimentConfig, FigureId, Job, ResultRow,
};
use cellfree_fl::long_term::{run_algorithm2, write_trace_csv};
use cellfree_fl::network::{generate_placement, write_dump, Case, PlacementConfig};
use cellfree_fl::par::{self, ExecMode};
use cellfree_fl::short_term::{sca_solve, write_solution_csv};
use cellfree_fl::stream::RealizationStream;
use cellfree_fl::{seed, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cellfree-fl", version, about = "Execution-time minimization for federated learning over cell-free massive MIMO")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "CELLFREE_FL_OUT")]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Run trials and samples one after another.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a placement and its first network state.
    Generate(NetArgs),
    /// Run the UE-selection optimizer once and evaluate its selection.
    Optimize(NetArgs),
    /// Run a random-selection baseline once.
    Baseline {
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        #[command(flatten)]
        net: NetArgs,
    },
    /// Run every scheme over the configured axes and trials.
    Sweep {
        /// Configuration file (key = value lines).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a configuration key, e.g. `--set n_ap=10,20,40`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Aggregate a results table and write plot data.
    Summarize {
        /// Results table written by `sweep`.
        #[arg(long)]
        input: PathBuf,
        /// Figures to emit (fig5, fig6a, fig6b, fig7a, fig7b); all covered ones by default.
        #[arg(long = "figure")]
        figures: Vec<String>,
    },
    /// Run the numerical self-checks.
    Validate {
        /// Smaller instance counts.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args, Clone)]
struct NetArgs {
    #[arg(long, default_value_t = 20)]
    n_ap: usize,
    #[arg(long, default_value_t = 15)]
    n_ue: usize,
    #[arg(long, default_value_t = 1.5)]
    side_km: f64,
    #[arg(long, default_value = "C2", value_parser = parse_case)]
    case: Case,
    /// QoL threshold [default: min(5, n_ue)].
    #[arg(long)]
    n_qol: Option<usize>,
    /// Base seed; the run uses the seed a sweep would give this trial.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    trial: usize,
    /// Override a configuration key, e.g. `--set lambda=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn parse_case(s: &str) -> std::result::Result<Case, String> {
    s.parse().map_err(|e: cellfree_fl::Error| e.to_string())
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: cellfree_fl::Error| e.to_string())
}

fn apply_overrides(cfg: &mut ExperimentConfig, overrides: &[String]) -> Result<()> {
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| cellfree_fl::Error::Parse(format!("expected KEY=VALUE, got {o:?}")))?;
        cfg.set(k, v)?;
    }
    Ok(())
}

impl NetArgs {
    fn config(&self, scheme: Scheme) -> Result<(ExperimentConfig, Job)> {
        let n_qol = self.n_qol.unwrap_or(self.n_ue.min(5));
        let mut cfg = ExperimentConfig {
            cases: vec![self.case],
            n_ap: vec![self.n_ap],
            side_km: vec![self.side_km],
            n_qol: vec![n_qol],
            n_ue: self.n_ue,
            trials: self.trial + 1,
            seed: self.seed,
            schemes: vec![scheme],
            ..ExperimentConfig::default()
        };
        apply_overrides(&mut cfg, &self.overrides)?;
        cfg.validate()?;
        let single = [cfg.cases.len(), cfg.n_ap.len(), cfg.side_km.len(), cfg.n_qol.len()];
        if single.iter().any(|&l| l != 1) {
            return Err(cellfree_fl::Error::Config("a single run takes one value per axis".into()));
        }
        let job = Job {
            scheme,
            case: cfg.cases[0],
            n_ap: cfg.n_ap[0],
            side_km: cfg.side_km[0],
            n_qol: cfg.n_qol[0],
            trial: self.trial,
        };
        Ok((cfg, job))
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn print_row(r: &ResultRow) {
    let t = r.total_time.map_or("-".into(), |t| format!("{t:.3}"));
    let n = r.n_selected.map_or("-".into(), |n| n.to_string());
    println!(
        "{} {} M={} D={} N_qol={} trial={}: T_e = {t} s, selected = {n} [{}]",
        r.scheme, r.case, r.n_ap, r.side_km, r.n_qol, r.trial, r.status
    );
}

fn generate(net: &NetArgs, out: &Path) -> Result<()> {
    let (cfg, job) = net.config(Scheme::Opt)?;
    let s = job.seed(cfg.seed);
    let pcfg = PlacementConfig::new(job.n_ap, cfg.n_ue, job.side_km, job.case);
    let placement = generate_placement(&pcfg, seed::derive(s, &[seed::label("placement")]))?;
    let mut w = csv::Writer::from_writer(create(out, "placement.csv")?);
    w.write_record(["kind", "index", "x_m", "y_m"])?;
    for (kind, pts) in [("ap", &placement.aps), ("ue", &placement.ues)] {
        for (i, p) in pts.iter().enumerate() {
            w.write_record([kind.to_string(), i.to_string(), p.x.to_string(), p.y.to_string()])?;
        }
    }
    w.flush()?;
    let state = RealizationStream::new(placement, cfg.params(job.n_qol), s).realization(0)?;
    std::fs::write(out.join("realization.txt"), write_dump(&state))?;
    println!("placement and state 0 written to {}", out.display());
    Ok(())
}

fn optimize(net: &NetArgs, out: &Path, mode: ExecMode) -> Result<bool> {
    let (cfg, job) = net.config(Scheme::Opt)?;
    let (train, eval) = job_streams(&cfg, &job)?;
    let p = cfg.params(job.n_qol);
    let sca = cfg.sca_options();
    let r = run_algorithm2(&train, &p, job.seed(cfg.seed), &cfg.alg2_options())?;
    write_trace_csv(&r.trace, create(out, "trace.csv")?)?;
    let e = evaluate_selection(&r.a_binary, &eval, &p, cfg.eval_samples, &sca, mode)?;
    let first = sca_solve(&r.a_binary, &eval.realization(0)?, &p, &sca)?;
    write_solution_csv(&first, create(out, "short_term.csv")?)?;
    println!(
        "converged = {} after {} iterations; selected UEs {:?}",
        r.converged,
        r.iterations,
        r.a_binary.selected()
    );
    println!(
        "rounds G = {:.3}, mean round time = {:.4} s, T_e = {:.3} s",
        e.rounds, e.mean_round_time, e.total_time
    );
    println!("trace, first-round allocation written to {}", out.display());
    Ok(true)
}

fn baseline(scheme: Scheme, net: &NetArgs, out: &Path, mode: ExecMode) -> Result<bool> {
    let (cfg, job) = net.config(scheme)?;
    let row = run_row(&cfg, &job, mode);
    print_row(&row);
    let name = format!("{}.csv", scheme.to_string().to_lowercase());
    write_rows(std::slice::from_ref(&row), create(out, &name)?)?;
    Ok(row.is_ok())
}

fn sweep(config: Option<&Path>, overrides: &[String], out: Option<PathBuf>, mode: ExecMode) -> Result<bool> {
    let mut cfg = match config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    apply_overrides(&mut cfg, overrides)?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("config.txt"), cfg.to_text())?;
    let total = jobs(&cfg).len();
    println!("{total} runs, config hash {}", cfg.config_hash());
    let mut w = csv::Writer::from_writer(create(&dir, "results.csv")?);
    let mut failed = 0;
    let rows = run_sweep_streaming(&cfg, mode, |r| {
        w.serialize(r)?;
        w.flush()?;
        failed += usize::from(!r.is_ok());
        print_row(r);
        Ok(())
    })?;
    println!("{} rows, {failed} failed; results in {}", rows.len(), dir.display());
    Ok(failed == 0)
}

fn summarize_cmd(input: &Path, figures: &[String], out: &Path) -> Result<bool> {
    let rows = read_rows(File::open(input)?)?;
    let aggs = summarize(&rows)?;
    write_aggregates(&aggs, create(out, "summary.csv")?)?;
    let plot_dir = out.join("plotdata");
    let explicit = !figures.is_empty();
    let figs: Vec<FigureId> = if explicit {
        figures.iter().map(|f| f.parse()).collect::<Result<_>>()?
    } else {
        FigureId::ALL.to_vec()
    };
    for fig in figs {
        match emit_plotdata(&aggs, fig, &plot_dir) {
            Ok(paths) => println!("{}: {} files", fig.name(), paths.len()),
            Err(e) if !explicit => println!("{}: skipped ({e})", fig.name()),
            Err(e) => return Err(e),
        }
    }
    println!("{} cells summarized into {}", aggs.len(), out.join("summary.csv").display());
    Ok(true)
}

fn validate_cmd(quick: bool) -> bool {
    let checks = validate::run_checks(quick);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    par::configure_threads(cli.threads);
    let mode = if cli.sequential || !ExecMode::available() {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    };
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    let outcome = match &cli.command {
        Command::Generate(net) => generate(net, &out).map(|_| true),
        Command::Optimize(net) => optimize(net, &out, mode),
        Command::Baseline { scheme, net } => baseline(*scheme, net, &out, mode),
        Command::Sweep { config, overrides } => sweep(config.as_deref(), overrides, cli.out.clone(), mode),
        Command::Summarize { input, figures } => summarize_cmd(input, figures, &out),
        Command::Validate { quick } => Ok(validate_cmd(*quick)),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
