use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use baseplan::io::{load_plan, plan_to_json, RegionSource, TaskFile};
use baseplan::kinematics::AnalyticArm;
use baseplan::pipeline::{
    bench_csv, bigraph_for, database_cache_path, database_csv, database_sweep, load_or_generate_database,
    run_benchmark, run_pipeline, Sweep,
};
use baseplan::reachability::{generate_database, Aabb};
use baseplan::scp::write_exchange;
use baseplan::svg::render_svg;
use baseplan::{PlanError, Result, SolverKind};

/// Base placement and task sequencing for mobile manipulators.
#[derive(Parser, Debug)]
#[command(name = "baseplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plan a task and write the plan file.
    Plan(PlanArgs),
    /// Sweep solvers, grid sizes and target counts; print CSV.
    Benchmark(BenchArgs),
    /// Generate the reachability database for a task's robot.
    GenDb(GenDbArgs),
    /// Draw a plan as a top-down SVG.
    Render(RenderArgs),
}

/// Overrides for task-file fields.
#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long)]
    solver: Option<SolverKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    h_scale: Option<f64>,
    #[arg(long)]
    lrg_iters: Option<usize>,
    /// Floor grid cell size in metres.
    #[arg(long)]
    cell_size: Option<f64>,
    /// Voxel size in metres (tasks with a `reachability` section only).
    #[arg(long)]
    voxel_size: Option<f64>,
}

#[derive(Args, Debug)]
struct CacheArgs {
    /// Directory for cached databases; defaults to the task file's directory.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Never read or write cached databases.
    #[arg(long, conflicts_with = "cache_dir")]
    no_cache: bool,
}

#[derive(Args, Debug)]
struct PlanArgs {
    task: PathBuf,
    /// Plan file to write; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write an SVG rendering.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Also write the set-cover instance in the exchange format.
    #[arg(long)]
    dump_scp: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(flatten)]
    cache: CacheArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    task: PathBuf,
    #[arg(long, value_delimiter = ',', default_values = ["greedy", "lpr", "lrg"])]
    solvers: Vec<SolverKind>,
    #[arg(long, value_delimiter = ',', default_values = ["0.1"])]
    grid_sizes: Vec<f64>,
    /// Prefix lengths of the task's target list; all targets when absent.
    #[arg(long, value_delimiter = ',')]
    target_counts: Vec<usize>,
    /// Also time database generation at these voxel sizes.
    #[arg(long, value_delimiter = ',')]
    voxel_sizes: Vec<f64>,
    /// CSV file to write; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(flatten)]
    cache: CacheArgs,
}

#[derive(Args, Debug)]
struct GenDbArgs {
    task: PathBuf,
    /// Database file to write; the cache location when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    voxel_size: Option<f64>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RenderArgs {
    plan: PathBuf,
    task: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn load_task_file(path: &Path, o: &Overrides) -> Result<TaskFile> {
    let mut f = TaskFile::load(path)?;
    if let Some(v) = o.solver {
        f.solver = v;
    }
    if let Some(v) = o.seed {
        f.seed = v;
    }
    if let Some(v) = o.h_scale {
        f.h_scale = v;
    }
    if let Some(v) = o.lrg_iters {
        f.lrg_iters = v;
    }
    if let Some(v) = o.cell_size {
        f.floor.cell_size = v;
    }
    if let Some(v) = o.voxel_size {
        match f.reachability.as_mut() {
            Some(r) => r.voxel_size = v,
            None => {
                return Err(PlanError::InvalidInput(
                    "--voxel-size needs a task with a `reachability` section".into(),
                ))
            }
        }
    }
    Ok(f)
}

fn cache_dir(task: &Path, c: &CacheArgs) -> Option<PathBuf> {
    if c.no_cache {
        return None;
    }
    c.cache_dir
        .clone()
        .or_else(|| Some(task.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf)))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| PlanError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn plan(args: PlanArgs) -> Result<()> {
    let task = load_task_file(&args.task, &args.overrides)?.to_task()?;
    let cache = cache_dir(&args.task, &args.cache);
    if let Some(path) = &args.dump_scp {
        write_or_print(Some(path), &write_exchange(&bigraph_for(&task, cache.as_deref())?))?;
    }
    let plan = run_pipeline(&task, cache.as_deref())?;
    write_or_print(args.output.as_deref(), &plan_to_json(&plan))?;
    if let Some(path) = &args.svg {
        write_or_print(Some(path), &render_svg(&plan, &task.targets))?;
    }
    let s = &plan.stats;
    eprintln!(
        "{} targets, {} base poses ({} chosen sets, {}), config path {:.3} rad, {:.3} s",
        task.targets.len(),
        s.cluster_count,
        s.chosen_sets,
        s.solver.name(),
        s.config_path_length,
        s.timing.total
    );
    Ok(())
}

fn benchmark(args: BenchArgs) -> Result<()> {
    let task = load_task_file(&args.task, &args.overrides)?.to_task()?;
    let cache = cache_dir(&args.task, &args.cache);
    let target_counts = if args.target_counts.is_empty() {
        vec![task.targets.len()]
    } else {
        args.target_counts
    };
    let sweep = Sweep {
        solvers: args.solvers,
        grid_sizes: args.grid_sizes,
        target_counts,
    };
    let mut out = bench_csv(&run_benchmark(&task, &sweep, cache.as_deref())?);
    if !args.voxel_sizes.is_empty() {
        out.push('\n');
        out.push_str(&database_csv(&database_sweep(&task.robot, &args.voxel_sizes)?));
    }
    write_or_print(args.output.as_deref(), &out)
}

fn gen_db(args: GenDbArgs) -> Result<()> {
    let file = TaskFile::load(&args.task)?;
    let task = file.to_task()?;
    let voxel_size = match (args.voxel_size, task.region) {
        (Some(v), _) => v,
        (None, RegionSource::Fitted(spec)) => spec.voxel_size,
        (None, RegionSource::Explicit(_)) => {
            return Err(PlanError::InvalidInput(
                "task has an explicit region; pass --voxel-size".into(),
            ))
        }
    };
    let bounds = Aabb::default_for(&task.robot);
    let (db, path) = match args.output {
        Some(path) => {
            let db = generate_database(&AnalyticArm::new(task.robot.clone())?, voxel_size, bounds)?;
            db.save(&path)?;
            (db, path)
        }
        None => {
            let dir = args
                .cache_dir
                .unwrap_or_else(|| args.task.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf));
            let db = load_or_generate_database(&task.robot, voxel_size, Some(&dir))?;
            (db, database_cache_path(&dir, &task.robot, voxel_size, &bounds))
        }
    };
    eprintln!(
        "{} voxels, {} valid, written to {}",
        db.len(),
        db.valid_count(),
        path.display()
    );
    Ok(())
}

fn render(args: RenderArgs) -> Result<()> {
    let plan = load_plan(&args.plan)?;
    let task = TaskFile::load(&args.task)?.to_task()?;
    if let Some(i) = plan
        .clusters
        .iter()
        .flat_map(|c| c.target_indices.iter())
        .find(|&&i| i >= task.targets.len())
    {
        return Err(PlanError::InvalidInput(format!(
            "plan refers to target {i} but the task has {}",
            task.targets.len()
        )));
    }
    write_or_print(args.output.as_deref(), &render_svg(&plan, &task.targets))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Plan(a) => plan(a),
        Command::Benchmark(a) => benchmark(a),
        Command::GenDb(a) => gen_db(a),
        Command::Render(a) => render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
