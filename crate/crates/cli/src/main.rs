use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bimrecon::io::{self, CloudFormat};
use bimrecon::metrics::{evaluate, EvalReport};
use bimrecon::pipeline::RunReport;
use bimrecon::synth::{self, SceneSpec};
use bimrecon::walls::SeedStrategy;
use bimrecon::{BimModel, Error, LabelMap, LabeledPointCloud, PipelineConfig, SemanticClass};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "bimrecon", version, about = "Reconstruct BIM models from labelled indoor point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reconstruct walls, doors and columns from a labelled point cloud.
    Reconstruct(ReconstructArgs),
    /// Compare a predicted model with a ground-truth model.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic labelled scan with its ground-truth model.
    Synth(SynthArgs),
    /// Summarise a point cloud or a model file.
    Info(InfoArgs),
}

#[derive(Debug, clap::Args)]
struct ReconstructArgs {
    /// Input point cloud (.ply or .xyz).
    cloud: PathBuf,
    /// Output directory; created if missing.
    #[arg(short, long)]
    out: PathBuf,
    /// Pipeline configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Uniform RANSAC seeding and no topology refinement.
    #[arg(long)]
    baseline: bool,
    /// Worker threads; 1 processes storeys sequentially.
    #[arg(long)]
    threads: Option<usize>,
    /// Input format, overriding the file extension.
    #[arg(long, value_enum)]
    format: Option<CloudArg>,
    /// Label remapping such as "0=wall,1=door".
    #[arg(long)]
    labels: Option<String>,
}

#[derive(Debug, clap::Args)]
struct EvaluateArgs {
    pred: PathBuf,
    gt: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    voxel_size: f64,
    /// Format printed on stdout.
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
    /// Also write the report as JSON to this file.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, clap::Args)]
struct SynthArgs {
    /// Scene description (TOML, or JSON by extension).
    #[arg(required_unless_present = "preset")]
    spec: Option<PathBuf>,
    /// Use a built-in scene instead of a spec file.
    #[arg(long, value_enum, conflicts_with = "spec")]
    preset: Option<Preset>,
    #[arg(short, long)]
    out: PathBuf,
    /// Overrides the seed in the spec.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = CloudArg::Ply)]
    format: CloudArg,
}

#[derive(Debug, clap::Args)]
struct InfoArgs {
    /// A point cloud or a model (.json).
    path: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CloudArg {
    Ply,
    Xyz,
}

impl From<CloudArg> for CloudFormat {
    fn from(value: CloudArg) -> Self {
        match value {
            CloudArg::Ply => CloudFormat::Ply,
            CloudArg::Xyz => CloudFormat::XyzLabel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Room,
    MultiRoom,
    Benchmark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Setup,
    Config,
    ReadInput,
    Reconstruct,
    Synth,
    WriteOutput,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Setup => "setup",
            Stage::Config => "config",
            Stage::ReadInput => "read-input",
            Stage::Reconstruct => "reconstruct",
            Stage::Synth => "synth",
            Stage::WriteOutput => "write-output",
        })
    }
}

#[derive(Debug)]
struct Failure {
    stage: Stage,
    context: String,
    error: Error,
}

impl Failure {
    fn exit_code(&self) -> u8 {
        exit_code(&self.error)
    }
}

/// Exit status per error kind. 2 is left to argument parsing.
fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Io(_) => 3,
        Error::Parse { .. } | Error::UnsupportedFormat(_) | Error::SchemaVersionMismatch { .. } => 4,
        Error::InvalidConfig(_) => 5,
        Error::InvalidSpec(_) => 6,
        Error::Validation(_) => 7,
        Error::DegenerateInput(_) | Error::NoStoreyFound { .. } => 8,
        Error::InvalidSplit { .. } | Error::FitFailed { .. } => 9,
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage, context: impl fmt::Display) -> Result<T, Failure>;
}

impl<T> AtStage<T> for bimrecon::Result<T> {
    fn at(self, stage: Stage, context: impl fmt::Display) -> Result<T, Failure> {
        self.map_err(|error| Failure {
            stage,
            context: context.to_string(),
            error,
        })
    }
}

/// Files gathered in memory and committed together at the end of a run.
#[derive(Default)]
struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, path: PathBuf, bytes: impl Into<Vec<u8>>) {
        self.files.push((path, bytes.into()));
    }

    fn paths(&self) -> Vec<PathBuf> {
        self.files.iter().map(|(p, _)| p.clone()).collect()
    }

    /// Writes every file to a temporary sibling first and only renames once
    /// all of them were written.
    fn commit(self) -> Result<(), Failure> {
        let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
        let cleanup = |staged: &[(PathBuf, PathBuf)]| {
            for (tmp, _) in staged {
                let _ = std::fs::remove_file(tmp);
            }
        };
        for (path, bytes) in &self.files {
            let tmp = temp_sibling(path);
            if let Err(e) = std::fs::write(&tmp, bytes) {
                let _ = std::fs::remove_file(&tmp);
                cleanup(&staged);
                return Err(Failure {
                    stage: Stage::WriteOutput,
                    context: path.display().to_string(),
                    error: e.into(),
                });
            }
            staged.push((tmp, path.clone()));
        }
        for (i, (tmp, path)) in staged.iter().enumerate() {
            if let Err(e) = std::fs::rename(tmp, path) {
                cleanup(&staged[i..]);
                return Err(Failure {
                    stage: Stage::WriteOutput,
                    context: path.display().to_string(),
                    error: e.into(),
                });
            }
        }
        Ok(())
    }
}

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    path.with_file_name(format!(".{name}.tmp{}", std::process::id()))
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(Error::from)
        .at(Stage::WriteOutput, dir.display())
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Failure {
            stage: Stage::Setup,
            context: "--threads".into(),
            error: Error::InvalidConfig("thread count must be at least 1".into()),
        }),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Failure {
                stage: Stage::Setup,
                context: "thread pool".into(),
                error: Error::InvalidConfig(e.to_string()),
            })?;
            Ok(pool.install(f))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
struct ElementCounts {
    storeys: usize,
    walls: usize,
    doors: usize,
    columns: usize,
}

impl ElementCounts {
    fn of(model: &BimModel) -> Self {
        Self {
            storeys: model.storeys.len(),
            walls: model.walls.len(),
            doors: model.doors.len(),
            columns: model.columns.len(),
        }
    }
}

#[derive(Debug, Serialize)]
struct Timings {
    read_input: f64,
    reconstruction: f64,
    export: f64,
    total: f64,
    stages: RunReport,
}

#[derive(Debug, Serialize)]
struct RunManifest {
    generator: String,
    input: PathBuf,
    config: Option<PathBuf>,
    outputs: Vec<PathBuf>,
    seed: u64,
    baseline: bool,
    wall_seeding: SeedStrategy,
    topology_refinement: bool,
    threads: Option<usize>,
    points: usize,
    unknown_labels: usize,
    timings: Timings,
    counts: ElementCounts,
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let mut cfg = match &args.config {
        Some(p) => PipelineConfig::load(p).at(Stage::Config, p.display())?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.baseline {
        cfg = cfg.baseline();
    }
    cfg.validate().at(Stage::Config, "configuration")?;
    let map = match &args.labels {
        Some(s) => LabelMap::parse(s).at(Stage::Config, "--labels")?,
        None => LabelMap::default(),
    };

    let (cloud, stats) =
        io::read_point_cloud(&args.cloud, args.format.map(Into::into), &map).at(Stage::ReadInput, args.cloud.display())?;
    let read_input = start.elapsed().as_secs_f64();

    let t = Instant::now();
    let rec = with_threads(args.threads, || bimrecon::reconstruct(&cloud, &cfg))?
        .at(Stage::Reconstruct, args.cloud.display())?;
    let reconstruction = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mut outputs = Outputs::default();
    outputs.add(args.out.join("model.json"), io::write_bim_json(&rec.model));
    outputs.add(
        args.out.join("model.ifc"),
        io::export_ifc_string(&rec.model, rec.model.provenance.seed),
    );
    let export = t.elapsed().as_secs_f64();

    let manifest_path = args.out.join("manifest.json");
    let mut listed = outputs.paths();
    listed.push(manifest_path.clone());
    let manifest = RunManifest {
        generator: format!("bimrecon {}", env!("CARGO_PKG_VERSION")),
        input: args.cloud.clone(),
        config: args.config.clone(),
        outputs: listed,
        seed: cfg.seed,
        baseline: args.baseline,
        wall_seeding: cfg.wall_seeding,
        topology_refinement: cfg.topology_refinement,
        threads: args.threads,
        points: cloud.len(),
        unknown_labels: stats.unknown_labels,
        timings: Timings {
            read_input,
            reconstruction,
            export,
            total: start.elapsed().as_secs_f64(),
            stages: rec.report.clone(),
        },
        counts: ElementCounts::of(&rec.model),
    };
    outputs.add(manifest_path, to_json(&manifest));

    ensure_dir(&args.out)?;
    outputs.commit()?;
    let c = &manifest.counts;
    println!(
        "{} storeys, {} walls, {} doors, {} columns -> {}",
        c.storeys,
        c.walls,
        c.doors,
        c.columns,
        args.out.display()
    );
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    if !(args.voxel_size.is_finite() && args.voxel_size > 0.0) {
        return Err(Failure {
            stage: Stage::Setup,
            context: "--voxel-size".into(),
            error: Error::InvalidConfig(format!("voxel size must be positive, got {}", args.voxel_size)),
        });
    }
    let pred = io::load_bim_json(&args.pred).at(Stage::ReadInput, args.pred.display())?;
    let gt = io::load_bim_json(&args.gt).at(Stage::ReadInput, args.gt.display())?;
    let report: EvalReport = with_threads(args.threads, || evaluate(&pred, &gt, args.voxel_size))?;
    let json = to_json(&report);
    if let Some(out) = &args.out {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            ensure_dir(dir)?;
        }
        let mut outputs = Outputs::default();
        outputs.add(out.clone(), json.clone());
        outputs.commit()?;
    }
    match args.format {
        ReportFormat::Text => print!("{}", report.to_text()),
        ReportFormat::Json => print!("{json}"),
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Failure> {
    let mut spec = match (&args.spec, args.preset) {
        (Some(p), _) => SceneSpec::load(p).at(Stage::Config, p.display())?,
        (None, Some(Preset::Room)) => SceneSpec::room(6.0, 4.0),
        (None, Some(Preset::MultiRoom)) => SceneSpec::multi_room(args.seed.unwrap_or(0)),
        (None, Some(Preset::Benchmark)) => SceneSpec::two_storey_benchmark(),
        (None, None) => unreachable!("clap requires a spec or a preset"),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let scene = synth::generate(&spec).at(Stage::Synth, "scene")?;

    let format: CloudFormat = args.format.into();
    let cloud_name = match format {
        CloudFormat::Ply => "cloud.ply",
        CloudFormat::XyzLabel => "cloud.xyz",
    };
    let mut cloud_bytes = Vec::new();
    match format {
        CloudFormat::Ply => io::write_ply(&mut cloud_bytes, &scene.cloud, io::PlyEncoding::BinaryLittleEndian),
        CloudFormat::XyzLabel => io::write_xyz_label(&mut cloud_bytes, &scene.cloud),
    }
    .at(Stage::WriteOutput, cloud_name)?;

    let mut outputs = Outputs::default();
    outputs.add(args.out.join(cloud_name), cloud_bytes);
    outputs.add(args.out.join("gt.json"), io::write_bim_json(&scene.model));
    outputs.add(args.out.join("gt.ifc"), io::export_ifc_string(&scene.model, spec.seed));
    ensure_dir(&args.out)?;
    outputs.commit()?;
    println!(
        "{} points, {} walls, {} doors, {} columns -> {}",
        scene.cloud.len(),
        scene.model.walls.len(),
        scene.model.doors.len(),
        scene.model.columns.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct CloudInfo {
    points: usize,
    unknown_labels: usize,
    classes: Vec<(String, usize)>,
    min: [f64; 3],
    max: [f64; 3],
}

fn cloud_info(cloud: &LabeledPointCloud, unknown_labels: usize) -> CloudInfo {
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    for p in &cloud.points {
        for (k, v) in [p.x, p.y, p.z].into_iter().enumerate() {
            min[k] = min[k].min(v);
            max[k] = max[k].max(v);
        }
    }
    if cloud.is_empty() {
        min = [0.0; 3];
        max = [0.0; 3];
    }
    CloudInfo {
        points: cloud.len(),
        unknown_labels,
        classes: cloud
            .class_counts()
            .into_iter()
            .map(|(c, n)| (c.name().to_string(), n))
            .collect(),
        min,
        max,
    }
}

#[derive(Debug, Serialize)]
struct ModelInfo {
    schema_version: u32,
    generator: String,
    seed: u64,
    counts: ElementCounts,
    storeys: Vec<[f64; 2]>,
}

fn cmd_info(args: InfoArgs) -> Result<(), Failure> {
    let is_model = args.path.extension().and_then(|e| e.to_str()) == Some("json");
    if is_model {
        let model = io::load_bim_json(&args.path).at(Stage::ReadInput, args.path.display())?;
        let info = ModelInfo {
            schema_version: model.schema_version,
            generator: model.provenance.generator.clone(),
            seed: model.provenance.seed,
            counts: ElementCounts::of(&model),
            storeys: model.storeys.iter().map(|s| [s.floor_z, s.ceiling_z]).collect(),
        };
        match args.format {
            ReportFormat::Json => print!("{}", to_json(&info)),
            ReportFormat::Text => {
                println!("model       {}", args.path.display());
                println!("generator   {}", info.generator);
                println!("seed        {}", info.seed);
                for (i, [lo, hi]) in info.storeys.iter().enumerate() {
                    println!("storey {i}    z {lo:.3} .. {hi:.3}");
                }
                println!("walls       {}", info.counts.walls);
                println!("doors       {}", info.counts.doors);
                println!("columns     {}", info.counts.columns);
            }
        }
    } else {
        let (cloud, stats) =
            io::read_point_cloud(&args.path, None, &LabelMap::default()).at(Stage::ReadInput, args.path.display())?;
        let info = cloud_info(&cloud, stats.unknown_labels);
        match args.format {
            ReportFormat::Json => print!("{}", to_json(&info)),
            ReportFormat::Text => {
                println!("cloud       {}", args.path.display());
                println!("points      {}", info.points);
                for class in SemanticClass::ALL {
                    let n = info
                        .classes
                        .iter()
                        .find(|(c, _)| c == class.name())
                        .map_or(0, |(_, n)| *n);
                    println!("{:<11} {n}", class.name());
                }
                println!(
                    "bounds      [{:.3}, {:.3}, {:.3}] .. [{:.3}, {:.3}, {:.3}]",
                    info.min[0], info.min[1], info.min[2], info.max[0], info.max[1], info.max[2]
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Info(a) => cmd_info(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error [{}] {}: {}", f.stage, f.context, f.error);
            ExitCode::from(f.exit_code())
        }
    }
}
