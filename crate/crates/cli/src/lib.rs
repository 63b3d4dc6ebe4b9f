//! Subcommands behind the `motion-insight` binary.

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use motion_insight_core::config::ConfigError;
use motion_insight_core::model::{load_dataset, parse_capture, parse_labels};
use motion_insight_core::synthgen::{self, DeficitParams, Scenario, ScenarioSpec};
use motion_insight_core::{Analysis, Config, Dataset, FilterSpec, IngestError, ParseMode, Variable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "motion-insight", version, about = "Motion analytics for long clinical captures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Strictly parse a dataset manifest, or one capture/labels pair.
    Validate(ValidateArgs),
    /// Compute the full report for a dataset.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic dataset with known deficits.
    Synth(SynthArgs),
    /// Serve the query API over a dataset.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Dataset manifest.
    #[arg(required_unless_present = "capture", conflicts_with_all = ["capture", "labels"])]
    pub manifest: Option<PathBuf>,
    #[arg(long, requires = "labels")]
    pub capture: Option<PathBuf>,
    #[arg(long, requires = "capture")]
    pub labels: Option<PathBuf>,
}

/// Threshold overrides; each one beats the config file.
#[derive(Debug, Args, Default)]
pub struct Overrides {
    #[arg(long, value_name = "SECONDS")]
    pub min_duration: Option<f64>,
    #[arg(long, value_name = "DEGREES")]
    pub high_trunk: Option<f64>,
    #[arg(long, value_name = "RATIO")]
    pub arm_ratio: Option<f64>,
    #[arg(long, value_name = "FRACTION")]
    pub weight_deviation: Option<f64>,
    #[arg(long, value_name = "METERS")]
    pub feet_threshold: Option<f64>,
    #[arg(long, value_name = "SECONDS")]
    pub min_freeze: Option<f64>,
    #[arg(long, value_name = "N")]
    pub max_points: Option<usize>,
    /// Treat +z of the pelvis frame as backward.
    #[arg(long)]
    pub forward_flip: bool,
    /// Use the same-side distance in the weight-shift numerator.
    #[arg(long)]
    pub weight_literal: bool,
}

impl Overrides {
    fn apply(&self, cfg: &mut Config) {
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut cfg.filters.min_duration_s, self.min_duration);
        set(&mut cfg.filters.high_trunk_deg, self.high_trunk);
        set(&mut cfg.filters.arm_ratio, self.arm_ratio);
        set(&mut cfg.filters.weight_deviation, self.weight_deviation);
        set(&mut cfg.freeze.feet_threshold_m, self.feet_threshold);
        set(&mut cfg.freeze.min_freeze_s, self.min_freeze);
        if let Some(n) = self.max_points {
            cfg.query.max_points = n;
        }
        cfg.kinematics.forward_flip |= self.forward_flip;
        cfg.kinematics.weight_literal |= self.weight_literal;
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub manifest: PathBuf,
    /// JSON threshold config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write per-frame body variables as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Filter for the report's selection, `kind` or `kind=value`; repeatable.
    #[arg(long = "filter", value_name = "KIND[=VALUE]")]
    pub filters: Vec<String>,
    /// Drop labels with unknown actions instead of failing.
    #[arg(long)]
    pub lenient: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    pub scenario: Scenario,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_name = "SECONDS")]
    pub duration: Option<f64>,
    #[arg(long)]
    pub fps: Option<f64>,
    #[arg(long)]
    pub freeze_count: Option<usize>,
    #[arg(long, value_name = "SECONDS")]
    pub freeze_duration: Option<f64>,
    #[arg(long)]
    pub arm_ratio: Option<f64>,
    #[arg(long, value_name = "METERS")]
    pub weight_bias: Option<f64>,
    #[arg(long, value_name = "DEGREES")]
    pub fall_trunk: Option<f64>,
    #[arg(long, value_name = "SECONDS")]
    pub slow_sit_to_stand: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    pub manifest: PathBuf,
    /// JSON threshold config; falls back to `MOTION_INSIGHT_CONFIG`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Reject labels with unknown actions instead of dropping them.
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// A failure with its exit code; the message is already user-facing.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub lines: Vec<String>,
}

impl Failure {
    fn new(code: i32, msg: impl Into<String>) -> Self {
        Failure {
            code,
            lines: vec![msg.into()],
        }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        let code = if e.is_io() { EXIT_IO } else { EXIT_INVALID };
        Failure {
            code,
            lines: e
                .diagnostics()
                .into_iter()
                .map(|(ctx, code, msg)| {
                    if ctx.is_empty() {
                        format!("{code}: {msg}")
                    } else {
                        format!("{ctx}: {code}: {msg}")
                    }
                })
                .collect(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Io { .. } => EXIT_IO,
            _ => EXIT_INVALID,
        };
        Failure::new(code, format!("config: {e}"))
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(EXIT_IO, format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| io_fail(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| io_fail(path, e))
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Validate(a) => validate(&a),
        Command::Analyze(a) => analyze(&a),
        Command::Synth(a) => synth(&a),
        Command::Serve(a) => serve(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            for line in &f.lines {
                eprintln!("error: {line}");
            }
            f.code
        }
    }
}

pub fn validate(a: &ValidateArgs) -> Result<(), Failure> {
    if let Some(m) = &a.manifest {
        let ds = load_dataset(m, ParseMode::Strict)?;
        println!(
            "ok: {} segments, {} frames, {:.1} s",
            ds.segments().len(),
            ds.total_frames(),
            ds.total_duration_s()
        );
        return Ok(());
    }
    let (cp, lp) = (a.capture.as_ref().unwrap(), a.labels.as_ref().unwrap());
    let with_path = |path: &Path, e: IngestError| {
        let mut f = Failure::from(e);
        for l in &mut f.lines {
            *l = format!("{}: {l}", path.display());
        }
        f
    };
    let capture = parse_capture(&read(cp)?).map_err(|e| with_path(cp, e))?;
    let labels = parse_labels(&read(lp)?, capture.frame_count(), ParseMode::Strict)
        .map_err(|e| with_path(lp, e))?;
    println!(
        "ok: {} frames, {} labels",
        capture.frame_count(),
        labels.labels.len()
    );
    Ok(())
}

fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<Config, Failure> {
    let mut cfg = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn mode(lenient: bool) -> ParseMode {
    if lenient {
        ParseMode::Lenient
    } else {
        ParseMode::Strict
    }
}

pub fn analyze(a: &AnalyzeArgs) -> Result<(), Failure> {
    let cfg = load_config(a.config.as_deref(), &a.overrides)?;
    let dataset = load_dataset(&a.manifest, mode(a.lenient))?;
    for seg in dataset.segments() {
        for w in &seg.warnings {
            eprintln!("warning: {w}");
        }
    }
    let analysis = Analysis::new(dataset, cfg);
    let selection: Option<Vec<FilterSpec>> = if a.filters.is_empty() {
        None
    } else {
        Some(
            analysis
                .parse_filters(&a.filters)
                .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?,
        )
    };
    let report = analysis.report(selection.as_deref());
    let mut json = serde_json::to_vec_pretty(&report).expect("report serializes");
    json.push(b'\n');
    match &a.out {
        Some(p) => write(p, &json)?,
        None => std::io::stdout()
            .write_all(&json)
            .map_err(|e| Failure::new(EXIT_IO, format!("stdout: {e}")))?,
    }
    if let Some(p) = &a.csv {
        write_csv(p, &analysis)?;
    }
    Ok(())
}

/// One row per frame of every segment; gaps are empty cells.
pub fn write_frames_csv<W: Write>(out: W, analysis: &Analysis) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["segment", "frame", "global_frame", "valid"];
    header.extend(Variable::ALL.iter().map(|v| v.as_str()));
    w.write_record(&header)?;
    let ds: &Dataset = analysis.dataset();
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for (s, series) in analysis.series().iter().enumerate() {
        for i in 0..series.len() {
            row.clear();
            row.push(s.to_string());
            row.push(i.to_string());
            row.push(ds.global_frame(s, i).to_string());
            row.push(u8::from(series.is_valid(i)).to_string());
            row.extend(
                Variable::ALL
                    .iter()
                    .map(|&v| series.value(v, i).map_or_else(String::new, |x| x.to_string())),
            );
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_csv(path: &Path, analysis: &Analysis) -> Result<(), Failure> {
    let file = std::fs::File::create(path).map_err(|e| io_fail(path, e))?;
    write_frames_csv(std::io::BufWriter::new(file), analysis)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

pub fn synth(a: &SynthArgs) -> Result<(), Failure> {
    let d = DeficitParams::default();
    let mut spec = ScenarioSpec::new(a.scenario, a.seed).with_params(DeficitParams {
        freeze_count: a.freeze_count.unwrap_or(d.freeze_count),
        freeze_duration_s: a.freeze_duration.unwrap_or(d.freeze_duration_s),
        arm_ratio: a.arm_ratio.unwrap_or(d.arm_ratio),
        weight_bias_m: a.weight_bias.unwrap_or(d.weight_bias_m),
        fall_trunk_deg: a.fall_trunk.unwrap_or(d.fall_trunk_deg),
        slow_sit_to_stand_s: a.slow_sit_to_stand.unwrap_or(d.slow_sit_to_stand_s),
    });
    if let Some(s) = a.duration {
        spec = spec.with_duration(s);
    }
    if let Some(f) = a.fps {
        spec.fps = f;
    }
    let generated = synthgen::generate(&spec).map_err(|e| match e {
        synthgen::SpecError::Io { .. } => Failure::new(EXIT_IO, e.to_string()),
        _ => Failure::new(EXIT_USAGE, e.to_string()),
    })?;
    let manifest = generated
        .write(&a.out)
        .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    println!("{}", manifest.display());
    Ok(())
}

pub fn serve(a: &ServeArgs) -> Result<(), Failure> {
    let cfg_path = match &a.config {
        Some(p) => Some(p.clone()),
        None => std::env::var_os(motion_insight_service::CONFIG_ENV)
            .filter(|p| !p.is_empty())
            .map(PathBuf::from),
    };
    let cfg = load_config(cfg_path.as_deref(), &a.overrides)?;
    let dataset = load_dataset(&a.manifest, mode(!a.strict))?;
    for seg in dataset.segments() {
        for w in &seg.warnings {
            tracing::warn!("{w}");
        }
    }
    let analysis = Arc::new(Analysis::new(dataset, cfg));
    let addr = SocketAddr::new(a.host, a.port);
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    rt.block_on(motion_insight_service::serve(
        analysis,
        addr,
        |bound| eprintln!("listening on http://{bound}"),
        async {
            let _ = tokio::signal::ctrl_c().await;
        },
    ))
    .map_err(|e| Failure::new(EXIT_IO, e.to_string()))
}
