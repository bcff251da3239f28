//! The `rampforge` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rampforge_core::colorspace::{parse_hex, SrgbColor};
use rampforge_core::curve::AffineEdit;
use rampforge_core::clustering::ElasticParams;
use rampforge_core::features::FeatureMask;
use rampforge_core::generator::{
    sample_ramp, DivergeOptions, GamutMode, GamutStatus, GeneratedKind, GeneratedRamp, RotationPolicy,
};
use rampforge_core::modelbook::{ElasticWeight, ModelBook, TrainConfig};

use crate::book::{load_modelbook, save_modelbook};
use crate::corpus::Corpus;
use crate::export::{fixed4, format_colors, Format};
use crate::server;
use crate::state::RampState;
use crate::train::{diagnostics_csv, train_parallel};

#[derive(Debug, Parser)]
#[command(name = "rampforge", version, about = "Mine designer color ramps and generate new ones from a seed color")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster a corpus and write a model book.
    Train(TrainArgs),
    /// Seed a model with a color to make a sequential ramp.
    Seed(SeedArgs),
    /// Seed a model and join two arms into a diverging ramp.
    Diverge(DivergeArgs),
    /// Apply one more edit to a saved ramp state.
    Transform(TransformArgs),
    /// Summarize a corpus.
    Stats(StatsArgs),
    /// Render a saved ramp state.
    Export(ExportArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Output model book.
    #[arg(long)]
    models: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads for the feature-subset search (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 15)]
    k_max: usize,
    /// Skip the subset search: fixed k (requires --mask).
    #[arg(long, requires = "mask")]
    k: Option<usize>,
    /// Feature subset bitmask 1..=255 used with --k.
    #[arg(long, requires = "k", value_parser = clap::value_parser!(u8).range(1..))]
    mask: Option<u8>,
    /// Fixed elastic weight instead of sweeping 0.0..=1.0.
    #[arg(long)]
    weight: Option<f64>,
    /// Gibbs sweeps for the elastic clustering.
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Kernel width (default: half the median pairwise distance).
    #[arg(long)]
    sigma: Option<f64>,
    /// Write the score tables as CSV.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// Number of colors to sample (default: the ramp's own control points).
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Hex)]
    format: Format,
}

#[derive(Debug, Args)]
struct SeedArgs {
    #[arg(long)]
    models: PathBuf,
    #[arg(long)]
    model: String,
    #[arg(long, value_parser = parse_color)]
    color: SrgbColor,
    #[arg(long, value_parser = ["strict", "clip"], default_value = "strict")]
    gamut: String,
    /// Write the ramp state here (for `transform` and `export`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    render: RenderArgs,
}

#[derive(Debug, Args)]
struct DivergeArgs {
    #[command(flatten)]
    seed: SeedArgs,
    /// Extra rotation of the second arm in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rotate: f64,
    /// Angle between the arms (default: the model book's).
    #[arg(long)]
    angle: Option<f64>,
    /// Clamp an out-of-range --rotate instead of failing.
    #[arg(long)]
    clamp: bool,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[arg(long)]
    models: PathBuf,
    #[arg(long)]
    state: PathBuf,
    /// Rotation in the a*-b* plane, degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rotate: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    translate_l: f64,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    reflect: bool,
    /// Write the updated state here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    render: RenderArgs,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    models: PathBuf,
    #[arg(long)]
    state: PathBuf,
    #[command(flatten)]
    render: RenderArgs,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    models: PathBuf,
    #[arg(long, default_value_t = server::DEFAULT_PORT)]
    port: u16,
    /// Directory of static files served under `/`.
    #[arg(long = "static")]
    static_dir: Option<PathBuf>,
}

fn parse_color(s: &str) -> Result<SrgbColor, String> {
    parse_hex(s).map_err(|e| e.to_string())
}

/// Exit code for bad usage.
pub const EXIT_USAGE: i32 = 1;
/// Exit code for data and model errors.
pub const EXIT_DATA: i32 = 2;

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Runs the command line with `args` (including the program name) and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let result = match cli.command {
        Command::Train(a) => train(a, out),
        Command::Seed(a) => seed(a, out, err),
        Command::Diverge(a) => diverge(a, out, err),
        Command::Transform(a) => transform(a, out, err),
        Command::Stats(a) => stats(a, out),
        Command::Export(a) => export(a, out, err),
        Command::Serve(a) => serve(a, err),
    };
    match result {
        Ok(()) => 0,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DATA
        }
    }
}

fn train(a: TrainArgs, out: &mut dyn Write) -> Outcome {
    let corpus = Corpus::load(&a.corpus)?;
    let config = TrainConfig {
        rng_seed: a.seed,
        k_range: a.k_min..=a.k_max,
        kmeans_fixed: match (a.k, a.mask) {
            (Some(k), Some(m)) => Some((k, FeatureMask::new(m).ok_or("mask must be non-zero")?)),
            _ => None,
        },
        elastic_weight: a.weight.map_or(ElasticWeight::Sweep, ElasticWeight::Fixed),
        elastic: ElasticParams {
            alpha: a.alpha,
            sigma: a.sigma,
            sweeps: a.iterations,
            rng_seed: a.seed,
        },
    };
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let report = train_parallel(&corpus.ramps, &corpus.fingerprint, &config, jobs)?;
    save_modelbook(&report.book, &a.models)?;
    if let Some(path) = &a.diagnostics {
        std::fs::write(path, diagnostics_csv(&report)).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let count = |m: &str| report.book.models.iter().filter(|x| x.method.as_str() == m).count();
    let mask = report.kmeans.feature_subset.map_or(0, FeatureMask::bits);
    let groups: Vec<&str> = report
        .kmeans
        .feature_subset
        .map(|m| m.groups().map(|g| g.name()).collect())
        .unwrap_or_default();
    writeln!(out, "curves: {}", report.curves.len())?;
    writeln!(
        out,
        "kmeans: k={} mask={} features={} tightness={}",
        report.kmeans.k,
        mask,
        groups.join("+"),
        report.kmeans.mean_tightness.map_or("-".into(), fixed4)
    )?;
    writeln!(
        out,
        "elastic: w={:.1} clusters={} tightness={}",
        report.elastic_w,
        report.elastic.k,
        report.elastic.mean_tightness.map_or("-".into(), fixed4)
    )?;
    writeln!(out, "models: kmeans={} elastic={}", count("kmeans"), count("elastic"))?;
    writeln!(out, "diverging angle: {}", fixed4(report.book.diverging_angle_degrees))?;
    writeln!(out, "fingerprint: {}", report.book.corpus_fingerprint)?;
    Ok(())
}

fn render(ramp: &GeneratedRamp, r: &RenderArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let colors = match r.n {
        Some(n) if n as usize != ramp.colors.len() => sample_ramp(ramp, n as usize)?,
        _ => ramp.colors.clone(),
    };
    match ramp.gamut_status {
        GamutStatus::Clipped => writeln!(err, "warning: colors outside the sRGB gamut were clipped")?,
        GamutStatus::Reverted => writeln!(err, "warning: the edit leaves the sRGB gamut; kept the previous ramp")?,
        _ => {}
    }
    out.write_all(format_colors(&colors, r.format).as_bytes())?;
    Ok(())
}

fn write_state(state: &RampState, path: Option<&Path>) -> Outcome {
    if let Some(p) = path {
        state.save(p)?;
    }
    Ok(())
}

fn seed_state(a: &SeedArgs, kind: GeneratedKind) -> Result<(ModelBook, RampState), Failure> {
    let book = load_modelbook(&a.models)?;
    let mode: GamutMode = a.gamut.parse().map_err(|_| "bad gamut mode")?;
    Ok((book, RampState::new(&a.model, &a.color.to_string(), kind, mode)))
}

fn seed(a: SeedArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (book, state) = seed_state(&a, GeneratedKind::Sequential)?;
    let ramp = state.replay(&book)?;
    write_state(&state, a.out.as_deref())?;
    render(&ramp, &a.render, out, err)
}

fn diverge(a: DivergeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (book, mut state) = seed_state(&a.seed, GeneratedKind::Diverging)?;
    let mut opts = DivergeOptions::from_book(
        &book,
        if a.clamp { RotationPolicy::Clamp } else { RotationPolicy::Reject },
    );
    if let Some(angle) = a.angle {
        if !(angle > 0.0 && angle <= 180.0) {
            return Err(Failure(format!("--angle {angle} is outside (0, 180]")));
        }
        opts.angle_degrees = angle;
        state.angle_degrees = Some(angle);
    }
    let (rotation, clamped) = opts.resolve_rotation(a.rotate)?;
    if clamped {
        writeln!(
            err,
            "warning: --rotate {} clamped to {}",
            a.rotate, rotation
        )?;
    }
    state.arm_rotation_degrees = rotation;
    let ramp = state.replay(&book)?;
    write_state(&state, a.seed.out.as_deref())?;
    render(&ramp, &a.seed.render, out, err)
}

fn transform(a: TransformArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let book = load_modelbook(&a.models)?;
    let state = RampState::load(&a.state)?;
    let edit = AffineEdit {
        translate_l: a.translate_l,
        translate_a: 0.0,
        translate_b: 0.0,
        rotate_ab_degrees: a.rotate,
        scale: a.scale,
        reflect: a.reflect,
    };
    let (next, ramp) = state.transform(&book, edit)?;
    write_state(&next, a.out.as_deref())?;
    render(&ramp, &a.render, out, err)
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> Outcome {
    let corpus = Corpus::load(&a.corpus)?;
    write!(out, "{}", corpus.stats())?;
    Ok(())
}

fn export(a: ExportArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let book = load_modelbook(&a.models)?;
    let ramp = RampState::load(&a.state)?.replay(&book)?;
    render(&ramp, &a.render, out, err)
}

fn serve(a: ServeArgs, err: &mut dyn Write) -> Outcome {
    let book = load_modelbook(&a.models)?;
    let rt = tokio::runtime::Runtime::new()?;
    writeln!(err, "listening on http://127.0.0.1:{}", a.port)?;
    rt.block_on(server::serve(book, a.port, a.static_dir))?;
    Ok(())
}
