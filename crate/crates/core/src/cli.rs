//! Command-line experiments. Every CSV written starts with a `#` line holding
//! the run's configuration as JSON; the output directory is not part of it.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::controller::{fibonacci_starts, orient, sweep_tilt, write_sweep_csv, ControllerConfig};
use crate::corpus::{self, CorpusKind, PROFILE_SAMPLES};
use crate::environment::{load_radiance_map, synth_scene, Lobe, RadianceMap, SceneRecipe};
use crate::error::{Error, Result};
use crate::photodiff::{blur_profile, count_modes_1d};
use crate::plot::{stacked_svg, LinePlot, Series};
use crate::simulate::{
    at_latitude, batch_stats, compare_day, export_histograms, simulate_batch, urban_batch, urban_occluders,
    write_summary_csv, ActuatorModel, EnergyLedger, Location, LocationResult, PanelModel,
};
use crate::sphere::{Orientation, SphereGrid};
use crate::strategies::{benchmark, write_benchmark_csv, Strategy};

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "heliotrope", version, about = "Solar panel orientation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Orient one panel on one scene and record the trajectory.
    Orient(OrientArgs),
    /// Mean percentage of optimal over a corpus as a function of detector tilt.
    SweepTilt(SweepArgs),
    /// Compare orientation strategies over a corpus.
    Benchmark(BenchmarkArgs),
    /// Energy over a simulated day (or a batch of urban sites).
    SimulateDay(DayArgs),
    /// 1D scale-space profiles: radiance, irradiance, blurred irradiance and
    /// photodifferential per tilt.
    Scalespace(ScalespaceArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ControllerArgs {
    /// Detector tilt, degrees.
    #[arg(long, default_value_t = 45.0)]
    pub delta_theta: f64,
    /// Actuator step, degrees.
    #[arg(long, default_value_t = 5.0)]
    pub step: f64,
    /// Relative actuation threshold.
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
}

impl ControllerArgs {
    pub fn config(&self) -> Result<ControllerConfig> {
        let cfg = ControllerConfig {
            delta_theta_deg: self.delta_theta,
            step_deg: self.step,
            threshold: self.threshold,
            max_iters: self.max_iters,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A scene named on the command line.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "String")]
pub enum RecipeSource {
    Uniform,
    PointSun,
    Unimodal(u64),
    Multimodal(u64),
    File(PathBuf),
}

impl From<RecipeSource> for String {
    fn from(r: RecipeSource) -> String {
        match r {
            RecipeSource::Uniform => "uniform".into(),
            RecipeSource::PointSun => "point-sun".into(),
            RecipeSource::Unimodal(s) => format!("unimodal:{s}"),
            RecipeSource::Multimodal(s) => format!("multimodal:{s}"),
            RecipeSource::File(p) => p.display().to_string(),
        }
    }
}

impl FromStr for RecipeSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let seed = |v: &str| v.parse::<u64>().map_err(|_| format!("bad seed in {s:?}"));
        Ok(match s.split_once(':') {
            None if s == "uniform" => RecipeSource::Uniform,
            None if s == "point-sun" => RecipeSource::PointSun,
            Some(("unimodal", v)) => RecipeSource::Unimodal(seed(v)?),
            Some(("multimodal", v)) => RecipeSource::Multimodal(seed(v)?),
            _ if s.ends_with(".json") => RecipeSource::File(PathBuf::from(s)),
            _ => {
                return Err(format!(
                    "unknown recipe {s:?}; expected uniform, point-sun, unimodal:N, multimodal:N or a .json file"
                ))
            }
        })
    }
}

/// Direction of the lobe in the `point-sun` recipe (zenith, azimuth).
pub const POINT_SUN_DEG: (f64, f64) = (40.0, 200.0);

impl RecipeSource {
    pub fn recipe(&self) -> Result<SceneRecipe> {
        Ok(match self {
            RecipeSource::Uniform => SceneRecipe::uniform(1.0),
            RecipeSource::PointSun => SceneRecipe {
                lobes: vec![Lobe::new(POINT_SUN_DEG.0, POINT_SUN_DEG.1, 2.0, 1000.0)],
                ..SceneRecipe::uniform(0.0)
            },
            RecipeSource::Unimodal(s) => corpus::unimodal_recipe(*s),
            RecipeSource::Multimodal(s) => corpus::multimodal_recipe(*s),
            RecipeSource::File(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&text).map_err(|_| Error::Parse {
                    what: "scene recipe",
                    input: p.display().to_string(),
                })?
            }
        })
    }
}

/// `zenith,azimuth` in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StartAngles {
    pub zenith_deg: f64,
    pub azimuth_deg: f64,
}

impl FromStr for StartAngles {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (z, a) = s.split_once(',').ok_or_else(|| format!("expected zenith,azimuth, got {s:?}"))?;
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad angle {v:?}"));
        let (zenith_deg, azimuth_deg) = (num(z)?, num(a)?);
        if !(0.0..=90.0).contains(&zenith_deg) {
            return Err(format!("start zenith {zenith_deg} outside [0, 90]"));
        }
        Ok(StartAngles {
            zenith_deg,
            azimuth_deg,
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(group(clap::ArgGroup::new("scene").required(true).args(["map", "recipe"])))]
pub struct OrientArgs {
    /// Radiance map in PFM format.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// uniform, point-sun, unimodal:SEED, multimodal:SEED or a recipe .json file.
    #[arg(long)]
    pub recipe: Option<RecipeSource>,
    /// Map height for recipes; width is twice this.
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    /// Starting panel orientation as zenith,azimuth in degrees.
    #[arg(long, default_value = "0,0")]
    pub start: StartAngles,
    #[command(flatten)]
    pub controller: ControllerArgs,
    #[arg(long, default_value = "out")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CorpusArgs {
    /// uniform, unimodal, multimodal or mixed.
    #[arg(long, value_parser = parse_corpus)]
    #[serde(serialize_with = "corpus_name")]
    pub corpus: CorpusKind,
    #[arg(long, default_value_t = 0)]
    pub corpus_seed: u64,
    #[arg(long)]
    pub count: usize,
    /// Starting orientations per scene for iterative strategies.
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub start_seed: u64,
}

fn parse_corpus(s: &str) -> std::result::Result<CorpusKind, String> {
    CorpusKind::parse(s).ok_or_else(|| format!("unknown corpus {s:?}"))
}

fn corpus_name<S: serde::Serializer>(k: &CorpusKind, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(k.name())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Detector tilts to evaluate, degrees.
    #[arg(long, value_delimiter = ',', default_value = "5,15,30,45,60,90")]
    pub tilts: Vec<f64>,
    #[command(flatten)]
    pub controller: ControllerArgs,
    #[arg(long, default_value = "out")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "tetrahedron,shading_wall,fixed_up,geodesic_dome,proposed"
    )]
    pub strategies: Vec<String>,
    #[command(flatten)]
    pub controller: ControllerArgs,
    #[arg(long, default_value = "out")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DayArgs {
    #[arg(long, default_value_t = 40.7128, allow_negative_numbers = true)]
    pub lat: f64,
    #[arg(long, default_value_t = -74.006, allow_negative_numbers = true)]
    pub lon: f64,
    /// Local date, YYYY-MM-DD.
    #[arg(long, default_value = "2023-06-21")]
    pub date: NaiveDate,
    /// UTC offset of local time, whole hours.
    #[arg(long, default_value_t = -4, allow_negative_numbers = true)]
    pub tz: i32,
    /// First local hour simulated.
    #[arg(long, default_value_t = 5)]
    pub from: u32,
    /// Last local hour simulated.
    #[arg(long, default_value_t = 20)]
    pub to: u32,
    /// Interval length, minutes.
    #[arg(long, default_value_t = 10.0)]
    pub interval: f64,
    /// Surround the site with seeded urban occluders.
    #[arg(long)]
    pub scene_seed: Option<u64>,
    /// Simulate this many seeded urban sites instead of one location.
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "proposed,sun_tracker,fixed_latitude")]
    pub strategies: Vec<String>,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    #[arg(long, default_value_t = 0.0625)]
    pub panel_area: f64,
    #[arg(long, default_value_t = 0.20)]
    pub efficiency: f64,
    /// Actuator energy per single-axis step, joules.
    #[arg(long, default_value_t = crate::simulate::DEFAULT_STEP_ENERGY_J)]
    pub step_energy: f64,
    #[command(flatten)]
    pub controller: ControllerArgs,
    #[arg(long, default_value = "out")]
    #[serde(skip)]
    pub out: PathBuf,
}

/// The built-in three-lobe profile or a seeded multimodal one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "String")]
pub enum ProfileSource {
    ThreeLobe,
    Seed(u64),
}

impl From<ProfileSource> for String {
    fn from(p: ProfileSource) -> String {
        match p {
            ProfileSource::ThreeLobe => "three-lobe".into(),
            ProfileSource::Seed(s) => s.to_string(),
        }
    }
}

impl FromStr for ProfileSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "three-lobe" {
            Ok(ProfileSource::ThreeLobe)
        } else {
            s.parse()
                .map(ProfileSource::Seed)
                .map_err(|_| format!("expected three-lobe or a seed, got {s:?}"))
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScalespaceArgs {
    /// three-lobe or a profile seed.
    #[arg(long, default_value = "three-lobe")]
    pub profile_seed: ProfileSource,
    #[arg(long, value_delimiter = ',', default_value = "5,45,90")]
    pub tilts: Vec<f64>,
    #[arg(long, default_value_t = PROFILE_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value = "out")]
    #[serde(skip)]
    pub out: PathBuf,
}

/// How a run ended, for the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Done => 0,
            Outcome::NotConverged => 2,
        }
    }
}

/// Caps worker threads from `HELIOTROPE_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("HELIOTROPE_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Error::Parse {
        what: "HELIOTROPE_THREADS",
        input: v.clone(),
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

struct Output<'a> {
    dir: &'a Path,
    header: String,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path, command: &Command) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json = serde_json::to_string(command).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(Output {
            dir,
            header: format!("# {json}\n"),
        })
    }

    fn csv(&self, name: &str, body: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut buf = self.header.clone().into_bytes();
        body(&mut buf).map_err(|e| Error::io(&path, e))?;
        fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    fn svg(&self, name: &str, svg: String) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Orient(a) => cmd_orient(a, &cli.command),
        Command::SweepTilt(a) => cmd_sweep_tilt(a, &cli.command),
        Command::Benchmark(a) => cmd_benchmark(a, &cli.command),
        Command::SimulateDay(a) => cmd_simulate_day(a, &cli.command),
        Command::Scalespace(a) => cmd_scalespace(a, &cli.command),
    }
}

fn grid(height: usize) -> Result<SphereGrid> {
    if height < 2 {
        return Err(Error::InvalidArgument(format!("map height {height} too small")));
    }
    Ok(SphereGrid::with_height(height))
}

fn load_scene(a: &OrientArgs) -> Result<RadianceMap> {
    match (&a.map, &a.recipe) {
        (Some(p), None) => load_radiance_map(p),
        (None, Some(r)) => synth_scene(&r.recipe()?, grid(a.height)?),
        _ => Err(Error::InvalidArgument("give exactly one of --map and --recipe".into())),
    }
}

pub fn cmd_orient(a: &OrientArgs, command: &Command) -> Result<Outcome> {
    let map = load_scene(a)?;
    let cfg = a.controller.config()?;
    let start = Orientation::from_angles_deg(a.start.zenith_deg, a.start.azimuth_deg);
    let report = orient(&map, &start, &cfg)?;
    let out = Output::new(&a.out, command)?;
    out.csv("trajectory.csv", |w| report.write_trajectory_csv(&map, w))?;
    let o = report.final_orientation;
    out.csv("summary.csv", |w| {
        writeln!(w, "converged,iterations,axis_steps,zenith_deg,azimuth_deg,irradiance_w_m2")?;
        writeln!(
            w,
            "{},{},{},{:.6},{:.6},{:.6}",
            report.converged,
            report.iterations,
            report.axis_steps,
            o.zenith_deg(),
            o.azimuth_deg(),
            report.final_irradiance
        )
    })?;
    println!(
        "{} after {} iterations at zenith {:.2}, azimuth {:.2}: {:.4} W/m2",
        if report.converged { "converged" } else { "did not converge" },
        report.iterations,
        o.zenith_deg(),
        o.azimuth_deg(),
        report.final_irradiance
    );
    Ok(if report.converged {
        Outcome::Done
    } else {
        Outcome::NotConverged
    })
}

fn corpus_maps(c: &CorpusArgs) -> Result<Vec<RadianceMap>> {
    if c.count == 0 || c.starts == 0 {
        return Err(Error::InvalidArgument("--count and --starts must be positive".into()));
    }
    corpus::scene_corpus(c.corpus, c.corpus_seed, c.count)
}

pub fn cmd_sweep_tilt(a: &SweepArgs, command: &Command) -> Result<Outcome> {
    let template = a.controller.config()?;
    let maps = corpus_maps(&a.corpus)?;
    let starts = fibonacci_starts(a.corpus.starts, a.corpus.start_seed);
    let rows = sweep_tilt(&maps, &a.tilts, &starts, &template)?;
    let out = Output::new(&a.out, command)?;
    out.csv("sweep.csv", |w| write_sweep_csv(&rows, a.corpus.corpus.name(), maps.len(), w))?;
    let plot = LinePlot::new(
        format!("{} corpus, {} scenes", a.corpus.corpus.name(), maps.len()),
        "detector tilt (deg)",
        "mean % of optimal",
    )
    .with_series(Series::new(
        "proposed",
        rows.iter().map(|r| (r.delta_theta_deg, r.mean_pct_of_optimal)).collect(),
    ));
    out.svg("sweep.svg", plot.to_svg())?;
    for r in &rows {
        println!("tilt {:>5.1}: {:.3}% of optimal", r.delta_theta_deg, r.mean_pct_of_optimal);
    }
    Ok(Outcome::Done)
}

fn parse_strategies(names: &[String], cfg: &ControllerConfig) -> Result<Vec<Strategy>> {
    if names.is_empty() {
        return Err(Error::InvalidArgument("no strategies given".into()));
    }
    names
        .iter()
        .map(|n| {
            Ok(match n.trim().parse::<Strategy>()? {
                Strategy::Proposed { .. } => Strategy::Proposed { config: *cfg },
                // the baselines carry their own detector geometry
                Strategy::Tetrahedron { .. } => Strategy::Tetrahedron {
                    config: ControllerConfig {
                        delta_theta_deg: ControllerConfig::default().delta_theta_deg,
                        ..*cfg
                    },
                },
                Strategy::ShadingWall { .. } => Strategy::ShadingWall {
                    config: ControllerConfig {
                        delta_theta_deg: ControllerConfig::default().delta_theta_deg,
                        ..*cfg
                    },
                },
                s => s,
            })
        })
        .collect()
}

pub fn cmd_benchmark(a: &BenchmarkArgs, command: &Command) -> Result<Outcome> {
    let cfg = a.controller.config()?;
    let strategies = parse_strategies(&a.strategies, &cfg)?;
    if strategies.contains(&Strategy::SunTracker) {
        return Err(Error::InvalidArgument(
            "sun_tracker needs a time and place; use simulate-day".into(),
        ));
    }
    let maps = corpus_maps(&a.corpus)?;
    let starts = fibonacci_starts(a.corpus.starts, a.corpus.start_seed);
    let rows = benchmark(&maps, &strategies, &starts)?;
    let out = Output::new(&a.out, command)?;
    out.csv("benchmark.csv", |w| {
        write_benchmark_csv(&rows, a.corpus.corpus.name(), maps.len(), starts.len(), w)
    })?;
    for r in &rows {
        println!("{:<14} {:>8.3}%  sensors {}", r.strategy, r.mean_pct_of_optimal, r.num_sensors);
    }
    Ok(Outcome::Done)
}

fn write_ledger(out: &Output, ledger: &EnergyLedger) -> Result<PathBuf> {
    out.csv(&format!("ledger_{}.csv", ledger.strategy), |w| ledger.write_csv(w))
}

fn print_results(results: &[LocationResult]) {
    for s in batch_stats(results) {
        println!(
            "{:<14} mean {:>7.3}%  median {:>7.3}% of optimal",
            s.strategy, s.mean_pct_of_optimal, s.median_pct_of_optimal
        );
    }
}

pub fn cmd_simulate_day(a: &DayArgs, command: &Command) -> Result<Outcome> {
    let cfg = a.controller.config()?;
    let strategies = parse_strategies(&a.strategies, &cfg)?;
    let panel = PanelModel {
        area_m2: a.panel_area,
        efficiency: a.efficiency,
    };
    panel.validate()?;
    if !(a.step_energy >= 0.0) {
        return Err(Error::InvalidArgument("--step-energy must be >= 0".into()));
    }
    let actuator = ActuatorModel {
        joules_per_step: a.step_energy,
    };
    if a.from >= a.to || a.to > 23 {
        return Err(Error::InvalidArgument("need 0 <= --from < --to <= 23".into()));
    }
    let grid = grid(a.height)?;
    let out = Output::new(&a.out, command)?;

    if let Some(n) = a.batch {
        if n == 0 {
            return Err(Error::InvalidArgument("--batch must be positive".into()));
        }
        let locations = urban_batch(a.scene_seed.unwrap_or(0), n);
        let results = simulate_batch(&locations, (a.from, a.to), a.interval, grid, &strategies, &panel, &actuator)?;
        out.csv("summary.csv", |w| write_summary_csv(&results, w))?;
        let subject = strategies
            .iter()
            .find(|s| matches!(s, Strategy::Proposed { .. }))
            .unwrap_or(&strategies[0])
            .name();
        let baselines: Vec<&str> = strategies.iter().map(|s| s.name()).filter(|&s| s != subject).collect();
        let mut hist = Vec::new();
        export_histograms(&results, subject, &baselines, &mut hist)?;
        out.csv("histogram.csv", |w| w.write_all(&hist))?;
        out.csv("stats.csv", |w| {
            writeln!(w, "strategy,mean_pct_of_optimal,median_pct_of_optimal")?;
            for s in batch_stats(&results) {
                writeln!(w, "{},{:.6},{:.6}", s.strategy, s.mean_pct_of_optimal, s.median_pct_of_optimal)?;
            }
            Ok(())
        })?;
        print_results(&results);
        return Ok(Outcome::Done);
    }

    let mut location = Location::open("site", a.lat, a.lon, a.date, a.tz);
    if let Some(seed) = a.scene_seed {
        location.occluders = urban_occluders(seed);
    }
    let seq = location.day(a.from, a.to, a.interval, grid)?;
    let local: Vec<Strategy> = strategies.iter().map(|s| at_latitude(*s, a.lat)).collect();
    let comparison = compare_day(&seq, a.interval, &local, &panel, &actuator)?;
    for l in comparison.ledgers.iter().chain([&comparison.optimal]) {
        write_ledger(&out, l)?;
    }
    let results = vec![LocationResult {
        location_id: location.id.clone(),
        comparison,
    }];
    out.csv("summary.csv", |w| write_summary_csv(&results, w))?;
    let c = &results[0].comparison;
    let hours = |l: &EnergyLedger| -> Vec<(f64, f64)> {
        l.rows
            .iter()
            .map(|r| {
                let t = r.time.naive_local();
                let h = t.and_utc().timestamp() as f64 / 3600.0;
                (h.rem_euclid(24.0), r.irradiance)
            })
            .collect()
    };
    let mut plot = LinePlot::new(format!("{} at {:.3}, {:.3}", a.date, a.lat, a.lon), "local hour", "irradiance (W/m2)");
    for l in c.ledgers.iter().chain([&c.optimal]) {
        plot = plot.with_series(Series::new(l.strategy.clone(), hours(l)));
    }
    out.svg("day.svg", plot.to_svg())?;
    for r in &c.rows {
        println!(
            "{:<14} net {:>12.1} J  actuator {:>8.2} J  {:>7.3}% of optimal",
            r.strategy, r.net_j, r.actuator_j, r.pct_of_optimal
        );
    }
    Ok(Outcome::Done)
}

fn tilt_label(t: f64) -> String {
    format!("{t}")
}

pub fn cmd_scalespace(a: &ScalespaceArgs, command: &Command) -> Result<Outcome> {
    if a.tilts.is_empty() {
        return Err(Error::InvalidArgument("no tilts given".into()));
    }
    let radiance = match a.profile_seed {
        ProfileSource::ThreeLobe => corpus::three_lobe_profile(),
        ProfileSource::Seed(s) => corpus::multimodal_profile(s),
    }
    .sample(a.samples);
    let profiles = a
        .tilts
        .iter()
        .map(|&t| blur_profile(radiance.clone(), t))
        .collect::<Result<Vec<_>>>()?;
    let derivs: Vec<Vec<f64>> = profiles.iter().map(|p| p.photodifferential()).collect();
    let base = &profiles[0];
    let out = Output::new(&a.out, command)?;
    out.csv("scalespace.csv", |w| {
        write!(w, "theta_deg,L,E_T")?;
        for &t in &a.tilts {
            let t = tilt_label(t);
            write!(w, ",E_B_{t},E_D_{t}")?;
        }
        writeln!(w)?;
        for i in 0..base.len() {
            write!(w, "{:.4},{:.9},{:.9}", base.theta_deg(i), base.radiance[i], base.irradiance[i])?;
            for (p, d) in profiles.iter().zip(&derivs) {
                write!(w, ",{:.9},{:.9}", p.blurred[i], d[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    let et_modes = count_modes_1d(&base.irradiance);
    out.csv("modes.csv", |w| {
        writeln!(w, "delta_theta_deg,modes_E_T,modes_E_B")?;
        for (t, p) in a.tilts.iter().zip(&profiles) {
            writeln!(w, "{t},{et_modes},{}", count_modes_1d(&p.blurred))?;
        }
        Ok(())
    })?;
    let xs = |v: &[f64]| -> Vec<(f64, f64)> { v.iter().enumerate().map(|(i, &y)| (base.theta_deg(i), y)).collect() };
    let mut irr = LinePlot::new("irradiance and blurred irradiance", "theta (deg)", "W/m2").with_series(Series::new("E_T", xs(&base.irradiance)));
    let mut ed = LinePlot::new("photodifferential", "theta (deg)", "W/m2/rad");
    for ((t, p), d) in a.tilts.iter().zip(&profiles).zip(&derivs) {
        irr = irr.with_series(Series::new(format!("E_B {t} deg"), xs(&p.blurred)));
        ed = ed.with_series(Series::new(format!("E_D {t} deg"), xs(d)));
    }
    let radiance_plot = LinePlot::new("radiance", "theta (deg)", "W/m2/sr").with_series(Series::new("L", xs(&base.radiance)));
    out.svg("scalespace.svg", stacked_svg(&[radiance_plot, irr, ed]))?;
    println!("E_T modes: {et_modes}");
    for (t, p) in a.tilts.iter().zip(&profiles) {
        println!("tilt {t:>5}: E_B modes {}", count_modes_1d(&p.blurred));
    }
    Ok(Outcome::Done)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("heliotrope").chain(args.iter().copied()))
    }

    #[test]
    fn recipe_sources() {
        assert_eq!("uniform".parse(), Ok(RecipeSource::Uniform));
        assert_eq!("multimodal:7".parse(), Ok(RecipeSource::Multimodal(7)));
        assert_eq!("scene.json".parse(), Ok(RecipeSource::File("scene.json".into())));
        assert!("unimodal:x".parse::<RecipeSource>().is_err());
        assert!("sky".parse::<RecipeSource>().is_err());
    }

    #[test]
    fn start_angles() {
        let s: StartAngles = "40, 200".parse().unwrap();
        assert_eq!((s.zenith_deg, s.azimuth_deg), (40.0, 200.0));
        assert!("95,0".parse::<StartAngles>().is_err());
        assert!("40".parse::<StartAngles>().is_err());
    }

    #[test]
    fn orient_needs_one_scene() {
        assert!(parse(&["orient"]).is_err());
        assert!(parse(&["orient", "--map", "a.pfm", "--recipe", "uniform"]).is_err());
        assert!(parse(&["orient", "--recipe", "uniform"]).is_ok());
    }

    #[test]
    fn unknown_flags_are_rejected() {
        assert!(parse(&["benchmark", "--corpus", "mixed", "--count", "2", "--frobnicate"]).is_err());
        assert!(parse(&["benchmark", "--corpus", "weird", "--count", "2"]).is_err());
    }

    #[test]
    fn negative_coordinates_parse() {
        let cli = parse(&["simulate-day", "--lat", "-33.9", "--lon", "-70.6", "--tz", "-4"]).unwrap();
        let Command::SimulateDay(a) = cli.command else { panic!() };
        assert_eq!((a.lat, a.lon, a.tz), (-33.9, -70.6, -4));
    }

    #[test]
    fn run_config_omits_output_dir() {
        let a = parse(&["scalespace", "--out", "/tmp/x"]).unwrap();
        let b = parse(&["scalespace", "--out", "/tmp/y"]).unwrap();
        let ja = serde_json::to_string(&a.command).unwrap();
        assert_eq!(ja, serde_json::to_string(&b.command).unwrap());
        assert!(ja.starts_with(r#"{"command":"scalespace""#), "{ja}");
        assert!(!ja.contains("/tmp"));
    }

    #[test]
    fn baselines_keep_their_geometry() {
        let cfg = ControllerConfig::default().with_delta_theta(10.0);
        let s = parse_strategies(&["proposed".into(), "tetrahedron".into()], &cfg).unwrap();
        assert_eq!(s[0], Strategy::Proposed { config: cfg });
        assert_eq!(s[1], Strategy::Tetrahedron { config: ControllerConfig::default() });
        assert!(parse_strategies(&["nope".into()], &cfg).is_err());
    }
}
