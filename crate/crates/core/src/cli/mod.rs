//! Batch driver: sweep files, result tables, figure series and the run manifest.
//!
//! Everything that can be rejected up front (sweep file, scenario, figure
//! coverage) is checked before the output directory is touched.

mod figure;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::handover::Mode;
use crate::kpi::KpiCounters;
use crate::rach::{AccessThreshold, RachProcedure};
use crate::scenario::ScenarioConfig;
use crate::sim::{run_seeds, RunOptions, SeedRun, Variant};
use crate::trace;

pub use figure::{emit_figure_series, gnuplot_script, Figure, FigureRow, FigureSeries};

/// Column order of `results.csv`.
pub const RESULT_COLUMNS: [&str; 16] = [
    "mode",
    "procedure",
    "xi_access_dbm",
    "n_b",
    "seed",
    "ue_count",
    "duration_min",
    "n_cfra",
    "n_cbra",
    "n_hof",
    "n_rlf",
    "r_cbra_pct",
    "hof_per_ue_min",
    "rlf_per_ue_min",
    "total_per_ue_min",
    "trajectory_hash",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Relative paths are resolved against the sweep file's directory.
    pub scenario: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub modes: Vec<Mode>,
    pub procedures: Vec<RachProcedure>,
    pub xi_access: Vec<AccessThreshold>,
    pub n_b: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl SweepSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            what: "sweep".into(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::ScenarioLoad {
            path: path.to_path_buf(),
            source,
        })?;
        let mut spec = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        spec.scenario = base.join(&spec.scenario);
        if let Some(out) = spec.out.take() {
            spec.out = Some(base.join(out));
        }
        Ok(spec)
    }

    /// A one-point sweep reproducing the scenario file's own settings.
    pub fn single(scenario: PathBuf, cfg: &ScenarioConfig) -> Self {
        let v = Variant::from_scenario(cfg);
        Self {
            scenario,
            out: None,
            modes: vec![v.mode],
            procedures: vec![v.procedure],
            xi_access: vec![v.xi],
            n_b: vec![v.n_b],
            seeds: vec![cfg.simulation.seed],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("modes", self.modes.is_empty()),
            ("procedures", self.procedures.is_empty()),
            ("xi_access", self.xi_access.is_empty()),
            ("n_b", self.n_b.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::config(format!("sweep grid '{name}' is empty")));
        }
        if self.n_b.contains(&0) {
            return Err(Error::config("n_b values must be at least 1"));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return Err(Error::config("duplicate seeds in sweep"));
        }
        Ok(())
    }

    /// Cartesian product, mode-major.
    pub fn variants(&self) -> Vec<Variant> {
        let mut out = Vec::new();
        for &mode in &self.modes {
            for &procedure in &self.procedures {
                for &xi in &self.xi_access {
                    for &n_b in &self.n_b {
                        out.push(Variant { mode, procedure, xi, n_b });
                    }
                }
            }
        }
        out
    }
}

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub variant: Variant,
    pub seed: u64,
    pub counters: KpiCounters,
    pub trajectory_hash: String,
}

impl ResultRow {
    /// `None` when the run had no successful access at all.
    pub fn r_cbra(&self) -> Option<f64> {
        self.counters.r_cbra().ok()
    }

    fn record(&self) -> Vec<String> {
        let c = &self.counters;
        let rates = c.normalized_failures();
        vec![
            self.variant.mode.to_string(),
            self.variant.procedure.to_string(),
            self.variant.xi.to_string(),
            self.variant.n_b.to_string(),
            self.seed.to_string(),
            c.ue_count.to_string(),
            c.duration_min.to_string(),
            c.n_cfra.to_string(),
            c.n_cbra.to_string(),
            c.n_hof.to_string(),
            c.n_rlf.to_string(),
            fmt_opt(self.r_cbra()),
            rates.hof_per_ue_min.to_string(),
            rates.rlf_per_ue_min.to_string(),
            rates.total_per_ue_min.to_string(),
            self.trajectory_hash.clone(),
        ]
    }
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), |x| x.to_string())
}

/// Rows are ordered variant-major (in [`SweepSpec::variants`] order), then by seed.
#[derive(Debug, Clone, Default)]
pub struct ResultSet {
    pub rows: Vec<ResultRow>,
}

impl ResultSet {
    pub fn from_runs(variants: &[Variant], runs: &[SeedRun]) -> Self {
        let mut rows = Vec::with_capacity(variants.len() * runs.len());
        for (i, v) in variants.iter().enumerate() {
            for run in runs {
                rows.push(ResultRow {
                    variant: *v,
                    seed: run.seed,
                    counters: *run.lanes[i].counters(),
                    trajectory_hash: run.trajectory_hash.clone(),
                });
            }
        }
        Self { rows }
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(RESULT_COLUMNS)?;
        for r in &self.rows {
            w.write_record(r.record())?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn filter<'a>(&'a self, pred: impl Fn(&ResultRow) -> bool + 'a) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| pred(r))
    }
}

pub fn run_sweep(spec: &SweepSpec, cfg: &ScenarioConfig, opts: &RunOptions) -> Result<(ResultSet, Vec<SeedRun>)> {
    spec.validate()?;
    let variants = spec.variants();
    let runs = run_seeds(cfg, &variants, &spec.seeds, opts)?;
    Ok((ResultSet::from_runs(&variants, &runs), runs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceLevel {
    #[default]
    Off,
    /// Per-seed, per-variant event, RACH, failure and handover logs.
    Events,
    /// Events plus full link and measurement traces.
    Links,
}

impl std::str::FromStr for TraceLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(TraceLevel::Off),
            "events" => Ok(TraceLevel::Events),
            "links" => Ok(TraceLevel::Links),
            other => Err(Error::config(format!("unknown trace level '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CliOptions {
    pub scenario: Option<PathBuf>,
    pub sweep: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub exec: Execution,
    /// Emit only this figure. Without it every figure the results cover is written.
    pub figure: Option<Figure>,
    pub seed_override: Option<Vec<u64>>,
    pub trace: TraceLevel,
}

#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub results: ResultSet,
    pub figures: Vec<Figure>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    artifact: &'a str,
    version: &'a str,
    seeds: &'a [u64],
    rows: usize,
    sweep: &'a SweepSpec,
    scenario: &'a ScenarioConfig,
}

/// Resolve inputs, run the sweep and write all outputs.
pub fn run(opts: &CliOptions) -> Result<RunSummary> {
    let mut spec = match (&opts.sweep, &opts.scenario) {
        (Some(path), scenario) => {
            let mut spec = SweepSpec::load(path)?;
            if let Some(s) = scenario {
                spec.scenario = s.clone();
            }
            spec
        }
        (None, Some(path)) => SweepSpec::single(path.clone(), &ScenarioConfig::load(path)?),
        (None, None) => return Err(Error::config("either --scenario or --sweep is required")),
    };
    if let Some(seeds) = &opts.seed_override {
        spec.seeds = seeds.clone();
    }
    if let Some(out) = &opts.out {
        spec.out = Some(out.clone());
    }
    spec.validate()?;
    let cfg = ScenarioConfig::load(&spec.scenario)?;
    for v in spec.variants() {
        v.controller_config(&cfg).validate()?;
    }
    let out_dir = spec
        .out
        .clone()
        .ok_or_else(|| Error::config("no output directory (use --out or set 'out' in the sweep file)"))?;

    let trace_dir = out_dir.join("traces");
    let run_opts = RunOptions {
        exec: opts.exec,
        detailed: opts.trace != TraceLevel::Off,
        link_trace_dir: (opts.trace == TraceLevel::Links).then(|| trace_dir.clone()),
    };
    if opts.trace == TraceLevel::Links {
        std::fs::create_dir_all(&trace_dir)?;
    }
    let (results, runs) = run_sweep(&spec, &cfg, &run_opts)?;

    let figures: Vec<(Figure, FigureSeries)> = match opts.figure {
        Some(f) => vec![(f, emit_figure_series(&results, f)?)],
        None => Figure::ALL
            .iter()
            .filter_map(|&f| emit_figure_series(&results, f).ok().map(|s| (f, s)))
            .collect(),
    };

    std::fs::create_dir_all(&out_dir)?;
    std::fs::write(out_dir.join("results.csv"), results.to_csv_string()?)?;
    // the output location is not part of what makes a run reproducible
    let echo = SweepSpec { out: None, ..spec.clone() };
    let manifest = Manifest {
        artifact: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seeds: &spec.seeds,
        rows: results.rows.len(),
        sweep: &echo,
        scenario: &cfg,
    };
    let manifest = toml::to_string(&manifest).map_err(|e| Error::Parse {
        what: "manifest".into(),
        message: e.to_string(),
    })?;
    std::fs::write(out_dir.join("manifest.toml"), manifest)?;
    for (f, series) in &figures {
        std::fs::write(out_dir.join(format!("{}.csv", f.name())), series.to_csv_string()?)?;
        std::fs::write(out_dir.join(format!("{}.gp", f.name())), gnuplot_script(*f, series))?;
    }
    if opts.trace != TraceLevel::Off {
        write_event_traces(&trace_dir, &runs)?;
    }

    Ok(RunSummary {
        out_dir,
        results,
        figures: figures.into_iter().map(|(f, _)| f).collect(),
    })
}

fn write_event_traces(dir: &Path, runs: &[SeedRun]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for run in runs {
        for lane in &run.lanes {
            let stem = format!("seed{}_{}", run.seed, lane.variant.label());
            let rec = &lane.recorder;
            trace::write_events(&dir.join(format!("{stem}_events.csv")), &rec.events)?;
            trace::write_rach(&dir.join(format!("{stem}_rach.csv")), &rec.rach)?;
            trace::write_failures(&dir.join(format!("{stem}_failures.csv")), &rec.failures)?;
            trace::write_handovers(&dir.join(format!("{stem}_handovers.csv")), &rec.handovers)?;
        }
    }
    Ok(())
}
