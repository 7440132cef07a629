//! Shared helpers for the integration and acceptance tests: independent
//! filter oracles, a scripted link view and a randomized state-machine
//! property checker.
#![allow(dead_code)]

use std::path::PathBuf;

use cho_sim::failure::{FailureCause, RlfConfig};
use cho_sim::handover::{ControllerConfig, HandoverConfig, HoState, Mode, PreambleRegistry, UeController};
use cho_sim::ids::{CellId, Step, UeId};
use cho_sim::kpi::KpiCounters;
use cho_sim::log::{EventKind, Recorder};
use cho_sim::measurements::{AveragingDomain, MeasurementConfig};
use cho_sim::rach::{AccessThreshold, PreambleKind, RachConfig, RachProcedure};
use cho_sim::scenario::{rng_stream, ScenarioConfig};
use cho_sim::view::LinkView;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

pub fn load_scenario(name: &str) -> ScenarioConfig {
    ScenarioConfig::load(&scenario_path(name)).expect("bundled scenario loads")
}

/// The compact layout shortened to `duration_s` seconds (1 s warm-up).
pub fn short_compact(duration_s: f64) -> ScenarioConfig {
    let mut cfg = load_scenario("compact.toml");
    cfg.simulation.duration_s = duration_s;
    cfg.simulation.warmup_s = 1.0;
    cfg
}

// ---------------------------------------------------------------------------
// filter oracles, written from the definitions without sharing code paths
// ---------------------------------------------------------------------------

pub fn oracle_mean(values: &[f64], domain: AveragingDomain) -> f64 {
    match domain {
        AveragingDomain::Db => values.iter().sum::<f64>() / values.len() as f64,
        AveragingDomain::Linear => {
            let mw: f64 = values.iter().map(|v| 10f64.powf(v / 10.0)).sum::<f64>() / values.len() as f64;
            10.0 * mw.log10()
        }
    }
}

/// L1 output at step `n` from the raw samples `trace[0..=n]`.
pub fn oracle_l1(trace: &[f64], n: usize, cfg: &MeasurementConfig) -> f64 {
    let first = (n + 1).saturating_sub(cfg.n_l1);
    oracle_mean(&trace[first..=n], cfg.l1_domain)
}

/// Cell quality from L1 beam values.
pub fn oracle_cell_quality(l1: &[f64], cfg: &MeasurementConfig) -> f64 {
    let mut above: Vec<f64> = l1.iter().copied().filter(|&v| v > cfg.p_thr_dbm).collect();
    if above.is_empty() {
        return l1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    above.sort_by(|a, b| b.partial_cmp(a).unwrap());
    above.truncate(cfg.n_str);
    oracle_mean(&above, cfg.l1_domain)
}

/// L3 output after the inputs `x[0..]`, in closed form:
/// (1-a)^m x_0 + sum_j a (1-a)^(m-j) x_j.
pub fn oracle_l3(inputs: &[f64], k: f64) -> f64 {
    let a = (-k / 4.0 * std::f64::consts::LN_2).exp();
    let m = inputs.len() - 1;
    let mut total = (1.0 - a).powi(m as i32) * inputs[0];
    for (j, &x) in inputs.iter().enumerate().skip(1) {
        total += a * (1.0 - a).powi((m - j) as i32) * x;
    }
    total
}

/// Strongest `n_b` beams among those above `min`, or the single strongest.
pub fn oracle_prepared_beams(l3_beams: &[f64], min: f64, n_b: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..l3_beams.len()).filter(|&b| l3_beams[b] > min).collect();
    if idx.is_empty() {
        let best = (0..l3_beams.len()).fold(0, |best, b| if l3_beams[b] > l3_beams[best] { b } else { best });
        return vec![best];
    }
    idx.sort_by(|&a, &b| l3_beams[b].partial_cmp(&l3_beams[a]).unwrap().then(a.cmp(&b)));
    idx.truncate(n_b);
    idx
}

// ---------------------------------------------------------------------------
// scripted link view
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ScriptedView {
    pub beams: usize,
    pub l1: Vec<Vec<f64>>,
    pub l3_beam: Vec<Vec<f64>>,
    pub l3_cell: Vec<f64>,
    pub sinr: Vec<Vec<f64>>,
}

impl ScriptedView {
    /// Every beam of every cell at `rsrp`, SINR `sinr`.
    pub fn flat(cells: usize, beams: usize, rsrp: f64, sinr: f64) -> Self {
        Self {
            beams,
            l1: vec![vec![rsrp; beams]; cells],
            l3_beam: vec![vec![rsrp; beams]; cells],
            l3_cell: vec![rsrp; cells],
            sinr: vec![vec![sinr; beams]; cells],
        }
    }

    /// Set a cell's quality and the SINR of all its beams.
    pub fn set_cell(&mut self, cell: usize, rsrp: f64, sinr: f64) {
        self.l1[cell].iter_mut().for_each(|v| *v = rsrp);
        self.l3_beam[cell].iter_mut().for_each(|v| *v = rsrp);
        self.l3_cell[cell] = rsrp;
        self.sinr[cell].iter_mut().for_each(|v| *v = sinr);
    }

    pub fn strongest(&self) -> usize {
        let mut best = 0;
        for c in 1..self.l3_cell.len() {
            if self.l3_cell[c] > self.l3_cell[best] {
                best = c;
            }
        }
        best
    }
}

impl LinkView for ScriptedView {
    fn num_cells(&self) -> usize {
        self.l3_cell.len()
    }

    fn l1_beams(&self, cell: CellId) -> &[f64] {
        &self.l1[cell.idx()]
    }

    fn l3_beams(&self, cell: CellId) -> &[f64] {
        &self.l3_beam[cell.idx()]
    }

    fn l3_cells(&self) -> &[f64] {
        &self.l3_cell
    }

    fn sinr(&self, cell: CellId, beam: usize) -> f64 {
        self.sinr[cell.idx()][beam]
    }
}

pub fn controller_config(mode: Mode, procedure: RachProcedure, xi: AccessThreshold, n_b: usize) -> ControllerConfig {
    ControllerConfig {
        dt_ms: 10,
        handover: HandoverConfig {
            mode,
            n_b,
            ..HandoverConfig::default()
        },
        rach: RachConfig {
            procedure,
            xi_access: xi,
            ..RachConfig::default()
        },
        rlf: RlfConfig::default(),
    }
}

/// Recorder that keeps every log and counts from step 0.
pub fn recorder() -> Recorder {
    Recorder::new(true, 0, KpiCounters::new(1, 1.0))
}

/// Controller state after each step.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub state: HoState,
    pub serving: Option<CellId>,
    pub prepared: Vec<CellId>,
}

pub struct ScriptedRun {
    pub cfg: ControllerConfig,
    pub trace: Vec<ScriptedView>,
    pub rec: Recorder,
    pub snapshots: Vec<Snapshot>,
    pub registry: PreambleRegistry,
}

pub fn run_scripted(cfg: ControllerConfig, trace: Vec<ScriptedView>, collision_seed: u64) -> ScriptedRun {
    let cells = trace[0].l3_cell.len();
    let beams = trace[0].beams;
    let mut registry = PreambleRegistry::new(cells, beams, cfg.handover.preamble_pool);
    let mut ctrl = UeController::new(UeId(0), cfg, cells, rng_stream(collision_seed, 5));
    let mut rec = recorder();
    let mut snapshots = Vec::with_capacity(trace.len());
    for (n, view) in trace.iter().enumerate() {
        ctrl.step(n as Step, view, &mut registry, &mut rec);
        snapshots.push(Snapshot {
            state: ctrl.state(),
            serving: ctrl.serving(),
            prepared: ctrl.prepared_cells(),
        });
    }
    ScriptedRun {
        cfg,
        trace,
        rec,
        snapshots,
        registry,
    }
}

// ---------------------------------------------------------------------------
// randomized traces
// ---------------------------------------------------------------------------

/// Cells follow random walks with occasional abrupt jumps; beams sit at fixed
/// offsets from their cell; SINR is the beam's margin over the strongest
/// other cell, so handover lag and blockage produce both failure kinds.
pub fn random_trace(rng: &mut ChaCha8Rng, cells: usize, beams: usize, len: usize) -> Vec<ScriptedView> {
    let walk = Normal::new(0.0, 0.8).unwrap();
    let jitter = Normal::new(0.0, 2.0).unwrap();
    let mut q: Vec<f64> = (0..cells).map(|_| rng.random_range(-100.0..-70.0)).collect();
    let offsets: Vec<Vec<f64>> = (0..cells)
        .map(|_| (0..beams).map(|_| rng.random_range(-15.0..0.0)).collect())
        .collect();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        for v in q.iter_mut() {
            *v += walk.sample(rng);
            if rng.random_bool(0.01) {
                *v += if rng.random_bool(0.5) { 15.0 } else { -15.0 };
            }
            *v = v.clamp(-135.0, -50.0);
        }
        let l3_beam: Vec<Vec<f64>> = (0..cells)
            .map(|c| offsets[c].iter().map(|o| q[c] + o).collect())
            .collect();
        let l1: Vec<Vec<f64>> = l3_beam
            .iter()
            .map(|bs| bs.iter().map(|b| b + jitter.sample(rng)).collect())
            .collect();
        let sinr = (0..cells)
            .map(|c| {
                let other = (0..cells).filter(|&o| o != c).map(|o| q[o]).fold(f64::NEG_INFINITY, f64::max);
                l1[c].iter().map(|p| p - other + 2.0).collect()
            })
            .collect();
        out.push(ScriptedView {
            beams,
            l1,
            l3_beam,
            l3_cell: q.clone(),
            sinr,
        });
    }
    out
}

pub fn random_config(rng: &mut ChaCha8Rng) -> ControllerConfig {
    let mode = *[Mode::Bho, Mode::Cho].choose(rng).unwrap();
    let procedure = *[RachProcedure::ThreeGpp, RachProcedure::Proposed].choose(rng).unwrap();
    let xi = *[f64::NEG_INFINITY, -110.0, -100.0, -90.0, -80.0, f64::INFINITY].choose(rng).unwrap();
    let mut cfg = controller_config(mode, procedure, AccessThreshold(xi), rng.random_range(1..=4));
    let h = &mut cfg.handover;
    h.max_prepared = rng.random_range(1..=3);
    h.ttt_a3_ms = *[0, 40, 160].choose(rng).unwrap();
    h.ttt_add_ms = *[0, 40, 160].choose(rng).unwrap();
    h.ttt_exec_ms = *[0, 40, 80].choose(rng).unwrap();
    h.prep_ms = *[0, 20, 50].choose(rng).unwrap();
    h.a3_offset_db = rng.random_range(0.0..6.0);
    h.add_offset_db = rng.random_range(-6.0..0.0);
    h.exec_offset_db = rng.random_range(0.5..6.0);
    cfg.rach.t304_ms = *[50, 100, 500].choose(rng).unwrap();
    cfg.rach.cbra_collision_prob = *[0.0, 0.3].choose(rng).unwrap();
    cfg.rlf.t310_ms = *[100, 600].choose(rng).unwrap();
    cfg.rlf.reestablish_delay_ms = *[10, 100].choose(rng).unwrap();
    cfg
}

pub fn random_scripted_run(seed: u64) -> ScriptedRun {
    let mut rng = rng_stream(seed, 77);
    let cfg = random_config(&mut rng);
    let cells = rng.random_range(2..=4);
    let beams = rng.random_range(1..=6);
    let len = rng.random_range(100..=400);
    let trace = random_trace(&mut rng, cells, beams, len);
    run_scripted(cfg, trace, seed)
}

// ---------------------------------------------------------------------------
// state-machine properties
// ---------------------------------------------------------------------------

fn steps(ms: u32) -> u64 {
    u64::from(ms).div_ceil(10)
}

/// Serving cell in force during step `n` (before the controller acted on it).
fn serving_at(run: &ScriptedRun, n: usize) -> Option<CellId> {
    if n == 0 {
        None
    } else {
        run.snapshots[n - 1].serving
    }
}

/// Returns a description of the first violated property.
pub fn check_properties(run: &ScriptedRun) -> Result<(), String> {
    check_ttt(run)?;
    check_prepare_before_execute(run)?;
    check_cfra_prepared(run)?;
    check_failures(run)?;
    check_timing(run)?;
    check_counters(run)
}

/// Baseline: random access starts exactly one preparation latency after the
/// report. Conditional: preparation completes no later than execution, so
/// the waiting time is never negative.
fn check_timing(run: &ScriptedRun) -> Result<(), String> {
    let prep = steps(run.cfg.handover.prep_ms);
    for h in &run.rec.handovers {
        if h.prepared_step != h.report_step + prep {
            return Err(format!("prepared at {} after report at {}", h.prepared_step, h.report_step));
        }
        let ok = match run.cfg.handover.mode {
            Mode::Bho => h.execution_step == h.report_step + prep,
            Mode::Cho => h.execution_step >= h.prepared_step,
        };
        if !ok || h.completed_step < h.execution_step {
            return Err(format!("handover timeline out of order: {h:?}"));
        }
    }
    Ok(())
}

/// Every trigger event fired after its entering condition held at each of the
/// preceding time-to-trigger steps, against the same serving cell.
fn check_ttt(run: &ScriptedRun) -> Result<(), String> {
    let h = &run.cfg.handover;
    for e in &run.rec.events {
        let (offset, window) = match e.kind {
            EventKind::A3 => (h.a3_offset_db, steps(h.ttt_a3_ms)),
            EventKind::Add => (h.add_offset_db, steps(h.ttt_add_ms)),
            EventKind::Exec => (h.exec_offset_db, steps(h.ttt_exec_ms)),
            _ => continue,
        };
        let n = e.step as usize;
        if (n as u64) < window {
            return Err(format!("{:?} at {n} before a full window of {window} steps", e.kind));
        }
        for m in n - window as usize..=n {
            if serving_at(run, m) != Some(e.serving) {
                return Err(format!("{:?} at {n}: serving changed inside the window (step {m})", e.kind));
            }
            let v = &run.trace[m];
            if v.l3_cell[e.target.idx()] <= v.l3_cell[e.serving.idx()] + offset {
                return Err(format!("{:?} at {n}: condition false at {m}", e.kind));
            }
        }
    }
    Ok(())
}

/// A command is delivered after its preparation, which follows a report; in
/// CHO, Execute only addresses a delivered command; random access only
/// targets a delivered command (after Execute in CHO). Each link of the chain
/// must lie in the same connection: no failure or completed handover between.
fn check_prepare_before_execute(run: &ScriptedRun) -> Result<(), String> {
    let prep = steps(run.cfg.handover.prep_ms);
    let events = &run.rec.events;
    let broken = |from: Step, to: Step| {
        run.rec.failures.iter().any(|f| f.step > from && f.step <= to)
            || events.iter().any(|e| e.kind == EventKind::HoSuccess && e.step >= from && e.step < to)
    };
    let preceded = |kinds: &[EventKind], cell: CellId, at: Step, min_gap: Step| {
        events
            .iter()
            .any(|e| kinds.contains(&e.kind) && e.target == cell && e.step + min_gap <= at && !broken(e.step, at))
    };
    for e in events {
        let ok = match e.kind {
            EventKind::PrepDone => {
                preceded(&[EventKind::A3, EventKind::Add], e.target, e.step, prep)
            }
            EventKind::CmdDelivered | EventKind::CmdLost => preceded(&[EventKind::PrepDone], e.target, e.step, 0),
            EventKind::Exec => {
                run.cfg.handover.mode == Mode::Cho && preceded(&[EventKind::CmdDelivered], e.target, e.step, 0)
            }
            _ => true,
        };
        if !ok {
            return Err(format!("{:?} toward {} at {} out of order", e.kind, e.target, e.step));
        }
    }
    let start = match run.cfg.handover.mode {
        Mode::Bho => EventKind::CmdDelivered,
        Mode::Cho => EventKind::Exec,
    };
    for a in &run.rec.rach {
        if !preceded(&[start], a.target, a.step, 0) {
            return Err(format!("RACH toward {} at {} before {start:?}", a.target, a.step));
        }
    }
    Ok(())
}

/// Dedicated preambles are only used on beams the target prepared, and the
/// prepared set is the strongest reported beams at report time.
fn check_cfra_prepared(run: &ScriptedRun) -> Result<(), String> {
    let h = &run.cfg.handover;
    for a in &run.rec.rach {
        if a.kind != PreambleKind::Cfra {
            continue;
        }
        if !a.beam_prepared {
            return Err(format!("CFRA on unprepared beam at {}", a.step));
        }
        let report = run
            .rec
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::A3 | EventKind::Add) && e.target == a.target && e.step <= a.step)
            .map(|e| e.step)
            .max()
            .ok_or_else(|| format!("CFRA at {} without a report", a.step))?;
        let expected = oracle_prepared_beams(&run.trace[report as usize].l3_beam[a.target.idx()], h.report_min_dbm, h.n_b);
        if !expected.contains(&a.beam) {
            return Err(format!("CFRA beam {} at {} not in prepared set {expected:?}", a.beam, a.step));
        }
    }
    Ok(())
}

/// HOF only during random access, RLF only outside it, one declaration per
/// failure and exactly one re-establishment, to the strongest cell, after
/// the configured delay.
fn check_failures(run: &ScriptedRun) -> Result<(), String> {
    let delay = steps(run.cfg.rlf.reestablish_delay_ms);
    let len = run.trace.len() as u64;
    for (i, f) in run.rec.failures.iter().enumerate() {
        match f.cause {
            FailureCause::Hof if f.state != HoState::Executing => {
                return Err(format!("HOF at {} in state {:?}", f.step, f.state));
            }
            FailureCause::Rlf if matches!(f.state, HoState::Executing | HoState::Reestablishing) => {
                return Err(format!("RLF at {} in state {:?}", f.step, f.state));
            }
            _ => {}
        }
        let due = f.step + delay;
        match f.reestablished {
            Some((s, c)) => {
                if s != due {
                    return Err(format!("failure at {} re-established at {s}, expected {due}", f.step));
                }
                let best = run.trace[s as usize].strongest();
                if c.idx() != best {
                    return Err(format!("re-established on {c} at {s}, strongest is {best}"));
                }
            }
            None if due < len => return Err(format!("failure at {} never re-established", f.step)),
            None => {}
        }
        if let Some(next) = run.rec.failures.get(i + 1) {
            if next.step <= due {
                return Err(format!("failure at {} during re-establishment of {}", next.step, f.step));
            }
        }
        let quiet = |s: Step| s > f.step && s <= due;
        if run.rec.rach.iter().any(|a| quiet(a.step)) || run.rec.events.iter().any(|e| quiet(e.step) && e.step < due) {
            return Err(format!("activity while re-establishing after {}", f.step));
        }
        for m in f.step as usize..(due.min(len) as usize) {
            if run.snapshots[m].state != HoState::Reestablishing {
                return Err(format!("not re-establishing at {m} after failure at {}", f.step));
            }
        }
    }
    Ok(())
}

fn check_counters(run: &ScriptedRun) -> Result<(), String> {
    let c = &run.rec.counters;
    let hof = run.rec.failures.iter().filter(|f| f.cause == FailureCause::Hof).count() as u64;
    let rlf = run.rec.failures.len() as u64 - hof;
    if c.n_hof != hof || c.n_rlf != rlf {
        return Err("failure counters disagree with the failure log".into());
    }
    let successes = run.rec.events.iter().filter(|e| e.kind == EventKind::HoSuccess).count() as u64;
    if c.n_cfra + c.n_cbra != successes || successes != run.rec.handovers.len() as u64 {
        return Err("access counters disagree with the handover log".into());
    }
    Ok(())
}

/// Random condition sequences against a counting model of time-to-trigger.
pub fn check_ttt_tracker(rng: &mut ChaCha8Rng) -> Result<(), String> {
    use cho_sim::handover::TttTracker;
    let ms = *[0u32, 10, 40, 160, 155].choose(rng).unwrap();
    let required = u64::from(ms).div_ceil(10);
    let mut t = TttTracker::new(ms, 10);
    let p_true = rng.random_range(0.5..1.0);
    let mut held = 0u64;
    for n in 0..300u64 {
        let cond = rng.random_bool(p_true);
        let fired = t.update(n, cond);
        let expected = if cond {
            held += 1;
            held > required
        } else {
            held = 0;
            false
        };
        if expected {
            held = 0;
        }
        if fired != expected {
            return Err(format!("TTT {ms} ms: step {n} fired={fired} expected={expected}"));
        }
    }
    Ok(())
}
