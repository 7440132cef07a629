mod support;

use cho_sim::failure::FailureCause;
use cho_sim::handover::{ControllerConfig, HoState, Mode};
use cho_sim::ids::CellId;
use cho_sim::log::EventKind;
use cho_sim::rach::{AccessThreshold, PreambleKind, RachProcedure};

use support::*;

/// Two cells, two beams; cell 0 starts at -80 dBm, cell 1 follows `neighbor`.
fn two_cell_trace(len: usize, neighbor: impl Fn(usize) -> (f64, f64), serving_sinr: impl Fn(usize) -> f64) -> Vec<ScriptedView> {
    (0..len)
        .map(|n| {
            let mut v = ScriptedView::flat(2, 2, -80.0, serving_sinr(n));
            let (rsrp, sinr) = neighbor(n);
            v.set_cell(1, rsrp, sinr);
            v
        })
        .collect()
}

fn kinds(run: &ScriptedRun) -> Vec<(u64, EventKind)> {
    run.rec.events.iter().map(|e| (e.step, e.kind)).collect()
}

fn bho() -> ControllerConfig {
    controller_config(Mode::Bho, RachProcedure::ThreeGpp, AccessThreshold::NEG_INF, 4)
}

#[test]
fn baseline_handover_timeline() {
    let trace = two_cell_trace(60, |n| if n >= 10 { (-70.0, 10.0) } else { (-90.0, 0.0) }, |_| 10.0);
    let run = run_scripted(bho(), trace, 1);
    assert_eq!(
        kinds(&run),
        vec![
            (26, EventKind::A3),
            (28, EventKind::PrepDone),
            (28, EventKind::CmdDelivered),
            (28, EventKind::HoSuccess),
        ]
    );
    assert_eq!(run.rec.rach.len(), 1);
    assert_eq!(run.rec.rach[0].kind, PreambleKind::Cfra);
    assert_eq!(run.rec.counters.n_cfra, 1);
    assert_eq!(run.snapshots[28].serving, Some(CellId(1)));
    assert_eq!(run.registry.in_use(CellId(1)), 0);
    let h = run.rec.handovers[0];
    assert_eq!((h.report_step, h.prepared_step, h.execution_step, h.completed_step), (26, 28, 28, 28));
}

#[test]
fn t304_expiry_is_a_handover_failure() {
    // target looks strong but every beam is unusable once access starts
    let trace = two_cell_trace(120, |n| (if n >= 10 { -70.0 } else { -90.0 }, if n >= 28 { -20.0 } else { 10.0 }), |_| 10.0);
    let run = run_scripted(bho(), trace, 1);
    assert_eq!(run.rec.failures.len(), 1);
    let f = run.rec.failures[0];
    assert_eq!((f.step, f.cause, f.state), (78, FailureCause::Hof, HoState::Executing));
    // one attempt per retry period until T304 runs out
    assert_eq!(run.rec.rach.len(), 50);
    assert!(run.rec.rach.iter().all(|a| !a.success));
    assert_eq!(f.reestablished, Some((88, CellId(1))));
    assert_eq!(run.rec.counters.n_hof, 1);
    assert_eq!(run.rec.counters.n_rlf, 0);
    assert_eq!(run.registry.in_use(CellId(1)), 0);
}

#[test]
fn serving_link_loss_is_a_radio_link_failure() {
    let trace = two_cell_trace(100, |_| (-95.0, -5.0), |n| if n >= 5 { -10.0 } else { 10.0 });
    let run = run_scripted(bho(), trace, 1);
    assert_eq!(run.rec.failures.len(), 1);
    let f = run.rec.failures[0];
    assert_eq!((f.step, f.cause, f.state), (65, FailureCause::Rlf, HoState::Connected));
    assert_eq!(f.reestablished, Some((75, CellId(0))));
    assert!(run.snapshots[70].state == HoState::Reestablishing);
    assert!(run.snapshots[76].state == HoState::Connected);
}

#[test]
fn lost_command_aborts_the_handover() {
    let trace = two_cell_trace(40, |n| if n >= 10 { (-70.0, 10.0) } else { (-90.0, 0.0) }, |n| if n >= 27 { -10.0 } else { 10.0 });
    let run = run_scripted(bho(), trace, 1);
    let k = kinds(&run);
    assert_eq!(&k[..3], &[(26, EventKind::A3), (28, EventKind::PrepDone), (28, EventKind::CmdLost)]);
    assert!(run.rec.rach.is_empty());
    assert_eq!(run.registry.in_use(CellId(1)), 0);
}

#[test]
fn conditional_handover_waits_for_execute() {
    let cfg = controller_config(Mode::Cho, RachProcedure::ThreeGpp, AccessThreshold::NEG_INF, 2);
    let trace = two_cell_trace(
        80,
        |n| match n {
            0..10 => (-90.0, 0.0),
            10..40 => (-82.0, 5.0),
            _ => (-70.0, 10.0),
        },
        |_| 10.0,
    );
    let run = run_scripted(cfg, trace, 1);
    assert_eq!(
        kinds(&run),
        vec![
            (26, EventKind::Add),
            (28, EventKind::PrepDone),
            (28, EventKind::CmdDelivered),
            (48, EventKind::Exec),
            (48, EventKind::HoSuccess),
        ]
    );
    for n in 28..48 {
        assert_eq!(run.snapshots[n].state, HoState::Prepared);
        assert_eq!(run.snapshots[n].prepared, vec![CellId(1)]);
    }
    assert_eq!(run.rec.rach.len(), 1);
    assert_eq!(run.rec.rach[0].step, 48);
    assert_eq!(run.registry.in_use(CellId(1)), 0);
}

#[test]
fn failure_while_prepared_counts_as_rlf() {
    let cfg = controller_config(Mode::Cho, RachProcedure::ThreeGpp, AccessThreshold::NEG_INF, 2);
    let trace = two_cell_trace(120, |n| if n >= 10 { (-82.0, 5.0) } else { (-90.0, 0.0) }, |n| if n >= 30 { -10.0 } else { 10.0 });
    let run = run_scripted(cfg, trace, 1);
    let f = run.rec.failures[0];
    assert_eq!((f.cause, f.state), (FailureCause::Rlf, HoState::Prepared));
    assert_eq!(run.rec.counters.n_hof, 0);
}

#[test]
fn fallback_onto_prepared_beam_splits_procedures() {
    let trace = || two_cell_trace(40, |n| if n >= 10 { (-70.0, 10.0) } else { (-90.0, 0.0) }, |_| 10.0);
    let access = |procedure| {
        let cfg = controller_config(Mode::Bho, procedure, AccessThreshold::POS_INF, 1);
        run_scripted(cfg, trace(), 1).rec.rach[0]
    };
    let three = access(RachProcedure::ThreeGpp);
    let proposed = access(RachProcedure::Proposed);
    assert_eq!((three.beam, three.kind), (0, PreambleKind::Cbra));
    assert_eq!((proposed.beam, proposed.kind), (0, PreambleKind::Cfra));
    assert!(three.beam_prepared && proposed.beam_prepared);
}

#[test]
fn random_traces_satisfy_properties() {
    for seed in 1_000_000..1_000_300 {
        let run = random_scripted_run(seed);
        if let Err(e) = check_properties(&run) {
            panic!("trace {seed}: {e}");
        }
    }
}

#[test]
fn ttt_matches_counting_model() {
    let mut rng = cho_sim::scenario::rng_stream(5, 5);
    for _ in 0..200 {
        check_ttt_tracker(&mut rng).unwrap();
    }
}

#[test]
fn matched_parameters_shift_execution_by_the_execute_window() {
    let trace = || two_cell_trace(80, |n| if n >= 10 { (-70.0, 10.0) } else { (-90.0, 0.0) }, |_| 10.0);
    let exec_step = |mode| {
        let mut cfg = controller_config(mode, RachProcedure::ThreeGpp, AccessThreshold::NEG_INF, 4);
        let h = &mut cfg.handover;
        h.add_offset_db = h.a3_offset_db;
        h.exec_offset_db = h.a3_offset_db;
        h.ttt_add_ms = h.ttt_a3_ms;
        h.ttt_exec_ms = h.ttt_a3_ms;
        run_scripted(cfg, trace(), 1).rec.handovers[0]
    };
    let b = exec_step(Mode::Bho);
    let c = exec_step(Mode::Cho);
    assert_eq!(b.report_step, c.report_step);
    assert_eq!(b.prepared_step, c.prepared_step);
    assert_eq!(b.execution_step, b.prepared_step);
    // the Execute window starts once the command is held
    assert_eq!(c.execution_step, c.prepared_step + 16);
    assert_eq!(c.waiting_steps(), 16);
}

#[test]
fn zero_preparation_latency_executes_in_the_report_step() {
    let mut cfg = bho();
    cfg.handover.prep_ms = 0;
    let trace = two_cell_trace(40, |n| if n >= 10 { (-70.0, 10.0) } else { (-90.0, 0.0) }, |_| 10.0);
    let h = run_scripted(cfg, trace, 1).rec.handovers[0];
    assert_eq!((h.report_step, h.execution_step, h.completed_step), (26, 26, 26));
}
