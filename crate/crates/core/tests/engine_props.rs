use slicesim::engine::{
    run_experiment, run_experiment_with, write_windows_csv, RunOptions, SimulationConfig,
};
use slicesim::reward::max_profit;
use slicesim::slicegen::SliceType;

fn short_config(seed: u64) -> SimulationConfig {
    SimulationConfig {
        seed,
        n_windows: 40,
        ..SimulationConfig::default()
    }
}

fn csv_bytes(config: &SimulationConfig) -> Vec<u8> {
    let out = run_experiment(config).unwrap();
    let mut buf = Vec::new();
    write_windows_csv(&out.records, &mut buf).unwrap();
    buf
}

#[test]
fn same_seed_same_bytes() {
    let c = short_config(5);
    assert_eq!(csv_bytes(&c), csv_bytes(&c));
    assert_ne!(csv_bytes(&c), csv_bytes(&short_config(6)));
}

#[test]
fn replay_rewards_match_logged_breakdowns() {
    let c = short_config(2);
    let out = run_experiment_with(
        &c,
        RunOptions {
            log_events: true,
            ..RunOptions::default()
        },
    )
    .unwrap();
    let sim = &out.simulation;
    let max = max_profit(sim.network(), c.window_length, sim.economics());
    let replayed: Vec<f64> = sim.agent().memory().iter().map(|e| e.reward).collect();
    assert_eq!(replayed.len(), c.n_windows);
    for (w, (&r, record)) in replayed.iter().zip(&out.records).enumerate() {
        let from_log: f64 = out
            .events
            .iter()
            .filter(|e| e.window_index == w)
            .map(|e| e.reward)
            .sum();
        assert_eq!(r, record.r);
        assert!(
            (r - from_log / max).abs() <= 1e-12 * r.abs().max(1e-3),
            "window {w}"
        );
        for e in out.events.iter().filter(|e| e.window_index == w) {
            assert_eq!(e.reward, e.profit - e.penalty);
        }
    }
}

#[test]
fn offered_splits_into_accepted_and_rejected() {
    let out = run_experiment_with(
        &short_config(3),
        RunOptions {
            log_events: true,
            ..RunOptions::default()
        },
    )
    .unwrap();
    let mut any_rejected = false;
    for record in &out.records {
        for t in SliceType::ALL {
            let events: Vec<_> = out
                .events
                .iter()
                .filter(|e| e.window_index == record.window_index && e.stype == t)
                .collect();
            let rejected = events.iter().filter(|e| e.rejection.is_some()).count() as u32;
            any_rejected |= rejected > 0;
            assert_eq!(events.len() as u32, record.offered[t]);
            assert_eq!(record.accepted[t] + rejected, record.offered[t]);
            assert!(record.accepted[t] <= record.offered[t]);
        }
        assert!((0.0..=1.0).contains(&record.consumption));
    }
    assert!(any_rejected);
    let arrivals = out.trace.iter().filter(|r| r.arrival_time < 40.0).count();
    assert_eq!(out.events.len(), arrivals);
}

#[test]
fn audited_run_drains_to_capacity() {
    let out = run_experiment_with(
        &short_config(4),
        RunOptions {
            audit: true,
            ..RunOptions::default()
        },
    )
    .unwrap();
    let sn = out.simulation.network();
    assert!(out.simulation.active_slices().is_empty());
    assert!(sn.is_fully_available());
    assert_eq!(sn.active_reservations(), 0);
}

#[test]
fn dsara_never_pays_a_penalty() {
    let c = SimulationConfig {
        mode: "dsara".into(),
        ..short_config(8)
    };
    let out = run_experiment(&c).unwrap();
    assert!(out.records.iter().all(|r| r.penalty_total == 0.0));
    assert!(out.records.iter().all(|r| r.mode == "dsara"));
    assert_eq!(out.simulation.agent().strategy_name(), "uniform");
}
