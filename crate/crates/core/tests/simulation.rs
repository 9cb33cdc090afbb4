use fdra::experiment::{run_experiment, RunConfig};
use fdra::schedulers::Algorithm;
use fdra::sim::{run_simulation, ChannelConfig, SimConfig, World};
use fdra::traffic::TrafficType;

fn cfg(algorithm: Algorithm, k: usize) -> SimConfig {
    SimConfig { algorithm, num_ues: k, slots: 400, seeds: vec![3, 4], ..Default::default() }
}

#[test]
fn csi_is_never_fresher_than_the_feedback_delay() {
    for a in [Algorithm::Jade, Algorithm::Leap, Algorithm::Type0] {
        let mut w = World::new(SimConfig { feedback_delay: 2, ..cfg(a, 12) }, 1).unwrap();
        for _ in 0..300 {
            let t = w.run_slot().unwrap();
            assert!(t.csi_slots.iter().all(|&g| g <= t.slot as i64 - 2));
        }
    }
}

#[test]
fn every_slot_decision_is_valid_and_conserves_bits() {
    for a in [Algorithm::Jade, Algorithm::JadeSingleEnd, Algorithm::Dase, Algorithm::Date, Algorithm::Leap, Algorithm::Type0] {
        let mut w = World::new(cfg(a, 40), 2).unwrap();
        for _ in 0..300 {
            let t = w.run_slot().unwrap();
            let Some(o) = &t.outcome else { continue };
            assert!(o.validate(&w.config().bwp).is_valid());
            for (ue, bits) in o.grants() {
                let payload = t.payloads.iter().find(|(u, _)| *u == ue).unwrap().1;
                assert!(bits <= payload);
                assert_eq!(w.queue(ue.0 as usize).pending_bits(), payload - bits);
            }
        }
    }
}

#[test]
fn aggregate_throughput_matches_delivered_bits() {
    let r = run_simulation(&cfg(Algorithm::Date, 30)).unwrap();
    for s in &r.per_seed {
        let bits: u64 = s.per_type.values().map(|c| c.delivered_bits).sum();
        assert_eq!(bits, s.aggregate.delivered_bits);
        assert_eq!(s.aggregate.arrived, s.aggregate.delivered + s.aggregate.dropped + s.aggregate.queued);
    }
}

#[test]
fn mix_is_one_to_one_to_one_to_one() {
    let r = run_simulation(&SimConfig { slots: 1, ..cfg(Algorithm::Jade, 20) }).unwrap();
    for t in TrafficType::ALL {
        assert_eq!(r.per_type[&t].num_ues, 5);
    }
}

#[test]
fn kpi_report_is_byte_identical_across_runs() {
    let c = SimConfig {
        channel: ChannelConfig { rho_f: 0.2, ..Default::default() },
        ..cfg(Algorithm::Leap, 25)
    };
    let a = serde_json::to_vec(&run_simulation(&c).unwrap()).unwrap();
    let b = serde_json::to_vec(&run_simulation(&c).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn seeds_are_independent_of_their_position() {
    let one = run_simulation(&SimConfig { seeds: vec![4], ..cfg(Algorithm::Jade, 10) }).unwrap();
    let two = run_simulation(&SimConfig { seeds: vec![3, 4], ..cfg(Algorithm::Jade, 10) }).unwrap();
    assert_eq!(one.per_seed[0], two.per_seed[1]);
}

#[test]
fn result_files_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let base = RunConfig {
        algorithms: vec![Algorithm::Jade, Algorithm::Type0],
        ues: vec![6, 12],
        seeds: vec![0, 1, 2],
        slots: 150,
        ..Default::default()
    };
    let mut files = Vec::new();
    for (i, parallel) in [1usize, 4].into_iter().enumerate() {
        let out = dir.path().join(i.to_string());
        let cfg = RunConfig { parallel, out_dir: out.clone(), ..base.clone() };
        let s = run_experiment(&cfg).unwrap();
        assert_eq!(s.aborted(), 0);
        let csv = std::fs::read(out.join("results.csv")).unwrap();
        let json = std::fs::read_to_string(out.join("summary.json")).unwrap();
        // summary.json echoes the thread count and path; drop those lines.
        let json: String = json.lines().filter(|l| !l.contains("\"parallel\"") && !l.contains("\"out_dir\"")).collect();
        files.push((csv, json));
    }
    assert_eq!(files[0], files[1]);
}
