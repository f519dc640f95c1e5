use thz_srlnc::channel_sim::{coded_bits, run_session, CorrectionRule, SessionConfig, SimLane};
use thz_srlnc::fec_model::derive_fec;
use thz_srlnc::Field;

fn choose(n: u64, r: u64) -> f64 {
    if r > n {
        return 0.0;
    }
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact probability that one given symbol is erased when `t` of the flipped
/// bits, chosen uniformly, are repaired.
fn exact_symbol_erasure(coded: u64, s: u64, t: u64, p: f64) -> f64 {
    let mut total = 0.0;
    for x in (t + 1)..=coded {
        let px = choose(coded, x) * p.powi(x as i32) * (1.0 - p).powi((coded - x) as i32);
        let mut given_x = 0.0;
        for f in 1..=s.min(x) {
            let hyper = choose(s, f) * choose(coded - s, x - f) / choose(coded, x);
            let all_repaired = if f <= t {
                choose(x - f, t - f) / choose(x, t)
            } else {
                0.0
            };
            given_x += hyper * (1.0 - all_repaired);
        }
        total += px * given_x;
    }
    total
}

fn single_lane(k: usize, p: f64, rule: CorrectionRule) -> SessionConfig<f64> {
    SessionConfig {
        field: Field::default(),
        k,
        fec: derive_fec(k as u64, 8, 0.73).unwrap(),
        lanes: vec![SimLane {
            expected_ber: p,
            redundancy: 0,
        }],
        rule,
        aux_ber: 0.0,
        rounds: 1,
        parallel: true,
    }
}

#[test]
fn erasure_rate_matches_exact_binomial_model() {
    let k = 10;
    let fec = derive_fec(k as u64, 8, 0.73).unwrap();
    assert_eq!(fec.correctable_bits, 14);
    let coded = coded_bits(80, 0.73);
    assert_eq!(coded, 110);
    for p in [0.1, 0.2, 0.3] {
        let exact = exact_symbol_erasure(coded, 8, fec.correctable_bits, p);
        let trials = 20_000;
        let report = run_session(&single_lane(k, p, CorrectionRule::Uniform), trials, 11)
            .unwrap()
            .report;
        let se = (exact * (1.0 - exact) / trials as f64).sqrt();
        let got = report.lane_erasure_rate[0];
        assert!(
            (got - exact).abs() < 4.0 * se,
            "p={p}: {got} vs exact {exact}"
        );
    }
}

#[test]
fn below_threshold_nothing_is_erased() {
    let report = run_session(&single_lane(50, 0.0, CorrectionRule::Earliest), 100, 1)
        .unwrap()
        .report;
    assert_eq!(report.lane_erasure_rate[0], 0.0);
    assert_eq!(report.generation_success_rate, 1.0);
}

#[test]
fn redundancy_repairs_erasures() {
    let mut config = single_lane(50, 0.16, CorrectionRule::Uniform);
    let bare = run_session(&config, 500, 2).unwrap().report;
    config.lanes[0].redundancy = 40;
    let coded = run_session(&config, 500, 2).unwrap().report;
    assert!(coded.generation_success_rate > bare.generation_success_rate);
    assert!(
        coded.generation_success_rate > 0.9,
        "{}",
        coded.generation_success_rate
    );
}

#[test]
fn sequential_equals_parallel() {
    let mut config = single_lane(20, 0.2, CorrectionRule::Uniform);
    config.lanes[0].redundancy = 5;
    config.rounds = 3;
    let a = run_session(&config, 200, 5).unwrap();
    config.parallel = false;
    let b = run_session(&config, 200, 5).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.report, b.report);
}
