use aloha_calculus::capture::{expected_decoded, CaptureParams};
use aloha_calculus::sim::{decode_slot_capture, simulate, ClassSpec, Placement, ReceiverChoice, SlotModel};
use aloha_calculus::{d_fold, db_to_linear, induce, DegreeDistribution, InduceMode, PoissonReceiver, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

#[test]
fn scheduled_single_copies_match_induced_receiver() {
    let users = 1000;
    let slots = 1000;
    for d in [1u32, 2] {
        let s = Scenario {
            slots,
            classes: vec![ClassSpec { users, placement: Placement::Scheduled, receiver: ReceiverChoice::All }],
            slot_model: SlotModel::DFold { d, receivers: 1 },
            max_rounds: 100,
            seed: 21,
        };
        let stats = simulate(&s, 400).unwrap();
        // Another packet lands in the slot of a given packet as Binomial(users - 1, 1 / slots).
        let p = 1.0 / slots as f64;
        let m = (users - 1) as i32;
        let binom = |j: i32| {
            let ln_choose: f64 = (0..j).map(|i| ((m - i) as f64 / (i + 1) as f64).ln()).sum();
            (ln_choose + j as f64 * p.ln() + (m - j) as f64 * (1.0 - p).ln()).exp()
        };
        let exact: f64 = (0..d as i32).map(binom).sum();
        let poisson = induce(&d_fold(d).unwrap(), InduceMode::Truncated { max_terms: 100, tolerance: 1e-13 })
            .unwrap()
            .success_probabilities(&[users as f64 / slots as f64])
            .unwrap()[0];
        let c = stats.classes[0];
        let se = c.std_err();
        assert!(((1.0 - c.error_rate()) - exact).abs() < 3.0 * se, "d={d} sim={} exact={exact}", 1.0 - c.error_rate());
        assert!(((1.0 - c.error_rate()) - poisson).abs() < 3.0 * se + (exact - poisson).abs());
    }
}

#[test]
fn lone_capture_probability() {
    let p = CaptureParams::new(100.0, db_to_linear(3.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let runs = 1_000_000;
    let hits =
        (0..runs).filter(|_| !decode_slot_capture(&[(0u8, rng.sample(Exp1))], p.gamma, p.threshold).is_empty()).count();
    let mc = hits as f64 / runs as f64;
    let exact = (-p.threshold / p.gamma).exp();
    let se = (exact * (1.0 - exact) / runs as f64).sqrt();
    assert!((mc - exact).abs() < 3.0 * se, "mc={mc} exact={exact}");
}

#[test]
fn mean_capture_count_for_three_signals() {
    let p = CaptureParams::new(100.0, db_to_linear(3.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let runs = 1_000_000;
    let counts: Vec<f64> = (0..runs)
        .map(|_| {
            let slot: Vec<(u8, f64)> = (0..3u8).map(|i| (i, rng.sample(Exp1))).collect();
            decode_slot_capture(&slot, p.gamma, p.threshold).len() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / runs as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
    let se = (var / runs as f64).sqrt();
    let exact = expected_decoded(3, &p);
    assert!((mean - exact).abs() < 3.0 * se, "mean={mean} exact={exact}");
}

#[test]
fn decoded_packets_never_decrease_across_rounds() {
    let s = Scenario {
        slots: 50,
        classes: vec![ClassSpec {
            users: 45,
            placement: Placement::Uniform {
                degree: DegreeDistribution::new(vec![0.0, 0.0, 0.5, 0.5]).unwrap(),
                distinct_slots: false,
            },
            receiver: ReceiverChoice::All,
        }],
        slot_model: SlotModel::DFold { d: 1, receivers: 1 },
        max_rounds: 100,
        seed: 41,
    };
    for run in 0..50 {
        let trace = aloha_calculus::sim::trace_run(&s, run).unwrap();
        assert!(trace.windows(2).all(|w| w[0] < w[1]), "{trace:?}");
    }
}
