use std::sync::Arc;

use aloha_calculus::poisson::FnReceiver;
use aloha_calculus::{
    build_success_table, density_evolution, induce, route, BipartiteTopology, DegreeDistribution, InduceMode,
    PoissonReceiver,
};
use proptest::prelude::*;

fn topology() -> impl Strategy<Value = BipartiteTopology> {
    (1usize..=3, 1usize..=3)
        .prop_flat_map(|(k, t)| prop::collection::vec(prop::collection::vec(0u8..=1, t), k))
        .prop_map(|rows| BipartiteTopology::from_rows(&rows).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_and_truncated_paths_agree(h in topology(), d in 1u32..=2, loads in prop::collection::vec(0.0f64..3.0, 3)) {
        let phi = build_success_table(&h, d).unwrap();
        let k = h.classes();
        let rho = &loads[..k];
        let exact = induce(&phi, InduceMode::ExactSaturating { d }).unwrap().success_probabilities(rho).unwrap();
        let tol = 1e-11;
        let trunc = induce(&phi, InduceMode::Truncated { max_terms: 60, tolerance: tol })
            .unwrap()
            .success_probabilities(rho)
            .unwrap();
        for c in 0..k {
            prop_assert!((0.0..=1.0).contains(&exact[c]));
            prop_assert!((exact[c] - trunc[c]).abs() <= tol, "class {} exact {} truncated {}", c, exact[c], trunc[c]);
        }
    }

    #[test]
    fn identity_routing_changes_nothing(h in topology(), loads in prop::collection::vec(0.0f64..3.0, 3)) {
        let phi = build_success_table(&h, 2).unwrap();
        let k = h.classes();
        let model: Arc<dyn PoissonReceiver> = Arc::new(induce(&phi, InduceMode::ExactSaturating { d: 2 }).unwrap());
        let id: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let routed = route(model.clone(), id).unwrap();
        prop_assert_eq!(routed.success_probabilities(&loads[..k]).unwrap(), model.success_probabilities(&loads[..k]).unwrap());
    }
}

#[test]
fn de_iterates_are_monotone_for_decreasing_models() {
    let h = BipartiteTopology::from_rows(&[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
    let phi = build_success_table(&h, 2).unwrap();
    let model = induce(&phi, InduceMode::ExactSaturating { d: 2 }).unwrap();
    // Success probabilities are non-increasing along the grid, checked first.
    let mut prev = vec![1.0; 3];
    for i in 0..40 {
        let r = i as f64 * 0.1;
        let p = model.success_probabilities(&[r, r, r]).unwrap();
        for c in 0..3 {
            assert!(p[c] <= prev[c] + 1e-12);
        }
        prev = p;
    }
    let degrees = vec![
        DegreeDistribution::regular(3),
        DegreeDistribution::new(vec![0.0, 0.5, 0.5]).unwrap(),
        DegreeDistribution::regular(2),
    ];
    for g in [0.2, 0.5, 1.0] {
        let trace = density_evolution(&model, &[g, g, g], &degrees, 100, 1e-12).unwrap();
        for w in trace.steps.windows(2) {
            for c in 0..3 {
                assert!((0.0..=1.0).contains(&w[1].q[c]));
                assert!(w[1].q[c] <= w[0].q[c] + 1e-12, "g={g} class {c}");
            }
        }
    }
}

#[test]
fn zero_mean_degree_class_is_silent() {
    let model = FnReceiver::new(2, |rho: &[f64]| rho.iter().map(|r| (-r).exp()).collect());
    let degrees = vec![DegreeDistribution::regular(0), DegreeDistribution::regular(2)];
    let trace = density_evolution(&model, &[1.0, 0.5], &degrees, 100, 1e-12).unwrap();
    assert_eq!(trace.final_success()[0], 0.0);
    assert!(trace.final_success()[1] > 0.5);
}
