use argbayes::accept::{normalized_exponential, Evaluator, ModelConfig, ParameterFamily};
use argbayes::af::{ArgSet, Semantics};
use argbayes::bayes::{
    exact_posterior, ml_estimate, ml_prediction, posterior_predictive, sequential_update,
    solve_inverse_problem, AcceptabilityAssignment, PosteriorDistribution, PosteriorEntry,
    PosteriorKind,
};
use argbayes::space::{AttackAssignment, AttackVariableSpace, Observation, VariableMode};
use argbayes::Error;
use proptest::prelude::*;

fn evaluator(space: AttackVariableSpace, sem: Semantics, family: ParameterFamily) -> Evaluator {
    Evaluator::new(space, ModelConfig::new(sem, family))
}

fn all_assignments(space: &AttackVariableSpace) -> Vec<AttackAssignment> {
    let free = space.free_variables();
    (0..space.enumeration_size(20).unwrap())
        .map(|i| space.assignment_at(&free, i))
        .collect()
}

fn spaces() -> Vec<AttackVariableSpace> {
    vec![
        AttackVariableSpace::symmetric(2).unwrap(),
        AttackVariableSpace::symmetric(3).unwrap(),
        AttackVariableSpace::directed(2, false).unwrap(),
        AttackVariableSpace::directed(2, true).unwrap(),
        AttackVariableSpace::directed(3, false).unwrap(),
    ]
}

#[test]
fn inverse_solutions_are_ml_estimates() {
    let families = [
        ParameterFamily::Deterministic,
        ParameterFamily::Linear,
        ParameterFamily::exponential(2.0).unwrap(),
        ParameterFamily::exponential(100.0).unwrap(),
    ];
    let mut holding = spaces();
    holding.pop();
    for space in holding {
        for sem in Semantics::ALL {
            for family in families {
                let eval = evaluator(space.clone(), sem, family);
                for att in all_assignments(&space) {
                    let exts = eval.compute_extensions(&att).unwrap();
                    let acc = AcceptabilityAssignment::indicator(space.n_args(), exts.iter());
                    let solutions = solve_inverse_problem(&acc, &space, sem, 20).unwrap();
                    assert!(solutions.contains(&att));
                    let ml = ml_estimate(&acc.observations(), &eval, 20).unwrap();
                    for s in &solutions {
                        assert!(
                            ml.contains(s),
                            "{:?} {sem} {family}: solution {s} not ML",
                            space.mode()
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn directed_inverse_solution_can_be_outscored() {
    // a→b, a→c, b→c, c→a has complete extensions {∅, {a}}; under full
    // observation the 3-cycle a→c→b→a explains those labels better.
    let space = AttackVariableSpace::directed(3, false).unwrap();
    let eval = evaluator(
        space.clone(),
        Semantics::Complete,
        ParameterFamily::exponential(2.0).unwrap(),
    );
    let solution = AttackAssignment::parse_bitstring("110110").unwrap();
    let cycle = AttackAssignment::parse_bitstring("011001").unwrap();
    let exts = eval.compute_extensions(&solution).unwrap();
    assert_eq!(exts.as_slice(), &[ArgSet::EMPTY, ArgSet(0b001)]);
    let acc = AcceptabilityAssignment::indicator(3, exts.iter());
    assert!(solve_inverse_problem(&acc, &space, Semantics::Complete, 20)
        .unwrap()
        .contains(&solution));
    let obs = acc.observations();
    let seventh6 = 7f64.powi(6);
    let l_solution = eval.log_likelihood(&obs, &solution).unwrap().exp();
    let l_cycle = eval.log_likelihood(&obs, &cycle).unwrap().exp();
    assert!((l_solution - 9216.0 / seventh6).abs() < 1e-15);
    assert!((l_cycle - 10368.0 / seventh6).abs() < 1e-15);
    assert!(!ml_estimate(&obs, &eval, 20).unwrap().contains(&solution));
}

#[test]
fn symmetric_complete_inverse_solution_is_unique() {
    let space = AttackVariableSpace::symmetric(3).unwrap();
    let eval = evaluator(
        space.clone(),
        Semantics::Complete,
        ParameterFamily::Deterministic,
    );
    for att in all_assignments(&space) {
        let exts = eval.compute_extensions(&att).unwrap();
        let acc = AcceptabilityAssignment::indicator(3, exts.iter());
        assert_eq!(
            solve_inverse_problem(&acc, &space, Semantics::Complete, 20).unwrap(),
            vec![att]
        );
    }
}

#[test]
fn ml_estimate_need_not_solve_the_inverse_problem() {
    let space = AttackVariableSpace::directed(2, false).unwrap();
    let obs = vec![
        Observation::accepted(ArgSet::EMPTY),
        Observation::new(ArgSet(0b01), false),
        Observation::new(ArgSet(0b10), false),
        Observation::accepted(ArgSet(0b11)),
    ];
    let acc = AcceptabilityAssignment::new(vec![true, false, false, true]);
    assert!(solve_inverse_problem(&acc, &space, Semantics::Complete, 20)
        .unwrap()
        .is_empty());
    let eval = evaluator(
        space,
        Semantics::Complete,
        ParameterFamily::exponential(2.0).unwrap(),
    );
    assert!(!ml_estimate(&obs, &eval, 20).unwrap().is_empty());
}

fn likelihood_of_labels(labels: u32, att: &AttackAssignment, eval: &Evaluator) -> f64 {
    ArgSet::all_subsets(eval.n_args())
        .map(|d| {
            let theta = eval.theta(d, att).unwrap();
            if labels >> d.bits() & 1 == 1 {
                theta
            } else {
                1.0 - theta
            }
        })
        .product()
}

fn check_ml_prediction(space: AttackVariableSpace, w: f64) {
    let n = space.n_args();
    for sem in Semantics::ALL {
        let eval = evaluator(space.clone(), sem, ParameterFamily::exponential(w).unwrap());
        for att in all_assignments(&space) {
            let exts = eval.compute_extensions(&att).unwrap();
            let indicator = AcceptabilityAssignment::indicator(n, exts.iter());
            assert_eq!(ml_prediction(&att, &eval).unwrap(), indicator);

            let scores: Vec<f64> = (0..1u32 << (1 << n))
                .map(|labels| likelihood_of_labels(labels, &att, &eval))
                .collect();
            let best = scores.iter().cloned().fold(f64::MIN, f64::max);
            let maximizers: Vec<usize> = (0..scores.len())
                .filter(|&i| scores[i] >= best * (1.0 - 1e-12))
                .collect();
            let indicator_bits: usize = indicator.accepted().map(|d| 1usize << d.bits()).sum();
            assert_eq!(maximizers, vec![indicator_bits], "{sem} {att}");
        }
    }
}

#[test]
fn ml_prediction_solves_the_direct_problem_two_arguments() {
    for w in [2.0, 3.0, 100.0] {
        check_ml_prediction(AttackVariableSpace::directed(2, true).unwrap(), w);
    }
}

#[test]
fn ml_prediction_solves_the_direct_problem_three_arguments() {
    check_ml_prediction(AttackVariableSpace::directed(3, false).unwrap(), 2.0);
}

#[test]
fn ml_prediction_can_differ_below_two() {
    // With w = 1.5 a set one argument away from an extension has θ > 1/2.
    let space = AttackVariableSpace::directed(3, false).unwrap();
    let eval = evaluator(
        space.clone(),
        Semantics::Complete,
        ParameterFamily::exponential(1.5).unwrap(),
    );
    let att = space.base_assignment();
    let exts = eval.compute_extensions(&att).unwrap();
    let indicator = AcceptabilityAssignment::indicator(3, exts.iter());
    assert_ne!(ml_prediction(&att, &eval).unwrap(), indicator);
}

proptest! {
    #[test]
    fn near_miss_theta_below_half_for_w_at_least_two(w in 2.0f64..1e6, n in 1usize..60) {
        prop_assert!(normalized_exponential(n - 1, n, w) < 0.5);
        prop_assert_eq!(normalized_exponential(n, n, w), 1.0);
    }

    #[test]
    fn exponential_is_monotone_in_agreement(w in 1.000001f64..1e6, n in 1usize..40) {
        for x in 0..n {
            prop_assert!(normalized_exponential(x, n, w) <= normalized_exponential(x + 1, n, w));
        }
    }
}

#[test]
fn exponential_limits_match_deterministic_and_linear() {
    let space = AttackVariableSpace::directed(3, true).unwrap();
    let mut worst_det: f64 = 0.0;
    let mut worst_lin: f64 = 0.0;
    for sem in Semantics::ALL {
        let big = evaluator(
            space.clone(),
            sem,
            ParameterFamily::exponential(1e6).unwrap(),
        );
        let small = big.with_family(ParameterFamily::exponential(1.0 + 1e-6).unwrap());
        let det = big.with_family(ParameterFamily::Deterministic);
        let lin = big.with_family(ParameterFamily::Linear);
        for att in all_assignments(&space) {
            for d in ArgSet::all_subsets(3) {
                worst_det = worst_det
                    .max((big.theta(d, &att).unwrap() - det.theta(d, &att).unwrap()).abs());
                worst_lin = worst_lin
                    .max((small.theta(d, &att).unwrap() - lin.theta(d, &att).unwrap()).abs());
            }
        }
    }
    assert!(worst_det < 1e-3, "{worst_det}");
    assert!(worst_lin < 1e-3, "{worst_lin}");
}

fn point_mass(att: AttackAssignment) -> PosteriorDistribution {
    PosteriorDistribution::new(
        PosteriorKind::Exact,
        vec![PosteriorEntry {
            assignment: att,
            log_prob: 0.0,
        }],
    )
}

#[test]
fn point_mass_predictive_is_best_extension_accuracy() {
    let space = AttackVariableSpace::symmetric(3).unwrap();
    let eval = evaluator(space.clone(), Semantics::Complete, ParameterFamily::Linear);
    for att in all_assignments(&space) {
        let af = space.framework(&att);
        let exts = af.extensions(Semantics::Complete).unwrap();
        let post = point_mass(att.clone());
        for e in ArgSet::all_subsets(3) {
            let accuracy = exts
                .iter()
                .map(|ext| (0..3).filter(|&a| ext.contains(a) == e.contains(a)).count())
                .max()
                .unwrap() as f64
                / 3.0;
            let got = posterior_predictive(e, &post, &eval).unwrap();
            assert!((got - accuracy).abs() < 1e-12);
        }
    }
}

fn observation_strategy(n: usize) -> impl Strategy<Value = Observation> {
    (0..1u32 << n, any::<bool>(), 1u32..3)
        .prop_map(|(d, label, weight)| Observation::weighted(ArgSet(d), label, weight))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn batch_equals_sequential_in_any_order(
        obs in prop::collection::vec(observation_strategy(3), 0..8),
        shuffle_seed in any::<u64>(),
        lambda in 0.05f64..0.95,
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let space = AttackVariableSpace::new(3, VariableMode::Symmetric)
            .unwrap()
            .with_uniform_prior(lambda)
            .unwrap();
        let eval = evaluator(space, Semantics::Complete, ParameterFamily::exponential(2.0).unwrap());
        let mut order = obs.clone();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(shuffle_seed));
        let sequential = order.iter().try_fold(
            exact_posterior(&[], &eval, 20).unwrap(),
            |post, o| sequential_update(&post, o, &eval),
        );
        let batch = match exact_posterior(&obs, &eval, 20) {
            Ok(batch) => batch,
            Err(e) => {
                prop_assert!(matches!(e, Error::DegenerateEvidence));
                prop_assert!(matches!(sequential, Err(Error::DegenerateEvidence)));
                return Ok(());
            }
        };
        prop_assert!(sequential.unwrap().total_variation(&batch) < 1e-12);
        let total: f64 = batch.iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
