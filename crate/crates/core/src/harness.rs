//! Experiment protocols: cross-validated learning curves, synthetic
//! ground-truth recovery and Gibbs convergence studies.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::accept::{theta_from_extensions, Evaluator, ModelConfig, ParameterFamily};
use crate::af::{ArgSet, ArgumentNames};
use crate::bayes::{exact_posterior, PosteriorDistribution};
use crate::error::{Error, Result};
use crate::gibbs::{convergence_trace, run_chain, run_gibbs, GibbsConfig};
use crate::io::{RunConfig, Table, Vote, VoteMatrix};
use crate::space::{
    expand_observations, merge_observations, AttackAssignment, AttackVariableSpace, Observation,
};

/// How the posterior is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InferenceMode {
    /// Exact enumeration when the free variables fit under the cap, Gibbs otherwise.
    #[default]
    Auto,
    Exact,
    Gibbs,
}

/// Model, priors and sampler settings shared by every cell of an experiment.
#[derive(Debug, Clone)]
pub struct InferenceSetup {
    pub space: AttackVariableSpace,
    pub model: ModelConfig,
    pub prediction_family: ParameterFamily,
    pub gibbs: GibbsConfig,
    pub enumeration_cap: usize,
    pub mode: InferenceMode,
}

impl InferenceSetup {
    pub fn from_config(cfg: &RunConfig, n_args: usize) -> Result<Self> {
        Ok(InferenceSetup {
            space: cfg.space(n_args)?,
            model: cfg.model,
            prediction_family: cfg.prediction_family,
            gibbs: cfg.gibbs,
            enumeration_cap: cfg.enumeration_cap,
            mode: InferenceMode::Auto,
        })
    }

    pub fn with_mode(self, mode: InferenceMode) -> Self {
        InferenceSetup { mode, ..self }
    }

    pub fn evaluator(&self) -> Evaluator {
        Evaluator::new(self.space.clone(), self.model)
    }

    pub fn prediction_evaluator(&self) -> Evaluator {
        Evaluator::new(
            self.space.clone(),
            self.model.with_family(self.prediction_family),
        )
    }

    fn use_exact(&self) -> bool {
        match self.mode {
            InferenceMode::Exact => true,
            InferenceMode::Gibbs => false,
            InferenceMode::Auto => self.space.free_variables().len() <= self.enumeration_cap,
        }
    }

    /// Posterior given `train`; `seed` drives the sampler when one is used.
    pub fn infer(&self, train: &[Observation], seed: u64) -> Result<PosteriorDistribution> {
        let eval = self.evaluator();
        if self.use_exact() {
            exact_posterior(train, &eval, self.enumeration_cap)
        } else {
            Ok(run_gibbs(train, &eval, &self.gibbs.with_seed(seed))?.posterior)
        }
    }
}

/// Mean over unit observations of `p(Acc_e = label | training data)`, where
/// `p(Acc_e = 1 | ·)` is the posterior predictive under `predictor`'s family.
pub fn predictive_accuracy(
    test: &[Observation],
    post: &PosteriorDistribution,
    predictor: &Evaluator,
) -> Result<f64> {
    let count: u64 = test.iter().map(|o| o.weight as u64).sum();
    if count == 0 {
        return Err(Error::Plan("empty test set".into()));
    }
    let n = predictor.n_args();
    let family = predictor.config().family;
    let mut accept = vec![0.0; test.len()];
    for (att, p) in post.iter().filter(|(_, p)| *p > 0.0) {
        let extensions = predictor.extensions(att)?;
        for (acc, o) in accept.iter_mut().zip(test) {
            *acc += p * theta_from_extensions(o.subset, &extensions, n, &family);
        }
    }
    let total: f64 = accept
        .into_iter()
        .zip(test)
        .map(|(p1, o)| {
            let p1 = p1.clamp(0.0, 1.0);
            o.weight as f64 * if o.label { p1 } else { 1.0 - p1 }
        })
        .sum();
    Ok(total / count as f64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub seed: u64,
    pub train_sizes: Vec<usize>,
    pub repeats: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningCurvePoint {
    pub train_size: usize,
    pub mean_accuracy: f64,
    pub stddev: f64,
}

/// Sample mean and unbiased standard deviation (0 for a single value).
pub fn mean_stddev(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn cell_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// For every training size and repeat: draw a training subset without
/// replacement, infer the posterior from it, and score the held-out
/// observations. Weighted observations count as that many units.
pub fn cross_validate(
    dataset: &[Observation],
    plan: &SplitPlan,
    setup: &InferenceSetup,
) -> Result<Vec<LearningCurvePoint>> {
    let units = expand_observations(dataset);
    if units.is_empty() {
        return Err(Error::Plan("dataset is empty".into()));
    }
    if plan.repeats == 0 {
        return Err(Error::Plan("at least one repeat is required".into()));
    }
    if let Some(&bad) = plan.train_sizes.iter().find(|&&s| s >= units.len()) {
        return Err(Error::Plan(format!(
            "training size {bad} leaves no test data out of {} observations",
            units.len()
        )));
    }
    let cells: Vec<(usize, usize)> = (0..plan.train_sizes.len())
        .flat_map(|s| (0..plan.repeats).map(move |r| (s, r)))
        .collect();
    let predictor = setup.prediction_evaluator();
    let scores = cells
        .par_iter()
        .map(|&(s, r)| {
            let mut rng = cell_rng(plan.seed, (s * plan.repeats + r) as u64);
            let mut order: Vec<usize> = (0..units.len()).collect();
            order.shuffle(&mut rng);
            let size = plan.train_sizes[s];
            let train = merge_observations(order[..size].iter().map(|&i| units[i]));
            let test = merge_observations(order[size..].iter().map(|&i| units[i]));
            let post = setup.infer(&train, rng.random())?;
            predictive_accuracy(&test, &post, &predictor.fork())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(plan
        .train_sizes
        .iter()
        .enumerate()
        .map(|(s, &train_size)| {
            let (mean_accuracy, stddev) =
                mean_stddev(&scores[s * plan.repeats..(s + 1) * plan.repeats]);
            LearningCurvePoint {
                train_size,
                mean_accuracy,
                stddev,
            }
        })
        .collect())
}

pub fn learning_curve_table(points: &[LearningCurvePoint]) -> Table {
    let mut table = Table::new(["train_size", "mean_accuracy", "stddev"]);
    for p in points {
        table.push([
            p.train_size.to_string(),
            p.mean_accuracy.to_string(),
            p.stddev.to_string(),
        ]);
    }
    table
}

/// A symmetric attack relation with each pair present with probability `density`.
pub fn random_symmetric_assignment(
    space: &AttackVariableSpace,
    density: f64,
    rng: &mut impl Rng,
) -> AttackAssignment {
    let mut att = space.base_assignment();
    for m in space.free_variables() {
        att.set(m, rng.random_bool(density));
    }
    att
}

/// Draws `n_obs` observations from the generative model: `d` uniform over
/// all subsets, label from `Bernoulli(θ(d | truth))`.
pub fn sample_observations(
    truth: &AttackAssignment,
    generator: &Evaluator,
    n_obs: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Observation>> {
    let n = generator.n_args();
    let mut out = Vec::with_capacity(n_obs);
    for _ in 0..n_obs {
        let d = ArgSet(rng.random_range(0..1u32 << n));
        let theta = generator.theta(d, truth)?;
        out.push(Observation::new(d, rng.random::<f64>() < theta));
    }
    Ok(out)
}

/// Draws `n_rows` sets from the generative model conditioned on acceptance:
/// `p(d | Acc_d = 1) ∝ θ(d | truth)`.
pub fn sample_accepted_sets(
    truth: &AttackAssignment,
    generator: &Evaluator,
    n_rows: usize,
    rng: &mut impl Rng,
) -> Result<Vec<ArgSet>> {
    let n = generator.n_args();
    let weights = ArgSet::all_subsets(n)
        .map(|d| generator.theta(d, truth))
        .collect::<Result<Vec<f64>>>()?;
    let dist = WeightedIndex::new(&weights)
        .map_err(|_| Error::input("no subset has positive acceptance probability"))?;
    Ok((0..n_rows)
        .map(|_| ArgSet(dist.sample(rng) as u32))
        .collect())
}

/// A vote matrix whose rows agree exactly with the given sets and disagree elsewhere.
pub fn vote_matrix_from_sets(names: &ArgumentNames, rows: &[ArgSet]) -> VoteMatrix {
    let width = names.len();
    VoteMatrix {
        participants: (1..=rows.len()).map(|i| format!("p{i:02}")).collect(),
        arguments: names.clone(),
        cells: rows
            .iter()
            .map(|d| {
                (0..width)
                    .map(|j| {
                        if d.contains(j) {
                            Vote::Agree
                        } else {
                            Vote::Disagree
                        }
                    })
                    .collect()
            })
            .collect(),
    }
}

/// A vote matrix sampled from a known symmetric framework.
#[derive(Debug, Clone)]
pub struct SyntheticVotes {
    pub truth: AttackAssignment,
    pub votes: VoteMatrix,
    pub observations: Vec<Observation>,
}

/// Draws a symmetric attack relation with the given edge density, then
/// `n_rows` participants whose agreed sets follow `p(d | Acc_d = 1)` under
/// `setup`'s model. Rows agree on the drawn set and disagree elsewhere.
pub fn synthetic_votes(
    setup: &InferenceSetup,
    n_rows: usize,
    density: f64,
    seed: u64,
) -> Result<SyntheticVotes> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Input(format!(
            "edge density must lie in [0, 1], got {density}"
        )));
    }
    let mut rng = cell_rng(seed, 0);
    let truth = random_symmetric_assignment(&setup.space, density, &mut rng);
    let rows = sample_accepted_sets(&truth, &setup.evaluator(), n_rows, &mut rng)?;
    let names = ArgumentNames::alphabetic(setup.space.n_args());
    Ok(SyntheticVotes {
        truth,
        votes: vote_matrix_from_sets(&names, &rows),
        observations: rows.into_iter().map(Observation::accepted).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub n_obs: usize,
    pub truth: AttackAssignment,
    pub map: AttackAssignment,
    pub posterior_mass_on_truth: f64,
    pub map_hamming: usize,
    /// Mean over every subset `d` of the predicted probability of the label
    /// `d ∈ ε(truth)`.
    pub predictive_accuracy: f64,
}

/// Samples `n_obs` observations from `truth` with `generator_family`, infers
/// the posterior with `setup`, and measures how well `truth` is recovered.
pub fn synthetic_experiment(
    truth: &AttackAssignment,
    n_obs: usize,
    setup: &InferenceSetup,
    generator_family: ParameterFamily,
    seed: u64,
) -> Result<RecoveryReport> {
    setup.space.check_assignment(truth)?;
    let mut rng = cell_rng(seed, 0);
    let generator = Evaluator::new(
        setup.space.clone(),
        setup.model.with_family(generator_family),
    );
    let obs = merge_observations(sample_observations(truth, &generator, n_obs, &mut rng)?);
    let post = setup.infer(&obs, rng.random())?;
    let map = post
        .modes()
        .into_iter()
        .next()
        .ok_or(Error::DegenerateEvidence)?;

    let n = setup.space.n_args();
    let truth_exts = setup.evaluator().compute_extensions(truth)?;
    let all_subsets: Vec<Observation> = ArgSet::all_subsets(n)
        .map(|d| Observation::new(d, truth_exts.contains(d)))
        .collect();
    let predictive_accuracy =
        predictive_accuracy(&all_subsets, &post, &setup.prediction_evaluator())?;

    Ok(RecoveryReport {
        n_obs,
        truth: truth.clone(),
        map_hamming: map.hamming(truth),
        posterior_mass_on_truth: post.probability(truth),
        map,
        predictive_accuracy,
    })
}

pub fn recovery_table(reports: &[RecoveryReport]) -> Table {
    let mut table = Table::new([
        "n_obs",
        "truth",
        "map",
        "posterior_mass_on_truth",
        "map_hamming",
        "predictive_accuracy",
    ]);
    for r in reports {
        table.push([
            r.n_obs.to_string(),
            r.truth.to_bitstring(),
            r.map.to_bitstring(),
            r.posterior_mass_on_truth.to_string(),
            r.map_hamming.to_string(),
            r.predictive_accuracy.to_string(),
        ]);
    }
    table
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// `(train_size, cumulative distinct-assignment counts)` per size.
    pub traces: Vec<(usize, Vec<usize>)>,
    /// Final distinct count at the largest size is at most that at the smallest.
    pub plateau_holds: bool,
}

/// Runs one Gibbs chain per training size on a single seeded split and
/// records how many distinct assignments the chain visits.
pub fn convergence_study(
    dataset: &[Observation],
    train_sizes: &[usize],
    setup: &InferenceSetup,
    seed: u64,
) -> Result<ConvergenceReport> {
    let units = expand_observations(dataset);
    if let Some(&bad) = train_sizes.iter().find(|&&s| s > units.len()) {
        return Err(Error::Plan(format!(
            "training size {bad} exceeds the {} available observations",
            units.len()
        )));
    }
    let mut rng = cell_rng(seed, 0);
    let mut order: Vec<usize> = (0..units.len()).collect();
    order.shuffle(&mut rng);
    let g = setup.gibbs.with_seed(rng.random());
    let traces = train_sizes
        .par_iter()
        .map(|&size| {
            let train = merge_observations(order[..size].iter().map(|&i| units[i]));
            let hist = run_chain(&train, &setup.evaluator(), &g, 0)?;
            Ok((size, convergence_trace(&hist)))
        })
        .collect::<Result<Vec<_>>>()?;
    type Trace = (usize, Vec<usize>);
    let final_at = |pick: fn(&Trace, &Trace) -> std::cmp::Ordering| {
        traces
            .iter()
            .min_by(|a, b| pick(a, b))
            .and_then(|(_, t)| t.last().copied())
    };
    let smallest = final_at(|a, b| a.0.cmp(&b.0));
    let largest = final_at(|a, b| b.0.cmp(&a.0));
    let plateau_holds = match (smallest, largest) {
        (Some(s), Some(l)) => l <= s,
        _ => true,
    };
    Ok(ConvergenceReport {
        traces,
        plateau_holds,
    })
}

pub fn convergence_table(report: &ConvergenceReport) -> Table {
    let mut table = Table::new(["train_size", "iteration", "distinct_count"]);
    for (size, trace) in &report.traces {
        for (i, c) in trace.iter().enumerate() {
            table.push([size.to_string(), (i + 1).to_string(), c.to_string()]);
        }
    }
    table
}

/// Ranks starting at 1, ties sharing their average rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; `NaN` when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, _) = mean_stddev(&rx);
    let (my, _) = mean_stddev(&ry);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// `run-<first 8 hex digits of SHA-256 of the canonical config>-seed<seed>`.
pub fn run_dir_name(cfg: &RunConfig, seed: u64) -> String {
    let digest = Sha256::digest(cfg.canonical().as_bytes());
    let hex: String = digest.iter().take(4).map(|b| format!("{b:02x}")).collect();
    format!("run-{hex}-seed{seed}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::af::Semantics;

    fn exp(w: f64) -> ParameterFamily {
        ParameterFamily::exponential(w).unwrap()
    }

    fn setup3(family: ParameterFamily) -> InferenceSetup {
        InferenceSetup {
            space: AttackVariableSpace::symmetric(3).unwrap(),
            model: ModelConfig::new(Semantics::Complete, family),
            prediction_family: ParameterFamily::Linear,
            gibbs: GibbsConfig::new(2000, 200, 0).unwrap(),
            enumeration_cap: 20,
            mode: InferenceMode::Auto,
        }
    }

    #[test]
    fn mean_stddev_unbiased() {
        assert_eq!(mean_stddev(&[0.7]), (0.7, 0.0));
        let (m, s) = mean_stddev(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn spearman_examples() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert_eq!(ranks(&[5.0, 1.0, 5.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn plan_errors() {
        let setup = setup3(exp(2.0));
        let data = vec![Observation::accepted(ArgSet::EMPTY); 3];
        let plan = SplitPlan {
            seed: 1,
            train_sizes: vec![3],
            repeats: 1,
        };
        assert!(matches!(
            cross_validate(&data, &plan, &setup),
            Err(Error::Plan(_))
        ));
        let plan = SplitPlan {
            seed: 1,
            train_sizes: vec![1],
            repeats: 1,
        };
        assert!(matches!(
            cross_validate(&[], &plan, &setup),
            Err(Error::Plan(_))
        ));
    }

    #[test]
    fn train_size_zero_uses_prior_predictive() {
        let setup = setup3(exp(2.0));
        let data: Vec<Observation> = (0..4u32)
            .map(|i| Observation::accepted(ArgSet(i)))
            .collect();
        let plan = SplitPlan {
            seed: 5,
            train_sizes: vec![0],
            repeats: 3,
        };
        let points = cross_validate(&data, &plan, &setup).unwrap();
        let prior = setup.infer(&[], 0).unwrap();
        let expected = predictive_accuracy(&data, &prior, &setup.prediction_evaluator()).unwrap();
        assert!((points[0].mean_accuracy - expected).abs() < 1e-12);
        assert!(points[0].stddev < 1e-12);
    }

    #[test]
    fn zero_observations_leave_prior_mass() {
        let setup = setup3(exp(2.0));
        let truth = AttackAssignment::from_bits(&[true, false, true]);
        let report = synthetic_experiment(&truth, 0, &setup, exp(2.0), 3).unwrap();
        assert!((report.posterior_mass_on_truth - 0.125).abs() < 1e-12);
    }

    #[test]
    fn run_dir_name_is_stable() {
        let a = run_dir_name(&RunConfig::vote_experiment(), 7);
        assert_eq!(a, run_dir_name(&RunConfig::vote_experiment(), 7));
        assert_ne!(a, run_dir_name(&RunConfig::sequential_update(), 7));
        assert!(a.starts_with("run-") && a.ends_with("-seed7"));
    }

    #[test]
    fn accepted_sets_follow_theta() {
        let setup = setup3(ParameterFamily::Deterministic);
        let truth = AttackAssignment::from_bits(&[true, true, true]);
        let eval = setup.evaluator();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows = sample_accepted_sets(&truth, &eval, 50, &mut rng).unwrap();
        let exts = eval.compute_extensions(&truth).unwrap();
        assert!(rows.iter().all(|d| exts.contains(*d)));
    }
}
