//! Exact inference over attack assignments by full enumeration.
//!
//! Masses are accumulated in log space; a zero likelihood factor is `-∞`.
//! Enumeration visits assignments in increasing index order, where bit `k`
//! of the index is the value of the `k`-th free variable.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::accept::{log_likelihood_from_extensions, theta_from_extensions, Evaluator};
use crate::af::{ArgSet, Semantics};
use crate::error::{Error, Result};
use crate::space::{AttackAssignment, AttackVariableSpace, Observation};

/// Relative tolerance for treating two log-scores as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosteriorKind {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorEntry {
    pub assignment: AttackAssignment,
    pub log_prob: f64,
}

impl PosteriorEntry {
    pub fn probability(&self) -> f64 {
        self.log_prob.exp()
    }
}

/// A normalized distribution over attack assignments. Exact posteriors list
/// every consistent assignment; sampled ones only the visited assignments.
#[derive(Debug, Clone)]
pub struct PosteriorDistribution {
    kind: PosteriorKind,
    entries: Vec<PosteriorEntry>,
    index: HashMap<AttackAssignment, usize>,
}

impl PosteriorDistribution {
    pub fn new(kind: PosteriorKind, entries: Vec<PosteriorEntry>) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.assignment.clone(), i))
            .collect();
        PosteriorDistribution {
            kind,
            entries,
            index,
        }
    }

    /// Normalizes unnormalized log masses.
    pub fn from_log_masses(
        kind: PosteriorKind,
        masses: Vec<(AttackAssignment, f64)>,
    ) -> Result<Self> {
        let total = log_sum_exp(masses.iter().map(|(_, l)| *l));
        if total == f64::NEG_INFINITY {
            return Err(Error::DegenerateEvidence);
        }
        let entries = masses
            .into_iter()
            .map(|(assignment, l)| PosteriorEntry {
                assignment,
                log_prob: l - total,
            })
            .collect();
        Ok(Self::new(kind, entries))
    }

    pub fn kind(&self) -> PosteriorKind {
        self.kind
    }

    pub fn entries(&self) -> &[PosteriorEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AttackAssignment, f64)> {
        self.entries
            .iter()
            .map(|e| (&e.assignment, e.probability()))
    }

    /// Probability of `att`; 0 for assignments not listed.
    pub fn probability(&self, att: &AttackAssignment) -> f64 {
        self.index
            .get(att)
            .map_or(0.0, |&i| self.entries[i].probability())
    }

    pub fn total(&self) -> f64 {
        self.iter().map(|(_, p)| p).sum()
    }

    /// Most probable assignments (ties within [`TIE_TOLERANCE`]), sorted.
    pub fn modes(&self) -> Vec<AttackAssignment> {
        argmax_set(self.entries.iter().map(|e| (&e.assignment, e.log_prob)))
    }

    /// Total variation distance to `other`.
    pub fn total_variation(&self, other: &PosteriorDistribution) -> f64 {
        let mut keys: Vec<&AttackAssignment> = self.index.keys().collect();
        keys.extend(other.index.keys().filter(|k| !self.index.contains_key(*k)));
        0.5 * keys
            .into_iter()
            .map(|k| (self.probability(k) - other.probability(k)).abs())
            .sum::<f64>()
    }
}

/// `ln Σ exp(x_i)`, `-∞` for an empty input or when every term is `-∞`.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn ties(a: f64, best: f64) -> bool {
    if best == f64::NEG_INFINITY {
        return a == f64::NEG_INFINITY;
    }
    (a - best).abs() <= TIE_TOLERANCE * best.abs().max(1.0)
}

fn argmax_set<'a, I>(scores: I) -> Vec<AttackAssignment>
where
    I: IntoIterator<Item = (&'a AttackAssignment, f64)>,
{
    let scores: Vec<(&AttackAssignment, f64)> = scores.into_iter().collect();
    let best = scores
        .iter()
        .map(|(_, s)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<AttackAssignment> = scores
        .into_iter()
        .filter(|(_, s)| ties(*s, best))
        .map(|(a, _)| a.clone())
        .collect();
    out.sort();
    out
}

/// `p(att)`: product of `λ_m` or `1 − λ_m` over the free variables.
pub fn attack_prior(att: &AttackAssignment, space: &AttackVariableSpace) -> Result<f64> {
    space.check_assignment(att)?;
    Ok(space.log_prior(att).exp())
}

/// `ln p(obs | att)`.
pub fn joint_log_likelihood(
    obs: &[Observation],
    att: &AttackAssignment,
    eval: &Evaluator,
) -> Result<f64> {
    eval.log_likelihood(obs, att)
}

/// Log prior and log likelihood of one assignment, computed without the caches.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub assignment: AttackAssignment,
    pub log_prior: f64,
    pub log_likelihood: f64,
}

impl Scored {
    pub fn log_mass(&self) -> f64 {
        if self.log_likelihood == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.log_prior + self.log_likelihood
        }
    }
}

/// Scores every consistent assignment, in enumeration order. Work is
/// split across the rayon pool; each assignment is scored independently.
pub fn score_all(obs: &[Observation], eval: &Evaluator, cap: usize) -> Result<Vec<Scored>> {
    let space = eval.space();
    let size = space.enumeration_size(cap)?;
    let free = space.free_variables();
    let n = space.n_args();
    let family = eval.config().family;
    (0..size)
        .into_par_iter()
        .map(|i| {
            let assignment = space.assignment_at(&free, i);
            let extensions = eval.compute_extensions(&assignment)?;
            let log_likelihood = log_likelihood_from_extensions(obs, &extensions, n, &family);
            Ok(Scored {
                log_prior: space.log_prior(&assignment),
                log_likelihood,
                assignment,
            })
        })
        .collect()
}

/// `p(att | obs) ∝ p(att) Π_d p(acc_d | att)` over all consistent assignments.
pub fn exact_posterior(
    obs: &[Observation],
    eval: &Evaluator,
    cap: usize,
) -> Result<PosteriorDistribution> {
    let masses = score_all(obs, eval, cap)?
        .into_iter()
        .map(|s| {
            let l = s.log_mass();
            (s.assignment, l)
        })
        .collect();
    PosteriorDistribution::from_log_masses(PosteriorKind::Exact, masses)
}

/// Multiplies an exact posterior by the likelihood of one more observation
/// and renormalizes.
pub fn sequential_update(
    post: &PosteriorDistribution,
    new_obs: &Observation,
    eval: &Evaluator,
) -> Result<PosteriorDistribution> {
    if post.kind() != PosteriorKind::Exact {
        return Err(Error::input(
            "sequential update requires an exact posterior",
        ));
    }
    let masses = post
        .entries()
        .iter()
        .map(|e| {
            let lik = eval.log_likelihood(std::slice::from_ref(new_obs), &e.assignment)?;
            let l = if lik == f64::NEG_INFINITY || e.log_prob == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                e.log_prob + lik
            };
            Ok((e.assignment.clone(), l))
        })
        .collect::<Result<Vec<_>>>()?;
    PosteriorDistribution::from_log_masses(PosteriorKind::Exact, masses)
}

/// Assignments maximizing `p(obs | att)`, sorted lexicographically.
pub fn ml_estimate(
    obs: &[Observation],
    eval: &Evaluator,
    cap: usize,
) -> Result<Vec<AttackAssignment>> {
    let scored = score_all(obs, eval, cap)?;
    Ok(argmax_set(
        scored.iter().map(|s| (&s.assignment, s.log_likelihood)),
    ))
}

/// Assignments maximizing `p(att) p(obs | att)`, sorted lexicographically.
pub fn map_estimate(
    obs: &[Observation],
    eval: &Evaluator,
    cap: usize,
) -> Result<Vec<AttackAssignment>> {
    let scored = score_all(obs, eval, cap)?;
    Ok(argmax_set(
        scored.iter().map(|s| (&s.assignment, s.log_mass())),
    ))
}

/// Distribution of one acceptability variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelDistribution {
    /// `p(Acc_e = 1)`.
    pub accept: f64,
}

impl LabelDistribution {
    pub fn reject(&self) -> f64 {
        1.0 - self.accept
    }

    pub fn probability(&self, label: bool) -> f64 {
        if label {
            self.accept
        } else {
            self.reject()
        }
    }
}

/// `p(Acc_e) = Σ_att p(Acc_e | att) p(att)` under the prior.
pub fn evidence(e: ArgSet, eval: &Evaluator, cap: usize) -> Result<LabelDistribution> {
    let space = eval.space();
    if !e.within(space.n_args()) {
        return Err(Error::input("queried set references unknown arguments"));
    }
    let size = space.enumeration_size(cap)?;
    let free = space.free_variables();
    let n = space.n_args();
    let family = eval.config().family;
    let accept = (0..size)
        .into_par_iter()
        .map(|i| {
            let att = space.assignment_at(&free, i);
            let extensions = eval.compute_extensions(&att)?;
            Ok(space.log_prior(&att).exp() * theta_from_extensions(e, &extensions, n, &family))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .sum();
    Ok(LabelDistribution { accept })
}

/// Labels of every subset of the arguments, indexed by subset bitmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptabilityAssignment {
    labels: Vec<bool>,
}

impl AcceptabilityAssignment {
    pub fn new(labels: Vec<bool>) -> Self {
        AcceptabilityAssignment { labels }
    }

    /// 1 exactly on the members of `accepted`.
    pub fn indicator(n: usize, accepted: impl IntoIterator<Item = ArgSet>) -> Self {
        let mut labels = vec![false; 1 << n];
        for d in accepted {
            labels[d.bits() as usize] = true;
        }
        AcceptabilityAssignment { labels }
    }

    pub fn label(&self, d: ArgSet) -> bool {
        self.labels[d.bits() as usize]
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn accepted(&self) -> impl Iterator<Item = ArgSet> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l)
            .map(|(i, _)| ArgSet(i as u32))
    }

    /// One unit-weight observation per subset.
    pub fn observations(&self) -> Vec<Observation> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, &l)| Observation::new(ArgSet(i as u32), l))
            .collect()
    }
}

/// The most likely label of every subset given `att`: 1 iff `θ > 0.5`.
/// A tie at exactly 0.5 is labelled 0.
pub fn ml_prediction(att: &AttackAssignment, eval: &Evaluator) -> Result<AcceptabilityAssignment> {
    eval.space().check_assignment(att)?;
    let n = eval.n_args();
    let extensions = eval.compute_extensions(att)?;
    let family = eval.config().family;
    let labels = ArgSet::all_subsets(n)
        .map(|d| theta_from_extensions(d, &extensions, n, &family) > 0.5)
        .collect();
    Ok(AcceptabilityAssignment { labels })
}

/// `p(Acc_e = 1 | obs) = Σ_att θ(e | att) p(att | obs)`, with `θ` from the
/// evaluator's family (which may differ from the one used for the posterior).
pub fn posterior_predictive(
    e: ArgSet,
    post: &PosteriorDistribution,
    eval: &Evaluator,
) -> Result<f64> {
    let mut total = 0.0;
    for (att, p) in post.iter() {
        if p > 0.0 {
            total += p * eval.theta(e, att)?;
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Every assignment whose extension set equals `acc` exactly: the
/// deterministic inverse problem, solved by enumeration.
pub fn solve_inverse_problem(
    acc: &AcceptabilityAssignment,
    space: &AttackVariableSpace,
    semantics: Semantics,
    cap: usize,
) -> Result<Vec<AttackAssignment>> {
    let n = space.n_args();
    if acc.labels().len() != 1 << n {
        return Err(Error::input("acceptability must label every subset"));
    }
    let size = space.enumeration_size(cap)?;
    let free = space.free_variables();
    let mut out = Vec::new();
    for i in 0..size {
        let att = space.assignment_at(&free, i);
        let exts = space
            .framework(&att)
            .extensions_with_cap(semantics, crate::af::MAX_ARGUMENTS - 1)?;
        if AcceptabilityAssignment::indicator(n, exts.iter()) == *acc {
            out.push(att);
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accept::{ModelConfig, ParameterFamily};
    use crate::space::DEFAULT_ENUMERATION_CAP as CAP;

    fn set(xs: &[usize]) -> ArgSet {
        ArgSet::from_indices(xs.iter().copied())
    }

    fn exp2() -> ParameterFamily {
        ParameterFamily::exponential(2.0).unwrap()
    }

    fn bits(s: &str) -> AttackAssignment {
        AttackAssignment::parse_bitstring(s).unwrap()
    }

    fn two_arg_directed() -> Evaluator {
        Evaluator::new(
            AttackVariableSpace::directed(2, false).unwrap(),
            ModelConfig::new(Semantics::Complete, exp2()),
        )
    }

    fn empty_and_pair_obs() -> Vec<Observation> {
        vec![
            Observation::accepted(ArgSet::EMPTY),
            Observation::accepted(set(&[0, 1])),
        ]
    }

    #[test]
    fn empty_observations_have_zero_log_likelihood() {
        let eval = two_arg_directed();
        assert_eq!(joint_log_likelihood(&[], &bits("00"), &eval).unwrap(), 0.0);
    }

    #[test]
    fn mutual_attack_likelihood() {
        let eval = Evaluator::new(
            AttackVariableSpace::symmetric(2).unwrap(),
            ModelConfig::new(Semantics::Complete, exp2()),
        );
        let l = joint_log_likelihood(&empty_and_pair_obs(), &bits("1"), &eval).unwrap();
        assert!((l.exp() - 1.0 / 3.0).abs() < 1e-15);
        let l0 = joint_log_likelihood(&empty_and_pair_obs(), &bits("0"), &eval).unwrap();
        assert_eq!(l0, f64::NEG_INFINITY);
    }

    #[test]
    fn ml_estimate_is_mutual_attack() {
        let eval = two_arg_directed();
        assert_eq!(
            ml_estimate(&empty_and_pair_obs(), &eval, CAP).unwrap(),
            vec![bits("11")]
        );
        assert_eq!(ml_estimate(&[], &eval, CAP).unwrap().len(), 4);
    }

    #[test]
    fn no_observations_gives_prior() {
        let space = AttackVariableSpace::symmetric(3)
            .unwrap()
            .with_priors(vec![0.1, 0.15, 0.2])
            .unwrap();
        let eval = Evaluator::new(space.clone(), ModelConfig::new(Semantics::Complete, exp2()));
        let post = exact_posterior(&[], &eval, CAP).unwrap();
        for (att, p) in post.iter() {
            assert!((p - attack_prior(att, &space).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_evidence_is_an_error() {
        let eval = Evaluator::new(
            AttackVariableSpace::directed(2, false).unwrap(),
            ModelConfig::new(Semantics::Complete, ParameterFamily::Deterministic),
        );
        assert!(matches!(
            exact_posterior(&empty_and_pair_obs(), &eval, CAP),
            Err(Error::DegenerateEvidence)
        ));
    }

    #[test]
    fn capacity_error_above_cap() {
        let eval = Evaluator::new(
            AttackVariableSpace::symmetric(7).unwrap(),
            ModelConfig::new(Semantics::Complete, exp2()),
        );
        assert!(matches!(
            exact_posterior(&[], &eval, CAP),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn evidence_single_variable() {
        // att = 0: sole extension {a,b}, agreement with {a} is 1 → (2−1)/(4−1).
        // att = 1: extensions ∅, {a}, {b}; {a} matches exactly → 1.
        let eval = Evaluator::new(
            AttackVariableSpace::symmetric(2).unwrap(),
            ModelConfig::new(Semantics::Complete, exp2()),
        );
        let ev = evidence(set(&[0]), &eval, CAP).unwrap();
        assert!((ev.accept - (0.5 / 3.0 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn evidence_with_everything_clamped_is_the_likelihood() {
        let mut space = AttackVariableSpace::symmetric(3).unwrap();
        for m in 0..3 {
            space.clamp(m, m != 1).unwrap();
        }
        let eval = Evaluator::new(space.clone(), ModelConfig::new(Semantics::Complete, exp2()));
        let att = space.base_assignment();
        for d in ArgSet::all_subsets(3) {
            let ev = evidence(d, &eval, CAP).unwrap();
            assert!((ev.accept - eval.theta(d, &att).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn ml_prediction_examples() {
        let eval = Evaluator::new(
            AttackVariableSpace::symmetric(2).unwrap(),
            ModelConfig::new(Semantics::Complete, exp2()),
        );
        let pred = ml_prediction(&bits("1"), &eval).unwrap();
        assert_eq!(
            pred.accepted().collect::<Vec<_>>(),
            vec![ArgSet::EMPTY, set(&[0]), set(&[1])]
        );
        let eval3 = Evaluator::new(
            AttackVariableSpace::symmetric(3).unwrap(),
            ModelConfig::new(Semantics::Complete, exp2()),
        );
        let pred = ml_prediction(&bits("000"), &eval3).unwrap();
        assert_eq!(pred.accepted().collect::<Vec<_>>(), vec![set(&[0, 1, 2])]);
    }

    #[test]
    fn posterior_predictive_examples() {
        let eval = Evaluator::new(
            AttackVariableSpace::symmetric(2).unwrap(),
            ModelConfig::new(Semantics::Complete, ParameterFamily::Deterministic),
        );
        let point = PosteriorDistribution::new(
            PosteriorKind::Exact,
            vec![PosteriorEntry {
                assignment: bits("1"),
                log_prob: 0.0,
            }],
        );
        assert_eq!(posterior_predictive(set(&[0]), &point, &eval).unwrap(), 1.0);
        let half = PosteriorDistribution::new(
            PosteriorKind::Exact,
            vec![
                PosteriorEntry {
                    assignment: bits("0"),
                    log_prob: 0.5f64.ln(),
                },
                PosteriorEntry {
                    assignment: bits("1"),
                    log_prob: 0.5f64.ln(),
                },
            ],
        );
        // θ({a} | 0) = 0 and θ({a} | 1) = 1 under the deterministic family.
        assert!((posterior_predictive(set(&[0]), &half, &eval).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sequential_update_requires_exact() {
        let eval = two_arg_directed();
        let sampled = PosteriorDistribution::new(PosteriorKind::Sampled, vec![]);
        assert!(sequential_update(&sampled, &empty_and_pair_obs()[0], &eval).is_err());
    }

    #[test]
    fn inverse_problem_without_solution() {
        let space = AttackVariableSpace::directed(2, false).unwrap();
        let acc = AcceptabilityAssignment::indicator(2, [ArgSet::EMPTY, set(&[0, 1])]);
        assert!(
            solve_inverse_problem(&acc, &space, Semantics::Complete, CAP)
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn log_sum_exp_edge_cases() {
        assert_eq!(log_sum_exp(Vec::new()), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(vec![f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        assert!((log_sum_exp(vec![0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
    }
}
