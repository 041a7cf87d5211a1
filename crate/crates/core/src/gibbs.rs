//! Systematic-scan Gibbs sampling over attack assignments.
//!
//! Each iteration is one full sweep: every free variable, in variable order,
//! is redrawn from its conditional given the freshest values of the others.
//! One assignment is recorded per sweep.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::accept::Evaluator;
use crate::bayes::{PosteriorDistribution, PosteriorEntry, PosteriorKind};
use crate::error::{Error, Result};
use crate::space::{AttackAssignment, Observation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibbsConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub chains: usize,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig {
            iterations: 10_000,
            burn_in: 1_000,
            seed: 0,
            chains: 1,
        }
    }
}

impl GibbsConfig {
    pub fn new(iterations: usize, burn_in: usize, seed: u64) -> Result<Self> {
        GibbsConfig {
            iterations,
            burn_in,
            seed,
            chains: 1,
        }
        .validated()
    }

    /// The single short chain used for the vote-data experiment: `I = 100`, `B = 0`.
    pub fn short_chain(seed: u64) -> Self {
        GibbsConfig {
            iterations: 100,
            burn_in: 0,
            seed,
            chains: 1,
        }
    }

    pub fn with_chains(self, chains: usize) -> Result<Self> {
        GibbsConfig { chains, ..self }.validated()
    }

    pub fn with_seed(self, seed: u64) -> Self {
        GibbsConfig { seed, ..self }
    }

    pub fn validated(self) -> Result<Self> {
        if self.iterations == 0 {
            return Err(Error::input("iterations must be positive"));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::input(format!(
                "burn-in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.chains == 0 {
            return Err(Error::input("at least one chain is required"));
        }
        Ok(self)
    }

    /// Samples kept per chain.
    pub fn kept(&self) -> usize {
        self.iterations - self.burn_in
    }
}

/// Normalized conditional distribution of one binary variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPoint {
    pub p0: f64,
    pub p1: f64,
}

impl TwoPoint {
    fn from_logs(variable: usize, l0: f64, l1: f64) -> Result<Self> {
        let p1 = match (l0 == f64::NEG_INFINITY, l1 == f64::NEG_INFINITY) {
            (true, true) => return Err(Error::DegenerateConditional { variable }),
            (true, false) => 1.0,
            (false, true) => 0.0,
            (false, false) => 1.0 / (1.0 + (l0 - l1).exp()),
        };
        Ok(TwoPoint { p0: 1.0 - p1, p1 })
    }
}

fn add_log(prior: f64, log_lik: f64) -> f64 {
    if prior <= 0.0 || log_lik == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        prior.ln() + log_lik
    }
}

/// `p(Att_m | rest, obs) ∝ λ_m^{Att_m} (1 − λ_m)^{1 − Att_m} Π_d p(acc_d | Att_m, rest)`.
pub fn gibbs_conditional(
    m: usize,
    current: &AttackAssignment,
    obs: &[Observation],
    eval: &Evaluator,
) -> Result<TwoPoint> {
    let space = eval.space();
    if m >= space.len() {
        return Err(Error::input(format!("variable {m} out of range")));
    }
    if space.clamp_of(m).is_some() {
        return Err(Error::input(format!("variable {m} is clamped")));
    }
    let mut att = current.clone();
    att.set(m, false);
    let l0 = eval.log_likelihood(obs, &att)?;
    att.set(m, true);
    let l1 = eval.log_likelihood(obs, &att)?;
    let lambda = space.prior(m);
    TwoPoint::from_logs(m, add_log(1.0 - lambda, l0), add_log(lambda, l1))
}

/// Counts of the assignments recorded after burn-in, plus a per-iteration
/// record of whether each sweep reached an assignment not seen before.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SampleHistogram {
    counts: BTreeMap<AttackAssignment, u64>,
    trace: Vec<bool>,
    samples: u64,
}

impl SampleHistogram {
    pub fn counts(&self) -> &BTreeMap<AttackAssignment, u64> {
        &self.counts
    }

    pub fn count(&self, att: &AttackAssignment) -> u64 {
        self.counts.get(att).copied().unwrap_or(0)
    }

    /// Number of recorded samples; equals the sum of all counts.
    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn probability(&self, att: &AttackAssignment) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.count(att) as f64 / self.samples as f64
        }
    }

    pub fn trace(&self) -> &[bool] {
        &self.trace
    }

    /// Adds the counts of `other`. Traces are not merged.
    pub fn merge_counts(&mut self, other: &SampleHistogram) {
        for (att, c) in &other.counts {
            *self.counts.entry(att.clone()).or_insert(0) += c;
        }
        self.samples += other.samples;
    }

    pub fn to_posterior(&self) -> PosteriorDistribution {
        let total = self.samples as f64;
        let entries = self
            .counts
            .iter()
            .map(|(att, &c)| PosteriorEntry {
                assignment: att.clone(),
                log_prob: (c as f64 / total).ln(),
            })
            .collect();
        PosteriorDistribution::new(PosteriorKind::Sampled, entries)
    }
}

/// Cumulative number of distinct assignments seen through each iteration.
pub fn convergence_trace(hist: &SampleHistogram) -> Vec<usize> {
    hist.trace
        .iter()
        .scan(0usize, |seen, &new| {
            if new {
                *seen += 1;
            }
            Some(*seen)
        })
        .collect()
}

/// Output of [`run_gibbs`]: the merged histogram, the per-chain histograms
/// (each carrying its own trace) and the normalized sample distribution.
#[derive(Debug, Clone)]
pub struct GibbsRun {
    pub histogram: SampleHistogram,
    pub chains: Vec<SampleHistogram>,
    pub posterior: PosteriorDistribution,
}

/// Runs `g.chains` independent chains and merges their histograms.
/// Chain `k` draws from stream `k` of a ChaCha8 generator seeded with `g.seed`.
pub fn run_gibbs(obs: &[Observation], eval: &Evaluator, g: &GibbsConfig) -> Result<GibbsRun> {
    let g = g.validated()?;
    eval.space()
        .check_assignment(&eval.space().base_assignment())?;
    let chains: Vec<SampleHistogram> = if g.chains == 1 {
        vec![run_chain(obs, eval, &g, 0)?]
    } else {
        (0..g.chains)
            .into_par_iter()
            .map(|k| run_chain(obs, &eval.fork(), &g, k as u64))
            .collect::<Result<_>>()?
    };
    let mut histogram = SampleHistogram::default();
    for chain in &chains {
        histogram.merge_counts(chain);
    }
    histogram.trace = chains[0].trace.clone();
    let posterior = histogram.to_posterior();
    Ok(GibbsRun {
        histogram,
        chains,
        posterior,
    })
}

/// Unrecorded sweeps allowed for leaving a zero-mass initial state.
pub const MAX_START_SWEEPS: usize = 1_000;

/// A single chain on stream `stream` of the seeded generator.
///
/// The random initial state may have zero posterior mass. Until a state
/// with positive mass is reached, extra sweeps run that are not recorded and
/// do not count towards `g.iterations`; in them a variable whose two
/// conditionals are both zero is redrawn from its prior. After
/// [`MAX_START_SWEEPS`] such sweeps the chain gives up with
/// [`Error::DegenerateConditional`]. From a positive-mass state every update
/// keeps positive mass.
pub fn run_chain(
    obs: &[Observation],
    eval: &Evaluator,
    g: &GibbsConfig,
    stream: u64,
) -> Result<SampleHistogram> {
    let space = eval.space();
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    rng.set_stream(stream);

    let free = space.free_variables();
    let mut state = space.base_assignment();
    for &m in &free {
        state.set(m, rng.random::<bool>());
    }

    let mut log_lik: HashMap<AttackAssignment, f64> = HashMap::new();
    let mut cached = |state: &AttackAssignment| -> Result<f64> {
        if let Some(&v) = log_lik.get(state) {
            return Ok(v);
        }
        let v = eval.log_likelihood(obs, state)?;
        log_lik.insert(state.clone(), v);
        Ok(v)
    };
    let mut sweep = |state: &mut AttackAssignment, rng: &mut ChaCha8Rng| -> Result<Option<usize>> {
        let mut stuck = None;
        for &m in &free {
            let mut l = [0.0; 2];
            for (value, slot) in l.iter_mut().enumerate() {
                state.set(m, value == 1);
                *slot = cached(state)?;
            }
            let lambda = space.prior(m);
            let p1 =
                match TwoPoint::from_logs(m, add_log(1.0 - lambda, l[0]), add_log(lambda, l[1])) {
                    Ok(cond) => cond.p1,
                    Err(_) => {
                        stuck = Some(m);
                        lambda
                    }
                };
            state.set(m, rng.random::<f64>() < p1);
        }
        Ok(stuck)
    };

    let has_mass = |state: &AttackAssignment| -> Result<bool> {
        Ok(space.log_prior(state) > f64::NEG_INFINITY
            && eval.log_likelihood(obs, state)? > f64::NEG_INFINITY)
    };
    let mut start_sweeps = 0;
    while !has_mass(&state)? {
        if start_sweeps == MAX_START_SWEEPS {
            let variable = free.first().copied().unwrap_or(0);
            return Err(Error::DegenerateConditional { variable });
        }
        sweep(&mut state, &mut rng)?;
        start_sweeps += 1;
    }

    let mut seen: HashSet<AttackAssignment> = HashSet::new();
    let mut hist = SampleHistogram {
        trace: Vec::with_capacity(g.iterations),
        ..SampleHistogram::default()
    };
    for i in 1..=g.iterations {
        if let Some(variable) = sweep(&mut state, &mut rng)? {
            return Err(Error::DegenerateConditional { variable });
        }
        hist.trace.push(seen.insert(state.clone()));
        if i > g.burn_in {
            *hist.counts.entry(state.clone()).or_insert(0) += 1;
            hist.samples += 1;
        }
    }
    Ok(hist)
}
