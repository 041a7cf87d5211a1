//! Acceptability parameters and the Bernoulli acceptability likelihood.
//!
//! `θ(d | att)` is the probability that the set `d` is labelled acceptable
//! when the attack relation is `att`. All three parameter families depend on
//! the best agreement `tp + tn` between `d` and an extension of `att`.

use std::fmt;
use std::num::NonZeroUsize;
use std::sync::Arc;

use lru::LruCache;
use parking_lot::Mutex;

use crate::af::{ArgSet, ArgumentationFramework, ExtensionSet, Semantics, DEFAULT_EXTENSION_CAP};
use crate::error::{Error, Result};
use crate::space::{AttackAssignment, AttackVariableSpace, Observation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParameterFamily {
    /// 1 if `d` is an extension, else 0.
    Deterministic,
    /// Best agreement divided by the argument count.
    Linear,
    /// `(w^x − 1) / (w^n − 1)` of the best agreement `x`; `w > 1`.
    Exponential { w: f64 },
}

impl ParameterFamily {
    pub fn exponential(w: f64) -> Result<Self> {
        if !(w.is_finite() && w > 1.0) {
            return Err(Error::input(format!(
                "exponential parameter requires a finite w > 1, got {w}"
            )));
        }
        Ok(ParameterFamily::Exponential { w })
    }

    /// Builds a family from its name; `w` is required for `exponential` only.
    pub fn from_name(name: &str, w: Option<f64>) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "deterministic" => Ok(ParameterFamily::Deterministic),
            "linear" => Ok(ParameterFamily::Linear),
            "exponential" => {
                let w = w.ok_or_else(|| Error::input("exponential family requires w"))?;
                Self::exponential(w)
            }
            other => Err(Error::input(format!("unknown parameter family `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ParameterFamily::Deterministic => "deterministic",
            ParameterFamily::Linear => "linear",
            ParameterFamily::Exponential { .. } => "exponential",
        }
    }

    /// Maps a best agreement `x` out of `n` arguments to a probability.
    pub fn apply(&self, x: usize, n: usize) -> f64 {
        debug_assert!(x <= n);
        match *self {
            ParameterFamily::Deterministic => {
                if x == n {
                    1.0
                } else {
                    0.0
                }
            }
            ParameterFamily::Linear => x as f64 / n as f64,
            ParameterFamily::Exponential { w } => normalized_exponential(x, n, w),
        }
    }

    fn key(&self) -> (u8, u64) {
        match *self {
            ParameterFamily::Deterministic => (0, 0),
            ParameterFamily::Linear => (1, 0),
            ParameterFamily::Exponential { w } => (2, w.to_bits()),
        }
    }
}

impl fmt::Display for ParameterFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParameterFamily::Exponential { w } => write!(f, "exponential(w={w})"),
            other => f.write_str(other.name()),
        }
    }
}

/// `(w^x − 1) / (w^n − 1)` evaluated without overflow for large `n ln w`
/// and without cancellation for `w` close to 1.
pub fn normalized_exponential(x: usize, n: usize, w: f64) -> f64 {
    if x >= n {
        return 1.0;
    }
    if x == 0 {
        return 0.0;
    }
    let ln_w = (w - 1.0).ln_1p();
    let span = n as f64 * ln_w;
    let part = x as f64 * ln_w;
    if span < 1.0 {
        part.exp_m1() / span.exp_m1()
    } else {
        // w^(x−n) · (1 − w^−x) / (1 − w^−n)
        ((x as f64 - n as f64) * ln_w).exp() * (-(-part).exp_m1()) / (-(-span).exp_m1())
    }
}

/// True positives and true negatives between an extension `e` and a set `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgreementCount {
    pub tp: usize,
    pub tn: usize,
}

impl AgreementCount {
    pub fn total(self) -> usize {
        self.tp + self.tn
    }
}

pub fn agreement(e: ArgSet, d: ArgSet, n: usize) -> AgreementCount {
    AgreementCount {
        tp: e.intersection(d).len(),
        tn: e.complement(n).intersection(d.complement(n)).len(),
    }
}

/// The largest `tp + tn` over `extensions`, or `None` when there are none.
pub fn best_agreement(d: ArgSet, extensions: &ExtensionSet, n: usize) -> Option<usize> {
    extensions.iter().map(|e| agreement(e, d, n).total()).max()
}

/// `θ(d | att)` from precomputed extensions. An empty extension set gives 0.
pub fn theta_from_extensions(
    d: ArgSet,
    extensions: &ExtensionSet,
    n: usize,
    family: &ParameterFamily,
) -> f64 {
    best_agreement(d, extensions, n).map_or(0.0, |x| family.apply(x, n))
}

/// `p(Acc_d = label | att)` for a given `θ(d | att)`.
#[inline]
pub fn acceptability_likelihood(label: bool, theta: f64) -> f64 {
    if label {
        theta
    } else {
        1.0 - theta
    }
}

/// Semantics and parameter family of the acceptability model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub semantics: Semantics,
    pub family: ParameterFamily,
    pub extension_cap: usize,
}

impl ModelConfig {
    pub fn new(semantics: Semantics, family: ParameterFamily) -> Self {
        ModelConfig {
            semantics,
            family,
            extension_cap: DEFAULT_EXTENSION_CAP,
        }
    }

    pub fn with_family(self, family: ParameterFamily) -> Self {
        ModelConfig { family, ..self }
    }
}

/// `θ(d | att)` for the framework `af`.
pub fn theta(d: ArgSet, af: &ArgumentationFramework, cfg: &ModelConfig) -> Result<f64> {
    let extensions = af.extensions_with_cap(cfg.semantics, cfg.extension_cap)?;
    Ok(theta_from_extensions(d, &extensions, af.len(), &cfg.family))
}

/// `Σ weight · ln p(acc_d | att)` given the extensions of `att`; `-∞` as
/// soon as any factor is zero.
pub fn log_likelihood_from_extensions(
    obs: &[Observation],
    extensions: &ExtensionSet,
    n: usize,
    family: &ParameterFamily,
) -> f64 {
    let mut total = 0.0;
    for o in obs {
        let p = acceptability_likelihood(
            o.label,
            theta_from_extensions(o.subset, extensions, n, family),
        );
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += o.weight as f64 * p.ln();
    }
    total
}

const EXTENSION_CACHE_SIZE: usize = 4096;
const THETA_CACHE_SIZE: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct ThetaKey {
    att: AttackAssignment,
    d: ArgSet,
    family: (u8, u64),
    semantics: Semantics,
}

/// Evaluates acceptability parameters for assignments of one variable space,
/// memoizing extension sets and `θ` values in bounded LRU caches.
///
/// The caches sit behind mutexes, so one evaluator can be shared between
/// threads; [`Evaluator::fork`] gives an independent copy with empty caches.
pub struct Evaluator {
    space: AttackVariableSpace,
    config: ModelConfig,
    extensions: Mutex<LruCache<AttackAssignment, Arc<ExtensionSet>>>,
    thetas: Mutex<LruCache<ThetaKey, f64>>,
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Evaluator")
            .field("space", &self.space)
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl Evaluator {
    pub fn new(space: AttackVariableSpace, config: ModelConfig) -> Self {
        Evaluator {
            space,
            config,
            extensions: Mutex::new(LruCache::new(
                NonZeroUsize::new(EXTENSION_CACHE_SIZE).unwrap(),
            )),
            thetas: Mutex::new(LruCache::new(NonZeroUsize::new(THETA_CACHE_SIZE).unwrap())),
        }
    }

    pub fn fork(&self) -> Self {
        Self::new(self.space.clone(), self.config)
    }

    /// Same space and semantics, different parameter family.
    pub fn with_family(&self, family: ParameterFamily) -> Self {
        Self::new(self.space.clone(), self.config.with_family(family))
    }

    pub fn space(&self) -> &AttackVariableSpace {
        &self.space
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn n_args(&self) -> usize {
        self.space.n_args()
    }

    /// Extensions of the framework encoded by `att`, bypassing the cache.
    pub fn compute_extensions(&self, att: &AttackAssignment) -> Result<ExtensionSet> {
        self.space
            .framework(att)
            .extensions_with_cap(self.config.semantics, self.config.extension_cap)
    }

    pub fn extensions(&self, att: &AttackAssignment) -> Result<Arc<ExtensionSet>> {
        if let Some(hit) = self.extensions.lock().get(att) {
            return Ok(Arc::clone(hit));
        }
        let computed = Arc::new(self.compute_extensions(att)?);
        self.extensions
            .lock()
            .put(att.clone(), Arc::clone(&computed));
        Ok(computed)
    }

    pub fn theta(&self, d: ArgSet, att: &AttackAssignment) -> Result<f64> {
        let key = ThetaKey {
            att: att.clone(),
            d,
            family: self.config.family.key(),
            semantics: self.config.semantics,
        };
        if let Some(&hit) = self.thetas.lock().get(&key) {
            return Ok(hit);
        }
        let extensions = self.extensions(att)?;
        let value = theta_from_extensions(d, &extensions, self.n_args(), &self.config.family);
        self.thetas.lock().put(key, value);
        Ok(value)
    }

    pub fn likelihood(&self, obs: &Observation, att: &AttackAssignment) -> Result<f64> {
        Ok(acceptability_likelihood(
            obs.label,
            self.theta(obs.subset, att)?,
        ))
    }

    /// `ln Π_d p(acc_d | att)^weight`, `-∞` when any factor is zero.
    pub fn log_likelihood(&self, obs: &[Observation], att: &AttackAssignment) -> Result<f64> {
        let mut total = 0.0;
        for o in obs {
            let p = self.likelihood(o, att)?;
            if p <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            total += o.weight as f64 * p.ln();
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[usize]) -> ArgSet {
        ArgSet::from_indices(xs.iter().copied())
    }

    fn exp2() -> ParameterFamily {
        ParameterFamily::exponential(2.0).unwrap()
    }

    #[test]
    fn agreement_examples() {
        assert_eq!(
            agreement(set(&[0, 2]), set(&[0, 2]), 3),
            AgreementCount { tp: 2, tn: 1 }
        );
        assert_eq!(
            agreement(set(&[0]), set(&[1]), 2),
            AgreementCount { tp: 0, tn: 0 }
        );
        assert_eq!(
            agreement(set(&[0]), set(&[0, 1]), 3),
            AgreementCount { tp: 1, tn: 1 }
        );
    }

    #[test]
    fn family_validation() {
        assert!(ParameterFamily::exponential(1.0).is_err());
        assert!(ParameterFamily::exponential(f64::INFINITY).is_err());
        assert!(ParameterFamily::from_name("exponential", None).is_err());
        assert_eq!(
            ParameterFamily::from_name("linear", None).unwrap(),
            ParameterFamily::Linear
        );
    }

    #[test]
    fn normalized_exponential_regimes() {
        assert!((normalized_exponential(1, 3, 2.0) - 1.0 / 7.0).abs() < 1e-15);
        assert!((normalized_exponential(2, 3, 2.0) - 3.0 / 7.0).abs() < 1e-15);
        // Past the f64 range of w^n.
        let big = normalized_exponential(499, 500, 10.0);
        assert!((big - 0.1).abs() < 1e-12, "{big}");
        let near_one = normalized_exponential(2, 5, 1.0 + 1e-9);
        assert!((near_one - 0.4).abs() < 1e-8);
    }

    #[test]
    fn theta_examples_for_three_arguments() {
        let space = AttackVariableSpace::symmetric(3).unwrap();
        let none = space.framework(&AttackAssignment::from_bits(&[false, false, false]));
        let ab = space.framework(&AttackAssignment::from_bits(&[true, false, false]));
        let lin = ModelConfig::new(Semantics::Complete, ParameterFamily::Linear);
        let ex = ModelConfig::new(Semantics::Complete, exp2());
        assert!((theta(set(&[0]), &none, &lin).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((theta(set(&[0]), &none, &ex).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        assert!((theta(set(&[0]), &ab, &ex).unwrap() - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn deterministic_theta_is_extension_indicator() {
        let af = ArgumentationFramework::new(3, &[(0, 1), (1, 2)]).unwrap();
        let cfg = ModelConfig::new(Semantics::Complete, ParameterFamily::Deterministic);
        let exts = af.extensions(Semantics::Complete).unwrap();
        for d in ArgSet::all_subsets(3) {
            assert_eq!(theta(d, &af, &cfg).unwrap() == 1.0, exts.contains(d));
        }
    }

    #[test]
    fn empty_extension_set_gives_zero() {
        let af = ArgumentationFramework::new(1, &[(0, 0)]).unwrap();
        for family in [
            ParameterFamily::Deterministic,
            ParameterFamily::Linear,
            exp2(),
        ] {
            let cfg = ModelConfig::new(Semantics::Stable, family);
            assert_eq!(theta(ArgSet::EMPTY, &af, &cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn likelihood_examples() {
        assert_eq!(acceptability_likelihood(true, 1.0 / 7.0), 1.0 / 7.0);
        assert!((acceptability_likelihood(false, 1.0 / 7.0) - 6.0 / 7.0).abs() < 1e-15);
        assert_eq!(acceptability_likelihood(false, 1.0), 0.0);
    }

    #[test]
    fn evaluator_cache_matches_direct_computation() {
        let space = AttackVariableSpace::symmetric(3).unwrap();
        let eval = Evaluator::new(space.clone(), ModelConfig::new(Semantics::Complete, exp2()));
        for i in 0..8 {
            let att = space.assignment_at(&space.free_variables(), i);
            for d in ArgSet::all_subsets(3) {
                let direct = theta(d, &space.framework(&att), eval.config()).unwrap();
                assert_eq!(eval.theta(d, &att).unwrap(), direct);
                assert_eq!(eval.theta(d, &att).unwrap(), direct);
            }
        }
    }
}
