//! Attack variables, their priors, and joint assignments.

use std::cmp::Ordering;
use std::fmt;

use crate::af::{ArgSet, ArgumentationFramework, MAX_ARGUMENTS};
use crate::error::{Error, Result};

/// Default cap on the number of free variables for exact enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariableMode {
    /// One variable per ordered pair `(a, b)`.
    Directed { self_loops: bool },
    /// One variable per unordered pair `{a, b}` of distinct arguments.
    Symmetric,
}

impl VariableMode {
    pub fn name(self) -> &'static str {
        match self {
            VariableMode::Directed { self_loops: false } => "directed",
            VariableMode::Directed { self_loops: true } => "directed-loops",
            VariableMode::Symmetric => "symmetric",
        }
    }
}

impl std::str::FromStr for VariableMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "directed" => Ok(VariableMode::Directed { self_loops: false }),
            "directed-loops" => Ok(VariableMode::Directed { self_loops: true }),
            "symmetric" => Ok(VariableMode::Symmetric),
            other => Err(Error::input(format!("unknown variable mode `{other}`"))),
        }
    }
}

/// The attack variables `Att_m` over a fixed argument set, with their prior
/// probabilities `λ_m` and optional clamps for known attacks.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackVariableSpace {
    n_args: usize,
    mode: VariableMode,
    variables: Vec<(usize, usize)>,
    priors: Vec<f64>,
    clamps: Vec<Option<bool>>,
}

impl AttackVariableSpace {
    /// Every ordered pair in row-major order, with uniform prior 0.5.
    pub fn directed(n_args: usize, self_loops: bool) -> Result<Self> {
        check_args(n_args)?;
        let variables = (0..n_args)
            .flat_map(|a| (0..n_args).map(move |b| (a, b)))
            .filter(|&(a, b)| self_loops || a != b)
            .collect();
        Ok(Self::from_variables(
            n_args,
            VariableMode::Directed { self_loops },
            variables,
        ))
    }

    /// Every unordered pair `{a, b}`, `a < b`, in lexicographic order, with uniform prior 0.5.
    pub fn symmetric(n_args: usize) -> Result<Self> {
        check_args(n_args)?;
        let variables = (0..n_args)
            .flat_map(|a| (a + 1..n_args).map(move |b| (a, b)))
            .collect();
        Ok(Self::from_variables(
            n_args,
            VariableMode::Symmetric,
            variables,
        ))
    }

    pub fn new(n_args: usize, mode: VariableMode) -> Result<Self> {
        match mode {
            VariableMode::Directed { self_loops } => Self::directed(n_args, self_loops),
            VariableMode::Symmetric => Self::symmetric(n_args),
        }
    }

    fn from_variables(n_args: usize, mode: VariableMode, variables: Vec<(usize, usize)>) -> Self {
        let m = variables.len();
        AttackVariableSpace {
            n_args,
            mode,
            variables,
            priors: vec![0.5; m],
            clamps: vec![None; m],
        }
    }

    pub fn with_uniform_prior(mut self, lambda: f64) -> Result<Self> {
        check_prior(lambda)?;
        self.priors.iter_mut().for_each(|p| *p = lambda);
        Ok(self)
    }

    pub fn with_priors(mut self, priors: Vec<f64>) -> Result<Self> {
        if priors.len() != self.variables.len() {
            return Err(Error::input(format!(
                "expected {} prior values, got {}",
                self.variables.len(),
                priors.len()
            )));
        }
        for &p in &priors {
            check_prior(p)?;
        }
        self.priors = priors;
        Ok(self)
    }

    /// Fixes variable `m` to `value`; it is then never enumerated or resampled.
    pub fn clamp(&mut self, m: usize, value: bool) -> Result<()> {
        if m >= self.variables.len() {
            return Err(Error::input(format!("variable {m} out of range")));
        }
        self.clamps[m] = Some(value);
        Ok(())
    }

    /// Clamps every attack of `known` to present. In symmetric mode `known`
    /// must be symmetric and irreflexive.
    pub fn clamp_known(&mut self, known: &ArgumentationFramework) -> Result<()> {
        if known.len() != self.n_args {
            return Err(Error::input("known attacks use a different argument count"));
        }
        for (a, b) in known.attack_pairs() {
            if self.mode == VariableMode::Symmetric && a > b {
                continue;
            }
            let m = self.variable_index(a, b).ok_or_else(|| {
                Error::input(format!("known attack ({a}, {b}) has no attack variable"))
            })?;
            self.clamp(m, true)?;
        }
        Ok(())
    }

    pub fn n_args(&self) -> usize {
        self.n_args
    }

    pub fn mode(&self) -> VariableMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[(usize, usize)] {
        &self.variables
    }

    pub fn prior(&self, m: usize) -> f64 {
        self.priors[m]
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn clamp_of(&self, m: usize) -> Option<bool> {
        self.clamps[m]
    }

    pub fn free_variables(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&m| self.clamps[m].is_none())
            .collect()
    }

    pub fn variable_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = match self.mode {
            VariableMode::Symmetric if a > b => (b, a),
            _ => (a, b),
        };
        self.variables.iter().position(|&v| v == key)
    }

    /// The all-zero assignment with clamps applied.
    pub fn base_assignment(&self) -> AttackAssignment {
        let mut att = AttackAssignment::zeros(self.len());
        for (m, clamp) in self.clamps.iter().enumerate() {
            if let Some(v) = clamp {
                att.set(m, *v);
            }
        }
        att
    }

    /// Number of free-variable configurations, or a capacity error above `cap`.
    pub fn enumeration_size(&self, cap: usize) -> Result<u64> {
        let free = self.free_variables().len();
        if free > cap || free >= 64 {
            return Err(Error::Capacity {
                what: "free attack variables",
                size: free,
                cap,
            });
        }
        Ok(1u64 << free)
    }

    /// The assignment whose `k`-th free variable takes bit `k` of `index`.
    /// Increasing `index` runs through all consistent assignments.
    pub fn assignment_at(&self, free: &[usize], index: u64) -> AttackAssignment {
        let mut att = self.base_assignment();
        for (k, &m) in free.iter().enumerate() {
            if index >> k & 1 == 1 {
                att.set(m, true);
            }
        }
        att
    }

    pub fn check_assignment(&self, att: &AttackAssignment) -> Result<()> {
        if att.len() != self.len() {
            return Err(Error::input(format!(
                "assignment has {} bits, space has {} variables",
                att.len(),
                self.len()
            )));
        }
        for (m, clamp) in self.clamps.iter().enumerate() {
            if let Some(v) = clamp {
                if att.get(m) != *v {
                    return Err(Error::input(format!(
                        "assignment violates the clamp on variable {m}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The framework whose attacks are the set variables of `att`.
    pub fn framework(&self, att: &AttackAssignment) -> ArgumentationFramework {
        let mut attackers = vec![0u32; self.n_args];
        let symmetric = self.mode == VariableMode::Symmetric;
        for m in att.ones() {
            let (a, b) = self.variables[m];
            attackers[b] |= 1 << a;
            if symmetric {
                attackers[a] |= 1 << b;
            }
        }
        ArgumentationFramework::from_attackers(self.n_args, attackers, symmetric)
    }

    /// The assignment encoding `af`, if every attack of `af` has a variable.
    pub fn encode(&self, af: &ArgumentationFramework) -> Result<AttackAssignment> {
        if af.len() != self.n_args {
            return Err(Error::input("framework has a different argument count"));
        }
        let mut att = AttackAssignment::zeros(self.len());
        for (a, b) in af.attack_pairs() {
            if self.mode == VariableMode::Symmetric {
                if !af.attacks(b, a) || a == b {
                    return Err(Error::input("framework is not symmetric and irreflexive"));
                }
                if a > b {
                    continue;
                }
            }
            let m = self
                .variable_index(a, b)
                .ok_or_else(|| Error::input(format!("attack ({a}, {b}) has no variable")))?;
            att.set(m, true);
        }
        Ok(att)
    }

    /// `ln p(att)`: the sum of `ln λ_m` or `ln (1 − λ_m)` over free variables.
    pub fn log_prior(&self, att: &AttackAssignment) -> f64 {
        (0..self.len())
            .filter(|&m| self.clamps[m].is_none())
            .map(|m| {
                let p = if att.get(m) {
                    self.priors[m]
                } else {
                    1.0 - self.priors[m]
                };
                p.ln()
            })
            .sum()
    }
}

fn check_args(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::input("at least one argument is required"));
    }
    if n > MAX_ARGUMENTS {
        return Err(Error::Capacity {
            what: "argument count",
            size: n,
            cap: MAX_ARGUMENTS,
        });
    }
    Ok(())
}

fn check_prior(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("prior {p} outside [0, 1]")));
    }
    Ok(())
}

/// One value for every attack variable, in variable order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AttackAssignment {
    len: usize,
    words: Vec<u64>,
}

impl AttackAssignment {
    pub fn zeros(len: usize) -> Self {
        AttackAssignment {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut att = Self::zeros(bits.len());
        for (m, &b) in bits.iter().enumerate() {
            att.set(m, b);
        }
        att
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, m: usize) -> bool {
        debug_assert!(m < self.len);
        self.words[m / 64] >> (m % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, m: usize, value: bool) {
        debug_assert!(m < self.len);
        let mask = 1u64 << (m % 64);
        if value {
            self.words[m / 64] |= mask;
        } else {
            self.words[m / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(i * 64 + b)
                }
            })
        })
    }

    pub fn hamming(&self, other: &AttackAssignment) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// `0`/`1` characters, variable 0 first.
    pub fn to_bitstring(&self) -> String {
        (0..self.len)
            .map(|m| if self.get(m) { '1' } else { '0' })
            .collect()
    }

    pub fn parse_bitstring(s: &str) -> Result<Self> {
        let mut att = Self::zeros(s.len());
        for (m, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => att.set(m, true),
                other => {
                    return Err(Error::input(format!(
                        "invalid character `{other}` in assignment bitstring"
                    )))
                }
            }
        }
        Ok(att)
    }
}

impl fmt::Debug for AttackAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AttackAssignment({})", self.to_bitstring())
    }
}

impl fmt::Display for AttackAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

/// Lexicographic over the bitstring, variable 0 first.
impl Ord for AttackAssignment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.words
            .iter()
            .map(|w| w.reverse_bits())
            .cmp(other.words.iter().map(|w| w.reverse_bits()))
            .then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for AttackAssignment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One acceptability datum: the set `subset` was (label 1) or was not
/// (label 0) found acceptable, `weight` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Observation {
    pub subset: ArgSet,
    pub label: bool,
    pub weight: u32,
}

impl Observation {
    pub fn new(subset: ArgSet, label: bool) -> Self {
        Observation {
            subset,
            label,
            weight: 1,
        }
    }

    pub fn accepted(subset: ArgSet) -> Self {
        Self::new(subset, true)
    }

    pub fn weighted(subset: ArgSet, label: bool, weight: u32) -> Self {
        Observation {
            subset,
            label,
            weight,
        }
    }
}

/// Merges repeated `(subset, label)` pairs by adding weights. The first
/// occurrence fixes each merged observation's position.
pub fn merge_observations<I: IntoIterator<Item = Observation>>(obs: I) -> Vec<Observation> {
    let mut merged: Vec<Observation> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for o in obs {
        match index.get(&(o.subset, o.label)) {
            Some(&i) => {
                let target: &mut Observation = &mut merged[i];
                target.weight += o.weight;
            }
            None => {
                index.insert((o.subset, o.label), merged.len());
                merged.push(o);
            }
        }
    }
    merged
}

/// Expands weights into unit observations.
pub fn expand_observations(obs: &[Observation]) -> Vec<Observation> {
    obs.iter()
        .flat_map(|o| std::iter::repeat_n(Observation::new(o.subset, o.label), o.weight as usize))
        .collect()
}
