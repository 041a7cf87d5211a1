//! Abstract argumentation frameworks and their extensions.
//!
//! Arguments are dense indices `0..n`. Sets of arguments are bitmasks
//! ([`ArgSet`]), so a framework is limited to [`MAX_ARGUMENTS`] arguments and
//! extension enumeration is further limited by a configurable cap.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Hard limit imposed by the 32-bit set representation.
pub const MAX_ARGUMENTS: usize = 32;

/// Default limit on the number of arguments for extension enumeration.
pub const DEFAULT_EXTENSION_CAP: usize = 16;

/// A subset of the arguments `0..n`, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ArgSet(pub u32);

impl ArgSet {
    pub const EMPTY: ArgSet = ArgSet(0);

    /// All arguments of an `n`-argument framework.
    pub fn full(n: usize) -> ArgSet {
        debug_assert!(n <= MAX_ARGUMENTS);
        if n == 32 {
            ArgSet(u32::MAX)
        } else {
            ArgSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(a: usize) -> ArgSet {
        ArgSet(1 << a)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> ArgSet {
        ArgSet(indices.into_iter().fold(0, |acc, i| acc | (1 << i)))
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn contains(self, a: usize) -> bool {
        self.0 >> a & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, a: usize) {
        self.0 |= 1 << a;
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn is_subset(self, other: ArgSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn union(self, other: ArgSet) -> ArgSet {
        ArgSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: ArgSet) -> ArgSet {
        ArgSet(self.0 & other.0)
    }

    /// Complement within `0..n`.
    #[inline]
    pub fn complement(self, n: usize) -> ArgSet {
        ArgSet(!self.0 & ArgSet::full(n).0)
    }

    /// True iff every member is below `n`.
    pub fn within(self, n: usize) -> bool {
        self.is_subset(ArgSet::full(n))
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// Every subset of `0..n`, in increasing bitmask order.
    pub fn all_subsets(n: usize) -> impl Iterator<Item = ArgSet> {
        debug_assert!(n < 32);
        (0u32..1 << n).map(ArgSet)
    }

    /// Ordering key: smaller sets first, then lexicographic by members.
    pub fn canonical_key(self) -> (usize, Vec<usize>) {
        (self.len(), self.iter().collect())
    }
}

/// Sorts sets into canonical order (see [`ArgSet::canonical_key`]).
pub fn sort_canonical(sets: &mut [ArgSet]) {
    sets.sort_by_cached_key(|s| s.canonical_key());
}

/// The four acceptability semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semantics {
    Grounded,
    Complete,
    Preferred,
    Stable,
}

impl Semantics {
    pub const ALL: [Semantics; 4] = [
        Semantics::Grounded,
        Semantics::Complete,
        Semantics::Preferred,
        Semantics::Stable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Semantics::Grounded => "grounded",
            Semantics::Complete => "complete",
            Semantics::Preferred => "preferred",
            Semantics::Stable => "stable",
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Semantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "grounded" => Ok(Semantics::Grounded),
            "complete" => Ok(Semantics::Complete),
            "preferred" => Ok(Semantics::Preferred),
            "stable" => Ok(Semantics::Stable),
            other => Err(Error::input(format!("unknown semantics `{other}`"))),
        }
    }
}

/// An argumentation framework over the arguments `0..n`.
///
/// Besides the attack pairs, the framework keeps for every argument the
/// bitmask of its attackers and of its targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgumentationFramework {
    n: usize,
    attackers: Vec<u32>,
    targets: Vec<u32>,
    symmetric: bool,
}

impl ArgumentationFramework {
    /// A directed framework. Self-attacks are allowed, duplicate pairs are not.
    pub fn new(n: usize, attacks: &[(usize, usize)]) -> Result<Self> {
        let mut af = Self::empty(n)?;
        for &(a, b) in attacks {
            af.check_pair(a, b)?;
            if af.attacks(a, b) {
                return Err(Error::input(format!("duplicate attack ({a}, {b})")));
            }
            af.add(a, b);
        }
        Ok(af)
    }

    /// A symmetric, irreflexive framework from unordered pairs, each listed once.
    pub fn symmetric(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut af = Self::empty(n)?;
        af.symmetric = true;
        for &(a, b) in pairs {
            af.check_pair(a, b)?;
            if a == b {
                return Err(Error::input(format!(
                    "self-attack on argument {a} in a symmetric framework"
                )));
            }
            if af.attacks(a, b) {
                return Err(Error::input(format!("duplicate attack {{{a}, {b}}}")));
            }
            af.add(a, b);
            af.add(b, a);
        }
        Ok(af)
    }

    /// Framework with no attacks.
    pub fn empty(n: usize) -> Result<Self> {
        if n > MAX_ARGUMENTS {
            return Err(Error::Capacity {
                what: "argument count",
                size: n,
                cap: MAX_ARGUMENTS,
            });
        }
        Ok(ArgumentationFramework {
            n,
            attackers: vec![0; n],
            targets: vec![0; n],
            symmetric: false,
        })
    }

    /// Builds a framework from per-argument attacker masks. Used on hot
    /// paths where the masks are already known to be in range.
    pub(crate) fn from_attackers(n: usize, attackers: Vec<u32>, symmetric: bool) -> Self {
        debug_assert_eq!(attackers.len(), n);
        let mut targets = vec![0u32; n];
        for (b, &mask) in attackers.iter().enumerate() {
            for a in ArgSet(mask).iter() {
                targets[a] |= 1 << b;
            }
        }
        ArgumentationFramework {
            n,
            attackers,
            targets,
            symmetric,
        }
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        if a >= self.n || b >= self.n {
            return Err(Error::input(format!(
                "attack ({a}, {b}) references an argument outside 0..{}",
                self.n
            )));
        }
        Ok(())
    }

    fn add(&mut self, a: usize, b: usize) {
        self.attackers[b] |= 1 << a;
        self.targets[a] |= 1 << b;
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn arguments(&self) -> ArgSet {
        ArgSet::full(self.n)
    }

    #[inline]
    pub fn attacks(&self, a: usize, b: usize) -> bool {
        self.targets[a] >> b & 1 == 1
    }

    /// Arguments attacking `a`.
    #[inline]
    pub fn attackers_of(&self, a: usize) -> ArgSet {
        ArgSet(self.attackers[a])
    }

    /// Arguments attacked by `a`.
    #[inline]
    pub fn targets_of(&self, a: usize) -> ArgSet {
        ArgSet(self.targets[a])
    }

    /// All attack pairs in row-major order.
    pub fn attack_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|a| self.targets_of(a).iter().map(move |b| (a, b)))
            .collect()
    }

    /// Arguments attacked by some member of `s`.
    #[inline]
    pub fn attacked_by(&self, s: ArgSet) -> ArgSet {
        ArgSet(s.iter().fold(0, |acc, a| acc | self.targets[a]))
    }

    fn check_set(&self, s: ArgSet) -> Result<()> {
        if !s.within(self.n) {
            return Err(Error::input(format!(
                "set {:#x} references an argument outside 0..{}",
                s.0, self.n
            )));
        }
        Ok(())
    }

    #[inline]
    fn conflict_free_unchecked(&self, s: ArgSet) -> bool {
        s.iter().all(|a| self.targets[a] & s.0 == 0)
    }

    #[inline]
    fn characteristic_unchecked(&self, s: ArgSet) -> ArgSet {
        let defeated = self.attacked_by(s).0;
        let mut out = 0u32;
        for a in 0..self.n {
            if self.attackers[a] & !defeated == 0 {
                out |= 1 << a;
            }
        }
        ArgSet(out)
    }

    /// True iff no member of `s` attacks a member of `s`.
    pub fn conflict_free(&self, s: ArgSet) -> Result<bool> {
        self.check_set(s)?;
        Ok(self.conflict_free_unchecked(s))
    }

    /// True iff every attacker of `a` is attacked by some member of `s`.
    pub fn acceptable_wrt(&self, a: usize, s: ArgSet) -> Result<bool> {
        if a >= self.n {
            return Err(Error::input(format!("argument {a} outside 0..{}", self.n)));
        }
        self.check_set(s)?;
        Ok(self.attackers_of(a).is_subset(self.attacked_by(s)))
    }

    /// The characteristic function: every argument acceptable with respect to `s`.
    pub fn characteristic(&self, s: ArgSet) -> Result<ArgSet> {
        self.check_set(s)?;
        Ok(self.characteristic_unchecked(s))
    }

    pub fn admissible(&self, s: ArgSet) -> Result<bool> {
        self.check_set(s)?;
        Ok(self.conflict_free_unchecked(s) && s.is_subset(self.characteristic_unchecked(s)))
    }

    /// Least fixed point of the characteristic function, iterated from the empty set.
    pub fn grounded(&self) -> ArgSet {
        let mut current = ArgSet::EMPTY;
        loop {
            let next = self.characteristic_unchecked(current);
            if next == current {
                return current;
            }
            current = next;
        }
    }

    #[inline]
    fn is_complete_cf(&self, s: ArgSet) -> bool {
        self.characteristic_unchecked(s) == s
    }

    #[inline]
    fn is_stable_cf(&self, s: ArgSet) -> bool {
        self.attacked_by(s).union(s) == self.arguments()
    }

    #[inline]
    fn is_admissible_cf(&self, s: ArgSet) -> bool {
        s.is_subset(self.characteristic_unchecked(s))
    }

    /// Extensions under `sem`, with the default argument cap.
    pub fn extensions(&self, sem: Semantics) -> Result<ExtensionSet> {
        self.extensions_with_cap(sem, DEFAULT_EXTENSION_CAP)
    }

    /// Extensions under `sem`, enumerated by a depth-first search over
    /// conflict-free sets.
    pub fn extensions_with_cap(&self, sem: Semantics, cap: usize) -> Result<ExtensionSet> {
        self.check_cap(cap)?;
        if sem == Semantics::Grounded {
            return Ok(ExtensionSet::new(vec![self.grounded()]));
        }
        let mut found = Vec::new();
        self.search(0, ArgSet::EMPTY, 0, sem, &mut found);
        if sem == Semantics::Preferred {
            found = maximal(found);
        }
        Ok(ExtensionSet::new(found))
    }

    /// Extensions under `sem` by checking all `2^n` subsets. Slow but simple;
    /// the search in [`extensions_with_cap`](Self::extensions_with_cap) is
    /// tested against it.
    pub fn extensions_exhaustive(&self, sem: Semantics, cap: usize) -> Result<ExtensionSet> {
        self.check_cap(cap)?;
        let subsets = ArgSet::all_subsets(self.n);
        let found: Vec<ArgSet> = match sem {
            Semantics::Grounded => vec![self.grounded()],
            Semantics::Complete => subsets
                .filter(|&s| self.conflict_free_unchecked(s) && self.is_complete_cf(s))
                .collect(),
            Semantics::Stable => subsets
                .filter(|&s| self.conflict_free_unchecked(s) && self.is_stable_cf(s))
                .collect(),
            Semantics::Preferred => maximal(
                subsets
                    .filter(|&s| self.conflict_free_unchecked(s) && self.is_admissible_cf(s))
                    .collect(),
            ),
        };
        Ok(ExtensionSet::new(found))
    }

    fn check_cap(&self, cap: usize) -> Result<()> {
        let cap = cap.min(MAX_ARGUMENTS - 1);
        if self.n > cap {
            return Err(Error::Capacity {
                what: "argument count",
                size: self.n,
                cap,
            });
        }
        Ok(())
    }

    /// `blocked` holds arguments that cannot join `current` without a conflict.
    fn search(
        &self,
        next: usize,
        current: ArgSet,
        blocked: u32,
        sem: Semantics,
        out: &mut Vec<ArgSet>,
    ) {
        if next == self.n {
            let keep = match sem {
                Semantics::Complete => self.is_complete_cf(current),
                Semantics::Stable => self.is_stable_cf(current),
                Semantics::Preferred => self.is_admissible_cf(current),
                Semantics::Grounded => unreachable!("grounded is computed directly"),
            };
            if keep {
                out.push(current);
            }
            return;
        }
        // Stable sets must attack every excluded argument; once all later
        // arguments are decided that is checked at the leaf.
        if blocked >> next & 1 == 0 && !self.attacks(next, next) {
            let mut with = current;
            with.insert(next);
            let blocked_with = blocked | self.targets[next] | self.attackers[next];
            self.search(next + 1, with, blocked_with, sem, out);
        }
        self.search(next + 1, current, blocked, sem, out);
    }
}

/// Members of `sets` not strictly contained in another member.
fn maximal(mut sets: Vec<ArgSet>) -> Vec<ArgSet> {
    sets.sort_by_key(|s| std::cmp::Reverse(s.len()));
    let mut kept: Vec<ArgSet> = Vec::new();
    for s in sets {
        if !kept.iter().any(|k| s.is_subset(*k)) {
            kept.push(s);
        }
    }
    kept
}

/// The extensions of a framework, in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtensionSet {
    extensions: Vec<ArgSet>,
}

impl ExtensionSet {
    pub fn new(mut extensions: Vec<ArgSet>) -> Self {
        sort_canonical(&mut extensions);
        extensions.dedup();
        ExtensionSet { extensions }
    }

    pub fn contains(&self, d: ArgSet) -> bool {
        self.extensions.contains(&d)
    }

    pub fn len(&self) -> usize {
        self.extensions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.extensions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ArgSet> + '_ {
        self.extensions.iter().copied()
    }

    pub fn as_slice(&self) -> &[ArgSet] {
        &self.extensions
    }
}

/// Framework together with external argument names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedFramework {
    pub names: ArgumentNames,
    pub framework: ArgumentationFramework,
}

/// Mapping between external argument identifiers and dense indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ArgumentNames {
    names: Vec<String>,
}

impl ArgumentNames {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.len() > MAX_ARGUMENTS {
            return Err(Error::Capacity {
                what: "argument count",
                size: names.len(),
                cap: MAX_ARGUMENTS,
            });
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::Schema(format!("argument {i} has an empty name")));
            }
            if name.trim() != name || name.contains([',', ';', '{', '}']) {
                return Err(Error::Schema(format!(
                    "argument name `{name}` has surrounding whitespace or one of `,;{{}}`"
                )));
            }
            if names[..i].contains(name) {
                return Err(Error::Schema(format!("duplicate argument name `{name}`")));
            }
        }
        Ok(ArgumentNames { names })
    }

    /// `a`, `b`, `c`, ... (then `a1`, `b1`, ... past `z`).
    pub fn alphabetic(n: usize) -> Self {
        let names = (0..n)
            .map(|i| {
                let letter = (b'a' + (i % 26) as u8) as char;
                if i < 26 {
                    letter.to_string()
                } else {
                    format!("{letter}{}", i / 26)
                }
            })
            .collect();
        ArgumentNames { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn as_slice(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Parses a comma-separated list of names. `{}` or an empty string is the empty set.
    pub fn parse_set(&self, text: &str) -> Result<ArgSet> {
        let trimmed = text.trim().trim_start_matches('{').trim_end_matches('}');
        let mut set = ArgSet::EMPTY;
        for part in trimmed.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let i = self
                .index(part)
                .ok_or_else(|| Error::Schema(format!("unknown argument name `{part}`")))?;
            set.insert(i);
        }
        Ok(set)
    }

    /// Formats a set as `{a, c}` (or `∅`).
    pub fn format_set(&self, s: ArgSet) -> String {
        if s.is_empty() {
            return "∅".to_string();
        }
        let members: Vec<&str> = s.iter().map(|i| self.name(i)).collect();
        format!("{{{}}}", members.join(", "))
    }
}
