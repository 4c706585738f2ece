//! Placement phase: split every file into `C(Λ, t)` subfiles indexed by
//! `t`-subsets of the cache states, fill cache state `i` with every subfile
//! whose index contains `i`, and give all perfect-CSIT users the shared state.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::Range;

use num_traits::{One, Zero};

use crate::config::{Library, NetworkConfig};
use crate::error::{Error, Result};
use crate::rational::{as_integer, ceil, floor, int, Q};
use crate::subsets::{binomial, k_subsets, GroupSet};

/// Subfile `W_{n,τ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubfileIndex {
    pub file: u32,
    pub tau: GroupSet,
}

impl PartialOrd for SubfileIndex {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SubfileIndex {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.file.cmp(&other.file).then_with(|| self.tau.lex_cmp(other.tau))
    }
}

/// How a `B`-bit file is cut into subfiles at an integer point `t = Λγ`.
/// Bit ranges follow the lexicographic order of `τ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subpacketization {
    states: u32,
    t: u32,
    taus: Vec<GroupSet>,
    subfile_bits: usize,
}

impl Subpacketization {
    pub fn new(config: &NetworkConfig, file_bits: usize) -> Result<Self> {
        let t = config.require_integer_t()?;
        Self::at(config.cache_states(), t, file_bits)
    }

    /// Layout for `states` cache states at point `t`, independent of a config.
    pub fn at(states: u32, t: u32, file_bits: usize) -> Result<Self> {
        let parts = binomial(states, t);
        if parts == 0 || !(file_bits as u64).is_multiple_of(parts) {
            return Err(Error::Split { file_bits, parts });
        }
        Ok(Subpacketization {
            states,
            t,
            taus: k_subsets(states, t).collect(),
            subfile_bits: (file_bits as u64 / parts) as usize,
        })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn states(&self) -> u32 {
        self.states
    }

    pub fn subfile_bits(&self) -> usize {
        self.subfile_bits
    }

    pub fn subfile_count(&self) -> usize {
        self.taus.len()
    }

    /// The index sets `𝒯` in lexicographic order.
    pub fn taus(&self) -> &[GroupSet] {
        &self.taus
    }

    /// Position of `tau` in `𝒯`.
    pub fn position(&self, tau: GroupSet) -> Option<usize> {
        self.taus.binary_search_by(|probe| probe.lex_cmp(tau)).ok()
    }

    /// Bit range of `W_{n,τ}` inside `W_n`.
    pub fn range(&self, tau: GroupSet) -> Option<Range<usize>> {
        self.position(tau)
            .map(|p| p * self.subfile_bits..(p + 1) * self.subfile_bits)
    }

    /// Bits of subfile `index` taken from the library.
    pub fn extract<'a>(&self, library: &'a Library, index: SubfileIndex) -> &'a [bool] {
        let range = self.range(index.tau).expect("subset not in the subpacketization");
        &library.file(index.file)[range]
    }
}

/// `W_n → {W_{n,τ} : τ ∈ 𝒯}` in lexicographic order of `τ`. Fails with
/// [`Error::Split`] unless `B` is a multiple of `C(Λ, Λγ)`.
pub fn split_file(config: &NetworkConfig, file_bits: usize, n: u32) -> Result<Vec<SubfileIndex>> {
    if n == 0 || n > config.files() {
        return Err(Error::Domain("file index outside [N]"));
    }
    let layout = Subpacketization::new(config, file_bits)?;
    Ok(layout.taus().iter().map(|&tau| SubfileIndex { file: n, tau }).collect())
}

/// The `Λ` cache states and which one each user holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheAssignment {
    t: u32,
    states: Vec<Vec<SubfileIndex>>,
    user_state: Vec<u32>,
}

/// Builds the cache states for an integer point `t = Λγ`.
pub fn build_cache_assignment(config: &NetworkConfig) -> Result<CacheAssignment> {
    let t = config.require_integer_t()?;
    let lambda = config.cache_states();
    let taus: Vec<GroupSet> = k_subsets(lambda, t).collect();
    let states = (1..=lambda)
        .map(|i| {
            (1..=config.files())
                .flat_map(|file| {
                    taus.iter()
                        .filter(move |tau| tau.contains(i))
                        .map(move |&tau| SubfileIndex { file, tau })
                })
                .collect()
        })
        .collect();
    let user_state = (1..=config.users()).map(|u| config.cache_state_of(u)).collect();
    Ok(CacheAssignment { t, states, user_state })
}

impl CacheAssignment {
    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn state_count(&self) -> u32 {
        self.states.len() as u32
    }

    /// `c_k`
    pub fn state_of(&self, user: u32) -> u32 {
        self.user_state[user as usize - 1]
    }

    /// Contents of cache state `i` (1-based), ordered by file then `τ`.
    pub fn state(&self, i: u32) -> &[SubfileIndex] {
        &self.states[i as usize - 1]
    }

    /// Whether `user` has `index` in its cache.
    pub fn user_has(&self, user: u32, index: SubfileIndex) -> bool {
        index.tau.contains(self.state_of(user))
    }

    /// Cached subfiles per file in each state: `C(Λ−1, t−1)`, zero at `t = 0`.
    pub fn subfiles_per_file(&self) -> u64 {
        match self.t {
            0 => 0,
            t => binomial(self.state_count() - 1, t - 1),
        }
    }

    /// Copies the verbatim bits of `user`'s cache out of the library.
    pub fn materialize(
        &self,
        user: u32,
        library: &Library,
        layout: &Subpacketization,
    ) -> UserCache {
        let entries = self
            .state(self.state_of(user))
            .iter()
            .map(|&idx| (idx, layout.extract(library, idx).to_vec()))
            .collect();
        UserCache { entries }
    }
}

/// The bits a user actually stores.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UserCache {
    entries: BTreeMap<SubfileIndex, Vec<bool>>,
}

impl UserCache {
    pub fn get(&self, index: &SubfileIndex) -> Option<&[bool]> {
        self.entries.get(index).map(Vec::as_slice)
    }

    pub fn stored_bits(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SubfileIndex, &Vec<bool>)> {
        self.entries.iter()
    }
}

/// Memory-sharing mixture of the two neighbouring integer points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryShareSplit {
    pub t_lo: u32,
    pub t_hi: u32,
    /// Fraction of every file handled by the `t_lo` scheme.
    pub lambda: Q,
    states: u32,
}

/// Splits a non-integer point `Λγ` between `⌊Λγ⌋` and `⌈Λγ⌉`.
pub fn memory_share(config: &NetworkConfig) -> Result<MemoryShareSplit> {
    let states = config.cache_states();
    let x = config.gamma() * int(states.into());
    if let Some(t) = as_integer(&x) {
        return Err(Error::IntegerPoint { t: t as u32 });
    }
    let t_lo = floor(&x) as u32;
    let t_hi = ceil(&x) as u32;
    Ok(MemoryShareSplit { t_lo, t_hi, lambda: int(t_hi.into()) - x, states })
}

impl MemoryShareSplit {
    /// `λ·t_lo/Λ + (1−λ)·t_hi/Λ`; equals `γ`.
    pub fn cache_fraction(&self) -> Q {
        let lambda_states = int(self.states.into());
        self.lambda * int(self.t_lo.into()) / lambda_states
            + (Q::one() - self.lambda) * int(self.t_hi.into()) / lambda_states
    }

    /// Number of leading bits of each file handled by the `t_lo` scheme.
    /// Both parts must split evenly into their own subfiles.
    pub fn prefix_bits(&self, file_bits: usize) -> Result<usize> {
        let prefix = self.lambda * int(file_bits as i128);
        let prefix = as_integer(&prefix).ok_or(Error::Split {
            file_bits,
            parts: self.lambda.denom().unsigned_abs() as u64,
        })? as usize;
        Subpacketization::at(self.states, self.t_lo, prefix)?;
        Subpacketization::at(self.states, self.t_hi, file_bits - prefix)?;
        Ok(prefix)
    }
}

/// Bits stored per user for `B`-bit files, at integer or memory-shared points.
/// Always equal to `γ·N·B` when the splits are even.
pub fn stored_bits_per_user(config: &NetworkConfig, file_bits: usize) -> Result<Q> {
    let states = config.cache_states();
    let per_file = |t: u32, bits: Q| -> Q {
        if t == 0 || bits.is_zero() {
            return Q::zero();
        }
        bits * int(binomial(states - 1, t - 1).into()) / int(binomial(states, t).into())
    };
    let files = int(config.files().into());
    let b = int(file_bits as i128);
    match config.integer_t() {
        Some(t) => {
            Subpacketization::at(states, t, file_bits)?;
            Ok(files * per_file(t, b))
        }
        None => {
            let split = memory_share(config)?;
            let prefix = int(split.prefix_bits(file_bits)? as i128);
            Ok(files * (per_file(split.t_lo, prefix) + per_file(split.t_hi, b - prefix)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use alloc::vec;

    fn cfg(k: u32, l: u32, kp: u32, n: u32, g: Q) -> NetworkConfig {
        NetworkConfig::new(k, l, kp, n, g).unwrap()
    }

    #[test]
    fn split_four_states_one_cached() {
        let c = cfg(5, 2, 2, 5, q(1, 4));
        let s = split_file(&c, 8, 1).unwrap();
        let taus: Vec<_> = s.iter().map(|i| i.tau.to_vec()).collect();
        assert_eq!(taus, [vec![1], vec![2], vec![3], vec![4]]);
    }

    #[test]
    fn split_without_caching() {
        let c = cfg(5, 2, 2, 5, q(0, 1));
        let s = split_file(&c, 3, 1).unwrap();
        assert_eq!(s, [SubfileIndex { file: 1, tau: GroupSet::EMPTY }]);
    }

    #[test]
    fn split_five_states_two_cached() {
        // Λ = 5 with K = 6, K_P = 2.
        let c = cfg(6, 2, 2, 6, q(2, 5));
        let s = split_file(&c, 20, 3).unwrap();
        assert_eq!(s.len(), 10);
        assert!(s.iter().all(|i| i.file == 3 && i.tau.len() == 2));
    }

    #[test]
    fn split_divisibility_error() {
        let c = cfg(5, 2, 2, 5, q(1, 4));
        assert_eq!(split_file(&c, 6, 1), Err(Error::Split { file_bits: 6, parts: 4 }));
        let nonint = cfg(5, 2, 2, 5, q(3, 8));
        assert!(matches!(split_file(&nonint, 8, 1), Err(Error::NonIntegerPoint { .. })));
    }

    #[test]
    fn subfile_ranges_partition_file() {
        let layout = Subpacketization::at(5, 2, 30).unwrap();
        let mut covered = [false; 30];
        for &tau in layout.taus() {
            for b in layout.range(tau).unwrap() {
                assert!(!covered[b]);
                covered[b] = true;
            }
        }
        assert!(covered.iter().all(|&c| c));
    }

    #[test]
    fn assignment_shared_state() {
        let c = cfg(5, 2, 2, 5, q(1, 4));
        let a = build_cache_assignment(&c).unwrap();
        assert_eq!(a.state_of(4), 4);
        assert_eq!(a.state_of(5), 4);
        assert_eq!(a.subfiles_per_file(), 1);
        for i in 1..=4 {
            assert_eq!(a.state(i).len(), 5);
            assert!(a.state(i).iter().all(|s| s.tau == GroupSet::singleton(i)));
        }
        assert_eq!(stored_bits_per_user(&c, 8).unwrap(), int(10));
    }

    #[test]
    fn single_perfect_user_matches_plain_placement() {
        let c = cfg(4, 2, 1, 4, q(1, 2));
        let a = build_cache_assignment(&c).unwrap();
        let states: Vec<_> = (1..=4).map(|u| a.state_of(u)).collect();
        assert_eq!(states, [1, 2, 3, 4]);
    }

    #[test]
    fn empty_caches_at_zero() {
        let c = cfg(5, 2, 2, 5, q(0, 1));
        let a = build_cache_assignment(&c).unwrap();
        assert!((1..=4).all(|i| a.state(i).is_empty()));
        assert_eq!(a.subfiles_per_file(), 0);
    }

    #[test]
    fn memory_share_examples() {
        let s = memory_share(&cfg(5, 2, 2, 5, q(3, 8))).unwrap();
        assert_eq!((s.t_lo, s.t_hi, s.lambda), (1, 2, q(1, 2)));
        assert_eq!(s.cache_fraction(), q(3, 8));

        // Λ = 2: K = 3, K_P = 2.
        let s = memory_share(&cfg(3, 2, 2, 3, q(1, 4))).unwrap();
        assert_eq!((s.t_lo, s.t_hi, s.lambda), (0, 1, q(1, 2)));
        assert_eq!(s.cache_fraction(), q(1, 4));

        assert_eq!(memory_share(&cfg(5, 2, 2, 5, q(1, 4))), Err(Error::IntegerPoint { t: 1 }));
    }

    #[test]
    fn memory_share_budget_is_exact() {
        let c = cfg(5, 2, 2, 5, q(3, 8));
        let s = memory_share(&c).unwrap();
        // λB = 24 splits into C(4,1); the rest into C(4,2).
        assert_eq!(s.prefix_bits(48).unwrap(), 24);
        assert_eq!(stored_bits_per_user(&c, 48).unwrap(), q(3, 8) * int(5 * 48));
        assert!(s.prefix_bits(10).is_err());
    }
}
