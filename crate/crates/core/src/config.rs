//! Scenario configuration and shared vocabulary.
//!
//! Users, files and cache states are numbered from 1. The perfect-CSIT set is
//! always the last `K_P` user indices; [`Relabeling`] maps any other choice of
//! perfect users onto that convention.

use alloc::vec::Vec;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::rational::{as_integer, int, Q};
use crate::subsets::MAX_GROUPS;

/// Unvalidated parameter tuple, as read from a config file or the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawConfig {
    pub users: i64,
    pub antennas: i64,
    pub perfect_users: i64,
    pub files: i64,
    pub gamma_num: i64,
    pub gamma_den: i64,
}

/// A validated `(K, L, K_P, N, γ)` scenario.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetworkConfig {
    users: u32,
    antennas: u32,
    perfect_users: u32,
    files: u32,
    gamma: Q,
}

/// Checks every scenario invariant and derives `K_F` and `Λ`.
pub fn validate_config(raw: &RawConfig) -> Result<NetworkConfig> {
    if raw.users < 1 {
        return Err(Error::Domain("K must be positive"));
    }
    if raw.antennas < 1 {
        return Err(Error::Domain("L must be positive"));
    }
    if raw.files < 1 {
        return Err(Error::Domain("N must be positive"));
    }
    if raw.perfect_users < 0 {
        return Err(Error::Domain("K_P must be non-negative"));
    }
    if raw.gamma_den == 0 {
        return Err(Error::Domain("gamma denominator is zero"));
    }
    let to_u32 = |v: i64, what| u32::try_from(v).map_err(|_| Error::Domain(what));
    let users = to_u32(raw.users, "K too large")?;
    let antennas = to_u32(raw.antennas, "L too large")?;
    let perfect_users = to_u32(raw.perfect_users, "K_P too large")?;
    let files = to_u32(raw.files, "N too large")?;
    if perfect_users > antennas {
        return Err(Error::Regime { perfect_users, antennas });
    }
    if perfect_users > users {
        return Err(Error::Domain("K_P exceeds K"));
    }
    if files < users {
        return Err(Error::Domain("N must be at least K"));
    }
    let gamma = Q::new(i128::from(raw.gamma_num), i128::from(raw.gamma_den));
    if gamma.is_negative() || gamma > Q::one() {
        return Err(Error::Domain("gamma must lie in [0, 1]"));
    }
    let cfg = NetworkConfig { users, antennas, perfect_users, files, gamma };
    if cfg.cache_states() > MAX_GROUPS {
        return Err(Error::Domain("too many cache states"));
    }
    Ok(cfg)
}

impl NetworkConfig {
    /// Convenience constructor that goes through [`validate_config`].
    pub fn new(users: u32, antennas: u32, perfect_users: u32, files: u32, gamma: Q) -> Result<Self> {
        let gamma_num = i64::try_from(*gamma.numer()).map_err(|_| Error::Domain("gamma too large"))?;
        let gamma_den = i64::try_from(*gamma.denom()).map_err(|_| Error::Domain("gamma too large"))?;
        validate_config(&RawConfig {
            users: users.into(),
            antennas: antennas.into(),
            perfect_users: perfect_users.into(),
            files: files.into(),
            gamma_num,
            gamma_den,
        })
    }

    /// Same scenario at another cache size.
    pub fn with_gamma(&self, gamma: Q) -> Result<Self> {
        Self::new(self.users, self.antennas, self.perfect_users, self.files, gamma)
    }

    /// `K`
    pub fn users(&self) -> u32 {
        self.users
    }

    /// `L`
    pub fn antennas(&self) -> u32 {
        self.antennas
    }

    /// `K_P`
    pub fn perfect_users(&self) -> u32 {
        self.perfect_users
    }

    /// `N`
    pub fn files(&self) -> u32 {
        self.files
    }

    /// `γ = M/N`
    pub fn gamma(&self) -> Q {
        self.gamma
    }

    /// `M = γN`, the per-user cache size in files.
    pub fn memory(&self) -> Q {
        self.gamma * int(self.files.into())
    }

    /// `K_F = K − K_P`
    pub fn finite_users(&self) -> u32 {
        self.users - self.perfect_users
    }

    /// `Λ = K − K_P + 1`.
    pub fn lambda(&self) -> u32 {
        self.finite_users() + 1
    }

    /// Number of distinct cache states the scheme uses: `Λ` when at least one
    /// user reports perfect CSIT, otherwise `K` (one state per user, nothing
    /// shared).
    pub fn cache_states(&self) -> u32 {
        if self.perfect_users == 0 {
            self.users
        } else {
            self.lambda()
        }
    }

    /// The state held by every perfect-CSIT user, if there are any.
    pub fn shared_state(&self) -> Option<u32> {
        (self.perfect_users > 0).then(|| self.cache_states())
    }

    pub fn is_perfect(&self, user: u32) -> bool {
        user > self.finite_users() && user <= self.users
    }

    /// Perfect-CSIT users, in increasing order.
    pub fn perfect_set(&self) -> impl Iterator<Item = u32> + Clone {
        self.finite_users() + 1..=self.users
    }

    /// Cache state `c_k` of user `k`.
    pub fn cache_state_of(&self, user: u32) -> u32 {
        debug_assert!((1..=self.users).contains(&user));
        if self.is_perfect(user) {
            self.cache_states()
        } else {
            user
        }
    }

    /// Users holding cache state `state`, in increasing order.
    pub fn users_in_state(&self, state: u32) -> impl Iterator<Item = u32> + '_ {
        (1..=self.users).filter(move |&u| self.cache_state_of(u) == state)
    }

    /// `t = Λγ` when it is an integer in `[0, Λ]`, using [`Self::cache_states`] as `Λ`.
    pub fn integer_t(&self) -> Option<u32> {
        let x = self.gamma * int(self.cache_states().into());
        as_integer(&x).and_then(|t| u32::try_from(t).ok())
    }

    /// Like [`Self::integer_t`] but as an error for callers that require it.
    pub fn require_integer_t(&self) -> Result<u32> {
        self.integer_t().ok_or(Error::NonIntegerPoint {
            lambda: self.cache_states(),
            gamma: self.gamma,
        })
    }
}

/// Requested files `d_1, …, d_K`, pairwise distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Demand(Vec<u32>);

impl Demand {
    pub fn new(config: &NetworkConfig, files: Vec<u32>) -> Result<Self> {
        if files.len() != config.users() as usize {
            return Err(Error::Demand("length differs from K"));
        }
        if files.iter().any(|&d| d == 0 || d > config.files()) {
            return Err(Error::Demand("file index outside [N]"));
        }
        let mut sorted = files.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Demand("requests must be distinct"));
        }
        Ok(Demand(files))
    }

    /// `d_k = k`.
    pub fn worst_case(config: &NetworkConfig) -> Self {
        Demand((1..=config.users()).collect())
    }

    /// File requested by `user`.
    pub fn file_of(&self, user: u32) -> u32 {
        self.0[user as usize - 1]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

/// `N` files of `B` bits each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Library {
    file_bits: usize,
    files: Vec<Vec<bool>>,
}

impl Library {
    pub fn new(files: Vec<Vec<bool>>) -> Result<Self> {
        let file_bits = files.first().map(Vec::len).ok_or(Error::Domain("empty library"))?;
        if file_bits == 0 {
            return Err(Error::Domain("files must be non-empty"));
        }
        if files.iter().any(|f| f.len() != file_bits) {
            return Err(Error::Domain("all files must have the same length"));
        }
        Ok(Library { file_bits, files })
    }

    pub fn file_bits(&self) -> usize {
        self.file_bits
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Bits of file `n` (1-based).
    pub fn file(&self, n: u32) -> &[bool] {
        &self.files[n as usize - 1]
    }
}

/// Maps external user labels (any choice of perfect-CSIT users) onto the
/// internal convention where those users are the last `K_P` indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relabeling {
    to_internal: Vec<u32>,
    to_external: Vec<u32>,
}

impl Relabeling {
    /// `perfect` lists the external labels (1-based) of the perfect-CSIT users.
    pub fn new(users: u32, perfect: &[u32]) -> Result<Self> {
        let mut is_perfect = alloc::vec![false; users as usize];
        for &p in perfect {
            if p == 0 || p > users {
                return Err(Error::Domain("perfect user label outside [K]"));
            }
            if core::mem::replace(&mut is_perfect[p as usize - 1], true) {
                return Err(Error::Domain("duplicate perfect user label"));
            }
        }
        let order: Vec<u32> = (1..=users)
            .filter(|&u| !is_perfect[u as usize - 1])
            .chain((1..=users).filter(|&u| is_perfect[u as usize - 1]))
            .collect();
        let mut to_internal = alloc::vec![0; users as usize];
        for (i, &ext) in order.iter().enumerate() {
            to_internal[ext as usize - 1] = i as u32 + 1;
        }
        Ok(Relabeling { to_internal, to_external: order })
    }

    pub fn identity(users: u32) -> Self {
        let ids: Vec<u32> = (1..=users).collect();
        Relabeling { to_internal: ids.clone(), to_external: ids }
    }

    pub fn to_internal(&self, external: u32) -> u32 {
        self.to_internal[external as usize - 1]
    }

    pub fn to_external(&self, internal: u32) -> u32 {
        self.to_external[internal as usize - 1]
    }

    /// Reorders a demand given in external labels into internal order.
    pub fn demand_to_internal(&self, external: &[u32]) -> Vec<u32> {
        self.to_external.iter().map(|&e| external[e as usize - 1]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn raw(k: i64, l: i64, kp: i64, n: i64, gn: i64, gd: i64) -> RawConfig {
        RawConfig { users: k, antennas: l, perfect_users: kp, files: n, gamma_num: gn, gamma_den: gd }
    }

    #[test]
    fn derives_kf_and_lambda() {
        let c = validate_config(&raw(5, 2, 2, 5, 1, 4)).unwrap();
        assert_eq!((c.finite_users(), c.lambda()), (3, 4));
        assert_eq!(c.perfect_set().collect::<Vec<_>>(), [4, 5]);
        assert_eq!(c.cache_state_of(4), 4);
        assert_eq!(c.cache_state_of(5), 4);
        assert_eq!(c.cache_state_of(2), 2);
        assert_eq!(c.shared_state(), Some(4));
        assert_eq!(c.users_in_state(4).collect::<Vec<_>>(), [4, 5]);
    }

    #[test]
    fn regime_violation() {
        assert_eq!(
            validate_config(&raw(5, 2, 3, 5, 1, 4)),
            Err(Error::Regime { perfect_users: 3, antennas: 2 })
        );
    }

    #[test]
    fn no_perfect_users_allowed() {
        let c = validate_config(&raw(4, 4, 0, 4, 1, 2)).unwrap();
        assert_eq!((c.finite_users(), c.lambda()), (4, 5));
        assert_eq!(c.cache_states(), 4);
        assert_eq!(c.shared_state(), None);
    }

    #[test]
    fn domain_errors() {
        for r in [
            raw(0, 1, 0, 1, 0, 1),
            raw(1, 0, 0, 1, 0, 1),
            raw(2, 1, 0, 1, 0, 1),
            raw(2, 2, 0, 2, 3, 2),
            raw(2, 2, 0, 2, -1, 2),
            raw(2, 2, 0, 2, 1, 0),
            raw(2, 2, -1, 2, 1, 2),
            raw(2, 3, 3, 3, 1, 2),
        ] {
            assert!(matches!(validate_config(&r), Err(Error::Domain(_))), "{r:?}");
        }
    }

    #[test]
    fn integer_t_cases() {
        let c = |g| NetworkConfig::new(5, 2, 2, 5, g).unwrap().integer_t();
        assert_eq!(c(q(1, 4)), Some(1));
        assert_eq!(c(q(3, 8)), None);
        assert_eq!(c(q(1, 1)), Some(4));
        assert_eq!(c(q(0, 1)), Some(0));
    }

    #[test]
    fn demand_validation() {
        let c = NetworkConfig::new(3, 1, 0, 4, q(0, 1)).unwrap();
        assert!(Demand::new(&c, alloc::vec![1, 2, 4]).is_ok());
        assert!(Demand::new(&c, alloc::vec![1, 1, 2]).is_err());
        assert!(Demand::new(&c, alloc::vec![1, 2, 5]).is_err());
        assert!(Demand::new(&c, alloc::vec![1, 2]).is_err());
        assert_eq!(Demand::worst_case(&c).as_slice(), [1, 2, 3]);
    }

    #[test]
    fn relabeling_moves_perfect_users_last() {
        let r = Relabeling::new(5, &[1, 3]).unwrap();
        assert_eq!((1..=5).map(|u| r.to_internal(u)).collect::<Vec<_>>(), [4, 1, 5, 2, 3]);
        for u in 1..=5 {
            assert_eq!(r.to_external(r.to_internal(u)), u);
        }
        assert_eq!(r.demand_to_internal(&[10, 20, 30, 40, 50]), [20, 40, 50, 10, 30]);
        assert!(Relabeling::new(3, &[1, 1]).is_err());
        assert!(Relabeling::new(3, &[4]).is_err());
    }
}
