//! Delivery phase: one transmission round per `(t+1)`-subset `χ` of cache
//! states, with a stream recipe that depends on whether the shared state of
//! the perfect-CSIT users is in `χ`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::config::{Demand, NetworkConfig};
use crate::error::{Error, Result};
use crate::placement::{CacheAssignment, SubfileIndex};
use crate::rational::{int, Q};
use crate::subsets::{k_subsets, GroupSet};

/// Which precoder a stream is sent on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrecoderTag {
    /// `v0`: drawn without any channel knowledge.
    Broadcast,
    /// `v_{𝒦_P \ p}`: in the null space of every perfect-CSIT user except `target`.
    ZeroForcing { target: u32 },
}

/// One subfile destined to one user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Payload {
    pub user: u32,
    pub subfile: SubfileIndex,
}

/// A precoded stream carrying the superposition of its subfiles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    pub tag: PrecoderTag,
    pub subfiles: Vec<Payload>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionRound {
    chi: GroupSet,
    contains_shared: bool,
    served: Vec<u32>,
    payload: Vec<Payload>,
    streams: Vec<Stream>,
}

/// All `χ ⊆ [Λ]` with `|χ| = t + 1`, lexicographic. Empty when `t = Λ`.
pub fn enumerate_rounds(config: &NetworkConfig) -> Result<Vec<GroupSet>> {
    let t = config.require_integer_t()?;
    Ok(k_subsets(config.cache_states(), t + 1).collect())
}

/// Builds the served set, payloads and stream recipe of round `chi`.
pub fn build_round(
    config: &NetworkConfig,
    chi: GroupSet,
    demand: &Demand,
    assignment: &CacheAssignment,
) -> Result<TransmissionRound> {
    if chi.len() != assignment.t() + 1 || !chi.is_subset(all_states(assignment.state_count())) {
        return Err(Error::Domain("round subset has the wrong size or range"));
    }
    let served: Vec<u32> = (1..=config.users())
        .filter(|&u| chi.contains(assignment.state_of(u)))
        .collect();
    let payload: Vec<Payload> = served
        .iter()
        .map(|&user| Payload {
            user,
            subfile: SubfileIndex {
                file: demand.file_of(user),
                tau: chi.remove(assignment.state_of(user)),
            },
        })
        .collect();

    let shared = config.shared_state().filter(|&s| chi.contains(s));
    let streams = match shared {
        None => alloc::vec![Stream { tag: PrecoderTag::Broadcast, subfiles: payload.clone() }],
        Some(_) => {
            let mut streams = Vec::with_capacity(1 + config.perfect_users() as usize);
            streams.push(Stream {
                tag: PrecoderTag::Broadcast,
                subfiles: payload.iter().filter(|p| !config.is_perfect(p.user)).copied().collect(),
            });
            streams.extend(payload.iter().filter(|p| config.is_perfect(p.user)).map(|p| Stream {
                tag: PrecoderTag::ZeroForcing { target: p.user },
                subfiles: alloc::vec![*p],
            }));
            streams
        }
    };

    Ok(TransmissionRound { chi, contains_shared: shared.is_some(), served, payload, streams })
}

/// Every round of the delivery phase, in order.
pub fn build_schedule(
    config: &NetworkConfig,
    demand: &Demand,
    assignment: &CacheAssignment,
) -> Result<Vec<TransmissionRound>> {
    enumerate_rounds(config)?
        .into_iter()
        .map(|chi| build_round(config, chi, demand, assignment))
        .collect()
}

fn all_states(n: u32) -> GroupSet {
    (1..=n).collect()
}

impl TransmissionRound {
    pub fn chi(&self) -> GroupSet {
        self.chi
    }

    /// Whether the shared cache state is in `χ`.
    pub fn contains_shared(&self) -> bool {
        self.contains_shared
    }

    pub fn served(&self) -> &[u32] {
        &self.served
    }

    pub fn payloads(&self) -> &[Payload] {
        &self.payload
    }

    pub fn streams(&self) -> &[Stream] {
        &self.streams
    }

    /// `W_{d_j, χ \ c_j}` for a served user.
    pub fn payload_of(&self, user: u32) -> Option<SubfileIndex> {
        self.payload.iter().find(|p| p.user == user).map(|p| p.subfile)
    }

    /// Whether `stream` is zero-forced at `user` (a perfect-CSIT user other
    /// than the stream's target).
    pub fn nulled_at(&self, config: &NetworkConfig, stream: &Stream, user: u32) -> bool {
        matches!(stream.tag, PrecoderTag::ZeroForcing { target } if target != user && config.is_perfect(user))
    }

    /// The round with `dropped` users absent: their payloads leave every
    /// stream and their zero-forcing streams disappear. The broadcast stream
    /// stays, possibly empty.
    pub fn without_users(&self, dropped: &[u32]) -> TransmissionRound {
        let keep = |u: u32| !dropped.contains(&u);
        let streams = self
            .streams
            .iter()
            .map(|s| Stream { tag: s.tag, subfiles: s.subfiles.iter().filter(|p| keep(p.user)).copied().collect() })
            .filter(|s| s.tag == PrecoderTag::Broadcast || !s.subfiles.is_empty())
            .collect();
        TransmissionRound {
            chi: self.chi,
            contains_shared: self.contains_shared,
            served: self.served.iter().copied().filter(|&u| keep(u)).collect(),
            payload: self.payload.iter().filter(|p| keep(p.user)).copied().collect(),
            streams,
        }
    }

    /// Checks that `user` can isolate its payload: the payload is not cached,
    /// and every other term is either cached or nulled at `user`.
    pub fn check_decodable(
        &self,
        config: &NetworkConfig,
        assignment: &CacheAssignment,
        user: u32,
    ) -> Result<()> {
        let own = self.payload_of(user).ok_or(Error::Domain("user not served in this round"))?;
        if assignment.user_has(user, own) {
            return Err(Error::Domain("payload already cached"));
        }
        for stream in &self.streams {
            if self.nulled_at(config, stream, user) {
                continue;
            }
            for p in &stream.subfiles {
                if p.subfile != own && !assignment.user_has(user, p.subfile) {
                    return Err(Error::MissingCache { user, file: p.subfile.file });
                }
            }
        }
        Ok(())
    }
}

/// Round counts grouped by how many users each round serves.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScheduleStats {
    pub rounds: usize,
    pub shared_rounds: usize,
    pub served_histogram: BTreeMap<usize, usize>,
}

pub fn schedule_stats(rounds: &[TransmissionRound]) -> ScheduleStats {
    let mut stats = ScheduleStats { rounds: rounds.len(), ..Default::default() };
    for r in rounds {
        stats.shared_rounds += usize::from(r.contains_shared);
        *stats.served_histogram.entry(r.served.len()).or_default() += 1;
    }
    stats
}

impl ScheduleStats {
    /// Users served per round averaged over the schedule; every round lasts
    /// one subfile, so this is the scheme's DoF. `None` for an empty schedule.
    pub fn weighted_dof(&self) -> Option<Q> {
        if self.rounds == 0 {
            return None;
        }
        let served: usize = self.served_histogram.iter().map(|(size, count)| size * count).sum();
        Some(int(served as i128) / int(self.rounds as i128))
    }
}
