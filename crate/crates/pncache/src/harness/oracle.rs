//! End-to-end decodability check in exact complex-rational arithmetic.
//!
//! Channels have rational real and imaginary parts, zero-forcing vectors come
//! from rational Gaussian elimination, bits are sent as ±1, and every
//! receiver cancels its cached terms and divides by its effective gain. A
//! pass means every user holds its requested file bit for bit.

use std::collections::BTreeMap;

use pncache_core::delivery::{build_schedule, PrecoderTag};
use pncache_core::exact::{dot, null_space, ComplexQ, Field};
use pncache_core::placement::{build_cache_assignment, SubfileIndex, Subpacketization, UserCache};
use pncache_core::rational::{int, q, Q};
use pncache_core::{Demand, Library, NetworkConfig, Result};
use num_integer::Integer;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::phylink::link::random_library;
use crate::phylink::{trial_rng, Purpose};

/// Integer ranges for rational channel draws and the accepted magnitude band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RationalChannelSpec {
    pub max_numerator: i128,
    pub max_denominator: i128,
    /// `(Δ1, Δ2)`; magnitudes must lie in `(Δ1, Δ2]`.
    pub delta: (Q, Q),
    pub subfile_bits: usize,
}

impl Default for RationalChannelSpec {
    fn default() -> Self {
        RationalChannelSpec {
            max_numerator: 8,
            max_denominator: 8,
            delta: (q(1, 10), int(10)),
            subfile_bits: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserRecovery {
    pub user: u32,
    pub file: u32,
    pub recovered_bits: usize,
    pub total_bits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleFailure {
    /// 0-based position in the schedule; `None` for reassembly failures.
    pub round: Option<usize>,
    pub user: u32,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub rounds: usize,
    pub users: Vec<UserRecovery>,
    pub failure: Option<OracleFailure>,
}

impl OracleReport {
    pub fn pass(&self) -> bool {
        self.failure.is_none()
    }
}

/// Exact channel and precoders.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLink {
    pub h: Vec<Vec<ComplexQ>>,
    pub v0: Vec<ComplexQ>,
    pub zf: BTreeMap<u32, Vec<ComplexQ>>,
}

impl ExactLink {
    pub fn vector(&self, tag: PrecoderTag) -> &[ComplexQ] {
        match tag {
            PrecoderTag::Broadcast => &self.v0,
            PrecoderTag::ZeroForcing { target } => &self.zf[&target],
        }
    }

    pub fn gain(&self, user: u32, tag: PrecoderTag) -> ComplexQ {
        dot(&self.h[user as usize - 1], self.vector(tag))
    }
}

fn rational(rng: &mut ChaCha8Rng, spec: &RationalChannelSpec) -> Q {
    let n = rng.random_range(-spec.max_numerator..=spec.max_numerator);
    let d = rng.random_range(1..=spec.max_denominator);
    q(n, d)
}

fn small_complex(rng: &mut ChaCha8Rng) -> ComplexQ {
    ComplexQ::new(int(rng.random_range(-3..=3)), int(rng.random_range(-3..=3)))
}

pub fn sample_rational_channel(config: &NetworkConfig, spec: &RationalChannelSpec, rng: &mut ChaCha8Rng) -> Vec<Vec<ComplexQ>> {
    let (lo2, hi2) = (spec.delta.0 * spec.delta.0, spec.delta.1 * spec.delta.1);
    (0..config.users())
        .map(|_| {
            (0..config.antennas())
                .map(|_| loop {
                    let z = ComplexQ::new(rational(rng, spec), rational(rng, spec));
                    let m = z.norm_sqr();
                    if m > lo2 && m <= hi2 {
                        break z;
                    }
                })
                .collect()
        })
        .collect()
}

/// Random combination of the null space of the other perfect users' rows,
/// redrawn until it reaches `p`. `None` when the rows leave no such vector.
pub fn exact_zf_vector(config: &NetworkConfig, h: &[Vec<ComplexQ>], p: u32, rng: &mut ChaCha8Rng) -> Option<Vec<ComplexQ>> {
    let l = config.antennas() as usize;
    let rows: Vec<Vec<ComplexQ>> =
        config.perfect_set().filter(|&i| i != p).map(|i| h[i as usize - 1].clone()).collect();
    let basis: Vec<Vec<ComplexQ>> = null_space(&rows, l).iter().map(|b| to_gaussian_integers(b)).collect();
    if basis.is_empty() {
        return None;
    }
    for _ in 0..32 {
        let mut v = vec![ComplexQ::default(); l];
        for b in &basis {
            let c = small_complex(rng);
            for (x, y) in v.iter_mut().zip(b) {
                *x = *x + c * *y;
            }
        }
        if !dot(&h[p as usize - 1], &v).is_zero() {
            return Some(v);
        }
    }
    None
}

/// Rescales `v` by a positive rational so every component is a Gaussian
/// integer with no common factor. Null-space membership is unaffected and
/// later sums stay small.
pub fn to_gaussian_integers(v: &[ComplexQ]) -> Vec<ComplexQ> {
    let parts = || v.iter().flat_map(|z| [z.re, z.im]);
    let lcm = parts().fold(1i128, |acc, x| acc.lcm(x.denom()));
    let ints: Vec<i128> = parts().map(|x| (x * int(lcm)).to_integer()).collect();
    let g = ints.iter().fold(0i128, |acc, &x| acc.gcd(&x)).max(1);
    ints.chunks(2).map(|c| ComplexQ::new(int(c[0] / g), int(c[1] / g))).collect()
}

/// Draws channel and precoders until every effective gain a receiver divides
/// by is non-zero.
pub fn sample_exact_link(config: &NetworkConfig, spec: &RationalChannelSpec, seed: u64) -> ExactLink {
    let mut rng = trial_rng(seed, 0, Purpose::Channel);
    let l = config.antennas() as usize;
    loop {
        let h = sample_rational_channel(config, spec, &mut rng);
        let zf: Option<BTreeMap<u32, Vec<ComplexQ>>> = config
            .perfect_set()
            .map(|p| exact_zf_vector(config, &h, p, &mut rng).map(|v| (p, v)))
            .collect();
        let Some(zf) = zf else { continue };
        let v0: Vec<ComplexQ> = (0..l).map(|_| small_complex(&mut rng)).collect();
        let link = ExactLink { h, v0, zf };
        if (1..=config.users()).all(|u| !link.gain(u, PrecoderTag::Broadcast).is_zero()) {
            return link;
        }
    }
}

/// `K` distinct files drawn uniformly from `[N]`.
pub fn random_demand(config: &NetworkConfig, rng: &mut ChaCha8Rng) -> Demand {
    let files = sample(rng, config.files() as usize, config.users() as usize)
        .into_iter()
        .map(|i| i as u32 + 1)
        .collect();
    Demand::new(config, files).expect("sampled files are distinct and in range")
}

fn bpsk(bit: bool) -> ComplexQ {
    ComplexQ::real(int(if bit { -1 } else { 1 }))
}

pub fn exact_decodability_oracle(config: &NetworkConfig, demand: &Demand, seed: u64) -> Result<OracleReport> {
    exact_decodability_oracle_with(config, demand, seed, &RationalChannelSpec::default())
}

pub fn exact_decodability_oracle_with(
    config: &NetworkConfig,
    demand: &Demand,
    seed: u64,
    spec: &RationalChannelSpec,
) -> Result<OracleReport> {
    Ok(exact_oracle_demands(config, std::slice::from_ref(demand), seed, spec)?.remove(0))
}

/// Several demands over the library and link drawn for `seed`; the same
/// reports as one [`exact_decodability_oracle_with`] call per demand.
pub fn exact_oracle_demands(
    config: &NetworkConfig,
    demands: &[Demand],
    seed: u64,
    spec: &RationalChannelSpec,
) -> Result<Vec<OracleReport>> {
    let t = config.require_integer_t()?;
    let parts = pncache_core::subsets::binomial(config.cache_states(), t) as usize;
    let library = random_library(config.files(), parts * spec.subfile_bits, &mut trial_rng(seed, 0, Purpose::Bits));
    let link = sample_exact_link(config, spec, seed);
    Ok(demands.iter().map(|d| run_exact(config, d, &library, &link)).collect())
}

/// Runs the full scheme over a given exact link.
pub fn run_exact(config: &NetworkConfig, demand: &Demand, library: &Library, link: &ExactLink) -> OracleReport {
    let layout = Subpacketization::new(config, library.file_bits()).expect("library sized for the layout");
    let assignment = build_cache_assignment(config).expect("integer point");
    let caches: BTreeMap<u32, UserCache> =
        (1..=config.users()).map(|u| (u, assignment.materialize(u, library, &layout))).collect();
    let schedule = build_schedule(config, demand, &assignment).expect("valid demand");
    let report = |users, failure| OracleReport { rounds: schedule.len(), users, failure };

    for p in config.perfect_set() {
        for i in config.perfect_set().filter(|&i| i != p) {
            if !link.gain(i, PrecoderTag::ZeroForcing { target: p }).is_zero() {
                let reason = format!("zero-forcing vector for user {p} leaks to user {i}");
                return report(Vec::new(), Some(OracleFailure { round: None, user: i, reason }));
            }
        }
    }

    let mut gains = BTreeMap::new();
    for s in schedule.iter().flat_map(|r| r.streams()) {
        for u in 1..=config.users() {
            gains.entry((u, s.tag)).or_insert_with(|| link.gain(u, s.tag));
        }
    }

    let bits = layout.subfile_bits();
    let mut delivered: BTreeMap<(u32, SubfileIndex), Vec<bool>> = BTreeMap::new();
    for (ri, round) in schedule.iter().enumerate() {
        let symbols: Vec<Vec<Vec<ComplexQ>>> = round
            .streams()
            .iter()
            .map(|s| s.subfiles.iter().map(|p| layout.extract(library, p.subfile).iter().map(|&b| bpsk(b)).collect()).collect())
            .collect();
        let x: Vec<Vec<ComplexQ>> = (0..bits)
            .map(|slot| {
                let mut x = vec![ComplexQ::default(); config.antennas() as usize];
                for (s, syms) in round.streams().iter().zip(&symbols) {
                    let total = syms.iter().fold(ComplexQ::default(), |acc, v| acc + v[slot]);
                    for (xj, vj) in x.iter_mut().zip(link.vector(s.tag)) {
                        *xj = *xj + *vj * total;
                    }
                }
                x
            })
            .collect();

        for &user in round.served() {
            let own = round.payload_of(user).unwrap();
            let fail = |reason: String| Some(OracleFailure { round: Some(ri), user, reason });
            let h = &link.h[user as usize - 1];
            let mut y: Vec<ComplexQ> = x.iter().map(|xs| dot(h, xs)).collect();
            let mut own_gain = None;
            for (s, syms) in round.streams().iter().zip(&symbols) {
                if round.nulled_at(config, s, user) {
                    continue;
                }
                let g = gains[&(user, s.tag)];
                for (p, sym) in s.subfiles.iter().zip(syms) {
                    if p.subfile == own {
                        own_gain = Some(g);
                        continue;
                    }
                    if caches[&user].get(&p.subfile).is_none() {
                        return report(Vec::new(), fail(format!("needs uncached subfile of file {} τ={}", p.subfile.file, p.subfile.tau)));
                    }
                    for (ys, v) in y.iter_mut().zip(sym) {
                        *ys = if *v == bpsk(false) { *ys - g } else { *ys + g };
                    }
                }
            }
            let Some(g) = own_gain else {
                return report(Vec::new(), fail("payload not on any stream it receives".into()));
            };
            let mut out = Vec::with_capacity(bits);
            for ys in y {
                let s = ys / g;
                if s == bpsk(false) {
                    out.push(false);
                } else if s == bpsk(true) {
                    out.push(true);
                } else {
                    return report(Vec::new(), fail(format!("residual interference: symbol {s:?}")));
                }
            }
            delivered.insert((user, own), out);
        }
    }

    let mut users = Vec::new();
    let mut failure = None;
    for user in 1..=config.users() {
        let file = demand.file_of(user);
        let mut rebuilt = Vec::with_capacity(library.file_bits());
        for &tau in layout.taus() {
            let idx = SubfileIndex { file, tau };
            match caches[&user].get(&idx).or(delivered.get(&(user, idx)).map(Vec::as_slice)) {
                Some(b) => rebuilt.extend_from_slice(b),
                None => rebuilt.extend(std::iter::repeat_n(false, bits)),
            }
        }
        let truth = library.file(file);
        let recovered = rebuilt.iter().zip(truth).filter(|(a, b)| a == b).count();
        if recovered != truth.len() && failure.is_none() {
            failure = Some(OracleFailure { round: None, user, reason: format!("recovered {recovered} of {} bits", truth.len()) });
        }
        users.push(UserRecovery { user, file, recovered_bits: recovered, total_bits: truth.len() });
    }
    report(users, failure)
}
