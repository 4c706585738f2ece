//! Symbol-level transmission of delivery rounds, cache-aided interference
//! cancellation at the receivers, detection and file reassembly.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use pncache_core::delivery::{build_schedule, PrecoderTag, TransmissionRound};
use pncache_core::placement::{build_cache_assignment, SubfileIndex, Subpacketization, UserCache};
use pncache_core::{Demand, Library, NetworkConfig};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::channel::ChannelRealization;
use super::precoder::PrecoderSet;
use crate::error::{PhyError, PhyResult};

/// Gray-mapped unit-energy QPSK.
pub fn qpsk(b0: bool, b1: bool) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(if b0 { -s } else { s }, if b1 { -s } else { s })
}

/// Two bits per symbol; an odd tail is padded with a zero bit.
pub fn modulate(bits: &[bool]) -> Vec<Complex64> {
    bits.chunks(2).map(|c| qpsk(c[0], c.get(1).copied().unwrap_or(false))).collect()
}

/// Nearest QPSK point, returned as its two bits.
pub fn slice(z: Complex64) -> (bool, bool) {
    (z.re < 0.0, z.im < 0.0)
}

pub fn symbols_for(bits: usize) -> usize {
    bits.div_ceil(2)
}

/// Per-subfile amplitude on each stream: power is split equally across the
/// non-empty streams, then equally across the subfiles a stream superposes.
pub fn stream_amplitudes(round: &TransmissionRound, power: f64) -> Vec<f64> {
    let live = round.streams().iter().filter(|s| !s.subfiles.is_empty()).count().max(1);
    round
        .streams()
        .iter()
        .map(|s| match s.subfiles.len() {
            0 => 0.0,
            n => (power / live as f64 / n as f64).sqrt(),
        })
        .collect()
}

/// Expected energy per antenna, `Σ_s |v_{s,j}|² P_s`, checked against `power`.
pub fn check_power(round: &TransmissionRound, precoders: &PrecoderSet, power: f64) -> PhyResult<Vec<f64>> {
    let amps = stream_amplitudes(round, power);
    let l = precoders.v0.len();
    let mut energy = vec![0.0; l];
    for (s, a) in round.streams().iter().zip(&amps) {
        let v = precoders.vector(s.tag);
        let stream_power = a * a * s.subfiles.len() as f64;
        for (j, e) in energy.iter_mut().enumerate() {
            *e += v[j].norm_sqr() * stream_power;
        }
    }
    for (antenna, &e) in energy.iter().enumerate() {
        if e > power * (1.0 + 1e-9) {
            return Err(PhyError::Power { antenna, energy: e, budget: power });
        }
    }
    Ok(energy)
}

/// Transmit vectors `X(slot) = Σ_s v_s Σ_{W ∈ s} a_s x_W(slot)`.
pub fn precode_round(
    round: &TransmissionRound,
    layout: &Subpacketization,
    library: &Library,
    precoders: &PrecoderSet,
    power: f64,
) -> PhyResult<Vec<DVector<Complex64>>> {
    check_power(round, precoders, power)?;
    let amps = stream_amplitudes(round, power);
    let slots = symbols_for(layout.subfile_bits());
    let mut x = vec![DVector::zeros(precoders.v0.len()); slots];
    for (s, &a) in round.streams().iter().zip(&amps) {
        let v = precoders.vector(s.tag);
        for p in &s.subfiles {
            for (slot, sym) in modulate(layout.extract(library, p.subfile)).into_iter().enumerate() {
                x[slot].axpy(sym * a, v, Complex64::new(1.0, 0.0));
            }
        }
    }
    Ok(x)
}

/// Received samples of every served user in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedRound {
    pub signals: BTreeMap<u32, Vec<Complex64>>,
}

/// `Y_i = ⟨h_i, X⟩ + ζ_i` for every served user, `ζ_i ~ CN(0, noise_var)`.
#[allow(clippy::too_many_arguments)]
pub fn transmit_round<R: Rng + ?Sized>(
    round: &TransmissionRound,
    layout: &Subpacketization,
    library: &Library,
    channel: &ChannelRealization,
    precoders: &PrecoderSet,
    power: f64,
    noise_var: f64,
    rng: &mut R,
) -> PhyResult<ReceivedRound> {
    let x = precode_round(round, layout, library, precoders, power)?;
    let noise = (noise_var > 0.0).then(|| Normal::new(0.0, (noise_var / 2.0).sqrt()).unwrap());
    let signals = round
        .served()
        .iter()
        .map(|&u| {
            let y = x
                .iter()
                .map(|xs| {
                    let clean = channel.gain(u, xs);
                    match &noise {
                        Some(n) => clean + Complex64::new(n.sample(rng), n.sample(rng)),
                        None => clean,
                    }
                })
                .collect();
            (u, y)
        })
        .collect();
    Ok(ReceivedRound { signals })
}

/// Receiver-side knowledge of `⟨h_i, v⟩` for every user and precoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveGains {
    gains: BTreeMap<(u32, PrecoderTag), Complex64>,
}

impl EffectiveGains {
    pub fn new(channel: &ChannelRealization, precoders: &PrecoderSet) -> Self {
        let mut gains = BTreeMap::new();
        for u in 1..=channel.users() as u32 {
            gains.insert((u, PrecoderTag::Broadcast), channel.gain(u, &precoders.v0));
            for (&p, v) in &precoders.zf {
                gains.insert((u, PrecoderTag::ZeroForcing { target: p }), channel.gain(u, v));
            }
        }
        EffectiveGains { gains }
    }

    pub fn get(&self, user: u32, tag: PrecoderTag) -> Complex64 {
        self.gains[&(user, tag)]
    }
}

/// Payload samples left after cancellation, with the complex scale of the
/// payload symbol in them.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanedStream {
    pub user: u32,
    pub subfile: SubfileIndex,
    pub samples: Vec<Complex64>,
    pub scale: Complex64,
    pub bits: usize,
}

/// Reconstructs every cached term of the round as seen by `user` and
/// subtracts it. Streams zero-forced at `user` are skipped. Returns `None`
/// when `user` is not served in the round.
#[allow(clippy::too_many_arguments)]
pub fn cache_cancel(
    y: &[Complex64],
    user: u32,
    config: &NetworkConfig,
    round: &TransmissionRound,
    gains: &EffectiveGains,
    cache: &UserCache,
    power: f64,
    subfile_bits: usize,
) -> PhyResult<Option<CleanedStream>> {
    let Some(own) = round.payload_of(user) else {
        return Ok(None);
    };
    let amps = stream_amplitudes(round, power);
    let mut samples = y.to_vec();
    let mut scale = None;
    for (s, &a) in round.streams().iter().zip(&amps) {
        if round.nulled_at(config, s, user) {
            continue;
        }
        let g = gains.get(user, s.tag) * a;
        for p in &s.subfiles {
            if p.subfile == own {
                scale = Some(g);
                continue;
            }
            let bits = cache.get(&p.subfile).ok_or(PhyError::MissingCache { user, subfile: p.subfile })?;
            for (z, sym) in samples.iter_mut().zip(modulate(bits)) {
                *z -= g * sym;
            }
        }
    }
    let scale = scale.ok_or(PhyError::MissingCache { user, subfile: own })?;
    Ok(Some(CleanedStream { user, subfile: own, samples, scale, bits: subfile_bits }))
}

/// Nearest-symbol detection of a cleaned stream.
pub fn detect(stream: &CleanedStream) -> Vec<bool> {
    let mut bits = Vec::with_capacity(stream.bits + 1);
    for &z in &stream.samples {
        let (b0, b1) = slice(z / stream.scale);
        bits.push(b0);
        bits.push(b1);
    }
    bits.truncate(stream.bits);
    bits
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserDecode {
    pub user: u32,
    pub file: u32,
    pub decoded: Vec<bool>,
    pub bit_errors: usize,
}

/// Stitches detected and cached subfiles into `Ŵ_{d_i}` in layout order.
/// Subfiles that were neither cached nor delivered count as all-wrong.
pub fn detect_and_reassemble(
    cleaned: &[CleanedStream],
    config: &NetworkConfig,
    demand: &Demand,
    layout: &Subpacketization,
    library: &Library,
    caches: &BTreeMap<u32, UserCache>,
) -> Vec<UserDecode> {
    let mut delivered: BTreeMap<(u32, SubfileIndex), Vec<bool>> = BTreeMap::new();
    for c in cleaned {
        delivered.insert((c.user, c.subfile), detect(c));
    }
    (1..=config.users())
        .map(|user| {
            let file = demand.file_of(user);
            let mut decoded = Vec::with_capacity(library.file_bits());
            for &tau in layout.taus() {
                let idx = SubfileIndex { file, tau };
                match caches[&user].get(&idx).or(delivered.get(&(user, idx)).map(Vec::as_slice)) {
                    Some(bits) => decoded.extend_from_slice(bits),
                    None => decoded.extend(layout.extract(library, idx).iter().map(|b| !b)),
                }
            }
            let bit_errors = decoded.iter().zip(library.file(file)).filter(|(a, b)| a != b).count();
            UserDecode { user, file, decoded, bit_errors }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub rounds: usize,
    pub users: Vec<UserDecode>,
}

impl LinkReport {
    pub fn bit_errors(&self) -> usize {
        self.users.iter().map(|u| u.bit_errors).sum()
    }
}

/// Placement, every delivery round over the channel, cancellation,
/// detection and reassembly for one channel and precoder draw.
#[allow(clippy::too_many_arguments)]
pub fn run_link<R: Rng + ?Sized>(
    config: &NetworkConfig,
    demand: &Demand,
    library: &Library,
    channel: &ChannelRealization,
    precoders: &PrecoderSet,
    power: f64,
    noise_var: f64,
    rng: &mut R,
) -> PhyResult<LinkReport> {
    let layout = Subpacketization::new(config, library.file_bits())?;
    let assignment = build_cache_assignment(config)?;
    let caches: BTreeMap<u32, UserCache> = (1..=config.users())
        .map(|u| (u, assignment.materialize(u, library, &layout)))
        .collect();
    let schedule = build_schedule(config, demand, &assignment)?;
    let gains = EffectiveGains::new(channel, precoders);

    let mut cleaned = Vec::new();
    for round in &schedule {
        let rx = transmit_round(round, &layout, library, channel, precoders, power, noise_var, rng)?;
        for (&u, y) in &rx.signals {
            let c = cache_cancel(y, u, config, round, &gains, &caches[&u], power, layout.subfile_bits())?;
            cleaned.extend(c);
        }
    }
    let users = detect_and_reassemble(&cleaned, config, demand, &layout, library, &caches);
    Ok(LinkReport { rounds: schedule.len(), users })
}

/// `N` files of `file_bits` uniform bits.
pub fn random_library<R: Rng + ?Sized>(files: u32, file_bits: usize, rng: &mut R) -> Library {
    let files = (0..files).map(|_| (0..file_bits).map(|_| rng.random::<bool>()).collect()).collect();
    Library::new(files).expect("files share one length")
}
