//! Bounded-density fading channels.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pncache_core::NetworkConfig;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::stream_rng;
use crate::error::{PhyError, PhyResult};

/// Magnitude bounds used when none are given.
pub const DEFAULT_DELTA1: f64 = 0.1;
pub const DEFAULT_DELTA2: f64 = 10.0;

/// `K×L` matrix of fading coefficients with `Δ1 < |h| ≤ Δ2` entrywise.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    h: DMatrix<Complex64>,
    delta1: f64,
    delta2: f64,
}

/// One `CN(0, 1)` coefficient, redrawn until its magnitude lies in `(lo, hi]`.
pub fn sample_coefficient<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Complex64 {
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
    loop {
        let z = Complex64::new(normal.sample(rng), normal.sample(rng));
        let m = z.norm();
        if m > lo && m <= hi {
            return z;
        }
    }
}

pub fn sample_channel(
    config: &NetworkConfig,
    seed: u64,
    delta1: f64,
    delta2: f64,
) -> PhyResult<ChannelRealization> {
    sample_channel_with(config, &mut stream_rng(seed, 0), delta1, delta2)
}

pub fn sample_channel_with(
    config: &NetworkConfig,
    rng: &mut ChaCha8Rng,
    delta1: f64,
    delta2: f64,
) -> PhyResult<ChannelRealization> {
    if !(delta1 > 0.0 && delta1 < delta2 && delta2.is_finite()) {
        return Err(PhyError::Bounds { lo: delta1, hi: delta2 });
    }
    let (k, l) = (config.users() as usize, config.antennas() as usize);
    let h = DMatrix::from_fn(k, l, |_, _| sample_coefficient(rng, delta1, delta2));
    Ok(ChannelRealization { h, delta1, delta2 })
}

impl ChannelRealization {
    /// Wraps a given matrix; rejects entries outside the bounds.
    pub fn from_matrix(h: DMatrix<Complex64>, delta1: f64, delta2: f64) -> PhyResult<Self> {
        if !(delta1 > 0.0 && delta1 < delta2) || h.iter().any(|z| z.norm() <= delta1 || z.norm() > delta2) {
            return Err(PhyError::Bounds { lo: delta1, hi: delta2 });
        }
        Ok(ChannelRealization { h, delta1, delta2 })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.h
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.delta1, self.delta2)
    }

    pub fn users(&self) -> usize {
        self.h.nrows()
    }

    pub fn antennas(&self) -> usize {
        self.h.ncols()
    }

    /// `h_i` as a column vector (1-based user).
    pub fn row(&self, user: u32) -> DVector<Complex64> {
        self.h.row(user as usize - 1).transpose()
    }

    /// `⟨h_i, v⟩ = Σ_j h_{i,j} v_j`.
    pub fn gain(&self, user: u32, v: &DVector<Complex64>) -> Complex64 {
        (self.h.row(user as usize - 1) * v)[(0, 0)]
    }

    /// The only view of the channel the transmitter gets: the perfect-CSIT rows.
    pub fn csit(&self, config: &NetworkConfig) -> TransmitterCsi {
        TransmitterCsi {
            antennas: self.antennas(),
            rows: config.perfect_set().map(|p| (p, self.row(p))).collect(),
        }
    }
}

/// Channel knowledge available at the transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitterCsi {
    antennas: usize,
    rows: Vec<(u32, DVector<Complex64>)>,
}

impl TransmitterCsi {
    pub fn new(antennas: usize, rows: Vec<(u32, DVector<Complex64>)>) -> Self {
        TransmitterCsi { antennas, rows }
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn users(&self) -> impl Iterator<Item = u32> + '_ {
        self.rows.iter().map(|(u, _)| *u)
    }

    pub fn row(&self, user: u32) -> Option<&DVector<Complex64>> {
        self.rows.iter().find(|(u, _)| *u == user).map(|(_, r)| r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pncache_core::rational::q;

    fn cfg() -> NetworkConfig {
        NetworkConfig::new(5, 2, 2, 5, q(1, 4)).unwrap()
    }

    #[test]
    fn deterministic_and_bounded() {
        let a = sample_channel(&cfg(), 7, 0.1, 10.0).unwrap();
        let b = sample_channel(&cfg(), 7, 0.1, 10.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_channel(&cfg(), 8, 0.1, 10.0).unwrap());
        assert!(a.matrix().iter().all(|z| z.norm() > 0.1 && z.norm() <= 10.0));
        assert_eq!((a.users(), a.antennas()), (5, 2));
    }

    #[test]
    fn tight_bounds_respected() {
        let c = sample_channel(&cfg(), 1, 0.9, 1.1).unwrap();
        assert!(c.matrix().iter().all(|z| z.norm() > 0.9 && z.norm() <= 1.1));
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(sample_channel(&cfg(), 1, 0.0, 1.0).is_err());
        assert!(sample_channel(&cfg(), 1, 2.0, 1.0).is_err());
        assert!(sample_channel(&cfg(), 1, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn csit_exposes_only_perfect_rows() {
        let c = sample_channel(&cfg(), 3, 0.1, 10.0).unwrap();
        let csi = c.csit(&cfg());
        assert_eq!(csi.users().collect::<Vec<_>>(), vec![4, 5]);
        assert!(csi.row(1).is_none());
        assert_eq!(csi.row(5).unwrap(), &c.row(5));
    }
}
