//! Precoders built from transmitter-side channel knowledge only.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pncache_core::delivery::PrecoderTag;
use rand::Rng;

use super::channel::TransmitterCsi;
use crate::error::{PhyError, PhyResult};

/// Relative singular-value floor below which the constraint rows are
/// treated as linearly dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Zero-forcing residual tolerance relative to `‖h_i‖`.
pub const ZF_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub v0: DVector<Complex64>,
    pub zf: BTreeMap<u32, DVector<Complex64>>,
}

impl PrecoderSet {
    pub fn vector(&self, tag: PrecoderTag) -> &DVector<Complex64> {
        match tag {
            PrecoderTag::Broadcast => &self.v0,
            PrecoderTag::ZeroForcing { target } => &self.zf[&target],
        }
    }
}

/// Isotropic unit vector: normalized `CN(0, I)`.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> DVector<Complex64> {
    let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
    loop {
        let v = DVector::from_fn(len, |_, _| {
            Complex64::new(rng.sample(normal), rng.sample(normal))
        });
        let n = v.norm();
        if n > 1e-6 {
            return v.unscale(n);
        }
    }
}

/// Unit vector in the null space of every perfect-CSIT row except `p`'s,
/// chosen as the normalized projection of `conj(h_p)` onto that null space.
/// With no constraints (one perfect user) a random unit vector is returned.
pub fn make_zf_precoder<R: Rng + ?Sized>(
    csi: &TransmitterCsi,
    p: u32,
    rng: &mut R,
) -> PhyResult<DVector<Complex64>> {
    let others: Vec<&DVector<Complex64>> =
        csi.users().filter(|&u| u != p).map(|u| csi.row(u).unwrap()).collect();
    if others.is_empty() {
        return Ok(random_unit_vector(rng, csi.antennas()));
    }
    let degenerate = PhyError::DegenerateChannel { target: p };
    let l = csi.antennas();
    if others.len() >= l {
        return Err(degenerate);
    }
    let a = DMatrix::from_fn(others.len(), l, |i, j| others[i][j]);
    let sv = a.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if smax == 0.0 || smin / smax < RANK_TOLERANCE {
        return Err(degenerate);
    }
    let gram_inv = (&a * a.adjoint()).try_inverse().ok_or(PhyError::DegenerateChannel { target: p })?;
    let project = |u: &DVector<Complex64>| u - a.adjoint() * (&gram_inv * (&a * u));

    let hp = csi.row(p).ok_or(PhyError::DegenerateChannel { target: p })?;
    let seed = hp.map(|z| z.conj());
    // A second pass removes the rounding left by the first.
    let v = project(&project(&seed));
    let n = v.norm();
    if n <= RANK_TOLERANCE * seed.norm() {
        return Err(degenerate);
    }
    Ok(v.unscale(n))
}

/// `v0` is drawn independently of every channel; one ZF vector per
/// perfect-CSIT user.
pub fn make_precoders<R: Rng + ?Sized>(csi: &TransmitterCsi, rng: &mut R) -> PhyResult<PrecoderSet> {
    let v0 = random_unit_vector(rng, csi.antennas());
    let users: Vec<u32> = csi.users().collect();
    let zf = users
        .into_iter()
        .map(|p| make_zf_precoder(csi, p, rng).map(|v| (p, v)))
        .collect::<PhyResult<_>>()?;
    Ok(PrecoderSet { v0, zf })
}

/// Largest `|⟨h_i, v_p⟩| / ‖h_i‖` over perfect users `i ≠ p`.
pub fn zf_residual(csi: &TransmitterCsi, precoders: &PrecoderSet) -> f64 {
    let mut worst: f64 = 0.0;
    for (&p, v) in &precoders.zf {
        for i in csi.users().filter(|&i| i != p) {
            let h = csi.row(i).unwrap();
            worst = worst.max((h.transpose() * v)[(0, 0)].norm() / h.norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phylink::stream_rng;
    use nalgebra::dvector;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn two_dimensional_complement() {
        let csi = TransmitterCsi::new(
            2,
            vec![(1, dvector![c(0.3), c(-2.0)]), (2, dvector![c(1.0), c(1.0)])],
        );
        let v = make_zf_precoder(&csi, 1, &mut stream_rng(0, 0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sign = v[0].re.signum();
        assert!((v[0] - c(sign * s)).norm() < 1e-12);
        assert!((v[1] - c(-sign * s)).norm() < 1e-12);
    }

    #[test]
    fn single_perfect_user_gets_seeded_random_vector() {
        let csi = TransmitterCsi::new(3, vec![(4, dvector![c(1.0), c(2.0), c(3.0)])]);
        let a = make_zf_precoder(&csi, 4, &mut stream_rng(5, 1)).unwrap();
        let b = make_zf_precoder(&csi, 4, &mut stream_rng(5, 1)).unwrap();
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dependent_rows_are_degenerate() {
        let csi = TransmitterCsi::new(
            3,
            vec![
                (1, dvector![c(1.0), c(0.0), c(0.0)]),
                (2, dvector![c(1.0), c(2.0), c(0.0)]),
                (3, dvector![c(2.0), c(4.0), c(0.0)]),
            ],
        );
        assert!(matches!(
            make_zf_precoder(&csi, 1, &mut stream_rng(0, 0)),
            Err(PhyError::DegenerateChannel { target: 1 })
        ));
    }

    #[test]
    fn random_sets_meet_tolerance() {
        for seed in 0..50 {
            let mut rng = stream_rng(seed, 2);
            let l = 4;
            let rows = (1..=4).map(|u| (u, random_unit_vector(&mut rng, l).scale(3.0))).collect();
            let csi = TransmitterCsi::new(l, rows);
            let set = make_precoders(&csi, &mut rng).unwrap();
            assert!(zf_residual(&csi, &set) <= ZF_TOLERANCE);
            for (&p, v) in &set.zf {
                assert!((v.norm() - 1.0).abs() < 1e-12);
                let own = (csi.row(p).unwrap().transpose() * v)[(0, 0)];
                assert!(own.norm() > 1e-6);
            }
        }
    }
}
