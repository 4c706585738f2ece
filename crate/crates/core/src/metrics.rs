//! Closed-form normalized delivery time (NDT) and DoF expressions, evaluated
//! in exact rational arithmetic.
//!
//! At an integer point `t = Λγ` the scheme's NDT is `(Λ − t)/(1 + t)`; other
//! cache sizes take the lower convex envelope of those corners (memory
//! sharing). With `Λ = K_F + 1` cache states the `K`-user hybrid-CSIT system
//! behaves like a single-antenna system with `K_F + 1` users.

use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::rational::{int, min, pow, Q};
use crate::subsets::binomial;

/// NDT of a configuration together with the corners it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NdtResult {
    pub value: Q,
    /// Envelope value before the cap.
    pub envelope: Q,
    /// `(t, NDT_t)` for `t = 0, …, Λ`.
    pub corner_points: Vec<(u32, Q)>,
    /// Whether the `K(1−γ)` cap was active.
    pub capped: bool,
}

/// `(Λ − t)/(1 + t)`.
pub fn corner_ndt(lambda: u32, t: u32) -> Q {
    debug_assert!(t <= lambda);
    Q::new(i128::from(lambda) - i128::from(t), 1 + i128::from(t))
}

/// Corners `(t, (Λ − t)/(1 + t))` for `t = 0, …, Λ`.
pub fn corner_points(lambda: u32) -> Vec<(u32, Q)> {
    (0..=lambda).map(|t| (t, corner_ndt(lambda, t))).collect()
}

/// Value at `x` of the lower convex envelope of `corners`.
///
/// Corners need not be sorted or convex; the lower hull is built first and
/// `x` is interpolated on it. Fails when `x` lies outside the corners' span.
pub fn lower_convex_envelope(corners: &[(u32, Q)], x: Q) -> Result<Q> {
    let mut pts: Vec<(Q, Q)> = corners.iter().map(|&(t, v)| (int(t.into()), v)).collect();
    pts.sort();
    // Keep the lowest value for repeated abscissae.
    pts.dedup_by(|later, earlier| later.0 == earlier.0);
    let (first, last) = match (pts.first(), pts.last()) {
        (Some(f), Some(l)) => (f.0, l.0),
        _ => return Err(Error::Domain("no corner points")),
    };
    if x < first || x > last {
        return Err(Error::Domain("query outside the corner range"));
    }

    let mut hull: Vec<(Q, Q)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b unless it lies strictly below segment a–p.
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross.is_positive() {
                break;
            }
            hull.pop();
        }
        hull.push(p);
    }

    for w in hull.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x >= x0 && x <= x1 {
            return Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0));
        }
    }
    Ok(hull[0].1)
}

/// `NDT_u(K, 1, γ, 0)`: the single-antenna `K`-user NDT with uncoded placement.
/// Zero users gives zero.
pub fn ndt_single_antenna(users: u32, gamma: Q) -> Q {
    if users == 0 {
        return Q::zero();
    }
    lower_convex_envelope(&corner_points(users), gamma * int(users.into()))
        .expect("γ ∈ [0,1] keeps Kγ inside [0, K]")
}

/// Optimal NDT under uncoded placement for `K_P ≤ L`: the envelope over the
/// `Λ = K_F + 1` corners at `x = Λγ`, capped by `K(1−γ)`.
pub fn ndt_uncoded(config: &NetworkConfig) -> Result<NdtResult> {
    if config.perfect_users() > config.antennas() {
        return Err(Error::Regime {
            perfect_users: config.perfect_users(),
            antennas: config.antennas(),
        });
    }
    let lambda = config.cache_states();
    let corner_points = corner_points(lambda);
    let envelope = lower_convex_envelope(&corner_points, config.gamma() * int(lambda.into()))?;
    let cap = int(config.users().into()) * (Q::one() - config.gamma());
    Ok(NdtResult { value: min(cap, envelope), envelope, corner_points, capped: cap < envelope })
}

/// `(1 + t) + (K_P − 1)(t + 1)/Λ`.
pub fn dof_scheme(lambda: u32, t: u32, perfect_users: u32) -> Result<Q> {
    if perfect_users == 0 {
        return Err(Error::Domain("dof_scheme needs K_P ≥ 1"));
    }
    if t > lambda || lambda == 0 {
        return Err(Error::Domain("t must lie in [0, Λ]"));
    }
    let t = int(t.into());
    Ok((Q::one() + t) + int(i128::from(perfect_users) - 1) * (t + Q::one()) / int(lambda.into()))
}

/// Same quantity as [`dof_scheme`], counted round by round:
/// `[C(Λ−1,t)(t+K_P) + (C(Λ,t+1) − C(Λ−1,t))(t+1)] / C(Λ,t+1)`.
pub fn dof_weighted_count(lambda: u32, t: u32, perfect_users: u32) -> Result<Q> {
    let all = binomial(lambda, t + 1);
    if all == 0 {
        return Err(Error::Domain("no rounds at t = Λ"));
    }
    let with_shared = binomial(lambda - 1, t);
    let served = with_shared as i128 * (i128::from(t) + i128::from(perfect_users))
        + (all - with_shared) as i128 * (i128::from(t) + 1);
    Ok(int(served) / int(all as i128))
}

/// `1 + Kγ + (K_P − 1)/(K − K_P + 1)`, the DoF at an integer point in
/// terms of the original parameters.
pub fn dof_closed_form(config: &NetworkConfig) -> Result<Q> {
    if config.perfect_users() == 0 {
        return Err(Error::Domain("closed form needs K_P ≥ 1"));
    }
    let k = int(config.users().into());
    Ok(Q::one()
        + k * config.gamma()
        + int(i128::from(config.perfect_users()) - 1) / int(config.lambda().into()))
}

/// DoF delivered by the scheme at an integer point. With no perfect-CSIT
/// users every round serves `t + 1` users.
pub fn scheme_dof(config: &NetworkConfig) -> Result<Q> {
    let t = config.require_integer_t()?;
    match config.perfect_users() {
        0 => Ok(int(i128::from(t) + 1)),
        kp => dof_scheme(config.cache_states(), t, kp),
    }
}

/// `K(1 − γ)/DoF`.
pub fn ndt_from_dof(users: u32, gamma: Q, dof: Q) -> Result<Q> {
    if !dof.is_positive() {
        return Err(Error::Domain("DoF must be positive"));
    }
    Ok(int(users.into()) * (Q::one() - gamma) / dof)
}

/// NDT when the `K_F` finite-precision users and the perfect-CSIT users are
/// served in separate phases: `Conv(K_F(1−γ)/(1+K_Fγ)) + (1 − γ)`.
pub fn ndt_separate(finite_users: u32, gamma: Q) -> Q {
    ndt_single_antenna(finite_users, gamma) + (Q::one() - gamma)
}

/// `K_F(1−γ)/(1+K_Fγ) + (1 − γ)` evaluated pointwise, without the envelope.
/// Agrees with [`ndt_separate`] at integer `K_Fγ` and lies below it elsewhere.
pub fn ndt_separate_formula(finite_users: u32, gamma: Q) -> Q {
    let kf = int(finite_users.into());
    kf * (Q::one() - gamma) / (Q::one() + kf * gamma) + (Q::one() - gamma)
}

/// Decentralized uncoded placement: `(1/γ − 1)(1 − (1 − γ)^K)`, and `K` at `γ = 0`.
pub fn ndt_decentralized(users: u32, gamma: Q) -> Q {
    if gamma.is_zero() {
        return int(users.into());
    }
    (gamma.recip() - Q::one()) * (Q::one() - pow(Q::one() - gamma, users))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn cfg(k: u32, l: u32, kp: u32, g: Q) -> NetworkConfig {
        NetworkConfig::new(k, l, kp, k.max(1), g).unwrap()
    }

    #[test]
    fn corners() {
        assert_eq!(corner_ndt(4, 1), q(3, 2));
        assert_eq!(corner_ndt(4, 4), q(0, 1));
        assert_eq!(corner_ndt(4, 0), q(4, 1));
    }

    #[test]
    fn envelope_examples() {
        let c = corner_points(4);
        assert_eq!(
            c.iter().map(|p| p.1).collect::<Vec<_>>(),
            [q(4, 1), q(3, 2), q(2, 3), q(1, 4), q(0, 1)]
        );
        assert_eq!(lower_convex_envelope(&c, q(1, 1)).unwrap(), q(3, 2));
        assert_eq!(lower_convex_envelope(&c, q(3, 2)).unwrap(), q(13, 12));
        assert_eq!(lower_convex_envelope(&c, q(0, 1)).unwrap(), q(4, 1));
        assert!(lower_convex_envelope(&c, q(5, 1)).is_err());
        assert!(lower_convex_envelope(&[], q(0, 1)).is_err());
    }

    #[test]
    fn envelope_skips_nonconvex_corner() {
        // (1, 3) sits above the chord from (0, 2) to (2, 0).
        let pts = [(0, q(2, 1)), (1, q(3, 1)), (2, q(0, 1))];
        assert_eq!(lower_convex_envelope(&pts, q(1, 1)).unwrap(), q(1, 1));
    }

    #[test]
    fn reference_instance() {
        let r = ndt_uncoded(&cfg(5, 2, 2, q(1, 4))).unwrap();
        assert_eq!(r.value, q(3, 2));
        assert!(!r.capped);
        assert_eq!(ndt_uncoded(&cfg(5, 2, 2, q(1, 1))).unwrap().value, q(0, 1));
    }

    #[test]
    fn single_perfect_user_collapses() {
        for i in 0..=20 {
            let g = q(i, 20);
            let hybrid = ndt_uncoded(&cfg(5, 2, 1, g)).unwrap().value;
            let siso = ndt_uncoded(&cfg(5, 1, 0, g)).unwrap().value;
            assert_eq!(hybrid, siso, "γ = {g}");
        }
    }

    #[test]
    fn dof_examples() {
        assert_eq!(dof_scheme(4, 1, 2).unwrap(), q(5, 2));
        assert_eq!(dof_weighted_count(4, 1, 2).unwrap(), q(5, 2));
        assert_eq!(dof_closed_form(&cfg(5, 2, 2, q(1, 4))).unwrap(), q(5, 2));
        assert_eq!(dof_scheme(4, 2, 1).unwrap(), q(3, 1));
        assert_eq!(dof_scheme(5, 2, 3).unwrap(), q(21, 5));
        assert_eq!(dof_weighted_count(5, 2, 3).unwrap(), q(21, 5));
        assert!(dof_scheme(4, 1, 0).is_err());
    }

    #[test]
    fn ndt_from_dof_examples() {
        assert_eq!(ndt_from_dof(5, q(1, 4), q(5, 2)).unwrap(), q(3, 2));
        assert_eq!(ndt_from_dof(5, q(1, 1), q(5, 2)).unwrap(), q(0, 1));
        assert_eq!(ndt_from_dof(4, q(0, 1), q(1, 1)).unwrap(), q(4, 1));
        assert!(ndt_from_dof(4, q(0, 1), q(0, 1)).is_err());
    }

    #[test]
    fn separate_examples() {
        assert_eq!(ndt_separate_formula(3, q(1, 4)), q(57, 28));
        // K_Fγ = 3/4 sits between corners 3 and 1.
        assert_eq!(ndt_separate(3, q(1, 4)), q(9, 4));
        assert_eq!(ndt_separate(3, q(1, 3)), ndt_separate_formula(3, q(1, 3)));
        assert_eq!(ndt_separate(3, q(1, 1)), q(0, 1));
        assert_eq!(ndt_separate_formula(0, q(0, 1)), q(1, 1));
        assert_eq!(ndt_separate(0, q(0, 1)), q(1, 1));
    }

    #[test]
    fn decentralized_examples() {
        assert_eq!(ndt_decentralized(4, q(1, 4)), q(525, 256));
        assert_eq!(ndt_decentralized(4, q(1, 1)), q(0, 1));
        assert_eq!(ndt_decentralized(1, q(1, 2)), q(1, 2));
        assert_eq!(ndt_decentralized(7, q(0, 1)), q(7, 1));
    }

    #[test]
    fn regime_error() {
        // Config validation already rejects K_P > L, so ndt_uncoded never sees it.
        assert!(NetworkConfig::new(5, 1, 2, 5, q(0, 1)).is_err());
    }
}
