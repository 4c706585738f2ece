//! Achievable rates from post-cancellation SINR and high-SNR slope fitting.

use pncache_core::delivery::{build_schedule, TransmissionRound};
use pncache_core::placement::build_cache_assignment;
use pncache_core::{Demand, NetworkConfig};

use super::channel::sample_channel_with;
use super::link::{stream_amplitudes, EffectiveGains};
use super::precoder::make_precoders;
use super::{trial_rng, Purpose};
use crate::error::{PhyError, PhyResult};

/// Receiver noise variance; SNR is swept through the transmit power.
pub const NOISE_VAR: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub p_db: f64,
    /// Bits per symbol slot, indexed by user − 1.
    pub user_rates: Vec<f64>,
    pub sum_rate: f64,
    pub trials: usize,
    pub seed: u64,
}

impl RatePoint {
    pub fn power(&self) -> f64 {
        db_to_linear(self.p_db)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `log2(1 + SINR)` of every served user in one round. Cached terms are
/// removed exactly; what remains beyond the payload is the zero-forcing
/// leakage at users the stream is nulled for.
pub fn round_rates(
    config: &NetworkConfig,
    round: &TransmissionRound,
    gains: &EffectiveGains,
    power: f64,
    noise_var: f64,
) -> Vec<(u32, f64)> {
    let amps = stream_amplitudes(round, power);
    round
        .served()
        .iter()
        .map(|&u| {
            let mut signal = 0.0;
            let mut residual = 0.0;
            for (s, &a) in round.streams().iter().zip(&amps) {
                let g2 = gains.get(u, s.tag).norm_sqr() * a * a;
                if round.nulled_at(config, s, u) {
                    residual += g2 * s.subfiles.len() as f64;
                } else if s.subfiles.iter().any(|p| p.user == u) {
                    signal += g2;
                }
            }
            (u, (1.0 + signal / (residual + noise_var)).log2())
        })
        .collect()
}

/// Per-user and sum rates on a power grid. Every round spans the same number
/// of symbol slots, so rates are averaged over rounds (users idle in a round
/// contribute zero), then over independent channel and precoder draws.
pub fn measure_rates(
    config: &NetworkConfig,
    demand: &Demand,
    p_db: &[f64],
    trials: usize,
    seed: u64,
    delta: (f64, f64),
) -> PhyResult<Vec<RatePoint>> {
    let assignment = build_cache_assignment(config)?;
    let schedule = build_schedule(config, demand, &assignment)?;
    let k = config.users() as usize;
    let mut totals = vec![vec![0.0; k]; p_db.len()];

    for trial in 0..trials as u64 {
        let channel = sample_channel_with(config, &mut trial_rng(seed, trial, Purpose::Channel), delta.0, delta.1)?;
        let precoders = make_precoders(&channel.csit(config), &mut trial_rng(seed, trial, Purpose::Precoder))?;
        let gains = EffectiveGains::new(&channel, &precoders);
        for (pi, &db) in p_db.iter().enumerate() {
            let power = db_to_linear(db);
            for round in &schedule {
                for (u, r) in round_rates(config, round, &gains, power, NOISE_VAR) {
                    totals[pi][u as usize - 1] += r;
                }
            }
        }
    }

    let norm = (trials.max(1) * schedule.len().max(1)) as f64;
    Ok(p_db
        .iter()
        .zip(totals)
        .map(|(&db, t)| {
            let user_rates: Vec<f64> = t.into_iter().map(|x| x / norm).collect();
            RatePoint { p_db: db, sum_rate: user_rates.iter().sum(), user_rates, trials, seed }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation from the fitted line.
    pub residual: f64,
}

/// Least-squares fit of sum rate against `log2 P`.
pub fn fit_dof_slope(points: &[RatePoint]) -> PhyResult<SlopeFit> {
    let lo = points.iter().map(|p| p.p_db).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.p_db).fold(f64::NEG_INFINITY, f64::max);
    let span_db = if points.is_empty() { 0.0 } else { hi - lo };
    if points.len() < 3 || span_db < 20.0 {
        return Err(PhyError::InsufficientSpan { points: points.len(), span_db });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.power().log2()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.sum_rate).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(SlopeFit { slope, intercept, residual: (sse / n).sqrt() })
}

/// `lo, lo + step, …` up to and including `hi` (within half a step).
pub fn db_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if step.is_nan() || step <= 0.0 || hi < lo {
        return Vec::new();
    }
    let n = ((hi - lo) / step + 0.5).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use pncache_core::rational::q;

    fn synthetic(slope: f64, c: f64, dbs: &[f64]) -> Vec<RatePoint> {
        dbs.iter()
            .map(|&db| RatePoint {
                p_db: db,
                user_rates: vec![],
                sum_rate: slope * db_to_linear(db).log2() + c,
                trials: 1,
                seed: 0,
            })
            .collect()
    }

    #[test]
    fn exact_line_recovered() {
        let fit = fit_dof_slope(&synthetic(2.5, -1.0, &[20.0, 30.0, 40.0, 50.0])).unwrap();
        assert!((fit.slope - 2.5).abs() < 1e-12);
        assert!((fit.intercept + 1.0).abs() < 1e-9);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn span_requirements() {
        assert!(matches!(
            fit_dof_slope(&synthetic(1.0, 0.0, &[20.0, 40.0])),
            Err(PhyError::InsufficientSpan { points: 2, .. })
        ));
        assert!(fit_dof_slope(&synthetic(1.0, 0.0, &[20.0, 25.0, 35.0])).is_err());
        assert!(fit_dof_slope(&[]).is_err());
    }

    #[test]
    fn grid_endpoints() {
        assert_eq!(db_grid(20.0, 50.0, 5.0), vec![20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0]);
        assert!(db_grid(1.0, 0.0, 1.0).is_empty());
    }

    #[test]
    fn rates_non_negative_and_deterministic() {
        let c = NetworkConfig::new(5, 2, 2, 5, q(1, 4)).unwrap();
        let d = Demand::worst_case(&c);
        let a = measure_rates(&c, &d, &[0.0, 10.0], 5, 9, (0.1, 10.0)).unwrap();
        let b = measure_rates(&c, &d, &[0.0, 10.0], 5, 9, (0.1, 10.0)).unwrap();
        assert_eq!(a, b);
        for p in &a {
            assert!(p.user_rates.iter().all(|&r| r >= 0.0));
            assert!((p.user_rates.iter().sum::<f64>() - p.sum_rate).abs() < 1e-12);
        }
        assert!(a[1].sum_rate > a[0].sum_rate);
    }

    #[test]
    fn zf_stream_sinr_is_gain_times_power() {
        let c = NetworkConfig::new(5, 2, 2, 5, q(1, 4)).unwrap();
        let assignment = build_cache_assignment(&c).unwrap();
        let schedule = build_schedule(&c, &Demand::worst_case(&c), &assignment).unwrap();
        let channel = sample_channel_with(&c, &mut trial_rng(1, 0, Purpose::Channel), 0.1, 10.0).unwrap();
        let precoders = make_precoders(&channel.csit(&c), &mut trial_rng(1, 0, Purpose::Precoder)).unwrap();
        let gains = EffectiveGains::new(&channel, &precoders);
        let round = schedule.iter().find(|r| r.contains_shared()).unwrap();
        let p = 1000.0;
        let rates = round_rates(&c, round, &gains, p, NOISE_VAR);
        let (u, r) = rates.into_iter().find(|(u, _)| c.is_perfect(*u)).unwrap();
        let g = channel.gain(u, &precoders.zf[&u]).norm_sqr();
        let sinr = g * p / 3.0 / NOISE_VAR;
        assert!((r - (1.0 + sinr).log2()).abs() < 1e-6);
    }
}
