//! Converse side: a lower bound on the NDT under arbitrary (possibly coded)
//! placement, maximized over its free parameters `(s, α)`, and the check that
//! the achievable NDT is within a factor 2.00884 of it.
//!
//! For `s ∈ [min(N, K)]` and `α ∈ [0, 1]`, with `ℓ` the smallest element of
//! `[s]` such that `(s(s−1) − ℓ(ℓ−1))/2 + αs ≤ (N − ℓ + 1)ℓ`,
//!
//! ```text
//! NDT ≥ s − 1 − α − (s(s−1) − ℓ(ℓ−1) + 2αs)·M / D
//! ```
//!
//! where `D = 2(N − ℓ + 1)` ([`DenomVariant::Plus`], the default) or
//! `D = 2(N − ℓ − 1)` ([`DenomVariant::Minus`]).

use num_traits::{One, Signed, Zero};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::metrics::{ndt_decentralized, ndt_single_antenna};
use crate::rational::{int, q, Q};

/// Multiplicative gap between the achievable NDT and the converse.
pub fn gap_factor() -> Q {
    q(200_884, 100_000)
}

/// Tolerance on the gap ratio check, `10⁻⁶` relative.
pub fn gap_tolerance() -> Q {
    q(1, 1_000_000)
}

pub const DEFAULT_ALPHA_GRID: u32 = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DenomVariant {
    /// `2(N − ℓ − 1)`
    Minus,
    /// `2(N − ℓ + 1)`
    #[default]
    Plus,
}

impl DenomVariant {
    pub fn name(self) -> &'static str {
        match self {
            DenomVariant::Minus => "minus",
            DenomVariant::Plus => "plus",
        }
    }

    fn denominator(self, n: u32, ell: u32) -> i128 {
        let (n, ell) = (i128::from(n), i128::from(ell));
        match self {
            DenomVariant::Minus => 2 * (n - ell - 1),
            DenomVariant::Plus => 2 * (n - ell + 1),
        }
    }
}

impl core::str::FromStr for DenomVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minus" => Ok(DenomVariant::Minus),
            "plus" => Ok(DenomVariant::Plus),
            _ => Err(Error::Domain("variant must be plus or minus")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundParams {
    pub s: u32,
    pub alpha: Q,
    pub ell: u32,
    pub variant: DenomVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundResult {
    pub value: Q,
    /// `None` when no evaluated point was non-negative.
    pub attained_at: Option<BoundParams>,
}

fn s_terms(s: u32, ell: u32) -> i128 {
    let (s, ell) = (i128::from(s), i128::from(ell));
    s * (s - 1) - ell * (ell - 1)
}

fn ell_condition(s: u32, alpha: Q, n: u32, ell: u32) -> bool {
    q(s_terms(s, ell), 2) + alpha * int(s.into())
        <= int((i128::from(n) - i128::from(ell) + 1) * i128::from(ell))
}

/// Smallest `ℓ ∈ [s]` satisfying the minimality condition.
pub fn ell_min(s: u32, alpha: Q, n: u32) -> Result<u32> {
    if s == 0 || n < s {
        return Err(Error::Domain("need 1 ≤ s ≤ N"));
    }
    if alpha.is_negative() || alpha > Q::one() {
        return Err(Error::Domain("α must lie in [0, 1]"));
    }
    (1..=s).find(|&ell| ell_condition(s, alpha, n, ell)).ok_or(Error::NoFeasibleEll { s })
}

/// Evaluates the bound at `params` for library size `n` and memory `m`.
pub fn lemma3_bound(params: &BoundParams, n: u32, m: Q) -> Result<Q> {
    let d = params.variant.denominator(n, params.ell);
    if d <= 0 {
        return Err(Error::DegenerateDenominator { ell: params.ell, n });
    }
    let s = int(params.s.into());
    Ok(s - Q::one() - params.alpha
        - (int(s_terms(params.s, params.ell)) + int(2) * params.alpha * s) * m / int(d))
}

/// Maximum of [`lemma3_bound`] over `s ∈ [min(N, K)]` and the uniform grid
/// `α ∈ {0, 1/(g−1), …, 1}`, with `ℓ` from [`ell_min`]. Points with a
/// non-positive denominator are skipped; ties keep the first point in
/// `(s, α)` order. The result is clamped below at 0.
pub fn best_lower_bound(n: u32, k: u32, m: Q, alpha_grid: u32, variant: DenomVariant) -> BoundResult {
    let g = alpha_grid.max(2);
    let mut best: Option<(Q, BoundParams)> = None;
    for s in 1..=n.min(k) {
        for i in 0..g {
            let alpha = q(i.into(), i128::from(g - 1));
            let Ok(ell) = ell_min(s, alpha, n) else { continue };
            let params = BoundParams { s, alpha, ell, variant };
            let Ok(value) = lemma3_bound(&params, n, m) else { continue };
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, params));
            }
        }
    }
    match best {
        Some((value, params)) if !value.is_negative() => {
            BoundResult { value, attained_at: Some(params) }
        }
        _ => BoundResult { value: Q::zero(), attained_at: None },
    }
}

/// Exact supremum over continuous `α ∈ [0, 1]` (and `s ∈ [min(N, K)]`),
/// clamped below at 0.
///
/// For fixed `s`, `ℓ_min(α)` is piecewise constant and the bound is linear
/// in `α` on each piece, so the supremum sits at a piece endpoint. The left
/// endpoint of a piece may be open; its value is then a limit, not attained.
pub fn lemma3_supremum(n: u32, k: u32, m: Q, variant: DenomVariant) -> Q {
    let mut sup = Q::zero();
    for s in 1..=n.min(k) {
        let s_q = int(s.into());
        // Largest α for which ℓ satisfies the condition.
        let threshold = |ell: u32| {
            (int((i128::from(n) - i128::from(ell) + 1) * i128::from(ell)) - q(s_terms(s, ell), 2))
                / s_q
        };
        let mut lo: Option<Q> = None; // max threshold of smaller ℓ; None = −∞
        for ell in 1..=s {
            let hi = threshold(ell);
            let left = lo.map_or(Q::zero(), |l| l.max(Q::zero()));
            let right = hi.min(Q::one());
            let nonempty = match lo {
                Some(l) if !l.is_negative() => l < right,
                _ => !right.is_negative(),
            };
            let d = variant.denominator(n, ell);
            if nonempty && d > 0 {
                let f = |alpha: Q| {
                    s_q - Q::one() - alpha
                        - (int(s_terms(s, ell)) + int(2) * alpha * s_q) * m / int(d)
                };
                sup = sup.max(f(left)).max(f(right));
            }
            lo = Some(lo.map_or(hi, |l| l.max(hi)));
        }
    }
    sup
}

/// Outcome of the factor-2.00884 check for one configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapReport {
    /// `NDT_u(K_F+1, 1, γ, 0)`
    pub ndt: Q,
    pub bound: BoundResult,
    /// `NDT_{u,dec}(K_F+1, 1, γ, 0)`
    pub decentralized: Q,
    /// `ndt / bound`; `None` when the bound is 0.
    pub ratio: Option<Q>,
    pub ratio_ok: bool,
    /// `bound ≥ decentralized / 2.00884` and `ndt ≤ decentralized`.
    pub chain_ok: bool,
}

impl GapReport {
    pub fn pass(&self) -> bool {
        self.ratio_ok && self.chain_ok
    }
}

/// Compares the achievable NDT of `config` with the best lower bound for a
/// `K_F + 1`-user system with the same `N` and `M`.
pub fn gap_check(config: &NetworkConfig, alpha_grid: u32, variant: DenomVariant) -> GapReport {
    let users = config.cache_states();
    let gamma = config.gamma();
    let ndt = ndt_single_antenna(users, gamma);
    let bound = best_lower_bound(config.files(), users, config.memory(), alpha_grid, variant);
    let decentralized = ndt_decentralized(users, gamma);
    let factor = gap_factor();
    let ratio = bound.value.is_positive().then(|| ndt / bound.value);
    let ratio_ok = ndt.is_zero()
        || ratio.is_some_and(|r| r <= factor * (Q::one() + gap_tolerance()));
    let chain_ok = bound.value >= decentralized / factor && ndt <= decentralized;
    GapReport { ndt, bound, decentralized, ratio, ratio_ok, chain_ok }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ell_examples() {
        assert_eq!(ell_min(2, Q::zero(), 4), Ok(1));
        assert_eq!(ell_min(4, Q::zero(), 4), Ok(2));
        for n in 1..6 {
            assert_eq!(ell_min(1, Q::one(), n), Ok(1));
        }
        assert!(ell_min(5, Q::zero(), 4).is_err());
        assert!(ell_min(2, q(3, 2), 4).is_err());
    }

    #[test]
    fn bound_examples() {
        let p = |s, ell, variant| BoundParams { s, alpha: Q::zero(), ell, variant };
        assert_eq!(lemma3_bound(&p(2, 1, DenomVariant::Minus), 4, int(1)), Ok(q(1, 2)));
        assert_eq!(lemma3_bound(&p(3, 1, DenomVariant::Plus), 4, int(1)), Ok(q(5, 4)));
        for n in 3..8 {
            for m in 0..=n {
                for v in [DenomVariant::Minus, DenomVariant::Plus] {
                    assert_eq!(lemma3_bound(&p(1, 1, v), n, int(m.into())), Ok(Q::zero()));
                }
            }
        }
        assert_eq!(
            lemma3_bound(&p(3, 3, DenomVariant::Minus), 4, int(1)),
            Err(Error::DegenerateDenominator { ell: 3, n: 4 })
        );
    }

    #[test]
    fn best_bound_examples() {
        let r = best_lower_bound(4, 4, int(1), DEFAULT_ALPHA_GRID, DenomVariant::Plus);
        assert_eq!(r.value, q(4, 3));
        assert_eq!(
            r.attained_at,
            Some(BoundParams { s: 4, alpha: Q::zero(), ell: 2, variant: DenomVariant::Plus })
        );

        let r = best_lower_bound(4, 4, int(4), DEFAULT_ALPHA_GRID, DenomVariant::Plus);
        assert_eq!(r.value, Q::zero());
        assert_eq!(r.attained_at.map(|p| p.s), Some(1));

        let r = best_lower_bound(4, 4, int(1), DEFAULT_ALPHA_GRID, DenomVariant::Minus);
        assert_eq!(r.value, q(1, 2));
        let p = r.attained_at.unwrap();
        assert_eq!((p.s, p.alpha), (2, Q::zero()));
    }

    #[test]
    fn gap_anchor() {
        let c = NetworkConfig::new(4, 1, 1, 4, q(1, 4)).unwrap();
        let g = gap_check(&c, DEFAULT_ALPHA_GRID, DenomVariant::Plus);
        assert_eq!(g.ndt, q(3, 2));
        assert_eq!(g.bound.value, q(4, 3));
        assert_eq!(g.decentralized, q(525, 256));
        assert_eq!(g.ratio, Some(q(9, 8)));
        assert!(g.pass());

        let full = NetworkConfig::new(4, 1, 1, 4, Q::one()).unwrap();
        assert!(gap_check(&full, DEFAULT_ALPHA_GRID, DenomVariant::Plus).pass());
    }

    #[test]
    fn minus_variant_breaks_chain_on_anchor() {
        let c = NetworkConfig::new(4, 1, 1, 4, q(1, 4)).unwrap();
        let g = gap_check(&c, DEFAULT_ALPHA_GRID, DenomVariant::Minus);
        assert_eq!(g.bound.value, q(1, 2));
        assert!(!g.chain_ok);
    }

    #[test]
    fn variant_parse() {
        assert_eq!("plus".parse::<DenomVariant>(), Ok(DenomVariant::Plus));
        assert_eq!("minus".parse::<DenomVariant>(), Ok(DenomVariant::Minus));
        assert!("x".parse::<DenomVariant>().is_err());
    }
}
