//! Tandem (AND-rule) miss and false-alarm rates, and the priors that
//! weight them.
//!
//! A trial is accepted only when both subsystems accept it, so under
//! class-conditional independence of the two score streams the tandem rates
//! are products of the marginal subsystem rates:
//!
//! ```text
//! miss    = miss_cm + miss_asv - miss_cm * miss_asv
//! fa_non  = (1 - miss_cm) * fa_non_asv
//! fa_spf  = fa_cm * fa_spf_asv
//! ```
//!
//! The independence assumption is hard-wired here; its empirical check lives
//! in the `analysis` module. The two false-alarm rates are blended by the
//! spoof prevalence `rho` into a single total false-alarm rate, and the
//! three-class total error is the prior-weighted sum of the three rates.
//!
//! Everything in this module is a pure function of immutable inputs; rates at
//! an operating-point pair are computed lazily from the two curves rather
//! than materializing the full `(N+1) x (M+1)` table, which is impractical
//! for realistic trial counts.

use thiserror::Error;

use crate::curves::{NegClass, RateCurve};

#[derive(Error, Debug)]
pub enum PriorError {
    #[error("prior component {0} is negative")]
    Negative(f64),
    #[error("priors sum to {0}, expected 1")]
    SumNotOne(f64),
    #[error("spoof prevalence {0} outside [0, 1]")]
    RhoOutOfRange(f64),
    #[error("pi_non + pi_spoof = 0: the tandem false-alarm rate is undefined")]
    DegenerateNegatives,
}

/// Database priors `(pi_tar, pi_non, pi_spoof)` of the three tandem classes.
/// Components are nonnegative and sum to 1 (within 1e-12); the fourth
/// combination (a spoofed nontarget) has zero mass by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TandemPriors {
    pi_tar: f64,
    pi_non: f64,
    pi_spoof: f64,
}

impl TandemPriors {
    pub fn new(pi_tar: f64, pi_non: f64, pi_spoof: f64) -> Result<Self, PriorError> {
        for v in [pi_tar, pi_non, pi_spoof] {
            if v.is_nan() || v < 0.0 {
                return Err(PriorError::Negative(v));
            }
        }
        let sum = pi_tar + pi_non + pi_spoof;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(PriorError::SumNotOne(sum));
        }
        Ok(TandemPriors {
            pi_tar,
            pi_non,
            pi_spoof,
        })
    }

    pub fn pi_tar(&self) -> f64 {
        self.pi_tar
    }

    pub fn pi_non(&self) -> f64 {
        self.pi_non
    }

    pub fn pi_spoof(&self) -> f64 {
        self.pi_spoof
    }
}

/// Spoof prevalence `rho`: the proportion of spoofing attacks within the
/// negative (nontarget + spoof) class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpoofPrevalence {
    rho: f64,
}

impl SpoofPrevalence {
    pub fn new(rho: f64) -> Result<Self, PriorError> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(PriorError::RhoOutOfRange(rho));
        }
        Ok(SpoofPrevalence { rho })
    }

    pub fn value(&self) -> f64 {
        self.rho
    }
}

/// `rho = pi_spoof / (pi_non + pi_spoof)`. Errors when both negative-class
/// priors are zero.
pub fn rho_from_priors(p: &TandemPriors) -> Result<SpoofPrevalence, PriorError> {
    let denom = p.pi_non + p.pi_spoof;
    if denom <= 0.0 {
        return Err(PriorError::DegenerateNegatives);
    }
    // Clamp against rounding: the ratio is in [0, 1] exactly.
    SpoofPrevalence::new((p.pi_spoof / denom).min(1.0))
}

/// The three tandem error rates at one operating-point pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TandemRates {
    pub miss: f64,
    pub fa_non: f64,
    pub fa_spf: f64,
}

/// Tandem miss rate. Computed as `1 - (1 - miss_cm)(1 - miss_asv)`, the
/// complement-product form of `miss_cm + miss_asv - miss_cm * miss_asv`,
/// which stays in `[0, 1]` and is monotone in each argument under rounding.
pub fn tandem_miss(p_miss_cm: f64, p_miss_asv: f64) -> f64 {
    1.0 - (1.0 - p_miss_cm) * (1.0 - p_miss_asv)
}

/// Tandem nontarget false-alarm rate: the nontarget must pass the CM
/// (probability `1 - miss_cm`, nontargets are bona fide) and the ASV.
pub fn tandem_fa_non(p_miss_cm: f64, p_fa_non_asv: f64) -> f64 {
    (1.0 - p_miss_cm) * p_fa_non_asv
}

/// Tandem spoof false-alarm rate: the attack must slip past both detectors.
pub fn tandem_fa_spf(p_fa_cm: f64, p_fa_spf_asv: f64) -> f64 {
    p_fa_cm * p_fa_spf_asv
}

/// Total tandem false-alarm rate `(1 - rho) * fa_non + rho * fa_spf`.
pub fn tandem_fa_total(rho: SpoofPrevalence, fa_non: f64, fa_spf: f64) -> f64 {
    let r = rho.value();
    (1.0 - r) * fa_non + r * fa_spf
}

/// Total three-class error `pi_tar * miss + pi_non * fa_non + pi_spoof * fa_spf`.
/// Equals `pi_tar * miss + (1 - pi_tar) * fa_total(rho)` with `rho` derived
/// from the same priors.
pub fn tandem_total_error(p: &TandemPriors, r: &TandemRates) -> f64 {
    p.pi_tar * r.miss + p.pi_non * r.fa_non + p.pi_spoof * r.fa_spf
}

/// Tandem rates at ASV operating point `i` and CM operating point `j`.
///
/// The ASV curve must carry both false-alarm classes and the indices must be
/// valid for their curves; violations panic.
pub fn tandem_rates_at(asv: &RateCurve, cm: &RateCurve, i: usize, j: usize) -> TandemRates {
    let miss_asv = asv.miss(i);
    let miss_cm = cm.miss(j);
    TandemRates {
        miss: tandem_miss(miss_cm, miss_asv),
        fa_non: tandem_fa_non(miss_cm, asv.fa(NegClass::Nontarget, i)),
        fa_spf: tandem_fa_spf(cm.fa(NegClass::Spoof, j), asv.fa(NegClass::Spoof, i)),
    }
}
