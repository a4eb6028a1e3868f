//! Tandem detection cost: cost- and prior-weighted combination of the three
//! tandem error rates, its exact minimization over threshold pairs, and the
//! closed-form behavior at the concurrent operating point.
//!
//! The cost is `C_miss * pi'_tar * miss + C_fa_non * pi'_non * fa_non +
//! C_fa_spf * pi'_spf * fa_spf` with strictly positive costs and *asserted*
//! priors that may differ from the database proportions. At the concurrent
//! operating point all three rates equal the concurrent t-EER, so the cost
//! collapses to `P_E * (C_miss pi'_tar + C_fa_non pi'_non + C_fa_spf
//! pi'_spf)` and is sandwiched between `min(C) * P_E` and `max(C) * P_E`.

use thiserror::Error;

use crate::curves::RateCurve;
use crate::tandem::{tandem_rates_at, TandemPriors, TandemRates};

#[derive(Error, Debug)]
pub enum TdcfError {
    #[error("cost {0} must be strictly positive and finite")]
    BadCost(f64),
}

/// Detection costs and asserted priors of the tandem cost function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TdcfParams {
    c_miss: f64,
    c_fa_non: f64,
    c_fa_spf: f64,
    asserted: TandemPriors,
}

impl TdcfParams {
    pub fn new(
        c_miss: f64,
        c_fa_non: f64,
        c_fa_spf: f64,
        asserted: TandemPriors,
    ) -> Result<Self, TdcfError> {
        for c in [c_miss, c_fa_non, c_fa_spf] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(TdcfError::BadCost(c));
            }
        }
        Ok(TdcfParams {
            c_miss,
            c_fa_non,
            c_fa_spf,
            asserted,
        })
    }

    pub fn c_miss(&self) -> f64 {
        self.c_miss
    }

    pub fn c_fa_non(&self) -> f64 {
        self.c_fa_non
    }

    pub fn c_fa_spf(&self) -> f64 {
        self.c_fa_spf
    }

    pub fn asserted(&self) -> &TandemPriors {
        &self.asserted
    }
}

/// Tandem detection cost of one rate triple.
pub fn tdcf(params: &TdcfParams, r: &TandemRates) -> f64 {
    let p = &params.asserted;
    params.c_miss * p.pi_tar() * r.miss
        + params.c_fa_non * p.pi_non() * r.fa_non
        + params.c_fa_spf * p.pi_spoof() * r.fa_spf
}

/// Location and value of the exact grid minimum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinTdcf {
    pub value: f64,
    pub asv_index: usize,
    pub cm_index: usize,
}

/// Exact minimum of the cost over all operating-point pairs, or over CM
/// points only when `fixed_asv_index` is given (the index must be a valid
/// operating point of the ASV curve). Ties resolve to the smaller ASV
/// index, then the smaller CM index. The scan is lazy in the pair table
/// (nothing quadratic is materialized) but exhaustive, so it is quadratic
/// in time.
pub fn min_tdcf(
    asv: &RateCurve,
    cm: &RateCurve,
    params: &TdcfParams,
    fixed_asv_index: Option<usize>,
) -> MinTdcf {
    let asv_range = match fixed_asv_index {
        Some(i) => i..i + 1,
        None => 0..asv.num_points(),
    };
    let mut best = MinTdcf {
        value: f64::INFINITY,
        asv_index: 0,
        cm_index: 0,
    };
    for i in asv_range {
        for j in 0..cm.num_points() {
            let value = tdcf(params, &tandem_rates_at(asv, cm, i, j));
            if value < best.value {
                best = MinTdcf {
                    value,
                    asv_index: i,
                    cm_index: j,
                };
            }
        }
    }
    best
}

/// Cost bounds at the concurrent operating point with t-EER `p_e_cross`:
/// the exact collapsed value plus its convexity sandwich.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TdcfBounds {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

pub fn tdcf_bounds_at_concurrent(params: &TdcfParams, p_e_cross: f64) -> TdcfBounds {
    let p = &params.asserted;
    let costs = [params.c_miss, params.c_fa_non, params.c_fa_spf];
    let constant =
        params.c_miss * p.pi_tar() + params.c_fa_non * p.pi_non() + params.c_fa_spf * p.pi_spoof();
    let bounds = TdcfBounds {
        lo: costs.iter().copied().fold(f64::INFINITY, f64::min) * p_e_cross,
        hi: costs.iter().copied().fold(f64::NEG_INFINITY, f64::max) * p_e_cross,
        value: p_e_cross * constant,
    };
    debug_assert!(bounds.lo <= bounds.value * (1.0 + 1e-12) + f64::MIN_POSITIVE);
    debug_assert!(bounds.value <= bounds.hi * (1.0 + 1e-12) + f64::MIN_POSITIVE);
    bounds
}
