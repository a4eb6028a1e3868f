//! The concurrent t-EER: the operating point shared by every t-EER path,
//! where the three tandem error rates are simultaneously equal.
//!
//! Two paths for distinct spoof prevalences can only meet where the
//! nontarget and spoof tandem false-alarm rates agree, which after expanding
//! the AND-rule products reduces to the cross-multiplied condition
//!
//! ```text
//! fa_non_asv(i) * (1 - miss_cm(j)) - fa_cm(j) * fa_spf_asv(i) = 0
//! ```
//!
//! This is exactly `fa_non_tdm - fa_spf_tdm` and is used here as the root
//! residual. The cross-multiplied form, never the ratio form, avoids
//! division by zero where `fa_spf_asv` vanishes. Since the intersection lies
//! on every path, locating it requires sweeping a single path (any `rho`
//! does) for the residual's sign change. At the located point the t-EER is
//! reported as the mean of the three tandem rates, with their spread kept as
//! a discretization diagnostic: in the continuous limit the three rates are
//! equal and the product `fa_spf_asv * fa_cm` recovers the same value.
//!
//! The accept-all corner `(0, 0)` satisfies the condition degenerately
//! (`1 - 1 = 0`) and is excluded from candidacy unless nothing else
//! qualifies. With finite score sets the residual may change sign more than
//! once; the crossing with the smallest absolute residual wins and the
//! multiplicity is reported.

use serde::Serialize;

use crate::curves::{NegClass, RateCurve};
use crate::path::{build_teer_path, PathError, TeerPath};
use crate::tandem::{tandem_fa_total, tandem_rates_at, SpoofPrevalence, TandemRates};

/// The located intersection point and its diagnostics.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConcurrentPoint {
    pub asv_index: usize,
    pub cm_index: usize,
    /// Threshold values; `-inf` for accept-all indices.
    pub asv_threshold: f64,
    pub cm_threshold: f64,
    /// Concurrent t-EER estimate: mean of the three tandem rates, clamped to
    /// their range.
    pub teer: f64,
    /// Cross-multiplied intersection residual at the point.
    pub xpoint_residual: f64,
    /// Max minus min of the three tandem rates; bounds the violation of the
    /// three-way equality.
    pub rate_spread: f64,
    /// Number of residual sign changes seen along the swept path.
    pub sign_changes: usize,
    /// Set when no sign change was found and the reported point is merely the
    /// minimal-residual entry.
    pub warning: bool,
}

/// Cross-multiplied intersection residual
/// `fa_non_asv(i) * (1 - miss_cm(j)) - fa_cm(j) * fa_spf_asv(i)`,
/// i.e. the difference between the two tandem false-alarm rates.
pub fn xpoint_residual(asv: &RateCurve, cm: &RateCurve, i: usize, j: usize) -> f64 {
    asv.fa(NegClass::Nontarget, i) * (1.0 - cm.miss(j))
        - cm.fa(NegClass::Spoof, j) * asv.fa(NegClass::Spoof, i)
}

/// Locate the concurrent t-EER by sweeping the `rho = 0` path.
pub fn concurrent_teer(asv: &RateCurve, cm: &RateCurve) -> Result<ConcurrentPoint, PathError> {
    concurrent_teer_at_rho(asv, cm, SpoofPrevalence::new(0.0).expect("0 is a valid prevalence"))
}

/// Locate the concurrent t-EER by sweeping the path built for `rho`. The
/// intersection lies on every path, so any prevalence yields the same point
/// up to discretization.
pub fn concurrent_teer_at_rho(
    asv: &RateCurve,
    cm: &RateCurve,
    rho: SpoofPrevalence,
) -> Result<ConcurrentPoint, PathError> {
    let path = build_teer_path(asv, cm, rho)?;
    Ok(concurrent_point_on_path(asv, cm, &path))
}

/// Locate the concurrent t-EER on an already-built path (the curves must be
/// the ones the path was built from).
pub fn concurrent_point_on_path(
    asv: &RateCurve,
    cm: &RateCurve,
    path: &TeerPath,
) -> ConcurrentPoint {
    locate_on_path(asv, cm, path)
}

fn rates_at_entry(asv: &RateCurve, cm: &RateCurve, path: &TeerPath, k: usize) -> TandemRates {
    let e = &path.entries()[k];
    tandem_rates_at(asv, cm, e.asv_index, e.cm_index)
}

fn locate_on_path(asv: &RateCurve, cm: &RateCurve, path: &TeerPath) -> ConcurrentPoint {
    let entries = path.entries();
    let residuals: Vec<f64> = entries
        .iter()
        .map(|e| xpoint_residual(asv, cm, e.asv_index, e.cm_index))
        .collect();
    let is_corner = |k: usize| entries[k].asv_index == 0 && entries[k].cm_index == 0;

    // Candidate entries at residual sign changes (or exact zeros), preferring
    // within each crossing the side with smaller |residual|, smaller index on
    // ties. The degenerate corner's identically-zero residual is not a
    // candidate.
    let mut candidates: Vec<usize> = Vec::new();
    for k in 0..entries.len() {
        if residuals[k] == 0.0 {
            if !is_corner(k) {
                candidates.push(k);
            }
        } else if k + 1 < entries.len()
            && residuals[k + 1] != 0.0
            && (residuals[k] > 0.0) != (residuals[k + 1] > 0.0)
        {
            let (near, far) = if residuals[k].abs() <= residuals[k + 1].abs() {
                (k, k + 1)
            } else {
                (k + 1, k)
            };
            let pick = if is_corner(near) { far } else { near };
            if !is_corner(pick) {
                candidates.push(pick);
            }
        }
    }
    let sign_changes = candidates.len();

    let min_abs_residual = |pool: &mut dyn Iterator<Item = usize>| {
        pool.min_by(|&a, &b| {
            residuals[a]
                .abs()
                .total_cmp(&residuals[b].abs())
                .then(a.cmp(&b))
        })
    };

    let (chosen, warning) = if let Some(best) = min_abs_residual(&mut candidates.iter().copied()) {
        (best, false)
    } else {
        // No usable sign change: report the minimal-|residual| entry with a
        // warning. The corner is still shunned; it wins only when the path
        // has nothing else.
        let fallback = min_abs_residual(&mut (0..entries.len()).filter(|&k| !is_corner(k)))
            .or_else(|| min_abs_residual(&mut (0..entries.len())))
            .expect("a path always has at least one entry");
        (fallback, true)
    };

    let rates = rates_at_entry(asv, cm, path, chosen);
    let max = rates.miss.max(rates.fa_non).max(rates.fa_spf);
    let min = rates.miss.min(rates.fa_non).min(rates.fa_spf);
    let mean = ((rates.miss + rates.fa_non + rates.fa_spf) / 3.0).clamp(min, max);
    let e = &entries[chosen];
    ConcurrentPoint {
        asv_index: e.asv_index,
        cm_index: e.cm_index,
        asv_threshold: e.asv_threshold,
        cm_threshold: e.cm_threshold,
        teer: mean,
        xpoint_residual: residuals[chosen],
        rate_spread: max - min,
        sign_changes,
        warning,
    }
}

/// Per-prevalence deviation `|miss_tdm - fa_tdm(rho)|` evaluated at the
/// concurrent point, plus the maximum over the requested prevalences.
#[derive(Clone, Debug, Serialize)]
pub struct IntersectionReport {
    pub point: ConcurrentPoint,
    /// `(rho, deviation)` rows in request order.
    pub rows: Vec<(f64, f64)>,
    pub max_deviation: f64,
}

/// Check that the located point behaves as a t-EER point for every requested
/// prevalence: at a true intersection the deviation vanishes as the score
/// sets grow.
pub fn verify_intersection(
    asv: &RateCurve,
    cm: &RateCurve,
    rhos: &[SpoofPrevalence],
) -> Result<IntersectionReport, PathError> {
    let point = concurrent_teer(asv, cm)?;
    let rates = tandem_rates_at(asv, cm, point.asv_index, point.cm_index);
    let rows: Vec<(f64, f64)> = rhos
        .iter()
        .map(|&rho| {
            let fa = tandem_fa_total(rho, rates.fa_non, rates.fa_spf);
            (rho.value(), (rates.miss - fa).abs())
        })
        .collect();
    let max_deviation = rows.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    Ok(IntersectionReport {
        point,
        rows,
        max_deviation,
    })
}
