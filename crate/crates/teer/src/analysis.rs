//! Reporting utilities: the special-case EER battery and class-conditional
//! correlation diagnostics.
//!
//! The special-case battery collects the familiar two-class EERs that are
//! all limiting configurations of the tandem analysis: the ASV EER against
//! nontargets, against spoofs, against a prevalence-weighted mix of both
//! (the mixture EER is computed on the blended false-alarm curve, which is
//! deterministic and exact for any `rho`, rather than by resampling trials),
//! the CM EER, and the concurrent t-EER. Fields whose score class is absent
//! are reported absent rather than zero.
//!
//! The correlation diagnostics probe the class-conditional independence
//! assumption behind the tandem rate products: sample Pearson correlation of
//! the paired `(asv, cm)` scores within each class, and per attack for spoof
//! rows carrying an attack id. A group with fewer than two rows or zero
//! variance in either coordinate is undefined and reported with the reason,
//! never as a silent zero.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::concurrent::concurrent_teer;
use crate::curves::{CurveError, NegClass, RateCurve};
use crate::path::PathError;
use crate::score_io::{AsvScoreSet, CmScoreSet, PairedScoreSet, TrialClass};
use crate::tandem::SpoofPrevalence;

#[derive(Error, Debug)]
pub enum AnalysisError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// The battery of two-class EERs plus the concurrent t-EER. Absent fields
/// mean the required score class was empty.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpecialCaseEers {
    pub asv_tar_vs_non: Option<f64>,
    pub asv_tar_vs_spf: Option<f64>,
    /// EER of targets against the `rho`-weighted nontarget/spoof mixture.
    pub asv_tar_vs_mix: Option<f64>,
    /// The prevalence the mixture row was computed at.
    pub mix_rho: f64,
    pub cm_bona_vs_spf: f64,
    pub concurrent: Option<f64>,
}

pub fn special_case_eers(
    asv: &AsvScoreSet,
    cm: &CmScoreSet,
    rho: SpoofPrevalence,
) -> Result<SpecialCaseEers, AnalysisError> {
    let asv_curve = RateCurve::from_asv(asv)?;
    let cm_curve = RateCurve::from_cm(cm)?;
    let r = rho.value();

    let eer_of = |class: NegClass| -> Option<f64> {
        asv_curve.eer(class).ok().map(|e| e.eer)
    };
    let mix_defined = (r == 0.0 && !asv.non.is_empty())
        || (r == 1.0 && !asv.spf.is_empty())
        || (!asv.non.is_empty() && !asv.spf.is_empty());
    let mix = if mix_defined {
        Some(asv_curve.eer_mixture(r)?.eer)
    } else {
        None
    };
    let concurrent = if asv_curve.has_class(NegClass::Nontarget)
        && asv_curve.has_class(NegClass::Spoof)
    {
        Some(concurrent_teer(&asv_curve, &cm_curve)?.teer)
    } else {
        None
    };

    Ok(SpecialCaseEers {
        asv_tar_vs_non: eer_of(NegClass::Nontarget),
        asv_tar_vs_spf: eer_of(NegClass::Spoof),
        asv_tar_vs_mix: mix,
        mix_rho: r,
        cm_bona_vs_spf: cm_curve.eer(NegClass::Spoof)?.eer,
        concurrent,
    })
}

/// Pearson correlation of one score-pair group, or the reason it is
/// undefined.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationEntry {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub undefined_reason: Option<String>,
}

/// Class-conditional (and optionally attack-conditional) correlations.
#[derive(Clone, Debug, Serialize)]
pub struct CorrelationReport {
    pub per_class: BTreeMap<TrialClass, CorrelationEntry>,
    /// Present only when some spoof row carried an attack id.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_attack: Option<BTreeMap<String, CorrelationEntry>>,
}

fn pearson(pairs: &[(f64, f64)]) -> CorrelationEntry {
    let n = pairs.len();
    if n < 2 {
        return CorrelationEntry {
            n,
            r: None,
            undefined_reason: Some("fewer than 2 trials".to_string()),
        };
    }
    let nf = n as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in pairs {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        let side = if sxx == 0.0 { "asv" } else { "cm" };
        return CorrelationEntry {
            n,
            r: None,
            undefined_reason: Some(format!("zero variance in {side} scores")),
        };
    }
    CorrelationEntry {
        n,
        r: Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)),
        undefined_reason: None,
    }
}

/// Correlations within each class; per attack when attack ids are present.
pub fn class_conditional_correlation(paired: &PairedScoreSet) -> CorrelationReport {
    let mut per_class = BTreeMap::new();
    for class in [TrialClass::Target, TrialClass::Nontarget, TrialClass::Spoof] {
        let pairs = paired.pairs_of(class);
        if !pairs.is_empty() {
            per_class.insert(class, pearson(&pairs));
        }
    }

    let mut by_attack: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for row in &paired.rows {
        if let Some(attack) = &row.attack_id {
            by_attack
                .entry(attack.clone())
                .or_default()
                .push((row.asv, row.cm));
        }
    }
    let per_attack = if by_attack.is_empty() {
        None
    } else {
        Some(
            by_attack
                .into_iter()
                .map(|(attack, pairs)| (attack, pearson(&pairs)))
                .collect(),
        )
    };

    CorrelationReport {
        per_class,
        per_attack,
    }
}
